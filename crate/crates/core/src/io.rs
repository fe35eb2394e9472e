//! Raw array container: a little-endian `f32` payload in C order next to a
//! JSON sidecar header. For a payload at `volume.raw` the header lives at
//! `volume.raw.json`.

use ndarray::{ArrayD, ArrayViewD, IxDyn};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use crate::{Error, Result, Volume};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub shape: Vec<usize>,
    /// Always `"C"`.
    pub order: String,
    pub units: String,
    /// Sample spacing in mm.
    pub du: f64,
    pub config_hash: String,
}

impl Header {
    pub fn new(shape: &[usize], units: &str, du: f64, config_hash: &str) -> Self {
        Self {
            shape: shape.to_vec(),
            order: "C".into(),
            units: units.into(),
            du,
            config_hash: config_hash.into(),
        }
    }
}

pub fn header_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes `array` and its header. The header's shape is taken from `array`.
pub fn save_array(path: &Path, array: ArrayViewD<'_, f64>, header: &Header) -> Result<()> {
    let header = Header {
        shape: array.shape().to_vec(),
        ..header.clone()
    };
    let mut bytes = Vec::with_capacity(array.len() * 4);
    for &x in array.iter() {
        bytes.extend_from_slice(&(x as f32).to_le_bytes());
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let hp = header_path(path);
    let text = serde_json::to_string_pretty(&header).map_err(|e| Error::Header {
        path: hp.clone(),
        source: e,
    })?;
    fs::write(&hp, text + "\n").map_err(|e| Error::io(&hp, e))
}

pub fn load_header(path: &Path) -> Result<Header> {
    let hp = header_path(path);
    let text = fs::read_to_string(&hp).map_err(|e| Error::io(&hp, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Header { path: hp, source: e })
}

pub fn load_array(path: &Path) -> Result<(ArrayD<f64>, Header)> {
    let header = load_header(path)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let count: usize = header.shape.iter().product();
    if bytes.len() != count * 4 {
        return Err(Error::ShapeMismatch {
            expected: header.shape.clone(),
            actual: vec![bytes.len() / 4],
        });
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let array = ArrayD::from_shape_vec(IxDyn(&header.shape), values).map_err(|_| Error::ShapeMismatch {
        expected: header.shape.clone(),
        actual: vec![count],
    })?;
    Ok((array, header))
}

pub fn save_volume(path: &Path, volume: &Volume, config_hash: &str) -> Result<()> {
    let header = Header::new(volume.data.shape(), "density", volume.voxel_size, config_hash);
    save_array(path, volume.data.view().into_dyn(), &header)
}

pub fn load_volume(path: &Path) -> Result<(Volume, Header)> {
    let (array, header) = load_array(path)?;
    let data = array
        .into_dimensionality()
        .map_err(|_| Error::ShapeMismatch {
            expected: vec![0; 3],
            actual: header.shape.clone(),
        })?;
    Ok((Volume::new(data, header.du)?, header))
}
