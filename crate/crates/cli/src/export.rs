//! Slice export to binary portable graymaps.

use std::path::{Path, PathBuf};

use cbct_radon::Volume;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};
use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

/// Sidecar of one exported slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceWindow {
    pub axis: usize,
    pub index: usize,
    /// Value mapped to gray level 0.
    pub min: f64,
    /// Value mapped to gray level 255.
    pub max: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("axis {0} is not 0, 1 or 2")]
    BadAxis(usize),
    #[error("slice {index} out of range for {len} slices")]
    BadIndex { index: usize, len: usize },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

/// Gray level of `x` under the min-max window; a flat window maps to 0.
pub fn gray_level(x: f64, min: f64, max: f64) -> u8 {
    if max > min {
        (255.0 * (x - min) / (max - min)).round().clamp(0.0, 255.0) as u8
    } else {
        0
    }
}

/// Min-max windowed 8-bit image of a slice, rows along the first remaining
/// axis.
pub fn window_slice(slice: ArrayView2<'_, f64>) -> (Array2<u8>, f64, f64) {
    let min = slice.iter().copied().fold(f64::INFINITY, f64::min);
    let max = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (slice.mapv(|x| gray_level(x, min, max)), min, max)
}

/// Writes `slice_{axis}_{index:03}.pgm` and its `.json` window sidecar into
/// `dir` for each index. Returns the image paths.
pub fn export_slices(volume: &Volume, axis: usize, indices: &[usize], dir: &Path) -> Result<Vec<PathBuf>, ExportError> {
    if axis > 2 {
        return Err(ExportError::BadAxis(axis));
    }
    let len = volume.data.len_of(Axis(axis));
    if let Some(&index) = indices.iter().find(|&&i| i >= len) {
        return Err(ExportError::BadIndex { index, len });
    }
    std::fs::create_dir_all(dir).map_err(|source| ExportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths = Vec::with_capacity(indices.len());
    for &index in indices {
        let (gray, min, max) = window_slice(volume.data.index_axis(Axis(axis), index));
        let path = dir.join(format!("slice_{axis}_{index:03}.pgm"));
        write_pgm(&path, &gray)?;
        let window = SliceWindow { axis, index, min, max };
        let side = cbct_radon::io::header_path(&path);
        let text = serde_json::to_string_pretty(&window).expect("window serializes") + "\n";
        std::fs::write(&side, text).map_err(|source| ExportError::Io { path: side, source })?;
        paths.push(path);
    }
    Ok(paths)
}

fn write_pgm(path: &Path, gray: &Array2<u8>) -> Result<(), ExportError> {
    let (rows, cols) = gray.dim();
    let bytes: Vec<u8> = gray.iter().copied().collect();
    let file = std::fs::File::create(path).map_err(|source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    PnmEncoder::new(std::io::BufWriter::new(file))
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&bytes, cols as u32, rows as u32, ExtendedColorType::L8)
        .map_err(|source| ExportError::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Reads a graymap written by [`export_slices`].
pub fn read_pgm(path: &Path) -> Result<Array2<u8>, ExportError> {
    let img = image::open(path)
        .map_err(|source| ExportError::Image {
            path: path.to_path_buf(),
            source,
        })?
        .into_luma8();
    let (w, h) = img.dimensions();
    Ok(Array2::from_shape_vec((h as usize, w as usize), img.into_raw()).expect("image dimensions"))
}
