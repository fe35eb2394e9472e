//! Run configuration, its JSON file form and the content hash stamped on
//! every artifact.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cbct_radon::geometry::Geometry;
use cbct_radon::grangeat::{far_source_default, ShadowFill};
use cbct_radon::metrics::RegionSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::PipelineError;

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Phantom,
    Project,
    Radon,
    Reconstruct,
    Metrics,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Phantom, Stage::Project, Stage::Radon, Stage::Reconstruct, Stage::Metrics];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Phantom => "phantom",
            Stage::Project => "project",
            Stage::Radon => "radon",
            Stage::Reconstruct => "reconstruct",
            Stage::Metrics => "metrics",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| PipelineError::Config(format!("unknown stage {s:?}")))
    }
}

/// Parses a comma-separated stage list such as `radon,reconstruct`.
pub fn parse_stages(list: &str) -> Result<Vec<Stage>, PipelineError> {
    list.split(',').map(|s| s.trim().parse()).collect()
}

/// Where the object comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomSource {
    /// `shepp-logan` or `head`.
    Builtin(String),
    /// JSON list of ellipsoids, see [`cbct_radon::phantom::Phantom`].
    Json(PathBuf),
    /// Persisted `nx³` volume.
    Volume(PathBuf),
}

impl PhantomSource {
    /// `shepp-logan`, `head`, or a path: `.json` files are ellipsoid lists,
    /// anything else a persisted volume.
    pub fn parse(arg: &str) -> Self {
        let path = Path::new(arg);
        if path.extension().is_some_and(|e| e == "json") {
            Self::Json(path.to_path_buf())
        } else if path.exists() {
            Self::Volume(path.to_path_buf())
        } else {
            Self::Builtin(arg.to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub phantom: PhantomSource,
    pub shadow: ShadowFill,
    /// `SA ≈ SO`; `None` picks the default for the geometry.
    pub far_source: Option<bool>,
    pub out: PathBuf,
    pub stages: Vec<Stage>,
    /// Thread cap; `None` uses every core.
    pub workers: Option<usize>,
    /// CNR regions; `None` uses a central cube against a corner cube.
    pub regions: Option<RegionSpec>,
    /// Sub-samples per axis when averaging analytic phantoms into voxels.
    pub reference_subsamples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry {
                sx: 64.0,
                nx: 32,
                su: 256.0,
                nu: 64,
                sp: 1500.0,
                so: 1000.0,
                n_proj: 360,
            },
            phantom: PhantomSource::Builtin("shepp-logan".into()),
            shadow: ShadowFill::Zero,
            far_source: None,
            out: PathBuf::from("run"),
            stages: Stage::ALL.to_vec(),
            workers: None,
            regions: None,
            reference_subsamples: 4,
        }
    }
}

/// Config file contents; every field is optional and overrides the default.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub geometry: Option<Geometry>,
    pub phantom: Option<PhantomSource>,
    pub shadow: Option<String>,
    pub far_source: Option<bool>,
    pub out: Option<PathBuf>,
    pub stages: Option<Vec<Stage>>,
    pub workers: Option<usize>,
    pub regions: Option<RegionSpec>,
    pub reference_subsamples: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies the file on top of `base`.
    pub fn apply(self, mut base: RunConfig) -> Result<RunConfig, PipelineError> {
        if let Some(g) = self.geometry {
            base.geometry = g;
        }
        if let Some(p) = self.phantom {
            base.phantom = p;
        }
        if let Some(s) = self.shadow {
            base.shadow = parse_shadow(&s)?;
        }
        if self.far_source.is_some() {
            base.far_source = self.far_source;
        }
        if let Some(o) = self.out {
            base.out = o;
        }
        if let Some(s) = self.stages {
            base.stages = s;
        }
        if self.workers.is_some() {
            base.workers = self.workers;
        }
        if self.regions.is_some() {
            base.regions = self.regions;
        }
        if let Some(s) = self.reference_subsamples {
            base.reference_subsamples = s;
        }
        Ok(base)
    }
}

pub fn parse_shadow(s: &str) -> Result<ShadowFill, PipelineError> {
    s.parse().map_err(|e: cbct_radon::Error| PipelineError::Config(e.to_string()))
}

/// Fields that determine artifact contents.
#[derive(Serialize)]
struct HashInput<'a> {
    geometry: &'a Geometry,
    phantom: &'a PhantomSource,
    phantom_digest: Option<String>,
    shadow: String,
    far_source: bool,
    regions: &'a Option<RegionSpec>,
    reference_subsamples: usize,
}

impl RunConfig {
    pub fn far_source(&self) -> bool {
        self.far_source.unwrap_or_else(|| far_source_default(&self.geometry))
    }

    /// Checks the geometry, referenced paths and the stage list, which must
    /// be a non-empty contiguous run of [`Stage::ALL`].
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.geometry
            .validated()
            .map_err(|e| PipelineError::Config(format!("geometry: {e}")))?;
        match &self.phantom {
            PhantomSource::Builtin(name) => {
                if cbct_radon::phantom::Phantom::builtin(name, self.geometry.sx).is_none() {
                    return Err(PipelineError::Config(format!("unknown builtin phantom {name:?}")));
                }
            }
            PhantomSource::Json(p) | PhantomSource::Volume(p) => {
                if !p.exists() {
                    return Err(PipelineError::Config(format!("{} does not exist", p.display())));
                }
            }
        }
        if self.stages.is_empty() {
            return Err(PipelineError::Config("no stages requested".into()));
        }
        let first = self.stages[0] as usize;
        let contiguous = self.stages.iter().enumerate().all(|(i, &s)| s as usize == first + i);
        if !contiguous {
            return Err(PipelineError::Config(format!(
                "stages {:?} are not a contiguous run of phantom, project, radon, reconstruct, metrics",
                self.stages.iter().map(|s| s.name()).collect::<Vec<_>>()
            )));
        }
        if self.reference_subsamples == 0 {
            return Err(PipelineError::Config("reference_subsamples must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(PipelineError::Config("workers must be positive".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of every field that affects artifact contents. Files
    /// referenced by the phantom source contribute their bytes.
    pub fn hash(&self) -> Result<String, PipelineError> {
        let phantom_digest = match &self.phantom {
            PhantomSource::Builtin(_) => None,
            PhantomSource::Json(p) | PhantomSource::Volume(p) => {
                let bytes = std::fs::read(p)
                    .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", p.display())))?;
                Some(hex::encode(Sha256::digest(&bytes)))
            }
        };
        let input = HashInput {
            geometry: &self.geometry,
            phantom: &self.phantom,
            phantom_digest,
            shadow: self.shadow.to_string(),
            far_source: self.far_source(),
            regions: &self.regions,
            reference_subsamples: self.reference_subsamples,
        };
        let json = serde_json::to_vec(&input).expect("config serializes");
        Ok(hex::encode(Sha256::digest(&json)))
    }
}
