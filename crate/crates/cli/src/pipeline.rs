//! Stage runner. Every stage reads its inputs back from the persisted
//! artifacts, so a run split across invocations matches a single run bit
//! for bit.

use std::path::{Path, PathBuf};

use cbct_radon::drt::{drt3, idrt3, RadonSpace4D};
use cbct_radon::grangeat::{
    detector_derivatives, fill_shadow_zone, integrate_radial, rebin, stack_derivatives, unrecoverable_mask,
    ShadowFill,
};
use cbct_radon::io::{load_array, save_array, Header};
use cbct_radon::metrics::{cnr, mssim, psnr, Box3, RegionSpec, SsimParams};
use cbct_radon::phantom::{cone_beam_project, Phantom, ProjectionSet};
use cbct_radon::Volume;
use ndarray::{Array4, ArrayD, Ix3, Ix4};
use serde::Serialize;

use crate::config::{PhantomSource, RunConfig, Stage};
use crate::error::{PipelineError, StageContext};

pub const PHANTOM: &str = "phantom.raw";
pub const PROJECTIONS: &str = "projections.raw";
pub const DETECTOR_DERIVATIVES: &str = "detector_derivatives.raw";
pub const RADON_DERIVATIVE: &str = "radon_derivative.raw";
pub const RADON_UNFILLED: &str = "radon_unfilled.raw";
pub const SHADOW_MASK: &str = "shadow_mask.raw";
pub const RADON: &str = "radon.raw";
pub const RECONSTRUCTION: &str = "reconstruction.raw";
pub const METRICS: &str = "metrics.csv";

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    #[serde(rename = "run-id")]
    pub run_id: String,
    pub metric: String,
    pub value: f64,
    pub parameters: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// First 12 hex digits of the config hash.
    pub run_id: String,
    pub config_hash: String,
    /// Files written, payloads and sidecars.
    pub artifacts: Vec<PathBuf>,
    pub metrics: Vec<MetricRow>,
}

/// Runs the configured stages, capped at `config.workers` threads.
pub fn run_pipeline(config: &RunConfig) -> Result<RunReport, PipelineError> {
    config.validate()?;
    match config.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
            pool.install(|| run_stages(config))
        }
        None => run_stages(config),
    }
}

struct Ctx<'a> {
    config: &'a RunConfig,
    hash: String,
    artifacts: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.config.out.join(name)
    }

    fn save(&mut self, stage: Stage, name: &str, array: ArrayD<f64>, units: &str, du: f64) -> Result<(), PipelineError> {
        let path = self.path(name);
        let header = Header::new(array.shape(), units, du, &self.hash);
        save_array(&path, array.view(), &header).stage(stage)?;
        self.artifacts.push(cbct_radon::io::header_path(&path));
        self.artifacts.push(path);
        Ok(())
    }

    fn load(&self, stage: Stage, name: &str) -> Result<(ArrayD<f64>, Header), PipelineError> {
        let path = self.path(name);
        let (array, header) = load_array(&path).stage(stage)?;
        if header.config_hash != self.hash {
            return Err(PipelineError::HashMismatch {
                stage,
                path,
                found: header.config_hash,
                expected: self.hash.clone(),
            });
        }
        Ok((array, header))
    }

    fn load_volume(&self, stage: Stage, name: &str) -> Result<Volume, PipelineError> {
        let (array, header) = self.load(stage, name)?;
        let data = array.into_dimensionality::<Ix3>().map_err(|e| invalid(stage, e))?;
        Volume::new(data, header.du).stage(stage)
    }

    fn load_radon(&self, stage: Stage, name: &str) -> Result<RadonSpace4D, PipelineError> {
        let (array, header) = self.load(stage, name)?;
        let data = array.into_dimensionality::<Ix4>().map_err(|e| invalid(stage, e))?;
        RadonSpace4D::new(data, header.du).stage(stage)
    }
}

fn invalid(stage: Stage, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Invalid {
        stage,
        message: e.to_string(),
    }
}

fn analytic_phantom(config: &RunConfig, stage: Stage) -> Result<Option<Phantom>, PipelineError> {
    let sx = config.geometry.sx;
    match &config.phantom {
        PhantomSource::Builtin(name) => Phantom::builtin(name, sx)
            .map(Some)
            .ok_or_else(|| invalid(stage, format!("unknown builtin phantom {name:?}"))),
        PhantomSource::Json(path) => {
            let p = Phantom::load(path).stage(stage)?;
            if p.sx != sx {
                return Err(invalid(stage, format!("phantom side {} differs from geometry sx {}", p.sx, sx)));
            }
            Ok(Some(p))
        }
        PhantomSource::Volume(_) => Ok(None),
    }
}

fn run_stages(config: &RunConfig) -> Result<RunReport, PipelineError> {
    let hash = config.hash()?;
    let mut ctx = Ctx {
        config,
        hash: hash.clone(),
        artifacts: Vec::new(),
    };
    std::fs::create_dir_all(&config.out).map_err(|source| PipelineError::Io {
        stage: config.stages[0],
        path: config.out.clone(),
        source,
    })?;
    let mut metrics = Vec::new();
    for &stage in &config.stages {
        match stage {
            Stage::Phantom => stage_phantom(&mut ctx)?,
            Stage::Project => stage_project(&mut ctx)?,
            Stage::Radon => stage_radon(&mut ctx)?,
            Stage::Reconstruct => stage_reconstruct(&mut ctx)?,
            Stage::Metrics => metrics = stage_metrics(&mut ctx)?,
        }
    }
    Ok(RunReport {
        run_id: hash[..12].to_string(),
        config_hash: hash,
        artifacts: ctx.artifacts,
        metrics,
    })
}

/// Reference volume: voxel averages of analytic phantoms, or the given
/// volume as is.
fn stage_phantom(ctx: &mut Ctx<'_>) -> Result<(), PipelineError> {
    let stage = Stage::Phantom;
    let geom = ctx.config.geometry;
    let volume = match analytic_phantom(ctx.config, stage)? {
        Some(p) => p.voxelize_averaged(geom.nx, ctx.config.reference_subsamples).stage(stage)?,
        None => {
            let PhantomSource::Volume(path) = &ctx.config.phantom else {
                unreachable!("analytic sources handled above")
            };
            let (v, _) = cbct_radon::io::load_volume(path).stage(stage)?;
            if v.n() != geom.nx {
                return Err(invalid(stage, format!("volume has n={}, geometry nx={}", v.n(), geom.nx)));
            }
            v
        }
    };
    ctx.save(stage, PHANTOM, volume.data.into_dyn(), "density", volume.voxel_size)
}

/// Analytic projections for ellipsoid phantoms, ray marching for volumes.
fn stage_project(ctx: &mut Ctx<'_>) -> Result<(), PipelineError> {
    let stage = Stage::Project;
    let geom = ctx.config.geometry;
    let reference = ctx.load_volume(stage, PHANTOM)?;
    let proj = match analytic_phantom(ctx.config, stage)? {
        Some(p) => cone_beam_project(&p, &geom),
        None => cone_beam_project(&reference, &geom),
    }
    .stage(stage)?;
    ctx.save(stage, PROJECTIONS, proj.data.into_dyn(), "mm*density", proj.pixel_size)
}

fn stage_radon(ctx: &mut Ctx<'_>) -> Result<(), PipelineError> {
    let stage = Stage::Radon;
    let config = ctx.config;
    let geom = config.geometry;
    let (array, header) = ctx.load(stage, PROJECTIONS)?;
    let data = array.into_dimensionality::<Ix3>().map_err(|e| invalid(stage, e))?;
    if data.dim() != (geom.n_proj, geom.nu, geom.nu) {
        return Err(invalid(stage, format!("projections have shape {:?}", data.shape())));
    }
    let proj = ProjectionSet {
        data,
        pixel_size: header.du,
        psis: (0..geom.n_proj).map(|i| geom.psi(i)).collect(),
    };
    let derivs = detector_derivatives(&proj, &geom, config.far_source()).stage(stage)?;
    let du = proj.pixel_size;
    ctx.save(stage, DETECTOR_DERIVATIVES, stack_derivatives(&derivs).into_dyn(), "mm*density", du)?;

    let deriv = rebin(&derivs, &geom).stage(stage)?;
    let dm = geom.dm();
    ctx.save(stage, RADON_DERIVATIVE, deriv.values.data.clone().into_dyn(), "density/mm", dm)?;
    let radon = integrate_radial(&deriv);
    let mask = unrecoverable_mask(&deriv.shadow, &geom);
    ctx.save(stage, RADON_UNFILLED, radon.data.clone().into_dyn(), "density", dm)?;
    ctx.save(stage, SHADOW_MASK, mask.mapv(|b| if b { 1.0 } else { 0.0 }).into_dyn(), "flag", dm)?;

    let oracle = match config.shadow {
        ShadowFill::Oracle => {
            let reference = ctx.load_volume(stage, PHANTOM)?;
            Some(drt3(reference.view(), reference.voxel_size).stage(stage)?)
        }
        _ => None,
    };
    let filled = fill_shadow_zone(&radon, &mask, config.shadow, oracle.as_ref()).stage(stage)?;
    ctx.save(stage, RADON, filled.data.into_dyn(), "density", dm)
}

fn stage_reconstruct(ctx: &mut Ctx<'_>) -> Result<(), PipelineError> {
    let stage = Stage::Reconstruct;
    let radon = ctx.load_radon(stage, RADON)?;
    let volume = idrt3(&radon).stage(stage)?;
    ctx.save(stage, RECONSTRUCTION, volume.data.into_dyn(), "density", volume.voxel_size)
}

/// Central cube against a corner cube, each of side `max(n/8, 2)`.
pub fn default_regions(n: usize) -> RegionSpec {
    let side = (n / 8).max(2);
    let lo = n / 2 - side / 2;
    RegionSpec {
        roi: Box3 {
            start: [lo; 3],
            end: [lo + side; 3],
        },
        reference: Box3 {
            start: [0; 3],
            end: [side; 3],
        },
    }
}

/// Peak density: the analytic maximum for ellipsoid phantoms, the sample
/// maximum for volumes.
fn mu_max(phantom: Option<&Phantom>, reference: &Volume) -> f64 {
    match phantom {
        Some(p) => p.max_density(128),
        None => reference.data.iter().copied().fold(f64::MIN, f64::max),
    }
}

fn stage_metrics(ctx: &mut Ctx<'_>) -> Result<Vec<MetricRow>, PipelineError> {
    let stage = Stage::Metrics;
    let config = ctx.config;
    let n = config.geometry.nx;
    let recon = ctx.load_volume(stage, RECONSTRUCTION)?;
    let reference = ctx.load_volume(stage, PHANTOM)?;
    let phantom = analytic_phantom(config, stage)?;
    let peak = mu_max(phantom.as_ref(), &reference);
    if peak.is_nan() || peak <= 0.0 {
        return Err(invalid(stage, "reference has no positive density"));
    }
    let params = SsimParams::new(peak);
    let regions = config.regions.unwrap_or_else(|| default_regions(n));
    let run_id = ctx.hash[..12].to_string();
    let reference_kind = if phantom.is_some() { "voxel-average" } else { "volume" };
    let common = format!("reference={reference_kind};mu_max={peak}");
    let row = |metric: &str, value: f64, parameters: String| MetricRow {
        run_id: run_id.clone(),
        metric: metric.into(),
        value,
        parameters,
    };

    let mut rows = vec![
        row(
            "psnr",
            psnr(recon.data.view().into_dyn(), reference.data.view().into_dyn(), peak).stage(stage)?,
            common.clone(),
        ),
        row(
            "mssim",
            mssim(recon.view(), reference.view(), &params).stage(stage)?,
            format!("{common};window={};axis=2", params.window),
        ),
        row(
            "cnr",
            cnr(recon.view(), &regions).stage(stage)?,
            format!(
                "roi={:?}..{:?};reference={:?}..{:?}",
                regions.roi.start, regions.roi.end, regions.reference.start, regions.reference.end
            ),
        ),
    ];
    if let Some(p) = &phantom {
        let point = p.voxelize(n).stage(stage)?;
        let point_params = format!("reference=voxel-center;mu_max={peak}");
        rows.push(row(
            "psnr_point",
            psnr(recon.data.view().into_dyn(), point.data.view().into_dyn(), peak).stage(stage)?,
            point_params.clone(),
        ));
        rows.push(row(
            "mssim_point",
            mssim(recon.view(), point.view(), &params).stage(stage)?,
            format!("{point_params};window={};axis=2", params.window),
        ));
    }

    let path = ctx.path(METRICS);
    write_csv(&path, &rows).map_err(|source| PipelineError::Io {
        stage,
        path: path.clone(),
        source,
    })?;
    ctx.artifacts.push(path);
    Ok(rows)
}

fn write_csv(path: &Path, rows: &[MetricRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

/// Reads a metrics CSV back.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricRow>, csv::Error> {
    #[derive(serde::Deserialize)]
    struct Row {
        #[serde(rename = "run-id")]
        run_id: String,
        metric: String,
        value: f64,
        parameters: String,
    }
    csv::Reader::from_path(path)?
        .deserialize::<Row>()
        .map(|r| {
            r.map(|r| MetricRow {
                run_id: r.run_id,
                metric: r.metric,
                value: r.value,
                parameters: r.parameters,
            })
        })
        .collect()
}

/// Loads a persisted volume artifact of `config`, checking its hash.
pub fn load_artifact_volume(config: &RunConfig, name: &str) -> Result<Volume, PipelineError> {
    let ctx = Ctx {
        config,
        hash: config.hash()?,
        artifacts: Vec::new(),
    };
    ctx.load_volume(Stage::Metrics, name)
}

/// Loads a persisted Radon-space artifact of `config`, checking its hash.
pub fn load_artifact_radon(config: &RunConfig, name: &str) -> Result<RadonSpace4D, PipelineError> {
    let ctx = Ctx {
        config,
        hash: config.hash()?,
        artifacts: Vec::new(),
    };
    ctx.load_radon(Stage::Metrics, name)
}

/// Loads the persisted shadow mask of `config`.
pub fn load_artifact_mask(config: &RunConfig) -> Result<Array4<bool>, PipelineError> {
    let r = load_artifact_radon(config, SHADOW_MASK)?;
    Ok(r.data.mapv(|v| v != 0.0))
}
