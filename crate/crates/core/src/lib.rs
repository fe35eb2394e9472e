//! Cone-beam CT reconstruction through a pseudo-polar discrete Radon space.
//!
//! The pipeline builds the 3D Radon space of an object from circular-orbit
//! cone-beam projections with a discrete Grangeat formula, sampled on the
//! pseudo-polar (linogram) grid, and inverts it with a fast inverse 3D
//! discrete Radon transform.
//!
//! Modules, bottom-up:
//!
//! * [`spectral`]: Dirichlet kernel, chirp-z based fractional Fourier
//!   transform, centered DFTs and padding helpers.
//! * [`ppft`]: 2D/3D pseudo-polar Fourier transforms.
//! * [`drt`]: fast 2D/3D discrete Radon transforms, the inverse 3D transform
//!   and brute-force oracles.
//! * [`geometry`]: scanner geometry and every coordinate conversion.
//! * [`grangeat`]: pre-weighting, detector Radon derivatives, rebinning,
//!   radial integration and shadow-zone filling.
//! * [`phantom`]: analytic ellipsoid phantoms and a cone-beam projector.
//! * [`metrics`]: PSNR, CNR and MSSIM.
//! * [`io`]: raw `f32` + JSON sidecar array container.

pub mod drt;
pub mod error;
pub mod geometry;
pub mod grangeat;
pub mod io;
pub mod metrics;
pub mod phantom;
pub mod ppft;
pub mod spectral;
pub mod volume;

pub use error::{Error, Result};
pub use volume::Volume;
