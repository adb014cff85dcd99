//! Flux-noise modeling for frequency-tunable transmons with single-loop and
//! gradiometric (counter-wound double-loop) SQUID geometries.
//!
//! The crate covers the full chain from a spatially correlated surface
//! magnetization field to measurable Ramsey coherence:
//!
//! - [`geometry`]: sensitivity kernels `K(r)` of idealized loop layouts and
//!   their momentum-space filters `|K̃(k)|²`.
//! - [`spectrum`]: spatial magnetization-noise spectra `S_m(k; ξ)` and their
//!   real-space correlation functions.
//! - [`variance`]: the radial momentum-space integral for the flux variance
//!   `⟨Φ²⟩` and the geometry-induced suppression factor `S(ξ)`.
//! - [`transmon`]: the frequency–flux dispersion `ω(Φ)` and its derivatives.
//! - [`ramsey`]: quasi-static Gaussian dephasing envelopes and `T₂*`
//!   extraction.
//! - [`fit`]: extraction of the flux-noise amplitude (and optionally a
//!   bias-independent dephasing rate) from measured `T₂*(Φ)` data.
//! - [`montecarlo`]: a brute-force validation path that synthesizes Gaussian
//!   random magnetization fields on a grid and estimates `⟨Φ²⟩` by sampling.
//!
//! Geometry and spectrum variants sit behind the [`geometry::SensitivityKernel`]
//! and [`spectrum::MagnetizationSpectrum`] traits and are constructed by name
//! through [`registry::StrategyRegistry`], so callers (CLI, configs, tests)
//! select the model kind at runtime.

pub mod error;
pub mod fit;
pub mod geometry;
pub mod montecarlo;
pub mod numerics;
pub mod ramsey;
pub mod registry;
pub mod spectrum;
pub mod transmon;
pub mod variance;

pub use error::{Error, Result};
