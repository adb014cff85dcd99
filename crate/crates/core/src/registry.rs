//! Name-keyed registry of geometry and spectrum strategies.
//!
//! Configuration files and the CLI refer to model variants by name
//! (`"single_ring"`, `"gradiometric_pair"`, `"gaussian"`, `"white"`); the
//! registry maps those names to builders returning trait objects. Additional
//! variants can be registered at runtime without touching the call sites.

use crate::error::{Error, Result};
use crate::geometry::{GradiometricPair, RingSpec, SensitivityKernel, SingleRing};
use crate::spectrum::{GaussianCorrelated, MagnetizationSpectrum, White};
use std::collections::BTreeMap;

/// Kind-agnostic geometry parameters, as they appear in a config.
#[derive(Debug, Clone, Copy)]
pub struct GeometryParams {
    pub ring_radius: f64,
    pub annulus_width: f64,
    /// Sub-loop separation; required by pair layouts, ignored by single
    /// rings.
    pub separation: Option<f64>,
    pub coupling_amplitude: f64,
}

impl GeometryParams {
    pub fn ring(&self) -> Result<RingSpec> {
        RingSpec::new(self.ring_radius, self.annulus_width, self.coupling_amplitude)
    }
}

/// Kind-agnostic spectrum parameters.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumParams {
    /// Correlation length; required by the Gaussian model, ignored by white.
    pub correlation_length: Option<f64>,
    pub amplitude: f64,
}

pub type KernelBuilder = fn(&GeometryParams) -> Result<Box<dyn SensitivityKernel>>;
pub type SpectrumBuilder = fn(&SpectrumParams) -> Result<Box<dyn MagnetizationSpectrum>>;

/// Registry of named geometry and spectrum builders.
pub struct StrategyRegistry {
    kernels: BTreeMap<&'static str, KernelBuilder>,
    spectra: BTreeMap<&'static str, SpectrumBuilder>,
}

fn build_single_ring(p: &GeometryParams) -> Result<Box<dyn SensitivityKernel>> {
    Ok(Box::new(SingleRing::new(p.ring()?)))
}

fn build_gradiometric_pair(p: &GeometryParams) -> Result<Box<dyn SensitivityKernel>> {
    let separation = p.separation.ok_or(Error::InvalidParameter {
        field: "separation",
        reason: "gradiometric_pair requires a sub-loop separation".into(),
    })?;
    Ok(Box::new(GradiometricPair::new(p.ring()?, separation)?))
}

fn build_gaussian(p: &SpectrumParams) -> Result<Box<dyn MagnetizationSpectrum>> {
    let xi = p.correlation_length.ok_or(Error::InvalidParameter {
        field: "correlation_length",
        reason: "gaussian spectrum requires a correlation length".into(),
    })?;
    Ok(Box::new(GaussianCorrelated::new(xi, p.amplitude)?))
}

fn build_white(p: &SpectrumParams) -> Result<Box<dyn MagnetizationSpectrum>> {
    Ok(Box::new(White::new(p.amplitude)?))
}

impl StrategyRegistry {
    /// Registry preloaded with the built-in layouts and spectra.
    pub fn builtin() -> Self {
        let mut reg = Self {
            kernels: BTreeMap::new(),
            spectra: BTreeMap::new(),
        };
        reg.register_kernel("single_ring", build_single_ring);
        reg.register_kernel("gradiometric_pair", build_gradiometric_pair);
        reg.register_spectrum("gaussian", build_gaussian);
        reg.register_spectrum("white", build_white);
        reg
    }

    pub fn register_kernel(&mut self, name: &'static str, builder: KernelBuilder) {
        self.kernels.insert(name, builder);
    }

    pub fn register_spectrum(&mut self, name: &'static str, builder: SpectrumBuilder) {
        self.spectra.insert(name, builder);
    }

    pub fn kernel_kinds(&self) -> Vec<&'static str> {
        self.kernels.keys().copied().collect()
    }

    pub fn spectrum_kinds(&self) -> Vec<&'static str> {
        self.spectra.keys().copied().collect()
    }

    pub fn build_kernel(
        &self,
        kind: &str,
        params: &GeometryParams,
    ) -> Result<Box<dyn SensitivityKernel>> {
        match self.kernels.get(kind) {
            Some(builder) => builder(params),
            None => Err(Error::InvalidParameter {
                field: "geometry.kind",
                reason: format!(
                    "unknown kind {kind:?}; available: {}",
                    self.kernel_kinds().join(", ")
                ),
            }),
        }
    }

    pub fn build_spectrum(
        &self,
        kind: &str,
        params: &SpectrumParams,
    ) -> Result<Box<dyn MagnetizationSpectrum>> {
        match self.spectra.get(kind) {
            Some(builder) => builder(params),
            None => Err(Error::InvalidParameter {
                field: "spectrum.kind",
                reason: format!(
                    "unknown kind {kind:?}; available: {}",
                    self.spectrum_kinds().join(", ")
                ),
            }),
        }
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
