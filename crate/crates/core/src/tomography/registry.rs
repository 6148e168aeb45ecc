use std::collections::BTreeMap;

use super::{LinearInversion, MaximumLikelihood, ReconstructionResult, TomographyData};
use crate::error::{Result, SwapError};

/// A density-matrix estimator for 16-setting subspace data.
pub trait Reconstructor: Send + Sync {
    fn name(&self) -> &'static str;

    fn reconstruct(&self, data: &TomographyData) -> Result<ReconstructionResult>;
}

/// Reconstructors keyed by name.
pub struct ReconstructorRegistry {
    entries: BTreeMap<&'static str, Box<dyn Reconstructor>>,
}

impl Default for ReconstructorRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(LinearInversion));
        r.register(Box::new(MaximumLikelihood::default()));
        r
    }
}

impl ReconstructorRegistry {
    pub const DEFAULT_METHOD: &'static str = "mle";

    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    /// Adds or replaces the entry under `r.name()`.
    pub fn register(&mut self, r: Box<dyn Reconstructor>) {
        self.entries.insert(r.name(), r);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Reconstructor> {
        self.entries.get(name).map(|b| b.as_ref()).ok_or_else(|| {
            SwapError::InvalidArgument(format!(
                "unknown reconstruction method {name:?}; available: {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl std::fmt::Debug for ReconstructorRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReconstructorRegistry").field("methods", &self.names()).finish()
    }
}
