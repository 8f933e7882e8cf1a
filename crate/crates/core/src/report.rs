use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sampled::GridSpec;

/// Outcome of a non-vanishing search: where the largest modulus was found,
/// its value, and the threshold it was compared against.
///
/// `passed` is always `|value| > threshold`; auxiliary cross-checks go into
/// `diagnostics`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub location: Vec<f64>,
    pub value: Complex64,
    pub threshold: f64,
    pub grid_searched: GridSpec,
    pub passed: bool,
    pub diagnostics: BTreeMap<String, f64>,
}

impl WitnessReport {
    pub fn new(location: Vec<f64>, value: Complex64, threshold: f64, grid_searched: GridSpec) -> Self {
        WitnessReport {
            location,
            value,
            threshold,
            grid_searched,
            passed: value.norm() > threshold,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).copied()
    }
}
