//! Numerical thresholds shared across the toolkit.

use serde::{Deserialize, Serialize};

/// Default thresholds. Every field can be overridden per scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Rational denominators may not have roots closer than this to the circle.
    pub root: f64,
    /// Blaschke zeros must satisfy |a| <= 1 - disc.
    pub disc: f64,
    /// Pointwise unimodularity of finite Blaschke products.
    pub eval: f64,
    /// Tail energy in the outer eighths of the index range that stops grid doubling.
    pub alias: f64,
    /// Unimodularity of phi and psi, orthogonality of the bands.
    pub orthogonality: f64,
    /// Distance from c*theta below which a decomposition counts as degenerate.
    pub degeneracy: f64,
    /// Relative singular-value threshold for numerical rank.
    pub rank: f64,
    /// Boundary band |1 - |lambda|| treated as the unit circle.
    pub circle_band: f64,
    /// Values of Delta below this count as zero.
    pub delta_zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root: 1e-9,
            disc: 1e-12,
            eval: 1e-10,
            alias: 1e-12,
            orthogonality: 1e-10,
            degeneracy: 1e-6,
            rank: 1e-8,
            circle_band: 1e-10,
            delta_zero: 1e-9,
        }
    }
}

/// Grid sizes used by the refinement policy.
pub const GRID_START: usize = 1024;
pub const GRID_CAP: usize = 1 << 20;
