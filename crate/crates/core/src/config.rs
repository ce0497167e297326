use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every check in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Interior Laplacian residual of a harmonic extension, relative to `1 + max|g|`.
    pub residual: f64,
    /// Entrywise symmetry and row-sum slack of the DtN matrix.
    pub symmetry: f64,
    /// Lower slack for positive semidefiniteness and upper slack on `lambda <= 1`.
    pub psd: f64,
    /// Slack when comparing a floating eigenvalue to an exact bound.
    pub bound: f64,
    /// Eigenfunction residual and oracle agreement.
    pub eigen: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-10,
            symmetry: 1e-10,
            psd: 1e-9,
            bound: 1e-8,
            eigen: 1e-8,
        }
    }
}

impl Tolerances {
    /// Defaults with the bound slack replaced by `STEKLOV_TOL` when it parses as a positive float.
    pub fn from_env() -> Self {
        let mut tol = Tolerances::default();
        if let Some(v) = std::env::var("STEKLOV_TOL")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
        {
            if v > 0.0 && v.is_finite() {
                tol.bound = v;
            }
        }
        tol
    }
}
