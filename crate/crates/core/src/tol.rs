/// Numerical thresholds shared by the classifiers.
///
/// All membership tests evaluate their residuals on the chart-normalized
/// representative of a point, so these values are scale free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// A lifted vector whose largest coordinate is below this is the zero vector.
    pub eps_zero: f64,
    /// Projective distance below which two points are considered equal.
    pub eps_proj: f64,
    /// Distance to the real segment that still counts as "on the band".
    pub eps_band: f64,
    /// Residual threshold for the algebraic sets (E, critical variety, L, poles).
    pub eps_e: f64,
    /// Threshold for the scale-free `G_n` residual.
    pub eps_gamma: f64,
    /// Highest `n` swept when searching the curves `Γ_n`.
    pub gamma_nmax: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_zero: 1e-300,
            eps_proj: 1e-10,
            eps_band: 1e-9,
            eps_e: 1e-10,
            eps_gamma: 1e-8,
            gamma_nmax: 200,
        }
    }
}
