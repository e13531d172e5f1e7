//! Named numerical tolerances with their defaults.
//!
//! Every threshold used by the algorithms lives here so that a run can be
//! reproduced from its configuration alone. The CLI exposes each field as
//! `--tol.<name>=<value>`.

/// Default cap on the total dimension of a lattice truncation.
pub const DEFAULT_DIM_CAP: usize = 1 << 12;

/// Numerical thresholds used across the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Relative Hermiticity tolerance for eigensolver inputs.
    pub tau_herm: f64,
    /// Relative reconstruction tolerance for eigendecompositions.
    pub tau_eig: f64,
    /// Threshold below which `ω(A*A)` counts as zero (Gelfand ideal).
    pub tau_ideal: f64,
    /// Lower bound required of `ρ(P)` along projection interpolations.
    pub delta_p: f64,
    /// Distance below which a state counts as the pure basepoint.
    pub delta_pure: f64,
    /// Width of the edge band of the unit disk in phase lifting.
    pub delta_edge: f64,
    /// Required accuracy of `λγ = 1` on the edge band.
    pub eps_edge: f64,
    /// Maximal phase step between adjacent samples, in radians.
    pub theta_step: f64,
    /// Maximal Frobenius step between adjacent lifted unitaries.
    pub eta_step: f64,
    /// Spectral-gap threshold below which a top eigenvector is treated as
    /// degenerate and the tracker freezes.
    pub eps_deg: f64,
    /// Neighborhood margin for between-sample checks (the `7/8` margin of
    /// the covering argument, expressed as its complement).
    pub delta_nb: f64,
    /// Depth cap for adaptive bisection.
    pub refine_depth: u32,
    /// Gap threshold for declaring a ground state degenerate.
    pub delta_gap: f64,
    /// Minimal |eigenvalue| for a matrix to count as gapped.
    pub delta_admissible: f64,
    /// Hard bound on per-site factorization residuals.
    pub factorization_bound: f64,
    /// Cap on the total dimension of lattice truncations.
    pub dim_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tau_herm: 1e-9,
            tau_eig: 1e-8,
            tau_ideal: 1e-12,
            delta_p: 1e-6,
            delta_pure: 1e-6,
            delta_edge: 1e-8,
            eps_edge: 1e-8,
            theta_step: 0.2,
            eta_step: 0.5,
            eps_deg: 1e-6,
            delta_nb: 0.125,
            refine_depth: 20,
            delta_gap: 1e-8,
            delta_admissible: 1e-8,
            factorization_bound: 1e-5,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

impl Tolerances {
    /// Set a tolerance by its field name. Used by the CLI's
    /// `--tol.<name>=<value>` flags.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        match name {
            "tau_herm" => self.tau_herm = value,
            "tau_eig" => self.tau_eig = value,
            "tau_ideal" => self.tau_ideal = value,
            "delta_p" => self.delta_p = value,
            "delta_pure" => self.delta_pure = value,
            "delta_edge" => self.delta_edge = value,
            "eps_edge" => self.eps_edge = value,
            "theta_step" => self.theta_step = value,
            "eta_step" => self.eta_step = value,
            "eps_deg" => self.eps_deg = value,
            "delta_nb" => self.delta_nb = value,
            "refine_depth" => self.refine_depth = value as u32,
            "delta_gap" => self.delta_gap = value,
            "delta_admissible" => self.delta_admissible = value,
            "factorization_bound" => self.factorization_bound = value,
            "dim_cap" => self.dim_cap = value as usize,
            other => return Err(format!("unknown tolerance `{other}`")),
        }
        Ok(())
    }
}
