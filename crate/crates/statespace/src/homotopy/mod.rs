//! Constructive contraction of loops of states.
//!
//! A loop of states on a matrix algebra is deformed to the constant loop
//! at its basepoint through lifts into the algebra itself: a grid of
//! elements `A_{t,s}` with `A_{t,0} = 𝟙` acting as
//! `(t,s) ↦ A_{t,s}·ω_t`. The machinery follows a fixed pipeline:
//!
//! 1. [`unitary_lift`] finds a continuous family of unitaries moving
//!    every pure loop state toward the basepoint so that the leading
//!    projector keeps positive expectation along the way;
//! 2. [`phase_lift`] chooses a continuous circle phase so the linear
//!    interpolation of each unitary with the identity never crosses the
//!    Gelfand ideal;
//! 3. [`interp_unitary_homotopy`] and [`project_homotopy`] realize the
//!    two elementary deformation stages;
//! 4. [`contract_loop_matrix`] composes them inductively through corner
//!    algebras of decreasing dimension until the loop is constant;
//! 5. [`disentangle_loop`] runs the contraction site by site on a
//!    lattice truncation, verifying the per-site factorization that the
//!    construction forces;
//! 6. [`verify_homotopy`] re-checks any produced grid from scratch.
//!
//! All paths are finite samples; continuity means adjacent-sample
//! deviations below declared moduli, maintained by adaptive bisection of
//! the input (piecewise-linear in the states) with a hard depth cap.

mod contract;
mod disentangle;
mod grid;
mod phase;
mod unitary;
mod verify;

pub use contract::contract_loop_matrix;
pub use disentangle::{disentangle_loop, DisentangleOutput, SiteReport};
pub use grid::{interp_unitary_homotopy, project_homotopy, StageInfo};
pub use phase::{phase_lift, PhasePath};
pub use unitary::unitary_lift;
pub use verify::{verify_homotopy, CheckResult, VerifyReport};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::DensityMatrix;

/// Columns per deformation stage in assembled grids.
pub const DEFAULT_SUBSTEPS: usize = 8;

/// Tolerance for closing a loop: ‖ρ(0) − ρ(1)‖_F.
pub const LOOP_CLOSE_TOL: f64 = 1e-9;

/// A discretized path of density matrices over `[0,1]`, linear in the
/// states between samples.
#[derive(Debug, Clone)]
pub struct SampledPath {
    params: Vec<f64>,
    states: Vec<DensityMatrix>,
    is_loop: bool,
}

impl SampledPath {
    /// A path with strictly increasing parameters running from 0 to 1.
    pub fn new(params: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        Self::build(params, states, false)
    }

    /// A loop: additionally requires ‖ρ(0) − ρ(1)‖_F ≤ 1e-9.
    pub fn new_loop(params: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        Self::build(params, states, true)
    }

    fn build(params: Vec<f64>, states: Vec<DensityMatrix>, is_loop: bool) -> Result<Self> {
        if params.len() < 2 || params.len() != states.len() {
            return Err(Error::InvalidInput(format!(
                "path needs at least 2 aligned samples, got {} params and {} states",
                params.len(),
                states.len()
            )));
        }
        if params[0] != 0.0 || *params.last().unwrap() != 1.0 {
            return Err(Error::InvalidInput("path parameters must run from 0 to 1".into()));
        }
        if params.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("path parameters must increase strictly".into()));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::DimMismatch("path states must share a dimension".into()));
        }
        if is_loop {
            let gap = states[0].dist(states.last().unwrap());
            if gap > LOOP_CLOSE_TOL {
                return Err(Error::InvalidInput(format!("loop endpoints differ by {gap:.3e}")));
            }
        }
        Ok(Self { params, states, is_loop })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &DensityMatrix {
        &self.states[i]
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_loop(&self) -> bool {
        self.is_loop
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// Insert the linear midpoint of each listed segment (indices into
    /// the gaps between samples, ascending, unique).
    pub(crate) fn bisect_segments(&self, segments: &[usize]) -> Result<Self> {
        let mut params = Vec::with_capacity(self.params.len() + segments.len());
        let mut states = Vec::with_capacity(self.states.len() + segments.len());
        let mut seg_iter = segments.iter().peekable();
        for i in 0..self.params.len() {
            params.push(self.params[i]);
            states.push(self.states[i].clone());
            if seg_iter.peek() == Some(&&i) {
                seg_iter.next();
                let t_mid = 0.5 * (self.params[i] + self.params[i + 1]);
                let m = &self.states[i].matrix().scale_re(0.5)
                    + &self.states[i + 1].matrix().scale_re(0.5);
                let mid = DensityMatrix::new_normalized(m)?;
                params.push(t_mid);
                states.push(mid);
            }
        }
        Self::build(params, states, self.is_loop)
    }

    /// A constant loop at one state.
    pub fn constant_loop(state: DensityMatrix, samples: usize) -> Result<Self> {
        let n = samples.max(2);
        let params = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let states = vec![state; n];
        Self::build(params, states, true)
    }
}

/// One deformation stage: lifts relative to the stage's input loop.
#[derive(Debug, Clone)]
pub(crate) struct Stage {
    pub(crate) label: String,
    /// rel_lifts[t][r-1] is the stage lift at inner column `r` of
    /// `substeps` (the lift at r = 0 is the identity, implicit).
    pub(crate) rel_lifts: Vec<Vec<ComplexMatrix>>,
}

/// A two-parameter family of states with its algebra lift:
/// `states[t][s] = lift[t][s] · states[t][0]` up to tolerance, with
/// `lift[t][0] = 𝟙` exactly and the boundary rows constant.
#[derive(Debug, Clone)]
pub struct HomotopyGrid {
    pub t_params: Vec<f64>,
    pub s_params: Vec<f64>,
    /// states[t][s].
    pub states: Vec<Vec<DensityMatrix>>,
    /// lift[t][s]; ignore the last column when `final_column_exempt`.
    pub lift: Vec<Vec<ComplexMatrix>>,
    /// When set, the lift is only claimed for s < 1.
    pub final_column_exempt: bool,
    /// Stage boundaries in `s`.
    pub stages: Vec<StageInfo>,
    /// Site dimensions of the lattice carrying the states.
    pub site_dims: Vec<usize>,
    /// Expected constant value of the final column, if any.
    pub target: Option<DensityMatrix>,
}

impl HomotopyGrid {
    pub fn n_t(&self) -> usize {
        self.t_params.len()
    }

    pub fn n_s(&self) -> usize {
        self.s_params.len()
    }

    /// The loop the grid deforms (column s = 0).
    pub fn input_column(&self) -> Vec<&DensityMatrix> {
        self.states.iter().map(|row| &row[0]).collect()
    }

    /// The deformed loop (column s = 1).
    pub fn final_column(&self) -> Vec<&DensityMatrix> {
        self.states.iter().map(|row| row.last().unwrap()).collect()
    }
}
