//! Inductive contraction of a loop of states on a matrix algebra.
//!
//! A loop based at `|e₀><e₀|` in dimension `n` is contracted in
//! `2(n−1)` stages. A unitary stage moves the loop so the leading
//! projector `P₁ = diag(1,…,1,0)` keeps positive expectation, a
//! projection stage then pins `ψ_t(P₁) = 1`, which confines the loop to
//! the corner algebra of dimension `n−1`; the corner loop is contracted
//! recursively and its lifts are carried back by `A ↦ (𝟙−P₁) + π(A)`
//! with `π` the corner inclusion. After the last stage the loop sits at
//! the basepoint: a state with unit expectation on `diag(1,0,…,0)` is
//! the basepoint itself.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::{act, restrict_corner, DensityMatrix};

use super::grid::{assemble, projection_stage, unitary_expectations, unitary_stage};
use super::phase::phase_lift;
use super::unitary::{refine, try_unitary_lift, validate_basepoint, TryLift};
use super::{HomotopyGrid, SampledPath, Stage, DEFAULT_SUBSTEPS};

/// Contract a loop in the state space of `M_n` to the constant loop at
/// the basepoint `|e₀><e₀|`, returning the full lifted grid.
///
/// The final column is exact: the composite lift ends in the rank-one
/// projector onto the basepoint. Refinement requests from any stage
/// bisect the input loop and restart the stage construction; the depth
/// cap yields [`Error::RefinementExhausted`].
pub fn contract_loop_matrix(loop_path: &SampledPath, tol: &Tolerances) -> Result<HomotopyGrid> {
    validate_basepoint(loop_path)?;
    let n = loop_path.dim();
    let mut work = loop_path.clone();
    let mut depth: Vec<u32> = vec![0; work.len() - 1];
    loop {
        match try_contract_stages(&work, tol) {
            TryLift::Done(stages) => {
                let target = DensityMatrix::basis_state(n, 0);
                return assemble(&work, stages, vec![n], Some(target), DEFAULT_SUBSTEPS, tol);
            }
            TryLift::Fatal(e) => return Err(e),
            TryLift::Refine(segments) => {
                let (new_work, new_depth) = refine(&work, &depth, &segments, tol)?;
                work = new_work;
                depth = new_depth;
            }
        }
    }
}

/// Build the full stage list for a fixed sample grid, or request
/// refinement. Works in the dimension of `work`; recursion reduces the
/// dimension by one per unitary+projection pair.
pub(crate) fn try_contract_stages(work: &SampledPath, tol: &Tolerances) -> TryLift<Vec<Stage>> {
    let n = work.dim();
    if n == 1 {
        return TryLift::Done(Vec::new());
    }
    let nt = work.len();

    // Stage 1: unitary transport toward the basepoint.
    let us = match try_unitary_lift(work, tol) {
        TryLift::Done(us) => us,
        TryLift::Refine(segs) => return TryLift::Refine(segs),
        TryLift::Fatal(e) => return TryLift::Fatal(e),
    };

    // Stage 1 phases: keep the interpolation clear of the Gelfand ideal.
    let gamma = unitary_expectations(work, &us);
    let lambda = match phase_lift_on_grid(work.params(), &gamma, tol) {
        Ok(l) => l,
        Err(PhaseOnGrid::Refine(segs)) => return TryLift::Refine(segs),
        Err(PhaseOnGrid::Fatal(e)) => return TryLift::Fatal(e),
    };

    let stage_u = unitary_stage(&us, &lambda, DEFAULT_SUBSTEPS);
    // Loop after the unitary stage: χ_t = (λ_t U_t)·ω_t = U_t·ω_t.
    let chi: Vec<DensityMatrix> = match work
        .states()
        .iter()
        .zip(&us)
        .map(|(s, u)| act(u, s))
        .collect::<Result<Vec<_>>>()
    {
        Ok(v) => v,
        Err(e) => return TryLift::Fatal(e),
    };

    // Stage 2: pin the leading projector.
    let p1 = ComplexMatrix::leading_projector(n, 1);
    for state in &chi {
        let expect = state.expectation(&p1).re;
        if expect <= tol.delta_p {
            return TryLift::Fatal(Error::GelfandIdeal(expect.max(0.0)));
        }
    }
    let stage_p = projection_stage(&p1, nt, DEFAULT_SUBSTEPS);
    let pinned: Vec<DensityMatrix> = match chi.iter().map(|s| act(&p1, s)).collect::<Result<Vec<_>>>() {
        Ok(v) => v,
        Err(e) => return TryLift::Fatal(e),
    };

    // Corner recursion on the (n−1)-dimensional restriction.
    let corner: Vec<DensityMatrix> =
        match pinned.iter().map(|s| restrict_corner(s, n - 1)).collect::<Result<Vec<_>>>() {
            Ok(v) => v,
            Err(e) => return TryLift::Fatal(e),
        };
    let corner_path = match SampledPath::new_loop(work.params().to_vec(), corner) {
        Ok(p) => p,
        Err(e) => return TryLift::Fatal(e),
    };
    let sub_stages = match try_contract_stages(&corner_path, tol) {
        TryLift::Done(s) => s,
        TryLift::Refine(segs) => return TryLift::Refine(segs),
        TryLift::Fatal(e) => return TryLift::Fatal(e),
    };

    // Carry the corner lifts back: A ↦ (𝟙−P₁) + π(A).
    let mut stages = vec![stage_u, stage_p];
    for sub in sub_stages {
        let rel_lifts = sub
            .rel_lifts
            .into_iter()
            .map(|row| row.into_iter().map(|a| corner_lift(&a, n)).collect())
            .collect();
        stages.push(Stage { label: format!("corner/{}", sub.label), rel_lifts });
    }
    TryLift::Done(stages)
}

/// `(𝟙−P) + π(A)`: embed a corner lift as a full-algebra lift acting
/// trivially on the complement of the corner.
fn corner_lift(a: &ComplexMatrix, ambient: usize) -> ComplexMatrix {
    let d = a.rows();
    let mut out = ComplexMatrix::identity(ambient);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = a[(i, j)];
        }
    }
    out
}

enum PhaseOnGrid {
    Refine(Vec<usize>),
    Fatal(Error),
}

/// Run the phase lift but translate its internal refinement into
/// segment requests on the shared grid (the phase lift itself may not
/// insert samples here, since all stages share the `t` grid).
fn phase_lift_on_grid(
    params: &[f64],
    gamma: &[crate::linalg::C64],
    tol: &Tolerances,
) -> std::result::Result<super::phase::PhasePath, PhaseOnGrid> {
    match phase_lift(params, gamma, tol) {
        Err(e) => Err(PhaseOnGrid::Fatal(e)),
        Ok(lifted) => {
            if lifted.len() == params.len() {
                return Ok(lifted);
            }
            // The lift inserted samples: request the bisections on the
            // shared grid instead.
            let mut segs = Vec::new();
            let mut j = 0;
            for (i, &t) in params.iter().enumerate() {
                while j < lifted.len() && lifted.params()[j] < t - 1e-15 {
                    j += 1;
                }
                if j < lifted.len() && (lifted.params()[j] - t).abs() > 1e-15 && i > 0 {
                    segs.push(i - 1);
                }
            }
            // When alignment bookkeeping finds nothing, fall back to the
            // extra parameters themselves.
            if segs.is_empty() {
                for &tp in lifted.params() {
                    if params.iter().all(|&t| (t - tp).abs() > 1e-15) {
                        let seg = params.iter().rposition(|&t| t < tp).unwrap_or(0);
                        segs.push(seg);
                    }
                }
                segs.sort_unstable();
                segs.dedup();
            }
            if segs.is_empty() {
                return Err(PhaseOnGrid::Fatal(Error::InvalidInput(
                    "phase lift refinement could not be mapped to the grid".into(),
                )));
            }
            Err(PhaseOnGrid::Refine(segs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homotopy::verify_homotopy;
    use crate::linalg::C64;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn great_circle_loop(n_samples: usize) -> SampledPath {
        let params: Vec<f64> = (0..n_samples).map(|i| i as f64 / (n_samples - 1) as f64).collect();
        let states: Vec<DensityMatrix> = params
            .iter()
            .map(|&t| {
                let a = std::f64::consts::PI * t;
                DensityMatrix::pure(&[C64::new(a.cos(), 0.0), C64::new(a.sin(), 0.0)]).unwrap()
            })
            .collect();
        SampledPath::new_loop(params, states).unwrap()
    }

    #[test]
    fn constant_loop_contracts_trivially() {
        let base = DensityMatrix::basis_state(3, 0);
        let loop_path = SampledPath::constant_loop(base.clone(), 8).unwrap();
        let grid = contract_loop_matrix(&loop_path, &tol()).unwrap();
        for last in grid.final_column() {
            assert!(last.dist(&base) < 1e-9);
        }
        assert_eq!(grid.stages.len(), 4); // two stages per corner level
    }

    #[test]
    fn qubit_great_circle_contracts() {
        let loop_path = great_circle_loop(60);
        let grid = contract_loop_matrix(&loop_path, &tol()).unwrap();
        let base = DensityMatrix::basis_state(2, 0);
        for last in grid.final_column() {
            assert!(last.dist(&base) <= 1e-6);
        }
        let report = verify_homotopy(&grid, 1e-6, &tol());
        assert!(report.pass, "verify failed: {report:?}");
    }

    #[test]
    fn corner_lift_embeds_identity_outside() {
        let a = crate::sampling::Sampler::new(41).unitary(2);
        let lifted = corner_lift(&a, 4);
        assert_eq!(lifted[(2, 2)], C64::new(1.0, 0.0));
        assert_eq!(lifted[(3, 3)], C64::new(1.0, 0.0));
        assert_eq!(lifted[(2, 3)], C64::new(0.0, 0.0));
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(lifted[(i, j)], a[(i, j)]);
            }
        }
    }

    #[test]
    fn qutrit_mixed_loop_contracts() {
        // A 3-level loop wandering through mixed states.
        let n = 80;
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let base = DensityMatrix::basis_state(3, 0);
        let mut rng = crate::sampling::Sampler::new(5);
        let h1 = rng.hermitian(3);
        let h2 = rng.hermitian(3);
        let states: Vec<DensityMatrix> = params
            .iter()
            .map(|&t| {
                let u = crate::linalg::exp_i_herm(&h1.scale_re((std::f64::consts::PI * t).sin()))
                    .unwrap();
                let v = crate::linalg::exp_i_herm(
                    &h2.scale_re(0.7 * (2.0 * std::f64::consts::PI * t).sin()),
                )
                .unwrap();
                let moved = act(&(&u * &v), &base).unwrap();
                let m = 0.5 * (std::f64::consts::PI * t).sin().powi(2);
                let mixed = &moved.matrix().scale_re(1.0 - m)
                    + &DensityMatrix::maximally_mixed(3).matrix().scale_re(m);
                DensityMatrix::new_normalized(mixed).unwrap()
            })
            .collect();
        let loop_path = SampledPath::new_loop(params, states).unwrap();
        let grid = contract_loop_matrix(&loop_path, &tol()).unwrap();
        let report = verify_homotopy(&grid, 1e-6, &tol());
        assert!(report.pass, "verify failed: {report:?}");
    }
}
