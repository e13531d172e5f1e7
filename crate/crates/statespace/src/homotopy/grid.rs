//! Grid assembly and the two elementary deformation stages.

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{C64, ComplexMatrix};
use crate::states::{act_with_floor, DensityMatrix};

use super::phase::PhasePath;
use super::{HomotopyGrid, SampledPath, Stage, DEFAULT_SUBSTEPS};

/// Labelled `s`-interval of an assembled grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StageInfo {
    pub label: String,
    pub s_start: f64,
    pub s_end: f64,
}

/// Compose a stage list into a grid over the input loop: column `s`
/// carries the composite lift of all stages up to `s`, and every state
/// is recomputed as `lift·input`, so the grid invariants hold by
/// construction.
pub(crate) fn assemble(
    input: &SampledPath,
    stages: Vec<Stage>,
    site_dims: Vec<usize>,
    target: Option<DensityMatrix>,
    substeps: usize,
    tol: &Tolerances,
) -> Result<HomotopyGrid> {
    let nt = input.len();
    let n = input.dim();
    let sub = substeps.max(1);
    let m_stages = stages.len();

    let mut s_params = vec![0.0f64];
    let mut states: Vec<Vec<DensityMatrix>> = input.states().iter().map(|s| vec![s.clone()]).collect();
    let mut lift: Vec<Vec<ComplexMatrix>> = (0..nt).map(|_| vec![ComplexMatrix::identity(n)]).collect();
    let mut stage_infos = Vec::with_capacity(m_stages);

    if m_stages == 0 {
        // Trivial grid: two identical columns under the identity lift.
        s_params.push(1.0);
        for t in 0..nt {
            states[t].push(input.state(t).clone());
            lift[t].push(ComplexMatrix::identity(n));
        }
        return Ok(HomotopyGrid {
            t_params: input.params().to_vec(),
            s_params,
            states,
            lift,
            final_column_exempt: false,
            stages: vec![StageInfo { label: "trivial".into(), s_start: 0.0, s_end: 1.0 }],
            site_dims,
            target,
        });
    }

    let mut composite: Vec<ComplexMatrix> = (0..nt).map(|_| ComplexMatrix::identity(n)).collect();
    for (m, stage) in stages.iter().enumerate() {
        if stage.rel_lifts.len() != nt || stage.rel_lifts.iter().any(|row| row.len() != sub) {
            return Err(Error::InvalidInput(format!(
                "stage `{}` does not cover the {}x{} grid",
                stage.label, nt, sub
            )));
        }
        let s_start = m as f64 / m_stages as f64;
        let s_end = (m + 1) as f64 / m_stages as f64;
        stage_infos.push(StageInfo { label: stage.label.clone(), s_start, s_end });
        for r in 1..=sub {
            s_params.push((m as f64 + r as f64 / sub as f64) / m_stages as f64);
            for t in 0..nt {
                let l = &stage.rel_lifts[t][r - 1] * &composite[t];
                let state = act_with_floor(&l, input.state(t), tol.tau_ideal)?;
                states[t].push(state);
                lift[t].push(l);
            }
        }
        for (t, comp) in composite.iter_mut().enumerate() {
            *comp = &stage.rel_lifts[t][sub - 1] * comp;
        }
    }
    // Exact endpoint values of the s grid.
    *s_params.last_mut().unwrap() = 1.0;

    Ok(HomotopyGrid {
        t_params: input.params().to_vec(),
        s_params,
        states,
        lift,
        final_column_exempt: false,
        stages: stage_infos,
        site_dims,
        target,
    })
}

/// Stage lifts `s ↦ s·λ_t·U_t + (1−s)·𝟙` for one unitary stage.
pub(crate) fn unitary_stage(
    us: &[ComplexMatrix],
    lambda: &PhasePath,
    substeps: usize,
) -> Stage {
    let n = us[0].rows();
    let id = ComplexMatrix::identity(n);
    let rel_lifts = us
        .iter()
        .enumerate()
        .map(|(t, u)| {
            let lu = u.scale(lambda.phase(t));
            (1..=substeps)
                .map(|r| {
                    let s = r as f64 / substeps as f64;
                    &lu.scale_re(s) + &id.scale_re(1.0 - s)
                })
                .collect()
        })
        .collect();
    Stage { label: "unitary".into(), rel_lifts }
}

/// Stage lifts `s ↦ s·P + (1−s)·𝟙` for one projection stage.
pub(crate) fn projection_stage(p: &ComplexMatrix, nt: usize, substeps: usize) -> Stage {
    let n = p.rows();
    let id = ComplexMatrix::identity(n);
    let ladder: Vec<ComplexMatrix> = (1..=substeps)
        .map(|r| {
            let s = r as f64 / substeps as f64;
            &p.scale_re(s) + &id.scale_re(1.0 - s)
        })
        .collect();
    Stage { label: "projection".into(), rel_lifts: vec![ladder; nt] }
}

/// Deform a loop by linear interpolation of a lifted unitary family
/// with the identity: lift `A_{t,s} = s·λ_t·U_t + (1−s)·𝟙`.
///
/// The phases must have been chosen (see
/// [`phase_lift`](super::phase_lift) applied to `t ↦ tr(ρ_t U_t)`) so
/// that `λ_t·ω_t(U_t)` avoids −1; otherwise the interpolant crosses the
/// Gelfand ideal near `s = 1/2` and the construction fails with
/// [`Error::GelfandIdeal`].
pub fn interp_unitary_homotopy(
    loop_path: &SampledPath,
    us: &[ComplexMatrix],
    lambda: &PhasePath,
    tol: &Tolerances,
) -> Result<HomotopyGrid> {
    let n = loop_path.dim();
    if us.len() != loop_path.len() || lambda.len() != loop_path.len() {
        return Err(Error::DimMismatch(format!(
            "interp_unitary_homotopy: {} states, {} unitaries, {} phases",
            loop_path.len(),
            us.len(),
            lambda.len()
        )));
    }
    if us.iter().any(|u| !u.is_square() || u.rows() != n) {
        return Err(Error::DimMismatch("unitary dimensions must match the loop".into()));
    }
    let stage = unitary_stage(us, lambda, DEFAULT_SUBSTEPS);
    assemble(loop_path, vec![stage], vec![n], None, DEFAULT_SUBSTEPS, tol)
}

/// Deform a path into the range of a projector by the lift
/// `A_{t,s} = s·P + (1−s)·𝟙`; requires `ρ_t(P) > δ_P` at every sample.
/// The end column is supported in `P` exactly.
pub fn project_homotopy(path: &SampledPath, p: &ComplexMatrix, tol: &Tolerances) -> Result<HomotopyGrid> {
    let n = path.dim();
    if !p.is_square() || p.rows() != n {
        return Err(Error::DimMismatch(format!(
            "project_homotopy: projector is {}x{}, path dim {n}",
            p.rows(),
            p.cols()
        )));
    }
    let idem = &(p * p) - p;
    if idem.frobenius_norm() > 1e-9 || p.hermiticity_defect() > 1e-9 {
        return Err(Error::InvalidInput("not a projector".into()));
    }
    for state in path.states() {
        let expect = state.expectation(p).re;
        if expect <= tol.delta_p {
            return Err(Error::GelfandIdeal(expect.max(0.0)));
        }
    }
    let stage = projection_stage(p, path.len(), DEFAULT_SUBSTEPS);
    assemble(path, vec![stage], vec![n], None, DEFAULT_SUBSTEPS, tol)
}

/// `tr(ρ_t U_t)` along a path: the disk path fed to the phase lift.
pub(crate) fn unitary_expectations(path: &SampledPath, us: &[ComplexMatrix]) -> Vec<C64> {
    path.states()
        .iter()
        .zip(us)
        .map(|(s, u)| {
            let z: Complex64 = s.expectation(u);
            z
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::states::act;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_stage_is_constant_in_s() {
        let base = DensityMatrix::basis_state(2, 0);
        let loop_path = SampledPath::constant_loop(base.clone(), 6).unwrap();
        let us = vec![ComplexMatrix::identity(2); 6];
        let lambda = PhasePath::constant_one(loop_path.params().to_vec());
        let grid = interp_unitary_homotopy(&loop_path, &us, &lambda, &tol()).unwrap();
        for row in &grid.states {
            for s in row {
                assert!(s.dist(&base) < 1e-13);
            }
        }
    }

    #[test]
    fn sigma_x_interpolation_lands_on_flipped_state() {
        // U = σ¹ on |e₀><e₀|: ω(U) = 0, well-defined for all s; the end
        // column is |e₁><e₁|.
        let base = DensityMatrix::basis_state(2, 0);
        let loop_path = SampledPath::constant_loop(base, 6).unwrap();
        let us = vec![pauli::pauli_x(); 6];
        let lambda = PhasePath::constant_one(loop_path.params().to_vec());
        let grid = interp_unitary_homotopy(&loop_path, &us, &lambda, &tol()).unwrap();
        let flipped = DensityMatrix::basis_state(2, 1);
        for last in grid.final_column() {
            assert!(last.dist(&flipped) < 1e-12);
        }
    }

    #[test]
    fn degenerate_interpolation_without_phase_fails_at_half() {
        // U = σ³ on |e₁><e₁|: ω(U) = −1 and no phase correction makes
        // the s = 1/2 column cross the Gelfand ideal.
        let base = DensityMatrix::basis_state(2, 1);
        let params: Vec<f64> = (0..5).map(|i| i as f64 / 4.0).collect();
        let states = vec![base; 5];
        let path = SampledPath::new_loop(params.clone(), states).unwrap();
        let us = vec![pauli::pauli_z(); 5];
        let lambda = PhasePath::constant_one(params);
        let err = interp_unitary_homotopy(&path, &us, &lambda, &tol()).unwrap_err();
        assert!(matches!(err, Error::GelfandIdeal(_)));
    }

    #[test]
    fn projection_stage_collapses_mixed_qubit() {
        let mixed = DensityMatrix::maximally_mixed(2);
        let path = SampledPath::constant_loop(mixed.clone(), 4).unwrap();
        let p = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let grid = project_homotopy(&path, &p, &tol()).unwrap();
        // s = 0 column equals the input exactly.
        for (row, input) in grid.states.iter().zip(path.states()) {
            assert_eq!(row[0].matrix(), input.matrix());
        }
        let e0 = DensityMatrix::basis_state(2, 0);
        for last in grid.final_column() {
            assert!(last.dist(&e0) < 1e-14);
            // Structural support: the discarded corner is exactly zero.
            assert_eq!(last.matrix()[(1, 0)], C64::new(0.0, 0.0));
            assert_eq!(last.matrix()[(0, 1)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn projection_requires_support() {
        let far = DensityMatrix::basis_state(2, 1);
        let path = SampledPath::constant_loop(far, 4).unwrap();
        let p = ComplexMatrix::diag_real(&[1.0, 0.0]);
        assert!(matches!(project_homotopy(&path, &p, &tol()), Err(Error::GelfandIdeal(_))));
    }

    #[test]
    fn grid_invariant_lift_consistency() {
        let base = DensityMatrix::basis_state(2, 0);
        let loop_path = SampledPath::constant_loop(base, 5).unwrap();
        let us = vec![pauli::pauli_x(); 5];
        let lambda = PhasePath::constant_one(loop_path.params().to_vec());
        let grid = interp_unitary_homotopy(&loop_path, &us, &lambda, &tol()).unwrap();
        for t in 0..grid.n_t() {
            assert!(grid.lift[t][0].approx_eq(&ComplexMatrix::identity(2), 0.0));
            for s in 0..grid.n_s() {
                let recomputed = act(&grid.lift[t][s], &grid.states[t][0]).unwrap();
                assert!(recomputed.dist(&grid.states[t][s]) < 1e-12);
            }
        }
    }
}
