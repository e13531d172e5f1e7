//! Independent re-checking of homotopy grids.

use crate::algebra::LatticeSpec;
use crate::config::Tolerances;
use crate::linalg::ComplexMatrix;
use crate::states::{act_with_floor, weakstar_dist, ObservableFamily};

use super::HomotopyGrid;

/// Family length used for the continuity modulus.
const CONTINUITY_TERMS: usize = 24;

/// One named check with its worst deviation and location.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_deviation: f64,
    /// (t index, s index) of the worst cell.
    pub argmax: (usize, usize),
    pub pass: bool,
}

/// Outcome of [`verify_homotopy`].
///
/// `pass` covers the structural checks (identity column, lift
/// consistency, boundary constancy, final column) against the given
/// tolerance. The continuity modulus is reported alongside: adjacent
/// cells of a genuine deformation differ by the deformation's own step
/// size, so the modulus carries its own scale and no pass mark.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    /// Max weak*-metric distance between adjacent grid cells.
    pub continuity_modulus: f64,
    pub pass: bool,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Re-check a grid from scratch: the `s = 0` lift column is the
/// identity, every state is reproduced by acting its lift on column 0,
/// the boundary rows are constant, and the final column hits the grid's
/// declared target. Deviations are reported with the offending cell.
pub fn verify_homotopy(grid: &HomotopyGrid, tol_value: f64, tol: &Tolerances) -> VerifyReport {
    let nt = grid.n_t();
    let ns = grid.n_s();
    let mut checks = Vec::with_capacity(4);

    // s = 0 column carries the identity lift.
    {
        let id = ComplexMatrix::identity(grid.states[0][0].dim());
        let mut worst = (0.0f64, (0usize, 0usize));
        for t in 0..nt {
            let d = grid.lift[t][0].dist(&id);
            if d > worst.0 {
                worst = (d, (t, 0));
            }
        }
        checks.push(CheckResult {
            name: "identity_column",
            max_deviation: worst.0,
            argmax: worst.1,
            pass: worst.0 <= tol_value,
        });
    }

    // states[t][s] = lift[t][s] · states[t][0].
    {
        let mut worst = (0.0f64, (0usize, 0usize));
        let s_max = if grid.final_column_exempt { ns - 1 } else { ns };
        for t in 0..nt {
            for s in 0..s_max {
                let d = match act_with_floor(&grid.lift[t][s], &grid.states[t][0], tol.tau_ideal) {
                    Ok(re) => re.dist(&grid.states[t][s]),
                    Err(_) => f64::INFINITY,
                };
                if d > worst.0 {
                    worst = (d, (t, s));
                }
            }
        }
        checks.push(CheckResult {
            name: "lift_consistency",
            max_deviation: worst.0,
            argmax: worst.1,
            pass: worst.0 <= tol_value,
        });
    }

    // Boundary rows stay at their column-0 values.
    {
        let mut worst = (0.0f64, (0usize, 0usize));
        for t in [0, nt - 1] {
            for s in 0..ns {
                let d = grid.states[t][s].dist(&grid.states[t][0]);
                if d > worst.0 {
                    worst = (d, (t, s));
                }
            }
        }
        checks.push(CheckResult {
            name: "boundary_constancy",
            max_deviation: worst.0,
            argmax: worst.1,
            pass: worst.0 <= tol_value,
        });
    }

    // Final column hits the declared target.
    if let Some(target) = &grid.target {
        let mut worst = (0.0f64, (0usize, ns - 1));
        for t in 0..nt {
            let d = grid.states[t][ns - 1].dist(target);
            if d > worst.0 {
                worst = (d, (t, ns - 1));
            }
        }
        checks.push(CheckResult {
            name: "final_column",
            max_deviation: worst.0,
            argmax: worst.1,
            pass: worst.0 <= tol_value,
        });
    }

    let continuity_modulus = continuity_modulus(grid);
    let pass = checks.iter().all(|c| c.pass);
    VerifyReport { checks, continuity_modulus, pass }
}

/// Max weak*-metric step between s- and t-adjacent cells, using the
/// default observable family of the grid's lattice.
fn continuity_modulus(grid: &HomotopyGrid) -> f64 {
    let spec = match LatticeSpec::new(grid.site_dims.clone()) {
        Ok(s) => s,
        Err(_) => return f64::NAN,
    };
    let available = family_capacity(&spec);
    let fam = match ObservableFamily::for_lattice(&spec, available.min(CONTINUITY_TERMS)) {
        Ok(f) => f,
        Err(_) => return f64::NAN,
    };
    let k = fam.len();
    let mut modulus = 0.0f64;
    for t in 0..grid.n_t() {
        for s in 0..grid.n_s() {
            if t + 1 < grid.n_t() {
                if let Ok((d, _)) = weakstar_dist(&grid.states[t][s], &grid.states[t + 1][s], &fam, k) {
                    modulus = modulus.max(d);
                }
            }
            if s + 1 < grid.n_s() {
                if let Ok((d, _)) = weakstar_dist(&grid.states[t][s], &grid.states[t][s + 1], &fam, k) {
                    modulus = modulus.max(d);
                }
            }
        }
    }
    modulus
}

/// Number of elements the default family enumeration can produce for a
/// lattice (saturating).
pub(crate) fn family_capacity(spec: &LatticeSpec) -> usize {
    let n = spec.n_sites();
    let mut total: usize = 0;
    // Sum over nonempty site subsets of the product of (d_v² − 1).
    for mask in 1u64..(1u64 << n.min(20)) {
        let mut prod: usize = 1;
        for v in 0..n.min(20) {
            if mask & (1 << v) != 0 {
                prod = prod.saturating_mul(spec.dim(v) * spec.dim(v) - 1);
            }
        }
        total = total.saturating_add(prod);
        if total > 1 << 20 {
            return total;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homotopy::{interp_unitary_homotopy, PhasePath, SampledPath};
    use crate::linalg::{pauli, C64};
    use crate::states::DensityMatrix;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn valid_grid_passes() {
        let base = DensityMatrix::basis_state(2, 0);
        let loop_path = SampledPath::constant_loop(base, 5).unwrap();
        let us = vec![pauli::pauli_x(); 5];
        let lambda = PhasePath::constant_one(loop_path.params().to_vec());
        let grid = interp_unitary_homotopy(&loop_path, &us, &lambda, &tol()).unwrap();
        let report = verify_homotopy(&grid, 1e-8, &tol());
        assert!(report.pass, "{report:?}");
        assert!(report.continuity_modulus.is_finite());
    }

    #[test]
    fn corrupted_lift_is_localized() {
        let base = DensityMatrix::basis_state(2, 0);
        let loop_path = SampledPath::constant_loop(base, 5).unwrap();
        let us = vec![pauli::pauli_x(); 5];
        let lambda = PhasePath::constant_one(loop_path.params().to_vec());
        let mut grid = interp_unitary_homotopy(&loop_path, &us, &lambda, &tol()).unwrap();
        grid.lift[2][3][(0, 1)] += C64::new(0.5, 0.0);
        let report = verify_homotopy(&grid, 1e-8, &tol());
        assert!(!report.pass);
        let consistency = report.check("lift_consistency").unwrap();
        assert!(!consistency.pass);
        assert_eq!(consistency.argmax, (2, 3));
    }
}
