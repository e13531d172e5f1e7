//! Site-by-site disentangling of lattice loops.
//!
//! A loop based at the factorized pure state `⊗ᵢ|e₀><e₀|` is deformed
//! to the constant loop one site at a time: the loop's restriction to
//! site `i` (a partial trace) is contracted in the site's own matrix
//! algebra, the contraction's lifts are embedded back as operators
//! supported on site `i`, and the full loop is acted on. Once the
//! restriction to a site is constant and pure, that site factorizes
//! from the rest — expectations of products split — so later stages
//! leave it fixed. With finitely many sites the stages are laid out on
//! uniform `s` slots and the final column is the basepoint.

use crate::algebra::{embed_local, LatticeSpec};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{kron_all, partial_trace, ComplexMatrix};
use crate::states::{act, DensityMatrix};

use super::contract::try_contract_stages;
use super::grid::assemble;
use super::unitary::{refine, TryLift};
use super::{HomotopyGrid, SampledPath, Stage, DEFAULT_SUBSTEPS};

/// Per-site verification data from a disentangling run.
#[derive(Debug, Clone)]
pub struct SiteReport {
    pub site: usize,
    /// Worst factorization residual `sup |ψ(ab) − ψ(a)ψ(b)|` over the
    /// sampled commutant/site observable pairs, over all samples.
    pub factorization_residual: f64,
    /// Worst deviation of the restriction to any site `j ≤ i` from the
    /// constant pure basepoint, after this stage.
    pub constancy_deviation: f64,
}

/// Output of [`disentangle_loop`].
#[derive(Debug, Clone)]
pub struct DisentangleOutput {
    pub grid: HomotopyGrid,
    /// Per site, per sample, per inner column: the contraction lifts in
    /// the site's local dimension (their embedding is the grid lift).
    pub site_lifts: Vec<Vec<Vec<ComplexMatrix>>>,
    pub reports: Vec<SiteReport>,
}

/// Contract a lattice loop based at the factorized pure state by
/// disentangling the sites in order.
pub fn disentangle_loop(
    loop_path: &SampledPath,
    spec: &LatticeSpec,
    tol: &Tolerances,
) -> Result<DisentangleOutput> {
    if loop_path.dim() != spec.total_dim() {
        return Err(Error::DimMismatch(format!(
            "disentangle: loop dim {}, lattice dim {}",
            loop_path.dim(),
            spec.total_dim()
        )));
    }
    super::unitary::validate_basepoint(loop_path)?;

    let mut work = loop_path.clone();
    let mut depth: Vec<u32> = vec![0; work.len() - 1];
    loop {
        match try_disentangle(&work, spec, tol) {
            TryLift::Done((stages, site_lifts, reports)) => {
                let target = DensityMatrix::lattice_basepoint(spec);
                let grid = assemble(
                    &work,
                    stages,
                    spec.site_dims().to_vec(),
                    Some(target),
                    DEFAULT_SUBSTEPS,
                    tol,
                )?;
                return Ok(DisentangleOutput { grid, site_lifts, reports });
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

type DisentangleStages = (Vec<Stage>, Vec<Vec<Vec<ComplexMatrix>>>, Vec<SiteReport>);

fn try_disentangle(work: &SampledPath, spec: &LatticeSpec, tol: &Tolerances) -> TryLift<DisentangleStages> {
    let nt = work.len();
    let n_sites = spec.n_sites();
    let dims = spec.site_dims();

    let mut stages: Vec<Stage> = Vec::new();
    let mut site_lifts: Vec<Vec<Vec<ComplexMatrix>>> = Vec::with_capacity(n_sites);
    let mut reports: Vec<SiteReport> = Vec::with_capacity(n_sites);
    let mut current: Vec<DensityMatrix> = work.states().to_vec();

    for site in 0..n_sites {
        // Restrict the working loop to this site.
        let restricted: Vec<DensityMatrix> = match current
            .iter()
            .map(|s| {
                partial_trace(s.matrix(), dims, &[site]).and_then(DensityMatrix::new_normalized)
            })
            .collect::<Result<Vec<_>>>()
        {
            Ok(v) => v,
            Err(e) => return TryLift::Fatal(e),
        };
        let restricted_path = match close_loop(work.params(), restricted) {
            Ok(p) => p,
            Err(e) => return TryLift::Fatal(e),
        };

        // Contract the restricted loop in the site's algebra.
        let local_stages = match try_contract_stages(&restricted_path, tol) {
            TryLift::Done(s) => s,
            TryLift::Refine(segs) => return TryLift::Refine(segs),
            TryLift::Fatal(e) => return TryLift::Fatal(e),
        };

        // Embed the stage lifts on the site and advance the working
        // loop by each stage's end lift.
        let mut local_record: Vec<Vec<ComplexMatrix>> = vec![Vec::new(); nt];
        for sub in &local_stages {
            let mut rel_lifts: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(nt);
            for (t, row) in sub.rel_lifts.iter().enumerate() {
                let mut embedded_row = Vec::with_capacity(row.len());
                for a in row {
                    let b = match embed_local(a, &[site], spec) {
                        Ok(b) => b,
                        Err(e) => return TryLift::Fatal(e),
                    };
                    embedded_row.push(b);
                }
                local_record[t].extend(row.iter().cloned());
                rel_lifts.push(embedded_row);
            }
            // Advance by the stage end.
            for (t, state) in current.iter_mut().enumerate() {
                let end = rel_lifts[t].last().unwrap();
                *state = match act(end, state) {
                    Ok(s) => s,
                    Err(e) => return TryLift::Fatal(e),
                };
            }
            stages.push(Stage { label: format!("site{site}/{}", sub.label), rel_lifts });
        }
        site_lifts.push(local_record);

        // Verification: restrictions to sites ≤ site are constant pure,
        // and the site factorizes from its commutant.
        let mut constancy = 0.0f64;
        for j in 0..=site {
            let base_j = DensityMatrix::basis_state(dims[j], 0);
            for state in &current {
                let red = match partial_trace(state.matrix(), dims, &[j])
                    .and_then(DensityMatrix::new_normalized)
                {
                    Ok(r) => r,
                    Err(e) => return TryLift::Fatal(e),
                };
                constancy = constancy.max(red.dist(&base_j));
            }
        }
        let residual = match factorization_residual(&current, spec, site) {
            Ok(r) => r,
            Err(e) => return TryLift::Fatal(e),
        };
        if residual > tol.factorization_bound {
            return TryLift::Fatal(Error::FactorizationFailure(residual, tol.factorization_bound));
        }
        reports.push(SiteReport { site, factorization_residual: residual, constancy_deviation: constancy });
    }
    TryLift::Done((stages, site_lifts, reports))
}

/// The loop constructor demands exact closure; partial traces of a
/// closed loop close to the same tolerance.
fn close_loop(params: &[f64], states: Vec<DensityMatrix>) -> Result<SampledPath> {
    SampledPath::new_loop(params.to_vec(), states)
}

/// `sup |ψ(ab) − ψ(a)ψ(b)|` over a deterministic sample of commutant
/// elements `a` (supported off `site`) and site elements `b`.
fn factorization_residual(states: &[DensityMatrix], spec: &LatticeSpec, site: usize) -> Result<f64> {
    let n_sites = spec.n_sites();
    if n_sites == 1 {
        return Ok(0.0);
    }
    let mut a_ops: Vec<ComplexMatrix> = Vec::new();
    // Single-site unit-norm elements on each other site.
    let others: Vec<usize> = (0..n_sites).filter(|&v| v != site).collect();
    for &v in &others {
        for g in unit_gell_mann(spec.dim(v)) {
            a_ops.push(embed_local(&g, &[v], spec)?);
        }
    }
    // A few two-site products on the first pair of other sites.
    if others.len() >= 2 {
        let (v1, v2) = (others[0], others[1]);
        let g1 = unit_gell_mann(spec.dim(v1));
        let g2 = unit_gell_mann(spec.dim(v2));
        for x in g1.iter().take(2) {
            for y in g2.iter().take(2) {
                let prod = kron_all(&[x, y]);
                a_ops.push(embed_local(&prod, &[v1, v2], spec)?);
            }
        }
    }
    let b_ops: Vec<ComplexMatrix> = unit_gell_mann(spec.dim(site))
        .into_iter()
        .map(|g| embed_local(&g, &[site], spec))
        .collect::<Result<_>>()?;

    let mut worst = 0.0f64;
    for state in states {
        for a in &a_ops {
            let ea = state.expectation(a);
            for b in &b_ops {
                let eb = state.expectation(b);
                let eab = state.expectation(&(a * b));
                worst = worst.max((eab - ea * eb).norm());
            }
        }
    }
    Ok(worst)
}

/// Unit-operator-norm traceless Hermitian basis of a site algebra.
fn unit_gell_mann(d: usize) -> Vec<ComplexMatrix> {
    use crate::linalg::C64;
    let mut out = Vec::with_capacity(d * d - 1);
    for l in 1..d {
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..l {
            m[(i, i)] = C64::new(1.0 / l as f64, 0.0);
        }
        m[(l, l)] = C64::new(-1.0, 0.0);
        out.push(m);
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(j, k)] = C64::new(1.0, 0.0);
            m[(k, j)] = C64::new(1.0, 0.0);
            out.push(m);
            let mut m = ComplexMatrix::zeros(d, d);
            m[(j, k)] = C64::new(0.0, -1.0);
            m[(k, j)] = C64::new(0.0, 1.0);
            out.push(m);
        }
    }
    out
}
