//! Continuous unitary families moving a loop toward the basepoint.
//!
//! For a loop of states based at the pure reference state `|e₀><e₀|`,
//! produce unitaries `U_t` with `U_0·ω_0 = U_1·ω_1 = ω₀` such that at
//! every sample either `(U_t·ω_t)(P₁) > δ_P` for the leading projector
//! `P₁ = diag(1,…,1,0)`, or `U_t·ω_t` already sits at the basepoint.
//! The forbidden alternative — landing on the opposite pure corner — is
//! exactly what a vanishing `P₁`-expectation would mean, and mixed
//! states can never reach it.
//!
//! Construction: track the top eigenvector `Φ_t` of `ρ_t` with the
//! gauge `<Φ_{t-1}, Φ_t> > 0` wherever the top spectral gap exceeds
//! `eps_deg`; across degenerate (mixed) stretches the tracked vector is
//! bridged by a spherical geodesic, which keeps the family continuous —
//! any unitary is admissible there. Each `U_t` is the two-plane
//! rotation sending `Φ_t` to `e₀` exactly. Endpoints are pinned by a
//! scalar phase making `<e₀|U|e₀>` real nonnegative.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, inner_product, C64, ComplexMatrix};
use crate::states::DensityMatrix;

use super::SampledPath;

/// A refinement request carrying segment indices, or a hard error.
pub(crate) enum TryLift<T> {
    Done(T),
    Refine(Vec<usize>),
    Fatal(Error),
}

/// Lift a loop based at `|e₀><e₀|` to a continuous family of unitaries
/// satisfying the leading-projector dichotomy at every sample.
///
/// Returns the (possibly refined) loop and the aligned unitaries.
pub fn unitary_lift(loop_path: &SampledPath, tol: &Tolerances) -> Result<(SampledPath, Vec<ComplexMatrix>)> {
    validate_basepoint(loop_path)?;
    let mut work = loop_path.clone();
    let mut depth: Vec<u32> = vec![0; work.len() - 1];
    loop {
        match try_unitary_lift(&work, tol) {
            TryLift::Done(us) => return Ok((work, us)),
            TryLift::Fatal(e) => return Err(e),
            TryLift::Refine(segments) => {
                let (new_work, new_depth) = refine(&work, &depth, &segments, tol)?;
                work = new_work;
                depth = new_depth;
            }
        }
    }
}

pub(crate) fn refine(
    work: &SampledPath,
    depth: &[u32],
    segments: &[usize],
    tol: &Tolerances,
) -> Result<(SampledPath, Vec<u32>)> {
    if segments.iter().any(|&s| depth[s] + 1 > tol.refine_depth) {
        return Err(Error::RefinementExhausted(tol.refine_depth));
    }
    let refined = work.bisect_segments(segments)?;
    let mut new_depth = Vec::with_capacity(depth.len() + segments.len());
    let mut want = segments.iter().peekable();
    for (i, &d) in depth.iter().enumerate() {
        if want.peek() == Some(&&i) {
            want.next();
            new_depth.push(d + 1);
            new_depth.push(d + 1);
        } else {
            new_depth.push(d);
        }
    }
    Ok((refined, new_depth))
}

pub(crate) fn validate_basepoint(loop_path: &SampledPath) -> Result<()> {
    if !loop_path.is_loop() {
        return Err(Error::InvalidInput("unitary_lift needs a loop".into()));
    }
    let base = DensityMatrix::basis_state(loop_path.dim(), 0);
    let d0 = loop_path.state(0).dist(&base);
    let d1 = loop_path.state(loop_path.len() - 1).dist(&base);
    if d0 > 1e-9 || d1 > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "loop must be based at the first basis state: endpoint deviations {d0:.3e}, {d1:.3e}"
        )));
    }
    Ok(())
}

/// One pass over a fixed sample grid.
pub(crate) fn try_unitary_lift(work: &SampledPath, tol: &Tolerances) -> TryLift<Vec<ComplexMatrix>> {
    let n = work.dim();
    let nt = work.len();

    // Spectral data per sample; the tracked vector exists where the top
    // gap is open.
    let mut lam_max = vec![0.0f64; nt];
    let mut tracked: Vec<Option<Vec<C64>>> = vec![None; nt];
    for t in 0..nt {
        let eig = match herm_eig(work.state(t).matrix()) {
            Ok(e) => e,
            Err(e) => return TryLift::Fatal(e),
        };
        let top = eig.values[n - 1];
        lam_max[t] = top;
        let gap = if n >= 2 { top - eig.values[n - 2] } else { 1.0 };
        if gap >= tol.eps_deg {
            tracked[t] = Some(eig.vector(n - 1));
        }
    }

    // Gauge pass: align each tracked vector with the previously tracked
    // one; the first is anchored by making its largest component real
    // positive.
    let mut refine_segs: Vec<usize> = Vec::new();
    let mut last_tracked: Option<usize> = None;
    for t in 0..nt {
        if tracked[t].is_none() {
            continue;
        }
        match last_tracked {
            None => {
                let phi = tracked[t].as_mut().unwrap();
                let (kmax, _) = phi
                    .iter()
                    .enumerate()
                    .map(|(k, z)| (k, z.norm()))
                    .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    .unwrap();
                let z = phi[kmax];
                if z.norm() > 0.0 {
                    let corr = z.conj() / z.norm();
                    for x in phi.iter_mut() {
                        *x *= corr;
                    }
                }
            }
            Some(prev) => {
                let overlap = inner_product(tracked[prev].as_ref().unwrap(), tracked[t].as_ref().unwrap());
                if overlap.norm() > 0.0 {
                    let corr = overlap.conj() / overlap.norm();
                    for x in tracked[t].as_mut().unwrap().iter_mut() {
                        *x *= corr;
                    }
                }
                // Neighborhood condition between consecutive tracked
                // samples: the pure directions must stay close.
                if t == prev + 1 && overlap.norm_sqr() < 1.0 - tol.delta_nb {
                    refine_segs.push(prev);
                }
            }
        }
        last_tracked = Some(t);
    }
    if !refine_segs.is_empty() {
        refine_segs.dedup();
        return TryLift::Refine(refine_segs);
    }

    // Bridge pass: spherical geodesics across degenerate stretches. The
    // loop endpoints are pure, so every stretch is interior.
    let mut phis: Vec<Vec<C64>> = Vec::with_capacity(nt);
    {
        let mut t = 0;
        while t < nt {
            if let Some(phi) = &tracked[t] {
                phis.push(phi.clone());
                t += 1;
                continue;
            }
            let a = t - 1; // t = 0 is always tracked (pure basepoint)
            let mut b = t;
            while b < nt && tracked[b].is_none() {
                b += 1;
            }
            if b == nt {
                return TryLift::Fatal(Error::InvalidInput(
                    "loop end is not pure enough to track".into(),
                ));
            }
            let phi_a = phis[a].clone();
            let phi_b = tracked[b].as_ref().unwrap().clone();
            for u_idx in t..b {
                let u = (u_idx - a) as f64 / (b - a) as f64;
                phis.push(slerp(&phi_a, &phi_b, u));
            }
            t = b;
        }
    }

    // Rotations to the basepoint, with scalar-phase pinning at the
    // endpoints.
    let mut us: Vec<ComplexMatrix> = phis.iter().map(|phi| rotation_to_e0(phi)).collect();
    for idx in [0, nt - 1] {
        let z = us[idx][(0, 0)];
        if z.norm() > 0.0 {
            us[idx] = us[idx].scale(z.conj() / z.norm());
        }
    }

    // Continuity of the family.
    let mut steps: Vec<usize> = Vec::new();
    for t in 0..nt - 1 {
        if us[t].dist(&us[t + 1]) > tol.eta_step {
            steps.push(t);
        }
    }
    if !steps.is_empty() {
        return TryLift::Refine(steps);
    }

    // Dichotomy audit: the leading projector keeps positive expectation
    // unless the moved state is the basepoint already.
    let base = DensityMatrix::basis_state(n, 0);
    for t in 0..nt {
        let moved = match crate::states::act(&us[t], work.state(t)) {
            Ok(m) => m,
            Err(e) => return TryLift::Fatal(e),
        };
        let p1_expect = 1.0 - moved.matrix()[(n - 1, n - 1)].re;
        if p1_expect <= tol.delta_p && moved.dist(&base) >= tol.delta_pure {
            return TryLift::Fatal(Error::InvalidInput(format!(
                "unitary lift dichotomy failed at sample {t}: P₁ expectation {p1_expect:.3e}"
            )));
        }
    }
    TryLift::Done(us)
}

/// Spherical geodesic between unit vectors whose inner product is real
/// nonnegative (the gauge pass guarantees this for its inputs).
fn slerp(a: &[C64], b: &[C64], u: f64) -> Vec<C64> {
    let overlap = inner_product(a, b);
    let cos = overlap.re.clamp(-1.0, 1.0);
    let theta = cos.acos();
    let mut out: Vec<C64>;
    if theta < 1e-9 {
        out = a.iter().zip(b).map(|(x, y)| x * (1.0 - u) + y * u).collect();
    } else {
        let (sa, sb) = (((1.0 - u) * theta).sin() / theta.sin(), (u * theta).sin() / theta.sin());
        out = a.iter().zip(b).map(|(x, y)| x * sa + y * sb).collect();
    }
    let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in out.iter_mut() {
            *z /= norm;
        }
    }
    out
}

/// The two-plane rotation sending a unit vector exactly to `e₀`,
/// identity on the orthogonal complement of `span{φ, e₀}`.
pub(crate) fn rotation_to_e0(phi: &[C64]) -> ComplexMatrix {
    let n = phi.len();
    let c = phi[0];
    let s = (1.0 - c.norm_sqr()).max(0.0).sqrt();
    if s < 1e-12 {
        // φ is e₀ up to phase; the diagonal phase fixes it to e₀.
        let mut u = ComplexMatrix::identity(n);
        if c.norm() > 0.0 {
            u[(0, 0)] = c.conj() / c.norm();
        }
        return u;
    }
    // Orthonormal plane basis b₁ = e₀, b₂ = (φ − c·e₀)/s.
    let mut b2 = vec![C64::new(0.0, 0.0); n];
    for (i, z) in phi.iter().enumerate() {
        b2[i] = *z;
    }
    b2[0] -= c;
    for z in b2.iter_mut() {
        *z /= s;
    }
    let mut u = ComplexMatrix::identity(n);
    let one = C64::new(1.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let e0_i = if i == 0 { one } else { C64::new(0.0, 0.0) };
            let e0_j = if j == 0 { one } else { C64::new(0.0, 0.0) };
            let delta = (c.conj() - one) * e0_i * e0_j.conj()
                + C64::new(s, 0.0) * e0_i * b2[j].conj()
                - C64::new(s, 0.0) * b2[i] * e0_j.conj()
                + (c - one) * b2[i] * b2[j].conj();
            u[(i, j)] += delta;
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::sampling::Sampler;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn rotation_maps_to_e0_exactly() {
        let mut rng = Sampler::new(31);
        for n in 2..6 {
            let phi = rng.unit_vector(n);
            let u = rotation_to_e0(&phi);
            let id = ComplexMatrix::identity(n);
            assert!((u.dagger() * u.clone()).dist(&id) < 1e-12);
            let moved = u.mul_vec(&phi);
            assert!((moved[0].norm() - 1.0).abs() < 1e-12);
            for z in &moved[1..] {
                assert!(z.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_loop_lifts_to_near_identity() {
        let base = DensityMatrix::basis_state(3, 0);
        let loop_path = SampledPath::constant_loop(base.clone(), 16).unwrap();
        let (path, us) = unitary_lift(&loop_path, &tol()).unwrap();
        assert_eq!(path.len(), 16);
        for u in &us {
            let moved = crate::states::act(u, &base).unwrap();
            assert!(moved.dist(&base) < 1e-12);
        }
    }

    #[test]
    fn great_circle_loop_satisfies_dichotomy() {
        // e₀ → e₁ → e₀ along a great circle.
        let n = 200;
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let states: Vec<DensityMatrix> = params
            .iter()
            .map(|&t| {
                let a = std::f64::consts::PI * t;
                DensityMatrix::pure(&[C64::new(a.cos(), 0.0), C64::new(a.sin(), 0.0)]).unwrap()
            })
            .collect();
        let loop_path = SampledPath::new_loop(params, states).unwrap();
        let (path, us) = unitary_lift(&loop_path, &tol()).unwrap();
        for (t, u) in us.iter().enumerate() {
            let moved = crate::states::act(u, path.state(t)).unwrap();
            let p1 = 1.0 - moved.matrix()[(1, 1)].re;
            assert!(p1 > tol().delta_p, "P₁ expectation {p1} at sample {t}");
        }
        let base = DensityMatrix::basis_state(2, 0);
        let first = crate::states::act(&us[0], path.state(0)).unwrap();
        let last = crate::states::act(us.last().unwrap(), path.state(path.len() - 1)).unwrap();
        assert!(first.dist(&base) < 1e-8);
        assert!(last.dist(&base) < 1e-8);
    }

    #[test]
    fn mixed_interior_engages_bridge() {
        // Ride through the maximally mixed state and back.
        let n = 120;
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let base = DensityMatrix::basis_state(2, 0);
        let rot = pauli::pauli_x();
        let states: Vec<DensityMatrix> = params
            .iter()
            .map(|&t| {
                let m = (std::f64::consts::PI * t).sin().powi(2);
                let other = crate::linalg::exp_i_herm(&rot.scale_re(1.3)).unwrap();
                let moved = crate::states::act(&other, &base).unwrap();
                let mix = &base.matrix().scale_re(1.0 - m) + &moved.matrix().scale_re(m);
                DensityMatrix::new_normalized(mix).unwrap()
            })
            .collect();
        let loop_path = SampledPath::new_loop(params, states).unwrap();
        let (path, us) = unitary_lift(&loop_path, &tol()).unwrap();
        for t in 0..path.len() {
            let moved = crate::states::act(&us[t], path.state(t)).unwrap();
            let p1 = 1.0 - moved.matrix()[(1, 1)].re;
            assert!(p1 > tol().delta_p);
        }
        for w in us.windows(2) {
            assert!(w[0].dist(&w[1]) <= tol().eta_step + 1e-12);
        }
    }

    #[test]
    fn rejects_unbased_loop() {
        let mixed = DensityMatrix::maximally_mixed(2);
        let loop_path = SampledPath::constant_loop(mixed, 8).unwrap();
        assert!(unitary_lift(&loop_path, &tol()).is_err());
    }
}
