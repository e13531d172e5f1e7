//! Continuous circle phases over a sampled disk path.
//!
//! Given samples of a path `γ` in the closed unit disk, produce phases
//! `λ` on the circle so that wherever the path touches the edge band,
//! `λγ` sits at 1, and elsewhere the path stays strictly inside. The
//! construction glues two local recipes along the samples: the constant
//! phase (valid strictly inside) and the conjugate-phase map
//! `w ↦ |w|/w`, reached through an interpolated-angle chart anchored at
//! the previous sample. Segments whose phase step exceeds the continuity
//! modulus are bisected (the path is linear between samples) up to a
//! depth cap.

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Radius below which the constant chart applies.
const INTERIOR_RADIUS: f64 = 0.75;
/// Accuracy of `λγ = 1` at which the conjugate chart takes over.
const BRANCH1_SLACK: f64 = 1e-6;
/// Largest admissible correction when snapping onto the conjugate
/// phase inside the edge band, in radians.
const SNAP_MAX: f64 = 0.05;

/// A sampled path of unit-modulus phases.
#[derive(Debug, Clone)]
pub struct PhasePath {
    params: Vec<f64>,
    phases: Vec<C64>,
}

impl PhasePath {
    pub fn new(params: Vec<f64>, phases: Vec<C64>) -> Result<Self> {
        if params.len() != phases.len() || params.is_empty() {
            return Err(Error::InvalidInput("phase path needs aligned nonempty samples".into()));
        }
        if let Some(z) = phases.iter().find(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::NotUnit(z.norm()));
        }
        Ok(Self { params, phases })
    }

    /// The constant phase 1 on the given parameters.
    pub fn constant_one(params: Vec<f64>) -> Self {
        let phases = vec![C64::new(1.0, 0.0); params.len()];
        Self { params, phases }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn phases(&self) -> &[C64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn phase(&self, i: usize) -> C64 {
        self.phases[i]
    }
}

/// Pull a point into the closed unit disk (tolerating 1e-10 overshoot).
fn clamp_disk(w: C64) -> Result<C64> {
    let r = w.norm();
    if r > 1.0 + 1e-10 {
        return Err(Error::InvalidInput(format!("disk path sample has modulus {r}")));
    }
    if r > 1.0 {
        Ok(w / r)
    } else {
        Ok(w)
    }
}

fn conj_phase(w: C64) -> C64 {
    let r = w.norm();
    debug_assert!(r > 0.0);
    w.conj() / r
}

fn angle_between(a: C64, b: C64) -> f64 {
    (b / a).arg().abs()
}

/// Extend the phase from an anchored sample to the next sample using the
/// local chart the anchor admits. `None` requests a bisection.
fn step_phase(w0: C64, mu0: C64, w1: C64, tol: &Tolerances) -> Option<C64> {
    let r0 = w0.norm();
    let r1 = w1.norm();

    // Constant chart strictly inside the disk.
    if r0 < INTERIOR_RADIUS && r1 < INTERIOR_RADIUS {
        return Some(mu0);
    }
    // Conjugate chart once λγ has reached 1: stays valid while the path
    // avoids the origin.
    if (mu0 * w0 - Complex64::new(1.0, 0.0)).norm() <= BRANCH1_SLACK {
        if r1 <= f64::EPSILON {
            return None;
        }
        return Some(conj_phase(w1));
    }
    // Interpolated-angle chart anchored strictly inside: the factor
    // e^{-iθ(|w|-|w₀|)/(1-|w₀|)} unwinds the anchor's angle defect θ
    // linearly in the modulus, so the product λγ reaches 1 exactly as
    // the path reaches the edge.
    if r0 > f64::EPSILON && r0 < 1.0 && r1 > f64::EPSILON {
        let theta = (mu0 * w0 / r0).arg();
        let twist = Complex64::from_polar(1.0, -theta * (r1 - r0) / (1.0 - r0));
        let mu1 = mu0 * (w0 / r0) * conj_phase(w1) * twist;
        let _ = tol;
        return Some(mu1 / mu1.norm());
    }
    None
}

/// Choose continuous circle phases along a sampled disk path so that
/// every sample satisfies either `|λγ − 1| ≤ eps_edge` (when `|γ| ≥ 1 −
/// delta_edge`) or `|γ| < 1 − delta_edge`, with adjacent phases within
/// `theta_step`.
///
/// Samples are bisected adaptively (linear interpolation of `γ`) when a
/// chart step or the continuity modulus fails; exceeding the depth cap
/// yields [`Error::RefinementExhausted`].
pub fn phase_lift(params: &[f64], gamma: &[C64], tol: &Tolerances) -> Result<PhasePath> {
    if params.len() != gamma.len() || params.len() < 2 {
        return Err(Error::InvalidInput("phase_lift needs at least two aligned samples".into()));
    }
    let mut ps: Vec<f64> = params.to_vec();
    let mut gs: Vec<C64> = gamma.iter().map(|&w| clamp_disk(w)).collect::<Result<_>>()?;
    let mut depth: Vec<u32> = vec![0; ps.len() - 1];

    loop {
        match try_phases(&ps, &gs, tol) {
            Ok(phases) => {
                return PhasePath::new(ps, phases);
            }
            Err(TryPhase::Fatal(e)) => return Err(e),
            Err(TryPhase::Refine(segments)) => {
                if segments.iter().any(|&s| depth[s] + 1 > tol.refine_depth) {
                    return Err(Error::RefinementExhausted(tol.refine_depth));
                }
                let mut new_ps = Vec::with_capacity(ps.len() + segments.len());
                let mut new_gs = Vec::with_capacity(gs.len() + segments.len());
                let mut new_depth = Vec::with_capacity(depth.len() + segments.len());
                let mut want = segments.iter().peekable();
                for i in 0..ps.len() {
                    new_ps.push(ps[i]);
                    new_gs.push(gs[i]);
                    if i < depth.len() {
                        if want.peek() == Some(&&i) {
                            want.next();
                            new_ps.push(0.5 * (ps[i] + ps[i + 1]));
                            new_gs.push((gs[i] + gs[i + 1]) * 0.5);
                            new_depth.push(depth[i] + 1);
                            new_depth.push(depth[i] + 1);
                        } else {
                            new_depth.push(depth[i]);
                        }
                    }
                }
                ps = new_ps;
                gs = new_gs;
                depth = new_depth;
            }
        }
    }
}

enum TryPhase {
    Refine(Vec<usize>),
    Fatal(Error),
}

fn try_phases(ps: &[f64], gs: &[C64], tol: &Tolerances) -> std::result::Result<Vec<C64>, TryPhase> {
    let n = ps.len();
    let mut phases = Vec::with_capacity(n);
    let first = if gs[0].norm() >= 1.0 - tol.delta_edge {
        conj_phase(gs[0])
    } else {
        C64::new(1.0, 0.0)
    };
    phases.push(first);

    let mut refine = Vec::new();
    for j in 0..n - 1 {
        let mu0 = phases[j];
        let (w0, w1) = (gs[j], gs[j + 1]);
        let mut mu1 = match step_phase(w0, mu0, w1, tol) {
            Some(m) => m,
            None => {
                refine.push(j);
                phases.push(mu0);
                continue;
            }
        };
        // Snap inside the edge band so λγ lands on 1 exactly up to the
        // modulus defect.
        if w1.norm() >= 1.0 - tol.delta_edge {
            let snapped = conj_phase(w1);
            if angle_between(mu1, snapped) > SNAP_MAX {
                refine.push(j);
            }
            mu1 = snapped;
        }
        if angle_between(mu0, mu1) > tol.theta_step {
            refine.push(j);
        }
        phases.push(mu1);
    }
    if !refine.is_empty() {
        refine.dedup();
        return Err(TryPhase::Refine(refine));
    }
    // Postcondition audit; failures here cannot be refined away.
    for (z, &w) in phases.iter().zip(gs) {
        if w.norm() >= 1.0 - tol.delta_edge && (z * w - C64::new(1.0, 0.0)).norm() > tol.eps_edge {
            return Err(TryPhase::Fatal(Error::InvalidInput(format!(
                "phase lift postcondition failed: |λγ−1| = {:.3e}",
                (z * w - C64::new(1.0, 0.0)).norm()
            ))));
        }
    }
    Ok(phases)
}

/// True if the sample satisfies the lifted-phase dichotomy.
pub(crate) fn dichotomy_holds(lambda: C64, gamma: C64, tol: &Tolerances) -> bool {
    let r = gamma.norm();
    if r >= 1.0 - tol.delta_edge {
        (lambda * gamma - C64::new(1.0, 0.0)).norm() <= tol.eps_edge
    } else {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn interior_path_gets_constant_phase() {
        let n = 64;
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let gamma: Vec<C64> = params.iter().map(|_| C64::new(0.0, 0.0)).collect();
        let lifted = phase_lift(&params, &gamma, &tol()).unwrap();
        assert!(lifted.phases().iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn boundary_circle_gets_conjugate_phase() {
        let n = 256;
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let gamma: Vec<C64> = params
            .iter()
            .map(|&t| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t))
            .collect();
        let lifted = phase_lift(&params, &gamma, &tol()).unwrap();
        assert_eq!(lifted.len(), n);
        for (z, w) in lifted.phases().iter().zip(&gamma) {
            assert!((z * w - C64::new(1.0, 0.0)).norm() <= 1e-8);
            // λ(t) = e^{-2πit}, the conjugate of the path itself.
            assert!((z - w.conj()).norm() < 1e-12);
        }
        for pair in lifted.phases().windows(2) {
            assert!(angle_between(pair[0], pair[1]) <= tol().theta_step);
        }
    }

    #[test]
    fn radial_exit_reaches_unit_product() {
        // γ(t) = t leaves the disk radially; any valid lift must have
        // λ(1)·1 = 1.
        let n = 101;
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let gamma: Vec<C64> = params.iter().map(|&t| C64::new(t, 0.0)).collect();
        let lifted = phase_lift(&params, &gamma, &tol()).unwrap();
        let last = *lifted.phases().last().unwrap();
        assert!((last * C64::new(1.0, 0.0) - C64::new(1.0, 0.0)).norm() <= 1e-8);
        for (i, z) in lifted.phases().iter().enumerate() {
            assert!(dichotomy_holds(*z, gamma.get(i).copied().unwrap_or(last), &tol()));
        }
    }

    #[test]
    fn coarse_winding_gets_refined() {
        // 9 samples around the circle: bare steps of 45° exceed the
        // modulus, so the lift must insert samples.
        let n = 9;
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let gamma: Vec<C64> = params
            .iter()
            .map(|&t| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t))
            .collect();
        let lifted = phase_lift(&params, &gamma, &tol()).unwrap();
        assert!(lifted.len() > n);
        for pair in lifted.phases().windows(2) {
            assert!(angle_between(pair[0], pair[1]) <= tol().theta_step + 1e-12);
        }
    }

    #[test]
    fn rejects_outside_disk() {
        let params = vec![0.0, 1.0];
        let gamma = vec![C64::new(1.5, 0.0), C64::new(0.0, 0.0)];
        assert!(phase_lift(&params, &gamma, &tol()).is_err());
    }

    #[test]
    fn dip_and_return_stays_continuous() {
        // Path rides the edge, dips inside, and returns at a different
        // angle: the chart gluing must track without jumps.
        let n = 400;
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let gamma: Vec<C64> = params
            .iter()
            .map(|&t| {
                let r = 1.0 - 0.6 * (std::f64::consts::PI * t).sin().powi(2);
                Complex64::from_polar(r, 4.0 * std::f64::consts::PI * t)
            })
            .collect();
        let lifted = phase_lift(&params, &gamma, &tol()).unwrap();
        for pair in lifted.phases().windows(2) {
            assert!(angle_between(pair[0], pair[1]) <= tol().theta_step + 1e-12);
        }
        // Postcondition at the two edge touches (t = 0 and t = 1).
        assert!((lifted.phase(0) * gamma[0] - C64::new(1.0, 0.0)).norm() <= 1e-8);
    }
}
