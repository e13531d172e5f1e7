//! Density-matrix states and the structures built on them.
//!
//! A [`DensityMatrix`] is a positive unit-trace Hermitian matrix; it
//! carries the state `A ↦ tr(ρA)` of the matrix algebra of its dimension.
//! [`act`] implements the state action `A·ω = ω(A*·A)⁻¹ ω(A*·A·—)`
//! realized on density matrices as `ρ ↦ AρA*/tr(AρA*)`, with the Gelfand
//! ideal detected numerically. [`restrict_corner`]/[`extend_corner`] move
//! states between an algebra and a leading corner, [`stabilize`] stacks a
//! factorized vacuum onto a lattice state, and [`weakstar_dist`] is the
//! truncated series metric for the weak* topology with a certified tail
//! bound.

use num_complex::Complex64;

use crate::algebra::{eta_interleave, LatticeSpec};
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, kron_all, C64, ComplexMatrix};

/// Threshold below which `ω(A*A)` counts as membership in the Gelfand
/// ideal.
pub const TAU_IDEAL: f64 = 1e-12;
/// Validation tolerance for Hermiticity, trace, and positivity.
const STATE_TOL: f64 = 1e-9;

/// A state of a matrix algebra, stored as its density matrix.
///
/// Construction validates Hermiticity (1e-9 relative), unit trace
/// (1e-9), and positivity; eigenvalues in `[-1e-9, 0)` are clipped to
/// zero and the trace renormalized, larger violations are errors. After
/// construction the diagonal sums to exactly 1.0 in floating point.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::DimMismatch("density matrix must be square and nonempty".into()));
        }
        let defect = matrix.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidInput(format!("trace {trace} is not 1")));
        }
        let herm = matrix.hermitize();
        let eig = herm_eig(&herm)?;
        let min = eig.values.first().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidInput(format!("negative eigenvalue {min:.3e}")));
        }
        let repaired = if min < 0.0 {
            // Clip tiny negative eigenvalues and renormalize.
            let clipped: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            let n = clipped.len();
            let scaled = ComplexMatrix::from_fn(n, n, |i, j| eig.vectors[(i, j)] * (clipped[j] / total));
            scaled * eig.vectors.dagger()
        } else {
            herm
        };
        Ok(Self::finish(repaired))
    }

    /// Skip the spectral check but normalize shape, Hermiticity, and
    /// trace. For matrices that are positive by construction.
    pub(crate) fn new_normalized(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::DimMismatch("density matrix must be square and nonempty".into()));
        }
        let trace = matrix.trace().re;
        if !(trace.is_finite() && trace > 0.0) {
            return Err(Error::InvalidInput(format!("trace {trace} is not positive")));
        }
        Ok(Self::finish(matrix.hermitize().scale_re(1.0 / trace)))
    }

    /// Pin the diagonal sum to exactly 1.0 by recomputing the last
    /// diagonal entry as the complement of the others.
    fn finish(mut m: ComplexMatrix) -> Self {
        let n = m.rows();
        let mut partial = 0.0;
        for i in 0..n - 1 {
            partial += m[(i, i)].re;
        }
        m[(n - 1, n - 1)] = C64::new(1.0 - partial, 0.0);
        Self { matrix: m }
    }

    /// The pure state |v><v| of a unit vector.
    pub fn pure(v: &[C64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::NotUnit(norm));
        }
        Self::new_normalized(ComplexMatrix::projector(v))
    }

    /// The pure reference state on basis vector `k` in dimension `n`.
    pub fn basis_state(n: usize, k: usize) -> Self {
        Self { matrix: ComplexMatrix::basis_projector(n, k) }
    }

    /// The maximally mixed state 1/n.
    pub fn maximally_mixed(n: usize) -> Self {
        Self::finish(ComplexMatrix::identity(n).scale_re(1.0 / n as f64))
    }

    /// The factorized pure basepoint `⊗ᵢ |e₀><e₀|` of a lattice
    /// truncation.
    pub fn lattice_basepoint(spec: &LatticeSpec) -> Self {
        Self::basis_state(spec.total_dim(), 0)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Expectation value `tr(ρA)`.
    pub fn expectation(&self, a: &ComplexMatrix) -> C64 {
        self.matrix.trace_product(a)
    }

    /// tr(ρ²), which is 1 exactly on pure states.
    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    /// True iff `tr(ρ²) ≥ 1 − tol`.
    pub fn is_pure(&self, tol: f64) -> bool {
        self.purity() >= 1.0 - tol
    }

    /// Frobenius distance between density matrices.
    pub fn dist(&self, other: &Self) -> f64 {
        self.matrix.dist(&other.matrix)
    }

    /// Spectral decomposition of the state.
    pub fn eig(&self) -> Result<crate::linalg::HermitianEig> {
        herm_eig(&self.matrix)
    }
}

/// The state action `a·ω`, realized as `aρa*/tr(aρa*)`.
///
/// Fails with [`Error::GelfandIdeal`] when `tr(aρa*) ≤ 1e-12`, the
/// numerical signal that `a` annihilates the state. Maps pure states to
/// pure states, satisfies `𝟙·ω = ω` exactly and `(ab)·ω = a·(b·ω)`
/// whenever both sides are defined.
pub fn act(a: &ComplexMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    act_with_floor(a, rho, TAU_IDEAL)
}

/// [`act`] with an explicit Gelfand-ideal threshold.
pub fn act_with_floor(a: &ComplexMatrix, rho: &DensityMatrix, tau_ideal: f64) -> Result<DensityMatrix> {
    if !a.is_square() || a.rows() != rho.dim() {
        return Err(Error::DimMismatch(format!(
            "act: element is {}x{}, state dim {}",
            a.rows(),
            a.cols(),
            rho.dim()
        )));
    }
    let moved = &(a * rho.matrix()) * &a.dagger();
    let weight = {
        // In-order diagonal sum; equals 1.0 bitwise when a = 1.
        let mut t = 0.0;
        for i in 0..moved.rows() {
            t += moved[(i, i)].re;
        }
        t
    };
    if !(weight > tau_ideal) {
        return Err(Error::GelfandIdeal(weight));
    }
    let mut normalized = moved.hermitize().scale_re(1.0 / weight);
    // Renormalization keeps the diagonal complement convention.
    let n = normalized.rows();
    let mut partial = 0.0;
    for i in 0..n - 1 {
        partial += normalized[(i, i)].re;
    }
    normalized[(n - 1, n - 1)] = Complex64::new(1.0 - partial, 0.0);
    Ok(DensityMatrix { matrix: normalized })
}

/// `ω(A*A)` for a state and algebra element, the squared GNS norm that
/// decides Gelfand-ideal membership.
pub fn action_weight(a: &ComplexMatrix, rho: &DensityMatrix) -> f64 {
    let moved = &(a * rho.matrix()) * &a.dagger();
    let mut t = 0.0;
    for i in 0..moved.rows() {
        t += moved[(i, i)].re;
    }
    t
}

/// Von Neumann entropy `−Σ λ ln λ`, with `0·ln 0 = 0`.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    let eig = herm_eig(rho.matrix()).expect("density matrix is Hermitian");
    let mut s = 0.0;
    for &lam in &eig.values {
        if lam > 0.0 {
            s -= lam * lam.ln();
        }
    }
    s.max(0.0)
}

/// Restrict a state supported on the leading corner to the corner
/// algebra: keep the top-left `corner_dim × corner_dim` block and
/// renormalize.
///
/// Requires `ρ(P) ≥ 1 − 1e-8` where `P` projects onto the corner;
/// positivity then forces the discarded coherences to be negligible, and
/// they are zeroed structurally.
pub fn restrict_corner(rho: &DensityMatrix, corner_dim: usize) -> Result<DensityMatrix> {
    const SUPPORT_TOL: f64 = 1e-8;
    let n = rho.dim();
    if corner_dim == 0 || corner_dim > n {
        return Err(Error::DimMismatch(format!("corner dim {corner_dim} of state dim {n}")));
    }
    let mut mass = 0.0;
    for i in 0..corner_dim {
        mass += rho.matrix()[(i, i)].re;
    }
    if mass < 1.0 - SUPPORT_TOL {
        return Err(Error::NotSupported(mass));
    }
    let block = ComplexMatrix::from_fn(corner_dim, corner_dim, |i, j| rho.matrix()[(i, j)]);
    DensityMatrix::new_normalized(block)
}

/// Embed a state of the corner algebra into an ambient dimension, with
/// exact zeros outside the corner. Inverse of [`restrict_corner`] on its
/// image: the round trip is exact.
pub fn extend_corner(omega: &DensityMatrix, ambient_dim: usize) -> Result<DensityMatrix> {
    let d = omega.dim();
    if d > ambient_dim {
        return Err(Error::DimMismatch(format!("corner dim {d} exceeds ambient {ambient_dim}")));
    }
    let m = ComplexMatrix::from_fn(ambient_dim, ambient_dim, |i, j| {
        if i < d && j < d {
            omega.matrix()[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    // Trace is inherited from the corner state; skip re-pinning so the
    // round trip through restrict_corner is bit-exact.
    Ok(DensityMatrix { matrix: m })
}

/// Stack `k` copies of the factorized vacuum `⊗ sites |ψ><ψ|` onto a
/// lattice state, merging site by site. Expectations of observables
/// supported on the original factors are unchanged and purity is
/// preserved.
pub fn stabilize(
    rho: &DensityMatrix,
    psi_site_vector: &[C64],
    k: usize,
    spec: &LatticeSpec,
) -> Result<(DensityMatrix, LatticeSpec)> {
    let norm = psi_site_vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnit(norm));
    }
    if rho.dim() != spec.total_dim() {
        return Err(Error::DimMismatch(format!(
            "stabilize: state dim {} on lattice dim {}",
            rho.dim(),
            spec.total_dim()
        )));
    }
    let mut state = rho.clone();
    let mut lattice = spec.clone();
    if k == 0 {
        return Ok((state, lattice));
    }
    let site_proj = ComplexMatrix::projector(psi_site_vector);
    let vac_spec = LatticeSpec::new(vec![psi_site_vector.len(); spec.n_sites()])?;
    let factors: Vec<&ComplexMatrix> = (0..spec.n_sites()).map(|_| &site_proj).collect();
    let vacuum = DensityMatrix::new_normalized(kron_all(&factors))?;
    for _ in 0..k {
        state = eta_interleave(&state, &vacuum, &lattice, &vac_spec)?;
        lattice = lattice.merge(&vac_spec)?;
    }
    Ok((state, lattice))
}

/// A deterministic family of unit-norm observables with their support
/// weights, the data of the truncated weak* metric.
///
/// The default enumeration walks lattice regions by increasing size and
/// then lexicographic order; within a region it tensors per-site
/// generalized Gell-Mann elements (diagonal ones first, then symmetric,
/// then antisymmetric, each rescaled to unit operator norm), so every
/// element has operator norm 1 and support exactly the region. The
/// weight of an element is its region size.
#[derive(Debug, Clone)]
pub struct ObservableFamily {
    observables: Vec<(ComplexMatrix, usize)>,
    dim: usize,
}

impl ObservableFamily {
    /// The first `count` elements of the default enumeration for a
    /// lattice truncation.
    pub fn for_lattice(spec: &LatticeSpec, count: usize) -> Result<Self> {
        let mut observables = Vec::with_capacity(count);
        let n = spec.n_sites();
        // Regions by (size, lexicographic order).
        'outer: for size in 1..=n {
            let mut region: Vec<usize> = (0..size).collect();
            loop {
                let site_bases: Vec<Vec<ComplexMatrix>> =
                    region.iter().map(|&v| gell_mann_unit_norm(spec.dim(v))).collect();
                let counts: Vec<usize> = site_bases.iter().map(|b| b.len()).collect();
                let total: usize = counts.iter().product();
                for flat in 0..total {
                    if observables.len() == count {
                        break 'outer;
                    }
                    let mut idx = flat;
                    let mut picks = vec![0usize; size];
                    for v in (0..size).rev() {
                        picks[v] = idx % counts[v];
                        idx /= counts[v];
                    }
                    let factors: Vec<&ComplexMatrix> =
                        picks.iter().zip(&site_bases).map(|(&p, basis)| &basis[p]).collect();
                    let local = kron_all(&factors);
                    let embedded = crate::algebra::embed_local(&local, &region, spec)?;
                    observables.push((embedded, size));
                }
                if !next_subset(&mut region, n) {
                    break;
                }
            }
        }
        if observables.len() < count {
            return Err(Error::InvalidInput(format!(
                "lattice supports only {} family elements, {count} requested",
                observables.len()
            )));
        }
        Ok(Self { observables, dim: spec.total_dim() })
    }

    /// A custom family. Each observable must be square of the common
    /// dimension with operator norm at most `1 + 1e-9`, and weights at
    /// least 1.
    pub fn from_parts(observables: Vec<(ComplexMatrix, usize)>) -> Result<Self> {
        let dim = observables
            .first()
            .map(|(m, _)| m.rows())
            .ok_or_else(|| Error::InvalidInput("empty observable family".into()))?;
        for (m, w) in &observables {
            if !m.is_square() || m.rows() != dim {
                return Err(Error::DimMismatch("family observables must share a square dimension".into()));
            }
            if *w == 0 {
                return Err(Error::InvalidInput("family weights must be at least 1".into()));
            }
            let norm = m.operator_norm();
            if norm > 1.0 + 1e-9 {
                return Err(Error::InvalidInput(format!("observable norm {norm} exceeds 1")));
            }
        }
        Ok(Self { observables, dim })
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn observable(&self, k: usize) -> &ComplexMatrix {
        &self.observables[k].0
    }

    pub fn weight(&self, k: usize) -> usize {
        self.observables[k].1
    }
}

/// Advance `region` to the next size-preserving subset of `{0..n}` in
/// lexicographic order; false when exhausted.
fn next_subset(region: &mut [usize], n: usize) -> bool {
    let k = region.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if region[i] < n - (k - i) {
            region[i] += 1;
            for j in i + 1..k {
                region[j] = region[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Generalized Gell-Mann basis of traceless Hermitian matrices in
/// dimension `d`, each rescaled to unit operator norm: diagonal elements
/// first (ascending), then symmetric pairs, then antisymmetric pairs,
/// pairs in lexicographic order.
fn gell_mann_unit_norm(d: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    for l in 1..d {
        // diag(1,…,1,−l,0,…,0)/l with l ones; operator norm 1 after the
        // rescale by 1/l.
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
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(j, k)] = C64::new(0.0, -1.0);
            m[(k, j)] = C64::new(0.0, 1.0);
            out.push(m);
        }
    }
    out
}

/// Truncated weak* metric: the first `k_terms` terms of
/// `Σ_k |tr((ρ−σ)A_k)| / (2^{k+2}·λ_k)` together with the tail bound
/// `2^{-k_terms}` certifying the discarded remainder.
///
/// Symmetric, satisfies the triangle inequality, and vanishes exactly
/// when the two states agree on the truncated family.
pub fn weakstar_dist(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    fam: &ObservableFamily,
    k_terms: usize,
) -> Result<(f64, f64)> {
    if rho.dim() != sigma.dim() || rho.dim() != fam.dim() {
        return Err(Error::DimMismatch(format!(
            "weakstar_dist: states of dim {} and {}, family dim {}",
            rho.dim(),
            sigma.dim(),
            fam.dim()
        )));
    }
    if k_terms > fam.len() {
        return Err(Error::InvalidInput(format!(
            "truncation {k_terms} exceeds family length {}",
            fam.len()
        )));
    }
    let diff = rho.matrix() - sigma.matrix();
    let mut value = 0.0;
    for k in 0..k_terms {
        let term = diff.trace_product(fam.observable(k)).norm();
        let weight = (fam.weight(k) as f64) * 2f64.powi(k as i32 + 2);
        value += term / weight;
    }
    Ok((value, 2f64.powi(-(k_terms as i32))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli as consts;
    use crate::sampling::Sampler;

    #[test]
    fn constructor_validates() {
        assert!(DensityMatrix::new(consts::pauli_x()).is_err()); // trace 0
        let not_herm = ComplexMatrix::from_vec(
            2,
            2,
            vec![C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.3, 0.0), C64::new(0.5, 0.0)],
        );
        assert!(matches!(DensityMatrix::new(not_herm), Err(Error::NotHermitian(_))));
        let neg = ComplexMatrix::diag_real(&[1.5, -0.5]);
        assert!(DensityMatrix::new(neg).is_err());
        // A tiny negative eigenvalue is repaired.
        let tiny = ComplexMatrix::diag_real(&[1.0 + 5e-10, -5e-10]);
        let fixed = DensityMatrix::new(tiny).unwrap();
        assert!(fixed.matrix()[(1, 1)].re >= 0.0);
        assert!((fixed.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_action_is_exact() {
        let rho = Sampler::new(20).density(5);
        let moved = act(&ComplexMatrix::identity(5), &rho).unwrap();
        assert_eq!(moved.matrix(), rho.matrix());
    }

    #[test]
    fn invariant_state_under_peak_modulus_element() {
        // a = σ³ on |e₀><e₀| has |ω(a)| = ‖a‖ = 1 and fixes the state.
        let rho = DensityMatrix::basis_state(2, 0);
        let moved = act(&consts::pauli_z(), &rho).unwrap();
        assert!(moved.dist(&rho) < 1e-15);
    }

    #[test]
    fn projection_collapses_mixed_state() {
        let rho = DensityMatrix::maximally_mixed(2);
        let p = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let moved = act(&p, &rho).unwrap();
        assert!(moved.dist(&DensityMatrix::basis_state(2, 0)) < 1e-15);
    }

    #[test]
    fn gelfand_ideal_detected() {
        let rho = DensityMatrix::basis_state(2, 0);
        let kills = ComplexMatrix::diag_real(&[0.0, 1.0]);
        assert!(matches!(act(&kills, &rho), Err(Error::GelfandIdeal(_))));
    }

    #[test]
    fn action_is_compatible_with_products() {
        let mut rng = Sampler::new(21);
        for _ in 0..50 {
            let n = 2 + rng.usize_below(5);
            let rho = rng.density(n);
            let a = rng.matrix(n, n);
            let b = rng.matrix(n, n);
            let ab = &a * &b;
            match (act(&ab, &rho), act(&b, &rho).and_then(|s| act(&a, &s))) {
                (Ok(lhs), Ok(rhs)) => assert!(lhs.dist(&rhs) < 1e-10),
                (Err(_), _) | (_, Err(_)) => {}
            }
        }
    }

    #[test]
    fn purity_is_preserved_by_action() {
        let mut rng = Sampler::new(22);
        for _ in 0..50 {
            let n = 2 + rng.usize_below(4);
            let rho = rng.pure_state(n);
            let a = rng.matrix(n, n);
            if let Ok(moved) = act(&a, &rho) {
                assert!(moved.is_pure(1e-9));
            }
        }
    }

    #[test]
    fn is_pure_cases() {
        assert!(DensityMatrix::basis_state(2, 0).is_pure(1e-9));
        assert!(!DensityMatrix::maximally_mixed(2).is_pure(1e-6));
        let nearly = DensityMatrix::new(ComplexMatrix::diag_real(&[0.99, 0.01])).unwrap();
        // tr(ρ²) = 0.9802, well below 1 − 1e−6.
        assert!(!nearly.is_pure(1e-6));
        assert!((nearly.purity() - 0.9802).abs() < 1e-12);
    }

    #[test]
    fn entropy_values() {
        assert!(entropy(&DensityMatrix::basis_state(3, 1)) < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((entropy(&mixed) - std::f64::consts::LN_2).abs() < 1e-12);
        let rho = DensityMatrix::new(ComplexMatrix::diag_real(&[0.75, 0.25])).unwrap();
        let expect = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((entropy(&rho) - expect).abs() < 1e-12);
    }

    #[test]
    fn corner_restriction_and_extension() {
        let rho = DensityMatrix::new(ComplexMatrix::diag_real(&[0.5, 0.5, 0.0])).unwrap();
        let r = restrict_corner(&rho, 2).unwrap();
        assert!(r.matrix().approx_eq(&ComplexMatrix::identity(2).scale_re(0.5), 1e-12));

        let pure = DensityMatrix::basis_state(3, 0);
        let rp = restrict_corner(&pure, 2).unwrap();
        assert!(rp.dist(&DensityMatrix::basis_state(2, 0)) < 1e-15);

        let unsupported = DensityMatrix::maximally_mixed(3);
        assert!(matches!(restrict_corner(&unsupported, 2), Err(Error::NotSupported(_))));

        // Round trip is exact.
        let omega = Sampler::new(23).density(3);
        let extended = extend_corner(&omega, 5).unwrap();
        let back = restrict_corner(&extended, 3).unwrap();
        assert_eq!(back.matrix(), omega.matrix());
        let scalar = DensityMatrix::new(ComplexMatrix::identity(1)).unwrap();
        let e = extend_corner(&scalar, 4).unwrap();
        assert!(e.matrix().approx_eq(&ComplexMatrix::basis_projector(4, 0), 0.0));
    }

    #[test]
    fn corner_support_forces_vanishing_coherences() {
        // Build a state with mass 1 on the corner after validation; its
        // off-corner row must vanish by positivity.
        let mut rng = Sampler::new(24);
        for _ in 0..20 {
            let inner = rng.density(2);
            let supported = extend_corner(&inner, 3).unwrap();
            for j in 0..3 {
                assert!(supported.matrix()[(2, j)].norm() < 1e-12);
            }
            let back = restrict_corner(&supported, 2).unwrap();
            assert!(back.dist(&inner) < 1e-12);
        }
    }

    #[test]
    fn stabilize_cases() {
        let mut rng = Sampler::new(25);
        let spec = LatticeSpec::new(vec![2]).unwrap();
        let rho = rng.density(2);
        let psi = rng.unit_vector(2);

        let (same, same_spec) = stabilize(&rho, &psi, 0, &spec).unwrap();
        assert_eq!(same.matrix(), rho.matrix());
        assert_eq!(same_spec, spec);

        let (once, once_spec) = stabilize(&rho, &psi, 1, &spec).unwrap();
        assert_eq!(once_spec.site_dims(), &[4]);
        let expect = crate::linalg::kron(rho.matrix(), &ComplexMatrix::projector(&psi));
        assert!(once.matrix().dist(&expect) < 1e-12);

        // Expectations of observables on the original factor are
        // unchanged: check against the partial-trace oracle.
        let spec2 = LatticeSpec::new(vec![2, 2]).unwrap();
        let rho2 = rng.density(4);
        let (stab, _) = stabilize(&rho2, &psi, 1, &spec2).unwrap();
        let reduced = crate::linalg::partial_trace(stab.matrix(), &[2, 2, 2, 2], &[0, 2]).unwrap();
        assert!(reduced.dist(rho2.matrix()) < 1e-10);

        let pure = rng.pure_state(4);
        let (stab_pure, _) = stabilize(&pure, &psi, 1, &spec2).unwrap();
        assert!(stab_pure.is_pure(1e-9));
    }

    #[test]
    fn qubit_family_starts_with_sigma_z() {
        let spec = LatticeSpec::new(vec![2, 2]).unwrap();
        let fam = ObservableFamily::for_lattice(&spec, 8).unwrap();
        let z0 = crate::algebra::embed_local(&consts::pauli_z(), &[0], &spec).unwrap();
        assert!(fam.observable(0).approx_eq(&z0, 0.0));
        assert_eq!(fam.weight(0), 1);
        // All unit norm.
        for k in 0..fam.len() {
            assert!(fam.observable(k).operator_norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn metric_worked_example() {
        // Family starting with σ³, states |e₀><e₀| and |e₁><e₁|: the
        // first term is |tr((ρ−σ)σ³)|/4 = 2/4.
        let fam = ObservableFamily::from_parts(vec![(consts::pauli_z(), 1)]).unwrap();
        let rho = DensityMatrix::basis_state(2, 0);
        let sigma = DensityMatrix::basis_state(2, 1);
        let (value, tail) = weakstar_dist(&rho, &sigma, &fam, 1).unwrap();
        assert!((value - 0.5).abs() < 1e-15);
        assert!((tail - 0.5).abs() < 1e-15);
    }

    #[test]
    fn metric_zero_symmetric_triangle() {
        let spec = LatticeSpec::new(vec![2, 2]).unwrap();
        let fam = ObservableFamily::for_lattice(&spec, 12).unwrap();
        let mut rng = Sampler::new(26);
        let a = rng.density(4);
        let b = rng.density(4);
        let c = rng.density(4);
        let (zero, _) = weakstar_dist(&a, &a, &fam, 12).unwrap();
        assert_eq!(zero, 0.0);
        let (ab, _) = weakstar_dist(&a, &b, &fam, 12).unwrap();
        let (ba, _) = weakstar_dist(&b, &a, &fam, 12).unwrap();
        assert!((ab - ba).abs() < 1e-15);
        let (ac, _) = weakstar_dist(&a, &c, &fam, 12).unwrap();
        let (cb, _) = weakstar_dist(&c, &b, &fam, 12).unwrap();
        assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn metric_tail_bound() {
        let spec = LatticeSpec::new(vec![2, 2, 2]).unwrap();
        let fam = ObservableFamily::for_lattice(&spec, 20).unwrap();
        let mut rng = Sampler::new(27);
        for _ in 0..20 {
            let a = rng.density(8);
            let b = rng.density(8);
            let (d8, _) = weakstar_dist(&a, &b, &fam, 8).unwrap();
            let (d16, _) = weakstar_dist(&a, &b, &fam, 16).unwrap();
            assert!((d16 - d8).abs() <= 2f64.powi(-8));
        }
    }
}
