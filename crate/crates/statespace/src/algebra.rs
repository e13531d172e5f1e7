//! Finite truncations of quasi-local algebras.
//!
//! A [`LatticeSpec`] fixes the ordered site dimensions of a truncation
//! `M_{k_0} ⊗ ⋯ ⊗ M_{k_{m-1}}`; site 0 is the leftmost (slowest-varying)
//! Kronecker factor. The module provides the maps a single-site isometry
//! `f: H → K` induces on operators and states at a truncation:
//!
//! * [`embed_local`] places an operator supported on a site subset into
//!   the full algebra by tensoring identities;
//! * [`site_isometry_blowup`] forms `f ⊗ ⋯ ⊗ f`;
//! * [`cp_pullback`] is the unital completely positive map `B ↦ f*Bf`;
//! * [`state_pushforward`] is its predual `ρ ↦ fρf*` on density matrices;
//! * [`eta_interleave`] merges two truncations site by site, realizing
//!   the canonical identification of externally and internally stacked
//!   systems as an index reordering.
//!
//! [`operad_compose`] and the residual checks at the bottom evaluate the
//! composition, associativity, equivariance, and naturality laws these
//! maps satisfy, on concrete finite-dimensional instances.

use crate::config::DEFAULT_DIM_CAP;
use crate::error::{Error, Result};
use crate::linalg::{kron, C64, ComplexMatrix};
use crate::states::DensityMatrix;

/// Ordered list of site dimensions of a finite lattice truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    site_dims: Vec<usize>,
}

impl LatticeSpec {
    /// A truncation with the given site dimensions, each at least 2,
    /// subject to the default total-dimension cap of 2^12.
    pub fn new(site_dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(site_dims, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(site_dims: Vec<usize>, cap: usize) -> Result<Self> {
        if site_dims.is_empty() {
            return Err(Error::InvalidInput("lattice needs at least one site".into()));
        }
        if let Some(&bad) = site_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidInput(format!("site dimension {bad} < 2")));
        }
        let mut total: usize = 1;
        for &d in &site_dims {
            total = total.checked_mul(d).ok_or(Error::SizeCap { dim: usize::MAX, cap })?;
            if total > cap {
                return Err(Error::SizeCap { dim: total, cap });
            }
        }
        Ok(Self { site_dims })
    }

    /// Uniform chain of `n` sites of local dimension `d`.
    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn n_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn dim(&self, site: usize) -> usize {
        self.site_dims[site]
    }

    /// Total Hilbert-space dimension of the truncation.
    pub fn total_dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    /// Row stride of each site in the flattened index.
    pub(crate) fn strides(&self) -> Vec<usize> {
        let n = self.site_dims.len();
        let mut s = vec![1usize; n];
        for v in (0..n.saturating_sub(1)).rev() {
            s[v] = s[v + 1] * self.site_dims[v + 1];
        }
        s
    }

    /// Merge two truncations site by site; site `v` of the result has
    /// dimension `dim1(v)·dim2(v)`.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.n_sites() != other.n_sites() {
            return Err(Error::SiteCountMismatch(self.n_sites(), other.n_sites()));
        }
        let dims = self.site_dims.iter().zip(&other.site_dims).map(|(a, b)| a * b).collect();
        Self::new(dims)
    }
}

/// A linear isometry `f: ℂ^a → ℂ^b`, `b ≥ a`, with `f*f = 1` within
/// `1e-10` in Frobenius norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    matrix: ComplexMatrix,
}

impl Isometry {
    pub const ISOMETRY_TOL: f64 = 1e-10;

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() < matrix.cols() {
            return Err(Error::DimMismatch(format!(
                "isometry must not shrink: {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let gram = matrix.dagger() * matrix.clone();
        let defect = gram.dist(&ComplexMatrix::identity(matrix.cols()));
        if defect > Self::ISOMETRY_TOL {
            return Err(Error::InvalidInput(format!("f*f deviates from identity by {defect:.3e}")));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(n) }
    }

    /// Isometry ℂ^a → ℂ^b including the first `a` coordinates.
    pub fn inclusion(a: usize, b: usize) -> Result<Self> {
        if b < a {
            return Err(Error::DimMismatch(format!("inclusion {a} -> {b}")));
        }
        Ok(Self { matrix: ComplexMatrix::from_fn(b, a, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }) })
    }

    /// The isometry ℂ → ℂ^n sending 1 to a unit vector.
    pub fn from_unit_vector(v: &[C64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnit(norm));
        }
        Ok(Self { matrix: ComplexMatrix::col_vector(v) })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.rows()
    }

    /// The range projector `ff*`.
    pub fn range_projector(&self) -> ComplexMatrix {
        (&self.matrix * &self.matrix.dagger()).hermitize()
    }

    /// Composite `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Result<Isometry> {
        if self.source_dim() != other.target_dim() {
            return Err(Error::DimMismatch(format!(
                "compose: {} -> {} after {} -> {}",
                other.source_dim(),
                other.target_dim(),
                self.source_dim(),
                self.target_dim()
            )));
        }
        Ok(Isometry { matrix: &self.matrix * &other.matrix })
    }

    /// Tensor product of two isometries.
    pub fn tensor(&self, other: &Isometry) -> Isometry {
        Isometry { matrix: kron(&self.matrix, &other.matrix) }
    }
}

/// Embed an operator supported on the sites `sub` into the full
/// truncation, tensoring identities on the remaining sites. The factors
/// of `op` correspond to the entries of `sub` in the given order.
///
/// The embedding is unital and multiplicative.
pub fn embed_local(op: &ComplexMatrix, sub: &[usize], spec: &LatticeSpec) -> Result<ComplexMatrix> {
    let mut seen = vec![false; spec.n_sites()];
    for &s in sub {
        if s >= spec.n_sites() || seen[s] {
            return Err(Error::BadSiteSet(format!("site {s} out of range or duplicate")));
        }
        seen[s] = true;
    }
    let sub_dim: usize = sub.iter().map(|&s| spec.dim(s)).product();
    if !op.is_square() || op.rows() != sub_dim {
        return Err(Error::DimMismatch(format!(
            "embed_local: operator is {}x{}, support dimension is {sub_dim}",
            op.rows(),
            op.cols()
        )));
    }

    let strides = spec.strides();
    let comp: Vec<usize> = (0..spec.n_sites()).filter(|v| !sub.contains(v)).collect();
    let comp_dims: Vec<usize> = comp.iter().map(|&v| spec.dim(v)).collect();
    let sub_dims: Vec<usize> = sub.iter().map(|&v| spec.dim(v)).collect();
    let comp_total: usize = comp_dims.iter().product();

    let unflatten = |mut idx: usize, dims: &[usize]| -> Vec<usize> {
        let mut out = vec![0; dims.len()];
        for v in (0..dims.len()).rev() {
            out[v] = idx % dims[v];
            idx /= dims[v];
        }
        out
    };
    let flat = |multi: &[usize], sites: &[usize]| -> usize {
        multi.iter().zip(sites).map(|(&x, &v)| x * strides[v]).sum()
    };

    let mut out = ComplexMatrix::zeros(spec.total_dim(), spec.total_dim());
    for i in 0..sub_dim {
        let mi = unflatten(i, &sub_dims);
        let base_i = flat(&mi, sub);
        for j in 0..sub_dim {
            let z = op[(i, j)];
            if z == C64::new(0.0, 0.0) {
                continue;
            }
            let mj = unflatten(j, &sub_dims);
            let base_j = flat(&mj, sub);
            for c in 0..comp_total {
                let mc = unflatten(c, &comp_dims);
                let off = flat(&mc, &comp);
                out[(base_i + off, base_j + off)] = z;
            }
        }
    }
    Ok(out)
}

/// The per-site blowup `f ⊗ ⋯ ⊗ f` of a single-site isometry across
/// `n_sites` lattice sites.
pub fn site_isometry_blowup(f: &Isometry, n_sites: usize) -> Result<Isometry> {
    site_isometry_blowup_with_cap(f, n_sites, DEFAULT_DIM_CAP)
}

pub fn site_isometry_blowup_with_cap(f: &Isometry, n_sites: usize, cap: usize) -> Result<Isometry> {
    if n_sites == 0 {
        return Err(Error::InvalidInput("blowup needs at least one site".into()));
    }
    let mut dim: usize = 1;
    for _ in 0..n_sites {
        dim = dim.checked_mul(f.target_dim()).ok_or(Error::SizeCap { dim: usize::MAX, cap })?;
        if dim > cap {
            return Err(Error::SizeCap { dim, cap });
        }
    }
    let mut m = f.matrix().clone();
    for _ in 1..n_sites {
        m = kron(&m, f.matrix());
    }
    Ok(Isometry { matrix: m })
}

/// The unital completely positive pullback `b ↦ f*·b·f` induced by an
/// isometry on operators of its target algebra.
pub fn cp_pullback(f_big: &Isometry, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !b.is_square() || b.rows() != f_big.target_dim() {
        return Err(Error::DimMismatch(format!(
            "cp_pullback: operator is {}x{}, isometry target is {}",
            b.rows(),
            b.cols(),
            f_big.target_dim()
        )));
    }
    Ok(&(&f_big.matrix().dagger() * b) * f_big.matrix())
}

/// Push a state forward along an isometry: `ρ ↦ fρf*`.
///
/// Preserves trace and purity; the image satisfies `result(ff*) = 1`.
pub fn state_pushforward(f_big: &Isometry, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != f_big.source_dim() {
        return Err(Error::DimMismatch(format!(
            "state_pushforward: state dim {}, isometry source {}",
            rho.dim(),
            f_big.source_dim()
        )));
    }
    let pushed = &(f_big.matrix() * rho.matrix()) * &f_big.matrix().dagger();
    DensityMatrix::new_normalized(pushed.hermitize())
}

/// Density matrix of the product state `ω₁ ⊗ ω₂` on the site-merged
/// lattice, with the system-1 index slowest within each merged site.
pub fn eta_interleave(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    spec1: &LatticeSpec,
    spec2: &LatticeSpec,
) -> Result<DensityMatrix> {
    if spec1.n_sites() != spec2.n_sites() {
        return Err(Error::SiteCountMismatch(spec1.n_sites(), spec2.n_sites()));
    }
    if rho1.dim() != spec1.total_dim() || rho2.dim() != spec2.total_dim() {
        return Err(Error::DimMismatch(format!(
            "eta_interleave: states of dim {} and {} on lattices of dim {} and {}",
            rho1.dim(),
            rho2.dim(),
            spec1.total_dim(),
            spec2.total_dim()
        )));
    }
    let merged = spec1.merge(spec2)?;
    let m = interleave_operator(rho1.matrix(), rho2.matrix(), spec1, spec2, &merged);
    DensityMatrix::new_normalized(m)
}

/// Index-reordering realization of the merge: the operator `a ⊗ b` of
/// the doubled system, re-laid-out so each site carries its two factors
/// adjacently.
pub fn interleave_operator(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    spec1: &LatticeSpec,
    spec2: &LatticeSpec,
    merged: &LatticeSpec,
) -> ComplexMatrix {
    let n = spec1.n_sites();
    let d_total = merged.total_dim();
    let strides1 = spec1.strides();
    let strides2 = spec2.strides();
    let merged_dims = merged.site_dims();

    // Split a merged flat index into the two original flat indices.
    let split = |mut idx: usize| -> (usize, usize) {
        let mut i1 = 0;
        let mut i2 = 0;
        for v in (0..n).rev() {
            let x = idx % merged_dims[v];
            idx /= merged_dims[v];
            let a_v = x / spec2.dim(v);
            let b_v = x % spec2.dim(v);
            i1 += a_v * strides1[v];
            i2 += b_v * strides2[v];
        }
        (i1, i2)
    };

    ComplexMatrix::from_fn(d_total, d_total, |i, j| {
        let (i1, i2) = split(i);
        let (j1, j2) = split(j);
        a[(i1, j1)] * b[(i2, j2)]
    })
}

/// Frobenius deviation of the stacking naturality square: pushing the
/// interleaved state along `(f₁⊗f₂)^{⊗ sites}` versus interleaving the
/// separately pushed states.
pub fn naturality_residual(
    f1: &Isometry,
    f2: &Isometry,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    n_sites: usize,
) -> Result<f64> {
    let spec1 = LatticeSpec::new(vec![f1.source_dim(); n_sites])?;
    let spec2 = LatticeSpec::new(vec![f2.source_dim(); n_sites])?;
    let spec1_out = LatticeSpec::new(vec![f1.target_dim(); n_sites])?;
    let spec2_out = LatticeSpec::new(vec![f2.target_dim(); n_sites])?;

    let lhs = {
        let merged_iso = f1.tensor(f2);
        let blown = site_isometry_blowup(&merged_iso, n_sites)?;
        let interleaved = eta_interleave(rho1, rho2, &spec1, &spec2)?;
        state_pushforward(&blown, &interleaved)?
    };
    let rhs = {
        let p1 = state_pushforward(&site_isometry_blowup(f1, n_sites)?, rho1)?;
        let p2 = state_pushforward(&site_isometry_blowup(f2, n_sites)?, rho2)?;
        eta_interleave(&p1, &p2, &spec1_out, &spec2_out)?
    };
    Ok(lhs.matrix().dist(rhs.matrix()))
}

/// Operadic composition `γ(g; f₁,…,f_k) = g ∘ (f₁ ⊗ ⋯ ⊗ f_k)`.
pub fn operad_compose(g: &Isometry, fs: &[Isometry]) -> Result<Isometry> {
    if fs.is_empty() {
        return Err(Error::InvalidInput("operad_compose needs at least one factor".into()));
    }
    let product_target: usize = fs.iter().map(|f| f.target_dim()).product();
    if g.source_dim() != product_target {
        return Err(Error::DimMismatch(format!(
            "operad_compose: g expects {}, factors produce {}",
            g.source_dim(),
            product_target
        )));
    }
    let mut tensor = fs[0].clone();
    for f in &fs[1..] {
        tensor = tensor.tensor(f);
    }
    g.compose(&tensor)
}

/// A permutation of `{0,…,k-1}`, stored as the image list: `σ(i) =
/// perm[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &x in &images {
            if x >= k || seen[x] {
                return Err(Error::InvalidInput(format!("not a permutation: {images:?}")));
            }
            seen[x] = true;
        }
        Ok(Self(images))
    }

    pub fn identity(k: usize) -> Self {
        Self((0..k).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Self(inv)
    }
}

/// The unitary permutation matrix on a tensor product of factors with
/// the given dimensions: basis vectors map as
/// `e_{a_1} ⊗ ⋯ ⊗ e_{a_k} ↦ e_{a_{σ⁻¹(1)}} ⊗ ⋯ ⊗ e_{a_{σ⁻¹(k)}}`,
/// so factor `i` of the input lands in slot `σ(i)` of the output.
pub fn perm_matrix(dims: &[usize], sigma: &Permutation) -> Result<ComplexMatrix> {
    if dims.len() != sigma.len() {
        return Err(Error::DimMismatch(format!(
            "perm_matrix: {} factors, permutation of {}",
            dims.len(),
            sigma.len()
        )));
    }
    let k = dims.len();
    let inv = sigma.inverse();
    let out_dims: Vec<usize> = (0..k).map(|i| dims[inv.apply(i)]).collect();
    let total: usize = dims.iter().product();

    let mut in_strides = vec![1usize; k];
    for v in (0..k.saturating_sub(1)).rev() {
        in_strides[v] = in_strides[v + 1] * dims[v + 1];
    }
    let mut out_strides = vec![1usize; k];
    for v in (0..k.saturating_sub(1)).rev() {
        out_strides[v] = out_strides[v + 1] * out_dims[v + 1];
    }

    let mut m = ComplexMatrix::zeros(total, total);
    for col in 0..total {
        let mut idx = col;
        let mut multi = vec![0usize; k];
        for v in (0..k).rev() {
            multi[v] = idx % dims[v];
            idx /= dims[v];
        }
        let mut row = 0usize;
        for v in 0..k {
            row += multi[inv.apply(v)] * out_strides[v];
        }
        m[(row, col)] = C64::new(1.0, 0.0);
    }
    Ok(m)
}

/// The block permutation `σ(j₁,…,j_k)` of `j = Σ j_i` letters that moves
/// whole blocks the way `σ` moves `k` letters, realized on the tensor
/// product whose `i`-th block has dimension `block_dims[i]`.
pub fn block_perm_matrix(block_dims: &[usize], sigma: &Permutation) -> Result<ComplexMatrix> {
    perm_matrix(block_dims, sigma)
}

/// Frobenius deviation of the first operadic equivariance identity,
/// `γ(gσ; f₁,…,f_k)` versus `γ(g; f_{σ⁻¹(1)},…,f_{σ⁻¹(k)})·σ(j₁,…,j_k)`,
/// on concrete isometries.
pub fn operad_equivariance_residual(g: &Isometry, fs: &[Isometry], sigma: &Permutation) -> Result<f64> {
    if fs.len() != sigma.len() {
        return Err(Error::DimMismatch(format!(
            "equivariance: {} factors, permutation of {}",
            fs.len(),
            sigma.len()
        )));
    }
    let target_dims: Vec<usize> = fs.iter().map(|f| f.target_dim()).collect();
    let source_dims: Vec<usize> = fs.iter().map(|f| f.source_dim()).collect();

    // Left side: g ∘ Π_σ on targets, then the tensor of the f's.
    let perm_targets = perm_matrix(&target_dims, sigma)?;
    let g_sigma = Isometry { matrix: g.matrix() * &perm_targets };
    let lhs = operad_compose(&g_sigma, fs)?;

    // Right side: reorder the factors, then precompose with the block
    // permutation on their sources.
    let inv = sigma.inverse();
    let reordered: Vec<Isometry> = (0..fs.len()).map(|i| fs[inv.apply(i)].clone()).collect();
    let composed = operad_compose(g, &reordered)?;
    let block = block_perm_matrix(&source_dims, sigma)?;
    let rhs = composed.matrix() * &block;

    Ok(lhs.matrix().dist(&rhs))
}

/// Frobenius deviation of the second equivariance identity,
/// `γ(g; f₁τ₁,…,f_kτ_k)` versus `γ(g; f₁,…,f_k)·(τ₁ × ⋯ × τ_k)`, where
/// each `τ_i` permutes the `reps[i]` tensor slots of factor `i`'s source
/// (each slot of dimension `slot_dims[i]`).
pub fn operad_equivariance_residual2(
    g: &Isometry,
    fs: &[Isometry],
    taus: &[Permutation],
    slot_dims: &[usize],
) -> Result<f64> {
    if fs.len() != taus.len() || fs.len() != slot_dims.len() {
        return Err(Error::DimMismatch("equivariance2: mismatched factor lists".into()));
    }
    let mut permuted = Vec::with_capacity(fs.len());
    let mut blocks = Vec::with_capacity(fs.len());
    for ((f, tau), &d) in fs.iter().zip(taus).zip(slot_dims) {
        let dims = vec![d; tau.len()];
        let p = perm_matrix(&dims, tau)?;
        if f.source_dim() != p.rows() {
            return Err(Error::DimMismatch(format!(
                "equivariance2: factor source {} vs permutation dim {}",
                f.source_dim(),
                p.rows()
            )));
        }
        permuted.push(Isometry { matrix: f.matrix() * &p });
        blocks.push(p);
    }
    let lhs = operad_compose(g, &permuted)?;
    let composed = operad_compose(g, fs)?;
    let mut cross = blocks[0].clone();
    for b in &blocks[1..] {
        cross = kron(&cross, b);
    }
    let rhs = composed.matrix() * &cross;
    Ok(lhs.matrix().dist(&rhs))
}

/// The action of an isometry `f: V^{⊗j} → V` on a tuple of states:
/// push the product state forward along `f`.
pub fn theta_action(f: &Isometry, states: &[DensityMatrix]) -> Result<DensityMatrix> {
    if states.is_empty() {
        return Err(Error::InvalidInput("theta_action needs at least one state".into()));
    }
    let mut prod = states[0].matrix().clone();
    for s in &states[1..] {
        prod = kron(&prod, s.matrix());
    }
    let prod_state = DensityMatrix::new_normalized(prod)?;
    state_pushforward(f, &prod_state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli as consts;
    use crate::sampling::Sampler;

    #[test]
    fn embed_on_each_qubit() {
        let spec = LatticeSpec::new(vec![2, 2]).unwrap();
        let z = consts::pauli_z();
        let on0 = embed_local(&z, &[0], &spec).unwrap();
        assert!(on0.approx_eq(&kron(&z, &ComplexMatrix::identity(2)), 0.0));
        let on1 = embed_local(&z, &[1], &spec).unwrap();
        assert!(on1.approx_eq(&kron(&ComplexMatrix::identity(2), &z), 0.0));
    }

    #[test]
    fn embed_is_unital_and_multiplicative() {
        let spec = LatticeSpec::new(vec![2, 3, 2]).unwrap();
        let id = embed_local(&ComplexMatrix::identity(6), &[0, 1], &spec).unwrap();
        assert!(id.approx_eq(&ComplexMatrix::identity(12), 0.0));

        let mut rng = Sampler::new(4);
        let a = rng.matrix(6, 6);
        let b = rng.matrix(6, 6);
        let ea = embed_local(&a, &[1, 2], &spec).unwrap();
        let eb = embed_local(&b, &[1, 2], &spec).unwrap();
        let eab = embed_local(&(&a * &b), &[1, 2], &spec).unwrap();
        assert!((&ea * &eb).approx_eq(&eab, 1e-12));
    }

    #[test]
    fn embed_nonadjacent_swap_matches_permutation_oracle() {
        // SWAP on sites {0,2} of a 3-qubit chain, against the explicit
        // 8x8 index oracle (i0 i1 i2 | j0 j1 j2) ↦ SWAP[(i0 i2),(j0 j2)]·δ_{i1 j1}.
        let spec = LatticeSpec::new(vec![2, 2, 2]).unwrap();
        let mut swap = ComplexMatrix::zeros(4, 4);
        swap[(0, 0)] = C64::new(1.0, 0.0);
        swap[(1, 2)] = C64::new(1.0, 0.0);
        swap[(2, 1)] = C64::new(1.0, 0.0);
        swap[(3, 3)] = C64::new(1.0, 0.0);
        let embedded = embed_local(&swap, &[0, 2], &spec).unwrap();
        let oracle = ComplexMatrix::from_fn(8, 8, |r, c| {
            let (i0, i1, i2) = (r / 4, (r / 2) % 2, r % 2);
            let (j0, j1, j2) = (c / 4, (c / 2) % 2, c % 2);
            if i1 == j1 {
                swap[(i0 * 2 + i2, j0 * 2 + j2)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert!(embedded.approx_eq(&oracle, 0.0));
    }

    #[test]
    fn blowup_cases() {
        let id = Isometry::identity(2);
        assert!(site_isometry_blowup(&id, 3).unwrap().matrix().approx_eq(&ComplexMatrix::identity(8), 0.0));

        let e0 = Isometry::from_unit_vector(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let b = site_isometry_blowup(&e0, 2).unwrap();
        let mut expect = ComplexMatrix::zeros(4, 1);
        expect[(0, 0)] = C64::new(1.0, 0.0);
        assert!(b.matrix().approx_eq(&expect, 0.0));

        let f = Sampler::new(8).isometry(3, 2);
        let blown = site_isometry_blowup(&f, 2).unwrap();
        let gram = blown.matrix().dagger() * blown.matrix().clone();
        assert!(gram.dist(&ComplexMatrix::identity(4)) <= 1e-10);
    }

    #[test]
    fn blowup_respects_cap() {
        let id = Isometry::identity(4);
        assert!(matches!(site_isometry_blowup(&id, 7), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn pullback_cases() {
        let f = Sampler::new(1).isometry(5, 3);
        let id = cp_pullback(&f, &ComplexMatrix::identity(5)).unwrap();
        assert!(id.approx_eq(&ComplexMatrix::identity(3), 1e-12));

        let b = Sampler::new(2).matrix(4, 4);
        let through_id = cp_pullback(&Isometry::identity(4), &b).unwrap();
        assert!(through_id.approx_eq(&b, 0.0));

        // Corner unit E₃₃ pulled through the inclusion ℂ²→ℂ³ vanishes.
        let incl = Isometry::inclusion(2, 3).unwrap();
        let corner = ComplexMatrix::basis_projector(3, 2);
        let pulled = cp_pullback(&incl, &corner).unwrap();
        assert!(pulled.approx_eq(&ComplexMatrix::zeros(2, 2), 0.0));
    }

    #[test]
    fn pushforward_cases() {
        let rho = Sampler::new(3).density(3);
        let same = state_pushforward(&Isometry::identity(3), &rho).unwrap();
        assert!(same.matrix().approx_eq(rho.matrix(), 1e-14));

        let e0 = Isometry::from_unit_vector(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let one = DensityMatrix::new(ComplexMatrix::identity(1)).unwrap();
        let pushed = state_pushforward(&e0, &one).unwrap();
        assert!(pushed.matrix().approx_eq(&ComplexMatrix::basis_projector(2, 0), 1e-14));

        let mut rng = Sampler::new(5);
        let pure = rng.pure_state(2);
        let incl = Isometry::inclusion(2, 3).unwrap();
        let out = state_pushforward(&incl, &pure).unwrap();
        assert!(out.is_pure(1e-9));
        let range = incl.range_projector();
        let expect = out.expectation(&range).re;
        assert!((expect - 1.0).abs() < 1e-10);
    }

    #[test]
    fn interleave_single_site_is_kron() {
        let mut rng = Sampler::new(6);
        let r1 = rng.density(2);
        let r2 = rng.density(3);
        let s1 = LatticeSpec::new(vec![2]).unwrap();
        let s2 = LatticeSpec::new(vec![3]).unwrap();
        let merged = eta_interleave(&r1, &r2, &s1, &s2).unwrap();
        assert!(merged.matrix().approx_eq(&kron(r1.matrix(), r2.matrix()), 1e-14));
    }

    #[test]
    fn interleave_expectation_factorizes() {
        let mut rng = Sampler::new(7);
        let s1 = LatticeSpec::new(vec![2, 2]).unwrap();
        let s2 = LatticeSpec::new(vec![2, 2]).unwrap();
        let r1 = rng.density(4);
        let r2 = rng.density(4);
        let merged_spec = s1.merge(&s2).unwrap();
        let merged = eta_interleave(&r1, &r2, &s1, &s2).unwrap();

        // σ³ on site 0 of system 1 = (σ³ ⊗ I₂) on merged site 0.
        let obs_site = kron(&consts::pauli_z(), &ComplexMatrix::identity(2));
        let obs = embed_local(&obs_site, &[0], &merged_spec).unwrap();
        let lhs = merged.expectation(&obs);
        let rhs = r1.expectation(&embed_local(&consts::pauli_z(), &[0], &s1).unwrap());
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn naturality_square_closes() {
        let mut rng = Sampler::new(9);
        let id2 = Isometry::identity(2);
        let r1 = rng.density(2);
        let r2 = rng.density(2);
        assert!(naturality_residual(&id2, &id2, &r1, &r2, 1).unwrap() < 1e-14);

        let u1 = Isometry::new(rng.unitary(2)).unwrap();
        let u2 = Isometry::new(rng.unitary(3)).unwrap();
        let q2 = rng.density(3);
        assert!(naturality_residual(&u1, &u2, &r1, &q2, 1).unwrap() < 1e-12);

        let f1 = rng.isometry(3, 2);
        let f2 = rng.isometry(3, 2);
        let two_site_r1 = rng.density(4);
        let two_site_r2 = rng.density(4);
        assert!(naturality_residual(&f1, &f2, &two_site_r1, &two_site_r2, 2).unwrap() < 1e-10);
    }

    #[test]
    fn operad_unit_laws() {
        let mut rng = Sampler::new(10);
        let id = Isometry::identity(3);
        let back = operad_compose(&id, &[id.clone()]).unwrap();
        assert!(back.matrix().approx_eq(id.matrix(), 0.0));

        let g = rng.isometry(5, 3);
        let f = rng.isometry(3, 2);
        let gf = operad_compose(&g, std::slice::from_ref(&f)).unwrap();
        assert!(gf.matrix().approx_eq(&(g.matrix() * f.matrix()), 1e-14));
    }

    #[test]
    fn operad_associativity() {
        // γ(γ(c; d₁,d₂); e₁,e₂) = γ(c; γ(d₁;e₁), γ(d₂;e₂)) with one
        // e-tuple per d-slot, both sides evaluated independently.
        let mut rng = Sampler::new(11);
        let e1 = rng.isometry(2, 2);
        let e2 = rng.isometry(3, 2);
        let d1 = rng.isometry(3, 2);
        let d2 = rng.isometry(4, 3);
        let c = rng.isometry(13, 12);

        let lhs = {
            let cd = operad_compose(&c, &[d1.clone(), d2.clone()]).unwrap();
            operad_compose(&cd, &[e1.clone(), e2.clone()]).unwrap()
        };
        let rhs = {
            let f1 = operad_compose(&d1, &[e1]).unwrap();
            let f2 = operad_compose(&d2, &[e2]).unwrap();
            operad_compose(&c, &[f1, f2]).unwrap()
        };
        assert!(lhs.matrix().dist(rhs.matrix()) < 1e-12);
    }

    #[test]
    fn equivariance_identity_permutation_is_exact() {
        let mut rng = Sampler::new(12);
        let f1 = rng.isometry(3, 2);
        let f2 = rng.isometry(2, 2);
        let g = rng.isometry(7, 6);
        let sigma = Permutation::identity(2);
        assert!(operad_equivariance_residual(&g, &[f1, f2], &sigma).unwrap() < 1e-14);
    }

    #[test]
    fn equivariance_swap_and_cycle() {
        let mut rng = Sampler::new(13);
        // Swap with equal-dimension factors.
        let f1 = rng.isometry(3, 2);
        let f2 = rng.isometry(3, 2);
        let g = rng.isometry(10, 9);
        let swap = Permutation::new(vec![1, 0]).unwrap();
        assert!(operad_equivariance_residual(&g, &[f1, f2], &swap).unwrap() < 1e-12);

        // 3-cycle.
        let hs: Vec<Isometry> = (0..3).map(|_| rng.isometry(2, 2)).collect();
        let g3 = rng.isometry(8, 8);
        let cyc = Permutation::new(vec![1, 2, 0]).unwrap();
        assert!(operad_equivariance_residual(&g3, &hs, &cyc).unwrap() < 1e-12);
    }

    #[test]
    fn second_equivariance_identity() {
        let mut rng = Sampler::new(14);
        // Factors whose sources are 2-fold tensor slots of dimension 2.
        let f1 = rng.isometry(4, 4);
        let f2 = rng.isometry(5, 4);
        let g = rng.isometry(20, 20);
        let taus = vec![Permutation::new(vec![1, 0]).unwrap(), Permutation::new(vec![1, 0]).unwrap()];
        let r = operad_equivariance_residual2(&g, &[f1, f2], &taus, &[2, 2]).unwrap();
        assert!(r < 1e-12);
    }

    #[test]
    fn perm_matrix_matches_direct_tensor_action() {
        let dims = [2usize, 3, 2];
        let sigma = Permutation::new(vec![2, 0, 1]).unwrap();
        let p = perm_matrix(&dims, &sigma).unwrap();
        // p (x⊗y⊗z) must equal the tensor with factor i in slot σ(i).
        let mut rng = Sampler::new(15);
        let x = rng.unit_vector(2);
        let y = rng.unit_vector(3);
        let z = rng.unit_vector(2);
        let tensor3 = |a: &[C64], b: &[C64], c: &[C64]| -> Vec<C64> {
            let mut out = Vec::with_capacity(a.len() * b.len() * c.len());
            for &ai in a {
                for &bi in b {
                    for &ci in c {
                        out.push(ai * bi * ci);
                    }
                }
            }
            out
        };
        let input = tensor3(&x, &y, &z);
        let moved = p.mul_vec(&input);
        // σ = (0→2, 1→0, 2→1): output slots are (y, z, x).
        let expect = tensor3(&y, &z, &x);
        let err: f64 = moved.iter().zip(&expect).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-14);
    }
}
