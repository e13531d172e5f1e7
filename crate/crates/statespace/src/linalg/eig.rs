//! Hermitian eigendecomposition and functional calculus.
//!
//! Two self-contained solver paths share the same contract:
//!
//! * [`herm_eig_jacobi`] — cyclic complex Jacobi rotations, off-diagonal
//!   Frobenius convergence below `1e-13·‖A‖_F`, capped at 100 sweeps.
//! * [`herm_eig_tridiagonal`] — Householder reduction to a real symmetric
//!   tridiagonal followed by implicit-shift QL with eigenvector
//!   accumulation. Much faster for the larger spin-chain dimensions.
//!
//! [`herm_eig`] dispatches between them by dimension. Both are
//! deterministic: identical input bits give identical output bits.
//! Eigenvalues come back ascending; within degenerate clusters (gap below
//! `1e-10`) the eigenvectors are re-orthonormalized by ordered
//! Gram-Schmidt so the basis choice is reproducible.

use num_complex::Complex64;
use num_traits::Zero;

use super::matrix::{inner, require_square, C64, ComplexMatrix};
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance accepted by the solvers.
pub(crate) const TAU_HERM: f64 = 1e-9;
/// Off-diagonal convergence factor for the Jacobi sweep.
const JACOBI_OFF_FACTOR: f64 = 1e-13;
/// Sweep cap for the Jacobi path.
const JACOBI_MAX_SWEEPS: usize = 100;
/// Per-eigenvalue iteration cap for the QL path.
const QL_MAX_ITER: usize = 50;
/// Dimensions up to this use the Jacobi path by default.
const JACOBI_DIM_LIMIT: usize = 32;
/// Eigenvalue gap below which two eigenvalues count as one cluster.
const CLUSTER_GAP: f64 = 1e-10;

/// Result of a Hermitian eigendecomposition: `A = V·diag(values)·V*`.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the corresponding eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    /// Rebuild `V·diag(values)·V*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        scaled * self.vectors.dagger()
    }

    /// Column `j` as an owned vector.
    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.vectors.col(j)
    }

    /// ‖A − VΛV*‖_F / ‖A‖_F (with the convention 0/0 = 0).
    pub fn residual(&self, a: &ComplexMatrix) -> f64 {
        let norm = a.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.reconstruct().dist(a) / norm
    }
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    require_square(a, "herm_eig")?;
    let defect = a.hermiticity_defect();
    if defect > TAU_HERM {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Dispatches to the Jacobi path for dimensions up to 32 and the
/// tridiagonal path above that. Fails with [`Error::NotHermitian`] when
/// `‖A − A*‖_F > 1e-9·‖A‖_F` and with [`Error::NoConvergence`] if an
/// iteration cap is hit.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermitianEig> {
    check_hermitian(a)?;
    let h = a.hermitize();
    let eig = if a.rows() <= JACOBI_DIM_LIMIT { jacobi(&h)? } else { tridiagonal_ql(&h)? };
    Ok(finalize(eig))
}

/// The cyclic Jacobi path, regardless of dimension.
pub fn herm_eig_jacobi(a: &ComplexMatrix) -> Result<HermitianEig> {
    check_hermitian(a)?;
    Ok(finalize(jacobi(&a.hermitize())?))
}

/// The Householder + implicit-shift QL path, regardless of dimension.
pub fn herm_eig_tridiagonal(a: &ComplexMatrix) -> Result<HermitianEig> {
    check_hermitian(a)?;
    Ok(finalize(tridiagonal_ql(&a.hermitize())?))
}

/// Sort ascending and make degenerate clusters reproducible.
fn finalize(mut eig: HermitianEig) -> HermitianEig {
    let n = eig.values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.values[i].partial_cmp(&eig.values[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.values[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.vectors[(i, order[j])]);
    eig = HermitianEig { values, vectors };
    gram_schmidt_clusters(&mut eig);
    eig
}

/// Ordered Gram-Schmidt inside each near-degenerate cluster.
fn gram_schmidt_clusters(eig: &mut HermitianEig) {
    let n = eig.values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eig.values[end] - eig.values[end - 1]).abs() < CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 {
            let mut cols: Vec<Vec<C64>> = (start..end).map(|j| eig.vectors.col(j)).collect();
            for j in 0..cols.len() {
                for k in 0..j {
                    let proj = inner(&cols[k], &cols[j]);
                    let prev = cols[k].clone();
                    for (c, p) in cols[j].iter_mut().zip(&prev) {
                        *c -= proj * p;
                    }
                }
                let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for c in cols[j].iter_mut() {
                        *c /= norm;
                    }
                }
            }
            for (offset, col) in cols.into_iter().enumerate() {
                for (i, z) in col.into_iter().enumerate() {
                    eig.vectors[(i, start + offset)] = z;
                }
            }
        }
        start = end;
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(a: &ComplexMatrix) -> Result<HermitianEig> {
    let n = a.rows();
    if n == 0 {
        return Err(Error::DimMismatch("herm_eig: empty matrix".into()));
    }
    let threshold = JACOBI_OFF_FACTOR * a.frobenius_norm();
    let mut m = a.clone();
    let mut v = ComplexMatrix::identity(n);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&m) <= threshold || n == 1 {
            return Ok(HermitianEig { values: (0..n).map(|i| m[(i, i)].re).collect(), vectors: v });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let g = m[(p, q)];
                let gn = g.norm();
                if gn == 0.0 {
                    continue;
                }
                let phase = g / gn;
                let alpha = m[(p, p)].re;
                let beta = m[(q, q)].re;
                // Smaller-angle rotation zeroing the (p,q) entry.
                let zeta = (beta - alpha) / (2.0 * gn);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Rows/columns p and q of m; Hermiticity is maintained.
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    let new_kp = mkp * c - mkq * s * phase.conj();
                    let new_kq = mkp * s * phase + mkq * c;
                    m[(k, p)] = new_kp;
                    m[(p, k)] = new_kp.conj();
                    m[(k, q)] = new_kq;
                    m[(q, k)] = new_kq.conj();
                }
                let app = c * c * alpha - 2.0 * c * s * gn + s * s * beta;
                let aqq = s * s * alpha + 2.0 * c * s * gn + c * c * beta;
                m[(p, p)] = Complex64::new(app, 0.0);
                m[(q, q)] = Complex64::new(aqq, 0.0);
                m[(p, q)] = Complex64::zero();
                m[(q, p)] = Complex64::zero();

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s * phase.conj();
                    v[(k, q)] = vkp * s * phase + vkq * c;
                }
            }
        }
    }
    if off_diagonal_norm(&m) <= threshold {
        return Ok(HermitianEig { values: (0..n).map(|i| m[(i, i)].re).collect(), vectors: v });
    }
    Err(Error::NoConvergence)
}

/// Householder reduction of a Hermitian matrix to a real symmetric
/// tridiagonal, followed by implicit-shift QL iteration.
fn tridiagonal_ql(a: &ComplexMatrix) -> Result<HermitianEig> {
    let n = a.rows();
    if n == 0 {
        return Err(Error::DimMismatch("herm_eig: empty matrix".into()));
    }
    if n == 1 {
        return Ok(HermitianEig { values: vec![a[(0, 0)].re], vectors: ComplexMatrix::identity(1) });
    }

    let mut m = a.clone();
    let mut q = ComplexMatrix::identity(n);

    // Reduce column k below the subdiagonal with a Householder reflector
    // H = I - tau v v*, applied as a similarity on the trailing block.
    for k in 0..n - 2 {
        let len = n - k - 1;
        let mut x: Vec<C64> = (0..len).map(|i| m[(k + 1 + i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        x[0] -= alpha;
        let vnorm_sq: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sq;
        let v = x;

        // p = tau * B v on the trailing block B = m[k+1.., k+1..].
        let mut p = vec![C64::zero(); len];
        for i in 0..len {
            let mut acc = C64::zero();
            for j in 0..len {
                acc += m[(k + 1 + i, k + 1 + j)] * v[j];
            }
            p[i] = acc * tau;
        }
        let vp = inner(&v, &p);
        let kappa = vp * (tau / 2.0);
        let w: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        // B <- B - w v* - v w*
        for i in 0..len {
            for j in 0..len {
                let delta = w[i] * v[j].conj() + v[i] * w[j].conj();
                m[(k + 1 + i, k + 1 + j)] -= delta;
            }
        }
        m[(k + 1, k)] = alpha;
        m[(k, k + 1)] = alpha.conj();
        for i in 1..len {
            m[(k + 1 + i, k)] = C64::zero();
            m[(k, k + 1 + i)] = C64::zero();
        }
        // Q <- Q H, touching columns k+1.. only.
        for r in 0..n {
            let mut acc = C64::zero();
            for j in 0..len {
                acc += q[(r, k + 1 + j)] * v[j];
            }
            acc *= tau;
            for j in 0..len {
                let adj = acc * v[j].conj();
                q[(r, k + 1 + j)] -= adj;
            }
        }
    }

    // Rotate the complex subdiagonal onto the nonnegative real axis.
    let mut d: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    let mut e: Vec<f64> = vec![0.0; n];
    let mut phase = C64::new(1.0, 0.0);
    let mut phases = vec![C64::new(1.0, 0.0); n];
    for i in 0..n - 1 {
        let sub = m[(i + 1, i)];
        let sub_norm = sub.norm();
        if sub_norm > 0.0 {
            phase *= sub / sub_norm;
        }
        e[i] = sub_norm;
        phases[i + 1] = phase;
    }
    for j in 1..n {
        if phases[j] != C64::new(1.0, 0.0) {
            for r in 0..n {
                q[(r, j)] = q[(r, j)] * phases[j];
            }
        }
    }

    ql_implicit(&mut d, &mut e, &mut q)?;
    Ok(HermitianEig { values: d, vectors: q })
}

/// Implicit-shift QL on a real symmetric tridiagonal (d = diagonal,
/// e = subdiagonal with e[n-1] unused), rotations accumulated into the
/// columns of `z`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], z: &mut ComplexMatrix) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    // Shift the subdiagonal to the EISPACK layout e[1..n-1] -> e[0..n-2].
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut msplit = l;
            while msplit < n - 1 {
                let dd = d[msplit].abs() + d[msplit + 1].abs();
                if e[msplit].abs() <= f64::EPSILON * dd {
                    break;
                }
                msplit += 1;
            }
            if msplit == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[msplit] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = msplit;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[msplit] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..z.rows() {
                    f = z[(k, i + 1)].re;
                    let fi = z[(k, i + 1)].im;
                    let zre = z[(k, i)].re;
                    let zim = z[(k, i)].im;
                    z[(k, i + 1)] = C64::new(s * zre + c * f, s * zim + c * fi);
                    z[(k, i)] = C64::new(c * zre - s * f, c * zim - s * fi);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[msplit] = 0.0;
        }
    }
    Ok(())
}

/// Apply a real scalar function to a Hermitian matrix through its
/// spectrum: `V·diag(f(λ_i))·V*`.
///
/// Fails with [`Error::DomainError`] when `f` returns a non-finite value
/// at some eigenvalue.
pub fn matfun(a: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    matfun_complex(a, |x| C64::new(f(x), 0.0))
}

/// Functional calculus with a complex-valued scalar function.
pub fn matfun_complex(a: &ComplexMatrix, f: impl Fn(f64) -> C64) -> Result<ComplexMatrix> {
    let eig = herm_eig(a)?;
    let n = eig.values.len();
    let mut fvals = Vec::with_capacity(n);
    for &lam in &eig.values {
        let y = f(lam);
        if !y.re.is_finite() || !y.im.is_finite() {
            return Err(Error::DomainError(lam));
        }
        fvals.push(y);
    }
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| eig.vectors[(i, j)] * fvals[j]);
    Ok(scaled * eig.vectors.dagger())
}

/// The unitary `e^{iA}` of a Hermitian generator `A`.
pub fn exp_i_herm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    matfun_complex(a, |x| C64::new(x.cos(), x.sin()))
}
