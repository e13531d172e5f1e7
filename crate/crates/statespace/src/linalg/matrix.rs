use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense rectangular complex matrix, row-major.
///
/// Low-level arithmetic (`+`, `-`, `*`, [`ComplexMatrix::dagger`], …)
/// asserts on shape mismatches; operations with domain-level contracts
/// return [`Result`] instead.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Build from row-major data. Panics if `data.len() != rows * cols`
    /// or any entry is non-finite.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        assert!(
            data.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "matrix entries must be finite"
        );
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    /// Real matrix entries promoted to complex.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        Self::from_vec(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let d: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&d)
    }

    /// Column vector from a slice.
    pub fn col_vector(v: &[C64]) -> Self {
        Self::from_vec(v.len(), 1, v.to_vec())
    }

    /// Rank-one projector |v><v| of a unit vector.
    pub fn projector(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    /// The projector onto the first standard basis vector, as a density
    /// matrix of the pure reference state in dimension `n`.
    pub fn basis_projector(n: usize, k: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(k, k)] = C64::new(1.0, 0.0);
        m
    }

    /// diag(1,…,1,0,…,0) with `zeros` trailing zeros.
    pub fn leading_projector(n: usize, zeros: usize) -> Self {
        assert!(zeros <= n);
        let mut m = Self::zeros(n, n);
        for i in 0..n - zeros {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&w| w * z).collect() }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(C64::new(x, 0.0))
    }

    /// Trace, summed in index order so identical inputs give identical
    /// output bits.
    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        let mut t = C64::zero();
        for i in 0..self.rows {
            t += self[(i, i)];
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn dist(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Relative deviation from Hermitian symmetry, ‖A − A*‖_F / ‖A‖_F.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                s += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt() / norm
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol
    }

    /// The Hermitian part (A + A*)/2.
    pub fn hermitize(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = C64::zero();
                for j in 0..self.cols {
                    acc += self[(i, j)] * v[j];
                }
                acc
            })
            .collect()
    }

    /// <x, A y> with the inner product conjugate-linear in `x`.
    pub fn sandwich(&self, x: &[C64], y: &[C64]) -> C64 {
        let ay = self.mul_vec(y);
        inner(x, &ay)
    }

    /// tr(self · other), summed in row-major order of `self`.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut t = C64::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                t += self[(i, j)] * other[(j, i)];
            }
        }
        t
    }

    /// ‖A‖, the largest singular value. Computed from the spectrum of
    /// A*A, so it costs an eigendecomposition.
    pub fn operator_norm(&self) -> f64 {
        let gram = if self.rows >= self.cols { self.dagger() * self.clone() } else { self.clone() * self.dagger() };
        let eig = super::eig::herm_eig(&gram.hermitize()).expect("Gram matrix is Hermitian");
        eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols) && self.dist(other) <= tol
    }
}

pub(crate) fn inner(x: &[C64], y: &[C64]) -> C64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).fold(C64::zero(), |s, z| s + z)
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Naive i-k-j matrix product; adequate at the dimensions this crate
    /// targets (≤ 4096).
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let lhs_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in lhs_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self + &rhs
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self - &rhs
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f, "{}", if self.cols > 8 { "…" } else { "" })?;
        }
        if self.rows > 8 {
            writeln!(f, "  …")?;
        }
        write!(f, "]")
    }
}

/// Kronecker product a ⊗ b. The left factor varies slowest, so site 0 of
/// a lattice truncation is the leftmost tensor factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let z = a[(i, j)];
            if z.is_zero() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = z * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    assert!(!factors.is_empty());
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = kron(&acc, f);
    }
    acc
}

/// Check a square precondition shared by several operations.
pub(crate) fn require_square(a: &ComplexMatrix, what: &str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::DimMismatch(format!("{what}: expected square, got {}x{}", a.rows(), a.cols())))
    }
}

/// The Pauli matrices.
pub mod consts {
    use super::{C64, ComplexMatrix};

    pub fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_vec(
            2,
            2,
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        )
    }

    pub fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::from_vec(
            2,
            2,
            vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        )
    }

    pub fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0])
    }
}
