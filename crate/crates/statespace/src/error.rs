use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Operand dimensions are incompatible.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// A matrix expected to be Hermitian is not, within tolerance.
    #[error("matrix is not Hermitian: relative asymmetry {0:.3e}")]
    NotHermitian(f64),

    /// The eigensolver exceeded its iteration cap.
    #[error("eigensolver did not converge within the iteration cap")]
    NoConvergence,

    /// A scalar function was evaluated outside its domain.
    #[error("function undefined at eigenvalue {0}")]
    DomainError(f64),

    /// A construction would exceed the configured total-dimension cap.
    #[error("total dimension {dim} exceeds the size cap {cap}")]
    SizeCap { dim: usize, cap: usize },

    /// A site-index set is out of range or contains duplicates.
    #[error("bad site set: {0}")]
    BadSiteSet(String),

    /// Two lattices were expected to have the same number of sites.
    #[error("site count mismatch: {0} vs {1}")]
    SiteCountMismatch(usize, usize),

    /// The element annihilates the state: `ω(A*A)` is numerically zero,
    /// so the action `A·ω` is undefined.
    #[error("element lies in the Gelfand ideal of the state: ω(A*A) = {0:.3e}")]
    GelfandIdeal(f64),

    /// A state does not satisfy the support condition for a corner
    /// restriction.
    #[error("state not supported on the corner: ω(P) = {0}")]
    NotSupported(f64),

    /// Adaptive subdivision exceeded its depth cap.
    #[error("adaptive refinement exhausted (depth cap {0})")]
    RefinementExhausted(u32),

    /// A per-site factorization residual exceeded its hard bound.
    #[error("factorization residual {0:.3e} exceeds the bound {1:.3e}")]
    FactorizationFailure(f64, f64),

    /// A vector expected to be a unit vector is not.
    #[error("vector has norm {0}, expected 1")]
    NotUnit(f64),

    /// A link overlap in a frame bundle is too small to define a phase.
    #[error("singular link overlap {0:.3e} (grid too coarse)")]
    SingularOverlap(f64),

    /// The ground state is degenerate within the gap tolerance.
    #[error("degenerate ground state: gap {0:.3e}")]
    DegenerateGround(f64),

    /// A Hermitian matrix expected to be gapped has an eigenvalue too
    /// close to zero.
    #[error("matrix is not gapped: min |eigenvalue| = {0:.3e}")]
    NotGapped(f64),

    /// Malformed input that does not fit a more specific class.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
