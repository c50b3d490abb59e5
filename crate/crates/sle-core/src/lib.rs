//! Numerics for backward Loewner chains, SLE traces, boundary Bessel dynamics,
//! excursion decomposition and trace geometry.

pub mod bessel;
pub mod driver;
pub mod excursion;
pub mod geometry;
pub mod io;
pub mod loewner;
pub mod stats;

pub use num_complex::Complex64;

/// Numerical tolerance below which a nonnegative path value counts as zero.
pub const TOL_NUM: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid time grid: t_end={t_end}, n_steps={n_steps}")]
    InvalidGrid { t_end: f64, n_steps: usize },
    #[error("time {t} is not aligned to the grid (dt={dt})")]
    OffGrid { t: f64, dt: f64 },
    #[error("time {t} is out of range [0, {t_end}]")]
    OutOfRange { t: f64, t_end: f64 },
    #[error("step index {k} exceeds chain length {n}")]
    StepOutOfRange { k: usize, n: usize },
    #[error("kappa must be positive, got {0}")]
    InvalidKappa(f64),
    #[error("Bessel dimension {0} outside the required range")]
    InvalidDimension(f64),
    #[error("initial point x0={0} is not allowed here")]
    InvalidStart(f64),
    #[error("forward map hits the singularity immediately (z equals the driver value)")]
    ImmediateSingularity,
    #[error("point {0} lies on the branch cut [0, inf)")]
    OnBranchCut(Complex64),
    #[error("negative input {name}={value} rejected")]
    NegativeInput { name: &'static str, value: f64 },
    #[error("{name}={value} must be positive")]
    NonPositive { name: &'static str, value: f64 },
    #[error("path must be nonnegative for this operation")]
    NotNonNegative,
    #[error("need at least {min} trials/samples, got {got}")]
    Underpowered { min: usize, got: usize },
    #[error("degenerate loop: fewer than 3 distinct points")]
    DegenerateLoop,
    #[error("contact gap {gap} exceeds tolerance {tol}")]
    ContactTooWide { gap: f64, tol: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
