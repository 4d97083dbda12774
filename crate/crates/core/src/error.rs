use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("constant term vanishes, series is not a unit")]
    ZeroConstantTerm,
    #[error("truncation order {have} is below the required {need}")]
    TruncationTooLow { have: u32, need: u32 },
    #[error("time germ has nonzero constant term {0}")]
    NonvanishingTimeGerm(f64),
    #[error("p and q must be positive and coprime, got ({p}, {q})")]
    BadResonance { p: u32, q: u32 },
    #[error("term with negative power of y cannot be stored in a power series")]
    LaurentTerm,
    #[error("linear part is not a p:q resonant saddle: {0}")]
    NotResonantSaddle(String),
    #[error("no resonant term up to the truncation order")]
    ResonantOrderExceedsTruncation,
    #[error("right-hand side contains the obstructed monomial u^{0}")]
    ObstructedMonomial(u32),
    #[error("u = 0 has no sector")]
    ZeroInput,
    #[error("point lies outside the requested sector")]
    OutOfSector,
    #[error("contour offset must lie in (0, {max}), got {delta}")]
    BadOffset { delta: f64, max: f64 },
    #[error("leaf-space image does not fit the necklace disks")]
    NotAdapted,
    #[error("evaluation point lies on an integration contour")]
    EvalOnContour,
    #[error("quadrature did not converge (estimate {0:e})")]
    QuadratureNotConverged(f64),
    #[error("grid leaves the unit ball (norm {0})")]
    NotInUnitBall(f64),
    #[error("no admissible twist after {0} doublings")]
    TwistSearchFailed(u32),
    #[error("fixed point did not converge, last increment {0:e}")]
    NoConvergence(f64),
    #[error("sectorial normal forms disagree by {0:e}")]
    GluingResidualTooLarge(f64),
    #[error("polynomial fit residual {0:e} too large")]
    DegreeFitResidualTooLarge(f64),
    #[error("only k = 1 and p = q = 1 are supported numerically")]
    UnsupportedOrder,
    #[error("trajectory left the sector at t = {0}")]
    LeftSector(f64),
    #[error("integrand contains the obstructed monomial u^{0}")]
    ObstructedIntegrand(u32),
    #[error("tail did not settle, estimate {0:e}")]
    TailNotConverged(f64),
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("path exponent {alpha} must lie in (0, {max})")]
    BadPathExponent { alpha: f64, max: f64 },
    #[error("target value h = {0} is not attained")]
    HNotAttained(String),
}

pub type Result<T> = std::result::Result<T, Error>;
