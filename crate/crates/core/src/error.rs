//! Error types shared by every module of the crate.

use thiserror::Error;

use crate::geom::StripPoint;

/// Crate-wide error enum. Variants carry enough context to act as witnesses
/// in reports (which sample failed, which brick, which cycle).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("displacement field vanishes near ({0:?}); a fixed point lies on or near the curve")]
    FieldVanishes(StripPoint),

    #[error("refinement budget exhausted ({0})")]
    NoConvergence(String),

    #[error("point or region touches the line within snap tolerance")]
    TouchesLine,

    #[error("boundaries overlap along a segment within tolerance")]
    DegenerateContact,

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("bad fixture parameters: {0}")]
    BadParams(String),

    #[error("sector word with odd elliptic/hyperbolic imbalance is not realizable as a simple flow")]
    OddImbalance,

    #[error("refinement budget exceeded for brick {0}; map displacement too small within budget")]
    RefinementBudgetExceeded(u32),

    #[error("transition digraph has a zero-shift cycle through bricks {0:?}")]
    AcyclicityViolation(Vec<u32>),

    #[error("adjacent bricks {0} and {1} meet each other's images both ways")]
    AdjacencyBothWays(u32, u32),

    #[error("attractor boundary component exits the lift window before closing")]
    TruncationAmbiguous,

    #[error("no north-south Brouwer line found in window; census: {0}")]
    NotFoundInWindow(String),

    #[error("the two lines traverse each other")]
    LinesTraverse,

    #[error("transversal ladder construction failed: {0}")]
    LadderFailure(String),

    #[error("winding residual {0} is too close to the rounding boundary")]
    RoundingAmbiguous(f64),

    #[error("arc is not free: it meets its own image")]
    ArcNotFree,

    #[error("middle line does not separate the outer lines")]
    SeparationFails,

    #[error("counter-current hypotheses unmet: a brick chain exists and the partial index is zero")]
    HypothesisUnmet,

    #[error("no free crossing arc found in crescent")]
    NoFreeCrossingArc,

    #[error("certificate failed: {0}")]
    CertificationFails(String),

    #[error("crescent census shortfall: {0}")]
    CountShortfall(String),

    #[error("iteration depth insufficient: {0}")]
    DepthInsufficient(String),

    #[error("lift index disagrees between base points: {0:?}")]
    BasePointDisagreement(Vec<i64>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
