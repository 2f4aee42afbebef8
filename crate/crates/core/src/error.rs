use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("specialization sends a denominator to zero")]
    SpecializationCollapsesDenominator,
    #[error("monomial {0} has no image with integral half-exponents")]
    NotRepresentable(String),
    #[error("evaluation at a pole {0}")]
    EvaluationAtPole(String),
    #[error("{0} is not a pole")]
    NotAPole(String),
    #[error("pole {0} is not simple")]
    PoleNotSimple(String),
    #[error("boxes {0} and {1} are not comparable")]
    IncomparableBoxes(String, String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid prohibited box: {0}")]
    InvalidProhibitedBox(String),
    #[error("slope must be at least 1, got {0}")]
    InvalidSlope(i64),
    #[error("window needs bound {needed} but only {bound} was allowed")]
    WindowTooLargeForBound { needed: usize, bound: usize },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("unknown character kind `{0}`")]
    UnknownKind(String),
    #[error("tower constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("substitution makes a denominator vanish")]
    SubstitutionSingular,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
}
