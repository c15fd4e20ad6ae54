use thiserror::Error;

/// Library-wide error type. Display renders as `name: detail` on one line,
/// where `name` is the snake_case identifier of the violated invariant.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("arity_mismatch: expected {expected} entries, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("residue_collision: entries {a} and {b} agree mod {n}")]
    ResidueCollision { a: i64, b: i64, n: usize },
    #[error("rank_mismatch: {0}")]
    RankMismatch(String),
    #[error("letter_out_of_range: {0}")]
    LetterOutOfRange(String),
    #[error("length_guard_exceeded: {0}")]
    LengthGuardExceeded(String),
    #[error("guard_exceeded: {0}")]
    GuardExceeded(String),
    #[error("index_outside_window: {0}")]
    IndexOutsideWindow(String),
    #[error("window_too_small: {0}")]
    WindowTooSmall(String),
    #[error("incompatible_windows: {0}")]
    IncompatibleWindows(String),
    #[error("field_mismatch: {0}")]
    FieldMismatch(String),
    #[error("shape_mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not_nilpotent: {0}")]
    NotNilpotent(String),
    #[error("negative_multiplicity: {0}")]
    NegativeMultiplicity(String),
    #[error("inconsistent_table: {0}")]
    InconsistentTable(String),
    #[error("parameter_out_of_range: {0}")]
    ParameterOutOfRange(String),
    #[error("not_a_complex: {0}")]
    NotAComplex(String),
    #[error("word_not_reduced: {0}")]
    WordNotReduced(String),
    #[error("constraint_violation: {0}")]
    ConstraintViolation(String),
    #[error("fiber_dimension: {0}")]
    FiberDimension(String),
    #[error("composition_invalid: {0}")]
    CompositionInvalid(String),
    #[error("bad_input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
