use thiserror::Error;

use crate::act::Side;

/// Everything that can go wrong while building or combining finite
/// algebraic objects. Variants name a concrete witness where one exists.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed table: {0}")]
    MalformedTable(String),
    #[error("entry {value} at ({row}, {col}) is out of range 0..{bound}")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        value: usize,
        bound: usize,
    },
    #[error("associativity fails: ({0}*{1})*{2} != {0}*({1}*{2})")]
    AssociativityViolation(usize, usize, usize),
    #[error("identity law fails at element {0}")]
    IdentityViolation(usize),
    #[error("unit law fails at element {0}")]
    UnitLawViolation(usize),
    #[error("action is not compatible with the monoid at element {elem} for ({s}, {t})")]
    ActionViolation { elem: usize, s: usize, t: usize },
    #[error("empty act not allowed here")]
    EmptyNotAllowed,
    #[error("generator {0} is out of range")]
    GeneratorOutOfRange(usize),
    #[error("pair ({0}, {1}) is out of range")]
    PairOutOfRange(usize, usize),
    #[error("subact does not fit its act: {0}")]
    SubactMismatch(String),
    #[error("relation is not compatible with the action: {a} ~ {b} but not after acting by {s}")]
    IncompatibleCongruence { a: usize, b: usize, s: usize },
    #[error("objects live over different monoids")]
    MixedMonoids,
    #[error("expected a {expected:?} act, found a {found:?} act")]
    SideMismatch { expected: Side, found: Side },
    #[error("predicate is undefined on the empty act")]
    EmptyAct,
    #[error("map is not equivariant at element {elem} acted on by {s}")]
    NotEquivariant { elem: usize, s: usize },
    #[error("map has length {len} but domain has {expected} elements")]
    MapLength { len: usize, expected: usize },
    #[error("map sends {elem} to {value}, outside the codomain of size {bound}")]
    MapOutOfRange {
        elem: usize,
        value: usize,
        bound: usize,
    },
    #[error("morphisms do not compose: codomain and domain differ")]
    NotComposable,
    #[error("morphism is not a monomorphism")]
    NotMono,
    #[error("morphism has an empty domain")]
    EmptyDomain,
    #[error("pushout apex is empty, which the strict convention forbids")]
    EmptyApexInActS,
    #[error("span legs do not share a domain")]
    SpanMismatch,
    #[error("chain breaks at position {0}")]
    ChainMismatch(usize),
    #[error("morphism is not an inclusion of a subact")]
    NotInclusion,
    #[error("subacts do not form a tower: {0}")]
    TowerMismatch(String),
    #[error("morphism is not in class {0}")]
    NotInClass(String),
    #[error("bound exhausted: {0}")]
    BoundExhausted(String),
    #[error("invalid class specification: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
