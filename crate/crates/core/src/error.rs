use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("signature mismatch between the two structures")]
    SignatureMismatch,
    #[error("element id out of range: {element} is not below universe size {size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("universe must be nonempty")]
    EmptyUniverse,
    #[error("relation `{0}` has arity 0; nullary relations are not supported")]
    ZeroArity(String),
    #[error("duplicate relation declaration `{0}`")]
    DuplicateRelation(String),
    #[error("expected {expected} tables, found {found}")]
    TableCount { expected: usize, found: usize },
    #[error("arity mismatch in `{relation}`: expected {expected} entries, found {found}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("cannot take the substructure on an empty element set")]
    EmptySubset,
    #[error("unbound free variable x{0}")]
    UnboundVariable(u32),
    #[error("relation `{0}` is not in the structure's signature")]
    UnknownRelation(String),
    #[error("the position is terminal")]
    TerminalPosition,
    #[error("illegal move: {0}")]
    IllegalMove(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("arity mismatch in `{relation}`: expected {expected} entries, found {found}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("element id out of range: {element} is not below universe size {size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("duplicate relation declaration `{0}`")]
    DuplicateRelation(String),
    #[error("relation `{0}` has arity 0; nullary relations are not supported")]
    ZeroArity(String),
    #[error("empty universe")]
    EmptyUniverse,
}
