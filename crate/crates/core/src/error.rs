use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature on [{a}, {b}] did not reach tolerance {tol} (estimate {err})")]
    NoConvergence { a: f64, b: f64, err: f64, tol: f64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate rule for state {state}, symbol {symbol}")]
    DuplicateRule { line: usize, state: u32, symbol: u8 },
    #[error("missing rule for state {state}, symbol {symbol}")]
    MissingRule { state: u32, symbol: u8 },
    #[error("missing header field `{0}`")]
    MissingHeader(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("invalid machine: {0}")]
    Machine(String),
    #[error("input tape does not fit the bounds [{lo}, {hi}]")]
    TapeOutOfBounds { lo: i64, hi: i64 },
    #[error("parameter {u} is beyond the stored curve anchors (height budget {budget})")]
    BudgetExhausted { u: f64, budget: usize },
    #[error("point ({x}, {y}) is not within 1/16 of curve {band}")]
    OutsideChart { band: usize, x: f64, y: f64 },
    #[error("band {0} was not compiled")]
    UnknownBand(usize),
    #[error("confinement violated in band {band} at height parameter {u}: |rho| reached 1/16")]
    ConfinementViolation { band: usize, u: f64 },
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
