use alloc::string::String;
use core::fmt;

/// Errors raised by constructors and checkers.
///
/// `Input` covers malformed data (unknown point ids, partial tables),
/// `Type` covers structural mismatches (non-linear target where vector
/// arithmetic is required), `Domain` covers inadmissible constants
/// (kappa = 0, kappa*ell >= 1), and `Precondition` covers violated
/// hypotheses of a specific statement (Lambda not inside F(xbar), ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    Input(String),
    Type(String),
    Domain(String),
    Precondition(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Type(_) => "type",
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Error::Input(m) | Error::Type(m) | Error::Domain(m) | Error::Precondition(m) => m,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind(), self.message())
    }
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! err_ctor {
    ($name:ident, $variant:ident) => {
        pub fn $name(msg: impl Into<String>) -> Error {
            Error::$variant(msg.into())
        }
    };
}

impl Error {
    err_ctor!(input, Input);
    err_ctor!(type_error, Type);
    err_ctor!(domain, Domain);
    err_ctor!(precondition, Precondition);
}
