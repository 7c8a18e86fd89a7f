//! Non-negative extended reals with the degenerate-case conventions
//! used throughout the checkers: the infimum of an empty set is
//! infinity, the supremum of an empty set is zero, and 0 * inf = 1.

use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Add;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rat::{format_rat, parse_rat, Rat};

/// A non-negative exact rational or infinity.
///
/// `Finite` values are never negative; `Inf` compares strictly greater
/// than every finite value. Addition is closed: `x + Inf = Inf`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtReal {
    Finite(Rat),
    Inf,
}

impl ExtReal {
    pub fn zero() -> Self {
        ExtReal::Finite(Rat::zero())
    }

    pub fn one() -> Self {
        ExtReal::Finite(crate::rat::rint(1))
    }

    /// Wraps a rational, rejecting negative values.
    pub fn from_rat(r: Rat) -> Result<Self> {
        if r < Rat::zero() {
            return Err(Error::input(alloc::format!(
                "extended real must be non-negative, got {}",
                format_rat(&r)
            )));
        }
        Ok(ExtReal::Finite(r))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, ExtReal::Inf)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtReal::Finite(r) if r.is_zero())
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            ExtReal::Finite(r) => Some(r),
            ExtReal::Inf => None,
        }
    }

    /// Parses `"inf"` or a rational string.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(ExtReal::Inf);
        }
        ExtReal::from_rat(parse_rat(t)?)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(r) => write!(f, "{}", format_rat(r)),
            ExtReal::Inf => write!(f, "inf"),
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Inf, ExtReal::Inf) => Ordering::Equal,
            (ExtReal::Inf, ExtReal::Finite(_)) => Ordering::Greater,
            (ExtReal::Finite(_), ExtReal::Inf) => Ordering::Less,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Inf,
        }
    }
}

impl<'a> Add<&'a ExtReal> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: &'a ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Inf,
        }
    }
}

impl From<Rat> for ExtReal {
    /// Panics on negative input; use `from_rat` for fallible conversion.
    fn from(r: Rat) -> Self {
        ExtReal::from_rat(r).expect("negative rational")
    }
}

/// Minimum of a finite list; infinity when the list is empty.
pub fn inf_over<I: IntoIterator<Item = ExtReal>>(values: I) -> ExtReal {
    values.into_iter().min().unwrap_or(ExtReal::Inf)
}

/// Maximum of a finite list; zero when the list is empty.
pub fn sup_over<I: IntoIterator<Item = ExtReal>>(values: I) -> ExtReal {
    values.into_iter().max().unwrap_or_else(ExtReal::zero)
}

/// Product with the conventions 0 * inf = 1 and c * inf = inf for c > 0.
pub fn scale(c: &ExtReal, x: &ExtReal) -> ExtReal {
    match (c, x) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a * b),
        (ExtReal::Finite(a), ExtReal::Inf) | (ExtReal::Inf, ExtReal::Finite(a)) => {
            if a.is_zero() {
                ExtReal::one()
            } else {
                ExtReal::Inf
            }
        }
        (ExtReal::Inf, ExtReal::Inf) => ExtReal::Inf,
    }
}

/// Scales by a plain positive rational (the common kappa * dist case).
pub fn scale_rat(c: &Rat, x: &ExtReal) -> ExtReal {
    scale(&ExtReal::Finite(c.clone()), x)
}

/// The ratio lhs / rhs for a finite positive rhs; infinity when lhs is
/// infinite. Callers must exclude rhs = 0 and rhs = inf.
pub fn ratio_over(lhs: &ExtReal, rhs: &Rat) -> ExtReal {
    debug_assert!(rhs > &Rat::zero());
    match lhs {
        ExtReal::Finite(a) => ExtReal::Finite(a / rhs),
        ExtReal::Inf => ExtReal::Inf,
    }
}

/// Formats an extended real for parsing back (`"inf"` or `"p/q"`).
pub fn format_ext(x: &ExtReal) -> String {
    alloc::format!("{x}")
}
