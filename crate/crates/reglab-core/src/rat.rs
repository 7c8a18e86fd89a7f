//! Exact rational scalars. Values cross all external boundaries as
//! strings `"p/q"` or plain integers, never as floats.

use alloc::string::String;
use alloc::string::ToString;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number.
pub type Rat = num_rational::BigRational;

/// Builds a rational from an integer pair.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Builds an integer rational.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"`, or `"-p/q"`. Rejects zero denominators.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::input("empty rational"));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::input(alloc::format!("bad numerator in rational '{s}'")))?;
    let d: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| Error::input(alloc::format!("bad denominator in rational '{s}'")))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(Error::input(alloc::format!("zero denominator in rational '{s}'")));
    }
    Ok(Rat::new(n, d))
}

/// Renders as `"p/q"`, or `"p"` for integers.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

/// Absolute value.
pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}
