//! Points of the supported spaces: opaque ids for explicit finite
//! metric spaces, rational vectors for linear spaces, and pairs for
//! product spaces.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};
use crate::rat::{format_rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Point {
    /// A named point of an explicit finite metric space.
    Id(String),
    /// A rational vector of a linear space.
    Vector(Vec<Rat>),
    /// A point of a product space.
    Pair(Box<Point>, Box<Point>),
}

impl Point {
    pub fn id(s: impl Into<String>) -> Self {
        Point::Id(s.into())
    }

    pub fn vector(coords: Vec<Rat>) -> Self {
        Point::Vector(coords)
    }

    /// One-dimensional vector point.
    pub fn scalar(r: Rat) -> Self {
        Point::Vector(alloc::vec![r])
    }

    pub fn pair(a: Point, b: Point) -> Self {
        Point::Pair(Box::new(a), Box::new(b))
    }

    pub fn as_vector(&self) -> Result<&[Rat]> {
        match self {
            Point::Vector(v) => Ok(v),
            _ => Err(Error::type_error("expected a vector point")),
        }
    }

    pub fn as_scalar(&self) -> Result<&Rat> {
        let v = self.as_vector()?;
        if v.len() != 1 {
            return Err(Error::type_error("expected a one-dimensional point"));
        }
        Ok(&v[0])
    }

    fn variant_rank(&self) -> u8 {
        match self {
            Point::Id(_) => 0,
            Point::Vector(_) => 1,
            Point::Pair(_, _) => 2,
        }
    }
}

// Total order used for deterministic scans and tie-breaking.
impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Point::Id(a), Point::Id(b)) => a.cmp(b),
            (Point::Vector(a), Point::Vector(b)) => a.cmp(b),
            (Point::Pair(a1, a2), Point::Pair(b1, b2)) => {
                a1.cmp(b1).then_with(|| a2.cmp(b2))
            }
            _ => self.variant_rank().cmp(&other.variant_rank()),
        }
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Id(s) => write!(f, "{s}"),
            Point::Vector(v) => {
                if v.len() == 1 {
                    return write!(f, "{}", format_rat(&v[0]));
                }
                write!(f, "(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", format_rat(c))?;
                }
                write!(f, ")")
            }
            Point::Pair(a, b) => write!(f, "[{a} | {b}]"),
        }
    }
}

/// Componentwise sum of two vector points.
pub fn add_points(a: &Point, b: &Point) -> Result<Point> {
    let (va, vb) = (a.as_vector()?, b.as_vector()?);
    if va.len() != vb.len() {
        return Err(Error::type_error("vector dimension mismatch in addition"));
    }
    Ok(Point::Vector(
        va.iter().zip(vb).map(|(x, y)| x + y).collect(),
    ))
}

/// Componentwise difference of two vector points.
pub fn sub_points(a: &Point, b: &Point) -> Result<Point> {
    let (va, vb) = (a.as_vector()?, b.as_vector()?);
    if va.len() != vb.len() {
        return Err(Error::type_error("vector dimension mismatch in subtraction"));
    }
    Ok(Point::Vector(
        va.iter().zip(vb).map(|(x, y)| x - y).collect(),
    ))
}
