//! Pass/fail verdicts with re-checkable witnesses.

use alloc::vec::Vec;
use core::fmt;

use crate::extnum::ExtReal;
use crate::point::Point;

/// A concrete configuration at which a claimed inequality fails,
/// carrying both sides as exact values so the failure can be
/// re-checked independently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub x: Point,
    pub y: Point,
    /// Additional points of the violated configuration (second domain
    /// point of a Lipschitz pair, fiber element, ...).
    pub extra: Vec<Point>,
    /// Left-hand side of the violated inequality.
    pub lhs: ExtReal,
    /// Full right-hand side, constants included.
    pub rhs: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict { holds: true, witness: None }
    }

    pub fn fail(witness: Witness) -> Self {
        Verdict { holds: false, witness: Some(witness) }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds {
            write!(f, "PASS")
        } else if let Some(w) = &self.witness {
            write!(
                f,
                "FAIL at (x, y) = ({}, {}): lhs = {} > rhs = {}",
                w.x, w.y, w.lhs, w.rhs
            )
        } else {
            write!(f, "FAIL")
        }
    }
}
