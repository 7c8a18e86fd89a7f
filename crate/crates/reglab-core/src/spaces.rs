//! Finite metric spaces, translation-invariant linear spaces over
//! rational vectors, and the two product metrics used by the graph
//! criteria.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::max;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::extnum::{sup_over, ExtReal};
use crate::point::Point;
use crate::rat::Rat;
use crate::verdict::{Verdict, Witness};

/// An explicit finite metric space given by a distance matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitSpace {
    points: Vec<String>,
    index: BTreeMap<String, usize>,
    dist: Vec<Vec<Rat>>,
}

impl ExplicitSpace {
    /// Builds the space without checking the metric axioms; run
    /// `validate_metric` to certify them.
    pub fn new(points: Vec<String>, dist: Vec<Vec<Rat>>) -> Result<Self> {
        if dist.len() != points.len() || dist.iter().any(|row| row.len() != points.len()) {
            return Err(Error::input("distance matrix shape does not match point count"));
        }
        let mut index = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::input(alloc::format!("duplicate point id '{p}'")));
            }
        }
        Ok(ExplicitSpace { points, index, dist })
    }

    pub fn point_ids(&self) -> &[String] {
        &self.points
    }

    pub fn points(&self) -> Vec<Point> {
        self.points.iter().map(Point::id).collect()
    }

    fn index_of(&self, p: &Point) -> Result<usize> {
        match p {
            Point::Id(s) => self
                .index
                .get(s)
                .copied()
                .ok_or_else(|| Error::input(alloc::format!("unknown point id '{s}'"))),
            _ => Err(Error::type_error("explicit space expects id points")),
        }
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<Rat> {
        Ok(self.dist[self.index_of(a)?][self.index_of(b)?].clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    Linf,
}

/// A rational-vector linear space with a translation-invariant metric.
/// The ambient set is unbounded; instances enumerate finite candidate
/// sets wherever a search is required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSpace {
    pub dim: usize,
    pub norm: Norm,
}

impl LinearSpace {
    pub fn new(dim: usize, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("linear space dimension must be positive"));
        }
        Ok(LinearSpace { dim, norm })
    }

    pub fn line() -> Self {
        LinearSpace { dim: 1, norm: Norm::L1 }
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        let v = p.as_vector()?;
        if v.len() != self.dim {
            return Err(Error::input(alloc::format!(
                "point dimension {} does not match space dimension {}",
                v.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<Rat> {
        self.check_point(a)?;
        self.check_point(b)?;
        let (va, vb) = (a.as_vector()?, b.as_vector()?);
        let mut acc = Rat::zero();
        match self.norm {
            Norm::L1 => {
                for (x, y) in va.iter().zip(vb) {
                    acc += (x - y).abs();
                }
            }
            Norm::Linf => {
                for (x, y) in va.iter().zip(vb) {
                    acc = max(acc, (x - y).abs());
                }
            }
        }
        Ok(acc)
    }
}

/// Which product metric to put on X x Y.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProductKind {
    /// max{ d(u,x), lambda * rho(v,y) }
    MaxScaled(Rat),
    /// d(u,x) + kappa * rho(v,y)
    SumScaled(Rat),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpace {
    pub left: alloc::boxed::Box<Space>,
    pub right: alloc::boxed::Box<Space>,
    pub kind: ProductKind,
}

impl ProductSpace {
    pub fn new(left: Space, right: Space, kind: ProductKind) -> Result<Self> {
        let param = match &kind {
            ProductKind::MaxScaled(l) | ProductKind::SumScaled(l) => l,
        };
        if param <= &Rat::zero() {
            return Err(Error::domain("product metric parameter must be positive"));
        }
        Ok(ProductSpace {
            left: alloc::boxed::Box::new(left),
            right: alloc::boxed::Box::new(right),
            kind,
        })
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<Rat> {
        let (Point::Pair(a1, a2), Point::Pair(b1, b2)) = (a, b) else {
            return Err(Error::type_error("product space expects pair points"));
        };
        let dx = self.left.distance(a1, b1)?;
        let dy = self.right.distance(a2, b2)?;
        Ok(match &self.kind {
            ProductKind::MaxScaled(l) => max(dx, l * dy),
            ProductKind::SumScaled(k) => dx + k * dy,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Space {
    Explicit(ExplicitSpace),
    Linear(LinearSpace),
    Product(ProductSpace),
}

impl Space {
    pub fn line() -> Self {
        Space::Linear(LinearSpace::line())
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Space::Linear(_))
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<Rat> {
        match self {
            Space::Explicit(s) => s.distance(a, b),
            Space::Linear(s) => s.distance(a, b),
            Space::Product(s) => s.distance(a, b),
        }
    }

    pub fn ext_distance(&self, a: &Point, b: &Point) -> Result<ExtReal> {
        Ok(ExtReal::Finite(self.distance(a, b)?))
    }

    /// All points for an explicit space; linear and product spaces have
    /// no intrinsic enumeration.
    pub fn enumerate(&self) -> Option<Vec<Point>> {
        match self {
            Space::Explicit(s) => Some(s.points()),
            _ => None,
        }
    }
}

/// dist(x, C) = inf { d(x, u) : u in C }; infinity when C is empty.
pub fn dist_point_set<'a, I>(space: &Space, x: &Point, set: I) -> Result<ExtReal>
where
    I: IntoIterator<Item = &'a Point>,
{
    let mut best: Option<Rat> = None;
    for u in set {
        let d = space.distance(x, u)?;
        best = Some(match best {
            Some(b) => b.min(d),
            None => d,
        });
    }
    Ok(best.map_or(ExtReal::Inf, ExtReal::Finite))
}

/// The candidates within distance `r` of `center`; closed keeps the
/// boundary, open drops it. An infinite radius returns every candidate.
pub fn ball(
    space: &Space,
    center: &Point,
    r: &ExtReal,
    closed: bool,
    candidates: &[Point],
) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for p in candidates {
        let d = ExtReal::Finite(space.distance(center, p)?);
        let inside = match r {
            ExtReal::Inf => true,
            _ => {
                if closed {
                    d <= *r
                } else {
                    d < *r
                }
            }
        };
        if inside {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// sup of pairwise distances; zero for the empty set or a singleton.
pub fn diameter<'a, I>(space: &Space, set: I) -> Result<ExtReal>
where
    I: IntoIterator<Item = &'a Point>,
{
    let pts: Vec<&Point> = set.into_iter().collect();
    let mut sups = Vec::new();
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            sups.push(ExtReal::Finite(space.distance(a, b)?));
        }
    }
    Ok(sup_over(sups))
}

/// Exhaustive check of the four metric axioms on an explicit space.
/// Reports the first violating configuration found.
pub fn validate_metric(space: &ExplicitSpace) -> Verdict {
    let pts = space.points();
    let n = pts.len();
    let d = |i: usize, j: usize| -> &Rat { &space.dist[i][j] };
    for i in 0..n {
        if !d(i, i).is_zero() {
            return Verdict::fail(Witness {
                x: pts[i].clone(),
                y: pts[i].clone(),
                extra: alloc::vec![],
                lhs: ExtReal::Finite(d(i, i).abs()),
                rhs: ExtReal::zero(),
            });
        }
        for j in 0..n {
            if i != j && d(i, j) <= &Rat::zero() {
                // distinct points at non-positive distance
                return Verdict::fail(Witness {
                    x: pts[i].clone(),
                    y: pts[j].clone(),
                    extra: alloc::vec![],
                    lhs: ExtReal::zero(),
                    rhs: ExtReal::Finite(d(i, j).clone()),
                });
            }
            if d(i, j) != d(j, i) {
                return Verdict::fail(Witness {
                    x: pts[i].clone(),
                    y: pts[j].clone(),
                    extra: alloc::vec![],
                    lhs: ExtReal::Finite(d(i, j).clone()),
                    rhs: ExtReal::Finite(d(j, i).clone()),
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if d(i, j) > &(d(i, k) + d(k, j)) {
                    return Verdict::fail(Witness {
                        x: pts[i].clone(),
                        y: pts[j].clone(),
                        extra: alloc::vec![pts[k].clone()],
                        lhs: ExtReal::Finite(d(i, j).clone()),
                        rhs: ExtReal::Finite(d(i, k) + d(k, j)),
                    });
                }
            }
        }
    }
    Verdict::pass()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rint};

    fn line_pts(vals: &[(i64, i64)]) -> Vec<Point> {
        vals.iter().map(|&(n, d)| Point::scalar(rat(n, d))).collect()
    }

    #[test]
    fn dist_point_set_self_is_zero() {
        let space = Space::line();
        let x = Point::scalar(rint(0));
        let set = line_pts(&[(0, 1), (1, 1)]);
        assert_eq!(dist_point_set(&space, &x, &set).unwrap(), ExtReal::zero());
    }

    #[test]
    fn dist_point_set_empty_is_infinity() {
        let space = Space::line();
        let x = Point::scalar(rint(0));
        assert_eq!(dist_point_set(&space, &x, []).unwrap(), ExtReal::Inf);
    }

    #[test]
    fn dist_point_set_nearest_of_two() {
        let space = Space::Linear(LinearSpace::new(1, Norm::Linf).unwrap());
        let x = Point::scalar(rint(0));
        let set = line_pts(&[(3, 4), (-1, 1)]);
        assert_eq!(
            dist_point_set(&space, &x, &set).unwrap(),
            ExtReal::Finite(rat(3, 4))
        );
    }

    #[test]
    fn ball_radius_zero() {
        let space = Space::line();
        let c = Point::scalar(rint(0));
        let cands = line_pts(&[(0, 1), (1, 1), (-1, 2)]);
        let closed = ball(&space, &c, &ExtReal::zero(), true, &cands).unwrap();
        assert_eq!(closed, line_pts(&[(0, 1)]));
        let open = ball(&space, &c, &ExtReal::zero(), false, &cands).unwrap();
        assert!(open.is_empty());
    }

    #[test]
    fn ball_infinite_radius_returns_everything() {
        let space = Space::line();
        let c = Point::scalar(rint(0));
        let cands = line_pts(&[(0, 1), (1, 1), (-7, 2)]);
        let all = ball(&space, &c, &ExtReal::Inf, false, &cands).unwrap();
        assert_eq!(all.len(), cands.len());
    }

    #[test]
    fn diameter_cases() {
        let space = Space::line();
        assert_eq!(diameter(&space, []).unwrap(), ExtReal::zero());
        let single = line_pts(&[(2, 1)]);
        assert_eq!(diameter(&space, &single).unwrap(), ExtReal::zero());
        let pair = line_pts(&[(0, 1), (1, 1)]);
        assert_eq!(diameter(&space, &pair).unwrap(), ExtReal::Finite(rint(1)));
    }

    fn explicit(dist: Vec<Vec<Rat>>) -> ExplicitSpace {
        let names = (0..dist.len())
            .map(|i| alloc::format!("p{i}"))
            .collect::<Vec<_>>();
        ExplicitSpace::new(names, dist).unwrap()
    }

    #[test]
    fn validate_metric_passes_on_valid_matrix() {
        let s = explicit(alloc::vec![
            alloc::vec![rint(0), rint(1), rint(2)],
            alloc::vec![rint(1), rint(0), rint(1)],
            alloc::vec![rint(2), rint(1), rint(0)],
        ]);
        assert!(validate_metric(&s).holds);
    }

    #[test]
    fn validate_metric_reports_triangle_violation() {
        let s = explicit(alloc::vec![
            alloc::vec![rint(0), rint(1), rint(5)],
            alloc::vec![rint(1), rint(0), rint(1)],
            alloc::vec![rint(5), rint(1), rint(0)],
        ]);
        let v = validate_metric(&s);
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!(w.extra.len(), 1);
        assert_eq!(w.lhs, ExtReal::Finite(rint(5)));
        assert_eq!(w.rhs, ExtReal::Finite(rint(2)));
    }

    #[test]
    fn validate_metric_reports_asymmetry() {
        let s = explicit(alloc::vec![
            alloc::vec![rint(0), rint(1)],
            alloc::vec![rint(2), rint(0)],
        ]);
        assert!(!validate_metric(&s).holds);
    }

    #[test]
    fn translation_invariance_is_exact() {
        let space = LinearSpace::new(2, Norm::L1).unwrap();
        let v = Point::vector(alloc::vec![rat(1, 3), rat(-2, 5)]);
        let w = Point::vector(alloc::vec![rat(4, 7), rat(1, 2)]);
        let u = Point::vector(alloc::vec![rat(-9, 11), rat(3, 13)]);
        let vu = crate::point::add_points(&v, &u).unwrap();
        let wu = crate::point::add_points(&w, &u).unwrap();
        assert_eq!(space.distance(&v, &w).unwrap(), space.distance(&vu, &wu).unwrap());
    }

    #[test]
    fn product_metrics_combine_components() {
        let xi = ProductSpace::new(Space::line(), Space::line(), ProductKind::MaxScaled(rat(1, 2)))
            .unwrap();
        let omega =
            ProductSpace::new(Space::line(), Space::line(), ProductKind::SumScaled(rat(1, 2)))
                .unwrap();
        let a = Point::pair(Point::scalar(rint(0)), Point::scalar(rint(0)));
        let b = Point::pair(Point::scalar(rint(1)), Point::scalar(rint(4)));
        assert_eq!(xi.distance(&a, &b).unwrap(), rint(2));
        assert_eq!(omega.distance(&a, &b).unwrap(), rint(3));
    }

    #[test]
    fn product_parameter_must_be_positive() {
        assert!(ProductSpace::new(Space::line(), Space::line(), ProductKind::MaxScaled(rint(0)))
            .is_err());
    }
}
