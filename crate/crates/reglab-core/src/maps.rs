//! Set-valued mappings as finite graphs, single-valued mappings as
//! total tables, and the algebra over them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::point::{add_points, Point};
use crate::spaces::Space;

/// A set-valued mapping given by its finite graph. Fibers are sets, so
/// duplicate pairs collapse. Immutable after construction; fiber maps
/// in both directions are pre-computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetValuedMap {
    domain_space: Space,
    target_space: Space,
    graph: BTreeSet<(Point, Point)>,
    fibers: BTreeMap<Point, BTreeSet<Point>>,
    inverse_fibers: BTreeMap<Point, BTreeSet<Point>>,
}

impl SetValuedMap {
    pub fn new(
        domain_space: Space,
        target_space: Space,
        pairs: impl IntoIterator<Item = (Point, Point)>,
    ) -> Result<Self> {
        let mut graph = BTreeSet::new();
        let mut fibers: BTreeMap<Point, BTreeSet<Point>> = BTreeMap::new();
        let mut inverse_fibers: BTreeMap<Point, BTreeSet<Point>> = BTreeMap::new();
        for (x, y) in pairs {
            check_membership(&domain_space, &x)?;
            check_membership(&target_space, &y)?;
            fibers.entry(x.clone()).or_default().insert(y.clone());
            inverse_fibers.entry(y.clone()).or_default().insert(x.clone());
            graph.insert((x, y));
        }
        Ok(SetValuedMap { domain_space, target_space, graph, fibers, inverse_fibers })
    }

    pub fn empty(domain_space: Space, target_space: Space) -> Self {
        SetValuedMap {
            domain_space,
            target_space,
            graph: BTreeSet::new(),
            fibers: BTreeMap::new(),
            inverse_fibers: BTreeMap::new(),
        }
    }

    pub fn domain_space(&self) -> &Space {
        &self.domain_space
    }

    pub fn target_space(&self) -> &Space {
        &self.target_space
    }

    pub fn graph(&self) -> &BTreeSet<(Point, Point)> {
        &self.graph
    }

    /// The exact fiber F(x); empty for x outside dom F.
    pub fn value(&self, x: &Point) -> BTreeSet<Point> {
        self.fibers.get(x).cloned().unwrap_or_default()
    }

    pub fn fiber(&self, x: &Point) -> Option<&BTreeSet<Point>> {
        self.fibers.get(x)
    }

    pub fn inverse_fiber(&self, y: &Point) -> Option<&BTreeSet<Point>> {
        self.inverse_fibers.get(y)
    }

    /// dom F = { x : F(x) nonempty }.
    pub fn domain(&self) -> impl Iterator<Item = &Point> {
        self.fibers.keys()
    }

    pub fn range(&self) -> impl Iterator<Item = &Point> {
        self.inverse_fibers.keys()
    }

    pub fn contains(&self, x: &Point, y: &Point) -> bool {
        self.fibers.get(x).is_some_and(|f| f.contains(y))
    }

    /// The mapping with every pair reversed.
    pub fn inverse(&self) -> SetValuedMap {
        SetValuedMap {
            domain_space: self.target_space.clone(),
            target_space: self.domain_space.clone(),
            graph: self.graph.iter().map(|(x, y)| (y.clone(), x.clone())).collect(),
            fibers: self.inverse_fibers.clone(),
            inverse_fibers: self.fibers.clone(),
        }
    }

    /// Fiberwise Minkowski sum (F + G)(x) = F(x) + G(x). Both mappings
    /// must share the domain space and a common linear target.
    pub fn sum(&self, other: &SetValuedMap) -> Result<SetValuedMap> {
        if self.domain_space != other.domain_space {
            return Err(Error::type_error("summands must share the domain space"));
        }
        if self.target_space != other.target_space {
            return Err(Error::type_error("summands must share the target space"));
        }
        if !self.target_space.is_linear() {
            return Err(Error::type_error("sum of mappings requires a linear target"));
        }
        let mut pairs = Vec::new();
        for (x, fx) in &self.fibers {
            let Some(gx) = other.fibers.get(x) else { continue };
            for v in fx {
                for w in gx {
                    pairs.push((x.clone(), add_points(v, w)?));
                }
            }
        }
        SetValuedMap::new(self.domain_space.clone(), self.target_space.clone(), pairs)
    }

    /// Fiberwise translation (F + g)(x) = F(x) + g(x).
    pub fn add_single(&self, g: &SingleValuedMap) -> Result<SetValuedMap> {
        if !self.target_space.is_linear() {
            return Err(Error::type_error("translation requires a linear target"));
        }
        let mut pairs = Vec::new();
        for (x, fx) in &self.fibers {
            let gx = g.value(x)?;
            for v in fx {
                pairs.push((x.clone(), add_points(v, gx)?));
            }
        }
        SetValuedMap::new(self.domain_space.clone(), self.target_space.clone(), pairs)
    }

    /// Graph intersected with X_box x Y_box.
    pub fn restrict(&self, x_box: &BTreeSet<Point>, y_box: &BTreeSet<Point>) -> SetValuedMap {
        let pairs = self
            .graph
            .iter()
            .filter(|(x, y)| x_box.contains(x) && y_box.contains(y))
            .cloned();
        SetValuedMap::new(self.domain_space.clone(), self.target_space.clone(), pairs)
            .expect("restriction of a valid graph is valid")
    }
}

fn check_membership(space: &Space, p: &Point) -> Result<()> {
    // Distance to itself both validates the id/dimension and costs nothing.
    space.distance(p, p).map(|_| ())
}

/// A single-valued mapping as a total table on an enumerated domain
/// subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleValuedMap {
    domain_space: Space,
    target_space: Space,
    table: BTreeMap<Point, Point>,
}

impl SingleValuedMap {
    pub fn new(
        domain_space: Space,
        target_space: Space,
        entries: impl IntoIterator<Item = (Point, Point)>,
    ) -> Result<Self> {
        let mut table = BTreeMap::new();
        for (x, y) in entries {
            check_membership(&domain_space, &x)?;
            check_membership(&target_space, &y)?;
            if let Some(prev) = table.insert(x.clone(), y.clone()) {
                if prev != y {
                    return Err(Error::input(alloc::format!(
                        "conflicting values for point {x}"
                    )));
                }
            }
        }
        Ok(SingleValuedMap { domain_space, target_space, table })
    }

    pub fn domain_space(&self) -> &Space {
        &self.domain_space
    }

    pub fn target_space(&self) -> &Space {
        &self.target_space
    }

    pub fn value(&self, x: &Point) -> Result<&Point> {
        self.table
            .get(x)
            .ok_or_else(|| Error::input(alloc::format!("mapping undefined at point {x}")))
    }

    pub fn domain(&self) -> impl Iterator<Item = &Point> {
        self.table.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Point, &Point)> {
        self.table.iter()
    }

    pub fn as_set_valued(&self) -> SetValuedMap {
        SetValuedMap::new(
            self.domain_space.clone(),
            self.target_space.clone(),
            self.table.iter().map(|(x, y)| (x.clone(), y.clone())),
        )
        .expect("table entries were validated on construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rint, Rat};
    use crate::spaces::Space;
    use num_traits::Signed;

    fn sp(vals: &[Rat]) -> Vec<Point> {
        vals.iter().map(|r| Point::scalar(r.clone())).collect()
    }

    /// F(x) = {x, -1} sampled on the given grid.
    fn two_lines_map(xs: &[Rat]) -> SetValuedMap {
        let pairs = xs.iter().flat_map(|x| {
            [
                (Point::scalar(x.clone()), Point::scalar(x.clone())),
                (Point::scalar(x.clone()), Point::scalar(rint(-1))),
            ]
        });
        SetValuedMap::new(Space::line(), Space::line(), pairs).unwrap()
    }

    #[test]
    fn value_returns_exact_fiber() {
        let f = two_lines_map(&[rat(1, 2), rint(0)]);
        let fiber = f.value(&Point::scalar(rat(1, 2)));
        assert_eq!(
            fiber.into_iter().collect::<Vec<_>>(),
            sp(&[rint(-1), rat(1, 2)])
        );
        assert!(f.value(&Point::scalar(rint(7))).is_empty());
    }

    #[test]
    fn inverse_is_involutive() {
        let f = two_lines_map(&[rint(0), rat(1, 2), rint(1)]);
        assert_eq!(f.inverse().inverse(), f);
        // -1 is in every fiber, so its inverse fiber is the whole sample
        let inv = f.inverse();
        let fiber = inv.value(&Point::scalar(rint(-1)));
        assert_eq!(fiber.len(), 3);
        let empty = SetValuedMap::empty(Space::line(), Space::line());
        assert_eq!(empty.inverse().graph().len(), 0);
    }

    #[test]
    fn sum_reproduces_four_line_fiber() {
        let xs = [rint(0), rat(1, 2)];
        let f = two_lines_map(&xs);
        let g_pairs = xs.iter().flat_map(|x| {
            [
                (Point::scalar(x.clone()), Point::scalar(rint(0))),
                (Point::scalar(x.clone()), Point::scalar(rint(1))),
            ]
        });
        let g = SetValuedMap::new(Space::line(), Space::line(), g_pairs).unwrap();
        let h = f.sum(&g).unwrap();
        // H(x) = {x, -1, 1+x, 0}; duplicates collapse at x = 0
        let at_zero = h.value(&Point::scalar(rint(0)));
        assert_eq!(at_zero, sp(&[rint(-1), rint(0), rint(1)]).into_iter().collect());
        let at_half = h.value(&Point::scalar(rat(1, 2)));
        assert_eq!(
            at_half,
            sp(&[rint(-1), rint(0), rat(1, 2), rat(3, 2)]).into_iter().collect()
        );
    }

    #[test]
    fn sum_with_zero_map_is_identityish() {
        let f = two_lines_map(&[rint(0), rint(1)]);
        let zero = SetValuedMap::new(
            Space::line(),
            Space::line(),
            [
                (Point::scalar(rint(0)), Point::scalar(rint(0))),
                (Point::scalar(rint(1)), Point::scalar(rint(0))),
            ],
        )
        .unwrap();
        assert_eq!(f.sum(&zero).unwrap().graph(), f.graph());
    }

    #[test]
    fn sum_with_empty_fiber_absorbs() {
        let f = two_lines_map(&[rint(0), rint(1)]);
        let g = SetValuedMap::new(
            Space::line(),
            Space::line(),
            [(Point::scalar(rint(0)), Point::scalar(rint(0)))],
        )
        .unwrap();
        let h = f.sum(&g).unwrap();
        assert!(h.value(&Point::scalar(rint(1))).is_empty());
    }

    #[test]
    fn sum_requires_linear_target() {
        let e = crate::spaces::ExplicitSpace::new(
            alloc::vec!["a".into()],
            alloc::vec![alloc::vec![rint(0)]],
        )
        .unwrap();
        let f = SetValuedMap::new(
            Space::line(),
            Space::Explicit(e.clone()),
            [(Point::scalar(rint(0)), Point::id("a"))],
        )
        .unwrap();
        let g = f.clone();
        assert!(matches!(f.sum(&g), Err(Error::Type(_))));
    }

    #[test]
    fn add_single_translates_fibers() {
        let xs = [rint(0), rat(1, 2)];
        let f = SetValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().map(|x| (Point::scalar(x.clone()), Point::scalar(x.clone()))),
        )
        .unwrap();
        let g = SingleValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().map(|x| (Point::scalar(x.clone()), Point::scalar(x.clone()))),
        )
        .unwrap();
        let h = f.add_single(&g).unwrap();
        assert_eq!(
            h.value(&Point::scalar(rat(1, 2))),
            sp(&[rint(1)]).into_iter().collect()
        );
        // g undefined at a needed point
        let f2 = two_lines_map(&[rint(0), rint(3)]);
        assert!(f2.add_single(&g).is_err());
    }

    #[test]
    fn restrict_filters_both_boxes() {
        let grid: Vec<Rat> = (-5..=5).map(|k| rat(k, 20)).collect();
        let f = two_lines_map(&grid);
        let x_box: BTreeSet<Point> = grid
            .iter()
            .filter(|r| r.abs() <= rat(1, 4).abs())
            .map(|r| Point::scalar(r.clone()))
            .collect();
        let y_box = x_box.clone();
        let restricted = f.restrict(&x_box, &y_box);
        // oracle: enumerate pairs and filter directly
        let expected: BTreeSet<(Point, Point)> = f
            .graph()
            .iter()
            .filter(|(x, y)| x_box.contains(x) && y_box.contains(y))
            .cloned()
            .collect();
        assert_eq!(restricted.graph(), &expected);
        // all (x, -1) pairs dropped
        assert!(restricted.graph().iter().all(|(_, y)| y != &Point::scalar(rint(-1))));
        // never enlarges a fiber
        for x in x_box.iter() {
            assert!(restricted.value(x).is_subset(&f.value(x)));
        }
        // full boxes keep the map
        let full_x: BTreeSet<Point> = grid.iter().map(|r| Point::scalar(r.clone())).collect();
        let mut full_y = full_x.clone();
        full_y.insert(Point::scalar(rint(-1)));
        assert_eq!(f.restrict(&full_x, &full_y).graph(), f.graph());
        // disjoint boxes empty the map
        let far: BTreeSet<Point> = [Point::scalar(rint(9))].into();
        assert!(f.restrict(&far, &full_y).graph().is_empty());
    }

    #[test]
    fn sum_is_commutative_and_associative() {
        let xs = [rint(0), rint(1), rint(2)];
        let mk = |offsets: &[Rat]| {
            SetValuedMap::new(
                Space::line(),
                Space::line(),
                xs.iter().flat_map(|x| {
                    offsets
                        .iter()
                        .map(|o| (Point::scalar(x.clone()), Point::scalar(x + o)))
                        .collect::<Vec<_>>()
                }),
            )
            .unwrap()
        };
        let f = mk(&[rint(0), rint(1)]);
        let g = mk(&[rat(1, 2)]);
        let h = mk(&[rint(-1), rat(1, 3)]);
        assert_eq!(f.sum(&g).unwrap(), g.sum(&f).unwrap());
        assert_eq!(
            f.sum(&g).unwrap().sum(&h).unwrap(),
            f.sum(&g.sum(&h).unwrap()).unwrap()
        );
    }

    #[test]
    fn sum_inverse_fiber_matches_direct_enumeration() {
        let xs: Vec<Rat> = (-3..=3).map(rint).collect();
        let f = two_lines_map(&xs);
        let g = SetValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().flat_map(|x| {
                [
                    (Point::scalar(x.clone()), Point::scalar(rint(0))),
                    (Point::scalar(x.clone()), Point::scalar(rint(1))),
                ]
            }),
        )
        .unwrap();
        let h = f.sum(&g).unwrap();
        // (F+G)^{-1}(y) = { x : exists w in G(x) with y - w in F(x) }
        for y in h.range().cloned().collect::<Vec<_>>() {
            let direct: BTreeSet<Point> = xs
                .iter()
                .map(|x| Point::scalar(x.clone()))
                .filter(|x| {
                    g.value(x).iter().any(|w| {
                        crate::point::sub_points(&y, w)
                            .map(|z| f.contains(x, &z))
                            .unwrap_or(false)
                    })
                })
                .collect();
            assert_eq!(h.inverse_fiber(&y).cloned().unwrap_or_default(), direct);
        }
    }
}
