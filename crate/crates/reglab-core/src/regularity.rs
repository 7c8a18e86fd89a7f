//! Definition-level checkers and moduli for the regularity notions:
//! plain, restricted, gauge-controlled, Milyutin, semiregularity,
//! Aubin/Lipschitz behavior, sum-stability, strong regularity, and the
//! coincidence estimate. These exhaustive scans are the brute-force
//! oracle layer against which the variational criteria are validated.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::extnum::{scale_rat, ExtReal};
use crate::maps::{SetValuedMap, SingleValuedMap};
use crate::point::{sub_points, Point};
use crate::rat::Rat;
use crate::spaces::{ball, dist_point_set, Space};
use crate::verdict::{Verdict, Witness};

/// A finite set of admissible pairs (x, y) in X x Y.
///
/// Projections and sections are derived from the pairs; constructors
/// cover explicit pair lists, set products, and ball products.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Window {
    pairs: BTreeSet<(Point, Point)>,
}

impl Window {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Point, Point)>) -> Self {
        Window { pairs: pairs.into_iter().collect() }
    }

    pub fn product(u: &[Point], v: &[Point]) -> Self {
        let mut pairs = BTreeSet::new();
        for x in u {
            for y in v {
                pairs.insert((x.clone(), y.clone()));
            }
        }
        Window { pairs }
    }

    /// Product of two balls filtered through candidate sets. Open balls
    /// by default; `closed` switches both factors.
    #[allow(clippy::too_many_arguments)]
    pub fn ball_product(
        space_x: &Space,
        center_x: &Point,
        radius_x: &ExtReal,
        x_candidates: &[Point],
        space_y: &Space,
        center_y: &Point,
        radius_y: &ExtReal,
        y_candidates: &[Point],
        closed: bool,
    ) -> Result<Self> {
        let u = ball(space_x, center_x, radius_x, closed, x_candidates)?;
        let v = ball(space_y, center_y, radius_y, closed, y_candidates)?;
        Ok(Window::product(&u, &v))
    }

    pub fn pairs(&self) -> &BTreeSet<(Point, Point)> {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn contains(&self, x: &Point, y: &Point) -> bool {
        self.pairs.contains(&(x.clone(), y.clone()))
    }

    /// Projection onto X.
    pub fn project_x(&self) -> BTreeSet<Point> {
        self.pairs.iter().map(|(x, _)| x.clone()).collect()
    }

    /// Projection onto Y.
    pub fn project_y(&self) -> BTreeSet<Point> {
        self.pairs.iter().map(|(_, y)| y.clone()).collect()
    }

    /// Section { x : (x, y) in W } for a fixed y.
    pub fn section(&self, y: &Point) -> Vec<Point> {
        self.pairs
            .iter()
            .filter(|(_, py)| py == y)
            .map(|(x, _)| x.clone())
            .collect()
    }

    /// Sections keyed by y, for scans grouped per right-hand side.
    pub fn sections_by_y(&self) -> BTreeMap<Point, Vec<Point>> {
        let mut out: BTreeMap<Point, Vec<Point>> = BTreeMap::new();
        for (x, y) in &self.pairs {
            out.entry(y.clone()).or_default().push(x.clone());
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&Point, &Point) -> bool) -> Window {
        Window {
            pairs: self
                .pairs
                .iter()
                .filter(|(x, y)| keep(x, y))
                .cloned()
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &Window) -> bool {
        self.pairs.is_subset(&other.pairs)
    }
}

fn require_positive(name: &str, value: &Rat) -> Result<()> {
    if value <= &Rat::zero() {
        return Err(Error::domain(alloc::format!("{name} must be positive")));
    }
    Ok(())
}

fn inverse_dist(f: &SetValuedMap, x: &Point, y: &Point) -> Result<ExtReal> {
    match f.inverse_fiber(y) {
        Some(set) => dist_point_set(f.domain_space(), x, set),
        None => Ok(ExtReal::Inf),
    }
}

fn fiber_dist(f: &SetValuedMap, x: &Point, y: &Point) -> Result<ExtReal> {
    match f.fiber(x) {
        Some(set) => dist_point_set(f.target_space(), y, set),
        None => Ok(ExtReal::Inf),
    }
}

/// dist(x, F^{-1}(y)) <= kappa * dist(y, F(x)) at every pair of W.
///
/// Pairs are scanned in sorted order, so a failing verdict carries the
/// lexicographically smallest witness.
pub fn check_regular(f: &SetValuedMap, w: &Window, kappa: &Rat) -> Result<Verdict> {
    require_positive("kappa", kappa)?;
    for (x, y) in w.pairs() {
        let lhs = inverse_dist(f, x, y)?;
        let rhs = scale_rat(kappa, &fiber_dist(f, x, y)?);
        if lhs > rhs {
            return Ok(Verdict::fail(Witness {
                x: x.clone(),
                y: y.clone(),
                extra: alloc::vec![],
                lhs,
                rhs,
            }));
        }
    }
    Ok(Verdict::pass())
}

/// Same inequality with the fiber replaced by F(x) ∩ V on the right.
/// An empty intersection makes the right-hand side infinite, so such
/// pairs never fail.
pub fn check_restricted_regular(
    f: &SetValuedMap,
    w: &Window,
    v: &BTreeSet<Point>,
    kappa: &Rat,
) -> Result<Verdict> {
    require_positive("kappa", kappa)?;
    for (x, y) in w.pairs() {
        let lhs = inverse_dist(f, x, y)?;
        let fiber = f.value(x);
        let restricted: Vec<&Point> = fiber.iter().filter(|p| v.contains(p)).collect();
        let rhs = scale_rat(
            kappa,
            &dist_point_set(f.target_space(), y, restricted.into_iter())?,
        );
        if lhs > rhs {
            return Ok(Verdict::fail(Witness {
                x: x.clone(),
                y: y.clone(),
                extra: alloc::vec![],
                lhs,
                rhs,
            }));
        }
    }
    Ok(Verdict::pass())
}

/// The modulus together with a pair attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusReport {
    pub modulus: ExtReal,
    /// Lexicographically smallest pair attaining the supremum, when the
    /// supremum is taken over a nonempty set.
    pub attained_at: Option<(Point, Point)>,
}

/// The least constant for which `check_regular` holds on W: the
/// supremum of LHS/RHS over pairs with finite positive right-hand
/// side. Pairs with an empty fiber (infinite right side) contribute
/// nothing unless the inverse fiber is empty too, in which case the
/// modulus is infinite.
pub fn regularity_modulus(f: &SetValuedMap, w: &Window) -> Result<ModulusReport> {
    let mut best = ExtReal::zero();
    let mut attained: Option<(Point, Point)> = None;
    for (x, y) in w.pairs() {
        let rhs = fiber_dist(f, x, y)?;
        let lhs = inverse_dist(f, x, y)?;
        let ratio = match &rhs {
            ExtReal::Finite(r) if r.is_zero() => continue, // y in F(x) forces lhs = 0
            ExtReal::Finite(r) => crate::extnum::ratio_over(&lhs, r),
            ExtReal::Inf => {
                if lhs.is_inf() {
                    return Ok(ModulusReport {
                        modulus: ExtReal::Inf,
                        attained_at: Some((x.clone(), y.clone())),
                    });
                }
                continue;
            }
        };
        if ratio > best {
            best = ratio;
            attained = Some((x.clone(), y.clone()));
        }
        if best.is_inf() {
            return Ok(ModulusReport { modulus: best, attained_at: attained });
        }
    }
    Ok(ModulusReport { modulus: best, attained_at: attained })
}

/// Gauge controlling which window pairs a regularity estimate must
/// cover. The Milyutin gauge is the distance to the complement of the
/// window's X-projection inside the enumerated ambient set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaFunction {
    Constant(ExtReal),
    Table(BTreeMap<Point, ExtReal>),
    Milyutin,
}

impl GammaFunction {
    pub fn eval(
        &self,
        space_x: &Space,
        ambient_x: &[Point],
        w_x: &BTreeSet<Point>,
        u: &Point,
    ) -> Result<ExtReal> {
        match self {
            GammaFunction::Constant(c) => Ok(c.clone()),
            GammaFunction::Table(t) => t
                .get(u)
                .cloned()
                .ok_or_else(|| Error::input(alloc::format!("gauge undefined at point {u}"))),
            GammaFunction::Milyutin => {
                let complement: Vec<&Point> =
                    ambient_x.iter().filter(|p| !w_x.contains(p)).collect();
                dist_point_set(space_x, u, complement.into_iter())
            }
        }
    }
}

/// Which of the two gauge-controlled sub-windows to use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaVariant {
    /// kappa * dist(y, F(x)) < gamma(x)
    A,
    /// dist(y, F(x)) < delta * gamma(x)
    B(Rat),
}

/// Builds the gauge-controlled sub-window of W and checks plain
/// regularity with `kappa` on it. The gauge must be positive on
/// dom F ∩ W_X.
pub fn check_gamma_regular(
    f: &SetValuedMap,
    w: &Window,
    gamma: &GammaFunction,
    kappa: &Rat,
    variant: &GammaVariant,
    ambient_x: &[Point],
) -> Result<Verdict> {
    require_positive("kappa", kappa)?;
    if let GammaVariant::B(delta) = variant {
        require_positive("delta", delta)?;
    }
    let sub = gamma_sub_window(f, w, gamma, kappa, variant, ambient_x)?;
    check_regular(f, &sub, kappa)
}

/// The sub-window of pairs the gauge-controlled property must cover.
pub fn gamma_sub_window(
    f: &SetValuedMap,
    w: &Window,
    gamma: &GammaFunction,
    kappa: &Rat,
    variant: &GammaVariant,
    ambient_x: &[Point],
) -> Result<Window> {
    let w_x = w.project_x();
    // positivity on dom F ∩ W_X
    for x in &w_x {
        if f.fiber(x).is_some() {
            let g = gamma.eval(f.domain_space(), ambient_x, &w_x, x)?;
            if g <= ExtReal::zero() {
                return Err(Error::input(alloc::format!(
                    "gauge must be positive on dom F within the window, zero at {x}"
                )));
            }
        }
    }
    let mut pairs = Vec::new();
    for (x, y) in w.pairs() {
        let g = gamma.eval(f.domain_space(), ambient_x, &w_x, x)?;
        let d = fiber_dist(f, x, y)?;
        let included = match variant {
            GammaVariant::A => scale_rat(kappa, &d) < g,
            GammaVariant::B(delta) => d < scale_rat(delta, &g),
        };
        if included {
            pairs.push((x.clone(), y.clone()));
        }
    }
    Ok(Window::from_pairs(pairs))
}

/// Gauge-controlled regularity with the distance-to-complement gauge.
pub fn check_milyutin(
    f: &SetValuedMap,
    w: &Window,
    kappa: &Rat,
    variant: &GammaVariant,
    ambient_x: &[Point],
) -> Result<Verdict> {
    check_gamma_regular(f, w, &GammaFunction::Milyutin, kappa, variant, ambient_x)
}

/// dist(xbar, F^{-1}(y)) <= kappa * dist(y, Lambda) for every y in
/// Gamma. Requires Lambda ⊂ F(xbar).
pub fn check_semiregular(
    f: &SetValuedMap,
    x_bar: &Point,
    gamma_set: &[Point],
    lambda: &BTreeSet<Point>,
    kappa: &Rat,
) -> Result<Verdict> {
    require_positive("kappa", kappa)?;
    let fiber = f.value(x_bar);
    if !lambda.is_subset(&fiber) {
        return Err(Error::input("Lambda must be contained in F(xbar)"));
    }
    let mut ys: Vec<&Point> = gamma_set.iter().collect();
    ys.sort();
    for y in ys {
        let lhs = inverse_dist(f, x_bar, y)?;
        let rhs = scale_rat(kappa, &dist_point_set(f.target_space(), y, lambda)?);
        if lhs > rhs {
            return Ok(Verdict::fail(Witness {
                x: x_bar.clone(),
                y: y.clone(),
                extra: alloc::vec![],
                lhs,
                rhs,
            }));
        }
    }
    Ok(Verdict::pass())
}

/// Aubin property on U x V: F(x) ∩ V lies within ell * d(x, u) of
/// F(u) for all x, u in U.
pub fn check_aubin(
    f: &SetValuedMap,
    u_set: &[Point],
    v_set: &BTreeSet<Point>,
    ell: &Rat,
) -> Result<Verdict> {
    require_positive("ell", ell)?;
    if !f.target_space().is_linear() {
        return Err(Error::type_error("Aubin check requires a linear target"));
    }
    let mut us: Vec<&Point> = u_set.iter().collect();
    us.sort();
    for x in &us {
        for u in &us {
            let fiber_x = f.value(x);
            for v in fiber_x.iter().filter(|p| v_set.contains(p)) {
                let lhs = fiber_dist_to(f, u, v)?;
                let rhs = ExtReal::Finite(ell * f.domain_space().distance(x, u)?);
                if lhs > rhs {
                    return Ok(Verdict::fail(Witness {
                        x: (*x).clone(),
                        y: v.clone(),
                        extra: alloc::vec![(*u).clone()],
                        lhs,
                        rhs,
                    }));
                }
            }
        }
    }
    Ok(Verdict::pass())
}

fn fiber_dist_to(f: &SetValuedMap, u: &Point, v: &Point) -> Result<ExtReal> {
    match f.fiber(u) {
        Some(set) => dist_point_set(f.target_space(), v, set),
        None => Ok(ExtReal::Inf),
    }
}

/// rho(g(x), g(u)) <= ell * d(x, u) for all x, u in U.
pub fn lipschitz_check(g: &SingleValuedMap, u_set: &[Point], ell: &Rat) -> Result<Verdict> {
    require_positive("ell", ell)?;
    let mut us: Vec<&Point> = u_set.iter().collect();
    us.sort();
    for x in &us {
        for u in &us {
            let gx = g.value(x)?;
            let gu = g.value(u)?;
            let lhs = ExtReal::Finite(g.target_space().distance(gx, gu)?);
            let rhs = ExtReal::Finite(ell * g.domain_space().distance(x, u)?);
            if lhs > rhs {
                return Ok(Verdict::fail(Witness {
                    x: (*x).clone(),
                    y: gx.clone(),
                    extra: alloc::vec![(*u).clone()],
                    lhs,
                    rhs,
                }));
            }
        }
    }
    Ok(Verdict::pass())
}

/// Lipschitz-1 check for an extended-real gauge on a point set. Two
/// infinite values are treated as equal; a finite/infinite mix fails.
pub fn gauge_lipschitz1(
    space: &Space,
    gamma: &GammaFunction,
    ambient_x: &[Point],
    w_x: &BTreeSet<Point>,
    u_set: &[Point],
) -> Result<Verdict> {
    let mut us: Vec<&Point> = u_set.iter().collect();
    us.sort();
    for x in &us {
        for u in &us {
            let gx = gamma.eval(space, ambient_x, w_x, x)?;
            let gu = gamma.eval(space, ambient_x, w_x, u)?;
            let diff = match (&gx, &gu) {
                (ExtReal::Inf, ExtReal::Inf) => ExtReal::zero(),
                (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                    use num_traits::Signed;
                    ExtReal::Finite((a - b).abs())
                }
                _ => ExtReal::Inf,
            };
            let bound = ExtReal::Finite(space.distance(x, u)?);
            if diff > bound {
                return Ok(Verdict::fail(Witness {
                    x: (*x).clone(),
                    y: (*u).clone(),
                    extra: alloc::vec![],
                    lhs: diff,
                    rhs: bound,
                }));
            }
        }
    }
    Ok(Verdict::pass())
}

/// Sum-stability verdict together with the levels it sampled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumStableReport {
    pub verdict: Verdict,
    pub levels: Vec<(Rat, Rat)>,
    pub failed_level: Option<(Rat, Rat)>,
}

/// Sampled sum-stability around (xbar, zbar, wbar): for each supplied
/// level (alpha, beta), every v in (F+G)(x) near zbar + wbar with x
/// near xbar must split as v = z + w with z in F(x) near zbar and w in
/// G(x) near wbar. All balls are open. A finite instance can only
/// certify the sampled levels, which the report records.
pub fn check_sum_stable(
    f: &SetValuedMap,
    g: &SetValuedMap,
    center: (&Point, &Point, &Point),
    levels: &[(Rat, Rat)],
) -> Result<SumStableReport> {
    let (x_bar, z_bar, w_bar) = center;
    if !f.contains(x_bar, z_bar) {
        return Err(Error::input("zbar must lie in F(xbar)"));
    }
    if !g.contains(x_bar, w_bar) {
        return Err(Error::input("wbar must lie in G(xbar)"));
    }
    let h = f.sum(g)?;
    let v_center = crate::point::add_points(z_bar, w_bar)?;
    let dx = f.domain_space();
    let dy = f.target_space();
    for (alpha, beta) in levels {
        require_positive("alpha", alpha)?;
        require_positive("beta", beta)?;
        let xs: Vec<Point> = h
            .domain()
            .filter(|x| {
                dx.distance(x, x_bar)
                    .map(|d| d < *alpha)
                    .unwrap_or(false)
            })
            .cloned()
            .collect();
        for x in &xs {
            for v in h.value(x) {
                if dy.distance(&v, &v_center)? >= *alpha {
                    continue;
                }
                let mut decomposed = false;
                for z in f.value(x) {
                    if dy.distance(&z, z_bar)? >= *beta {
                        continue;
                    }
                    let w = sub_points(&v, &z)?;
                    if g.contains(x, &w) && dy.distance(&w, w_bar)? < *beta {
                        decomposed = true;
                        break;
                    }
                }
                if !decomposed {
                    let verdict = Verdict::fail(Witness {
                        x: x.clone(),
                        y: v.clone(),
                        extra: alloc::vec![],
                        lhs: ExtReal::Finite(beta.clone()),
                        rhs: ExtReal::Finite(beta.clone()),
                    });
                    return Ok(SumStableReport {
                        verdict,
                        levels: levels.to_vec(),
                        failed_level: Some((alpha.clone(), beta.clone())),
                    });
                }
            }
        }
    }
    Ok(SumStableReport {
        verdict: Verdict::pass(),
        levels: levels.to_vec(),
        failed_level: None,
    })
}

/// dist(x, F^{-1}(y) ∩ W_{.,y}) <= kappa * dist(y, F(x)) at every pair
/// of W. Strictly stronger than plain regularity: the left-hand side
/// can only grow when the inverse fiber is intersected with the
/// section.
pub fn check_strong_regular(f: &SetValuedMap, w: &Window, kappa: &Rat) -> Result<Verdict> {
    require_positive("kappa", kappa)?;
    let sections = w.sections_by_y();
    for (x, y) in w.pairs() {
        let section: BTreeSet<&Point> = sections
            .get(y)
            .map(|s| s.iter().collect())
            .unwrap_or_default();
        let lhs = match f.inverse_fiber(y) {
            Some(set) => {
                let filtered: Vec<&Point> =
                    set.iter().filter(|p| section.contains(p)).collect();
                dist_point_set(f.domain_space(), x, filtered.into_iter())?
            }
            None => ExtReal::Inf,
        };
        let rhs = scale_rat(kappa, &fiber_dist(f, x, y)?);
        if lhs > rhs {
            return Ok(Verdict::fail(Witness {
                x: x.clone(),
                y: y.clone(),
                extra: alloc::vec![],
                lhs,
                rhs,
            }));
        }
    }
    Ok(Verdict::pass())
}

/// Coincidence estimate at a point: the verdict plus the coincidence
/// set of the two mappings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoincidenceReport {
    pub verdict: Verdict,
    /// { xi : F(xi) ∩ G(xi) nonempty }, over dom F ∪ dom G.
    pub coincidence_set: Vec<Point>,
    /// Distance from the query point to the coincidence set.
    pub distance_estimate: ExtReal,
}

/// For each y in G(x): dist(x, F^{-1}(y) ∩ G^{-1}(y)) <= kappa *
/// dist(y, F(x)).
pub fn coincidence_bound(
    f: &SetValuedMap,
    g: &SetValuedMap,
    x: &Point,
    kappa: &Rat,
) -> Result<CoincidenceReport> {
    require_positive("kappa", kappa)?;
    if g.fiber(x).is_none() {
        return Err(Error::input("query point must lie in dom G"));
    }
    let mut coincidence: BTreeSet<Point> = BTreeSet::new();
    for xi in f.domain().chain(g.domain()) {
        let fx = f.value(xi);
        if fx.iter().any(|v| g.contains(xi, v)) {
            coincidence.insert(xi.clone());
        }
    }
    let distance_estimate = dist_point_set(f.domain_space(), x, &coincidence)?;
    for y in g.value(x) {
        let lhs = match (f.inverse_fiber(&y), g.inverse_fiber(&y)) {
            (Some(fs), Some(gs)) => {
                let both: Vec<&Point> = fs.intersection(gs).collect();
                dist_point_set(f.domain_space(), x, both.into_iter())?
            }
            _ => ExtReal::Inf,
        };
        let rhs = scale_rat(kappa, &fiber_dist(f, x, &y)?);
        if lhs > rhs {
            return Ok(CoincidenceReport {
                verdict: Verdict::fail(Witness {
                    x: x.clone(),
                    y,
                    extra: alloc::vec![],
                    lhs,
                    rhs,
                }),
                coincidence_set: coincidence.into_iter().collect(),
                distance_estimate,
            });
        }
    }
    Ok(CoincidenceReport {
        verdict: Verdict::pass(),
        coincidence_set: coincidence.into_iter().collect(),
        distance_estimate,
    })
}

/// Largest finite ratio list used by the modulus property tests.
pub fn ratio_spectrum(f: &SetValuedMap, w: &Window) -> Result<Vec<ExtReal>> {
    let mut out = Vec::new();
    for (x, y) in w.pairs() {
        let rhs = fiber_dist(f, x, y)?;
        let lhs = inverse_dist(f, x, y)?;
        match &rhs {
            ExtReal::Finite(r) if !r.is_zero() => out.push(crate::extnum::ratio_over(&lhs, r)),
            ExtReal::Inf if lhs.is_inf() => out.push(ExtReal::Inf),
            _ => {}
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rint};
    use num_traits::Signed;

    fn pt(n: i64, d: i64) -> Point {
        Point::scalar(rat(n, d))
    }

    fn grid(lo: (i64, i64), hi: (i64, i64), step: (i64, i64)) -> Vec<Point> {
        // strictly inside the open interval (lo, hi)
        let lo = rat(lo.0, lo.1);
        let hi = rat(hi.0, hi.1);
        let h = rat(step.0, step.1);
        let mut out = Vec::new();
        let mut k = 1i64;
        loop {
            let v = &h * rint(k);
            if v >= hi {
                break;
            }
            out.push(Point::scalar(v));
            k += 1;
        }
        let mut k = 0i64;
        loop {
            let v = &h * rint(k);
            if v <= lo {
                break;
            }
            out.push(Point::scalar(v.clone()));
            k -= 1;
        }
        out.sort();
        out
    }

    /// F(x) = {x, -1} on the sampled points.
    fn two_lines(xs: &[Point]) -> SetValuedMap {
        let pairs = xs
            .iter()
            .flat_map(|x| [(x.clone(), x.clone()), (x.clone(), Point::scalar(rint(-1)))]);
        SetValuedMap::new(Space::line(), Space::line(), pairs).unwrap()
    }

    #[test]
    fn regular_passes_on_narrow_two_lines_window() {
        let xs = grid((-1, 4), (1, 4), (1, 20));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &xs);
        assert!(check_regular(&f, &w, &rint(1)).unwrap().holds);
    }

    #[test]
    fn regular_fails_on_wide_two_lines_window_with_kappa_two() {
        let xs = grid((-1, 1), (1, 1), (1, 100));
        let ys = grid((-3, 4), (3, 4), (1, 100));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &ys);
        let verdict = check_regular(&f, &w, &rint(2)).unwrap();
        assert!(!verdict.holds);
        // brute-force oracle: the ratio at y = -(beta - h) already exceeds 2
        let y = rat(-74, 100);
        let ratio = rat(74, 100) / (rint(1) + &y);
        assert!(ratio > rint(2));
    }

    #[test]
    fn regular_vacuous_on_empty_window() {
        let xs = grid((-1, 4), (1, 4), (1, 20));
        let f = two_lines(&xs);
        assert!(check_regular(&f, &Window::default(), &rint(1)).unwrap().holds);
    }

    #[test]
    fn kappa_zero_rejected() {
        let xs = grid((-1, 4), (1, 4), (1, 20));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &xs);
        assert!(check_regular(&f, &w, &rint(0)).is_err());
    }

    #[test]
    fn restricted_vacuous_when_intersection_empty() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &xs);
        let v: BTreeSet<Point> = [pt(9, 1)].into();
        assert!(check_restricted_regular(&f, &w, &v, &rint(1)).unwrap().holds);
    }

    #[test]
    fn restricted_passes_with_unit_constant_inside_unit_band() {
        // V = (-1/2, 1/2); window (-1, 1) x (-3/4, 3/4)
        let xs = grid((-1, 1), (1, 1), (1, 20));
        let ys = grid((-3, 4), (3, 4), (1, 20));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &ys);
        let v: BTreeSet<Point> = grid((-1, 2), (1, 2), (1, 20)).into_iter().collect();
        assert!(check_restricted_regular(&f, &w, &v, &rint(1)).unwrap().holds);
    }

    #[test]
    fn regular_implies_restricted_for_every_v() {
        let xs = grid((-1, 4), (1, 4), (1, 8));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &xs);
        assert!(check_regular(&f, &w, &rint(1)).unwrap().holds);
        for v_r in [rat(1, 8), rat(1, 4), rint(1)] {
            let v: BTreeSet<Point> = xs
                .iter()
                .filter(|p| p.as_scalar().unwrap().abs() < v_r)
                .cloned()
                .collect();
            assert!(check_restricted_regular(&f, &w, &v, &rint(1)).unwrap().holds);
        }
    }

    #[test]
    fn modulus_is_one_on_narrow_window() {
        let xs = grid((-1, 4), (1, 4), (1, 20));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &xs);
        let report = regularity_modulus(&f, &w).unwrap();
        assert_eq!(report.modulus, ExtReal::Finite(rint(1)));
    }

    #[test]
    fn modulus_zero_when_all_pairs_on_graph() {
        let xs = grid((-1, 4), (1, 4), (1, 20));
        let f = two_lines(&xs);
        let pairs = xs.iter().map(|x| (x.clone(), x.clone()));
        let w = Window::from_pairs(pairs);
        let report = regularity_modulus(&f, &w).unwrap();
        assert_eq!(report.modulus, ExtReal::zero());
        assert!(report.attained_at.is_none());
    }

    #[test]
    fn modulus_matches_grid_ratio_on_wide_window() {
        let xs = grid((-1, 1), (1, 1), (1, 100));
        let ys = grid((-3, 4), (3, 4), (1, 100));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &ys);
        let report = regularity_modulus(&f, &w).unwrap();
        // oracle: sup of |x - y| / (y + 1) over the grid, attained at the
        // extreme pair (1 - h, -(3/4 - h))
        let expected = (rat(99, 100) + rat(74, 100)) / rat(26, 100);
        assert_eq!(report.modulus, ExtReal::Finite(expected));
        let (x, y) = report.attained_at.unwrap();
        assert_eq!(x, pt(99, 100));
        assert_eq!(y, pt(-74, 100));
        // lower bound from the one-parameter family |y| / (y + 1)
        assert!(report.modulus >= ExtReal::Finite(rat(74, 26)));
    }

    #[test]
    fn gamma_infinite_gauge_equals_plain_regularity() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let ys = grid((-3, 4), (3, 4), (1, 10));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &ys);
        let gamma = GammaFunction::Constant(ExtReal::Inf);
        for kappa in [rint(1), rint(2), rint(4)] {
            let a = check_gamma_regular(&f, &w, &gamma, &kappa, &GammaVariant::A, &xs).unwrap();
            let b = check_regular(&f, &w, &kappa).unwrap();
            assert_eq!(a.holds, b.holds);
        }
    }

    #[test]
    fn gamma_variant_a_implies_variant_b_with_reciprocal_delta() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let ys = grid((-2, 4), (2, 4), (1, 10));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &ys);
        let gamma = GammaFunction::Constant(ExtReal::Finite(rat(1, 4)));
        let kappa = rint(1);
        let a = check_gamma_regular(&f, &w, &gamma, &kappa, &GammaVariant::A, &xs).unwrap();
        assert!(a.holds);
        for delta in [rat(1, 4), rat(1, 2), rint(1)] {
            // any delta <= 1/kappa
            let b =
                check_gamma_regular(&f, &w, &gamma, &kappa, &GammaVariant::B(delta), &xs).unwrap();
            assert!(b.holds);
        }
    }

    #[test]
    fn gamma_tiny_gauge_is_vacuous() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &xs);
        let gamma = GammaFunction::Constant(ExtReal::Finite(rat(1, 1000)));
        let sub = gamma_sub_window(&f, &w, &gamma, &rint(1), &GammaVariant::A, &xs).unwrap();
        // only on-graph pairs survive such a small gauge
        assert!(sub
            .pairs()
            .iter()
            .all(|(x, y)| f.contains(x, y)));
    }

    #[test]
    fn gamma_rejects_nonpositive_gauge() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &xs);
        let gamma = GammaFunction::Constant(ExtReal::zero());
        assert!(check_gamma_regular(&f, &w, &gamma, &rint(1), &GammaVariant::A, &xs).is_err());
    }

    #[test]
    fn milyutin_gauge_on_ball_window_is_radius_minus_distance() {
        // W_X = open ball of radius 1/4 on the grid; gauge at u is
        // 1/4 - |u| exactly because the complement starts on the grid.
        let ambient = grid((-1, 1), (1, 1), (1, 20));
        let w_x: BTreeSet<Point> = ambient
            .iter()
            .filter(|p| p.as_scalar().unwrap().abs() < rat(1, 4))
            .cloned()
            .collect();
        let gamma = GammaFunction::Milyutin;
        let space = Space::line();
        for u in &w_x {
            let g = gamma.eval(&space, &ambient, &w_x, u).unwrap();
            let expected = rat(1, 4) - u.as_scalar().unwrap().abs();
            assert_eq!(g, ExtReal::Finite(expected));
        }
    }

    #[test]
    fn milyutin_with_full_projection_equals_plain_regularity() {
        let xs = grid((-1, 4), (1, 4), (1, 20));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &xs);
        let v = check_milyutin(&f, &w, &rint(1), &GammaVariant::A, &xs).unwrap();
        let plain = check_regular(&f, &w, &rint(1)).unwrap();
        assert_eq!(v.holds, plain.holds);
    }

    #[test]
    fn semiregular_identity_passes() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let id = SetValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().map(|x| (x.clone(), x.clone())),
        )
        .unwrap();
        let x_bar = Point::scalar(rint(0));
        let lambda: BTreeSet<Point> = [x_bar.clone()].into();
        let v = check_semiregular(&id, &x_bar, &xs, &lambda, &rint(1)).unwrap();
        assert!(v.holds);
    }

    #[test]
    fn semiregular_rejects_lambda_outside_fiber() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let f = two_lines(&xs);
        let x_bar = Point::scalar(rint(0));
        let lambda: BTreeSet<Point> = [pt(1, 10)].into();
        assert!(check_semiregular(&f, &x_bar, &xs, &lambda, &rint(1)).is_err());
    }

    #[test]
    fn semiregular_trivial_when_gamma_inside_lambda() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let f = two_lines(&xs);
        let x_bar = Point::scalar(rint(0));
        let lambda = f.value(&x_bar);
        let gamma: Vec<Point> = lambda.iter().cloned().collect();
        let v = check_semiregular(&f, &x_bar, &gamma, &lambda, &rint(1)).unwrap();
        assert!(v.holds);
    }

    #[test]
    fn aubin_constant_fibers_pass_any_ell() {
        let xs = grid((-1, 1), (1, 1), (1, 10));
        let g = SetValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().flat_map(|x| {
                [(x.clone(), Point::scalar(rint(0))), (x.clone(), Point::scalar(rint(1)))]
            }),
        )
        .unwrap();
        let v_all: BTreeSet<Point> = [Point::scalar(rint(0)), Point::scalar(rint(1))].into();
        for ell in [rat(1, 10), rint(1)] {
            assert!(check_aubin(&g, &xs, &v_all, &ell).unwrap().holds);
        }
    }

    #[test]
    fn aubin_identity_needs_ell_at_least_one() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let id = SetValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().map(|x| (x.clone(), x.clone())),
        )
        .unwrap();
        let v_all: BTreeSet<Point> = xs.iter().cloned().collect();
        assert!(check_aubin(&id, &xs, &v_all, &rint(1)).unwrap().holds);
        let fail = check_aubin(&id, &xs, &v_all, &rat(1, 2)).unwrap();
        assert!(!fail.holds);
        assert!(fail.witness.is_some());
    }

    #[test]
    fn aubin_singleton_u_passes() {
        let xs = [pt(0, 1)];
        let id = SetValuedMap::new(Space::line(), Space::line(), [(pt(0, 1), pt(0, 1))]).unwrap();
        let v_all: BTreeSet<Point> = [pt(0, 1)].into();
        assert!(check_aubin(&id, &xs, &v_all, &rat(1, 100)).unwrap().holds);
    }

    #[test]
    fn lipschitz_check_cases() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let half = SingleValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter()
                .map(|x| (x.clone(), Point::scalar(x.as_scalar().unwrap() / rint(2)))),
        )
        .unwrap();
        assert!(lipschitz_check(&half, &xs, &rat(1, 2)).unwrap().holds);
        let idm = SingleValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().map(|x| (x.clone(), x.clone())),
        )
        .unwrap();
        assert!(!lipschitz_check(&idm, &xs, &rat(1, 2)).unwrap().holds);
        let constant = SingleValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().map(|x| (x.clone(), Point::scalar(rint(3)))),
        )
        .unwrap();
        assert!(lipschitz_check(&constant, &xs, &rat(1, 100)).unwrap().holds);
    }

    #[test]
    fn sum_stable_fails_on_two_lines_plus_step() {
        // F(x) = {x, -1}, G(x) = {0, 1}: v = 1 + x near 0 decomposes only
        // with a component at distance >= 1/2 from the reference pair.
        let xs = grid((-1, 4), (1, 4), (1, 20));
        let f = two_lines(&xs);
        let g = SetValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().flat_map(|x| {
                [(x.clone(), Point::scalar(rint(0))), (x.clone(), Point::scalar(rint(1)))]
            }),
        )
        .unwrap();
        let zero = Point::scalar(rint(0));
        let report = check_sum_stable(
            &f,
            &g,
            (&zero, &zero, &zero),
            &[(rat(1, 8), rat(1, 2))],
        )
        .unwrap();
        assert!(!report.verdict.holds);
        assert_eq!(report.failed_level, Some((rat(1, 8), rat(1, 2))));
    }

    #[test]
    fn sum_stable_single_valued_part_forces_decomposition() {
        let xs = grid((-1, 4), (1, 4), (1, 20));
        let f = two_lines(&xs);
        // G single-valued: fiber {x/2}
        let g = SetValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter()
                .map(|x| (x.clone(), Point::scalar(x.as_scalar().unwrap() / rint(2)))),
        )
        .unwrap();
        let zero = Point::scalar(rint(0));
        // beta must cover max |x/2| over the alpha-ball
        let report = check_sum_stable(
            &f,
            &g,
            (&zero, &zero, &zero),
            &[(rat(1, 8), rat(1, 4))],
        )
        .unwrap();
        assert!(report.verdict.holds);
    }

    #[test]
    fn sum_stable_vacuous_levels() {
        let xs = grid((-1, 4), (1, 4), (1, 20));
        let f = two_lines(&xs);
        let g = f.clone();
        let zero = Point::scalar(rint(0));
        let report = check_sum_stable(&f, &g, (&zero, &zero, &zero), &[]).unwrap();
        assert!(report.verdict.holds);
    }

    #[test]
    fn sum_stable_rejects_bad_center() {
        let xs = grid((-1, 4), (1, 4), (1, 20));
        let f = two_lines(&xs);
        let g = f.clone();
        let zero = Point::scalar(rint(0));
        let off = Point::scalar(rat(1, 3));
        assert!(check_sum_stable(&f, &g, (&zero, &off, &zero), &[]).is_err());
    }

    #[test]
    fn strong_regularity_implies_plain() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let id = SetValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().map(|x| (x.clone(), x.clone())),
        )
        .unwrap();
        let w = Window::from_pairs(xs.iter().map(|x| (x.clone(), x.clone())));
        assert!(check_strong_regular(&id, &w, &rint(1)).unwrap().holds);
        assert!(check_regular(&id, &w, &rint(1)).unwrap().holds);
    }

    #[test]
    fn strong_fails_where_plain_passes_when_section_misses_solutions() {
        // three-point instance: the solution of y0 exists but lies outside
        // the section of the window at y0
        let space = Space::line();
        let a = pt(0, 1);
        let b = pt(1, 1);
        let y0 = pt(5, 1);
        let f = SetValuedMap::new(
            space.clone(),
            space,
            [(a.clone(), pt(4, 1)), (b.clone(), y0.clone())],
        )
        .unwrap();
        let w = Window::from_pairs([(a.clone(), y0.clone())]);
        // plain: dist(a, {b}) = 1 <= kappa * dist(y0, F(a)) = 1 * 1
        assert!(check_regular(&f, &w, &rint(1)).unwrap().holds);
        // strong: F^{-1}(y0) ∩ W_{., y0} = {b} ∩ {a} = empty, lhs = inf
        let strong = check_strong_regular(&f, &w, &rint(1)).unwrap();
        assert!(!strong.holds);
        assert!(strong.witness.unwrap().lhs.is_inf());
    }

    #[test]
    fn coincidence_equal_maps_pass() {
        let xs = grid((-1, 2), (1, 2), (1, 10));
        let f = two_lines(&xs);
        let g = f.clone();
        let x = pt(1, 10);
        let report = coincidence_bound(&f, &g, &x, &rint(1)).unwrap();
        assert!(report.verdict.holds);
        // every sampled point is a coincidence point of F with itself
        assert_eq!(report.coincidence_set.len(), xs.len());
    }

    #[test]
    fn coincidence_identity_vs_constant() {
        let xs = grid((-1, 1), (1, 1), (1, 4));
        let id = SetValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().map(|x| (x.clone(), x.clone())),
        )
        .unwrap();
        let c = pt(1, 2);
        let g = SetValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().map(|x| (x.clone(), c.clone())),
        )
        .unwrap();
        let x = pt(-1, 4);
        let report = coincidence_bound(&id, &g, &x, &rint(1)).unwrap();
        assert!(report.verdict.holds);
        assert_eq!(report.coincidence_set, alloc::vec![c.clone()]);
        // dist(x, {c}) = |x - c| = inf rho(c, {x})
        assert_eq!(
            report.distance_estimate,
            ExtReal::Finite(rat(3, 4))
        );
    }

    #[test]
    fn coincidence_empty_f_fiber_passes() {
        let xs = [pt(0, 1)];
        let f = SetValuedMap::empty(Space::line(), Space::line());
        let g = SetValuedMap::new(
            Space::line(),
            Space::line(),
            xs.iter().map(|x| (x.clone(), pt(1, 1))),
        )
        .unwrap();
        let report = coincidence_bound(&f, &g, &pt(0, 1), &rint(1)).unwrap();
        assert!(report.verdict.holds);
        assert!(report.coincidence_set.is_empty());
    }

    #[test]
    fn modulus_monotone_in_window() {
        let xs = grid((-1, 1), (1, 1), (1, 10));
        let ys_small = grid((-1, 4), (1, 4), (1, 10));
        let ys_big = grid((-3, 4), (3, 4), (1, 10));
        let f = two_lines(&xs);
        let small = regularity_modulus(&f, &Window::product(&xs, &ys_small)).unwrap();
        let big = regularity_modulus(&f, &Window::product(&xs, &ys_big)).unwrap();
        assert!(small.modulus <= big.modulus);
    }

    #[test]
    fn modulus_separates_pass_and_fail() {
        let xs = grid((-1, 1), (1, 1), (1, 10));
        let ys = grid((-3, 4), (3, 4), (1, 10));
        let f = two_lines(&xs);
        let w = Window::product(&xs, &ys);
        let report = regularity_modulus(&f, &w).unwrap();
        let ExtReal::Finite(m) = &report.modulus else { panic!("finite expected") };
        // exact threshold behavior
        assert!(check_regular(&f, &w, m).unwrap().holds);
        let spectrum = ratio_spectrum(&f, &w).unwrap();
        let below = spectrum.iter().rev().find(|r| *r < &report.modulus);
        if let Some(ExtReal::Finite(second)) = below {
            let kappa_mid = (second + m) / rint(2);
            let verdict = check_regular(&f, &w, &kappa_mid).unwrap();
            assert!(!verdict.holds);
            // the reported witness attains the modulus
            let w_att = verdict.witness.unwrap();
            assert_eq!((w_att.x, w_att.y), report.attained_at.unwrap());
        }
    }
}
