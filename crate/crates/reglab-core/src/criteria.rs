//! Hypothesis checkers for the variational sufficient conditions for
//! (restricted, gauge-controlled, semi-) regularity, together with the
//! soundness harness that confirms hypothesis => conclusion on finite
//! instances by delegating the conclusion to the definition-level
//! checkers.
//!
//! Each checker enumerates the qualifying configurations of its
//! statement and searches exhaustively for the required better point.
//! Constraints mix strict and non-strict comparisons; they are
//! evaluated in exact arithmetic, rearranged additively so no negative
//! quantities arise.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::extnum::{scale_rat, ExtReal};
use crate::maps::{SetValuedMap, SingleValuedMap};
use crate::point::Point;
use crate::rat::Rat;
use crate::regularity::{
    check_gamma_regular, check_regular, check_restricted_regular, check_semiregular,
    GammaFunction, GammaVariant, Window,
};
use crate::spaces::{ProductKind, ProductSpace, Space};
use crate::verdict::Verdict;

/// Which constant parameterizes the sum product-metric in the
/// distance-to-graph criteria. The statement carries two constants and
/// names only one metric; the smaller constant gives the reading under
/// which the hypothesis provably implies the conclusion, so it is the
/// default. The larger-constant reading stays selectable for
/// comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OmegaParam {
    #[default]
    Kappa,
    KappaHat,
}

/// A qualifying configuration with no admissible better point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailingConfig {
    pub u: Point,
    /// Fiber component of the stuck pair, for graph-metric criteria.
    pub v: Option<Point>,
    pub y: Point,
    /// The window point that made the configuration qualify.
    pub x: Point,
    pub v_tilde: Option<Point>,
    /// Value of the descent quantity at the stuck configuration.
    pub value: ExtReal,
    /// Qualifying bound it satisfied.
    pub bound: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionReport {
    pub hypothesis_holds: bool,
    /// True when no configuration qualifies, so the hypothesis holds
    /// for lack of test cases.
    pub vacuous: bool,
    pub qualifying_count: usize,
    pub failing: Option<FailingConfig>,
    /// Definition-level verdict with the same constants, when requested.
    pub conclusion: Option<Verdict>,
    /// Whether hypothesis_holds implies the conclusion holds; `None`
    /// until the conclusion is computed.
    pub sound: Option<bool>,
}

impl CriterionReport {
    fn finish(
        qualifying_count: usize,
        failing: Option<FailingConfig>,
        conclusion: Option<Verdict>,
    ) -> Self {
        let hypothesis_holds = failing.is_none();
        let sound = conclusion.as_ref().map(|c| !hypothesis_holds || c.holds);
        CriterionReport {
            hypothesis_holds,
            vacuous: qualifying_count == 0,
            qualifying_count,
            failing,
            conclusion,
            sound,
        }
    }
}

fn require_positive(name: &str, v: &Rat) -> Result<()> {
    if v <= &Rat::zero() {
        return Err(Error::domain(alloc::format!("{name} must be positive")));
    }
    Ok(())
}

/// Criterion for a single-valued mapping: every point whose residual
/// can still be charged against some window point must admit a
/// strictly better point.
pub fn criterion_single(
    g: &SingleValuedMap,
    w: &Window,
    v_set: &BTreeSet<Point>,
    kappa: &Rat,
    check_conclusion: bool,
) -> Result<CriterionReport> {
    require_positive("kappa", kappa)?;
    let w_x = w.project_x();
    let reaches_v = w_x
        .iter()
        .any(|x| g.value(x).map(|gx| v_set.contains(gx)).unwrap_or(false));
    if !reaches_v {
        return Err(Error::precondition("g(W_X) must meet V"));
    }
    let dx = g.domain_space();
    let dy = g.target_space();
    let points: Vec<&Point> = g.domain().collect();
    let mut qualifying = 0usize;
    let mut failing: Option<FailingConfig> = None;

    'outer: for (y, xs) in w.sections_by_y() {
        for u in &points {
            let gu = g.value(u)?;
            let value = ExtReal::Finite(kappa * dy.distance(&y, gu)?);
            if value.is_zero() {
                continue;
            }
            let mut qualifier: Option<(&Point, ExtReal)> = None;
            for x in &xs {
                let gx = g.value(x)?;
                if !v_set.contains(gx) {
                    continue;
                }
                let bound = ExtReal::Finite(kappa * dy.distance(&y, gx)?);
                let charged = value.clone() + ExtReal::Finite(dx.distance(u, x)?);
                if charged <= bound {
                    qualifier = Some((x, bound));
                    break;
                }
            }
            let Some((x, bound)) = qualifier else { continue };
            qualifying += 1;
            let mut improved = false;
            for cand in &points {
                let res = dy.distance(&y, g.value(cand)?)?;
                let step = dx.distance(cand, u)?;
                if ExtReal::Finite(kappa * res + step) < value {
                    improved = true;
                    break;
                }
            }
            if !improved {
                failing = Some(FailingConfig {
                    u: (*u).clone(),
                    v: None,
                    y: y.clone(),
                    x: x.clone(),
                    v_tilde: None,
                    value,
                    bound,
                });
                break 'outer;
            }
        }
    }

    let conclusion = if check_conclusion {
        Some(check_restricted_regular(&g.as_set_valued(), w, v_set, kappa)?)
    } else {
        None
    };
    Ok(CriterionReport::finish(qualifying, failing, conclusion))
}

/// Graph-projection criterion for restricted regularity, run in the
/// max product metric scaled by lambda on the target side.
pub fn criterion_graph_restricted(
    f: &SetValuedMap,
    w: &Window,
    v_set: &BTreeSet<Point>,
    kappa: &Rat,
    lambda: &Rat,
    check_conclusion: bool,
) -> Result<CriterionReport> {
    require_positive("kappa", kappa)?;
    require_positive("lambda", lambda)?;
    if lambda >= kappa {
        return Err(Error::precondition("lambda must be strictly below kappa"));
    }
    let w_x = w.project_x();
    let reaches_v = w_x
        .iter()
        .any(|x| f.value(x).iter().any(|p| v_set.contains(p)));
    if !reaches_v {
        return Err(Error::precondition("F(W_X) must meet V"));
    }
    let dx = f.domain_space();
    let dy = f.target_space();
    let xi = |a: (&Point, &Point), b: (&Point, &Point)| -> Result<Rat> {
        let d = dx.distance(a.0, b.0)?;
        let r = dy.distance(a.1, b.1)?;
        Ok(core::cmp::max(d, lambda * r))
    };
    let graph: Vec<&(Point, Point)> = f.graph().iter().collect();
    let mut qualifying = 0usize;
    let mut failing: Option<FailingConfig> = None;

    'outer: for (y, xs) in w.sections_by_y() {
        for (u, v) in &graph {
            let value = ExtReal::Finite(kappa * dy.distance(&y, v)?);
            if value.is_zero() {
                continue;
            }
            let mut qualifier: Option<(Point, Point, ExtReal)> = None;
            'search: for x in &xs {
                for v_tilde in f.value(x).iter().filter(|p| v_set.contains(*p)) {
                    let bound = ExtReal::Finite(kappa * dy.distance(&y, v_tilde)?);
                    let charged = value.clone() + ExtReal::Finite(xi((u, v), (x, v_tilde))?);
                    if charged <= bound {
                        qualifier = Some((x.clone(), v_tilde.clone(), bound));
                        break 'search;
                    }
                }
            }
            let Some((x, v_tilde, bound)) = qualifier else { continue };
            qualifying += 1;
            let mut improved = false;
            for (uc, vc) in &graph {
                let res = dy.distance(&y, vc)?;
                let step = xi((uc, vc), (u, v))?;
                if ExtReal::Finite(kappa * res + step) < value {
                    improved = true;
                    break;
                }
            }
            if !improved {
                failing = Some(FailingConfig {
                    u: u.clone(),
                    v: Some(v.clone()),
                    y: y.clone(),
                    x,
                    v_tilde: Some(v_tilde),
                    value,
                    bound,
                });
                break 'outer;
            }
        }
    }

    let conclusion = if check_conclusion {
        Some(check_restricted_regular(f, w, v_set, kappa)?)
    } else {
        None
    };
    Ok(CriterionReport::finish(qualifying, failing, conclusion))
}

/// Graph-projection criterion specialized to a frozen domain point;
/// the conclusion is the semiregularity estimate against Lambda.
pub fn criterion_semireg_graph(
    f: &SetValuedMap,
    x_bar: &Point,
    gamma_set: &[Point],
    lambda_set: &BTreeSet<Point>,
    kappa: &Rat,
    lambda: &Rat,
    check_conclusion: bool,
) -> Result<CriterionReport> {
    if !lambda_set.is_subset(&f.value(x_bar)) {
        return Err(Error::input("Lambda must be contained in F(xbar)"));
    }
    let w = Window::product(core::slice::from_ref(x_bar), gamma_set);
    let mut report = criterion_graph_restricted(f, &w, lambda_set, kappa, lambda, false)?;
    if check_conclusion {
        let conclusion = check_semiregular(f, x_bar, gamma_set, lambda_set, kappa)?;
        report.sound = Some(!report.hypothesis_holds || conclusion.holds);
        report.conclusion = Some(conclusion);
    }
    Ok(report)
}

fn omega_scale(kappa: &Rat, kappa_hat: &Rat, param: OmegaParam) -> Rat {
    match param {
        OmegaParam::Kappa => kappa.clone(),
        OmegaParam::KappaHat => kappa_hat.clone(),
    }
}

/// dist((u, y), gph F) in the sum product metric with the given
/// Y-scale; infinite when the graph is empty.
fn graph_distance(f: &SetValuedMap, u: &Point, y: &Point, y_scale: &Rat) -> Result<ExtReal> {
    let dx = f.domain_space();
    let dy = f.target_space();
    let mut best: Option<Rat> = None;
    for (p, q) in f.graph() {
        let d = dx.distance(u, p)? + y_scale * dy.distance(y, q)?;
        best = Some(match best {
            Some(b) => b.min(d),
            None => d,
        });
    }
    Ok(best.map_or(ExtReal::Inf, ExtReal::Finite))
}

/// Distance-to-graph criterion for plain regularity with the constant
/// kappa_hat on W.
#[allow(clippy::too_many_arguments)]
pub fn criterion_dist_graph(
    f: &SetValuedMap,
    w: &Window,
    kappa: &Rat,
    kappa_hat: &Rat,
    param: OmegaParam,
    ambient_x: &[Point],
    check_conclusion: bool,
) -> Result<CriterionReport> {
    require_positive("kappa", kappa)?;
    if kappa_hat < kappa {
        return Err(Error::precondition("kappa_hat must be at least kappa"));
    }
    let y_scale = omega_scale(kappa, kappa_hat, param);
    let slope = kappa / kappa_hat;
    let dx = f.domain_space();
    let mut qualifying = 0usize;
    let mut failing: Option<FailingConfig> = None;

    'outer: for (y, xs) in w.sections_by_y() {
        // graph distance per u, shared by qualification and search
        let mut phi: BTreeMap<&Point, ExtReal> = BTreeMap::new();
        for u in ambient_x {
            phi.insert(u, graph_distance(f, u, &y, &y_scale)?);
        }
        for u in ambient_x {
            let value = phi[u].clone();
            if value.is_zero() {
                continue;
            }
            let mut qualifier: Option<(&Point, ExtReal)> = None;
            for x in &xs {
                let fiber = f.value(x);
                let residual = crate::spaces::dist_point_set(f.target_space(), &y, &fiber)?;
                let bound = scale_rat(kappa, &residual);
                let charged = value.clone() + ExtReal::Finite(&slope * dx.distance(u, x)?);
                if charged <= bound {
                    qualifier = Some((x, bound));
                    break;
                }
            }
            let Some((x, bound)) = qualifier else { continue };
            qualifying += 1;
            let mut improved = false;
            for cand in ambient_x {
                let step = dx.distance(cand, u)?;
                if phi[cand].clone() + ExtReal::Finite(&slope * step) < value {
                    improved = true;
                    break;
                }
            }
            if !improved {
                failing = Some(FailingConfig {
                    u: u.clone(),
                    v: None,
                    y: y.clone(),
                    x: x.clone(),
                    v_tilde: None,
                    value,
                    bound,
                });
                break 'outer;
            }
        }
    }

    let conclusion = if check_conclusion {
        Some(check_regular(f, w, kappa_hat)?)
    } else {
        None
    };
    Ok(CriterionReport::finish(qualifying, failing, conclusion))
}

/// Distance-to-graph criterion for gauge-controlled regularity.
#[allow(clippy::too_many_arguments)]
pub fn criterion_gamma_graph(
    f: &SetValuedMap,
    w: &Window,
    gamma: &GammaFunction,
    kappa: &Rat,
    kappa_hat: &Rat,
    param: OmegaParam,
    ambient_x: &[Point],
    check_conclusion: bool,
) -> Result<CriterionReport> {
    require_positive("kappa", kappa)?;
    if kappa_hat < kappa {
        return Err(Error::precondition("kappa_hat must be at least kappa"));
    }
    let w_x = w.project_x();
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
    let y_scale = omega_scale(kappa, kappa_hat, param);
    let slope = kappa / kappa_hat;
    let dx = f.domain_space();
    let mut qualifying = 0usize;
    let mut failing: Option<FailingConfig> = None;

    'outer: for (y, xs) in w.sections_by_y() {
        let mut phi: BTreeMap<&Point, ExtReal> = BTreeMap::new();
        for u in ambient_x {
            phi.insert(u, graph_distance(f, u, &y, &y_scale)?);
        }
        for u in ambient_x {
            let value = phi[u].clone();
            if value.is_zero() {
                continue;
            }
            // qualifying: kappa_hat * phi(u) + kappa * d(u, x) < kappa * gamma(x)
            let mut qualifier: Option<(&Point, ExtReal)> = None;
            for x in &xs {
                let g = gamma.eval(dx, ambient_x, &w_x, x)?;
                let bound = scale_rat(kappa, &g);
                let charged =
                    scale_rat(kappa_hat, &value) + ExtReal::Finite(kappa * dx.distance(u, x)?);
                if charged < bound {
                    qualifier = Some((x, bound));
                    break;
                }
            }
            let Some((x, bound)) = qualifier else { continue };
            qualifying += 1;
            let mut improved = false;
            for cand in ambient_x {
                let step = dx.distance(cand, u)?;
                if phi[cand].clone() + ExtReal::Finite(&slope * step) < value {
                    improved = true;
                    break;
                }
            }
            if !improved {
                failing = Some(FailingConfig {
                    u: u.clone(),
                    v: None,
                    y: y.clone(),
                    x: x.clone(),
                    v_tilde: None,
                    value,
                    bound,
                });
                break 'outer;
            }
        }
    }

    let conclusion = if check_conclusion {
        Some(check_gamma_regular(f, w, gamma, kappa_hat, &GammaVariant::A, ambient_x)?)
    } else {
        None
    };
    Ok(CriterionReport::finish(qualifying, failing, conclusion))
}

/// Distance-to-graph criterion specialized to a frozen domain point;
/// the conclusion is semiregularity against the whole fiber at xbar.
#[allow(clippy::too_many_arguments)]
pub fn criterion_semireg_dist(
    f: &SetValuedMap,
    x_bar: &Point,
    gamma_set: &[Point],
    kappa: &Rat,
    kappa_hat: &Rat,
    param: OmegaParam,
    ambient_x: &[Point],
    check_conclusion: bool,
) -> Result<CriterionReport> {
    if f.fiber(x_bar).is_none() {
        return Err(Error::precondition("xbar must lie in dom F"));
    }
    let w = Window::product(core::slice::from_ref(x_bar), gamma_set);
    let mut report = criterion_dist_graph(f, &w, kappa, kappa_hat, param, ambient_x, false)?;
    if check_conclusion {
        let lambda_set = f.value(x_bar);
        let conclusion = check_semiregular(f, x_bar, gamma_set, &lambda_set, kappa_hat)?;
        report.sound = Some(!report.hypothesis_holds || conclusion.holds);
        report.conclusion = Some(conclusion);
    }
    Ok(report)
}

/// The truncated auxiliary mapping on the graph of G used by the sum
/// perturbation argument: E(x, w) = F(x) ∩ B[zbar, delta] + w for x in
/// B[xbar, alpha] and w in G(x) ∩ B[wbar, beta], empty otherwise. Its
/// domain carries the max metric with the second component scaled by
/// 1/ell.
pub fn epigraphical(
    f: &SetValuedMap,
    g: &SetValuedMap,
    center: (&Point, &Point, &Point),
    radii: (&Rat, &Rat, &Rat),
    ell: &Rat,
) -> Result<SetValuedMap> {
    let (x_bar, z_bar, w_bar) = center;
    let (alpha, beta, delta) = radii;
    require_positive("ell", ell)?;
    if !f.target_space().is_linear() {
        return Err(Error::type_error("epigraphical construction requires a linear target"));
    }
    if !f.contains(x_bar, z_bar) {
        return Err(Error::input("zbar must lie in F(xbar)"));
    }
    if !g.contains(x_bar, w_bar) {
        return Err(Error::input("wbar must lie in G(xbar)"));
    }
    let dx = f.domain_space();
    let dy = f.target_space();
    let inv_ell = Rat::new(ell.denom().clone(), ell.numer().clone());
    let domain = Space::Product(ProductSpace::new(
        dx.clone(),
        dy.clone(),
        ProductKind::MaxScaled(inv_ell),
    )?);
    let mut pairs = Vec::new();
    for (x, w) in g.graph() {
        if dx.distance(x, x_bar)? > *alpha || dy.distance(w, w_bar)? > *beta {
            continue;
        }
        for z in f.value(x) {
            if dy.distance(&z, z_bar)? > *delta {
                continue;
            }
            pairs.push((Point::pair(x.clone(), w.clone()), crate::point::add_points(&z, w)?));
        }
    }
    SetValuedMap::new(domain, dy.clone(), pairs)
}
