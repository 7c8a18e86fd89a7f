//! Constant arithmetic and end-to-end validation for the perturbation
//! stability statements: derive the windows and constants of each
//! theorem, check its hypotheses on a finite instance, and verify the
//! conclusion with the definition-level checkers.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::extnum::{scale_rat, ExtReal};
use crate::maps::{SetValuedMap, SingleValuedMap};
use crate::point::{sub_points, Point};
use crate::rat::{rint, Rat};
use crate::regularity::{
    check_aubin, check_gamma_regular, check_milyutin, check_regular, check_restricted_regular,
    gauge_lipschitz1, lipschitz_check, GammaFunction, GammaVariant, Window,
};
use crate::spaces::{ball, diameter, dist_point_set, Space};
use crate::verdict::{Verdict, Witness};

/// Selector for the perturbation statements and the window-shrink
/// conversions; the string forms are the CLI tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremId {
    Susvp,
    EpigraphGlobal,
    Acn,
    Graves5g3,
    SumStable,
    Psonw,
    Milyutin,
    SemilocalB,
    AcnB,
    SumStableB,
    ShrinkRestricted,
    ShrinkSubwindow,
}

impl TheoremId {
    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::Susvp => "susvp",
            TheoremId::EpigraphGlobal => "epigraph-global",
            TheoremId::Acn => "acn",
            TheoremId::Graves5g3 => "graves5g3",
            TheoremId::SumStable => "sumstable",
            TheoremId::Psonw => "psonw",
            TheoremId::Milyutin => "milyutin",
            TheoremId::SemilocalB => "semilocal-b",
            TheoremId::AcnB => "acn-b",
            TheoremId::SumStableB => "sumstable-b",
            TheoremId::ShrinkRestricted => "shrink-restricted",
            TheoremId::ShrinkSubwindow => "shrink-subwindow",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "susvp" => TheoremId::Susvp,
            "epigraph-global" => TheoremId::EpigraphGlobal,
            "acn" => TheoremId::Acn,
            "graves5g3" => TheoremId::Graves5g3,
            "sumstable" => TheoremId::SumStable,
            "psonw" => TheoremId::Psonw,
            "milyutin" => TheoremId::Milyutin,
            "semilocal-b" => TheoremId::SemilocalB,
            "acn-b" => TheoremId::AcnB,
            "sumstable-b" => TheoremId::SumStableB,
            "shrink-restricted" => TheoremId::ShrinkRestricted,
            "shrink-subwindow" => TheoremId::ShrinkSubwindow,
            other => return Err(Error::input(alloc::format!("unknown theorem id '{other}'"))),
        })
    }
}

/// Named rational constants with theorem-specific roles. Every field
/// is optional; each derivation names what it needs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstantSet {
    pub kappa: Option<Rat>,
    pub kappa_hat: Option<Rat>,
    pub ell: Option<Rat>,
    pub lambda: Option<Rat>,
    pub a: Option<Rat>,
    pub b: Option<Rat>,
    /// Slack radius; infinity admitted.
    pub c: Option<ExtReal>,
    /// Restriction radius; infinity admitted where the statement allows.
    pub r: Option<ExtReal>,
    pub mu: Option<ExtReal>,
    pub eps: Option<Rat>,
    pub delta: Option<Rat>,
    pub alpha: Option<Rat>,
    pub beta: Option<Rat>,
    /// diam G(xbar), for the diameter-controlled corollaries.
    pub diam_g: Option<ExtReal>,
    /// rho(0, g(xbar)), for the single-valued corollary.
    pub g_norm: Option<Rat>,
    /// Outer localization radius of the around-a-point corollaries.
    pub cap_r: Option<Rat>,
    /// Sum-stability level radius of the around-a-point corollaries.
    pub alpha_hat: Option<Rat>,
}

macro_rules! need {
    ($self:ident, $field:ident) => {
        $self.$field.as_ref().ok_or_else(|| {
            Error::input(alloc::format!(
                "missing constant '{}'",
                stringify!($field)
            ))
        })
    };
}

impl ConstantSet {
    fn kappa(&self) -> Result<&Rat> {
        need!(self, kappa)
    }
    fn kappa_hat(&self) -> Result<&Rat> {
        need!(self, kappa_hat)
    }
    fn ell(&self) -> Result<&Rat> {
        need!(self, ell)
    }
    fn a(&self) -> Result<&Rat> {
        need!(self, a)
    }
    fn b(&self) -> Result<&Rat> {
        need!(self, b)
    }
    fn c(&self) -> Result<&ExtReal> {
        need!(self, c)
    }
    fn r(&self) -> Result<&ExtReal> {
        need!(self, r)
    }
    fn r_finite(&self) -> Result<&Rat> {
        match need!(self, r)? {
            ExtReal::Finite(v) => Ok(v),
            ExtReal::Inf => Err(Error::input("constant 'r' must be finite here")),
        }
    }
    fn mu(&self) -> Result<&ExtReal> {
        need!(self, mu)
    }
    fn eps(&self) -> Result<&Rat> {
        need!(self, eps)
    }
    fn delta(&self) -> Result<&Rat> {
        need!(self, delta)
    }
    fn alpha(&self) -> Result<&Rat> {
        need!(self, alpha)
    }
    fn beta(&self) -> Result<&Rat> {
        need!(self, beta)
    }
    fn diam_g(&self) -> Result<&ExtReal> {
        need!(self, diam_g)
    }
    fn cap_r(&self) -> Result<&Rat> {
        need!(self, cap_r)
    }
    fn alpha_hat(&self) -> Result<&Rat> {
        need!(self, alpha_hat)
    }

    /// Checks the admissibility inequalities shared by the stability
    /// statements: kappa * ell < 1 and kappa_hat above its lower bound.
    pub fn validate_admissible(&self) -> Result<()> {
        if let (Some(k), Some(l)) = (&self.kappa, &self.ell) {
            if k * l >= rint(1) {
                return Err(Error::domain("kappa * ell must be below 1"));
            }
            if let Some(kh) = &self.kappa_hat {
                let lower = kappa_hat_lower(k, l)?;
                if kh <= &lower {
                    return Err(Error::domain(alloc::format!(
                        "kappa_hat must exceed kappa/(1 - kappa*ell) = {}",
                        crate::rat::format_rat(&lower)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// kappa / (1 - kappa * ell), the open lower bound for the admissible
/// perturbed constant. Requires kappa * ell < 1.
pub fn kappa_hat_lower(kappa: &Rat, ell: &Rat) -> Result<Rat> {
    if kappa <= &Rat::zero() || ell <= &Rat::zero() {
        return Err(Error::domain("kappa and ell must be positive"));
    }
    let prod = kappa * ell;
    if prod >= rint(1) {
        return Err(Error::domain("kappa * ell must be below 1"));
    }
    Ok(kappa / (rint(1) - prod))
}

/// Derived values and side-condition booleans of one statement; the
/// values re-verify their defining formulas exactly.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Derivation {
    pub values: BTreeMap<String, ExtReal>,
    pub side_conditions: BTreeMap<String, bool>,
}

impl Derivation {
    fn put(&mut self, name: &str, v: ExtReal) {
        self.values.insert(String::from(name), v);
    }
    fn put_rat(&mut self, name: &str, v: Rat) {
        self.put(name, ExtReal::Finite(v));
    }
    fn side(&mut self, name: &str, ok: bool) {
        self.side_conditions.insert(String::from(name), ok);
    }
    pub fn value(&self, name: &str) -> Option<&ExtReal> {
        self.values.get(name)
    }
    pub fn rat_value(&self, name: &str) -> Option<&Rat> {
        self.values.get(name).and_then(|v| v.as_rat())
    }
    pub fn all_side_conditions_hold(&self) -> bool {
        self.side_conditions.values().all(|b| *b)
    }
}

fn positive(name: &str, v: &Rat) -> Result<()> {
    if v <= &Rat::zero() {
        return Err(Error::domain(alloc::format!("{name} must be positive")));
    }
    Ok(())
}

/// Derives the constants of the selected statement from the supplied
/// inputs and evaluates its side-condition inequalities.
pub fn derive_constants(theorem: TheoremId, inputs: &ConstantSet) -> Result<Derivation> {
    let mut out = Derivation::default();
    match theorem {
        TheoremId::Susvp => {
            let (a, b, r, c) = (inputs.a()?, inputs.b()?, inputs.r_finite()?, inputs.c()?);
            let (kappa, kappa_hat, ell) = (inputs.kappa()?, inputs.kappa_hat()?, inputs.ell()?);
            positive("a", a)?;
            positive("b", b)?;
            positive("r", r)?;
            inputs.validate_admissible()?;
            let alpha = a + kappa_hat * (b + r);
            let beta = c.clone() + ExtReal::Finite(&alpha * ell);
            let delta = beta.clone() + ExtReal::Finite(b + r);
            out.put_rat("alpha", alpha);
            out.put("beta", beta);
            out.put("delta", delta);
            out.put_rat("q_radius", core::cmp::min(r.clone(), b.clone()));
            out.put_rat("kappa_hat_lower", kappa_hat_lower(kappa, ell)?);
        }
        TheoremId::EpigraphGlobal | TheoremId::Psonw => {
            let (kappa, ell) = (inputs.kappa()?, inputs.ell()?);
            inputs.validate_admissible()?;
            let lower = kappa_hat_lower(kappa, ell)?;
            if let Ok(kh) = inputs.kappa_hat() {
                out.side("kappa_hat_admissible", kh > &lower);
            }
            out.put_rat("kappa_hat_lower", lower);
        }
        TheoremId::Acn => {
            let delta = inputs.delta()?;
            let (kappa, kappa_hat, ell) = (inputs.kappa()?, inputs.kappa_hat()?, inputs.ell()?);
            let (alpha, beta) = (inputs.alpha()?, inputs.beta()?);
            let diam = inputs.diam_g()?;
            positive("delta", delta)?;
            inputs.validate_admissible()?;
            let one_plus = rint(1) + kappa_hat;
            let r = rint(2) * delta * &one_plus / kappa_hat;
            let alpha_inner = rint(3) * delta * &one_plus;
            let beta_inner =
                diam.clone() + ExtReal::Finite(&alpha_inner * ell);
            let delta_inner = beta_inner.clone() + ExtReal::Finite(delta + &r);
            // 3 delta (1 + kh) < alpha
            out.side("window_x", &alpha_inner < alpha);
            // delta (1 + kh)(3 ell + 2/kh) + delta + diam < beta
            let lhs = ExtReal::Finite(
                delta * &one_plus * (rint(3) * ell + rint(2) / kappa_hat) + delta,
            ) + diam;
            out.side("window_y", lhs < ExtReal::Finite(beta.clone()));
            out.put_rat("r", r);
            out.put_rat("a", delta.clone());
            out.put_rat("b", delta.clone());
            out.put("c", diam.clone());
            out.put_rat("alpha_inner", alpha_inner);
            out.put("beta_inner", beta_inner);
            out.put("delta_inner", delta_inner);
            out.put_rat("kappa_hat_lower", kappa_hat_lower(kappa, ell)?);
        }
        TheoremId::Graves5g3 => {
            let (a, b) = (inputs.a()?, inputs.b()?);
            let (kappa, kappa_hat, ell) = (inputs.kappa()?, inputs.kappa_hat()?, inputs.ell()?);
            let (alpha, beta) = (inputs.alpha()?, inputs.beta()?);
            positive("a", a)?;
            positive("b", b)?;
            inputs.validate_admissible()?;
            let alpha_inner = a + rint(2) * kappa_hat * b;
            let beta_inner = ell * &alpha_inner;
            let delta_inner = &beta_inner + rint(2) * b;
            out.side("domain_size", &alpha_inner <= alpha);
            out.side("target_size", rint(2) * b + ell * &alpha_inner <= *beta);
            if let Some(g_norm) = &inputs.g_norm {
                out.side("center_offset", g_norm <= b);
            }
            out.put_rat("alpha_inner", alpha_inner);
            out.put_rat("beta_inner", beta_inner);
            out.put_rat("delta_inner", delta_inner);
            out.put_rat("r", b.clone());
            out.put("c", ExtReal::zero());
            out.put_rat("kappa_hat_lower", kappa_hat_lower(kappa, ell)?);
        }
        TheoremId::SumStable => {
            let (delta, kappa, kappa_hat, ell) =
                (inputs.delta()?, inputs.kappa()?, inputs.kappa_hat()?, inputs.ell()?);
            let c = match inputs.c()? {
                ExtReal::Finite(c) => c,
                ExtReal::Inf => return Err(Error::input("constant 'c' must be finite here")),
            };
            let cap_r = inputs.cap_r()?;
            positive("delta", delta)?;
            positive("c", c)?;
            positive("R", cap_r)?;
            inputs.validate_admissible()?;
            let one_plus = rint(1) + kappa_hat;
            let r = rint(2) * delta * &one_plus / kappa_hat;
            out.side("level_x", rint(3) * c * &one_plus < *cap_r);
            out.side(
                "level_y",
                rint(2) * c + rint(3) * c * ell * &one_plus + rint(2) * c * &one_plus / kappa_hat
                    < *cap_r,
            );
            out.side("delta_below_level", delta < c);
            out.put_rat("r", r);
            out.put_rat("a", delta.clone());
            out.put_rat("b", delta.clone());
            out.put_rat("kappa_hat_lower", kappa_hat_lower(kappa, ell)?);
        }
        TheoremId::Milyutin => {
            let (kappa, kappa_hat, eps) = (inputs.kappa()?, inputs.kappa_hat()?, inputs.eps()?);
            let r = inputs.r_finite()?;
            positive("r", r)?;
            positive("eps", eps)?;
            if let Ok(ell) = inputs.ell() {
                positive("ell", ell)?;
                inputs.validate_admissible()?;
                out.put_rat("kappa_hat_lower", kappa_hat_lower(kappa, ell)?);
            }
            let delta = core::cmp::min(core::cmp::min(kappa * r, eps.clone()), rint(1)) / kappa_hat;
            out.put_rat("delta", delta);
        }
        TheoremId::SemilocalB => {
            let (delta, kappa_hat) = (inputs.delta()?, inputs.kappa_hat()?);
            let r = inputs.r()?;
            positive("delta", delta)?;
            inputs.validate_admissible()?;
            let alpha = ExtReal::Finite(delta.clone()) + scale_rat(kappa_hat, r);
            out.put("alpha", alpha);
        }
        TheoremId::AcnB => {
            let delta = inputs.delta()?;
            let (kappa, kappa_hat, ell) = (inputs.kappa()?, inputs.kappa_hat()?, inputs.ell()?);
            let (alpha, beta) = (inputs.alpha()?, inputs.beta()?);
            let diam = inputs.diam_g()?;
            positive("delta", delta)?;
            inputs.validate_admissible()?;
            let two_plus = rint(2) + kappa_hat;
            let r = delta * (rint(1) + kappa_hat) / kappa_hat;
            let alpha_inner = delta * &two_plus;
            let mu = ExtReal::Finite(ell * &alpha_inner) + diam;
            out.side("window_x", &alpha_inner < alpha);
            let lhs = ExtReal::Finite(ell * delta * &two_plus + delta) + diam;
            out.side("window_y", lhs < ExtReal::Finite(beta.clone()));
            out.put_rat("r", r);
            out.put_rat("alpha_inner", alpha_inner);
            out.put("mu", mu);
            out.put_rat("kappa_hat_lower", kappa_hat_lower(kappa, ell)?);
        }
        TheoremId::SumStableB => {
            let (delta, kappa, kappa_hat, ell) =
                (inputs.delta()?, inputs.kappa()?, inputs.kappa_hat()?, inputs.ell()?);
            let beta = inputs.beta()?;
            let alpha_hat = inputs.alpha_hat()?;
            positive("delta", delta)?;
            positive("beta", beta)?;
            positive("alpha_hat", alpha_hat)?;
            inputs.validate_admissible()?;
            let r = delta * (rint(1) + kappa_hat) / kappa_hat;
            let alpha = delta * (rint(2) + kappa_hat);
            out.side("level_x", delta * (rint(2) + kappa_hat) < *alpha_hat);
            out.side(
                "level_y",
                delta * (rint(1) + rint(2) * kappa_hat) < kappa_hat * alpha_hat,
            );
            out.side("alpha_below_level", &alpha < alpha_hat);
            out.side("level_below_radius", alpha_hat < beta);
            out.side("mu_window", beta + delta < rint(2) * beta);
            out.put_rat("r", r);
            out.put_rat("alpha", alpha);
            out.put("mu", ExtReal::Finite(beta.clone()));
            out.put_rat("kappa_hat_lower", kappa_hat_lower(kappa, ell)?);
        }
        TheoremId::ShrinkRestricted => {
            let (delta, kappa) = (inputs.delta()?, inputs.kappa()?);
            let r = inputs.r_finite()?;
            positive("delta", delta)?;
            positive("kappa", kappa)?;
            positive("r", r)?;
            let beta = core::cmp::min(
                delta.clone(),
                kappa * r / (rint(2) + rint(2) * kappa),
            );
            out.put_rat("beta", beta);
        }
        TheoremId::ShrinkSubwindow => {
            let (delta, kappa) = (inputs.delta()?, inputs.kappa()?);
            let r = inputs.r_finite()?;
            positive("delta", delta)?;
            positive("kappa", kappa)?;
            positive("r", r)?;
            let beta = core::cmp::min(delta.clone(), kappa * r / (rint(1) + kappa));
            out.put_rat("beta", beta);
        }
    }
    Ok(out)
}

/// Everything an experiment may need; each theorem names what it uses.
#[derive(Debug, Clone)]
pub struct ExperimentInstance {
    pub f: SetValuedMap,
    pub g_set: Option<SetValuedMap>,
    pub g_single: Option<SingleValuedMap>,
    /// (xbar, zbar, wbar)
    pub center: (Point, Point, Point),
    pub constants: ConstantSet,
    pub x_candidates: Vec<Point>,
    pub y_candidates: Vec<Point>,
    /// Base window for the gauge-controlled perturbation statement.
    pub omega: Option<Window>,
    pub gamma: Option<GammaFunction>,
    /// Open set factors for the Milyutin statement.
    pub u_set: Option<Vec<Point>>,
    pub v_set: Option<Vec<Point>>,
}

impl ExperimentInstance {
    fn g_as_set(&self) -> Result<SetValuedMap> {
        if let Some(g) = &self.g_set {
            return Ok(g.clone());
        }
        if let Some(g) = &self.g_single {
            return Ok(g.as_set_valued());
        }
        Err(Error::input("instance supplies neither G nor g"))
    }

    fn sum_map(&self) -> Result<SetValuedMap> {
        if let Some(g) = &self.g_single {
            self.f.add_single(g)
        } else if let Some(g) = &self.g_set {
            self.f.sum(g)
        } else {
            Err(Error::input("instance supplies neither G nor g"))
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub theorem: TheoremId,
    pub derivation: Derivation,
    pub hypotheses: Vec<(String, Verdict)>,
    pub conclusion: Verdict,
    pub conclusion_vacuous: bool,
    /// All hypotheses passing implies a passing conclusion.
    pub sound: bool,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|(_, v)| v.holds)
    }
}

fn verdict_bool(ok: bool) -> Verdict {
    if ok {
        Verdict::pass()
    } else {
        Verdict { holds: false, witness: None }
    }
}

/// Ball filtered through the union of candidate pools, deduplicated.
fn ball_set(
    space: &Space,
    center: &Point,
    radius: &ExtReal,
    closed: bool,
    pools: &[&[Point]],
) -> Result<Vec<Point>> {
    let mut pool: BTreeSet<Point> = BTreeSet::new();
    for p in pools {
        pool.extend(p.iter().cloned());
    }
    let all: Vec<Point> = pool.into_iter().collect();
    ball(space, center, radius, closed, &all)
}

fn range_points(m: &SetValuedMap) -> Vec<Point> {
    m.range().cloned().collect()
}

/// Decomposition hypothesis shared by the sum statements: every value
/// of the sum near the reference splits off an admissible component of
/// G. Ball openness follows the statement being checked.
#[allow(clippy::too_many_arguments)]
fn decomposition_hypothesis(
    f: &SetValuedMap,
    g: &SetValuedMap,
    h: &SetValuedMap,
    x_bar: &Point,
    v_center: &Point,
    w_bar: &Point,
    x_radius: &ExtReal,
    v_radius: &ExtReal,
    v_closed: bool,
    w_radius: &ExtReal,
    x_candidates: &[Point],
) -> Result<Verdict> {
    let dx = f.domain_space();
    let dy = f.target_space();
    for x in ball(dx, x_bar, x_radius, false, x_candidates)? {
        for v in h.value(&x) {
            let dv = ExtReal::Finite(dy.distance(&v, v_center)?);
            let inside = if v_closed { dv <= *v_radius } else { dv < *v_radius };
            if !inside {
                continue;
            }
            let mut found = false;
            for w in g.value(&x) {
                if ExtReal::Finite(dy.distance(&w, w_bar)?) < *w_radius {
                    let z = sub_points(&v, &w)?;
                    if f.contains(&x, &z) {
                        found = true;
                        break;
                    }
                }
            }
            if !found {
                return Ok(Verdict::fail(Witness {
                    x: x.clone(),
                    y: v.clone(),
                    extra: alloc::vec![],
                    lhs: dv,
                    rhs: w_radius.clone(),
                }));
            }
        }
    }
    Ok(Verdict::pass())
}

/// Window of pairs whose gauge-sized ball product stays inside the base
/// window, with the target ball recentered through the single-valued
/// part. The gauge must be positive and Lipschitz-1 on the base
/// window's X-projection.
pub fn build_window_psonw(
    omega: &Window,
    gamma: &GammaFunction,
    g: &SingleValuedMap,
    ell: &Rat,
    x_candidates: &[Point],
    y_candidates: &[Point],
) -> Result<Window> {
    let omega_x = omega.project_x();
    let omega_x_vec: Vec<Point> = omega_x.iter().cloned().collect();
    for x in &omega_x_vec {
        let v = gamma.eval(g.domain_space(), x_candidates, &omega_x, x)?;
        if v <= ExtReal::zero() {
            return Err(Error::input("gauge must be positive on the base window"));
        }
    }
    let lip = gauge_lipschitz1(g.domain_space(), gamma, x_candidates, &omega_x, &omega_x_vec)?;
    if !lip.holds {
        return Err(Error::input("gauge fails the Lipschitz-1 check on the base window"));
    }
    build_window_psonw_unchecked(omega, gamma, g, ell, x_candidates, y_candidates)
}

fn build_window_psonw_unchecked(
    omega: &Window,
    gamma: &GammaFunction,
    g: &SingleValuedMap,
    ell: &Rat,
    x_candidates: &[Point],
    y_candidates: &[Point],
) -> Result<Window> {
    let omega_x = omega.project_x();
    let dx = g.domain_space();
    let dy = g.target_space();
    // candidates outside the base window, per x
    let mut bad_y: BTreeMap<&Point, BTreeSet<&Point>> = BTreeMap::new();
    for xp in x_candidates {
        let mut bad = BTreeSet::new();
        for yp in y_candidates {
            if !omega.contains(xp, yp) {
                bad.insert(yp);
            }
        }
        bad_y.insert(xp, bad);
    }
    let mut pairs = Vec::new();
    'next_pair: for x in x_candidates {
        let gx = gamma.eval(dx, x_candidates, &omega_x, x)?;
        let gval = g.value(x)?;
        let y_reach = scale_rat(ell, &gx);
        for y in y_candidates {
            let shifted = sub_points(y, gval)?;
            for xp in x_candidates {
                if ExtReal::Finite(dx.distance(xp, x)?) >= gx {
                    continue;
                }
                let bad = &bad_y[xp];
                if bad.is_empty() {
                    continue;
                }
                for yp in bad {
                    if ExtReal::Finite(dy.distance(yp, &shifted)?) < y_reach {
                        continue 'next_pair;
                    }
                }
            }
            pairs.push((x.clone(), y.clone()));
        }
    }
    Ok(Window::from_pairs(pairs))
}

/// Window of the Milyutin perturbation statement: pairs whose
/// recentered target ball of radius eps * ell * dist(x, X \ U) stays
/// inside V.
pub fn build_window_milyutin_eps(
    u_set: &[Point],
    v_set: &[Point],
    g: &SingleValuedMap,
    ell: &Rat,
    eps: &Rat,
    x_candidates: &[Point],
    y_candidates: &[Point],
) -> Result<Window> {
    if u_set.is_empty() || v_set.is_empty() {
        return Err(Error::input("U and V must be non-empty"));
    }
    let dx = g.domain_space();
    let dy = g.target_space();
    let u: BTreeSet<&Point> = u_set.iter().collect();
    let v: BTreeSet<&Point> = v_set.iter().collect();
    let mut pairs = Vec::new();
    for x in u_set {
        let complement: Vec<&Point> = x_candidates.iter().filter(|p| !u.contains(p)).collect();
        let margin = dist_point_set(dx, x, complement.into_iter())?;
        let reach = scale_rat(eps, &scale_rat(ell, &margin));
        let gval = g.value(x)?;
        'next_y: for y in y_candidates {
            let shifted = sub_points(y, gval)?;
            for yp in y_candidates {
                if ExtReal::Finite(dy.distance(yp, &shifted)?) < reach && !v.contains(yp) {
                    continue 'next_y;
                }
            }
            pairs.push((x.clone(), y.clone()));
        }
    }
    Ok(Window::from_pairs(pairs))
}

/// Runs the selected statement end to end: derive constants, evaluate
/// every hypothesis with the definition-level checkers, then evaluate
/// the conclusion on the derived window.
pub fn run_experiment(theorem: TheoremId, inst: &ExperimentInstance) -> Result<ExperimentReport> {
    match theorem {
        TheoremId::Susvp => run_susvp(inst),
        TheoremId::EpigraphGlobal => run_epigraph_global(inst),
        TheoremId::Acn => run_acn(inst, false),
        TheoremId::AcnB => run_acn(inst, true),
        TheoremId::Graves5g3 => run_graves(inst),
        TheoremId::SumStable => run_sum_stable_a(inst),
        TheoremId::Psonw => run_psonw(inst),
        TheoremId::Milyutin => run_milyutin(inst),
        TheoremId::SemilocalB => run_semilocal_b(inst),
        TheoremId::SumStableB => run_sum_stable_b(inst),
        TheoremId::ShrinkRestricted => run_shrink(inst, true),
        TheoremId::ShrinkSubwindow => run_shrink(inst, false),
    }
}

fn finalize(
    theorem: TheoremId,
    derivation: Derivation,
    hypotheses: Vec<(String, Verdict)>,
    conclusion: Verdict,
    conclusion_vacuous: bool,
    mut notes: Vec<String>,
) -> ExperimentReport {
    let hyps_hold = hypotheses.iter().all(|(_, v)| v.holds);
    let sound = !hyps_hold || conclusion.holds;
    notes.push(String::from(
        "completeness and closed-graph hypotheses hold automatically on finite instances",
    ));
    ExperimentReport {
        theorem,
        derivation,
        hypotheses,
        conclusion,
        conclusion_vacuous,
        sound,
        notes,
    }
}

fn run_susvp(inst: &ExperimentInstance) -> Result<ExperimentReport> {
    let cs = &inst.constants;
    let derivation = derive_constants(TheoremId::Susvp, cs)?;
    let (x_bar, z_bar, w_bar) = (&inst.center.0, &inst.center.1, &inst.center.2);
    let f = &inst.f;
    let g = inst.g_as_set()?;
    let h = inst.sum_map()?;
    if !f.contains(x_bar, z_bar) {
        return Err(Error::input("zbar must lie in F(xbar)"));
    }
    if !g.contains(x_bar, w_bar) {
        return Err(Error::input("wbar must lie in G(xbar)"));
    }
    let dx = f.domain_space();
    let dy = f.target_space();
    let xc = &inst.x_candidates;
    let yc = &inst.y_candidates;
    let g_range = range_points(&g);
    let f_range = range_points(f);
    let alpha = ExtReal::Finite(derivation.rat_value("alpha").unwrap().clone());
    let beta = derivation.value("beta").unwrap().clone();
    let delta = derivation.value("delta").unwrap().clone();
    let q_radius = derivation.rat_value("q_radius").unwrap().clone();
    let (a, b, r, c) = (cs.a()?, cs.b()?, cs.r_finite()?, cs.c()?);
    let (kappa, kappa_hat, ell) = (cs.kappa()?, cs.kappa_hat()?, cs.ell()?);

    let mut hypotheses = Vec::new();
    // (i) restricted regularity of F on the derived window
    let u_alpha = ball(dx, x_bar, &alpha, false, xc)?;
    let v_delta_open = ball_set(dy, z_bar, &delta, false, &[yc, &f_range])?;
    let v_delta_closed: BTreeSet<Point> =
        ball_set(dy, z_bar, &delta, true, &[yc, &f_range])?.into_iter().collect();
    let w_i = Window::product(&u_alpha, &v_delta_open);
    hypotheses.push((
        String::from("restricted_regularity"),
        check_restricted_regular(f, &w_i, &v_delta_closed, kappa)?,
    ));
    // (ii) Aubin property of G
    let v_beta: BTreeSet<Point> =
        ball_set(dy, w_bar, &beta, false, &[yc, &g_range])?.into_iter().collect();
    hypotheses.push((String::from("aubin"), check_aubin(&g, &u_alpha, &v_beta, ell)?));
    // (iii) decomposition
    let v_center = crate::point::add_points(z_bar, w_bar)?;
    let w_reach = ExtReal::Finite(a * ell) + c;
    hypotheses.push((
        String::from("decomposition"),
        decomposition_hypothesis(
            f,
            &g,
            &h,
            x_bar,
            &v_center,
            w_bar,
            &ExtReal::Finite(a.clone()),
            &ExtReal::Finite(b + r),
            true,
            &w_reach,
            xc,
        )?,
    ));

    // conclusion: restricted regularity of the sum for every admissible
    // recentering
    let h_range = range_points(&h);
    let q_pool = ball(dy, w_bar, &ExtReal::Finite(q_radius), true, yc)?;
    let u_a = ball(dx, x_bar, &ExtReal::Finite(a.clone()), false, xc)?;
    let mut conclusion = Verdict::pass();
    let mut checked_pairs = 0usize;
    for q_bar in &q_pool {
        let recentered = crate::point::add_points(z_bar, q_bar)?;
        let v_b = ball(dy, &recentered, &ExtReal::Finite(b.clone()), false, yc)?;
        let w_q = Window::product(&u_a, &v_b);
        checked_pairs += w_q.len();
        let v_r: BTreeSet<Point> = ball_set(
            dy,
            &recentered,
            &ExtReal::Finite(r.clone()),
            true,
            &[yc, &h_range],
        )?
        .into_iter()
        .collect();
        let verdict = check_restricted_regular(&h, &w_q, &v_r, kappa_hat)?;
        if !verdict.holds {
            conclusion = verdict;
            break;
        }
    }
    let vacuous = q_pool.is_empty() || checked_pairs == 0;
    let notes = alloc::vec![alloc::format!(
        "conclusion checked for {} recentering points",
        q_pool.len()
    )];
    Ok(finalize(TheoremId::Susvp, derivation, hypotheses, conclusion, vacuous, notes))
}

fn run_epigraph_global(inst: &ExperimentInstance) -> Result<ExperimentReport> {
    let cs = &inst.constants;
    let derivation = derive_constants(TheoremId::EpigraphGlobal, cs)?;
    let (kappa, kappa_hat, ell) = (cs.kappa()?, cs.kappa_hat()?, cs.ell()?);
    cs.validate_admissible()?;
    let f = &inst.f;
    let g = inst.g_as_set()?;
    let h = inst.sum_map()?;
    let xc = &inst.x_candidates;
    let yc = &inst.y_candidates;
    let w = Window::product(xc, yc);
    let mut hypotheses = Vec::new();
    hypotheses.push((String::from("regularity"), check_regular(f, &w, kappa)?));
    let g_range = range_points(&g);
    let v_all: BTreeSet<Point> = yc.iter().cloned().chain(g_range).collect();
    hypotheses.push((String::from("hausdorff_lipschitz"), check_aubin(&g, xc, &v_all, ell)?));
    let conclusion = check_regular(&h, &w, kappa_hat)?;
    let vacuous = w.is_empty();
    Ok(finalize(
        TheoremId::EpigraphGlobal,
        derivation,
        hypotheses,
        conclusion,
        vacuous,
        Vec::new(),
    ))
}

fn run_acn(inst: &ExperimentInstance, b_setting: bool) -> Result<ExperimentReport> {
    let theorem = if b_setting { TheoremId::AcnB } else { TheoremId::Acn };
    let (x_bar, z_bar, w_bar) = (&inst.center.0, &inst.center.1, &inst.center.2);
    let f = &inst.f;
    let g = inst.g_as_set()?;
    let h = inst.sum_map()?;
    let dy = f.target_space();
    // diameter of G(xbar) comes from the instance itself
    let diam = diameter(dy, &g.value(x_bar))?;
    let mut cs = inst.constants.clone();
    cs.diam_g = Some(diam.clone());
    let derivation = derive_constants(theorem, &cs)?;
    let (kappa, kappa_hat, ell) = (cs.kappa()?, cs.kappa_hat()?, cs.ell()?);
    let (alpha, beta, delta) = (cs.alpha()?, cs.beta()?, cs.delta()?);
    let dx = f.domain_space();
    let xc = &inst.x_candidates;
    let yc = &inst.y_candidates;

    let mut hypotheses = Vec::new();
    let u_alpha = ball(dx, x_bar, &ExtReal::Finite(alpha.clone()), false, xc)?;
    let v_beta = ball(dy, z_bar, &ExtReal::Finite(beta.clone()), false, yc)?;
    hypotheses.push((
        String::from("regularity"),
        check_regular(f, &Window::product(&u_alpha, &v_beta), kappa)?,
    ));
    let g_range = range_points(&g);
    let v_all: BTreeSet<Point> = yc.iter().cloned().chain(g_range).collect();
    hypotheses.push((
        String::from("hausdorff_lipschitz"),
        check_aubin(&g, &u_alpha, &v_all, ell)?,
    ));
    let diam_ok = diam < ExtReal::Finite(beta.clone());
    hypotheses.push((
        String::from("diameter"),
        if diam_ok {
            Verdict::pass()
        } else {
            Verdict::fail(Witness {
                x: x_bar.clone(),
                y: z_bar.clone(),
                extra: alloc::vec![],
                lhs: diam.clone(),
                rhs: ExtReal::Finite(beta.clone()),
            })
        },
    ));
    hypotheses.push((
        String::from("side_conditions"),
        verdict_bool(derivation.all_side_conditions_hold()),
    ));

    let v_center = crate::point::add_points(z_bar, w_bar)?;
    let u_delta = ball(dx, x_bar, &ExtReal::Finite(delta.clone()), false, xc)?;
    let v_delta = ball(dy, &v_center, &ExtReal::Finite(delta.clone()), false, yc)?;
    let w_out = Window::product(&u_delta, &v_delta);
    let conclusion = check_regular(&h, &w_out, kappa_hat)?;
    let vacuous = w_out.is_empty();
    Ok(finalize(theorem, derivation, hypotheses, conclusion, vacuous, Vec::new()))
}

fn run_graves(inst: &ExperimentInstance) -> Result<ExperimentReport> {
    let g = inst
        .g_single
        .as_ref()
        .ok_or_else(|| Error::input("this statement needs a single-valued perturbation"))?;
    let f = &inst.f;
    let h = f.add_single(g)?;
    let (x_bar, z_bar, _) = (&inst.center.0, &inst.center.1, &inst.center.2);
    let dy = f.target_space();
    let dx = f.domain_space();
    // rho(0, g(xbar))
    let dim = match dy {
        Space::Linear(l) => l.dim,
        _ => return Err(Error::type_error("this statement needs a linear target")),
    };
    let zero = Point::Vector(alloc::vec![Rat::zero(); dim]);
    let g_norm = dy.distance(&zero, g.value(x_bar)?)?;
    let mut cs = inst.constants.clone();
    cs.g_norm = Some(g_norm);
    let derivation = derive_constants(TheoremId::Graves5g3, &cs)?;
    let (kappa, kappa_hat, ell) = (cs.kappa()?, cs.kappa_hat()?, cs.ell()?);
    let (a, b, alpha, beta) = (cs.a()?, cs.b()?, cs.alpha()?, cs.beta()?);
    let xc = &inst.x_candidates;
    let yc = &inst.y_candidates;
    let f_range = range_points(f);

    let mut hypotheses = Vec::new();
    let u_alpha = ball(dx, x_bar, &ExtReal::Finite(alpha.clone()), false, xc)?;
    let v_beta_open = ball_set(dy, z_bar, &ExtReal::Finite(beta.clone()), false, &[yc, &f_range])?;
    let v_beta_closed: BTreeSet<Point> =
        ball_set(dy, z_bar, &ExtReal::Finite(beta.clone()), true, &[yc, &f_range])?
            .into_iter()
            .collect();
    hypotheses.push((
        String::from("restricted_regularity"),
        check_restricted_regular(f, &Window::product(&u_alpha, &v_beta_open), &v_beta_closed, kappa)?,
    ));
    let lip_radius = a + rint(2) * kappa_hat * b;
    let lip_set = ball(dx, x_bar, &ExtReal::Finite(lip_radius), true, xc)?;
    hypotheses.push((String::from("lipschitz"), lipschitz_check(g, &lip_set, ell)?));
    hypotheses.push((
        String::from("side_conditions"),
        verdict_bool(derivation.all_side_conditions_hold()),
    ));

    // conclusion: two-sided solvability estimate for the translated map
    let y_pool = ball(dy, z_bar, &ExtReal::Finite(b.clone()), false, yc)?;
    let inner = ball(dx, x_bar, &ExtReal::Finite(a.clone()), false, xc)?;
    let outer_radius = a + rint(2) * kappa_hat * b;
    let mut conclusion = Verdict::pass();
    let mut tested = 0usize;
    'outer: for y_hat in &y_pool {
        let solutions_hat = h.inverse_fiber(y_hat).cloned().unwrap_or_default();
        for x_hat in solutions_hat.iter().filter(|p| inner.contains(p)) {
            for y in &y_pool {
                tested += 1;
                let bound = ExtReal::Finite(kappa_hat * dy.distance(y, y_hat)?);
                let ok = h
                    .inverse_fiber(y)
                    .map(|sols| {
                        sols.iter().any(|x| {
                            dx.distance(x, x_bar).map(|d| d < outer_radius).unwrap_or(false)
                                && ExtReal::Finite(
                                    dx.distance(x, x_hat).unwrap_or_else(|_| Rat::zero()),
                                ) <= bound
                        })
                    })
                    .unwrap_or(false);
                if !ok {
                    conclusion = Verdict::fail(Witness {
                        x: x_hat.clone(),
                        y: y.clone(),
                        extra: alloc::vec![y_hat.clone()],
                        lhs: ExtReal::Inf,
                        rhs: bound,
                    });
                    break 'outer;
                }
            }
        }
    }
    let vacuous = tested == 0;
    Ok(finalize(
        TheoremId::Graves5g3,
        derivation,
        hypotheses,
        conclusion,
        vacuous,
        Vec::new(),
    ))
}

fn run_sum_stable_a(inst: &ExperimentInstance) -> Result<ExperimentReport> {
    let cs = &inst.constants;
    let derivation = derive_constants(TheoremId::SumStable, cs)?;
    let (x_bar, z_bar, w_bar) = (&inst.center.0, &inst.center.1, &inst.center.2);
    let f = &inst.f;
    let g = inst.g_as_set()?;
    let h = inst.sum_map()?;
    let (kappa, kappa_hat, ell, delta) = (cs.kappa()?, cs.kappa_hat()?, cs.ell()?, cs.delta()?);
    let c = cs.c()?.as_rat().unwrap().clone();
    let cap_r = cs.cap_r()?;
    let r = derivation.rat_value("r").unwrap().clone();
    let dx = f.domain_space();
    let dy = f.target_space();
    let xc = &inst.x_candidates;
    let yc = &inst.y_candidates;
    let g_range = range_points(&g);

    let mut hypotheses = Vec::new();
    let u_r = ball(dx, x_bar, &ExtReal::Finite(cap_r.clone()), false, xc)?;
    let v_r = ball(dy, z_bar, &ExtReal::Finite(cap_r.clone()), false, yc)?;
    hypotheses.push((
        String::from("regularity"),
        check_regular(f, &Window::product(&u_r, &v_r), kappa)?,
    ));
    let v_aubin: BTreeSet<Point> =
        ball_set(dy, w_bar, &ExtReal::Finite(cap_r.clone()), false, &[yc, &g_range])?
            .into_iter()
            .collect();
    hypotheses.push((String::from("aubin"), check_aubin(&g, &u_r, &v_aubin, ell)?));
    let v_center = crate::point::add_points(z_bar, w_bar)?;
    hypotheses.push((
        String::from("sum_stable_decomposition"),
        decomposition_hypothesis(
            f,
            &g,
            &h,
            x_bar,
            &v_center,
            w_bar,
            &ExtReal::Finite(delta.clone()),
            &ExtReal::Finite(delta + &r),
            true,
            &ExtReal::Finite(c),
            xc,
        )?,
    ));
    hypotheses.push((
        String::from("side_conditions"),
        verdict_bool(derivation.all_side_conditions_hold()),
    ));

    let u_delta = ball(dx, x_bar, &ExtReal::Finite(delta.clone()), false, xc)?;
    let v_delta = ball(dy, &v_center, &ExtReal::Finite(delta.clone()), false, yc)?;
    let w_out = Window::product(&u_delta, &v_delta);
    let conclusion = check_regular(&h, &w_out, kappa_hat)?;
    let vacuous = w_out.is_empty();
    Ok(finalize(
        TheoremId::SumStable,
        derivation,
        hypotheses,
        conclusion,
        vacuous,
        Vec::new(),
    ))
}

fn run_psonw(inst: &ExperimentInstance) -> Result<ExperimentReport> {
    let cs = &inst.constants;
    let derivation = derive_constants(TheoremId::Psonw, cs)?;
    let (kappa, kappa_hat, ell) = (cs.kappa()?, cs.kappa_hat()?, cs.ell()?);
    cs.validate_admissible()?;
    let omega = inst
        .omega
        .as_ref()
        .ok_or_else(|| Error::input("this statement needs a base window"))?;
    let gamma = inst
        .gamma
        .as_ref()
        .ok_or_else(|| Error::input("this statement needs a gauge"))?;
    let g = inst
        .g_single
        .as_ref()
        .ok_or_else(|| Error::input("this statement needs a single-valued perturbation"))?;
    let f = &inst.f;
    let h = f.add_single(g)?;
    let xc = &inst.x_candidates;
    let yc = &inst.y_candidates;
    let omega_x = omega.project_x();
    let omega_x_vec: Vec<Point> = omega_x.iter().cloned().collect();

    let mut hypotheses = Vec::new();
    let mut gauge_ok =
        gauge_lipschitz1(f.domain_space(), gamma, xc, &omega_x, &omega_x_vec)?;
    if gauge_ok.holds {
        for x in &omega_x_vec {
            let v = gamma.eval(f.domain_space(), xc, &omega_x, x)?;
            if v <= ExtReal::zero() {
                gauge_ok = verdict_bool(false);
                break;
            }
        }
    }
    hypotheses.push((String::from("gauge_admissible"), gauge_ok));
    hypotheses.push((
        String::from("gauge_regularity"),
        check_gamma_regular(f, omega, gamma, kappa, &GammaVariant::A, xc)?,
    ));
    hypotheses.push((String::from("lipschitz"), lipschitz_check(g, &omega_x_vec, ell)?));

    let w = build_window_psonw_unchecked(omega, gamma, g, ell, xc, yc)?;
    let conclusion = check_gamma_regular(&h, &w, gamma, kappa_hat, &GammaVariant::A, xc)?;
    let vacuous = w.is_empty();
    let notes = alloc::vec![alloc::format!("derived window has {} pairs", w.len())];
    Ok(finalize(TheoremId::Psonw, derivation, hypotheses, conclusion, vacuous, notes))
}

fn run_milyutin(inst: &ExperimentInstance) -> Result<ExperimentReport> {
    let cs = &inst.constants;
    let derivation = derive_constants(TheoremId::Milyutin, cs)?;
    let (kappa, kappa_hat, eps, ell) = (cs.kappa()?, cs.kappa_hat()?, cs.eps()?, cs.ell()?);
    let r = cs.r_finite()?;
    cs.validate_admissible()?;
    let u_set = inst
        .u_set
        .as_ref()
        .ok_or_else(|| Error::input("this statement needs the open set U"))?;
    let v_set = inst
        .v_set
        .as_ref()
        .ok_or_else(|| Error::input("this statement needs the open set V"))?;
    let g = inst
        .g_single
        .as_ref()
        .ok_or_else(|| Error::input("this statement needs a single-valued perturbation"))?;
    let f = &inst.f;
    let h = f.add_single(g)?;
    let xc = &inst.x_candidates;
    let yc = &inst.y_candidates;

    let mut hypotheses = Vec::new();
    let w_uv = Window::product(u_set, v_set);
    hypotheses.push((
        String::from("milyutin_regularity"),
        check_milyutin(f, &w_uv, kappa, &GammaVariant::B(r.clone()), xc)?,
    ));
    hypotheses.push((String::from("lipschitz"), lipschitz_check(g, u_set, ell)?));

    let w_eps = build_window_milyutin_eps(u_set, v_set, g, ell, eps, xc, yc)?;
    let delta_out = derivation.rat_value("delta").unwrap().clone();
    let conclusion = check_milyutin(&h, &w_eps, kappa_hat, &GammaVariant::B(delta_out), xc)?;
    let vacuous = w_eps.is_empty();
    let notes = alloc::vec![alloc::format!("derived window has {} pairs", w_eps.len())];
    Ok(finalize(TheoremId::Milyutin, derivation, hypotheses, conclusion, vacuous, notes))
}

fn run_semilocal_b(inst: &ExperimentInstance) -> Result<ExperimentReport> {
    let cs = &inst.constants;
    let derivation = derive_constants(TheoremId::SemilocalB, cs)?;
    let (x_bar, z_bar, w_bar) = (&inst.center.0, &inst.center.1, &inst.center.2);
    let f = &inst.f;
    let g = inst.g_as_set()?;
    let h = inst.sum_map()?;
    let (kappa, kappa_hat, ell, delta) = (cs.kappa()?, cs.kappa_hat()?, cs.ell()?, cs.delta()?);
    let mu = cs.mu()?;
    let r = cs.r()?;
    cs.validate_admissible()?;
    let alpha = derivation.value("alpha").unwrap().clone();
    let dx = f.domain_space();
    let dy = f.target_space();
    let xc = &inst.x_candidates;
    let yc = &inst.y_candidates;
    let g_range = range_points(&g);
    let f_range = range_points(f);

    let mut hypotheses = Vec::new();
    // (i) regularity of F on the residual-filtered window
    let mu_delta = mu.clone() + ExtReal::Finite(delta.clone());
    let mu_delta_r = mu_delta.clone() + r;
    let u_alpha = ball(dx, x_bar, &alpha, false, xc)?;
    let v_near = ball(dy, z_bar, &mu_delta, false, yc)?;
    let f_restriction: BTreeSet<Point> =
        ball_set(dy, z_bar, &mu_delta_r, false, &[yc, &f_range])?.into_iter().collect();
    let base = Window::product(&u_alpha, &v_near);
    let mut filtered_pairs = Vec::new();
    for (x, y) in base.pairs() {
        let fiber = f.value(x);
        let truncated: Vec<&Point> = fiber.iter().filter(|p| f_restriction.contains(p)).collect();
        let residual = dist_point_set(dy, y, truncated.into_iter())?;
        if residual < *r {
            filtered_pairs.push((x.clone(), y.clone()));
        }
    }
    hypotheses.push((
        String::from("filtered_regularity"),
        check_regular(f, &Window::from_pairs(filtered_pairs), kappa)?,
    ));
    // (ii) Aubin property of G
    let v_mu: BTreeSet<Point> =
        ball_set(dy, w_bar, mu, false, &[yc, &g_range])?.into_iter().collect();
    hypotheses.push((String::from("aubin"), check_aubin(&g, &u_alpha, &v_mu, ell)?));
    // (iii) decomposition
    let v_center = crate::point::add_points(z_bar, w_bar)?;
    let v_radius = ExtReal::Finite(delta.clone()) + r;
    hypotheses.push((
        String::from("decomposition"),
        decomposition_hypothesis(
            f, &g, &h, x_bar, &v_center, w_bar, &alpha, &v_radius, false, mu, xc,
        )?,
    ));

    // conclusion: regularity of the sum on the residual-filtered window
    let u_delta = ball(dx, x_bar, &ExtReal::Finite(delta.clone()), false, xc)?;
    let v_delta = ball(dy, &v_center, &ExtReal::Finite(delta.clone()), false, yc)?;
    let mut out_pairs = Vec::new();
    for x in &u_delta {
        let fiber = h.value(x);
        for y in &v_delta {
            if dist_point_set(dy, y, &fiber)? < *r {
                out_pairs.push((x.clone(), y.clone()));
            }
        }
    }
    let w_out = Window::from_pairs(out_pairs);
    let conclusion = check_regular(&h, &w_out, kappa_hat)?;
    let vacuous = w_out.is_empty();
    Ok(finalize(
        TheoremId::SemilocalB,
        derivation,
        hypotheses,
        conclusion,
        vacuous,
        Vec::new(),
    ))
}

fn run_sum_stable_b(inst: &ExperimentInstance) -> Result<ExperimentReport> {
    let cs = &inst.constants;
    let derivation = derive_constants(TheoremId::SumStableB, cs)?;
    let (x_bar, z_bar, w_bar) = (&inst.center.0, &inst.center.1, &inst.center.2);
    let f = &inst.f;
    let g = inst.g_as_set()?;
    let h = inst.sum_map()?;
    let (kappa, kappa_hat, ell, delta) = (cs.kappa()?, cs.kappa_hat()?, cs.ell()?, cs.delta()?);
    let beta = cs.beta()?;
    let alpha_hat = cs.alpha_hat()?;
    let dx = f.domain_space();
    let dy = f.target_space();
    let xc = &inst.x_candidates;
    let yc = &inst.y_candidates;
    let g_range = range_points(&g);

    let mut hypotheses = Vec::new();
    let u_beta = ball(dx, x_bar, &ExtReal::Finite(beta.clone()), false, xc)?;
    let v_2beta = ball(dy, z_bar, &ExtReal::Finite(rint(2) * beta), false, yc)?;
    hypotheses.push((
        String::from("regularity"),
        check_regular(f, &Window::product(&u_beta, &v_2beta), kappa)?,
    ));
    let v_beta: BTreeSet<Point> =
        ball_set(dy, w_bar, &ExtReal::Finite(beta.clone()), false, &[yc, &g_range])?
            .into_iter()
            .collect();
    hypotheses.push((String::from("aubin"), check_aubin(&g, &u_beta, &v_beta, ell)?));
    let v_center = crate::point::add_points(z_bar, w_bar)?;
    hypotheses.push((
        String::from("sum_stable_decomposition"),
        decomposition_hypothesis(
            f,
            &g,
            &h,
            x_bar,
            &v_center,
            w_bar,
            &ExtReal::Finite(alpha_hat.clone()),
            &ExtReal::Finite(alpha_hat.clone()),
            false,
            &ExtReal::Finite(beta.clone()),
            xc,
        )?,
    ));
    hypotheses.push((
        String::from("side_conditions"),
        verdict_bool(derivation.all_side_conditions_hold()),
    ));

    let u_delta = ball(dx, x_bar, &ExtReal::Finite(delta.clone()), false, xc)?;
    let v_delta = ball(dy, &v_center, &ExtReal::Finite(delta.clone()), false, yc)?;
    let w_out = Window::product(&u_delta, &v_delta);
    let conclusion = check_regular(&h, &w_out, kappa_hat)?;
    let vacuous = w_out.is_empty();
    Ok(finalize(
        TheoremId::SumStableB,
        derivation,
        hypotheses,
        conclusion,
        vacuous,
        Vec::new(),
    ))
}

/// Window-shrink conversions: from restricted (resp. residual-filtered)
/// regularity on a larger window to plain regularity on the derived
/// smaller ball product. The instance's `f` plays the mapping under
/// test; xbar and zbar form its reference point.
fn run_shrink(inst: &ExperimentInstance, restricted: bool) -> Result<ExperimentReport> {
    let theorem = if restricted {
        TheoremId::ShrinkRestricted
    } else {
        TheoremId::ShrinkSubwindow
    };
    let cs = &inst.constants;
    let derivation = derive_constants(theorem, cs)?;
    let (kappa, delta) = (cs.kappa()?, cs.delta()?);
    let r = cs.r_finite()?;
    let beta = derivation.rat_value("beta").unwrap().clone();
    let h = &inst.f;
    let (x_bar, y_bar) = (&inst.center.0, &inst.center.1);
    if !h.contains(x_bar, y_bar) {
        return Err(Error::input("the reference point must lie on the graph"));
    }
    let dx = h.domain_space();
    let dy = h.target_space();
    let xc = &inst.x_candidates;
    let yc = &inst.y_candidates;
    let h_range = range_points(h);

    let u_delta = ball(dx, x_bar, &ExtReal::Finite(delta.clone()), false, xc)?;
    let v_delta = ball(dy, y_bar, &ExtReal::Finite(delta.clone()), false, yc)?;
    let hypothesis = if restricted {
        let v_r: BTreeSet<Point> =
            ball_set(dy, y_bar, &ExtReal::Finite(r.clone()), false, &[yc, &h_range])?
                .into_iter()
                .collect();
        check_restricted_regular(h, &Window::product(&u_delta, &v_delta), &v_r, kappa)?
    } else {
        let mut pairs = Vec::new();
        for x in &u_delta {
            let fiber = h.value(x);
            for y in &v_delta {
                if dist_point_set(dy, y, &fiber)? < ExtReal::Finite(r.clone()) {
                    pairs.push((x.clone(), y.clone()));
                }
            }
        }
        check_regular(h, &Window::from_pairs(pairs), kappa)?
    };
    let hypotheses = alloc::vec![(String::from("window_hypothesis"), hypothesis)];

    let u_beta = ball(dx, x_bar, &ExtReal::Finite(beta.clone()), false, xc)?;
    let v_beta = ball(dy, y_bar, &ExtReal::Finite(beta.clone()), false, yc)?;
    let w_out = Window::product(&u_beta, &v_beta);
    let conclusion = check_regular(h, &w_out, kappa)?;
    let vacuous = w_out.is_empty();
    Ok(finalize(theorem, derivation, hypotheses, conclusion, vacuous, Vec::new()))
}

/// Violations of plain regularity at a family of sampled window scales.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FindViolationReport {
    /// Radius of each sampled ball-product window, with the violation
    /// found there (if any).
    pub per_scale: Vec<(Rat, Option<Witness>)>,
}

impl FindViolationReport {
    /// Witness at the smallest sampled scale containing a violation.
    pub fn witness(&self) -> Option<&Witness> {
        self.per_scale
            .iter()
            .filter_map(|(radius, w)| w.as_ref().map(|w| (radius, w)))
            .min_by(|(r1, _), (r2, _)| r1.cmp(r2))
            .map(|(_, w)| w)
    }

    /// True when every sampled scale contains a violation.
    pub fn violated_at_all_scales(&self) -> bool {
        !self.per_scale.is_empty() && self.per_scale.iter().all(|(_, w)| w.is_some())
    }
}

/// Scans shrinking ball-product windows around the center for pairs
/// violating plain regularity with the given constant. Within each
/// window, pairs are ordered by target-side distance from the center,
/// then domain-side distance, then lexicographically, so the reported
/// witness is the violation closest to the reference point.
pub fn find_violation(
    h: &SetValuedMap,
    kappa_hat: &Rat,
    center: (&Point, &Point),
    radii: &[Rat],
    x_candidates: &[Point],
    y_candidates: &[Point],
) -> Result<FindViolationReport> {
    let (x_bar, y_bar) = center;
    let dx = h.domain_space();
    let dy = h.target_space();
    let mut per_scale = Vec::new();
    for radius in radii {
        positive("radius", radius)?;
        let rad = ExtReal::Finite(radius.clone());
        let xs = ball(dx, x_bar, &rad, false, x_candidates)?;
        let ys = ball(dy, y_bar, &rad, false, y_candidates)?;
        let mut pairs: Vec<(Rat, Rat, &Point, &Point)> = Vec::new();
        for y in &ys {
            let wy = dy.distance(y, y_bar)?;
            for x in &xs {
                pairs.push((wy.clone(), dx.distance(x, x_bar)?, x, y));
            }
        }
        pairs.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then_with(|| a.1.cmp(&b.1))
                .then_with(|| a.3.cmp(b.3))
                .then_with(|| a.2.cmp(b.2))
        });
        let mut found = None;
        for (_, _, x, y) in pairs {
            let lhs = match h.inverse_fiber(y) {
                Some(set) => dist_point_set(dx, x, set)?,
                None => ExtReal::Inf,
            };
            let rhs = scale_rat(kappa_hat, &dist_point_set(dy, y, &h.value(x))?);
            if lhs > rhs {
                found = Some(Witness {
                    x: x.clone(),
                    y: y.clone(),
                    extra: alloc::vec![],
                    lhs,
                    rhs,
                });
                break;
            }
        }
        per_scale.push((radius.clone(), found));
    }
    Ok(FindViolationReport { per_scale })
}
