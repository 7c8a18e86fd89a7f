//! Built-in discretizations of the worked counterexamples and seeded
//! random instance generators for the property suites. Every attached
//! expectation is re-verified by the corresponding checker when the
//! gallery suite runs.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extnum::ExtReal;
use crate::maps::SetValuedMap;
use crate::perturb::{find_violation, ConstantSet};
use crate::point::Point;
use crate::rat::{rat, rint, Rat};
use crate::regularity::{
    check_aubin, check_regular, check_restricted_regular, regularity_modulus, Window,
};
use crate::spaces::{diameter, ExplicitSpace, Space};

#[cfg(test)]
use crate::spaces::validate_metric;

/// Expected outcome attached to a gallery instance, re-checked by the
/// test suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    ModulusEquals { value: ExtReal, note: String },
    ModulusAtLeast { value: Rat, attained_y: Rat, note: String },
    /// No finite constant certifies regularity on the window.
    NoFiniteConstant { note: String },
    RegularPass { kappa: Rat, note: String },
    RegularFail { kappa: Rat, note: String },
    RestrictedPass { v_radius: Rat, kappa: Rat, note: String },
    AubinPassAll { samples: Vec<Rat>, note: String },
    ViolationWitness { kappa_hat: Rat, x: Rat, y: Rat, lhs: Rat, rhs: Rat, note: String },
    DiameterAtCenter { value: Rat, note: String },
    SumFiber { x: Rat, values: Vec<Rat>, note: String },
    InverseSumFiber { y: Rat, values: Vec<Rat>, note: String },
}

#[derive(Debug, Clone)]
pub struct GalleryInstance {
    pub name: String,
    pub x_space: Space,
    pub y_space: Space,
    pub f: SetValuedMap,
    pub g: Option<SetValuedMap>,
    pub x_candidates: Vec<Point>,
    pub y_candidates: Vec<Point>,
    pub window: Option<Window>,
    pub center: Option<(Point, Point, Point)>,
    /// Shrinking window radii for violation scans.
    pub radii: Vec<Rat>,
    pub constants: ConstantSet,
    pub expectations: Vec<Expectation>,
}

/// Grid points k*h strictly inside the open interval (lo, hi).
pub fn grid_open(lo: &Rat, hi: &Rat, h: &Rat) -> Vec<Point> {
    let mut out = Vec::new();
    let mut k: i64 = 0;
    loop {
        let v = h * rint(k);
        if v >= *hi {
            break;
        }
        if v > *lo {
            out.push(Point::scalar(v.clone()));
        }
        k += 1;
    }
    let mut k: i64 = -1;
    loop {
        let v = h * rint(k);
        if v <= *lo {
            break;
        }
        out.push(Point::scalar(v));
        k -= 1;
    }
    out.sort();
    out
}

fn divides(h: &Rat, v: &Rat) -> bool {
    (v / h).is_integer()
}

/// F(x) = {x, -1} sampled on a symmetric grid, with the ball-product
/// window (-alpha, alpha) x (-beta, beta). The step must divide both
/// radii so the open-interval boundaries fall on the grid.
pub fn two_lines(alpha: &Rat, beta: &Rat, h: &Rat) -> Result<GalleryInstance> {
    if h <= &Rat::zero() || alpha <= &Rat::zero() || beta <= &Rat::zero() {
        return Err(Error::domain("alpha, beta, and the step must be positive"));
    }
    if !divides(h, alpha) || !divides(h, beta) {
        return Err(Error::domain("the grid step must divide alpha and beta"));
    }
    let x_space = Space::line();
    let y_space = Space::line();
    let x_candidates = grid_open(&-alpha.clone(), alpha, h);
    let y_candidates = grid_open(&-beta.clone(), beta, h);
    let minus_one = Point::scalar(rint(-1));
    let f = SetValuedMap::new(
        x_space.clone(),
        y_space.clone(),
        x_candidates
            .iter()
            .flat_map(|x| [(x.clone(), x.clone()), (x.clone(), minus_one.clone())]),
    )?;
    let window = Window::product(&x_candidates, &y_candidates);

    let mut expectations = Vec::new();
    let one = rint(1);
    if beta <= alpha && beta <= &one && !x_candidates.is_empty() && y_candidates.len() > 1 {
        // exact grid modulus: the diagonal branch forces ratio 1, and the
        // constant branch peaks at the extreme pair (alpha - h, -(beta - h))
        let peak = (alpha + beta - rint(2) * h) / (&one - beta + h);
        let modulus = core::cmp::max(one.clone(), peak.clone());
        expectations.push(Expectation::ModulusEquals {
            value: ExtReal::Finite(modulus.clone()),
            note: String::from("grid evaluation of the two-branch distance ratio"),
        });
        if &peak > &one {
            expectations.push(Expectation::ModulusAtLeast {
                value: (beta - h) / (&one - beta + h),
                attained_y: -(beta - h),
                note: String::from("one-parameter lower-bound family evaluated at the grid edge"),
            });
            expectations.push(Expectation::RegularPass {
                kappa: modulus.clone(),
                note: String::from("the modulus itself certifies the window"),
            });
            if modulus > rint(2) {
                expectations.push(Expectation::RegularFail {
                    kappa: rint(2),
                    note: String::from("constants below the modulus fail with a witness"),
                });
            }
        } else {
            expectations.push(Expectation::RegularPass {
                kappa: one.clone(),
                note: String::from("narrow window, both branches separated"),
            });
        }
    }
    if beta > alpha && beta > &one {
        expectations.push(Expectation::NoFiniteConstant {
            note: String::from(
                "window right-hand sides below -1 have empty inverse fibers on this grid",
            ),
        });
    }
    if beta <= alpha {
        expectations.push(Expectation::RestrictedPass {
            v_radius: rat(1, 2),
            kappa: one,
            note: String::from("restriction inside the unit band keeps only the diagonal branch"),
        });
    }

    Ok(GalleryInstance {
        name: alloc::format!("two-lines({alpha},{beta},{h})"),
        x_space,
        y_space,
        f,
        g: None,
        x_candidates,
        y_candidates,
        window: Some(window),
        center: Some((
            Point::scalar(Rat::zero()),
            Point::scalar(Rat::zero()),
            Point::scalar(Rat::zero()),
        )),
        radii: Vec::new(),
        constants: ConstantSet { kappa: Some(rint(1)), ..Default::default() },
        expectations,
    })
}

/// F(x) = {x, -1} plus the step perturbation G(x) = {0, 1}: the sum is
/// not regular around the origin at any sampled scale, although G is
/// Hausdorff-Lipschitz with every constant.
pub fn sum_failure(kappa_hat: &Rat, h: &Rat) -> Result<GalleryInstance> {
    if h <= &Rat::zero() || kappa_hat <= &Rat::zero() {
        return Err(Error::domain("kappa_hat and the step must be positive"));
    }
    let x_space = Space::line();
    let y_space = Space::line();
    let span = rat(3, 2);
    let x_candidates = grid_open(&-span.clone(), &span, h);
    let half = rat(1, 2);
    let y_candidates = grid_open(&-half.clone(), &half, h);
    let minus_one = Point::scalar(rint(-1));
    let zero = Point::scalar(Rat::zero());
    let one_pt = Point::scalar(rint(1));
    let f = SetValuedMap::new(
        x_space.clone(),
        y_space.clone(),
        x_candidates
            .iter()
            .flat_map(|x| [(x.clone(), x.clone()), (x.clone(), minus_one.clone())]),
    )?;
    let g = SetValuedMap::new(
        x_space.clone(),
        y_space.clone(),
        x_candidates
            .iter()
            .flat_map(|x| [(x.clone(), zero.clone()), (x.clone(), one_pt.clone())]),
    )?;
    // shrinking scales, all of which still contain the canonical witness
    let wall = (kappa_hat + rint(1)) * h;
    let mut radii = Vec::new();
    let mut rho = half.clone();
    while rho > wall {
        radii.push(rho.clone());
        rho /= rint(2);
    }
    if radii.is_empty() {
        return Err(Error::domain("the step is too coarse for the requested constant"));
    }

    let expectations = alloc::vec![
        Expectation::ViolationWitness {
            kappa_hat: kappa_hat.clone(),
            x: kappa_hat * h,
            y: -h.clone(),
            lhs: (kappa_hat + rint(1)) * h,
            rhs: kappa_hat * h,
            note: String::from("one-step violation family at the finest scale"),
        },
        Expectation::AubinPassAll {
            samples: alloc::vec![rat(1, 10), rint(1)],
            note: String::from("constant fibers satisfy the Aubin inclusion for every constant"),
        },
        Expectation::DiameterAtCenter {
            value: rint(1),
            note: String::from("the step fiber has unit diameter"),
        },
        Expectation::SumFiber {
            x: Rat::zero(),
            values: alloc::vec![rint(-1), Rat::zero(), rint(1)],
            note: String::from("duplicates collapse at the origin"),
        },
        Expectation::SumFiber {
            x: h * rint(3),
            values: alloc::vec![h * rint(3), rint(-1), rint(1) + h * rint(3), Rat::zero()],
            note: String::from("generic four-element sum fiber"),
        },
        Expectation::InverseSumFiber {
            y: -h.clone(),
            values: alloc::vec![-h.clone(), -h - rint(1)],
            note: String::from("two preimages, one on each branch"),
        },
    ];

    Ok(GalleryInstance {
        name: alloc::format!("sum-failure({kappa_hat},{h})"),
        x_space,
        y_space,
        f,
        g: Some(g),
        x_candidates,
        y_candidates,
        window: None,
        center: Some((
            Point::scalar(Rat::zero()),
            Point::scalar(Rat::zero()),
            Point::scalar(Rat::zero()),
        )),
        radii,
        constants: ConstantSet { kappa_hat: Some(kappa_hat.clone()), ..Default::default() },
        expectations,
    })
}

/// Size bounds for random instances.
#[derive(Debug, Clone, Copy)]
pub struct RandomSizes {
    pub points: usize,
    pub max_fiber: usize,
}

/// A random rational in (0, max_num] with denominator up to max_den.
pub fn random_positive_rat(rng: &mut ChaCha8Rng, max_num: i64, max_den: i64) -> Rat {
    let num = rng.gen_range(1..=max_num);
    let den = rng.gen_range(1..=max_den);
    rat(num, den)
}

/// A random signed rational with |value| <= max_num.
pub fn random_rat(rng: &mut ChaCha8Rng, max_num: i64, max_den: i64) -> Rat {
    let num = rng.gen_range(-max_num..=max_num);
    let den = rng.gen_range(1..=max_den);
    rat(num, den)
}

/// A reproducible finite metric space: a random symmetric positive
/// matrix repaired into a metric by all-pairs shortest paths.
pub fn random_explicit_space(rng: &mut ChaCha8Rng, n: usize) -> ExplicitSpace {
    let names: Vec<String> = (0..n).map(|i| alloc::format!("p{i}")).collect();
    let mut dist = alloc::vec![alloc::vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = random_positive_rat(rng, 8, 4);
            dist[i][j] = d.clone();
            dist[j][i] = d;
        }
    }
    // metric repair by min-plus closure
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let via = &dist[i][k] + &dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    ExplicitSpace::new(names, dist).expect("shape is consistent by construction")
}

/// A reproducible random instance over an explicit space with a
/// one-dimensional rational target.
pub fn random_instance(seed: u64, sizes: RandomSizes) -> Result<GalleryInstance> {
    if sizes.points == 0 || sizes.points > 60 {
        return Err(Error::input("point count must be between 1 and 60"));
    }
    if sizes.max_fiber > 8 {
        return Err(Error::input("fiber bound must not exceed 8"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sizes.points;
    let space = random_explicit_space(&mut rng, n);
    let x_space = Space::Explicit(space);
    let y_space = Space::line();
    let x_candidates = x_space.enumerate().unwrap();
    // a small pool of target values
    let y_pool: Vec<Point> = (-8..=8).map(|k| Point::scalar(rat(k, 4))).collect();
    let mut pairs = Vec::new();
    for x in &x_candidates {
        let fiber_size = rng.gen_range(0..=sizes.max_fiber);
        for _ in 0..fiber_size {
            let y = &y_pool[rng.gen_range(0..y_pool.len())];
            pairs.push((x.clone(), y.clone()));
        }
    }
    let f = SetValuedMap::new(x_space.clone(), y_space.clone(), pairs)?;
    // window: random sub-product
    let wx: Vec<Point> = x_candidates
        .iter()
        .filter(|_| rng.gen_range(0..10) < 6)
        .cloned()
        .collect();
    let wy: Vec<Point> = y_pool
        .iter()
        .filter(|_| rng.gen_range(0..10) < 4)
        .cloned()
        .collect();
    let window = Window::product(&wx, &wy);
    Ok(GalleryInstance {
        name: alloc::format!("random({seed},{n},{})", sizes.max_fiber),
        x_space,
        y_space,
        f,
        g: None,
        x_candidates,
        y_candidates: y_pool,
        window: Some(window),
        center: None,
        radii: Vec::new(),
        constants: ConstantSet::default(),
        expectations: Vec::new(),
    })
}

/// Checks one attached expectation with the corresponding checker.
pub fn verify_expectation(inst: &GalleryInstance, exp: &Expectation) -> Result<()> {
    let window = inst
        .window
        .clone()
        .unwrap_or_else(|| Window::product(&inst.x_candidates, &inst.y_candidates));
    let fail = |msg: String| Err(Error::input(msg));
    match exp {
        Expectation::ModulusEquals { value, note } => {
            let got = regularity_modulus(&inst.f, &window)?;
            if &got.modulus != value {
                return fail(alloc::format!(
                    "modulus mismatch ({note}): expected {value}, got {}",
                    got.modulus
                ));
            }
        }
        Expectation::ModulusAtLeast { value, attained_y, note } => {
            let got = regularity_modulus(&inst.f, &window)?;
            if got.modulus < ExtReal::Finite(value.clone()) {
                return fail(alloc::format!(
                    "modulus too small ({note}): expected at least {value}, got {}",
                    got.modulus
                ));
            }
            let Some((_, y)) = &got.attained_at else {
                return fail(alloc::format!("no attaining pair reported ({note})"));
            };
            if y.as_scalar()? != attained_y {
                return fail(alloc::format!(
                    "attaining pair mismatch ({note}): expected y = {attained_y}, got {y}"
                ));
            }
        }
        Expectation::NoFiniteConstant { note } => {
            let got = regularity_modulus(&inst.f, &window)?;
            if !got.modulus.is_inf() {
                return fail(alloc::format!(
                    "expected no finite certifying constant ({note}), got modulus {}",
                    got.modulus
                ));
            }
        }
        Expectation::RegularPass { kappa, note } => {
            let v = check_regular(&inst.f, &window, kappa)?;
            if !v.holds {
                return fail(alloc::format!("regularity expected to pass ({note}): {v}"));
            }
        }
        Expectation::RegularFail { kappa, note } => {
            let v = check_regular(&inst.f, &window, kappa)?;
            if v.holds {
                return fail(alloc::format!("regularity expected to fail ({note})"));
            }
        }
        Expectation::RestrictedPass { v_radius, kappa, note } => {
            let mut pool: BTreeSet<Point> = inst.y_candidates.iter().cloned().collect();
            pool.extend(inst.f.range().cloned());
            let v_set: BTreeSet<Point> = pool
                .into_iter()
                .filter(|p| {
                    p.as_scalar().map(|s| s.abs() < *v_radius).unwrap_or(false)
                })
                .collect();
            let v = check_restricted_regular(&inst.f, &window, &v_set, kappa)?;
            if !v.holds {
                return fail(alloc::format!(
                    "restricted regularity expected to pass ({note}): {v}"
                ));
            }
        }
        Expectation::AubinPassAll { samples, note } => {
            let g = inst
                .g
                .as_ref()
                .ok_or_else(|| Error::input("expectation needs the perturbation part"))?;
            let mut v_all: BTreeSet<Point> = inst.y_candidates.iter().cloned().collect();
            v_all.extend(g.range().cloned());
            for ell in samples {
                let v = check_aubin(g, &inst.x_candidates, &v_all, ell)?;
                if !v.holds {
                    return fail(alloc::format!(
                        "Aubin check expected to pass with {ell} ({note}): {v}"
                    ));
                }
            }
        }
        Expectation::ViolationWitness { kappa_hat, x, y, lhs, rhs, note } => {
            let g = inst
                .g
                .as_ref()
                .ok_or_else(|| Error::input("expectation needs the perturbation part"))?;
            let h = inst.f.sum(g)?;
            let center = inst
                .center
                .as_ref()
                .ok_or_else(|| Error::input("expectation needs a center"))?;
            let y_center = crate::point::add_points(&center.1, &center.2)?;
            let report = find_violation(
                &h,
                kappa_hat,
                (&center.0, &y_center),
                &inst.radii,
                &inst.x_candidates,
                &inst.y_candidates,
            )?;
            if !report.violated_at_all_scales() {
                return fail(alloc::format!("violation missing at some scale ({note})"));
            }
            let w = report.witness().unwrap();
            let ok = w.x == Point::scalar(x.clone())
                && w.y == Point::scalar(y.clone())
                && w.lhs == ExtReal::Finite(lhs.clone())
                && w.rhs == ExtReal::Finite(rhs.clone());
            if !ok {
                return fail(alloc::format!(
                    "witness mismatch ({note}): got ({}, {}) with lhs {} rhs {}",
                    w.x,
                    w.y,
                    w.lhs,
                    w.rhs
                ));
            }
        }
        Expectation::DiameterAtCenter { value, note } => {
            let g = inst
                .g
                .as_ref()
                .ok_or_else(|| Error::input("expectation needs the perturbation part"))?;
            let center = inst
                .center
                .as_ref()
                .ok_or_else(|| Error::input("expectation needs a center"))?;
            let got = diameter(g.target_space(), &g.value(&center.0))?;
            if got != ExtReal::Finite(value.clone()) {
                return fail(alloc::format!(
                    "diameter mismatch ({note}): expected {value}, got {got}"
                ));
            }
        }
        Expectation::SumFiber { x, values, note } => {
            let g = inst
                .g
                .as_ref()
                .ok_or_else(|| Error::input("expectation needs the perturbation part"))?;
            let h = inst.f.sum(g)?;
            let got = h.value(&Point::scalar(x.clone()));
            let expected: BTreeSet<Point> =
                values.iter().map(|v| Point::scalar(v.clone())).collect();
            if got != expected {
                return fail(alloc::format!("sum fiber mismatch at {x} ({note})"));
            }
        }
        Expectation::InverseSumFiber { y, values, note } => {
            let g = inst
                .g
                .as_ref()
                .ok_or_else(|| Error::input("expectation needs the perturbation part"))?;
            let h = inst.f.sum(g)?;
            let got = h
                .inverse_fiber(&Point::scalar(y.clone()))
                .cloned()
                .unwrap_or_default();
            let expected: BTreeSet<Point> =
                values.iter().map(|v| Point::scalar(v.clone())).collect();
            if got != expected {
                return fail(alloc::format!("inverse sum fiber mismatch at {y} ({note})"));
            }
        }
    }
    Ok(())
}
