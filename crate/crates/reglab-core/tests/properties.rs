//! Property suites for the arithmetic layer, the spaces, the map
//! algebra, the regularity checkers, and the descent procedure.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use reglab_core::extnum::{inf_over, scale, sup_over, ExtReal};
use reglab_core::evp::{evp_descend, evp_descend_scaled, evp_verify, evp_verify_scaled, EvpInstance};
use reglab_core::gallery::{random_explicit_space, random_positive_rat, random_rat};
use reglab_core::maps::SetValuedMap;
use reglab_core::point::{add_points, Point};
use reglab_core::rat::{rat, rint, Rat};
use reglab_core::regularity::{
    check_gamma_regular, check_regular, check_restricted_regular, ratio_spectrum,
    regularity_modulus, GammaFunction, GammaVariant, Window,
};
use reglab_core::spaces::{validate_metric, LinearSpace, Norm, ProductKind, ProductSpace, Space};

fn arb_ext() -> impl Strategy<Value = ExtReal> {
    prop_oneof![
        (0i64..=40, 1i64..=8).prop_map(|(n, d)| ExtReal::Finite(rat(n, d))),
        Just(ExtReal::Inf),
    ]
}

fn arb_rat(max_abs: i64) -> impl Strategy<Value = Rat> {
    (-max_abs..=max_abs, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #[test]
    fn inf_shrinks_and_sup_grows_under_supersets(
        base in proptest::collection::vec(arb_ext(), 0..6),
        extra in proptest::collection::vec(arb_ext(), 0..4),
    ) {
        let mut bigger = base.clone();
        bigger.extend(extra);
        prop_assert!(inf_over(bigger.clone()) <= inf_over(base.clone()));
        prop_assert!(sup_over(base) <= sup_over(bigger));
    }

    #[test]
    fn scale_is_monotone_on_finite_inputs(
        a in 0i64..=20, b in 0i64..=20, c in 0i64..=20, d in 1i64..=6,
    ) {
        let (lo, hi) = (a.min(b), a.max(b));
        let factor = ExtReal::Finite(rat(c, d));
        let small = scale(&factor, &ExtReal::Finite(rint(lo)));
        let large = scale(&factor, &ExtReal::Finite(rint(hi)));
        prop_assert!(small <= large);
    }

    #[test]
    fn translation_invariance_exact(
        v in proptest::collection::vec(arb_rat(9), 2),
        w in proptest::collection::vec(arb_rat(9), 2),
        shift in proptest::collection::vec(arb_rat(9), 2),
        linf in any::<bool>(),
    ) {
        let norm = if linf { Norm::Linf } else { Norm::L1 };
        let space = LinearSpace::new(2, norm).unwrap();
        let pv = Point::vector(v);
        let pw = Point::vector(w);
        let pu = Point::vector(shift);
        let shifted_v = add_points(&pv, &pu).unwrap();
        let shifted_w = add_points(&pw, &pu).unwrap();
        prop_assert_eq!(
            space.distance(&pv, &pw).unwrap(),
            space.distance(&shifted_v, &shifted_w).unwrap()
        );
    }

    #[test]
    fn product_metric_axioms_on_small_spaces(
        seed in 0u64..200, lam_n in 1i64..=4, lam_d in 1i64..=4, sum_form in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let left = Space::Explicit(random_explicit_space(&mut rng, 3));
        let right = Space::Explicit(random_explicit_space(&mut rng, 2));
        let lambda = rat(lam_n, lam_d);
        let kind = if sum_form {
            ProductKind::SumScaled(lambda)
        } else {
            ProductKind::MaxScaled(lambda)
        };
        let prod = ProductSpace::new(left.clone(), right.clone(), kind).unwrap();
        let mut pts = Vec::new();
        for a in left.enumerate().unwrap() {
            for b in right.enumerate().unwrap() {
                pts.push(Point::pair(a.clone(), b.clone()));
            }
        }
        // identity, positivity, symmetry, triangle: exhaustive on 6 points
        for p in &pts {
            prop_assert!(prod.distance(p, p).unwrap() == rint(0));
        }
        for p in &pts {
            for q in &pts {
                let d_pq = prod.distance(p, q).unwrap();
                prop_assert_eq!(&d_pq, &prod.distance(q, p).unwrap());
                prop_assert!(p == q || d_pq > rint(0));
                for r in &pts {
                    let via = prod.distance(p, r).unwrap() + prod.distance(r, q).unwrap();
                    prop_assert!(d_pq <= via);
                }
            }
        }
    }

    #[test]
    fn max_and_sum_products_are_uniformly_equivalent(
        ax in arb_rat(9), ay in arb_rat(9), bx in arb_rat(9), by in arb_rat(9),
        lam_n in 1i64..=5, lam_d in 1i64..=5,
    ) {
        let lambda = rat(lam_n, lam_d);
        let xi = ProductSpace::new(Space::line(), Space::line(), ProductKind::MaxScaled(lambda.clone())).unwrap();
        let omega = ProductSpace::new(Space::line(), Space::line(), ProductKind::SumScaled(lambda)).unwrap();
        let p = Point::pair(Point::scalar(ax), Point::scalar(ay));
        let q = Point::pair(Point::scalar(bx), Point::scalar(by));
        let dxi = xi.distance(&p, &q).unwrap();
        let domega = omega.distance(&p, &q).unwrap();
        prop_assert!(dxi <= domega.clone());
        prop_assert!(domega <= rint(2) * dxi);
    }
}

fn random_graph_on(
    rng: &mut ChaCha8Rng,
    xs: &[Point],
    space: &Space,
    max_fiber: usize,
) -> SetValuedMap {
    use rand::Rng as _;
    let pool: Vec<Point> = (-6..=6).map(|k| Point::scalar(rat(k, 2))).collect();
    let pairs = xs.iter().flat_map(|x| {
        let size = rng.gen_range(0..=max_fiber);
        let mut out = Vec::new();
        for _ in 0..size {
            out.push((x.clone(), pool[rng.gen_range(0..pool.len())].clone()));
        }
        out
    });
    SetValuedMap::new(space.clone(), Space::line(), pairs.collect::<Vec<_>>()).unwrap()
}

#[test]
fn modulus_is_the_exact_regularity_threshold() {
    // on random instances, check_regular passes at the modulus and fails
    // strictly between the modulus and the next smaller attained ratio,
    // with the reported witness attaining the supremum
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut nontrivial = 0usize;
    for _ in 0..60 {
        let space = Space::Explicit(random_explicit_space(&mut rng, 6));
        let xs = space.enumerate().unwrap();
        let f = random_graph_on(&mut rng, &xs, &space, 3);
        // right-hand sides inside the range keep every inverse fiber
        // nonempty, so the modulus stays finite
        let ys: Vec<Point> = f.range().cloned().collect();
        if ys.is_empty() {
            continue;
        }
        let w = Window::product(&xs, &ys);
        let report = regularity_modulus(&f, &w).unwrap();
        let ExtReal::Finite(modulus) = &report.modulus else {
            continue;
        };
        if modulus == &rint(0) {
            continue;
        }
        nontrivial += 1;
        assert!(check_regular(&f, &w, modulus).unwrap().holds);
        let spectrum = ratio_spectrum(&f, &w).unwrap();
        let below = spectrum.iter().rev().find(|r| *r < &report.modulus);
        let kappa_mid = match below {
            Some(ExtReal::Finite(second)) => (second + modulus) / rint(2),
            _ => modulus / rint(2),
        };
        let verdict = check_regular(&f, &w, &kappa_mid).unwrap();
        assert!(!verdict.holds);
        let witness = verdict.witness.unwrap();
        assert_eq!(
            (witness.x, witness.y),
            report.attained_at.clone().unwrap(),
            "failing witness must attain the supremum"
        );
    }
    assert!(nontrivial >= 20, "generator produced too few nontrivial instances");
}

#[test]
fn modulus_is_monotone_in_the_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..40 {
        let space = Space::Explicit(random_explicit_space(&mut rng, 6));
        let xs = space.enumerate().unwrap();
        let f = random_graph_on(&mut rng, &xs, &space, 3);
        let ys: Vec<Point> = (-4..=4).map(|k| Point::scalar(rat(k, 2))).collect();
        let big = Window::product(&xs, &ys);
        let small = Window::product(&xs[..3], &ys[..5]);
        assert!(small.is_subset(&big));
        let m_small = regularity_modulus(&f, &small).unwrap().modulus;
        let m_big = regularity_modulus(&f, &big).unwrap().modulus;
        assert!(m_small <= m_big);
    }
}

#[test]
fn regular_implies_restricted_and_intersected_map_transfers() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    use rand::Rng as _;
    for round in 0..40 {
        let space = Space::Explicit(random_explicit_space(&mut rng, 5));
        let xs = space.enumerate().unwrap();
        let f = random_graph_on(&mut rng, &xs, &space, 3);
        let ys: Vec<Point> = (-4..=4).map(|k| Point::scalar(rat(k, 2))).collect();
        let w = Window::product(&xs, &ys);
        let report = regularity_modulus(&f, &w).unwrap();
        let kappa = match report.modulus.as_rat() {
            Some(m) if m > &rint(0) => m.clone(),
            _ => rint(1),
        };
        if !check_regular(&f, &w, &kappa).unwrap().holds {
            continue;
        }
        // restricted regularity follows for every V
        let v: BTreeSet<Point> = (-6..=6)
            .filter(|_| rng.gen_range(0..10) < 5)
            .map(|k| Point::scalar(rat(k, 2)))
            .collect();
        if v.is_empty() {
            continue;
        }
        assert!(
            check_restricted_regular(&f, &w, &v, &kappa).unwrap().holds,
            "round {round}: restriction may only weaken the estimate"
        );
        // and regularity of the intersected map transfers to the
        // restricted property of the original
        let x_all: BTreeSet<Point> = xs.iter().cloned().collect();
        let truncated = f.restrict(&x_all, &v);
        let m2 = regularity_modulus(&truncated, &w).unwrap().modulus;
        if let Some(k2) = m2.as_rat() {
            if k2 > &rint(0) && check_regular(&truncated, &w, k2).unwrap().holds {
                assert!(check_restricted_regular(&f, &w, &v, k2).unwrap().holds);
            }
        }
    }
}

#[test]
fn gamma_variant_a_gives_variant_b_for_reciprocal_rates() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..30 {
        let space = Space::Explicit(random_explicit_space(&mut rng, 5));
        let xs = space.enumerate().unwrap();
        let f = random_graph_on(&mut rng, &xs, &space, 3);
        let ys: Vec<Point> = (-3..=3).map(|k| Point::scalar(rat(k, 2))).collect();
        let w = Window::product(&xs, &ys);
        let gamma = GammaFunction::Constant(ExtReal::Finite(random_positive_rat(&mut rng, 4, 2)));
        let kappa = random_positive_rat(&mut rng, 3, 2);
        let a = check_gamma_regular(&f, &w, &gamma, &kappa, &GammaVariant::A, &xs).unwrap();
        if !a.holds {
            continue;
        }
        for num in 1..=2i64 {
            // delta in (0, 1/kappa]
            let delta = rat(num, 2) / &kappa;
            let b =
                check_gamma_regular(&f, &w, &gamma, &kappa, &GammaVariant::B(delta), &xs).unwrap();
            assert!(b.holds);
        }
    }
}

#[test]
fn descent_output_always_verifies_and_is_short() {
    // randomized objective over random metric spaces, including
    // infinite values away from the start
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    use rand::Rng as _;
    for round in 0..120 {
        let n = rng.gen_range(2..=12);
        let space = random_explicit_space(&mut rng, n);
        let points: Vec<Point> = (0..n).map(|i| Point::id(format!("p{i}"))).collect();
        let phi: std::collections::BTreeMap<Point, ExtReal> = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let v = if i > 0 && rng.gen_range(0..8) == 0 {
                    ExtReal::Inf
                } else {
                    ExtReal::Finite(random_positive_rat(&mut rng, 12, 4))
                };
                (p.clone(), v)
            })
            .collect();
        let start = points[rng.gen_range(0..n)].clone();
        if phi[&start].is_inf() {
            continue;
        }
        let inst =
            EvpInstance::new(Space::Explicit(space), points.clone(), phi, start).unwrap();
        let out = evp_descend(&inst).unwrap();
        assert!(out.steps <= n, "round {round}: descent too long");
        assert!(
            evp_verify(&inst, &out.point).unwrap().holds,
            "round {round}: output fails verification"
        );
        // scaled-metric variant used by the graph criteria
        let alpha = random_positive_rat(&mut rng, 1, 4);
        let scaled = evp_descend_scaled(&inst, &alpha).unwrap();
        assert!(evp_verify_scaled(&inst, &scaled.point, &alpha).unwrap().holds);
    }
}

#[test]
fn random_metric_spaces_validate() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for _ in 0..30 {
        let space = random_explicit_space(&mut rng, 8);
        assert!(validate_metric(&space).holds);
    }
    // random_rat helper stays within its bound
    for _ in 0..100 {
        let r = random_rat(&mut rng, 5, 3);
        assert!(r >= rat(-5, 1) && r <= rat(5, 1));
    }
}
