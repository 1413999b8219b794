//! Algebraic invariants: expression round-trips and derivative checks via
//! proptest, exterior-calculus identities over seeded random forms and maps.

mod common;

use std::sync::Arc;

use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{central_difference, random_point, random_polynomial};
use symthick::chart::Chart;
use symthick::expr::{parse, Expr};
use symthick::forms::{KForm, SmoothMap, VectorField};
use symthick::sample::uniform_points;

// ---------------------------------------------------------------------------
// expression properties
// ---------------------------------------------------------------------------

/// Trees shaped the way the parser builds them: non-negative constants (the
/// parser produces `Neg` for minus signs) and n-ary nodes with >= 2 children.
fn arb_expr(dim: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..=6).prop_map(Expr::integer),
        Just(Expr::rational(1, 2)),
        Just(Expr::rational(3, 4)),
        Just(Expr::rational(13, 10)),
        (0..dim).prop_map(Expr::Coord),
    ];
    leaf.prop_recursive(4, 48, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Sum),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Product),
            (inner.clone(), 0u32..4).prop_map(|(b, k)| Expr::Power(Box::new(b), k)),
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            inner.clone().prop_map(|e| Expr::Sin(Box::new(e))),
            inner.clone().prop_map(|e| Expr::Cos(Box::new(e))),
            inner.prop_map(|e| Expr::Exp(Box::new(e))),
        ]
    })
}

/// Polynomial-only trees with small exponents (kept cheap to expand).
fn arb_poly_expr(dim: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..=4).prop_map(Expr::integer),
        Just(Expr::rational(1, 2)),
        (0..dim).prop_map(Expr::Coord),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::Product),
            (inner.clone(), 0u32..4).prop_map(|(b, k)| Expr::Power(Box::new(b), k)),
            inner.prop_map(|e| Expr::Neg(Box::new(e))),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_is_identity_on_parser_shaped_trees(e in arb_expr(5)) {
        let chart = Chart::thickened(2, 1);
        let printed = e.display(&chart).to_string();
        let parsed = parse(&printed, &chart).expect("printed text must parse");
        prop_assert_eq!(parsed, e);
    }

    #[test]
    fn normalize_is_idempotent(e in arb_expr(5)) {
        let n = e.normalize();
        prop_assert_eq!(n.normalize(), n);
    }

    #[test]
    fn normalization_preserves_polynomial_values(e in arb_poly_expr(4)) {
        let n = e.normalize();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..4 {
            let pt: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = e.eval(&pt);
            let b = n.eval(&pt);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference(e in arb_expr(4), idx in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pt = random_point(&mut rng, 4);
        let sym = e.diff(idx).eval(pt.values());
        let fd = central_difference(&e, pt.values(), idx, 1e-5);
        let fd_half = central_difference(&e, pt.values(), idx, 5e-6);
        let f = e.eval(pt.values());
        let well_conditioned = sym.is_finite()
            && fd.is_finite()
            && fd_half.is_finite()
            && sym.abs() <= 1e12
            && f.abs() <= 1e4 * (1.0 + sym.abs())
            && (fd - fd_half).abs() <= 1e-7 * (1.0 + fd_half.abs());
        if well_conditioned {
            let rel = (sym - fd).abs() / (1.0 + sym.abs());
            prop_assert!(rel < 1e-6, "sym {sym} fd {fd} rel {rel}");
        }
    }
}

// ---------------------------------------------------------------------------
// exterior-calculus identities over seeded random data
// ---------------------------------------------------------------------------

fn random_form(rng: &mut ChaCha8Rng, chart: &Arc<Chart>, degree: usize) -> KForm {
    let dim = chart.dim();
    let n_terms = rng.gen_range(1..=3);
    let mut terms = Vec::new();
    for _ in 0..n_terms {
        let mut tuple: Vec<usize> = (0..dim).collect();
        for i in (1..dim).rev() {
            let j = rng.gen_range(0..=i);
            tuple.swap(i, j);
        }
        tuple.truncate(degree);
        tuple.sort_unstable();
        if tuple.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        terms.push((tuple, random_polynomial(rng, dim, 2)));
    }
    KForm::from_terms(chart.clone(), degree, terms).expect("generated tuples are valid")
}

fn random_field(rng: &mut ChaCha8Rng, chart: &Arc<Chart>) -> VectorField {
    let dim = chart.dim();
    let components = (0..dim).map(|_| random_polynomial(rng, dim, 2)).collect();
    VectorField::new(chart.clone(), components).expect("components fit the chart")
}

fn random_map(rng: &mut ChaCha8Rng, source: &Arc<Chart>, target: &Arc<Chart>) -> SmoothMap {
    let components = (0..target.dim())
        .map(|_| random_polynomial(rng, source.dim(), 2))
        .collect();
    SmoothMap::new(source.clone(), target.clone(), components).expect("components fit the chart")
}

#[test]
fn exterior_derivative_squares_to_zero() {
    let chart = Arc::new(Chart::base(2, 1));
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for i in 0..200 {
        let degree = rng.gen_range(0..=2);
        let form = random_form(&mut rng, &chart, degree);
        let dd = form.exterior_derivative().exterior_derivative();
        assert!(dd.is_zero(), "case {i} (degree {degree}): d∘d != 0");
    }
}

#[test]
fn wedge_is_graded_commutative() {
    let chart = Arc::new(Chart::base(2, 1));
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..100 {
        let p = rng.gen_range(0..=2);
        let q = rng.gen_range(0..=2);
        let a = random_form(&mut rng, &chart, p);
        let b = random_form(&mut rng, &chart, q);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        let sign = if (p * q) % 2 == 0 { 1 } else { -1 };
        let expected = ba.scale(&Expr::integer(sign));
        assert_eq!(ab, expected, "degrees ({p}, {q})");
    }
}

#[test]
fn pullback_is_functorial() {
    let a = Arc::new(Chart::base(1, 1));
    let b = Arc::new(Chart::base(2, 0));
    let c = Arc::new(Chart::base(1, 0));
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..50 {
        let f = random_map(&mut rng, &a, &b);
        let g = random_map(&mut rng, &b, &c);
        let degree = rng.gen_range(0..=2);
        let form = random_form(&mut rng, &c, degree);
        let composed = g.compose(&f).unwrap();
        let direct = composed.pullback(&form).unwrap();
        let staged = f.pullback(&g.pullback(&form).unwrap()).unwrap();
        assert_eq!(direct, staged, "degree {degree}");
    }
}

#[test]
fn pullback_commutes_with_exterior_derivative() {
    let a = Arc::new(Chart::base(1, 1));
    let b = Arc::new(Chart::base(2, 0));
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for _ in 0..50 {
        let f = random_map(&mut rng, &a, &b);
        let degree = rng.gen_range(0..=2);
        let form = random_form(&mut rng, &b, degree);
        let lhs = f.pullback(&form.exterior_derivative()).unwrap();
        let rhs = f.pullback(&form).unwrap().exterior_derivative();
        assert_eq!(lhs, rhs, "degree {degree}");
    }
}

#[test]
fn interior_product_follows_graded_leibniz_rule() {
    // i_X(a ∧ b) = (i_X a) ∧ b + (-1)^deg(a) a ∧ (i_X b), checked
    // symbolically for 1-form a against 1- and 2-form b.
    let chart = Arc::new(Chart::base(2, 1));
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    for _ in 0..50 {
        let x = random_field(&mut rng, &chart);
        let a = random_form(&mut rng, &chart, 1);
        let qb = rng.gen_range(1..=2);
        let b = random_form(&mut rng, &chart, qb);
        let lhs = a.wedge(&b).unwrap().interior_product(&x).unwrap();
        let rhs = a
            .interior_product(&x)
            .unwrap()
            .wedge(&b)
            .unwrap()
            .add(&a.wedge(&b.interior_product(&x).unwrap()).unwrap().scale(&Expr::integer(-1)))
            .unwrap();
        assert_eq!(lhs, rhs, "b degree {qb}");
    }
}

#[test]
fn interior_product_matches_pointwise_contraction() {
    // (i_X w)(v_2, ..., v_k) = w(X(pt), v_2, ..., v_k) at 50 sampled points.
    let chart = Arc::new(Chart::base(2, 1));
    let dim = chart.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(127);
    for _ in 0..50 {
        let x = random_field(&mut rng, &chart);
        let a = random_form(&mut rng, &chart, 1);
        let qb = rng.gen_range(1..=2);
        let b = random_form(&mut rng, &chart, qb);
        let w = a.wedge(&b).unwrap();
        let k = w.degree();
        let contracted = w.interior_product(&x).unwrap();
        let pt = uniform_points(dim, 1, &mut rng).pop().unwrap();
        let vectors: Vec<DVector<f64>> = (0..k - 1)
            .map(|_| DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0)))
            .collect();
        let lhs = contracted.apply_at(&pt, &vectors).unwrap();
        let mut with_x = vec![x.eval_at(&pt)];
        with_x.extend(vectors.iter().cloned());
        let rhs = w.apply_at(&pt, &with_x).unwrap();
        assert!(
            (lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()),
            "lhs {lhs} rhs {rhs}"
        );
    }
}
