//! Deterministic generators shared by the integration suites.
#![allow(dead_code)] // each test target uses its own subset

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use symthick::chart::Point;
use symthick::expr::Expr;
use symthick::thickening::Connection;

/// Decimal-friendly coefficients: exact to parse, exact to reprint.
const COEFFS: [(i64, i64); 8] = [
    (-2, 1),
    (-1, 1),
    (-1, 2),
    (-1, 4),
    (1, 4),
    (1, 2),
    (1, 1),
    (2, 1),
];

pub fn random_coefficient(rng: &mut ChaCha8Rng) -> Expr {
    let (n, d) = COEFFS[rng.gen_range(0..COEFFS.len())];
    // negative constants as Neg(positive), the only shape the parser builds
    if n < 0 {
        Expr::neg(Expr::rational(-n, d))
    } else {
        Expr::rational(n, d)
    }
}

/// Random polynomial over coordinates `0..dim` of total degree <= `max_deg`:
/// a short sum of monomials with decimal-friendly coefficients.
pub fn random_polynomial(rng: &mut ChaCha8Rng, dim: usize, max_deg: usize) -> Expr {
    let n_terms = rng.gen_range(1..=3);
    let mut terms = Vec::new();
    for _ in 0..n_terms {
        let deg = rng.gen_range(0..=max_deg);
        let mut factors = vec![random_coefficient(rng)];
        for _ in 0..deg {
            factors.push(Expr::coord(rng.gen_range(0..dim)));
        }
        terms.push(Expr::mul(factors));
    }
    Expr::add(terms)
}

/// Random polynomial connection on the `(m, r)` base chart, entry degree
/// <= `max_deg`; roughly half the entries stay zero.
pub fn random_connection(
    rng: &mut ChaCha8Rng,
    m: usize,
    r: usize,
    max_deg: usize,
) -> Connection {
    let dim = 2 * m + r;
    let table = |rng: &mut ChaCha8Rng| -> Vec<Vec<Expr>> {
        (0..m)
            .map(|_| {
                (0..r)
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            random_polynomial(rng, dim, max_deg)
                        } else {
                            Expr::zero()
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let px = table(rng);
    let py = table(rng);
    Connection::new(m, r, px, py).expect("generated tables are valid")
}

/// General expression with transcendental nodes, bounded so finite-difference
/// derivative checks stay well-conditioned: small constants, exponents <= 3,
/// at most two nested transcendental calls.
pub fn random_expr(rng: &mut ChaCha8Rng, dim: usize) -> Expr {
    gen_node(rng, dim, 4, 2)
}

fn gen_leaf(rng: &mut ChaCha8Rng, dim: usize) -> Expr {
    match rng.gen_range(0..4) {
        0 => random_coefficient(rng),
        _ => Expr::coord(rng.gen_range(0..dim)),
    }
}

fn gen_node(rng: &mut ChaCha8Rng, dim: usize, depth: usize, trans: usize) -> Expr {
    if depth == 0 {
        return gen_leaf(rng, dim);
    }
    match rng.gen_range(0..10) {
        0..=2 => {
            let n = rng.gen_range(2..=3);
            Expr::add((0..n).map(|_| gen_node(rng, dim, depth - 1, trans)).collect())
        }
        3..=5 => {
            let n = rng.gen_range(2..=2);
            Expr::mul((0..n).map(|_| gen_node(rng, dim, depth - 1, trans)).collect())
        }
        6 => Expr::pow(gen_node(rng, dim, depth - 1, trans), rng.gen_range(2..=3)),
        7 => Expr::neg(gen_node(rng, dim, depth - 1, trans)),
        8 | 9 if trans > 0 => {
            let arg = gen_node(rng, dim, depth.min(2), trans - 1);
            match rng.gen_range(0..3) {
                0 => Expr::sin(arg),
                1 => Expr::cos(arg),
                _ => Expr::exp(arg),
            }
        }
        _ => gen_leaf(rng, dim),
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    Point::new((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

/// Central finite difference with step `h` in coordinate `i`.
pub fn central_difference(e: &Expr, pt: &[f64], i: usize, h: f64) -> f64 {
    let mut up = pt.to_vec();
    let mut down = pt.to_vec();
    up[i] += h;
    down[i] -= h;
    (e.eval(&up) - e.eval(&down)) / (2.0 * h)
}
