//! Canonical polynomial form.
//!
//! An expression is flattened into a sum of monomials over *atoms*: chart
//! coordinates and `sin`/`cos`/`exp` calls whose arguments are themselves
//! canonicalized. Two expressions that are identical as polynomials in these
//! atoms normalize to structurally equal trees, which is what form equality
//! and the route-equivalence verdicts rest on. No relations between
//! transcendental atoms are applied (`sin^2 + cos^2` stays as written).

use std::collections::BTreeMap;

use num::{BigRational, One, Signed, Zero};

use super::Expr;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Coord(usize),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
}

/// Monomial: atoms with positive integer exponents, ordered.
type Monomial = BTreeMap<Atom, u32>;

#[derive(Clone, Debug)]
struct Poly(BTreeMap<Monomial, BigRational>);

impl Poly {
    fn zero() -> Poly {
        Poly(BTreeMap::new())
    }

    fn constant(q: BigRational) -> Poly {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(Monomial::new(), q);
        }
        Poly(terms)
    }

    fn atom(a: Atom) -> Poly {
        let mut mono = Monomial::new();
        mono.insert(a, 1);
        let mut terms = BTreeMap::new();
        terms.insert(mono, BigRational::one());
        Poly(terms)
    }

    fn add_term(&mut self, mono: Monomial, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.0.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn add(mut self, other: Poly) -> Poly {
        for (mono, coeff) in other.0 {
            self.add_term(mono, coeff);
        }
        self
    }

    fn neg(mut self) -> Poly {
        for coeff in self.0.values_mut() {
            *coeff = -coeff.clone();
        }
        self
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                let mut mono = ma.clone();
                for (atom, exp) in mb {
                    *mono.entry(atom.clone()).or_insert(0) += exp;
                }
                out.add_term(mono, ca * cb);
            }
        }
        out
    }

    fn pow(&self, mut exp: u32) -> Poly {
        let mut result = Poly::constant(BigRational::one());
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Canonical expression: monomials in map order, coefficients rendered as
    /// non-negative constants under an optional negation, atoms in map order.
    /// Produces exactly the trees the parser can reproduce, so printing a
    /// normalized expression and reparsing it is lossless.
    fn into_expr(self) -> Expr {
        let mut terms = Vec::with_capacity(self.0.len());
        for (mono, coeff) in self.0 {
            let negative = coeff.is_negative();
            let magnitude = coeff.abs();
            let mut factors = Vec::new();
            if !magnitude.is_one() || mono.is_empty() {
                factors.push(Expr::Constant(magnitude));
            }
            for (atom, exp) in mono {
                let base = match atom {
                    Atom::Coord(i) => Expr::Coord(i),
                    Atom::Sin(arg) => Expr::Sin(Box::new(arg)),
                    Atom::Cos(arg) => Expr::Cos(Box::new(arg)),
                    Atom::Exp(arg) => Expr::Exp(Box::new(arg)),
                };
                factors.push(if exp == 1 {
                    base
                } else {
                    Expr::Power(Box::new(base), exp)
                });
            }
            let term = if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                Expr::Product(factors)
            };
            terms.push(if negative {
                Expr::Neg(Box::new(term))
            } else {
                term
            });
        }
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => Expr::Sum(terms),
        }
    }
}

fn to_poly(e: &Expr) -> Poly {
    match e {
        Expr::Constant(q) => Poly::constant(q.clone()),
        Expr::Coord(i) => Poly::atom(Atom::Coord(*i)),
        Expr::Sum(terms) => terms
            .iter()
            .fold(Poly::zero(), |acc, t| acc.add(to_poly(t))),
        Expr::Product(factors) => {
            let mut acc = Poly::constant(BigRational::one());
            for f in factors {
                acc = acc.mul(&to_poly(f));
                if acc.0.is_empty() {
                    return acc;
                }
            }
            acc
        }
        Expr::Power(base, k) => to_poly(base).pow(*k),
        Expr::Neg(inner) => to_poly(inner).neg(),
        Expr::Sin(a) => Poly::atom(Atom::Sin(normalize(a))),
        Expr::Cos(a) => Poly::atom(Atom::Cos(normalize(a))),
        Expr::Exp(a) => Poly::atom(Atom::Exp(normalize(a))),
    }
}

/// Canonical ordered-monomial form of `e`. Idempotent; two polynomially
/// identical expressions normalize to the same tree.
pub fn normalize(e: &Expr) -> Expr {
    to_poly(e).into_expr()
}

/// True when the canonical form of `e` is the empty sum.
pub fn is_zero(e: &Expr) -> bool {
    to_poly(e).0.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::expr::parse;

    #[test]
    fn normalize_is_idempotent() {
        let c = Chart::base(2, 1);
        for text in [
            "(x1+y1)^3 - x2*z1",
            "sin(x1)*sin(x1) + cos(x2)^2",
            "2*x1*(y1 - 0.5*x1)^2",
            "exp(x1+x1) - exp(2*x1)",
        ] {
            let n = parse(text, &c).unwrap().normalize();
            assert_eq!(n.normalize(), n, "idempotence on {text}");
        }
    }

    #[test]
    fn exact_cancellation_of_polynomials() {
        let c = Chart::base(1, 1);
        let e = parse("(x1+y1)^2 - x1^2 - 2*x1*y1 - y1^2", &c).unwrap();
        assert!(is_zero(&e));
    }

    #[test]
    fn transcendental_atoms_with_same_argument_cancel() {
        let c = Chart::base(1, 0);
        let e = parse("sin(2*x1) - sin(x1+x1)", &c).unwrap();
        assert!(is_zero(&e));
    }

    #[test]
    fn unrelated_transcendentals_do_not_cancel() {
        let c = Chart::base(1, 0);
        let e = parse("sin(x1)^2 + cos(x1)^2 - 1", &c).unwrap();
        assert!(!is_zero(&e));
    }

    #[test]
    fn evaluation_agrees_with_normal_form() {
        let c = Chart::base(2, 1);
        let texts = [
            "(x1 + 2*y1 - x2)^3",
            "x1*y2*z1 - 0.25*(x2 - y1)^2",
            "(x1 - 1)*(x1 + 1) - x1^2 + 1",
        ];
        let pt = [0.37, -1.21, 0.64, 0.11, -0.53];
        for text in texts {
            let e = parse(text, &c).unwrap();
            let n = e.normalize();
            let a = e.eval(&pt);
            let b = n.eval(&pt);
            let rel = (a - b).abs() / (1.0 + a.abs());
            assert!(rel < 1e-12, "{text}: {a} vs {b}");
        }
    }

    #[test]
    fn normalized_tree_reparses_losslessly() {
        let c = Chart::base(2, 1);
        for text in ["-(x1^2) + 3*y1*x2 - 0.5", "sin(x1)*(1 - y1)^2"] {
            let n = parse(text, &c).unwrap().normalize();
            let printed = n.display(&c).to_string();
            assert_eq!(parse(&printed, &c).unwrap(), n, "on {text}");
        }
    }
}
