//! Scalar coefficient expressions over a coordinate chart.
//!
//! The node set is deliberately small: polynomials in the chart coordinates
//! plus `sin`, `cos` and `exp`, closed under symbolic differentiation. There
//! is no division, so every constant reachable from parsed input stays an
//! exact decimal rational and polynomial identities cancel exactly under
//! [`Expr::normalize`].
//!
//! Expressions are immutable; all operations are pure functions.

use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::chart::Chart;

mod normalize;
mod parser;

pub use normalize::normalize;
pub use parser::parse;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

/// Symbolic scalar expression. Coordinate references are indices into a
/// [`Chart`]; the chart itself is supplied where names are needed (parsing
/// and printing).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Expr {
    Constant(BigRational),
    Coord(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Box<Expr>, u32),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn integer(n: i64) -> Expr {
        Expr::Constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::Constant(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn constant(q: BigRational) -> Expr {
        Expr::Constant(q)
    }

    pub fn coord(index: usize) -> Expr {
        Expr::Coord(index)
    }

    pub fn zero() -> Expr {
        Expr::integer(0)
    }

    pub fn one() -> Expr {
        Expr::integer(1)
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Constant(q) if q.is_zero())
    }

    pub fn is_one_literal(&self) -> bool {
        matches!(self, Expr::Constant(q) if q.is_one())
    }

    /// Sum that splices nested sums and drops literal zeros.
    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                Expr::Sum(inner) => out.extend(inner),
                t if t.is_zero_literal() => {}
                t => out.push(t),
            }
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out),
        }
    }

    /// Product that splices nested products, drops literal ones, and
    /// collapses to zero on a literal zero factor.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut out = Vec::with_capacity(factors.len());
        for t in factors {
            match t {
                Expr::Product(inner) => out.extend(inner),
                t if t.is_zero_literal() => return Expr::zero(),
                t if t.is_one_literal() => {}
                t => out.push(t),
            }
        }
        match out.len() {
            0 => Expr::one(),
            1 => out.pop().unwrap(),
            _ => Expr::Product(out),
        }
    }

    pub fn pow(base: Expr, exponent: u32) -> Expr {
        match exponent {
            0 => Expr::one(),
            1 => base,
            _ if base.is_zero_literal() => Expr::zero(),
            _ if base.is_one_literal() => Expr::one(),
            _ => Expr::Power(Box::new(base), exponent),
        }
    }

    #[allow(clippy::should_implement_trait)] // by-value constructor, like `add`/`mul`
    pub fn neg(e: Expr) -> Expr {
        match e {
            e if e.is_zero_literal() => Expr::zero(),
            Expr::Neg(inner) => *inner,
            e => Expr::Neg(Box::new(e)),
        }
    }

    pub fn sin(e: Expr) -> Expr {
        Expr::Sin(Box::new(e))
    }

    pub fn cos(e: Expr) -> Expr {
        Expr::Cos(Box::new(e))
    }

    pub fn exp(e: Expr) -> Expr {
        Expr::Exp(Box::new(e))
    }

    /// Exact partial derivative with respect to the coordinate `coord`.
    pub fn diff(&self, coord: usize) -> Expr {
        match self {
            Expr::Constant(_) => Expr::zero(),
            Expr::Coord(i) => {
                if *i == coord {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Sum(terms) => Expr::add(terms.iter().map(|t| t.diff(coord)).collect()),
            Expr::Product(factors) => {
                let mut terms = Vec::with_capacity(factors.len());
                for (k, fk) in factors.iter().enumerate() {
                    let dk = fk.diff(coord);
                    if dk.is_zero_literal() {
                        continue;
                    }
                    let mut fs: Vec<Expr> = factors.clone();
                    fs[k] = dk;
                    terms.push(Expr::mul(fs));
                }
                Expr::add(terms)
            }
            Expr::Power(base, k) => {
                if *k == 0 {
                    return Expr::zero();
                }
                let db = base.diff(coord);
                if db.is_zero_literal() {
                    return Expr::zero();
                }
                Expr::mul(vec![
                    Expr::integer(*k as i64),
                    Expr::pow((**base).clone(), k - 1),
                    db,
                ])
            }
            Expr::Neg(inner) => Expr::neg(inner.diff(coord)),
            Expr::Sin(a) => Expr::mul(vec![Expr::cos((**a).clone()), a.diff(coord)]),
            Expr::Cos(a) => Expr::neg(Expr::mul(vec![
                Expr::sin((**a).clone()),
                a.diff(coord),
            ])),
            Expr::Exp(a) => Expr::mul(vec![Expr::exp((**a).clone()), a.diff(coord)]),
        }
    }

    /// IEEE-double evaluation. `values` must cover every coordinate index the
    /// expression references (callers validate point dimensions).
    pub fn eval(&self, values: &[f64]) -> f64 {
        match self {
            Expr::Constant(q) => q.to_f64().expect("rational representable as f64"),
            Expr::Coord(i) => values[*i],
            Expr::Sum(terms) => terms.iter().map(|t| t.eval(values)).sum(),
            Expr::Product(factors) => factors.iter().map(|t| t.eval(values)).product(),
            Expr::Power(base, k) => {
                let b = base.eval(values);
                if *k <= i32::MAX as u32 {
                    b.powi(*k as i32)
                } else {
                    b.powf(*k as f64)
                }
            }
            Expr::Neg(inner) => -inner.eval(values),
            Expr::Sin(a) => a.eval(values).sin(),
            Expr::Cos(a) => a.eval(values).cos(),
            Expr::Exp(a) => a.eval(values).exp(),
        }
    }

    /// Replace every coordinate reference `i` by `repl[i]`.
    pub fn substitute(&self, repl: &[Expr]) -> Expr {
        match self {
            Expr::Constant(_) => self.clone(),
            Expr::Coord(i) => repl[*i].clone(),
            Expr::Sum(terms) => Expr::add(terms.iter().map(|t| t.substitute(repl)).collect()),
            Expr::Product(fs) => Expr::mul(fs.iter().map(|t| t.substitute(repl)).collect()),
            Expr::Power(base, k) => Expr::pow(base.substitute(repl), *k),
            Expr::Neg(inner) => Expr::neg(inner.substitute(repl)),
            Expr::Sin(a) => Expr::sin(a.substitute(repl)),
            Expr::Cos(a) => Expr::cos(a.substitute(repl)),
            Expr::Exp(a) => Expr::exp(a.substitute(repl)),
        }
    }

    /// Largest coordinate index referenced, or `None` for constant trees.
    pub fn max_coord_index(&self) -> Option<usize> {
        match self {
            Expr::Constant(_) => None,
            Expr::Coord(i) => Some(*i),
            Expr::Sum(xs) | Expr::Product(xs) => {
                xs.iter().filter_map(|x| x.max_coord_index()).max()
            }
            Expr::Power(b, _) => b.max_coord_index(),
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.max_coord_index(),
        }
    }

    /// True when the coordinate `coord` appears anywhere in the tree.
    pub fn references(&self, coord: usize) -> bool {
        match self {
            Expr::Constant(_) => false,
            Expr::Coord(i) => *i == coord,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(|x| x.references(coord)),
            Expr::Power(b, _) => b.references(coord),
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.references(coord),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        match self {
            Expr::Constant(_) | Expr::Coord(_) => true,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().all(|x| x.is_polynomial()),
            Expr::Power(b, _) => b.is_polynomial(),
            Expr::Neg(a) => a.is_polynomial(),
            Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) => false,
        }
    }

    /// Canonical ordered-monomial form; see [`normalize`].
    pub fn normalize(&self) -> Expr {
        normalize(self)
    }

    /// Symbolic zero test: the canonical form is empty. Exact for
    /// polynomials; for transcendental-mixed trees this treats `sin`/`cos`/
    /// `exp` atoms as independent variables, so `true` is always sound while
    /// `false` may still be a functional zero (see [`numeric_zero_residual`]).
    pub fn is_zero(&self) -> bool {
        normalize::is_zero(self)
    }

    pub fn display<'a>(&'a self, chart: &'a Chart) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, chart }
    }
}

/// Randomized zero audit for transcendental-mixed expressions: maximum
/// absolute value over `n` seeded points of `[-1, 1]^dim`.
pub fn numeric_zero_residual(e: &Expr, dim: usize, n: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let pt: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(e.eval(&pt).abs());
    }
    worst
}

/// Default zero audit: 32 sampled points against a `1e-9` tolerance. This is
/// the fallback where the symbolic test cannot decide (relations between
/// transcendental atoms, e.g. `sin^2 + cos^2 - 1`); exact zero testing with
/// transcendentals is undecidable, sampling is auditable.
pub fn is_numerically_zero(e: &Expr, dim: usize, seed: u64) -> bool {
    numeric_zero_residual(e, dim, 32, seed) <= 1e-9
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// Binding strength of a grammar position. Children printed at a position
/// requiring more binding than they provide get parenthesized, which makes
/// `parse(print(e)) == e` for every parser-produced tree.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Sum = 0,
    Term = 1,
    Factor = 2,
    Atom = 3,
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    chart: &'a Chart,
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, self.chart, Prec::Sum)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, chart: &Chart, pos: Prec) -> fmt::Result {
    let own = match e {
        Expr::Sum(_) => Prec::Sum,
        Expr::Product(_) => Prec::Term,
        Expr::Power(_, _) => Prec::Factor,
        // Negation, calls, constants and coordinates are atom productions.
        _ => Prec::Atom,
    };
    let parens = own < pos;
    if parens {
        write!(f, "(")?;
    }
    match e {
        Expr::Constant(q) => write!(f, "{}", decimal_string(q))?,
        Expr::Coord(i) => write!(f, "{}", chart.name(*i))?,
        Expr::Sum(terms) => {
            for (k, t) in terms.iter().enumerate() {
                if k == 0 {
                    write_expr(f, t, chart, Prec::Term)?;
                } else if let Expr::Neg(inner) = t {
                    write!(f, " - ")?;
                    write_expr(f, inner, chart, Prec::Term)?;
                } else {
                    write!(f, " + ")?;
                    write_expr(f, t, chart, Prec::Term)?;
                }
            }
        }
        Expr::Product(factors) => {
            for (k, t) in factors.iter().enumerate() {
                if k > 0 {
                    write!(f, "*")?;
                }
                write_expr(f, t, chart, Prec::Factor)?;
            }
        }
        Expr::Power(base, k) => {
            write_expr(f, base, chart, Prec::Atom)?;
            write!(f, "^{k}")?;
        }
        Expr::Neg(inner) => {
            write!(f, "-")?;
            write_expr(f, inner, chart, Prec::Atom)?;
        }
        Expr::Sin(a) => {
            write!(f, "sin(")?;
            write_expr(f, a, chart, Prec::Sum)?;
            write!(f, ")")?;
        }
        Expr::Cos(a) => {
            write!(f, "cos(")?;
            write_expr(f, a, chart, Prec::Sum)?;
            write!(f, ")")?;
        }
        Expr::Exp(a) => {
            write!(f, "exp(")?;
            write_expr(f, a, chart, Prec::Sum)?;
            write!(f, ")")?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

/// Exact decimal rendering. Every constant reachable from the grammar has a
/// denominator of the form 2^a·5^b (decimal literals under +, -, *, ^), so
/// this prints losslessly. Other denominators — only constructible through
/// the API — fall back to `p/q`, which the grammar deliberately rejects.
pub fn decimal_string(q: &BigRational) -> String {
    let (sign, q) = if q.is_negative() {
        ("-", -q.clone())
    } else {
        ("", q.clone())
    };
    let numer = q.numer().clone();
    let denom = q.denom().clone();
    if denom.is_one() {
        return format!("{sign}{numer}");
    }
    let mut twos = 0u32;
    let mut fives = 0u32;
    let mut d = denom.clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{sign}{numer}/{denom}");
    }
    let k = twos.max(fives);
    let scale = BigInt::from(10).pow(k) / denom;
    let digits = (numer * scale).to_string();
    let k = k as usize;
    if digits.len() > k {
        let (int_part, frac_part) = digits.split_at(digits.len() - k);
        format!("{sign}{int_part}.{frac_part}")
    } else {
        format!("{sign}0.{digits:0>width$}", width = k)
    }
}
