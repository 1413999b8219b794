//! Exterior calculus over a fixed chart: sparse k-forms with symbolic
//! coefficients, vector fields, smooth maps, wedge product, exterior
//! derivative, interior product, pullback, and pointwise matrix assembly.
//!
//! Sign conventions, fixed once for the whole crate:
//!   * basis k-forms are indexed by strictly increasing coordinate tuples;
//!   * the wedge sign is the parity of the merge permutation;
//!   * the interior product follows the graded rule
//!     `i_X(a ∧ b) = (i_X a) ∧ b + (-1)^deg(a) a ∧ (i_X b)`,
//!     so on a basis tuple it contracts slot `j` with sign `(-1)^j`;
//!   * the exterior derivative wedges the coefficient differential from the
//!     left: `d(f dx_T) = df ∧ dx_T`.
//!
//! Every operation returns coefficient tables in normalized form with zero
//! coefficients pruned, so form equality is table equality.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::chart::{Chart, Point};
use crate::expr::Expr;

#[derive(Debug, Error)]
pub enum FormError {
    #[error("forms live on different charts")]
    ChartMismatch,
    #[error("expected a form of degree {expected}, got degree {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("index tuple {tuple:?} is invalid for degree {degree} on a chart of dimension {dim}")]
    InvalidTuple {
        tuple: Vec<usize>,
        degree: usize,
        dim: usize,
    },
    #[error("point has dimension {found}, chart has dimension {expected}")]
    PointDimension { expected: usize, found: usize },
    #[error("interior product requires degree >= 1")]
    DegreeZeroContraction,
    #[error("map component count {found} does not match target dimension {expected}")]
    ComponentCount { expected: usize, found: usize },
    #[error("expression references coordinate index {index}, outside the chart (dim {dim})")]
    CoordOutOfRange { index: usize, dim: usize },
    #[error("chart is not an extension of the form's chart")]
    NotAnExtension,
}

/// Merge two strictly increasing tuples, returning the merged tuple and the
/// parity sign of the interleaving; `None` when an index repeats.
fn merge_tuples(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else if a[i] > b[j] {
            // b[j] jumps over the remaining elements of a
            inversions += a.len() - i;
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    let sign = if inversions.is_multiple_of(2) { 1 } else { -1 };
    Some((out, sign))
}

/// Sort an arbitrary tuple into increasing order, tracking the permutation
/// parity; `None` when an index repeats.
fn sort_tuple(t: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut v = t.to_vec();
    let mut swaps = 0usize;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            swaps += 1;
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((v, if swaps.is_multiple_of(2) { 1 } else { -1 }))
}

/// Degree-k differential form with symbolic coefficients, stored sparsely
/// over strictly increasing index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct KForm {
    degree: usize,
    chart: Arc<Chart>,
    terms: BTreeMap<Vec<usize>, Expr>,
}

impl KForm {
    pub fn zero(chart: Arc<Chart>, degree: usize) -> KForm {
        KForm {
            degree,
            chart,
            terms: BTreeMap::new(),
        }
    }

    /// Degree-0 form wrapping a scalar expression.
    pub fn function(chart: Arc<Chart>, expr: Expr) -> KForm {
        let mut f = KForm::zero(chart, 0);
        f.insert_raw(Vec::new(), expr);
        f
    }

    /// The coordinate differential `d(coordinate index)`.
    pub fn coordinate_differential(chart: Arc<Chart>, index: usize) -> KForm {
        let mut f = KForm::zero(chart, 1);
        f.insert_raw(vec![index], Expr::one());
        f
    }

    /// Basis form `dx_{t0} ∧ dx_{t1} ∧ ...` for an arbitrary tuple of
    /// distinct indices (sign-normalized into increasing order).
    pub fn basis(chart: Arc<Chart>, tuple: &[usize]) -> Result<KForm, FormError> {
        KForm::from_terms(chart, tuple.len(), [(tuple.to_vec(), Expr::one())])
    }

    /// General constructor: tuples may arrive unsorted and repeated; they are
    /// sign-normalized and accumulated, then the table is normalized.
    pub fn from_terms(
        chart: Arc<Chart>,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, Expr)>,
    ) -> Result<KForm, FormError> {
        let dim = chart.dim();
        let mut form = KForm::zero(chart, degree);
        for (tuple, coeff) in terms {
            if tuple.len() != degree || tuple.iter().any(|&i| i >= dim) {
                return Err(FormError::InvalidTuple {
                    tuple,
                    degree,
                    dim,
                });
            }
            match sort_tuple(&tuple) {
                None => continue, // repeated index: the basis form vanishes
                Some((sorted, sign)) => {
                    let signed = if sign < 0 { Expr::neg(coeff) } else { coeff };
                    form.insert_raw(sorted, signed);
                }
            }
        }
        Ok(form.normalized())
    }

    fn insert_raw(&mut self, tuple: Vec<usize>, coeff: Expr) {
        match self.terms.entry(tuple) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let prev = o.get().clone();
                *o.get_mut() = Expr::add(vec![prev, coeff]);
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, Expr> {
        &self.terms
    }

    pub fn coefficient(&self, tuple: &[usize]) -> Expr {
        self.terms.get(tuple).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Canonicalize every coefficient and prune symbolic zeros.
    pub fn normalized(&self) -> KForm {
        let mut terms = BTreeMap::new();
        for (t, c) in &self.terms {
            let n = c.normalize();
            if !n.is_zero_literal() {
                terms.insert(t.clone(), n);
            }
        }
        KForm {
            degree: self.degree,
            chart: self.chart.clone(),
            terms,
        }
    }

    fn check_chart(&self, other: &KForm) -> Result<(), FormError> {
        if *self.chart != *other.chart {
            return Err(FormError::ChartMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &KForm) -> Result<KForm, FormError> {
        self.check_chart(other)?;
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.insert_raw(t.clone(), c.clone());
        }
        Ok(out.normalized())
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm, FormError> {
        self.add(&other.scale(&Expr::integer(-1)))
    }

    pub fn scale(&self, factor: &Expr) -> KForm {
        let mut out = KForm::zero(self.chart.clone(), self.degree);
        for (t, c) in &self.terms {
            out.insert_raw(t.clone(), Expr::mul(vec![factor.clone(), c.clone()]));
        }
        out.normalized()
    }

    /// Wedge product with graded-antisymmetric sign bookkeeping. Degrees past
    /// the chart dimension give the zero form.
    pub fn wedge(&self, other: &KForm) -> Result<KForm, FormError> {
        self.check_chart(other)?;
        let degree = self.degree + other.degree;
        let mut out = KForm::zero(self.chart.clone(), degree);
        if degree > self.chart.dim() {
            return Ok(out);
        }
        for (ta, ca) in &self.terms {
            for (tb, cb) in &other.terms {
                if let Some((merged, sign)) = merge_tuples(ta, tb) {
                    let mut coeff = Expr::mul(vec![ca.clone(), cb.clone()]);
                    if sign < 0 {
                        coeff = Expr::neg(coeff);
                    }
                    out.insert_raw(merged, coeff);
                }
            }
        }
        Ok(out.normalized())
    }

    /// n-fold wedge power (`n = 0` gives the constant function 1).
    pub fn wedge_power(&self, n: usize) -> Result<KForm, FormError> {
        let mut out = KForm::function(self.chart.clone(), Expr::one());
        for _ in 0..n {
            out = out.wedge(self)?;
        }
        Ok(out)
    }

    /// Exterior derivative: `d(f dx_T) = df ∧ dx_T`, with `d ∘ d = 0`.
    pub fn exterior_derivative(&self) -> KForm {
        let dim = self.chart.dim();
        let mut out = KForm::zero(self.chart.clone(), self.degree + 1);
        if self.degree + 1 > dim {
            return out;
        }
        for (t, c) in &self.terms {
            for i in 0..dim {
                if t.binary_search(&i).is_ok() {
                    continue;
                }
                let dc = c.diff(i);
                if dc.is_zero_literal() {
                    continue;
                }
                // position of i in the sorted tuple = elements below it
                let pos = t.partition_point(|&s| s < i);
                let mut tuple = t.clone();
                tuple.insert(pos, i);
                let coeff = if pos % 2 == 0 { dc } else { Expr::neg(dc) };
                out.insert_raw(tuple, coeff);
            }
        }
        out.normalized()
    }

    /// Interior product `i_X` (graded contraction); degree drops by one.
    pub fn interior_product(&self, x: &VectorField) -> Result<KForm, FormError> {
        if *self.chart != *x.chart {
            return Err(FormError::ChartMismatch);
        }
        if self.degree == 0 {
            return Err(FormError::DegreeZeroContraction);
        }
        let mut out = KForm::zero(self.chart.clone(), self.degree - 1);
        for (t, c) in &self.terms {
            for (pos, &ti) in t.iter().enumerate() {
                let comp = &x.components[ti];
                if comp.is_zero_literal() {
                    continue;
                }
                let mut tuple = t.clone();
                tuple.remove(pos);
                let mut coeff = Expr::mul(vec![comp.clone(), c.clone()]);
                if pos % 2 == 1 {
                    coeff = Expr::neg(coeff);
                }
                out.insert_raw(tuple, coeff);
            }
        }
        Ok(out.normalized())
    }

    /// Full antisymmetric coefficient matrix of a 2-form at a point.
    pub fn matrix_at(&self, pt: &Point) -> Result<DMatrix<f64>, FormError> {
        if self.degree != 2 {
            return Err(FormError::DegreeMismatch {
                expected: 2,
                found: self.degree,
            });
        }
        let dim = self.chart.dim();
        if pt.dim() != dim {
            return Err(FormError::PointDimension {
                expected: dim,
                found: pt.dim(),
            });
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (t, c) in &self.terms {
            let v = c.eval(pt.values());
            m[(t[0], t[1])] = v;
            m[(t[1], t[0])] = -v;
        }
        Ok(m)
    }

    /// Evaluate the form on `degree` tangent vectors at a point:
    /// `sum_T coeff_T(pt) * det(rows T of [v_1 .. v_k])`.
    pub fn apply_at(&self, pt: &Point, vectors: &[DVector<f64>]) -> Result<f64, FormError> {
        if vectors.len() != self.degree {
            return Err(FormError::DegreeMismatch {
                expected: self.degree,
                found: vectors.len(),
            });
        }
        let mut acc = 0.0;
        for (t, c) in &self.terms {
            let k = t.len();
            let minor = DMatrix::from_fn(k, k, |row, col| vectors[col][t[row]]);
            let det = if k == 0 { 1.0 } else { minor.determinant() };
            acc += c.eval(pt.values()) * det;
        }
        Ok(acc)
    }

    /// Max absolute coefficient value over a set of sample points.
    pub fn max_abs_at(&self, points: &[Point]) -> f64 {
        let mut worst = 0.0_f64;
        for pt in points {
            for c in self.terms.values() {
                worst = worst.max(c.eval(pt.values()).abs());
            }
        }
        worst
    }

    /// Reinterpret the form on a chart that extends this one (same leading
    /// coordinates). Index tuples and coefficients carry over unchanged.
    pub fn extend_to(&self, chart: Arc<Chart>) -> Result<KForm, FormError> {
        let d = self.chart.dim();
        if chart.dim() < d {
            return Err(FormError::NotAnExtension);
        }
        for i in 0..d {
            if chart.name(i) != self.chart.name(i) || chart.role(i) != self.chart.role(i) {
                return Err(FormError::NotAnExtension);
            }
        }
        Ok(KForm {
            degree: self.degree,
            chart,
            terms: self.terms.clone(),
        })
    }

    /// All coefficients are polynomial (no transcendental nodes).
    pub fn is_polynomial(&self) -> bool {
        self.terms.values().all(|c| c.is_polynomial())
    }

    /// Render as one `(names): coefficient` line per stored tuple.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (t, c) in &self.terms {
            let names: Vec<&str> = t.iter().map(|&i| self.chart.name(i)).collect();
            out.push_str(&format!("({}): {}\n", names.join(","), c.display(&self.chart)));
        }
        out
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Vector field: one symbolic component per chart coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: Arc<Chart>,
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: Arc<Chart>, components: Vec<Expr>) -> Result<VectorField, FormError> {
        if components.len() != chart.dim() {
            return Err(FormError::ComponentCount {
                expected: chart.dim(),
                found: components.len(),
            });
        }
        let dim = chart.dim();
        for c in &components {
            if let Some(i) = c.max_coord_index() {
                if i >= dim {
                    return Err(FormError::CoordOutOfRange { index: i, dim });
                }
            }
        }
        Ok(VectorField { chart, components })
    }

    /// The coordinate field `∂/∂(coordinate index)`.
    pub fn coordinate(chart: Arc<Chart>, index: usize) -> VectorField {
        let mut components = vec![Expr::zero(); chart.dim()];
        components[index] = Expr::one();
        VectorField { chart, components }
    }

    pub fn zero(chart: Arc<Chart>) -> VectorField {
        let components = vec![Expr::zero(); chart.dim()];
        VectorField { chart, components }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.components[i]
    }

    pub fn normalized(&self) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self.components.iter().map(|c| c.normalize()).collect(),
        }
    }

    pub fn eval_at(&self, pt: &Point) -> DVector<f64> {
        DVector::from_iterator(
            self.components.len(),
            self.components.iter().map(|c| c.eval(pt.values())),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }
}

/// Smooth map between charts: one source-chart expression per target
/// coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothMap {
    source: Arc<Chart>,
    target: Arc<Chart>,
    components: Vec<Expr>,
}

impl SmoothMap {
    pub fn new(
        source: Arc<Chart>,
        target: Arc<Chart>,
        components: Vec<Expr>,
    ) -> Result<SmoothMap, FormError> {
        if components.len() != target.dim() {
            return Err(FormError::ComponentCount {
                expected: target.dim(),
                found: components.len(),
            });
        }
        let dim = source.dim();
        for c in &components {
            if let Some(i) = c.max_coord_index() {
                if i >= dim {
                    return Err(FormError::CoordOutOfRange { index: i, dim });
                }
            }
        }
        Ok(SmoothMap {
            source,
            target,
            components,
        })
    }

    pub fn identity(chart: Arc<Chart>) -> SmoothMap {
        let components = (0..chart.dim()).map(Expr::coord).collect();
        SmoothMap {
            source: chart.clone(),
            target: chart,
            components,
        }
    }

    /// Projection onto a chart whose coordinates are a prefix of `source`
    /// (thickened -> base, cotangent -> base).
    pub fn projection_to_prefix(source: Arc<Chart>, target: Arc<Chart>) -> Result<SmoothMap, FormError> {
        let d = target.dim();
        if source.dim() < d {
            return Err(FormError::NotAnExtension);
        }
        for i in 0..d {
            if source.name(i) != target.name(i) {
                return Err(FormError::NotAnExtension);
            }
        }
        let components = (0..d).map(Expr::coord).collect();
        SmoothMap::new(source, target, components)
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Composition `self ∘ inner` (apply `inner` first).
    pub fn compose(&self, inner: &SmoothMap) -> Result<SmoothMap, FormError> {
        if *inner.target != *self.source {
            return Err(FormError::ChartMismatch);
        }
        let components = self
            .components
            .iter()
            .map(|c| c.substitute(&inner.components))
            .collect();
        SmoothMap::new(inner.source.clone(), self.target.clone(), components)
    }

    /// Pullback of a form on the target chart: substitute coordinates and
    /// replace each `d(target coordinate)` by the total differential of its
    /// source expression.
    pub fn pullback(&self, form: &KForm) -> Result<KForm, FormError> {
        if *form.chart != *self.target {
            return Err(FormError::ChartMismatch);
        }
        let mut out = KForm::zero(self.source.clone(), form.degree);
        for (t, c) in &form.terms {
            let pulled = c.substitute(&self.components);
            let mut acc = KForm::function(self.source.clone(), pulled);
            for &ti in t {
                acc = acc.wedge(&differential(self.source.clone(), &self.components[ti]))?;
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    pub fn eval_at(&self, pt: &Point) -> Point {
        Point::new(
            self.components
                .iter()
                .map(|c| c.eval(pt.values()))
                .collect(),
        )
    }

    pub fn normalized(&self) -> SmoothMap {
        SmoothMap {
            source: self.source.clone(),
            target: self.target.clone(),
            components: self.components.iter().map(|c| c.normalize()).collect(),
        }
    }
}

/// Total differential of a scalar: `df = sum_i (∂f/∂x_i) dx_i` as a 1-form.
pub fn differential(chart: Arc<Chart>, expr: &Expr) -> KForm {
    let dim = chart.dim();
    let mut out = KForm::zero(chart, 1);
    for i in 0..dim {
        let d = expr.diff(i);
        if !d.is_zero_literal() {
            out.insert_raw(vec![i], d);
        }
    }
    out.normalized()
}
