//! The symplectic thickening, built two ways.
//!
//! Classical route: pick a connection (an idempotent projector onto the
//! kernel, parametrized by coefficient tables `Px`, `Py` over the base
//! coordinates), form the tautological 1-form `theta = sum_a p_a P^a` on the
//! kernel-dual bundle, and set `omega_tilde = tau^* omega + d theta`.
//!
//! Cotangent route: embed the kernel-dual bundle into `T*M` fiber-linearly
//! (`px = -Px p`, `py = -Py p`, `pz = p`) and pull back the shifted ambient
//! symplectic form `omega' = omega_cot + rho^* omega`.
//!
//! Both routes produce the same coefficient table; `equivalence_check`
//! verifies that symbolically and at sample points.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chart::{Chart, ChartKind};
use crate::expr::Expr;
use crate::forms::{differential, FormError, KForm, SmoothMap, VectorField};
use crate::presymplectic::{ModelError, PresymplecticModel};
use crate::sample::uniform_points;

#[derive(Debug, Error)]
pub enum ThickeningError {
    #[error("connection tables must be {m}x{r} (Px and Py), got {found_px} and {found_py} rows")]
    Shape {
        m: usize,
        r: usize,
        found_px: usize,
        found_py: usize,
    },
    #[error("connection entry Px/Py[{j}][{a}] references coordinate index {index}, outside the base chart")]
    NotBaseCoefficient { j: usize, a: usize, index: usize },
    #[error("connection is sized for (m, r) = ({cm}, {cr}) but the model has ({mm}, {mr})")]
    ModelMismatch {
        cm: usize,
        cr: usize,
        mm: usize,
        mr: usize,
    },
    #[error("thickening requires the model in Darboux shape")]
    RequiresDarbouxShape,
    #[error("thickened models disagree in chart or source; cannot compare")]
    IncomparableModels,
    #[error("kernel contraction is not an exact differential of ±pz_a; sign-convention audit failed")]
    ConventionAudit,
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Connection coefficients `Px[j][a]`, `Py[j][a]` (`j < m`, `a < r`) over the
/// base chart. The flat connection has every entry zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    m: usize,
    r: usize,
    px: Vec<Vec<Expr>>,
    py: Vec<Vec<Expr>>,
}

impl Connection {
    pub fn new(
        m: usize,
        r: usize,
        px: Vec<Vec<Expr>>,
        py: Vec<Vec<Expr>>,
    ) -> Result<Connection, ThickeningError> {
        if px.len() != m || py.len() != m || px.iter().any(|row| row.len() != r)
            || py.iter().any(|row| row.len() != r)
        {
            return Err(ThickeningError::Shape {
                m,
                r,
                found_px: px.len(),
                found_py: py.len(),
            });
        }
        let base_dim = 2 * m + r;
        for table in [&px, &py] {
            for (j, row) in table.iter().enumerate() {
                for (a, entry) in row.iter().enumerate() {
                    if let Some(i) = entry.max_coord_index() {
                        if i >= base_dim {
                            return Err(ThickeningError::NotBaseCoefficient { j, a, index: i });
                        }
                    }
                }
            }
        }
        Ok(Connection { m, r, px, py })
    }

    pub fn flat(m: usize, r: usize) -> Connection {
        Connection {
            m,
            r,
            px: vec![vec![Expr::zero(); r]; m],
            py: vec![vec![Expr::zero(); r]; m],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn px(&self, j: usize, a: usize) -> &Expr {
        &self.px[j][a]
    }

    pub fn py(&self, j: usize, a: usize) -> &Expr {
        &self.py[j][a]
    }

    pub fn is_flat(&self) -> bool {
        self.px
            .iter()
            .chain(self.py.iter())
            .flatten()
            .all(|e| e.is_zero())
    }

    pub fn nonzero_entries(&self) -> usize {
        self.px
            .iter()
            .chain(self.py.iter())
            .flatten()
            .filter(|e| !e.is_zero())
            .count()
    }

    pub fn is_polynomial(&self) -> bool {
        self.px
            .iter()
            .chain(self.py.iter())
            .flatten()
            .all(|e| e.is_polynomial())
    }

    fn check_model(&self, model: &PresymplecticModel) -> Result<(), ThickeningError> {
        if self.m != model.m() || self.r != model.r() {
            return Err(ThickeningError::ModelMismatch {
                cm: self.m,
                cr: self.r,
                mm: model.m(),
                mr: model.r(),
            });
        }
        if !model.is_darboux() {
            return Err(ThickeningError::RequiresDarbouxShape);
        }
        Ok(())
    }
}

/// Which construction produced a thickened model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Classical,
    CotangentPullback,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Classical => write!(f, "classical"),
            Provenance::CotangentPullback => write!(f, "cotangent-pullback"),
        }
    }
}

/// The thickened symplectic model: base data, the extended chart with fiber
/// coordinates `p1..pr`, and the 2-form `omega_tilde`.
#[derive(Clone, Debug)]
pub struct ThickenedModel {
    source: PresymplecticModel,
    chart: Arc<Chart>,
    omega_tilde: KForm,
    connection: Connection,
    provenance: Provenance,
}

impl ThickenedModel {
    pub fn source(&self) -> &PresymplecticModel {
        &self.source
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn omega_tilde(&self) -> &KForm {
        &self.omega_tilde
    }

    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Bundle projection `tau : thickened chart -> base chart`.
    pub fn base_projection(&self) -> SmoothMap {
        SmoothMap::projection_to_prefix(self.chart.clone(), self.source.chart().clone())
            .expect("thickened chart extends the base chart")
    }

    /// Zero-section inclusion `base chart -> thickened chart` (`p = 0`).
    pub fn zero_section(&self) -> SmoothMap {
        let base = self.source.chart().clone();
        let mut components: Vec<Expr> = (0..base.dim()).map(Expr::coord).collect();
        components.extend((base.dim()..self.chart.dim()).map(|_| Expr::zero()));
        SmoothMap::new(base, self.chart.clone(), components)
            .expect("zero-section components are valid")
    }

    /// `omega_tilde` restricted to the zero section: set `p = 0` and drop the
    /// fiber differentials. Equals the base form exactly.
    pub fn zero_section_restriction(&self) -> KForm {
        self.zero_section()
            .pullback(&self.omega_tilde)
            .expect("omega_tilde lives on the thickened chart")
    }
}

/// Connection 1-forms `P^a = dz^a - Px[j][a] dx_j - Py[j][a] dy_j` on the
/// base chart. They pair with `∂/∂z^b` to the identity.
pub fn connection_one_forms(
    conn: &Connection,
    model: &PresymplecticModel,
) -> Result<Vec<KForm>, ThickeningError> {
    conn.check_model(model)?;
    let chart = model.chart();
    let mut forms = Vec::with_capacity(conn.r);
    for a in 0..conn.r {
        let mut terms = vec![(vec![chart.z_index(a)], Expr::one())];
        for j in 0..conn.m {
            terms.push((
                vec![chart.x_index(j)],
                Expr::neg(conn.px(j, a).clone()),
            ));
            terms.push((
                vec![chart.y_index(j)],
                Expr::neg(conn.py(j, a).clone()),
            ));
        }
        forms.push(KForm::from_terms(chart.clone(), 1, terms)?);
    }
    Ok(forms)
}

/// The idempotent kernel projector `P = P^a ⊗ ∂/∂z^a`.
#[derive(Clone, Debug)]
pub struct Projector {
    chart: Arc<Chart>,
    one_forms: Vec<KForm>,
}

impl Projector {
    pub fn one_forms(&self) -> &[KForm] {
        &self.one_forms
    }

    /// Apply the (1,1)-tensor to a vector field: `P(X) = P^a(X) ∂/∂z^a`.
    pub fn apply(&self, x: &VectorField) -> Result<VectorField, ThickeningError> {
        let mut components = vec![Expr::zero(); self.chart.dim()];
        for (a, p) in self.one_forms.iter().enumerate() {
            let paired = p.interior_product(x)?; // degree-0 form
            components[self.chart.z_index(a)] = paired.coefficient(&[]);
        }
        Ok(VectorField::new(self.chart.clone(), components)?)
    }

    /// Symbolic idempotency audit: `P(P(e_i)) = P(e_i)` on every coordinate
    /// field (enough by function-linearity of the tensor).
    pub fn is_idempotent(&self) -> Result<bool, ThickeningError> {
        for i in 0..self.chart.dim() {
            let e = VectorField::coordinate(self.chart.clone(), i);
            let once = self.apply(&e)?;
            let twice = self.apply(&once)?;
            for (u, v) in once.components().iter().zip(twice.components()) {
                if !Expr::add(vec![u.clone(), Expr::neg(v.clone())]).is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub fn projector(
    conn: &Connection,
    model: &PresymplecticModel,
) -> Result<Projector, ThickeningError> {
    let one_forms = connection_one_forms(conn, model)?;
    Ok(Projector {
        chart: model.chart().clone(),
        one_forms,
    })
}

/// The tautological 1-form `theta = sum_a p_a P^a` on the thickened chart.
pub fn theta_p(conn: &Connection, model: &PresymplecticModel) -> Result<KForm, ThickeningError> {
    let one_forms = connection_one_forms(conn, model)?;
    let chart = Arc::new(Chart::thickened(conn.m, conn.r));
    let mut theta = KForm::zero(chart.clone(), 1);
    for (a, p) in one_forms.iter().enumerate() {
        let lifted = p.extend_to(chart.clone())?;
        let scaled = lifted.scale(&Expr::coord(chart.p_index(a)));
        theta = theta.add(&scaled)?;
    }
    Ok(theta)
}

/// Classical construction: `omega_tilde = tau^* omega + d theta`.
pub fn classical_thickening(
    conn: &Connection,
    model: &PresymplecticModel,
) -> Result<ThickenedModel, ThickeningError> {
    let theta = theta_p(conn, model)?;
    let chart = theta.chart().clone();
    let tau = SmoothMap::projection_to_prefix(chart.clone(), model.chart().clone())?;
    let pulled = tau.pullback(model.omega())?;
    let omega_tilde = pulled.add(&theta.exterior_derivative())?;
    Ok(ThickenedModel {
        source: model.clone(),
        chart,
        omega_tilde,
        connection: conn.clone(),
        provenance: Provenance::Classical,
    })
}

/// Cotangent lifts of the kernel fields: `∂/∂z^a` read on the cotangent
/// chart. Invariance of the canonical form is audited through Cartan's
/// formula: both `d(i_K omega_cot)` and `i_K(d omega_cot)` vanish.
pub fn cotangent_lifts(model: &PresymplecticModel) -> Result<Vec<VectorField>, ThickeningError> {
    let chart = model.cotangent_chart();
    let omega_cot = model.canonical_cotangent_form();
    let mut lifts = Vec::with_capacity(model.r());
    for a in 0..model.r() {
        let field = VectorField::coordinate(chart.clone(), chart.z_index(a));
        let contracted = omega_cot.interior_product(&field)?;
        if !contracted.exterior_derivative().is_zero() {
            return Err(ThickeningError::ConventionAudit);
        }
        lifts.push(field);
    }
    Ok(lifts)
}

/// Kernel momenta: Hamiltonians of the lifted kernel fields with respect to
/// the ambient form, solved from `i_K omega' = sign * dH` with one global
/// sign fixed by the crate's contraction convention.
#[derive(Clone, Debug)]
pub struct KernelMomenta {
    /// `H_a = pz_a` as expressions on the cotangent chart.
    pub hamiltonians: Vec<Expr>,
    /// The global sign `sigma` in `i_K omega' = sigma * d(pz_a)`.
    pub sign: f64,
}

pub fn kernel_hamiltonians(
    model: &PresymplecticModel,
) -> Result<KernelMomenta, ThickeningError> {
    let chart = model.cotangent_chart();
    let omega_prime = model.ambient_form();
    let lifts = cotangent_lifts(model)?;
    let mut sign: Option<f64> = None;
    let mut hamiltonians = Vec::with_capacity(model.r());
    for (a, field) in lifts.iter().enumerate() {
        let eta = omega_prime.interior_product(field)?;
        let h = Expr::coord(chart.pz_index(a));
        let dh = differential(chart.clone(), &h);
        let matches_plus = eta.sub(&dh)?.is_zero();
        let matches_minus = eta.add(&dh)?.is_zero();
        let this_sign = match (matches_plus, matches_minus) {
            (true, false) => 1.0,
            (false, true) => -1.0,
            _ => return Err(ThickeningError::ConventionAudit),
        };
        match sign {
            None => sign = Some(this_sign),
            Some(s) if s == this_sign => {}
            Some(_) => return Err(ThickeningError::ConventionAudit),
        }
        hamiltonians.push(h);
    }
    Ok(KernelMomenta {
        hamiltonians,
        sign: sign.unwrap_or(-1.0),
    })
}

/// Fiber-linear embedding of the thickened chart into the cotangent chart:
/// base coordinates map identically, `px_j = -sum_a Px[j][a] p_a`,
/// `py_j = -sum_a Py[j][a] p_a`, `pz_a = p_a`. Linearity in `p` preserves the
/// zero section.
pub fn momentum_embedding(
    conn: &Connection,
    model: &PresymplecticModel,
) -> Result<SmoothMap, ThickeningError> {
    conn.check_model(model)?;
    let thick = Arc::new(Chart::thickened(conn.m, conn.r));
    let cot = model.cotangent_chart();
    let mut components: Vec<Expr> = (0..model.chart().dim()).map(Expr::coord).collect();
    for j in 0..conn.m {
        let sum = Expr::add(
            (0..conn.r)
                .map(|a| Expr::mul(vec![conn.px(j, a).clone(), Expr::coord(thick.p_index(a))]))
                .collect(),
        );
        components.push(Expr::neg(sum));
    }
    for j in 0..conn.m {
        let sum = Expr::add(
            (0..conn.r)
                .map(|a| Expr::mul(vec![conn.py(j, a).clone(), Expr::coord(thick.p_index(a))]))
                .collect(),
        );
        components.push(Expr::neg(sum));
    }
    for a in 0..conn.r {
        components.push(Expr::coord(thick.p_index(a)));
    }
    debug_assert_eq!(components.len(), cot.dim());
    Ok(SmoothMap::new(thick, cot, components)?)
}

/// Cotangent construction: `omega_tilde = i^* omega'`.
pub fn cotangent_thickening(
    conn: &Connection,
    model: &PresymplecticModel,
) -> Result<ThickenedModel, ThickeningError> {
    let embedding = momentum_embedding(conn, model)?;
    let omega_prime = model.ambient_form();
    let omega_tilde = embedding.pullback(&omega_prime)?;
    Ok(ThickenedModel {
        source: model.clone(),
        chart: embedding.source().clone(),
        omega_tilde,
        connection: conn.clone(),
        provenance: Provenance::CotangentPullback,
    })
}

/// Outcome of comparing the two constructions.
#[derive(Clone, Debug)]
pub struct EquivalenceOutcome {
    /// Normalized coefficient tables are structurally identical.
    pub tables_match: bool,
    /// When the tables differ, whether every coefficient of the difference
    /// passes the sampled zero audit (a symbolic mismatch can still be a
    /// functional zero through transcendental relations).
    pub numerically_identical: bool,
    /// Max pointwise matrix-entry deviation over the sampled points.
    pub max_residual: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Compare two thickened models built from the same data by different
/// routes: exact table comparison, a sampled zero audit of the difference as
/// fallback, and a pointwise residual scan.
pub fn equivalence_check(
    a: &ThickenedModel,
    b: &ThickenedModel,
    samples: usize,
    seed: u64,
) -> Result<EquivalenceOutcome, ThickeningError> {
    if a.chart != b.chart || a.connection != b.connection {
        return Err(ThickeningError::IncomparableModels);
    }
    let tables_match = a.omega_tilde == b.omega_tilde;
    let numerically_identical = tables_match || {
        let dim = a.chart.dim();
        a.omega_tilde
            .sub(&b.omega_tilde)?
            .terms()
            .values()
            .all(|c| crate::expr::is_numerically_zero(c, dim, seed))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = uniform_points(a.chart.dim(), samples, &mut rng);
    let mut max_residual = 0.0_f64;
    for pt in &pts {
        let ma = a.omega_tilde.matrix_at(pt)?;
        let mb = b.omega_tilde.matrix_at(pt)?;
        max_residual = max_residual.max((ma - mb).amax());
    }
    Ok(EquivalenceOutcome {
        tables_match,
        numerically_identical,
        max_residual,
        samples,
        seed,
    })
}

/// The repo-wide worked example: `m = 1`, `r = 1`, `Px = [[y1]]`,
/// `Py = [[0]]`. Its thickened form is
/// `(1 + p1) dx1∧dy1 + dp1∧dz1 - y1 dp1∧dx1`, with Pfaffian `-(1 + p1)` and
/// degeneracy locus `p1 = -1`.
pub fn worked_example_connection() -> Connection {
    let base = Chart::base(1, 1);
    let y1 = Expr::coord(base.y_index(0));
    Connection::new(1, 1, vec![vec![y1]], vec![vec![Expr::zero()]])
        .expect("worked example tables are valid")
}

/// Convenience check used by callers that only need a yes/no on chart kinds.
pub fn is_thickened_chart(chart: &Chart) -> bool {
    chart.kind() == ChartKind::Thickened
}
