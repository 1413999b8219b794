//! Constant-rank pre-symplectic manifolds in Darboux coordinates.
//!
//! The canonical model on a `(2m+r)`-dimensional chart carries
//! `omega = dx_1 ∧ dy_1 + ... + dx_m ∧ dy_m`, whose kernel is spanned by the
//! `r` coordinate fields `∂/∂z_a`. Throughout the crate `r` is the *kernel*
//! dimension and the rank of `omega` is `2m`.
//!
//! General closed 2-forms on the same chart are accepted for diagnostics
//! (rank, closedness) but not for thickening, which is defined in Darboux
//! shape only.

use std::sync::Arc;

use thiserror::Error;

use crate::chart::{Chart, Point};
use crate::expr::Expr;
use crate::forms::{FormError, KForm, SmoothMap, VectorField};
use crate::linalg::{self, RANK_TOL};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("a pre-symplectic model needs m + r >= 1")]
    Empty,
    #[error("the 2-form must live on the base chart for (m, r) = ({m}, {r})")]
    WrongChart { m: usize, r: usize },
    #[error("expected a 2-form, got degree {0}")]
    WrongDegree(usize),
    #[error("the 2-form is not closed (d omega != 0 symbolically)")]
    NotClosed,
    #[error("operation requires the model in Darboux shape")]
    RequiresDarbouxShape,
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A pre-symplectic manifold chart-modelled as `(m, r)` Darboux data with a
/// closed 2-form on the base chart.
#[derive(Clone, Debug)]
pub struct PresymplecticModel {
    m: usize,
    r: usize,
    chart: Arc<Chart>,
    omega: KForm,
    darboux: bool,
}

/// Canonical 2-form `sum_j dx_j ∧ dy_j` on a base chart.
fn canonical_omega(chart: &Arc<Chart>) -> KForm {
    let terms = (0..chart.m()).map(|j| {
        (
            vec![chart.x_index(j), chart.y_index(j)],
            Expr::one(),
        )
    });
    KForm::from_terms(chart.clone(), 2, terms).expect("canonical tuples are valid")
}

impl PresymplecticModel {
    /// The Darboux model: chart `x1..xm, y1..ym, z1..zr`, form
    /// `sum_j dx_j ∧ dy_j`.
    pub fn darboux(m: usize, r: usize) -> Result<PresymplecticModel, ModelError> {
        if m == 0 && r == 0 {
            return Err(ModelError::Empty);
        }
        let chart = Arc::new(Chart::base(m, r));
        let omega = canonical_omega(&chart);
        Ok(PresymplecticModel {
            m,
            r,
            chart,
            omega,
            darboux: true,
        })
    }

    /// Wrap a closed 2-form on the `(m, r)` base chart. The result is usable
    /// for diagnostics only unless the form happens to be canonical;
    /// thickening demands Darboux shape.
    pub fn with_form(m: usize, r: usize, omega: KForm) -> Result<PresymplecticModel, ModelError> {
        if m == 0 && r == 0 {
            return Err(ModelError::Empty);
        }
        if omega.degree() != 2 {
            return Err(ModelError::WrongDegree(omega.degree()));
        }
        let chart = Arc::new(Chart::base(m, r));
        if **omega.chart() != *chart {
            return Err(ModelError::WrongChart { m, r });
        }
        if !omega.exterior_derivative().is_zero() {
            return Err(ModelError::NotClosed);
        }
        let omega = omega.normalized();
        let darboux = omega == canonical_omega(&chart);
        Ok(PresymplecticModel {
            m,
            r,
            chart,
            omega,
            darboux,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn omega(&self) -> &KForm {
        &self.omega
    }

    pub fn is_darboux(&self) -> bool {
        self.darboux
    }

    /// Numerical rank of the assembled 2-form at a point (cutoff
    /// `1e-9 * sigma_max`).
    pub fn rank_at(&self, pt: &Point) -> Result<usize, ModelError> {
        let m = self.omega.matrix_at(pt)?;
        Ok(linalg::numerical_rank(&m, RANK_TOL))
    }

    /// The `r` kernel fields `∂/∂z_a`, each verified to contract `omega` to
    /// the symbolically zero form. Darboux shape only.
    pub fn kernel_basis(&self) -> Result<Vec<VectorField>, ModelError> {
        if !self.darboux {
            return Err(ModelError::RequiresDarbouxShape);
        }
        let mut fields = Vec::with_capacity(self.r);
        for a in 0..self.r {
            let field = VectorField::coordinate(self.chart.clone(), self.chart.z_index(a));
            let contracted = self.omega.interior_product(&field)?;
            debug_assert!(contracted.is_zero(), "kernel field must annihilate omega");
            fields.push(field);
        }
        Ok(fields)
    }

    /// Adapted cotangent chart `x, y, z, px, py, pz` of dimension `2(2m+r)`.
    pub fn cotangent_chart(&self) -> Arc<Chart> {
        Arc::new(Chart::cotangent(self.m, self.r))
    }

    /// Canonical projection `rho : T*M -> M` in adapted coordinates.
    pub fn cotangent_projection(&self) -> SmoothMap {
        SmoothMap::projection_to_prefix(self.cotangent_chart(), self.chart.clone())
            .expect("cotangent chart extends the base chart")
    }

    /// Canonical symplectic form
    /// `omega_cot = dpx_j ∧ dx_j + dpy_j ∧ dy_j + dpz_a ∧ dz_a`.
    pub fn canonical_cotangent_form(&self) -> KForm {
        let chart = self.cotangent_chart();
        let mut terms = Vec::new();
        for j in 0..self.m {
            terms.push((vec![chart.px_index(j), chart.x_index(j)], Expr::one()));
            terms.push((vec![chart.py_index(j), chart.y_index(j)], Expr::one()));
        }
        for a in 0..self.r {
            terms.push((vec![chart.pz_index(a), chart.z_index(a)], Expr::one()));
        }
        KForm::from_terms(chart, 2, terms).expect("canonical tuples are valid")
    }

    /// The shifted ambient symplectic form `omega' = omega_cot + rho^* omega`.
    pub fn ambient_form(&self) -> KForm {
        let canonical = self.canonical_cotangent_form();
        let pulled = self
            .cotangent_projection()
            .pullback(&self.omega)
            .expect("omega lives on the projection target");
        canonical.add(&pulled).expect("same chart and degree")
    }
}
