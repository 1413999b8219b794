//! Symplectic thickenings of constant-rank pre-symplectic manifolds.
//!
//! Given Darboux data `(m, r)` — `m` symplectic pairs, `r` kernel directions
//! — and connection coefficient tables `Px`, `Py` over the base coordinates,
//! this crate builds the symplectic thickening of the pre-symplectic form
//! `omega = dx_j ∧ dy_j` two ways and machine-checks that they agree:
//!
//! * the **classical route**: connection 1-forms
//!   `P^a = dz^a - Px dx - Py dy`, the tautological 1-form
//!   `theta = p_a P^a` on the kernel-dual bundle, and
//!   `omega_tilde = tau^* omega + d theta`;
//! * the **cotangent route**: the fiber-linear embedding
//!   `(x, y, z, p) -> (x, y, z, px = -Px p, py = -Py p, pz = p)` into `T*M`
//!   and the pullback of the shifted ambient symplectic form
//!   `omega' = omega_cot + rho^* omega`.
//!
//! The verification battery also checks closedness, the constant-rank
//! hypothesis, projector idempotency, the wedge-power identity
//! `omega'^n = omega_cot^n`, the kernel momenta `H_a = pz_a`, coisotropy of
//! the zero section, and the Pfaffian degeneracy locus along the fibers.
//!
//! Everything symbolic runs over exact rationals with transcendental
//! coefficients (`sin`, `cos`, `exp`) kept as atoms; everything numeric is
//! seeded and reproducible.

pub mod chart;
pub mod emit;
pub mod expr;
pub mod forms;
pub mod linalg;
pub mod manifest;
pub mod presymplectic;
pub mod sample;
pub mod thickening;
pub mod verify;

pub use chart::{Chart, ChartKind, CoordRole, Point};
pub use expr::{parse, Expr, ExprError};
pub use forms::{differential, FormError, KForm, SmoothMap, VectorField};
pub use manifest::{Manifest, ManifestError};
pub use presymplectic::{ModelError, PresymplecticModel};
pub use thickening::{
    classical_thickening, connection_one_forms, cotangent_lifts, cotangent_thickening,
    equivalence_check, kernel_hamiltonians, momentum_embedding, projector, theta_p,
    worked_example_connection, Connection, EquivalenceOutcome, KernelMomenta, Projector,
    Provenance, ThickenedModel, ThickeningError,
};
pub use verify::{
    check_closed, check_coisotropic, degeneracy_scan, full_report, non_closed_probe,
    symplectic_orthogonal, CheckRecord, CheckStatus, ScanOutcome, Tolerances,
    VerificationReport, VerifyError, VerifyOptions,
};

#[cfg(test)]
mod tests {
    // all domain values are immutable and shareable across threads
    #[test]
    fn domain_types_are_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<crate::Chart>();
        assert_send_sync::<crate::Point>();
        assert_send_sync::<crate::Expr>();
        assert_send_sync::<crate::KForm>();
        assert_send_sync::<crate::VectorField>();
        assert_send_sync::<crate::SmoothMap>();
        assert_send_sync::<crate::PresymplecticModel>();
        assert_send_sync::<crate::Connection>();
        assert_send_sync::<crate::ThickenedModel>();
        assert_send_sync::<crate::VerificationReport>();
    }
}
