//! Numeric and symbolic verdicts: closedness, constant rank, projector
//! idempotency, route equivalence, the wedge-power identity, kernel momenta,
//! coisotropy of the zero section, and Pfaffian degeneracy scans — assembled
//! into a deterministic [`VerificationReport`].

pub mod report;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use report::{CheckRecord, CheckStatus, VerificationReport};

use crate::chart::{Chart, Point};
use crate::expr::Expr;
use crate::forms::{FormError, KForm};
use crate::linalg::{self, LinalgError, RANK_TOL};
use crate::presymplectic::PresymplecticModel;
use crate::sample::{uniform_points, zero_section_points};
use crate::thickening::{
    classical_thickening, cotangent_thickening, equivalence_check, kernel_hamiltonians,
    projector, Connection, ThickenedModel, ThickeningError,
};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("construction failed at stage `{stage}`: {source}")]
    Construction {
        stage: &'static str,
        #[source]
        source: ThickeningError,
    },
    #[error("chart of dimension {0} is too small for the non-closed probe (needs >= 3)")]
    ChartTooSmallForProbe(usize),
    #[error("scan direction must be nonzero and supported on fiber coordinates only")]
    InvalidDirection,
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Fixed tolerances, overridable through the manifest.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Pointwise residual bound for the route-equivalence check.
    pub equivalence: f64,
    /// Numeric residual bound for closedness of transcendental forms.
    pub closedness: f64,
    /// Determinant deviation bound for the wedge-power identity.
    pub wedge_power: f64,
    /// Principal-angle bound for subspace comparisons.
    pub coisotropy_angle: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub rank: f64,
    /// Relative Pfaffian-magnitude cutoff for scan zeros.
    pub pfaffian_zero: f64,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances {
            equivalence: 1e-10,
            closedness: 1e-8,
            wedge_power: 1e-9,
            coisotropy_angle: 1e-8,
            rank: RANK_TOL,
            pfaffian_zero: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub scan_range: f64,
    pub scan_steps: usize,
    /// Replace the checked base form by a deliberately non-closed probe
    /// (negative-control mode; the closedness stage must fail).
    pub probe_non_closed: bool,
    pub tolerances: Tolerances,
}

impl Default for VerifyOptions {
    fn default() -> VerifyOptions {
        VerifyOptions {
            samples: 100,
            seed: 0,
            scan_range: 2.0,
            scan_steps: 256,
            probe_non_closed: false,
            tolerances: Tolerances::default(),
        }
    }
}

/// Basis of the symplectic orthogonal `{v : B^T Omega v = 0}` of the span of
/// `basis` under the antisymmetric matrix `omega`, via the null space of the
/// stacked constraint matrix with cutoff `rel_tol * sigma_max`.
pub fn symplectic_orthogonal(
    omega: &DMatrix<f64>,
    basis: &[DVector<f64>],
    rel_tol: f64,
) -> Result<Vec<DVector<f64>>, LinalgError> {
    let dim = omega.nrows();
    for v in basis {
        if v.len() != dim {
            return Err(LinalgError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    if basis.is_empty() {
        // vacuous constraints: everything is orthogonal
        return Ok((0..dim)
            .map(|i| DVector::from_fn(dim, |k, _| if k == i { 1.0 } else { 0.0 }))
            .collect());
    }
    let mut b = DMatrix::zeros(dim, basis.len());
    for (j, v) in basis.iter().enumerate() {
        b.set_column(j, v);
    }
    if linalg::numerical_rank(&b, rel_tol) < basis.len() {
        return Err(LinalgError::DependentBasis);
    }
    let constraints = b.transpose() * omega;
    Ok(linalg::nullspace(&constraints, rel_tol))
}

/// Closedness verdict for a form. Polynomial coefficient tables get an exact
/// symbolic verdict (residual 0 against tolerance 0); otherwise — and for any
/// symbolic failure — the residual is the max absolute coefficient of the
/// exterior derivative over sampled points.
pub fn check_closed(
    name: &str,
    form: &KForm,
    tol_numeric: f64,
    samples: usize,
    seed: u64,
) -> CheckRecord {
    let d = form.exterior_derivative();
    if d.is_zero() {
        return CheckRecord::from_residual(name, 0.0, 0.0, samples, seed, "symbolic");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = uniform_points(form.chart().dim(), samples, &mut rng);
    let residual = d.max_abs_at(&pts);
    if form.is_polynomial() {
        // polynomial and symbolically nonzero: genuinely not closed
        CheckRecord::from_residual(name, residual.max(f64::MIN_POSITIVE), 0.0, samples, seed, "symbolic, d != 0")
    } else {
        CheckRecord::from_residual(name, residual, tol_numeric, samples, seed, "numeric")
    }
}

/// Coisotropy of the zero section: at each sampled zero-section point the
/// symplectic orthogonal of the zero-section tangent space must be contained
/// in that tangent space and coincide with the kernel span `{∂/∂z_a}`.
pub fn check_coisotropic(
    tm: &ThickenedModel,
    pts: &[Point],
    angle_tol: f64,
    rank_tol: f64,
) -> CheckRecord {
    let chart = tm.chart();
    let dim = chart.dim();
    let base_dim = tm.source().chart().dim();
    let r = tm.source().r();
    let tangent: Vec<DVector<f64>> = (0..base_dim)
        .map(|i| DVector::from_fn(dim, |k, _| if k == i { 1.0 } else { 0.0 }))
        .collect();
    let kernel: Vec<DVector<f64>> = (0..r)
        .map(|a| {
            let z = tm.source().chart().z_index(a);
            DVector::from_fn(dim, |k, _| if k == z { 1.0 } else { 0.0 })
        })
        .collect();
    let mut worst = 0.0_f64;
    let mut note = String::from("orthogonal of zero-section tangent = kernel span");
    for pt in pts {
        let omega = match tm.omega_tilde().matrix_at(pt) {
            Ok(m) => m,
            Err(e) => {
                return CheckRecord::from_residual(
                    "coisotropy",
                    f64::INFINITY,
                    angle_tol,
                    pts.len(),
                    0,
                    format!("matrix assembly failed: {e}"),
                )
            }
        };
        let orth = match symplectic_orthogonal(&omega, &tangent, rank_tol) {
            Ok(o) => o,
            Err(e) => {
                return CheckRecord::from_residual(
                    "coisotropy",
                    f64::INFINITY,
                    angle_tol,
                    pts.len(),
                    0,
                    format!("orthogonal computation failed: {e}"),
                )
            }
        };
        if orth.len() != r {
            note = format!(
                "orthogonal dimension {} but kernel dimension {r}",
                orth.len()
            );
            worst = f64::INFINITY;
            break;
        }
        worst = worst.max(linalg::containment_residual(&orth, &tangent));
        match linalg::subspace_gap(&orth, &kernel) {
            Some(gap) => worst = worst.max(gap),
            None => {
                note = "orthogonal and kernel spans have different dimensions".to_string();
                worst = f64::INFINITY;
                break;
            }
        }
    }
    CheckRecord::from_residual("coisotropy", worst, angle_tol, pts.len(), 0, note)
}

/// Result of a Pfaffian scan along a fiber ray.
#[derive(Clone, Debug)]
pub struct ScanOutcome {
    pub record: CheckRecord,
    /// Parameter values `t` with `Pf = 0`, ascending, bisection-refined.
    pub zeros: Vec<f64>,
    /// Largest `t` with no zero in `[0, t]` (the scan range when clear).
    pub clear_radius: f64,
}

/// Scan `Pf(omega_tilde)` along `base_pt + t * direction` for `t` on a grid
/// over `[0, range]`. Grid points with `|Pf| < rel_tol * scale` count as
/// zeros; strict sign changes between neighbors are refined by 50 bisection
/// iterations. The scan itself always passes — the locus is the payload.
pub fn degeneracy_scan(
    tm: &ThickenedModel,
    base_pt: &Point,
    direction: &[f64],
    range: f64,
    steps: usize,
    rel_tol: f64,
) -> Result<ScanOutcome, VerifyError> {
    let chart = tm.chart();
    let dim = chart.dim();
    if direction.len() != dim
        || direction.iter().all(|&d| d == 0.0)
        || (0..dim).any(|i| chart.is_base_coord(i) && direction[i] != 0.0)
    {
        return Err(VerifyError::InvalidDirection);
    }
    let norm: f64 = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    let dir: Vec<f64> = direction.iter().map(|d| d / norm).collect();
    let at = |t: f64| -> Point {
        Point::new(
            base_pt
                .values()
                .iter()
                .zip(&dir)
                .map(|(b, d)| b + t * d)
                .collect(),
        )
    };
    let steps = steps.max(1);
    let mut pf = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = range * i as f64 / steps as f64;
        let m = tm.omega_tilde().matrix_at(&at(t))?;
        pf.push((t, linalg::pfaffian(&m)?));
    }
    let scale = pf.iter().map(|(_, v)| v.abs()).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let ztol = rel_tol * scale;
    let mut zeros: Vec<f64> = Vec::new();
    for &(t, v) in &pf {
        if v.abs() < ztol {
            zeros.push(t);
        }
    }
    for w in pf.windows(2) {
        let (t0, v0) = w[0];
        let (t1, v1) = w[1];
        if v0.abs() >= ztol && v1.abs() >= ztol && v0.signum() != v1.signum() {
            let (mut lo, mut hi, mut vlo) = (t0, t1, v0);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                let vm = linalg::pfaffian(&tm.omega_tilde().matrix_at(&at(mid))?)?;
                if vm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if vm.signum() == vlo.signum() {
                    lo = mid;
                    vlo = vm;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let grid_spacing = range / steps as f64;
    zeros.dedup_by(|a, b| (*a - *b).abs() < 0.5 * grid_spacing);
    let clear_radius = zeros.first().copied().unwrap_or(range);
    let note = if zeros.is_empty() {
        format!("no Pfaffian zero on [0, {}]", report::fmt_f64(range))
    } else {
        format!(
            "Pfaffian zeros at t = {}; clear on [0, {})",
            zeros
                .iter()
                .map(|z| report::fmt_f64(*z))
                .collect::<Vec<_>>()
                .join(", "),
            report::fmt_f64(clear_radius)
        )
    };
    let record = CheckRecord::from_residual("degeneracy-scan", 0.0, 0.0, steps + 1, 0, note);
    Ok(ScanOutcome {
        record,
        zeros,
        clear_radius,
    })
}

/// A deliberately non-closed 2-form on `chart` (dimension >= 3): with the
/// first three coordinates `c0, c1, c2`, the probe
/// `c0 dc0∧dc1 + c0 dc1∧dc2` has `d = dc0∧dc1∧dc2`, so the closedness
/// residual is exactly 1.
pub fn non_closed_probe(chart: &Arc<Chart>) -> Result<KForm, VerifyError> {
    if chart.dim() < 3 {
        return Err(VerifyError::ChartTooSmallForProbe(chart.dim()));
    }
    let c0 = Expr::coord(0);
    Ok(KForm::from_terms(
        chart.clone(),
        2,
        [(vec![0, 1], c0.clone()), (vec![1, 2], c0)],
    )?)
}

fn stage<T>(name: &'static str, r: Result<T, ThickeningError>) -> Result<T, VerifyError> {
    r.map_err(|source| VerifyError::Construction {
        stage: name,
        source,
    })
}

/// Run the whole battery in order: closedness of the base form, constant
/// rank, projector idempotency, a connection-rank diagnostic, closedness of
/// both thickenings, route equivalence, the wedge-power identity, kernel
/// momenta, coisotropy, and Pfaffian scans along each fiber axis.
/// Deterministic for a fixed seed.
pub fn full_report(
    model: &PresymplecticModel,
    conn: &Connection,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let tol = opts.tolerances;
    let mut records = Vec::new();

    // 1. closedness of the base form (optionally corrupted by the probe)
    let omega_checked = if opts.probe_non_closed {
        model.omega().add(&non_closed_probe(model.chart())?)?
    } else {
        model.omega().clone()
    };
    records.push(check_closed(
        "omega-closed",
        &omega_checked,
        tol.closedness,
        opts.samples,
        opts.seed,
    ));

    // 2. constant-rank audit
    {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let pts = uniform_points(model.chart().dim(), opts.samples, &mut rng);
        let expected = 2 * model.m();
        let mut worst = 0.0_f64;
        for pt in &pts {
            let rank = model
                .omega()
                .matrix_at(pt)
                .map(|m| linalg::numerical_rank(&m, tol.rank))?;
            worst = worst.max((rank as f64 - expected as f64).abs());
        }
        records.push(CheckRecord::from_residual(
            "omega-constant-rank",
            worst,
            0.0,
            opts.samples,
            opts.seed,
            format!("rank {expected} expected at every sample (cutoff {:e}*sigma_max)", tol.rank),
        ));
    }

    // 3. projector idempotency (symbolic)
    {
        let p = stage("projector", projector(conn, model))?;
        let ok = stage("projector", p.is_idempotent())?;
        records.push(CheckRecord::from_residual(
            "projector-idempotent",
            if ok { 0.0 } else { 1.0 },
            0.0,
            0,
            opts.seed,
            "symbolic, P∘P = P on all coordinate fields",
        ));
    }

    // 4. connection-rank diagnostic (informational; the flat connection is
    //    legitimate, so rank deficiency only warns)
    {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let pts = uniform_points(model.chart().dim(), opts.samples.min(20), &mut rng);
        let m = model.m();
        let r = model.r();
        let full = (2 * m).min(r);
        let mut deficient = false;
        for pt in &pts {
            let stacked = DMatrix::from_fn(2 * m, r, |row, col| {
                if row < m {
                    conn.px(row, col).eval(pt.values())
                } else {
                    conn.py(row - m, col).eval(pt.values())
                }
            });
            if linalg::numerical_rank(&stacked, tol.rank) < full {
                deficient = true;
                break;
            }
        }
        let note = if full == 0 {
            "stacked [Px; Py] is empty; maximal rank holds vacuously".to_string()
        } else if deficient {
            format!("stacked [Px; Py] drops below rank {full} at a sample point")
        } else {
            format!("stacked [Px; Py] has maximal rank {full} at all sample points")
        };
        if deficient {
            records.push(CheckRecord::warn(
                "connection-rank",
                pts.len(),
                opts.seed,
                note,
            ));
        } else {
            records.push(CheckRecord::from_residual(
                "connection-rank",
                0.0,
                0.0,
                pts.len(),
                opts.seed,
                note,
            ));
        }
    }

    // 5/6. closedness of both thickenings
    let classical = stage("classical-thickening", classical_thickening(conn, model))?;
    let cotangent = stage("cotangent-thickening", cotangent_thickening(conn, model))?;
    records.push(check_closed(
        "classical-thickening-closed",
        classical.omega_tilde(),
        tol.closedness,
        opts.samples,
        opts.seed,
    ));
    records.push(check_closed(
        "cotangent-thickening-closed",
        cotangent.omega_tilde(),
        tol.closedness,
        opts.samples,
        opts.seed,
    ));

    // 7. route equivalence
    {
        let outcome = stage(
            "route-equivalence",
            equivalence_check(&classical, &cotangent, opts.samples, opts.seed),
        )?;
        let residual = if outcome.tables_match {
            outcome.max_residual
        } else {
            outcome.max_residual.max(f64::INFINITY)
        };
        records.push(CheckRecord::from_residual(
            "route-equivalence",
            residual,
            tol.equivalence,
            outcome.samples,
            outcome.seed,
            if outcome.tables_match {
                "coefficient tables identical after normalization"
            } else if outcome.numerically_identical {
                "tables differ symbolically but the sampled zero audit passes"
            } else {
                "coefficient tables differ"
            },
        ));
    }

    // 8. wedge-power identity: omega'^n = omega_cot^n symbolically, and both
    //    determinants equal 1 at sample points
    {
        let n = 2 * model.m() + model.r();
        let omega_prime = model.ambient_form();
        let omega_cot = model.canonical_cotangent_form();
        let symbolic_ok = omega_prime
            .wedge_power(n)?
            .sub(&omega_cot.wedge_power(n)?)?
            .is_zero();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let pts = uniform_points(model.cotangent_chart().dim(), opts.samples, &mut rng);
        let mut worst = if symbolic_ok { 0.0_f64 } else { f64::INFINITY };
        for pt in &pts {
            let dp = omega_prime.matrix_at(pt)?.determinant();
            let dc = omega_cot.matrix_at(pt)?.determinant();
            worst = worst.max((dp - dc).abs()).max((dp - 1.0).abs());
        }
        records.push(CheckRecord::from_residual(
            "wedge-power",
            worst,
            tol.wedge_power,
            opts.samples,
            opts.seed,
            if symbolic_ok {
                "omega'^n = omega_cot^n symbolically; det Omega' = 1 at samples"
            } else {
                "symbolic wedge-power identity FAILED"
            },
        ));
    }

    // 9. kernel momenta
    {
        let momenta = stage("kernel-momenta", kernel_hamiltonians(model))?;
        records.push(CheckRecord::from_residual(
            "kernel-momenta",
            0.0,
            0.0,
            0,
            opts.seed,
            format!(
                "i_K omega' = sigma*d(pz_a) exactly, sigma = {:+}",
                momenta.sign as i64
            ),
        ));
    }

    // 10. coisotropy of the zero section
    {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let pts = zero_section_points(classical.chart(), opts.samples, &mut rng);
        let mut record = check_coisotropic(&classical, &pts, tol.coisotropy_angle, tol.rank);
        record.seed = opts.seed;
        records.push(record);
    }

    // 11. degeneracy scans along each fiber axis, both directions
    {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let base_pt = zero_section_points(classical.chart(), 1, &mut rng)
            .pop()
            .expect("one sample requested");
        let chart = classical.chart().clone();
        for a in 0..model.r() {
            for (label, sgn) in [("plus", 1.0), ("minus", -1.0)] {
                let mut dir = vec![0.0; chart.dim()];
                dir[chart.p_index(a)] = sgn;
                let mut outcome = degeneracy_scan(
                    &classical,
                    &base_pt,
                    &dir,
                    opts.scan_range,
                    opts.scan_steps,
                    tol.pfaffian_zero,
                )?;
                outcome.record.name = format!("degeneracy-scan-p{}-{}", a + 1, label);
                outcome.record.seed = opts.seed;
                records.push(outcome.record);
            }
        }
    }

    Ok(VerificationReport {
        records,
        seed: opts.seed,
        samples: opts.samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thickening::worked_example_connection;

    fn worked_thickening() -> ThickenedModel {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        classical_thickening(&worked_example_connection(), &model).unwrap()
    }

    #[test]
    fn orthogonal_of_lagrangian_line() {
        // canonical 2x2 symplectic block; the x-axis is its own orthogonal
        let mut omega = DMatrix::zeros(2, 2);
        omega[(0, 1)] = 1.0;
        omega[(1, 0)] = -1.0;
        let ex = DVector::from_vec(vec![1.0, 0.0]);
        let orth = symplectic_orthogonal(&omega, std::slice::from_ref(&ex), RANK_TOL).unwrap();
        assert_eq!(orth.len(), 1);
        assert!(linalg::subspace_gap(&orth, &[ex]).unwrap() < 1e-12);
    }

    #[test]
    fn orthogonal_under_zero_form_is_everything() {
        let omega = DMatrix::zeros(3, 3);
        let b = vec![DVector::from_vec(vec![1.0, 0.0, 0.0])];
        let orth = symplectic_orthogonal(&omega, &b, RANK_TOL).unwrap();
        assert_eq!(orth.len(), 3);
    }

    #[test]
    fn orthogonal_rejects_dependent_basis() {
        let omega = DMatrix::zeros(2, 2);
        let v = DVector::from_vec(vec![1.0, 1.0]);
        let out = symplectic_orthogonal(&omega, &[v.clone(), v * 2.0], RANK_TOL);
        assert!(matches!(out, Err(LinalgError::DependentBasis)));
    }

    #[test]
    fn worked_example_orthogonal_is_kernel_line() {
        // At p = 0 with tangent basis {∂x, ∂y, ∂z}, the orthogonal under
        // omega_tilde is span{∂z}: solved by hand from the three pairing
        // conditions on (a, b, c, d).
        let tm = worked_thickening();
        let pt = Point::new(vec![0.4, -0.8, 0.3, 0.0]);
        let omega = tm.omega_tilde().matrix_at(&pt).unwrap();
        let tangent: Vec<DVector<f64>> = (0..3)
            .map(|i| DVector::from_fn(4, |k, _| if k == i { 1.0 } else { 0.0 }))
            .collect();
        let orth = symplectic_orthogonal(&omega, &tangent, RANK_TOL).unwrap();
        assert_eq!(orth.len(), 1);
        let ez = DVector::from_fn(4, |k, _| if k == 2 { 1.0 } else { 0.0 });
        assert!(linalg::subspace_gap(&orth, &[ez]).unwrap() < 1e-8);
    }

    #[test]
    fn coisotropy_check_passes_for_flat_and_worked() {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for conn in [Connection::flat(1, 1), worked_example_connection()] {
            let tm = classical_thickening(&conn, &model).unwrap();
            let pts = zero_section_points(tm.chart(), 50, &mut rng);
            let rec = check_coisotropic(&tm, &pts, 1e-8, RANK_TOL);
            assert_eq!(rec.status, CheckStatus::Pass, "{}", rec.note);
        }
    }

    #[test]
    fn coisotropy_trivial_for_symplectic_case() {
        let model = PresymplecticModel::darboux(1, 0).unwrap();
        let tm = classical_thickening(&Connection::flat(1, 0), &model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = zero_section_points(tm.chart(), 10, &mut rng);
        let rec = check_coisotropic(&tm, &pts, 1e-8, RANK_TOL);
        assert_eq!(rec.status, CheckStatus::Pass, "{}", rec.note);
    }

    #[test]
    fn closedness_of_canonical_form() {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        let rec = check_closed("omega-closed", model.omega(), 1e-8, 100, 0);
        assert_eq!(rec.status, CheckStatus::Pass);
        assert_eq!(rec.residual, 0.0);
    }

    #[test]
    fn closedness_of_worked_thickening_is_symbolic() {
        let tm = worked_thickening();
        let rec = check_closed("t", tm.omega_tilde(), 1e-8, 50, 0);
        assert_eq!(rec.status, CheckStatus::Pass);
        assert_eq!(rec.note, "symbolic");
    }

    #[test]
    fn probe_form_fails_with_residual_one() {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        let probe = non_closed_probe(model.chart()).unwrap();
        let corrupted = model.omega().add(&probe).unwrap();
        let rec = check_closed("omega-closed", &corrupted, 1e-8, 100, 0);
        assert_eq!(rec.status, CheckStatus::Fail);
        assert_eq!(rec.residual, 1.0);
    }

    #[test]
    fn probe_needs_three_dimensions() {
        let model = PresymplecticModel::darboux(1, 0).unwrap();
        assert!(matches!(
            non_closed_probe(model.chart()),
            Err(VerifyError::ChartTooSmallForProbe(2))
        ));
    }

    #[test]
    fn scan_flat_connection_has_no_zeros() {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        let tm = classical_thickening(&Connection::flat(1, 1), &model).unwrap();
        let base = Point::new(vec![0.1, 0.2, -0.3, 0.0]);
        let dir = [0.0, 0.0, 0.0, -1.0];
        let out = degeneracy_scan(&tm, &base, &dir, 100.0, 256, 1e-9).unwrap();
        assert!(out.zeros.is_empty());
        assert_eq!(out.clear_radius, 100.0);
    }

    #[test]
    fn scan_worked_example_finds_locus_at_one() {
        let tm = worked_thickening();
        let base = Point::new(vec![0.5, -0.2, 0.9, 0.0]);
        let dir = [0.0, 0.0, 0.0, -1.0];
        // step count chosen so t = 1 is not a grid point: bisection does the work
        let out = degeneracy_scan(&tm, &base, &dir, 2.0, 199, 1e-9).unwrap();
        assert_eq!(out.zeros.len(), 1);
        assert!((out.zeros[0] - 1.0).abs() < 1e-9, "zero at {}", out.zeros[0]);
        // opposite direction stays clear
        let dir = [0.0, 0.0, 0.0, 1.0];
        let out = degeneracy_scan(&tm, &base, &dir, 2.0, 199, 1e-9).unwrap();
        assert!(out.zeros.is_empty());
    }

    #[test]
    fn scan_rejects_base_directions() {
        let tm = worked_thickening();
        let base = Point::new(vec![0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            degeneracy_scan(&tm, &base, &[1.0, 0.0, 0.0, 0.0], 1.0, 10, 1e-9),
            Err(VerifyError::InvalidDirection)
        ));
        assert!(matches!(
            degeneracy_scan(&tm, &base, &[0.0, 0.0, 0.0, 0.0], 1.0, 10, 1e-9),
            Err(VerifyError::InvalidDirection)
        ));
    }

    #[test]
    fn full_report_flat_all_pass() {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        let report = full_report(&model, &Connection::flat(1, 1), &VerifyOptions::default())
            .unwrap();
        assert!(report.all_passed(), "{}", report.render_text());
        let scan = report
            .records
            .iter()
            .find(|r| r.name == "degeneracy-scan-p1-minus")
            .unwrap();
        assert!(scan.note.contains("no Pfaffian zero"));
    }

    #[test]
    fn full_report_worked_example_reports_locus() {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        let report = full_report(
            &model,
            &worked_example_connection(),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(report.all_passed(), "{}", report.render_text());
        let scan = report
            .records
            .iter()
            .find(|r| r.name == "degeneracy-scan-p1-minus")
            .unwrap();
        assert!(scan.note.contains("zeros at t = 1.0000000000000000e0"), "{}", scan.note);
    }

    #[test]
    fn full_report_probe_mode_fails_closedness_only() {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        let opts = VerifyOptions {
            probe_non_closed: true,
            ..VerifyOptions::default()
        };
        let report = full_report(&model, &worked_example_connection(), &opts).unwrap();
        assert!(!report.all_passed());
        assert_eq!(report.failures(), 1);
        assert_eq!(
            report
                .records
                .iter()
                .find(|r| !r.passed())
                .map(|r| r.name.as_str()),
            Some("omega-closed")
        );
    }

    #[test]
    fn report_rendering_is_deterministic() {
        let model = PresymplecticModel::darboux(2, 2).unwrap();
        let chart = model.chart();
        let conn = Connection::new(
            2,
            2,
            vec![
                vec![
                    crate::expr::parse("x1 + y2^2", chart).unwrap(),
                    crate::expr::parse("z1*z2", chart).unwrap(),
                ],
                vec![crate::expr::parse("y1", chart).unwrap(), Expr::zero()],
            ],
            vec![
                vec![Expr::zero(), crate::expr::parse("0.5*x2", chart).unwrap()],
                vec![crate::expr::parse("x1*x2", chart).unwrap(), Expr::one()],
            ],
        )
        .unwrap();
        let opts = VerifyOptions {
            seed: 42,
            ..VerifyOptions::default()
        };
        let a = full_report(&model, &conn, &opts).unwrap();
        let b = full_report(&model, &conn, &opts).unwrap();
        assert!(a.all_passed(), "{}", a.render_text());
        assert_eq!(a.render_structured(), b.render_structured());
        assert_eq!(a.render_text(), b.render_text());
    }

    #[test]
    fn orthogonal_is_involutive_on_nondegenerate_forms() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let n = 2 * rng.gen_range(1..=4usize);
            // random nondegenerate skew matrix (retry while nearly singular)
            let omega = loop {
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i + 1..n {
                        let v: f64 = rng.gen_range(-1.0..1.0);
                        m[(i, j)] = v;
                        m[(j, i)] = -v;
                    }
                }
                if m.determinant().abs() > 1e-3 {
                    break m;
                }
            };
            let k = rng.gen_range(1..=n - 1);
            let basis: Vec<DVector<f64>> = loop {
                let candidate: Vec<DVector<f64>> = (0..k)
                    .map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
                    .collect();
                let mut m = DMatrix::zeros(n, k);
                for (j, v) in candidate.iter().enumerate() {
                    m.set_column(j, v);
                }
                if linalg::numerical_rank(&m, RANK_TOL) == k {
                    break candidate;
                }
            };
            let orth = symplectic_orthogonal(&omega, &basis, RANK_TOL).unwrap();
            assert_eq!(basis.len() + orth.len(), n);
            let back = symplectic_orthogonal(&omega, &orth, RANK_TOL).unwrap();
            let gap = linalg::subspace_gap(&back, &basis).expect("same dimension");
            assert!(gap < 1e-8, "gap {gap}");
        }
    }
}
