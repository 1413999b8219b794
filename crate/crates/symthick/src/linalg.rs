//! Dense numeric kernels: Pfaffians of antisymmetric matrices, SVD-based
//! rank and null spaces, and principal angles between subspaces.
//!
//! The Pfaffian is the primary non-degeneracy probe (degree n in the entries
//! and sign-carrying, unlike the determinant, which is its square); the
//! determinant stays available through nalgebra as a cross-check.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Relative antisymmetry tolerance for Pfaffian inputs.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("pfaffian requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("pfaffian requires even dimension, got {0}")]
    OddDimension(usize),
    #[error("matrix is not antisymmetric: max |A + A^T| entry {violation:e} exceeds tolerance")]
    NotAntisymmetric { violation: f64 },
    #[error("basis vectors are linearly dependent within the rank tolerance")]
    DependentBasis,
    #[error("dimension mismatch: expected vectors of length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

fn check_antisymmetric(m: &DMatrix<f64>) -> Result<(), LinalgError> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(LinalgError::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    let scale = m.amax().max(1.0);
    let mut violation = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            violation = violation.max((m[(i, j)] + m[(j, i)]).abs());
        }
    }
    if violation > ANTISYMMETRY_TOL * scale {
        return Err(LinalgError::NotAntisymmetric { violation });
    }
    Ok(())
}

/// Pfaffian of an antisymmetric matrix of even dimension. Dimensions up to 8
/// use direct minor expansion; larger matrices are reduced to skew
/// tridiagonal form by Householder congruences, with the reflection signs
/// folded back in (`Pf(BAB^T) = det(B) Pf(A)`).
pub fn pfaffian(m: &DMatrix<f64>) -> Result<f64, LinalgError> {
    check_antisymmetric(m)?;
    let n = m.nrows();
    if !n.is_multiple_of(2) {
        return Err(LinalgError::OddDimension(n));
    }
    if n == 0 {
        return Ok(1.0);
    }
    if n <= 8 {
        let idx: Vec<usize> = (0..n).collect();
        Ok(pfaffian_expand(m, &idx))
    } else {
        Ok(pfaffian_tridiag(m.clone()))
    }
}

/// Minor expansion along the first remaining row:
/// `Pf(A) = sum_j (-1)^j a_{1j} Pf(A with rows/cols 1, j removed)`.
fn pfaffian_expand(m: &DMatrix<f64>, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let i0 = idx[0];
    let mut acc = 0.0;
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let a = m[(i0, j)];
        if a == 0.0 {
            continue;
        }
        let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
        let rest: Vec<usize> = idx
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != 0 && p != pos)
            .map(|(_, &v)| v)
            .collect();
        acc += sign * a * pfaffian_expand(m, &rest);
    }
    acc
}

/// Householder reduction to skew tridiagonal form. Each reflection H has
/// det -1, and the skew update A <- HAH simplifies to A + 2(v u^T - u v^T)
/// with u = A v because v^T A v = 0.
fn pfaffian_tridiag(mut a: DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut det_b = 1.0;
    for k in 0..n - 2 {
        let tail_norm: f64 = (k + 2..n).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>().sqrt();
        if tail_norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let norm = (x0 * x0 + tail_norm * tail_norm).sqrt();
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let mut v = DVector::zeros(n);
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vnorm = v.norm();
        if vnorm == 0.0 {
            continue;
        }
        v /= vnorm;
        let u = &a * &v;
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] += 2.0 * (v[i] * u[j] - u[i] * v[j]);
            }
        }
        det_b = -det_b;
    }
    let mut pf = 1.0;
    let mut i = 0;
    while i + 1 < n {
        pf *= a[(i, i + 1)];
        i += 2;
    }
    pf * det_b
}

/// Numerical rank with the cutoff `rel_tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal basis of the null space of `m`, with the cutoff
/// `rel_tol * sigma_max`. The matrix is padded with zero rows to square so
/// the SVD exposes all right singular vectors.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sv = svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let thresh = rel_tol * smax;
    let mut basis = Vec::new();
    for i in 0..n {
        let s = if i < sv.len() { sv[i] } else { 0.0 };
        if s <= thresh {
            basis.push(vt.row(i).transpose());
        }
    }
    basis
}

/// Orthonormal basis for the span of `vectors` (SVD-based; tolerant of
/// near-dependence).
pub fn orthonormal_basis(vectors: &[DVector<f64>], rel_tol: f64) -> Vec<DVector<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let n = vectors[0].len();
    let mut m = DMatrix::zeros(n, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U");
    let sv = svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let mut basis = Vec::new();
    for i in 0..sv.len() {
        if smax > 0.0 && sv[i] > rel_tol * smax {
            basis.push(u.column(i).clone_owned());
        }
    }
    basis
}

/// Principal angles (radians, ascending) between the spans of two vector
/// sets. Returns `min(dim a, dim b)` angles. Small angles come from the
/// sine-based formula (singular values of `Qb - Qa Qa^T Qb`), which stays
/// accurate where `acos` near 1 loses half the available precision.
pub fn principal_angles(a: &[DVector<f64>], b: &[DVector<f64>]) -> Vec<f64> {
    let qa = orthonormal_basis(a, RANK_TOL);
    let qb = orthonormal_basis(b, RANK_TOL);
    if qa.is_empty() || qb.is_empty() {
        return Vec::new();
    }
    let n = qa[0].len();
    let mut ma = DMatrix::zeros(n, qa.len());
    for (j, v) in qa.iter().enumerate() {
        ma.set_column(j, v);
    }
    let mut mb = DMatrix::zeros(n, qb.len());
    for (j, v) in qb.iter().enumerate() {
        mb.set_column(j, v);
    }
    let prod = ma.transpose() * &mb;
    // cosines descending <-> angles ascending
    let cosines = prod.clone().singular_values();
    // sines of the same angles, ascending after a sort
    let residual = &mb - &ma * prod;
    let mut sines: Vec<f64> = residual.singular_values().iter().cloned().collect();
    sines.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let k = cosines.len();
    (0..k)
        .map(|i| {
            let c = cosines[i].clamp(0.0, 1.0);
            let s = sines.get(i).copied().unwrap_or(0.0).clamp(0.0, 1.0);
            if c * c > 0.5 {
                s.asin()
            } else {
                c.acos()
            }
        })
        .collect()
}

/// Max principal angle when both spans have equal dimension; `None` when the
/// dimensions differ (the subspaces cannot be equal).
pub fn subspace_gap(a: &[DVector<f64>], b: &[DVector<f64>]) -> Option<f64> {
    let qa = orthonormal_basis(a, RANK_TOL);
    let qb = orthonormal_basis(b, RANK_TOL);
    if qa.len() != qb.len() {
        return None;
    }
    if qa.is_empty() {
        return Some(0.0);
    }
    Some(
        principal_angles(&qa, &qb)
            .into_iter()
            .fold(0.0_f64, f64::max),
    )
}

/// Largest residual `‖(I - Q Q^T) v‖` over the (normalized) `inner` vectors,
/// `Q` an orthonormal basis of `outer`. Zero means containment.
pub fn containment_residual(inner: &[DVector<f64>], outer: &[DVector<f64>]) -> f64 {
    let q = orthonormal_basis(outer, RANK_TOL);
    let mut worst = 0.0_f64;
    for v in inner {
        let norm = v.norm();
        if norm == 0.0 {
            continue;
        }
        let v = v / norm;
        let mut proj = DVector::zeros(v.len());
        for qv in &q {
            proj += qv * qv.dot(&v);
        }
        worst = worst.max((v - proj).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skew_from(entries: &[(usize, usize, f64)], n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, v) in entries {
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
        m
    }

    #[test]
    fn pfaffian_of_canonical_block() {
        let m = skew_from(&[(0, 1, 1.0)], 2);
        assert_eq!(pfaffian(&m).unwrap(), 1.0);
    }

    #[test]
    fn pfaffian_of_two_canonical_blocks() {
        let m = skew_from(&[(0, 1, 1.0), (2, 3, 1.0)], 4);
        assert_eq!(pfaffian(&m).unwrap(), 1.0);
    }

    #[test]
    fn pfaffian_matches_four_by_four_formula() {
        // Pf = a01*a23 - a02*a13 + a03*a12
        let m = skew_from(
            &[
                (0, 1, 1.3),
                (0, 2, -0.4),
                (0, 3, 2.2),
                (1, 2, 0.9),
                (1, 3, -1.7),
                (2, 3, 0.6),
            ],
            4,
        );
        let expected = 1.3 * 0.6 - (-0.4) * (-1.7) + 2.2 * 0.9;
        assert!((pfaffian(&m).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn pfaffian_rejects_odd_dimension() {
        let m = DMatrix::zeros(3, 3);
        assert!(matches!(pfaffian(&m), Err(LinalgError::OddDimension(3))));
    }

    #[test]
    fn pfaffian_rejects_non_antisymmetric() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0;
        assert!(matches!(
            pfaffian(&m),
            Err(LinalgError::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn tridiagonal_route_agrees_with_expansion() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [4usize, 6, 8] {
            for _ in 0..20 {
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i + 1..n {
                        let v: f64 = rng.gen_range(-2.0..2.0);
                        m[(i, j)] = v;
                        m[(j, i)] = -v;
                    }
                }
                let idx: Vec<usize> = (0..n).collect();
                let direct = pfaffian_expand(&m, &idx);
                let tri = pfaffian_tridiag(m.clone());
                assert!(
                    (direct - tri).abs() <= 1e-9 * (1.0 + direct.abs()),
                    "n={n}: {direct} vs {tri}"
                );
            }
        }
    }

    #[test]
    fn pfaffian_squared_is_determinant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 4, 6, 8, 10, 12] {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    m[(i, j)] = v;
                    m[(j, i)] = -v;
                }
            }
            let pf = pfaffian(&m).unwrap();
            let det = m.determinant();
            assert!(
                (pf * pf - det).abs() <= 1e-9 * (1.0 + det.abs()),
                "n={n}: pf^2={} det={det}",
                pf * pf
            );
        }
    }

    #[test]
    fn nullspace_of_rank_deficient_matrix() {
        // rows span {e0 + e1}; null space is 2-dimensional in R^3
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        let ns = nullspace(&m, RANK_TOL);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((v[0] + v[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn nullspace_of_zero_map_is_everything() {
        let m = DMatrix::zeros(2, 4);
        assert_eq!(nullspace(&m, RANK_TOL).len(), 4);
    }

    #[test]
    fn rank_uses_relative_cutoff() {
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 0)] = 1.0;
        m[(1, 1)] = 1e-3;
        m[(2, 2)] = 1e-15;
        assert_eq!(numerical_rank(&m, RANK_TOL), 2);
    }

    #[test]
    fn principal_angles_detect_equality_and_orthogonality() {
        let e0 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let e1 = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let mix = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let gap = subspace_gap(&[e0.clone(), e1.clone()], &[mix.clone(), e0.clone()]).unwrap();
        assert!(gap < 1e-12);
        let angles = principal_angles(std::slice::from_ref(&e0), std::slice::from_ref(&e1));
        assert!((angles[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(subspace_gap(&[e0], &[e1, mix]).is_none());
    }

    #[test]
    fn containment_residual_flags_escapes() {
        let e0 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let e1 = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        assert!(containment_residual(std::slice::from_ref(&e0), &[e0.clone(), e1.clone()]) < 1e-14);
        assert!(containment_residual(&[e2], &[e0, e1]) > 0.9);
    }
}
