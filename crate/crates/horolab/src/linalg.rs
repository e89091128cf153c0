//! Small dense-matrix kernels shared across the crate.
//!
//! Everything here works on `nalgebra` dynamic matrices of order at most
//! a few; the custom pieces exist where library routines are not
//! adequate:
//!
//! * a cyclic Jacobi eigensolver with a *relative* off-diagonal
//!   threshold, which computes the small eigenvalues of graded
//!   positive-definite matrices (entries spanning hundreds of orders of
//!   magnitude) to high relative accuracy — required when comparing
//!   points against geodesic rays evaluated at large times;
//! * an LU factorization without pivoting, whose unit lower factor is
//!   the canonical unipotent datum of a transversal flag;
//! * isotonic projection onto the closed Weyl chamber cone.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Frobenius norm.
pub fn frob(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Maximum absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Rotations are applied until every off-diagonal entry satisfies
/// `|a_pq| <= tol * sqrt(|a_pp * a_qq|)`; for positive-definite input
/// this yields eigenvalues with small *relative* error even when the
/// matrix is strongly graded. Returns eigenvalues in descending order
/// with matching eigenvector columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::NumericalFailure("jacobi: non-square input".into()));
    }
    let mut m = a.clone();
    symmetrize(&mut m);
    let mut v = DMatrix::<f64>::identity(n, n);
    let tol = 1e-15f64;
    let mut converged = false;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let apq = m[(p, q)];
                let thresh = tol * (app.abs() * aqq.abs()).sqrt();
                if apq.abs() <= thresh {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = m[(i, p)];
                    let aiq = m[(i, q)];
                    m[(i, p)] = c * aip - s * aiq;
                    m[(i, q)] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = m[(p, i)];
                    let aqi = m[(q, i)];
                    m[(p, i)] = c * api - s * aqi;
                    m[(q, i)] = s * api + c * aqi;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(
            "jacobi eigensolver did not converge in 100 sweeps".into(),
        ));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
    let values = DVector::from_fn(n, |i, _| m[(idx[i], idx[i])]);
    let vectors = DMatrix::from_fn(n, n, |i, j| v[(i, idx[j])]);
    Ok((values, vectors))
}

/// Apply a scalar function to a symmetric matrix through its
/// eigendecomposition.
pub fn sym_func(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    let (vals, vecs) = jacobi_eigen(a)?;
    let n = a.nrows();
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { f(vals[i]) } else { 0.0 });
    let mut out = &vecs * d * vecs.transpose();
    symmetrize(&mut out);
    Ok(out)
}

pub fn spd_log(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = jacobi_eigen(a)?;
    if vals[a.nrows() - 1] <= 0.0 {
        return Err(Error::NumericalFailure(
            "spd_log: matrix is not positive definite".into(),
        ));
    }
    let n = a.nrows();
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { vals[i].ln() } else { 0.0 });
    let mut out = &vecs * d * vecs.transpose();
    symmetrize(&mut out);
    Ok(out)
}

pub fn spd_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sym_func(a, |x| x.max(0.0).sqrt())
}

/// Fractional power `a^s` of a positive-definite matrix.
pub fn spd_pow(a: &DMatrix<f64>, s: f64) -> Result<DMatrix<f64>> {
    sym_func(a, |x| x.max(f64::MIN_POSITIVE).powf(s))
}

pub fn sym_exp(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sym_func(a, f64::exp)
}

/// Logs of the eigenvalues of `p^{-1} q` for positive-definite `p`, `q`,
/// computed through the symmetrized pencil `L^{-1} q L^{-T}` with
/// `p = L L^T`, then the Jacobi solver. Sorted descending.
pub fn log_rel_eigenvalues(p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = nalgebra::Cholesky::new(p.clone()).ok_or_else(|| {
        Error::NumericalFailure("cholesky failed: point is not positive definite".into())
    })?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(q)
        .ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    let y = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    let mut m = y.transpose();
    symmetrize(&mut m);
    let (vals, _) = jacobi_eigen(&m)?;
    let mut out = Vec::with_capacity(vals.len());
    for i in 0..vals.len() {
        if vals[i] <= 0.0 {
            return Err(Error::NumericalFailure(format!(
                "relative eigenvalue {} is not positive: {}",
                i, vals[i]
            )));
        }
        out.push(vals[i].ln());
    }
    Ok(out)
}

/// Solve `a W = b` through column equilibration: with `a = C_a D_a` and
/// `b = C_b D_b` (columns scaled to unit norm), `W = D_a^{-1} (C_a^{-1}
/// C_b) D_b`. The solve happens at the well-conditioned core and the
/// gradings are reapplied exactly, so `W`'s entries keep relative
/// accuracy even when `a`, `b` are strongly column-graded (geodesic
/// representatives at large times).
pub fn rel_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut da = DVector::<f64>::zeros(n);
    let mut db = DVector::<f64>::zeros(n);
    let mut ca = a.clone();
    let mut cb = b.clone();
    for j in 0..n {
        let na = a.column(j).norm();
        let nb = b.column(j).norm();
        if !(na > 0.0) || !(nb > 0.0) {
            return Err(Error::SingularInput("zero column in rel_solve".into()));
        }
        da[j] = na;
        db[j] = nb;
        for i in 0..n {
            ca[(i, j)] /= na;
            cb[(i, j)] /= nb;
        }
    }
    let lu = ca.lu();
    let m = lu
        .solve(&cb)
        .ok_or_else(|| Error::SingularInput("equilibrated solve failed".into()))?;
    let w = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * db[j] / da[i]);
    Ok(w)
}

/// Singular values by one-sided (Hestenes) Jacobi with a relative
/// convergence threshold. The matrix is transposed first if its rows
/// are more strongly graded than its columns; column rotations then
/// preserve high relative accuracy of all singular values.
pub fn singular_values_graded(w: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = w.nrows();
    if n != w.ncols() {
        return Err(Error::NumericalFailure("svd: non-square input".into()));
    }
    let spread = |m: &DMatrix<f64>, by_col: bool| -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..n {
            let nrm = if by_col {
                m.column(k).norm()
            } else {
                m.row(k).norm()
            };
            if nrm > 0.0 {
                lo = lo.min(nrm.ln());
                hi = hi.max(nrm.ln());
            }
        }
        hi - lo
    };
    let mut m = if spread(w, false) > spread(w, true) {
        w.transpose()
    } else {
        w.clone()
    };
    let tol = 1e-15f64;
    let mut converged = false;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let cp = m.column(p);
                let cq = m.column(q);
                let app = cp.dot(&cp);
                let aqq = cq.dot(&cq);
                let apq = cp.dot(&cq);
                if apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = c * mip - s * miq;
                    m[(i, q)] = s * mip + c * miq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(
            "one-sided jacobi did not converge in 100 sweeps".into(),
        ));
    }
    let mut sv: Vec<f64> = (0..n).map(|j| m.column(j).norm()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if sv.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::SingularInput(format!(
            "degenerate singular values {:?}",
            sv
        )));
    }
    Ok(sv)
}

/// Doolittle LU without pivoting: `b = L U` with `L` unit lower
/// triangular. Fails if a pivot falls below `tol` in magnitude.
pub fn lu_unit_lower_nopivot(
    b: &DMatrix<f64>,
    tol: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = b.nrows();
    let mut u = b.clone();
    let mut l = DMatrix::<f64>::identity(n, n);
    for k in 0..n {
        let pivot = u[(k, k)];
        if pivot.abs() < tol {
            return Err(Error::NotOpposite(format!(
                "pivot {} at step {} below tolerance {}",
                pivot, k, tol
            )));
        }
        for i in (k + 1)..n {
            let f = u[(i, k)] / pivot;
            l[(i, k)] = f;
            for j in k..n {
                u[(i, j)] -= f * u[(k, j)];
            }
        }
    }
    Ok((l, u))
}

/// Leading principal minors `det b[..k, ..k]` for `k = 1..=n`.
pub fn leading_principal_minors(b: &DMatrix<f64>) -> Vec<f64> {
    let n = b.nrows();
    (1..=n)
        .map(|k| {
            let sub = b.view((0, 0), (k, k)).clone_owned();
            sub.determinant()
        })
        .collect()
}

/// QR factorization with the sign convention that `R` has positive
/// diagonal. Returns `(q, r)`.
pub fn qr_pos(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    let n = r.nrows().min(r.ncols());
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            for j in 0..r.ncols() {
                r[(i, j)] = -r[(i, j)];
            }
            for j in 0..q.nrows() {
                q[(j, i)] = -q[(j, i)];
            }
        }
    }
    (q, r)
}

/// 2-norm condition number estimate via singular values.
pub fn cond_2(m: &DMatrix<f64>) -> f64 {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Orthonormal basis of the orthogonal complement of the column span of
/// `cols` (an `n x m` matrix of full column rank, `m < n`), as the
/// columns of an `n x (n-m)` matrix.
pub fn orthonormal_complement(cols: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cols.nrows();
    let m = cols.ncols();
    let gram = cols.transpose() * cols;
    let gram_inv = gram.try_inverse().ok_or_else(|| {
        Error::NumericalFailure("complement: columns are numerically dependent".into())
    })?;
    let proj = cols * gram_inv * cols.transpose();
    let resid = DMatrix::<f64>::identity(n, n) - proj;
    let (vals, vecs) = jacobi_eigen(&resid)?;
    let mut out = DMatrix::<f64>::zeros(n, n - m);
    let mut c = 0;
    for j in 0..n {
        if vals[j] > 0.5 {
            if c < n - m {
                for i in 0..n {
                    out[(i, c)] = vecs[(i, j)];
                }
            }
            c += 1;
        }
    }
    if c != n - m {
        return Err(Error::NumericalFailure(format!(
            "complement rank {} expected {}",
            c,
            n - m
        )));
    }
    Ok(out)
}

/// A unit vector spanning the (generically one-dimensional) intersection
/// of the column spans of `a` and `b`, together with the second-smallest
/// eigenvalue of the stacked Gram matrix as a non-degeneracy gauge.
pub fn subspace_intersection(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(DVector<f64>, f64)> {
    let n = a.nrows();
    let ca = a.ncols();
    let cb = b.ncols();
    // orthonormalize both prefix bases; the stacked Gram then measures
    // genuine principal angles rather than basis conditioning
    let qa = thin_q(a);
    let qb = thin_q(b);
    let mut c = DMatrix::<f64>::zeros(n, ca + cb);
    for j in 0..ca {
        for i in 0..n {
            c[(i, j)] = qa[(i, j)];
        }
    }
    for j in 0..cb {
        for i in 0..n {
            c[(i, ca + j)] = -qb[(i, j)];
        }
    }
    let gram = c.transpose() * &c;
    let (vals, vecs) = jacobi_eigen(&gram)?;
    let k = ca + cb;
    let null = vecs.column(k - 1);
    let gap = vals[k - 2];
    let alpha = null.rows(0, ca).clone_owned();
    let mut w = DVector::<f64>::zeros(n);
    for j in 0..ca {
        for i in 0..n {
            w[i] += qa[(i, j)] * alpha[j];
        }
    }
    let nw = w.norm();
    if nw < 1e-9 {
        return Err(Error::NumericalFailure(
            "subspace intersection is numerically trivial".into(),
        ));
    }
    Ok((w / nw, gap))
}

/// Thin orthonormal basis of the column span (QR).
fn thin_q(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (q, _) = qr_pos(a);
    q.columns(0, a.ncols()).clone_owned()
}

/// Do two full-column-rank matrices span the same subspace?
pub fn same_span(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    if a.ncols() != b.ncols() || a.nrows() != b.nrows() {
        return false;
    }
    let pa = match projector(a) {
        Some(p) => p,
        None => return false,
    };
    let pb = match projector(b) {
        Some(p) => p,
        None => return false,
    };
    frob(&(pa - pb)) < tol
}

fn projector(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let gram = a.transpose() * a;
    let gi = gram.try_inverse()?;
    Some(a * gi * a.transpose())
}

/// Euclidean projection of `w` onto the non-increasing cone
/// `{ w_1 >= w_2 >= ... >= w_n }` by pool-adjacent-violators, followed
/// by mean removal so the result is traceless.
pub fn project_descending_traceless(w: &DVector<f64>) -> DVector<f64> {
    let n = w.len();
    // Blocks of (value, weight).
    let mut vals: Vec<f64> = Vec::with_capacity(n);
    let mut wts: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        vals.push(w[i]);
        wts.push(1.0);
        // merge while ascending violation (previous < current)
        while vals.len() > 1 {
            let m = vals.len();
            if vals[m - 2] < vals[m - 1] {
                let tw = wts[m - 2] + wts[m - 1];
                let tv = (vals[m - 2] * wts[m - 2] + vals[m - 1] * wts[m - 1]) / tw;
                vals.truncate(m - 2);
                wts.truncate(m - 2);
                vals.push(tv);
                wts.push(tw);
            } else {
                break;
            }
        }
    }
    let mut out = DVector::<f64>::zeros(n);
    let mut i = 0;
    for (v, wt) in vals.iter().zip(wts.iter()) {
        for _ in 0..(*wt as usize) {
            out[i] = *v;
            i += 1;
        }
    }
    let mean = out.iter().sum::<f64>() / n as f64;
    out.add_scalar(-mean)
}

/// Spherical interpolation between unit vectors, `s` in `[0,1]`.
/// Requires the pair to be non-antipodal; see `slerp_with_fallback`.
pub fn slerp(a: &DVector<f64>, b: &DVector<f64>, s: f64) -> DVector<f64> {
    let dot = a.dot(b).clamp(-1.0, 1.0);
    let ang = dot.acos();
    if ang < 1e-14 {
        return a.clone();
    }
    let sin = ang.sin();
    let u = ((1.0 - s) * ang).sin() / sin;
    let v = (s * ang).sin() / sin;
    let mut out = a * u + b * v;
    let n = out.norm();
    if n > 0.0 {
        out /= n;
    }
    out
}

/// Angle between unit vectors.
pub fn unit_angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_known_spectrum() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let (vals, vecs) = jacobi_eigen(&a).unwrap();
        // residual A v = lambda v
        for j in 0..3 {
            let v = vecs.column(j).clone_owned();
            let r = &a * &v - vals[j] * &v;
            assert!(r.norm() < 1e-12);
        }
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
    }

    #[test]
    fn jacobi_resolves_graded_spectrum() {
        // D A D with huge grading: eigenvalues near d_i^2 * a_ii scale.
        let d = [1e140, 1.0, 1e-140];
        let base =
            DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0]);
        let g = DMatrix::from_fn(3, 3, |i, j| base[(i, j)] * d[i] * d[j]);
        let (vals, _) = jacobi_eigen(&g).unwrap();
        // smallest eigenvalue must stay positive and near 1e-280 scale
        assert!(vals[2] > 0.0);
        let l = vals[2].ln();
        assert!((l - (1e-280f64).ln().round()).abs() < 5.0, "log {}", l);
    }

    #[test]
    fn lu_recovers_unipotent() {
        let b = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.0, 0.0, 0.7, 1.0, 0.0, -0.3, 0.4, 1.0],
        );
        let u = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.5, 0.0, -1.0, 0.2, 0.0, 0.0, 3.0]);
        let m = &b * &u;
        let (l, uu) = lu_unit_lower_nopivot(&m, 1e-12).unwrap();
        assert!(frob(&(l - b)) < 1e-12);
        assert!(frob(&(uu - u)) < 1e-12);
    }

    #[test]
    fn pav_projects_onto_cone() {
        let w = DVector::from_row_slice(&[1.0, 2.0, 0.0, -3.0]);
        let p = project_descending_traceless(&w);
        for i in 0..3 {
            assert!(p[i] >= p[i + 1] - 1e-14);
        }
        assert!(p.iter().sum::<f64>().abs() < 1e-12);
        // projection of an already feasible vector is itself
        let w2 = DVector::from_row_slice(&[2.0, 1.0, -1.0, -2.0]);
        let p2 = project_descending_traceless(&w2);
        assert!((p2 - w2).norm() < 1e-14);
    }

    #[test]
    fn complement_is_orthonormal() {
        let cols = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.5, 1.0, 0.0, 2.0, 1.0, -1.0]);
        let c = orthonormal_complement(&cols).unwrap();
        assert_eq!(c.ncols(), 2);
        let g = c.transpose() * &c;
        assert!(frob(&(g - DMatrix::identity(2, 2))) < 1e-10);
        let mix = cols.transpose() * &c;
        assert!(max_abs(&mix) < 1e-10);
    }
}
