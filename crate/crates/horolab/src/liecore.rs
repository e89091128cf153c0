//! Matrix Lie-group kernel for `SL(n,R)`.
//!
//! Fixes once and for all the conventions used by the rest of the crate:
//! the standard chamber corresponds to strictly decreasing diagonals, so
//! `N` is the unit upper-triangular group, `A` the positive diagonal
//! torus, and `K = SO(n)`. The Iwasawa factorization `g = n a k` is
//! computed from an orthogonal-triangular factorization of `g^{-1}`
//! (the `K A N` factorization of the inverse, inverted), which makes the
//! `n` factor genuinely upper triangular.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::policy::NumericPolicy;

/// An element of `SL(n,R)`: determinant one up to construction tolerance.
#[derive(Debug, Clone)]
pub struct SpecialLinear {
    m: DMatrix<f64>,
}

impl SpecialLinear {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let pol = NumericPolicy::DEFAULT;
        let n = m.nrows();
        if n < 2 || m.ncols() != n {
            return Err(Error::InvalidConfig(format!(
                "special linear elements need square order >= 2, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > pol.construction_tol {
            return Err(Error::InvalidConfig(format!(
                "determinant {} is not 1 within {}",
                det, pol.construction_tol
            )));
        }
        Ok(SpecialLinear { m })
    }

    /// Rescale an arbitrary invertible matrix to determinant one. If the
    /// determinant is negative the first column is negated first. The
    /// rescale makes the determinant one by construction, so no second
    /// determinant evaluation is performed (it would be noisy exactly
    /// when the input is ill conditioned).
    pub fn normalize(mut m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n < 2 || m.ncols() != n {
            return Err(Error::InvalidConfig(format!(
                "special linear elements need square order >= 2, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let det = m.determinant();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(Error::SingularInput(format!("determinant {}", det)));
        }
        if det < 0.0 {
            for i in 0..n {
                m[(i, 0)] = -m[(i, 0)];
            }
        }
        let scale = det.abs().powf(1.0 / n as f64);
        m /= scale;
        Ok(SpecialLinear { m })
    }

    pub fn identity(n: usize) -> Self {
        SpecialLinear {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn mul(&self, other: &SpecialLinear) -> SpecialLinear {
        SpecialLinear {
            m: &self.m * &other.m,
        }
    }

    /// Inverse through the Iwasawa factors: `g^{-1} = k^T a^{-1} n^{-1}`
    /// with an exact orthogonal transpose, exact diagonal reciprocal and
    /// a finite nilpotent series, so the determinant does not drift even
    /// for strongly graded input.
    pub fn inverse(&self) -> Result<SpecialLinear> {
        let f = iwasawa_nak(self)?;
        let kt = f.k.entries().transpose();
        let ainv = f.a.inverse();
        let ninv = f.n.inverse();
        Ok(SpecialLinear {
            m: kt * ainv.matrix() * ninv.entries(),
        })
    }

    /// 2-norm condition number; the factorization warns above `1e12`.
    pub fn condition(&self) -> f64 {
        linalg::cond_2(&self.m)
    }
}

/// Unit upper-triangular matrix: diagonal exactly one, strictly lower
/// part exactly zero.
#[derive(Debug, Clone)]
pub struct UnitUpper {
    m: DMatrix<f64>,
}

impl UnitUpper {
    /// Validates within construction tolerance, then snaps the diagonal
    /// and lower part to their exact values.
    pub fn new(mut m: DMatrix<f64>) -> Result<Self> {
        let pol = NumericPolicy::DEFAULT;
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::InvalidConfig("unit upper: non-square".into()));
        }
        for i in 0..n {
            if (m[(i, i)] - 1.0).abs() > pol.construction_tol {
                return Err(Error::InvalidConfig(format!(
                    "unit upper: diagonal entry {} is {}",
                    i,
                    m[(i, i)]
                )));
            }
            m[(i, i)] = 1.0;
            for j in 0..i {
                if m[(i, j)].abs() > pol.construction_tol {
                    return Err(Error::InvalidConfig(format!(
                        "unit upper: lower entry ({},{}) is {}",
                        i,
                        j,
                        m[(i, j)]
                    )));
                }
                m[(i, j)] = 0.0;
            }
        }
        Ok(UnitUpper { m })
    }

    pub fn identity(n: usize) -> Self {
        UnitUpper {
            m: DMatrix::identity(n, n),
        }
    }

    /// Exponential of a strictly upper-triangular matrix (finite series).
    pub fn from_log(l: &DMatrix<f64>) -> UnitUpper {
        let n = l.nrows();
        let mut acc = DMatrix::<f64>::identity(n, n);
        let mut term = DMatrix::<f64>::identity(n, n);
        for k in 1..n {
            term = (&term * l) / k as f64;
            acc += &term;
        }
        UnitUpper { m: acc }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn mul(&self, other: &UnitUpper) -> UnitUpper {
        UnitUpper {
            m: &self.m * &other.m,
        }
    }

    /// Inverse of a unit upper-triangular matrix, again unit upper.
    pub fn inverse(&self) -> UnitUpper {
        let n = self.m.nrows();
        let log = nilpotent_log(self);
        // exp(-log) is exact for nilpotent logs
        UnitUpper::from_log(&(-log)).snap(n)
    }

    fn snap(mut self, n: usize) -> UnitUpper {
        for i in 0..n {
            self.m[(i, i)] = 1.0;
            for j in 0..i {
                self.m[(i, j)] = 0.0;
            }
        }
        self
    }

    pub fn as_group(&self) -> SpecialLinear {
        SpecialLinear { m: self.m.clone() }
    }
}

/// Positive diagonal matrix with determinant one.
#[derive(Debug, Clone)]
pub struct PositiveDiagonal {
    d: DVector<f64>,
}

impl PositiveDiagonal {
    pub fn new(d: DVector<f64>) -> Result<Self> {
        let pol = NumericPolicy::DEFAULT;
        if d.iter().any(|&x| x <= 0.0) {
            return Err(Error::InvalidConfig(
                "positive diagonal: nonpositive entry".into(),
            ));
        }
        let logdet: f64 = d.iter().map(|x| x.ln()).sum();
        if logdet.abs() > pol.construction_tol {
            return Err(Error::InvalidConfig(format!(
                "positive diagonal: log-determinant {}",
                logdet
            )));
        }
        Ok(PositiveDiagonal { d })
    }

    pub fn identity(n: usize) -> Self {
        PositiveDiagonal {
            d: DVector::from_element(n, 1.0),
        }
    }

    pub fn from_log(v: &CartanVector) -> PositiveDiagonal {
        PositiveDiagonal {
            d: v.coords().map(f64::exp),
        }
    }

    /// Construct without the determinant-one validation (for internal
    /// compositions whose drift is tracked by the caller).
    pub fn new_unchecked(d: DVector<f64>) -> PositiveDiagonal {
        PositiveDiagonal { d }
    }

    pub fn diag(&self) -> &DVector<f64> {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn log(&self) -> CartanVector {
        CartanVector {
            v: self.d.map(f64::ln),
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.d)
    }

    pub fn as_group(&self) -> SpecialLinear {
        SpecialLinear {
            m: self.matrix(),
        }
    }

    pub fn inverse(&self) -> PositiveDiagonal {
        PositiveDiagonal {
            d: self.d.map(|x| 1.0 / x),
        }
    }
}

/// Element of `SO(n)`.
#[derive(Debug, Clone)]
pub struct Orthogonal {
    m: DMatrix<f64>,
}

impl Orthogonal {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let pol = NumericPolicy::DEFAULT;
        let n = m.nrows();
        let gram = &m * m.transpose();
        let resid = gram - DMatrix::<f64>::identity(n, n);
        if linalg::max_abs(&resid) > pol.construction_tol {
            return Err(Error::InvalidConfig(
                "orthogonal: gram residual above tolerance".into(),
            ));
        }
        if m.determinant() < 0.0 {
            return Err(Error::InvalidConfig("orthogonal: determinant -1".into()));
        }
        Ok(Orthogonal { m })
    }

    pub fn identity(n: usize) -> Self {
        Orthogonal {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn as_group(&self) -> SpecialLinear {
        SpecialLinear { m: self.m.clone() }
    }
}

/// The factors of `g = n a k`.
#[derive(Debug, Clone)]
pub struct IwasawaFactors {
    pub n: UnitUpper,
    pub a: PositiveDiagonal,
    pub k: Orthogonal,
}

impl IwasawaFactors {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.n.entries() * self.a.matrix() * self.k.entries()
    }

    /// The `n a` part as a group element (a horospherical representative
    /// of the same symmetric-space point).
    pub fn na(&self) -> SpecialLinear {
        SpecialLinear {
            m: self.n.entries() * self.a.matrix(),
        }
    }
}

/// Traceless diagonal Lie-algebra element.
#[derive(Debug, Clone)]
pub struct CartanVector {
    v: DVector<f64>,
}

impl CartanVector {
    pub fn new(v: DVector<f64>) -> Result<Self> {
        let pol = NumericPolicy::DEFAULT;
        let tr: f64 = v.iter().sum();
        if tr.abs() > pol.trace_tol * (1.0 + v.norm()) {
            return Err(Error::InvalidConfig(format!(
                "cartan vector: trace {} not zero",
                tr
            )));
        }
        Ok(CartanVector { v })
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        CartanVector::new(DVector::from_row_slice(v))
    }

    /// Project out the trace and construct.
    pub fn project(v: DVector<f64>) -> CartanVector {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        CartanVector {
            v: v.add_scalar(-mean),
        }
    }

    pub fn zero(n: usize) -> CartanVector {
        CartanVector {
            v: DVector::zeros(n),
        }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    pub fn normalized(&self) -> CartanVector {
        let n = self.v.norm();
        CartanVector {
            v: if n > 0.0 { &self.v / n } else { self.v.clone() },
        }
    }

    pub fn scale(&self, s: f64) -> CartanVector {
        CartanVector { v: &self.v * s }
    }

    pub fn add(&self, o: &CartanVector) -> CartanVector {
        CartanVector { v: &self.v + &o.v }
    }

    pub fn dot(&self, o: &CartanVector) -> f64 {
        self.v.dot(&o.v)
    }

    pub fn exp(&self) -> PositiveDiagonal {
        PositiveDiagonal::from_log(self)
    }

    /// Strictly decreasing entries (interior of the standard chamber)?
    pub fn is_regular_descending(&self, gap_tol: f64) -> bool {
        self.v
            .iter()
            .zip(self.v.iter().skip(1))
            .all(|(a, b)| a - b > gap_tol)
    }

    /// Entries reversed (conjugation by the order-reversing permutation).
    pub fn reversed(&self) -> CartanVector {
        let n = self.v.len();
        CartanVector {
            v: DVector::from_fn(n, |i, _| self.v[n - 1 - i]),
        }
    }

    /// Barycenter direction of the standard chamber: the normalized sum
    /// of the unit extreme rays of the cone of decreasing traceless
    /// diagonals.
    pub fn standard_barycenter(n: usize) -> CartanVector {
        let mut acc = DVector::<f64>::zeros(n);
        for ray in chamber_extreme_rays(n) {
            acc += ray.coords();
        }
        let nrm = acc.norm();
        CartanVector { v: acc / nrm }
    }
}

/// The order-reversing (antidiagonal) frame as a group element; one
/// entry is negated when the reversal permutation is odd so the
/// determinant is `+1`. Sign flips do not change the flag it spans.
pub fn canonical_reversal(n: usize) -> SpecialLinear {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, n - 1 - i)] = 1.0;
    }
    if m.determinant() < 0.0 {
        m[(0, n - 1)] = -1.0;
    }
    SpecialLinear { m }
}

/// Unit extreme rays of the closed standard chamber cone
/// `{v_1 >= ... >= v_n, sum v_i = 0}`: the traceless projections of the
/// indicator vectors of the prefixes.
pub fn chamber_extreme_rays(n: usize) -> Vec<CartanVector> {
    (1..n)
        .map(|k| {
            let v = DVector::from_fn(n, |i, _| if i < k { 1.0 } else { 0.0 });
            CartanVector::project(v).normalized()
        })
        .collect()
}

/// A root `alpha_ij` of the diagonal Cartan, `i != j`; positive roots
/// are the pairs `i < j` for the standard chamber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Root {
    pub i: usize,
    pub j: usize,
}

impl Root {
    pub fn eval(&self, v: &CartanVector) -> f64 {
        v.coords()[self.i] - v.coords()[self.j]
    }
}

pub fn positive_roots(n: usize) -> Vec<Root> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(Root { i, j });
        }
    }
    out
}

/// Iwasawa factorization `g = n a k` with `n` unit upper triangular,
/// `a` positive diagonal, and `k` in `SO(n)`.
///
/// The factors are those of the inverted `K A N` factorization of
/// `g^{-1}` (the convention that makes `n` genuinely upper triangular
/// with the positive-root group); they are computed without inverting
/// anything, through one QR factorization of the double-reversed
/// transpose, which is backward stable at any conditioning.
pub fn iwasawa_nak(g: &SpecialLinear) -> Result<IwasawaFactors> {
    let pol = NumericPolicy::DEFAULT;
    let n = g.n();
    let gm = g.entries();
    // b = J g^T J; with b = q r, the transpose of (J r J) is the upper
    // factor n a of g and the transpose of (J q J) is k.
    let b = DMatrix::from_fn(n, n, |i, j| gm[(n - 1 - j, n - 1 - i)]);
    let (q, r) = linalg::qr_pos(&b);
    let mut a_diag = DVector::<f64>::zeros(n);
    for i in 0..n {
        let p = r[(n - 1 - i, n - 1 - i)];
        if !(p > 1e-300) {
            return Err(Error::SingularInput(format!(
                "factorization pivot {} underflowed: {}",
                i, p
            )));
        }
        a_diag[i] = p;
    }
    // upper factor U = (J r J)^T, split into n * a
    let mut nu = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            nu[(i, j)] = r[(n - 1 - j, n - 1 - i)] / a_diag[j];
        }
    }
    let k = DMatrix::from_fn(n, n, |i, j| q[(n - 1 - j, n - 1 - i)]);
    let raw = IwasawaFactors {
        n: UnitUpper { m: nu },
        a: PositiveDiagonal { d: a_diag.clone() },
        k: Orthogonal { m: k },
    };
    let resid = raw.reconstruct() - g.entries();
    // gauge the backward error against the factor scale: the product
    // n a can dwarf g when the factorization cancels
    let scale = linalg::frob(&(raw.n.entries() * raw.a.matrix())).max(linalg::frob(g.entries()));
    let rel = linalg::frob(&resid) / scale.max(1.0);
    if rel > pol.reconstruction_tol * 1e2 {
        return Err(Error::NumericalFailure(format!(
            "iwasawa reconstruction error {}",
            rel
        )));
    }
    // Fold any residual determinant drift of the input into the
    // diagonal factor so the returned factors satisfy the invariants.
    let logdet: f64 = a_diag.iter().map(|x| x.ln()).sum();
    let shift = (-logdet / n as f64).exp();
    Ok(IwasawaFactors {
        a: PositiveDiagonal {
            d: DVector::from_fn(n, |i, _| shift * a_diag[i]),
        },
        ..raw
    })
}

/// Logarithm of a unit upper-triangular matrix: a finite series of at
/// most `n-1` terms in the nilpotent part, exact up to roundoff.
pub fn nilpotent_log(u: &UnitUpper) -> DMatrix<f64> {
    let n = u.n();
    let nil = u.entries() - DMatrix::<f64>::identity(n, n);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    let mut power = DMatrix::<f64>::identity(n, n);
    for k in 1..n {
        power = &power * &nil;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        acc += &power * (sign / k as f64);
    }
    acc
}

/// The gauge `d_N(u) = ||log u||` on the unipotent group, with the
/// Frobenius norm (an `Ad(K)`-invariant choice).
pub fn d_n(u: &UnitUpper) -> f64 {
    linalg::frob(&nilpotent_log(u))
}

/// Conjugation `exp(-tV) u exp(tV)`, computed in closed form: the entry
/// at `(i,j)` is scaled by `exp(-t (v_i - v_j))`; no matrix products.
pub fn conjugate_by_exp(v: &CartanVector, t: f64, u: &UnitUpper) -> UnitUpper {
    let n = u.n();
    let m = DMatrix::from_fn(n, n, |i, j| {
        u.entries()[(i, j)] * (-t * (v.coords()[i] - v.coords()[j])).exp()
    });
    UnitUpper { m }
}

/// Minimum of the positive roots on a regular vector of the standard
/// chamber: `min_{i<j} (v_i - v_j)`.
pub fn kappa(v: &CartanVector) -> Result<f64> {
    let pol = NumericPolicy::DEFAULT;
    if !v.is_regular_descending(pol.regular_gap_tol) {
        return Err(Error::NotRegular(format!(
            "entries {:?} are not strictly decreasing",
            v.coords().as_slice()
        )));
    }
    let mut min = f64::INFINITY;
    for r in positive_roots(v.n()) {
        min = min.min(r.eval(v));
    }
    Ok(min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn iwasawa_identity() {
        let g = SpecialLinear::identity(3);
        let f = iwasawa_nak(&g).unwrap();
        assert!(linalg::frob(&(f.n.entries() - DMatrix::<f64>::identity(3, 3))) < 1e-12);
        assert!((f.a.diag() - DVector::from_element(3, 1.0)).norm() < 1e-12);
        assert!(linalg::frob(&(f.k.entries() - DMatrix::<f64>::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn iwasawa_already_diagonal() {
        let g = SpecialLinear::new(DMatrix::from_diagonal(&DVector::from_row_slice(&[
            2.0, 1.0, 0.5,
        ])))
        .unwrap();
        let f = iwasawa_nak(&g).unwrap();
        assert!(linalg::frob(&(f.n.entries() - DMatrix::<f64>::identity(3, 3))) < 1e-12);
        assert!((f.a.diag() - DVector::from_row_slice(&[2.0, 1.0, 0.5])).norm() < 1e-12);
        assert!(linalg::frob(&(f.k.entries() - DMatrix::<f64>::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn iwasawa_roundtrip_random_sl3() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let g = sampling::random_special_linear(&mut rng, 3);
            let f = iwasawa_nak(&g).unwrap();
            let resid = f.reconstruct() - g.entries();
            let rel = linalg::frob(&resid) / linalg::frob(g.entries());
            assert!(rel <= 1e-10, "reconstruction error {}", rel);
        }
    }

    #[test]
    fn nilpotent_log_identity_is_zero() {
        let u = UnitUpper::identity(4);
        assert_eq!(linalg::frob(&nilpotent_log(&u)), 0.0);
    }

    #[test]
    fn nilpotent_log_sl2_single_entry() {
        let x = -1.75;
        let mut m = DMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = x;
        let u = UnitUpper::new(m).unwrap();
        let l = nilpotent_log(&u);
        assert!((l[(0, 1)] - x).abs() < 1e-15);
        assert!(l[(0, 0)].abs() + l[(1, 0)].abs() + l[(1, 1)].abs() < 1e-15);
    }

    #[test]
    fn nilpotent_log_sl3_two_term_series() {
        // independent oracle: log(I+N) = N - N^2/2 for 3x3 nilpotent N
        let (x, y) = (0.6, -1.1);
        let mut m = DMatrix::<f64>::identity(3, 3);
        m[(0, 1)] = x;
        m[(1, 2)] = y;
        let u = UnitUpper::new(m.clone()).unwrap();
        let nil = &m - DMatrix::<f64>::identity(3, 3);
        let oracle = &nil - (&nil * &nil) * 0.5;
        let l = nilpotent_log(&u);
        assert!(linalg::frob(&(l.clone() - oracle)) < 1e-14);
        // matches x E12 + y E23 - (xy/2) E13
        assert!((l[(0, 2)] + x * y / 2.0).abs() < 1e-14);
    }

    #[test]
    fn exp_log_roundtrip_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let u = sampling::random_unipotent(&mut rng, 4, 2.0);
            let back = UnitUpper::from_log(&nilpotent_log(&u));
            assert!(linalg::frob(&(back.entries() - u.entries())) < 1e-12);
        }
    }

    #[test]
    fn d_n_basics() {
        assert_eq!(d_n(&UnitUpper::identity(3)), 0.0);
        let x = 0.37;
        let mut m = DMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = x;
        assert!((d_n(&UnitUpper::new(m).unwrap()) - x.abs()).abs() < 1e-15);
    }

    #[test]
    fn d_n_invariant_under_sign_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let signs = [1.0, -1.0, -1.0];
        for _ in 0..100 {
            let u = sampling::random_unipotent(&mut rng, 3, 1.5);
            let conj = DMatrix::from_fn(3, 3, |i, j| u.entries()[(i, j)] * signs[i] * signs[j]);
            let cu = UnitUpper::new(conj).unwrap();
            assert!((d_n(&u) - d_n(&cu)).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugation_closed_form_matches_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let v = CartanVector::from_slice(&[1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()]).unwrap();
        for _ in 0..50 {
            let u = sampling::random_unipotent(&mut rng, 2, 1.0);
            let t = 3.7;
            let c = conjugate_by_exp(&v, t, &u);
            // direct 2x2 multiplication oracle
            let e_neg = DMatrix::from_diagonal(&v.coords().map(|x| (-t * x).exp()));
            let e_pos = DMatrix::from_diagonal(&v.coords().map(|x| (t * x).exp()));
            let prod = e_neg * u.entries() * e_pos;
            assert!(linalg::frob(&(c.entries() - prod)) < 1e-10);
            // single root: entry scales by exp(-t sqrt(2))
            let expected = u.entries()[(0, 1)] * (-t * 2f64.sqrt()).exp();
            assert!((c.entries()[(0, 1)] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugation_at_zero_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let v = sampling::random_regular_descending_unit(&mut rng, 3);
        let u = sampling::random_unipotent(&mut rng, 3, 1.0);
        let c = conjugate_by_exp(&v, 0.0, &u);
        assert!(linalg::frob(&(c.entries() - u.entries())) < 1e-15);
    }

    #[test]
    fn kappa_enumerates_roots() {
        let s = 2f64.sqrt();
        let v = CartanVector::from_slice(&[1.0 / s, 0.0, -1.0 / s]).unwrap();
        assert!((kappa(&v).unwrap() - 1.0 / s).abs() < 1e-15);
        let v2 = CartanVector::from_slice(&[1.0 / s, -1.0 / s]).unwrap();
        assert!((kappa(&v2).unwrap() - s).abs() < 1e-15);
    }

    #[test]
    fn kappa_rejects_degenerate() {
        let v = CartanVector::from_slice(&[0.5, 0.5, -1.0]).unwrap();
        assert!(matches!(kappa(&v), Err(Error::NotRegular(_))));
    }

    #[test]
    fn barycenter_sl3_is_central_direction() {
        let b = CartanVector::standard_barycenter(3);
        let s = 2f64.sqrt();
        let expected = DVector::from_row_slice(&[1.0 / s, 0.0, -1.0 / s]);
        assert!((b.coords() - expected).norm() < 1e-12);
    }
}
