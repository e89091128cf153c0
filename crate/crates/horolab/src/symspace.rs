//! The symmetric space `X = SL(n,R)/SO(n)` modeled as positive-definite
//! determinant-one matrices.
//!
//! A coset `[g]` is stored as the matrix `g g^T`; points optionally
//! carry the group representative, which the shadow calculus needs for
//! its `N`/`A` coordinates. The metric is normalized so that geodesics
//! `t -> [g exp(tV)]` have unit speed when `||V||_F = 1`; concretely
//! `d(p, q) = (1/2) * sqrt(sum_i log^2 lambda_i(p^{-1} q))`.
//!
//! The Busemann function centered at the configured direction `tau` is
//! evaluated in horospherical coordinates: factor a representative as
//! `n a k` and return `<log a, tau>`. The limit definition
//! `lim_t (t - d(x, gamma_tau(t)))` is retained as a test oracle.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::liecore::{iwasawa_nak, CartanVector, PositiveDiagonal, SpecialLinear, UnitUpper};
use crate::linalg;
use crate::policy::NumericPolicy;

/// A point of `X`: symmetric positive definite, determinant one, with
/// an optional group representative `g` satisfying `g g^T = p`.
#[derive(Debug, Clone)]
pub struct Point {
    p: DMatrix<f64>,
    rep: Option<SpecialLinear>,
}

impl Point {
    /// The coset `[g]`, keeping `g` as representative.
    pub fn from_group(g: SpecialLinear) -> Point {
        let mut p = g.entries() * g.entries().transpose();
        let n = p.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (p[(i, j)] + p[(j, i)]);
                p[(i, j)] = v;
                p[(j, i)] = v;
            }
        }
        Point { p, rep: Some(g) }
    }

    /// A bare positive-definite determinant-one matrix.
    pub fn from_spd(p: DMatrix<f64>) -> Result<Point> {
        let pol = NumericPolicy::DEFAULT;
        let n = p.nrows();
        if linalg::max_abs(&(p.clone() - p.transpose())) > 1e-10 * (1.0 + linalg::max_abs(&p)) {
            return Err(Error::InvalidConfig("point matrix is not symmetric".into()));
        }
        let (vals, _) = linalg::jacobi_eigen(&p)?;
        if vals[n - 1] <= 0.0 {
            return Err(Error::InvalidConfig(
                "point matrix is not positive definite".into(),
            ));
        }
        let logdet: f64 = (0..n).map(|i| vals[i].ln()).sum();
        if logdet.abs() > pol.construction_tol * 10.0 {
            return Err(Error::InvalidConfig(format!(
                "point matrix has log-determinant {}",
                logdet
            )));
        }
        Ok(Point { p, rep: None })
    }

    pub fn identity(n: usize) -> Point {
        Point::from_group(SpecialLinear::identity(n))
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn rep(&self) -> Option<&SpecialLinear> {
        self.rep.as_ref()
    }

    /// The stored representative, or the symmetric square root of the
    /// point matrix (always a valid representative; renormalized, since
    /// the root of an ill-conditioned matrix can drift in determinant).
    pub fn rep_or_sqrt(&self) -> Result<SpecialLinear> {
        if let Some(r) = &self.rep {
            return Ok(r.clone());
        }
        let s = linalg::spd_sqrt(&self.p)?;
        SpecialLinear::normalize(s)
    }

    /// Horospherical `(n, a)` coordinates of the point: the unipotent
    /// and diagonal factors of any representative (the `K` part is
    /// irrelevant to the coset).
    pub fn na_coordinates(&self) -> Result<(UnitUpper, PositiveDiagonal)> {
        let rep = self.rep_or_sqrt()?;
        let f = iwasawa_nak(&rep)?;
        Ok((f.n, f.a))
    }

    /// Left translation by the inverse, `[r] -> [g^{-1} r]`, computed
    /// through an equilibrated solve so no digits are lost when `g` is
    /// strongly graded.
    pub fn translate_by_inverse_of(&self, g: &SpecialLinear) -> Result<Point> {
        let rep = self.rep_or_sqrt()?;
        let w = linalg::rel_solve(g.entries(), rep.entries())?;
        Ok(Point::from_group(SpecialLinear::normalize(w)?))
    }

    /// Left translation `g . x`, mapping `[r]` to `[g r]`.
    pub fn translate(&self, g: &SpecialLinear) -> Point {
        let p = g.entries() * &self.p * g.entries().transpose();
        let rep = self.rep.as_ref().map(|r| g.mul(r));
        let mut p = p;
        let n = p.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (p[(i, j)] + p[(j, i)]);
                p[(i, j)] = v;
                p[(j, i)] = v;
            }
        }
        Point { p, rep }
    }
}

/// Distance between points, `(1/2) sqrt(sum log^2 lambda_i(p^{-1} q))`.
///
/// The factor normalizes the metric so coset geodesics `[g exp(tV)]`
/// are unit speed for unit Frobenius `V`. Evaluated through the
/// singular values of `rep_p^{-1} rep_q` (equilibrated solve plus
/// one-sided Jacobi), which keeps relative accuracy even for strongly
/// graded inputs — comparisons against rays at large times are safe;
/// the eigenvalues `lambda_i` are the squared singular values.
pub fn distance(p: &Point, q: &Point) -> Result<f64> {
    let a = p.rep_or_sqrt()?;
    let b = q.rep_or_sqrt()?;
    let w = linalg::rel_solve(a.entries(), b.entries())?;
    let sv = linalg::singular_values_graded(&w)?;
    Ok(sv.iter().map(|s| s.ln().powi(2)).sum::<f64>().sqrt())
}

/// Geodesic `t -> [g exp(tV)]` through a point with representative `g`.
/// Unit speed when `||V|| = 1`.
pub fn geodesic(x: &Point, v: &CartanVector, t: f64) -> Result<Point> {
    let rep = x.rep().ok_or(Error::MissingRepresentative)?.clone();
    let a = PositiveDiagonal::from_log(&v.scale(t));
    Ok(Point::from_group(rep.mul(&a.as_group())))
}

/// The geodesic between two arbitrary points at fraction `s` in
/// `[0, 1]`: `p^{1/2} (p^{-1/2} q p^{-1/2})^s p^{1/2}`, carried by the
/// group representative `p^{1/2} m^{s/2}` so the point stays internally
/// consistent at any conditioning.
pub fn spd_geodesic(p: &Point, q: &Point, s: f64) -> Result<Point> {
    let ps = linalg::spd_sqrt(p.matrix())?;
    let psi = ps
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("sqrt inverse failed".into()))?;
    let mut mid = &psi * q.matrix() * &psi;
    let n = mid.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (mid[(i, j)] + mid[(j, i)]);
            mid[(i, j)] = v;
            mid[(j, i)] = v;
        }
    }
    let half_pow = linalg::spd_pow(&mid, 0.5 * s)?;
    let rep = SpecialLinear::normalize(&ps * half_pow)
        .map_err(|e| Error::NumericalFailure(e.to_string()))?;
    Ok(Point::from_group(rep))
}

/// Configuration of the Busemann function: the center is the boundary
/// point of the central ray `[exp(t tau)]` for a unit regular `tau` in
/// the standard chamber, normalized so `h([e]) = 0`.
///
/// Requiring `tau` interior to the chamber keeps the center away from
/// any proper join factor; irreducibility of the space makes interior
/// directions generic.
#[derive(Debug, Clone)]
pub struct BusemannConfig {
    tau: CartanVector,
}

impl BusemannConfig {
    pub fn new(tau: CartanVector) -> Result<Self> {
        let pol = NumericPolicy::DEFAULT;
        let tau = tau.normalized();
        if !tau.is_regular_descending(pol.regular_gap_tol) {
            return Err(Error::NotRegular(
                "busemann direction must be regular and descending".into(),
            ));
        }
        Ok(BusemannConfig { tau })
    }

    /// The chamber barycenter direction for `SL(n)`.
    pub fn barycentric(n: usize) -> BusemannConfig {
        BusemannConfig {
            tau: CartanVector::standard_barycenter(n),
        }
    }

    pub fn tau(&self) -> &CartanVector {
        &self.tau
    }

    pub fn n(&self) -> usize {
        self.tau.n()
    }
}

/// Busemann function at the configured center, oriented to increase
/// toward it: `h([n a k]) = <log a, tau>`. Exact and `O(n^3)`.
pub fn busemann(x: &Point, cfg: &BusemannConfig) -> Result<f64> {
    let (_, a) = x.na_coordinates()?;
    Ok(a.log().dot(cfg.tau()))
}

/// Test oracle: the limit definition `t - d(x, [exp(t tau)])` at a
/// finite truncation time.
pub fn busemann_limit_estimate(x: &Point, cfg: &BusemannConfig, t: f64) -> Result<f64> {
    let n = cfg.n();
    let gamma = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
        (2.0 * t * cfg.tau().coords()[i]).exp()
    }));
    let q = Point { p: gamma, rep: None };
    Ok(t - distance(x, &q)?)
}

/// A point of the boundary at infinity: the class of the ray
/// `t -> [frame exp(t dir)]` with `dir` a unit Cartan vector.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    frame: SpecialLinear,
    dir: CartanVector,
}

impl BoundaryPoint {
    pub fn new(frame: SpecialLinear, dir: CartanVector) -> BoundaryPoint {
        BoundaryPoint {
            frame,
            dir: dir.normalized(),
        }
    }

    /// Boundary point of a central direction (identity frame).
    pub fn central(dir: CartanVector) -> BoundaryPoint {
        let n = dir.n();
        BoundaryPoint::new(SpecialLinear::identity(n), dir)
    }

    pub fn frame(&self) -> &SpecialLinear {
        &self.frame
    }

    pub fn dir(&self) -> &CartanVector {
        &self.dir
    }

    pub fn n(&self) -> usize {
        self.dir.n()
    }

    pub fn translate(&self, g: &SpecialLinear) -> BoundaryPoint {
        BoundaryPoint {
            frame: g.mul(&self.frame),
            dir: self.dir.clone(),
        }
    }

    /// Translate by the inverse through an equilibrated solve.
    pub fn translate_by_inverse_of(&self, g: &SpecialLinear) -> Result<BoundaryPoint> {
        let w = linalg::rel_solve(g.entries(), self.frame.entries())?;
        Ok(BoundaryPoint {
            frame: SpecialLinear::normalize(w)?,
            dir: self.dir.clone(),
        })
    }

    /// The point `[frame exp(t dir)]` along the defining ray.
    pub fn ray_point(&self, t: f64) -> Point {
        let a = PositiveDiagonal::from_log(&self.dir.scale(t));
        Point::from_group(self.frame.mul(&a.as_group()))
    }
}

/// Unit-speed geodesic ray `t -> [base exp(t dir)]`.
#[derive(Debug, Clone)]
pub struct Ray {
    base: SpecialLinear,
    dir: CartanVector,
}

impl Ray {
    pub fn at(&self, t: f64) -> Point {
        let a = PositiveDiagonal::from_log(&self.dir.scale(t));
        Point::from_group(self.base.mul(&a.as_group()))
    }

    pub fn dir(&self) -> &CartanVector {
        &self.dir
    }

    pub fn base(&self) -> &SpecialLinear {
        &self.base
    }
}

/// Order-reversing-free permutation machinery: all permutations of
/// `0..n` in a deterministic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permute(&mut cur, n, &mut out);
    out.sort();
    out
}

fn heap_permute(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permute(cur, k - 1, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// Special-orthogonal permutation matrix sending coordinate `perm[i]`
/// to slot `i`; one row is negated when the permutation is odd so the
/// determinant is `+1` (sign flips commute with diagonal conjugation).
pub fn permutation_rotation(perm: &[usize]) -> DMatrix<f64> {
    let n = perm.len();
    let mut p = DMatrix::<f64>::zeros(n, n);
    for (i, &pi) in perm.iter().enumerate() {
        p[(i, pi)] = 1.0;
    }
    if p.determinant() < 0.0 {
        for j in 0..n {
            p[(0, j)] = -p[(0, j)];
        }
    }
    p
}

/// The unit-speed ray from `u` asymptotic to `sigma`, for regular
/// `sigma`.
///
/// Construction: conjugate `u` into the frame of `sigma`, rotate the
/// direction to descending order, Iwasawa-factor there, and ride the
/// central ray back; the result satisfies `r(0) = u` exactly and stays
/// within bounded distance of the defining ray of `sigma`.
pub fn ray_to_boundary(u: &Point, sigma: &BoundaryPoint) -> Result<Ray> {
    let pol = NumericPolicy::DEFAULT;
    let n = sigma.n();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        sigma.dir().coords()[b]
            .partial_cmp(&sigma.dir().coords()[a])
            .unwrap()
    });
    let sorted = DVector::from_fn(n, |i, _| sigma.dir().coords()[idx[i]]);
    let vprime = CartanVector::new(sorted).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    if !vprime.is_regular_descending(pol.regular_gap_tol) {
        return Err(Error::NotRegularDirection(format!(
            "direction {:?} has repeated entries",
            sigma.dir().coords().as_slice()
        )));
    }
    let rot = permutation_rotation(&idx);
    let rot_g =
        SpecialLinear::new(rot.clone()).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    let urep = u.rep_or_sqrt()?;
    // frame^{-1} urep through an equilibrated solve: exact relative
    // accuracy even for strongly graded frames
    let solved = linalg::rel_solve(sigma.frame().entries(), urep.entries())?;
    let w = rot_g.mul(&SpecialLinear::normalize(solved)?);
    let f = iwasawa_nak(&w)?;
    let base = sigma
        .frame()
        .mul(&SpecialLinear::new(rot.transpose()).map_err(|e| Error::NumericalFailure(e.to_string()))?)
        .mul(&f.na());
    Ok(Ray { base, dir: vprime })
}

/// Are the rays of two boundary points within bounded distance?
/// (Sampled test: distance non-increasing along the rays and below the
/// divergence threshold at the probe horizon.)
pub fn rays_asymptotic(s1: &BoundaryPoint, s2: &BoundaryPoint) -> Result<bool> {
    let mut prev = f64::INFINITY;
    for k in 0..=4 {
        let t = 25.0 * k as f64;
        let d = distance(&s1.ray_point(t), &s2.ray_point(t))?;
        if d > prev + 1e-6 * (1.0 + prev) {
            return Ok(false);
        }
        prev = d;
    }
    Ok(prev < 10.0)
}

/// A maximal flat `{[U a] : a in A}` described by its adapted frame.
#[derive(Debug, Clone)]
pub struct Flat {
    frame: SpecialLinear,
}

impl Flat {
    pub fn new(frame: SpecialLinear) -> Flat {
        Flat { frame }
    }

    /// Normalize an arbitrary invertible frame (determinant one, columns
    /// sign-fixed deterministically).
    pub fn from_basis(mut basis: DMatrix<f64>) -> Result<Flat> {
        let n = basis.nrows();
        for j in 0..n {
            let col = basis.column(j);
            let lead = col.iter().find(|x| x.abs() > 1e-12).copied().unwrap_or(1.0);
            if lead < 0.0 {
                for i in 0..n {
                    basis[(i, j)] = -basis[(i, j)];
                }
            }
        }
        if basis.determinant() < 0.0 {
            let j = n - 1;
            for i in 0..n {
                basis[(i, j)] = -basis[(i, j)];
            }
        }
        Ok(Flat {
            frame: SpecialLinear::normalize(basis)?,
        })
    }

    pub fn standard(n: usize) -> Flat {
        Flat {
            frame: SpecialLinear::identity(n),
        }
    }

    pub fn frame(&self) -> &SpecialLinear {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.frame.n()
    }

    /// The point `[U exp(w)]` of the flat.
    pub fn point_at(&self, w: &CartanVector) -> Point {
        let a = PositiveDiagonal::from_log(w);
        Point::from_group(self.frame.mul(&a.as_group()))
    }

    /// The boundary point of the flat in direction `w` (in the flat's
    /// own coordinates).
    pub fn boundary_point(&self, w: &CartanVector) -> BoundaryPoint {
        BoundaryPoint::new(self.frame.clone(), w.normalized())
    }

    pub fn translate(&self, g: &SpecialLinear) -> Result<Flat> {
        Flat::from_basis(g.entries() * self.frame.entries())
    }
}

/// Express a boundary point in the coordinates of a flat: the
/// arrangement of its direction entries whose weight filtration in the
/// flat's frame matches the point's own.
///
/// Two rays `[f exp(tW)]` and `[U exp(tW')]` with the same weight
/// multiset stay within bounded distance exactly when, for every
/// weight threshold, the span of the frame columns at or above the
/// threshold agrees; this is plain subspace comparison, immune to the
/// exponential error amplification a metric probe along the rays would
/// suffer.
pub fn direction_in_flat(e: &Flat, sigma: &BoundaryPoint) -> Result<CartanVector> {
    let n = sigma.n();
    let wf = sigma.dir().coords();
    let mut seen: Vec<Vec<u64>> = Vec::new();
    for perm in permutations(n) {
        let w = DVector::from_fn(n, |i, _| wf[perm[i]]);
        let key: Vec<u64> = w.iter().map(|x| x.to_bits()).collect();
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        if weight_filtrations_match(sigma.frame(), wf, e.frame(), &w) {
            let cand =
                CartanVector::new(w).map_err(|e| Error::NumericalFailure(e.to_string()))?;
            return Ok(cand);
        }
    }
    Err(Error::NotInFlat(
        "no arrangement of the direction matches the flat's filtration".into(),
    ))
}

/// Do the weight filtrations (spans of frame columns with weight at or
/// above each threshold) of two weighted frames coincide?
fn weight_filtrations_match(
    f: &SpecialLinear,
    wf: &DVector<f64>,
    u: &SpecialLinear,
    wu: &DVector<f64>,
) -> bool {
    let n = wf.len();
    let tol = 1e-9;
    let mut thresholds: Vec<f64> = wf.iter().copied().collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup_by(|a, b| (*a - *b).abs() <= tol);
    for (ti, lam) in thresholds.iter().enumerate() {
        if ti + 1 == thresholds.len() {
            break; // the last group spans everything
        }
        let fa: Vec<usize> = (0..n).filter(|&j| wf[j] >= lam - tol).collect();
        let ua: Vec<usize> = (0..n).filter(|&j| wu[j] >= lam - tol).collect();
        if fa.len() != ua.len() {
            return false;
        }
        let a = DMatrix::from_fn(n, fa.len(), |i, j| f.entries()[(i, fa[j])]);
        let b = DMatrix::from_fn(n, ua.len(), |i, j| u.entries()[(i, ua[j])]);
        if !linalg::same_span(&a, &b, 1e-7) {
            return false;
        }
    }
    true
}

/// Angular (Tits) distance between two boundary points of a common
/// flat: the spherical angle of their direction vectors in the flat's
/// coordinates.
pub fn tits_angle_in_flat(
    e: &Flat,
    s1: &BoundaryPoint,
    s2: &BoundaryPoint,
) -> Result<f64> {
    let w1 = direction_in_flat(e, s1)?;
    let w2 = direction_in_flat(e, s2)?;
    Ok(linalg::unit_angle(w1.coords(), w2.coords()))
}
