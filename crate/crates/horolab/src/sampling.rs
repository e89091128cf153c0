//! Seeded random generators for the sampling suites.
//!
//! Every sampler takes an explicit `ChaCha8Rng` so every experiment is
//! deterministic given its seed; callers that parallelize must partition
//! the seed space (derive one generator per worker with
//! [`derive_rng`]), never share one generator.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::liecore::{CartanVector, SpecialLinear, UnitUpper};

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream for check `idx` of a suite.
pub fn derive_rng(seed: u64, idx: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ idx.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Standard normal via Box-Muller.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Random element of `SL(n,R)` with Gaussian entries, rescaled to
/// determinant one; resamples when the determinant is too small to
/// normalize reliably.
pub fn random_special_linear(rng: &mut ChaCha8Rng, n: usize) -> SpecialLinear {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| normal(rng));
        if m.determinant().abs() < 0.05 {
            continue;
        }
        if let Ok(g) = SpecialLinear::normalize(m) {
            return g;
        }
    }
}

/// Random rotation in `SO(n)` (orthogonal factor of a Gaussian matrix).
pub fn random_rotation(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| normal(rng));
        if m.determinant().abs() < 0.05 {
            continue;
        }
        let (mut q, _) = crate::linalg::qr_pos(&m);
        if q.determinant() < 0.0 {
            for i in 0..n {
                q[(i, 0)] = -q[(i, 0)];
            }
        }
        return q;
    }
}

/// Strictly upper-triangular matrix with entries uniform in `[-1, 1]`,
/// rescaled to Frobenius norm `target`.
pub fn random_nilpotent(rng: &mut ChaCha8Rng, n: usize, target: f64) -> DMatrix<f64> {
    loop {
        let mut l = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                l[(i, j)] = uniform(rng, -1.0, 1.0);
            }
        }
        let nrm = crate::linalg::frob(&l);
        if nrm < 1e-6 {
            continue;
        }
        return l * (target / nrm);
    }
}

/// Unipotent with `d_N` exactly `target`.
pub fn random_unipotent(rng: &mut ChaCha8Rng, n: usize, target: f64) -> UnitUpper {
    UnitUpper::from_log(&random_nilpotent(rng, n, target))
}

/// Unipotent with `d_N` uniform in `(0, radius)`.
pub fn random_unipotent_in_ball(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> UnitUpper {
    let t = radius * rng.random::<f64>();
    random_unipotent(rng, n, t)
}

/// Random unit traceless symmetric matrix (a tangent direction at the
/// base point).
pub fn random_unit_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let mut s = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = normal(rng);
                s[(i, j)] = x;
                s[(j, i)] = x;
            }
        }
        let tr = s.trace() / n as f64;
        for i in 0..n {
            s[(i, i)] -= tr;
        }
        let nrm = crate::linalg::frob(&s);
        if nrm < 1e-6 {
            continue;
        }
        return s / nrm;
    }
}

/// Random unit Cartan vector (traceless diagonal direction).
pub fn random_cartan_unit(rng: &mut ChaCha8Rng, n: usize) -> CartanVector {
    loop {
        let v = DVector::from_fn(n, |_, _| normal(rng));
        let c = CartanVector::project(v);
        if c.norm() < 1e-6 {
            continue;
        }
        return c.normalized();
    }
}

/// Random unit Cartan vector interior to the standard chamber, with a
/// guaranteed gap between adjacent entries.
pub fn random_regular_descending_unit(rng: &mut ChaCha8Rng, n: usize) -> CartanVector {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let c = CartanVector::project(DVector::from_vec(v)).normalized();
        if c.is_regular_descending(0.05) {
            return c;
        }
    }
}
