//! Exploded simplices: a cellular subdivision of the `d`-simplex whose
//! cells are products of a face with a face of the barycentric
//! subdivision.
//!
//! A top cell is a pair `(face, flag)` with `face` a face of the flag's
//! smallest member and `dim face + flag length = d`. A parameter point
//! `(lambda, mu)` of the product embeds at
//! `(sum lambda_i e_i + sum mu_l b_l) / 2`, which places a half-scale
//! copy of the simplex at the center, subdivides each boundary face
//! into the exploded simplex of that face, and fills the collar with
//! products. The two projections are affine on each cell: `p1` keeps
//! the face coordinate (expanding the central copy over the whole
//! simplex), `p2` keeps the barycentric-subdivision coordinate
//! (collapsing the central copy to the barycenter).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A top-dimensional cell `face x <flag_0 c ... c flag_j>`.
#[derive(Debug, Clone)]
pub struct ExplodedCell {
    /// Ascending vertex indices of the face.
    pub face: Vec<usize>,
    /// Strictly increasing chain of faces, each containing `face`.
    pub flag: Vec<Vec<usize>>,
}

/// The exploded subdivision of the standard `d`-simplex.
#[derive(Debug, Clone)]
pub struct ExplodedComplex {
    pub dim: usize,
    pub cells: Vec<ExplodedCell>,
}

/// A located parameter point: which cell, and the product coordinates.
#[derive(Debug, Clone)]
pub struct LocatedPoint {
    pub cell: usize,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

fn subsets(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << (d + 1)) {
        let mut s = Vec::new();
        for v in 0..=d {
            if mask & (1 << v) != 0 {
                s.push(v);
            }
        }
        out.push(s);
    }
    out.sort();
    out
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// Build the exploded subdivision for `d` in `{0, 1, 2}`.
pub fn build_exploded(d: usize) -> Result<ExplodedComplex> {
    if d > 2 {
        return Err(Error::InvalidConfig(format!(
            "exploded simplices are built for dimensions 0..=2, got {}",
            d
        )));
    }
    let subs = subsets(d);
    let mut cells = Vec::new();
    // enumerate flags by depth-first extension
    fn extend(
        subs: &[Vec<usize>],
        chain: &mut Vec<Vec<usize>>,
        d: usize,
        cells: &mut Vec<ExplodedCell>,
    ) {
        let last = chain.last().unwrap().clone();
        // close the chain: faces of chain[0] with the right dimension
        let j = chain.len() - 1;
        for face in subs {
            if is_subset(face, &chain[0]) && face.len() - 1 + j == d {
                cells.push(ExplodedCell {
                    face: face.clone(),
                    flag: chain.clone(),
                });
            }
        }
        for next in subs {
            if next.len() > last.len() && is_subset(&last, next) {
                chain.push(next.clone());
                extend(subs, chain, d, cells);
                chain.pop();
            }
        }
    }
    for start in &subs {
        let mut chain = vec![start.clone()];
        extend(&subs, &mut chain, d, &mut cells);
    }
    cells.sort_by(|a, b| (a.face.clone(), a.flag.clone()).cmp(&(b.face.clone(), b.flag.clone())));
    cells.dedup_by(|a, b| a.face == b.face && a.flag == b.flag);
    Ok(ExplodedComplex { dim: d, cells })
}

fn barycenter_coords(face: &[usize], d: usize) -> DVector<f64> {
    let mut v = DVector::<f64>::zeros(d + 1);
    for &i in face {
        v[i] = 1.0 / face.len() as f64;
    }
    v
}

impl ExplodedComplex {
    /// Embed a parameter point of a cell into the simplex.
    pub fn embed(&self, cell: usize, lambda: &[f64], mu: &[f64]) -> Vec<f64> {
        let c = &self.cells[cell];
        let d = self.dim;
        let mut q = vec![0.0; d + 1];
        for (l, &v) in c.face.iter().enumerate() {
            q[v] += 0.5 * lambda[l];
        }
        for (l, f) in c.flag.iter().enumerate() {
            let b = barycenter_coords(f, d);
            for k in 0..=d {
                q[k] += 0.5 * mu[l] * b[k];
            }
        }
        q
    }

    /// Locate a barycentric point of the simplex: find the cell whose
    /// product coordinates reproduce it. Points on cell boundaries may
    /// match several cells; the first (deterministic) match is
    /// returned, and the projections agree on overlaps.
    pub fn locate(&self, q: &[f64]) -> Result<LocatedPoint> {
        let d = self.dim;
        if q.len() != d + 1 {
            return Err(Error::InvalidConfig("wrong barycentric length".into()));
        }
        let mut best: Option<(f64, LocatedPoint)> = None;
        for (ci, c) in self.cells.iter().enumerate() {
            let nl = c.face.len();
            let nm = c.flag.len();
            // columns: e_{face_i} then b_{flag_l}; rows: d+1 coords plus
            // the two affine constraints
            let rows = d + 3;
            let cols = nl + nm;
            let mut a = DMatrix::<f64>::zeros(rows, cols);
            let mut rhs = DVector::<f64>::zeros(rows);
            for k in 0..=d {
                rhs[k] = 2.0 * q[k];
            }
            for (j, &v) in c.face.iter().enumerate() {
                a[(v, j)] = 1.0;
                a[(d + 1, j)] = 1.0;
            }
            for (l, f) in c.flag.iter().enumerate() {
                let b = barycenter_coords(f, d);
                for k in 0..=d {
                    a[(k, nl + l)] = b[k];
                }
                a[(d + 2, nl + l)] = 1.0;
            }
            rhs[d + 1] = 1.0;
            rhs[d + 2] = 1.0;
            let svd = a.clone().svd(true, true);
            let sol = match svd.solve(&rhs, 1e-12) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let resid = (&a * &sol - &rhs).norm();
            let min_coord = sol.iter().fold(f64::INFINITY, |m, &x| m.min(x));
            if resid < 1e-9 && min_coord > -1e-9 {
                let mut lambda: Vec<f64> = (0..nl).map(|j| sol[j].max(0.0)).collect();
                let mut mu: Vec<f64> = (0..nm).map(|l| sol[nl + l].max(0.0)).collect();
                let sl: f64 = lambda.iter().sum();
                let sm: f64 = mu.iter().sum();
                for v in lambda.iter_mut() {
                    *v /= sl;
                }
                for v in mu.iter_mut() {
                    *v /= sm;
                }
                let loc = LocatedPoint {
                    cell: ci,
                    lambda,
                    mu,
                };
                // prefer the smallest residual; ties resolved by order
                match &best {
                    Some((r, _)) if *r <= resid => {}
                    _ => best = Some((resid, loc)),
                }
            }
        }
        best.map(|(_, l)| l).ok_or_else(|| {
            Error::NumericalFailure(format!("no exploded cell contains {:?}", q))
        })
    }

    /// Projection to the simplex: keeps the face coordinate.
    pub fn p1(&self, loc: &LocatedPoint) -> Vec<f64> {
        let c = &self.cells[loc.cell];
        let mut out = vec![0.0; self.dim + 1];
        for (j, &v) in c.face.iter().enumerate() {
            out[v] += loc.lambda[j];
        }
        out
    }

    /// Projection to the barycentric subdivision: the flag of faces and
    /// the weights on their barycenters.
    pub fn p2<'a>(&'a self, loc: &'a LocatedPoint) -> (&'a [Vec<usize>], &'a [f64]) {
        (&self.cells[loc.cell].flag, &loc.mu)
    }

    /// `p2` expressed back in simplex coordinates (the barycentric
    /// subdivision sits inside the simplex).
    pub fn p2_as_barycentric(&self, loc: &LocatedPoint) -> Vec<f64> {
        let c = &self.cells[loc.cell];
        let d = self.dim;
        let mut out = vec![0.0; d + 1];
        for (l, f) in c.flag.iter().enumerate() {
            let b = barycenter_coords(f, d);
            for k in 0..=d {
                out[k] += loc.mu[l] * b[k];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_barycentric(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..=d).map(|_| -(rng.random::<f64>().max(1e-12)).ln()).collect();
        let s: f64 = v.iter().sum();
        for x in v.iter_mut() {
            *x /= s;
        }
        v
    }

    #[test]
    fn cell_counts_match_known_decompositions() {
        assert_eq!(build_exploded(0).unwrap().cells.len(), 1);
        assert_eq!(build_exploded(1).unwrap().cells.len(), 3);
        // central triangle, three edge products, six corner cells
        assert_eq!(build_exploded(2).unwrap().cells.len(), 10);
    }

    #[test]
    fn segment_decomposition_is_collar_center_collar() {
        let e = build_exploded(1).unwrap();
        // embedded breakpoints at 1/4 and 3/4
        let loc_mid = e.locate(&[0.5, 0.5]).unwrap();
        assert_eq!(e.cells[loc_mid.cell].face, vec![0, 1]);
        let loc_left = e.locate(&[0.9, 0.1]).unwrap();
        assert_eq!(e.cells[loc_left.cell].face, vec![0]);
        // p1 expands the center: center cell at parameter 1/4..3/4
        let q = [0.3, 0.7];
        let loc = e.locate(&q).unwrap();
        let p1 = e.p1(&loc);
        // embedded q = (lambda + b)/2 -> lambda = 2q - b with b = (1/2,1/2)
        assert!((p1[0] - (2.0 * q[0] - 0.5)).abs() < 1e-9);
    }

    #[test]
    fn locate_covers_random_points_and_projections_are_cellular() {
        let mut rng = ChaCha8Rng::seed_from_u64(151);
        for d in [0usize, 1, 2] {
            let e = build_exploded(d).unwrap();
            for _ in 0..200 {
                let q = random_barycentric(&mut rng, d);
                let loc = e.locate(&q).unwrap();
                // round trip through the embedding
                let back = e.embed(loc.cell, &loc.lambda, &loc.mu);
                let err: f64 = back
                    .iter()
                    .zip(q.iter())
                    .map(|(a, b)| (a - b).abs())
                    .sum();
                assert!(err < 1e-8, "embed error {}", err);
                // p1 lands in the declared face
                let p1 = e.p1(&loc);
                for (k, v) in p1.iter().enumerate() {
                    if !e.cells[loc.cell].face.contains(&k) {
                        assert!(v.abs() < 1e-12);
                    }
                }
                // p2 is a point of the flag simplex
                let (flag, mu) = e.p2(&loc);
                assert_eq!(flag.len(), mu.len());
                assert!((mu.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn triangle_cells_tile_the_area() {
        // embed into the plane and sum shoelace areas of the ten cells
        let e = build_exploded(2).unwrap();
        let to_plane = |q: &[f64]| -> (f64, f64) {
            (q[1] + 0.5 * q[2], 3f64.sqrt() / 2.0 * q[2])
        };
        let mut total = 0.0;
        for (ci, c) in e.cells.iter().enumerate() {
            // vertices of the product polytope
            let nl = c.face.len();
            let nm = c.flag.len();
            let mut pts: Vec<(f64, f64)> = Vec::new();
            for i in 0..nl {
                for l in 0..nm {
                    let mut lambda = vec![0.0; nl];
                    lambda[i] = 1.0;
                    let mut mu = vec![0.0; nm];
                    mu[l] = 1.0;
                    let q = e.embed(ci, &lambda, &mu);
                    pts.push(to_plane(&q));
                }
            }
            // convex hull area via centroid fan (cells are convex)
            let cx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
            let cy = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
            let mut angs: Vec<(f64, (f64, f64))> = pts
                .iter()
                .map(|&p| ((p.1 - cy).atan2(p.0 - cx), p))
                .collect();
            angs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut area = 0.0;
            for i in 0..angs.len() {
                let (x1, y1) = angs[i].1;
                let (x2, y2) = angs[(i + 1) % angs.len()].1;
                area += x1 * y2 - x2 * y1;
            }
            total += area.abs() / 2.0;
        }
        let simplex_area = 3f64.sqrt() / 4.0;
        assert!(
            (total - simplex_area).abs() < 1e-9,
            "tiled area {} vs {}",
            total,
            simplex_area
        );
    }

    #[test]
    fn p1_p2_lipschitz_constants_are_finite() {
        // sampled Lipschitz constants of the projections in embedded
        // coordinates; the central expansion is the factor 2
        let mut rng = ChaCha8Rng::seed_from_u64(157);
        let e = build_exploded(2).unwrap();
        let mut max1 = 0.0f64;
        let mut max2 = 0.0f64;
        for _ in 0..500 {
            let q1 = random_barycentric(&mut rng, 2);
            let mut q2 = q1.clone();
            let bump = 1e-4 * sampling::uniform(&mut rng, 0.5, 1.0);
            let i = (rng.random::<f64>() * 3.0) as usize % 3;
            let j = (i + 1) % 3;
            q2[i] += bump;
            q2[j] -= bump;
            if q2[j] < 0.0 {
                continue;
            }
            let (l1, l2) = (e.locate(&q1).unwrap(), e.locate(&q2).unwrap());
            if l1.cell != l2.cell {
                continue;
            }
            let dq: f64 = q1
                .iter()
                .zip(q2.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let d1: f64 = e
                .p1(&l1)
                .iter()
                .zip(e.p1(&l2).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let d2: f64 = e
                .p2_as_barycentric(&l1)
                .iter()
                .zip(e.p2_as_barycentric(&l2).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            max1 = max1.max(d1 / dq);
            max2 = max2.max(d2 / dq);
        }
        assert!(max1 >= 1.0 && max1 < 8.0, "p1 lipschitz {}", max1);
        assert!(max2 > 0.0 && max2 < 8.0, "p2 lipschitz {}", max2);
    }
}
