//! Whitney-type Lipschitz fillings of 0- and 1-spheres inside the
//! horosphere, flat-horosphere intersection cycles, and the divergence
//! mesh.
//!
//! The disk is decomposed so cell diameters are comparable to the
//! distance to the boundary; vertices far from the boundary carry the
//! cellular-map value of their nearest boundary label, near vertices
//! carry the label itself. Far simplices map through the composite
//! cellular map; near simplices are filled by geodesic coning in the
//! ambient space followed by one retraction onto the horosphere. Shape
//! constants are measured on the constructed decomposition, not
//! hardcoded.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::filling::omega::{build_omega_infty, omega_eval, point_digest, FillParams, OmegaData};
use crate::horosphere::{project_to_z, retract_to_z, HorosphereContext};
use crate::liecore::CartanVector;
use crate::symspace::{busemann, distance, spd_geodesic, Flat, Point};

/// Tunables of the Whitney fillings.
#[derive(Debug, Clone)]
pub struct WhitneyParams {
    /// Hard cap on the number of decomposition cells.
    pub cell_budget: usize,
    /// Truncation scale of the boundary band.
    pub min_cell: f64,
    /// Output samples per mesh edge.
    pub samples_per_edge: usize,
    /// Floor for the case-split shape constant: the split threshold is
    /// `1/max(measured_shape, shape_floor)`, so the composite-map route
    /// engages uniformly across input scales.
    pub shape_floor: f64,
    pub fill: FillParams,
}

impl Default for WhitneyParams {
    fn default() -> Self {
        WhitneyParams {
            cell_budget: 4096,
            min_cell: 0.25,
            samples_per_edge: 4,
            shape_floor: 4.0,
            fill: FillParams::default(),
        }
    }
}

/// Memoizing builder of cellular-map data keyed by the vertex points;
/// construction randomness is derived from the vertex digests, so a
/// shared face is built identically wherever it appears.
pub struct OmegaProvider {
    ctx: HorosphereContext,
    params: FillParams,
    base_seed: u64,
    cache: BTreeMap<Vec<u64>, OmegaData>,
}

impl OmegaProvider {
    pub fn new(ctx: HorosphereContext, params: FillParams, base_seed: u64) -> Self {
        OmegaProvider {
            ctx,
            params,
            base_seed,
            cache: BTreeMap::new(),
        }
    }

    pub fn ctx(&self) -> &HorosphereContext {
        &self.ctx
    }

    pub fn get(&mut self, zs: &[Point]) -> Result<&OmegaData> {
        let key: Vec<u64> = zs.iter().map(point_digest).collect();
        if !self.cache.contains_key(&key) {
            let od = build_omega_infty(zs, &self.ctx, &self.params, self.base_seed)?;
            self.cache.insert(key.clone(), od);
        }
        Ok(&self.cache[&key])
    }
}

/// A sampled path inside the horosphere.
#[derive(Debug, Clone)]
pub struct PathInZ {
    /// Increasing parameters in `[0, 1]`.
    pub params: Vec<f64>,
    pub points: Vec<Point>,
    pub length: f64,
    /// Max sampled stretch against the rescaled parameter domain.
    pub lip: f64,
    pub max_level_residual: f64,
}

fn whitney_intervals(l: f64, min_cell: f64, budget: usize) -> Result<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut stack = vec![(-l, l)];
    while let Some((a, b)) = stack.pop() {
        if out.len() + stack.len() > budget {
            return Err(Error::ResolutionExceeded(format!(
                "interval count above budget {}",
                budget
            )));
        }
        let diam = b - a;
        let dist = (a + l).min(l - b);
        if diam <= dist || diam <= min_cell {
            out.push((a, b));
        } else {
            let mid = 0.5 * (a + b);
            stack.push((a, mid));
            stack.push((mid, b));
        }
    }
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Ok(out)
}

/// Fill a 0-sphere in the horosphere: a path from `z0` to `z1` staying
/// on the horosphere, with length controlled by the ambient distance.
///
/// The interval is decomposed into dyadic Whitney cells; far vertices
/// carry the cellular-map value of their boundary label, the single
/// label-changing far edge maps through the composite cellular map, and
/// the boundary bands are filled by geodesics plus one retraction.
pub fn whitney_fill_path(
    z0: &Point,
    z1: &Point,
    provider: &mut OmegaProvider,
    params: &WhitneyParams,
) -> Result<PathInZ> {
    let ctx = provider.ctx().clone();
    let amb = distance(z0, z1)?;
    if amb < 1e-9 {
        return Ok(PathInZ {
            params: vec![0.0, 1.0],
            points: vec![z0.clone(), z1.clone()],
            length: 0.0,
            lip: 0.0,
            max_level_residual: busemann(z0, &ctx.cfg)?.abs(),
        });
    }
    let l = 0.5 * amb; // alpha is 1-Lipschitz on the radius-l interval
    let cells = whitney_intervals(l, params.min_cell.min(l / 2.0), params.cell_budget)?;
    let mut vertices: Vec<f64> = Vec::new();
    for (a, b) in &cells {
        vertices.push(*a);
        vertices.push(*b);
    }
    vertices.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vertices.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    // measured shape constant of the interior cells, floored so the
    // case split engages uniformly across scales
    let mut c_shape: f64 = 1.0;
    for (a, b) in &cells {
        let diam = b - a;
        let dist = (a + l).min(l - b);
        if dist > 0.0 {
            c_shape = c_shape.max(diam / dist).max(dist / diam);
        }
    }
    let far_threshold = 1.0 / c_shape.max(params.shape_floor);
    let label = |v: f64| -> Point {
        if v <= 0.0 {
            z0.clone()
        } else {
            z1.clone()
        }
    };
    // vertex values
    let mut values: Vec<Point> = Vec::new();
    let mut is_far: Vec<bool> = Vec::new();
    for &v in &vertices {
        let dist = (v + l).min(l - v);
        let far = dist >= far_threshold;
        is_far.push(far);
        if far {
            let z = label(v);
            let od = provider.get(std::slice::from_ref(&z))?;
            values.push(omega_eval(od, &[0], &[1.0], &ctx)?);
        } else {
            values.push(label(v));
        }
    }
    // edges
    let mut out_params: Vec<f64> = Vec::new();
    let mut out_points: Vec<Point> = Vec::new();
    let spe = params.samples_per_edge.max(2);
    for i in 0..vertices.len() - 1 {
        let (va, vb) = (vertices[i], vertices[i + 1]);
        let (pa, pb) = (values[i].clone(), values[i + 1].clone());
        let za = label(va);
        let zb = label(vb);
        let omega_edge = is_far[i] && is_far[i + 1];
        let distinct = distance(&za, &zb)? > 1e-9;
        for k in 0..spe {
            let t = k as f64 / spe as f64;
            let gp = (va + t * (vb - va) + l) / (2.0 * l);
            let point = if omega_edge && distinct {
                let od = provider.get(&[za.clone(), zb.clone()])?;
                omega_eval(od, &[0, 1], &[1.0 - t, t], &ctx)?
            } else if omega_edge {
                // both labels equal: the values coincide, constant edge
                pa.clone()
            } else {
                // boundary band: ambient geodesic plus one retraction
                retract_to_z(&spd_geodesic(&pa, &pb, t)?, &ctx)?
            };
            out_params.push(gp);
            out_points.push(point);
        }
    }
    out_params.push(1.0);
    out_points.push(values.last().unwrap().clone());
    // records
    let mut length = 0.0;
    let mut lip: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for i in 0..out_points.len() - 1 {
        let d = distance(&out_points[i], &out_points[i + 1])?;
        length += d;
        let dp = (out_params[i + 1] - out_params[i]).abs().max(1e-12) * 2.0 * l;
        lip = lip.max(d / dp);
    }
    for p in &out_points {
        residual = residual.max(busemann(p, &ctx.cfg)?.abs());
    }
    Ok(PathInZ {
        params: out_params,
        points: out_points,
        length,
        lip,
        max_level_residual: residual,
    })
}

/// A piecewise-geodesic loop on the horosphere, parametrized by the
/// unit circle; between samples the loop runs along ambient geodesics
/// retracted onto the horosphere.
#[derive(Debug, Clone)]
pub struct LoopInZ {
    pub points: Vec<Point>,
    pub lip: f64,
}

impl LoopInZ {
    pub fn from_points(points: Vec<Point>, ctx: &HorosphereContext) -> Result<LoopInZ> {
        if points.len() < 3 {
            return Err(Error::InvalidConfig("a loop needs at least 3 points".into()));
        }
        let n = points.len();
        let mut lip: f64 = 0.0;
        for (i, p) in points.iter().enumerate() {
            let h = busemann(p, &ctx.cfg)?;
            if h.abs() > 1e-7 {
                return Err(Error::InvalidConfig(format!(
                    "loop point {} off the horosphere (h = {:.2e})",
                    i, h
                )));
            }
            let q = &points[(i + 1) % n];
            let step = std::f64::consts::TAU / n as f64;
            lip = lip.max(distance(p, q)? / step);
        }
        Ok(LoopInZ { points, lip })
    }

    /// Evaluate at angle parameter `s` in `[0, 1)`.
    pub fn eval(&self, s: f64, ctx: &HorosphereContext) -> Result<Point> {
        let n = self.points.len();
        let t = s.rem_euclid(1.0) * n as f64;
        let i = (t.floor() as usize) % n;
        let frac = t - t.floor();
        if frac < 1e-12 {
            return Ok(self.points[i].clone());
        }
        retract_to_z(
            &spd_geodesic(&self.points[i], &self.points[(i + 1) % n], frac)?,
            ctx,
        )
    }
}

/// A sampled disk filling inside the horosphere.
#[derive(Debug, Clone)]
pub struct DiskInZ {
    /// Planar mesh vertices.
    pub mesh: Vec<[f64; 2]>,
    /// Triangles as vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Sampled output: planar domain points with their horosphere
    /// images.
    pub samples: Vec<([f64; 2], Point)>,
    /// Recorded Lipschitz constant over sampled pairs.
    pub lip: f64,
    /// Measured shape constant of the decomposition.
    pub c_shape: f64,
    /// Largest |h| over all output samples.
    pub max_level_residual: f64,
    /// Largest mismatch between the disk boundary and the input loop.
    pub boundary_residual: f64,
}

struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
}

/// Ring decomposition of the disk of radius `l`: radii approach the
/// boundary dyadically and the ring spacing tracks the distance to the
/// boundary, so cell diameters are comparable to their boundary
/// distance (the shape constant is measured afterwards).
fn ring_mesh(l: f64, min_cell: f64, budget: usize) -> Result<Mesh> {
    let mut radii: Vec<f64> = vec![0.0];
    let mut k = 1u32;
    loop {
        let r = l * (1.0 - 0.5f64.powi(k as i32));
        if l - r < min_cell.max(1e-6) {
            break;
        }
        radii.push(r);
        k += 1;
        if k > 40 {
            break;
        }
    }
    radii.push(l);
    let mut rings: Vec<Vec<usize>> = Vec::new();
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for (ri, &r) in radii.iter().enumerate() {
        if ri == 0 {
            vertices.push([0.0, 0.0]);
            rings.push(vec![0]);
            continue;
        }
        let spacing = ((l - r).max(min_cell)) * 0.75;
        let count = ((std::f64::consts::TAU * r / spacing).ceil() as usize).max(6);
        let mut ring = Vec::with_capacity(count);
        for j in 0..count {
            let ang = std::f64::consts::TAU * j as f64 / count as f64;
            ring.push(vertices.len());
            vertices.push([r * ang.cos(), r * ang.sin()]);
        }
        rings.push(ring);
        if vertices.len() > budget {
            return Err(Error::ResolutionExceeded(format!(
                "mesh vertex count above budget {}",
                budget
            )));
        }
    }
    // center fan
    let first = &rings[1];
    for j in 0..first.len() {
        triangles.push([0, first[j], first[(j + 1) % first.len()]]);
    }
    // annuli: zig-zag between consecutive rings by angle
    for ri in 1..rings.len() - 1 {
        let inner = &rings[ri];
        let outer = &rings[ri + 1];
        let angle = |v: usize| -> f64 {
            let p = vertices[v];
            p[1].atan2(p[0]).rem_euclid(std::f64::consts::TAU)
        };
        let mut i = 0usize; // index into inner
        let mut o = 0usize; // index into outer
        let ni = inner.len();
        let no = outer.len();
        let mut steps = 0;
        while (i < ni || o < no) && steps < ni + no {
            steps += 1;
            let ai = angle(inner[(i + 1) % ni]) + if i + 1 >= ni { std::f64::consts::TAU } else { 0.0 };
            let ao = angle(outer[(o + 1) % no]) + if o + 1 >= no { std::f64::consts::TAU } else { 0.0 };
            if (o >= no) || (i < ni && ai <= ao) {
                triangles.push([inner[i % ni], inner[(i + 1) % ni], outer[o % no]]);
                i += 1;
            } else {
                triangles.push([inner[i % ni], outer[(o + 1) % no], outer[o % no]]);
                o += 1;
            }
        }
        // close the seam
        triangles.push([inner[0], outer[no - 1], outer[0]]);
    }
    if triangles.len() > budget {
        return Err(Error::ResolutionExceeded(format!(
            "triangle count above budget {}",
            budget
        )));
    }
    let boundary = rings.last().unwrap().clone();
    Ok(Mesh {
        vertices,
        triangles,
        boundary,
    })
}

/// Fill a Lipschitz loop in the horosphere with a sampled disk.
pub fn whitney_fill_disk(
    alpha: &LoopInZ,
    provider: &mut OmegaProvider,
    params: &WhitneyParams,
) -> Result<DiskInZ> {
    let ctx = provider.ctx().clone();
    let l = alpha.lip.max(0.5);
    let mesh = ring_mesh(l, params.min_cell, params.cell_budget)?;
    let nverts = mesh.vertices.len();
    let vdist = |v: usize| -> f64 {
        let p = mesh.vertices[v];
        l - (p[0] * p[0] + p[1] * p[1]).sqrt()
    };
    let vangle = |v: usize| -> f64 {
        let p = mesh.vertices[v];
        p[1].atan2(p[0]).rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU
    };
    // measured shape constant
    let mut c_shape: f64 = 1.0;
    for t in &mesh.triangles {
        let mut diam: f64 = 0.0;
        for a in 0..3 {
            for b in (a + 1)..3 {
                let (pa, pb) = (mesh.vertices[t[a]], mesh.vertices[t[b]]);
                diam = diam
                    .max(((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt());
            }
        }
        let dist = t.iter().map(|&v| vdist(v)).fold(f64::INFINITY, f64::min);
        if dist > 1e-9 {
            c_shape = c_shape.max(diam / dist).max(dist / diam);
        }
    }
    let far_threshold = 1.0 / c_shape.max(params.shape_floor);
    // vertex labels and values
    let mut labels: Vec<Point> = Vec::with_capacity(nverts);
    let mut far: Vec<bool> = Vec::with_capacity(nverts);
    let mut values: Vec<Point> = Vec::with_capacity(nverts);
    for v in 0..nverts {
        let z = alpha.eval(vangle(v), &ctx)?;
        let f = vdist(v) >= far_threshold;
        far.push(f);
        if f {
            let od = provider.get(std::slice::from_ref(&z))?;
            values.push(omega_eval(od, &[0], &[1.0], &ctx)?);
        } else {
            values.push(z.clone());
        }
        labels.push(z);
    }
    // canonical ordering of label tuples for the provider cache
    let sorted_pair = |a: &Point, b: &Point| -> (Vec<Point>, bool) {
        if point_digest(a) <= point_digest(b) {
            (vec![a.clone(), b.clone()], false)
        } else {
            (vec![b.clone(), a.clone()], true)
        }
    };
    // edge evaluator shared by triangles so shared edges agree
    let edge_eval = |provider: &mut OmegaProvider,
                         va: usize,
                         vb: usize,
                         t: f64|
     -> Result<Point> {
        let omega_edge = far[va] && far[vb];
        let (za, zb) = (&labels[va], &labels[vb]);
        if omega_edge && distance(za, zb)? > 1e-9 {
            let (zs, flipped) = sorted_pair(za, zb);
            let od = provider.get(&zs)?;
            let tt = if flipped { 1.0 - t } else { t };
            omega_eval(od, &[0, 1], &[1.0 - tt, tt], &ctx)
        } else if omega_edge {
            Ok(values[va].clone())
        } else {
            retract_to_z(&spd_geodesic(&values[va], &values[vb], t)?, &ctx)
        }
    };
    let spe = params.samples_per_edge.max(2);
    let mut samples: Vec<([f64; 2], Point)> = Vec::new();
    let mut max_level: f64 = 0.0;
    let mut lip: f64 = 0.0;
    let plane = |a: [f64; 2], b: [f64; 2], t: f64| -> [f64; 2] {
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    };
    for tri in &mesh.triangles {
        let [v0, v1, v2] = *tri;
        let all_far = far[v0] && far[v1] && far[v2];
        let distinct = distance(&labels[v0], &labels[v1])? > 1e-9
            || distance(&labels[v1], &labels[v2])? > 1e-9;
        let mut tri_samples: Vec<([f64; 2], Point)> = Vec::new();
        if all_far && distinct {
            // the composite cellular map on the whole triangle
            let mut zs = vec![
                (point_digest(&labels[v0]), v0),
                (point_digest(&labels[v1]), v1),
                (point_digest(&labels[v2]), v2),
            ];
            zs.sort();
            let pts: Vec<Point> = zs.iter().map(|&(_, v)| labels[v].clone()).collect();
            let od = provider.get(&pts)?;
            let pos_of = |v: usize| zs.iter().position(|&(_, w)| w == v).unwrap();
            for a in 0..=spe {
                for b in 0..=(spe - a) {
                    let c = spe - a - b;
                    let bl = [
                        a as f64 / spe as f64,
                        b as f64 / spe as f64,
                        c as f64 / spe as f64,
                    ];
                    let mut bary = [0.0; 3];
                    bary[pos_of(v0)] = bl[0];
                    bary[pos_of(v1)] = bl[1];
                    bary[pos_of(v2)] = bl[2];
                    let p = omega_eval(od, &[0, 1, 2], &bary, &ctx)?;
                    let dom = [
                        bl[0] * mesh.vertices[v0][0]
                            + bl[1] * mesh.vertices[v1][0]
                            + bl[2] * mesh.vertices[v2][0],
                        bl[0] * mesh.vertices[v0][1]
                            + bl[1] * mesh.vertices[v1][1]
                            + bl[2] * mesh.vertices[v2][1],
                    ];
                    tri_samples.push((dom, p));
                }
            }
        } else if all_far {
            // all labels equal: constant
            tri_samples.push((mesh.vertices[v0], values[v0].clone()));
        } else {
            // local filling: cone the three boundary edge maps from the
            // value at v0, then retract
            let apex = values[v0].clone();
            for a in 0..=spe {
                let r = a as f64 / spe as f64;
                for b in 0..=spe {
                    let t = b as f64 / spe as f64;
                    // boundary point: walk edge v1->v2
                    let bp = edge_eval(provider, v1, v2, t)?;
                    let val = retract_to_z(&spd_geodesic(&apex, &bp, r)?, &ctx)?;
                    let dom_edge = plane(mesh.vertices[v1], mesh.vertices[v2], t);
                    let dom = plane(mesh.vertices[v0], dom_edge, r);
                    tri_samples.push((dom, val));
                }
            }
        }
        for (dom, p) in &tri_samples {
            max_level = max_level.max(busemann(p, &ctx.cfg)?.abs());
            let _ = dom;
        }
        // sampled stretch within the triangle
        for i in 0..tri_samples.len() {
            for j in (i + 1)..tri_samples.len().min(i + 8) {
                let (da, pa) = &tri_samples[i];
                let (db, pb) = &tri_samples[j];
                let dd = ((da[0] - db[0]).powi(2) + (da[1] - db[1]).powi(2)).sqrt();
                if dd > 1e-9 {
                    lip = lip.max(distance(pa, pb)? / dd);
                }
            }
        }
        samples.extend(tri_samples);
    }
    // boundary agreement
    let mut boundary_residual: f64 = 0.0;
    for &v in &mesh.boundary {
        let target = alpha.eval(vangle(v), &ctx)?;
        boundary_residual = boundary_residual.max(distance(&values[v], &target)?);
    }
    Ok(DiskInZ {
        mesh: mesh.vertices,
        triangles: mesh.triangles,
        samples,
        lip,
        c_shape,
        max_level_residual: max_level,
        boundary_residual,
    })
}

/// The intersection cycle of a translated opposite flat with the
/// horosphere through a point at level `r`: boundary directions of the
/// flat are pushed through the projection from the point, giving a
/// piecewise-geodesic cycle on the horosphere with gauge growing like
/// the level.
#[derive(Debug, Clone)]
pub struct FlatCycle {
    pub thetas: Vec<f64>,
    pub points: Vec<Point>,
    pub lip: f64,
    pub level: f64,
    pub max_level_residual: f64,
}

pub fn flat_sphere_on_z(
    x: &Point,
    f0: &Flat,
    ctx: &HorosphereContext,
    resolution: usize,
) -> Result<FlatCycle> {
    let n = ctx.cfg.n();
    let level = busemann(x, &ctx.cfg)?;
    if level <= 1.0 {
        return Err(Error::InvalidConfig(format!(
            "flat cycle needs level > 1, got {}",
            level
        )));
    }
    let (nx, ax) = x.na_coordinates()?;
    let p = nx.as_group().mul(&ax.as_group());
    let flat = f0.translate(&p)?;
    // orthonormal basis of the traceless diagonal directions
    let mut basis: Vec<CartanVector> = Vec::new();
    for k in 0..(n - 1) {
        let mut v = vec![0.0; n];
        for (i, item) in v.iter_mut().enumerate().take(k + 1) {
            *item = 1.0;
            let _ = i;
        }
        let c = CartanVector::project(nalgebra::DVector::from_vec(v)).normalized();
        // Gram-Schmidt against previous
        let mut w = c.coords().clone();
        for b in &basis {
            w -= b.coords() * b.coords().dot(&w);
        }
        let nw = w.norm();
        if nw > 1e-9 {
            basis.push(
                CartanVector::new(w / nw).map_err(|e| Error::NumericalFailure(e.to_string()))?,
            );
        }
    }
    if n == 2 {
        // the cycle degenerates to the two endpoints of the flat
        let mut pts = Vec::new();
        let mut thetas = Vec::new();
        for (i, sgn) in [1.0f64, -1.0].iter().enumerate() {
            let w = basis[0].scale(*sgn);
            let sigma = flat.boundary_point(&w);
            let (z, _) = project_to_z(x, &sigma, ctx)?;
            pts.push(z);
            thetas.push(i as f64 * std::f64::consts::PI);
        }
        let mut residual: f64 = 0.0;
        for z in &pts {
            residual = residual.max(busemann(z, &ctx.cfg)?.abs());
        }
        let lip = distance(&pts[0], &pts[1])? / std::f64::consts::PI;
        return Ok(FlatCycle {
            thetas,
            points: pts,
            lip,
            level,
            max_level_residual: residual,
        });
    }
    if n != 3 {
        return Err(Error::InvalidConfig(
            "flat cycles are built at desk scale for orders two and three".into(),
        ));
    }
    let mut thetas = Vec::with_capacity(resolution);
    let mut points = Vec::with_capacity(resolution);
    let mut residual: f64 = 0.0;
    for i in 0..resolution {
        // generic phase offset keeps the grid off the finitely many
        // singular (wall) directions of the flat
        let theta = std::f64::consts::TAU * (i as f64 + 0.2371) / resolution as f64;
        let w = basis[0]
            .scale(theta.cos())
            .add(&basis[1].scale(theta.sin()))
            .normalized();
        let sigma = flat.boundary_point(&w);
        let (z, _) = project_to_z(x, &sigma, ctx)?;
        residual = residual.max(busemann(&z, &ctx.cfg)?.abs());
        thetas.push(theta);
        points.push(z);
    }
    let mut lip: f64 = 0.0;
    for i in 0..resolution {
        let d = distance(&points[i], &points[(i + 1) % resolution])?;
        lip = lip.max(d / (std::f64::consts::TAU / resolution as f64));
    }
    Ok(FlatCycle {
        thetas,
        points,
        lip,
        level,
        max_level_residual: residual,
    })
}

/// In-horosphere route lengths between the antipodal points of a flat
/// cycle: along the cycle, and through a retracted straight chord of
/// the flat; the mesh distance is their minimum (a Dijkstra on the
/// two-route graph).
#[derive(Debug, Clone)]
pub struct AntipodalRoutes {
    pub along_cycle: f64,
    pub chord_route: f64,
    pub mesh_distance: f64,
}

pub fn antipodal_mesh_distance(
    cycle: &FlatCycle,
    x: &Point,
    f0: &Flat,
    ctx: &HorosphereContext,
    chord_samples: usize,
) -> Result<AntipodalRoutes> {
    let m = cycle.points.len();
    let half = m / 2;
    // along-cycle distance (shorter side)
    let mut side1 = 0.0;
    for i in 0..half {
        side1 += distance(&cycle.points[i], &cycle.points[i + 1])?;
    }
    let mut side2 = 0.0;
    for i in half..m {
        side2 += distance(&cycle.points[i], &cycle.points[(i + 1) % m])?;
    }
    let along = side1.min(side2);
    // chord route: straight segment in the flat between the antipodal
    // points, retracted onto the horosphere
    let (nx, ax) = x.na_coordinates()?;
    let p = nx.as_group().mul(&ax.as_group());
    let flat = f0.translate(&p)?;
    let coords_of = |z: &Point| -> Result<CartanVector> {
        let y = z.translate_by_inverse_of(flat.frame())?;
        let n = y.n();
        let mut w = nalgebra::DVector::<f64>::zeros(n);
        for i in 0..n {
            w[i] = 0.5 * y.matrix()[(i, i)].max(1e-300).ln();
        }
        Ok(CartanVector::project(w))
    };
    let w0 = coords_of(&cycle.points[0])?;
    let w1 = coords_of(&cycle.points[half])?;
    let mut chord = 0.0;
    let mut prev: Option<Point> = None;
    for k in 0..=chord_samples {
        let t = k as f64 / chord_samples as f64;
        let w = w0.scale(1.0 - t).add(&w1.scale(t));
        let q = flat.point_at(&w);
        let zq = retract_to_z(&q, ctx)?;
        if let Some(pr) = &prev {
            chord += distance(pr, &zq)?;
        }
        prev = Some(zq);
    }
    Ok(AntipodalRoutes {
        along_cycle: along,
        chord_route: chord,
        mesh_distance: along.min(chord),
    })
}
