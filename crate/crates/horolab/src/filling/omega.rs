//! Coning at infinity and the cellular map with anchor points.
//!
//! The contraction of a shadow sphere picks a far chamber `d` (with a
//! lifted anchor point) and sends each sphere point along the Tits
//! geodesic to the barycenter `u` of `d` inside the flat spanned by the
//! point's chamber and `d`. Barycenters of chambers opposite `d` are
//! exactly antipodal to `u` in those flats, so the geodesic through a
//! vertex is broken at a deterministic perpendicular; around such a
//! vertex the cone rotates the midpoint inside a single flat (the
//! vertex's own chamber closure), which keeps the coned disk continuous
//! and its sampled Lipschitz constant finite.
//!
//! The cellular map sends each vertex of a simplex over the horosphere
//! to the barycenter of its opposite chamber, and each face to a coned
//! disk in a larger shadow, with anchor points climbing the chamber
//! cones; the composite with the horosphere projection is evaluated
//! through the exploded-simplex projections.

use std::collections::BTreeMap;

use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;

use crate::chambers::{
    self, distance_to_weyl_chamber, enlarge, flat_chamber, opposite_chamber_for_shadow, rho,
    Chamber, OppositeShadowParams, WeylChamberRegion,
};
use crate::error::{Error, Result};
use crate::filling::exploded::build_exploded;
use crate::filling::sphere::{
    descending_order, perp_direction, PiecewiseGeodesicSphere, TitsArc, TitsPath,
};
use crate::horosphere::HorosphereContext;
use crate::liecore::{CartanVector, PositiveDiagonal, SpecialLinear};
use crate::linalg;
use crate::policy::NumericPolicy;
use crate::sampling;
use crate::symspace::{busemann, distance, spd_geodesic, BoundaryPoint, Flat, Point};

/// Tunables of the coning and anchor constructions.
#[derive(Debug, Clone)]
pub struct FillParams {
    /// Samples per arc when gridding cones.
    pub resolution: usize,
    /// Loop-parameter halfwidth of the rotation fan at antipodal
    /// vertices.
    pub fan_halfwidth: f64,
    /// Travel-time slope of the shadow-enlargement step.
    pub c_enlarge: f64,
    /// Sampled checks per construction.
    pub check_samples: usize,
    /// Cap on the anchor-distance constant (property-1 gate, recorded
    /// and enforced).
    pub anchor_cap: f64,
    pub opposite: OppositeShadowParams,
}

impl Default for FillParams {
    fn default() -> Self {
        FillParams {
            resolution: 32,
            fan_halfwidth: 0.02,
            c_enlarge: 0.75,
            check_samples: 16,
            anchor_cap: 64.0,
            opposite: OppositeShadowParams::default(),
        }
    }
}

/// Record of a coning construction.
#[derive(Debug, Clone)]
pub struct ConeRecord {
    /// Sampled Lipschitz constant of the coned disk (angular metric
    /// upper bounds over the Euclidean cone domain).
    pub lip: f64,
    /// Length of the input sphere (its Lipschitz gauge).
    pub input_lip: f64,
    /// Largest shadow gauge of image chambers at the lifted point.
    pub max_gauge: f64,
}

/// The coned filling of a sphere at infinity.
#[derive(Debug, Clone)]
pub enum InfinityFill {
    /// Filling of a 0-sphere: a path through the apex.
    Path(TitsPath),
    /// Filling of a 1-sphere: a coned disk over the loop.
    Cone(LoopCone),
}

impl InfinityFill {
    /// Translate the carrying flats; all coordinates are frame-relative
    /// and unchanged.
    pub fn translate(&self, g: &crate::liecore::SpecialLinear) -> Result<InfinityFill> {
        match self {
            InfinityFill::Path(p) => Ok(InfinityFill::Path(p.translate(g)?)),
            InfinityFill::Cone(c) => {
                let mut flats = BTreeMap::new();
                for (k, f) in &c.flats {
                    flats.insert(k.clone(), f.translate(g)?);
                }
                Ok(InfinityFill::Cone(LoopCone {
                    apex_chamber: c.apex_chamber.translate(g),
                    loop_path: c.loop_path.translate(g)?,
                    flats,
                    fans: c.fans.clone(),
                    record_lip: c.record_lip,
                }))
            }
        }
    }

    /// Evaluate the filling on the disk: for a path, `r` sweeps the
    /// path; for a cone, `(s, r)` are loop and radial parameters
    /// (`r = 1` at the apex).
    pub fn eval(&self, s: f64, r: f64) -> Result<(BoundaryPoint, Chamber)> {
        match self {
            InfinityFill::Path(p) => {
                let t = 0.5 * (s + r); // path filling of S^0: single parameter
                Ok((p.point_at(t), p.chamber_at(t)))
            }
            InfinityFill::Cone(c) => c.eval(s, r),
        }
    }
}

/// A coned disk over a closed path at infinity.
#[derive(Debug, Clone)]
pub struct LoopCone {
    pub apex_chamber: Chamber,
    pub loop_path: TitsPath,
    flats: BTreeMap<(usize, Vec<usize>), Flat>,
    fans: Vec<Fan>,
    pub record_lip: f64,
}

#[derive(Debug, Clone)]
struct Fan {
    center: f64,
    halfwidth: f64,
    flat_key: (usize, Vec<usize>),
    via_minus: DVector<f64>,
    via_plus: DVector<f64>,
}

impl LoopCone {
    /// Evaluate at loop parameter `s` and radial parameter `r`
    /// (`r = 0` on the loop, `r = 1` at the apex barycenter).
    pub fn eval(&self, s: f64, r: f64) -> Result<(BoundaryPoint, Chamber)> {
        let s = s.rem_euclid(1.0);
        let n = self.apex_chamber.n();
        let tau0 = CartanVector::standard_barycenter(n);
        let apex_coords = -tau0.coords().clone();
        // fan window?
        for fan in &self.fans {
            let mut delta = (s - fan.center).abs();
            delta = delta.min(1.0 - delta);
            if delta <= fan.halfwidth {
                let flat = self
                    .flats
                    .get(&fan.flat_key)
                    .ok_or_else(|| Error::NumericalFailure("missing fan flat".into()))?;
                let (arc_i, local) = self.loop_path.locate(s);
                let raw = self.loop_path.arcs[arc_i].coords_at(local);
                let mut sorted = raw.as_slice().to_vec();
                sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
                let from = DVector::from_vec(sorted);
                // rotation parameter across the window (signed,
                // cyclic-aware)
                let mut signed = s - fan.center;
                if signed > 0.5 {
                    signed -= 1.0;
                }
                if signed < -0.5 {
                    signed += 1.0;
                }
                let t = (signed / fan.halfwidth + 1.0) / 2.0;
                let via = linalg::slerp(&fan.via_minus, &fan.via_plus, t.clamp(0.0, 1.0));
                return eval_broken(flat, &from, &via, &apex_coords, r);
            }
        }
        let (arc_i, local) = self.loop_path.locate(s);
        let raw = self.loop_path.arcs[arc_i].coords_at(local);
        let order = descending_order(&raw);
        let key = (arc_i, order.clone());
        let flat = match self.flats.get(&key) {
            Some(f) => f,
            None => {
                return Err(Error::MembershipViolation(format!(
                    "cone grid missed ordering {:?} on arc {}",
                    order, arc_i
                )))
            }
        };
        let from = DVector::from_fn(raw.len(), |i, _| raw[order[i]]);
        let ang = linalg::unit_angle(&from, &apex_coords);
        if ang >= std::f64::consts::PI - 1e-9 {
            // exact antipode outside a fan: deterministic perpendicular
            let via = perp_direction(&from)?;
            return eval_broken(flat, &from, &via, &apex_coords, r);
        }
        let coords = linalg::slerp(&from, &apex_coords, r);
        let chamber = flat_chamber(flat, &descending_order(&coords));
        Ok((
            flat.boundary_point(&CartanVector::project(coords).normalized()),
            chamber,
        ))
    }
}

fn eval_broken(
    flat: &Flat,
    from: &DVector<f64>,
    via: &DVector<f64>,
    to: &DVector<f64>,
    r: f64,
) -> Result<(BoundaryPoint, Chamber)> {
    let a1 = linalg::unit_angle(from, via);
    let a2 = linalg::unit_angle(via, to);
    let total = a1 + a2;
    let drawn = r * total;
    let coords = if drawn <= a1 {
        linalg::slerp(from, via, if a1 > 0.0 { drawn / a1 } else { 0.0 })
    } else {
        linalg::slerp(via, to, if a2 > 0.0 { (drawn - a1) / a2 } else { 1.0 })
    };
    let chamber = flat_chamber(flat, &descending_order(&coords));
    Ok((
        flat.boundary_point(&CartanVector::project(coords.clone()).normalized()),
        chamber,
    ))
}

/// Spherical comparison bound for points on two sides of a triangle
/// with side lengths `a`, `b` and opposite side `c`, at fractions `s`
/// and `t` from the common corner.
fn cat1_pair_bound(a: f64, b: f64, c: f64, s: f64, t: f64) -> f64 {
    let ca = c.min(std::f64::consts::PI);
    let denom = (a.sin() * b.sin()).max(1e-300);
    let cos_gamma = ((ca.cos() - a.cos() * b.cos()) / denom).clamp(-1.0, 1.0);
    let gamma = cos_gamma.acos();
    let (sa, tb) = (s * a, t * b);
    let cosd =
        (sa.cos() * tb.cos() + sa.sin() * tb.sin() * gamma.cos()).clamp(-1.0, 1.0);
    cosd.acos()
}

/// Contract a piecewise-geodesic sphere lying in the shadow of `x`:
/// find the far chamber and lifted point, cone the sphere to the far
/// chamber's barycenter inside spanned flats, and certify that the
/// sampled image chambers stay in the unit shadow of the lifted point.
pub fn contract_in_shadow(
    alpha: &PiecewiseGeodesicSphere,
    x: &Point,
    v: &CartanVector,
    params: &FillParams,
    rng: &mut ChaCha8Rng,
) -> Result<(Point, InfinityFill, SpecialLinear, ConeRecord)> {
    let n = x.n();
    // work in the horospherical frame of x: chambers of the shadow have
    // moderate unipotent data there, so the spanned flats and cones are
    // built at benign conditioning and translated back at the end
    let (nx, ax) = x.na_coordinates()?;
    let p = nx.as_group().mul(&ax.as_group());
    let x_base = Point::identity(n);
    let alpha_base = match alpha {
        PiecewiseGeodesicSphere::Zero { points } => PiecewiseGeodesicSphere::Zero {
            points: [
                (
                    points[0].0.translate_by_inverse_of(&p)?,
                    points[0].1.translate_by_inverse_of(&p)?,
                ),
                (
                    points[1].0.translate_by_inverse_of(&p)?,
                    points[1].1.translate_by_inverse_of(&p)?,
                ),
            ],
        },
        PiecewiseGeodesicSphere::One { path } => {
            let arcs: Result<Vec<TitsArc>> = path
                .arcs
                .iter()
                .map(|a| a.translate_by_inverse_of(&p))
                .collect();
            PiecewiseGeodesicSphere::One {
                path: TitsPath::new(arcs?, true)?,
            }
        }
    };
    let (x_prime_base, d, _diag) =
        opposite_chamber_for_shadow(&x_base, v, &params.opposite, rng)?;
    let tau0 = CartanVector::standard_barycenter(n);
    let apex_coords = -tau0.coords().clone();

    let fill_base = match &alpha_base {
        PiecewiseGeodesicSphere::Zero { points } => {
            let mut arcs: Vec<TitsArc> = Vec::new();
            // legs through the apex; chambers are recanonicalized so the
            // spanned flats are built from well-conditioned frames
            let c0 = chambers::canonical_form(&points[0].1)?;
            let e0 = chambers::flat_spanned(&c0, &d)?;
            let w0 = coords_in_spanned_flat(&points[0].0, &points[0].1);
            arcs.push(TitsArc::new(e0, w0, apex_coords.clone())?);
            let c1 = chambers::canonical_form(&points[1].1)?;
            let e1 = chambers::flat_spanned(&c1, &d)?;
            let w1 = coords_in_spanned_flat(&points[1].0, &points[1].1);
            let down = TitsArc::new(e1, w1, apex_coords.clone())?.reversed();
            arcs.push(down);
            InfinityFill::Path(TitsPath::new(arcs, false)?)
        }
        PiecewiseGeodesicSphere::One { path } => {
            InfinityFill::Cone(build_loop_cone(path, &d, params)?)
        }
    };

    // certify the image against the lifted point's unit shadow
    let mut max_gauge: f64 = 0.0;
    let grid = params.resolution.max(8);
    for i in 0..=grid {
        for j in 0..=4 {
            let (s, r) = (i as f64 / grid as f64, j as f64 / 4.0);
            let (_, ch) = fill_base.eval(s, r)?;
            let g = rho(&x_prime_base, &ch)?.rho;
            max_gauge = max_gauge.max(g);
            if g >= 1.0 {
                return Err(Error::CalibrationFailure {
                    construction: "contract_in_shadow".into(),
                    detail: format!(
                        "image chamber gauge {:.4} >= 1 at (s={:.3}, r={:.3})",
                        g, s, r
                    ),
                });
            }
        }
    }
    let x_prime = x_prime_base.translate(&p);
    let fill = fill_base;

    let (input_lip, lip) = match &fill {
        InfinityFill::Path(tp) => (tp.length() / 2.0, tp.length() / 2.0),
        InfinityFill::Cone(c) => {
            let input = match alpha {
                PiecewiseGeodesicSphere::One { path } => path.length() / std::f64::consts::TAU,
                _ => unreachable!(),
            };
            (input, c.record_lip)
        }
    };

    Ok((
        x_prime,
        fill,
        p,
        ConeRecord {
            lip,
            input_lip,
            max_gauge,
        },
    ))
}

/// Coordinates of a boundary point inside the flat spanned by its own
/// chamber and a far chamber: the flat's columns follow the chamber's
/// flag, so the coordinates are the weights sorted descending.
fn coords_in_spanned_flat(sigma: &BoundaryPoint, _chamber: &Chamber) -> DVector<f64> {
    let mut w = sigma.dir().coords().as_slice().to_vec();
    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
    DVector::from_vec(w)
}

impl TitsArc {
    /// The same arc walked backwards.
    pub fn reversed(&self) -> TitsArc {
        TitsArc {
            flat: self.flat.clone(),
            from: self.to.clone(),
            to: self.from.clone(),
            via: self.via.clone(),
        }
    }
}

impl TitsPath {
    /// The same path walked backwards.
    pub fn reversed(&self) -> Result<TitsPath> {
        let arcs: Vec<TitsArc> = self.arcs.iter().rev().map(|a| a.reversed()).collect();
        TitsPath::new(arcs, self.closed)
    }
}

fn build_loop_cone(path: &TitsPath, d: &Chamber, params: &FillParams) -> Result<LoopCone> {
    let n = d.n();
    let tau0 = CartanVector::standard_barycenter(n);
    let apex_coords = -tau0.coords().clone();
    let mut flats: BTreeMap<(usize, Vec<usize>), Flat> = BTreeMap::new();
    let grid = params.resolution.max(16) * path.arcs.len();
    let mut antipodal_params: Vec<f64> = Vec::new();
    for i in 0..=grid {
        let s = i as f64 / grid as f64;
        let (arc_i, local) = path.locate(s);
        let raw = path.arcs[arc_i].coords_at(local);
        let order = descending_order(&raw);
        let key = (arc_i, order.clone());
        if !flats.contains_key(&key) {
            let ch = chambers::canonical_form(&flat_chamber(&path.arcs[arc_i].flat, &order))?;
            let fl = chambers::flat_spanned(&ch, d)?;
            flats.insert(key.clone(), fl);
        }
        let sorted = DVector::from_fn(n, |k, _| raw[order[k]]);
        if linalg::unit_angle(&sorted, &apex_coords) >= std::f64::consts::PI - 1e-7 {
            antipodal_params.push(s);
        }
    }
    // merge adjacent antipodal grid hits into fans
    let mut fans: Vec<Fan> = Vec::new();
    let mut centers: Vec<f64> = Vec::new();
    for s in antipodal_params {
        if centers
            .iter()
            .all(|c| ((c - s).abs()).min(1.0 - (c - s).abs()) > 4.0 * params.fan_halfwidth)
        {
            centers.push(s);
        }
    }
    for c in centers {
        let h = params.fan_halfwidth;
        let (arc_i, local) = path.locate(c);
        let raw = path.arcs[arc_i].coords_at(local);
        let order = descending_order(&raw);
        let key = (arc_i, order.clone());
        if !flats.contains_key(&key) {
            let ch = chambers::canonical_form(&flat_chamber(&path.arcs[arc_i].flat, &order))?;
            flats.insert(key.clone(), chambers::flat_spanned(&ch, d)?);
        }
        // perpendicular parts of the window-edge points, in the vertex flat
        let edge_coords = |s: f64| -> DVector<f64> {
            let (ai, loc) = path.locate(s);
            let raw = path.arcs[ai].coords_at(loc);
            let mut v = raw.as_slice().to_vec();
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            DVector::from_vec(v)
        };
        let perp_of = |p: &DVector<f64>| -> Result<DVector<f64>> {
            let axis = &apex_coords / apex_coords.norm();
            let perp = p - &axis * p.dot(&axis);
            let nrm = perp.norm();
            if nrm < 1e-9 {
                return perp_direction(&apex_coords);
            }
            Ok(perp / nrm)
        };
        let via_minus = perp_of(&edge_coords(c - h))?;
        let via_plus = perp_of(&edge_coords(c + h))?;
        fans.push(Fan {
            center: c.rem_euclid(1.0),
            halfwidth: h,
            flat_key: key,
            via_minus,
            via_plus,
        });
    }
    let mut cone = LoopCone {
        apex_chamber: d.clone(),
        loop_path: path.clone(),
        flats,
        fans,
        record_lip: 0.0,
    };
    cone.record_lip = record_cone_lip(&cone, params)?;
    Ok(cone)
}

/// Sampled Lipschitz record of a coned disk: radial stretches are
/// measured exactly, circumferential stretches through the spherical
/// comparison triangle, both against the Euclidean cone metric on the
/// parameter domain.
fn record_cone_lip(cone: &LoopCone, params: &FillParams) -> Result<f64> {
    let n = cone.apex_chamber.n();
    let tau0 = CartanVector::standard_barycenter(n);
    let apex = -tau0.coords().clone();
    let grid = params.resolution.max(16) * cone.loop_path.arcs.len();
    let total = cone.loop_path.length();
    let mut lip: f64 = 0.0;
    let radials = [0.0, 0.25, 0.5, 0.75];
    for i in 0..grid {
        let s1 = i as f64 / grid as f64;
        let s2 = (i + 1) as f64 / grid as f64;
        let (a1_arc, a1_loc) = cone.loop_path.locate(s1);
        let (a2_arc, a2_loc) = cone.loop_path.locate(s2);
        let p1 = cone.loop_path.arcs[a1_arc].coords_at(a1_loc);
        let p2 = cone.loop_path.arcs[a2_arc].coords_at(a2_loc);
        let mut v1 = p1.as_slice().to_vec();
        let mut v2 = p2.as_slice().to_vec();
        v1.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v2.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let q1 = DVector::from_vec(v1);
        let q2 = DVector::from_vec(v2);
        let a = linalg::unit_angle(&q1, &apex);
        let b = linalg::unit_angle(&q2, &apex);
        let c = cone.loop_path.param_distance(s1, s2);
        // radial stretch of the longer side
        let dom_radial = a.max(b);
        if dom_radial > 0.0 {
            lip = lip.max(1.0);
        }
        for r in radials {
            let bound = cat1_pair_bound(a, b, c, 1.0 - r, 1.0 - r);
            // domain distance: cone metric over the loop at radius (1-r)
            let dom = ((1.0 - r) * c).max(1e-12);
            lip = lip.max(bound / dom);
        }
    }
    let _ = total;
    Ok(lip)
}

/// One face of the cellular map: the anchor, the evaluable map to
/// infinity, and its records.
#[derive(Debug, Clone)]
pub struct FaceData {
    pub verts: Vec<usize>,
    pub anchor: Point,
    pub h_anchor: f64,
    /// Frame of the map's construction: the map's boundary points are
    /// stored relative to this group element (identity for vertices).
    pub frame: SpecialLinear,
    pub map: FaceMap,
    /// Recorded Lipschitz gauge of the face map at infinity.
    pub lip: f64,
    /// Diameter of the face's vertex set in the symmetric space.
    pub diam: f64,
    /// Attained anchor-distance constant `d(x, V(face)) / (diam + 1)`.
    pub anchor_ratio: f64,
}

/// The evaluable map of a face to the boundary at infinity.
#[derive(Debug, Clone)]
pub enum FaceMap {
    Vertex {
        sigma: BoundaryPoint,
        chamber: Chamber,
    },
    Edge {
        path: TitsPath,
    },
    Triangle {
        cone: LoopCone,
        /// Loop-parameter intervals of the three boundary edges, in
        /// vertex order (01, 12, 20-reversed).
        edge_spans: [(f64, f64); 3],
    },
}

impl FaceMap {
    /// Evaluate at barycentric coordinates of the face.
    pub fn eval(&self, bary: &[f64]) -> Result<(BoundaryPoint, Chamber)> {
        match self {
            FaceMap::Vertex { sigma, chamber } => Ok((sigma.clone(), chamber.clone())),
            FaceMap::Edge { path } => {
                let s = bary[1].clamp(0.0, 1.0);
                Ok((path.point_at(s), path.chamber_at(s)))
            }
            FaceMap::Triangle { cone, edge_spans } => {
                let min = bary.iter().cloned().fold(f64::INFINITY, f64::min);
                let r_bd = (1.0 - 3.0 * min).clamp(0.0, 1.0);
                if r_bd < 1e-12 {
                    // the barycenter maps to the apex
                    return cone.eval(0.0, 1.0);
                }
                // boundary point of the triangle along the radial ray
                let w: Vec<f64> = bary.iter().map(|l| (l - (1.0 - r_bd) / 3.0) / r_bd).collect();
                // which edge: the vanishing coordinate
                let mi = (0..3).min_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap()).unwrap();
                let (edge_id, t) = match mi {
                    2 => (0usize, w[1] / (w[0] + w[1]).max(1e-300)),
                    0 => (1usize, w[2] / (w[1] + w[2]).max(1e-300)),
                    _ => (2usize, w[0] / (w[2] + w[0]).max(1e-300)),
                };
                let (lo, hi) = edge_spans[edge_id];
                let s = lo + t.clamp(0.0, 1.0) * (hi - lo);
                cone.eval(s, 1.0 - r_bd)
            }
        }
    }

    /// The length gauge of the map (path/loop length, or zero for a
    /// vertex).
    pub fn length(&self) -> f64 {
        match self {
            FaceMap::Vertex { .. } => 0.0,
            FaceMap::Edge { path } => path.length(),
            FaceMap::Triangle { cone, .. } => cone.loop_path.length(),
        }
    }
}

/// The cellular map data over a finite vertex set on the horosphere:
/// anchors and face maps for every face of the simplex on those
/// vertices.
#[derive(Debug, Clone)]
pub struct OmegaData {
    pub n: usize,
    pub zs: Vec<Point>,
    pub faces: BTreeMap<Vec<usize>, FaceData>,
}

fn face_subsets(m: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for mask in 1u32..(1 << (m + 1)) {
        let s: Vec<usize> = (0..=m).filter(|v| mask & (1 << v) != 0).collect();
        out.push(s);
    }
    out.sort_by_key(|s| (s.len(), s.clone()));
    out
}

/// Stable digest of a point (the bit pattern of its matrix entries).
pub fn point_digest(p: &Point) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in p.matrix().iter() {
        h ^= v.to_bits();
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

fn face_seed(base: u64, zs: &[Point], face: &[usize]) -> u64 {
    let mut h = base;
    for &i in face {
        h ^= point_digest(&zs[i]).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        h = h.rotate_left(17).wrapping_mul(0x1000_0000_01b3);
    }
    h
}

/// Build the cellular map over vertices `z_0..z_m` of the horosphere:
/// vertices map to the barycenters of their opposite chambers with
/// anchors one level up the central ray; higher faces are built by
/// induction, lifting an anchor over all proper faces and coning the
/// boundary sphere into the lifted shadow.
///
/// Every face derives its randomness from the digest of its own vertex
/// points, so a face shared between two builds (an edge appearing both
/// standalone and inside a triangle) is constructed identically — the
/// facial restrictions of the composite map agree across cached
/// instances.
pub fn build_omega_infty(
    zs: &[Point],
    ctx: &HorosphereContext,
    params: &FillParams,
    base_seed: u64,
) -> Result<OmegaData> {
    let pol = NumericPolicy::DEFAULT;
    let n = ctx.cfg.n();
    let m = zs.len() - 1;
    if m + 1 > n - 1 {
        return Err(Error::InvalidConfig(format!(
            "faces of dimension {} exceed the connectivity range of rank {}",
            m,
            n - 1
        )));
    }
    for (i, z) in zs.iter().enumerate() {
        let h = busemann(z, &ctx.cfg)?;
        if h.abs() > pol.level_tol {
            return Err(Error::InvalidConfig(format!(
                "vertex {} is off the horosphere (h = {:.3e})",
                i, h
            )));
        }
    }
    let tau0 = CartanVector::standard_barycenter(n);
    let sec_theta = 1.0 / ctx.theta.cos();
    let mut faces: BTreeMap<Vec<usize>, FaceData> = BTreeMap::new();

    for face in face_subsets(m) {
        if face.len() == 1 {
            let mut rng = crate::sampling::rng_from(face_seed(base_seed, zs, &face));
            let rng = &mut rng;
            let _ = rng;
            let z = &zs[face[0]];
            let (nz, az) = z.na_coordinates()?;
            let chamber = Chamber::from_unipotent(&nz);
            let sigma = chamber.barycenter();
            let anchor = Point::from_group(
                nz.as_group()
                    .mul(&az.as_group())
                    .mul(&PositiveDiagonal::from_log(&tau0.scale(sec_theta)).as_group()),
            );
            let h_anchor = busemann(&anchor, &ctx.cfg)?;
            if (h_anchor - 1.0).abs() > 1e-8 {
                return Err(Error::CalibrationFailure {
                    construction: "build_omega_infty".into(),
                    detail: format!("property 4 at a vertex: h = {}", h_anchor),
                });
            }
            faces.insert(
                face.clone(),
                FaceData {
                    verts: face.clone(),
                    anchor,
                    h_anchor,
                    frame: SpecialLinear::identity(n),
                    map: FaceMap::Vertex { sigma, chamber },
                    lip: 0.0,
                    diam: 0.0,
                    anchor_ratio: sec_theta,
                },
            );
            continue;
        }
        let built = build_face_with_retries(zs, ctx, params, base_seed, &face, m, &faces)?;
        faces.insert(face.clone(), built);
    }
    Ok(OmegaData {
        n,
        zs: zs.to_vec(),
        faces,
    })
}

fn build_face_with_retries(
    zs: &[Point],
    ctx: &HorosphereContext,
    params: &FillParams,
    base_seed: u64,
    face: &[usize],
    m: usize,
    faces: &BTreeMap<Vec<usize>, FaceData>,
) -> Result<FaceData> {
    let mut last = Error::ExhaustedTries(0);
    for attempt in 0..4u64 {
        let seed = face_seed(base_seed ^ attempt.wrapping_mul(0x9e37_79b9), zs, face);
        match build_face(zs, ctx, params, seed, face, m, faces) {
            Ok(fd) => return Ok(fd),
            Err(e @ (Error::CalibrationFailure { .. } | Error::NotOpposite(_))) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(Error::CalibrationFailure {
        construction: "build_omega_infty".into(),
        detail: format!("face {:?}: all reseeded attempts failed; last: {}", face, last),
    })
}

#[allow(clippy::too_many_arguments)]
fn build_face(
    zs: &[Point],
    ctx: &HorosphereContext,
    params: &FillParams,
    seed: u64,
    face: &[usize],
    m: usize,
    faces: &BTreeMap<Vec<usize>, FaceData>,
) -> Result<FaceData> {
    let n = ctx.cfg.n();
    let tau0 = CartanVector::standard_barycenter(n);
    let mut rng = crate::sampling::rng_from(seed);
    let rng = &mut rng;
    {
        // anchor over all proper faces
        let z0 = &zs[face[0]];
        let mut radius: f64 = 0.0;
        let mut diam: f64 = 0.0;
        for i in face {
            for j in face {
                if i < j {
                    diam = diam.max(distance(&zs[*i], &zs[*j])?);
                }
            }
        }
        for sub in face_subsets(m) {
            if sub.len() < face.len() && sub.iter().all(|v| face.contains(v)) {
                let fd = &faces[&sub];
                radius = radius.max(distance(&fd.anchor, z0)?);
            }
        }
        // grow the enlargement constant until the lifted point passes
        // both the sampled check and the explicit anchor conditions
        let mut c1 = params.c_enlarge;
        let mut x0_found: Option<Point> = None;
        'lift: for _ in 0..9 {
            let cand = match enlarge(z0, &tau0, radius + 1.0, c1, params.check_samples, rng) {
                Ok(p) => p,
                Err(Error::CalibrationFailure { .. }) => {
                    c1 *= 1.6;
                    continue;
                }
                Err(e) => return Err(e),
            };
            for sub in face_subsets(m) {
                if sub.len() < face.len() && sub.iter().all(|v| face.contains(v)) {
                    let fd = &faces[&sub];
                    let region = WeylChamberRegion::new(&fd.anchor)?;
                    if distance_to_weyl_chamber(&cand, &region)? >= 1.0 {
                        c1 *= 1.6;
                        continue 'lift;
                    }
                    // sampled shadow inclusion of the sub-anchor
                    let (ns, as_) = fd.anchor.na_coordinates()?;
                    let ps = ns.as_group().mul(&as_.as_group());
                    for _ in 0..params.check_samples {
                        let u = crate::sampling::random_unipotent_in_ball(rng, n, 1.0);
                        let ch = crate::chambers::Chamber::from_unipotent(&u).translate(&ps);
                        if rho(&cand, &ch)?.rho >= 1.0 {
                            c1 *= 1.6;
                            continue 'lift;
                        }
                    }
                }
            }
            x0_found = Some(cand);
            break;
        }
        let x0 = x0_found.ok_or_else(|| Error::CalibrationFailure {
            construction: "build_omega_infty".into(),
            detail: format!("enlargement never certified up to c1 = {:.2}", c1),
        })?;
        // boundary sphere of the face
        let alpha = match face.len() {
            2 => {
                let (s0, c0) = vertex_map(faces, &[face[0]])?;
                let (s1, c1) = vertex_map(faces, &[face[1]])?;
                PiecewiseGeodesicSphere::Zero {
                    points: [(s0, c0), (s1, c1)],
                }
            }
            3 => {
                let e01 = edge_path(faces, &[face[0], face[1]])?
                    .translate(&faces[&vec![face[0], face[1]]].frame)?;
                let e12 = edge_path(faces, &[face[1], face[2]])?
                    .translate(&faces[&vec![face[1], face[2]]].frame)?;
                let e20 = edge_path(faces, &[face[0], face[2]])?
                    .translate(&faces[&vec![face[0], face[2]]].frame)?
                    .reversed()?;
                let mut arcs = Vec::new();
                arcs.extend(e01.arcs.iter().cloned());
                arcs.extend(e12.arcs.iter().cloned());
                arcs.extend(e20.arcs.iter().cloned());
                PiecewiseGeodesicSphere::One {
                    path: TitsPath::new(arcs, true)?,
                }
            }
            _ => {
                return Err(Error::InvalidConfig(
                    "faces above dimension two are outside the build range".into(),
                ))
            }
        };
        let (anchor, fill, frame, record) = contract_in_shadow(&alpha, &x0, &tau0, params, rng)?;
        let h_anchor = busemann(&anchor, &ctx.cfg)?;
        // ordering and level properties against the proper faces
        for sub in face_subsets(m) {
            if sub.len() < face.len() && sub.iter().all(|v| face.contains(v)) {
                let fd = &faces[&sub];
                if h_anchor < fd.h_anchor - 1e-6 {
                    return Err(Error::CalibrationFailure {
                        construction: "build_omega_infty".into(),
                        detail: format!(
                            "property 3: h({:?}) = {:.4} below h({:?}) = {:.4}",
                            face, h_anchor, sub, fd.h_anchor
                        ),
                    });
                }
                let region = WeylChamberRegion::new(&fd.anchor)?;
                let dc = distance_to_weyl_chamber(&anchor, &region)?;
                if dc >= 1.0 {
                    return Err(Error::CalibrationFailure {
                        construction: "build_omega_infty".into(),
                        detail: format!("property 3: anchor outside the unit cone neighborhood ({:.3})", dc),
                    });
                }
            }
        }
        if h_anchor < 1.0 - 1e-8 {
            return Err(Error::CalibrationFailure {
                construction: "build_omega_infty".into(),
                detail: format!("property 4: h = {}", h_anchor),
            });
        }
        let mut anchor_dist = f64::INFINITY;
        for i in face {
            anchor_dist = anchor_dist.min(distance(&anchor, &zs[*i])?);
        }
        let anchor_ratio = anchor_dist / (diam + 1.0);
        if anchor_ratio > params.anchor_cap {
            return Err(Error::CalibrationFailure {
                construction: "build_omega_infty".into(),
                detail: format!("property 1: anchor ratio {:.3} above cap", anchor_ratio),
            });
        }
        let map = match fill {
            InfinityFill::Path(path) => FaceMap::Edge { path },
            InfinityFill::Cone(cone) => {
                // the loop concatenates the edges in order; spans by
                // accumulated length
                let spans = triangle_edge_spans(&cone.loop_path, faces, face)?;
                FaceMap::Triangle {
                    cone,
                    edge_spans: spans,
                }
            }
        };
        Ok(FaceData {
            verts: face.to_vec(),
            anchor,
            h_anchor,
            frame,
            map,
            lip: record.lip,
            diam,
            anchor_ratio,
        })
    }
}

fn vertex_map(
    faces: &BTreeMap<Vec<usize>, FaceData>,
    key: &[usize],
) -> Result<(BoundaryPoint, Chamber)> {
    match &faces[&key.to_vec()].map {
        FaceMap::Vertex { sigma, chamber } => Ok((sigma.clone(), chamber.clone())),
        _ => Err(Error::NumericalFailure("expected a vertex map".into())),
    }
}

fn edge_path(faces: &BTreeMap<Vec<usize>, FaceData>, key: &[usize]) -> Result<TitsPath> {
    match &faces[&key.to_vec()].map {
        FaceMap::Edge { path } => Ok(path.clone()),
        _ => Err(Error::NumericalFailure("expected an edge map".into())),
    }
}

fn triangle_edge_spans(
    loop_path: &TitsPath,
    faces: &BTreeMap<Vec<usize>, FaceData>,
    face: &[usize],
) -> Result<[(f64, f64); 3]> {
    let l01 = faces[&vec![face[0], face[1]]].map.length();
    let l12 = faces[&vec![face[1], face[2]]].map.length();
    let l20 = faces[&vec![face[0], face[2]]].map.length();
    let total = loop_path.length();
    if (total - (l01 + l12 + l20)).abs() > 1e-6 * total {
        return Err(Error::NumericalFailure(
            "edge lengths do not add up to the loop length".into(),
        ));
    }
    let a = l01 / total;
    let b = (l01 + l12) / total;
    Ok([(0.0, a), (a, b), (b, 1.0)])
}

/// Iterated geodesic coning along a flag of anchors: the last weight is
/// the fraction toward the last anchor, recursively.
pub fn eval_flag_coning(anchors: &[Point], mu: &[f64]) -> Result<Point> {
    if anchors.len() == 1 {
        return Ok(anchors[0].clone());
    }
    let j = anchors.len() - 1;
    let s = mu[j].clamp(0.0, 1.0);
    let rest: f64 = mu[..j].iter().sum();
    if rest < 1e-14 {
        return Ok(anchors[j].clone());
    }
    let sub_mu: Vec<f64> = mu[..j].iter().map(|x| x / rest).collect();
    let sub = eval_flag_coning(&anchors[..j], &sub_mu)?;
    spd_geodesic(&sub, &anchors[j], s)
}

/// The value of the coning map on the barycentric subdivision at a
/// located exploded point: anchors along the flag, coned.
pub fn eval_f(od: &OmegaData, face: &[usize], flag: &[Vec<usize>], mu: &[f64]) -> Result<Point> {
    let anchors: Vec<Point> = flag
        .iter()
        .map(|local| {
            let global: Vec<usize> = local.iter().map(|&i| face[i]).collect();
            od.faces[&global].anchor.clone()
        })
        .collect();
    eval_flag_coning(&anchors, mu)
}

/// Evaluate the composite map: locate the exploded cell, send the face
/// coordinate to infinity, cone the anchors along the flag coordinate,
/// check the membership of the resulting pair, and project onto the
/// horosphere.
pub fn omega_eval(
    od: &OmegaData,
    face: &[usize],
    bary: &[f64],
    ctx: &HorosphereContext,
) -> Result<Point> {
    let d = face.len() - 1;
    let ex = build_exploded(d)?;
    let loc = ex.locate(bary)?;
    let cell = &ex.cells[loc.cell];
    let p1_face_global: Vec<usize> = cell.face.iter().map(|&i| face[i]).collect();
    // restrict the lambda coordinate to the sub-face barycentrics
    let fd = &od.faces[&p1_face_global];
    let (sigma, chamber) = fd.map.eval(&loc.lambda)?;
    let y = eval_f(od, face, &cell.flag, &loc.mu)?;
    let h = busemann(&y, &ctx.cfg)?;
    if h < 1.0 - 1e-6 {
        return Err(Error::MembershipViolation(format!(
            "coned anchor at level {:.4} below the admissible band",
            h
        )));
    }
    // pair in the face map's construction frame: the ray machinery then
    // runs at moderate conditioning regardless of anchor heights
    let y_rel = y.translate_by_inverse_of(&fd.frame)?;
    // Membership of the pair. Gauges are representable in doubles only
    // up to a height cutoff (noise in the point's unipotent part is
    // amplified exponentially with height); above it the construction
    // certificates from the based frames are the guarantee.
    let h_rel = busemann(&y_rel, &ctx.cfg)?;
    const GAUGE_TRUST_HEIGHT: f64 = 14.0;
    let flag_span = cell
        .flag
        .iter()
        .map(|local| {
            let global: Vec<usize> = local.iter().map(|&i| face[i]).collect();
            od.faces[&global].h_anchor
        })
        .fold(0.0f64, f64::max);
    let trusted = h_rel <= GAUGE_TRUST_HEIGHT && flag_span <= GAUGE_TRUST_HEIGHT;
    match rho(&y_rel, &chamber) {
        Ok(sq) if sq.rho < ctx.rho => {}
        Ok(sq) if trusted => {
            return Err(Error::MembershipViolation(format!(
                "pair leaves the admissible set: gauge {:.3} at cap {:.3}",
                sq.rho, ctx.rho
            )));
        }
        Err(Error::NotOpposite(detail)) if trusted => {
            return Err(Error::MembershipViolation(format!(
                "pair degenerate within the trusted band: {}",
                detail
            )));
        }
        Ok(_) | Err(Error::NotOpposite(_)) => {}
        Err(e) => return Err(e),
    }
    let h_frame = busemann(&Point::from_group(fd.frame.clone()), &ctx.cfg)?;
    let (z_rel, _) = crate::horosphere::project_to_level(&y_rel, &sigma, ctx, -h_frame)?;
    Ok(z_rel.translate(&fd.frame))
}

/// Grid verification of the coning map's shadow stability: chambers in
/// the unit shadow of the flag's smallest anchor stay within the
/// context gauge at every coned point.
pub fn verify_f_shadow_stability(
    od: &OmegaData,
    ctx: &HorosphereContext,
    grid: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for fd in od.faces.values() {
        if fd.verts.len() == 1 {
            continue;
        }
        // flags delta_0 c delta (vertex chain suffices at desk scale)
        let face = &fd.verts;
        for v in face {
            let sub = vec![*v];
            let x0 = &od.faces[&sub].anchor;
            let (n0, a0) = x0.na_coordinates()?;
            let p0 = n0.as_group().mul(&a0.as_group());
            for g in 0..=grid {
                let s = g as f64 / grid as f64;
                let anchors = [od.faces[&sub].anchor.clone(), fd.anchor.clone()];
                let y = eval_flag_coning(&anchors, &[1.0 - s, s])?;
                let u = sampling::random_unipotent_in_ball(rng, od.n, 1.0);
                let ch = Chamber::from_unipotent(&u).translate(&p0);
                let gauge = rho(&y, &ch)?.rho;
                worst = worst.max(gauge);
                if gauge >= ctx.rho {
                    return Err(Error::CalibrationFailure {
                        construction: "coning map".into(),
                        detail: format!(
                            "shadow stability: gauge {:.3} exceeds the context cap {:.3}",
                            gauge, ctx.rho
                        ),
                    });
                }
            }
        }
    }
    Ok(worst)
}
