//! Piecewise-geodesic spheres and paths at infinity.
//!
//! Arcs are spherical geodesics inside named flats, stored by their
//! direction coordinates in the flat's frame. A path is a chain of
//! arcs with matching endpoints; a 0-sphere is a pair of boundary
//! points with their chambers; a 1-sphere is a closed path.

use nalgebra::DVector;

use crate::chambers::{flat_chamber, Chamber};
use crate::error::{Error, Result};
use crate::liecore::CartanVector;
use crate::linalg;
use crate::symspace::{BoundaryPoint, Flat};

/// A spherical geodesic arc inside a flat, possibly broken at a chosen
/// midpoint when the endpoints are antipodal (the two legs are then
/// quarter-to-half circles and every stored leg is strictly shorter
/// than a half turn).
#[derive(Debug, Clone)]
pub struct TitsArc {
    pub flat: Flat,
    pub from: DVector<f64>,
    pub to: DVector<f64>,
    pub via: Option<DVector<f64>>,
}

impl TitsArc {
    pub fn new(flat: Flat, from: DVector<f64>, to: DVector<f64>) -> Result<TitsArc> {
        let ang = linalg::unit_angle(&from, &to);
        if ang >= std::f64::consts::PI - 1e-9 {
            let via = perp_direction(&from)?;
            return Ok(TitsArc {
                flat,
                from,
                to,
                via: Some(via),
            });
        }
        Ok(TitsArc {
            flat,
            from,
            to,
            via: None,
        })
    }

    pub fn with_via(flat: Flat, from: DVector<f64>, via: DVector<f64>, to: DVector<f64>) -> TitsArc {
        TitsArc {
            flat,
            from,
            to,
            via: Some(via),
        }
    }

    /// Arc length in the angular metric.
    pub fn length(&self) -> f64 {
        match &self.via {
            None => linalg::unit_angle(&self.from, &self.to),
            Some(v) => linalg::unit_angle(&self.from, v) + linalg::unit_angle(v, &self.to),
        }
    }

    /// Direction coordinates at parameter `s` in `[0, 1]`
    /// (length-proportional along the possibly broken arc).
    pub fn coords_at(&self, s: f64) -> DVector<f64> {
        match &self.via {
            None => linalg::slerp(&self.from, &self.to, s),
            Some(v) => {
                let a1 = linalg::unit_angle(&self.from, v);
                let a2 = linalg::unit_angle(v, &self.to);
                let total = a1 + a2;
                let drawn = s * total;
                if drawn <= a1 {
                    linalg::slerp(&self.from, v, if a1 > 0.0 { drawn / a1 } else { 0.0 })
                } else {
                    linalg::slerp(v, &self.to, if a2 > 0.0 { (drawn - a1) / a2 } else { 1.0 })
                }
            }
        }
    }

    /// Boundary point at parameter `s`.
    pub fn point_at(&self, s: f64) -> BoundaryPoint {
        self.flat.boundary_point(
            &CartanVector::project(self.coords_at(s)).normalized(),
        )
    }

    /// Chamber of the flat containing the direction at `s` (stable
    /// ordering at walls).
    pub fn chamber_at(&self, s: f64) -> Chamber {
        let w = self.coords_at(s);
        flat_chamber(&self.flat, &descending_order(&w))
    }
}

impl TitsArc {
    /// Translate the carrying flat; coordinates are frame-relative and
    /// unchanged.
    pub fn translate(&self, g: &crate::liecore::SpecialLinear) -> Result<TitsArc> {
        Ok(TitsArc {
            flat: self.flat.translate(g)?,
            from: self.from.clone(),
            to: self.to.clone(),
            via: self.via.clone(),
        })
    }

    /// Translate the carrying flat by the inverse of `g`.
    pub fn translate_by_inverse_of(&self, g: &crate::liecore::SpecialLinear) -> Result<TitsArc> {
        let w = linalg::rel_solve(g.entries(), self.flat.frame().entries())?;
        Ok(TitsArc {
            flat: Flat::from_basis(w)?,
            from: self.from.clone(),
            to: self.to.clone(),
            via: self.via.clone(),
        })
    }
}

impl TitsPath {
    pub fn translate(&self, g: &crate::liecore::SpecialLinear) -> Result<TitsPath> {
        let arcs: Result<Vec<TitsArc>> = self.arcs.iter().map(|a| a.translate(g)).collect();
        TitsPath::new(arcs?, self.closed)
    }
}

/// Stable descending argsort of a coordinate vector.
pub fn descending_order(w: &DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));
    idx
}

/// A deterministic unit direction orthogonal to `v` in the traceless
/// diagonal space (used to break antipodal geodesics).
pub fn perp_direction(v: &DVector<f64>) -> Result<DVector<f64>> {
    let n = v.len();
    for k in 0..n.saturating_sub(1) {
        // traceless basis vector e_k - e_{k+1}
        let mut b = DVector::<f64>::zeros(n);
        b[k] = 1.0;
        b[k + 1] = -1.0;
        let proj = &b - v * v.dot(&b);
        let nrm = proj.norm();
        if nrm > 1e-6 {
            return Ok(proj / nrm);
        }
    }
    Err(Error::DegenerateChamber(
        "no orthogonal direction available (rank too small)".into(),
    ))
}

/// A chain of arcs with matching endpoints, parametrized by
/// length-proportional `s` in `[0, 1]`; `closed` paths identify the two
/// ends.
#[derive(Debug, Clone)]
pub struct TitsPath {
    pub arcs: Vec<TitsArc>,
    pub closed: bool,
    cum: Vec<f64>,
    total: f64,
}

impl TitsPath {
    pub fn new(arcs: Vec<TitsArc>, closed: bool) -> Result<TitsPath> {
        if arcs.is_empty() {
            return Err(Error::InvalidConfig("empty path".into()));
        }
        let mut cum = vec![0.0];
        let mut total = 0.0;
        for a in &arcs {
            total += a.length();
            cum.push(total);
        }
        if total <= 0.0 {
            return Err(Error::InvalidConfig("path of zero length".into()));
        }
        Ok(TitsPath {
            arcs,
            closed,
            cum,
            total,
        })
    }

    pub fn length(&self) -> f64 {
        self.total
    }

    /// Locate parameter `s`: which arc and the local parameter.
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let s = if self.closed {
            s.rem_euclid(1.0)
        } else {
            s.clamp(0.0, 1.0)
        };
        let drawn = s * self.total;
        for i in 0..self.arcs.len() {
            if drawn <= self.cum[i + 1] || i == self.arcs.len() - 1 {
                let len = self.cum[i + 1] - self.cum[i];
                let local = if len > 0.0 {
                    ((drawn - self.cum[i]) / len).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                return (i, local);
            }
        }
        (self.arcs.len() - 1, 1.0)
    }

    pub fn point_at(&self, s: f64) -> BoundaryPoint {
        let (i, local) = self.locate(s);
        self.arcs[i].point_at(local)
    }

    pub fn chamber_at(&self, s: f64) -> Chamber {
        let (i, local) = self.locate(s);
        self.arcs[i].chamber_at(local)
    }

    /// Path distance between two parameters (an upper bound for the
    /// angular metric between the corresponding points).
    pub fn param_distance(&self, s1: f64, s2: f64) -> f64 {
        let d = (s1 - s2).abs();
        let d = if self.closed { d.min(1.0 - d) } else { d };
        d * self.total
    }
}

/// A piecewise-geodesic sphere at infinity of dimension zero or one.
#[derive(Debug, Clone)]
pub enum PiecewiseGeodesicSphere {
    /// Two boundary points with their chambers.
    Zero {
        points: [(BoundaryPoint, Chamber); 2],
    },
    /// A closed chain of arcs.
    One { path: TitsPath },
}

impl PiecewiseGeodesicSphere {
    pub fn dim(&self) -> usize {
        match self {
            PiecewiseGeodesicSphere::Zero { .. } => 0,
            PiecewiseGeodesicSphere::One { .. } => 1,
        }
    }
}
