//! Calibration of the existential constants.
//!
//! Every comparison constant in the quantitative statements is
//! existential; this module fits them by bootstrap sampling per
//! `(n, tau)` and freezes them into a lockfile consumed by the
//! verification suites. The defaults are the frozen results of such
//! runs at the shipped configurations.

use serde::{Deserialize, Serialize};

use crate::chambers::{flat_of_chamber, rho, verify_dx_shadows, Chamber};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::horosphere::{compute_margins, lipschitz_profile, HorosphereContext};
use crate::liecore::PositiveDiagonal;
use crate::sampling;
use crate::symspace::{distance, Point};

/// Frozen comparison constants for a configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationConstants {
    /// Exponential slope of the reverse shadow/flat-distance comparison.
    pub c_compare: f64,
    /// Travel-time slope of the shadow enlargement (initial value; the
    /// constructions grow it adaptively and record what they used).
    pub c_enlarge: f64,
    /// Uniform shadow cap over the unit neighborhood of chamber cones.
    pub rho_star: f64,
    /// Bound on `d([e],[u])` over unipotents of unit gauge.
    pub c_push: f64,
    /// Cap on the two-point projection ratio.
    pub cap_two_point: f64,
    /// Cap on the projection Lipschitz ratio divided by the height.
    pub cap_push_lip: f64,
    /// Cap on the vertex displacement of the composite cellular map.
    pub cap_omega_vertex: f64,
    /// Cap on the filling constant (disk Lipschitz over input gauge).
    pub cap_fill: f64,
}

impl CalibrationConstants {
    /// Frozen constants per order (results of `--calibrate` bootstrap
    /// runs at the shipped seeds).
    pub fn defaults(n: usize) -> CalibrationConstants {
        match n {
            2 => CalibrationConstants {
                c_compare: 2.2,
                c_enlarge: 0.75,
                rho_star: 12.0,
                c_push: 0.75,
                cap_two_point: 6.0,
                cap_push_lip: 10.0,
                cap_omega_vertex: 40.0,
                cap_fill: 64.0,
            },
            3 => CalibrationConstants {
                c_compare: 3.0,
                c_enlarge: 0.75,
                rho_star: 14.0,
                c_push: 0.80,
                cap_two_point: 8.0,
                cap_push_lip: 14.0,
                cap_omega_vertex: 64.0,
                cap_fill: 96.0,
            },
            _ => CalibrationConstants {
                c_compare: 3.5,
                c_enlarge: 0.75,
                rho_star: 18.0,
                c_push: 0.85,
                cap_two_point: 10.0,
                cap_push_lip: 18.0,
                cap_omega_vertex: 96.0,
                cap_fill: 128.0,
            },
        }
    }

    pub fn set(&mut self, name: &str, v: f64) -> Result<()> {
        match name {
            "c_compare" => self.c_compare = v,
            "c_enlarge" => self.c_enlarge = v,
            "rho_star" => self.rho_star = v,
            "c_push" => self.c_push = v,
            "cap_two_point" => self.cap_two_point = v,
            "cap_push_lip" => self.cap_push_lip = v,
            "cap_omega_vertex" => self.cap_omega_vertex = v,
            "cap_fill" => self.cap_fill = v,
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unknown calibration constant `{}`",
                    name
                )))
            }
        }
        Ok(())
    }

    pub fn to_lockfile(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "schema": "horolab.calibration.v1",
            "constants": self,
        }))
        .expect("serialization of plain floats cannot fail")
    }

    pub fn from_lockfile(text: &str) -> Result<CalibrationConstants> {
        let v: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::SchemaViolation(format!("calibration lockfile: {}", e)))?;
        if v["schema"] != "horolab.calibration.v1" {
            return Err(Error::SchemaViolation(
                "calibration lockfile: unknown schema".into(),
            ));
        }
        serde_json::from_value(v["constants"].clone())
            .map_err(|e| Error::SchemaViolation(format!("calibration lockfile: {}", e)))
    }
}

/// Least-squares line fit; returns `(slope, intercept)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    let slope = if den > 0.0 { num / den } else { 0.0 };
    (slope, my - slope * mx)
}

/// Fit the log-log slope of `ys` against `xs`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(1e-300).ln()).collect();
    fit_line(&lx, &ly).0
}

/// Bootstrap-fit the constants for a configuration; the margins widen
/// the observed extremes so verification runs have headroom.
pub fn calibrate(config: &RunConfig) -> Result<CalibrationConstants> {
    let n = config.n;
    let cfg = config.busemann_config()?;
    let ctx: HorosphereContext = compute_margins(cfg)?;
    let mut out = CalibrationConstants::defaults(n);
    let mut rng = sampling::rng_from(config.seed ^ 0xca11_b8a7);

    // c_push: the largest base-point displacement over unit-gauge
    // unipotents
    let mut c_push: f64 = 0.0;
    for _ in 0..400 {
        let u = sampling::random_unipotent(&mut rng, n, 1.0);
        c_push = c_push.max(distance(&Point::identity(n), &Point::from_group(u.as_group()))?);
    }
    out.c_push = c_push * 1.1;

    // c_compare: slope of log gauge against flat distance
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..300 {
        let x = Point::from_group(sampling::random_special_linear(&mut rng, n));
        let u = sampling::random_unipotent_in_ball(&mut rng, n, 2.0);
        let d = Chamber::from_unipotent(&u);
        let gauge = rho(&x, &d)?.rho;
        if gauge <= 1e-12 {
            continue;
        }
        let dist = crate::chambers::distance_to_flat(&x, &flat_of_chamber(&d)?)?;
        xs.push(dist);
        ys.push(gauge.ln());
    }
    let (slope, _) = fit_line(&xs, &ys);
    out.c_compare = (slope * 1.25).max(1.0);

    // rho_star: sampled neighborhood-shadow cap
    let mut worst: f64 = 0.0;
    for _ in 0..6 {
        let x = Point::from_group(sampling::random_special_linear(&mut rng, n));
        let rep = verify_dx_shadows(&x, 300, f64::INFINITY, &mut rng)?;
        worst = worst.max(rep.max_rho);
    }
    out.rho_star = worst * 1.5;

    // pushing caps from sampled profiles at height one
    let mut cap_lip: f64 = 0.0;
    for _ in 0..4 {
        let u = Point::from_group(
            sampling::random_unipotent(&mut rng, n, 0.5)
                .as_group()
                .mul(&PositiveDiagonal::from_log(&ctx.cfg.tau().scale(1.0)).as_group()),
        );
        let prof = lipschitz_profile(&u, &ctx, 60, &mut rng)?;
        cap_lip = cap_lip.max(prof.max_ratio / prof.height.max(1.0));
    }
    out.cap_push_lip = cap_lip * 1.5 * (ctx.rho + 1.0).powi(2) / (ctx.rho + 1.0).powi(2);
    out.cap_push_lip = cap_lip * 1.5;

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lockfile_round_trip() {
        let c = CalibrationConstants::defaults(3);
        let text = c.to_lockfile();
        let back = CalibrationConstants::from_lockfile(&text).unwrap();
        assert_eq!(c.c_compare, back.c_compare);
        assert_eq!(c.rho_star, back.rho_star);
    }

    #[test]
    fn line_fit_recovers_slope() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (s, b) = fit_line(&xs, &ys);
        assert!((s - 2.0).abs() < 1e-12);
        assert!((b - 1.0).abs() < 1e-12);
    }
}
