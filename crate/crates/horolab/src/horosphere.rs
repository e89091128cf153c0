//! The horosphere `Z = h^{-1}(0)`, projection of shadow directions onto
//! `Z`, the product metric on direction/point pairs, and a retraction
//! of neighborhoods of `Z` onto `Z`.
//!
//! Directions in chambers opposite the standard one make an angle
//! strictly larger than a right angle with the center, so the Busemann
//! function is eventually strictly decreasing along rays toward them
//! and crosses zero exactly once; the crossing parameter is found by
//! bracket expansion and bisection on the concave tail.

use rand_chacha::ChaCha8Rng;

use crate::chambers::{self, Chamber};
use crate::error::{Error, Result};
use crate::liecore::{chamber_extreme_rays, CartanVector, PositiveDiagonal};
use crate::linalg;
use crate::policy::NumericPolicy;
use crate::sampling;
use crate::symspace::{
    busemann, distance, ray_to_boundary, BoundaryPoint, BusemannConfig, Point,
};

/// Margins and calibrated constants of a horosphere configuration.
#[derive(Debug, Clone)]
pub struct HorosphereContext {
    pub cfg: BusemannConfig,
    /// Angular gap: the chamber sits inside the ball of radius
    /// `pi/2 - epsilon` around the center.
    pub epsilon: f64,
    /// Angle between the chamber barycenter and the center.
    pub theta: f64,
    /// Shadow gauge cap for admissible direction/point pairs.
    pub rho: f64,
    /// Calibrated bound on `d([e],[n])` over unipotents of unit gauge.
    pub c_push: f64,
    /// Band `|h| <= r_max` on which the retraction is exercised.
    pub r_max: f64,
}

/// Compute the angular margins of a center direction: the largest angle
/// from the center to the closed chamber is attained at an extreme ray
/// of the chamber cone, so both margins come from finitely many inner
/// products, not numerical optimization.
pub fn compute_margins(cfg: BusemannConfig) -> Result<HorosphereContext> {
    let n = cfg.n();
    let tau = cfg.tau().clone();
    let mut max_angle = 0.0f64;
    for ray in chamber_extreme_rays(n) {
        max_angle = max_angle.max(linalg::unit_angle(ray.coords(), tau.coords()));
    }
    let epsilon = std::f64::consts::FRAC_PI_2 - max_angle;
    if epsilon <= 1e-9 {
        return Err(Error::DegenerateChamber(format!(
            "center leaves only {:.3e} of angular margin",
            epsilon
        )));
    }
    let bary = CartanVector::standard_barycenter(n);
    let theta = linalg::unit_angle(bary.coords(), tau.coords());
    Ok(HorosphereContext {
        cfg,
        epsilon,
        theta,
        rho: 4.0,
        c_push: 0.75,
        r_max: 16.0,
    })
}

/// The point where the ray from `u` toward `sigma` crosses the
/// horosphere, and the travel time; `sigma` must point out of the
/// horoball (its chamber opposite the standard one).
///
/// Bracket expansion followed by bisection to `1e-10` in the ray
/// parameter; the Busemann value along the ray is concave, so the
/// decreasing tail is bracketable and the crossing is unique.
pub fn project_to_z(
    u: &Point,
    sigma: &BoundaryPoint,
    ctx: &HorosphereContext,
) -> Result<(Point, f64)> {
    project_to_level(u, sigma, ctx, 0.0)
}

/// The crossing of an arbitrary Busemann level along the ray from `u`
/// toward `sigma` (the workhorse behind [`project_to_z`]; evaluating in
/// a translated frame shifts the target level by the frame's own).
///
/// Long descents run in stages: the ray from an intermediate crossing
/// toward the same boundary point is exactly the tail of the same
/// geodesic, and restarting refactors the representative, so each stage
/// works at benign conditioning no matter how deep the source sits.
pub fn project_to_level(
    u: &Point,
    sigma: &BoundaryPoint,
    ctx: &HorosphereContext,
    level: f64,
) -> Result<(Point, f64)> {
    let pol = NumericPolicy::DEFAULT;
    let h_u = busemann(u, &ctx.cfg)? - level;
    if h_u < -pol.level_tol {
        return Err(Error::MembershipViolation(format!(
            "projection source must sit above the target level, h - level = {}",
            h_u
        )));
    }
    if h_u.abs() <= pol.level_tol {
        let ray = ray_to_boundary(u, sigma)?;
        return Ok((ray.at(0.0), 0.0));
    }
    const STAGE: f64 = 6.0;
    let n = u.n();
    let mut cur = u.clone();
    let mut sig = sigma.clone();
    let mut lvl = level;
    let mut total_t = 0.0f64;
    // accumulated horospherical coordinates of the frame product; the
    // composition (n, a)(n', a') = (n * a n' a^{-1}, a a') keeps the
    // diagonal part an exact product, so the level bookkeeping never
    // drifts no matter how many stages run
    let mut n_tot = crate::liecore::UnitUpper::identity(n);
    let mut a_tot = crate::liecore::PositiveDiagonal::identity(n);
    let compose = |nt: &mut crate::liecore::UnitUpper,
                       at: &mut crate::liecore::PositiveDiagonal,
                       ni: &crate::liecore::UnitUpper,
                       ai: &crate::liecore::PositiveDiagonal| {
        let d = at.diag().clone();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| ni.entries()[(i, j)] * d[i] / d[j]);
        let conj = crate::liecore::UnitUpper::new(m).expect("diagonal conjugate stays unipotent");
        *nt = nt.mul(&conj);
        let prod = nalgebra::DVector::from_fn(n, |i, _| at.diag()[i] * ai.diag()[i]);
        *at = crate::liecore::PositiveDiagonal::new_unchecked(prod);
    };
    for _stage in 0..64 {
        // re-base into the current point's horospherical frame: the
        // stage then starts at height zero with moderate data
        let (ncur, acur) = cur.na_coordinates()?;
        let p = ncur.as_group().mul(&acur.as_group());
        let hp = acur.log().dot(ctx.cfg.tau());
        sig = sig.translate_by_inverse_of(&p)?;
        lvl -= hp;
        cur = Point::identity(n);
        compose(&mut n_tot, &mut a_tot, &ncur, &acur);
        let drop = -lvl;
        let target = if drop > STAGE { lvl + (drop - STAGE) } else { lvl };
        let (next, t) = level_stage(&cur, &sig, ctx, target)?;
        total_t += t;
        cur = next;
        if (target - lvl).abs() < 1e-300 {
            let (nf, af) = cur.na_coordinates()?;
            compose(&mut n_tot, &mut a_tot, &nf, &af);
            let z = Point::from_group(n_tot.as_group().mul(&a_tot.as_group()));
            let h_z = busemann(&z, &ctx.cfg)? - level;
            if h_z.abs() > pol.level_tol {
                return Err(Error::NumericalFailure(format!(
                    "crossing left residual h = {:.3e}",
                    h_z
                )));
            }
            return Ok((z, total_t));
        }
    }
    Err(Error::NoCrossing("staged descent did not terminate".into()))
}

fn level_stage(
    u: &Point,
    sigma: &BoundaryPoint,
    ctx: &HorosphereContext,
    level: f64,
) -> Result<(Point, f64)> {
    let pol = NumericPolicy::DEFAULT;
    let h_u = busemann(u, &ctx.cfg)? - level;
    let ray = ray_to_boundary(u, sigma)?;
    let h_at = |t: f64| -> Result<f64> { Ok(busemann(&ray.at(t), &ctx.cfg)? - level) };
    if h_u.abs() <= pol.level_tol {
        return Ok((ray.at(0.0), 0.0));
    }
    let t_max = 10.0 * (h_u + ctx.rho + 1.0) / ctx.epsilon.sin();
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    loop {
        let h_hi = h_at(hi)?;
        if h_hi < 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > t_max {
            return Err(Error::NoCrossing(format!(
                "no sign change before t_max = {:.3} (h(u) - level = {:.3})",
                t_max, h_u
            )));
        }
    }
    while hi - lo > pol.root_find_tol {
        let mid = 0.5 * (lo + hi);
        if h_at(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok((ray.at(t), t))
}

/// Retraction of a neighborhood of the horosphere onto it: slide along
/// the geodesic line through the point asymptotic to the center (the
/// Busemann gradient line) to the zero level. Exact in horospherical
/// coordinates: `[n a] -> [n a exp(-h tau)]`; fixes `Z` pointwise and
/// is idempotent.
pub fn retract_to_z(x: &Point, ctx: &HorosphereContext) -> Result<Point> {
    let h = busemann(x, &ctx.cfg)?;
    if h.abs() > ctx.r_max {
        return Err(Error::MembershipViolation(format!(
            "point at level {} outside the retraction band {}",
            h, ctx.r_max
        )));
    }
    let (nx, ax) = x.na_coordinates()?;
    let slide = PositiveDiagonal::from_log(&ctx.cfg.tau().scale(-h));
    Ok(Point::from_group(
        nx.as_group().mul(&ax.as_group()).mul(&slide.as_group()),
    ))
}

/// A pair of a shadow direction and a deep point: `sigma` lies in the
/// carried chamber, the chamber's gauge at `x` is below the context
/// cap, and `h(x) >= 1`.
#[derive(Debug, Clone)]
pub struct YPoint {
    pub sigma: BoundaryPoint,
    pub chamber: Chamber,
    pub x: Point,
}

impl YPoint {
    pub fn new(
        sigma: BoundaryPoint,
        chamber: Chamber,
        x: Point,
        ctx: &HorosphereContext,
    ) -> Result<Self> {
        let pol = NumericPolicy::DEFAULT;
        let h = busemann(&x, &ctx.cfg)?;
        if h < 1.0 - pol.level_tol {
            return Err(Error::MembershipViolation(format!(
                "pair needs h(x) >= 1, got {}",
                h
            )));
        }
        let gauge = chambers::rho(&x, &chamber)?.rho;
        if gauge >= ctx.rho {
            return Err(Error::MembershipViolation(format!(
                "chamber gauge {:.3} exceeds the context cap {:.3}",
                gauge, ctx.rho
            )));
        }
        Ok(YPoint { sigma, chamber, x })
    }
}

/// Angular distance between two shadow directions, computed inside a
/// common flat: the chamber's own flat when the flags agree, or the
/// flat spanned by the chambers when they are opposite.
pub fn shadow_angle(
    s1: &BoundaryPoint,
    c1: &Chamber,
    s2: &BoundaryPoint,
    c2: &Chamber,
) -> Result<f64> {
    let flat = if c1.same_flag(c2, 1e-8) {
        chambers::flat_of_chamber(c1)?
    } else if chambers::are_opposite(c1, c2) {
        chambers::flat_spanned(c1, c2)?
    } else {
        return Err(Error::NotInFlat(
            "no common flat is discoverable for the pair".into(),
        ));
    };
    crate::symspace::tits_angle_in_flat(&flat, s1, s2)
}

/// The product gauge on direction/point pairs:
/// `d(x1, x2) + min(h(x1), h(x2)) * angle(sigma1, sigma2)`.
pub fn d_y(p: &YPoint, q: &YPoint, ctx: &HorosphereContext) -> Result<f64> {
    let dx = distance(&p.x, &q.x)?;
    let h1 = busemann(&p.x, &ctx.cfg)?;
    let h2 = busemann(&q.x, &ctx.cfg)?;
    let ang = shadow_angle(&p.sigma, &p.chamber, &q.sigma, &q.chamber)?;
    Ok(dx + h1.min(h2) * ang)
}

/// A point of the Euclidean cone over the boundary at infinity.
#[derive(Debug, Clone)]
pub struct ConePoint {
    pub sigma: BoundaryPoint,
    pub t: f64,
}

/// The Euclidean cone metric from the angle between the directions:
/// `sqrt(t1^2 + t2^2 - 2 t1 t2 cos angle)`.
pub fn cone_distance(angle: f64, t1: f64, t2: f64) -> f64 {
    (t1 * t1 + t2 * t2 - 2.0 * t1 * t2 * angle.cos())
        .max(0.0)
        .sqrt()
}

/// Report of a sampled Lipschitz profile of the projection map.
#[derive(Debug, Clone)]
pub struct PushingProfile {
    pub samples: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub max_travel: f64,
    pub height: f64,
}

/// Sample direction pairs in common chambers of the shadow of `u` and
/// record the ratio of horosphere displacement to angular distance;
/// the maximum is the sampled Lipschitz constant of the projection on
/// that shadow.
pub fn lipschitz_profile(
    u: &Point,
    ctx: &HorosphereContext,
    pairs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PushingProfile> {
    lipschitz_profile_within(u, ctx, ctx.rho, pairs, rng)
}

/// Profile the projection over a sub-shadow of the given gauge; small
/// gauges isolate the height scaling from the additive gauge offset.
pub fn lipschitz_profile_within(
    u: &Point,
    ctx: &HorosphereContext,
    profile_rho: f64,
    pairs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PushingProfile> {
    let n = u.n();
    let (nu, au) = u.na_coordinates()?;
    let p = nu.as_group().mul(&au.as_group());
    let h = busemann(u, &ctx.cfg)?;
    let mut max_ratio = 0.0f64;
    let mut sum = 0.0;
    let mut max_travel = 0.0f64;
    let mut done = 0usize;
    while done < pairs {
        let gauge = sampling::uniform(rng, 0.0, profile_rho);
        let nprime = sampling::random_unipotent(rng, n, gauge);
        let d = Chamber::from_unipotent(&nprime).translate(&p);
        let w1 = sample_descending_regular(rng, n);
        let w2 = sample_descending_regular(rng, n);
        let ang = linalg::unit_angle(w1.coords(), w2.coords());
        if ang < 1e-3 {
            continue;
        }
        let (z1, t1) = project_to_z(u, &d.boundary_point(&w1), ctx)?;
        let (z2, t2) = project_to_z(u, &d.boundary_point(&w2), ctx)?;
        let disp = distance(&z1, &z2)?;
        let ratio = disp / ang;
        max_ratio = max_ratio.max(ratio);
        sum += ratio;
        max_travel = max_travel.max(t1.max(t2));
        done += 1;
    }
    Ok(PushingProfile {
        samples: pairs,
        max_ratio,
        mean_ratio: sum / pairs as f64,
        max_travel,
        height: h,
    })
}

/// Random strictly descending unit weight vector (an interior direction
/// of a chamber in flag coordinates).
pub fn sample_descending_regular(rng: &mut ChaCha8Rng, n: usize) -> CartanVector {
    loop {
        let v = sampling::random_cartan_unit(rng, n);
        let proj = linalg::project_descending_traceless(v.coords());
        let c = CartanVector::project(proj).normalized();
        if c.is_regular_descending(0.02) {
            return c;
        }
    }
}

/// Ratio of the two-point displacement to its product-gauge bound:
/// `d(i_{u1}(s1), i_{u2}(s2)) / (d(u1,u2) + min(h) * angle)`, with the
/// `0/0` case defined as zero.
pub fn two_point_ratio(
    u1: &Point,
    u2: &Point,
    s1: &BoundaryPoint,
    c1: &Chamber,
    s2: &BoundaryPoint,
    c2: &Chamber,
    ctx: &HorosphereContext,
) -> Result<f64> {
    let pol = NumericPolicy::DEFAULT;
    for u in [u1, u2] {
        let h = busemann(u, &ctx.cfg)?;
        if h < 1.0 - pol.level_tol {
            return Err(Error::MembershipViolation(format!(
                "two-point ratio needs h >= 1, got {}",
                h
            )));
        }
        for c in [c1, c2] {
            let g = chambers::rho(u, c)?.rho;
            if g >= ctx.rho {
                return Err(Error::MembershipViolation(
                    "direction leaves the common shadow".into(),
                ));
            }
        }
    }
    let (z1, _) = project_to_z(u1, s1, ctx)?;
    let (z2, _) = project_to_z(u2, s2, ctx)?;
    let num = distance(&z1, &z2)?;
    let du = distance(u1, u2)?;
    let h1 = busemann(u1, &ctx.cfg)?;
    let h2 = busemann(u2, &ctx.cfg)?;
    let ang = shadow_angle(s1, c1, s2, c2)?;
    let den = du + h1.min(h2) * ang;
    if den < 1e-12 {
        return Ok(0.0);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx3() -> HorosphereContext {
        compute_margins(BusemannConfig::barycentric(3)).unwrap()
    }

    #[test]
    fn margins_sl3_barycentric() {
        let ctx = ctx3();
        assert!(ctx.theta.abs() < 1e-12);
        // extreme rays sit at pi/6 from the barycenter, so the margin is pi/3
        assert!((ctx.epsilon - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
    }

    #[test]
    fn margins_sl2_full_right_angle() {
        let ctx = compute_margins(BusemannConfig::barycentric(2)).unwrap();
        assert!((ctx.epsilon - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(ctx.theta.abs() < 1e-12);
    }

    #[test]
    fn config_rejects_degenerate_center() {
        assert!(
            BusemannConfig::new(CartanVector::from_slice(&[0.5, 0.5, -1.0]).unwrap()).is_err()
        );
    }

    #[test]
    fn projection_lands_on_the_horosphere() {
        let ctx = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        for _ in 0..25 {
            let height = sampling::uniform(&mut rng, 0.2, 6.0);
            let u = Point::from_group(
                sampling::random_unipotent(&mut rng, 3, 1.0)
                    .as_group()
                    .mul(&PositiveDiagonal::from_log(&ctx.cfg.tau().scale(height)).as_group()),
            );
            let nprime = sampling::random_unipotent_in_ball(&mut rng, 3, 1.0);
            let (nu, au) = u.na_coordinates().unwrap();
            let p = nu.as_group().mul(&au.as_group());
            let d = Chamber::from_unipotent(&nprime).translate(&p);
            let sigma = d.barycenter();
            let (z, t) = project_to_z(&u, &sigma, &ctx).unwrap();
            assert!(busemann(&z, &ctx.cfg).unwrap().abs() <= 1e-8);
            assert!(t > 0.0);
            // monotone crossing: strictly positive before, negative after
            let ray = ray_to_boundary(&u, &sigma).unwrap();
            let before = busemann(&ray.at(t - 0.05), &ctx.cfg).unwrap();
            let after = busemann(&ray.at(t + 0.05), &ctx.cfg).unwrap();
            assert!(before > 0.0 && after < 0.0);
        }
    }

    #[test]
    fn projection_fixes_horosphere_points() {
        let ctx = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        let u = Point::from_group(sampling::random_unipotent(&mut rng, 3, 1.0).as_group());
        let d = Chamber::from_unipotent(&sampling::random_unipotent_in_ball(&mut rng, 3, 0.5))
            .translate(u.rep().unwrap());
        let (z, t) = project_to_z(&u, &d.barycenter(), &ctx).unwrap();
        assert_eq!(t, 0.0);
        assert!(distance(&z, &u).unwrap() < 1e-9);
    }

    #[test]
    fn travel_time_bound_sampled() {
        // T <= (h + c rho)/sin eps with the calibrated constant
        let ctx = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(127);
        for _ in 0..30 {
            let height = sampling::uniform(&mut rng, 1.0, 8.0);
            let u = Point::from_group(
                sampling::random_unipotent(&mut rng, 3, 0.8)
                    .as_group()
                    .mul(&PositiveDiagonal::from_log(&ctx.cfg.tau().scale(height)).as_group()),
            );
            let (nu, au) = u.na_coordinates().unwrap();
            let p = nu.as_group().mul(&au.as_group());
            let gauge = sampling::uniform(&mut rng, 0.0, ctx.rho);
            let d = Chamber::from_unipotent(&sampling::random_unipotent(&mut rng, 3, gauge))
                .translate(&p);
            let (_, t) = project_to_z(&u, &d.barycenter(), &ctx).unwrap();
            let bound = (height + ctx.c_push * ctx.rho) / ctx.epsilon.sin();
            assert!(t <= bound, "T = {} exceeds bound {}", t, bound);
        }
    }

    #[test]
    fn retraction_is_idempotent_and_fixes_z() {
        let ctx = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(131);
        for _ in 0..20 {
            let g = sampling::random_special_linear(&mut rng, 3);
            let x = Point::from_group(g);
            if busemann(&x, &ctx.cfg).unwrap().abs() > ctx.r_max {
                continue;
            }
            let z = retract_to_z(&x, &ctx).unwrap();
            assert!(busemann(&z, &ctx.cfg).unwrap().abs() < 1e-10);
            let zz = retract_to_z(&z, &ctx).unwrap();
            assert!(distance(&z, &zz).unwrap() < 1e-9);
        }
        let x = Point::from_group(
            PositiveDiagonal::from_log(&ctx.cfg.tau().scale(2.5)).as_group(),
        );
        let z = retract_to_z(&x, &ctx).unwrap();
        assert!(distance(&z, &Point::identity(3)).unwrap() < 1e-10);
    }

    #[test]
    fn d_y_formula_cases() {
        let ctx = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(137);
        let lift = PositiveDiagonal::from_log(&ctx.cfg.tau().scale(2.0)).as_group();
        let u1 = Point::from_group(
            sampling::random_unipotent(&mut rng, 3, 0.5)
                .as_group()
                .mul(&lift),
        );
        let u2 = Point::from_group(
            sampling::random_unipotent(&mut rng, 3, 0.5)
                .as_group()
                .mul(&lift),
        );
        let (n1, a1) = u1.na_coordinates().unwrap();
        let p1 = n1.as_group().mul(&a1.as_group());
        let d = Chamber::from_unipotent(&sampling::random_unipotent_in_ball(&mut rng, 3, 0.5))
            .translate(&p1);
        let w1 = sample_descending_regular(&mut rng, 3);
        let w2 = sample_descending_regular(&mut rng, 3);
        let s1 = d.boundary_point(&w1);
        let s2 = d.boundary_point(&w2);
        let y1 = YPoint::new(s1.clone(), d.clone(), u1.clone(), &ctx).unwrap();
        let y2 = YPoint::new(s2.clone(), d.clone(), u2.clone(), &ctx).unwrap();
        let dy = d_y(&y1, &y2, &ctx).unwrap();
        assert!((d_y(&y1, &y1, &ctx).unwrap()).abs() < 1e-10);
        let y2_same = YPoint::new(s1.clone(), d.clone(), u2.clone(), &ctx).unwrap();
        let dy_same = d_y(&y1, &y2_same, &ctx).unwrap();
        assert!((dy_same - distance(&u1, &u2).unwrap()).abs() < 1e-8);
        let y1_other = YPoint::new(s2.clone(), d.clone(), u1.clone(), &ctx).unwrap();
        let dy_pt = d_y(&y1, &y1_other, &ctx).unwrap();
        let h1 = busemann(&u1, &ctx.cfg).unwrap();
        let ang = linalg::unit_angle(w1.coords(), w2.coords());
        assert!((dy_pt - h1 * ang).abs() < 1e-8);
        assert!(dy >= 0.0);
    }

    #[test]
    fn exponential_map_is_distance_decreasing_on_cone() {
        // CAT(0) comparison: rays from a common point diverge no faster
        // than the Euclidean cone over their angle
        let ctx = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(139);
        let u = Point::from_group(
            sampling::random_unipotent(&mut rng, 3, 0.6)
                .as_group()
                .mul(&PositiveDiagonal::from_log(&ctx.cfg.tau().scale(1.5)).as_group()),
        );
        let (nu, au) = u.na_coordinates().unwrap();
        let p = nu.as_group().mul(&au.as_group());
        let d = Chamber::from_unipotent(&sampling::random_unipotent_in_ball(&mut rng, 3, 0.8))
            .translate(&p);
        for _ in 0..10 {
            let w1 = sample_descending_regular(&mut rng, 3);
            let w2 = sample_descending_regular(&mut rng, 3);
            let ang = linalg::unit_angle(w1.coords(), w2.coords());
            let r1 = ray_to_boundary(&u, &d.boundary_point(&w1)).unwrap();
            let r2 = ray_to_boundary(&u, &d.boundary_point(&w2)).unwrap();
            let (t1, t2) = (
                sampling::uniform(&mut rng, 0.0, 6.0),
                sampling::uniform(&mut rng, 0.0, 6.0),
            );
            let dx = distance(&r1.at(t1), &r2.at(t2)).unwrap();
            let dc = cone_distance(ang, t1, t2);
            assert!(dx <= dc + 1e-8, "{} > {}", dx, dc);
        }
    }

    #[test]
    fn lipschitz_profile_scales_linearly_in_height() {
        let ctx = ctx3();
        let mut ratios = Vec::new();
        for (i, height) in [1.0f64, 2.0, 4.0].into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
            let u = Point::from_group(
                sampling::random_unipotent(&mut rng, 3, 0.5)
                    .as_group()
                    .mul(&PositiveDiagonal::from_log(&ctx.cfg.tau().scale(height)).as_group()),
            );
            let prof = lipschitz_profile(&u, &ctx, 40, &mut rng).unwrap();
            ratios.push((height, prof.max_ratio));
        }
        let exps: Vec<f64> = ratios
            .windows(2)
            .map(|w| (w[1].1 / w[0].1).ln() / (w[1].0 / w[0].0).ln())
            .collect();
        for e in exps {
            assert!(e > 0.5 && e < 1.5, "height exponent {}", e);
        }
    }

    #[test]
    fn two_point_ratio_degenerate_pair_is_zero() {
        let ctx = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(149);
        let u = Point::from_group(
            sampling::random_unipotent(&mut rng, 3, 0.4)
                .as_group()
                .mul(&PositiveDiagonal::from_log(&ctx.cfg.tau().scale(2.0)).as_group()),
        );
        let (nu, au) = u.na_coordinates().unwrap();
        let p = nu.as_group().mul(&au.as_group());
        let d = Chamber::from_unipotent(&sampling::random_unipotent_in_ball(&mut rng, 3, 0.5))
            .translate(&p);
        let s = d.barycenter();
        let r = two_point_ratio(&u, &u, &s, &d, &s, &d, &ctx).unwrap();
        assert_eq!(r, 0.0);
    }
}
