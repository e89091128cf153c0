//! Verification suites and experiments behind the command-line tool.
//!
//! Every suite is a deterministic function of `(config, seed)` that
//! returns one record per check; the CSV artifacts are byte-identical
//! across reruns. Sample counts come from the configuration with the
//! shipped defaults.

use rand_chacha::ChaCha8Rng;

use crate::calibrate::{fit_line, fit_loglog};
use crate::chambers::{
    self, are_opposite, canonical_unipotent, contract, distance_to_flat,
    find_opposite_flat, flat_chambers, flat_of_chamber, flat_spanned, rho, verify_dx_shadows,
    Chamber,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::filling::{
    antipodal_mesh_distance, flat_sphere_on_z, whitney_fill_disk, whitney_fill_path, FillParams,
    LoopInZ, OmegaProvider, WhitneyParams,
};
use crate::horosphere::{
    compute_margins, project_to_z, retract_to_z, sample_descending_regular,
    two_point_ratio, HorosphereContext,
};
use crate::liecore::{
    d_n, iwasawa_nak, kappa, CartanVector, PositiveDiagonal, SpecialLinear, UnitUpper,
};
use crate::linalg;
use crate::report::SuiteReport;
use crate::sampling;
use crate::symspace::{
    busemann, busemann_limit_estimate, distance, geodesic, Point,
};

pub const VERIFY_SUITES: [&str; 9] = [
    "iwasawa",
    "busemann",
    "compare",
    "dil",
    "dxshadows",
    "largeshadows",
    "pushing",
    "opposition",
    "omega_infty",
];

/// Dispatch a verification suite by name.
pub fn run_suite(config: &RunConfig, suite: &str) -> Result<SuiteReport> {
    let start = std::time::Instant::now();
    let mut report = match suite {
        "iwasawa" => iwasawa_suite(config)?,
        "busemann" => busemann_suite(config)?,
        "compare" => compare_suite(config)?,
        "dil" => dil_suite(config)?,
        "dxshadows" => dxshadows_suite(config)?,
        "largeshadows" => largeshadows_suite(config)?,
        "pushing" => pushing_suite(config)?,
        "opposition" => opposition_suite(config)?,
        "omega_infty" => omega_infty_suite(config)?,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown suite `{}` (expected one of {:?})",
                other, VERIFY_SUITES
            )))
        }
    };
    report.wall_ms = start.elapsed().as_millis();
    Ok(report)
}

fn seeded(config: &RunConfig, salt: u64) -> ChaCha8Rng {
    sampling::derive_rng(config.seed, salt)
}

fn context(config: &RunConfig) -> Result<HorosphereContext> {
    let mut ctx = compute_margins(config.busemann_config()?)?;
    ctx.c_push = config.calib.c_push;
    Ok(ctx)
}

/// A random point of the horosphere with unipotent spread `s`.
pub fn random_z_point(
    rng: &mut ChaCha8Rng,
    n: usize,
    ctx: &HorosphereContext,
    spread: f64,
) -> Result<Point> {
    let u = sampling::random_unipotent_in_ball(rng, n, spread);
    retract_to_z(&Point::from_group(u.as_group()), ctx)
}

fn fill_params(config: &RunConfig) -> FillParams {
    FillParams {
        c_enlarge: config.calib.c_enlarge,
        ..FillParams::default()
    }
}

pub fn iwasawa_suite(config: &RunConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("iwasawa");
    let n = config.n;
    let count = config.sample_count("iwasawa", 1000);
    let tol = config.tolerance("iwasawa_reconstruction", 1e-10);
    let mut rng = seeded(config, 1);
    let mut max_err: f64 = 0.0;
    for _ in 0..count {
        let g = sampling::random_special_linear(&mut rng, n);
        let f = iwasawa_nak(&g)?;
        let resid = f.reconstruct() - g.entries();
        let rel = linalg::frob(&resid) / linalg::frob(g.entries());
        max_err = max_err.max(rel);
    }
    report.check_le("reconstruction_max_rel_error", n, config.seed, max_err, tol);
    // identity and diagonal cases factor trivially
    let f = iwasawa_nak(&SpecialLinear::identity(n))?;
    let id_err = linalg::frob(&(f.reconstruct() - SpecialLinear::identity(n).entries()));
    report.check_le("identity_case", n, config.seed, id_err, 1e-12);
    Ok(report)
}

pub fn busemann_suite(config: &RunConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("busemann");
    let n = config.n;
    let cfg = config.busemann_config()?;
    let mut rng = seeded(config, 2);
    // limit definition vs horospherical formula at t = 200 on points
    // [u exp(s tau)] with |h| <= 5 (flat part aligned with the center,
    // so the truncation converges exponentially)
    let count = config.sample_count("busemann", 100);
    let mut max_gap: f64 = 0.0;
    for _ in 0..count {
        let spread = sampling::uniform(&mut rng, 0.0, 2.0);
        let s = sampling::uniform(&mut rng, -5.0, 5.0);
        let u = sampling::random_unipotent(&mut rng, n, spread);
        let x = Point::from_group(
            u.as_group()
                .mul(&PositiveDiagonal::from_log(&cfg.tau().scale(s)).as_group()),
        );
        let h = busemann(&x, &cfg)?;
        let est = busemann_limit_estimate(&x, &cfg, 200.0)?;
        max_gap = max_gap.max((est - h).abs());
    }
    report.check_le(
        "limit_vs_iwasawa_t200",
        n,
        config.seed,
        max_gap,
        config.tolerance("busemann_limit", 1e-4),
    );
    // 1-Lipschitz on sampled pairs
    let pairs = config.sample_count("busemann_pairs", 10_000);
    let mut worst_margin: f64 = 0.0;
    for _ in 0..pairs {
        let a = Point::from_group(sampling::random_special_linear(&mut rng, n));
        let b = Point::from_group(sampling::random_special_linear(&mut rng, n));
        let dh = (busemann(&a, &cfg)? - busemann(&b, &cfg)?).abs();
        worst_margin = worst_margin.max(dh - distance(&a, &b)?);
    }
    report.check_le(
        "one_lipschitz_margin",
        n,
        config.seed,
        worst_margin,
        config.tolerance("busemann_lipschitz", 1e-8),
    );
    // normalization and central ray
    report.check_le(
        "base_point_level",
        n,
        config.seed,
        busemann(&Point::identity(n), &cfg)?.abs(),
        1e-12,
    );
    let x = Point::from_group(PositiveDiagonal::from_log(&cfg.tau().scale(3.0)).as_group());
    report.check_le(
        "central_ray_rate",
        n,
        config.seed,
        (busemann(&x, &cfg)? - 3.0).abs(),
        1e-10,
    );
    Ok(report)
}

pub fn compare_suite(config: &RunConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("compare");
    let n = config.n;
    let count = config.sample_count("compare", 500);
    let mut forward_violations = 0usize;
    let mut slopes = Vec::new();
    for half in 0..2u64 {
        let mut rng = seeded(config, 3 + half);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..count {
            let x = Point::from_group(sampling::random_special_linear(&mut rng, n));
            let u = sampling::random_unipotent_in_ball(&mut rng, n, 2.5);
            let d = Chamber::from_unipotent(&u);
            let sq = rho(&x, &d)?;
            let fl = flat_of_chamber(&d)?;
            let dist = distance_to_flat(&x, &fl)?;
            if half == 0 && dist >= sq.rho + 1e-6 {
                forward_violations += 1;
            }
            if sq.rho > 1e-12 {
                xs.push(dist);
                ys.push(sq.rho.ln());
            }
        }
        let (slope, _) = fit_line(&xs, &ys);
        slopes.push(slope);
    }
    report.push(
        "forward_zero_violations",
        n,
        config.seed,
        forward_violations as f64,
        0.0,
        forward_violations == 0,
    );
    report.fit("reverse_slope_seed_a", slopes[0]);
    report.fit("reverse_slope_seed_b", slopes[1]);
    let positive = slopes.iter().all(|s| *s > 0.0);
    let stable = (slopes[0] - slopes[1]).abs() <= 0.25 * slopes[0].abs().max(slopes[1].abs());
    report.push(
        "reverse_slope_positive",
        n,
        config.seed,
        slopes[0],
        0.0,
        positive,
    );
    report.push(
        "reverse_slope_stable_25pct",
        n,
        config.seed,
        (slopes[0] - slopes[1]).abs(),
        0.25 * slopes[0].abs().max(slopes[1].abs()),
        stable,
    );
    // the gauge of a unipotent is exponentially bounded by its distance
    // from the base point (positive fitted slope)
    let mut rng = seeded(config, 5);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..count {
        let scale = sampling::uniform(&mut rng, 0.2, 8.0);
        let u = sampling::random_unipotent(&mut rng, n, scale);
        let dist = distance(&Point::identity(n), &Point::from_group(u.as_group()))?;
        ys.push(d_n(&u).max(1e-300).ln());
        xs.push(dist);
    }
    let (lmr_slope, _) = fit_line(&xs, &ys);
    report.fit("log_gauge_vs_distance_slope", lmr_slope);
    report.push(
        "log_gauge_slope_positive",
        n,
        config.seed,
        lmr_slope,
        0.0,
        lmr_slope > 0.0,
    );
    Ok(report)
}

pub fn dil_suite(config: &RunConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("dil");
    let seed = config.seed;
    // exact single-root contraction in order two
    let mut rng = seeded(config, 7);
    let v2 = CartanVector::from_slice(&[1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()])
        .map_err(|e| Error::NumericalFailure(e.to_string()))?;
    let mut worst2: f64 = 0.0;
    for _ in 0..config.sample_count("dil", 100) {
        let scale = sampling::uniform(&mut rng, 0.1, 2.0);
        let u = sampling::random_unipotent(&mut rng, 2, scale);
        let d = Chamber::from_unipotent(&u);
        let x = Point::identity(2);
        let rho0 = rho(&x, &d)?.rho;
        let mut t = 0.5;
        while t <= 10.0 + 1e-9 {
            let c = contract(&x, &v2, t, &d)?;
            let expected = (-t * 2f64.sqrt()).exp() * rho0;
            worst2 = worst2.max((c - expected).abs() / (1.0 + expected));
            t += 0.5;
        }
    }
    report.check_le(
        "sl2_single_root_exact",
        2,
        seed,
        worst2,
        config.tolerance("dil_exact", 1e-10),
    );
    // order three: single-root decay exponent within one percent of the
    // minimal root value
    let v3 = CartanVector::standard_barycenter(3);
    let kap = kappa(&v3)?;
    let mut l = nalgebra::DMatrix::<f64>::zeros(3, 3);
    l[(0, 1)] = 0.8;
    let u3 = UnitUpper::from_log(&l);
    let d3 = Chamber::from_unipotent(&u3);
    let x3 = Point::identity(3);
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for k in 0..20 {
        let t = 0.25 * (k + 1) as f64;
        ts.push(t);
        logs.push(contract(&x3, &v3, t, &d3)?.max(1e-300).ln());
    }
    let (slope, _) = fit_line(&ts, &logs);
    let exponent_err = ((-slope) - kap).abs() / kap;
    report.fit("sl3_decay_exponent", -slope);
    report.check_le("sl3_single_root_exponent_1pct", 3, seed, exponent_err, 0.01);
    // exact agreement with brute-force conjugation
    let mut rng = seeded(config, 8);
    let mut worst_bf: f64 = 0.0;
    for _ in 0..100 {
        let v = sampling::random_regular_descending_unit(&mut rng, 3);
        let u = sampling::random_unipotent(&mut rng, 3, 1.0);
        let d = Chamber::from_unipotent(&u);
        let t = sampling::uniform(&mut rng, 0.0, 10.0);
        let fast = contract(&Point::identity(3), &v, t, &d)?;
        // brute force: conjugate by explicit diagonal exponentials
        let sq = rho(&Point::identity(3), &d)?;
        let e_neg = nalgebra::DMatrix::from_diagonal(&v.coords().map(|x| (-t * x).exp()));
        let e_pos = nalgebra::DMatrix::from_diagonal(&v.coords().map(|x| (t * x).exp()));
        let prod = &e_neg * sq.q.entries() * &e_pos;
        let brute = d_n(&UnitUpper::new(prod).map_err(|e| Error::NumericalFailure(e.to_string()))?);
        worst_bf = worst_bf.max((fast - brute).abs() / (1.0 + brute));
    }
    report.check_le("matches_brute_force_conjugation", 3, seed, worst_bf, 1e-10);
    Ok(report)
}

pub fn dxshadows_suite(config: &RunConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("dxshadows");
    let n = config.n;
    let count = config.sample_count("dxshadows", 1000);
    let mut maxima = Vec::new();
    for half in 0..2u64 {
        let mut rng = seeded(config, 11 + half);
        let mut worst: f64 = 0.0;
        let bases = 4usize;
        for _ in 0..bases {
            let x = Point::from_group(sampling::random_special_linear(&mut rng, n));
            let rep = verify_dx_shadows(&x, count / bases, config.calib.rho_star, &mut rng)?;
            worst = worst.max(rep.max_rho);
        }
        report.push(
            &format!("uniform_cap_seed_{}", half),
            n,
            config.seed,
            worst,
            config.calib.rho_star,
            worst <= config.calib.rho_star,
        );
        maxima.push(worst);
    }
    let stable = (maxima[0] - maxima[1]).abs() <= 0.2 * maxima[0].max(maxima[1]);
    report.push(
        "empirical_cap_stable_20pct",
        n,
        config.seed,
        (maxima[0] - maxima[1]).abs(),
        0.2 * maxima[0].max(maxima[1]),
        stable,
    );
    report.fit("empirical_rho_star", maxima[0].max(maxima[1]));
    // contraction up the cone: a point higher up has smaller gauge
    let mut rng = seeded(config, 13);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x = Point::identity(n);
        let v = CartanVector::standard_barycenter(n);
        let u = sampling::random_unipotent_in_ball(&mut rng, n, 1.0);
        let d = Chamber::from_unipotent(&u);
        let r0 = rho(&x, &d)?.rho;
        let up = geodesic(&x, &v, 1.5)?;
        let r1 = rho(&up, &d)?.rho;
        worst = worst.max(r1 - r0);
    }
    report.check_le("higher_point_contracts", n, config.seed, worst, 1e-12);
    Ok(report)
}

pub fn largeshadows_suite(config: &RunConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("largeshadows");
    let n = config.n;
    let v = CartanVector::standard_barycenter(n);
    let checks = config.sample_count("largeshadows", 12);
    let mut slopes = Vec::new();
    for half in 0..2u64 {
        let mut rng = seeded(config, 17 + half);
        let mut rs = Vec::new();
        let mut ts = Vec::new();
        for r in [1.0f64, 2.0, 4.0, 8.0] {
            let x = Point::from_group(sampling::random_special_linear(&mut rng, n));
            // grow the slope until the sampled post-condition holds,
            // recording the accepted travel time
            let mut c1 = config.calib.c_enlarge;
            let mut accepted = None;
            for _ in 0..9 {
                match chambers::enlarge(&x, &v, r, c1, checks, &mut rng) {
                    Ok(_) => {
                        accepted = Some(c1 * (r + 1.0));
                        break;
                    }
                    Err(Error::CalibrationFailure { .. }) => c1 *= 1.6,
                    Err(e) => return Err(e),
                }
            }
            let t = accepted.ok_or_else(|| Error::CalibrationFailure {
                construction: "largeshadows suite".into(),
                detail: format!("no working slope up to {:.2} at r = {}", c1, r),
            })?;
            rs.push(r);
            ts.push(t);
        }
        let (slope, intercept) = fit_line(&rs, &ts);
        report.fit(&format!("travel_slope_seed_{}", half), slope);
        report.fit(&format!("travel_intercept_seed_{}", half), intercept);
        report.push(
            &format!("travel_linear_in_radius_{}", half),
            n,
            config.seed,
            slope,
            0.0,
            slope > 0.0,
        );
        slopes.push(slope);
    }
    let stable = (slopes[0] - slopes[1]).abs() <= 0.25 * slopes[0].abs().max(slopes[1].abs());
    report.push(
        "travel_slope_stable_25pct",
        n,
        config.seed,
        (slopes[0] - slopes[1]).abs(),
        0.25 * slopes[0].abs().max(slopes[1].abs()),
        stable,
    );
    Ok(report)
}

pub fn pushing_suite(config: &RunConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("pushing");
    let n = config.n;
    let ctx = context(config)?;
    let count = config.sample_count("pushing", 500);
    let mut rng = seeded(config, 19);
    // projections land on the horosphere; travel-time bound
    let mut max_level: f64 = 0.0;
    let mut worst_travel_margin: f64 = f64::NEG_INFINITY;
    for _ in 0..count {
        let height = sampling::uniform(&mut rng, 0.5, 8.0);
        let u = Point::from_group(
            sampling::random_unipotent_in_ball(&mut rng, n, 1.0)
                .as_group()
                .mul(&PositiveDiagonal::from_log(&ctx.cfg.tau().scale(height)).as_group()),
        );
        let (nu, au) = u.na_coordinates()?;
        let p = nu.as_group().mul(&au.as_group());
        let gauge = sampling::uniform(&mut rng, 0.0, ctx.rho);
        let d = Chamber::from_unipotent(&sampling::random_unipotent(&mut rng, n, gauge))
            .translate(&p);
        let (z, t) = project_to_z(&u, &d.barycenter(), &ctx)?;
        max_level = max_level.max(busemann(&z, &ctx.cfg)?.abs());
        let bound = (height + ctx.c_push * ctx.rho) / ctx.epsilon.sin();
        worst_travel_margin = worst_travel_margin.max(t - bound);
    }
    report.check_le(
        "projection_level_residual",
        n,
        config.seed,
        max_level,
        config.tolerance("pushing_level", 1e-8),
    );
    report.check_le(
        "travel_time_within_bound",
        n,
        config.seed,
        worst_travel_margin,
        0.0,
    );
    // sampled Lipschitz ratio scales linearly with the height; the
    // profile uses a small sub-shadow so the additive gauge offset does
    // not mask the height dependence
    let mut heights = Vec::new();
    let mut ratios = Vec::new();
    for (i, height) in [1.0f64, 2.0, 4.0, 8.0].into_iter().enumerate() {
        let mut hrng = seeded(config, 23 + i as u64);
        let u = Point::from_group(
            sampling::random_unipotent(&mut hrng, n, 0.5)
                .as_group()
                .mul(&PositiveDiagonal::from_log(&ctx.cfg.tau().scale(height)).as_group()),
        );
        let prof = crate::horosphere::lipschitz_profile_within(
            &u,
            &ctx,
            0.3,
            config.sample_count("pushing_profile", 60),
            &mut hrng,
        )?;
        heights.push(height);
        ratios.push(prof.max_ratio);
        report.check_le(
            &format!("lip_ratio_within_cap_h{}", height as u64),
            n,
            config.seed,
            prof.max_ratio,
            config.calib.cap_push_lip * (ctx.rho + 1.0).powi(2) * height,
        );
    }
    let exponent = fit_loglog(&heights, &ratios);
    report.fit("lip_ratio_height_exponent", exponent);
    report.push(
        "lip_ratio_scales_linearly",
        n,
        config.seed,
        exponent,
        1.2,
        (exponent - 1.0).abs() <= 0.2,
    );
    // two-point ratios capped
    let mut rng = seeded(config, 29);
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..count {
        let height = sampling::uniform(&mut rng, 1.0, 5.0);
        let lift = PositiveDiagonal::from_log(&ctx.cfg.tau().scale(height)).as_group();
        let u1 = Point::from_group(
            sampling::random_unipotent_in_ball(&mut rng, n, 0.4)
                .as_group()
                .mul(&lift),
        );
        let u2 = Point::from_group(
            sampling::random_unipotent_in_ball(&mut rng, n, 0.4)
                .as_group()
                .mul(&lift),
        );
        let (n1, a1) = u1.na_coordinates()?;
        let p1 = n1.as_group().mul(&a1.as_group());
        let d = Chamber::from_unipotent(&sampling::random_unipotent_in_ball(&mut rng, n, 0.5))
            .translate(&p1);
        let w1 = sample_descending_regular(&mut rng, n);
        let w2 = sample_descending_regular(&mut rng, n);
        let s1 = d.boundary_point(&w1);
        let s2 = d.boundary_point(&w2);
        match two_point_ratio(&u1, &u2, &s1, &d, &s2, &d, &ctx) {
            Ok(r) => worst_ratio = worst_ratio.max(r),
            Err(Error::MembershipViolation(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    report.check_le(
        "two_point_ratio_cap",
        n,
        config.seed,
        worst_ratio,
        config.calib.cap_two_point * (ctx.rho + 1.0).powi(2),
    );
    Ok(report)
}

pub fn opposition_suite(config: &RunConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("opposition");
    let n = config.n;
    let count = config.sample_count("opposition", 10_000);
    let mut rng = seeded(config, 31);
    let mut opposite = 0usize;
    let mut asym = 0usize;
    for _ in 0..count {
        let d = Chamber::new(sampling::random_special_linear(&mut rng, n));
        let e = Chamber::new(sampling::random_special_linear(&mut rng, n));
        let de = are_opposite(&d, &e);
        if de != are_opposite(&e, &d) {
            asym += 1;
        }
        if de {
            opposite += 1;
        }
    }
    let freq = opposite as f64 / count as f64;
    report.push(
        "random_pairs_opposite_freq",
        n,
        config.seed,
        freq,
        0.999,
        freq >= 0.999,
    );
    report.push("symmetry_violations", n, config.seed, asym as f64, 0.0, asym == 0);
    // flats opposite a chamber certify all boundary chambers
    for m in [3usize, 4] {
        let mut rng = seeded(config, 37 + m as u64);
        let c = Chamber::standard(m);
        let fl = find_opposite_flat(&c, 64, &mut rng)?;
        let all = flat_chambers(&fl).iter().all(|ch| are_opposite(ch, &c));
        report.push(
            &format!("opposite_flat_certified_n{}", m),
            m,
            config.seed,
            if all { 1.0 } else { 0.0 },
            1.0,
            all,
        );
    }
    // spanned flats reproduce the defining chambers
    let mut rng = seeded(config, 41);
    let mut worst_recover: f64 = 0.0;
    for _ in 0..50 {
        let u = sampling::random_unipotent(&mut rng, n, 1.0);
        let d = Chamber::from_unipotent(&u);
        let e = Chamber::standard(n);
        let fl = flat_spanned(&d, &e)?;
        // the identity ordering of the spanned flat must carry d's flag
        let got = chambers::flat_chamber(&fl, &(0..n).collect::<Vec<_>>());
        let ok = got.same_flag(&d, 1e-6);
        if !ok {
            worst_recover += 1.0;
        }
        // canonical unipotent survives the round trip
        let u2 = canonical_unipotent(&got)?;
        worst_recover = worst_recover.max(linalg::frob(&(u2.entries() - u.entries())));
    }
    report.check_le(
        "spanned_flat_recovers_chambers",
        n,
        config.seed,
        worst_recover,
        1e-6,
    );
    Ok(report)
}

pub fn omega_infty_suite(config: &RunConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("omega_infty");
    let params = fill_params(config);
    // order three: one-dimensional faces
    {
        let cfg3 = RunConfig::for_n(3);
        let ctx = compute_margins(cfg3.busemann_config()?)?;
        let count = config.sample_count("omega_edges", 50);
        let mut rng = seeded(config, 43);
        let mut built = 0usize;
        let mut vertex_level_err: f64 = 0.0;
        let mut max_anchor_ratio: f64 = 0.0;
        for k in 0..count {
            let z0 = random_z_point(&mut rng, 3, &ctx, 1.0)?;
            let z1 = random_z_point(&mut rng, 3, &ctx, 1.0)?;
            let od = crate::filling::build_omega_infty(
                &[z0, z1],
                &ctx,
                &params,
                config.seed ^ (k as u64),
            )?;
            built += 1;
            for v in [vec![0usize], vec![1usize]] {
                vertex_level_err = vertex_level_err.max((od.faces[&v].h_anchor - 1.0).abs());
            }
            max_anchor_ratio = max_anchor_ratio.max(od.faces[&vec![0usize, 1]].anchor_ratio);
        }
        report.push(
            "sl3_edges_built_with_properties",
            3,
            config.seed,
            built as f64,
            count as f64,
            built == count,
        );
        report.check_le("sl3_vertex_level_exact", 3, config.seed, vertex_level_err, 1e-8);
        report.fit("sl3_anchor_ratio_max", max_anchor_ratio);
    }
    // order four: two-dimensional faces
    {
        let cfg4 = RunConfig::for_n(4);
        let ctx = compute_margins(cfg4.busemann_config()?)?;
        let count = config.sample_count("omega_triangles", 20);
        let mut rng = seeded(config, 47);
        let mut built = 0usize;
        let mut vertex_level_err: f64 = 0.0;
        let mut max_anchor_ratio: f64 = 0.0;
        for k in 0..count {
            let zs: Vec<Point> = (0..3)
                .map(|_| random_z_point(&mut rng, 4, &ctx, 0.8))
                .collect::<Result<_>>()?;
            let od = crate::filling::build_omega_infty(
                &zs,
                &ctx,
                &params,
                config.seed ^ 0xabcd ^ (k as u64),
            )?;
            built += 1;
            for v in 0..3usize {
                vertex_level_err =
                    vertex_level_err.max((od.faces[&vec![v]].h_anchor - 1.0).abs());
            }
            max_anchor_ratio = max_anchor_ratio.max(od.faces[&vec![0usize, 1, 2]].anchor_ratio);
        }
        report.push(
            "sl4_triangles_built_with_properties",
            4,
            config.seed,
            built as f64,
            count as f64,
            built == count,
        );
        report.check_le("sl4_vertex_level_exact", 4, config.seed, vertex_level_err, 1e-8);
        report.fit("sl4_anchor_ratio_max", max_anchor_ratio);
    }
    Ok(report)
}

/// Rank-one contrast: in-horocycle versus ambient distance in the
/// hyperbolic plane, reported in curvature-normalized units where the
/// closed form is `2 sinh(ambient / 2)`.
pub fn distort_rank1(config: &RunConfig) -> Result<SuiteReport> {
    let start = std::time::Instant::now();
    let mut report = SuiteReport::new("distort_rank1");
    if config.n != 2 {
        return Err(Error::InvalidConfig(
            "the rank-one experiment needs n = 2".into(),
        ));
    }
    // metric scale between the Frobenius-unit-speed normalization and
    // curvature minus one
    let scale = 2f64.sqrt();
    let mut ambients = Vec::new();
    let mut intrinsics = Vec::new();
    let mut worst_rel: f64 = 0.0;
    for k in 1..=10 {
        let amb_hyp = 2.0 * k as f64; // grid 2..20 in hyperbolic units
        let x = 2.0 * (amb_hyp / 2.0).sinh();
        // two horocycle points with unipotent coordinates 0 and x: the
        // intrinsic distance along the horocycle is x in hyperbolic
        // units (the matrix entry is the half-plane coordinate)
        let mut m = nalgebra::DMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = x;
        let u = UnitUpper::new(m).map_err(|e| Error::NumericalFailure(e.to_string()))?;
        let p0 = Point::identity(2);
        let p1 = Point::from_group(u.as_group());
        let ambient_crate = distance(&p0, &p1)?;
        let ambient_measured = scale * ambient_crate;
        let intrinsic_hyp = x;
        let closed_form = 2.0 * (ambient_measured / 2.0).sinh();
        worst_rel = worst_rel.max((intrinsic_hyp - closed_form).abs() / closed_form);
        ambients.push(ambient_measured);
        intrinsics.push(intrinsic_hyp);
    }
    report.check_le(
        "closed_form_match",
        2,
        config.seed,
        worst_rel,
        config.tolerance("rank1_closed_form", 1e-6),
    );
    let logs: Vec<f64> = intrinsics.iter().map(|x| x.ln()).collect();
    let (slope, _) = fit_line(&ambients, &logs);
    report.fit("log_intrinsic_vs_ambient_slope", slope);
    report.push(
        "exponential_distortion_slope",
        2,
        config.seed,
        slope,
        0.52,
        (slope - 0.5).abs() <= 0.02,
    );
    report.wall_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Rank-two path experiment: in-horosphere path lengths against
/// ambient distance; polynomial growth with log-log slope near one is
/// the non-distortion signal.
pub fn distort_rank2_paths(config: &RunConfig) -> Result<SuiteReport> {
    let start = std::time::Instant::now();
    let mut report = SuiteReport::new("distort_rank2");
    if config.n < 3 {
        return Err(Error::InvalidConfig(
            "the path experiment needs n >= 3".into(),
        ));
    }
    let n = config.n;
    let ctx = context(config)?;
    let mut provider = OmegaProvider::new(ctx.clone(), fill_params(config), config.seed);
    let wparams = WhitneyParams {
        fill: fill_params(config),
        ..WhitneyParams::default()
    };
    let mut rng = seeded(config, 53);
    let mut ambients = Vec::new();
    let mut lengths = Vec::new();
    for target in [2.0f64, 4.0, 8.0, 14.0, 20.0] {
        let z0 = random_z_point(&mut rng, n, &ctx, 0.5)?;
        // find a partner at roughly the target ambient distance by
        // scaling a unipotent displacement
        let dir = sampling::random_nilpotent(&mut rng, n, 1.0);
        let mut lo = 0.0f64;
        let mut hi = 1e6f64;
        let mut z1 = z0.clone();
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let u = UnitUpper::from_log(&(dir.clone() * mid));
            let cand = retract_to_z(
                &Point::from_group(z0.rep_or_sqrt()?.mul(&u.as_group())),
                &ctx,
            )?;
            let d = distance(&z0, &cand)?;
            if d > target {
                hi = mid;
            } else {
                lo = mid;
            }
            z1 = cand;
        }
        let ambient = distance(&z0, &z1)?;
        let path = whitney_fill_path(&z0, &z1, &mut provider, &wparams)?;
        report.check_le(
            &format!("path_on_horosphere_amb{}", target as u64),
            n,
            config.seed,
            path.max_level_residual,
            1e-7,
        );
        ambients.push(ambient);
        lengths.push(path.length.max(1e-9));
        report.fit(&format!("length_amb{}", target as u64), path.length);
        report.fit(
            &format!("ratio_amb{}", target as u64),
            path.length / (ambient + 1.0),
        );
    }
    let shifted: Vec<f64> = ambients.iter().map(|a| a + 1.0).collect();
    let slope = fit_loglog(&shifted, &lengths);
    report.fit("loglog_slope", slope);
    report.push(
        "polynomial_growth_slope",
        n,
        config.seed,
        slope,
        1.2,
        (slope - 1.0).abs() <= 0.2,
    );
    report.wall_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Divergence experiment: flat-horosphere intersection cycles, their
/// gauge against the level, and the in-horosphere route lengths between
/// antipodal cycle points.
pub fn divergence_suite(config: &RunConfig) -> Result<SuiteReport> {
    let start = std::time::Instant::now();
    let mut report = SuiteReport::new("divergence");
    if config.n < 3 {
        return Err(Error::InvalidConfig(
            "the divergence experiment needs n >= 3".into(),
        ));
    }
    let n = config.n;
    let ctx = context(config)?;
    let mut rng = seeded(config, 59);
    let f0 = find_opposite_flat(&Chamber::standard(n), 64, &mut rng)?;
    let resolution = config.sample_count("divergence_resolution", 64);
    let mut rs = Vec::new();
    let mut ratios = Vec::new();
    let mut mesh = Vec::new();
    for r in [2.0f64, 4.0, 8.0] {
        let x = Point::from_group(
            sampling::random_unipotent_in_ball(&mut rng, n, 0.3)
                .as_group()
                .mul(&PositiveDiagonal::from_log(&ctx.cfg.tau().scale(r)).as_group()),
        );
        let cycle = flat_sphere_on_z(&x, &f0, &ctx, resolution)?;
        report.check_le(
            &format!("cycle_on_horosphere_r{}", r as u64),
            n,
            config.seed,
            cycle.max_level_residual,
            1e-7,
        );
        let ratio = cycle.lip / r;
        report.fit(&format!("lip_over_r_{}", r as u64), ratio);
        rs.push(r);
        ratios.push(ratio);
        if n == 3 {
            let routes = antipodal_mesh_distance(&cycle, &x, &f0, &ctx, 64)?;
            report.fit(&format!("mesh_distance_r{}", r as u64), routes.mesh_distance);
            report.fit(&format!("chord_route_r{}", r as u64), routes.chord_route);
            report.fit(&format!("cycle_route_r{}", r as u64), routes.along_cycle);
            mesh.push(routes.mesh_distance);
        }
    }
    let spread = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    report.push(
        "lip_ratio_stable_2x",
        n,
        config.seed,
        spread,
        2.0,
        spread <= 2.0,
    );
    if n == 3 {
        let expo = fit_loglog(&rs, &mesh);
        report.fit("antipodal_mesh_exponent", expo);
        report.push(
            "antipodal_superlinear",
            n,
            config.seed,
            expo,
            f64::INFINITY,
            expo > 1.2,
        );
    }
    report.wall_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Fill a sphere from a JSON file and write the filled disk.
pub fn fill_from_file(
    config: &RunConfig,
    input: &std::path::Path,
    output: &std::path::Path,
) -> Result<SuiteReport> {
    let start = std::time::Instant::now();
    let mut report = SuiteReport::new("fill");
    let text = std::fs::read_to_string(input)
        .map_err(|e| Error::SchemaViolation(format!("{}: {}", input.display(), e)))?;
    let sphere = crate::filling::schema::sphere_from_json(&text)?;
    if sphere.n != config.n {
        return Err(Error::SchemaViolation(format!(
            "sphere order {} does not match configuration n = {}",
            sphere.n, config.n
        )));
    }
    let ctx = context(config)?;
    let mut provider = OmegaProvider::new(ctx.clone(), fill_params(config), config.seed);
    let wparams = WhitneyParams {
        fill: fill_params(config),
        ..WhitneyParams::default()
    };
    let json = match sphere.dim {
        0 => {
            let z0 = Point::from_spd(sphere.points[0].clone())?;
            let z1 = Point::from_spd(sphere.points[1].clone())?;
            let path = whitney_fill_path(&z0, &z1, &mut provider, &wparams)?;
            report.check_le(
                "path_level_residual",
                config.n,
                config.seed,
                path.max_level_residual,
                1e-7,
            );
            report.fit("path_length", path.length);
            report.fit("path_lip", path.lip);
            crate::filling::schema::path_to_json(&path)
        }
        1 => {
            let pts: Result<Vec<Point>> = sphere
                .points
                .iter()
                .map(|m| Point::from_spd(m.clone()))
                .collect();
            let alpha = LoopInZ::from_points(pts?, &ctx)?;
            let disk = whitney_fill_disk(&alpha, &mut provider, &wparams)?;
            report.check_le(
                "disk_level_residual",
                config.n,
                config.seed,
                disk.max_level_residual,
                1e-6,
            );
            report.check_le(
                "boundary_residual",
                config.n,
                config.seed,
                disk.boundary_residual,
                1e-9,
            );
            report.fit("disk_lip", disk.lip);
            report.fit("input_lip", alpha.lip);
            report.check_le(
                "fill_constant_cap",
                config.n,
                config.seed,
                disk.lip,
                config.calib.cap_fill * (alpha.lip + 1.0),
            );
            crate::filling::schema::disk_to_json(&disk)
        }
        other => {
            return Err(Error::SchemaViolation(format!(
                "sphere dimension {} is outside the supported range {{0, 1}}",
                other
            )))
        }
    };
    crate::report::write_atomic(output, json.as_bytes())?;
    report.wall_ms = start.elapsed().as_millis();
    Ok(report)
}
