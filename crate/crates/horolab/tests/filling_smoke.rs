use horolab::filling::*;
use horolab::horosphere::{compute_margins, retract_to_z};
use horolab::sampling;
use horolab::symspace::{busemann, distance, BusemannConfig, Point};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_z_point(rng: &mut ChaCha8Rng, n: usize, ctx: &horolab::horosphere::HorosphereContext, spread: f64) -> Point {
    let g = sampling::random_unipotent(rng, n, spread);
    let x = Point::from_group(g.as_group());
    retract_to_z(&x, ctx).unwrap()
}

#[test]
fn omega_data_builds_for_sl3_edge() {
    let ctx = compute_margins(BusemannConfig::barycentric(3)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(211);
    let z0 = random_z_point(&mut rng, 3, &ctx, 0.8);
    let z1 = random_z_point(&mut rng, 3, &ctx, 0.8);
    let params = FillParams::default();
    let od = build_omega_infty(&[z0.clone(), z1.clone()], &ctx, &params, 99).unwrap();
    assert_eq!(od.faces.len(), 3);
    let edge = &od.faces[&vec![0usize, 1]];
    assert!(edge.h_anchor >= 1.0 - 1e-8);
    // vertex anchors sit exactly at level one
    for v in [vec![0usize], vec![1usize]] {
        assert!((od.faces[&v].h_anchor - 1.0).abs() < 1e-8);
    }
    // evaluate the composite at a few points of the edge
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let z = omega_eval(&od, &[0, 1], &[1.0 - t, t], &ctx).unwrap();
        assert!(busemann(&z, &ctx.cfg).unwrap().abs() < 1e-8);
    }
    // vertex evaluation lands near the vertex
    let zv = omega_eval(&od, &[0], &[1.0], &ctx).unwrap();
    let dv = distance(&zv, &z0).unwrap();
    assert!(dv < 30.0, "vertex image distance {}", dv);
}

#[test]
fn whitney_path_connects_and_stays_on_z() {
    let ctx = compute_margins(BusemannConfig::barycentric(3)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(223);
    let z0 = random_z_point(&mut rng, 3, &ctx, 1.0);
    let z1 = random_z_point(&mut rng, 3, &ctx, 1.0);
    let mut provider = OmegaProvider::new(ctx.clone(), FillParams::default(), 7);
    let params = WhitneyParams::default();
    let path = whitney_fill_path(&z0, &z1, &mut provider, &params).unwrap();
    assert!(path.max_level_residual < 1e-7, "residual {}", path.max_level_residual);
    assert!(distance(&path.points[0], &z0).unwrap() < 1e-9);
    assert!(distance(path.points.last().unwrap(), &z1).unwrap() < 1e-9);
    let amb = distance(&z0, &z1).unwrap();
    assert!(path.length >= amb - 1e-6);
    eprintln!("ambient {} path length {} lip {}", amb, path.length, path.lip);
    assert!(path.length < 1000.0);
}

#[test]
fn omega_data_builds_for_sl4_triangle() {
    let ctx = compute_margins(BusemannConfig::barycentric(4)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(227);
    let zs: Vec<Point> = (0..3).map(|_| random_z_point(&mut rng, 4, &ctx, 0.6)).collect();
    let params = FillParams::default();
    let od = build_omega_infty(&zs, &ctx, &params, 17).unwrap();
    assert_eq!(od.faces.len(), 7);
    let tri = &od.faces[&vec![0usize, 1, 2]];
    assert!(tri.h_anchor >= 1.0 - 1e-8);
    // composite evaluation across the triangle
    for bary in [
        [1.0, 0.0, 0.0],
        [0.4, 0.3, 0.3],
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [0.0, 0.5, 0.5],
        [0.1, 0.8, 0.1],
    ] {
        let z = omega_eval(&od, &[0, 1, 2], &bary, &ctx).unwrap();
        assert!(busemann(&z, &ctx.cfg).unwrap().abs() < 1e-8);
    }
}

#[test]
fn whitney_path_scaling_probe() {
    // informal probe of the length-vs-ambient relation
    let ctx = compute_margins(BusemannConfig::barycentric(3)).unwrap();
    let mut provider = OmegaProvider::new(ctx.clone(), FillParams::default(), 31);
    let params = WhitneyParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(229);
    for target in [2.0f64, 8.0, 20.0] {
        // two points far apart on the horosphere: push apart along N
        let g0 = sampling::random_unipotent(&mut rng, 3, 0.5);
        let z0 = retract_to_z(&Point::from_group(g0.as_group()), &ctx).unwrap();
        let mut lo = 0.0f64;
        let mut hi = 60.0f64;
        // bisect a unipotent scale to hit the ambient target
        let probe = |s: f64, rng: &mut ChaCha8Rng| -> Point {
            let mut r2 = rng.clone();
            let g = sampling::random_unipotent(&mut r2, 3, s.max(1e-6));
            retract_to_z(&Point::from_group(g.as_group()), &ctx).unwrap()
        };
        let mut z1 = probe(1.0, &mut rng);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            z1 = probe(mid, &mut rng);
            let d = distance(&z0, &z1).unwrap();
            if d > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let amb = distance(&z0, &z1).unwrap();
        let path = whitney_fill_path(&z0, &z1, &mut provider, &params).unwrap();
        eprintln!(
            "target {:.1}: ambient {:.3} length {:.3} ratio {:.3}",
            target,
            amb,
            path.length,
            path.length / (amb + 1.0)
        );
    }
}

#[test]
fn whitney_disk_fills_small_loop_sl4() {
    let ctx = compute_margins(BusemannConfig::barycentric(4)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(233);
    // a mild loop on the horosphere
    let m = 16usize;
    let base = sampling::random_unipotent(&mut rng, 4, 0.4);
    let mut pts = Vec::new();
    for k in 0..m {
        let ang = std::f64::consts::TAU * k as f64 / m as f64;
        let mut l = nalgebra::DMatrix::<f64>::zeros(4, 4);
        l[(0, 1)] = 2.0 * ang.cos();
        l[(1, 2)] = 2.0 * ang.sin();
        l[(2, 3)] = 1.0 * (2.0 * ang).cos();
        let u = horolab::liecore::UnitUpper::from_log(&l);
        let g = base.mul(&u).as_group();
        pts.push(retract_to_z(&Point::from_group(g), &ctx).unwrap());
    }
    let alpha = LoopInZ::from_points(pts, &ctx).unwrap();
    eprintln!("loop lip = {:.3}", alpha.lip);
    let mut provider = OmegaProvider::new(ctx.clone(), FillParams::default(), 11);
    let params = WhitneyParams {
        cell_budget: 4096,
        min_cell: 0.3,
        samples_per_edge: 2,
        fill: FillParams::default(),
    };
    let t0 = std::time::Instant::now();
    let disk = whitney_fill_disk(&alpha, &mut provider, &params).unwrap();
    eprintln!(
        "disk: {} triangles, {} samples, lip {:.3}, c_shape {:.2}, level residual {:.2e}, boundary residual {:.2e}, took {:?}",
        disk.triangles.len(),
        disk.samples.len(),
        disk.lip,
        disk.c_shape,
        disk.max_level_residual,
        disk.boundary_residual,
        t0.elapsed()
    );
    assert!(disk.max_level_residual < 1e-6);
    assert!(disk.boundary_residual < 1e-9);
    assert!(disk.lip.is_finite() && disk.lip > 0.0);
}
