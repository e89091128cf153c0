use horolab::filling::*;
use horolab::horosphere::{compute_margins, retract_to_z};
use horolab::liecore::UnitUpper;
use horolab::sampling;
use horolab::symspace::{BusemannConfig, Point};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn time_one_disk() {
    let ctx = compute_margins(BusemannConfig::barycentric(4)).unwrap();
    let mut provider = OmegaProvider::new(ctx.clone(), FillParams::default(), 7);
    let params = WhitneyParams { samples_per_edge: 2, ..WhitneyParams::default() };
    let amp = 1.6f64;
    let mut rng = ChaCha8Rng::seed_from_u64(3002);
    let base = sampling::random_unipotent(&mut rng, 4, 0.3);
    let m = 16usize;
    let mut pts = Vec::new();
    for i in 0..m {
        let ang = std::f64::consts::TAU * i as f64 / m as f64;
        let mut l = nalgebra::DMatrix::<f64>::zeros(4, 4);
        l[(0, 1)] = amp * ang.cos();
        l[(1, 2)] = amp * ang.sin();
        l[(2, 3)] = 0.5 * amp * (2.0 * ang).cos();
        let u = UnitUpper::from_log(&l);
        pts.push(retract_to_z(&Point::from_group(base.mul(&u).as_group()), &ctx).unwrap());
    }
    let alpha = LoopInZ::from_points(pts, &ctx).unwrap();
    eprintln!("lip = {:.3}", alpha.lip);
    let t0 = std::time::Instant::now();
    let disk = whitney_fill_disk(&alpha, &mut provider, &params).unwrap();
    eprintln!("disk {} triangles {} samples lip {:.2} in {:?}", disk.triangles.len(), disk.samples.len(), disk.lip, t0.elapsed());
}
