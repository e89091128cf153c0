use horolab::config::RunConfig;
use horolab::suites;

fn show(r: &horolab::report::SuiteReport) {
    for rec in &r.records {
        eprintln!(
            "  [{}] {} measured={:.4e} bound={:.4e}",
            if rec.pass { "ok" } else { "FAIL" },
            rec.check_id,
            rec.measured,
            rec.bound
        );
    }
    for (k, v) in &r.fitted {
        eprintln!("  fit {} = {:.4}", k, v);
    }
    eprintln!("  ({} ms)", r.wall_ms);
}

#[test]
fn probe_fast_suites() {
    let mut cfg = RunConfig::for_n(3);
    cfg.samples.insert("iwasawa".into(), 200);
    cfg.samples.insert("busemann".into(), 30);
    cfg.samples.insert("busemann_pairs".into(), 500);
    cfg.samples.insert("compare".into(), 120);
    cfg.samples.insert("dil".into(), 30);
    cfg.samples.insert("dxshadows".into(), 200);
    cfg.samples.insert("largeshadows".into(), 6);
    cfg.samples.insert("pushing".into(), 80);
    cfg.samples.insert("pushing_profile".into(), 30);
    cfg.samples.insert("opposition".into(), 2000);
    for suite in ["iwasawa", "busemann", "compare", "dil", "dxshadows", "largeshadows", "pushing", "opposition"] {
        eprintln!("== suite {} (n=3)", suite);
        match suites::run_suite(&cfg, suite) {
            Ok(r) => show(&r),
            Err(e) => eprintln!("  ERROR: {}", e),
        }
    }
}

#[test]
fn probe_rank1() {
    let cfg = RunConfig::for_n(2);
    match suites::distort_rank1(&cfg) {
        Ok(r) => show(&r),
        Err(e) => eprintln!("ERROR: {}", e),
    }
}

