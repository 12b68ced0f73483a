use std::path::Path;

use subcell_dg::harness::cases::convection_exact;
use subcell_dg::harness::output::write_artifacts;
use subcell_dg::harness::reference::{cache_path, default_cache_dir, fv_reference, solve_fv};
use subcell_dg::harness::{run_case, run_case_with, CaseKind, ReferenceCase, RunConfig};

fn fv_convection_error(cells: usize) -> f64 {
    let case = CaseKind::ConvectionGaussian;
    let sol = solve_fv(ReferenceCase::Case(case), cells, 1.0).unwrap();
    let dx = sol.dx();
    // midpoint sums against the exact solution on a much finer grid
    let sub = 16;
    (0..cells * sub)
        .map(|i| {
            let x = (i as f64 + 0.5) * dx / sub as f64;
            (sol.sample(x)[0] - convection_exact(case, x, 1.0).unwrap()).abs() * dx / sub as f64
        })
        .sum()
}

#[test]
fn fv_reference_converges_at_first_order_on_smooth_data() {
    let e: Vec<f64> = [400, 800, 1600].iter().map(|&c| fv_convection_error(c)).collect();
    let order = (e[1] / e[2]).log2();
    assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
    assert!((order - 1.0).abs() < 0.15, "order {order}");
}

#[test]
fn single_shock_moves_at_the_rankine_hugoniot_speed() {
    let [rl, ul, pl] = subcell_dg::harness::cases::SHU_OSHER_INLET;
    let (rr, ur, pr) = (1.0, 0.0, 1.0);
    let g = 1.4;
    let speed = (rl * ul - rr * ur) / (rl - rr);
    // the momentum and energy jumps agree with the mass jump for this state
    let mom = (rl * ul * ul + pl - rr * ur * ur - pr) / (rl * ul - rr * ur);
    let e = |r: f64, u: f64, p: f64| p / (g - 1.0) + 0.5 * r * u * u;
    let en = ((e(rl, ul, pl) + pl) * ul - (e(rr, ur, pr) + pr) * ur) / (e(rl, ul, pl) - e(rr, ur, pr));
    assert!((speed - 3.5496).abs() < 1e-3);
    assert!((mom / speed - 1.0).abs() < 1e-3 && (en / speed - 1.0).abs() < 1e-3);

    let t = 1.0;
    let sol = solve_fv(ReferenceCase::SingleShock, 2000, t).unwrap();
    let mid = 0.5 * (rl + rr);
    let i = sol.values.iter().rposition(|s| s[0] > mid).unwrap();
    let x_shock = sol.domain.0 + (i as f64 + 1.0) * sol.dx();
    let measured = (x_shock - subcell_dg::harness::cases::SHU_OSHER_JUMP) / t;
    assert!((measured / speed - 1.0).abs() < 0.02, "measured {measured} vs {speed}");
}

#[test]
fn shu_osher_reference_passes_richardson_self_check() {
    let case = ReferenceCase::Case(CaseKind::ShuOsher);
    let dir = default_cache_dir();
    let r4 = fv_reference(case, 4096, Some(&dir)).unwrap();
    let r8 = fv_reference(case, 8192, Some(&dir)).unwrap();
    let r16 = fv_reference(case, 16384, Some(&dir)).unwrap();
    let d1 = r4.l1_difference(&r8, 0);
    let d2 = r8.l1_difference(&r16, 0);
    // halving the cell size should shrink the difference
    assert!(d1 > d2, "{d1} vs {d2}");
    // a first-order extrapolation predicts d1 = 2 d2; allow a factor 2 on top
    assert!(d1 < 2.0 * (2.0 * d2), "{d1} vs {d2}");
}

#[test]
fn corrupted_cache_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let case = ReferenceCase::Case(CaseKind::Burgers);
    let fresh = fv_reference(case, 64, Some(dir.path())).unwrap();
    let path = cache_path(dir.path(), case, 64);
    std::fs::write(&path, "{ not json").unwrap();
    let again = fv_reference(case, 64, Some(dir.path())).unwrap();
    assert_eq!(fresh, again);
    // a well-formed file for the wrong resolution is also rejected
    let mut wrong = fresh.clone();
    wrong.cells = 32;
    std::fs::write(&path, serde_json::to_string(&wrong).unwrap()).unwrap();
    assert_eq!(fv_reference(case, 64, Some(dir.path())).unwrap(), fresh);
    let cached: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(cached["cells"], 64);
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn identical_configs_give_identical_csv() {
    let mut cfg = RunConfig::for_case(CaseKind::Burgers);
    cfg.t_final = 0.3;
    cfg.snapshot_times = vec![0.0, 0.1, 0.3];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_artifacts(&run_case(&cfg).unwrap(), a.path()).unwrap();
    write_artifacts(&run_case(&cfg).unwrap(), b.path()).unwrap();
    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    assert_eq!(fa.len(), 6);
    assert_eq!(fa, fb);
    assert!(a.path().join("summary.json").exists());
}

#[test]
fn burgers_sensor_stays_local() {
    let mut cfg = RunConfig::for_case(CaseKind::Burgers);
    cfg.t_final = 0.55;
    cfg.snapshot_times = vec![0.55];
    let art = run_case(&cfg).unwrap();
    let snap = art.snapshots.last().unwrap();
    assert!((snap.time - 0.55).abs() < 1e-12);
    let active = snap.sensor.gamma.iter().filter(|g| **g > 0.0).count();
    assert!((1..=3).contains(&active), "{:?}", snap.sensor.gamma);
}

#[test]
fn observer_sees_every_step() {
    let mut cfg = RunConfig::for_case(CaseKind::ConvectionGaussian);
    cfg.n_elements = 4;
    cfg.t_final = 0.1;
    let mut seen = 0;
    let art = run_case_with(&cfg, Some(0.01), |_, _| seen += 1).unwrap();
    assert_eq!(seen, 10);
    assert_eq!(art.summary.steps, 10);
}
