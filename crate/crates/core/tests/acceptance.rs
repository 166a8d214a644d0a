//! One line per acceptance criterion; the process fails if any is red.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use canard_core::canard::Route;
use canard_core::model::{builtin_fhn, builtin_vdp};
use canard_core::oracle::exit::{bisect_canard, ExitGeometry};
use canard_core::oracle::integrator::IntegratorSettings;
use canard_core::oracle::sweep::{sweep_epsilon, SweepCase, SweepReport, SweepSettings};
use canard_core::pipeline::{analyze, Analysis};

const FHN_EPS: [f64; 4] = [1e-2, 5e-3, 1e-3, 5e-4];
const FHN_PRED: [f64; 4] = [0.06308, 0.05629, 0.05196, 0.05150];
const FHN_OBS: [f64; 4] = [0.0582046, 0.0545535, 0.0517585, 0.0514108];
const VDP_ORACLE: f64 = -0.006509;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn vdp(eps: f64) -> Analysis {
    let m = builtin_vdp();
    let p = m.default_params().with(m.epsilon_index(), eps);
    analyze(&m, &p, (-0.2, 0.2), &[0.0, 0.0], &Default::default()).expect("vdp analysis")
}

fn vdp_oracle(settings: &IntegratorSettings, geometry: &ExitGeometry) -> Result<f64, String> {
    let m = builtin_vdp();
    let p = m.default_params();
    bisect_canard(&m, &p, (-0.01, -0.001), 1e-9, settings, geometry)
        .map(|r| r.lambda_c)
        .map_err(|e| e.to_string())
}

fn criterion_1() -> Verdict {
    let a = vdp(0.05);
    let (l, w) = (a.hopf.lambda_h, a.hopf.omega0);
    check(
        l.abs() <= 1e-8 && (w - 0.223607).abs() <= 1e-4 && a.hopf_seconds < 1.0,
        format!("lambda_H = {l:e}, omega0 = {w:.6}, hopf {:.2e} s", a.hopf_seconds),
    )
}

fn criterion_2() -> Verdict {
    let a = vdp(0.05);
    let l1 = a.lyapunov.l1_mc;
    check(
        (l1 - 0.4762).abs() <= 0.010 && a.lyapunov_seconds < 1.0,
        format!("l1_mc = {l1:.6}, lyapunov {:.2e} s", a.lyapunov_seconds),
    )
}

fn criterion_3() -> Verdict {
    let a = vdp(0.05);
    let mc = a.prediction(Route::Mc).ok_or("no mc route")?.lambda_c;
    let nf = a.prediction(Route::AnalyticNormalForm).ok_or("no analytic route")?.lambda_c;
    let identity = a.predictions.iter().all(|p| {
        let exact = p.lambda_h - p.k * p.epsilon;
        (p.lambda_c - exact).abs() <= 2.0 * f64::EPSILON * (p.lambda_h.abs() + (p.k * p.epsilon).abs())
    });
    check(
        (mc + 0.0060).abs() <= 3e-4 && (nf + 0.00625).abs() <= 1e-8 && identity,
        format!("mc {mc:.6}, analytic {nf:.8}, identity {identity}"),
    )
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let l = vdp_oracle(&Default::default(), &ExitGeometry::vdp_default())?;
    let t = start.elapsed();
    check(
        (l - VDP_ORACLE).abs() <= 5e-5 && t < Duration::from_secs(60),
        format!("lambda_c* = {l:.9} in {:.2} s", t.as_secs_f64()),
    )
}

fn fhn_sweep() -> (SweepReport, Duration) {
    let m = builtin_fhn();
    let cases: Vec<SweepCase> = FHN_EPS
        .iter()
        .map(|&epsilon| SweepCase {
            epsilon,
            hopf_bracket: (0.04, 0.08),
            oracle_bracket: None,
        })
        .collect();
    let start = Instant::now();
    let report = sweep_epsilon(&m, &m.default_params(), &cases, &SweepSettings::default(), None);
    (report, start.elapsed())
}

fn criterion_5(report: &SweepReport, elapsed: Duration) -> Verdict {
    let mut ok = elapsed < Duration::from_secs(600);
    let mut cols = Vec::new();
    for ((row, p), o) in report.rows().zip(FHN_PRED).zip(FHN_OBS) {
        match (row.lambda_c_pred, row.lambda_c_obs) {
            (Some(pred), Some(obs)) => {
                ok &= (pred - p).abs() <= 1e-3 && (obs - o).abs() <= 1e-3;
                cols.push(format!("{:e}: {pred:.5}/{obs:.7}", row.epsilon));
            }
            _ => {
                ok = false;
                cols.push(format!("{:e}: {}", row.epsilon, row.error.clone().unwrap_or_default()));
            }
        }
    }
    check(ok, format!("{} in {:.1} s", cols.join(", "), elapsed.as_secs_f64()))
}

fn criterion_6(report: &SweepReport) -> Verdict {
    let rows = report.rows().filter(|r| r.abs_err.is_some()).count();
    match report.slope {
        Some(s) => check(rows == 4 && (1.2..=1.8).contains(&s), format!("slope {s:.4} over {rows} rows")),
        None => Err(format!("no slope ({rows} rows)")),
    }
}

fn criterion_7() -> Verdict {
    let routes = [Route::Gh, Route::Clw, Route::Mc, Route::Ku];
    let ks = |a: &Analysis| -> Result<Vec<f64>, String> {
        routes
            .iter()
            .map(|&r| a.prediction(r).map(|p| p.k).ok_or(format!("missing {r:?}")))
            .collect()
    };
    let coarse = ks(&vdp(0.05))?;
    let fine = ks(&vdp(0.001))?;
    let gap = |k: &[f64]| k.iter().map(|k| (k - 0.125).abs()).fold(0.0, f64::max);
    let ok = coarse.iter().all(|k| (0.10..=0.15).contains(k))
        && fine.iter().all(|k| (0.120..=0.130).contains(k))
        && gap(&fine) <= gap(&coarse);
    check(ok, format!("gh/clw/mc/ku at 0.05 {coarse:.6?}, at 0.001 {fine:.6?}"))
}

/// The property suite is its own test binary next to this one.
fn property_binary() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?;
    std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("properties-") && p.extension().is_none()
        })
        .max_by_key(|p| p.metadata().and_then(|m| m.modified()).ok())
}

fn criterion_8() -> Verdict {
    let bin = property_binary().ok_or("property test binary not built")?;
    let out = Command::new(&bin).output().map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    let summary = text
        .lines()
        .find(|l| l.starts_with("test result"))
        .unwrap_or("no summary")
        .to_string();
    check(out.status.success(), summary)
}

fn criterion_9(baseline: f64) -> Verdict {
    let base = ExitGeometry::vdp_default();
    let halved = IntegratorSettings {
        rtol: 5e-13,
        atol: 5e-15,
        ..Default::default()
    };
    let mut variants: Vec<(String, IntegratorSettings, ExitGeometry)> =
        vec![("tol/2".into(), halved, base.clone())];
    for x in [-1.1, -0.9] {
        let g = ExitGeometry { seed: vec![x, 0.0], ..base.clone() };
        variants.push((format!("seed {x}"), Default::default(), g));
    }
    for r in [0.8, 1.2] {
        let g = ExitGeometry { right: r, ..base.clone() };
        variants.push((format!("right {r}"), Default::default(), g));
    }
    for l in [-0.05, 0.05] {
        let g = ExitGeometry { left: l, ..base.clone() };
        variants.push((format!("left {l}"), Default::default(), g));
    }
    let mut worst: f64 = 0.0;
    for (name, s, g) in &variants {
        let l = vdp_oracle(s, g).map_err(|e| format!("{name}: {e}"))?;
        worst = worst.max((l - baseline).abs());
    }
    check(worst <= 1e-4, format!("max shift {worst:.2e} over {} variants", variants.len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let t = start.elapsed().as_secs_f64();
        let (tag, detail) = match v {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n}: {tag} ({t:.2} s) {detail}");
    };
    report(1, &mut criterion_1);
    report(2, &mut criterion_2);
    report(3, &mut criterion_3);
    report(4, &mut criterion_4);
    let (sweep, elapsed) = fhn_sweep();
    report(5, &mut || criterion_5(&sweep, elapsed));
    report(6, &mut || criterion_6(&sweep));
    report(7, &mut criterion_7);
    report(8, &mut criterion_8);
    report(9, &mut || {
        let baseline = vdp_oracle(&Default::default(), &ExitGeometry::vdp_default())?;
        criterion_9(baseline)
    });
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
