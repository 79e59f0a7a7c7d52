//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};
use tatesha_core::bsd;
use tatesha_core::equidist;
use tatesha_core::level::{Level, LevelConfig, ANGLE_RESOLUTION, DEFAULT_PRECISION};
use tatesha_core::lfun::{self, RH_TOLERANCE, SPECIAL_VALUE_TOLERANCE};
use tatesha_core::oracle;
use tatesha_core::report;

const CASES: [(u64, u32); 5] = [(7, 1), (7, 2), (13, 1), (11, 1), (11, 2)];
const L_TIME_LIMIT: Duration = Duration::from_secs(60);
const SWEEP_TIME_LIMIT: Duration = Duration::from_secs(30 * 60);
const DIRECT_SUM_BUDGET: u64 = 1_000_000;
const POINT_COUNT_BUDGET: u64 = 10_000_000;
/// |tors|^2 <= C h^4
const TORSION_HEIGHT_C: f64 = 1.0;
/// D* <= C a^{1/2} / q^{a/4}
const DISCREPANCY_C: f64 = 1.0;
/// |log L*/log H| <= c/a and Brauer-Siegel within [1 - c1/a, 1 + c2/a]
const TREND_C: f64 = 0.5;
const TREND_C1: f64 = 0.5;
const TREND_C2: f64 = 0.5;
const SWEEP_Q: u64 = 7;
const SWEEP_A_MAX: u32 = 4;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn level(q: u64, a: u32) -> Level {
    Level::new(LevelConfig::new(q, a)).expect("level")
}

struct CaseData {
    q: u64,
    a: u32,
    level: Level,
    l: lfun::IntPoly,
    elapsed: Duration,
}

fn criterion_1(cases: &[CaseData]) -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    for c in cases {
        let deg = 4 * (c.q.pow(c.a) - 1) as usize;
        let w = lfun::verify_functional_equation(&c.l, c.q);
        let good = c.l.degree() == deg && c.l.coeffs()[0] == 1 && w.is_ok() && c.elapsed < L_TIME_LIMIT;
        ok &= good;
        notes.push(format!("({},{}) deg {} w {:?} {:.1}s", c.q, c.a, c.l.degree(), w.ok(), c.elapsed.as_secs_f64()));
    }
    verdict(ok, notes.join("; "))
}

fn criterion_2_3(cases: &[CaseData]) -> (Verdict, Verdict) {
    let (mut ok2, mut ok3) = (true, true);
    let (mut n2, mut n3) = (Vec::new(), Vec::new());
    for c in cases {
        let num = c.level.numerics_resolved(DEFAULT_PRECISION, ANGLE_RESOLUTION).expect("numerics");
        match lfun::verify_riemann_hypothesis(&c.level, &c.l, &num, RH_TOLERANCE) {
            Ok(r) => n2.push(format!("({},{}) {:.1e}", c.q, c.a, r.polynomial_deviation.max(r.factor_deviation))),
            Err(e) => {
                ok2 = false;
                n2.push(format!("({},{}) {e}", c.q, c.a));
            }
        }
        match lfun::special_value(&c.l, c.q) {
            Ok(v) => {
                let ball = lfun::special_value_angles(&num).expect("angle route");
                let gap = lfun::special_value_discrepancy(&v, &ball);
                ok3 &= gap < SPECIAL_VALUE_TOLERANCE && v > 0;
                n3.push(format!("({},{}) rel {:.1e}", c.q, c.a, gap));
            }
            Err(e) => {
                ok3 = false;
                n3.push(format!("({},{}) {e}", c.q, c.a));
            }
        }
    }
    (verdict(ok2, n2.join("; ")), verdict(ok3, format!("rank 0; {}", n3.join("; "))))
}

fn criterion_4(cases: &[CaseData]) -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for c in cases {
        let ds = oracle::direct_sums_check(&c.level, DIRECT_SUM_BUDGET);
        let pc = oracle::point_count_checks(&c.level, 3, POINT_COUNT_BUDGET, DEFAULT_PRECISION);
        ok &= ds.is_ok() && pc.is_ok();
        notes.push(format!(
            "({},{}) sums {} counts {}",
            c.q,
            c.a,
            ds.map(|r| r.checked.to_string()).unwrap_or_else(|e| e.to_string()),
            pc.map(|r| r.len().to_string()).unwrap_or_else(|e| e.to_string())
        ));
    }
    verdict(ok, notes.join("; "))
}

fn criterion_5() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for (q, a) in [(7, 1), (7, 2)] {
        match oracle::identity_suite(&level(q, a), DEFAULT_PRECISION, DIRECT_SUM_BUDGET) {
            Ok(r) => {
                let all = ["Ga1", "Ga2", "Ga3", "Ga4", "Ga5", "Kl1", "Kl2", "Kl3", "Kl4"].iter().all(|k| r.passed.get(*k).copied().unwrap_or(0) > 0);
                ok &= all && r.passed["Ga1"] == r.orbits && r.passed["Kl3"] == r.places;
                notes.push(format!("({q},{a}) {} orbits {} places rel {:.1e}", r.orbits, r.places, r.max_relative_error));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("({q},{a}) {e}"));
            }
        }
    }
    verdict(ok, notes.join("; "))
}

fn criterion_6(cases: &[CaseData]) -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for c in cases {
        match bsd::dim_sha(&c.level, &c.l) {
            Ok(d) => notes.push(format!("({},{}) {}/{}", c.q, c.a, d.valuation_formula, d.newton_polygon)),
            Err(e) => {
                ok = false;
                notes.push(format!("({},{}) {e}", c.q, c.a));
            }
        }
    }
    verdict(ok, notes.join("; "))
}

fn criterion_7(cases: &[CaseData]) -> Verdict {
    let mut ok = true;
    let mut fitted: f64 = 0.0;
    let mut notes = Vec::new();
    for c in cases {
        let inv = bsd::invariants(c.q, c.a);
        let qa = c.q.pow(c.a);
        ok &= inv.h == qa + 1 && inv.conductor_degree == 4 * qa + 4 && inv.l_degree + 8 == inv.conductor_degree;
        ok &= inv.consistent_with(&c.l);
        let v = lfun::special_value(&c.l, c.q).expect("special value");
        match bsd::sha_report(&c.level, &c.l, &v) {
            Ok(r) => {
                let integral = r.candidates.iter().filter(|x| x.integral).count();
                ok &= integral > 0 && r.torsion.stabilized && r.torsion.places.len() >= 3;
                fitted = fitted.max(r.torsion.hindry_pacheco_ratio);
                notes.push(format!("({},{}) tors {} over {} places, {} integral", c.q, c.a, r.torsion.bound, r.torsion.places.len(), integral));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("({},{}) {e}", c.q, c.a));
            }
        }
    }
    ok &= fitted <= TORSION_HEIGHT_C;
    verdict(ok, format!("fitted C {fitted:.3e} <= {TORSION_HEIGHT_C}; {}", notes.join("; ")))
}

fn criterion_8() -> Verdict {
    let levels: Vec<u32> = (1..=SWEEP_A_MAX).collect();
    let runs = match report::run_discrepancy_rows(SWEEP_Q, &levels, DEFAULT_PRECISION, false) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let rows: Vec<_> = runs.iter().map(|r| r.row.clone()).collect();
    let c = equidist::fitted_discrepancy_constant(&rows);
    let mut ok = c <= DISCREPANCY_C;
    let mut gaps = Vec::new();
    for &a in &levels {
        let lv = level(SWEEP_Q, a);
        let num = lv.numerics_resolved(DEFAULT_PRECISION, ANGLE_RESOLUTION).expect("numerics");
        match equidist::min_angle_gap(&lv, &num) {
            Ok(rows) => {
                ok &= rows.iter().all(|r| r.min_gap_lower > 0.0);
                let m = rows.iter().map(|r| r.min_gap_lower).fold(f64::INFINITY, f64::min);
                gaps.push(format!("a={a} {m:.1e}"));
            }
            Err(e) => {
                ok = false;
                gaps.push(format!("a={a} {e}"));
            }
        }
    }
    let d: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.discrepancy)).collect();
    verdict(ok, format!("D* [{}] fitted C {c:.3} <= {DISCREPANCY_C}; min gaps {}", d.join(", "), gaps.join(", ")))
}

fn criterion_9() -> Verdict {
    let t = Instant::now();
    match report::run_sweep(SWEEP_Q, SWEEP_A_MAX, DEFAULT_PRECISION, false) {
        Ok(s) => {
            let f = |q: &report::Quantity| q.as_f64().unwrap_or(f64::NAN);
            let (c, c1, c2) = (f(&s.fitted_c), f(&s.fitted_c1), f(&s.fitted_c2));
            let el = t.elapsed();
            let ok = c <= TREND_C && c1 <= TREND_C1 && c2 <= TREND_C2 && el < SWEEP_TIME_LIMIT;
            verdict(ok, format!("c {c:.3} <= {TREND_C}, c1 {c1:.3} <= {TREND_C1}, c2 {c2:.3} <= {TREND_C2}, {:.0}s", el.as_secs_f64()))
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn run_cli(dir: &Path, args: &[&str]) -> i32 {
    let mut full = vec!["tatesha".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.push("--out".into());
    full.push(dir.to_string_lossy().into_owned());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    tatesha_cli::main_with_args(full, &mut out, &mut err)
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .expect("artifact dir")
        .map(|e| {
            let e = e.expect("entry");
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).expect("artifact"))
        })
        .collect();
    v.sort();
    v
}

fn criterion_10() -> Verdict {
    let runs: [&[&str]; 4] = [
        &["lfun", "--q", "7", "--a", "1"],
        &["sha", "--q", "7", "--a", "1"],
        &["angles", "--q", "7", "--a", "2"],
        &["discrepancy", "--q", "7", "--a", "2"],
    ];
    let d1 = tempfile::tempdir().expect("tempdir");
    let d2 = tempfile::tempdir().expect("tempdir");
    let mut ok = true;
    for r in runs {
        ok &= run_cli(d1.path(), &[r, &["--jobs", "1"]].concat()) == 0;
        ok &= run_cli(d2.path(), &[r, &["--jobs", "4"]].concat()) == 0;
    }
    let (s1, s2) = (snapshot(d1.path()), snapshot(d2.path()));
    let identical = s1 == s2 && !s1.is_empty();
    let base = lfun::l_polynomial(&level(7, 1)).expect("L");
    let twisted = Level::new(LevelConfig { psi_mult: 2, ..LevelConfig::new(7, 1) })
        .and_then(|lv| lfun::l_polynomial(&lv))
        .expect("twisted L");
    ok &= identical && base == twisted;
    verdict(ok, format!("{} artifacts byte-identical across reruns: {identical}; psi twist leaves L unchanged: {}", s1.len(), base == twisted))
}

fn main() {
    let cases: Vec<CaseData> = CASES
        .iter()
        .map(|&(q, a)| {
            let t = Instant::now();
            let lv = level(q, a);
            let l = lfun::l_polynomial(&lv).expect("L");
            CaseData { q, a, level: lv, l, elapsed: t.elapsed() }
        })
        .collect();
    let (v2, v3) = criterion_2_3(&cases);
    let results = [
        ("exact L-function", criterion_1(&cases)),
        ("Riemann hypothesis", v2),
        ("special value double entry", v3),
        ("oracle equality", criterion_4(&cases)),
        ("character-sum identities", criterion_5()),
        ("dim Sha = 0", criterion_6(&cases)),
        ("BSD ledger", criterion_7(&cases)),
        ("angle distribution", criterion_8()),
        ("trend", criterion_9()),
        ("determinism", criterion_10()),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        println!("criterion {:>2} {} {}: {}", i + 1, if v.ok { "PASS" } else { "FAIL" }, name, v.detail);
        failed += usize::from(!v.ok);
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
