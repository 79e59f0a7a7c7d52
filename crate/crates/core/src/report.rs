//! Versioned report schema and the runners that fill it.
//!
//! Every emitted number is a [`Quantity`] tagged with how it was obtained.
//! Integers that can grow without bound travel as decimal strings.

use crate::bsd::{self, Invariants, PlaceJacobian};
use crate::cyclo::BigRational;
use crate::equidist::{self, AngleSample, DiscrepancyRow};
use crate::error::{Error, Result};
use crate::level::{Level, LevelConfig, LevelNumerics, ANGLE_RESOLUTION};
use crate::lfun::{self, IntPoly, RH_TOLERANCE, SPECIAL_VALUE_TOLERANCE};
use crate::oracle;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "tatesha/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// computed in exact arithmetic
    Exact,
    /// floating point; `error_bound` bounds |value - true value|
    Numeric,
    /// floating point bound from above on a nonnegative quantity
    UpperBound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub value: Value,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<f64>,
}

impl Quantity {
    pub fn exact(v: impl ToString) -> Self {
        Quantity { value: Value::String(v.to_string()), provenance: Provenance::Exact, error_bound: None }
    }

    pub fn numeric(v: f64, bound: f64) -> Self {
        Quantity { value: num(v), provenance: Provenance::Numeric, error_bound: Some(bound) }
    }

    pub fn upper_bound(v: f64) -> Self {
        Quantity { value: num(v), provenance: Provenance::UpperBound, error_bound: None }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match &self.value {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => s.parse().ok(),
            _ => None,
        }
    }
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

/// Relative error of an f64 read off a 256-bit computation.
const F64_REL: f64 = 4.0 * f64::EPSILON;

/// Common header of every report.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope<T> {
    pub schema: &'static str,
    pub command: String,
    pub q: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_max: Option<u32>,
    pub precision_bits: u32,
    pub out_of_hypothesis: bool,
    pub passed: bool,
    pub result: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RhSection {
    pub factor_deviation: Quantity,
    pub polynomial_deviation: Quantity,
    pub route: String,
    pub roots: usize,
    pub precision_bits: u32,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LfunReport {
    pub degree: Quantity,
    pub expected_degree: Quantity,
    pub constant_term: Quantity,
    pub leading_coefficient: Quantity,
    /// all coefficients collapsed to Z without remainder
    pub integral: bool,
    pub sign: Quantity,
    pub galois_classes: usize,
    pub analytic_rank: Quantity,
    pub special_value: Quantity,
    pub special_value_angles: Quantity,
    pub special_value_relative_gap: Quantity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub riemann_hypothesis: Option<RhSection>,
}

/// Assembles L and runs the structural checks. RH is optional since its
/// cost grows quickly with the degree.
pub fn run_lfun(level: &Level, num: &LevelNumerics, check_rh: bool) -> Result<(IntPoly, LfunReport)> {
    let q = level.q();
    let classes = lfun::galois_classes(level)?;
    let l = lfun::l_polynomial(level)?;
    let w = lfun::verify_functional_equation(&l, q)?;
    let v = lfun::special_value(&l, q)?;
    let ball = lfun::special_value_angles(num)?;
    let gap = lfun::special_value_discrepancy(&v, &ball);
    if !(gap < SPECIAL_VALUE_TOLERANCE) {
        return Err(Error::SpecialValue(format!("routes differ by {gap:e}")));
    }
    let rh = if check_rh {
        let r = lfun::verify_riemann_hypothesis(level, &l, num, RH_TOLERANCE)?;
        Some(RhSection {
            factor_deviation: Quantity::upper_bound(r.factor_deviation),
            polynomial_deviation: Quantity::upper_bound(r.polynomial_deviation),
            route: r.polynomial_route,
            roots: r.roots,
            precision_bits: r.prec,
            tolerance: r.tol,
        })
    } else {
        None
    };
    let c = l.coeffs();
    let report = LfunReport {
        degree: Quantity::exact(l.degree()),
        expected_degree: Quantity::exact(lfun::expected_degree(q, level.a())),
        constant_term: Quantity::exact(&c[0]),
        leading_coefficient: Quantity::exact(&c[l.degree()]),
        integral: true,
        sign: Quantity::exact(w),
        galois_classes: classes.len(),
        analytic_rank: Quantity::exact(0),
        special_value: Quantity::exact(&v),
        special_value_angles: Quantity::numeric(ball.to_f64(), ball.rad_f64() + ball.to_f64().abs() * F64_REL),
        special_value_relative_gap: Quantity::upper_bound(gap),
        riemann_hypothesis: rh,
    };
    Ok((l, report))
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionSection {
    pub places: Vec<PlaceJacobian>,
    pub running_gcd: Vec<u64>,
    pub bound: Quantity,
    pub stabilized: bool,
    /// bound^2 / h^4
    pub bound_over_height: Quantity,
    pub caveat: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateRow {
    pub c_inf: u32,
    pub torsion: u64,
    pub sha: Quantity,
    pub integral: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brauer_siegel: Option<Quantity>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShaSection {
    /// small integers fixed by closed formulas; all exact
    pub invariants: Invariants,
    pub special_value: Quantity,
    pub torsion: TorsionSection,
    pub candidates: Vec<CandidateRow>,
    pub log_special_value_over_log_height: Quantity,
    pub brauer_siegel_range: [Quantity; 2],
    pub dim_sha_valuation: Quantity,
    pub dim_sha_newton: Quantity,
}

fn ratio_bound(x: f64) -> f64 {
    x.abs() * F64_REL + f64::EPSILON
}

pub fn run_sha(level: &Level, l: &IntPoly, l_star: &BigRational) -> Result<ShaSection> {
    let r = bsd::sha_report(level, l, l_star)?;
    let (lo, hi) = r.brauer_siegel_range;
    Ok(ShaSection {
        special_value: Quantity::exact(&r.special_value),
        torsion: TorsionSection {
            bound: Quantity::exact(r.torsion.bound),
            bound_over_height: Quantity::numeric(
                r.torsion.hindry_pacheco_ratio,
                ratio_bound(r.torsion.hindry_pacheco_ratio),
            ),
            places: r.torsion.places,
            running_gcd: r.torsion.running_gcd,
            stabilized: r.torsion.stabilized,
            caveat: r.torsion.caveat,
        },
        candidates: r
            .candidates
            .iter()
            .map(|c| CandidateRow {
                c_inf: c.c_inf,
                torsion: c.torsion,
                sha: Quantity::exact(&c.value),
                integral: c.integral,
                brauer_siegel: c.brauer_siegel.map(|b| Quantity::numeric(b, ratio_bound(b))),
            })
            .collect(),
        log_special_value_over_log_height: Quantity::numeric(r.special_value_ratio, ratio_bound(r.special_value_ratio)),
        brauer_siegel_range: [Quantity::numeric(lo, ratio_bound(lo)), Quantity::numeric(hi, ratio_bound(hi))],
        dim_sha_valuation: Quantity::exact(&r.dim_sha.valuation_formula),
        dim_sha_newton: Quantity::exact(&r.dim_sha.newton_polygon),
        invariants: r.invariants,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapSection {
    pub size: u32,
    pub orbits: usize,
    pub min_gap: Quantity,
    pub min_gap_lower: Quantity,
    /// log10 of the Liouville-type lower bound; reported, never asserted
    pub log10_lower_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnglesReport {
    pub places: usize,
    pub max_angle_radius: Quantity,
    pub min_gaps: Vec<GapSection>,
    pub gauss_angle_values: std::collections::BTreeMap<u32, usize>,
    pub gauss_angle_residual: Quantity,
    pub nu_elements: Quantity,
    pub nu_places: Quantity,
    pub nu_multiplicities_equal: bool,
    pub nu_direct_checked: Quantity,
}

pub fn run_angles(level: &Level, num: &LevelNumerics, budget: u64) -> Result<(AngleSample, AnglesReport)> {
    let sample = AngleSample::new(level, num)?;
    let gaps = equidist::min_angle_gap(level, num)?;
    let clusters = equidist::gauss_angle_clusters(level, num)?;
    let nu = equidist::nu_presentation(level, budget)?;
    let r = sample.max_radius;
    let report = AnglesReport {
        places: sample.angles.len(),
        max_angle_radius: Quantity::upper_bound(r),
        min_gaps: gaps
            .iter()
            .map(|g| GapSection {
                size: g.size,
                orbits: g.orbits,
                min_gap: Quantity::numeric(g.min_gap, 2.0 * r + 8.0 * f64::EPSILON),
                min_gap_lower: Quantity::numeric(g.min_gap_lower, 8.0 * f64::EPSILON),
                log10_lower_bound: g.log10_bound,
            })
            .collect(),
        gauss_angle_values: clusters.distinct,
        gauss_angle_residual: Quantity::upper_bound(clusters.max_residual),
        nu_elements: Quantity::exact(nu.elements),
        nu_places: Quantity::exact(nu.places),
        nu_multiplicities_equal: nu.multiplicities_equal,
        nu_direct_checked: Quantity::exact(nu.direct_checked),
    };
    Ok((sample, report))
}

/// Error of D* inherited from angle radii: the limit density is at most 2/pi.
fn discrepancy_bound(row: &DiscrepancyRow, radius: f64) -> f64 {
    2.0 / std::f64::consts::PI * radius + row.places as f64 * f64::EPSILON
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancySection {
    pub a: u32,
    pub places: u64,
    pub discrepancy: Quantity,
    /// D* q^{a/4} / a^{1/2}
    pub bound_ratio: Quantity,
    pub weyl_1: Quantity,
    pub weyl_2: Quantity,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyReport {
    pub rows: Vec<DiscrepancySection>,
    /// smallest C with D* <= C a^{1/2} / q^{a/4} on every row
    pub fitted_constant: Quantity,
}

fn discrepancy_section(row: &DiscrepancyRow, radius: f64, q: u64) -> DiscrepancySection {
    let b = discrepancy_bound(row, radius);
    let scale = (q as f64).powf(row.a as f64 / 4.0) / (row.a as f64).sqrt();
    DiscrepancySection {
        a: row.a,
        places: row.places,
        discrepancy: Quantity::numeric(row.discrepancy, b),
        bound_ratio: Quantity::numeric(row.bound_ratio, b * scale),
        weyl_1: Quantity::numeric(row.weyl[0], ratio_bound(row.weyl[0]) + 4.0 * radius),
        weyl_2: Quantity::numeric(row.weyl[1], ratio_bound(row.weyl[1]) + 6.0 * radius),
    }
}

/// One discrepancy row per level together with its raw sample data.
pub struct LevelRun {
    pub a: u32,
    pub sample: AngleSample,
    pub row: DiscrepancyRow,
}

pub fn level_config(q: u64, a: u32, allow_small_char: bool) -> LevelConfig {
    LevelConfig { allow_small_char, ..LevelConfig::new(q, a) }
}

pub fn run_discrepancy_rows(q: u64, levels: &[u32], prec: u32, allow_small_char: bool) -> Result<Vec<LevelRun>> {
    levels
        .iter()
        .map(|&a| {
            let level = Level::new(level_config(q, a, allow_small_char))?;
            let num = level.numerics_resolved(prec, ANGLE_RESOLUTION)?;
            let sample = AngleSample::new(&level, &num)?;
            let row = equidist::discrepancy_row(&sample)?;
            Ok(LevelRun { a, sample, row })
        })
        .collect()
}

pub fn discrepancy_report(runs: &[LevelRun], q: u64) -> DiscrepancyReport {
    let rows: Vec<DiscrepancyRow> = runs.iter().map(|r| r.row.clone()).collect();
    let sections: Vec<DiscrepancySection> =
        runs.iter().map(|r| discrepancy_section(&r.row, r.sample.max_radius, q)).collect();
    let c = equidist::fitted_discrepancy_constant(&rows);
    let cb = sections.iter().filter_map(|s| s.bound_ratio.error_bound).fold(0.0, f64::max);
    DiscrepancyReport { rows: sections, fitted_constant: Quantity::numeric(c, cb) }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub a: u32,
    pub log_special_value_over_log_height: Quantity,
    pub brauer_siegel_lower: Quantity,
    pub brauer_siegel_upper: Quantity,
    pub discrepancy: Quantity,
    pub bound_ratio: Quantity,
    pub dim_sha: Quantity,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// max_a a |log L* / log H|
    pub fitted_c: Quantity,
    /// max_a a (1 - b_a) and max_a a (b_a - 1), b_a the candidate closest to 1
    pub fitted_c1: Quantity,
    pub fitted_c2: Quantity,
    pub fitted_discrepancy_constant: Quantity,
    pub discrepancy_decreasing: bool,
}

/// L, Sha ledger and discrepancy for a = 1..=a_max.
pub fn run_sweep(q: u64, a_max: u32, prec: u32, allow_small_char: bool) -> Result<SweepReport> {
    let levels: Vec<u32> = (1..=a_max).collect();
    let runs = run_discrepancy_rows(q, &levels, prec, allow_small_char)?;
    let disc = discrepancy_report(&runs, q);
    let mut rows = Vec::new();
    let (mut c, mut c1, mut c2) = (0f64, 0f64, 0f64);
    for (a, d) in levels.iter().zip(disc.rows.iter()) {
        let level = Level::new(level_config(q, *a, allow_small_char))?;
        let l = lfun::l_polynomial(&level)?;
        lfun::verify_functional_equation(&l, q)?;
        let v = lfun::special_value(&l, q)?;
        let s = run_sha(&level, &l, &v)?;
        let ratio = s.log_special_value_over_log_height.as_f64().unwrap_or(f64::NAN);
        c = c.max(*a as f64 * ratio.abs());
        let best = s
            .candidates
            .iter()
            .filter_map(|r| r.brauer_siegel.as_ref().and_then(Quantity::as_f64))
            .min_by(|x, y| (x - 1.0).abs().total_cmp(&(y - 1.0).abs()))
            .ok_or(Error::NoIntegralCandidate)?;
        c1 = c1.max(*a as f64 * (1.0 - best));
        c2 = c2.max(*a as f64 * (best - 1.0));
        rows.push(SweepRow {
            a: *a,
            log_special_value_over_log_height: s.log_special_value_over_log_height,
            brauer_siegel_lower: s.brauer_siegel_range[0].clone(),
            brauer_siegel_upper: s.brauer_siegel_range[1].clone(),
            discrepancy: d.discrepancy.clone(),
            bound_ratio: d.bound_ratio.clone(),
            dim_sha: s.dim_sha_valuation,
        });
    }
    let dstar: Vec<f64> = rows.iter().filter_map(|r| r.discrepancy.as_f64()).collect();
    Ok(SweepReport {
        rows,
        fitted_c: Quantity::numeric(c, ratio_bound(c) * a_max as f64),
        fitted_c1: Quantity::numeric(c1, ratio_bound(c1) * a_max as f64),
        fitted_c2: Quantity::numeric(c2, ratio_bound(c2) * a_max as f64),
        fitted_discrepancy_constant: disc.fitted_constant,
        discrepancy_decreasing: dstar.windows(2).all(|w| w[1] < w[0]),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check<T: Serialize>(name: &str, r: Result<T>) -> Check {
    match r {
        Ok(v) => Check {
            name: name.into(),
            passed: true,
            detail: serde_json::to_value(v).unwrap_or(Value::Null),
        },
        Err(e) => Check {
            name: name.into(),
            passed: false,
            detail: serde_json::json!({ "error": e.kind(), "message": e.to_string() }),
        },
    }
}

/// Highest extension degree used by the point-count oracles.
pub const POINT_COUNT_MAX_K: u32 = 3;

/// Every oracle and structural check for one level. Failures are recorded,
/// not raised.
pub fn run_verify(level: &Level, prec: u32, budget: u64) -> VerifyReport {
    let q = level.q();
    let mut checks = vec![
        check("direct_sums", oracle::direct_sums_check(level, budget.min(oracle::DIRECT_SUM_BUDGET))),
        check("character_identities", oracle::identity_suite(level, prec, budget.min(oracle::DIRECT_SUM_BUDGET))),
        check("point_counts", oracle::point_count_checks(level, POINT_COUNT_MAX_K, budget, prec)),
        check(
            "squarefree",
            oracle::squarefree_check(level.params(), level.a(), 0).and_then(|r| {
                if r.squarefree {
                    Ok(r)
                } else {
                    Err(Error::OracleMismatch("wp^2 - 4 has a repeated factor".into()))
                }
            }),
        ),
        check("galois_stability", {
            let ks = lfun::galois_generators(level.params().p());
            lfun::galois_stability_check(level, &ks).map(|_| ks)
        }),
    ];
    let num = level.numerics_resolved(prec, ANGLE_RESOLUTION);
    let num = match num {
        Ok(n) => n,
        Err(e) => {
            checks.push(check::<()>("numerics", Err(e)));
            return VerifyReport { checks };
        }
    };
    match run_lfun(level, &num, true) {
        Ok((l, rep)) => {
            checks.push(check("l_function", Ok(&rep)));
            if l.degree() <= lfun::FULL_ROOT_DEGREE_CAP {
                checks.push(check(
                    "naive_assembly",
                    lfun::l_polynomial_naive(level).and_then(|n| {
                        if n == l {
                            Ok(n.degree())
                        } else {
                            Err(Error::OracleMismatch("orbit-by-orbit product differs".into()))
                        }
                    }),
                ));
            }
            checks.push(check(
                "psi_twist",
                Level::new(LevelConfig { psi_mult: 2, ..level.config.clone() })
                    .and_then(|lv| lfun::l_polynomial(&lv))
                    .and_then(|t| {
                        if t == l {
                            Ok(2)
                        } else {
                            Err(Error::OracleMismatch("twisting psi changes L".into()))
                        }
                    }),
            ));
            let v = lfun::special_value(&l, q);
            checks.push(check("sha_ledger", v.and_then(|v| run_sha(level, &l, &v))));
        }
        Err(e) => checks.push(check::<()>("l_function", Err(e))),
    }
    checks.push(check("angles", run_angles(level, &num, budget).map(|(_, r)| r)));
    VerifyReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantity_shapes() {
        let e = serde_json::to_string(&Quantity::exact(12)).unwrap();
        assert_eq!(e, r#"{"value":"12","provenance":"exact"}"#);
        let n = Quantity::numeric(0.5, 1e-9);
        assert_eq!(n.as_f64(), Some(0.5));
        assert!(serde_json::to_string(&n).unwrap().contains("\"numeric\""));
    }

    #[test]
    fn verify_q7_a1_green() {
        let lv = Level::new(LevelConfig::new(7, 1)).unwrap();
        let r = run_verify(&lv, 256, oracle::DEFAULT_ORACLE_BUDGET);
        for c in &r.checks {
            assert!(c.passed, "{} {}", c.name, c.detail);
        }
    }
}
