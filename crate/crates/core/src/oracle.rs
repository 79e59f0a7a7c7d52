//! Brute-force witnesses: raw character sums, point counts on X and Y
//! against the trace formulas, and polynomial sanity checks.

use crate::bsd::wp;
use crate::chars::{
    cube_roots_of_unity_mod, gauss_valuation, gauss_valuation_exact, kappa_split, kloosterman_power_sum,
};
use crate::cyclo::{BigRational, CycInt, EmbedTable};
use crate::error::{Error, Result};
use crate::ffield::{fp_poly, ord3, ExtField, FieldParams};
use crate::level::Level;
use crate::numeric::RealBall;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;
use std::collections::BTreeMap;

/// Default cap on point evaluations per count.
pub const DEFAULT_ORACLE_BUDGET: u64 = 10_000_000;
/// Orbits with q^{|o|} up to this are re-summed directly.
pub const DIRECT_SUM_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Curve {
    X,
    Y,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveCount {
    pub curve: Curve,
    pub k: u32,
    /// points including those at infinity
    pub count: u64,
}

fn guard(q: u64, k: u32, budget: u64) -> Result<()> {
    let n = (q as u128).pow(k);
    if n > budget as u128 {
        return Err(Error::BudgetExceeded { requested: n, budget });
    }
    Ok(())
}

fn count_field(params: FieldParams, k: u32) -> Result<ExtField> {
    ExtField::new(params, k)
}

/// #{(u, t): u^3 = wp_a(t)} + 1 over F_{q^k}.
pub fn count_x(params: FieldParams, a: u32, k: u32, budget: u64) -> Result<CurveCount> {
    guard(params.q(), k, budget)?;
    let f = count_field(params, k)?;
    let has_cube_roots = (f.order() - 1) % 3 == 0;
    let affine: u64 = f
        .elements()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&t| {
            let c = wp(&f, a, t);
            match f.log(c) {
                None => 1,
                Some(_) if !has_cube_roots => 1,
                Some(l) if l % 3 == 0 => 3,
                Some(_) => 0,
            }
        })
        .sum();
    Ok(CurveCount { curve: Curve::X, k, count: affine + 1 })
}

/// #{(v, t): v != 0, v + 1/v = wp_a(t)} + 2 over F_{q^k}, through the
/// histogram of v + 1/v.
pub fn count_y(params: FieldParams, a: u32, k: u32, budget: u64) -> Result<CurveCount> {
    guard(params.q(), k, budget)?;
    let f = count_field(params, k)?;
    let mut hist = vec![0u64; f.order() as usize];
    for v in f.elements().skip(1) {
        let w = f.add(v, f.inv(v)?);
        hist[w.index() as usize] += 1;
    }
    let affine: u64 = f.elements().map(|t| hist[wp(&f, a, t).index() as usize]).sum();
    Ok(CurveCount { curve: Curve::Y, k, count: affine + 2 })
}

/// Same count through y^2 = wp_a(t)^2 - 4.
pub fn count_y_hyperelliptic(params: FieldParams, a: u32, k: u32, budget: u64) -> Result<CurveCount> {
    guard(params.q(), k, budget)?;
    let f = count_field(params, k)?;
    let four = f.from_int(4);
    let affine: i64 = f
        .elements()
        .map(|t| {
            let w = wp(&f, a, t);
            1 + f.quadratic_char(f.sub(f.mul(w, w), four)) as i64
        })
        .sum();
    Ok(CurveCount { curve: Curve::Y, k, count: affine as u64 + 2 })
}

/// A trace of Frobenius predicted from the character sums.
#[derive(Clone, Debug, Serialize)]
pub struct TracePrediction {
    pub k: u32,
    /// exact sum, collapsed to Z
    pub trace: String,
    /// distance of the embedded trace from the nearest integer
    pub rounding_error: f64,
    pub count: String,
}

fn predict(q: u64, k: u32, s: &CycInt, table: &EmbedTable) -> Result<TracePrediction> {
    let exact = s
        .is_rational_integer()
        .ok_or_else(|| Error::OracleMismatch(format!("trace at k = {k} is not rational")))?;
    let z = table.embed(s);
    let re = Float::with_val(table.prec(), &z.re);
    let rounded = Integer::from(re.to_integer().unwrap_or_default());
    let err = (Float::with_val(table.prec(), &re - &rounded).abs() + &z.rad).to_f64();
    let im = (Float::with_val(table.prec(), z.im.abs_ref()) + &z.rad).to_f64();
    if rounded != exact || err.max(im) >= 0.1 {
        return Err(Error::OracleMismatch(format!("embedded trace {re} vs exact {exact} at k = {k}")));
    }
    let count = Integer::from(q).pow(k) + 1u32 - &exact;
    Ok(TracePrediction { k, trace: exact.to_string(), rounding_error: err, count: count.to_string() })
}

/// N_k(X) = q^k + 1 - sum_{|o| | k} |o| gamma(o)^{k/|o|}.
pub fn predict_x(level: &Level, k: u32, prec: u32) -> Result<TracePrediction> {
    let ring = level.chars.ring();
    let mut s = CycInt::zero(ring);
    for (i, o) in level.orbits.orbits.iter().enumerate() {
        if k % o.size == 0 {
            s = &s + &level.gauss[i].pow(k / o.size).mul_int(&Integer::from(o.size));
        }
    }
    predict(level.q(), k, &s, &EmbedTable::new(ring, prec))
}

/// N_k(Y) = q^k + 1 - sum_{|v| | k} |v| (kappa_1^{k/|v|} + kappa_2^{k/|v|}).
pub fn predict_y(level: &Level, k: u32, prec: u32) -> Result<TracePrediction> {
    let ring = level.chars.ring();
    let q = Integer::from(level.q());
    let mut s = CycInt::zero(ring);
    for (i, v) in level.orbits.places.iter().enumerate() {
        if k % v.size == 0 {
            let ps = kloosterman_power_sum(&level.place_kl[i], &q.clone().pow(v.size), k / v.size);
            s = &s + &ps.mul_int(&Integer::from(v.size));
        }
    }
    predict(level.q(), k, &s, &EmbedTable::new(ring, prec))
}

#[derive(Clone, Debug, Serialize)]
pub struct CountCheck {
    pub curve: Curve,
    pub k: u32,
    pub counted: u64,
    pub predicted: String,
    pub rounding_error: f64,
    pub weil_ok: bool,
}

fn weil_ok(q: u64, a: u32, k: u32, n: u64) -> bool {
    let g = (q.pow(a) - 1) as f64;
    let qk = (q as f64).powi(k as i32);
    (n as f64 - qk - 1.0).abs() <= 2.0 * g * qk.sqrt()
}

/// Counts on X and Y for k = 1..=k_max within budget, each matched exactly
/// against the trace formula; Y is counted both ways.
pub fn point_count_checks(level: &Level, k_max: u32, budget: u64, prec: u32) -> Result<Vec<CountCheck>> {
    let params = level.params();
    let (q, a) = (level.q(), level.a());
    let mut out = Vec::new();
    for k in 1..=k_max {
        if (q as u128).pow(k) > budget as u128 {
            break;
        }
        let cx = count_x(params, a, k, budget)?;
        let px = predict_x(level, k, prec)?;
        let cy = count_y(params, a, k, budget)?;
        let cy2 = count_y_hyperelliptic(params, a, k, budget)?;
        let py = predict_y(level, k, prec)?;
        if cy.count != cy2.count {
            return Err(Error::OracleMismatch(format!("Y counts differ at k = {k}: {} vs {}", cy.count, cy2.count)));
        }
        for (c, p) in [(cx, px), (cy, py)] {
            if c.count.to_string() != p.count {
                return Err(Error::OracleMismatch(format!("{:?} count {} vs trace formula {} at k = {k}", c.curve, c.count, p.count)));
            }
            let w = weil_ok(q, a, k, c.count);
            if !w {
                return Err(Error::WeilBound(format!("{:?} at k = {k}", c.curve)));
            }
            out.push(CountCheck {
                curve: c.curve,
                k,
                counted: c.count,
                predicted: p.count,
                rounding_error: p.rounding_error,
                weil_ok: w,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectSumsReport {
    pub checked: usize,
    pub skipped: usize,
}

/// Raw summation of gamma(o) and Kl(o) for every orbit with q^{|o|} <= budget,
/// compared exactly with the fast-path values.
pub fn direct_sums_check(level: &Level, budget: u64) -> Result<DirectSumsReport> {
    let q = level.q() as u128;
    let todo: Vec<usize> = (0..level.orbits.orbits.len())
        .filter(|&i| q.pow(level.orbits.orbits[i].size) <= budget as u128)
        .collect();
    let bad = todo
        .par_iter()
        .map(|&i| -> Result<Option<usize>> {
            let o = &level.orbits.orbits[i];
            let g = level.chars.orbit_gauss_direct(o)?;
            let k = level.chars.orbit_kloosterman_direct(o)?;
            Ok((g != level.gauss[i] || k != level.kl[i]).then_some(i))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    if let Some(i) = bad.first() {
        return Err(Error::OracleMismatch(format!("fast path differs from raw sum on orbit {i}")));
    }
    Ok(DirectSumsReport { checked: todo.len(), skipped: level.orbits.orbits.len() - todo.len() })
}

/// Determinant by fraction-free elimination.
pub fn bareiss_det(mut m: Vec<Vec<Integer>>) -> Integer {
    let n = m.len();
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for k in 0..n {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Integer::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = Integer::from(&m[i][j] * &m[k][k]) - Integer::from(&m[i][k] * &m[k][j]);
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    m[n - 1][n - 1].clone() * sign
}

/// Res(f, g) through the Sylvester matrix; coefficients constant term first.
pub fn resultant(f: &[Integer], g: &[Integer]) -> Integer {
    let (m, n) = (f.len() - 1, g.len() - 1);
    let size = m + n;
    let mut s = vec![vec![Integer::new(); size]; size];
    for r in 0..n {
        for (i, c) in f.iter().rev().enumerate() {
            s[r][r + i] = c.clone();
        }
    }
    for r in 0..m {
        for (i, c) in g.iter().rev().enumerate() {
            s[n + r][r + i] = c.clone();
        }
    }
    bareiss_det(s)
}

/// disc f = (-1)^{n(n-1)/2} Res(f, f') / lead(f).
pub fn discriminant(f: &[Integer]) -> Integer {
    let n = f.len() - 1;
    let df: Vec<Integer> = f.iter().enumerate().skip(1).map(|(i, c)| Integer::from(c * i as u32)).collect();
    let r = resultant(f, &df) / &f[n];
    if (n * (n - 1) / 2) % 2 == 1 {
        -r
    } else {
        r
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SquarefreeReport {
    pub squarefree: bool,
    pub degree: usize,
    pub discriminant_checks: usize,
}

/// gcd(f, f') = 1 for f = wp_a^2 - 4 over F_p, plus
/// disc(al x^6 + be x^3 + ga) = 3^6 (al ga)^2 (be^2 - 4 al ga)^3
/// on random integer specializations.
pub fn squarefree_check(params: FieldParams, a: u32, seed: u64) -> Result<SquarefreeReport> {
    let p = params.p();
    let qa = params.q().pow(a) as usize;
    // wp = t^{q^a} - t
    let mut w = vec![0u64; qa + 1];
    w[qa] = 1;
    w[1] = p - 1;
    let mut f = fp_poly::mul(&w, &w, p);
    f[0] = (f[0] + p - 4 % p) % p;
    let df = fp_poly::derivative(&f, p);
    let g = fp_poly::gcd(&f, &df, p);
    let squarefree = g == vec![1];
    let mut rng = StdRng::seed_from_u64(seed);
    let mut checks = 0;
    for i in 0..16 {
        let (al, be, ga) = if i % 2 == 0 {
            let c: i64 = rng.gen_range(-40..=40);
            (1, 2 * c, c * c - 4)
        } else {
            let mut al = 0;
            while al == 0 {
                al = rng.gen_range(-30..=30);
            }
            (al, rng.gen_range(-30..=30), rng.gen_range(-30..=30))
        };
        let poly: Vec<Integer> = [ga, 0, 0, be, 0, 0, al].iter().map(|&c| Integer::from(c)).collect();
        let lhs = discriminant(&poly);
        let (al, be, ga) = (Integer::from(al), Integer::from(be), Integer::from(ga));
        let ag = Integer::from(&al * &ga);
        let rhs = Integer::from(729) * ag.clone().pow(2) * (be.pow(2) - ag * 4u32).pow(3);
        if lhs != rhs {
            return Err(Error::OracleMismatch("sextic discriminant identity".into()));
        }
        checks += 1;
    }
    Ok(SquarefreeReport { squarefree, degree: f.len() - 1, discriminant_checks: checks })
}

/// Pass counts of the character-sum identity suite, keyed by identity.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub orbits: usize,
    pub places: usize,
    pub passed: BTreeMap<String, usize>,
    /// largest |modulus - expected| / expected seen in the numeric checks
    pub max_relative_error: f64,
}

fn near(x: &RealBall, target: &Float, slack_bits: u32) -> (bool, f64) {
    let d = Float::with_val(x.prec(), &x.mid - target).abs();
    let rel = Float::with_val(53, &d / target).to_f64();
    let tol = Float::with_val(x.prec(), &x.rad) + Float::with_val(x.prec(), target) >> (x.prec() - slack_bits);
    (d <= tol, rel)
}

/// Gauss and Kloosterman identities over every orbit and place of a level.
/// Raw sums are only formed for fields of size at most `budget`.
pub fn identity_suite(level: &Level, prec: u32, budget: u64) -> Result<IdentityReport> {
    let chars = &level.chars;
    let field = chars.field();
    let params = level.params();
    let q = level.q();
    let ring = chars.ring();
    let table = EmbedTable::new(ring, prec);
    let one = field.one();
    let mut passed: BTreeMap<String, usize> = BTreeMap::new();
    let mut bump = |k: &str| *passed.entry(k.to_string()).or_default() += 1;
    let mut worst = 0f64;
    let fail = |k: &str, i: usize| Error::OracleMismatch(format!("{k} fails on orbit {i}"));
    let small = |m: u32| (q as u128).pow(m) <= budget as u128;

    // valuations are taken at the prime above p fixed by the base field
    let root = if params.p() % 3 == 1 && q % 3 == 1 {
        let s = ord3(q);
        let g = chars.gauss_sum(s, 1, one)?;
        let want = gauss_valuation(&params, s, Some(1));
        let fit: Vec<u64> = cube_roots_of_unity_mod(params.p())
            .into_iter()
            .filter(|&r| gauss_valuation_exact(&g, &params, Some(r)).map(|v| v == want).unwrap_or(false))
            .collect();
        if fit.len() != 1 {
            return Err(Error::OracleMismatch("no unique prime above p fits the base Gauss sum".into()));
        }
        Some(fit[0])
    } else {
        None
    };

    for (i, o) in level.orbits.orbits.iter().enumerate() {
        let m = o.size;
        let g = &level.gauss[i];
        let qm = Integer::from(q).pow(m);
        if (g * &g.conj()).is_rational_integer().as_ref() != Some(&qm) {
            return Err(fail("Ga1", i));
        }
        let (ok, rel) = near(&table.embed(g).abs(), &Float::with_val(prec, &qm).sqrt(), 48);
        if !ok {
            return Err(fail("Ga1 modulus", i));
        }
        worst = worst.max(rel);
        bump("Ga1");
        if small(m) {
            let lhs = chars.gauss_sum(m, o.j, o.rep)?;
            let rhs = &chars.cubic_inverse_value(m, o.j, o.rep)? * &chars.gauss_sum(m, o.j, one)?;
            if lhs != rhs {
                return Err(fail("Ga2", i));
            }
            bump("Ga2");
            // alpha -> alpha^{1/q} with j -> qj
            let back = field.frobenius(o.rep, m - 1);
            let jq = ((o.j as u64 * q) % 3) as u8;
            if chars.gauss_sum(m, jq, back)? != lhs {
                return Err(fail("Ga3", i));
            }
            bump("Ga3");
        }
        let v = gauss_valuation_exact(g, &params, root)?;
        let mq = BigRational::from(m);
        if v != gauss_valuation(&params, m, o.pr1) || v.clone() * 3u32 < mq || v * 3u32 > mq * 2u32 {
            return Err(fail("Ga5", i));
        }
        bump("Ga5");
    }

    // Hasse-Davenport from the base field up every admissible tower step
    let s = ord3(q);
    let base = chars.base_gauss()?;
    for k in 1..=field.degree() / s {
        if field.degree() % (k * s) != 0 || !small(k * s) {
            continue;
        }
        for j in 1..=2u8 {
            if chars.gauss_sum(k * s, j, one)? != base[j as usize - 1].pow(k) {
                return Err(Error::OracleMismatch(format!("Ga4 fails at degree {}", k * s)));
            }
            bump("Ga4");
        }
    }

    for (i, v) in level.orbits.places.iter().enumerate() {
        let d = v.size;
        let kl = &level.place_kl[i];
        let qd = Integer::from(q).pow(d);
        if small(d) {
            let x = v.rep;
            let xq = field.frobenius(x, 1);
            if chars.kloosterman_general(d, one, xq)? != chars.kloosterman_general(d, one, x)?
                || chars.kloosterman_sum(d, xq)? != *kl
            {
                return Err(fail("Kl1", i));
            }
            bump("Kl1");
            if field.degree() % (2 * d) == 0 && small(2 * d) {
                if chars.kloosterman_sum(2 * d, x)? != kloosterman_power_sum(kl, &qd, 2) {
                    return Err(fail("Kl2 extension", i));
                }
                bump("Kl2 extension");
            }
        }
        let split = kappa_split(kl, q, d, &table)?;
        let qdf = Float::with_val(prec, &qd);
        let (ok, rel) = near(&split.kappa1.mul(&split.kappa2).real(), &qdf, 48);
        let sum = split.kappa1.add(&split.kappa2).real().sub(&table.embed(kl).real());
        if !ok || Float::with_val(prec, sum.mid.abs_ref()) > Float::with_val(prec, &sum.rad) + (qdf.clone() >> (prec - 48)) {
            return Err(fail("Kl2", i));
        }
        worst = worst.max(rel);
        bump("Kl2");
        let bound = Float::with_val(prec, qdf.sqrt_ref()) * 2u32;
        if !kl.is_real() || table.embed(kl).real().mig() > bound {
            return Err(fail("Kl3", i));
        }
        bump("Kl3");
        // Kl = -(q^d - 1) = 1 mod (1 - zeta_p), so it is a unit above p
        if kl.norm().is_divisible(&Integer::from(params.p())) {
            return Err(fail("Kl4", i));
        }
        bump("Kl4");
    }
    Ok(IdentityReport {
        orbits: level.orbits.orbits.len(),
        places: level.orbits.places.len(),
        passed,
        max_relative_error: worst,
    })
}
