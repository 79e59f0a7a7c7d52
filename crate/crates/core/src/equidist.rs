//! Kloosterman angle statistics and the Gauss/Kloosterman angle gaps.

use crate::error::{Error, Result};
use crate::level::{Level, LevelNumerics};
use crate::numeric::RealBall;
use crate::orbits::count_places_of_degree;
use rayon::prelude::*;
use rug::float::Constant;
use rug::Float;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

/// Sato-Tate distribution function on [0, pi].
pub fn sato_tate_cdf(x: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&x) {
        return Err(Error::OutOfRange(format!("{x} not in [0, pi]")));
    }
    Ok(x / PI - (2.0 * x).sin() / (2.0 * PI))
}

/// theta_v for the places of exact degree a, sorted.
#[derive(Clone, Debug, Serialize)]
pub struct AngleSample {
    pub q: u64,
    pub a: u32,
    /// (packed representative, theta), sorted by theta
    pub angles: Vec<(u32, f64)>,
    /// largest ball radius among the angles
    pub max_radius: f64,
}

impl AngleSample {
    pub fn new(level: &Level, num: &LevelNumerics) -> Result<Self> {
        let mut angles = Vec::new();
        let mut max_radius: f64 = 0.0;
        for i in level.orbits.maximal_places() {
            let th = &num.place[i].theta;
            let t = th.to_f64();
            if !(t > 0.0 && t < PI) {
                return Err(Error::OutOfRange(format!("Kloosterman angle {t} at place {i}")));
            }
            max_radius = max_radius.max(th.rad_f64());
            angles.push((level.orbits.places[i].rep.index(), t));
        }
        let expect = count_places_of_degree(level.q(), level.a())?;
        if expect != angles.len() as u64 {
            return Err(Error::OracleMismatch(format!("{} maximal places, expected {expect}", angles.len())));
        }
        angles.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        Ok(AngleSample { q: level.q(), a: level.a(), angles, max_radius })
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.1).collect()
    }
}

/// max_i max(|F(x_i) - (i-1)/n|, |F(x_i) - i/n|) over sorted x.
pub fn star_discrepancy(sorted: &[f64]) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::OutOfRange("empty sample".into()));
    }
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = sato_tate_cdf(x)?;
        d = d.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
    }
    Ok(d)
}

/// |mean of U_n(cos theta)|, U_n(cos t) = sin((n+1)t)/sin t.
pub fn weyl_test(thetas: &[f64], n: u32) -> f64 {
    let s: f64 = thetas.iter().map(|&t| ((n + 1) as f64 * t).sin() / t.sin()).sum();
    (s / thetas.len() as f64).abs()
}

/// sigma_{p,n}, tau_{p,N} of the Liouville-type gap bound.
#[derive(Clone, Debug, Serialize)]
pub struct GapConstants {
    pub sigma_p: f64,
    pub tau_3: f64,
    pub tau_6: f64,
}

pub fn sigma(p: u64, n: u64) -> f64 {
    let r = 2f64.ln() / 3f64.ln();
    2.0 * n as f64 * p as f64 * (r + (p - 1) as f64 * (3.0 + 2.0 * r) + 1.0)
}

pub fn tau(p: u64, big_n: u64) -> f64 {
    let r = 2f64.ln() / 3f64.ln();
    2.0 * (p - 1) as f64 * (r + big_n as f64 / 2.0) + (big_n as f64).ln() / 3f64.ln()
}

impl GapConstants {
    pub fn new(p: u64) -> Self {
        GapConstants { sigma_p: sigma(p, 3), tau_3: tau(p, 3), tau_6: tau(p, 6) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub size: u32,
    pub orbits: usize,
    /// min over pairs of dist(theta_o +- eps_o', 2 pi Z)
    pub min_gap: f64,
    /// certified lower end of the ball around the minimum
    pub min_gap_lower: f64,
    /// log10 of q^{-sigma_p size}
    pub log10_bound: f64,
}

fn circle_dist(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    r.min(2.0 * PI - r)
}

fn circle_dist_ball(x: &RealBall) -> RealBall {
    let prec = x.mid.prec();
    let two_pi = RealBall::exact(Float::with_val(prec, Constant::Pi) * 2u32);
    let k = (x.mid.to_f64() / (2.0 * PI)).round();
    let r = x.sub(&two_pi.mul(&RealBall::from_f64(k, prec)));
    r.abs()
}

/// Below this an f64 distance is recomputed from the balls.
const GAP_RECHECK: f64 = 1e-9;

/// Per orbit size, the smallest distance between Kloosterman and Gauss
/// angles; fails if any distance is not certifiably positive.
pub fn min_angle_gap(level: &Level, num: &LevelNumerics) -> Result<Vec<GapRow>> {
    let sig = sigma(level.params().p(), 3);
    let q = level.q() as f64;
    let mut by_size: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, o) in level.orbits.orbits.iter().enumerate() {
        by_size.entry(o.size).or_default().push(i);
    }
    let mut rows = Vec::new();
    for (size, idx) in by_size {
        let th: Vec<f64> = idx.iter().map(|&i| num.orbit[i].split.theta.to_f64()).collect();
        let ep: Vec<f64> = idx.iter().map(|&i| num.orbit[i].eps.to_f64()).collect();
        // (distance, i, j, sign)
        let close: Vec<(f64, usize, usize, i8)> = (0..idx.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let th = &th;
                ep.iter().enumerate().flat_map(move |(j, &e)| {
                    [(circle_dist(th[i] - e), i, j, -1i8), (circle_dist(th[i] + e), i, j, 1i8)]
                })
            })
            .filter(|c| c.0 < GAP_RECHECK)
            .collect();
        let mut best = (f64::INFINITY, 0, 0, 1i8);
        for i in 0..idx.len() {
            for (j, &e) in ep.iter().enumerate() {
                for (d, s) in [(circle_dist(th[i] - e), -1), (circle_dist(th[i] + e), 1)] {
                    if d < best.0 {
                        best = (d, i, j, s);
                    }
                }
            }
        }
        let ball = |i: usize, j: usize, s: i8| -> RealBall {
            let t = &num.orbit[idx[i]].split.theta;
            let e = &num.orbit[idx[j]].eps;
            circle_dist_ball(&if s > 0 { t.add(e) } else { t.sub(e) })
        };
        for &(_, i, j, s) in close.iter().chain(std::iter::once(&best)) {
            if !ball(i, j, s).is_positive() {
                return Err(Error::AngleCoincidence { size });
            }
        }
        let b = ball(best.1, best.2, best.3);
        let lower = Float::with_val(b.mid.prec(), &b.mid - &b.rad).to_f64();
        rows.push(GapRow {
            size,
            orbits: idx.len(),
            min_gap: best.0,
            min_gap_lower: lower,
            log10_bound: -sig * size as f64 * q.log10(),
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussClusters {
    /// per orbit size, the number of distinct Gauss angles
    pub distinct: BTreeMap<u32, usize>,
    /// largest distance from the predicted lattice
    pub max_residual: f64,
}

/// q = 1 mod 3: eps_o - pr1 |o| phi lies in (2 pi/3) Z, phi the angle of the
/// base Gauss sum; q = 2 mod 3: eps_o lies in (pi/3) Z.
pub fn gauss_angle_clusters(level: &Level, num: &LevelNumerics) -> Result<GaussClusters> {
    let q = level.q();
    let table = crate::cyclo::EmbedTable::new(level.chars.ring(), num.prec);
    let phi = if q % 3 == 1 {
        let base = level.chars.base_gauss()?;
        crate::chars::gauss_angle(&base[0], &table)?.to_f64()
    } else {
        0.0
    };
    let step = if q % 3 == 1 { 2.0 * PI / 3.0 } else { PI / 3.0 };
    let mut max_residual: f64 = 0.0;
    let mut values: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (i, o) in level.orbits.orbits.iter().enumerate() {
        let e = num.orbit[i].eps.to_f64();
        let shift = o.pr1.map_or(0.0, |s| s as f64 * o.size as f64 * phi);
        let r = (e - shift).rem_euclid(step);
        max_residual = max_residual.max(r.min(step - r));
        values.entry(o.size).or_default().push(e);
    }
    let distinct = values
        .into_iter()
        .map(|(s, mut v)| {
            v.sort_by(f64::total_cmp);
            let mut n = 0;
            let mut last = f64::NEG_INFINITY;
            for x in v {
                if x - last > 1e-9 {
                    n += 1;
                    last = x;
                }
            }
            (s, n)
        })
        .collect();
    Ok(GaussClusters { distinct, max_residual })
}

#[derive(Clone, Debug, Serialize)]
pub struct NuPresentation {
    /// elements of exact degree a
    pub elements: u64,
    pub places: u64,
    /// every maximal place is hit by exactly a elements
    pub multiplicities_equal: bool,
    /// elements whose Kloosterman sum was recomputed directly and matched
    pub direct_checked: u64,
}

/// Orbit-averaged and element-averaged angle measures coincide: each place
/// of degree a contributes a elements with the same Kloosterman sum.
pub fn nu_presentation(level: &Level, budget: u64) -> Result<NuPresentation> {
    let f = level.field();
    let a = level.a();
    let mut hits = vec![0u64; level.orbits.places.len()];
    let elems: Vec<_> = f
        .subfield_elements(a)?
        .into_iter()
        .filter(|&x| !x.is_zero() && f.degree_of(x) == a)
        .collect();
    for &x in &elems {
        let o = level.orbits.orbit_of(1, x).ok_or_else(|| Error::OracleMismatch("element without orbit".into()))?;
        hits[level.orbits.orbits[o].place] += 1;
    }
    let maxp = level.orbits.maximal_places();
    let multiplicities_equal = maxp.iter().all(|&v| hits[v] == a as u64)
        && hits.iter().enumerate().all(|(v, &h)| h == 0 || maxp.contains(&v));
    let per = level.q().pow(a);
    let n_direct = (budget / per.max(1)).min(elems.len() as u64) as usize;
    let checked = elems[..n_direct]
        .par_iter()
        .map(|&x| -> Result<bool> {
            let o = level.orbits.orbit_of(1, x).unwrap();
            let v = level.orbits.orbits[o].place;
            Ok(level.chars.kloosterman_sum(a, x)? == level.place_kl[v])
        })
        .collect::<Result<Vec<_>>>()?;
    if checked.iter().any(|ok| !ok) {
        return Err(Error::OracleMismatch("Kloosterman sum not constant on a place".into()));
    }
    Ok(NuPresentation {
        elements: elems.len() as u64,
        places: maxp.len() as u64,
        multiplicities_equal,
        direct_checked: checked.len() as u64,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyRow {
    pub a: u32,
    pub places: u64,
    pub discrepancy: f64,
    /// D* q^{a/4} / a^{1/2}
    pub bound_ratio: f64,
    /// |mean U_1|, |mean U_2|
    pub weyl: [f64; 2],
    /// weyl_1 q^{a/2} / a
    pub weyl_ratio: f64,
}

pub fn discrepancy_row(sample: &AngleSample) -> Result<DiscrepancyRow> {
    let th = sample.thetas();
    let d = star_discrepancy(&th)?;
    let (q, a) = (sample.q as f64, sample.a as f64);
    let w = [weyl_test(&th, 1), weyl_test(&th, 2)];
    Ok(DiscrepancyRow {
        a: sample.a,
        places: th.len() as u64,
        discrepancy: d,
        bound_ratio: d * q.powf(a / 4.0) / a.sqrt(),
        weyl: w,
        weyl_ratio: w[0] * q.powf(a / 2.0) / a,
    })
}

/// Smallest C with D* <= C a^{1/2}/q^{a/4} on every row.
pub fn fitted_discrepancy_constant(rows: &[DiscrepancyRow]) -> f64 {
    rows.iter().map(|r| r.bound_ratio).fold(0.0, f64::max)
}

/// One row per maximal place: representative, theta, size.
pub fn write_angles_csv<W: Write>(sample: &AngleSample, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["beta", "theta", "size"])?;
    for (rep, t) in &sample.angles {
        wr.write_record([rep.to_string(), format!("{t:.17e}"), sample.a.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// Summary rows: a, Pi_q(a), D*, fitted bound ratio.
pub fn write_discrepancy_csv<W: Write>(rows: &[DiscrepancyRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["a", "places", "discrepancy", "bound_ratio", "weyl1", "weyl2"])?;
    for r in rows {
        wr.write_record([
            r.a.to_string(),
            r.places.to_string(),
            format!("{:.17e}", r.discrepancy),
            format!("{:.17e}", r.bound_ratio),
            format!("{:.17e}", r.weyl[0]),
            format!("{:.17e}", r.weyl[1]),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sato_tate_values() {
        assert_eq!(sato_tate_cdf(0.0).unwrap(), 0.0);
        assert!((sato_tate_cdf(PI).unwrap() - 1.0).abs() < 1e-15);
        assert!((sato_tate_cdf(PI / 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((sato_tate_cdf(PI / 3.0).unwrap() - 0.19550110947788532).abs() < 1e-15);
        assert!(sato_tate_cdf(4.0).is_err());
    }

    #[test]
    fn discrepancy_single_point() {
        let d = star_discrepancy(&[PI / 2.0]).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gap_constants_closed_form() {
        let g = GapConstants::new(7);
        let r = 2f64.ln() / 3f64.ln();
        assert!((g.sigma_p - 42.0 * (r + 6.0 * (3.0 + 2.0 * r) + 1.0)).abs() < 1e-9);
        assert!((g.tau_3 - (12.0 * (r + 1.5) + 1.0)).abs() < 1e-9);
    }
}
