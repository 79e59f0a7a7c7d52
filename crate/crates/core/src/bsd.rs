//! BSD bookkeeping for S_a: invariants, torsion bound, Sha candidates,
//! Brauer-Siegel ratio and dim Sha.

use crate::chars::gauss_valuation;
use crate::cyclo::{ord_frak_p, BigRational};
use crate::error::{Error, Result};
use crate::ffield::{ExtField, FieldElement, FieldParams};
use crate::level::Level;
use crate::lfun::IntPoly;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

/// The possible values of c_inf; the exact one is not determined.
pub const C_INF_CANDIDATES: [u32; 3] = [1, 3, 9];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Invariants {
    pub q: u64,
    pub a: u32,
    /// differential height
    pub h: u64,
    /// H = q^h, stored by its exponent
    pub height_exponent: u64,
    pub conductor_degree: u64,
    /// exponent at each finite bad place (the zeros of wp^2 - 4)
    pub conductor_finite_bad: u32,
    pub conductor_infinity: u32,
    pub finite_bad_places_degree: u64,
    pub c_inf: Vec<u32>,
    pub rank: u32,
    pub regulator: u32,
    pub l_degree: u64,
}

pub fn invariants(q: u64, a: u32) -> Invariants {
    let qa = q.pow(a);
    let deg_n = 4 * qa + 4;
    Invariants {
        q,
        a,
        h: qa + 1,
        height_exponent: qa + 1,
        conductor_degree: deg_n,
        conductor_finite_bad: 2,
        conductor_infinity: 4,
        finite_bad_places_degree: 2 * qa,
        c_inf: C_INF_CANDIDATES.to_vec(),
        rank: 0,
        regulator: 1,
        l_degree: deg_n - 8,
    }
}

impl Invariants {
    /// deg N = 2 deg(wp^2 - 4) + 4 and deg L = deg N - 8.
    pub fn consistent_with(&self, l: &IntPoly) -> bool {
        self.conductor_degree == self.conductor_finite_bad as u64 * self.finite_bad_places_degree + self.conductor_infinity as u64
            && l.degree() as u64 == self.conductor_degree - 8
    }
}

/// A good place of F_q(t) given by a root c of its minimal polynomial.
#[derive(Clone, Debug, Serialize)]
pub struct GoodPlace {
    pub degree: u32,
    /// packed index of c in the counting field
    pub root: u32,
    pub label: String,
}

/// Point counts and Jacobian order of the reduced curve at one place.
#[derive(Clone, Debug, Serialize)]
pub struct PlaceJacobian {
    pub place: GoodPlace,
    pub qv: u64,
    /// #C(F_v), #C(F_{v^2}), both with the two points at infinity
    pub n1: u64,
    pub n2: u64,
    pub t1: i64,
    pub t2: i64,
    /// P_v(1)
    pub jac_order: u64,
    pub prime_to_p: u64,
}

/// y^2 = x^6 + 2w x^3 + w^2 - 4 reduced at c, w = wp_a(c).
fn reduced_rhs(f: &ExtField, w: FieldElement, x: FieldElement) -> FieldElement {
    let x3 = f.mul(f.mul(x, x), x);
    let x6 = f.mul(x3, x3);
    let two = f.from_int(2);
    let four = f.from_int(4);
    let t = f.add(x6, f.mul(f.mul(two, w), x3));
    f.add(t, f.sub(f.mul(w, w), four))
}

/// Affine points plus two at infinity (monic even-degree model) over F_{q^d}.
fn count_reduced(f: &ExtField, w: FieldElement, d: u32) -> Result<u64> {
    let xs = f.subfield_elements(d)?;
    let affine: i64 = xs
        .par_iter()
        .map(|&x| 1 + f.quadratic_char_in(reduced_rhs(f, w, x), d).expect("rhs stays in subfield") as i64)
        .sum();
    Ok(affine as u64 + 2)
}

pub fn wp(f: &ExtField, a: u32, t: FieldElement) -> FieldElement {
    f.sub(f.frobenius(t, a), t)
}

/// #J(F_v) for the place with root c in the subfield of degree d of `f`
/// (which must contain F_{q^{2d}}).
pub fn place_jacobian(f: &ExtField, a: u32, c: FieldElement, d: u32, label: String) -> Result<PlaceJacobian> {
    let w = wp(f, a, c);
    let disc = f.sub(f.mul(w, w), f.from_int(4));
    if disc.is_zero() {
        return Err(Error::BadPlace(label));
    }
    let qv = f.q().pow(d);
    let n1 = count_reduced(f, w, d)?;
    let n2 = count_reduced(f, w, 2 * d)?;
    let t1 = qv as i64 + 1 - n1 as i64;
    let t2 = (qv * qv) as i64 + 1 - n2 as i64;
    let e1 = t1;
    let e2 = (t1 * t1 - t2) / 2;
    let qv_i = qv as i64;
    let jac = 1 - e1 + e2 - qv_i * e1 + qv_i * qv_i;
    let s = (qv as f64).sqrt();
    let (lo, hi) = ((s - 1.0).powi(4), (s + 1.0).powi(4));
    if jac <= 0 || (jac as f64) < lo.floor() || (jac as f64) > hi.ceil() {
        return Err(Error::WeilBound(format!("#J = {jac} at {label}")));
    }
    let mut prime_to_p = jac as u64;
    while prime_to_p % f.p() == 0 {
        prime_to_p /= f.p();
    }
    Ok(PlaceJacobian {
        place: GoodPlace { degree: d, root: c.index(), label },
        qv,
        n1,
        n2,
        t1,
        t2,
        jac_order: jac as u64,
        prime_to_p,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionBound {
    pub places: Vec<PlaceJacobian>,
    /// gcd after each place
    pub running_gcd: Vec<u64>,
    pub bound: u64,
    pub stabilized: bool,
    /// bound^2 / h^4
    pub hindry_pacheco_ratio: f64,
    pub caveat: String,
}

/// Cap on the degree-2 places tried after t, t-1, t-2.
const MAX_EXTRA_PLACES: usize = 8;

/// Prime-to-p torsion bound from places t, t-1, t-2 and degree-2 places
/// until the gcd is stable.
pub fn torsion_bound(params: FieldParams, a: u32) -> Result<TorsionBound> {
    let f = ExtField::new(params, 4)?;
    let mut places = Vec::new();
    for c in 0..3i64 {
        let label = if c == 0 { "t".to_string() } else { format!("t-{c}") };
        places.push(place_jacobian(&f, a, f.from_int(c), 1, label)?);
    }
    // degree-2 places in order until one more leaves the gcd unchanged
    let mut running = Vec::new();
    let mut g = 0u64;
    for pl in &places {
        g = crate::ffield::gcd(g, pl.prime_to_p);
        running.push(g);
    }
    let quads: Vec<FieldElement> = f
        .subfield_elements(2)?
        .into_iter()
        .filter(|&c| !f.in_subfield(c, 1).unwrap())
        .collect();
    let mut seen_min_poly: Vec<FieldElement> = Vec::new();
    let mut unchanged = 0;
    for c in quads {
        if unchanged >= 1 || places.len() >= 3 + MAX_EXTRA_PLACES {
            break;
        }
        // skip conjugates of places already used
        if seen_min_poly.contains(&f.frobenius(c, 1)) {
            continue;
        }
        let w = wp(&f, a, c);
        if f.sub(f.mul(w, w), f.from_int(4)).is_zero() {
            continue;
        }
        seen_min_poly.push(c);
        let pl = place_jacobian(&f, a, c, 2, format!("deg 2, root #{}", c.index()))?;
        let g2 = crate::ffield::gcd(g, pl.prime_to_p);
        unchanged = if g2 == g && places.len() > 3 { unchanged + 1 } else { 0 };
        g = g2;
        running.push(g);
        places.push(pl);
    }
    let n = running.len();
    let h = (params.q().pow(a) + 1) as f64;
    Ok(TorsionBound {
        stabilized: n >= 2 && running[n - 1] == running[n - 2],
        hindry_pacheco_ratio: (g as f64).powi(2) / h.powi(4),
        bound: g,
        running_gcd: running,
        places,
        caveat: "bounds the prime-to-p torsion only".into(),
    })
}

fn ln_rational(r: &BigRational, prec: u32) -> f64 {
    let n = Float::with_val(prec, r.numer()).ln();
    let d = Float::with_val(prec, r.denom()).ln();
    (n - d).to_f64()
}

fn divisors_u64(n: u64) -> Vec<u64> {
    crate::ffield::divisors(n)
}

#[derive(Clone, Debug, Serialize)]
pub struct ShaCandidate {
    pub c_inf: u32,
    pub torsion: u64,
    #[serde(serialize_with = "ser_rational")]
    pub value: BigRational,
    pub integral: bool,
    /// log|Sha| / log H, when integral
    pub brauer_siegel: Option<f64>,
}

pub fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct ShaReport {
    pub invariants: Invariants,
    #[serde(serialize_with = "ser_rational")]
    pub special_value: BigRational,
    pub torsion: TorsionBound,
    pub candidates: Vec<ShaCandidate>,
    /// log L* / log H
    pub special_value_ratio: f64,
    /// smallest and largest Brauer-Siegel ratio over the integral candidates
    pub brauer_siegel_range: (f64, f64),
    pub dim_sha: DimSha,
}

/// |Sha| = L* t^2 H / (q^2 c_inf) for every c_inf and every t | T_max.
pub fn sha_candidates(l_star: &BigRational, inv: &Invariants, t_max: u64) -> Result<Vec<ShaCandidate>> {
    let base = Integer::from(inv.q).pow((inv.height_exponent - 2) as u32);
    let log_h = inv.height_exponent as f64 * (inv.q as f64).ln();
    let mut out = Vec::new();
    for &c in &C_INF_CANDIDATES {
        for t in divisors_u64(t_max) {
            let v = BigRational::from(l_star * &base) * Integer::from(t).pow(2) / c;
            let integral = *v.denom() == 1 && *v.numer() > 0;
            let brauer_siegel = integral.then(|| ln_rational(&v, 256) / log_h);
            out.push(ShaCandidate { c_inf: c, torsion: t, value: v, integral, brauer_siegel });
        }
    }
    if !out.iter().any(|c| c.integral) {
        return Err(Error::NoIntegralCandidate);
    }
    Ok(out)
}

/// log L* / log H.
pub fn special_value_ratio(l_star: &BigRational, inv: &Invariants) -> f64 {
    ln_rational(l_star, 256) / (inv.height_exponent as f64 * (inv.q as f64).ln())
}

#[derive(Clone, Debug, Serialize)]
pub struct DimSha {
    pub valuation_formula: String,
    pub newton_polygon: String,
}

/// h - 2 - sum_o sum_i max(0, |o| - ord(gamma kappa_i)), with ord(kappa) in {0, |o|}.
pub fn dim_sha_valuation(level: &Level) -> BigRational {
    let params = level.params();
    let h = BigRational::from(level.q().pow(level.a()) + 1);
    let mut s = BigRational::new();
    for o in &level.orbits.orbits {
        let vg = gauss_valuation(&params, o.size, o.pr1);
        let m = BigRational::from(o.size);
        for vk in [BigRational::new(), m.clone()] {
            let d = BigRational::from(&m - &vg) - vk;
            if d > 0 {
                s += d;
            }
        }
    }
    h - 2 - s
}

/// Lower convex hull of (i, ord(c_i)) as (length, slope) segments.
pub fn newton_polygon(l: &IntPoly, params: &FieldParams) -> Result<Vec<(usize, BigRational)>> {
    let pts: Vec<(usize, BigRational)> = l
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0)
        .map(|(i, c)| Ok((i, ord_frak_p(c, params)?)))
        .collect::<Result<_>>()?;
    let mut hull: Vec<(usize, BigRational)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (i1, v1) = &hull[hull.len() - 2];
            let (i2, v2) = &hull[hull.len() - 1];
            // drop the middle point if it lies on or above the chord
            let lhs = BigRational::from(v2 - v1) * (p.0 - i1) as u64;
            let rhs = BigRational::from(&p.1 - v1) * (i2 - i1) as u64;
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(hull
        .windows(2)
        .map(|w| {
            let len = w[1].0 - w[0].0;
            (len, BigRational::from(&w[1].1 - &w[0].1) / len as u64)
        })
        .collect())
}

/// The same quantity read off the slopes of the Newton polygon of L.
pub fn dim_sha_newton(l: &IntPoly, params: &FieldParams, h: u64) -> Result<BigRational> {
    let mut s = BigRational::new();
    for (len, slope) in newton_polygon(l, params)? {
        let d = BigRational::from(1) - slope;
        if d > 0 {
            s += d * len as u64;
        }
    }
    Ok(BigRational::from(h) - 2 - s)
}

pub fn dim_sha(level: &Level, l: &IntPoly) -> Result<DimSha> {
    let v = dim_sha_valuation(level);
    let n = dim_sha_newton(l, &level.params(), level.q().pow(level.a()) + 1)?;
    let r = DimSha { valuation_formula: v.to_string(), newton_polygon: n.to_string() };
    if v != 0 || n != 0 {
        return Err(Error::DimSha { valuation: r.valuation_formula, newton: r.newton_polygon });
    }
    Ok(r)
}

/// Full report for one level from its exact L.
pub fn sha_report(level: &Level, l: &IntPoly, l_star: &BigRational) -> Result<ShaReport> {
    let inv = invariants(level.q(), level.a());
    if !inv.consistent_with(l) {
        return Err(Error::Degree { expected: inv.l_degree as usize, actual: l.degree() });
    }
    let torsion = torsion_bound(level.params(), level.a())?;
    let candidates = sha_candidates(l_star, &inv, torsion.bound)?;
    let bs: Vec<f64> = candidates.iter().filter_map(|c| c.brauer_siegel).collect();
    let range = (bs.iter().cloned().fold(f64::INFINITY, f64::min), bs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    Ok(ShaReport {
        special_value_ratio: special_value_ratio(l_star, &inv),
        invariants: inv,
        special_value: l_star.clone(),
        torsion,
        candidates,
        brauer_siegel_range: range,
        dim_sha: dim_sha(level, l)?,
    })
}
