//! L(S_a, T) assembled exactly from the orbit factors, plus its checks.
//!
//! Factors are grouped into classes stable under Gal(Q(zeta_3p)/Q); each
//! class product already lies in Z[T], so the integer collapse happens per
//! class and the big product runs over plain integers.

pub mod intpoly;
pub mod roots;

pub use intpoly::{mul_kronecker, IntPoly, LPolynomialJson};
pub use roots::{unit_circle_roots, RootReport};

use crate::cyclo::{BigRational, CycInt};
use crate::error::{Error, Result};
use crate::level::{Level, LevelNumerics, MAX_PRECISION};
use crate::numeric::RealBall;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;
use std::collections::BTreeSet;

/// RH tolerance on ||z| - 1/q|.
pub const RH_TOLERANCE: f64 = 1e-8;
/// Relative agreement required between the two special-value routes.
pub const SPECIAL_VALUE_TOLERANCE: f64 = 1e-6;
/// Above this degree the assembled L is not root-found as a whole; its
/// integer class factors are used instead.
pub const FULL_ROOT_DEGREE_CAP: usize = 256;

/// 1 + mid T^m + top T^{2m} with mid = -gamma Kl, top = gamma^2 q^m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LFactor {
    pub orbit: usize,
    pub size: u32,
    pub mid: CycInt,
    pub top: CycInt,
}

impl LFactor {
    pub fn new(level: &Level, orbit: usize) -> LFactor {
        let o = &level.orbits.orbits[orbit];
        let g = &level.gauss[orbit];
        let qm = Integer::from(level.q()).pow(o.size);
        LFactor {
            orbit,
            size: o.size,
            mid: -&(g * &level.kl[orbit]),
            top: (g * g).mul_int(&qm),
        }
    }

    /// Coefficients in Z[zeta][T], constant term first.
    pub fn dense(&self) -> Vec<CycInt> {
        let ring = self.mid.ring();
        let m = self.size as usize;
        let mut v = vec![CycInt::zero(ring); 2 * m + 1];
        v[0] = CycInt::one(ring);
        v[m] = self.mid.clone();
        v[2 * m] = self.top.clone();
        v
    }

    /// Multiply a dense polynomial by this factor.
    fn apply(&self, poly: &[CycInt]) -> Vec<CycInt> {
        let ring = self.mid.ring();
        let m = self.size as usize;
        let mut out = vec![CycInt::zero(ring); poly.len() + 2 * m];
        for (i, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out[i] = &out[i] + c;
            out[i + m] = &out[i + m] + &(&self.mid * c);
            out[i + 2 * m] = &out[i + 2 * m] + &(&self.top * c);
        }
        out
    }
}

pub fn factors(level: &Level) -> Vec<LFactor> {
    (0..level.orbits.orbits.len())
        .into_par_iter()
        .map(|i| LFactor::new(level, i))
        .collect()
}

/// Smallest generator of (Z/p)^x.
pub fn primitive_root(p: u64) -> u64 {
    let fs = crate::ffield::prime_factors(p - 1);
    (2..p)
        .find(|&g| fs.iter().all(|&f| Integer::from(g).pow_mod(&Integer::from((p - 1) / f), &Integer::from(p)).unwrap() != 1))
        .expect("prime modulus")
}

/// k mod 3p with k = r3 mod 3 and k = rp mod p.
fn crt(p: u64, r3: u64, rp: u64) -> i64 {
    (0..3 * p).find(|k| k % 3 == r3 % 3 && k % p == rp % p).unwrap() as i64
}

/// Generators of Gal(Q(zeta_3p)/Q) as exponents: complex-cube-root swap and
/// a generator on zeta_p.
pub fn galois_generators(p: u64) -> [i64; 2] {
    [crt(p, 2, 1), crt(p, 1, primitive_root(p))]
}

/// Image of orbit `i` under zeta -> zeta^k: (j, alpha) -> (jk mod 3, k alpha).
pub fn galois_orbit_image(level: &Level, i: usize, k: i64) -> Result<usize> {
    let o = &level.orbits.orbits[i];
    let p = level.params().p() as i64;
    let f = level.field();
    let j = ((o.j as i64 * k).rem_euclid(3)) as u8;
    let alpha = f.mul(f.from_int(k.rem_euclid(p)), o.rep);
    level
        .orbits
        .orbit_of(j, alpha)
        .ok_or_else(|| Error::OracleMismatch(format!("orbit image of {i} under sigma_{k}")))
}

/// Partition of the orbits into Galois classes, each sorted, classes ordered
/// by their least member.
pub fn galois_classes(level: &Level) -> Result<Vec<Vec<usize>>> {
    let gens = galois_generators(level.params().p());
    let n = level.orbits.orbits.len();
    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut class = BTreeSet::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            class.insert(i);
            for &k in &gens {
                let t = galois_orbit_image(level, i, k)?;
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        classes.push(class.into_iter().collect());
    }
    Ok(classes)
}

/// Collapse a Galois-stable product to Z[T]; fails loudly otherwise.
fn collapse(poly: &[CycInt]) -> Result<IntPoly> {
    let coeffs = poly
        .iter()
        .enumerate()
        .map(|(i, c)| c.is_rational_integer().ok_or(Error::Integrality { index: i }))
        .collect::<Result<Vec<_>>>()?;
    Ok(IntPoly::new(coeffs))
}

fn class_product(fs: &[LFactor], class: &[usize]) -> Result<IntPoly> {
    let ring = fs[class[0]].mid.ring();
    let mut poly = vec![CycInt::one(ring)];
    for &i in class {
        poly = fs[i].apply(&poly);
    }
    collapse(&poly)
}

/// The integer class factors of L, in class order.
pub fn class_polynomials(level: &Level) -> Result<Vec<IntPoly>> {
    let fs = factors(level);
    let classes = galois_classes(level)?;
    classes.par_iter().map(|c| class_product(&fs, c)).collect()
}

pub fn expected_degree(q: u64, a: u32) -> usize {
    4 * (q.pow(a) as usize - 1)
}

/// L(S_a, T) in Z[T], degree-checked.
pub fn l_polynomial(level: &Level) -> Result<IntPoly> {
    let l = IntPoly::product(class_polynomials(level)?);
    check_shape(&l, level)?;
    Ok(l)
}

/// Single product over all factors in Z[zeta][T], collapsed at the very end.
/// Quadratic in the degree; meant for cross-checking small levels.
pub fn l_polynomial_naive(level: &Level) -> Result<IntPoly> {
    let fs = factors(level);
    let all: Vec<usize> = (0..fs.len()).collect();
    let l = class_product(&fs, &all)?;
    check_shape(&l, level)?;
    Ok(l)
}

fn check_shape(l: &IntPoly, level: &Level) -> Result<()> {
    let d = expected_degree(level.q(), level.a());
    if l.degree() != d {
        return Err(Error::Degree { expected: d, actual: l.degree() });
    }
    if l.coeffs()[0] != 1 {
        return Err(Error::Integrality { index: 0 });
    }
    Ok(())
}

/// sigma_k(F_o) = F_{sigma_k(o)} for every orbit o and every k given.
pub fn galois_stability_check(level: &Level, ks: &[i64]) -> Result<()> {
    let fs = factors(level);
    for &k in ks {
        for (i, f) in fs.iter().enumerate() {
            let t = galois_orbit_image(level, i, k)?;
            let g = &fs[t];
            if f.size != g.size || f.mid.galois(k)? != g.mid || f.top.galois(k)? != g.top {
                return Err(Error::OracleMismatch(format!("factor of orbit {i} not Galois-stable under sigma_{k}")));
            }
        }
    }
    Ok(())
}

/// Sign w with L(T) = w (qT)^b L(1/(q^2 T)), as an exact coefficient identity
/// a_{b-i} = w q^{b-2i} a_i.
pub fn verify_functional_equation(l: &IntPoly, q: u64) -> Result<i8> {
    let c = l.coeffs();
    let b = l.degree();
    let qi = Integer::from(q);
    for w in [1i8, -1] {
        let ok = (0..=b / 2).all(|i| {
            let lhs = &c[b - i];
            let rhs = Integer::from(&c[i] * w as i32) * qi.clone().pow((b - 2 * i) as u32);
            *lhs == rhs
        });
        if ok {
            return Ok(w);
        }
    }
    Err(Error::FunctionalEquation)
}

#[derive(Clone, Debug, Serialize)]
pub struct RhReport {
    /// max ||z| - 1/q| over roots of the factors solved in closed form
    pub factor_deviation: f64,
    /// max ||z| - 1/q| from Aberth, with the inclusion radius added
    pub polynomial_deviation: f64,
    /// "assembled" or "class factors"
    pub polynomial_route: String,
    pub roots: usize,
    pub prec: u32,
    pub tol: f64,
}

/// Roots of the factor 1 + mid T^m + top T^{2m} are the m-th roots of
/// 1/(gamma kappa_i); with |gamma kappa_i| = r q^m one gets
/// ||z| - 1/q| = |r^{-1/m} - 1|/q.
pub fn factor_rh_deviation(level: &Level, num: &LevelNumerics) -> f64 {
    let q = level.q();
    let table = crate::cyclo::EmbedTable::new(level.chars.ring(), num.prec);
    level
        .orbits
        .orbits
        .par_iter()
        .enumerate()
        .map(|(i, o)| {
            let g = table.embed(&level.gauss[i]).abs();
            let k = num.orbit[i].split.kappa1.abs();
            let qm = RealBall::from_int(&Integer::from(q).pow(o.size), num.prec);
            let r = g.mul(&k).div(&qm).expect("q^m > 0");
            let mid = r.mid.to_f64();
            let lo = (mid - r.rad_f64()).max(f64::MIN_POSITIVE);
            let hi = mid + r.rad_f64();
            let m = o.size as f64;
            let d = |x: f64| (x.powf(-1.0 / m) - 1.0).abs();
            // the ball radius survives even when both ends round to 1.0
            d(lo).max(d(hi)).max(2.0 * r.rad_f64() / m) / q as f64
        })
        .reduce(|| 0.0, f64::max)
}

/// Both RH routes; fails if either deviation reaches `tol` after precision
/// escalation.
pub fn verify_riemann_hypothesis(level: &Level, l: &IntPoly, num: &LevelNumerics, tol: f64) -> Result<RhReport> {
    let q = level.q();
    let factor_deviation = factor_rh_deviation(level, num);
    if !(factor_deviation < tol) {
        return Err(Error::RiemannHypothesis { deviation: factor_deviation, tol });
    }
    let (route, polys) = if l.degree() <= FULL_ROOT_DEGREE_CAP {
        ("assembled", vec![l.clone()])
    } else {
        let cls = class_polynomials(level)?;
        if IntPoly::product(cls.clone()) != *l {
            return Err(Error::OracleMismatch("class factors do not multiply to L".into()));
        }
        ("class factors", dedup(cls))
    };
    let reports = polys
        .par_iter()
        .map(|f| unit_circle_roots(f.coeffs(), q, num.prec, MAX_PRECISION))
        .collect::<Result<Vec<_>>>()?;
    let polynomial_deviation = reports
        .iter()
        .map(|r| (r.max_unit_deviation + r.max_inclusion_radius) / q as f64)
        .fold(0.0, f64::max);
    let prec = reports.iter().map(|r| r.prec).max().unwrap_or(num.prec);
    if !(polynomial_deviation < tol) {
        return Err(Error::RiemannHypothesis { deviation: polynomial_deviation, tol });
    }
    Ok(RhReport {
        factor_deviation,
        polynomial_deviation,
        polynomial_route: route.into(),
        roots: l.degree(),
        prec,
        tol,
    })
}

/// Distinct polynomials, first occurrence kept.
fn dedup(v: Vec<IntPoly>) -> Vec<IntPoly> {
    let mut out: Vec<IntPoly> = Vec::new();
    for p in v {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Exact L(1/q); must be positive.
pub fn special_value(l: &IntPoly, q: u64) -> Result<BigRational> {
    let v = l.eval_inverse(q);
    if v == 0 {
        return Err(Error::SpecialValue("L(1/q) vanishes".into()));
    }
    if v < 0 {
        return Err(Error::SpecialValue(format!("L(1/q) = {v} is negative")));
    }
    Ok(v)
}

/// prod_o 4 |sin((eps+theta)/2) sin((eps-theta)/2)| as a ball; every factor
/// must be bounded away from zero.
pub fn special_value_angles(num: &LevelNumerics) -> Result<RealBall> {
    let prec = num.prec;
    let half = RealBall::exact(Float::with_val(prec, 0.5));
    let four = RealBall::exact(Float::with_val(prec, 4));
    let mut acc = RealBall::exact(Float::with_val(prec, 1));
    for o in &num.orbit {
        let s1 = o.eps.add(&o.split.theta).mul(&half).sin().abs();
        let s2 = o.eps.sub(&o.split.theta).mul(&half).sin().abs();
        let f = four.mul(&s1).mul(&s2);
        if !f.is_positive() {
            return Err(Error::SpecialValue("angle factor not bounded away from 0".into()));
        }
        acc = acc.mul(&f);
    }
    Ok(acc)
}

/// |exact - angles| / exact, using the far end of the ball.
pub fn special_value_discrepancy(exact: &BigRational, angles: &RealBall) -> f64 {
    let prec = angles.mid.prec();
    let e = Float::with_val(prec, exact);
    let diff = Float::with_val(prec, &angles.mid - &e).abs() + &angles.rad;
    (diff / e).to_f64()
}

/// Largest error, over all factors, between the exact middle and top
/// coefficients and -gamma(kappa_1 + kappa_2), gamma^2 kappa_1 kappa_2.
pub fn factor_expansion_error(level: &Level, num: &LevelNumerics) -> f64 {
    let table = crate::cyclo::EmbedTable::new(level.chars.ring(), num.prec);
    let fs = factors(level);
    fs.par_iter()
        .map(|f| {
            let g = table.embed(&level.gauss[f.orbit]);
            let s = &num.orbit[f.orbit].split;
            let mid = g.mul(&s.kappa1.add(&s.kappa2)).neg();
            let top = g.mul(&g).mul(&s.kappa1).mul(&s.kappa2);
            let e1 = table.embed(&f.mid).sub(&mid).abs();
            let e2 = table.embed(&f.top).sub(&top).abs();
            let scale = Integer::from(level.q()).pow(f.size).to_f64();
            ((e1.mid.to_f64() + e1.rad_f64()) / scale.sqrt() / scale.sqrt())
                .max((e2.mid.to_f64() + e2.rad_f64()) / scale / scale)
        })
        .reduce(|| 0.0, f64::max)
}
