//! Gauss and Kloosterman sums over the subfields of one ambient field.
//!
//! psi_0(x) = zeta_p^{c lift(x)} with c = 1 by default; the cubic character
//! of F_{q^d} sends x to kappa(x^{(q^d-1)/3}), kappa fixed once through the
//! generator of the smallest field holding the cube roots of unity.

use crate::cyclo::{BigRational, CycInt, CycRing, EmbedTable};
use crate::error::{Error, Result};
use crate::ffield::{ord3, ExtField, FieldElement, FieldParams};
use crate::numeric::{ComplexBall, RealBall};
use crate::orbits::FullOrbit;
use rug::float::Constant;
use rug::ops::{Pow, RemRounding};
use rug::{Float, Integer};
use std::sync::Arc;

/// psi_{F,beta}: x -> zeta_p^{lift Tr_{F/F_p}(beta x)} on F = F_{q^degree}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdditiveChar {
    pub degree: u32,
    pub shift: FieldElement,
}

/// x -> kappa(x^{(q^n-1)/3})^j on F_{q^degree}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CubicChar {
    pub degree: u32,
    pub j: u8,
}

/// Character machinery bound to one ambient field.
#[derive(Debug)]
pub struct CharContext {
    field: Arc<ExtField>,
    ring: Arc<CycRing>,
    psi_mult: u64,
    /// kappa(g^{(N-1)/3}) = zeta_3^{omega_exp} for the ambient generator g
    omega_exp: u64,
}

impl CharContext {
    pub fn new(field: Arc<ExtField>) -> Result<Self> {
        Self::with_psi(field, 1)
    }

    /// `psi_mult` twists psi_0 to zeta_p^{psi_mult lift(x)}.
    pub fn with_psi(field: Arc<ExtField>, psi_mult: u64) -> Result<Self> {
        let p = field.p();
        if psi_mult % p == 0 {
            return Err(Error::Zero("additive character twist"));
        }
        let ring = crate::cyclo::ring_for_prime(p);
        let omega_exp = if (field.order() - 1) % 3 != 0 {
            // no cube roots of unity here; only the trivial character is usable
            0
        } else {
            let s = ord3(field.q());
            let small = ExtField::new(field.params(), s)?;
            let omega_small = small.exp((small.order() - 1) / 3);
            let omega = field.embed_from(&small, omega_small)?;
            let l = field.log(omega).expect("nonzero");
            let c = l / ((field.order() - 1) / 3);
            // omega = g^{c(N-1)/3}; then g^{(N-1)/3} = omega^{c^{-1}} = omega^c
            c % 3
        };
        Ok(CharContext {
            field,
            ring,
            psi_mult: psi_mult % p,
            omega_exp,
        })
    }

    pub fn field(&self) -> &Arc<ExtField> {
        &self.field
    }
    pub fn ring(&self) -> &Arc<CycRing> {
        &self.ring
    }
    pub fn params(&self) -> FieldParams {
        self.field.params()
    }
    pub fn psi_mult(&self) -> u64 {
        self.psi_mult
    }

    fn check_subfield(&self, d: u32) -> Result<()> {
        if d == 0 || self.field.degree() % d != 0 {
            return Err(Error::NotSubfield {
                sub: d * self.params().e(),
                ext: self.field.abs_degree(),
            });
        }
        Ok(())
    }

    fn check_member(&self, x: FieldElement, d: u32) -> Result<()> {
        if !self.field.in_subfield(x, d)? {
            return Err(Error::NotInSubfield(d * self.params().e()));
        }
        Ok(())
    }

    /// Exponent k in Z/3 with chi_{F_{q^d}}(x) = zeta_3^k (j = 1).
    pub fn cubic_exponent(&self, x: FieldElement, d: u32) -> Result<u64> {
        self.check_subfield(d)?;
        let qd = self.params().q().pow(d);
        if (qd - 1) % 3 != 0 {
            return Err(Error::NoCubicCharacter(qd));
        }
        self.check_member(x, d)?;
        let l = self.field.log(x).ok_or(Error::Zero("character argument"))?;
        let cof = (self.field.order() - 1) / (qd - 1);
        Ok((l / cof) % 3 * self.omega_exp % 3)
    }

    /// Exponent in Z/p with psi_{F_{q^d},beta}(x) = zeta_p^k.
    pub fn additive_exponent(&self, chi: AdditiveChar, x: FieldElement) -> Result<u64> {
        self.check_subfield(chi.degree)?;
        self.check_member(x, chi.degree)?;
        self.check_member(chi.shift, chi.degree)?;
        let y = self.field.mul(chi.shift, x);
        let t = self.field.trace_to_prime(y, chi.degree * self.params().e());
        Ok(t * self.psi_mult % self.field.p())
    }

    /// Position of zeta_3^a zeta_p^b among the 3p-th roots of unity.
    fn slot(&self, a: u64, b: u64) -> usize {
        let p = self.field.p();
        ((p * (a % 3) + 3 * (b % p)) % (3 * p)) as usize
    }

    fn tr_by_log(&self, l: u64, d: u32) -> u64 {
        self.field.trace_to_prime_by_log(l, d * self.params().e()) * self.psi_mult % self.field.p()
    }

    /// -sum_{x in F^x} psi_{F,beta}(x); equals 1 for beta != 0.
    pub fn additive_sum(&self, chi: AdditiveChar) -> Result<CycInt> {
        self.check_subfield(chi.degree)?;
        self.check_member(chi.shift, chi.degree)?;
        let mut counts = vec![0i64; 3 * self.field.p() as usize];
        for x in self.field.subfield_elements(chi.degree)?.into_iter().skip(1) {
            let k = self.additive_exponent(chi, x)?;
            counts[self.slot(0, k)] -= 1;
        }
        Ok(CycInt::from_exponent_counts(&self.ring, &counts))
    }

    /// G(F_{q^d}, chi^j, psi_{F,alpha}) = -sum chi^j(x) psi(alpha x), by raw summation.
    pub fn gauss_sum(&self, d: u32, j: u8, alpha: FieldElement) -> Result<CycInt> {
        if alpha.is_zero() {
            return Err(Error::Zero("Gauss sum shift"));
        }
        self.check_subfield(d)?;
        let qd = self.params().q().pow(d);
        if (qd - 1) % 3 != 0 {
            return Err(Error::NoCubicCharacter(qd));
        }
        self.check_member(alpha, d)?;
        let n1 = self.field.order() - 1;
        let cof = n1 / (qd - 1);
        let la = self.field.log(alpha).unwrap();
        let mut counts = vec![0i64; 3 * self.field.p() as usize];
        for i in 0..qd - 1 {
            let l = i * cof;
            let chi = (i % 3) * self.omega_exp * j as u64;
            let psi = self.tr_by_log(l + la, d);
            counts[self.slot(chi, psi)] -= 1;
        }
        Ok(CycInt::from_exponent_counts(&self.ring, &counts))
    }

    /// Kl(F_{q^d}, psi_{F,beta}, alpha) = -sum_{x in F^x} psi_{F,beta}(x + alpha/x).
    pub fn kloosterman_general(&self, d: u32, beta: FieldElement, alpha: FieldElement) -> Result<CycInt> {
        if alpha.is_zero() || beta.is_zero() {
            return Err(Error::Zero("Kloosterman argument"));
        }
        self.check_subfield(d)?;
        self.check_member(alpha, d)?;
        self.check_member(beta, d)?;
        let qd = self.params().q().pow(d);
        let n1 = self.field.order() - 1;
        let cof = n1 / (qd - 1);
        let (lb, la) = (self.field.log(beta).unwrap(), self.field.log(alpha).unwrap());
        let p = self.field.p();
        let mut counts = vec![0i64; 3 * p as usize];
        for i in 0..qd - 1 {
            let l = i * cof;
            // Tr(beta x) + Tr(beta alpha / x) by linearity
            let t1 = self.tr_by_log(lb + l, d);
            let t2 = self.tr_by_log(lb + la + n1 - l, d);
            counts[self.slot(0, t1 + t2)] -= 1;
        }
        Ok(CycInt::from_exponent_counts(&self.ring, &counts))
    }

    /// The orbit normalisation Kl(F_{q^d}, psi_{F,alpha}, 1).
    pub fn kloosterman_sum(&self, d: u32, alpha: FieldElement) -> Result<CycInt> {
        self.kloosterman_general(d, alpha, self.field.one())
    }

    /// chi^j(alpha)^{-1} on F_{q^d} as a cyclotomic integer.
    pub fn cubic_inverse_value(&self, d: u32, j: u8, alpha: FieldElement) -> Result<CycInt> {
        let k = self.cubic_exponent(alpha, d)?;
        let e = (3 - (k * j as u64) % 3) % 3;
        let p = self.field.p() as i64;
        Ok(CycInt::zeta_pow(&self.ring, p * e as i64))
    }

    /// Gauss sums over F_{q^s}, s = ord(q mod 3), for j = 1, 2 and shift 1.
    pub fn base_gauss(&self) -> Result<[CycInt; 2]> {
        let s = ord3(self.params().q());
        let one = self.field.one();
        Ok([self.gauss_sum(s, 1, one)?, self.gauss_sum(s, 2, one)?])
    }

    /// gamma for (j, alpha) on F_{q^m} via shift invariance and Hasse-Davenport:
    /// chi^j(alpha)^{-1} g_j^{m/s}.
    pub fn gauss_fast(&self, base: &[CycInt; 2], m: u32, j: u8, alpha: FieldElement) -> Result<CycInt> {
        let s = ord3(self.params().q());
        if m % s != 0 {
            return Err(Error::NoCubicCharacter(self.params().q().pow(m)));
        }
        let c = self.cubic_inverse_value(m, j, alpha)?;
        Ok(&c * &base[j as usize - 1].pow(m / s))
    }

    /// Gauss sum of an orbit from its representative, by raw summation.
    pub fn orbit_gauss_direct(&self, o: &FullOrbit) -> Result<CycInt> {
        self.gauss_sum(o.size, o.j, o.rep)
    }

    /// Kloosterman sum of an orbit from its representative, by raw summation.
    pub fn orbit_kloosterman_direct(&self, o: &FullOrbit) -> Result<CycInt> {
        self.kloosterman_sum(o.size, o.rep)
    }
}

/// kappa_1^n + kappa_2^n from kappa_1 + kappa_2 = kl and kappa_1 kappa_2 = qd.
pub fn kloosterman_power_sum(kl: &CycInt, qd: &Integer, n: u32) -> CycInt {
    let ring = kl.ring().clone();
    let mut prev = CycInt::from_int(&ring, 2);
    let mut cur = kl.clone();
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = &(kl * &cur) - &prev.mul_int(qd);
        prev = cur;
        cur = next;
    }
    cur
}

/// The pair kappa_1, kappa_2 and the angle theta of a Kloosterman value.
#[derive(Clone, Debug)]
pub struct KappaSplit {
    pub kappa1: ComplexBall,
    pub kappa2: ComplexBall,
    pub theta: RealBall,
}

/// Roots of z^2 - iota(kl) z + q^d, kappa_1 in the upper half plane.
pub fn kappa_split(kl: &CycInt, q: u64, d: u32, table: &EmbedTable) -> Result<KappaSplit> {
    let prec = table.prec();
    let qd = Integer::from(q).pow(d);
    let sq = RealBall::from_int(&qd, prec + 16).sqrt().expect("q^d > 0");
    let sq = RealBall {
        mid: Float::with_val(prec, &sq.mid),
        rad: sq.rad.clone(),
    };
    let theta = if kl.is_zero() {
        RealBall::exact(Float::with_val(prec, Constant::Pi) / 2u32)
    } else {
        let z = table.embed(kl);
        let x = z.real();
        let two_sq = sq.mul(&RealBall::from_f64(2.0, prec));
        let c = x.div(&two_sq).ok_or(Error::Precision {
            what: "Kloosterman normalisation".into(),
            bits: prec,
        })?;
        c.acos().ok_or(Error::Precision {
            what: "Kloosterman angle (Weil bound not resolved)".into(),
            bits: prec,
        })?
    };
    let (c, s) = (theta.cos(), theta.sin());
    let re = sq.mul(&c);
    let im = sq.mul(&s);
    let kappa1 = ComplexBall::from_parts(&re, &im);
    let kappa2 = kappa1.conj();
    Ok(KappaSplit { kappa1, kappa2, theta })
}

/// Closed-form valuation of gamma(o), normalised by ord(q) = 1.
///
/// For q = 1 mod 3 with p = 2 mod 3 (q an even power) both cubic Gauss sums
/// have valuation |o|/2 by Stickelberger, so the pr1 split only applies when
/// p = 1 mod 3.
pub fn gauss_valuation(params: &FieldParams, size: u32, pr1: Option<i8>) -> BigRational {
    let q = params.q();
    if q % 3 == 1 && params.p() % 3 == 1 {
        match pr1 {
            Some(1) => BigRational::from((2 * size, 3)),
            _ => BigRational::from((size, 3)),
        }
    } else {
        BigRational::from((size, 2))
    }
}

/// Gauss angle eps in [0, 2 pi) from iota(gamma).
pub fn gauss_angle(gamma: &CycInt, table: &EmbedTable) -> Result<RealBall> {
    table.embed(gamma).arg().ok_or(Error::Precision {
        what: "Gauss angle".into(),
        bits: table.prec(),
    })
}

/// ord of gamma at the prime above p singled out by `root`, a root of
/// x^2 + x + 1 mod p (only for p = 1 mod 3), computed exactly from the
/// relative norm to Q(zeta_3). With `root = None` (p = 2 mod 3, p inert in
/// Q(zeta_3)) the unique prime is used.
pub fn gauss_valuation_exact(gamma: &CycInt, params: &FieldParams, root: Option<u64>) -> Result<BigRational> {
    let p = params.p();
    let n = 3 * p as i64;
    // product over k = 1 mod 3, k a unit mod 3p
    let mut nr = CycInt::one(gamma.ring());
    for k in 1..n {
        if k % 3 == 1 && k % p as i64 != 0 {
            nr = &nr * &gamma.galois(k)?;
        }
    }
    let c = nr.coords();
    if c.iter().enumerate().any(|(i, x)| i != 0 && i != p as usize && *x != 0) {
        return Err(Error::OracleMismatch("relative norm not in Z[zeta_3]".into()));
    }
    // nr = u + v zeta_3 with zeta_3 = zeta^p
    let (u, v) = (c[0].clone(), c[p as usize].clone());
    let pz = Integer::from(p);
    let vp = |x: &Integer| -> u32 {
        if *x == 0 {
            return u32::MAX;
        }
        let mut m = x.clone().abs();
        let mut k = 0;
        while m.is_divisible(&pz) {
            m /= &pz;
            k += 1;
        }
        k
    };
    let ord = match root {
        None => vp(&u).min(vp(&v)),
        Some(r0) => {
            let nn = Integer::from(&u * &u) - Integer::from(&u * &v) + Integer::from(&v * &v);
            let k = vp(&nn) + 2;
            let modulus = pz.clone().pow(k);
            // Hensel-lift r0 to a root of x^2 + x + 1 mod p^k
            let mut r = Integer::from(r0);
            for _ in 0..(k.max(1) as f64).log2().ceil() as u32 + 2 {
                let f = Integer::from(&r * &r) + &r + 1u32;
                let df = Integer::from(2u32 * &r) + 1u32;
                let inv = df.invert(&modulus).map_err(|_| Error::OracleMismatch("Hensel step".into()))?;
                r = (r - f * inv).rem_euc(&modulus);
            }
            let val = (u + v * r).rem_euc(&modulus);
            if val == 0 {
                k
            } else {
                vp(&val)
            }
        }
    };
    Ok(BigRational::from((ord as u64, (p as u32 - 1) * params.e())))
}

/// The two roots of x^2 + x + 1 mod p (p = 1 mod 3), ascending.
pub fn cube_roots_of_unity_mod(p: u64) -> Vec<u64> {
    (2..p).filter(|&r| (r * r + r + 1) % p == 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::FieldParams;

    fn ctx(q: u64, n: u32) -> CharContext {
        let f = ExtField::new(FieldParams::new(q).unwrap(), n).unwrap();
        CharContext::new(Arc::new(f)).unwrap()
    }

    #[test]
    fn kloosterman_f7_matches_hand_sum() {
        // {x + 1/x : x in F_7^x} = {2,6,1,6,1,5}
        let c = ctx(7, 1);
        let kl = c.kloosterman_sum(1, c.field().one()).unwrap();
        let r = c.ring();
        let z = |k: i64| CycInt::zeta_pow(r, 3 * k);
        let expect = -&(&(&z(2) + &z(5)) + &(&z(1).mul_int(&Integer::from(2)) + &z(6).mul_int(&Integer::from(2))));
        assert_eq!(kl, expect);
        assert!(kl.is_real());
    }

    #[test]
    fn trivial_character_sum_is_one() {
        for (q, n) in [(7, 1), (7, 2), (11, 2)] {
            let c = ctx(q, n);
            for d in [1, n] {
                let chi = AdditiveChar { degree: d, shift: c.field().one() };
                assert_eq!(c.additive_sum(chi).unwrap(), CycInt::one(c.ring()));
            }
        }
    }

    #[test]
    fn gauss_modulus_sqrt_q() {
        let c = ctx(7, 1);
        let g = c.gauss_sum(1, 1, c.field().one()).unwrap();
        assert_eq!((&g * &g.conj()).is_rational_integer(), Some(Integer::from(7)));
        let a = g.embed(128).abs();
        let dev = (a.mid.clone() - Float::with_val(128, 7).sqrt()).abs();
        assert!(dev < 1e-20 && dev <= a.rad);
    }

    #[test]
    fn gauss_shift_identity() {
        let c = ctx(7, 2);
        let one = c.field().one();
        for x in c.field().elements().skip(1).step_by(3) {
            for j in [1u8, 2] {
                let lhs = c.gauss_sum(2, j, x).unwrap();
                let rhs = &c.cubic_inverse_value(2, j, x).unwrap() * &c.gauss_sum(2, j, one).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn hasse_davenport_f7_to_f49() {
        let c = ctx(7, 2);
        for x in c.field().subfield_elements(1).unwrap().into_iter().skip(1) {
            for j in [1u8, 2] {
                let g1 = c.gauss_sum(1, j, x).unwrap();
                assert_eq!(c.gauss_sum(2, j, x).unwrap(), g1.pow(2));
            }
        }
    }

    #[test]
    fn kloosterman_extension_power_sum() {
        let c = ctx(7, 2);
        for x in c.field().subfield_elements(1).unwrap().into_iter().skip(1) {
            let k1 = c.kloosterman_sum(1, x).unwrap();
            let k2 = c.kloosterman_sum(2, x).unwrap();
            assert_eq!(k2, kloosterman_power_sum(&k1, &Integer::from(7), 2));
        }
    }

    #[test]
    fn kloosterman_frobenius_invariance() {
        let c = ctx(7, 2);
        for x in c.field().elements().skip(1).step_by(5) {
            let y = c.field().frobenius(x, 1);
            assert_eq!(c.kloosterman_sum(2, x).unwrap(), c.kloosterman_sum(2, y).unwrap());
        }
    }

    #[test]
    fn kappa_vieta_and_zero_case() {
        let c = ctx(7, 1);
        let t = EmbedTable::new(c.ring(), 128);
        for x in c.field().elements().skip(1) {
            let kl = c.kloosterman_sum(1, x).unwrap();
            let s = kappa_split(&kl, 7, 1, &t).unwrap();
            let prod = s.kappa1.mul(&s.kappa2);
            assert!((prod.re.clone() - 7u32).abs() <= prod.rad);
            let sum = s.kappa1.add(&s.kappa2);
            let e = t.embed(&kl);
            assert!((sum.re.clone() - &e.re).abs() <= Float::with_val(64, &sum.rad + &e.rad));
        }
        let s = kappa_split(&CycInt::zero(c.ring()), 7, 1, &t).unwrap();
        assert!((s.theta.to_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn closed_form_valuations() {
        let p7 = FieldParams::new(7).unwrap();
        let p11 = FieldParams::new(11).unwrap();
        assert_eq!(gauss_valuation(&p7, 1, Some(1)), BigRational::from((2, 3)));
        assert_eq!(gauss_valuation(&p7, 2, Some(-1)), BigRational::from((2, 3)));
        assert_eq!(gauss_valuation(&p11, 2, None), 1);
    }

    #[test]
    fn exact_valuation_matches_closed_form_for_one_prime() {
        let c = ctx(7, 1);
        let params = c.params();
        let one = c.field().one();
        let g1 = c.gauss_sum(1, 1, one).unwrap();
        let g2 = c.gauss_sum(1, 2, one).unwrap();
        let roots = cube_roots_of_unity_mod(7);
        let fits: Vec<bool> = roots
            .iter()
            .map(|&r| {
                gauss_valuation_exact(&g1, &params, Some(r)).unwrap() == gauss_valuation(&params, 1, Some(1))
                    && gauss_valuation_exact(&g2, &params, Some(r)).unwrap()
                        == gauss_valuation(&params, 1, Some(-1))
            })
            .collect();
        assert_eq!(fits.iter().filter(|&&b| b).count(), 1);
    }
}
