//! Exact arithmetic in Z[zeta_{3p}] in the power basis mod Phi_{3p}.

use crate::error::{Error, Result};
use crate::ffield::{gcd, FieldParams};
use crate::numeric::{ComplexBall, RealBall};
use rug::{Float, Integer};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

pub type BigRational = rug::Rational;

/// The ring Z[x]/Phi_n together with the reductions of x^k, k < n.
#[derive(Debug)]
pub struct CycRing {
    n: u32,
    /// Phi_n, lowest first, monic of degree phi
    phi_poly: Vec<i64>,
    zeta_pow: Vec<Vec<i64>>,
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![0i64; num.len() - dd];
    for k in (0..q.len()).rev() {
        let c = r[k + dd] / den[dd];
        q[k] = c;
        for (i, &d) in den.iter().enumerate() {
            r[k + i] -= c * d;
        }
    }
    debug_assert!(r.iter().all(|&c| c == 0));
    q
}

/// Phi_n by dividing x^n - 1 by Phi_d for every proper divisor d.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    let mut cache: HashMap<u32, Vec<i64>> = HashMap::new();
    fn go(n: u32, cache: &mut HashMap<u32, Vec<i64>>) -> Vec<i64> {
        if let Some(v) = cache.get(&n) {
            return v.clone();
        }
        let mut num = vec![0i64; n as usize + 1];
        num[0] = -1;
        num[n as usize] = 1;
        for d in 1..n {
            if n % d == 0 {
                let f = go(d, cache);
                num = poly_div_exact(&num, &f);
            }
        }
        cache.insert(n, num.clone());
        num
    }
    go(n, &mut cache)
}

impl CycRing {
    fn build(n: u32) -> Self {
        let phi_poly = cyclotomic_polynomial(n);
        let phi = phi_poly.len() - 1;
        let mut zeta_pow = Vec::with_capacity(n as usize);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..n {
            zeta_pow.push(cur.clone());
            // multiply by x and reduce
            let top = cur[phi - 1];
            for i in (1..phi).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for i in 0..phi {
                    cur[i] -= top * phi_poly[i];
                }
            }
        }
        CycRing { n, phi_poly, zeta_pow }
    }

    /// Conductor n.
    pub fn conductor(&self) -> u32 {
        self.n
    }
    /// phi(n), the rank of the power basis.
    pub fn rank(&self) -> usize {
        self.phi_poly.len() - 1
    }
    pub fn phi_poly(&self) -> &[i64] {
        &self.phi_poly
    }
}

/// Shared ring for conductor 3p.
pub fn ring_for_prime(p: u64) -> Arc<CycRing> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<CycRing>>>> = OnceLock::new();
    let n = 3 * p as u32;
    let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
    map.entry(n).or_insert_with(|| Arc::new(CycRing::build(n))).clone()
}

/// An element of Z[zeta_n].
#[derive(Clone)]
pub struct CycInt {
    ring: Arc<CycRing>,
    coords: Vec<Integer>,
}

impl PartialEq for CycInt {
    fn eq(&self, o: &Self) -> bool {
        self.ring.n == o.ring.n && self.coords == o.coords
    }
}
impl Eq for CycInt {}

impl fmt::Debug for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coords
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| format!("{c}*z^{i}"))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl CycInt {
    pub fn zero(ring: &Arc<CycRing>) -> Self {
        CycInt {
            ring: ring.clone(),
            coords: vec![Integer::new(); ring.rank()],
        }
    }

    pub fn from_int(ring: &Arc<CycRing>, n: impl Into<Integer>) -> Self {
        let mut z = Self::zero(ring);
        z.coords[0] = n.into();
        z
    }

    pub fn one(ring: &Arc<CycRing>) -> Self {
        Self::from_int(ring, 1)
    }

    /// zeta^k for any integer k.
    pub fn zeta_pow(ring: &Arc<CycRing>, k: i64) -> Self {
        let idx = k.rem_euclid(ring.n as i64) as usize;
        CycInt {
            ring: ring.clone(),
            coords: ring.zeta_pow[idx].iter().map(|&c| Integer::from(c)).collect(),
        }
    }

    /// sum_k counts[k] zeta^k with counts indexed by k mod n.
    pub fn from_exponent_counts(ring: &Arc<CycRing>, counts: &[i64]) -> Self {
        assert_eq!(counts.len(), ring.n as usize);
        let phi = ring.rank();
        let mut acc = vec![0i128; phi];
        for (k, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (a, &z) in acc.iter_mut().zip(&ring.zeta_pow[k]) {
                *a += c as i128 * z as i128;
            }
        }
        CycInt {
            ring: ring.clone(),
            coords: acc.into_iter().map(Integer::from).collect(),
        }
    }

    pub fn ring(&self) -> &Arc<CycRing> {
        &self.ring
    }
    pub fn conductor(&self) -> u32 {
        self.ring.n
    }
    pub fn coords(&self) -> &[Integer] {
        &self.coords
    }
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == 0)
    }

    fn check(&self, o: &CycInt) -> Result<()> {
        if self.ring.n != o.ring.n {
            return Err(Error::ConductorMismatch(self.ring.n, o.ring.n));
        }
        Ok(())
    }

    pub fn checked_add(&self, o: &CycInt) -> Result<CycInt> {
        self.check(o)?;
        Ok(self.add_unchecked(o))
    }
    pub fn checked_sub(&self, o: &CycInt) -> Result<CycInt> {
        self.check(o)?;
        Ok(self.add_unchecked(&o.neg_ref()))
    }
    pub fn checked_mul(&self, o: &CycInt) -> Result<CycInt> {
        self.check(o)?;
        Ok(self.mul_unchecked(o))
    }

    fn add_unchecked(&self, o: &CycInt) -> CycInt {
        CycInt {
            ring: self.ring.clone(),
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(a, b)| Integer::from(a + b))
                .collect(),
        }
    }

    fn neg_ref(&self) -> CycInt {
        CycInt {
            ring: self.ring.clone(),
            coords: self.coords.iter().map(|a| Integer::from(-a)).collect(),
        }
    }

    fn mul_unchecked(&self, o: &CycInt) -> CycInt {
        let phi = self.ring.rank();
        let mut r = vec![Integer::new(); 2 * phi - 1];
        for (i, a) in self.coords.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.coords.iter().enumerate() {
                if *b != 0 {
                    r[i + j] += a * b;
                }
            }
        }
        CycInt::reduce(&self.ring, r)
    }

    /// Reduces a coefficient vector of any length mod Phi_n.
    fn reduce(ring: &Arc<CycRing>, mut r: Vec<Integer>) -> CycInt {
        let phi = ring.rank();
        let f = &ring.phi_poly;
        for k in (phi..r.len()).rev() {
            if r[k] == 0 {
                continue;
            }
            let t = std::mem::take(&mut r[k]);
            for i in 0..phi {
                match f[i] {
                    0 => {}
                    1 => r[k - phi + i] -= &t,
                    -1 => r[k - phi + i] += &t,
                    c => r[k - phi + i] -= &t * c,
                }
            }
        }
        r.truncate(phi);
        r.resize(phi, Integer::new());
        CycInt { ring: ring.clone(), coords: r }
    }

    pub fn mul_int(&self, k: &Integer) -> CycInt {
        CycInt {
            ring: self.ring.clone(),
            coords: self.coords.iter().map(|a| Integer::from(a * k)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> CycInt {
        let mut r = CycInt::one(&self.ring);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul_unchecked(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul_unchecked(&b);
            }
        }
        r
    }

    /// sigma_k: zeta -> zeta^k, for k prime to n.
    pub fn galois(&self, k: i64) -> Result<CycInt> {
        let n = self.ring.n as i64;
        if gcd(k.rem_euclid(n) as u64, n as u64) != 1 {
            return Err(Error::OutOfRange(format!("{k} is not a unit mod {n}")));
        }
        let phi = self.ring.rank();
        let mut r = vec![Integer::new(); phi];
        for (i, c) in self.coords.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let idx = (i as i64 * k).rem_euclid(n) as usize;
            for (dst, &z) in r.iter_mut().zip(&self.ring.zeta_pow[idx]) {
                match z {
                    0 => {}
                    1 => *dst += c,
                    -1 => *dst -= c,
                    z => *dst += c * z,
                }
            }
        }
        Ok(CycInt { ring: self.ring.clone(), coords: r })
    }

    /// Complex conjugation zeta -> zeta^{-1}.
    pub fn conj(&self) -> CycInt {
        self.galois(-1).expect("-1 is a unit")
    }

    /// Fixed by conjugation, i.e. lies in the real subfield.
    pub fn is_real(&self) -> bool {
        self.conj() == *self
    }

    /// The integer if all non-constant coordinates vanish.
    pub fn is_rational_integer(&self) -> Option<Integer> {
        self.coords[1..]
            .iter()
            .all(|c| *c == 0)
            .then(|| self.coords[0].clone())
    }

    /// Absolute norm: the product of all Galois conjugates.
    pub fn norm(&self) -> Integer {
        let n = self.ring.n as i64;
        let mut acc = CycInt::one(&self.ring);
        for k in 1..n {
            if gcd(k as u64, n as u64) == 1 {
                acc = acc.mul_unchecked(&self.galois(k).unwrap());
            }
        }
        acc.is_rational_integer()
            .expect("a norm is a rational integer")
    }

    /// iota(self) with zeta_n -> exp(2 pi i / n), enclosed in a ball.
    pub fn embed(&self, prec: u32) -> ComplexBall {
        EmbedTable::new(&self.ring, prec).embed(self)
    }
}

impl std::ops::Add for &CycInt {
    type Output = CycInt;
    fn add(self, o: &CycInt) -> CycInt {
        self.checked_add(o).expect("conductor mismatch")
    }
}
impl std::ops::Sub for &CycInt {
    type Output = CycInt;
    fn sub(self, o: &CycInt) -> CycInt {
        self.checked_sub(o).expect("conductor mismatch")
    }
}
impl std::ops::Mul for &CycInt {
    type Output = CycInt;
    fn mul(self, o: &CycInt) -> CycInt {
        self.checked_mul(o).expect("conductor mismatch")
    }
}
impl std::ops::Neg for &CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        self.neg_ref()
    }
}

/// Precomputed embeddings of the power basis at one precision.
#[derive(Clone, Debug)]
pub struct EmbedTable {
    prec: u32,
    n: u32,
    basis: Vec<ComplexBall>,
}

impl EmbedTable {
    pub fn new(ring: &Arc<CycRing>, prec: u32) -> Self {
        let basis = (0..ring.rank())
            .map(|i| ComplexBall::root_of_unity(i as i64, ring.n as u64, prec + 32))
            .collect();
        EmbedTable { prec, n: ring.n, basis }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn embed(&self, a: &CycInt) -> ComplexBall {
        assert_eq!(a.ring.n, self.n, "conductor mismatch");
        let w = self.prec + 32;
        let mut re = Float::new(w);
        let mut im = Float::new(w);
        let mut total = Integer::new();
        for (c, z) in a.coords.iter().zip(&self.basis) {
            if *c == 0 {
                continue;
            }
            re += Float::with_val(w, &z.re * c);
            im += Float::with_val(w, &z.im * c);
            total += &*c.as_abs();
        }
        // each basis value is within 2^{2-w}, each product and partial sum
        // rounds by at most 2^{1-w} relative to total; 2^{4-prec} covers the
        // lot for rank < 2^20, plus the final rounding to prec
        let mut rad = Float::with_val(64, &total);
        rad <<= 4 - self.prec as i32;
        let re = RealBall { mid: re, rad: rad.clone() };
        let im = RealBall { mid: im, rad: Float::new(64) };
        let mut z = ComplexBall::from_parts(&re, &im);
        z.re.set_prec(self.prec);
        z.im.set_prec(self.prec);
        let mut fin = Float::with_val(64, &total);
        fin <<= 2 - self.prec as i32;
        z.rad += fin;
        z
    }
}

/// ord_p(n)/e, normalised so that ord(q) = 1.
pub fn ord_frak_p(n: &Integer, params: &FieldParams) -> Result<BigRational> {
    if *n == 0 {
        return Err(Error::Zero("valuation argument"));
    }
    let p = Integer::from(params.p());
    let mut v = 0u64;
    let mut m = n.clone().abs();
    while m.is_divisible(&p) {
        m /= &p;
        v += 1;
    }
    Ok(BigRational::from((v, params.e())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r7() -> Arc<CycRing> {
        ring_for_prime(7)
    }

    #[test]
    fn phi21_has_degree_12() {
        assert_eq!(r7().rank(), 12);
        assert_eq!(
            cyclotomic_polynomial(21),
            vec![1, -1, 0, 1, -1, 0, 1, 0, -1, 1, 0, -1, 1]
        );
    }

    #[test]
    fn zeta_order() {
        let r = r7();
        assert_eq!(CycInt::zeta_pow(&r, 21), CycInt::one(&r));
        assert_eq!(CycInt::zeta_pow(&r, 1).pow(21), CycInt::one(&r));
    }

    #[test]
    fn geometric_sum_vanishes() {
        let r = r7();
        let s = CycInt::from_exponent_counts(&r, &[1; 21]);
        assert!(s.is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let r = r7();
        let one = CycInt::one(&r);
        let z = CycInt::zeta_pow(&r, 1);
        assert_eq!(&(&one + &z) * &(&one - &z), &one - &CycInt::zeta_pow(&r, 2));
    }

    #[test]
    fn rational_integer_collapse() {
        let r = r7();
        assert_eq!(CycInt::from_int(&r, 5).is_rational_integer(), Some(Integer::from(5)));
        assert_eq!(CycInt::zeta_pow(&r, 1).is_rational_integer(), None);
    }

    #[test]
    fn embedding_of_one_and_roots() {
        let r = r7();
        let e = CycInt::one(&r).embed(128);
        assert!((e.re.clone() - 1u32).abs() <= e.rad && e.im.clone().abs() <= e.rad);
        for k in 0..21 {
            let a = CycInt::zeta_pow(&r, k).embed(128).abs();
            assert!((a.mid.clone() - 1u32).abs() <= a.rad);
        }
    }

    #[test]
    fn conductor_mismatch_is_an_error() {
        let a = CycInt::one(&ring_for_prime(7));
        let b = CycInt::one(&ring_for_prime(11));
        assert!(matches!(a.checked_add(&b), Err(Error::ConductorMismatch(21, 33))));
    }

    #[test]
    fn norm_of_one_minus_zeta_p() {
        // N_{Q(zeta_21)/Q}(1 - zeta_7) = 7^2 since the extension over Q(zeta_7) has degree 2
        let r = r7();
        let x = &CycInt::one(&r) - &CycInt::zeta_pow(&r, 3);
        assert_eq!(x.norm(), 49);
    }

    #[test]
    fn valuation_normalisation() {
        let q7 = FieldParams::new(7).unwrap();
        let q49 = FieldParams::new(49).unwrap();
        assert_eq!(ord_frak_p(&Integer::from(343), &q7).unwrap(), 3);
        assert_eq!(ord_frak_p(&Integer::from(1), &q7).unwrap(), 0);
        assert_eq!(ord_frak_p(&Integer::from(49), &q49).unwrap(), 1);
        assert!(ord_frak_p(&Integer::new(), &q7).is_err());
    }
}
