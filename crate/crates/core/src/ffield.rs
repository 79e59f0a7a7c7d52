//! Finite fields F_{q^n} realised as F_p[x]/(f) with exp/log tables.
//!
//! Elements are packed as the integer whose base-p digits are the
//! coordinates in the power basis 1, x, ..., x^{m-1} (m = e*n). Packed order
//! is therefore lexicographic in the coordinates read from the top degree
//! down, and that is the fixed total order used for canonical
//! representatives everywhere else.

use crate::error::{Error, Result};
use serde::Serialize;

/// Largest field order handled by table arithmetic.
pub const MAX_FIELD_ORDER: u64 = 1 << 22;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits q = p^e, or `None` if q is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = *prime_factors(q).first()?;
    let mut r = q;
    let mut e = 0;
    while r % p == 0 {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p, e))
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Multiplicative order of q modulo 3 (1 or 2 for q prime to 3).
pub fn ord3(q: u64) -> u32 {
    if q % 3 == 1 {
        1
    } else {
        2
    }
}

/// q = p^e with the characteristic hypothesis checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FieldParams {
    p: u64,
    e: u32,
    q: u64,
    /// true when the run relaxed p >= 7 to p >= 5.
    out_of_hypothesis: bool,
}

impl FieldParams {
    /// Standard constructor: q must be a power of a prime p >= 7.
    pub fn new(q: u64) -> Result<Self> {
        Self::with_min_char(q, 7)
    }

    /// Escape hatch used by `--allow-small-char`: accepts p >= 5.
    pub fn relaxed(q: u64) -> Result<Self> {
        Self::with_min_char(q, 5)
    }

    fn with_min_char(q: u64, min: u64) -> Result<Self> {
        let (p, e) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        if p < min {
            return Err(Error::SmallCharacteristic { p, min });
        }
        Ok(FieldParams {
            p,
            e,
            q,
            out_of_hypothesis: p < 7,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn out_of_hypothesis(&self) -> bool {
        self.out_of_hypothesis
    }
}

/// Dense polynomials over F_p, lowest degree first. Only what modulus
/// selection and the squarefree oracle need.
pub mod fp_poly {
    pub fn trim(a: &mut Vec<u64>) {
        while a.len() > 1 && *a.last().unwrap() == 0 {
            a.pop();
        }
        if a.is_empty() {
            a.push(0);
        }
    }

    pub fn is_zero(a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn degree(a: &[u64]) -> Option<usize> {
        a.iter().rposition(|&c| c != 0)
    }

    fn inv(a: u64, p: u64) -> u64 {
        super::pow_mod(a, p - 2, p)
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut r: Vec<u64> = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut r);
        r
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut r = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + x * y) % p;
            }
        }
        trim(&mut r);
        r
    }

    /// Remainder of a modulo b (b nonzero).
    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let db = degree(b).expect("division by zero polynomial");
        let lead_inv = inv(b[db], p);
        let mut r = a.to_vec();
        trim(&mut r);
        while let Some(dr) = degree(&r) {
            if dr < db {
                break;
            }
            let c = r[dr] * lead_inv % p;
            let shift = dr - db;
            for (i, &bc) in b.iter().enumerate().take(db + 1) {
                r[shift + i] = (r[shift + i] + p - c * bc % p) % p;
            }
        }
        trim(&mut r);
        r
    }

    pub fn mul_mod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
        rem(&mul(a, b, p), f, p)
    }

    pub fn pow_mod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
        let mut r = vec![1u64];
        let mut b = rem(base, f, p);
        while e > 0 {
            if e & 1 == 1 {
                r = mul_mod(&r, &b, f, p);
            }
            b = mul_mod(&b, &b, f, p);
            e >>= 1;
        }
        r
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !is_zero(&y) {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        if let Some(d) = degree(&x) {
            let li = inv(x[d], p);
            for c in x.iter_mut() {
                *c = *c * li % p;
            }
        }
        x
    }

    pub fn derivative(a: &[u64], p: u64) -> Vec<u64> {
        let mut r: Vec<u64> = a
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| (i as u64 % p) * c % p)
            .collect();
        trim(&mut r);
        r
    }

    /// Rabin's irreducibility test for a monic f of degree m.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let m = match degree(f) {
            Some(d) if d >= 1 => d as u64,
            _ => return false,
        };
        let x = vec![0u64, 1];
        // x^{p^k} mod f, by repeated p-th powers
        let mut frob = vec![x.clone()];
        for _ in 0..m {
            let next = pow_mod(frob.last().unwrap(), p, f, p);
            frob.push(next);
        }
        let xr = rem(&x, f, p);
        if frob[m as usize] != xr {
            return false;
        }
        for r in super::prime_factors(m) {
            let h = sub(&frob[(m / r) as usize], &xr, p);
            let g = gcd(f, &h, p);
            if degree(&g) != Some(0) {
                return false;
            }
        }
        true
    }

    /// The monic irreducible of degree m whose lower coefficients, read as
    /// base-p digits, form the smallest integer.
    pub fn lowest_irreducible(p: u64, m: u32) -> Vec<u64> {
        let count = p.pow(m);
        for v in 0..count {
            let mut f: Vec<u64> = (0..m).map(|i| v / p.pow(i) % p).collect();
            f.push(1);
            if is_irreducible(&f, p) {
                return f;
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }
}

/// An element of some [`ExtField`]; opaque packed coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FieldElement(u32);

impl FieldElement {
    /// Packed coordinate index; stable label for output.
    pub fn index(self) -> u32 {
        self.0
    }
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Arithmetic context for F_{q^n}. Immutable after construction.
#[derive(Debug)]
pub struct ExtField {
    params: FieldParams,
    n: u32,
    m: u32,
    order: u64,
    modulus: Vec<u64>,
    powp: Vec<u64>,
    exp: Vec<u32>,
    log: Vec<u32>,
    tr_log: Vec<u32>,
    generator: FieldElement,
    /// inverse of (m/k) mod p for each k | m, when p does not divide m/k
    tr_scale: Vec<Option<u64>>,
}

impl ExtField {
    /// Builds F_{q^n} with the lowest irreducible modulus of degree e*n
    /// and the smallest primitive element.
    pub fn new(params: FieldParams, n: u32) -> Result<Self> {
        let m = params.e() * n;
        let modulus = fp_poly::lowest_irreducible(params.p(), m);
        Self::with_modulus(params, n, modulus)
    }

    /// Builds F_{q^n} from an explicit monic modulus (checked).
    pub fn with_modulus(params: FieldParams, n: u32, modulus: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("extension degree must be positive".into()));
        }
        let p = params.p();
        let m = params.e() * n;
        let order = (p as u128).pow(m);
        if order > MAX_FIELD_ORDER as u128 {
            return Err(Error::FieldTooLarge(order));
        }
        let order = order as u64;
        if modulus.len() != m as usize + 1
            || modulus[m as usize] != 1
            || !fp_poly::is_irreducible(&modulus, p)
        {
            return Err(Error::ReducibleModulus { p, degree: m });
        }
        let powp: Vec<u64> = (0..=m).map(|i| p.pow(i)).collect();
        let unpack = |v: u64| -> Vec<u64> { (0..m as usize).map(|i| v / powp[i] % p).collect() };
        let pack = |c: &[u64]| -> u64 { c.iter().enumerate().map(|(i, &d)| d * powp[i]).sum() };

        // smallest primitive element, tested by g^{(N-1)/r} != 1
        let group = order - 1;
        let factors = prime_factors(group);
        let mut g = 0u64;
        for cand in 1..order {
            let c = unpack(cand);
            let is_prim = group == 1
                || factors.iter().all(|&r| {
                    let t = fp_poly::pow_mod(&c, group / r, &modulus, p);
                    !(fp_poly::degree(&t) == Some(0) && t[0] == 1)
                });
            if is_prim {
                g = cand;
                break;
            }
        }
        let gc = unpack(g);
        let mut exp = vec![0u32; group as usize];
        let mut log = vec![u32::MAX; order as usize];
        let mut cur = vec![1u64];
        for k in 0..group as usize {
            let mut cc = cur.clone();
            cc.resize(m as usize, 0);
            let v = pack(&cc);
            exp[k] = v as u32;
            log[v as usize] = k as u32;
            cur = fp_poly::mul_mod(&cur, &gc, &modulus, p);
        }

        let mut field = ExtField {
            params,
            n,
            m,
            order,
            modulus,
            powp,
            exp,
            log,
            tr_log: Vec::new(),
            generator: FieldElement(g as u32),
            tr_scale: Vec::new(),
        };
        // absolute trace of the basis, then of every power of g
        let basis_tr: Vec<u64> = (0..m)
            .map(|i| {
                let b = FieldElement(field.powp[i as usize] as u32);
                let t = field.trace_direct(b, m, 1);
                t.0 as u64
            })
            .collect();
        field.tr_log = field
            .exp
            .iter()
            .map(|&v| {
                let s: u64 = (0..m as usize)
                    .map(|i| (v as u64 / field.powp[i] % p) * basis_tr[i])
                    .sum();
                (s % p) as u32
            })
            .collect();
        field.tr_scale = (0..=m)
            .map(|k| {
                if k == 0 || m % k != 0 || (m / k) as u64 % p == 0 {
                    None
                } else {
                    Some(pow_mod((m / k) as u64 % p, p - 2, p))
                }
            })
            .collect();
        Ok(field)
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }
    pub fn p(&self) -> u64 {
        self.params.p()
    }
    pub fn q(&self) -> u64 {
        self.params.q()
    }
    /// Degree over F_q.
    pub fn degree(&self) -> u32 {
        self.n
    }
    /// Degree over F_p.
    pub fn abs_degree(&self) -> u32 {
        self.m
    }
    pub fn order(&self) -> u64 {
        self.order
    }
    /// Modulus coefficients, lowest first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn generator(&self) -> FieldElement {
        self.generator
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }
    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }
    /// Image of an integer in the prime field.
    pub fn from_int(&self, c: i64) -> FieldElement {
        FieldElement(c.rem_euclid(self.p() as i64) as u32)
    }
    pub fn from_coords(&self, coords: &[u64]) -> Result<FieldElement> {
        if coords.len() > self.m as usize || coords.iter().any(|&c| c >= self.p()) {
            return Err(Error::OutOfRange("coordinates".into()));
        }
        Ok(FieldElement(
            coords.iter().enumerate().map(|(i, &c)| c * self.powp[i]).sum::<u64>() as u32,
        ))
    }
    pub fn from_index(&self, index: u32) -> Result<FieldElement> {
        if index as u64 >= self.order {
            return Err(Error::OutOfRange(format!("index {index}")));
        }
        Ok(FieldElement(index))
    }
    pub fn coords(&self, x: FieldElement) -> Vec<u64> {
        (0..self.m as usize)
            .map(|i| x.0 as u64 / self.powp[i] % self.p())
            .collect()
    }
    /// The value in {0..p-1} if x lies in F_p.
    pub fn lift_prime(&self, x: FieldElement) -> Option<u64> {
        ((x.0 as u64) < self.p()).then_some(x.0 as u64)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.p();
        let (mut x, mut y) = (a.0 as u64, b.0 as u64);
        let mut r = 0u64;
        for i in 0..self.m as usize {
            r += ((x % p + y % p) % p) * self.powp[i];
            x /= p;
            y /= p;
        }
        FieldElement(r as u32)
    }
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let p = self.p();
        let mut x = a.0 as u64;
        let mut r = 0u64;
        for i in 0..self.m as usize {
            r += ((p - x % p) % p) * self.powp[i];
            x /= p;
        }
        FieldElement(r as u32)
    }
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement(0);
        }
        let g = self.order - 1;
        let k = (self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64) % g;
        FieldElement(self.exp[k as usize])
    }
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::Zero("inverse argument"));
        }
        let g = self.order - 1;
        let k = (g - self.log[a.0 as usize] as u64) % g;
        Ok(FieldElement(self.exp[k as usize]))
    }
    /// x^e for any e >= 0 (0^0 = 1).
    pub fn pow(&self, x: FieldElement, e: u128) -> FieldElement {
        if e == 0 {
            return self.one();
        }
        if x.0 == 0 {
            return self.zero();
        }
        let g = (self.order - 1) as u128;
        let k = (self.log[x.0 as usize] as u128 * (e % g)) % g;
        FieldElement(self.exp[k as usize])
    }

    /// Discrete log to the base of [`Self::generator`].
    pub fn log(&self, x: FieldElement) -> Option<u64> {
        (x.0 != 0).then(|| self.log[x.0 as usize] as u64)
    }
    /// g^k.
    pub fn exp(&self, k: u64) -> FieldElement {
        FieldElement(self.exp[(k % (self.order - 1)) as usize])
    }

    /// All q^n elements in packed order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order as u32).map(FieldElement)
    }

    fn check_abs_subfield(&self, k: u32) -> Result<()> {
        if k == 0 || self.m % k != 0 {
            return Err(Error::NotSubfield { sub: k, ext: self.m });
        }
        Ok(())
    }

    /// (|F|-1)/(p^k-1): logs of F_{p^k}^x are the multiples of this.
    pub fn abs_cofactor(&self, k: u32) -> Result<u64> {
        self.check_abs_subfield(k)?;
        Ok((self.order - 1) / (self.p().pow(k) - 1))
    }

    /// Membership in the subfield of absolute degree k.
    pub fn in_abs_subfield(&self, x: FieldElement, k: u32) -> Result<bool> {
        let c = self.abs_cofactor(k)?;
        Ok(x.0 == 0 || self.log[x.0 as usize] as u64 % c == 0)
    }

    /// Membership in F_{q^d}.
    pub fn in_subfield(&self, x: FieldElement, d: u32) -> Result<bool> {
        self.in_abs_subfield(x, d * self.params.e())
    }

    /// Elements of F_{q^d} (d | n) in packed order.
    pub fn subfield_elements(&self, d: u32) -> Result<Vec<FieldElement>> {
        let c = self.abs_cofactor(d * self.params.e())?;
        let size = self.q().pow(d);
        let mut v: Vec<FieldElement> = std::iter::once(FieldElement(0))
            .chain((0..size - 1).map(|i| FieldElement(self.exp[(i * c) as usize])))
            .collect();
        v.sort_unstable();
        Ok(v)
    }

    /// x^{q^k}.
    pub fn frobenius(&self, x: FieldElement, k: u32) -> FieldElement {
        self.pow(x, (self.q() as u128).pow(k % self.n.max(1)))
    }

    /// x, x^q, x^{q^2}, ... until it repeats.
    pub fn frobenius_orbit(&self, x: FieldElement) -> Vec<FieldElement> {
        let mut out = vec![x];
        let mut y = self.frobenius(x, 1);
        while y != x {
            out.push(y);
            y = self.frobenius(y, 1);
        }
        out
    }

    /// Smallest d with x in F_{q^d}.
    pub fn degree_of(&self, x: FieldElement) -> u32 {
        self.frobenius_orbit(x).len() as u32
    }

    fn trace_direct(&self, x: FieldElement, over: u32, to: u32) -> FieldElement {
        let step = (self.p() as u128).pow(to);
        let mut acc = FieldElement(0);
        let mut y = x;
        for _ in 0..over / to {
            acc = self.add(acc, y);
            y = self.pow(y, step);
        }
        acc
    }

    /// Tr from F_{p^over} to F_{p^to}: sum of x^{p^{to*i}} for i < over/to.
    /// `over` and `to` are absolute degrees; x must lie in F_{p^over}.
    pub fn trace(&self, x: FieldElement, over: u32, to: u32) -> Result<FieldElement> {
        self.check_abs_subfield(over)?;
        if to == 0 || over % to != 0 {
            return Err(Error::NotSubfield { sub: to, ext: over });
        }
        if !self.in_abs_subfield(x, over)? {
            return Err(Error::NotInSubfield(over));
        }
        Ok(self.trace_direct(x, over, to))
    }

    /// N from F_{p^over} to F_{p^to}: x^{(p^over-1)/(p^to-1)}.
    pub fn norm(&self, x: FieldElement, over: u32, to: u32) -> Result<FieldElement> {
        self.check_abs_subfield(over)?;
        if to == 0 || over % to != 0 {
            return Err(Error::NotSubfield { sub: to, ext: over });
        }
        if !self.in_abs_subfield(x, over)? {
            return Err(Error::NotInSubfield(over));
        }
        if x.0 == 0 {
            return Ok(x);
        }
        let p = self.p() as u128;
        Ok(self.pow(x, (p.pow(over) - 1) / (p.pow(to) - 1)))
    }

    /// Tr_{F_{p^k}/F_p}(g^l) as an integer in {0..p-1}, for g^l in F_{p^k}.
    /// Uses the absolute trace table when p does not divide m/k.
    pub fn trace_to_prime_by_log(&self, l: u64, k: u32) -> u64 {
        let l = l % (self.order - 1);
        let p = self.p();
        match self.tr_scale.get(k as usize).copied().flatten() {
            Some(s) => self.tr_log[l as usize] as u64 * s % p,
            None => self.trace_direct(FieldElement(self.exp[l as usize]), k, 1).0 as u64,
        }
    }

    /// Tr_{F_{p^k}/F_p}(x) for x in F_{p^k}.
    pub fn trace_to_prime(&self, x: FieldElement, k: u32) -> u64 {
        match self.log(x) {
            None => 0,
            Some(l) => self.trace_to_prime_by_log(l, k),
        }
    }

    /// Quadratic character: 1, -1, or 0 at zero.
    pub fn quadratic_char(&self, x: FieldElement) -> i32 {
        match self.log(x) {
            None => 0,
            Some(l) if l % 2 == 0 => 1,
            Some(_) => -1,
        }
    }

    /// Quadratic character of the subfield F_{q^d} at x in that subfield.
    pub fn quadratic_char_in(&self, x: FieldElement, d: u32) -> Result<i32> {
        let cof = self.abs_cofactor(d * self.params.e())?;
        match self.log(x) {
            None => Ok(0),
            Some(l) if l % cof != 0 => Err(Error::NotInSubfield(d * self.params.e())),
            Some(l) => Ok(if (l / cof) % 2 == 0 { 1 } else { -1 }),
        }
    }

    /// Embeds an element of a smaller field of the same tower. The image of
    /// the source generator is fixed by mapping g_small to g^{(N-1)/(n_small-1)};
    /// this is a field embedding because both are primitive and the image
    /// satisfies the source modulus, which is checked.
    pub fn embed_from(&self, small: &ExtField, x: FieldElement) -> Result<FieldElement> {
        if small.params != self.params || self.n % small.n != 0 {
            return Err(Error::NotSubfield { sub: small.m, ext: self.m });
        }
        let image_x = self.image_of_x(small)?;
        // Horner evaluation of the coordinates at image_x
        let coords = small.coords(x);
        let mut acc = self.zero();
        for &c in coords.iter().rev() {
            acc = self.add(self.mul(acc, image_x), self.from_int(c as i64));
        }
        Ok(acc)
    }

    /// A root in this field of the modulus of `small`: the image of x.
    fn image_of_x(&self, small: &ExtField) -> Result<FieldElement> {
        let k = small.m;
        let cands = self.subfield_elements(small.n)?;
        for r in cands {
            let mut acc = self.zero();
            for &c in small.modulus.iter().rev() {
                acc = self.add(self.mul(acc, r), self.from_int(c as i64));
            }
            if acc.is_zero() && self.degree_of(r) * self.params.e() == k {
                return Ok(r);
            }
        }
        Err(Error::NotSubfield { sub: k, ext: self.m })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64, n: u32) -> ExtField {
        ExtField::new(FieldParams::new(q).unwrap(), n).unwrap()
    }

    #[test]
    fn params_reject_small_or_composite() {
        assert!(matches!(FieldParams::new(5), Err(Error::SmallCharacteristic { .. })));
        assert!(matches!(FieldParams::new(12), Err(Error::NotPrimePower(12))));
        assert!(FieldParams::relaxed(5).unwrap().out_of_hypothesis());
        let p = FieldParams::new(49).unwrap();
        assert_eq!((p.p(), p.e()), (7, 2));
    }

    #[test]
    fn prime_field_has_q_elements() {
        assert_eq!(f(7, 1).elements().count(), 7);
    }

    #[test]
    fn frobenius_fixes_everything_in_f49() {
        let k = f(7, 2);
        for x in k.elements() {
            assert_eq!(k.pow(x, 49), x);
        }
    }

    #[test]
    fn f49_generator_has_order_48() {
        let k = f(7, 2);
        let g = k.generator();
        let ord = (1..=48u128).find(|&e| k.pow(g, e) == k.one()).unwrap();
        assert_eq!(ord, 48);
    }

    #[test]
    fn f49_modulus_is_x2_plus_1() {
        assert_eq!(f(7, 2).modulus(), &[1, 0, 1]);
    }

    #[test]
    fn reducible_modulus_rejected() {
        let params = FieldParams::new(7).unwrap();
        // x^2 - 1 = (x-1)(x+1)
        let r = ExtField::with_modulus(params, 2, vec![6, 0, 1]);
        assert!(matches!(r, Err(Error::ReducibleModulus { .. })));
    }

    #[test]
    fn trace_of_prime_field_element_doubles() {
        let k = f(7, 2);
        for c in 0..7 {
            let x = k.from_int(c);
            assert_eq!(k.trace(x, 2, 1).unwrap(), k.from_int(2 * c));
            assert_eq!(k.trace_to_prime(x, 2), (2 * c as u64) % 7);
        }
    }

    #[test]
    fn norm_of_prime_field_element_squares() {
        let k = f(7, 2);
        for c in 1..7 {
            let x = k.from_int(c);
            assert_eq!(k.norm(x, 2, 1).unwrap(), k.from_int(c * c));
        }
    }

    #[test]
    fn norm_is_onto_f7() {
        let k = f(7, 2);
        let mut img: Vec<u64> = k
            .elements()
            .skip(1)
            .map(|x| k.lift_prime(k.norm(x, 2, 1).unwrap()).unwrap())
            .collect();
        img.sort();
        img.dedup();
        assert_eq!(img, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn trace_rejects_non_divisor() {
        let k = f(7, 6);
        let x = k.generator();
        assert!(k.trace(x, 6, 4).is_err());
        assert!(k.trace(x, 4, 1).is_err());
    }

    #[test]
    fn f49_orbit_partition() {
        let k = f(7, 2);
        let mut seen = std::collections::HashSet::new();
        let (mut ones, mut twos) = (0, 0);
        for x in k.elements().skip(1) {
            if seen.contains(&x) {
                continue;
            }
            let o = k.frobenius_orbit(x);
            match o.len() {
                1 => ones += 1,
                2 => twos += 1,
                _ => panic!(),
            }
            seen.extend(o);
        }
        assert_eq!((ones, twos), (6, 21));
    }

    #[test]
    fn trace_table_matches_direct() {
        let k = f(7, 3);
        for x in k.elements() {
            let t = k.trace(x, 3, 1).unwrap();
            assert_eq!(k.lift_prime(t).unwrap(), k.trace_to_prime(x, 3));
        }
        let k = f(7, 4);
        for x in k.subfield_elements(2).unwrap() {
            let t = k.trace(x, 2, 1).unwrap();
            assert_eq!(k.lift_prime(t).unwrap(), k.trace_to_prime(x, 2));
        }
    }

    #[test]
    fn embedding_commutes_with_arithmetic() {
        let small = f(7, 2);
        let big = f(7, 4);
        for x in small.elements().step_by(5) {
            for y in small.elements().step_by(7) {
                let (ex, ey) = (big.embed_from(&small, x).unwrap(), big.embed_from(&small, y).unwrap());
                assert_eq!(big.embed_from(&small, small.mul(x, y)).unwrap(), big.mul(ex, ey));
                assert_eq!(big.embed_from(&small, small.add(x, y)).unwrap(), big.add(ex, ey));
            }
            let ex = big.embed_from(&small, x).unwrap();
            assert_eq!(big.embed_from(&small, small.frobenius(x, 1)).unwrap(), big.frobenius(ex, 1));
        }
    }

    #[test]
    fn prime_power_and_factors() {
        assert_eq!(prime_power(343), Some((7, 3)));
        assert_eq!(prime_factors(48), vec![2, 3]);
        assert_eq!(lcm(4, 6), 12);
    }
}
