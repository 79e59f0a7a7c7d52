use rug::integer::Order;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

/// Polynomial with unbounded integer coefficients, constant term first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<Integer>,
}

/// Below this length on the short side, schoolbook beats packing.
const KRONECKER_CUTOFF: usize = 24;

impl IntPoly {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| *c == 0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Integer::new());
        }
        IntPoly { coeffs }
    }

    pub fn one() -> Self {
        IntPoly::new(vec![Integer::from(1)])
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0
    }

    pub fn mul(&self, o: &IntPoly) -> IntPoly {
        if self.coeffs.len().min(o.coeffs.len()) <= KRONECKER_CUTOFF {
            self.mul_schoolbook(o)
        } else {
            IntPoly::new(mul_kronecker(&self.coeffs, &o.coeffs))
        }
    }

    pub fn mul_schoolbook(&self, o: &IntPoly) -> IntPoly {
        let mut r = vec![Integer::new(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                r[i + j] += a * b;
            }
        }
        IntPoly::new(r)
    }

    /// Exact value at a rational point.
    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Exact value at 1/q, computed as (sum a_i q^{d-i}) / q^d.
    pub fn eval_inverse(&self, q: u64) -> Rational {
        let q = Integer::from(q);
        let mut num = Integer::new();
        for c in &self.coeffs {
            num *= &q;
            num += c;
        }
        let d = self.degree() as u32;
        Rational::from((num, rug::ops::Pow::pow(q, d)))
    }

    /// Balanced-tree product; deterministic for a fixed input order.
    pub fn product(mut polys: Vec<IntPoly>) -> IntPoly {
        if polys.is_empty() {
            return IntPoly::one();
        }
        while polys.len() > 1 {
            let mut next = Vec::with_capacity((polys.len() + 1) / 2);
            let mut it = polys.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a.mul(&b)),
                    None => next.push(a),
                }
            }
            polys = next;
        }
        polys.pop().unwrap()
    }

    pub fn to_json(&self, q: u64, a: u32) -> LPolynomialJson {
        LPolynomialJson {
            q,
            a,
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn from_json(j: &LPolynomialJson) -> Option<IntPoly> {
        let coeffs = j
            .coeffs
            .iter()
            .map(|s| s.parse::<Integer>().ok())
            .collect::<Option<Vec<_>>>()?;
        Some(IntPoly::new(coeffs))
    }
}

/// `{"q":..,"a":..,"coeffs":[decimal strings]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LPolynomialJson {
    pub q: u64,
    pub a: u32,
    pub coeffs: Vec<String>,
}

/// Kronecker substitution at 2^(64w) with signed slot recovery.
pub fn mul_kronecker(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    let bits_a = a.iter().map(|c| c.significant_bits()).max().unwrap_or(0);
    let bits_b = b.iter().map(|c| c.significant_bits()).max().unwrap_or(0);
    let short = a.len().min(b.len()) as u64;
    let log_short = 64 - short.leading_zeros();
    let need = bits_a + bits_b + log_short + 2;
    let w = ((need + 63) / 64) as usize;
    let pack = |v: &[Integer]| -> Integer {
        let mut pos = vec![0u64; v.len() * w];
        let mut neg = vec![0u64; v.len() * w];
        for (i, c) in v.iter().enumerate() {
            let digits = c.to_digits::<u64>(Order::Lsf);
            let dst = if *c < 0 { &mut neg } else { &mut pos };
            dst[i * w..i * w + digits.len()].copy_from_slice(&digits);
        }
        Integer::from_digits(&pos, Order::Lsf) - Integer::from_digits(&neg, Order::Lsf)
    };
    let mut prod = pack(a) * pack(b);
    let n_out = a.len() + b.len() - 1;
    let total_bits = (64 * w * n_out) as u32;
    if prod < 0 {
        prod += Integer::from(1) << total_bits;
    }
    let mut digits = prod.to_digits::<u64>(Order::Lsf);
    digits.resize(n_out * w, 0);
    let half = Integer::from(1) << (64 * w as u32 - 1);
    let full = Integer::from(1) << (64 * w as u32);
    let mut carry = 0u32;
    let mut out = Vec::with_capacity(n_out);
    for i in 0..n_out {
        let mut c = Integer::from_digits(&digits[i * w..(i + 1) * w], Order::Lsf);
        c += carry;
        if c >= half {
            c -= &full;
            carry = 1;
        } else {
            carry = 0;
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> IntPoly {
        IntPoly::new(v.iter().map(|&c| Integer::from(c)).collect())
    }

    #[test]
    fn kronecker_matches_schoolbook_signed() {
        let a: Vec<i64> = (0..40).map(|i| (i * 7919 % 101) - 50).collect();
        let b: Vec<i64> = (0..33).map(|i| -((i * 104729 % 211) as i64) + 100).collect();
        let (pa, pb) = (p(&a), p(&b));
        let k = IntPoly::new(mul_kronecker(pa.coeffs(), pb.coeffs()));
        assert_eq!(k, pa.mul_schoolbook(&pb));
    }

    #[test]
    fn kronecker_huge_coefficients() {
        let big = Integer::from(1) << 300u32;
        let a = vec![big.clone(), Integer::from(-1), -big.clone(), Integer::from(3)];
        let b = vec![Integer::from(-5), big.clone(), Integer::from(7)];
        let k = IntPoly::new(mul_kronecker(&a, &b));
        assert_eq!(k, IntPoly::new(a).mul_schoolbook(&IntPoly::new(b)));
    }

    #[test]
    fn eval_inverse_q() {
        // 1 - 2T + 7T^2 at 1/7 = 1 - 2/7 + 1/7 = 6/7
        assert_eq!(p(&[1, -2, 7]).eval_inverse(7), Rational::from((6, 7)));
        assert_eq!(p(&[1, -2, 7]).eval(&Rational::from((1, 7))), Rational::from((6, 7)));
    }

    #[test]
    fn product_tree_order_irrelevant() {
        let polys: Vec<IntPoly> = (1..30).map(|i| p(&[1, -i, i * i])).collect();
        let mut rev = polys.clone();
        rev.reverse();
        assert_eq!(IntPoly::product(polys), IntPoly::product(rev));
    }
}
