//! Aberth-Ehrlich iteration over MPFR floats.

use crate::error::{Error, Result};
use rug::float::Constant;
use rug::{Float, Integer};

#[derive(Clone, Debug)]
struct Cx {
    re: Float,
    im: Float,
}

impl Cx {
    fn new(prec: u32) -> Cx {
        Cx { re: Float::new(prec), im: Float::new(prec) }
    }
    fn from_real(x: Float) -> Cx {
        let prec = x.prec();
        Cx { re: x, im: Float::new(prec) }
    }
    fn add(&self, o: &Cx) -> Cx {
        let p = self.re.prec();
        Cx { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }
    fn sub(&self, o: &Cx) -> Cx {
        let p = self.re.prec();
        Cx { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }
    fn mul(&self, o: &Cx) -> Cx {
        let p = self.re.prec();
        let re = Float::with_val(p, &self.re * &o.re) - Float::with_val(p, &self.im * &o.im);
        let im = Float::with_val(p, &self.re * &o.im) + Float::with_val(p, &self.im * &o.re);
        Cx { re, im }
    }
    fn norm2(&self) -> Float {
        let p = self.re.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }
    fn abs(&self) -> Float {
        Float::with_val(self.re.prec(), self.re.hypot_ref(&self.im))
    }
    fn div(&self, o: &Cx) -> Option<Cx> {
        let d = o.norm2();
        if d.is_zero() {
            return None;
        }
        let p = self.re.prec();
        let re = Float::with_val(p, &self.re * &o.re) + Float::with_val(p, &self.im * &o.im);
        let im = Float::with_val(p, &self.im * &o.re) - Float::with_val(p, &self.re * &o.im);
        Some(Cx { re: re / &d, im: im / &d })
    }
    fn recip(&self) -> Option<Cx> {
        let one = Cx::from_real(Float::with_val(self.re.prec(), 1));
        one.div(self)
    }
}

/// p(z) and p'(z), coefficients constant term first.
fn horner(c: &[Float], z: &Cx) -> (Cx, Cx) {
    let prec = z.re.prec();
    let mut p = Cx::new(prec);
    let mut dp = Cx::new(prec);
    for a in c.iter().rev() {
        dp = dp.mul(z).add(&p);
        p = p.mul(z);
        p.re += a;
    }
    (p, dp)
}

/// Bound on the rounding error of `horner` at z.
fn eval_error(abs_c: &[Float], z: &Cx) -> Float {
    let prec = z.re.prec();
    let r = z.abs();
    let mut acc = Float::new(prec);
    for a in abs_c.iter().rev() {
        acc *= &r;
        acc += a;
    }
    let shift = 8 + (64 - (abs_c.len() as u64).leading_zeros()) as i32 - prec as i32;
    acc << shift
}

/// Outcome of a root computation.
#[derive(Clone, Debug)]
pub struct RootReport {
    /// max over roots of ||z| - 1|
    pub max_unit_deviation: f64,
    /// max over roots of deg * |p/p'|, a radius around each estimate known
    /// to contain a root
    pub max_inclusion_radius: f64,
    pub prec: u32,
    pub iterations: u32,
}

/// Roots of sum c_i u^i / s^i for integer c, checked against the unit circle.
/// Used with s = q to put the zeros of an L-polynomial on |u| = 1.
pub fn unit_circle_roots(coeffs: &[Integer], s: u64, start_prec: u32, max_prec: u32) -> Result<RootReport> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(RootReport { max_unit_deviation: 0.0, max_inclusion_radius: 0.0, prec: start_prec, iterations: 0 });
    }
    // scale so the coefficients of the unit-circle polynomial are exact-ish
    let sd = Integer::from(s);
    let mut pow = Integer::from(1);
    let mut scaled = Vec::with_capacity(coeffs.len());
    let mut big = 0u32;
    // b_i = c_i s^{deg-i}: same roots in u after dividing by s^deg
    let mut spow = vec![Integer::new(); deg + 1];
    for i in (0..=deg).rev() {
        spow[i] = pow.clone();
        pow *= &sd;
    }
    for (i, c) in coeffs.iter().enumerate() {
        let b = Integer::from(c * &spow[i]);
        big = big.max(b.significant_bits());
        scaled.push(b);
    }
    // the unit-circle polynomial has coefficients up to about 2^deg
    let mut prec = start_prec.max(deg as u32 + 192);
    loop {
        match aberth(&scaled, big, deg as u32, prec) {
            Ok(r) => return Ok(r),
            Err(_) if prec < max_prec => prec = (prec * 2).min(max_prec),
            Err(e) => return Err(e),
        }
    }
}

fn aberth(ints: &[Integer], big: u32, range: u32, prec: u32) -> Result<RootReport> {
    let deg = ints.len() - 1;
    // normalise by 2^big so MPFR exponents stay tame
    let c: Vec<Float> = ints
        .iter()
        .map(|b| Float::with_val(prec, b) >> big)
        .collect();
    let abs_c: Vec<Float> = c.iter().map(|x| Float::with_val(prec, x.abs_ref())).collect();
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    let mut z: Vec<Cx> = (0..deg)
        .map(|k| {
            let ang = Float::with_val(prec, &two_pi * (k as f64 + 0.25)) / deg as f64 + 0.4f64;
            let r = Float::with_val(prec, 1.0 + 0.5 / deg as f64);
            Cx { re: Float::with_val(prec, ang.cos_ref()) * &r, im: Float::with_val(prec, ang.sin_ref()) * &r }
        })
        .collect();
    let target = Float::with_val(prec, 1) >> (prec.saturating_sub(range + 32) / 2).max(60);
    let max_iter = 60 + 4 * deg as u32;
    let mut iterations = 0;
    let mut converged = vec![false; deg];
    while iterations < max_iter {
        iterations += 1;
        let mut moved = false;
        for k in 0..deg {
            if converged[k] {
                continue;
            }
            let (p, dp) = horner(&c, &z[k]);
            // residual at the level of rounding noise: nothing more to gain,
            // which is how clustered or multiple roots terminate
            if p.abs() <= eval_error(&abs_c, &z[k]) {
                converged[k] = true;
                continue;
            }
            let ratio = match p.div(&dp) {
                Some(r) => r,
                None => continue,
            };
            let mut sum = Cx::new(prec);
            for (j, zj) in z.iter().enumerate() {
                if j != k {
                    if let Some(r) = z[k].sub(zj).recip() {
                        sum = sum.add(&r);
                    }
                }
            }
            let one = Cx::from_real(Float::with_val(prec, 1));
            let denom = one.sub(&ratio.mul(&sum));
            let step = match ratio.div(&denom) {
                Some(s) => s,
                None => continue,
            };
            let size = step.abs();
            z[k] = z[k].sub(&step);
            if size < target {
                converged[k] = true;
            } else {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    if converged.iter().any(|c| !c) {
        return Err(Error::Precision { what: "Aberth iteration did not converge".into(), bits: prec });
    }
    let mut dev: f64 = 0.0;
    let mut incl: f64 = 0.0;
    for zk in &z {
        let (p, dp) = horner(&c, zk);
        let r = match p.div(&dp) {
            Some(r) => r.abs().to_f64() * deg as f64,
            None => f64::INFINITY,
        };
        incl = incl.max(r);
        dev = dev.max((zk.abs() - 1u32).abs().to_f64());
    }
    Ok(RootReport { max_unit_deviation: dev, max_inclusion_radius: incl, prec, iterations })
}
