//! Midpoint-radius balls over MPFR floats.
//!
//! Radii are kept at 64 bits and always rounded upward, so a ball is a
//! guaranteed enclosure as long as every primitive below adds its own
//! rounding term. The bounds are deliberately loose (a few ulps per op);
//! what matters is that they are never optimistic.

use rug::float::{Constant, Round};
use rug::ops::AssignRound;
use rug::{Float, Integer};
use std::cmp::Ordering;

const RAD_PREC: u32 = 64;

fn rad_zero() -> Float {
    Float::new(RAD_PREC)
}

fn up<T>(src: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    let mut r = Float::new(RAD_PREC);
    r.assign_round(src, Round::Up);
    r
}

fn up_abs(x: &Float) -> Float {
    up(&*x.as_abs())
}

/// |x| * 2^{shift - prec}, rounded up: a few ulps of x at precision prec.
fn ulps(x: &Float, prec: u32, shift: i32) -> Float {
    let mut r = up_abs(x);
    r <<= shift - prec as i32;
    r
}

/// A real interval [mid - rad, mid + rad].
#[derive(Clone, Debug)]
pub struct RealBall {
    pub mid: Float,
    pub rad: Float,
}

impl RealBall {
    pub fn exact(x: Float) -> Self {
        RealBall { mid: x, rad: rad_zero() }
    }

    pub fn from_int(n: &Integer, prec: u32) -> Self {
        let mid = Float::with_val(prec, n);
        let rad = ulps(&mid, prec, 1);
        RealBall { mid, rad }
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        RealBall::exact(Float::with_val(prec, x))
    }

    pub fn pi(prec: u32) -> Self {
        let mid = Float::with_val(prec, Constant::Pi);
        let rad = ulps(&mid, prec, 1);
        RealBall { mid, rad }
    }

    pub fn prec(&self) -> u32 {
        self.mid.prec()
    }

    pub fn add(&self, o: &RealBall) -> RealBall {
        let prec = self.prec();
        let mid = Float::with_val(prec, &self.mid + &o.mid);
        let rad = up(&self.rad + &o.rad) + ulps(&mid, prec, 1);
        RealBall { mid, rad: up(&rad) }
    }

    pub fn sub(&self, o: &RealBall) -> RealBall {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RealBall {
        RealBall {
            mid: Float::with_val(self.prec(), -&self.mid),
            rad: self.rad.clone(),
        }
    }

    /// Upper bound of |x| over the ball.
    pub fn mag(&self) -> Float {
        up(up_abs(&self.mid) + &self.rad)
    }

    /// Lower bound of |x| over the ball (0 if the ball contains 0).
    pub fn mig(&self) -> Float {
        let mut r = Float::new(RAD_PREC);
        r.assign_round(&*self.mid.as_abs() - &self.rad, Round::Down);
        if r < 0 {
            rad_zero()
        } else {
            r
        }
    }

    pub fn mul(&self, o: &RealBall) -> RealBall {
        let prec = self.prec();
        let mid = Float::with_val(prec, &self.mid * &o.mid);
        let r1 = up(&up_abs(&self.mid) * &o.rad);
        let r2 = up(&up_abs(&o.mid) * &self.rad);
        let r3 = up(&self.rad * &o.rad);
        let rad = up(up(&r1 + &r2) + up(&r3 + &ulps(&mid, prec, 1)));
        RealBall { mid, rad }
    }

    pub fn div(&self, o: &RealBall) -> Option<RealBall> {
        let prec = self.prec();
        let den = o.mig();
        if den == 0 {
            return None;
        }
        let mid = Float::with_val(prec, &self.mid / &o.mid);
        // |a/b - a'/b'| <= (rad_a + |a/b| rad_b) / (|b| - rad_b)
        let num = up(&self.rad + &up(&up_abs(&mid) * &o.rad));
        let rad = up(up(&num / &den) + &ulps(&mid, prec, 2));
        Some(RealBall { mid, rad })
    }

    pub fn sqrt(&self) -> Option<RealBall> {
        let prec = self.prec();
        let lo = self.mid.clone() - &self.rad;
        if lo <= 0 {
            return None;
        }
        let mid = Float::with_val(prec, self.mid.sqrt_ref());
        // |sqrt(x) - sqrt(y)| <= |x - y| / (2 sqrt(lo))
        let mut den = Float::new(RAD_PREC);
        den.assign_round(lo.sqrt_ref(), Round::Down);
        den *= 2;
        let rad = up(up(&self.rad / &den) + &ulps(&mid, prec, 1));
        Some(RealBall { mid, rad })
    }

    /// arccos on a ball strictly inside (-1, 1).
    pub fn acos(&self) -> Option<RealBall> {
        let prec = self.prec();
        let m = self.mag();
        if m >= 1 {
            return None;
        }
        let mid = Float::with_val(prec, self.mid.acos_ref());
        // derivative bound 1/sqrt(1 - m^2)
        let mut one_minus = Float::new(RAD_PREC);
        one_minus.assign_round(1 - Float::with_val(RAD_PREC, &m * &m), Round::Down);
        if one_minus <= 0 {
            return None;
        }
        let mut s = Float::new(RAD_PREC);
        s.assign_round(one_minus.sqrt_ref(), Round::Down);
        let rad = up(up(&self.rad / &s) + &ulps(&Float::with_val(prec, 4), prec, 1));
        Some(RealBall { mid, rad })
    }

    /// sin and cos are 1-Lipschitz.
    pub fn sin(&self) -> RealBall {
        let prec = self.prec();
        let mid = Float::with_val(prec, self.mid.sin_ref());
        let rad = up(&self.rad + &ulps(&Float::with_val(prec, 1), prec, 1));
        RealBall { mid, rad }
    }

    pub fn cos(&self) -> RealBall {
        let prec = self.prec();
        let mid = Float::with_val(prec, self.mid.cos_ref());
        let rad = up(&self.rad + &ulps(&Float::with_val(prec, 1), prec, 1));
        RealBall { mid, rad }
    }

    /// Natural log of a positive ball.
    pub fn ln(&self) -> Option<RealBall> {
        let prec = self.prec();
        let lo = self.mig();
        if lo == 0 || self.mid < 0 {
            return None;
        }
        let mid = Float::with_val(prec, self.mid.ln_ref());
        let rad = up(up(&self.rad / &lo) + &ulps(&mid, prec, 1));
        // ln near 1 is tiny; keep an absolute floor as well
        let rad = up(rad + ulps(&Float::with_val(prec, 1), prec, 1));
        Some(RealBall { mid, rad })
    }

    pub fn abs(&self) -> RealBall {
        RealBall {
            mid: Float::with_val(self.prec(), &*self.mid.as_abs()),
            rad: self.rad.clone(),
        }
    }

    /// Certainly positive.
    pub fn is_positive(&self) -> bool {
        self.mid > 0 && self.mig() > 0
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn rad_f64(&self) -> f64 {
        self.rad.to_f64_round(Round::Up)
    }
}

/// A disc in C: |z - (re + i im)| <= rad.
#[derive(Clone, Debug)]
pub struct ComplexBall {
    pub re: Float,
    pub im: Float,
    pub rad: Float,
}

impl ComplexBall {
    pub fn zero(prec: u32) -> Self {
        ComplexBall {
            re: Float::new(prec),
            im: Float::new(prec),
            rad: rad_zero(),
        }
    }

    pub fn from_real(x: &RealBall) -> Self {
        ComplexBall {
            re: x.mid.clone(),
            im: Float::new(x.prec()),
            rad: x.rad.clone(),
        }
    }

    pub fn from_parts(re: &RealBall, im: &RealBall) -> Self {
        ComplexBall {
            re: re.mid.clone(),
            im: im.mid.clone(),
            rad: up(&re.rad + &im.rad),
        }
    }

    /// e^{2 pi i k / n}.
    pub fn root_of_unity(k: i64, n: u64, prec: u32) -> Self {
        let work = prec + 16;
        let mut angle = Float::with_val(work, Constant::Pi);
        angle *= 2 * k.rem_euclid(n as i64);
        angle /= n;
        let re = Float::with_val(prec, angle.cos_ref());
        let im = Float::with_val(prec, angle.sin_ref());
        let rad = ulps(&Float::with_val(prec, 1), prec, 2);
        ComplexBall { re, im, rad }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    fn mid_mag(&self) -> Float {
        up(up_abs(&self.re) + &up_abs(&self.im))
    }

    pub fn add(&self, o: &ComplexBall) -> ComplexBall {
        let prec = self.prec();
        let re = Float::with_val(prec, &self.re + &o.re);
        let im = Float::with_val(prec, &self.im + &o.im);
        let round = ulps(&up(up_abs(&re) + &up_abs(&im)), prec, 1);
        let rad = up(up(&self.rad + &o.rad) + &round);
        ComplexBall { re, im, rad }
    }

    pub fn neg(&self) -> ComplexBall {
        let prec = self.prec();
        ComplexBall {
            re: Float::with_val(prec, -&self.re),
            im: Float::with_val(prec, -&self.im),
            rad: self.rad.clone(),
        }
    }

    pub fn sub(&self, o: &ComplexBall) -> ComplexBall {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &ComplexBall) -> ComplexBall {
        let prec = self.prec();
        let w = prec + 8;
        let re = Float::with_val(w, &self.re * &o.re) - Float::with_val(w, &self.im * &o.im);
        let im = Float::with_val(w, &self.re * &o.im) + Float::with_val(w, &self.im * &o.re);
        let re = Float::with_val(prec, re);
        let im = Float::with_val(prec, im);
        let (ma, mb) = (self.mid_mag(), o.mid_mag());
        let r = up(up(&ma * &o.rad) + up(&mb * &self.rad));
        let r = up(r + up(&self.rad * &o.rad));
        let round = ulps(&up(&ma * &mb), prec, 2);
        ComplexBall { re, im, rad: up(r + round) }
    }

    pub fn scale(&self, k: &Integer) -> ComplexBall {
        let prec = self.prec();
        let kb = RealBall::from_int(k, prec);
        self.mul(&ComplexBall::from_real(&kb))
    }

    pub fn conj(&self) -> ComplexBall {
        ComplexBall {
            re: self.re.clone(),
            im: Float::with_val(self.prec(), -&self.im),
            rad: self.rad.clone(),
        }
    }

    pub fn pow(&self, mut e: u32) -> ComplexBall {
        let prec = self.prec();
        let mut r = ComplexBall::from_real(&RealBall::exact(Float::with_val(prec, 1)));
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        r
    }

    pub fn real(&self) -> RealBall {
        RealBall {
            mid: self.re.clone(),
            rad: self.rad.clone(),
        }
    }

    pub fn imag(&self) -> RealBall {
        RealBall {
            mid: self.im.clone(),
            rad: self.rad.clone(),
        }
    }

    /// |z|.
    pub fn abs(&self) -> RealBall {
        let prec = self.prec();
        let mid = Float::with_val(prec, self.re.hypot_ref(&self.im));
        let rad = up(&self.rad + &ulps(&mid, prec, 1));
        RealBall { mid, rad }
    }

    /// Argument in [0, 2 pi). Fails if the disc touches the origin.
    pub fn arg(&self) -> Option<RealBall> {
        let prec = self.prec();
        let m = self.abs();
        let lo = m.mig();
        if lo == 0 {
            return None;
        }
        let mut mid = Float::with_val(prec + 8, self.im.atan2_ref(&self.re));
        if mid < 0 {
            mid += Float::with_val(prec + 8, Constant::Pi) * 2u32;
        }
        let mid = Float::with_val(prec, mid);
        // a disc of radius r at distance >= lo subtends angle <= asin(r/lo) <= 2r/lo
        let mut rad = up(&self.rad / &lo);
        rad *= 2;
        let rad = up(rad + ulps(&Float::with_val(prec, 8), prec, 1));
        Some(RealBall { mid, rad })
    }
}
