//! Multiprecision complex numbers on top of MPFR floats.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use std::ops::{Add, Mul, Neg, Sub};

use crate::special::C64;

pub const DEFAULT_PREC: u32 = 256;

/// Working precision in bits; `WEILLIFT_PREC` overrides the default.
pub fn working_prec() -> u32 {
    std::env::var("WEILLIFT_PREC")
        .ok()
        .and_then(|v| v.parse::<u32>().ok())
        .filter(|&p| p >= 64)
        .unwrap_or(DEFAULT_PREC)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn fl(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

#[derive(Clone, Debug)]
pub struct Mpc {
    pub re: Float,
    pub im: Float,
}

impl Mpc {
    pub fn new(re: Float, im: Float) -> Self {
        Mpc { re, im }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Mpc::new(fl(prec, re), fl(prec, im))
    }

    pub fn zero(prec: u32) -> Self {
        Mpc::from_f64(prec, 0.0, 0.0)
    }

    pub fn one(prec: u32) -> Self {
        Mpc::from_f64(prec, 1.0, 0.0)
    }

    pub fn real(x: Float) -> Self {
        let p = x.prec();
        Mpc::new(x, Float::new(p))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn conj(&self) -> Self {
        Mpc::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> Float {
        Float::with_val(self.prec(), self.re.square_ref()) + Float::with_val(self.prec(), self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn scale(&self, k: &Float) -> Self {
        Mpc::new(Float::with_val(self.prec(), &self.re * k), Float::with_val(self.prec(), &self.im * k))
    }

    pub fn mul_i(&self) -> Self {
        Mpc::new(-self.im.clone(), self.re.clone())
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        Mpc::new(Float::with_val(self.prec(), &self.re / &n), -Float::with_val(self.prec(), &self.im / &n))
    }

    pub fn div(&self, other: &Mpc) -> Self {
        self * &other.recip()
    }

    pub fn exp(&self) -> Self {
        let m = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(self.prec()));
        Mpc::new(Float::with_val(self.prec(), &m * &c), m * s)
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        Mpc::new(self.abs().ln(), self.arg())
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let r = self.abs();
        let p = self.prec();
        if r.is_zero() {
            return Mpc::zero(p);
        }
        let a = (Float::with_val(p, &r + &self.re) / 2u32).sqrt();
        let b = (Float::with_val(p, &r - &self.re) / 2u32).sqrt();
        if self.im.is_sign_negative() {
            Mpc::new(a, -b)
        } else {
            Mpc::new(a, b)
        }
    }

    pub fn powi(&self, e: i64) -> Self {
        let p = self.prec();
        let mut base = if e < 0 { self.recip() } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Mpc::one(p);
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// exp(2 pi i x) for real x.
    pub fn e2pi(x: &Float) -> Self {
        let p = x.prec();
        let t = Float::with_val(p, x * pi(p)) * 2u32;
        let (s, c) = t.sin_cos(Float::new(p));
        Mpc::new(c, s)
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Mpc::new(Float::with_val(prec, &self.re), Float::with_val(prec, &self.im))
    }

    /// log2 of the modulus, for magnitude bookkeeping.
    pub fn log2_abs(&self) -> f64 {
        let a = self.abs();
        if a.is_zero() {
            f64::NEG_INFINITY
        } else {
            a.log2().to_f64()
        }
    }
}

impl<'a> Add<&'a Mpc> for &'a Mpc {
    type Output = Mpc;
    fn add(self, o: &Mpc) -> Mpc {
        let p = self.prec();
        Mpc::new(Float::with_val(p, &self.re + &o.re), Float::with_val(p, &self.im + &o.im))
    }
}

impl<'a> Sub<&'a Mpc> for &'a Mpc {
    type Output = Mpc;
    fn sub(self, o: &Mpc) -> Mpc {
        let p = self.prec();
        Mpc::new(Float::with_val(p, &self.re - &o.re), Float::with_val(p, &self.im - &o.im))
    }
}

impl<'a> Mul<&'a Mpc> for &'a Mpc {
    type Output = Mpc;
    fn mul(self, o: &Mpc) -> Mpc {
        let p = self.prec();
        let rr = Float::with_val(p, &self.re * &o.re);
        let ii = Float::with_val(p, &self.im * &o.im);
        let ri = Float::with_val(p, &self.re * &o.im);
        let ir = Float::with_val(p, &self.im * &o.re);
        Mpc::new(rr - ii, ri + ir)
    }
}

impl Neg for Mpc {
    type Output = Mpc;
    fn neg(self) -> Mpc {
        Mpc::new(-self.re, -self.im)
    }
}

/// Decimal string with `digits` significant digits.
pub fn to_decimal(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

/// Float power x^y for real x > 0.
pub fn powf(x: &Float, y: &Float) -> Float {
    Float::with_val(x.prec(), x.pow(y))
}
