//! Truncated q-expansions with exact rational coefficients.

mod eta;
mod newform;

pub use eta::{
    eta, eta_mp, eta_quotient, hauptmodul_mp, j_mp, j_via_weber_mp, log_eta, reduce_sl2, EtaQuotient,
    HAUPTMODUL_LEVELS,
};
pub use newform::{
    evaluate_series, fricke_eigenvalue, gamma0_coset_reps, gamma0_reduce, trace_down, Evaluable, Evaluation, Newform, NumericSeries,
};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::numtheory::{binomial_rational, divisors, sigma_k};
use crate::special::{c, C64};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// sum_i coeffs[i] q^{(start + i)/den}, known for exponents below (start + len)/den.
#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion {
    /// Twice the weight.
    pub weight2: i64,
    pub level: u64,
    pub den: u64,
    pub start: i64,
    pub coeffs: Vec<BigRational>,
}

impl QExpansion {
    pub fn new(weight2: i64, level: u64, den: u64, start: i64, coeffs: Vec<BigRational>) -> Self {
        QExpansion { weight2, level, den, start, coeffs }
    }

    pub fn from_integers(weight2: i64, level: u64, start: i64, coeffs: &[BigInt]) -> Self {
        QExpansion::new(weight2, level, 1, start, coeffs.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }

    /// Exclusive bound on the exponent numerators with known coefficients.
    pub fn order(&self) -> i64 {
        self.start + self.coeffs.len() as i64
    }

    /// Coefficient of q^{num/den}; zero below `start`, None at or beyond `order`.
    pub fn coeff_num(&self, num: i64) -> Option<BigRational> {
        if num < self.start {
            Some(BigRational::zero())
        } else if num >= self.order() {
            None
        } else {
            Some(self.coeffs[(num - self.start) as usize].clone())
        }
    }

    /// Coefficient of q^n for integer n.
    pub fn coeff(&self, n: i64) -> Option<BigRational> {
        self.coeff_num(n * self.den as i64)
    }

    pub fn coeff_i64(&self, n: i64) -> Option<i64> {
        let c = self.coeff(n)?;
        if c.is_integer() {
            c.to_integer().to_i64()
        } else {
            None
        }
    }

    /// Leading exponent numerator (first nonzero coefficient).
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|i| self.start + i as i64)
    }

    /// Same series with exponent denominator multiplied up to `den`.
    pub fn with_den(&self, den: u64) -> Result<QExpansion> {
        if den % self.den != 0 {
            return invalid(format!("denominator {den} is not a multiple of {}", self.den));
        }
        let f = (den / self.den) as i64;
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() * f as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * f as usize] = c.clone();
        }
        Ok(QExpansion::new(self.weight2, self.level, den, self.start * f, coeffs))
    }

    fn aligned(&self, other: &QExpansion) -> Result<(QExpansion, QExpansion)> {
        let d = self.den.lcm(&other.den);
        Ok((self.with_den(d)?, other.with_den(d)?))
    }

    fn combine(&self, other: &QExpansion, sign: i64) -> Result<QExpansion> {
        let (a, b) = self.aligned(other)?;
        let start = a.start.min(b.start);
        let order = a.order().min(b.order());
        let coeffs = (start..order.max(start))
            .map(|n| {
                let x = a.coeff_num(n).expect("in range");
                let y = b.coeff_num(n).expect("in range");
                if sign > 0 {
                    x + y
                } else {
                    x - y
                }
            })
            .collect();
        Ok(QExpansion::new(a.weight2, a.level.lcm(&b.level), a.den, start, coeffs))
    }

    pub fn add(&self, other: &QExpansion) -> Result<QExpansion> {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &QExpansion) -> Result<QExpansion> {
        self.combine(other, -1)
    }

    pub fn scale(&self, k: &BigRational) -> QExpansion {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = &*c * k);
        out
    }

    pub fn mul(&self, other: &QExpansion) -> Result<QExpansion> {
        let (a, b) = self.aligned(other)?;
        let start = a.start + b.start;
        let order = (a.order() + b.start).min(b.order() + a.start);
        let len = (order - start).max(0) as usize;
        let mut coeffs = vec![BigRational::zero(); len];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !y.is_zero() {
                    coeffs[i + j] += x * y;
                }
            }
        }
        Ok(QExpansion::new(a.weight2 + b.weight2, a.level.lcm(&b.level), a.den, start, coeffs))
    }

    pub fn pow(&self, e: u32) -> Result<QExpansion> {
        let mut acc = QExpansion::new(0, 1, self.den, 0, vec![BigRational::one(); 1]);
        // the constant 1 is known exactly; give it enough room
        acc.coeffs.resize((self.coeffs.len() as i64 * e.max(1) as i64 + 1).max(1) as usize, BigRational::zero());
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        if e == 0 {
            acc.coeffs.truncate(self.coeffs.len());
        }
        Ok(acc)
    }

    /// Multiplicative inverse; the first coefficient must be nonzero.
    pub fn inverse(&self) -> Result<QExpansion> {
        let v = self.valuation().ok_or_else(|| Error::Invalid("cannot invert the zero series".into()))?;
        let shift = (v - self.start) as usize;
        let tail = &self.coeffs[shift..];
        let n = tail.len();
        let c0 = tail[0].clone();
        let mut inv = vec![BigRational::zero(); n];
        inv[0] = BigRational::one() / &c0;
        for k in 1..n {
            let mut s = BigRational::zero();
            for j in 1..=k {
                if !tail[j].is_zero() {
                    s += &tail[j] * &inv[k - j];
                }
            }
            inv[k] = -s / &c0;
        }
        Ok(QExpansion::new(-self.weight2, self.level, self.den, -v, inv))
    }

    pub fn div(&self, other: &QExpansion) -> Result<QExpansion> {
        self.mul(&other.inverse()?)
    }

    /// q d/dq, acting on q^{e} by e.
    pub fn theta(&self) -> QExpansion {
        let d = BigRational::new(BigInt::one(), BigInt::from(self.den));
        let coeffs =
            self.coeffs.iter().enumerate().map(|(i, c)| c * rat(self.start + i as i64) * &d).collect();
        QExpansion::new(self.weight2 + 4, self.level, self.den, self.start, coeffs)
    }

    fn integral_weight(&self) -> Result<i64> {
        if self.weight2 % 2 != 0 {
            return invalid("operator needs integral weight");
        }
        Ok(self.weight2 / 2)
    }

    /// T_m for m coprime to the level: a_n -> sum_{d | (m,n)} d^{w-1} a_{mn/d^2}.
    pub fn hecke_t(&self, m: u64) -> Result<QExpansion> {
        if m == 0 {
            return invalid("m must be positive");
        }
        if self.den != 1 {
            return invalid("Hecke operators need integral exponents");
        }
        if m.gcd(&self.level) != 1 {
            return invalid(format!("m = {m} shares a factor with the level {}", self.level));
        }
        let w = self.integral_weight()?;
        let mi = m as i64;
        let start = if self.start < 0 { self.start * mi } else { 0 };
        let order = Integer::div_ceil(&self.order(), &mi).max(start);
        let mut coeffs = Vec::new();
        for n in start..order {
            let mut s = BigRational::zero();
            let g = if n == 0 { m } else { (n.unsigned_abs()).gcd(&m) };
            for d in divisors(g) {
                let di = d as i64;
                let idx = mi * n / (di * di);
                let a = self
                    .coeff(idx)
                    .ok_or_else(|| Error::Check(format!("coefficient {idx} missing for T_{m}")))?;
                s += a * BigRational::from_integer(BigInt::from(di).pow((w - 1) as u32));
            }
            coeffs.push(s);
        }
        Ok(QExpansion::new(self.weight2, self.level, 1, start, coeffs))
    }

    /// U_m: coefficient of q^e becomes that of q^{m e}.
    pub fn u(&self, m: u64) -> QExpansion {
        let mi = m as i64;
        let start = Integer::div_ceil(&self.start, &mi);
        let order = Integer::div_ceil(&self.order(), &mi).max(start);
        let coeffs = (start..order).map(|i| self.coeff_num(i * mi).expect("in range")).collect();
        QExpansion::new(self.weight2, self.level * m, self.den, start, coeffs)
    }

    /// V_m: f(q) -> f(q^m).
    pub fn v(&self, m: u64) -> QExpansion {
        let mi = m as i64;
        let start = self.start * mi;
        let order = self.order() * mi;
        let coeffs = (start..order)
            .map(|i| if i % mi == 0 { self.coeff_num(i / mi).expect("in range") } else { BigRational::zero() })
            .collect();
        QExpansion::new(self.weight2, self.level * m, self.den, start, coeffs)
    }

    /// Numerical value of the truncated series at tau (no reduction).
    pub fn eval_direct(&self, tau: C64) -> C64 {
        let qd = (C64::new(0.0, 2.0 * std::f64::consts::PI) * tau / self.den as f64).exp();
        let mut s = c(0.0, 0.0);
        let mut p = qd.powi(self.start as i32);
        for a in &self.coeffs {
            if !a.is_zero() {
                s += p * a.to_f64().unwrap_or(f64::NAN);
            }
            p *= qd;
        }
        s
    }
}

/// Bernoulli numbers B_0..=B_n (B_1 = -1/2).
pub fn bernoulli(n: usize) -> Vec<BigRational> {
    let mut b = vec![BigRational::zero(); n + 1];
    b[0] = BigRational::one();
    for m in 1..=n {
        let mut s = BigRational::zero();
        for k in 0..m {
            s += BigRational::from_integer(crate::numtheory::binomial(m as u64 + 1, k as u64)) * &b[k];
        }
        b[m] = -s / rat(m as i64 + 1);
    }
    b
}

/// E_k = 1 - (2k / B_k) sum sigma_{k-1}(n) q^n, terms below q^order.
pub fn eisenstein(k: u32, order: usize) -> Result<QExpansion> {
    if k < 4 || k % 2 != 0 {
        return invalid(format!("Eisenstein series needs even k >= 4, got {k}"));
    }
    let bk = bernoulli(k as usize)[k as usize].clone();
    let f = -rat(2 * k as i64) / bk;
    let mut coeffs = vec![BigRational::one()];
    for n in 1..order {
        coeffs.push(&f * BigRational::from_integer(sigma_k(n as u64, k - 1)));
    }
    coeffs.truncate(order.max(1));
    Ok(QExpansion::new(2 * k as i64, 1, 1, 0, coeffs))
}

/// prod_{n >= 1} (1 - q^n) up to q^{len - 1}, via the pentagonal number theorem.
pub fn euler_product(len: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); len];
    let mut k: i64 = 0;
    loop {
        let mut any = false;
        for kk in if k == 0 { vec![0] } else { vec![k, -k] } {
            let e = kk * (3 * kk - 1) / 2;
            if (e as usize) < len {
                p[e as usize] = if kk.rem_euclid(2) == 0 { BigInt::one() } else { -BigInt::one() };
                any = true;
            }
        }
        if !any {
            break;
        }
        k += 1;
    }
    p
}

fn int_series_mul(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn int_series_inv(a: &[BigInt], len: usize) -> Vec<BigInt> {
    // a[0] = 1
    let mut inv = vec![BigInt::zero(); len];
    inv[0] = BigInt::one();
    for k in 1..len {
        let mut s = BigInt::zero();
        for j in 1..=k.min(a.len() - 1) {
            if !a[j].is_zero() {
                s += &a[j] * &inv[k - j];
            }
        }
        inv[k] = -s;
    }
    inv
}

/// Integer power series prod_d prod_n (1 - q^{d n})^{r_d} up to q^{len - 1}.
pub fn eta_product_series(exps: &BTreeMap<u64, i64>, len: usize) -> Vec<BigInt> {
    let base = euler_product(len);
    let mut acc = vec![BigInt::zero(); len];
    acc[0] = BigInt::one();
    for (&d, &r) in exps {
        let mut f = vec![BigInt::zero(); len];
        for (i, x) in base.iter().enumerate() {
            let e = i * d as usize;
            if e < len {
                f[e] = x.clone();
            }
        }
        let g = if r < 0 { int_series_inv(&f, len) } else { f };
        for _ in 0..r.unsigned_abs() {
            acc = int_series_mul(&acc, &g, len);
        }
    }
    acc
}

/// prod_d eta(d z)^{r_d} with `order` integral steps past its leading exponent.
pub fn eta_quotient_qexp(exps: &BTreeMap<u64, i64>, order: usize) -> Result<QExpansion> {
    let lead: i64 = exps.iter().map(|(&d, &r)| d as i64 * r).sum();
    let g = lead.gcd(&24);
    let den = (24 / g) as u64;
    let start = lead / g;
    let weight2: i64 = exps.values().sum();
    let level = exps.keys().fold(1u64, |a, &d| a.lcm(&d));
    let series = eta_product_series(exps, order);
    let mut coeffs = vec![BigRational::zero(); order * den as usize];
    for (i, x) in series.into_iter().enumerate() {
        coeffs[i * den as usize] = BigRational::from_integer(x);
    }
    Ok(QExpansion::new(weight2, level, den, start, coeffs))
}

/// Delta = eta^24, coefficients of q^1 .. q^{order-1}.
pub fn delta(order: usize) -> QExpansion {
    let exps = BTreeMap::from([(1u64, 24i64)]);
    let mut d = eta_quotient_qexp(&exps, order.saturating_sub(1).max(1)).expect("eta^24");
    d.level = 1;
    d
}

/// j = E4^3 / Delta, coefficients of q^{-1} .. q^{order-1}.
pub fn j_invariant(order: usize) -> QExpansion {
    let n = order + 2;
    let e4 = eisenstein(4, n).expect("E4");
    let e43 = e4.mul(&e4).and_then(|x| x.mul(&e4)).expect("E4^3");
    let d = delta(n + 1);
    let mut j = e43.div(&d).expect("Delta invertible");
    let keep = (order as i64 + 1) as usize;
    j.coeffs.truncate(keep);
    j
}

/// (eta(z)/eta(N z))^{24/(N-1)} for N in {2,3,4,5,7,13}.
pub fn hauptmodul(n: u64, order: usize) -> Result<QExpansion> {
    if !HAUPTMODUL_LEVELS.contains(&n) {
        return invalid(format!("no built-in hauptmodul for level {n}"));
    }
    let e = 24 / (n as i64 - 1);
    let exps = BTreeMap::from([(1u64, e), (n, -e)]);
    let mut h = eta_quotient_qexp(&exps, order + 1)?;
    h.level = n;
    Ok(h)
}

/// r-th Cohen operator on f (weight k1) and g (weight k2).
pub fn cohen_operator(f: &QExpansion, g: &QExpansion, r: u32) -> Result<QExpansion> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let k1 = rat(f.weight2) * &half;
    let k2 = rat(g.weight2) * &half;
    let mut acc: Option<QExpansion> = None;
    for s in 0..=r {
        let c1 = binomial_rational(&(&k1 + rat(r as i64 - 1)), s);
        let c2 = binomial_rational(&(&k2 + rat(r as i64 - 1)), r - s);
        let mut fd = f.clone();
        for _ in 0..r - s {
            fd = fd.theta();
        }
        let mut gd = g.clone();
        for _ in 0..s {
            gd = gd.theta();
        }
        let sign = if s % 2 == 0 { rat(1) } else { rat(-1) };
        let term = fd.mul(&gd)?.scale(&(sign * c1 * c2));
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    let mut out = acc.expect("r >= 0");
    out.weight2 = f.weight2 + g.weight2 + 4 * r as i64;
    Ok(out)
}

/// If every coefficient of `a` in the common range is lambda times that of `b`, return lambda.
pub fn proportionality(a: &QExpansion, b: &QExpansion, count: usize) -> Option<BigRational> {
    let (a, b) = a.aligned(b).ok()?;
    let start = a.start.min(b.start);
    let order = a.order().min(b.order()).min(start + count as i64);
    let mut lambda: Option<BigRational> = None;
    for n in start..order {
        let x = a.coeff_num(n)?;
        let y = b.coeff_num(n)?;
        if y.is_zero() {
            if !x.is_zero() {
                return None;
            }
            continue;
        }
        let l = x / y;
        match &lambda {
            None => lambda = Some(l),
            Some(m) if *m != l => return None,
            _ => {}
        }
    }
    lambda
}

/// Small helper for tests and the CLI: coefficient as a signed integer string.
pub fn coeff_string(f: &QExpansion, n: i64) -> Option<String> {
    let c = f.coeff(n)?;
    Some(if c.is_integer() { c.to_integer().to_string() } else { c.to_string() })
}
