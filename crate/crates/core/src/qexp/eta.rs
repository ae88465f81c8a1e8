//! Dedekind eta and the functions built from it.

use rug::Float;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::newform::Evaluable;
use crate::bqf::{mat_mul, Mat2, IDENTITY};
use crate::error::{invalid, Result};
use crate::mp::{pi, Mpc};
use crate::special::{c, C64};

pub const HAUPTMODUL_LEVELS: [u64; 6] = [2, 3, 4, 5, 7, 13];

const MAX_STEPS: usize = 100_000;

fn check_upper(tau: C64) -> Result<()> {
    if !(tau.im > 0.0) || !tau.re.is_finite() {
        return invalid(format!("tau = {tau} is not in the upper half-plane"));
    }
    Ok(())
}

/// gamma in SL2(Z) with gamma tau in the standard fundamental domain.
pub fn reduce_sl2(tau: C64) -> Result<(C64, Mat2)> {
    check_upper(tau)?;
    let mut t = tau;
    let mut g = IDENTITY;
    for _ in 0..MAX_STEPS {
        let k = t.re.round();
        t.re -= k;
        g = mat_mul(&[[1, -(k as i64)], [0, 1]], &g);
        if t.norm_sqr() < 1.0 - 1e-13 {
            t = -1.0 / t;
            g = mat_mul(&[[0, -1], [1, 0]], &g);
        } else {
            return Ok((t, g));
        }
    }
    invalid(format!("reduction of {tau} did not terminate"))
}

fn pentagonal_sum(q: C64) -> C64 {
    let mut s = c(1.0, 0.0);
    for k in 1..200i64 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let a = q.powi((k * (3 * k - 1) / 2) as i32);
        let b = q.powi((k * (3 * k + 1) / 2) as i32);
        s += (a + b) * sign;
        if a.norm() < 1e-18 {
            break;
        }
    }
    s
}

/// A branch of log eta(tau).
pub fn log_eta(tau: C64) -> Result<C64> {
    check_upper(tau)?;
    let mut t = tau;
    let mut acc = c(0.0, 0.0);
    for _ in 0..MAX_STEPS {
        let k = t.re.round();
        t.re -= k;
        acc += c(0.0, PI * k / 12.0);
        if t.norm_sqr() < 1.0 - 1e-13 {
            acc -= 0.5 * (c(0.0, -1.0) * t).ln();
            t = -1.0 / t;
        } else {
            let q = (c(0.0, 2.0 * PI) * t).exp();
            return Ok(acc + c(0.0, 2.0 * PI / 24.0) * t + pentagonal_sum(q).ln());
        }
    }
    invalid(format!("eta reduction of {tau} did not terminate"))
}

pub fn eta(tau: C64) -> Result<C64> {
    Ok(log_eta(tau)?.exp())
}

/// prod_d eta(d tau)^{r_d}.
pub fn eta_quotient(exps: &BTreeMap<u64, i64>, tau: C64) -> Result<C64> {
    let mut s = c(0.0, 0.0);
    for (&d, &r) in exps {
        s += log_eta(tau * d as f64)? * r as f64;
    }
    Ok(s.exp())
}

/// An eta quotient viewed as a modular form on Gamma0(level).
#[derive(Clone, Debug)]
pub struct EtaQuotient {
    pub exps: BTreeMap<u64, i64>,
    pub level: u64,
}

impl EtaQuotient {
    pub fn new(exps: BTreeMap<u64, i64>, level: u64) -> Self {
        EtaQuotient { exps, level }
    }
}

impl Evaluable for EtaQuotient {
    fn weight2(&self) -> i64 {
        self.exps.values().sum()
    }
    fn level(&self) -> u64 {
        self.level
    }
    fn eval(&self, tau: C64) -> Result<C64> {
        eta_quotient(&self.exps, tau)
    }
}

fn check_upper_mp(tau: &Mpc) -> Result<()> {
    if !tau.im.is_sign_positive() || tau.im.is_zero() || !tau.re.is_finite() {
        return invalid("tau is not in the upper half-plane");
    }
    Ok(())
}

fn q_mp(t: &Mpc) -> Mpc {
    let p = t.prec();
    let two_pi = Float::with_val(p, pi(p) * 2u32);
    t.mul_i().scale(&two_pi).exp()
}

fn pentagonal_sum_mp(q: &Mpc) -> Mpc {
    let p = q.prec();
    let eps = Float::with_val(p, Float::i_exp(1, -(p as i32) - 16));
    let mut s = Mpc::one(p);
    let q2 = q.powi(1);
    let mut k: i64 = 1;
    loop {
        let a = q2.powi(k * (3 * k - 1) / 2);
        let b = q2.powi(k * (3 * k + 1) / 2);
        let t = &a + &b;
        s = if k % 2 == 0 { &s + &t } else { &s - &t };
        if a.abs() < eps || k > 10_000 {
            break;
        }
        k += 1;
    }
    s
}

/// eta(tau) in multiprecision, at the precision of `tau`.
pub fn eta_mp(tau: &Mpc) -> Result<Mpc> {
    check_upper_mp(tau)?;
    let p = tau.prec();
    let mut t = tau.clone();
    let mut acc = Mpc::one(p);
    for _ in 0..MAX_STEPS {
        let k = t.re.to_f64().round();
        t.re -= k;
        if k != 0.0 {
            acc = &acc * &Mpc::e2pi(&(Float::with_val(p, k) / 24u32));
        }
        if t.norm_sqr() < 1u32 {
            acc = acc.div(&(-t.mul_i()).sqrt());
            t = (-Mpc::one(p)).div(&t);
        } else {
            let q = q_mp(&t);
            let lead = q_mp(&t.scale(&Float::with_val(p, Float::with_val(p, 1) / 24u32)));
            return Ok(&(&acc * &lead) * &pentagonal_sum_mp(&q));
        }
    }
    invalid("eta reduction did not terminate")
}

/// (eta(tau)/eta(N tau))^{24/(N-1)}.
pub fn hauptmodul_mp(n: u64, tau: &Mpc) -> Result<Mpc> {
    if !HAUPTMODUL_LEVELS.contains(&n) {
        return invalid(format!("no built-in hauptmodul for level {n}"));
    }
    let e = 24 / (n as i64 - 1);
    let a = eta_mp(tau)?;
    let b = eta_mp(&tau.scale(&Float::with_val(tau.prec(), n)))?;
    Ok(a.div(&b).powi(e))
}

/// j(tau) = E4^3/Delta after reduction to the fundamental domain.
pub fn j_mp(tau: &Mpc) -> Result<Mpc> {
    check_upper_mp(tau)?;
    let p = tau.prec();
    let mut t = tau.clone();
    for _ in 0..MAX_STEPS {
        let k = t.re.to_f64().round();
        t.re -= k;
        if t.norm_sqr() < 1u32 {
            t = (-Mpc::one(p)).div(&t);
        } else {
            break;
        }
    }
    let q = q_mp(&t);
    let eps = Float::with_val(p, Float::i_exp(1, -(p as i32) - 16));
    // E4 = 1 + 240 sum n^3 q^n / (1 - q^n)
    let mut e4 = Mpc::zero(p);
    let mut qn = q.clone();
    let one = Mpc::one(p);
    for n in 1..100_000u64 {
        let term = qn.div(&(&one - &qn)).scale(&Float::with_val(p, n * n * n));
        e4 = &e4 + &term;
        if term.abs() < eps {
            break;
        }
        qn = &qn * &q;
    }
    let e4 = &one + &e4.scale(&Float::with_val(p, 240));
    let eta_t = eta_mp(&t)?;
    let delta = eta_t.powi(24);
    Ok((&(&e4 * &e4) * &e4).div(&delta))
}

/// j via the level-two Weber relation, an independent route to `j_mp`.
pub fn j_via_weber_mp(tau: &Mpc) -> Result<Mpc> {
    let p = tau.prec();
    let x = eta_mp(tau)?.div(&eta_mp(&tau.scale(&Float::with_val(p, 2)))?).powi(24);
    let y = &x + &Mpc::from_f64(p, 256.0, 0.0);
    Ok((&(&y * &y) * &y).div(&(&x * &x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qexp::{hauptmodul, j_invariant};
    use crate::special::gamma;

    #[test]
    fn eta_at_i() {
        let want = gamma(c(0.25, 0.0)).re / (2.0 * PI.powf(0.75));
        assert!((eta(c(0.0, 1.0)).unwrap().re - want).abs() < 1e-14);
        // direct product at tau = i without reduction
        let q = (-2.0 * PI).exp();
        let mut prod = q.powf(1.0 / 24.0);
        for n in 1..40 {
            prod *= 1.0 - q.powi(n);
        }
        assert!((prod - want).abs() < 1e-15);
        let m = eta_mp(&Mpc::from_f64(256, 0.0, 1.0)).unwrap();
        assert!((m.re.to_f64() - want).abs() < 1e-15);
        assert!(m.im.to_f64().abs() < 1e-60);
    }

    #[test]
    fn eta_transformations() {
        let tau = c(0.1234, 0.2345);
        let a = eta(tau + 1.0).unwrap();
        let b = eta(tau).unwrap() * (c(0.0, 2.0 * PI / 24.0)).exp();
        assert!((a - b).norm() < 1e-13 * b.norm());
        let a = eta(-1.0 / tau).unwrap();
        let b = (c(0.0, -1.0) * tau).sqrt() * eta(tau).unwrap();
        assert!((a - b).norm() < 1e-13 * b.norm());
        assert!(eta(c(0.3, -1.0)).is_err());
        let p = 300;
        let t = Mpc::from_f64(p, 0.1234, 0.2345);
        let e1 = eta_mp(&Mpc::new(Float::with_val(p, &t.re + 1u32), t.im.clone())).unwrap();
        let e0 = &eta_mp(&t).unwrap() * &Mpc::e2pi(&(Float::with_val(p, 1) / 24u32));
        assert!((&e1 - &e0).abs().to_f64() < 1e-85);
    }

    #[test]
    fn j_routes_agree() {
        let p = 256;
        let tau = Mpc::new(Float::with_val(p, 0.5), Float::with_val(p, 3).sqrt() / 2u32);
        assert!(j_mp(&tau).unwrap().abs().to_f64() < 1e-60);
        let tau = Mpc::from_f64(p, 0.0, 1.0);
        let j = j_mp(&tau).unwrap();
        assert!((j.re.to_f64() - 1728.0).abs() < 1e-50);
        for (x, y) in [(0.13, 0.41), (-0.37, 0.9), (0.02, 0.08)] {
            let t = Mpc::from_f64(p, x, y);
            let a = j_mp(&t).unwrap();
            let b = j_via_weber_mp(&t).unwrap();
            assert!((&a - &b).abs().to_f64() < 1e-60 * a.abs().to_f64().max(1.0));
        }
        let series = j_invariant(40);
        let t = c(0.2, 1.3);
        let a = j_mp(&Mpc::from_f64(p, 0.2, 1.3)).unwrap().to_c64();
        assert!((series.eval_direct(t) - a).norm() < 1e-9 * a.norm());
    }

    #[test]
    fn hauptmodul_invariance() {
        let p = 256;
        for n in [3u64, 5, 7, 13] {
            let ni = n as i64;
            let tau = Mpc::from_f64(p, 0.137, 0.61);
            let g = [[2, 1], [ni, (ni + 1) / 2]];
            let (a, b, cc, d) = (g[0][0], g[0][1], g[1][0], g[1][1]);
            assert_eq!(a * d - b * cc, 1);
            let num = &tau.scale(&Float::with_val(p, a)) + &Mpc::from_f64(p, b as f64, 0.0);
            let den = &tau.scale(&Float::with_val(p, cc)) + &Mpc::from_f64(p, d as f64, 0.0);
            let gt = num.div(&den);
            let x = hauptmodul_mp(n, &tau).unwrap();
            let y = hauptmodul_mp(n, &gt).unwrap();
            assert!((&x - &y).abs().to_f64() < 1e-10 * x.abs().to_f64(), "N = {n}");
            let series = hauptmodul(n, 60).unwrap();
            let z = c(0.137, 0.61);
            assert!((series.eval_direct(z) - x.to_c64()).norm() < 1e-9 * x.to_c64().norm());
        }
        assert!(hauptmodul_mp(11, &Mpc::from_f64(p, 0.0, 1.0)).is_err());
    }
}
