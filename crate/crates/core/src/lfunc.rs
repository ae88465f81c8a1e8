//! Dirichlet and modular L-functions, Petersson norms, and the explicit
//! generalized Rankin-Selberg L-function of a twisted pair of discriminants.

#![allow(non_snake_case)]

use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::bqf::Mat2;
use crate::error::{invalid, Error, Result};
use crate::numtheory::{divisors, factor_u64, heegner_condition, is_fundamental, is_squarefree, kronecker, partial_zeta};
use crate::qexp::{fricke_eigenvalue, gamma0_coset_reps, Evaluable, Newform};
use crate::shintani::twisted_trace;
use crate::special::{c, gamma, gl_panel, ln_gamma, upper_gamma, C64};

/// Terms whose incomplete-gamma argument exceeds this are dropped.
const CUTOFF_EXPONENT: f64 = 48.0;

#[derive(Clone, Debug, Serialize)]
pub struct LValue {
    pub s: C64,
    pub value: C64,
    pub error_bound: f64,
    pub method: String,
}

/// The primitive quadratic character attached to a fundamental discriminant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirichletChar {
    pub disc: i64,
}

impl DirichletChar {
    pub fn new(disc: i64) -> Result<DirichletChar> {
        if disc == 1 || !is_fundamental(disc) {
            return invalid(format!("{disc} is not a non-trivial fundamental discriminant"));
        }
        Ok(DirichletChar { disc })
    }

    pub fn modulus(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    pub fn value(&self, n: i64) -> i32 {
        kronecker(self.disc, n)
    }

    /// 0 for even characters, 1 for odd ones.
    pub fn parity(&self) -> u32 {
        u32::from(self.disc < 0)
    }
}

/// The theta integral sum_n chi(n) n^delta int_t^inf e^{-pi n^2 y / A} y^{(s+delta)/2} dy/y
/// plus its dual piece; equals (A/pi)^{(s+delta)/2} Gamma((s+delta)/2) L(s, chi).
fn theta_mellin(chi: DirichletChar, s: C64, t: f64) -> (C64, f64) {
    let a = chi.modulus() as f64;
    let delta = chi.parity() as f64;
    let e1 = (s + delta) / 2.0;
    let e2 = (1.0 - s + delta) / 2.0;
    let tmin = t.min(1.0 / t);
    let nmax = ((CUTOFF_EXPONENT * a / (PI * tmin)).sqrt().ceil() as u64).max(2);
    let mut total = c(0.0, 0.0);
    let mut scale = 0.0f64;
    for n in 1..=nmax {
        let x = match chi.value(n as i64) {
            0 => continue,
            v => v as f64,
        };
        let u = PI * (n * n) as f64 / a;
        let nd = (n as f64).powf(delta);
        let p1 = upper_gamma(e1, u * t) * c(u, 0.0).powc(-e1);
        let p2 = upper_gamma(e2, u / t) * c(u, 0.0).powc(-e2);
        let term = (p1 + p2) * (x * nd);
        scale = scale.max(term.norm());
        total += term;
    }
    // The first omitted term is below exp(-CUTOFF_EXPONENT) times a modest power.
    let err = 1e-15 * scale.max(total.norm()) * nmax as f64 + (-CUTOFF_EXPONENT).exp();
    (total, err)
}

/// L(s, chi_D) for a fundamental discriminant D != 1 by the smoothed theta sum.
pub fn dirichlet_L(d: i64, s: C64) -> Result<LValue> {
    dirichlet_L_with(d, s, 1.0)
}

/// As `dirichlet_L` with the theta splitting point moved to `t`.
pub fn dirichlet_L_with(d: i64, s: C64, t: f64) -> Result<LValue> {
    let chi = DirichletChar::new(d)?;
    if !(t > 0.0) {
        return invalid("splitting point must be positive");
    }
    let a = chi.modulus() as f64;
    let e = (s + chi.parity() as f64) / 2.0;
    let gam = gamma(e);
    if !gam.is_finite() || gam.norm() == 0.0 {
        return Err(Error::Precision(format!("Gamma factor degenerate at s = {s}")));
    }
    let (m, err) = theta_mellin(chi, s, t);
    let pre = c(a / PI, 0.0).powc(e) * gam;
    let value = m / pre;
    let error_bound = err / pre.norm();
    if !value.is_finite() {
        return Err(Error::Precision(format!("L({s}, chi_{d}) overflowed")));
    }
    Ok(LValue { s, value, error_bound, method: "theta-afe".into() })
}

/// Lambda(s, chi_D) = A^{s/2} Gamma_R(s + delta) L(s, chi_D) with conductor A.
pub fn completed_Lambda(d: i64, s: C64, conductor: f64) -> Result<LValue> {
    completed_Lambda_with(d, s, conductor, 1.0)
}

pub fn completed_Lambda_with(d: i64, s: C64, conductor: f64, t: f64) -> Result<LValue> {
    let chi = DirichletChar::new(d)?;
    if !(conductor > 0.0) {
        return invalid("conductor must be positive");
    }
    let a = chi.modulus() as f64;
    let delta = chi.parity() as f64;
    let (m, err) = theta_mellin(chi, s, t);
    // Lambda with A = |D| is |D|^{-delta/2} times the theta integral.
    let scale = c(conductor / a, 0.0).powc(s / 2.0) * a.powf(-delta / 2.0);
    Ok(LValue { s, value: m * scale, error_bound: err * scale.norm(), method: "theta-afe".into() })
}

/// L(1, chi_D) for D < 0 from the class number formula, 2 pi h / (w sqrt|D|).
pub fn class_number_L1(d: i64) -> Result<f64> {
    if d >= 0 || !is_fundamental(d) {
        return invalid("class number formula needs a negative fundamental discriminant");
    }
    let h = crate::bqf::class_number(d)? as f64;
    let w = match d {
        -3 => 6.0,
        -4 => 4.0,
        _ => 2.0,
    };
    Ok(2.0 * PI * h / (w * (-d as f64).sqrt()))
}

fn newform_fricke(g: &Newform) -> Result<i8> {
    match g.fricke {
        Some(e) => Ok(e),
        None => fricke_eigenvalue(g),
    }
}

/// Sign of Lambda(G, s) = sign Lambda(G, 2k - s).
pub fn modular_sign(g: &Newform) -> Result<i8> {
    let eps = newform_fricke(g)?;
    Ok(if g.k() % 2 == 0 { eps } else { -eps })
}

/// Lambda(G, s) = N^{s/2} (2 pi)^{-s} Gamma(s) L(G, s) by the approximate
/// functional equation split at y = t / sqrt(N).
pub fn modular_Lambda_with(g: &Newform, s: C64, t: f64) -> Result<LValue> {
    if !(t > 0.0) {
        return invalid("splitting point must be positive");
    }
    let sign = modular_sign(g)? as f64;
    let n = g.level as f64;
    let w = g.weight as f64;
    let sn = n.sqrt();
    let tmin = t.min(1.0 / t);
    let e1 = s;
    let e2 = w - s;
    // First n where both incomplete gammas are negligible against the coefficient growth.
    let amax = e1.re.max(e2.re).max(1.0);
    let mut need = 1u64;
    loop {
        let x = 2.0 * PI * need as f64 * tmin / sn;
        let log_term = (w / 2.0 + 1.0) * (need as f64).ln() + (amax - 1.0) * x.max(1.0).ln() - x;
        if x > 2.0 * amax && log_term < -CUTOFF_EXPONENT {
            break;
        }
        need += 1;
    }
    if need as usize > g.bound() {
        return Err(Error::Precision(format!(
            "modular L-function needs {need} coefficients, only {} available",
            g.bound()
        )));
    }
    let mut total = c(0.0, 0.0);
    let mut scale = 0.0f64;
    for m in 1..=need {
        let am = g.a(m).expect("in range") as f64;
        if am == 0.0 {
            continue;
        }
        let x = 2.0 * PI * m as f64;
        let p1 = c(n, 0.0).powc(s / 2.0) * c(x, 0.0).powc(-e1) * upper_gamma(e1, x * t / sn);
        let p2 = c(n, 0.0).powc(w / 2.0 - s / 2.0) * c(x, 0.0).powc(-e2) * upper_gamma(e2, x / (t * sn));
        let term = (p1 + p2 * sign) * am;
        scale = scale.max(term.norm());
        total += term;
    }
    let error_bound = 1e-15 * scale * need as f64 + scale * (-CUTOFF_EXPONENT).exp();
    Ok(LValue { s, value: total, error_bound, method: "afe".into() })
}

pub fn modular_Lambda(g: &Newform, s: C64) -> Result<LValue> {
    modular_Lambda_with(g, s, 1.0)
}

/// L(G, s) for a newform G.
pub fn modular_L(g: &Newform, s: C64) -> Result<LValue> {
    modular_L_with(g, s, 1.0)
}

pub fn modular_L_with(g: &Newform, s: C64, t: f64) -> Result<LValue> {
    let lam = modular_Lambda_with(g, s, t)?;
    let n = g.level as f64;
    let pre = c(n, 0.0).powc(s / 2.0) * c(2.0 * PI, 0.0).powc(-s) * gamma(s);
    if !pre.is_finite() || pre.norm() == 0.0 {
        return Err(Error::Precision(format!("Gamma factor degenerate at s = {s}")));
    }
    Ok(LValue { s, value: lam.value / pre, error_bound: lam.error_bound / pre.norm(), method: lam.method })
}

/// Integral of an SL2(Z)-invariant-after-coset-sum function over Gamma0(n)\H,
/// truncated at height `ymax` in each translate of the standard domain.
/// `resolution` scales the number of Gauss-Legendre panels in both directions.
pub fn domain_integral<F>(n: u64, f: F, ymax: f64, resolution: usize) -> Result<f64>
where
    F: Fn(&Mat2, C64) -> Result<f64>,
{
    if n == 0 || resolution == 0 {
        return invalid("level and resolution must be positive");
    }
    let reps = gamma0_coset_reps(n);
    let xpanels = 2 * resolution;
    let umax = ymax.ln();
    let mut failure: Option<Error> = None;
    let mut total = 0.0;
    for r in &reps {
        let mut outer = |x: f64| -> C64 {
            let u0 = 0.5 * (1.0 - x * x).ln();
            let upanels = resolution * ((umax - u0) * 4.0).ceil().max(1.0) as usize;
            let h = (umax - u0) / upanels as f64;
            let mut inner = |u: f64| -> C64 {
                let y = u.exp();
                match f(r, c(x, y)) {
                    Ok(v) => c(v / y, 0.0),
                    Err(e) => {
                        failure.get_or_insert(e);
                        c(0.0, 0.0)
                    }
                }
            };
            let mut acc = c(0.0, 0.0);
            for i in 0..upanels {
                acc += gl_panel(&mut inner, u0 + h * i as f64, u0 + h * (i + 1) as f64, 16);
            }
            acc
        };
        let hx = 1.0 / xpanels as f64;
        for i in 0..xpanels {
            total += gl_panel(&mut outer, -0.5 + hx * i as f64, -0.5 + hx * (i + 1) as f64, 16).re;
        }
    }
    match failure {
        Some(e) => Err(Error::Precision(format!("quadrature failed: {e}"))),
        None => Ok(total),
    }
}

fn act(g: &Mat2, z: C64) -> C64 {
    (z * g[0][0] as f64 + g[0][1] as f64) / (z * g[1][0] as f64 + g[1][1] as f64)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PeterssonNorm {
    pub value: f64,
    pub error_bound: f64,
}

/// Integral of |G|^2 y^{weight} over Gamma0(N)\H at a given resolution.
pub fn petersson_norm_at(g: &dyn Evaluable, resolution: usize) -> Result<f64> {
    let n = g.level();
    let w = g.weight2() as f64 / 2.0;
    // Translates of the cusps have width at most N.
    let ymax = 3.5 * n as f64 + 2.0;
    domain_integral(
        n,
        |r, z| {
            let tz = act(r, z);
            let v = g.eval(tz)?;
            Ok(v.norm_sqr() * tz.im.powf(w))
        },
        ymax,
        resolution,
    )
}

/// Petersson norm with the difference against doubled resolution as error.
pub fn petersson_norm(g: &dyn Evaluable) -> Result<PeterssonNorm> {
    let a = petersson_norm_at(g, 1)?;
    let b = petersson_norm_at(g, 2)?;
    if !(b > 0.0) {
        return Err(Error::Precision("Petersson quadrature returned a non-positive value".into()));
    }
    Ok(PeterssonNorm { value: b, error_bound: (a - b).abs() })
}

fn real_binomial(x: f64, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (x - i as f64) / (i + 1) as f64)
}

/// binom(-k/2, (k-1)/2) 2^{3-3k} pi^{-k-s-1/2} Gamma(k+s)/Gamma(1+s) Gamma(s/2+1), k odd.
pub fn c_k(k: i64, s: C64) -> Result<C64> {
    if k <= 0 || k % 2 == 0 {
        return invalid("C_k needs odd positive k");
    }
    let kf = k as f64;
    let b = real_binomial(-kf / 2.0, ((k - 1) / 2) as u32);
    let lg = ln_gamma(s + kf) - ln_gamma(s + 1.0) + ln_gamma(s / 2.0 + 1.0);
    let pw = c(PI, 0.0).powc(-(s + kf + 0.5));
    Ok(pw * lg.exp() * (b * 2f64.powf(3.0 - 3.0 * kf)))
}

fn local_den(p: f64, s: C64) -> Result<C64> {
    let den = 1.0 - c(p, 0.0).powc(-1.0 - s);
    if den.norm() < 1e-14 {
        return invalid(format!("pole at p^(-1-s) = 1 for p = {p}, s = {s}"));
    }
    Ok(den)
}

fn ap(g: &Newform, p: u64) -> Result<f64> {
    g.a(p).map(|x| x as f64).ok_or_else(|| Error::Precision(format!("a({p}) not available")))
}

/// Local factor at primes of N/(N0 N3).
pub fn gamma_p0(g: &Newform, p: u64, s: C64) -> Result<C64> {
    let k = g.k() as f64;
    let pf = p as f64;
    let den = local_den(pf, s)?;
    let ps = c(pf, 0.0).powc(-s);
    let first = -c(pf, 0.0).powc(-s - k) / den * ap(g, p)?;
    let second = ((1.0 + 1.0 / pf) * ps * ps - (3.0 + 1.0 / pf) * ps + 2.0 * pf) / ((pf - 1.0) * den);
    Ok(first + second)
}

/// Local factor at primes of N3.
pub fn gamma_p1(g: &Newform, p: u64, s: C64) -> Result<C64> {
    let k = g.k() as f64;
    let pf = p as f64;
    let den = local_den(pf, s)?;
    let ps = c(pf, 0.0).powc(-s);
    let a = (ps * ps - 2.0 * pf * ps + pf) / ((pf - 1.0) * den) * ap(g, p)?;
    let b = (1.0 + ps) * pf.powf(k) / den;
    Ok((a + b) * pf.powf(-2.0 * k))
}

/// zeta_d(s+1) prod_{p | d} (a(p) - p^{k-1}(1 + p^{-s})).
pub fn delta_d(g: &Newform, d: u64, s: C64) -> Result<C64> {
    if d == 0 {
        return invalid("d must be positive");
    }
    let k = g.k() as f64;
    let mut acc = partial_zeta(d, s + 1.0)?;
    for (p, _) in factor_u64(d) {
        let pf = p as f64;
        acc *= ap(g, p)? - pf.powf(k - 1.0) * (1.0 + c(pf, 0.0).powc(-s));
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct RankinSelberg {
    pub value: LValue,
    pub fricke: i8,
    /// Every multiplicative block of the assembled product.
    pub factors: BTreeMap<String, C64>,
}

/// Checks for the pair (D1, D2) and the levels N0, N3, N.
fn check_rs(g0: &Newform, n3: u64, n: u64, d1: i64, d2: i64) -> Result<()> {
    let k = g0.k();
    if k % 2 == 0 {
        return invalid("the Rankin-Selberg formula needs odd k");
    }
    for d in [d1, d2] {
        if d >= 0 || !is_fundamental(d) {
            return invalid(format!("{d} must be a negative fundamental discriminant"));
        }
    }
    if d1 == d2 {
        return invalid("D1 and D2 must be distinct");
    }
    if d1 % 2 == 0 && d2 % 2 == 0 {
        return invalid("D1 and D2 must not both be even");
    }
    if n == 0 || n % 2 == 0 || !is_squarefree(n as i64) {
        return invalid("N must be odd and squarefree");
    }
    let n0 = g0.level;
    if n3 == 0 || n % (n0 * n3) != 0 {
        return invalid(format!("N0 N3 = {} must divide N = {n}", n0 * n3));
    }
    for d in [d1, d2] {
        if !heegner_condition(d, n)? {
            return invalid(format!("N = {n} fails the Heegner condition for {d}"));
        }
    }
    Ok(())
}

/// The explicit right-hand side of the Rankin-Selberg identity for
/// G(z) = G0(N3 z) of level N, at the pair of characters (chi_{D1}, chi_{D2}).
pub fn rankin_selberg_L(g0: &Newform, n3: u64, n: u64, d1: i64, d2: i64, s: C64, tol: f64) -> Result<RankinSelberg> {
    check_rs(g0, n3, n, d1, d2)?;
    let k = g0.k();
    let kf = k as f64;
    let eps = newform_fricke(g0)?;
    let n0 = g0.level;
    let mut factors = BTreeMap::new();
    let mut rel_err = 0.0;

    // |G0|^2/(3|G~0|^2) conj(c(|D1|)) c(|D2|) from the lift's coefficient at |D2|.
    let t = twisted_trace(g0, d1, d2.unsigned_abs(), tol)?;
    let sgn = if (k - 1 + k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let shin = t.value * (sgn * 2f64.powi(k as i32 + 1) * (d1.abs() as f64).powf((kf - 1.0) / 2.0));
    factors.insert("shintani_product".to_string(), shin);
    rel_err += t.error_bound / t.value.norm().max(1e-300);

    let fe = c(1.0 + eps as f64, 0.0);
    factors.insert("one_plus_fricke".to_string(), fe);

    let lg = modular_L(g0, s + kf)?;
    factors.insert("L_G0".to_string(), lg.value);
    let mut abs_err_lg = lg.error_bound;

    let l1 = completed_Lambda(d1, s + 1.0, d1.abs() as f64)?;
    let l2 = completed_Lambda(d2, s + 1.0, d2.abs() as f64)?;
    factors.insert("Lambda_chi1".to_string(), l1.value);
    factors.insert("Lambda_chi2".to_string(), l2.value);
    rel_err += l1.error_bound / l1.value.norm() + l2.error_bound / l2.value.norm();

    let dp = ((d1 * d2) as f64).abs().powf((kf - 1.0) / 2.0);
    factors.insert("disc_power".to_string(), c(dp, 0.0));
    let ck = c_k(k, s)?;
    factors.insert("C_k".to_string(), ck);
    let zr = partial_zeta(n, s + 1.0)? / partial_zeta(n, c(1.0, 0.0))?;
    factors.insert("zeta_ratio".to_string(), zr);

    let mut g0prod = c(1.0, 0.0);
    for p in factor_u64(n / (n0 * n3)).into_iter().map(|x| x.0) {
        let v = gamma_p0(g0, p, s)?;
        factors.insert(format!("gamma_p0[{p}]"), v);
        g0prod *= v;
    }
    let mut g1prod = c(1.0, 0.0);
    for p in factor_u64(n3).into_iter().map(|x| x.0) {
        let v = gamma_p1(g0, p, s)?;
        factors.insert(format!("gamma_p1[{p}]"), v);
        g1prod *= v;
    }
    factors.insert("gamma_p0_product".to_string(), g0prod);
    factors.insert("gamma_p1_product".to_string(), g1prod);

    let rest = shin * fe / (l1.value * l2.value * dp) * ck * zr * g0prod * g1prod;
    let value = rest * lg.value;
    abs_err_lg *= rest.norm();
    let error_bound = abs_err_lg + rel_err * value.norm() + 1e-14 * value.norm();
    if !value.is_finite() {
        return Err(Error::Precision(format!("Rankin-Selberg value overflowed at s = {s}")));
    }
    Ok(RankinSelberg {
        value: LValue { s, value, error_bound, method: "explicit".into() },
        fricke: eps,
        factors,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct KohnenCheck {
    pub lhs: C64,
    pub rhs: C64,
    pub gap: f64,
    /// Bound on the omitted terms n > nmax plus the numerical errors.
    pub bound: f64,
}

/// Truncated comparison of sum_n c(d^2 n^2 |D2|)/c(|D2|) n^{-k-s} with
/// L(G0, s+k) delta_d / L(s+1, chi_{D2}) for the lift of a level-one newform.
pub fn kohnen_series_check(g0: &Newform, d: u64, d2: i64, s: f64, nmax: u64, tol: f64) -> Result<KohnenCheck> {
    let k = g0.k();
    if g0.level != 1 {
        return invalid("the truncated check is implemented for level one");
    }
    if (d2 > 0) != (k % 2 == 0) || !is_fundamental(d2) {
        return invalid(format!("{d2} is not a fundamental discriminant of sign (-1)^k"));
    }
    let kf = k as f64;
    let m0 = d2.unsigned_abs();
    let base = twisted_trace(g0, 1, m0, tol)?;
    if base.value.norm() <= 100.0 * base.error_bound {
        return Err(Error::Check(format!("c({m0}) is numerically zero")));
    }
    let mut lhs = c(0.0, 0.0);
    let mut err = 0.0;
    for nn in 1..=nmax {
        let t = twisted_trace(g0, 1, d * d * nn * nn * m0, tol)?;
        let r = t.value / base.value;
        err += (t.error_bound + r.norm() * base.error_bound) / base.value.norm() / (nn as f64).powf(kf + s);
        lhs += r / (nn as f64).powf(kf + s);
    }
    let lg = modular_L(g0, c(s + kf, 0.0))?;
    let lc = dirichlet_L(d2, c(s + 1.0, 0.0))?;
    let dd = delta_d(g0, d, c(s, 0.0))?;
    let rhs = lg.value * dd / lc.value;
    err += rhs.norm() * (lg.error_bound / lg.value.norm() + lc.error_bound / lc.value.norm());
    // |c(d^2 n^2 |D2|)/c(|D2|)| <= sum_{e | dn} e^{k-1} |a(dn/e)| with Deligne's bound.
    let ratio_bound = |m: u64| -> f64 {
        divisors(m)
            .into_iter()
            .map(|e| (e as f64).powf(kf - 1.0) * (divisors(m / e).len() as f64) * ((m / e) as f64).powf(kf - 0.5))
            .sum()
    };
    let mtail = 200_000u64;
    let mut tail = 0.0;
    for nn in nmax + 1..=mtail {
        tail += ratio_bound(d * nn) / (nn as f64).powf(kf + s);
    }
    // Past mtail use d(m) <= 2 sqrt(m), giving terms below 4 (dn)^{k+1/2} n^{-k-s}.
    let ex = s - 0.5 - 1.0;
    if ex <= 0.0 {
        return invalid("tail estimate needs s > 3/2");
    }
    tail += 4.0 * (d as f64).powf(kf + 0.5) * (mtail as f64).powf(-ex) / ex;
    Ok(KohnenCheck { lhs, rhs, gap: (lhs - rhs).norm(), bound: tail + err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma_r;

    #[test]
    fn class_number_values() {
        let l = dirichlet_L(-4, c(1.0, 0.0)).unwrap();
        assert!((l.value.re - PI / 4.0).abs() < 1e-12, "{:?}", l);
        let l = dirichlet_L(-3, c(1.0, 0.0)).unwrap();
        assert!((l.value.re - PI / (3.0 * 3f64.sqrt())).abs() < 1e-12);
        for d in [-7, -15, -23, -20, -47] {
            let l = dirichlet_L(d, c(1.0, 0.0)).unwrap();
            assert!((l.value.re - class_number_L1(d).unwrap()).abs() < 1e-11, "{d}");
        }
    }

    #[test]
    fn direct_series_agrees() {
        // Catalan's constant.
        let l = dirichlet_L(-4, c(2.0, 0.0)).unwrap();
        assert!((l.value.re - 0.915_965_594_177_219_0).abs() < 1e-13);
        let s = c(3.0, 0.5);
        let direct: C64 = (1..200_000).map(|n| c(n as f64, 0.0).powc(-s) * kronecker(5, n) as f64).sum();
        let l = dirichlet_L(5, s).unwrap();
        assert!((l.value - direct).norm() < 1e-10);
    }

    #[test]
    fn functional_equation() {
        for d in [-3, -4, 5, 8, -7, 12, -40] {
            let s = c(0.3, 0.0);
            let a = completed_Lambda_with(d, s, d.abs() as f64, 1.3).unwrap();
            let b = completed_Lambda_with(d, 1.0 - s, d.abs() as f64, 0.6).unwrap();
            assert!((a.value - b.value).norm() < 1e-10 * a.value.norm().max(1.0), "{d}");
        }
    }

    #[test]
    fn modular_l_values() {
        let g = Newform::delta(80);
        let l = modular_L(&g, c(12.0, 0.0)).unwrap();
        let direct: f64 = (1..=80).map(|n| g.a(n).unwrap() as f64 / (n as f64).powi(12)).sum();
        assert!(l.value.re > 0.0);
        assert!((l.value.re - direct).abs() < 1e-12);
        let h = Newform::eta6_eta3_6(80);
        assert_eq!(modular_sign(&h).unwrap(), 1);
        let l = modular_L(&h, c(3.0, 0.0)).unwrap();
        assert!(l.value.norm() > 1e-3);
        let mut flipped = h.clone();
        flipped.fricke = Some(1);
        let l = modular_L(&flipped, c(3.0, 0.0)).unwrap();
        assert!(l.value.norm() < 1e-8);
    }

    #[test]
    fn modular_two_sided() {
        for g in [Newform::delta(80), Newform::eta6_eta3_6(120)] {
            let k = g.k() as f64;
            let sign = modular_sign(&g).unwrap() as f64;
            let a = modular_Lambda_with(&g, c(k + 0.7, 0.2), 1.2).unwrap();
            let b = modular_Lambda_with(&g, c(k - 0.7, -0.2), 0.8).unwrap();
            assert!((a.value - b.value * sign).norm() < 1e-8 * a.value.norm().max(1e-3));
        }
    }

    #[test]
    fn coefficient_shortage() {
        let g = Newform::eta6_eta3_6(5);
        match modular_L(&g, c(3.0, 0.0)) {
            Err(Error::Precision(m)) => assert!(m.contains("needs")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn local_factors() {
        let g = Newform::eta6_eta3_6(60);
        assert_eq!(delta_d(&g, 1, c(0.7, 0.0)).unwrap(), c(1.0, 0.0));
        let ck = c_k(3, c(0.0, 0.0)).unwrap();
        let expect = real_binomial(-1.5, 1) * 2f64.powi(-6) * PI.powf(-3.5) * 2.0;
        assert!((ck.re - expect).abs() < 1e-15);
        // a(p) = 0 substitution at s = 0.
        let mut z = g.clone();
        z.coeffs[4] = 0;
        let v = gamma_p0(&z, 5, c(0.0, 0.0)).unwrap();
        let pf = 5.0f64;
        let direct = ((1.0 + 1.0 / pf) - (3.0 + 1.0 / pf) + 2.0 * pf) / ((pf - 1.0) * (1.0 - 1.0 / pf));
        assert!((v.re - direct).abs() < 1e-14);
        assert!((v.re - 2.5).abs() < 1e-14);
        assert!(gamma_p0(&g, 5, c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn domain_area_level_three() {
        let y = 50.0;
        let a = domain_integral(3, |_, _| Ok(1.0), y, 2).unwrap();
        assert!((a + 4.0 / y - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn petersson_delta() {
        let g = Newform::delta(10);
        let p = petersson_norm(&g).unwrap();
        assert!(p.error_bound < 1e-6 * p.value);
        assert!((p.value - 1.035_362_056_804_3e-6).abs() < 1e-6 * p.value, "{}", p.value);
    }

    #[test]
    fn completed_matches_gamma_factor() {
        for d in [-4, 5, -7] {
            let s = c(1.7, 0.4);
            let l = dirichlet_L(d, s).unwrap().value;
            let delta = if d < 0 { 1.0 } else { 0.0 };
            let expect = c(d.abs() as f64, 0.0).powc(s / 2.0) * gamma_r(s + delta) * l;
            let got = completed_Lambda(d, s, d.abs() as f64).unwrap().value;
            assert!((got - expect).norm() < 1e-12 * expect.norm());
        }
    }

    #[test]
    fn rankin_selberg_structure() {
        let g = Newform::eta6_eta3_6(80);
        for s in [c(0.0, 0.0), c(0.4, 0.3), c(1.5, 0.0)] {
            let r = rankin_selberg_L(&g, 1, 3, -8, -11, s, 1e-10).unwrap();
            assert_eq!(r.value.value, c(0.0, 0.0));
            assert_eq!(r.factors["gamma_p0_product"], c(1.0, 0.0));
            assert_eq!(r.factors["gamma_p1_product"], c(1.0, 0.0));
        }
        let mut f = g.clone();
        f.fricke = Some(1);
        let r = rankin_selberg_L(&f, 1, 3, -8, -11, c(0.0, 0.0), 1e-10).unwrap();
        assert!(r.value.value.norm() < 1e-8 + r.value.error_bound);
        assert!(rankin_selberg_L(&g, 1, 3, -7, -11, c(0.0, 0.0), 1e-10).is_err());
        assert!(rankin_selberg_L(&g, 1, 3, -8, -20, c(0.0, 0.0), 1e-10).is_err());
        assert!(rankin_selberg_L(&Newform::delta(40), 1, 1, -8, -11, c(0.0, 0.0), 1e-10).is_err());
    }

    #[test]
    fn kohnen_truncation() {
        let g = Newform::delta(60);
        let r = kohnen_series_check(&g, 1, 5, 2.0, 5, 1e-11).unwrap();
        assert!(r.gap <= r.bound);
        // Completing the tail with c(5n^2)/c(5) = sum_{e|n} mu(e) chi_5(e) e^5 a(n/e).
        let mut tail = 0.0;
        for n in 6..=60u64 {
            let ratio: f64 = divisors(n)
                .into_iter()
                .map(|e| {
                    crate::numtheory::moebius(e) as f64
                        * kronecker(5, e as i64) as f64
                        * (e as f64).powi(5)
                        * g.a(n / e).unwrap() as f64
                })
                .sum();
            tail += ratio / (n as f64).powi(8);
        }
        // Terms past 60 are of size about n^{-5/2}.
        let rest = (r.lhs.re + tail - r.rhs.re).abs();
        assert!(rest < 1e-4 && rest < r.gap / 50.0);
    }
}
