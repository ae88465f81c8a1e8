//! Geodesic cycle integrals and twisted traces of weight-2k forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;
use std::cell::RefCell;

use crate::bqf::{gamma0_classes, genus_char, mat_inv, pell_automorph_big, pell_solution, Bqf, Mat2};
use crate::error::{invalid, Error, Result};
use crate::numtheory::{gcd, is_fundamental, is_square, isqrt, kronecker};
use crate::qexp::{gamma0_reduce, Evaluable};
use crate::special::{c, integrate_panels, C64};

/// Re-reduce (z, Q) once the walk drops below this height.
const REDUCE_BELOW: f64 = 0.5;

#[derive(Clone, Debug, Serialize)]
pub struct CycleIntegral {
    pub form: Bqf,
    pub level: u64,
    pub value: C64,
    pub error_bound: f64,
    /// Hyperbolic length of the closed geodesic (infinite for square discriminants).
    pub length: f64,
}

fn weight_k(g: &dyn Evaluable) -> Result<i32> {
    let w2 = g.weight2();
    if w2 <= 0 || w2 % 4 != 0 {
        return invalid(format!("cycle integrals need weight 2k, got weight {}/2", w2));
    }
    Ok((w2 / 4) as i32)
}

fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        x.to_f64().expect("finite").ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

fn mat_mod_mul(a: &Mat2, b: &Mat2, n: i64) -> Mat2 {
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = ((a[i][0] as i128 * b[0][j] as i128 + a[i][1] as i128 * b[1][j] as i128)
                .rem_euclid(n as i128)) as i64;
        }
    }
    out
}

/// Hyperbolic length of Gamma0(n)_Q \ S_Q.
pub fn stabilizer_length(q: &Bqf, n: u64) -> Result<f64> {
    let g = q.content();
    let d0 = q.disc() / (g * g);
    let (t, _) = pell_solution(d0)?;
    // eps + 1/eps = t
    let log_eps = if t.bits() < 60 {
        (t.to_f64().expect("small") / 2.0).acosh()
    } else {
        ln_big(&t)
    };
    let mb = pell_automorph_big(q)?;
    let ni = n as i64;
    let nb = BigInt::from(ni);
    let m: Mat2 = mb.map(|r| r.map(|x| x.mod_floor(&nb).to_i64().expect("reduced")));
    let mut p = m;
    let mut j = 1;
    while ni > 1 && p[1][0].rem_euclid(ni) != 0 {
        p = mat_mod_mul(&p, &m, ni);
        j += 1;
        if j > 4 * ni * ni {
            return Err(Error::Check(format!("no power of the automorph of {q} lies in Gamma0({n})")));
        }
    }
    Ok(2.0 * j as f64 * log_eps)
}

struct Geodesic {
    q: Bqf,
    xc: f64,
    r: f64,
    sigma: f64,
}

impl Geodesic {
    fn new(q: Bqf) -> Geodesic {
        let a = q.a as f64;
        let sd = (q.disc() as f64).sqrt();
        Geodesic { q, xc: -(q.b as f64) / (2.0 * a), r: sd / (2.0 * a.abs()), sigma: a.signum() }
    }

    /// Point at signed arclength t from the apex, oriented from the first root to the second.
    fn z(&self, t: f64) -> C64 {
        c(self.xc - self.sigma * self.r * t.tanh(), self.r / t.cosh())
    }

    fn dz(&self, t: f64) -> C64 {
        let s = 1.0 / t.cosh();
        c(-self.sigma * self.r * s * s, -self.r * s * t.tanh())
    }

    fn param(&self, z: C64) -> f64 {
        (-self.sigma * (z.re - self.xc) / z.im).asinh()
    }

    fn qz(&self, z: C64) -> C64 {
        let q = &self.q;
        z * z * q.a as f64 + z * q.b as f64 + q.c as f64
    }
}

fn check_form(q: &Bqf, n: u64) -> Result<()> {
    if q.disc() <= 0 {
        return invalid(format!("{q} is not indefinite"));
    }
    if n == 0 || q.a.rem_euclid(n as i64) != 0 {
        return invalid(format!("level {n} does not divide the leading coefficient of {q}"));
    }
    Ok(())
}

/// int over Gamma0(N)_Q \ S_Q of G(z) Q(z,1)^{k-1} dz.
pub fn cycle_integral(g: &dyn Evaluable, q: &Bqf, tol: f64) -> Result<CycleIntegral> {
    let n = g.level();
    check_form(q, n)?;
    let k = weight_k(g)?;
    if is_square(q.disc()) {
        return square_cycle_integral(g, q, k, tol);
    }
    let length = stabilizer_length(q, n)?;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let mut geo = Geodesic::new(*q);
    let mut t = 0.0;
    let mut remaining = length;
    let integrand = |geo: &Geodesic, s: f64| -> C64 {
        let z = geo.z(s);
        match g.eval(z) {
            Ok(v) => v * geo.qz(z).powi(k - 1) * geo.dz(s),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                c(f64::NAN, f64::NAN)
            }
        }
    };
    let scale = integrand(&geo, 0.0).norm().max(1e-300);
    let mut value = c(0.0, 0.0);
    let mut err = 0.0;
    let mut chunks = 0usize;
    while remaining > 1e-14 * length {
        let h = remaining.min(1.0);
        let mut f = |s: f64| integrand(&geo, s);
        let (v, e) = integrate_panels(&mut f, t, t + h, 1, tol * scale * h / length.max(1.0), 32);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Precision(format!("non-finite integrand on {q} at chunk {chunks}")));
        }
        value += v;
        err += e;
        t += h;
        remaining -= h;
        chunks += 1;
        let z = geo.z(t);
        if z.im < REDUCE_BELOW {
            let (z2, gam, _) = gamma0_reduce(z, n)?;
            let q2 = geo.q.act(&mat_inv(&gam));
            geo = Geodesic::new(q2);
            t = geo.param(z2);
        }
    }
    if err > tol * scale.max(value.norm()) * 10.0 {
        return Err(Error::Precision(format!(
            "quadrature on {q} did not converge: estimate {err:e} over {chunks} chunks"
        )));
    }
    Ok(CycleIntegral { form: *q, level: n, value, error_bound: err + 1e-14 * scale * length, length })
}

/// Roots of a form with square discriminant as (first, second), None meaning infinity.
fn rational_roots(q: &Bqf) -> (Option<(i64, i64)>, Option<(i64, i64)>) {
    let f = isqrt(q.disc() as u64) as i64;
    let frac = |num: i64, den: i64| {
        let g = gcd(num, den);
        let s = if den < 0 { -1 } else { 1 };
        (s * num / g, s * den / g)
    };
    if q.a == 0 {
        let r = Some(frac(-q.c, q.b));
        if q.b > 0 {
            (r, None)
        } else {
            (None, r)
        }
    } else {
        (Some(frac(-q.b + f, 2 * q.a)), Some(frac(-q.b - f, 2 * q.a)))
    }
}

/// Level one only: move the second root to infinity and integrate up the vertical line.
fn square_cycle_integral(g: &dyn Evaluable, q: &Bqf, k: i32, tol: f64) -> Result<CycleIntegral> {
    if g.level() != 1 {
        return invalid("square discriminants are supported at level 1 only");
    }
    let f = isqrt(q.disc() as u64) as i64;
    let q1 = match rational_roots(q).1 {
        None => *q,
        Some((p, r)) => {
            let e = (-p).extended_gcd(&r);
            // sends p/r to infinity
            let gam = [[e.x, -e.y], [r, -p]];
            q.act(&mat_inv(&gam))
        }
    };
    if q1.a != 0 || q1.b != f {
        return Err(Error::Check(format!("failed to normalise {q} to [0, {f}, C]")));
    }
    let x0 = -(q1.c as f64) / f as f64;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let mut integrand = |s: f64| -> C64 {
        let y = s.exp();
        match g.eval(c(x0, y)) {
            Ok(v) => v * c(0.0, f as f64 * y).powi(k - 1) * c(0.0, y),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                c(f64::NAN, f64::NAN)
            }
        }
    };
    let lo = (0.002 / (f * f) as f64).ln();
    let hi = 12f64.ln();
    let mut scale: f64 = 0.0;
    for i in 0..=20 {
        scale = scale.max(integrand(lo + (hi - lo) * i as f64 / 20.0).norm());
    }
    let panels = ((hi - lo) / 0.5).ceil() as usize;
    let (value, err) = integrate_panels(&mut integrand, lo, hi, panels, tol * scale.max(1e-300), 32);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    Ok(CycleIntegral { form: *q, level: 1, value, error_bound: err + 1e-14 * scale, length: f64::INFINITY })
}

/// Forms of discriminant D >= 1 with N | a, one per Gamma0(N)-class.
pub fn level_classes(d: i64, n: u64) -> Result<Vec<Bqf>> {
    if is_square(d) {
        if n != 1 {
            return invalid("square discriminants are supported at level 1 only");
        }
        let f = isqrt(d as u64) as i64;
        return Ok((0..f).map(|cc| Bqf::new(0, f, cc)).collect());
    }
    let mut v = gamma0_classes(d, n as i64)?;
    v.sort();
    Ok(v)
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistedTrace {
    pub m: u64,
    pub twist: i64,
    pub value: C64,
    pub error_bound: f64,
    pub classes: usize,
}

fn check_twist(k: i32, delta: i64) -> Result<()> {
    if !is_fundamental(delta) && delta != 1 {
        return invalid(format!("{delta} is not a fundamental discriminant"));
    }
    if (delta > 0) != (k % 2 == 0) {
        return invalid(format!("twist {delta} has the wrong sign for k = {k}"));
    }
    Ok(())
}

/// (-1)^{k-1} |Delta|^{(1-k)/2} sum over Gamma0(N)-classes of discriminant |Delta| m
/// of chi_Delta(Q) times the cycle integral of Q.
pub fn twisted_trace(g: &dyn Evaluable, delta: i64, m: u64, tol: f64) -> Result<TwistedTrace> {
    let k = weight_k(g)?;
    check_twist(k, delta)?;
    let n = g.level();
    let sm = if k % 2 == 0 { m as i64 } else { -(m as i64) };
    if m == 0 || !matches!(sm.rem_euclid(4), 0 | 1) {
        return Ok(TwistedTrace { m, twist: delta, value: c(0.0, 0.0), error_bound: 0.0, classes: 0 });
    }
    let d = delta.abs() * m as i64;
    let forms = level_classes(d, n)?;
    let mut value = c(0.0, 0.0);
    let mut err = 0.0;
    for q in &forms {
        let chi = genus_char(delta, q)?;
        if chi == 0 {
            continue;
        }
        let ci = cycle_integral(g, q, tol)?;
        value += ci.value * chi as f64;
        err += ci.error_bound;
    }
    let pre = (if k % 2 == 1 { 1.0 } else { -1.0 }) * (delta.abs() as f64).powf((1.0 - k as f64) / 2.0);
    Ok(TwistedTrace { m, twist: delta, value: value * pre, error_bound: err * pre.abs(), classes: forms.len() })
}

/// t(m1)/t(m2) = c(m1)/c(m2) for the plus-space form attached to g.
pub fn shintani_coeff_ratio(g: &dyn Evaluable, delta: i64, m1: u64, m2: u64, tol: f64) -> Result<(C64, f64)> {
    let a = twisted_trace(g, delta, m1, tol)?;
    let b = if m1 == m2 { a.clone() } else { twisted_trace(g, delta, m2, tol)? };
    if b.value.norm() <= 100.0 * b.error_bound.max(1e-300) {
        return Err(Error::Check(format!("twisted trace at m = {m2} is numerically zero")));
    }
    let r = a.value / b.value;
    let err = (a.error_bound + r.norm() * b.error_bound) / b.value.norm();
    Ok((r, err))
}

/// Predicted c(p^2 m)/c(m) from the plus-space Hecke relation, p odd and p^2 not dividing m.
pub fn hecke_ratio_prediction(ap: i64, p: u64, k: i32, m: u64) -> Result<f64> {
    if p % 2 == 0 || (m % (p * p)) == 0 {
        return invalid("prediction needs odd p with p^2 not dividing m");
    }
    let sm = if k % 2 == 0 { m as i64 } else { -(m as i64) };
    Ok(ap as f64 - (p as f64).powi(k - 1) * kronecker(sm, p as i64) as f64)
}
