//! Higher Green functions, CM cycles on X0(N)^2, and certified norms of
//! hauptmodul differences over those cycles.

#![allow(non_snake_case)]

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rug::Float;
use serde::Serialize;
use std::f64::consts::PI;

use crate::bqf::{class_group, genus_char, heegner_points, Bqf, HeegnerPoint};
use crate::error::{invalid, Error, Result};
use crate::mp::{to_decimal, Mpc};
use crate::numtheory::{factor_big, heegner_condition, is_fundamental, is_squarefree, prime_divisors};
use crate::qexp::{hauptmodul_mp, j_mp};
use crate::special::{c, gl_panel, C64};

/// Levels with a built-in hauptmodul usable for CM norms (1 means j).
pub const NORM_LEVELS: [u64; 5] = [1, 3, 5, 7, 13];

/// Q_{s-1}(t) = int_0^inf (t + sqrt(t^2-1) cosh v)^{-s} dv for t > 1.
pub fn legendre_Q(s: C64, t: f64) -> Result<C64> {
    if !(t > 1.0) || !t.is_finite() {
        return invalid(format!("Legendre Q needs t > 1, got {t}"));
    }
    if !(s.re > 0.0) {
        return invalid("Legendre Q integral needs Re(s) > 0");
    }
    let r = (t * t - 1.0).sqrt();
    // Past vmax the integrand is (r e^v / 2)^{-s} (1 + O(e^{-2v})) and the tail is summed exactly.
    let vmax = (2.0 * t / r).ln().max(0.0) + 40.0 / s.re;
    let mut f = |v: f64| c(t + r * v.cosh(), 0.0).powc(-s);
    let panels = ((vmax * (2.0 + s.norm())).ceil() as usize).max(8);
    let h = vmax / panels as f64;
    let mut total = c(0.0, 0.0);
    for i in 0..panels {
        total += gl_panel(&mut f, h * i as f64, h * (i + 1) as f64, 16);
    }
    let tail = c(r * vmax.cosh() + t, 0.0).powc(-s) / s;
    Ok(total + tail)
}

/// cosh of the hyperbolic distance.
pub fn cosh_dist(z1: C64, z2: C64) -> f64 {
    1.0 + (z1 - z2).norm_sqr() / (2.0 * z1.im * z2.im)
}

fn check_upper(z: C64) -> Result<()> {
    if !(z.im > 0.0) || !z.re.is_finite() {
        return invalid(format!("{z} is not in the upper half-plane"));
    }
    Ok(())
}

/// Points closer than this (in cosh d - 1) count as the diagonal.
const SINGULAR: f64 = 1e-9;

/// g_s(z1, z2) = -2 Q_{s-1}(cosh d(z1, z2)).
pub fn green_g(s: C64, z1: C64, z2: C64) -> Result<C64> {
    check_upper(z1)?;
    check_upper(z2)?;
    let t = cosh_dist(z1, z2);
    if t - 1.0 < SINGULAR {
        return invalid(format!("points {z1} and {z2} are too close"));
    }
    Ok(legendre_Q(s, t)? * -2.0)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GreenValue {
    pub value: C64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Elements of Gamma0(n)/{+-1} moving z2 to within cosh-distance `cutoff` of z1.
fn translates_within(n: u64, z1: C64, z2: C64, cutoff: f64) -> Vec<C64> {
    let n = n as i64;
    let mut out = Vec::new();
    let (x2, y2) = (z2.re, z2.im);
    let cmax = (2.0 * cutoff / (z1.im * y2)).sqrt().floor() as i64;
    for cc in (0..=cmax).filter(|cc| cc % n == 0) {
        // |c z2 + d|^2 <= 2 cutoff y2 / y1 bounds d for fixed c.
        let rad2 = 2.0 * cutoff * y2 / z1.im - (cc as f64 * y2).powi(2);
        if rad2 < 0.0 {
            continue;
        }
        let rad = rad2.sqrt();
        let (dlo, dhi) = if cc == 0 {
            (1, 1)
        } else {
            ((-(cc as f64) * x2 - rad).ceil() as i64, (-(cc as f64) * x2 + rad).floor() as i64)
        };
        for d in dlo..=dhi {
            if cc.gcd(&d) != 1 {
                continue;
            }
            let (a, b) = if cc == 0 {
                (1, 0)
            } else {
                let e = d.extended_gcd(&cc);
                (e.x, -e.y)
            };
            let w = (z2 * a as f64 + b as f64) / (z2 * cc as f64 + d as f64);
            // cosh d - 1 = ((dx)^2 + (dy)^2) / (2 y1 y'), solved for the shift m.
            let span2 = 2.0 * z1.im * w.im * (cutoff - 1.0) - (z1.im - w.im).powi(2);
            if span2 < 0.0 {
                continue;
            }
            let span = span2.sqrt();
            let mlo = (z1.re - w.re - span).ceil() as i64;
            let mhi = (z1.re - w.re + span).floor() as i64;
            for m in mlo..=mhi {
                out.push(w + m as f64);
            }
        }
    }
    out
}

/// G^N_s(z1, z2) = sum over Gamma0(N)/{+-1} of g_s(z1, gamma z2), truncated at
/// cosh d <= cutoff, with an estimate of the omitted terms.
pub fn green_GN(s: C64, n: u64, z1: C64, z2: C64, cutoff: f64) -> Result<GreenValue> {
    check_upper(z1)?;
    check_upper(z2)?;
    if n == 0 {
        return invalid("level must be positive");
    }
    if !(s.re > 1.0) {
        return invalid("the averaged Green function needs Re(s) > 1");
    }
    if !(cutoff > 2.0) {
        return invalid("cutoff must exceed 2");
    }
    let pts = translates_within(n, z1, z2, cutoff);
    let mut value = c(0.0, 0.0);
    for w in &pts {
        let t = cosh_dist(z1, *w);
        if t - 1.0 < SINGULAR {
            return invalid(format!("{z1} and {z2} are Gamma0({n})-equivalent up to {:.1e}", t - 1.0));
        }
        value += legendre_Q(s, t)? * -2.0;
    }
    // Lattice points with cosh d <= T number about 2 pi (T - 1) / vol, and
    // |Q_{s-1}(t)| <= |Q_{s-1}(T)| (T/t)^{Re s} past T.
    let index: f64 = n as f64 * prime_divisors(n).iter().map(|&p| 1.0 + 1.0 / p as f64).product::<f64>();
    let vol = PI / 3.0 * index;
    let q = legendre_Q(c(s.re, 0.0), cutoff)?.re;
    let tail_bound = 3.0 * 2.0 * (2.0 * PI / vol) * q * cutoff / (s.re - 1.0);
    Ok(GreenValue { value, tail_bound, terms: pts.len() })
}

/// Hecke images z -> (a z + b)/d with ad = m, gcd(a, N) = 1, 0 <= b < d.
pub fn hecke_points(m: u64, n: u64, z: C64) -> Vec<C64> {
    let mut out = Vec::new();
    for a in 1..=m {
        if m % a != 0 || (a as i64).gcd(&(n as i64)) != 1 {
            continue;
        }
        let d = m / a;
        for b in 0..d {
            out.push((z * a as f64 + b as f64) / d as f64);
        }
    }
    out
}

/// Which variable the Hecke operators act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeckeSide {
    First,
    Second,
}

/// sum_m c(-m) m^{k-1} (T_m G^N_k)(z1, z2) for a principal part {(m, c(-m))}.
pub fn green_Gkf_side(
    k: u32,
    principal: &[(u64, i64)],
    n: u64,
    z1: C64,
    z2: C64,
    cutoff: f64,
    side: HeckeSide,
) -> Result<GreenValue> {
    if k < 2 {
        return invalid("green_Gkf needs k > 1");
    }
    let s = c(k as f64, 0.0);
    let mut value = c(0.0, 0.0);
    let mut tail = 0.0;
    let mut terms = 0;
    for &(m, cm) in principal {
        if m == 0 || cm < 0 {
            return invalid("principal part needs m > 0 and c(-m) >= 0");
        }
        if (m as i64).gcd(&(n as i64)) != 1 {
            return invalid(format!("Hecke index {m} must be coprime to N = {n}"));
        }
        if cm == 0 {
            continue;
        }
        let w = cm as f64 * (m as f64).powi(k as i32 - 1);
        let pts = match side {
            HeckeSide::Second => hecke_points(m, n, z2),
            HeckeSide::First => hecke_points(m, n, z1),
        };
        for p in pts {
            let g = match side {
                HeckeSide::Second => green_GN(s, n, z1, p, cutoff),
                HeckeSide::First => green_GN(s, n, p, z2, cutoff),
            }
            .map_err(|e| Error::Invalid(format!("singular locus: {e}")))?;
            value += g.value * w;
            tail += g.tail_bound * w;
            terms += g.terms;
        }
    }
    Ok(GreenValue { value, tail_bound: tail, terms })
}

pub fn green_Gkf(k: u32, principal: &[(u64, i64)], n: u64, z1: C64, z2: C64, cutoff: f64) -> Result<GreenValue> {
    green_Gkf_side(k, principal, n, z1, z2, cutoff, HeckeSide::Second)
}

/// One pair of Heegner points in a CM cycle.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CyclePair {
    pub first: HeegnerPoint,
    pub second: HeegnerPoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct CMCycle {
    pub d1: i64,
    pub d2: i64,
    pub level: u64,
    /// Admissible (class of D1, class of D2) index pairs.
    pub class_pairs: Vec<(usize, usize)>,
    pub pairs: Vec<CyclePair>,
    /// [H : K] computed as the number of admissible class pairs.
    pub gal_h_k: usize,
    /// [H : Q] from the degrees of the two Hilbert class fields and their intersection.
    pub gal_h_q: usize,
}

fn conj_point(p: &HeegnerPoint) -> HeegnerPoint {
    HeegnerPoint { form: Bqf::new(p.form.a, -p.form.b, p.form.c), level: p.level }
}

/// The prime discriminant p* = (-1)^{(p-1)/2} p of an odd prime.
fn prime_disc(p: u64) -> i64 {
    if p % 4 == 1 {
        p as i64
    } else {
        -(p as i64)
    }
}

pub fn cm_cycle(d1: i64, d2: i64, n: u64) -> Result<CMCycle> {
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
    for d in [d1, d2] {
        if !heegner_condition(d, n)? {
            return invalid(format!("Heegner condition fails for D = {d}, N = {n}"));
        }
    }
    let d0 = d1.abs().gcd(&d2.abs()) as u64;
    let cl1 = class_group(d1)?;
    let cl2 = class_group(d2)?;
    let h1 = heegner_points(d1, n as i64)?;
    let h2 = heegner_points(d2, n as i64)?;
    let primes = prime_divisors(d0);
    let chars1: Vec<Vec<i32>> =
        cl1.forms.iter().map(|f| primes.iter().map(|&p| genus_char(prime_disc(p), f)).collect()).collect::<Result<_>>()?;
    let chars2: Vec<Vec<i32>> =
        cl2.forms.iter().map(|f| primes.iter().map(|&p| genus_char(prime_disc(p), f)).collect()).collect::<Result<_>>()?;
    let mut class_pairs = Vec::new();
    for i in 0..cl1.order() {
        for j in 0..cl2.order() {
            if chars1[i] == chars2[j] {
                class_pairs.push((i, j));
            }
        }
    }
    let mut pairs = Vec::with_capacity(4 * class_pairs.len());
    for &(i, j) in &class_pairs {
        let (p, q) = (h1[i], h2[j]);
        let (pc, qc) = (conj_point(&p), conj_point(&q));
        pairs.push(CyclePair { first: p, second: q });
        pairs.push(CyclePair { first: pc, second: qc });
        pairs.push(CyclePair { first: pc, second: q });
        pairs.push(CyclePair { first: p, second: qc });
    }
    let gal_h_q = 4 * cl1.order() * cl2.order() >> primes.len();
    Ok(CMCycle { d1, d2, level: n, gal_h_k: class_pairs.len(), gal_h_q, class_pairs, pairs })
}

/// tau = (-b + sqrt(D)) / (2a) at the given precision.
pub fn heegner_tau_mp(f: &Bqf, prec: u32) -> Mpc {
    let a2 = Float::with_val(prec, 2 * f.a);
    let re = Float::with_val(prec, -f.b) / &a2;
    let im = Float::with_val(prec, -f.disc()).sqrt() / &a2;
    Mpc::new(re, im)
}

fn hauptmodul_value(n: u64, tau: &Mpc) -> Result<Mpc> {
    if n == 1 {
        j_mp(tau)
    } else {
        hauptmodul_mp(n, tau)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormCertificate {
    pub level: u64,
    pub d1: i64,
    pub d2: i64,
    pub cycle_size: usize,
    pub precision: u32,
    /// Natural log of the absolute value of the product.
    pub product_log: f64,
    pub product: String,
    pub imaginary_part: String,
    pub nearest_integer: String,
    pub distance: f64,
    /// (prime, exponent) with primes as decimal strings.
    pub factors: Vec<(String, u32)>,
    pub is_unit: bool,
}

fn cycle_product(n: u64, pairs: &[CyclePair], prec: u32) -> Result<Mpc> {
    let mut acc = Mpc::one(prec);
    for pr in pairs {
        let a = hauptmodul_value(n, &heegner_tau_mp(&pr.first.form, prec))?;
        let b = hauptmodul_value(n, &heegner_tau_mp(&pr.second.form, prec))?;
        acc = &acc * &(&a - &b);
    }
    Ok(acc)
}

fn float_to_bigint(x: &Float) -> Result<BigInt> {
    let i = x
        .to_integer()
        .ok_or_else(|| Error::Precision("product is not finite".into()))?;
    i.to_string().parse::<BigInt>().map_err(|e| Error::Check(format!("integer conversion: {e}")))
}

/// Certify the product over an explicit list of pairs at a fixed precision.
pub fn certify_pairs(n: u64, d1: i64, d2: i64, pairs: &[CyclePair], prec: u32) -> Result<NormCertificate> {
    if !NORM_LEVELS.contains(&n) {
        return invalid(format!("no hauptmodul for level {n}; supported levels are {NORM_LEVELS:?}"));
    }
    let prod = cycle_product(n, pairs, prec)?;
    let nearest = prod.re.clone().round();
    let dist_re = Float::with_val(prec, &prod.re - &nearest).abs();
    let dist = Float::with_val(prec, dist_re.clone().hypot(&prod.im));
    let tol = (2f64).powf(-(prec as f64) / 4.0);
    // Relative to the size of the integer, the last quarter of the bits must agree.
    let scale = prod.abs().to_f64().max(1.0);
    if dist.to_f64() > tol * scale {
        return Err(Error::Precision(format!(
            "product {} is {:.3e} away from an integer at {prec} bits",
            to_decimal(&prod.re, 30),
            dist.to_f64()
        )));
    }
    let m = float_to_bigint(&nearest)?;
    let factors = if m.is_zero() {
        Vec::new()
    } else {
        let mag: BigUint = m.abs().to_biguint().expect("non-negative");
        factor_big(&mag).into_iter().map(|(p, e)| (p.to_string(), e)).collect()
    };
    let digits = (prec as f64 * std::f64::consts::LOG10_2).floor() as usize;
    let absval = prod.abs();
    Ok(NormCertificate {
        level: n,
        d1,
        d2,
        cycle_size: pairs.len(),
        precision: prec,
        product_log: if absval.is_zero() { f64::NEG_INFINITY } else { absval.ln().to_f64() },
        product: to_decimal(&prod.re, digits),
        imaginary_part: to_decimal(&prod.im, 6),
        is_unit: m.magnitude().to_u64() == Some(1) && m.sign() != Sign::NoSign,
        nearest_integer: m.to_string(),
        distance: dist.to_f64(),
        factors,
    })
}

/// Norm of pi_N(tau1) - pi_N(tau2) over the CM cycle, with precision chosen
/// from a first low-precision pass.
pub fn cm_norm(n: u64, d1: i64, d2: i64, prec: u32) -> Result<NormCertificate> {
    if !NORM_LEVELS.contains(&n) {
        return invalid(format!("no hauptmodul for level {n}; supported levels are {NORM_LEVELS:?}"));
    }
    let cycle = cm_cycle(d1, d2, n)?;
    let rough = cycle_product(n, &cycle.pairs, 128)?;
    let bits = rough.log2_abs().max(0.0);
    let mut p = prec.max(2 * (bits.ceil() as u32 + 64));
    let mut last = None;
    for _ in 0..3 {
        match certify_pairs(n, d1, d2, &cycle.pairs, p) {
            Ok(c) => return Ok(c),
            Err(Error::Precision(m)) => {
                last = Some(m);
                p *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Precision(last.unwrap_or_default()))
}
