//! Newforms, numerical evaluation with reduction, and the trace operator.

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::eta::eta_quotient;
use super::{eta_product_series, QExpansion};
use crate::bqf::{mat_mul, p1_normalize, projective_line, Mat2, IDENTITY};
use crate::error::{invalid, Error, Result};
use crate::numtheory::{factor_u64, gcd, inv_mod, is_squarefree};
use crate::special::{c, C64};

/// A holomorphic modular form on Gamma0(level) that can be evaluated anywhere in H.
pub trait Evaluable {
    /// Twice the weight.
    fn weight2(&self) -> i64;
    fn level(&self) -> u64;
    fn eval(&self, tau: C64) -> Result<C64>;
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Evaluation {
    pub value: C64,
    pub error_bound: f64,
    /// Imaginary part of the point where the series was summed.
    pub height: f64,
}

fn act(g: &Mat2, tau: C64) -> C64 {
    (tau * g[0][0] as f64 + g[0][1] as f64) / (tau * g[1][0] as f64 + g[1][1] as f64)
}

fn j_factor(g: &Mat2, tau: C64) -> C64 {
    tau * g[1][0] as f64 + g[1][1] as f64
}

fn complete_row(cc: i64, d: i64) -> Mat2 {
    let e = d.extended_gcd(&cc);
    debug_assert_eq!(e.gcd, 1);
    [[e.x, -e.y], [cc, d]]
}

/// gamma in SL2(Z) with gamma tau in the fundamental domain, and j(gamma, tau)
/// accumulated stepwise.
fn reduce_sl2_factor(tau: C64) -> Result<(C64, Mat2, C64)> {
    let mut t = tau;
    let mut g = IDENTITY;
    let mut j = c(1.0, 0.0);
    for _ in 0..100_000 {
        let k = t.re.round();
        t.re -= k;
        g = mat_mul(&[[1, -(k as i64)], [0, 1]], &g);
        if t.norm_sqr() < 1.0 - 1e-13 {
            j *= t;
            t = -1.0 / t;
            g = mat_mul(&[[0, -1], [1, 0]], &g);
            if g.iter().flatten().any(|x| x.abs() > 1 << 40) {
                return Err(Error::Precision(format!("tau = {tau} is too close to the real axis")));
            }
        } else {
            return Ok((t, g, j));
        }
    }
    invalid(format!("reduction of {tau} did not terminate"))
}

/// Representatives of Gamma0(n) \ SL2(Z), one for each point of P^1(Z/n).
pub fn gamma0_coset_reps(n: u64) -> Vec<Mat2> {
    if n == 1 {
        return vec![IDENTITY];
    }
    let ni = n as i64;
    projective_line(ni).into_iter().map(|(x, y)| small_row_lift(x, y, 1, ni)).collect()
}

/// A small matrix in SL2(Z) with bottom row (cmul x', y') where (x' : y') = (x : y) in P^1(Z/n).
fn small_row_lift(x: i64, y: i64, cmul: i64, n: i64) -> Mat2 {
    let mut best: Option<(i64, Mat2)> = None;
    for u in 1..n.max(2) {
        if gcd(u, n) != 1 {
            continue;
        }
        let (x0, y0) = ((u * x).rem_euclid(n), (u * y).rem_euclid(n));
        for s in -2..=2 {
            for t in -2..=2 {
                let cc = cmul * (x0 + s * n);
                let d = y0 + t * n;
                if (cc, d) == (0, 0) || gcd(cc, d) != 1 {
                    continue;
                }
                let size = cc.abs() + d.abs();
                if best.as_ref().map_or(true, |(b, _)| size < *b) {
                    best = Some((size, complete_row(cc, d)));
                }
            }
        }
    }
    best.expect("a coprime lift exists").1
}

fn coset_index(g: &Mat2, n: i64) -> (i64, i64) {
    p1_normalize(g[1][0], g[1][1], n)
}

/// gamma in Gamma0(n) with Im(gamma tau) maximal, and j(gamma, tau).
pub fn gamma0_reduce(tau: C64, n: u64) -> Result<(C64, Mat2, C64)> {
    if !(tau.im > 0.0) {
        return invalid(format!("tau = {tau} is not in the upper half-plane"));
    }
    let (tf, g, jg) = reduce_sl2_factor(tau)?;
    let ni = n as i64;
    let (mut t, mut gam, mut jac) = if n == 1 {
        (tf, g, jg)
    } else {
        // g^{-1} lies in Gamma0(n) r for the coset rep r, so r g is in Gamma0(n)
        let ginv = crate::bqf::mat_inv(&g);
        let key = coset_index(&ginv, ni);
        let r = gamma0_coset_reps(n)
            .into_iter()
            .find(|r| coset_index(r, ni) == key)
            .expect("coset representative");
        (act(&r, tf), mat_mul(&r, &g), j_factor(&r, tf) * jg)
    };
    // local improvement
    for _ in 0..1000 {
        let k = t.re.round();
        t.re -= k;
        gam = mat_mul(&[[1, -(k as i64)], [0, 1]], &gam);
        let cmax = (1.0 / t.im).floor() as i64;
        let mut best: Option<(f64, i64, i64)> = None;
        let mut cc = ni;
        while cc <= cmax {
            let centre = -(cc as f64) * t.re;
            for d in [centre.floor() as i64, centre.ceil() as i64] {
                if gcd(cc, d) != 1 {
                    continue;
                }
                let m = (t * cc as f64 + d as f64).norm_sqr();
                if m < 1.0 - 1e-12 && best.map_or(true, |(b, _, _)| m < b) {
                    best = Some((m, cc, d));
                }
            }
            cc += ni;
        }
        match best {
            None => return Ok((t, gam, jac)),
            Some((_, cc, d)) => {
                let h = complete_row(cc, d);
                jac *= j_factor(&h, t);
                t = act(&h, t);
                gam = mat_mul(&h, &gam);
            }
        }
    }
    invalid("Gamma0 reduction did not terminate")
}

/// Numerical values of a q-series with a crude tail bound |a_n| <= C n^w.
struct SeriesEval<'a> {
    coeffs: &'a [f64],
    start: i64,
    weight2: i64,
}

impl SeriesEval<'_> {
    fn sum(&self, tau: C64) -> (C64, f64) {
        let q = (c(0.0, 2.0 * PI) * tau).exp();
        let mut s = c(0.0, 0.0);
        let mut p = q.powi(self.start as i32);
        for a in self.coeffs {
            if *a != 0.0 {
                s += p * *a;
            }
            p *= q;
        }
        let w = self.weight2 as f64 / 2.0;
        let mut cbound: f64 = 0.0;
        for (i, a) in self.coeffs.iter().enumerate() {
            let n = (self.start + i as i64).max(1) as f64;
            cbound = cbound.max(a.abs() / n.powf(w));
        }
        let mut tail = 0.0;
        let r = (-2.0 * PI * tau.im).exp();
        let mut n = self.start + self.coeffs.len() as i64;
        loop {
            let nn = n.max(1) as f64;
            let term = cbound * nn.powf(w) * r.powf(nn);
            tail += term;
            if term < 1e-30 * (tail + s.norm()) || n > 1_000_000 {
                break;
            }
            n += 1;
        }
        (s, tail)
    }
}

fn eval_with_reduction(
    coeffs: &[f64],
    start: i64,
    weight2: i64,
    level: u64,
    fricke: Option<i8>,
    tau: C64,
) -> Result<Evaluation> {
    if weight2 % 2 != 0 {
        return invalid("series evaluation needs integral weight");
    }
    let w = (weight2 / 2) as i32;
    let series = SeriesEval { coeffs, start, weight2 };
    let (t, _, jac) = gamma0_reduce(tau, level)?;
    let mut best = (t, jac.powi(-w), t.im);
    if let (Some(eps), true) = (fricke, level > 1 && t.im < 0.4) {
        // G(t) = eps N^{-w/2} t^{-w} G(-1/(N t))
        let u = -1.0 / (t * level as f64);
        let (u2, _, jac2) = gamma0_reduce(u, level)?;
        if u2.im > best.2 {
            let f = jac.powi(-w) * eps as f64 * (level as f64).powf(-(w as f64) / 2.0) * t.powi(-w) * jac2.powi(-w);
            best = (u2, f, u2.im);
        }
    }
    let (s, tail) = series.sum(best.0);
    let value = best.1 * s;
    let error_bound = best.1.norm() * tail;
    if best.2 < 0.4 && error_bound > 1e-8 * value.norm().max(1e-300) {
        return Err(Error::Precision(format!(
            "reduction reached only Im = {:.4}; truncation error {error_bound:e} too large",
            best.2
        )));
    }
    Ok(Evaluation { value, error_bound, height: best.2 })
}

/// Evaluate an integral-weight holomorphic q-expansion on Gamma0(level) at tau.
pub fn evaluate_series(f: &QExpansion, tau: C64) -> Result<Evaluation> {
    if f.den != 1 {
        return invalid("series evaluation needs integral exponents");
    }
    if f.valuation().map_or(false, |v| v < 0) {
        return invalid("series evaluation needs a holomorphic expansion");
    }
    let coeffs: Vec<f64> = f.coeffs.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
    eval_with_reduction(&coeffs, f.start, f.weight2, f.level, None, tau)
}

/// A Hecke newform given by its eigenvalues a(1..=bound).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Newform {
    pub level: u64,
    /// The weight 2k.
    pub weight: i64,
    pub coeffs: Vec<i64>,
    #[serde(default)]
    pub fricke: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_exponents: Option<BTreeMap<u64, i64>>,
}

impl Newform {
    fn from_eta(level: u64, weight: i64, exps: BTreeMap<u64, i64>, fricke: i8, bound: usize) -> Newform {
        let series = eta_product_series(&exps, bound);
        let coeffs = series.iter().map(|x| x.to_i64().expect("coefficient fits in i64")).collect();
        Newform { level, weight, coeffs, fricke: Some(fricke), eta_exponents: Some(exps) }
    }

    /// Delta, level 1 and weight 12.
    pub fn delta(bound: usize) -> Newform {
        Newform::from_eta(1, 12, BTreeMap::from([(1, 24)]), 1, bound)
    }

    /// eta(z)^6 eta(3z)^6, level 3 and weight 6.
    pub fn eta6_eta3_6(bound: usize) -> Newform {
        Newform::from_eta(3, 6, BTreeMap::from([(1, 6), (3, 6)]), -1, bound)
    }

    pub fn builtin(name: &str, bound: usize) -> Result<Newform> {
        match name {
            "delta" | "Delta" => Ok(Newform::delta(bound)),
            "eta6" | "eta6_eta3_6" | "3.6" => Ok(Newform::eta6_eta3_6(bound)),
            _ => invalid(format!("unknown built-in newform '{name}'")),
        }
    }

    pub fn from_json(text: &str) -> Result<Newform> {
        let f: Newform = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("newform JSON: {e}")))?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn bound(&self) -> usize {
        self.coeffs.len()
    }

    /// a(n) for 1 <= n <= bound.
    pub fn a(&self, n: u64) -> Option<i64> {
        if n == 0 {
            return None;
        }
        self.coeffs.get(n as usize - 1).copied()
    }

    pub fn k(&self) -> i64 {
        self.weight / 2
    }

    /// Check the eigenform relations on all available coefficients.
    pub fn validate(&self) -> Result<()> {
        if self.level == 0 || self.weight <= 0 || self.weight % 2 != 0 {
            return invalid("newform needs positive level and positive even weight");
        }
        if let Some(e) = self.fricke {
            if e != 1 && e != -1 {
                return invalid("fricke must be 1, -1 or null");
            }
        }
        if self.a(1) != Some(1) {
            return invalid("newform must have a(1) = 1");
        }
        let b = self.bound() as u64;
        let a = |n: u64| self.a(n).expect("in range") as i128;
        for m in 2..=b {
            for n in m + 1..=b / m {
                if gcd(m as i64, n as i64) == 1 && a(m * n) != a(m) * a(n) {
                    return Err(Error::Check(format!("a({}) != a({m}) a({n})", m * n)));
                }
            }
        }
        for (p, _) in (2..=b).filter_map(|p| factor_u64(p).first().copied().filter(|&(q, e)| q == p && e == 1)) {
            if self.level % p == 0 {
                continue;
            }
            let pk = (p as i128).pow((self.weight - 1) as u32);
            let mut prev = 1u64;
            let mut cur = p;
            while cur.checked_mul(p).map_or(false, |x| x <= b) {
                let next = cur * p;
                if a(next) != a(p) * a(cur) - pk * a(prev) {
                    return Err(Error::Check(format!("Hecke recurrence fails at a({next})")));
                }
                prev = cur;
                cur = next;
            }
        }
        Ok(())
    }

    pub fn qexp(&self) -> QExpansion {
        let coeffs: Vec<num_bigint::BigInt> =
            std::iter::once(num_bigint::BigInt::zero()).chain(self.coeffs.iter().map(|&x| x.into())).collect();
        QExpansion::from_integers(2 * self.weight, self.level, 0, &coeffs)
    }

    /// Value together with the truncation bound.
    pub fn evaluate(&self, tau: C64) -> Result<Evaluation> {
        if let Some(exps) = &self.eta_exponents {
            return Ok(Evaluation { value: eta_quotient(exps, tau)?, error_bound: 0.0, height: tau.im });
        }
        let coeffs: Vec<f64> = std::iter::once(0.0).chain(self.coeffs.iter().map(|&x| x as f64)).collect();
        eval_with_reduction(&coeffs, 0, 2 * self.weight, self.level, self.fricke, tau)
    }
}

impl Evaluable for Newform {
    fn weight2(&self) -> i64 {
        2 * self.weight
    }
    fn level(&self) -> u64 {
        self.level
    }
    fn eval(&self, tau: C64) -> Result<C64> {
        Ok(self.evaluate(tau)?.value)
    }
}

impl Evaluable for QExpansion {
    fn weight2(&self) -> i64 {
        self.weight2
    }
    fn level(&self) -> u64 {
        self.level
    }
    fn eval(&self, tau: C64) -> Result<C64> {
        Ok(evaluate_series(self, tau)?.value)
    }
}

/// Fricke eigenvalue from G(-1/(N tau)) = eps N^{w/2} tau^w G(tau) at sample points.
pub fn fricke_eigenvalue(g: &dyn Evaluable) -> Result<i8> {
    let n = g.level() as f64;
    let w = (g.weight2() / 2) as i32;
    let mut found: Option<i8> = None;
    let mut used = 0;
    for tau in [c(0.1, 0.8), c(-0.23, 0.55), c(0.31, 0.47), c(0.05, 1.1)] {
        let lhs = g.eval(-1.0 / (tau * n))?;
        let rhs = g.eval(tau)? * n.powf(w as f64 / 2.0) * tau.powi(w);
        if rhs.norm() < 1e-12 * lhs.norm().max(1e-300) || rhs.norm() < 1e-280 {
            continue;
        }
        let r = lhs / rhs;
        let eps: i8 = if r.re >= 0.0 { 1 } else { -1 };
        if (r - eps as f64).norm() > 1e-6 {
            return Err(Error::Check(format!("Fricke ratio {r} is not +-1 at tau = {tau}")));
        }
        if found.map_or(false, |e| e != eps) {
            return Err(Error::Check("inconsistent Fricke sign across sample points".into()));
        }
        found = Some(eps);
        used += 1;
    }
    match (found, used >= 2) {
        (Some(e), true) => Ok(e),
        _ => Err(Error::Check("form too small at all sample points".into())),
    }
}

/// Fourier coefficients a(0..terms) obtained numerically, with an error estimate.
#[derive(Clone, Debug, Serialize)]
pub struct NumericSeries {
    pub level: u64,
    pub weight2: i64,
    pub coeffs: Vec<C64>,
    pub error_bound: f64,
}

/// Representatives of Gamma0(n) \ Gamma0(n') for squarefree n and n' | n.
fn trace_reps(n: u64, np: u64) -> Vec<Mat2> {
    let m = (n / np) as i64;
    if m == 1 {
        return vec![IDENTITY];
    }
    let npi = np as i64;
    let inv = inv_mod(npi.rem_euclid(m), m).expect("coprime for squarefree level");
    projective_line(m)
        .into_iter()
        .map(|(x, y)| small_row_lift((x * inv).rem_euclid(m), y, npi, m))
        .collect()
}

fn sample_coefficients<F: Fn(C64) -> Result<C64>>(f: &F, y0: f64, terms: usize) -> Result<Vec<C64>> {
    let ms = ((45.0 / (2.0 * PI * y0)).ceil() as usize).max(2 * terms + 8);
    let vals: Vec<C64> = (0..ms).map(|j| f(c(j as f64 / ms as f64, y0))).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(terms + 1);
    for n in 0..=terms {
        let mut s = c(0.0, 0.0);
        for (j, v) in vals.iter().enumerate() {
            let x = j as f64 / ms as f64;
            s += v * (c(0.0, -2.0 * PI * n as f64 * x)).exp();
        }
        out.push(s / ms as f64 * (2.0 * PI * n as f64 * y0).exp());
    }
    Ok(out)
}

/// Coset sum of f|gamma over Gamma0(N) \ Gamma0(N'), re-expanded numerically.
pub fn trace_down(f: &dyn Evaluable, np: u64, terms: usize, tol: f64) -> Result<NumericSeries> {
    let n = f.level();
    if np == 0 || n % np != 0 {
        return invalid(format!("{np} does not divide the level {n}"));
    }
    if !is_squarefree(n as i64) {
        return invalid(format!("level {n} is not squarefree"));
    }
    if f.weight2() % 2 != 0 {
        return invalid("trace needs integral weight");
    }
    let w = (f.weight2() / 2) as i32;
    let reps = trace_reps(n, np);
    let traced = |tau: C64| -> Result<C64> {
        let mut s = c(0.0, 0.0);
        for r in &reps {
            s += f.eval(act(r, tau))? * j_factor(r, tau).powi(-w);
        }
        Ok(s)
    };
    let y0 = (1.0 / terms.max(1) as f64).min(0.5);
    let a = sample_coefficients(&traced, y0, terms)?;
    let b = sample_coefficients(&traced, 1.25 * y0, terms)?;
    let scale = a.iter().map(|x| x.norm()).fold(0.0f64, f64::max).max(1e-300);
    let error_bound = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) + 1e-13 * scale;
    if error_bound > tol * scale.max(1.0) {
        return Err(Error::Precision(format!("trace sampling error {error_bound:e} exceeds tolerance")));
    }
    Ok(NumericSeries { level: np, weight2: f.weight2(), coeffs: a, error_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qexp::{delta, eta, EtaQuotient};

    fn sample_gamma0(n: i64, seed: i64) -> Mat2 {
        let cc = n * (1 + seed % 3);
        let mut d = 1 + 2 * seed;
        while gcd(cc, d) != 1 {
            d += 1;
        }
        complete_row(cc, d)
    }

    #[test]
    fn evaluate_matches_eta() {
        let d = delta(40);
        let tau = c(0.0, 1.0);
        let v = evaluate_series(&d, tau).unwrap();
        assert!((v.value - eta(tau).unwrap().powi(24)).norm() < 1e-12 * v.value.norm());
        let tau = c(0.1, 10.0);
        let direct = d.eval_direct(tau);
        let v = evaluate_series(&d, tau).unwrap().value;
        assert!((direct - v).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn evaluate_modularity() {
        let f = Newform::eta6_eta3_6(80);
        let generic = Newform { eta_exponents: None, ..f.clone() };
        for seed in 0..10 {
            let g = sample_gamma0(3, seed);
            let tau = c(0.11 + 0.07 * seed as f64, 0.35 + 0.05 * seed as f64);
            let lhs = generic.evaluate(act(&g, tau)).unwrap().value;
            let rhs = generic.evaluate(tau).unwrap().value * j_factor(&g, tau).powi(6);
            assert!((lhs - rhs).norm() < 1e-8 * rhs.norm(), "seed {seed}");
            let eta_v = f.eval(tau).unwrap();
            assert!((generic.eval(tau).unwrap() - eta_v).norm() < 1e-9 * eta_v.norm());
        }
        // far down towards the real axis
        let tau = c(0.3183, 0.003);
        let a = generic.eval(tau).unwrap();
        let b = f.eval(tau).unwrap();
        assert!((a - b).norm() < 1e-8 * b.norm().max(1e-300));
    }

    #[test]
    fn builtin_recurrences() {
        for f in [Newform::delta(200), Newform::eta6_eta3_6(200)] {
            f.validate().unwrap();
        }
        assert_eq!(Newform::delta(5).coeffs, vec![1, -24, 252, -1472, 4830]);
        assert_eq!(Newform::eta6_eta3_6(4).coeffs, vec![1, -6, 9, 4]);
        let mut bad = Newform::delta(20);
        bad.coeffs[5] += 1;
        assert!(bad.validate().is_err());
        let json = Newform::eta6_eta3_6(30).to_json();
        assert_eq!(Newform::from_json(&json).unwrap(), Newform::eta6_eta3_6(30));
        let raw = r#"{"level": 1, "weight": 12, "coeffs": [1, -24, 252], "fricke": null}"#;
        assert_eq!(Newform::from_json(raw).unwrap().fricke, None);
    }

    #[test]
    fn fricke_signs() {
        assert_eq!(fricke_eigenvalue(&Newform::delta(10)).unwrap(), 1);
        let f = Newform::eta6_eta3_6(10);
        assert_eq!(fricke_eigenvalue(&f).unwrap(), -1);
        assert_eq!(f.fricke, Some(-1));
    }

    #[test]
    fn trace_operator() {
        let f = Newform::eta6_eta3_6(10);
        let t = trace_down(&f, 1, 6, 1e-6).unwrap();
        assert!(t.coeffs.iter().all(|x| x.norm() < 1e-8), "{:?}", t.coeffs);
        let id = trace_down(&f, 3, 6, 1e-6).unwrap();
        for n in 1..=6 {
            assert!((id.coeffs[n].re - f.a(n as u64).unwrap() as f64).abs() < 1e-8);
        }
        // Delta(3z) traced to level one equals 3^{-11} T_3 Delta
        let v3 = EtaQuotient::new(BTreeMap::from([(3, 24)]), 3);
        let t = trace_down(&v3, 1, 5, 1e-6).unwrap();
        let d = Newform::delta(5);
        for n in 1..=5u64 {
            let want = 252.0 * d.a(n).unwrap() as f64 / 3f64.powi(11);
            assert!((t.coeffs[n as usize] - want).norm() < 1e-9, "n = {n}: {}", t.coeffs[n as usize]);
        }
        // Delta at level 3 traces to 4 Delta
        let d3 = EtaQuotient::new(BTreeMap::from([(1, 24)]), 3);
        let t = trace_down(&d3, 1, 4, 1e-6).unwrap();
        assert!((t.coeffs[2] - c(-96.0, 0.0)).norm() < 1e-8);
        assert!(trace_down(&f, 2, 4, 1e-6).is_err());
    }

    #[test]
    fn coset_reps_cover() {
        for n in [3u64, 5, 15] {
            let reps = gamma0_coset_reps(n);
            let idx: std::collections::BTreeSet<_> = reps.iter().map(|r| coset_index(r, n as i64)).collect();
            assert_eq!(idx.len(), reps.len());
            assert_eq!(reps.len() as u64, factor_u64(n).iter().map(|&(p, _)| p + 1).product::<u64>());
        }
    }
}
