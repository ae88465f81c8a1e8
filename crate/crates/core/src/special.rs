//! Double-precision special functions and Gauss-Legendre quadrature.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

pub type C64 = Complex64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// e(x) = exp(2 pi i x).
pub fn e2pi(x: f64) -> C64 {
    let t = 2.0 * PI * x.rem_euclid(1.0);
    c(t.cos(), t.sin())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// log Gamma(z) for complex z (Lanczos, with reflection for Re z < 1/2).
pub fn ln_gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let s = (z * PI).sin();
        return c(PI.ln(), 0.0) - s.ln() - ln_gamma(c(1.0, 0.0) - z);
    }
    // Shift into the region where the Lanczos sum is most accurate.
    if z.re < 8.0 {
        let mut acc = c(0.0, 0.0);
        let mut w = z;
        while w.re < 8.0 {
            acc += w.ln();
            w += 1.0;
        }
        return ln_gamma(w) - acc;
    }
    let z = z - 1.0;
    let mut x = c(LANCZOS[0], 0.0);
    for (i, &ci) in LANCZOS.iter().enumerate().skip(1) {
        x += ci / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    c(0.5 * (2.0 * PI).ln(), 0.0) + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: C64) -> C64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return c(f64::INFINITY, 0.0);
    }
    ln_gamma(z).exp()
}

/// 1/Gamma(z), entire.
pub fn rgamma(z: C64) -> C64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return c(0.0, 0.0);
    }
    (-ln_gamma(z)).exp()
}

/// Gamma_R(s) = pi^{-s/2} Gamma(s/2).
pub fn gamma_r(s: C64) -> C64 {
    (-(s / 2.0) * PI.ln()).exp() * gamma(s / 2.0)
}

fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static G16: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static G32: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match n {
        16 => G16.get_or_init(|| legendre_nodes(16)),
        32 => G32.get_or_init(|| legendre_nodes(32)),
        _ => panic!("unsupported Gauss-Legendre order {n}"),
    }
}

/// One Gauss-Legendre panel of order `n` on [a, b].
pub fn gl_panel<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64, n: usize) -> C64 {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let mut s = c(0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        s += f(m + h * xi) * *wi;
    }
    s * h
}

/// Adaptive Gauss-Legendre integration. Returns (value, error estimate).
pub fn integrate<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64, tol: f64) -> (C64, f64) {
    integrate_panels(f, a, b, 1, tol, 32)
}

/// Adaptive integration starting from `panels` equal panels of the given order.
pub fn integrate_panels<F: FnMut(f64) -> C64>(
    f: &mut F,
    a: f64,
    b: f64,
    panels: usize,
    tol: f64,
    order: usize,
) -> (C64, f64) {
    let h = (b - a) / panels as f64;
    let mut total = c(0.0, 0.0);
    let mut err = 0.0;
    let mut budget = 4000 * panels.max(1);
    for i in 0..panels {
        let lo = a + h * i as f64;
        let hi = if i + 1 == panels { b } else { lo + h };
        let whole = gl_panel(f, lo, hi, order);
        let (v, e) = adapt(f, lo, hi, whole, tol / panels as f64, order, &mut budget);
        total += v;
        err += e;
    }
    (total, err)
}

fn adapt<F: FnMut(f64) -> C64>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: C64,
    tol: f64,
    order: usize,
    budget: &mut usize,
) -> (C64, f64) {
    let m = 0.5 * (a + b);
    let left = gl_panel(f, a, m, order);
    let right = gl_panel(f, m, b, order);
    let both = left + right;
    let diff = (both - whole).norm();
    // Differences at the roundoff level cannot be reduced by splitting.
    let floor = 1e-14 * (left.norm() + right.norm());
    if diff <= tol.max(floor) || *budget == 0 {
        return (both, diff);
    }
    *budget -= 1;
    let (l, el) = adapt(f, a, m, left, tol / 2.0, order, budget);
    let (r, er) = adapt(f, m, b, right, tol / 2.0, order, budget);
    (l + r, el + er)
}

/// Upper incomplete gamma Gamma(a, x) for complex a and real x > 0, from
/// Gamma(a, x) = x^a int_0^inf exp(a v - x e^v) dv.
pub fn upper_gamma(a: C64, x: f64) -> C64 {
    assert!(x > 0.0, "upper_gamma needs x > 0");
    let lx = x.ln();
    let phase = |v: f64| a.re * v - x * v.exp();
    // Locate the maximum of the real exponent, then the cutoff past it.
    let vmax = if a.re > x { (a.re / x).ln() } else { 0.0 };
    let peak = phase(vmax);
    let mut vend = vmax + 1.0;
    while phase(vend) > peak - 60.0 {
        vend += 0.5;
    }
    let mut f = |v: f64| (a * v - x * v.exp() - peak).exp();
    let panels = ((vend * (1.0 + a.im.abs())) / 0.5).ceil().max(4.0) as usize;
    let (val, _) = integrate_panels(&mut f, 0.0, vend, panels, 1e-15, 16);
    val * (a * lx + peak).exp()
}
