//! Acceptance criteria as runnable checks.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

use crate::cmvalues::{cm_norm, green_GN, green_g, legendre_Q};
use crate::error::Result;
use crate::fqm::{
    build_phin, dist, fundamental_invariant_uk, isotypic_dimension, key2_bruteforce, norm, proportionality_residual, Fqm, QuadChar,
};
use crate::lfunc::{completed_Lambda_with, dirichlet_L, kohnen_series_check, modular_L_with, rankin_selberg_L};
use crate::qexp::{cohen_operator, delta, eisenstein, j_invariant, proportionality, Newform};
use crate::shintani::{hecke_ratio_prediction, shintani_coeff_ratio, twisted_trace};
use crate::special::{c, C64};

pub const CRITERIA: u32 = 11;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub fn title(id: u32) -> &'static str {
    match id {
        1 => "Weil representation relations",
        2 => "isotypic dimension and isotropic orbits",
        3 => "u_K invariance",
        4 => "invariant vector phi_N and H-perp",
        5 => "q-expansion oracles",
        6 => "cycle-integral Hecke equivariance",
        7 => "truncated Kohnen identity",
        8 => "Rankin-Selberg structure",
        9 => "Dirichlet and modular L machinery",
        10 => "CM norms",
        11 => "Green functions",
        _ => "unknown",
    }
}

struct Checks {
    ok: bool,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks { ok: true, notes: Vec::new() }
    }

    fn check(&mut self, cond: bool, note: impl Into<String>) {
        if !cond {
            self.ok = false;
            self.notes.push(format!("FAILED {}", note.into()));
        }
    }

    fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    fn time(&mut self, start: Instant, limit: f64) {
        let t = start.elapsed().as_secs_f64();
        self.check(t < limit, format!("runtime {t:.1}s exceeds {limit}s"));
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn c1(k: &mut Checks) -> Result<()> {
    let start = Instant::now();
    let a1 = || Fqm::new(vec![vec![num_rational::Rational64::new(1, 2)]], &[vec![2]]);
    let modules = vec![
        ("(Z/3)^2 hyperbolic", Fqm::hyperbolic(3)?),
        ("(Z/10)^2 hyperbolic", Fqm::hyperbolic(10)?),
        ("(Z/45)^2 hyperbolic", Fqm::hyperbolic(45)?),
        ("Sym2(F_3)", Fqm::sym2(3, 1)?),
        ("Sym2(F_5)", Fqm::sym2(5, 1)?),
        ("Sym2(F_7)", Fqm::sym2(7, 1)?),
        ("Sym2(F_11)", Fqm::sym2(11, 1)?),
        ("Z/7 with x^2 3/7", Fqm::cyclic(7, 3)?),
        ("A1 discriminant form", a1()?),
        ("Z/25 + A1", Fqm::cyclic(25, 2)?.direct_sum(&a1()?)?),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_g: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    for (name, m) in &modules {
        k.check(m.order() <= 10_000, format!("{name} too large"));
        let g = m.milgram_error();
        worst_g = worst_g.max(g);
        k.check(g < 1e-10, format!("{name}: Milgram error {g:.2e}"));
        for _ in 0..2 {
            let v = random_vector(&mut rng, m.order());
            let mut w = v.clone();
            for _ in 0..3 {
                w = m.weil_s(&m.weil_t(&w))?;
            }
            let s2 = m.weil_s(&m.weil_s(&v)?)?;
            let r = dist(&w, &s2) / norm(&v);
            worst_b = worst_b.max(r);
            k.check(r < 1e-10, format!("{name}: (ST)^3 = S^2 residual {r:.2e}"));
        }
    }
    k.note(format!("10 modules, max Milgram error {worst_g:.1e}, max (ST)^3 residual {worst_b:.1e}"));
    k.time(start, 30.0);
    Ok(())
}

fn c2(k: &mut Checks) -> Result<()> {
    let start = Instant::now();
    for p in [3i64, 5, 7] {
        let (dim, basis) = isotypic_dimension(p, QuadChar::Legendre)?;
        k.check(dim == 1, format!("p = {p}: isotypic dimension {dim}"));
        let delta = if p % 4 == 1 { p } else { -p };
        let (_, u) = fundamental_invariant_uk(delta)?;
        if let Some(b) = basis.first() {
            let r = proportionality_residual(b, &u);
            k.check(r < 1e-10, format!("p = {p}: basis vs u_K residual {r:.2e}"));
        }
        let rep = key2_bruteforce(p)?;
        k.check(rep.counterexamples.is_empty(), format!("p = {p}: {} counterexamples", rep.counterexamples.len()));
        k.note(format!("p={p}: dim {dim}, {} isotropic checked", rep.nonzero_isotropic));
    }
    k.time(start, 120.0);
    Ok(())
}

fn c3(k: &mut Checks) -> Result<()> {
    for d in [-3, -7, -11, -15] {
        let (s, u) = fundamental_invariant_uk(d)?;
        let m = &s.module;
        k.check(m.weil_t(&u) == u, format!("D = {d}: rho(T) u != u"));
        let r = dist(&m.weil_s(&u)?, &u) / norm(&u);
        k.check(r < 1e-10, format!("D = {d}: S residual {r:.2e}"));
        k.note(format!("D={d}: S residual {r:.1e}"));
    }
    Ok(())
}

fn c4(k: &mut Checks) -> Result<()> {
    for (d1, d2, n, limit) in [(-3i64, -4i64, 1i64, 60.0), (-7, -4, 1, 60.0), (-11, -8, 3, 1800.0)] {
        let start = Instant::now();
        let p = build_phin(d1, d2, n)?;
        let r = &p.report;
        let want = (n.pow(4) * d1.abs().pow(3) * d2 * d2) as u64;
        k.check(r.module_order as u64 == want, format!("({d1},{d2},{n}): |A| = {} != {want}", r.module_order));
        let want_h = (n * n * d2.abs()) as u64;
        k.check(r.h_order as u64 == want_h, format!("({d1},{d2},{n}): |H| = {} != {want_h}", r.h_order));
        k.check(r.h_isotropic, format!("({d1},{d2},{n}): H not isotropic"));
        k.check(
            r.hperp_order == r.h_order * r.image_order && r.image_meets_h_trivially && r.image_orthogonal_to_h,
            format!("({d1},{d2},{n}): H-perp is not H + im(iota)"),
        );
        k.check(r.iota_isometry, format!("({d1},{d2},{n}): iota is not an isometry"));
        let (s, t) = p.invariance_residuals()?;
        k.check(s < 1e-9 && t < 1e-9, format!("({d1},{d2},{n}): residuals S {s:.2e}, T {t:.2e}"));
        k.note(format!("({d1},{d2},{n}): |A|={}, |H|={}, S res {s:.1e}", r.module_order, r.h_order));
        k.time(start, limit);
    }
    Ok(())
}

fn c5(k: &mut Checks) -> Result<()> {
    let d = delta(30);
    let tau = |n: i64| d.coeff_i64(n).unwrap_or(0);
    k.check(tau(2) == -24, format!("tau(2) = {}", tau(2)));
    k.check(tau(6) == tau(2) * tau(3), "tau(6) != tau(2) tau(3)");
    let j = j_invariant(3);
    k.check(j.coeff_i64(0) == Some(744), "j constant term");
    k.check(j.coeff_i64(1) == Some(196_884), "j q-coefficient");
    let e4 = eisenstein(4, 22)?;
    let e6 = eisenstein(6, 22)?;
    let cc = cohen_operator(&e4, &e6, 1)?;
    let r = proportionality(&cc, &delta(22), 20);
    k.check(r.is_some(), "C_1(E4, E6) not proportional to Delta");
    if let Some(r) = r {
        k.check(r == BigRational::from_integer(BigInt::from(3456)), format!("constant {r}"));
        k.note(format!("C_1(E4,E6) = {r} Delta on 20 coefficients"));
    }
    Ok(())
}

fn c6(k: &mut Checks) -> Result<()> {
    let tol = 1e-11;
    let delta_form = Newform::delta(60);
    let level3 = Newform::eta6_eta3_6(60);
    // (form, twist, m, primes)
    let cases: [(&Newform, i64, u64, [u64; 2]); 2] = [(&delta_form, 1, 1, [3, 5]), (&level3, -7, 3, [5, 7])];
    for (g, twist, m, primes) in cases {
        let kk = g.k() as i32;
        for p in primes {
            let (r, e) = shintani_coeff_ratio(g, twist, p * p * m, m, tol)?;
            let want = hecke_ratio_prediction(g.a(p).unwrap_or(0), p, kk, m)?;
            let gap = (r - want).norm();
            k.check(gap < 1e-5, format!("level {} p = {p}: ratio {r} vs {want}", g.level));
            k.note(format!("N={} p={p}: c({})/c({m}) = {:.6} (pred {want}, gap {gap:.1e}, err {e:.1e})", g.level, p * p * m, r.re));
        }
    }
    for (g, twist, m) in [(&delta_form, 1i64, 2u64), (&delta_form, 1, 3), (&level3, -7, 1), (&level3, -7, 2)] {
        let t = twisted_trace(g, twist, m, tol)?;
        k.check(t.value == c(0.0, 0.0) && t.classes == 0, format!("trace at m = {m} not exactly zero"));
    }
    Ok(())
}

fn c7(k: &mut Checks) -> Result<()> {
    let start = Instant::now();
    let g = Newform::delta(60);
    let r = kohnen_series_check(&g, 1, 5, 2.0, 5, 1e-11)?;
    k.check(r.gap <= r.bound, format!("gap {:.3e} exceeds bound {:.3e}", r.gap, r.bound));
    k.note(format!("lhs {:.10} rhs {:.10} gap {:.2e} bound {:.2e}", r.lhs.re, r.rhs.re, r.gap, r.bound));
    k.time(start, 600.0);
    Ok(())
}

fn c8(k: &mut Checks) -> Result<()> {
    let g = Newform::eta6_eta3_6(80);
    let tol = 1e-10;
    for s in [c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.7), c(-0.3, 0.2), c(2.0, -1.0)] {
        let r = rankin_selberg_L(&g, 1, 3, -8, -11, s, tol)?;
        k.check(r.value.value == c(0.0, 0.0), format!("eps = -1 value {} at s = {s}", r.value.value));
    }
    let mut flipped = g.clone();
    flipped.fricke = Some(1);
    let r = rankin_selberg_L(&flipped, 1, 3, -8, -11, c(0.0, 0.0), tol)?;
    let v = r.value.value.norm();
    k.check(v < 1e-8 + r.value.error_bound, format!("eps = +1 central value {v:.2e}"));
    k.note(format!("eps=+1 at s=0: |value| {v:.1e} (error {:.1e})", r.value.error_bound));
    let one = c(1.0, 0.0);
    k.check(
        r.factors["gamma_p0_product"] == one && r.factors["gamma_p1_product"] == one,
        "empty gamma products are not exactly 1",
    );
    let s = c(0.4, 0.1);
    let a = rankin_selberg_L(&g, 1, 15, -11, -56, s, tol)?;
    let b = rankin_selberg_L(&g, 5, 15, -11, -56, s, tol)?;
    let ja = serde_json::to_value(&a.factors).expect("json");
    let jb = serde_json::to_value(&b.factors).expect("json");
    let keys: std::collections::BTreeSet<&String> =
        ja.as_object().unwrap().keys().chain(jb.as_object().unwrap().keys()).collect();
    let changed: Vec<&str> = keys.into_iter().filter(|key| ja.get(*key) != jb.get(*key)).map(|s| s.as_str()).collect();
    let declared = ["gamma_p0[5]", "gamma_p0_product", "gamma_p1[5]", "gamma_p1_product"];
    k.check(changed == declared, format!("N3 flip changed {changed:?}"));
    k.note(format!("N3 1 -> 5 at N=15 changes {changed:?}"));
    Ok(())
}

fn c9(k: &mut Checks) -> Result<()> {
    let points = [c(0.3, 0.0), c(0.1, 2.0), c(0.7, -1.5), c(-0.4, 0.5), c(1.9, 0.25)];
    let mut worst: f64 = 0.0;
    for d in [-3i64, -4, 5, -7, 8] {
        for s in points {
            let a = completed_Lambda_with(d, s, d.abs() as f64, 1.25)?;
            let b = completed_Lambda_with(d, c(1.0, 0.0) - s, d.abs() as f64, 0.8)?;
            let r = (a.value - b.value).norm();
            worst = worst.max(r);
            k.check(r < 1e-10, format!("D = {d}, s = {s}: FE residual {r:.2e}"));
        }
    }
    let l = dirichlet_L(-4, c(1.0, 0.0))?;
    let e = (l.value - PI / 4.0).norm();
    k.check(e < 1e-10, format!("L(1, chi_-4) error {e:.2e}"));
    let mut worst_m: f64 = 0.0;
    for g in [Newform::delta(100), Newform::eta6_eta3_6(150)] {
        for s in [c(g.k() as f64, 0.0), c(g.k() as f64 + 0.7, 1.0), c(g.k() as f64 + 2.0, 0.0)] {
            let a = modular_L_with(&g, s, 0.7)?;
            let b = modular_L_with(&g, s, 1.4)?;
            let r = (a.value - b.value).norm();
            worst_m = worst_m.max(r);
            k.check(r < 1e-8, format!("level {} s = {s}: cutoff residual {r:.2e}", g.level));
        }
    }
    k.note(format!("FE residual max {worst:.1e}, L(1,chi_-4) error {e:.1e}, AFE cutoff residual max {worst_m:.1e}"));
    Ok(())
}

fn c10(k: &mut Checks) -> Result<()> {
    let start = Instant::now();
    let a = cm_norm(1, -3, -7, 512)?;
    let want = BigInt::from(3375u64).pow(4);
    k.check(a.nearest_integer == want.to_string(), format!("(1,-3,-7) gave {}", a.nearest_integer));
    k.check(a.distance < 1e-20, format!("(1,-3,-7) distance {:.2e}", a.distance));
    k.check(a.factors == vec![("3".to_string(), 12), ("5".to_string(), 12)], "(1,-3,-7) factorization");
    k.check(!a.is_unit, "(1,-3,-7) flagged as unit");
    let b = cm_norm(1, -3, -4, 512)?;
    let want = BigInt::from(1728u64).pow(4);
    k.check(b.nearest_integer == want.to_string(), format!("(1,-3,-4) gave {}", b.nearest_integer));
    let d = cm_norm(3, -11, -8, 512)?;
    k.check(d.distance < 1e-10 && !d.is_unit, format!("(3,-11,-8): {} distance {:.2e}", d.nearest_integer, d.distance));
    k.check(d.nearest_integer.trim_start_matches('-') != "0", "(3,-11,-8) product vanished");
    k.note(format!("3375^4 (dist {:.0e}), 1728^4, (3,-11,-8) -> {} = {:?}", a.distance, d.nearest_integer, d.factors));
    k.time(start, 300.0);
    Ok(())
}

fn c11(k: &mut Checks) -> Result<()> {
    let q = legendre_Q(c(1.0, 0.0), 2.0)?;
    let e = (q.re - 0.5 * 3f64.ln()).abs();
    k.check(e < 1e-10, format!("Q_0(2) error {e:.2e}"));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = c(2.5, 0.0);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let z1 = c(rng.gen_range(-1.0..1.0), rng.gen_range(0.2..2.0));
        let z2 = c(rng.gen_range(-1.0..1.0), rng.gen_range(0.2..2.0));
        let a: f64 = rng.gen_range(0.5..2.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        let cc: f64 = rng.gen_range(-1.0..1.0);
        let dd = (1.0 + b * cc) / a;
        let act = |z: C64| (z * a + b) / (z * cc + dd);
        let r = (green_g(s, z1, z2)? - green_g(s, act(z1), act(z2))?).norm();
        worst = worst.max(r);
        k.check(r < 1e-10, format!("isometry residual {r:.2e}"));
    }
    for (n, z1, z2) in [(1u64, c(0.1, 1.2), c(0.4, 0.9)), (3, c(0.1, 0.9), c(0.35, 1.4)), (5, c(-0.2, 0.6), c(0.3, 0.45))] {
        let a = green_GN(c(2.0, 0.0), n, z1, z2, 80.0)?;
        let b = green_GN(c(2.0, 0.0), n, z1, z2, 160.0)?;
        let d = (a.value - b.value).norm();
        k.check(d <= a.tail_bound, format!("N = {n}: doubling changed {d:.2e} > tail {:.2e}", a.tail_bound));
        k.note(format!("N={n}: doubling change {d:.1e} <= tail {:.1e}", a.tail_bound));
    }
    k.note(format!("Q_0 error {e:.1e}, isometry residual max {worst:.1e}"));
    Ok(())
}

/// Run one criterion; errors count as failures.
pub fn run(id: u32) -> CriterionResult {
    let start = Instant::now();
    let mut k = Checks::new();
    let outcome = match id {
        1 => c1(&mut k),
        2 => c2(&mut k),
        3 => c3(&mut k),
        4 => c4(&mut k),
        5 => c5(&mut k),
        6 => c6(&mut k),
        7 => c7(&mut k),
        8 => c8(&mut k),
        9 => c9(&mut k),
        10 => c10(&mut k),
        11 => c11(&mut k),
        _ => Err(crate::Error::Invalid(format!("no criterion {id}"))),
    };
    if let Err(e) = outcome {
        k.ok = false;
        k.notes.push(format!("error: {e}"));
    }
    CriterionResult {
        id,
        title: title(id),
        passed: k.ok,
        detail: k.notes.join("; "),
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=CRITERIA).map(run).collect()
}

pub fn format_line(r: &CriterionResult) -> String {
    format!(
        "[{}] criterion {:>2} {:<40} {:>7.1}s  {}",
        if r.passed { "PASS" } else { "FAIL" },
        r.id,
        r.title,
        r.seconds,
        r.detail
    )
}
