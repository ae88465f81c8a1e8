use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

use weillift::bqf::{class_group, genus_char, mat_det, reduce, Bqf, Mat2};
use weillift::cmvalues::{certify_pairs, cm_cycle, cosh_dist, green_GN, CyclePair};
use weillift::fqm::{dist, norm, Fqm};
use weillift::lfunc::{completed_Lambda, modular_L_with, rankin_selberg_L};
use weillift::numtheory::{factor_u64, is_fundamental, kronecker, partial_zeta_int, prime_divisors};
use weillift::qexp::{eisenstein, Evaluable, Newform};
use weillift::shintani::{cycle_integral, twisted_trace};
use weillift::special::{c, C64};

fn fundamental_negatives(max: i64) -> Vec<i64> {
    (3..=max).map(|d| -d).filter(|&d| is_fundamental(d)).collect()
}

fn fundamentals(max: i64) -> Vec<i64> {
    (-max..=max).filter(|&d| d != 1 && is_fundamental(d)).collect()
}

/// SL2(Z) words in S and T with the lower left entry divisible by n.
fn gamma0_element(n: i64, word: &[i64]) -> Mat2 {
    let mut m: Mat2 = [[1, 0], [0, 1]];
    for &k in word {
        // T^k then the lower triangular generator [[1, 0], [n, 1]].
        let t = [[1, k], [0, 1]];
        let l = [[1, 0], [n, 1]];
        m = weillift::bqf::mat_mul(&m, &weillift::bqf::mat_mul(&t, &l));
    }
    m
}

fn mobius(m: &Mat2, z: C64) -> C64 {
    (z * m[0][0] as f64 + m[0][1] as f64) / (z * m[1][0] as f64 + m[1][1] as f64)
}

fn random_vector(seed: &[(f64, f64)], len: usize) -> Vec<C64> {
    (0..len).map(|i| {
        let (a, b) = seed[i % seed.len()];
        c(a + 0.1 * i as f64, b - 0.03 * (i * i % 7) as f64)
    }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kronecker_multiplicative_and_periodic(i in 0usize..31, m in 1i64..10_000, n in 1i64..10_000) {
        let ds = fundamentals(50);
        let d = ds[i % ds.len()];
        prop_assert_eq!(kronecker(d, m * n), kronecker(d, m) * kronecker(d, n));
        prop_assert_eq!(kronecker(d, m), kronecker(d, m + d.abs()));
    }

    #[test]
    fn factorization_multiplies_back(n in 1u64..10_000_000) {
        let f = factor_u64(n);
        prop_assert_eq!(f.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
        prop_assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn partial_zeta_inverts_euler_factors(n in 1u64..2000, s in -6i64..7) {
        prop_assume!(s != 0);
        let z = partial_zeta_int(n, s).unwrap();
        let mut prod = z;
        for p in prime_divisors(n) {
            let pb = BigRational::from_integer(BigInt::from(p));
            let ps = if s > 0 { pb.pow(s as i32).recip() } else { pb.pow((-s) as i32) };
            prod *= BigRational::one() - ps;
        }
        prop_assert!(prod.is_one());
    }

    #[test]
    fn reduction_is_canonical(i in 0usize..60, word in prop::collection::vec(-3i64..4, 1..5)) {
        let ds = fundamental_negatives(200);
        let d = ds[i % ds.len()];
        let cg = class_group(d).unwrap();
        let f = cg.forms[i % cg.order()];
        let g = f.act(&gamma0_element(1, &word));
        prop_assert_eq!(g.disc(), d);
        let (r, m) = reduce(&g).unwrap();
        prop_assert!(r.is_reduced_definite());
        prop_assert_eq!(mat_det(&m), 1);
        prop_assert_eq!(g.act(&m), r);
        prop_assert_eq!(r, f);
    }

    #[test]
    fn genus_character_is_a_class_character(i in 0usize..60, word in prop::collection::vec(-3i64..4, 1..4)) {
        let ds: Vec<i64> = fundamental_negatives(200).into_iter().filter(|d| prime_divisors(d.unsigned_abs()).len() > 1).collect();
        let d = ds[i % ds.len()];
        let cg = class_group(d).unwrap();
        for p in prime_divisors(d.unsigned_abs()).into_iter().filter(|&p| p != 2) {
            let ps = if p % 4 == 1 { p as i64 } else { -(p as i64) };
            let chi: Vec<i32> = cg.forms.iter().map(|f| genus_char(ps, f).unwrap()).collect();
            for a in 0..cg.order() {
                let moved = cg.forms[a].act(&gamma0_element(1, &word));
                prop_assert_eq!(genus_char(ps, &moved).unwrap(), chi[a]);
                for b in 0..cg.order() {
                    prop_assert_eq!(chi[cg.table[a][b]], chi[a] * chi[b]);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weil_representation_relations(kind in 0usize..3, n in 2i64..12, a in 1i64..6, seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)) {
        let m = match kind {
            0 => Fqm::hyperbolic(n),
            1 => Fqm::cyclic(2 * n + 1, a),
            _ => Fqm::cyclic(4 * n, 2 * a + 1),
        };
        prop_assume!(m.is_ok());
        let m = m.unwrap();
        prop_assume!(m.signature_mod8().is_ok());
        prop_assert!(m.milgram_error() < 1e-10);
        let v = random_vector(&seed, m.order());
        let sv = m.weil_s(&v).unwrap();
        prop_assert!((norm(&sv) - norm(&v)).abs() < 1e-10 * norm(&v).max(1.0));
        prop_assert!((norm(&m.weil_t(&v)) - norm(&v)).abs() < 1e-10 * norm(&v).max(1.0));
        let mut st = v.clone();
        for _ in 0..3 {
            st = m.weil_s(&m.weil_t(&st)).unwrap();
        }
        let ss = m.weil_s(&sv).unwrap();
        prop_assert!(dist(&st, &ss) < 1e-9 * norm(&v).max(1.0));
    }

    #[test]
    fn hecke_operators_commute(m in 1u64..6, n in 1u64..6) {
        let e4 = eisenstein(4, 30 * 36 + 1).unwrap();
        let f = e4.pow(3).unwrap();
        let a = f.hecke_t(m).unwrap().hecke_t(n).unwrap();
        let b = f.hecke_t(n).unwrap().hecke_t(m).unwrap();
        for k in 0..30 {
            prop_assert_eq!(a.coeff(k), b.coeff(k));
        }
    }

    #[test]
    fn newform_modularity(which in 0usize..2, word in prop::collection::vec(-2i64..3, 1..3), x in -0.5f64..0.5, y in 0.8f64..1.5) {
        let g = if which == 0 { Newform::delta(200) } else { Newform::eta6_eta3_6(200) };
        let n = g.level() as i64;
        let gam = gamma0_element(n, &word);
        let z = c(x, y);
        let w = mobius(&gam, z);
        prop_assume!(w.im > 0.05);
        let j = z * gam[1][0] as f64 + gam[1][1] as f64;
        let lhs = g.eval(w).unwrap();
        let rhs = g.eval(z).unwrap() * j.powi((g.weight2() / 2) as i32);
        prop_assert!((lhs - rhs).norm() < 1e-8 * rhs.norm().max(lhs.norm()).max(1e-30), "{lhs} vs {rhs}");
    }

    #[test]
    fn cycle_integral_class_invariant(word in prop::collection::vec(-2i64..3, 1..3), i in 0usize..8) {
        let g = Newform::delta(200);
        let forms: Vec<Bqf> = [5i64, 13, 17, 21, 28]
            .iter()
            .flat_map(|&d| weillift::bqf::indefinite_classes(d).unwrap())
            .collect();
        let q = forms[i % forms.len()];
        let moved = q.act(&gamma0_element(1, &word));
        let a = cycle_integral(&g, &q, 1e-11).unwrap();
        let b = cycle_integral(&g, &moved, 1e-11).unwrap();
        prop_assert!((a.value - b.value).norm() < 1e-9 + a.error_bound + b.error_bound);
        let r = cycle_integral(&g, &q.neg(), 1e-11).unwrap();
        prop_assert!((r.value - a.value).norm() < 1e-9 + a.error_bound + r.error_bound);
    }

    #[test]
    fn twisted_trace_wrong_class_is_exactly_zero(m in 1u64..60) {
        let g = Newform::delta(200);
        prop_assume!(!matches!(m % 4, 0 | 1));
        let t = twisted_trace(&g, 1, m, 1e-10).unwrap();
        prop_assert_eq!(t.value, c(0.0, 0.0));
        prop_assert_eq!(t.classes, 0);
    }

    #[test]
    fn dirichlet_functional_equation(i in 0usize..30, x in -2.0f64..3.0, y in -6.0f64..6.0) {
        let ds = fundamentals(40);
        let d = ds[i % ds.len()];
        let s = c(x, y);
        let a = completed_Lambda(d, s, d.abs() as f64).unwrap();
        let b = completed_Lambda(d, c(1.0, 0.0) - s, d.abs() as f64).unwrap();
        prop_assert!((a.value - b.value).norm() < 1e-10 * a.value.norm().max(1.0));
    }

    #[test]
    fn modular_l_cutoff_independent(which in 0usize..2, x in -1.0f64..13.0, y in -4.0f64..4.0) {
        let g = if which == 0 { Newform::delta(400) } else { Newform::eta6_eta3_6(400) };
        let s = c(x, y);
        let a = modular_L_with(&g, s, 0.7).unwrap();
        let b = modular_L_with(&g, s, 1.4).unwrap();
        prop_assert!((a.value - b.value).norm() < 1e-8 * a.value.norm().max(1.0));
    }

    #[test]
    fn fricke_sign_toggles_vanishing(x in -2.0f64..4.0, y in -3.0f64..3.0) {
        let g = Newform::eta6_eta3_6(200);
        let s = c(x, y);
        let minus = rankin_selberg_L(&g, 1, 3, -8, -11, s, 1e-10).unwrap();
        prop_assert_eq!(minus.value.value, c(0.0, 0.0));
        let mut flipped = g.clone();
        flipped.fricke = Some(1);
        let plus = rankin_selberg_L(&flipped, 1, 3, -8, -11, s, 1e-10).unwrap();
        prop_assert!(plus.value.value.norm() > 0.0 || plus.factors["shintani_product"].norm() == 0.0);
        prop_assert_eq!(plus.factors["one_plus_fricke"], c(2.0, 0.0));
    }

    #[test]
    fn rankin_selberg_is_smooth(x in -1.0f64..3.0, y in -2.0f64..2.0) {
        let mut g = Newform::eta6_eta3_6(200);
        g.fricke = Some(1);
        let f = |s: C64| rankin_selberg_L(&g, 1, 3, -8, -11, s, 1e-11).unwrap().value.value;
        let s = c(x, y);
        let d2 = |h: f64| (f(s + h) - f(s) * 2.0 + f(s - h)) / (h * h);
        let (a, b) = (d2(0.02), d2(0.01));
        prop_assert!(a.is_finite() && b.is_finite());
        prop_assert!((a - b).norm() < 0.05 * a.norm().max(b.norm()) + 1e-6, "{a} vs {b}");
    }

    #[test]
    fn green_function_symmetric_and_invariant(
        lvl in 0usize..3, s in 1.5f64..3.0, word in prop::collection::vec(-2i64..3, 1..3),
        x1 in -0.5f64..0.5, y1 in 0.7f64..1.6, x2 in -0.5f64..0.5, y2 in 0.7f64..1.6,
    ) {
        let n = [1u64, 3, 5][lvl];
        let (z1, z2) = (c(x1, y1), c(x2, y2));
        prop_assume!(cosh_dist(z1, z2) - 1.0 > 1e-3);
        let s = c(s, 0.0);
        let a = green_GN(s, n, z1, z2, 150.0).unwrap();
        let b = green_GN(s, n, z2, z1, 150.0).unwrap();
        prop_assert!((a.value - b.value).norm() < a.tail_bound + b.tail_bound + 1e-9);
        let w = mobius(&gamma0_element(n as i64, &word), z1);
        prop_assume!(w.im > 0.1);
        let m = green_GN(s, n, w, z2, 150.0).unwrap();
        prop_assert!((a.value - m.value).norm() < a.tail_bound + m.tail_bound + 1e-9);
    }
}

/// chi_{p*}(f) from a represented value prime to p.
fn genus_oracle(p: u64, f: &Bqf) -> i32 {
    for x in 0i64..40 {
        for y in 0i64..40 {
            let v = f.eval(x, y);
            if v != 0 && v.rem_euclid(p as i64) != 0 {
                let ps = if p % 4 == 1 { p as i64 } else { -(p as i64) };
                return kronecker(ps, v);
            }
        }
    }
    panic!("no represented value prime to {p} for {f}");
}

#[test]
fn cm_cycle_sizes_match_genus_matching() {
    let ds = fundamental_negatives(60);
    let mut tested = 0;
    for (ix, &d1) in ds.iter().enumerate() {
        for &d2 in &ds[ix + 1..] {
            let d0 = num_integer::gcd(d1.abs(), d2.abs()) as u64;
            if d0 > 15 || (d1 % 2 == 0 && d2 % 2 == 0) {
                continue;
            }
            let Ok(cycle) = cm_cycle(d1, d2, 1) else { continue };
            let (c1, c2) = (class_group(d1).unwrap(), class_group(d2).unwrap());
            let primes = prime_divisors(d0);
            let sig = |f: &Bqf| primes.iter().map(|&p| genus_oracle(p, f)).collect::<Vec<_>>();
            let s2: Vec<Vec<i32>> = c2.forms.iter().map(sig).collect();
            let matching: usize = c1.forms.iter().map(|f| {
                let s1 = sig(f);
                s2.iter().filter(|s| **s == s1).count()
            }).sum();
            assert_eq!(cycle.pairs.len(), 4 * matching, "D1 = {d1}, D2 = {d2}");
            if d0 == 1 {
                assert_eq!(matching, c1.order() * c2.order());
            }
            tested += 1;
        }
    }
    assert!(tested > 100, "only {tested} pairs");
}

#[test]
fn cm_norm_independent_of_representatives() {
    for (n, d1, d2) in [(1u64, -3i64, -4i64), (1, -7, -8), (5, -11, -4), (7, -3, -19)] {
        let cycle = cm_cycle(d1, d2, n).unwrap();
        let base = certify_pairs(n, d1, d2, &cycle.pairs, 256).unwrap();
        let shift = |p: &weillift::bqf::HeegnerPoint, k: i64| {
            let mut q = *p;
            q.form = p.form.act(&[[1, -k], [0, 1]]);
            let (x0, _) = p.tau();
            let (x1, _) = q.tau();
            assert!((x1 - x0 - k as f64).abs() < 1e-12);
            q
        };
        let moved: Vec<CyclePair> = cycle
            .pairs
            .iter()
            .enumerate()
            .map(|(i, pr)| CyclePair { first: shift(&pr.first, i as i64 % 3 + 1), second: shift(&pr.second, -(i as i64 % 2) - 1) })
            .collect();
        let other = certify_pairs(n, d1, d2, &moved, 256).unwrap();
        assert_eq!(base.nearest_integer, other.nearest_integer);
        assert_eq!(base.factors, other.factors);
        assert!(other.distance < 1e-20);
    }
}
