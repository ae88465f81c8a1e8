//! Integer and rational primitives: Kronecker symbols, fundamental
//! discriminants, divisor functions, factorization and partial zeta values.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Kronecker symbol (d/n) for arbitrary integers.
pub fn kronecker(d: i64, n: i64) -> i32 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut s = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if d < 0 {
            s = -s;
        }
    }
    let tz = n.trailing_zeros();
    if tz > 0 {
        if d % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && matches!(d.rem_euclid(8), 3 | 5) {
            s = -s;
        }
        n >>= tz;
    }
    s * jacobi(d.rem_euclid(n), n)
}

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi(a: i64, n: i64) -> i32 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut s = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                s = -s;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            s = -s;
        }
        a %= n;
    }
    if n == 1 {
        s
    } else {
        0
    }
}

pub fn is_squarefree(n: i64) -> bool {
    if n == 0 {
        return false;
    }
    factor_u64(n.unsigned_abs()).iter().all(|&(_, e)| e == 1)
}

/// True iff `d` is the discriminant of a quadratic field.
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m)
        }
        _ => false,
    }
}

/// (D/p) = 1 for every prime p | N. N must be squarefree.
pub fn heegner_condition(d: i64, n: u64) -> Result<bool> {
    if n == 0 || !is_squarefree(n as i64) {
        return invalid(format!("level {n} is not squarefree"));
    }
    Ok(prime_divisors(n).iter().all(|&p| kronecker(d, p as i64) == 1))
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u128 % m as u128;
    let mut x = b as u128 % m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * x % m as u128;
        }
        x = x * x % m as u128;
        e >>= 1;
    }
    r as u64
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let (s, d) = {
        let s = (n - 1).trailing_zeros();
        (s, (n - 1) >> s)
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization of a positive integer; primes strictly increasing.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p <= TRIAL_BOUND && p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        if p * p > m || is_prime_u64(m) {
            out.push((m, 1));
        } else {
            for (q, e) in factor_big(&BigUint::from(m)) {
                out.push((q.to_u64().expect("factor fits"), e));
            }
        }
    }
    out
}

const TRIAL_BOUND: u64 = 1_000_000;

/// Factorization by trial division up to 10^6, then Miller-Rabin and
/// Pollard-Brent on the cofactor.
pub fn factor_big(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    if n.is_zero() {
        return out;
    }
    let mut m = n.clone();
    let mut p = 2u64;
    while p <= TRIAL_BOUND {
        let pb = BigUint::from(p);
        if &pb * &pb > m {
            break;
        }
        let mut e = 0;
        while (&m % &pb).is_zero() {
            m /= &pb;
            e += 1;
        }
        if e > 0 {
            out.push((pb, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > BigUint::one() {
        let mut rest = Vec::new();
        split_cofactor(m, &mut rest);
        rest.sort();
        for q in rest {
            match out.last_mut() {
                Some((last, e)) if *last == q => *e += 1,
                _ => out.push((q, 1)),
            }
        }
    }
    out
}

fn split_cofactor(m: BigUint, out: &mut Vec<BigUint>) {
    if m.is_one() {
        return;
    }
    if is_probable_prime(&m) {
        out.push(m);
        return;
    }
    let mut c = 1u64;
    loop {
        if let Some(f) = pollard_brent(&m, c) {
            let g = &m / &f;
            split_cofactor(f, out);
            split_cofactor(g, out);
            return;
        }
        c += 1;
    }
}

/// Miller-Rabin with the first 20 prime bases; deterministic below 3.3e24.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    let small = [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];
    for &p in &small {
        let pb = BigUint::from(p);
        if (n % &pb).is_zero() {
            return *n == pb;
        }
    }
    let nm1 = n - 1u32;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'w: for &a in &small {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'w;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: &BigUint, c: u64) -> Option<BigUint> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(2u32);
    let mut r = 1u64;
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let m = 128u64;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            g = q.gcd(n);
            k += m;
        }
        r *= 2;
        if r > 1 << 26 {
            return None;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            g = diff.gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    if &g == n {
        None
    } else {
        Some(g)
    }
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor_u64(n).into_iter().map(|(p, _)| p).collect()
}

/// Sorted list of positive divisors.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor_u64(n) {
        let cur = ds.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

pub fn sigma1(n: u64) -> u64 {
    divisors(n).iter().sum()
}

/// Sum of k-th powers of divisors.
pub fn sigma_k(n: u64, k: u32) -> BigInt {
    divisors(n).iter().map(|&d| BigInt::from(d).pow(k)).sum()
}

/// Number of distinct prime factors.
pub fn omega(n: u64) -> u32 {
    factor_u64(n).len() as u32
}

pub fn moebius(n: u64) -> i32 {
    let f = factor_u64(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Partial zeta function prod_{p|N} (1 - p^{-s})^{-1}.
pub fn partial_zeta(n: u64, s: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for p in prime_divisors(n) {
        let ps = Complex64::new(p as f64, 0.0).powc(-s);
        let den = Complex64::new(1.0, 0.0) - ps;
        if den.norm() < 1e-14 {
            return invalid(format!("partial zeta pole at p = {p}, s = {s}"));
        }
        acc /= den;
    }
    Ok(acc)
}

/// Exact partial zeta at an integer point.
pub fn partial_zeta_int(n: u64, s: i64) -> Result<BigRational> {
    let mut acc = BigRational::one();
    for p in prime_divisors(n) {
        let ps = rational_pow(&BigRational::from_integer(p.into()), -s);
        let den = BigRational::one() - ps;
        if den.is_zero() {
            return invalid(format!("partial zeta pole at p = {p}, s = {s}"));
        }
        acc /= den;
    }
    Ok(acc)
}

pub fn rational_pow(x: &BigRational, e: i64) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        r *= x;
    }
    if e < 0 {
        r.recip()
    } else {
        r
    }
}

/// s(s+2)...(s+2(r-1)) / (2 pi)^r, which equals Gamma_R(s+2r)/Gamma_R(s).
pub fn gamma_r_ratio(s: Complex64, r: u32) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for j in 0..r {
        acc *= (s + 2.0 * j as f64) / (2.0 * PI);
    }
    acc
}

/// Square root of a modulo an odd prime p (Tonelli-Shanks), if it exists.
pub fn sqrt_mod_prime(a: i64, p: u64) -> Option<u64> {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let (mut s, mut q) = (0u32, p - 1);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while mod_pow(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mulm = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulm(tt, tt);
            i += 1;
        }
        let b = mod_pow(c, 1 << (m - i - 1), p);
        m = i;
        c = mulm(b, b);
        t = mulm(t, c);
        r = mulm(r, b);
    }
    Some(r)
}

/// Modular inverse of a mod m, if gcd(a, m) = 1.
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let e = a.rem_euclid(m).extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: i64) -> bool {
    n >= 0 && {
        let r = isqrt(n as u64);
        r * r == n as u64
    }
}

/// Binomial coefficient C(x, n) for rational x and integer n >= 0.
pub fn binomial_rational(x: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::one();
    for j in 0..n {
        acc *= x - BigRational::from_integer(j.into());
        acc /= BigRational::from_integer((j + 1).into());
    }
    acc
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler(a: i64, p: i64) -> i32 {
        let r = mod_pow(a.rem_euclid(p) as u64, ((p - 1) / 2) as u64, p as u64);
        if r == 0 {
            0
        } else if r == 1 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(1, 17), 1);
        assert_eq!(kronecker(-7, 3), euler(-7, 3));
        assert_eq!(kronecker(-7, 3), -1);
        assert_eq!(kronecker(-3, 7), 1);
        assert_eq!(kronecker(-4, 2), 0);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-3, -1), -1);
    }

    #[test]
    fn kronecker_matches_euler_on_odd_primes() {
        for p in [3i64, 5, 7, 11, 13, 101, 997] {
            for d in -60..60 {
                assert_eq!(kronecker(d, p), euler(d, p), "d={d} p={p}");
            }
        }
    }

    #[test]
    fn fundamental_examples() {
        assert!(is_fundamental(-3));
        assert!(!is_fundamental(-12));
        assert!(is_fundamental(-8));
        assert!(is_fundamental(-4));
        assert!(is_fundamental(5));
        assert!(!is_fundamental(-16));
        assert!(!is_fundamental(1));
    }

    #[test]
    fn heegner_examples() {
        assert!(heegner_condition(-11, 3).unwrap());
        assert!(!heegner_condition(-7, 3).unwrap());
        assert!(heegner_condition(-7, 1).unwrap());
        assert!(heegner_condition(-7, 4).is_err());
    }

    #[test]
    fn partial_zeta_examples() {
        let z = partial_zeta_int(3, 1).unwrap();
        assert_eq!(z, BigRational::new(3.into(), 2.into()));
        let z = partial_zeta_int(6, 2).unwrap();
        assert_eq!(z, BigRational::new(3.into(), 2.into()));
        assert_eq!(partial_zeta_int(1, 5).unwrap(), BigRational::one());
        assert!(partial_zeta_int(6, 0).is_err());
        let c = partial_zeta(6, Complex64::new(2.0, 0.0)).unwrap();
        assert!((c.re - 1.5).abs() < 1e-15);
        assert!(partial_zeta(3, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn gamma_r_ratio_examples() {
        assert_eq!(gamma_r_ratio(Complex64::new(0.3, 1.0), 0), Complex64::new(1.0, 0.0));
        let v = gamma_r_ratio(Complex64::new(1.0, 0.0), 1);
        assert!((v.re - 1.0 / (2.0 * PI)).abs() < 1e-16);
        let v = gamma_r_ratio(Complex64::new(0.5, 0.0), 2);
        assert!((v.re - 0.031_663).abs() < 1e-6);
    }

    #[test]
    fn divisor_functions() {
        assert_eq!(sigma1(1), 1);
        assert_eq!(sigma1(6), 12);
        assert_eq!(omega(12), 2);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(moebius(30), -1);
        assert_eq!(moebius(12), 0);
    }

    #[test]
    fn factorization_and_sqrt() {
        assert_eq!(factor_u64(3375u64.pow(4)), vec![(3, 12), (5, 12)]);
        let big = BigUint::from(1_000_003u64) * BigUint::from(1_000_033u64) * 4u32;
        let f = factor_big(&big);
        assert_eq!(f.len(), 3);
        assert_eq!(f[0], (BigUint::from(2u32), 2));
        for p in [3u64, 7, 13, 97] {
            for a in 0..p as i64 {
                if let Some(r) = sqrt_mod_prime(a, p) {
                    assert_eq!((r * r) % p, a as u64);
                }
            }
        }
        assert_eq!(inv_mod(3, 7), Some(5));
    }
}
