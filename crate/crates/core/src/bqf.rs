//! Binary quadratic forms: reduction, composition, class groups, genus
//! characters, Heegner points, automorphs and indefinite reduction cycles.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{invalid, Error, Result};
use crate::numtheory::{is_fundamental, is_square, isqrt, kronecker};

/// 2x2 integer matrix [[p, q], [r, s]].
pub type Mat2 = [[i64; 2]; 2];

pub const IDENTITY: Mat2 = [[1, 0], [0, 1]];

pub fn mat_mul(m: &Mat2, n: &Mat2) -> Mat2 {
    [
        [m[0][0] * n[0][0] + m[0][1] * n[1][0], m[0][0] * n[0][1] + m[0][1] * n[1][1]],
        [m[1][0] * n[0][0] + m[1][1] * n[1][0], m[1][0] * n[0][1] + m[1][1] * n[1][1]],
    ]
}

pub fn mat_inv(m: &Mat2) -> Mat2 {
    [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]
}

pub fn mat_det(m: &Mat2) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Integral binary quadratic form a x^2 + b x y + c y^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bqf {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Bqf {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        Bqf { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn content(&self) -> i64 {
        self.a.gcd(&self.b).gcd(&self.c)
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    pub fn neg(&self) -> Bqf {
        Bqf::new(-self.a, -self.b, -self.c)
    }

    /// Inverse class (opposite form).
    pub fn opposite(&self) -> Bqf {
        Bqf::new(self.a, -self.b, self.c)
    }

    /// The form (x, y) -> f(p x + q y, r x + s y).
    pub fn act(&self, m: &Mat2) -> Bqf {
        let [[p, q], [r, s]] = *m;
        let (a, b, c) = (self.a, self.b, self.c);
        Bqf::new(
            a * p * p + b * p * r + c * r * r,
            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            a * q * q + b * q * s + c * s * s,
        )
    }

    pub fn is_reduced_definite(&self) -> bool {
        self.a > 0
            && self.b.abs() <= self.a
            && self.a <= self.c
            && (self.b >= 0 || (self.b.abs() != self.a && self.a != self.c))
    }
}

impl std::fmt::Display for Bqf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

/// Reduce a positive definite form; returns the reduced form and M with f.act(M) = reduced.
pub fn reduce(f: &Bqf) -> Result<(Bqf, Mat2)> {
    if f.disc() >= 0 || f.a <= 0 {
        return invalid(format!("{f} is not positive definite"));
    }
    let mut g = *f;
    let mut m = IDENTITY;
    loop {
        // Normalize -a < b <= a.
        let k = Integer::div_floor(&(g.a - g.b), &(2 * g.a));
        if k != 0 {
            let t = [[1, k], [0, 1]];
            g = g.act(&t);
            m = mat_mul(&m, &t);
        }
        if g.a > g.c || (g.a == g.c && g.b < 0) {
            let s = [[0, -1], [1, 0]];
            g = g.act(&s);
            m = mat_mul(&m, &s);
            continue;
        }
        break;
    }
    Ok((g, m))
}

/// Dirichlet composition followed by reduction (definite forms) or no
/// reduction (indefinite forms).
pub fn compose(f: &Bqf, g: &Bqf) -> Result<Bqf> {
    let raw = compose_raw(f, g)?;
    if raw.disc() < 0 {
        Ok(reduce(&raw)?.0)
    } else {
        Ok(raw)
    }
}

/// Dirichlet composition of two primitive forms of the same discriminant,
/// without reduction.
pub fn compose_raw(f: &Bqf, g: &Bqf) -> Result<Bqf> {
    let d = f.disc();
    if g.disc() != d {
        return invalid(format!("cannot compose {f} and {g}: discriminants differ"));
    }
    let (mut f1, mut f2) = (*f, *g);
    if f1.a > f2.a {
        std::mem::swap(&mut f1, &mut f2);
    }
    let (a1, b1) = (f1.a, f1.b);
    let (a2, b2, c2) = (f2.a, f2.b, f2.c);
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (y1, dd) = if a2 % a1 == 0 {
        (0, a1)
    } else {
        let e = a2.extended_gcd(&a1);
        (e.x, e.gcd)
    };
    let (x2, y2, d1) = if s % dd == 0 {
        (0, -1, dd)
    } else {
        let e = s.extended_gcd(&dd);
        (e.x, -e.y, e.gcd)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
    let b3 = b2 + 2 * v2 * r;
    let a3 = v1 * v2;
    let c3 = (b3 * b3 - d) / (4 * a3);
    let out = Bqf::new(a3, b3, c3);
    debug_assert_eq!(out.disc(), d);
    Ok(out)
}

/// Class group of a fundamental discriminant D < 0.
#[derive(Clone, Debug, Serialize)]
pub struct ClassGroup {
    pub disc: i64,
    pub forms: Vec<Bqf>,
    /// table[i][j] = index of forms[i] * forms[j].
    pub table: Vec<Vec<usize>>,
}

impl ClassGroup {
    pub fn order(&self) -> usize {
        self.forms.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn index_of(&self, f: &Bqf) -> Result<usize> {
        let r = reduce(f)?.0;
        self.forms
            .iter()
            .position(|g| *g == r)
            .ok_or_else(|| Error::Check(format!("{f} not in class group of {}", self.disc)))
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.table[i].iter().position(|&k| k == 0).expect("group inverse")
    }
}

/// All reduced primitive forms of discriminant D < 0, principal form first.
pub fn reduced_forms(d: i64) -> Vec<Bqf> {
    let mut out = Vec::new();
    let mut a = 1;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            if (b * b - d) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b - d) / (4 * a);
            let f = Bqf::new(a, b, c);
            if c >= a && f.is_reduced_definite() && f.is_primitive() {
                out.push(f);
            }
        }
        a += 1;
    }
    out.sort_by_key(|f| (f.a, f.b.abs(), -f.b));
    out
}

pub fn class_group(d: i64) -> Result<ClassGroup> {
    if d >= 0 || !is_fundamental(d) {
        return invalid(format!("{d} is not a negative fundamental discriminant"));
    }
    let forms = reduced_forms(d);
    let index: HashMap<Bqf, usize> = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let mut table = vec![vec![0; forms.len()]; forms.len()];
    for (i, f) in forms.iter().enumerate() {
        for (j, g) in forms.iter().enumerate() {
            let h = compose(f, g)?;
            table[i][j] = *index
                .get(&h)
                .ok_or_else(|| Error::Check(format!("composition {f}*{g} = {h} is not reduced")))?;
        }
    }
    Ok(ClassGroup { disc: d, forms, table })
}

pub fn class_number(d: i64) -> Result<usize> {
    Ok(class_group(d)?.order())
}

const GENUS_SEARCH: i64 = 50;

/// Generalized genus character chi_Delta on forms whose discriminant is
/// divisible by Delta. Zero iff gcd(a, b, c, Delta) > 1.
pub fn genus_char(delta: i64, f: &Bqf) -> Result<i32> {
    let disc = f.disc();
    if delta == 0 || disc % delta != 0 {
        return invalid(format!("{delta} does not divide disc{f} = {disc}"));
    }
    if delta == 1 {
        return Ok(1);
    }
    if f.content().gcd(&delta) > 1 {
        return Ok(0);
    }
    for r in 0..=GENUS_SEARCH {
        for x in -r..=r {
            for y in [-r, r] {
                for (xx, yy) in [(x, y), (y, x)] {
                    let n = f.eval(xx, yy);
                    if n != 0 && n.gcd(&delta) == 1 {
                        return Ok(kronecker(delta, n));
                    }
                }
            }
        }
    }
    Err(Error::Check(format!(
        "no value of {f} coprime to {delta} with |x|,|y| <= {GENUS_SEARCH}"
    )))
}

/// A CM point of level N carried by its form [N A, B, C].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeegnerPoint {
    pub form: Bqf,
    pub level: i64,
}

impl HeegnerPoint {
    pub fn disc(&self) -> i64 {
        self.form.disc()
    }

    /// (x, y) with tau = x + i y = (-b + sqrt(D)) / (2a).
    pub fn tau(&self) -> (f64, f64) {
        let a = self.form.a as f64;
        (-(self.form.b as f64) / (2.0 * a), ((-self.disc()) as f64).sqrt() / (2.0 * a))
    }
}

fn heegner_beta(d: i64, n: i64) -> Result<i64> {
    (0..2 * n)
        .find(|&b| (b * b - d).rem_euclid(4 * n) == 0)
        .ok_or_else(|| Error::Invalid(format!("{d} is not a square mod {}", 4 * n)))
}

/// Some form properly equivalent to f whose first coefficient is positive and coprime to n.
fn coprime_representative(f: &Bqf, n: i64) -> Result<Bqf> {
    for r in 1..200i64 {
        for x in -r..=r {
            for y in [r, -r] {
                for (x, y) in [(x, y), (y, x)] {
                    if x.gcd(&y) != 1 {
                        continue;
                    }
                    let v = f.eval(x, y);
                    if v > 0 && v.gcd(&n) == 1 {
                        let e = x.extended_gcd(&y);
                        // x s - q y = 1
                        let m = [[x, -e.y * e.gcd], [y, e.x * e.gcd]];
                        debug_assert_eq!(mat_det(&m), 1);
                        return Ok(f.act(&m));
                    }
                }
            }
        }
    }
    Err(Error::Check(format!("no value of {f} coprime to {n}")))
}

/// Heegner form [N A, B, C] with B = beta mod 2N in the class of `class_rep`.
pub fn heegner_form_in_class(class_rep: &Bqf, n: i64, beta: i64) -> Result<Bqf> {
    let d = class_rep.disc();
    let nform = Bqf::new(n, beta, (beta * beta - d) / (4 * n));
    // Heegner form lies in [a] * [n], so start from [class] * [n]^{-1}.
    let start = compose_raw(class_rep, &nform.opposite())?;
    let start = if d < 0 { reduce(&start)?.0 } else { start };
    let g = coprime_representative(&start, n)?;
    let a = g.a;
    // b3 = g.b mod 2a, b3 = beta mod 2n
    let m1 = 2 * a;
    let m2 = 2 * n;
    let mut b3 = None;
    let l = m1 / m1.gcd(&m2) * m2;
    let mut b = g.b.rem_euclid(m1);
    while b < l {
        if (b - beta).rem_euclid(m2) == 0 {
            b3 = Some(b);
            break;
        }
        b += m1;
    }
    let b3 = b3.ok_or_else(|| Error::Check("CRT for Heegner form failed".into()))?;
    let a3 = a * n;
    let b3 = if b3 > a3 { b3 - 2 * a3 * ((b3 + a3) / (2 * a3)) } else { b3 };
    let out = Bqf::new(a3, b3, (b3 * b3 - d) / (4 * a3));
    if out.disc() != d {
        return Err(Error::Check(format!("Heegner form {out} has wrong discriminant")));
    }
    Ok(out)
}

/// One Heegner point per ideal class, all with the same residue B mod 2N.
pub fn heegner_points(d: i64, n: i64) -> Result<Vec<HeegnerPoint>> {
    if n < 1 {
        return invalid("level must be positive");
    }
    if !crate::numtheory::heegner_condition(d, n as u64)? {
        return invalid(format!("Heegner condition fails for D = {d}, N = {n}"));
    }
    let cl = class_group(d)?;
    let beta = heegner_beta(d, n)?;
    cl.forms
        .iter()
        .map(|f| Ok(HeegnerPoint { form: heegner_form_in_class(f, n, beta)?, level: n }))
        .collect()
}

/// The Heegner point of class [form(p)] * sigma^{-1}, same level and residue.
pub fn galois_conjugate(p: &HeegnerPoint, sigma: &Bqf) -> Result<HeegnerPoint> {
    let d = p.disc();
    if sigma.disc() != d {
        return invalid(format!("class {sigma} has discriminant {} != {d}", sigma.disc()));
    }
    let target = compose(&p.form, &sigma.opposite())?;
    let beta = p.form.b.rem_euclid(2 * p.level);
    Ok(HeegnerPoint { form: heegner_form_in_class(&target, p.level, beta)?, level: p.level })
}

/// Fundamental solution (t, u) of t^2 - D u^2 = 4 with t, u > 0, read off the
/// reduction cycle of the principal form.
pub fn pell_solution(d: i64) -> Result<(BigInt, BigInt)> {
    if d <= 0 || is_square(d) || d.rem_euclid(4) > 1 {
        return invalid(format!("Pell equation needs a positive non-square discriminant, got {d}"));
    }
    let s = isqrt(d as u64) as i64;
    let b = if (s - d).rem_euclid(2) == 0 { s } else { s - 1 };
    let f = Bqf::new(1, b, (b * b - d) / 4);
    let p = cycle_product(&f);
    pell_from_matrix(&f, &p)
}

fn pell_from_matrix(f: &Bqf, p: &[[BigInt; 2]; 2]) -> Result<(BigInt, BigInt)> {
    let mut t = &p[0][0] + &p[1][1];
    let mut u = if f.a != 0 { -&p[1][0] / BigInt::from(f.a) } else { &p[0][1] / BigInt::from(f.c) };
    if t.is_negative() {
        t = -t;
        u = -u;
    }
    let u = u.abs();
    if !u.is_positive() {
        return Err(Error::Check(format!("trivial reduction cycle for {f}")));
    }
    Ok((t, u))
}

/// Product of the reduction transforms around the cycle of a reduced form.
fn cycle_product(f: &Bqf) -> [[BigInt; 2]; 2] {
    let one = BigInt::one();
    let zero = BigInt::zero();
    let mut p = [[one.clone(), zero.clone()], [zero, one]];
    let mut g = *f;
    loop {
        let (h, m) = rho(&g);
        let mb = m.map(|r| r.map(BigInt::from));
        p = [
            [&p[0][0] * &mb[0][0] + &p[0][1] * &mb[1][0], &p[0][0] * &mb[0][1] + &p[0][1] * &mb[1][1]],
            [&p[1][0] * &mb[0][0] + &p[1][1] * &mb[1][0], &p[1][0] * &mb[0][1] + &p[1][1] * &mb[1][1]],
        ];
        g = h;
        if g == *f {
            return p;
        }
    }
}

/// Automorph [[(t+bu)/2, cu], [-au, (t-bu)/2]] of f, with (t, u) the
/// fundamental solution for the discriminant of the primitive part of f.
pub fn pell_automorph_big(f: &Bqf) -> Result<[[BigInt; 2]; 2]> {
    let g = f.content();
    let f0 = Bqf::new(f.a / g, f.b / g, f.c / g);
    let (t, u) = pell_solution(f0.disc())?;
    let two = BigInt::from(2);
    Ok([
        [(&t + BigInt::from(f0.b) * &u) / &two, BigInt::from(f0.c) * &u],
        [-BigInt::from(f0.a) * &u, (&t - BigInt::from(f0.b) * &u) / &two],
    ])
}

pub fn pell_automorph(f: &Bqf) -> Result<Mat2> {
    let m = pell_automorph_big(f)?;
    let cv = |x: &BigInt| x.to_i64().ok_or_else(|| Error::Precision("automorph entries overflow i64".into()));
    Ok([[cv(&m[0][0])?, cv(&m[0][1])?], [cv(&m[1][0])?, cv(&m[1][1])?]])
}

/// Gauss-reduced indefinite forms: 0 < b < sqrt D, sqrt D - b < 2|a| < sqrt D + b.
pub fn reduced_indefinite(d: i64) -> Vec<Bqf> {
    let s = isqrt(d as u64) as i64;
    let mut out = Vec::new();
    for b in 1..=s {
        if (b * b - d) % 4 != 0 {
            continue;
        }
        let m = (d - b * b) / 4;
        for a0 in 1..=m {
            if m % a0 != 0 || 2 * a0 < s - b + 1 || 2 * a0 > s + b {
                continue;
            }
            for a in [a0, -a0] {
                out.push(Bqf::new(a, b, -m / a));
            }
        }
    }
    out.sort();
    out
}

/// One reduction step on a reduced indefinite form, with its transform.
pub fn rho(f: &Bqf) -> (Bqf, Mat2) {
    let s = isqrt(f.disc() as u64) as i64;
    let c2 = 2 * f.c.abs();
    let bp = s - (s + f.b).rem_euclid(c2);
    let t = (bp + f.b) / (2 * f.c);
    let m = [[0, -1], [1, t]];
    (f.act(&m), m)
}

/// Proper SL2(Z)-classes of forms (all contents) of discriminant D > 0 non-square,
/// each given by the first form of its reduction cycle, sorted.
pub fn indefinite_classes(d: i64) -> Result<Vec<Bqf>> {
    if d <= 0 || is_square(d) || d.rem_euclid(4) > 1 {
        return invalid(format!("{d} is not a positive non-square discriminant"));
    }
    if d > 4_000_000 {
        return invalid(format!("discriminant {d} above enumeration cap"));
    }
    let reduced = reduced_indefinite(d);
    let mut seen: BTreeSet<Bqf> = BTreeSet::new();
    let mut reps = Vec::new();
    for f in &reduced {
        if seen.contains(f) {
            continue;
        }
        let mut cyc = vec![*f];
        seen.insert(*f);
        let mut g = rho(f).0;
        while g != *f {
            if !seen.insert(g) {
                return Err(Error::Check(format!("reduction cycle through {f} is not closed")));
            }
            cyc.push(g);
            g = rho(&g).0;
        }
        reps.push(*cyc.iter().min().expect("nonempty cycle"));
    }
    reps.sort();
    Ok(reps)
}

/// Gamma_0(N)-classes of forms [A, B, C] with N | A and discriminant D > 0 non-square.
pub fn gamma0_classes(d: i64, n: i64) -> Result<Vec<Bqf>> {
    let reps = indefinite_classes(d)?;
    let mut out = Vec::new();
    let p1 = projective_line(n);
    for q in reps {
        let mb = pell_automorph_big(&q)?;
        let bn = BigInt::from(n);
        let m = mb.map(|r| r.map(|x| x.mod_floor(&bn).to_i64().expect("reduced mod n")));
        let mut orbit_of: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        let mut next = 0;
        for &pt in &p1 {
            if orbit_of.contains_key(&pt) {
                continue;
            }
            let mut cur = pt;
            loop {
                orbit_of.insert(cur, next);
                let img = p1_normalize(m[0][0] * cur.0 + m[0][1] * cur.1, m[1][0] * cur.0 + m[1][1] * cur.1, n);
                if orbit_of.contains_key(&img) {
                    break;
                }
                cur = img;
            }
            let g = lift_column(pt.0, pt.1, n);
            let form = q.act(&g);
            if form.a.rem_euclid(n) == 0 {
                out.push(form);
            }
            next += 1;
        }
    }
    Ok(out)
}

/// Points of P^1(Z/N) as normalized pairs.
pub fn projective_line(n: i64) -> Vec<(i64, i64)> {
    let mut set = BTreeSet::new();
    for x in 0..n {
        for y in 0..n {
            if x.gcd(&y).gcd(&n) == 1 {
                set.insert(p1_normalize(x, y, n));
            }
        }
    }
    set.into_iter().collect()
}

/// Canonical representative of (x : y) under scaling by units mod n.
pub fn p1_normalize(x: i64, y: i64, n: i64) -> (i64, i64) {
    if n == 1 {
        return (0, 0);
    }
    let mut best = (x.rem_euclid(n), y.rem_euclid(n));
    for u in 1..n {
        if u.gcd(&n) != 1 {
            continue;
        }
        let cand = ((u * x).rem_euclid(n), (u * y).rem_euclid(n));
        if cand < best {
            best = cand;
        }
    }
    best
}

/// A matrix in SL2(Z) whose first column is congruent to (x, y) mod n.
pub fn lift_column(x: i64, y: i64, n: i64) -> Mat2 {
    if n == 1 {
        return IDENTITY;
    }
    // find (x', y') = (x, y) mod n with gcd 1
    for k in 0..n * n + 2 {
        for (xx, yy) in [(x, y + k * n), (x + k * n, y)] {
            if xx.gcd(&yy) == 1 {
                let e = xx.extended_gcd(&yy);
                let m = [[xx, -e.y], [yy, e.x]];
                if mat_det(&m) == 1 {
                    return m;
                }
            }
        }
    }
    unreachable!("column lift exists");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_examples() {
        let (f, m) = reduce(&Bqf::new(1, 1, 1)).unwrap();
        assert_eq!(f, Bqf::new(1, 1, 1));
        assert_eq!(m, IDENTITY);
        let (f, m) = reduce(&Bqf::new(2, 3, 4)).unwrap();
        assert_eq!(f, Bqf::new(2, -1, 3));
        assert_eq!(Bqf::new(2, 3, 4).act(&m), f);
        let (f, m) = reduce(&Bqf::new(6, 1, 1)).unwrap();
        assert_eq!(f, Bqf::new(1, 1, 6));
        assert_eq!(mat_det(&m), 1);
        assert!(reduce(&Bqf::new(1, 3, 1)).is_err());
    }

    #[test]
    fn class_group_examples() {
        let g = class_group(-3).unwrap();
        assert_eq!(g.forms, vec![Bqf::new(1, 1, 1)]);
        let g = class_group(-23).unwrap();
        let set: BTreeSet<_> = g.forms.iter().copied().collect();
        let want: BTreeSet<_> = [Bqf::new(1, 1, 6), Bqf::new(2, 1, 3), Bqf::new(2, -1, 3)].into();
        assert_eq!(set, want);
        let g = class_group(-4).unwrap();
        assert_eq!(g.forms, vec![Bqf::new(1, 0, 1)]);
        assert!(class_group(-12).is_err());
        let sq = compose(&Bqf::new(2, 1, 3), &Bqf::new(2, 1, 3)).unwrap();
        assert_eq!(sq, Bqf::new(2, -1, 3));
    }

    #[test]
    fn genus_char_examples() {
        assert_eq!(genus_char(1, &Bqf::new(3, 1, 5)).unwrap(), 1);
        assert_eq!(genus_char(-7, &Bqf::new(1, 1, 2)).unwrap(), 1);
        assert_eq!(genus_char(-7, &Bqf::new(2, 1, 1)).unwrap(), kronecker(-7, 2));
        assert_eq!(genus_char(-3, &Bqf::new(2, 0, 0)).unwrap(), -1);
        assert_eq!(genus_char(-3, &Bqf::new(3, 0, 3)).unwrap(), 0);
        assert!(genus_char(-7, &Bqf::new(1, 0, 1)).is_err());
    }

    #[test]
    fn heegner_examples() {
        let p = heegner_points(-3, 1).unwrap();
        assert_eq!(p.len(), 1);
        let (x, y) = p[0].tau();
        assert!((y - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((x - 0.5).abs() < 1e-12 || (x + 0.5).abs() < 1e-12);
        assert_eq!(heegner_points(-23, 1).unwrap().len(), 3);
        let p = heegner_points(-11, 3).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].form.a % 3, 0);
        assert!(heegner_points(-7, 3).is_err());
    }

    #[test]
    fn galois_action() {
        let cl = class_group(-23).unwrap();
        let pts = heegner_points(-23, 1).unwrap();
        let principal = pts.iter().find(|p| reduce(&p.form).unwrap().0 == Bqf::new(1, 1, 6)).unwrap();
        let img = galois_conjugate(principal, &Bqf::new(2, 1, 3)).unwrap();
        assert_eq!(reduce(&img.form).unwrap().0, Bqf::new(2, -1, 3));
        let same = galois_conjugate(principal, &Bqf::new(1, 1, 6)).unwrap();
        assert_eq!(reduce(&same.form).unwrap().0, Bqf::new(1, 1, 6));
        let s = Bqf::new(2, 1, 3);
        let twice = galois_conjugate(&galois_conjugate(principal, &s).unwrap(), &s).unwrap();
        let sq = compose(&s, &s).unwrap();
        let once = galois_conjugate(principal, &sq).unwrap();
        assert_eq!(cl.index_of(&twice.form).unwrap(), cl.index_of(&once.form).unwrap());
        let p3 = heegner_points(-23, 3).unwrap();
        for p in &p3 {
            let q = galois_conjugate(p, &s).unwrap();
            assert_eq!(q.form.a % 3, 0);
            assert_eq!((q.form.b - p.form.b).rem_euclid(6), 0);
        }
    }

    #[test]
    fn pell_examples() {
        let m = pell_automorph(&Bqf::new(1, 1, -1)).unwrap();
        assert_eq!(m, [[2, -1], [-1, 1]]);
        let m = pell_automorph(&Bqf::new(1, 0, -3)).unwrap();
        assert_eq!(m, [[2, -3], [-1, 2]]);
        for f in [Bqf::new(1, 1, -1), Bqf::new(1, 0, -3), Bqf::new(3, 7, -2), Bqf::new(2, 2, -6)] {
            let m = pell_automorph(&f).unwrap();
            assert_eq!(f.act(&m), f);
            assert_eq!(mat_det(&m), 1);
        }
        assert!(pell_automorph(&Bqf::new(0, 1, 0)).is_err());
    }

    #[test]
    fn pell_matches_search() {
        for d in 5..150i64 {
            if is_square(d) || d.rem_euclid(4) > 1 {
                continue;
            }
            let (t, u) = pell_solution(d).unwrap();
            let v = (1..20_000_000i64).find(|&v| is_square(d * v * v + 4)).unwrap_or_else(|| panic!("no search hit for {d}"));
            assert_eq!(u, BigInt::from(v), "D = {d}");
            assert_eq!(&t * &t - BigInt::from(d) * &u * &u, BigInt::from(4));
        }
    }

    #[test]
    fn gamma0_class_forms() {
        for (d, n) in [(12, 3), (21, 3), (33, 3), (60, 3), (5, 1), (8, 7)] {
            let cls = gamma0_classes(d, n).unwrap();
            assert!(!cls.is_empty());
            for f in &cls {
                assert_eq!(f.disc(), d);
                assert_eq!(f.a % n, 0);
            }
        }
    }

    #[test]
    fn indefinite_class_counts() {
        // narrow class numbers of primitive forms plus imprimitive classes
        assert_eq!(indefinite_classes(5).unwrap().len(), 1);
        assert_eq!(indefinite_classes(12).unwrap().len(), 2);
        // disc 20: primitive [1,4,-1], [-1,4,1] (h+ = 2 -> actually 1 class each sign) plus 2*[1,1,-1]
        let c20 = indefinite_classes(20).unwrap();
        assert!(c20.iter().any(|f| f.content() == 2));
    }
}
