//! Finite quadratic modules, presented as Z^n modulo a full-rank lattice, and
//! the Weil representation of SL2(Z) on their group algebras.

mod invariants;
mod phin;

pub use invariants::{
    fundamental_invariant_uk, isotypic_dimension, key2_bruteforce, proportionality_residual, sym2_action, Gl2, Key2Report, QuadChar,
    Sym2,
};
pub use phin::{build_phin, PhiN, PhiNReport};

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};
use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};
use crate::special::{c, C64};

/// Dense vector in C[A], indexed by element index.
pub type WeilVector = Vec<C64>;

/// Sparse vector in C[A]: (element index, coefficient), indices strictly increasing.
pub type SparseVector = Vec<(usize, C64)>;

#[derive(Debug)]
pub struct Fqm {
    n: usize,
    rows: Vec<Vec<i64>>,
    diag: Vec<i64>,
    strides: Vec<usize>,
    size: usize,
    gram: Vec<Vec<Rational64>>,
    den: i64,
    qd: Vec<i64>,
    bij: Vec<Vec<i64>>,
    roots: Vec<C64>,
    sig: OnceLock<std::result::Result<u8, String>>,
}

/// Incremental Hermite normal form: rows[i] has zeros before column i.
#[derive(Clone, Debug)]
pub(crate) struct Hnf {
    rows: Vec<Option<Vec<i64>>>,
}

impl Hnf {
    pub(crate) fn new(n: usize) -> Self {
        Hnf { rows: vec![None; n] }
    }

    fn det(&self) -> Option<i64> {
        let mut d = 1i64;
        for (i, r) in self.rows.iter().enumerate() {
            d = d.checked_mul(r.as_ref()?[i])?;
        }
        Some(d)
    }

    /// Insert a vector; returns true if the lattice grew.
    pub(crate) fn insert(&mut self, v: &[i64]) -> bool {
        let n = self.rows.len();
        let modulus = self.det();
        let mut v: Vec<i64> = v.to_vec();
        if let Some(m) = modulus {
            v.iter_mut().for_each(|x| *x = x.rem_euclid(m));
        }
        let mut grew = false;
        for i in 0..n {
            if v[i] == 0 {
                continue;
            }
            match self.rows[i].take() {
                None => {
                    if v[i] < 0 {
                        v.iter_mut().for_each(|x| *x = -*x);
                    }
                    self.rows[i] = Some(v);
                    grew = true;
                    break;
                }
                Some(r) => {
                    if v[i] % r[i] == 0 {
                        let q = v[i] / r[i];
                        for k in i..n {
                            v[k] -= q * r[k];
                        }
                        self.rows[i] = Some(r);
                    } else {
                        let e = r[i].extended_gcd(&v[i]);
                        let g = e.gcd;
                        let mut new: Vec<i64> = (0..n).map(|k| e.x * r[k] + e.y * v[k]).collect();
                        let rest: Vec<i64> = (0..n).map(|k| (v[i] / g) * r[k] - (r[i] / g) * v[k]).collect();
                        if new[i] < 0 {
                            new.iter_mut().for_each(|x| *x = -*x);
                        }
                        self.rows[i] = Some(new);
                        grew = true;
                        v = rest;
                    }
                    if let Some(m) = modulus {
                        v.iter_mut().for_each(|x| *x = x.rem_euclid(m));
                    }
                }
            }
        }
        if grew {
            self.size_reduce();
        }
        grew
    }

    fn size_reduce(&mut self) {
        let n = self.rows.len();
        let m = self.det();
        for j in 0..n {
            let Some(mut rj) = self.rows[j].take() else { continue };
            if let Some(m) = m {
                for x in rj.iter_mut().skip(j + 1) {
                    *x = x.rem_euclid(m);
                }
            }
            for k in j + 1..n {
                if let Some(rk) = &self.rows[k] {
                    let q = rj[k].div_euclid(rk[k]);
                    if q != 0 {
                        for t in k..n {
                            rj[t] -= q * rk[t];
                        }
                    }
                }
            }
            self.rows[j] = Some(rj);
        }
    }

    pub(crate) fn full_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.rows.iter().cloned().collect()
    }
}

fn rat_lcm_den(xs: impl Iterator<Item = Rational64>) -> i64 {
    xs.fold(1i64, |acc, x| acc.lcm(x.denom()))
}

fn frac_num(x: Rational64, den: i64) -> i64 {
    (x * Rational64::from_integer(den)).to_integer().rem_euclid(den)
}

impl Fqm {
    /// Module Z^n / L for the bilinear Gram matrix `gram` (Q(x) = x^T G x / 2)
    /// and a generating set of the lattice L.
    pub fn new(gram: Vec<Vec<Rational64>>, lattice: &[Vec<i64>]) -> Result<Fqm> {
        let n = gram.len();
        if n == 0 || gram.iter().any(|r| r.len() != n) {
            return invalid("Gram matrix must be square and nonempty");
        }
        for i in 0..n {
            for j in 0..n {
                if gram[i][j] != gram[j][i] {
                    return invalid("Gram matrix must be symmetric");
                }
            }
        }
        let mut h = Hnf::new(n);
        for l in lattice {
            if l.len() != n {
                return invalid("lattice generator has wrong length");
            }
            h.insert(l);
        }
        let rows = h.full_rows().ok_or_else(|| Error::Invalid("lattice is not of full rank".into()))?;
        let half = Rational64::new(1, 2);
        let den = rat_lcm_den(
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| if i == j { gram[i][i] * half } else { gram[i][j] }),
        );
        let qd: Vec<i64> = (0..n).map(|i| frac_num(gram[i][i] * half, den)).collect();
        let bij: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| frac_num(gram[i][j], den)).collect()).collect();
        let diag: Vec<i64> = (0..n).map(|i| rows[i][i]).collect();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * diag[i + 1] as usize;
        }
        let size = strides[0] * diag[0] as usize;
        let roots = (0..den).map(|k| {
            let t = 2.0 * PI * k as f64 / den as f64;
            c(t.cos(), t.sin())
        });
        let m = Fqm {
            n,
            rows,
            diag,
            strides,
            size,
            gram,
            den,
            qd,
            bij,
            roots: roots.collect(),
            sig: OnceLock::new(),
        };
        // L must be even and integral against Z^n.
        for l in &m.rows {
            let ql = m.q_rational(l);
            if !ql.is_integer() {
                return invalid(format!("lattice vector {l:?} has non-integral norm {ql}"));
            }
            for j in 0..n {
                let mut e = vec![0; n];
                e[j] = 1;
                if !m.b_rational(l, &e).is_integer() {
                    return invalid(format!("lattice vector {l:?} pairs non-integrally with e_{j}"));
                }
            }
        }
        Ok(m)
    }

    /// Module L^v / L for an even lattice whose dual has Gram matrix `dual_gram`;
    /// L is generated by the rows of its inverse.
    pub fn from_dual_gram(dual_gram: Vec<Vec<Rational64>>) -> Result<Fqm> {
        let inv = rat_inverse(&dual_gram).ok_or_else(|| Error::Invalid("singular Gram matrix".into()))?;
        let mut lat = Vec::new();
        for row in &inv {
            let mut r = Vec::new();
            for x in row {
                if !x.is_integer() {
                    return invalid("inverse Gram matrix is not integral");
                }
                r.push(x.to_integer());
            }
            lat.push(r);
        }
        Fqm::new(dual_gram, &lat)
    }

    /// Z/n with Q(x) = a x^2 / n.
    pub fn cyclic(n: i64, a: i64) -> Result<Fqm> {
        Fqm::new(vec![vec![Rational64::new(2 * a, n)]], &[vec![n]])
    }

    /// (Z/n)^2 with Q(x, y) = x y / n.
    pub fn hyperbolic(n: i64) -> Result<Fqm> {
        let z = Rational64::zero();
        let h = Rational64::new(1, n);
        Fqm::new(vec![vec![z, h], vec![h, z]], &[vec![n, 0], vec![0, n]])
    }

    /// (Z/m)^3 with coordinates (a, e, b) and Q = (t a b - e^2) / m.
    pub fn sym2(m: i64, t: i64) -> Result<Fqm> {
        let z = Rational64::zero();
        let g = vec![
            vec![z, z, Rational64::new(t, m)],
            vec![z, Rational64::new(-2, m), z],
            vec![Rational64::new(t, m), z, z],
        ];
        Fqm::new(g, &[vec![m, 0, 0], vec![0, m, 0], vec![0, 0, m]])
    }

    pub fn direct_sum(&self, other: &Fqm) -> Result<Fqm> {
        let n = self.n + other.n;
        let mut g = vec![vec![Rational64::zero(); n]; n];
        for i in 0..self.n {
            for j in 0..self.n {
                g[i][j] = self.gram[i][j];
            }
        }
        for i in 0..other.n {
            for j in 0..other.n {
                g[self.n + i][self.n + j] = other.gram[i][j];
            }
        }
        let mut lat = Vec::new();
        for r in &self.rows {
            let mut v = r.clone();
            v.resize(n, 0);
            lat.push(v);
        }
        for r in &other.rows {
            let mut v = vec![0; self.n];
            v.extend_from_slice(r);
            lat.push(v);
        }
        Fqm::new(g, &lat)
    }

    /// Same group with Q replaced by -Q.
    pub fn negated(&self) -> Result<Fqm> {
        let g = self.gram.iter().map(|r| r.iter().map(|x| -*x).collect()).collect();
        Fqm::new(g, &self.rows)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.size
    }

    /// Orders of the cyclic factors in the triangular presentation.
    pub fn diagonal(&self) -> &[i64] {
        &self.diag
    }

    /// Common denominator of Q and the bilinear form.
    pub fn level_den(&self) -> i64 {
        self.den
    }

    pub fn lattice_rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn gram(&self) -> &[Vec<Rational64>] {
        &self.gram
    }

    pub fn reduce(&self, x: &mut [i64]) {
        for i in 0..self.n {
            let q = x[i].div_euclid(self.diag[i]);
            if q != 0 {
                let r = &self.rows[i];
                for k in i..self.n {
                    x[k] -= q * r[k];
                }
            }
        }
    }

    pub fn index(&self, x: &[i64]) -> usize {
        let mut y = x.to_vec();
        self.reduce(&mut y);
        y.iter().zip(&self.strides).map(|(a, s)| *a as usize * s).sum()
    }

    pub fn coords(&self, idx: usize) -> Vec<i64> {
        let mut out = vec![0; self.n];
        self.coords_into(idx, &mut out);
        out
    }

    #[inline]
    pub fn coords_into(&self, idx: usize, out: &mut [i64]) {
        for i in 0..self.n {
            out[i] = ((idx / self.strides[i]) % self.diag[i] as usize) as i64;
        }
    }

    pub fn add(&self, x: usize, y: usize) -> usize {
        let a = self.coords(x);
        let b = self.coords(y);
        let s: Vec<i64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
        self.index(&s)
    }

    pub fn neg(&self, x: usize) -> usize {
        let a: Vec<i64> = self.coords(x).iter().map(|v| -v).collect();
        self.index(&a)
    }

    pub fn scale(&self, k: i64, x: usize) -> usize {
        let a: Vec<i64> = self.coords(x).iter().map(|v| k * v).collect();
        self.index(&a)
    }

    /// Numerator of Q(x) over `level_den()`, in [0, den).
    #[inline]
    pub fn q_num(&self, x: &[i64]) -> i64 {
        let d = self.den;
        let mut s = 0i64;
        for i in 0..self.n {
            let xi = x[i].rem_euclid(d);
            s = (s + self.qd[i] * (xi * xi % d)) % d;
            for j in i + 1..self.n {
                s = (s + self.bij[i][j] * (xi * x[j].rem_euclid(d) % d)) % d;
            }
        }
        s
    }

    /// Numerator of (x, y) over `level_den()`.
    #[inline]
    pub fn b_num(&self, x: &[i64], y: &[i64]) -> i64 {
        let d = self.den;
        let mut s = 0i64;
        for i in 0..self.n {
            if x[i] == 0 {
                continue;
            }
            let mut t = 0i64;
            for j in 0..self.n {
                t = (t + self.bij[i][j] * y[j].rem_euclid(d)) % d;
            }
            s = (s + x[i].rem_euclid(d) * t) % d;
        }
        s
    }

    /// The linear form y -> (x, y) as numerators: (x, y) = sum_j w_j y_j.
    pub fn pairing_row(&self, x: &[i64]) -> Vec<i64> {
        let d = self.den;
        (0..self.n)
            .map(|j| (0..self.n).fold(0i64, |acc, i| (acc + x[i].rem_euclid(d) * self.bij[i][j]) % d))
            .collect()
    }

    pub fn q_rational(&self, x: &[i64]) -> Rational64 {
        let mut s = Rational64::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.gram[i][j] * Rational64::from_integer(x[i] * x[j]);
            }
        }
        s / Rational64::from_integer(2)
    }

    pub fn b_rational(&self, x: &[i64], y: &[i64]) -> Rational64 {
        let mut s = Rational64::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.gram[i][j] * Rational64::from_integer(x[i] * y[j]);
            }
        }
        s
    }

    pub fn q_idx(&self, idx: usize) -> i64 {
        self.q_num(&self.coords(idx))
    }

    /// e(k / den).
    #[inline]
    pub fn root(&self, k: i64) -> C64 {
        self.roots[k.rem_euclid(self.den) as usize]
    }

    pub fn gauss_sum(&self) -> C64 {
        let mut x = vec![0; self.n];
        let mut s = c(0.0, 0.0);
        for idx in 0..self.size {
            self.coords_into(idx, &mut x);
            s += self.roots[self.q_num(&x) as usize];
        }
        s
    }

    /// sig with sum_x e(Q(x)) = sqrt|A| e(sig/8).
    pub fn signature_mod8(&self) -> Result<u8> {
        self.sig
            .get_or_init(|| {
                let g = self.gauss_sum();
                let r = (self.size as f64).sqrt();
                if (g.norm() - r).abs() > 1e-8 * r {
                    return Err(format!("Gauss sum has modulus {} instead of {r}: degenerate form", g.norm()));
                }
                let t = g.arg() / (2.0 * PI) * 8.0;
                let s = t.round();
                if (t - s).abs() > 1e-6 {
                    return Err(format!("Gauss sum argument {t}/8 is not an eighth root of unity"));
                }
                Ok(s.rem_euclid(8.0) as u8)
            })
            .clone()
            .map_err(Error::Check)
    }

    /// Milgram check: ||sum e(Q)| - sqrt|A|| / sqrt|A|.
    pub fn milgram_error(&self) -> f64 {
        let r = (self.size as f64).sqrt();
        (self.gauss_sum().norm() - r).abs() / r
    }

    pub fn basis_vector(&self, idx: usize) -> WeilVector {
        let mut v = vec![c(0.0, 0.0); self.size];
        v[idx] = c(1.0, 0.0);
        v
    }

    pub fn weil_t(&self, v: &[C64]) -> WeilVector {
        let mut x = vec![0; self.n];
        v.iter()
            .enumerate()
            .map(|(idx, a)| {
                self.coords_into(idx, &mut x);
                a * self.roots[self.q_num(&x) as usize]
            })
            .collect()
    }

    fn s_prefactor(&self) -> Result<C64> {
        let sig = self.signature_mod8()?;
        let t = -2.0 * PI * sig as f64 / 8.0;
        Ok(c(t.cos(), t.sin()) / (self.size as f64).sqrt())
    }

    /// rho(S) e_g = e(-sig/8) |A|^{-1/2} sum_d e(-(g, d)) e_d, applied densely.
    pub fn weil_s(&self, v: &[C64]) -> Result<WeilVector> {
        let pref = self.s_prefactor()?;
        let supp: Vec<(Vec<i64>, C64)> =
            v.iter().enumerate().filter(|(_, a)| a.norm_sqr() > 0.0).map(|(i, a)| (self.coords(i), *a)).collect();
        let mut out = vec![c(0.0, 0.0); self.size];
        let mut y = vec![0; self.n];
        for (d, o) in out.iter_mut().enumerate() {
            self.coords_into(d, &mut y);
            let w = self.pairing_row(&y);
            let mut s = c(0.0, 0.0);
            for (g, a) in &supp {
                let k = g.iter().zip(&w).fold(0i64, |acc, (gi, wi)| (acc + gi * wi) % self.den);
                s += a * self.roots[((self.den - k) % self.den) as usize];
            }
            *o = s * pref;
        }
        Ok(out)
    }

    pub fn weil_s_inv(&self, v: &[C64]) -> Result<WeilVector> {
        // S^{-1} = S^3 up to the central S^2; use S^{-1} = conj-transpose of the unitary S.
        let pref = self.s_prefactor()?.conj();
        let mut out = vec![c(0.0, 0.0); self.size];
        let supp: Vec<(Vec<i64>, C64)> =
            v.iter().enumerate().filter(|(_, a)| a.norm_sqr() > 0.0).map(|(i, a)| (self.coords(i), *a)).collect();
        let mut y = vec![0; self.n];
        for (d, o) in out.iter_mut().enumerate() {
            self.coords_into(d, &mut y);
            let w = self.pairing_row(&y);
            let mut s = c(0.0, 0.0);
            for (g, a) in &supp {
                let k = g.iter().zip(&w).fold(0i64, |acc, (gi, wi)| (acc + gi * wi) % self.den);
                s += a * self.roots[k as usize];
            }
            *o = s * pref;
        }
        Ok(out)
    }

    /// Relative residuals (||S v - v||, max |T v - v|) / ||v|| for a sparse
    /// vector, evaluating S v on every element of A. S v is constant on cosets
    /// of the annihilator of `span`, a generating set of a subgroup containing
    /// the support, so it is computed once per coset.
    pub fn sparse_invariance(&self, v: &SparseVector, span: &[usize]) -> Result<(f64, f64)> {
        let pref = self.s_prefactor()?;
        let d = self.den;
        let lookup: HashMap<usize, C64> = v.iter().copied().collect();
        let supp_rows: Vec<(Vec<i64>, C64)> = v.iter().map(|(i, a)| (self.coords(*i), *a)).collect();
        let span_rows: Vec<Vec<i64>> = span.iter().map(|&g| self.pairing_row(&self.coords(g))).collect();
        let mut cache: HashMap<Vec<i64>, C64> = HashMap::new();
        let mut x = vec![0; self.n];
        let mut res = 0.0;
        let mut nrm = 0.0;
        for idx in 0..self.size {
            self.coords_into(idx, &mut x);
            let key: Vec<i64> =
                span_rows.iter().map(|w| w.iter().zip(&x).fold(0i64, |acc, (a, b)| (acc + a * b) % d)).collect();
            let val = *cache.entry(key).or_insert_with(|| {
                let w = self.pairing_row(&x);
                let mut s = c(0.0, 0.0);
                for (g, a) in &supp_rows {
                    let k = g.iter().zip(&w).fold(0i64, |acc, (gi, wi)| (acc + gi * wi) % d);
                    s += a * self.roots[((d - k) % d) as usize];
                }
                s * pref
            });
            let orig = lookup.get(&idx).copied().unwrap_or(c(0.0, 0.0));
            res += (val - orig).norm_sqr();
            nrm += orig.norm_sqr();
        }
        let mut tmax: f64 = 0.0;
        for (g, a) in &supp_rows {
            let k = self.q_num(g);
            tmax = tmax.max((a * self.roots[k as usize] - a).norm());
        }
        let scale = nrm.sqrt();
        Ok(((res.sqrt()) / scale, tmax / scale))
    }

    pub fn all_elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    /// Subgroup generated by the given elements.
    pub fn subgroup(&self, gens: &[usize]) -> Subgroup {
        let mut set: HashSet<usize> = HashSet::new();
        set.insert(0);
        let mut queue: VecDeque<usize> = VecDeque::from([0]);
        let gcoords: Vec<Vec<i64>> = gens.iter().map(|&g| self.coords(g)).collect();
        while let Some(h) = queue.pop_front() {
            let hc = self.coords(h);
            for g in &gcoords {
                let s: Vec<i64> = hc.iter().zip(g).map(|(a, b)| a + b).collect();
                let k = self.index(&s);
                if set.insert(k) {
                    queue.push_back(k);
                }
            }
        }
        let mut elems: Vec<usize> = set.into_iter().collect();
        elems.sort_unstable();
        Subgroup { gens: gens.to_vec(), elems }
    }

    pub fn is_isotropic(&self, h: &Subgroup) -> bool {
        h.elems.iter().all(|&x| self.q_idx(x) == 0)
    }

    /// Orthogonal complement of the subgroup generated by `gens`, by enumeration.
    pub fn orthogonal(&self, gens: &[usize]) -> Vec<usize> {
        let rows: Vec<Vec<i64>> = gens.iter().map(|&g| self.pairing_row(&self.coords(g))).collect();
        let mut x = vec![0; self.n];
        let d = self.den;
        (0..self.size)
            .filter(|&idx| {
                self.coords_into(idx, &mut x);
                rows.iter().all(|w| w.iter().zip(&x).fold(0i64, |acc, (a, b)| (acc + a * b) % d) == 0)
            })
            .collect()
    }

    /// H^perp / H as a module, with the map from H^perp.
    pub fn isotropic_quotient(&self, h: &Subgroup) -> Result<IsotropicQuotient> {
        if !self.is_isotropic(h) {
            return invalid("subgroup is not isotropic");
        }
        let hperp = self.orthogonal(&h.gens);
        let n = self.n;
        let mut big = Hnf::new(n);
        for r in &self.rows {
            big.insert(r);
        }
        for &x in &hperp {
            big.insert(&self.coords(x));
        }
        let basis = big.full_rows().expect("full rank");
        let mut small = Hnf::new(n);
        for r in &self.rows {
            small.insert(r);
        }
        for &x in &h.elems {
            small.insert(&self.coords(x));
        }
        let small_rows = small.full_rows().expect("full rank");
        let solve = |x: &[i64]| -> Result<Vec<i64>> {
            // c . basis = x with basis rows triangular
            let mut rem = x.to_vec();
            let mut cs = vec![0; n];
            for i in 0..n {
                if rem[i] % basis[i][i] != 0 {
                    return Err(Error::Check("vector not in complement lattice".into()));
                }
                cs[i] = rem[i] / basis[i][i];
                for k in i..n {
                    rem[k] -= cs[i] * basis[i][k];
                }
            }
            Ok(cs)
        };
        let mut gram = vec![vec![Rational64::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                gram[i][j] = self.b_rational(&basis[i], &basis[j]);
            }
        }
        let lat: Vec<Vec<i64>> = small_rows.iter().map(|r| solve(r)).collect::<Result<_>>()?;
        let module = Fqm::new(gram, &lat)?;
        let mut to_quot = HashMap::new();
        for &x in &hperp {
            let cs = solve(&self.coords(x))?;
            to_quot.insert(x, module.index(&cs));
        }
        if module.order() * h.elems.len() != hperp.len() {
            return Err(Error::Check("quotient order mismatch".into()));
        }
        Ok(IsotropicQuotient { module, hperp, to_quot })
    }
}

/// A subgroup with its generators and sorted element list.
#[derive(Clone, Debug)]
pub struct Subgroup {
    pub gens: Vec<usize>,
    pub elems: Vec<usize>,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elems.binary_search(&x).is_ok()
    }
}

/// H^perp / H together with the projection from H^perp.
#[derive(Debug)]
pub struct IsotropicQuotient {
    pub module: Fqm,
    pub hperp: Vec<usize>,
    pub to_quot: HashMap<usize, usize>,
}

impl IsotropicQuotient {
    /// Induction: e_mu -> sum over the coset mu + H.
    pub fn induce(&self, ambient: &Fqm, w: &[C64]) -> WeilVector {
        let mut v = vec![c(0.0, 0.0); ambient.order()];
        for &x in &self.hperp {
            v[x] = w[self.to_quot[&x]];
        }
        v
    }

    /// Restriction, the adjoint of induction.
    pub fn restrict(&self, v: &[C64]) -> WeilVector {
        let mut w = vec![c(0.0, 0.0); self.module.order()];
        for &x in &self.hperp {
            w[self.to_quot[&x]] += v[x];
        }
        w
    }
}

pub(crate) fn rat_inverse(m: &[Vec<Rational64>]) -> Option<Vec<Vec<Rational64>>> {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|x| BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))).collect())
        .collect();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].clone();
        for k in 0..n {
            a[col][k] = &a[col][k] / &p;
            inv[col][k] = &inv[col][k] / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for k in 0..n {
                    let t = &f * &a[col][k];
                    a[r][k] = &a[r][k] - t;
                    let t = &f * &inv[col][k];
                    inv[r][k] = &inv[r][k] - t;
                }
            }
        }
    }
    inv.iter()
        .map(|r| r.iter().map(|x| Some(Rational64::new(x.numer().to_i64()?, x.denom().to_i64()?))).collect())
        .collect()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_vector(n: usize, seed: u64) -> WeilVector {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let b = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                c(a, b)
            })
            .collect()
    }

    #[test]
    fn signatures() {
        assert_eq!(Fqm::hyperbolic(5).unwrap().signature_mod8().unwrap(), 0);
        assert_eq!(Fqm::cyclic(3, 1).unwrap().signature_mod8().unwrap(), 2);
        assert_eq!(Fqm::cyclic(3, -1).unwrap().signature_mod8().unwrap(), 6);
        // Z/2 with Q = x^2/4 is the discriminant form of A1: signature 1.
        let a1 = Fqm::new(vec![vec![Rational64::new(1, 2)]], &[vec![2]]).unwrap();
        assert_eq!(a1.signature_mod8().unwrap(), 1);
        // degenerate: Z/4 with Q = x^2/4 has radical {0, 2}
        let bad = Fqm::new(vec![vec![Rational64::new(1, 2)]], &[vec![4]]).unwrap();
        assert!(bad.signature_mod8().is_err());
    }

    #[test]
    fn t_action_and_braid() {
        let a = Fqm::cyclic(3, 1).unwrap();
        let v = a.weil_t(&a.basis_vector(1));
        assert!((v[1] - a.root(1)).norm() < 1e-15);
        assert_eq!(a.weil_t(&a.basis_vector(0))[0], c(1.0, 0.0));
        for m in [Fqm::hyperbolic(4).unwrap(), Fqm::sym2(5, 1).unwrap(), Fqm::cyclic(7, 3).unwrap()] {
            let v = random_vector(m.order(), 3);
            let mut w = v.clone();
            for _ in 0..3 {
                w = m.weil_s(&m.weil_t(&w)).unwrap();
            }
            let s2 = m.weil_s(&m.weil_s(&v).unwrap()).unwrap();
            assert!(dist(&w, &s2) < 1e-10 * norm(&v));
            assert!((norm(&m.weil_s(&v).unwrap()) - norm(&v)).abs() < 1e-10);
        }
    }

    #[test]
    fn induce_restrict() {
        let a0 = Fqm::cyclic(5, 2).unwrap();
        let a = a0.direct_sum(&a0.negated().unwrap()).unwrap();
        let diag_gen = a.index(&[1, 1]);
        let h = a.subgroup(&[diag_gen]);
        assert_eq!(h.order(), 5);
        let q = a.isotropic_quotient(&h).unwrap();
        assert_eq!(q.module.order(), 1);
        let w = q.induce(&a, &[c(1.0, 0.0)]);
        for mu in 0..5 {
            assert_eq!(w[a.index(&[mu, mu])], c(1.0, 0.0));
        }
        assert!(dist(&a.weil_s(&w).unwrap(), &w) < 1e-12);
        // larger quotient: hyperbolic (Z/9)^2 with H = <(3,0)>
        let b = Fqm::hyperbolic(9).unwrap();
        let h = b.subgroup(&[b.index(&[3, 0])]);
        let q = b.isotropic_quotient(&h).unwrap();
        assert_eq!(q.module.order(), 9);
        for mu in 0..q.module.order() {
            let e = q.module.basis_vector(mu);
            let up = q.induce(&b, &e);
            let back = q.restrict(&up);
            let want: Vec<C64> = e.iter().map(|x| x * 3.0).collect();
            assert!(dist(&back, &want) < 1e-14);
            let lhs = b.weil_s(&up).unwrap();
            let rhs = q.induce(&b, &q.module.weil_s(&e).unwrap());
            assert!(dist(&lhs, &rhs) < 1e-10);
            assert!(dist(&b.weil_t(&up), &q.induce(&b, &q.module.weil_t(&e))) < 1e-12);
        }
    }
}
