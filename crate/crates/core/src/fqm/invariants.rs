//! Rank-three invariants on Sym2(Z/m) and the GL2(F_p) action on them.

use serde::Serialize;

use super::{Fqm, WeilVector};
use crate::bqf::{genus_char, Bqf};
use crate::error::{invalid, Result};
use crate::numtheory::{is_fundamental, is_prime_u64, kronecker};
use crate::special::{c, C64};

/// Sym2(Z/m) with coordinates (a, e, b) for [[a, e], [e, b]] and Q = (t a b - e^2)/m.
#[derive(Debug)]
pub struct Sym2 {
    pub m: i64,
    pub twist: i64,
    pub module: Fqm,
}

impl Sym2 {
    pub fn new(m: i64, twist: i64) -> Result<Sym2> {
        Ok(Sym2 { m, twist, module: Fqm::sym2(m, twist)? })
    }

    pub fn index(&self, a: i64, e: i64, b: i64) -> usize {
        self.module.index(&[a, e, b])
    }

    pub fn triple(&self, idx: usize) -> (i64, i64, i64) {
        let x = self.module.coords(idx);
        (x[0], x[1], x[2])
    }

    /// chi_Delta([a, 2e, t b]) when m | (2e)^2 - 4 t a b, else 0.
    pub fn genus_vector(&self, delta: i64) -> Result<WeilVector> {
        let mut v = Vec::with_capacity(self.module.order());
        for idx in self.module.all_elements() {
            let (a, e, b) = self.triple(idx);
            let f = Bqf::new(a, 2 * e, self.twist * b);
            let val = if f.disc().rem_euclid(self.m) == 0 { genus_char(delta, &f)? } else { 0 };
            v.push(c(val as f64, 0.0));
        }
        Ok(v)
    }
}

/// The vector u_K on Sym2(Z/|Delta|) for an odd fundamental discriminant.
pub fn fundamental_invariant_uk(delta: i64) -> Result<(Sym2, WeilVector)> {
    if delta % 2 == 0 || !is_fundamental(delta) {
        return invalid(format!("u_K needs an odd fundamental discriminant, got {delta}"));
    }
    let s = Sym2::new(delta.abs(), 1)?;
    let v = s.genus_vector(delta)?;
    Ok((s, v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QuadChar {
    Trivial,
    Legendre,
}

impl QuadChar {
    pub fn eval(&self, p: i64, x: i64) -> i32 {
        match self {
            QuadChar::Trivial => 1,
            QuadChar::Legendre => kronecker(x.rem_euclid(p), p),
        }
    }
}

/// Elements of GL2(F_p) as [a, b, c, d].
pub struct Gl2 {
    pub p: i64,
    pub elems: Vec<[i64; 4]>,
}

impl Gl2 {
    pub fn new(p: i64) -> Gl2 {
        let mut elems = Vec::new();
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    for d in 0..p {
                        if (a * d - b * c).rem_euclid(p) != 0 {
                            elems.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        Gl2 { p, elems }
    }

    pub fn det(&self, h: &[i64; 4]) -> i64 {
        (h[0] * h[3] - h[1] * h[2]).rem_euclid(self.p)
    }
}

/// h mu h^T / det h on a symmetric matrix (a, e, b) mod p.
pub fn sym2_action(p: i64, h: &[i64; 4], mu: (i64, i64, i64)) -> (i64, i64, i64) {
    let [x, y, z, w] = *h;
    let (a, e, b) = mu;
    let det = (x * w - y * z).rem_euclid(p);
    let inv = crate::numtheory::inv_mod(det, p).expect("invertible determinant");
    // [[x, y], [z, w]] [[a, e], [e, b]] [[x, z], [y, w]]
    let na = x * x * a + 2 * x * y * e + y * y * b;
    let ne = x * z * a + (x * w + y * z) * e + y * w * b;
    let nb = z * z * a + 2 * z * w * e + w * w * b;
    ((na * inv).rem_euclid(p), (ne * inv).rem_euclid(p), (nb * inv).rem_euclid(p))
}

fn check_odd_prime(p: i64) -> Result<()> {
    if p == 2 {
        return invalid("p = 2 is not supported");
    }
    if p < 2 || !is_prime_u64(p as u64) {
        return invalid(format!("{p} is not an odd prime"));
    }
    Ok(())
}

fn rank_and_basis(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let dot: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > tol * scale.max(1.0) {
            w.iter_mut().for_each(|x| *x /= n);
            basis.push(w);
        }
    }
    basis
}

/// Dimension and an orthonormal basis of the chi-isotypic part of C[Sym2(F_p)]
/// under GL2(F_p), from the projections of all basis vectors.
pub fn isotypic_dimension(p: i64, chi: QuadChar) -> Result<(usize, Vec<WeilVector>)> {
    check_odd_prime(p)?;
    let s = Sym2::new(p, 1)?;
    let g = Gl2::new(p);
    let size = s.module.order();
    let mut projections = Vec::with_capacity(size);
    for idx in 0..size {
        let mu = s.triple(idx);
        let mut v = vec![0.0; size];
        for h in &g.elems {
            let (a, e, b) = sym2_action(p, h, mu);
            v[s.index(a, e, b)] += chi.eval(p, g.det(h)) as f64;
        }
        projections.push(v);
    }
    let basis = rank_and_basis(&projections, 1e-9);
    let out = basis.iter().map(|b| b.iter().map(|x| c(*x, 0.0)).collect()).collect();
    Ok((basis.len(), out))
}

#[derive(Clone, Debug, Serialize)]
pub struct Key2Report {
    pub p: i64,
    pub nonzero_isotropic: usize,
    pub orbit_size: usize,
    pub counterexamples: Vec<(i64, i64, i64)>,
}

/// Exhaustive check that, for nonzero mu in Sym2(F_p), isotropy, membership
/// in the orbit of diag(1, 0), and Stab(mu) lying in ker(chi o det) agree.
pub fn key2_bruteforce(p: i64) -> Result<Key2Report> {
    check_odd_prime(p)?;
    let g = Gl2::new(p);
    let ell = (1, 0, 0);
    let mut orbit = std::collections::HashSet::new();
    for h in &g.elems {
        orbit.insert(sym2_action(p, h, ell));
    }
    let mut counterexamples = Vec::new();
    let mut nonzero_isotropic = 0;
    for a in 0..p {
        for e in 0..p {
            for b in 0..p {
                if (a, e, b) == (0, 0, 0) {
                    continue;
                }
                let iso = (a * b - e * e).rem_euclid(p) == 0;
                if iso {
                    nonzero_isotropic += 1;
                }
                let in_orbit = orbit.contains(&(a, e, b));
                let stab_in_kernel = g
                    .elems
                    .iter()
                    .filter(|h| sym2_action(p, h, (a, e, b)) == (a, e, b))
                    .all(|h| kronecker(g.det(h), p) == 1);
                if !(iso == in_orbit && in_orbit == stab_in_kernel) {
                    counterexamples.push((a, e, b));
                }
            }
        }
    }
    Ok(Key2Report { p, nonzero_isotropic, orbit_size: orbit.len(), counterexamples })
}

/// Residual ||b - lambda u|| / ||b|| for the best scalar lambda.
pub fn proportionality_residual(b: &[C64], u: &[C64]) -> f64 {
    let uu: f64 = u.iter().map(|x| x.norm_sqr()).sum();
    let ub: C64 = u.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let lambda = ub / uu;
    let r: f64 = b.iter().zip(u).map(|(y, x)| (y - lambda * x).norm_sqr()).sum();
    let bb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    (r / bb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fqm::{dist, norm};

    #[test]
    fn uk_values() {
        let (s, u) = fundamental_invariant_uk(-3).unwrap();
        assert_eq!(u[s.index(1, 0, 0)], c(1.0, 0.0));
        assert_eq!(u[0], c(0.0, 0.0));
        assert_eq!(u[s.index(2, 0, 0)], c(-1.0, 0.0));
        assert!(fundamental_invariant_uk(-4).is_err());
        assert!(fundamental_invariant_uk(-12).is_err());
    }

    #[test]
    fn uk_invariant() {
        for d in [-3, -7, -11] {
            let (s, u) = fundamental_invariant_uk(d).unwrap();
            let m = &s.module;
            assert_eq!(m.weil_t(&u), u);
            let su = m.weil_s(&u).unwrap();
            assert!(dist(&su, &u) < 1e-10 * norm(&u), "D = {d}");
        }
    }

    #[test]
    fn isotypic_small() {
        for p in [3, 5] {
            let (dim, basis) = isotypic_dimension(p, QuadChar::Legendre).unwrap();
            assert_eq!(dim, 1);
            let delta = if p % 4 == 1 { p } else { -p };
            let (_, u) = fundamental_invariant_uk(delta).unwrap();
            assert!(proportionality_residual(&basis[0], &u) < 1e-10);
        }
        assert!(isotypic_dimension(2, QuadChar::Legendre).is_err());
    }

    #[test]
    fn key2_small() {
        for p in [3, 5] {
            let r = key2_bruteforce(p).unwrap();
            assert!(r.counterexamples.is_empty());
            assert_eq!(r.orbit_size, r.nonzero_isotropic);
            assert_eq!(r.orbit_size as i64, p * p - 1);
        }
    }

    #[test]
    fn orthogonal_action_commutes() {
        let p = 5;
        let s = Sym2::new(p, 1).unwrap();
        let m = &s.module;
        let g = Gl2::new(p);
        let act = |h: &[i64; 4], v: &[C64]| {
            let mut w = vec![c(0.0, 0.0); v.len()];
            for (idx, a) in v.iter().enumerate() {
                let (x, y, z) = sym2_action(p, h, s.triple(idx));
                w[s.index(x, y, z)] += a;
            }
            w
        };
        let v: Vec<C64> = (0..m.order()).map(|i| c((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        for h in g.elems.iter().step_by(97).take(10) {
            let lhs = act(h, &m.weil_s(&v).unwrap());
            let rhs = m.weil_s(&act(h, &v)).unwrap();
            assert!(dist(&lhs, &rhs) < 1e-10);
            assert!(dist(&act(h, &m.weil_t(&v)), &m.weil_t(&act(h, &v))) < 1e-12);
        }
    }
}
