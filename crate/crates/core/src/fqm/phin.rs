//! The invariant vector on the discriminant module of the rank-six lattice
//! built from an ideal of norm N in O_2, the hyperbolic plane and O_F.

use num_integer::Integer;
use num_rational::Rational64;
use serde::Serialize;
use std::collections::HashSet;

use super::{Fqm, SparseVector, Subgroup, Sym2};
use crate::error::{invalid, Error, Result};
use crate::numtheory::{heegner_condition, is_fundamental, is_squarefree};
use crate::special::c;

/// Norm and trace on O_2 = Z[w], w = (D2 + sqrt D2)/2, for u + v w.
#[derive(Clone, Copy, Debug)]
struct O2 {
    d2: i64,
    cw: i64,
}

impl O2 {
    fn nm(&self, u: i64, v: i64) -> i64 {
        u * u + u * v * self.d2 + v * v * self.cw
    }
}

/// Tuple coordinates (alpha = u + v w, a, b, c, d).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Tuple {
    pub u: i64,
    pub v: i64,
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiNReport {
    pub d1: i64,
    pub d2: i64,
    pub n: i64,
    pub module_order: usize,
    pub expected_module_order: u64,
    pub generated_h_order: usize,
    pub h_order: usize,
    pub expected_h_order: u64,
    /// Isotropic elements adjoined to the generated subgroup, in tuple coordinates.
    pub extension: Vec<Vec<i64>>,
    pub h_isotropic: bool,
    pub hperp_order: usize,
    pub image_order: usize,
    pub image_meets_h_trivially: bool,
    pub image_orthogonal_to_h: bool,
    pub iota_isometry: bool,
    pub signature_mod8: u8,
    pub support_size: usize,
}

#[derive(Debug)]
pub struct PhiN {
    pub module: Fqm,
    pub h: Subgroup,
    pub vector: SparseVector,
    /// Elements generating a subgroup that contains the support.
    pub span: Vec<usize>,
    pub report: PhiNReport,
}

impl PhiN {
    /// (rho(S) residual, rho(T) residual), both relative to ||phi||.
    pub fn invariance_residuals(&self) -> Result<(f64, f64)> {
        self.module.sparse_invariance(&self.vector, &self.span)
    }

    /// Support with coordinates, for serialization.
    pub fn support_coords(&self) -> Vec<(Vec<i64>, f64, f64)> {
        self.vector.iter().map(|(i, a)| (self.module.coords(*i), a.re, a.im)).collect()
    }
}

struct Setup {
    d1: i64,
    d2: i64,
    n: i64,
    r: i64,
    odd_df: bool,
    o2: O2,
}

impl Setup {
    /// Z^6 coordinates of a tuple: x0 N + x1 (w - r) = alpha, (c, d) in the parity basis.
    fn coords(&self, t: Tuple) -> Result<Vec<i64>> {
        let (n, r) = (self.n, self.r);
        if (t.u + r * t.v).rem_euclid(n) != 0 {
            return Err(Error::Check(format!("alpha = {} + {} w is not in the ideal", t.u, t.v)));
        }
        let x0 = (t.u + r * t.v) / n;
        let x1 = t.v;
        let (x4, x5) = if self.odd_df {
            if (t.d - t.c).rem_euclid(2) != 0 {
                return Err(Error::Check("c and d must have equal parity".into()));
            }
            (t.c, (t.d - t.c) / 2)
        } else {
            if t.d.rem_euclid(2) != 0 {
                return Err(Error::Check("d must be even".into()));
            }
            (t.c, t.d / 2)
        };
        Ok(vec![x0, x1, t.a, t.b, x4, x5])
    }

    fn tuple(&self, x: &[i64]) -> Tuple {
        let u = self.n * x[0] - self.r * x[1];
        let v = x[1];
        let (c, d) = if self.odd_df { (x[4], x[4] + 2 * x[5]) } else { (x[4], 2 * x[5]) };
        Tuple { u, v, a: x[2], b: x[3], c, d }
    }

    fn q(&self, x: &[i64]) -> Rational64 {
        let t = self.tuple(x);
        let (n, d1, d2) = (self.n, self.d1, self.d2);
        Rational64::new(self.o2.nm(t.u, t.v), n * n * d2) - Rational64::new(t.a * t.b, n * d1)
            + Rational64::new(t.c * t.c, 4 * d1)
            - Rational64::new(t.d * t.d, 4 * d2)
    }

    fn gram(&self) -> Vec<Vec<Rational64>> {
        let e = |i: usize| {
            let mut v = vec![0; 6];
            v[i] = 1;
            v
        };
        let mut g = vec![vec![Rational64::from_integer(0); 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                let s: Vec<i64> = e(i).iter().zip(e(j)).map(|(a, b)| a + b).collect();
                g[i][j] = self.q(&s) - self.q(&e(i)) - self.q(&e(j));
            }
        }
        g
    }
}

fn check_params(d1: i64, d2: i64, n: i64) -> Result<()> {
    if d1 >= 0 || d2 >= 0 {
        return invalid("both discriminants must be negative");
    }
    if d1 % 2 == 0 {
        return invalid(format!("D1 = {d1} must be odd"));
    }
    if !is_fundamental(d1) || !is_fundamental(d2) {
        return invalid("discriminants must be fundamental");
    }
    if d1 == d2 {
        return invalid("discriminants must be distinct");
    }
    if n < 1 || n % 2 == 0 || !is_squarefree(n) {
        return invalid(format!("N = {n} must be odd and squarefree"));
    }
    if !heegner_condition(d1, n as u64)? || !heegner_condition(d2, n as u64)? {
        return invalid(format!("Heegner condition fails for N = {n}"));
    }
    Ok(())
}

/// Build A = M~^v / M~, the isotropic subgroup H, and phi = induction from H of iota(u_K).
pub fn build_phin(d1: i64, d2: i64, n: i64) -> Result<PhiN> {
    check_params(d1, d2, n)?;
    let dd = d1 * d2;
    let d0 = d1.gcd(&d2);
    let df = dd / (d0 * d0);
    let cw = (d2 * d2 - d2) / 4;
    let n2 = n * n;
    let r = if n > 1 {
        (0..n2)
            .find(|x| (x * x - d2 * x + cw).rem_euclid(n2) == 0)
            .ok_or_else(|| Error::Check(format!("no root of the minimal polynomial of w mod {n2}")))?
    } else {
        0
    };
    let st = Setup { d1, d2, n, r, odd_df: df % 2 != 0, o2: O2 { d2, cw } };
    let module = Fqm::from_dual_gram(st.gram())?;
    let expected_module_order = (n as u64).pow(4) * (d1.unsigned_abs()).pow(3) * (d2.unsigned_abs()).pow(2);
    if module.order() as u64 != expected_module_order {
        return Err(Error::Check(format!(
            "|M~^v/M~| = {} but N^4 |D1|^3 D2^2 = {expected_module_order}",
            module.order()
        )));
    }
    let sig = module.signature_mod8()?;
    let idx = |t: Tuple| -> Result<usize> { Ok(module.index(&st.coords(t)?)) };

    let mut gens = vec![idx(Tuple { u: n2, v: 0, a: 0, b: 0, c: 0, d: 2 * n })?];
    if n > 1 {
        let (nu_u, nu_v) = (-r, 1);
        let tr_nu = 2 * nu_u + nu_v * d2;
        gens.push(idx(Tuple { u: nu_u * d2, v: nu_v * d2, a: d1, b: n * d1, c: 0, d: 0 })?);
        gens.push(idx(Tuple { u: n * dd, v: 0, a: n * d1, b: dd * tr_nu, c: 0, d: 0 })?);
    } else {
        gens.push(idx(Tuple { u: dd, v: 0, a: d1, b: 0, c: 0, d: 0 })?);
    }
    let mut h = module.subgroup(&gens);
    let generated_h_order = h.order();
    let expected_h_order = (n2 * d2.abs()) as u64;

    // iota on Sym2(Z/|D1|) with Q0 = (N a b - e^2)/|D1|.
    let m1 = d1.abs();
    let sym = Sym2::new(m1, n)?;
    let mut iota = vec![0usize; sym.module.order()];
    let mut iota_isometry = true;
    let den = module.level_den();
    for (s_idx, slot) in iota.iter_mut().enumerate() {
        let (a, e, b) = sym.triple(s_idx);
        let x = st.coords(Tuple { u: 0, v: 0, a: n * a, b: n * b, c: 2 * e, d: 0 })?;
        let q_a = module.q_num(&x);
        let q_0 = sym.module.q_idx(s_idx);
        if q_a * sym.module.level_den() != q_0 * den {
            iota_isometry = false;
        }
        *slot = module.index(&x);
    }
    let iota_basis = vec![iota[sym.index(1, 0, 0)], iota[sym.index(0, 1, 0)], iota[sym.index(0, 0, 1)]];

    let mut extension = Vec::new();
    if (h.order() as u64) < expected_h_order {
        // Adjoin isotropic elements orthogonal to H and to im(iota).
        let mut perp_gens = h.gens.clone();
        perp_gens.extend_from_slice(&iota_basis);
        let cands = module.orthogonal(&perp_gens);
        let mut cur = h.clone();
        for x in cands {
            if (cur.order() as u64) >= expected_h_order {
                break;
            }
            if cur.contains(x) || module.q_idx(x) != 0 {
                continue;
            }
            let mut g = cur.gens.clone();
            g.push(x);
            let next = module.subgroup(&g);
            if !module.is_isotropic(&next) {
                continue;
            }
            extension.push(module.coords(x));
            cur = next;
        }
        h = cur;
    }
    if h.order() as u64 != expected_h_order {
        return Err(Error::Check(format!(
            "|H| = {} (generated {generated_h_order}) but N^2 |D2| = {expected_h_order}",
            h.order()
        )));
    }
    let h_isotropic = module.is_isotropic(&h);
    let hperp = module.orthogonal(&h.gens);
    let hperp_set: HashSet<usize> = hperp.iter().copied().collect();
    let image: HashSet<usize> = iota.iter().copied().collect();
    let image_orthogonal_to_h = image.iter().all(|x| hperp_set.contains(x));
    let image_meets_h_trivially = image.iter().filter(|x| h.contains(**x)).count() == 1;
    let report_base = |support_size| PhiNReport {
        d1,
        d2,
        n,
        module_order: module.order(),
        expected_module_order,
        generated_h_order,
        h_order: h.order(),
        expected_h_order,
        extension: extension.clone(),
        h_isotropic,
        hperp_order: hperp.len(),
        image_order: image.len(),
        image_meets_h_trivially,
        image_orthogonal_to_h,
        iota_isometry,
        signature_mod8: sig,
        support_size,
    };
    let structural_ok = h_isotropic
        && iota_isometry
        && image.len() == sym.module.order()
        && image_orthogonal_to_h
        && image_meets_h_trivially
        && h.order() * image.len() == hperp.len();
    if !structural_ok {
        return Err(Error::Check(format!("H^perp = H + im(iota) fails: {:?}", report_base(0))));
    }

    let uk = sym.genus_vector(d1)?;
    let mut vector: SparseVector = Vec::new();
    let hcoords: Vec<Vec<i64>> = h.elems.iter().map(|&x| module.coords(x)).collect();
    for (s_idx, val) in uk.iter().enumerate() {
        if val.re == 0.0 {
            continue;
        }
        let base = module.coords(iota[s_idx]);
        for hc in &hcoords {
            let s: Vec<i64> = base.iter().zip(hc).map(|(a, b)| a + b).collect();
            vector.push((module.index(&s), c(val.re, 0.0)));
        }
    }
    vector.sort_by_key(|(i, _)| *i);
    let report = report_base(vector.len());
    let mut span = h.gens.clone();
    span.extend_from_slice(&iota_basis);
    Ok(PhiN { module, h, vector, span, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let p = build_phin(-3, -4, 1).unwrap();
        assert_eq!(p.report.module_order, 432);
        assert_eq!(p.report.h_order, 4);
        let (s, t) = p.invariance_residuals().unwrap();
        assert!(s < 1e-9, "S residual {s}");
        assert!(t < 1e-12);
        let p = build_phin(-7, -4, 1).unwrap();
        assert_eq!(p.report.module_order, 5488);
        let (s, _) = p.invariance_residuals().unwrap();
        assert!(s < 1e-9);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_phin(-4, -3, 1).is_err());
        assert!(build_phin(-3, -3, 1).is_err());
        assert!(build_phin(-3, -4, 2).is_err());
        assert!(build_phin(-3, -4, 5).is_err());
    }
}
