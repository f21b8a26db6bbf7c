//! Gauss sums, twisted and torus Gauss sums, Jacobi kernels, the
//! normalization factor and the closed-form gamma/Jacobi scalar formulas
//! for general linear groups.
//!
//! Conventions. With `E` the degree-`e_deg` subfield of a tower over the
//! base `F = F_q` and `E_k / E` of degree `k`:
//!
//! ```text
//! tau(alpha, psi)      = -|E_k|^(-1/2) sum_x alpha^-1(x) psi(x)
//! G(alpha, chi, psi)   = -|E_k|^(-1/2) sum_x alpha^-1(x) chi^-1(N(x)) psi(x)
//! tau_T(alpha x chi)   = (-1)^l(lambda) |E|^(-k/2) sum_t alpha^-1(t) chi^-1(det t) psi(tr t)
//! ```
//!
//! All additive characters are `psi o Tr` down to the prime field, so one
//! [`AddChar`] serves every level of the tower.

use crate::chars::{AddChar, MultChar};
use crate::error::{Error, Result};
use crate::ff::{Elem, Tower};
use crate::groups::GroupSpec;
use crate::mat::Mat;
use num_complex::Complex64;

pub type C = Complex64;

/// Size-aware comparison tolerance: `1e-8 * (1 + S)` for `S` summands.
pub fn tol(n_terms: u64) -> f64 {
    1e-8 * (1.0 + n_terms as f64)
}

/// Normalized Gauss sum `tau(alpha, psi)` over the units of `alpha`'s level.
pub fn gauss(tower: &Tower, alpha: &MultChar, psi: &AddChar) -> Result<C> {
    let ainv = alpha.inverse(tower);
    let mut s = C::new(0.0, 0.0);
    for x in tower.level_units_iter(alpha.level)? {
        s += ainv.eval(tower, x)? * psi.eval(tower, x, alpha.level)?;
    }
    Ok(-s / (tower.level_size(alpha.level) as f64).sqrt())
}

/// Twisted Gauss sum `G(alpha, chi, psi)`; `chi` lives on the designated
/// subfield `E` and is pulled through the norm.
pub fn gauss_twisted(tower: &Tower, alpha: &MultChar, chi: &MultChar, psi: &AddChar) -> Result<C> {
    if alpha.level % chi.level != 0 {
        return Err(Error::BadDegree(chi.level, alpha.level));
    }
    let ainv = alpha.inverse(tower);
    let cinv = chi.inverse(tower);
    let mut s = C::new(0.0, 0.0);
    for x in tower.level_units_iter(alpha.level)? {
        let n = tower.norm(x, alpha.level, chi.level)?;
        s += ainv.eval(tower, x)? * cinv.eval(tower, n)? * psi.eval(tower, x, alpha.level)?;
    }
    Ok(-s / (tower.level_size(alpha.level) as f64).sqrt())
}

/// Torus Gauss sum by direct summation over the etale algebra
/// `prod_j F_{q^(d_j)}` (degrees over F), with `chi` on the degree-`e_deg`
/// subfield. Returns the value and the number of summands.
pub fn gauss_torus_direct(
    tower: &Tower,
    e_deg: u32,
    part_degs: &[u32],
    alpha_exps: &[u64],
    chi: &MultChar,
    psi: &AddChar,
) -> Result<(C, u64)> {
    if part_degs.len() != alpha_exps.len() {
        return Err(Error::IncompleteDatum(
            "one character per torus part".into(),
        ));
    }
    let ell = part_degs.len();
    let alphas: Vec<MultChar> = part_degs
        .iter()
        .zip(alpha_exps)
        .map(|(&d, &a)| MultChar::new(tower, d, a))
        .collect::<Result<_>>()?;
    let ainvs: Vec<MultChar> = alphas.iter().map(|a| a.inverse(tower)).collect();
    let cinv = chi.inverse(tower);

    let units: Vec<Vec<Elem>> = part_degs
        .iter()
        .map(|&d| tower.level_units_iter(d).map(|it| it.collect()))
        .collect::<Result<_>>()?;
    let total: u64 = units.iter().map(|u| u.len() as u64).product();

    let mut sum = C::new(0.0, 0.0);
    let mut idx = vec![0usize; ell];
    for _ in 0..total {
        let mut val = C::new(1.0, 0.0);
        let mut det = tower.one();
        let mut tr = Elem::Zero;
        for (j, &d) in part_degs.iter().enumerate() {
            let t = units[j][idx[j]];
            val *= ainvs[j].eval(tower, t)?;
            det = tower.mul(det, tower.norm(t, d, e_deg)?);
            tr = tower.add(tr, tower.trace(t, d, e_deg)?);
        }
        val *= cinv.eval(tower, det)?;
        val *= psi.eval(tower, tr, e_deg)?;
        sum += val;
        for j in 0..ell {
            idx[j] += 1;
            if idx[j] < units[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    let k_over_f: u32 = part_degs.iter().sum();
    let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
    let scale = (tower.level_size(1) as f64).powf(k_over_f as f64 / 2.0);
    Ok((sign * sum / scale, total))
}

/// Torus Gauss sum via the product rule: `prod_j G(alpha_j, chi, psi_(E_kj))`.
pub fn gauss_torus_product(
    tower: &Tower,
    part_degs: &[u32],
    alpha_exps: &[u64],
    chi: &MultChar,
    psi: &AddChar,
) -> Result<C> {
    let mut prod = C::new(1.0, 0.0);
    for (&d, &a) in part_degs.iter().zip(alpha_exps) {
        let alpha = MultChar::new(tower, d, a)?;
        prod *= gauss_twisted(tower, &alpha, chi, psi)?;
    }
    Ok(prod)
}

/// Enumerate `GL_k` over the degree-`e_lv` subfield. Only small cases.
pub fn enumerate_gl(tower: &Tower, e_lv: u32, k: usize) -> Result<Vec<Mat>> {
    let elems: Vec<Elem> = tower.level_elems_iter(e_lv)?.collect();
    let sz = elems.len();
    let cells = k * k;
    if (sz as f64).powi(cells as i32) > 2.0e8 {
        return Err(Error::BruteForceBound);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; cells];
    let total = (sz as u64).pow(cells as u32);
    for _ in 0..total {
        let m = Mat {
            n: k,
            a: idx.iter().map(|&i| elems[i]).collect(),
        };
        if !m.det(tower).is_zero() {
            out.push(m);
        }
        for c in idx.iter_mut() {
            *c += 1;
            if *c < sz {
                break;
            }
            *c = 0;
        }
    }
    Ok(out)
}

/// The Jacobi kernel `J_chi(g)` for invertible `g` over `E`.
///
/// For nontrivial `chi` this is `chi(det(1+g))`, zero when `1+g` is
/// singular. For `chi = 1` the kernel is defined by its Fourier-transform
/// expression and evaluated by brute force (`k <= 2`, `|E| <= 9`).
pub fn jacobi_kernel_gl(
    tower: &Tower,
    e_lv: u32,
    g: &Mat,
    chi: &MultChar,
    psi: &AddChar,
) -> Result<C> {
    if g.det(tower).is_zero() {
        return Err(Error::SingularMatrix);
    }
    if chi.is_trivial() {
        return jacobi_kernel_brute(tower, e_lv, g, chi, psi);
    }
    let one_plus = Mat::identity(g.n).add(g, tower);
    let d = one_plus.det(tower);
    if d.is_zero() {
        Ok(C::new(0.0, 0.0))
    } else {
        chi.eval(tower, d)
    }
}

/// Fourier-transform evaluation of the kernel (the chi = 1 definition and
/// the oracle for the Li-Hu closed form):
///
/// `J_chi(g) = chi(-1)^k |E|^(-k^2/2) gamma(chi^-1 o det, psi)
///             sum_{x in GL_k(E)} psi(tr(x(1+g))) chi^-1(det x)`.
pub fn jacobi_kernel_brute(
    tower: &Tower,
    e_lv: u32,
    g: &Mat,
    chi: &MultChar,
    psi: &AddChar,
) -> Result<C> {
    let k = g.n;
    if k > 2 || tower.level_size(e_lv) > 9 {
        return Err(Error::BruteForceBound);
    }
    let gl = enumerate_gl(tower, e_lv, k)?;
    let cinv = chi.inverse(tower);
    let qe = tower.level_size(e_lv) as f64;
    let half = qe.powf(k as f64 * k as f64 / 2.0);

    // Kondo Gauss sum scalar of the one-dimensional representation
    // chi^-1 o det, by brute force.
    let mut kondo = C::new(0.0, 0.0);
    for h in &gl {
        let hinv = h.inverse(tower)?;
        let mut v = psi.eval(tower, hinv.trace(tower), e_lv)?;
        if !chi.is_trivial() {
            v *= cinv.eval(tower, h.det(tower))?;
        }
        kondo += v;
    }
    kondo /= half;

    let one_plus = Mat::identity(k).add(g, tower);
    let mut s = C::new(0.0, 0.0);
    for x in &gl {
        let prod = x.mul(&one_plus, tower);
        let mut v = psi.eval(tower, prod.trace(tower), e_lv)?;
        if !chi.is_trivial() {
            v *= cinv.eval(tower, x.det(tower))?;
        }
        s += v;
    }
    let chi_m1 = if chi.is_trivial() {
        C::new(1.0, 0.0)
    } else {
        chi.eval(tower, tower.neg(tower.one()))?
    };
    Ok(chi_m1.powu(k as u32) * kondo * s / half)
}

/// Closed form for the chi = 1 kernel:
/// `J_1(g) = (-1)^(k - rank(1+g)) |E|^(-k) prod_{i=1}^{k-rank} (|E|^i - 1)`.
pub fn kernel_li_hu(tower: &Tower, e_lv: u32, g: &Mat) -> C {
    let k = g.n;
    let qe = tower.level_size(e_lv) as f64;
    let r = Mat::identity(k).add(g, tower).rank(tower);
    let mut v = qe.powi(-(k as i32));
    for i in 1..=(k - r) {
        v *= qe.powi(i as i32) - 1.0;
    }
    let sign = if (k - r) % 2 == 0 { 1.0 } else { -1.0 };
    C::new(sign * v, 0.0)
}

/// Kernel value on torus coordinates `(x, y)` of the group's torus
/// `(lambda+, lambda-)`: the product of norm factors with the extra
/// `chi(2)` in odd F-dimension, zero as soon as some `1 + t` is singular.
#[allow(clippy::too_many_arguments)]
pub fn kernel_on_torus(
    tower: &Tower,
    group: &GroupSpec,
    lambda_plus: &[u32],
    lambda_minus: &[u32],
    xs: &[Elem],
    ys: &[Elem],
    chi: &MultChar,
    include_middle_factor: bool,
) -> Result<C> {
    let e = group.e_deg();
    let mut val = C::new(1.0, 0.0);
    for (&lm, &y) in lambda_minus.iter().zip(ys) {
        let arg = tower.add(tower.one(), y);
        if arg.is_zero() {
            return Ok(C::new(0.0, 0.0));
        }
        val *= chi.eval(tower, tower.norm(arg, 2 * lm, e)?)?;
    }
    for (&lp, &x) in lambda_plus.iter().zip(xs) {
        let a1 = tower.add(tower.one(), x);
        if a1.is_zero() {
            return Ok(C::new(0.0, 0.0));
        }
        let xbar = if e == 1 { x } else { tower.frobenius(x, 1) };
        let a2 = tower.add(tower.one(), tower.inv(xbar)?);
        if a2.is_zero() {
            return Ok(C::new(0.0, 0.0));
        }
        val *= chi.eval(tower, tower.norm(a1, lp, e)?)?;
        val *= chi.eval(tower, tower.norm(a2, lp, e)?)?;
    }
    if include_middle_factor && group.dim_v_over_f() % 2 == 1 {
        val *= chi.eval(tower, tower.from_int(2))?;
    }
    Ok(val)
}

/// The normalization factor `c_V(chi, psi)` (three cases, with the
/// classical-group sign prefactor).
pub fn c_normalization(
    tower: &Tower,
    group: &GroupSpec,
    chi: &MultChar,
    psi: &AddChar,
) -> Result<C> {
    let eps = if group.rel_rank_classical() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let dim_f = group.dim_v_over_f();
    let val = if group.e_deg() == 1 {
        let n1 = tower.level_units(1);
        let chi_m2 = MultChar::new(tower, 1, mod_neg(2 * chi.exponent, n1))?;
        let t = gauss(tower, &chi_m2, psi)?;
        if dim_f % 2 == 0 {
            t.powu(dim_f / 2)
        } else {
            chi.eval(tower, tower.from_int(2))? * t.powu((dim_f - 1) / 2)
        }
    } else {
        let dim_e = group.dim_v();
        let chi_res_inv = chi.inverse(tower).restrict(tower, 1)?;
        let t = gauss(tower, &chi_res_inv, psi)?;
        let chi_m1 = chi.eval(tower, tower.neg(tower.one()))?;
        chi_m1.powu(dim_e) * t.powu(dim_e)
    };
    Ok(eps * val)
}

fn mod_neg(a: u64, n: u64) -> u64 {
    (n - a % n) % n
}

/// Kondo's product formula: `gamma(tau x chi, psi) = (-1)^k prod_j
/// G(alpha_j, chi, psi_(E_kj))` for the cuspidal support
/// `{alpha_j on E_{k_j}^x}` given as (degree over F, exponent) pairs.
/// Returns the value plus a regularity warning when some part with
/// `k_j > 1` over `E` carries a non-regular character (the formula is then
/// read as the torus-data form of the theorem).
pub fn kondo_product(
    tower: &Tower,
    support: &[(u32, u64)],
    chi: &MultChar,
    psi: &AddChar,
) -> Result<(C, bool)> {
    let e = chi.level;
    let mut warn = false;
    let mut prod = C::new(1.0, 0.0);
    let mut k = 0u32;
    for &(d, a) in support {
        let alpha = MultChar::new(tower, d, a)?;
        if d > e && !alpha.is_regular(tower, e) {
            warn = true;
        }
        k += d / e;
        prod *= gauss_twisted(tower, &alpha, chi, psi)?;
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok((sign * prod, warn))
}

/// Doubling gamma factor for GL:
/// `Gamma(tau, chi, psi) = gamma(tau_dual x chi^sigma, psi) gamma(tau x chi, psi)`.
pub fn gamma_dbl_gl(
    tower: &Tower,
    support: &[(u32, u64)],
    chi: &MultChar,
    psi: &AddChar,
) -> Result<C> {
    let dual = dual_support(tower, support);
    let chi_sigma = if chi.level == 1 {
        *chi
    } else {
        chi.frobenius(tower, 1)
    };
    let (a, _) = kondo_product(tower, &dual, &chi_sigma, psi)?;
    let (b, _) = kondo_product(tower, support, chi, psi)?;
    Ok(a * b)
}

/// The GL Jacobi-sum closed form:
/// `c(tau, chi) = chi(-1)^k (-tau(chi^-1, psi_E))^k gamma(tau_dual, psi) gamma(tau x chi, psi)`.
pub fn jacobi_scalar_gl_formula(
    tower: &Tower,
    support: &[(u32, u64)],
    chi: &MultChar,
    psi: &AddChar,
) -> Result<C> {
    let e = chi.level;
    let k: u32 = support.iter().map(|&(d, _)| d / e).sum();
    let chi_m1 = if chi.is_trivial() {
        C::new(1.0, 0.0)
    } else {
        chi.eval(tower, tower.neg(tower.one()))?
    };
    let tau_chi_inv = gauss(tower, &chi.inverse(tower), psi)?;
    let trivial = MultChar::new(tower, e, 0)?;
    let (g_dual, _) = kondo_product(tower, &dual_support(tower, support), &trivial, psi)?;
    let (g_tw, _) = kondo_product(tower, support, chi, psi)?;
    Ok(chi_m1.powu(k) * (-tau_chi_inv).powu(k) * g_dual * g_tw)
}

pub fn dual_support(tower: &Tower, support: &[(u32, u64)]) -> Vec<(u32, u64)> {
    support
        .iter()
        .map(|&(d, a)| (d, mod_neg(a, tower.level_units(d))))
        .collect()
}

/// `sum_{h in GL_k(E)} chi(det h) psi(tr(X h))` for singular `X`; the lemma
/// says this vanishes for every nontrivial `chi`.
pub fn singular_vanishing_sum(
    tower: &Tower,
    e_lv: u32,
    x: &Mat,
    chi: &MultChar,
    psi: &AddChar,
) -> Result<(C, u64)> {
    if !x.det(tower).is_zero() {
        return Err(Error::InvertibleMatrix);
    }
    if chi.is_trivial() {
        return Err(Error::UnsupportedParams("chi must be nontrivial".into()));
    }
    let gl = enumerate_gl(tower, e_lv, x.n)?;
    let mut s = C::new(0.0, 0.0);
    for h in &gl {
        let prod = x.mul(h, tower);
        s += chi.eval(tower, h.det(tower))? * psi.eval(tower, prod.trace(tower), e_lv)?;
    }
    Ok((s, gl.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::build_field;

    fn close(a: C, b: C, t: f64) -> bool {
        (a - b).norm() <= t
    }

    #[test]
    fn gauss_frozen_values() {
        // F_3, quadratic alpha: -3^(-1/2)(w - w^2) = -i by direct 2-term summation
        let f3 = build_field(3, 1).unwrap();
        let psi = AddChar::new(&f3, 1).unwrap();
        let chi = MultChar::new(&f3, 1, 1).unwrap();
        let v = gauss(&f3, &chi, &psi).unwrap();
        assert!(close(v, C::new(0.0, -1.0), 1e-12), "{v}");

        // F_5 quadratic: classical sqrt(5) sum, normalized to -1
        let f5 = build_field(5, 1).unwrap();
        let psi5 = AddChar::new(&f5, 1).unwrap();
        let quad = MultChar::new(&f5, 1, 2).unwrap();
        let v5 = gauss(&f5, &quad, &psi5).unwrap();
        assert!(close(v5, C::new(-1.0, 0.0), 1e-12), "{v5}");
    }

    #[test]
    fn gauss_trivial_char_value() {
        for (p, e) in [(3u64, 1u32), (3, 2), (5, 1), (7, 2)] {
            let t = build_field(p, e).unwrap();
            for c in 1..p.min(4) {
                let psi = AddChar::new(&t, c).unwrap();
                let one = MultChar::new(&t, e, 0).unwrap();
                let v = gauss(&t, &one, &psi).unwrap();
                let want = 1.0 / (t.size() as f64).sqrt();
                assert!(close(v, C::new(want, 0.0), 1e-12));
            }
        }
    }

    #[test]
    fn gauss_unit_modulus() {
        // |tau(alpha,psi)| = 1 for alpha != 1, all fields up to F_49
        for (p, e) in [(3u64, 1u32), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1), (7, 2)] {
            let t = build_field(p, e).unwrap();
            let psi = AddChar::new(&t, 1).unwrap();
            for a in 1..t.n_units() {
                let chi = MultChar::new(&t, e, a).unwrap();
                let v = gauss(&t, &chi, &psi).unwrap();
                assert!((v.norm() - 1.0).abs() < tol(t.n_units()), "{p}^{e}, a={a}");
            }
        }
    }

    #[test]
    fn twisted_gauss_is_gauss_of_product() {
        let t = build_field(3, 2).unwrap();
        let psi = AddChar::new(&t, 1).unwrap();
        for a in 0..8 {
            let alpha = MultChar::new(&t, 2, a).unwrap();
            for c in 0..2 {
                let chi = MultChar::new(&t, 1, c).unwrap();
                let lhs = gauss_twisted(&t, &alpha, &chi, &psi).unwrap();
                let prod = alpha.mul(&chi.compose_norm(&t, 2).unwrap(), &t).unwrap();
                let rhs = gauss(&t, &prod, &psi).unwrap();
                assert!(close(lhs, rhs, 1e-12));
                // chi = 1 reduces to the plain Gauss sum
                if c == 0 {
                    assert!(close(lhs, gauss(&t, &alpha, &psi).unwrap(), 1e-12));
                }
            }
        }
    }

    #[test]
    fn twisted_gauss_modulus_dichotomy() {
        for (q, k) in [(3u64, 2u32), (5, 2)] {
            let t = build_field(q, k).unwrap();
            let psi = AddChar::new(&t, 1).unwrap();
            for a in 0..t.n_units() {
                let alpha = MultChar::new(&t, k, a).unwrap();
                for c in 0..(q - 1) {
                    let chi = MultChar::new(&t, 1, c).unwrap();
                    let v = gauss_twisted(&t, &alpha, &chi, &psi).unwrap();
                    let prod = alpha.mul(&chi.compose_norm(&t, k).unwrap(), &t).unwrap();
                    if prod.is_trivial() {
                        let want = 1.0 / (t.size() as f64).sqrt();
                        assert!((v - C::new(want, 0.0)).norm() < tol(t.n_units()));
                    } else {
                        assert!((v.norm() - 1.0).abs() < tol(t.n_units()));
                    }
                }
            }
        }
    }

    #[test]
    fn conjugation_symmetry() {
        // tau(alpha^-1, psi) = alpha(-1) conj(tau(alpha, psi))
        let t = build_field(5, 2).unwrap();
        let psi = AddChar::new(&t, 1).unwrap();
        let m1 = t.neg(t.one());
        for a in 1..t.n_units() {
            let alpha = MultChar::new(&t, 2, a).unwrap();
            let lhs = gauss(&t, &alpha.inverse(&t), &psi).unwrap();
            let rhs = alpha.eval(&t, m1).unwrap() * gauss(&t, &alpha, &psi).unwrap().conj();
            assert!(close(lhs, rhs, tol(t.n_units())));
        }
    }

    #[test]
    fn hasse_davenport_small() {
        for (q, m) in [(3u64, 2u32), (3, 3), (5, 2), (7, 2)] {
            let t = build_field(q, m).unwrap();
            let psi = AddChar::new(&t, 1).unwrap();
            for b in 0..(q - 1) {
                let beta = MultChar::new(&t, 1, b).unwrap();
                let lifted = beta.compose_norm(&t, m).unwrap();
                let lhs = gauss(&t, &lifted, &psi).unwrap();
                let rhs = gauss(&t, &beta, &psi).unwrap().powu(m);
                assert!(close(lhs, rhs, tol(t.n_units())), "q={q} m={m} b={b}");
            }
        }
    }

    #[test]
    fn torus_direct_equals_product() {
        let t = build_field(5, 2).unwrap();
        let psi = AddChar::new(&t, 1).unwrap();
        let chi = MultChar::new(&t, 1, 1).unwrap();
        // lambda = (1,1) over F_5: 16-term direct sum
        for a1 in 0..4 {
            for a2 in 0..4 {
                let (direct, n) =
                    gauss_torus_direct(&t, 1, &[1, 1], &[a1, a2], &chi, &psi).unwrap();
                let prod = gauss_torus_product(&t, &[1, 1], &[a1, a2], &chi, &psi).unwrap();
                assert_eq!(n, 16);
                assert!(close(direct, prod, tol(n)));
            }
        }
        // lambda = (2): single twisted factor, signs cancel
        for a in 0..24 {
            let (direct, n) = gauss_torus_direct(&t, 1, &[2], &[a], &chi, &psi).unwrap();
            let alpha = MultChar::new(&t, 2, a).unwrap();
            let tw = gauss_twisted(&t, &alpha, &chi, &psi).unwrap();
            assert!(close(direct, tw, tol(n)));
        }
    }

    #[test]
    fn torus_pairing_hasse_davenport() {
        // lambda=(2) with alpha = beta o N equals lambda=(1,1) with (beta, beta)
        let t = build_field(3, 2).unwrap();
        let psi = AddChar::new(&t, 1).unwrap();
        for c in 0..2 {
            let chi = MultChar::new(&t, 1, c).unwrap();
            for b in 0..2 {
                let beta = MultChar::new(&t, 1, b).unwrap();
                let lifted = beta.compose_norm(&t, 2).unwrap();
                let (v2, n2) =
                    gauss_torus_direct(&t, 1, &[2], &[lifted.exponent], &chi, &psi).unwrap();
                let (v11, _) = gauss_torus_direct(&t, 1, &[1, 1], &[b, b], &chi, &psi).unwrap();
                assert!(close(v2, v11, tol(n2)));
            }
        }
    }

    #[test]
    fn frobenius_invariance_of_twisted_sums() {
        let t = build_field(3, 2).unwrap();
        let psi = AddChar::new(&t, 1).unwrap();
        let q = 3;
        for a in 0..8u64 {
            let alpha = MultChar::new(&t, 2, a).unwrap();
            for c in 0..2u64 {
                let chi = MultChar::new(&t, 1, c).unwrap();
                let lhs = gauss_twisted(
                    &t,
                    &MultChar::new(&t, 2, a * q).unwrap(),
                    &MultChar::new(&t, 1, c * q).unwrap(),
                    &psi,
                )
                .unwrap();
                let rhs = gauss_twisted(&t, &alpha, &chi, &psi).unwrap();
                assert!(close(lhs, rhs, tol(t.n_units())));
            }
        }
    }

    #[test]
    fn kernel_chi_nontrivial() {
        let f5 = build_field(5, 1).unwrap();
        let psi = AddChar::new(&f5, 1).unwrap();
        let chi = MultChar::new(&f5, 1, 1).unwrap();
        // k=1, g=1: chi(det(2)) = chi(2) = i
        let g = Mat::from_rows(&[&[f5.one()]]);
        let v = jacobi_kernel_gl(&f5, 1, &g, &chi, &psi).unwrap();
        assert!(close(v, C::new(0.0, 1.0), 1e-12));
        // g = -I: det(I+g) = 0
        let gm = Mat::identity(2).scale(f5.neg(f5.one()), &f5);
        let v0 = jacobi_kernel_gl(&f5, 1, &gm, &chi, &psi).unwrap();
        assert!(close(v0, C::new(0.0, 0.0), 0.0));
        // singular g rejected
        let sing = Mat::zero(2);
        assert!(jacobi_kernel_gl(&f5, 1, &sing, &chi, &psi).is_err());
    }

    #[test]
    fn kernel_fourier_matches_case_definition_for_nontrivial_chi() {
        // the Fourier expression reproduces chi(det(1+g)) for chi != 1
        for q in [3u64, 5] {
            let t = build_field(q, 1).unwrap();
            let psi = AddChar::new(&t, 1).unwrap();
            let gl1 = enumerate_gl(&t, 1, 1).unwrap();
            for a in 1..(q - 1) {
                let chi = MultChar::new(&t, 1, a).unwrap();
                for g in &gl1 {
                    let direct = jacobi_kernel_gl(&t, 1, g, &chi, &psi).unwrap();
                    let brute = jacobi_kernel_brute(&t, 1, g, &chi, &psi).unwrap();
                    assert!(close(direct, brute, tol(q * q)), "q={q} a={a}");
                }
            }
        }
    }

    #[test]
    fn li_hu_frozen_values() {
        let f3 = build_field(3, 1).unwrap();
        let psi = AddChar::new(&f3, 1).unwrap();
        let one = MultChar::new(&f3, 1, 0).unwrap();
        // k=1, g=1: rank(I+g)=1, value +1/3 (the Fourier-sum definition
        // fixes the sign as (-1)^(k-rank))
        let g1 = Mat::from_rows(&[&[f3.one()]]);
        let v1 = kernel_li_hu(&f3, 1, &g1);
        assert!(close(v1, C::new(1.0 / 3.0, 0.0), 1e-12));
        let b1 = jacobi_kernel_brute(&f3, 1, &g1, &one, &psi).unwrap();
        assert!(close(v1, b1, 1e-9));
        // k=1, g=-1: rank 0, value -(q-1)/q
        let gm = Mat::from_rows(&[&[f3.neg(f3.one())]]);
        let vm = kernel_li_hu(&f3, 1, &gm);
        assert!(close(vm, C::new(-2.0 / 3.0, 0.0), 1e-12));
        let bm = jacobi_kernel_brute(&f3, 1, &gm, &one, &psi).unwrap();
        assert!(close(vm, bm, 1e-9));
        // k=2, g=-I: rank 0, value q^-2 (q-1)(q^2-1) = 16/9
        let g2 = Mat::identity(2).scale(f3.neg(f3.one()), &f3);
        let v2 = kernel_li_hu(&f3, 1, &g2);
        assert!(close(v2, C::new(16.0 / 9.0, 0.0), 1e-12));
    }

    #[test]
    fn li_hu_equals_brute_gl1() {
        // all g in GL_1(F_q), q <= 9
        for (p, e) in [(3u64, 1u32), (5, 1), (7, 1), (3, 2)] {
            let t = build_field(p, e).unwrap();
            let psi = AddChar::new(&t, 1).unwrap();
            let one = MultChar::new(&t, e, 0).unwrap();
            for x in t.level_units_iter(e).unwrap() {
                let g = Mat::from_rows(&[&[x]]);
                let closed = kernel_li_hu(&t, e, &g);
                let brute = jacobi_kernel_brute(&t, e, &g, &one, &psi).unwrap();
                assert!(close(closed, brute, tol(t.n_units())), "{p}^{e}");
            }
        }
    }

    #[test]
    fn kernel_on_torus_frozen_values() {
        use crate::groups::{GroupKind, GroupSpec};
        let sp = GroupSpec::new(GroupKind::Sp, 1, 5).unwrap();
        let t = build_field(5, 1).unwrap();
        let chi = MultChar::new(&t, 1, 1).unwrap();
        // split t = 2: chi((1+2)(1+3)) = chi(12 mod 5) = chi(2) = i
        let v = kernel_on_torus(&t, &sp, &[1], &[], &[t.from_int(2)], &[], &chi, true).unwrap();
        assert!(close(v, C::new(0.0, 1.0), 1e-12), "{v}");
        // a -1 coordinate kills the kernel
        let z = kernel_on_torus(
            &t,
            &sp,
            &[1],
            &[],
            &[t.neg(t.one())],
            &[],
            &chi,
            true,
        )
        .unwrap();
        assert!(close(z, C::new(0.0, 0.0), 0.0));
        // SO_3 split carries the extra chi(2) relative to the Sp_2 factors
        let so3 = GroupSpec::new(GroupKind::SoOdd, 1, 5).unwrap();
        let v3 = kernel_on_torus(&t, &so3, &[1], &[], &[t.from_int(2)], &[], &chi, true)
            .unwrap();
        let chi2 = chi.eval(&t, t.from_int(2)).unwrap();
        assert!(close(v3, v * chi2, 1e-12));
    }

    #[test]
    fn c_normalization_frozen_values() {
        use crate::groups::{GroupKind, GroupSpec};
        // Sp_2(F_5), chi exponent 1: eps = -1, c = -tau(chi^-2) = 1
        let sp = GroupSpec::new(GroupKind::Sp, 1, 5).unwrap();
        let t = build_field(5, 1).unwrap();
        let psi = AddChar::new(&t, 1).unwrap();
        let chi = MultChar::new(&t, 1, 1).unwrap();
        let c = c_normalization(&t, &sp, &chi, &psi).unwrap();
        assert!(close(c, C::new(1.0, 0.0), 1e-12), "{c}");

        // SO_3(F_5): the odd case carries chi(2) tau(chi^-2)^1
        let so3 = GroupSpec::new(GroupKind::SoOdd, 1, 5).unwrap();
        let c3 = c_normalization(&t, &so3, &chi, &psi).unwrap();
        let chi2 = chi.eval(&t, t.from_int(2)).unwrap();
        let tau = gauss(&t, &MultChar::new(&t, 1, 2).unwrap(), &psi).unwrap();
        assert!(close(c3, -chi2 * tau, 1e-12));

        // U_1(F_3): c = chi(-1) tau(chi^-1|_F, psi)
        let u1 = GroupSpec::new(GroupKind::U, 1, 3).unwrap();
        let t2 = build_field(3, 2).unwrap();
        let psi2 = AddChar::new(&t2, 1).unwrap();
        for a in 0..8 {
            let chi = MultChar::new(&t2, 2, a).unwrap();
            let c = c_normalization(&t2, &u1, &chi, &psi2).unwrap();
            let want = chi.eval(&t2, t2.neg(t2.one())).unwrap()
                * gauss(&t2, &chi.inverse(&t2).restrict(&t2, 1).unwrap(), &psi2).unwrap();
            assert!(close(c, want, 1e-12), "a={a}");
        }
    }

    #[test]
    fn gamma_dbl_multiplicativity_f5() {
        // Gamma(Ind(a1, a2), chi) = Gamma(a1, chi) Gamma(a2, chi) for all
        // characters over F_5
        let t = build_field(5, 1).unwrap();
        let psi = AddChar::new(&t, 1).unwrap();
        for c in 0..4 {
            let chi = MultChar::new(&t, 1, c).unwrap();
            for a1 in 0..4 {
                for a2 in 0..4 {
                    let whole = gamma_dbl_gl(&t, &[(1, a1), (1, a2)], &chi, &psi).unwrap();
                    let p1 = gamma_dbl_gl(&t, &[(1, a1)], &chi, &psi).unwrap();
                    let p2 = gamma_dbl_gl(&t, &[(1, a2)], &chi, &psi).unwrap();
                    assert!(close(whole, p1 * p2, tol(32)), "a1={a1} a2={a2} c={c}");
                }
            }
        }
    }

    #[test]
    fn singular_vanishing_k2_q3() {
        let f3 = build_field(3, 1).unwrap();
        let psi = AddChar::new(&f3, 1).unwrap();
        let chi = MultChar::new(&f3, 1, 1).unwrap();
        let e11 = Mat::from_rows(&[&[f3.one(), Elem::Zero], &[Elem::Zero, Elem::Zero]]);
        let (s, n) = singular_vanishing_sum(&f3, 1, &e11, &chi, &psi).unwrap();
        assert!(s.norm() < tol(n));
        let zero = Mat::zero(2);
        let (s0, n0) = singular_vanishing_sum(&f3, 1, &zero, &chi, &psi).unwrap();
        assert!(s0.norm() < tol(n0));
        // invertible X rejected
        let id = Mat::identity(2);
        assert_eq!(
            singular_vanishing_sum(&f3, 1, &id, &chi, &psi).unwrap_err(),
            Error::InvertibleMatrix
        );
    }
}
