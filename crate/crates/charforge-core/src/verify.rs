//! The identity-verifier catalog: every closed form in the sums/groups
//! modules checked against direct brute-force summation over a parameter
//! grid, one [`IdentityReport`] per grid point.

use crate::chars::{AddChar, MultChar, NormOneChar, TorusCharData};
use crate::error::{Error, Result};
use crate::ff::Tower;
use crate::gl2::{self, Gl2TestFn, Gl2Torus};
use crate::groups::{
    self, enumerate_group, split_prime_power, GroupKind, GroupSpec, TorusDatum,
};
use crate::mat::Mat;
use crate::params;
use crate::report::IdentityReport;
use crate::sums::{self, C};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::sync::Arc;

/// Grid controls; empty vectors select the suite's default grid.
#[derive(Clone, Debug)]
pub struct Grid {
    pub qs: Vec<u64>,
    pub ks: Vec<u32>,
    pub ms: Vec<u32>,
    pub psi_scales: Vec<u64>,
    /// Cap the number of characters tried per family (seeded subset).
    pub sample: Option<u64>,
    pub seed: u64,
    pub tol_override: Option<f64>,
}

impl Default for Grid {
    fn default() -> Grid {
        Grid {
            qs: Vec::new(),
            ks: Vec::new(),
            ms: Vec::new(),
            psi_scales: Vec::new(),
            sample: None,
            seed: 0xC0FFEE,
            tol_override: None,
        }
    }
}

impl Grid {
    fn qs_or(&self, def: &[u64]) -> Vec<u64> {
        if self.qs.is_empty() {
            def.to_vec()
        } else {
            self.qs.clone()
        }
    }
    fn ks_or(&self, def: &[u32]) -> Vec<u32> {
        if self.ks.is_empty() {
            def.to_vec()
        } else {
            self.ks.clone()
        }
    }
    fn ms_or(&self, def: &[u32]) -> Vec<u32> {
        if self.ms.is_empty() {
            def.to_vec()
        } else {
            self.ms.clone()
        }
    }
    fn scales_or(&self, def: &[u64]) -> Vec<u64> {
        if self.psi_scales.is_empty() {
            def.to_vec()
        } else {
            self.psi_scales.clone()
        }
    }

    /// Deterministic character subset: all of `0..n`, or a seeded sample.
    fn chars(&self, n: u64, label: &str) -> Vec<u64> {
        self.chars_capped(n, label, self.sample)
    }

    fn chars_capped(&self, n: u64, label: &str, cap: Option<u64>) -> Vec<u64> {
        let all: Vec<u64> = (0..n).collect();
        match cap {
            None => all,
            Some(s) if s >= n => all,
            Some(s) => {
                let mut h: u64 = 0xcbf29ce484222325;
                for b in label.bytes() {
                    h = (h ^ b as u64).wrapping_mul(0x100000001b3);
                }
                let mut rng = ChaCha20Rng::seed_from_u64(self.seed ^ h);
                let mut picked = all;
                picked.shuffle(&mut rng);
                picked.truncate(s as usize);
                picked.sort_unstable();
                picked
            }
        }
    }
}

pub const SUITE_NAMES: &[&str] = &[
    "split_I",
    "split_II",
    "elliptic_EF",
    "elliptic_E2F",
    "hasse_davenport",
    "reflection",
    "frobenius_invariance",
    "appendix_A1",
    "appendix_A2",
    "appendix_C_gl_trivial_chi",
    "appendix_C_split",
    "appendix_C_elliptic_EF",
    "appendix_C_elliptic_E2F",
    "appendix_C_dl",
    "gauss_core",
    "gauss_torus",
    "kondo",
    "jacobi_gl",
    "singular",
    "li_hu",
    "dl",
    "dl_mult",
    "geom_conj",
    "enumeration",
];

/// Whether a suite supports a given base-field size. Used by `--suite all`
/// to filter a shared q-list; a directly named suite rejects unsupported
/// values instead.
pub fn suite_supports_q(name: &str, q: u64) -> bool {
    if split_prime_power(q).is_err() {
        return false;
    }
    match name {
        // E = F generic suites need a character with chi^2 != 1
        "split_II" | "elliptic_EF" => q >= 5,
        // gl2 tables and matrix enumerations exist for prime q in {3,5,7}
        "kondo" | "jacobi_gl" | "singular" | "appendix_C_gl_trivial_chi" | "enumeration" => {
            matches!(q, 3 | 5 | 7)
        }
        "dl" | "appendix_C_dl" | "geom_conj" | "dl_mult" => matches!(q, 3 | 5 | 7),
        "li_hu" => q <= 9,
        _ => q <= 9,
    }
}

/// The identity suites accept `q in {3,5,7,9}` and degrees `k, m <= 3`.
fn check_grid_bounds(grid: &Grid) -> Result<()> {
    for &q in &grid.qs {
        if !matches!(q, 3 | 5 | 7 | 9) {
            return Err(Error::UnsupportedParams(format!(
                "supported grid has q in {{3,5,7,9}}, got {q}"
            )));
        }
    }
    for &k in grid.ks.iter().chain(&grid.ms) {
        if k == 0 || k > 3 {
            return Err(Error::UnsupportedParams(format!(
                "supported grid has degrees 1..=3, got {k}"
            )));
        }
    }
    Ok(())
}

/// Run one named suite over the grid.
pub fn run_suite(name: &str, grid: &Grid) -> Result<Vec<IdentityReport>> {
    check_grid_bounds(grid)?;
    match name {
        "split_I" => split_i(grid),
        "split_II" => split_ii(grid),
        "elliptic_EF" => elliptic_ef(grid),
        "elliptic_E2F" => elliptic_e2f(grid),
        "hasse_davenport" => hasse_davenport(grid),
        "reflection" => reflection(grid),
        "frobenius_invariance" => frobenius_invariance(grid),
        "appendix_A1" => appendix_a1(grid),
        "appendix_A2" => appendix_a2(grid),
        "appendix_C_gl_trivial_chi" => appendix_c_gl(grid),
        "appendix_C_split" => appendix_c_split(grid),
        "appendix_C_elliptic_EF" => appendix_c_elliptic_ef(grid),
        "appendix_C_elliptic_E2F" => appendix_c_elliptic_e2f(grid),
        "appendix_C_dl" => appendix_c_dl(grid),
        "gauss_core" => gauss_core(grid),
        "gauss_torus" => gauss_torus(grid),
        "kondo" => kondo(grid),
        "jacobi_gl" => jacobi_gl(grid),
        "singular" => singular(grid),
        "li_hu" => li_hu(grid),
        "dl" => dl(grid),
        "dl_mult" => dl_mult(grid),
        "geom_conj" => geom_conj(grid),
        "enumeration" => enumeration(grid),
        other => Err(Error::UnknownIdentity(other.to_string())),
    }
}

fn base_tower(q: u64, rel: u32) -> Result<Arc<Tower>> {
    let (p, e0) = split_prime_power(q)?;
    Tower::new(p, e0, rel)
}

/// Split torus computation I: for nontrivial chi on F_q,
/// `sum_{x != -1} alpha(x) chi(N(1+x)) =
///  -chi(-1)^k |E_k|^(1/2) G(alpha,chi) tau(alpha^-1) tau(chi^-1 o N)`.
fn split_i(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5]) {
        for k in grid.ks_or(&[1, 2]) {
            let t = base_tower(q, k)?;
            let nk = t.level_units(k);
            let n1 = t.level_units(1);
            for scale in grid.scales_or(&[1]) {
                let psi = AddChar::new(&t, scale)?;
                for c in grid.chars(n1, "split_I.chi") {
                    if c == 0 {
                        continue;
                    }
                    let chi = MultChar::new(&t, 1, c)?;
                    for a in grid.chars(nk, "split_I.alpha") {
                        let alpha = MultChar::new(&t, k, a)?;
                        let mut lhs = C::new(0.0, 0.0);
                        let minus_one = t.neg(t.one());
                        for x in t.level_units_iter(k)? {
                            if x == minus_one {
                                continue;
                            }
                            let arg = t.add(t.one(), x);
                            lhs += alpha.eval(&t, x)?
                                * chi.eval(&t, t.norm(arg, k, 1)?)?;
                        }
                        let chi_m1 = chi.eval(&t, minus_one)?;
                        let g = sums::gauss_twisted(&t, &alpha, &chi, &psi)?;
                        let t_ainv = sums::gauss(&t, &alpha.inverse(&t), &psi)?;
                        let lifted = chi.inverse(&t).compose_norm(&t, k)?;
                        let t_chin = sums::gauss(&t, &lifted, &psi)?;
                        let rhs = -chi_m1.powu(k)
                            * (t.level_size(k) as f64).sqrt()
                            * g
                            * t_ainv
                            * t_chin;
                        out.push(IdentityReport::new(
                            "split_I",
                            params! {"q" => q, "k" => k, "alpha" => a, "chi" => c, "psi_scale" => scale},
                            lhs,
                            rhs,
                            4 * nk,
                            grid.tol_override,
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Split torus computation II (E = F): for chi^2 != 1,
/// `sum_{x != -1} alpha(x) chi(N(1+x)) chi(N(1+x^-1)) =
///  -q^(k/2) G(alpha,chi) G(alpha^-1,chi) tau(chi^-2)^k`.
fn split_ii(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    let pairs: Vec<(u64, u32)> = if grid.qs.is_empty() && grid.ks.is_empty() {
        vec![(5, 1), (5, 2), (7, 1)]
    } else {
        let mut v = Vec::new();
        for q in grid.qs_or(&[5, 7]) {
            for k in grid.ks_or(&[1, 2]) {
                v.push((q, k));
            }
        }
        v
    };
    for (q, k) in pairs {
        let t = base_tower(q, k)?;
        let n1 = t.level_units(1);
        if !(0..n1).any(|c| c != 0 && (2 * c) % n1 != 0) {
            return Err(Error::UnsupportedParams(format!(
                "E=F generic suites require q >= 5 (no chi with chi^2 != 1 at q = {q})"
            )));
        }
        let nk = t.level_units(k);
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(&t, scale)?;
            for c in grid.chars(n1, "split_II.chi") {
                if c == 0 || (2 * c) % n1 == 0 {
                    continue;
                }
                let chi = MultChar::new(&t, 1, c)?;
                for a in grid.chars(nk, "split_II.alpha") {
                    let alpha = MultChar::new(&t, k, a)?;
                    let mut lhs = C::new(0.0, 0.0);
                    let minus_one = t.neg(t.one());
                    for x in t.level_units_iter(k)? {
                        if x == minus_one {
                            continue;
                        }
                        let a1 = t.add(t.one(), x);
                        let a2 = t.add(t.one(), t.inv(x)?);
                        lhs += alpha.eval(&t, x)?
                            * chi.eval(&t, t.norm(a1, k, 1)?)?
                            * chi.eval(&t, t.norm(a2, k, 1)?)?;
                    }
                    let g1 = sums::gauss_twisted(&t, &alpha, &chi, &psi)?;
                    let g2 = sums::gauss_twisted(&t, &alpha.inverse(&t), &chi, &psi)?;
                    let chi_m2 =
                        MultChar::new(&t, 1, (n1 - (2 * c) % n1) % n1)?;
                    let t2 = sums::gauss(&t, &chi_m2, &psi)?;
                    let rhs = -(t.level_size(k) as f64).sqrt() * g1 * g2 * t2.powu(k);
                    out.push(IdentityReport::new(
                        "split_II",
                        params! {"q" => q, "k" => k, "alpha" => a, "chi" => c, "psi_scale" => scale},
                        lhs,
                        rhs,
                        4 * nk,
                        grid.tol_override,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Elliptic torus computation (E = F): for chi^2 != 1,
/// `sum_{x in N_2m, x != -1} theta(x) chi(N(1+x)) =
///  q^(m/2) tau(chi^-2)^m G(theta_hat, chi, psi_2m)`.
fn elliptic_ef(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    let pairs: Vec<(u64, u32, Option<u64>)> = if grid.qs.is_empty() && grid.ms.is_empty() {
        vec![(5, 1, None), (7, 1, None), (5, 2, Some(8))]
    } else {
        let mut v = Vec::new();
        for q in grid.qs_or(&[5, 7]) {
            for m in grid.ms_or(&[1]) {
                v.push((q, m, grid.sample));
            }
        }
        v
    };
    for (q, m, cap) in pairs {
        let t = base_tower(q, 2 * m)?;
        let n1 = t.level_units(1);
        if !(0..n1).any(|c| c != 0 && (2 * c) % n1 != 0) {
            return Err(Error::UnsupportedParams(format!(
                "E=F generic suites require q >= 5 (no chi with chi^2 != 1 at q = {q})"
            )));
        }
        let group = t.norm_one_subgroup(m)?;
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(&t, scale)?;
            for c in grid.chars(n1, "elliptic_EF.chi") {
                if c == 0 || (2 * c) % n1 == 0 {
                    continue;
                }
                let chi = MultChar::new(&t, 1, c)?;
                let chi_m2 = MultChar::new(&t, 1, (n1 - (2 * c) % n1) % n1)?;
                let t2 = sums::gauss(&t, &chi_m2, &psi)?;
                for b in grid.chars_capped(group.order, "elliptic_EF.theta", cap) {
                    let theta = NormOneChar::new(&group, b);
                    let mut lhs = C::new(0.0, 0.0);
                    for (j, x) in group.iter(&t).enumerate() {
                        let arg = t.add(t.one(), x);
                        if arg.is_zero() {
                            continue;
                        }
                        lhs += theta.eval_power(&group, j as u64)
                            * chi.eval(&t, t.norm(arg, 2 * m, 1)?)?;
                    }
                    let hat = theta.transfer(&t)?;
                    let g = sums::gauss_twisted(&t, &hat, &chi, &psi)?;
                    let rhs = (q as f64).powf(m as f64 / 2.0) * t2.powu(m) * g;
                    out.push(IdentityReport::new(
                        "elliptic_EF",
                        params! {"q" => q, "m" => m, "theta" => b, "chi" => c, "psi_scale" => scale},
                        lhs,
                        rhs,
                        group.order + t.level_units(2 * m),
                        grid.tol_override,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Elliptic torus computation (E != F, m odd): for chi^(1+q) != 1,
/// `sum_{x in N_2m, x != -1} theta(x) chi(N_{2m/2}(1+x)) =
///  q^(m/2) chi(-1) tau(chi^-1|_F)^m G(theta_hat, chi, psi_2m)`.
fn elliptic_e2f(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    let pairs: Vec<(u64, u32)> = if grid.qs.is_empty() && grid.ms.is_empty() {
        vec![(3, 1), (5, 1)]
    } else {
        let mut v = Vec::new();
        for q in grid.qs_or(&[3, 5]) {
            for m in grid.ms_or(&[1]) {
                if m % 2 == 0 {
                    return Err(Error::UnsupportedParams(
                        "elliptic_E2F requires odd m".into(),
                    ));
                }
                v.push((q, m));
            }
        }
        v
    };
    for (q, m) in pairs {
        let t = base_tower(q, 2 * m)?;
        let n2 = t.level_units(2);
        let group = t.norm_one_subgroup(m)?;
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(&t, scale)?;
            for c in grid.chars(n2, "elliptic_E2F.chi") {
                let chi = MultChar::new(&t, 2, c)?;
                if chi.is_conjugate_dual(&t, 1) {
                    continue;
                }
                let chi_res_inv = chi.inverse(&t).restrict(&t, 1)?;
                let t1 = sums::gauss(&t, &chi_res_inv, &psi)?;
                let chi_m1 = chi.eval(&t, t.neg(t.one()))?;
                for b in grid.chars(group.order, "elliptic_E2F.theta") {
                    let theta = NormOneChar::new(&group, b);
                    let mut lhs = C::new(0.0, 0.0);
                    for (j, x) in group.iter(&t).enumerate() {
                        let arg = t.add(t.one(), x);
                        if arg.is_zero() {
                            continue;
                        }
                        lhs += theta.eval_power(&group, j as u64)
                            * chi.eval(&t, t.norm(arg, 2 * m, 2)?)?;
                    }
                    let hat = theta.transfer(&t)?;
                    let g = sums::gauss_twisted(&t, &hat, &chi, &psi)?;
                    let rhs = (q as f64).powf(m as f64 / 2.0) * chi_m1 * t1.powu(m) * g;
                    out.push(IdentityReport::new(
                        "elliptic_E2F",
                        params! {"q" => q, "m" => m, "theta" => b, "chi" => c, "psi_scale" => scale},
                        lhs,
                        rhs,
                        group.order + t.level_units(2 * m),
                        grid.tol_override,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// `tau(beta o N_{m/1}, psi_m) = tau(beta, psi)^m` for every beta.
fn hasse_davenport(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    let pairs: Vec<(u64, u32)> = if grid.qs.is_empty() && grid.ms.is_empty() {
        vec![(3, 2), (3, 3), (5, 2), (7, 2)]
    } else {
        let mut v = Vec::new();
        for q in grid.qs_or(&[3, 5, 7]) {
            for m in grid.ms_or(&[2]) {
                v.push((q, m));
            }
        }
        v
    };
    for (q, m) in pairs {
        let t = base_tower(q, m)?;
        let n1 = t.level_units(1);
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(&t, scale)?;
            for b in grid.chars(n1, "hd.beta") {
                let beta = MultChar::new(&t, 1, b)?;
                let lifted = beta.compose_norm(&t, m)?;
                let lhs = sums::gauss(&t, &lifted, &psi)?;
                let rhs = sums::gauss(&t, &beta, &psi)?.powu(m);
                out.push(IdentityReport::new(
                    "hasse_davenport",
                    params! {"q" => q, "m" => m, "beta" => b, "psi_scale" => scale},
                    lhs,
                    rhs,
                    t.level_units(m) + m as u64 * n1,
                    grid.tol_override,
                ));
            }
        }
    }
    Ok(out)
}

/// `tau(chi, psi) tau(chi^-1, psi) = chi(-1)` for nontrivial chi.
fn reflection(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5, 7, 9]) {
        let t = base_tower(q, 1)?;
        let n1 = t.level_units(1);
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(&t, scale)?;
            for c in grid.chars(n1, "reflection.chi") {
                if c == 0 {
                    continue;
                }
                let chi = MultChar::new(&t, 1, c)?;
                let lhs =
                    sums::gauss(&t, &chi, &psi)? * sums::gauss(&t, &chi.inverse(&t), &psi)?;
                let rhs = chi.eval(&t, t.neg(t.one()))?;
                out.push(IdentityReport::new(
                    "reflection",
                    params! {"q" => q, "chi" => c, "psi_scale" => scale},
                    lhs,
                    rhs,
                    2 * n1,
                    grid.tol_override,
                ));
            }
        }
    }
    Ok(out)
}

/// `G(alpha^q, chi^q, psi_k) = G(alpha, chi, psi_k)`.
fn frobenius_invariance(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    let pairs: Vec<(u64, u32)> = if grid.qs.is_empty() && grid.ks.is_empty() {
        vec![(3, 2), (5, 2)]
    } else {
        let mut v = Vec::new();
        for q in grid.qs_or(&[3, 5]) {
            for k in grid.ks_or(&[2]) {
                v.push((q, k));
            }
        }
        v
    };
    for (q, k) in pairs {
        let t = base_tower(q, k)?;
        let nk = t.level_units(k);
        let n1 = t.level_units(1);
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(&t, scale)?;
            for a in grid.chars(nk, "frob.alpha") {
                for c in grid.chars(n1, "frob.chi") {
                    let alpha = MultChar::new(&t, k, a)?;
                    let chi = MultChar::new(&t, 1, c)?;
                    let af = MultChar::new(&t, k, (a * q) % nk)?;
                    let cf = MultChar::new(&t, 1, (c * q) % n1)?;
                    let lhs = sums::gauss_twisted(&t, &af, &cf, &psi)?;
                    let rhs = sums::gauss_twisted(&t, &alpha, &chi, &psi)?;
                    out.push(IdentityReport::new(
                        "frobenius_invariance",
                        params! {"q" => q, "k" => k, "alpha" => a, "chi" => c, "psi_scale" => scale},
                        lhs,
                        rhs,
                        2 * nk,
                        grid.tol_override,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// `appendix_A1`: for nontrivial chi on F_q,
/// `sum_{Tr(x) != 0} chi(N(x / Tr x)) = q^(1/2) (q-1) tau(chi^-1)^2 tau(chi^2)`.
fn appendix_a1(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5, 7]) {
        let t = base_tower(q, 2)?;
        let n1 = t.level_units(1);
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(&t, scale)?;
            for c in grid.chars(n1, "a1.chi") {
                if c == 0 {
                    continue;
                }
                let chi = MultChar::new(&t, 1, c)?;
                let mut lhs = C::new(0.0, 0.0);
                for x in t.level_units_iter(2)? {
                    let tr = t.trace(x, 2, 1)?;
                    if tr.is_zero() {
                        continue;
                    }
                    let arg = t.mul(x, t.inv(tr)?);
                    lhs += chi.eval(&t, t.norm(arg, 2, 1)?)?;
                }
                let t_inv = sums::gauss(&t, &chi.inverse(&t), &psi)?;
                let chi2 = MultChar::new(&t, 1, (2 * c) % n1)?;
                let t_sq = sums::gauss(&t, &chi2, &psi)?;
                let rhs = (q as f64).sqrt() * (q as f64 - 1.0) * t_inv * t_inv * t_sq;
                out.push(IdentityReport::new(
                    "appendix_A1",
                    params! {"q" => q, "chi" => c, "psi_scale" => scale},
                    lhs,
                    rhs,
                    t.level_units(2),
                    grid.tol_override,
                ));
            }
        }
    }
    Ok(out)
}

/// `appendix_A2`: for chi on F_{q^2} with chi^(1+q) != 1 and theta on N_2,
/// `sum_{x in N_2, x != -1} theta(x) chi(1+x) =
///  q^(1/2) chi(-1) G(theta_hat, chi, psi_2) tau(chi^-1|_F, psi)`.
fn appendix_a2(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5, 7]) {
        let t = base_tower(q, 2)?;
        let n2 = t.level_units(2);
        let group = t.norm_one_subgroup(1)?;
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(&t, scale)?;
            for c in grid.chars(n2, "a2.chi") {
                let chi = MultChar::new(&t, 2, c)?;
                if chi.is_conjugate_dual(&t, 1) {
                    continue;
                }
                for b in grid.chars(group.order, "a2.theta") {
                    let theta = NormOneChar::new(&group, b);
                    let mut lhs = C::new(0.0, 0.0);
                    for (j, x) in group.iter(&t).enumerate() {
                        let arg = t.add(t.one(), x);
                        if arg.is_zero() {
                            continue;
                        }
                        lhs += theta.eval_power(&group, j as u64) * chi.eval(&t, arg)?;
                    }
                    let hat = theta.transfer(&t)?;
                    let g = sums::gauss_twisted(&t, &hat, &chi, &psi)?;
                    let t_res = sums::gauss(&t, &chi.inverse(&t).restrict(&t, 1)?, &psi)?;
                    let chi_m1 = chi.eval(&t, t.neg(t.one()))?;
                    let rhs = (q as f64).sqrt() * chi_m1 * g * t_res;
                    out.push(IdentityReport::new(
                        "appendix_A2",
                        params! {"q" => q, "theta" => b, "chi" => c, "psi_scale" => scale},
                        lhs,
                        rhs,
                        group.order + n2,
                        grid.tol_override,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// `appendix_C_gl_trivial_chi`: for 1 not in the cuspidal support,
/// `c(tau, 1) = (-1)^k q^(-k/2) gamma(tau_dual) gamma(tau)`, checked by brute
/// force at k = 1 and on the full GL_2 table.
fn appendix_c_gl(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5, 7]) {
        // k = 1: GL_1, tau = alpha != 1
        let t1 = base_tower(q, 1)?;
        let n1 = t1.level_units(1);
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(&t1, scale)?;
            let trivial = MultChar::new(&t1, 1, 0)?;
            for a in 1..n1 {
                let alpha = MultChar::new(&t1, 1, a)?;
                let mut lhs = C::new(0.0, 0.0);
                for x in t1.level_units_iter(1)? {
                    let g = Mat::from_rows(&[&[x]]);
                    lhs += sums::kernel_li_hu(&t1, 1, &g) * alpha.eval(&t1, x)?;
                }
                lhs /= (q as f64).sqrt();
                let rhs =
                    sums::jacobi_scalar_gl_formula(&t1, &[(1, a)], &trivial, &psi)?;
                out.push(IdentityReport::new(
                    "appendix_C_gl_trivial_chi",
                    params! {"q" => q, "k" => 1, "alpha" => a, "psi_scale" => scale},
                    lhs,
                    rhs,
                    n1,
                    grid.tol_override,
                ));
            }
        }
        // k = 2: every row of the GL_2 table without 1 in its support
        let tb = gl2::gl2_char_table(q)?;
        let t = &*tb.tower;
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(t, scale)?;
            let trivial = MultChar::new(t, 1, 0)?;
            for row in &tb.rows {
                if row.trivial_in_support() {
                    continue;
                }
                let lhs = tb.jacobi_brute(row, &trivial)?;
                let rhs =
                    sums::jacobi_scalar_gl_formula(t, &row.support(), &trivial, &psi)?;
                out.push(IdentityReport::new(
                    "appendix_C_gl_trivial_chi",
                    params! {"q" => q, "k" => 2, "support" => row.support(), "psi_scale" => scale},
                    lhs,
                    rhs,
                    tb.order(),
                    grid.tol_override,
                ));
            }
        }
    }
    Ok(out)
}

/// `appendix_C_split`, the conjugate-dual split case: the sum is `|E_k| - 2`
/// when alpha = chi^-1 o N, else `-G(alpha,chi) G(alpha_bar,chi)`.
fn appendix_c_split(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5, 7]) {
        for e_deg in [1u32, 2] {
            let ks: Vec<u32> = if e_deg == 1 {
                grid.ks_or(&[1, 2])
            } else {
                grid.ks_or(&[1])
            };
            for k in ks {
                let t = base_tower(q, e_deg * k)?;
                let ne = t.level_units(e_deg);
                let nek = t.level_units(e_deg * k);
                for scale in grid.scales_or(&[1]) {
                    let psi = AddChar::new(&t, scale)?;
                    let _ = psi;
                    for c in grid.chars(ne, "c_split.chi") {
                        let chi = MultChar::new(&t, e_deg, c)?;
                        if !chi.is_conjugate_dual(&t, 1) {
                            continue;
                        }
                        for a in grid.chars(nek, "c_split.alpha") {
                            let alpha = MultChar::new(&t, e_deg * k, a)?;
                            let mut lhs = C::new(0.0, 0.0);
                            let minus_one = t.neg(t.one());
                            for x in t.level_units_iter(e_deg * k)? {
                                if x == minus_one {
                                    continue;
                                }
                                let a1 = t.add(t.one(), x);
                                let xbar =
                                    if e_deg == 1 { x } else { t.frobenius(x, 1) };
                                let a2 = t.add(t.one(), t.inv(xbar)?);
                                let mut v = alpha.eval(&t, x)?;
                                if !a1.is_zero() {
                                    v *= chi.eval(&t, t.norm(a1, e_deg * k, e_deg)?)?;
                                } else {
                                    continue;
                                }
                                if !a2.is_zero() {
                                    v *= chi.eval(&t, t.norm(a2, e_deg * k, e_deg)?)?;
                                } else {
                                    continue;
                                }
                                lhs += v;
                            }
                            let excluded =
                                chi.inverse(&t).compose_norm(&t, e_deg * k)?;
                            let psi = AddChar::new(&t, scale)?;
                            let exceptional = a % nek == excluded.exponent;
                            let rhs = if exceptional {
                                C::new(t.level_size(e_deg * k) as f64 - 2.0, 0.0)
                            } else {
                                let abar = if e_deg == 1 {
                                    alpha.inverse(&t)
                                } else {
                                    alpha.conj_dual(&t, 1)
                                };
                                let g1 = sums::gauss_twisted(&t, &alpha, &chi, &psi)?;
                                let g2 = sums::gauss_twisted(&t, &abar, &chi, &psi)?;
                                -g1 * g2
                            };
                            out.push(IdentityReport::new(
                                "appendix_C_split",
                                params! {"q" => q, "e_deg" => e_deg, "k" => k, "alpha" => a, "chi" => c,
                                         "branch" => if exceptional { "exceptional" } else { "generic" },
                                         "psi_scale" => scale},
                                lhs,
                                rhs,
                                3 * nek,
                                grid.tol_override,
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `appendix_C_elliptic_EF`, the quadratic case over E = F: the sum is `G(theta_hat, chi)`
/// generically and `q^m` at the exceptional point `theta_hat = chi o N`.
/// (At the exceptional point every summand is chi of a base-field square,
/// hence 1, and there are exactly `q^m` of them - for the quadratic chi as
/// well as the trivial one.)
fn appendix_c_elliptic_ef(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5, 7]) {
        for m in grid.ms_or(&[1, 2]) {
            let t = base_tower(q, 2 * m)?;
            let n1 = t.level_units(1);
            let group = t.norm_one_subgroup(m)?;
            for scale in grid.scales_or(&[1]) {
                let psi = AddChar::new(&t, scale)?;
                for c in grid.chars(n1, "c_eef.chi") {
                    if (2 * c) % n1 != 0 {
                        continue;
                    }
                    let chi = MultChar::new(&t, 1, c)?;
                    for b in grid.chars(group.order, "c_eef.theta") {
                        let theta = NormOneChar::new(&group, b);
                        let mut lhs = C::new(0.0, 0.0);
                        for (j, x) in group.iter(&t).enumerate() {
                            let arg = t.add(t.one(), x);
                            if arg.is_zero() {
                                continue;
                            }
                            lhs += theta.eval_power(&group, j as u64)
                                * chi.eval(&t, t.norm(arg, 2 * m, 1)?)?;
                        }
                        let hat = theta.transfer(&t)?;
                        let lifted = chi.compose_norm(&t, 2 * m)?;
                        let exceptional = hat.exponent == lifted.exponent;
                        let rhs = if exceptional {
                            C::new((q as f64).powi(m as i32), 0.0)
                        } else {
                            sums::gauss_twisted(&t, &hat, &chi, &psi)?
                        };
                        out.push(IdentityReport::new(
                            "appendix_C_elliptic_EF",
                            params! {"q" => q, "m" => m, "theta" => b, "chi" => c,
                                     "branch" => if exceptional { "exceptional" } else { "generic" },
                                     "psi_scale" => scale},
                            lhs,
                            rhs,
                            group.order + t.level_units(2 * m),
                            grid.tol_override,
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `appendix_C_elliptic_E2F`, the conjugate-dual unitary case (m odd): the sum is
/// `G(theta_hat, chi)` generically and `q^m` at theta_hat = chi^-1 o N.
fn appendix_c_elliptic_e2f(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5, 7]) {
        for m in grid.ms_or(&[1]) {
            if m % 2 == 0 {
                return Err(Error::UnsupportedParams(
                    "appendix_C_elliptic_E2F requires odd m".into(),
                ));
            }
            let t = base_tower(q, 2 * m)?;
            let n2 = t.level_units(2);
            let group = t.norm_one_subgroup(m)?;
            for scale in grid.scales_or(&[1]) {
                let psi = AddChar::new(&t, scale)?;
                for c in grid.chars(n2, "c_e2f.chi") {
                    let chi = MultChar::new(&t, 2, c)?;
                    if !chi.is_conjugate_dual(&t, 1) {
                        continue;
                    }
                    for b in grid.chars(group.order, "c_e2f.theta") {
                        let theta = NormOneChar::new(&group, b);
                        let mut lhs = C::new(0.0, 0.0);
                        for (j, x) in group.iter(&t).enumerate() {
                            let arg = t.add(t.one(), x);
                            if arg.is_zero() {
                                continue;
                            }
                            lhs += theta.eval_power(&group, j as u64)
                                * chi.eval(&t, t.norm(arg, 2 * m, 2)?)?;
                        }
                        let hat = theta.transfer(&t)?;
                        let excluded =
                            chi.inverse(&t).compose_norm(&t, 2 * m)?;
                        let exceptional = hat.exponent == excluded.exponent;
                        let rhs = if exceptional {
                            C::new((q as f64).powi(m as i32), 0.0)
                        } else {
                            sums::gauss_twisted(&t, &hat, &chi, &psi)?
                        };
                        out.push(IdentityReport::new(
                            "appendix_C_elliptic_E2F",
                            params! {"q" => q, "m" => m, "theta" => b, "chi" => c,
                                     "branch" => if exceptional { "exceptional" } else { "generic" },
                                     "psi_scale" => scale},
                            lhs,
                            rhs,
                            group.order + t.level_units(2 * m),
                            grid.tol_override,
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn dl_group_list(q: u64) -> Vec<GroupSpec> {
    [
        (GroupKind::Sp, 1u32),
        (GroupKind::SoOdd, 1),
        (GroupKind::U, 1),
        (GroupKind::U, 2),
        (GroupKind::GSp, 1),
    ]
    .iter()
    .filter_map(|&(k, n)| GroupSpec::new(k, n, q).ok())
    .collect()
}

fn generic_chis(spec: &GroupSpec, tower: &Tower) -> Vec<MultChar> {
    let e = spec.e_deg();
    let ne = tower.level_units(e);
    (0..ne)
        .filter_map(|c| MultChar::new(tower, e, c).ok())
        .filter(|chi| !chi.is_conjugate_dual(tower, 1))
        .collect()
}

fn conjugate_dual_chis(spec: &GroupSpec, tower: &Tower) -> Vec<MultChar> {
    let e = spec.e_deg();
    let ne = tower.level_units(e);
    (0..ne)
        .filter_map(|c| MultChar::new(tower, e, c).ok())
        .filter(|chi| chi.is_conjugate_dual(tower, 1))
        .collect()
}

fn all_char_data(td: &TorusDatum, tower: &Tower, grid: &Grid, label: &str) -> Vec<TorusCharData> {
    let (plus, minus) = td.char_ranges(tower);
    let mut out = vec![TorusCharData {
        alphas: Vec::new(),
        thetas: Vec::new(),
    }];
    for (i, &r) in plus.iter().enumerate() {
        let choices = grid.chars(r, &format!("{label}.alpha{i}"));
        let mut next = Vec::new();
        for pre in &out {
            for &v in &choices {
                let mut c = pre.clone();
                c.alphas.push(v);
                next.push(c);
            }
        }
        out = next;
    }
    for (i, &r) in minus.iter().enumerate() {
        let choices = grid.chars(r, &format!("{label}.theta{i}"));
        let mut next = Vec::new();
        for pre in &out {
            for &v in &choices {
                let mut c = pre.clone();
                c.thetas.push(v);
                next.push(c);
            }
        }
        out = next;
    }
    out
}

/// The main pairing identity on the acceptance grid, with the SO_3
/// negative control appended as a synthetic report.
fn dl(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    let mut negative_flips = 0u64;
    let mut so3_points = 0u64;
    for q in grid.qs_or(&[3, 5]) {
        for spec in dl_group_list(q) {
            for td in spec.torus_catalog() {
                let tower = td.make_tower()?;
                let chis = generic_chis(&spec, &tower);
                // grid points void of generic chi are skipped (E = F, q = 3)
                for chi in &chis {
                    for scale in grid.scales_or(&[1]) {
                        let psi = AddChar::new(&tower, scale)?;
                        for chars in all_char_data(&td, &tower, grid, "dl")
                        {
                            let rep =
                                groups::verify_dl(&td, &tower, &chars, chi, &psi, false)?;
                            if spec.kind == GroupKind::SoOdd {
                                so3_points += 1;
                                let neg = groups::verify_dl(
                                    &td, &tower, &chars, chi, &psi, true,
                                )?;
                                if !neg.pass {
                                    negative_flips += 1;
                                }
                            }
                            out.push(rep);
                        }
                    }
                }
            }
        }
    }
    // the control: at least one SO_3 point must fail without chi(2),
    // whenever the grid had SO_3 points at all
    if so3_points > 0 {
        let mut control = IdentityReport::new(
            "dl_so3_negative_control",
            params! {"flips" => negative_flips, "so3_points" => so3_points},
            C::new(negative_flips.min(1) as f64, 0.0),
            C::new(1.0, 0.0),
            1,
            grid.tol_override,
        );
        control.pass = negative_flips >= 1;
        control.abs_err = if control.pass { 0.0 } else { 1.0 };
        out.push(control);
    }
    Ok(out)
}

/// Formula-level multiplicativity: the gamma factor of a composite torus is
/// the product of the part gammas.
fn dl_mult(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5]) {
        let sp2 = GroupSpec::new(GroupKind::Sp, 2, q)?;
        for td in sp2.torus_catalog() {
            let nparts = td.lambda_plus.len() + td.lambda_minus.len();
            if nparts < 2 {
                continue;
            }
            let tower = td.make_tower()?;
            let psi = AddChar::new(&tower, grid.scales_or(&[1])[0])?;
            for chi_exp in grid.chars(tower.level_units(1), "dl_mult.chi") {
                let chi = MultChar::new(&tower, 1, chi_exp)?;
                for chars in all_char_data(&td, &tower, grid, "dl_mult") {
                    let whole = td.transfer(&tower, &chars)?;
                    let lhs = groups::gamma_from_transfer(&tower, &whole, &chi, &psi)?;
                    // product over single-part sub-data
                    let mut rhs = C::new(1.0, 0.0);
                    for (i, &lp) in td.lambda_plus.iter().enumerate() {
                        let sub = TorusDatum {
                            group: GroupSpec::new(GroupKind::Sp, lp, q)?,
                            lambda_plus: vec![lp],
                            lambda_minus: vec![],
                        };
                        let part = sub.transfer(
                            &tower,
                            &TorusCharData {
                                alphas: vec![chars.alphas[i]],
                                thetas: vec![],
                            },
                        )?;
                        rhs *= groups::gamma_from_transfer(&tower, &part, &chi, &psi)?;
                    }
                    for (i, &lm) in td.lambda_minus.iter().enumerate() {
                        let sub = TorusDatum {
                            group: GroupSpec::new(GroupKind::Sp, lm, q)?,
                            lambda_plus: vec![],
                            lambda_minus: vec![lm],
                        };
                        let part = sub.transfer(
                            &tower,
                            &TorusCharData {
                                alphas: vec![],
                                thetas: vec![chars.thetas[i]],
                            },
                        )?;
                        rhs *= groups::gamma_from_transfer(&tower, &part, &chi, &psi)?;
                    }
                    out.push(IdentityReport::new(
                        "dl_multiplicativity",
                        params! {"q" => q, "lambda_plus" => td.lambda_plus.clone(),
                                 "lambda_minus" => td.lambda_minus.clone(),
                                 "alphas" => chars.alphas.clone(), "thetas" => chars.thetas.clone(),
                                 "chi" => chi_exp},
                        lhs,
                        rhs,
                        4 * tower.n_units(),
                        grid.tol_override,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// The conjugate-dual analogue of the pairing identity (`appendix_C_dl`).
fn appendix_c_dl(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5]) {
        for spec in dl_group_list(q) {
            for td in spec.torus_catalog() {
                let tower = td.make_tower()?;
                for chi in conjugate_dual_chis(&spec, &tower) {
                    for scale in grid.scales_or(&[1]) {
                        let psi = AddChar::new(&tower, scale)?;
                        for chars in all_char_data(&td, &tower, grid, "c_dl") {
                            if let Some(rep) = groups::verify_dl_conjugate_dual(
                                &td, &tower, &chars, &chi, &psi,
                            )? {
                                out.push(rep);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Geometric-conjugacy invariance at the exponent level: the N_2 x N_2 and
/// F_{q^2}^x torus data inside Sp_4 transfer identically.
fn geom_conj(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5]) {
        let sp2 = GroupSpec::new(GroupKind::Sp, 2, q)?;
        let elliptic = TorusDatum {
            group: sp2,
            lambda_plus: vec![],
            lambda_minus: vec![1, 1],
        };
        let split = TorusDatum {
            group: sp2,
            lambda_plus: vec![2],
            lambda_minus: vec![],
        };
        let tower = elliptic.make_tower()?;
        let n2 = tower.norm_one_subgroup(1)?;
        let psi = AddChar::new(&tower, grid.scales_or(&[1])[0])?;
        for b in grid.chars(n2.order, "geom.theta") {
            let theta_prime = NormOneChar::new(&n2, b).transfer(&tower)?;
            let tc1 = elliptic.transfer(
                &tower,
                &TorusCharData {
                    alphas: vec![],
                    thetas: vec![b, b],
                },
            )?;
            let tc2 = split.transfer(
                &tower,
                &TorusCharData {
                    alphas: vec![theta_prime.exponent],
                    thetas: vec![],
                },
            )?;
            let c1 = tc1.canonical(&tower);
            let c2 = tc2.canonical(&tower);
            let exact_equal = c1 == c2;
            // gamma values from the canonical transfers, for every generic chi
            let mut gamma_equal = true;
            for chi_exp in 0..tower.level_units(1) {
                let chi = MultChar::new(&tower, 1, chi_exp)?;
                let g1 = groups::gamma_from_transfer(&tower, &tc1, &chi, &psi)?;
                let g2 = groups::gamma_from_transfer(&tower, &tc2, &chi, &psi)?;
                if g1 != g2 {
                    gamma_equal = false;
                }
            }
            let ok = exact_equal && gamma_equal;
            let mut rep = IdentityReport::new(
                "geometric_conjugacy",
                params! {"q" => q, "theta" => b,
                         "transfer_elliptic" => format!("{c1:?}"),
                         "transfer_split" => format!("{c2:?}")},
                C::new(if ok { 1.0 } else { 0.0 }, 0.0),
                C::new(1.0, 0.0),
                0,
                Some(0.0),
            );
            rep.pass = ok;
            rep.abs_err = if ok { 0.0 } else { 1.0 };
            out.push(rep);
        }
    }
    Ok(out)
}

/// Gauss-sum core invariants: unit modulus off the trivial character and
/// the `q^(-k/2)` value at it.
fn gauss_core(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    let fields: Vec<(u64, u32)> = if grid.qs.is_empty() {
        vec![(3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1), (7, 2)]
    } else {
        grid.qs_or(&[])
            .iter()
            .map(|&q| split_prime_power(q))
            .collect::<Result<_>>()?
    };
    for (p, e) in fields {
        let t = crate::ff::build_field(p, e)?;
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(&t, scale)?;
            for a in grid.chars(t.n_units(), "gauss_core.alpha") {
                let alpha = MultChar::new(&t, e, a)?;
                let v = sums::gauss(&t, &alpha, &psi)?;
                let (lhs, rhs) = if a == 0 {
                    (v, C::new(1.0 / (t.size() as f64).sqrt(), 0.0))
                } else {
                    (C::new(v.norm(), 0.0), C::new(1.0, 0.0))
                };
                out.push(IdentityReport::new(
                    "gauss_core",
                    params! {"p" => p, "e" => e, "alpha" => a, "psi_scale" => scale},
                    lhs,
                    rhs,
                    t.n_units(),
                    grid.tol_override,
                ));
            }
        }
    }
    Ok(out)
}

/// Torus Gauss sums: the direct t-sum equals the product of twisted factors
/// for every GL torus with `|T| <= 10^4`.
fn gauss_torus(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5]) {
        for k in grid.ks_or(&[1, 2, 3]) {
            for lambda in groups::partitions(k) {
                let lcm_deg = lambda.iter().fold(1u32, |a, &b| crate::ff::lcm(a, b));
                let t = base_tower(q, lcm_deg)?;
                let torus_size: u64 = lambda.iter().map(|&d| t.level_units(d)).product();
                if torus_size > 10_000 {
                    continue;
                }
                for scale in grid.scales_or(&[1]) {
                    let psi = AddChar::new(&t, scale)?;
                    for c in grid.chars(t.level_units(1), "gauss_torus.chi") {
                        let chi = MultChar::new(&t, 1, c)?;
                        // a deterministic spread of alpha tuples
                        let mut alpha_tuples = vec![vec![0u64; lambda.len()]];
                        for (i, &d) in lambda.iter().enumerate() {
                            let n = t.level_units(d);
                            let mut next = Vec::new();
                            for pre in &alpha_tuples {
                                for v in [0, 1 % n, (n / 2) % n, (n - 1) % n] {
                                    let mut row = pre.clone();
                                    row[i] = v;
                                    next.push(row);
                                }
                            }
                            alpha_tuples = next;
                        }
                        alpha_tuples.dedup();
                        for alphas in alpha_tuples {
                            let (direct, n_terms) = sums::gauss_torus_direct(
                                &t, 1, &lambda, &alphas, &chi, &psi,
                            )?;
                            let prod =
                                sums::gauss_torus_product(&t, &lambda, &alphas, &chi, &psi)?;
                            out.push(IdentityReport::new(
                                "gauss_torus_product",
                                params! {"q" => q, "lambda" => lambda.clone(),
                                         "alphas" => alphas.clone(), "chi" => c, "psi_scale" => scale},
                                direct,
                                prod,
                                n_terms,
                                grid.tol_override,
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Kondo's theorem: the brute-force operator scalar equals the signed
/// product of twisted Gauss sums, all rows and all chi.
fn kondo(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5]) {
        let tb = gl2::gl2_char_table(q)?;
        let t = &*tb.tower;
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(t, scale)?;
            for c in grid.chars(t.level_units(1), "kondo.chi") {
                let chi = MultChar::new(t, 1, c)?;
                for row in &tb.rows {
                    let lhs = tb.kondo_brute(row, &chi, &psi)?;
                    let (rhs, _) = sums::kondo_product(t, &row.support(), &chi, &psi)?;
                    out.push(IdentityReport::new(
                        "kondo",
                        params! {"q" => q, "support" => row.support(), "chi" => c, "psi_scale" => scale},
                        lhs,
                        rhs,
                        tb.order(),
                        grid.tol_override,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// The GL Jacobi formula: brute force equals the closed form, including
/// chi = 1 under the cuspidal-support hypothesis.
fn jacobi_gl(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5]) {
        let tb = gl2::gl2_char_table(q)?;
        let t = &*tb.tower;
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(t, scale)?;
            for c in grid.chars(t.level_units(1), "jacobi.chi") {
                let chi = MultChar::new(t, 1, c)?;
                for row in &tb.rows {
                    if chi.is_trivial() && row.trivial_in_support() {
                        continue;
                    }
                    let lhs = tb.jacobi_brute(row, &chi)?;
                    let rhs =
                        sums::jacobi_scalar_gl_formula(t, &row.support(), &chi, &psi)?;
                    out.push(IdentityReport::new(
                        "jacobi_gl",
                        params! {"q" => q, "support" => row.support(), "chi" => c, "psi_scale" => scale},
                        lhs,
                        rhs,
                        tb.order(),
                        grid.tol_override,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// The singular-matrix vanishing lemma over every singular 2x2 matrix.
fn singular(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for q in grid.qs_or(&[3, 5]) {
        let tb = gl2::gl2_char_table(q)?;
        let t = &*tb.tower;
        let elems: Vec<crate::ff::Elem> = t.level_elems_iter(1)?.collect();
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(t, scale)?;
            for c in grid.chars(t.level_units(1), "singular.chi") {
                if c == 0 {
                    continue;
                }
                let chi = MultChar::new(t, 1, c)?;
                for i0 in 0..elems.len() {
                    for i1 in 0..elems.len() {
                        for i2 in 0..elems.len() {
                            for i3 in 0..elems.len() {
                                let x = Mat {
                                    n: 2,
                                    a: vec![elems[i0], elems[i1], elems[i2], elems[i3]],
                                };
                                if !x.det(t).is_zero() {
                                    continue;
                                }
                                out.push(tb.verify_singular_vanishing(&x, &chi, &psi)?);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Li-Hu closed form against the Fourier-transform brute force.
fn li_hu(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    // GL_1 over all fields up to F_9
    for q in grid.qs_or(&[3, 5, 7, 9]) {
        let (p, e0) = split_prime_power(q)?;
        let t = Tower::new(p, e0, 1)?;
        for scale in grid.scales_or(&[1]) {
            let psi = AddChar::new(&t, scale)?;
            let one = MultChar::new(&t, 1, 0)?;
            for x in t.level_units_iter(1)? {
                let g = Mat::from_rows(&[&[x]]);
                let lhs = sums::kernel_li_hu(&t, 1, &g);
                let rhs = sums::jacobi_kernel_brute(&t, 1, &g, &one, &psi)?;
                out.push(IdentityReport::new(
                    "li_hu",
                    params! {"q" => q, "k" => 1, "g" => t.code_of(x), "psi_scale" => scale},
                    lhs,
                    rhs,
                    t.n_units(),
                    grid.tol_override,
                ));
            }
        }
    }
    // all 48 elements of GL_2(F_3)
    let t = Tower::new(3, 1, 1)?;
    for scale in grid.scales_or(&[1]) {
        let psi = AddChar::new(&t, scale)?;
        let one = MultChar::new(&t, 1, 0)?;
        for g in sums::enumerate_gl(&t, 1, 2)? {
            let lhs = sums::kernel_li_hu(&t, 1, &g);
            let rhs = sums::jacobi_kernel_brute(&t, 1, &g, &one, &psi)?;
            out.push(IdentityReport::new(
                "li_hu",
                params! {"q" => 3, "k" => 2,
                         "g" => g.a.iter().map(|e| t.code_of(*e)).collect::<Vec<_>>(),
                         "psi_scale" => scale},
                lhs,
                rhs,
                48,
                grid.tol_override,
            ));
        }
    }
    Ok(out)
}

/// The gl2 self-test battery: table invariants, oracle agreement across all
/// rows and characters, the Schur scalar consistency check, and the pairing
/// reduction for both tori, one report per invariant instance.
pub fn gl2_selftest(q: u64, grid: &Grid) -> Result<Vec<IdentityReport>> {
    let tb = gl2::gl2_char_table(q)?;
    let t = &*tb.tower;
    let mut out = Vec::new();

    let mut shape = IdentityReport::new(
        "gl2_table_shape",
        params! {"q" => q, "rows" => tb.rows.len(), "classes" => tb.classes.len()},
        C::new(tb.rows.iter().map(|r| (r.dim * r.dim) as f64).sum(), 0.0),
        C::new(tb.order() as f64, 0.0),
        0,
        Some(0.0),
    );
    shape.pass = shape.pass && tb.classes.len() as u64 == q * q - 1;
    out.push(shape);

    let defect = tb.row_orthonormality_defect();
    out.push(IdentityReport::new(
        "gl2_row_orthonormality",
        params! {"q" => q},
        C::new(1.0 + defect, 0.0),
        C::new(1.0, 0.0),
        tb.order(),
        grid.tol_override,
    ));

    // column orthogonality on 20 deterministic class pairs
    let ncl = tb.classes.len();
    for step in 1..=20usize {
        let i = (step * 7) % ncl;
        let j = (step * 11) % ncl;
        let mut s = C::new(0.0, 0.0);
        for r in &tb.rows {
            s += r.values[i] * r.values[j].conj();
        }
        let want = if i == j {
            C::new(tb.order() as f64 / tb.classes[i].size(q) as f64, 0.0)
        } else {
            C::new(0.0, 0.0)
        };
        out.push(IdentityReport::new(
            "gl2_column_orthogonality",
            params! {"q" => q, "c1" => i, "c2" => j},
            s,
            want,
            tb.rows.len() as u64,
            grid.tol_override,
        ));
    }

    for scale in grid.scales_or(&[1]) {
        let psi = AddChar::new(t, scale)?;
        for c in grid.chars(t.level_units(1), "selftest.chi") {
            let chi = MultChar::new(t, 1, c)?;
            for row in &tb.rows {
                let lhs = tb.kondo_brute(row, &chi, &psi)?;
                let (rhs, _) = sums::kondo_product(t, &row.support(), &chi, &psi)?;
                out.push(IdentityReport::new(
                    "gl2_kondo_oracle",
                    params! {"q" => q, "support" => row.support(), "chi" => c, "psi_scale" => scale},
                    lhs,
                    rhs,
                    tb.order(),
                    grid.tol_override,
                ));
                if !(chi.is_trivial() && row.trivial_in_support()) {
                    let lhs = tb.jacobi_brute(row, &chi)?;
                    let rhs =
                        sums::jacobi_scalar_gl_formula(t, &row.support(), &chi, &psi)?;
                    out.push(IdentityReport::new(
                        "gl2_jacobi_oracle",
                        params! {"q" => q, "support" => row.support(), "chi" => c, "psi_scale" => scale},
                        lhs,
                        rhs,
                        tb.order(),
                        grid.tol_override,
                    ));
                }
            }
        }

        // Schur scalar consistency on a deterministic spread of h
        let psi = AddChar::new(t, scale)?;
        let chi = MultChar::new(t, 1, 1 % t.level_units(1))?;
        let hs: Vec<&Mat> = tb
            .elements
            .iter()
            .map(|e| &e.m)
            .step_by((tb.order() as usize / 5).max(1))
            .take(4)
            .collect();
        for (ri, row) in tb.rows.iter().enumerate().step_by(2) {
            let defect = tb.kondo_scalar_defect(row, &chi, &psi, &hs)?;
            out.push(IdentityReport::new(
                "gl2_kondo_scalar",
                params! {"q" => q, "row" => ri, "psi_scale" => scale},
                C::new(1.0 + defect, 0.0),
                C::new(1.0, 0.0),
                tb.order() * hs.len() as u64,
                grid.tol_override,
            ));
        }

        // the pairing reduction for both tori and both test functions;
        // J_chi depends only on the semisimple part for chi != 1 only
        let n1 = t.level_units(1);
        let n2 = t.level_units(2);
        let chi1 = MultChar::new(t, 1, 1 % n1)?;
        for f in [Gl2TestFn::ChiDet(chi1), Gl2TestFn::JacobiKernel(chi1)] {
            out.push(gl2::dl_pairing_check_gl2(
                &tb,
                Gl2Torus::Split { a1: 0, a2: 1 },
                f,
            )?);
            out.push(gl2::dl_pairing_check_gl2(
                &tb,
                Gl2Torus::Split { a1: 1, a2: 1 },
                f,
            )?);
            out.push(gl2::dl_pairing_check_gl2(
                &tb,
                Gl2Torus::Elliptic { beta: 1 },
                f,
            )?);
            out.push(gl2::dl_pairing_check_gl2(
                &tb,
                Gl2Torus::Elliptic { beta: (n2 / 2) + 1 },
                f,
            )?);
        }
    }
    Ok(out)
}

/// Enumeration sizes against the order formulas, with form preservation and
/// the filter cross-check where feasible.
fn enumeration(grid: &Grid) -> Result<Vec<IdentityReport>> {
    let specs: Vec<GroupSpec> = if grid.qs.is_empty() {
        vec![
            GroupSpec::new(GroupKind::Sp, 1, 3)?,
            GroupSpec::new(GroupKind::Sp, 1, 5)?,
            GroupSpec::new(GroupKind::Sp, 1, 7)?,
            GroupSpec::new(GroupKind::Sp, 2, 3)?,
            GroupSpec::new(GroupKind::U, 2, 3)?,
            GroupSpec::new(GroupKind::SoOdd, 1, 3)?,
            GroupSpec::new(GroupKind::SoOdd, 1, 5)?,
            GroupSpec::new(GroupKind::Gl, 2, 3)?,
            GroupSpec::new(GroupKind::Gl, 2, 5)?,
            GroupSpec::new(GroupKind::GSp, 1, 3)?,
        ]
    } else {
        let mut v = Vec::new();
        for q in grid.qs_or(&[]) {
            v.push(GroupSpec::new(GroupKind::Sp, 1, q)?);
        }
        v
    };
    let mut out = Vec::new();
    for spec in specs {
        let tower = Tower::new(spec.p, spec.e0, spec.matrix_rel_deg())?;
        let en = enumerate_group(&spec, &tower)?;
        let mut rep = IdentityReport::new(
            "enumeration_order",
            params! {"group" => spec.kind.name(), "n" => spec.n, "q" => spec.q()},
            C::new(en.elements.len() as f64, 0.0),
            C::new(spec.order() as f64, 0.0),
            0,
            Some(0.0),
        );
        // form preservation across all elements
        let preserved = en
            .elements
            .iter()
            .all(|g| spec.is_member(&tower, g));
        if !preserved {
            rep.pass = false;
            rep.abs_err = 1.0;
        }
        out.push(rep);

        // filter cross-check for the small matrix spaces
        if let Ok(filtered) = groups::filter_from_gl(&spec, &tower) {
            let mut keys: Vec<Vec<u32>> = filtered.iter().map(|m| m.key()).collect();
            keys.sort_unstable();
            let mut enum_keys: Vec<Vec<u32>> = en.elements.iter().map(|m| m.key()).collect();
            enum_keys.sort_unstable();
            let mut rep = IdentityReport::new(
                "enumeration_filter_match",
                params! {"group" => spec.kind.name(), "n" => spec.n, "q" => spec.q()},
                C::new(filtered.len() as f64, 0.0),
                C::new(en.elements.len() as f64, 0.0),
                0,
                Some(0.0),
            );
            rep.pass = rep.pass && keys == enum_keys;
            if !rep.pass {
                rep.abs_err = 1.0;
            }
            out.push(rep);
        }
    }
    Ok(out)
}
