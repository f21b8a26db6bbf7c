//! Additive and multiplicative characters, conjugate-dual predicates, and
//! the functorial transfer of torus characters to general linear groups.
//!
//! Character equality is always decided on integer exponents; complex values
//! only appear when a character is evaluated inside a sum.

use crate::error::{Error, Result};
use crate::ff::{Elem, NormOneGroup, Tower};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// `psi_c(x) = exp(2*pi*i * c * Tr_{field/F_p}(x) / p)`, `c` a unit mod p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AddChar {
    pub scale: u64,
}

impl AddChar {
    pub fn new(tower: &Tower, scale: u64) -> Result<AddChar> {
        if scale % tower.p() == 0 {
            return Err(Error::TrivialPsi);
        }
        Ok(AddChar {
            scale: scale % tower.p(),
        })
    }

    /// Value at an element of the degree-`level` subfield: the trace is
    /// taken from that subfield, so `psi_k = psi o Tr` comes out right at
    /// every level of the tower.
    pub fn eval(&self, tower: &Tower, x: Elem, level: u32) -> Result<Complex64> {
        let t = (self.scale * tower.trace_to_prime_from(x, level)?) % tower.p();
        Ok(Complex64::from_polar(
            1.0,
            TAU * t as f64 / tower.p() as f64,
        ))
    }
}

/// A character of the degree-`level` subfield's units:
/// `chi(g_level^j) = exp(2*pi*i * exponent * j / (q^level - 1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultChar {
    pub level: u32,
    pub exponent: u64,
}

impl MultChar {
    pub fn new(tower: &Tower, level: u32, exponent: u64) -> Result<MultChar> {
        tower.level_index(level)?;
        Ok(MultChar {
            level,
            exponent: exponent % tower.level_units(level),
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.exponent == 0
    }

    pub fn order(&self, tower: &Tower) -> u64 {
        let n = tower.level_units(self.level);
        n / gcd_u64(n, self.exponent)
    }

    /// Evaluation; rejects zero.
    pub fn eval(&self, tower: &Tower, x: Elem) -> Result<Complex64> {
        let j = tower.level_log(x, self.level)?;
        let n = tower.level_units(self.level);
        let t = mul_mod(self.exponent, j, n);
        Ok(Complex64::from_polar(1.0, TAU * t as f64 / n as f64))
    }

    pub fn inverse(&self, tower: &Tower) -> MultChar {
        let n = tower.level_units(self.level);
        MultChar {
            level: self.level,
            exponent: (n - self.exponent) % n,
        }
    }

    pub fn mul(&self, other: &MultChar, tower: &Tower) -> Result<MultChar> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                got: other.level,
            });
        }
        let n = tower.level_units(self.level);
        Ok(MultChar {
            level: self.level,
            exponent: (self.exponent + other.exponent) % n,
        })
    }

    /// `chi^sigma` with `sigma` the Frobenius over the degree-`over` subfield.
    pub fn frobenius(&self, tower: &Tower, over: u32) -> MultChar {
        let n = tower.level_units(self.level);
        MultChar {
            level: self.level,
            exponent: mul_mod(self.exponent, tower.level_size(over) % n, n),
        }
    }

    /// `chi_bar = chi^{-sigma}`, i.e. `chi_bar(x) = chi^{-1}(x^sigma)`.
    pub fn conj_dual(&self, tower: &Tower, over: u32) -> MultChar {
        self.frobenius(tower, over).inverse(tower)
    }

    /// `chi^{1+sigma}`, `chi^{1+sigma}(x) = chi(x * x^sigma)`.
    pub fn sigma_plus_one(&self, tower: &Tower, over: u32) -> MultChar {
        let n = tower.level_units(self.level);
        let f = self.frobenius(tower, over);
        MultChar {
            level: self.level,
            exponent: (self.exponent + f.exponent) % n,
        }
    }

    /// Conjugate-dual: `chi^{1+sigma} = 1`.
    pub fn is_conjugate_dual(&self, tower: &Tower, over: u32) -> bool {
        self.sigma_plus_one(tower, over).is_trivial()
    }

    /// Regular: the Frobenius orbit over the degree-`over` base has full
    /// size `level / over`.
    pub fn is_regular(&self, tower: &Tower, over: u32) -> bool {
        let n = tower.level_units(self.level);
        let q = tower.level_size(over) % n;
        let k = self.level / over;
        let mut a = self.exponent;
        for step in 1..=k {
            a = mul_mod(a, q, n);
            if a == self.exponent {
                return step == k;
            }
        }
        false
    }

    /// `chi o N_{from/level}`, a character of the degree-`from` subfield.
    pub fn compose_norm(&self, tower: &Tower, from: u32) -> Result<MultChar> {
        if from % self.level != 0 {
            return Err(Error::BadDegree(self.level, from));
        }
        let u = tower.level_units(from) / tower.level_units(self.level);
        let n = tower.level_units(from);
        Ok(MultChar {
            level: from,
            exponent: mul_mod(self.exponent, u % n, n),
        })
    }

    /// Restriction to the units of the degree-`to` subfield.
    pub fn restrict(&self, tower: &Tower, to: u32) -> Result<MultChar> {
        if self.level % to != 0 {
            return Err(Error::BadDegree(to, self.level));
        }
        Ok(MultChar {
            level: to,
            exponent: self.exponent % tower.level_units(to),
        })
    }

    /// Canonical orbit representative under `exponent -> exponent * q^over`.
    pub fn orbit_min(&self, tower: &Tower, over: u32) -> u64 {
        let n = tower.level_units(self.level);
        let q = tower.level_size(over) % n;
        let mut best = self.exponent;
        let mut a = self.exponent;
        loop {
            a = mul_mod(a, q, n);
            if a == self.exponent {
                return best;
            }
            best = best.min(a);
        }
    }
}

/// A character of the norm-one group `N_{2m}`, exponent relative to the
/// canonical generator `g_{2m}^(q^m - 1)` of the cyclic group of order
/// `q^m + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormOneChar {
    pub m: u32,
    pub exponent: u64,
}

impl NormOneChar {
    pub fn new(group: &NormOneGroup, exponent: u64) -> NormOneChar {
        NormOneChar {
            m: group.m,
            exponent: exponent % group.order,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.exponent == 0
    }

    /// Value at the `j`-th power of the group generator.
    pub fn eval_power(&self, group: &NormOneGroup, j: u64) -> Complex64 {
        let t = mul_mod(self.exponent, j % group.order, group.order);
        Complex64::from_polar(1.0, TAU * t as f64 / group.order as f64)
    }

    pub fn eval(&self, tower: &Tower, group: &NormOneGroup, x: Elem) -> Result<Complex64> {
        let j = group.log(x, tower)?;
        Ok(self.eval_power(group, j))
    }

    /// Hilbert-90 transfer: `theta_hat(x) = theta(x^(1-q^m))` on `F_{q^2m}^x`.
    ///
    /// On exponents: `theta_hat = -b * (q^m - 1) mod (q^2m - 1)`.
    pub fn transfer(&self, tower: &Tower) -> Result<MultChar> {
        let level = 2 * self.m;
        let big = tower.level_units(level);
        let qm = tower.level_size(self.m);
        let e = mul_mod(self.exponent, qm - 1, big);
        Ok(MultChar {
            level,
            exponent: (big - e) % big,
        })
    }
}

/// σ-twists and duality predicates of one character, bundled for reports.
#[derive(Clone, Copy, Debug)]
pub struct ConjOps {
    pub chi_sigma: MultChar,
    pub chi_bar: MultChar,
    pub chi_one_plus_sigma: MultChar,
    pub is_conjugate_dual: bool,
    pub is_regular: bool,
}

/// All σ-operations of `chi` relative to the degree-`over` base subfield.
pub fn conj_ops(chi: &MultChar, tower: &Tower, over: u32) -> Result<ConjOps> {
    if chi.level % over != 0 {
        return Err(Error::BadDegree(over, chi.level));
    }
    Ok(ConjOps {
        chi_sigma: chi.frobenius(tower, over),
        chi_bar: chi.conj_dual(tower, over),
        chi_one_plus_sigma: chi.sigma_plus_one(tower, over),
        is_conjugate_dual: chi.is_conjugate_dual(tower, over),
        is_regular: chi.is_regular(tower, over),
    })
}

/// Character data of a torus indexed by a partition pair: one character per
/// split part (on `F_{q^lambda_j^+}^x`) and per elliptic part (on `N_{2 lambda_i^-}`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusCharData {
    pub alphas: Vec<u64>,
    pub thetas: Vec<u64>,
}

/// The transferred pair on a torus of `GL_k(E)`: each component is a
/// character of one part field, given by (degree over F, exponent).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferredChar {
    pub e_deg: u32,
    pub components: Vec<(u32, u64)>,
}

impl TransferredChar {
    /// Exponent data up to the Frobenius of `E` on each component, sorted.
    /// Two torus data with the same transfer have identical canonical forms.
    pub fn canonical(&self, tower: &Tower) -> Vec<(u32, u64)> {
        let mut out: Vec<(u32, u64)> = self
            .components
            .iter()
            .map(|&(deg, exp)| {
                let chi = MultChar {
                    level: deg,
                    exponent: exp,
                };
                (deg, chi.orbit_min(tower, self.e_deg))
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Functorial transfer of a torus character: split parts `alpha_j` map to the
/// pair `(alpha_j, alpha_j^{-sigma})`, elliptic parts via Hilbert 90.
///
/// `lambda_plus`/`lambda_minus` are in F-degrees; `e_deg` is `[E:F]`.
pub fn transfer_torus_char(
    tower: &Tower,
    e_deg: u32,
    lambda_plus: &[u32],
    lambda_minus: &[u32],
    chars: &TorusCharData,
) -> Result<TransferredChar> {
    if chars.alphas.len() != lambda_plus.len() || chars.thetas.len() != lambda_minus.len() {
        return Err(Error::IncompleteDatum(format!(
            "need {} split and {} elliptic characters, got {} and {}",
            lambda_plus.len(),
            lambda_minus.len(),
            chars.alphas.len(),
            chars.thetas.len()
        )));
    }
    let mut components = Vec::new();
    for (&lp, &a) in lambda_plus.iter().zip(&chars.alphas) {
        let alpha = MultChar::new(tower, lp, a)?;
        // sigma is the E/F involution: trivial when E = F, the q-power otherwise
        let abar = if e_deg == 1 {
            alpha.inverse(tower)
        } else {
            alpha.conj_dual(tower, 1)
        };
        components.push((lp, alpha.exponent));
        components.push((lp, abar.exponent));
    }
    for (&lm, &b) in lambda_minus.iter().zip(&chars.thetas) {
        let group = tower.norm_one_subgroup(lm)?;
        let theta = NormOneChar::new(&group, b);
        let hat = theta.transfer(tower)?;
        components.push((2 * lm, hat.exponent));
    }
    Ok(TransferredChar { e_deg, components })
}

pub(crate) fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub(crate) fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::build_field;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn mult_char_values_f5() {
        let f5 = build_field(5, 1).unwrap();
        let chi = MultChar::new(&f5, 1, 1).unwrap();
        let i = Complex64::new(0.0, 1.0);
        assert!(close(chi.eval(&f5, f5.from_int(2)).unwrap(), i));
        assert!(close(chi.eval(&f5, f5.from_int(4)).unwrap(), -Complex64::ONE));
        assert!(close(chi.eval(&f5, f5.from_int(3)).unwrap(), -i));
        assert_eq!(chi.eval(&f5, Elem::Zero).unwrap_err(), Error::EvalAtZero);
    }

    #[test]
    fn trivial_char_is_one() {
        let f5 = build_field(5, 1).unwrap();
        let chi = MultChar::new(&f5, 1, 0).unwrap();
        for x in f5.level_units_iter(1).unwrap() {
            assert!(close(chi.eval(&f5, x).unwrap(), Complex64::ONE));
        }
    }

    #[test]
    fn quadratic_char_kernel_is_squares() {
        let f9 = build_field(3, 2).unwrap();
        let chi = MultChar::new(&f9, 2, 4).unwrap();
        assert!(close(chi.eval(&f9, f9.gen()).unwrap(), -Complex64::ONE));
        for x in f9.level_units_iter(2).unwrap() {
            let v = chi.eval(&f9, x).unwrap();
            let Elem::Log(j) = x else { unreachable!() };
            if j % 2 == 0 {
                assert!(close(v, Complex64::ONE));
            } else {
                assert!(close(v, -Complex64::ONE));
            }
        }
    }

    #[test]
    fn multiplicativity_exhaustive_small_fields() {
        // every character of every field up to F_49, all pairs
        for (p, e) in [(3u64, 1u32), (3, 2), (5, 1), (5, 2), (7, 1), (7, 2), (3, 3)] {
            let t = build_field(p, e).unwrap();
            for a in 0..t.level_units(e) {
                let chi = MultChar::new(&t, e, a).unwrap();
                for x in t.level_units_iter(e).unwrap() {
                    for y in t.level_units_iter(e).unwrap() {
                        let lhs = chi.eval(&t, t.mul(x, y)).unwrap();
                        let rhs = chi.eval(&t, x).unwrap() * chi.eval(&t, y).unwrap();
                        assert!((lhs - rhs).norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn add_char_is_additive_and_nontrivial() {
        for (p, e) in [(3u64, 2u32), (5, 1), (7, 1), (3, 1)] {
            let t = build_field(p, e).unwrap();
            for c in 1..p {
                let psi = AddChar::new(&t, c).unwrap();
                let mut any_nontrivial = false;
                for x in t.level_elems_iter(e).unwrap() {
                    if (psi.eval(&t, x, e).unwrap() - Complex64::ONE).norm() > 1e-9 {
                        any_nontrivial = true;
                    }
                    for y in t.level_elems_iter(e).unwrap() {
                        let lhs = psi.eval(&t, t.add(x, y), e).unwrap();
                        let rhs = psi.eval(&t, x, e).unwrap() * psi.eval(&t, y, e).unwrap();
                        assert!((lhs - rhs).norm() < 1e-9);
                    }
                }
                assert!(any_nontrivial);
            }
        }
        let f3 = build_field(3, 1).unwrap();
        assert_eq!(AddChar::new(&f3, 0).unwrap_err(), Error::TrivialPsi);
        assert_eq!(AddChar::new(&f3, 3).unwrap_err(), Error::TrivialPsi);
    }

    #[test]
    fn add_char_consistent_across_levels() {
        // psi on the base evaluated inside a bigger tower agrees with psi
        // on the standalone base field
        let big = crate::ff::Tower::new(3, 1, 3).unwrap();
        let base = build_field(3, 1).unwrap();
        let psi_big = AddChar::new(&big, 1).unwrap();
        let psi_base = AddChar::new(&base, 1).unwrap();
        for c in 0..3u64 {
            let lhs = psi_big.eval(&big, big.from_int(c), 1).unwrap();
            let rhs = psi_base.eval(&base, base.from_int(c), 1).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugate_dual_predicate() {
        let f9 = build_field(3, 2).unwrap();
        // a = 1: 1*(1+3) = 4 != 0 mod 8
        let chi1 = MultChar::new(&f9, 2, 1).unwrap();
        assert!(!chi1.is_conjugate_dual(&f9, 1));
        // a = 2: 2*(1+3) = 8 = 0 mod 8
        let chi2 = MultChar::new(&f9, 2, 2).unwrap();
        assert!(chi2.is_conjugate_dual(&f9, 1));
        // predicate agrees with exhaustive evaluation of chi^{1+sigma}
        for a in 0..8 {
            let chi = MultChar::new(&f9, 2, a).unwrap();
            let cps = chi.sigma_plus_one(&f9, 1);
            let all_one = f9
                .level_units_iter(2)
                .unwrap()
                .all(|x| (cps.eval(&f9, x).unwrap() - Complex64::ONE).norm() < 1e-9);
            assert_eq!(chi.is_conjugate_dual(&f9, 1), all_one, "a = {a}");
            // direct product definition chi(x * x^sigma)
            for x in f9.level_units_iter(2).unwrap() {
                let xxs = f9.mul(x, f9.frobenius(x, 1));
                let lhs = cps.eval(&f9, x).unwrap();
                let rhs = chi.eval(&f9, xxs).unwrap();
                assert!((lhs - rhs).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn regularity_by_orbit() {
        let f9 = build_field(3, 2).unwrap();
        let chi = MultChar::new(&f9, 2, 3).unwrap();
        assert!(chi.is_regular(&f9, 1), "orbit {{3, 1}} has size 2");
        let chi4 = MultChar::new(&f9, 2, 4).unwrap();
        assert!(!chi4.is_regular(&f9, 1), "4*3 = 12 = 4 mod 8 is fixed");
        // regular characters of F_{q^2} over F_q are exactly those with
        // a*q != a mod q^2-1
        for a in 0..8u64 {
            let chi = MultChar::new(&f9, 2, a).unwrap();
            assert_eq!(chi.is_regular(&f9, 1), (a * 3) % 8 != a);
        }
    }

    #[test]
    fn transfer_theta_examples() {
        let f9 = build_field(3, 2).unwrap();
        let n2 = f9.norm_one_subgroup(1).unwrap();
        // theta(gamma^2) = i, i.e. exponent 1 on the order-4 group
        let theta = NormOneChar::new(&n2, 1);
        let hat = theta.transfer(&f9).unwrap();
        assert_eq!(hat.exponent, 6, "theta_hat(gamma) = theta(gamma^-2) = -i");
        // trivial transfers to trivial
        assert!(NormOneChar::new(&n2, 0).transfer(&f9).unwrap().is_trivial());
        // theta_hat restricted to F_q^x is trivial (Hilbert-90 kernel)
        for b in 0..4 {
            let hat = NormOneChar::new(&n2, b).transfer(&f9).unwrap();
            for x in f9.level_units_iter(1).unwrap() {
                assert!((hat.eval(&f9, x).unwrap() - Complex64::ONE).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn transfer_theta_matches_direct_evaluation() {
        for (p, e0, m) in [(3u64, 1u32, 1u32), (5, 1, 1), (3, 1, 2), (7, 1, 1)] {
            let t = crate::ff::Tower::new(p, e0, 2 * m).unwrap();
            let group = t.norm_one_subgroup(m).unwrap();
            let qm = t.level_size(m);
            for b in 0..group.order {
                let theta = NormOneChar::new(&group, b);
                let hat = theta.transfer(&t).unwrap();
                // theta_hat^{-sigma} = theta_hat at the exponent level
                let hat_dual = hat.conj_dual(&t, m);
                assert_eq!(hat.exponent, hat_dual.exponent);
                // direct evaluation at every unit x: hat(x) = theta(x^{1-q^m})
                for x in t.level_units_iter(2 * m).unwrap() {
                    let y = t.mul(x, t.inv(t.pow(x, qm as i64)).unwrap());
                    let lhs = hat.eval(&t, x).unwrap();
                    let rhs = theta.eval(&t, &group, y).unwrap();
                    assert!((lhs - rhs).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn transfer_split_part() {
        let f5 = build_field(5, 1).unwrap();
        for a in 0..4 {
            let tc = transfer_torus_char(
                &f5,
                1,
                &[1],
                &[],
                &TorusCharData {
                    alphas: vec![a],
                    thetas: vec![],
                },
            )
            .unwrap();
            assert_eq!(tc.components, vec![(1, a), (1, (4 - a) % 4)]);
        }
    }

    #[test]
    fn transfer_elliptic_part() {
        let f9 = build_field(3, 2).unwrap();
        let tc = transfer_torus_char(
            &f9,
            1,
            &[],
            &[1],
            &TorusCharData {
                alphas: vec![],
                thetas: vec![1],
            },
        )
        .unwrap();
        assert_eq!(tc.components, vec![(2, 6)]);
    }

    #[test]
    fn geometric_conjugacy_example_sp4() {
        // (N_2 x N_2, theta x theta) vs (F_{q^2}^x, theta') with
        // theta'(x) = theta(x^{1-q}): identical canonical transfers.
        for q in [3u64, 5] {
            let t = build_field(q, 2).unwrap();
            let n2 = t.norm_one_subgroup(1).unwrap();
            for b in 0..n2.order {
                let elliptic = transfer_torus_char(
                    &t,
                    1,
                    &[],
                    &[1, 1],
                    &TorusCharData {
                        alphas: vec![],
                        thetas: vec![b, b],
                    },
                )
                .unwrap();
                let theta_prime = NormOneChar::new(&n2, b).transfer(&t).unwrap();
                let split = transfer_torus_char(
                    &t,
                    1,
                    &[2],
                    &[],
                    &TorusCharData {
                        alphas: vec![theta_prime.exponent],
                        thetas: vec![],
                    },
                )
                .unwrap();
                assert_eq!(elliptic.canonical(&t), split.canonical(&t), "q={q} b={b}");
            }
        }
    }

    #[test]
    fn incomplete_datum_rejected() {
        let f5 = build_field(5, 1).unwrap();
        let err = transfer_torus_char(
            &f5,
            1,
            &[1],
            &[],
            &TorusCharData {
                alphas: vec![],
                thetas: vec![],
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::IncompleteDatum(_)));
    }
}
