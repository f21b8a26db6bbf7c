//! Classical and similitude group specifications: forms, order formulas,
//! generator-closure enumeration, the torus catalog, and the
//! Deligne-Lusztig-level pairing identity (direct torus sum against the
//! transferred Gauss-sum closed form).

use crate::chars::{AddChar, MultChar, NormOneChar, TorusCharData, TransferredChar};
use crate::error::{Error, Result};
use crate::ff::{lcm, Elem, Tower};
use crate::mat::Mat;
use crate::report::IdentityReport;
use crate::sums::{self, C};
use crate::{params, sums::kernel_on_torus};
use std::collections::HashSet;
use std::sync::Arc;

pub const ENUM_BOUND: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Gl,
    U,
    Sp,
    SoOdd,
    SoPlus,
    SoMinus,
    GSp,
    GSoPlus,
    GSoMinus,
}

impl GroupKind {
    pub fn name(&self) -> &'static str {
        match self {
            GroupKind::Gl => "GL",
            GroupKind::U => "U",
            GroupKind::Sp => "Sp",
            GroupKind::SoOdd => "SO_odd",
            GroupKind::SoPlus => "SO+",
            GroupKind::SoMinus => "SO-",
            GroupKind::GSp => "GSp",
            GroupKind::GSoPlus => "GSO+",
            GroupKind::GSoMinus => "GSO-",
        }
    }

    pub fn parse(s: &str) -> Result<GroupKind> {
        Ok(match s {
            "GL" | "gl" => GroupKind::Gl,
            "U" | "u" => GroupKind::U,
            "Sp" | "sp" => GroupKind::Sp,
            "SO_odd" | "SOodd" | "so-odd" | "SO" => GroupKind::SoOdd,
            "SO+" | "so+" => GroupKind::SoPlus,
            "SO-" | "so-" => GroupKind::SoMinus,
            "GSp" | "gsp" => GroupKind::GSp,
            "GSO+" | "gso+" => GroupKind::GSoPlus,
            "GSO-" | "gso-" => GroupKind::GSoMinus,
            other => return Err(Error::UnsupportedParams(format!("group type `{other}`"))),
        })
    }

    pub fn is_similitude(&self) -> bool {
        matches!(
            self,
            GroupKind::GSp | GroupKind::GSoPlus | GroupKind::GSoMinus
        )
    }
}

/// A group over the base field `F_q`, `q = p^e0`; `n` is the rank parameter
/// (`Sp_2n`, `SO_2n+1`, `SO±_2n`, and matrix size for `GL_n` / `U_n`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub n: u32,
    pub p: u64,
    pub e0: u32,
}

impl GroupSpec {
    pub fn new(kind: GroupKind, n: u32, q: u64) -> Result<GroupSpec> {
        let (p, e0) = split_prime_power(q)?;
        if n == 0 {
            return Err(Error::UnsupportedParams("n must be positive".into()));
        }
        Ok(GroupSpec { kind, n, p, e0 })
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.e0)
    }

    /// `[E:F]`: 2 for unitary groups, 1 otherwise.
    pub fn e_deg(&self) -> u32 {
        if self.kind == GroupKind::U {
            2
        } else {
            1
        }
    }

    /// Dimension of `V` over `E`.
    pub fn dim_v(&self) -> u32 {
        match self.kind {
            GroupKind::Gl | GroupKind::U => self.n,
            GroupKind::Sp | GroupKind::SoPlus | GroupKind::SoMinus => 2 * self.n,
            GroupKind::SoOdd => 2 * self.n + 1,
            GroupKind::GSp | GroupKind::GSoPlus | GroupKind::GSoMinus => 2 * self.n,
        }
    }

    /// Dimension of `V` over `F`.
    pub fn dim_v_over_f(&self) -> u32 {
        self.dim_v() * self.e_deg()
    }

    pub fn order(&self) -> u64 {
        let q = self.q() as u128;
        let n = self.n;
        let v: u128 = match self.kind {
            GroupKind::Gl => {
                let mut o = q.pow(n * (n - 1) / 2);
                for i in 1..=n {
                    o *= q.pow(i) - 1;
                }
                o
            }
            GroupKind::U => {
                let mut o = q.pow(n * (n - 1) / 2);
                for i in 1..=n {
                    let qi = q.pow(i);
                    o *= if i % 2 == 0 { qi - 1 } else { qi + 1 };
                }
                o
            }
            GroupKind::Sp | GroupKind::SoOdd => {
                let mut o = q.pow(n * n);
                for i in 1..=n {
                    o *= q.pow(2 * i) - 1;
                }
                o
            }
            GroupKind::SoPlus | GroupKind::SoMinus => {
                let mut o = q.pow(n * (n - 1));
                o *= if self.kind == GroupKind::SoPlus {
                    q.pow(n) - 1
                } else {
                    q.pow(n) + 1
                };
                for i in 1..n {
                    o *= q.pow(2 * i) - 1;
                }
                o
            }
            GroupKind::GSp => {
                (q - 1)
                    * GroupSpec {
                        kind: GroupKind::Sp,
                        ..*self
                    }
                    .order() as u128
            }
            GroupKind::GSoPlus => {
                (q - 1)
                    * GroupSpec {
                        kind: GroupKind::SoPlus,
                        ..*self
                    }
                    .order() as u128
            }
            GroupKind::GSoMinus => {
                (q - 1)
                    * GroupSpec {
                        kind: GroupKind::SoMinus,
                        ..*self
                    }
                    .order() as u128
            }
        };
        u64::try_from(v).expect("order fits u64 at desk scale")
    }

    /// The full power of p dividing the order.
    pub fn p_part(&self) -> u64 {
        let q = self.q() as u128;
        let n = self.n;
        let v = match self.kind {
            GroupKind::Gl | GroupKind::U => q.pow(n * (n - 1) / 2),
            GroupKind::Sp | GroupKind::SoOdd | GroupKind::GSp => q.pow(n * n),
            GroupKind::SoPlus | GroupKind::SoMinus | GroupKind::GSoPlus | GroupKind::GSoMinus => {
                q.pow(n * (n - 1))
            }
        };
        u64::try_from(v).expect("p-part fits u64")
    }

    /// `|g| = |H|_p^2 * q^floor(dim_F V / 2)` for the isometry Lie algebra;
    /// the full matrix algebra for GL.
    pub fn lie_algebra_size(&self) -> u64 {
        let q = self.q() as u128;
        let v = match self.kind {
            GroupKind::Gl => q.pow(self.n * self.n),
            _ => {
                let pp = self.p_part() as u128;
                pp * pp * q.pow(self.dim_v_over_f() / 2)
            }
        };
        u64::try_from(v).expect("lie algebra size fits u64")
    }

    pub fn rel_rank(&self) -> u32 {
        match self.kind {
            GroupKind::Gl => self.n,
            GroupKind::U => self.n / 2,
            GroupKind::Sp | GroupKind::SoOdd | GroupKind::SoPlus => self.n,
            GroupKind::SoMinus => self.n - 1,
            GroupKind::GSp | GroupKind::GSoPlus => self.n + 1,
            GroupKind::GSoMinus => self.n,
        }
    }

    /// Relative rank of the classical (isometry) part; used by `c_V`.
    pub fn rel_rank_classical(&self) -> u32 {
        match self.kind {
            GroupKind::GSp => self.n,
            GroupKind::GSoPlus => self.n,
            GroupKind::GSoMinus => self.n - 1,
            _ => self.rel_rank(),
        }
    }

    pub fn epsilon(&self) -> i64 {
        if self.rel_rank() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Tower degree (over the base) needed to host the group's matrices.
    pub fn matrix_rel_deg(&self) -> u32 {
        match self.kind {
            GroupKind::U => 2,
            GroupKind::SoMinus | GroupKind::GSoMinus => 2,
            _ => 1,
        }
    }

    /// The form matrix over the tower (None for GL).
    pub fn form_matrix(&self, tower: &Tower) -> Option<Mat> {
        let n = self.n as usize;
        match self.kind {
            GroupKind::Gl => None,
            GroupKind::U => Some(antidiag_ones(self.dim_v() as usize)),
            GroupKind::SoOdd => Some(antidiag_ones(2 * n + 1)),
            GroupKind::SoPlus | GroupKind::GSoPlus => Some(antidiag_ones(2 * n)),
            GroupKind::Sp | GroupKind::GSp => {
                let mut j = Mat::zero(2 * n);
                for i in 0..n {
                    j.set(i, 2 * n - 1 - i, Elem::Log(0));
                    j.set(n + i, n - 1 - i, tower.neg(Elem::Log(0)));
                }
                Some(j)
            }
            GroupKind::SoMinus | GroupKind::GSoMinus => {
                let d = tower.level_gen(1).expect("level 1 exists");
                let mut b = antidiag_ones(2 * n);
                // middle 2x2 of B_{n,d} w: rows n-1, n
                b.set(n - 1, n, Elem::Zero);
                b.set(n - 1, n - 1, Elem::Log(0));
                b.set(n, n - 1, Elem::Zero);
                b.set(n, n, tower.neg(d));
                Some(b)
            }
        }
    }

    /// Membership test against the defining equations.
    pub fn is_member(&self, tower: &Tower, g: &Mat) -> bool {
        if g.det(tower).is_zero() {
            return false;
        }
        match self.kind {
            GroupKind::Gl => true,
            GroupKind::U => {
                let w = self.form_matrix(tower).unwrap();
                g.frobenius(tower, 1).transpose().mul(&w, tower).mul(g, tower) == w
            }
            GroupKind::Sp => {
                let j = self.form_matrix(tower).unwrap();
                g.transpose().mul(&j, tower).mul(g, tower) == j
            }
            GroupKind::SoOdd | GroupKind::SoPlus | GroupKind::SoMinus => {
                let w = self.form_matrix(tower).unwrap();
                g.transpose().mul(&w, tower).mul(g, tower) == w && g.det(tower) == tower.one()
            }
            GroupKind::GSp => self.similitude_factor(tower, g).is_some(),
            GroupKind::GSoPlus | GroupKind::GSoMinus => {
                match self.similitude_factor(tower, g) {
                    None => false,
                    Some(mu) => g.det(tower) == tower.pow(mu, self.n as i64),
                }
            }
        }
    }

    /// The similitude factor `mu(g)` with `g^T J g = mu J`, if any.
    pub fn similitude_factor(&self, tower: &Tower, g: &Mat) -> Option<Elem> {
        let j = self.form_matrix(tower)?;
        let prod = g.transpose().mul(&j, tower).mul(g, tower);
        let (mut mu, mut at) = (Elem::Zero, usize::MAX);
        for (i, &e) in j.a.iter().enumerate() {
            if !e.is_zero() {
                if prod.a[i].is_zero() {
                    return None;
                }
                mu = tower.mul(prod.a[i], tower.inv(e).ok()?);
                at = i;
                break;
            }
        }
        if at == usize::MAX {
            return None;
        }
        if prod == j.scale(mu, tower) {
            Some(mu)
        } else {
            None
        }
    }

    /// All maximal-torus data `(lambda+, lambda-)` for this group.
    pub fn torus_catalog(&self) -> Vec<TorusDatum> {
        let n = self.n;
        let mut out = Vec::new();
        for j in (0..=n).rev() {
            for lp in partitions(j) {
                for lm in partitions(n - j) {
                    let ok = match self.kind {
                        GroupKind::Gl => lm.is_empty(),
                        GroupKind::U => {
                            lp.iter().all(|&x| x % 2 == 0) && lm.iter().all(|&x| x % 2 == 1)
                        }
                        GroupKind::Sp | GroupKind::SoOdd | GroupKind::GSp => true,
                        GroupKind::SoPlus | GroupKind::GSoPlus => lm.len() % 2 == 0,
                        GroupKind::SoMinus | GroupKind::GSoMinus => lm.len() % 2 == 1,
                    };
                    if ok {
                        out.push(TorusDatum {
                            group: *self,
                            lambda_plus: lp.clone(),
                            lambda_minus: lm.clone(),
                        });
                    }
                }
            }
        }
        out
    }
}

/// A maximal rational torus indexed by a partition pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusDatum {
    pub group: GroupSpec,
    pub lambda_plus: Vec<u32>,
    pub lambda_minus: Vec<u32>,
}

impl TorusDatum {
    /// `|T^F|`: with the extra `(q-1)` similitude-factor fiber for G-types.
    pub fn torus_order(&self) -> u64 {
        let base = self.torus_order_classical();
        if self.group.kind.is_similitude() {
            (self.group.q() - 1) * base
        } else {
            base
        }
    }

    /// `prod (q^lambda+_j - 1) * prod (q^lambda-_i + 1)`, the `z = 1` fiber.
    pub fn torus_order_classical(&self) -> u64 {
        let q = self.group.q();
        let mut o = 1u64;
        for &l in &self.lambda_plus {
            o *= q.pow(l) - 1;
        }
        for &l in &self.lambda_minus {
            o *= q.pow(l) + 1;
        }
        o
    }

    pub fn rel_rank(&self) -> u32 {
        self.lambda_plus.len() as u32 + if self.group.kind.is_similitude() { 1 } else { 0 }
    }

    pub fn epsilon(&self) -> i64 {
        if self.rel_rank() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Tower degree over the base needed for all torus coordinates and the
    /// transferred Gauss sums.
    pub fn required_rel_deg(&self) -> u32 {
        let mut k = self.group.e_deg();
        for &l in &self.lambda_plus {
            k = lcm(k, l);
        }
        for &l in &self.lambda_minus {
            k = lcm(k, 2 * l);
        }
        k
    }

    pub fn make_tower(&self) -> Result<Arc<Tower>> {
        Tower::new(self.group.p, self.group.e0, self.required_rel_deg())
    }

    /// Number of characters of each split / elliptic part.
    pub fn char_ranges(&self, tower: &Tower) -> (Vec<u64>, Vec<u64>) {
        let plus = self
            .lambda_plus
            .iter()
            .map(|&l| tower.level_units(l))
            .collect();
        let minus = self
            .lambda_minus
            .iter()
            .map(|&l| tower.level_size(l) + 1)
            .collect();
        (plus, minus)
    }

    /// Functorial transfer of `(T, theta)` to the general linear side.
    pub fn transfer(&self, tower: &Tower, chars: &TorusCharData) -> Result<TransferredChar> {
        crate::chars::transfer_torus_char(
            tower,
            self.group.e_deg(),
            &self.lambda_plus,
            &self.lambda_minus,
            chars,
        )
    }
}

fn antidiag_ones(n: usize) -> Mat {
    let mut w = Mat::zero(n);
    for i in 0..n {
        w.set(i, n - 1 - i, Elem::Log(0));
    }
    w
}

/// All partitions of `n`, parts descending, in a fixed deterministic order.
pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        let mut part = max.min(n);
        while part >= 1 {
            cur.push(part);
            rec(n - part, part, cur, out);
            cur.pop();
            part -= 1;
        }
    }
    let mut out = Vec::new();
    rec(n, n.max(1), &mut Vec::new(), &mut out);
    out
}

pub fn split_prime_power(q: u64) -> Result<(u64, u32)> {
    if q < 3 {
        return Err(Error::NotOddPrime(q));
    }
    let mut p = q;
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            p = d;
            break;
        }
        d += 2;
    }
    if q % 2 == 0 {
        return Err(Error::NotOddPrime(q));
    }
    let mut e = 0u32;
    let mut rest = q;
    while rest > 1 {
        if rest % p != 0 {
            return Err(Error::NotOddPrime(q));
        }
        rest /= p;
        e += 1;
    }
    Ok((p, e))
}

/// A group realized as an explicit set of matrices.
pub struct EnumeratedGroup {
    pub spec: GroupSpec,
    pub tower: Arc<Tower>,
    pub elements: Vec<Mat>,
}

/// Breadth-first closure from the documented generator set. A closure-size
/// mismatch with the order formula is a hard failure.
pub fn enumerate_group(spec: &GroupSpec, tower: &Arc<Tower>) -> Result<EnumeratedGroup> {
    let order = spec.order();
    if order > ENUM_BOUND {
        return Err(Error::OrderBound {
            got: order,
            bound: ENUM_BOUND,
        });
    }
    let gens = generators(spec, tower)?;
    for g in &gens {
        if !spec.is_member(tower, g) {
            return Err(Error::ClosureMismatch {
                expected: order,
                got: 0,
            });
        }
    }
    let dim = spec.dim_v() as usize;
    let id = Mat::identity(dim);
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    seen.insert(id.key());
    let mut queue = vec![id];
    let mut elements = Vec::with_capacity(order as usize);
    while let Some(m) = queue.pop() {
        for g in &gens {
            let next = m.mul(g, tower);
            if seen.insert(next.key()) {
                queue.push(next.clone());
            }
        }
        elements.push(m);
        if seen.len() as u64 > order {
            return Err(Error::ClosureMismatch {
                expected: order,
                got: seen.len() as u64,
            });
        }
    }
    if elements.len() as u64 != order {
        return Err(Error::ClosureMismatch {
            expected: order,
            got: elements.len() as u64,
        });
    }
    Ok(EnumeratedGroup {
        spec: *spec,
        tower: Arc::clone(tower),
        elements,
    })
}

/// Filter the full matrix space on the defining equations; identical to the
/// closure for small groups, used as a cross-check.
pub fn filter_from_gl(spec: &GroupSpec, tower: &Arc<Tower>) -> Result<Vec<Mat>> {
    let dim = spec.dim_v() as usize;
    let lvl = spec.e_deg();
    let elems: Vec<Elem> = tower.level_elems_iter(lvl)?.collect();
    let cells = dim * dim;
    let total = (elems.len() as f64).powi(cells as i32);
    if total > 3.0e6 {
        return Err(Error::OrderBound {
            got: total as u64,
            bound: 3_000_000,
        });
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; cells];
    for _ in 0..total as u64 {
        let m = Mat {
            n: dim,
            a: idx.iter().map(|&i| elems[i]).collect(),
        };
        if spec.is_member(tower, &m) {
            out.push(m);
        }
        for c in idx.iter_mut() {
            *c += 1;
            if *c < elems.len() {
                break;
            }
            *c = 0;
        }
    }
    Ok(out)
}

fn generators(spec: &GroupSpec, tower: &Tower) -> Result<Vec<Mat>> {
    let one = tower.one();
    let gamma = tower.level_gen(1)?;
    let n = spec.n as usize;
    let scalars = [one, gamma];
    match (spec.kind, spec.n) {
        (GroupKind::Gl, _) | (GroupKind::GSp, 1) => {
            let dim = if spec.kind == GroupKind::GSp { 2 } else { n };
            let mut gens = Vec::new();
            let mut d = Mat::identity(dim);
            d.set(0, 0, gamma);
            gens.push(d);
            if dim > 1 {
                let mut p = Mat::zero(dim);
                for i in 0..dim - 1 {
                    p.set(i, i + 1, one);
                }
                p.set(dim - 1, 0, one);
                gens.push(p);
                for s in scalars {
                    let mut u = Mat::identity(dim);
                    u.set(0, 1, s);
                    gens.push(u);
                }
            }
            Ok(gens)
        }
        (GroupKind::Sp, 1) => {
            let mut gens = Vec::new();
            for s in scalars {
                let mut u = Mat::identity(2);
                u.set(0, 1, s);
                gens.push(u);
                let mut l = Mat::identity(2);
                l.set(1, 0, s);
                gens.push(l);
            }
            Ok(gens)
        }
        (GroupKind::Sp, 2) => {
            let mut gens = Vec::new();
            for s in scalars {
                // short root: I + s(E12 - E34), long root: I + s E23, and
                // their transposes
                let mut a = Mat::identity(4);
                a.set(0, 1, s);
                a.set(2, 3, tower.neg(s));
                gens.push(a.clone());
                gens.push(a.transpose());
                let mut b = Mat::identity(4);
                b.set(1, 2, s);
                gens.push(b.clone());
                gens.push(b.transpose());
            }
            for (u, v) in [(gamma, one), (one, gamma)] {
                let t = Mat::from_rows(&[
                    &[u, Elem::Zero, Elem::Zero, Elem::Zero],
                    &[Elem::Zero, v, Elem::Zero, Elem::Zero],
                    &[Elem::Zero, Elem::Zero, tower.inv(v)?, Elem::Zero],
                    &[Elem::Zero, Elem::Zero, Elem::Zero, tower.inv(u)?],
                ]);
                gens.push(t);
            }
            Ok(gens)
        }
        (GroupKind::SoOdd, 1) => {
            let mut gens = Vec::new();
            let t = Mat::from_rows(&[
                &[gamma, Elem::Zero, Elem::Zero],
                &[Elem::Zero, one, Elem::Zero],
                &[Elem::Zero, Elem::Zero, tower.inv(gamma)?],
            ]);
            gens.push(t);
            let half = tower.inv(tower.from_int(2))?;
            for s in scalars {
                // I + s(E12 - E23) - (s^2/2) E13
                let s2h = tower.neg(tower.mul(tower.mul(s, s), half));
                let u = Mat::from_rows(&[
                    &[one, s, s2h],
                    &[Elem::Zero, one, tower.neg(s)],
                    &[Elem::Zero, Elem::Zero, one],
                ]);
                gens.push(u.clone());
                gens.push(u.transpose());
            }
            Ok(gens)
        }
        (GroupKind::U, 1) => {
            let g2 = tower.level_gen(2)?;
            let h = tower.pow(g2, (tower.level_size(1) - 1) as i64);
            Ok(vec![Mat::from_rows(&[&[h]])])
        }
        (GroupKind::U, 2) => {
            let g2 = tower.level_gen(2)?;
            let q = tower.level_size(1);
            let t = Mat::from_rows(&[
                &[g2, Elem::Zero],
                &[Elem::Zero, tower.inv(tower.pow(g2, q as i64))?],
            ]);
            // delta with Tr_{E/F}(delta) = 0
            let delta = tower.pow(g2, ((q + 1) / 2) as i64);
            let mut u = Mat::identity(2);
            u.set(0, 1, delta);
            let mut l = Mat::identity(2);
            l.set(1, 0, delta);
            let w = antidiag_ones(2);
            Ok(vec![t, u, l, w])
        }
        (GroupKind::SoMinus, 1) => {
            // the circle {a^2 - d b^2 = 1}: image of the norm-one generator
            let (a, b) = norm_one_coords(tower)?;
            let d = tower.level_gen(1)?;
            let m = Mat::from_rows(&[&[a, tower.mul(d, b)], &[b, a]]);
            Ok(vec![m])
        }
        (GroupKind::SoPlus, 1) => Ok(vec![Mat::from_rows(&[
            &[gamma, Elem::Zero],
            &[Elem::Zero, tower.inv(gamma)?],
        ])]),
        _ => Err(Error::UnsupportedGroup),
    }
}

/// Coordinates `(a, b)` with `h = a + b sqrt(d)` for the canonical
/// norm-one generator `h` of `N_2`, `d` the base-field generator.
fn norm_one_coords(tower: &Tower) -> Result<(Elem, Elem)> {
    let n2 = tower.norm_one_subgroup(1)?;
    let h = n2.gen();
    let hq = tower.frobenius(h, 1);
    let half = tower.inv(tower.from_int(2))?;
    let a = tower.mul(tower.add(h, hq), half);
    let d = tower.level_gen(1)?;
    let Elem::Log(dj) = d else { unreachable!() };
    let sqrt_d = Elem::Log(dj / 2 + if dj % 2 == 1 { unreachable!() } else { 0 });
    let b = tower.mul(tower.mul(tower.sub(h, hq), half), tower.inv(sqrt_d)?);
    Ok((a, b))
}

/// Explicit block-diagonal-style torus embeddings for the small enumerable
/// groups; used to cross-check the torus kernel against matrix determinants.
pub fn torus_embedding_matrix(
    td: &TorusDatum,
    tower: &Tower,
    xs: &[Elem],
    ys: &[Elem],
) -> Result<Mat> {
    let spec = &td.group;
    match (spec.kind, spec.n, &td.lambda_plus[..], &td.lambda_minus[..]) {
        (GroupKind::Sp, 1, [1], []) | (GroupKind::GSp, 1, [1], []) => {
            let x = xs[0];
            Ok(Mat::from_rows(&[
                &[x, Elem::Zero],
                &[Elem::Zero, tower.inv(x)?],
            ]))
        }
        (GroupKind::Sp, 1, [], [1]) | (GroupKind::GSp, 1, [], [1]) => mult_matrix(tower, ys[0]),
        (GroupKind::SoOdd, 1, [1], []) => {
            let x = xs[0];
            Ok(Mat::from_rows(&[
                &[x, Elem::Zero, Elem::Zero],
                &[Elem::Zero, tower.one(), Elem::Zero],
                &[Elem::Zero, Elem::Zero, tower.inv(x)?],
            ]))
        }
        (GroupKind::SoOdd, 1, [], [1]) => so3_elliptic_matrix(tower, ys[0]),
        (GroupKind::U, 1, [], [1]) => Ok(Mat::from_rows(&[&[ys[0]]])),
        (GroupKind::U, 2, [2], []) => {
            let a = xs[0];
            let q = tower.level_size(1);
            Ok(Mat::from_rows(&[
                &[a, Elem::Zero],
                &[Elem::Zero, tower.inv(tower.pow(a, q as i64))?],
            ]))
        }
        (GroupKind::U, 2, [], [1, 1]) => u2_elliptic_matrix(tower, ys[0], ys[1]),
        _ => Err(Error::UnsupportedGroup),
    }
}

/// Matrix of multiplication by `t in F_{q^2}` on the basis `{1, x}` of the
/// tower's polynomial model (prime base field only).
pub fn mult_matrix(tower: &Tower, t: Elem) -> Result<Mat> {
    if tower.base_deg() != 1 {
        return Err(Error::UnsupportedGroup);
    }
    let p = tower.p();
    let w = tower.from_code(p)?; // the class of x
    let coords = |v: Elem| -> (Elem, Elem) {
        let code = tower.code_of(v);
        (tower.from_int(code % p), tower.from_int((code / p) % p))
    };
    let (a, b) = coords(t);
    let (c, d) = coords(tower.mul(t, w));
    Ok(Mat::from_rows(&[&[a, c], &[b, d]]))
}

/// SO_3 elliptic torus: mult-by-y on the anisotropic plane spanned by
/// `u = e2`, `v = e1 - (d/2) e3`, extended by 1 on the orthogonal line.
fn so3_elliptic_matrix(tower: &Tower, y: Elem) -> Result<Mat> {
    let d = tower.level_gen(1)?;
    let half = tower.inv(tower.from_int(2))?;
    let yq = tower.frobenius(y, 1);
    // y = a + b sqrt(d) with sqrt(d) in the quadratic extension
    let a = tower.mul(tower.add(y, yq), half);
    let Elem::Log(dj) = tower.level_gen(2).map(|_| d)? else {
        unreachable!()
    };
    let sqrt_d = Elem::Log(dj / 2);
    let b = tower.mul(tower.mul(tower.sub(y, yq), half), tower.inv(sqrt_d)?);
    // block [[a, d b],[b, a]] on (u, v), 1 on w0
    let blk = Mat::from_rows(&[&[a, tower.mul(d, b)], &[b, a]]);
    // basis u = e2, v = e1 - (d/2) e3, w0 = e1 + (d/2) e3
    let dh = tower.mul(d, half);
    let pm = Mat::from_rows(&[
        &[Elem::Zero, tower.one(), tower.one()],
        &[tower.one(), Elem::Zero, Elem::Zero],
        &[Elem::Zero, tower.neg(dh), dh],
    ]);
    let mut big = Mat::identity(3);
    for i in 0..2 {
        for j in 0..2 {
            big.set(i, j, blk.get(i, j));
        }
    }
    let pinv = pm.inverse(tower)?;
    Ok(pm.mul(&big, tower).mul(&pinv, tower))
}

/// U_2 elliptic torus: diag(y1, y2) on the orthogonal hermitian basis
/// `u = (1, 1/2)`, `v = (1, -1/2)`, conjugated back to the `w`-form basis.
fn u2_elliptic_matrix(tower: &Tower, y1: Elem, y2: Elem) -> Result<Mat> {
    let half = tower.inv(tower.from_int(2))?;
    let pm = Mat::from_rows(&[
        &[tower.one(), tower.one()],
        &[half, tower.neg(half)],
    ]);
    let diag = Mat::from_rows(&[&[y1, Elem::Zero], &[Elem::Zero, y2]]);
    let pinv = pm.inverse(tower)?;
    Ok(pm.mul(&diag, tower).mul(&pinv, tower))
}

/// Iterate over the coordinates of the classical-fiber torus
/// `prod F_{q^lambda+_j}^x x prod N_{2 lambda-_i}` of a datum.
pub struct TorusIter<'a> {
    tower: &'a Tower,
    plus_units: Vec<Vec<Elem>>,
    minus_groups: Vec<crate::ff::NormOneGroup>,
    sizes: Vec<u64>,
    idx: Vec<u64>,
    done: bool,
}

impl<'a> TorusIter<'a> {
    pub fn new(td: &TorusDatum, tower: &'a Tower) -> Result<TorusIter<'a>> {
        let plus_units: Vec<Vec<Elem>> = td
            .lambda_plus
            .iter()
            .map(|&l| tower.level_units_iter(l).map(|it| it.collect()))
            .collect::<Result<_>>()?;
        let minus_groups: Vec<_> = td
            .lambda_minus
            .iter()
            .map(|&l| tower.norm_one_subgroup(l))
            .collect::<Result<_>>()?;
        let mut sizes: Vec<u64> = plus_units.iter().map(|u| u.len() as u64).collect();
        sizes.extend(minus_groups.iter().map(|g| g.order));
        let idx = vec![0u64; sizes.len()];
        Ok(TorusIter {
            tower,
            plus_units,
            minus_groups,
            sizes,
            idx,
            done: false,
        })
    }
}

impl<'a> Iterator for TorusIter<'a> {
    /// (split coords, elliptic coords, elliptic power indices)
    type Item = (Vec<Elem>, Vec<Elem>, Vec<u64>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let np = self.plus_units.len();
        let xs: Vec<Elem> = (0..np)
            .map(|j| self.plus_units[j][self.idx[j] as usize])
            .collect();
        let yidx: Vec<u64> = (np..self.idx.len()).map(|j| self.idx[j]).collect();
        let ys: Vec<Elem> = self
            .minus_groups
            .iter()
            .zip(&yidx)
            .map(|(g, &j)| g.element(j, self.tower))
            .collect();
        // advance
        self.done = true;
        for j in 0..self.idx.len() {
            self.idx[j] += 1;
            if self.idx[j] < self.sizes[j] {
                self.done = false;
                break;
            }
            self.idx[j] = 0;
        }
        if self.sizes.is_empty() {
            self.done = true;
        }
        Some((xs, ys, yidx))
    }
}

/// Evaluate `theta(t)` on torus coordinates from exponent data.
pub fn theta_value(
    td: &TorusDatum,
    tower: &Tower,
    chars: &TorusCharData,
    xs: &[Elem],
    yidx: &[u64],
) -> Result<C> {
    let mut v = C::new(1.0, 0.0);
    for ((&l, &a), &x) in td.lambda_plus.iter().zip(&chars.alphas).zip(xs) {
        let alpha = MultChar::new(tower, l, a)?;
        v *= alpha.eval(tower, x)?;
    }
    for ((&l, &b), &j) in td.lambda_minus.iter().zip(&chars.thetas).zip(yidx) {
        let group = tower.norm_one_subgroup(l)?;
        let theta = NormOneChar::new(&group, b);
        v *= theta.eval_power(&group, j);
    }
    Ok(v)
}

/// Direct evaluation of the Deligne-Lusztig pairing
/// `(|H : T_H| / sqrt|g|) sum_{t in T_G} theta(t) Phi(t)`; the kernel is
/// supported on the classical fiber, so the sum runs over it.
pub fn dl_pairing_lhs(
    td: &TorusDatum,
    tower: &Tower,
    chars: &TorusCharData,
    chi: &MultChar,
    include_middle_factor: bool,
) -> Result<(C, u64)> {
    if chars.alphas.len() != td.lambda_plus.len() || chars.thetas.len() != td.lambda_minus.len()
    {
        return Err(Error::IncompleteDatum(format!(
            "need {} split and {} elliptic characters, got {} and {}",
            td.lambda_plus.len(),
            td.lambda_minus.len(),
            chars.alphas.len(),
            chars.thetas.len()
        )));
    }
    let spec = &td.group;
    let mut sum = C::new(0.0, 0.0);
    let mut n_terms = 0u64;
    for (xs, ys, yidx) in TorusIter::new(td, tower)? {
        let phi = kernel_on_torus(
            tower,
            spec,
            &td.lambda_plus,
            &td.lambda_minus,
            &xs,
            &ys,
            chi,
            include_middle_factor,
        )?;
        n_terms += 1;
        if phi.norm_sqr() == 0.0 {
            continue;
        }
        sum += theta_value(td, tower, chars, &xs, &yidx)? * phi;
    }
    let index = spec.order() / td.torus_order();
    let lhs = sum * index as f64 / (spec.lie_algebra_size() as f64).sqrt();
    Ok((lhs, n_terms))
}

/// The assembled right-hand side of the pairing identity.
pub struct DlGamma {
    /// The bare doubling gamma factor `tau_{T^}(theta^ x chi, psi_E)`.
    pub gamma: C,
    pub c_v: C,
    /// `R(1) = eps_H eps_T |H : T_H| / |H|_p`.
    pub r1: f64,
    pub rhs: C,
    /// Canonical exponent data of the transferred pair.
    pub transfer: Vec<(u32, u64)>,
}

/// Gamma factor of a transferred pair: the product of twisted Gauss sums
/// over the canonical components.
pub fn gamma_from_transfer(
    tower: &Tower,
    tc: &TransferredChar,
    chi: &MultChar,
    psi: &AddChar,
) -> Result<C> {
    let canon = tc.canonical(tower);
    let mut prod = C::new(1.0, 0.0);
    for &(deg, exp) in &canon {
        let alpha = MultChar::new(tower, deg, exp)?;
        prod *= sums::gauss_twisted(tower, &alpha, chi, psi)?;
    }
    Ok(prod)
}

pub fn dl_gamma_rhs(
    td: &TorusDatum,
    tower: &Tower,
    chars: &TorusCharData,
    chi: &MultChar,
    psi: &AddChar,
) -> Result<DlGamma> {
    let spec = &td.group;
    let tc = td.transfer(tower, chars)?;
    let gamma = gamma_from_transfer(tower, &tc, chi, psi)?;
    let c_v = sums::c_normalization(tower, spec, chi, psi)?;
    let sign = (spec.epsilon() * td.epsilon()) as f64;
    let index = (spec.order() / td.torus_order()) as f64;
    let r1 = sign * index / spec.p_part() as f64;
    Ok(DlGamma {
        gamma,
        c_v,
        r1,
        rhs: r1 * c_v * gamma,
        transfer: tc.canonical(tower),
    })
}

/// The main pairing identity: direct torus sum against
/// `R(1) c_V(chi, psi) tau_{T^}(theta^ x chi, psi_E)`.
///
/// `chi` must not be conjugate-dual; those parameters belong to the
/// appendix verifier. `drop_middle_factor` is the negative control that
/// omits `chi(2)` from the kernel in odd F-dimension.
pub fn verify_dl(
    td: &TorusDatum,
    tower: &Tower,
    chars: &TorusCharData,
    chi: &MultChar,
    psi: &AddChar,
    drop_middle_factor: bool,
) -> Result<IdentityReport> {
    if chi.is_conjugate_dual(tower, 1) {
        return Err(Error::ConjugateDualChi);
    }
    let (lhs, n_terms) = dl_pairing_lhs(td, tower, chars, chi, !drop_middle_factor)?;
    let g = dl_gamma_rhs(td, tower, chars, chi, psi)?;
    Ok(IdentityReport::new(
        "dl_pairing",
        params! {
            "group" => td.group.kind.name(),
            "n" => td.group.n,
            "q" => td.group.q(),
            "lambda_plus" => td.lambda_plus.clone(),
            "lambda_minus" => td.lambda_minus.clone(),
            "alphas" => chars.alphas.clone(),
            "thetas" => chars.thetas.clone(),
            "chi" => chi.exponent,
            "psi_scale" => psi.scale,
            "negative_control" => drop_middle_factor,
        },
        lhs,
        g.rhs,
        n_terms,
        None,
    ))
}

/// The conjugate-dual analogue: LHS as in `verify_dl`, RHS
/// `eps_G q^(-floor(dim_F V/2)/2) R(1) tau_{T^}(theta^ x chi)^(-1)` with the
/// odd-dimension `chi(2)`. Returns None when the stated hypotheses exclude
/// the grid point.
pub fn verify_dl_conjugate_dual(
    td: &TorusDatum,
    tower: &Tower,
    chars: &TorusCharData,
    chi: &MultChar,
    psi: &AddChar,
) -> Result<Option<IdentityReport>> {
    if !chi.is_conjugate_dual(tower, 1) {
        return Err(Error::UnsupportedParams(
            "chi must be conjugate-dual here".into(),
        ));
    }
    let spec = &td.group;
    let e = spec.e_deg();
    // hypothesis: alpha_j != chi^-1 o N for every split part
    for (&l, &a) in td.lambda_plus.iter().zip(&chars.alphas) {
        let excluded = chi.inverse(tower).compose_norm(tower, l)?;
        if a % tower.level_units(l) == excluded.exponent {
            return Ok(None);
        }
    }
    // hypothesis (E = F): theta_hat_i != chi o N for every elliptic part
    if e == 1 {
        for (&l, &b) in td.lambda_minus.iter().zip(&chars.thetas) {
            let group = tower.norm_one_subgroup(l)?;
            let hat = NormOneChar::new(&group, b).transfer(tower)?;
            let excluded = chi.compose_norm(tower, 2 * l)?;
            if hat.exponent == excluded.exponent {
                return Ok(None);
            }
        }
    }
    let (lhs, n_terms) = dl_pairing_lhs(td, tower, chars, chi, true)?;
    let tc = td.transfer(tower, chars)?;
    let gamma = gamma_from_transfer(tower, &tc, chi, psi)?;
    let eps_g = if spec.rel_rank_classical() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let sign = (spec.epsilon() * td.epsilon()) as f64;
    let index = (spec.order() / td.torus_order()) as f64;
    let r1 = sign * index / spec.p_part() as f64;
    let qpow = (spec.q() as f64).powf(-((spec.dim_v_over_f() / 2) as f64) / 2.0);
    let chi2 = if spec.dim_v_over_f() % 2 == 1 {
        chi.eval(tower, tower.from_int(2))?
    } else {
        C::new(1.0, 0.0)
    };
    let rhs = eps_g * qpow * r1 * chi2 / gamma;
    Ok(Some(IdentityReport::new(
        "appendix_C_dl",
        params! {
            "group" => td.group.kind.name(),
            "n" => td.group.n,
            "q" => td.group.q(),
            "lambda_plus" => td.lambda_plus.clone(),
            "lambda_minus" => td.lambda_minus.clone(),
            "alphas" => chars.alphas.clone(),
            "thetas" => chars.thetas.clone(),
            "chi" => chi.exponent,
            "psi_scale" => psi.scale,
        },
        lhs,
        rhs,
        n_terms,
        None,
    )))
}
