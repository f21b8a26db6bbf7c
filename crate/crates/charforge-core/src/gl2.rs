//! Fully explicit `GL_2(F_q)` representation theory for small `q`: the
//! conjugacy classes, the four character families, brute-force Kondo and
//! Jacobi operators, the singular-matrix vanishing lemma, and the pairing
//! reduction of class functions against Deligne-Lusztig characters.
//!
//! Everything here is the oracle side: sums over all of `GL_2(F_q)` that
//! the closed forms elsewhere must reproduce.

use crate::chars::{AddChar, MultChar};
use crate::error::{Error, Result};
use crate::ff::{Elem, Tower};
use crate::mat::Mat;
use crate::params;
use crate::report::IdentityReport;
use crate::sums::{self, C};
use std::collections::HashMap;
use std::sync::Arc;

/// Conjugacy class of `GL_2(F_q)`, with canonical parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gl2Class {
    Central { x: Elem },
    NonSemisimple { x: Elem },
    Split { x: Elem, y: Elem },
    Elliptic { z: Elem },
}

impl Gl2Class {
    pub fn size(&self, q: u64) -> u64 {
        match self {
            Gl2Class::Central { .. } => 1,
            Gl2Class::NonSemisimple { .. } => q * q - 1,
            Gl2Class::Split { .. } => q * (q + 1),
            Gl2Class::Elliptic { .. } => q * (q - 1),
        }
    }
}

/// One of the four irreducible families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IrrepFamily {
    /// `alpha o det`
    OneDim { alpha: u64 },
    /// Steinberg twisted by `alpha o det`
    SteinbergTwist { alpha: u64 },
    /// `Ind(alpha_1, alpha_2)`, `alpha_1 != alpha_2`
    PrincipalSeries { a1: u64, a2: u64 },
    /// cuspidal attached to a regular character of `F_{q^2}^x`
    Cuspidal { beta: u64 },
}

#[derive(Clone, Debug)]
pub struct Gl2IrrepRow {
    pub family: IrrepFamily,
    pub dim: u64,
    /// Character values indexed like `Gl2Table::classes`.
    pub values: Vec<C>,
}

impl Gl2IrrepRow {
    /// Cuspidal support as (degree over F, exponent) pairs.
    pub fn support(&self) -> Vec<(u32, u64)> {
        match self.family {
            IrrepFamily::OneDim { alpha } | IrrepFamily::SteinbergTwist { alpha } => {
                vec![(1, alpha), (1, alpha)]
            }
            IrrepFamily::PrincipalSeries { a1, a2 } => vec![(1, a1), (1, a2)],
            IrrepFamily::Cuspidal { beta } => vec![(2, beta)],
        }
    }

    /// Does the trivial character of `F_q^x` appear in the support?
    pub fn trivial_in_support(&self) -> bool {
        self.support().iter().any(|&(d, a)| d == 1 && a == 0)
    }
}

pub struct Gl2Element {
    pub m: Mat,
    pub class_idx: usize,
    pub det: Elem,
    /// `tr(g^-1) = tr(g) / det(g)` for 2x2.
    pub tr_inv: Elem,
    /// `det(I + g)`, `Zero` when singular.
    pub det_one_plus: Elem,
    /// `rank(I + g)`.
    pub rank_one_plus: usize,
}

pub struct Gl2Table {
    pub q: u64,
    pub tower: Arc<Tower>,
    pub classes: Vec<Gl2Class>,
    pub class_index: HashMap<Gl2Class, usize>,
    pub elements: Vec<Gl2Element>,
    pub rows: Vec<Gl2IrrepRow>,
}

/// Complete character table of `GL_2(F_q)` with the element list.
pub fn gl2_char_table(q: u64) -> Result<Gl2Table> {
    if !matches!(q, 3 | 5 | 7) {
        return Err(Error::UnsupportedParams(format!(
            "gl2 tables support q in {{3,5,7}}, got {q}"
        )));
    }
    let tower = Tower::new(q, 1, 2)?;
    let t = &tower;

    // canonical class list
    let units: Vec<Elem> = t.level_units_iter(1)?.collect();
    let mut classes = Vec::new();
    for &x in &units {
        classes.push(Gl2Class::Central { x });
    }
    for &x in &units {
        classes.push(Gl2Class::NonSemisimple { x });
    }
    // split pairs are canonicalized by element code
    let mut by_code = units.clone();
    by_code.sort_by_key(|&x| t.code_of(x));
    for i in 0..by_code.len() {
        for j in (i + 1)..by_code.len() {
            classes.push(Gl2Class::Split {
                x: by_code[i],
                y: by_code[j],
            });
        }
    }
    let idx1 = t.level_index(1)?;
    for x in t.level_units_iter(2)? {
        let Elem::Log(jj) = x else { unreachable!() };
        if (jj as u64) % idx1 == 0 {
            continue; // lies in F_q
        }
        let frob = t.frobenius(x, 1);
        if t.code_of(x) <= t.code_of(frob) {
            classes.push(Gl2Class::Elliptic { z: x });
        }
    }
    assert_eq!(classes.len() as u64, q * q - 1, "class count");
    let total: u64 = classes.iter().map(|c| c.size(q)).sum();
    assert_eq!(total, q * (q - 1) * (q - 1) * (q + 1), "class equation");
    let class_index: HashMap<Gl2Class, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();

    // elements with their class and cached data
    let gl = sums::enumerate_gl(t, 1, 2)?;
    let mut elements = Vec::with_capacity(gl.len());
    for m in gl {
        let cls = classify(t, &m)?;
        let class_idx = *class_index
            .get(&cls)
            .ok_or_else(|| Error::UnsupportedParams("class lookup failed".into()))?;
        let det = m.det(t);
        let tr_inv = t.mul(m.trace(t), t.inv(det)?);
        let one_plus = Mat::identity(2).add(&m, t);
        elements.push(Gl2Element {
            det,
            tr_inv,
            det_one_plus: one_plus.det(t),
            rank_one_plus: one_plus.rank(t),
            class_idx,
            m,
        });
    }
    assert_eq!(elements.len() as u64, total);

    // the four families
    let n1 = t.level_units(1);
    let n2 = t.level_units(2);
    let mut rows = Vec::new();
    for a in 0..n1 {
        rows.push(build_row(t, &classes, IrrepFamily::OneDim { alpha: a }, q)?);
    }
    for a in 0..n1 {
        rows.push(build_row(
            t,
            &classes,
            IrrepFamily::SteinbergTwist { alpha: a },
            q,
        )?);
    }
    for a1 in 0..n1 {
        for a2 in (a1 + 1)..n1 {
            rows.push(build_row(
                t,
                &classes,
                IrrepFamily::PrincipalSeries { a1, a2 },
                q,
            )?);
        }
    }
    for b in 1..n2 {
        let orbit = (b * q) % n2;
        if orbit == b || orbit < b {
            continue; // non-regular, or not the canonical orbit representative
        }
        rows.push(build_row(t, &classes, IrrepFamily::Cuspidal { beta: b }, q)?);
    }
    let sum_sq: u64 = rows.iter().map(|r| r.dim * r.dim).sum();
    assert_eq!(sum_sq, total, "sum of squares of dimensions");

    Ok(Gl2Table {
        q,
        tower,
        classes,
        class_index,
        elements,
        rows,
    })
}

fn classify(t: &Tower, m: &Mat) -> Result<Gl2Class> {
    let tr = m.trace(t);
    let det = m.det(t);
    if m.get(0, 1).is_zero() && m.get(1, 0).is_zero() && m.get(0, 0) == m.get(1, 1) {
        return Ok(Gl2Class::Central { x: m.get(0, 0) });
    }
    let four = t.from_int(4);
    let disc = t.sub(t.mul(tr, tr), t.mul(four, det));
    if disc.is_zero() {
        let x = t.mul(tr, t.inv(t.from_int(2))?);
        return Ok(Gl2Class::NonSemisimple { x });
    }
    let Elem::Log(dj) = disc else { unreachable!() };
    let half = t.inv(t.from_int(2))?;
    if t.in_level(disc, 1)? && t.level_log(disc, 1)? % 2 == 0 {
        // split: disc is a base-field square
        let s = Elem::Log(dj / 2);
        let r1 = t.mul(t.add(tr, s), half);
        let r2 = t.mul(t.sub(tr, s), half);
        let (x, y) = if t.code_of(r1) <= t.code_of(r2) {
            (r1, r2)
        } else {
            (r2, r1)
        };
        return Ok(Gl2Class::Split { x, y });
    }
    // elliptic: take the ambient square root (always exists: the log is even)
    debug_assert_eq!(dj % 2, 0);
    let s = Elem::Log(dj / 2);
    let z1 = t.mul(t.add(tr, s), half);
    let z2 = t.mul(t.sub(tr, s), half);
    let z = if t.code_of(z1) <= t.code_of(z2) { z1 } else { z2 };
    Ok(Gl2Class::Elliptic { z })
}

fn build_row(t: &Tower, classes: &[Gl2Class], family: IrrepFamily, q: u64) -> Result<Gl2IrrepRow> {
    let dim = match family {
        IrrepFamily::OneDim { .. } => 1,
        IrrepFamily::SteinbergTwist { .. } => q,
        IrrepFamily::PrincipalSeries { .. } => q + 1,
        IrrepFamily::Cuspidal { .. } => q - 1,
    };
    let qf = q as f64;
    let mut values = Vec::with_capacity(classes.len());
    for cls in classes {
        let v = match family {
            IrrepFamily::OneDim { alpha } => {
                let al = MultChar::new(t, 1, alpha)?;
                match cls {
                    Gl2Class::Central { x } | Gl2Class::NonSemisimple { x } => {
                        al.eval(t, t.mul(*x, *x))?
                    }
                    Gl2Class::Split { x, y } => al.eval(t, t.mul(*x, *y))?,
                    Gl2Class::Elliptic { z } => al.eval(t, t.norm(*z, 2, 1)?)?,
                }
            }
            IrrepFamily::SteinbergTwist { alpha } => {
                let al = MultChar::new(t, 1, alpha)?;
                match cls {
                    Gl2Class::Central { x } => qf * al.eval(t, t.mul(*x, *x))?,
                    Gl2Class::NonSemisimple { .. } => C::new(0.0, 0.0),
                    Gl2Class::Split { x, y } => al.eval(t, t.mul(*x, *y))?,
                    Gl2Class::Elliptic { z } => -al.eval(t, t.norm(*z, 2, 1)?)?,
                }
            }
            IrrepFamily::PrincipalSeries { a1, a2 } => {
                let al1 = MultChar::new(t, 1, a1)?;
                let al2 = MultChar::new(t, 1, a2)?;
                induced_value(t, &al1, &al2, cls, q)?
            }
            IrrepFamily::Cuspidal { beta } => {
                let b = MultChar::new(t, 2, beta)?;
                match cls {
                    Gl2Class::Central { x } => (qf - 1.0) * b.eval(t, *x)?,
                    Gl2Class::NonSemisimple { x } => -b.eval(t, *x)?,
                    Gl2Class::Split { .. } => C::new(0.0, 0.0),
                    Gl2Class::Elliptic { z } => {
                        -(b.eval(t, *z)? + b.eval(t, t.frobenius(*z, 1))?)
                    }
                }
            }
        };
        values.push(v);
    }
    Ok(Gl2IrrepRow {
        family,
        dim,
        values,
    })
}

/// Character of the (possibly reducible) induced representation
/// `Ind(alpha_1, alpha_2)` from the Borel.
pub fn induced_value(
    t: &Tower,
    al1: &MultChar,
    al2: &MultChar,
    cls: &Gl2Class,
    q: u64,
) -> Result<C> {
    Ok(match cls {
        Gl2Class::Central { x } => (q as f64 + 1.0) * al1.eval(t, *x)? * al2.eval(t, *x)?,
        Gl2Class::NonSemisimple { x } => al1.eval(t, *x)? * al2.eval(t, *x)?,
        Gl2Class::Split { x, y } => {
            al1.eval(t, *x)? * al2.eval(t, *y)? + al1.eval(t, *y)? * al2.eval(t, *x)?
        }
        Gl2Class::Elliptic { .. } => C::new(0.0, 0.0),
    })
}

impl Gl2Table {
    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn class_index_of(&self, m: &Mat) -> Result<usize> {
        let cls = classify(&self.tower, m)?;
        self.class_index
            .get(&cls)
            .copied()
            .ok_or_else(|| Error::UnsupportedParams("class lookup failed".into()))
    }

    /// `<chi_r, chi_r> = 1` for every row (exact up to rounding).
    pub fn row_orthonormality_defect(&self) -> f64 {
        let order = self.order() as f64;
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let mut ip = 0.0;
            for (cls, v) in self.classes.iter().zip(&row.values) {
                ip += cls.size(self.q) as f64 * v.norm_sqr();
            }
            worst = worst.max((ip / order - 1.0).abs());
        }
        worst
    }

    /// Brute-force Kondo Gauss sum scalar:
    /// `(1/dim) q^(-k^2/2) sum_g psi(tr g^-1) chi(det g) trace tau(g)`.
    pub fn kondo_brute(&self, row: &Gl2IrrepRow, chi: &MultChar, psi: &AddChar) -> Result<C> {
        let t = &*self.tower;
        let mut s = C::new(0.0, 0.0);
        for el in &self.elements {
            let mut v = psi.eval(t, el.tr_inv, 1)?;
            if !chi.is_trivial() {
                v *= chi.eval(t, el.det)?;
            }
            s += v * row.values[el.class_idx];
        }
        Ok(s / (row.dim as f64) / (self.q as f64).powi(2))
    }

    /// Brute-force doubling Jacobi scalar:
    /// `(1/dim) q^(-k^2/2) sum_g J_chi(g) trace tau(g)`.
    pub fn jacobi_brute(&self, row: &Gl2IrrepRow, chi: &MultChar) -> Result<C> {
        let t = &*self.tower;
        let mut s = C::new(0.0, 0.0);
        for el in &self.elements {
            let kernel = if chi.is_trivial() {
                li_hu_from_rank(self.q, el.rank_one_plus)
            } else if el.det_one_plus.is_zero() {
                continue;
            } else {
                chi.eval(t, el.det_one_plus)?
            };
            s += kernel * row.values[el.class_idx];
        }
        Ok(s / (row.dim as f64) / (self.q as f64).powi(2))
    }

    /// Schur-consistency of the Kondo operator through traces: for any `h`,
    /// `sum_g w(g) chi_tau(g h) = s * chi_tau(h)` where `s` is the extracted
    /// scalar. Returns the worst defect over the supplied `h`.
    pub fn kondo_scalar_defect(
        &self,
        row: &Gl2IrrepRow,
        chi: &MultChar,
        psi: &AddChar,
        hs: &[&Mat],
    ) -> Result<f64> {
        let t = &*self.tower;
        let scalar = self.kondo_brute(row, chi, psi)?;
        let mut worst: f64 = 0.0;
        for h in hs {
            let mut s = C::new(0.0, 0.0);
            for el in &self.elements {
                let mut v = psi.eval(t, el.tr_inv, 1)?;
                if !chi.is_trivial() {
                    v *= chi.eval(t, el.det)?;
                }
                let gh = el.m.mul(h, t);
                s += v * row.values[self.class_index_of(&gh)?];
            }
            s /= (self.q as f64).powi(2);
            let expect = scalar * row.values[self.class_index_of(h)?];
            worst = worst.max((s - expect).norm());
        }
        Ok(worst)
    }

    /// The singular-matrix vanishing lemma, reported.
    pub fn verify_singular_vanishing(
        &self,
        x: &Mat,
        chi: &MultChar,
        psi: &AddChar,
    ) -> Result<IdentityReport> {
        let t = &*self.tower;
        let (s, n) = sums::singular_vanishing_sum(t, 1, x, chi, psi)?;
        Ok(IdentityReport::new(
            "singular_vanishing",
            params! {
                "q" => self.q,
                "x" => x.a.iter().map(|e| t.code_of(*e)).collect::<Vec<_>>(),
                "chi" => chi.exponent,
                "psi_scale" => psi.scale,
            },
            s,
            C::new(0.0, 0.0),
            n,
            None,
        ))
    }
}

fn li_hu_from_rank(q: u64, rank: usize) -> C {
    let qe = q as f64;
    let k = 2usize;
    let mut v = qe.powi(-2);
    for i in 1..=(k - rank) {
        v *= qe.powi(i as i32) - 1.0;
    }
    let sign = if (k - rank) % 2 == 0 { 1.0 } else { -1.0 };
    C::new(sign * v, 0.0)
}

/// Which torus the Deligne-Lusztig pairing check uses.
#[derive(Clone, Copy, Debug)]
pub enum Gl2Torus {
    Split { a1: u64, a2: u64 },
    Elliptic { beta: u64 },
}

/// The class function paired against the virtual character.
#[derive(Clone, Copy, Debug)]
pub enum Gl2TestFn {
    JacobiKernel(MultChar),
    ChiDet(MultChar),
}

impl Gl2TestFn {
    fn eval(
        &self,
        table: &Gl2Table,
        det: Elem,
        det_one_plus: Elem,
        rank_one_plus: usize,
    ) -> Result<C> {
        let t = &*table.tower;
        Ok(match self {
            Gl2TestFn::JacobiKernel(chi) => {
                if chi.is_trivial() {
                    li_hu_from_rank(table.q, rank_one_plus)
                } else if det_one_plus.is_zero() {
                    C::new(0.0, 0.0)
                } else {
                    chi.eval(t, det_one_plus)?
                }
            }
            Gl2TestFn::ChiDet(chi) => {
                if chi.is_trivial() {
                    C::new(1.0, 0.0)
                } else {
                    chi.eval(t, det)?
                }
            }
        })
    }
}

/// `<R_{T,theta}, f>_G = <theta, f|_T>_T` for class functions `f` that only
/// depend on the semisimple part. `R` is the induced character for the
/// split torus and minus the cuspidal character (regular `theta`) for the
/// elliptic torus.
pub fn dl_pairing_check_gl2(
    table: &Gl2Table,
    torus: Gl2Torus,
    f: Gl2TestFn,
) -> Result<IdentityReport> {
    let t = &*table.tower;
    let q = table.q;
    let n2 = t.level_units(2);

    // R values per class
    let r_values: Vec<C> = match torus {
        Gl2Torus::Split { a1, a2 } => {
            let al1 = MultChar::new(t, 1, a1)?;
            let al2 = MultChar::new(t, 1, a2)?;
            table
                .classes
                .iter()
                .map(|c| induced_value(t, &al1, &al2, c, q))
                .collect::<Result<_>>()?
        }
        Gl2Torus::Elliptic { beta } => {
            let b = MultChar::new(t, 2, beta)?;
            if !b.is_regular(t, 1) {
                return Err(Error::NonRegularTheta);
            }
            let row = build_row(
                t,
                &table.classes,
                IrrepFamily::Cuspidal {
                    beta: beta.min((beta * q) % n2),
                },
                q,
            )?;
            // R_{T,theta} = -(cuspidal character); the canonical orbit
            // representative carries the same values.
            row.values.iter().map(|v| -v).collect()
        }
    };

    let mut lhs = C::new(0.0, 0.0);
    for el in &table.elements {
        let fv = f.eval(table, el.det, el.det_one_plus, el.rank_one_plus)?;
        lhs += r_values[el.class_idx] * fv.conj();
    }
    lhs /= table.order() as f64;
    let n_terms = table.order();

    let mut rhs = C::new(0.0, 0.0);
    let t_order;
    match torus {
        Gl2Torus::Split { a1, a2 } => {
            let al1 = MultChar::new(t, 1, a1)?;
            let al2 = MultChar::new(t, 1, a2)?;
            for x in t.level_units_iter(1)? {
                for y in t.level_units_iter(1)? {
                    let g = Mat::from_rows(&[&[x, Elem::Zero], &[Elem::Zero, y]]);
                    let one_plus = Mat::identity(2).add(&g, t);
                    let fv = f.eval(table, g.det(t), one_plus.det(t), one_plus.rank(t))?;
                    rhs += al1.eval(t, x)? * al2.eval(t, y)? * fv.conj();
                }
            }
            t_order = (q - 1) * (q - 1);
        }
        Gl2Torus::Elliptic { beta } => {
            let b = MultChar::new(t, 2, beta)?;
            for z in t.level_units_iter(2)? {
                let g = crate::groups::mult_matrix(t, z)?;
                let one_plus = Mat::identity(2).add(&g, t);
                let fv = f.eval(table, g.det(t), one_plus.det(t), one_plus.rank(t))?;
                rhs += b.eval(t, z)? * fv.conj();
            }
            t_order = n2;
        }
    }
    rhs /= t_order as f64;

    let (f_name, f_chi) = match f {
        Gl2TestFn::JacobiKernel(c) => ("jacobi_kernel", c.exponent),
        Gl2TestFn::ChiDet(c) => ("chi_det", c.exponent),
    };
    Ok(IdentityReport::new(
        "dl_pairing_gl2",
        params! {
            "q" => q,
            "torus" => match torus {
                Gl2Torus::Split { a1, a2 } => format!("split({a1},{a2})"),
                Gl2Torus::Elliptic { beta } => format!("elliptic({beta})"),
            },
            "f" => f_name,
            "f_chi" => f_chi,
        },
        lhs,
        rhs,
        n_terms,
        None,
    ))
}
