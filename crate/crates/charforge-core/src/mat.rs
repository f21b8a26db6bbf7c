//! Small dense matrices over a field tower, enough for group enumeration,
//! kernels and character-table bookkeeping.

use crate::error::{Error, Result};
use crate::ff::{Elem, Tower};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat {
    pub n: usize,
    pub a: Vec<Elem>,
}

impl Mat {
    pub fn zero(n: usize) -> Mat {
        Mat {
            n,
            a: vec![Elem::Zero; n * n],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zero(n);
        for i in 0..n {
            m.a[i * n + i] = Elem::Log(0);
        }
        m
    }

    pub fn from_rows(rows: &[&[Elem]]) -> Mat {
        let n = rows.len();
        let mut a = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n);
            a.extend_from_slice(r);
        }
        Mat { n, a }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.a[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &Mat, t: &Tower) -> Mat {
        let n = self.n;
        let mut out = Mat::zero(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let prod = t.mul(aik, other.get(k, j));
                    out.set(i, j, t.add(out.get(i, j), prod));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat, t: &Tower) -> Mat {
        let mut out = Mat::zero(self.n);
        for i in 0..self.a.len() {
            out.a[i] = t.add(self.a[i], other.a[i]);
        }
        out
    }

    pub fn scale(&self, c: Elem, t: &Tower) -> Mat {
        let mut out = Mat::zero(self.n);
        for i in 0..self.a.len() {
            out.a[i] = t.mul(c, self.a[i]);
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut out = Mat::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Entrywise `x -> x^(q^over)`.
    pub fn frobenius(&self, t: &Tower, over: u32) -> Mat {
        let mut out = Mat::zero(self.n);
        for i in 0..self.a.len() {
            out.a[i] = t.frobenius(self.a[i], over);
        }
        out
    }

    pub fn trace(&self, t: &Tower) -> Elem {
        let mut acc = Elem::Zero;
        for i in 0..self.n {
            acc = t.add(acc, self.get(i, i));
        }
        acc
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self, t: &Tower) -> Elem {
        let n = self.n;
        let mut w = self.clone();
        let mut det = Elem::Log(0);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !w.get(r, col).is_zero());
            let Some(pr) = pivot else {
                return Elem::Zero;
            };
            if pr != col {
                for j in 0..n {
                    let tmp = w.get(col, j);
                    w.set(col, j, w.get(pr, j));
                    w.set(pr, j, tmp);
                }
                det = t.neg(det);
            }
            let p = w.get(col, col);
            det = t.mul(det, p);
            let pinv = t.inv(p).expect("pivot nonzero");
            for r in (col + 1)..n {
                let f = w.get(r, col);
                if f.is_zero() {
                    continue;
                }
                let f = t.mul(f, pinv);
                for j in col..n {
                    let sub = t.mul(f, w.get(col, j));
                    w.set(r, j, t.sub(w.get(r, j), sub));
                }
            }
        }
        det
    }

    pub fn rank(&self, t: &Tower) -> usize {
        let n = self.n;
        let mut w = self.clone();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..n {
            let pivot = (row..n).find(|&r| !w.get(r, col).is_zero());
            let Some(pr) = pivot else { continue };
            if pr != row {
                for j in 0..n {
                    let tmp = w.get(row, j);
                    w.set(row, j, w.get(pr, j));
                    w.set(pr, j, tmp);
                }
            }
            let pinv = t.inv(w.get(row, col)).expect("pivot nonzero");
            for r in (row + 1)..n {
                let f = w.get(r, col);
                if f.is_zero() {
                    continue;
                }
                let f = t.mul(f, pinv);
                for j in col..n {
                    let sub = t.mul(f, w.get(row, j));
                    w.set(r, j, t.sub(w.get(r, j), sub));
                }
            }
            rank += 1;
            row += 1;
            if row == n {
                break;
            }
        }
        rank
    }

    pub fn inverse(&self, t: &Tower) -> Result<Mat> {
        let n = self.n;
        let mut w = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !w.get(r, col).is_zero());
            let Some(pr) = pivot else {
                return Err(Error::SingularMatrix);
            };
            if pr != col {
                for j in 0..n {
                    let tmp = w.get(col, j);
                    w.set(col, j, w.get(pr, j));
                    w.set(pr, j, tmp);
                    let tmp = inv.get(col, j);
                    inv.set(col, j, inv.get(pr, j));
                    inv.set(pr, j, tmp);
                }
            }
            let pinv = t.inv(w.get(col, col))?;
            for j in 0..n {
                w.set(col, j, t.mul(pinv, w.get(col, j)));
                inv.set(col, j, t.mul(pinv, inv.get(col, j)));
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = w.get(r, col);
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let sub = t.mul(f, w.get(col, j));
                    w.set(r, j, t.sub(w.get(r, j), sub));
                    let sub = t.mul(f, inv.get(col, j));
                    inv.set(r, j, t.sub(inv.get(r, j), sub));
                }
            }
        }
        Ok(inv)
    }

    /// Compact hash key (log indices, `u32::MAX` for zero).
    pub fn key(&self) -> Vec<u32> {
        self.a
            .iter()
            .map(|e| match e {
                Elem::Zero => u32::MAX,
                Elem::Log(j) => *j,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::build_field;

    #[test]
    fn det_rank_inverse_small() {
        let f5 = build_field(5, 1).unwrap();
        let e = |c: u64| f5.from_int(c);
        let m = Mat::from_rows(&[&[e(1), e(2)], &[e(3), e(4)]]);
        // det = 4 - 6 = -2 = 3
        assert_eq!(f5.code_of(m.det(&f5)), 3);
        assert_eq!(m.rank(&f5), 2);
        let inv = m.inverse(&f5).unwrap();
        assert_eq!(m.mul(&inv, &f5), Mat::identity(2));

        let s = Mat::from_rows(&[&[e(1), e(2)], &[e(2), e(4)]]);
        assert_eq!(s.det(&f5), Elem::Zero);
        assert_eq!(s.rank(&f5), 1);
        assert!(s.inverse(&f5).is_err());
    }

    #[test]
    fn trace_of_inverse_2x2_identity() {
        // tr(g^{-1}) = tr(g)/det(g) for 2x2
        let f7 = build_field(7, 1).unwrap();
        for code in 0..7u64.pow(4) {
            let digits = [
                code % 7,
                (code / 7) % 7,
                (code / 49) % 7,
                (code / 343) % 7,
            ];
            let m = Mat {
                n: 2,
                a: digits.iter().map(|&d| f7.from_int(d)).collect(),
            };
            if m.det(&f7).is_zero() {
                continue;
            }
            let inv = m.inverse(&f7).unwrap();
            let lhs = inv.trace(&f7);
            let rhs = f7.mul(m.trace(&f7), f7.inv(m.det(&f7)).unwrap());
            assert_eq!(lhs, rhs);
        }
    }
}
