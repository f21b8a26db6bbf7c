//! Finite field towers with Zech-logarithm arithmetic.
//!
//! A [`Tower`] realizes one ambient field `F_{p^(e0*K)}` together with the
//! lattice of its subfields containing the designated base `F_q`, `q = p^e0`.
//! Elements are discrete-log indices relative to a fixed generator (plus a
//! zero sentinel), so multiplication, norms and powers are index arithmetic
//! and addition goes through the Zech table. Subfields live *inside* the
//! ambient field as the subgroup of index `(p^e - 1)/(p^m - 1)` plus zero.
//!
//! Modulus and generator are chosen deterministically (lexicographically
//! least monic irreducible, least full-order element), so character
//! exponents are reproducible across runs.

use crate::error::{Error, Result};
use std::sync::Arc;

/// Hard cap on the ambient field size.
pub const SIZE_CAP: u64 = 1 << 20;

const ZECH_ZERO: u32 = u32::MAX;

/// A field element: zero, or the discrete log of a unit in the ambient field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Elem {
    Zero,
    Log(u32),
}

impl Elem {
    pub fn is_zero(self) -> bool {
        matches!(self, Elem::Zero)
    }
}

/// One ambient field `F_{p^(e0*K)}` with its subfield lattice over `F_{p^e0}`.
#[derive(Debug)]
pub struct Tower {
    p: u64,
    base_deg: u32,
    rel_deg: u32,
    abs_deg: u32,
    size: u64,
    n_units: u64,
    modulus: Vec<u64>,
    gen_poly: Vec<u64>,
    poly_of: Vec<u64>,
    log_of: Vec<u32>,
    zech: Vec<u32>,
    tr_p: Vec<u32>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense polynomial arithmetic over F_p, coefficients ascending.
mod poly {
    pub fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn mul_mod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai * bj) % p;
            }
        }
        rem(&mut prod, f, p);
        prod
    }

    /// In-place remainder by the monic polynomial `f`.
    pub fn rem(a: &mut Vec<u64>, f: &[u64], p: u64) {
        let df = f.len() - 1;
        while a.len() > df {
            let lead = *a.last().unwrap();
            let da = a.len() - 1;
            if lead != 0 {
                for i in 0..df {
                    let t = (lead * f[i]) % p;
                    let idx = da - df + i;
                    a[idx] = (a[idx] + p * p - t) % p;
                }
            }
            a.pop();
            trim(a);
            if a.is_empty() {
                return;
            }
        }
        trim(a);
    }

    pub fn pow_mod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = base.to_vec();
        rem(&mut b, f, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(&acc, &b, f, p);
            }
            b = mul_mod(&b, &b, f, p);
            e >>= 1;
        }
        acc
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut out = vec![0u64; n];
        for i in 0..n {
            let ai = a.get(i).copied().unwrap_or(0);
            let bi = b.get(i).copied().unwrap_or(0);
            out[i] = (ai + p - bi) % p;
        }
        trim(&mut out);
        out
    }

    pub fn gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
        while !b.is_empty() {
            // make b monic before reducing
            let lead = *b.last().unwrap();
            if lead != 1 {
                let inv = mod_inv(lead, p);
                for c in b.iter_mut() {
                    *c = (*c * inv) % p;
                }
            }
            rem(&mut a, &with_monic_pad(&b), p);
            std::mem::swap(&mut a, &mut b);
        }
        a
    }

    fn with_monic_pad(b: &[u64]) -> Vec<u64> {
        b.to_vec()
    }

    pub fn mod_inv(a: u64, p: u64) -> u64 {
        // p prime, a != 0
        let mut e = p - 2;
        let mut acc = 1u64;
        let mut b = a % p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    }
}

/// Rabin test: `f` monic of degree `e` is irreducible over F_p iff
/// x^(p^e) = x mod f and gcd(x^(p^(e/r)) - x, f) = 1 for each prime r | e.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let e = (f.len() - 1) as u64;
    if e == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    let mut pe = 1u64;
    for _ in 0..e {
        pe = pe.saturating_mul(p);
    }
    let xq = poly::pow_mod(&x, pe, f, p);
    if poly::sub(&xq, &x, p) != Vec::<u64>::new() {
        return false;
    }
    for r in prime_factors(e) {
        let mut pm = 1u64;
        for _ in 0..(e / r) {
            pm = pm.saturating_mul(p);
        }
        let xr = poly::pow_mod(&x, pm, f, p);
        let diff = poly::sub(&xr, &x, p);
        let g = poly::gcd(f.to_vec(), diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

impl Tower {
    /// Ambient field `F_{p^(e0*k)}` with base `F_{p^e0}`.
    pub fn new(p: u64, base_deg: u32, rel_deg: u32) -> Result<Arc<Tower>> {
        if p == 2 || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        let abs_deg = base_deg * rel_deg;
        if abs_deg == 0 || abs_deg > 24 {
            return Err(Error::SizeBound(p, abs_deg));
        }
        let mut size: u64 = 1;
        for _ in 0..abs_deg {
            size = size.saturating_mul(p);
            if size > SIZE_CAP {
                return Err(Error::SizeBound(p, abs_deg));
            }
        }
        let e = abs_deg as usize;
        let n_units = size - 1;

        // Lexicographically least monic irreducible: scan the non-leading
        // coefficient vector as a base-p counter, c0 least significant.
        let mut modulus = Vec::new();
        'outer: for code in 0..size {
            let mut f = vec![0u64; e + 1];
            let mut c = code;
            for coeff in f.iter_mut().take(e) {
                *coeff = c % p;
                c /= p;
            }
            f[e] = 1;
            if is_irreducible(&f, p) {
                modulus = f;
                break 'outer;
            }
        }

        // Least full-order generator, scanning element codes.
        let factors = prime_factors(n_units);
        let mut gen_poly = Vec::new();
        for code in 1..size {
            let mut g = Vec::new();
            let mut c = code;
            while c > 0 {
                g.push(c % p);
                c /= p;
            }
            let full = factors
                .iter()
                .all(|&r| poly::pow_mod(&g, n_units / r, &modulus, p) != vec![1]);
            if full {
                gen_poly = g;
                break;
            }
        }

        // Trace-to-F_p of each basis monomial x^i.
        let x = vec![0u64, 1];
        let mut tr_basis = vec![0u64; e];
        for (i, tb) in tr_basis.iter_mut().enumerate() {
            let mut acc = 0u64;
            let mut pw = 1u64;
            for _ in 0..e {
                let img = poly::pow_mod(&x, (i as u64).saturating_mul(pw), &modulus, p);
                acc = (acc + img.first().copied().unwrap_or(0)) % p;
                pw = pw.saturating_mul(p);
            }
            *tb = acc;
        }

        // Power tables.
        let code_of = |v: &[u64]| -> u64 {
            let mut c = 0u64;
            for &coeff in v.iter().rev() {
                c = c * p + coeff;
            }
            c
        };
        let mut poly_of = vec![0u64; n_units as usize];
        let mut log_of = vec![0u32; size as usize];
        let mut tr_p = vec![0u32; n_units as usize];
        let mut cur = vec![1u64];
        for j in 0..n_units as usize {
            let code = code_of(&cur);
            poly_of[j] = code;
            log_of[code as usize] = j as u32;
            let mut t = 0u64;
            for (i, &coeff) in cur.iter().enumerate() {
                t = (t + coeff * tr_basis[i]) % p;
            }
            tr_p[j] = t as u32;
            cur = poly::mul_mod(&cur, &gen_poly, &modulus, p);
        }
        debug_assert_eq!(cur, vec![1u64], "generator order is not p^e - 1");

        // Zech table: zech[j] = log(1 + g^j).
        let mut zech = vec![ZECH_ZERO; n_units as usize];
        for j in 0..n_units as usize {
            let code = poly_of[j];
            let c0 = code % p;
            let bumped = code - c0 + (c0 + 1) % p;
            if bumped != 0 {
                zech[j] = log_of[bumped as usize];
            }
        }

        let t = Tower {
            p,
            base_deg,
            rel_deg,
            abs_deg,
            size,
            n_units,
            modulus,
            gen_poly,
            poly_of,
            log_of,
            zech,
            tr_p,
        };
        t.self_test();
        Ok(Arc::new(t))
    }

    /// Spot-check that index arithmetic agrees with polynomial arithmetic.
    fn self_test(&self) {
        let n = self.n_units;
        let step = (n / 17).max(1);
        let mut a = 0u64;
        while a < n {
            let b = (a * 7 + 3) % n;
            let viaz = self.add(Elem::Log(a as u32), Elem::Log(b as u32));
            let pa = self.poly_of[a as usize];
            let pb = self.poly_of[b as usize];
            let sum = self.poly_add_codes(pa, pb);
            let direct = if sum == 0 {
                Elem::Zero
            } else {
                Elem::Log(self.log_of[sum as usize])
            };
            assert_eq!(viaz, direct, "zech table inconsistent at ({a},{b})");
            a += step;
        }
    }

    fn poly_add_codes(&self, mut a: u64, mut b: u64) -> u64 {
        let mut out = 0u64;
        let mut mult = 1u64;
        while a > 0 || b > 0 {
            let s = (a % self.p + b % self.p) % self.p;
            out += s * mult;
            mult *= self.p;
            a /= self.p;
            b /= self.p;
        }
        out
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    /// Size of the base field `q = p^e0`.
    pub fn base_size(&self) -> u64 {
        let mut s = 1u64;
        for _ in 0..self.base_deg {
            s *= self.p;
        }
        s
    }
    pub fn base_deg(&self) -> u32 {
        self.base_deg
    }
    /// Degree of the ambient field over the base.
    pub fn rel_deg(&self) -> u32 {
        self.rel_deg
    }
    pub fn abs_deg(&self) -> u32 {
        self.abs_deg
    }
    pub fn size(&self) -> u64 {
        self.size
    }
    pub fn n_units(&self) -> u64 {
        self.n_units
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn gen_poly(&self) -> &[u64] {
        &self.gen_poly
    }

    /// Size of the degree-`m` (over base) subfield.
    pub fn level_size(&self, m: u32) -> u64 {
        let mut s = 1u64;
        for _ in 0..(self.base_deg * m) {
            s *= self.p;
        }
        s
    }
    pub fn level_units(&self, m: u32) -> u64 {
        self.level_size(m) - 1
    }

    /// Index of the degree-`m` unit subgroup inside the ambient units.
    pub fn level_index(&self, m: u32) -> Result<u64> {
        if m == 0 || self.rel_deg % m != 0 {
            return Err(Error::BadDegree(m, self.rel_deg));
        }
        Ok(self.n_units / self.level_units(m))
    }

    pub fn gen(&self) -> Elem {
        Elem::Log(1 % self.n_units as u32)
    }

    /// Canonical generator of the degree-`m` subfield's units.
    pub fn level_gen(&self, m: u32) -> Result<Elem> {
        Ok(Elem::Log(self.level_index(m)? as u32))
    }

    pub fn zero(&self) -> Elem {
        Elem::Zero
    }
    pub fn one(&self) -> Elem {
        Elem::Log(0)
    }

    /// Embed an integer (an element of the prime field).
    pub fn from_int(&self, c: u64) -> Elem {
        let c = c % self.p;
        if c == 0 {
            Elem::Zero
        } else {
            Elem::Log(self.log_of[c as usize])
        }
    }

    /// Element from its polynomial code (base-p digits are coefficients).
    pub fn from_code(&self, code: u64) -> Result<Elem> {
        if code >= self.size {
            return Err(Error::UnsupportedParams(format!(
                "element code {code} out of range"
            )));
        }
        if code == 0 {
            Ok(Elem::Zero)
        } else {
            Ok(Elem::Log(self.log_of[code as usize]))
        }
    }

    pub fn code_of(&self, x: Elem) -> u64 {
        match x {
            Elem::Zero => 0,
            Elem::Log(j) => self.poly_of[j as usize],
        }
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match (a, b) {
            (Elem::Log(i), Elem::Log(j)) => {
                Elem::Log(((i as u64 + j as u64) % self.n_units) as u32)
            }
            _ => Elem::Zero,
        }
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        match a {
            Elem::Zero => Err(Error::SingularMatrix),
            Elem::Log(0) => Ok(Elem::Log(0)),
            Elem::Log(j) => Ok(Elem::Log((self.n_units - j as u64) as u32)),
        }
    }

    pub fn neg(&self, a: Elem) -> Elem {
        match a {
            Elem::Zero => Elem::Zero,
            Elem::Log(j) => {
                // -1 = g^(n/2) since p is odd
                Elem::Log(((j as u64 + self.n_units / 2) % self.n_units) as u32)
            }
        }
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match (a, b) {
            (Elem::Zero, x) | (x, Elem::Zero) => x,
            (Elem::Log(i), Elem::Log(j)) => {
                let d = ((j as u64 + self.n_units - i as u64) % self.n_units) as usize;
                let z = self.zech[d];
                if z == ZECH_ZERO {
                    Elem::Zero
                } else {
                    Elem::Log(((i as u64 + z as u64) % self.n_units) as u32)
                }
            }
        }
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn pow(&self, a: Elem, k: i64) -> Elem {
        match a {
            Elem::Zero => {
                if k == 0 {
                    Elem::Log(0)
                } else {
                    Elem::Zero
                }
            }
            Elem::Log(j) => {
                let n = self.n_units as i128;
                let e = ((j as i128 * k as i128) % n + n) % n;
                Elem::Log(e as u32)
            }
        }
    }

    /// Trace from the ambient field to the prime field, as an integer in `[0, p)`.
    pub fn trace_to_prime(&self, x: Elem) -> u64 {
        match x {
            Elem::Zero => 0,
            Elem::Log(j) => self.tr_p[j as usize] as u64,
        }
    }

    /// Trace from the degree-`m` subfield down to the prime field. This is
    /// not the ambient trace restricted: `Tr_{amb/p} = [amb : F_{q^m}] *
    /// Tr_{F_{q^m}/p}` on the subfield, and the index can vanish mod p.
    pub fn trace_to_prime_from(&self, x: Elem, m: u32) -> Result<u64> {
        if m == self.rel_deg {
            if !self.in_level(x, m)? {
                return Err(Error::NotInSubfield(m));
            }
            return Ok(self.trace_to_prime(x));
        }
        if !self.in_level(x, m)? {
            return Err(Error::NotInSubfield(m));
        }
        let abs = self.base_deg * m;
        let mut acc = Elem::Zero;
        let mut pw = x;
        for _ in 0..abs {
            acc = self.add(acc, pw);
            pw = self.pow_by_u64(pw, self.p);
        }
        Ok(self.code_of(acc))
    }

    pub fn in_level(&self, x: Elem, m: u32) -> Result<bool> {
        let idx = self.level_index(m)?;
        Ok(match x {
            Elem::Zero => true,
            Elem::Log(j) => (j as u64) % idx == 0,
        })
    }

    /// Discrete log relative to the canonical generator of the degree-`m` subfield.
    pub fn level_log(&self, x: Elem, m: u32) -> Result<u64> {
        let idx = self.level_index(m)?;
        match x {
            Elem::Zero => Err(Error::EvalAtZero),
            Elem::Log(j) => {
                if (j as u64) % idx != 0 {
                    Err(Error::NotInSubfield(m))
                } else {
                    Ok(j as u64 / idx)
                }
            }
        }
    }

    /// Norm from the degree-`from` subfield down to the degree-`to` subfield.
    pub fn norm(&self, x: Elem, from: u32, to: u32) -> Result<Elem> {
        if to == 0 || from % to != 0 {
            return Err(Error::BadDegree(to, from));
        }
        if !self.in_level(x, from)? {
            return Err(Error::NotInSubfield(from));
        }
        match x {
            Elem::Zero => Ok(Elem::Zero),
            Elem::Log(j) => {
                let u = self.level_units(from) / self.level_units(to);
                Ok(Elem::Log(((j as u64 * u) % self.n_units) as u32))
            }
        }
    }

    /// Trace from the degree-`from` subfield down to the degree-`to` subfield.
    pub fn trace(&self, x: Elem, from: u32, to: u32) -> Result<Elem> {
        if to == 0 || from % to != 0 {
            return Err(Error::BadDegree(to, from));
        }
        if !self.in_level(x, from)? {
            return Err(Error::NotInSubfield(from));
        }
        let q_to = self.level_size(to);
        let mut acc = Elem::Zero;
        let mut pw = x;
        for _ in 0..(from / to) {
            acc = self.add(acc, pw);
            pw = self.pow_by_u64(pw, q_to);
        }
        Ok(acc)
    }

    fn pow_by_u64(&self, a: Elem, k: u64) -> Elem {
        match a {
            Elem::Zero => Elem::Zero,
            Elem::Log(j) => {
                let n = self.n_units as u128;
                Elem::Log(((j as u128 * k as u128) % n) as u32)
            }
        }
    }

    /// `x -> x^(q^to)`, the Frobenius over the degree-`to` subfield.
    pub fn frobenius(&self, x: Elem, to: u32) -> Elem {
        self.pow_by_u64(x, self.level_size(to))
    }

    /// Units of the degree-`m` subfield in generator-power order.
    pub fn level_units_iter(&self, m: u32) -> Result<impl Iterator<Item = Elem> + '_> {
        let idx = self.level_index(m)?;
        let count = self.level_units(m);
        Ok((0..count).map(move |j| Elem::Log((j * idx) as u32)))
    }

    /// All elements (zero first) of the degree-`m` subfield.
    pub fn level_elems_iter(&self, m: u32) -> Result<impl Iterator<Item = Elem> + '_> {
        let units = self.level_units_iter(m)?;
        Ok(std::iter::once(Elem::Zero).chain(units))
    }

    /// The norm-one group `N_{2m} = ker(N : F_{q^2m}^x -> F_{q^m}^x)`,
    /// cyclic of order `q^m + 1`, in generator-power order.
    pub fn norm_one_subgroup(&self, m: u32) -> Result<NormOneGroup> {
        if self.rel_deg % (2 * m) != 0 {
            return Err(Error::OddRelativeDegree(2 * m));
        }
        let idx2m = self.level_index(2 * m)?;
        let qm = self.level_size(m);
        let step = idx2m * (qm - 1);
        Ok(NormOneGroup {
            m,
            order: qm + 1,
            step,
        })
    }
}

/// The cyclic group `N_{2m}` inside a tower, generated by `g_{2m}^(q^m - 1)`.
#[derive(Clone, Copy, Debug)]
pub struct NormOneGroup {
    pub m: u32,
    pub order: u64,
    step: u64,
}

impl NormOneGroup {
    pub fn gen(&self) -> Elem {
        Elem::Log(self.step as u32)
    }
    pub fn element(&self, j: u64, tower: &Tower) -> Elem {
        Elem::Log(((self.step as u128 * (j % self.order) as u128) % tower.n_units() as u128) as u32)
    }
    pub fn iter<'a>(&'a self, tower: &'a Tower) -> impl Iterator<Item = Elem> + 'a {
        (0..self.order).map(move |j| self.element(j, tower))
    }
    /// Log of `x` relative to the group generator.
    pub fn log(&self, x: Elem, tower: &Tower) -> Result<u64> {
        match x {
            Elem::Zero => Err(Error::EvalAtZero),
            Elem::Log(j) => {
                // solve step * t = j mod n_units
                for t in 0..self.order {
                    if (self.step as u128 * t as u128) % tower.n_units() as u128 == j as u128 {
                        return Ok(t);
                    }
                }
                Err(Error::NotInSubfield(2 * self.m))
            }
        }
    }
}

/// An etale algebra: a product of subfields of one tower.
#[derive(Clone)]
pub struct EtaleAlgebra {
    pub tower: Arc<Tower>,
    /// Part degrees over the base field, `scale * lambda_i`.
    pub part_degs: Vec<u32>,
}

impl EtaleAlgebra {
    /// `E_lambda = prod F_{q^(scale*lambda_i)}` over the base `F_{p^e0}`.
    pub fn new(p: u64, base_deg: u32, lambda: &[u32], scale: u32) -> Result<EtaleAlgebra> {
        if lambda.is_empty() || lambda.contains(&0) {
            return Err(Error::UnsupportedParams(
                "partition must be non-empty with positive parts".into(),
            ));
        }
        let degs: Vec<u32> = lambda.iter().map(|&l| l * scale).collect();
        let mut k = 1u32;
        for &d in &degs {
            k = lcm(k, d);
        }
        let tower = Tower::new(p, base_deg, k)?;
        Ok(EtaleAlgebra {
            tower,
            part_degs: degs,
        })
    }

    pub fn len(&self) -> usize {
        self.part_degs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.part_degs.is_empty()
    }

    pub fn unit_order(&self) -> u64 {
        self.part_degs
            .iter()
            .map(|&d| self.tower.level_units(d))
            .product()
    }
}

pub fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `build_field(p, e)`: the standalone field `F_{p^e}` over its prime field.
pub fn build_field(p: u64, e: u32) -> Result<Arc<Tower>> {
    Tower::new(p, 1, e)
}
