//! Arithmetic in F_p and F_{p^r} with the polynomial basis of a fixed
//! irreducible modulus, plus the Frobenius/subfield structure and the
//! multiplicative characters used by the counting and diagnostics modules.
//!
//! A [`FieldCtx`] is immutable once built. The generator, discrete-log table
//! and quadratic-character table are computed lazily on first use and then
//! frozen, so a context can be shared freely across threads.

mod dlog;
pub mod poly;
pub mod primes;

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use dlog::DlogTable;
use poly::{add_mod_p, inv_mod_p, mul_mod_p, sub_mod_p};

/// Largest field order accepted by [`FieldCtx`].
pub const FIELD_ORDER_CAP: u64 = 1 << 40;
/// Above this order discrete logs switch from a full table to baby-step/giant-step.
pub const DEFAULT_DLOG_TABLE_CAP: u64 = 1 << 24;
/// Largest order for which a quadratic-character lookup table is built.
pub const CHI_TABLE_CAP: u64 = 1 << 25;

/// An element of F_{p^r}: r residues in the polynomial basis of the modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    coeffs: Vec<u64>,
}

impl FieldElement {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub(crate) fn from_raw(coeffs: Vec<u64>) -> Self {
        FieldElement { coeffs }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&poly::format_poly(&self.coeffs))
    }
}

impl Serialize for FieldElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FieldElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        poly::parse_poly(&text)
            .map(FieldElement::from_raw)
            .map_err(serde::de::Error::custom)
    }
}

/// Value of a multiplicative character of order `order`: either the zero
/// flag or the exponent k of the root of unity exp(2 pi i k / order).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CharValue {
    Zero,
    Root { index: u64, order: u64 },
}

impl CharValue {
    /// Maps an order-2 value onto {-1, 0, +1}.
    pub fn as_quadratic(&self) -> Option<i8> {
        match *self {
            CharValue::Zero => Some(0),
            CharValue::Root { index: 0, order: 2 } => Some(1),
            CharValue::Root { index: 1, order: 2 } => Some(-1),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

pub struct FieldCtx {
    p: u64,
    r: usize,
    q: u64,
    modulus: Vec<u64>,
    /// p^i for i < r, used to index elements as base-p integers.
    radix: Vec<u64>,
    /// Row i holds (t^p)^i, so x^p = sum_i x_i * frob_rows[i].
    frob_rows: Vec<Vec<u64>>,
    dlog_table_cap: u64,
    generator: OnceLock<FieldElement>,
    dlog: OnceLock<DlogTable>,
    chi_table: OnceLock<Vec<i8>>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("modulus", &self.modulus)
            .field("generator", &self.generator.get())
            .finish()
    }
}

impl FieldCtx {
    /// F_{p^r} with the smallest monic irreducible modulus.
    pub fn new(p: u64, r: usize) -> Result<Self> {
        Self::make(p, r, None)
    }

    pub fn with_modulus(p: u64, r: usize, modulus: &[u64]) -> Result<Self> {
        Self::make(p, r, Some(modulus))
    }

    pub fn make(p: u64, r: usize, modulus: Option<&[u64]>) -> Result<Self> {
        if p == 2 {
            return Err(Error::EvenCharacteristic);
        }
        if !primes::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if r == 0 {
            return Err(Error::Domain("extension degree must be at least 1".into()));
        }
        let q = checked_order(p, r).ok_or(Error::FieldTooLarge {
            p,
            r,
            cap: FIELD_ORDER_CAP,
        })?;
        let modulus = match modulus {
            Some(m) => {
                if m.len() != r + 1 || m[r] != 1 {
                    return Err(Error::InvalidModulus(format!(
                        "{} is not a monic polynomial of degree {r}",
                        poly::format_poly(m)
                    )));
                }
                if let Some(&c) = m.iter().find(|&&c| c >= p) {
                    return Err(Error::UnreducedCoefficient(c));
                }
                if !poly::is_irreducible(m, p) {
                    return Err(Error::NotIrreducible(poly::format_poly(m)));
                }
                m.to_vec()
            }
            None => poly::find_irreducible(p, r)?,
        };
        let radix = (0..r).map(|i| p.pow(i as u32)).collect();
        let mut ctx = FieldCtx {
            p,
            r,
            q,
            modulus,
            radix,
            frob_rows: Vec::new(),
            dlog_table_cap: DEFAULT_DLOG_TABLE_CAP,
            generator: OnceLock::new(),
            dlog: OnceLock::new(),
            chi_table: OnceLock::new(),
        };
        let t_p = ctx.pow(&ctx.root(), p);
        let mut rows = Vec::with_capacity(r);
        let mut acc = ctx.one();
        for _ in 0..r {
            rows.push(acc.coeffs.clone());
            acc = ctx.mul(&acc, &t_p);
        }
        ctx.frob_rows = rows;
        Ok(ctx)
    }

    /// Fixes the generator used by discrete logs and order-s characters.
    pub fn with_generator(self, g: FieldElement) -> Result<Self> {
        self.check(&g)?;
        if !self.is_primitive(&g) {
            return Err(Error::Domain(format!(
                "{g} does not have multiplicative order {}",
                self.q - 1
            )));
        }
        let ctx = FieldCtx {
            generator: OnceLock::from(g),
            dlog: OnceLock::new(),
            ..self
        };
        Ok(ctx)
    }

    pub fn with_dlog_table_cap(self, cap: u64) -> Self {
        FieldCtx {
            dlog_table_cap: cap,
            dlog: OnceLock::new(),
            ..self
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.r
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Validates coefficient count and reduction.
    pub fn element(&self, coeffs: Vec<u64>) -> Result<FieldElement> {
        let x = FieldElement::from_raw(coeffs);
        self.check(&x)?;
        Ok(x)
    }

    pub fn check(&self, x: &FieldElement) -> Result<()> {
        if x.coeffs.len() != self.r {
            return Err(Error::DimensionMismatch {
                expected: self.r,
                got: x.coeffs.len(),
            });
        }
        if let Some(&c) = x.coeffs.iter().find(|&&c| c >= self.p) {
            return Err(Error::UnreducedCoefficient(c));
        }
        Ok(())
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::from_raw(vec![0; self.r])
    }

    pub fn one(&self) -> FieldElement {
        self.from_prime(1)
    }

    /// Embeds a residue of the prime field.
    pub fn from_prime(&self, c: u64) -> FieldElement {
        let mut coeffs = vec![0; self.r];
        coeffs[0] = c % self.p;
        FieldElement::from_raw(coeffs)
    }

    /// The residue class t of x modulo the modulus.
    pub fn root(&self) -> FieldElement {
        if self.r == 1 {
            // t is the root of x + m0, i.e. -m0
            return self.from_prime(sub_mod_p(0, self.modulus[0], self.p));
        }
        let mut coeffs = vec![0; self.r];
        coeffs[1] = 1;
        FieldElement::from_raw(coeffs)
    }

    /// The element's coefficient vector read as a base-p integer in [0, q).
    pub fn index_of(&self, x: &FieldElement) -> u64 {
        self.index_of_coeffs(&x.coeffs)
    }

    #[inline]
    pub(crate) fn index_of_coeffs(&self, coeffs: &[u64]) -> u64 {
        coeffs.iter().zip(&self.radix).map(|(&c, &w)| c * w).sum()
    }

    pub fn element_at(&self, mut index: u64) -> FieldElement {
        let coeffs = (0..self.r)
            .map(|_| {
                let c = index % self.p;
                index /= self.p;
                c
            })
            .collect();
        FieldElement::from_raw(coeffs)
    }

    /// All q elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |i| self.element_at(i))
    }

    pub fn add(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(&a, &b)| add_mod_p(a, b, self.p))
            .collect();
        FieldElement::from_raw(coeffs)
    }

    pub fn sub(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(&a, &b)| sub_mod_p(a, b, self.p))
            .collect();
        FieldElement::from_raw(coeffs)
    }

    pub fn neg(&self, x: &FieldElement) -> FieldElement {
        self.sub(&self.zero(), x)
    }

    /// Multiplies by a prime-field scalar.
    pub fn scale(&self, c: u64, x: &FieldElement) -> FieldElement {
        let c = c % self.p;
        FieldElement::from_raw(x.coeffs.iter().map(|&a| mul_mod_p(a, c, self.p)).collect())
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let (p, r) = (self.p, self.r);
        let mut prod = vec![0u64; 2 * r - 1];
        for (i, &a) in x.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in y.coeffs.iter().enumerate() {
                prod[i + j] = add_mod_p(prod[i + j], mul_mod_p(a, b, p), p);
            }
        }
        for i in (r..2 * r - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for j in 0..r {
                prod[i - r + j] = sub_mod_p(prod[i - r + j], mul_mod_p(c, self.modulus[j], p), p);
            }
        }
        prod.truncate(r);
        FieldElement::from_raw(prod)
    }

    /// Checked binary operation on elements that may come from elsewhere.
    pub fn arith(&self, op: ArithOp, x: &FieldElement, y: &FieldElement) -> Result<FieldElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(match op {
            ArithOp::Add => self.add(x, y),
            ArithOp::Sub => self.sub(x, y),
            ArithOp::Mul => self.mul(x, y),
        })
    }

    pub fn pow(&self, x: &FieldElement, mut e: u64) -> FieldElement {
        let mut acc = self.one();
        let mut base = x.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Inverse as x^(q-2).
    pub fn inv(&self, x: &FieldElement) -> Result<FieldElement> {
        if x.is_zero() {
            return Err(Error::ZeroInverse);
        }
        if self.r == 1 {
            let c = inv_mod_p(x.coeffs[0], self.p).ok_or(Error::ZeroInverse)?;
            return Ok(self.from_prime(c));
        }
        Ok(self.pow(x, self.q - 2))
    }

    /// x^(p^k), applying the (linear) p-th power map k times.
    pub fn frobenius(&self, x: &FieldElement, k: usize) -> FieldElement {
        let mut y = x.clone();
        for _ in 0..k % self.r {
            y = self.frobenius_once(&y);
        }
        y
    }

    fn frobenius_once(&self, x: &FieldElement) -> FieldElement {
        let p = self.p;
        let mut out = vec![0u64; self.r];
        for (&c, row) in x.coeffs.iter().zip(&self.frob_rows) {
            if c == 0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(row) {
                *o = add_mod_p(*o, mul_mod_p(c, v, p), p);
            }
        }
        FieldElement::from_raw(out)
    }

    /// Smallest d with x^(p^d) = x; x generates F_{p^d} and d divides r.
    pub fn degree_over_prime(&self, x: &FieldElement) -> usize {
        let mut y = self.frobenius_once(x);
        let mut d = 1;
        while &y != x {
            y = self.frobenius_once(&y);
            d += 1;
        }
        debug_assert_eq!(self.r % d, 0);
        d
    }

    /// The Frobenius orbit of x, without repetition.
    pub fn conjugates(&self, x: &FieldElement) -> Vec<FieldElement> {
        let mut orbit = vec![x.clone()];
        let mut y = self.frobenius_once(x);
        while &y != x {
            let next = self.frobenius_once(&y);
            orbit.push(y);
            y = next;
        }
        orbit
    }

    pub fn are_conjugate(&self, x: &FieldElement, y: &FieldElement) -> bool {
        let mut z = x.clone();
        for _ in 0..self.r {
            if &z == y {
                return true;
            }
            z = self.frobenius_once(&z);
        }
        false
    }

    /// Euler's criterion: x^((q-1)/2) is +1 for squares, -1 otherwise, and
    /// chi(0) = 0.
    pub fn quadratic_char(&self, x: &FieldElement) -> i8 {
        self.quadratic_char_coeffs(&x.coeffs)
    }

    pub(crate) fn quadratic_char_coeffs(&self, coeffs: &[u64]) -> i8 {
        if coeffs.iter().all(|&c| c == 0) {
            return 0;
        }
        let x = FieldElement::from_raw(coeffs.to_vec());
        let e = self.pow(&x, (self.q - 1) / 2);
        if e.coeffs[1..].iter().any(|&c| c != 0) {
            panic!("x^((q-1)/2) = {e} is not in the prime field");
        }
        match e.coeffs[0] {
            1 => 1,
            c if c == self.p - 1 => -1,
            c => panic!("x^((q-1)/2) = {c} is neither 1 nor -1"),
        }
    }

    /// Quadratic-character lookup table indexed by [`FieldCtx::index_of`],
    /// built by marking every square y^2. `None` above [`CHI_TABLE_CAP`].
    pub fn chi_table(&self) -> Option<&[i8]> {
        if self.q > CHI_TABLE_CAP {
            return None;
        }
        Some(self.chi_table.get_or_init(|| {
            let mut table = vec![-1i8; self.q as usize];
            table[0] = 0;
            // y and -y have the same square, so half the nonzero elements suffice
            let mut visited = 0u64;
            for i in 1..self.q {
                let y = self.element_at(i);
                let idx = self.index_of(&self.mul(&y, &y)) as usize;
                if table[idx] != 1 {
                    table[idx] = 1;
                    visited += 1;
                    if visited == (self.q - 1) / 2 {
                        break;
                    }
                }
            }
            table
        }))
    }

    /// A quadratic-character evaluator that uses the lookup table when the
    /// expected number of evaluations makes building it worthwhile.
    pub fn chi_evaluator(&self, expected_evals: u128) -> ChiEval<'_> {
        let table = if self.q <= CHI_TABLE_CAP
            && (self.chi_table.get().is_some() || expected_evals.saturating_mul(8) >= self.q as u128)
        {
            self.chi_table()
        } else {
            None
        };
        ChiEval { ctx: self, table }
    }

    fn is_primitive(&self, g: &FieldElement) -> bool {
        if g.is_zero() {
            return false;
        }
        let n = self.q - 1;
        let one = self.one();
        primes::prime_factors(n)
            .into_iter()
            .all(|l| self.pow(g, n / l) != one)
    }

    /// A generator of the multiplicative group: the first primitive element in
    /// index order, cached after the first call.
    pub fn generator(&self) -> &FieldElement {
        self.generator.get_or_init(|| {
            (1..self.q)
                .map(|i| self.element_at(i))
                .find(|g| self.is_primitive(g))
                .expect("the multiplicative group is cyclic")
        })
    }

    /// The unique k in [0, q-1) with generator^k = x.
    pub fn discrete_log(&self, x: &FieldElement) -> Result<u64> {
        self.check(x)?;
        if x.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let table = self
            .dlog
            .get_or_init(|| DlogTable::build(self, self.generator(), self.dlog_table_cap));
        Ok(table.log(self, x))
    }

    /// chi_s(g^k) = zeta_s^(k mod s) for the cached generator g.
    pub fn mult_char(&self, s: u64, x: &FieldElement) -> Result<CharValue> {
        if s < 2 || !(self.q - 1).is_multiple_of(s) {
            return Err(Error::OrderDoesNotDivide {
                s,
                q_minus_one: self.q - 1,
            });
        }
        if x.is_zero() {
            return Ok(CharValue::Zero);
        }
        let k = self.discrete_log(x)?;
        Ok(CharValue::Root {
            index: k % s,
            order: s,
        })
    }

    /// Evaluates a polynomial with prime-field coefficients (constant first) at x.
    pub fn eval_poly(&self, coeffs: &[u64], x: &FieldElement) -> FieldElement {
        coeffs.iter().rev().fold(self.zero(), |acc, &c| {
            self.add(&self.mul(&acc, x), &self.from_prime(c))
        })
    }

    /// An isomorphism from `self` into `other` (same p and r), given by the
    /// smallest root in `other` of this field's modulus. Brute-force search.
    pub fn embedding_into(&self, other: &FieldCtx) -> Result<FieldEmbedding> {
        if self.p != other.p || self.r != other.r {
            return Err(Error::Domain("fields have different orders".into()));
        }
        let image = other
            .elements()
            .find(|u| other.eval_poly(&self.modulus, u).is_zero())
            .ok_or_else(|| Error::NotIrreducible(poly::format_poly(&self.modulus)))?;
        Ok(FieldEmbedding { image_of_root: image })
    }
}

/// Image of the root t of the source modulus in the target field.
#[derive(Clone, Debug)]
pub struct FieldEmbedding {
    pub image_of_root: FieldElement,
}

impl FieldEmbedding {
    pub fn map(&self, target: &FieldCtx, x: &FieldElement) -> FieldElement {
        target.eval_poly(x.coeffs(), &self.image_of_root)
    }
}

/// Quadratic character evaluated on raw coefficient slices.
#[derive(Clone, Copy)]
pub struct ChiEval<'a> {
    ctx: &'a FieldCtx,
    table: Option<&'a [i8]>,
}

impl ChiEval<'_> {
    #[inline]
    pub fn eval(&self, coeffs: &[u64]) -> i8 {
        match self.table {
            Some(t) => t[self.ctx.index_of_coeffs(coeffs) as usize],
            None => self.ctx.quadratic_char_coeffs(coeffs),
        }
    }

    /// chi(c + y) for a prime-field residue c.
    #[inline]
    pub fn eval_shifted(&self, c: u64, coeffs: &[u64]) -> i8 {
        let p = self.ctx.p;
        match self.table {
            Some(t) => {
                let idx = self.ctx.index_of_coeffs(coeffs) - coeffs[0] + add_mod_p(coeffs[0], c, p);
                t[idx as usize]
            }
            None => {
                let mut v = coeffs.to_vec();
                v[0] = add_mod_p(v[0], c, p);
                self.ctx.quadratic_char_coeffs(&v)
            }
        }
    }

    pub fn uses_table(&self) -> bool {
        self.table.is_some()
    }
}

fn checked_order(p: u64, r: usize) -> Option<u64> {
    let mut q: u64 = 1;
    for _ in 0..r {
        q = q.checked_mul(p)?;
        if q > FIELD_ORDER_CAP {
            return None;
        }
    }
    Some(q)
}
