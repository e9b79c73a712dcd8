//! Bases of F_{p^r} over F_p, digit sets, the product set
//! W(D_1, ..., D_r) = { c_1 a_1 + ... + c_r a_r : c_i in D_i } and its
//! subfield stratification.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{fold_range, Execution};
use crate::field::poly::{add_mod_p, inv_mod_p, mul_mod_p, sub_mod_p};
use crate::field::primes::divisors;
use crate::field::{FieldCtx, FieldElement};
use crate::rng::SeededRng;

/// Default cap on the number of elements any enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;
/// Stratum members are listed only when the tail product is at most this.
pub const STRATA_MEMBER_CAP: u64 = 4096;

/// r elements of F_{p^r} that are linearly independent over F_p.
#[derive(Clone, Debug)]
pub struct Basis {
    elements: Vec<FieldElement>,
    /// Inverse of the matrix whose rows are the basis coefficient vectors.
    inverse: Vec<Vec<u64>>,
}

impl Basis {
    /// {1, t, ..., t^(r-1)}.
    pub fn polynomial(ctx: &FieldCtx) -> Basis {
        let r = ctx.degree();
        let elements = (0..r)
            .map(|i| {
                let mut c = vec![0; r];
                c[i] = 1;
                ctx.element(c).expect("unit vector")
            })
            .collect();
        Basis::new(ctx, elements).expect("power basis is independent")
    }

    pub fn new(ctx: &FieldCtx, elements: Vec<FieldElement>) -> Result<Basis> {
        let r = ctx.degree();
        if elements.len() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: elements.len(),
            });
        }
        for a in &elements {
            ctx.check(a)?;
        }
        let rows: Vec<Vec<u64>> = elements.iter().map(|a| a.coeffs().to_vec()).collect();
        let inverse = invert_matrix(rows, ctx.p()).ok_or(Error::NotIndependent)?;
        Ok(Basis { elements, inverse })
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }

    /// Reorders the basis: element i of the result is element `order[i]` of self.
    pub fn permuted(&self, ctx: &FieldCtx, order: &[usize]) -> Result<Basis> {
        Basis::new(ctx, order.iter().map(|&i| self.elements[i].clone()).collect())
    }

    /// sum_j c_j a_j
    pub fn encode(&self, ctx: &FieldCtx, digits: &[u64]) -> Result<FieldElement> {
        if digits.len() != self.elements.len() {
            return Err(Error::DimensionMismatch {
                expected: self.elements.len(),
                got: digits.len(),
            });
        }
        Ok(digits
            .iter()
            .zip(&self.elements)
            .fold(ctx.zero(), |acc, (&c, a)| ctx.add(&acc, &ctx.scale(c, a))))
    }

    /// Coordinates of x in this basis.
    pub fn decode(&self, ctx: &FieldCtx, x: &FieldElement) -> Vec<u64> {
        let p = ctx.p();
        let r = self.elements.len();
        (0..r)
            .map(|j| {
                x.coeffs()
                    .iter()
                    .zip(&self.inverse)
                    .fold(0, |acc, (&xi, row)| add_mod_p(acc, mul_mod_p(xi, row[j], p), p))
            })
            .collect()
    }
}

/// Gauss-Jordan inversion over Z_p; `None` when singular.
fn invert_matrix(mut m: Vec<Vec<u64>>, p: u64) -> Option<Vec<Vec<u64>>> {
    let n = m.len();
    let mut inv: Vec<Vec<u64>> = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as u64).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&i| m[i][col] != 0)?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = inv_mod_p(m[col][col], p)?;
        for j in 0..n {
            m[col][j] = mul_mod_p(m[col][j], scale, p);
            inv[col][j] = mul_mod_p(inv[col][j], scale, p);
        }
        for i in 0..n {
            if i == col || m[i][col] == 0 {
                continue;
            }
            let f = m[i][col];
            for j in 0..n {
                m[i][j] = sub_mod_p(m[i][j], mul_mod_p(f, m[col][j], p), p);
                inv[i][j] = sub_mod_p(inv[i][j], mul_mod_p(f, inv[col][j], p), p);
            }
        }
    }
    Some(inv)
}

/// A nonempty set of residues in [0, p), kept sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DigitSet(Vec<u64>);

impl DigitSet {
    pub fn new(p: u64, mut digits: Vec<u64>) -> Result<DigitSet> {
        digits.sort_unstable();
        digits.dedup();
        if digits.is_empty() {
            return Err(Error::DigitSet("digit set is empty".into()));
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= p) {
            return Err(Error::DigitSet(format!("digit {d} is not below p = {p}")));
        }
        Ok(DigitSet(digits))
    }

    pub fn full(p: u64) -> DigitSet {
        DigitSet((0..p).collect())
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> u64 {
        self.0.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, d: u64) -> bool {
        self.0.binary_search(&d).is_ok()
    }
}

/// Textual digit-set description: `full`, `range:a..b` (half open),
/// `range:a..=b`, `list:3,5,7` or `random:k:seed`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DigitSetSpec {
    Full,
    Range { start: u64, end: u64 },
    List(Vec<u64>),
    Random { size: u64, seed: u64 },
}

impl DigitSetSpec {
    pub fn resolve(&self, p: u64) -> Result<DigitSet> {
        match self {
            DigitSetSpec::Full => Ok(DigitSet::full(p)),
            DigitSetSpec::Range { start, end } => {
                if end > &p {
                    return Err(Error::DigitSet(format!("range end {end} exceeds p = {p}")));
                }
                DigitSet::new(p, (*start..*end).collect())
            }
            DigitSetSpec::List(v) => DigitSet::new(p, v.clone()),
            DigitSetSpec::Random { size, seed } => {
                if *size == 0 || *size > p {
                    return Err(Error::DigitSet(format!(
                        "random subset size {size} must lie in [1, {p}]"
                    )));
                }
                DigitSet::new(p, SeededRng::new(*seed).subset(*size, p))
            }
        }
    }
}

impl fmt::Display for DigitSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigitSetSpec::Full => write!(f, "full"),
            DigitSetSpec::Range { start, end } => write!(f, "range:{start}..{end}"),
            DigitSetSpec::List(v) => {
                let items: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "list:{}", items.join(","))
            }
            DigitSetSpec::Random { size, seed } => write!(f, "random:{size}:{seed}"),
        }
    }
}

fn parse_u64(text: &str, whole: &str) -> Result<u64> {
    text.trim()
        .parse()
        .map_err(|_| Error::DigitSet(format!("bad number {text:?} in {whole:?}")))
}

impl FromStr for DigitSetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "full" {
            return Ok(DigitSetSpec::Full);
        }
        if let Some(rest) = s.strip_prefix("range:") {
            let (a, b, inclusive) = match rest.split_once("..=") {
                Some((a, b)) => (a, b, true),
                None => {
                    let (a, b) = rest
                        .split_once("..")
                        .ok_or_else(|| Error::DigitSet(format!("expected a..b in {s:?}")))?;
                    (a, b, false)
                }
            };
            let start = parse_u64(a, s)?;
            let end = parse_u64(b, s)? + inclusive as u64;
            if start >= end {
                return Err(Error::DigitSet(format!("empty range {s:?}")));
            }
            return Ok(DigitSetSpec::Range { start, end });
        }
        if let Some(rest) = s.strip_prefix("list:") {
            let v = rest
                .split(',')
                .map(|t| parse_u64(t, s))
                .collect::<Result<Vec<_>>>()?;
            return Ok(DigitSetSpec::List(v));
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let (k, seed) = rest
                .split_once(':')
                .ok_or_else(|| Error::DigitSet(format!("expected random:k:seed in {s:?}")))?;
            return Ok(DigitSetSpec::Random {
                size: parse_u64(k, s)?,
                seed: parse_u64(seed, s)?,
            });
        }
        Err(Error::DigitSet(format!("unknown digit-set form {s:?}")))
    }
}

/// Parses a list of digit-set specs separated by `;` or `,`. A comma-separated
/// bare number continues the preceding `list:`, so `list:1,2,full` is two specs.
pub fn parse_digit_specs(text: &str) -> Result<Vec<DigitSetSpec>> {
    let mut groups: Vec<String> = Vec::new();
    for token in text.split([',', ';']).map(str::trim) {
        if token.is_empty() {
            continue;
        }
        let bare_number = token.chars().all(|c| c.is_ascii_digit());
        match groups.last_mut() {
            Some(last) if bare_number && last.starts_with("list:") => {
                last.push(',');
                last.push_str(token);
            }
            _ => groups.push(token.to_string()),
        }
    }
    groups.iter().map(|g| g.parse()).collect()
}

/// A basis together with one digit set per coordinate.
#[derive(Clone, Debug)]
pub struct DigitSpec {
    basis: Basis,
    sets: Vec<DigitSet>,
}

impl DigitSpec {
    pub fn new(ctx: &FieldCtx, basis: Basis, sets: Vec<DigitSet>) -> Result<DigitSpec> {
        if sets.len() != ctx.degree() {
            return Err(Error::DimensionMismatch {
                expected: ctx.degree(),
                got: sets.len(),
            });
        }
        for s in &sets {
            if let Some(&d) = s.digits().iter().find(|&&d| d >= ctx.p()) {
                return Err(Error::DigitSet(format!("digit {d} is not below p = {}", ctx.p())));
            }
        }
        Ok(DigitSpec { basis, sets })
    }

    /// Digit sets over the power basis.
    pub fn with_polynomial_basis(ctx: &FieldCtx, sets: Vec<DigitSet>) -> Result<DigitSpec> {
        DigitSpec::new(ctx, Basis::polynomial(ctx), sets)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn sets(&self) -> &[DigitSet] {
        &self.sets
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.sets.iter().map(DigitSet::len).collect()
    }

    /// |W| = prod |D_i|, which is exact because the basis is independent.
    pub fn w_size(&self) -> u64 {
        self.sets.iter().map(DigitSet::len).product()
    }

    /// 0 lies in W iff every digit set contains 0.
    pub fn zero_in_w(&self) -> bool {
        self.sets.iter().all(|s| s.contains(0))
    }

    /// Index of the largest digit set (the first one on ties).
    pub fn largest_set(&self) -> usize {
        let max = self.sets.iter().map(DigitSet::len).max().unwrap_or(0);
        self.sets.iter().position(|s| s.len() == max).unwrap_or(0)
    }

    pub(crate) fn walker(&self, ctx: &FieldCtx) -> ProductWalker {
        ProductWalker::new(
            ctx,
            self.sets
                .iter()
                .zip(self.basis.elements())
                .map(|(s, a)| (s.digits().to_vec(), a.clone()))
                .collect(),
        )
    }

    /// Normalized tail: the digit sets off the pivot paired with
    /// b_j = a_j / a_pivot.
    pub(crate) fn tail_walker(&self, ctx: &FieldCtx, pivot: usize) -> ProductWalker {
        let inv = ctx
            .inv(&self.basis.elements()[pivot])
            .expect("basis elements are nonzero");
        ProductWalker::new(
            ctx,
            self.sets
                .iter()
                .zip(self.basis.elements())
                .enumerate()
                .filter(|&(j, _)| j != pivot)
                .map(|(_, (s, a))| (s.digits().to_vec(), ctx.mul(a, &inv)))
                .collect(),
        )
    }

    pub fn check_pivot(&self, pivot: usize) -> Result<()> {
        if pivot >= self.sets.len() {
            return Err(Error::Domain(format!(
                "pivot {} out of range 1..={}",
                pivot + 1,
                self.sets.len()
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_cap(what: &'static str, size: u128, cap: u64) -> Result<()> {
    if size > cap as u128 {
        return Err(Error::CapExceeded { what, size, cap });
    }
    Ok(())
}

/// Walks a product of digit sets in lexicographic digit order (first position
/// slowest), producing sum_j digit_j * base_j as a coefficient vector.
pub(crate) struct ProductWalker {
    p: u64,
    r: usize,
    digits: Vec<Vec<u64>>,
    /// contrib[j] holds digit * base_j for each digit of position j, flattened.
    contrib: Vec<Vec<u64>>,
}

impl ProductWalker {
    fn new(ctx: &FieldCtx, factors: Vec<(Vec<u64>, FieldElement)>) -> Self {
        let r = ctx.degree();
        let mut digits = Vec::with_capacity(factors.len());
        let mut contrib = Vec::with_capacity(factors.len());
        for (ds, base) in factors {
            let mut flat = Vec::with_capacity(ds.len() * r);
            for &d in &ds {
                flat.extend_from_slice(ctx.scale(d, &base).coeffs());
            }
            digits.push(ds);
            contrib.push(flat);
        }
        ProductWalker {
            p: ctx.p(),
            r,
            digits,
            contrib,
        }
    }

    pub(crate) fn len(&self) -> u64 {
        self.digits.iter().map(|d| d.len() as u64).product()
    }

    /// Calls `f(digit_indices, coeffs)` for each product index in `range`.
    pub(crate) fn walk<F: FnMut(&[usize], &[u64])>(&self, range: Range<u64>, mut f: F) {
        if range.is_empty() {
            return;
        }
        let n = self.digits.len();
        let r = self.r;
        let p = self.p;
        // mixed-radix decode of the start index, last position fastest
        let mut idx = vec![0usize; n];
        let mut rest = range.start;
        for j in (0..n).rev() {
            let radix = self.digits[j].len() as u64;
            idx[j] = (rest % radix) as usize;
            rest /= radix;
        }
        // prefix[j] = sum of contributions of positions < j
        let mut prefix = vec![0u64; (n + 1) * r];
        let recompute = |prefix: &mut [u64], idx: &[usize], from: usize| {
            for j in from..n {
                let (head, tail) = prefix.split_at_mut((j + 1) * r);
                let src = &head[j * r..];
                let add = &self.contrib[j][idx[j] * r..(idx[j] + 1) * r];
                for ((o, &a), &b) in tail[..r].iter_mut().zip(src).zip(add) {
                    *o = add_mod_p(a, b, p);
                }
            }
        };
        recompute(&mut prefix, &idx, 0);
        let mut remaining = range.end - range.start;
        loop {
            f(&idx, &prefix[n * r..]);
            remaining -= 1;
            if remaining == 0 {
                break;
            }
            let mut j = n;
            loop {
                j -= 1;
                idx[j] += 1;
                if idx[j] < self.digits[j].len() {
                    break;
                }
                idx[j] = 0;
            }
            recompute(&mut prefix, &idx, j);
        }
    }

    pub(crate) fn digit(&self, position: usize, index: usize) -> u64 {
        self.digits[position][index]
    }
}

/// Iterator over W in lexicographic digit order.
pub struct WIter {
    walker: ProductWalker,
    next: u64,
    len: u64,
    buffer: Vec<FieldElement>,
}

const ITER_BATCH: u64 = 1024;

impl Iterator for WIter {
    type Item = FieldElement;

    fn next(&mut self) -> Option<FieldElement> {
        if self.buffer.is_empty() {
            if self.next >= self.len {
                return None;
            }
            let end = (self.next + ITER_BATCH).min(self.len);
            let mut batch = Vec::with_capacity((end - self.next) as usize);
            self.walker
                .walk(self.next..end, |_, c| batch.push(FieldElement::from_raw(c.to_vec())));
            batch.reverse();
            self.buffer = batch;
            self.next = end;
        }
        self.buffer.pop()
    }
}

/// Streams every element of W exactly once.
pub fn enumerate_w(ctx: &FieldCtx, spec: &DigitSpec, cap: u64) -> Result<WIter> {
    check_cap("W", spec.w_size() as u128, cap)?;
    let walker = spec.walker(ctx);
    let len = walker.len();
    Ok(WIter {
        walker,
        next: 0,
        len,
        buffer: Vec::new(),
    })
}

/// One subfield stratum L_d of the tail product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stratum {
    pub d: usize,
    pub size: u64,
    /// Tail digit tuples (positions other than the pivot, in order); only
    /// filled when the tail product is small.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<Vec<u64>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrataReport {
    /// Zero-based pivot position.
    #[serde(skip)]
    pub pivot: usize,
    pub tail_size: u64,
    /// One entry per divisor d of r, ascending.
    pub strata: Vec<Stratum>,
}

impl StrataReport {
    pub fn size_of(&self, d: usize) -> u64 {
        self.strata.iter().find(|s| s.d == d).map_or(0, |s| s.size)
    }
}

/// Classifies each tail tuple (c_j)_{j != pivot} by the degree of
/// sum_j c_j a_j / a_pivot over F_p.
pub fn stratify(
    ctx: &FieldCtx,
    spec: &DigitSpec,
    pivot: usize,
    cap: u64,
    exec: Execution,
) -> Result<StrataReport> {
    spec.check_pivot(pivot)?;
    let walker = spec.tail_walker(ctx, pivot);
    let tail_size = walker.len();
    check_cap("tail product", tail_size as u128, cap)?;
    let divs = divisors(ctx.degree());
    let slot = |d: usize| divs.iter().position(|&x| x == d).expect("degree divides r");
    let keep_members = tail_size <= STRATA_MEMBER_CAP;
    type Acc = (Vec<u64>, Vec<Vec<Vec<u64>>>);
    let (sizes, members): Acc = fold_range(
        tail_size,
        exec,
        || (vec![0; divs.len()], vec![Vec::new(); divs.len()]),
        |range| {
            let mut sizes = vec![0u64; divs.len()];
            let mut members = vec![Vec::new(); divs.len()];
            walker.walk(range, |idx, coeffs| {
                let d = ctx.degree_over_prime(&FieldElement::from_raw(coeffs.to_vec()));
                let s = slot(d);
                sizes[s] += 1;
                if keep_members {
                    members[s].push(
                        idx.iter()
                            .enumerate()
                            .map(|(pos, &i)| walker.digit(pos, i))
                            .collect(),
                    );
                }
            });
            (sizes, members)
        },
        |(mut sa, mut ma), (sb, mb)| {
            for (a, b) in sa.iter_mut().zip(sb) {
                *a += b;
            }
            for (a, b) in ma.iter_mut().zip(mb) {
                a.extend(b);
            }
            (sa, ma)
        },
    );
    let strata = divs
        .iter()
        .zip(sizes)
        .zip(members)
        .map(|((&d, size), m)| Stratum {
            d,
            size,
            members: keep_members.then_some(m),
        })
        .collect();
    Ok(StrataReport {
        pivot,
        tail_size,
        strata,
    })
}
