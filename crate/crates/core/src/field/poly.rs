//! Dense polynomials over Z_p, coefficients stored constant term first.
//!
//! Only what the field constructor needs: reduction modulo a monic
//! polynomial, gcd, and Rabin's irreducibility test.

use super::primes::prime_factors;
use crate::error::{Error, Result};

#[inline]
pub(crate) fn mul_mod_p(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub(crate) fn add_mod_p(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_mod_p(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

pub(crate) fn inv_mod_p(a: u64, p: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(p as i128) as u64)
}

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

/// Remainder of `a` modulo the monic polynomial `f`.
fn rem_monic(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let r = f.len() - 1;
    let mut a = a.to_vec();
    if a.len() <= r {
        return trim(a);
    }
    for i in (r..a.len()).rev() {
        let c = a[i];
        if c == 0 {
            continue;
        }
        for j in 0..r {
            a[i - r + j] = sub_mod_p(a[i - r + j], mul_mod_p(c, f[j], p), p);
        }
        a[i] = 0;
    }
    a.truncate(r);
    trim(a)
}

/// Remainder of `a` modulo an arbitrary nonzero `b`.
fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = inv_mod_p(b[db], p).expect("p prime");
    let monic: Vec<u64> = b[..=db].iter().map(|&c| mul_mod_p(c, lead_inv, p)).collect();
    rem_monic(a, &monic, p)
}

fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = add_mod_p(out[i + j], mul_mod_p(x, y, p), p);
        }
    }
    trim(out)
}

fn mul_mod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    rem_monic(&mul(a, b, p), f, p)
}

fn pow_mod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = rem_monic(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(&acc, &b, f, p);
        }
        b = mul_mod(&b, &b, f, p);
        e >>= 1;
    }
    rem_monic(&acc, f, p)
}

fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Rabin's test: a monic `f` of degree r is irreducible iff
/// x^(p^r) = x mod f and gcd(x^(p^(r/l)) - x, f) = 1 for every prime l | r.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let r = match degree(f) {
        Some(d) if d >= 1 && f[d] == 1 && f.len() == d + 1 => d,
        _ => return false,
    };
    let x = rem_monic(&[0, 1], f, p);
    // frob[k] = x^(p^k) mod f
    let mut frob = vec![x.clone()];
    for k in 1..=r {
        let next = pow_mod(&frob[k - 1], p, f, p);
        frob.push(next);
    }
    if frob[r] != x {
        return false;
    }
    for l in prime_factors(r as u64) {
        let k = r / l as usize;
        let mut diff = frob[k].clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = sub_mod_p(diff[1], 1, p);
        let g = gcd(f, &trim(diff), p);
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// Smallest monic irreducible polynomial of degree `r` over Z_p, ordering
/// candidates by their coefficient tuple read from x^(r-1) down to the
/// constant term.
pub fn find_irreducible(p: u64, r: usize) -> Result<Vec<u64>> {
    if !super::primes::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if r == 0 {
        return Err(Error::Domain("extension degree must be at least 1".into()));
    }
    let mut f = vec![0u64; r + 1];
    f[r] = 1;
    loop {
        if is_irreducible(&f, p) {
            return Ok(f);
        }
        // odometer with the constant term as least significant digit
        let mut i = 0;
        loop {
            if i == r {
                unreachable!("every degree has an irreducible polynomial");
            }
            f[i] += 1;
            if f[i] < p {
                break;
            }
            f[i] = 0;
            i += 1;
        }
    }
}

/// Parses "c0,c1,...,cn" (constant term first).
pub fn parse_poly(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("bad polynomial coefficient {t:?} in {text:?}")))
        })
        .collect()
}

pub fn format_poly(coeffs: &[u64]) -> String {
    coeffs
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Irreducibility by searching for a monic factor of degree <= r/2.
    fn irreducible_brute(f: &[u64], p: u64) -> bool {
        let r = f.len() - 1;
        for d in 1..=r / 2 {
            let count = p.pow(d as u32);
            for n in 0..count {
                let mut g: Vec<u64> = (0..d).map(|i| (n / p.pow(i as u32)) % p).collect();
                g.push(1);
                if rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn find_irreducible_examples() {
        assert_eq!(find_irreducible(3, 1).unwrap(), vec![0, 1]);
        assert_eq!(find_irreducible(3, 2).unwrap(), vec![1, 0, 1]);
        assert_eq!(find_irreducible(5, 2).unwrap(), vec![2, 0, 1]);
        assert_eq!(find_irreducible(3, 4).unwrap(), vec![2, 1, 0, 0, 1]);
        assert_eq!(find_irreducible(17, 3).unwrap(), vec![3, 1, 0, 1]);
        assert_eq!(find_irreducible(101, 3).unwrap(), vec![1, 1, 0, 1]);
        assert_eq!(find_irreducible(9, 2), Err(Error::NotPrime(9)));
    }

    #[test]
    fn rabin_matches_factor_search() {
        for &(p, r) in &[(3u64, 2usize), (3, 3), (3, 4), (5, 2), (5, 3), (7, 2), (2, 4)] {
            let total = p.pow(r as u32);
            for n in 0..total {
                let mut f: Vec<u64> = (0..r).map(|i| (n / p.pow(i as u32)) % p).collect();
                f.push(1);
                assert_eq!(is_irreducible(&f, p), irreducible_brute(&f, p), "p={p} f={f:?}");
            }
        }
    }

    #[test]
    fn poly_text_format() {
        assert_eq!(parse_poly("1, 0,1").unwrap(), vec![1, 0, 1]);
        assert_eq!(format_poly(&[2, 0, 1]), "2,0,1");
        assert!(parse_poly("1,x").is_err());
    }

    #[test]
    fn modular_inverse() {
        assert_eq!(inv_mod_p(2, 5), Some(3));
        assert_eq!(inv_mod_p(0, 5), None);
        for a in 1..101 {
            assert_eq!(mul_mod_p(a, inv_mod_p(a, 101).unwrap(), 101), 1);
        }
    }
}
