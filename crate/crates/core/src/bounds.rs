//! Closed-form bounds and thresholds.
//!
//! The main bound is
//!
//! ```text
//! | |W ∩ Q| - |W|/2 | <= ( |W|^(1-1/(2r)) p^(1/4) (2r-1)^(1/2)
//!                         + |W|^(1/(2r)) (p^(3/4) r^(3/2) / 4 + p^(1/2)) + 1 ) / 2
//! ```
//!
//! alongside the earlier equal-digit-set bound, the digit-set size thresholds
//! that guarantee a square, and the two corollary predicates. Predicates that
//! gate end-to-end checks are decided in exact integer arithmetic wherever
//! the exponents allow it.

use serde::Serialize;

use crate::counting::CountReport;
use crate::error::{Error, Result};
use crate::exact::HalfInt;
use crate::field::primes::is_prime;

/// Absolute float slack allowed when comparing an exact deviation with a
/// floating-point bound.
pub const BOUND_SLACK: f64 = 1e-6;

fn check_field(p: u64, r: usize) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::Domain(format!("p = {p} must be an odd prime")));
    }
    if r < 2 {
        return Err(Error::Domain(format!("r = {r} must be at least 2")));
    }
    Ok(())
}

fn field_order(p: u64, r: usize) -> Option<u128> {
    (p as u128).checked_pow(r as u32)
}

/// Right-hand side of the main bound for |W| = `w_size`.
pub fn bound_main(p: u64, r: usize, w_size: u64) -> Result<f64> {
    check_field(p, r)?;
    if w_size == 0 || field_order(p, r).is_some_and(|q| w_size as u128 > q) {
        return Err(Error::Domain(format!("|W| = {w_size} must lie in [1, p^r]")));
    }
    let (pf, rf, w) = (p as f64, r as f64, w_size as f64);
    let lead = w.powf(1.0 - 1.0 / (2.0 * rf)) * pf.powf(0.25) * (2.0 * rf - 1.0).sqrt();
    let tail = w.powf(1.0 / (2.0 * rf)) * (0.25 * pf.powf(0.75) * rf.powf(1.5) + pf.sqrt());
    Ok(0.5 * (lead + tail + 1.0))
}

/// The equal-digit-set bound (|D| + p sqrt(p - |D|))^r / (2 sqrt(q)),
/// defined for 2 <= |D| <= p - 1.
pub fn bound_dms(p: u64, r: usize, d_size: u64) -> Result<f64> {
    check_field(p, r)?;
    if d_size < 2 || d_size + 1 > p {
        return Err(Error::Domain(format!(
            "|D| = {d_size} must lie in [2, p - 1] = [2, {}]",
            p - 1
        )));
    }
    let (pf, rf) = (p as f64, r as f64);
    let base = d_size as f64 + pf * ((p - d_size) as f64).sqrt();
    Ok(base.powf(rf) / (2.0 * pf.powf(rf / 2.0)))
}

/// Digit-set size threshold (1 + delta)(2r - 1) p^(1/2), delta =
/// (sqrt(p)(2r - 1))^(2 - r), valid when 2r - 1 <= sqrt(p).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EqualSetThreshold {
    pub applicable: bool,
    pub delta: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriorThresholds {
    pub thm_b: EqualSetThreshold,
    /// Only defined for r >= 20.
    pub thm_c: Option<f64>,
}

pub fn thresholds_prior(p: u64, r: usize) -> Result<PriorThresholds> {
    check_field(p, r)?;
    let (pf, rf) = (p as f64, r as f64);
    let k = 2 * r as u64 - 1;
    let applicable = (k as u128) * (k as u128) <= p as u128;
    let delta = (pf.sqrt() * k as f64).powf(2.0 - rf);
    let thm_b = EqualSetThreshold {
        applicable,
        delta,
        threshold: (1.0 + delta) * k as f64 * pf.sqrt(),
    };
    let thm_c = (r >= 20).then(|| {
        let c = ((4.0 * rf.ln() + 8.0) / rf).exp();
        c * pf.sqrt() * ((pf.ln() + 4.0 * pf.ln().ln()) / rf).exp()
    });
    Ok(PriorThresholds { thm_b, thm_c })
}

/// Explicit relative-deviation budget implied by the main bound under the
/// first corollary's size hypothesis: p^(-eps/2) + r^(2-r) p^(1-r/2)
/// p^(-(2r-1) eps/2). The absolute constant in front is not specified; the
/// budget takes it to be 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Corollary1Budget {
    pub leading: f64,
    pub secondary: f64,
    pub total: f64,
    /// bound_main(p, r, prod) / prod, the tighter value it is derived from.
    pub theorem_relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Corollary1 {
    pub eps: f64,
    pub threshold: f64,
    pub holds: bool,
    pub budget: Option<Corollary1Budget>,
}

/// prod >= (2r - 1)^r p^(r (1/2 + eps)), compared in log space.
pub fn corollary1_check(p: u64, r: usize, eps: f64, prod: u64) -> Result<Corollary1> {
    check_field(p, r)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps = {eps} must be positive")));
    }
    let (pf, rf) = (p as f64, r as f64);
    let log_threshold = rf * (2.0 * rf - 1.0).ln() + rf * (0.5 + eps) * pf.ln();
    let holds = prod > 0 && (prod as f64).ln() >= log_threshold;
    let budget = if holds {
        let leading = pf.powf(-eps / 2.0);
        let secondary =
            rf.powf(2.0 - rf) * pf.powf(1.0 - rf / 2.0) * pf.powf(-(2.0 * rf - 1.0) * eps / 2.0);
        let theorem_relative = match field_order(p, r) {
            Some(q) if prod as u128 <= q => bound_main(p, r, prod)? / prod as f64,
            _ => f64::NAN,
        };
        Some(Corollary1Budget {
            leading,
            secondary,
            total: leading + secondary,
            theorem_relative,
        })
    } else {
        None
    };
    Ok(Corollary1 {
        eps,
        threshold: log_threshold.exp(),
        holds,
        budget,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Corollary2 {
    pub threshold: f64,
    /// The threshold as an integer when r is even.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_as_string")]
    pub exact_threshold: Option<u128>,
    pub holds: bool,
}

fn opt_as_string<S: serde::Serializer>(v: &Option<u128>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.collect_str(x),
        None => s.serialize_none(),
    }
}

/// prod >= 8 (2r - 1)^r p^(r/2), decided exactly: as integers for even r,
/// after squaring both sides for odd r. Overflowing thresholds exceed any
/// realizable product and make the predicate false.
pub fn corollary2_check(p: u64, r: usize, prod: u64) -> Result<Corollary2> {
    check_field(p, r)?;
    let k = 2 * r as u128 - 1;
    let threshold = 8.0 * (k as f64).powi(r as i32) * (p as f64).powf(r as f64 / 2.0);
    let (exact_threshold, holds) = if r.is_multiple_of(2) {
        let t = k
            .checked_pow(r as u32)
            .and_then(|x| x.checked_mul((p as u128).checked_pow(r as u32 / 2)?))
            .and_then(|x| x.checked_mul(8));
        (t, t.is_some_and(|t| prod as u128 >= t))
    } else {
        let t2 = k
            .checked_pow(2 * r as u32)
            .and_then(|x| x.checked_mul((p as u128).checked_pow(r as u32)?))
            .and_then(|x| x.checked_mul(64));
        let lhs = (prod as u128) * (prod as u128);
        (None, t2.is_some_and(|t2| lhs >= t2))
    };
    Ok(Corollary2 {
        threshold,
        exact_threshold,
        holds,
    })
}

/// deviation <= bound + [`BOUND_SLACK`], slack on the float side only.
pub fn within_bound(deviation: HalfInt, bound: f64) -> bool {
    deviation.as_f64() <= bound + BOUND_SLACK
}

/// Every bound and predicate for one instance, with soundness verdicts when
/// an exact count is available.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub p: u64,
    pub r: usize,
    #[serde(serialize_with = "crate::exact::as_string")]
    pub w_size: u64,
    pub main_bound: f64,
    /// Only when all digit sets are equal with 2 <= |D| <= p - 1.
    pub dms_bound: Option<f64>,
    pub prior: PriorThresholds,
    pub corollary1: Corollary1,
    pub corollary2: Corollary2,
    pub actual_deviation: Option<HalfInt>,
    /// |squares/|W| - 1/2|
    pub observed_relative_deviation: Option<f64>,
    pub main_bound_holds: Option<bool>,
    pub corollary1_sound: Option<bool>,
    pub corollary2_sound: Option<bool>,
}

impl BoundReport {
    /// False only when some evaluated soundness check failed.
    pub fn all_sound(&self) -> bool {
        [self.main_bound_holds, self.corollary1_sound, self.corollary2_sound]
            .iter()
            .all(|v| v.unwrap_or(true))
    }
}

/// `equal_set_size` is |D| when all digit sets coincide.
pub fn bound_report(
    p: u64,
    r: usize,
    w_size: u64,
    equal_set_size: Option<u64>,
    eps: f64,
    count: Option<&CountReport>,
) -> Result<BoundReport> {
    let main_bound = bound_main(p, r, w_size)?;
    let dms_bound = equal_set_size.and_then(|d| bound_dms(p, r, d).ok());
    let corollary1 = corollary1_check(p, r, eps, w_size)?;
    let corollary2 = corollary2_check(p, r, w_size)?;
    let observed = count.map(|c| c.deviation.as_f64() / c.w_size as f64);
    let main_bound_holds = count.map(|c| within_bound(c.deviation, main_bound));
    let corollary1_sound = match (&corollary1.budget, observed) {
        (Some(b), Some(o)) => Some(o <= b.total + BOUND_SLACK),
        _ => None,
    };
    let corollary2_sound = match count {
        Some(c) if corollary2.holds => Some(c.squares >= 1),
        _ => None,
    };
    Ok(BoundReport {
        p,
        r,
        w_size,
        main_bound,
        dms_bound,
        prior: thresholds_prior(p, r)?,
        corollary1,
        corollary2,
        actual_deviation: count.map(|c| c.deviation),
        observed_relative_deviation: observed,
        main_bound_holds,
        corollary1_sound,
        corollary2_sound,
    })
}
