//! Exact |W ∩ Q| and |W ∩ Q_0|, by direct enumeration and by the
//! character-sum identity
//!
//!   |W ∩ Q| = (|W| - [0 ∈ W] + Σ_{x∈W} χ(x)) / 2.

use serde::Serialize;

use crate::digits::{check_cap, DigitSpec};
use crate::error::{Error, Result};
use crate::exact::{as_string, HalfInt};
use crate::exec::{fold_range, Execution};
use crate::field::FieldCtx;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountReport {
    #[serde(serialize_with = "as_string")]
    pub w_size: u64,
    /// Nonzero squares in W.
    #[serde(serialize_with = "as_string")]
    pub squares: u64,
    /// Squares including zero (|W ∩ Q_0|).
    #[serde(serialize_with = "as_string")]
    pub squares_with_zero: u64,
    #[serde(serialize_with = "as_string")]
    pub nonsquares: u64,
    #[serde(serialize_with = "as_string")]
    pub char_sum: i64,
    pub zero_in_w: bool,
    /// | |W ∩ Q| - |W|/2 |
    pub deviation: HalfInt,
}

impl CountReport {
    fn assemble(w_size: u64, squares: u64, nonsquares: u64, char_sum: i64, zero_in_w: bool) -> Self {
        CountReport {
            w_size,
            squares,
            squares_with_zero: squares + zero_in_w as u64,
            nonsquares,
            char_sum,
            zero_in_w,
            deviation: HalfInt::from_twice((2 * squares).abs_diff(w_size)),
        }
    }

    /// Slack check from the counting identity: deviation <= 1/2 + |char_sum|/2, exactly.
    pub fn deviation_within_char_sum(&self) -> bool {
        self.deviation.twice <= 1 + self.char_sum.unsigned_abs()
    }
}

#[derive(Clone, Copy, Default)]
struct Tally {
    squares: u64,
    nonsquares: u64,
    zeros: u64,
}

/// Counts squares by evaluating χ on every element of W.
pub fn count_squares_enum(
    ctx: &FieldCtx,
    spec: &DigitSpec,
    cap: u64,
    exec: Execution,
) -> Result<CountReport> {
    let w_size = spec.w_size();
    check_cap("W", w_size as u128, cap)?;
    let walker = spec.walker(ctx);
    let chi = ctx.chi_evaluator(w_size as u128);
    let tally = fold_range(
        w_size,
        exec,
        Tally::default,
        |range| {
            let mut t = Tally::default();
            walker.walk(range, |_, x| match chi.eval(x) {
                1 => t.squares += 1,
                -1 => t.nonsquares += 1,
                _ => t.zeros += 1,
            });
            t
        },
        |a, b| Tally {
            squares: a.squares + b.squares,
            nonsquares: a.nonsquares + b.nonsquares,
            zeros: a.zeros + b.zeros,
        },
    );
    debug_assert_eq!(tally.squares + tally.nonsquares + tally.zeros, w_size);
    let char_sum = tally.squares as i64 - tally.nonsquares as i64;
    Ok(CountReport::assemble(
        w_size,
        tally.squares,
        tally.nonsquares,
        char_sum,
        tally.zeros > 0,
    ))
}

/// Σ_{x∈W} χ(x), exactly.
pub fn char_sum(ctx: &FieldCtx, spec: &DigitSpec, cap: u64, exec: Execution) -> Result<i64> {
    let w_size = spec.w_size();
    check_cap("W", w_size as u128, cap)?;
    let walker = spec.walker(ctx);
    let chi = ctx.chi_evaluator(w_size as u128);
    Ok(fold_range(
        w_size,
        exec,
        || 0i64,
        |range| {
            let mut s = 0i64;
            walker.walk(range, |_, x| s += chi.eval(x) as i64);
            s
        },
        |a, b| a + b,
    ))
}

/// Counts squares from the character sum alone, with 0 ∈ W decided from the
/// digit sets.
pub fn count_squares_identity(
    ctx: &FieldCtx,
    spec: &DigitSpec,
    cap: u64,
    exec: Execution,
) -> Result<CountReport> {
    let w_size = spec.w_size();
    let s = char_sum(ctx, spec, cap, exec)?;
    let zero_in_w = spec.zero_in_w();
    let twice = (w_size - zero_in_w as u64) as i64 + s;
    if twice < 0 || twice % 2 != 0 {
        return Err(Error::ParityViolation(format!(
            "|W| - [0 in W] + S = {twice} is not a nonnegative even integer"
        )));
    }
    let squares = (twice / 2) as u64;
    let nonzero = w_size - zero_in_w as u64;
    if squares > nonzero {
        return Err(Error::ParityViolation(format!(
            "identity gives {squares} squares among {nonzero} nonzero elements"
        )));
    }
    Ok(CountReport::assemble(w_size, squares, nonzero - squares, s, zero_in_w))
}
