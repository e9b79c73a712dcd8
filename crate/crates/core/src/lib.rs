//! Squares in digit-restricted subsets of finite fields.
//!
//! For a basis a_1, ..., a_r of F_{p^r} over F_p and digit sets
//! D_1, ..., D_r of residues mod p, the set
//! W = { c_1 a_1 + ... + c_r a_r : c_i in D_i } is enumerated exactly, its
//! squares are counted two independent ways, and the count is compared with
//! explicit character-sum bounds. [`diagnostics`] evaluates each inequality
//! of the underlying second-moment argument on concrete instances.

pub mod bounds;
pub mod counting;
pub mod diagnostics;
pub mod digits;
pub mod error;
pub mod exact;
pub mod exec;
pub mod field;
pub mod harness;
pub mod rng;

pub use digits::{Basis, DigitSet, DigitSetSpec, DigitSpec};
pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{CharValue, FieldCtx, FieldElement};
