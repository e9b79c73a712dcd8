//! Discrete logarithms to the cached generator: a full power table for small
//! fields, baby-step/giant-step above the table cap.

use std::collections::HashMap;

use super::{FieldCtx, FieldElement};

pub(crate) enum DlogTable {
    /// `table[index_of(x)]` is the exponent of x; slot 0 (the zero element) is unused.
    Full(Vec<u32>),
    Bsgs {
        step: u64,
        baby: HashMap<u64, u64>,
        giant: FieldElement,
    },
}

impl DlogTable {
    pub(crate) fn build(ctx: &FieldCtx, g: &FieldElement, table_cap: u64) -> Self {
        let order = ctx.order() - 1;
        if ctx.order() <= table_cap && ctx.order() <= u32::MAX as u64 {
            let mut table = vec![u32::MAX; ctx.order() as usize];
            let mut x = ctx.one();
            for k in 0..order {
                table[ctx.index_of(&x) as usize] = k as u32;
                x = ctx.mul(&x, g);
            }
            DlogTable::Full(table)
        } else {
            let step = (order as f64).sqrt().ceil() as u64;
            let mut baby = HashMap::with_capacity(step as usize);
            let mut x = ctx.one();
            for j in 0..step {
                baby.entry(ctx.index_of(&x)).or_insert(j);
                x = ctx.mul(&x, g);
            }
            // x = g^step here
            let giant = ctx.inv(&x).expect("generator power is nonzero");
            DlogTable::Bsgs { step, baby, giant }
        }
    }

    pub(crate) fn log(&self, ctx: &FieldCtx, x: &FieldElement) -> u64 {
        match self {
            DlogTable::Full(table) => table[ctx.index_of(x) as usize] as u64,
            DlogTable::Bsgs { step, baby, giant } => {
                let mut y = x.clone();
                for i in 0..*step {
                    if let Some(&j) = baby.get(&ctx.index_of(&y)) {
                        return (i * step + j) % (ctx.order() - 1);
                    }
                    y = ctx.mul(&y, giant);
                }
                unreachable!("every nonzero element is a power of the generator")
            }
        }
    }
}
