//! Cartesian sweeps over (p, r, digit-set family, size) and over Lemma pair
//! families, emitted as flat CSV in deterministic order.

use std::io::Write;

use serde::Serialize;

use super::config::{Family, LemmaConfig, PivotPolicy, SweepConfig};
use super::instance::{run_instance, Instance};
use crate::diagnostics::{lemma_sweep, PairSelection};
use crate::digits::DigitSetSpec;
use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::field::FieldCtx;
use crate::rng::derive_seed;

/// One CSV row per instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub p: u64,
    pub r: usize,
    pub family: String,
    pub size_k: Option<u64>,
    pub rep: Option<u64>,
    pub digits: String,
    pub sizes: String,
    pub w_size: Option<u64>,
    pub squares: Option<u64>,
    pub char_sum: Option<i64>,
    pub deviation: Option<f64>,
    pub bound_main: Option<f64>,
    pub dms_bound: Option<f64>,
    pub cor1: Option<bool>,
    pub cor2: Option<bool>,
    pub theorem_ok: Option<bool>,
    pub identity_ok: Option<bool>,
    pub chain_pass: Option<bool>,
    pub all_pass: Option<bool>,
    pub error: Option<String>,
}

pub const SUMMARY_HEADER: &[&str] = &[
    "p", "r", "family", "size_k", "rep", "digits", "sizes", "w_size", "squares", "char_sum",
    "deviation", "bound_main", "dms_bound", "cor1", "cor2", "theorem_ok", "identity_ok",
    "chain_pass", "all_pass", "error",
];

impl SummaryRow {
    fn failed(p: u64, r: usize, planned: &PlannedInstance, err: &Error) -> Self {
        SummaryRow {
            p,
            r,
            family: planned.family_label.clone(),
            size_k: planned.size_k,
            rep: planned.rep,
            digits: planned
                .digits
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(";"),
            sizes: String::new(),
            w_size: None,
            squares: None,
            char_sum: None,
            deviation: None,
            bound_main: None,
            dms_bound: None,
            cor1: None,
            cor2: None,
            theorem_ok: None,
            identity_ok: None,
            chain_pass: None,
            all_pass: Some(false),
            error: Some(err.to_string()),
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.all_pass != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannedInstance {
    pub p: u64,
    pub r: usize,
    pub family_label: String,
    pub size_k: Option<u64>,
    pub rep: Option<u64>,
    pub digits: Vec<DigitSetSpec>,
}

/// Expands a sweep into instances, in output order.
pub fn plan_sweep(cfg: &SweepConfig, base_seed: u64) -> Vec<PlannedInstance> {
    let mut out = Vec::new();
    for &p in &cfg.primes {
        for &r in &cfg.degrees {
            match cfg.family {
                Family::Full => out.push(PlannedInstance {
                    p,
                    r,
                    family_label: "full".into(),
                    size_k: Some(p),
                    rep: None,
                    digits: vec![DigitSetSpec::Full; r],
                }),
                Family::Range | Family::Random => {
                    let max = cfg.max_size.unwrap_or(p).min(p);
                    for k in cfg.min_size.max(1)..=max {
                        if cfg.family == Family::Range {
                            out.push(PlannedInstance {
                                p,
                                r,
                                family_label: "range".into(),
                                size_k: Some(k),
                                rep: None,
                                digits: vec![DigitSetSpec::Range { start: 0, end: k }; r],
                            });
                            continue;
                        }
                        for rep in 0..cfg.seeds {
                            let digits = (0..r)
                                .map(|i| DigitSetSpec::Random {
                                    size: k,
                                    seed: derive_seed(base_seed, &[p, r as u64, k, rep, i as u64]),
                                })
                                .collect();
                            out.push(PlannedInstance {
                                p,
                                r,
                                family_label: "random".into(),
                                size_k: Some(k),
                                rep: Some(rep),
                                digits,
                            });
                        }
                    }
                }
            }
        }
    }
    for extra in &cfg.extra {
        out.push(PlannedInstance {
            p: extra.p,
            r: extra.r,
            family_label: "explicit".into(),
            size_k: None,
            rep: None,
            digits: extra.digits.specs().unwrap_or_default(),
        });
    }
    out
}

fn run_planned(planned: &PlannedInstance, chain: bool, eps: f64, cap: u64) -> SummaryRow {
    let attempt = || -> Result<SummaryRow> {
        if planned.digits.is_empty() {
            return Err(Error::Config("no digit sets".into()));
        }
        let inst = Instance::build(planned.p, planned.r, None, &planned.digits, PivotPolicy::Auto)?;
        let rep = run_instance(&inst, eps, cap, Execution::Sequential, chain)?;
        let mut row = rep.summary_row(&inst);
        row.family = planned.family_label.clone();
        row.size_k = planned.size_k;
        row.rep = planned.rep;
        Ok(row)
    };
    attempt().unwrap_or_else(|e| SummaryRow::failed(planned.p, planned.r, planned, &e))
}

/// Runs every planned instance on the worker pool; rows keep plan order.
pub fn run_sweep(cfg: &SweepConfig, base_seed: u64, eps: f64, cap: u64, exec: Execution) -> Vec<SummaryRow> {
    let plan = plan_sweep(cfg, base_seed);
    map_ordered(plan, exec, |planned| run_planned(&planned, cfg.chain, eps, cap))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaRow {
    pub p: u64,
    pub r: usize,
    pub s: u64,
    pub generators: Option<u64>,
    pub pairs_tested: Option<u64>,
    pub exhaustive: Option<bool>,
    pub seed: Option<u64>,
    pub max_magnitude: Option<f64>,
    pub bound: Option<f64>,
    pub max_ratio: Option<f64>,
    pub bound_trivial: Option<bool>,
    pub all_pass: Option<bool>,
    pub error: Option<String>,
}

pub const LEMMA_HEADER: &[&str] = &[
    "p", "r", "s", "generators", "pairs_tested", "exhaustive", "seed", "max_magnitude", "bound",
    "max_ratio", "bound_trivial", "all_pass", "error",
];

impl LemmaRow {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.all_pass == Some(true)
    }
}

/// One row per (p, r, s); unsatisfiable orders produce error rows.
pub fn run_lemma_sweep(cfg: &LemmaConfig, base_seed: u64, cap: u64, exec: Execution) -> Vec<LemmaRow> {
    let mut plan = Vec::new();
    for &p in &cfg.primes {
        for &r in &cfg.degrees {
            for &s in &cfg.orders {
                plan.push((p, r, s));
            }
        }
    }
    plan.into_iter()
        .map(|(p, r, s)| {
            let seed = derive_seed(base_seed, &[p, r as u64, s]);
            let selection = if cfg.force_sampling {
                PairSelection::Sampled {
                    count: cfg.samples,
                    seed,
                }
            } else {
                PairSelection::Auto {
                    cap: cfg.pair_cap,
                    count: cfg.samples,
                    seed,
                }
            };
            let result = FieldCtx::new(p, r).and_then(|ctx| lemma_sweep(&ctx, s, selection, cap, exec));
            match result {
                Ok(sum) => LemmaRow {
                    p,
                    r,
                    s,
                    generators: Some(sum.generators),
                    pairs_tested: Some(sum.pairs_tested),
                    exhaustive: Some(sum.exhaustive),
                    seed: sum.seed,
                    max_magnitude: Some(sum.max_magnitude),
                    bound: Some(sum.bound),
                    max_ratio: Some(sum.max_ratio),
                    bound_trivial: Some(sum.bound_trivial),
                    all_pass: Some(sum.all_pass),
                    error: None,
                },
                Err(e) => LemmaRow {
                    p,
                    r,
                    s,
                    generators: None,
                    pairs_tested: None,
                    exhaustive: None,
                    seed: None,
                    max_magnitude: None,
                    bound: None,
                    max_ratio: None,
                    bound_trivial: None,
                    all_pass: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

fn header_for<T: 'static>() -> &'static [&'static str] {
    let id = std::any::TypeId::of::<T>();
    if id == std::any::TypeId::of::<LemmaRow>() {
        LEMMA_HEADER
    } else {
        SUMMARY_HEADER
    }
}

/// Writes a header plus one record per row; the header is present even when
/// there are no rows.
pub fn write_rows<W: Write, T: Serialize + 'static>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header_for::<T>()).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_csv<T: Serialize + 'static>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sweep_is_header_only() {
        let rows = run_sweep(&SweepConfig::default(), 0, 0.1, 1000, Execution::Sequential);
        assert!(rows.is_empty());
        let csv = rows_to_csv(&rows).unwrap();
        assert_eq!(csv.trim_end(), SUMMARY_HEADER.join(","));
        let lemma = rows_to_csv::<LemmaRow>(&[]).unwrap();
        assert_eq!(lemma.trim_end(), LEMMA_HEADER.join(","));
    }

    #[test]
    fn plan_sizes_and_order() {
        let cfg = SweepConfig {
            primes: vec![3, 5],
            degrees: vec![2],
            seeds: 2,
            ..SweepConfig::default()
        };
        let plan = plan_sweep(&cfg, 7);
        // k = 2..=p, two seeds each
        assert_eq!(plan.len(), (2 + 4) * 2);
        assert_eq!(plan[0].p, 3);
        assert_eq!(plan[0].size_k, Some(2));
        assert_ne!(plan[0].digits, plan[1].digits);
        assert_eq!(plan, plan_sweep(&cfg, 7));
    }

    #[test]
    fn rows_match_header_width() {
        let cfg = SweepConfig {
            primes: vec![5],
            degrees: vec![2],
            family: Family::Range,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&cfg, 0, 0.1, 1000, Execution::Parallel);
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(SummaryRow::passed));
        let csv = rows_to_csv(&rows).unwrap();
        for line in csv.lines() {
            assert_eq!(line.split(',').count(), SUMMARY_HEADER.len(), "{line}");
        }
    }

    #[test]
    fn lemma_rows_flag_bad_orders() {
        let cfg = LemmaConfig {
            primes: vec![5],
            degrees: vec![2],
            orders: vec![2, 5],
            ..LemmaConfig::default()
        };
        let rows = run_lemma_sweep(&cfg, 0, u64::MAX, Execution::Sequential);
        assert!(rows[0].passed());
        assert_eq!(rows[0].bound_trivial, Some(true));
        assert!(rows[1].error.is_some());
    }
}
