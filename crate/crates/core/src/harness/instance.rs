use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, PivotPolicy};
use super::sweep::{write_rows, SummaryRow};
use crate::bounds::{bound_report, BoundReport};
use crate::counting::{count_squares_enum, count_squares_identity, CountReport};
use crate::diagnostics::{compute_chain, DiagnosticsReport};
use crate::digits::{stratify, DigitSet, DigitSetSpec, DigitSpec, StrataReport};
use crate::error::{Error, Result};
use crate::exact::as_string;
use crate::exec::Execution;
use crate::field::poly::{format_poly, parse_poly};
use crate::field::{FieldCtx, FieldElement};

/// A field, a digit specification over its power basis, and a pivot.
#[derive(Debug)]
pub struct Instance {
    pub ctx: FieldCtx,
    pub digit_specs: Vec<DigitSetSpec>,
    pub spec: DigitSpec,
    /// Zero-based.
    pub pivot: usize,
}

impl Instance {
    /// A single digit spec is applied to every position.
    pub fn build(
        p: u64,
        r: usize,
        modulus: Option<&str>,
        digits: &[DigitSetSpec],
        pivot: PivotPolicy,
    ) -> Result<Instance> {
        let modulus = modulus.map(parse_poly).transpose()?;
        let ctx = FieldCtx::make(p, r, modulus.as_deref())?;
        let digit_specs = match digits.len() {
            1 => vec![digits[0].clone(); r],
            n if n == r => digits.to_vec(),
            n => {
                return Err(Error::Config(format!(
                    "{n} digit-set specs given for r = {r} positions"
                )))
            }
        };
        let sets = digit_specs
            .iter()
            .map(|s| s.resolve(p))
            .collect::<Result<Vec<DigitSet>>>()?;
        let spec = DigitSpec::with_polynomial_basis(&ctx, sets)?;
        let pivot = match pivot {
            PivotPolicy::Auto => spec.largest_set(),
            PivotPolicy::Index(i) => {
                spec.check_pivot(i)?;
                i
            }
        };
        Ok(Instance {
            ctx,
            digit_specs,
            spec,
            pivot,
        })
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Instance> {
        let digits = match &cfg.digits {
            Some(d) => d.specs()?,
            None => vec![DigitSetSpec::Full],
        };
        Instance::build(
            cfg.require_p()?,
            cfg.require_r()?,
            cfg.modulus.as_deref(),
            &digits,
            cfg.pivot,
        )
    }

    /// Size of the common digit set when all positions coincide.
    pub fn equal_set_size(&self) -> Option<u64> {
        let first = &self.spec.sets()[0];
        self.spec
            .sets()
            .iter()
            .all(|s| s == first)
            .then(|| first.len())
    }

    pub fn sizes_label(&self) -> String {
        self.spec
            .sizes()
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join("x")
    }

    pub fn digits_label(&self) -> String {
        self.digit_specs
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldInfo {
    pub p: u64,
    pub r: usize,
    #[serde(serialize_with = "as_string")]
    pub q: u64,
    pub modulus: String,
    pub generator: FieldElement,
}

impl FieldInfo {
    pub fn of(ctx: &FieldCtx) -> FieldInfo {
        FieldInfo {
            p: ctx.p(),
            r: ctx.degree(),
            q: ctx.order(),
            modulus: format_poly(ctx.modulus()),
            generator: ctx.generator().clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DigitSetInfo {
    pub spec: String,
    pub size: u64,
    pub digits: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub field: FieldInfo,
    pub basis: Vec<FieldElement>,
    pub digit_sets: Vec<DigitSetInfo>,
    /// One-based.
    pub pivot: usize,
    pub eps: f64,
    pub count: CountReport,
    pub identity_agrees: bool,
    pub bounds: BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsReport>,
    pub all_pass: bool,
    pub failures: Vec<String>,
}

impl InstanceReport {
    pub fn summary_row(&self, inst: &Instance) -> SummaryRow {
        SummaryRow {
            p: self.field.p,
            r: self.field.r,
            family: "explicit".into(),
            size_k: None,
            rep: None,
            digits: inst.digits_label(),
            sizes: inst.sizes_label(),
            w_size: Some(self.count.w_size),
            squares: Some(self.count.squares),
            char_sum: Some(self.count.char_sum),
            deviation: Some(self.count.deviation.as_f64()),
            bound_main: Some(self.bounds.main_bound),
            dms_bound: self.bounds.dms_bound,
            cor1: Some(self.bounds.corollary1.holds),
            cor2: Some(self.bounds.corollary2.holds),
            theorem_ok: self.bounds.main_bound_holds,
            identity_ok: Some(self.identity_agrees),
            chain_pass: self.diagnostics.as_ref().map(|d| d.all_pass),
            all_pass: Some(self.all_pass),
            error: None,
        }
    }
}

/// Counts both ways, evaluates bounds and (optionally) the proof chain.
pub fn run_instance(
    inst: &Instance,
    eps: f64,
    cap: u64,
    exec: Execution,
    with_chain: bool,
) -> Result<InstanceReport> {
    let ctx = &inst.ctx;
    let count = count_squares_enum(ctx, &inst.spec, cap, exec)?;
    let identity = count_squares_identity(ctx, &inst.spec, cap, exec)?;
    let mut failures = Vec::new();
    let identity_agrees = identity == count;
    if !identity_agrees {
        failures.push("identity_mismatch".to_string());
    }
    if !count.deviation_within_char_sum() {
        failures.push("char_sum_slack".to_string());
    }
    let bounds = bound_report(
        ctx.p(),
        ctx.degree(),
        count.w_size,
        inst.equal_set_size(),
        eps,
        Some(&count),
    )?;
    for (name, ok) in [
        ("main_bound", bounds.main_bound_holds),
        ("corollary1", bounds.corollary1_sound),
        ("corollary2", bounds.corollary2_sound),
    ] {
        if ok == Some(false) {
            failures.push(name.to_string());
        }
    }
    let diagnostics = if with_chain {
        let d = compute_chain(ctx, &inst.spec, inst.pivot, cap, exec)?;
        if d.char_sum != count.char_sum {
            failures.push("chain_char_sum_mismatch".to_string());
        }
        failures.extend(
            d.chain
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("chain:{}", c.name)),
        );
        Some(d)
    } else {
        None
    };
    Ok(InstanceReport {
        tool: "digitsq",
        version: env!("CARGO_PKG_VERSION"),
        field: FieldInfo::of(ctx),
        basis: inst.spec.basis().elements().to_vec(),
        digit_sets: inst
            .digit_specs
            .iter()
            .zip(inst.spec.sets())
            .map(|(spec, set)| DigitSetInfo {
                spec: spec.to_string(),
                size: set.len(),
                digits: set.digits().to_vec(),
            })
            .collect(),
        pivot: inst.pivot + 1,
        eps,
        count,
        identity_agrees,
        bounds,
        diagnostics,
        all_pass: failures.is_empty(),
        failures,
    })
}

pub fn run_strata(inst: &Instance, cap: u64, exec: Execution) -> Result<StrataReport> {
    stratify(&inst.ctx, &inst.spec, inst.pivot, cap, exec)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes `instance.json` and `instance.csv` into `dir`.
pub fn write_instance_outputs(
    report: &InstanceReport,
    inst: &Instance,
    dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let json_path = dir.join("instance.json");
    fs::write(&json_path, to_json(report)?)?;
    let csv_path = dir.join("instance.csv");
    let file = fs::File::create(&csv_path)?;
    write_rows(file, &[report.summary_row(inst)])?;
    Ok((json_path, csv_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_digit_instance() {
        let inst = Instance::build(3, 2, None, &[DigitSetSpec::Full], PivotPolicy::Auto).unwrap();
        let rep = run_instance(&inst, 0.1, 1000, Execution::Sequential, true).unwrap();
        assert_eq!(rep.count.squares, 4);
        assert_eq!(rep.count.char_sum, 0);
        assert!(rep.all_pass, "{:?}", rep.failures);
        assert!(rep.diagnostics.unwrap().all_pass);
    }

    #[test]
    fn even_characteristic_rejected() {
        let cfg = ExperimentConfig::from_json(r#"{"p": 2, "r": 3}"#, "x").unwrap();
        assert_eq!(Instance::from_config(&cfg).unwrap_err(), Error::EvenCharacteristic);
    }

    #[test]
    fn spec_count_must_match_degree() {
        let specs = vec![DigitSetSpec::Full; 2];
        assert!(matches!(
            Instance::build(3, 3, None, &specs, PivotPolicy::Auto),
            Err(Error::Config(_))
        ));
        assert!(Instance::build(3, 2, None, &specs, PivotPolicy::Index(2)).is_err());
    }

    #[test]
    fn auto_pivot_picks_largest() {
        let specs: Vec<DigitSetSpec> = ["list:1", "range:0..4", "list:2,3"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let inst = Instance::build(5, 3, None, &specs, PivotPolicy::Auto).unwrap();
        assert_eq!(inst.pivot, 1);
        assert_eq!(inst.sizes_label(), "1x4x2");
        assert_eq!(inst.equal_set_size(), None);
    }
}
