use digitsq::counting::count_squares_enum;
use digitsq::harness::config::{DigitsField, ExtraInstance};
use digitsq::harness::{
    plan_sweep, rows_to_csv, run_instance, run_lemma_sweep, run_sweep, to_json, ExperimentConfig, Family,
    Instance, LemmaConfig, SweepConfig,
};
use digitsq::{DigitSetSpec, Error, Execution, FieldCtx};

const CAP: u64 = 100_000_000;

#[test]
fn random_sweep_over_small_primes() {
    let cfg = SweepConfig {
        primes: vec![3, 5, 7, 11, 13],
        degrees: vec![2],
        family: Family::Random,
        seeds: 5,
        ..SweepConfig::default()
    };
    let rows = run_sweep(&cfg, 1, 0.1, CAP, Execution::Parallel);
    // sizes k = 2..=p for each prime, five seeds each
    let expected: u64 = [3u64, 5, 7, 11, 13].iter().map(|p| (p - 1) * 5).sum();
    assert_eq!(rows.len() as u64, expected);
    assert_eq!(expected, 170);
    for row in &rows {
        assert!(row.error.is_none(), "{row:?}");
        assert!(row.deviation.unwrap() <= row.bound_main.unwrap() + 1e-6, "{row:?}");
        assert_eq!(row.chain_pass, Some(true), "{row:?}");
        assert!(row.passed());
    }
}

#[test]
fn corollary2_row_via_extra_instance() {
    let cfg = SweepConfig {
        chain: false,
        extra: vec![ExtraInstance {
            p: 73,
            r: 2,
            digits: DigitsField::Joined("range:0..72;full".into()),
        }],
        ..SweepConfig::default()
    };
    let rows = run_sweep(&cfg, 0, 0.1, CAP, Execution::Parallel);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row.sizes, "72x73");
    assert_eq!(row.w_size, Some(5256));
    assert!(row.squares.unwrap() >= 1);
    assert_eq!(row.cor2, Some(true));
}

#[test]
fn failing_instance_becomes_error_row() {
    let cfg = SweepConfig {
        extra: vec![
            ExtraInstance {
                p: 9,
                r: 2,
                digits: DigitsField::Joined("full".into()),
            },
            ExtraInstance {
                p: 5,
                r: 2,
                digits: DigitsField::Joined("full".into()),
            },
        ],
        ..SweepConfig::default()
    };
    let rows = run_sweep(&cfg, 0, 0.1, CAP, Execution::Sequential);
    assert!(rows[0].error.as_deref().unwrap().contains("9"));
    assert!(rows[1].passed());
    let csv = rows_to_csv(&rows).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn range_family_plan() {
    let cfg = SweepConfig {
        primes: vec![7],
        degrees: vec![2, 3],
        family: Family::Range,
        min_size: 3,
        max_size: Some(5),
        ..SweepConfig::default()
    };
    let plan = plan_sweep(&cfg, 0);
    assert_eq!(plan.len(), 6);
    assert_eq!(plan[0].digits, vec![DigitSetSpec::Range { start: 0, end: 3 }; 2]);
    assert_eq!(plan[5].r, 3);
}

#[test]
fn lemma_sweep_rows() {
    let cfg = LemmaConfig {
        primes: vec![11, 5],
        degrees: vec![2],
        orders: vec![2, 7],
        ..LemmaConfig::default()
    };
    let rows = run_lemma_sweep(&cfg, 0, CAP, Execution::Parallel);
    assert_eq!(rows.len(), 4);
    let p11 = &rows[0];
    assert_eq!(p11.exhaustive, Some(true));
    assert!(p11.max_ratio.unwrap() <= 1.0);
    assert_eq!(p11.bound_trivial, Some(false));
    // 7 does not divide 120 or 24
    assert!(rows[1].error.is_some());
    assert!(rows[3].error.is_some());
    let p5 = &rows[2];
    assert_eq!(p5.bound_trivial, Some(true));
    assert!((p5.bound.unwrap() - 3.0 * 5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn config_round_trip_and_determinism() {
    let cfg = ExperimentConfig::from_json(
        r#"{"p": 11, "r": 3, "digits": ["random:6:1", "random:4:2", "range:1..=9"], "pivot": 3}"#,
        "inline",
    )
    .unwrap();
    let a = to_json(&run_instance(&Instance::from_config(&cfg).unwrap(), cfg.eps, CAP, Execution::Parallel, true).unwrap()).unwrap();
    let b = to_json(&run_instance(&Instance::from_config(&cfg).unwrap(), cfg.eps, CAP, Execution::Sequential, true).unwrap()).unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["pivot"], 3);
    assert_eq!(v["digit_sets"][2]["size"], 9);
    assert!(v["count"]["squares"].is_string());
    assert!(v.get("timestamp").is_none());
}

#[test]
fn p2_rejected_from_config() {
    let cfg = ExperimentConfig::from_json(r#"{"p": 2, "r": 2}"#, "inline").unwrap();
    assert_eq!(Instance::from_config(&cfg).unwrap_err(), Error::EvenCharacteristic);
}

#[test]
fn alternative_modulus_gives_isomorphic_counts_on_images() {
    // count over W in one model, map W elementwise into another model of the
    // same field, and recount squares there
    let a = FieldCtx::new(7, 2).unwrap();
    let b = FieldCtx::with_modulus(7, 2, &[3, 1, 1]).unwrap();
    assert_ne!(a.modulus(), b.modulus());
    let emb = a.embedding_into(&b).unwrap();
    let inst = Instance::build(7, 2, None, &["list:1,3,4".parse().unwrap(), "range:0..5".parse().unwrap()], Default::default()).unwrap();
    let count = count_squares_enum(&a, &inst.spec, CAP, Execution::Sequential).unwrap();
    let mut mapped = 0;
    for d0 in [1u64, 3, 4] {
        for d1 in 0..5u64 {
            let x = a.element(vec![d0, d1]).unwrap();
            let y = emb.map(&b, &x);
            assert_eq!(a.quadratic_char(&x), b.quadratic_char(&y));
            mapped += (b.quadratic_char(&y) == 1) as u64;
        }
    }
    assert_eq!(mapped, count.squares);
}
