use nbsamp::harness::{aggregate, csv_string, sweep, ExperimentSpec, Method, CSV_HEADER, CI_Z};
use proptest::prelude::*;

fn small_spec(seed: u64, trials: usize) -> ExperimentSpec {
    ExperimentSpec::from_toml_str(&format!(
        r#"
master_seed = {seed}
trials = {trials}
axis = "snr"
axis_values = [10.0, 30.0]
methods = ["proposed", "classic-samp", "cws", "genie"]
dims = {{ n_subcarriers = 48, zp_len = 16, cir_len = 4 }}
[fixed]
sparsity = 3
sparsity_known = true
sir_db = 10.0
[recovery]
r_max = 4
i_max = 2
samp_max_support = 8
"#
    ))
    .unwrap()
}

fn pooled<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn aggregation_matches_records() {
    let spec = small_spec(7, 6);
    let out = sweep(&spec).unwrap();
    assert_eq!(out.table, aggregate(&spec, &out.records, &out.invalid));
    for row in &out.table.rows {
        let mine: Vec<_> = out
            .records
            .iter()
            .filter(|r| r.method == row.method && r.axis_value == row.axis_value)
            .collect();
        assert_eq!(row.trials + row.invalid_trials, spec.trials);
        assert_eq!(row.trials, mine.len());
        let exact = mine.iter().filter(|r| r.support_exact).count();
        assert_eq!(row.recovery_prob, exact as f64 / mine.len() as f64);
        let errs: usize = mine.iter().map(|r| r.bit_errors).sum();
        let bits: usize = mine.iter().map(|r| r.bits_total).sum();
        assert_eq!(row.ber, errs as f64 / bits as f64);
        let p = row.recovery_prob;
        assert_eq!(row.recovery_ci, CI_Z * (p * (1.0 - p) / mine.len() as f64).sqrt());
    }
}

#[test]
fn records_are_consistent() {
    let out = sweep(&small_spec(11, 5)).unwrap();
    for r in &out.records {
        assert!(r.bit_errors <= r.bits_total);
        assert_eq!(r.bits_total, 2 * r.true_support.len());
        assert_eq!(r.support_exact, r.est_support == r.true_support);
        if r.method == Method::Genie {
            assert!(r.support_exact);
        }
        if r.method == Method::Cws {
            assert_eq!(r.est_support.len(), r.true_support.len());
        }
    }
}

#[test]
fn csv_is_identical_across_pool_sizes() {
    let spec = small_spec(3, 4);
    let a = pooled(1, || csv_string(&sweep(&spec).unwrap().table).unwrap());
    let b = pooled(3, || csv_string(&sweep(&spec).unwrap().table).unwrap());
    assert_eq!(a, b);
}

#[test]
fn csv_round_trips_through_a_reader() {
    let out = sweep(&small_spec(5, 3)).unwrap();
    let text = csv_string(&out.table).unwrap();
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), out.table.rows.len());
    for (rec, row) in rows.iter().zip(&out.table.rows) {
        assert_eq!(&rec[0], row.method.name());
        assert_eq!(rec[2].parse::<f64>().unwrap(), row.axis_value);
        assert_eq!(rec[3].parse::<usize>().unwrap(), row.trials);
        assert_eq!(rec[4].parse::<f64>().unwrap(), row.recovery_prob);
        assert_eq!(rec[5].parse::<f64>().unwrap(), row.recovery_ci);
        assert_eq!(rec[6].parse::<f64>().unwrap(), row.ber);
        assert_eq!(rec[7].parse::<f64>().unwrap(), row.ber_ci);
        assert_eq!(rec[8].parse::<usize>().unwrap(), row.invalid_trials);
    }
}

#[test]
fn method_order_in_spec_does_not_matter() {
    let a = small_spec(9, 2);
    let mut b = a.clone();
    b.methods.reverse();
    let ta = sweep(&a).unwrap().table;
    let tb = sweep(&b).unwrap().table;
    assert_eq!(ta.rows, tb.rows);
}

#[test]
fn invalid_specs_are_rejected() {
    let mut s = small_spec(1, 0);
    assert!(sweep(&s).is_err());
    s.trials = 1;
    s.axis_values = vec![30.0, 10.0];
    assert!(s.validate().is_err());
    s.axis_values = vec![];
    assert!(s.validate().is_err());
    s.axis_values = vec![10.0];
    s.fixed.sparsity_known = false;
    assert!(s.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn single_trial_probabilities_are_binary(seed in 0u64..1000) {
        let table = sweep(&small_spec(seed, 1)).unwrap().table;
        for r in &table.rows {
            prop_assert!(r.recovery_prob == 0.0 || r.recovery_prob == 1.0);
            prop_assert_eq!(r.recovery_ci, 0.0);
            prop_assert!((0.0..=1.0).contains(&r.ber));
        }
    }
}
