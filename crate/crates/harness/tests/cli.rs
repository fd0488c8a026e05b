use std::path::Path;
use std::process::{Command, Output};

use evcf_core::{Dataset, SparseInstance};
use evcf_harness::data::{format_sparse_dataset, parse_sparse_dataset};
use evcf_harness::report::{read_records_csv, Summary};
use evcf_harness::{Algorithm, RecordStatus};
use proptest::prelude::*;

fn evcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evcf")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_train_bench_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.txt");
    let model = dir.path().join("model.json");

    let out = evcf(&["generate", "--output", path(&data), "--instances", "300", "--features", "24", "--pairs", "3", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = evcf(&["train", "--data", path(&data), "--kind", "mlp", "--hidden", "6", "--epochs", "100", "--output", path(&model)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let config = dir.path().join("bench.toml");
    std::fs::write(
        &config,
        r#"
dataset = "data.txt"
output = "out"
model = "load"
model_path = "model.json"
algorithms = ["sedc", "lime-c", "shap-c", "random", "complete"]
seeds = [1, 2]
max_instances = 12
n_samples = 200
"#,
    )
    .unwrap();
    let out = evcf(&["bench", "--config", path(&config)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report = dir.path().join("out");
    let records = read_records_csv(report.join("records.csv")).unwrap();
    let instances = records.iter().map(|r| r.instance_id).collect::<std::collections::BTreeSet<_>>().len();
    assert!(instances > 0 && instances <= 12);
    // deterministic algorithms once per instance, stochastic ones once per seed
    for a in Algorithm::ALL {
        let n = records.iter().filter(|r| r.algorithm == a).count();
        assert_eq!(n, if a.is_stochastic() { 2 * instances } else { instances }, "{a}");
    }
    assert!(records.iter().all(|r| r.status != RecordStatus::Error));
    let summary: Summary = serde_json::from_str(&std::fs::read_to_string(report.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.records, records.len());
    assert_eq!(summary.instances, instances);
    assert!(report.join("switching_point_vs_time.csv").exists());
    assert!(report.join("active_count_vs_time.csv").exists());

    // rebuilding the report from the records gives the same summary
    let rebuilt = dir.path().join("rebuilt");
    let out = evcf(&["report", "--records", path(&report.join("records.csv")), "--output", path(&rebuilt)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let again: Summary = serde_json::from_str(&std::fs::read_to_string(rebuilt.join("summary.json")).unwrap()).unwrap();
    assert_eq!(again, summary);

    let row = records[0].instance_id.to_string();
    let out = evcf(&["explain", "--data", path(&data), "--model", path(&model), "--instance", &row, "--algorithm", "sedc"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let e: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(e.get("status").is_some());
}

#[test]
fn invalid_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "dataset = \"d.txt\"\noutput = \"o\"\nmodel = \"train-linear\"\nalgorithms = [\"lime-c\"]\n").unwrap();
    let out = evcf(&["bench", "--config", path(&config)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seeds"));

    std::fs::write(&config, "dataset = \"d.txt\"\noutput = \"o\"\nmodel = \"train-linear\"\nalgorithms = [\"sedc\"]\ncolour = 3\n").unwrap();
    assert_eq!(evcf(&["bench", "--config", path(&config)]).status.code(), Some(1));
}

#[test]
fn malformed_data_exits_with_two_and_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.txt");
    std::fs::write(&data, "#dim 5\n1 0:1 3:2\n0 2:x\n").unwrap();
    let config = dir.path().join("c.toml");
    std::fs::write(&config, "dataset = \"data.txt\"\noutput = \"o\"\nmodel = \"train-linear\"\nalgorithms = [\"sedc\"]\n").unwrap();
    let out = evcf(&["bench", "--config", path(&config)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"), "{}", String::from_utf8_lossy(&out.stderr));
}

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (1usize..40)
        .prop_flat_map(|dim| {
            let row = (proptest::collection::btree_map(0..dim, -1e6f64..1e6, 0..dim.min(8)), 0u8..=1);
            (Just(dim), proptest::collection::vec(row, 1..20))
        })
        .prop_map(|(dim, rows)| {
            let (xs, ys): (Vec<_>, Vec<_>) = rows
                .into_iter()
                .map(|(m, y)| (SparseInstance::new(dim, m.into_iter().filter(|&(_, v)| v != 0.0)).unwrap(), y))
                .unzip();
            Dataset::new(dim, xs, ys).unwrap()
        })
}

proptest! {
    #[test]
    fn sparse_format_round_trips(d in dataset_strategy()) {
        let back = parse_sparse_dataset(&format_sparse_dataset(&d), "mem").unwrap();
        prop_assert_eq!(back.dimension(), d.dimension());
        prop_assert_eq!(back.labels(), d.labels());
        prop_assert_eq!(back.instances(), d.instances());
    }
}
