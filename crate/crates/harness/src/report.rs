//! Report emission: raw records, a JSON summary and plot-ready tables.
//!
//! Stochastic algorithms contribute one record per seed. Percentages and
//! metric summaries pool every seed record; the paired tests need a single
//! value per instance and use the per-instance median over seeds.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use evcf_core::stats::{
    found_by_all, is_explained, mcnemar_mid_p, pairwise_success_table, percentage_explained, strictly_smaller,
    summarize, ContingencyTable, MetricSummary,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{Algorithm, BenchmarkRecord, RecordStatus};

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SWITCHING_POINT_PLOT_FILE: &str = "switching_point_vs_time.csv";
pub const ACTIVE_COUNT_PLOT_FILE: &str = "active_count_vs_time.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub records: usize,
    pub instances: usize,
    pub found: usize,
    pub explained: usize,
    /// Found but over the size limit.
    pub oversized: usize,
    pub errors: usize,
    pub percentage_explained: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionSummary {
    /// Instances where every record of every algorithm found an explanation.
    pub instances: usize,
    pub excluded: usize,
    pub switching_point: BTreeMap<Algorithm, MetricSummary>,
    pub elapsed_secs: BTreeMap<Algorithm, MetricSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Success: an explanation within the size limit (majority over seeds).
    Explained,
    /// Success: strictly smaller switching point.
    SwitchingPoint,
    /// Success: strictly less wall time.
    Elapsed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub a: Algorithm,
    pub b: Algorithm,
    pub metric: Metric,
    pub table: ContingencyTable,
    /// `None` without discordant pairs.
    pub p_exact: Option<f64>,
    pub p_mid: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub records: usize,
    pub instances: usize,
    pub algorithms: Vec<AlgorithmSummary>,
    pub intersection: IntersectionSummary,
    pub pairwise: Vec<PairwiseTest>,
}

type PerInstance<'a> = BTreeMap<usize, Vec<&'a BenchmarkRecord>>;

fn group(records: &[BenchmarkRecord]) -> BTreeMap<Algorithm, PerInstance<'_>> {
    let mut out: BTreeMap<Algorithm, PerInstance<'_>> = BTreeMap::new();
    for r in records {
        out.entry(r.algorithm).or_default().entry(r.instance_id).or_default().push(r);
    }
    out
}

fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    summarize(&v).map(|s| s.median).unwrap_or(f64::NAN)
}

pub fn summarize_records(records: &[BenchmarkRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(HarnessError::Data("no records to summarize".into()));
    }
    let grouped = group(records);
    let instances: BTreeSet<usize> = records.iter().map(|r| r.instance_id).collect();

    let mut algorithms = Vec::new();
    for (&algorithm, per_instance) in &grouped {
        let rs: Vec<&BenchmarkRecord> = per_instance.values().flatten().copied().collect();
        let owned: Vec<BenchmarkRecord> = rs.iter().map(|r| (*r).clone()).collect();
        algorithms.push(AlgorithmSummary {
            algorithm,
            records: rs.len(),
            instances: per_instance.len(),
            found: rs.iter().filter(|r| r.status == RecordStatus::Found).count(),
            explained: rs.iter().filter(|r| is_explained(**r)).count(),
            oversized: rs.iter().filter(|r| r.oversized).count(),
            errors: rs.iter().filter(|r| r.status == RecordStatus::Error).count(),
            percentage_explained: percentage_explained(&owned)?,
        });
    }

    // Instances every algorithm found an explanation for, in every seed run.
    let all_found: Vec<BTreeMap<usize, ()>> = grouped
        .values()
        .map(|per_instance| {
            per_instance
                .iter()
                .filter(|(_, rs)| rs.iter().all(|r| r.status == RecordStatus::Found))
                .map(|(&id, _)| (id, ()))
                .collect()
        })
        .collect();
    let common = found_by_all(&all_found.iter().collect::<Vec<_>>());
    let mut switching_point = BTreeMap::new();
    let mut elapsed_secs = BTreeMap::new();
    if !common.is_empty() {
        for (&algorithm, per_instance) in &grouped {
            let pooled: Vec<&BenchmarkRecord> = common.iter().flat_map(|id| per_instance[id].iter().copied()).collect();
            let sp: Vec<f64> = pooled.iter().map(|r| r.switching_point.unwrap_or(0) as f64).collect();
            let el: Vec<f64> = pooled.iter().map(|r| r.elapsed_secs()).collect();
            switching_point.insert(algorithm, summarize(&sp)?);
            elapsed_secs.insert(algorithm, summarize(&el)?);
        }
    }

    let mut pairwise = Vec::new();
    let names: Vec<Algorithm> = grouped.keys().copied().collect();
    for (i, &a) in names.iter().enumerate() {
        for &b in &names[i + 1..] {
            let (ga, gb) = (&grouped[&a], &grouped[&b]);
            let shared: Vec<usize> = ga.keys().filter(|id| gb.contains_key(id)).copied().collect();
            let majority = |rs: &Vec<&BenchmarkRecord>| 2 * rs.iter().filter(|r| is_explained(**r)).count() > rs.len();
            let sa: Vec<bool> = shared.iter().map(|id| majority(&ga[id])).collect();
            let sb: Vec<bool> = shared.iter().map(|id| majority(&gb[id])).collect();
            pairwise.push(paired_test(a, b, Metric::Explained, pairwise_success_table(&sa, &sb)?)?);

            let per = |g: &PerInstance<'_>, f: fn(&BenchmarkRecord) -> f64| -> Vec<f64> {
                common.iter().map(|id| median(g[id].iter().map(|r| f(r)))).collect()
            };
            for (metric, f) in [
                (Metric::SwitchingPoint, (|r: &BenchmarkRecord| r.switching_point.unwrap_or(0) as f64) as fn(&BenchmarkRecord) -> f64),
                (Metric::Elapsed, |r: &BenchmarkRecord| r.elapsed_secs()),
            ] {
                let (wa, wb) = strictly_smaller(&per(ga, f), &per(gb, f))?;
                pairwise.push(paired_test(a, b, metric, pairwise_success_table(&wa, &wb)?)?);
            }
        }
    }

    Ok(Summary {
        records: records.len(),
        instances: instances.len(),
        algorithms,
        intersection: IntersectionSummary {
            instances: common.len(),
            excluded: instances.len() - common.len(),
            switching_point,
            elapsed_secs,
        },
        pairwise,
    })
}

fn paired_test(a: Algorithm, b: Algorithm, metric: Metric, table: ContingencyTable) -> Result<PairwiseTest> {
    let (p_exact, p_mid) = if table.discordant() == 0 {
        (None, None)
    } else {
        let r = mcnemar_mid_p(&table)?;
        (Some(r.p_exact), Some(r.p_mid))
    };
    Ok(PairwiseTest {
        a,
        b,
        metric,
        table,
        p_exact,
        p_mid,
    })
}

pub fn write_records_csv(records: &[BenchmarkRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<BenchmarkRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

#[derive(Serialize)]
struct SwitchingPointRow {
    algorithm: Algorithm,
    instance_id: usize,
    seed: Option<u64>,
    switching_point: usize,
    elapsed_secs: f64,
}

#[derive(Serialize)]
struct ActiveCountRow {
    algorithm: Algorithm,
    instance_id: usize,
    seed: Option<u64>,
    active_count: usize,
    elapsed_secs: f64,
}

/// Writes the summary and plot tables for `records` into `dir`, plus the
/// records themselves unless `include_records` is off.
pub fn emit_report(records: &[BenchmarkRecord], dir: impl AsRef<Path>, include_records: bool) -> Result<Summary> {
    let dir = dir.as_ref();
    let summary = summarize_records(records)?;
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    if include_records {
        write_records_csv(records, dir.join(RECORDS_FILE))?;
    }
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    let path = dir.join(SUMMARY_FILE);
    fs::write(&path, json + "\n").map_err(|e| HarnessError::io(path, e))?;

    let mut w = csv::Writer::from_path(dir.join(SWITCHING_POINT_PLOT_FILE))?;
    for r in records.iter().filter(|r| r.status == RecordStatus::Found) {
        w.serialize(SwitchingPointRow {
            algorithm: r.algorithm,
            instance_id: r.instance_id,
            seed: r.seed,
            switching_point: r.switching_point.unwrap_or(0),
            elapsed_secs: r.elapsed_secs(),
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    let mut w = csv::Writer::from_path(dir.join(ACTIVE_COUNT_PLOT_FILE))?;
    for r in records.iter().filter(|r| r.status != RecordStatus::Error) {
        w.serialize(ActiveCountRow {
            algorithm: r.algorithm,
            instance_id: r.instance_id,
            seed: r.seed,
            active_count: r.active_count,
            elapsed_secs: r.elapsed_secs(),
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(summary)
}
