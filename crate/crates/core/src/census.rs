//! Census of `PrePer(f_c, Q)` over `c = m/d^2` with bounded `d` and `|m|`,
//! persisted as resumable JSONL.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{support, vp, Rational, Valuation};
use crate::benedetto::{partition, real_radius};
use crate::dynamics::QuadMap;
use crate::families::{inputs_at, make_instance, FamilyTag};
use crate::graph::PrePerGraph;
use crate::search::compute_preper;

/// One census line. Field order is the JSONL key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub c: Rational,
    pub d: u64,
    pub m: i64,
    pub n_points: usize,
    pub label: String,
    pub cycles: Vec<usize>,
    pub certificate: String,
    /// Every prime dividing `den(c)`, 2 included.
    pub bad_primes: Vec<u64>,
    /// `2^(#C + 1)`; null when no odd prime divides `den(c)`.
    pub bound: Option<u64>,
    pub points: Vec<Rational>,
}

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("max_d must be at least 1")]
    ZeroDenominator,
    #[error("{path}: line {line} is not a census record: {source}")]
    Corrupt {
        path: String,
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// `(d, m)` with `gcd(m, d) = 1`, `1 <= d <= max_d`, `|m| <= max_m`, so
/// `m/d^2` has denominator exactly `d^2`. Ordered by `d`, then `m`.
pub fn census_parameters(max_d: u64, max_m: u64) -> impl Iterator<Item = (u64, i64)> {
    let max_m = max_m as i64;
    (1..=max_d).flat_map(move |d| {
        (-max_m..=max_m)
            .filter(move |m| m.unsigned_abs().gcd(&d) == 1)
            .map(move |m| (d, m))
    })
}

pub fn census_record(d: u64, m: i64) -> CensusRecord {
    let c = Rational::new(m, BigInt::from(d) * BigInt::from(d)).expect("d >= 1");
    debug_assert_eq!(c.denom(), &(BigInt::from(d) * BigInt::from(d)));
    let graph = compute_preper(&c);
    let label = graph.label();
    let bad_primes = if c.is_zero() {
        Vec::new()
    } else {
        support(&Rational::from_integer(c.denom().clone()))
    };
    CensusRecord {
        d,
        m,
        n_points: graph.len(),
        label: label.to_string(),
        cycles: label.cycles.clone(),
        certificate: label.certificate,
        bad_primes,
        bound: partition(&c).bound.value(),
        points: graph.vertices().cloned().collect(),
        c,
    }
}

fn batch(d: u64, max_m: u64) -> Vec<CensusRecord> {
    let params: Vec<(u64, i64)> = census_parameters(d, max_m)
        .filter(|&(dd, _)| dd == d)
        .collect();
    params
        .into_par_iter()
        .map(|(d, m)| census_record(d, m))
        .collect()
}

/// All census records in `(d, m)` order.
pub fn census(max_d: u64, max_m: u64) -> Vec<CensusRecord> {
    (1..=max_d).flat_map(|d| batch(d, max_m)).collect()
}

/// Checks a record against its own parameter: the point count, the
/// valuation and real bounds on every point, and the label of the graph
/// the points induce under `f_c`.
pub fn check_record(record: &CensusRecord) -> Result<(), String> {
    let c = &record.c;
    let d2 = BigInt::from(record.d) * BigInt::from(record.d);
    if c.numer() != &BigInt::from(record.m) || c.denom() != &d2 {
        return Err(format!(
            "c = {c} does not match (d, m) = ({}, {})",
            record.d, record.m
        ));
    }
    if record.n_points != record.points.len() {
        return Err(format!(
            "n_points {} but {} points",
            record.n_points,
            record.points.len()
        ));
    }
    let radius = real_radius(c);
    for x in &record.points {
        if x.abs() > radius {
            return Err(format!("{x} exceeds the real bound {radius}"));
        }
        for &p in &record.bad_primes {
            let (Valuation::Finite(vx), Valuation::Finite(vc)) = (
                vp(x, p).map_err(|e| e.to_string())?,
                vp(c, p).map_err(|e| e.to_string())?,
            ) else {
                return Err(format!("{x} has infinite valuation at a bad prime {p}"));
            };
            if 2 * vx != vc {
                return Err(format!("v_{p}({x}) = {vx} but v_{p}(c) = {vc}"));
            }
        }
        if x.denom() != &BigInt::from(record.d) {
            return Err(format!("{x} does not have denominator {}", record.d));
        }
    }
    let f = QuadMap::new(c.clone());
    let graph =
        PrePerGraph::induced(&record.points, |x| f.evaluate(x)).map_err(|e| e.to_string())?;
    let label = graph.label();
    if label.to_string() != record.label || label.certificate != record.certificate {
        return Err(format!(
            "points induce {label}, record says {}",
            record.label
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnomalyKind {
    LongCycle { length: usize },
    TooManyPoints { n_points: usize },
    UnknownLabel { label: String },
    UnknownCertificate { label: String, certificate: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Anomaly {
    pub c: Rational,
    #[serde(flatten)]
    pub kind: AnomalyKind,
}

/// Label names whose graphs are expected over `Q`.
pub const ALLOWED_LABELS: [&str; 12] = [
    "0", "2(1)", "3(1,1)", "3(2)", "4(1,1)", "4(2)", "5(1,1)", "5(2)", "6(1,1)", "6(2)", "6(3)",
    "8(2,1,1)",
];

/// Known certificates per label, seeded from the family graphs and the
/// parameters `1, 1/4, 0, -1`.
pub fn seed_certificates() -> BTreeMap<String, BTreeSet<String>> {
    let mut known: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut add = |g: &PrePerGraph| {
        let l = g.label();
        known
            .entry(l.to_string())
            .or_default()
            .insert(l.certificate);
    };
    for tag in FamilyTag::ALL {
        let inst = make_instance(tag, inputs_at(tag, 1)).expect("first inputs are valid");
        add(inst.expected_graph());
    }
    for (m, den) in [(1, 1), (1, 4), (0, 1), (-1, 1)] {
        add(&compute_preper(&Rational::new(m, den).expect("nonzero")));
    }
    known
}

/// Flags cycles longer than 3, graphs with more than 8 vertices, labels
/// outside [`ALLOWED_LABELS`], and certificates that differ from the known
/// shape of their label. Labels with no seeded shape (the 5-vertex ones)
/// accept every shape they show.
pub fn anomaly_scan(records: &[CensusRecord]) -> Vec<Anomaly> {
    let known = seed_certificates();
    let mut out = Vec::new();
    for rec in records {
        let mut flag = |kind| {
            out.push(Anomaly {
                c: rec.c.clone(),
                kind,
            })
        };
        if let Some(&length) = rec.cycles.iter().filter(|&&l| l > 3).max() {
            flag(AnomalyKind::LongCycle { length });
        }
        if rec.n_points > 8 {
            flag(AnomalyKind::TooManyPoints {
                n_points: rec.n_points,
            });
        }
        if !ALLOWED_LABELS.contains(&rec.label.as_str()) {
            flag(AnomalyKind::UnknownLabel {
                label: rec.label.clone(),
            });
            continue;
        }
        if known
            .get(&rec.label)
            .is_some_and(|shapes| !shapes.contains(&rec.certificate))
        {
            flag(AnomalyKind::UnknownCertificate {
                label: rec.label.clone(),
                certificate: rec.certificate.clone(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusSummary {
    /// Records already on disk and kept.
    pub resumed: usize,
    pub written: usize,
    pub anomalies: Vec<Anomaly>,
}

/// Complete records at the start of `file`; the file is truncated after the
/// last one so a partial trailing line never survives.
fn recover(file: &mut File, path: &Path) -> Result<Vec<CensusRecord>, CensusError> {
    let mut text = String::new();
    file.read_to_string(&mut text)?;
    let mut records = Vec::new();
    let mut keep = 0usize;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if !line.ends_with('\n') {
            break;
        }
        let rec: CensusRecord =
            serde_json::from_str(line.trim_end()).map_err(|source| CensusError::Corrupt {
                path: path.display().to_string(),
                line: i + 1,
                source,
            })?;
        records.push(rec);
        keep += line.len();
    }
    file.set_len(keep as u64)?;
    file.seek(SeekFrom::End(0))?;
    Ok(records)
}

/// Writes the census to `path` as JSONL. With `resume`, keeps the complete
/// records already there and continues after the last `(d, m)` key.
/// Anomalies are scanned over the whole file.
pub fn run_census(
    path: &Path,
    max_d: u64,
    max_m: u64,
    resume: bool,
) -> Result<CensusSummary, CensusError> {
    if max_d == 0 {
        return Err(CensusError::ZeroDenominator);
    }
    let (mut file, mut records) = if resume && path.exists() {
        let mut file = OpenOptions::new().read(true).write(true).open(path)?;
        let records = recover(&mut file, path)?;
        (file, records)
    } else {
        (File::create(path)?, Vec::new())
    };
    let resumed = records.len();
    let last = records.last().map(|r| (r.d, r.m));
    let mut out = BufWriter::new(&mut file);
    let mut written = 0;
    for d in 1..=max_d {
        if last.is_some_and(|(ld, _)| d < ld) {
            continue;
        }
        for rec in batch(d, max_m) {
            if last.is_some_and(|key| (rec.d, rec.m) <= key) {
                continue;
            }
            serde_json::to_writer(&mut out, &rec).map_err(io::Error::from)?;
            out.write_all(b"\n")?;
            written += 1;
            records.push(rec);
        }
        out.flush()?;
    }
    drop(out);
    file.sync_all()?;
    Ok(CensusSummary {
        resumed,
        written,
        anomalies: anomaly_scan(&records),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn r(n: i64, d: i64) -> Rational {
        rat(n, d).unwrap()
    }

    #[test]
    fn smallest_census() {
        let recs = census(1, 1);
        let got: Vec<(Rational, &str)> = recs
            .iter()
            .map(|r| (r.c.clone(), r.label.as_str()))
            .collect();
        assert_eq!(
            got,
            vec![(r(-1, 1), "3(2)"), (r(0, 1), "3(1,1)"), (r(1, 1), "0")]
        );
    }

    #[test]
    fn quarter_denominators() {
        let recs = census(2, 3);
        let find = |c: Rational| recs.iter().find(|r| r.c == c).unwrap();
        assert_eq!(find(r(1, 4)).label, "2(1)");
        assert_eq!(find(r(-3, 4)).label, "4(1,1)");
        // m even with d = 2 is not in lowest terms.
        assert!(recs.iter().all(|r| r.d != 2 || r.m % 2 != 0));
        let keys: Vec<(u64, i64)> = recs.iter().map(|r| (r.d, r.m)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn parameters_are_distinct_rationals() {
        let cs: Vec<Rational> = census_parameters(6, 20)
            .map(|(d, m)| Rational::new(m, (d * d) as i64).unwrap())
            .collect();
        let set: BTreeSet<_> = cs.iter().cloned().collect();
        assert_eq!(set.len(), cs.len());
        for (d, m) in census_parameters(6, 20) {
            assert_eq!(
                Rational::new(m, (d * d) as i64).unwrap().denom(),
                &BigInt::from(d * d)
            );
        }
    }

    #[test]
    fn json_keys_in_order() {
        let rec = census_record(6, 5);
        let line = serde_json::to_string(&rec).unwrap();
        let keys: Vec<String> =
            serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(&line)
                .unwrap()
                .keys()
                .cloned()
                .collect();
        let mut expected: Vec<&str> = vec![
            "c",
            "d",
            "m",
            "n_points",
            "label",
            "cycles",
            "certificate",
            "bad_primes",
            "bound",
            "points",
        ];
        assert_eq!(line.find("\"c\""), Some(1));
        expected.sort();
        let mut keys_sorted = keys.clone();
        keys_sorted.sort();
        assert_eq!(keys_sorted, expected);
        assert!(line.contains("\"c\":\"5/36\""));
        assert!(line.contains("\"bad_primes\":[2,3]"));
        assert!(line.contains("\"bound\":4"));
        assert!(line.contains("\"points\":[\"-5/6\",\"-1/6\",\"1/6\",\"5/6\"]"));
        let back: CensusRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn bound_is_null_without_odd_bad_primes() {
        assert_eq!(census_record(2, 1).bound, None);
        assert_eq!(census_record(1, -1).bound, None);
        assert_eq!(census_record(3, 1).bound, Some(4));
    }

    #[test]
    fn records_pass_their_own_checks() {
        for rec in census(4, 20) {
            check_record(&rec).unwrap();
        }
        let mut bad = census_record(6, 5);
        bad.points.pop();
        assert!(check_record(&bad).is_err());
    }

    #[test]
    fn injected_anomalies_are_flagged() {
        let mut recs = census(2, 3);
        assert!(anomaly_scan(&recs).is_empty());

        let mut four_cycle = census_record(1, -1);
        four_cycle.cycles = vec![4];
        four_cycle.label = "4(4)".into();
        let mut nine = census_record(6, 5);
        nine.n_points = 9;
        nine.label = "9(1,1)".into();
        let mut odd_shape = census_record(6, 5);
        odd_shape.certificate = "[(()())]".into();
        recs.extend([four_cycle, nine, odd_shape]);

        let kinds: Vec<AnomalyKind> = anomaly_scan(&recs).into_iter().map(|a| a.kind).collect();
        assert!(kinds.contains(&AnomalyKind::LongCycle { length: 4 }));
        assert!(kinds.contains(&AnomalyKind::TooManyPoints { n_points: 9 }));
        assert!(kinds.contains(&AnomalyKind::UnknownLabel {
            label: "9(1,1)".into()
        }));
        assert!(kinds
            .iter()
            .any(|k| matches!(k, AnomalyKind::UnknownCertificate { .. })));
    }

    #[test]
    fn eight_point_three_cycle_is_surfaced() {
        // 3-cycle -1/4 -> -7/4 -> 5/4 with a tree of depth 2 over -1/4.
        let rec = census_record(4, -29);
        assert_eq!(rec.label, "8(3)");
        let kinds: Vec<AnomalyKind> = anomaly_scan(&[rec]).into_iter().map(|a| a.kind).collect();
        assert_eq!(
            kinds,
            vec![AnomalyKind::UnknownLabel {
                label: "8(3)".into()
            }]
        );
    }

    #[test]
    fn seeds_cover_family_labels() {
        let seeds = seed_certificates();
        for label in [
            "0", "2(1)", "3(1,1)", "3(2)", "4(1,1)", "4(2)", "6(1,1)", "6(2)", "6(3)", "8(2,1,1)",
        ] {
            assert_eq!(seeds.get(label).map(|s| s.len()), Some(1), "{label}");
        }
    }

    #[test]
    fn deterministic_and_resumable() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        run_census(&a, 4, 12, false).unwrap();
        run_census(&b, 4, 12, false).unwrap();
        let full = std::fs::read(&a).unwrap();
        assert_eq!(full, std::fs::read(&b).unwrap());

        // Cut mid-line, then resume.
        let lines: Vec<&[u8]> = full.split_inclusive(|&b| b == b'\n').collect();
        let keep: usize = lines[..7].iter().map(|l| l.len()).sum::<usize>() + lines[7].len() / 2;
        std::fs::write(&b, &full[..keep]).unwrap();
        let summary = run_census(&b, 4, 12, true).unwrap();
        assert_eq!(summary.resumed, 7);
        assert_eq!(summary.written, lines.len() - 7);
        assert_eq!(std::fs::read(&b).unwrap(), full);

        // Resuming a complete file writes nothing.
        let summary = run_census(&b, 4, 12, true).unwrap();
        assert_eq!(summary.written, 0);
        assert_eq!(std::fs::read(&b).unwrap(), full);
    }
}
