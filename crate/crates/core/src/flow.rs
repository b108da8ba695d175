//! Labeled flow ingestion: CSV parsing, feature sanitization, label mapping,
//! deterministic train/test splits, and matrix extraction.
//!
//! The loader understands CICFlowMeter-style CSVs: a header row, metadata
//! columns (flow id, endpoints, ports, protocol, timestamp) resolved through
//! configurable aliases, every remaining numeric column taken as a feature in
//! header order, and a `Label` column (case-insensitive).

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{fraction_count, seeded_shuffle};

/// Closed set of traffic classes. `Benign` is always part of the universe;
/// the two attack classes mirror the detection task this crate targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    Benign,
    FtpPatator,
    Dos,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [ClassLabel::Benign, ClassLabel::FtpPatator, ClassLabel::Dos];

    /// Index in class-declaration order; used for confusion matrices and
    /// leaf tie-breaking.
    pub fn index(self) -> usize {
        match self {
            ClassLabel::Benign => 0,
            ClassLabel::FtpPatator => 1,
            ClassLabel::Dos => 2,
        }
    }

    pub fn from_index(i: usize) -> ClassLabel {
        Self::ALL[i]
    }

    pub fn is_attack(self) -> bool {
        self != ClassLabel::Benign
    }

    /// Canonical raw dataset spelling, used when writing flows back to CSV.
    pub fn canonical_raw(self) -> &'static str {
        match self {
            ClassLabel::Benign => "BENIGN",
            ClassLabel::FtpPatator => "FTP-Patator",
            ClassLabel::Dos => "DoS",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassLabel::Benign => "Benign",
            ClassLabel::FtpPatator => "FtpPatator",
            ClassLabel::Dos => "Dos",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Protocol {
    Tcp,
    Udp,
    Icmp,
    Other,
}

impl Protocol {
    /// Accepts protocol names or IANA numbers (CICFlowMeter emits numbers).
    pub fn parse(raw: &str) -> Protocol {
        match raw.trim().to_ascii_lowercase().as_str() {
            "tcp" | "6" => Protocol::Tcp,
            "udp" | "17" => Protocol::Udp,
            "icmp" | "1" => Protocol::Icmp,
            _ => Protocol::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Tcp => "TCP",
            Protocol::Udp => "UDP",
            Protocol::Icmp => "ICMP",
            Protocol::Other => "OTHER",
        }
    }
}

/// One labeled network flow with a fixed-order numeric feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub flow_id: String,
    pub src_ip: String,
    pub dst_ip: String,
    pub src_port: u16,
    pub dst_port: u16,
    pub protocol: Protocol,
    pub features: Vec<f64>,
    pub label: ClassLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<FlowRecord>,
    pub feature_names: Vec<String>,
    pub class_set: BTreeSet<ClassLabel>,
}

impl Dataset {
    pub fn new(records: Vec<FlowRecord>, feature_names: Vec<String>) -> Dataset {
        let class_set = records.iter().map(|r| r.label).collect();
        Dataset {
            records,
            feature_names,
            class_set,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }
}

/// Maps raw label strings onto the closed class set. Lookup order: exact
/// matches first, then prefixes in declaration order; everything else is
/// unmapped and the row is dropped (and counted).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelMap {
    /// Exact raw spellings, compared lowercase.
    pub exact: Vec<(String, ClassLabel)>,
    /// Case-insensitive prefixes, e.g. "ftp-patator" covers "FTP-Patator - Attempted".
    pub prefixes: Vec<(String, ClassLabel)>,
}

impl Default for LabelMap {
    fn default() -> Self {
        LabelMap {
            exact: vec![("benign".into(), ClassLabel::Benign)],
            // DoS and DDoS variants both collapse onto the Dos class.
            prefixes: vec![
                ("ftp-patator".into(), ClassLabel::FtpPatator),
                ("ddos".into(), ClassLabel::Dos),
                ("dos".into(), ClassLabel::Dos),
            ],
        }
    }
}

impl LabelMap {
    pub fn map(&self, raw: &str) -> Option<ClassLabel> {
        let norm = raw.trim().to_ascii_lowercase();
        for (k, v) in &self.exact {
            if norm == *k {
                return Some(*v);
            }
        }
        for (p, v) in &self.prefixes {
            if norm.starts_with(p.as_str()) {
                return Some(*v);
            }
        }
        None
    }
}

/// Column-name aliases for metadata columns, compared lowercase after
/// trimming. CICFlowMeter releases disagree on exact header spellings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnAliases {
    pub flow_id: Vec<String>,
    pub src_ip: Vec<String>,
    pub dst_ip: Vec<String>,
    pub src_port: Vec<String>,
    pub dst_port: Vec<String>,
    pub protocol: Vec<String>,
    /// Metadata columns carried by some releases that we parse past
    /// without keeping (timestamps and similar).
    pub skip: Vec<String>,
}

impl Default for ColumnAliases {
    fn default() -> Self {
        fn v(items: &[&str]) -> Vec<String> {
            items.iter().map(|s| s.to_string()).collect()
        }
        ColumnAliases {
            flow_id: v(&["flow id", "flow_id"]),
            src_ip: v(&["source ip", "src ip", "src_ip"]),
            dst_ip: v(&["destination ip", "dst ip", "dst_ip"]),
            src_port: v(&["source port", "src port", "src_port"]),
            dst_port: v(&["destination port", "dst port", "dst_port"]),
            protocol: v(&["protocol"]),
            skip: v(&["timestamp"]),
        }
    }
}

impl ColumnAliases {
    fn matches(list: &[String], header: &str) -> bool {
        list.iter().any(|a| a == header)
    }
}

/// Summary of one load, exported as JSON next to experiment outputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_read: u64,
    pub rows_kept: u64,
    pub rows_dropped_unmapped: u64,
    /// Rows with at least one non-finite feature replaced by 0.0.
    pub rows_repaired_nonfinite: u64,
    /// Line numbers of rows that could not be parsed; skipped, never silent.
    pub malformed_lines: Vec<u64>,
}

/// Replace NaN/Inf entries with 0.0 in place. Returns true when anything
/// was repaired. Idempotent.
pub fn sanitize_features(features: &mut [f64]) -> bool {
    let mut repaired = false;
    for v in features.iter_mut() {
        if !v.is_finite() {
            *v = 0.0;
            repaired = true;
        }
    }
    repaired
}

fn parse_feature(raw: &str) -> std::result::Result<f64, ()> {
    let t = raw.trim();
    if t.is_empty() {
        return Ok(f64::NAN);
    }
    match t.to_ascii_lowercase().as_str() {
        "nan" => return Ok(f64::NAN),
        "inf" | "infinity" | "+inf" | "+infinity" => return Ok(f64::INFINITY),
        "-inf" | "-infinity" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    t.parse::<f64>().map_err(|_| ())
}

#[derive(Debug)]
struct HeaderLayout {
    label: usize,
    flow_id: Option<usize>,
    src_ip: usize,
    dst_ip: usize,
    src_port: Option<usize>,
    dst_port: Option<usize>,
    protocol: Option<usize>,
    /// (column index, trimmed name) of every feature column, header order.
    features: Vec<(usize, String)>,
}

fn resolve_header(headers: &csv::StringRecord, aliases: &ColumnAliases) -> Result<HeaderLayout> {
    let mut label = None;
    let mut flow_id = None;
    let mut src_ip = None;
    let mut dst_ip = None;
    let mut src_port = None;
    let mut dst_port = None;
    let mut protocol = None;
    let mut features = Vec::new();

    for (idx, raw) in headers.iter().enumerate() {
        let name = raw.trim().to_ascii_lowercase();
        if name == "label" {
            label = Some(idx);
        } else if ColumnAliases::matches(&aliases.flow_id, &name) {
            flow_id = Some(idx);
        } else if ColumnAliases::matches(&aliases.src_ip, &name) {
            src_ip = Some(idx);
        } else if ColumnAliases::matches(&aliases.dst_ip, &name) {
            dst_ip = Some(idx);
        } else if ColumnAliases::matches(&aliases.src_port, &name) {
            src_port = Some(idx);
        } else if ColumnAliases::matches(&aliases.dst_port, &name) {
            dst_port = Some(idx);
        } else if ColumnAliases::matches(&aliases.protocol, &name) {
            protocol = Some(idx);
        } else if ColumnAliases::matches(&aliases.skip, &name) {
            // dropped
        } else {
            features.push((idx, raw.trim().to_string()));
        }
    }

    Ok(HeaderLayout {
        label: label.ok_or_else(|| Error::MissingColumn("Label".into()))?,
        flow_id,
        src_ip: src_ip.ok_or_else(|| Error::MissingColumn("Source IP".into()))?,
        dst_ip: dst_ip.ok_or_else(|| Error::MissingColumn("Destination IP".into()))?,
        src_port,
        dst_port,
        protocol,
        features,
    })
}

/// Load labeled flows from a CSV file. Rows with unmapped labels are dropped
/// and counted; rows that fail numeric parsing are skipped and their line
/// numbers recorded; non-finite features are repaired to 0.0.
pub fn load_flows(path: &Path, label_map: &LabelMap) -> Result<(Dataset, LoadReport)> {
    let file = std::fs::File::open(path)?;
    load_flows_from_reader(file, label_map, &ColumnAliases::default())
}

pub fn load_flows_from_reader<R: Read>(
    reader: R,
    label_map: &LabelMap,
    aliases: &ColumnAliases,
) -> Result<(Dataset, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let layout = resolve_header(rdr.headers()?, aliases)?;

    let mut report = LoadReport::default();
    let mut records = Vec::new();

    for (row_idx, row) in rdr.records().enumerate() {
        let line_no = row_idx as u64 + 2; // 1-based, after the header line
        let row = match row {
            Ok(r) => r,
            Err(_) => {
                report.rows_read += 1;
                report.malformed_lines.push(line_no);
                continue;
            }
        };
        report.rows_read += 1;

        let get = |i: usize| row.get(i).unwrap_or("");
        let label = match label_map.map(get(layout.label)) {
            Some(l) => l,
            None => {
                report.rows_dropped_unmapped += 1;
                continue;
            }
        };

        let mut features = Vec::with_capacity(layout.features.len());
        let mut malformed = false;
        for (idx, _) in &layout.features {
            match parse_feature(get(*idx)) {
                Ok(v) => features.push(v),
                Err(()) => {
                    malformed = true;
                    break;
                }
            }
        }
        let src_port = match parse_port(layout.src_port.map(get)) {
            Ok(p) => p,
            Err(()) => {
                malformed = true;
                0
            }
        };
        let dst_port = match parse_port(layout.dst_port.map(get)) {
            Ok(p) => p,
            Err(()) => {
                malformed = true;
                0
            }
        };
        if malformed {
            report.malformed_lines.push(line_no);
            continue;
        }
        if sanitize_features(&mut features) {
            report.rows_repaired_nonfinite += 1;
        }

        let src_ip = get(layout.src_ip).trim().to_string();
        let dst_ip = get(layout.dst_ip).trim().to_string();
        if src_ip.is_empty() || dst_ip.is_empty() {
            report.malformed_lines.push(line_no);
            continue;
        }

        records.push(FlowRecord {
            flow_id: layout
                .flow_id
                .map(|i| get(i).trim().to_string())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| format!("row-{line_no}")),
            src_ip,
            dst_ip,
            src_port,
            dst_port,
            protocol: layout
                .protocol
                .map_or(Protocol::Other, |i| Protocol::parse(get(i))),
            features,
            label,
        });
        report.rows_kept += 1;
    }

    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let feature_names = layout.features.into_iter().map(|(_, n)| n).collect();
    Ok((Dataset::new(records, feature_names), report))
}

fn parse_port(raw: Option<&str>) -> std::result::Result<u16, ()> {
    match raw {
        None => Ok(0),
        Some(s) => {
            let t = s.trim();
            if t.is_empty() {
                Ok(0)
            } else {
                t.parse::<u16>().map_err(|_| ())
            }
        }
    }
}

/// Write a dataset back out in the same CSV schema the loader accepts.
pub fn write_flows<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec![
        "Flow ID".to_string(),
        "Source IP".to_string(),
        "Source Port".to_string(),
        "Destination IP".to_string(),
        "Destination Port".to_string(),
        "Protocol".to_string(),
    ];
    header.extend(dataset.feature_names.iter().cloned());
    header.push("Label".to_string());
    wtr.write_record(&header)?;

    for r in &dataset.records {
        let mut row = vec![
            r.flow_id.clone(),
            r.src_ip.clone(),
            r.src_port.to_string(),
            r.dst_ip.clone(),
            r.dst_port.to_string(),
            r.protocol.as_str().to_string(),
        ];
        row.extend(r.features.iter().map(|v| v.to_string()));
        row.push(r.label.canonical_raw().to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Seeded random split. |train| = round(train_fraction * N), clamped so both
/// parts keep at least one record. Record order within each part follows the
/// input order.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidFraction(train_fraction));
    }
    let n = dataset.len();
    let n_train = fraction_count(train_fraction, n).clamp(1, n - 1);

    let mut indices: Vec<usize> = (0..n).collect();
    seeded_shuffle(&mut indices, seed);
    let mut train_idx: Vec<usize> = indices[..n_train].to_vec();
    let mut test_idx: Vec<usize> = indices[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let pick = |idx: &[usize]| {
        Dataset::new(
            idx.iter().map(|&i| dataset.records[i].clone()).collect(),
            dataset.feature_names.clone(),
        )
    };
    Ok((pick(&train_idx), pick(&test_idx)))
}

/// Class-stratified variant of [`split`]: the seeded shuffle and the
/// round-then-clamp sizing happen per class, so both parts keep the input's
/// class mix (up to rounding).
pub fn split_stratified(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidFraction(train_fraction));
    }
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (c, class) in ClassLabel::ALL.iter().enumerate() {
        let mut indices: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.records[i].label == *class)
            .collect();
        if indices.is_empty() {
            continue;
        }
        seeded_shuffle(&mut indices, seed.wrapping_add(c as u64));
        let n = indices.len();
        let n_train = if n == 1 {
            // a singleton class cannot be in both parts; send it to train
            1
        } else {
            fraction_count(train_fraction, n).clamp(1, n - 1)
        };
        train_idx.extend_from_slice(&indices[..n_train]);
        test_idx.extend_from_slice(&indices[n_train..]);
    }
    if test_idx.is_empty() {
        // all classes were singletons; fall back to the plain split
        return split(dataset, train_fraction, seed);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize]| {
        Dataset::new(
            idx.iter().map(|&i| dataset.records[i].clone()).collect(),
            dataset.feature_names.clone(),
        )
    };
    Ok((pick(&train_idx), pick(&test_idx)))
}

/// Feature matrix plus the aligned label vector.
pub fn to_matrix(dataset: &Dataset) -> (Matrix, Vec<ClassLabel>) {
    let f = dataset.feature_count();
    let mut m = Matrix::zeros(dataset.len(), f);
    let mut labels = Vec::with_capacity(dataset.len());
    for (i, r) in dataset.records.iter().enumerate() {
        debug_assert_eq!(r.features.len(), f);
        for (j, &v) in r.features.iter().enumerate() {
            m.set(i, j, v);
        }
        labels.push(r.label);
    }
    (m, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_csv() -> String {
        let mut s = String::from(
            "Flow ID,Source IP,Source Port,Destination IP,Destination Port,Protocol,Timestamp,Flow Duration,Flow Bytes/s, Label\n",
        );
        s.push_str("f1,10.0.0.1,4242,10.0.0.2,21,TCP,2017-07-04 10:00,100,3.5,BENIGN\n");
        s.push_str("f2,10.0.0.1,4243,10.0.0.2,21,6,2017-07-04 10:01,200,Infinity,FTP-Patator\n");
        s.push_str("f3,10.0.0.3,4244,10.0.0.4,80,TCP,2017-07-04 10:02,300,NaN,DoS Hulk\n");
        s.push_str("f4,10.0.0.3,4245,10.0.0.4,80,UDP,2017-07-04 10:03,400,1.25,DDoS\n");
        s.push_str("f5,10.0.0.5,4246,10.0.0.6,443,TCP,2017-07-04 10:04,500,2.0,Heartbleed\n");
        s
    }

    fn load_sample() -> (Dataset, LoadReport) {
        load_flows_from_reader(
            sample_csv().as_bytes(),
            &LabelMap::default(),
            &ColumnAliases::default(),
        )
        .unwrap()
    }

    #[test]
    fn maps_labels_and_collects_classes() {
        let (ds, report) = load_sample();
        assert_eq!(ds.len(), 4);
        assert_eq!(report.rows_read, 5);
        assert_eq!(report.rows_dropped_unmapped, 1); // Heartbleed unmapped
        let classes: Vec<_> = ds.class_set.iter().copied().collect();
        assert_eq!(
            classes,
            vec![ClassLabel::Benign, ClassLabel::FtpPatator, ClassLabel::Dos]
        );
        assert_eq!(ds.feature_names, vec!["Flow Duration", "Flow Bytes/s"]);
    }

    #[test]
    fn repairs_nonfinite_features() {
        let (ds, report) = load_sample();
        assert_eq!(report.rows_repaired_nonfinite, 2); // Infinity and NaN rows
        for r in &ds.records {
            assert!(r.features.iter().all(|v| v.is_finite()));
        }
        // repaired values land at exactly 0.0
        assert_eq!(ds.records[1].features[1], 0.0);
    }

    #[test]
    fn metadata_is_parsed_not_featurized() {
        let (ds, _) = load_sample();
        let r = &ds.records[0];
        assert_eq!(r.src_ip, "10.0.0.1");
        assert_eq!(r.dst_port, 21);
        assert_eq!(r.protocol, Protocol::Tcp);
        assert_eq!(r.features.len(), 2);
        // numeric protocol spelling parses the same way
        assert_eq!(ds.records[1].protocol, Protocol::Tcp);
    }

    #[test]
    fn empty_csv_is_rejected() {
        let csv = "Flow ID,Source IP,Destination IP,Label\n";
        let err = load_flows_from_reader(
            csv.as_bytes(),
            &LabelMap::default(),
            &ColumnAliases::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
    }

    #[test]
    fn missing_label_column_is_rejected() {
        let csv = "Flow ID,Source IP,Destination IP,Flow Duration\nf,1.1.1.1,2.2.2.2,10\n";
        let err = load_flows_from_reader(
            csv.as_bytes(),
            &LabelMap::default(),
            &ColumnAliases::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "Label"));
    }

    #[test]
    fn malformed_rows_are_skipped_and_reported() {
        let mut csv = sample_csv();
        csv.push_str("f6,10.0.0.1,4247,10.0.0.2,21,TCP,2017-07-04 10:05,not-a-number,1.0,BENIGN\n");
        let (ds, report) = load_flows_from_reader(
            csv.as_bytes(),
            &LabelMap::default(),
            &ColumnAliases::default(),
        )
        .unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(report.malformed_lines, vec![7]);
    }

    #[test]
    fn ten_row_csv_with_two_unmapped_drops_two() {
        let mut csv = String::from("Source IP,Destination IP,f0,Label\n");
        for i in 0..8 {
            csv.push_str(&format!("1.1.1.{i},2.2.2.2,{i},BENIGN\n"));
        }
        csv.push_str("1.1.1.8,2.2.2.2,8,Heartbleed\n");
        csv.push_str("1.1.1.9,2.2.2.2,9,Heartbleed\n");
        let (ds, report) = load_flows_from_reader(
            csv.as_bytes(),
            &LabelMap::default(),
            &ColumnAliases::default(),
        )
        .unwrap();
        assert_eq!(ds.len(), 8);
        assert_eq!(report.rows_dropped_unmapped, 2);
    }

    #[test]
    fn loading_is_deterministic() {
        let (a, ra) = load_sample();
        let (b, rb) = load_sample();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    fn tiny_dataset(n: usize) -> Dataset {
        let records = (0..n)
            .map(|i| FlowRecord {
                flow_id: format!("f{i}"),
                src_ip: "10.0.0.1".into(),
                dst_ip: "10.0.0.2".into(),
                src_port: 1000 + i as u16,
                dst_port: 80,
                protocol: Protocol::Tcp,
                features: vec![i as f64, (i * i) as f64],
                label: if i % 3 == 0 {
                    ClassLabel::Dos
                } else {
                    ClassLabel::Benign
                },
            })
            .collect();
        Dataset::new(records, vec!["a".into(), "b".into()])
    }

    #[test]
    fn split_sizes_match_fraction() {
        let ds = tiny_dataset(100);
        let (train, test) = split(&ds, 0.6, 7).unwrap();
        assert_eq!(train.len(), 60);
        assert_eq!(test.len(), 40);
    }

    #[test]
    fn split_is_deterministic_and_a_partition() {
        let ds = tiny_dataset(10);
        let (tr1, te1) = split(&ds, 0.5, 123).unwrap();
        let (tr2, te2) = split(&ds, 0.5, 123).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);

        let mut ids: Vec<&str> = tr1
            .records
            .iter()
            .chain(te1.records.iter())
            .map(|r| r.flow_id.as_str())
            .collect();
        ids.sort_unstable();
        let mut all: Vec<&str> = ds.records.iter().map(|r| r.flow_id.as_str()).collect();
        all.sort_unstable();
        assert_eq!(ids, all);
    }

    #[test]
    fn split_clamps_to_keep_both_parts_nonempty() {
        // round(9.9) = 10 would empty the test part; the clamp keeps 9/1.
        let ds = tiny_dataset(10);
        let (train, test) = split(&ds, 0.99, 0).unwrap();
        assert_eq!((train.len(), test.len()), (9, 1));
        let (train, test) = split(&ds, 0.01, 0).unwrap();
        assert_eq!((train.len(), test.len()), (1, 9));
        // exhaustive small-N check: both parts always non-empty
        for n in 2..=8 {
            let ds = tiny_dataset(n);
            for frac in [0.01, 0.2, 0.5, 0.8, 0.99] {
                let (tr, te) = split(&ds, frac, 5).unwrap();
                assert!(!tr.is_empty() && !te.is_empty());
                assert_eq!(tr.len() + te.len(), n);
            }
        }
    }

    #[test]
    fn stratified_split_preserves_class_mix() {
        let mut records = Vec::new();
        for i in 0..90 {
            let label = if i < 60 {
                ClassLabel::Benign
            } else if i < 80 {
                ClassLabel::Dos
            } else {
                ClassLabel::FtpPatator
            };
            records.push(FlowRecord {
                flow_id: format!("f{i}"),
                src_ip: "10.0.0.1".into(),
                dst_ip: "10.0.0.2".into(),
                src_port: 1,
                dst_port: 2,
                protocol: Protocol::Tcp,
                features: vec![i as f64],
                label,
            });
        }
        let ds = Dataset::new(records, vec!["a".into()]);
        let (train, test) = split_stratified(&ds, 0.5, 3).unwrap();
        let count = |part: &Dataset, label: ClassLabel| {
            part.records.iter().filter(|r| r.label == label).count()
        };
        assert_eq!(count(&train, ClassLabel::Benign), 30);
        assert_eq!(count(&test, ClassLabel::Benign), 30);
        assert_eq!(count(&train, ClassLabel::Dos), 10);
        assert_eq!(count(&train, ClassLabel::FtpPatator), 5);
        assert_eq!(train.len() + test.len(), 90);

        let (t1, _) = split_stratified(&ds, 0.5, 3).unwrap();
        assert_eq!(t1, train);
    }

    #[test]
    fn split_rejects_bad_fractions() {
        let ds = tiny_dataset(4);
        assert!(matches!(split(&ds, 0.0, 0), Err(Error::InvalidFraction(_))));
        assert!(matches!(split(&ds, 1.0, 0), Err(Error::InvalidFraction(_))));
    }

    #[test]
    fn to_matrix_shape_and_alignment() {
        let ds = tiny_dataset(3);
        let (m, labels) = to_matrix(&ds);
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(m.row(2), &[2.0, 4.0]);
        assert_eq!(labels.len(), 3);
        assert_eq!(labels[0], ClassLabel::Dos);
    }

    #[test]
    fn csv_round_trip_preserves_matrix_bitwise() {
        let (ds, _) = load_sample();
        let mut buf = Vec::new();
        write_flows(&ds, &mut buf).unwrap();
        let (back, _) = load_flows_from_reader(
            buf.as_slice(),
            &LabelMap::default(),
            &ColumnAliases::default(),
        )
        .unwrap();
        let (m1, l1) = to_matrix(&ds);
        let (m2, l2) = to_matrix(&back);
        assert_eq!(m1, m2);
        assert_eq!(l1, l2);
    }

    #[test]
    fn sanitize_is_idempotent() {
        let mut v = vec![1.0, f64::NAN, f64::INFINITY, -3.0];
        sanitize_features(&mut v);
        let once = v.clone();
        assert!(!sanitize_features(&mut v));
        assert_eq!(v, once);
        assert_eq!(once, vec![1.0, 0.0, 0.0, -3.0]);
    }
}
