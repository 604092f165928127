//! CSV persistence in the column layout of the public behavior dataset.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{LabeledSample, SatisfactionError, UserContext};

pub const CSV_HEADER: [&str; 19] = [
    "Date",
    "Time",
    "Day",
    "Classified days",
    "Time period",
    "Location",
    "Location name",
    "Speed",
    "Speed range",
    "Activity",
    "Request arrived",
    "Application",
    "Service",
    "Demand rate",
    "Min rate",
    "Given rate",
    "Delta",
    "Max Delta",
    "Satisfaction",
];

/// Optional trailing column, written only when a dataset mixes several users.
pub const USER_ID_COLUMN: &str = "User ID";

fn normalize(name: &str) -> String {
    name.trim().to_lowercase().replace('Δ', "delta")
}

/// Writes samples with the dataset header to any writer.
pub fn write_csv_to<W: Write>(samples: &[LabeledSample], out: W) -> Result<(), SatisfactionError> {
    let with_ids = samples.iter().any(|s| s.context.user_id != 0);
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if with_ids {
        header.push(USER_ID_COLUMN);
    }
    w.write_record(&header)?;
    for s in samples {
        let c = &s.context;
        let mut row = vec![
            c.date.clone(),
            c.time.clone(),
            c.day.clone(),
            c.classified_day.clone(),
            c.time_period.clone(),
            format!("[{}, {}]", c.location.0, c.location.1),
            c.location_name.clone(),
            format!("{:.1}", c.speed_kmh),
            c.speed_range.clone(),
            c.activity.clone(),
            (c.request_arrived as u8).to_string(),
            c.application.clone(),
            c.service.clone(),
            c.demand_rate.to_string(),
            c.min_rate.to_string(),
            s.given_rate.to_string(),
            s.delta.to_string(),
            c.max_delta.to_string(),
            format!("{:.1}", s.satisfaction as f64),
        ];
        if with_ids {
            row.push(c.user_id.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(samples: &[LabeledSample], path: impl AsRef<Path>) -> Result<(), SatisfactionError> {
    let file = std::fs::File::create(path)?;
    write_csv_to(samples, std::io::BufWriter::new(file))
}

/// SHA-256 of the canonical CSV encoding; used as dataset provenance.
pub fn dataset_hash(samples: &[LabeledSample]) -> String {
    let mut buf = Vec::new();
    write_csv_to(samples, &mut buf).expect("in-memory csv write");
    hex::encode(Sha256::digest(&buf))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedRow {
    /// 1-based line number in the file, header is line 1.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub samples: Vec<LabeledSample>,
    pub skipped: Vec<SkippedRow>,
}

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<IngestReport, SatisfactionError> {
    let file = std::fs::File::open(path)?;
    ingest_reader(std::io::BufReader::new(file))
}

struct Columns {
    idx: [usize; 19],
    user_id: Option<usize>,
}

fn parse_location(s: &str) -> Option<(u32, u32)> {
    let inner = s.trim().strip_prefix('[')?.strip_suffix(']')?;
    let mut it = inner.split(',').map(|p| p.trim().parse::<u32>());
    let x = it.next()?.ok()?;
    let y = it.next()?.ok()?;
    it.next().is_none().then_some((x, y))
}

fn parse_rate(field: &str, name: &str) -> Result<u32, String> {
    let v: f64 = field.trim().parse().map_err(|_| format!("non-numeric {name} `{field}`"))?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(format!("invalid {name} `{field}`"));
    }
    Ok(v as u32)
}

fn parse_row(rec: &csv::StringRecord, cols: &Columns) -> Result<LabeledSample, String> {
    let f = |i: usize| rec.get(cols.idx[i]).unwrap_or("").trim();
    let location = parse_location(f(5)).ok_or_else(|| format!("invalid location `{}`", f(5)))?;
    let speed_kmh: f64 = f(7).parse().map_err(|_| format!("non-numeric speed `{}`", f(7)))?;
    let request_arrived = match f(10) {
        "1" | "1.0" | "true" | "True" => true,
        "0" | "0.0" | "false" | "False" => false,
        other => return Err(format!("invalid request flag `{other}`")),
    };
    let demand_rate = parse_rate(f(13), "demand rate")?;
    let min_rate = parse_rate(f(14), "min rate")?;
    let given_rate = parse_rate(f(15), "given rate")?;
    let delta: f64 = f(16).parse().map_err(|_| format!("non-numeric delta `{}`", f(16)))?;
    let max_delta = parse_rate(f(17), "max delta")?;
    let sat: f64 = f(18).parse().map_err(|_| format!("non-numeric satisfaction `{}`", f(18)))?;
    if sat.fract() != 0.0 || !(1.0..=5.0).contains(&sat) {
        return Err(format!("satisfaction `{}` is not a level 1..5", f(18)));
    }
    let user_id = match cols.user_id {
        Some(i) => rec
            .get(i)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| "invalid user id".to_string())?,
        None => 0,
    };
    let context = UserContext {
        user_id,
        date: f(0).to_string(),
        time: f(1).to_string(),
        day: f(2).to_string(),
        classified_day: f(3).to_string(),
        time_period: f(4).to_string(),
        location,
        location_name: f(6).to_string(),
        speed_kmh,
        speed_range: f(8).to_string(),
        activity: f(9).to_string(),
        request_arrived,
        application: f(11).to_string(),
        service: f(12).to_string(),
        demand_rate,
        min_rate,
        max_delta,
    };
    if !context.is_valid() {
        return Err("demand rate below min rate or invalid speed".into());
    }
    let expected = demand_rate as i64 - given_rate as i64;
    if delta.fract() != 0.0 || delta as i64 != expected {
        return Err(format!("delta {delta} != demand - given ({expected})"));
    }
    Ok(LabeledSample { context, given_rate, delta: expected, satisfaction: sat as u8 })
}

/// Parses a dataset. Header names are matched case-insensitively; columns
/// outside the dataset layout are ignored. Rows that fail to parse or violate
/// the sample invariants are skipped and reported.
pub fn ingest_reader<R: Read>(input: R) -> Result<IngestReport, SatisfactionError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(SatisfactionError::MissingHeader),
    };
    if header.iter().all(|h| h.trim().is_empty()) {
        return Err(SatisfactionError::MissingHeader);
    }
    let positions: HashMap<String, usize> =
        header.iter().enumerate().map(|(i, h)| (normalize(h), i)).collect();
    let mut idx = [0usize; 19];
    for (slot, name) in CSV_HEADER.iter().enumerate() {
        idx[slot] = *positions
            .get(&normalize(name))
            .ok_or_else(|| SatisfactionError::MissingColumn(name.to_string()))?;
    }
    let cols = Columns { idx, user_id: positions.get(&normalize(USER_ID_COLUMN)).copied() };
    let mut report = IngestReport::default();
    for (i, rec) in records.enumerate() {
        let line = i as u64 + 2;
        match rec {
            Ok(rec) => match parse_row(&rec, &cols) {
                Ok(s) => report.samples.push(s),
                Err(reason) => report.skipped.push(SkippedRow { line, reason }),
            },
            Err(e) => report.skipped.push(SkippedRow { line, reason: e.to_string() }),
        }
    }
    Ok(report)
}
