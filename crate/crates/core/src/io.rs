//! CSV readers and writers for samples, calibration points and traces.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Deserialize;
use thiserror::Error;

use crate::channel::{AnchorId, CalibrationPoint, RssiSample};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("row {row}: {message}")]
    Row { row: u64, message: String },
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: &'static str, found: String },
    #[error("no data rows")]
    Empty,
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Shortest decimal that parses back to exactly `x`; scientific notation
/// for very large or very small magnitudes.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub const SAMPLES_HEADER: &str = "anchor_id,position_index,sequence,rssi_db";
pub const CALIBRATION_HEADER: &str = "anchor_id,distance_m,rssi_db";

/// One sample row tagged with the test position it was taken at.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SampleRow {
    pub anchor_id: u32,
    pub position_index: usize,
    pub sequence: u32,
    pub rssi_db: f64,
}

impl SampleRow {
    pub fn sample(&self) -> RssiSample {
        RssiSample { anchor_id: AnchorId(self.anchor_id), rssi: self.rssi_db, sequence: self.sequence }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
struct CalibrationRow {
    anchor_id: u32,
    distance_m: f64,
    rssi_db: f64,
}

pub fn write_samples(rows: &[SampleRow]) -> String {
    let mut out = format!("{SAMPLES_HEADER}\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.anchor_id, r.position_index, r.sequence, fmt_num(r.rssi_db)));
    }
    out
}

pub fn write_calibration(points: &BTreeMap<AnchorId, Vec<CalibrationPoint>>) -> String {
    let mut out = format!("{CALIBRATION_HEADER}\n");
    for (id, pts) in points {
        for p in pts {
            out.push_str(&format!("{},{},{}\n", id.0, fmt_num(p.distance), fmt_num(p.rssi)));
        }
    }
    out
}

fn read_rows<T: for<'de> Deserialize<'de>>(input: impl Read, header: &'static str) -> Result<Vec<T>, IoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let found = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(IoError::Header { expected: header, found });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<T>().enumerate() {
        // header is line 1
        let row = i as u64 + 2;
        rows.push(rec.map_err(|e| IoError::Row { row, message: e.to_string() })?);
    }
    if rows.is_empty() {
        return Err(IoError::Empty);
    }
    Ok(rows)
}

pub fn read_samples(input: impl Read) -> Result<Vec<SampleRow>, IoError> {
    let rows: Vec<SampleRow> = read_rows(input, SAMPLES_HEADER)?;
    for (i, r) in rows.iter().enumerate() {
        if !r.rssi_db.is_finite() {
            return Err(IoError::Row {
                row: i as u64 + 2,
                message: format!("rssi_db must be finite, got {}", r.rssi_db),
            });
        }
    }
    Ok(rows)
}

/// Calibration points grouped by anchor.
pub fn read_calibration(input: impl Read) -> Result<BTreeMap<AnchorId, Vec<CalibrationPoint>>, IoError> {
    let rows: Vec<CalibrationRow> = read_rows(input, CALIBRATION_HEADER)?;
    let mut out: BTreeMap<AnchorId, Vec<CalibrationPoint>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let row = i as u64 + 2;
        if !(r.distance_m > 0.0 && r.distance_m.is_finite()) {
            return Err(IoError::Row { row, message: format!("distance_m must be positive, got {}", r.distance_m) });
        }
        if !r.rssi_db.is_finite() {
            return Err(IoError::Row { row, message: format!("rssi_db must be finite, got {}", r.rssi_db) });
        }
        out.entry(AnchorId(r.anchor_id))
            .or_default()
            .push(CalibrationPoint { distance: r.distance_m, rssi: r.rssi_db });
    }
    Ok(out)
}

/// Samples grouped by test position index.
pub fn group_by_position(rows: &[SampleRow]) -> BTreeMap<usize, Vec<RssiSample>> {
    let mut out: BTreeMap<usize, Vec<RssiSample>> = BTreeMap::new();
    for r in rows {
        out.entry(r.position_index).or_default().push(r.sample());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.5), "1.5");
        assert_eq!(fmt_num(-40.0), "-40");
        assert_eq!(fmt_num(1e-7), "1e-7");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
    }

    proptest! {
        #[test]
        fn formatted_numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let back: f64 = fmt_num(x).parse().unwrap();
            prop_assert_eq!(back, if x == 0.0 { 0.0 } else { x });
        }
    }

    #[test]
    fn samples_round_trip() {
        let rows = vec![
            SampleRow { anchor_id: 1, position_index: 0, sequence: 0, rssi_db: -52.123456789012345 },
            SampleRow { anchor_id: 2, position_index: 3, sequence: 7, rssi_db: -61.0 },
        ];
        let text = write_samples(&rows);
        assert!(text.starts_with(SAMPLES_HEADER));
        assert_eq!(read_samples(text.as_bytes()).unwrap(), rows);
        let g = group_by_position(&rows);
        assert_eq!(g[&3][0].anchor_id, AnchorId(2));
    }

    #[test]
    fn calibration_round_trip_and_errors() {
        let mut m = BTreeMap::new();
        m.insert(
            AnchorId(4),
            vec![CalibrationPoint { distance: 1.0, rssi: -40.0 }, CalibrationPoint { distance: 2.5, rssi: -47.9 }],
        );
        let text = write_calibration(&m);
        assert_eq!(read_calibration(text.as_bytes()).unwrap(), m);

        let bad = "anchor_id,distance_m,rssi_db\n1,1,-40\n1,abc,-41\n";
        match read_calibration(bad.as_bytes()) {
            Err(IoError::Row { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
        let neg = "anchor_id,distance_m,rssi_db\n1,-2,-40\n";
        assert!(matches!(read_calibration(neg.as_bytes()), Err(IoError::Row { row: 2, .. })));
        assert!(matches!(read_calibration("a,b,c\n1,2,3\n".as_bytes()), Err(IoError::Header { .. })));
        assert!(matches!(read_calibration("anchor_id,distance_m,rssi_db\n".as_bytes()), Err(IoError::Empty)));
    }
}
