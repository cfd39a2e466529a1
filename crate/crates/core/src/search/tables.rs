use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{select_best_per_snr, SchemeCandidate};
use crate::io::{read_json, OutputSet};
use crate::{Error, Result};

/// Complexity columns of the best-scheme tables.
pub const COMPLEXITY_BUCKETS: [f64; 7] = [8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0];

/// Best scheme with complexity at most `bucket` at one power point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub bucket: f64,
    pub pt_n0_db: f64,
    pub es_n0_db: f64,
    pub eb_n0_db: f64,
    /// Bits/s/Hz.
    pub c: f64,
    pub m: u32,
    pub q: u32,
    pub p: u32,
    pub l: usize,
    pub rs: f64,
    pub complexity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    Csv,
    Json,
    Both,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "both" => Ok(TableFormat::Both),
            _ => Err(Error::InvalidInput(format!("unknown table format {s:?}"))),
        }
    }
}

/// One block of rows per bucket, each listing the winner at every point of
/// `pt_grid` among the candidates that fit the bucket.
pub fn best_scheme_table(cands: &[SchemeCandidate], pt_grid: &[f64], buckets: &[f64]) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for &bucket in buckets {
        let fit: Vec<SchemeCandidate> = cands.iter().filter(|c| c.complexity <= bucket + 1e-9).cloned().collect();
        for s in select_best_per_snr(&fit, pt_grid) {
            rows.push(TableRow {
                bucket,
                pt_n0_db: s.pt_n0_db,
                es_n0_db: s.es_n0_db,
                eb_n0_db: s.eb_n0_db,
                c: s.c,
                m: s.scheme.m,
                q: s.scheme.q,
                p: s.scheme.p,
                l: s.scheme.pulse.length,
                rs: s.rs,
                complexity: s.complexity,
            });
        }
    }
    rows
}

/// CSV with columns `bucket,pt_n0_db,es_n0_db,eb_n0_db,c,m,h,l,p,rs,y`.
pub fn write_table_csv<W: Write>(rows: &[TableRow], mut w: W) -> Result<()> {
    writeln!(w, "bucket,pt_n0_db,es_n0_db,eb_n0_db,c,m,h,l,p,rs,y")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.2},{:.2},{:.2},{:.4},{},{}/{},{},{},{:.2},{}",
            r.bucket, r.pt_n0_db, r.es_n0_db, r.eb_n0_db, r.c, r.m, r.q, r.p, r.l, r.p, r.rs, r.complexity
        )?;
    }
    Ok(())
}

/// Stages the table as `<stem>.csv` and/or `<stem>.json`, plus the evaluated
/// candidates as `<stem>.candidates.json`.
pub fn emit_tables(
    rows: &[TableRow],
    cands: &[SchemeCandidate],
    format: TableFormat,
    stem: &Path,
    out: &mut OutputSet,
) -> Result<()> {
    let with_ext = |ext: &str| {
        let mut s = stem.as_os_str().to_owned();
        s.push(ext);
        std::path::PathBuf::from(s)
    };
    if matches!(format, TableFormat::Csv | TableFormat::Both) {
        out.add_with(with_ext(".csv"), |buf| write_table_csv(rows, buf))?;
    }
    if matches!(format, TableFormat::Json | TableFormat::Both) {
        out.add_json(with_ext(".json"), rows)?;
    }
    out.add_json(with_ext(".candidates.json"), cands)
}

/// Reads candidates written by [`emit_tables`].
pub fn load_candidates(path: &Path) -> Result<Vec<SchemeCandidate>> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{CurveSample, Criterion};
    use crate::waveform::{CpmScheme, Pulse};

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        write_table_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn candidates_round_trip_exactly() {
        let mut c = SchemeCandidate::new(CpmScheme::new(2, 1, 5, Pulse::rec(2)).unwrap());
        c.rs = Some(1.183_456_789_012_345);
        c.criterion = Some(Criterion::Joint);
        c.curve = vec![
            CurveSample {
                es_n0_db: -3.0,
                bits_per_symbol: 0.1 + 0.2,
                std_error: 1e-17,
            },
            CurveSample {
                es_n0_db: 3.0,
                bits_per_symbol: 1.0 / 3.0,
                std_error: 0.0,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("t");
        let rows = best_scheme_table(std::slice::from_ref(&c), &[0.0], &COMPLEXITY_BUCKETS);
        let mut out = OutputSet::new();
        emit_tables(&rows, std::slice::from_ref(&c), TableFormat::Both, &stem, &mut out).unwrap();
        out.commit().unwrap();
        let back = load_candidates(&dir.path().join("t.candidates.json")).unwrap();
        assert_eq!(back, vec![c]);
        // the scheme has Y = 40, so only the 64+ buckets list it
        assert_eq!(rows.len(), 4);
    }
}
