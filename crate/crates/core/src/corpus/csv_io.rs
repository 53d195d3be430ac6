use std::fs::File;
use std::path::Path;

use super::{CorpusError, RawRecord};

pub const DEFAULT_NARRATIVE_COLUMN: &str = "Summary";
pub const DEFAULT_LABEL_COLUMN: &str = "damageLevel";

/// Records read from a CSV file plus the rows dropped for an empty label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvLoad {
    pub records: Vec<RawRecord>,
    pub rows_read: usize,
    pub dropped_empty_label: usize,
}

/// Reads `narrative_column` / `label_column` from a headed UTF-8 CSV.
///
/// Row numbers in errors are 1-based file lines as reported by the parser
/// (the header is line 1).
pub fn load_csv(
    path: &Path,
    narrative_column: &str,
    label_column: &str,
) -> Result<CsvLoad, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_csv(file, narrative_column, label_column)
}

pub fn read_csv<R: std::io::Read>(
    reader: R,
    narrative_column: &str,
    label_column: &str,
) -> Result<CsvLoad, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| malformed(&e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
    };
    let narrative_idx = column(narrative_column)?;
    let label_idx = column(label_column)?;

    let mut out = CsvLoad {
        records: Vec::new(),
        rows_read: 0,
        dropped_empty_label: 0,
    };
    for row in rdr.records() {
        let row = row.map_err(|e| malformed(&e))?;
        out.rows_read += 1;
        let label = row.get(label_idx).unwrap_or("").trim();
        if label.is_empty() {
            out.dropped_empty_label += 1;
            continue;
        }
        out.records.push(RawRecord {
            narrative: row.get(narrative_idx).unwrap_or("").to_string(),
            label: label.to_string(),
        });
    }
    Ok(out)
}

/// Reads one text column from a headed CSV, keeping every row.
pub fn read_narratives(path: &Path, column: &str) -> Result<Vec<String>, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);
    let headers = rdr.headers().map_err(|e| malformed(&e))?.clone();
    let idx = headers
        .iter()
        .position(|h| h.trim_start_matches('\u{feff}') == column)
        .ok_or_else(|| CorpusError::MissingColumn(column.to_string()))?;
    rdr.records()
        .map(|row| {
            row.map(|r| r.get(idx).unwrap_or("").to_string())
                .map_err(|e| malformed(&e))
        })
        .collect()
}

fn malformed(e: &csv::Error) -> CorpusError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    CorpusError::MalformedRow {
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<CsvLoad, CorpusError> {
        read_csv(s.as_bytes(), DEFAULT_NARRATIVE_COLUMN, DEFAULT_LABEL_COLUMN)
    }

    #[test]
    fn two_rows() {
        let l = read("Summary,damageLevel\nEngine failed,Minor\n\"Gear, collapsed\nafter landing\",Substantial\n").unwrap();
        assert_eq!(l.records.len(), 2);
        assert_eq!(l.records[1].narrative, "Gear, collapsed\nafter landing");
        assert_eq!(l.records[1].label, "Substantial");
    }

    #[test]
    fn empty_label_dropped_and_counted() {
        let l = read("id,Summary,damageLevel\n1,a,None\n2,b,\n").unwrap();
        assert_eq!(l.records.len(), 1);
        assert_eq!(l.dropped_empty_label, 1);
        assert_eq!(l.rows_read, 2);
    }

    #[test]
    fn missing_label_column() {
        let err = read("Summary,other\na,b\n").unwrap_err();
        assert!(matches!(&err, CorpusError::MissingColumn(c) if c == "damageLevel"));
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = read("Summary,damageLevel\na,None\nb,None,extra\n").unwrap_err();
        match err {
            CorpusError::MalformedRow { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        let err = load_csv(Path::new("/nonexistent/x.csv"), "Summary", "damageLevel").unwrap_err();
        assert!(matches!(err, CorpusError::Io { .. }));
    }
}
