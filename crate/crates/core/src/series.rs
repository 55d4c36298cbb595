//! Panel ingestion and validation.
//!
//! A panel is three annual index series — labor, capital, production — keyed
//! by calendar year. The CSV schema is fixed:
//!
//! ```text
//! year,labor,capital,production
//! 1899,100,100,100
//! 1900,105,107,101
//! ```
//!
//! LF and CRLF both parse. Years must increase by exactly one per row, every
//! value must be strictly positive and finite, and at least three rows are
//! required. The model time axis is `t = year - origin_year`, with the origin
//! defaulting to the first year so that `t` starts at zero; that convention is
//! what makes fitted intercepts comparable across runs.

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "year,labor,capital,production";

/// Which of the three series, for APIs that select one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Labor,
    Capital,
    Production,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 3] = [
        SeriesKind::Labor,
        SeriesKind::Capital,
        SeriesKind::Production,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::Labor => "labor",
            SeriesKind::Capital => "capital",
            SeriesKind::Production => "production",
        }
    }
}

/// Aligned labor/capital/production series over consecutive years.
#[derive(Debug, Clone, PartialEq)]
pub struct EconPanel {
    pub years: Vec<i32>,
    pub labor: Vec<f64>,
    pub capital: Vec<f64>,
    pub production: Vec<f64>,
    /// Year mapped to t = 0.
    pub origin_year: i32,
}

impl EconPanel {
    /// Build a panel, rejecting anything [`validate_panel`] would flag.
    pub fn new(
        years: Vec<i32>,
        labor: Vec<f64>,
        capital: Vec<f64>,
        production: Vec<f64>,
        origin_year: Option<i32>,
    ) -> Result<Self> {
        let origin_year = origin_year.unwrap_or_else(|| years.first().copied().unwrap_or(0));
        let panel = EconPanel {
            years,
            labor,
            capital,
            production,
            origin_year,
        };
        let report = validate_panel(&panel);
        match report.issues.into_iter().next() {
            None => Ok(panel),
            Some(issue) => Err(issue.into_error(&panel)),
        }
    }

    /// Build without validation. For diagnostics and tests that need to
    /// construct a deliberately broken panel for [`validate_panel`].
    pub fn from_parts_unchecked(
        years: Vec<i32>,
        labor: Vec<f64>,
        capital: Vec<f64>,
        production: Vec<f64>,
        origin_year: i32,
    ) -> Self {
        EconPanel {
            years,
            labor,
            capital,
            production,
            origin_year,
        }
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    /// Model time axis: `t_i = years_i - origin_year`.
    pub fn times(&self) -> Vec<f64> {
        self.years
            .iter()
            .map(|&y| f64::from(y - self.origin_year))
            .collect()
    }

    pub fn series(&self, kind: SeriesKind) -> &[f64] {
        match kind {
            SeriesKind::Labor => &self.labor,
            SeriesKind::Capital => &self.capital,
            SeriesKind::Production => &self.production,
        }
    }
}

/// One violated invariant: 0-based data row, column name, human message.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub row: usize,
    pub column: String,
    pub message: String,
}

impl Issue {
    /// Map a validation issue back onto the matching typed error, using the
    /// panel for context values. Rows here are 0-based data rows; the CSV
    /// line number is row + 2 (header is line 1).
    fn into_error(self, panel: &EconPanel) -> Error {
        let line = self.row + 2;
        match self.column.as_str() {
            "year" => Error::NonUniformYearStep {
                line,
                prev: panel.years.get(self.row - 1).copied().unwrap_or(0),
                next: panel.years.get(self.row).copied().unwrap_or(0),
            },
            "panel" => {
                if self.message.contains("rows") {
                    Error::TooFewRows { rows: panel.len() }
                } else {
                    Error::MalformedCsv {
                        line: 0,
                        reason: self.message,
                    }
                }
            }
            col => {
                let column = match col {
                    "labor" => "labor",
                    "capital" => "capital",
                    _ => "production",
                };
                Error::NonPositiveValue {
                    line,
                    column,
                    value: panel
                        .series(match column {
                            "labor" => SeriesKind::Labor,
                            "capital" => SeriesKind::Capital,
                            _ => SeriesKind::Production,
                        })
                        .get(self.row)
                        .copied()
                        .unwrap_or(f64::NAN),
                }
            }
        }
    }
}

/// Everything [`validate_panel`] found, in row order. `ok` iff no issues.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

/// Re-check every panel invariant and report *all* violations, not just the
/// first: series lengths, row count, year spacing, positivity, finiteness.
pub fn validate_panel(panel: &EconPanel) -> ValidationReport {
    let mut issues = Vec::new();
    let n = panel.years.len();

    for (name, len) in [
        ("labor", panel.labor.len()),
        ("capital", panel.capital.len()),
        ("production", panel.production.len()),
    ] {
        if len != n {
            issues.push(Issue {
                row: 0,
                column: "panel".into(),
                message: format!("{name} has {len} values for {n} years"),
            });
        }
    }
    if n < 3 {
        issues.push(Issue {
            row: 0,
            column: "panel".into(),
            message: format!("{n} rows, need at least 3"),
        });
    }
    for i in 1..n {
        if panel.years[i] - panel.years[i - 1] != 1 {
            issues.push(Issue {
                row: i,
                column: "year".into(),
                message: format!(
                    "year {} follows {}, expected step of 1",
                    panel.years[i],
                    panel.years[i - 1]
                ),
            });
        }
    }
    for kind in SeriesKind::ALL {
        for (i, &v) in panel.series(kind).iter().enumerate().take(n) {
            if !(v.is_finite() && v > 0.0) {
                issues.push(Issue {
                    row: i,
                    column: kind.name().into(),
                    message: format!("{} = {v} must be strictly positive and finite", kind.name()),
                });
            }
        }
    }

    issues.sort_by(|a, b| a.row.cmp(&b.row).then_with(|| a.column.cmp(&b.column)));
    ValidationReport {
        ok: issues.is_empty(),
        issues,
    }
}

/// Parse panel CSV text. Line numbers in errors are 1-based with the header
/// on line 1. `origin_year` defaults to the first year in the file.
pub fn ingest_csv(text: &str, origin_year: Option<i32>) -> Result<EconPanel> {
    let mut years = Vec::new();
    let mut labor = Vec::new();
    let mut capital = Vec::new();
    let mut production = Vec::new();

    let mut lines = text.split('\n').enumerate().peekable();

    let (_, header) = lines.next().ok_or_else(|| Error::MalformedCsv {
        line: 1,
        reason: "empty input".into(),
    })?;
    if header.trim_end_matches('\r') != CSV_HEADER {
        return Err(Error::MalformedCsv {
            line: 1,
            reason: format!("header must be exactly `{CSV_HEADER}`"),
        });
    }

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            // Allow a trailing newline; reject blank lines inside the data.
            if text[..].split('\n').skip(idx + 1).any(|l| !l.trim_end_matches('\r').is_empty()) {
                return Err(Error::MalformedCsv {
                    line: line_no,
                    reason: "blank line inside data".into(),
                });
            }
            break;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::MalformedCsv {
                line: line_no,
                reason: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let year: i32 = fields[0].parse().map_err(|_| Error::MalformedCsv {
            line: line_no,
            reason: format!("unparseable year `{}`", fields[0]),
        })?;
        if let Some(&prev) = years.last() {
            if year - prev != 1 {
                return Err(Error::NonUniformYearStep {
                    line: line_no,
                    prev,
                    next: year,
                });
            }
        }
        let mut values = [0.0f64; 3];
        for (slot, (field, column)) in values.iter_mut().zip(
            fields[1..]
                .iter()
                .zip(["labor", "capital", "production"]),
        ) {
            let v: f64 = field.parse().map_err(|_| Error::MalformedCsv {
                line: line_no,
                reason: format!("unparseable {column} value `{field}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::MalformedCsv {
                    line: line_no,
                    reason: format!("non-finite {column} value `{field}`"),
                });
            }
            if v <= 0.0 {
                return Err(Error::NonPositiveValue {
                    line: line_no,
                    column,
                    value: v,
                });
            }
            *slot = v;
        }
        years.push(year);
        labor.push(values[0]);
        capital.push(values[1]);
        production.push(values[2]);
    }

    if years.len() < 3 {
        return Err(Error::TooFewRows { rows: years.len() });
    }
    let origin_year = origin_year.unwrap_or(years[0]);
    Ok(EconPanel {
        years,
        labor,
        capital,
        production,
        origin_year,
    })
}

/// Render a panel back to CSV text. Values carry 17 significant digits, so
/// `ingest_csv(&panel_to_csv(&p), ..)` reproduces `p` exactly.
pub fn panel_to_csv(panel: &EconPanel) -> String {
    use std::fmt::Write as _;
    let mut out = String::with_capacity(32 * (panel.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for i in 0..panel.len() {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e}",
            panel.years[i], panel.labor[i], panel.capital[i], panel.production[i]
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "year,labor,capital,production\n1899,100,100,100\n1900,105,107,101\n1901,110,114,112\n";

    #[test]
    fn parses_well_formed_panel() {
        let p = ingest_csv(GOOD, None).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.years, vec![1899, 1900, 1901]);
        assert_eq!(p.labor, vec![100.0, 105.0, 110.0]);
        assert_eq!(p.capital[1], 107.0);
        assert_eq!(p.production[2], 112.0);
        assert_eq!(p.origin_year, 1899);
        assert_eq!(p.times(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn crlf_line_endings_parse_identically() {
        let crlf = GOOD.replace('\n', "\r\n");
        assert_eq!(ingest_csv(&crlf, None).unwrap(), ingest_csv(GOOD, None).unwrap());
    }

    #[test]
    fn origin_year_shifts_the_time_axis() {
        let p = ingest_csv(GOOD, Some(1898)).unwrap();
        assert_eq!(p.times(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn wrong_header_is_malformed() {
        let err = ingest_csv("year,labour,capital,production\n1899,1,1,1\n", None).unwrap_err();
        assert!(matches!(err, Error::MalformedCsv { line: 1, .. }));
    }

    #[test]
    fn short_row_is_malformed_with_line_cited() {
        let err = ingest_csv("year,labor,capital,production\n1899,100,100\n", None).unwrap_err();
        assert!(matches!(err, Error::MalformedCsv { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn zero_value_is_rejected_with_position() {
        let text = "year,labor,capital,production\n1899,100,100,100\n1900,0,107,101\n1901,110,114,112\n";
        let err = ingest_csv(text, None).unwrap_err();
        assert_eq!(
            err,
            Error::NonPositiveValue {
                line: 3,
                column: "labor",
                value: 0.0
            }
        );
    }

    #[test]
    fn year_gap_is_rejected() {
        let text = "year,labor,capital,production\n1899,1,1,1\n1900,1,1,1\n1902,1,1,1\n";
        let err = ingest_csv(text, None).unwrap_err();
        assert_eq!(
            err,
            Error::NonUniformYearStep {
                line: 4,
                prev: 1900,
                next: 1902
            }
        );
    }

    #[test]
    fn two_rows_are_too_few() {
        let err = ingest_csv("year,labor,capital,production\n1899,1,1,1\n1900,1,1,1\n", None)
            .unwrap_err();
        assert_eq!(err, Error::TooFewRows { rows: 2 });
    }

    #[test]
    fn validation_collects_every_violation() {
        let panel = EconPanel::from_parts_unchecked(
            vec![1899, 1900, 1902, 1903],
            vec![100.0, -5.0, 110.0, 115.0],
            vec![100.0, 107.0, f64::NAN, 120.0],
            vec![100.0, 101.0, 112.0, 118.0],
            1899,
        );
        let report = validate_panel(&panel);
        assert!(!report.ok);
        let cols: Vec<&str> = report.issues.iter().map(|i| i.column.as_str()).collect();
        assert!(cols.contains(&"labor"));
        assert!(cols.contains(&"capital"));
        assert!(cols.contains(&"year"));
        assert_eq!(report.issues.len(), 3);
    }

    #[test]
    fn valid_panel_passes_validation() {
        let p = ingest_csv(GOOD, None).unwrap();
        assert!(validate_panel(&p).ok);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let p = EconPanel::new(
            vec![1970, 1971, 1972],
            vec![0.1, 1.0 / 3.0, 2.5000000000000004],
            vec![9.899, 107.0, 114.25],
            vec![100.5, 101.125, 6.02214076e23],
            Some(1969),
        )
        .unwrap();
        let text = panel_to_csv(&p);
        let back = ingest_csv(&text, Some(1969)).unwrap();
        assert_eq!(back, p);
        for (a, b) in back.labor.iter().zip(&p.labor) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn new_rejects_negative_capital() {
        let err = EconPanel::new(
            vec![2000, 2001, 2002],
            vec![1.0, 2.0, 3.0],
            vec![1.0, -2.0, 3.0],
            vec![1.0, 2.0, 3.0],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonPositiveValue { column: "capital", .. }));
    }
}
