//! Effort accounting: the total effort for markup-driven design (TED),
//! conventional totals, and the comparison/involvement reports.
//!
//! Hours are fixed-point values with milli-hour resolution, so sums and
//! differences are exact — `ted + savings == conventional_total` holds to
//! the last digit, never approximately.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Sub};

use thiserror::Error;

const MILLIS_PER_HOUR: i64 = 1000;

/// A duration in hours with three decimal places of precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Hours(i64);

impl Hours {
    pub const ZERO: Hours = Hours(0);

    pub fn from_whole(hours: i64) -> Hours {
        Hours(hours * MILLIS_PER_HOUR)
    }

    pub fn from_milli(milli_hours: i64) -> Hours {
        Hours(milli_hours)
    }

    pub fn as_milli(self) -> i64 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Parse a non-negative decimal like `7`, `1.5` or `0.125`. At most
    /// three fractional digits are representable; more is an error rather
    /// than a silent rounding.
    pub fn parse(text: &str) -> Result<Hours, String> {
        let text = text.trim();
        if text.is_empty() {
            return Err("empty hours value".to_string());
        }
        if text.starts_with('-') {
            return Err(format!("hours must be non-negative, got {text:?}"));
        }
        let (whole, frac) = match text.split_once('.') {
            Some((w, f)) => (w, f),
            None => (text, ""),
        };
        if frac.len() > 3 {
            return Err(format!(
                "{text:?} has more than 3 decimal places; milli-hour is the finest unit"
            ));
        }
        if !whole.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || (whole.is_empty() && frac.is_empty())
        {
            return Err(format!("{text:?} is not a decimal number of hours"));
        }
        let whole: i64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| format!("{text:?} is out of range"))?
        };
        let mut milli = whole
            .checked_mul(MILLIS_PER_HOUR)
            .ok_or_else(|| format!("{text:?} is out of range"))?;
        let mut frac_value: i64 = 0;
        for c in frac.chars() {
            frac_value = frac_value * 10 + (c as i64 - '0' as i64);
        }
        frac_value *= 10_i64.pow(3 - frac.len() as u32);
        milli = milli
            .checked_add(frac_value)
            .ok_or_else(|| format!("{text:?} is out of range"))?;
        Ok(Hours(milli))
    }
}

impl Add for Hours {
    type Output = Hours;
    fn add(self, rhs: Hours) -> Hours {
        Hours(self.0 + rhs.0)
    }
}

impl Sub for Hours {
    type Output = Hours;
    fn sub(self, rhs: Hours) -> Hours {
        Hours(self.0 - rhs.0)
    }
}

impl Sum for Hours {
    fn sum<I: Iterator<Item = Hours>>(iter: I) -> Hours {
        Hours(iter.map(|h| h.0).sum())
    }
}

impl fmt::Display for Hours {
    /// Canonical decimal form with trailing zeros trimmed: `9`, `1.5`,
    /// `0.125`, `-3.2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / MILLIS_PER_HOUR as u64;
        let frac = abs % MILLIS_PER_HOUR as u64;
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let digits = format!("{frac:03}");
            write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EffortError {
    #[error("project {0:?} is present in only one input")]
    ProjectMismatch(String),
    #[error("project {0:?} appears more than once in the same input")]
    DuplicateProject(String),
    #[error("csv line {line}: {message}")]
    BadCsv { line: usize, message: String },
}

/// Per-project hours for the markup-driven path: requirement framing,
/// first-level design generation, and agile-client feedback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DgmlEffortRecord {
    pub project: String,
    pub rf_hours: Hours,
    pub dg_hours: Hours,
    pub ace_hours: Hours,
}

/// Per-project hours for the conventional path: designer effort and
/// end-user involvement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConventionalEffortRecord {
    pub project: String,
    pub design_hours: Hours,
    pub user_hours: Hours,
}

/// TED — total effort for the markup-driven design of one project:
/// requirement framing + design generation + agile client effort.
pub fn compute_ted(record: &DgmlEffortRecord) -> Hours {
    record.rf_hours + record.dg_hours + record.ace_hours
}

/// Total effort for the conventional design of one project.
pub fn conventional_total(record: &ConventionalEffortRecord) -> Hours {
    record.design_hours + record.user_hours
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffortRow {
    pub project: String,
    pub ted: Hours,
    pub conventional_total: Hours,
    /// `conventional_total - ted`; negative when the markup path costs more.
    pub savings: Hours,
}

/// Per-project TED vs. conventional totals, plus a totals row summing
/// every column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffortReport {
    pub rows: Vec<EffortRow>,
    pub totals: EffortRow,
}

impl EffortReport {
    /// `project,ted,conventional_total,savings` plus a final `TOTAL` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("project,ted,conventional_total,savings\n");
        for row in self.rows.iter().chain(std::iter::once(&self.totals)) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.project, row.ted, row.conventional_total, row.savings
            ));
        }
        out
    }

    /// Column-aligned table for human reading.
    pub fn to_text_table(&self) -> String {
        let headers = ["project", "ted", "conventional", "savings"];
        let mut cells: Vec<[String; 4]> = Vec::new();
        for row in self.rows.iter().chain(std::iter::once(&self.totals)) {
            cells.push([
                row.project.clone(),
                row.ted.to_string(),
                row.conventional_total.to_string(),
                row.savings.to_string(),
            ]);
        }
        let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
        for row in &cells {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let mut out = String::new();
        let fmt_row = |cols: [&str; 4], widths: &[usize]| -> String {
            format!(
                "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}\n",
                cols[0],
                cols[1],
                cols[2],
                cols[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3],
            )
        };
        out.push_str(&fmt_row(headers, &widths));
        for row in &cells {
            out.push_str(&fmt_row(
                [&row[0], &row[1], &row[2], &row[3]],
                &widths,
            ));
        }
        out
    }
}

/// Join both record lists by project (in the order of the markup-path
/// list), compute per-row savings, and append the totals row. Every
/// project must appear in both lists.
pub fn comparison_report(
    dgml: &[DgmlEffortRecord],
    conv: &[ConventionalEffortRecord],
) -> Result<EffortReport, EffortError> {
    let conv_by_project = key_by_project(conv.iter().map(|r| (r.project.as_str(), r)))?;
    check_no_duplicates(dgml.iter().map(|r| r.project.as_str()))?;
    for record in conv {
        if !dgml.iter().any(|d| d.project == record.project) {
            return Err(EffortError::ProjectMismatch(record.project.clone()));
        }
    }

    let mut rows = Vec::with_capacity(dgml.len());
    for record in dgml {
        let conv_record = conv_by_project
            .iter()
            .find(|(p, _)| *p == record.project)
            .map(|(_, r)| *r)
            .ok_or_else(|| EffortError::ProjectMismatch(record.project.clone()))?;
        let ted = compute_ted(record);
        let conventional = conventional_total(conv_record);
        rows.push(EffortRow {
            project: record.project.clone(),
            ted,
            conventional_total: conventional,
            savings: conventional - ted,
        });
    }

    let totals = EffortRow {
        project: "TOTAL".to_string(),
        ted: rows.iter().map(|r| r.ted).sum(),
        conventional_total: rows.iter().map(|r| r.conventional_total).sum(),
        savings: rows.iter().map(|r| r.savings).sum(),
    };
    Ok(EffortReport { rows, totals })
}

/// End-user involvement pairs: conventional user hours next to agile
/// client hours, one row per project in markup-list order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvolvementRow {
    pub project: String,
    pub conventional_user_hours: Hours,
    pub ace_hours: Hours,
}

pub fn involvement_report(
    dgml: &[DgmlEffortRecord],
    conv: &[ConventionalEffortRecord],
) -> Result<Vec<InvolvementRow>, EffortError> {
    let conv_by_project = key_by_project(conv.iter().map(|r| (r.project.as_str(), r)))?;
    check_no_duplicates(dgml.iter().map(|r| r.project.as_str()))?;
    for record in conv {
        if !dgml.iter().any(|d| d.project == record.project) {
            return Err(EffortError::ProjectMismatch(record.project.clone()));
        }
    }

    dgml.iter()
        .map(|record| {
            let conv_record = conv_by_project
                .iter()
                .find(|(p, _)| *p == record.project)
                .map(|(_, r)| *r)
                .ok_or_else(|| EffortError::ProjectMismatch(record.project.clone()))?;
            Ok(InvolvementRow {
                project: record.project.clone(),
                conventional_user_hours: conv_record.user_hours,
                ace_hours: record.ace_hours,
            })
        })
        .collect()
}

fn key_by_project<'a, T>(
    records: impl Iterator<Item = (&'a str, T)>,
) -> Result<Vec<(&'a str, T)>, EffortError> {
    let mut keyed: Vec<(&str, T)> = Vec::new();
    for (project, record) in records {
        if keyed.iter().any(|(p, _)| *p == project) {
            return Err(EffortError::DuplicateProject(project.to_string()));
        }
        keyed.push((project, record));
    }
    Ok(keyed)
}

fn check_no_duplicates<'a>(projects: impl Iterator<Item = &'a str>) -> Result<(), EffortError> {
    let mut seen: Vec<&str> = Vec::new();
    for project in projects {
        if seen.contains(&project) {
            return Err(EffortError::DuplicateProject(project.to_string()));
        }
        seen.push(project);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// CSV input

const DGML_HEADER: &str = "project,rf_hours,dg_hours,ace_hours";
const CONV_HEADER: &str = "project,design_hours,user_hours";

/// Read the markup-path effort CSV: `project,rf_hours,dg_hours,ace_hours`
/// with a mandatory header row.
pub fn parse_dgml_effort_csv(text: &str) -> Result<Vec<DgmlEffortRecord>, EffortError> {
    parse_csv(text, DGML_HEADER, |fields, line| {
        Ok(DgmlEffortRecord {
            project: fields[0].to_string(),
            rf_hours: parse_hours_field(fields[1], line)?,
            dg_hours: parse_hours_field(fields[2], line)?,
            ace_hours: parse_hours_field(fields[3], line)?,
        })
    })
}

/// Read the conventional-path effort CSV: `project,design_hours,user_hours`
/// with a mandatory header row.
pub fn parse_conventional_effort_csv(
    text: &str,
) -> Result<Vec<ConventionalEffortRecord>, EffortError> {
    parse_csv(text, CONV_HEADER, |fields, line| {
        Ok(ConventionalEffortRecord {
            project: fields[0].to_string(),
            design_hours: parse_hours_field(fields[1], line)?,
            user_hours: parse_hours_field(fields[2], line)?,
        })
    })
}

fn parse_hours_field(field: &str, line: usize) -> Result<Hours, EffortError> {
    Hours::parse(field).map_err(|message| EffortError::BadCsv { line, message })
}

fn parse_csv<T>(
    text: &str,
    header: &str,
    mut build: impl FnMut(&[&str], usize) -> Result<T, EffortError>,
) -> Result<Vec<T>, EffortError> {
    let expected_fields = header.split(',').count();
    let mut records = Vec::new();
    let mut saw_header = false;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !saw_header {
            let normalized = fields.join(",");
            if normalized != header {
                return Err(EffortError::BadCsv {
                    line: line_no,
                    message: format!("expected header {header:?}, got {line:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        if fields.len() != expected_fields {
            return Err(EffortError::BadCsv {
                line: line_no,
                message: format!(
                    "expected {expected_fields} comma-separated fields, got {}",
                    fields.len()
                ),
            });
        }
        if fields[0].is_empty() {
            return Err(EffortError::BadCsv {
                line: line_no,
                message: "empty project name".to_string(),
            });
        }
        records.push(build(&fields, line_no)?);
    }
    if !saw_header {
        return Err(EffortError::BadCsv {
            line: 1,
            message: format!("missing header row {header:?}"),
        });
    }
    Ok(records)
}

#[cfg(test)]
pub(crate) mod test_data {
    use super::*;

    /// The six recorded markup-path projects: (RF, DG, ACE) hours each.
    pub fn dgml_records() -> Vec<DgmlEffortRecord> {
        let rows: [(&str, i64, i64, i64); 6] = [
            ("Project1-4Modules", 7, 1, 1),
            ("Project2-4Modules", 10, 1, 2),
            ("Project3-5Modules", 7, 1, 2),
            ("Project4-5Modules", 3, 1, 1),
            ("Project5-5Modules", 5, 1, 3),
            ("Project6-6Modules", 7, 1, 2),
        ];
        rows.iter()
            .map(|(p, rf, dg, ace)| DgmlEffortRecord {
                project: p.to_string(),
                rf_hours: Hours::from_whole(*rf),
                dg_hours: Hours::from_whole(*dg),
                ace_hours: Hours::from_whole(*ace),
            })
            .collect()
    }

    /// The six recorded conventional projects: (design, user) hours each.
    pub fn conventional_records() -> Vec<ConventionalEffortRecord> {
        let rows: [(&str, i64, i64); 6] = [
            ("Project1-4Modules", 13, 6),
            ("Project2-4Modules", 29, 8),
            ("Project3-5Modules", 17, 7),
            ("Project4-5Modules", 8, 4),
            ("Project5-5Modules", 19, 7),
            ("Project6-6Modules", 20, 7),
        ];
        rows.iter()
            .map(|(p, design, user)| ConventionalEffortRecord {
                project: p.to_string(),
                design_hours: Hours::from_whole(*design),
                user_hours: Hours::from_whole(*user),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::test_data::{conventional_records, dgml_records};
    use super::*;

    fn whole(h: i64) -> Hours {
        Hours::from_whole(h)
    }

    #[test]
    fn ted_of_recorded_projects() {
        let records = dgml_records();
        assert_eq!(compute_ted(&records[0]), whole(9));
        assert_eq!(compute_ted(&records[1]), whole(13));
        let zero = DgmlEffortRecord {
            project: "z".into(),
            rf_hours: Hours::ZERO,
            dg_hours: Hours::ZERO,
            ace_hours: Hours::ZERO,
        };
        assert_eq!(compute_ted(&zero), Hours::ZERO);
    }

    #[test]
    fn conventional_totals_of_recorded_projects() {
        let records = conventional_records();
        assert_eq!(conventional_total(&records[0]), whole(19));
        assert_eq!(conventional_total(&records[1]), whole(37));
        let zero = ConventionalEffortRecord {
            project: "z".into(),
            design_hours: Hours::ZERO,
            user_hours: Hours::ZERO,
        };
        assert_eq!(conventional_total(&zero), Hours::ZERO);
    }

    #[test]
    fn comparison_report_reproduces_recorded_columns() {
        let report = comparison_report(&dgml_records(), &conventional_records()).unwrap();
        let ted: Vec<Hours> = report.rows.iter().map(|r| r.ted).collect();
        let conv: Vec<Hours> = report.rows.iter().map(|r| r.conventional_total).collect();
        let savings: Vec<Hours> = report.rows.iter().map(|r| r.savings).collect();
        assert_eq!(ted, [9, 13, 10, 5, 9, 10].map(whole));
        assert_eq!(conv, [19, 37, 24, 12, 26, 27].map(whole));
        assert_eq!(savings, [10, 24, 14, 7, 17, 17].map(whole));
        assert_eq!(report.rows[0].savings, whole(10));
        assert_eq!(report.totals.ted, whole(56));
        assert_eq!(report.totals.conventional_total, whole(145));
        assert_eq!(report.totals.savings, whole(89));
    }

    #[test]
    fn mismatched_projects_are_named() {
        let dgml = dgml_records();
        let mut conv = conventional_records();
        conv.pop();
        assert_eq!(
            comparison_report(&dgml, &conv),
            Err(EffortError::ProjectMismatch("Project6-6Modules".into()))
        );
        let extra = ConventionalEffortRecord {
            project: "Ghost".into(),
            design_hours: whole(1),
            user_hours: whole(1),
        };
        let mut conv = conventional_records();
        conv.push(extra);
        assert_eq!(
            comparison_report(&dgml, &conv),
            Err(EffortError::ProjectMismatch("Ghost".into()))
        );
    }

    #[test]
    fn involvement_pairs_match_recorded_values() {
        let rows = involvement_report(&dgml_records(), &conventional_records()).unwrap();
        assert_eq!(rows[0].conventional_user_hours, whole(6));
        assert_eq!(rows[0].ace_hours, whole(1));
        assert_eq!(rows[4].conventional_user_hours, whole(7));
        assert_eq!(rows[4].ace_hours, whole(3));
        assert!(involvement_report(&[], &[]).unwrap().is_empty());
    }

    #[test]
    fn hours_parse_and_display_round_trip() {
        for (text, milli) in [("7", 7000), ("1.5", 1500), ("0.125", 125), ("0", 0), ("2.50", 2500)]
        {
            assert_eq!(Hours::parse(text).unwrap(), Hours::from_milli(milli));
        }
        assert_eq!(Hours::from_milli(9000).to_string(), "9");
        assert_eq!(Hours::from_milli(1500).to_string(), "1.5");
        assert_eq!(Hours::from_milli(125).to_string(), "0.125");
        assert_eq!(Hours::from_milli(-3200).to_string(), "-3.2");

        assert!(Hours::parse("-1").is_err());
        assert!(Hours::parse("1.2345").is_err());
        assert!(Hours::parse("abc").is_err());
        assert!(Hours::parse("").is_err());
    }

    #[test]
    fn csv_inputs_round_into_records() {
        let text = "project,rf_hours,dg_hours,ace_hours\nProject1-4Modules,7,1,1\n\nP2,0.5,1,2\n";
        let records = parse_dgml_effort_csv(text).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].rf_hours, whole(7));
        assert_eq!(records[1].rf_hours, Hours::from_milli(500));

        let conv = "project,design_hours,user_hours\r\nP1,13,6\r\n";
        let records = parse_conventional_effort_csv(conv).unwrap();
        assert_eq!(records[0].design_hours, whole(13));

        assert!(matches!(
            parse_dgml_effort_csv("wrong,header\n"),
            Err(EffortError::BadCsv { line: 1, .. })
        ));
        assert!(matches!(
            parse_dgml_effort_csv("project,rf_hours,dg_hours,ace_hours\nP1,7,1\n"),
            Err(EffortError::BadCsv { line: 2, .. })
        ));
        assert!(matches!(
            parse_dgml_effort_csv("project,rf_hours,dg_hours,ace_hours\nP1,-1,1,1\n"),
            Err(EffortError::BadCsv { line: 2, .. })
        ));
    }

    #[test]
    fn report_csv_has_total_row() {
        let report = comparison_report(&dgml_records(), &conventional_records()).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "project,ted,conventional_total,savings");
        assert_eq!(lines[1], "Project1-4Modules,9,19,10");
        assert_eq!(lines[7], "TOTAL,56,145,89");
    }

    #[test]
    fn text_table_is_aligned() {
        let report = comparison_report(&dgml_records(), &conventional_records()).unwrap();
        let table = report.to_text_table();
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].starts_with("project"));
        assert_eq!(lines.len(), 8);
        let width = lines[0].len();
        assert!(lines.iter().all(|l| l.len() == width));
    }
}
