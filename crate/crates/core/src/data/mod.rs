//! Data ingestion and serialization: income microdata CSVs, the bundled
//! 1981-2009 yearly table, normalization and gap interpolation.
//!
//! All CSV exports print floats with 17 significant digits so that a
//! load/serialize/load cycle is the identity on the parsed values.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::estimation::UvPoint;
use crate::goodwin::{Trajectory, TrajectoryPoint};

/// The yearly table bundled with the crate, at its printed precision.
const TABLE1_CSV: &str = include_str!("table1.csv");

/// Largest tolerated fraction of malformed income rows before a load aborts.
pub const DEFAULT_MALFORMED_TOLERANCE: f64 = 0.01;

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{malformed} of {total} data rows are malformed, above the tolerated fraction {tolerance}")]
    TooManyMalformed {
        malformed: usize,
        total: usize,
        tolerance: f64,
    },
    #[error("dataset contains no values")]
    EmptyDataset,
    #[error("income values must be non-negative and finite (row {row})")]
    InvalidIncome { row: usize },
    #[error("normalization constant must be positive, got {value}")]
    NonPositiveConstant { value: f64 },
    #[error("column {name} missing from header")]
    MissingColumn { name: String },
    #[error("field {field} of year {year} is missing at a series boundary; cannot interpolate")]
    BoundaryGap { field: &'static str, year: i32 },
    #[error("year {year}: employment and unemployment columns disagree with v = 100 - V")]
    InconsistentEmployment { year: i32 },
    #[error("duplicate year {year}")]
    DuplicateYear { year: i32 },
    #[error("year {year}: {what} required but missing")]
    MissingValue { year: i32, what: &'static str },
}

/// Format with 17 significant digits; enough to reproduce any f64 exactly.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(g17).unwrap_or_default()
}

/// One row of the yearly table. Bracketed quantities of the source table
/// (values measured without assuming the distribution) map to the `*_raw`
/// reading: `unemployment` is [V], `gini` is [Gini], `labor_share` is [u],
/// `employment` is [v].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YearRecord {
    pub year: i32,
    pub b: Option<f64>,
    pub x_t: Option<f64>,
    pub alpha: Option<f64>,
    pub x_d: Option<f64>,
    pub unemployment: Option<f64>,
    pub gini: Option<f64>,
    pub labor_share: Option<f64>,
    pub du_printed: Option<f64>,
    pub employment: Option<f64>,
    pub dv_printed: Option<f64>,
    /// Set when any field of this row was filled by interpolation.
    pub interpolated: bool,
}

impl YearRecord {
    /// Whether the distribution parameters for this year were sampled
    /// (false for the gap years that only carry interpolated or raw
    /// columns).
    pub fn has_gpd_params(&self) -> bool {
        self.b.is_some() && self.x_t.is_some() && self.alpha.is_some()
    }
}

const YEAR_HEADER: [&str; 11] = [
    "year", "B", "x_t", "alpha", "x_d", "V", "gini", "u", "du", "v", "dv",
];

/// Load the bundled 1981-2009 table: 29 records, three of them (1991, 1994,
/// 2000) without distribution parameters.
pub fn load_table1() -> Vec<YearRecord> {
    parse_year_records(TABLE1_CSV).expect("bundled table is well-formed")
}

/// Read a yearly table from a file in the bundled column order;
/// empty cell = missing. A trailing `interpolated` column (0/1) is optional.
pub fn read_year_records(path: &Path) -> Result<Vec<YearRecord>, DataError> {
    parse_year_records(&std::fs::read_to_string(path)?)
}

fn parse_year_records(text: &str) -> Result<Vec<YearRecord>, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    for name in YEAR_HEADER {
        if !headers.iter().any(|h| h == name) {
            return Err(DataError::MissingColumn { name: name.into() });
        }
    }
    let idx = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let col: Vec<usize> = YEAR_HEADER.iter().map(|n| idx(n)).collect();
    let interp_col = headers.iter().position(|h| h == "interpolated");

    let mut records = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for row in reader.records() {
        let row = row?;
        let get = |i: usize| -> Option<f64> {
            row.get(col[i])
                .filter(|s| !s.is_empty())
                .and_then(|s| s.parse().ok())
        };
        let year = row
            .get(col[0])
            .and_then(|s| s.parse::<i32>().ok())
            .ok_or_else(|| DataError::MissingColumn { name: "year".into() })?;
        if !seen.insert(year) {
            return Err(DataError::DuplicateYear { year });
        }
        let record = YearRecord {
            year,
            b: get(1),
            x_t: get(2),
            alpha: get(3),
            x_d: get(4),
            unemployment: get(5),
            gini: get(6),
            labor_share: get(7),
            du_printed: get(8),
            employment: get(9),
            dv_printed: get(10),
            interpolated: interp_col
                .and_then(|i| row.get(i))
                .map(|s| s == "1" || s == "true")
                .unwrap_or(false),
        };
        if let (Some(v), Some(cap_v)) = (record.employment, record.unemployment) {
            // v = 100 - V must hold to within printing precision.
            if (v - (100.0 - cap_v)).abs() > 0.05 {
                return Err(DataError::InconsistentEmployment { year });
            }
        }
        records.push(record);
    }
    Ok(records)
}

/// Write records in the bundled column order plus the `interpolated` flag.
pub fn write_year_records(path: &Path, records: &[YearRecord]) -> Result<(), DataError> {
    let mut out = String::new();
    writeln!(out, "{},interpolated", YEAR_HEADER.join(",")).unwrap();
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.year,
            fmt_opt(r.b),
            fmt_opt(r.x_t),
            fmt_opt(r.alpha),
            fmt_opt(r.x_d),
            fmt_opt(r.unemployment),
            fmt_opt(r.gini),
            fmt_opt(r.labor_share),
            fmt_opt(r.du_printed),
            fmt_opt(r.employment),
            fmt_opt(r.dv_printed),
            u8::from(r.interpolated),
        )
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Interpolatable numeric fields of a [`YearRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum YearField {
    B,
    XT,
    Alpha,
    XD,
    Unemployment,
    Gini,
    LaborShare,
    Employment,
}

impl YearField {
    /// The distribution-parameter columns, the usual interpolation targets.
    pub const GPD_FIELDS: [YearField; 5] = [
        YearField::B,
        YearField::XT,
        YearField::Alpha,
        YearField::XD,
        YearField::Gini,
    ];

    fn get(self, r: &YearRecord) -> Option<f64> {
        match self {
            YearField::B => r.b,
            YearField::XT => r.x_t,
            YearField::Alpha => r.alpha,
            YearField::XD => r.x_d,
            YearField::Unemployment => r.unemployment,
            YearField::Gini => r.gini,
            YearField::LaborShare => r.labor_share,
            YearField::Employment => r.employment,
        }
    }

    fn set(self, r: &mut YearRecord, value: f64) {
        let slot = match self {
            YearField::B => &mut r.b,
            YearField::XT => &mut r.x_t,
            YearField::Alpha => &mut r.alpha,
            YearField::XD => &mut r.x_d,
            YearField::Unemployment => &mut r.unemployment,
            YearField::Gini => &mut r.gini,
            YearField::LaborShare => &mut r.labor_share,
            YearField::Employment => &mut r.employment,
        };
        *slot = Some(value);
    }

    fn name(self) -> &'static str {
        match self {
            YearField::B => "B",
            YearField::XT => "x_t",
            YearField::Alpha => "alpha",
            YearField::XD => "x_d",
            YearField::Unemployment => "V",
            YearField::Gini => "gini",
            YearField::LaborShare => "u",
            YearField::Employment => "v",
        }
    }
}

/// Fill gaps in the requested fields by linear interpolation between the
/// nearest present years, flagging every touched record. Present values are
/// never overwritten. A gap at either end of the series is an error.
pub fn interpolate_missing(
    records: &[YearRecord],
    fields: &[YearField],
) -> Result<Vec<YearRecord>, DataError> {
    let mut out = records.to_vec();
    for &field in fields {
        for i in 0..out.len() {
            if field.get(&out[i]).is_some() {
                continue;
            }
            let year = out[i].year;
            let before = records[..i]
                .iter()
                .rev()
                .find_map(|r| field.get(r).map(|v| (r.year, v)));
            let after = records[i + 1..]
                .iter()
                .find_map(|r| field.get(r).map(|v| (r.year, v)));
            let (Some((y0, v0)), Some((y1, v1))) = (before, after) else {
                return Err(DataError::BoundaryGap {
                    field: field.name(),
                    year,
                });
            };
            let t = (year - y0) as f64 / (y1 - y0) as f64;
            field.set(&mut out[i], v0 + t * (v1 - v0));
            out[i].interpolated = true;
        }
    }
    Ok(out)
}

/// Extract the `(year, u, v)` series for estimation. Rows whose
/// distribution parameters were interpolated or never sampled carry the
/// `interpolated` marker so regressions can exclude them.
pub fn uv_points(records: &[YearRecord]) -> Result<Vec<UvPoint>, DataError> {
    records
        .iter()
        .map(|r| {
            let u = r.labor_share.ok_or(DataError::MissingValue {
                year: r.year,
                what: "labor share",
            })?;
            let v = r.employment.ok_or(DataError::MissingValue {
                year: r.year,
                what: "employment rate",
            })?;
            Ok(UvPoint {
                year: r.year,
                u,
                v,
                interpolated: r.interpolated || !r.has_gpd_params(),
            })
        })
        .collect()
}

/// Income observations, possibly annotated with years, plus normalization
/// metadata.
#[derive(Debug, Clone, Serialize)]
pub struct IncomeDataset {
    values: Vec<f64>,
    years: Option<Vec<i32>>,
    /// Divisor applied by the most recent [`IncomeDataset::normalize`].
    normalization: Option<f64>,
    pub malformed_rows: usize,
}

impl IncomeDataset {
    pub fn from_values(values: Vec<f64>) -> Result<Self, DataError> {
        if values.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        if let Some(row) = values.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(DataError::InvalidIncome { row });
        }
        Ok(Self {
            values,
            years: None,
            normalization: None,
            malformed_rows: 0,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn years(&self) -> Option<&[i32]> {
        self.years.as_deref()
    }

    pub fn normalization(&self) -> Option<f64> {
        self.normalization
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Divide every value by `constant`, or by the sample arithmetic mean
    /// when none is given. The divisor is recorded in the result.
    pub fn normalize(&self, constant: Option<f64>) -> Result<IncomeDataset, DataError> {
        let divisor = match constant {
            Some(c) if c > 0.0 && c.is_finite() => c,
            Some(c) => return Err(DataError::NonPositiveConstant { value: c }),
            None => {
                let m = self.mean();
                if m <= 0.0 {
                    return Err(DataError::NonPositiveConstant { value: m });
                }
                m
            }
        };
        Ok(IncomeDataset {
            values: self.values.iter().map(|x| x / divisor).collect(),
            years: self.years.clone(),
            normalization: Some(divisor),
            malformed_rows: self.malformed_rows,
        })
    }
}

/// Unemployment income threshold: 20% of the minimum salary, expressed in
/// normalized (currency-free) income units.
pub fn unemployment_threshold(
    min_salary: f64,
    normalization_constant: f64,
) -> Result<f64, DataError> {
    if !(min_salary > 0.0 && min_salary.is_finite()) {
        return Err(DataError::NonPositiveConstant { value: min_salary });
    }
    if !(normalization_constant > 0.0 && normalization_constant.is_finite()) {
        return Err(DataError::NonPositiveConstant {
            value: normalization_constant,
        });
    }
    Ok(0.20 * min_salary / normalization_constant)
}

/// Read an income CSV: one `income` column or `year,income`, optional
/// header, `#`-prefixed metadata lines. Malformed rows are counted and the
/// load aborts when they exceed `tolerance` as a fraction of data rows.
pub fn read_income_csv_with_tolerance(
    path: &Path,
    tolerance: f64,
) -> Result<IncomeDataset, DataError> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    let mut years = Vec::new();
    let mut malformed = 0usize;
    let mut total = 0usize;
    let mut normalization = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(value) = rest.trim().strip_prefix("normalization:") {
                normalization = value.trim().parse::<f64>().ok();
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<(Option<i32>, f64)> = match fields.as_slice() {
            [income] => income.parse().ok().map(|x| (None, x)),
            [year, income] => match (year.parse::<i32>(), income.parse::<f64>()) {
                (Ok(y), Ok(x)) => Some((Some(y), x)),
                _ => None,
            },
            _ => None,
        };
        match parsed {
            Some((year, x)) if x.is_finite() && x >= 0.0 => {
                total += 1;
                if let Some(y) = year {
                    years.push(y);
                }
                values.push(x);
            }
            _ => {
                // A non-numeric first data line is a header, not damage.
                if i == 0 || (total == 0 && malformed == 0 && values.is_empty()) {
                    let looks_like_header = fields
                        .iter()
                        .all(|f| f.chars().any(|c| c.is_ascii_alphabetic()));
                    if looks_like_header {
                        continue;
                    }
                }
                malformed += 1;
                total += 1;
            }
        }
    }
    if values.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    if malformed as f64 > tolerance * total as f64 {
        return Err(DataError::TooManyMalformed {
            malformed,
            total,
            tolerance,
        });
    }
    let mut ds = IncomeDataset::from_values(values)?;
    ds.malformed_rows = malformed;
    ds.normalization = normalization;
    if years.len() == ds.values.len() {
        ds.years = Some(years);
    }
    Ok(ds)
}

pub fn read_income_csv(path: &Path) -> Result<IncomeDataset, DataError> {
    read_income_csv_with_tolerance(path, DEFAULT_MALFORMED_TOLERANCE)
}

/// Write incomes one per line (or `year,income` when years are attached),
/// with the normalization constant as a metadata comment when present.
pub fn write_income_csv(path: &Path, ds: &IncomeDataset) -> Result<(), DataError> {
    let mut out = String::new();
    if let Some(c) = ds.normalization() {
        writeln!(out, "# normalization: {}", g17(c)).unwrap();
    }
    match ds.years() {
        Some(years) => {
            writeln!(out, "year,income").unwrap();
            for (y, x) in years.iter().zip(ds.values()) {
                writeln!(out, "{y},{}", g17(*x)).unwrap();
            }
        }
        None => {
            writeln!(out, "income").unwrap();
            for x in ds.values() {
                writeln!(out, "{}", g17(*x)).unwrap();
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Write a trajectory as `t,u,v` rows.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), DataError> {
    let mut out = String::from("t,u,v\n");
    for p in &traj.points {
        writeln!(out, "{},{},{}", g17(p.t), g17(p.u), g17(p.v)).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read `t,u,v` rows back.
pub fn read_trajectory_points(path: &Path) -> Result<Vec<TrajectoryPoint>, DataError> {
    let text = std::fs::read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for row in reader.records() {
        let row = row?;
        let get = |i: usize| -> Option<f64> { row.get(i).and_then(|s| s.parse().ok()) };
        if let (Some(t), Some(u), Some(v)) = (get(0), get(1), get(2)) {
            points.push(TrajectoryPoint { t, u, v });
        }
    }
    Ok(points)
}

/// Header names and per-row cells of a numeric CSV; `None` marks an empty
/// or non-numeric cell.
pub type NumericTable = (Vec<String>, Vec<Vec<Option<f64>>>);

/// Generic numeric table reader for report CSVs.
pub fn read_numeric_table(path: &Path) -> Result<NumericTable, DataError> {
    let text = std::fs::read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row?;
        rows.push(row.iter().map(|s| s.parse::<f64>().ok()).collect());
    }
    Ok((header, rows))
}
