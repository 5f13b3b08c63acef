//! Yield-curve series storage: loading, validation, differencing,
//! summary statistics, and single-date snapshots with interpolation.
//!
//! The on-disk format is a UTF-8 CSV with header `date,<tenor>,<tenor>,...`
//! where tenors are maturities in years and the first column holds ISO-8601
//! dates. Rates are continuously-compounded annual spot rates stored as
//! decimals; percent-quoted files are converted on load.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Sanity band for spot rates, exclusive on both ends.
const RATE_BAND: (f64, f64) = (-0.5, 1.0);

/// A maturity point on the curve, in years.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tenor(f64);

impl Tenor {
    /// A tenor must be a positive, finite number of years.
    pub fn new(years: f64) -> Result<Self> {
        if !years.is_finite() || years <= 0.0 {
            return Err(Error::InvalidTenor(years));
        }
        Ok(Tenor(years))
    }

    pub fn years(&self) -> f64 {
        self.0
    }
}

/// Whether a rate source quotes percentages (3.15) or decimals (0.0315).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateUnit {
    Percent,
    Decimal,
}

/// Interpolation policy of a curve snapshot. Only one scheme is supported:
/// linear on spot rates between knots, flat beyond the first and last knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    LinearFlat,
}

/// A dated panel of spot rates: one row per observation date, one column
/// per tenor.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldCurveSeries {
    dates: Vec<NaiveDate>,
    tenors: Vec<Tenor>,
    rates: Matrix,
}

impl YieldCurveSeries {
    /// Validate and construct a series. Requires at least two rows, strictly
    /// increasing dates and tenors, and every rate finite and inside the
    /// `(-0.5, 1.0)` band.
    pub fn new(dates: Vec<NaiveDate>, tenors: Vec<Tenor>, rates: Matrix) -> Result<Self> {
        if tenors.is_empty() {
            return Err(Error::NoTenors);
        }
        validate_tenors(&tenors)?;
        if dates.len() < 2 {
            return Err(Error::TooFewRows {
                required: 2,
                actual: dates.len(),
            });
        }
        for (i, pair) in dates.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::DatesNotIncreasing {
                    row: i + 2,
                    value: pair[1].to_string(),
                });
            }
        }
        if rates.rows() != dates.len() || rates.cols() != tenors.len() {
            return Err(Error::LengthMismatch {
                expected: dates.len() * tenors.len(),
                actual: rates.rows() * rates.cols(),
            });
        }
        for i in 0..rates.rows() {
            for j in 0..rates.cols() {
                let r = rates[(i, j)];
                if !r.is_finite() || r <= RATE_BAND.0 || r >= RATE_BAND.1 {
                    return Err(Error::RateOutOfBand {
                        row: i + 1,
                        column: j + 1,
                        value: r,
                    });
                }
            }
        }
        Ok(YieldCurveSeries {
            dates,
            tenors,
            rates,
        })
    }

    /// Load a series from a curve CSV. `unit` declares how the file quotes
    /// rates; percent values are divided by 100 before validation.
    pub fn load_csv<P: AsRef<Path>>(path: P, unit: RateUnit) -> Result<Self> {
        let path = path.as_ref();
        let path_str = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.kind() {
                csv::ErrorKind::Io(_) => Error::Io {
                    path: path_str.clone(),
                    source: std::io::Error::new(std::io::ErrorKind::Other, e.to_string()),
                },
                _ => Error::Csv {
                    path: path_str.clone(),
                    message: e.to_string(),
                },
            })?;

        let headers = reader
            .headers()
            .map_err(|e| Error::Csv {
                path: path_str.clone(),
                message: e.to_string(),
            })?
            .clone();
        if headers.len() < 2 {
            return Err(Error::NoTenors);
        }
        let mut tenors = Vec::with_capacity(headers.len() - 1);
        for (j, field) in headers.iter().enumerate().skip(1) {
            let years: f64 = field.parse().map_err(|_| Error::TenorParse {
                column: j + 1,
                value: field.to_string(),
            })?;
            let tenor = Tenor::new(years).map_err(|_| Error::TenorParse {
                column: j + 1,
                value: field.to_string(),
            })?;
            if let Some(prev) = tenors.last() {
                let prev: &Tenor = prev;
                if tenor.years() <= prev.years() {
                    return Err(Error::NonMonotoneTenors {
                        column: j + 1,
                        value: tenor.years(),
                        previous: prev.years(),
                    });
                }
            }
            tenors.push(tenor);
        }

        let m = tenors.len();
        let mut dates = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row_no = i + 1;
            let record = record.map_err(|e| Error::Csv {
                path: path_str.clone(),
                message: e.to_string(),
            })?;
            if record.len() != m + 1 {
                return Err(Error::RaggedRow {
                    row: row_no,
                    expected: m,
                    found: record.len().saturating_sub(1),
                });
            }
            let date_field = record.get(0).unwrap_or("");
            let date = NaiveDate::parse_from_str(date_field, "%Y-%m-%d").map_err(|_| {
                Error::DateParse {
                    row: row_no,
                    value: date_field.to_string(),
                }
            })?;
            dates.push(date);
            let mut row = Vec::with_capacity(m);
            for j in 0..m {
                let field = record.get(j + 1).unwrap_or("");
                let raw: f64 = field.parse().map_err(|_| Error::CellParse {
                    row: row_no,
                    column: j + 2,
                    value: field.to_string(),
                })?;
                if !raw.is_finite() {
                    return Err(Error::CellParse {
                        row: row_no,
                        column: j + 2,
                        value: field.to_string(),
                    });
                }
                row.push(match unit {
                    RateUnit::Percent => raw / 100.0,
                    RateUnit::Decimal => raw,
                });
            }
            rows.push(row);
        }
        if rows.len() < 2 {
            return Err(Error::TooFewRows {
                required: 2,
                actual: rows.len(),
            });
        }
        YieldCurveSeries::new(dates, tenors, Matrix::from_rows(&rows)?)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tenors(&self) -> &[Tenor] {
        &self.tenors
    }

    pub fn rates(&self) -> &Matrix {
        &self.rates
    }

    /// Number of observation rows.
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// First differences over consecutive rows: `change[k] = rate[k+1] - rate[k]`.
    ///
    /// Differencing is single-lag regardless of the calendar gap between
    /// rows; no resampling is performed.
    pub fn diff(&self) -> RateChangeSeries {
        let n = self.len();
        let m = self.tenors.len();
        let mut changes = Matrix::zeros(n - 1, m);
        for k in 0..(n - 1) {
            for j in 0..m {
                changes[(k, j)] = self.rates[(k + 1, j)] - self.rates[(k, j)];
            }
        }
        RateChangeSeries {
            dates: self.dates[1..].to_vec(),
            tenors: self.tenors.clone(),
            changes,
        }
    }

    /// Per-tenor sample mean, sample standard deviation (N-1 denominator),
    /// and the Pearson correlation matrix. Correlations involving a
    /// zero-variance tenor are reported as NaN; the diagonal is 1 by
    /// definition.
    pub fn summary_stats(&self) -> SummaryStats {
        let m = self.tenors.len();
        let means = column_means(&self.rates);
        let stds: Vec<f64> = (0..m)
            .map(|j| column_std(&self.rates, j, means[j]))
            .collect();

        let n = self.len() as f64;
        let mut correlation = Matrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let value = if a == b {
                    1.0
                } else if stds[a] == 0.0 || stds[b] == 0.0 {
                    f64::NAN
                } else {
                    let mut cov = 0.0;
                    for i in 0..self.len() {
                        cov += (self.rates[(i, a)] - means[a]) * (self.rates[(i, b)] - means[b]);
                    }
                    cov / ((n - 1.0) * stds[a] * stds[b])
                };
                correlation[(a, b)] = value;
                correlation[(b, a)] = value;
            }
        }
        SummaryStats {
            means,
            stds,
            correlation,
        }
    }

    /// Curve snapshot for the row at `index`.
    pub fn snapshot(&self, index: usize) -> Result<YieldCurve> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok(YieldCurve {
            tenors: self.tenors.clone(),
            rates: self.rates.row(index).to_vec(),
            interpolation: Interpolation::LinearFlat,
        })
    }

    /// Snapshot of the most recent row.
    pub fn latest(&self) -> YieldCurve {
        self.snapshot(self.len() - 1).expect("series is non-empty")
    }
}

/// First differences of a [`YieldCurveSeries`]; one row fewer, each row
/// dated by the later of the two observations it spans.
#[derive(Debug, Clone, PartialEq)]
pub struct RateChangeSeries {
    dates: Vec<NaiveDate>,
    tenors: Vec<Tenor>,
    changes: Matrix,
}

impl RateChangeSeries {
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tenors(&self) -> &[Tenor] {
        &self.tenors
    }

    pub fn changes(&self) -> &Matrix {
        &self.changes
    }
}

/// Per-tenor sample moments and the Pearson correlation matrix of a series.
#[derive(Debug, Clone)]
pub struct SummaryStats {
    means: Vec<f64>,
    stds: Vec<f64>,
    correlation: Matrix,
}

impl SummaryStats {
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn correlation(&self) -> &Matrix {
        &self.correlation
    }
}

/// A single-date term structure: spot rates at fixed tenors plus the
/// interpolation policy used between and beyond them.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldCurve {
    tenors: Vec<Tenor>,
    rates: Vec<f64>,
    interpolation: Interpolation,
}

impl YieldCurve {
    pub fn new(tenors: Vec<Tenor>, rates: Vec<f64>) -> Result<Self> {
        if tenors.is_empty() {
            return Err(Error::NoTenors);
        }
        validate_tenors(&tenors)?;
        if rates.len() != tenors.len() {
            return Err(Error::LengthMismatch {
                expected: tenors.len(),
                actual: rates.len(),
            });
        }
        Ok(YieldCurve {
            tenors,
            rates,
            interpolation: Interpolation::LinearFlat,
        })
    }

    /// Flat curve at a single rate over the given tenors.
    pub fn flat(tenors: Vec<Tenor>, rate: f64) -> Result<Self> {
        let rates = vec![rate; tenors.len()];
        YieldCurve::new(tenors, rates)
    }

    pub fn tenors(&self) -> &[Tenor] {
        &self.tenors
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Spot rate at time `t` (years): exact at knots, linear between them,
    /// flat beyond the first and last knot. `t` must be non-negative.
    pub fn spot_rate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let first = self.tenors[0].years();
        let last = self.tenors[self.tenors.len() - 1].years();
        if t <= first {
            return Ok(self.rates[0]);
        }
        if t >= last {
            return Ok(self.rates[self.rates.len() - 1]);
        }
        // Bracketing knots; exact hits return the knot rate untouched.
        let mut hi = 1;
        while self.tenors[hi].years() < t {
            hi += 1;
        }
        if self.tenors[hi].years() == t {
            return Ok(self.rates[hi]);
        }
        let lo = hi - 1;
        let t0 = self.tenors[lo].years();
        let t1 = self.tenors[hi].years();
        let w = (t - t0) / (t1 - t0);
        Ok(self.rates[lo] + w * (self.rates[hi] - self.rates[lo]))
    }
}

fn validate_tenors(tenors: &[Tenor]) -> Result<()> {
    for (j, pair) in tenors.windows(2).enumerate() {
        if pair[1].years() <= pair[0].years() {
            return Err(Error::NonMonotoneTenors {
                column: j + 3,
                value: pair[1].years(),
                previous: pair[0].years(),
            });
        }
    }
    Ok(())
}

pub(crate) fn column_means(m: &Matrix) -> Vec<f64> {
    let n = m.rows() as f64;
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m[(i, j)]).sum::<f64>() / n)
        .collect()
}

fn column_std(m: &Matrix, j: usize, mean: f64) -> f64 {
    let n = m.rows() as f64;
    let ss: f64 = (0..m.rows()).map(|i| (m[(i, j)] - mean).powi(2)).sum();
    (ss / (n - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn tenors(years: &[f64]) -> Vec<Tenor> {
        years.iter().map(|&y| Tenor::new(y).unwrap()).collect()
    }

    fn series(rows: &[Vec<f64>], tenor_years: &[f64]) -> YieldCurveSeries {
        let dates = (0..rows.len())
            .map(|i| date("2020-01-01") + chrono::Days::new(i as u64))
            .collect();
        YieldCurveSeries::new(dates, tenors(tenor_years), Matrix::from_rows(rows).unwrap())
            .unwrap()
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn load_well_formed_csv() {
        let f = write_csv("date,1,5\n2020-01-01,0.02,0.03\n2020-01-02,0.021,0.031\n2020-01-03,0.022,0.032\n");
        let s = YieldCurveSeries::load_csv(f.path(), RateUnit::Decimal).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.tenors().len(), 2);
        assert_eq!(s.rates()[(0, 1)], 0.03);
    }

    #[test]
    fn load_percent_unit_divides_by_100() {
        let f = write_csv("date,1\n2020-01-01,2.5\n2020-01-02,2.6\n");
        let s = YieldCurveSeries::load_csv(f.path(), RateUnit::Percent).unwrap();
        assert_eq!(s.rates()[(0, 0)], 0.025);
    }

    #[test]
    fn load_rejects_decreasing_tenors() {
        let f = write_csv("date,5,1\n2020-01-01,0.02,0.03\n2020-01-02,0.021,0.031\n");
        match YieldCurveSeries::load_csv(f.path(), RateUnit::Decimal) {
            Err(Error::NonMonotoneTenors { column, .. }) => assert_eq!(column, 3),
            other => panic!("expected NonMonotoneTenors, got {other:?}"),
        }
    }

    #[test]
    fn load_names_row_and_column_of_bad_cell() {
        let f = write_csv("date,1,5\n2020-01-01,0.02,0.03\n2020-01-02,abc,0.031\n");
        match YieldCurveSeries::load_csv(f.path(), RateUnit::Decimal) {
            Err(Error::CellParse { row, column, value }) => {
                assert_eq!((row, column), (2, 2));
                assert_eq!(value, "abc");
            }
            other => panic!("expected CellParse, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_bad_date_and_short_files() {
        let f = write_csv("date,1\n01/02/2020,0.02\n2020-01-02,0.021\n");
        assert!(matches!(
            YieldCurveSeries::load_csv(f.path(), RateUnit::Decimal),
            Err(Error::DateParse { row: 1, .. })
        ));
        let f = write_csv("date,1\n2020-01-01,0.02\n");
        assert!(matches!(
            YieldCurveSeries::load_csv(f.path(), RateUnit::Decimal),
            Err(Error::TooFewRows { actual: 1, .. })
        ));
    }

    #[test]
    fn load_rejects_missing_cells() {
        let f = write_csv("date,1,5\n2020-01-01,0.02,0.03\n2020-01-02,0.021\n");
        assert!(matches!(
            YieldCurveSeries::load_csv(f.path(), RateUnit::Decimal),
            Err(Error::RaggedRow { row: 2, .. }) | Err(Error::Csv { .. })
        ));
    }

    #[test]
    fn load_is_deterministic() {
        let body = "date,1,5\n2020-01-01,0.02,0.03\n2020-01-02,0.021,0.031\n";
        let f = write_csv(body);
        let a = YieldCurveSeries::load_csv(f.path(), RateUnit::Decimal).unwrap();
        let b = YieldCurveSeries::load_csv(f.path(), RateUnit::Decimal).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn diff_constant_and_step_series() {
        let s = series(&[vec![0.02], vec![0.02]], &[1.0]);
        assert_eq!(s.diff().changes()[(0, 0)], 0.0);
        let s = series(&[vec![0.02], vec![0.025]], &[1.0]);
        assert!((s.diff().changes()[(0, 0)] - 0.005).abs() < 1e-18);
    }

    #[test]
    fn diff_matches_direct_subtraction_oracle() {
        let rows = vec![vec![0.020, 0.031], vec![0.024, 0.029], vec![0.021, 0.035]];
        let s = series(&rows, &[1.0, 5.0]);
        let d = s.diff();
        for k in 0..2 {
            for j in 0..2 {
                assert_eq!(d.changes()[(k, j)], rows[k + 1][j] - rows[k][j]);
            }
        }
        assert_eq!(d.dates(), &s.dates()[1..]);
    }

    #[test]
    fn summary_stats_textbook_column() {
        // Column [1,2,3] scaled into the rate band: mean 0.02, std 0.01.
        let s = series(&[vec![0.01], vec![0.02], vec![0.03]], &[1.0]);
        let stats = s.summary_stats();
        assert!((stats.means()[0] - 0.02).abs() < 1e-15);
        assert!((stats.stds()[0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn summary_stats_zero_variance_flags_nan_off_diagonal() {
        let s = series(
            &[vec![0.03, 0.01], vec![0.03, 0.02], vec![0.03, 0.03]],
            &[1.0, 5.0],
        );
        let stats = s.summary_stats();
        assert_eq!(stats.means()[0], 0.03);
        assert_eq!(stats.stds()[0], 0.0);
        assert!(stats.correlation()[(0, 1)].is_nan());
        assert!(stats.correlation()[(1, 0)].is_nan());
        assert_eq!(stats.correlation()[(0, 0)], 1.0);
    }

    #[test]
    fn summary_stats_proportional_columns_correlate_to_one() {
        let rows = vec![vec![0.010, 0.020], vec![0.013, 0.026], vec![0.011, 0.022]];
        let s = series(&rows, &[1.0, 5.0]);
        let got = s.summary_stats().correlation()[(0, 1)];
        // Oracle: Pearson formula evaluated directly.
        let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        let mx = xs.iter().sum::<f64>() / 3.0;
        let my = ys.iter().sum::<f64>() / 3.0;
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
            * ys.iter().map(|y| (y - my).powi(2)).sum::<f64>())
        .sqrt();
        assert!((got - num / den).abs() < 1e-12);
        assert!((got - 1.0).abs() < 1e-12);
    }

    #[test]
    fn summary_correlation_symmetric_unit_diagonal() {
        let s = series(
            &[
                vec![0.020, 0.031, 0.040],
                vec![0.024, 0.029, 0.043],
                vec![0.021, 0.035, 0.039],
                vec![0.026, 0.030, 0.044],
            ],
            &[1.0, 5.0, 10.0],
        );
        let c = s.summary_stats().correlation().clone();
        for i in 0..3 {
            assert!((c[(i, i)] - 1.0).abs() <= 1e-12);
            for j in 0..3 {
                assert!((c[(i, j)] - c[(j, i)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn snapshot_bounds() {
        let s = series(&[vec![0.02], vec![0.03], vec![0.04]], &[1.0]);
        assert_eq!(s.snapshot(0).unwrap().rates(), &[0.02]);
        assert_eq!(s.snapshot(2).unwrap().rates(), &[0.04]);
        assert!(matches!(
            s.snapshot(3),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn spot_rate_knots_midpoints_and_extrapolation() {
        let curve = YieldCurve::new(tenors(&[1.0, 3.0]), vec![0.03, 0.05]).unwrap();
        assert_eq!(curve.spot_rate(1.0).unwrap(), 0.03);
        assert_eq!(curve.spot_rate(3.0).unwrap(), 0.05);
        // Oracle: two-point line through (1, 3%) and (3, 5%) at t = 2.
        assert!((curve.spot_rate(2.0).unwrap() - 0.04).abs() < 1e-15);
        assert_eq!(curve.spot_rate(10.0).unwrap(), 0.05);
        assert_eq!(curve.spot_rate(0.0).unwrap(), 0.03);
        assert!(matches!(curve.spot_rate(-1.0), Err(Error::NegativeTime(_))));
    }

    proptest! {
        #[test]
        fn diff_then_cumsum_reconstructs(rows in proptest::collection::vec(
            proptest::collection::vec(-0.4f64..0.9, 3), 2..12.min(12)))
        {
            let s = series(&rows, &[1.0, 5.0, 10.0]);
            let d = s.diff();
            for j in 0..3 {
                let mut acc = s.rates()[(0, j)];
                for k in 0..d.changes().rows() {
                    acc += d.changes()[(k, j)];
                    prop_assert!((acc - s.rates()[(k + 1, j)]).abs() <= 1e-15);
                }
            }
        }

        #[test]
        fn spot_rate_is_continuous_at_knots(knot in 1usize..3) {
            let curve = YieldCurve::new(
                tenors(&[0.5, 2.0, 7.0, 30.0]),
                vec![0.01, 0.02, 0.035, 0.03],
            ).unwrap();
            let t = curve.tenors()[knot].years();
            let at = curve.spot_rate(t).unwrap();
            let lo = curve.spot_rate(t - 1e-12).unwrap();
            let hi = curve.spot_rate(t + 1e-12).unwrap();
            prop_assert!((at - lo).abs() <= 1e-10);
            prop_assert!((at - hi).abs() <= 1e-10);
        }
    }
}
