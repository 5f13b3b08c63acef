//! Discounting and present value under continuous compounding, plus curve
//! shifting for shock analysis.
//!
//! The price of one unit of cash at time `t` is `exp(-r(t) * t)` with `r`
//! read off the curve. Times are raw year fractions; there are no day-count
//! conventions.

use std::path::Path;

use crate::curve::YieldCurve;
use crate::error::{Error, Result};

/// A single cash amount at a point in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CashFlow {
    time: f64,
    amount: f64,
}

impl CashFlow {
    pub fn new(time: f64, amount: f64) -> Result<Self> {
        if !time.is_finite() || !amount.is_finite() || time < 0.0 {
            return Err(Error::NonFiniteCashFlow { time, amount });
        }
        Ok(CashFlow { time, amount })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn amount(&self) -> f64 {
        self.amount
    }
}

/// An ordered list of cash flows with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CashFlowStream {
    flows: Vec<CashFlow>,
}

impl CashFlowStream {
    /// Construct from flows already sorted by time, strictly increasing.
    pub fn new(flows: Vec<CashFlow>) -> Result<Self> {
        for (i, pair) in flows.windows(2).enumerate() {
            if pair[1].time <= pair[0].time {
                return Err(Error::UnorderedCashFlows {
                    index: i + 1,
                    value: pair[1].time,
                });
            }
        }
        Ok(CashFlowStream { flows })
    }

    /// Construct from flows in any order; equal-time flows are merged by
    /// summing their amounts.
    pub fn from_flows(mut flows: Vec<CashFlow>) -> Self {
        flows.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite times"));
        let mut merged: Vec<CashFlow> = Vec::with_capacity(flows.len());
        for f in flows {
            match merged.last_mut() {
                Some(last) if last.time == f.time => last.amount += f.amount,
                _ => merged.push(f),
            }
        }
        CashFlowStream { flows: merged }
    }

    /// A single zero-coupon payment of `face` at `maturity`.
    pub fn zero_coupon(face: f64, maturity: f64) -> Result<Self> {
        Ok(CashFlowStream {
            flows: vec![CashFlow::new(maturity, face)?],
        })
    }

    pub fn flows(&self) -> &[CashFlow] {
        &self.flows
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    /// Same times with every amount multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        CashFlowStream {
            flows: self
                .flows
                .iter()
                .map(|f| CashFlow {
                    time: f.time,
                    amount: f.amount * factor,
                })
                .collect(),
        }
    }

    /// Load from a cash-flow CSV with header `time_years,amount`. Rows may
    /// appear in any order; equal times are merged.
    pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
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
        let mut flows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Csv {
                path: path_str.clone(),
                message: e.to_string(),
            })?;
            if record.len() != 2 {
                return Err(Error::RaggedRow {
                    row,
                    expected: 2,
                    found: record.len(),
                });
            }
            let time: f64 = record.get(0).unwrap_or("").parse().map_err(|_| {
                Error::CellParse {
                    row,
                    column: 1,
                    value: record.get(0).unwrap_or("").to_string(),
                }
            })?;
            let amount: f64 = record.get(1).unwrap_or("").parse().map_err(|_| {
                Error::CellParse {
                    row,
                    column: 2,
                    value: record.get(1).unwrap_or("").to_string(),
                }
            })?;
            flows.push(CashFlow::new(time, amount)?);
        }
        if flows.is_empty() {
            return Err(Error::EmptyStream);
        }
        Ok(CashFlowStream::from_flows(flows))
    }
}

/// Present value of one unit of cash at time `t`: `exp(-r(t) * t)`.
pub fn discount_factor(curve: &YieldCurve, t: f64) -> Result<f64> {
    let rate = curve.spot_rate(t)?;
    Ok((-rate * t).exp())
}

/// Price of a zero-coupon bond: `face * exp(-r(t) * t)`.
pub fn zero_price(face: f64, curve: &YieldCurve, t: f64) -> Result<f64> {
    if !(face > 0.0) {
        return Err(Error::NonPositiveFace(face));
    }
    Ok(face * discount_factor(curve, t)?)
}

/// Present value of a stream: the discounted sum of its cash flows.
pub fn present_value(stream: &CashFlowStream, curve: &YieldCurve) -> Result<f64> {
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut pv = 0.0;
    for flow in stream.flows() {
        pv += flow.amount() * discount_factor(curve, flow.time())?;
    }
    Ok(pv)
}

/// New curve with every knot rate moved by `epsilon * direction[i]`.
/// Tenors and interpolation policy are unchanged.
pub fn shift_curve(curve: &YieldCurve, direction: &[f64], epsilon: f64) -> Result<YieldCurve> {
    if direction.len() != curve.tenors().len() {
        return Err(Error::LengthMismatch {
            expected: curve.tenors().len(),
            actual: direction.len(),
        });
    }
    let rates = curve
        .rates()
        .iter()
        .zip(direction)
        .map(|(r, d)| r + epsilon * d)
        .collect();
    YieldCurve::new(curve.tenors().to_vec(), rates)
}
