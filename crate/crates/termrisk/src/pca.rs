//! Principal component analysis of yield-curve movements.
//!
//! The covariance of rate changes (or raw levels, for reproducing legacy
//! runs) is eigendecomposed with a cyclic Jacobi solver. The eigenvectors
//! are the factor loadings; the first three are conventionally read as
//! level, slope, and curvature of the term structure. Each eigenvalue's
//! share of the trace is the percentage of variance that factor explains.

use serde::{Deserialize, Serialize};

use crate::curve::{Tenor, YieldCurveSeries};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Asymmetry above which a matrix is rejected as non-symmetric.
const SYMMETRY_TOL: f64 = 1e-9;
/// Eigenvalue gap under which the deterministic tie-break kicks in.
const EIGEN_TIE_TOL: f64 = 1e-12;

/// Symmetric positive-semidefinite sample covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(Matrix);

impl CovarianceMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }
}

/// Sample covariance of the columns of `data`, centered by column means,
/// with the N-1 denominator. Needs at least two rows.
pub fn covariance(data: &Matrix) -> Result<CovarianceMatrix> {
    let n = data.rows();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            actual: n,
        });
    }
    let m = data.cols();
    let means = crate::curve::column_means(data);
    let mut cov = Matrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let mut acc = 0.0;
            for i in 0..n {
                acc += (data[(i, a)] - means[a]) * (data[(i, b)] - means[b]);
            }
            acc /= (n - 1) as f64;
            cov[(a, b)] = acc;
            cov[(b, a)] = acc;
        }
    }
    Ok(CovarianceMatrix(cov))
}

/// Full eigendecomposition of a symmetric matrix, sorted by eigenvalue
/// descending. Eigenvectors are returned as the columns of the second
/// element, orthonormal within solver tolerance.
///
/// Near-degenerate eigenvalues (gap below 1e-12) are ordered by the first
/// differing eigenvector entry so repeated runs emit identical output.
pub fn eigh_symmetric(s: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let asym = s.max_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::NonSymmetric {
            max_asymmetry: asym,
        });
    }
    let (eig, vecs) = linalg::jacobi_eigh(s)?;
    let n = eig.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        if (eig[a] - eig[b]).abs() >= EIGEN_TIE_TOL {
            eig[b].partial_cmp(&eig[a]).unwrap()
        } else {
            // Total order for reproducibility: first differing vector entry,
            // ascending.
            for i in 0..n {
                let (va, vb) = (vecs[(i, a)], vecs[(i, b)]);
                if va != vb {
                    return va.partial_cmp(&vb).unwrap();
                }
            }
            std::cmp::Ordering::Equal
        }
    });
    let sorted_eig: Vec<f64> = order.iter().map(|&i| eig[i]).collect();
    let mut sorted_vecs = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            sorted_vecs[(i, dst)] = vecs[(i, src)];
        }
    }
    Ok((sorted_eig, sorted_vecs))
}

/// Which data the covariance is estimated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaMode {
    /// First differences of the spot rates (the default).
    Changes,
    /// Raw rate levels, for reproducing legacy level-PCA runs.
    Levels,
}

impl std::fmt::Display for PcaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PcaMode::Changes => write!(f, "changes"),
            PcaMode::Levels => write!(f, "levels"),
        }
    }
}

/// A fitted principal-component model of curve movements.
///
/// `loadings` is the orthonormal matrix whose column `v` is component `v`'s
/// loading across tenors; eigenvalues are sorted descending and carry
/// variance units, so each factor's score standard deviation is `sqrt(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    tenors: Vec<Tenor>,
    mode: PcaMode,
    loadings: Matrix,
    eigenvalues: Vec<f64>,
    explained_pct: Vec<f64>,
    column_means: Vec<f64>,
    factor_score_sd: Vec<f64>,
    retained: usize,
}

impl PcaModel {
    /// Fit a model to a series: estimate the covariance of the mode's data,
    /// eigendecompose it, and keep `k` components for scoring.
    ///
    /// Column signs are normalized so the largest-magnitude entry of every
    /// loading column is positive, which makes the fit deterministic.
    pub fn fit(series: &YieldCurveSeries, mode: PcaMode, k: usize) -> Result<Self> {
        let m = series.tenors().len();
        if k < 1 || k > m {
            return Err(Error::ComponentsOutOfRange { k, max: m });
        }
        let data = mode_data(series, mode);
        let cov = covariance(&data)?;
        if cov.matrix().frobenius_norm() == 0.0 {
            return Err(Error::DegenerateCovariance);
        }
        let (raw_eig, mut loadings) = eigh_symmetric(cov.matrix())?;

        // Clamp the tiny negative eigenvalues rounding can produce on a PSD
        // input so sqrt and percentage shares stay well defined.
        let clamp_floor = -1e-10 * cov.matrix().frobenius_norm().max(1.0);
        let mut eigenvalues = Vec::with_capacity(m);
        for lambda in raw_eig {
            if lambda < clamp_floor {
                return Err(Error::ModelInvariant(format!(
                    "covariance eigenvalue {lambda} is negative beyond rounding"
                )));
            }
            eigenvalues.push(lambda.max(0.0));
        }

        apply_sign_convention(&mut loadings);

        let total: f64 = eigenvalues.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateCovariance);
        }
        let explained_pct = eigenvalues.iter().map(|l| 100.0 * l / total).collect();
        let factor_score_sd = eigenvalues.iter().map(|l| l.sqrt()).collect();
        let column_means = crate::curve::column_means(&data);

        Ok(PcaModel {
            tenors: series.tenors().to_vec(),
            mode,
            loadings,
            eigenvalues,
            explained_pct,
            column_means,
            factor_score_sd,
            retained: k,
        })
    }

    /// Assemble a model from explicit parts, validating orthonormality,
    /// eigenvalue ordering, and dimensions. Useful for loading an exported
    /// model or for building reference models with known loadings.
    pub fn from_parts(
        tenors: Vec<Tenor>,
        mode: PcaMode,
        loadings: Matrix,
        eigenvalues: Vec<f64>,
        column_means: Vec<f64>,
        retained: usize,
    ) -> Result<Self> {
        let m = tenors.len();
        if loadings.rows() != m || loadings.cols() != m {
            return Err(Error::ModelInvariant(format!(
                "loadings must be {m}x{m}, got {}x{}",
                loadings.rows(),
                loadings.cols()
            )));
        }
        if eigenvalues.len() != m || column_means.len() != m {
            return Err(Error::ModelInvariant(
                "eigenvalues and column_means must have one entry per tenor".into(),
            ));
        }
        if retained < 1 || retained > m {
            return Err(Error::ComponentsOutOfRange {
                k: retained,
                max: m,
            });
        }
        for pair in eigenvalues.windows(2) {
            if pair[1] > pair[0] + 1e-12 {
                return Err(Error::ModelInvariant(
                    "eigenvalues must be sorted descending".into(),
                ));
            }
        }
        if eigenvalues.iter().any(|l| *l < -1e-12 || !l.is_finite()) {
            return Err(Error::ModelInvariant(
                "eigenvalues must be finite and non-negative".into(),
            ));
        }
        let gram = loadings.transpose().mul(&loadings);
        for i in 0..m {
            for j in 0..m {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - expected).abs() > 1e-10 {
                    return Err(Error::ModelInvariant(
                        "loading columns are not orthonormal".into(),
                    ));
                }
            }
        }
        let total: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
        if total <= 0.0 {
            return Err(Error::DegenerateCovariance);
        }
        let explained_pct = eigenvalues
            .iter()
            .map(|l| 100.0 * l.max(0.0) / total)
            .collect();
        let factor_score_sd = eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
        Ok(PcaModel {
            tenors,
            mode,
            loadings,
            eigenvalues,
            explained_pct,
            column_means,
            factor_score_sd,
            retained,
        })
    }

    pub fn tenors(&self) -> &[Tenor] {
        &self.tenors
    }

    pub fn mode(&self) -> PcaMode {
        self.mode
    }

    /// Orthonormal loading matrix; column `v` is component `v`.
    pub fn loadings(&self) -> &Matrix {
        &self.loadings
    }

    /// Loading column `v` (0-based component index).
    pub fn loading_column(&self, v: usize) -> Vec<f64> {
        self.loadings.col(v)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn explained_pct(&self) -> &[f64] {
        &self.explained_pct
    }

    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }

    /// Standard deviation of each factor's scores, `sqrt(λ)`.
    pub fn factor_score_sd(&self) -> &[f64] {
        &self.factor_score_sd
    }

    /// Number of components retained for scoring.
    pub fn retained(&self) -> usize {
        self.retained
    }

    /// Number of tenors `m`.
    pub fn dim(&self) -> usize {
        self.tenors.len()
    }

    /// Project a series onto the retained components: scores equal the
    /// mode's data, centered by the fitted column means, times the first
    /// `retained` loading columns.
    pub fn factor_scores(&self, series: &YieldCurveSeries) -> Result<FactorScores> {
        self.scores_impl(series, true)
    }

    /// Scores without centering. Reproduces legacy level-mode runs that
    /// projected raw data onto the loadings.
    pub fn factor_scores_uncentered(&self, series: &YieldCurveSeries) -> Result<FactorScores> {
        self.scores_impl(series, false)
    }

    fn scores_impl(&self, series: &YieldCurveSeries, center: bool) -> Result<FactorScores> {
        if series.tenors() != self.tenors.as_slice() {
            return Err(Error::TenorMismatch);
        }
        let data = mode_data(series, self.mode);
        let rows = data.rows();
        let k = self.retained;
        let mut scores = Matrix::zeros(rows, k);
        for i in 0..rows {
            for v in 0..k {
                let mut acc = 0.0;
                for j in 0..self.dim() {
                    let centered = if center {
                        data[(i, j)] - self.column_means[j]
                    } else {
                        data[(i, j)]
                    };
                    acc += centered * self.loadings[(j, v)];
                }
                scores[(i, v)] = acc;
            }
        }
        Ok(FactorScores { scores })
    }

    /// Residual standard deviation per tenor after regressing the mode's
    /// data on a constant plus the first `k` factor scores (ordinary least
    /// squares, N-k-1 denominator).
    pub fn residual_diagnostics(
        &self,
        series: &YieldCurveSeries,
        k: usize,
    ) -> Result<ResidualReport> {
        if k > self.retained {
            return Err(Error::ComponentsOutOfRange {
                k,
                max: self.retained,
            });
        }
        let scores = self.factor_scores(series)?;
        let data = mode_data(series, self.mode);
        let rows = data.rows();
        if rows <= k + 1 {
            return Err(Error::TooFewRowsForRegression {
                rows,
                regressors: k + 1,
            });
        }
        // Design matrix [1, F_1..F_k].
        let mut design = Matrix::zeros(rows, k + 1);
        for i in 0..rows {
            design[(i, 0)] = 1.0;
            for v in 0..k {
                design[(i, v + 1)] = scores.matrix()[(i, v)];
            }
        }
        let mut residual_sd = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let y: Vec<f64> = (0..rows).map(|i| data[(i, j)]).collect();
            let beta = linalg::qr_solve(&design, &y)
                .ok_or(Error::DegenerateCovariance)
                .or_else(|_| linalg::pinv_solve(&design, &y))?;
            let fitted = design.mul_vec(&beta);
            let ssr: f64 = y
                .iter()
                .zip(&fitted)
                .map(|(yi, fi)| (yi - fi).powi(2))
                .sum();
            residual_sd.push((ssr / (rows - k - 1) as f64).sqrt());
        }
        Ok(ResidualReport { residual_sd })
    }

    /// Serialize to the stable JSON model format.
    pub fn to_json(&self) -> String {
        let dto = ModelJson {
            tenors: self.tenors.iter().map(Tenor::years).collect(),
            mode: self.mode,
            eigenvalues: self.eigenvalues.clone(),
            explained_pct: self.explained_pct.clone(),
            loadings: self.loadings.to_rows(),
            column_means: self.column_means.clone(),
        };
        let mut s = serde_json::to_string_pretty(&dto).expect("model serializes");
        s.push('\n');
        s
    }

    /// Parse and validate a model from its JSON export. `retained` chooses
    /// how many components scoring will use.
    pub fn from_json(text: &str, retained: usize) -> Result<Self> {
        let dto: ModelJson =
            serde_json::from_str(text).map_err(|e| Error::ModelJson(e.to_string()))?;
        let tenors = dto
            .tenors
            .iter()
            .map(|&y| Tenor::new(y))
            .collect::<Result<Vec<_>>>()?;
        let loadings = Matrix::from_rows(&dto.loadings)?;
        PcaModel::from_parts(
            tenors,
            dto.mode,
            loadings,
            dto.eigenvalues,
            dto.column_means,
            retained,
        )
    }
}

/// JSON shape of an exported model. Field names are a stable contract.
#[derive(Serialize, Deserialize)]
struct ModelJson {
    tenors: Vec<f64>,
    mode: PcaMode,
    eigenvalues: Vec<f64>,
    explained_pct: Vec<f64>,
    loadings: Vec<Vec<f64>>,
    column_means: Vec<f64>,
}

/// Factor scores: one row per observation of the fitted data, one column
/// per retained component.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorScores {
    scores: Matrix,
}

impl FactorScores {
    pub fn matrix(&self) -> &Matrix {
        &self.scores
    }

    pub fn retained(&self) -> usize {
        self.scores.cols()
    }
}

/// Per-tenor residual standard deviation of a k-factor regression.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    residual_sd: Vec<f64>,
}

impl ResidualReport {
    pub fn residual_sd(&self) -> &[f64] {
        &self.residual_sd
    }
}

/// The data matrix the chosen mode fits on: first differences or raw levels.
fn mode_data(series: &YieldCurveSeries, mode: PcaMode) -> Matrix {
    match mode {
        PcaMode::Changes => series.diff().changes().clone(),
        PcaMode::Levels => series.rates().clone(),
    }
}

/// Flip each column so its largest-magnitude entry is positive.
fn apply_sign_convention(loadings: &mut Matrix) {
    let (m, n) = (loadings.rows(), loadings.cols());
    for v in 0..n {
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for i in 0..m {
            let a = loadings[(i, v)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if loadings[(best, v)] < 0.0 {
            for i in 0..m {
                loadings[(i, v)] = -loadings[(i, v)];
            }
        }
    }
}
