//! Zero-variance extrapolation of (variance, energy) pairs: plain least
//! squares, regularized recombination of same-fraction states (GEV) and a
//! clustered mixture of linear regressions (LMM).

mod gev;
mod lmm;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub use gev::{fit_or_fallback, gev_combine, gev_extrapolate, GevOutcome, DEFAULT_EPSILON};
pub use lmm::{lmm_fit, ClusterFit, MIN_CLUSTER_SIZE};

use crate::error::{Error, Result};
use crate::subspace::EnergyVariancePoint;

/// Variance below which a state counts as an eigenstate.
pub const ZERO_VARIANCE: f64 = 1e-5;

/// Least-squares line `E = slope * V + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the intercept; `None` with only two points.
    pub intercept_se: Option<f64>,
    /// Half-width of the 95% confidence interval on the intercept.
    pub ci_half: Option<f64>,
    pub r2: f64,
    pub adj_r2: Option<f64>,
    pub n: usize,
}

impl LinearFit {
    pub fn predict(&self, v: f64) -> f64 {
        self.slope * v + self.intercept
    }

    pub fn ci(&self) -> Option<(f64, f64)> {
        self.ci_half.map(|h| (self.intercept - h, self.intercept + h))
    }
}

/// Two-sided Student-t critical value at 95%.
pub fn t_critical(dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof as f64).expect("positive degrees of freedom").inverse_cdf(0.975)
}

/// Ordinary least squares over `(V, E)` pairs.
pub fn ols_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len();
    let nf = n as f64;
    if n < 2 {
        return Err(Error::DegenerateAbscissa);
    }
    let vbar = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let ebar = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - vbar).powi(2)).sum();
    if points.iter().all(|p| p.0 == points[0].0) || sxx == 0.0 {
        return Err(Error::DegenerateAbscissa);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - vbar) * (p.1 - ebar)).sum();
    let slope = sxy / sxx;
    let intercept = ebar - slope * vbar;
    let ssr: f64 = points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let sst: f64 = points.iter().map(|p| (p.1 - ebar).powi(2)).sum();
    let r2 = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };
    let (intercept_se, ci_half, adj_r2) = if n > 2 {
        let s2 = ssr / (nf - 2.0);
        let se = (s2 * (1.0 / nf + vbar * vbar / sxx)).sqrt();
        (Some(se), Some(t_critical(n - 2) * se), Some(1.0 - (1.0 - r2) * (nf - 1.0) / (nf - 2.0)))
    } else {
        (None, None, None)
    };
    Ok(LinearFit { slope, intercept, intercept_se, ci_half, r2, adj_r2, n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Ols,
    Gev,
    Lmm,
    MinFallback,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ols => "ols",
            Method::Gev => "gev",
            Method::Lmm => "lmm",
            Method::MinFallback => "min_fallback",
        }
    }
}

/// Per-point record of what entered a fit.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub points: Vec<EnergyVariancePoint>,
    /// GEV: overlap directions kept and truncated per fraction.
    pub kept: Vec<usize>,
    pub truncated: Vec<usize>,
    /// LMM: cluster label per point, fit per cluster, objective per EM step.
    pub assignments: Vec<usize>,
    pub clusters: Vec<ClusterFit>,
    pub objective: Vec<f64>,
    pub fit: Option<LinearFit>,
    pub fallback_reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationResult {
    pub estimate: f64,
    pub ci: Option<(f64, f64)>,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl ExtrapolationResult {
    fn fallback(points: Vec<EnergyVariancePoint>, reason: impl Into<String>) -> Self {
        let estimate = points.iter().map(|p| p.energy).fold(f64::INFINITY, f64::min);
        Self {
            estimate,
            ci: None,
            method: Method::MinFallback,
            diagnostics: Diagnostics { points, fallback_reason: Some(reason.into()), ..Default::default() },
        }
    }
}

pub(crate) fn as_pairs(points: &[EnergyVariancePoint]) -> Vec<(f64, f64)> {
    points.iter().map(|p| (p.variance, p.energy)).collect()
}

/// Plain OLS extrapolation over all points.
pub fn ols_extrapolate(points: &[EnergyVariancePoint]) -> Result<ExtrapolationResult> {
    let fit = ols_fit(&as_pairs(points))?;
    Ok(ExtrapolationResult {
        estimate: fit.intercept,
        ci: fit.ci(),
        method: Method::Ols,
        diagnostics: Diagnostics { points: points.to_vec(), fit: Some(fit), ..Default::default() },
    })
}
