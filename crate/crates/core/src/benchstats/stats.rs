use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub label: String,
    pub value: f64,
}

/// Quartiles, IQR and whiskers `Q1 - 1.5 IQR`, `Q3 + 1.5 IQR`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatProfile {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub max_w: f64,
    pub min_w: f64,
    pub outliers: Vec<Outlier>,
}

/// Inclusive linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn stat_profile_labelled(values: &[(String, f64)]) -> Result<StatProfile> {
    if values.is_empty() {
        return Err(Error::Consistency("statistics need at least one value".into()));
    }
    let mut sorted: Vec<f64> = values.iter().map(|v| v.1).collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let (q1, median, q3) = (quantile(&sorted, 0.25), quantile(&sorted, 0.5), quantile(&sorted, 0.75));
    let iqr = q3 - q1;
    let (min_w, max_w) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let outliers = values
        .iter()
        .filter(|(_, v)| *v < min_w || *v > max_w)
        .map(|(label, value)| Outlier { label: label.clone(), value: *value })
        .collect();
    Ok(StatProfile { n: values.len(), median, q1, q3, iqr, max_w, min_w, outliers })
}

/// Profile of unlabelled values; outliers are labelled by input position.
pub fn stat_profile(values: &[f64]) -> Result<StatProfile> {
    let labelled: Vec<(String, f64)> = values.iter().enumerate().map(|(i, &v)| (i.to_string(), v)).collect();
    stat_profile_labelled(&labelled)
}
