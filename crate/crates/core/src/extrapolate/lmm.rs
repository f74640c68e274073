//! Mixture of linear regressions: spectral clustering of the (V, E) cloud
//! seeds a hard-assignment EM loop of per-cluster least-squares lines.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{as_pairs, ols_fit, Diagnostics, ExtrapolationResult, LinearFit, Method};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::subspace::EnergyVariancePoint;

pub const MIN_CLUSTER_SIZE: usize = 5;
const MAX_EM_ITER: usize = 1000;
const KMEANS_RESTARTS: usize = 10;
const KMEANS_ITER: usize = 300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterFit {
    pub label: usize,
    pub size: usize,
    pub fit: LinearFit,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// k-means++ seeding followed by Lloyd iterations; returns labels and inertia.
fn kmeans(rows: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> (Vec<usize>, f64) {
    let n = rows.len();
    let mut centers: Vec<Vec<f64>> = vec![rows[rng.random_range(0..n)].clone()];
    while centers.len() < k {
        let d2: Vec<f64> =
            rows.iter().map(|r| centers.iter().map(|c| sq_dist(r, c)).fold(f64::INFINITY, f64::min)).collect();
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(rows[next].clone());
    }
    let mut labels = vec![0usize; n];
    for _ in 0..KMEANS_ITER {
        let mut changed = false;
        for (i, r) in rows.iter().enumerate() {
            let best = (0..k).min_by(|&a, &b| sq_dist(r, &centers[a]).total_cmp(&sq_dist(r, &centers[b]))).unwrap();
            if best != labels[i] {
                labels[i] = best;
                changed = true;
            }
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = rows.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
            if members.is_empty() {
                continue;
            }
            for (j, x) in center.iter_mut().enumerate() {
                *x = members.iter().map(|r| r[j]).sum::<f64>() / members.len() as f64;
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = rows.iter().zip(&labels).map(|(r, &l)| sq_dist(r, &centers[l])).sum();
    (labels, inertia)
}

/// Spectral clustering with an RBF affinity, `gamma = 1 / median^2` of the
/// pairwise distances.
pub fn spectral_clusters(points: &[(f64, f64)], k: usize, seed: u64) -> Vec<usize> {
    let n = points.len();
    let dist = |i: usize, j: usize| ((points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2)).sqrt();
    let pairwise: Vec<f64> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| dist(i, j)).collect();
    let med = median(pairwise);
    let gamma = if med > 0.0 { 1.0 / (med * med) } else { 1.0 };
    let affinity = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { (-gamma * dist(i, j).powi(2)).exp() });
    let degree: Vec<f64> = (0..n).map(|i| affinity.row(i).sum().max(1e-300)).collect();
    let normalized = DMatrix::from_fn(n, n, |i, j| affinity[(i, j)] / (degree[i] * degree[j]).sqrt());
    let eig = SymmetricEigen::new(normalized);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let rows: Vec<Vec<f64>> =
        (0..n).map(|i| order[..k].iter().map(|&c| eig.eigenvectors[(i, c)] / degree[i].sqrt()).collect()).collect();

    let mut best: Option<(Vec<usize>, f64)> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut rng = stream(seed, &[restart as u64]);
        let (labels, inertia) = kmeans(&rows, k, &mut rng);
        if best.as_ref().is_none_or(|b| inertia < b.1) {
            best = Some((labels, inertia));
        }
    }
    best.map(|b| b.0).unwrap_or_default()
}

fn fit_clusters(points: &[(f64, f64)], labels: &[usize], k: usize) -> Option<Vec<LinearFit>> {
    (0..k)
        .map(|c| {
            let members: Vec<(f64, f64)> =
                points.iter().zip(labels).filter(|(_, &l)| l == c).map(|(p, _)| *p).collect();
            ols_fit(&members).ok()
        })
        .collect()
}

fn objective(points: &[(f64, f64)], labels: &[usize], fits: &[LinearFit]) -> f64 {
    points.iter().zip(labels).map(|(p, &l)| (p.1 - fits[l].predict(p.0)).powi(2)).sum()
}

/// Clustered linear extrapolation; the line with the lowest intercept wins.
pub fn lmm_fit(points: &[EnergyVariancePoint], n_clusters: usize, seed: u64) -> Result<ExtrapolationResult> {
    if n_clusters == 0 {
        return Err(Error::Consistency("at least one cluster is required".into()));
    }
    let n = points.len();
    if n < MIN_CLUSTER_SIZE * n_clusters {
        return Err(Error::ClusterSize(format!(
            "{n} points cannot fill {n_clusters} clusters of at least {MIN_CLUSTER_SIZE}"
        )));
    }
    let pairs = as_pairs(points);

    let (labels, fits, history) = if n_clusters == 1 {
        let fit = ols_fit(&pairs)?;
        let labels = vec![0; n];
        let j = objective(&pairs, &labels, std::slice::from_ref(&fit));
        (labels, vec![fit], vec![j])
    } else {
        let mut labels = spectral_clusters(&pairs, n_clusters, seed);
        let mut history = Vec::new();
        let mut fits = fit_clusters(&pairs, &labels, n_clusters)
            .ok_or_else(|| Error::ClusterSize("spectral clustering left a cluster without a fit".into()))?;
        history.push(objective(&pairs, &labels, &fits));
        for _ in 0..MAX_EM_ITER {
            let next: Vec<usize> = pairs
                .iter()
                .map(|p| {
                    (0..n_clusters)
                        .min_by(|&a, &b| {
                            (p.1 - fits[a].predict(p.0)).powi(2).total_cmp(&(p.1 - fits[b].predict(p.0)).powi(2))
                        })
                        .unwrap()
                })
                .collect();
            if next == labels {
                break;
            }
            let Some(next_fits) = fit_clusters(&pairs, &next, n_clusters) else {
                log::debug!("EM step collapsed a cluster; keeping the previous assignment");
                break;
            };
            labels = next;
            fits = next_fits;
            history.push(objective(&pairs, &labels, &fits));
        }
        (labels, fits, history)
    };

    let clusters: Vec<ClusterFit> = fits
        .iter()
        .enumerate()
        .map(|(c, fit)| ClusterFit { label: c, size: labels.iter().filter(|&&l| l == c).count(), fit: *fit })
        .collect();
    if let Some(small) = clusters.iter().find(|c| c.size < MIN_CLUSTER_SIZE) {
        return Err(Error::ClusterSize(format!(
            "cluster {} ended with {} points (minimum {MIN_CLUSTER_SIZE})",
            small.label, small.size
        )));
    }
    let best =
        clusters.iter().min_by(|a, b| a.fit.intercept.total_cmp(&b.fit.intercept)).expect("at least one cluster").fit;
    Ok(ExtrapolationResult {
        estimate: best.intercept,
        ci: best.ci(),
        method: Method::Lmm,
        diagnostics: Diagnostics {
            points: points.to_vec(),
            assignments: labels,
            clusters,
            objective: history,
            fit: Some(best),
            ..Default::default()
        },
    })
}
