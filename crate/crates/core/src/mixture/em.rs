use nalgebra::{Matrix3, Vector3};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::model::{Assignment, Component, FitMetadata, GmmModel};
use super::order::order_clusters;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub g: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Stop once the relative log-likelihood gain falls below this.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            g: 3,
            restarts: 30,
            seed: 0,
            rel_tol: 1e-8,
            max_iter: 500,
        }
    }
}

/// Weight below which a component counts as collapsed.
pub const MIN_WEIGHT: f64 = 1e-6;
/// Collapse floor on covariance eigenvalues, in units of the ridge.
pub const EIGEN_FLOOR_RIDGES: f64 = 2.0;
const MIN_INIT_MEMBERS: usize = 4;
const INIT_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RestartStatus {
    Converged,
    MaxIter,
    Collapsed,
    InitFailed,
}

/// Per-restart record, kept for diagnostics and monotonicity checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub status: RestartStatus,
    pub iterations: usize,
    pub log_likelihood: Option<f64>,
    pub icl: Option<f64>,
    /// Largest relative log-likelihood drop between two iterations.
    pub max_rel_decrease: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    /// Selected model, components in Z-score order.
    pub model: GmmModel,
    /// Final-iteration posteriors of the training data.
    pub assignments: Vec<Assignment>,
    pub traces: Vec<RestartTrace>,
}

/// Free parameters of a G-component, fully unconstrained trivariate mixture.
pub fn free_parameters(g: usize) -> usize {
    (g - 1) + 3 * g + 6 * g
}

/// Classification entropy −Σ_i log t_i,ẑ(i) of a flat n×G responsibility
/// table, ẑ(i) being each row's MAP cluster. Zero for crisp assignments.
pub fn entropy(responsibilities: &[f64], g: usize) -> f64 {
    -responsibilities
        .chunks_exact(g)
        .map(|row| row.iter().copied().fold(0.0_f64, f64::max).ln())
        .sum::<f64>()
}

pub fn icl_from_parts(log_likelihood: f64, n: usize, g: usize, responsibilities: &[f64]) -> f64 {
    -2.0 * log_likelihood + free_parameters(g) as f64 * (n as f64).ln() + 2.0 * entropy(responsibilities, g)
}

/// ICL of a candidate on `data`; lower is better.
pub fn icl(model: &GmmModel, data: &[[f64; 3]], responsibilities: &[f64]) -> Result<f64> {
    let g = model.g();
    if responsibilities.len() != data.len() * g {
        return Err(Error::config("responsibility table does not match data and model"));
    }
    let mut buf = vec![0.0; g];
    let ll: f64 = data.iter().map(|x| model.log_joint(x, &mut buf)).sum();
    Ok(icl_from_parts(ll, data.len(), g, responsibilities))
}

/// Multi-restart EM; returns the minimum-ICL restart.
pub fn em_fit(data: &[[f64; 3]], config: &EmConfig) -> Result<FitOutcome> {
    let g = config.g;
    let n = data.len();
    if g == 0 || config.restarts == 0 {
        return Err(Error::config("EM needs at least one component and one restart"));
    }
    if n < 10 * g {
        return Err(Error::data(format!("{n} observations are too few for {g} components (need {})", 10 * g)));
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::numeric("training data contain non-finite metrics"));
    }
    let ridge = ridge(data);

    let runs: Vec<(RestartTrace, Option<Candidate>)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(data, config, ridge, r))
        .collect();

    let mut best: Option<&Candidate> = None;
    for (_, cand) in &runs {
        if let Some(c) = cand {
            if best.is_none_or(|b| c.icl < b.icl) {
                best = Some(c);
            }
        }
    }
    let traces: Vec<RestartTrace> = runs.iter().map(|(t, _)| t.clone()).collect();
    let Some(best) = best else {
        return Err(Error::numeric(format!(
            "all {} EM restarts collapsed or failed to initialise",
            config.restarts
        )));
    };

    let labels: Vec<usize> = best.resp.chunks(g).map(argmax).collect();
    let (mut model, order) = order_clusters(&best.model, data, &labels);
    model.fit = Some(FitMetadata {
        n,
        seed: config.seed,
        restarts: config.restarts,
        restarts_discarded: runs.iter().filter(|(_, c)| c.is_none()).count(),
        selected_restart: best.restart,
        iterations: best.iterations,
        converged: best.converged,
        log_likelihood: best.log_likelihood,
        icl: best.icl,
    });
    let assignments = best
        .resp
        .chunks(g)
        .enumerate()
        .map(|(i, row)| {
            let posteriors: Vec<f64> = order.iter().map(|&o| row[o]).collect();
            let label = argmax(&posteriors);
            Assignment {
                dyad: i,
                max_posterior: posteriors[label],
                posteriors,
                label,
            }
        })
        .collect();
    Ok(FitOutcome {
        model,
        assignments,
        traces,
    })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// 10⁻⁸ · trace(sample covariance) / 3, with a floor for constant data.
fn ridge(data: &[[f64; 3]]) -> f64 {
    let n = data.len() as f64;
    let mut tr = 0.0;
    for f in 0..3 {
        let mean = data.iter().map(|x| x[f]).sum::<f64>() / n;
        tr += data.iter().map(|x| (x[f] - mean).powi(2)).sum::<f64>() / (n - 1.0);
    }
    (1e-8 * tr / 3.0).max(1e-300)
}

struct Candidate {
    restart: usize,
    model: GmmModel,
    resp: Vec<f64>,
    log_likelihood: f64,
    icl: f64,
    iterations: usize,
    converged: bool,
}

fn run_restart(data: &[[f64; 3]], cfg: &EmConfig, ridge: f64, restart: usize) -> (RestartTrace, Option<Candidate>) {
    let g = cfg.g;
    let mut trace = RestartTrace {
        restart,
        status: RestartStatus::InitFailed,
        iterations: 0,
        log_likelihood: None,
        icl: None,
        max_rel_decrease: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let Some(mut resp) = initial_responsibilities(data, g, &mut rng) else {
        return (trace, None);
    };

    let mut model = match m_step(data, &resp, g, ridge) {
        Ok(m) => m,
        Err(_) => {
            trace.status = RestartStatus::Collapsed;
            return (trace, None);
        }
    };
    let mut prev = f64::NEG_INFINITY;
    let mut converged = false;
    let mut ll;
    let mut iterations = 0;
    loop {
        ll = e_step(data, &model, &mut resp);
        iterations += 1;
        if !ll.is_finite() {
            trace.status = RestartStatus::Collapsed;
            trace.iterations = iterations;
            return (trace, None);
        }
        if prev.is_finite() {
            let gain = (ll - prev) / prev.abs();
            trace.max_rel_decrease = trace.max_rel_decrease.max(-gain);
            if gain < cfg.rel_tol {
                converged = true;
                break;
            }
        }
        if iterations >= cfg.max_iter {
            break;
        }
        prev = ll;
        model = match m_step(data, &resp, g, ridge) {
            Ok(m) => m,
            Err(_) => {
                trace.status = RestartStatus::Collapsed;
                trace.iterations = iterations;
                return (trace, None);
            }
        };
    }
    let icl = icl_from_parts(ll, data.len(), g, &resp);
    trace.status = if converged {
        RestartStatus::Converged
    } else {
        RestartStatus::MaxIter
    };
    trace.iterations = iterations;
    trace.log_likelihood = Some(ll);
    trace.icl = Some(icl);
    (
        trace,
        Some(Candidate {
            restart,
            model,
            resp,
            log_likelihood: ll,
            icl,
            iterations,
            converged,
        }),
    )
}

/// Hard nearest-seed responsibilities from G distinct data points.
fn initial_responsibilities(data: &[[f64; 3]], g: usize, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let n = data.len();
    for _ in 0..INIT_ATTEMPTS {
        let seeds: Vec<[f64; 3]> = sample(rng, n, g).into_iter().map(|i| data[i]).collect();
        let mut resp = vec![0.0; n * g];
        let mut counts = vec![0usize; g];
        for (i, x) in data.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, s) in seeds.iter().enumerate() {
                let d = (0..3).map(|f| (x[f] - s[f]).powi(2)).sum::<f64>();
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            resp[i * g + best] = 1.0;
            counts[best] += 1;
        }
        if counts.iter().all(|&c| c >= MIN_INIT_MEMBERS) {
            return Some(resp);
        }
    }
    None
}

/// Returns the log-likelihood and overwrites `resp` with posteriors.
fn e_step(data: &[[f64; 3]], model: &GmmModel, resp: &mut [f64]) -> f64 {
    let g = model.g();
    let mut ll = 0.0;
    for (x, row) in data.iter().zip(resp.chunks_mut(g)) {
        let total = model.log_joint(x, row);
        ll += total;
        for v in row.iter_mut() {
            *v = (*v - total).exp();
        }
    }
    ll
}

fn m_step(data: &[[f64; 3]], resp: &[f64], g: usize, ridge: f64) -> Result<GmmModel> {
    let n = data.len() as f64;
    let mut comps = Vec::with_capacity(g);
    for k in 0..g {
        let mut nk = 0.0;
        let mut s = Vector3::zeros();
        for (x, row) in data.iter().zip(resp.chunks(g)) {
            let r = row[k];
            nk += r;
            s += Vector3::from(*x) * r;
        }
        let weight = nk / n;
        if weight.is_nan() || weight < MIN_WEIGHT {
            return Err(Error::numeric(format!("component {k} weight {weight} collapsed")));
        }
        let mean = s / nk;
        let mut cov = Matrix3::zeros();
        for (x, row) in data.iter().zip(resp.chunks(g)) {
            let d = Vector3::from(*x) - mean;
            cov += d * d.transpose() * row[k];
        }
        cov /= nk;
        for i in 0..3 {
            cov[(i, i)] += ridge;
        }
        let c = Component::new(weight, mean, cov)?;
        if c.min_eigenvalue() < EIGEN_FLOOR_RIDGES * ridge {
            return Err(Error::numeric(format!("component {k} covariance collapsed")));
        }
        comps.push(c);
    }
    let total: f64 = comps.iter().map(|c| c.weight).sum();
    // weights are renormalised against the summation rounding
    let comps = comps
        .iter()
        .map(|c| c.with_weight(c.weight / total))
        .collect::<Result<Vec<_>>>()?;
    GmmModel::new(comps)
}
