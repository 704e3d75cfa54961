//! Gaussian-process Bayesian optimization over normalized `(h, P_dBW)`.
//!
//! Candidates form a regular grid on the unit square. The initial design is
//! a seeded sample of grid points; every further point maximizes expected
//! improvement among the unevaluated candidates. Infeasible evaluations
//! enter the surrogate as 0.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::linspace;
use super::{Method, OptimizationResult, Probe, Problem, Tracer};
use crate::error::{ensure, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesConfig {
    /// Total objective evaluations, initial design included.
    pub eval_budget: usize,
    pub initial_points: usize,
    /// Candidate grid points per axis.
    pub grid: usize,
    pub seed: u64,
    /// Length scales tried for the squared-exponential kernel; the one with
    /// the highest marginal likelihood wins.
    pub length_scales: Vec<f64>,
    /// Exploration margin of expected improvement.
    pub xi: f64,
    pub noise: f64,
}

impl Default for BayesConfig {
    fn default() -> Self {
        Self {
            eval_budget: 30,
            initial_points: 8,
            grid: 41,
            seed: 0,
            length_scales: vec![0.05, 0.1, 0.2, 0.3, 0.5, 1.0],
            xi: 0.01,
            noise: 1e-6,
        }
    }
}

impl BayesConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.eval_budget >= 5, "bayes.eval_budget", "must be >= 5")?;
        ensure(
            self.initial_points >= 1 && self.initial_points <= self.eval_budget,
            "bayes.initial_points",
            "must lie in [1, eval_budget]",
        )?;
        ensure(self.grid >= 2, "bayes.grid", "must be >= 2")?;
        ensure(
            !self.length_scales.is_empty() && self.length_scales.iter().all(|&l| l > 0.0),
            "bayes.length_scales",
            "must be non-empty and positive",
        )?;
        ensure(self.noise > 0.0, "bayes.noise", "must be > 0")
    }
}

struct Gp {
    xs: Vec<[f64; 2]>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    length: f64,
    mean: f64,
    scale: f64,
}

fn kernel(a: &[f64; 2], b: &[f64; 2], length: f64) -> f64 {
    let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    (-0.5 * d2 / (length * length)).exp()
}

impl Gp {
    fn fit_one(
        xs: &[[f64; 2]],
        y: &DVector<f64>,
        length: f64,
        noise: f64,
    ) -> Option<(Cholesky<f64, Dyn>, DVector<f64>, f64)> {
        let n = xs.len();
        let k = DMatrix::from_fn(n, n, |i, j| {
            kernel(&xs[i], &xs[j], length) + if i == j { noise } else { 0.0 }
        });
        let chol = k.cholesky()?;
        let alpha = chol.solve(y);
        let log_det: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
        let lml = -0.5 * y.dot(&alpha) - 0.5 * log_det;
        Some((chol, alpha, lml))
    }

    fn fit(xs: &[[f64; 2]], ys: &[f64], cfg: &BayesConfig) -> Option<Gp> {
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ys.len() as f64;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        let y = DVector::from_iterator(ys.len(), ys.iter().map(|v| (v - mean) / scale));

        let mut best: Option<(f64, Cholesky<f64, Dyn>, DVector<f64>, f64)> = None;
        for &length in &cfg.length_scales {
            // Escalate the jitter if the kernel matrix is numerically singular.
            let mut noise = cfg.noise;
            let fitted = loop {
                if let Some(f) = Self::fit_one(xs, &y, length, noise) {
                    break Some(f);
                }
                noise *= 10.0;
                if noise > 1e-2 {
                    break None;
                }
            };
            if let Some((chol, alpha, lml)) = fitted {
                if best.as_ref().is_none_or(|b| lml > b.3) {
                    best = Some((length, chol, alpha, lml));
                }
            }
        }
        best.map(|(length, chol, alpha, _)| Gp {
            xs: xs.to_vec(),
            chol,
            alpha,
            length,
            mean,
            scale,
        })
    }

    /// Posterior mean and standard deviation in objective units.
    fn predict(&self, x: &[f64; 2]) -> (f64, f64) {
        let k = DVector::from_iterator(
            self.xs.len(),
            self.xs.iter().map(|xi| kernel(xi, x, self.length)),
        );
        let mu = k.dot(&self.alpha);
        let v = self.chol.solve(&k);
        let var = (1.0 - k.dot(&v)).max(0.0);
        (self.mean + self.scale * mu, self.scale * var.sqrt())
    }
}

struct State {
    used: Vec<bool>,
    xs: Vec<[f64; 2]>,
    ys: Vec<f64>,
    probes: Vec<Probe>,
    tracer: Tracer,
}

fn expected_improvement(mu: f64, sigma: f64, best: f64, xi: f64) -> f64 {
    let gain = mu - best - xi;
    if sigma <= 0.0 {
        return gain.max(0.0);
    }
    let z = gain / sigma;
    let cdf = 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    gain * cdf + sigma * pdf
}

/// Bayesian optimization with a GP surrogate and expected improvement.
pub fn bayesian_optimize(problem: &Problem, cfg: &BayesConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    problem.validate()?;
    let b = &problem.bounds;
    let (p_lo, p_hi) = b.power_dbw();
    let axis: Vec<f64> = linspace(0.0, 1.0, cfg.grid).collect();
    let candidates: Vec<[f64; 2]> = axis
        .iter()
        .flat_map(|&u| axis.iter().map(move |&v| [u, v]))
        .collect();
    let to_point = |c: &[f64; 2]| {
        (
            b.altitude_min + c[0] * (b.altitude_max - b.altitude_min),
            p_lo + c[1] * (p_hi - p_lo),
        )
    };

    let budget = cfg.eval_budget.min(candidates.len());
    let mut state = State {
        used: vec![false; candidates.len()],
        xs: Vec::with_capacity(budget),
        ys: Vec::with_capacity(budget),
        probes: Vec::with_capacity(budget),
        tracer: Tracer::new(),
    };
    let evaluate = |state: &mut State, idx: usize| -> Result<()> {
        let (h, p) = to_point(&candidates[idx]);
        let probe = problem.probe(h, p)?;
        state.used[idx] = true;
        state.xs.push(candidates[idx]);
        state.ys.push(probe.objective);
        state.tracer.record(state.probes.len(), &probe);
        state.probes.push(probe);
        Ok(())
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let initial = cfg.initial_points.min(budget);
    let mut order: Vec<usize> = sample(&mut rng, candidates.len(), initial).into_vec();
    order.sort_unstable();
    for &idx in &order {
        evaluate(&mut state, idx)?;
    }

    while state.probes.len() < budget {
        let y_best = state.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let next = match Gp::fit(&state.xs, &state.ys, cfg) {
            Some(gp) => {
                let mut pick: Option<(usize, f64, f64)> = None;
                for (i, c) in candidates.iter().enumerate() {
                    if state.used[i] {
                        continue;
                    }
                    let (mu, sigma) = gp.predict(c);
                    let ei = expected_improvement(mu, sigma, y_best, cfg.xi);
                    let better = match pick {
                        None => true,
                        Some((_, e, s)) => ei > e || (ei == e && ei == 0.0 && sigma > s),
                    };
                    if better {
                        pick = Some((i, ei, sigma));
                    }
                }
                pick.map(|p| p.0)
            }
            None => state.used.iter().position(|u| !u),
        };
        match next {
            Some(idx) => evaluate(&mut state, idx)?,
            None => break,
        }
    }

    let State { probes, tracer, .. } = state;
    let mut best = probes[0];
    for p in &probes[1..] {
        if p.objective > best.objective
            || (!best.feasible && p.feasible && p.objective == best.objective)
        {
            best = *p;
        }
    }
    let mut r = OptimizationResult::from_probe(Method::Bayesian, "bayesian", &best);
    r.iterations = probes.len();
    r.evaluations = probes.len();
    r.trace = tracer.entries;
    Ok(r)
}
