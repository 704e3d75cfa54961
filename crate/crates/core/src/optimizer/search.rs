//! One-dimensional searches used by the alternating optimizer.

use serde::{Deserialize, Serialize};

use super::Probe;
use crate::error::{ensure, Result};

/// `(sqrt(5) - 1) / 2`
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome {
    pub best: Probe,
    pub evaluations: usize,
}

/// Golden-section search for the maximum score of `eval` over `[lo, hi]`.
///
/// On equal scores the left sub-interval is kept. If every probe scores the
/// same the interval midpoint is returned.
pub fn golden_section<E>(
    mut eval: E,
    lo: f64,
    hi: f64,
    tol: f64,
    max_probes: usize,
) -> Result<SearchOutcome>
where
    E: FnMut(f64) -> Result<Probe>,
{
    if !(hi - lo > tol) {
        let best = eval(0.5 * (lo + hi))?;
        return Ok(SearchOutcome {
            best,
            evaluations: 1,
        });
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    let mut evaluations = 2;
    let first = fc.score;
    let mut flat = fc.score == fd.score;
    let mut best = if fd.beats(&fc) { fd } else { fc };

    while b - a > tol && evaluations < max_probes {
        if fc.score >= fd.score {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
            flat &= fc.score == first;
            if fc.beats(&best) {
                best = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
            flat &= fd.score == first;
            if fd.beats(&best) {
                best = fd;
            }
        }
        evaluations += 1;
    }

    if flat {
        best = eval(0.5 * (lo + hi))?;
        evaluations += 1;
    }
    Ok(SearchOutcome { best, evaluations })
}

/// Settings of the finite-difference quasi-Newton ascent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiNewtonSettings {
    /// Central-difference half step relative to the search width.
    pub fd_step_rel: f64,
    /// Lower bound on the curvature magnitude.
    pub hessian_floor: f64,
    pub lr_init: f64,
    /// Learning-rate factor applied when the step direction flips.
    pub lr_decay: f64,
    /// Stop when a step would move less than this.
    pub step_tol: f64,
    /// Largest step relative to the search width.
    pub max_step_rel: f64,
    pub max_probes: usize,
}

impl Default for QuasiNewtonSettings {
    fn default() -> Self {
        Self {
            fd_step_rel: 1e-3,
            hessian_floor: 1e-6,
            lr_init: 1.0,
            lr_decay: 0.5,
            step_tol: 0.01,
            max_step_rel: 0.25,
            max_probes: 60,
        }
    }
}

impl QuasiNewtonSettings {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.fd_step_rel > 0.0 && self.fd_step_rel < 0.5,
            "quasi_newton.fd_step_rel",
            "must lie in (0, 0.5)",
        )?;
        ensure(
            self.hessian_floor > 0.0,
            "quasi_newton.hessian_floor",
            "must be > 0",
        )?;
        ensure(self.lr_init > 0.0, "quasi_newton.lr_init", "must be > 0")?;
        ensure(
            self.lr_decay > 0.0 && self.lr_decay < 1.0,
            "quasi_newton.lr_decay",
            "must lie in (0, 1)",
        )?;
        ensure(self.step_tol > 0.0, "quasi_newton.step_tol", "must be > 0")?;
        ensure(
            self.max_step_rel > 0.0 && self.max_step_rel <= 1.0,
            "quasi_newton.max_step_rel",
            "must lie in (0, 1]",
        )?;
        ensure(
            self.max_probes >= 3,
            "quasi_newton.max_probes",
            "must be >= 3",
        )
    }
}

/// Maximize the score of `eval` on `[lo, hi]` starting from the already
/// evaluated probe `start` located at `x0`.
///
/// Each iteration takes a central-difference gradient and divides it by a
/// curvature estimate (second difference at first, secant of successive
/// gradients afterwards). Steps are accepted only if they improve the score,
/// with backtracking otherwise, so the returned probe never scores below
/// `start`.
pub fn quasi_newton<E>(
    mut eval: E,
    x0: f64,
    start: Probe,
    lo: f64,
    hi: f64,
    s: &QuasiNewtonSettings,
) -> Result<SearchOutcome>
where
    E: FnMut(f64) -> Result<Probe>,
{
    let width = hi - lo;
    let mut best = start;
    let mut evaluations = 0;
    if !(width > 0.0) {
        return Ok(SearchOutcome { best, evaluations });
    }
    let delta = s.fd_step_rel * width;
    let max_step = s.max_step_rel * width;

    let mut x = x0.clamp(lo, hi);
    let mut fx = start;
    let mut lr = s.lr_init;
    let mut prev: Option<(f64, f64)> = None;
    let mut prev_dir = 0.0;

    'outer: while evaluations + 2 < s.max_probes {
        let xl = (x - delta).max(lo);
        let xr = (x + delta).min(hi);
        let fl = if xl == x {
            fx
        } else {
            evaluations += 1;
            eval(xl)?
        };
        let fr = if xr == x {
            fx
        } else {
            evaluations += 1;
            eval(xr)?
        };
        for p in [fl, fr] {
            if p.beats(&best) {
                best = p;
            }
        }
        let g = (fr.score - fl.score) / (xr - xl);
        if !(g.is_finite() && g != 0.0) {
            break;
        }

        let curvature = match prev {
            Some((xp, gp)) if xp != x => (g - gp) / (x - xp),
            _ if xl < x && xr > x => (fr.score - 2.0 * fx.score + fl.score) / (delta * delta),
            _ => 0.0,
        };
        let step = (g / curvature.abs().max(s.hessian_floor)).clamp(-max_step, max_step);
        let dir = step.signum();
        if prev_dir != 0.0 && dir != prev_dir {
            lr *= s.lr_decay;
        }

        let mut t = lr;
        loop {
            let x_new = (x + t * step).clamp(lo, hi);
            if (x_new - x).abs() < s.step_tol || evaluations >= s.max_probes {
                break 'outer;
            }
            let f_new = eval(x_new)?;
            evaluations += 1;
            if f_new.beats(&best) {
                best = f_new;
            }
            if f_new.score > fx.score {
                prev = Some((x, g));
                prev_dir = dir;
                x = x_new;
                fx = f_new;
                break;
            }
            t *= 0.5;
        }
    }
    Ok(SearchOutcome { best, evaluations })
}
