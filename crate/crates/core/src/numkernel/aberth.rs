use std::f64::consts::PI;

use super::poly::{backward_error, eval_compensated, eval_with_derivative};
use super::{all_finite, NumError, C64, MAX_ORDER};

/// Iteration controls for [`solve_poly_aberth`].
#[derive(Debug, Clone, Copy)]
pub struct AberthOptions {
    pub max_iterations: usize,
    /// Maximum accepted normwise backward error of each returned root.
    pub residual_tolerance: f64,
    /// Newton steps (with compensated evaluation) applied after convergence.
    pub polish_steps: usize,
}

impl Default for AberthOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            residual_tolerance: 1e-10,
            polish_steps: 3,
        }
    }
}

/// All roots of the descending-order polynomial `coeffs` by Aberth–Ehrlich
/// simultaneous iteration.
///
/// Roots are Newton-polished with compensated Horner evaluation and returned
/// individually, even when clustered; the order is unspecified.
pub fn solve_poly_aberth(coeffs: &[C64]) -> Result<Vec<C64>, NumError> {
    solve_poly_aberth_with(coeffs, AberthOptions::default())
}

pub fn solve_poly_aberth_with(coeffs: &[C64], opts: AberthOptions) -> Result<Vec<C64>, NumError> {
    if !all_finite(coeffs) {
        return Err(NumError::DegenerateInput("polynomial coefficients"));
    }
    if coeffs.is_empty() || coeffs[0] == C64::new(0.0, 0.0) {
        return Err(NumError::ZeroLeadingCoefficient);
    }
    let degree = coeffs.len() - 1;
    if degree == 0 || degree > MAX_ORDER {
        return Err(NumError::InvalidOrder(degree));
    }

    // Exact zero roots deflate away.
    let zero_roots = coeffs.iter().rev().take_while(|c| c.norm() == 0.0).count();
    let lead = coeffs[0];
    let monic: Vec<C64> = coeffs[..=degree - zero_roots].iter().map(|&c| c / lead).collect();
    let mut roots = vec![C64::new(0.0, 0.0); zero_roots];
    let n = monic.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        roots.push(-monic[1]);
        return Ok(roots);
    }

    let mut z = initial_guesses(&monic);
    let mut iterations = 0;
    let mut done = vec![false; n];
    while iterations < opts.max_iterations && done.iter().any(|d| !d) {
        iterations += 1;
        aberth_sweep(&monic, &mut z, &mut done, false);
    }

    // Clustered roots stall at the plain-arithmetic noise floor; a few sweeps
    // with compensated residuals pull them further in.
    let mut done = vec![false; n];
    for _ in 0..opts.polish_steps * 10 {
        if done.iter().all(|&d| d) {
            break;
        }
        aberth_sweep(&monic, &mut z, &mut done, true);
    }
    for _ in 0..opts.polish_steps {
        for zk in z.iter_mut() {
            newton_polish(&monic, zk);
        }
    }

    let best_residual = z.iter().map(|&r| backward_error(&monic, r)).fold(0.0, f64::max);
    if !(best_residual <= opts.residual_tolerance) {
        return Err(NumError::NoConvergence { iterations, best_residual });
    }
    roots.extend(z);
    Ok(roots)
}

/// One Gauss-Seidel Aberth pass over the unconverged roots.
fn aberth_sweep(monic: &[C64], z: &mut [C64], done: &mut [bool], compensated: bool) {
    let n = z.len();
    for k in 0..n {
        if done[k] {
            continue;
        }
        let (plain, dp) = eval_with_derivative(monic, z[k]);
        let p = if compensated { eval_compensated(monic, z[k]) } else { plain };
        if p.norm() == 0.0 {
            done[k] = true;
            continue;
        }
        let ratio = p / dp;
        let repulsion: C64 = (0..n)
            .filter(|&j| j != k)
            .map(|j| {
                let d = z[k] - z[j];
                if d.norm() == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    d.inv()
                }
            })
            .sum();
        let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
        if !(step.re.is_finite() && step.im.is_finite()) {
            // Derivative vanished; nudge off the critical point.
            let nudge = C64::new(1e-8, 1e-8) * (1.0 + z[k].norm());
            z[k] += nudge;
            continue;
        }
        z[k] -= step;
        if step.norm() <= 4.0 * f64::EPSILON * z[k].norm().max(f64::MIN_POSITIVE) {
            done[k] = true;
        }
    }
}

/// One guarded Newton step using a compensated residual.
fn newton_polish(monic: &[C64], z: &mut C64) {
    let p = eval_compensated(monic, *z);
    if p.norm() == 0.0 {
        return;
    }
    let (_, dp) = eval_with_derivative(monic, *z);
    if dp.norm() == 0.0 {
        return;
    }
    let candidate = *z - p / dp;
    if eval_compensated(monic, candidate).norm() < p.norm() {
        *z = candidate;
    }
}

/// Points on a circle around the root centroid, with an irrational angular
/// offset so that no guess starts on a symmetry axis.
fn initial_guesses(monic: &[C64]) -> Vec<C64> {
    let n = monic.len() - 1;
    let center = -monic[1] / n as f64;
    let mut radius = eval_compensated(monic, center).norm().powf(1.0 / n as f64);
    if !(radius > 1e-12 * (1.0 + center.norm())) {
        radius = 1e-3 * (1.0 + center.norm());
    }
    (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64 + 0.4;
            center + C64::from_polar(radius, theta)
        })
        .collect()
}
