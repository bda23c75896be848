//! Stationary-distribution solvers: a dense direct solve of the augmented
//! normal equations for small spaces and uniformized power iteration above
//! the dense cutoff.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::generator::Generator;
use super::CtmcError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Required bound on the stationary residual `max |pi * Q|`.
    pub tolerance: f64,
    /// Largest state count solved with the dense direct method.
    pub dense_cutoff: usize,
    /// Iteration budget for the power method.
    pub max_iterations: usize,
    /// Cap on the enumerated state count.
    pub state_ceiling: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            dense_cutoff: 4096,
            max_iterations: 2_000_000,
            state_ceiling: super::space::DEFAULT_STATE_CEILING,
        }
    }
}

/// A stationary distribution together with the residual it achieved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub pi: Vec<f64>,
    pub residual: f64,
}

/// Solve `pi * Q = 0`, `sum(pi) = 1`.
pub fn solve_steady_state(q: &Generator, options: &SolverOptions) -> Result<SteadyState, CtmcError> {
    solve_steady_state_with_guess(q, options, None)
}

/// Same as [`solve_steady_state`], optionally warm-starting the iterative
/// path from a previous solution (useful across nearby sweep points).
pub fn solve_steady_state_with_guess(
    q: &Generator,
    options: &SolverOptions,
    guess: Option<&[f64]>,
) -> Result<SteadyState, CtmcError> {
    let n = q.len();
    let mut pi = if n <= options.dense_cutoff {
        solve_dense(q)?
    } else {
        solve_uniformized(q, options, guess)?
    };
    normalize(&mut pi)?;
    let residual = q.residual(&pi);
    if residual > options.tolerance {
        return Err(CtmcError::NotConverged {
            residual,
            tolerance: options.tolerance,
        });
    }
    Ok(SteadyState { pi, residual })
}

/// Direct solve: transpose the generator, replace the last balance equation
/// with the normalization row, and LU-solve.
fn solve_dense(q: &Generator) -> Result<Vec<f64>, CtmcError> {
    let n = q.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, row) in q.rows.iter().enumerate() {
        a[(i, i)] += q.diagonal[i];
        for &(j, rate) in row {
            a[(j, i)] += rate; // transposed: column i holds flows out of i
        }
    }
    for col in 0..n {
        a[(n - 1, col)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let lu = a.lu();
    let x = lu.solve(&b).ok_or(CtmcError::NotConverged {
        residual: f64::INFINITY,
        tolerance: 0.0,
    })?;
    Ok(x.iter().copied().collect())
}

/// Power iteration on the uniformized transition matrix
/// `P = I + Q / Lambda` with `Lambda` above the largest exit rate.
fn solve_uniformized(
    q: &Generator,
    options: &SolverOptions,
    guess: Option<&[f64]>,
) -> Result<Vec<f64>, CtmcError> {
    let n = q.len();
    let max_exit = q
        .diagonal
        .iter()
        .fold(0.0f64, |acc, &d| acc.max(-d));
    let lambda = (max_exit * 1.05).max(1e-12);

    let mut pi: Vec<f64> = match guess {
        Some(g) if g.len() == n => g.to_vec(),
        _ => vec![1.0 / n as f64; n],
    };
    let mut next = vec![0.0f64; n];

    let mut iterations = 0usize;
    loop {
        // next = pi * P = pi + (pi * Q) / Lambda
        next.copy_from_slice(&pi);
        for (i, row) in q.rows.iter().enumerate() {
            let pi_i = pi[i];
            if pi_i == 0.0 {
                continue;
            }
            next[i] += pi_i * q.diagonal[i] / lambda;
            for &(j, rate) in row {
                next[j] += pi_i * rate / lambda;
            }
        }
        std::mem::swap(&mut pi, &mut next);
        iterations += 1;

        if iterations % 32 == 0 || iterations >= options.max_iterations {
            let sum: f64 = pi.iter().sum();
            for x in pi.iter_mut() {
                *x /= sum;
            }
            let residual = q.residual(&pi);
            if residual <= options.tolerance * 0.5 {
                return Ok(pi);
            }
            if iterations >= options.max_iterations {
                return Err(CtmcError::NotConverged {
                    residual,
                    tolerance: options.tolerance,
                });
            }
        }
    }
}

/// Clamp solver round-off below zero and renormalize to a probability vector.
fn normalize(pi: &mut [f64]) -> Result<(), CtmcError> {
    let max = pi.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    for (i, x) in pi.iter_mut().enumerate() {
        if *x < 0.0 {
            if *x < -1e-9 * max.max(1.0) {
                return Err(CtmcError::NegativeProbability {
                    state: i,
                    value: *x,
                });
            }
            *x = 0.0;
        }
    }
    let sum: f64 = pi.iter().sum();
    if !(sum > 0.0) {
        return Err(CtmcError::NotConverged {
            residual: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    for x in pi.iter_mut() {
        *x /= sum;
    }
    Ok(())
}
