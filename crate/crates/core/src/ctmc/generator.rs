//! Assembly of the sparse transition-rate matrix.

use super::space::{CtmcState, StateSpace};
use super::{CtmcError, TrafficModel};

/// Sparse generator: per-row off-diagonal entries plus the diagonal.
#[derive(Debug, Clone)]
pub struct Generator {
    /// Off-diagonal entries `(target state index, rate)` per source state.
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Diagonal entries, each the negated row sum.
    pub diagonal: Vec<f64>,
}

impl Generator {
    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// Infinity norm of `pi * Q` for a probability vector `pi`.
    pub fn residual(&self, pi: &[f64]) -> f64 {
        let mut r = vec![0.0f64; self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            let pi_i = pi[i];
            r[i] += pi_i * self.diagonal[i];
            for &(j, rate) in row {
                r[j] += pi_i * rate;
            }
        }
        r.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
    }
}

/// Build the transition-rate matrix over `space` for the given traffic.
///
/// Per class `c` with state `s`:
/// - arrival kept on the macro BS, rate `lambda_c * (1 - p_ho_c)`, moves to
///   `n_c + 1`;
/// - arrival assigned to a femto BS, rate `lambda_c * p_ho_c`, moves to
///   `n_c + 1, n_h + 1`;
/// - departures leave at total rate `n_c * mu_c`, split between a
///   femto-resident departure (`n_c - 1, n_h - 1`) weighted `n_h / E(s)` and
///   a macro-resident departure (`n_c - 1`) weighted `1 - n_h / E(s)`, where
///   `E(s)` counts the femto-eligible calls in `s`. Classes the policy bars
///   from femtos depart from the macro side only.
///
/// Arrivals whose target state falls outside the space are blocked and lost.
pub fn build_generator(space: &StateSpace, traffic: &TrafficModel) -> Result<Generator, CtmcError> {
    traffic.validate()?;
    let n = space.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(12); n];
    let mut diagonal = vec![0.0f64; n];

    let push = |rows: &mut Vec<Vec<(usize, f64)>>,
                    diagonal: &mut Vec<f64>,
                    from: usize,
                    to: usize,
                    rate: f64|
     -> Result<(), CtmcError> {
        if rate < 0.0 {
            return Err(CtmcError::NegativeRate { from, to, rate });
        }
        if rate > 0.0 {
            rows[from].push((to, rate));
            diagonal[from] -= rate;
        }
        Ok(())
    };

    for (si, s) in space.states.iter().enumerate() {
        for c in 0..4 {
            let lambda = traffic.lambda.0[c];
            let mu = traffic.mu.0[c];
            let p = traffic.p_ho.0[c];

            // Arrivals.
            if (s.n[c] as u32) < space.capacities[c] {
                let mut up = *s;
                up.n[c] += 1;

                let macro_rate = lambda * (1.0 - p);
                if macro_rate > 0.0 {
                    let to = space
                        .index_of(&up)
                        .ok_or(CtmcError::MissingTarget { from: si })?;
                    push(&mut rows, &mut diagonal, si, to, macro_rate)?;
                }

                let femto_rate = lambda * p;
                if femto_rate > 0.0 {
                    let femto_target = CtmcState {
                        n: up.n,
                        n_h: s.n_h + 1,
                    };
                    // Blocked (lost) when the femto-side target is invalid,
                    // e.g. a femto arrival of a class the policy bars.
                    if let Some(to) = space.index_of(&femto_target) {
                        push(&mut rows, &mut diagonal, si, to, femto_rate)?;
                    }
                }
            }

            // Departures.
            if s.n[c] > 0 {
                let total_rate = s.n[c] as f64 * mu;
                let eligible_count = s.eligible_total(space.eligible);
                let femto_weight = if space.eligible[c] && eligible_count > 0 {
                    s.n_h as f64 / eligible_count as f64
                } else {
                    0.0
                };

                let mut down = *s;
                down.n[c] -= 1;

                let femto_rate = total_rate * femto_weight;
                if femto_rate > 0.0 {
                    let target = CtmcState {
                        n: down.n,
                        n_h: s.n_h - 1,
                    };
                    let to = space
                        .index_of(&target)
                        .ok_or(CtmcError::MissingTarget { from: si })?;
                    push(&mut rows, &mut diagonal, si, to, femto_rate)?;
                }

                let macro_rate = total_rate * (1.0 - femto_weight);
                if macro_rate > 0.0 {
                    let to = space
                        .index_of(&down)
                        .ok_or(CtmcError::MissingTarget { from: si })?;
                    push(&mut rows, &mut diagonal, si, to, macro_rate)?;
                }
            }
        }
    }

    Ok(Generator { rows, diagonal })
}
