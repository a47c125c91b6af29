//! What a user expects other servers to do.
//!
//! The fixed model assumes a server with positive reputation follows the
//! social rule with probability `1 - ε` (and otherwise serves no one), while
//! a server at reputation 0 was just punished and serves no one with
//! probability `1 - ε`. The adaptive model replaces this with an empirical
//! distribution over each reputation's service threshold.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::abs;
use crate::{Error, Reputation, Result, SocialNorm};

pub trait ServiceBelief {
    /// Probability that a server of `server_rep` serves a client of
    /// `client_rep`.
    fn serve_prob(&self, norm: &SocialNorm, server_rep: Reputation, client_rep: Reputation) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedBelief {
    pub epsilon: f64,
}

impl FixedBelief {
    pub fn for_norm(norm: &SocialNorm) -> Self {
        Self {
            epsilon: norm.params().epsilon(),
        }
    }
}

impl ServiceBelief for FixedBelief {
    #[inline]
    fn serve_prob(&self, norm: &SocialNorm, server_rep: Reputation, client_rep: Reputation) -> f64 {
        let complies = if norm.phi_unchecked(server_rep, client_rep) {
            1.0
        } else {
            0.0
        };
        if server_rep > 0 {
            (1.0 - self.epsilon) * complies
        } else {
            self.epsilon * complies
        }
    }
}

const ROW_TOLERANCE: f64 = 1e-9;

/// Row-stochastic `(L+1) x (L+2)` matrix: entry `(θ, l)` is the believed
/// probability that a server of reputation θ uses service threshold `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefMatrix {
    l: usize,
    rows: Vec<f64>,
    observations: Vec<u64>,
}

impl BeliefMatrix {
    /// Everyone is believed to follow the social rule.
    pub fn compliant(norm: &SocialNorm) -> Self {
        let l = norm.l();
        let mut rows = vec![0.0; (l + 1) * (l + 2)];
        for theta in 0..=l {
            rows[theta * (l + 2) + norm.prescribed(theta).threshold()] = 1.0;
        }
        Self {
            l,
            rows,
            observations: vec![0; l + 1],
        }
    }

    /// Builds a matrix from explicit rows, checking shape and stochasticity.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let l = rows.len().checked_sub(1).ok_or(Error::CensusShape {
            expected: 2,
            got: 0,
        })?;
        let mut flat = Vec::with_capacity((l + 1) * (l + 2));
        for (theta, row) in rows.iter().enumerate() {
            if row.len() != l + 2 {
                return Err(Error::CensusShape {
                    expected: l + 2,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&x| !(x >= 0.0)) || abs(sum - 1.0) > ROW_TOLERANCE {
                return Err(Error::BeliefNotStochastic { row: theta, sum });
            }
        }
        Ok(Self {
            l,
            rows: flat,
            observations: vec![0; l + 1],
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn row(&self, theta: Reputation) -> &[f64] {
        let w = self.l + 2;
        &self.rows[theta * w..(theta + 1) * w]
    }

    pub fn get(&self, theta: Reputation, threshold: usize) -> f64 {
        self.rows[theta * (self.l + 2) + threshold]
    }

    /// Transactions observed so far with servers of reputation `theta`.
    pub fn observations(&self, theta: Reputation) -> u64 {
        self.observations[theta]
    }

    pub fn validate(&self) -> Result<()> {
        for theta in 0..=self.l {
            let row = self.row(theta);
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&x| !(x >= 0.0)) || abs(sum - 1.0) > ROW_TOLERANCE {
                return Err(Error::BeliefNotStochastic { row: theta, sum });
            }
        }
        Ok(())
    }

    /// Running-average update after being served (`observed = true`) or
    /// refused by a server of reputation `server_rep` while holding
    /// `own_rep`. `t` is the 1-based transaction index for that row.
    ///
    /// Service spreads weight `1/(own_rep+1)` over thresholds `0..=own_rep`;
    /// refusal spreads `1/(L+1-own_rep)` over `own_rep+1..=L+1`.
    pub fn updated(
        &self,
        server_rep: Reputation,
        own_rep: Reputation,
        observed: bool,
        t: u64,
    ) -> Self {
        let mut next = self.clone();
        next.apply(server_rep, own_rep, observed, t);
        next
    }

    /// In-place form of [`BeliefMatrix::updated`] that also advances the
    /// row's transaction counter.
    pub fn observe(&mut self, server_rep: Reputation, own_rep: Reputation, observed: bool) {
        let t = self.observations[server_rep] + 1;
        self.apply(server_rep, own_rep, observed, t);
    }

    fn apply(&mut self, server_rep: Reputation, own_rep: Reputation, observed: bool, t: u64) {
        debug_assert!(t >= 1 && server_rep <= self.l && own_rep <= self.l);
        let l = self.l;
        let w = l + 2;
        let tf = t as f64;
        let keep = (tf - 1.0) / tf;
        let low = if observed {
            1.0 / (own_rep + 1) as f64
        } else {
            0.0
        };
        let high = if observed {
            0.0
        } else {
            1.0 / (l + 1 - own_rep) as f64
        };
        let row = &mut self.rows[server_rep * w..(server_rep + 1) * w];
        for (threshold, x) in row.iter_mut().enumerate() {
            let inc = if threshold <= own_rep { low } else { high };
            *x = *x * keep + inc / tf;
        }
        self.observations[server_rep] = t;
    }
}

impl ServiceBelief for BeliefMatrix {
    #[inline]
    fn serve_prob(&self, _norm: &SocialNorm, server_rep: Reputation, client_rep: Reputation) -> f64 {
        self.row(server_rep)[..=client_rep].iter().sum()
    }
}

/// Pure form of the adaptive belief update.
pub fn belief_update(
    beliefs: &BeliefMatrix,
    server_rep: Reputation,
    own_rep: Reputation,
    observed: bool,
    t: u64,
) -> Result<BeliefMatrix> {
    if server_rep > beliefs.l {
        return Err(Error::ReputationOutOfRange {
            rep: server_rep,
            max: beliefs.l,
        });
    }
    if own_rep > beliefs.l {
        return Err(Error::ReputationOutOfRange {
            rep: own_rep,
            max: beliefs.l,
        });
    }
    if t == 0 {
        return Err(Error::param("t", "transaction index starts at 1"));
    }
    Ok(beliefs.updated(server_rep, own_rep, observed, t))
}
