//! Best responses by value iteration over the user's own reputation.
//!
//! The opponent census is held fixed while the user plans (other users are
//! assumed to keep their current strategies). From reputation θ an action
//! either resets the user to 0 or moves it to `min(L, θ + 1)`, so the MDP is
//! a birth-or-reset chain on `0..=L`.
//!
//! Thresholds that serve the same set of *occupied* opponent reputations are
//! indistinguishable in reward and transition. The solver evaluates one
//! representative per class and reports a canonical threshold for it: `L+1`
//! when nobody present is served, otherwise the prescribed threshold `h_θ`,
//! then `h`, then the largest member of the class.

use alloc::vec;
use alloc::vec::Vec;

use crate::belief::{FixedBelief, ServiceBelief};
use crate::math::{abs, powi};
use crate::payoff::{reset_with, service_rate};
use crate::{Error, OpponentConfig, Reputation, Result, SocialNorm, ThresholdStrategy};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionSpace {
    /// Service thresholds `0..=L+1`.
    Threshold,
    /// Every subset of client reputations (exponential in `L`).
    Subset,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponseSolution {
    /// Optimal service threshold per own reputation. For
    /// [`ActionSpace::Subset`] solves this holds the served-reputation bit
    /// mask instead.
    pub policy: Vec<usize>,
    pub values: Vec<f64>,
    /// All optimal actions per reputation, most restrictive first.
    pub co_optimal: Vec<Vec<usize>>,
    pub iterations: usize,
    pub residual: f64,
}

impl BestResponseSolution {
    /// No reputation has more than one optimal action class.
    pub fn is_strict(&self) -> bool {
        self.co_optimal.iter().all(|a| a.len() == 1)
    }
}

#[derive(Clone, Copy, Debug)]
struct Action {
    label: usize,
    reward: f64,
    reset: f64,
    /// Expected fraction of opponents served, used for tie-breaking.
    load: f64,
}

/// Per-state action table for the birth-or-reset MDP.
#[derive(Clone, Debug)]
pub struct BellmanTable {
    l: usize,
    delta: f64,
    actions: Vec<Vec<Action>>,
}

impl BellmanTable {
    /// Threshold actions, one per realization class.
    pub fn thresholds<B: ServiceBelief + ?Sized>(
        norm: &SocialNorm,
        eta: &OpponentConfig,
        belief: &B,
    ) -> Self {
        let l = norm.l();
        let c = norm.params().c();
        let b = norm.params().b();
        let total = (norm.n() - 1) as f64;
        let classes = threshold_classes(norm, eta);
        let actions = (0..=l)
            .map(|theta| {
                let benefit = b * service_rate(norm, belief, theta, eta);
                classes
                    .iter()
                    .map(|class| {
                        let rep = class.representative;
                        let label = canonical_label(norm, theta, class);
                        let load = class.served as f64 / total;
                        Action {
                            label,
                            reward: benefit - c * load,
                            reset: reset_with(norm, theta, eta, |r| r >= rep),
                            load,
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            l,
            delta: norm.params().delta(),
            actions,
        }
    }

    /// Arbitrary service sets over the occupied opponent reputations,
    /// labelled by bit mask (bit `r` set means clients of reputation `r`
    /// are served).
    pub fn subsets<B: ServiceBelief + ?Sized>(
        norm: &SocialNorm,
        eta: &OpponentConfig,
        belief: &B,
    ) -> Self {
        let l = norm.l();
        let c = norm.params().c();
        let b = norm.params().b();
        let total = (norm.n() - 1) as f64;
        let occupied: Vec<Reputation> = eta.occupied().collect();
        let masks: Vec<usize> = (0usize..1 << occupied.len())
            .map(|bits| {
                occupied
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| bits & (1 << i) != 0)
                    .fold(0usize, |m, (_, &r)| m | (1 << r))
            })
            .collect();
        let actions = (0..=l)
            .map(|theta| {
                let benefit = b * service_rate(norm, belief, theta, eta);
                masks
                    .iter()
                    .map(|&mask| {
                        let served: usize = eta
                            .counts()
                            .iter()
                            .enumerate()
                            .filter(|(r, _)| mask & (1 << r) != 0)
                            .map(|(_, &m)| m)
                            .sum();
                        let load = served as f64 / total;
                        Action {
                            label: mask,
                            reward: benefit - c * load,
                            reset: reset_with(norm, theta, eta, |r| mask & (1 << r) != 0),
                            load,
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            l,
            delta: norm.params().delta(),
            actions,
        }
    }

    #[inline]
    fn q(&self, theta: Reputation, a: &Action, v: &[f64]) -> f64 {
        let next = (theta + 1).min(self.l);
        a.reward + self.delta * (a.reset * v[0] + (1.0 - a.reset) * v[next])
    }

    /// One Bellman sweep from `v` into `out`; returns the sup-norm change.
    pub fn sweep(&self, v: &[f64], out: &mut [f64]) -> f64 {
        let mut residual: f64 = 0.0;
        for (theta, acts) in self.actions.iter().enumerate() {
            let best = acts
                .iter()
                .map(|a| self.q(theta, a, v))
                .fold(f64::NEG_INFINITY, f64::max);
            residual = residual.max(abs(best - v[theta]));
            out[theta] = best;
        }
        residual
    }

    /// Greedy policy with respect to `v`: actions within `tie_tol` of the
    /// best are co-optimal and ordered by load, lightest first.
    pub fn greedy(&self, v: &[f64], tie_tol: f64) -> (Vec<usize>, Vec<Vec<usize>>) {
        let mut policy = Vec::with_capacity(self.l + 1);
        let mut co = Vec::with_capacity(self.l + 1);
        for (theta, acts) in self.actions.iter().enumerate() {
            let qs: Vec<f64> = acts.iter().map(|a| self.q(theta, a, v)).collect();
            let best = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let scale = 1.0f64.max(abs(best));
            let mut tied: Vec<&Action> = acts
                .iter()
                .zip(&qs)
                .filter(|(_, &q)| q >= best - tie_tol * scale)
                .map(|(a, _)| a)
                .collect();
            tied.sort_by(|x, y| {
                x.load
                    .partial_cmp(&y.load)
                    .unwrap_or(core::cmp::Ordering::Equal)
                    .then(y.label.cmp(&x.label))
            });
            let labels: Vec<usize> = tied.iter().map(|a| a.label).collect();
            policy.push(labels[0]);
            co.push(labels);
        }
        (policy, co)
    }

    /// Exact value of a fixed stationary policy (labels must exist in the
    /// table), by iterating the policy's own Bellman operator.
    pub fn evaluate(&self, policy: &[usize], tolerance: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.l + 1];
        let mut next = v.clone();
        let chosen: Vec<Action> = policy
            .iter()
            .enumerate()
            .map(|(theta, label)| {
                *self.actions[theta]
                    .iter()
                    .find(|a| a.label == *label)
                    .expect("label present in table")
            })
            .collect();
        loop {
            let mut residual: f64 = 0.0;
            for theta in 0..=self.l {
                let q = self.q(theta, &chosen[theta], &v);
                residual = residual.max(abs(q - v[theta]));
                next[theta] = q;
            }
            core::mem::swap(&mut v, &mut next);
            if self.delta == 0.0 || residual < tolerance * (1.0 - self.delta) / self.delta {
                return v;
            }
        }
    }
}

/// Thresholds grouped by the set of occupied opponent reputations served.
#[derive(Clone, Debug)]
struct ThresholdClass {
    lo: usize,
    hi: usize,
    representative: usize,
    served: usize,
}

fn threshold_classes(norm: &SocialNorm, eta: &OpponentConfig) -> Vec<ThresholdClass> {
    let l = norm.l();
    let counts = eta.counts();
    let mut classes: Vec<ThresholdClass> = Vec::new();
    for a in 0..=l + 1 {
        let served: usize = counts[a.min(l + 1)..].iter().sum::<usize>()
            * usize::from(a <= l);
        match classes.last_mut() {
            Some(last) if last.served == served => last.hi = a,
            _ => classes.push(ThresholdClass {
                lo: a,
                hi: a,
                representative: a,
                served,
            }),
        }
    }
    classes
}

fn canonical_label(norm: &SocialNorm, theta: Reputation, class: &ThresholdClass) -> usize {
    let within = |x: usize| class.lo <= x && x <= class.hi;
    let l = norm.l();
    let prescribed = norm.prescribed(theta).threshold();
    if within(l + 1) {
        l + 1
    } else if within(prescribed) {
        prescribed
    } else if within(norm.h()) {
        norm.h()
    } else {
        class.hi
    }
}

/// Canonical representative of threshold `a` for a user of reputation
/// `theta` facing `eta`.
pub fn canonical_threshold(
    norm: &SocialNorm,
    theta: Reputation,
    eta: &OpponentConfig,
    a: usize,
) -> usize {
    threshold_classes(norm, eta)
        .iter()
        .find(|c| c.lo <= a && a <= c.hi)
        .map(|c| canonical_label(norm, theta, c))
        .unwrap_or(a)
}

/// Value-iteration settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Solver {
    /// Target sup-norm optimality gap in value units.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relative gap under which two actions count as tied.
    pub tie_tolerance: f64,
}

impl Default for Solver {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tie_tolerance: DEFAULT_TIE_TOLERANCE,
        }
    }
}

impl Solver {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    /// Iterates `table` to the fixed point and extracts the greedy policy.
    pub fn run(&self, table: &BellmanTable) -> Result<BestResponseSolution> {
        if !(self.tolerance > 0.0) {
            return Err(Error::param("tolerance", "must be positive"));
        }
        let delta = table.delta;
        let stop = if delta == 0.0 {
            f64::INFINITY
        } else {
            self.tolerance * (1.0 - delta) / delta
        };
        let mut v = vec![0.0; table.l + 1];
        let mut next = v.clone();
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        while iterations < self.max_iterations {
            residual = table.sweep(&v, &mut next);
            core::mem::swap(&mut v, &mut next);
            iterations += 1;
            if residual < stop {
                let (policy, co_optimal) = table.greedy(&v, self.tie_tolerance);
                return Ok(BestResponseSolution {
                    policy,
                    values: v,
                    co_optimal,
                    iterations,
                    residual,
                });
            }
        }
        Err(Error::NoConvergence {
            iterations,
            residual,
        })
    }

    pub fn solve<B: ServiceBelief + ?Sized>(
        &self,
        norm: &SocialNorm,
        eta: &OpponentConfig,
        belief: &B,
        space: ActionSpace,
    ) -> Result<BestResponseSolution> {
        if eta.counts().len() != norm.l() + 1 || eta.total() != norm.n() - 1 {
            // Re-validate through the public constructor for the error value.
            OpponentConfig::new(eta.counts().to_vec(), norm.n(), norm.l())?;
        }
        let table = match space {
            ActionSpace::Threshold => BellmanTable::thresholds(norm, eta, belief),
            ActionSpace::Subset => BellmanTable::subsets(norm, eta, belief),
        };
        self.run(&table)
    }
}

/// Best response against a fixed opponent census under the fixed belief.
pub fn solve_value_iteration(
    norm: &SocialNorm,
    eta: &OpponentConfig,
    space: ActionSpace,
    tolerance: f64,
) -> Result<BestResponseSolution> {
    Solver::with_tolerance(tolerance).solve(norm, eta, &FixedBelief::for_norm(norm), space)
}

/// Appendix-style closed form for a user whose opponents all sit at 0 or
/// `L`, in the error-free limit.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormSolution {
    /// Bad users at reputations `0..=k` refuse everyone; `-1` means no one
    /// defects.
    pub k: i64,
    /// Threshold used at reputations `>= h`: `h` (comply) or `L + 1`.
    pub good_action: usize,
    pub policy: Vec<usize>,
    pub values: Vec<f64>,
}

/// Closed-form optimal policy and values for a user at `own_rep` (0 or
/// `L`) in a community with `n0` users at 0 and `n_top` at `L`, taking
/// `ε → 0`.
///
/// Good reputations share one value: complying gives
/// `p(L)(b-c)/(1-δ)`, which is optimal while `p(0) <= (δb-c)/(δ(b-c))`;
/// otherwise refusing everyone gives `p(L) b / (1 - δ p(0))`. A bad user at
/// θ who climbs by serving everyone is worth
/// `δ^(h-θ) V(h) - (1-δ^(h-θ)) c / (1-δ)`; it defects (value 0) when that is
/// not positive.
pub fn closed_form_bimodal(
    norm: &SocialNorm,
    n0: usize,
    n_top: usize,
    own_rep: Reputation,
) -> Result<ClosedFormSolution> {
    let n = norm.n();
    let l = norm.l();
    let h = norm.h();
    if n0 + n_top != n {
        return Err(Error::CensusTotal {
            expected: n,
            got: n0 + n_top,
        });
    }
    if own_rep != 0 && own_rep != l {
        return Err(Error::NotBimodal);
    }
    let (m0, m_top) = if own_rep == 0 {
        (n0.checked_sub(1), Some(n_top))
    } else {
        (Some(n0), n_top.checked_sub(1))
    };
    let (m0, m_top) = match (m0, m_top) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::EmptyBucket { rep: own_rep }),
    };
    let p = norm.params();
    let (b, c, delta) = (p.b(), p.c(), p.delta());
    let total = (n - 1) as f64;
    let p0 = m0 as f64 / total;
    let p_top = m_top as f64 / total;

    let (good_action, good_value) = if delta == 0.0 {
        (l + 1, p_top * b)
    } else if p0 <= (delta * b - c) / (delta * (b - c)) {
        (h, p_top * (b - c) / (1.0 - delta))
    } else {
        (l + 1, p_top * b / (1.0 - delta * p0))
    };

    let climb = |theta: usize| {
        let steps = (h - theta) as i32;
        if delta == 0.0 {
            -c
        } else {
            powi(delta, steps) * good_value - (1.0 - powi(delta, steps)) / (1.0 - delta) * c
        }
    };
    let k = (0..h)
        .filter(|&theta| climb(theta) <= 0.0)
        .max()
        .map_or(-1, |x| x as i64);

    let mut policy = Vec::with_capacity(l + 1);
    let mut values = Vec::with_capacity(l + 1);
    for theta in 0..=l {
        if theta >= h {
            policy.push(good_action);
            values.push(good_value);
        } else if (theta as i64) <= k {
            policy.push(l + 1);
            values.push(0.0);
        } else {
            policy.push(0);
            values.push(climb(theta));
        }
    }
    Ok(ClosedFormSolution {
        k,
        good_action,
        policy,
        values,
    })
}

/// Outcome of checking that optimal actions are threshold sets.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdCheck {
    pub holds: bool,
    /// Largest `|V_subset - V_threshold|` over reputations.
    pub value_gap: f64,
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub reputation: Reputation,
    /// Served reputations of the best subset action, as a bit mask.
    pub mask: usize,
    pub value_gap: f64,
}

/// Served set (bit mask over occupied reputations) is upward closed among
/// the occupied reputations.
fn is_threshold_set(mask: usize, occupied: &[Reputation]) -> bool {
    let mut seen_served = false;
    for &r in occupied {
        let served = mask & (1 << r) != 0;
        if seen_served && !served {
            return false;
        }
        seen_served |= served;
    }
    true
}

/// Solves with every subset of client reputations as an action and checks
/// that some optimal action at each reputation is a threshold set and that
/// the unrestricted values match the threshold-restricted ones.
pub fn verify_threshold_structure(
    norm: &SocialNorm,
    eta: &OpponentConfig,
    tolerance: f64,
) -> Result<ThresholdCheck> {
    let solver = Solver::with_tolerance(tolerance * 1e-2);
    let belief = FixedBelief::for_norm(norm);
    let subset = solver.solve(norm, eta, &belief, ActionSpace::Subset)?;
    let threshold = solver.solve(norm, eta, &belief, ActionSpace::Threshold)?;
    let occupied: Vec<Reputation> = eta.occupied().collect();
    let mut value_gap: f64 = 0.0;
    let mut counterexample = None;
    for theta in 0..=norm.l() {
        let gap = abs(subset.values[theta] - threshold.values[theta]);
        value_gap = value_gap.max(gap);
        let has_threshold = subset.co_optimal[theta]
            .iter()
            .any(|&m| is_threshold_set(m, &occupied));
        if (gap >= tolerance || !has_threshold) && counterexample.is_none() {
            counterexample = Some(Counterexample {
                reputation: theta,
                mask: subset.policy[theta],
                value_gap: gap,
            });
        }
    }
    Ok(ThresholdCheck {
        holds: counterexample.is_none(),
        value_gap,
        counterexample,
    })
}

/// `h_θ`: the threshold the social rule prescribes at θ.
pub fn prescribed_threshold(norm: &SocialNorm, theta: Reputation) -> usize {
    norm.prescribed(theta).threshold()
}

/// Threshold strategy at `own_rep` from a solution.
pub fn action_at(solution: &BestResponseSolution, own_rep: Reputation) -> ThresholdStrategy {
    ThresholdStrategy(solution.policy[own_rep])
}
