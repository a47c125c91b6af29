//! One-period expected utilities and reset probabilities for a single user
//! facing a given opponent census.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::belief::{BeliefMatrix, FixedBelief, ServiceBelief};
use crate::{Error, Reputation, Result, SocialNorm, ThresholdStrategy};

/// Census of the whole community: `counts[θ]` users hold reputation θ.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    counts: Vec<usize>,
}

impl Configuration {
    /// Checks the census has `L + 1` buckets summing to `N`.
    pub fn new(counts: Vec<usize>, n: usize, l: usize) -> Result<Self> {
        check_census(&counts, n, l)?;
        Ok(Self { counts })
    }

    pub(crate) fn from_counts_unchecked(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    /// All `n` users at reputation `rep`.
    pub fn concentrated(n: usize, l: usize, rep: Reputation) -> Self {
        let mut counts = vec![0; l + 1];
        counts[rep] = n;
        Self { counts }
    }

    /// `n - top` users at 0 and `top` users at `L`.
    pub fn bimodal(n: usize, l: usize, top: usize) -> Self {
        let mut counts = vec![0; l + 1];
        counts[0] = n - top;
        counts[l] += top;
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn l(&self) -> usize {
        self.counts.len() - 1
    }

    /// Only reputations 0 and `L` are occupied.
    pub fn is_bimodal(&self) -> bool {
        let l = self.l();
        self.counts[1..l].iter().all(|&x| x == 0)
    }

    /// Users strictly between 0 and `L`.
    pub fn interior(&self) -> usize {
        let l = self.l();
        self.counts[1..l].iter().sum()
    }
}

/// Census seen by one user: everyone except itself.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpponentConfig {
    counts: Vec<usize>,
}

impl OpponentConfig {
    /// Checks the census has `L + 1` buckets summing to `N - 1`.
    pub fn new(counts: Vec<usize>, n: usize, l: usize) -> Result<Self> {
        check_census(&counts, n - 1, l)?;
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Reputations held by at least one opponent.
    pub fn occupied(&self) -> impl Iterator<Item = Reputation> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(r, _)| r)
    }
}

fn check_census(counts: &[usize], total: usize, l: usize) -> Result<()> {
    if counts.len() != l + 1 {
        return Err(Error::CensusShape {
            expected: l + 1,
            got: counts.len(),
        });
    }
    let got: usize = counts.iter().sum();
    if got != total {
        return Err(Error::CensusTotal {
            expected: total,
            got,
        });
    }
    Ok(())
}

/// Removes one user of `own_rep` from the census.
pub fn opponent_of(mu: &Configuration, own_rep: Reputation) -> Result<OpponentConfig> {
    let l = mu.l();
    if own_rep > l {
        return Err(Error::ReputationOutOfRange { rep: own_rep, max: l });
    }
    if mu.counts[own_rep] == 0 {
        return Err(Error::EmptyBucket { rep: own_rep });
    }
    let mut counts = mu.counts.clone();
    counts[own_rep] -= 1;
    Ok(OpponentConfig { counts })
}

fn check_eta(norm: &SocialNorm, eta: &OpponentConfig) -> Result<()> {
    check_census(&eta.counts, norm.n() - 1, norm.l())
}

/// Expected benefit received by a client of `own_rep` under `belief`,
/// before multiplying by `b`.
#[inline]
pub(crate) fn service_rate<B: ServiceBelief + ?Sized>(
    norm: &SocialNorm,
    belief: &B,
    own_rep: Reputation,
    eta: &OpponentConfig,
) -> f64 {
    let total = (norm.n() - 1) as f64;
    eta.counts
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(server, &m)| m as f64 * belief.serve_prob(norm, server, own_rep))
        .sum::<f64>()
        / total
}

/// Fraction of opponents that `sigma` would serve.
#[inline]
pub(crate) fn serve_rate(norm: &SocialNorm, sigma: ThresholdStrategy, eta: &OpponentConfig) -> f64 {
    let total = (norm.n() - 1) as f64;
    let served: usize = eta
        .counts
        .iter()
        .enumerate()
        .filter(|(rep, _)| sigma.serves(*rep))
        .map(|(_, &m)| m)
        .sum();
    served as f64 / total
}

pub(crate) fn utility_with<B: ServiceBelief + ?Sized>(
    norm: &SocialNorm,
    belief: &B,
    sigma: ThresholdStrategy,
    own_rep: Reputation,
    eta: &OpponentConfig,
) -> f64 {
    let p = norm.params();
    p.b() * service_rate(norm, belief, own_rep, eta) - p.c() * serve_rate(norm, sigma, eta)
}

/// Reset probability for an arbitrary service set, given as a predicate on
/// client reputation.
pub(crate) fn reset_with(
    norm: &SocialNorm,
    own_rep: Reputation,
    eta: &OpponentConfig,
    serves: impl Fn(Reputation) -> bool,
) -> f64 {
    let eps = norm.params().epsilon();
    let total = (norm.n() - 1) as f64;
    eta.counts
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(client, &m)| {
            let mismatch = serves(client) != norm.phi_unchecked(own_rep, client);
            let p = if mismatch { 1.0 - eps } else { eps };
            m as f64 * p
        })
        .sum::<f64>()
        / total
}

/// Expected one-period utility of a user at `own_rep` playing `sigma`
/// under the fixed belief: benefit from the matched server minus the cost
/// of serving the matched client.
pub fn expected_one_period_utility(
    norm: &SocialNorm,
    sigma: ThresholdStrategy,
    own_rep: Reputation,
    eta: &OpponentConfig,
) -> Result<f64> {
    norm.check_rep(own_rep)?;
    norm.check_threshold(sigma)?;
    check_eta(norm, eta)?;
    Ok(utility_with(
        norm,
        &FixedBelief::for_norm(norm),
        sigma,
        own_rep,
        eta,
    ))
}

/// Same as [`expected_one_period_utility`] with the benefit side taken from
/// an adaptive belief matrix.
pub fn expected_utility_under_belief(
    norm: &SocialNorm,
    sigma: ThresholdStrategy,
    own_rep: Reputation,
    eta: &OpponentConfig,
    beliefs: &BeliefMatrix,
) -> Result<f64> {
    norm.check_rep(own_rep)?;
    norm.check_threshold(sigma)?;
    check_eta(norm, eta)?;
    check_beliefs(norm, beliefs)?;
    Ok(utility_with(norm, beliefs, sigma, own_rep, eta))
}

/// Probability that the user is reset to reputation 0 this period; with the
/// complementary probability it moves to `min(L, own_rep + 1)`.
pub fn prob_reset(
    norm: &SocialNorm,
    own_rep: Reputation,
    eta: &OpponentConfig,
    action: ThresholdStrategy,
) -> Result<f64> {
    norm.check_rep(own_rep)?;
    norm.check_threshold(action)?;
    check_eta(norm, eta)?;
    Ok(reset_with(norm, own_rep, eta, |r| action.serves(r)))
}

/// Reset probability for a user holding adaptive beliefs. Beliefs only
/// change the benefit side, so this equals [`prob_reset`] once the matrix
/// has been validated.
pub fn prob_reset_under_belief(
    norm: &SocialNorm,
    own_rep: Reputation,
    eta: &OpponentConfig,
    action: ThresholdStrategy,
    beliefs: &BeliefMatrix,
) -> Result<f64> {
    check_beliefs(norm, beliefs)?;
    prob_reset(norm, own_rep, eta, action)
}

fn check_beliefs(norm: &SocialNorm, beliefs: &BeliefMatrix) -> Result<()> {
    if beliefs.l() != norm.l() {
        return Err(Error::CensusShape {
            expected: norm.l() + 1,
            got: beliefs.l() + 1,
        });
    }
    beliefs.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CommunityParams;
    use proptest::prelude::*;

    fn norm(n: usize, h: usize, eps: f64) -> SocialNorm {
        let p = CommunityParams::new(n, 3, 3.0, 1.0, 0.6, eps, 1.0).unwrap();
        SocialNorm::new(p, h).unwrap()
    }

    fn eta(counts: &[usize]) -> OpponentConfig {
        let n: usize = counts.iter().sum::<usize>() + 1;
        OpponentConfig::new(counts.to_vec(), n, counts.len() - 1).unwrap()
    }

    #[test]
    fn opponent_examples() {
        let mu = Configuration::new(vec![2, 0, 0, 3], 5, 3).unwrap();
        assert_eq!(opponent_of(&mu, 3).unwrap().counts(), &[2, 0, 0, 2]);
        let mu = Configuration::new(vec![1, 0, 0, 1], 2, 3).unwrap();
        assert_eq!(opponent_of(&mu, 0).unwrap().counts(), &[0, 0, 0, 1]);
        let mu = Configuration::new(vec![0, 0, 0, 2], 2, 3).unwrap();
        assert_eq!(opponent_of(&mu, 0), Err(Error::EmptyBucket { rep: 0 }));
    }

    #[test]
    fn census_validation() {
        assert!(Configuration::new(vec![1, 2], 3, 3).is_err());
        assert!(Configuration::new(vec![1, 0, 0, 1], 3, 3).is_err());
    }

    #[test]
    fn utility_examples() {
        let n = norm(5, 1, 0.0);
        let all_bottom = eta(&[4, 0, 0, 0]);
        let u = expected_one_period_utility(&n, ThresholdStrategy(4), 2, &all_bottom).unwrap();
        assert_eq!(u, 0.0);

        let top = eta(&[0, 0, 0, 4]);
        let u = expected_one_period_utility(&n, ThresholdStrategy(1), 3, &top).unwrap();
        assert!((u - 2.0).abs() < 1e-15);
        let u = expected_one_period_utility(&n, ThresholdStrategy(1), 0, &top).unwrap();
        assert!((u + 1.0).abs() < 1e-15);
    }

    #[test]
    fn reset_examples() {
        let n = norm(5, 1, 0.1);
        let e = eta(&[2, 0, 0, 2]);
        let p = prob_reset(&n, 2, &e, ThresholdStrategy(4)).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let n0 = norm(5, 1, 0.0);
        let top = eta(&[0, 1, 1, 2]);
        assert_eq!(prob_reset(&n0, 3, &top, ThresholdStrategy(4)).unwrap(), 1.0);
    }

    #[test]
    fn belief_examples() {
        let n = norm(5, 1, 0.0);
        let e = eta(&[1, 1, 0, 2]);
        let fixed = BeliefMatrix::compliant(&n);
        let sigma = ThresholdStrategy(1);
        // Compliant initial beliefs differ from the fixed model only for
        // rep-0 servers, which are believed to serve under the matrix.
        let e_no_zero = eta(&[0, 2, 0, 2]);
        for own in 0..=3 {
            let a = expected_one_period_utility(&n, sigma, own, &e_no_zero).unwrap();
            let b = expected_utility_under_belief(&n, sigma, own, &e_no_zero, &fixed).unwrap();
            assert!((a - b).abs() < 1e-15);
        }

        let uniform = BeliefMatrix::from_rows(vec![vec![0.2; 5]; 4]).unwrap();
        assert!((uniform.serve_prob(&n, 2, 3) - 0.8).abs() < 1e-15);
        let u = expected_utility_under_belief(&n, ThresholdStrategy(4), 3, &e, &uniform).unwrap();
        assert!((u - 3.0 * 0.8).abs() < 1e-12);

        let defectors = BeliefMatrix::from_rows(vec![vec![0.0, 0.0, 0.0, 0.0, 1.0]; 4]).unwrap();
        let u = expected_utility_under_belief(&n, ThresholdStrategy(4), 3, &e, &defectors).unwrap();
        assert_eq!(u, 0.0);

        let p = prob_reset_under_belief(&n, 3, &e, sigma, &uniform).unwrap();
        assert_eq!(p, prob_reset(&n, 3, &e, sigma).unwrap());
    }

    #[test]
    fn full_cooperation_welfare() {
        let n = norm(8, 2, 0.0);
        let e = eta(&[0, 0, 3, 4]);
        for own in 2..=3 {
            let u = expected_one_period_utility(&n, n.prescribed(own), own, &e).unwrap();
            assert!((u - 2.0).abs() < 1e-15);
        }
    }

    fn arb_eta(n: usize) -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(0usize..=n, 4).prop_filter_map("sum", move |mut v| {
            let s: usize = v.iter().sum();
            if s == 0 {
                return None;
            }
            let scale = (n - 1) as f64 / s as f64;
            for x in v.iter_mut() {
                *x = (*x as f64 * scale).floor() as usize;
            }
            let rest = (n - 1) - v.iter().sum::<usize>();
            v[3] += rest;
            Some(v)
        })
    }

    proptest! {
        #[test]
        fn compliant_reset_is_epsilon(counts in arb_eta(9), own in 0usize..4, h in 1usize..4, eps in 0.0f64..0.49) {
            let n = norm(9, h, eps);
            let e = OpponentConfig::new(counts, 9, 3).unwrap();
            let p = prob_reset(&n, own, &e, n.prescribed(own)).unwrap();
            prop_assert!((p - eps).abs() < 1e-12);
        }

        #[test]
        fn reset_in_unit_interval_and_symmetric(counts in arb_eta(9), own in 0usize..4, a in 0usize..5, h in 1usize..4, eps in 0.0f64..0.49) {
            let e = OpponentConfig::new(counts, 9, 3).unwrap();
            let p = prob_reset(&norm(9, h, eps), own, &e, ThresholdStrategy(a)).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            // Swapping ε and 1-ε swaps match and mismatch weights.
            let p0 = prob_reset(&norm(9, h, 0.0), own, &e, ThresholdStrategy(a)).unwrap();
            prop_assert!((p - ((1.0 - eps) * p0 + eps * (1.0 - p0))).abs() < 1e-12);
            let flipped = eps * p0 + (1.0 - eps) * (1.0 - p0);
            prop_assert!((p + flipped - 1.0).abs() < 1e-12);
        }

        #[test]
        fn utility_is_affine_in_counts(counts in arb_eta(9), own in 0usize..4, a in 0usize..5) {
            let n = norm(9, 2, 0.05);
            let e = OpponentConfig::new(counts.clone(), 9, 3).unwrap();
            let sigma = ThresholdStrategy(a);
            let base = expected_one_period_utility(&n, sigma, own, &e).unwrap();
            let f = FixedBelief::for_norm(&n);
            let per = |r: usize| (3.0 * f.serve_prob(&n, r, own) - if sigma.serves(r) { 1.0 } else { 0.0 }) / 8.0;
            let direct: f64 = counts.iter().enumerate().map(|(r, &m)| m as f64 * per(r)).sum();
            prop_assert!((base - direct).abs() < 1e-12);
        }
    }
}
