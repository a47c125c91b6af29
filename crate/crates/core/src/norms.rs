//! Protocol objects: community parameters, threshold strategies, the social
//! rule and the reputation scheme.

use alloc::format;
use serde::{Deserialize, Serialize};

use crate::{Error, Reputation, Result};

/// Exogenous characteristics of the community.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommunityParams {
    n: usize,
    l: usize,
    b: f64,
    c: f64,
    delta: f64,
    epsilon: f64,
    gamma: f64,
}

impl CommunityParams {
    /// Validates and builds the parameter set.
    ///
    /// Requires `N >= 2`, `L >= 1`, `b > c > 0`, `delta` in `[0, 1)`,
    /// `epsilon` in `[0, 0.5)` and `gamma` in `(0, 1]`.
    pub fn new(
        n: usize,
        l: usize,
        b: f64,
        c: f64,
        delta: f64,
        epsilon: f64,
        gamma: f64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("N", format!("{n} < 2")));
        }
        if l < 1 {
            return Err(Error::param("L", "must be at least 1"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("c", format!("{c} is not a positive cost")));
        }
        if !(b > c && b.is_finite()) {
            return Err(Error::param("b", format!("need b > c, got b={b}, c={c}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::param("delta", format!("{delta} outside [0, 1)")));
        }
        if !(0.0..0.5).contains(&epsilon) {
            return Err(Error::param("epsilon", format!("{epsilon} outside [0, 0.5)")));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::param("gamma", format!("{gamma} outside (0, 1]")));
        }
        Ok(Self {
            n,
            l,
            b,
            c,
            delta,
            epsilon,
            gamma,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_n(self, n: usize) -> Result<Self> {
        Self::new(n, self.l, self.b, self.c, self.delta, self.epsilon, self.gamma)
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        Self::new(self.n, self.l, self.b, self.c, delta, self.epsilon, self.gamma)
    }

    pub fn with_benefit(self, b: f64) -> Result<Self> {
        Self::new(self.n, self.l, b, self.c, self.delta, self.epsilon, self.gamma)
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.n, self.l, self.b, self.c, self.delta, epsilon, self.gamma)
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(self.n, self.l, self.b, self.c, self.delta, self.epsilon, gamma)
    }
}

/// A threshold strategy serves exactly the clients whose reputation is at
/// least `threshold`. `0` serves everyone, `L + 1` serves no one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThresholdStrategy(pub usize);

impl ThresholdStrategy {
    pub const COOPERATE: Self = Self(0);

    pub fn defect(l: usize) -> Self {
        Self(l + 1)
    }

    pub fn threshold(self) -> usize {
        self.0
    }

    #[inline]
    pub fn serves(self, client_rep: Reputation) -> bool {
        client_rep >= self.0
    }
}

/// The protocol: community parameters plus the social threshold `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SocialNorm {
    params: CommunityParams,
    h: usize,
}

impl SocialNorm {
    /// Only `1 <= h <= L` gives differential service; `h = 0` and `h = L+1`
    /// are rejected.
    pub fn new(params: CommunityParams, h: usize) -> Result<Self> {
        if h < 1 || h > params.l {
            return Err(Error::param("h", format!("{h} outside 1..={}", params.l)));
        }
        Ok(Self { params, h })
    }

    pub fn params(&self) -> &CommunityParams {
        &self.params
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn l(&self) -> usize {
        self.params.l
    }

    /// Same rule, different community parameters.
    pub fn with_params(&self, params: CommunityParams) -> Result<Self> {
        Self::new(params, self.h)
    }

    pub(crate) fn check_rep(&self, rep: Reputation) -> Result<()> {
        if rep > self.params.l {
            return Err(Error::ReputationOutOfRange {
                rep,
                max: self.params.l,
            });
        }
        Ok(())
    }

    pub(crate) fn check_threshold(&self, s: ThresholdStrategy) -> Result<()> {
        if s.0 > self.params.l + 1 {
            return Err(Error::ThresholdOutOfRange {
                threshold: s.0,
                max: self.params.l + 1,
            });
        }
        Ok(())
    }

    /// Threshold the social rule prescribes to a server of reputation
    /// `server_rep`: bad users (below `h`) serve everyone, good users serve
    /// only good clients.
    #[inline]
    pub fn prescribed(&self, server_rep: Reputation) -> ThresholdStrategy {
        if server_rep < self.h {
            ThresholdStrategy(0)
        } else {
            ThresholdStrategy(self.h)
        }
    }

    #[inline]
    pub(crate) fn phi_unchecked(&self, server_rep: Reputation, client_rep: Reputation) -> bool {
        server_rep < self.h || client_rep >= self.h
    }

    #[inline]
    pub(crate) fn next_rep_unchecked(
        &self,
        server_rep: Reputation,
        client_rep: Reputation,
        reported: bool,
    ) -> Reputation {
        if reported == self.phi_unchecked(server_rep, client_rep) {
            (server_rep + 1).min(self.params.l)
        } else {
            0
        }
    }

    /// Contribution level `s` chooses for a client of reputation
    /// `client_rep`.
    pub fn strategy_serves(&self, s: ThresholdStrategy, client_rep: Reputation) -> Result<bool> {
        self.check_rep(client_rep)?;
        self.check_threshold(s)?;
        Ok(s.serves(client_rep))
    }

    /// The social rule: whether a server of `server_rep` is expected to
    /// serve a client of `client_rep`.
    pub fn social_rule(&self, server_rep: Reputation, client_rep: Reputation) -> Result<bool> {
        self.check_rep(server_rep)?;
        self.check_rep(client_rep)?;
        Ok(self.phi_unchecked(server_rep, client_rep))
    }

    /// Reputation scheme: a report agreeing with the social rule moves the
    /// server one step up (capped at `L`), any disagreement resets it to 0.
    pub fn reputation_update(
        &self,
        server_rep: Reputation,
        client_rep: Reputation,
        reported: bool,
    ) -> Result<Reputation> {
        self.check_rep(server_rep)?;
        self.check_rep(client_rep)?;
        Ok(self.next_rep_unchecked(server_rep, client_rep, reported))
    }
}

/// JSON configuration document for a norm: the seven community parameters
/// plus `h`. Unknown keys are rejected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub h: usize,
}

impl NormConfig {
    pub fn build(&self) -> Result<SocialNorm> {
        let params = CommunityParams::new(
            self.n,
            self.l,
            self.b,
            self.c,
            self.delta,
            self.epsilon,
            self.gamma,
        )?;
        SocialNorm::new(params, self.h)
    }
}

impl From<&SocialNorm> for NormConfig {
    fn from(norm: &SocialNorm) -> Self {
        let p = norm.params;
        Self {
            n: p.n,
            l: p.l,
            b: p.b,
            c: p.c,
            delta: p.delta,
            epsilon: p.epsilon,
            gamma: p.gamma,
            h: norm.h,
        }
    }
}
