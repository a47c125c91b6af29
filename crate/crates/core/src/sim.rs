//! Agent-level Monte Carlo engine.
//!
//! Each period, users first adapt (with probability γ each) to the posted
//! configuration, then a random fixed-point-free matching pairs every
//! client with one server, servers act on the client's reputation, reports
//! are flipped with probability ε, and all reputations update at once.
//!
//! Randomness for period `t` comes from a ChaCha8 stream selected by `t`
//! under the community seed, so a run is reproducible from its seed alone.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::belief::{BeliefMatrix, FixedBelief};
use crate::bestresponse::{ActionSpace, Solver};
use crate::{
    opponent_of, Configuration, Error, Reputation, Result, SocialNorm, ThresholdStrategy,
};

/// Floor above the service cost applied to drawn benefits.
pub const BENEFIT_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct UserState {
    pub reputation: Reputation,
    pub strategy: ThresholdStrategy,
    pub delta: f64,
    /// Benefit this user derives from being served.
    pub benefit: f64,
    pub beliefs: Option<BeliefMatrix>,
    pub group: usize,
}

/// How reputations are seeded at period 0.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// Users spread as evenly as possible over `0..=L`.
    #[default]
    Uniform,
    AllTop,
    AllBottom,
    /// Explicit census `n(0..=L)`.
    Counts(Vec<usize>),
}

impl InitialState {
    pub fn census(&self, n: usize, l: usize) -> Result<Vec<usize>> {
        let counts = match self {
            InitialState::Uniform => (0..=l)
                .map(|theta| n / (l + 1) + usize::from(theta < n % (l + 1)))
                .collect(),
            InitialState::AllTop => Configuration::concentrated(n, l, l).counts().to_vec(),
            InitialState::AllBottom => Configuration::concentrated(n, l, 0).counts().to_vec(),
            InitialState::Counts(c) => Configuration::new(c.clone(), n, l)?.counts().to_vec(),
        };
        Ok(counts)
    }
}

/// A block of users sharing a discount factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub size: usize,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeliefMode {
    #[default]
    Fixed,
    Adaptive,
}

/// Normal benefit redrawn for every user every period.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenefitNoise {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodMetrics {
    pub period: u64,
    /// Census after the period's reputation update.
    pub counts: Vec<usize>,
    /// Realized average one-period utility.
    pub social_welfare: f64,
    pub services_rendered: usize,
    pub resets: usize,
    /// Per group: users at reputation 0.
    pub group_bottom: Vec<usize>,
    /// Per group: users whose strategy refuses everyone.
    pub group_defectors: Vec<usize>,
    /// Mean of `n(L)/N` over the periods since the previous sample.
    pub window_top_fraction: f64,
}

type CacheKey = (Reputation, u64, u64);

#[derive(Debug, Clone)]
pub struct Community {
    norm: SocialNorm,
    users: Vec<UserState>,
    groups: usize,
    gamma: f64,
    seed: u64,
    period: u64,
    noise: Option<Normal<f64>>,
    solver: Solver,
    cache: BTreeMap<CacheKey, usize>,
    server_of: Vec<usize>,
}

impl Community {
    /// Homogeneous community: every user has the norm's δ and b and starts
    /// out complying with the social rule.
    pub fn new(norm: SocialNorm, init: &InitialState, seed: u64) -> Result<Self> {
        let g = Group {
            size: norm.n(),
            delta: norm.params().delta(),
        };
        Self::with_groups(norm, &[g], init, seed)
    }

    /// Users are laid out group by group; the initial census is dealt out
    /// in user order.
    pub fn with_groups(
        norm: SocialNorm,
        groups: &[Group],
        init: &InitialState,
        seed: u64,
    ) -> Result<Self> {
        let n: usize = groups.iter().map(|g| g.size).sum();
        if n != norm.n() {
            return Err(Error::CensusTotal {
                expected: norm.n(),
                got: n,
            });
        }
        for g in groups {
            norm.params().with_delta(g.delta)?;
        }
        let l = norm.l();
        let census = init.census(n, l)?;
        let mut reps: Vec<Reputation> = census
            .iter()
            .enumerate()
            .flat_map(|(theta, &k)| core::iter::repeat(theta).take(k))
            .collect();
        // Interleave so that every group sees the same initial mix.
        reps.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15));
        let mut users = Vec::with_capacity(n);
        for (gi, g) in groups.iter().enumerate() {
            for _ in 0..g.size {
                let reputation = reps[users.len()];
                users.push(UserState {
                    reputation,
                    strategy: norm.prescribed(reputation),
                    delta: g.delta,
                    benefit: norm.params().b(),
                    beliefs: None,
                    group: gi,
                });
            }
        }
        Ok(Self {
            gamma: norm.params().gamma(),
            norm,
            users,
            groups: groups.len(),
            seed,
            period: 0,
            noise: None,
            solver: Solver::default(),
            cache: BTreeMap::new(),
            server_of: vec![0; n],
        })
    }

    /// Gives every user a compliant belief matrix updated from experience.
    pub fn with_beliefs(mut self, mode: BeliefMode) -> Self {
        let prior = match mode {
            BeliefMode::Fixed => None,
            BeliefMode::Adaptive => Some(BeliefMatrix::compliant(&self.norm)),
        };
        for u in &mut self.users {
            u.beliefs = prior.clone();
        }
        self
    }

    /// Redraws each user's benefit every period from `Normal(mean, var)`,
    /// floored at `c + 1e-6`.
    pub fn with_benefit_noise(mut self, noise: BenefitNoise) -> Result<Self> {
        if !(noise.variance >= 0.0) || !noise.mean.is_finite() {
            return Err(Error::param("benefit_variance", "must be non-negative"));
        }
        let normal = Normal::new(noise.mean, crate::math::sqrt(noise.variance))
            .map_err(|_| Error::param("benefit_variance", "invalid normal distribution"))?;
        self.noise = Some(normal);
        Ok(self)
    }

    /// Overrides the adaptation rate; 0 freezes strategies.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::param("gamma", "outside [0, 1]"));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_solver(mut self, solver: Solver) -> Self {
        self.solver = solver;
        self
    }

    pub fn norm(&self) -> &SocialNorm {
        &self.norm
    }

    pub fn users(&self) -> &[UserState] {
        &self.users
    }

    pub fn users_mut(&mut self) -> &mut [UserState] {
        &mut self.users
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn configuration(&self) -> Configuration {
        let mut counts = vec![0; self.norm.l() + 1];
        for u in &self.users {
            counts[u.reputation] += 1;
        }
        Configuration::from_counts_unchecked(counts)
    }

    fn period_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.period);
        rng
    }

    /// Best-response threshold for user `i` at its current reputation.
    fn best_response(&mut self, i: usize, mu: &Configuration) -> Result<usize> {
        let u = &self.users[i];
        let theta = u.reputation;
        let key = (theta, u.delta.to_bits(), u.benefit.to_bits());
        if u.beliefs.is_none() {
            if let Some(&a) = self.cache.get(&key) {
                return Ok(a);
            }
        }
        let params = self
            .norm
            .params()
            .with_delta(u.delta)?
            .with_benefit(u.benefit)?;
        let norm = self.norm.with_params(params)?;
        let eta = opponent_of(mu, theta)?;
        let sol = match &u.beliefs {
            Some(o) => self.solver.solve(&norm, &eta, o, ActionSpace::Threshold)?,
            None => {
                let f = FixedBelief::for_norm(&norm);
                self.solver.solve(&norm, &eta, &f, ActionSpace::Threshold)?
            }
        };
        let a = sol.policy[theta];
        if u.beliefs.is_none() {
            self.cache.insert(key, a);
        }
        Ok(a)
    }

    /// Each user independently switches to its best response against `mu`
    /// with probability γ.
    pub fn run_adaptation<R: Rng + ?Sized>(&mut self, mu: &Configuration, rng: &mut R) -> Result<()> {
        self.cache.clear();
        for i in 0..self.users.len() {
            if rng.random::<f64>() < self.gamma {
                let a = self.best_response(i, mu)?;
                self.users[i].strategy = ThresholdStrategy(a);
            }
        }
        Ok(())
    }

    /// Uniform random matching without self-service: `server_of[k]` serves
    /// client `k`.
    fn draw_matching<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.users.len();
        for (k, s) in self.server_of.iter_mut().enumerate() {
            *s = k;
        }
        self.server_of.shuffle(rng);
        for k in 0..n {
            if self.server_of[k] == k {
                let mut j = rng.random_range(0..n - 1);
                if j >= k {
                    j += 1;
                }
                self.server_of.swap(k, j);
            }
        }
    }

    /// Plays one period: benefit redraw, adaptation, matching, service,
    /// noisy reports and reputation updates.
    pub fn step(&mut self) -> Result<PeriodMetrics> {
        let mut rng = self.period_rng();
        let l = self.norm.l();
        let c = self.norm.params().c();
        let eps = self.norm.params().epsilon();
        if let Some(normal) = self.noise {
            for u in &mut self.users {
                u.benefit = normal.sample(&mut rng).max(c + BENEFIT_MARGIN);
            }
        }
        let mu = self.configuration();
        self.run_adaptation(&mu, &mut rng)?;
        self.draw_matching(&mut rng);

        let n = self.users.len();
        let old: Vec<Reputation> = self.users.iter().map(|u| u.reputation).collect();
        let mut services = 0;
        let mut resets = 0;
        let mut welfare = 0.0;
        for client in 0..n {
            let server = self.server_of[client];
            let (s_rep, c_rep) = (old[server], old[client]);
            let z = self.users[server].strategy.serves(c_rep);
            let flip = eps > 0.0 && rng.random::<f64>() < eps;
            let report = z ^ flip;
            let next = self.norm.next_rep_unchecked(s_rep, c_rep, report);
            self.users[server].reputation = next;
            if report != self.norm.phi_unchecked(s_rep, c_rep) {
                resets += 1;
            }
            if z {
                services += 1;
                welfare += self.users[client].benefit - c;
            }
            if let Some(o) = self.users[client].beliefs.as_mut() {
                o.observe(s_rep, c_rep, z);
            }
        }
        self.period += 1;
        let mut counts = vec![0; l + 1];
        let mut group_bottom = vec![0; self.groups];
        let mut group_defectors = vec![0; self.groups];
        for u in &self.users {
            counts[u.reputation] += 1;
            if u.reputation == 0 {
                group_bottom[u.group] += 1;
            }
            if u.strategy.threshold() > l {
                group_defectors[u.group] += 1;
            }
        }
        let window_top_fraction = counts[l] as f64 / n as f64;
        Ok(PeriodMetrics {
            period: self.period,
            window_top_fraction,
            counts,
            social_welfare: welfare / n as f64,
            services_rendered: services,
            resets,
            group_bottom,
            group_defectors,
        })
    }

    /// Runs `periods` periods and keeps every `stride`-th period's metrics
    /// (always including the last).
    pub fn run(&mut self, periods: u64, stride: u64) -> Result<Vec<PeriodMetrics>> {
        if stride == 0 {
            return Err(Error::param("sample_stride", "must be positive"));
        }
        let mut out = Vec::new();
        let mut acc = 0.0;
        let mut since = 0u64;
        for t in 1..=periods {
            let mut m = self.step()?;
            acc += m.window_top_fraction;
            since += 1;
            if t % stride == 0 || t == periods {
                m.window_top_fraction = acc / since as f64;
                acc = 0.0;
                since = 0;
                out.push(m);
            }
        }
        Ok(out)
    }

    /// Like [`Community::run`] but accumulates the occupancy of every
    /// visited census instead of sampling.
    pub fn occupancy(&mut self, periods: u64) -> Result<BTreeMap<Vec<usize>, u64>> {
        let mut visits = BTreeMap::new();
        for _ in 0..periods {
            let m = self.step()?;
            *visits.entry(m.counts).or_insert(0) += 1;
        }
        Ok(visits)
    }
}

/// Fraction of users at reputation `L` in a sample.
pub fn top_fraction(m: &PeriodMetrics) -> f64 {
    let n: usize = m.counts.iter().sum();
    *m.counts.last().unwrap_or(&0) as f64 / n as f64
}

/// Fraction of users at interior reputations.
pub fn interior_fraction(m: &PeriodMetrics) -> f64 {
    let n: usize = m.counts.iter().sum();
    let l = m.counts.len() - 1;
    m.counts[1..l].iter().sum::<usize>() as f64 / n as f64
}

/// Number of trailing samples forming the "terminal" window.
pub fn tail_len(samples: usize, fraction: f64) -> usize {
    ((samples as f64 * fraction) as usize).clamp(1, samples.max(1))
}

/// Mean of `f` over the last `fraction` of the samples.
pub fn tail_mean(samples: &[PeriodMetrics], fraction: f64, f: impl Fn(&PeriodMetrics) -> f64) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    let k = tail_len(samples.len(), fraction);
    samples[samples.len() - k..].iter().map(f).sum::<f64>() / k as f64
}

/// First sampled period after which the window-averaged `n(L)/N` stays
/// within `band` of its terminal mean (the mean over the last `tail`
/// fraction of samples).
pub fn convergence_period(samples: &[PeriodMetrics], tail: f64, band: f64) -> Option<u64> {
    let target = tail_mean(samples, tail, |m| m.window_top_fraction);
    let mut first = None;
    for m in samples.iter().rev() {
        if (m.window_top_fraction - target).abs() > band {
            break;
        }
        first = Some(m.period);
    }
    first
}
