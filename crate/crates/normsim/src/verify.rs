//! Cross-module oracle suites behind `normsim verify`.
//!
//! Every suite pits two independent computations against each other and
//! counts disagreements:
//!
//! * closed-form bimodal policies and values against value iteration;
//! * the analytic absorbing set against the error-free chain;
//! * threshold structure, minimal service and monotonicity of best
//!   responses on random opponent censuses;
//! * the design inequality against the basin-of-attraction comparison;
//! * agent-level occupancy against the exact stationary distribution
//!   (chi-square).

use std::collections::BTreeMap;
use std::fmt;

use normsim_core::bestresponse::{canonical_threshold, prescribed_threshold};
use normsim_core::chain::{self, ConfigSpace};
use normsim_core::design::{absorbing_bounds, feasibility_test, g, Boundary};
use normsim_core::sim::{Community, InitialState};
use normsim_core::{
    closed_form_bimodal, opponent_of, solve_value_iteration, verify_threshold_structure,
    ActionSpace, CommunityParams, Configuration, OpponentConfig, SocialNorm, TieRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{parallel, Result};

/// Largest closed-form vs value-iteration discrepancy tolerated.
pub const VALUE_TOLERANCE: f64 = 1e-7;
/// Minimum expected count per chi-square bin; sparser bins are pooled.
pub const MIN_EXPECTED: f64 = 5.0;
/// Chi-square test level.
pub const CHI_SQUARE_ALPHA: f64 = 0.01;

const MAX_DETAILS: usize = 5;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Cases not judged (indifference boundaries).
    pub skipped: usize,
    /// First few failures.
    pub details: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.details.len() < MAX_DETAILS {
                self.details.push(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {}/{} failed",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.failures,
            self.cases
        )?;
        if self.skipped > 0 {
            write!(f, " ({} skipped)", self.skipped)?;
        }
        for d in &self.details {
            write!(f, "\n    {d}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub quick: bool,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

fn norm(n: usize, l: usize, b: f64, delta: f64, eps: f64, h: usize) -> Result<SocialNorm> {
    let p = CommunityParams::new(n, l, b, 1.0, delta, eps, 1.0)?;
    Ok(SocialNorm::new(p, h)?)
}

/// Value iteration against the closed form on every bimodal census with
/// `ε = 0`, `L = 3`.
pub fn closed_form_suite(ns: &[usize], deltas: &[f64], benefits: &[f64]) -> Result<SuiteResult> {
    let mut jobs = Vec::new();
    for &n in ns {
        for h in 1..=3 {
            for &d in deltas {
                for &b in benefits {
                    jobs.push((n, h, d, b));
                }
            }
        }
    }
    let parts = parallel::map(&jobs, |&(n, h, d, b)| {
        let mut s = SuiteResult::new("closed form vs value iteration");
        let nm = norm(n, 3, b, d, 0.0, h)?;
        for top in 0..=n {
            let mu = Configuration::bimodal(n, 3, top);
            for own in [0, 3] {
                if mu.counts()[own] == 0 {
                    continue;
                }
                let eta = opponent_of(&mu, own)?;
                let vi = solve_value_iteration(&nm, &eta, ActionSpace::Threshold, 1e-10)?;
                let cf = closed_form_bimodal(&nm, n - top, top, own)?;
                for t in 0..=3 {
                    let err = (vi.values[t] - cf.values[t]).abs();
                    let tied = vi.co_optimal[t].len() > 1;
                    let label = canonical_threshold(&nm, t, &eta, cf.policy[t]);
                    if tied {
                        s.skipped += 1;
                    }
                    s.record(err <= VALUE_TOLERANCE && (tied || label == vi.policy[t]), || {
                        format!(
                            "N={n} h={h} δ={d} b={b} n(L)={top} own={own} θ={t}: \
                             VI π={} V={:.9} vs closed form π={} V={:.9}",
                            vi.policy[t], vi.values[t], label, cf.values[t]
                        )
                    });
                }
            }
        }
        Ok(s)
    })?;
    Ok(merge("closed form vs value iteration", parts))
}

fn merge(name: &str, parts: Vec<SuiteResult>) -> SuiteResult {
    let mut out = SuiteResult::new(name);
    for p in parts {
        out.cases += p.cases;
        out.failures += p.failures;
        out.skipped += p.skipped;
        for d in p.details {
            if out.details.len() < MAX_DETAILS {
                out.details.push(d);
            }
        }
    }
    out
}

/// Analytic absorbing set against `p(μ|μ) = 1` in the error-free chain,
/// under both tie rules.
pub fn absorbing_suite(ns: &[usize], deltas: &[f64], benefits: &[f64]) -> Result<SuiteResult> {
    let mut jobs = Vec::new();
    for &n in ns {
        for &d in deltas {
            for &b in benefits {
                for h in 1..=3 {
                    for tie in [TieRule::LargerThreshold, TieRule::FairCoin] {
                        jobs.push((n, d, b, h, tie));
                    }
                }
            }
        }
    }
    let parts = parallel::map(&jobs, |&(n, d, b, h, tie)| {
        let mut s = SuiteResult::new("");
        let nm = norm(n, 3, b, d, 0.0, h)?;
        let space = ConfigSpace::enumerate(n, 3)?;
        let rep = chain::classify_absorbing(&nm, &space, tie)?;
        s.record(rep.agrees(), || {
            let show = |ix: &[usize]| -> Vec<Vec<usize>> {
                ix.iter().map(|&i| space.counts(i).to_vec()).collect()
            };
            format!(
                "N={n} δ={d} b={b} h={h} {tie:?}: analytic {:?} numeric {:?}",
                show(&rep.analytic),
                show(&rep.numeric)
            )
        });
        Ok(s)
    })?;
    Ok(merge("analytic vs numeric absorbing sets", parts))
}

/// Random opponent census over `n - 1` users.
fn random_eta<R: Rng>(rng: &mut R, n: usize, l: usize) -> Result<OpponentConfig> {
    let mut counts = vec![0; l + 1];
    let spread = rng.random_bool(0.5);
    for _ in 0..n - 1 {
        let r = if spread {
            rng.random_range(0..=l)
        } else if rng.random_bool(0.5) {
            0
        } else {
            l
        };
        counts[r] += 1;
    }
    Ok(OpponentConfig::new(counts, n, l)?)
}

/// Best-response structure on `draws` random (η, parameter) pairs:
/// threshold optimality over all subsets, `π* >= h_θ`, group-wise
/// monotone thresholds and nondecreasing values.
pub fn lemma_suite(draws: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(draws);
    for _ in 0..draws {
        let n = rng.random_range(3..=12);
        let h = rng.random_range(1..=3);
        let delta = rng.random_range(0.05..0.95);
        let b = rng.random_range(1.1..6.0);
        let eps = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..0.3) };
        let nm = norm(n, 3, b, delta, eps, h)?;
        let eta = random_eta(&mut rng, n, 3)?;
        cases.push((nm, eta));
    }
    let parts = parallel::map(&cases, |(nm, eta)| {
        let mut s = SuiteResult::new("");
        let label = || {
            let p = nm.params();
            format!(
                "N={} h={} δ={:.4} b={:.4} ε={:.4} η={:?}",
                p.n(),
                nm.h(),
                p.delta(),
                p.b(),
                p.epsilon(),
                eta.counts()
            )
        };
        let check = verify_threshold_structure(nm, eta, 1e-7)?;
        s.record(check.holds, || format!("threshold structure: {} {:?}", label(), check.counterexample));
        let sol = solve_value_iteration(nm, eta, ActionSpace::Threshold, 1e-10)?;
        let l = nm.l();
        let h = nm.h();
        let minimal = (0..=l).all(|t| sol.policy[t] >= prescribed_threshold(nm, t));
        s.record(minimal, || format!("π* >= h_θ: {} π={:?}", label(), sol.policy));
        let monotone = (1..h).all(|t| sol.policy[t - 1] >= sol.policy[t])
            && (h + 1..=l).all(|t| sol.policy[t - 1] >= sol.policy[t]);
        s.record(monotone, || format!("monotone thresholds: {} π={:?}", label(), sol.policy));
        let slack = 1e-8 * sol.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        let rising = sol.values.windows(2).all(|w| w[1] >= w[0] - slack);
        s.record(rising, || format!("value monotonicity: {} V={:?}", label(), sol.values));
        Ok(s)
    })?;
    Ok(merge("best-response lemmas", parts))
}

/// Design inequality against the basin comparison
/// `N - B̲ > B̄ h and B̄ < N - 1` across population sizes.
pub fn design_suite(deltas: &[f64], ratios: &[f64], ns: &[usize]) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("design verdict vs basin comparison");
    for &d in deltas {
        for &r in ratios {
            for h in 1..=3 {
                if g(d, 1.0, r, h as f64).abs() < 1e-9 {
                    s.skipped += 1;
                    continue;
                }
                for &n in ns {
                    let p = CommunityParams::new(n, 3, 1.0, r, d, 0.0, 1.0)?;
                    let nm = SocialNorm::new(p, h)?;
                    let ab = absorbing_bounds(&nm);
                    let basin =
                        n as f64 - ab.b_lower > ab.b_upper * h as f64 && ab.b_upper < (n - 1) as f64;
                    let verdict = feasibility_test(&p, h, Boundary::Strict);
                    s.record(basin == verdict, || {
                        format!("δ={d} c/b={r} h={h} N={n}: verdict {verdict} basin {basin}")
                    });
                }
            }
        }
    }
    Ok(s)
}

/// Pearson chi-square of observed counts against probabilities, pooling
/// bins with expected count below [`MIN_EXPECTED`] into one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn chi_square(observed: &[u64], probs: &[f64]) -> ChiSquare {
    let total: u64 = observed.iter().sum();
    let t = total as f64;
    let mut stat = 0.0;
    let mut bins = 0usize;
    let (mut pooled_o, mut pooled_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * t;
        if e < MIN_EXPECTED {
            pooled_o += o as f64;
            pooled_e += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            bins += 1;
        }
    }
    if pooled_e > 0.0 {
        stat += (pooled_o - pooled_e).powi(2) / pooled_e;
        bins += 1;
    }
    let dof = bins.saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| 1.0 - d.cdf(stat))
        .unwrap_or(f64::NAN);
    ChiSquare {
        statistic: stat,
        dof,
        p_value,
    }
}

/// Agent-level occupancy sampled every `thin` periods against the exact
/// stationary distribution of the same norm.
pub fn bridge_test(norm: &SocialNorm, periods: u64, thin: u64, seed: u64) -> Result<ChiSquare> {
    let space = ConfigSpace::enumerate(norm.n(), norm.l())?;
    let p = parallel::build_transition_matrix(norm, &space, TieRule::LargerThreshold)?;
    let omega = chain::stationary_distribution(&p)?;
    let mut community = Community::new(*norm, &InitialState::AllTop, seed)?;
    let mut visits: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for t in 1..=periods {
        let m = community.step()?;
        if t % thin == 0 {
            *visits.entry(m.counts).or_default() += 1;
        }
    }
    let observed: Vec<u64> = space
        .iter()
        .map(|c| visits.get(c).copied().unwrap_or(0))
        .collect();
    Ok(chi_square(&observed, &omega.weights))
}

/// Parameters of the sim/chain bridge: `N = 6`, `L = 3`, `b = 3`, `c = 1`,
/// `δ = 0.6`, `ε = 0.01`, `γ = 1`, `h = 1`.
pub fn bridge_norm() -> Result<SocialNorm> {
    norm(6, 3, 3.0, 0.6, 0.01, 1)
}

pub fn bridge_suite(periods: u64, thin: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("sim vs chain occupancy");
    let cs = bridge_test(&bridge_norm()?, periods, thin, 1)?;
    s.record(cs.p_value > CHI_SQUARE_ALPHA, || {
        format!("χ²={:.3} on {} dof, p={:.4}", cs.statistic, cs.dof, cs.p_value)
    });
    Ok(s)
}

/// Runs every suite; `quick` shrinks grids and budgets.
pub fn run(quick: bool) -> Result<VerifyReport> {
    let deltas = [0.3, 0.5, 0.6, 0.8];
    let benefits = [2.0, 3.0, 5.0];
    let fine: Vec<f64> = (1..=19).map(|k| k as f64 * 0.05).collect();
    let suites = if quick {
        vec![
            closed_form_suite(&[5, 11], &deltas, &benefits)?,
            absorbing_suite(&[4, 5], &deltas, &benefits)?,
            lemma_suite(100, 7)?,
            design_suite(&fine, &fine, &[3, 11, 101])?,
            bridge_suite(200_000, 10)?,
        ]
    } else {
        let chain_deltas: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        vec![
            closed_form_suite(&[5, 11, 51], &deltas, &benefits)?,
            absorbing_suite(&[3, 4, 5, 6, 8], &chain_deltas, &[1.5, 2.0, 3.0, 5.0])?,
            lemma_suite(500, 7)?,
            design_suite(&fine, &fine, &[3, 11, 101])?,
            bridge_suite(1_000_000, 10)?,
        ]
    };
    Ok(VerifyReport { quick, suites })
}
