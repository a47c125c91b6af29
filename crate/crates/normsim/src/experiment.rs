//! Experiment specifications and their runners.
//!
//! A spec is a JSON document naming a `mode` and a nested `params` block
//! (the eight norm parameters). Each mode validates its own extras; unknown
//! keys are rejected everywhere.

use std::collections::BTreeMap;
use std::path::Path;

use normsim_core::bestresponse::{ActionSpace, Solver};
use normsim_core::chain::{self, ConfigSpace, DEFAULT_LADDER, DEFAULT_STATE_CAP};
use normsim_core::design::{absorbing_bounds, AbsorbingBounds, Boundary, DesignVerdict};
use normsim_core::sim::{
    self, BeliefMode, BenefitNoise, Community, Group, InitialState, PeriodMetrics,
};
use normsim_core::{FixedBelief, NormConfig, OpponentConfig, SocialNorm, TieRule};
use serde::{Deserialize, Serialize};

use crate::config::parse_grid;
use crate::output::{self, real};
use crate::{parallel, CliError, Result};

/// Fraction of samples treated as the terminal window.
pub const TAIL_FRACTION: f64 = 0.2;
/// Band around the terminal mean used for the convergence period.
pub const CONVERGENCE_BAND: f64 = 0.05;
/// Width of the `n(L)/N` bins used for occupancy concentration.
pub const BIN_WIDTH: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Evolution,
    DeltaSweep,
    Mixed,
    VaryingB,
    AdaptiveBelief,
    Design,
    Chain,
    Bestresponse,
}

fn default_periods() -> u64 {
    100_000
}

fn default_stride() -> u64 {
    1_000
}

fn default_replicates() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub params: NormConfig,
    #[serde(default = "default_periods")]
    pub periods: u64,
    #[serde(default = "default_stride")]
    pub sample_stride: u64,
    /// Base seed; the command line overrides it.
    #[serde(default)]
    pub seed: u64,
    /// Independent runs with seeds `seed, seed + 1, ...`.
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub tie: TieRule,
    /// `mixed`: blocks of users with their own δ.
    #[serde(default)]
    pub groups: Vec<Group>,
    /// `varying-b`: variance of the per-period benefit draw around `b`.
    #[serde(default)]
    pub benefit_variance: Option<f64>,
    /// `delta-sweep`: discount factors to run.
    #[serde(default)]
    pub deltas: Vec<f64>,
    /// `delta-sweep`: benefits to run (defaults to `params.b`).
    #[serde(default)]
    pub benefits: Vec<f64>,
    /// `chain`: strictly decreasing ε values.
    #[serde(default)]
    pub eps_ladder: Vec<f64>,
    /// `design`: `start:stop:step`.
    #[serde(default)]
    pub delta_grid: Option<String>,
    /// `design`: `start:stop:step`.
    #[serde(default)]
    pub cb_grid: Option<String>,
    #[serde(default)]
    pub boundary_lenient: bool,
    /// `bestresponse`: opponent census `n(0..=L)` summing to `N - 1`.
    #[serde(default)]
    pub eta: Option<Vec<usize>>,
}

fn invalid(mode: Mode, msg: &str) -> CliError {
    CliError::Config(format!("{mode:?} spec: {msg}"))
}

impl ExperimentSpec {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        crate::config::parse_json(text, origin)
    }

    pub fn load(path: &Path) -> Result<Self> {
        crate::config::load_json(path)
    }

    pub fn norm(&self) -> Result<SocialNorm> {
        Ok(self.params.build()?)
    }

    pub fn boundary(&self) -> Boundary {
        if self.boundary_lenient {
            Boundary::Lenient
        } else {
            Boundary::Strict
        }
    }

    fn is_simulation(&self) -> bool {
        matches!(
            self.mode,
            Mode::Evolution | Mode::DeltaSweep | Mode::Mixed | Mode::VaryingB | Mode::AdaptiveBelief
        )
    }

    /// Checks the parameters and the extras the mode needs.
    pub fn validate(&self) -> Result<()> {
        let norm = self.norm()?;
        let mode = self.mode;
        if self.is_simulation() {
            if self.periods == 0 {
                return Err(invalid(mode, "`periods` must be positive"));
            }
            if self.sample_stride == 0 {
                return Err(invalid(mode, "`sample_stride` must be positive"));
            }
            if self.replicates == 0 {
                return Err(invalid(mode, "`replicates` must be positive"));
            }
            self.initial.census(norm.n(), norm.l())?;
        }
        match mode {
            Mode::DeltaSweep => {
                if self.deltas.is_empty() {
                    return Err(invalid(mode, "`deltas` is required"));
                }
                for &d in &self.deltas {
                    norm.params().with_delta(d)?;
                }
                for &b in &self.benefits {
                    norm.params().with_benefit(b)?;
                }
            }
            Mode::Mixed => {
                if self.groups.len() < 2 {
                    return Err(invalid(mode, "`groups` needs at least two entries"));
                }
                let total: usize = self.groups.iter().map(|g| g.size).sum();
                if total != norm.n() {
                    return Err(invalid(
                        mode,
                        &format!("group sizes sum to {total}, params.N is {}", norm.n()),
                    ));
                }
                for g in &self.groups {
                    if g.size == 0 {
                        return Err(invalid(mode, "empty group"));
                    }
                    norm.params().with_delta(g.delta)?;
                }
            }
            Mode::VaryingB => match self.benefit_variance {
                Some(v) if v >= 0.0 && v.is_finite() => {}
                Some(_) => return Err(invalid(mode, "`benefit_variance` must be >= 0")),
                None => return Err(invalid(mode, "`benefit_variance` is required")),
            },
            Mode::Design => {
                let (Some(d), Some(r)) = (&self.delta_grid, &self.cb_grid) else {
                    return Err(invalid(mode, "`delta_grid` and `cb_grid` are required"));
                };
                parse_grid(d)?;
                parse_grid(r)?;
            }
            Mode::Chain => {
                ConfigSpace::enumerate_capped(norm.n(), norm.l(), DEFAULT_STATE_CAP)?;
                check_ladder(&self.ladder())?;
            }
            Mode::Bestresponse => {
                let Some(eta) = &self.eta else {
                    return Err(invalid(mode, "`eta` is required"));
                };
                OpponentConfig::new(eta.clone(), norm.n(), norm.l())?;
            }
            Mode::Evolution | Mode::AdaptiveBelief => {}
        }
        if !self.groups.is_empty() && mode != Mode::Mixed {
            return Err(invalid(mode, "`groups` only applies to mixed mode"));
        }
        Ok(())
    }

    pub fn ladder(&self) -> Vec<f64> {
        if self.eps_ladder.is_empty() {
            DEFAULT_LADDER.to_vec()
        } else {
            self.eps_ladder.clone()
        }
    }

    fn seeds(&self) -> Vec<u64> {
        (0..self.replicates).map(|k| self.seed.wrapping_add(k)).collect()
    }
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty()
        || ladder.windows(2).any(|w| !(w[1] < w[0]))
        || ladder.iter().any(|&e| !(e > 0.0 && e < 0.5))
    {
        return Err(CliError::Config(
            "eps_ladder: need a strictly decreasing list inside (0, 0.5)".into(),
        ));
    }
    Ok(())
}

/// One simulated community.
#[derive(Clone, Debug, PartialEq)]
pub struct SimSetup {
    pub norm: SocialNorm,
    pub groups: Vec<Group>,
    pub initial: InitialState,
    pub beliefs: BeliefMode,
    pub noise: Option<BenefitNoise>,
    pub periods: u64,
    pub stride: u64,
}

impl SimSetup {
    pub fn homogeneous(norm: SocialNorm, periods: u64, stride: u64) -> Self {
        let groups = vec![Group {
            size: norm.n(),
            delta: norm.params().delta(),
        }];
        Self {
            norm,
            groups,
            initial: InitialState::default(),
            beliefs: BeliefMode::Fixed,
            noise: None,
            periods,
            stride,
        }
    }

    fn from_spec(spec: &ExperimentSpec, norm: SocialNorm) -> Self {
        let mut s = Self::homogeneous(norm, spec.periods, spec.sample_stride);
        s.initial = spec.initial.clone();
        s
    }

    pub fn community(&self, seed: u64) -> Result<Community> {
        let mut c = Community::with_groups(self.norm, &self.groups, &self.initial, seed)?
            .with_beliefs(self.beliefs);
        if let Some(noise) = self.noise {
            c = c.with_benefit_noise(noise)?;
        }
        Ok(c)
    }

    pub fn run(&self, seed: u64) -> Result<SimRun> {
        let samples = self.community(seed)?.run(self.periods, self.stride)?;
        let sizes: Vec<usize> = self.groups.iter().map(|g| g.size).collect();
        let summary = RunSummary::from_samples(seed, &samples, &sizes);
        Ok(SimRun { samples, summary })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimRun {
    pub samples: Vec<PeriodMetrics>,
    pub summary: RunSummary,
}

/// Terminal statistics of one run. "Terminal" means the last
/// [`TAIL_FRACTION`] of the samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub seed: u64,
    pub samples: usize,
    pub terminal_configuration: Vec<usize>,
    /// Mean `n(L)/N` over the terminal window.
    pub top_fraction: f64,
    /// Mean `n(0)/N` over the terminal window.
    pub bottom_fraction: f64,
    /// Mean share of users at reputations `1..L-1`.
    pub interior_fraction: f64,
    pub social_welfare: f64,
    /// Largest share of terminal samples whose `n(L)/N` rounds to the same
    /// multiple of [`BIN_WIDTH`].
    pub max_bin_share: f64,
    /// First sampled period after which the window-averaged `n(L)/N` stays
    /// within [`CONVERGENCE_BAND`] of its terminal mean.
    pub convergence_period: Option<u64>,
    /// Per group: mean share of the group at reputation 0.
    pub group_bottom_fraction: Vec<f64>,
    /// Per group: mean share of the group whose strategy refuses everyone.
    pub group_defector_fraction: Vec<f64>,
}

impl RunSummary {
    pub fn from_samples(seed: u64, samples: &[PeriodMetrics], group_sizes: &[usize]) -> Self {
        let k = sim::tail_len(samples.len(), TAIL_FRACTION);
        let tail = &samples[samples.len().saturating_sub(k)..];
        let mut bins: BTreeMap<i64, usize> = BTreeMap::new();
        for m in tail {
            *bins
                .entry((sim::top_fraction(m) / BIN_WIDTH).round() as i64)
                .or_default() += 1;
        }
        let max_bin = bins.values().copied().max().unwrap_or(0);
        let per_group = |f: &dyn Fn(&PeriodMetrics) -> &[usize]| -> Vec<f64> {
            group_sizes
                .iter()
                .enumerate()
                .map(|(g, &size)| {
                    sim::tail_mean(samples, TAIL_FRACTION, |m| f(m)[g] as f64 / size as f64)
                })
                .collect()
        };
        let bottom = |m: &PeriodMetrics| {
            m.counts[0] as f64 / m.counts.iter().sum::<usize>() as f64
        };
        Self {
            seed,
            samples: samples.len(),
            terminal_configuration: samples.last().map(|m| m.counts.clone()).unwrap_or_default(),
            top_fraction: sim::tail_mean(samples, TAIL_FRACTION, |m| m.window_top_fraction),
            bottom_fraction: sim::tail_mean(samples, TAIL_FRACTION, bottom),
            interior_fraction: sim::tail_mean(samples, TAIL_FRACTION, sim::interior_fraction),
            social_welfare: sim::tail_mean(samples, TAIL_FRACTION, |m| m.social_welfare),
            max_bin_share: max_bin as f64 / tail.len().max(1) as f64,
            convergence_period: sim::convergence_period(samples, TAIL_FRACTION, CONVERGENCE_BAND),
            group_bottom_fraction: per_group(&|m| &m.group_bottom),
            group_defector_fraction: per_group(&|m| &m.group_defectors),
        }
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionReport {
    pub mode: Mode,
    pub params: NormConfig,
    pub periods: u64,
    pub sample_stride: u64,
    pub runs: Vec<RunSummary>,
    /// Baseline runs (fixed beliefs or constant benefit) where the mode has
    /// one.
    #[serde(default)]
    pub baseline: Vec<RunSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub b: f64,
    pub delta: f64,
    pub runs: Vec<RunSummary>,
    pub top_fraction_mean: f64,
    pub top_fraction_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub params: NormConfig,
    pub periods: u64,
    pub points: Vec<SweepPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedReport {
    pub params: NormConfig,
    pub groups: Vec<Group>,
    pub mixed: Vec<RunSummary>,
    /// One entry per group: the pure community of that group's δ.
    pub pure: Vec<Vec<RunSummary>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RungReport {
    pub epsilon: f64,
    pub residual: f64,
    pub underflow: usize,
    /// Stationary mass on configurations with interior reputations.
    pub interior_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainReport {
    pub params: NormConfig,
    pub tie: TieRule,
    pub states: usize,
    pub bounds: AbsorbingBounds,
    pub verdict: DesignVerdict,
    pub absorbing_analytic: Vec<Vec<usize>>,
    pub absorbing_numeric: Vec<Vec<usize>>,
    pub closed_classes: Vec<Vec<Vec<usize>>>,
    pub ssc_support: Vec<Vec<usize>>,
    pub rungs: Vec<RungReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BestResponseReport {
    pub params: NormConfig,
    pub eta: Vec<usize>,
    pub policy: Vec<usize>,
    pub values: Vec<f64>,
    pub co_optimal: Vec<Vec<usize>>,
    pub iterations: usize,
    pub residual: f64,
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignReport {
    pub params: NormConfig,
    pub boundary: Boundary,
    pub verdict: DesignVerdict,
    pub cells: usize,
}

fn run_seeds(setup: &SimSetup, seeds: &[u64]) -> Result<Vec<SimRun>> {
    parallel::map(seeds, |&s| setup.run(s))
}

fn write_runs(dir: &Path, stem: &str, runs: &[SimRun], l: usize) -> Result<()> {
    for (k, r) in runs.iter().enumerate() {
        let name = if k == 0 {
            format!("{stem}.csv")
        } else {
            format!("{stem}_{}.csv", r.summary.seed)
        };
        output::write_timeseries(&dir.join(name), &r.samples, l)?;
    }
    Ok(())
}

fn summaries(runs: Vec<SimRun>) -> Vec<RunSummary> {
    runs.into_iter().map(|r| r.summary).collect()
}

/// Runs a validated spec and writes its outputs under `out`.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path) -> Result<()> {
    spec.validate()?;
    let norm = spec.norm()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match spec.mode {
        Mode::Evolution => run_evolution(spec, norm, out),
        Mode::DeltaSweep => run_delta_sweep(spec, norm, out),
        Mode::Mixed => run_mixed(spec, norm, out),
        Mode::VaryingB | Mode::AdaptiveBelief => run_with_baseline(spec, norm, out),
        Mode::Design => run_design(spec, norm, &out.join("region.csv")).map(|_| ()),
        Mode::Chain => {
            let report = run_chain(&norm, &spec.ladder(), spec.tie, out)?;
            output::write_json(&out.join("chain.json"), &report)
        }
        Mode::Bestresponse => {
            let report = run_bestresponse(&norm, spec.eta.as_deref().unwrap_or_default())?;
            output::write_json(&out.join("bestresponse.json"), &report)
        }
    }
}

fn run_evolution(spec: &ExperimentSpec, norm: SocialNorm, out: &Path) -> Result<()> {
    let setup = SimSetup::from_spec(spec, norm);
    let runs = run_seeds(&setup, &spec.seeds())?;
    write_runs(out, "timeseries", &runs, norm.l())?;
    let report = EvolutionReport {
        mode: spec.mode,
        params: spec.params,
        periods: spec.periods,
        sample_stride: spec.sample_stride,
        runs: summaries(runs),
        baseline: Vec::new(),
    };
    output::write_json(&out.join("summary.json"), &report)
}

fn run_with_baseline(spec: &ExperimentSpec, norm: SocialNorm, out: &Path) -> Result<()> {
    let baseline = SimSetup::from_spec(spec, norm);
    let mut treated = baseline.clone();
    match spec.mode {
        Mode::VaryingB => {
            treated.noise = Some(BenefitNoise {
                mean: norm.params().b(),
                variance: spec.benefit_variance.unwrap_or_default(),
            });
        }
        _ => treated.beliefs = BeliefMode::Adaptive,
    }
    let seeds = spec.seeds();
    let runs = run_seeds(&treated, &seeds)?;
    let base = run_seeds(&baseline, &seeds)?;
    write_runs(out, "timeseries", &runs, norm.l())?;
    write_runs(out, "baseline_timeseries", &base, norm.l())?;
    let report = EvolutionReport {
        mode: spec.mode,
        params: spec.params,
        periods: spec.periods,
        sample_stride: spec.sample_stride,
        runs: summaries(runs),
        baseline: summaries(base),
    };
    output::write_json(&out.join("summary.json"), &report)
}

fn run_delta_sweep(spec: &ExperimentSpec, norm: SocialNorm, out: &Path) -> Result<()> {
    let benefits = if spec.benefits.is_empty() {
        vec![norm.params().b()]
    } else {
        spec.benefits.clone()
    };
    let seeds = spec.seeds();
    let mut jobs = Vec::new();
    for &b in &benefits {
        for &d in &spec.deltas {
            for &s in &seeds {
                jobs.push((b, d, s));
            }
        }
    }
    let results = parallel::map(&jobs, |&(b, d, s)| {
        let params = norm.params().with_benefit(b)?.with_delta(d)?;
        let setup = SimSetup::from_spec(spec, norm.with_params(params)?);
        Ok(setup.run(s)?.summary)
    })?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (chunk, group) in results.chunks(seeds.len()).zip(jobs.chunks(seeds.len())) {
        let (b, d, _) = group[0];
        for (r, &(_, _, s)) in chunk.iter().zip(group) {
            rows.push(vec![
                real(b),
                real(d),
                s.to_string(),
                real(r.top_fraction),
                real(r.interior_fraction),
                r.convergence_period.map(|p| p.to_string()).unwrap_or_default(),
            ]);
        }
        let tops: Vec<f64> = chunk.iter().map(|r| r.top_fraction).collect();
        let (mean, std) = mean_std(&tops);
        points.push(SweepPoint {
            b,
            delta: d,
            runs: chunk.to_vec(),
            top_fraction_mean: mean,
            top_fraction_std: std,
        });
    }
    output::write_table(
        &out.join("sweep.csv"),
        &["b", "delta", "seed", "top_fraction", "interior_fraction", "convergence_period"],
        &rows,
    )?;
    let report = SweepReport {
        params: spec.params,
        periods: spec.periods,
        points,
    };
    output::write_json(&out.join("summary.json"), &report)
}

fn run_mixed(spec: &ExperimentSpec, norm: SocialNorm, out: &Path) -> Result<()> {
    let seeds = spec.seeds();
    let mut mixed_setup = SimSetup::from_spec(spec, norm);
    mixed_setup.groups = spec.groups.clone();
    let mixed = run_seeds(&mixed_setup, &seeds)?;
    let mut pure = Vec::new();
    for g in &spec.groups {
        let pn = norm.with_params(norm.params().with_delta(g.delta)?)?;
        pure.push(summaries(run_seeds(&SimSetup::from_spec(spec, pn), &seeds)?));
    }
    let mixed = summaries(mixed);
    let mut rows = Vec::new();
    for r in &mixed {
        for (gi, g) in spec.groups.iter().enumerate() {
            rows.push(vec![
                "mixed".into(),
                gi.to_string(),
                real(g.delta),
                r.seed.to_string(),
                real(r.group_bottom_fraction[gi]),
                real(r.group_defector_fraction[gi]),
            ]);
        }
    }
    for (gi, (g, runs)) in spec.groups.iter().zip(&pure).enumerate() {
        for r in runs {
            rows.push(vec![
                "pure".into(),
                gi.to_string(),
                real(g.delta),
                r.seed.to_string(),
                real(r.group_bottom_fraction[0]),
                real(r.group_defector_fraction[0]),
            ]);
        }
    }
    output::write_table(
        &out.join("mixed.csv"),
        &["community", "group", "delta", "seed", "bottom_fraction", "defector_fraction"],
        &rows,
    )?;
    let report = MixedReport {
        params: spec.params,
        groups: spec.groups.clone(),
        mixed,
        pure,
    };
    output::write_json(&out.join("summary.json"), &report)
}

/// Writes `region.csv` for the spec's grids and returns the verdict for the
/// spec's own norm.
pub fn run_design(spec: &ExperimentSpec, norm: SocialNorm, out: &Path) -> Result<DesignReport> {
    let dg = parse_grid(spec.delta_grid.as_deref().unwrap_or_default())?;
    let cg = parse_grid(spec.cb_grid.as_deref().unwrap_or_default())?;
    let cells = parallel::feasible_region_grid(&dg, &cg, norm.l(), spec.boundary())?;
    output::write_region(out, &cells)?;
    Ok(DesignReport {
        params: spec.params,
        boundary: spec.boundary(),
        verdict: DesignVerdict::for_norm(&norm, spec.boundary()),
        cells: cells.len(),
    })
}

/// Exact-chain analysis: absorbing sets, the ε-ladder and SSC support.
/// Writes `omega.csv` under `out`.
pub fn run_chain(norm: &SocialNorm, ladder: &[f64], tie: TieRule, out: &Path) -> Result<ChainReport> {
    check_ladder(ladder)?;
    let space = ConfigSpace::enumerate_capped(norm.n(), norm.l(), DEFAULT_STATE_CAP)?;
    let absorbing = chain::classify_absorbing(norm, &space, tie)?;
    absorbing.check()?;
    let dist =
        chain::limiting_distribution_with(norm, &space, ladder, tie, parallel::build_transition_matrix)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    output::write_omega(&out.join("omega.csv"), &space, &dist)?;
    let censuses = |ix: &[usize]| -> Vec<Vec<usize>> {
        ix.iter().map(|&i| space.counts(i).to_vec()).collect()
    };
    let rungs = dist
        .rungs
        .iter()
        .map(|r| RungReport {
            epsilon: r.epsilon,
            residual: r.residual,
            underflow: r.underflow,
            interior_mass: (0..space.len())
                .filter(|&i| space.interior(i) > 0)
                .map(|i| r.weights[i])
                .sum(),
        })
        .collect();
    Ok(ChainReport {
        params: NormConfig::from(norm),
        tie,
        states: space.len(),
        bounds: absorbing_bounds(norm),
        verdict: DesignVerdict::for_norm(norm, Boundary::Strict),
        absorbing_analytic: censuses(&absorbing.analytic),
        absorbing_numeric: censuses(&absorbing.numeric),
        closed_classes: absorbing.classes.iter().map(|c| censuses(c)).collect(),
        ssc_support: censuses(&dist.support),
        rungs,
    })
}

pub fn run_bestresponse(norm: &SocialNorm, eta: &[usize]) -> Result<BestResponseReport> {
    let opp = OpponentConfig::new(eta.to_vec(), norm.n(), norm.l())?;
    let sol = Solver::default().solve(norm, &opp, &FixedBelief::for_norm(norm), ActionSpace::Threshold)?;
    Ok(BestResponseReport {
        params: NormConfig::from(norm),
        eta: eta.to_vec(),
        strict: sol.is_strict(),
        policy: sol.policy,
        values: sol.values,
        co_optimal: sol.co_optimal,
        iterations: sol.iterations,
        residual: sol.residual,
    })
}
