//! Exact Markov chain over community configurations for small `N`.
//!
//! Every period each user plays its best response to the posted
//! configuration and then, independently, is reset to 0 with probability
//! `q_θ` or climbs to `min(L, θ+1)`. The next census is therefore a product
//! of per-bucket binomials. Stationary distributions are computed with the
//! Grassmann–Taksar–Heyman elimination (no subtractions, so it stays
//! accurate when `ε` makes the chain nearly decomposable) or by power
//! iteration for large spaces.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::belief::FixedBelief;
use crate::bestresponse::{ActionSpace, Solver};
use crate::design::{absorbing_bounds, AbsorbingBounds};
use crate::math::{abs, binomial, binomial_exact, powi};
use crate::payoff::reset_with;
use crate::{
    opponent_of, Configuration, Error, Result, SocialNorm, TieRule,
};

pub const DEFAULT_STATE_CAP: usize = 100_000;
/// Largest space solved by dense elimination; beyond it power iteration is
/// used.
pub const GTH_LIMIT: usize = 2_000;
pub const ROW_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_LADDER: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// All censuses of `N` users over `0..=L`, in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigSpace {
    n: usize,
    l: usize,
    configs: Vec<Vec<usize>>,
    index: BTreeMap<Vec<usize>, usize>,
}

impl ConfigSpace {
    pub fn enumerate(n: usize, l: usize) -> Result<Self> {
        Self::enumerate_capped(n, l, DEFAULT_STATE_CAP)
    }

    pub fn enumerate_capped(n: usize, l: usize, cap: usize) -> Result<Self> {
        let size = binomial_exact(n + l, l).unwrap_or(usize::MAX);
        if size > cap {
            return Err(Error::StateSpaceTooLarge { size, cap });
        }
        let mut configs = Vec::with_capacity(size);
        let mut current = vec![0; l + 1];
        fill(&mut configs, &mut current, 0, n);
        let index = configs
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        Ok(Self {
            n,
            l,
            configs,
            index,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn counts(&self, i: usize) -> &[usize] {
        &self.configs[i]
    }

    pub fn configuration(&self, i: usize) -> Configuration {
        Configuration::from_counts_unchecked(self.configs[i].clone())
    }

    pub fn index_of(&self, counts: &[usize]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.configs.iter().map(Vec::as_slice)
    }

    /// Everyone at reputation 0.
    pub fn bottom(&self) -> usize {
        let mut c = vec![0; self.l + 1];
        c[0] = self.n;
        self.index[&c]
    }

    /// Everyone at reputation `L`.
    pub fn top(&self) -> usize {
        let mut c = vec![0; self.l + 1];
        c[self.l] = self.n;
        self.index[&c]
    }

    /// Users at interior reputations `1..L`.
    pub fn interior(&self, i: usize) -> usize {
        let c = &self.configs[i];
        c[1..self.l].iter().sum()
    }
}

fn fill(out: &mut Vec<Vec<usize>>, current: &mut [usize], k: usize, rem: usize) {
    if k + 1 == current.len() {
        current[k] = rem;
        out.push(current.to_vec());
        return;
    }
    for x in 0..=rem {
        current[k] = x;
        fill(out, current, k + 1, rem - x);
    }
}

/// Best-response thresholds and reset probabilities per reputation bucket.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketStrategies {
    /// `π*_μ(θ)`; unoccupied buckets carry the prescribed threshold.
    pub thresholds: Vec<usize>,
    /// Reset probability of one user in each bucket (0 when unoccupied).
    pub resets: Vec<f64>,
    /// Whether the bucket's best response had co-optimal alternatives.
    pub tied: Vec<bool>,
}

/// Solves every occupied bucket's best response against the rest of `mu`.
pub fn strategy_configuration(
    norm: &SocialNorm,
    mu: &Configuration,
    tie: TieRule,
    solver: &Solver,
) -> Result<BucketStrategies> {
    let l = norm.l();
    let belief = FixedBelief::for_norm(norm);
    let mut thresholds = Vec::with_capacity(l + 1);
    let mut resets = Vec::with_capacity(l + 1);
    let mut tied = Vec::with_capacity(l + 1);
    for theta in 0..=l {
        if mu.counts()[theta] == 0 {
            thresholds.push(norm.prescribed(theta).threshold());
            resets.push(0.0);
            tied.push(false);
            continue;
        }
        let eta = opponent_of(mu, theta)?;
        let sol = solver.solve(norm, &eta, &belief, ActionSpace::Threshold)?;
        let reset_of = |a: usize| reset_with(norm, theta, &eta, |r| r >= a);
        let options = &sol.co_optimal[theta];
        let q = match tie {
            TieRule::LargerThreshold => reset_of(sol.policy[theta]),
            TieRule::FairCoin => {
                options.iter().map(|&a| reset_of(a)).sum::<f64>() / options.len() as f64
            }
        };
        thresholds.push(sol.policy[theta]);
        resets.push(q);
        tied.push(options.len() > 1);
    }
    Ok(BucketStrategies {
        thresholds,
        resets,
        tied,
    })
}

/// Sparse row-stochastic transition matrix over a [`ConfigSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    pub epsilon: f64,
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    /// Rows as `(column, probability)` lists sorted by column.
    pub fn from_rows(epsilon: f64, rows: Vec<Vec<(usize, f64)>>) -> Self {
        Self { epsilon, rows }
    }

    pub fn from_dense(epsilon: f64, dense: &[Vec<f64>]) -> Self {
        let rows = dense
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &p)| p != 0.0)
                    .map(|(j, &p)| (j, p))
                    .collect()
            })
            .collect();
        Self { epsilon, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(c, _)| c)
            .map_or(0.0, |k| row[k].1)
    }

    /// Largest `|Σ_j P(i,j) - 1|`.
    pub fn max_row_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| abs(r.iter().map(|&(_, p)| p).sum::<f64>() - 1.0))
            .fold(0.0, f64::max)
    }

    /// `ω P`.
    pub fn left_mul(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows.len()];
        for (i, row) in self.rows.iter().enumerate() {
            let wi = w[i];
            if wi == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j] += wi * p;
            }
        }
        out
    }

    /// `sup |ωP - ω|`.
    pub fn residual(&self, w: &[f64]) -> f64 {
        self.left_mul(w)
            .iter()
            .zip(w)
            .map(|(a, b)| abs(a - b))
            .fold(0.0, f64::max)
    }

    fn reachable(&self, start: usize, reverse: bool) -> Vec<bool> {
        let n = self.rows.len();
        let mut adj_rev: Vec<Vec<usize>> = Vec::new();
        if reverse {
            adj_rev = vec![Vec::new(); n];
            for (i, row) in self.rows.iter().enumerate() {
                for &(j, p) in row {
                    if p > 0.0 {
                        adj_rev[j].push(i);
                    }
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            let next: Vec<usize> = if reverse {
                adj_rev[i].clone()
            } else {
                self.rows[i]
                    .iter()
                    .filter(|&&(_, p)| p > 0.0)
                    .map(|&(j, _)| j)
                    .collect()
            };
            for j in next {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }

    /// Fails with [`Error::Reducible`] unless every state reaches and is
    /// reached from state 0.
    pub fn check_irreducible(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Ok(());
        }
        let fwd = self.reachable(0, false);
        let bwd = self.reachable(0, true);
        let unreachable = fwd.iter().zip(&bwd).filter(|(a, b)| !(**a && **b)).count();
        if unreachable == 0 {
            Ok(())
        } else {
            Err(Error::Reducible { unreachable })
        }
    }

    /// Closed communicating classes (the irreducible absorbing classes).
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        let comps = strongly_connected(self);
        let n = self.rows.len();
        let mut comp_of = vec![0; n];
        for (k, comp) in comps.iter().enumerate() {
            for &i in comp {
                comp_of[i] = k;
            }
        }
        let mut closed: Vec<Vec<usize>> = comps
            .into_iter()
            .enumerate()
            .filter(|(k, comp)| {
                comp.iter().all(|&i| {
                    self.rows[i]
                        .iter()
                        .all(|&(j, p)| p == 0.0 || comp_of[j] == *k)
                })
            })
            .map(|(_, mut comp)| {
                comp.sort_unstable();
                comp
            })
            .collect();
        closed.sort();
        closed
    }

    /// Visits per state along a simulated path of `steps` transitions.
    pub fn occupancy<R: Rng + ?Sized>(&self, start: usize, steps: u64, rng: &mut R) -> Vec<u64> {
        let mut counts = vec![0u64; self.rows.len()];
        let mut state = start;
        for _ in 0..steps {
            let u: f64 = rng.random();
            let row = &self.rows[state];
            let mut acc = 0.0;
            let mut next = row.last().map_or(state, |&(j, _)| j);
            for &(j, p) in row {
                acc += p;
                if u < acc {
                    next = j;
                    break;
                }
            }
            state = next;
            counts[state] += 1;
        }
        counts
    }
}

/// Kosaraju's algorithm with explicit stacks.
fn strongly_connected(p: &TransitionMatrix) -> Vec<Vec<usize>> {
    let n = p.len();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            p.row(i)
                .iter()
                .filter(|&&(_, x)| x > 0.0)
                .map(|&(j, _)| j)
                .collect()
        })
        .collect();
    let mut pred = vec![Vec::new(); n];
    for (i, s) in succ.iter().enumerate() {
        for &j in s {
            pred[j].push(i);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((v, k)) = stack.pop() {
            if k < succ[v].len() {
                stack.push((v, k + 1));
                let w = succ[v][k];
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
            }
        }
    }
    let mut assigned = vec![false; n];
    let mut comps = Vec::new();
    for &root in order.iter().rev() {
        if assigned[root] {
            continue;
        }
        assigned[root] = true;
        let mut comp = vec![root];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &pred[v] {
                if !assigned[w] {
                    assigned[w] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

fn binomial_pmf(n: usize, q: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| binomial(n, k) * powi(q, k as i32) * powi(1.0 - q, (n - k) as i32))
        .collect()
}

/// Transition row of configuration `i` given per-bucket reset
/// probabilities.
pub fn row_from_resets(space: &ConfigSpace, i: usize, resets: &[f64]) -> Vec<(usize, f64)> {
    let l = space.l();
    let counts = space.counts(i);
    // Buckets below L-1 climb one step each; buckets L-1 and L both land
    // on L, so only their combined reset count matters.
    let lower: Vec<Vec<f64>> = (0..l - 1)
        .map(|theta| binomial_pmf(counts[theta], resets[theta]))
        .collect();
    let a = binomial_pmf(counts[l - 1], resets[l - 1]);
    let b = binomial_pmf(counts[l], resets[l]);
    let mut top = vec![0.0; a.len() + b.len() - 1];
    for (x, pa) in a.iter().enumerate() {
        for (y, pb) in b.iter().enumerate() {
            top[x + y] += pa * pb;
        }
    }
    let top_users = counts[l - 1] + counts[l];

    let mut row = Vec::new();
    let mut next = vec![0; l + 1];
    let mut r = vec![0; l.saturating_sub(1)];
    loop {
        let base: f64 = lower.iter().zip(&r).map(|(pmf, &k)| pmf[k]).product();
        if base > 0.0 {
            let lower_resets: usize = r.iter().sum();
            for (s, &pt) in top.iter().enumerate() {
                let p = base * pt;
                if p == 0.0 {
                    continue;
                }
                next[0] = lower_resets + s;
                for theta in 0..l - 1 {
                    next[theta + 1] = counts[theta] - r[theta];
                }
                next[l] = top_users - s;
                let j = space.index_of(&next).expect("census preserved");
                row.push((j, p));
            }
        }
        // Odometer over the lower buckets' reset counts.
        let mut k = 0;
        while k < r.len() {
            if r[k] < counts[k] {
                r[k] += 1;
                break;
            }
            r[k] = 0;
            k += 1;
        }
        if k == r.len() {
            break;
        }
    }
    row.sort_unstable_by_key(|&(j, _)| j);
    row
}

/// Transition row of configuration `i` under best-response dynamics.
pub fn build_row(
    norm: &SocialNorm,
    space: &ConfigSpace,
    i: usize,
    tie: TieRule,
    solver: &Solver,
) -> Result<Vec<(usize, f64)>> {
    let strategies = strategy_configuration(norm, &space.configuration(i), tie, solver)?;
    Ok(row_from_resets(space, i, &strategies.resets))
}

fn check_space(norm: &SocialNorm, space: &ConfigSpace) -> Result<()> {
    if space.n() != norm.n() || space.l() != norm.l() {
        return Err(Error::CensusShape {
            expected: norm.l() + 1,
            got: space.l() + 1,
        });
    }
    Ok(())
}

pub fn build_transition_matrix(
    norm: &SocialNorm,
    space: &ConfigSpace,
    tie: TieRule,
) -> Result<TransitionMatrix> {
    check_space(norm, space)?;
    let solver = Solver::default();
    let rows = (0..space.len())
        .map(|i| build_row(norm, space, i, tie, &solver))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionMatrix::from_rows(norm.params().epsilon(), rows))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryDist {
    pub weights: Vec<f64>,
    /// `sup |ωP - ω|`.
    pub residual: f64,
}

/// Stationary distribution by GTH elimination on the dense matrix.
pub fn stationary_gth(p: &TransitionMatrix) -> Result<StationaryDist> {
    let n = p.len();
    if n == 0 {
        return Ok(StationaryDist {
            weights: Vec::new(),
            residual: 0.0,
        });
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for &(j, x) in p.row(i) {
            a[i * n + j] = x;
        }
    }
    for k in (1..n).rev() {
        let s: f64 = a[k * n..k * n + k].iter().sum();
        if !(s > 0.0) {
            return Err(Error::Reducible { unreachable: k + 1 });
        }
        for i in 0..k {
            a[i * n + k] /= s;
        }
        for i in 0..k {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..k {
                a[i * n + j] += aik * a[k * n + j];
            }
        }
    }
    let mut w = vec![0.0; n];
    w[0] = 1.0;
    for k in 1..n {
        w[k] = (0..k).map(|i| w[i] * a[i * n + k]).sum();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let residual = p.residual(&w);
    Ok(StationaryDist {
        weights: w,
        residual,
    })
}

/// Power iteration `ω ← ωP` from `start` (uniform if `None`) until the
/// sup-norm change drops below `tol`.
pub fn stationary_power(
    p: &TransitionMatrix,
    start: Option<&[f64]>,
    tol: f64,
    max_iterations: usize,
) -> Result<StationaryDist> {
    let n = p.len();
    let mut w = match start {
        Some(s) => {
            let t: f64 = s.iter().sum();
            s.iter().map(|x| x / t).collect()
        }
        None => vec![1.0 / n as f64; n],
    };
    let mut change = f64::INFINITY;
    for _ in 0..max_iterations {
        let next = p.left_mul(&w);
        change = next
            .iter()
            .zip(&w)
            .map(|(a, b)| abs(a - b))
            .fold(0.0, f64::max);
        w = next;
        if change < tol {
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            let residual = p.residual(&w);
            return Ok(StationaryDist {
                weights: w,
                residual,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
        residual: change,
    })
}

/// Stationary distribution of an irreducible chain: GTH up to
/// [`GTH_LIMIT`] states, power iteration beyond.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<StationaryDist> {
    p.check_irreducible()?;
    if p.len() <= GTH_LIMIT {
        stationary_gth(p)
    } else {
        stationary_power(p, None, 1e-12, 10_000_000)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderRung {
    pub epsilon: f64,
    pub weights: Vec<f64>,
    pub residual: f64,
    /// States whose weight underflowed to exactly zero.
    pub underflow: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitingDistribution {
    pub rungs: Vec<LadderRung>,
    /// Stochastically stable configurations (indices into the space).
    pub support: Vec<usize>,
}

impl LimitingDistribution {
    pub fn bottom(&self) -> &LadderRung {
        self.rungs.last().expect("non-empty ladder")
    }
}

/// Weight threshold for stochastic stability at a given `ε`:
/// `100ε` clamped to `[1e-3, 0.1]`.
pub fn support_threshold(epsilon: f64) -> f64 {
    (100.0 * epsilon).clamp(1e-3, 0.1)
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::param("eps_ladder", "empty"));
    }
    for w in ladder.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::param("eps_ladder", "must be strictly decreasing"));
        }
    }
    if ladder.iter().any(|&e| !(e > 0.0 && e < 0.5)) {
        return Err(Error::param("eps_ladder", "entries must lie in (0, 0.5)"));
    }
    Ok(())
}

/// Runs the ε-ladder with the default serial matrix builder.
pub fn limiting_distribution(
    norm: &SocialNorm,
    space: &ConfigSpace,
    ladder: &[f64],
    tie: TieRule,
) -> Result<LimitingDistribution> {
    limiting_distribution_with(norm, space, ladder, tie, build_transition_matrix)
}

/// Runs the ε-ladder with a caller-supplied matrix builder (for example a
/// parallel one). The support is every configuration whose weight exceeds
/// [`support_threshold`] on each of the last two rungs.
pub fn limiting_distribution_with<F>(
    norm: &SocialNorm,
    space: &ConfigSpace,
    ladder: &[f64],
    tie: TieRule,
    build: F,
) -> Result<LimitingDistribution>
where
    F: Fn(&SocialNorm, &ConfigSpace, TieRule) -> Result<TransitionMatrix>,
{
    check_ladder(ladder)?;
    check_space(norm, space)?;
    let mut rungs = Vec::with_capacity(ladder.len());
    for &eps in ladder {
        let nm = norm.with_params(norm.params().with_epsilon(eps)?)?;
        let p = build(&nm, space, tie)?;
        let st = stationary_distribution(&p)?;
        let underflow = st.weights.iter().filter(|&&w| w == 0.0).count();
        rungs.push(LadderRung {
            epsilon: eps,
            weights: st.weights,
            residual: st.residual,
            underflow,
        });
    }
    let tail = &rungs[rungs.len().saturating_sub(2)..];
    let support = (0..space.len())
        .filter(|&i| {
            tail.iter()
                .all(|r| r.weights[i] > support_threshold(r.epsilon))
        })
        .collect();
    Ok(LimitingDistribution { rungs, support })
}

/// Absorbing configurations by two independent routes.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsorbingReport {
    pub bounds: AbsorbingBounds,
    /// From the bimodal incentive conditions.
    pub analytic: Vec<usize>,
    /// States with `p(μ|μ) = 1` in the error-free chain.
    pub numeric: Vec<usize>,
    /// Closed communicating classes of the error-free chain.
    pub classes: Vec<Vec<usize>>,
}

impl AbsorbingReport {
    pub fn agrees(&self) -> bool {
        self.analytic == self.numeric
    }

    pub fn check(&self) -> Result<()> {
        if self.agrees() {
            Ok(())
        } else {
            Err(Error::AbsorbingMismatch {
                analytic: self.analytic.clone(),
                numeric: self.numeric.clone(),
            })
        }
    }
}

const BOUND_TOLERANCE: f64 = 1e-9;

/// Absorbing configurations predicted without running the chain.
///
/// `μ₀` always absorbs; `μ_N` absorbs iff `δb > c`. A bimodal census with
/// `m` users at `L` absorbs when reputation-`L` users keep complying
/// (`m > B̲`) and reputation-0 users keep defecting (`m <= B̄`, strict under
/// [`TieRule::FairCoin`]). With `m = 1` the lone good user serves nobody
/// whatever it plays, so only the bad users' incentive matters.
pub fn analytic_absorbing(norm: &SocialNorm, space: &ConfigSpace, tie: TieRule) -> Result<Vec<usize>> {
    check_space(norm, space)?;
    let n = norm.n();
    let l = norm.l();
    let p = norm.params();
    let bounds = absorbing_bounds(norm);
    let tol = |x: f64| BOUND_TOLERANCE * x.abs().max(1.0);
    let mut out = Vec::new();
    for (i, counts) in space.iter().enumerate() {
        if counts[1..l].iter().any(|&x| x > 0) {
            continue;
        }
        let m = counts[l];
        let mf = m as f64;
        let bad_defects = match tie {
            TieRule::LargerThreshold => mf <= bounds.b_upper + tol(bounds.b_upper),
            TieRule::FairCoin => mf < bounds.b_upper - tol(bounds.b_upper),
        };
        let good_complies = m == 1 || mf > bounds.b_lower + tol(bounds.b_lower);
        let absorbing = if m == 0 {
            true
        } else if m == n {
            p.delta() * p.b() > p.c()
        } else {
            good_complies && bad_defects
        };
        if absorbing {
            out.push(i);
        }
    }
    Ok(out)
}

/// Compares the analytic absorbing set with the error-free chain.
pub fn classify_absorbing(
    norm: &SocialNorm,
    space: &ConfigSpace,
    tie: TieRule,
) -> Result<AbsorbingReport> {
    let exact = norm.with_params(norm.params().with_epsilon(0.0)?)?;
    let p0 = build_transition_matrix(&exact, space, tie)?;
    let numeric = (0..space.len())
        .filter(|&i| p0.prob(i, i) >= 1.0 - ROW_TOLERANCE)
        .collect();
    Ok(AbsorbingReport {
        bounds: absorbing_bounds(norm),
        analytic: analytic_absorbing(norm, space, tie)?,
        numeric,
        classes: p0.closed_classes(),
    })
}
