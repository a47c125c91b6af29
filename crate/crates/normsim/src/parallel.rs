//! Thread-pool drivers for the embarrassingly parallel pieces of the core:
//! transition-matrix rows, design grids and independent seeds.
//!
//! `NORMSIM_THREADS` caps the worker count; unset or `0` uses every core.

use std::sync::OnceLock;

use normsim_core::bestresponse::Solver;
use normsim_core::chain::{build_row, ConfigSpace, TransitionMatrix};
use normsim_core::design::{region_cell, Boundary, RegionCell};
use normsim_core::{Error as CoreError, SocialNorm, TieRule};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::{CliError, Result};

pub const THREADS_VAR: &str = "NORMSIM_THREADS";

/// Worker count requested through the environment, if any.
pub fn requested_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Config(format!(
                "{THREADS_VAR}={v}: expected a non-negative integer"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Process-wide pool sized from `NORMSIM_THREADS`.
pub fn pool() -> Result<&'static ThreadPool> {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    if let Some(p) = POOL.get() {
        return Ok(p);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = requested_threads()? {
        builder = builder.num_threads(n);
    }
    let built = builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(POOL.get_or_init(|| built))
}

/// Row-parallel equivalent of
/// [`normsim_core::chain::build_transition_matrix`].
pub fn build_transition_matrix(
    norm: &SocialNorm,
    space: &ConfigSpace,
    tie: TieRule,
) -> normsim_core::Result<TransitionMatrix> {
    if space.n() != norm.n() || space.l() != norm.l() {
        return Err(CoreError::CensusShape {
            expected: norm.l() + 1,
            got: space.l() + 1,
        });
    }
    let solver = Solver::default();
    let work = || {
        (0..space.len())
            .into_par_iter()
            .map(|i| build_row(norm, space, i, tie, &solver))
            .collect::<normsim_core::Result<Vec<_>>>()
    };
    let rows = match pool() {
        Ok(p) => p.install(work),
        Err(_) => work(),
    }?;
    Ok(TransitionMatrix::from_rows(norm.params().epsilon(), rows))
}

/// Cell-parallel equivalent of
/// [`normsim_core::design::feasible_region_grid`].
pub fn feasible_region_grid(
    delta_grid: &[f64],
    cb_grid: &[f64],
    l: usize,
    boundary: Boundary,
) -> Result<Vec<RegionCell>> {
    let cells: Vec<(f64, f64)> = delta_grid
        .iter()
        .flat_map(|&d| cb_grid.iter().map(move |&r| (d, r)))
        .collect();
    Ok(pool()?.install(|| {
        cells
            .par_iter()
            .map(|&(d, r)| region_cell(d, r, l, boundary))
            .collect()
    }))
}

/// Maps `f` over `items` on the pool, preserving order.
pub fn map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync,
{
    pool()?.install(|| items.par_iter().map(&f).collect())
}
