//! The designer's problem: choose the social threshold `h` so that full
//! cooperation is the unique stochastically stable configuration.
//!
//! Everything reduces to the sign of
//! `g(H) = δ^H b - δ^(H-1) c - (1 - δ^H) c H`, which is strictly decreasing
//! in `H` whenever `δ b > c`. A threshold `h` is feasible when `δ > c/b`
//! and `g(h) > 0` (or `g(h) >= 0` under [`Boundary::Lenient`]).

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::math::{abs, powi};
use crate::{CommunityParams, SocialNorm};

const ROOT_TOLERANCE: f64 = 1e-9;

/// Comparison used at `g(h) = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `h < H`.
    #[default]
    Strict,
    /// `h <= H`.
    Lenient,
}

/// Census thresholds for bimodal absorbing configurations: reputation-`L`
/// users keep complying above `b_lower`, and reputation-0 users keep
/// defecting up to `b_upper`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingBounds {
    pub b_lower: f64,
    pub b_upper: f64,
}

impl AbsorbingBounds {
    /// Report errors needed to leave the all-defect configuration: enough
    /// users must each climb `h` levels to exceed the upper bound.
    pub fn escape_from_bottom(&self, h: usize) -> f64 {
        libm::ceil(self.b_upper) * h as f64
    }

    /// Report errors needed to drag the all-cooperate configuration below
    /// the lower bound.
    pub fn escape_from_top(&self, n: usize) -> f64 {
        n as f64 - libm::floor(self.b_lower)
    }
}

/// `B̲ = (1-δ)c / (δ(b-c)) (N-1) + 1` and
/// `B̄ = (1-δ^h)c / (δ^h(b-c)) (N-1)`.
pub fn absorbing_bounds(norm: &SocialNorm) -> AbsorbingBounds {
    let p = norm.params();
    let (b, c, delta) = (p.b(), p.c(), p.delta());
    let scale = (norm.n() - 1) as f64;
    let dh = powi(delta, norm.h() as i32);
    AbsorbingBounds {
        b_lower: (1.0 - delta) * c / (delta * (b - c)) * scale + 1.0,
        b_upper: (1.0 - dh) * c / (dh * (b - c)) * scale,
    }
}

/// `g(H) = δ^H b - δ^(H-1) c - (1 - δ^H) c H` for real `H`.
pub fn g(delta: f64, b: f64, c: f64, h: f64) -> f64 {
    let dh = libm::pow(delta, h);
    dh * b - libm::pow(delta, h - 1.0) * c - (1.0 - dh) * c * h
}

fn g_params(p: &CommunityParams, h: f64) -> f64 {
    g(p.delta(), p.b(), p.c(), h)
}

/// Whether threshold `h` makes full cooperation the unique stable outcome.
pub fn feasibility_test(params: &CommunityParams, h: usize, boundary: Boundary) -> bool {
    feasible(params.delta(), params.b(), params.c(), h, boundary)
}

fn feasible(delta: f64, b: f64, c: f64, h: usize, boundary: Boundary) -> bool {
    if h == 0 || delta * b <= c {
        return false;
    }
    let v = g(delta, b, c, h as f64);
    match boundary {
        Boundary::Strict => v > 0.0,
        Boundary::Lenient => v >= 0.0,
    }
}

/// Root of `g` on `H > 0`, or `None` when `δ <= c/b`.
///
/// Unlike [`solve_h`] this also returns roots below 1, which is what the
/// feasible-region plot needs for a continuous `H` surface.
pub fn h_root(delta: f64, b: f64, c: f64) -> Option<f64> {
    if !(delta * b > c) || delta >= 1.0 {
        return None;
    }
    // g(0) = (δb - c)/δ > 0 and g → -∞, so double until the sign flips.
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(delta, b, c, hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    while hi - lo > ROOT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if g(delta, b, c, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Real solution `H` of `δ^H b - δ^(H-1) c = (1 - δ^H) c H`, or `None` when
/// no integer threshold can be feasible (`δ <= c/b` or `g(1) < 0`).
pub fn solve_h(params: &CommunityParams) -> Option<f64> {
    if g_params(params, 1.0) < 0.0 {
        return None;
    }
    h_root(params.delta(), params.b(), params.c()).map(|h| h.max(1.0))
}

/// Largest feasible `h <= l`.
pub fn max_feasible_h(params: &CommunityParams, l: usize, boundary: Boundary) -> Option<usize> {
    max_h(params.delta(), params.b(), params.c(), l, boundary)
}

fn max_h(delta: f64, b: f64, c: f64, l: usize, boundary: Boundary) -> Option<usize> {
    (1..=l).rev().find(|&h| feasible(delta, b, c, h, boundary))
}

/// Design summary for one norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignVerdict {
    pub delta_ok: bool,
    pub h_root: Option<f64>,
    pub max_feasible_h: Option<usize>,
    pub g_at_h: f64,
    pub unique_ssc_is_mu_n: bool,
}

impl DesignVerdict {
    pub fn for_norm(norm: &SocialNorm, boundary: Boundary) -> Self {
        let p = norm.params();
        Self {
            delta_ok: p.delta() * p.b() > p.c(),
            h_root: solve_h(p),
            max_feasible_h: max_feasible_h(p, norm.l(), boundary),
            g_at_h: g_params(p, norm.h() as f64),
            unique_ssc_is_mu_n: feasibility_test(p, norm.h(), boundary),
        }
    }

    /// `|g(h)|` below `tol`: the verdict sits on the indifference boundary.
    pub fn is_boundary(&self, tol: f64) -> bool {
        abs(self.g_at_h) < tol
    }
}

/// One cell of the (δ, c/b) design map. `h_root` is the real root of `g`
/// (also below 1), absent when `δ <= c/b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub delta: f64,
    pub c_over_b: f64,
    pub h_root: Option<f64>,
    pub max_feasible_h: Option<usize>,
}

pub fn region_cell(delta: f64, c_over_b: f64, l: usize, boundary: Boundary) -> RegionCell {
    RegionCell {
        delta,
        c_over_b,
        h_root: h_root(delta, 1.0, c_over_b),
        max_feasible_h: max_h(delta, 1.0, c_over_b, l, boundary),
    }
}

/// Row-major grid over `delta_grid x cb_grid` (δ varies slowest).
pub fn feasible_region_grid(
    delta_grid: &[f64],
    cb_grid: &[f64],
    l: usize,
    boundary: Boundary,
) -> Vec<RegionCell> {
    delta_grid
        .iter()
        .flat_map(|&d| cb_grid.iter().map(move |&r| region_cell(d, r, l, boundary)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(n: usize, b: f64, delta: f64) -> CommunityParams {
        CommunityParams::new(n, 3, b, 1.0, delta, 0.0, 1.0).unwrap()
    }

    #[test]
    fn bounds_examples() {
        let nm = SocialNorm::new(params(11, 3.0, 0.6), 1).unwrap();
        let ab = absorbing_bounds(&nm);
        assert!((ab.b_lower - 13.0 / 3.0).abs() < 1e-12);
        assert!((ab.b_upper - 10.0 / 3.0).abs() < 1e-12);
        let nm = SocialNorm::new(params(11, 3.0, 0.5), 2).unwrap();
        assert!((absorbing_bounds(&nm).b_upper - 15.0).abs() < 1e-12);
        let nm = SocialNorm::new(params(11, 3.0, 0.999_999), 1).unwrap();
        let ab = absorbing_bounds(&nm);
        assert!((ab.b_lower - 1.0).abs() < 1e-4 && ab.b_upper < 1e-4);
    }

    #[test]
    fn feasibility_examples() {
        let p = params(5, 5.0, 0.5);
        assert!(feasibility_test(&p, 1, Boundary::Strict));
        assert!(!feasibility_test(&p, 2, Boundary::Strict));
        let p = params(5, 3.0, 0.3);
        assert!((1..=3).all(|h| !feasibility_test(&p, h, Boundary::Lenient)));
    }

    #[test]
    fn root_examples() {
        let h = solve_h(&params(5, 5.0, 0.5)).unwrap();
        assert!(h > 1.0 && h < 2.0);
        assert!(g(0.5, 5.0, 1.0, h - 1e-6) >= 0.0 && g(0.5, 5.0, 1.0, h + 1e-6) <= 0.0);
        let p = params(5, 3.0, 0.5);
        assert_eq!(g(0.5, 3.0, 1.0, 1.0), 0.0);
        assert!((solve_h(&p).unwrap() - 1.0).abs() < 1e-8);
        assert!(!feasibility_test(&p, 1, Boundary::Strict));
        assert!(feasibility_test(&p, 1, Boundary::Lenient));
        assert_eq!(solve_h(&params(5, 3.0, 0.3)), None);
    }

    #[test]
    fn escape_costs_use_documented_rounding() {
        let ab = AbsorbingBounds {
            b_lower: 4.3,
            b_upper: 3.2,
        };
        assert_eq!(ab.escape_from_bottom(2), 8.0);
        assert_eq!(ab.escape_from_top(11), 7.0);
    }

    proptest! {
        #[test]
        fn feasibility_is_downward_closed(delta in 0.05f64..0.99, cb in 0.01f64..0.95, h in 2usize..6) {
            let p = CommunityParams::new(5, 6, 1.0, cb, delta, 0.0, 1.0).unwrap();
            if feasibility_test(&p, h, Boundary::Strict) {
                prop_assert!(feasibility_test(&p, h - 1, Boundary::Strict));
            }
        }

        #[test]
        fn feasibility_matches_basin_comparison(delta in 0.05f64..0.99, cb in 0.01f64..0.95, h in 1usize..4) {
            for n in [3usize, 11, 101] {
                let p = CommunityParams::new(n, 3, 1.0, cb, delta, 0.0, 1.0).unwrap();
                let nm = SocialNorm::new(p, h).unwrap();
                let ab = absorbing_bounds(&nm);
                let v = g(delta, 1.0, cb, h as f64);
                prop_assume!(v.abs() > 1e-9);
                let basin = n as f64 - ab.b_lower > ab.b_upper * h as f64
                    && ab.b_upper < (n - 1) as f64;
                prop_assert_eq!(feasibility_test(&p, h, Boundary::Strict), basin);
            }
        }

        #[test]
        fn root_brackets_sign_change(delta in 0.05f64..0.99, cb in 0.01f64..0.95) {
            if let Some(h) = h_root(delta, 1.0, cb) {
                prop_assert!(g(delta, 1.0, cb, (h - 1e-6).max(0.0)) >= -1e-12);
                prop_assert!(g(delta, 1.0, cb, h + 1e-6) <= 1e-12);
            } else {
                prop_assert!(delta <= cb);
            }
        }
    }
}
