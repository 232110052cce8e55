//! The function `F(a) = exp(-a cot c) sin a`, `c = arctan sqrt(7)`, and the
//! level-matching involution `beta` of `[0, pi]` defined by
//! `F(beta(a)) = F(a)`, `beta(c) = c`.
//!
//! On `[0, c)` the map satisfies `beta' < -1`, which is what rules out a
//! positive solution of the Euler equation vanishing at both ends of an
//! interval with opposite endpoint slopes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ode_q::{q_eval, QSpec, Sign, SQRT_7};

/// `arctan(sqrt 7)`.
pub fn c_const() -> f64 {
    SQRT_7.atan()
}

/// `cot c = 1/sqrt(7)`.
pub fn cot_c() -> f64 {
    1.0 / SQRT_7
}

/// `F^{(order)}(alpha) = (-1)^order exp(-alpha cot c) sin(alpha - order c) / sin^order c`.
pub fn f_eval(alpha: f64, order: u32) -> f64 {
    let c = c_const();
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    sign * (-alpha * cot_c()).exp() * (alpha - order as f64 * c).sin() / c.sin().powi(order as i32)
}

const BISECT_TOL: f64 = 1e-13;

/// Bisection on `[lo, hi]` for `F(x) = level`, where `F - level` is
/// nonnegative at `lo` side when `positive_at_lo` and crosses once.
fn bisect_level(mut lo: f64, mut hi: f64, level: f64, positive_at_lo: bool) -> f64 {
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let above = f_eval(mid, 0) - level > 0.0;
        if above == positive_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `beta(alpha)` for `alpha` in `[0, pi]`.
pub fn beta_of(alpha: f64) -> Result<f64> {
    let c = c_const();
    if !(0.0..=PI).contains(&alpha) {
        return Err(Error::OutOfDomain {
            value: alpha,
            domain: "[0, pi]",
        });
    }
    if alpha == c {
        return Ok(c);
    }
    let level = f_eval(alpha, 0);
    if alpha < c {
        // F - level > 0 at c and <= 0 (up to roundoff) at pi.
        let at_end = f_eval(PI, 0) - level;
        if f_eval(c, 0) - level <= 0.0 || at_end > 1e-15 {
            return Err(Error::Bracketing(format!("alpha = {alpha} on [c, pi]")));
        }
        Ok(bisect_level(c, PI, level, true))
    } else {
        let at_start = f_eval(0.0, 0) - level;
        if f_eval(c, 0) - level <= 0.0 || at_start > 1e-15 {
            return Err(Error::Bracketing(format!("alpha = {alpha} on [0, c]")));
        }
        Ok(bisect_level(0.0, c, level, false))
    }
}

/// Sampled level-matching map on a uniform grid of `[0, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMap {
    pub c: f64,
    pub grid: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub beta_prime_values: Vec<f64>,
}

fn ratio_prime(alpha: f64, beta: f64) -> f64 {
    f_eval(alpha, 1) / f_eval(beta, 1)
}

const NEAR_C: f64 = 1e-6;

pub fn beta_build(samples: usize) -> Result<BetaMap> {
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "samples must be >= 1000, got {samples}"
        )));
    }
    let c = c_const();
    let mut grid: Vec<f64> = (0..samples)
        .map(|i| PI * i as f64 / (samples - 1) as f64)
        .collect();
    grid[samples - 1] = PI;
    let pos = grid.partition_point(|&a| a < c);
    grid.insert(pos, c);
    grid.dedup();
    let beta_values = grid.iter().map(|&a| beta_of(a)).collect::<Result<Vec<_>>>()?;
    let beta_prime_values = grid
        .iter()
        .zip(&beta_values)
        .map(|(&a, &b)| if (a - c).abs() < NEAR_C { -1.0 } else { ratio_prime(a, b) })
        .collect();
    if beta_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Bracketing("beta is not strictly decreasing".into()));
    }
    Ok(BetaMap {
        c,
        grid,
        beta_values,
        beta_prime_values,
    })
}

/// `beta'(alpha) = F'(alpha) / F'(beta(alpha))` on `[0, c)`, with the exact
/// value `-1` returned within `1e-6` of c.
pub fn beta_prime(map: &BetaMap, alpha: f64) -> Result<f64> {
    let c = map.c;
    if (alpha - c).abs() < NEAR_C {
        return Ok(-1.0);
    }
    if !(0.0..c).contains(&alpha) {
        return Err(Error::OutOfDomain {
            value: alpha,
            domain: "[0, c)",
        });
    }
    let k = map.grid.partition_point(|&a| a <= alpha).saturating_sub(1);
    let (lo, hi) = (map.beta_values[k + 1], map.beta_values[k]);
    let beta = bisect_level(lo.max(c), hi, f_eval(alpha, 0), true);
    Ok(ratio_prime(alpha, beta))
}

/// A quoted constant compared with its computed value.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotedCheck {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
}

fn quoted(name: &'static str, value: f64, expected: f64, tol: f64) -> QuotedCheck {
    QuotedCheck {
        name,
        value,
        expected,
        tol,
        pass: (value - expected).abs() <= tol,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub c: f64,
    pub three_c_minus_pi: f64,
    pub second_derivative_ratio: f64,
    pub alpha0: f64,
    pub beta_at_alpha0: f64,
    pub beta_prime_at_0: f64,
    pub beta_prime_at_alpha0: f64,
    pub beta_prime_at_c: f64,
    pub max_beta_prime: f64,
    pub argmax_beta_prime: f64,
    /// `max beta' < -1` on the scanned grid.
    pub verdict: bool,
    pub checks: Vec<QuotedCheck>,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.verdict && self.checks.iter().all(|c| c.pass)
    }
}

/// Solution of `F(alpha0) = F(2c)` in `[0, c)`.
pub fn alpha0() -> Result<f64> {
    beta_of(2.0 * c_const())
}

pub fn verify_lemma(grid: usize, margin: f64) -> Result<LemmaReport> {
    if grid < 10_000 {
        return Err(Error::InvalidParameter(format!("grid must be >= 10^4, got {grid}")));
    }
    let c = c_const();
    if !(margin > 0.0 && margin < c) {
        return Err(Error::InvalidParameter(format!("margin must lie in (0, c), got {margin}")));
    }
    let map = beta_build(1000)?;
    let end = c - margin;
    let (mut max_bp, mut argmax) = (f64::NEG_INFINITY, 0.0);
    for i in 0..grid {
        let a = end * i as f64 / (grid - 1) as f64;
        let bp = beta_prime(&map, a)?;
        if bp > max_bp {
            max_bp = bp;
            argmax = a;
        }
    }

    let three_c_minus_pi = 3.0 * c - PI;
    let ratio = f_eval(0.0, 2) / f_eval(c, 2);
    let a0 = alpha0()?;
    let beta_a0 = beta_of(a0)?;
    let bp0 = beta_prime(&map, 0.0)?;
    let bp_a0 = beta_prime(&map, a0)?;
    let bp_c = beta_prime(&map, c)?;

    let mut window = quoted("3c - pi in (0, pi/4)", three_c_minus_pi, PI / 8.0, PI / 8.0);
    window.pass = three_c_minus_pi > 0.0 && three_c_minus_pi < PI / 4.0;
    let mut above_one = quoted("F''(0)/F''(c) > 1", ratio, 1.0, 0.0);
    above_one.pass = ratio > 1.0;
    let mut exact = quoted("beta'(c)", bp_c, -1.0, 0.0);
    exact.pass = bp_c == -1.0;
    let mut max_check = quoted("max beta' < -1", max_bp, -1.0, 0.0);
    max_check.pass = max_bp < -1.0;
    let checks = vec![
        quoted("c", c, 1.209429, 1e-5),
        quoted("3c - pi", three_c_minus_pi, 0.4867, 1e-3),
        window,
        quoted("2 exp(c cot c) cos c", 2.0 * (c * cot_c()).exp() * c.cos(), 1.169, 1e-3),
        above_one,
        quoted("beta(0)", beta_of(0.0)?, PI, 1e-9),
        quoted("alpha0", a0, 0.3017, 1e-3),
        quoted("beta(alpha0)", beta_a0, 2.418858, 1e-4),
        quoted("beta'(alpha0)", bp_a0, -1.8755, 1e-3),
        exact,
        max_check,
    ];
    Ok(LemmaReport {
        c,
        three_c_minus_pi,
        second_derivative_ratio: ratio,
        alpha0: a0,
        beta_at_alpha0: beta_a0,
        beta_prime_at_0: bp0,
        beta_prime_at_alpha0: bp_a0,
        beta_prime_at_c: bp_c,
        max_beta_prime: max_bp,
        argmax_beta_prime: argmax,
        verdict: max_bp < -1.0,
        checks,
    })
}

/// Constants with `2 exp(-theta) Q = delta eps K exp(theta) + p sin(sqrt7 (theta - q))`
/// for `theta = log|t - gamma| / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FReduction {
    pub delta: Sign,
    pub p_amp: f64,
    pub q_phase: f64,
}

pub fn reduce_to_f(spec: &QSpec) -> Result<FReduction> {
    if spec.is_einstein() {
        return Err(Error::InvalidParameter(
            "A = B = 0 has no oscillatory part".into(),
        ));
    }
    let p_amp = 2.0 * spec.a.hypot(spec.b);
    let q_phase = (-spec.a).atan2(spec.b) / SQRT_7;
    Ok(FReduction {
        delta: spec.eps,
        p_amp,
        q_phase,
    })
}

/// Largest `|lhs - rhs| / (1 + |lhs|)` of the reduced identity over `thetas`.
pub fn round_trip_residual(spec: &QSpec, red: &FReduction, thetas: &[f64]) -> Result<f64> {
    let delta = red.delta.value();
    let ek = spec.eps.value() * spec.k;
    let mut worst = 0.0_f64;
    for &th in thetas {
        let t = spec.gamma + delta * (2.0 * th).exp();
        let lhs = 2.0 * (-th).exp() * q_eval(spec, t)?.q;
        let rhs = delta * ek * th.exp() + red.p_amp * (SQRT_7 * (th - red.q_phase)).sin();
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    Ok(worst)
}
