//! Closed-form solutions of the Euler equation `u^2 Q'' + 2Q = eps K u`,
//! `u = t - gamma`, and the positivity intervals of those solutions.
//!
//! The general solution is the linear particular solution `eps K u / 2`
//! plus `|u|^(1/2) [A cos(w log|u|) + B sin(w log|u|)]` with `w = sqrt(7)/2`.

use crate::error::{Error, Result};

pub const SQRT_7: f64 = 2.645_751_311_064_590_6;

const OMEGA: f64 = SQRT_7 / 2.0;

/// A sign `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// Sign of a nonzero real; zero maps to `Plus`.
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn from_value(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Sign::Plus)
        } else if v == -1.0 {
            Ok(Sign::Minus)
        } else {
            Err(Error::InvalidParameter(format!("sign must be +1 or -1, got {v}")))
        }
    }
}

/// Coefficients selecting one solution of the Euler equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QSpec {
    pub k: f64,
    pub gamma: f64,
    pub eps: Sign,
    pub a: f64,
    pub b: f64,
}

impl QSpec {
    pub fn new(k: f64, gamma: f64, eps: Sign, a: f64, b: f64) -> Self {
        Self { k, gamma, eps, a, b }
    }

    pub fn is_einstein(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }
}

/// `Q`, `Q'`, `Q''` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QValues {
    pub q: f64,
    pub dq: f64,
    pub d2q: f64,
}

pub fn q_eval(spec: &QSpec, t: f64) -> Result<QValues> {
    let u = t - spec.gamma;
    if u == 0.0 || !u.is_finite() {
        return Err(Error::AtSingularity {
            t,
            gamma: spec.gamma,
        });
    }
    let s = u.abs();
    let (sn, cs) = (OMEGA * s.ln()).sin_cos();
    let (a, b) = (spec.a, spec.b);
    let a1 = 0.5 * a + OMEGA * b;
    let b1 = 0.5 * b - OMEGA * a;
    let a2 = -0.5 * a1 + OMEGA * b1;
    let b2 = -0.5 * b1 - OMEGA * a1;
    let root = s.sqrt();
    let f = root * (a * cs + b * sn);
    let df = (a1 * cs + b1 * sn) / root;
    let d2f = (a2 * cs + b2 * sn) / (s * root);
    let ek = spec.eps.value() * spec.k;
    Ok(QValues {
        q: 0.5 * ek * u + f,
        dq: 0.5 * ek + u.signum() * df,
        d2q: d2f,
    })
}

/// `|u^2 Q'' + 2Q - eps K u| / (1 + |Q|)`.
pub fn ode_residual(spec: &QSpec, t: f64) -> Result<f64> {
    let v = q_eval(spec, t)?;
    let u = t - spec.gamma;
    Ok((u * u * v.d2q + 2.0 * v.q - spec.eps.value() * spec.k * u).abs() / (1.0 + v.q.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Zero,
    Blowup,
    DomainEdge,
}

/// A maximal subinterval of the scanned range on which `Q > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityInterval {
    pub lo: f64,
    pub hi: f64,
    pub q_lo_slope: f64,
    pub q_hi_slope: f64,
    pub lo_kind: BoundaryKind,
    pub hi_kind: BoundaryKind,
}

impl PositivityInterval {
    pub fn both_zero(&self) -> bool {
        self.lo_kind == BoundaryKind::Zero && self.hi_kind == BoundaryKind::Zero
    }
}

fn check_range(spec: &QSpec, t_lo: f64, t_hi: f64) -> Result<()> {
    if !(t_lo < t_hi) || !t_lo.is_finite() || !t_hi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "empty scan range [{t_lo}, {t_hi}]"
        )));
    }
    if t_lo <= spec.gamma && spec.gamma <= t_hi {
        return Err(Error::StraddlesSingularity {
            lo: t_lo,
            hi: t_hi,
            gamma: spec.gamma,
        });
    }
    Ok(())
}

/// Grid of `grid + 1` points on `[t_lo, t_hi]`, uniform in `log|t - gamma|`
/// and sorted ascending in t.
pub fn log_grid(spec: &QSpec, t_lo: f64, t_hi: f64, grid: usize) -> Result<Vec<f64>> {
    check_range(spec, t_lo, t_hi)?;
    let g = spec.gamma;
    let (s0, s1) = ((t_lo - g).abs().ln(), (t_hi - g).abs().ln());
    let side = if t_lo > g { 1.0 } else { -1.0 };
    let mut pts: Vec<f64> = (0..=grid)
        .map(|i| g + side * (s0 + (s1 - s0) * i as f64 / grid as f64).exp())
        .collect();
    pts.sort_by(f64::total_cmp);
    pts[0] = t_lo;
    pts[grid] = t_hi;
    Ok(pts)
}

fn bisect_root(spec: &QSpec, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut q_lo = q_eval(spec, lo)?.q;
    for _ in 0..200 {
        if hi - lo <= 1e-12 * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let q_mid = q_eval(spec, mid)?.q;
        if q_mid == 0.0 {
            return Ok(mid);
        }
        if (q_mid > 0.0) == (q_lo > 0.0) {
            lo = mid;
            q_lo = q_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Zeros of Q on `[t_lo, t_hi]` located from sign changes on the log grid.
pub fn sign_changes(spec: &QSpec, t_lo: f64, t_hi: f64, grid: usize) -> Result<Vec<f64>> {
    if grid < 100 {
        return Err(Error::InvalidParameter(format!("grid must be >= 100, got {grid}")));
    }
    let pts = log_grid(spec, t_lo, t_hi, grid)?;
    let vals = pts
        .iter()
        .map(|&t| q_eval(spec, t).map(|v| v.q))
        .collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for w in 0..grid {
        let (a, b) = (vals[w], vals[w + 1]);
        if a == 0.0 && w > 0 {
            roots.push(pts[w]);
        } else if a != 0.0 && b != 0.0 && (a > 0.0) != (b > 0.0) {
            roots.push(bisect_root(spec, pts[w], pts[w + 1])?);
        }
    }
    Ok(roots)
}

pub fn positivity_scan(
    spec: &QSpec,
    t_lo: f64,
    t_hi: f64,
    grid: usize,
) -> Result<Vec<PositivityInterval>> {
    let roots = sign_changes(spec, t_lo, t_hi, grid)?;
    let mut cuts = Vec::with_capacity(roots.len() + 2);
    cuts.push((t_lo, BoundaryKind::DomainEdge));
    cuts.extend(roots.iter().map(|&r| (r, BoundaryKind::Zero)));
    cuts.push((t_hi, BoundaryKind::DomainEdge));
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let ((lo, lo_kind), (hi, hi_kind)) = (w[0], w[1]);
        if !(lo < hi) || q_eval(spec, 0.5 * (lo + hi))?.q <= 0.0 {
            continue;
        }
        out.push(PositivityInterval {
            lo,
            hi,
            q_lo_slope: q_eval(spec, lo)?.dq,
            q_hi_slope: q_eval(spec, hi)?.dq,
            lo_kind,
            hi_kind,
        });
    }
    Ok(out)
}

/// Whether the endpoint slopes are opposite and nonzero: `Q'(lo) > 0` and
/// `|Q'(lo) + Q'(hi)| <= tol |Q'(lo)|`.
pub fn boundary_match(interval: &PositivityInterval, tol: f64) -> Result<bool> {
    if !interval.both_zero() {
        return Err(Error::NonZeroBoundary);
    }
    let (lo, hi) = (interval.q_lo_slope, interval.q_hi_slope);
    Ok(lo > 0.0 && (lo + hi).abs() <= tol * lo.abs())
}
