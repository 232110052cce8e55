//! Cohomogeneity-one Kähler metrics on a four-dimensional Lie-algebra frame.
//!
//! The frame `e1..e4` has brackets `[e2,e4] = 2p e3`, `[e2,e3] = q e4`,
//! `[e3,e4] = q e2` with `e1` central. A family parameter t satisfies
//! `d_{e1} t = 2 zeta eta theta` and is constant along `e2, e3, e4`. The
//! metric is `diag(zeta eta, zeta, zeta eta, zeta)` with
//! `zeta = p(gamma - t)/theta`, and `J e1 = e3`, `J e2 = e4`.
//!
//! The metric function `eta` is called `eta_fn` throughout to keep it apart
//! from the Einstein form.

use crate::error::{Error, Result};
use crate::ode_q::{q_eval, QSpec, Sign};
use crate::tensor::{ComplexStructure, CurvTensor, Metric, Orientation, SymTensor2};

/// `eta_fn` together with its first two t-derivatives.
pub type EtaJet = [f64; 3];

/// How `eta_fn` is obtained.
#[derive(Debug, Clone, Copy)]
pub enum EtaProfile {
    /// `eta_fn = Q / (4 zeta theta^2)` for the closed-form `Q`.
    FromQ(QSpec),
    Constant(f64),
    Custom(fn(f64) -> EtaJet),
}

#[derive(Debug, Clone, Copy)]
pub struct FamilyParams {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    pub gamma: f64,
    pub eta_fn: EtaProfile,
}

/// Structure constants: `brackets.c[i][j][m]` is the `e_m` component of `[e_i, e_j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Brackets {
    pub c: [[[f64; 4]; 4]; 4],
}

impl Brackets {
    pub fn new(p: f64, q: f64) -> Self {
        let mut c = [[[0.0; 4]; 4]; 4];
        let mut set = |i: usize, j: usize, m: usize, v: f64| {
            c[i][j][m] = v;
            c[j][i][m] = -v;
        };
        set(1, 3, 2, 2.0 * p);
        set(1, 2, 3, q);
        set(2, 3, 1, q);
        Self { c }
    }
}

/// Connection coefficients: `conn[i][j][m]` is the `e_m` component of `nabla_{e_i} e_j`.
pub type Connection = [[[f64; 4]; 4]; 4];

/// Everything attached to the frame at one value of t.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePoint {
    pub t: f64,
    pub zeta: f64,
    pub eta_fn: f64,
    pub g: Metric,
    pub j: ComplexStructure,
    pub conn: Connection,
    pub r: CurvTensor,
    pub ricci: SymTensor2,
    pub mu: f64,
    pub lambda: f64,
}

/// Positive orientation `(e1, Je1, e2, Je2) = (e1, e3, e2, e4)`.
pub fn family_orientation() -> Orientation {
    Orientation::from_permutation(&[0, 2, 1, 3]).expect("permutation frame")
}

pub fn family_complex_structure() -> ComplexStructure {
    ComplexStructure::from_pairs(4, &[(0, 2), (1, 3)]).expect("valid pairs")
}

impl FamilyParams {
    pub fn new(p: f64, q: f64, theta: f64, gamma: f64, eta_fn: EtaProfile) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q), ("theta", theta)] {
            if v == 0.0 || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and nonzero, got {v}"
                )));
            }
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be finite, got {gamma}")));
        }
        Ok(Self {
            p,
            q,
            theta,
            gamma,
            eta_fn,
        })
    }

    /// Parameters realizing a `QSpec`: `q = K/(4 eps theta)` and p of modulus
    /// `p_abs` with the sign making `zeta > 0` on the side `sign(t - gamma) = eps`.
    pub fn from_qspec(spec: QSpec, theta: f64, p_abs: f64) -> Result<Self> {
        if spec.k == 0.0 {
            return Err(Error::InvalidParameter(
                "K = 0 forces q = 0, which is excluded".into(),
            ));
        }
        if p_abs <= 0.0 {
            return Err(Error::InvalidParameter(format!("|p| must be positive, got {p_abs}")));
        }
        let eps = spec.eps.value();
        let q = spec.k / (4.0 * eps * theta);
        let p = -eps * theta.signum() * p_abs;
        Self::new(p, q, theta, spec.gamma, EtaProfile::FromQ(spec))
    }

    pub fn brackets(&self) -> Brackets {
        Brackets::new(self.p, self.q)
    }

    /// `zeta` and `zeta'`.
    pub fn zeta(&self, t: f64) -> (f64, f64) {
        (self.p * (self.gamma - t) / self.theta, -self.p / self.theta)
    }

    pub fn eta_jet(&self, t: f64) -> Result<EtaJet> {
        match self.eta_fn {
            EtaProfile::Constant(c) => Ok([c, 0.0, 0.0]),
            EtaProfile::Custom(f) => Ok(f(t)),
            EtaProfile::FromQ(spec) => {
                let v = q_eval(&spec, t)?;
                let d = 4.0 * self.p * self.theta * (self.gamma - t);
                let dd = -4.0 * self.p * self.theta;
                Ok([
                    v.q / d,
                    v.dq / d - v.q * dd / (d * d),
                    v.d2q / d - 2.0 * v.dq * dd / (d * d) + 2.0 * v.q * dd * dd / (d * d * d),
                ])
            }
        }
    }

    fn check_point(&self, t: f64) -> Result<(f64, f64, EtaJet)> {
        if t == self.gamma {
            return Err(Error::AtSingularity {
                t,
                gamma: self.gamma,
            });
        }
        let (zeta, dzeta) = self.zeta(t);
        if !(zeta > 0.0) {
            return Err(Error::Positivity(format!("zeta = {zeta} at t = {t}")));
        }
        let eta = self.eta_jet(t)?;
        if !(eta[0] > 0.0) {
            return Err(Error::Positivity(format!("eta_fn = {} at t = {t}", eta[0])));
        }
        Ok((zeta, dzeta, eta))
    }

    /// Check that `zeta`, `eta_fn` (and hence Q) stay positive on `[t_min, t_max]`
    /// and that `sign(t - gamma)` agrees with the eps of the underlying `QSpec`.
    pub fn validate_interval(&self, t_min: f64, t_max: f64) -> Result<()> {
        if !(t_min <= t_max) {
            return Err(Error::InvalidParameter(format!(
                "empty interval [{t_min}, {t_max}]"
            )));
        }
        if t_min <= self.gamma && self.gamma <= t_max {
            return Err(Error::StraddlesSingularity {
                lo: t_min,
                hi: t_max,
                gamma: self.gamma,
            });
        }
        if let EtaProfile::FromQ(spec) = self.eta_fn {
            if Sign::of(t_min - self.gamma) != spec.eps {
                return Err(Error::InvalidParameter(
                    "eps must equal sign(t - gamma) on the working interval".into(),
                ));
            }
        }
        const STEPS: usize = 256;
        for i in 0..=STEPS {
            let t = t_min + (t_max - t_min) * i as f64 / STEPS as f64;
            self.check_point(t)?;
        }
        Ok(())
    }

    /// Closed-form Levi-Civita connection.
    pub fn connection(&self, t: f64) -> Result<Connection> {
        let (zeta, dzeta, [eta, deta, _]) = self.check_point(t)?;
        Ok(self.connection_from(zeta, dzeta, eta, deta))
    }

    fn connection_from(&self, zeta: f64, dzeta: f64, eta: f64, deta: f64) -> Connection {
        let (p, q) = (self.p, self.q);
        let big_p = (dzeta * eta + zeta * deta) * self.theta;
        let pe = p * eta;
        let mut c = [[[0.0; 4]; 4]; 4];
        c[0][0][0] = big_p;
        c[0][1][1] = -pe;
        c[1][0][1] = -pe;
        c[0][2][2] = big_p;
        c[2][0][2] = big_p;
        c[0][3][3] = -pe;
        c[3][0][3] = -pe;
        c[1][1][0] = p;
        c[1][2][3] = -pe;
        c[1][3][2] = p;
        c[2][1][3] = -(pe + q);
        c[2][2][0] = -big_p;
        c[2][3][1] = pe + q;
        c[3][1][2] = -p;
        c[3][2][1] = pe;
        c[3][3][0] = p;
        c
    }
}

/// Evaluate metric, connection, curvature and Ricci tensor at t.
pub fn frame_point(params: &FamilyParams, t: f64) -> Result<FramePoint> {
    let (zeta, dzeta, [eta, deta, d2eta]) = params.check_point(t)?;
    let (p, q, th) = (params.p, params.q, params.theta);
    let ze = zeta * eta;
    let g = Metric::diagonal(&[ze, zeta, ze, zeta])?;
    let conn = params.connection_from(zeta, dzeta, eta, deta);

    let x = p * zeta * zeta * eta * deta * th;
    let d2_ze = 2.0 * dzeta * deta + zeta * d2eta;
    let mut r = CurvTensor::zeros(4);
    for (i, j, k, l) in [
        (0, 1, 0, 1),
        (0, 1, 2, 3),
        (0, 3, 0, 3),
        (0, 3, 1, 2),
        (1, 2, 1, 2),
        (2, 3, 2, 3),
    ] {
        r.set_with_symmetries(i, j, k, l, x);
    }
    r.set_with_symmetries(0, 2, 0, 2, -2.0 * d2_ze * th * ze * ze * th);
    r.set_with_symmetries(0, 2, 1, 3, 2.0 * x);
    r.set_with_symmetries(1, 3, 1, 3, -2.0 * p * (2.0 * p * eta + q) * zeta);

    let r11 = 2.0 * (3.0 * p * deta - zeta * d2eta * th) * ze * th;
    let r22 = 2.0 * p * zeta * deta * th - 2.0 * p * (2.0 * p * eta + q);
    let ricci = SymTensor2::diagonal(&[r11, r22, r11, r22]);

    Ok(FramePoint {
        t,
        zeta,
        eta_fn: eta,
        g,
        j: family_complex_structure(),
        conn,
        r,
        ricci,
        mu: r11 / ze,
        lambda: r22 / zeta,
    })
}

/// Koszul-formula connection for the given brackets, compared against the
/// closed form; returns the largest absolute coefficient deviation.
pub fn koszul_deviation(params: &FamilyParams, brackets: &Brackets, t: f64) -> Result<f64> {
    let (zeta, dzeta, [eta, deta, _]) = params.check_point(t)?;
    let closed = params.connection_from(zeta, dzeta, eta, deta);
    let gd = [zeta * eta, zeta, zeta * eta, zeta];
    let dgd_dt = [
        dzeta * eta + zeta * deta,
        dzeta,
        dzeta * eta + zeta * deta,
        dzeta,
    ];
    let e1_rate = 2.0 * zeta * eta * params.theta;
    let metric = |a: usize, b: usize| if a == b { gd[a] } else { 0.0 };
    let deriv = |i: usize, a: usize, b: usize| {
        if i == 0 && a == b {
            dgd_dt[a] * e1_rate
        } else {
            0.0
        }
    };
    let bracket_g = |i: usize, j: usize, k: usize| brackets.c[i][j][k] * gd[k];

    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let twice = deriv(i, j, k) + deriv(j, i, k) - deriv(k, i, j)
                    + bracket_g(i, j, k)
                    - bracket_g(j, k, i)
                    + bracket_g(k, i, j);
                let coeff = 0.5 * twice / metric(k, k);
                worst = worst.max((coeff - closed[i][j][k]).abs());
            }
        }
    }
    Ok(worst)
}

pub fn koszul_check(params: &FamilyParams, t: f64) -> Result<f64> {
    koszul_deviation(params, &params.brackets(), t)
}

/// Default finite-difference step `1e-5 max(1, |t - gamma|)`.
pub fn default_step(params: &FamilyParams, t: f64) -> f64 {
    1e-5 * (t - params.gamma).abs().max(1.0)
}

/// Curvature assembled from the connection and its central-difference
/// t-derivatives, compared with the closed form; returns the largest
/// absolute component deviation.
pub fn curvature_from_connection(params: &FamilyParams, t: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let fp = frame_point(params, t)?;
    let plus = params.connection(t + h)?;
    let minus = params.connection(t - h)?;
    let gam = &fp.conn;
    let c = params.brackets().c;
    let e1_rate = 2.0 * fp.zeta * fp.eta_fn * params.theta;
    let dgam = |i: usize, k: usize, m: usize| (plus[i][k][m] - minus[i][k][m]) / (2.0 * h) * e1_rate;
    let gd = [fp.g.matrix()[(0, 0)], fp.zeta, fp.g.matrix()[(2, 2)], fp.zeta];

    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut v = [0.0; 4];
                for (m, vm) in v.iter_mut().enumerate() {
                    for a in 0..4 {
                        *vm += c[i][j][a] * gam[a][k][m];
                        *vm += gam[i][k][a] * gam[j][a][m] - gam[j][k][a] * gam[i][a][m];
                    }
                    if j == 0 {
                        *vm += dgam(i, k, m);
                    }
                    if i == 0 {
                        *vm -= dgam(j, k, m);
                    }
                }
                for l in 0..4 {
                    worst = worst.max((v[l] * gd[l] - fp.r[[i, j, k, l]]).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn check_k(params: &FamilyParams, spec: &QSpec) -> Result<()> {
    let expected = 4.0 * spec.eps.value() * params.q * params.theta;
    if (spec.k - expected).abs() > 1e-12 * spec.k.abs().max(1.0) {
        return Err(Error::InconsistentK {
            k: spec.k,
            expected,
        });
    }
    Ok(())
}

/// Residuals of the weakly Einstein equation `(t-gamma)^2 Q'' + 2Q = 4 q theta (t-gamma)`
/// and of the Einstein condition `Q = eps K (t-gamma)/2`, both relative to `1 + |Q|`.
pub fn we_residual(params: &FamilyParams, spec: &QSpec, t: f64) -> Result<(f64, f64)> {
    check_k(params, spec)?;
    let v = q_eval(spec, t)?;
    if !(v.q > 0.0) {
        return Err(Error::Positivity(format!("Q = {} at t = {t}", v.q)));
    }
    let u = t - spec.gamma;
    let scale = 1.0 + v.q.abs();
    let umq = (u * u * v.d2q + 2.0 * v.q - 4.0 * params.q * params.theta * u).abs() / scale;
    let einstein = (v.q - 0.5 * spec.eps.value() * spec.k * u).abs() / scale;
    Ok((umq, einstein))
}

/// Ricci eigenvalues on the horizontal and vertical planes computed from the
/// potential: `Y = Q' + Q/(t-gamma)`, `mu = -Y'/2`,
/// `lambda = (K - eps Y) / (2 eps (t-gamma))`.
pub fn ricci_eigs_potential_path(spec: &QSpec, t: f64) -> Result<(f64, f64)> {
    let v = q_eval(spec, t)?;
    if !(v.q > 0.0) {
        return Err(Error::Positivity(format!("Q = {} at t = {t}", v.q)));
    }
    let u = t - spec.gamma;
    let eps = spec.eps.value();
    let y = v.dq + v.q / u;
    let dy = v.d2q + v.dq / u - v.q / (u * u);
    Ok((-0.5 * dy, (spec.k - eps * y) / (2.0 * eps * u)))
}
