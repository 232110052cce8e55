//! Weakly Einstein predicates and residual reports.
//!
//! A metric is weakly Einstein when `trc R` is a multiple of g. In dimension
//! four this is equivalent to `6We = -se`, and on Kähler surfaces further to
//! `Rr` being a multiple of g and to `3W eta = -s eta` for the Einstein form
//! `eta = eJ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{
    act_on_form, act_on_sym, contraction_bundle, j_ops, multiple_of_metric, square,
    ComplexStructure, ContractionBundle, CurvTensor, Metric, MultipleOfMetric, SymTensor2, TwoForm,
    NORM_FLOOR,
};

/// `trc R` tested against g.
pub fn is_weakly_einstein(r: &CurvTensor, g: &Metric, tol: f64) -> Result<MultipleOfMetric> {
    let trc = crate::tensor::triple_contraction(r, g)?;
    multiple_of_metric(&trc, g, tol)
}

/// Relative size of `6We + se`, scaled so that it coincides with the
/// residual of `trc R` against g in dimension four.
fn we_defect(b: &ContractionBundle, g: &Metric) -> Result<f64> {
    let we = act_on_sym(&b.weyl, &b.einstein, g)?;
    let combo = we.matrix() * 6.0 + b.einstein.matrix() * b.scalar;
    Ok(g.norm(&combo) / (3.0 * trc_scale(b, g)))
}

fn trc_scale(b: &ContractionBundle, g: &Metric) -> f64 {
    g.norm(b.trc.matrix())
        .max((g.dim() as f64).sqrt())
        .max(NORM_FLOOR)
}

/// Residuals of the identities that hold for every algebraic curvature
/// tensor. Entries that only make sense in dimension four are `None` for
/// other dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub n: usize,
    /// `trc R - 2Rr + sr - 2r^2` against g.
    pub trf_residual: Option<f64>,
    /// `trc R - 2Wr - sr/3` against g.
    pub trm_residual: Option<f64>,
    /// `(n-2)^2 (trc R - trc W) + 2[2sr - 2(n-2)Rr - n r^2]` against g.
    pub trw1_residual: f64,
    /// `(n-2)(Rr - Wr) + 2r^2 - nsr/(n-1)` against g.
    pub trw2_residual: f64,
    /// `trc W` against g.
    pub trc_w_multiple_residual: Option<f64>,
    /// Residual of `trc R` against g.
    pub weakly_einstein_residual: f64,
    /// Scaled size of `6We + se`.
    pub we_defect: Option<f64>,
    /// Whether the two weakly Einstein tests reach the same verdict at `tol`.
    pub iff_consistency: Option<bool>,
}

impl IdentityReport {
    /// Largest residual among the identities applicable in this dimension.
    pub fn max_identity_residual(&self) -> f64 {
        [
            self.trf_residual,
            self.trm_residual,
            Some(self.trw1_residual),
            Some(self.trw2_residual),
            self.trc_w_multiple_residual,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }
}

pub fn identity_suite(r: &CurvTensor, g: &Metric, tol: f64) -> Result<IdentityReport> {
    let n = r.dim();
    let b = contraction_bundle(r, g)?;
    let nf = n as f64;
    let s = b.scalar;
    let ric = b.ricci.matrix();
    let rr = act_on_sym(r, &b.ricci, g)?;
    let wr = act_on_sym(&b.weyl, &b.ricci, g)?;
    let r2 = square(&b.ricci, g)?;
    let trc_w = crate::tensor::triple_contraction(&b.weyl, g)?;
    let residual = |m: DMatrix<f64>| -> Result<f64> {
        Ok(multiple_of_metric(&SymTensor2::symmetrized(m), g, tol)?.residual)
    };

    let trw1 = residual(
        (b.trc.matrix() - trc_w.matrix()) * (nf - 2.0).powi(2)
            + (ric * (2.0 * s) - rr.matrix() * (2.0 * (nf - 2.0)) - r2.matrix() * nf) * 2.0,
    )?;
    let trw2 = residual(
        (rr.matrix() - wr.matrix()) * (nf - 2.0) + r2.matrix() * 2.0 - ric * (nf * s / (nf - 1.0)),
    )?;
    let weakly_einstein_residual = multiple_of_metric(&b.trc, g, tol)?.residual;

    let mut report = IdentityReport {
        n,
        trf_residual: None,
        trm_residual: None,
        trw1_residual: trw1,
        trw2_residual: trw2,
        trc_w_multiple_residual: None,
        weakly_einstein_residual,
        we_defect: None,
        iff_consistency: None,
    };
    if n == 4 {
        report.trf_residual = Some(residual(
            b.trc.matrix() - rr.matrix() * 2.0 + ric * s - r2.matrix() * 2.0,
        )?);
        report.trm_residual = Some(residual(
            b.trc.matrix() - wr.matrix() * 2.0 - ric * (s / 3.0),
        )?);
        report.trc_w_multiple_residual = Some(multiple_of_metric(&trc_w, g, tol)?.residual);
        let defect = we_defect(&b, g)?;
        report.we_defect = Some(defect);
        report.iff_consistency = Some((weakly_einstein_residual <= tol) == (defect <= tol));
    }
    Ok(report)
}

/// Outcome of matching a traceless symmetric tensor against the spectrum
/// `(a, a, -a, -a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub spectrum_ok: bool,
    pub a_value: f64,
    /// Generalized eigenvalues of e with respect to g, ascending.
    pub eigenvalues: Vec<f64>,
    /// Residual of `sr - 2r^2` against g for `r = e + sg/4`; only computed
    /// when the spectrum matches.
    pub trq_residual: Option<f64>,
    /// `trc R - 2Rr` is then a multiple of g.
    pub rrr_applicable: bool,
}

/// Check that a traceless `e` has spectrum `(a, a, -a, -a)`; `scalar` is the
/// scalar curvature used to rebuild `r = e + sg/4` for the quadratic identity.
pub fn kahler_spectrum_check(
    e: &SymTensor2,
    g: &Metric,
    scalar: f64,
    tol: f64,
) -> Result<SpectrumReport> {
    let n = e.dim();
    if n != 4 || g.dim() != 4 {
        return Err(Error::UnsupportedDimension { n, required: "== 4" });
    }
    let e_norm = g.norm(e.matrix());
    let trace = g.trace(e.matrix());
    let scale = tol * e_norm.max(1.0);
    if trace.abs() > scale {
        return Err(Error::NotTraceless(trace.abs() / e_norm.max(NORM_FLOOR)));
    }
    let (eigenvalues, _) = g.generalized_eigen(e.matrix());
    let a_value = (eigenvalues[2] + eigenvalues[3] - eigenvalues[0] - eigenvalues[1]) / 4.0;
    let expected = [-a_value, -a_value, a_value, a_value];
    let spectrum_ok = eigenvalues
        .iter()
        .zip(expected)
        .all(|(l, x)| (l - x).abs() <= scale);
    let trq_residual = if spectrum_ok {
        let r = SymTensor2::symmetrized(e.matrix() + g.matrix() * (scalar / 4.0));
        let r2 = square(&r, g)?;
        let combo = SymTensor2::symmetrized(r.matrix() * scalar - r2.matrix() * 2.0);
        Some(multiple_of_metric(&combo, g, tol)?.residual)
    } else {
        None
    };
    Ok(SpectrumReport {
        spectrum_ok,
        a_value,
        eigenvalues,
        trq_residual,
        rrr_applicable: spectrum_ok,
    })
}

/// The four algebraic characterizations of weakly Einstein Kähler surfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivReport {
    pub cond_a: bool,
    pub cond_b: bool,
    pub cond_c: bool,
    pub cond_d: bool,
    pub residual_a: f64,
    pub residual_b: f64,
    pub residual_c: f64,
    pub residual_d: f64,
    pub spectrum_ok: bool,
    pub a_value: f64,
    pub scalar: f64,
    /// Whether the Ricci tensor commutes with J, as it must for a Kähler metric.
    pub ricci_hermitian: bool,
}

impl EquivReport {
    pub fn all_agree(&self) -> bool {
        self.cond_a == self.cond_b && self.cond_b == self.cond_c && self.cond_c == self.cond_d
    }

    pub fn all_hold(&self) -> bool {
        self.cond_a && self.cond_b && self.cond_c && self.cond_d
    }
}

/// The Einstein form `eta = eJ`.
pub fn einstein_form(e: &SymTensor2, j: &ComplexStructure) -> Result<TwoForm> {
    Ok(TwoForm::antisymmetrized(j_ops(e, j)?.a_j))
}

pub fn equiv_conditions(
    r: &CurvTensor,
    g: &Metric,
    j: &ComplexStructure,
    tol: f64,
) -> Result<EquivReport> {
    let n = r.dim();
    if n != 4 {
        return Err(Error::UnsupportedDimension { n, required: "== 4" });
    }
    j.check_hermitian(g, 1e-10)?;
    let b = contraction_bundle(r, g)?;
    let ricci_hermitian = j_ops(&b.ricci, j)?.is_hermitian;

    let a = multiple_of_metric(&b.trc, g, tol)?;
    let rr = act_on_sym(r, &b.ricci, g)?;
    let bb = multiple_of_metric(&rr, g, tol)?;
    let residual_c = we_defect(&b, g)?;

    let eta = einstein_form(&b.einstein, j)?;
    let w_eta = act_on_form(&b.weyl, &eta, g)?;
    let combo = w_eta.matrix() * 3.0 + eta.matrix() * b.scalar;
    let residual_d = g.norm(&combo) / (3.0 * trc_scale(&b, g));

    let spectrum = kahler_spectrum_check(&b.einstein, g, b.scalar, tol)?;

    Ok(EquivReport {
        cond_a: a.is_multiple,
        cond_b: bb.is_multiple,
        cond_c: residual_c <= tol,
        cond_d: residual_d <= tol,
        residual_a: a.residual,
        residual_b: bb.residual,
        residual_c,
        residual_d,
        spectrum_ok: spectrum.spectrum_ok,
        a_value: spectrum.a_value,
        scalar: b.scalar,
        ricci_hermitian,
    })
}

/// Component test of `3W eta = -s eta` in an adapted orthonormal basis
/// `(u, Ju, v, Jv)` with `e u = a u`, `e v = -a v`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenbasisOracle {
    pub basis: DMatrix<f64>,
    pub a_value: f64,
    pub w1212: f64,
    pub w3434: f64,
    pub w1234: f64,
    /// Largest deviation from the expected Weyl components, scaled by the
    /// square root of the size of `trc R`.
    pub residual: f64,
    pub holds: bool,
}

/// Returns `None` when e vanishes (no adapted basis) or the Ricci tensor is
/// not J-invariant.
pub fn eigenbasis_oracle(
    r: &CurvTensor,
    g: &Metric,
    j: &ComplexStructure,
    tol: f64,
) -> Result<Option<EigenbasisOracle>> {
    let n = r.dim();
    if n != 4 {
        return Err(Error::UnsupportedDimension { n, required: "== 4" });
    }
    let b = contraction_bundle(r, g)?;
    if !j_ops(&b.ricci, j)?.is_hermitian {
        return Ok(None);
    }
    let e_norm = g.norm(b.einstein.matrix());
    if e_norm <= tol * g.norm(b.ricci.matrix()).max(1.0) {
        return Ok(None);
    }
    let (values, vectors) = g.generalized_eigen(b.einstein.matrix());
    let a_value = (values[2] + values[3] - values[0] - values[1]) / 4.0;
    let u = vectors.column(3).into_owned();
    let v = vectors.column(0).into_owned();
    let mut basis = DMatrix::zeros(4, 4);
    basis.set_column(0, &u);
    basis.set_column(1, &j.apply(&u));
    basis.set_column(2, &v);
    basis.set_column(3, &j.apply(&v));

    let w = b.weyl.in_basis(&basis)?;
    let s = b.scalar;
    let mut worst = 0.0_f64;
    let mut check = |value: f64, expected: f64| worst = worst.max((value - expected).abs());
    check(w[[0, 1, 0, 1]], -s / 12.0);
    check(w[[2, 3, 2, 3]], -s / 12.0);
    check(w[[0, 1, 2, 3]], s / 4.0);
    for (p, q) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
        check(w[[0, 1, p, q]], 0.0);
        check(w[[2, 3, p, q]], 0.0);
    }
    let residual = worst / trc_scale(&b, g).sqrt();
    Ok(Some(EigenbasisOracle {
        w1212: w[[0, 1, 0, 1]],
        w3434: w[[2, 3, 2, 3]],
        w1234: w[[0, 1, 2, 3]],
        basis,
        a_value,
        residual,
        holds: residual <= tol,
    }))
}
