//! Dense multilinear algebra on an n-dimensional real inner-product space.
//!
//! Every stored tensor is fully covariant and expressed in an arbitrary
//! (not necessarily orthonormal) frame; the [`Metric`] travels with each
//! operation and index raising goes through its cached inverse. Norms and
//! residuals are measured after passing to a g-orthonormal frame obtained
//! from the Cholesky factor of g, which makes every tolerance in this crate
//! frame-invariant.
//!
//! Curvature convention: `R[i][j][k][l] = g(R(e_i, e_j) e_k, e_l)` with the
//! Ricci tensor `r_ij = g^{pq} R_ipjq`, so that the round sphere of radius
//! one has `R_ijkl = g_ik g_jl - g_il g_jk` and positive Ricci curvature.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Default relative tolerance for "is a multiple of g" style decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Denominator floor used by relative residuals.
pub const NORM_FLOOR: f64 = 1e-300;

const SHAPE_TOL: f64 = 1e-10;

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn symmetry_defect(m: &DMatrix<f64>, sign: f64) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - sign * m[(j, i)]).abs());
        }
    }
    worst / scale
}

fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A positive definite inner product, with cached inverse and Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    chol_l: DMatrix<f64>,
}

impl Metric {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        let n = check_square(&g)?;
        if n < 2 {
            return Err(Error::UnsupportedDimension {
                n,
                required: ">= 2",
            });
        }
        let defect = symmetry_defect(&g, 1.0);
        if defect > 1e-12 {
            return Err(Error::NotSymmetric(defect));
        }
        let g = (&g + g.transpose()) * 0.5;
        let chol = g.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
        let g_inv = chol.inverse();
        let g_inv = (&g_inv + g_inv.transpose()) * 0.5;
        let chol_l = chol.l();
        Ok(Self { g, g_inv, chol_l })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("identity is a metric")
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(
            entries,
        )))
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.g_inv
    }

    pub fn determinant(&self) -> f64 {
        self.chol_l.diagonal().iter().product::<f64>().powi(2)
    }

    pub fn as_sym(&self) -> SymTensor2 {
        SymTensor2 { m: self.g.clone() }
    }

    /// Components `L^{-1} a L^{-T}` of a bilinear form in the orthonormal frame
    /// attached to the Cholesky factor `g = L L^T`.
    pub fn orthonormal_components(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let left = self
            .chol_l
            .solve_lower_triangular(a)
            .expect("Cholesky factor is nonsingular");
        let right = self
            .chol_l
            .solve_lower_triangular(&left.transpose())
            .expect("Cholesky factor is nonsingular");
        right.transpose()
    }

    /// Frobenius norm of a covariant 2-tensor in a g-orthonormal frame.
    pub fn norm(&self, a: &DMatrix<f64>) -> f64 {
        self.orthonormal_components(a).norm()
    }

    /// `g^{ij} a_ij`.
    pub fn trace(&self, a: &DMatrix<f64>) -> f64 {
        self.g_inv.component_mul(a).sum()
    }

    /// `a^{pq} = g^{pi} a_ij g^{jq}`.
    pub fn raise(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        &self.g_inv * a * &self.g_inv
    }

    /// Generalized eigenvalues of a symmetric form with respect to g, sorted
    /// ascending, with the matching g-orthonormal eigenvectors as columns.
    pub fn generalized_eigen(&self, a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
        let b = self.orthonormal_components(a);
        let b = (&b + b.transpose()) * 0.5;
        let eig = SymmetricEigen::new(b);
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let lt = self.chol_l.transpose();
        let mut vectors = DMatrix::zeros(n, n);
        let mut values = Vec::with_capacity(n);
        for (col, &k) in order.iter().enumerate() {
            values.push(eig.eigenvalues[k]);
            let y = eig.eigenvectors.column(k).into_owned();
            let x = lt
                .solve_upper_triangular(&y)
                .expect("Cholesky factor is nonsingular");
            vectors.set_column(col, &x);
        }
        (values, vectors)
    }
}

/// Read access to the components of a covariant 2-tensor.
pub trait Covariant2 {
    fn components(&self) -> &DMatrix<f64>;

    fn dim(&self) -> usize {
        self.components().nrows()
    }
}

impl Covariant2 for Metric {
    fn components(&self) -> &DMatrix<f64> {
        &self.g
    }
}

impl Covariant2 for DMatrix<f64> {
    fn components(&self) -> &DMatrix<f64> {
        self
    }
}

/// Symmetric covariant 2-tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor2 {
    m: DMatrix<f64>,
}

impl SymTensor2 {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square(&m)?;
        let defect = symmetry_defect(&m, 1.0);
        if defect > SHAPE_TOL {
            return Err(Error::NotSymmetric(defect));
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetric part of an arbitrary square matrix.
    pub fn symmetrized(m: DMatrix<f64>) -> Self {
        let m = (&m + m.transpose()) * 0.5;
        Self { m }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        Self {
            m: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }
}

impl Covariant2 for SymTensor2 {
    fn components(&self) -> &DMatrix<f64> {
        &self.m
    }
}

/// Antisymmetric covariant 2-tensor (2-form).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    m: DMatrix<f64>,
}

impl TwoForm {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square(&m)?;
        let defect = symmetry_defect(&m, -1.0);
        if defect > SHAPE_TOL {
            return Err(Error::NotAntisymmetric(defect));
        }
        Ok(Self::antisymmetrized(m))
    }

    pub fn antisymmetrized(m: DMatrix<f64>) -> Self {
        let m = (&m - m.transpose()) * 0.5;
        Self { m }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: DMatrix::zeros(n, n),
        }
    }

    /// `[xi ^ zeta]_pq = xi_p zeta_q - xi_q zeta_p`.
    pub fn wedge(xi: &[f64], zeta: &[f64]) -> Result<Self> {
        check_dim(xi.len(), zeta.len())?;
        let n = xi.len();
        let m = DMatrix::from_fn(n, n, |p, q| xi[p] * zeta[q] - xi[q] * zeta[p]);
        Ok(Self { m })
    }

    /// Wedge of two coordinate covectors `xi^a ^ xi^b` (zero-based indices).
    pub fn basis_wedge(n: usize, a: usize, b: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        if a != b {
            m[(a, b)] = 1.0;
            m[(b, a)] = -1.0;
        }
        Self { m }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }
}

impl Covariant2 for TwoForm {
    fn components(&self) -> &DMatrix<f64> {
        &self.m
    }
}

/// Linear complex structure: `J^2 = -Id`. Column `i` of the matrix holds the
/// components of `J e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure {
    j: DMatrix<f64>,
}

impl ComplexStructure {
    pub fn new(j: DMatrix<f64>) -> Result<Self> {
        let n = check_square(&j)?;
        if n % 2 != 0 {
            return Err(Error::InvalidComplexStructure(format!(
                "odd dimension {n}"
            )));
        }
        let sq = &j * &j + DMatrix::identity(n, n);
        let scale = max_abs(&j).powi(2).max(1.0);
        if max_abs(&sq) > SHAPE_TOL * scale {
            return Err(Error::InvalidComplexStructure(
                "J^2 differs from -Id".into(),
            ));
        }
        Ok(Self { j })
    }

    /// `J e_a = e_b`, `J e_b = -e_a` for each listed pair.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut j = DMatrix::zeros(n, n);
        for &(a, b) in pairs {
            j[(b, a)] = 1.0;
            j[(a, b)] = -1.0;
        }
        Self::new(j)
    }

    /// `J e_{2k} = e_{2k+1}` (zero-based).
    pub fn standard(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (0..n / 2).map(|k| (2 * k, 2 * k + 1)).collect();
        Self::from_pairs(n, &pairs)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    /// Apply J to a vector given by its frame components.
    pub fn apply(&self, v: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        &self.j * v
    }

    /// Relative defect of `g(J., J.) = g`.
    pub fn hermitian_defect(&self, g: &Metric) -> Result<f64> {
        check_dim(g.dim(), self.dim())?;
        let gm = g.matrix();
        let diff = self.j.transpose() * gm * &self.j - gm;
        Ok(g.norm(&diff) / g.norm(gm))
    }

    pub fn check_hermitian(&self, g: &Metric, tol: f64) -> Result<()> {
        let defect = self.hermitian_defect(g)?;
        if defect > tol {
            return Err(Error::NotHermitian(defect));
        }
        Ok(())
    }

    /// Kähler form `omega = gJ`.
    pub fn kahler_form(&self, g: &Metric) -> Result<TwoForm> {
        check_dim(g.dim(), self.dim())?;
        Ok(TwoForm::antisymmetrized(self.j.transpose() * g.matrix()))
    }
}

/// Orientation of a real vector space, recorded as the sign of an ordered
/// frame's determinant relative to the storage frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    sign: f64,
}

impl Orientation {
    /// The storage frame `(e_1, ..., e_n)` is positive.
    pub fn standard() -> Self {
        Self { sign: 1.0 }
    }

    pub fn reversed(self) -> Self {
        Self { sign: -self.sign }
    }

    /// Orientation in which the columns of `frame`, in order, form a positive basis.
    pub fn from_frame(frame: &DMatrix<f64>) -> Result<Self> {
        check_square(frame)?;
        let det = frame.determinant();
        let scale: f64 = frame.column_iter().map(|c| c.norm()).product();
        if !det.is_finite() || scale == 0.0 || det.abs() <= 1e-12 * scale {
            return Err(Error::DegenerateFrame);
        }
        Ok(Self {
            sign: det.signum(),
        })
    }

    /// Positive frame given as a permutation of the storage frame
    /// (`order[k]` is the index of the k-th vector).
    pub fn from_permutation(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut frame = DMatrix::zeros(n, n);
        for (col, &row) in order.iter().enumerate() {
            if row >= n {
                return Err(Error::DegenerateFrame);
            }
            frame[(row, col)] = 1.0;
        }
        Self::from_frame(&frame)
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }
}

/// Rank-4 covariant tensor with the algebraic curvature symmetries.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvTensor {
    n: usize,
    data: Vec<f64>,
}

/// Relative violations of the three curvature symmetries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryDefects {
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub bianchi: f64,
}

impl SymmetryDefects {
    pub fn max(&self) -> f64 {
        self.antisymmetry.max(self.pair_symmetry).max(self.bianchi)
    }
}

impl CurvTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n.pow(4)],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        out[[i, j, k, l]] = f(i, j, k, l);
                    }
                }
            }
        }
        out
    }

    /// Wrap raw components; the symmetries are checked to `tol` (relative).
    pub fn from_data(n: usize, data: Vec<f64>, tol: f64) -> Result<Self> {
        check_dim(n.pow(4), data.len())?;
        let out = Self { n, data };
        out.check_symmetries(tol)?;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    /// Set `R_ijkl = value` together with all images under the antisymmetries
    /// and the pair symmetry.
    pub fn set_with_symmetries(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) {
        for (a, b, c, d, s) in [
            (i, j, k, l, 1.0),
            (j, i, k, l, -1.0),
            (i, j, l, k, -1.0),
            (j, i, l, k, 1.0),
        ] {
            self[[a, b, c, d]] = s * value;
            self[[c, d, a, b]] = s * value;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn symmetry_defects(&self) -> SymmetryDefects {
        let scale = self.max_abs();
        let n = self.n;
        let mut d = SymmetryDefects {
            antisymmetry: 0.0,
            pair_symmetry: 0.0,
            bianchi: 0.0,
        };
        if scale == 0.0 {
            return d;
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self[[i, j, k, l]];
                        d.antisymmetry = d
                            .antisymmetry
                            .max((r + self[[j, i, k, l]]).abs())
                            .max((r + self[[i, j, l, k]]).abs());
                        d.pair_symmetry = d.pair_symmetry.max((r - self[[k, l, i, j]]).abs());
                        d.bianchi = d
                            .bianchi
                            .max((r + self[[i, k, l, j]] + self[[i, l, j, k]]).abs());
                    }
                }
            }
        }
        d.antisymmetry /= scale;
        d.pair_symmetry /= scale;
        d.bianchi /= scale;
        d
    }

    pub fn check_symmetries(&self, tol: f64) -> Result<()> {
        let d = self.symmetry_defects();
        if d.antisymmetry > tol {
            return Err(Error::CurvatureSymmetry(format!(
                "antisymmetry defect {:.3e}",
                d.antisymmetry
            )));
        }
        if d.pair_symmetry > tol {
            return Err(Error::CurvatureSymmetry(format!(
                "pair symmetry defect {:.3e}",
                d.pair_symmetry
            )));
        }
        if d.bianchi > tol {
            return Err(Error::CurvatureSymmetry(format!(
                "first Bianchi defect {:.3e}",
                d.bianchi
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    /// Contract index slot `pos` with the columns of `m`:
    /// `out[.., a, ..] = sum_i m[(i, a)] in[.., i, ..]`.
    fn transform_slot(&self, pos: usize, m: &DMatrix<f64>) -> Self {
        let n = self.n;
        let stride = n.pow(3 - pos as u32);
        let mut out = vec![0.0; self.data.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            let a = (flat / stride) % n;
            let base = flat - a * stride;
            let mut acc = 0.0;
            for i in 0..n {
                acc += m[(i, a)] * self.data[base + i * stride];
            }
            *slot = acc;
        }
        Self { n, data: out }
    }

    /// Components `R'_abcd = R(b_a, b_b, b_c, b_d)` in the frame whose vectors
    /// are the columns of `basis`.
    pub fn in_basis(&self, basis: &DMatrix<f64>) -> Result<Self> {
        check_dim(self.n, basis.nrows())?;
        check_dim(self.n, basis.ncols())?;
        let mut out = self.clone();
        for pos in 0..4 {
            out = out.transform_slot(pos, basis);
        }
        Ok(out)
    }

    /// Components with the selected slots raised by g.
    pub fn raised(&self, g: &Metric, slots: &[usize]) -> Result<Self> {
        check_dim(self.n, g.dim())?;
        let mut out = self.clone();
        for &pos in slots {
            out = out.transform_slot(pos, g.inverse());
        }
        Ok(out)
    }

    /// `sqrt(R_ijkl R^ijkl)`.
    pub fn norm(&self, g: &Metric) -> Result<f64> {
        let up = self.raised(g, &[0, 1, 2, 3])?;
        Ok(self
            .data
            .iter()
            .zip(&up.data)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .max(0.0)
            .sqrt())
    }
}

impl Index<[usize; 4]> for CurvTensor {
    type Output = f64;
    #[inline]
    fn index(&self, [i, j, k, l]: [usize; 4]) -> &f64 {
        &self.data[self.idx(i, j, k, l)]
    }
}

impl IndexMut<[usize; 4]> for CurvTensor {
    #[inline]
    fn index_mut(&mut self, [i, j, k, l]: [usize; 4]) -> &mut f64 {
        let at = self.idx(i, j, k, l);
        &mut self.data[at]
    }
}

/// The tensors derived from a curvature tensor by contraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionBundle {
    pub ricci: SymTensor2,
    pub scalar: f64,
    pub einstein: SymTensor2,
    pub schouten: SymTensor2,
    pub weyl: CurvTensor,
    pub trc: SymTensor2,
}

/// Ricci tensor `r_ij = g^{pq} R_ipjq`.
pub fn ricci(r: &CurvTensor, g: &Metric) -> Result<SymTensor2> {
    contract_middle(r, g.inverse(), g.dim())
}

fn contract_middle(r: &CurvTensor, upper: &DMatrix<f64>, n_g: usize) -> Result<SymTensor2> {
    let n = r.dim();
    check_dim(n, n_g)?;
    check_dim(n, upper.nrows())?;
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for p in 0..n {
                for q in 0..n {
                    acc += r[[i, p, j, q]] * upper[(p, q)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    Ok(SymTensor2::symmetrized(out))
}

/// Triple contraction `[trc R]_ij = R_ikpq R_j^{kpq}`.
pub fn triple_contraction(r: &CurvTensor, g: &Metric) -> Result<SymTensor2> {
    let n = r.dim();
    let up = r.raised(g, &[1, 2, 3])?;
    let block = n.pow(3);
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let ri = &r.data()[i * block..(i + 1) * block];
        for j in 0..n {
            let uj = &up.data()[j * block..(j + 1) * block];
            out[(i, j)] = ri.iter().zip(uj).map(|(a, b)| a * b).sum();
        }
    }
    Ok(SymTensor2::symmetrized(out))
}

/// Kulkarni–Nomizu style block `g_ip h_jq + g_jq h_ip - g_jp h_iq - g_iq h_jp`.
fn kn_product(g: &DMatrix<f64>, h: &DMatrix<f64>) -> CurvTensor {
    let n = g.nrows();
    CurvTensor::from_fn(n, |i, j, p, q| {
        g[(i, p)] * h[(j, q)] + g[(j, q)] * h[(i, p)] - g[(j, p)] * h[(i, q)] - g[(i, q)] * h[(j, p)]
    })
}

/// Weyl tensor from the Ricci-based decomposition.
pub fn weyl(r: &CurvTensor, g: &Metric, ric: &SymTensor2, scalar: f64) -> Result<CurvTensor> {
    let n = r.dim();
    check_dim(n, g.dim())?;
    if n < 4 {
        return Err(Error::UnsupportedDimension {
            n,
            required: ">= 4",
        });
    }
    let nf = n as f64;
    let gm = g.matrix();
    let w = r.add_scaled(-1.0 / (nf - 2.0), &kn_product(gm, ric.matrix()))?;
    let gg = kn_product(gm, gm).scaled(0.5);
    w.add_scaled(scalar / ((nf - 1.0) * (nf - 2.0)), &gg)
}

pub fn contraction_bundle(r: &CurvTensor, g: &Metric) -> Result<ContractionBundle> {
    let n = r.dim();
    check_dim(n, g.dim())?;
    if n < 4 {
        return Err(Error::UnsupportedDimension {
            n,
            required: ">= 4",
        });
    }
    let nf = n as f64;
    let ric = ricci(r, g)?;
    let scalar = g.trace(ric.matrix());
    let gm = g.matrix();
    let einstein = SymTensor2::symmetrized(ric.matrix() - gm * (scalar / nf));
    let schouten = SymTensor2::symmetrized(ric.matrix() - gm * (scalar / (2.0 * nf - 2.0)));
    let weyl = weyl(r, g, &ric, scalar)?;
    let trc = triple_contraction(r, g)?;
    Ok(ContractionBundle {
        ricci: ric,
        scalar,
        einstein,
        schouten,
        weyl,
        trc,
    })
}

/// `[Rb]_ij = R_ipjq b^{pq}`; the symmetric part is returned, which is the
/// whole result whenever `b` is symmetric.
pub fn act_on_sym(r: &CurvTensor, b: &impl Covariant2, g: &Metric) -> Result<SymTensor2> {
    check_dim(r.dim(), b.dim())?;
    let up = g.raise(b.components());
    contract_middle(r, &up, g.dim())
}

/// `[R alpha]_ij = (1/2) R_ijpq alpha^{pq}`.
pub fn act_on_form(r: &CurvTensor, alpha: &TwoForm, g: &Metric) -> Result<TwoForm> {
    let n = r.dim();
    check_dim(n, g.dim())?;
    check_dim(n, alpha.dim())?;
    let up = g.raise(alpha.matrix());
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for p in 0..n {
                for q in 0..n {
                    acc += r[[i, j, p, q]] * up[(p, q)];
                }
            }
            out[(i, j)] = 0.5 * acc;
        }
    }
    Ok(TwoForm::antisymmetrized(out))
}

/// `b_ij = r_j^k r_ik`.
pub fn square(a: &SymTensor2, g: &Metric) -> Result<SymTensor2> {
    check_dim(a.dim(), g.dim())?;
    Ok(SymTensor2::symmetrized(
        a.matrix() * g.inverse() * a.matrix(),
    ))
}

/// Outcome of testing whether a symmetric tensor is a multiple of g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipleOfMetric {
    pub is_multiple: bool,
    pub factor: f64,
    pub residual: f64,
}

/// `factor = tr_g(a)/n`, `residual = |a - factor g| / max(|a|, |g|, floor)`.
pub fn multiple_of_metric(a: &impl Covariant2, g: &Metric, tol: f64) -> Result<MultipleOfMetric> {
    let am = a.components();
    check_dim(g.dim(), am.nrows())?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let n = g.dim() as f64;
    let factor = g.trace(am) / n;
    let leftover = am - g.matrix() * factor;
    let denom = g.norm(am).max(n.sqrt()).max(NORM_FLOOR);
    let residual = g.norm(&leftover) / denom;
    Ok(MultipleOfMetric {
        is_multiple: residual <= tol,
        factor,
        residual,
    })
}

/// The two tensors attached to `a` by a complex structure and their commutator.
#[derive(Debug, Clone, PartialEq)]
pub struct JOps {
    /// `aJ = a(J., .)`
    pub a_j: DMatrix<f64>,
    /// `Ja = -a(., J.)`
    pub j_a: DMatrix<f64>,
    pub commutator: DMatrix<f64>,
    pub is_hermitian: bool,
}

pub fn j_ops(a: &impl Covariant2, j: &ComplexStructure) -> Result<JOps> {
    let am = a.components();
    check_dim(j.dim(), am.nrows())?;
    let jm = j.matrix();
    let a_j = jm.transpose() * am;
    let j_a = -(am * jm);
    let commutator = &a_j - &j_a;
    let scale = max_abs(am);
    let is_hermitian = scale == 0.0
        || (symmetry_defect(am, 1.0) <= DEFAULT_TOL
            && max_abs(&commutator) <= DEFAULT_TOL * scale * max_abs(jm).max(1.0));
    Ok(JOps {
        a_j,
        j_a,
        commutator,
        is_hermitian,
    })
}

/// Sign of the permutation `(i, j, k, l)` of `(0, 1, 2, 3)`, zero on repeats.
pub fn levi_civita(idx: [usize; 4]) -> f64 {
    let mut seen = [false; 4];
    for &i in &idx {
        if i >= 4 || seen[i] {
            return 0.0;
        }
        seen[i] = true;
    }
    let mut sign = 1.0;
    for a in 0..4 {
        for b in a + 1..4 {
            if idx[a] > idx[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Hodge star on 2-forms in dimension four:
/// `(*alpha)_ij = (1/2) sqrt(det g) eps_ijkl alpha^{kl}` with the sign fixed
/// by the orientation.
pub fn hodge_star(alpha: &TwoForm, g: &Metric, orientation: Orientation) -> Result<TwoForm> {
    let n = alpha.dim();
    check_dim(n, g.dim())?;
    if n != 4 {
        return Err(Error::UnsupportedDimension { n, required: "== 4" });
    }
    let up = g.raise(alpha.matrix());
    let vol = orientation.sign() * g.determinant().sqrt();
    let mut out = DMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    acc += levi_civita([i, j, k, l]) * up[(k, l)];
                }
            }
            out[(i, j)] = 0.5 * vol * acc;
        }
    }
    Ok(TwoForm::antisymmetrized(out))
}

/// Self-dual and anti-self-dual halves of a 2-form.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeSplit {
    pub sd: TwoForm,
    pub asd: TwoForm,
}

pub fn hodge_split(alpha: &TwoForm, g: &Metric, orientation: Orientation) -> Result<HodgeSplit> {
    let star = hodge_star(alpha, g, orientation)?;
    let sd = TwoForm::antisymmetrized((alpha.matrix() + star.matrix()) * 0.5);
    let asd = TwoForm::antisymmetrized((alpha.matrix() - star.matrix()) * 0.5);
    Ok(HodgeSplit { sd, asd })
}

/// Inner product on 2-forms, `<alpha, beta> = (1/2) alpha_ij beta^{ij}`.
pub fn form_inner(alpha: &TwoForm, beta: &TwoForm, g: &Metric) -> Result<f64> {
    check_dim(alpha.dim(), beta.dim())?;
    check_dim(alpha.dim(), g.dim())?;
    let up = g.raise(beta.matrix());
    Ok(0.5 * alpha.matrix().component_mul(&up).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn const_curv(kappa: f64, g: &Metric) -> CurvTensor {
        let m = g.matrix();
        CurvTensor::from_fn(g.dim(), |i, j, k, l| {
            kappa * (m[(i, k)] * m[(j, l)] - m[(i, l)] * m[(j, k)])
        })
    }

    fn skewed_metric() -> Metric {
        Metric::new(DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, 0.3, 0.0, 0.1, //
                0.3, 1.5, 0.2, 0.0, //
                0.0, 0.2, 1.0, -0.4, //
                0.1, 0.0, -0.4, 3.0,
            ],
        ))
        .unwrap()
    }

    /// Raising by explicit summation over all index tuples.
    fn brute_trc(r: &CurvTensor, g: &Metric) -> DMatrix<f64> {
        let n = r.dim();
        let gi = g.inverse();
        DMatrix::from_fn(n, n, |i, j| {
            let mut acc = 0.0;
            for k in 0..n {
                for p in 0..n {
                    for q in 0..n {
                        for a in 0..n {
                            for b in 0..n {
                                for c in 0..n {
                                    acc += r[[i, k, p, q]]
                                        * r[[j, a, b, c]]
                                        * gi[(k, a)]
                                        * gi[(p, b)]
                                        * gi[(q, c)];
                                }
                            }
                        }
                    }
                }
            }
            acc
        })
    }

    #[test]
    fn metric_rejects_bad_input() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(Metric::new(asym), Err(Error::NotSymmetric(_))));
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(Metric::new(indef), Err(Error::NotPositiveDefinite));
        let rect = DMatrix::zeros(2, 3);
        assert!(matches!(Metric::new(rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn metric_inverse_and_norm() {
        let g = skewed_metric();
        let id = g.matrix() * g.inverse();
        assert_relative_eq!(id, DMatrix::identity(4, 4), epsilon = 1e-13);
        // |g| = sqrt(n) in any frame
        assert_relative_eq!(g.norm(g.matrix()), 2.0, epsilon = 1e-13);
        assert_relative_eq!(g.trace(g.matrix()), 4.0, epsilon = 1e-13);
    }

    #[test]
    fn constant_curvature_bundle() {
        let g = Metric::identity(4);
        let r = const_curv(1.0, &g);
        let b = contraction_bundle(&r, &g).unwrap();
        assert_relative_eq!(b.ricci.matrix(), &(g.matrix() * 3.0), epsilon = 1e-14);
        assert_relative_eq!(b.scalar, 12.0, epsilon = 1e-13);
        assert!(b.einstein.matrix().iter().all(|v| v.abs() < 1e-14));
        assert!(b.weyl.max_abs() < 1e-14);
        assert_relative_eq!(b.trc.matrix(), &(g.matrix() * 6.0), epsilon = 1e-13);
        assert_relative_eq!(b.trc.matrix(), &brute_trc(&r, &g), epsilon = 1e-13);
    }

    #[test]
    fn constant_curvature_in_skewed_frame() {
        let g = skewed_metric();
        let r = const_curv(-0.7, &g);
        let b = contraction_bundle(&r, &g).unwrap();
        assert_relative_eq!(b.ricci.matrix(), &(g.matrix() * -2.1), epsilon = 1e-12);
        assert!(b.weyl.max_abs() < 1e-12);
        assert_relative_eq!(b.trc.matrix(), &brute_trc(&r, &g), epsilon = 1e-12);
        let m = multiple_of_metric(&b.trc, &g, DEFAULT_TOL).unwrap();
        assert!(m.is_multiple);
        assert_relative_eq!(m.factor, 6.0 * 0.49, epsilon = 1e-12);
    }

    #[test]
    fn zero_tensor_bundle() {
        let g = Metric::identity(5);
        let b = contraction_bundle(&CurvTensor::zeros(5), &g).unwrap();
        assert_eq!(b.scalar, 0.0);
        assert_eq!(b.weyl.max_abs(), 0.0);
        assert!(b.trc.matrix().iter().all(|v| *v == 0.0));
        let m = multiple_of_metric(&b.trc, &g, DEFAULT_TOL).unwrap();
        assert!(m.is_multiple);
        assert_eq!(m.factor, 0.0);
        assert_eq!(m.residual, 0.0);
    }

    #[test]
    fn bundle_errors() {
        let g = Metric::identity(4);
        assert!(matches!(
            contraction_bundle(&CurvTensor::zeros(5), &g),
            Err(Error::DimensionMismatch { .. })
        ));
        let g3 = Metric::identity(3);
        assert!(matches!(
            contraction_bundle(&CurvTensor::zeros(3), &g3),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn multiple_of_metric_examples() {
        let g = Metric::identity(4);
        let five = SymTensor2::symmetrized(g.matrix() * 5.0);
        let m = multiple_of_metric(&five, &g, 1e-9).unwrap();
        assert!(m.is_multiple);
        assert_eq!(m.factor, 5.0);
        assert_eq!(m.residual, 0.0);

        let split = SymTensor2::diagonal(&[1.0, 1.0, -1.0, -1.0]);
        let m = multiple_of_metric(&split, &g, 1e-9).unwrap();
        assert!(!m.is_multiple);
        assert_eq!(m.factor, 0.0);
        assert!(m.residual > 0.0);

        assert!(multiple_of_metric(&split, &g, 0.0).is_err());
    }

    #[test]
    fn act_on_sym_of_metric_is_ricci() {
        let g = skewed_metric();
        let r = const_curv(1.3, &g);
        let rg = act_on_sym(&r, &g, &g).unwrap();
        let ric = ricci(&r, &g).unwrap();
        let scale = g.norm(ric.matrix());
        assert!(g.norm(&(rg.matrix() - ric.matrix())) <= 1e-14 * scale);
        assert!(act_on_sym(&CurvTensor::zeros(4), &g, &g)
            .unwrap()
            .matrix()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn act_on_form_constant_curvature_brute_force() {
        // For R = k (g ^ g)/2, R alpha = k alpha exactly.
        let g = skewed_metric();
        let r = const_curv(2.5, &g);
        let alpha = TwoForm::antisymmetrized(DMatrix::from_fn(4, 4, |i, j| {
            (i as f64 + 1.0) * 0.3 - (j as f64) * 0.7 + (i * j) as f64 * 0.1
        }));
        let ra = act_on_form(&r, &alpha, &g).unwrap();
        // brute force contraction
        let up = g.raise(alpha.matrix());
        let brute = DMatrix::from_fn(4, 4, |i, j| {
            let mut acc = 0.0;
            for p in 0..4 {
                for q in 0..4 {
                    acc += 0.5 * r[[i, j, p, q]] * up[(p, q)];
                }
            }
            acc
        });
        assert_relative_eq!(ra.matrix(), &brute, epsilon = 1e-12);
        assert_relative_eq!(ra.matrix(), &(alpha.matrix() * 2.5), epsilon = 1e-12);
        let zero = act_on_form(&r, &TwoForm::zeros(4), &g).unwrap();
        assert!(zero.matrix().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn j_ops_on_metric_gives_kahler_form() {
        let g = Metric::identity(4);
        let j = ComplexStructure::standard(4).unwrap();
        let ops = j_ops(&g, &j).unwrap();
        assert!(ops.is_hermitian);
        let omega = TwoForm::basis_wedge(4, 0, 1).matrix() + TwoForm::basis_wedge(4, 2, 3).matrix();
        assert_relative_eq!(ops.a_j, omega, epsilon = 1e-15);
        assert!(ops.commutator.iter().all(|v| *v == 0.0));
        // (aJ)J = -a
        let back = j_ops(&ops.a_j, &j).unwrap();
        assert_relative_eq!(back.a_j, -g.matrix(), epsilon = 1e-15);

        let zero = j_ops(&SymTensor2::zeros(4), &j).unwrap();
        assert!(zero.is_hermitian);
        assert!(zero.a_j.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn j_ops_detects_non_hermitian() {
        let j = ComplexStructure::standard(4).unwrap();
        let ops = j_ops(&SymTensor2::diagonal(&[-3.0, 1.0, -1.0, -1.0]), &j).unwrap();
        assert!(!ops.is_hermitian);
        assert!(ops.commutator.iter().any(|v| v.abs() > 1.0));
    }

    #[test]
    fn complex_structure_validation() {
        assert!(ComplexStructure::new(DMatrix::identity(4, 4)).is_err());
        assert!(ComplexStructure::new(DMatrix::zeros(3, 3)).is_err());
        let j = ComplexStructure::standard(4).unwrap();
        assert!(j.check_hermitian(&Metric::identity(4), 1e-12).is_ok());
        let g = Metric::diagonal(&[1.0, 2.0, 1.0, 1.0]).unwrap();
        assert!(matches!(j.check_hermitian(&g, 1e-12), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn hodge_examples() {
        let g = Metric::identity(4);
        let o = Orientation::standard();
        let w12 = TwoForm::basis_wedge(4, 0, 1);
        let w34 = TwoForm::basis_wedge(4, 2, 3);
        let kahler = TwoForm::antisymmetrized(w12.matrix() + w34.matrix());
        let s = hodge_split(&kahler, &g, o).unwrap();
        assert_relative_eq!(s.sd.matrix(), kahler.matrix(), epsilon = 1e-15);
        assert!(s.asd.matrix().iter().all(|v| v.abs() < 1e-15));

        let einstein_like = TwoForm::antisymmetrized(w12.matrix() - w34.matrix());
        let s = hodge_split(&einstein_like, &g, o).unwrap();
        assert!(s.sd.matrix().iter().all(|v| v.abs() < 1e-15));
        assert_relative_eq!(s.asd.matrix(), einstein_like.matrix(), epsilon = 1e-15);

        // xi1 ^ xi3: *(e13) = -e24 from the Levi-Civita symbol eps_{1324} = -1
        let w13 = TwoForm::basis_wedge(4, 0, 2);
        let w24 = TwoForm::basis_wedge(4, 1, 3);
        let s = hodge_split(&w13, &g, o).unwrap();
        assert_relative_eq!(
            s.sd.matrix(),
            &((w13.matrix() - w24.matrix()) * 0.5),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            s.asd.matrix(),
            &((w13.matrix() + w24.matrix()) * 0.5),
            epsilon = 1e-15
        );
    }

    #[test]
    fn hodge_star_involution_in_skewed_frame() {
        let g = skewed_metric();
        let o = Orientation::from_permutation(&[0, 2, 1, 3]).unwrap();
        let alpha = TwoForm::antisymmetrized(DMatrix::from_fn(4, 4, |i, j| {
            ((i + 2 * j) as f64).sin()
        }));
        let once = hodge_star(&alpha, &g, o).unwrap();
        let twice = hodge_star(&once, &g, o).unwrap();
        assert_relative_eq!(twice.matrix(), alpha.matrix(), epsilon = 1e-12);
        let s = hodge_split(&alpha, &g, o).unwrap();
        assert!(form_inner(&s.sd, &s.asd, &g).unwrap().abs() < 1e-12);
    }

    #[test]
    fn orientation_rejects_degenerate_frames() {
        let mut f = DMatrix::identity(4, 4);
        f.set_column(3, &f.column(2).clone_owned());
        assert_eq!(Orientation::from_frame(&f), Err(Error::DegenerateFrame));
        assert_eq!(Orientation::from_permutation(&[1, 0, 2, 3]).unwrap().sign(), -1.0);
        assert!(hodge_star(&TwoForm::zeros(5), &Metric::identity(5), Orientation::standard()).is_err());
    }

    #[test]
    fn set_with_symmetries_and_basis_change() {
        let mut r = CurvTensor::zeros(4);
        r.set_with_symmetries(0, 1, 0, 1, 2.0);
        r.set_with_symmetries(2, 3, 2, 3, -1.0);
        assert!(r.symmetry_defects().max() == 0.0);
        assert_eq!(r[[1, 0, 1, 0]], 2.0);
        assert_eq!(r[[1, 0, 0, 1]], -2.0);
        // swap e1 and e3
        let p = DMatrix::from_fn(4, 4, |i, j| match (i, j) {
            (0, 2) | (2, 0) | (1, 1) | (3, 3) => 1.0,
            _ => 0.0,
        });
        let rp = r.in_basis(&p).unwrap();
        assert_eq!(rp[[2, 1, 2, 1]], 2.0);
        assert_eq!(rp[[0, 3, 0, 3]], -1.0);
        assert!(CurvTensor::from_data(4, vec![1.0; 256], 1e-12).is_err());
    }
}
