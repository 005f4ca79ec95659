//! Dense complex linear algebra with explicit tolerance semantics.
//!
//! Every rank decision in the crate funnels through the singular-value
//! cutoff defined here, so "closed range" style statements are decided in
//! exactly one place.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense complex matrix, the workhorse for coefficients, evaluations and
/// projections. Entries are guaranteed finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix(DMatrix<Complex64>);

impl CMatrix {
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFiniteEntry);
        }
        Ok(CMatrix(inner))
    }

    /// Construct without the finiteness scan. For results of internal
    /// arithmetic on already-validated inputs.
    pub(crate) fn from_valid(inner: DMatrix<Complex64>) -> Self {
        debug_assert!(inner.iter().all(|c| c.re.is_finite() && c.im.is_finite()));
        CMatrix(inner)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn from_rows(rows: usize, cols: usize, data: &[Complex64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    /// Convenience constructor from real entries.
    pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        let cdata: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(rows, cols, &cdata)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix(&self.0 * s)
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &other.0)
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &other.0)
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_zero(&self, eps: f64) -> bool {
        self.norm_fro() <= eps
    }

    /// Horizontal concatenation [self | other].
    pub fn hstack(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.rows() != other.rows() {
            return Err(Error::ShapeMismatch(format!(
                "hstack of {}x{} and {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        let mut m = DMatrix::zeros(self.rows(), self.cols() + other.cols());
        m.view_mut((0, 0), (self.rows(), self.cols())).copy_from(&self.0);
        m.view_mut((0, self.cols()), (other.rows(), other.cols()))
            .copy_from(&other.0);
        Ok(CMatrix(m))
    }
}

#[derive(Serialize, Deserialize)]
struct CMatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut data = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let c = self.0[(i, j)];
                data.push([c.re, c.im]);
            }
        }
        CMatrixRepr {
            rows: self.rows(),
            cols: self.cols(),
            data,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = CMatrixRepr::deserialize(d)?;
        let data: Vec<Complex64> = repr
            .data
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        CMatrix::from_rows(repr.rows, repr.cols, &data).map_err(D::Error::custom)
    }
}

/// Residual and rank thresholds shared by every certification in the crate.
///
/// `abs` bounds Frobenius-norm residuals; `rank_rel` is the relative
/// singular-value cutoff deciding numerical rank.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rank_rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rank_rel: f64) -> Result<Self> {
        if !(abs > 0.0) {
            return Err(Error::InvalidInput(format!("abs tolerance {abs} must be positive")));
        }
        if !(rank_rel > 0.0 && rank_rel < 1.0) {
            return Err(Error::InvalidInput(format!(
                "rank_rel {rank_rel} must lie in (0, 1)"
            )));
        }
        Ok(Tolerance { abs, rank_rel })
    }

    pub fn with_abs(self, abs: f64) -> Self {
        Tolerance { abs, ..self }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-8,
            rank_rel: 1e-9,
        }
    }
}

struct SvdParts {
    u: DMatrix<Complex64>,
    vt: DMatrix<Complex64>,
    sigma: DVector<f64>,
}

fn svd(a: &CMatrix) -> SvdParts {
    let svd = a.inner().clone().svd(true, true);
    SvdParts {
        u: svd.u.expect("svd with u requested"),
        vt: svd.v_t.expect("svd with v_t requested"),
        sigma: svd.singular_values,
    }
}

/// Hermitian idempotent onto the numerical column space of `A`.
///
/// Columns of U whose singular value exceeds `rank_rel * sigma_max` span the
/// range; the zero matrix (sigma_max <= abs) projects to zero.
pub fn range_projection(a: &CMatrix, tol: &Tolerance) -> CMatrix {
    let parts = svd(a);
    let smax = parts.sigma.iter().cloned().fold(0.0f64, f64::max);
    let rows = a.rows();
    if smax <= tol.abs {
        return CMatrix::zeros(rows, rows);
    }
    let mut p = DMatrix::<Complex64>::zeros(rows, rows);
    for (i, &s) in parts.sigma.iter().enumerate() {
        if s > tol.rank_rel * smax {
            let u = parts.u.column(i);
            // p += u u*
            for r in 0..rows {
                for c in 0..rows {
                    p[(r, c)] += u[r] * u[c].conj();
                }
            }
        }
    }
    CMatrix::from_valid(p)
}

/// Hermitian idempotent onto the numerical kernel of `A` (right singular
/// vectors with sigma <= rank_rel * sigma_max). Satisfies
/// `kernel_projection(A) = I - range_projection(A*)`.
pub fn kernel_projection(a: &CMatrix, tol: &Tolerance) -> CMatrix {
    let n = a.cols();
    let adj = a.adjoint();
    let ran = range_projection(&adj, tol);
    CMatrix::identity(n).sub(&ran)
}

/// Orthonormal basis of the numerical kernel of `A`, as matrix columns.
/// Returns a `cols x k` matrix (k may be zero).
pub fn kernel_basis(a: &CMatrix, tol: &Tolerance) -> CMatrix {
    let parts = svd(a);
    let smax = parts.sigma.iter().cloned().fold(0.0f64, f64::max);
    let n = a.cols();
    let v = parts.vt.adjoint(); // columns are right singular vectors
    let mut keep: Vec<usize> = Vec::new();
    if smax <= tol.abs {
        keep.extend(0..v.ncols());
    } else {
        for (i, &s) in parts.sigma.iter().enumerate() {
            if s <= tol.rank_rel * smax {
                keep.push(i);
            }
        }
        keep.extend(parts.sigma.len()..v.ncols());
    }
    let mut b = DMatrix::<Complex64>::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        b.column_mut(j).copy_from(&v.column(i));
    }
    // Columns outside the thin factor are not returned by nalgebra, so
    // complete the kernel basis through the orthogonal complement if needed.
    if v.ncols() < n {
        let have = b.ncols();
        let want = have + (n - v.ncols());
        let mut full = DMatrix::<Complex64>::zeros(n, want);
        full.view_mut((0, 0), (n, have)).copy_from(&b);
        let compl = orthogonal_complement_basis(&CMatrix::from_valid(v.clone()), tol);
        full.view_mut((0, have), (n, n - v.ncols()))
            .copy_from(compl.inner());
        return CMatrix::from_valid(full);
    }
    CMatrix::from_valid(b)
}

/// Orthonormal basis of the orthogonal complement of the column span of `U`.
pub fn orthogonal_complement_basis(u: &CMatrix, tol: &Tolerance) -> CMatrix {
    let n = u.rows();
    let p = range_projection(u, tol);
    let rest = CMatrix::identity(n).sub(&p);
    let parts = svd(&rest);
    let mut cols = Vec::new();
    for (i, &s) in parts.sigma.iter().enumerate() {
        if s > 0.5 {
            cols.push(i);
        }
    }
    let mut b = DMatrix::<Complex64>::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        b.column_mut(j).copy_from(&parts.u.column(i));
    }
    CMatrix::from_valid(b)
}

/// `true` iff ||A A* A - A||_F <= tol.abs.
pub fn is_partial_isometry(a: &CMatrix, tol: &Tolerance) -> bool {
    let aaa = a.mul(&a.adjoint()).mul(a);
    aaa.sub(a).norm_fro() <= tol.abs
}

pub fn is_unitary(a: &CMatrix, tol: &Tolerance) -> bool {
    if a.rows() != a.cols() {
        return false;
    }
    let n = a.rows();
    let id = CMatrix::identity(n);
    a.adjoint().mul(a).sub(&id).norm_fro() <= tol.abs
        && a.mul(&a.adjoint()).sub(&id).norm_fro() <= tol.abs
}

pub fn is_projection(p: &CMatrix, tol: &Tolerance) -> bool {
    if p.rows() != p.cols() {
        return false;
    }
    p.mul(p).sub(p).norm_fro() <= tol.abs && p.sub(&p.adjoint()).norm_fro() <= tol.abs
}

/// `true` iff the projections are pairwise orthogonal and sum to the identity.
pub fn orthogonal_decomposition_check(ps: &[CMatrix], tol: &Tolerance) -> bool {
    if ps.is_empty() {
        return false;
    }
    let n = ps[0].rows();
    if ps.iter().any(|p| p.rows() != n || p.cols() != n) {
        return false;
    }
    for (i, p) in ps.iter().enumerate() {
        for q in ps.iter().skip(i + 1) {
            if p.mul(q).norm_fro() > tol.abs {
                return false;
            }
        }
    }
    let mut sum = CMatrix::zeros(n, n);
    for p in ps {
        sum = sum.add(p);
    }
    sum.sub(&CMatrix::identity(n)).norm_fro() <= tol.abs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn range_projection_of_zero_is_zero() {
        let a = CMatrix::zeros(2, 2);
        let p = range_projection(&a, &Tolerance::default());
        assert_eq!(p.norm_fro(), 0.0);
    }

    #[test]
    fn range_projection_of_projection_is_itself() {
        let a = CMatrix::from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let p = range_projection(&a, &Tolerance::default());
        assert!(p.sub(&a).norm_fro() < 1e-12);
    }

    #[test]
    fn range_projection_rank_one_column() {
        let s = 1.0 / 2.0f64.sqrt();
        let a = CMatrix::from_real_rows(2, 1, &[s, s]).unwrap();
        let p = range_projection(&a, &Tolerance::default());
        let expect = CMatrix::from_real_rows(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(p.sub(&expect).norm_fro() < 1e-12);
        assert!(is_projection(&p, &Tolerance::default()));
    }

    #[test]
    fn kernel_projection_examples() {
        let tol = Tolerance::default();
        let i3 = CMatrix::identity(3);
        assert!(kernel_projection(&i3, &tol).norm_fro() < 1e-12);

        let z = CMatrix::zeros(2, 2);
        let k = kernel_projection(&z, &tol);
        assert!(k.sub(&CMatrix::identity(2)).norm_fro() < 1e-12);

        let a = CMatrix::from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let k = kernel_projection(&a, &tol);
        let expect = CMatrix::from_real_rows(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(k.sub(&expect).norm_fro() < 1e-12);
    }

    #[test]
    fn kernel_plus_adjoint_range_is_identity() {
        let tol = Tolerance::default();
        let a = CMatrix::from_rows(
            2,
            3,
            &[c(1.0, 2.0), c(0.0, 0.0), c(3.0, -1.0), c(2.0, 4.0), c(0.0, 0.0), c(6.0, -2.0)],
        )
        .unwrap();
        let k = kernel_projection(&a, &tol);
        let r = range_projection(&a.adjoint(), &tol);
        assert!(k.add(&r).sub(&CMatrix::identity(3)).norm_fro() < 1e-10);
    }

    #[test]
    fn partial_isometry_examples() {
        let tol = Tolerance::default();
        assert!(is_partial_isometry(&CMatrix::identity(4), &tol));
        let two_i = CMatrix::identity(2).scale(c(2.0, 0.0));
        assert!(!is_partial_isometry(&two_i, &tol));
        let s = 1.0 / 2.0f64.sqrt();
        let a = CMatrix::from_real_rows(2, 2, &[s, 0.0, s, 0.0]).unwrap();
        assert!(is_partial_isometry(&a, &tol));
    }

    #[test]
    fn unitary_and_projection_checks() {
        let tol = Tolerance::default();
        let swap = CMatrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(is_unitary(&swap, &tol));
        let half = CMatrix::from_real_rows(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(is_projection(&half, &tol));
        let diag10 = CMatrix::from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(!is_unitary(&diag10, &tol));
    }

    #[test]
    fn decomposition_check_examples() {
        let tol = Tolerance::default();
        let d1 = CMatrix::from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let d2 = CMatrix::from_real_rows(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(orthogonal_decomposition_check(&[d1, d2], &tol));

        let i2 = CMatrix::identity(2);
        assert!(!orthogonal_decomposition_check(&[i2.clone(), i2], &tol));

        let p = CMatrix::from_real_rows(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let q = CMatrix::from_real_rows(2, 2, &[0.5, -0.5, -0.5, 0.5]).unwrap();
        assert!(orthogonal_decomposition_check(&[p, q], &tol));
    }

    #[test]
    fn json_round_trip() {
        let a = CMatrix::from_rows(1, 2, &[c(1.5, -2.0), c(0.0, 3.0)]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"data":[[1.5,-2.0],[0.0,3.0]]}"#);
        let b: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nan_rejected() {
        let r = CMatrix::from_rows(1, 1, &[c(f64::NAN, 0.0)]);
        assert!(r.is_err());
    }
}
