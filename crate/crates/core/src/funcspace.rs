//! Bounded analytic matrix-valued functions on the disk: coefficient and
//! circle-grid representations, Poisson/Taylor evaluation, products, the
//! tilde involution and analytic-part certification.
//!
//! Functions are matrix polynomials over an optional scalar denominator
//! q(z) = prod_k (1 - conj(alpha_k) z) with all |alpha_k| < 1, so q never
//! vanishes on the closed disk. The FFT bridge between coefficients and
//! boundary samples is exact on bandlimited data; every reconstruction
//! certifies that out-of-band bins are below tolerance.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, Tolerance};

/// Matrix polynomial sum_n coeffs[n] z^n with uniform coefficient shape.
#[derive(Debug, Clone, PartialEq)]
pub struct MatPoly {
    coeffs: Vec<CMatrix>,
}

impl MatPoly {
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("MatPoly needs at least one coefficient".into()));
        }
        let (r, c) = (coeffs[0].rows(), coeffs[0].cols());
        if coeffs.iter().any(|m| m.rows() != r || m.cols() != c) {
            return Err(Error::ShapeMismatch("non-uniform MatPoly coefficients".into()));
        }
        Ok(MatPoly { coeffs })
    }

    pub fn constant(m: CMatrix) -> Self {
        MatPoly { coeffs: vec![m] }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        MatPoly {
            coeffs: vec![CMatrix::zeros(rows, cols)],
        }
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> CMatrix {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.rows(), self.cols()))
    }

    pub fn rows(&self) -> usize {
        self.coeffs[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.coeffs[0].cols()
    }

    /// Largest n with a nonzero coefficient; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|m| m.norm_fro() > 0.0)
            .unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.rows(), self.cols());
        for m in self.coeffs.iter().rev() {
            acc = acc.scale(z).add(m);
        }
        acc
    }

    /// Coefficients of the tilde transform: coefficient n becomes its adjoint.
    pub fn tilde(&self) -> MatPoly {
        MatPoly {
            coeffs: self.coeffs.iter().map(CMatrix::adjoint).collect(),
        }
    }

    /// Drop trailing coefficients below `eps` in Frobenius norm.
    pub fn trimmed(&self, eps: f64) -> MatPoly {
        let last = self
            .coeffs
            .iter()
            .rposition(|m| m.norm_fro() > eps)
            .unwrap_or(0);
        MatPoly {
            coeffs: self.coeffs[..=last].to_vec(),
        }
    }

    pub fn padded(&self, len: usize) -> MatPoly {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() < len {
            coeffs.push(CMatrix::zeros(self.rows(), self.cols()));
        }
        MatPoly { coeffs }
    }
}

/// Boundary samples at the G-th roots of unity, sample k at exp(2 pi i k/G).
#[derive(Debug, Clone)]
pub struct GridSamples {
    values: Vec<CMatrix>,
}

impl GridSamples {
    pub fn new(values: Vec<CMatrix>) -> Result<Self> {
        if values.is_empty() || !values.len().is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "grid size {} is not a power of two",
                values.len()
            )));
        }
        let (r, c) = (values[0].rows(), values[0].cols());
        if values.iter().any(|m| m.rows() != r || m.cols() != c) {
            return Err(Error::ShapeMismatch("non-uniform grid samples".into()));
        }
        Ok(GridSamples { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn rows(&self) -> usize {
        self.values[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.values[0].cols()
    }

    /// Pointwise adjoint; generally no longer analytic.
    pub fn adjoint(&self) -> GridSamples {
        GridSamples {
            values: self.values.iter().map(CMatrix::adjoint).collect(),
        }
    }

    /// Pointwise product self(z_k) * other(z_k).
    pub fn mul(&self, other: &GridSamples) -> Result<GridSamples> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch("grid size mismatch".into()));
        }
        if self.cols() != other.rows() {
            return Err(Error::ShapeMismatch(format!(
                "pointwise product of {}x{} and {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a.mul(b))
            .collect();
        Ok(GridSamples { values })
    }
}

/// The k-th node of the size-G grid.
pub fn grid_node(k: usize, g: usize) -> Complex64 {
    let t = 2.0 * PI * k as f64 / g as f64;
    Complex64::new(t.cos(), t.sin())
}

/// Smallest power-of-two exponent with 2^g >= 4 (degree + n_den + 1).
pub fn required_grid_log2(degree_bound: usize, n_den: usize) -> u32 {
    let need = 4 * (degree_bound + n_den + 1);
    (usize::BITS - (need - 1).leading_zeros()).max(2)
}

/// Fourier bins of the samples: bin j holds (1/G) sum_k s_k z_k^{-j}.
/// Bin j for j < G/2 is the coefficient of z^j; bins above G/2 alias the
/// negative frequencies j - G.
pub fn fourier_bins(s: &GridSamples) -> Vec<CMatrix> {
    let g = s.len();
    let (rows, cols) = (s.rows(), s.cols());
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(g);
    let mut bins = vec![nalgebra::DMatrix::<Complex64>::zeros(rows, cols); g];
    let mut buf = vec![Complex64::new(0.0, 0.0); g];
    let scale = 1.0 / g as f64;
    for r in 0..rows {
        for c in 0..cols {
            for k in 0..g {
                buf[k] = s.values[k].inner()[(r, c)];
            }
            fft.process(&mut buf);
            for j in 0..g {
                bins[j][(r, c)] = buf[j] * scale;
            }
        }
    }
    bins.into_iter().map(CMatrix::from_valid).collect()
}

/// Scalar Blaschke factor b_alpha(z) = (z - alpha)/(1 - conj(alpha) z).
pub fn blaschke_factor(alpha: Complex64, z: Complex64) -> Complex64 {
    (z - alpha) / (Complex64::new(1.0, 0.0) - alpha.conj() * z)
}

/// Matrix polynomial over a scalar denominator q(z) = prod (1 - conj(a_k) z);
/// the numerical representation of every H-infinity function in the crate.
#[derive(Debug, Clone)]
pub struct RationalMatFn {
    numerator: MatPoly,
    den_zeros: Vec<Complex64>,
    grid_log2: u32,
}

impl RationalMatFn {
    pub fn new(numerator: MatPoly, den_zeros: Vec<Complex64>, grid_log2: u32) -> Result<Self> {
        for a in &den_zeros {
            if a.norm() >= 1.0 {
                return Err(Error::InvalidInput(format!(
                    "denominator zero {a} lies outside the open disk"
                )));
            }
        }
        let g = 1usize << grid_log2;
        if g < 4 * (numerator.degree() + den_zeros.len() + 1) {
            return Err(Error::InvalidInput(format!(
                "grid size {g} too small for degree {} with {} denominator zeros",
                numerator.degree(),
                den_zeros.len()
            )));
        }
        Ok(RationalMatFn {
            numerator,
            den_zeros,
            grid_log2,
        })
    }

    /// Picks the smallest admissible grid automatically.
    pub fn auto(numerator: MatPoly, den_zeros: Vec<Complex64>) -> Result<Self> {
        let g = required_grid_log2(numerator.degree(), den_zeros.len());
        Self::new(numerator, den_zeros, g)
    }

    pub fn from_poly(p: MatPoly) -> Self {
        let g = required_grid_log2(p.degree(), 0);
        RationalMatFn {
            numerator: p,
            den_zeros: Vec::new(),
            grid_log2: g,
        }
    }

    pub fn numerator(&self) -> &MatPoly {
        &self.numerator
    }

    pub fn den_zeros(&self) -> &[Complex64] {
        &self.den_zeros
    }

    pub fn grid_log2(&self) -> u32 {
        self.grid_log2
    }

    pub fn rows(&self) -> usize {
        self.numerator.rows()
    }

    pub fn cols(&self) -> usize {
        self.numerator.cols()
    }

    pub fn degree(&self) -> usize {
        self.numerator.degree()
    }

    pub fn q_at(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        self.den_zeros.iter().fold(one, |acc, a| acc * (one - a.conj() * z))
    }

    /// Point evaluation on the closed disk; the Poisson/Taylor extension for
    /// |z| < 1 and the boundary function for |z| = 1.
    pub fn eval(&self, z: Complex64) -> Result<CMatrix> {
        if z.norm() > 1.0 + 1e-9 {
            return Err(Error::OutsideDisk { modulus: z.norm() });
        }
        Ok(self.numerator.eval(z).scale(self.q_at(z).inv()))
    }

    pub fn to_grid(&self) -> GridSamples {
        self.samples_at(self.grid_log2)
    }

    pub fn samples_at(&self, grid_log2: u32) -> GridSamples {
        let g = 1usize << grid_log2;
        let values = (0..g)
            .map(|k| {
                let z = grid_node(k, g);
                self.numerator.eval(z).scale(self.q_at(z).inv())
            })
            .collect();
        GridSamples { values }
    }

    /// Samples of F(z_k)^* on the function's own grid.
    pub fn adjoint_on_circle(&self) -> GridSamples {
        self.to_grid().adjoint()
    }

    /// The tilde involution F~(z) = F(conj z)^*: coefficients become their
    /// adjoints and denominator zeros their conjugates.
    pub fn tilde(&self) -> RationalMatFn {
        RationalMatFn {
            numerator: self.numerator.tilde(),
            den_zeros: self.den_zeros.iter().map(|a| a.conj()).collect(),
            grid_log2: self.grid_log2,
        }
    }

    /// Truncated Taylor expansion with `n_terms` coefficients.
    pub fn taylor_poly(&self, n_terms: usize) -> MatPoly {
        assert!(n_terms > 0);
        // series of 1/q via convolved geometric series
        let mut inv_q = vec![Complex64::new(0.0, 0.0); n_terms];
        inv_q[0] = Complex64::new(1.0, 0.0);
        for a in &self.den_zeros {
            let ac = a.conj();
            // multiply by 1/(1 - ac z) = sum ac^n z^n
            let mut out = vec![Complex64::new(0.0, 0.0); n_terms];
            let mut pw = Complex64::new(1.0, 0.0);
            let mut powers = Vec::with_capacity(n_terms);
            for _ in 0..n_terms {
                powers.push(pw);
                pw *= ac;
            }
            for n in 0..n_terms {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..=n {
                    acc += inv_q[m] * powers[n - m];
                }
                out[n] = acc;
            }
            inv_q = out;
        }
        let (rows, cols) = (self.rows(), self.cols());
        let mut coeffs = Vec::with_capacity(n_terms);
        for n in 0..n_terms {
            let mut acc = CMatrix::zeros(rows, cols);
            for m in 0..=n.min(self.numerator.coeffs().len() - 1) {
                acc = acc.add(&self.numerator.coeffs()[m].scale(inv_q[n - m]));
            }
            coeffs.push(acc);
        }
        MatPoly { coeffs }
    }
}

/// Recover a rational function from boundary samples, certifying that after
/// clearing the claimed denominator the data is a polynomial of the claimed
/// degree. Fails with `CertificationFailure` when any out-of-band bin
/// exceeds `tol.abs`.
pub fn from_grid(
    s: &GridSamples,
    degree_bound: usize,
    den_zeros: &[Complex64],
    tol: &Tolerance,
) -> Result<RationalMatFn> {
    let g = s.len();
    if g < 4 * (degree_bound + den_zeros.len() + 1) {
        return Err(Error::InvalidInput(format!(
            "grid size {g} below 4*(degree {degree_bound} + {} den zeros + 1)",
            den_zeros.len()
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    let cleared: Vec<CMatrix> = (0..g)
        .map(|k| {
            let z = grid_node(k, g);
            let q = den_zeros.iter().fold(one, |acc, a| acc * (one - a.conj() * z));
            s.values[k].scale(q)
        })
        .collect();
    let bins = fourier_bins(&GridSamples { values: cleared });
    let mut residual = 0.0f64;
    for bin in bins.iter().take(g).skip(degree_bound + 1) {
        residual = residual.max(bin.norm_fro());
    }
    if residual > tol.abs {
        return Err(Error::CertificationFailure {
            residual,
            tol: tol.abs,
        });
    }
    let numerator = MatPoly::new(bins[..=degree_bound].to_vec())?;
    RationalMatFn::new(
        numerator,
        den_zeros.to_vec(),
        required_grid_log2(degree_bound, den_zeros.len()),
    )
}

/// Analytic-part extraction: succeeds iff every negative-frequency bin is
/// below `tol.abs`, returning the nonnegative-frequency polynomial part.
/// This is the numerical membership test for H-infinity.
pub fn analytic_part_certify(
    s: &GridSamples,
    degree_bound: usize,
    tol: &Tolerance,
) -> Result<MatPoly> {
    let g = s.len();
    if g < 4 * (degree_bound + 1) {
        return Err(Error::InvalidInput(format!(
            "grid size {g} below 4*(degree {degree_bound} + 1)"
        )));
    }
    let bins = fourier_bins(s);
    let mut neg = 0.0f64;
    for bin in bins.iter().take(g).skip(g / 2) {
        neg = neg.max(bin.norm_fro());
    }
    if neg > tol.abs {
        return Err(Error::NotAnalytic { residual: neg });
    }
    let mut tail = 0.0f64;
    for bin in bins.iter().take(g / 2).skip(degree_bound + 1) {
        tail = tail.max(bin.norm_fro());
    }
    if tail > tol.abs {
        return Err(Error::CertificationFailure {
            residual: tail,
            tol: tol.abs,
        });
    }
    MatPoly::new(bins[..=degree_bound].to_vec())
}

/// Product F G as a certified rational function; denominator zero lists
/// concatenate and the grid is sized for the degree sum.
pub fn multiply(f: &RationalMatFn, g: &RationalMatFn) -> Result<RationalMatFn> {
    if f.cols() != g.rows() {
        return Err(Error::ShapeMismatch(format!(
            "product of {}x{} and {}x{}",
            f.rows(),
            f.cols(),
            g.rows(),
            g.cols()
        )));
    }
    let degree_bound = f.degree() + g.degree();
    let mut den = f.den_zeros.clone();
    den.extend_from_slice(&g.den_zeros);
    let gl = required_grid_log2(degree_bound, den.len());
    let sf = f.samples_at(gl);
    let sg = g.samples_at(gl);
    // product of exact rationals is bandlimited, so a tight tolerance holds
    let tol = Tolerance::default().with_abs(1e-10 * (1.0 + f.sup_grid_norm() * g.sup_grid_norm()));
    from_grid(&sf.mul(&sg)?, degree_bound, &den, &tol)
}

impl RationalMatFn {
    fn sup_grid_norm(&self) -> f64 {
        self.to_grid()
            .values()
            .iter()
            .map(|m| m.norm_fro())
            .fold(0.0, f64::max)
    }
}

/// Coefficients {A_n} with F(z) = sum A_n b_alpha(z)^n, extracted through the
/// disk automorphism; fails certification when F is not a polynomial of
/// degree `n_max` in b_alpha.
pub fn compose_blaschke(
    f: &RationalMatFn,
    alpha: Complex64,
    n_max: usize,
    tol: &Tolerance,
) -> Result<Vec<CMatrix>> {
    let gl = required_grid_log2(n_max, 0).max(f.grid_log2);
    let g = 1usize << gl;
    let mut values = Vec::with_capacity(g);
    for k in 0..g {
        let w = grid_node(k, g);
        // F(b_{-alpha}(w)) = sum A_n w^n
        let z = blaschke_factor(-alpha, w);
        values.push(f.eval(z)?);
    }
    let shifted = from_grid(&GridSamples::new(values)?, n_max, &[], tol)?;
    Ok(shifted.numerator.padded(n_max + 1).coeffs().to_vec())
}

/// Reconstitute F = sum A_n b_alpha^n as a rational function over the
/// repeated denominator zero alpha.
pub fn shift_back(coeffs: &[CMatrix], alpha: Complex64, tol: &Tolerance) -> Result<RationalMatFn> {
    if coeffs.is_empty() {
        return Err(Error::InvalidInput("empty coefficient list".into()));
    }
    let n = coeffs.len() - 1;
    let den: Vec<Complex64> = vec![alpha; n];
    let gl = required_grid_log2(n, n);
    let g = 1usize << gl;
    let mut values = Vec::with_capacity(g);
    for k in 0..g {
        let z = grid_node(k, g);
        let b = blaschke_factor(alpha, z);
        let mut acc = CMatrix::zeros(coeffs[0].rows(), coeffs[0].cols());
        for m in coeffs.iter().rev() {
            acc = acc.scale(b).add(m);
        }
        values.push(acc);
    }
    from_grid(&GridSamples::new(values)?, n, &den, tol)
}

/// Max over the grid of ||F(z_k)* F(z_k) - I||_F <= tol.abs.
pub fn is_inner(f: &RationalMatFn, tol: &Tolerance) -> bool {
    inner_residual(f).0 <= tol.abs
}

pub fn is_two_sided_inner(f: &RationalMatFn, tol: &Tolerance) -> bool {
    let (left, right) = inner_residual(f);
    left <= tol.abs && right <= tol.abs
}

/// (max ||F*F - I||, max ||F F* - I||) over the grid.
pub fn inner_residual(f: &RationalMatFn) -> (f64, f64) {
    let id_c = CMatrix::identity(f.cols());
    let id_r = CMatrix::identity(f.rows());
    let mut left = 0.0f64;
    let mut right = 0.0f64;
    for v in f.to_grid().values() {
        left = left.max(v.adjoint().mul(v).sub(&id_c).norm_fro());
        right = right.max(v.mul(&v.adjoint()).sub(&id_r).norm_fro());
    }
    (left, right)
}

#[derive(Serialize, Deserialize)]
struct RationalMatFnRepr {
    coeffs: Vec<CMatrix>,
    den_zeros: Vec<[f64; 2]>,
    grid_log2: u32,
}

impl Serialize for RationalMatFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalMatFnRepr {
            coeffs: self.numerator.coeffs().to_vec(),
            den_zeros: self.den_zeros.iter().map(|a| [a.re, a.im]).collect(),
            grid_log2: self.grid_log2,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalMatFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = RationalMatFnRepr::deserialize(d)?;
        let numerator = MatPoly::new(repr.coeffs).map_err(D::Error::custom)?;
        let den: Vec<Complex64> = repr
            .den_zeros
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let gl = repr
            .grid_log2
            .max(required_grid_log2(numerator.degree(), den.len()));
        RationalMatFn::new(numerator, den, gl).map_err(D::Error::custom)
    }
}
