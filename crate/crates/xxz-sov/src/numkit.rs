//! Dense complex numerical kit: matrices, polynomials, spectra.
//!
//! Everything in this crate operates on dense complex data at desk scale (matrix
//! dimensions ≤ 256, polynomial degrees of a few dozen), so the kit favors
//! transparency and reproducibility over asymptotics:
//!
//! * [`CMatrix`] — row-major dense complex matrix with partial-pivot LU
//!   determinants and solves, Kronecker products, and a characteristic polynomial
//!   via the Faddeev–LeVerrier recursion with similarity pre-balancing,
//! * [`CPoly`] — ascending-coefficient complex polynomial with an
//!   Aberth–Ehrlich simultaneous root finder (convex-hull initial radii),
//! * [`inverse_iteration`] — shifted inverse iteration for a single eigenvector,
//! * [`Tolerance`] — the mixed absolute/relative comparison used across the crate.
//!
//! All randomized pieces (inverse-iteration restarts) are seeded explicitly, so
//! every routine here is a deterministic function of its arguments.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

/// Shorthand for `Complex::new`.
#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Shorthand for a purely real complex scalar.
#[inline]
pub fn cr(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// Absolute Newton-correction length below which an Aberth iterate counts as
/// converged. `1e-12` leaves two orders of magnitude of slack above the
/// double-precision floor for the O(1)–O(10²) root magnitudes this crate
/// produces (separation variables are hyperbolic functions of O(1) rapidities).
const ABERTH_TOL: f64 = 1e-12;

/// Hard cap on Aberth sweeps before reporting non-convergence.
const ABERTH_MAX_ITERS: usize = 400;

/// Inverse-iteration residual target, relative to `max(1, ‖A‖_max)`: the
/// eigenvector is accepted once `‖Av − λ̂v‖_∞` drops below this times the matrix
/// scale. `1e-9` matches the eigen-residual budget of the spectral layer.
const INV_IT_TOL: f64 = 1e-9;

/// Errors produced by the numeric kit.
#[derive(Debug, Error)]
pub enum NumError {
    /// A linear solve hit an exactly singular pivot.
    #[error("singular linear system in {0}")]
    Singular(&'static str),
    /// An iteration failed to reach its tolerance within its budget.
    #[error("{0} did not converge")]
    NonConvergence(&'static str),
}

/// Mixed absolute/relative tolerance: `x ≈ y` iff
/// `|x − y| ≤ atol + rtol · max(|x|, |y|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Absolute term of the bound.
    pub atol: f64,
    /// Relative term of the bound.
    pub rtol: f64,
}

impl Default for Tolerance {
    /// Defaults (`atol = 1e-10`, `rtol = 1e-9`) sized for quantities assembled
    /// from O(1) hyperbolic function values with a few hundred flops of noise.
    fn default() -> Self {
        Tolerance { atol: 1e-10, rtol: 1e-9 }
    }
}

impl Tolerance {
    /// Tolerance with equal absolute and relative terms.
    pub fn uniform(tol: f64) -> Self {
        Tolerance { atol: tol, rtol: tol }
    }

    /// Mixed comparison for complex scalars.
    pub fn close(&self, x: Complex, y: Complex) -> bool {
        (x - y).norm() <= self.atol + self.rtol * x.norm().max(y.norm())
    }

    /// Mixed comparison for real scalars.
    pub fn close_f64(&self, x: f64, y: f64) -> bool {
        (x - y).abs() <= self.atol + self.rtol * x.abs().max(y.abs())
    }

    /// Mixed comparison entrywise over two equally long slices.
    pub fn close_slice(&self, xs: &[Complex], ys: &[Complex]) -> bool {
        xs.len() == ys.len() && xs.iter().zip(ys).all(|(&x, &y)| self.close(x, y))
    }
}

// ---------------------------------------------------------------------------
// Vectors
// ---------------------------------------------------------------------------

/// Bilinear dot product `Σ_i a_i b_i` (no conjugation).
pub fn vec_dot(a: &[Complex], b: &[Complex]) -> Complex {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Hermitian dot product `Σ_i conj(a_i) b_i`.
pub fn vec_hdot(a: &[Complex], b: &[Complex]) -> Complex {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x.conj() * y).sum()
}

/// Euclidean norm.
pub fn vec_norm2(a: &[Complex]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Sup norm.
pub fn vec_norm_inf(a: &[Complex]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<Complex>,
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.nrows, self.ncols)?;
        for i in 0..self.nrows {
            write!(f, "  ")?;
            for j in 0..self.ncols {
                write!(f, "{:.6e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.data[i * self.ncols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.data[i * self.ncols + j]
    }
}

impl CMatrix {
    /// Zero matrix of shape `nrows × ncols`.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CMatrix { nrows, ncols, data: vec![ZERO; nrows * ncols] }
    }

    /// Identity matrix of dimension `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Matrix from a closure over `(row, col)`.
    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Matrix from rows; panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<Complex>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        CMatrix { nrows, ncols, data: rows.concat() }
    }

    /// Number of rows.
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Number of columns.
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Flat row-major data.
    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    /// True when the matrix is square.
    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Entrywise sum with another matrix of the same shape.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        CMatrix { nrows: self.nrows, ncols: self.ncols, data }
    }

    /// Entrywise difference with another matrix of the same shape.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        CMatrix { nrows: self.nrows, ncols: self.ncols, data }
    }

    /// Scalar multiple.
    pub fn scale(&self, s: Complex) -> Self {
        let data = self.data.iter().map(|&a| s * a).collect();
        CMatrix { nrows: self.nrows, ncols: self.ncols, data }
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "inner dimensions must agree");
        let mut out = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let aik = self[(i, k)];
                if aik == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.ncols..(i + 1) * other.ncols];
                for (d, &o) in dst.iter_mut().zip(orow) {
                    *d += aik * o;
                }
            }
        }
        out
    }

    /// Matrix–vector product.
    pub fn mat_vec(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(self.ncols, v.len());
        (0..self.nrows).map(|i| vec_dot(self.row(i), v)).collect()
    }

    /// Transpose (no conjugation).
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].conj())
    }

    /// Trace of a square matrix.
    pub fn trace(&self) -> Complex {
        assert!(self.is_square());
        (0..self.nrows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (other.nrows, other.ncols);
        let mut out = Self::zeros(self.nrows * p, self.ncols * q);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..p {
                    for l in 0..q {
                        out[(i * p + k, j * q + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Bilinear outer product `u vᵀ` (no conjugation).
    pub fn outer(u: &[Complex], v: &[Complex]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
    }

    /// Entrywise mixed-tolerance comparison.
    pub fn approx_eq(&self, other: &Self, tol: &Tolerance) -> bool {
        (self.nrows, self.ncols) == (other.nrows, other.ncols)
            && tol.close_slice(&self.data, &other.data)
    }

    /// Determinant via partial-pivot LU; an exactly singular factorization
    /// yields `0`.
    pub fn det(&self) -> Complex {
        assert!(self.is_square());
        match Lu::factor(self) {
            Some(lu) => lu.det(),
            None => ZERO,
        }
    }

    /// Solve `self · x = b` via partial-pivot LU.
    pub fn solve(&self, b: &[Complex]) -> Result<Vec<Complex>, NumError> {
        assert!(self.is_square());
        assert_eq!(self.nrows, b.len());
        let lu = Lu::factor(self).ok_or(NumError::Singular("solve"))?;
        Ok(lu.solve(b))
    }

    /// Solve `self · X = B` column by column with a single factorization.
    pub fn solve_matrix(&self, b: &Self) -> Result<Self, NumError> {
        assert!(self.is_square());
        assert_eq!(self.nrows, b.nrows);
        let lu = Lu::factor(self).ok_or(NumError::Singular("solve_matrix"))?;
        let mut out = Self::zeros(b.nrows, b.ncols);
        for j in 0..b.ncols {
            let col: Vec<Complex> = (0..b.nrows).map(|i| b[(i, j)]).collect();
            let x = lu.solve(&col);
            for i in 0..b.nrows {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }

    /// Matrix inverse.
    pub fn inverse(&self) -> Result<Self, NumError> {
        self.solve_matrix(&Self::identity(self.nrows))
    }

    /// Characteristic polynomial `det(λI − A)` with ascending coefficients and
    /// unit leading coefficient, via the Faddeev–LeVerrier recursion.
    ///
    /// The matrix is first balanced (power-of-two diagonal similarity) and then
    /// scaled by its ∞-norm so the recursion runs on a matrix of spectral radius
    /// ≤ 1; the coefficients are rescaled afterwards. Supported up to dimension
    /// 256, which keeps the O(n⁴) recursion well inside a second.
    pub fn char_poly(&self) -> CPoly {
        assert!(self.is_square());
        let n = self.nrows;
        assert!(n <= 256, "char_poly supports dimensions up to 256, got {n}");
        if n == 0 {
            return CPoly::new(vec![ONE]);
        }
        let balanced = self.balanced();
        // Scale so that ρ(B) ≤ ‖B‖_∞ = 1; a zero norm means a nilpotent zero
        // matrix whose characteristic polynomial is λⁿ.
        let scale = (0..n)
            .map(|i| balanced.row(i).iter().map(|x| x.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            let mut coeffs = vec![ZERO; n + 1];
            coeffs[n] = ONE;
            return CPoly::new(coeffs);
        }
        let b = balanced.scale(cr(1.0 / scale));

        // Faddeev–LeVerrier: M₁ = B, c_{n-1} = −tr M₁,
        // M_{k+1} = B (M_k + c_{n-k} I), c_{n-k-1} = −tr M_{k+1} / (k+1).
        let mut coeffs = vec![ZERO; n + 1];
        coeffs[n] = ONE;
        let mut m = b.clone();
        coeffs[n - 1] = -m.trace();
        for k in 2..=n {
            let mut shifted = m;
            for i in 0..n {
                shifted[(i, i)] += coeffs[n - k + 1];
            }
            m = b.matmul(&shifted);
            coeffs[n - k] = -m.trace() / cr(k as f64);
        }

        // Undo the norm scaling: det(λI − sB) = sⁿ det((λ/s)I − B).
        let mut pw = 1.0;
        for k in (0..n).rev() {
            pw *= scale;
            coeffs[k] *= cr(pw);
        }
        CPoly::new(coeffs)
    }

    /// Power-of-two diagonal similarity that balances row and column norms
    /// (Osborne-style, no permutations); leaves the spectrum untouched.
    fn balanced(&self) -> Self {
        let n = self.nrows;
        let mut b = self.clone();
        for _sweep in 0..32 {
            let mut converged = true;
            for i in 0..n {
                let mut cnorm = 0.0;
                let mut rnorm = 0.0;
                for j in 0..n {
                    if j != i {
                        cnorm += b[(j, i)].norm();
                        rnorm += b[(i, j)].norm();
                    }
                }
                if cnorm == 0.0 || rnorm == 0.0 {
                    continue;
                }
                // Ideal factor √(r/c), rounded to a power of two so the
                // similarity is exact in floating point.
                let f = (0.5 * (rnorm / cnorm).log2()).round().exp2();
                if f != 1.0 && cnorm * f + rnorm / f < 0.95 * (cnorm + rnorm) {
                    converged = false;
                    for j in 0..n {
                        let entry = b[(i, j)] / f;
                        b[(i, j)] = entry;
                        let entry = b[(j, i)] * f;
                        b[(j, i)] = entry;
                    }
                }
            }
            if converged {
                break;
            }
        }
        b
    }
}

/// Partial-pivot LU factorization (`P A = L U`, unit diagonal in `L`), stored
/// packed. `factor` returns `None` on an exactly zero pivot column.
struct Lu {
    lu: CMatrix,
    piv: Vec<usize>,
    sign: f64,
}

impl Lu {
    fn factor(a: &CMatrix) -> Option<Self> {
        let n = a.nrows;
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            // Pivot on the largest modulus in column k at or below the diagonal.
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))?;
            if pmax == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                piv.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let upd = lu[(k, j)] * factor;
                    lu[(i, j)] -= upd;
                }
            }
        }
        Some(Lu { lu, piv, sign })
    }

    fn det(&self) -> Complex {
        let mut d = cr(self.sign);
        for i in 0..self.lu.nrows {
            d *= self.lu[(i, i)];
        }
        d
    }

    fn solve(&self, b: &[Complex]) -> Vec<Complex> {
        let n = self.lu.nrows;
        // Apply the permutation, then forward/backward substitution.
        let mut x: Vec<Complex> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let upd = self.lu[(i, j)] * x[j];
                x[i] -= upd;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let upd = self.lu[(i, j)] * x[j];
                x[i] -= upd;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

/// Complex polynomial with ascending coefficients (`coeffs[k]` multiplies `z^k`).
///
/// Exact zeros in the highest positions are trimmed on construction, so
/// `degree` reflects the true degree; the all-zero polynomial has an empty
/// coefficient list.
#[derive(Debug, Clone, PartialEq)]
pub struct CPoly {
    coeffs: Vec<Complex>,
}

impl CPoly {
    /// Build from ascending coefficients, trimming exact high-order zeros.
    pub fn new(mut coeffs: Vec<Complex>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        CPoly { coeffs }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex]) -> Self {
        let mut coeffs = vec![ONE];
        for &r in roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (k, &a) in coeffs.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= r * a;
            }
            coeffs = next;
        }
        CPoly::new(coeffs)
    }

    /// Ascending coefficients (trimmed).
    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// True for the identically zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex) -> Complex {
        self.coeffs.iter().rev().fold(ZERO, |acc, &a| acc * z + a)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_deriv(&self, z: Complex) -> (Complex, Complex) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &a in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    }

    /// Product of two polynomials.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return CPoly::new(vec![]);
        }
        let mut coeffs = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        CPoly::new(coeffs)
    }

    /// All roots (with multiplicity) via Aberth–Ehrlich, lexicographically
    /// sorted by `(re, im)`.
    ///
    /// Exact zero roots are deflated first; the rest are refined simultaneously
    /// until every Newton correction `|p(z)/p′(z)|` is below [`ABERTH_TOL`] (or
    /// the floating floor `8·ε·|z|` for large roots). Errors after
    /// [`ABERTH_MAX_ITERS`] sweeps.
    pub fn roots(&self) -> Result<Vec<Complex>, NumError> {
        assert!(!self.is_zero(), "the zero polynomial has no root set");
        // Deflate exact zero roots: p(z) = z^m q(z).
        let m = self.coeffs.iter().position(|&a| a != ZERO).unwrap_or(0);
        let mut roots = vec![ZERO; m];
        let q: Vec<Complex> = self.coeffs[m..].to_vec();
        let n = q.len() - 1;
        if n == 0 {
            return Ok(roots);
        }
        // Monic normalization.
        let lead = q[n];
        let monic = CPoly { coeffs: q.iter().map(|&a| a / lead).collect() };
        let mut z = aberth_initial(&monic.coeffs);
        let mut converged = vec![false; n];
        let eps = f64::EPSILON;
        for _iter in 0..ABERTH_MAX_ITERS {
            let mut all_done = true;
            for k in 0..n {
                if converged[k] {
                    continue;
                }
                let (p, dp) = monic.eval_with_deriv(z[k]);
                if p == ZERO {
                    converged[k] = true;
                    continue;
                }
                if dp == ZERO {
                    // Stationary point of p: nudge off it and retry next sweep.
                    let nudge = c(1e-8, 1e-8) * (1.0 + z[k].norm());
                    z[k] += nudge;
                    all_done = false;
                    continue;
                }
                let w = p / dp;
                if w.norm() <= ABERTH_TOL.max(8.0 * eps * z[k].norm()) {
                    converged[k] = true;
                    continue;
                }
                let s: Complex = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).finv()).sum();
                let denom = ONE - w * s;
                let step = if denom == ZERO { w } else { w / denom };
                z[k] -= step;
                all_done = false;
            }
            if all_done {
                roots.extend_from_slice(&z);
                roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
                return Ok(roots);
            }
        }
        Err(NumError::NonConvergence("Aberth–Ehrlich root refinement"))
    }
}

/// Free-function form of [`CPoly::roots`].
pub fn poly_roots(p: &CPoly) -> Result<Vec<Complex>, NumError> {
    p.roots()
}

/// Initial Aberth guesses: radii from the upper convex hull of
/// `(k, ln |a_k|)` (Newton-polygon estimates of root magnitudes), spread on
/// circles with an incommensurate phase offset.
fn aberth_initial(monic: &[Complex]) -> Vec<Complex> {
    let n = monic.len() - 1;
    // Hull points for nonzero coefficients; a₀ ≠ 0 (zero roots were deflated)
    // and a_n = 1, so both endpoints are present.
    let pts: Vec<(f64, f64)> = monic
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != ZERO)
        .map(|(k, &a)| (k as f64, a.norm().ln()))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut z = Vec::with_capacity(n);
    let mut t = 0usize;
    for seg in hull.windows(2) {
        let (i, yi) = seg[0];
        let (j, yj) = seg[1];
        let count = (j - i) as usize;
        let radius = ((yi - yj) / (j - i)).exp();
        for q in 0..count {
            // Global 2πt/n spacing plus a fixed irrational-ish offset keeps the
            // start symmetric-configuration free.
            let theta = 2.0 * std::f64::consts::PI * (t as f64) / (n as f64)
                + 2.0 * std::f64::consts::PI * (q as f64) / (count as f64 * n as f64)
                + 0.7;
            z.push(Complex::from_polar(radius, theta));
            t += 1;
        }
    }
    debug_assert_eq!(z.len(), n);
    z
}

// ---------------------------------------------------------------------------
// Inverse iteration
// ---------------------------------------------------------------------------

/// Shifted inverse iteration: eigenpair of `a` with eigenvalue nearest `mu`.
///
/// Starts from the all-ones vector; if 50 sweeps with occasional Rayleigh shift
/// updates do not push the residual `‖Av − λ̂v‖_∞` below
/// `INV_IT_TOL · max(1, ‖A‖_max)`, the start vector is re-randomized from a
/// ChaCha stream seeded with `seed` (up to 5 restarts). An exactly singular
/// shift is cured by a relative `1e-13` diagonal perturbation, which moves the
/// iteration matrix without changing what it converges to.
pub fn inverse_iteration(
    a: &CMatrix,
    mu: Complex,
    seed: u64,
) -> Result<(Complex, Vec<Complex>), NumError> {
    assert!(a.is_square());
    let n = a.nrows();
    let scale = a.norm_max().max(1.0);
    let tol = INV_IT_TOL * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for restart in 0..=5 {
        let mut v: Vec<Complex> = if restart == 0 {
            vec![ONE; n]
        } else {
            (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
        };
        let nrm = vec_norm2(&v);
        v.iter_mut().for_each(|x| *x /= nrm);

        let mut shift = mu;
        let mut lu = shifted_lu(a, shift, scale)?;
        for sweep in 1..=50 {
            let mut w = lu.solve(&v);
            let nrm = vec_norm2(&w);
            if !nrm.is_finite() || nrm == 0.0 {
                break; // hopeless start; re-randomize
            }
            w.iter_mut().for_each(|x| *x /= nrm);
            v = w;
            let av = a.mat_vec(&v);
            let lambda = vec_hdot(&v, &av);
            let residual = (0..n)
                .map(|i| (av[i] - lambda * v[i]).norm())
                .fold(0.0, f64::max);
            if residual < tol {
                return Ok((lambda, v));
            }
            // Occasional shift update accelerates clustered spectra without
            // re-factoring every sweep.
            if sweep % 10 == 0 {
                shift = lambda;
                lu = shifted_lu(a, shift, scale)?;
            }
        }
    }
    Err(NumError::NonConvergence("inverse iteration"))
}

/// LU of `A − shift·I`, with a tiny diagonal perturbation retry when the shift
/// sits exactly on an eigenvalue.
fn shifted_lu(a: &CMatrix, shift: Complex, scale: f64) -> Result<Lu, NumError> {
    let n = a.nrows();
    let mut b = a.clone();
    for i in 0..n {
        b[(i, i)] -= shift;
    }
    let mut bump = 1e-13 * scale;
    for _ in 0..4 {
        if let Some(lu) = Lu::factor(&b) {
            return Ok(lu);
        }
        for i in 0..n {
            b[(i, i)] += cr(bump);
        }
        bump *= 100.0;
    }
    Err(NumError::Singular("inverse iteration shift"))
}
