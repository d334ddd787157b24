//! Separate states and the determinant form of their pairings.
//!
//! A *separate* state over one SOV family is a sum over all labels `h` whose
//! coefficient factorizes into per-site values times the Vandermonde of the
//! selected cosh-coordinates:
//!
//! ```text
//! ⟨α| = Σ_h ∏_a α_a(ζ_a^{(h_a)}) · ∏_{b<a} (η_a^{(h_a)} − η_b^{(h_b)}) · ⟨ε,h|,
//! ```
//!
//! and likewise for right states. Transfer-matrix eigenstates are of this
//! form, but so are many other states of interest. The central result
//! implemented here: the action of a left separate state on a right one
//! collapses, by multilinearity of the Vandermonde determinant, to a single
//! `N×N` determinant
//!
//! ```text
//! ⟨α|β⟩ = det M,   M_{a,b} = Σ_{h=0,1} α_a(ζ_a^{(h)}) β_a(ζ_a^{(h)}) (η_a^{(h)})^{b−1},
//! ```
//!
//! ([`pairing_det`]). For two distinct eigenpairs the pairing vanishes; the
//! structural reason is that the coefficient vector of the difference of the
//! two eigenvalue functions is a null vector of `M` ([`orthogonality_certificate`]).

use thiserror::Error;

use crate::numkit::{cr, CMatrix, Complex};
use crate::sov::{HVector, SovBasis, SovPoints};
use crate::spectrum::SovEigenpair;

/// Whether a separate state is a covector (acts from the left) or a vector.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StateSide {
    /// Covector: assembles over the left basis family.
    Left,
    /// Vector: assembles over the right basis family.
    Right,
}

/// Errors produced by the separate-state layer.
#[derive(Debug, Error)]
pub enum SeparatesError {
    /// The pairing needs a left state acting on a right state.
    #[error("expected a left state acting on a right state")]
    WrongSides,
    /// The inputs belong to different SOV families or parameter sets.
    #[error("states belong to different SOV families")]
    FamilyMismatch,
    /// Wrong number of per-site factors.
    #[error("state has {got} per-site factor pairs, expected {expect}")]
    FactorCount {
        /// Pairs supplied.
        got: usize,
        /// Pairs required (`N`).
        expect: usize,
    },
}

/// A state in separate form: the per-site factor values at the two node
/// labels of one SOV family. The dense coordinates are recovered by
/// [`assemble`].
#[derive(Debug, Clone)]
pub struct SeparateState {
    side: StateSide,
    eps: crate::algebra::Side,
    factors: Vec<(Complex, Complex)>,
}

impl SeparateState {
    /// Wrap per-site factor pairs `(value at ζ_a^{(0)}, value at ζ_a^{(1)})`,
    /// site 1 first.
    pub fn new(
        side: StateSide,
        eps: crate::algebra::Side,
        factors: Vec<(Complex, Complex)>,
    ) -> Self {
        Self { side, eps, factors }
    }

    /// Left separate form of a built eigenpair: the `Q̄` factors in the
    /// `Q̄(ζ_a^{(0)}) = 1` gauge of the spectrum layer.
    pub fn from_eigen_left(pair: &SovEigenpair) -> Self {
        let eps = pair.tau().params().case.general_side();
        let factors = pair.qbar_ratios().iter().map(|&q| (cr(1.0), q)).collect();
        Self { side: StateSide::Left, eps, factors }
    }

    /// Right separate form of a built eigenpair: the `Q` factors in the
    /// `Q(ζ_a^{(0)}) = 1` gauge of the spectrum layer.
    pub fn from_eigen_right(pair: &SovEigenpair) -> Self {
        let eps = pair.tau().params().case.general_side();
        let factors = pair.q_ratios().iter().map(|&q| (cr(1.0), q)).collect();
        Self { side: StateSide::Right, eps, factors }
    }

    /// Covector or vector.
    pub fn side(&self) -> StateSide {
        self.side
    }

    /// SOV family the state separates over.
    pub fn eps(&self) -> crate::algebra::Side {
        self.eps
    }

    /// Per-site factor pairs, site 1 first.
    pub fn factors(&self) -> &[(Complex, Complex)] {
        &self.factors
    }

    /// Factor value `α_a(ζ_a^{(h)})` for the 1-based site `a`.
    pub fn factor(&self, a: usize, h: u8) -> Complex {
        let (f0, f1) = self.factors[a - 1];
        if h == 0 {
            f0
        } else {
            f1
        }
    }
}

/// Dense coordinates of a separate state over a prebuilt basis of the same
/// family: `Σ_h ∏_a factor_a(ζ_a^{(h_a)}) μ(h) |ε,h⟩` (or the covector
/// analogue for left states).
pub fn assemble(state: &SeparateState, basis: &SovBasis) -> Result<Vec<Complex>, SeparatesError> {
    if state.eps != basis.eps() {
        return Err(SeparatesError::FamilyMismatch);
    }
    let n = basis.points().n_sites();
    if state.factors.len() != n {
        return Err(SeparatesError::FactorCount { got: state.factors.len(), expect: n });
    }
    let mut out = vec![cr(0.0); basis.dim()];
    for h in HVector::all(n) {
        let mut coeff = basis.measure(&h);
        for a in 1..=n {
            coeff *= state.factor(a, h.bit(a));
        }
        let part = match state.side {
            StateSide::Left => basis.left(&h),
            StateSide::Right => basis.right(&h),
        };
        for (acc, x) in out.iter_mut().zip(part) {
            *acc += coeff * x;
        }
    }
    Ok(out)
}

/// Pairing matrix `M_{a,b} = Σ_{h=0,1} α_a(ζ_a^{(h)}) β_a(ζ_a^{(h)}) (η_a^{(h)})^{b−1}`.
fn pairing_matrix(
    alpha: &SeparateState,
    beta: &SeparateState,
    points: &SovPoints,
) -> Result<CMatrix, SeparatesError> {
    if alpha.side != StateSide::Left || beta.side != StateSide::Right {
        return Err(SeparatesError::WrongSides);
    }
    if alpha.eps != beta.eps || alpha.eps != points.eps() {
        return Err(SeparatesError::FamilyMismatch);
    }
    let n = points.n_sites();
    if alpha.factors.len() != n {
        return Err(SeparatesError::FactorCount { got: alpha.factors.len(), expect: n });
    }
    if beta.factors.len() != n {
        return Err(SeparatesError::FactorCount { got: beta.factors.len(), expect: n });
    }
    Ok(CMatrix::from_fn(n, n, |a, b| {
        (0..=1u8)
            .map(|h| {
                alpha.factor(a + 1, h)
                    * beta.factor(a + 1, h)
                    * points.eta_pt(a + 1, h).powu(b as u32)
            })
            .sum()
    }))
}

/// Action of a left separate state on a right one as the `N×N` determinant
/// of the pairing matrix. Equals the direct contraction of the assembled
/// dense states.
pub fn pairing_det(
    alpha: &SeparateState,
    beta: &SeparateState,
    points: &SovPoints,
) -> Result<Complex, SeparatesError> {
    Ok(pairing_matrix(alpha, beta, points)?.det())
}

/// Componentwise certificate of eigenstate orthogonality: the residuals
/// `|Σ_b M_{a,b} c_b|`, relative to the row scale, where `M` is the pairing
/// matrix of `⟨τ|` and `|τ'⟩` and `c = c^{(τ)} − c^{(τ')}` expands the
/// difference of the two eigenvalue functions over the interpolation class.
/// For `τ = τ'` the certificate is vacuous (`c = 0`); for distinct
/// eigenvalues it exhibits the null vector that forces `det M = 0`.
pub fn orthogonality_certificate(
    pair: &SovEigenpair,
    pair_prime: &SovEigenpair,
    points: &SovPoints,
) -> Result<Vec<f64>, SeparatesError> {
    let n = points.n_sites();
    let cd: Vec<Complex> = pair
        .tau()
        .coefficients()
        .iter()
        .zip(pair_prime.tau().coefficients())
        .map(|(x, y)| x - y)
        .collect();
    if cd.len() != n {
        return Err(SeparatesError::FactorCount { got: cd.len(), expect: n });
    }
    let alpha = SeparateState::from_eigen_left(pair);
    let beta = SeparateState::from_eigen_right(pair_prime);
    let m = pairing_matrix(&alpha, &beta, points)?;
    Ok((0..n)
        .map(|a| {
            let mut dot = cr(0.0);
            let mut scale = 0.0f64;
            for b in 0..n {
                dot += m[(a, b)] * cd[b];
                scale = scale.max((m[(a, b)] * cd[b]).norm());
            }
            dot.norm() / (1.0 + scale)
        })
        .collect())
}
