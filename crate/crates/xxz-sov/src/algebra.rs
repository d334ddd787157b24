//! Model parameters, boundary scalar functions, and dense operator families.
//!
//! The model is the open spin-1/2 XXZ chain of `N` sites with anisotropy
//! `Δ = cosh η`, inhomogeneities `ξ₁…ξ_N`, and two boundary matrices `K∓(λ)`
//! parameterized by `(ζ∓, κ∓, τ∓)`. One boundary is *general* (non-diagonal,
//! `κ ≠ 0`), the other *constrained*: diagonal (`κ = 0`) or triangular (its
//! upper-right entry vanishes identically, the lower-left one is proportional
//! to an explicit coupling `tri_c`). [`BoundaryCase`] records which side is
//! general.
//!
//! The module provides:
//!
//! * [`ModelParams`] with the validity guards the separation-of-variables
//!   construction needs (inhomogeneities distinct and off the lattice of
//!   special points, boundary parameters off their singular sets),
//! * the scalar functions of the theory — reference eigenvalue functions
//!   `a(λ), d(λ)`, quantum determinants, dressed boundary coefficients
//!   `𝖺±, 𝖽±`, the boundary eigenvalue functions `𝖠₋, 𝖣₊` built from the
//!   `(α, β)` reparameterization of the general boundary, and the per-site
//!   constants entering the SOV construction,
//! * [`OperatorFamily`]: lazily memoized dense construction of the bulk
//!   monodromy blocks `A, B, C, D`, both boundary families
//!   `A∓, B∓, C∓, D∓`, and the boundary transfer matrix, plus the open-chain
//!   Hamiltonian.
//!
//! Conventions: the local basis is `(|↑⟩, |↓⟩)`; site `n` occupies bit `n−1`
//! of the global index (site 1 is the least significant bit), so the global
//! space is `V_N ⊗ ⋯ ⊗ V_1` in Kronecker order.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::numkit::{c, cr, CMatrix, Complex};

/// Hyperbolic sine, readability alias.
#[inline]
pub fn sh(z: Complex) -> Complex {
    z.sinh()
}

/// Hyperbolic cosine, readability alias.
#[inline]
pub fn ch(z: Complex) -> Complex {
    z.cosh()
}

/// Hyperbolic cotangent.
#[inline]
pub fn coth(z: Complex) -> Complex {
    z.cosh() / z.sinh()
}

/// `iπ/2`, the second special point of the boundary theory.
pub const I_PI_HALF: Complex = Complex::new(0.0, std::f64::consts::FRAC_PI_2);

/// Which boundary matrix is the general (non-diagonal) one.
///
/// `Minus`: `K₋` is general and `K₊` is diagonal or lower-triangular, so the
/// transfer matrix splits as `T = T∖⁽⁻⁾ + c₊ B₋` over the minus boundary
/// family. `Plus` is the mirror situation with `T = T∖⁽⁺⁾ + c₋ B₊`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCase {
    /// `K₋` general, `K₊` constrained.
    Minus,
    /// `K₊` general, `K₋` constrained.
    Plus,
}

/// One of the two boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// The `K₋` boundary (attached at site 1).
    Minus,
    /// The `K₊` boundary (attached at site N).
    Plus,
}

impl Side {
    /// `−1` for the minus side, `+1` for the plus side: the sign with which
    /// `η/2` shifts this side's spectral arguments.
    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }

    /// The other boundary.
    pub fn opposite(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }
}

impl BoundaryCase {
    /// The general (non-diagonal) boundary of this case.
    pub fn general_side(self) -> Side {
        match self {
            BoundaryCase::Minus => Side::Minus,
            BoundaryCase::Plus => Side::Plus,
        }
    }

    /// The constrained (diagonal or triangular) boundary of this case.
    pub fn constrained_side(self) -> Side {
        self.general_side().opposite()
    }
}

/// Distance below which two parameter values count as colliding in the
/// validity guards.
const GUARD_TOL: f64 = 1e-8;

/// Tolerance of the `(α, β)` reparameterization round-trip check; the arcsinh
/// construction is closed-form, so anything beyond a few ulps signals a
/// genuinely singular boundary.
const ALPHA_BETA_TOL: f64 = 1e-10;

/// Parameter validation failures.
#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("xi has {got} entries but n_sites = {want}")]
    XiLength { got: usize, want: usize },
    #[error("inhomogeneities collide: |xi[{a}] - xi[{b}] - ({r})*eta| = {dist:.3e} < 1e-8")]
    XiResonance { a: usize, b: usize, r: i32, dist: f64 },
    #[error("xi[{a}] sits on a singular point: |{what}| = {dist:.3e} < 1e-8")]
    XiSingular { a: usize, what: String, dist: f64 },
    #[error("sinh(zeta_{side}) vanishes (|sinh| = {dist:.3e})")]
    ZetaSingular { side: &'static str, dist: f64 },
    #[error("kappa on the general ({side}) boundary must be nonzero")]
    GeneralKappaZero { side: &'static str },
    #[error(
        "the constrained ({side}) boundary must be diagonal (kappa = 0) \
         or explicitly triangular (tri_c set); got |kappa| = {kappa:.3e}"
    )]
    ConstrainedNotDiagonal { side: &'static str, kappa: f64 },
    #[error("alpha-beta reparameterization round-trip failed on the {side} boundary")]
    AlphaBeta { side: &'static str },
}

/// Full parameter set of the open chain.
///
/// Build through [`ModelParams::new`] (all guards) or
/// [`ModelParams::homogeneous`] (boundary guards only, `ξ ≡ 0`; supports the
/// Hamiltonian checks, which live at the homogeneous point where the SOV
/// inhomogeneity guards cannot hold).
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// Chain length `N ≥ 1`.
    pub n_sites: usize,
    /// Anisotropy parameter `η`.
    pub eta: Complex,
    /// Minus-boundary parameters `(ζ₋, κ₋, τ₋)`.
    pub zeta_minus: Complex,
    pub kappa_minus: Complex,
    pub tau_minus: Complex,
    /// Plus-boundary parameters `(ζ₊, κ₊, τ₊)`.
    pub zeta_plus: Complex,
    pub kappa_plus: Complex,
    pub tau_plus: Complex,
    /// Inhomogeneities `ξ₁…ξ_N`.
    pub xi: Vec<Complex>,
    /// Which boundary is general.
    pub case: BoundaryCase,
    /// Triangular coupling of the constrained boundary; `None` means diagonal.
    /// When set, the constrained boundary's upper-right entry is identically
    /// zero and its lower-left entry is `tri_c · sh(2λ ± η)`.
    pub tri_c: Option<Complex>,
}

impl ModelParams {
    /// Validate and return the parameter set. Guards:
    ///
    /// * `ξ` has `n_sites` entries, pairwise separated: `|ξ_a − ξ_b − rη| > 1e-8`
    ///   for `r ∈ {−1, 0, 1}` (the separate-basis condition),
    /// * `ξ_a` off the boundary-singular lattice: `ξ_a ≠ 0`, `2ξ_a ≠ ±η, ±2η`
    ///   (needed by the per-site constants `k_n`, `α_n` and the node gauges),
    /// * `sh ζ∓ ≠ 0`,
    /// * general-side `κ ≠ 0`; constrained-side `κ = 0` unless `tri_c` is set
    ///   (in which case the constrained `κ, τ` are ignored entirely).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_sites: usize,
        eta: Complex,
        zeta_minus: Complex,
        kappa_minus: Complex,
        tau_minus: Complex,
        zeta_plus: Complex,
        kappa_plus: Complex,
        tau_plus: Complex,
        xi: Vec<Complex>,
        case: BoundaryCase,
        tri_c: Option<Complex>,
    ) -> Result<Self, ValidationError> {
        let params = ModelParams {
            n_sites,
            eta,
            zeta_minus,
            kappa_minus,
            tau_minus,
            zeta_plus,
            kappa_plus,
            tau_plus,
            xi,
            case,
            tri_c,
        };
        params.validate_boundary()?;
        params.validate_inhomogeneities()?;
        Ok(params)
    }

    /// Homogeneous parameter set (`ξ ≡ 0`) with boundary guards only.
    ///
    /// The open-chain Hamiltonian lives at the homogeneous point, which the
    /// separation-of-variables guards necessarily reject; operator
    /// construction is still perfectly well defined there. Separate bases and
    /// everything downstream of them cannot be built from such a parameter
    /// set — the node constructors re-check distinctness and fail cleanly.
    #[allow(clippy::too_many_arguments)]
    pub fn homogeneous(
        n_sites: usize,
        eta: Complex,
        zeta_minus: Complex,
        kappa_minus: Complex,
        tau_minus: Complex,
        zeta_plus: Complex,
        kappa_plus: Complex,
        tau_plus: Complex,
        case: BoundaryCase,
        tri_c: Option<Complex>,
    ) -> Result<Self, ValidationError> {
        let params = ModelParams {
            n_sites,
            eta,
            zeta_minus,
            kappa_minus,
            tau_minus,
            zeta_plus,
            kappa_plus,
            tau_plus,
            xi: vec![Complex::new(0.0, 0.0); n_sites],
            case,
            tri_c,
        };
        params.validate_boundary()?;
        Ok(params)
    }

    fn validate_boundary(&self) -> Result<(), ValidationError> {
        for (side, zeta) in [("minus", self.zeta_minus), ("plus", self.zeta_plus)] {
            let s = sh(zeta).norm();
            if s <= GUARD_TOL {
                return Err(ValidationError::ZetaSingular { side, dist: s });
            }
        }
        let (gen_name, gen_kappa, con_name, con_kappa) = match self.case {
            BoundaryCase::Minus => ("minus", self.kappa_minus, "plus", self.kappa_plus),
            BoundaryCase::Plus => ("plus", self.kappa_plus, "minus", self.kappa_minus),
        };
        if gen_kappa.norm() <= GUARD_TOL {
            return Err(ValidationError::GeneralKappaZero { side: gen_name });
        }
        if self.tri_c.is_none() && con_kappa.norm() > GUARD_TOL {
            return Err(ValidationError::ConstrainedNotDiagonal {
                side: con_name,
                kappa: con_kappa.norm(),
            });
        }
        Ok(())
    }

    fn validate_inhomogeneities(&self) -> Result<(), ValidationError> {
        if self.xi.len() != self.n_sites {
            return Err(ValidationError::XiLength { got: self.xi.len(), want: self.n_sites });
        }
        for a in 0..self.n_sites {
            for b in 0..self.n_sites {
                if a == b {
                    continue;
                }
                for r in [-1i32, 0, 1] {
                    let dist = (self.xi[a] - self.xi[b] - cr(r as f64) * self.eta).norm();
                    if dist <= GUARD_TOL {
                        return Err(ValidationError::XiResonance { a, b, r, dist });
                    }
                }
            }
        }
        for (a, &xa) in self.xi.iter().enumerate() {
            let checks: [(String, Complex); 5] = [
                ("xi".into(), xa),
                ("2xi - eta".into(), cr(2.0) * xa - self.eta),
                ("2xi + eta".into(), cr(2.0) * xa + self.eta),
                ("2xi - 2eta".into(), cr(2.0) * xa - cr(2.0) * self.eta),
                ("2xi + 2eta".into(), cr(2.0) * xa + cr(2.0) * self.eta),
            ];
            for (what, val) in checks {
                let dist = val.norm();
                if dist <= GUARD_TOL {
                    return Err(ValidationError::XiSingular { a, what, dist });
                }
            }
        }
        Ok(())
    }

    /// Boundary parameter triple of a side.
    pub fn boundary(&self, side: Side) -> (Complex, Complex, Complex) {
        match side {
            Side::Minus => (self.zeta_minus, self.kappa_minus, self.tau_minus),
            Side::Plus => (self.zeta_plus, self.kappa_plus, self.tau_plus),
        }
    }

    // -- Scalar functions of the theory ------------------------------------

    /// Reference eigenvalue `a(λ) = ∏ₙ sh(λ − ξₙ + η/2)`.
    pub fn a_ref(&self, lambda: Complex) -> Complex {
        let half = self.eta / cr(2.0);
        self.xi.iter().map(|&xi| sh(lambda - xi + half)).product()
    }

    /// Reference eigenvalue `d(λ) = a(λ − η) = ∏ₙ sh(λ − ξₙ − η/2)`.
    pub fn d_ref(&self, lambda: Complex) -> Complex {
        self.a_ref(lambda - self.eta)
    }

    /// Bulk quantum determinant `det_q M(λ) = a(λ + η/2) d(λ − η/2)`.
    pub fn detq_m(&self, lambda: Complex) -> Complex {
        let half = self.eta / cr(2.0);
        self.a_ref(lambda + half) * self.d_ref(lambda - half)
    }

    /// Boundary matrix entries `(a, b, c, d)` of `K∓(λ)`, honoring the
    /// constrained-side override (`b ≡ 0`, `c = tri_c · sh(2λ ± η)` when
    /// `tri_c` is set; `b = c = 0` for a diagonal constrained side).
    pub fn k_entries(&self, side: Side, lambda: Complex) -> [Complex; 4] {
        let (zeta, kappa, tau) = self.boundary(side);
        let shz = sh(zeta);
        let s = cr(side.sign()); // ∓η/2 shift: −1 for minus, +1 for plus
        let half = self.eta / cr(2.0);
        let a = sh(lambda + s * half + zeta) / shz;
        let d = sh(zeta - (lambda + s * half)) / shz;
        let sh2 = sh(cr(2.0) * lambda + s * self.eta);
        if side == self.case.constrained_side() {
            let c_entry = match self.tri_c {
                Some(t) => t * sh2,
                None => Complex::new(0.0, 0.0),
            };
            [a, Complex::new(0.0, 0.0), c_entry, d]
        } else {
            let b = kappa * tau.exp() * sh2 / shz;
            let c_entry = kappa * (-tau).exp() * sh2 / shz;
            [a, b, c_entry, d]
        }
    }

    /// Dressed boundary coefficient
    /// `𝖺±(λ) = sh(2λ ± η) sh(λ + ζ± ∓ η/2) / (sh 2λ · sh ζ±)`.
    pub fn coef_a(&self, side: Side, lambda: Complex) -> Complex {
        let (zeta, _, _) = self.boundary(side);
        let s = cr(side.sign());
        let half = self.eta / cr(2.0);
        sh(cr(2.0) * lambda + s * self.eta) * sh(lambda + zeta - s * half)
            / (sh(cr(2.0) * lambda) * sh(zeta))
    }

    /// Dressed boundary coefficient
    /// `𝖽±(λ) = sh(2λ ± η) sh(ζ± − λ ± η/2) / (sh 2λ · sh ζ±)`.
    pub fn coef_d(&self, side: Side, lambda: Complex) -> Complex {
        let (zeta, _, _) = self.boundary(side);
        let s = cr(side.sign());
        let half = self.eta / cr(2.0);
        sh(cr(2.0) * lambda + s * self.eta) * sh(zeta - lambda + s * half)
            / (sh(cr(2.0) * lambda) * sh(zeta))
    }

    /// `ζ → iπ/2` limit of the dressed coefficients:
    /// `𝖺̄±(λ) = ch(λ ∓ η/2) sh(2λ ± η) / sh 2λ` (at that point `𝖺̄± = 𝖽̄±`).
    pub fn bar_a(&self, side: Side, lambda: Complex) -> Complex {
        let s = cr(side.sign());
        let half = self.eta / cr(2.0);
        ch(lambda - s * half) * sh(cr(2.0) * lambda + s * self.eta) / sh(cr(2.0) * lambda)
    }

    /// `(α, β)` reparameterization of a boundary: the solution of
    /// `sh α ch β = sh ζ/(2κ)`, `ch α sh β = ch ζ/(2κ)` through principal
    /// arcsinh of the sum/difference combinations
    /// `sh(α ± β) = ±e^{±ζ}/(2κ)`, with a round-trip verification.
    pub fn alpha_beta(&self, side: Side) -> Result<(Complex, Complex), ValidationError> {
        let (zeta, kappa, _) = self.boundary(side);
        let name = match side {
            Side::Minus => "minus",
            Side::Plus => "plus",
        };
        if kappa.norm() <= GUARD_TOL {
            return Err(ValidationError::GeneralKappaZero { side: name });
        }
        let two_kappa = cr(2.0) * kappa;
        let s1 = (zeta.exp() / two_kappa).asinh();
        let s2 = (-((-zeta).exp()) / two_kappa).asinh();
        let alpha = (s1 + s2) / cr(2.0);
        let beta = (s1 - s2) / cr(2.0);
        // Round trip: the defining pair must hold to near machine precision.
        let lhs1 = sh(alpha) * ch(beta) * two_kappa;
        let lhs2 = ch(alpha) * sh(beta) * two_kappa;
        let scale = 1.0 + sh(zeta).norm().max(ch(zeta).norm());
        if (lhs1 - sh(zeta)).norm() > ALPHA_BETA_TOL * scale
            || (lhs2 - ch(zeta)).norm() > ALPHA_BETA_TOL * scale
        {
            return Err(ValidationError::AlphaBeta { side: name });
        }
        Ok((alpha, beta))
    }

    /// Boundary dressing factor
    /// `g±(λ) = sh(λ + α± ± η/2) ch(λ + β± ± η/2) / (sh α± ch β±)`,
    /// defined on the general side only.
    pub fn g_factor(&self, side: Side, lambda: Complex) -> Result<Complex, ValidationError> {
        let (alpha, beta) = self.alpha_beta(side)?;
        let s = cr(side.sign());
        let half = self.eta / cr(2.0);
        Ok(sh(lambda + alpha + s * half) * ch(lambda + beta + s * half) / (sh(alpha) * ch(beta)))
    }

    /// Minus-boundary eigenvalue function `𝖠₋(λ) = g₋(λ) a(λ) d(−λ)`.
    pub fn big_a_minus(&self, lambda: Complex) -> Result<Complex, ValidationError> {
        Ok(self.g_factor(Side::Minus, lambda)? * self.a_ref(lambda) * self.d_ref(-lambda))
    }

    /// Plus-boundary eigenvalue function `𝖣₊(λ) = g₊(λ) a(−λ) d(λ)`.
    pub fn big_d_plus(&self, lambda: Complex) -> Result<Complex, ValidationError> {
        Ok(self.g_factor(Side::Plus, lambda)? * self.a_ref(-lambda) * self.d_ref(lambda))
    }

    /// The case's Baxter function entering the discrete spectral equations:
    /// `𝗮₋(λ) = 𝖺₊(λ) 𝖠₋(λ)` for the minus case,
    /// `𝗱₊(λ) = 𝖽₋(λ) 𝖣₊(λ)` for the plus case.
    pub fn baxter(&self, lambda: Complex) -> Result<Complex, ValidationError> {
        match self.case {
            BoundaryCase::Minus => {
                Ok(self.coef_a(Side::Plus, lambda) * self.big_a_minus(lambda)?)
            }
            BoundaryCase::Plus => {
                Ok(self.coef_d(Side::Minus, lambda) * self.big_d_plus(lambda)?)
            }
        }
    }

    /// The `ζ_opposite → iπ/2` reduction of the case's Baxter function, which
    /// builds the reduced boundary quantum determinants of the reconstruction
    /// identities: `𝗮̄₋(λ) = 𝖺̄₊(λ) 𝖠₋(λ)` (minus case),
    /// `𝗱̄₊(λ) = 𝖺̄₋(λ) 𝖣₊(λ)` (plus case).
    pub fn baxter_bar(&self, lambda: Complex) -> Result<Complex, ValidationError> {
        match self.case {
            BoundaryCase::Minus => Ok(self.bar_a(Side::Plus, lambda) * self.big_a_minus(lambda)?),
            BoundaryCase::Plus => Ok(self.bar_a(Side::Minus, lambda) * self.big_d_plus(lambda)?),
        }
    }

    /// Quantum determinant of the boundary monodromy:
    /// `det_q U₋(λ) = sh(2λ − 2η) 𝖠₋(λ + η/2) 𝖠₋(−λ + η/2)`,
    /// `det_q U₊(λ) = sh(2λ + 2η) 𝖣₊(λ − η/2) 𝖣₊(−λ − η/2)`.
    pub fn detq_u(&self, side: Side, lambda: Complex) -> Result<Complex, ValidationError> {
        let half = self.eta / cr(2.0);
        match side {
            Side::Minus => Ok(sh(cr(2.0) * lambda - cr(2.0) * self.eta)
                * self.big_a_minus(lambda + half)?
                * self.big_a_minus(-lambda + half)?),
            Side::Plus => Ok(sh(cr(2.0) * lambda + cr(2.0) * self.eta)
                * self.big_d_plus(lambda - half)?
                * self.big_d_plus(-lambda - half)?),
        }
    }

    /// Reduced boundary quantum determinant entering the reconstruction of
    /// local operators: `det_q Ū₋(λ) = 𝗮̄₋(λ + η/2) 𝗮̄₋(−λ + η/2)` (minus case),
    /// `det_q Ū₊(λ) = 𝗱̄₊(−λ − η/2) 𝗱̄₊(λ − η/2)` (plus case).
    pub fn detq_u_bar(&self, side: Side, lambda: Complex) -> Result<Complex, ValidationError> {
        let half = self.eta / cr(2.0);
        match side {
            Side::Minus => Ok(self.baxter_bar_minus(lambda + half)?
                * self.baxter_bar_minus(-lambda + half)?),
            Side::Plus => Ok(self.baxter_bar_plus(-lambda - half)?
                * self.baxter_bar_plus(lambda - half)?),
        }
    }

    /// `𝗮̄₋(λ) = 𝖺̄₊(λ) 𝖠₋(λ)`, independent of the case (needs `κ₋ ≠ 0`).
    fn baxter_bar_minus(&self, lambda: Complex) -> Result<Complex, ValidationError> {
        Ok(self.bar_a(Side::Plus, lambda) * self.big_a_minus(lambda)?)
    }

    /// `𝗱̄₊(λ) = 𝖺̄₋(λ) 𝖣₊(λ)`, independent of the case (needs `κ₊ ≠ 0`).
    fn baxter_bar_plus(&self, lambda: Complex) -> Result<Complex, ValidationError> {
        Ok(self.bar_a(Side::Minus, lambda) * self.big_d_plus(lambda)?)
    }

    /// Per-site gauge constant:
    /// `k_n⁽⁻⁾ = sh(2ξₙ + η)/sh(2ξₙ − η)`, `k_n⁽⁺⁾ = sh(2ξₙ − η)/sh(2ξₙ + η)`.
    pub fn k_site(&self, side: Side, n: usize) -> Complex {
        let two_xi = cr(2.0) * self.xi[n];
        match side {
            Side::Minus => sh(two_xi + self.eta) / sh(two_xi - self.eta),
            Side::Plus => sh(two_xi - self.eta) / sh(two_xi + self.eta),
        }
    }

    /// Per-site constant of the left/right eigenstate correspondence:
    /// `α_n⁽⁻⁾ = sh(2ξₙ + 2η)/(k_n⁽⁻⁾ sh(2ξₙ − 2η))` and
    /// `α_n⁽⁺⁾ = sh(2ξₙ − 2η)/(k_n⁽⁺⁾ sh(2ξₙ + 2η))`.
    pub fn alpha_site(&self, side: Side, n: usize) -> Complex {
        let two_xi = cr(2.0) * self.xi[n];
        let two_eta = cr(2.0) * self.eta;
        match side {
            Side::Minus => {
                sh(two_xi + two_eta) / (self.k_site(Side::Minus, n) * sh(two_xi - two_eta))
            }
            Side::Plus => {
                sh(two_xi - two_eta) / (self.k_site(Side::Plus, n) * sh(two_xi + two_eta))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Dense operator construction
// ---------------------------------------------------------------------------

/// Labels of the operators served by [`OperatorFamily::op`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorLabel {
    /// Bulk monodromy blocks of `M(λ)`.
    BulkA,
    BulkB,
    BulkC,
    BulkD,
    /// Minus boundary family `U₋(λ)`.
    AMinus,
    BMinus,
    CMinus,
    DMinus,
    /// Plus boundary family (from `U₊^{t₀}(λ)`).
    APlus,
    BPlus,
    CPlus,
    DPlus,
    /// Boundary transfer matrix `T(λ) = tr₀{K₊(λ) U₋(λ)}`.
    Transfer,
    /// Diagonal part `T∖(λ)` of the case's transfer-matrix split:
    /// `a₊ A₋ + d₊ D₋` (minus case) or `a₋ A₊ + d₋ D₊` (plus case), the
    /// diagonal entries of the constrained boundary matrix weighting the
    /// general family.
    TransferDiagPart,
}

/// Cache groups: one dense evaluation renders all four blocks of a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Group {
    Bulk,
    UMinus,
    UPlus,
    Transfer,
}

/// `[A, B, C, D]` blocks of a 2×2 auxiliary-space operator matrix.
type BlockSet = [CMatrix; 4];

/// Lazily memoized dense operator factory for one parameter set.
///
/// Evaluations are cached per `(group, λ)` with bit-exact keying on `λ`, so
/// repeated requests (the SOV layers evaluate the same nodes constantly) cost
/// a map lookup; the cache is behind an `RwLock` and the factory is `Sync`.
pub struct OperatorFamily {
    params: ModelParams,
    dim: usize,
    /// Embedded per-site `E^{11}, E^{12}, E^{21}, E^{22}`.
    site_units: Vec<BlockSet>,
    cache: RwLock<HashMap<(Group, u64, u64), Arc<BlockSet>>>,
}

impl OperatorFamily {
    /// Build a factory for the given parameters.
    pub fn new(params: ModelParams) -> Self {
        let n = params.n_sites;
        let dim = 1usize << n;
        let e = |r: usize, s: usize| {
            let mut m = CMatrix::zeros(2, 2);
            m[(r, s)] = cr(1.0);
            m
        };
        let units = [e(0, 0), e(0, 1), e(1, 0), e(1, 1)];
        let site_units = (1..=n)
            .map(|site| {
                let left = CMatrix::identity(1 << (n - site));
                let right = CMatrix::identity(1 << (site - 1));
                [
                    left.kron(&units[0]).kron(&right),
                    left.kron(&units[1]).kron(&right),
                    left.kron(&units[2]).kron(&right),
                    left.kron(&units[3]).kron(&right),
                ]
            })
            .collect();
        OperatorFamily { params, dim, site_units, cache: RwLock::new(HashMap::new()) }
    }

    /// The parameter set this factory was built from.
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Dimension `2^N` of the quantum space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dense operator for a label at a spectral parameter.
    pub fn op(&self, label: OperatorLabel, lambda: Complex) -> CMatrix {
        use OperatorLabel::*;
        match label {
            BulkA => self.group(Group::Bulk, lambda)[0].clone(),
            BulkB => self.group(Group::Bulk, lambda)[1].clone(),
            BulkC => self.group(Group::Bulk, lambda)[2].clone(),
            BulkD => self.group(Group::Bulk, lambda)[3].clone(),
            AMinus => self.group(Group::UMinus, lambda)[0].clone(),
            BMinus => self.group(Group::UMinus, lambda)[1].clone(),
            CMinus => self.group(Group::UMinus, lambda)[2].clone(),
            DMinus => self.group(Group::UMinus, lambda)[3].clone(),
            APlus => self.group(Group::UPlus, lambda)[0].clone(),
            BPlus => self.group(Group::UPlus, lambda)[1].clone(),
            CPlus => self.group(Group::UPlus, lambda)[2].clone(),
            DPlus => self.group(Group::UPlus, lambda)[3].clone(),
            Transfer => self.group(Group::Transfer, lambda)[0].clone(),
            TransferDiagPart => self.group(Group::Transfer, lambda)[1].clone(),
        }
    }

    /// Blocks `[A∓, B∓, C∓, D∓]` of a boundary family, shared.
    pub fn boundary_blocks(&self, side: Side, lambda: Complex) -> Arc<BlockSet> {
        match side {
            Side::Minus => self.group(Group::UMinus, lambda),
            Side::Plus => self.group(Group::UPlus, lambda),
        }
    }

    /// Bulk monodromy blocks `[A, B, C, D]` at `λ`, shared.
    pub fn bulk_blocks(&self, lambda: Complex) -> Arc<BlockSet> {
        self.group(Group::Bulk, lambda)
    }

    fn group(&self, group: Group, lambda: Complex) -> Arc<BlockSet> {
        let key = (group, lambda.re.to_bits(), lambda.im.to_bits());
        if let Some(hit) = self.cache.read().expect("operator cache poisoned").get(&key) {
            return Arc::clone(hit);
        }
        let built = Arc::new(self.build(group, lambda));
        let mut cache = self.cache.write().expect("operator cache poisoned");
        Arc::clone(cache.entry(key).or_insert(built))
    }

    fn build(&self, group: Group, lambda: Complex) -> BlockSet {
        match group {
            Group::Bulk => self.build_bulk(lambda),
            Group::UMinus => self.build_u_minus(lambda),
            Group::UPlus => self.build_u_plus(lambda),
            Group::Transfer => self.build_transfer(lambda),
        }
    }

    /// Bulk monodromy `M(λ) = R_{0N}(λ − ξ_N − η/2) ⋯ R_{01}(λ − ξ₁ − η/2)`
    /// accumulated by left-multiplying the (sparse) local R-blocks.
    fn build_bulk(&self, lambda: Complex) -> BlockSet {
        let n = self.params.n_sites;
        let eta = self.params.eta;
        let half = eta / cr(2.0);
        let mut acc: BlockSet = [
            CMatrix::identity(self.dim),
            CMatrix::zeros(self.dim, self.dim),
            CMatrix::zeros(self.dim, self.dim),
            CMatrix::identity(self.dim),
        ];
        for site in 1..=n {
            let mu = lambda - self.params.xi[site - 1] - half;
            let u = &self.site_units[site - 1];
            // R_{0n}(μ) as a 2×2 auxiliary matrix of local operators:
            // (11) = sh(μ+η) E¹¹ + sh μ E²², (12) = sh η E²¹,
            // (21) = sh η E¹², (22) = sh μ E¹¹ + sh(μ+η) E²².
            let r11 = u[0].scale(sh(mu + eta)).add(&u[3].scale(sh(mu)));
            let r12 = u[2].scale(sh(eta));
            let r21 = u[1].scale(sh(eta));
            let r22 = u[0].scale(sh(mu)).add(&u[3].scale(sh(mu + eta)));
            let r = [r11, r12, r21, r22];
            acc = block_mul(&r, &acc);
        }
        acc
    }

    /// Blocks of `M̂(λ) = (−1)^N [[D(−λ), −B(−λ)], [−C(−λ), A(−λ)]]`.
    fn hat_blocks(&self, lambda: Complex) -> BlockSet {
        let bulk = self.group(Group::Bulk, -lambda);
        let sign = if self.params.n_sites % 2 == 0 { 1.0 } else { -1.0 };
        [
            bulk[3].scale(cr(sign)),
            bulk[1].scale(cr(-sign)),
            bulk[2].scale(cr(-sign)),
            bulk[0].scale(cr(sign)),
        ]
    }

    /// `U₋(λ) = M(λ) K₋(λ) M̂(λ)`.
    fn build_u_minus(&self, lambda: Complex) -> BlockSet {
        let m = self.group(Group::Bulk, lambda);
        let k = self.params.k_entries(Side::Minus, lambda);
        let hat = self.hat_blocks(lambda);
        let mk = block_scale_right(&m, &k);
        block_mul(&mk, &hat)
    }

    /// `U₊^{t₀}(λ) = M^{t₀}(λ) K₊^{t₀}(λ) M̂^{t₀}(λ)`; with
    /// `P = U₊^{t₀}` the family blocks are `A₊ = P₁₁, C₊ = P₁₂, B₊ = P₂₁,
    /// D₊ = P₂₂`.
    fn build_u_plus(&self, lambda: Complex) -> BlockSet {
        let bulk = self.group(Group::Bulk, lambda);
        // M^{t₀} = [[A, C], [B, D]].
        let mt = [bulk[0].clone(), bulk[2].clone(), bulk[1].clone(), bulk[3].clone()];
        // K₊^{t₀}: swap the off-diagonal scalars.
        let k = self.params.k_entries(Side::Plus, lambda);
        let kt = [k[0], k[2], k[1], k[3]];
        // M̂^{t₀}(λ) = (−1)^N [[D(−λ), −C(−λ)], [−B(−λ), A(−λ)]].
        let minus = self.group(Group::Bulk, -lambda);
        let sign = if self.params.n_sites % 2 == 0 { 1.0 } else { -1.0 };
        let hat_t = [
            minus[3].scale(cr(sign)),
            minus[2].scale(cr(-sign)),
            minus[1].scale(cr(-sign)),
            minus[0].scale(cr(sign)),
        ];
        let p = block_mul(&block_scale_right(&mt, &kt), &hat_t);
        // Reorder P = [[A₊, C₊], [B₊, D₊]] into [A, B, C, D].
        let [p11, p12, p21, p22] = p;
        [p11, p21, p12, p22]
    }

    /// `T(λ) = tr₀{K₊(λ) U₋(λ)} = a₊A₋ + b₊C₋ + c₊B₋ + d₊D₋`, and its
    /// diagonal part for the case's split.
    fn build_transfer(&self, lambda: Complex) -> BlockSet {
        let (gen, con) = match self.params.case {
            BoundaryCase::Minus => (Group::UMinus, Side::Plus),
            BoundaryCase::Plus => (Group::UPlus, Side::Minus),
        };
        let fam = self.group(gen, lambda);
        let k = self.params.k_entries(con, lambda);
        let transfer = fam[0]
            .scale(k[0])
            .add(&fam[2].scale(k[1]))
            .add(&fam[1].scale(k[2]))
            .add(&fam[3].scale(k[3]));
        let diag = fam[0].scale(k[0]).add(&fam[3].scale(k[3]));
        let zero = CMatrix::zeros(self.dim, self.dim);
        [transfer, diag, zero.clone(), zero]
    }

    /// Open-chain Hamiltonian
    /// `H = Σₙ (σˣσˣ + σʸσʸ + ch η σᶻσᶻ)_{n,n+1} + boundary fields`,
    /// with fields
    /// `(sh η / sh ζ∓)[σᶻ ch ζ∓ + 2κ∓(σˣ ch τ∓ + i σʸ sh τ∓)]` at sites 1, N.
    pub fn hamiltonian(&self) -> CMatrix {
        let n = self.params.n_sites;
        let eta = self.params.eta;
        let sx = pauli('x');
        let sy = pauli('y');
        let sz = pauli('z');
        let mut h = CMatrix::zeros(self.dim, self.dim);
        for site in 1..n {
            let xx = self.embed_two(&sx, &sx, site);
            let yy = self.embed_two(&sy, &sy, site);
            let zz = self.embed_two(&sz, &sz, site);
            h = h.add(&xx).add(&yy).add(&zz.scale(ch(eta)));
        }
        for (site, side) in [(1usize, Side::Minus), (n, Side::Plus)] {
            let (zeta, kappa, tau) = self.params.boundary(side);
            let pref = sh(eta) / sh(zeta);
            let field = sz
                .scale(pref * ch(zeta))
                .add(&sx.scale(pref * cr(2.0) * kappa * ch(tau)))
                .add(&sy.scale(pref * cr(2.0) * kappa * c(0.0, 1.0) * sh(tau)));
            h = h.add(&self.embed_one(&field, site));
        }
        h
    }

    /// Embed a one-site operator at `site` (1-based, site 1 = least
    /// significant bit).
    pub fn embed_one(&self, op: &CMatrix, site: usize) -> CMatrix {
        let n = self.params.n_sites;
        CMatrix::identity(1 << (n - site)).kron(op).kron(&CMatrix::identity(1 << (site - 1)))
    }

    /// Embed `op ⊗ op'` on sites `(site, site + 1)`.
    fn embed_two(&self, op_lo: &CMatrix, op_hi: &CMatrix, site: usize) -> CMatrix {
        let n = self.params.n_sites;
        // Site `site+1` is the more significant factor.
        CMatrix::identity(1 << (n - site - 1))
            .kron(&op_hi.kron(op_lo))
            .kron(&CMatrix::identity(1 << (site - 1)))
    }
}

/// 2×2 block-operator product: `(XY)_{ij} = Σ_k X_{ik} Y_{kj}`.
fn block_mul(x: &BlockSet, y: &BlockSet) -> BlockSet {
    [
        x[0].matmul(&y[0]).add(&x[1].matmul(&y[2])),
        x[0].matmul(&y[1]).add(&x[1].matmul(&y[3])),
        x[2].matmul(&y[0]).add(&x[3].matmul(&y[2])),
        x[2].matmul(&y[1]).add(&x[3].matmul(&y[3])),
    ]
}

/// Multiply a block operator by a scalar 2×2 matrix from the right:
/// `(X k)_{ij} = Σ_l X_{il} k_{lj}`.
fn block_scale_right(x: &BlockSet, k: &[Complex; 4]) -> BlockSet {
    [
        x[0].scale(k[0]).add(&x[1].scale(k[2])),
        x[0].scale(k[1]).add(&x[1].scale(k[3])),
        x[2].scale(k[0]).add(&x[3].scale(k[2])),
        x[2].scale(k[1]).add(&x[3].scale(k[3])),
    ]
}

/// Pauli matrix in the `(|↑⟩, |↓⟩)` basis.
pub fn pauli(which: char) -> CMatrix {
    match which {
        'x' => CMatrix::from_rows(&[vec![cr(0.0), cr(1.0)], vec![cr(1.0), cr(0.0)]]),
        'y' => CMatrix::from_rows(&[vec![cr(0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), cr(0.0)]]),
        'z' => CMatrix::from_rows(&[vec![cr(1.0), cr(0.0)], vec![cr(0.0), cr(-1.0)]]),
        '+' => CMatrix::from_rows(&[vec![cr(0.0), cr(1.0)], vec![cr(0.0), cr(0.0)]]),
        '-' => CMatrix::from_rows(&[vec![cr(0.0), cr(0.0)], vec![cr(1.0), cr(0.0)]]),
        _ => panic!("unknown Pauli label {which}"),
    }
}

/// The 4×4 trigonometric R-matrix
/// `R(λ) = [[sh(λ+η),0,0,0],[0,sh λ,sh η,0],[0,sh η,sh λ,0],[0,0,0,sh(λ+η)]]`
/// acting on `C² ⊗ C²` in Kronecker order.
pub fn r_matrix(lambda: Complex, eta: Complex) -> CMatrix {
    let z = cr(0.0);
    CMatrix::from_rows(&[
        vec![sh(lambda + eta), z, z, z],
        vec![z, sh(lambda), sh(eta), z],
        vec![z, sh(eta), sh(lambda), z],
        vec![z, z, z, sh(lambda + eta)],
    ])
}

/// The general boundary matrix
/// `K(λ; ζ, κ, τ) = (1/sh ζ) [[sh(λ+ζ), κe^τ sh 2λ], [κe^{−τ} sh 2λ, sh(ζ−λ)]]`.
pub fn k_matrix(lambda: Complex, zeta: Complex, kappa: Complex, tau: Complex) -> CMatrix {
    let shz = sh(zeta);
    CMatrix::from_rows(&[
        vec![sh(lambda + zeta) / shz, kappa * tau.exp() * sh(cr(2.0) * lambda) / shz],
        vec![kappa * (-tau).exp() * sh(cr(2.0) * lambda) / shz, sh(zeta - lambda) / shz],
    ])
}
