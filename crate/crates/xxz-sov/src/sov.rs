//! Separation-of-variables bases for the boundary generator families.
//!
//! When one boundary matrix is general and the other diagonal or triangular,
//! the off-diagonal generator family `B_ε(λ)` of the corresponding reflection
//! algebra (ε names the general boundary) is diagonalizable with simple
//! spectrum, and its left/right eigenbases separate the transfer-matrix
//! spectral problem. This module constructs:
//!
//! * [`HVector`] — the binary labels `h ∈ {0,1}^N` of the eigenbasis and
//!   their index isomorphism `ϰ(h) = 1 + Σ_a 2^{a−1} h_a`,
//! * [`SovPoints`] — the separation points `ζ_a^{(h)}` (for `a ∈ 1..2N`,
//!   reflected in sign on the upper half of the range), their
//!   cosh-coordinates `η_a^{(h)} = cosh 2[ξ_a + (h−1/2)η]`, and the two
//!   special points attached to the operator identities at `±η/2` and
//!   `±η/2 + iπ/2`,
//! * [`SovBasis`] — the dense left (covector) and right (vector) eigenbases,
//!   the Sklyanin measure, the spectral decomposition of the identity, and
//!   the two-term interpolation formulas for the actions of the diagonal
//!   generators (`A₋` on left states, `D₋` on right states, `D₊` on left
//!   states, `A₊` on right states).
//!
//! States are stored as dense `2^N` coordinate vectors after construction;
//! every downstream consumer (spectrum solver, scalar products, matrix
//! elements) repeatedly contracts them, so the one-time dense expansion wins
//! over re-evaluating operator-product recipes.

use crate::algebra::{
    ch, coth, sh, BoundaryCase, ModelParams, OperatorFamily, Side, ValidationError, I_PI_HALF,
};
use crate::numkit::{cr, vec_dot, CMatrix, Complex};
use thiserror::Error;

/// Two cosh-coordinates closer than this (relative to their size) make the
/// interpolation denominators unusable; the parameter set is rejected.
pub const ETA_DISTINCT_TOL: f64 = 1e-8;

/// Gauge pairings `⟨0|∏(…)|0̄⟩` smaller than this in modulus make the basis
/// normalization meaningless; the parameter set is rejected.
pub const GAUGE_TOL: f64 = 1e-12;

/// Largest acceptable max-norm defect of the identity resolution
/// `Σ_h μ(h)|ε,h⟩⟨ε,h| = Id` of a freshly built basis. The defect measures
/// the cancellation error of the biorthogonal decomposition and is the
/// operative conditioning bound for everything computed in the basis.
pub const BASIS_RESOLUTION_TOL: f64 = 1e-8;

/// Errors raised while constructing SOV points or bases.
#[derive(Debug, Error)]
pub enum SovError {
    /// Parameter-level guard violated (forwarded from the operator layer).
    #[error(transparent)]
    Validation(#[from] ValidationError),
    /// The requested family does not match the general boundary of the case.
    #[error("the B_{eps:?} family is not diagonalizable for boundary case {case:?}")]
    CaseMismatch { eps: Side, case: BoundaryCase },
    /// Two cosh-coordinates collide.
    #[error("cosh-coordinates collide: {first} and {second} differ by {dist:.3e}")]
    DegenerateEta { first: String, second: String, dist: f64 },
    /// The normalization pairing vanishes.
    #[error("gauge normalization pairing vanishes: |G| = {norm:.3e}")]
    GaugeVanishing { norm: f64 },
    /// The biorthogonal decomposition of the identity fails numerically.
    #[error("basis resolves the identity only to {defect:.3e}")]
    BasisIllConditioned { defect: f64 },
}

/// Binary label `h = (h₁, …, h_N)` of an SOV basis state.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HVector {
    bits: Vec<u8>,
}

impl HVector {
    /// Label with the given bits; panics unless every entry is 0 or 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "h-vector entries must be 0 or 1");
        Self { bits: bits.to_vec() }
    }

    /// The all-zero label.
    pub fn zeros(n_sites: usize) -> Self {
        Self { bits: vec![0; n_sites] }
    }

    /// The all-one label.
    pub fn ones(n_sites: usize) -> Self {
        Self { bits: vec![1; n_sites] }
    }

    /// Number of sites `N`.
    pub fn n_sites(&self) -> usize {
        self.bits.len()
    }

    /// Entry `h_a` for the 1-based site `a`.
    pub fn bit(&self, a: usize) -> u8 {
        self.bits[a - 1]
    }

    /// All entries, site 1 first.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Index isomorphism `ϰ(h) = 1 + Σ_a 2^{a−1} h_a ∈ {1, …, 2^N}`.
    pub fn kappa(&self) -> usize {
        1 + self
            .bits
            .iter()
            .enumerate()
            .map(|(i, &b)| (b as usize) << i)
            .sum::<usize>()
    }

    /// Zero-based storage index `ϰ(h) − 1`.
    pub(crate) fn idx(&self) -> usize {
        self.kappa() - 1
    }

    /// Inverse of [`Self::kappa`].
    pub fn from_kappa(n_sites: usize, kappa: usize) -> Self {
        assert!((1..=1usize << n_sites).contains(&kappa), "kappa out of range");
        let k = kappa - 1;
        Self { bits: (0..n_sites).map(|i| ((k >> i) & 1) as u8).collect() }
    }

    /// Copy with entry `a` (1-based) replaced.
    pub fn with_bit(&self, a: usize, value: u8) -> Self {
        assert!(value <= 1);
        let mut bits = self.bits.clone();
        bits[a - 1] = value;
        Self { bits }
    }

    /// Copy with entry `a` shifted by `delta`, or `None` if it leaves {0, 1}.
    pub fn shifted(&self, a: usize, delta: i32) -> Option<Self> {
        let v = self.bits[a - 1] as i32 + delta;
        if (0..=1).contains(&v) {
            Some(self.with_bit(a, v as u8))
        } else {
            None
        }
    }

    /// All `2^N` labels in ϰ order.
    pub fn all(n_sites: usize) -> Vec<Self> {
        (1..=1usize << n_sites).map(|k| Self::from_kappa(n_sites, k)).collect()
    }
}

/// Separation points and cosh-coordinates of one SOV family.
#[derive(Clone, Debug)]
pub struct SovPoints {
    eps: Side,
    params: ModelParams,
}

impl SovPoints {
    /// Build the point data for the family `ε`, verifying that the `2N`
    /// cosh-coordinates `η_a^{(h)}` together with the special values `±cosh η`
    /// are pairwise distinct (tolerance [`ETA_DISTINCT_TOL`], relative).
    pub fn new(eps: Side, params: &ModelParams) -> Result<Self, SovError> {
        let pts = Self { eps, params: params.clone() };
        let mut labeled: Vec<(String, Complex)> = Vec::new();
        for a in 1..=params.n_sites {
            for h in 0..=1u8 {
                labeled.push((format!("eta[{a}]^({h})"), pts.eta_pt(a, h)));
            }
        }
        labeled.push(("cosh(eta)".into(), ch(params.eta)));
        labeled.push(("-cosh(eta)".into(), -ch(params.eta)));
        for i in 0..labeled.len() {
            for j in (i + 1)..labeled.len() {
                let dist = (labeled[i].1 - labeled[j].1).norm();
                let scale = 1.0 + labeled[i].1.norm().max(labeled[j].1.norm());
                if dist <= ETA_DISTINCT_TOL * scale {
                    return Err(SovError::DegenerateEta {
                        first: labeled[i].0.clone(),
                        second: labeled[j].0.clone(),
                        dist,
                    });
                }
            }
        }
        Ok(pts)
    }

    /// Family label `ε`.
    pub fn eps(&self) -> Side {
        self.eps
    }

    /// Underlying parameter set.
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Number of sites `N`.
    pub fn n_sites(&self) -> usize {
        self.params.n_sites
    }

    /// Reflection sign `φ_a`: `+1` for `a ≤ N`, `−1` for `a ∈ N+1..2N`.
    pub fn phi(&self, a: usize) -> f64 {
        if a <= self.params.n_sites {
            1.0
        } else {
            -1.0
        }
    }

    /// Zero-based site index underlying the 1-based point index `a ∈ 1..=2N`.
    fn site0(&self, a: usize) -> usize {
        (a - 1) % self.params.n_sites
    }

    /// Separation point `ζ_a^{(h)} = φ_a [ξ_a + (h − 1/2)η]`, `a ∈ 1..=2N`.
    pub fn zeta(&self, a: usize, h: u8) -> Complex {
        let xi = self.params.xi[self.site0(a)];
        cr(self.phi(a)) * (xi + cr(h as f64 - 0.5) * self.params.eta)
    }

    /// `ζ_a^{(h_a)}` with the periodic label convention `h_{N+n} = h_n`.
    pub fn zeta_h(&self, a: usize, h: &HVector) -> Complex {
        self.zeta(a, h.bit(self.site0(a) + 1))
    }

    /// Cosh-coordinate `η_a^{(h)} = cosh 2[ξ_a + (h − 1/2)η]` (sign-blind, so
    /// any `a ∈ 1..=2N` is accepted and reduced mod `N`).
    pub fn eta_pt(&self, a: usize, h: u8) -> Complex {
        let xi = self.params.xi[self.site0(a)];
        ch(cr(2.0) * (xi + cr(h as f64 - 0.5) * self.params.eta))
    }

    /// Special points `ζ_{2N+1}^{(1)}, ζ_{2N+2}^{(1)}`: `η/2` and `η/2 + iπ/2`
    /// for the minus family (where `U₋` reduces to a scalar), `−η/2` and
    /// `−η/2 + iπ/2` for the plus family.
    pub fn special_zeta(&self, j: usize) -> Complex {
        let base = -cr(self.eps.sign() as f64) * self.params.eta / cr(2.0);
        match j {
            1 => base,
            2 => base + I_PI_HALF,
            _ => panic!("special point index must be 1 or 2"),
        }
    }

    /// Cosh-coordinates of the special points: `cosh η` and `−cosh η`.
    pub fn special_eta(&self, j: usize) -> Complex {
        match j {
            1 => ch(self.params.eta),
            2 => -ch(self.params.eta),
            _ => panic!("special point index must be 1 or 2"),
        }
    }

    /// Sklyanin measure `μ(h) = ∏_{1≤b<a≤N} (η_a^{(h_a)} − η_b^{(h_b)})`, the
    /// reciprocal of the diagonal pairing `⟨ε,h|ε,h⟩`.
    pub fn measure(&self, h: &HVector) -> Complex {
        let n = self.params.n_sites;
        let mut v = cr(1.0);
        for a in 2..=n {
            for b in 1..a {
                v *= self.eta_pt(a, h.bit(a)) - self.eta_pt(b, h.bit(b));
            }
        }
        v
    }

    /// Vandermonde of the constant-`h` coordinates, `∏_{b<a}(η_a^{(c)} − η_b^{(c)})`.
    pub fn vandermonde(&self, h_const: u8) -> Complex {
        self.measure(&if h_const == 0 {
            HVector::zeros(self.params.n_sites)
        } else {
            HVector::ones(self.params.n_sites)
        })
    }

    /// `a_h(λ) = ∏_n sinh(λ − ξ_n − (h_n − 1/2)η)`, the label-shifted
    /// reference function whose zeros are the points `ζ_n^{(h_n)}`.
    pub fn a_h(&self, h: &HVector, lambda: Complex) -> Complex {
        let mut v = cr(1.0);
        for (n, &xi) in self.params.xi.iter().enumerate() {
            v *= sh(lambda - xi - cr(h.bit(n + 1) as f64 - 0.5) * self.params.eta);
        }
        v
    }

    /// Eigenvalue of `B_ε(λ)` on the state labelled `h`, in the symmetric
    /// sinh-product form
    /// `κ_ε e^{τ_ε} sinh(2λ + εη)/sinh ζ_ε · ∏_n sinh(λ − ζ_n^{(h_n)}) sinh(λ + ζ_n^{(h_n)})`
    /// (equivalently `(−1)^N a_h(λ) a_h(−λ)` in place of the product). The
    /// relative sign of the two orderings is fixed by the dense generator
    /// action on the basis, checked at both parities of `N`.
    pub fn b_eigenvalue(&self, h: &HVector, lambda: Complex) -> Complex {
        let (zeta, kappa, tau) = self.params.boundary(self.eps);
        let s = cr(self.eps.sign() as f64);
        let mut prod = kappa * tau.exp() * sh(cr(2.0) * lambda + s * self.params.eta) / sh(zeta);
        for (n, &xi) in self.params.xi.iter().enumerate() {
            let w = xi + cr(h.bit(n + 1) as f64 - 0.5) * self.params.eta;
            prod *= sh(lambda - w) * sh(lambda + w);
        }
        prod
    }

    /// The same eigenvalue in the cosh-product form
    /// `κ_ε e^{τ_ε} sinh(2λ + εη)/(2^N sinh ζ_ε) ∏_a (cosh 2λ − η_a^{(h_a)})`.
    pub fn b_eigenvalue_cosh(&self, h: &HVector, lambda: Complex) -> Complex {
        let n = self.params.n_sites;
        let (zeta, kappa, tau) = self.params.boundary(self.eps);
        let s = cr(self.eps.sign() as f64);
        let mut prod = cr(1.0 / (1u64 << n) as f64);
        let ch2l = ch(cr(2.0) * lambda);
        for a in 1..=n {
            prod *= ch2l - self.eta_pt(a, h.bit(a));
        }
        kappa * tau.exp() * sh(cr(2.0) * lambda + s * self.params.eta) / sh(zeta) * prod
    }
}

/// Which interpolated generator action to evaluate.
///
/// The left actions produce covectors, the right actions vectors; each family
/// exposes the two generators whose SOV representation the spectrum solver
/// consumes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GeneratorAction {
    /// `⟨ε,h| A₋(λ)` in the minus family.
    LeftAMinus,
    /// `D₋(λ) |ε,h⟩` in the minus family.
    RightDMinus,
    /// `⟨ε,h| D₊(λ)` in the plus family.
    LeftDPlus,
    /// `A₊(λ) |ε,h⟩` in the plus family.
    RightAPlus,
}

impl GeneratorAction {
    /// The family the action belongs to.
    pub fn eps(self) -> Side {
        match self {
            Self::LeftAMinus | Self::RightDMinus => Side::Minus,
            Self::LeftDPlus | Self::RightAPlus => Side::Plus,
        }
    }

    /// Whether the action is on covectors (left) or vectors (right).
    pub fn is_left(self) -> bool {
        matches!(self, Self::LeftAMinus | Self::LeftDPlus)
    }
}

/// Dense left/right `B_ε(λ)`-eigenbasis with its measure and gauge data.
pub struct SovBasis {
    points: SovPoints,
    dim: usize,
    gauge: Complex,
    left: Vec<Vec<Complex>>,
    right: Vec<Vec<Complex>>,
}

/// Covector–matrix product `(vᵀ M)_j = Σ_i v_i M_{ij}`.
fn covec_mul(v: &[Complex], m: &CMatrix) -> Vec<Complex> {
    let (nr, nc) = (m.nrows(), m.ncols());
    debug_assert_eq!(v.len(), nr);
    let mut out = vec![Complex::new(0.0, 0.0); nc];
    for (i, &vi) in v.iter().enumerate() {
        if vi == Complex::new(0.0, 0.0) {
            continue;
        }
        let row = m.row(i);
        for j in 0..nc {
            out[j] += vi * row[j];
        }
    }
    out
}

fn scaled(v: Vec<Complex>, s: Complex) -> Vec<Complex> {
    v.into_iter().map(|x| x * s).collect()
}

/// Build the left and right `B_ε(λ)`-eigenbasis for the general boundary `ε`
/// of the parameter set behind `family`.
///
/// Fails if `ε` is the constrained boundary, if the cosh-coordinates
/// degenerate, if a gauge pairing vanishes, or if a change-of-basis matrix is
/// numerically singular.
pub fn build_basis(eps: Side, family: &OperatorFamily) -> Result<SovBasis, SovError> {
    let params = family.params();
    if params.case.general_side() != eps {
        return Err(SovError::CaseMismatch { eps, case: params.case });
    }
    let points = SovPoints::new(eps, params)?;
    // The node constants 𝖠₋ / 𝖣₊ need the (α, β) boundary reparameterization;
    // validate it once so the action formulas can assume it exists.
    params.alpha_beta(eps)?;
    let n = params.n_sites;
    let dim = 1usize << n;
    let half = params.eta / cr(2.0);

    // Per-site operator factors and their scalar gauges.
    let mut left_ops = Vec::with_capacity(n); // applied to covectors
    let mut right_ops = Vec::with_capacity(n); // applied to vectors
    let mut node_gauge = Vec::with_capacity(n); // 𝖠₋(η/2 − ξ_n) or 𝖣₊(−ξ_n − η/2)
    let mut k_site = Vec::with_capacity(n);
    for m in 0..n {
        let xi = params.xi[m];
        k_site.push(params.k_site(eps, m));
        match eps {
            Side::Minus => {
                let u_left = family.boundary_blocks(Side::Minus, half - xi);
                let u_right = family.boundary_blocks(Side::Minus, xi + half);
                left_ops.push(u_left[0].clone()); // A₋(η/2 − ξ_n)
                right_ops.push(u_right[3].clone()); // D₋(ξ_n + η/2)
                node_gauge.push(params.big_a_minus(half - xi)?);
            }
            Side::Plus => {
                let u_left = family.boundary_blocks(Side::Plus, -xi - half);
                let u_right = family.boundary_blocks(Side::Plus, xi - half);
                left_ops.push(u_left[3].clone()); // D₊(−ξ_n − η/2)
                right_ops.push(u_right[0].clone()); // A₊(ξ_n − η/2)
                node_gauge.push(params.big_d_plus(-xi - half)?);
            }
        }
    }

    let mut left: Vec<Vec<Complex>> = vec![Vec::new(); dim];
    let mut right: Vec<Vec<Complex>> = vec![Vec::new(); dim];
    let mut e_row = vec![Complex::new(0.0, 0.0); dim];
    e_row[0] = cr(1.0); // ⟨0| = all spins up
    let mut e_col = vec![Complex::new(0.0, 0.0); dim];
    e_col[dim - 1] = cr(1.0); // |0̄⟩ = all spins down

    match eps {
        Side::Minus => {
            // ⟨−,h| ∝ ⟨0| ∏_{n: h_n=1} A₋(η/2−ξ_n)/𝖠₋(η/2−ξ_n), factors in
            // ascending site order; the recursion peels the highest site.
            left[0] = e_row;
            for kap in 1..dim {
                let site = usize::BITS as usize - 1 - kap.leading_zeros() as usize;
                let prev = kap & !(1 << site);
                left[kap] =
                    scaled(covec_mul(&left[prev], &left_ops[site]), cr(1.0) / node_gauge[site]);
            }
            // |−,h⟩ ∝ ∏_{n: h_n=0} D₋(ξ_n+η/2)/(k_n 𝖠₋(η/2−ξ_n)) |0̄⟩, the
            // lowest zero site applied last.
            right[dim - 1] = e_col;
            for kap in (0..dim - 1).rev() {
                let site = (!kap).trailing_zeros() as usize;
                let parent = kap | (1 << site);
                right[kap] = scaled(
                    right_ops[site].mat_vec(&right[parent]),
                    cr(1.0) / (k_site[site] * node_gauge[site]),
                );
            }
        }
        Side::Plus => {
            // ⟨+,h| ∝ ⟨0| ∏_{n: h_n=0} D₊(−ξ_n−η/2)/𝖣₊(−ξ_n−η/2).
            left[dim - 1] = e_row;
            for kap in (0..dim - 1).rev() {
                let zeros = !kap & (dim - 1);
                let site = usize::BITS as usize - 1 - zeros.leading_zeros() as usize;
                let parent = kap | (1 << site);
                left[kap] =
                    scaled(covec_mul(&left[parent], &left_ops[site]), cr(1.0) / node_gauge[site]);
            }
            // |+,h⟩ ∝ ∏_{n: h_n=1} A₊(ξ_n−η/2)/(k_n⁺ 𝖣₊(−ξ_n−η/2)) |0̄⟩.
            right[0] = e_col;
            for kap in 1..dim {
                let site = kap.trailing_zeros() as usize;
                let prev = kap & !(1 << site);
                right[kap] = scaled(
                    right_ops[site].mat_vec(&right[prev]),
                    cr(1.0) / (k_site[site] * node_gauge[site]),
                );
            }
        }
    }

    // Gauge: n_ε² = ⟨0|(full product)|0̄⟩ · V(η^{(1)}) (minus) or · V(η^{(0)})
    // (plus); the pairing is the last coordinate of the fully dressed covector.
    let (full_idx, h_const) = match eps {
        Side::Minus => (dim - 1, 1u8),
        Side::Plus => (0, 0u8),
    };
    let g = left[full_idx][dim - 1];
    if g.norm() <= GAUGE_TOL {
        return Err(SovError::GaugeVanishing { norm: g.norm() });
    }
    let gauge = (g * points.vandermonde(h_const)).sqrt();
    let inv = cr(1.0) / gauge;
    for v in left.iter_mut().chain(right.iter_mut()) {
        for x in v.iter_mut() {
            *x *= inv;
        }
    }

    // Health check: the left and right families must biorthogonally resolve
    // the identity. A large defect means the eigenbasis is too ill-conditioned
    // for the determinant-level computations built on top of it.
    let basis = SovBasis { points, dim, gauge, left, right };
    let defect = basis.identity_resolution();
    if !(defect <= BASIS_RESOLUTION_TOL) {
        return Err(SovError::BasisIllConditioned { defect });
    }

    Ok(basis)
}

impl SovBasis {
    /// Family label `ε`.
    pub fn eps(&self) -> Side {
        self.points.eps
    }

    /// Separation-point data.
    pub fn points(&self) -> &SovPoints {
        &self.points
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Gauge constant `n_ε` shared by the left and right states.
    pub fn gauge(&self) -> Complex {
        self.gauge
    }

    /// Left (covector) state `⟨ε,h|` as dense coordinates.
    pub fn left(&self, h: &HVector) -> &[Complex] {
        &self.left[h.idx()]
    }

    /// Right (vector) state `|ε,h⟩` as dense coordinates.
    pub fn right(&self, h: &HVector) -> &[Complex] {
        &self.right[h.idx()]
    }

    /// Bilinear pairing `⟨ε,h|ε,h'⟩` (no conjugation).
    pub fn pairing(&self, ha: &HVector, hb: &HVector) -> Complex {
        vec_dot(&self.left[ha.idx()], &self.right[hb.idx()])
    }

    /// Sklyanin measure `μ(h)`.
    pub fn measure(&self, h: &HVector) -> Complex {
        self.points.measure(h)
    }

    /// Max-norm residual of the spectral decomposition of the identity,
    /// `‖Σ_h μ(h) |ε,h⟩⟨ε,h| − Id‖_max`.
    pub fn identity_resolution(&self) -> f64 {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for h in HVector::all(self.points.n_sites()) {
            let mu = self.measure(&h);
            acc = acc.add(&CMatrix::outer(&self.right[h.idx()], &self.left[h.idx()]).scale(mu));
        }
        acc.sub(&CMatrix::identity(self.dim)).norm_max()
    }

    /// Interpolated action of a diagonal generator on the state labelled `h`,
    /// evaluated at spectral parameter `λ`; returns dense covector (left
    /// actions) or vector (right actions) coordinates.
    ///
    /// The action is a sum over the `2N` separation points (shifting the
    /// label at the underlying site) plus two label-diagonal terms anchored at
    /// the special points. Shifts that would leave `{0,1}` carry a vanishing
    /// node constant and are skipped.
    pub fn interpolated_action(
        &self,
        gen: GeneratorAction,
        h: &HVector,
        lambda: Complex,
    ) -> Vec<Complex> {
        assert_eq!(gen.eps(), self.points.eps, "generator does not belong to this family");
        let p = &self.points.params;
        let n = p.n_sites;
        let eta = p.eta;
        let s = cr(self.points.eps.sign() as f64);
        let states = if gen.is_left() { &self.left } else { &self.right };
        let ch2l = ch(cr(2.0) * lambda);
        let mut out = vec![Complex::new(0.0, 0.0); self.dim];

        // Running terms over the 2N separation points.
        for a in 1..=2 * n {
            let site = (a - 1) % n + 1;
            let phi = self.points.phi(a);
            // Minus-family actions shift by T_a^{−φ_a}, plus-family by T_a^{+φ_a}.
            let delta = (self.points.eps.sign() as f64 * phi) as i32;
            let Some(hs) = h.shifted(site, delta) else {
                continue;
            };
            let zeta = self.points.zeta(a, h.bit(site));
            let pref = sh(cr(2.0) * lambda + s * eta) * sh(lambda + zeta)
                / (sh(cr(2.0) * zeta + s * eta) * sh(cr(2.0) * zeta));
            let mut lag = cr(1.0);
            let eta_a = self.points.eta_pt(site, h.bit(site));
            for b in 1..=n {
                if b == site {
                    continue;
                }
                let eta_b = self.points.eta_pt(b, h.bit(b));
                lag *= (ch2l - eta_b) / (eta_a - eta_b);
            }
            let node = self.node_constant(gen, a, h.bit(site));
            let coeff = pref * lag * node;
            for (o, x) in out.iter_mut().zip(&states[hs.idx()]) {
                *o += coeff * x;
            }
        }

        // Label-diagonal terms anchored at the special points ±η/2 (cosh value
        // cosh η) and ±η/2 + iπ/2 (cosh value −cosh η).
        let mut lag0 = cr(1.0);
        let mut lag1 = cr(1.0);
        let ch_eta = ch(eta);
        for b in 1..=n {
            let eta_b = self.points.eta_pt(b, h.bit(b));
            lag0 *= (ch2l - eta_b) / (ch_eta - eta_b);
            lag1 *= (ch2l - eta_b) / (ch_eta + eta_b);
        }
        let (zeta_eps, _, _) = p.boundary(self.points.eps);
        // The boundary monodromy reduces to (−1)^N det_qM(0)·Id at ∓η/2 (the
        // site-parity sign comes from the reflected bulk factor), hence the
        // parity factor on the first diagonal term. At ∓η/2 + iπ/2 the parity
        // signs cancel against the cosh-basis conversion, leaving the same
        // (−1)^N in front (negated for the D-type generators by σ^z).
        let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term0 = cr(parity) * p.detq_m(cr(0.0)) * ch(lambda + s * eta / cr(2.0)) * lag0;
        let sign1 = match gen {
            GeneratorAction::LeftAMinus | GeneratorAction::RightAPlus => 1.0,
            GeneratorAction::RightDMinus | GeneratorAction::LeftDPlus => -1.0,
        } * parity;
        let term1 = cr(sign1)
            * coth(zeta_eps)
            * p.detq_m(I_PI_HALF)
            * sh(lambda + s * eta / cr(2.0))
            * lag1;
        let coeff = term0 + term1;
        for (o, x) in out.iter_mut().zip(&states[h.idx()]) {
            *o += coeff * x;
        }
        out
    }

    /// Node constant of the running interpolation term: `𝖠₋(ζ_a^{(h)})` or
    /// `𝖣₊(ζ_a^{(h)})` for the direct generators, and the reflected
    /// `(k_a^{(ε)})^{φ_a} 𝖠₋/𝖣₊(ζ_a^{(h)} − 2φ_a ξ_a)` for the conjugate ones.
    fn node_constant(&self, gen: GeneratorAction, a: usize, h_a: u8) -> Complex {
        let p = &self.points.params;
        let zeta = self.points.zeta(a, h_a);
        let phi = self.points.phi(a);
        let site0 = (a - 1) % p.n_sites;
        let reflect = zeta - cr(2.0 * phi) * p.xi[site0];
        let msg = "boundary reparameterization validated at basis construction";
        match gen {
            GeneratorAction::LeftAMinus => p.big_a_minus(zeta).expect(msg),
            GeneratorAction::LeftDPlus => p.big_d_plus(zeta).expect(msg),
            GeneratorAction::RightDMinus => {
                let k = p.k_site(Side::Minus, site0);
                let kp = if phi > 0.0 { k } else { cr(1.0) / k };
                kp * p.big_a_minus(reflect).expect(msg)
            }
            GeneratorAction::RightAPlus => {
                let k = p.k_site(Side::Plus, site0);
                let kp = if phi > 0.0 { k } else { cr(1.0) / k };
                kp * p.big_d_plus(reflect).expect(msg)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::OperatorLabel;
    use crate::numkit::{c, vec_norm_inf, Tolerance};
    use proptest::prelude::*;

    fn tol(t: f64) -> Tolerance {
        Tolerance::uniform(t)
    }

    fn minus_params(n: usize) -> ModelParams {
        let xi = [c(0.31, -0.14), c(-0.52, 0.23), c(0.17, 0.41), c(-0.11, -0.33), c(0.44, 0.08)];
        ModelParams::new(
            n,
            c(0.73, 0.21),
            c(0.41, -0.33),
            c(0.57, 0.12),
            c(-0.25, 0.44),
            c(1.13, 0.29),
            cr(0.0),
            cr(0.0),
            xi[..n].to_vec(),
            BoundaryCase::Minus,
            None,
        )
        .unwrap()
    }

    fn plus_params(n: usize) -> ModelParams {
        let xi = [c(0.31, -0.14), c(-0.52, 0.23), c(0.17, 0.41), c(-0.11, -0.33), c(0.44, 0.08)];
        ModelParams::new(
            n,
            c(0.73, 0.21),
            c(1.13, 0.29),
            cr(0.0),
            cr(0.0),
            c(0.41, -0.33),
            c(0.57, 0.12),
            c(-0.25, 0.44),
            xi[..n].to_vec(),
            BoundaryCase::Plus,
            None,
        )
        .unwrap()
    }

    fn rel_err(got: &[Complex], want: &[Complex]) -> f64 {
        let diff: Vec<Complex> = got.iter().zip(want).map(|(a, b)| a - b).collect();
        vec_norm_inf(&diff) / (1.0 + vec_norm_inf(want))
    }

    #[test]
    fn h_vector_index_is_a_bijection() {
        let n = 3;
        let all = HVector::all(n);
        assert_eq!(all.len(), 8);
        for (i, h) in all.iter().enumerate() {
            assert_eq!(h.kappa(), i + 1);
            assert_eq!(&HVector::from_kappa(n, h.kappa()), h);
        }
        // ϰ weights sites by 2^{a−1}: site 1 is the least significant bit.
        assert_eq!(HVector::from_bits(&[1, 0, 0]).kappa(), 2);
        assert_eq!(HVector::from_bits(&[0, 0, 1]).kappa(), 5);
        assert_eq!(HVector::from_bits(&[1, 1, 0]).shifted(3, 1), Some(HVector::ones(3)));
        assert_eq!(HVector::ones(3).shifted(2, 1), None);
        assert_eq!(HVector::zeros(3).shifted(1, -1), None);
    }

    #[test]
    fn separation_points_match_their_definitions() {
        let params = minus_params(3);
        let pts = SovPoints::new(Side::Minus, &params).unwrap();
        let half = params.eta / cr(2.0);
        for (a, &xi) in params.xi.iter().enumerate() {
            let a1 = a + 1;
            assert!(tol(1e-14).close(pts.zeta(a1, 0), xi - half));
            assert!(tol(1e-14).close(pts.zeta(a1, 1), xi + half));
            // Reflected copies at a + N.
            assert!(tol(1e-14).close(pts.zeta(a1 + 3, 0), -(xi - half)));
            assert!(tol(1e-14).close(pts.zeta(a1 + 3, 1), -(xi + half)));
            assert!(tol(1e-14).close(pts.eta_pt(a1, 1), ch(cr(2.0) * (xi + half))));
            assert!(tol(1e-14).close(pts.eta_pt(a1 + 3, 1), pts.eta_pt(a1, 1)));
        }
        assert!(tol(1e-14).close(pts.special_zeta(1), half));
        assert!(tol(1e-14).close(pts.special_zeta(2), half + I_PI_HALF));
        assert!(tol(1e-14).close(pts.special_eta(1), ch(params.eta)));
        assert!(tol(1e-14).close(pts.special_eta(2), -ch(params.eta)));
        let plus = plus_params(2);
        let pts = SovPoints::new(Side::Plus, &plus).unwrap();
        assert!(tol(1e-14).close(pts.special_zeta(1), -plus.eta / cr(2.0)));
        assert!(tol(1e-14).close(pts.special_zeta(2), -plus.eta / cr(2.0) + I_PI_HALF));
    }

    #[test]
    fn degenerate_coordinates_are_rejected() {
        // ξ₁ + ξ₂ = 0 passes the pairwise-difference guard but collides the
        // cosh-coordinates: η₁^{(1)} = η₂^{(0)}.
        let params = ModelParams::new(
            2,
            c(0.73, 0.21),
            c(0.41, -0.33),
            c(0.57, 0.12),
            c(-0.25, 0.44),
            c(1.13, 0.29),
            cr(0.0),
            cr(0.0),
            vec![c(0.31, -0.14), c(-0.31, 0.14)],
            BoundaryCase::Minus,
            None,
        )
        .unwrap();
        assert!(matches!(
            SovPoints::new(Side::Minus, &params),
            Err(SovError::DegenerateEta { .. })
        ));
        // The homogeneous constructor bypasses the inhomogeneity guards; SOV
        // data must still refuse it (all coordinates collapse onto cosh η).
        let hom = ModelParams::homogeneous(
            2,
            c(0.73, 0.21),
            c(0.41, -0.33),
            c(0.57, 0.12),
            c(-0.25, 0.44),
            c(1.13, 0.29),
            cr(0.0),
            cr(0.0),
            BoundaryCase::Minus,
            None,
        )
        .unwrap();
        assert!(matches!(SovPoints::new(Side::Minus, &hom), Err(SovError::DegenerateEta { .. })));
    }

    #[test]
    fn b_eigenvalue_forms_agree_and_vanish_at_nodes() {
        for (eps, params) in [(Side::Minus, minus_params(3)), (Side::Plus, plus_params(3))] {
            let pts = SovPoints::new(eps, &params).unwrap();
            let h = HVector::from_bits(&[1, 0, 1]);
            for lam in [c(0.44, 0.31), c(-0.27, 0.49), c(0.05, -0.62)] {
                let s = pts.b_eigenvalue(&h, lam);
                let cform = pts.b_eigenvalue_cosh(&h, lam);
                assert!(tol(1e-12).close(s, cform), "forms disagree: {s} vs {cform}");
            }
            for a in 1..=2 * params.n_sites {
                let z = pts.zeta_h(a, &h);
                assert!(pts.b_eigenvalue(&h, z).norm() < 1e-10);
            }
            // h = 0: the product form reduces to the bare reference functions
            // up to the (−1)^N reordering of the symmetric sinh factors.
            let h0 = HVector::zeros(3);
            let lam = c(0.18, -0.23);
            let (zeta, kappa, tau) = params.boundary(eps);
            let s = cr(eps.sign() as f64);
            let parity = cr(if params.n_sites % 2 == 0 { 1.0 } else { -1.0 });
            let want = parity * kappa * tau.exp() * sh(cr(2.0) * lam + s * params.eta)
                / sh(zeta)
                * params.a_ref(lam)
                * params.a_ref(-lam);
            assert!(tol(1e-12).close(pts.b_eigenvalue(&h0, lam), want));
        }
    }

    #[test]
    fn sov_states_are_b_eigenstates() {
        // Both parities of N matter: the eigenvalue's sinh-product ordering
        // is only pinned down by an odd-length chain.
        for n_sites in 1..=3usize {
            for (eps, params) in
                [(Side::Minus, minus_params(n_sites)), (Side::Plus, plus_params(n_sites))]
            {
                let family = OperatorFamily::new(params);
                let basis = build_basis(eps, &family).unwrap();
                let lams = [
                    c(0.44, 0.31),
                    c(-0.27, 0.49),
                    c(0.05, -0.62),
                    c(0.91, 0.13),
                    c(-0.66, -0.35),
                ];
                for lam in lams {
                    let b_op = match eps {
                        Side::Minus => family.op(OperatorLabel::BMinus, lam),
                        Side::Plus => family.op(OperatorLabel::BPlus, lam),
                    };
                    for h in HVector::all(n_sites) {
                        let b = basis.points().b_eigenvalue(&h, lam);
                        let left = basis.left(&h);
                        let want: Vec<Complex> = left.iter().map(|&x| b * x).collect();
                        let got = covec_mul(left, &b_op);
                        assert!(rel_err(&got, &want) < 1e-9, "left eps {eps:?} h {h:?}");
                        let right = basis.right(&h);
                        let wantr: Vec<Complex> = right.iter().map(|&x| b * x).collect();
                        let gotr = b_op.mat_vec(right);
                        assert!(rel_err(&gotr, &wantr) < 1e-9, "right eps {eps:?} h {h:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn sov_pairings_are_orthogonal_with_measure_norms() {
        for (eps, params) in [(Side::Minus, minus_params(3)), (Side::Plus, plus_params(3))] {
            let family = OperatorFamily::new(params);
            let basis = build_basis(eps, &family).unwrap();
            let all = HVector::all(3);
            for ha in &all {
                for hb in &all {
                    let got = basis.pairing(ha, hb);
                    if ha == hb {
                        let want = cr(1.0) / basis.measure(ha);
                        assert!(
                            (got - want).norm() <= 1e-9 * want.norm(),
                            "norm mismatch at {ha:?}: {got} vs {want}"
                        );
                    } else {
                        assert!(got.norm() <= 1e-9 * (1.0 + basis.measure(ha).norm().recip()));
                    }
                }
            }
            // Single-flip norm ratio in its product form.
            let h1 = HVector::from_bits(&[1, 1, 0]);
            let h0 = h1.with_bit(1, 0);
            let pts = basis.points();
            let mut want = cr(1.0);
            for b in 2..=3 {
                let eta_b = pts.eta_pt(b, h1.bit(b));
                want *= (pts.eta_pt(1, 0) - eta_b) / (pts.eta_pt(1, 1) - eta_b);
            }
            let got = basis.pairing(&h1, &h1) / basis.pairing(&h0, &h0);
            assert!(tol(1e-9).close(got, want));
        }
    }

    #[test]
    fn identity_resolution_reconstructs_identity() {
        for (eps, params) in [(Side::Minus, minus_params(3)), (Side::Plus, plus_params(3))] {
            let family = OperatorFamily::new(params);
            let basis = build_basis(eps, &family).unwrap();
            assert!(basis.identity_resolution() < 1e-9, "eps {eps:?}");
        }
        // N = 1: empty Vandermonde, unit measure, two-state identity.
        let family = OperatorFamily::new(minus_params(1));
        let basis = build_basis(Side::Minus, &family).unwrap();
        for h in HVector::all(1) {
            assert_eq!(basis.measure(&h), cr(1.0));
        }
        assert!(basis.identity_resolution() < 1e-12);
        // N = 2: μ(h)·⟨h|h⟩ = 1 for every label.
        let family = OperatorFamily::new(minus_params(2));
        let basis = build_basis(Side::Minus, &family).unwrap();
        for h in HVector::all(2) {
            assert!(tol(1e-10).close(basis.measure(&h) * basis.pairing(&h, &h), cr(1.0)));
        }
    }

    #[test]
    fn build_rejects_mismatched_family() {
        let family = OperatorFamily::new(minus_params(2));
        assert!(matches!(
            build_basis(Side::Plus, &family),
            Err(SovError::CaseMismatch { eps: Side::Plus, case: BoundaryCase::Minus })
        ));
    }

    #[test]
    fn interpolated_actions_match_dense_operators() {
        let cases = [
            (GeneratorAction::LeftAMinus, OperatorLabel::AMinus),
            (GeneratorAction::RightDMinus, OperatorLabel::DMinus),
            (GeneratorAction::LeftDPlus, OperatorLabel::DPlus),
            (GeneratorAction::RightAPlus, OperatorLabel::APlus),
        ];
        for (gen, label) in cases {
            let params = match gen.eps() {
                Side::Minus => minus_params(3),
                Side::Plus => plus_params(3),
            };
            let family = OperatorFamily::new(params);
            let basis = build_basis(gen.eps(), &family).unwrap();
            for lam in [c(0.44, 0.31), c(-0.62, 0.17)] {
                let op = family.op(label, lam);
                for h in HVector::all(3) {
                    let got = basis.interpolated_action(gen, &h, lam);
                    let want = if gen.is_left() {
                        covec_mul(basis.left(&h), &op)
                    } else {
                        op.mat_vec(basis.right(&h))
                    };
                    assert!(
                        rel_err(&got, &want) < 1e-8,
                        "{gen:?} at λ = {lam}, h = {h:?}: err {}",
                        rel_err(&got, &want)
                    );
                }
            }
        }
    }

    #[test]
    fn node_reductions_and_annihilations_hold() {
        let params = minus_params(3);
        let half = params.eta / cr(2.0);
        let family = OperatorFamily::new(params.clone());
        let basis = build_basis(Side::Minus, &family).unwrap();
        let h = HVector::from_bits(&[1, 0, 1]);

        // A₋(η/2) is central: the action reduces to (−1)^N det_q M(0) ⟨−,h|,
        // dense and interpolated alike.
        let scalar = -params.detq_m(cr(0.0));
        let got = basis.interpolated_action(GeneratorAction::LeftAMinus, &h, half);
        let want: Vec<Complex> = basis.left(&h).iter().map(|&x| scalar * x).collect();
        assert!(rel_err(&got, &want) < 1e-10);
        let dense = covec_mul(basis.left(&h), &family.op(OperatorLabel::AMinus, half));
        assert!(rel_err(&dense, &want) < 1e-10);

        // At a separation point a single interpolation term survives:
        // ⟨−,h| A₋(ζ_a^{(h_a)}) = 𝖠₋(ζ_a^{(h_a)}) ⟨−,T_a^{−φ_a} h| (dense check).
        let a = 1; // h₁ = 1: the shift T₁⁻ stays in range
        let z = basis.points().zeta(a, h.bit(a));
        let op = family.op(OperatorLabel::AMinus, z);
        let got = covec_mul(basis.left(&h), &op);
        let shifted = h.shifted(a, -1).unwrap();
        let node = params.big_a_minus(z).unwrap();
        let want: Vec<Complex> = basis.left(&shifted).iter().map(|&x| node * x).collect();
        assert!(rel_err(&got, &want) < 1e-9);

        // D₋(−ξ_a − η/2) annihilates right states with h_a = 1.
        for a in [1usize, 3] {
            let op = family.op(OperatorLabel::DMinus, -params.xi[a - 1] - half);
            let img = op.mat_vec(basis.right(&h));
            assert!(vec_norm_inf(&img) < 1e-9 * vec_norm_inf(basis.right(&h)));
        }

        // D₋(ζ_a^{(1)}) lowers the label with the node gauge k_a 𝖠₋(η/2 − ξ_a).
        let a = 3;
        let op = family.op(OperatorLabel::DMinus, params.xi[a - 1] + half);
        let got = op.mat_vec(basis.right(&h));
        let node = params.k_site(Side::Minus, a - 1)
            * params.big_a_minus(half - params.xi[a - 1]).unwrap();
        let want: Vec<Complex> =
            basis.right(&h.shifted(a, -1).unwrap()).iter().map(|&x| node * x).collect();
        assert!(rel_err(&got, &want) < 1e-9);

        // A₋(ξ_a + η/2) lowers it with the extra factor sinh η / sinh(2ξ_a + η).
        let op = family.op(OperatorLabel::AMinus, params.xi[a - 1] + half);
        let got = op.mat_vec(basis.right(&h));
        let node = params.k_site(Side::Minus, a - 1) * sh(params.eta)
            / sh(cr(2.0) * params.xi[a - 1] + params.eta)
            * params.big_a_minus(half - params.xi[a - 1]).unwrap();
        let want: Vec<Complex> =
            basis.right(&h.shifted(a, -1).unwrap()).iter().map(|&x| node * x).collect();
        assert!(rel_err(&got, &want) < 1e-9);

        // Plus family: A₊(η/2 − ξ_a) annihilates right states with h_a = 0 and
        // D₊(ξ_a − η/2) raises them with gauge −k_a⁺ sinh η 𝖣₊(−ξ_a−η/2)/sinh(2ξ_a−η).
        let params = plus_params(3);
        let family = OperatorFamily::new(params.clone());
        let basis = build_basis(Side::Plus, &family).unwrap();
        let h = HVector::from_bits(&[1, 0, 1]);
        let a = 2; // h₂ = 0
        let op = family.op(OperatorLabel::APlus, half - params.xi[a - 1]);
        let img = op.mat_vec(basis.right(&h));
        assert!(vec_norm_inf(&img) < 1e-9 * vec_norm_inf(basis.right(&h)));
        let op = family.op(OperatorLabel::DPlus, params.xi[a - 1] - half);
        let got = op.mat_vec(basis.right(&h));
        let node = -params.k_site(Side::Plus, a - 1) * sh(params.eta)
            / sh(cr(2.0) * params.xi[a - 1] - params.eta)
            * params.big_d_plus(-params.xi[a - 1] - half).unwrap();
        let want: Vec<Complex> =
            basis.right(&h.shifted(a, 1).unwrap()).iter().map(|&x| node * x).collect();
        assert!(rel_err(&got, &want) < 1e-9);
    }

    /// The running + special-point structure in the cosh variable is
    /// equivalent to a plain sinh-Lagrange interpolation over the 2N + 2
    /// points `{ζ_a^{(h_a)}} ∪ {η/2, η/2 + iπ/2}`; checking the minus-family
    /// D action against it exercises every coefficient independently.
    #[test]
    fn sinh_interpolation_form_agrees() {
        let params = minus_params(3);
        let family = OperatorFamily::new(params.clone());
        let basis = build_basis(Side::Minus, &family).unwrap();
        let n = params.n_sites;
        let pts = basis.points();
        let h = HVector::from_bits(&[0, 1, 1]);
        let lam = c(0.37, -0.45);

        let node = |b: usize| -> Complex {
            match b {
                _ if b <= 2 * n => pts.zeta_h(b, &h),
                _ if b == 2 * n + 1 => pts.special_zeta(1),
                _ => pts.special_zeta(2),
            }
        };
        let mut out = vec![Complex::new(0.0, 0.0); basis.dim()];
        for a in 1..=2 * n {
            let site = (a - 1) % n + 1;
            let phi = pts.phi(a);
            let Some(hs) = h.shifted(site, -phi as i32) else { continue };
            let mut lag = cr(1.0);
            for b in 1..=2 * n + 2 {
                if b != a {
                    lag *= sh(lam - node(b)) / sh(node(a) - node(b));
                }
            }
            let kp = if phi > 0.0 {
                params.k_site(Side::Minus, site - 1)
            } else {
                cr(1.0) / params.k_site(Side::Minus, site - 1)
            };
            let coeff =
                lag * kp * params.big_a_minus(node(a) - cr(2.0 * phi) * params.xi[site - 1]).unwrap();
            for (o, x) in out.iter_mut().zip(basis.right(&hs)) {
                *o += coeff * x;
            }
        }
        let mut lag0 = cr(1.0);
        let mut lag1 = cr(1.0);
        for b in 1..=2 * n + 2 {
            if b != 2 * n + 1 {
                lag0 *= sh(lam - node(b)) / sh(node(2 * n + 1) - node(b));
            }
            if b != 2 * n + 2 {
                lag1 *= sh(lam - node(b)) / sh(node(2 * n + 2) - node(b));
            }
        }
        let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = cr(parity) * params.detq_m(cr(0.0)) * lag0
            - c(0.0, 1.0) * coth(params.zeta_minus) * params.detq_m(I_PI_HALF) * lag1;
        for (o, x) in out.iter_mut().zip(basis.right(&h)) {
            *o += coeff * x;
        }

        let cosh_form = basis.interpolated_action(GeneratorAction::RightDMinus, &h, lam);
        assert!(rel_err(&out, &cosh_form) < 1e-10);
        let dense = family.op(OperatorLabel::DMinus, lam).mat_vec(basis.right(&h));
        assert!(rel_err(&out, &dense) < 1e-9);
    }

    #[test]
    fn eigenvalue_functions_are_pairwise_distinct() {
        let params = minus_params(3);
        let pts = SovPoints::new(Side::Minus, &params).unwrap();
        let lam = c(0.29, 0.37);
        let all = HVector::all(3);
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                let bi = pts.b_eigenvalue(&all[i], lam);
                let bj = pts.b_eigenvalue(&all[j], lam);
                assert!(
                    (bi - bj).norm() > 1e-8 * (1.0 + bi.norm().max(bj.norm())),
                    "coinciding eigenvalues for {:?} and {:?}",
                    all[i],
                    all[j]
                );
            }
        }
    }

    proptest! {
        #[test]
        fn prop_kappa_roundtrip(bits in proptest::collection::vec(0u8..=1, 1..=8)) {
            let h = HVector::from_bits(&bits);
            let k = h.kappa();
            prop_assert!((1..=1usize << bits.len()).contains(&k));
            prop_assert_eq!(HVector::from_kappa(bits.len(), k), h);
        }

        #[test]
        fn prop_b_eigenvalue_forms_agree(
            re in -0.9f64..0.9,
            im in -0.9f64..0.9,
            kappa in 1usize..=8,
        ) {
            let params = minus_params(3);
            let pts = SovPoints::new(Side::Minus, &params).unwrap();
            let h = HVector::from_kappa(3, kappa);
            let lam = c(re, im);
            let s = pts.b_eigenvalue(&h, lam);
            let q = pts.b_eigenvalue_cosh(&h, lam);
            prop_assert!((s - q).norm() <= 1e-10 * (1.0 + s.norm()));
        }
    }
}
