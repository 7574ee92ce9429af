//! Two-level pseudo-Hermitian systems and their biorthonormal eigenbases.
//!
//! The Hamiltonian family is
//!
//! ```text
//! H = [ r e^{iβ}   s        ]
//!     [ t          r e^{-iβ} ]
//! ```
//!
//! with real spectrum whenever `|r sin β| < √(st)`. The eigenvectors of `H`
//! (`ψ₀, ψ₁`) and of `H†` (`φ₀, φ₁`) depend on the parameters only through the
//! angle `α` defined by `sin α = r sin β / √(st)`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Mat2 = Matrix2<Complex64>;
pub type Vec2 = Vector2<Complex64>;

/// Below this `|cos α|` the basis normalization `1/√(2 cos α)` is refused.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BiorthoError {
    #[error("s·t must be positive, got s = {s}, t = {t}")]
    InvalidCoupling { s: f64, t: f64 },
    #[error("degenerate spectrum at α = {alpha} (cos α = {cos_alpha:e})")]
    DegenerateSpectrum { alpha: f64, cos_alpha: f64 },
    #[error("complex spectrum: |r sin β| = {lhs} exceeds √(st) = {rhs}")]
    NonRealRegime { lhs: f64, rhs: f64 },
}

/// Which eigenfamily a ket belongs to: `ψ` (eigenvectors of `H`) or `φ`
/// (eigenvectors of `H†`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Psi,
    Phi,
}

impl Family {
    pub fn symbol(self) -> &'static str {
        match self {
            Family::Psi => "ψ",
            Family::Phi => "φ",
        }
    }

    pub fn other(self) -> Family {
        match self {
            Family::Psi => Family::Phi,
            Family::Phi => Family::Psi,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Parameters `(r, s, t, β)` of one two-level Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub beta: f64,
}

impl SystemParams {
    pub fn new(r: f64, s: f64, t: f64, beta: f64) -> Self {
        SystemParams { r, s, t, beta }
    }

    /// The atom–field coupling case: `r = δ/2`, `s = t`, `β = −π/2`.
    pub fn atom_field(s: f64, delta: f64) -> Self {
        SystemParams { r: delta / 2.0, s, t: s, beta: -FRAC_PI_2 }
    }

    /// `sin α = r sin β / √(st)`, validated against the real-spectrum regime.
    // Negated so NaN is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn sin_alpha(&self) -> Result<f64, BiorthoError> {
        if !(self.s * self.t > 0.0) {
            return Err(BiorthoError::InvalidCoupling { s: self.s, t: self.t });
        }
        let coupling = (self.s * self.t).sqrt();
        let lhs = (self.r * self.beta.sin()).abs();
        if (lhs - coupling).abs() <= DEGENERACY_TOL {
            let alpha = FRAC_PI_2.copysign(self.r * self.beta.sin());
            return Err(BiorthoError::DegenerateSpectrum { alpha, cos_alpha: 0.0 });
        }
        if lhs > coupling {
            return Err(BiorthoError::NonRealRegime { lhs, rhs: coupling });
        }
        Ok(self.r * self.beta.sin() / coupling)
    }

    /// Principal-branch `α ∈ [−π/2, π/2]`.
    pub fn alpha(&self) -> Result<f64, BiorthoError> {
        self.sin_alpha().map(f64::asin)
    }
}

/// The literal Hamiltonian matrix for `p`.
pub fn hamiltonian(p: &SystemParams) -> Mat2 {
    let diag = Complex64::from_polar(p.r, p.beta);
    Mat2::new(diag, Complex64::new(p.s, 0.0), Complex64::new(p.t, 0.0), diag.conj())
}

/// Real eigenvalues `(E₀, E₁)` belonging to `(ψ₀, ψ₁)`.
pub fn energies(p: &SystemParams) -> Result<(f64, f64), BiorthoError> {
    let alpha = p.alpha()?;
    let split = (p.s * p.t).sqrt() * alpha.cos();
    let center = p.r * p.beta.cos();
    Ok((center + split, center - split))
}

/// Biorthonormal eigenbasis `{ψₖ, φₖ}` with the metric `η = Σ|φₖ⟩⟨φₖ|` and its
/// inverse `η⁻¹ = Σ|ψₖ⟩⟨ψₖ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorthoBasis {
    pub alpha: f64,
    pub psi: [Vec2; 2],
    pub phi: [Vec2; 2],
    pub eta: Mat2,
    pub eta_inv: Mat2,
}

/// Worst-case residuals of the structural identities of a [`BiorthoBasis`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisResiduals {
    /// `max |⟨φᵢ|ψⱼ⟩ − δᵢⱼ|`
    pub biorthonormality: f64,
    /// `max |Σ|ψᵢ⟩⟨φᵢ| − I|` and the same for `Σ|φᵢ⟩⟨ψᵢ|`
    pub completeness: f64,
    /// `max |η ψᵢ − φᵢ|` and `max |η⁻¹ φᵢ − ψᵢ|`
    pub metric: f64,
    /// `max |η η⁻¹ − I|`
    pub inverse: f64,
}

impl BasisResiduals {
    pub fn max(&self) -> f64 {
        self.biorthonormality
            .max(self.completeness)
            .max(self.metric)
            .max(self.inverse)
    }
}

impl BiorthoBasis {
    /// Basis built directly from `α` (the `s = t` explicit eigenvector formulas).
    ///
    /// `ψ` carries `1/√(2cos α)` with the principal complex root and `φ` its
    /// conjugate, so `⟨φᵢ|ψⱼ⟩ = δᵢⱼ` also holds for `cos α < 0`.
    pub fn from_alpha(alpha: f64) -> Result<Self, BiorthoError> {
        let cos_alpha = alpha.cos();
        if cos_alpha.abs() < DEGENERACY_TOL {
            return Err(BiorthoError::DegenerateSpectrum { alpha, cos_alpha });
        }
        let n_psi = Complex64::new(2.0 * cos_alpha, 0.0).sqrt().inv();
        let n_phi = n_psi.conj();
        let e = Complex64::from_polar(1.0, alpha / 2.0);
        let ec = e.conj();
        let psi = [Vec2::new(e, ec) * n_psi, Vec2::new(ec, -e) * n_psi];
        let phi = [Vec2::new(ec, e) * n_phi, Vec2::new(e, -ec) * n_phi];
        Ok(Self::assemble(alpha, psi, phi))
    }

    /// Eigenbasis of `hamiltonian(p)`.
    ///
    /// For `s ≠ t` the `α`-basis is carried through the diagonal similarity
    /// `D = diag(1, sgn(s)√(t/s))` that symmetrizes the off-diagonal couplings:
    /// `ψ = Dψ'`, `φ = D⁻¹φ'`. For `s = t`, `D = I`.
    pub fn from_params(p: &SystemParams) -> Result<Self, BiorthoError> {
        let alpha = p.alpha()?;
        let base = Self::from_alpha(alpha)?;
        let d = p.s.signum() * (p.t / p.s).sqrt();
        if d == 1.0 {
            return Ok(base);
        }
        let scale = |v: &Vec2, k: f64| Vec2::new(v[0], v[1] * k);
        let psi = [scale(&base.psi[0], d), scale(&base.psi[1], d)];
        let phi = [scale(&base.phi[0], 1.0 / d), scale(&base.phi[1], 1.0 / d)];
        Ok(Self::assemble(alpha, psi, phi))
    }

    fn assemble(alpha: f64, psi: [Vec2; 2], phi: [Vec2; 2]) -> Self {
        let eta = phi[0] * phi[0].adjoint() + phi[1] * phi[1].adjoint();
        let eta_inv = psi[0] * psi[0].adjoint() + psi[1] * psi[1].adjoint();
        BiorthoBasis { alpha, psi, phi, eta, eta_inv }
    }

    pub fn ket(&self, family: Family, level: u8) -> Vec2 {
        let level = usize::from(level);
        match family {
            Family::Psi => self.psi[level],
            Family::Phi => self.phi[level],
        }
    }

    pub fn residuals(&self) -> BasisResiduals {
        let id = Mat2::identity();
        let mut biorthonormality: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                let overlap = self.phi[i].dotc(&self.psi[j]);
                biorthonormality = biorthonormality.max((overlap - delta).norm());
            }
        }
        let right = self.psi[0] * self.phi[0].adjoint() + self.psi[1] * self.phi[1].adjoint();
        let left = self.phi[0] * self.psi[0].adjoint() + self.phi[1] * self.psi[1].adjoint();
        let completeness = max_abs(&(right - id)).max(max_abs(&(left - id)));
        let metric = (0..2)
            .map(|i| {
                let a = vec_max_abs(&(self.eta * self.psi[i] - self.phi[i]));
                let b = vec_max_abs(&(self.eta_inv * self.phi[i] - self.psi[i]));
                a.max(b)
            })
            .fold(0.0, f64::max);
        let inverse = max_abs(&(self.eta * self.eta_inv - id));
        BasisResiduals { biorthonormality, completeness, metric, inverse }
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest component modulus.
pub fn vec_max_abs(v: &Vec2) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |H† − ηHη⁻¹|` for the eigenbasis of `p`.
pub fn check_pseudo_hermiticity(p: &SystemParams) -> Result<f64, BiorthoError> {
    let basis = BiorthoBasis::from_params(p)?;
    let h = hamiltonian(p);
    Ok(max_abs(&(h.adjoint() - basis.eta * h * basis.eta_inv)))
}

/// Pseudo-fermionic ladder operators truncated to two levels.
///
/// `b = |ψ₀⟩⟨φ₁|`, `b♯ = η⁻¹b†η = |ψ₁⟩⟨φ₀|`, `b̃ = ηbη⁻¹ = |φ₀⟩⟨ψ₁|`,
/// `b̃♯ = ηb♯η⁻¹ = |φ₁⟩⟨ψ₀|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderOps {
    pub b: Mat2,
    pub b_sharp: Mat2,
    pub b_tilde: Mat2,
    pub b_tilde_sharp: Mat2,
}

impl LadderOps {
    pub fn new(basis: &BiorthoBasis) -> Self {
        let outer = |ket: &Vec2, bra: &Vec2| ket * bra.adjoint();
        LadderOps {
            b: outer(&basis.psi[0], &basis.phi[1]),
            b_sharp: outer(&basis.psi[1], &basis.phi[0]),
            b_tilde: outer(&basis.phi[0], &basis.psi[1]),
            b_tilde_sharp: outer(&basis.phi[1], &basis.psi[0]),
        }
    }

    /// Largest residual among nilpotency and the metric-conjugation identities.
    pub fn residual(&self, basis: &BiorthoBasis) -> f64 {
        let (eta, eta_inv) = (basis.eta, basis.eta_inv);
        [
            max_abs(&(self.b * self.b)),
            max_abs(&(self.b_tilde * self.b_tilde)),
            max_abs(&(self.b_sharp - eta_inv * self.b.adjoint() * eta)),
            max_abs(&(self.b_tilde - eta * self.b * eta_inv)),
            max_abs(&(self.b_tilde_sharp - eta * self.b_sharp * eta_inv)),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}
