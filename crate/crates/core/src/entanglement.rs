//! Entanglement measures on embedded states.
//!
//! Kets are embedded in the computational basis with site 1 as the most
//! significant qubit. Normalization is Euclidean.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biortho::{BiorthoBasis, BiorthoError};
use crate::constructor::{build_state, Biseparable, ConstructError, StateVector};

/// Tolerance for the density-matrix invariants.
pub const DENSITY_TOL: f64 = 1e-12;
/// Lowest eigenvalue accepted as positive semidefinite.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;
/// Closed forms refuse denominators smaller than this.
pub const SINGULAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntanglementError {
    #[error(transparent)]
    Basis(#[from] BiorthoError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error("no basis supplied for site {0}")]
    MissingBasis(u8),
    #[error("amplitude vector of length {0} is not a qubit register")]
    NotRegister(usize),
    #[error("concurrence needs two qubits, got {0}")]
    NotTwoQubit(usize),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("closed form denominator {0:e} is singular")]
    SingularDenominator(f64),
    #[error("no closed form for {0:?}")]
    NoClosedForm(String),
    #[error("invalid subsystem {0:?}")]
    BadSubset(Vec<usize>),
    #[error("subset size {n} invalid for {sites} sites")]
    BadSubsetSize { n: usize, sites: usize },
    #[error("not a density matrix: {0}")]
    InvalidDensity(String),
}

type Result<T> = std::result::Result<T, EntanglementError>;

/// Amplitudes over `|b₁…b_N⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedState {
    amplitudes: DVector<Complex64>,
    sites: usize,
}

impl EmbeddedState {
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(EntanglementError::NotRegister(len));
        }
        Ok(EmbeddedState { sites: len.trailing_zeros() as usize, amplitudes })
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amplitudes))
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn site_count(&self) -> usize {
        self.sites
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn max_abs_diff(&self, other: &EmbeddedState) -> f64 {
        (&self.amplitudes - &other.amplitudes).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Multiplies the amplitudes of one site's `|1⟩` component by `phase`.
    pub fn with_local_phase(&self, site: usize, phase: Complex64) -> Self {
        let bit = 1 << (self.sites - site);
        let mut amps = self.amplitudes.clone();
        for (i, a) in amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= phase;
            }
        }
        EmbeddedState { amplitudes: amps, sites: self.sites }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { m: &self.amplitudes * self.amplitudes.adjoint(), sites: self.sites }
    }
}

fn kron(a: &DVector<Complex64>, b: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_iterator(a.len() * b.len(), a.iter().flat_map(|x| b.iter().map(move |y| x * y)))
}

/// Substitutes numeric vectors for every ket label; `bases[k]` serves site `k+1`.
/// The result is not normalized.
pub fn embed(state: &StateVector, bases: &[BiorthoBasis]) -> Result<EmbeddedState> {
    let n = state.site_count();
    if n == 0 {
        return Err(EntanglementError::ZeroNorm);
    }
    let mut amps = DVector::<Complex64>::zeros(1 << n);
    for (labels, c) in state.terms() {
        let mut v = DVector::from_element(1, c);
        for l in labels {
            let basis = bases.get(usize::from(l.site) - 1).ok_or(EntanglementError::MissingBasis(l.site))?;
            let k = basis.ket(l.family, l.level);
            v = kron(&v, &DVector::from_column_slice(k.as_slice()));
        }
        amps += v;
    }
    EmbeddedState::new(amps)
}

/// [`embed`] with one basis per angle.
pub fn embed_alphas(state: &StateVector, alphas: &[f64]) -> Result<EmbeddedState> {
    let bases = alphas.iter().map(|&a| BiorthoBasis::from_alpha(a)).collect::<std::result::Result<Vec<_>, _>>()?;
    embed(state, &bases)
}

pub fn normalize(state: &EmbeddedState) -> Result<EmbeddedState> {
    let norm = state.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(EntanglementError::ZeroNorm);
    }
    Ok(EmbeddedState { amplitudes: state.amplitudes.unscale(norm), sites: state.sites })
}

/// Normalized embedding at the given angles.
pub fn normalized_state(state: &StateVector, alphas: &[f64]) -> Result<EmbeddedState> {
    normalize(&embed_alphas(state, alphas)?)
}

/// `η₁ ⊗ … ⊗ η_N` expectation `⟨ψ|η|ψ⟩` of the unnormalized embedding.
pub fn eta_norm_squared(state: &StateVector, bases: &[BiorthoBasis]) -> Result<f64> {
    let v = embed(state, bases)?;
    let mut eta = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for b in bases.iter().take(v.sites) {
        eta = eta.kronecker(&DMatrix::from_column_slice(2, 2, b.eta.as_slice()));
    }
    Ok((v.amplitudes.adjoint() * eta * &v.amplitudes)[(0, 0)].re)
}

/// `|⟨ψ|σ_y⊗σ_y|ψ*⟩|`, with `ψ*` conjugated componentwise.
pub fn concurrence(state: &EmbeddedState) -> Result<f64> {
    if state.sites != 2 {
        return Err(EntanglementError::NotTwoQubit(state.sites));
    }
    let a = &state.amplitudes;
    // σ_y⊗σ_y maps (a00, a01, a10, a11) to (-a11, a10, a01, -a00).
    let flipped = [-a[3].conj(), a[2].conj(), a[1].conj(), -a[0].conj()];
    let inner: Complex64 = a.iter().zip(flipped).map(|(x, y)| x.conj() * y).sum();
    Ok(inner.norm())
}

/// Concurrence of the normalized Bell-type states `B₁⁻…B₄⁻`.
pub fn concurrence_closed_form(name: &str, alpha1: f64, alpha2: f64) -> Result<f64> {
    let sign = match name.trim_end_matches("-same") {
        "B1-" | "B4-" => -1.0,
        "B2-" | "B3-" => 1.0,
        _ => return Err(EntanglementError::NoClosedForm(name.to_string())),
    };
    let den = 1.0 + sign * alpha1.sin() * alpha2.sin();
    if den.abs() < SINGULAR_TOL {
        return Err(EntanglementError::SingularDenominator(den));
    }
    Ok((alpha1.cos() * alpha2.cos() / den).abs())
}

/// `|4s²−δ²|/(4s²+δ²)`: `B₂⁻` concurrence in the atom–field parametrization.
pub fn concurrence_case_b(s: f64, delta: f64) -> Result<f64> {
    let den = 4.0 * s * s + delta * delta;
    if den < SINGULAR_TOL {
        return Err(EntanglementError::SingularDenominator(den));
    }
    Ok((4.0 * s * s - delta * delta).abs() / den)
}

/// Hermitian, unit-trace, positive semidefinite matrix over `sites` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
    sites: usize,
}

impl DensityMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(EntanglementError::InvalidDensity(format!("shape {}x{}", dim, m.ncols())));
        }
        let herm = (&m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if herm > DENSITY_TOL {
            return Err(EntanglementError::InvalidDensity(format!("hermiticity residual {herm:e}")));
        }
        let trace = m.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(EntanglementError::InvalidDensity(format!("trace {trace}")));
        }
        let min_eig = m.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < EIGENVALUE_FLOOR {
            return Err(EntanglementError::InvalidDensity(format!("eigenvalue {min_eig:e}")));
        }
        Ok(DensityMatrix { sites: dim.trailing_zeros() as usize, m })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn site_count(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.m.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn check_subset(keep: &[usize], sites: usize) -> Result<()> {
    let sorted = keep.windows(2).all(|w| w[0] < w[1]);
    let in_range = keep.iter().all(|&k| (1..=sites).contains(&k));
    if keep.is_empty() || keep.len() >= sites || !sorted || !in_range {
        return Err(EntanglementError::BadSubset(keep.to_vec()));
    }
    Ok(())
}

/// Gathers the bits of `index` at the given sites, first site most significant.
fn sub_index(index: usize, sites: &[usize], total: usize) -> usize {
    sites.iter().fold(0, |acc, &s| (acc << 1) | ((index >> (total - s)) & 1))
}

fn complement(keep: &[usize], total: usize) -> Vec<usize> {
    (1..=total).filter(|s| !keep.contains(s)).collect()
}

/// Traces out every site not in `keep` (1-based, strictly increasing).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    check_subset(keep, rho.sites)?;
    let traced = complement(keep, rho.sites);
    let dim = 1 << keep.len();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            if sub_index(i, &traced, rho.sites) == sub_index(j, &traced, rho.sites) {
                out[(sub_index(i, keep, rho.sites), sub_index(j, keep, rho.sites))] += rho.m[(i, j)];
            }
        }
    }
    Ok(DensityMatrix { m: out, sites: keep.len() })
}

/// `d/(d−1)·(1 − Tr ρ²)`.
pub fn linear_entropy(rho: &DensityMatrix, d: usize) -> f64 {
    let d = d as f64;
    d / (d - 1.0) * (1.0 - rho.purity())
}

/// Linear entropy of the marginal on `keep`, with `d = min(2ⁿ, 2^{N−n})`.
pub fn marginal_entropy(state: &EmbeddedState, keep: &[usize]) -> Result<f64> {
    let rho = partial_trace(&state.density(), keep)?;
    let n = keep.len();
    let d = 1usize << n.min(state.sites - n);
    Ok(linear_entropy(&rho, d))
}

/// Mean of [`marginal_entropy`] over all size-`n` subsets.
pub fn average_entropy(state: &EmbeddedState, n: usize) -> Result<f64> {
    if n == 0 || n >= state.sites {
        return Err(EntanglementError::BadSubsetSize { n, sites: state.sites });
    }
    let subsets: Vec<Vec<usize>> = (1..=state.sites).combinations(n).collect();
    let total = subsets.iter().map(|keep| marginal_entropy(state, keep)).sum::<Result<f64>>()?;
    Ok(total / subsets.len() as f64)
}

/// States with a printed average-entropy formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntropyFormula {
    /// Any `G_i^±`.
    Ghz,
    /// `W7+++`.
    W7,
    /// `W6-+-`.
    W6,
}

impl EntropyFormula {
    pub const ALL: [EntropyFormula; 3] = [EntropyFormula::Ghz, EntropyFormula::W7, EntropyFormula::W6];

    /// The formula that applies to a catalog name, if any.
    pub fn for_name(name: &str) -> Option<Self> {
        match name {
            n if n.starts_with('G') => Some(EntropyFormula::Ghz),
            "W7" | "W7+++" => Some(EntropyFormula::W7),
            "W6" | "W6-+-" => Some(EntropyFormula::W6),
            _ => None,
        }
    }

    /// The catalog entry the formula is evaluated against.
    pub fn catalog_name(self) -> &'static str {
        match self {
            EntropyFormula::Ghz => "G1+",
            EntropyFormula::W7 => "W7+++",
            EntropyFormula::W6 => "W6-+-",
        }
    }
}

/// Three-angle average entropy (`n = 1`).
pub fn average_entropy_closed_form(formula: EntropyFormula, a1: f64, a2: f64, a3: f64) -> f64 {
    let c2 = |a: f64| (2.0 * a).cos();
    match formula {
        EntropyFormula::Ghz => {
            (5.0 + c2(a2) - 2.0 * a1.sin().powi(2) * (1.0 + a3.cos().powi(2) * a2.sin().powi(2))
                + (c2(a1) * c2(a2) - 3.0) * a3.sin().powi(2))
                / 6.0
        }
        EntropyFormula::W7 | EntropyFormula::W6 => {
            let num = 2.0 * (c2(a1) + c2(a2) + 2.0) * c2(a3)
                + (2.0 * (a1 - a2)).cos()
                + (2.0 * (a1 + a2)).cos()
                + 4.0 * c2(a1)
                + 4.0 * c2(a2)
                + 6.0;
            let cross = if formula == EntropyFormula::W7 { -2.0 } else { 2.0 };
            let den = 2.0 * a2.sin() * a3.sin() + cross * a1.sin() * (a2.sin() + a3.sin()) + 3.0;
            num / (3.0 * den * den)
        }
    }
}

/// Equal-angle reductions of [`average_entropy_closed_form`].
pub fn average_entropy_equal(formula: EntropyFormula, alpha: f64) -> f64 {
    let c4 = alpha.cos().powi(4);
    let c2 = (2.0 * alpha).cos();
    match formula {
        EntropyFormula::Ghz => 0.5 * c4 * (3.0 - c2),
        EntropyFormula::W7 => 8.0 * c4 / (c2 + 2.0).powi(2),
        EntropyFormula::W6 => 8.0 * c4 / (9.0 * (c2 - 2.0).powi(2)),
    }
}

/// Amplitudes arranged as a matrix with rows indexed by `left` and columns by
/// the remaining sites.
pub fn cut_matrix(state: &EmbeddedState, left: &[usize]) -> Result<DMatrix<Complex64>> {
    check_subset(left, state.sites)?;
    let right = complement(left, state.sites);
    let mut m = DMatrix::zeros(1 << left.len(), 1 << right.len());
    for (i, a) in state.amplitudes.iter().enumerate() {
        m[(sub_index(i, left, state.sites), sub_index(i, &right, state.sites))] = *a;
    }
    Ok(m)
}

/// Schmidt coefficients across the cut `left | rest`, largest first.
pub fn schmidt_coefficients(state: &EmbeddedState, left: &[usize]) -> Result<Vec<f64>> {
    let svd = cut_matrix(state, left)?.svd(false, false);
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Outcome of checking a factorizing construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiseparableCheck {
    /// The integral reproduces the stated product exactly.
    pub exact: bool,
    /// Second over first Schmidt coefficient across `single | pair`.
    pub singular_ratio: f64,
    /// Concurrence of the pair factor.
    pub pair_concurrence: f64,
}

/// Builds `b`, embeds it at `alphas` and measures the claimed factorization.
pub fn check_biseparable(b: &Biseparable, alphas: &[f64; 3]) -> Result<BiseparableCheck> {
    let built = build_state(&b.weight, &b.spec)?;
    let state = normalize(&embed_alphas(&built, alphas)?)?;
    let svd = cut_matrix(&state, &[usize::from(b.single_site)])?.svd(false, true);
    let (first, second) = {
        let sv = &svd.singular_values;
        (sv[0].max(sv[1]), sv[0].min(sv[1]))
    };
    let top = if svd.singular_values[0] >= svd.singular_values[1] { 0 } else { 1 };
    let v_t = svd.v_t.expect("requested V^T");
    let pair = EmbeddedState::new(v_t.row(top).transpose())?;
    Ok(BiseparableCheck {
        exact: built == b.expected,
        singular_ratio: second / first,
        pair_concurrence: concurrence(&pair)?,
    })
}
