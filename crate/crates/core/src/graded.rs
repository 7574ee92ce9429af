//! Kets with Grassmann-valued coefficients.
//!
//! Every state is kept in left-normal form: all Grassmann factors stand to the
//! left of all kets. Moving a generator leftward past a ket `|ψₖ⟩`, `|φₖ⟩` (or a
//! bra `⟨ψₖ|`, `⟨φₖ|`) multiplies by `(−1)^(k−1)`, so level-0 kets are odd and
//! level-1 kets are even. A monomial of degree `d` picks up that sign `d` times.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biortho::{BiorthoBasis, Family, Mat2};
use crate::grassmann::{Generator, GrassmannElement, Monomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradedError {
    #[error("coherent states are labelled by plain generators, got {0}")]
    NotPlainGenerator(Generator),
    #[error("site {0} appears in more than one tensor factor")]
    SiteOverlap(u8),
    #[error("operation needs a single-site state, got {0} sites")]
    NotSingleSite(usize),
    #[error("overlap ⟨{bra}|{ket}⟩ within one family needs a numeric basis")]
    MissingBasis { bra: BasisLabel, ket: BasisLabel },
    #[error("operator still carries Grassmann content")]
    NotScalar,
}

/// One single-site basis ket `|ψₖ⟩` or `|φₖ⟩` attached to a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub site: u8,
    pub family: Family,
    pub level: u8,
}

impl BasisLabel {
    pub fn new(site: u8, family: Family, level: u8) -> Self {
        assert!(level < 2, "two-level system, got level {level}");
        BasisLabel { site, family, level }
    }

    pub fn psi(site: u8, level: u8) -> Self {
        Self::new(site, Family::Psi, level)
    }

    pub fn phi(site: u8, level: u8) -> Self {
        Self::new(site, Family::Phi, level)
    }

    /// `(−1)^(level−1)`: −1 for level 0, +1 for level 1.
    pub fn parity_sign(self) -> i8 {
        if self.level == 0 {
            -1
        } else {
            1
        }
    }

    /// Sign for moving the monomial `m` leftward past this ket or bra.
    pub fn monomial_sign(self, m: Monomial) -> f64 {
        if self.level == 0 && m.degree() % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family, self.level)
    }
}

/// `g |k⟩ = s · |k⟩ g` with `s` returned here. Independent of the generator's
/// kind and of the family.
pub fn move_scalar_left(_g: Generator, label: BasisLabel) -> i8 {
    label.parity_sign()
}

/// Rewrites `|k₁…kₙ⟩ e` as `e' |k₁…kₙ⟩`.
pub fn move_past(e: &GrassmannElement, labels: &[BasisLabel]) -> GrassmannElement {
    let mut out = GrassmannElement::zero();
    for (m, c) in e.terms() {
        let sign: f64 = labels.iter().map(|l| l.monomial_sign(m)).product();
        out.add_term(m, c * sign);
    }
    out
}

/// Renders a product ket, e.g. `|ψ0φ1⟩`.
pub fn ket_string(labels: &[BasisLabel]) -> String {
    let inner: String = labels.iter().map(|l| l.to_string()).collect();
    format!("|{inner}⟩")
}

/// A multi-site ket `Σ gᵢ |k⟩` with Grassmann coefficients in left-normal form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradedState {
    terms: BTreeMap<Vec<BasisLabel>, GrassmannElement>,
}

impl GradedState {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `g |labels⟩`.
    pub fn basis(labels: Vec<BasisLabel>, g: GrassmannElement) -> Self {
        let mut out = Self::zero();
        out.add_term(labels, &g);
        out
    }

    pub fn add_term(&mut self, labels: Vec<BasisLabel>, g: &GrassmannElement) {
        let entry = self.terms.entry(labels.clone()).or_default();
        *entry += g;
        if entry.is_zero() {
            self.terms.remove(&labels);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[BasisLabel], &GrassmannElement)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn coefficient(&self, labels: &[BasisLabel]) -> GrassmannElement {
        self.terms.get(labels).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sites in tensor order, taken from the first term.
    pub fn sites(&self) -> Vec<u8> {
        self.terms
            .keys()
            .next()
            .map(|k| k.iter().map(|l| l.site).collect())
            .unwrap_or_default()
    }

    /// `|θ⟩ = |ψ₀⟩ − θ|ψ₁⟩` (or `|θ̃⟩ = |φ₀⟩ − θ|φ₁⟩` for the `φ` family).
    pub fn coherent(site: u8, generator: Generator, family: Family) -> Result<Self, GradedError> {
        if !generator.is_plain() {
            return Err(GradedError::NotPlainGenerator(generator));
        }
        let mut out = Self::zero();
        out.add_term(vec![BasisLabel::new(site, family, 0)], &GrassmannElement::one());
        out.add_term(
            vec![BasisLabel::new(site, family, 1)],
            &-GrassmannElement::generator(generator),
        );
        Ok(out)
    }

    /// Graded tensor product `self ⊗ other`: the coefficients of `other` are
    /// moved left past the kets of `self`.
    pub fn tensor(&self, other: &GradedState) -> Result<GradedState, GradedError> {
        let left_sites = self.sites();
        if let Some(site) = other.sites().into_iter().find(|s| left_sites.contains(s)) {
            return Err(GradedError::SiteOverlap(site));
        }
        let mut out = GradedState::zero();
        for (ka, ga) in self.terms() {
            for (kb, gb) in other.terms() {
                let coef = ga * &move_past(gb, ka);
                if coef.is_zero() {
                    continue;
                }
                let labels: Vec<BasisLabel> = ka.iter().chain(kb).copied().collect();
                out.add_term(labels, &coef);
            }
        }
        Ok(out)
    }

    /// `w · self`.
    pub fn left_mul(&self, w: &GrassmannElement) -> GradedState {
        let mut out = GradedState::zero();
        for (k, g) in self.terms() {
            out.add_term(k.to_vec(), &(w * g));
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> GradedState {
        self.left_mul(&GrassmannElement::scalar(c))
    }

    /// Iterated Berezin integral of every coefficient, rightmost measure first.
    pub fn integrate(&self, measures: &[Generator]) -> GradedState {
        let mut out = GradedState::zero();
        for (k, g) in self.terms() {
            out.add_term(k.to_vec(), &g.integrate_many(measures));
        }
        out
    }

    /// Plain complex coefficients when no Grassmann content remains.
    pub fn scalar_terms(&self) -> Option<BTreeMap<Vec<BasisLabel>, Complex64>> {
        self.terms
            .iter()
            .map(|(k, g)| g.is_scalar().then(|| (k.clone(), g.scalar_part())))
            .collect()
    }

    /// Hermitian conjugate of a single-site state, in left-normal form.
    pub fn dagger(&self) -> Result<GradedBra, GradedError> {
        let mut out = GradedBra::default();
        for (k, g) in self.terms() {
            let [label] = k else {
                return Err(GradedError::NotSingleSite(k.len()));
            };
            // g|k⟩ → ⟨k| g†, then move g† left past the bra.
            let coef = move_past(&g.conjugate(), &[*label]);
            out.add_term(*label, &coef);
        }
        Ok(out)
    }
}

impl std::ops::Sub<&GradedState> for &GradedState {
    type Output = GradedState;
    fn sub(self, rhs: &GradedState) -> GradedState {
        let mut out = self.clone();
        for (k, g) in rhs.terms() {
            out.add_term(k.to_vec(), &-g);
        }
        out
    }
}

impl std::ops::Add<&GradedState> for &GradedState {
    type Output = GradedState;
    fn add(self, rhs: &GradedState) -> GradedState {
        let mut out = self.clone();
        for (k, g) in rhs.terms() {
            out.add_term(k.to_vec(), g);
        }
        out
    }
}

/// Graded tensor product of an ordered list of states.
pub fn graded_tensor(states: &[GradedState]) -> Result<GradedState, GradedError> {
    let mut iter = states.iter();
    let Some(first) = iter.next() else {
        return Ok(GradedState::basis(Vec::new(), GrassmannElement::one()));
    };
    iter.try_fold(first.clone(), |acc, s| acc.tensor(s))
}

fn write_coefficient(f: &mut fmt::Formatter<'_>, g: &GrassmannElement, first: bool) -> fmt::Result {
    if g.len() == 1 {
        let (m, c) = g.terms().next().expect("one term");
        let (negative, mag) = crate::grassmann::signed_coefficient(c);
        f.write_str(match (first, negative) {
            (true, true) => "-",
            (true, false) => "",
            (false, true) => " - ",
            (false, false) => " + ",
        })?;
        match (m.is_unity(), mag == "1") {
            (true, true) => Ok(()),
            (true, false) => f.write_str(&mag),
            (false, true) => write!(f, "{m}"),
            (false, false) => write!(f, "{mag}·{m}"),
        }
    } else {
        if !first {
            f.write_str(" + ")?;
        }
        write!(f, "({g})")
    }
}

impl fmt::Display for GradedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (k, g)) in self.terms().enumerate() {
            write_coefficient(f, g, i == 0)?;
            f.write_str(&ket_string(k))?;
        }
        Ok(())
    }
}

/// A single-site bra `Σ gᵢ ⟨kᵢ|`, coefficients on the left.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradedBra {
    terms: BTreeMap<BasisLabel, GrassmannElement>,
}

impl GradedBra {
    pub fn add_term(&mut self, label: BasisLabel, g: &GrassmannElement) {
        let entry = self.terms.entry(label).or_default();
        *entry += g;
        if entry.is_zero() {
            self.terms.remove(&label);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (BasisLabel, &GrassmannElement)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }
}

/// `⟨bra|ket⟩` for two single-site labels.
///
/// Across families the biorthonormality `⟨φᵢ|ψⱼ⟩ = ⟨ψᵢ|φⱼ⟩ = δᵢⱼ` is used
/// exactly. Within a family the overlap is metric-dependent and is evaluated
/// numerically from `basis`.
pub fn overlap(
    bra: BasisLabel,
    ket: BasisLabel,
    basis: Option<&BiorthoBasis>,
) -> Result<Complex64, GradedError> {
    if bra.family != ket.family {
        let delta = if bra.level == ket.level { 1.0 } else { 0.0 };
        return Ok(Complex64::new(delta, 0.0));
    }
    let basis = basis.ok_or(GradedError::MissingBasis { bra, ket })?;
    Ok(basis.ket(bra.family, bra.level).dotc(&basis.ket(ket.family, ket.level)))
}

/// A single-site operator `Σ g |a⟩⟨b|`, coefficients on the left.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradedOperator {
    terms: BTreeMap<(BasisLabel, BasisLabel), GrassmannElement>,
}

impl GradedOperator {
    pub fn add_term(&mut self, ket: BasisLabel, bra: BasisLabel, g: &GrassmannElement) {
        let key = (ket, bra);
        let entry = self.terms.entry(key).or_default();
        *entry += g;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// `|ket⟩⟨bra|` with unit coefficient.
    pub fn projector(ket: BasisLabel, bra: BasisLabel) -> Self {
        let mut out = Self::default();
        out.add_term(ket, bra, &GrassmannElement::one());
        out
    }

    /// The annihilator of the coherent family: `b = |ψ₀⟩⟨φ₁|` for `ψ` and
    /// `b̃ = |φ₀⟩⟨ψ₁|` for `φ`.
    pub fn annihilator(site: u8, family: Family) -> Self {
        Self::projector(
            BasisLabel::new(site, family, 0),
            BasisLabel::new(site, family.other(), 1),
        )
    }

    /// `|ket⟩⟨bra|` for a single-site Grassmann ket and bra.
    pub fn outer(ket: &GradedState, bra: &GradedBra) -> Result<Self, GradedError> {
        let mut out = Self::default();
        for (k, g) in ket.terms() {
            let [label] = k else {
                return Err(GradedError::NotSingleSite(k.len()));
            };
            for (b, h) in bra.terms() {
                out.add_term(*label, b, &(g * &move_past(h, &[*label])));
            }
        }
        Ok(out)
    }

    pub fn terms(&self) -> impl Iterator<Item = (BasisLabel, BasisLabel, &GrassmannElement)> {
        self.terms.iter().map(|((a, b), g)| (*a, *b, g))
    }

    pub fn left_mul(&self, w: &GrassmannElement) -> Self {
        let mut out = Self::default();
        for (a, b, g) in self.terms() {
            out.add_term(a, b, &(w * g));
        }
        out
    }

    pub fn integrate(&self, measures: &[Generator]) -> Self {
        let mut out = Self::default();
        for (a, b, g) in self.terms() {
            out.add_term(a, b, &g.integrate_many(measures));
        }
        out
    }

    /// Numeric 2×2 matrix; fails if Grassmann content remains.
    pub fn to_matrix(&self, basis: &BiorthoBasis) -> Result<Mat2, GradedError> {
        let mut m = Mat2::zeros();
        for (a, b, g) in self.terms() {
            if !g.is_scalar() {
                return Err(GradedError::NotScalar);
            }
            let ket = basis.ket(a.family, a.level);
            let bra = basis.ket(b.family, b.level);
            m += ket * bra.adjoint() * g.scalar_part();
        }
        Ok(m)
    }

    /// Applies the operator to a single-site state. Coefficients of the state
    /// are moved left past `|a⟩⟨b|` before the overlap `⟨b|k⟩` is taken.
    pub fn apply(
        &self,
        state: &GradedState,
        basis: Option<&BiorthoBasis>,
    ) -> Result<GradedState, GradedError> {
        let mut out = GradedState::zero();
        for (k, gs) in state.terms() {
            let [label] = k else {
                return Err(GradedError::NotSingleSite(k.len()));
            };
            for (a, b, go) in self.terms() {
                let amp = overlap(b, *label, basis)?;
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let moved = move_past(gs, &[a, b]);
                out.add_term(vec![a], &(go * &moved).scale(amp));
            }
        }
        Ok(out)
    }
}

/// Residuals `max |M − I|` of the four coherent-state resolutions
/// `∫dθ̄dθ (1+θθ̄) |θ_ket⟩⟨θ_bra|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OvercompletenessReport {
    /// `|θ⟩⟨θ̃|`
    pub psi_phi: f64,
    /// `|θ̃⟩⟨θ|`
    pub phi_psi: f64,
    /// `|θ⟩⟨θ|`, which resolves `η⁻¹` instead of the identity
    pub psi_psi: f64,
    /// `|θ̃⟩⟨θ̃|`, which resolves `η`
    pub phi_phi: f64,
}

impl OvercompletenessReport {
    pub const TOLERANCE: f64 = 1e-12;

    /// Both mixed resolutions reproduce the identity.
    pub fn holds(&self) -> bool {
        self.residual() <= Self::TOLERANCE
    }

    pub fn residual(&self) -> f64 {
        self.psi_phi.max(self.phi_psi)
    }
}

/// Symbolic resolution `∫dθ̄dθ (1+θθ̄) |θ_ket⟩⟨θ_bra|` as a numeric matrix.
pub fn coherent_resolution(
    basis: &BiorthoBasis,
    ket_family: Family,
    bra_family: Family,
) -> Result<Mat2, GradedError> {
    let theta = Generator::plain(1);
    let ket = GradedState::coherent(1, theta, ket_family)?;
    let bra = GradedState::coherent(1, theta, bra_family)?.dagger()?;
    let weight = &GrassmannElement::one()
        + &(&GrassmannElement::generator(theta) * &GrassmannElement::generator(theta.bar()));
    GradedOperator::outer(&ket, &bra)?
        .left_mul(&weight)
        .integrate(&[theta.bar(), theta])
        .to_matrix(basis)
}

pub fn bi_overcompleteness(basis: &BiorthoBasis) -> Result<OvercompletenessReport, GradedError> {
    let residual = |k, b| -> Result<f64, GradedError> {
        let m = coherent_resolution(basis, k, b)?;
        Ok(crate::biortho::max_abs(&(m - Mat2::identity())))
    };
    Ok(OvercompletenessReport {
        psi_phi: residual(Family::Psi, Family::Phi)?,
        phi_psi: residual(Family::Phi, Family::Psi)?,
        psi_psi: residual(Family::Psi, Family::Psi)?,
        phi_phi: residual(Family::Phi, Family::Phi)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(i: u8) -> Generator {
        Generator::plain(i)
    }

    fn e(i: u8) -> GrassmannElement {
        GrassmannElement::generator(g(i))
    }

    fn psi(site: u8, levels: &[u8]) -> Vec<BasisLabel> {
        levels
            .iter()
            .enumerate()
            .map(|(i, &l)| BasisLabel::psi(site + i as u8, l))
            .collect()
    }

    #[test]
    fn coherent_state_shapes() {
        let s = GradedState::coherent(1, g(1), Family::Psi).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.to_string(), "|ψ0⟩ - θ1|ψ1⟩");
        let s = GradedState::coherent(1, g(1), Family::Phi).unwrap();
        assert_eq!(s.to_string(), "|φ0⟩ - θ1|φ1⟩");
        assert_eq!(
            GradedState::coherent(1, Generator::conjugate(1), Family::Psi),
            Err(GradedError::NotPlainGenerator(Generator::conjugate(1)))
        );
    }

    #[test]
    fn scalar_move_signs() {
        assert_eq!(move_scalar_left(g(1), BasisLabel::psi(1, 0)), -1);
        assert_eq!(move_scalar_left(g(1), BasisLabel::psi(1, 1)), 1);
        assert_eq!(move_scalar_left(Generator::conjugate(1), BasisLabel::phi(1, 0)), -1);
    }

    #[test]
    fn same_generator_pair() {
        let a = GradedState::coherent(1, g(1), Family::Psi).unwrap();
        let b = GradedState::coherent(2, g(1), Family::Psi).unwrap();
        let prod = a.tensor(&b).unwrap();
        let mut expected = GradedState::basis(psi(1, &[0, 0]), GrassmannElement::one());
        expected.add_term(psi(1, &[0, 1]), &e(1));
        expected.add_term(psi(1, &[1, 0]), &-e(1));
        assert_eq!(prod, expected);
    }

    #[test]
    fn distinct_generator_pair() {
        let a = GradedState::coherent(1, g(1), Family::Psi).unwrap();
        let b = GradedState::coherent(2, g(2), Family::Psi).unwrap();
        let prod = a.tensor(&b).unwrap();
        assert_eq!(prod.to_string(), "|ψ0ψ0⟩ + θ2|ψ0ψ1⟩ - θ1|ψ1ψ0⟩ + θ1·θ2|ψ1ψ1⟩");
    }

    #[test]
    fn same_generator_triple() {
        let parts: Vec<GradedState> = (1..=3)
            .map(|site| GradedState::coherent(site, g(1), Family::Psi).unwrap())
            .collect();
        let prod = graded_tensor(&parts).unwrap();
        let mut expected = GradedState::basis(psi(1, &[0, 0, 0]), GrassmannElement::one());
        expected.add_term(psi(1, &[0, 0, 1]), &-e(1));
        expected.add_term(psi(1, &[0, 1, 0]), &e(1));
        expected.add_term(psi(1, &[1, 0, 0]), &-e(1));
        assert_eq!(prod, expected);
    }

    #[test]
    fn overlapping_sites_rejected() {
        let a = GradedState::coherent(1, g(1), Family::Psi).unwrap();
        assert_eq!(a.tensor(&a), Err(GradedError::SiteOverlap(1)));
    }

    #[test]
    fn annihilator_eigen_relation() {
        for family in [Family::Psi, Family::Phi] {
            let state = GradedState::coherent(1, g(1), family).unwrap();
            let lhs = GradedOperator::annihilator(1, family).apply(&state, None).unwrap();
            let rhs = state.left_mul(&e(1));
            assert_eq!(lhs, rhs);
            assert_eq!(lhs.to_string(), format!("θ1|{}0⟩", family));
        }
    }

    #[test]
    fn bra_of_coherent_state() {
        let bra = GradedState::coherent(1, g(1), Family::Phi).unwrap().dagger().unwrap();
        let terms: Vec<_> = bra.terms().map(|(l, g)| (l, g.to_string())).collect();
        assert_eq!(
            terms,
            vec![
                (BasisLabel::phi(1, 0), "1".to_string()),
                (BasisLabel::phi(1, 1), "-θ\u{0304}1".to_string())
            ]
        );
    }

    #[test]
    fn hermitian_limit_overcompleteness() {
        let basis = BiorthoBasis::from_alpha(0.0).unwrap();
        let report = bi_overcompleteness(&basis).unwrap();
        assert!(report.holds());
        assert!(report.psi_psi < 1e-12 && report.phi_phi < 1e-12);
    }

    #[test]
    fn overcompleteness_non_hermitian() {
        let basis = BiorthoBasis::from_alpha(0.5).unwrap();
        let report = bi_overcompleteness(&basis).unwrap();
        assert!(report.holds(), "{report:?}");
        assert!(report.psi_psi >= 0.01 && report.phi_phi >= 0.01);
        let m = coherent_resolution(&basis, Family::Psi, Family::Psi).unwrap();
        assert!(crate::biortho::max_abs(&(m - basis.eta_inv)) < 1e-12);
    }
}
