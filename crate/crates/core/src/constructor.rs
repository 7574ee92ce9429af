//! Entangled states from Berezin integrals of weighted coherent-state products.
//!
//! A [`ProductSpec`] fixes which coherent state (`|θᵢ⟩` or `|θ̃ᵢ⟩`) sits on each
//! site and the order of the integration measures. [`build_state`] evaluates
//! `∫dθ₁…dθₖ w |θ…⟩|θ…⟩…`; [`solve_weight`] inverts that linear map.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biortho::Family;
use crate::graded::{graded_tensor, ket_string, BasisLabel, GradedError, GradedState};
use crate::grassmann::{Generator, GrassmannElement, Monomial};

/// Pivot threshold in the weight solver; the linear systems have entries in
/// `{0, ±1}`.
const SOLVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructError {
    #[error("Grassmann content survives integration (measure list incomplete): {0}")]
    ResidualGrassmann(String),
    #[error("the integral vanishes identically")]
    ZeroState,
    #[error("weight uses {0}, which is not integrated over")]
    ForeignGenerator(Generator),
    #[error("invalid measure list: {0}")]
    BadMeasure(String),
    #[error("target has {target} sites but the product has {product}")]
    SiteMismatch { target: usize, product: usize },
    #[error("target not reachable from this product; uncoverable kets: {}", .uncovered.join(", "))]
    Unreachable { uncovered: Vec<String> },
    #[error("unknown catalog name {0:?}")]
    UnknownName(String),
    #[error(transparent)]
    Graded(#[from] GradedError),
}

/// One factor of a coherent-state product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteSpec {
    pub site: u8,
    pub family: Family,
    pub generator: Generator,
}

/// A coherent-state product together with its integration measure order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpec {
    sites: Vec<SiteSpec>,
    measure: Vec<Generator>,
}

impl ProductSpec {
    /// Fails unless `measure` lists each distinct site generator exactly once.
    pub fn new(sites: Vec<SiteSpec>, measure: Vec<Generator>) -> Result<Self, ConstructError> {
        let used: BTreeSet<Generator> = sites.iter().map(|s| s.generator).collect();
        let listed: BTreeSet<Generator> = measure.iter().copied().collect();
        if listed.len() != measure.len() {
            return Err(ConstructError::BadMeasure("repeated generator".into()));
        }
        if used != listed {
            return Err(ConstructError::BadMeasure(format!(
                "measure {:?} does not match product generators {:?}",
                listed.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                used.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            )));
        }
        Ok(ProductSpec { sites, measure })
    }

    /// `|θ₁⟩|θ₂⟩…` with one generator per site, measure `dθ₁dθ₂…`.
    pub fn distinct(families: &[Family]) -> Self {
        let sites: Vec<SiteSpec> = families
            .iter()
            .enumerate()
            .map(|(i, &family)| SiteSpec {
                site: i as u8 + 1,
                family,
                generator: Generator::plain(i as u8 + 1),
            })
            .collect();
        let measure = sites.iter().map(|s| s.generator).collect();
        ProductSpec { sites, measure }
    }

    /// `|θ⟩|θ⟩…` sharing one generator, measure `dθ`.
    pub fn shared(families: &[Family]) -> Self {
        let theta = Generator::plain(1);
        let sites = families
            .iter()
            .enumerate()
            .map(|(i, &family)| SiteSpec { site: i as u8 + 1, family, generator: theta })
            .collect();
        ProductSpec { sites, measure: vec![theta] }
    }

    pub fn sites(&self) -> &[SiteSpec] {
        &self.sites
    }

    pub fn measure(&self) -> &[Generator] {
        &self.measure
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// The graded tensor product of the coherent states.
    pub fn product_state(&self) -> Result<GradedState, ConstructError> {
        let factors = self
            .sites
            .iter()
            .map(|s| GradedState::coherent(s.site, s.generator, s.family))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(graded_tensor(&factors)?)
    }
}

impl fmt::Display for ProductSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sites {
            let tilde = match s.family {
                Family::Psi => "",
                Family::Phi => "\u{0303}",
            };
            let label = if self.measure.len() == 1 && self.sites.len() > 1 {
                format!("θ{tilde}")
            } else {
                format!("θ{tilde}{}", s.generator.index)
            };
            write!(f, "|{label}⟩")?;
        }
        Ok(())
    }
}

/// An ordinary complex combination of product kets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateVector {
    terms: BTreeMap<Vec<BasisLabel>, Complex64>,
}

impl StateVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from `(coefficient, [(family, level)…])` with sites numbered from 1.
    pub fn from_pattern(terms: &[(f64, &[(Family, u8)])]) -> Self {
        let mut out = Self::new();
        for (c, kets) in terms {
            let labels = kets
                .iter()
                .enumerate()
                .map(|(i, &(family, level))| BasisLabel::new(i as u8 + 1, family, level))
                .collect();
            out.add_term(labels, Complex64::new(*c, 0.0));
        }
        out
    }

    pub fn add_term(&mut self, labels: Vec<BasisLabel>, c: Complex64) {
        let entry = self.terms.entry(labels.clone()).or_default();
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&labels);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[BasisLabel], Complex64)> {
        self.terms.iter().map(|(k, c)| (k.as_slice(), *c))
    }

    pub fn coefficient(&self, labels: &[BasisLabel]) -> Complex64 {
        self.terms.get(labels).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn site_count(&self) -> usize {
        self.terms.keys().next().map_or(0, Vec::len)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::new();
        for (k, v) in self.terms() {
            out.add_term(k.to_vec(), v * c);
        }
        out
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        let keys: BTreeSet<&Vec<BasisLabel>> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .map(|k| (self.coefficient(k) - other.coefficient(k)).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Add<&StateVector> for &StateVector {
    type Output = StateVector;
    fn add(self, rhs: &StateVector) -> StateVector {
        let mut out = self.clone();
        for (k, c) in rhs.terms() {
            out.add_term(k.to_vec(), c);
        }
        out
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::grassmann::write_signed_sum(f, self.terms().map(|(k, c)| (c, Some(ket_string(k)))))
    }
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    ket: String,
    labels: Vec<BasisLabel>,
    re: f64,
    im: f64,
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let records: Vec<TermRecord> = self
            .terms()
            .map(|(k, c)| TermRecord { ket: ket_string(k), labels: k.to_vec(), re: c.re, im: c.im })
            .collect();
        records.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let records = Vec::<TermRecord>::deserialize(deserializer)?;
        let mut out = StateVector::new();
        for r in records {
            out.add_term(r.labels, Complex64::new(r.re, r.im));
        }
        Ok(out)
    }
}

/// Integrates a left-normal product state and keeps the scalar remainder.
pub fn integrate_to_state(
    product: &GradedState,
    measure: &[Generator],
) -> Result<StateVector, ConstructError> {
    let integrated = product.integrate(measure);
    let scalars = integrated
        .scalar_terms()
        .ok_or_else(|| ConstructError::ResidualGrassmann(integrated.to_string()))?;
    if scalars.is_empty() {
        return Err(ConstructError::ZeroState);
    }
    let mut out = StateVector::new();
    for (k, c) in scalars {
        out.add_term(k, c);
    }
    Ok(out)
}

/// `∫ d(measure) w · product`, with `w` multiplied from the left.
pub fn build_state(w: &GrassmannElement, spec: &ProductSpec) -> Result<StateVector, ConstructError> {
    if let Some(g) = w.support().into_iter().find(|g| !spec.measure.contains(g)) {
        return Err(ConstructError::ForeignGenerator(g));
    }
    let product = spec.product_state()?;
    integrate_to_state(&product.left_mul(w), &spec.measure)
}

/// Finds `w` with `build_state(w, spec) = target`.
///
/// `w` ranges over all monomials in the measure generators. Columns are
/// eliminated in monomial order (degree, then lexicographic) and free
/// coefficients are set to zero, so the lowest-degree solution is returned.
pub fn solve_weight(target: &StateVector, spec: &ProductSpec) -> Result<GrassmannElement, ConstructError> {
    if target.site_count() != spec.site_count() {
        return Err(ConstructError::SiteMismatch {
            target: target.site_count(),
            product: spec.site_count(),
        });
    }
    let monomials = Monomial::all_over(&spec.measure);
    let mut images = Vec::with_capacity(monomials.len());
    for &m in &monomials {
        let w = GrassmannElement::term(m, Complex64::new(1.0, 0.0));
        match build_state(&w, spec) {
            Ok(state) => images.push(state),
            Err(ConstructError::ZeroState) => images.push(StateVector::new()),
            Err(e) => return Err(e),
        }
    }

    let reachable: BTreeSet<Vec<BasisLabel>> = images
        .iter()
        .flat_map(|s| s.terms().map(|(k, _)| k.to_vec()))
        .collect();
    let uncovered: Vec<String> = target
        .terms()
        .filter(|(k, _)| !reachable.contains(*k))
        .map(|(k, _)| ket_string(k))
        .collect();
    if !uncovered.is_empty() {
        return Err(ConstructError::Unreachable { uncovered });
    }

    let rows: Vec<Vec<BasisLabel>> = reachable.into_iter().collect();
    let n_cols = monomials.len();
    // Augmented matrix [A | b].
    let mut a: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|k| {
            let mut row: Vec<Complex64> = images.iter().map(|img| img.coefficient(k)).collect();
            row.push(target.coefficient(k));
            row
        })
        .collect();

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next_row = 0;
    for col in 0..n_cols {
        if next_row == a.len() {
            break;
        }
        let best = (next_row..a.len())
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("non-empty range");
        if a[best][col].norm() <= SOLVE_TOL {
            continue;
        }
        a.swap(next_row, best);
        let pivot = a[next_row][col];
        for v in a[next_row].iter_mut() {
            *v /= pivot;
        }
        for i in 0..a.len() {
            if i != next_row && a[i][col].norm() > 0.0 {
                let factor = a[i][col];
                let pivot_row = a[next_row].clone();
                for (x, p) in a[i].iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        pivots.push((next_row, col));
        next_row += 1;
    }

    let mut w = GrassmannElement::zero();
    for (row, col) in pivots {
        w.add_term(monomials[col], a[row][n_cols]);
    }
    let rebuilt = match build_state(&w, spec) {
        Ok(s) => s,
        Err(ConstructError::ZeroState) => StateVector::new(),
        Err(e) => return Err(e),
    };
    if rebuilt.max_abs_diff(target) > SOLVE_TOL {
        return Err(ConstructError::Unreachable {
            uncovered: target.terms().map(|(k, _)| ket_string(k)).collect(),
        });
    }
    Ok(w)
}

/// Which printed table a catalog entry comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    Bell,
    Ghz,
    W,
    #[serde(rename = "wprime")]
    WPrime,
}

impl Table {
    pub fn as_str(self) -> &'static str {
        match self {
            Table::Bell => "bell",
            Table::Ghz => "ghz",
            Table::W => "w",
            Table::WPrime => "wprime",
        }
    }
}

/// One row (one sign variant) of the weight-function tables.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub table: Table,
    pub spec: ProductSpec,
    pub weight: GrassmannElement,
    /// The unnormalized state as printed (after any correction noted below).
    pub state: StateVector,
    /// The uncorrected printed state, for rows whose print is inconsistent.
    pub printed_state: Option<StateVector>,
    pub note: Option<&'static str>,
}

const G7_NOTE: &str = "printed right-hand column repeats |ψ0⟩|φ1⟩|φ0⟩ in the second term; \
stored the pattern-consistent |ψ0φ0φ0⟩ ± |ψ1φ1φ1⟩";

/// Family patterns of the eight three-site products, in table order.
const TRIPLES: [[Family; 3]; 8] = {
    use Family::{Phi as F, Psi as P};
    [[P, P, P], [F, P, P], [P, F, P], [P, P, F], [F, F, P], [F, P, F], [P, F, F], [F, F, F]]
};

/// Family patterns of the four two-site products, in table order.
const PAIRS: [[Family; 2]; 4] = {
    use Family::{Phi as F, Psi as P};
    [[P, P], [P, F], [F, P], [F, F]]
};

/// Sign tuples `(θ₁θ₂, θ₁θ₃, θ₂θ₃)` indexing the W-table upper index.
pub const W_SIGNS: [[i8; 3]; 8] = [
    [1, 1, 1],
    [1, 1, -1],
    [1, -1, 1],
    [1, -1, -1],
    [-1, 1, 1],
    [-1, 1, -1],
    [-1, -1, 1],
    [-1, -1, -1],
];

fn sign_char(s: i8) -> char {
    if s > 0 {
        '+'
    } else {
        '-'
    }
}

fn theta(i: u8) -> GrassmannElement {
    GrassmannElement::generator(Generator::plain(i))
}

fn levels<const N: usize>(families: &[Family; N], levels: [u8; N]) -> Vec<(Family, u8)> {
    families.iter().copied().zip(levels).collect()
}

fn pattern<const N: usize>(families: &[Family; N], terms: &[(f64, [u8; N])]) -> StateVector {
    let owned: Vec<(f64, Vec<(Family, u8)>)> =
        terms.iter().map(|(c, l)| (*c, levels(families, *l))).collect();
    let borrowed: Vec<(f64, &[(Family, u8)])> = owned.iter().map(|(c, v)| (*c, v.as_slice())).collect();
    StateVector::from_pattern(&borrowed)
}

fn build_catalog() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    let one = GrassmannElement::one();

    for (k, fams) in PAIRS.iter().enumerate() {
        for sign in [1.0, -1.0] {
            let sc = if sign > 0.0 { '+' } else { '-' };
            out.push(CatalogEntry {
                name: format!("B{}{sc}", k + 1),
                table: Table::Bell,
                spec: ProductSpec::distinct(fams),
                weight: -(&theta(1) + &(&theta(2) * sign)),
                state: pattern(fams, &[(1.0, [0, 1]), (sign, [1, 0])]),
                printed_state: None,
                note: None,
            });
        }
    }
    for (k, fams) in PAIRS.iter().enumerate() {
        for sign in [1.0, -1.0] {
            let sc = if sign > 0.0 { '+' } else { '-' };
            out.push(CatalogEntry {
                name: format!("B'{}{sc}", k + 1),
                table: Table::Bell,
                spec: ProductSpec::distinct(fams),
                weight: -(&(&theta(1) * &theta(2)) + &(&one * sign)),
                state: pattern(fams, &[(1.0, [0, 0]), (sign, [1, 1])]),
                printed_state: None,
                note: None,
            });
        }
    }
    for (k, fams) in PAIRS.iter().enumerate() {
        out.push(CatalogEntry {
            name: format!("B{}-same", k + 1),
            table: Table::Bell,
            spec: ProductSpec::shared(fams),
            weight: one.clone(),
            state: pattern(fams, &[(1.0, [0, 1]), (-1.0, [1, 0])]),
            printed_state: None,
            note: None,
        });
    }

    let t321 = &(&theta(3) * &theta(2)) * &theta(1);
    for (k, fams) in TRIPLES.iter().enumerate() {
        for sign in [1.0, -1.0] {
            let sc = if sign > 0.0 { '+' } else { '-' };
            let state = pattern(fams, &[(1.0, [0, 0, 0]), (sign, [1, 1, 1])]);
            let (printed_state, note) = if k == 6 {
                (Some(pattern(fams, &[(1.0, [0, 0, 0]), (sign, [0, 1, 0])])), Some(G7_NOTE))
            } else {
                (None, None)
            };
            out.push(CatalogEntry {
                name: format!("G{}{sc}", k + 1),
                table: Table::Ghz,
                spec: ProductSpec::distinct(fams),
                weight: &t321 + &(&one * sign),
                state,
                printed_state,
                note,
            });
        }
    }

    for (k, fams) in TRIPLES.iter().enumerate() {
        for signs in W_SIGNS {
            let [s1, s2, s3] = signs.map(f64::from);
            let weight = &(&(&(&theta(1) * &theta(2)) * s1) + &(&(&theta(1) * &theta(3)) * s2))
                + &(&(&theta(2) * &theta(3)) * s3);
            let tag: String = signs.iter().map(|&s| sign_char(s)).collect();
            out.push(CatalogEntry {
                name: format!("W{}{tag}", k + 1),
                table: Table::W,
                spec: ProductSpec::distinct(fams),
                weight,
                state: pattern(fams, &[(s1, [0, 0, 1]), (s2, [0, 1, 0]), (s3, [1, 0, 0])]),
                printed_state: None,
                note: None,
            });
        }
    }

    for (k, fams) in TRIPLES.iter().enumerate() {
        out.push(CatalogEntry {
            name: format!("W'{}", k + 1),
            table: Table::WPrime,
            spec: ProductSpec::shared(fams),
            weight: one.clone(),
            state: pattern(fams, &[(-1.0, [0, 0, 1]), (1.0, [0, 1, 0]), (-1.0, [1, 0, 0])]),
            printed_state: None,
            note: None,
        });
    }
    out
}

/// Every catalog entry: Bell (20), GHZ (16), W (64), W′ (8).
pub fn catalog() -> &'static [CatalogEntry] {
    static CATALOG: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

/// Resolves a catalog name. `W6` and `W7` alone refer to the sign variants
/// used for the entropy curves (`W6-+-`, `W7+++`).
pub fn lookup(name: &str) -> Result<&'static CatalogEntry, ConstructError> {
    let canonical = match name {
        "W7" => "W7+++",
        "W6" => "W6-+-",
        other => other,
    };
    catalog()
        .iter()
        .find(|e| e.name == canonical)
        .ok_or_else(|| ConstructError::UnknownName(name.to_string()))
}

/// One Grassmann term in exported data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightTerm {
    /// Generators in canonical order; empty for the scalar term.
    pub monomial: Vec<String>,
    pub re: f64,
    pub im: f64,
}

pub fn weight_terms(w: &GrassmannElement) -> Vec<WeightTerm> {
    w.terms()
        .map(|(m, c)| WeightTerm {
            monomial: m.generators().map(|g| g.to_string()).collect(),
            re: c.re,
            im: c.im,
        })
        .collect()
}

/// Export form of a [`CatalogEntry`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogRecord {
    pub name: String,
    pub table: Table,
    pub product: String,
    pub families: Vec<Family>,
    pub measure: Vec<String>,
    pub weight: String,
    pub weight_terms: Vec<WeightTerm>,
    pub state: String,
    pub state_terms: StateVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

impl CatalogEntry {
    pub fn record(&self) -> CatalogRecord {
        CatalogRecord {
            name: self.name.clone(),
            table: self.table,
            product: self.spec.to_string(),
            families: self.spec.sites().iter().map(|s| s.family).collect(),
            measure: self.spec.measure().iter().map(|g| g.to_string()).collect(),
            weight: self.weight.to_string(),
            weight_terms: weight_terms(&self.weight),
            state: self.state.to_string(),
            state_terms: self.state.clone(),
            note: self.note,
        }
    }
}

/// The three factorizing constructions on `|θ₁⟩|θ₂⟩|θ₃⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiseparableKind {
    /// `θ₁θ₂ ± θ₁θ₃ ↦ |ψ₀⟩₁ ⊗ |B₁±⟩₂₃`
    BellOnRest,
    /// `θ₃θ₂θ₁ ∓ θ₁ ↦ |ψ₀⟩₁ ⊗ |B′₁±⟩₂₃`
    PrimeBellOnRest,
    /// `θ₁θ₂ ∓ θ₃θ₂ ↦ |ψ₀⟩₂ ⊗ |B₁±⟩₁₃`
    BellAroundSecond,
}

impl BiseparableKind {
    pub const ALL: [BiseparableKind; 3] = [
        BiseparableKind::BellOnRest,
        BiseparableKind::PrimeBellOnRest,
        BiseparableKind::BellAroundSecond,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct Biseparable {
    pub kind: BiseparableKind,
    pub sign: i8,
    pub spec: ProductSpec,
    pub weight: GrassmannElement,
    /// The claimed factorized state, written out in site order.
    pub expected: StateVector,
    /// The site that factors out.
    pub single_site: u8,
    /// The sites carrying the Bell-type pair.
    pub pair: (u8, u8),
}

/// A factorizing construction; `sign` selects the upper (`+1`) or lower (`-1`)
/// variant of the pair state.
pub fn biseparable(kind: BiseparableKind, sign: i8) -> Biseparable {
    let s = f64::from(sign.signum());
    let spec = ProductSpec::distinct(&[Family::Psi; 3]);
    let fams = [Family::Psi; 3];
    let (weight, expected, single_site, pair) = match kind {
        BiseparableKind::BellOnRest => (
            &(&theta(1) * &theta(2)) + &(&(&theta(1) * &theta(3)) * s),
            pattern(&fams, &[(1.0, [0, 0, 1]), (s, [0, 1, 0])]),
            1,
            (2, 3),
        ),
        BiseparableKind::PrimeBellOnRest => (
            &(&(&theta(3) * &theta(2)) * &theta(1)) - &(&theta(1) * s),
            pattern(&fams, &[(1.0, [0, 0, 0]), (s, [0, 1, 1])]),
            1,
            (2, 3),
        ),
        BiseparableKind::BellAroundSecond => (
            &(&theta(1) * &theta(2)) - &(&(&theta(3) * &theta(2)) * s),
            pattern(&fams, &[(1.0, [0, 0, 1]), (s, [1, 0, 0])]),
            2,
            (1, 3),
        ),
    };
    Biseparable { kind, sign: sign.signum(), spec, weight, expected, single_site, pair }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Family::{Phi, Psi};

    #[test]
    fn shared_pair_with_unit_weight() {
        let spec = ProductSpec::shared(&[Psi, Psi]);
        let s = build_state(&GrassmannElement::one(), &spec).unwrap();
        assert_eq!(s.to_string(), "|ψ0ψ1⟩ - |ψ1ψ0⟩");
    }

    #[test]
    fn distinct_pair_symmetric_weight() {
        let spec = ProductSpec::distinct(&[Psi, Psi]);
        let w = -(&theta(1) + &theta(2));
        assert_eq!(build_state(&w, &spec).unwrap().to_string(), "|ψ0ψ1⟩ + |ψ1ψ0⟩");
    }

    #[test]
    fn ghz_weight() {
        let spec = ProductSpec::distinct(&[Psi; 3]);
        let w = &(&(&theta(3) * &theta(2)) * &theta(1)) + &GrassmannElement::one();
        assert_eq!(build_state(&w, &spec).unwrap().to_string(), "|ψ0ψ0ψ0⟩ + |ψ1ψ1ψ1⟩");
    }

    #[test]
    fn solve_examples() {
        let spec = ProductSpec::distinct(&[Psi, Psi]);
        let singlet = StateVector::from_pattern(&[(1.0, &[(Psi, 0), (Psi, 1)]), (-1.0, &[(Psi, 1), (Psi, 0)])]);
        assert_eq!(solve_weight(&singlet, &spec).unwrap(), &theta(2) - &theta(1));
        let phi_plus = StateVector::from_pattern(&[(1.0, &[(Psi, 0), (Psi, 0)]), (1.0, &[(Psi, 1), (Psi, 1)])]);
        let expected = -(&(&theta(1) * &theta(2)) + &GrassmannElement::one());
        assert_eq!(solve_weight(&phi_plus, &spec).unwrap(), expected);

        let spec3 = ProductSpec::distinct(&[Psi; 3]);
        let w_prime = StateVector::from_pattern(&[
            (-1.0, &[(Psi, 0), (Psi, 0), (Psi, 1)]),
            (1.0, &[(Psi, 0), (Psi, 1), (Psi, 0)]),
            (-1.0, &[(Psi, 1), (Psi, 0), (Psi, 0)]),
        ]);
        let expected = &(&-(&theta(1) * &theta(2)) + &(&theta(1) * &theta(3))) - &(&theta(2) * &theta(3));
        assert_eq!(solve_weight(&w_prime, &spec3).unwrap(), expected);
    }

    #[test]
    fn unreachable_target_names_kets() {
        let spec = ProductSpec::shared(&[Psi, Psi]);
        let target = StateVector::from_pattern(&[(1.0, &[(Psi, 1), (Psi, 1)])]);
        match solve_weight(&target, &spec) {
            Err(ConstructError::Unreachable { uncovered }) => assert_eq!(uncovered, vec!["|ψ1ψ1⟩"]),
            other => panic!("expected Unreachable, got {other:?}"),
        }
        // Wrong family on site 2.
        let target = StateVector::from_pattern(&[(1.0, &[(Psi, 0), (Phi, 1)])]);
        assert!(matches!(
            solve_weight(&target, &ProductSpec::distinct(&[Psi, Psi])),
            Err(ConstructError::Unreachable { .. })
        ));
    }

    #[test]
    fn build_errors() {
        let spec = ProductSpec::distinct(&[Psi, Psi]);
        assert_eq!(
            build_state(&theta(3), &spec),
            Err(ConstructError::ForeignGenerator(Generator::plain(3)))
        );
        // Only θ₁ is integrated: w = θ₂ leaves Grassmann content.
        assert!(matches!(
            build_state(&GrassmannElement::zero(), &spec),
            Err(ConstructError::ZeroState)
        ));
        let product = spec.product_state().unwrap();
        assert!(matches!(
            integrate_to_state(&product, &[Generator::plain(1)]),
            Err(ConstructError::ResidualGrassmann(_))
        ));
        assert!(ProductSpec::new(spec.sites().to_vec(), vec![Generator::plain(1)]).is_err());
        assert!(ProductSpec::new(
            spec.sites().to_vec(),
            vec![Generator::plain(1), Generator::plain(1), Generator::plain(2)]
        )
        .is_err());
    }

    #[test]
    fn catalog_examples() {
        let b3 = lookup("B3+").unwrap();
        assert_eq!(b3.spec.to_string(), "|θ\u{0303}1⟩|θ2⟩");
        assert_eq!(b3.weight.to_string(), "-θ1 - θ2");
        assert_eq!(b3.state.to_string(), "|φ0ψ1⟩ + |φ1ψ0⟩");

        let g1 = lookup("G1-").unwrap();
        assert_eq!(g1.weight.to_string(), "-1 - θ1·θ2·θ3");
        assert_eq!(g1.state.to_string(), "|ψ0ψ0ψ0⟩ - |ψ1ψ1ψ1⟩");

        let wp = lookup("W'1").unwrap();
        assert_eq!(wp.spec.to_string(), "|θ⟩|θ⟩|θ⟩");
        assert_eq!(wp.weight, GrassmannElement::one());
        assert_eq!(wp.state.to_string(), "-|ψ0ψ0ψ1⟩ + |ψ0ψ1ψ0⟩ - |ψ1ψ0ψ0⟩");

        assert_eq!(lookup("W7").unwrap().name, "W7+++");
        assert_eq!(lookup("W6").unwrap().state.to_string(), "-|φ0ψ0φ1⟩ + |φ0ψ1φ0⟩ - |φ1ψ0φ0⟩");
        assert_eq!(lookup("nope"), Err(ConstructError::UnknownName("nope".into())));
    }

    #[test]
    fn catalog_counts() {
        let count = |t| catalog().iter().filter(|e| e.table == t).count();
        assert_eq!(count(Table::Bell), 20);
        assert_eq!(count(Table::Ghz), 16);
        assert_eq!(count(Table::W), 64);
        assert_eq!(count(Table::WPrime), 8);
        let names: BTreeSet<&str> = catalog().iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names.len(), catalog().len());
    }

    #[test]
    fn every_catalog_weight_builds_its_state() {
        for e in catalog() {
            let built = build_state(&e.weight, &e.spec).unwrap();
            assert_eq!(built, e.state, "{}", e.name);
            if let Some(printed) = &e.printed_state {
                assert!(built.max_abs_diff(printed) > 0.5, "{}", e.name);
            }
            assert_eq!(solve_weight(&e.state, &e.spec).unwrap(), e.weight, "{}", e.name);
        }
    }

    #[test]
    fn biseparable_examples() {
        let b = biseparable(BiseparableKind::BellOnRest, 1);
        assert_eq!(b.weight.to_string(), "θ1·θ2 + θ1·θ3");
        assert_eq!(build_state(&b.weight, &b.spec).unwrap(), b.expected);
        let b = biseparable(BiseparableKind::PrimeBellOnRest, 1);
        assert_eq!(b.weight.to_string(), "-θ1 - θ1·θ2·θ3");
        assert_eq!(b.expected.to_string(), "|ψ0ψ0ψ0⟩ + |ψ0ψ1ψ1⟩");
        let b = biseparable(BiseparableKind::BellAroundSecond, 1);
        assert_eq!(b.weight.to_string(), "θ1·θ2 + θ2·θ3");
        assert_eq!(b.expected.to_string(), "|ψ0ψ0ψ1⟩ + |ψ1ψ0ψ0⟩");
    }

    #[test]
    fn state_vector_json_round_trip() {
        let s = lookup("B2-").unwrap().state.clone();
        let json = serde_json::to_string(&s).unwrap();
        let back: StateVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
