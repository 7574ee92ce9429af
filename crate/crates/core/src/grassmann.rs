//! Complex Grassmann algebra over a finite set of anticommuting generators.
//!
//! Generators come in two kinds, plain `θᵢ` and conjugate `θ̄ᵢ`. They are totally
//! ordered with every plain generator before every conjugate one
//! (`θ₁ < θ₂ < … < θ̄₁ < θ̄₂ < …`). A [`Monomial`] is a set of generators kept in
//! that order, stored as a bitmask. Any other ordering of the same generators is
//! the canonical monomial times the parity of the sorting permutation, and that
//! sign is absorbed into the coefficient.
//!
//! Berezin integration is the left derivative: `∫dθ f` anticommutes `θ` to the
//! front of each monomial and deletes it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Number of plain modes (and of conjugate modes) a monomial can hold.
pub const MAX_MODES: u8 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Plain,
    Conjugate,
}

/// A single anticommuting generator, `θᵢ` or `θ̄ᵢ`.
///
/// The derived ordering (kind first, then index) is the algebra's total order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub index: u8,
}

impl Generator {
    /// `θᵢ`. Panics unless `1 <= index <= MAX_MODES`.
    pub fn plain(index: u8) -> Self {
        assert!((1..=MAX_MODES).contains(&index), "generator index {index} out of range");
        Generator { kind: GeneratorKind::Plain, index }
    }

    /// `θ̄ᵢ`. Panics unless `1 <= index <= MAX_MODES`.
    pub fn conjugate(index: u8) -> Self {
        assert!((1..=MAX_MODES).contains(&index), "generator index {index} out of range");
        Generator { kind: GeneratorKind::Conjugate, index }
    }

    /// The Hermitian conjugate generator: `θᵢ ↔ θ̄ᵢ`.
    pub fn bar(self) -> Self {
        let kind = match self.kind {
            GeneratorKind::Plain => GeneratorKind::Conjugate,
            GeneratorKind::Conjugate => GeneratorKind::Plain,
        };
        Generator { kind, index: self.index }
    }

    pub fn is_plain(self) -> bool {
        self.kind == GeneratorKind::Plain
    }

    fn bit(self) -> u32 {
        let offset = match self.kind {
            GeneratorKind::Plain => 0,
            GeneratorKind::Conjugate => MAX_MODES as u32,
        };
        1 << (offset + self.index as u32 - 1)
    }

    fn from_bit_position(pos: u32) -> Self {
        if pos < MAX_MODES as u32 {
            Generator::plain(pos as u8 + 1)
        } else {
            Generator::conjugate((pos - MAX_MODES as u32) as u8 + 1)
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeneratorKind::Plain => write!(f, "θ{}", self.index),
            GeneratorKind::Conjugate => write!(f, "θ\u{0304}{}", self.index),
        }
    }
}

/// A canonical product of distinct generators. The empty monomial is unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(u32);

impl Monomial {
    pub const UNITY: Monomial = Monomial(0);

    pub fn from_generator(g: Generator) -> Self {
        Monomial(g.bit())
    }

    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_unity(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, g: Generator) -> bool {
        self.0 & g.bit() != 0
    }

    /// Generators in canonical order.
    pub fn generators(self) -> impl Iterator<Item = Generator> {
        let mut mask = self.0;
        std::iter::from_fn(move || {
            if mask == 0 {
                return None;
            }
            let pos = mask.trailing_zeros();
            mask &= mask - 1;
            Some(Generator::from_bit_position(pos))
        })
    }

    /// Sign picked up by the canonical product `self · other`, or `None` when
    /// the two share a generator.
    pub fn product_sign(self, other: Monomial) -> Option<i8> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // Each generator of `other` moves left past every larger generator of `self`.
        let mut swaps = 0u32;
        let mut rest = other.0;
        while rest != 0 {
            let pos = rest.trailing_zeros();
            rest &= rest - 1;
            let above = if pos == 31 { 0 } else { !0u32 << (pos + 1) };
            swaps += (self.0 & above).count_ones();
        }
        Some(if swaps.is_multiple_of(2) { 1 } else { -1 })
    }

    /// Every monomial over the given generators (all `2^k` subsets), in
    /// [`Monomial`] order: by degree, then lexicographically.
    pub fn all_over(generators: &[Generator]) -> Vec<Monomial> {
        let bits: Vec<u32> = generators.iter().map(|g| g.bit()).collect();
        let mut out: Vec<Monomial> = (0u32..(1 << bits.len()))
            .map(|subset| {
                let mask = bits
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| subset & (1 << i) != 0)
                    .fold(0, |acc, (_, b)| acc | b);
                Monomial(mask)
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.generators().cmp(other.generators()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unity() {
            return f.write_str("1");
        }
        for (i, g) in self.generators().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Sorts a word of generators into canonical order.
///
/// Returns the permutation parity and the monomial, or `None` if a generator
/// repeats (the product is zero by nilpotency).
pub fn normalize_word(word: &[Generator]) -> Option<(i8, Monomial)> {
    word.iter().try_fold((1i8, Monomial::UNITY), |(sign, acc), &g| {
        let next = Monomial::from_generator(g);
        acc.product_sign(next)
            .map(|s| (sign * s, Monomial(acc.0 | next.0)))
    })
}

/// A finite complex combination of monomials, with no zero coefficients stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GrassmannElement {
    terms: BTreeMap<Monomial, Complex64>,
}

impl GrassmannElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(Complex64::new(1.0, 0.0))
    }

    pub fn scalar(c: Complex64) -> Self {
        Self::term(Monomial::UNITY, c)
    }

    pub fn real(x: f64) -> Self {
        Self::scalar(Complex64::new(x, 0.0))
    }

    pub fn generator(g: Generator) -> Self {
        Self::term(Monomial::from_generator(g), Complex64::new(1.0, 0.0))
    }

    pub fn term(m: Monomial, c: Complex64) -> Self {
        let mut out = Self::zero();
        out.add_term(m, c);
        out
    }

    /// `c · g₁g₂…gₖ` for an arbitrary (possibly unsorted) word.
    pub fn from_word(word: &[Generator], c: Complex64) -> Self {
        match normalize_word(word) {
            Some((sign, m)) => Self::term(m, c * f64::from(sign)),
            None => Self::zero(),
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        let entry = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, Complex64)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: Monomial) -> Complex64 {
        self.terms.get(&m).copied().unwrap_or_default()
    }

    /// The degree-0 coefficient.
    pub fn scalar_part(&self) -> Complex64 {
        self.coefficient(Monomial::UNITY)
    }

    /// True when the element has no Grassmann content.
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|m| m.is_unity())
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Union of every generator that appears in some term.
    pub fn support(&self) -> Vec<Generator> {
        let mask = self.terms.keys().fold(0u32, |acc, m| acc | m.0);
        Monomial(mask).generators().collect()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero();
        for (m, v) in self.terms() {
            out.add_term(m, v * c);
        }
        out
    }

    /// Hermitian conjugate: reverses each word, swaps `θᵢ ↔ θ̄ᵢ` and conjugates
    /// the coefficient.
    pub fn conjugate(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in self.terms() {
            let mut reversed: Vec<Generator> = m.generators().map(Generator::bar).collect();
            reversed.reverse();
            let (sign, mc) = normalize_word(&reversed).expect("distinct generators stay distinct");
            out.add_term(mc, c.conj() * f64::from(sign));
        }
        out
    }

    /// `∫dg self`, the left derivative with respect to `g`.
    pub fn integrate(&self, g: Generator) -> Self {
        let bit = g.bit();
        let mut out = Self::zero();
        for (m, c) in self.terms() {
            if m.0 & bit == 0 {
                continue;
            }
            let below = (m.0 & (bit - 1)).count_ones();
            let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
            out.add_term(Monomial(m.0 & !bit), c * sign);
        }
        out
    }

    /// `∫dg₁dg₂…dgₖ self` with the rightmost measure applied first.
    pub fn integrate_many(&self, measures: &[Generator]) -> Self {
        measures
            .iter()
            .rev()
            .fold(self.clone(), |acc, &g| acc.integrate(g))
    }

    /// Largest absolute coefficient difference between two elements.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    /// Drops coefficients with modulus at or below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(m, c)| (*m, *c))
            .collect();
        GrassmannElement { terms }
    }
}

impl From<Generator> for GrassmannElement {
    fn from(g: Generator) -> Self {
        GrassmannElement::generator(g)
    }
}

impl Add<&GrassmannElement> for &GrassmannElement {
    type Output = GrassmannElement;
    fn add(self, rhs: &GrassmannElement) -> GrassmannElement {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for GrassmannElement {
    type Output = GrassmannElement;
    fn add(mut self, rhs: GrassmannElement) -> GrassmannElement {
        self += &rhs;
        self
    }
}

impl AddAssign<&GrassmannElement> for GrassmannElement {
    fn add_assign(&mut self, rhs: &GrassmannElement) {
        for (m, c) in rhs.terms() {
            self.add_term(m, c);
        }
    }
}

impl Neg for &GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> GrassmannElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Neg for GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> GrassmannElement {
        -&self
    }
}

impl Sub<&GrassmannElement> for &GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: &GrassmannElement) -> GrassmannElement {
        self + &(-rhs)
    }
}

impl Sub for GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: GrassmannElement) -> GrassmannElement {
        &self - &rhs
    }
}

impl Mul<&GrassmannElement> for &GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: &GrassmannElement) -> GrassmannElement {
        let mut out = GrassmannElement::zero();
        for (ma, ca) in self.terms() {
            for (mb, cb) in rhs.terms() {
                if let Some(sign) = ma.product_sign(mb) {
                    out.add_term(Monomial(ma.0 | mb.0), ca * cb * f64::from(sign));
                }
            }
        }
        out
    }
}

impl Mul for GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: GrassmannElement) -> GrassmannElement {
        &self * &rhs
    }
}

impl Mul<Complex64> for &GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: Complex64) -> GrassmannElement {
        self.scale(rhs)
    }
}

impl Mul<f64> for &GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: f64) -> GrassmannElement {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

/// Splits a coefficient into a sign flag and magnitude text. Purely real or
/// purely imaginary values carry their sign outside; general complex values are
/// parenthesized and reported as positive.
pub(crate) fn signed_coefficient(c: Complex64) -> (bool, String) {
    if c.im == 0.0 {
        (c.re < 0.0, format!("{}", c.re.abs()))
    } else if c.re == 0.0 {
        let mag = c.im.abs();
        let text = if mag == 1.0 { "i".to_string() } else { format!("{mag}i") };
        (c.im < 0.0, text)
    } else {
        let op = if c.im < 0.0 { '-' } else { '+' };
        (false, format!("({}{}{}i)", c.re, op, c.im.abs()))
    }
}

/// Renders `Σ cₖ·bodyₖ` as `a + b - c`, omitting unit magnitudes on non-empty
/// bodies.
pub(crate) fn write_signed_sum<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (Complex64, Option<String>)> + 'a,
) -> fmt::Result {
    let mut first = true;
    for (c, body) in terms {
        let (negative, mag) = signed_coefficient(c);
        match (first, negative) {
            (true, true) => f.write_str("-")?,
            (true, false) => {}
            (false, true) => f.write_str(" - ")?,
            (false, false) => f.write_str(" + ")?,
        }
        match body {
            None => f.write_str(&mag)?,
            Some(body) if mag == "1" => f.write_str(&body)?,
            Some(body) => write!(f, "{mag}·{body}")?,
        }
        first = false;
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_signed_sum(
            f,
            self.terms()
                .map(|(m, c)| (c, (!m.is_unity()).then(|| m.to_string()))),
        )
    }
}
