//! Sparse bivariate Laurent polynomials in `a` and `b`.
//!
//! A [`BiLaurent`] stores only nonzero coefficients, keyed by the exponent
//! pair `(j, k)` of the monomial `a^j b^k`. The map is ordered, so iteration
//! (and therefore serialization) is lexicographic in `(j, k)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Backend, Coeff, Exact, Float, Scalar};

/// Exponent pair `(j, k)` of the monomial `a^j b^k`.
pub type Exponent = (i32, i32);

/// One of the two signal variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    A,
    B,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::A => Axis::B,
            Axis::B => Axis::A,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::A => f.write_str("A"),
            Axis::B => f.write_str("B"),
        }
    }
}

/// Variable substitutions under which parities are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symmetry {
    /// `(a, b) -> (1/a, 1/b)`
    InvertBoth,
    /// `a -> -a`
    NegateA,
    /// `b -> -b`
    NegateB,
}

impl Symmetry {
    pub const ALL: [Symmetry; 3] = [Symmetry::InvertBoth, Symmetry::NegateA, Symmetry::NegateB];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    #[serde(rename = "none")]
    NoParity,
}

impl Parity {
    /// `Even` for even `n`, `Odd` otherwise (negative `n` allowed).
    pub fn of_integer(n: i64) -> Parity {
        if n.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Bounding box of a polynomial's exponents: `max |j|` and `max |k|`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DegreeBox {
    pub deg_a: u32,
    pub deg_b: u32,
}

impl DegreeBox {
    pub fn new(deg_a: u32, deg_b: u32) -> Self {
        DegreeBox { deg_a, deg_b }
    }

    /// Componentwise `<=`.
    pub fn fits_in(&self, other: &DegreeBox) -> bool {
        self.deg_a <= other.deg_a && self.deg_b <= other.deg_b
    }

    pub fn contains(&self, (j, k): Exponent) -> bool {
        j.unsigned_abs() <= self.deg_a && k.unsigned_abs() <= self.deg_b
    }

    pub fn along(&self, axis: Axis) -> u32 {
        match axis {
            Axis::A => self.deg_a,
            Axis::B => self.deg_b,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("coefficient backends differ: {first} and {second}")]
    BackendMismatch { first: Backend, second: Backend },
}

/// Sparse Laurent polynomial in two variables.
#[derive(Clone, PartialEq, Debug)]
pub struct BiLaurent<S> {
    terms: BTreeMap<Exponent, S>,
}

/// Sparse Laurent polynomial in one variable.
#[derive(Clone, PartialEq, Debug)]
pub struct UniLaurent<S> {
    terms: BTreeMap<i32, S>,
}

impl<S: Coeff> Default for BiLaurent<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Coeff> BiLaurent<S> {
    pub fn zero() -> Self {
        BiLaurent {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: S) -> Self {
        Self::monomial((0, 0), c)
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn monomial(e: Exponent, c: S) -> Self {
        Self::from_terms([(e, c)])
    }

    /// Sums duplicate exponents and drops zero results.
    pub fn from_terms<I: IntoIterator<Item = (Exponent, S)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (e, c) in terms {
            out.add_term(e, &c);
        }
        out
    }

    fn add_term(&mut self, e: Exponent, c: &S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(slot) => {
                let sum = slot.add(c);
                if sum.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    /// `(x + 1/x)/2` in the variable selected by `axis`.
    pub fn half_sum(axis: Axis) -> Self {
        let h = S::from_ratio(1, 2);
        Self::from_terms([(axis.unit(1), h.clone()), (axis.unit(-1), h)])
    }

    /// `(x - 1/x)/2` in the variable selected by `axis`.
    pub fn half_diff(axis: Axis) -> Self {
        Self::from_terms([
            (axis.unit(1), S::from_ratio(1, 2)),
            (axis.unit(-1), S::from_ratio(-1, 2)),
        ])
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

    pub fn terms(&self) -> impl Iterator<Item = (Exponent, &S)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, e: Exponent) -> S {
        self.terms.get(&e).cloned().unwrap_or_else(S::zero)
    }

    pub fn get(&self, e: Exponent) -> Option<&S> {
        self.terms.get(&e)
    }

    pub fn degree(&self) -> DegreeBox {
        self.terms
            .keys()
            .fold(DegreeBox::default(), |d, &(j, k)| DegreeBox {
                deg_a: d.deg_a.max(j.unsigned_abs()),
                deg_b: d.deg_b.max(k.unsigned_abs()),
            })
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, x)| (*e, x.mul(c))))
    }

    /// Torus conjugate: `a^j b^k` with coefficient `c` becomes `a^-j b^-k`
    /// with coefficient `conj(c)`. Equals pointwise conjugation on the torus.
    pub fn star(&self) -> Self {
        BiLaurent {
            terms: self
                .terms
                .iter()
                .map(|(&(j, k), c)| ((-j, -k), c.conj()))
                .collect(),
        }
    }

    pub fn transform(&self, kind: Symmetry) -> Self {
        let terms = self.terms.iter().map(|(&(j, k), c)| match kind {
            Symmetry::InvertBoth => ((-j, -k), c.clone()),
            Symmetry::NegateA if j.rem_euclid(2) == 1 => ((j, k), c.neg()),
            Symmetry::NegateB if k.rem_euclid(2) == 1 => ((j, k), c.neg()),
            _ => ((j, k), c.clone()),
        });
        BiLaurent {
            terms: terms.collect(),
        }
    }

    /// Parity under `kind`, comparing coefficients up to `tol`.
    ///
    /// The zero polynomial is `Even`.
    pub fn parity_tol(&self, kind: Symmetry, tol: f64) -> Parity {
        let image = self.transform(kind);
        if self.approx_eq(&image, tol) {
            Parity::Even
        } else if self.approx_eq(&image.neg_ref(), tol) {
            Parity::Odd
        } else {
            Parity::NoParity
        }
    }

    /// Exact parity under `kind`.
    pub fn parity_of(&self, kind: Symmetry) -> Parity {
        self.parity_tol(kind, 0.0)
    }

    /// Coefficient slice at a fixed exponent of one variable.
    ///
    /// For `Axis::A` the result is `k -> P[exponent, k]`, a polynomial in `b`;
    /// for `Axis::B` it is `j -> P[j, exponent]`, a polynomial in `a`.
    pub fn slice(&self, axis: Axis, exponent: i32) -> UniLaurent<S> {
        let terms = self.terms.iter().filter_map(|(&(j, k), c)| match axis {
            Axis::A if j == exponent => Some((k, c.clone())),
            Axis::B if k == exponent => Some((j, c.clone())),
            _ => None,
        });
        UniLaurent {
            terms: terms.collect(),
        }
    }

    /// Value at `a = e^{i theta_a}`, `b = e^{i theta_b}`, in floating point.
    pub fn evaluate(&self, theta_a: f64, theta_b: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(j, k), c)| {
                c.to_c64() * Complex64::from_polar(1.0, j as f64 * theta_a + k as f64 * theta_b)
            })
            .sum()
    }

    /// Every coefficient of `self - other` is negligible at `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if tol == 0.0 || S::BACKEND == Backend::Exact {
            return self == other;
        }
        (self - other).terms.values().all(|c| c.is_negligible(tol))
    }

    /// Largest coefficient modulus of `self - other`, in floating point.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other)
            .terms
            .values()
            .map(|c| c.abs_f64())
            .fold(0.0, f64::max)
    }

    /// Terms outside `bound`.
    pub fn outside(&self, bound: &DegreeBox) -> impl Iterator<Item = (Exponent, &S)> + '_ {
        let bound = *bound;
        self.terms().filter(move |(e, _)| !bound.contains(*e))
    }

    /// Drops every term outside `bound`.
    pub fn truncate_to(&self, bound: &DegreeBox) -> Self {
        BiLaurent {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| bound.contains(**e))
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    fn neg_ref(&self) -> Self {
        BiLaurent {
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
        }
    }

    pub fn map_coeffs<T: Coeff>(&self, f: impl Fn(&S) -> T) -> BiLaurent<T> {
        BiLaurent::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))))
    }

    pub fn to_float(&self) -> BiLaurent<Float> {
        self.map_coeffs(|c| c.to_c64())
    }
}

impl Axis {
    /// Exponent pair of `x^power` for this axis' variable.
    pub fn unit(self, power: i32) -> Exponent {
        match self {
            Axis::A => (power, 0),
            Axis::B => (0, power),
        }
    }

    /// The component of `e` belonging to this axis.
    pub fn component(self, e: Exponent) -> i32 {
        match self {
            Axis::A => e.0,
            Axis::B => e.1,
        }
    }
}

impl<S: Coeff> Add<&BiLaurent<S>> for &BiLaurent<S> {
    type Output = BiLaurent<S>;
    fn add(self, rhs: &BiLaurent<S>) -> BiLaurent<S> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c);
        }
        out
    }
}

impl<S: Coeff> Sub<&BiLaurent<S>> for &BiLaurent<S> {
    type Output = BiLaurent<S>;
    fn sub(self, rhs: &BiLaurent<S>) -> BiLaurent<S> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, &c.neg());
        }
        out
    }
}

impl<S: Coeff> Mul<&BiLaurent<S>> for &BiLaurent<S> {
    type Output = BiLaurent<S>;
    fn mul(self, rhs: &BiLaurent<S>) -> BiLaurent<S> {
        let mut out = BiLaurent::zero();
        for (&(j1, k1), c1) in &self.terms {
            for (&(j2, k2), c2) in &rhs.terms {
                out.add_term((j1 + j2, k1 + k2), &c1.mul(c2));
            }
        }
        out
    }
}

impl<S: Coeff> Neg for &BiLaurent<S> {
    type Output = BiLaurent<S>;
    fn neg(self) -> BiLaurent<S> {
        self.neg_ref()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<S: Coeff> $tr<BiLaurent<S>> for BiLaurent<S> {
            type Output = BiLaurent<S>;
            fn $m(self, rhs: BiLaurent<S>) -> BiLaurent<S> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<S: Coeff> Neg for BiLaurent<S> {
    type Output = BiLaurent<S>;
    fn neg(self) -> BiLaurent<S> {
        self.neg_ref()
    }
}

impl<S: Coeff> UniLaurent<S> {
    pub fn zero() -> Self {
        UniLaurent {
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, S)>>(terms: I) -> Self {
        let mut map: BTreeMap<i32, S> = BTreeMap::new();
        for (e, c) in terms {
            let sum = match map.get(&e) {
                Some(prev) => prev.add(&c),
                None => c,
            };
            if sum.is_zero() {
                map.remove(&e);
            } else {
                map.insert(e, sum);
            }
        }
        UniLaurent { terms: map }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &S)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, e: i32) -> S {
        self.terms.get(&e).cloned().unwrap_or_else(S::zero)
    }

    /// Union of the exponents present in either slice, ascending.
    pub fn joint_support(&self, other: &Self) -> Vec<i32> {
        let mut keys: Vec<i32> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .copied()
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, x)| (*e, x.mul(c))))
    }
}

/// A polynomial whose backend is decided at runtime.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyPoly {
    Exact(BiLaurent<Exact>),
    Float(BiLaurent<Float>),
}

impl AnyPoly {
    pub fn backend(&self) -> Backend {
        match self {
            AnyPoly::Exact(_) => Backend::Exact,
            AnyPoly::Float(_) => Backend::Float,
        }
    }

    pub fn to_float(&self) -> BiLaurent<Float> {
        match self {
            AnyPoly::Exact(p) => p.to_float(),
            AnyPoly::Float(p) => p.clone(),
        }
    }
}

/// Builds a polynomial from raw entries whose backend is not known up front.
///
/// An empty entry list yields the exact zero polynomial.
pub fn make_poly(raw: Vec<(Exponent, Scalar)>) -> Result<AnyPoly, LaurentError> {
    let Some(first) = raw.first().map(|(_, c)| c.backend()) else {
        return Ok(AnyPoly::Exact(BiLaurent::zero()));
    };
    if let Some((_, c)) = raw.iter().find(|(_, c)| c.backend() != first) {
        return Err(LaurentError::BackendMismatch {
            first,
            second: c.backend(),
        });
    }
    Ok(match first {
        Backend::Exact => AnyPoly::Exact(BiLaurent::from_terms(raw.into_iter().map(
            |(e, c)| match c {
                Scalar::Exact(x) => (e, x),
                Scalar::Float(_) => unreachable!(),
            },
        ))),
        Backend::Float => AnyPoly::Float(BiLaurent::from_terms(raw.into_iter().map(
            |(e, c)| match c {
                Scalar::Float(x) => (e, x),
                Scalar::Exact(_) => unreachable!(),
            },
        ))),
    })
}

impl<S: Coeff> fmt::Display for BiLaurent<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, ((j, k), c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let [re, im] = c.to_wire();
            write!(f, "({re}, {im})·a^{j}·b^{k}")?;
        }
        Ok(())
    }
}
