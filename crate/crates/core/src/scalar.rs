//! Complex coefficient backends.
//!
//! Every polynomial in this crate is generic over a [`Coeff`] type. Two
//! backends exist: [`Exact`], complex numbers over arbitrary-precision
//! rationals where no rounding ever happens, and [`Float`], plain `f64`
//! complex numbers compared under an absolute tolerance.

use std::fmt;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex number with exact rational parts.
pub type Exact = Complex<BigRational>;

/// Complex number with `f64` parts.
pub type Float = Complex64;

/// Which arithmetic a value is carried in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Float => f.write_str("float"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarParseError {
    #[error("`{0}` is not a rational of the form \"num/den\" or \"num\"")]
    BadRational(String),
    #[error("`{0}` has a zero denominator")]
    ZeroDenominator(String),
    #[error("`{0}` is not a decimal floating-point number")]
    BadFloat(String),
}

/// Arithmetic a polynomial coefficient must support.
///
/// Comparisons that take a `tol` ignore it in the exact backend.
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn imag_unit() -> Self;
    /// The real number `num / den`. Panics if `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Division; `rhs` must be nonzero.
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;

    /// Exactly zero.
    fn is_zero(&self) -> bool;
    /// Zero up to `tol` in absolute value (exactly zero for [`Exact`]).
    fn is_negligible(&self, tol: f64) -> bool;
    /// `|self| == 1`, up to `tol` for [`Float`].
    fn is_unit(&self, tol: f64) -> bool;

    fn to_c64(&self) -> Complex64;
    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    /// The square root of a unit scalar with argument in `(-pi/2, pi/2]`.
    ///
    /// `None` when the root is not representable in this backend (an
    /// exact unit whose root is irrational).
    fn sqrt_unit(&self) -> Option<Self>;

    /// `self / |self|` for floats; exact values are returned unchanged.
    fn normalize_unit(&self) -> Self;

    /// Real and imaginary parts as strings for the JSON formats.
    fn to_wire(&self) -> [String; 2];
    fn from_wire(re: &str, im: &str) -> Result<Self, ScalarParseError>;

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.sub(other).is_negligible(tol)
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, ScalarParseError> {
    let s = s.trim();
    let bad = || ScalarParseError::BadRational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (
            n.trim().parse::<BigInt>().map_err(|_| bad())?,
            d.trim().parse::<BigInt>().map_err(|_| bad())?,
        ),
        None => (s.parse::<BigInt>().map_err(|_| bad())?, BigInt::one()),
    };
    if den.is_zero() {
        return Err(ScalarParseError::ZeroDenominator(s.to_string()));
    }
    Ok(BigRational::new(num, den))
}

/// Rational square root of a non-negative rational, if it has one.
fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Coeff for Exact {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }
    fn imag_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(
            BigRational::new(num.into(), den.into()),
            BigRational::zero(),
        )
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        Coeff::is_zero(self)
    }
    fn is_unit(&self, _tol: f64) -> bool {
        (&self.re * &self.re + &self.im * &self.im).is_one()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn sqrt_unit(&self) -> Option<Self> {
        if !Coeff::is_unit(self, 0.0) {
            return None;
        }
        let one = BigRational::one();
        let two = BigRational::from_integer(2.into());
        let re = rational_sqrt(&((&one + &self.re) / &two))?;
        if re.is_zero() {
            return Some(Self::imag_unit());
        }
        let mut im = rational_sqrt(&((&one - &self.re) / &two))?;
        if self.im.is_negative() {
            im = -im;
        }
        Some(Complex::new(re, im))
    }

    fn normalize_unit(&self) -> Self {
        self.clone()
    }

    fn to_wire(&self) -> [String; 2] {
        [format_rational(&self.re), format_rational(&self.im)]
    }
    fn from_wire(re: &str, im: &str) -> Result<Self, ScalarParseError> {
        Ok(Complex::new(parse_rational(re)?, parse_rational(im)?))
    }
}

impl Coeff for Float {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn sqrt_unit(&self) -> Option<Self> {
        let mut arg = self.arg();
        // arg() maps -1 - 0i to -pi; keep the root in (-pi/2, pi/2].
        if arg <= -std::f64::consts::PI {
            arg = std::f64::consts::PI;
        }
        Some(Complex64::from_polar(1.0, arg / 2.0))
    }

    fn normalize_unit(&self) -> Self {
        self / self.norm()
    }

    fn to_wire(&self) -> [String; 2] {
        [format!("{:?}", self.re), format!("{:?}", self.im)]
    }
    fn from_wire(re: &str, im: &str) -> Result<Self, ScalarParseError> {
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ScalarParseError::BadFloat(s.to_string()))
        };
        Ok(Complex64::new(parse(re)?, parse(im)?))
    }
}

/// Convert an exact scalar to the float backend.
pub fn exact_to_float(x: &Exact) -> Float {
    x.to_c64()
}

/// `(re + i im)` from two rational literals, e.g. `exact("3/5", "4/5")`.
///
/// Panics on malformed input; meant for tests and constants.
pub fn exact(re: &str, im: &str) -> Exact {
    Exact::from_wire(re, im).expect("malformed rational literal")
}

/// A scalar whose backend is only known at runtime (parsed input).
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Exact),
    Float(Float),
}

impl Scalar {
    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Exact(_) => Backend::Exact,
            Scalar::Float(_) => Backend::Float,
        }
    }
}
