//! Protocols and the unitaries they generate.
//!
//! A [`Protocol`] is a bit string `s` (which signal operator to apply at each
//! step) and `n + 1` phases. [`build`] multiplies out
//!
//! ```text
//! U = e^{iφ₀σz} · X₁ e^{iφ₁σz} · X₂ e^{iφ₂σz} ⋯ Xₙ e^{iφₙσz},   Xₖ ∈ {A(a), B(b)}
//! ```
//!
//! and keeps only the first row `(P, Q)`; the second row is `(-Q*, P*)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::laurent::{Axis, BiLaurent, DegreeBox, Exponent};
use crate::scalar::{Coeff, Float};

/// Tolerance on `|e^{iφ}| = 1` for float phases.
pub const UNIT_TOL: f64 = 1e-12;

/// Tolerance on the coefficients a float peel must cancel.
pub const PEEL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("phase value {0} does not have unit modulus")]
    NonUnitPhase(String),
    #[error("protocol has {s_len} signal bits but {phases_len} phases (expected {})", s_len + 1)]
    LengthMismatch { s_len: usize, phases_len: usize },
    #[error("declared degree {m} in a exceeds total degree {n}")]
    BadDeclaredDegree { n: u32, m: u32 },
    #[error("peeling {axis} leaves a term at {exponent:?} of size {magnitude:e} outside the reduced box")]
    DegreeNotReduced {
        axis: Axis,
        exponent: Exponent,
        magnitude: f64,
    },
    #[error("pair has declared degree 0 in the {axis} variable; nothing to peel")]
    NothingToPeel { axis: Axis },
}

/// A unit-modulus scalar `e^{iφ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitPhase<S> {
    value: S,
}

impl<S: Coeff> UnitPhase<S> {
    pub fn new(value: S) -> Result<Self, ProtocolError> {
        if value.is_unit(UNIT_TOL) {
            Ok(UnitPhase { value })
        } else {
            Err(ProtocolError::NonUnitPhase(format!(
                "{:?}",
                value.to_wire()
            )))
        }
    }

    pub fn one() -> Self {
        UnitPhase { value: S::one() }
    }

    pub fn value(&self) -> &S {
        &self.value
    }

    /// `e^{2iφ}`.
    pub fn square(&self) -> Self {
        UnitPhase {
            value: self.value.mul(&self.value),
        }
    }

    /// `e^{-iφ}`.
    pub fn inverse(&self) -> Self {
        UnitPhase {
            value: self.value.conj(),
        }
    }

    /// `e^{i(φ+π)}`.
    pub fn shifted_by_pi(&self) -> Self {
        UnitPhase {
            value: self.value.neg(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        UnitPhase {
            value: self.value.mul(&other.value),
        }
    }

    /// `φ` reduced to `(-π, π]`.
    pub fn angle(&self) -> f64 {
        normalize_angle(self.value.to_c64().arg())
    }

    /// The square root with `φ` in `(-π/2, π/2]`, if representable.
    pub fn sqrt(&self) -> Option<Self> {
        self.value.sqrt_unit().map(|value| UnitPhase { value })
    }

    pub fn to_float(&self) -> UnitPhase<Float> {
        UnitPhase {
            value: self.value.to_c64(),
        }
    }
}

impl UnitPhase<Float> {
    pub fn from_angle(radians: f64) -> Self {
        UnitPhase {
            value: Complex64::from_polar(1.0, normalize_angle(radians)),
        }
    }
}

/// Reduce an angle to `(-π, π]`.
pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Signal-operator selection and phases `φ₀ … φₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Protocol<S> {
    s: Vec<Axis>,
    phases: Vec<UnitPhase<S>>,
}

impl<S: Coeff> Protocol<S> {
    pub fn new(s: Vec<Axis>, phases: Vec<UnitPhase<S>>) -> Result<Self, ProtocolError> {
        if phases.len() != s.len() + 1 {
            return Err(ProtocolError::LengthMismatch {
                s_len: s.len(),
                phases_len: phases.len(),
            });
        }
        Ok(Protocol { s, phases })
    }

    pub fn s(&self) -> &[Axis] {
        &self.s
    }

    pub fn phases(&self) -> &[UnitPhase<S>] {
        &self.phases
    }

    pub fn n(&self) -> u32 {
        self.s.len() as u32
    }

    /// Hamming weight of `s`: how many `A` operators appear.
    pub fn m(&self) -> u32 {
        self.s.iter().filter(|&&x| x == Axis::A).count() as u32
    }

    pub fn to_float(&self) -> Protocol<Float> {
        Protocol {
            s: self.s.clone(),
            phases: self.phases.iter().map(UnitPhase::to_float).collect(),
        }
    }
}

/// 2×2 matrix of Laurent polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentMatrix<S> {
    pub entries: [[BiLaurent<S>; 2]; 2],
}

impl<S: Coeff> LaurentMatrix<S> {
    pub fn identity() -> Self {
        LaurentMatrix {
            entries: [
                [BiLaurent::one(), BiLaurent::zero()],
                [BiLaurent::zero(), BiLaurent::one()],
            ],
        }
    }

    /// `I (x + 1/x)/2 + σx (x - 1/x)/2` in the variable of `axis`.
    pub fn signal(axis: Axis) -> Self {
        let c = BiLaurent::half_sum(axis);
        let s = BiLaurent::half_diff(axis);
        LaurentMatrix {
            entries: [[c.clone(), s.clone()], [s, c]],
        }
    }

    /// `e^{iφσz} = diag(e^{iφ}, e^{-iφ})`.
    pub fn phase_gate(phase: &UnitPhase<S>) -> Self {
        LaurentMatrix {
            entries: [
                [
                    BiLaurent::constant(phase.value().clone()),
                    BiLaurent::zero(),
                ],
                [
                    BiLaurent::zero(),
                    BiLaurent::constant(phase.inverse().value().clone()),
                ],
            ],
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let e = |i: usize, j: usize| {
            &(&self.entries[i][0] * &rhs.entries[0][j])
                + &(&self.entries[i][1] * &rhs.entries[1][j])
        };
        LaurentMatrix {
            entries: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
        }
    }

    /// Conjugate transpose on the torus.
    pub fn dagger(&self) -> Self {
        let [[a, b], [c, d]] = &self.entries;
        LaurentMatrix {
            entries: [[a.star(), c.star()], [b.star(), d.star()]],
        }
    }

    pub fn evaluate(&self, theta_a: f64, theta_b: f64) -> [[Complex64; 2]; 2] {
        let e = |i: usize, j: usize| self.entries[i][j].evaluate(theta_a, theta_b);
        [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
    }

    pub fn degree(&self) -> DegreeBox {
        self.entries
            .iter()
            .flatten()
            .fold(DegreeBox::default(), |d, p| {
                let e = p.degree();
                DegreeBox::new(d.deg_a.max(e.deg_a), d.deg_b.max(e.deg_b))
            })
    }
}

/// First row `(P, Q)` of a unitary `[[P, Q], [-Q*, P*]]`, with the declared
/// total degree `n` and `a`-degree `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyPair<S> {
    p: BiLaurent<S>,
    q: BiLaurent<S>,
    n: u32,
    m: u32,
}

impl<S: Coeff> PolyPair<S> {
    pub fn new(p: BiLaurent<S>, q: BiLaurent<S>, n: u32, m: u32) -> Result<Self, ProtocolError> {
        if m > n {
            return Err(ProtocolError::BadDeclaredDegree { n, m });
        }
        Ok(PolyPair { p, q, n, m })
    }

    /// `P = 1, Q = 0`, `n = m = 0`.
    pub fn identity() -> Self {
        PolyPair {
            p: BiLaurent::one(),
            q: BiLaurent::zero(),
            n: 0,
            m: 0,
        }
    }

    pub fn p(&self) -> &BiLaurent<S> {
        &self.p
    }

    pub fn q(&self) -> &BiLaurent<S> {
        &self.q
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `(m, n - m)`.
    pub fn declared_box(&self) -> DegreeBox {
        DegreeBox::new(self.m, self.n - self.m)
    }

    pub fn axis_degree(&self, axis: Axis) -> u32 {
        self.declared_box().along(axis)
    }

    /// The full matrix `[[P, Q], [-Q*, P*]]`.
    pub fn matrix(&self) -> LaurentMatrix<S> {
        LaurentMatrix {
            entries: [
                [self.p.clone(), self.q.clone()],
                [-&self.q.star(), self.p.star()],
            ],
        }
    }

    pub fn evaluate(&self, theta_a: f64, theta_b: f64) -> [[Complex64; 2]; 2] {
        let p = self.p.evaluate(theta_a, theta_b);
        let q = self.q.evaluate(theta_a, theta_b);
        [[p, q], [-q.conj(), p.conj()]]
    }

    /// `-U`, the same unitary up to a global sign.
    pub fn negated(&self) -> Self {
        PolyPair {
            p: -&self.p,
            q: -&self.q,
            n: self.n,
            m: self.m,
        }
    }

    /// Right-multiply by `X e^{iφσz}` where `X` is the signal operator of
    /// `axis`.
    pub fn step_extend(&self, axis: Axis, phase: &UnitPhase<S>) -> Self {
        let c = BiLaurent::half_sum(axis);
        let s = BiLaurent::half_diff(axis);
        let p = &(&c * &self.p) + &(&s * &self.q);
        let q = &(&s * &self.p) + &(&c * &self.q);
        PolyPair {
            p: p.scale(phase.value()),
            q: q.scale(phase.inverse().value()),
            n: self.n + 1,
            m: self.m + u32::from(axis == Axis::A),
        }
    }

    /// Right-multiply by `e^{-iφσz} X†`, undoing [`PolyPair::step_extend`].
    ///
    /// Succeeds only when every term lands inside the declared box reduced by
    /// one along `axis`, which for a parity-respecting pair is exactly the
    /// condition `P_top = e^{2iφ} Q_top` on that axis. Float pairs tolerate
    /// residues up to [`PEEL_TOL`] and have them dropped.
    pub fn step_peel(&self, axis: Axis, phase: &UnitPhase<S>) -> Result<Self, ProtocolError> {
        if self.axis_degree(axis) == 0 {
            return Err(ProtocolError::NothingToPeel { axis });
        }
        let c = BiLaurent::half_sum(axis);
        let s = BiLaurent::half_diff(axis);
        let p_rot = self.p.scale(phase.inverse().value());
        let q_rot = self.q.scale(phase.value());
        let p = &(&c * &p_rot) - &(&s * &q_rot);
        let q = &(&c * &q_rot) - &(&s * &p_rot);

        let m = self.m - u32::from(axis == Axis::A);
        let bound = DegreeBox::new(m, self.n - 1 - m);
        let worst = p
            .outside(&bound)
            .chain(q.outside(&bound))
            .map(|(e, x)| (e, x.abs_f64(), x.is_negligible(PEEL_TOL)))
            .filter(|(_, _, negligible)| !negligible)
            .max_by(|x, y| x.1.total_cmp(&y.1));
        if let Some((exponent, magnitude, _)) = worst {
            return Err(ProtocolError::DegreeNotReduced {
                axis,
                exponent,
                magnitude,
            });
        }
        Ok(PolyPair {
            p: p.truncate_to(&bound),
            q: q.truncate_to(&bound),
            n: self.n - 1,
            m,
        })
    }

    /// Largest coefficient difference across `P` and `Q`.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.p
            .max_abs_diff(&other.p)
            .max(self.q.max_abs_diff(&other.q))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n == other.n
            && self.m == other.m
            && self.p.approx_eq(&other.p, tol)
            && self.q.approx_eq(&other.q, tol)
    }

    pub fn to_float(&self) -> PolyPair<Float> {
        PolyPair {
            p: self.p.to_float(),
            q: self.q.to_float(),
            n: self.n,
            m: self.m,
        }
    }
}

/// Multiply out a protocol, one [`PolyPair::step_extend`] per signal bit.
pub fn build<S: Coeff>(prot: &Protocol<S>) -> PolyPair<S> {
    let start = PolyPair {
        p: BiLaurent::constant(prot.phases[0].value().clone()),
        q: BiLaurent::zero(),
        n: 0,
        m: 0,
    };
    prot.s
        .iter()
        .zip(&prot.phases[1..])
        .fold(start, |pair, (axis, phase)| pair.step_extend(*axis, phase))
}

/// The full 2×2 product, left to right, without the pair shortcut.
pub fn build_matrix<S: Coeff>(prot: &Protocol<S>) -> LaurentMatrix<S> {
    prot.s.iter().zip(&prot.phases[1..]).fold(
        LaurentMatrix::phase_gate(&prot.phases[0]),
        |acc, (axis, phase)| {
            acc.mul(&LaurentMatrix::signal(*axis))
                .mul(&LaurentMatrix::phase_gate(phase))
        },
    )
}
