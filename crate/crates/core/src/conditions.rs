//! Coefficient-level checks of the conditions a realizable pair satisfies.
//!
//! Two variants are implemented. [`Variant::Revised`] is the corrected list
//! of necessary conditions:
//!
//! - (i) `deg P, deg Q ≼ (m, n - m)`
//! - (ii′) `P` even and `Q` odd under `(a, b) -> (1/a, 1/b)`
//! - (iii′) `P` and `Q` have parity `m` under `a -> -a` and `n - m` under `b -> -b`
//! - (iv) `|P|² + |Q|² = 1` on the torus
//! - (v′) for `m ≥ 1` and `n - m ≥ 1`, the top slices are related by a unit
//!   scalar on at least one axis
//!
//! [`Variant::Original`] keeps (i) and (iv) but uses the earlier parity
//! claims for (ii) and (iii) and the unguarded top-slice relation at the
//! actual maximal degrees for (v). Those parity claims contradict (iv) for
//! any bivariate pair; [`forced_zero_trace`] replays that deduction.
//!
//! Condition (iv) is checked as the Laurent identity `P·P* + Q·Q* = 1`,
//! i.e. the lag-zero coefficient sum is one and every other lag sums to
//! zero.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::{Axis, BiLaurent, Exponent, Parity, Symmetry, UniLaurent};
use crate::protocol::{PolyPair, UnitPhase};
use crate::scalar::Coeff;

/// Relative tolerance for float top-slice proportionality.
pub const PROPORTIONALITY_RTOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Revised,
}

/// Which entry of the pair a witness refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Which {
    P,
    Q,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<S> {
    Pass,
    /// The condition's guard does not apply.
    Vacuous,
    Fail(Witness<S>),
}

impl<S> Verdict<S> {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness<S> {
    /// A term lies outside the declared degree box.
    OutsideBox {
        poly: Which,
        exponent: Exponent,
        coeff: S,
    },
    /// `coeff` at `exponent` differs from the matching coefficient of the
    /// transformed polynomial times the expected sign.
    Parity {
        poly: Which,
        symmetry: Symmetry,
        expected: Parity,
        exponent: Exponent,
        coeff: S,
        image_coeff: S,
    },
    /// Coefficient of `P·P* + Q·Q* - 1` at a lag `(l_a, l_b)`.
    Unitarity { lag: Exponent, residual: S },
    /// Neither axis has related top slices.
    TopSlices { axes: Vec<(Axis, TopWitness<S>)> },
}

/// Why two top slices are not related by a unit scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct TopWitness<S> {
    pub exponent: i32,
    pub p_coeff: S,
    pub q_coeff: S,
    pub kind: TopMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopMismatch {
    /// `P_k ≠ c·Q_k` for the scalar `c` fitted at the pivot.
    RatioDiffers,
    /// The fitted scalar does not have unit modulus.
    NonUnitRatio,
    /// One slice vanishes and the other does not.
    OneSided,
}

/// Outcome of comparing the top slices of `P` and `Q` on one axis.
#[derive(Clone, Debug, PartialEq)]
pub enum TopRelation<S> {
    /// `P_top = c · Q_top` with `|c| = 1`.
    Proportional(UnitPhase<S>),
    NotProportional(TopWitness<S>),
    /// Both top slices vanish: the declared degree overstates the actual one.
    BothSidesZero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport<S> {
    pub variant: Variant,
    pub i: Verdict<S>,
    pub ii: Verdict<S>,
    pub iii: Verdict<S>,
    pub iv: Verdict<S>,
    pub v: Verdict<S>,
}

impl<S> ConditionReport<S> {
    pub fn verdicts(&self) -> [(&'static str, &Verdict<S>); 5] {
        [
            ("i", &self.i),
            ("ii", &self.ii),
            ("iii", &self.iii),
            ("iv", &self.iv),
            ("v", &self.v),
        ]
    }

    /// No condition failed.
    pub fn overall(&self) -> bool {
        self.verdicts().iter().all(|(_, v)| !v.is_fail())
    }

    /// Conditions (i) through (iv) hold.
    pub fn first_four(&self) -> bool {
        self.verdicts()[..4].iter().all(|(_, v)| !v.is_fail())
    }
}

/// Evaluate every condition of `variant` on `pair`.
///
/// `tol` is the absolute coefficient tolerance for float pairs; exact pairs
/// are compared exactly.
pub fn check_conditions<S: Coeff>(
    pair: &PolyPair<S>,
    variant: Variant,
    tol: f64,
) -> ConditionReport<S> {
    let (n, m) = (i64::from(pair.n()), i64::from(pair.m()));
    let (ii_req, iii_req) = match variant {
        Variant::Revised => (
            vec![
                (Which::P, Symmetry::InvertBoth, Parity::Even),
                (Which::Q, Symmetry::InvertBoth, Parity::Odd),
            ],
            vec![
                (Which::P, Symmetry::NegateA, Parity::of_integer(m)),
                (Which::P, Symmetry::NegateB, Parity::of_integer(n - m)),
                (Which::Q, Symmetry::NegateA, Parity::of_integer(m)),
                (Which::Q, Symmetry::NegateB, Parity::of_integer(n - m)),
            ],
        ),
        Variant::Original => (
            vec![
                (Which::P, Symmetry::InvertBoth, Parity::of_integer(n)),
                (Which::Q, Symmetry::InvertBoth, Parity::of_integer(n - 1)),
            ],
            vec![
                (Which::P, Symmetry::NegateA, Parity::of_integer(m)),
                (Which::P, Symmetry::NegateB, Parity::of_integer(m - n)),
                (Which::Q, Symmetry::NegateA, Parity::of_integer(m - 1)),
                (Which::Q, Symmetry::NegateB, Parity::of_integer(n - m - 1)),
            ],
        ),
    };

    let v = match variant {
        Variant::Revised => check_declared_tops(pair, tol),
        Variant::Original => check_actual_tops(pair, tol),
    };

    ConditionReport {
        variant,
        i: check_degree(pair, tol),
        ii: check_parities(pair, &ii_req, tol),
        iii: check_parities(pair, &iii_req, tol),
        iv: check_unitarity(pair, tol),
        v,
    }
}

fn entry<S: Coeff>(pair: &PolyPair<S>, which: Which) -> &BiLaurent<S> {
    match which {
        Which::P => pair.p(),
        Which::Q => pair.q(),
    }
}

fn check_degree<S: Coeff>(pair: &PolyPair<S>, tol: f64) -> Verdict<S> {
    let bound = pair.declared_box();
    for which in [Which::P, Which::Q] {
        if let Some((exponent, coeff)) = entry(pair, which)
            .outside(&bound)
            .find(|(_, c)| !c.is_negligible(tol))
        {
            return Verdict::Fail(Witness::OutsideBox {
                poly: which,
                exponent,
                coeff: coeff.clone(),
            });
        }
    }
    Verdict::Pass
}

fn check_parities<S: Coeff>(
    pair: &PolyPair<S>,
    requirements: &[(Which, Symmetry, Parity)],
    tol: f64,
) -> Verdict<S> {
    for &(which, symmetry, expected) in requirements {
        if let Some(w) = parity_witness(entry(pair, which), which, symmetry, expected, tol) {
            return Verdict::Fail(w);
        }
    }
    Verdict::Pass
}

/// First coefficient where `p` differs from `±transform(p)`.
fn parity_witness<S: Coeff>(
    p: &BiLaurent<S>,
    which: Which,
    symmetry: Symmetry,
    expected: Parity,
    tol: f64,
) -> Option<Witness<S>> {
    let image = p.transform(symmetry);
    let signed = match expected {
        Parity::Odd => -&image,
        _ => image.clone(),
    };
    let diff = p - &signed;
    let (exponent, _) = diff.terms().find(|(_, c)| !c.is_negligible(tol))?;
    Some(Witness::Parity {
        poly: which,
        symmetry,
        expected,
        exponent,
        coeff: p.coeff(exponent),
        image_coeff: image.coeff(exponent),
    })
}

/// `P·P* + Q·Q* - 1`; zero exactly when `|P|² + |Q|² = 1` on the torus.
pub fn unitarity_defect<S: Coeff>(p: &BiLaurent<S>, q: &BiLaurent<S>) -> BiLaurent<S> {
    let gram = &(p * &p.star()) + &(q * &q.star());
    &gram - &BiLaurent::one()
}

fn check_unitarity<S: Coeff>(pair: &PolyPair<S>, tol: f64) -> Verdict<S> {
    let defect = unitarity_defect(pair.p(), pair.q());
    let worst = defect
        .terms()
        .filter(|(_, c)| !c.is_negligible(tol))
        .max_by(|x, y| x.1.abs_f64().total_cmp(&y.1.abs_f64()));
    match worst {
        Some((lag, residual)) => Verdict::Fail(Witness::Unitarity {
            lag,
            residual: residual.clone(),
        }),
        None => Verdict::Pass,
    }
}

fn check_declared_tops<S: Coeff>(pair: &PolyPair<S>, tol: f64) -> Verdict<S> {
    if pair.m() == 0 || pair.n() == pair.m() {
        return Verdict::Vacuous;
    }
    either_axis([Axis::A, Axis::B].map(|axis| (axis, top_proportionality(pair, axis, tol))))
}

fn check_actual_tops<S: Coeff>(pair: &PolyPair<S>, tol: f64) -> Verdict<S> {
    let top = |axis: Axis| {
        pair.p()
            .terms()
            .chain(pair.q().terms())
            .filter(|(_, c)| !c.is_negligible(tol))
            .map(|(e, _)| axis.component(e))
            .filter(|&d| d > 0)
            .max()
    };
    let axes: Vec<_> = [Axis::A, Axis::B]
        .into_iter()
        .filter_map(|axis| {
            let d = top(axis)?;
            let rel = slice_relation(&pair.p().slice(axis, d), &pair.q().slice(axis, d), tol);
            Some((axis, rel))
        })
        .collect();
    if axes.is_empty() {
        return Verdict::Vacuous;
    }
    either_axis(axes)
}

fn either_axis<S: Coeff>(
    relations: impl IntoIterator<Item = (Axis, TopRelation<S>)>,
) -> Verdict<S> {
    let mut failures = Vec::new();
    for (axis, rel) in relations {
        match rel {
            TopRelation::NotProportional(w) => failures.push((axis, w)),
            _ => return Verdict::Pass,
        }
    }
    Verdict::Fail(Witness::TopSlices { axes: failures })
}

/// Compare the slices of `P` and `Q` at the declared top exponent of `axis`.
pub fn top_proportionality<S: Coeff>(pair: &PolyPair<S>, axis: Axis, tol: f64) -> TopRelation<S> {
    let top = pair.axis_degree(axis) as i32;
    slice_relation(&pair.p().slice(axis, top), &pair.q().slice(axis, top), tol)
}

/// Decide whether `p = c·q` for a unit scalar `c`.
///
/// The scalar is fitted at the largest `|q_k|`; every other exponent must
/// agree to [`PROPORTIONALITY_RTOL`] relative to that pivot (exactly, for
/// exact slices).
pub fn slice_relation<S: Coeff>(p: &UniLaurent<S>, q: &UniLaurent<S>, tol: f64) -> TopRelation<S> {
    let support = p.joint_support(q);
    let live = |c: &S| !c.is_negligible(tol);
    if !support
        .iter()
        .any(|&k| live(&p.coeff(k)) || live(&q.coeff(k)))
    {
        return TopRelation::BothSidesZero;
    }
    let largest = |s: &UniLaurent<S>| {
        support
            .iter()
            .copied()
            .max_by(|&x, &y| s.coeff(x).abs_f64().total_cmp(&s.coeff(y).abs_f64()))
            .expect("support is nonempty")
    };
    let witness = |k: i32, kind| {
        TopRelation::NotProportional(TopWitness {
            exponent: k,
            p_coeff: p.coeff(k),
            q_coeff: q.coeff(k),
            kind,
        })
    };

    let pivot = largest(q);
    let q_pivot = q.coeff(pivot);
    if !live(&q_pivot) {
        return witness(largest(p), TopMismatch::OneSided);
    }
    let c = p.coeff(pivot).div(&q_pivot);
    if !c.is_unit(PROPORTIONALITY_RTOL) {
        let kind = if p.coeff(pivot).is_negligible(tol) {
            TopMismatch::OneSided
        } else {
            TopMismatch::NonUnitRatio
        };
        return witness(pivot, kind);
    }
    let scale = PROPORTIONALITY_RTOL * q_pivot.abs_f64();
    for &k in &support {
        let r = p.coeff(k).sub(&c.mul(&q.coeff(k)));
        if !r.is_negligible(scale) {
            return witness(k, TopMismatch::RatioDiffers);
        }
    }
    TopRelation::Proportional(
        UnitPhase::new(c.normalize_unit()).expect("unit modulus checked above"),
    )
}

/// How far the top slices on `axis` are from any unit-scalar relation.
///
/// `1 - 2|⟨p, q⟩| / (‖p‖² + ‖q‖²)`, which equals
/// `min_{|c|=1} ‖p - c·q‖² / (‖p‖² + ‖q‖²)`: zero exactly when `p = c·q`
/// with `|c| = 1`, and at most one. Both slices zero gives zero.
pub fn top_misalignment<S: Coeff>(pair: &PolyPair<S>, axis: Axis) -> f64 {
    let top = pair.axis_degree(axis) as i32;
    let p = pair.p().slice(axis, top);
    let q = pair.q().slice(axis, top);
    let mut inner = num_complex::Complex64::new(0.0, 0.0);
    let mut total = 0.0;
    for k in p.joint_support(&q) {
        let (x, y) = (p.coeff(k).to_c64(), q.coeff(k).to_c64());
        inner += x.conj() * y;
        total += x.norm_sqr() + y.norm_sqr();
    }
    if total == 0.0 {
        0.0
    } else {
        1.0 - 2.0 * inner.norm() / total
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForcedZeroError {
    #[error("need 1 <= m <= n-1 so that both variables appear (got n = {n}, m = {m})")]
    InvalidRange { n: u32, m: u32 },
}

/// One deduction: at lag `lag` the only surviving product in the unitarity
/// identity is `X_x · conj(X_{-x})`, and inversion parity turns it into
/// `sign · |X_x|² = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcedZeroStep {
    pub lag: Exponent,
    pub poly: Which,
    /// The coefficient pair `x` and `-x` concluded to vanish.
    pub zeroed: [Exponent; 2],
    /// `(-1)^n` for `P`, `(-1)^(n-1)` for `Q`.
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcedZeroTrace {
    pub n: u32,
    pub m: u32,
    /// Slots the original sign and inversion parities force to zero outright.
    pub parity_excluded: Vec<(Which, Exponent)>,
    pub steps: Vec<ForcedZeroStep>,
    pub final_zeroed: BTreeSet<(Which, Exponent)>,
}

impl ForcedZeroTrace {
    /// Slots in the `(m, n-m)` box, for either entry, that were not zeroed.
    pub fn survivors(&self) -> Vec<(Which, Exponent)> {
        let (da, db) = (self.m as i32, (self.n - self.m) as i32);
        let mut out = Vec::new();
        for which in [Which::P, Which::Q] {
            for j in -da..=da {
                for k in -db..=db {
                    if !self.final_zeroed.contains(&(which, (j, k))) {
                        out.push((which, (j, k)));
                    }
                }
            }
        }
        out
    }

    /// Only the constant term may survive.
    pub fn only_constant_survives(&self) -> bool {
        self.survivors().iter().all(|(_, e)| *e == (0, 0))
    }
}

/// Replay the deduction showing the original parity conditions force every
/// non-constant coefficient to vanish.
///
/// The argument is symbolic: it holds for every coefficient assignment that
/// satisfies the original (i)–(iv). Slots excluded by the original sign
/// parities are removed first. Lags are then visited from `(2m, 2(n-m))`
/// downward, `l_a` outer and `l_b` inner. Whenever exactly one product
/// `X_x · conj(X_{x-l})` with both factors alive remains and `x - l = -x`,
/// the inversion parity `X_{-x} = ±X_x` turns the lag identity into
/// `±|X_x|² = 0`. Passes repeat until nothing changes.
pub fn forced_zero_trace(n: u32, m: u32) -> Result<ForcedZeroTrace, ForcedZeroError> {
    if m < 1 || m >= n {
        return Err(ForcedZeroError::InvalidRange { n, m });
    }
    let (da, db) = (m as i32, (n - m) as i32);
    let (ni, mi) = (i64::from(n), i64::from(m));
    let parity_ok = |which: Which, (j, k): Exponent| {
        let (pa, pb) = match which {
            Which::P => (mi, mi - ni),
            Which::Q => (mi - 1, ni - mi - 1),
        };
        (i64::from(j) - pa).rem_euclid(2) == 0 && (i64::from(k) - pb).rem_euclid(2) == 0
    };
    let inversion_sign = |which: Which| -> i8 {
        let e = match which {
            Which::P => ni,
            Which::Q => ni - 1,
        };
        if e.rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    };

    let mut alive: BTreeSet<(Which, Exponent)> = BTreeSet::new();
    let mut parity_excluded = Vec::new();
    for which in [Which::P, Which::Q] {
        for j in -da..=da {
            for k in -db..=db {
                // the constant term is its own inversion image: X_00 = ±X_00
                let self_odd = (j, k) == (0, 0) && inversion_sign(which) < 0;
                if parity_ok(which, (j, k)) && !self_odd {
                    alive.insert((which, (j, k)));
                } else {
                    parity_excluded.push((which, (j, k)));
                }
            }
        }
    }

    let mut steps = Vec::new();
    loop {
        let before = steps.len();
        for la in (0..=2 * da).rev() {
            for lb in (-2 * db..=2 * db).rev() {
                // lag -l is the conjugate identity of lag l
                if la == 0 && lb <= 0 {
                    continue;
                }
                let products: Vec<(Which, Exponent)> = alive
                    .iter()
                    .filter(|(w, (j, k))| alive.contains(&(*w, (j - la, k - lb))))
                    .copied()
                    .collect();
                let [(which, x)] = products[..] else {
                    continue;
                };
                let partner = (x.0 - la, x.1 - lb);
                if partner != (-x.0, -x.1) {
                    continue;
                }
                alive.remove(&(which, x));
                alive.remove(&(which, partner));
                steps.push(ForcedZeroStep {
                    lag: (la, lb),
                    poly: which,
                    zeroed: [x, partner],
                    sign: inversion_sign(which),
                });
            }
        }
        if steps.len() == before {
            break;
        }
    }

    let mut final_zeroed: BTreeSet<(Which, Exponent)> = parity_excluded.iter().copied().collect();
    for s in &steps {
        for e in s.zeroed {
            final_zeroed.insert((s.poly, e));
        }
    }
    Ok(ForcedZeroTrace {
        n,
        m,
        parity_excluded,
        steps,
        final_zeroed,
    })
}
