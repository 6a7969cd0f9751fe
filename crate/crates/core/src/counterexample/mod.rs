//! Search for pairs that pass conditions (i)–(iv) but fail (v′).
//!
//! Such a pair cannot come from any protocol. Extending it by one `A` step
//! produces a pair that passes every revised condition, and yet peeling the
//! `A` back off (the only axis whose tops are related) returns the original
//! non-realizable pair up to sign. [`insufficiency_pipeline`] runs that
//! argument end to end.
//!
//! The search parametrizes only the coefficients the symmetry conditions
//! leave free: the sign parities keep the slots with `j ≡ m` and
//! `k ≡ n - m (mod 2)`, and the inversion parity ties `X(-x)` to `±X(x)`, so
//! one complex parameter per orbit `{x, -x}` remains (and `Q(0,0) = 0`). The
//! unitarity identity `P·P* + Q·Q* = 1` is then a system of real quadratic
//! equations in those parameters, solved by damped least squares from
//! random starts.

pub mod solver;

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conditions::{
    check_conditions, top_misalignment, top_proportionality, ConditionReport, TopRelation, Variant,
    Which,
};
use crate::decompose::{decompose, BranchOutcome, DecomposeError, Root, SearchNode};
use crate::laurent::{Axis, BiLaurent, Exponent};
use crate::protocol::{PolyPair, Protocol, UnitPhase};
use crate::scalar::{Coeff, Float};
use solver::{minimize, LmOptions};

/// Weight of the top-slice misalignment hinge relative to unitarity rows.
pub const PENALTY_WEIGHT: f64 = 1e-2;

/// Misalignment the hinge pushes each axis toward, as a multiple of the
/// acceptance margin.
pub const HINGE_TARGET_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchSpec {
    pub n: u32,
    pub m: u32,
    pub seed: u64,
    /// Maximum number of random restarts.
    pub budget: usize,
    /// Acceptance threshold on the Euclidean norm of the unitarity residual.
    pub residual_tol: f64,
    /// Required top-slice misalignment on both axes.
    pub violation_margin: f64,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec {
            n: 4,
            m: 2,
            seed: 0,
            budget: 200,
            residual_tol: 1e-10,
            violation_margin: 1e-3,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CounterexampleError {
    #[error("condition (v') is vacuous for n = {n}, m = {m}; need 1 <= m <= n-1")]
    InvalidSpec { n: u32, m: u32 },
    #[error("no acceptable pair found in {attempts} restarts")]
    NotFound { attempts: usize },
}

#[derive(Clone, Copy, Debug)]
struct Slot {
    which: Which,
    exponent: Exponent,
    /// Index of the real part; the imaginary part follows.
    param: usize,
    sign: f64,
}

/// The free parameters of a symmetric pair with declared degrees `(n, m)`.
#[derive(Clone, Debug)]
pub struct SymmetricLayout {
    n: u32,
    m: u32,
    slots: Vec<Slot>,
    index: HashMap<(Which, Exponent), usize>,
    /// Lag `(0,0)` first, then every lag in the open upper half-plane.
    lags: Vec<Exponent>,
    n_params: usize,
}

impl SymmetricLayout {
    pub fn new(n: u32, m: u32) -> Self {
        let (da, db) = (m as i32, (n - m) as i32);
        let mut slots = Vec::new();
        let mut n_params = 0;
        for which in [Which::P, Which::Q] {
            // representatives first so that mirror slots can find them
            let mut reps: HashMap<Exponent, usize> = HashMap::new();
            for j in (-da..=da).rev().filter(|j| (j - da).rem_euclid(2) == 0) {
                for k in (-db..=db).rev().filter(|k| (k - db).rem_euclid(2) == 0) {
                    let x = (j, k);
                    if which == Which::Q && x == (0, 0) {
                        continue;
                    }
                    let (param, sign) = match reps.get(&(-j, -k)) {
                        Some(&p) if which == Which::Q => (p, -1.0),
                        Some(&p) => (p, 1.0),
                        None => {
                            let p = n_params;
                            n_params += 2;
                            reps.insert(x, p);
                            (p, 1.0)
                        }
                    };
                    slots.push(Slot {
                        which,
                        exponent: x,
                        param,
                        sign,
                    });
                }
            }
        }
        let index = slots
            .iter()
            .enumerate()
            .map(|(i, s)| ((s.which, s.exponent), i))
            .collect();
        let mut lags = vec![(0, 0)];
        for la in 0..=2 * da {
            for lb in -2 * db..=2 * db {
                if la > 0 || lb > 0 {
                    lags.push((la, lb));
                }
            }
        }
        SymmetricLayout {
            n,
            m,
            slots,
            index,
            lags,
            n_params,
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Rows of the unitarity residual: one for lag zero, two per other lag.
    pub fn n_unitarity_rows(&self) -> usize {
        2 * self.lags.len() - 1
    }

    fn coeffs(&self, theta: &[f64]) -> Vec<Complex64> {
        self.slots
            .iter()
            .map(|s| s.sign * Complex64::new(theta[s.param], theta[s.param + 1]))
            .collect()
    }

    fn coeff_at(&self, c: &[Complex64], which: Which, x: Exponent) -> Complex64 {
        self.index
            .get(&(which, x))
            .map_or(Complex64::new(0.0, 0.0), |&i| c[i])
    }

    /// The pair these parameters describe.
    pub fn pair(&self, theta: &[f64]) -> PolyPair<Float> {
        let c = self.coeffs(theta);
        let poly = |which| {
            BiLaurent::from_terms(
                self.slots
                    .iter()
                    .zip(&c)
                    .filter(|(s, _)| s.which == which)
                    .map(|(s, v)| (s.exponent, *v)),
            )
        };
        PolyPair::new(poly(Which::P), poly(Which::Q), self.n, self.m).expect("m <= n")
    }

    /// Parameters reproducing `pair`, if it fits the symmetric layout.
    pub fn params_from_pair(&self, pair: &PolyPair<Float>, tol: f64) -> Option<Vec<f64>> {
        let mut theta = vec![0.0; self.n_params];
        for s in &self.slots {
            if s.sign > 0.0 {
                let v = match s.which {
                    Which::P => pair.p().coeff(s.exponent),
                    Which::Q => pair.q().coeff(s.exponent),
                };
                theta[s.param] = v.re;
                theta[s.param + 1] = v.im;
            }
        }
        self.pair(&theta).approx_eq(pair, tol).then_some(theta)
    }

    /// Unitarity residual: `Re` of the lag-zero identity minus one, then
    /// `Re` and `Im` of every other lag in the upper half-plane.
    pub fn unitarity_residual(&self, theta: &[f64]) -> Vec<f64> {
        let c = self.coeffs(theta);
        let mut out = Vec::with_capacity(self.n_unitarity_rows());
        for (li, &(la, lb)) in self.lags.iter().enumerate() {
            let mut sum = Complex64::new(0.0, 0.0);
            for (s, v) in self.slots.iter().zip(&c) {
                let partner = (s.exponent.0 - la, s.exponent.1 - lb);
                sum += v * self.coeff_at(&c, s.which, partner).conj();
            }
            if li == 0 {
                out.push(sum.re - 1.0);
            } else {
                out.push(sum.re);
                out.push(sum.im);
            }
        }
        out
    }

    /// Analytic Jacobian of [`SymmetricLayout::unitarity_residual`].
    pub fn unitarity_jacobian(&self, theta: &[f64]) -> DMatrix<f64> {
        let c = self.coeffs(theta);
        let mut jac = DMatrix::zeros(self.n_unitarity_rows(), self.n_params);
        let mut row = 0;
        for (li, &(la, lb)) in self.lags.iter().enumerate() {
            // d/dθ of Σ_x X_x conj(X_{x-l}); a slot's coefficient is
            // sign·(θ_re + iθ_im), so its derivatives are sign and i·sign.
            let mut grad = vec![Complex64::new(0.0, 0.0); self.n_params];
            for s in &self.slots {
                let back = self.coeff_at(&c, s.which, (s.exponent.0 - la, s.exponent.1 - lb));
                let fwd = self.coeff_at(&c, s.which, (s.exponent.0 + la, s.exponent.1 + lb));
                for (offset, d) in [
                    (0, Complex64::new(s.sign, 0.0)),
                    (1, Complex64::new(0.0, s.sign)),
                ] {
                    grad[s.param + offset] += d * back.conj() + fwd * d.conj();
                }
            }
            for (t, g) in grad.iter().enumerate() {
                jac[(row, t)] = g.re;
                if li > 0 {
                    jac[(row + 1, t)] = g.im;
                }
            }
            row += if li == 0 { 1 } else { 2 };
        }
        jac
    }

    fn top_slots(&self, axis: Axis) -> (Vec<usize>, Vec<usize>) {
        let top = match axis {
            Axis::A => self.m as i32,
            Axis::B => (self.n - self.m) as i32,
        };
        let pick = |which| {
            self.slots
                .iter()
                .enumerate()
                .filter(|(_, s)| s.which == which && axis.component(s.exponent) == top)
                .map(|(i, _)| i)
                .collect::<Vec<_>>()
        };
        (pick(Which::P), pick(Which::Q))
    }

    /// Misalignment of the top slices on `axis` (see
    /// [`crate::conditions::top_misalignment`]) and its gradient.
    pub fn misalignment_with_grad(&self, theta: &[f64], axis: Axis) -> (f64, Vec<f64>) {
        let c = self.coeffs(theta);
        let (p_slots, q_slots) = self.top_slots(axis);
        // pair P and Q slots by exponent along the other axis
        let mut pairs: Vec<(Option<usize>, Option<usize>)> = Vec::new();
        for &i in &p_slots {
            let k = axis.other().component(self.slots[i].exponent);
            let qi = q_slots
                .iter()
                .copied()
                .find(|&qi| axis.other().component(self.slots[qi].exponent) == k);
            pairs.push((Some(i), qi));
        }
        for &qi in &q_slots {
            if !pairs.iter().any(|(_, q)| *q == Some(qi)) {
                pairs.push((None, Some(qi)));
            }
        }
        let val = |i: Option<usize>| i.map_or(Complex64::new(0.0, 0.0), |i| c[i]);
        let mut g = Complex64::new(0.0, 0.0);
        let mut total = 0.0;
        for &(pi, qi) in &pairs {
            g += val(pi).conj() * val(qi);
            total += val(pi).norm_sqr() + val(qi).norm_sqr();
        }
        let mut grad = vec![0.0; self.n_params];
        if total == 0.0 {
            return (0.0, grad);
        }
        let gabs = g.norm();
        let v = 1.0 - 2.0 * gabs / total;
        for (t, slot) in grad.iter_mut().enumerate() {
            let mut dg = Complex64::new(0.0, 0.0);
            let mut ds = 0.0;
            for &(pi, qi) in &pairs {
                let dp = pi.map_or(Complex64::new(0.0, 0.0), |i| self.slot_derivative(i, t));
                let dq = qi.map_or(Complex64::new(0.0, 0.0), |i| self.slot_derivative(i, t));
                dg += dp.conj() * val(qi) + val(pi).conj() * dq;
                ds += 2.0 * (val(pi).conj() * dp).re + 2.0 * (val(qi).conj() * dq).re;
            }
            let dgabs = if gabs > 0.0 {
                (g.conj() * dg).re / gabs
            } else {
                0.0
            };
            *slot = -2.0 * (dgabs * total - gabs * ds) / (total * total);
        }
        (v, grad)
    }

    fn slot_derivative(&self, slot: usize, t: usize) -> Complex64 {
        let s = &self.slots[slot];
        if t == s.param {
            Complex64::new(s.sign, 0.0)
        } else if t == s.param + 1 {
            Complex64::new(0.0, s.sign)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Full search residual: unitarity rows followed by one hinge row per
    /// axis, `w·max(0, target - misalignment)`.
    pub fn search_residual(&self, theta: &[f64], target: f64) -> Vec<f64> {
        let mut r = self.unitarity_residual(theta);
        for axis in [Axis::A, Axis::B] {
            let (v, _) = self.misalignment_with_grad(theta, axis);
            r.push(PENALTY_WEIGHT * (target - v).max(0.0));
        }
        r
    }

    /// Analytic Jacobian of [`SymmetricLayout::search_residual`].
    pub fn search_jacobian(&self, theta: &[f64], target: f64) -> DMatrix<f64> {
        let unit = self.unitarity_jacobian(theta);
        let rows = unit.nrows();
        let mut jac = DMatrix::zeros(rows + 2, self.n_params);
        jac.rows_mut(0, rows).copy_from(&unit);
        for (i, axis) in [Axis::A, Axis::B].into_iter().enumerate() {
            let (v, grad) = self.misalignment_with_grad(theta, axis);
            if target - v > 0.0 {
                for (t, g) in grad.iter().enumerate() {
                    jac[(rows + i, t)] = -PENALTY_WEIGHT * g;
                }
            }
        }
        jac
    }

    /// Uniform draw in `[-1, 1]`, rescaled so that `Σ|X_x|² = 1`.
    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut theta: Vec<f64> = (0..self.n_params)
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect();
        let norm: f64 = self
            .coeffs(&theta)
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm > 0.0 {
            theta.iter_mut().for_each(|x| *x /= norm);
        }
        theta
    }
}

/// An accepted search result.
#[derive(Clone, Debug, PartialEq)]
pub struct Found {
    pub pair: PolyPair<Float>,
    pub params: Vec<f64>,
    /// Index of the successful restart.
    pub restart: usize,
    pub residual_norm: f64,
    /// Top-slice misalignment on axes `A` and `B`.
    pub misalignment: [f64; 2],
    /// Smallest modulus among the coefficients the layout leaves free.
    pub min_coeff: f64,
}

/// Random-restart least-squares search for a pair with unitary coefficients
/// whose top slices are misaligned on both axes.
///
/// Restarts run in index order with a per-restart RNG stream, so the same
/// `SearchSpec` always yields the same pair.
pub fn search_nonrealizable(spec: &SearchSpec) -> Result<Found, CounterexampleError> {
    if spec.m < 1 || spec.m >= spec.n {
        return Err(CounterexampleError::InvalidSpec {
            n: spec.n,
            m: spec.m,
        });
    }
    let layout = SymmetricLayout::new(spec.n, spec.m);
    let target = HINGE_TARGET_FACTOR * spec.violation_margin;
    let penalized = LmOptions {
        max_iterations: 300,
        residual_target: 0.0,
        ..LmOptions::default()
    };
    let polish = LmOptions {
        max_iterations: 200,
        residual_target: 1e-15,
        ..LmOptions::default()
    };

    for restart in 0..spec.budget {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(restart as u64);
        let start = DVector::from_vec(layout.random_start(&mut rng));

        let stage1 = minimize(
            |x| {
                let r = DVector::from_vec(layout.search_residual(x.as_slice(), target));
                (r, layout.search_jacobian(x.as_slice(), target))
            },
            start,
            &penalized,
        );
        let stage2 = minimize(
            |x| {
                let r = DVector::from_vec(layout.unitarity_residual(x.as_slice()));
                (r, layout.unitarity_jacobian(x.as_slice()))
            },
            stage1.x,
            &polish,
        );

        let params = stage2.x.as_slice().to_vec();
        let residual_norm = DVector::from_vec(layout.unitarity_residual(&params)).norm();
        let pair = layout.pair(&params);
        let misalignment = [
            top_misalignment(&pair, Axis::A),
            top_misalignment(&pair, Axis::B),
        ];
        if residual_norm < spec.residual_tol
            && misalignment.iter().all(|&v| v > spec.violation_margin)
        {
            let min_coeff = layout
                .coeffs(&params)
                .iter()
                .map(|c| c.norm())
                .fold(f64::INFINITY, f64::min);
            return Ok(Found {
                pair,
                params,
                restart,
                residual_norm,
                misalignment,
                min_coeff,
            });
        }
    }
    Err(CounterexampleError::NotFound {
        attempts: spec.budget,
    })
}

/// Extend `base` by one `A` step with `phase`.
pub fn lift<S: Coeff>(base: &PolyPair<S>, phase: &UnitPhase<S>) -> PolyPair<S> {
    base.step_extend(Axis::A, phase)
}

#[derive(Clone, Debug, PartialEq)]
pub enum LiftedOutcome {
    NotDecomposable(SearchNode<Float>),
    Decomposed(Protocol<Float>),
    /// The lifted pair already fails the revised conditions.
    PrecondViolated,
}

/// What the pipeline established, each item re-derived from stored pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Findings {
    /// Base passes (i)–(iv) and fails (v′).
    pub base_violates_only_top: bool,
    /// Lifted pair passes (i)–(v′).
    pub lifted_passes_all: bool,
    /// Axes whose top slices admit a peel at the lifted pair's top level.
    pub top_peelable_axes: Vec<Axis>,
    /// The canonical and π-shifted roots peel back to `base` and `-base` in
    /// some order.
    pub roots_peel_to_base: bool,
    /// Both roots' peeled pairs have no peelable axis.
    pub base_dead_end: bool,
    pub is_counterexample: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InsufficiencyReport {
    pub base_pair: PolyPair<Float>,
    pub base_report: ConditionReport<Float>,
    pub lift_phase: UnitPhase<Float>,
    pub lifted_pair: PolyPair<Float>,
    pub lifted_report: ConditionReport<Float>,
    pub outcome: LiftedOutcome,
    pub findings: Findings,
    pub search: Option<Found>,
}

/// Lift `base`, re-check both pairs, and try to decompose the lift.
pub fn insufficiency_from_base(
    base: &PolyPair<Float>,
    lift_phase: &UnitPhase<Float>,
    tol: f64,
) -> InsufficiencyReport {
    let base_report = check_conditions(base, Variant::Revised, tol);
    let lifted = lift(base, lift_phase);
    let lifted_report = check_conditions(&lifted, Variant::Revised, tol);
    let outcome = match decompose(&lifted, tol) {
        Ok(d) => LiftedOutcome::Decomposed(d.protocol),
        Err(DecomposeError::NotDecomposable { trace })
        | Err(DecomposeError::IrrationalPhase { trace }) => LiftedOutcome::NotDecomposable(trace),
        Err(DecomposeError::PrecondViolated { .. }) => LiftedOutcome::PrecondViolated,
    };

    let base_violates_only_top = base_report.first_four() && base_report.v.is_fail();
    let lifted_passes_all = lifted_report.overall();
    let (top_peelable_axes, roots_peel_to_base, base_dead_end) = match &outcome {
        LiftedOutcome::NotDecomposable(trace) => analyze_trace(trace, base, tol),
        _ => (Vec::new(), false, false),
    };
    let is_counterexample = base_violates_only_top
        && lifted_passes_all
        && matches!(outcome, LiftedOutcome::NotDecomposable(_))
        && top_peelable_axes == [Axis::A]
        && roots_peel_to_base
        && base_dead_end;

    InsufficiencyReport {
        base_pair: base.clone(),
        base_report,
        lift_phase: lift_phase.clone(),
        lifted_pair: lifted,
        lifted_report,
        outcome,
        findings: Findings {
            base_violates_only_top,
            lifted_passes_all,
            top_peelable_axes,
            roots_peel_to_base,
            base_dead_end,
            is_counterexample,
        },
        search: None,
    }
}

fn analyze_trace(
    trace: &SearchNode<Float>,
    base: &PolyPair<Float>,
    tol: f64,
) -> (Vec<Axis>, bool, bool) {
    let axes = trace.peelable_axes();
    let Some(probe) = trace.probes().iter().find(|p| p.axis == Axis::A) else {
        return (axes, false, false);
    };
    let peeled = |root| {
        probe
            .branches
            .iter()
            .find(|b| b.root == root)
            .and_then(|b| b.peeled.as_ref())
    };
    let negated = base.negated();
    let roots = match (peeled(Root::Canonical), peeled(Root::ShiftedByPi)) {
        (Some(x), Some(y)) => {
            (x.approx_eq(base, tol) && y.approx_eq(&negated, tol))
                || (x.approx_eq(&negated, tol) && y.approx_eq(base, tol))
        }
        _ => false,
    };
    // the explored child must be stuck, and the unexplored root's pair must
    // be stuck as well when probed directly
    let stuck = |pair: &PolyPair<Float>| {
        [Axis::A, Axis::B].into_iter().all(|axis| {
            matches!(
                top_proportionality(pair, axis, tol),
                TopRelation::NotProportional(_)
            )
        })
    };
    let dead_end = probe.branches.len() == 2
        && probe
            .branches
            .iter()
            .all(|b| match (&b.outcome, &b.peeled) {
                (BranchOutcome::Explored(child), Some(pair)) => {
                    !child.succeeded && child.peelable_axes().is_empty() && stuck(pair)
                }
                (BranchOutcome::SignEquivalent, Some(pair)) => stuck(pair),
                _ => false,
            });
    (axes, roots, dead_end)
}

/// Search for a base pair per `spec`, then run [`insufficiency_from_base`].
pub fn insufficiency_pipeline(
    spec: &SearchSpec,
    lift_phase: &UnitPhase<Float>,
    tol: f64,
) -> Result<InsufficiencyReport, CounterexampleError> {
    let found = search_nonrealizable(spec)?;
    let mut report = insufficiency_from_base(&found.pair, lift_phase, tol);
    report.search = Some(found);
    Ok(report)
}
