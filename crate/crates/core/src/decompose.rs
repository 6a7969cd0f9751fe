//! Recover a protocol from a pair by peeling signal operators off the right.
//!
//! At each level the search asks, per axis, whether the top slices of `P`
//! and `Q` satisfy `P_top = c·Q_top` with `|c| = 1`. If so, the last operator
//! may be that axis' signal with a phase `φ` where `e^{2iφ} = c`; the pair is
//! peeled with the root in `(-π/2, π/2]` and the search recurses. The other
//! root `φ + π` peels to the negated pair, which is realizable exactly when
//! the canonical one is (the sign moves into `φ₀`), so it is recorded in the
//! trace but not searched. At `n = 0` the pair must be `(e^{iφ₀}, 0)`.
//!
//! Axis `A` is tried before `B`; when both qualify, both are searched.

use thiserror::Error;

use crate::conditions::{
    check_conditions, top_proportionality, ConditionReport, TopRelation, TopWitness, Variant,
};
use crate::laurent::Axis;
use crate::protocol::{build, PolyPair, Protocol, ProtocolError, UnitPhase, UNIT_TOL};
use crate::scalar::Coeff;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Root {
    /// `φ ∈ (-π/2, π/2]`.
    Canonical,
    /// `φ + π`.
    ShiftedByPi,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProbeStatus<S> {
    /// The pair has declared degree zero on this axis.
    NoDegree,
    Proportional(UnitPhase<S>),
    /// Both top slices vanish; any phase cancels them, `φ = 0` is used.
    BothSidesZero,
    NotProportional(TopWitness<S>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BranchOutcome<S> {
    Explored(Box<SearchNode<S>>),
    PeelFailed(ProtocolError),
    /// Same realizability as the canonical branch up to a global sign.
    SignEquivalent,
    /// An earlier branch already succeeded.
    NotVisited,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch<S> {
    pub phase: UnitPhase<S>,
    pub root: Root,
    pub peeled: Option<PolyPair<S>>,
    pub outcome: BranchOutcome<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxisProbe<S> {
    pub axis: Axis,
    pub status: ProbeStatus<S>,
    /// The top-slice ratio has no square root in this backend.
    pub irrational_root: bool,
    pub branches: Vec<Branch<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind<S> {
    /// `n = 0`: realized with the given `e^{iφ₀}`, or not a unit constant.
    Base(Option<UnitPhase<S>>),
    Branching(Vec<AxisProbe<S>>),
}

/// One level of the search tree.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchNode<S> {
    pub n: u32,
    pub m: u32,
    pub kind: NodeKind<S>,
    pub succeeded: bool,
}

impl<S: Coeff> SearchNode<S> {
    /// Probes at this level, empty for a base node.
    pub fn probes(&self) -> &[AxisProbe<S>] {
        match &self.kind {
            NodeKind::Branching(p) => p,
            NodeKind::Base(_) => &[],
        }
    }

    /// Axes whose top slices admit a peel at this level.
    pub fn peelable_axes(&self) -> Vec<Axis> {
        self.probes()
            .iter()
            .filter(|p| {
                matches!(
                    p.status,
                    ProbeStatus::Proportional(_) | ProbeStatus::BothSidesZero
                )
            })
            .map(|p| p.axis)
            .collect()
    }

    /// Any probe in the tree hit an exact ratio without a rational root.
    pub fn hit_irrational_root(&self) -> bool {
        self.probes().iter().any(|p| {
            p.irrational_root
                || p.branches.iter().any(|b| match &b.outcome {
                    BranchOutcome::Explored(child) => child.hit_irrational_root(),
                    _ => false,
                })
        })
    }

    /// Number of explored nodes, this one included.
    pub fn size(&self) -> usize {
        1 + self
            .probes()
            .iter()
            .flat_map(|p| &p.branches)
            .map(|b| match &b.outcome {
                BranchOutcome::Explored(child) => child.size(),
                _ => 0,
            })
            .sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition<S> {
    pub protocol: Protocol<S>,
    pub trace: SearchNode<S>,
}

#[derive(Debug, Error)]
pub enum DecomposeError<S: Coeff> {
    #[error("no protocol reproduces the pair; every branch dead-ends")]
    NotDecomposable { trace: SearchNode<S> },
    #[error("the pair fails the revised necessary conditions")]
    PrecondViolated { report: Box<ConditionReport<S>> },
    #[error("search needs a phase whose square root is irrational; retry in float mode")]
    IrrationalPhase { trace: SearchNode<S> },
}

/// Search for a protocol whose [`build`] equals `pair`.
///
/// `tol` is the absolute coefficient tolerance for float pairs.
pub fn decompose<S: Coeff>(
    pair: &PolyPair<S>,
    tol: f64,
) -> Result<Decomposition<S>, DecomposeError<S>> {
    let report = check_conditions(pair, Variant::Revised, tol);
    if !report.overall() {
        return Err(DecomposeError::PrecondViolated {
            report: Box::new(report),
        });
    }
    let mut steps = Vec::new();
    let mut phase0 = None;
    let trace = search(pair, tol, &mut steps, &mut phase0);
    match phase0 {
        Some(p0) => {
            let (s, mut phases): (Vec<Axis>, Vec<UnitPhase<S>>) = steps.into_iter().rev().unzip();
            phases.insert(0, p0);
            let protocol = Protocol::new(s, phases).expect("one phase per step plus phi_0");
            Ok(Decomposition { protocol, trace })
        }
        None if trace.hit_irrational_root() => Err(DecomposeError::IrrationalPhase { trace }),
        None => Err(DecomposeError::NotDecomposable { trace }),
    }
}

/// Depth-first search. On success `steps` holds `(axis, phase)` from the
/// outermost peel inward and `phase0` is set.
fn search<S: Coeff>(
    pair: &PolyPair<S>,
    tol: f64,
    steps: &mut Vec<(Axis, UnitPhase<S>)>,
    phase0: &mut Option<UnitPhase<S>>,
) -> SearchNode<S> {
    let (n, m) = (pair.n(), pair.m());
    if n == 0 {
        let base = base_phase(pair, tol);
        let succeeded = base.is_some();
        if succeeded {
            *phase0 = base.clone();
        }
        return SearchNode {
            n,
            m,
            kind: NodeKind::Base(base),
            succeeded,
        };
    }

    let mut succeeded = false;
    let mut probes = Vec::new();
    for axis in [Axis::A, Axis::B] {
        if pair.axis_degree(axis) == 0 {
            probes.push(AxisProbe {
                axis,
                status: ProbeStatus::NoDegree,
                irrational_root: false,
                branches: Vec::new(),
            });
            continue;
        }
        let (status, root) = match top_proportionality(pair, axis, tol) {
            TopRelation::Proportional(c) => {
                let root = c.sqrt();
                (ProbeStatus::Proportional(c), root)
            }
            TopRelation::BothSidesZero => (ProbeStatus::BothSidesZero, Some(UnitPhase::one())),
            TopRelation::NotProportional(w) => (ProbeStatus::NotProportional(w), None),
        };
        let irrational_root = matches!(status, ProbeStatus::Proportional(_)) && root.is_none();
        let mut branches = Vec::new();
        if let Some(phase) = root {
            let shifted = phase.shifted_by_pi();
            for (root_kind, phase) in [(Root::Canonical, phase), (Root::ShiftedByPi, shifted)] {
                let peeled = pair.step_peel(axis, &phase);
                let (peeled, outcome) = match peeled {
                    Err(e) => (None, BranchOutcome::PeelFailed(e)),
                    Ok(_) if succeeded => (None, BranchOutcome::NotVisited),
                    Ok(p) if root_kind == Root::ShiftedByPi => {
                        (Some(p), BranchOutcome::SignEquivalent)
                    }
                    Ok(p) => {
                        steps.push((axis, phase.clone()));
                        let child = search(&p, tol, steps, phase0);
                        if child.succeeded {
                            succeeded = true;
                        } else {
                            steps.pop();
                        }
                        (Some(p), BranchOutcome::Explored(Box::new(child)))
                    }
                };
                branches.push(Branch {
                    phase,
                    root: root_kind,
                    peeled,
                    outcome,
                });
            }
        }
        probes.push(AxisProbe {
            axis,
            status,
            irrational_root,
            branches,
        });
    }
    SearchNode {
        n,
        m,
        kind: NodeKind::Branching(probes),
        succeeded,
    }
}

/// `e^{iφ₀}` if the pair is `(e^{iφ₀}, 0)`.
fn base_phase<S: Coeff>(pair: &PolyPair<S>, tol: f64) -> Option<UnitPhase<S>> {
    if pair.q().terms().any(|(_, c)| !c.is_negligible(tol)) {
        return None;
    }
    if pair
        .p()
        .terms()
        .any(|(e, c)| e != (0, 0) && !c.is_negligible(tol))
    {
        return None;
    }
    let c = pair.p().coeff((0, 0));
    if !c.is_unit(tol.max(UNIT_TOL)) {
        return None;
    }
    UnitPhase::new(c.normalize_unit()).ok()
}

/// Result of building a protocol, decomposing the pair, and rebuilding.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrip<S> {
    pub recovered: Protocol<S>,
    /// Largest coefficient difference between the pair and its rebuild.
    pub max_deviation: f64,
    /// The rebuild equals the pair exactly.
    pub exact_match: bool,
    /// Number of peels on the successful path.
    pub depth: u32,
}

pub fn roundtrip_report<S: Coeff>(
    prot: &Protocol<S>,
    tol: f64,
) -> Result<RoundTrip<S>, DecomposeError<S>> {
    let pair = build(prot);
    let dec = decompose(&pair, tol)?;
    let rebuilt = build(&dec.protocol);
    Ok(RoundTrip {
        max_deviation: pair.max_coeff_diff(&rebuilt),
        exact_match: pair == rebuilt,
        depth: success_depth(&dec.trace),
        recovered: dec.protocol,
    })
}

/// Length of the successful path in a trace.
pub fn success_depth<S: Coeff>(node: &SearchNode<S>) -> u32 {
    node.probes()
        .iter()
        .flat_map(|p| &p.branches)
        .find_map(|b| match &b.outcome {
            BranchOutcome::Explored(child) if child.succeeded => Some(1 + success_depth(child)),
            _ => None,
        })
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::BiLaurent;
    use crate::scalar::{exact, Exact, Float};

    fn phase(re: &str, im: &str) -> UnitPhase<Exact> {
        UnitPhase::new(exact(re, im)).unwrap()
    }

    #[test]
    fn identity_decomposes_to_empty_protocol() {
        let dec = decompose(&PolyPair::<Exact>::identity(), 0.0).unwrap();
        assert_eq!(dec.protocol.n(), 0);
        assert_eq!(dec.protocol.phases()[0], UnitPhase::one());
    }

    #[test]
    fn recovers_a_small_protocol() {
        let prot = Protocol::new(
            vec![Axis::A, Axis::B, Axis::A],
            vec![
                phase("3/5", "4/5"),
                phase("-5/13", "12/13"),
                phase("0", "1"),
                phase("8/17", "-15/17"),
            ],
        )
        .unwrap();
        let rt = roundtrip_report(&prot, 0.0).unwrap();
        assert!(rt.exact_match);
        assert_eq!(rt.max_deviation, 0.0);
        assert_eq!(rt.depth, 3);
        assert_eq!(rt.recovered.s(), prot.s());
    }

    #[test]
    fn handles_overstated_degree() {
        // A · e^{iπ/2 σz} · A = iσz: degree drops to zero though m = 2
        let prot = Protocol::new(
            vec![Axis::A, Axis::A],
            vec![UnitPhase::one(), phase("0", "1"), UnitPhase::one()],
        )
        .unwrap();
        let pair = build(&prot);
        assert_eq!(pair.p(), &BiLaurent::constant(exact("0", "1")));
        let rt = roundtrip_report(&prot, 0.0).unwrap();
        assert!(rt.exact_match);
        assert_eq!(rt.recovered.m(), 2);
    }

    #[test]
    fn irrational_root_is_reported() {
        // φ₀ = φ₁ with e^{iφ} = (2+i)/√5 gives rational P, Q whose only
        // decomposition needs the irrational phase
        let c = exact("3/5", "4/5");
        let pair = PolyPair::new(
            BiLaurent::half_sum(Axis::A).scale(&c),
            BiLaurent::half_diff(Axis::A),
            1,
            1,
        )
        .unwrap();
        assert!(matches!(
            decompose(&pair, 0.0),
            Err(DecomposeError::IrrationalPhase { .. })
        ));
        let dec = decompose(&pair.to_float(), crate::DEFAULT_TOL).unwrap();
        let rebuilt = build(&dec.protocol);
        assert!(rebuilt.max_coeff_diff(&pair.to_float()) < 1e-14);
    }

    #[test]
    fn rejects_pairs_failing_preconditions() {
        let pair = PolyPair::new(
            BiLaurent::<Float>::half_sum(Axis::A),
            BiLaurent::zero(),
            1,
            1,
        )
        .unwrap();
        assert!(matches!(
            decompose(&pair, crate::DEFAULT_TOL),
            Err(DecomposeError::PrecondViolated { .. })
        ));
    }
}
