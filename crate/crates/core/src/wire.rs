//! JSON formats for polynomials, pairs, protocols and reports.
//!
//! Scalars travel as strings: exact parts as `"num/den"` in lowest terms
//! (integers without a denominator), float parts in shortest round-trip
//! decimal form. Polynomial entries are listed in `(j, k)` order.
//!
//! Parsing reports the location of the first bad field as a dotted path,
//! e.g. `p.entries[2].re`.

use std::collections::BTreeSet;
use std::fmt;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::conditions::{ConditionReport, ForcedZeroTrace, TopWitness, Verdict, Witness};
use crate::counterexample::{Found, InsufficiencyReport, LiftedOutcome};
use crate::decompose::{BranchOutcome, NodeKind, ProbeStatus, Root, SearchNode};
use crate::laurent::{AnyPoly, Axis, BiLaurent, Exponent};
use crate::protocol::{PolyPair, Protocol, UnitPhase};
use crate::scalar::{Backend, Coeff, Exact, Float};

/// A parse failure and where it happened.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireError {
    /// Dotted path to the offending field; empty for the document root.
    pub path: String,
    pub message: String,
}

impl WireError {
    fn at(path: impl Into<String>, message: impl fmt::Display) -> Self {
        WireError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for WireError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "at `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for WireError {}

fn from_str<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T, WireError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        WireError::at(path, e.into_inner())
    })
}

fn join(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_string()
    } else if field.starts_with('[') {
        format!("{prefix}{field}")
    } else {
        format!("{prefix}.{field}")
    }
}

// ---------------------------------------------------------------- documents

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    j: i32,
    k: i32,
    re: NumText,
    im: NumText,
}

/// A scalar part written either as a JSON string or a bare JSON number.
#[derive(Deserialize)]
#[serde(untagged)]
enum NumText {
    Text(String),
    Int(i64),
    Real(f64),
}

impl NumText {
    fn text(&self) -> String {
        match self {
            NumText::Text(s) => s.clone(),
            NumText::Int(i) => i.to_string(),
            NumText::Real(x) => x.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyDoc {
    backend: Backend,
    entries: Vec<EntryDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDoc {
    p: PolyDoc,
    q: PolyDoc,
    n: u32,
    m: u32,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum PhaseDoc {
    Exact { re: NumText, im: NumText },
    Angle { radians: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtocolDoc {
    s: Vec<u8>,
    phases: Vec<PhaseDoc>,
}

// ------------------------------------------------------------ runtime types

/// A pair whose backend was decided by its input.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyPair {
    Exact(PolyPair<Exact>),
    Float(PolyPair<Float>),
}

impl AnyPair {
    pub fn backend(&self) -> Backend {
        match self {
            AnyPair::Exact(_) => Backend::Exact,
            AnyPair::Float(_) => Backend::Float,
        }
    }

    pub fn to_float(&self) -> PolyPair<Float> {
        match self {
            AnyPair::Exact(p) => p.to_float(),
            AnyPair::Float(p) => p.clone(),
        }
    }
}

/// A protocol in either backend.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyProtocol {
    Exact(Protocol<Exact>),
    Float(Protocol<Float>),
}

// ----------------------------------------------------------------- parsing

fn poly_from_doc<S: Coeff>(doc: PolyDoc, path: &str) -> Result<BiLaurent<S>, WireError> {
    if doc.backend != S::BACKEND {
        return Err(WireError::at(
            join(path, "backend"),
            format!(
                "expected backend \"{}\", found \"{}\"",
                S::BACKEND,
                doc.backend
            ),
        ));
    }
    let mut seen = BTreeSet::new();
    let mut terms = Vec::with_capacity(doc.entries.len());
    for (i, e) in doc.entries.into_iter().enumerate() {
        let here = join(path, &format!("entries[{i}]"));
        if !seen.insert((e.j, e.k)) {
            return Err(WireError::at(
                here,
                format!("duplicate exponent (j, k) = ({}, {})", e.j, e.k),
            ));
        }
        let re =
            S::from_wire(&e.re.text(), "0").map_err(|err| WireError::at(join(&here, "re"), err))?;
        let im =
            S::from_wire("0", &e.im.text()).map_err(|err| WireError::at(join(&here, "im"), err))?;
        terms.push(((e.j, e.k), re.add(&im)));
    }
    Ok(BiLaurent::from_terms(terms))
}

fn check_box<S: Coeff>(pair: &PolyPair<S>) -> Result<(), WireError> {
    for (name, poly) in [("p", pair.p()), ("q", pair.q())] {
        if let Some(((j, k), _)) = poly.outside(&pair.declared_box()).next() {
            let i = poly.terms().position(|(e, _)| e == (j, k)).unwrap_or(0);
            return Err(WireError::at(
                format!("{name}.entries[{i}]"),
                format!(
                    "exponent ({j}, {k}) lies outside the declared box |j| <= {}, |k| <= {}",
                    pair.m(),
                    pair.n() - pair.m()
                ),
            ));
        }
    }
    Ok(())
}

fn pair_from_doc<S: Coeff>(doc: PairDoc) -> Result<PolyPair<S>, WireError> {
    let p = poly_from_doc::<S>(doc.p, "p")?;
    let q = poly_from_doc::<S>(doc.q, "q")?;
    PolyPair::new(p, q, doc.n, doc.m).map_err(|e| WireError::at("m", e))
}

/// Parse a pair document. Terms outside the declared box are kept; condition
/// (i) reports them.
pub fn parse_pair(text: &str) -> Result<AnyPair, WireError> {
    let doc: PairDoc = from_str(text)?;
    if doc.p.backend != doc.q.backend {
        return Err(WireError::at(
            "q.backend",
            format!(
                "\"{}\" does not match p.backend \"{}\"",
                doc.q.backend, doc.p.backend
            ),
        ));
    }
    Ok(match doc.p.backend {
        Backend::Exact => AnyPair::Exact(pair_from_doc(doc)?),
        Backend::Float => AnyPair::Float(pair_from_doc(doc)?),
    })
}

/// Parse a pair and require its terms to lie inside the declared box.
pub fn parse_pair_strict(text: &str) -> Result<AnyPair, WireError> {
    let pair = parse_pair(text)?;
    match &pair {
        AnyPair::Exact(p) => check_box(p)?,
        AnyPair::Float(p) => check_box(p)?,
    }
    Ok(pair)
}

/// Parse a single polynomial document.
pub fn parse_poly(text: &str) -> Result<AnyPoly, WireError> {
    let doc: PolyDoc = from_str(text)?;
    Ok(match doc.backend {
        Backend::Exact => AnyPoly::Exact(poly_from_doc(doc, "")?),
        Backend::Float => AnyPoly::Float(poly_from_doc(doc, "")?),
    })
}

fn axes_from_bits(bits: &[u8]) -> Result<Vec<Axis>, WireError> {
    bits.iter()
        .enumerate()
        .map(|(i, &b)| match b {
            1 => Ok(Axis::A),
            0 => Ok(Axis::B),
            _ => Err(WireError::at(
                format!("s[{i}]"),
                format!("signal bit must be 0 or 1, found {b}"),
            )),
        })
        .collect()
}

fn check_lengths(s: &[u8], phases: usize) -> Result<(), WireError> {
    if phases != s.len() + 1 {
        return Err(WireError::at(
            "phases",
            format!(
                "expected {} phases for {} signal bits, found {phases}",
                s.len() + 1,
                s.len()
            ),
        ));
    }
    Ok(())
}

/// Parse a protocol in the requested backend.
///
/// Exact mode accepts only `"exact"` phases; float mode accepts both kinds.
pub fn parse_protocol(text: &str, backend: Backend) -> Result<AnyProtocol, WireError> {
    let doc: ProtocolDoc = from_str(text)?;
    let s = axes_from_bits(&doc.s)?;
    check_lengths(&doc.s, doc.phases.len())?;
    match backend {
        Backend::Exact => {
            let mut phases = Vec::with_capacity(doc.phases.len());
            for (i, ph) in doc.phases.into_iter().enumerate() {
                let here = format!("phases[{i}]");
                let value = match ph {
                    PhaseDoc::Exact { re, im } => Exact::from_wire(&re.text(), &im.text())
                        .map_err(|e| WireError::at(&here, e))?,
                    PhaseDoc::Angle { .. } => {
                        return Err(WireError::at(
                            join(&here, "kind"),
                            "angle phases are not exact; use --mode float",
                        ))
                    }
                };
                phases.push(UnitPhase::new(value).map_err(|e| WireError::at(&here, e))?);
            }
            Ok(AnyProtocol::Exact(
                Protocol::new(s, phases).expect("lengths checked"),
            ))
        }
        Backend::Float => {
            let mut phases = Vec::with_capacity(doc.phases.len());
            for (i, ph) in doc.phases.into_iter().enumerate() {
                let here = format!("phases[{i}]");
                let phase = match ph {
                    PhaseDoc::Exact { re, im } => {
                        let x = Exact::from_wire(&re.text(), &im.text())
                            .map_err(|e| WireError::at(&here, e))?;
                        UnitPhase::new(x)
                            .map_err(|e| WireError::at(&here, e))?
                            .to_float()
                    }
                    PhaseDoc::Angle { radians } => {
                        if !radians.is_finite() {
                            return Err(WireError::at(
                                join(&here, "radians"),
                                "angle must be finite",
                            ));
                        }
                        UnitPhase::from_angle(radians)
                    }
                };
                phases.push(phase);
            }
            Ok(AnyProtocol::Float(
                Protocol::new(s, phases).expect("lengths checked"),
            ))
        }
    }
}

// --------------------------------------------------------------- rendering

fn scalar<S: Coeff>(c: &S) -> Value {
    let [re, im] = c.to_wire();
    json!({ "re": re, "im": im })
}

fn exponent(e: Exponent) -> Value {
    json!([e.0, e.1])
}

fn axis(a: Axis) -> Value {
    Value::String(a.to_string())
}

pub fn poly_to_json<S: Coeff>(p: &BiLaurent<S>) -> Value {
    let entries: Vec<Value> = p
        .terms()
        .map(|((j, k), c)| {
            let [re, im] = c.to_wire();
            json!({ "j": j, "k": k, "re": re, "im": im })
        })
        .collect();
    json!({ "backend": S::BACKEND, "entries": entries })
}

pub fn pair_to_json<S: Coeff>(pair: &PolyPair<S>) -> Value {
    json!({
        "p": poly_to_json(pair.p()),
        "q": poly_to_json(pair.q()),
        "n": pair.n(),
        "m": pair.m(),
    })
}

pub fn phase_to_json<S: Coeff>(phase: &UnitPhase<S>) -> Value {
    match S::BACKEND {
        Backend::Exact => {
            let [re, im] = phase.value().to_wire();
            json!({ "kind": "exact", "re": re, "im": im })
        }
        Backend::Float => json!({ "kind": "angle", "radians": phase.angle() }),
    }
}

pub fn protocol_to_json<S: Coeff>(prot: &Protocol<S>) -> Value {
    let s: Vec<u8> = prot.s().iter().map(|&a| u8::from(a == Axis::A)).collect();
    let phases: Vec<Value> = prot.phases().iter().map(phase_to_json).collect();
    json!({ "s": s, "phases": phases })
}

fn top_witness<S: Coeff>(w: &TopWitness<S>) -> Value {
    json!({
        "exponent": w.exponent,
        "p_coeff": scalar(&w.p_coeff),
        "q_coeff": scalar(&w.q_coeff),
        "kind": w.kind,
    })
}

fn witness<S: Coeff>(w: &Witness<S>) -> Value {
    match w {
        Witness::OutsideBox {
            poly,
            exponent: e,
            coeff,
        } => json!({
            "kind": "outside_box",
            "poly": poly,
            "exponent": exponent(*e),
            "coeff": scalar(coeff),
        }),
        Witness::Parity {
            poly,
            symmetry,
            expected,
            exponent: e,
            coeff,
            image_coeff,
        } => json!({
            "kind": "parity",
            "poly": poly,
            "symmetry": symmetry,
            "expected": expected,
            "exponent": exponent(*e),
            "coeff": scalar(coeff),
            "image_coeff": scalar(image_coeff),
        }),
        Witness::Unitarity { lag, residual } => json!({
            "kind": "unitarity",
            "lag": exponent(*lag),
            "residual": scalar(residual),
        }),
        Witness::TopSlices { axes } => json!({
            "kind": "top_slices",
            "axes": axes
                .iter()
                .map(|(a, w)| json!({ "axis": axis(*a), "mismatch": top_witness(w) }))
                .collect::<Vec<_>>(),
        }),
    }
}

fn verdict<S: Coeff>(v: &Verdict<S>) -> Value {
    match v {
        Verdict::Pass => json!({ "verdict": "pass", "witness": null }),
        Verdict::Vacuous => json!({ "verdict": "vacuous", "witness": null }),
        Verdict::Fail(w) => json!({ "verdict": "fail", "witness": witness(w) }),
    }
}

pub fn report_to_json<S: Coeff>(r: &ConditionReport<S>) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("variant".into(), json!(r.variant));
    for (key, v) in r.verdicts() {
        obj.insert(key.into(), verdict(v));
    }
    obj.insert(
        "overall".into(),
        json!(if r.overall() { "pass" } else { "fail" }),
    );
    Value::Object(obj)
}

pub fn forced_zero_to_json(t: &ForcedZeroTrace) -> Value {
    let slot = |(w, e): &(crate::conditions::Which, Exponent)| json!({ "poly": w, "exponent": exponent(*e) });
    json!({
        "n": t.n,
        "m": t.m,
        "parity_excluded": t.parity_excluded.iter().map(slot).collect::<Vec<_>>(),
        "steps": t.steps.iter().map(|s| json!({
            "lag": exponent(s.lag),
            "poly": s.poly,
            "zeroed": [exponent(s.zeroed[0]), exponent(s.zeroed[1])],
            "sign": s.sign,
        })).collect::<Vec<_>>(),
        "survivors": t.survivors().iter().map(slot).collect::<Vec<_>>(),
        "only_constant_survives": t.only_constant_survives(),
    })
}

pub fn trace_to_json<S: Coeff>(node: &SearchNode<S>) -> Value {
    let kind = match &node.kind {
        NodeKind::Base(phase) => json!({
            "base": phase.as_ref().map_or(Value::Null, phase_to_json),
        }),
        NodeKind::Branching(probes) => {
            let probes: Vec<Value> = probes
                .iter()
                .map(|p| {
                    let status = match &p.status {
                        ProbeStatus::NoDegree => json!({ "kind": "no_degree" }),
                        ProbeStatus::Proportional(c) => json!({ "kind": "proportional", "ratio": scalar(c.value()) }),
                        ProbeStatus::BothSidesZero => json!({ "kind": "both_sides_zero" }),
                        ProbeStatus::NotProportional(w) => {
                            json!({ "kind": "not_proportional", "witness": top_witness(w) })
                        }
                    };
                    let branches: Vec<Value> = p
                        .branches
                        .iter()
                        .map(|b| {
                            let outcome = match &b.outcome {
                                BranchOutcome::Explored(child) => json!({ "explored": trace_to_json(child) }),
                                BranchOutcome::PeelFailed(e) => json!({ "peel_failed": e.to_string() }),
                                BranchOutcome::SignEquivalent => json!("sign_equivalent"),
                                BranchOutcome::NotVisited => json!("not_visited"),
                            };
                            json!({
                                "root": match b.root { Root::Canonical => "canonical", Root::ShiftedByPi => "shifted_by_pi" },
                                "phase": phase_to_json(&b.phase),
                                "outcome": outcome,
                            })
                        })
                        .collect();
                    json!({
                        "axis": axis(p.axis),
                        "status": status,
                        "irrational_root": p.irrational_root,
                        "branches": branches,
                    })
                })
                .collect();
            json!({ "probes": probes })
        }
    };
    json!({ "n": node.n, "m": node.m, "succeeded": node.succeeded, "node": kind })
}

pub fn found_to_json(f: &Found) -> Value {
    json!({
        "pair": pair_to_json(&f.pair),
        "restart": f.restart,
        "residual_norm": f.residual_norm,
        "misalignment": { "A": f.misalignment[0], "B": f.misalignment[1] },
        "min_coeff": f.min_coeff,
    })
}

pub fn insufficiency_to_json(r: &InsufficiencyReport) -> Value {
    let outcome = match &r.outcome {
        LiftedOutcome::NotDecomposable(trace) => {
            json!({ "kind": "not_decomposable", "trace": trace_to_json(trace) })
        }
        LiftedOutcome::Decomposed(p) => {
            json!({ "kind": "decomposed", "protocol": protocol_to_json(p) })
        }
        LiftedOutcome::PrecondViolated => json!({ "kind": "precondition_violated" }),
    };
    let f = &r.findings;
    json!({
        "search": r.search.as_ref().map_or(Value::Null, found_to_json),
        "base_pair": pair_to_json(&r.base_pair),
        "base_report": report_to_json(&r.base_report),
        "lift_phase": phase_to_json(&r.lift_phase),
        "lifted_pair": pair_to_json(&r.lifted_pair),
        "lifted_report": report_to_json(&r.lifted_report),
        "decompose": outcome,
        "findings": {
            "base_violates_only_top": f.base_violates_only_top,
            "lifted_passes_all": f.lifted_passes_all,
            "top_peelable_axes": f.top_peelable_axes.iter().map(|a| axis(*a)).collect::<Vec<_>>(),
            "roots_peel_to_base": f.roots_peel_to_base,
            "base_dead_end": f.base_dead_end,
        },
        "verdict": if f.is_counterexample { "counterexample" } else { "not_a_counterexample" },
    })
}
