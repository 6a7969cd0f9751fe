//! The symmetric least-squares layout and the insufficiency pipeline.

mod common;

use common::{random_exact_protocol, random_float_protocol};
use mqsp_core::conditions::{check_conditions, top_proportionality, TopRelation, Variant};
use mqsp_core::counterexample::{
    insufficiency_from_base, lift, search_nonrealizable, LiftedOutcome, SearchSpec, SymmetricLayout,
};
use mqsp_core::laurent::Axis;
use mqsp_core::protocol::{build, Protocol, UnitPhase};
use mqsp_core::torus::{max_unitarity_deviation, sample_grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_241;

fn random_point(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Central differences, one column per parameter.
fn fd_column(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], t: usize, h: f64) -> Vec<f64> {
    let mut up = x.to_vec();
    let mut down = x.to_vec();
    up[t] += h;
    down[t] -= h;
    f(&up)
        .iter()
        .zip(f(&down))
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

#[test]
fn unitarity_jacobian_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for (n, m) in [(4, 2), (3, 1), (5, 3)] {
        let layout = SymmetricLayout::new(n, m);
        for _ in 0..5 {
            let x = random_point(&mut rng, layout.n_params());
            let jac = layout.unitarity_jacobian(&x);
            for t in 0..layout.n_params() {
                let col = fd_column(&|y| layout.unitarity_residual(y), &x, t, 1e-6);
                for (r, fd) in col.iter().enumerate() {
                    let an = jac[(r, t)];
                    assert!(
                        (an - fd).abs() <= 1e-6 * an.abs().max(fd.abs()).max(1.0),
                        "({n},{m}) row {r} col {t}: {an} vs {fd}"
                    );
                }
            }
        }
    }
}

#[test]
fn residual_vanishes_at_built_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let layout = SymmetricLayout::new(4, 2);
    let mut tried = 0;
    while tried < 10 {
        let prot = random_float_protocol(&mut rng, 4);
        if prot.m() != 2 {
            continue;
        }
        tried += 1;
        let pair = build(&prot);
        let theta = layout
            .params_from_pair(&pair, 1e-12)
            .expect("built pairs fit the symmetric layout");
        let r = layout.unitarity_residual(&theta);
        assert!(r.iter().all(|x| x.abs() < 1e-12), "{r:?}");
    }
}

#[test]
fn layout_pairs_pass_the_symmetry_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let layout = SymmetricLayout::new(4, 2);
    for _ in 0..20 {
        let pair = layout.pair(&random_point(&mut rng, layout.n_params()));
        let report = check_conditions(&pair, Variant::Revised, 0.0);
        assert!(
            !report.i.is_fail() && !report.ii.is_fail() && !report.iii.is_fail(),
            "{report:?}"
        );
        assert!(pair.q().get((0, 0)).is_none());
    }
}

#[test]
fn search_is_deterministic() {
    let spec = SearchSpec {
        seed: 7,
        budget: 50,
        ..SearchSpec::default()
    };
    let a = search_nonrealizable(&spec).unwrap();
    let b = search_nonrealizable(&spec).unwrap();
    assert_eq!(
        a.params.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
        b.params.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
    );
    assert_eq!(a.restart, b.restart);
}

#[test]
fn accepted_pairs_are_unitary_on_the_torus() {
    let found = search_nonrealizable(&SearchSpec {
        seed: 3,
        ..SearchSpec::default()
    })
    .unwrap();
    assert!(max_unitarity_deviation(&sample_grid(&found.pair, 64)) < 1e-8);
    let report = check_conditions(&found.pair, Variant::Revised, 1e-9);
    assert!(report.first_four() && report.v.is_fail());
}

#[test]
fn lift_makes_axis_a_tops_proportional() {
    let found = search_nonrealizable(&SearchSpec {
        seed: 3,
        ..SearchSpec::default()
    })
    .unwrap();
    let lifted = lift(&found.pair, &UnitPhase::one());
    match top_proportionality(&lifted, Axis::A, 1e-9) {
        TopRelation::Proportional(c) => {
            assert!((c.value() - num_complex::Complex64::new(1.0, 0.0)).norm() < 1e-9)
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        top_proportionality(&lifted, Axis::B, 1e-9),
        TopRelation::NotProportional(_)
    ));
}

#[test]
fn lift_of_identity_is_the_single_step_pair() {
    let phase = UnitPhase::from_angle(0.4);
    let lifted = lift(
        &build(&Protocol::new(vec![], vec![UnitPhase::one()]).unwrap()),
        &phase,
    );
    let direct = build(&Protocol::new(vec![Axis::A], vec![UnitPhase::one(), phase]).unwrap());
    assert!(lifted.approx_eq(&direct, 0.0));
}

#[test]
fn realizable_base_is_not_a_counterexample() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let prot = loop {
        let p = random_exact_protocol(&mut rng, 4);
        if p.m() == 2 {
            break p;
        }
    };
    let report =
        insufficiency_from_base(&build(&prot).to_float(), &UnitPhase::from_angle(0.9), 1e-9);
    assert!(matches!(report.outcome, LiftedOutcome::Decomposed(_)));
    assert!(!report.findings.is_counterexample);
    assert!(!report.findings.base_violates_only_top);
}

#[test]
fn shifting_the_lift_phase_by_pi_keeps_the_verdict() {
    let found = search_nonrealizable(&SearchSpec {
        seed: 4,
        ..SearchSpec::default()
    })
    .unwrap();
    let phase = UnitPhase::from_angle(0.3);
    let a = insufficiency_from_base(&found.pair, &phase, 1e-9);
    let b = insufficiency_from_base(&found.pair, &phase.shifted_by_pi(), 1e-9);
    assert!(a.findings.is_counterexample);
    assert_eq!(a.findings, b.findings);
    assert!(a.lifted_pair.approx_eq(&b.lifted_pair.negated(), 1e-14));
}
