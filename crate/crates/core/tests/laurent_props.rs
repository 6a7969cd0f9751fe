//! Algebraic laws of bivariate Laurent polynomials, checked against a naive
//! dense-product oracle and pointwise evaluation on the torus.

use std::collections::HashMap;

use mqsp_core::laurent::{BiLaurent, Symmetry};
use mqsp_core::scalar::{exact, Coeff, Exact};
use num_complex::Complex64;
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = String> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| format!("{n}/{d}"))
}

fn poly() -> impl Strategy<Value = BiLaurent<Exact>> {
    prop::collection::vec(
        ((-3i32..=3, -3i32..=3), small_rational(), small_rational()),
        0..8,
    )
    .prop_map(|terms| {
        BiLaurent::from_terms(terms.into_iter().map(|(e, re, im)| (e, exact(&re, &im))))
    })
}

/// Schoolbook product over a hash map, independent of the sparse multiply.
fn naive_mul(f: &BiLaurent<Exact>, g: &BiLaurent<Exact>) -> HashMap<(i32, i32), Exact> {
    let mut out: HashMap<(i32, i32), Exact> = HashMap::new();
    for ((j1, k1), x) in f.terms() {
        for ((j2, k2), y) in g.terms() {
            let slot = out.entry((j1 + j2, k1 + k2)).or_insert_with(Exact::zero);
            *slot = slot.add(&x.mul(y));
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

const GRID: [f64; 4] = [0.0, 0.7, 2.1, -2.9];

fn close(x: Complex64, y: Complex64) -> bool {
    (x - y).norm() <= 1e-9 * (1.0 + x.norm().max(y.norm()))
}

proptest! {
    #[test]
    fn star_is_an_involution(f in poly()) {
        prop_assert_eq!(f.star().star(), f);
    }

    #[test]
    fn star_is_multiplicative(f in poly(), g in poly()) {
        prop_assert_eq!((&f * &g).star(), &f.star() * &g.star());
    }

    #[test]
    fn product_matches_schoolbook_oracle(f in poly(), g in poly()) {
        let fast = &f * &g;
        let slow = naive_mul(&f, &g);
        prop_assert_eq!(fast.len(), slow.len());
        for (e, c) in fast.terms() {
            prop_assert_eq!(Some(c), slow.get(&e));
        }
    }

    #[test]
    fn transforms_are_ring_homomorphisms(f in poly(), g in poly()) {
        for kind in Symmetry::ALL {
            prop_assert_eq!((&f * &g).transform(kind), &f.transform(kind) * &g.transform(kind));
            prop_assert_eq!((&f + &g).transform(kind), &f.transform(kind) + &g.transform(kind));
            prop_assert_eq!(f.transform(kind).transform(kind), f.clone());
        }
    }

    #[test]
    fn star_conjugates_values_on_the_torus(f in poly()) {
        let fs = f.star();
        for ta in GRID {
            for tb in GRID {
                prop_assert!(close(fs.evaluate(ta, tb), f.evaluate(ta, tb).conj()));
            }
        }
    }

    #[test]
    fn evaluation_is_multiplicative(f in poly(), g in poly()) {
        let fg = &f * &g;
        for ta in GRID {
            for tb in GRID {
                prop_assert!(close(fg.evaluate(ta, tb), f.evaluate(ta, tb) * g.evaluate(ta, tb)));
            }
        }
    }

    #[test]
    fn degree_of_product_is_bounded(f in poly(), g in poly()) {
        let (df, dg, dfg) = (f.degree(), g.degree(), (&f * &g).degree());
        prop_assert!(dfg.deg_a <= df.deg_a + dg.deg_a);
        prop_assert!(dfg.deg_b <= df.deg_b + dg.deg_b);
    }

    #[test]
    fn transforms_match_substitution(f in poly()) {
        use std::f64::consts::PI;
        for ta in GRID {
            for tb in GRID {
                let v_inv = f.transform(Symmetry::InvertBoth).evaluate(ta, tb);
                prop_assert!(close(v_inv, f.evaluate(-ta, -tb)));
                let v_na = f.transform(Symmetry::NegateA).evaluate(ta, tb);
                prop_assert!(close(v_na, f.evaluate(ta + PI, tb)));
                let v_nb = f.transform(Symmetry::NegateB).evaluate(ta, tb);
                prop_assert!(close(v_nb, f.evaluate(ta, tb + PI)));
            }
        }
    }

    #[test]
    fn subtraction_cancels(f in poly()) {
        prop_assert!((&f - &f).is_zero());
    }
}
