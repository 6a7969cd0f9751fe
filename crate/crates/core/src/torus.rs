//! Evaluation of a pair on a uniform grid of the torus `|a| = |b| = 1`.

use std::fmt::Write;

use crate::protocol::PolyPair;
use crate::scalar::Coeff;

/// One grid point: `a = e^{iθ_a}`, `b = e^{iθ_b}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRow {
    pub theta_a: f64,
    pub theta_b: f64,
    pub abs_p2: f64,
    pub abs_q2: f64,
    pub sum: f64,
}

/// `|P|²`, `|Q|²` and their sum at `θ = 2πr / resolution` on both axes,
/// `θ_a` varying slowest.
///
/// Panics if `resolution < 2`.
pub fn sample_grid<S: Coeff>(pair: &PolyPair<S>, resolution: usize) -> Vec<GridRow> {
    assert!(resolution >= 2, "resolution must be at least 2");
    let p = pair.p().to_float();
    let q = pair.q().to_float();
    let theta = |r: usize| std::f64::consts::TAU * r as f64 / resolution as f64;
    let mut rows = Vec::with_capacity(resolution * resolution);
    for ra in 0..resolution {
        for rb in 0..resolution {
            let (ta, tb) = (theta(ra), theta(rb));
            let abs_p2 = p.evaluate(ta, tb).norm_sqr();
            let abs_q2 = q.evaluate(ta, tb).norm_sqr();
            rows.push(GridRow {
                theta_a: ta,
                theta_b: tb,
                abs_p2,
                abs_q2,
                sum: abs_p2 + abs_q2,
            });
        }
    }
    rows
}

/// Largest `| |P|² + |Q|² - 1 |` over the grid.
pub fn max_unitarity_deviation(rows: &[GridRow]) -> f64 {
    rows.iter().map(|r| (r.sum - 1.0).abs()).fold(0.0, f64::max)
}

/// CSV with header `theta_a,theta_b,abs_P2,abs_Q2,sum`.
pub fn to_csv(rows: &[GridRow]) -> String {
    let mut out = String::from("theta_a,theta_b,abs_P2,abs_Q2,sum\n");
    for r in rows {
        writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?}",
            r.theta_a, r.theta_b, r.abs_p2, r.abs_q2, r.sum
        )
        .unwrap();
    }
    out
}
