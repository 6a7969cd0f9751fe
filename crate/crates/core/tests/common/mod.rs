#![allow(dead_code)]

use mqsp_core::laurent::Axis;
use mqsp_core::protocol::{Protocol, UnitPhase};
use mqsp_core::scalar::{exact, Exact, Float};
use rand::Rng;

/// A unit with rational parts from the Pythagorean triple of `(u, v)`,
/// randomly reflected so that every quadrant occurs.
pub fn pythagorean_phase<R: Rng>(rng: &mut R) -> UnitPhase<Exact> {
    let u: i64 = rng.gen_range(1..=4);
    let v: i64 = rng.gen_range(0..=4);
    let h = u * u + v * v;
    let (mut re, mut im) = (u * u - v * v, 2 * u * v);
    if rng.gen_bool(0.5) {
        std::mem::swap(&mut re, &mut im);
    }
    if rng.gen_bool(0.5) {
        re = -re;
    }
    if rng.gen_bool(0.5) {
        im = -im;
    }
    UnitPhase::new(exact(&format!("{re}/{h}"), &format!("{im}/{h}"))).unwrap()
}

pub fn random_axes<R: Rng>(rng: &mut R, n: usize) -> Vec<Axis> {
    (0..n)
        .map(|_| if rng.gen_bool(0.5) { Axis::A } else { Axis::B })
        .collect()
}

pub fn random_exact_protocol<R: Rng>(rng: &mut R, n: usize) -> Protocol<Exact> {
    let s = random_axes(rng, n);
    let phases = (0..=n).map(|_| pythagorean_phase(rng)).collect();
    Protocol::new(s, phases).unwrap()
}

pub fn random_float_protocol<R: Rng>(rng: &mut R, n: usize) -> Protocol<Float> {
    let s = random_axes(rng, n);
    let phases = (0..=n)
        .map(|_| UnitPhase::from_angle(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)))
        .collect();
    Protocol::new(s, phases).unwrap()
}
