//! Closed-form topology gradient against central finite differences.

mod common;

use common::*;
use polopt::topology::{gradient, objective};
use polopt::{EdgeWeightVector, OpinionVector};
use rand::Rng;

const H: f64 = 1e-5;
/// Entries smaller than this are compared absolutely; below it the
/// difference quotient is dominated by rounding in `objective`.
const ABS_FLOOR: f64 = 1e-7;

fn central_difference(w: &EdgeWeightVector, s: &OpinionVector, i: usize) -> f64 {
    let up = objective(&w.perturbed(i, H), s).unwrap();
    let down = objective(&w.perturbed(i, -H), s).unwrap();
    (up - down) / (2.0 * H)
}

fn worst_relative_error(w: &EdgeWeightVector, s: &OpinionVector) -> f64 {
    let g = gradient(w, s).unwrap();
    (0..w.len())
        .map(|i| {
            let fd = central_difference(w, s, i);
            (g[i] - fd).abs() / g[i].abs().max(fd.abs()).max(ABS_FLOOR)
        })
        .fold(0.0, f64::max)
}

#[test]
fn two_node_closed_form() {
    let w = EdgeWeightVector::new(2, vec![1.0]).unwrap();
    let s = OpinionVector::new(vec![0.0, 1.0]).unwrap();
    // d/dw 0.5 / (1 + 2w) at w = 1
    assert!((central_difference(&w, &s, 0) + 1.0 / 9.0).abs() < 1e-9);
    assert!((gradient(&w, &s).unwrap()[0] + 1.0 / 9.0).abs() < 1e-14);
}

#[test]
fn random_six_node_instance() {
    let mut r = rng(6);
    let s = random_opinions(&mut r, 6);
    let w = random_feasible(&mut r, 6, 4.0, 1e-3);
    assert!(worst_relative_error(&w, &s) < 1e-4);
}

#[test]
fn random_feasible_points() {
    let mut r = rng(2024);
    for _ in 0..20 {
        let n = r.gen_range(2..=10);
        let total = r.gen_range(0.5..20.0);
        let s = random_opinions(&mut r, n);
        let w = random_feasible(&mut r, n, total, 1e-3);
        let err = worst_relative_error(&w, &s);
        assert!(err < 1e-4, "n={n} err={err}");
    }
}

#[test]
fn gradient_entries_nonpositive() {
    let mut r = rng(77);
    for _ in 0..50 {
        let n = r.gen_range(2..=12);
        let s = random_opinions(&mut r, n);
        let total = r.gen_range(0.1..10.0);
        let w = random_feasible(&mut r, n, total, 0.0);
        assert!(gradient(&w, &s).unwrap().iter().all(|&g| g <= 0.0));
    }
}

#[test]
fn gradient_independent_of_thread_count() {
    let mut r = rng(5);
    let s = random_opinions(&mut r, 40);
    let w = random_feasible(&mut r, 40, 30.0, 0.0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let single = pool.install(|| gradient(&w, &s).unwrap());
    let multi = gradient(&w, &s).unwrap();
    assert_eq!(single, multi);
}
