#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vifw::operators::Operator;
use vifw::sets::FeasibleSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}

pub fn uniform_mat<R: Rng>(rng: &mut R, r: usize, c: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-scale..scale))
}

pub fn simplex_pair(n: usize, m: usize) -> FeasibleSet {
    FeasibleSet::product(vec![FeasibleSet::simplex(n).unwrap(), FeasibleSet::simplex(m).unwrap()]).unwrap()
}

pub fn unit_box(n: usize) -> FeasibleSet {
    FeasibleSet::box_set(DVector::zeros(n), DVector::from_element(n, 1.0)).unwrap()
}

/// One of five set shapes with random parameters.
pub fn random_set(kind: u8, seed: u64) -> FeasibleSet {
    let mut r = rng(seed);
    let n = r.gen_range(1..=5);
    match kind % 5 {
        0 => FeasibleSet::simplex(n).unwrap(),
        1 => {
            let lower = uniform_vec(&mut r, n, 2.0);
            let upper = lower.map(|l| l + r.gen_range(0.0..3.0));
            FeasibleSet::box_set(lower, upper).unwrap()
        }
        2 => {
            let dim = r.gen_range(1..=3);
            let points = (0..r.gen_range(1..=6)).map(|_| uniform_vec(&mut r, dim, 2.0)).collect();
            FeasibleSet::vertex_polytope(points).unwrap()
        }
        3 => FeasibleSet::product(vec![random_set(0, seed + 1), random_set(1, seed + 2)]).unwrap(),
        _ => FeasibleSet::product(vec![random_set(2, seed + 3), random_set(0, seed + 4)]).unwrap(),
    }
}

/// Random convex combination of all vertices.
pub fn hull_point<R: Rng>(set: &FeasibleSet, rng: &mut R) -> DVector<f64> {
    let vs = set.vertices().unwrap();
    let w: Vec<f64> = vs.iter().map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let total: f64 = w.iter().sum();
    vs.iter().zip(&w).fold(DVector::zeros(set.dim()), |acc, (v, wi)| acc + v * (wi / total))
}

/// Rock-paper-scissors payoff.
pub fn rps() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 1.0, 1.0, 0.0, -1.0, -1.0, 1.0, 0.0])
}

/// The 2x2 LP saddle instance on unit boxes shipped in `configs/lp_saddle.json`.
pub fn lp_saddle_instance() -> (FeasibleSet, Operator) {
    let set = FeasibleSet::product(vec![unit_box(2), unit_box(2)]).unwrap();
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
    let op = Operator::lp_saddle(a, DVector::from_element(2, 1.0), DVector::from_element(2, 1.0)).unwrap();
    (set, op)
}

/// `max_v <F(x), x - v>` by direct enumeration in test code.
pub fn enumerated_gap(set: &FeasibleSet, op: &Operator, x: &DVector<f64>) -> f64 {
    let f = op.evaluate(x).unwrap();
    set.vertices().unwrap().iter().map(|v| f.dot(&(x - v))).fold(f64::NEG_INFINITY, f64::max)
}
