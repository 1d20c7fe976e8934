//! Brute-force reference answers by explicit enumeration.
//!
//! Everything here scans lattice points one by one, so it only scales to
//! small instances (at most a million points in the bounding box). It is
//! shipped with the library so every answer of the generating-function
//! pipeline can be cross-checked on such instances.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::enumerate::TermOrder;
use crate::error::{Error, Result};
use crate::polyhedra::{IntBox, Polyhedron, Rational};
use crate::problem::Problem;
use crate::select::{NormSpec, PolyhedralNorm};

/// Largest bounding-box volume the oracle will scan.
pub const MAX_POINTS: u128 = 1_000_000;

/// A named reference problem.
#[derive(Clone, Debug)]
pub struct Instance {
    pub name: &'static str,
    pub problem: Problem,
}

fn square(side: i64) -> (Vec<Vec<i64>>, Vec<i64>) {
    (vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]], vec![side, side, 0, 0])
}

/// `{0 <= u <= 3, u1 + u2 >= 3}` with identity objectives.
pub fn e1() -> Problem {
    let (mut a, mut b) = square(3);
    a.push(vec![-1, -1]);
    b.push(-3);
    Problem::new(a, b, vec![vec![1, 0], vec![0, 1]]).expect("valid instance")
}

/// `[0, 3]^2` with objectives `u1 + u2` and `2 u1 - u2`.
pub fn e2() -> Problem {
    let (a, b) = square(3);
    Problem::new(a, b, vec![vec![1, 1], vec![2, -1]]).expect("valid instance")
}

/// `[0, 3]^2` with objectives `u1 + u2` and `-u1 - u2`: every outcome is
/// Pareto optimal and most have several strategies.
pub fn e3() -> Problem {
    let (a, b) = square(3);
    Problem::new(a, b, vec![vec![1, 1], vec![-1, -1]]).expect("valid instance")
}

/// The single point `(2, 2)` with identity objectives.
pub fn single_point() -> Problem {
    let (a, b) = (vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]], vec![2, 2, -2, -2]);
    Problem::new(a, b, vec![vec![1, 0], vec![0, 1]]).expect("valid instance")
}

pub fn instances() -> Vec<Instance> {
    vec![
        Instance { name: "E1", problem: e1() },
        Instance { name: "E2", problem: e2() },
        Instance { name: "E3", problem: e3() },
        Instance { name: "single", problem: single_point() },
    ]
}

/// A seeded random feasible problem: a box inside `[-6, 6]^n`, up to two
/// extra rows with entries in `[-5, 5]` that keep a random box point
/// feasible, and `k` objectives with entries in `[-5, 5]`.
pub fn random_instance(seed: u64, n: usize, k: usize) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut anchor = Vec::with_capacity(n);
        for i in 0..n {
            let lo = rng.gen_range(-6..=0);
            let hi = rng.gen_range(0..=6);
            anchor.push(rng.gen_range(lo..=hi));
            let mut e = vec![0; n];
            e[i] = 1;
            a.push(e.clone());
            b.push(hi);
            e[i] = -1;
            a.push(e);
            b.push(-lo);
        }
        for _ in 0..rng.gen_range(0..=2) {
            let row: Vec<i64> = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
            let at: i64 = row.iter().zip(&anchor).map(|(x, y)| x * y).sum();
            b.push(at + rng.gen_range(0..=5));
            a.push(row);
        }
        let objectives: Vec<Vec<i64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-5..=5)).collect()).collect();
        if let Ok(p) = Problem::new(a, b, objectives) {
            return p;
        }
    }
}

/// A seeded random centrally symmetric polytope in `R^k`: the box
/// `|y_i| <= b_i` cut by one or two random slabs `|<a, y>| <= c`.
pub fn random_symmetric_norm(seed: u64, k: usize) -> PolyhedralNorm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut push_pair = |row: Vec<i64>, rhs: i64| {
            a.push(row.iter().map(|x| -x).collect());
            b.push(rhs);
            a.push(row);
            b.push(rhs);
        };
        for i in 0..k {
            let mut e = vec![0; k];
            e[i] = 1;
            push_pair(e, rng.gen_range(1..=4));
        }
        for _ in 0..rng.gen_range(1..=2) {
            let row: Vec<i64> = (0..k).map(|_| rng.gen_range(-3..=3)).collect();
            if row.iter().all(|&x| x == 0) {
                continue;
            }
            push_pair(row, rng.gen_range(1..=6));
        }
        if let Ok(q) = PolyhedralNorm::from_inequalities(a, b) {
            return q;
        }
    }
}

/// All lattice points of a bounded polyhedron, sorted lexicographically,
/// by scanning its integer bounding box.
pub fn enumerate_lattice(p: &Polyhedron) -> Result<Vec<Vec<i64>>> {
    if !p.is_bounded() {
        return Err(Error::UnboundedPolyhedron);
    }
    let Some(bx) = p.lattice_bounding_box() else {
        return Ok(Vec::new());
    };
    if bx.volume() > MAX_POINTS {
        return Err(Error::TooLarge(format!("bounding box {bx} holds more than {MAX_POINTS} points")));
    }
    Ok(bx.points().into_iter().filter(|u| p.contains(u)).collect())
}

pub fn feasible_points(problem: &Problem) -> Result<Vec<Vec<i64>>> {
    enumerate_lattice(&problem.polyhedron())
}

/// Distinct outcome vectors, sorted.
pub fn outcomes(problem: &Problem) -> Result<Vec<Vec<i64>>> {
    let set: BTreeSet<Vec<i64>> = feasible_points(problem)?.iter().map(|u| problem.outcome(u)).collect();
    Ok(set.into_iter().collect())
}

/// `a <= b` componentwise with `a != b`.
pub fn dominates(a: &[i64], b: &[i64]) -> bool {
    a != b && a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Nondominated vectors, sorted, without duplicates.
pub fn pareto_filter(points: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let set: BTreeSet<&Vec<i64>> = points.iter().collect();
    set.iter()
        .filter(|v| !set.iter().any(|w| dominates(w, v)))
        .map(|v| (*v).clone())
        .collect()
}

pub fn pareto_set(problem: &Problem) -> Result<Vec<Vec<i64>>> {
    Ok(pareto_filter(&outcomes(problem)?))
}

/// Feasible points whose outcome is Pareto optimal, sorted.
pub fn pareto_strategies(problem: &Problem) -> Result<Vec<Vec<i64>>> {
    let front: BTreeSet<Vec<i64>> = pareto_set(problem)?.into_iter().collect();
    Ok(feasible_points(problem)?.into_iter().filter(|u| front.contains(&problem.outcome(u))).collect())
}

/// Points of `bx` weakly dominated by some outcome, sorted.
pub fn dominated_set(problem: &Problem, bx: &IntBox) -> Result<Vec<Vec<i64>>> {
    if bx.volume() > MAX_POINTS {
        return Err(Error::TooLarge(format!("box {bx} holds more than {MAX_POINTS} points")));
    }
    let outs = outcomes(problem)?;
    Ok(bx
        .points()
        .into_iter()
        .filter(|v| outs.iter().any(|o| o.iter().zip(v).all(|(x, y)| x <= y)))
        .collect())
}

/// Componentwise minimum of each objective over the feasible lattice points.
pub fn ideal_point(problem: &Problem) -> Result<Vec<i64>> {
    let outs = outcomes(problem)?;
    (0..problem.k())
        .map(|i| outs.iter().map(|o| o[i]).min().ok_or(Error::EmptyPolyhedron))
        .collect()
}

/// Points sorted by the term order.
pub fn sort_by_order(points: &[Vec<i64>], order: &TermOrder) -> Vec<Vec<i64>> {
    let set: BTreeSet<Vec<i64>> = points.iter().cloned().collect();
    let mut out: Vec<Vec<i64>> = set.into_iter().collect();
    out.sort_by(|a, b| order.cmp(a, b));
    out
}

/// Points with their measure under `norm` (distance, or `D`-th power for
/// polynomial norms), sorted by measure and then by the term order.
pub fn rank_by_distance(points: &[Vec<i64>], norm: &NormSpec, vhat: &[i64], order: &TermOrder) -> Vec<(Vec<i64>, Rational)> {
    let mut ranked: Vec<(Vec<i64>, Rational)> =
        sort_by_order(points, order).into_iter().map(|v| {
            let d = norm.measure(vhat, &v);
            (v, d)
        }).collect();
    ranked.sort_by(|a, b| match a.1.cmp(&b.1) {
        Ordering::Equal => order.cmp(&a.0, &b.0),
        other => other,
    });
    ranked
}

/// The measure-minimizing point, `R`-least among ties.
pub fn oracle_nearest(points: &[Vec<i64>], norm: &NormSpec, vhat: &[i64], order: &TermOrder) -> Result<(Vec<i64>, Rational)> {
    rank_by_distance(points, norm, vhat, order).into_iter().next().ok_or(Error::EmptySet)
}

/// Maximum of `f` over a point list.
pub fn max_over(points: &[Vec<i64>], f: &crate::polynomial::Polynomial) -> Result<Rational> {
    points.iter().map(|v| f.eval(v)).max().ok_or(Error::EmptySet)
}
