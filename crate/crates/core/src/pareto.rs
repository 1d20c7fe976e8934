//! Generating functions of the dominated outcomes, the Pareto optima and
//! the Pareto strategies of a problem.
//!
//! The dominated set `V>=` is built as a union of truncated orthants
//! `[f(u), v_hi]`, one per distinct outcome, inside the outcome box. The
//! Pareto optima are `∩_i (V>= \ (e_i + V>=))`. Strategies come from
//! intersecting the graph `{(u, f(u))}` with `P x V_Pareto` and dropping the
//! outcome coordinates, which is exact because `u` determines `f(u)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::genfunc::{gf_of_polytope, Srf};
use crate::par;
use crate::polyhedra::{outcome_box, IntBox, Polyhedron};
use crate::problem::Problem;
use crate::select::minimize_linear_over_set;
use crate::setops::{difference, hadamard, hadamard_cylinder, simplify, union_all};

/// Feasible points scanned when building the dominated set.
pub const MAX_FEASIBLE: usize = 1_000_000;

/// Every generating function of the pipeline for one problem.
#[derive(Clone, Debug)]
pub struct ParetoHandles {
    pub problem: Problem,
    /// Lattice points of `P`, over `Z^n`.
    pub g_feasible: Srf,
    /// `V>=` over `Z^k`.
    pub g_dominated: Srf,
    /// Pareto optima over `Z^k`.
    pub g_pareto: Srf,
    /// `{(u, f(u))}` over `Z^{n+k}`.
    pub g_graph: Srf,
    /// Pareto pairs `(u, f(u))` over `Z^{n+k}`.
    pub g_spareto: Srf,
    /// Pareto strategies over `Z^n`.
    pub g_strategies: Srf,
    pub outcome_box: IntBox,
    /// Integer bounding box of `P`.
    pub strategy_box: IntBox,
}

impl ParetoHandles {
    pub fn compute(problem: &Problem) -> Result<Self> {
        let poly = problem.polyhedron();
        let outcome_box = outcome_box(problem)?;
        let strategy_box = poly.lattice_bounding_box().ok_or(Error::EmptyPolyhedron)?;
        let g_feasible = gf_of_polytope(&poly)?;
        let g_dominated = dominated_gf_in(problem, &outcome_box)?;
        let g_pareto = pareto_from_dominated(&g_dominated, &outcome_box)?;
        let g_graph = graph_from_feasible(problem, &g_feasible)?;
        let (g_spareto, g_strategies) =
            strategies_from_parts(problem.n(), &g_pareto, &g_graph, &strategy_box, &outcome_box)?;
        Ok(ParetoHandles {
            problem: problem.clone(),
            g_feasible,
            g_dominated,
            g_pareto,
            g_graph,
            g_spareto,
            g_strategies,
            outcome_box,
            strategy_box,
        })
    }

    pub fn pareto_count(&self) -> Result<BigInt> {
        self.g_pareto.count()
    }

    pub fn strategy_count(&self) -> Result<BigInt> {
        self.g_strategies.count()
    }

    pub fn feasible_count(&self) -> Result<BigInt> {
        self.g_feasible.count()
    }

    /// `M` with every outcome in `[-M, M]^k`.
    pub fn outcome_bound(&self) -> i64 {
        self.outcome_box.max_abs()
    }

    /// `M` with every strategy in `[-M, M]^n`.
    pub fn strategy_bound(&self) -> i64 {
        self.strategy_box.max_abs()
    }

    /// `M` with every graph point in `[-M, M]^{n+k}`.
    pub fn graph_bound(&self) -> i64 {
        self.outcome_bound().max(self.strategy_bound())
    }

    /// Componentwise minimum of each objective over the feasible lattice
    /// points.
    pub fn ideal_point(&self) -> Result<Vec<i64>> {
        let n = self.problem.n();
        let total = n + self.problem.k();
        let m = self.graph_bound();
        let coords: Vec<usize> = (n..total).collect();
        par::try_map(&coords, |&i| {
            let mut c = vec![0; total];
            c[i] = 1;
            Ok(minimize_linear_over_set(&self.g_graph, &c, m)?.1)
        })
    }
}

/// Distinct outcome vectors of the feasible lattice points, sorted.
fn distinct_outcomes(problem: &Problem) -> Result<Vec<Vec<i64>>> {
    let points = problem.polyhedron().lattice_points(MAX_FEASIBLE)?;
    let set: BTreeSet<Vec<i64>> = points.iter().map(|u| problem.outcome(u)).collect();
    Ok(set.into_iter().collect())
}

/// `V>=` within the outcome box.
pub fn dominated_gf(problem: &Problem) -> Result<Srf> {
    dominated_gf_in(problem, &outcome_box(problem)?)
}

/// `{v in bx : f(u) <= v for some feasible u}`.
pub fn dominated_gf_in(problem: &Problem, bx: &IntBox) -> Result<Srf> {
    if bx.dim() != problem.k() {
        return Err(Error::DimensionMismatch { expected: problem.k(), found: bx.dim() });
    }
    dominated_from_outcomes(&distinct_outcomes(problem)?, bx)
}

/// Union of the boxes `[max(o, lo), hi]` over the outcomes `o`.
pub fn dominated_from_outcomes(outcomes: &[Vec<i64>], bx: &IntBox) -> Result<Srf> {
    let orthants: Vec<IntBox> = outcomes
        .iter()
        .filter_map(|o| {
            let lower: Vec<i64> = o.iter().zip(&bx.lower).map(|(a, b)| *a.max(b)).collect();
            IntBox::new(lower, bx.upper.clone()).ok()
        })
        .collect();
    let pieces = par::try_map(&orthants, |b| Ok(simplify(&gf_of_polytope(&b.to_polyhedron())?)))?;
    union_all(&pieces, bx)
}

/// Lattice points of the truncated multi-epigraph
/// `{(u, v) : A u <= b, f(u) <= v <= v_hi, v >= v_lo}` over `Z^{n+k}`.
/// Only used to cross-check [`dominated_gf`].
pub fn dominated_gf_epigraph(problem: &Problem) -> Result<Srf> {
    let (n, k) = (problem.n(), problem.k());
    let bx = outcome_box(problem)?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (row, &bi) in problem.a.iter().zip(&problem.b) {
        let mut r = row.clone();
        r.extend(std::iter::repeat_n(0, k));
        a.push(r);
        b.push(bi);
    }
    for (i, f) in problem.objectives.iter().enumerate() {
        // f(u) - v_i <= 0
        let mut r = f.clone();
        r.extend((0..k).map(|j| if j == i { -1 } else { 0 }));
        a.push(r);
        b.push(0);
        let mut hi = vec![0; n + k];
        hi[n + i] = 1;
        a.push(hi);
        b.push(bx.upper[i]);
        let mut lo = vec![0; n + k];
        lo[n + i] = -1;
        a.push(lo);
        b.push(-bx.lower[i]);
    }
    gf_of_polytope(&Polyhedron::new(a, b, n + k)?)
}

/// `∩_i (V>= \ (e_i + V>=))` for `V>=` inside `bx`.
pub fn pareto_from_dominated(dominated: &Srf, bx: &IntBox) -> Result<Srf> {
    let k = bx.dim();
    let axes: Vec<usize> = (0..k).collect();
    let parts = par::try_map(&axes, |&i| {
        let mut e = vec![0; k];
        e[i] = 1;
        difference(dominated, &dominated.shift(&e), bx)
    })?;
    let mut acc = parts[0].clone();
    for part in &parts[1..] {
        acc = hadamard(&acc, part, bx)?;
    }
    Ok(acc)
}

pub fn pareto_gf(problem: &Problem) -> Result<Srf> {
    let bx = outcome_box(problem)?;
    pareto_from_dominated(&dominated_gf_in(problem, &bx)?, &bx)
}

pub fn count_pareto(problem: &Problem) -> Result<BigInt> {
    pareto_gf(problem)?.count()
}

/// `{(u, f(u)) : u in P ∩ Z^n}` over `Z^{n+k}`.
pub fn graph_gf(problem: &Problem) -> Result<Srf> {
    graph_from_feasible(problem, &gf_of_polytope(&problem.polyhedron())?)
}

fn graph_from_feasible(problem: &Problem, feasible: &Srf) -> Result<Srf> {
    feasible.monomial_substitution(&problem.objectives)
}

/// Pareto pairs `(u, f(u))` and Pareto strategies `u`.
pub fn strategies_gf(problem: &Problem) -> Result<(Srf, Srf)> {
    let poly = problem.polyhedron();
    let outcome_box = outcome_box(problem)?;
    let strategy_box = poly.lattice_bounding_box().ok_or(Error::EmptyPolyhedron)?;
    let feasible = gf_of_polytope(&poly)?;
    let pareto = pareto_from_dominated(&dominated_gf_in(problem, &outcome_box)?, &outcome_box)?;
    let graph = graph_from_feasible(problem, &feasible)?;
    strategies_from_parts(problem.n(), &pareto, &graph, &strategy_box, &outcome_box)
}

/// The graph already lies in `P x Z^k`, so meeting it with the cylinder
/// `Z^n x V_Pareto` equals meeting it with `P x V_Pareto`.
fn strategies_from_parts(
    n: usize,
    pareto: &Srf,
    graph: &Srf,
    strategy_box: &IntBox,
    outcome_box: &IntBox,
) -> Result<(Srf, Srf)> {
    let window = strategy_box.product(outcome_box);
    let pairs = hadamard_cylinder(graph, pareto, &window)?;
    let strategies = simplify(&pairs.keep_leading(n)?);
    Ok((pairs, strategies))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::setops::intersect;

    fn support(g: &Srf, bx: &IntBox) -> Vec<Vec<i64>> {
        g.points_in_window(bx).unwrap()
    }

    #[test]
    fn e1_dominated_and_pareto() {
        let p = oracle::e1();
        let bx = outcome_box(&p).unwrap();
        assert_eq!(bx, IntBox::new(vec![0, 0], vec![3, 3]).unwrap());
        let dom = dominated_gf(&p).unwrap();
        assert_eq!(support(&dom, &bx), oracle::dominated_set(&p, &bx).unwrap());
        let front = pareto_gf(&p).unwrap();
        assert_eq!(support(&front, &bx), oracle::pareto_set(&p).unwrap());
        assert_eq!(count_pareto(&p).unwrap(), BigInt::from(4));
    }

    #[test]
    fn truncated_boxes() {
        let two = IntBox::new(vec![2, 2], vec![3, 3]).unwrap();
        assert_eq!(dominated_from_outcomes(&[vec![2, 2]], &two).unwrap().count().unwrap(), BigInt::from(4));
        let origin = IntBox::new(vec![0, 0], vec![0, 0]).unwrap();
        assert_eq!(dominated_gf_in(&oracle::e1(), &origin).unwrap().count().unwrap(), BigInt::from(0));
    }

    #[test]
    fn strict_domination() {
        let bx = IntBox::new(vec![1, 1], vec![2, 2]).unwrap();
        let dom = dominated_from_outcomes(&[vec![1, 1], vec![2, 2]], &bx).unwrap();
        let front = pareto_from_dominated(&dom, &bx).unwrap();
        assert_eq!(support(&front, &bx), vec![vec![1, 1]]);
    }

    #[test]
    fn minimality() {
        let p = oracle::e2();
        let bx = outcome_box(&p).unwrap();
        let dom = dominated_gf(&p).unwrap();
        let front = pareto_from_dominated(&dom, &bx).unwrap();
        for i in 0..2 {
            let mut e = vec![0; 2];
            e[i] = 1;
            assert_eq!(intersect(&front, &dom.shift(&e), &bx).unwrap().count().unwrap(), BigInt::from(0));
        }
    }

    #[test]
    fn epigraph_agrees() {
        let p = oracle::e2();
        let bx = outcome_box(&p).unwrap();
        let epi = dominated_gf_epigraph(&p).unwrap();
        let window = p.polyhedron().lattice_bounding_box().unwrap().product(&bx);
        let lifted: BTreeSet<Vec<i64>> = support(&epi, &window).into_iter().map(|x| x[2..].to_vec()).collect();
        let dom = support(&dominated_gf(&p).unwrap(), &bx);
        assert_eq!(lifted.into_iter().collect::<Vec<_>>(), dom);
    }

    #[test]
    fn graph_and_strategies() {
        let p = oracle::e1();
        let h = ParetoHandles::compute(&p).unwrap();
        assert_eq!(h.g_graph.count().unwrap(), BigInt::from(10));
        assert_eq!(h.strategy_count().unwrap(), BigInt::from(4));
        assert_eq!(h.ideal_point().unwrap(), vec![0, 0]);
        let single = ParetoHandles::compute(&oracle::single_point()).unwrap();
        assert_eq!(single.g_graph.terms.len(), 1);
        assert_eq!(single.g_graph.terms[0].numerator, vec![2, 2, 2, 2]);
        assert_eq!(single.pareto_count().unwrap(), BigInt::from(1));
        assert_eq!(single.strategy_count().unwrap(), BigInt::from(1));
        assert_eq!(single.ideal_point().unwrap(), vec![2, 2]);
    }

    #[test]
    fn many_to_one_strategies() {
        let p = oracle::e3();
        let h = ParetoHandles::compute(&p).unwrap();
        assert_eq!(h.pareto_count().unwrap(), BigInt::from(oracle::pareto_set(&p).unwrap().len()));
        let strategies = oracle::pareto_strategies(&p).unwrap();
        assert_eq!(h.strategy_count().unwrap(), BigInt::from(strategies.len()));
        assert_eq!(h.g_spareto.count().unwrap(), BigInt::from(strategies.len()));
        assert_eq!(support(&h.g_strategies, &h.strategy_box), strategies);
        assert!(h.strategy_count().unwrap() > h.pareto_count().unwrap());
    }
}
