use std::sync::Arc;

use mcilp_core::enumerate::{enumerate_projection, DelayMetrics};
use mcilp_core::genfunc::gf_of_polytope;
use mcilp_core::oracle;
use mcilp_core::{EnumerationStream, IntBox, ParetoHandles, Srf, TermOrder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_order(rng: &mut ChaCha8Rng, p: usize) -> TermOrder {
    loop {
        let rows: Vec<Vec<i64>> = (0..p).map(|_| (0..p).map(|_| rng.gen_range(0..=3)).collect()).collect();
        if let Ok(order) = TermOrder::new(rows) {
            return order;
        }
    }
}

fn run(g: &Srf, m: i64, order: &TermOrder) -> (Vec<Vec<i64>>, DelayMetrics) {
    let mut stream = EnumerationStream::new(Arc::new(g.clone()), m, order.clone()).unwrap();
    let points: Vec<Vec<i64>> = stream.by_ref().map(Result::unwrap).collect();
    (points, stream.metrics().clone())
}

fn within_bound(metrics: &DelayMetrics, p: usize, m: i64, order: &TermOrder) -> bool {
    metrics.max_nodes_between_outputs as f64 <= DelayMetrics::node_bound(p, m, order.max_entry())
}

#[test]
fn orders_match_oracle_on_pareto_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut problems = vec![oracle::e1(), oracle::e2(), oracle::e3()];
    problems.extend((0..4).map(|seed| oracle::random_instance(200 + seed, 2, 2 + seed as usize % 2)));
    for p in &problems {
        let h = ParetoHandles::compute(p).unwrap();
        let front = oracle::pareto_set(p).unwrap();
        let m = h.outcome_bound();
        let mut orders = vec![TermOrder::identity(p.k())];
        orders.extend((0..10).map(|_| random_order(&mut rng, p.k())));
        for order in &orders {
            let (points, metrics) = run(&h.g_pareto, m, order);
            assert_eq!(points, oracle::sort_by_order(&front, order), "order {order}");
            assert!(within_bound(&metrics, p.k(), m, order), "{metrics:?}");
        }
    }
}

#[test]
fn projection_onto_outcomes() {
    let h = ParetoHandles::compute(&oracle::e3()).unwrap();
    let order = TermOrder::identity(2);
    let stream = enumerate_projection(&h.g_spareto, h.graph_bound(), &order).unwrap();
    let points: Vec<Vec<i64>> = stream.map(Result::unwrap).collect();
    assert_eq!(points, oracle::pareto_set(&oracle::e3()).unwrap());
}

#[test]
fn memory_tracks_depth_not_output() {
    let order = TermOrder::identity(2);
    let big = gf_of_polytope(&IntBox::new(vec![0, 0], vec![99, 99]).unwrap().to_polyhedron()).unwrap();
    let small = gf_of_polytope(&IntBox::new(vec![0, 0], vec![9, 9]).unwrap().to_polyhedron()).unwrap();
    let (points, big_metrics) = run(&big, 100, &order);
    assert_eq!(points.len(), 10_000);
    assert!(points.windows(2).all(|w| order.cmp(&w[0], &w[1]).is_lt()));
    let (_, small_metrics) = run(&small, 100, &order);
    // the stack holds at most one pending sibling per level
    assert!(big_metrics.max_stack <= big_metrics.max_depth + 1);
    assert!(small_metrics.max_stack <= small_metrics.max_depth + 1);
    // a hundredfold larger output leaves the depth (and hence memory) unchanged
    assert_eq!(big_metrics.max_depth, small_metrics.max_depth);
    assert!(within_bound(&big_metrics, 2, 100, &order));
}
