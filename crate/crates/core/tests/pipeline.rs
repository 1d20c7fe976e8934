use std::collections::BTreeSet;

use mcilp_core::oracle;
use mcilp_core::par;
use mcilp_core::pareto::{dominated_gf, dominated_gf_epigraph};
use mcilp_core::{ParetoHandles, Problem};
use num_bigint::BigInt;

fn check_against_oracle(name: &str, p: &Problem) -> ParetoHandles {
    let h = ParetoHandles::compute(p).unwrap();
    let front = oracle::pareto_set(p).unwrap();
    let strategies = oracle::pareto_strategies(p).unwrap();
    assert_eq!(h.pareto_count().unwrap(), BigInt::from(front.len()), "{name}: pareto count");
    assert_eq!(h.strategy_count().unwrap(), BigInt::from(strategies.len()), "{name}: strategy count");
    assert_eq!(
        h.feasible_count().unwrap(),
        BigInt::from(oracle::feasible_points(p).unwrap().len()),
        "{name}: feasible count"
    );
    assert_eq!(h.g_pareto.points_in_window(&h.outcome_box).unwrap(), front, "{name}: pareto support");
    assert_eq!(h.g_strategies.points_in_window(&h.strategy_box).unwrap(), strategies, "{name}: strategy support");
    h
}

#[test]
fn reference_instances() {
    let e1 = check_against_oracle("E1", &oracle::e1());
    assert_eq!(e1.pareto_count().unwrap(), BigInt::from(4));
    assert_eq!(e1.strategy_count().unwrap(), BigInt::from(4));
    check_against_oracle("E2", &oracle::e2());
    let e3 = check_against_oracle("E3", &oracle::e3());
    assert_eq!(e3.pareto_count().unwrap(), BigInt::from(7));
    assert_eq!(e3.strategy_count().unwrap(), BigInt::from(16));
    check_against_oracle("single", &oracle::single_point());
}

#[test]
fn random_instances_match_oracle() {
    for seed in 0..24u64 {
        let (n, k) = (1 + seed as usize % 3, 1 + (seed as usize / 3) % 3);
        let p = oracle::random_instance(seed, n, k);
        let h = check_against_oracle(&format!("seed {seed}"), &p);
        assert_eq!(h.ideal_point().unwrap(), oracle::ideal_point(&p).unwrap(), "seed {seed}: ideal point");
    }
}

#[test]
fn dominated_set_routes_agree() {
    let mut problems = vec![oracle::e1(), oracle::e2(), oracle::e3()];
    problems.extend((100..106).map(|seed| oracle::random_instance(seed, 2, 2)));
    for p in &problems {
        let h = ParetoHandles::compute(p).unwrap();
        let direct = dominated_gf(p).unwrap().points_in_window(&h.outcome_box).unwrap();
        assert_eq!(direct, oracle::dominated_set(p, &h.outcome_box).unwrap());
        let window = h.strategy_box.product(&h.outcome_box);
        let lifted: BTreeSet<Vec<i64>> = dominated_gf_epigraph(p)
            .unwrap()
            .points_in_window(&window)
            .unwrap()
            .into_iter()
            .map(|w| w[p.n()..].to_vec())
            .collect();
        assert_eq!(direct, lifted.into_iter().collect::<Vec<_>>());
    }
}

#[test]
fn sequential_and_parallel_agree() {
    for seed in [3u64, 11, 17] {
        let p = oracle::random_instance(seed, 2, 3);
        par::set_parallel(false);
        let seq = ParetoHandles::compute(&p).unwrap();
        par::set_parallel(true);
        let parl = ParetoHandles::compute(&p).unwrap();
        assert_eq!(seq.g_pareto.to_text(), parl.g_pareto.to_text());
        assert_eq!(seq.g_strategies.to_text(), parl.g_strategies.to_text());
    }
}

#[test]
fn text_round_trip_preserves_counts() {
    let h = ParetoHandles::compute(&oracle::e3()).unwrap();
    let back = mcilp_core::Srf::parse(&h.g_strategies.to_text()).unwrap();
    assert_eq!(back.count().unwrap(), BigInt::from(16));
}
