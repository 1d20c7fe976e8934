//! End-to-end acceptance run: every acceptance criterion at its stated
//! tolerance, one PASS/FAIL line each. Runs without the libtest harness so
//! the report lines always reach standard output.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use mcilp_core::enumerate::DelayMetrics;
use mcilp_core::genfunc::gf_of_polytope;
use mcilp_core::select::{fptas_max_polynomial, fptas_nearest_pseudonorm, nearest_polyhedral};
use mcilp_core::setops::{boolean_combine, hadamard, SetExpr};
use mcilp_core::{
    oracle, EnumerationStream, IntBox, NormSpec, ParetoHandles, PolyhedralNorm, Polyhedron, Polynomial, Problem,
    PseudoNorm, Rational, Srf, TermOrder,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n, k` cycling through `{1, 2, 3}^2`.
fn random_problem(seed: u64) -> Problem {
    oracle::random_instance(seed, 1 + seed as usize % 3, 1 + (seed as usize / 3) % 3)
}

/// References plus random instances covering every `(n, k)` pair.
fn selection_instances() -> Vec<(String, Problem)> {
    let mut out = vec![("E1".to_string(), oracle::e1()), ("E2".into(), oracle::e2()), ("E3".into(), oracle::e3())];
    out.extend((1000..1018).map(|s| (format!("seed {s}"), random_problem(s))));
    out
}

fn counting() -> Check {
    let start = Instant::now();
    let mut cases = vec![("E1".to_string(), oracle::e1()), ("E2".to_string(), oracle::e2())];
    cases.extend((0..100).map(|s| (format!("seed {s}"), random_problem(s))));
    for (name, p) in &cases {
        let h = ParetoHandles::compute(p).map_err(|e| format!("{name}: {e}"))?;
        let pareto = oracle::pareto_set(p).map_err(|e| e.to_string())?.len();
        let strategies = oracle::pareto_strategies(p).map_err(|e| e.to_string())?.len();
        let got = (h.pareto_count().map_err(|e| e.to_string())?, h.strategy_count().map_err(|e| e.to_string())?);
        ensure(got == (BigInt::from(pareto), BigInt::from(strategies)), || {
            format!("{name}: counted {got:?}, oracle ({pareto}, {strategies})")
        })?;
        if name == "E1" {
            ensure(pareto == 4 && strategies == 4, || format!("E1: ({pareto}, {strategies})"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(format!("{} instances exact, E1 = 4/4, {:.1}s", cases.len(), elapsed.as_secs_f64()))
}

fn gf_algebra() -> Check {
    let universe = IntBox::cube(2, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let inputs: Vec<(Srf, Vec<Vec<i64>>)> = (0..3).map(|_| random_set(&mut rng, &universe)).collect();
        let expr = random_expr(&mut rng, 3, 3);
        let sets: Vec<Srf> = inputs.iter().map(|(g, _)| g.clone()).collect();
        let g = boolean_combine(&sets, &expr, &universe).map_err(|e| format!("case {case}: {e}"))?;
        let expected = universe.points().into_iter().filter(|p| expr.holds(&|i| inputs[i].1.contains(p))).count();
        let count = g.count().map_err(|e| e.to_string())?;
        ensure(count == BigInt::from(expected), || format!("case {case}: count {count}, expected {expected}"))?;
    }
    let window = IntBox::cube(3, 5);
    for pair in 0..50 {
        let a: Vec<i64> = (0..3).map(|_| rng.gen_range(-5..=5)).collect();
        // every fifth pair is equal
        let b: Vec<i64> = if pair % 5 == 0 { a.clone() } else { (0..3).map(|_| rng.gen_range(-5..=5)).collect() };
        let g = hadamard(&Srf::monomial(a.clone()), &Srf::monomial(b.clone()), &window).map_err(|e| e.to_string())?;
        let pts = g.points_in_window(&window).map_err(|e| e.to_string())?;
        let want = if a == b { vec![a.clone()] } else { vec![] };
        ensure(pts == want, || format!("monomials {a:?} * {b:?} gave {pts:?}"))?;
    }
    Ok("200 Boolean combinations and 50 monomial pairs exact".into())
}

fn random_set(rng: &mut ChaCha8Rng, universe: &IntBox) -> (Srf, Vec<Vec<i64>>) {
    let g = match rng.gen_range(0..3) {
        0 => {
            let lo: Vec<i64> = (0..2).map(|_| rng.gen_range(-4..=3)).collect();
            let hi: Vec<i64> = lo.iter().map(|&l| (l + rng.gen_range(0..=4)).min(4)).collect();
            gf_of_polytope(&IntBox::new(lo, hi).unwrap().to_polyhedron()).unwrap()
        }
        1 => {
            let mut pts: Vec<Vec<i64>> =
                (0..rng.gen_range(1..8)).map(|_| (0..2).map(|_| rng.gen_range(-4..=4)).collect()).collect();
            pts.sort();
            pts.dedup();
            Srf::from_points(2, &pts)
        }
        _ => {
            let mut poly = universe.to_polyhedron();
            poly.a.push(vec![rng.gen_range(-3..=3), rng.gen_range(1..=3)]);
            poly.b.push(rng.gen_range(-2..=6));
            gf_of_polytope(&Polyhedron::new(poly.a, poly.b, 2).unwrap()).unwrap()
        }
    };
    let pts = g.points_in_window(universe).unwrap();
    (g, pts)
}

fn random_expr(rng: &mut ChaCha8Rng, sets: usize, depth: u32) -> SetExpr {
    if depth == 0 || rng.gen_bool(0.25) {
        return SetExpr::set(rng.gen_range(0..sets));
    }
    let a = random_expr(rng, sets, depth - 1);
    match rng.gen_range(0..4) {
        0 => SetExpr::union(a, random_expr(rng, sets, depth - 1)),
        1 => SetExpr::intersection(a, random_expr(rng, sets, depth - 1)),
        2 => SetExpr::difference(a, random_expr(rng, sets, depth - 1)),
        _ => SetExpr::complement(a),
    }
}

fn random_order(rng: &mut ChaCha8Rng, p: usize) -> TermOrder {
    loop {
        let rows: Vec<Vec<i64>> = (0..p).map(|_| (0..p).map(|_| rng.gen_range(0..=3)).collect()).collect();
        if let Ok(order) = TermOrder::new(rows) {
            return order;
        }
    }
}

fn run_stream(g: &Srf, m: i64, order: &TermOrder) -> Result<(Vec<Vec<i64>>, DelayMetrics), String> {
    let mut stream = EnumerationStream::new(Arc::new(g.clone()), m, order.clone()).map_err(|e| e.to_string())?;
    let points = stream.by_ref().collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    Ok((points, stream.metrics().clone()))
}

fn enumeration() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let instances = selection_instances();
    let mut runs = 0;
    for (name, p) in &instances {
        let h = ParetoHandles::compute(p).map_err(|e| e.to_string())?;
        let front = oracle::pareto_set(p).map_err(|e| e.to_string())?;
        let m = h.outcome_bound();
        for _ in 0..10 {
            let order = random_order(&mut rng, p.k());
            let (points, metrics) = run_stream(&h.g_pareto, m, &order)?;
            ensure(points == oracle::sort_by_order(&front, &order), || format!("{name}, order {order}: wrong sequence"))?;
            let bound = DelayMetrics::node_bound(p.k(), m, order.max_entry());
            ensure(metrics.max_nodes_between_outputs as f64 <= bound, || {
                format!("{name}, order {order}: {} nodes between outputs, bound {bound:.1}", metrics.max_nodes_between_outputs)
            })?;
            runs += 1;
        }
    }
    let order = TermOrder::identity(2);
    let big = gf_of_polytope(&IntBox::new(vec![0, 0], vec![99, 99]).unwrap().to_polyhedron()).map_err(|e| e.to_string())?;
    let small = gf_of_polytope(&IntBox::new(vec![0, 0], vec![9, 9]).unwrap().to_polyhedron()).map_err(|e| e.to_string())?;
    let (points, big_m) = run_stream(&big, 100, &order)?;
    let (_, small_m) = run_stream(&small, 100, &order)?;
    ensure(points.len() == 10_000, || format!("streamed {} points", points.len()))?;
    ensure(big_m.max_stack <= big_m.max_depth + 1 && big_m.max_depth == small_m.max_depth, || {
        format!("memory: stack {} depth {} vs depth {}", big_m.max_stack, big_m.max_depth, small_m.max_depth)
    })?;
    Ok(format!(
        "{runs} ordered runs match the oracle within the delay bound; 10^4 points with stack {} at depth {}",
        big_m.max_stack, big_m.max_depth
    ))
}

fn polyhedral_selection() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut queries = 0;
    for (name, p) in selection_instances() {
        let k = p.k();
        let h = ParetoHandles::compute(&p).map_err(|e| e.to_string())?;
        let front = oracle::pareto_set(&p).map_err(|e| e.to_string())?;
        let mut norms = vec![PolyhedralNorm::l1(k), PolyhedralNorm::linf(k)];
        norms.extend((0..5).map(|_| oracle::random_symmetric_norm(rng.gen(), k)));
        for q in &norms {
            let vhat: Vec<i64> = h.outcome_box.lower.iter().zip(&h.outcome_box.upper).map(|(&l, &u)| rng.gen_range(l - 1..=u + 1)).collect();
            let order = random_order(&mut rng, k);
            let got = nearest_polyhedral(&h.g_pareto, q, &vhat, h.outcome_bound() + 1, &order).map_err(|e| e.to_string())?;
            let want = oracle::oracle_nearest(&front, &NormSpec::Polyhedral(q.clone()), &vhat, &order).map_err(|e| e.to_string())?;
            ensure(got == want, || format!("{name}: {got:?} vs oracle {want:?} at {vhat:?}"))?;
            let scaled = &got.1 * int(q.granularity());
            ensure(scaled.is_integer(), || format!("{name}: distance {} not a multiple of 1/{}", got.1, q.granularity()))?;
            queries += 1;
        }
    }
    Ok(format!("{queries} queries (l1, linf, 5 random Q per instance) match the oracle; distances on the 1/lcm(b) grid"))
}

fn fptas() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let mut runs = 0;
    let mut skipped_euclidean = 0;
    for (name, p) in selection_instances() {
        let k = p.k();
        let h = ParetoHandles::compute(&p).map_err(|e| e.to_string())?;
        let front = oracle::pareto_set(&p).map_err(|e| e.to_string())?;
        let mut norms = vec![PseudoNorm::power_sum(k, 4, rat(7, 10), Rational::one()).map_err(|e| e.to_string())?];
        match PseudoNorm::euclidean(k, rat(7, 10), Rational::one()) {
            Ok(pn) => norms.push(pn),
            Err(_) => skipped_euclidean += 1,
        }
        for pn in &norms {
            for eps in [rat(1, 2), rat(1, 10)] {
                let vhat: Vec<i64> = h.outcome_box.lower.iter().zip(&h.outcome_box.upper).map(|(&l, &u)| rng.gen_range(l - 1..=u + 1)).collect();
                let got = fptas_nearest_pseudonorm(&h.g_pareto, pn, &vhat, h.outcome_bound() + 1, &eps)
                    .map_err(|e| format!("{name}: {e}"))?;
                let (_, best) = oracle::oracle_nearest(&front, &NormSpec::Pseudo(pn.clone()), &vhat, &TermOrder::identity(k))
                    .map_err(|e| e.to_string())?;
                let factor = num_traits::pow(Rational::one() + &eps, pn.degree() as usize);
                ensure(front.contains(&got.point) && got.qvalue <= factor * &best, || {
                    format!("{name}, D={}, eps={eps}: q={} vs optimum {best}", pn.degree(), got.qvalue)
                })?;
                runs += 1;
            }
        }
    }
    for case in 0..50u64 {
        let p = oracle::random_instance(5000 + case, 2, 2);
        let h = ParetoHandles::compute(&p).map_err(|e| e.to_string())?;
        let pts = oracle::pareto_set(&p).map_err(|e| e.to_string())?;
        let bx = h.outcome_box.clone();
        let shifted: Vec<Polynomial> = (0..2)
            .map(|i| {
                let mut coeffs = vec![Rational::zero(); 2];
                coeffs[i] = Rational::one();
                Polynomial::affine(int(-bx.lower[i]), &coeffs)
            })
            .collect();
        // non-negative on the box
        let f = shifted[0]
            .scale(&int(rng.gen_range(0..=3)))
            .add(&shifted[1].mul(&shifted[1]).scale(&int(rng.gen_range(0..=2))))
            .add(&Polynomial::constant(2, Rational::one()));
        let eps = if case % 2 == 0 { rat(1, 2) } else { rat(1, 10) };
        let got = fptas_max_polynomial(&h.g_pareto, &f, &bx, &eps).map_err(|e| e.to_string())?;
        let max = oracle::max_over(&pts, &f).map_err(|e| e.to_string())?;
        let power = num_traits::pow(max.clone(), got.certificate.s as usize);
        ensure(got.certificate.lower <= power && power <= got.certificate.upper, || format!("sandwich case {case}"))?;
        ensure(got.value >= (Rational::one() - &eps) * &max, || format!("sandwich case {case}: value below (1 - eps) max"))?;
    }
    let h = ParetoHandles::compute(&oracle::e1()).map_err(|e| e.to_string())?;
    let euclid = PseudoNorm::euclidean(2, rat(7, 10), Rational::one()).map_err(|e| e.to_string())?;
    let e1 = fptas_nearest_pseudonorm(&h.g_pareto, &euclid, &[0, 0], h.outcome_bound() + 1, &rat(1, 10)).map_err(|e| e.to_string())?;
    ensure(e1.qvalue == int(5), || format!("E1 Euclidean from (0,0): {}", e1.qvalue))?;
    Ok(format!(
        "{runs} runs within (1+eps)^D; 50 moment sandwiches exact; E1 Euclidean = 5 \
         (Euclidean skipped on {skipped_euclidean} instances with k = 3: alpha = 7/10 exceeds 1/sqrt(3))"
    ))
}

fn determinism() -> Check {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems");
    let path = |n: &str| dir.join(n).to_str().unwrap().to_string();
    let (e1, e3, ord) = (path("e1.prob"), path("e3.prob"), path("identity2.ord"));
    let euclid = "pseudo 2 2 1 2 0 1 0 2 7/10 1";
    let commands: Vec<Vec<&str>> = vec![
        vec!["count", &e3],
        vec!["gf", &e3, "--which", "pareto"],
        vec!["gf", &e3, "--which", "strategies"],
        vec!["gf", &e3, "--which", "dominated"],
        vec!["enumerate", &e3, "--order", &ord],
        vec!["enumerate", &e3, "--set", "pairs", "--project", "3", "--limit", "5"],
        vec!["nearest", &e1, "--norm", "linf", "--point", "0 0"],
        vec!["rank", &e3, "--norm", "l1", "--point", "2 -2"],
        vec!["fptas", &e1, "--pseudo", euclid, "--point", "0 0", "--eps", "1/10"],
        vec!["fptas", &e3, "--pseudo", "lp-odd 3", "--point", "1 1", "--eps", "1/2"],
        vec!["ideal", &e3],
        vec!["oracle", "count", &e3],
        vec!["oracle", "enumerate", &e3],
        vec!["oracle", "nearest", &e1, "--norm", "l1", "--point", "0 0"],
        vec!["oracle", "rank", &e1, "--norm", "linf", "--point", "1 1"],
        vec!["oracle", "fptas", &e1, "--pseudo", euclid, "--point", "0 0", "--eps", "1/10"],
        vec!["oracle", "ideal", &e1],
    ];
    for args in &commands {
        let runs: Vec<_> = (0..3)
            .map(|_| Command::new(env!("CARGO_BIN_EXE_mcilp")).args(args).output().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        ensure(runs[0].status.success() && !runs[0].stdout.is_empty(), || {
            format!("{args:?} failed: {}", String::from_utf8_lossy(&runs[0].stderr))
        })?;
        ensure(runs.iter().all(|r| r.stdout == runs[0].stdout && r.status == runs[0].status), || {
            format!("{args:?}: output differs between runs")
        })?;
    }
    Ok(format!("{} commands byte-identical across 3 runs", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("counting", counting),
        ("gf-algebra", gf_algebra),
        ("enumeration", enumeration),
        ("polyhedral-selection", polyhedral_selection),
        ("fptas", fptas),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
