use mcilp_core::oracle;
use mcilp_core::select::{enumerate_by_distance, fptas_max_polynomial, fptas_nearest_pseudonorm, nearest_polyhedral};
use mcilp_core::{IntBox, NormSpec, ParetoHandles, PolyhedralNorm, Polynomial, Problem, PseudoNorm, Rational, TermOrder};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn problems() -> Vec<Problem> {
    let mut out = vec![oracle::e1(), oracle::e2(), oracle::e3()];
    out.extend((300..304).map(|seed| oracle::random_instance(seed, 2, 2)));
    out.extend((304..306).map(|seed| oracle::random_instance(seed, 2, 3)));
    out
}

fn random_reference(rng: &mut ChaCha8Rng, bx: &IntBox) -> Vec<i64> {
    bx.lower.iter().zip(&bx.upper).map(|(&l, &u)| rng.gen_range(l - 1..=u + 1)).collect()
}

#[test]
fn polyhedral_nearest_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in problems() {
        let k = p.k();
        let h = ParetoHandles::compute(&p).unwrap();
        let front = oracle::pareto_set(&p).unwrap();
        let mut norms = vec![PolyhedralNorm::l1(k), PolyhedralNorm::linf(k)];
        norms.extend((0..5).map(|i| oracle::random_symmetric_norm(rng.gen::<u64>() ^ i, k)));
        let order = TermOrder::identity(k);
        for q in &norms {
            let vhat = random_reference(&mut rng, &h.outcome_box);
            let m = h.outcome_bound() + 1;
            let (point, dist) = nearest_polyhedral(&h.g_pareto, q, &vhat, m, &order).unwrap();
            let (want, want_dist) = oracle::oracle_nearest(&front, &NormSpec::Polyhedral(q.clone()), &vhat, &order).unwrap();
            assert_eq!((point, dist.clone()), (want, want_dist));
            let scaled = dist * Rational::from_integer(BigInt::from(q.granularity()));
            assert!(scaled.is_integer());
        }
    }
}

#[test]
fn ranking_matches_oracle() {
    let p = oracle::e3();
    let h = ParetoHandles::compute(&p).unwrap();
    let front = oracle::pareto_set(&p).unwrap();
    let q = PolyhedralNorm::l1(2);
    let order = TermOrder::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
    let vhat = [1, -1];
    let ranked: Vec<(Vec<i64>, Rational)> = enumerate_by_distance(&h.g_pareto, &q, &vhat, h.outcome_bound() + 1, &order)
        .unwrap()
        .map(Result::unwrap)
        .collect();
    assert_eq!(ranked, oracle::rank_by_distance(&front, &NormSpec::Polyhedral(q), &vhat, &order));
}

#[test]
fn pseudo_norm_guarantee() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for p in problems() {
        let k = p.k();
        let h = ParetoHandles::compute(&p).unwrap();
        let front = oracle::pareto_set(&p).unwrap();
        let mut norms = vec![PseudoNorm::power_sum(k, 4, rat(7, 10), Rational::one()).unwrap()];
        if k <= 2 {
            norms.push(PseudoNorm::euclidean(k, rat(7, 10), Rational::one()).unwrap());
        }
        for pn in &norms {
            for eps in [rat(1, 2), rat(1, 10)] {
                let vhat = random_reference(&mut rng, &h.outcome_box);
                let m = h.outcome_bound() + 1;
                let got = fptas_nearest_pseudonorm(&h.g_pareto, pn, &vhat, m, &eps).unwrap();
                let order = TermOrder::identity(k);
                let (_, best) = oracle::oracle_nearest(&front, &NormSpec::Pseudo(pn.clone()), &vhat, &order).unwrap();
                assert!(front.contains(&got.point));
                assert_eq!(got.qvalue, pn.qvalue(&vhat, &got.point));
                let factor = num_traits::pow(Rational::one() + &eps, pn.degree() as usize);
                assert!(got.qvalue <= factor * best, "eps {eps}: {got:?}");
            }
        }
    }
}

#[test]
fn euclidean_rejected_in_three_dimensions() {
    assert!(PseudoNorm::euclidean(3, rat(7, 10), Rational::one()).is_err());
    assert!(PseudoNorm::power_sum(3, 4, rat(7, 10), Rational::one()).is_ok());
}

#[test]
fn moment_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..20u64 {
        let p = oracle::random_instance(400 + case, 2, 2);
        let h = ParetoHandles::compute(&p).unwrap();
        let pts = oracle::pareto_set(&p).unwrap();
        let bx = h.outcome_box.clone();
        // nonnegative on the box: a shifted linear form plus a square
        let shifted: Vec<Polynomial> = (0..2)
            .map(|i| {
                let mut coeffs = vec![Rational::zero(); 2];
                coeffs[i] = Rational::one();
                Polynomial::affine(Rational::from_integer(BigInt::from(-bx.lower[i])), &coeffs)
            })
            .collect();
        let a = Rational::from_integer(BigInt::from(rng.gen_range(0..=3)));
        let b = Rational::from_integer(BigInt::from(rng.gen_range(0..=2)));
        let f = shifted[0]
            .scale(&a)
            .add(&shifted[1].mul(&shifted[1]).scale(&b))
            .add(&Polynomial::constant(2, Rational::one()));
        let eps = if case % 2 == 0 { rat(1, 2) } else { rat(1, 10) };
        let got = fptas_max_polynomial(&h.g_pareto, &f, &bx, &eps).unwrap();
        let max = oracle::max_over(&pts, &f).unwrap();
        let power = num_traits::pow(max.clone(), got.certificate.s as usize);
        assert!(got.certificate.lower <= power && power <= got.certificate.upper, "case {case}");
        assert!(got.value >= (Rational::one() - &eps) * max);
    }
}
