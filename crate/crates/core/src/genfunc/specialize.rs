//! Evaluation at `x = 1`: counting and polynomial-weighted sums.
//!
//! Substituting `x = exp(t * lambda)` for a direction `lambda` that is not
//! orthogonal to any denominator vector turns every term into a Laurent
//! series in `t`; the sum of the constant coefficients is the value of the
//! whole (finite) sum at `t = 0`.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::par;
use crate::polyhedra::Rational;
use crate::polynomial::Polynomial;

use super::{GFTerm, Srf};

static BERNOULLI: RwLock<Vec<Rational>> = RwLock::new(Vec::new());

/// `B_0 ..= B_n` with `B_1 = -1/2`, i.e. `x / (e^x - 1) = sum B_n x^n / n!`.
fn bernoulli(n: usize) -> Vec<Rational> {
    {
        let cache = BERNOULLI.read().expect("bernoulli cache poisoned");
        if cache.len() > n {
            return cache[..=n].to_vec();
        }
    }
    let mut cache = BERNOULLI.write().expect("bernoulli cache poisoned");
    if cache.is_empty() {
        cache.push(Rational::one());
    }
    while cache.len() <= n {
        let m = cache.len();
        let mut binom = BigInt::one();
        let mut sum = Rational::zero();
        for (k, b) in cache.iter().enumerate() {
            sum += b * Rational::from_integer(binom.clone());
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        cache.push(-sum / Rational::from_integer(BigInt::from(m + 1)));
    }
    cache[..=n].to_vec()
}

fn factorials(n: usize) -> Vec<BigInt> {
    let mut f = vec![BigInt::one()];
    for i in 1..=n {
        let next = &f[i - 1] * BigInt::from(i);
        f.push(next);
    }
    f
}

fn int(x: i128) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

/// Truncated product of power series given by coefficient vectors of length
/// `len`.
fn mul_trunc(a: &[Rational], b: &[Rational], len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// `e^{a t}` up to `t^{len-1}`.
fn exp_series(a: i128, len: usize, fact: &[BigInt]) -> Vec<Rational> {
    let a = BigInt::from(a);
    let mut pow = BigInt::one();
    let mut out = Vec::with_capacity(len);
    for f in fact.iter().take(len) {
        out.push(Rational::new(pow.clone(), f.clone()));
        pow *= &a;
    }
    out
}

fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| i128::from(x) * i128::from(y)).sum()
}

/// First point `(1, t, t^2, ...)` of the moment curve, `t = 1, 2, ...`, not
/// orthogonal to any denominator vector of `g`.
pub fn pick_generic_lambda(g: &Srf) -> Vec<i64> {
    let dens = g.denominators();
    for t in 1i64.. {
        let mut lambda = Vec::with_capacity(g.dim);
        let mut p = 1i64;
        for _ in 0..g.dim {
            lambda.push(p);
            p = p.saturating_mul(t);
        }
        if dens.iter().all(|d| dot(&lambda, d) != 0) {
            return lambda;
        }
    }
    unreachable!("each denominator excludes finitely many parameters")
}

/// True iff `<lambda, d> < 0` for every denominator vector.
pub fn is_normalized(g: &Srf, lambda: &[i64]) -> bool {
    g.terms.iter().all(|t| t.denominators.iter().all(|d| dot(lambda, d) < 0))
}

/// Rewrites `1/(1 - x^d)` as `-x^{-d}/(1 - x^{-d})` wherever
/// `<lambda, d> > 0`, so every term expands in the direction where
/// `<lambda, .>` decreases. The encoded rational function is unchanged.
pub fn normalize_orientation(g: &Srf, lambda: &[i64]) -> Result<Srf> {
    if lambda.len() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: lambda.len() });
    }
    let mut terms = Vec::with_capacity(g.terms.len());
    for t in &g.terms {
        let mut coeff = t.coeff.clone();
        let mut numerator = t.numerator.clone();
        let mut denominators = Vec::with_capacity(t.denominators.len());
        for d in &t.denominators {
            let s = dot(lambda, d);
            if s == 0 {
                return Err(Error::NonGenericLambda);
            }
            if s > 0 {
                coeff = -coeff;
                for (c, x) in numerator.iter_mut().zip(d) {
                    *c -= x;
                }
                denominators.push(d.iter().map(|x| -x).collect());
            } else {
                denominators.push(d.clone());
            }
        }
        terms.push(GFTerm { coeff, numerator, denominators });
    }
    Ok(Srf { dim: g.dim, terms })
}

/// Constant coefficient of one term after `x = e^{t lambda}`.
fn term_constant(t: &GFTerm, lambda: &[i64]) -> Rational {
    let s = t.denominators.len();
    let len = s + 1;
    let fact = factorials(len);
    let bern = bernoulli(s);
    let a = dot(lambda, &t.numerator);
    let mut series = exp_series(a, len, &fact);
    let mut scale = t.coeff.clone();
    for d in &t.denominators {
        // 1/(1 - e^{bt}) = -(1/(bt)) * B(bt), B(x) = x/(e^x - 1)
        let b = dot(lambda, d);
        let mut pow = BigInt::one();
        let mut todd = Vec::with_capacity(len);
        for n in 0..len {
            todd.push(&bern[n] * Rational::new(pow.clone(), fact[n].clone()));
            pow *= BigInt::from(b);
        }
        series = mul_trunc(&series, &todd, len);
        scale /= -int(b);
    }
    scale * &series[s]
}

/// Value of the rational function at `x = 1` (the coefficient sum of the
/// expansion).
pub fn specialize_value(g: &Srf) -> Rational {
    if g.terms.is_empty() {
        return Rational::zero();
    }
    let lambda = pick_generic_lambda(g);
    let parts = par::map(&g.terms, |t| term_constant(t, &lambda));
    parts.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}

/// Number of points of the encoded finite set.
pub fn specialize_count(g: &Srf) -> Result<BigInt> {
    let v = specialize_value(g);
    if !v.is_integer() {
        return Err(Error::InvalidInput(format!("coefficient sum {v} is not an integer")));
    }
    Ok(v.to_integer())
}

/// Coefficients `s_n` of `sum_mu mu^m e^{u mu} = (d/du)^m 1/(1 - e^u)
/// = sum_n s_n u^{n-1-m}`, for `n < len`, evaluated at `u = b t` and
/// returned as series coefficients of `t^{n-1-m}`.
fn power_sum_series(m: usize, b: i128, len: usize, bern: &[Rational], fact: &[BigInt]) -> Vec<Rational> {
    let b = int(b);
    let mut out = Vec::with_capacity(len);
    for n in 0..len {
        // falling factorial (n-1)(n-2)...(n-m)
        let mut ff = BigInt::one();
        for i in 1..=m {
            ff *= BigInt::from(n as i64 - i as i64);
        }
        if ff.is_zero() || bern[n].is_zero() {
            out.push(Rational::zero());
            continue;
        }
        let e = n as i64 - 1 - m as i64;
        let bp = if e >= 0 {
            num_traits::pow(b.clone(), e as usize)
        } else {
            num_traits::pow(b.recip(), (-e) as usize)
        };
        out.push(-(&bern[n] / Rational::from_integer(fact[n].clone())) * Rational::from_integer(ff) * bp);
    }
    out
}

/// `sum_{mu >= 0} p(c + D mu) e^{<lambda, c + D mu> t}`, constant coefficient.
fn term_moment(t: &GFTerm, p: &Polynomial, lambda: &[i64]) -> Rational {
    let s = t.denominators.len();
    let forms: Vec<Polynomial> = (0..t.dim())
        .map(|i| {
            let coeffs: Vec<Rational> = t.denominators.iter().map(|d| int(d[i].into())).collect();
            Polynomial::affine(int(t.numerator[i].into()), &coeffs)
        })
        .collect();
    let h = if s == 0 {
        Polynomial::constant(0, p.eval(&t.numerator))
    } else {
        p.compose(&forms)
    };
    let a = dot(lambda, &t.numerator);
    let bs: Vec<i128> = t.denominators.iter().map(|d| dot(lambda, d)).collect();
    let max_order = s + h.terms().map(|(e, _)| e.iter().sum::<u32>() as usize).max().unwrap_or(0);
    let fact = factorials(max_order + 1);
    let bern = bernoulli(max_order + 1);
    let mut total = Rational::zero();
    for (beta, coeff) in h.terms() {
        // pole order of this monomial's product
        let order: usize = beta.iter().map(|&b| b as usize + 1).sum();
        let len = order + 1;
        let mut series = exp_series(a, len, &fact);
        for (j, &bj) in bs.iter().enumerate() {
            let factor = power_sum_series(beta[j] as usize, bj, len, &bern, &fact);
            series = mul_trunc(&series, &factor, len);
        }
        total += coeff * &series[order];
    }
    &t.coeff * total
}

/// `sum_{v in S} p(v)` over the encoded set `S`.
pub fn moment(g: &Srf, p: &Polynomial) -> Result<Rational> {
    if p.nvars() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: p.nvars() });
    }
    if g.terms.is_empty() || p.is_zero() {
        return Ok(Rational::zero());
    }
    let lambda = pick_generic_lambda(g);
    let parts = par::map(&g.terms, |t| term_moment(t, p, &lambda));
    Ok(parts.into_iter().fold(Rational::zero(), |acc, x| acc + x))
}

/// `sum_{v in S} f(v)^s`.
pub fn weighted_specialize(g: &Srf, f: &Polynomial, s: u32) -> Result<Rational> {
    if s == 0 {
        return Err(Error::InvalidInput("power must be positive".into()));
    }
    moment(g, &f.pow(s))
}
