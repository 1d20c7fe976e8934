//! Selecting points of an encoded set by distance to a reference point.
//!
//! Polyhedral norms are handled exactly: distances lie on the lattice
//! `(1/L) Z` with `L = lcm(b)`, so a binary search over that lattice with
//! counting queries finds the optimal radius, and the bisection enumerator
//! breaks ties. Pseudo-norms given by a homogeneous polynomial go through a
//! moment-based approximation scheme for maximizing a nonnegative
//! polynomial over the set.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::enumerate::{EnumerationStream, TermOrder};
use crate::error::{Error, Result};
use crate::genfunc::{moment, Srf};
use crate::linalg;
use crate::par;
use crate::polyhedra::{int_rational, IntBox, Polyhedron, Rational};
use crate::polynomial::{parse_rational, GridValues, Polynomial};
use crate::setops::{count_in_polytope, intersect_polytope};

/// Unit ball `Q = {y : A y <= b}`, bounded, centrally symmetric, with the
/// origin in its interior.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyhedralNorm {
    a: Vec<Vec<i64>>,
    b: Vec<i64>,
    dim: usize,
}

impl PolyhedralNorm {
    pub fn from_inequalities(a: Vec<Vec<i64>>, b: Vec<i64>) -> Result<Self> {
        let dim = a.first().map_or(0, |r| r.len());
        if dim == 0 {
            return Err(Error::InvalidInput("unit ball needs at least one inequality".into()));
        }
        if b.iter().any(|&x| x <= 0) {
            return Err(Error::InvalidInput("origin must lie in the interior of the unit ball".into()));
        }
        let q = Polyhedron::new(a, b, dim)?;
        if !q.is_bounded() {
            return Err(Error::InvalidInput("unit ball must be bounded".into()));
        }
        let verts: BTreeSet<Vec<Rational>> = q.vertices()?.into_iter().collect();
        let mirrored: BTreeSet<Vec<Rational>> = verts.iter().map(|v| v.iter().map(|x| -x).collect()).collect();
        if verts != mirrored {
            return Err(Error::InvalidInput("unit ball must be centrally symmetric".into()));
        }
        Ok(PolyhedralNorm { a: q.a, b: q.b, dim })
    }

    /// Convex hull of the given points; every point must be a vertex or lie
    /// in the hull, and the origin must be interior.
    pub fn from_vertices(points: &[Vec<Rational>]) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidInput("vertex list must be nonempty with equal lengths".into()));
        }
        // common denominator: points = w / den
        let den = points
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let scaled: Vec<Vec<i128>> = points
            .iter()
            .map(|p| {
                p.iter()
                    .map(|x| (x * Rational::from_integer(den.clone())).to_integer().to_i128().ok_or(Error::Overflow))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let den = den.to_i128().ok_or(Error::Overflow)?;
        let mut rows: BTreeSet<(Vec<i64>, i64)> = BTreeSet::new();
        for subset in linalg::combinations(scaled.len(), dim) {
            let m: Vec<Vec<i128>> = subset.iter().map(|&i| scaled[i].clone()).collect();
            // hyperplane a . x = 1 through the chosen points: (w_i / den) . a = 1
            let Some((num, d)) = linalg::solve(&m, &vec![den; dim]) else {
                continue;
            };
            if scaled.iter().any(|w| linalg::dot(&num, w) > d * den) {
                continue;
            }
            let mut row = num.clone();
            row.push(d);
            let row = linalg::primitive(&row);
            let (coeffs, rhs) = row.split_at(dim);
            let coeffs: Vec<i64> = coeffs.iter().map(|&x| i64::try_from(x).map_err(|_| Error::Overflow)).collect::<Result<_>>()?;
            rows.insert((coeffs, i64::try_from(rhs[0]).map_err(|_| Error::Overflow)?));
        }
        if rows.is_empty() {
            return Err(Error::InvalidInput("vertices must span a full-dimensional body around the origin".into()));
        }
        let (a, b): (Vec<Vec<i64>>, Vec<i64>) = rows.into_iter().unzip();
        let norm = PolyhedralNorm::from_inequalities(a, b)
            .map_err(|_| Error::InvalidInput("vertices must span a symmetric body with the origin inside".into()))?;
        // every facet found passes through given points; the hull must not
        // have facets through the origin, which the a.x = 1 form cannot see
        let q = norm.unit_ball();
        let hull: BTreeSet<Vec<Rational>> = q.vertices()?.into_iter().collect();
        let given: BTreeSet<Vec<Rational>> = points.iter().cloned().collect();
        if !hull.is_subset(&given) {
            return Err(Error::InvalidInput("origin must lie in the interior of the hull".into()));
        }
        Ok(norm)
    }

    pub fn linf(k: usize) -> Self {
        let mut a = Vec::new();
        for i in 0..k {
            for s in [1, -1] {
                let mut row = vec![0; k];
                row[i] = s;
                a.push(row);
            }
        }
        let b = vec![1; a.len()];
        PolyhedralNorm { a, b, dim: k }
    }

    pub fn l1(k: usize) -> Self {
        let a: Vec<Vec<i64>> = (0..1usize << k)
            .map(|mask| (0..k).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
            .collect();
        let b = vec![1; a.len()];
        PolyhedralNorm { a, b, dim: k }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.a
    }

    pub fn rhs(&self) -> &[i64] {
        &self.b
    }

    pub fn unit_ball(&self) -> Polyhedron {
        Polyhedron { a: self.a.clone(), b: self.b.clone(), dim: self.dim }
    }

    /// `lcm(b_1, ..., b_m)`: every distance is a multiple of its inverse.
    pub fn granularity(&self) -> i64 {
        self.b.iter().fold(1, |acc, &x| acc.lcm(&x))
    }

    /// Largest absolute entry of `A` (at least 1).
    pub fn max_entry(&self) -> i64 {
        self.a.iter().flatten().map(|x| x.abs()).max().unwrap_or(1).max(1)
    }

    pub fn distance(&self, vhat: &[i64], v: &[i64]) -> Rational {
        minkowski_distance(self, vhat, v)
    }

    /// `(vhat + (t / L) Q) ∩ [-m, m]^k` with `L` the granularity.
    fn ball(&self, vhat: &[i64], t: i64, m: i64) -> Result<Polyhedron> {
        let l = i128::from(self.granularity());
        let mut a = Vec::with_capacity(self.a.len() + 2 * self.dim);
        let mut b = Vec::with_capacity(self.a.len() + 2 * self.dim);
        for (row, &bi) in self.a.iter().zip(&self.b) {
            let r = linalg::to_i128(row);
            let scaled: Vec<i128> = r.iter().map(|x| x * l).collect();
            let rhs = i128::from(t) * i128::from(bi) + l * linalg::dot(&r, &linalg::to_i128(vhat));
            a.push(checked_row(&scaled)?);
            b.push(i64::try_from(rhs).map_err(|_| Error::Overflow)?);
        }
        add_cube(&mut a, &mut b, self.dim, m);
        Polyhedron::new(a, b, self.dim)
    }
}

fn checked_row(v: &[i128]) -> Result<Vec<i64>> {
    v.iter().map(|&x| i64::try_from(x).map_err(|_| Error::Overflow)).collect()
}

fn add_cube(a: &mut Vec<Vec<i64>>, b: &mut Vec<i64>, k: usize, m: i64) {
    for i in 0..k {
        for s in [1, -1] {
            let mut row = vec![0; k];
            row[i] = s;
            a.push(row);
            b.push(m);
        }
    }
}

fn cube_polytope(k: usize, m: i64) -> Polyhedron {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    add_cube(&mut a, &mut b, k, m);
    Polyhedron { a, b, dim: k }
}

/// `max(0, max_i (A (v - vhat))_i / b_i)`.
pub fn minkowski_distance(q: &PolyhedralNorm, vhat: &[i64], v: &[i64]) -> Rational {
    let diff: Vec<i128> = v.iter().zip(vhat).map(|(&x, &y)| i128::from(x) - i128::from(y)).collect();
    q.a.iter()
        .zip(&q.b)
        .map(|(row, &bi)| {
            let num = linalg::dot(&linalg::to_i128(row), &diff);
            Rational::new(BigInt::from(num), BigInt::from(bi))
        })
        .fold(Rational::zero(), |acc, x| if x > acc { x } else { acc })
}

/// Homogeneous polynomial gauge: `Q = {y : q(y) <= 1}` of even degree `D`
/// with `alpha B_inf ⊆ Q ⊆ beta B_inf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoNorm {
    q: Polynomial,
    degree: u32,
    alpha: Rational,
    beta: Rational,
}

impl PseudoNorm {
    /// Validates degree and constants, and samples the containments on a
    /// grid of the cube boundary.
    pub fn new(q: Polynomial, degree: u32, alpha: Rational, beta: Rational) -> Result<Self> {
        match q.homogeneous_degree() {
            Some(d) if d == degree && d > 0 && d % 2 == 0 => {}
            _ => {
                return Err(Error::InvalidInput(format!(
                    "q must be homogeneous of positive even degree {degree}"
                )))
            }
        }
        if !alpha.is_positive() || alpha > beta {
            return Err(Error::InvalidInput("constants must satisfy 0 < alpha <= beta".into()));
        }
        let pn = PseudoNorm { q, degree, alpha, beta };
        pn.check_containment()?;
        Ok(pn)
    }

    /// Sum of squares, `D = 2`.
    pub fn euclidean(k: usize, alpha: Rational, beta: Rational) -> Result<Self> {
        PseudoNorm::power_sum(k, 2, alpha, beta)
    }

    /// `sum_i y_i^D` for even `D`.
    pub fn power_sum(k: usize, degree: u32, alpha: Rational, beta: Rational) -> Result<Self> {
        let terms = (0..k)
            .map(|i| {
                let mut e = vec![0; k];
                e[i] = degree;
                (Rational::one(), e)
            })
            .collect();
        PseudoNorm::new(Polynomial::from_terms(k, terms)?, degree, alpha, beta)
    }

    pub fn q(&self) -> &Polynomial {
        &self.q
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn dim(&self) -> usize {
        self.q.nvars()
    }

    /// `q(v - vhat)`, the `D`-th power of the distance.
    pub fn qvalue(&self, vhat: &[i64], v: &[i64]) -> Rational {
        let y: Vec<i64> = v.iter().zip(vhat).map(|(a, b)| a - b).collect();
        self.q.eval(&y)
    }

    fn check_containment(&self) -> Result<()> {
        let k = self.dim();
        let steps: i64 = if k <= 3 { 8 } else { 4 };
        let grid = IntBox::cube(k, steps);
        let step = Rational::new(BigInt::one(), BigInt::from(steps));
        let lo = pow(&self.beta, self.degree).recip();
        let hi = pow(&self.alpha, self.degree).recip();
        for y in grid.points() {
            if !y.iter().any(|c| c.abs() == steps) {
                continue;
            }
            let point: Vec<Rational> = y.iter().map(|&c| int_rational(c) * &step).collect();
            let value = self.q.eval_rational(&point);
            if value < lo || value > hi {
                let shown: Vec<String> = point.iter().map(|x| x.to_string()).collect();
                return Err(Error::InvalidInput(format!(
                    "containment constants violated at y = ({}), q(y) = {value}",
                    shown.join(", ")
                )));
            }
        }
        Ok(())
    }
}

fn pow(r: &Rational, e: u32) -> Rational {
    num_traits::pow(r.clone(), e as usize)
}

/// Any supported distance specification.
#[derive(Clone, Debug)]
pub enum NormSpec {
    Polyhedral(PolyhedralNorm),
    Pseudo(PseudoNorm),
    OddLp(u32),
}

impl NormSpec {
    /// Parses `linf`, `l1`, `poly-ineq <m> <k> A b`, `poly-verts <count> <k>
    /// coords`, `pseudo <D> <polynomial> <alpha> <beta>` or `lp-odd <p>`, for
    /// outcome dimension `k`.
    pub fn parse(text: &str, k: usize) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let kind = tokens.next().ok_or_else(|| Error::Parse("empty norm specification".into()))?;
        let spec = match kind {
            "linf" => NormSpec::Polyhedral(PolyhedralNorm::linf(k)),
            "l1" => NormSpec::Polyhedral(PolyhedralNorm::l1(k)),
            "poly-ineq" => {
                let rows = next_usize(&mut tokens)?;
                expect_dim(next_usize(&mut tokens)?, k)?;
                let mut a = Vec::with_capacity(rows);
                for _ in 0..rows {
                    a.push((0..k).map(|_| next_i64(&mut tokens)).collect::<Result<Vec<_>>>()?);
                }
                let b = (0..rows).map(|_| next_i64(&mut tokens)).collect::<Result<Vec<_>>>()?;
                NormSpec::Polyhedral(PolyhedralNorm::from_inequalities(a, b)?)
            }
            "poly-verts" => {
                let count = next_usize(&mut tokens)?;
                expect_dim(next_usize(&mut tokens)?, k)?;
                let mut pts = Vec::with_capacity(count);
                for _ in 0..count {
                    pts.push((0..k).map(|_| next_rational(&mut tokens)).collect::<Result<Vec<_>>>()?);
                }
                NormSpec::Polyhedral(PolyhedralNorm::from_vertices(&pts)?)
            }
            "pseudo" => {
                let degree = next_usize(&mut tokens)? as u32;
                let q = Polynomial::parse_tokens(k, &mut tokens)?;
                let alpha = next_rational(&mut tokens)?;
                let beta = next_rational(&mut tokens)?;
                NormSpec::Pseudo(PseudoNorm::new(q, degree, alpha, beta)?)
            }
            "lp-odd" => {
                let p = next_usize(&mut tokens)? as u32;
                if p.is_multiple_of(2) {
                    return Err(Error::InvalidInput(format!("lp-odd needs an odd exponent, got {p}")));
                }
                NormSpec::OddLp(p)
            }
            other => return Err(Error::Parse(format!("unknown norm `{other}`"))),
        };
        if let Some(t) = tokens.next() {
            return Err(Error::Parse(format!("trailing input `{t}` in norm specification")));
        }
        Ok(spec)
    }

    /// The exact quantity the norm minimizes: the distance for polyhedral
    /// norms, `q(v - vhat)` for pseudo-norms and `sum |y_i|^p` for odd `p`.
    pub fn measure(&self, vhat: &[i64], v: &[i64]) -> Rational {
        match self {
            NormSpec::Polyhedral(q) => minkowski_distance(q, vhat, v),
            NormSpec::Pseudo(pn) => pn.qvalue(vhat, v),
            NormSpec::OddLp(p) => odd_power_sum(*p, vhat, v),
        }
    }
}

fn odd_power_sum(p: u32, vhat: &[i64], v: &[i64]) -> Rational {
    let total: BigInt = v
        .iter()
        .zip(vhat)
        .map(|(a, b)| num_traits::pow(BigInt::from(a - b).abs(), p as usize))
        .sum();
    Rational::from_integer(total)
}

fn expect_dim(found: usize, k: usize) -> Result<()> {
    if found != k {
        return Err(Error::DimensionMismatch { expected: k, found });
    }
    Ok(())
}

fn next_token<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<&'a str> {
    tokens.next().ok_or_else(|| Error::Parse("unexpected end of norm specification".into()))
}

fn next_usize<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<usize> {
    let t = next_token(tokens)?;
    t.parse().map_err(|_| Error::Parse(format!("invalid count `{t}`")))
}

fn next_i64<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<i64> {
    let t = next_token(tokens)?;
    t.parse().map_err(|_| Error::Parse(format!("invalid integer `{t}`")))
}

fn next_rational<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<Rational> {
    parse_rational(next_token(tokens)?)
}

fn check_set(g: &Srf, vhat: &[i64], order: &TermOrder) -> Result<()> {
    if vhat.len() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: vhat.len() });
    }
    if order.p() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: order.p() });
    }
    Ok(())
}

fn search_limit(q: &PolyhedralNorm, vhat: &[i64], m: i64) -> Result<i64> {
    // distances are at most k a (M + max |vhat_i|)
    let reach = m + vhat.iter().map(|x| x.abs()).max().unwrap_or(0);
    let bound = i128::from(q.dim as i64) * i128::from(q.max_entry()) * i128::from(reach) * i128::from(q.granularity());
    i64::try_from(bound).map_err(|_| Error::Overflow)
}

/// Smallest `t` in `[lo, hi]` with `pred(t)`, given `pred(hi)` and
/// monotonicity.
fn first_true(mut lo: i64, mut hi: i64, mut pred: impl FnMut(i64) -> Result<bool>) -> Result<i64> {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// A point of the set nearest to `vhat` under `q`, the `R`-least among all
/// nearest points, and its exact distance.
pub fn nearest_polyhedral(
    g: &Srf,
    q: &PolyhedralNorm,
    vhat: &[i64],
    m: i64,
    order: &TermOrder,
) -> Result<(Vec<i64>, Rational)> {
    check_set(g, vhat, order)?;
    if q.dim != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: q.dim });
    }
    if count_in_polytope(g, &cube_polytope(g.dim, m))?.is_zero() {
        return Err(Error::EmptySet);
    }
    let limit = search_limit(q, vhat, m)?;
    let t = first_true(0, limit, |t| Ok(!count_in_polytope(g, &q.ball(vhat, t, m)?)?.is_zero()))?;
    let inside = intersect_polytope(g, &q.ball(vhat, t, m)?)?;
    let mut stream = EnumerationStream::new(Arc::new(inside), m, order.clone())?;
    let point = stream.next().ok_or(Error::EmptySet)??;
    Ok((point, Rational::new(BigInt::from(t), BigInt::from(q.granularity()))))
}

/// Stream of `(point, distance)` sorted by distance, then by the term order.
pub struct DistanceStream {
    g: Arc<Srf>,
    norm: PolyhedralNorm,
    vhat: Vec<i64>,
    m: i64,
    order: TermOrder,
    limit: i64,
    total: BigInt,
    /// last radius whose ball has been fully emitted, with its count
    done_radius: Option<i64>,
    done_count: BigInt,
    shell: Option<(EnumerationStream, Rational)>,
    failed: bool,
}

impl DistanceStream {
    fn advance(&mut self) -> Result<Option<(Vec<i64>, Rational)>> {
        loop {
            if let Some((stream, dist)) = &mut self.shell {
                match stream.next() {
                    Some(p) => return Ok(Some((p?, dist.clone()))),
                    None => self.shell = None,
                }
            }
            if self.done_count >= self.total {
                return Ok(None);
            }
            let start = self.done_radius.map_or(0, |r| r + 1);
            let (g, norm, vhat, m) = (&self.g, &self.norm, &self.vhat, self.m);
            let done = self.done_count.clone();
            let t = first_true(start, self.limit, |t| Ok(count_in_polytope(g, &norm.ball(vhat, t, m)?)? > done))?;
            let outer = intersect_polytope(g, &norm.ball(vhat, t, m)?)?;
            let shell = match self.done_radius {
                Some(r) => crate::setops::simplify(&outer.sub(&intersect_polytope(g, &norm.ball(vhat, r, m)?)?)?),
                None => outer,
            };
            self.done_count = count_in_polytope(g, &norm.ball(vhat, t, m)?)?;
            self.done_radius = Some(t);
            let dist = Rational::new(BigInt::from(t), BigInt::from(norm.granularity()));
            self.shell = Some((EnumerationStream::new(Arc::new(shell), m, self.order.clone())?, dist));
        }
    }
}

impl Iterator for DistanceStream {
    type Item = Result<(Vec<i64>, Rational)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.advance() {
            Ok(Some(x)) => Some(Ok(x)),
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// All points of the set, nearest first, ties in term order.
pub fn enumerate_by_distance(
    g: &Srf,
    q: &PolyhedralNorm,
    vhat: &[i64],
    m: i64,
    order: &TermOrder,
) -> Result<DistanceStream> {
    check_set(g, vhat, order)?;
    if q.dim != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: q.dim });
    }
    let total = count_in_polytope(g, &cube_polytope(g.dim, m))?;
    Ok(DistanceStream {
        g: Arc::new(g.clone()),
        norm: q.clone(),
        vhat: vhat.to_vec(),
        m,
        order: order.clone(),
        limit: search_limit(q, vhat, m)?,
        total,
        done_radius: None,
        done_count: BigInt::zero(),
        shell: None,
        failed: false,
    })
}

/// Minimizes `<c, v>` over the set; returns the lexicographically least
/// minimizer and the minimum.
pub fn minimize_linear_over_set(g: &Srf, c: &[i64], m: i64) -> Result<(Vec<i64>, i64)> {
    let k = g.dim;
    if c.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: c.len() });
    }
    if count_in_polytope(g, &cube_polytope(k, m))?.is_zero() {
        return Err(Error::EmptySet);
    }
    let reach: i64 = c.iter().map(|x| x.abs()).sum::<i64>().checked_mul(m).ok_or(Error::Overflow)?;
    let halfspace = |theta: i64, exact: bool| {
        let (mut a, mut b) = (vec![c.to_vec()], vec![theta]);
        if exact {
            a.push(c.iter().map(|x| -x).collect());
            b.push(-theta);
        }
        add_cube(&mut a, &mut b, k, m);
        Polyhedron::new(a, b, k)
    };
    let theta = first_true(-reach, reach, |t| Ok(!count_in_polytope(g, &halfspace(t, false)?)?.is_zero()))?;
    let level = intersect_polytope(g, &halfspace(theta, true)?)?;
    let mut stream = EnumerationStream::new(Arc::new(level), m, TermOrder::identity(k))?;
    let point = stream.next().ok_or(Error::EmptySet)??;
    Ok((point, theta))
}

/// Moment bounds behind an approximate maximum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentCertificate {
    pub s: u32,
    pub count: BigInt,
    /// `L_s / |V|`, a lower bound on `(max f)^s`.
    pub lower: Rational,
    /// `L_s = sum_V f^s`, an upper bound on `(max f)^s`.
    pub upper: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxResult {
    pub point: Vec<i64>,
    pub value: Rational,
    pub certificate: MomentCertificate,
}

/// Smallest `s >= 1` with `n (1 - eps)^s <= 1`.
pub fn moment_power(n: &BigInt, eps: &Rational) -> Result<u32> {
    if !eps.is_positive() || *eps >= Rational::one() {
        return Err(Error::InvalidInput("eps must lie in (0, 1)".into()));
    }
    let base = Rational::one() - eps;
    let mut acc = Rational::from_integer(n.clone()) * &base;
    let mut s = 1u32;
    while acc > Rational::one() {
        acc *= &base;
        s += 1;
        if s > 100_000 {
            return Err(Error::TooLarge(format!("moment power for |V| = {n}")));
        }
    }
    Ok(s)
}

/// A point `v` of the set with `f(v) >= (1 - eps) max f`, for `f >= 0` on
/// the set and the set inside `bx`.
pub fn fptas_max_polynomial(g: &Srf, f: &Polynomial, bx: &IntBox, eps: &Rational) -> Result<MaxResult> {
    let k = g.dim;
    if f.nvars() != k || bx.dim() != k {
        return Err(Error::DimensionMismatch { expected: k, found: f.nvars().max(bx.dim()) });
    }
    let n = count_in_polytope(g, &bx.to_polyhedron())?;
    if n.is_zero() {
        return Err(Error::EmptySet);
    }
    let s = moment_power(&n, eps)?;
    // f^s is only needed on the grid of the box, where it is kept by value
    let power = GridValues::from_polynomial(f, bx).pow(s);
    let total = grid_moment(g, &power)?;
    if total.is_negative() {
        return Err(Error::NegativeMoment);
    }
    let lower = &total / Rational::from_integer(n.clone());

    // keep the half with the larger average, which never drops below the
    // global average L_s / |V|
    let mut current = g.clone();
    let mut region = bx.clone();
    let mut weight = power;
    while region.volume() > 1 {
        let axis = (0..k).max_by_key(|&i| (region.upper[i] - region.lower[i], std::cmp::Reverse(i))).expect("k > 0");
        let mid = (region.lower[axis] + region.upper[axis]).div_euclid(2);
        let mut left = region.clone();
        left.upper[axis] = mid;
        let mut right = region.clone();
        right.lower[axis] = mid + 1;
        let halves = par::try_map(&[left, right], |half| {
            let part = intersect_polytope(&current, &half.to_polyhedron())?;
            let count = count_in_polytope(&part, &half.to_polyhedron())?;
            let w = weight.restrict(half).expect("halves lie in the region");
            let mass = if count.is_zero() { Rational::zero() } else { grid_moment(&part, &w)? };
            if mass.is_negative() {
                return Err(Error::NegativeMoment);
            }
            Ok((half.clone(), part, count, w, mass))
        })?;
        let best = halves
            .into_iter()
            .filter(|h| !h.2.is_zero())
            .map(|h| {
                let avg = &h.4 / Rational::from_integer(h.2.clone());
                (avg, h)
            })
            .fold(None::<(Rational, _)>, |acc, (avg, h)| match acc {
                Some((a, x)) if a >= avg => Some((a, x)),
                _ => Some((avg, h)),
            })
            .ok_or(Error::EmptySet)?
            .1;
        region = best.0;
        current = best.1;
        weight = best.3;
    }
    let point = region.lower.clone();
    Ok(MaxResult {
        value: f.eval(&point),
        point,
        certificate: MomentCertificate { s, count: n, lower, upper: total },
    })
}

/// `sum_{v in S} w(v)` for a set inside the grid of `w`. Monomial terms
/// read their value off the grid; the remaining terms are summed through
/// the interpolating polynomial. Their total is a polynomial sum, so any
/// direction generic for them alone gives the same value.
fn grid_moment(g: &Srf, w: &GridValues) -> Result<Rational> {
    let mut total = Rational::zero();
    let mut rest = Vec::new();
    for t in &g.terms {
        match (t.denominators.is_empty(), w.at(&t.numerator)) {
            (true, Some(value)) => total += &t.coeff * &value,
            _ => rest.push(t.clone()),
        }
    }
    if !rest.is_empty() {
        total += moment(&Srf { dim: g.dim, terms: rest }, &w.to_polynomial())?;
    }
    Ok(total)
}

/// Result of the pseudo-norm approximation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoResult {
    pub point: Vec<i64>,
    /// `q(point - vhat)`, the `D`-th power of the distance.
    pub qvalue: Rational,
    pub gamma: i64,
    pub delta: Rational,
    pub eps_prime: Rational,
    /// `None` when the reference point itself belongs to the set.
    pub certificate: Option<MomentCertificate>,
    /// Decimal bracket of the distance `qvalue^(1/D)` to 40 digits.
    pub distance_bracket: (String, String),
}

/// `eps D / ((beta / alpha)^(2D) - 1)`, replaced by 1/2 when that is at
/// least 1 or undefined.
pub fn calibrated_eps(eps: &Rational, degree: u32, alpha: &Rational, beta: &Rational) -> Rational {
    let ratio = pow(&(beta / alpha), 2 * degree) - Rational::one();
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    if ratio.is_zero() {
        return half;
    }
    let e = eps * Rational::from_integer(BigInt::from(degree)) / ratio;
    if e >= Rational::one() {
        half
    } else {
        e
    }
}

/// A point `v` with `q(v - vhat) <= (1 + eps)^D min q`.
pub fn fptas_nearest_pseudonorm(g: &Srf, pn: &PseudoNorm, vhat: &[i64], m: i64, eps: &Rational) -> Result<PseudoResult> {
    if pn.dim() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: pn.dim() });
    }
    pseudo_core(g, pn.q(), pn.degree(), pn.alpha(), pn.beta(), vhat, m, eps)
}

#[allow(clippy::too_many_arguments)]
fn pseudo_core(
    g: &Srf,
    q: &Polynomial,
    degree: u32,
    alpha: &Rational,
    beta: &Rational,
    vhat: &[i64],
    m: i64,
    eps: &Rational,
) -> Result<PseudoResult> {
    let k = g.dim;
    if vhat.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: vhat.len() });
    }
    if !eps.is_positive() || *eps >= Rational::one() {
        return Err(Error::InvalidInput("eps must lie in (0, 1)".into()));
    }
    let outer = cube_polytope(k, m);
    if count_in_polytope(g, &outer)?.is_zero() {
        return Err(Error::EmptySet);
    }
    let cube = |r: i64| -> Option<IntBox> {
        let around = IntBox { lower: vhat.iter().map(|x| x - r).collect(), upper: vhat.iter().map(|x| x + r).collect() };
        around.intersect(&IntBox::cube(k, m))
    };
    let reach = m + vhat.iter().map(|x| x.abs()).max().unwrap_or(0);
    let gamma = first_true(0, reach, |r| match cube(r) {
        Some(b) => Ok(!count_in_polytope(g, &b.to_polyhedron())?.is_zero()),
        None => Ok(false),
    })?;
    if gamma == 0 {
        return Ok(PseudoResult {
            point: vhat.to_vec(),
            qvalue: Rational::zero(),
            gamma,
            delta: Rational::zero(),
            eps_prime: Rational::zero(),
            certificate: None,
            distance_bracket: root_bracket(&Rational::zero(), degree),
        });
    }
    let gamma_q = int_rational(gamma);
    let delta = beta * &gamma_q / alpha;
    let radius = delta.floor().to_integer().to_i64().ok_or(Error::Overflow)?;
    // the set lies in its own bounding box, so clipping the region to it
    // changes nothing but the size of the grid the weights live on
    let hull = set_bounds(g, m)?;
    let region = cube(radius).and_then(|b| b.intersect(&hull)).ok_or(Error::EmptySet)?;
    let local = intersect_polytope(g, &region.to_polyhedron())?;
    let top = pow(&(beta * &gamma_q / (alpha * alpha)), degree);
    let f = Polynomial::constant(k, top).add(&q.translate(vhat).scale(&-Rational::one()));
    let eps_prime = calibrated_eps(eps, degree, alpha, beta);
    let best = fptas_max_polynomial(&local, &f, &region, &eps_prime)?;
    let y: Vec<i64> = best.point.iter().zip(vhat).map(|(a, b)| a - b).collect();
    let qvalue = q.eval(&y);
    Ok(PseudoResult {
        distance_bracket: root_bracket(&qvalue, degree),
        point: best.point,
        qvalue,
        gamma,
        delta,
        eps_prime,
        certificate: Some(best.certificate),
    })
}

/// The smallest box holding every point of `g` inside `[-m, m]^k`.
fn set_bounds(g: &Srf, m: i64) -> Result<IntBox> {
    let k = g.dim;
    let mut lower = Vec::with_capacity(k);
    let mut upper = Vec::with_capacity(k);
    for i in 0..k {
        let mut c = vec![0; k];
        c[i] = 1;
        lower.push(minimize_linear_over_set(g, &c, m)?.1);
        c[i] = -1;
        upper.push(-minimize_linear_over_set(g, &c, m)?.1);
    }
    Ok(IntBox { lower, upper })
}

/// Odd `p`: one approximation per orthant around `vhat`, where
/// `sum |y_i|^p` is the polynomial `sum sigma_i y_i^p`; the best candidate
/// wins, earlier orthants on ties. The reported `qvalue` is `sum |y_i|^p`.
pub fn nearest_odd_lp(g: &Srf, p: u32, vhat: &[i64], m: i64, eps: &Rational) -> Result<PseudoResult> {
    let k = g.dim;
    if p.is_multiple_of(2) || p == 0 {
        return Err(Error::InvalidInput(format!("expected an odd exponent, got {p}")));
    }
    if vhat.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: vhat.len() });
    }
    // ||y||_inf <= ||y||_p <= k^(1/p) ||y||_inf: beta = 1 and alpha a
    // rational lower bound on k^(-1/p)
    let alpha = odd_alpha(k, p);
    let beta = Rational::one();
    let orthants: Vec<usize> = (0..1usize << k).collect();
    let candidates = par::try_map(&orthants, |&mask| {
        let signs: Vec<i64> = (0..k).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for i in 0..k {
            let mut row = vec![0; k];
            row[i] = -signs[i];
            a.push(row);
            b.push(-signs[i] * vhat[i]);
        }
        add_cube(&mut a, &mut b, k, m);
        let region = Polyhedron::new(a, b, k)?;
        let part = intersect_polytope(g, &region)?;
        if count_in_polytope(&part, &cube_polytope(k, m))?.is_zero() {
            return Ok(None);
        }
        let terms = (0..k)
            .map(|i| {
                let mut e = vec![0; k];
                e[i] = p;
                (int_rational(signs[i]), e)
            })
            .collect();
        let q = Polynomial::from_terms(k, terms)?;
        pseudo_core(&part, &q, p, &alpha, &beta, vhat, m, eps).map(Some)
    })?;
    candidates
        .into_iter()
        .flatten()
        .fold(None::<PseudoResult>, |acc, c| match acc {
            Some(a) if a.qvalue <= c.qvalue => Some(a),
            _ => Some(c),
        })
        .ok_or(Error::EmptySet)
}

/// Largest `j / 1000` with `k (j / 1000)^p <= 1`.
fn odd_alpha(k: usize, p: u32) -> Rational {
    let den = BigInt::from(1000);
    let limit = num_traits::pow(den.clone(), p as usize);
    let mut j: i64 = 1000;
    while j > 1 && BigInt::from(k) * num_traits::pow(BigInt::from(j), p as usize) > limit {
        j -= 1;
    }
    Rational::new(BigInt::from(j), den)
}

/// `[lo, hi]` with `lo <= value^(1/degree) <= hi`, both with 40 decimals.
pub fn root_bracket(value: &Rational, degree: u32) -> (String, String) {
    let scale = num_traits::pow(BigInt::from(10), 40 * degree as usize);
    let scaled = (value * Rational::from_integer(scale)).floor().to_integer();
    let root = scaled.nth_root(degree);
    let exact = num_traits::pow(root.clone(), degree as usize) == scaled
        && (value * Rational::from_integer(num_traits::pow(BigInt::from(10), 40 * degree as usize))).is_integer();
    let hi = if exact { root.clone() } else { &root + 1 };
    (decimal(&root), decimal(&hi))
}

fn decimal(scaled: &BigInt) -> String {
    let digits = scaled.to_string();
    let padded = format!("{digits:0>41}");
    let (int, frac) = padded.split_at(padded.len() - 40);
    format!("{int}.{frac}")
}
