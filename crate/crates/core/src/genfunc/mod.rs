//! Short rational generating functions.
//!
//! A finite set `S` of lattice points is encoded as
//! `sum_i coeff_i * x^{c_i} / prod_j (1 - x^{d_ij})`. Every term produced by
//! this crate has linearly independent denominator vectors that generate a
//! saturated lattice, so the term's formal series is the indicator of
//! `c_i + D_i N^s` scaled by `coeff_i`.

mod barvinok;
mod specialize;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::polyhedra::{IntBox, Polyhedron, Rational};
use crate::polynomial::{format_rational, parse_rational};

pub use barvinok::{gf_of_polytope, unimodular_decompose, Cone};
pub use specialize::{
    is_normalized, moment, normalize_orientation, pick_generic_lambda, specialize_count, specialize_value,
    weighted_specialize,
};

/// `coeff * x^numerator / prod (1 - x^d)` over `d` in `denominators`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GFTerm {
    pub coeff: Rational,
    pub numerator: Vec<i64>,
    pub denominators: Vec<Vec<i64>>,
}

impl GFTerm {
    pub fn new(coeff: Rational, numerator: Vec<i64>, denominators: Vec<Vec<i64>>) -> Self {
        GFTerm { coeff, numerator, denominators }
    }

    pub fn monomial(v: Vec<i64>) -> Self {
        GFTerm { coeff: Rational::one(), numerator: v, denominators: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.numerator.len()
    }

    /// Numerator and sorted denominators; equal keys mean equal rational
    /// functions up to the coefficient.
    pub fn key(&self) -> (Vec<i64>, Vec<Vec<i64>>) {
        let mut d = self.denominators.clone();
        d.sort();
        (self.numerator.clone(), d)
    }

    /// Checks that the denominators are independent and generate a
    /// saturated lattice.
    pub fn check_saturated(&self) -> Result<()> {
        if self.denominators.is_empty() {
            return Ok(());
        }
        let cols: Vec<Vec<i128>> = self.denominators.iter().map(|d| linalg::to_i128(d)).collect();
        if self.denominators.len() > self.dim() || linalg::maximal_minor_gcd(&cols) != 1 {
            return Err(Error::NonSaturatedTerm);
        }
        Ok(())
    }

    /// `{mu >= 0 : lo <= c + D mu <= hi}` in the coordinates `mu`.
    pub(crate) fn parameter_polytope(&self, window: &IntBox) -> Polyhedron {
        let s = self.denominators.len();
        let mut a = Vec::with_capacity(s + 2 * self.dim());
        let mut b = Vec::with_capacity(s + 2 * self.dim());
        for j in 0..s {
            let mut row = vec![0; s];
            row[j] = -1;
            a.push(row);
            b.push(0);
        }
        for i in 0..self.dim() {
            let row: Vec<i64> = self.denominators.iter().map(|d| d[i]).collect();
            a.push(row.clone());
            b.push(window.upper[i] - self.numerator[i]);
            a.push(row.iter().map(|x| -x).collect());
            b.push(self.numerator[i] - window.lower[i]);
        }
        Polyhedron::new(a, b, s).expect("consistent shapes")
    }

    /// The points `c + D mu` (`mu >= 0` integral) inside `window`.
    pub fn points_in(&self, window: &IntBox) -> Result<Vec<Vec<i64>>> {
        if self.denominators.is_empty() {
            return Ok(if window.contains(&self.numerator) { vec![self.numerator.clone()] } else { Vec::new() });
        }
        let mus = self.parameter_polytope(window).lattice_points(10_000_000)?;
        Ok(mus.iter().map(|mu| self.point_at(mu)).collect())
    }

    /// `c + D mu`.
    pub fn point_at(&self, mu: &[i64]) -> Vec<i64> {
        let mut p = self.numerator.clone();
        for (d, &m) in self.denominators.iter().zip(mu) {
            for (x, &y) in p.iter_mut().zip(d) {
                *x += m * y;
            }
        }
        p
    }
}

/// A signed sum of [`GFTerm`]s in a fixed ambient dimension. The empty sum
/// encodes the empty set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Srf {
    pub dim: usize,
    pub terms: Vec<GFTerm>,
}

impl Srf {
    pub fn empty(dim: usize) -> Self {
        Srf { dim, terms: Vec::new() }
    }

    pub fn monomial(v: Vec<i64>) -> Self {
        Srf { dim: v.len(), terms: vec![GFTerm::monomial(v)] }
    }

    /// Sum of monomials, one per point (duplicates are not merged).
    pub fn from_points(dim: usize, points: &[Vec<i64>]) -> Self {
        Srf { dim, terms: points.iter().cloned().map(GFTerm::monomial).collect() }
    }

    pub fn new(dim: usize, terms: Vec<GFTerm>) -> Result<Self> {
        for t in &terms {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: t.dim() });
            }
            for d in &t.denominators {
                if d.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: d.len() });
                }
                if d.iter().all(|&x| x == 0) {
                    return Err(Error::InvalidInput("zero denominator vector".into()));
                }
            }
        }
        Ok(Srf { dim, terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_dim(&self, other: &Srf) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    /// Term-list concatenation.
    pub fn add(&self, other: &Srf) -> Result<Srf> {
        self.check_dim(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Srf { dim: self.dim, terms })
    }

    pub fn scale(&self, c: &Rational) -> Srf {
        let terms = self
            .terms
            .iter()
            .map(|t| GFTerm { coeff: &t.coeff * c, ..t.clone() })
            .collect();
        Srf { dim: self.dim, terms }
    }

    pub fn neg(&self) -> Srf {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &Srf) -> Result<Srf> {
        self.add(&other.neg())
    }

    /// Encodes `{w + v : v in S}`.
    pub fn shift(&self, w: &[i64]) -> Srf {
        let terms = self
            .terms
            .iter()
            .map(|t| GFTerm {
                numerator: t.numerator.iter().zip(w).map(|(a, b)| a + b).collect(),
                ..t.clone()
            })
            .collect();
        Srf { dim: self.dim, terms }
    }

    /// Distinct denominator vectors, sorted.
    pub fn denominators(&self) -> BTreeSet<Vec<i64>> {
        self.terms.iter().flat_map(|t| t.denominators.iter().cloned()).collect()
    }

    pub fn check_saturated(&self) -> Result<()> {
        self.terms.iter().try_for_each(GFTerm::check_saturated)
    }

    /// Encodes the Cartesian product `S x T`.
    pub fn product(&self, other: &Srf) -> Srf {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let numerator: Vec<i64> = a.numerator.iter().chain(&b.numerator).copied().collect();
                let mut denominators = Vec::with_capacity(a.denominators.len() + b.denominators.len());
                for d in &a.denominators {
                    let mut v = d.clone();
                    v.extend(std::iter::repeat_n(0, other.dim));
                    denominators.push(v);
                }
                for d in &b.denominators {
                    let mut v = vec![0; self.dim];
                    v.extend(d.iter().copied());
                    denominators.push(v);
                }
                terms.push(GFTerm { coeff: &a.coeff * &b.coeff, numerator, denominators });
            }
        }
        Srf { dim: self.dim + other.dim, terms }
    }

    /// Applies `v -> origin + basis * v` to every exponent; `basis` is given
    /// by its columns, each of length `origin.len()`.
    pub fn map_affine(&self, origin: &[i64], basis: &[Vec<i64>]) -> Result<Srf> {
        if basis.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: basis.len() });
        }
        let out_dim = origin.len();
        let cols: Vec<Vec<i128>> = basis.iter().map(|c| linalg::to_i128(c)).collect();
        let apply = |v: &[i64]| -> Vec<i128> { linalg::combine_columns(&cols, &linalg::to_i128(v), out_dim) };
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut c = apply(&t.numerator);
            for (x, &o) in c.iter_mut().zip(origin) {
                *x += i128::from(o);
            }
            let mut denominators = Vec::with_capacity(t.denominators.len());
            for d in &t.denominators {
                let image = apply(d);
                if image.iter().all(|&x| x == 0) {
                    return Err(Error::DegenerateSubstitution);
                }
                denominators.push(to_i64_checked(&image)?);
            }
            terms.push(GFTerm { coeff: t.coeff.clone(), numerator: to_i64_checked(&c)?, denominators });
        }
        Ok(Srf { dim: out_dim, terms })
    }

    /// Monomial substitution `x_j -> x_j * z^{L e_j}`: the image of each
    /// exponent `u` is `(u, L u)`. `l` has one row per new coordinate.
    pub fn monomial_substitution(&self, l: &[Vec<i64>]) -> Result<Srf> {
        let n = self.dim;
        for row in l {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
        }
        let basis: Vec<Vec<i64>> = (0..n)
            .map(|j| {
                let mut col = vec![0; n];
                col[j] = 1;
                col.extend(l.iter().map(|row| row[j]));
                col
            })
            .collect();
        self.map_affine(&vec![0; n + l.len()], &basis)
    }

    /// Evaluates the trailing coordinates at 1, i.e. projects every exponent
    /// onto its first `keep` coordinates. The result encodes the projection
    /// of the set when the projection is one-to-one on it.
    pub fn keep_leading(&self, keep: usize) -> Result<Srf> {
        if keep > self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: keep });
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut denominators = Vec::with_capacity(t.denominators.len());
            for d in &t.denominators {
                let head = d[..keep].to_vec();
                if head.iter().all(|&x| x == 0) {
                    return Err(Error::DegenerateSubstitution);
                }
                denominators.push(head);
            }
            terms.push(GFTerm { coeff: t.coeff.clone(), numerator: t.numerator[..keep].to_vec(), denominators });
        }
        Ok(Srf { dim: keep, terms })
    }

    /// Reorders coordinates: new coordinate `i` is old coordinate `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Srf> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.dim).collect::<Vec<_>>() {
            return Err(Error::InvalidInput("not a permutation of the coordinates".into()));
        }
        let apply = |v: &[i64]| perm.iter().map(|&p| v[p]).collect::<Vec<i64>>();
        let terms = self
            .terms
            .iter()
            .map(|t| GFTerm {
                coeff: t.coeff.clone(),
                numerator: apply(&t.numerator),
                denominators: t.denominators.iter().map(|d| apply(d)).collect(),
            })
            .collect();
        Ok(Srf { dim: self.dim, terms })
    }

    /// Nonzero coefficients of the formal expansion inside `window`, taken
    /// in the common expansion direction of a generic orientation.
    pub fn expand_in_window(&self, window: &IntBox) -> Result<BTreeMap<Vec<i64>, Rational>> {
        if window.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: window.dim() });
        }
        let lambda = pick_generic_lambda(self);
        let normalized = normalize_orientation(self, &lambda)?;
        let mut acc: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
        for t in &normalized.terms {
            for p in t.points_in(window)? {
                *acc.entry(p).or_insert_with(Rational::zero) += &t.coeff;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(acc)
    }

    /// The encoded set restricted to `window`; fails if some coefficient
    /// there is not 0 or 1.
    pub fn points_in_window(&self, window: &IntBox) -> Result<Vec<Vec<i64>>> {
        let expansion = self.expand_in_window(window)?;
        let mut out = Vec::with_capacity(expansion.len());
        for (p, c) in expansion {
            if !c.is_one() {
                return Err(Error::InvalidInput(format!("coefficient {c} at {p:?} is not 0 or 1")));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Number of encoded points.
    pub fn count(&self) -> Result<BigInt> {
        specialize_count(self)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Parses the text form written by [`fmt::Display`].
    pub fn parse(text: &str) -> Result<Srf> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let mut dim = None;
        let mut count = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("dim", v)) => dim = v.parse::<usize>().ok(),
                Some(("terms", v)) => count = v.parse::<usize>().ok(),
                _ => return Err(Error::Parse(format!("unexpected header field `{field}`"))),
            }
        }
        let (Some(dim), Some(count)) = (dim, count) else {
            return Err(Error::Parse("header must be `dim=<d> terms=<T>`".into()));
        };
        let mut terms = Vec::with_capacity(count);
        for line in lines.by_ref().take(count) {
            let parts: Vec<&str> = line.split(';').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("term record needs three fields: `{line}`")));
            }
            let coeff = parse_rational(parts[0])?;
            let numerator = parse_vector(parts[1], dim)?;
            let denominators = if parts[2].is_empty() {
                Vec::new()
            } else {
                parts[2].split('|').map(|d| parse_vector(d.trim(), dim)).collect::<Result<_>>()?
            };
            terms.push(GFTerm { coeff, numerator, denominators });
        }
        if terms.len() != count {
            return Err(Error::Parse(format!("expected {count} terms, found {}", terms.len())));
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("trailing input `{extra}`")));
        }
        Srf::new(dim, terms)
    }
}

fn parse_vector(s: &str, dim: usize) -> Result<Vec<i64>> {
    let v: Vec<i64> = if s.is_empty() {
        Vec::new()
    } else {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("invalid integer `{x}`"))))
            .collect::<Result<_>>()?
    };
    if v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
    }
    Ok(v)
}

pub(crate) fn to_i64_checked(v: &[i128]) -> Result<Vec<i64>> {
    v.iter().map(|&x| i64::try_from(x).map_err(|_| Error::Overflow)).collect()
}

fn join(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for GFTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dens: Vec<String> = self.denominators.iter().map(|d| join(d)).collect();
        write!(f, "{} ; {} ; {}", format_rational(&self.coeff), join(&self.numerator), dens.join("| "))
    }
}

impl fmt::Display for Srf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim={} terms={}", self.dim, self.terms.len())?;
        for t in &self.terms {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}
