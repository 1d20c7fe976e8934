//! Sparse multivariate polynomials with rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::polyhedra::{IntBox, Rational};

/// `sum coeff * v^exponents`, exponent vectors distinct, no zero
/// coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Polynomial::zero(nvars);
        p.add_term(c, vec![0; nvars]);
        p
    }

    /// The coordinate function `v_i`.
    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Polynomial::from_terms(nvars, vec![(Rational::one(), e)]).expect("well-formed")
    }

    /// Affine form `c + sum coeffs_i v_i`.
    pub fn affine(c: Rational, coeffs: &[Rational]) -> Self {
        let n = coeffs.len();
        let mut p = Polynomial::constant(n, c);
        for (i, a) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(a.clone(), e);
        }
        p
    }

    /// Builds from `(coeff, exponents)` pairs, merging repeated exponents.
    pub fn from_terms(nvars: usize, terms: Vec<(Rational, Vec<u32>)>) -> Result<Self> {
        let mut p = Polynomial::zero(nvars);
        for (c, e) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, found: e.len() });
            }
            p.add_term(c, e);
        }
        Ok(p)
    }

    fn add_term(&mut self, c: Rational, e: Vec<u32>) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// `Some(D)` when every term has total degree `D`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn eval(&self, v: &[i64]) -> Rational {
        let v: Vec<Rational> = v.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect();
        self.eval_rational(&v)
    }

    pub fn eval_rational(&self, v: &[Rational]) -> Rational {
        let mut sum = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in v.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(x.clone(), k as usize);
                }
            }
            sum += t;
        }
        sum
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(c.clone(), e.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, x) in &self.terms {
            out.add_term(x * c, e.clone());
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut acc: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Polynomial { nvars: self.nvars, terms: acc }
    }

    pub fn pow(&self, s: u32) -> Polynomial {
        let mut result = Polynomial::constant(self.nvars, Rational::one());
        let mut base = self.clone();
        let mut s = s;
        while s > 0 {
            if s & 1 == 1 {
                result = result.mul(&base);
            }
            s >>= 1;
            if s > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Composition with affine forms: returns `p(forms_1, ..., forms_n)`.
    pub fn compose(&self, forms: &[Polynomial]) -> Polynomial {
        assert_eq!(forms.len(), self.nvars, "one form per variable");
        let m = forms.first().map_or(0, Polynomial::nvars);
        let mut powers: Vec<Vec<Polynomial>> = forms
            .iter()
            .map(|f| vec![Polynomial::constant(m, Rational::one()), f.clone()])
            .collect();
        let mut out = Polynomial::zero(m);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().mul(&forms[i]);
                    powers[i].push(next);
                }
                if k > 0 {
                    t = t.mul(&powers[i][k as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// `p(v - center)` expanded in `v`.
    pub fn translate(&self, center: &[i64]) -> Polynomial {
        let forms: Vec<Polynomial> = (0..self.nvars)
            .map(|i| {
                let mut coeffs = vec![Rational::zero(); self.nvars];
                coeffs[i] = Rational::one();
                Polynomial::affine(Rational::from_integer(BigInt::from(-center[i])), &coeffs)
            })
            .collect();
        self.compose(&forms)
    }

    /// A polynomial agreeing with `self` on every lattice point of `bx`,
    /// with degree below the box width in each variable.
    pub fn reduce_on_grid(&self, bx: &IntBox) -> Polynomial {
        assert_eq!(bx.dim(), self.nvars, "box dimension");
        let mut current = self.clone();
        for i in 0..self.nvars {
            let width = (bx.upper[i] - bx.lower[i] + 1) as usize;
            let max_e = current.terms.keys().map(|e| e[i]).max().unwrap_or(0) as usize;
            if max_e < width {
                continue;
            }
            // vanishing polynomial prod (x - c) = x^width + sum low_j x^j
            let mut vanish = vec![Rational::one()];
            for c in bx.lower[i]..=bx.upper[i] {
                let c = Rational::from_integer(BigInt::from(c));
                let mut next = vec![Rational::zero(); vanish.len() + 1];
                for (j, a) in vanish.iter().enumerate() {
                    next[j + 1] += a;
                    next[j] -= a * &c;
                }
                vanish = next;
            }
            // residues[m] = x^m mod vanish, as coefficient vectors of length width
            let mut residues: Vec<Vec<Rational>> = Vec::with_capacity(max_e + 1);
            for m in 0..=max_e {
                if m < width {
                    let mut r = vec![Rational::zero(); width];
                    r[m] = Rational::one();
                    residues.push(r);
                } else {
                    let prev = &residues[m - 1];
                    let mut r = vec![Rational::zero(); width];
                    r[1..].clone_from_slice(&prev[..width - 1]);
                    let top = prev[width - 1].clone();
                    if !top.is_zero() {
                        for j in 0..width {
                            r[j] -= &top * &vanish[j];
                        }
                    }
                    residues.push(r);
                }
            }
            let mut acc: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
            for (e, c) in &current.terms {
                let r = &residues[e[i] as usize];
                for (j, a) in r.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let mut e2 = e.clone();
                    e2[i] = j as u32;
                    *acc.entry(e2).or_insert_with(Rational::zero) += c * a;
                }
            }
            acc.retain(|_, c| !c.is_zero());
            current = Polynomial { nvars: self.nvars, terms: acc };
        }
        current
    }

    /// Parses `<nterms> (<coeff> <e_1> ... <e_n>)*` from a token stream.
    pub fn parse_tokens<'a>(nvars: usize, tokens: &mut impl Iterator<Item = &'a str>) -> Result<Self> {
        let count: usize = next_token(tokens)?
            .parse()
            .map_err(|_| Error::Parse("invalid polynomial term count".into()))?;
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            let c = parse_rational(next_token(tokens)?)?;
            let mut e = Vec::with_capacity(nvars);
            for _ in 0..nvars {
                let t = next_token(tokens)?;
                e.push(t.parse().map_err(|_| Error::Parse(format!("invalid exponent `{t}`")))?);
            }
            terms.push((c, e));
        }
        Polynomial::from_terms(nvars, terms)
    }
}

fn next_token<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<&'a str> {
    tokens.next().ok_or_else(|| Error::Parse("unexpected end of polynomial".into()))
}

/// Parses `p`, `p/q` or a terminating decimal such as `0.7`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let err = || Error::Parse(format!("invalid rational `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.parse().map_err(|_| err())?;
        let q: BigInt = q.parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int.starts_with('-');
        let whole: BigInt = if int.is_empty() || int == "-" { BigInt::zero() } else { int.parse().map_err(|_| err())? };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let f: BigInt = frac.parse().map_err(|_| err())?;
        let magnitude = whole.abs() * &scale + f;
        let num = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(num, scale));
    }
    let p: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(p))
}

/// `p/q` with the denominator always shown.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Integer when the denominator is 1, `p/q` otherwise.
pub fn format_rational_short(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format_rational(r)
    }
}

/// A function on the lattice points of a box, stored by its values in
/// lexicographic order (last coordinate fastest) as integers over one
/// common denominator. Powers are pointwise; [`GridValues::to_polynomial`]
/// recovers the unique polynomial of degree below the box width in each
/// variable with these values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridValues {
    bx: IntBox,
    denominator: BigInt,
    numerators: Vec<BigInt>,
}

impl GridValues {
    pub fn from_polynomial(p: &Polynomial, bx: &IntBox) -> Self {
        let denominator = p.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let scaled: Vec<(&Vec<u32>, BigInt)> =
            p.terms.iter().map(|(e, c)| (e, c.numer() * (&denominator / c.denom()))).collect();
        let numerators = bx
            .points()
            .iter()
            .map(|v| {
                scaled
                    .iter()
                    .map(|(e, c)| {
                        e.iter().zip(v).fold(c.clone(), |acc, (&ei, &x)| acc * num_traits::pow(BigInt::from(x), ei as usize))
                    })
                    .sum()
            })
            .collect();
        GridValues { bx: bx.clone(), denominator, numerators }
    }

    pub fn bounds(&self) -> &IntBox {
        &self.bx
    }

    pub fn pow(&self, s: u32) -> Self {
        GridValues {
            bx: self.bx.clone(),
            denominator: num_traits::pow(self.denominator.clone(), s as usize),
            numerators: self.numerators.iter().map(|x| num_traits::pow(x.clone(), s as usize)).collect(),
        }
    }

    fn index(&self, v: &[i64]) -> Option<usize> {
        if !self.bx.contains(v) {
            return None;
        }
        let mut idx = 0usize;
        for i in 0..v.len() {
            let width = (self.bx.upper[i] - self.bx.lower[i] + 1) as usize;
            idx = idx * width + (v[i] - self.bx.lower[i]) as usize;
        }
        Some(idx)
    }

    /// Value at a point of the box.
    pub fn at(&self, v: &[i64]) -> Option<Rational> {
        self.index(v).map(|i| Rational::new(self.numerators[i].clone(), self.denominator.clone()))
    }

    /// The values on a sub-box; `None` unless `sub` lies inside the box.
    pub fn restrict(&self, sub: &IntBox) -> Option<Self> {
        let numerators = sub
            .points()
            .iter()
            .map(|v| self.index(v).map(|i| self.numerators[i].clone()))
            .collect::<Option<Vec<_>>>()?;
        Some(GridValues { bx: sub.clone(), denominator: self.denominator.clone(), numerators })
    }

    /// Interpolates one variable at a time: each fiber along axis `i` is
    /// replaced by the monomial coefficients of its Newton interpolant.
    pub fn to_polynomial(&self) -> Polynomial {
        let k = self.bx.dim();
        let widths: Vec<usize> = (0..k).map(|i| (self.bx.upper[i] - self.bx.lower[i] + 1) as usize).collect();
        let mut data: Vec<Rational> =
            self.numerators.iter().map(|x| Rational::new(x.clone(), self.denominator.clone())).collect();
        for axis in 0..k {
            let stride: usize = widths[axis + 1..].iter().product();
            let w = widths[axis];
            let lo = self.bx.lower[axis];
            for start in 0..data.len() {
                if !(start / stride).is_multiple_of(w) {
                    continue;
                }
                let fiber: Vec<Rational> = (0..w).map(|j| data[start + j * stride].clone()).collect();
                for (j, c) in interpolate_1d(&fiber, lo).into_iter().enumerate() {
                    data[start + j * stride] = c;
                }
            }
        }
        let mut terms = BTreeMap::new();
        for (idx, c) in data.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut e = vec![0u32; k];
            let mut rest = idx;
            for i in (0..k).rev() {
                e[i] = (rest % widths[i]) as u32;
                rest /= widths[i];
            }
            terms.insert(e, c);
        }
        Polynomial { nvars: k, terms }
    }
}

/// Monomial coefficients of the polynomial of degree below `ys.len()` taking
/// the values `ys` at `lo, lo + 1, ...`.
fn interpolate_1d(ys: &[Rational], lo: i64) -> Vec<Rational> {
    let w = ys.len();
    // forward differences scaled to divided differences
    let mut diffs = ys.to_vec();
    let mut newton = Vec::with_capacity(w);
    let mut fact = BigInt::one();
    for j in 0..w {
        if j > 0 {
            fact *= BigInt::from(j);
        }
        newton.push(&diffs[0] / Rational::from_integer(fact.clone()));
        for t in 0..diffs.len().saturating_sub(1) {
            diffs[t] = &diffs[t + 1] - &diffs[t];
        }
        diffs.pop();
    }
    // Horner over the Newton basis prod_{t < j} (x - lo - t)
    let mut coeffs = vec![Rational::zero(); w];
    for j in (0..w).rev() {
        let node = Rational::from_integer(BigInt::from(lo + j as i64));
        let mut next = vec![Rational::zero(); w];
        for d in 0..w {
            if coeffs[d].is_zero() {
                continue;
            }
            if d + 1 < w {
                next[d + 1] += &coeffs[d];
            }
            next[d] -= &coeffs[d] * &node;
        }
        next[0] += &newton[j];
        coeffs = next;
    }
    coeffs
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.terms.len())?;
        for (e, c) in &self.terms {
            write!(f, " {}", format_rational_short(c))?;
            for k in e {
                write!(f, " {k}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    fn sum_of_squares(n: usize) -> Polynomial {
        let terms = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 2;
                (q(1), e)
            })
            .collect();
        Polynomial::from_terms(n, terms).unwrap()
    }

    #[test]
    fn evaluation_and_powers() {
        let p = sum_of_squares(2);
        assert_eq!(p.eval(&[1, 2]), q(5));
        assert_eq!(p.pow(3).eval(&[1, 2]), q(125));
        assert_eq!(p.homogeneous_degree(), Some(2));
        assert_eq!(p.pow(2).degree(), 4);
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = Polynomial::variable(1, 0);
        let z = p.add(&p.scale(&q(-1)));
        assert!(z.is_zero());
    }

    #[test]
    fn translation() {
        let p = sum_of_squares(2).translate(&[1, -1]);
        for v in [[0, 0], [3, 2], [-4, 5]] {
            assert_eq!(p.eval(&v), sum_of_squares(2).eval(&[v[0] - 1, v[1] + 1]));
        }
    }

    #[test]
    fn grid_values_interpolate_to_the_reduced_polynomial() {
        let p = sum_of_squares(2).add(&Polynomial::variable(2, 0).scale(&q(-3)));
        let bx = IntBox::new(vec![-2, 1], vec![2, 4]).unwrap();
        let grid = GridValues::from_polynomial(&p, &bx).pow(3);
        assert_eq!(grid.to_polynomial(), p.pow(3).reduce_on_grid(&bx));
        let sub = IntBox::new(vec![0, 2], vec![1, 4]).unwrap();
        let part = grid.restrict(&sub).unwrap();
        assert_eq!(part.to_polynomial(), p.pow(3).reduce_on_grid(&sub));
        assert_eq!(part.at(&[1, 3]), Some(p.pow(3).eval(&[1, 3])));
        assert!(grid.restrict(&IntBox::cube(2, 5)).is_none());
        let cube = IntBox::cube(3, 1);
        let p3 = sum_of_squares(3).pow(2);
        assert_eq!(GridValues::from_polynomial(&p3, &cube).to_polynomial(), p3.reduce_on_grid(&cube));
    }

    #[test]
    fn grid_reduction_agrees_on_box() {
        let p = sum_of_squares(2).pow(5);
        let bx = IntBox::new(vec![-1, 0], vec![1, 3]).unwrap();
        let r = p.reduce_on_grid(&bx);
        assert!(r.terms().all(|(e, _)| e[0] < 3 && e[1] < 4));
        for v in bx.points() {
            assert_eq!(r.eval(&v), p.eval(&v));
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("7/10").unwrap(), Rational::new(BigInt::from(7), BigInt::from(10)));
        assert_eq!(parse_rational("0.7").unwrap(), Rational::new(BigInt::from(7), BigInt::from(10)));
        assert_eq!(parse_rational("-1.25").unwrap(), Rational::new(BigInt::from(-5), BigInt::from(4)));
        assert_eq!(parse_rational("3").unwrap(), q(3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&q(2)), "2/1");
        assert_eq!(format_rational_short(&q(2)), "2");
    }

    #[test]
    fn token_parsing() {
        let mut t = "2 1 2 0 1 0 2".split_whitespace();
        let p = Polynomial::parse_tokens(2, &mut t).unwrap();
        assert_eq!(p, sum_of_squares(2));
    }
}
