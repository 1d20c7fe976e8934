//! Intersections and Boolean combinations of encoded finite sets.
//!
//! The Hadamard product of two generating functions is computed term pair by
//! term pair. After both inputs are oriented along one generic direction,
//! each term is the indicator of `c + D N^s`, so a pair contributes the
//! lattice points common to two such sets; restricted to a box containing
//! the result, those form the lattice points of a polytope in the
//! parameters `mu` of the first term, whose generating function is mapped
//! back through `mu -> c + D mu`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::genfunc::{gf_of_polytope, is_normalized, normalize_orientation, pick_generic_lambda, GFTerm, Srf};
use crate::linalg::{self, Mat};
use crate::par;
use crate::polyhedra::{IntBox, Polyhedron, Rational};

/// Linear description of `c + D N^s` for membership tests: `equations`
/// vanish on `p - c` exactly when it lies in the span of `D`, and
/// `coordinates (p - c) >= 0` when its coefficients are nonnegative.
struct TermCone {
    numerator: Vec<i128>,
    equations: Mat,
    coordinates: Mat,
}

impl TermCone {
    fn new(t: &GFTerm) -> Self {
        let d = t.dim();
        let cols: Mat = t.denominators.iter().map(|c| linalg::to_i128(c)).collect();
        let s = cols.len();
        let equations = linalg::nullspace(&cols, d);
        let mut coordinates = Vec::new();
        if s > 0 {
            // a nonsingular s x s row selection R of D: K = sign * adj(D_R)
            // placed on the columns R satisfies K D = |det| I
            for rows in linalg::combinations(d, s) {
                let sq: Mat = rows.iter().map(|&i| cols.iter().map(|c| c[i]).collect()).collect();
                let (adj, det) = linalg::adjugate(&sq);
                if det == 0 {
                    continue;
                }
                for arow in &adj {
                    let mut k = vec![0i128; d];
                    for (j, &r) in rows.iter().enumerate() {
                        k[r] = arow[j] * det.signum();
                    }
                    coordinates.push(k);
                }
                break;
            }
        }
        TermCone { numerator: linalg::to_i128(&t.numerator), equations, coordinates }
    }

    /// The cylinder `Z^n x cone`.
    fn pad_leading(self, n: usize) -> Self {
        let pad = |row: Vec<i128>| -> Vec<i128> { std::iter::repeat_n(0, n).chain(row).collect() };
        TermCone {
            numerator: pad(self.numerator),
            equations: self.equations.into_iter().map(pad).collect(),
            coordinates: self.coordinates.into_iter().map(pad).collect(),
        }
    }

    fn contains(&self, p: &[i128]) -> bool {
        let q: Vec<i128> = p.iter().zip(&self.numerator).map(|(a, b)| a - b).collect();
        self.equations.iter().all(|e| linalg::dot(e, &q) == 0)
            && self.coordinates.iter().all(|k| linalg::dot(k, &q) >= 0)
    }
}

fn to_i64(x: i128) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Overflow)
}

/// `{mu >= 0 : lo <= c + D mu <= hi, c + D mu in other}` for the term `t`.
fn pair_polytope(t: &GFTerm, other: &TermCone, window: &IntBox) -> Result<Polyhedron> {
    let s = t.denominators.len();
    let base = t.parameter_polytope(window);
    let mut a = base.a;
    let mut b = base.b;
    let c = linalg::to_i128(&t.numerator);
    let cols: Mat = t.denominators.iter().map(|d| linalg::to_i128(d)).collect();
    let delta: Vec<i128> = c.iter().zip(&other.numerator).map(|(x, y)| x - y).collect();
    // row . (D mu + delta), expressed as coefficients on mu and a constant
    let restrict = |row: &[i128]| -> (Vec<i128>, i128) {
        (cols.iter().map(|col| linalg::dot(row, col)).collect(), linalg::dot(row, &delta))
    };
    for e in &other.equations {
        let (coef, k) = restrict(e);
        a.push(coef.iter().map(|&x| to_i64(x)).collect::<Result<_>>()?);
        b.push(to_i64(-k)?);
        a.push(coef.iter().map(|&x| to_i64(-x)).collect::<Result<_>>()?);
        b.push(to_i64(k)?);
    }
    for row in &other.coordinates {
        let (coef, k) = restrict(row);
        a.push(coef.iter().map(|&x| to_i64(-x)).collect::<Result<_>>()?);
        b.push(to_i64(k)?);
    }
    Polyhedron::new(a, b, s)
}

fn pair_product(t1: &GFTerm, t2: &GFTerm, cone2: &TermCone, window: &IntBox) -> Result<Vec<GFTerm>> {
    let coeff = &t1.coeff * &t2.coeff;
    if t1.denominators.is_empty() {
        let p = linalg::to_i128(&t1.numerator);
        return Ok(if window.contains(&t1.numerator) && cone2.contains(&p) {
            vec![GFTerm::new(coeff, t1.numerator.clone(), Vec::new())]
        } else {
            Vec::new()
        });
    }
    let poly = pair_polytope(t1, cone2, window)?;
    let local = gf_of_polytope(&poly)?;
    let mapped = local.map_affine(&t1.numerator, &t1.denominators)?;
    Ok(mapped.scale(&coeff).terms)
}

/// Hadamard product of two generating functions oriented along `lambda`,
/// restricted to `window`. For 0/1 expansions this encodes the
/// intersection of the two sets inside the window.
pub fn hadamard_normalized(g1: &Srf, g2: &Srf, lambda: &[i64], window: &IntBox) -> Result<Srf> {
    if g1.dim != g2.dim {
        return Err(Error::DimensionMismatch { expected: g1.dim, found: g2.dim });
    }
    if window.dim() != g1.dim {
        return Err(Error::DimensionMismatch { expected: g1.dim, found: window.dim() });
    }
    if !is_normalized(g1, lambda) || !is_normalized(g2, lambda) {
        return Err(Error::NonNormalizedInput);
    }
    g1.check_saturated()?;
    g2.check_saturated()?;
    if g1.is_empty() || g2.is_empty() {
        return Ok(Srf::empty(g1.dim));
    }
    match common_orthant_signs(g1, g2, lambda) {
        Some(signs) => Ok(hadamard_orthant(g1, g2, &signs)),
        None => hadamard_pairs(g1, g2, window),
    }
}

/// Pairwise products through the parameter polytope of each pair.
fn hadamard_pairs(g1: &Srf, g2: &Srf, window: &IntBox) -> Result<Srf> {
    let cones2: Vec<TermCone> = g2.terms.iter().map(TermCone::new).collect();
    let pairs: Vec<(usize, usize)> =
        (0..g1.terms.len()).flat_map(|i| (0..g2.terms.len()).map(move |j| (i, j))).collect();
    let parts = par::try_map(&pairs, |&(i, j)| pair_product(&g1.terms[i], &g2.terms[j], &cones2[j], window))?;
    Ok(simplify(&Srf { dim: g1.dim, terms: parts.into_iter().flatten().collect() }))
}

/// Shared unit-vector signs of two `lambda`-oriented inputs whose terms
/// are all orthant-like.
fn common_orthant_signs(g1: &Srf, g2: &Srf, lambda: &[i64]) -> Option<Vec<i64>> {
    let (s1, s2) = (orthant_signs_raw(g1)?, orthant_signs_raw(g2)?);
    s1.iter()
        .zip(&s2)
        .zip(lambda)
        .map(|((&a, &b), &l)| match (a, b) {
            (0, 0) => Some(if l >= 0 { -1 } else { 1 }),
            (0, x) | (x, 0) => Some(x),
            (x, y) if x == y => Some(x),
            _ => None,
        })
        .collect()
}

/// Hadamard product of orthant-like terms. Each term is a product over
/// coordinates of a ray `c_i + sigma_i N` (coordinate in the mask) or the
/// point `c_i`, so two terms meet coordinatewise in a ray, a point, or
/// nothing. Exact on all of `Z^d`.
fn hadamard_orthant(g1: &Srf, g2: &Srf, signs: &[i64]) -> Srf {
    let dim = g1.dim;
    let masks2: Vec<u64> = g2.terms.iter().map(denominator_mask).collect();
    let rows: Vec<&GFTerm> = g1.terms.iter().collect();
    let partial = par::map(&rows, |t1| {
        let m1 = denominator_mask(t1);
        let mut out: Vec<(Vec<i64>, u64, Rational)> = Vec::new();
        'pairs: for (t2, &m2) in g2.terms.iter().zip(&masks2) {
            let mut corner = Vec::with_capacity(dim);
            for i in 0..dim {
                let (a, b) = (t1.numerator[i], t2.numerator[i]);
                let (ra, rb) = (m1 >> i & 1 == 1, m2 >> i & 1 == 1);
                let behind = |p: i64, start: i64| (p - start) * signs[i] < 0;
                let c = match (ra, rb) {
                    (true, true) if signs[i] > 0 => a.max(b),
                    (true, true) => a.min(b),
                    (true, false) if behind(b, a) => continue 'pairs,
                    (true, false) => b,
                    (false, true) if behind(a, b) => continue 'pairs,
                    (false, true) => a,
                    (false, false) if a != b => continue 'pairs,
                    (false, false) => a,
                };
                corner.push(c);
            }
            out.push((corner, m1 & m2, &t1.coeff * &t2.coeff));
        }
        out
    });
    let terms = partial.into_iter().flatten().map(|(numerator, mask, coeff)| GFTerm {
        coeff,
        numerator,
        denominators: unit_denominators(dim, signs, mask),
    });
    simplify(&Srf { dim, terms: merge_terms(terms) })
}

/// Hadamard product of `g` over `Z^{n+k}` with the cylinder `Z^n x V`,
/// where `v` encodes `V` in `Z^k`, restricted to `window`. Each input is
/// oriented along its own generic direction; the per-point identities of
/// the two expansions multiply regardless.
pub fn hadamard_cylinder(g: &Srf, v: &Srf, window: &IntBox) -> Result<Srf> {
    if v.dim > g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: v.dim });
    }
    if window.dim() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: window.dim() });
    }
    if g.is_empty() || v.is_empty() {
        return Ok(Srf::empty(g.dim));
    }
    let n = g.dim - v.dim;
    let g = normalize_orientation(g, &pick_generic_lambda(g))?;
    let v = normalize_orientation(v, &pick_generic_lambda(v))?;
    g.check_saturated()?;
    v.check_saturated()?;
    let cones: Vec<TermCone> = v.terms.iter().map(|t| TermCone::new(t).pad_leading(n)).collect();
    let lifted: Vec<GFTerm> = v
        .terms
        .iter()
        .map(|t| GFTerm::new(t.coeff.clone(), vec![0; g.dim], Vec::new()))
        .collect();
    let pairs: Vec<(usize, usize)> =
        (0..g.terms.len()).flat_map(|i| (0..v.terms.len()).map(move |j| (i, j))).collect();
    let parts = par::try_map(&pairs, |&(i, j)| pair_product(&g.terms[i], &lifted[j], &cones[j], window))?;
    Ok(simplify(&Srf { dim: g.dim, terms: parts.into_iter().flatten().collect() }))
}

/// Picks a direction generic for both inputs and orients them along it.
pub fn common_orientation(g1: &Srf, g2: &Srf) -> Result<(Vec<i64>, Srf, Srf)> {
    let both = g1.add(g2)?;
    let lambda = pick_generic_lambda(&both);
    Ok((lambda.clone(), normalize_orientation(g1, &lambda)?, normalize_orientation(g2, &lambda)?))
}

/// Hadamard product restricted to `window`; the window must contain the
/// intersection of the two encoded sets.
pub fn hadamard(g1: &Srf, g2: &Srf, window: &IntBox) -> Result<Srf> {
    if g1.dim != g2.dim {
        return Err(Error::DimensionMismatch { expected: g1.dim, found: g2.dim });
    }
    let (lambda, n1, n2) = common_orientation(g1, g2)?;
    hadamard_normalized(&n1, &n2, &lambda, window)
}

/// Encodes `S1 ∩ S2`; `window` must contain the intersection.
pub fn intersect(g1: &Srf, g2: &Srf, window: &IntBox) -> Result<Srf> {
    hadamard(g1, g2, window)
}

/// Encodes `S ∩ P` for a bounded polyhedron `P`, without building the
/// generating function of `P`: each term contributes the lattice points of
/// `{mu >= 0 : c + D mu in P}`.
pub fn intersect_polytope(g: &Srf, p: &Polyhedron) -> Result<Srf> {
    let parts = polytope_parts(g, p)?;
    let mut terms = Vec::new();
    for (t, local) in parts {
        let mapped = local.map_affine(&t.numerator, &t.denominators)?;
        terms.extend(mapped.scale(&t.coeff).terms);
    }
    Ok(simplify(&Srf { dim: g.dim, terms }))
}

/// `|S ∩ P|` for a bounded polyhedron `P`.
pub fn count_in_polytope(g: &Srf, p: &Polyhedron) -> Result<BigInt> {
    let parts = polytope_parts(g, p)?;
    let mut total = Rational::zero();
    for (t, local) in &parts {
        total += &t.coeff * Rational::from_integer(local.count()?);
    }
    if !total.is_integer() {
        return Err(Error::InvalidInput(format!("count {total} is not an integer")));
    }
    Ok(total.to_integer())
}

/// Oriented terms paired with the generating function of their parameter
/// polytope `{mu >= 0 : A (c + D mu) <= b}`.
fn polytope_parts(g: &Srf, p: &Polyhedron) -> Result<Vec<(GFTerm, Srf)>> {
    if p.dim != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: p.dim });
    }
    if !p.is_bounded() {
        return Err(Error::UnboundedPolyhedron);
    }
    if g.is_empty() {
        return Ok(Vec::new());
    }
    let lambda = pick_generic_lambda(g);
    let oriented = normalize_orientation(g, &lambda)?;
    oriented.check_saturated()?;
    par::try_map(&oriented.terms, |t| {
        let local = if t.denominators.is_empty() {
            let inside = p.contains(&t.numerator);
            if inside { Srf::monomial(Vec::new()) } else { Srf::empty(0) }
        } else {
            gf_of_polytope(&parameter_polyhedron(t, p)?)?
        };
        Ok((t.clone(), local))
    })
}

fn parameter_polyhedron(t: &GFTerm, p: &Polyhedron) -> Result<Polyhedron> {
    let s = t.denominators.len();
    let mut a = Vec::with_capacity(s + p.a.len());
    let mut b = Vec::with_capacity(s + p.a.len());
    for j in 0..s {
        let mut row = vec![0; s];
        row[j] = -1;
        a.push(row);
        b.push(0);
    }
    let c = linalg::to_i128(&t.numerator);
    for (row, &bi) in p.a.iter().zip(&p.b) {
        let r = linalg::to_i128(row);
        a.push(t.denominators.iter().map(|d| to_i64(linalg::dot(&r, &linalg::to_i128(d)))).collect::<Result<_>>()?);
        b.push(to_i64(i128::from(bi) - linalg::dot(&r, &c))?);
    }
    Polyhedron::new(a, b, s)
}

/// Drops zero terms, merges equal terms, and sorts terms canonically. When
/// every denominator is a signed unit vector with one sign per coordinate,
/// the shortest of three equivalent forms is kept: the merged terms, the
/// terms rewritten over the full orthant `x^c / prod_i (1 - x^{sigma_i e_i})`,
/// and that orthant form with cancelling neighbours folded back together.
pub fn simplify(g: &Srf) -> Srf {
    let merged = merge_terms(g.terms.iter().cloned());
    let terms = match orthant_signs(g) {
        Some(signs) => {
            let lifted = lift_to_orthant(g.dim, &merged, &signs);
            let compact = compact_orthant(g.dim, &lifted, &signs);
            [compact, lifted, merged].into_iter().min_by_key(Vec::len).unwrap_or_default()
        }
        None => merged,
    };
    Srf { dim: g.dim, terms }
}

fn merge_terms(terms: impl Iterator<Item = GFTerm>) -> Vec<GFTerm> {
    let mut acc: BTreeMap<(Vec<i64>, Vec<Vec<i64>>), Rational> = BTreeMap::new();
    for t in terms {
        if t.coeff.is_zero() {
            continue;
        }
        *acc.entry(t.key()).or_insert_with(Rational::zero) += t.coeff;
    }
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((numerator, denominators), coeff)| GFTerm { coeff, numerator, denominators })
        .collect()
}

/// Per-coordinate sign when all denominators are unit vectors with a
/// consistent sign per coordinate and no coordinate repeats within a term;
/// 0 marks coordinates that never occur.
fn orthant_signs_raw(g: &Srf) -> Option<Vec<i64>> {
    let mut signs = vec![0i64; g.dim];
    for t in &g.terms {
        let mut used = vec![false; g.dim];
        for d in &t.denominators {
            let nz: Vec<usize> = (0..g.dim).filter(|&i| d[i] != 0).collect();
            if nz.len() != 1 || d[nz[0]].abs() != 1 {
                return None;
            }
            let i = nz[0];
            if used[i] || (signs[i] != 0 && signs[i] != d[i]) {
                return None;
            }
            used[i] = true;
            signs[i] = d[i];
        }
    }
    Some(signs)
}

fn orthant_signs(g: &Srf) -> Option<Vec<i64>> {
    orthant_signs_raw(g).map(|s| s.into_iter().map(|x| if x == 0 { -1 } else { x }).collect())
}

fn unit_denominators(dim: usize, signs: &[i64], mask: u64) -> Vec<Vec<i64>> {
    (0..dim)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| {
            let mut e = vec![0; dim];
            e[i] = signs[i];
            e
        })
        .collect()
}

fn denominator_mask(t: &GFTerm) -> u64 {
    t.denominators
        .iter()
        .filter_map(|d| d.iter().position(|&x| x != 0))
        .fold(0, |m, i| m | 1 << i)
}

/// Folds `a x^c / Q + (-a) x^{c + sigma_i e_i} / Q` into `a x^c / Q'`,
/// where `Q'` drops the factor for coordinate `i`, one coordinate at a time.
fn compact_orthant(dim: usize, terms: &[GFTerm], signs: &[i64]) -> Vec<GFTerm> {
    let mut acc: BTreeMap<(Vec<i64>, u64), Rational> =
        terms.iter().map(|t| ((t.numerator.clone(), denominator_mask(t)), t.coeff.clone())).collect();
    for i in 0..dim {
        let bit = 1u64 << i;
        let keys: Vec<(Vec<i64>, u64)> = acc.keys().filter(|(_, m)| m & bit != 0).cloned().collect();
        for key in keys {
            let Some(a) = acc.get(&key).cloned() else {
                continue;
            };
            let mut next = key.0.clone();
            next[i] += signs[i];
            let partner = (next, key.1);
            if acc.get(&partner).is_none_or(|b| *b != -a.clone()) {
                continue;
            }
            acc.remove(&partner);
            let (c, m) = acc.remove_entry(&key).map(|(k, _)| k).unwrap_or(key);
            let target = (c, m & !bit);
            let sum = acc.remove(&target).unwrap_or_else(Rational::zero) + a;
            if !sum.is_zero() {
                acc.insert(target, sum);
            }
        }
    }
    merge_terms(acc.into_iter().map(|((numerator, mask), coeff)| GFTerm {
        coeff,
        numerator,
        denominators: unit_denominators(dim, signs, mask),
    }))
}

fn lift_to_orthant(dim: usize, terms: &[GFTerm], signs: &[i64]) -> Vec<GFTerm> {
    let full = unit_denominators(dim, signs, (1u64 << dim) - 1);
    let mut lifted = Vec::new();
    for t in terms {
        let missing: Vec<usize> = (0..dim)
            .filter(|&i| !t.denominators.iter().any(|d| d[i] != 0))
            .collect();
        // multiply numerator by prod_{i missing} (1 - x^{sigma_i e_i})
        for mask in 0u64..(1u64 << missing.len()) {
            let mut c = t.numerator.clone();
            let mut coeff = t.coeff.clone();
            for (bit, &i) in missing.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    c[i] += signs[i];
                    coeff = -coeff;
                }
            }
            lifted.push(GFTerm { coeff, numerator: c, denominators: full.clone() });
        }
    }
    merge_terms(lifted.into_iter())
}

/// Boolean expression over input sets, referenced by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetExpr {
    Set(usize),
    Union(Box<SetExpr>, Box<SetExpr>),
    Intersection(Box<SetExpr>, Box<SetExpr>),
    Difference(Box<SetExpr>, Box<SetExpr>),
    /// Complement relative to the universe box.
    Complement(Box<SetExpr>),
}

impl SetExpr {
    pub fn set(i: usize) -> Self {
        SetExpr::Set(i)
    }

    pub fn union(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn intersection(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Intersection(Box::new(a), Box::new(b))
    }

    pub fn difference(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Difference(Box::new(a), Box::new(b))
    }

    pub fn complement(a: SetExpr) -> Self {
        SetExpr::Complement(Box::new(a))
    }

    /// Set-theoretic evaluation on explicit membership predicates.
    pub fn holds(&self, member: &dyn Fn(usize) -> bool) -> bool {
        match self {
            SetExpr::Set(i) => member(*i),
            SetExpr::Union(a, b) => a.holds(member) || b.holds(member),
            SetExpr::Intersection(a, b) => a.holds(member) && b.holds(member),
            SetExpr::Difference(a, b) => a.holds(member) && !b.holds(member),
            SetExpr::Complement(a) => !a.holds(member),
        }
    }
}

/// `S1 ∪ S2` as `g1 + g2 - g1 * g2`.
pub fn union(g1: &Srf, g2: &Srf, universe: &IntBox) -> Result<Srf> {
    let (lambda, n1, n2) = common_orientation(g1, g2)?;
    let both = hadamard_normalized(&n1, &n2, &lambda, universe)?;
    Ok(simplify(&n1.add(&n2)?.sub(&both)?))
}

/// `S1 \ S2` as `g1 - g1 * g2`.
pub fn difference(g1: &Srf, g2: &Srf, universe: &IntBox) -> Result<Srf> {
    let (lambda, n1, n2) = common_orientation(g1, g2)?;
    let both = hadamard_normalized(&n1, &n2, &lambda, universe)?;
    Ok(simplify(&n1.sub(&both)?))
}

/// `universe \ S`.
pub fn complement(g: &Srf, universe: &IntBox) -> Result<Srf> {
    let u = gf_of_polytope(&universe.to_polyhedron())?;
    Ok(simplify(&u.sub(g)?))
}

/// Union of many sets by balanced divide and conquer.
pub fn union_all(sets: &[Srf], universe: &IntBox) -> Result<Srf> {
    match sets.len() {
        0 => Ok(Srf::empty(universe.dim())),
        1 => Ok(sets[0].clone()),
        n => {
            let (left, right) = sets.split_at(n / 2);
            let (l, r) = (union_all(left, universe)?, union_all(right, universe)?);
            union(&l, &r, universe)
        }
    }
}

/// Evaluates `expr` over `sets`, all subsets of `universe`. Debug builds
/// first spot-check each input on up to 20 lattice points just outside the
/// universe.
pub fn boolean_combine(sets: &[Srf], expr: &SetExpr, universe: &IntBox) -> Result<Srf> {
    for g in sets {
        if g.dim != universe.dim() {
            return Err(Error::DimensionMismatch { expected: universe.dim(), found: g.dim });
        }
        if cfg!(debug_assertions) {
            check_universe(g, universe)?;
        }
    }
    eval(sets, expr, universe)
}

fn eval(sets: &[Srf], expr: &SetExpr, universe: &IntBox) -> Result<Srf> {
    match expr {
        SetExpr::Set(i) => sets
            .get(*i)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("no input set {i}"))),
        SetExpr::Union(a, b) => union(&eval(sets, a, universe)?, &eval(sets, b, universe)?, universe),
        SetExpr::Intersection(a, b) => {
            hadamard(&eval(sets, a, universe)?, &eval(sets, b, universe)?, universe)
        }
        SetExpr::Difference(a, b) => {
            difference(&eval(sets, a, universe)?, &eval(sets, b, universe)?, universe)
        }
        SetExpr::Complement(a) => complement(&eval(sets, a, universe)?, universe),
    }
}

/// Coefficient of `x^p` in the expansion of `g`.
pub fn coefficient_at(g: &Srf, p: &[i64]) -> Result<Rational> {
    let lambda = pick_generic_lambda(g);
    let oriented = normalize_orientation(g, &lambda)?;
    let point = IntBox { lower: p.to_vec(), upper: p.to_vec() };
    let mut c = Rational::zero();
    for t in &oriented.terms {
        if !t.points_in(&point)?.is_empty() {
            c += &t.coeff;
        }
    }
    Ok(c)
}

fn check_universe(g: &Srf, universe: &IntBox) -> Result<()> {
    let grown = IntBox {
        lower: universe.lower.iter().map(|x| x - 1).collect(),
        upper: universe.upper.iter().map(|x| x + 1).collect(),
    };
    if grown.volume() > 1 << 16 {
        return Ok(());
    }
    let outside: Vec<Vec<i64>> = grown.points().into_iter().filter(|p| !universe.contains(p)).collect();
    let stride = (outside.len() / 20).max(1);
    for p in outside.iter().step_by(stride).take(20) {
        if !coefficient_at(g, p)?.is_zero() {
            return Err(Error::UniverseViolation(p.clone()));
        }
    }
    Ok(())
}

/// True iff `g` has expansion coefficient exactly one on `p`.
pub fn contains_point(g: &Srf, p: &[i64]) -> Result<bool> {
    Ok(coefficient_at(g, p)?.is_one())
}
