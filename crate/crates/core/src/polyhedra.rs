//! Exact rational polyhedra in fixed dimension.
//!
//! Vertices are found by intersecting every `d`-subset of constraint
//! hyperplanes and keeping the feasible solutions; linear programs over
//! bounded polyhedra are solved by evaluating the objective at the vertices.
//! Everything is exact; no floating point is involved.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::linalg::{self, ceil_div, floor_div};
use crate::problem::Problem;

pub type Rational = BigRational;

pub fn rational(num: i128, den: i128) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int_rational(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

/// A rational point stored as integer numerators over one positive
/// denominator, reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QPoint {
    pub num: Vec<i128>,
    pub den: i128,
}

impl QPoint {
    pub fn integral(v: &[i128]) -> Self {
        QPoint { num: v.to_vec(), den: 1 }
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }

    pub fn to_rationals(&self) -> Vec<Rational> {
        self.num.iter().map(|&x| rational(x, self.den)).collect()
    }
}

/// Integer box `lower <= v <= upper`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntBox {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
}

impl IntBox {
    pub fn new(lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::InvalidInput("box lower bound exceeds upper bound".into()));
        }
        Ok(IntBox { lower, upper })
    }

    /// The cube `[-m, m]^dim`.
    pub fn cube(dim: usize, m: i64) -> Self {
        IntBox { lower: vec![-m; dim], upper: vec![m; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        v.len() == self.dim()
            && v.iter().zip(&self.lower).zip(&self.upper).all(|((x, l), u)| l <= x && x <= u)
    }

    /// Number of lattice points, saturating.
    pub fn volume(&self) -> u128 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l + 1) as u128)
            .fold(1u128, |a, b| a.saturating_mul(b))
    }

    /// Largest absolute coordinate bound.
    pub fn max_abs(&self) -> i64 {
        self.lower.iter().chain(&self.upper).map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn to_polyhedron(&self) -> Polyhedron {
        let d = self.dim();
        let mut a = Vec::with_capacity(2 * d);
        let mut b = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut row = vec![0; d];
            row[i] = 1;
            a.push(row.clone());
            b.push(self.upper[i]);
            row[i] = -1;
            a.push(row);
            b.push(-self.lower[i]);
        }
        Polyhedron { a, b, dim: d }
    }

    /// Cartesian product `self x other`.
    pub fn product(&self, other: &IntBox) -> IntBox {
        IntBox {
            lower: self.lower.iter().chain(&other.lower).copied().collect(),
            upper: self.upper.iter().chain(&other.upper).copied().collect(),
        }
    }

    pub fn intersect(&self, other: &IntBox) -> Option<IntBox> {
        let lower: Vec<i64> = self.lower.iter().zip(&other.lower).map(|(a, b)| *a.max(b)).collect();
        let upper: Vec<i64> = self.upper.iter().zip(&other.upper).map(|(a, b)| *a.min(b)).collect();
        IntBox::new(lower, upper).ok()
    }

    /// Every lattice point of the box in lexicographic order.
    pub fn points(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let d = self.dim();
        let mut cur = self.lower.clone();
        if d == 0 {
            return vec![Vec::new()];
        }
        loop {
            out.push(cur.clone());
            let mut i = d;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < self.upper[i] {
                    cur[i] += 1;
                    cur[i + 1..d].copy_from_slice(&self.lower[i + 1..d]);
                    break;
                }
            }
        }
    }
}

impl fmt::Display for IntBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.lower.iter().zip(&self.upper).map(|(l, u)| format!("[{l},{u}]")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// `{u in R^dim : a u <= b}` with integer data.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polyhedron {
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
    pub dim: usize,
}

impl Polyhedron {
    /// Builds the polyhedron, dropping trivially satisfied all-zero rows and
    /// all but the tightest of each group of parallel rows.
    pub fn new(a: Vec<Vec<i64>>, b: Vec<i64>, dim: usize) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        let mut rows: Vec<Vec<i64>> = Vec::with_capacity(a.len());
        let mut rhs: Vec<i64> = Vec::with_capacity(b.len());
        // primitive direction -> (position in rows, content of the kept row)
        let mut seen: HashMap<Vec<i64>, (usize, i64)> = HashMap::new();
        for (row, bi) in a.into_iter().zip(b) {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            if row.iter().all(|&x| x == 0) && bi >= 0 {
                continue;
            }
            let g = row.iter().fold(0i64, |acc, x| acc.gcd(x));
            if g == 0 {
                rows.push(row);
                rhs.push(bi);
                continue;
            }
            let dir: Vec<i64> = row.iter().map(|x| x / g).collect();
            match seen.get(&dir) {
                // bi / g < kept_b / kept_g decides which row is tighter
                Some(&(pos, kept_g)) => {
                    if i128::from(bi) * i128::from(kept_g) < i128::from(rhs[pos]) * i128::from(g) {
                        rows[pos] = row;
                        rhs[pos] = bi;
                        seen.insert(dir, (pos, g));
                    }
                }
                None => {
                    seen.insert(dir, (rows.len(), g));
                    rows.push(row);
                    rhs.push(bi);
                }
            }
        }
        Ok(Polyhedron { a: rows, b: rhs, dim })
    }

    /// The same lattice points with every row divided by its content and
    /// the right-hand side rounded down.
    pub fn lattice_tightened(&self) -> Polyhedron {
        let mut a = Vec::with_capacity(self.a.len());
        let mut b = Vec::with_capacity(self.b.len());
        for (row, &bi) in self.a.iter().zip(&self.b) {
            let g = row.iter().fold(0i64, |acc, x| acc.gcd(x));
            if g <= 1 {
                a.push(row.clone());
                b.push(bi);
            } else {
                a.push(row.iter().map(|x| x / g).collect());
                b.push(Integer::div_floor(&bi, &g));
            }
        }
        Polyhedron::new(a, b, self.dim).expect("shapes unchanged")
    }

    pub fn contains(&self, u: &[i64]) -> bool {
        self.a.iter().zip(&self.b).all(|(row, &bi)| {
            row.iter().zip(u).map(|(&x, &y)| i128::from(x) * i128::from(y)).sum::<i128>()
                <= i128::from(bi)
        })
    }

    fn contains_q(&self, p: &QPoint) -> bool {
        self.a.iter().zip(&self.b).all(|(row, &bi)| {
            row.iter().zip(&p.num).map(|(&x, &y)| i128::from(x) * y).sum::<i128>()
                <= i128::from(bi) * p.den
        })
    }

    /// Rows tight at `p`.
    pub fn active_rows(&self, p: &QPoint) -> Vec<usize> {
        (0..self.a.len())
            .filter(|&i| {
                self.a[i].iter().zip(&p.num).map(|(&x, &y)| i128::from(x) * y).sum::<i128>()
                    == i128::from(self.b[i]) * p.den
            })
            .collect()
    }

    /// Adds the constraints of `other` (same dimension).
    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, other.dim, "polyhedron dimension mismatch");
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        a.extend(other.a.iter().cloned());
        b.extend(other.b.iter().copied());
        Polyhedron { a, b, dim: self.dim }
    }

    /// Exact vertices by exhaustive `d`-subset intersection.
    pub fn vertices_q(&self) -> Vec<QPoint> {
        let d = self.dim;
        if d == 0 {
            return if self.b.iter().all(|&x| x >= 0) {
                vec![QPoint { num: Vec::new(), den: 1 }]
            } else {
                Vec::new()
            };
        }
        let m = self.a.len();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let rows: Vec<Vec<i128>> = self.a.iter().map(|r| linalg::to_i128(r)).collect();
        for subset in linalg::combinations(m, d) {
            let sq: Vec<Vec<i128>> = subset.iter().map(|&i| rows[i].clone()).collect();
            let rhs: Vec<i128> = subset.iter().map(|&i| i128::from(self.b[i])).collect();
            let Some((num, den)) = linalg::solve(&sq, &rhs) else {
                continue;
            };
            let p = QPoint { num, den };
            if self.contains_q(&p) && seen.insert(p.clone()) {
                out.push(p);
            }
        }
        out.sort();
        out
    }

    /// Exact vertex set of a bounded polyhedron.
    pub fn vertices(&self) -> Result<Vec<Vec<Rational>>> {
        let v = self.vertices_q();
        if v.is_empty() {
            return Err(Error::EmptyPolyhedron);
        }
        Ok(v.iter().map(QPoint::to_rationals).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.vertices_q().is_empty()
    }

    /// True iff the recession cone `{z : a z <= 0}` is trivial: the rows
    /// have full rank and no extreme ray candidate (the kernel of `d - 1`
    /// rows) lies in the cone.
    pub fn is_bounded(&self) -> bool {
        let d = self.dim;
        if d == 0 {
            return true;
        }
        let rows: Vec<Vec<i128>> = self.a.iter().map(|r| linalg::to_i128(r)).collect();
        if linalg::rank(&rows) < d {
            return false;
        }
        for subset in linalg::combinations(rows.len(), d - 1) {
            let sub: Vec<Vec<i128>> = subset.iter().map(|&i| rows[i].clone()).collect();
            let null = linalg::nullspace(&sub, d);
            if null.len() != 1 {
                continue;
            }
            let r = &null[0];
            let signs: Vec<i128> = rows.iter().map(|row| linalg::dot(row, r)).collect();
            if signs.iter().all(|&x| x <= 0) || signs.iter().all(|&x| x >= 0) {
                return false;
            }
        }
        true
    }

    /// `(min, max)` of `<f, u>` over the polyhedron as reduced fractions
    /// `(num, den)`.
    pub fn objective_bounds_q(&self, f: &[i64]) -> Result<((i128, i128), (i128, i128))> {
        if f.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: f.len() });
        }
        let verts = self.vertices_q();
        if verts.is_empty() {
            return Err(Error::EmptyPolyhedron);
        }
        let f = linalg::to_i128(f);
        let vals: Vec<(i128, i128)> = verts.iter().map(|v| (linalg::dot(&f, &v.num), v.den)).collect();
        let lt = |x: &(i128, i128), y: &(i128, i128)| x.0 * y.1 < y.0 * x.1;
        let mut lo = vals[0];
        let mut hi = vals[0];
        for v in &vals[1..] {
            if lt(v, &lo) {
                lo = *v;
            }
            if lt(&hi, v) {
                hi = *v;
            }
        }
        let red = |(n, d): (i128, i128)| {
            let g = linalg::gcd(n, d);
            (n / g, d / g)
        };
        Ok((red(lo), red(hi)))
    }

    /// LP minimum and maximum of `<f, u>` over the polyhedron.
    pub fn objective_bounds(&self, f: &[i64]) -> Result<(Rational, Rational)> {
        let ((ln, ld), (hn, hd)) = self.objective_bounds_q(f)?;
        Ok((rational(ln, ld), rational(hn, hd)))
    }

    /// Integer bounds `[ceil(min), floor(max)]` of `<f, u>`, or `None` when
    /// the polyhedron is empty or the range contains no integer.
    pub fn integer_range(&self, f: &[i64]) -> Option<(i64, i64)> {
        let ((ln, ld), (hn, hd)) = self.objective_bounds_q(f).ok()?;
        let lo = ceil_div(ln, ld);
        let hi = floor_div(hn, hd);
        (lo <= hi).then_some((lo as i64, hi as i64))
    }

    /// Smallest integer box containing every lattice point.
    pub fn lattice_bounding_box(&self) -> Option<IntBox> {
        let mut lower = Vec::with_capacity(self.dim);
        let mut upper = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut e = vec![0; self.dim];
            e[i] = 1;
            let (lo, hi) = self.integer_range(&e)?;
            lower.push(lo);
            upper.push(hi);
        }
        Some(IntBox { lower, upper })
    }

    /// Fixes coordinate 0 to `value`, returning the slice in one dimension
    /// less.
    fn slice_first(&self, value: i64) -> Polyhedron {
        let a: Vec<Vec<i64>> = self.a.iter().map(|r| r[1..].to_vec()).collect();
        let b: Vec<i64> = self.a.iter().zip(&self.b).map(|(r, &bi)| bi - r[0] * value).collect();
        Polyhedron::new(a, b, self.dim - 1).expect("slice keeps row shapes")
    }

    pub fn has_lattice_point(&self) -> bool {
        // a second point aborts the scan with TooLarge, which still proves
        // feasibility
        !matches!(self.lattice_points(1), Ok(p) if p.is_empty())
    }

    /// All lattice points of a bounded polyhedron in lexicographic order,
    /// by coordinate-wise slicing with exact LP bounds.
    pub fn lattice_points(&self, limit: usize) -> Result<Vec<Vec<i64>>> {
        let mut out = Vec::new();
        self.lattice_points_into(&mut Vec::new(), &mut out, limit)?;
        Ok(out)
    }

    fn lattice_points_into(&self, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>, limit: usize) -> Result<()> {
        if self.dim == 0 {
            if self.b.iter().all(|&x| x >= 0) {
                if out.len() >= limit {
                    return Err(Error::TooLarge(format!("more than {limit} lattice points")));
                }
                out.push(prefix.clone());
            }
            return Ok(());
        }
        let mut e = vec![0; self.dim];
        e[0] = 1;
        let Some((lo, hi)) = self.integer_range(&e) else {
            return Ok(());
        };
        for x in lo..=hi {
            prefix.push(x);
            self.slice_first(x).lattice_points_into(prefix, out, limit)?;
            prefix.pop();
        }
        Ok(())
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (row, b) in self.a.iter().zip(&self.b) {
            let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}] <= {b}", r.join(" "))?;
        }
        Ok(())
    }
}

/// LP bounds of `<f, u>` over a polyhedron.
pub fn objective_bounds(p: &Polyhedron, f: &[i64]) -> Result<(Rational, Rational)> {
    p.objective_bounds(f)
}

/// Integer outcome box `[floor(min f_i), ceil(max f_i)]` over the LP
/// relaxation of the feasible region.
pub fn outcome_box(problem: &Problem) -> Result<IntBox> {
    let p = problem.polyhedron();
    let mut lower = Vec::with_capacity(problem.k());
    let mut upper = Vec::with_capacity(problem.k());
    for f in &problem.objectives {
        let ((ln, ld), (hn, hd)) = p.objective_bounds_q(f)?;
        lower.push(i64::try_from(floor_div(ln, ld)).map_err(|_| Error::Overflow)?);
        upper.push(i64::try_from(ceil_div(hn, hd)).map_err(|_| Error::Overflow)?);
    }
    Ok(IntBox { lower, upper })
}

/// Bounding box of a finite point list; `None` for an empty list.
pub fn points_bounding_box(points: &[Vec<i64>]) -> Option<IntBox> {
    let first = points.first()?;
    let mut lower = first.clone();
    let mut upper = first.clone();
    for p in points {
        for i in 0..p.len() {
            lower[i] = lower[i].min(p[i]);
            upper[i] = upper[i].max(p[i]);
        }
    }
    Some(IntBox { lower, upper })
}
