//! Multicriteria integer linear programs and their text format.
//!
//! ```text
//! mcilp-problem v1
//! n <n> m <m> k <k>
//! A <m rows of n integers>
//! b <m integers>
//! F <k rows of n integers>
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::polyhedra::Polyhedron;

/// `min (f_1(u), ..., f_k(u))` over the lattice points of `{u : a u <= b}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Problem {
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
    pub objectives: Vec<Vec<i64>>,
}

impl Problem {
    /// Validates shapes and requires a bounded feasible region with at least
    /// one lattice point.
    pub fn new(a: Vec<Vec<i64>>, b: Vec<i64>, objectives: Vec<Vec<i64>>) -> Result<Self> {
        let problem = Problem::unchecked(a, b, objectives)?;
        let poly = problem.polyhedron();
        if !poly.is_bounded() {
            return Err(Error::UnboundedPolyhedron);
        }
        if !poly.has_lattice_point() {
            return Err(Error::EmptyPolyhedron);
        }
        Ok(problem)
    }

    /// Shape checks only.
    pub fn unchecked(a: Vec<Vec<i64>>, b: Vec<i64>, objectives: Vec<Vec<i64>>) -> Result<Self> {
        let n = objectives.first().map(Vec::len).or_else(|| a.first().map(Vec::len)).unwrap_or(0);
        if objectives.is_empty() {
            return Err(Error::InvalidInput("at least one objective is required".into()));
        }
        if n == 0 {
            return Err(Error::InvalidInput("at least one variable is required".into()));
        }
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        for row in a.iter().chain(&objectives) {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
        }
        Ok(Problem { a, b, objectives })
    }

    pub fn n(&self) -> usize {
        self.objectives[0].len()
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn k(&self) -> usize {
        self.objectives.len()
    }

    pub fn polyhedron(&self) -> Polyhedron {
        Polyhedron::new(self.a.clone(), self.b.clone(), self.n()).expect("validated shapes")
    }

    /// Outcome vector `f(u)`.
    pub fn outcome(&self, u: &[i64]) -> Vec<i64> {
        self.objectives.iter().map(|f| f.iter().zip(u).map(|(x, y)| x * y).sum()).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = Tokens { inner: text.split_whitespace() };
        tokens.keyword("mcilp-problem")?;
        tokens.keyword("v1")?;
        tokens.keyword("n")?;
        let n = tokens.count_value()?;
        tokens.keyword("m")?;
        let m = tokens.count_value()?;
        tokens.keyword("k")?;
        let k = tokens.count_value()?;
        tokens.keyword("A")?;
        let a = tokens.matrix(m, n)?;
        tokens.keyword("b")?;
        let b = tokens.vector(m)?;
        tokens.keyword("F")?;
        let f = tokens.matrix(k, n)?;
        if let Some(extra) = tokens.inner.next() {
            return Err(Error::Parse(format!("trailing input `{extra}`")));
        }
        Problem::new(a, b, f)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

struct Tokens<'a, I: Iterator<Item = &'a str>> {
    inner: I,
}

impl<'a, I: Iterator<Item = &'a str>> Tokens<'a, I> {
    fn next(&mut self) -> Result<&'a str> {
        self.inner.next().ok_or_else(|| Error::Parse("unexpected end of input".into()))
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        let t = self.next()?;
        if t == word {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected `{word}`, found `{t}`")))
        }
    }

    fn integer(&mut self) -> Result<i64> {
        let t = self.next()?;
        t.parse().map_err(|_| Error::Parse(format!("invalid integer `{t}`")))
    }

    fn count_value(&mut self) -> Result<usize> {
        let t = self.next()?;
        t.parse().map_err(|_| Error::Parse(format!("invalid count `{t}`")))
    }

    fn vector(&mut self, len: usize) -> Result<Vec<i64>> {
        (0..len).map(|_| self.integer()).collect()
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Vec<Vec<i64>>> {
        (0..rows).map(|_| self.vector(cols)).collect()
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Problem::parse(s)
    }
}

fn join(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mcilp-problem v1")?;
        writeln!(f, "n {} m {} k {}", self.n(), self.m(), self.k())?;
        writeln!(f, "A")?;
        for row in &self.a {
            writeln!(f, "{}", join(row))?;
        }
        writeln!(f, "b {}", join(&self.b))?;
        writeln!(f, "F")?;
        for row in &self.objectives {
            writeln!(f, "{}", join(row))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "mcilp-problem v1\nn 2 m 4 k 2\nA 1 0 -1 0 0 1 0 -1\nb 3 0 3 0\nF 1 1 2 -1\n";

    #[test]
    fn round_trip() {
        let p = Problem::parse(SQUARE).unwrap();
        assert_eq!((p.n(), p.m(), p.k()), (2, 4, 2));
        assert_eq!(p.outcome(&[1, 2]), vec![3, 0]);
        let again = Problem::parse(&p.to_text()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn rejects_trailing_garbage() {
        let text = format!("{SQUARE} 7");
        assert!(matches!(Problem::parse(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_bad_header_and_short_input() {
        assert!(matches!(Problem::parse("mcilp-problem v2"), Err(Error::Parse(_))));
        assert!(matches!(Problem::parse("mcilp-problem v1\nn 2 m 1 k 1\nA 1"), Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_unbounded_and_infeasible() {
        let ray = "mcilp-problem v1\nn 1 m 1 k 1\nA -1\nb 0\nF 1\n";
        assert_eq!(Problem::parse(ray), Err(Error::UnboundedPolyhedron));
        let gap = "mcilp-problem v1\nn 1 m 2 k 1\nA 2 -2\nb 1 -1\nF 1\n";
        assert_eq!(Problem::parse(gap), Err(Error::EmptyPolyhedron));
    }
}
