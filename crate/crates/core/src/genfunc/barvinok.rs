//! Generating functions of polytopes by signed unimodular decomposition of
//! the vertex cones.
//!
//! Each tangent cone is triangulated (pulling triangulation), every simplicial
//! cone is split into a signed sum of unimodular cones, and boundary overlaps
//! are resolved with a half-open convention: a lattice point `x` belongs to a
//! cone iff `x + eps * y` does for all small `eps > 0`, where `y` is an
//! interior direction of the tangent cone avoiding every facet hyperplane met
//! during the decomposition. Summing over vertices gives the polytope's
//! generating function as a rational function identity.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::linalg::{self, ceil_div, dot, floor_div, Mat};
use crate::par;
use crate::polyhedra::{Polyhedron, QPoint};

use super::{to_i64_checked, GFTerm, Srf};

/// `apex + cone(generators)`, counted with `sign`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub apex: QPoint,
    pub generators: Vec<Vec<i128>>,
    pub sign: i32,
}

impl Cone {
    /// Generator matrix with the generators as columns.
    fn matrix(&self) -> Mat {
        let d = self.apex.num.len();
        (0..d).map(|i| self.generators.iter().map(|g| g[i]).collect()).collect()
    }

    pub fn index(&self) -> i128 {
        linalg::det(&self.matrix()).abs()
    }
}

/// Largest lattice index for which the coset search is attempted.
const MAX_INDEX: i128 = 1 << 22;

/// Signed decomposition of a simplicial cone into unimodular cones. The
/// signed sum of their indicator functions equals the cone's indicator up to
/// lower-dimensional sets.
pub fn unimodular_decompose(cone: &Cone) -> Result<Vec<Cone>> {
    let mut normals = Vec::new();
    decompose_into(cone, &mut normals)
}

/// Same as [`unimodular_decompose`], also collecting the facet normals of
/// every cone visited.
fn decompose_into(cone: &Cone, normals: &mut Vec<Vec<i128>>) -> Result<Vec<Cone>> {
    let d = cone.apex.num.len();
    if cone.generators.len() != d || cone.generators.iter().any(|g| g.len() != d) {
        return Err(Error::NonSimplicialCone);
    }
    if linalg::det(&cone.matrix()) == 0 {
        return Err(Error::NonSimplicialCone);
    }
    let mut out = Vec::new();
    let mut stack = vec![(cone.generators.clone(), cone.sign)];
    while let Some((gens, sign)) = stack.pop() {
        let c = Cone { apex: cone.apex.clone(), generators: gens, sign };
        let m = c.matrix();
        let (adj, det) = linalg::adjugate(&m);
        if det == 0 {
            continue;
        }
        normals.extend(adj.iter().cloned());
        if det.abs() == 1 {
            out.push(c);
            continue;
        }
        if det.abs() > MAX_INDEX {
            return Err(Error::TooLarge(format!("cone index {}", det.abs())));
        }
        let (mut w, mut alpha) = short_vector(&m, &adj, det);
        if alpha.iter().all(|&a| a <= 0) {
            w.iter_mut().for_each(|x| *x = -*x);
            alpha.iter_mut().for_each(|x| *x = -*x);
        }
        // push in reverse so cones are produced in generator order
        for i in (0..d).rev() {
            if alpha[i] == 0 {
                continue;
            }
            let mut g = c.generators.clone();
            g[i] = linalg::primitive(&w);
            stack.push((g, sign * alpha[i].signum() as i32));
        }
    }
    Ok(out)
}

/// Nonzero lattice vector `w` whose coordinates `alpha = G^{-1} w` have the
/// smallest maximum absolute value; returns `w` and `alpha * |det|`.
///
/// Cosets of `G Z^d` in `Z^d` correspond to residues of `adj(G) w` modulo
/// `|det|`; they are enumerated by breadth-first search from zero using the
/// columns of `adj(G)`.
fn short_vector(m: &Mat, adj: &Mat, det: i128) -> (Vec<i128>, Vec<i128>) {
    let n = det.abs();
    let d = m.len();
    let gens: Vec<Vec<i128>> = (0..d).map(|j| (0..d).map(|i| adj[i][j].rem_euclid(n)).collect()).collect();
    let zero = vec![0i128; d];
    let mut seen: HashSet<Vec<i128>> = HashSet::new();
    seen.insert(zero.clone());
    let mut queue = VecDeque::from([zero]);
    let mut best: Option<(i128, i128, Vec<i128>)> = None;
    while let Some(beta) = queue.pop_front() {
        if beta.iter().any(|&x| x != 0) {
            let centered: Vec<i128> = beta.iter().map(|&x| if 2 * x > n { x - n } else { x }).collect();
            let key = (
                centered.iter().map(|x| x.abs()).max().unwrap(),
                centered.iter().map(|x| x.abs()).sum::<i128>(),
                centered,
            );
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        for g in &gens {
            let next: Vec<i128> = beta.iter().zip(g).map(|(a, b)| (a + b) % n).collect();
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    let (_, _, centered) = best.expect("index > 1 has a nonzero coset");
    // w = G * centered / det; alpha = centered / det
    let w: Vec<i128> = linalg::mat_vec(m, &centered).into_iter().map(|x| x / det).collect();
    let alpha: Vec<i128> = centered.iter().map(|&x| x * det.signum()).collect();
    (w, alpha)
}

/// Extreme rays of the pointed cone `{z : rows z <= 0}`.
fn extreme_rays(rows: &Mat, d: usize) -> Vec<Vec<i128>> {
    let mut rays: Vec<Vec<i128>> = Vec::new();
    for subset in linalg::combinations(rows.len(), d - 1) {
        let sub: Mat = subset.iter().map(|&i| rows[i].clone()).collect();
        let null = linalg::nullspace(&sub, d);
        if null.len() != 1 {
            continue;
        }
        let r = &null[0];
        let neg: Vec<i128> = r.iter().map(|x| -x).collect();
        for cand in [r.clone(), neg] {
            if rows.iter().all(|row| dot(row, &cand) <= 0) && !rays.contains(&cand) {
                rays.push(cand);
                break;
            }
        }
    }
    rays.sort();
    rays
}

/// Pulling triangulation of the cone spanned by `rays[subset]` (of dimension
/// `dim`), whose faces are cut out by the rows of `rows`.
fn triangulate(rays: &[Vec<i128>], subset: &[usize], rows: &Mat, dim: usize) -> Vec<Vec<usize>> {
    if subset.len() == dim {
        return vec![subset.to_vec()];
    }
    let first = subset[0];
    let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for row in rows {
        if dot(row, &rays[first]) == 0 {
            continue;
        }
        let face: Vec<usize> = subset.iter().copied().filter(|&i| dot(row, &rays[i]) == 0).collect();
        if face.len() < dim - 1 {
            continue;
        }
        let vecs: Mat = face.iter().map(|&i| rays[i].clone()).collect();
        if linalg::rank(&vecs) == dim - 1 {
            facets.insert(face);
        }
    }
    let mut out = Vec::new();
    for face in facets {
        for mut simplex in triangulate(rays, &face, rows, dim - 1) {
            simplex.insert(0, first);
            out.push(simplex);
        }
    }
    out
}

/// Terms for the tangent cone at vertex `v` of a full-dimensional polytope.
fn vertex_terms(p: &Polyhedron, v: &QPoint) -> Result<Vec<GFTerm>> {
    let d = p.dim;
    let rows: Mat = p.active_rows(v).iter().map(|&i| linalg::to_i128(&p.a[i])).collect();
    let rays = extreme_rays(&rows, d);
    let all: Vec<usize> = (0..rays.len()).collect();
    let simplices = triangulate(&rays, &all, &rows, d);
    let mut normals: Vec<Vec<i128>> = Vec::new();
    let mut cones = Vec::new();
    for simplex in simplices {
        let cone = Cone { apex: v.clone(), generators: simplex.iter().map(|&i| rays[i].clone()).collect(), sign: 1 };
        cones.extend(decompose_into(&cone, &mut normals)?);
    }
    normals.sort();
    normals.dedup();
    let y = generic_interior(&rays, &normals);
    cones.iter().map(|c| half_open_term(c, &y)).collect()
}

/// `sum_j t^j rays_j` for the first `t = 1, 2, ...` that is off every
/// hyperplane `normal . z = 0`.
fn generic_interior(rays: &[Vec<i128>], normals: &[Vec<i128>]) -> Vec<i128> {
    let d = rays[0].len();
    for t in 1i128.. {
        let mut y = vec![0i128; d];
        let mut w = 1i128;
        for r in rays {
            for (yi, ri) in y.iter_mut().zip(r) {
                *yi += w * ri;
            }
            w *= t;
        }
        if normals.iter().all(|n| dot(n, &y) != 0) {
            return y;
        }
    }
    unreachable!("finitely many parameters are excluded")
}

/// Generating function of the lattice points of a unimodular cone under the
/// half-open convention given by direction `y`.
fn half_open_term(c: &Cone, y: &[i128]) -> Result<GFTerm> {
    let m = c.matrix();
    let (adj, det) = linalg::adjugate(&m);
    debug_assert_eq!(det.abs(), 1);
    let d = m.len();
    let mut mult = vec![0i128; d];
    for i in 0..d {
        // dual basis row: adj row scaled by det (= +-1)
        let dual: Vec<i128> = adj[i].iter().map(|x| x * det).collect();
        let num = dot(&dual, &c.apex.num);
        let den = c.apex.den;
        mult[i] = if dot(&dual, y) > 0 { ceil_div(num, den) } else { floor_div(num, den) + 1 };
    }
    let numerator = linalg::combine_columns(&c.generators, &mult, d);
    Ok(GFTerm {
        coeff: super::Rational::from_integer(c.sign.into()),
        numerator: to_i64_checked(&numerator)?,
        denominators: c.generators.iter().map(|g| to_i64_checked(g)).collect::<Result<_>>()?,
    })
}

/// Generating function of the lattice points of a bounded polyhedron.
pub fn gf_of_polytope(p: &Polyhedron) -> Result<Srf> {
    if !p.is_bounded() {
        return Err(Error::UnboundedPolyhedron);
    }
    let tight = p.lattice_tightened();
    let p = &tight;
    let verts = p.vertices_q();
    let d = p.dim;
    if verts.is_empty() {
        return Ok(Srf::empty(d));
    }
    if verts.len() == 1 {
        let v = &verts[0];
        return Ok(if v.is_integral() { Srf::monomial(to_i64_checked(&v.num)?) } else { Srf::empty(d) });
    }
    let v0 = &verts[0];
    let diffs: Mat = verts[1..]
        .iter()
        .map(|v| v.num.iter().zip(&v0.num).map(|(a, b)| a * v0.den - b * v.den).collect())
        .collect();
    let r = linalg::rank(&diffs);
    if r < d {
        return lower_dimensional(p, v0, &diffs, r);
    }
    let parts = par::try_map(&verts, |v| vertex_terms(p, v))?;
    Ok(Srf { dim: d, terms: parts.into_iter().flatten().collect() })
}

/// Restricts to the lattice of the affine hull `x0 + B Z^r`, solves there
/// and maps back.
fn lower_dimensional(p: &Polyhedron, v0: &QPoint, diffs: &Mat, r: usize) -> Result<Srf> {
    let d = p.dim;
    let normals = linalg::nullspace(diffs, d);
    let mut rhs = Vec::with_capacity(normals.len());
    for nrm in &normals {
        let num = dot(nrm, &v0.num);
        if num % v0.den != 0 {
            return Ok(Srf::empty(d));
        }
        rhs.push(num / v0.den);
    }
    let (u, rank) = linalg::column_hermite(&normals, d);
    debug_assert_eq!(rank, d - r);
    // normals * u = [h | 0]; solve h z = rhs over the integers
    let h: Mat = normals.iter().map(|row| (0..rank).map(|j| (0..d).map(|k| row[k] * u[k][j]).sum()).collect()).collect();
    let Some((z, den)) = linalg::solve(&h, &rhs) else {
        return Err(Error::InvalidInput("inconsistent affine hull".into()));
    };
    if den != 1 {
        return Ok(Srf::empty(d));
    }
    let x0: Vec<i128> = (0..d).map(|i| (0..rank).map(|j| u[i][j] * z[j]).sum()).collect();
    let basis: Mat = (rank..d).map(|j| (0..d).map(|i| u[i][j]).collect()).collect();
    let a: Vec<Vec<i64>> = p
        .a
        .iter()
        .map(|row| {
            let row = linalg::to_i128(row);
            to_i64_checked(&basis.iter().map(|col| dot(&row, col)).collect::<Vec<_>>())
        })
        .collect::<Result<_>>()?;
    let b: Vec<i64> = p
        .a
        .iter()
        .zip(&p.b)
        .map(|(row, &bi)| {
            let v = i128::from(bi) - dot(&linalg::to_i128(row), &x0);
            i64::try_from(v).map_err(|_| Error::Overflow)
        })
        .collect::<Result<_>>()?;
    let reduced = Polyhedron::new(a, b, r)?;
    let inner = gf_of_polytope(&reduced)?;
    let basis64: Vec<Vec<i64>> = basis.iter().map(|c| to_i64_checked(c)).collect::<Result<_>>()?;
    inner.map_affine(&to_i64_checked(&x0)?, &basis64)
}
