//! Small exact integer linear algebra over `i128`.
//!
//! Dimensions handled by the engine are tiny (at most a handful of
//! coordinates), so everything here is cubic-time textbook elimination
//! without pivoting heuristics. Overflow panics (overflow checks are enabled
//! in every profile of the workspace).

use num_integer::Integer;

pub type Mat = Vec<Vec<i128>>;

pub fn gcd(a: i128, b: i128) -> i128 {
    a.gcd(&b)
}

pub fn gcd_slice(v: &[i128]) -> i128 {
    v.iter().fold(0, |g, &x| g.gcd(&x))
}

/// Divides out the content of a nonzero integer vector.
pub fn primitive(v: &[i128]) -> Vec<i128> {
    let g = gcd_slice(v);
    if g == 0 {
        return v.to_vec();
    }
    v.iter().map(|x| x / g).collect()
}

pub fn dot(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn floor_div(a: i128, b: i128) -> i128 {
    Integer::div_floor(&a, &b)
}

pub fn ceil_div(a: i128, b: i128) -> i128 {
    -Integer::div_floor(&-a, &b)
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Mat = m.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Returns `(adj, det)` with `m * adj = det * I`.
pub fn adjugate(m: &[Vec<i128>]) -> (Mat, i128) {
    let n = m.len();
    let d = det(m);
    if n == 1 {
        return (vec![vec![1]], d);
    }
    let mut adj = vec![vec![0i128; n]; n];
    let mut minor = vec![vec![0i128; n - 1]; n - 1];
    for i in 0..n {
        for j in 0..n {
            // cofactor C_ij goes to adj[j][i]
            let mut r = 0;
            for (ri, row) in m.iter().enumerate() {
                if ri == i {
                    continue;
                }
                let mut c = 0;
                for (cj, &x) in row.iter().enumerate() {
                    if cj == j {
                        continue;
                    }
                    minor[r][c] = x;
                    c += 1;
                }
                r += 1;
            }
            let cof = det(&minor);
            adj[j][i] = if (i + j) % 2 == 0 { cof } else { -cof };
        }
    }
    (adj, d)
}

pub fn transpose(m: &[Vec<i128>]) -> Mat {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    (0..cols).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

pub fn mat_vec(m: &[Vec<i128>], v: &[i128]) -> Vec<i128> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Matrix whose columns are `cols`, applied to `coeffs`.
pub fn combine_columns(cols: &[Vec<i128>], coeffs: &[i128], dim: usize) -> Vec<i128> {
    let mut out = vec![0i128; dim];
    for (c, &a) in cols.iter().zip(coeffs) {
        if a == 0 {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(c) {
            *o += a * x;
        }
    }
    out
}

/// Row echelon form over the rationals, computed fraction-free. Returns the
/// reduced rows (each made primitive) and the pivot columns.
pub fn echelon(rows: &[Vec<i128>]) -> (Mat, Vec<usize>) {
    let mut a: Mat = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    if a.is_empty() {
        return (a, Vec::new());
    }
    let cols = a[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, p);
        let piv = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            let g = gcd(f, piv[c]);
            let (mr, mp) = (piv[c] / g, f / g);
            for (x, &y) in row.iter_mut().zip(&piv) {
                *x = *x * mr - y * mp;
            }
            let pr = primitive(row);
            *row = pr;
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub fn rank(rows: &[Vec<i128>]) -> usize {
    echelon(rows).1.len()
}

/// Integer basis (primitive vectors) of the rational null space of `rows`
/// acting on `cols`-dimensional vectors.
pub fn nullspace(rows: &[Vec<i128>], cols: usize) -> Mat {
    let (red, pivots) = echelon(rows);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        // Fully reduced rows: row i has pivot p_i and zeros in other pivot
        // columns, so x_{p_i} = -row[f] * x_f / row[p_i].
        let mut den = 1i128;
        for (row, &p) in red.iter().zip(&pivots) {
            if row[f] != 0 {
                den = den.lcm(&row[p].abs());
            }
        }
        let mut v = vec![0i128; cols];
        v[f] = den;
        for (row, &p) in red.iter().zip(&pivots) {
            if row[f] != 0 {
                v[p] = -row[f] * (den / row[p]);
            }
        }
        basis.push(primitive(&v));
    }
    basis
}

/// Column-style Hermite reduction: returns a unimodular `u` (n x n) such that
/// `e * u = [h | 0]` with `h` lower triangular having `rank(e)` columns.
/// The trailing `n - rank` columns of `u` form a basis of the integer kernel.
pub fn column_hermite(e: &[Vec<i128>], n: usize) -> (Mat, usize) {
    // Work on e^T augmented so row ops on e^T are column ops on e.
    let mut et: Mat = transpose_or_empty(e, n);
    let mut u: Mat = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    let m = e.len();
    let mut r = 0;
    for c in 0..m {
        if r == n {
            break;
        }
        // eliminate column c among rows r.. of et by Euclid
        loop {
            let nz: Vec<usize> = (r..n).filter(|&i| et[i][c] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| et[i][c].abs()).unwrap();
            et.swap(r, p);
            u.swap(r, p);
            if nz.len() == 1 {
                break;
            }
            for i in r + 1..n {
                if et[i][c] != 0 {
                    let q = floor_div(et[i][c], et[r][c]);
                    for j in 0..m {
                        et[i][j] -= q * et[r][j];
                    }
                    for j in 0..n {
                        u[i][j] -= q * u[r][j];
                    }
                }
            }
        }
        if et[r][c] != 0 {
            r += 1;
        }
    }
    // rows of u are columns of the transform
    (transpose(&u), r)
}

fn transpose_or_empty(e: &[Vec<i128>], n: usize) -> Mat {
    if e.is_empty() {
        return vec![Vec::new(); n];
    }
    transpose(e)
}

/// gcd of all maximal minors of the `n x r` matrix whose columns are `cols`.
/// A set of independent integer vectors generates a saturated lattice exactly
/// when this gcd is 1.
pub fn maximal_minor_gcd(cols: &[Vec<i128>]) -> i128 {
    let r = cols.len();
    if r == 0 {
        return 1;
    }
    let n = cols[0].len();
    let mut g = 0i128;
    for rows in combinations(n, r) {
        let sq: Mat = rows
            .iter()
            .map(|&i| cols.iter().map(|c| c[i]).collect())
            .collect();
        g = gcd(g, det(&sq));
        if g == 1 {
            break;
        }
    }
    g
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact solution of a square system `m x = rhs` as `(numerators, den)` with
/// `den > 0` and the fraction reduced, or `None` when `m` is singular.
pub fn solve(m: &[Vec<i128>], rhs: &[i128]) -> Option<(Vec<i128>, i128)> {
    // Cramer's rule with Bareiss determinants
    let d = det(m);
    if d == 0 {
        return None;
    }
    let n = m.len();
    let mut work: Mat = m.to_vec();
    let mut num = Vec::with_capacity(n);
    for j in 0..n {
        for (row, (orig, &r)) in work.iter_mut().zip(m.iter().zip(rhs)) {
            row.copy_from_slice(orig);
            row[j] = r;
        }
        num.push(det(&work));
    }
    let mut den = d;
    if den < 0 {
        den = -den;
        num.iter_mut().for_each(|x| *x = -*x);
    }
    let g = gcd(gcd_slice(&num), den);
    if g > 1 {
        num.iter_mut().for_each(|x| *x /= g);
        den /= g;
    }
    Some((num, den))
}

pub fn to_i128(v: &[i64]) -> Vec<i128> {
    v.iter().map(|&x| i128::from(x)).collect()
}

pub fn to_i64(v: &[i128]) -> Vec<i64> {
    v.iter()
        .map(|&x| i64::try_from(x).expect("exponent exceeds 64-bit range"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_adjugate() {
        let m = vec![vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]];
        assert_eq!(det(&m), 18);
        let (adj, d) = adjugate(&m);
        for i in 0..3 {
            for j in 0..3 {
                let s: i128 = (0..3).map(|k| m[i][k] * adj[k][j]).sum();
                assert_eq!(s, if i == j { d } else { 0 });
            }
        }
        assert_eq!(det(&[vec![0, 1], vec![1, 0]]), -1);
    }

    #[test]
    fn null_space_is_orthogonal() {
        let rows = vec![vec![1, 2, 3], vec![2, 4, 7]];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 1);
        for r in &rows {
            assert_eq!(dot(r, &ns[0]), 0);
        }
        assert_eq!(ns[0], primitive(&ns[0]));
    }

    #[test]
    fn hermite_kernel() {
        let e = vec![vec![2, 3, 5]];
        let (u, r) = column_hermite(&e, 3);
        assert_eq!(r, 1);
        assert_eq!(det(&u).abs(), 1);
        for j in 1..3 {
            let col: Vec<i128> = u.iter().map(|row| row[j]).collect();
            assert_eq!(dot(&e[0], &col), 0);
        }
        let col0: Vec<i128> = u.iter().map(|row| row[0]).collect();
        assert_eq!(dot(&e[0], &col0).abs(), 1);
    }

    #[test]
    fn subsets() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn saturation() {
        assert_eq!(maximal_minor_gcd(&[vec![1, 1], vec![1, -1]]), 2);
        assert_eq!(maximal_minor_gcd(&[vec![1, 2, 0]]), 1);
        assert_eq!(maximal_minor_gcd(&[vec![2, 4, 0]]), 2);
    }
}
