use std::ops::{Index, IndexMut};

use serde::Serialize;

use super::aberth::solve_poly_aberth;
use super::{all_finite, NumError, C64, MAX_ORDER};

/// Dense square complex matrix of order `2..=MAX_ORDER`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallMatrix {
    n: usize,
    data: Vec<C64>,
}

impl SmallMatrix {
    pub fn zeros(n: usize) -> Result<Self, NumError> {
        if !(2..=MAX_ORDER).contains(&n) {
            return Err(NumError::InvalidOrder(n));
        }
        Ok(Self { n, data: vec![C64::new(0.0, 0.0); n * n] })
    }

    pub fn identity(n: usize) -> Result<Self, NumError> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, NumError> {
        let n = rows.len();
        let mut m = Self::zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(NumError::LengthMismatch { left: n, right: row.len() });
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        if !all_finite(&m.data) {
            return Err(NumError::DegenerateInput("matrix entries"));
        }
        Ok(m)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, NumError> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                t[(i, j)] = self[(j, i)];
            }
        }
        t
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// `self - shift * I`.
    pub fn shifted(&self, shift: C64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] -= shift;
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, NumError> {
        if self.n != other.n {
            return Err(NumError::LengthMismatch { left: self.n, right: other.n });
        }
        let n = self.n;
        let mut out = Self::zeros(n)?;
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<Lu, NumError> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let tiny = f64::EPSILON * self.max_abs() * n as f64;
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > tiny) || pmax == 0.0 {
                return Err(NumError::Singular);
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
            }
        }
        Ok(Lu { n, a, perm, sign })
    }

    /// Solves `self * x = b`.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>, NumError> {
        if b.len() != self.n {
            return Err(NumError::LengthMismatch { left: self.n, right: b.len() });
        }
        Ok(self.lu()?.solve(b))
    }
}

impl Index<(usize, usize)> for SmallMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SmallMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Packed LU factors `P A = L U` (unit lower `L`).
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    a: Vec<C64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.a[i * n + j];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.a[i * n + j];
                x[i] = x[i] - u * x[j];
            }
            x[i] /= self.a[i * n + i];
        }
        x
    }

    pub fn det(&self) -> C64 {
        (0..self.n).map(|i| self.a[i * self.n + i]).product::<C64>() * self.sign
    }

    /// Trace of the inverse, via `n` triangular solves.
    pub fn inverse_trace(&self) -> C64 {
        let mut e = vec![C64::new(0.0, 0.0); self.n];
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..self.n {
            e[i] = C64::new(1.0, 0.0);
            tr += self.solve(&e)[i];
            e[i] = C64::new(0.0, 0.0);
        }
        tr
    }
}

/// Descending coefficients of `det(w I - A)` by the Faddeev–LeVerrier
/// recursion. The result is monic; entry 1 equals `-trace(A)`.
pub fn char_poly(a: &SmallMatrix) -> Vec<C64> {
    let n = a.order();
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[0] = C64::new(1.0, 0.0);
    // M_1 = I, c_{n-1} = -tr(A)
    let mut m = SmallMatrix::identity(n).expect("order already validated");
    for k in 1..=n {
        let am = a.matmul(&m).expect("same order");
        let ck = -am.trace() / k as f64;
        coeffs[k] = ck;
        if k < n {
            m = am;
            for i in 0..n {
                m[(i, i)] += ck;
            }
        }
    }
    coeffs
}

/// Eigenvalues of a small matrix.
///
/// The matrix is first split into the diagonal blocks it decouples into
/// under a symmetric permutation. Blocks of order one and two are solved in
/// closed form; larger ones by characteristic polynomial roots, refined by
/// Aberth corrections computed from LU factorizations of `w I - A`
/// (`f'/f = tr((w I - A)^-1)`), which keeps the accuracy of clustered
/// eigenvalues independent of the coefficient rounding.
pub fn eigvals_small(a: &SmallMatrix) -> Result<Vec<C64>, NumError> {
    let blocks = decoupled_blocks(a);
    let mut out = Vec::with_capacity(a.order());
    for block in blocks {
        match block.len() {
            1 => out.push(a[(block[0], block[0])]),
            2 => {
                let (i, j) = (block[0], block[1]);
                out.extend(eigvals_2x2(a[(i, i)], a[(i, j)], a[(j, i)], a[(j, j)]));
            }
            _ if block.len() == a.order() => out.extend(eigvals_dense(a)?),
            _ => {
                let rows: Vec<Vec<C64>> =
                    block.iter().map(|&r| block.iter().map(|&c| a[(r, c)]).collect()).collect();
                out.extend(eigvals_dense(&SmallMatrix::from_rows(&rows)?)?);
            }
        }
    }
    if !all_finite(&out) {
        return Err(NumError::DegenerateInput("non-finite eigenvalue"));
    }
    Ok(out)
}

/// Index sets of the connected components of the sparsity graph, each sorted.
fn decoupled_blocks(a: &SmallMatrix) -> Vec<Vec<usize>> {
    let n = a.order();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for r in 0..n {
        for c in 0..n {
            if r != c && a[(r, c)] != C64::new(0.0, 0.0) {
                let (x, y) = (find(&mut parent, r), find(&mut parent, c));
                parent[x.max(y)] = x.min(y);
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut root_of_block: Vec<usize> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match root_of_block.iter().position(|&r| r == root) {
            Some(k) => blocks[k].push(i),
            None => {
                root_of_block.push(root);
                blocks.push(vec![i]);
            }
        }
    }
    blocks
}

/// `(a + d)/2 +- sqrt(((a - d)/2)^2 + b c)`.
fn eigvals_2x2(a: C64, b: C64, c: C64, d: C64) -> [C64; 2] {
    let mean = (a + d) * 0.5;
    let half_gap = (a - d) * 0.5;
    let root = (half_gap * half_gap + b * c).sqrt();
    [mean + root, mean - root]
}

fn eigvals_dense(a: &SmallMatrix) -> Result<Vec<C64>, NumError> {
    let coeffs = char_poly(a);
    let mut roots = solve_poly_aberth(&coeffs)?;
    polish_eigenvalues(a, &mut roots);
    Ok(roots)
}

fn polish_eigenvalues(a: &SmallMatrix, roots: &mut [C64]) {
    let n = roots.len();
    for _ in 0..3 {
        for k in 0..n {
            let Ok(lu) = a.shifted(roots[k]).scaled(C64::new(-1.0, 0.0)).lu() else {
                continue; // exact eigenvalue to working precision
            };
            let tr = lu.inverse_trace();
            if tr.norm() == 0.0 || !tr.re.is_finite() || !tr.im.is_finite() {
                continue;
            }
            let newton = tr.inv();
            let repulsion: C64 = (0..n)
                .filter(|&j| j != k && roots[j] != roots[k])
                .map(|j| (roots[k] - roots[j]).inv())
                .sum();
            let step = newton / (C64::new(1.0, 0.0) - newton * repulsion);
            let candidate = roots[k] - step;
            let before = lu.det().norm();
            let after = match a.shifted(candidate).lu() {
                Ok(lu2) => lu2.det().norm(),
                Err(_) => 0.0,
            };
            if after < before {
                roots[k] = candidate;
            }
        }
    }
}

/// Unit-norm approximate null vector of `A - w I` by inverse iteration.
pub fn null_vector(a: &SmallMatrix, w: C64) -> Vec<C64> {
    let n = a.order();
    // Perturb the shift slightly so the factorization exists.
    let delta = 1e-10 * (1.0 + w.norm() + a.max_abs());
    let shifted = a.shifted(w + C64::new(delta, delta));
    let mut v = vec![C64::new(1.0, 0.0); n];
    if let Ok(lu) = shifted.lu() {
        for _ in 0..3 {
            v = lu.solve(&v);
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                break;
            }
            v.iter_mut().for_each(|z| *z /= norm);
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::super::multiset_distance;
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real(rows: &[&[f64]]) -> SmallMatrix {
        SmallMatrix::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn decoupled_blocks_are_solved_separately() {
        // Two 2x2 blocks interleaved, each exactly defective.
        let a = real(&[
            &[1.0, 0.0, 1.0, 0.0],
            &[0.0, 5.0, 0.0, 1.0],
            &[-1.0, 0.0, -1.0, 0.0],
            &[0.0, 0.0, 0.0, 5.0],
        ]);
        assert_eq!(decoupled_blocks(&a), vec![vec![0, 2], vec![1, 3]]);
        let mut eig = eigvals_small(&a).unwrap();
        eig.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert_eq!(eig, vec![c(0.0, 0.0), c(0.0, 0.0), c(5.0, 0.0), c(5.0, 0.0)]);
    }

    #[test]
    fn order_is_validated() {
        assert_eq!(SmallMatrix::zeros(1), Err(NumError::InvalidOrder(1)));
        assert_eq!(SmallMatrix::zeros(13), Err(NumError::InvalidOrder(13)));
        assert!(SmallMatrix::zeros(12).is_ok());
    }

    #[test]
    fn identity_char_poly() {
        let p = char_poly(&SmallMatrix::identity(3).unwrap());
        let expect = [1.0, -3.0, 3.0, -1.0];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - c(b, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn diagonal_char_poly_is_elementary_symmetric() {
        let (a, b, d) = (c(2.0, 1.0), c(-1.0, 0.5), c(0.3, -2.0));
        let mut m = SmallMatrix::zeros(3).unwrap();
        m[(0, 0)] = a;
        m[(1, 1)] = b;
        m[(2, 2)] = d;
        let p = char_poly(&m);
        assert!((p[1] + (a + b + d)).norm() < 1e-14);
        assert!((p[2] - (a * b + a * d + b * d)).norm() < 1e-14);
        assert!((p[3] + a * b * d).norm() < 1e-14);
    }

    #[test]
    fn triangular_eigenvalues_are_the_diagonal() {
        let m = real(&[&[1.0, 5.0, -2.0], &[0.0, -3.0, 7.0], &[0.0, 0.0, 0.5]]);
        let ev = eigvals_small(&m).unwrap();
        let d = multiset_distance(&ev, &[c(1.0, 0.0), c(-3.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn rotation_generator_has_imaginary_pair() {
        let m = real(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let ev = eigvals_small(&m).unwrap();
        let d = multiset_distance(&ev, &[c(0.0, 1.0), c(0.0, -1.0)]).unwrap();
        assert!(d < 1e-14);
    }

    #[test]
    fn lu_solve_and_det() {
        let m = SmallMatrix::from_rows(&[
            vec![c(2.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(3.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 0.0), c(1.0, 1.0), c(4.0, 0.0)],
        ])
        .unwrap();
        let b = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)];
        let x = m.solve(&b).unwrap();
        let back = m.matvec(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).norm() < 1e-14);
        }
        // cofactor expansion along the first row
        let det = c(2.0, 1.0) * (c(3.0, 0.0) * c(4.0, 0.0) - c(0.0, -1.0) * c(1.0, 1.0))
            - c(0.0, 1.0) * (c(1.0, 0.0) * c(4.0, 0.0))
            + c(1.0, 0.0) * (c(1.0, 0.0) * c(1.0, 1.0));
        assert!((m.lu().unwrap().det() - det).norm() < 1e-13);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let m = real(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(m.solve(&[c(1.0, 0.0), c(0.0, 0.0)]), Err(NumError::Singular));
    }

    #[test]
    fn null_vector_residual_is_small() {
        let m = real(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 4.0]]);
        let ev = eigvals_small(&m).unwrap();
        let v = null_vector(&m, ev[0]);
        let r = m.shifted(ev[0]).matvec(&v);
        let res = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(res < 1e-8, "residual {res:e}");
    }
}
