//! Dense complex matrices and a least-squares solver.
//!
//! Least squares uses Householder QR with column pivoting. When the pivoted
//! diagonal collapses below `eps * max(m, n) * |R00|` the problem is treated as
//! rank deficient and the minimum-norm solution is produced through a complete
//! orthogonal decomposition. The normal equations are never formed: contiguous
//! columns of the observation matrix reach condition numbers near 1e9, which
//! squaring would push past double precision.

use crate::scalar::{inner, norm, Cx, Real};

/// Column-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Cx::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equally sized columns.
    pub fn from_columns(rows: usize, columns: &[Vec<Cx<T>>]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "column length mismatch");
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[Cx<T>] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [Cx<T>] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cx<T>) {
        self.data[j * self.rows + i] = v;
    }

    /// `A x`.
    pub fn matvec(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![Cx::new(T::zero(), T::zero()); self.rows];
        for (j, xj) in x.iter().enumerate() {
            if xj.re == T::zero() && xj.im == T::zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.col(j)) {
                *o += a * xj;
            }
        }
        out
    }

    /// `A^H y`.
    pub fn adjoint_matvec(&self, y: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(y.len(), self.rows);
        (0..self.cols).map(|j| inner(self.col(j), y)).collect()
    }

    /// `A B`.
    pub fn matmul(&self, other: &CMat<T>) -> CMat<T> {
        assert_eq!(self.cols, other.rows);
        let cols: Vec<Vec<Cx<T>>> = (0..other.cols)
            .map(|j| self.matvec(other.col(j)))
            .collect();
        CMat::from_columns(self.rows, &cols)
    }

    pub fn select_columns(&self, idx: &[usize]) -> CMat<T> {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        CMat {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn column_norms(&self) -> Vec<T> {
        (0..self.cols).map(|j| norm(self.col(j))).collect()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Cx<T>] {
        &mut self.data
    }
}

/// Outcome of a least-squares solve `min ||A x - b||`.
#[derive(Clone, Debug)]
pub struct LeastSquares<T> {
    pub coeffs: Vec<Cx<T>>,
    pub residual: Vec<Cx<T>>,
    pub residual_norm: T,
    /// Numerical rank of `A`.
    pub rank: usize,
    /// Increase of `||r||^2` caused by deleting each column and re-solving.
    /// Filled only for full-rank problems when requested.
    pub removal_cost: Option<Vec<T>>,
}

impl<T: Real> LeastSquares<T> {
    pub fn rank_deficient(&self) -> bool {
        self.rank < self.coeffs.len()
    }
}

struct Reflector<T> {
    start: usize,
    v: Vec<Cx<T>>,
    vnorm2: T,
}

impl<T: Real> Reflector<T> {
    /// Applies `I - 2 v v^H / |v|^2` to the tail `x[start..]`.
    fn apply(&self, x: &mut [Cx<T>]) {
        let tail = &mut x[self.start..self.start + self.v.len()];
        let s = inner(&self.v, tail);
        let f = s * (T::lit(2.0) / self.vnorm2);
        for (t, v) in tail.iter_mut().zip(&self.v) {
            *t -= v * f;
        }
    }

    /// Builds the reflector mapping `x` onto `beta e_1`; returns `None` for a zero vector.
    fn annihilating(start: usize, x: &[Cx<T>]) -> Option<(Self, Cx<T>)> {
        let alpha = norm(x);
        if alpha == T::zero() {
            return None;
        }
        let x0 = x[0];
        let phase = if x0.norm() == T::zero() {
            Cx::new(T::one(), T::zero())
        } else {
            x0 / x0.norm()
        };
        let beta = -phase * alpha;
        let mut v = x.to_vec();
        v[0] = x0 - beta;
        let vnorm2: T = v.iter().map(|z| z.norm_sqr()).sum();
        Some((Self { start, v, vnorm2 }, beta))
    }
}

/// Solves the least-squares problem on the listed columns of `a`.
pub fn lstsq_columns<T: Real>(
    a: &CMat<T>,
    columns: &[usize],
    b: &[Cx<T>],
    want_removal_cost: bool,
) -> LeastSquares<T> {
    assert_eq!(b.len(), a.rows());
    let m = a.rows();
    let n = columns.len();
    let zero = Cx::new(T::zero(), T::zero());
    if n == 0 {
        return LeastSquares {
            coeffs: Vec::new(),
            residual: b.to_vec(),
            residual_norm: norm(b),
            rank: 0,
            removal_cost: want_removal_cost.then(Vec::new),
        };
    }

    // Working copy, column-major, with pivot bookkeeping.
    let mut work: Vec<Vec<Cx<T>>> = columns.iter().map(|&j| a.col(j).to_vec()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<Reflector<T>> = Vec::with_capacity(n.min(m));
    let tol = T::epsilon() * T::from_usize_lossy(m.max(n));
    let mut r00 = T::zero();
    let mut rank = 0;

    for k in 0..n.min(m) {
        let mut best = k;
        let mut best_norm = T::lit(-1.0);
        for (j, col) in work.iter().enumerate().skip(k) {
            let pn: T = col[k..].iter().map(|z| z.norm_sqr()).sum();
            if pn > best_norm {
                best_norm = pn;
                best = j;
            }
        }
        work.swap(k, best);
        perm.swap(k, best);
        let alpha = best_norm.sqrt();
        if k == 0 {
            r00 = alpha;
        }
        if alpha == T::zero() || alpha <= tol * r00 {
            break;
        }
        let (refl, beta) = match Reflector::annihilating(k, &work[k][k..]) {
            Some(r) => r,
            None => break,
        };
        for col in work.iter_mut().skip(k + 1) {
            refl.apply(col);
        }
        work[k][k] = beta;
        for z in work[k][k + 1..].iter_mut() {
            *z = zero;
        }
        reflectors.push(refl);
        rank = k + 1;
    }

    let mut c = b.to_vec();
    for r in &reflectors {
        r.apply(&mut c);
    }

    let mut xp = vec![zero; n];
    let mut removal_cost = None;
    if rank == n {
        for k in (0..n).rev() {
            let mut s = c[k];
            for j in k + 1..n {
                s -= work[j][k] * xp[j];
            }
            xp[k] = s / work[k][k];
        }
        if want_removal_cost {
            // diag((A^H A)^{-1}) in pivoted order = squared row norms of R^{-1}.
            let mut rinv = vec![vec![zero; n]; n]; // rinv[col][row]
            for j in 0..n {
                let mut x = vec![zero; n];
                for k in (0..=j).rev() {
                    let mut s = if k == j {
                        Cx::new(T::one(), T::zero())
                    } else {
                        zero
                    };
                    for (i, xi) in x.iter().enumerate().take(j + 1).skip(k + 1) {
                        s -= work[i][k] * xi;
                    }
                    x[k] = s / work[k][k];
                }
                rinv[j] = x;
            }
            let mut cost = vec![T::zero(); n];
            for k in 0..n {
                let row_norm2: T = (0..n).map(|j| rinv[j][k].norm_sqr()).sum();
                cost[perm[k]] = xp[k].norm_sqr() / row_norm2;
            }
            removal_cost = Some(cost);
        }
    } else if rank > 0 {
        // Complete orthogonal decomposition: with T = R[0..rank, 0..n],
        // factor T^H = Z [S; 0] so T = [S^H 0] Z^H, then solve S^H w = c.
        let mut th: Vec<Vec<Cx<T>>> = (0..rank)
            .map(|i| (0..n).map(|j| work[j][i].conj()).collect())
            .collect();
        let mut zrefl: Vec<Reflector<T>> = Vec::with_capacity(rank);
        for k in 0..rank {
            if let Some((refl, beta)) = Reflector::annihilating(k, &th[k][k..]) {
                for col in th.iter_mut().skip(k + 1) {
                    refl.apply(col);
                }
                th[k][k] = beta;
                for z in th[k][k + 1..].iter_mut() {
                    *z = zero;
                }
                zrefl.push(refl);
            }
        }
        let mut w = vec![zero; n];
        for i in 0..rank {
            let mut s = c[i];
            for (j, wj) in w.iter().enumerate().take(i) {
                s -= th[i][j].conj() * wj;
            }
            w[i] = s / th[i][i].conj();
        }
        for r in zrefl.iter().rev() {
            r.apply(&mut w);
        }
        xp = w;
    }

    let mut coeffs = vec![zero; n];
    for k in 0..n {
        coeffs[perm[k]] = xp[k];
    }
    let mut residual = b.to_vec();
    for (&j, x) in columns.iter().zip(&coeffs) {
        for (r, a) in residual.iter_mut().zip(a.col(j)) {
            *r -= a * x;
        }
    }
    let residual_norm = norm(&residual);
    LeastSquares {
        coeffs,
        residual,
        residual_norm,
        rank,
        removal_cost,
    }
}

/// Solves `min ||A x - b||` over all columns of `a`.
pub fn lstsq<T: Real>(a: &CMat<T>, b: &[Cx<T>]) -> LeastSquares<T> {
    let cols: Vec<usize> = (0..a.cols()).collect();
    lstsq_columns(a, &cols, b, false)
}
