//! Dense and sparse symmetric positive-definite solvers.
//!
//! Grounded network Laplacians are SPD, so the solver menu is a packed
//! Cholesky factorization for small systems, preconditioned conjugate
//! gradients for large ones, and a Gauss-Jordan inversion kept as an
//! independent brute-force oracle. All parallel reductions use fixed
//! chunking so results are scheduling-independent.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use rayon::prelude::*;

/// Symmetric matrix stored as the lower triangle including the diagonal,
/// row-major: `a[i*(i+1)/2 + j]` for `j <= i`.
#[derive(Debug, Clone)]
pub struct PackedSym<F> {
    pub n: usize,
    pub a: Vec<F>,
}

impl<F: Scalar> PackedSym<F> {
    pub fn zeros(n: usize) -> Self {
        PackedSym { n, a: vec![F::zero(); n * (n + 1) / 2] }
    }

    #[inline]
    pub fn idx(i: usize, j: usize) -> usize {
        debug_assert!(j <= i);
        i * (i + 1) / 2 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        if j <= i {
            self.a[Self::idx(i, j)]
        } else {
            self.a[Self::idx(j, i)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        if j <= i {
            self.a[Self::idx(i, j)] = v;
        } else {
            self.a[Self::idx(j, i)] = v;
        }
    }

    pub fn matvec(&self, x: &[F], y: &mut [F]) {
        y.iter_mut().for_each(|v| *v = F::zero());
        for i in 0..self.n {
            let row = &self.a[i * (i + 1) / 2..i * (i + 1) / 2 + i];
            let mut acc = self.a[Self::idx(i, i)] * x[i];
            for (j, &aij) in row.iter().enumerate() {
                acc += aij * x[j];
                y[j] += aij * x[i];
            }
            y[i] += acc;
        }
    }

    /// In-place Cholesky `A = L L^T`; fails on a non-positive pivot.
    pub fn cholesky(mut self) -> Result<CholeskyFactor<F>> {
        let n = self.n;
        for j in 0..n {
            let rj = j * (j + 1) / 2;
            let mut d = self.a[rj + j];
            for k in 0..j {
                let l = self.a[rj + k];
                d -= l * l;
            }
            if !(d > F::zero()) {
                return Err(Error::Construction(format!(
                    "matrix not positive definite at pivot {j} (value {d:e})"
                )));
            }
            let ljj = d.sqrt();
            self.a[rj + j] = ljj;
            if j + 1 < n {
                // dot products against row j in parallel, writes sequential
                let dots: Vec<F> = (j + 1..n)
                    .into_par_iter()
                    .map(|i| {
                        let ri = i * (i + 1) / 2;
                        let (ra, rb) = (&self.a[ri..ri + j], &self.a[rj..rj + j]);
                        let mut s = F::zero();
                        for k in 0..j {
                            s += ra[k] * rb[k];
                        }
                        s
                    })
                    .collect();
                for (off, i) in (j + 1..n).enumerate() {
                    let ri = i * (i + 1) / 2;
                    self.a[ri + j] = (self.a[ri + j] - dots[off]) / ljj;
                }
            }
        }
        Ok(CholeskyFactor { l: self })
    }
}

#[derive(Debug, Clone)]
pub struct CholeskyFactor<F> {
    l: PackedSym<F>,
}

impl<F: Scalar> CholeskyFactor<F> {
    pub fn n(&self) -> usize {
        self.l.n
    }

    /// Solves `L y = b` in place.
    pub fn forward(&self, b: &mut [F]) {
        let n = self.l.n;
        for i in 0..n {
            let ri = i * (i + 1) / 2;
            let mut v = b[i];
            for k in 0..i {
                v -= self.l.a[ri + k] * b[k];
            }
            b[i] = v / self.l.a[ri + i];
        }
    }

    /// Solves `L^T x = y` in place.
    pub fn backward(&self, y: &mut [F]) {
        let n = self.l.n;
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in i + 1..n {
                v -= self.l.a[k * (k + 1) / 2 + i] * y[k];
            }
            y[i] = v / self.l.a[i * (i + 1) / 2 + i];
        }
    }

    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }

    /// Entries of `L^{-1} e_src`, used to read off nested-prefix resistances
    /// as partial sums of squares.
    pub fn forward_unit(&self, src: usize) -> Vec<F> {
        let mut y = vec![F::zero(); self.l.n];
        y[src] = F::one();
        self.forward(&mut y);
        y
    }
}

/// Gauss-Jordan inverse of a dense row-major matrix; the independent oracle
/// route for small systems.
pub fn gauss_jordan_inverse<F: Scalar>(mut a: Vec<F>, n: usize) -> Result<Vec<F>> {
    let mut inv = vec![F::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = F::one();
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p * n + col].abs().partial_cmp(&a[q * n + col].abs()).unwrap())
            .unwrap();
        if a[pivot * n + col].abs() == F::zero() {
            return Err(Error::Construction("singular matrix in brute-force inverse".into()));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
                inv.swap(col * n + k, pivot * n + k);
            }
        }
        let d = a[col * n + col];
        for k in 0..n {
            a[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f == F::zero() {
                continue;
            }
            for k in 0..n {
                let v = a[col * n + k];
                let w = inv[col * n + k];
                a[r * n + k] -= f * v;
                inv[r * n + k] -= f * w;
            }
        }
    }
    Ok(inv)
}

/// Abstract SPD operator for the iterative solver.
pub trait LinOp<F: Scalar>: Sync {
    fn size(&self) -> usize;
    fn apply(&self, x: &[F], y: &mut [F]);
    /// Matrix diagonal (for the Jacobi preconditioner).
    fn diagonal(&self) -> Vec<F>;
    /// Main and first off-diagonal band, if cheaply available, for the
    /// tridiagonal preconditioner.
    fn band(&self) -> Option<(Vec<F>, Vec<F>)> {
        None
    }
}

/// `L D L^T` factorization of an SPD tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagFactor<F> {
    d: Vec<F>,
    l: Vec<F>,
}

impl<F: Scalar> TridiagFactor<F> {
    pub fn new(main: &[F], off: &[F]) -> Result<Self> {
        let n = main.len();
        assert_eq!(off.len(), n.saturating_sub(1));
        let mut d = vec![F::zero(); n];
        let mut l = vec![F::zero(); n.saturating_sub(1)];
        let mut prev = F::zero();
        for i in 0..n {
            let mut di = main[i];
            if i > 0 {
                di -= prev * prev * d[i - 1];
            }
            if !(di > F::zero()) {
                return Err(Error::Construction("tridiagonal preconditioner not SPD".into()));
            }
            d[i] = di;
            if i + 1 < n {
                l[i] = off[i] / di;
                prev = l[i];
            }
        }
        Ok(TridiagFactor { d, l })
    }

    pub fn solve(&self, r: &[F], z: &mut [F]) {
        let n = self.d.len();
        if n == 0 {
            return;
        }
        z[0] = r[0];
        for i in 1..n {
            z[i] = r[i] - self.l[i - 1] * z[i - 1];
        }
        for i in 0..n {
            z[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let upd = self.l[i] * z[i + 1];
            z[i] -= upd;
        }
    }
}

#[derive(Debug, Clone)]
pub enum Precond<F> {
    Identity,
    Jacobi(Vec<F>),
    Tridiag(TridiagFactor<F>),
}

impl<F: Scalar> Precond<F> {
    fn apply(&self, r: &[F], z: &mut [F]) {
        match self {
            Precond::Identity => z.copy_from_slice(r),
            Precond::Jacobi(d) => {
                for i in 0..r.len() {
                    z[i] = r[i] / d[i];
                }
            }
            Precond::Tridiag(t) => t.solve(r, z),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgOutcome<F> {
    pub iterations: usize,
    pub rel_residual: F,
    pub converged: bool,
}

fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    let mut s = F::zero();
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Preconditioned conjugate gradients on `op x = b`, warm-started from the
/// incoming `x`. Convergence is declared on the true relative residual,
/// which is re-computed from scratch before returning.
pub fn pcg<F: Scalar>(
    op: &impl LinOp<F>,
    b: &[F],
    x: &mut [F],
    tol: F,
    max_iter: usize,
    pre: &Precond<F>,
) -> CgOutcome<F> {
    let n = op.size();
    let bnorm = dot(b, b).sqrt();
    if bnorm == F::zero() {
        x.iter_mut().for_each(|v| *v = F::zero());
        return CgOutcome { iterations: 0, rel_residual: F::zero(), converged: true };
    }
    let mut r = vec![F::zero(); n];
    let mut z = vec![F::zero(); n];
    let mut q = vec![F::zero(); n];
    op.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    while iterations < max_iter {
        let rnorm = dot(&r, &r).sqrt();
        if rnorm <= tol * bnorm {
            break;
        }
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > F::zero()) {
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        iterations += 1;
        // periodic residual refresh against drift
        if iterations % 128 == 0 {
            op.apply(x, &mut r);
            for i in 0..n {
                r[i] = b[i] - r[i];
            }
        }
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    // true residual
    op.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let rel = dot(&r, &r).sqrt() / bnorm;
    CgOutcome { iterations, rel_residual: rel, converged: rel <= tol }
}

/// Scalars with a LAPACK Cholesky (`?potrf`) and triangular solve
/// (`?trtrs`) behind them; the system OpenBLAS provides both.
pub trait LapackScalar: Scalar {
    /// In-place lower Cholesky of the column-major leading `n x n` block.
    fn potrf(n: usize, a: &mut [Self], lda: usize) -> Result<()>;
    /// Triangular solve on the leading `n x n` block of the factor;
    /// `transpose = false` solves `L y = b`, `true` solves `L^T y = b`.
    fn trtrs(n: usize, a: &[Self], lda: usize, b: &mut [Self], transpose: bool) -> Result<()>;
}

macro_rules! impl_lapack_scalar {
    ($t:ty, $potrf:ident, $trtrs:ident) => {
        impl LapackScalar for $t {
            fn potrf(n: usize, a: &mut [Self], lda: usize) -> Result<()> {
                assert!(a.len() >= lda * n && lda >= n);
                let mut info = 0i32;
                let nn = n as i32;
                let ldai = lda as i32;
                unsafe {
                    lapack_sys::$potrf(
                        &(b'L' as std::ffi::c_char),
                        &nn,
                        a.as_mut_ptr(),
                        &ldai,
                        &mut info,
                    );
                }
                if info != 0 {
                    return Err(Error::Construction(format!(
                        "Cholesky failed: not positive definite at pivot {info}"
                    )));
                }
                Ok(())
            }

            fn trtrs(n: usize, a: &[Self], lda: usize, b: &mut [Self], transpose: bool) -> Result<()> {
                assert!(b.len() >= n && a.len() >= lda * n);
                let mut info = 0i32;
                let nn = n as i32;
                let one = 1i32;
                let ldai = lda as i32;
                let trans = if transpose { b'T' } else { b'N' } as std::ffi::c_char;
                unsafe {
                    lapack_sys::$trtrs(
                        &(b'L' as std::ffi::c_char),
                        &trans,
                        &(b'N' as std::ffi::c_char),
                        &nn,
                        &one,
                        a.as_ptr(),
                        &ldai,
                        b.as_mut_ptr(),
                        &nn,
                        &mut info,
                    );
                }
                if info != 0 {
                    return Err(Error::Construction(format!("triangular solve failed: {info}")));
                }
                Ok(())
            }
        }
    };
}

impl_lapack_scalar!(f64, dpotrf_, dtrtrs_);
impl_lapack_scalar!(f32, spotrf_, strtrs_);

/// Full-storage (column-major) SPD matrix with a LAPACK Cholesky whose
/// leading blocks factor the leading sub-systems: once nodes are ordered so
/// boxes are prefixes, one factorization serves every nested box, and
/// `R_n = sum of the first k_n squares of L^{-1} e_source`.
pub struct FullSpd<F> {
    pub n: usize,
    a: Vec<F>,
    diag: Vec<F>,
    factored: bool,
}

impl<F: LapackScalar> FullSpd<F> {
    pub fn new(n: usize) -> Self {
        FullSpd { n, a: vec![F::zero(); n * n], diag: vec![F::zero(); n], factored: false }
    }

    /// Set `A(r, c) = A(c, r) = v`.
    #[inline]
    pub fn set_sym(&mut self, r: usize, c: usize, v: F) {
        self.a[c * self.n + r] = v;
        self.a[r * self.n + c] = v;
        if r == c {
            self.diag[r] = v;
        }
    }

    pub fn column_mut(&mut self, c: usize) -> &mut [F] {
        &mut self.a[c * self.n..(c + 1) * self.n]
    }

    /// Parallel column-wise fill; `f(c, column)` writes all rows of column
    /// `c`. Call [`FullSpd::finish_fill`] afterwards.
    pub fn fill_columns(&mut self, f: impl Fn(usize, &mut [F]) + Sync) {
        let n = self.n;
        self.a.par_chunks_mut(n).enumerate().for_each(|(c, col)| f(c, col));
    }

    /// Record the diagonal after filling columns directly.
    pub fn finish_fill(&mut self) {
        for i in 0..self.n {
            self.diag[i] = self.a[i * self.n + i];
        }
    }

    pub fn factor(&mut self) -> Result<()> {
        F::potrf(self.n, &mut self.a, self.n)?;
        self.factored = true;
        Ok(())
    }

    /// `L^{-1} e_src` over the full size.
    pub fn forward_unit(&self, src: usize) -> Result<Vec<F>> {
        assert!(self.factored);
        let mut y = vec![F::zero(); self.n];
        y[src] = F::one();
        F::trtrs(self.n, &self.a, self.n, &mut y, false)?;
        Ok(y)
    }

    /// Given `y = L^{-1} e_src`, recovers the solution of the leading
    /// `k x k` system via the backward solve on the leading factor block.
    pub fn prefix_solution(&self, y: &[F], k: usize) -> Result<Vec<F>> {
        assert!(self.factored && k <= self.n);
        let mut u = y[..k].to_vec();
        F::trtrs(k, &self.a, self.n, &mut u, true)?;
        Ok(u)
    }

    /// Applies the original (pre-factorization) leading `k x k` matrix,
    /// reading the untouched strict upper triangle plus the saved diagonal.
    pub fn apply_original_prefix(&self, k: usize, x: &[F], y: &mut [F]) {
        let n = self.n;
        let a = &self.a;
        let diag = &self.diag;
        y.par_iter_mut().enumerate().for_each(|(r, yr)| {
            let mut acc = diag[r] * x[r];
            // entries A(r, c): for c > r read a[c*n + r]; for c < r use
            // symmetry A(r, c) = A(c, r) = a[r*n + c]
            for (c, &xc) in x.iter().enumerate().take(k) {
                if c > r {
                    acc += a[c * n + r] * xc;
                } else if c < r {
                    acc += a[r * n + c] * xc;
                }
            }
            *yr = acc;
        });
    }
}

/// Strict lower triangle of pairwise couplings (no diagonal), row-major,
/// with prefix-restricted SPD matvec: the grounded Laplacian of the box of
/// side `k` is the leading `k x k` block once nodes are sorted by norm.
#[derive(Debug)]
pub struct PackedCoupling<F> {
    pub n: usize,
    /// `c[i*(i-1)/2 + j]` = coupling between `i` and `j < i`.
    pub c: Vec<F>,
}

impl<F: Scalar> PackedCoupling<F> {
    pub fn zeros(n: usize) -> Self {
        PackedCoupling { n, c: vec![F::zero(); n * n.saturating_sub(1) / 2] }
    }

    #[inline]
    pub fn idx(i: usize, j: usize) -> usize {
        debug_assert!(j < i);
        i * (i - 1) / 2 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        debug_assert!(i != j);
        if j < i {
            self.c[Self::idx(i, j)]
        } else {
            self.c[Self::idx(j, i)]
        }
    }

    /// `y = (diag - C)[0..k, 0..k] x`, parallel over fixed row blocks with
    /// ordered merging of scatter contributions.
    pub fn laplacian_matvec_prefix(&self, diag: &[F], k: usize, x: &[F], y: &mut [F]) {
        assert!(k <= self.n && x.len() == k && y.len() == k);
        let nb = (rayon::current_num_threads() * 4).max(1).min(k.max(1));
        // balance blocks by triangle area
        let mut bounds = Vec::with_capacity(nb + 1);
        bounds.push(0usize);
        let total = k as f64 * (k as f64 - 1.0) / 2.0;
        for b in 1..nb {
            let target = total * b as f64 / nb as f64;
            // solve i(i-1)/2 = target
            let i = (0.5 + (0.25 + 2.0 * target).sqrt()).floor() as usize;
            bounds.push(i.clamp(*bounds.last().unwrap(), k));
        }
        bounds.push(k);
        let results: Vec<(Vec<F>, Vec<F>)> = (0..nb)
            .into_par_iter()
            .map(|b| {
                let (lo, hi) = (bounds[b], bounds[b + 1]);
                let mut own = vec![F::zero(); hi - lo];
                let mut scatter = vec![F::zero(); lo];
                for i in lo..hi {
                    let base = i * i.saturating_sub(1) / 2;
                    let row = &self.c[base..base + i.min(k)];
                    let xi = x[i];
                    let mut acc = F::zero();
                    // j < lo goes to scatter, lo <= j < i stays local
                    for j in 0..lo.min(row.len()) {
                        let cij = row[j];
                        acc -= cij * x[j];
                        scatter[j] -= cij * xi;
                    }
                    for j in lo..row.len() {
                        let cij = row[j];
                        acc -= cij * x[j];
                        own[j - lo] -= cij * xi;
                    }
                    own[i - lo] += acc + diag[i] * xi;
                }
                (own, scatter)
            })
            .collect();
        y.iter_mut().for_each(|v| *v = F::zero());
        for (b, (own, scatter)) in results.iter().enumerate() {
            let lo = bounds[b];
            for (off, v) in own.iter().enumerate() {
                y[lo + off] += *v;
            }
            for (j, v) in scatter.iter().enumerate() {
                y[j] += *v;
            }
        }
    }
}

/// Compressed sparse rows with symmetric storage (both directions present),
/// columns ascending within each row.
#[derive(Debug)]
pub struct Csr<F> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<F>,
}

impl<F: Scalar> Csr<F> {
    /// `y = (diag - C)[0..k, 0..k] x`; columns `>= k` are skipped via the
    /// ascending order.
    pub fn laplacian_matvec_prefix(&self, diag: &[F], k: usize, x: &[F], y: &mut [F]) {
        assert!(k <= self.n && x.len() == k && y.len() == k);
        let row_ptr = &self.row_ptr;
        let cols = &self.cols;
        let vals = &self.vals;
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut acc = diag[i] * x[i];
            for e in row_ptr[i]..row_ptr[i + 1] {
                let j = cols[e] as usize;
                if j >= k {
                    break;
                }
                acc -= vals[e] * x[j];
            }
            *yi = acc;
        });
    }

    pub fn coupling(&self, i: usize, j: usize) -> F {
        let r = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match r.binary_search(&(j as u32)) {
            Ok(pos) => self.vals[self.row_ptr[i] + pos],
            Err(_) => F::zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spd_example(n: usize) -> PackedSym<f64> {
        // diagonally dominant symmetric matrix
        let mut m = PackedSym::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = if i == j { 4.0 + i as f64 } else { 1.0 / (1.0 + (i - j) as f64) };
                m.set(i, j, v);
            }
        }
        m
    }

    #[test]
    fn cholesky_solves() {
        let n = 40;
        let m = spd_example(n);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
        let f = m.clone().cholesky().unwrap();
        let x = f.solve(&b);
        let mut y = vec![0.0; n];
        m.matvec(&x, &mut y);
        for i in 0..n {
            assert_relative_eq!(y[i], b[i], max_relative = 1e-10);
        }
    }

    #[test]
    fn gauss_jordan_matches_cholesky() {
        let n = 25;
        let m = spd_example(n);
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dense[i * n + j] = m.get(i, j);
            }
        }
        let inv = gauss_jordan_inverse(dense, n).unwrap();
        let f = m.clone().cholesky().unwrap();
        let mut e0 = vec![0.0; n];
        e0[0] = 1.0;
        let x = f.solve(&e0);
        for i in 0..n {
            assert_relative_eq!(inv[i * n], x[i], max_relative = 1e-9);
        }
    }

    struct DenseOp(PackedSym<f64>);
    impl LinOp<f64> for DenseOp {
        fn size(&self) -> usize {
            self.0.n
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            self.0.matvec(x, y);
        }
        fn diagonal(&self) -> Vec<f64> {
            (0..self.0.n).map(|i| self.0.get(i, i)).collect()
        }
        fn band(&self) -> Option<(Vec<f64>, Vec<f64>)> {
            let main = self.diagonal();
            let off: Vec<f64> = (0..self.0.n - 1).map(|i| self.0.get(i + 1, i)).collect();
            Some((main, off))
        }
    }

    #[test]
    fn pcg_agrees_with_cholesky() {
        let n = 60;
        let m = spd_example(n);
        let b: Vec<f64> = (0..n).map(|i| ((i * i) as f64).sin()).collect();
        let reference = m.clone().cholesky().unwrap().solve(&b);
        let op = DenseOp(m);
        for pre in [
            Precond::Identity,
            Precond::Jacobi(op.diagonal()),
            {
                let (main, off) = op.band().unwrap();
                Precond::Tridiag(TridiagFactor::new(&main, &off).unwrap())
            },
        ] {
            let mut x = vec![0.0; n];
            let out = pcg(&op, &b, &mut x, 1e-12, 1000, &pre);
            assert!(out.converged, "cg failed with {pre:?}");
            for i in 0..n {
                assert_relative_eq!(x[i], reference[i], max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn tridiag_factor_solves() {
        let main = vec![4.0, 5.0, 6.0, 5.0];
        let off = vec![-1.0, -2.0, -1.5];
        let t = TridiagFactor::new(&main, &off).unwrap();
        let r = vec![1.0, 2.0, -1.0, 0.5];
        let mut z = vec![0.0; 4];
        t.solve(&r, &mut z);
        // verify T z = r
        let n = 4;
        for i in 0..n {
            let mut v = main[i] * z[i];
            if i > 0 {
                v += off[i - 1] * z[i - 1];
            }
            if i + 1 < n {
                v += off[i] * z[i + 1];
            }
            assert_relative_eq!(v, r[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn packed_coupling_prefix_matvec_matches_direct() {
        let n = 37;
        let mut pc = PackedCoupling::zeros(n);
        let mut diag = vec![0.0; n];
        for i in 0..n {
            for j in 0..i {
                let c = 1.0 / (1.0 + (i + 2 * j) as f64);
                pc.c[PackedCoupling::<f64>::idx(i, j)] = c;
            }
        }
        for i in 0..n {
            diag[i] = 2.0 + (0..n).filter(|&j| j != i).map(|j| pc.get(i.max(j), i.min(j))).sum::<f64>();
        }
        for k in [1usize, 5, 20, n] {
            let x: Vec<f64> = (0..k).map(|i| (i as f64).cos()).collect();
            let mut y = vec![0.0; k];
            pc.laplacian_matvec_prefix(&diag, k, &x, &mut y);
            for i in 0..k {
                let mut acc = diag[i] * x[i];
                for j in 0..k {
                    if j != i {
                        acc -= pc.get(i.max(j), i.min(j)) * x[j];
                    }
                }
                assert_relative_eq!(y[i], acc, max_relative = 1e-12, epsilon = 1e-12);
            }
        }
    }
}
