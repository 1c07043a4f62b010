//! Small dense linear algebra: cyclic Jacobi eigendecomposition, row
//! reduction with a pivot threshold, and the Hermitian-to-real embedding.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Off-diagonal mass, relative to the Frobenius norm, at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigen needs a square matrix");
    let mut m = a.clone();
    // symmetrize against round-off in the caller
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = JACOBI_TOL * total.max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// `Σ f(λ_i) v_i v_iᵀ` from an eigen-decomposition.
pub fn spectral_map(values: &[f64], vectors: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = vectors.nrows();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        let w = f(lambda);
        if w == 0.0 {
            continue;
        }
        let col = vectors.column(k);
        for i in 0..n {
            let ci = w * col[i];
            if ci == 0.0 {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += ci * col[j];
            }
        }
    }
    out
}

/// Nearest positive semidefinite matrix in Frobenius norm; also returns the
/// smallest eigenvalue of the input.
pub fn project_psd(a: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let (values, vectors) = jacobi_eigen(a);
    let min = values.first().copied().unwrap_or(0.0);
    (spectral_map(&values, &vectors, |l| l.max(0.0)), min)
}

/// Moore–Penrose pseudo-inverse of a symmetric positive semidefinite matrix.
pub fn pinv_psd(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (values, vectors) = jacobi_eigen(a);
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = rel_tol * top.max(f64::MIN_POSITIVE);
    spectral_map(&values, &vectors, |l| if l > cut { 1.0 / l } else { 0.0 })
}

/// Real symmetric embedding `[[A, -B], [B, A]]` of a Hermitian `A + iB`.
pub fn embed_hermitian(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`embed_hermitian`] (reads the left block column).
pub fn unembed_hermitian(e: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = e.nrows() / 2;
    DMatrix::from_fn(n, n, |r, c| Complex64::new(e[(r, c)], e[(r + n, c)]))
}

/// Scalars usable in [`RowReduction`].
pub trait Scalar: Copy + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn magnitude(self) -> f64;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
}

/// Reduced row echelon form of `[A | b]` with partial pivoting.
#[derive(Clone, Debug)]
pub struct RowReduction<T> {
    /// Reduced rows, one per pivot, each of length `cols`.
    pub rows: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub pivots: Vec<usize>,
    pub cols: usize,
    /// Largest right-hand side left over in a zero row; 0 when consistent.
    pub inconsistency: f64,
}

impl<T: Scalar> RowReduction<T> {
    /// Pivots smaller than `tol` times the largest input magnitude count as zero.
    pub fn new(matrix: &[Vec<T>], rhs: &[T], cols: usize, tol: f64) -> Self {
        let mut a: Vec<Vec<T>> = matrix.to_vec();
        let mut b: Vec<T> = rhs.to_vec();
        let scale = a
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |m, x| m.max(x.magnitude()))
            .max(1.0);
        let cut = tol * scale;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..cols {
            if row == a.len() {
                break;
            }
            let (best, mag) = (row..a.len())
                .map(|r| (r, a[r][col].magnitude()))
                .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if mag <= cut {
                for r in row..a.len() {
                    a[r][col] = T::zero();
                }
                continue;
            }
            a.swap(row, best);
            b.swap(row, best);
            let p = a[row][col];
            for k in col..cols {
                a[row][k] = a[row][k].div(p);
            }
            b[row] = b[row].div(p);
            for r in 0..a.len() {
                if r == row {
                    continue;
                }
                let f = a[r][col];
                if f == T::zero() {
                    continue;
                }
                for k in col..cols {
                    let v = a[row][k];
                    a[r][k] = a[r][k].sub(f.mul(v));
                }
                b[r] = b[r].sub(f.mul(b[row]));
            }
            pivots.push(col);
            row += 1;
        }
        let inconsistency = b[row..].iter().fold(0.0f64, |m, x| m.max(x.magnitude()));
        a.truncate(row);
        b.truncate(row);
        RowReduction {
            rows: a,
            rhs: b,
            pivots,
            cols,
            inconsistency,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Solution with every free variable set to zero.
    pub fn particular(&self) -> Vec<T> {
        let mut x = vec![T::zero(); self.cols];
        for (k, &p) in self.pivots.iter().enumerate() {
            x[p] = self.rhs[k];
        }
        x
    }

    /// One null-space vector per free column.
    pub fn null_space(&self) -> Vec<Vec<T>> {
        let mut is_pivot = vec![false; self.cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![T::zero(); self.cols];
                v[free] = T::one();
                for (k, &p) in self.pivots.iter().enumerate() {
                    v[p] = T::zero().sub(self.rows[k][free]);
                }
                v
            })
            .collect()
    }
}

/// Rank of a set of complex vectors (rows).
pub fn complex_rank(rows: &[Vec<Complex64>], cols: usize, tol: f64) -> usize {
    let rhs = vec![Complex64::new(0.0, 0.0); rows.len()];
    RowReduction::new(rows, &rhs, cols, tol).rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn pseudo_random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = DMatrix::from_fn(n, n, |_, _| next());
        m = &m + m.transpose();
        m
    }

    #[test]
    fn jacobi_matches_reference_eigensolver() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (12, 4), (30, 5)] {
            let a = pseudo_random_symmetric(n, seed);
            let (values, vectors) = jacobi_eigen(&a);
            let mut reference: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            for (x, y) in values.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-10, "n={n}: {x} vs {y}");
            }
            let rebuilt = spectral_map(&values, &vectors, |l| l);
            assert!((rebuilt - &a).norm() < 1e-10);
            let gram = vectors.transpose() * &vectors;
            assert!((gram - DMatrix::<f64>::identity(n, n)).norm() < 1e-10);
        }
    }

    #[test]
    fn psd_projection_clips_negative_part() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.0]);
        let (p, min) = project_psd(&a);
        assert_eq!(min, -2.0);
        assert!((p - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn embedding_round_trip() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.25),
                Complex64::new(0.5, -0.25),
                Complex64::new(2.0, 0.0),
            ],
        );
        let e = embed_hermitian(&h);
        assert!((e.clone() - e.transpose()).norm() == 0.0);
        assert_eq!(unembed_hermitian(&e), h);
        // the embedding doubles each eigenvalue
        let (values, _) = jacobi_eigen(&e);
        assert!((values[0] - values[1]).abs() < 1e-12);
        assert!((values[2] - values[3]).abs() < 1e-12);
    }

    #[test]
    fn row_reduction_solves_and_detects_inconsistency() {
        let a = vec![vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 1.0]];
        let red = RowReduction::new(&a, &[3.0, 7.0], 3, 1e-10);
        assert_eq!(red.rank(), 2);
        assert_eq!(red.inconsistency, 0.0);
        let x = red.particular();
        assert!((x[0] + 2.0 * x[1] - 3.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 4.0 * x[1] + x[2] - 7.0).abs() < 1e-12);
        let null = red.null_space();
        assert_eq!(null.len(), 1);
        assert!((null[0][0] + 2.0 * null[0][1]).abs() < 1e-12);

        let bad = RowReduction::new(&[vec![1.0, 1.0], vec![2.0, 2.0]], &[1.0, 3.0], 2, 1e-10);
        assert!((bad.inconsistency - 0.5).abs() < 1e-12);
    }

    #[test]
    fn complex_rank_counts_over_c() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        // (1, i) and (i, -1) are parallel over C
        assert_eq!(complex_rank(&[vec![one, i], vec![i, -one]], 2, 1e-10), 1);
        assert_eq!(complex_rank(&[vec![one, i], vec![one, -i]], 2, 1e-10), 2);
    }
}
