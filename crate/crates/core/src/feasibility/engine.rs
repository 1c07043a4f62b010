//! Shared PSD-feasibility engine: a Hermitian matrix that depends linearly on
//! real unknowns subject to linear equality constraints.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{embed_hermitian, jacobi_eigen, pinv_psd, spectral_map, unembed_hermitian, RowReduction};

use super::FeasibilityOptions;

const PIVOT_TOL: f64 = 1e-10;
const CONSTANT_TOL: f64 = 1e-12;
const LAMBDA_CHECK_EVERY: usize = 25;

/// `M(x) = Σ_k x_k B_k` with constraints `C x = b`.
///
/// Each unknown lists its contributions `(i, j, c)` with `i ≤ j`; the lower
/// triangle mirrors the upper one and diagonal entries keep the real part.
#[derive(Clone, Debug)]
pub(crate) struct HermitianAffine {
    pub dim: usize,
    pub contributions: Vec<Vec<(usize, usize, Complex64)>>,
    pub constraints: Vec<(Vec<f64>, f64)>,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug)]
pub(crate) enum EngineOutcome {
    Feasible {
        x: Vec<f64>,
        matrix: DMatrix<Complex64>,
        min_eigenvalue: f64,
        iterations: usize,
        residual: f64,
    },
    Infeasible(String),
    Stalled { residual: f64, iterations: usize },
    Exhausted { residual: f64, iterations: usize },
}

impl HermitianAffine {
    pub fn unknowns(&self) -> usize {
        self.contributions.len()
    }

    pub fn matrix_of(&self, x: &[f64]) -> DMatrix<Complex64> {
        let mut m = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for (k, contrib) in self.contributions.iter().enumerate() {
            if x[k] == 0.0 {
                continue;
            }
            for &(i, j, c) in contrib {
                if i == j {
                    m[(i, i)] += Complex64::new(c.re * x[k], 0.0);
                } else {
                    m[(i, j)] += c * x[k];
                    m[(j, i)] += c.conj() * x[k];
                }
            }
        }
        m
    }

    /// Rows `Re/Im (M(x) v)_r = 0` for a vector `v` supported on `support`.
    pub fn kernel_rows(&self, support: &[usize], v: &[Complex64]) -> Vec<Vec<f64>> {
        let n = self.unknowns();
        let mut acc = vec![vec![Complex64::default(); n]; self.dim];
        let position = |col: usize| support.iter().position(|&s| s == col);
        for (k, contrib) in self.contributions.iter().enumerate() {
            for &(i, j, c) in contrib {
                let mut touch = |r: usize, col: usize, value: Complex64| {
                    if let Some(s) = position(col) {
                        acc[r][k] += value * v[s];
                    }
                };
                if i == j {
                    touch(i, i, Complex64::new(c.re, 0.0));
                } else {
                    touch(i, j, c);
                    touch(j, i, c.conj());
                }
            }
        }
        let mut rows = Vec::new();
        for r in acc {
            let re: Vec<f64> = r.iter().map(|z| z.re).collect();
            let im: Vec<f64> = r.iter().map(|z| z.im).collect();
            for row in [re, im] {
                if row.iter().any(|x| x.abs() > CONSTANT_TOL) {
                    rows.push(row);
                }
            }
        }
        rows
    }
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub(crate) fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    jacobi_eigen(&embed_hermitian(m)).0[0]
}

fn project_psd_hermitian(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (values, vectors) = jacobi_eigen(&embed_hermitian(m));
    let clipped = unembed_hermitian(&spectral_map(&values, &vectors, |l| l.max(0.0)));
    // clean round-off so the iterate stays exactly Hermitian
    let n = clipped.nrows();
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(clipped[(r, r)].re, 0.0)
        } else {
            0.5 * (clipped[(r, c)] + clipped[(c, r)].conj())
        }
    })
}

fn inner(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

struct Affine {
    x0: Vec<f64>,
    directions: Vec<Vec<f64>>,
    base: DMatrix<Complex64>,
    slopes: Vec<DMatrix<Complex64>>,
}

impl Affine {
    fn point(&self, t: &[f64]) -> Vec<f64> {
        let mut x = self.x0.clone();
        for (dir, &tk) in self.directions.iter().zip(t) {
            for (xi, di) in x.iter_mut().zip(dir) {
                *xi += tk * di;
            }
        }
        x
    }

    fn is_constant(&self, i: usize, j: usize) -> bool {
        self.slopes.iter().all(|s| s[(i, j)].norm() <= CONSTANT_TOL)
    }
}

fn reduce(problem: &HermitianAffine, rows: &[Vec<f64>], rhs: &[f64], tol: f64) -> Result<(RowReduction<f64>, Affine), String> {
    let red = RowReduction::new(rows, rhs, problem.unknowns(), PIVOT_TOL);
    if red.inconsistency > tol {
        return Err(format!(
            "linear constraints are inconsistent (leftover {:.3e})",
            red.inconsistency
        ));
    }
    let x0 = red.particular();
    let directions = red.null_space();
    let base = problem.matrix_of(&x0);
    let slopes = directions.iter().map(|d| problem.matrix_of(d)).collect();
    Ok((red, Affine { x0, directions, base, slopes }))
}

/// Principal blocks whose entries do not depend on the free unknowns.
fn constant_blocks(affine: &Affine, dim: usize) -> Vec<Vec<usize>> {
    let fixed: Vec<usize> = (0..dim).filter(|&i| affine.is_constant(i, i)).collect();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for &seed in &fixed {
        let mut block = vec![seed];
        for &i in &fixed {
            if i != seed && block.iter().all(|&j| affine.is_constant(i, j)) {
                block.push(i);
            }
        }
        block.sort_unstable();
        if !blocks.contains(&block) {
            blocks.push(block);
        }
    }
    blocks
}

pub(crate) fn solve(problem: &HermitianAffine, start: &DMatrix<Complex64>, opts: &FeasibilityOptions) -> EngineOutcome {
    let tol = opts.tol;
    let mut rows: Vec<Vec<f64>> = problem.constraints.iter().map(|(r, _)| r.clone()).collect();
    let mut rhs: Vec<f64> = problem.constraints.iter().map(|(_, b)| *b).collect();

    // Facial reduction: a fully determined principal block must be PSD, and
    // its kernel vectors must annihilate the whole matrix.
    let (mut red, mut affine) = match reduce(problem, &rows, &rhs, tol) {
        Ok(v) => v,
        Err(reason) => return EngineOutcome::Infeasible(reason),
    };
    for _ in 0..=problem.dim {
        let mut added = false;
        for block in constant_blocks(&affine, problem.dim) {
            let sub = DMatrix::from_fn(block.len(), block.len(), |r, c| affine.base[(block[r], block[c])]);
            let (values, vectors) = jacobi_eigen(&embed_hermitian(&sub));
            if values[0] < -tol {
                let names: Vec<&str> = block.iter().map(|&i| problem.labels[i].as_str()).collect();
                return EngineOutcome::Infeasible(format!(
                    "fully determined block on [{}] has eigenvalue {:.6e}",
                    names.join(", "),
                    values[0]
                ));
            }
            let m = block.len();
            for (k, &lambda) in values.iter().enumerate() {
                if lambda > tol {
                    break;
                }
                let u = vectors.column(k);
                let v: Vec<Complex64> = (0..m).map(|s| Complex64::new(u[s], u[s + m])).collect();
                for row in problem.kernel_rows(&block, &v) {
                    rows.push(row);
                    rhs.push(0.0);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
        let before = red.rank();
        match reduce(problem, &rows, &rhs, tol) {
            Ok((r, a)) => {
                red = r;
                affine = a;
            }
            Err(reason) => {
                return EngineOutcome::Infeasible(format!("after forcing kernel vectors to zero, {reason}"))
            }
        }
        if red.rank() == before {
            break;
        }
    }

    if affine.directions.is_empty() {
        let lambda = min_eigenvalue(&affine.base);
        if lambda >= -tol {
            return EngineOutcome::Feasible {
                x: affine.x0.clone(),
                matrix: affine.base.clone(),
                min_eigenvalue: lambda,
                iterations: 0,
                residual: 0.0,
            };
        }
        return EngineOutcome::Infeasible(format!(
            "all entries are determined and the smallest eigenvalue is {lambda:.6e}"
        ));
    }

    dykstra(&affine, start, opts)
}

fn dykstra(affine: &Affine, start: &DMatrix<Complex64>, opts: &FeasibilityOptions) -> EngineOutcome {
    let tol = opts.tol;
    let k = affine.slopes.len();
    let gram = DMatrix::from_fn(k, k, |a, b| inner(&affine.slopes[a], &affine.slopes[b]));
    let gram_inv = pinv_psd(&gram, 1e-12);
    let project_affine = |y: &DMatrix<Complex64>| -> (Vec<f64>, DMatrix<Complex64>) {
        let diff = y - &affine.base;
        let b = nalgebra::DVector::from_iterator(k, affine.slopes.iter().map(|s| inner(s, &diff)));
        let t = &gram_inv * b;
        let mut out = affine.base.clone();
        for (s, &tk) in affine.slopes.iter().zip(t.iter()) {
            out += s * Complex64::new(tk, 0.0);
        }
        (t.iter().copied().collect(), out)
    };

    let n = start.nrows();
    let mut x = start.clone();
    let mut p = DMatrix::<Complex64>::zeros(n, n);
    let mut q = DMatrix::<Complex64>::zeros(n, n);
    let mut best = f64::INFINITY;
    let mut window_best = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let (t, y) = project_affine(&(&x + &p));
        p = &x + &p - &y;
        let shifted = &y + &q;
        x = project_psd_hermitian(&shifted);
        q = shifted - &x;
        residual = frobenius(&(&x - &y));
        best = best.min(residual);
        let lambda = if residual < tol || it % LAMBDA_CHECK_EVERY == 0 {
            Some(min_eigenvalue(&y))
        } else {
            None
        };
        if let Some(lambda) = lambda {
            if lambda >= -tol {
                return EngineOutcome::Feasible {
                    x: affine.point(&t),
                    matrix: y,
                    min_eigenvalue: lambda,
                    iterations: it,
                    residual,
                };
            }
        }
        if it % opts.stall_window == 0 {
            if best > 10.0 * tol && window_best - best < 1e-3 * window_best {
                return EngineOutcome::Stalled {
                    residual: best,
                    iterations: it,
                };
            }
            window_best = best;
        }
    }
    EngineOutcome::Exhausted {
        residual,
        iterations: opts.max_iter,
    }
}
