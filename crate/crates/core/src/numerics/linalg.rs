//! Symmetric positive (semi)definite solves.

use crate::error::{Error, Result};
use crate::numerics::matrix::Matrix;
use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    lower: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn factor(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::shape(format!("cholesky of {}x{}", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::Conditioning(format!(
                    "matrix is not positive definite (pivot {j} = {d})"
                )));
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn lower(&self) -> &Matrix<T> {
        &self.lower
    }

    /// Solves `A x = b` in place for one right-hand side.
    pub fn solve_vec(&self, b: &mut [T]) {
        let l = &self.lower;
        let n = l.rows();
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s = s - l[(i, k)] * b[k];
            }
            b[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s = s - l[(k, i)] * b[k];
            }
            b[i] = s / l[(i, i)];
        }
    }

    pub fn solve(&self, rhs: &Matrix<T>) -> Result<Matrix<T>> {
        let n = self.lower.rows();
        if rhs.rows() != n {
            return Err(Error::shape(format!("rhs has {} rows, system has {n}", rhs.rows())));
        }
        let mut out = Matrix::zeros(n, rhs.cols());
        let mut col = vec![T::zero(); n];
        for j in 0..rhs.cols() {
            for i in 0..n {
                col[i] = rhs[(i, j)];
            }
            self.solve_vec(&mut col);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.lower.rows();
        self.solve(&Matrix::identity(n)).expect("identity matches factor size")
    }
}

/// Cholesky with diagonal pivoting. Stops when the remaining diagonal drops
/// below `n · eps · max(diag)`, which yields the numerical rank.
#[derive(Debug, Clone)]
pub struct PivotedCholesky<T> {
    lower: Matrix<T>,
    perm: Vec<usize>,
    rank: usize,
}

impl<T: Scalar> PivotedCholesky<T> {
    pub fn factor(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::shape(format!("cholesky of {}x{}", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut work = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let max_diag = (0..n).fold(T::zero(), |m, i| m.max(a[(i, i)]));
        let tol = T::of_usize(n.max(1)) * T::epsilon() * max_diag;
        let mut l = Matrix::zeros(n, n);
        let mut rank = 0;
        for j in 0..n {
            // remaining diagonal of the Schur complement
            let (p, best) = (j..n)
                .map(|i| {
                    let mut d = work[(i, i)];
                    for k in 0..j {
                        d = d - l[(i, k)] * l[(i, k)];
                    }
                    (i, d)
                })
                .fold((j, T::neg_infinity()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best > tol) {
                break;
            }
            if p != j {
                swap_sym(&mut work, j, p);
                perm.swap(j, p);
                for k in 0..j {
                    let t = l[(j, k)];
                    l[(j, k)] = l[(p, k)];
                    l[(p, k)] = t;
                }
            }
            let d = best.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = work[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
            rank += 1;
        }
        Ok(Self { lower: l, perm, rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.lower.rows()
    }

    /// Solves `A X = rhs`; requires full rank.
    pub fn solve(&self, rhs: &Matrix<T>) -> Result<Matrix<T>> {
        let n = self.lower.rows();
        if !self.is_full_rank() {
            return Err(Error::RankDeficient { rank: self.rank, dim: n });
        }
        // P A Pᵀ = L Lᵀ  ⇒  A = Pᵀ L Lᵀ P
        let permuted = Matrix::from_fn(n, rhs.cols(), |i, j| rhs[(self.perm[i], j)]);
        let y = Cholesky { lower: self.lower.clone() }.solve(&permuted)?;
        let mut out = Matrix::zeros(n, rhs.cols());
        for i in 0..n {
            out.row_mut(self.perm[i]).copy_from_slice(y.row(i));
        }
        Ok(out)
    }
}

fn swap_sym<T: Scalar>(a: &mut Matrix<T>, i: usize, j: usize) {
    let n = a.rows();
    for k in 0..n {
        let t = a[(i, k)];
        a[(i, k)] = a[(j, k)];
        a[(j, k)] = t;
    }
    for k in 0..n {
        let t = a[(k, i)];
        a[(k, i)] = a[(k, j)];
        a[(k, j)] = t;
    }
}

/// Solves `argmin_X ‖design·X − targets‖² + ridge·‖X‖²` through the normal
/// equations. A zero ridge goes through a rank-revealing factorisation and
/// fails on rank-deficient designs.
pub fn ridge_solve<T: Scalar>(design: &Matrix<T>, targets: &Matrix<T>, ridge: T) -> Result<Matrix<T>> {
    if !(ridge >= T::zero()) || !ridge.is_finite() {
        return Err(Error::arg(format!("ridge must be finite and nonnegative, got {ridge}")));
    }
    if design.rows() != targets.rows() {
        return Err(Error::shape(format!(
            "design has {} rows, targets {}",
            design.rows(),
            targets.rows()
        )));
    }
    if !design.is_finite() || !targets.is_finite() {
        return Err(Error::arg("ridge_solve inputs must be finite"));
    }
    let mut gram = design.t_matmul(design)?;
    for i in 0..gram.rows() {
        gram[(i, i)] = gram[(i, i)] + ridge;
    }
    let rhs = design.t_matmul(targets)?;
    if ridge > T::zero() {
        Cholesky::factor(&gram)?.solve(&rhs)
    } else {
        PivotedCholesky::factor(&gram)?.solve(&rhs)
    }
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    Ok(Cholesky::factor(a)?.inverse())
}
