//! Dense linear algebra over `BigRational`, just enough for the closure solves.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Square row-major rational matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMatrix {
    n: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn from_row_major(n: usize, data: Vec<BigRational>) -> Self {
        assert_eq!(data.len(), n * n);
        RationalMatrix { n, data }
    }

    #[cfg(test)]
    pub fn identity(n: usize) -> Self {
        let mut data = vec![BigRational::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = BigRational::one();
        }
        RationalMatrix { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.n + j]
    }

    pub fn scale_rows(&self, factors: &[BigRational]) -> Self {
        let n = self.n;
        let data = (0..n * n).map(|idx| &self.data[idx] * &factors[idx / n]).collect();
        RationalMatrix { n, data }
    }

    pub fn mul(&self, other: &RationalMatrix) -> Self {
        let n = self.n;
        let mut data = vec![BigRational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        RationalMatrix { n, data }
    }

    pub fn row_sums(&self) -> Vec<BigRational> {
        (0..self.n)
            .map(|i| (0..self.n).fold(BigRational::zero(), |acc, j| acc + self.get(i, j)))
            .collect()
    }

    #[cfg(test)]
    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        (0..self.n)
            .map(|i| (0..self.n).fold(BigRational::zero(), |acc, j| acc + self.get(i, j) * &v[j]))
            .collect()
    }

    /// Solves `self · X = rhs` for `rhs.len() / n` right-hand sides stored column-wise
    /// as consecutive blocks; Gauss-Jordan with nonzero pivot search.
    fn solve_columns(&self, mut rhs: Vec<Vec<BigRational>>) -> Result<Vec<Vec<BigRational>>> {
        let n = self.n;
        let mut a = self.data.clone();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r * n + col].is_zero())
                .ok_or(Error::Singular("exact rational solve"))?;
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                for b in rhs.iter_mut() {
                    b.swap(pivot, col);
                }
            }
            let inv = a[col * n + col].recip();
            for j in col..n {
                a[col * n + j] = &a[col * n + j] * &inv;
            }
            for b in rhs.iter_mut() {
                b[col] = &b[col] * &inv;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let factor = a[r * n + col].clone();
                for j in col..n {
                    let delta = &factor * &a[col * n + j];
                    a[r * n + j] -= delta;
                }
                for b in rhs.iter_mut() {
                    let delta = &factor * &b[col];
                    b[r] -= delta;
                }
            }
        }
        Ok(rhs)
    }

    pub fn solve(&self, rhs: &[BigRational]) -> Result<Vec<BigRational>> {
        Ok(self.solve_columns(vec![rhs.to_vec()])?.remove(0))
    }

    pub fn inverse(&self) -> Result<RationalMatrix> {
        let n = self.n;
        let columns: Vec<Vec<BigRational>> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| if i == j { BigRational::one() } else { BigRational::zero() })
                    .collect()
            })
            .collect();
        let cols = self.solve_columns(columns)?;
        let mut data = vec![BigRational::zero(); n * n];
        for (j, col) in cols.into_iter().enumerate() {
            for (i, v) in col.into_iter().enumerate() {
                data[i * n + j] = v;
            }
        }
        Ok(RationalMatrix { n, data })
    }

    #[cfg(test)]
    pub fn determinant(&self) -> BigRational {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return BigRational::zero();
            };
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col].clone();
            det *= &p;
            for r in col + 1..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let factor = &a[r * n + col] / &p;
                for j in col..n {
                    let delta = &factor * &a[col * n + j];
                    a[r * n + j] -= delta;
                }
            }
        }
        det
    }
}
