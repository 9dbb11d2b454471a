use crate::error::{Error, Result};

/// Symmetric positive definite band matrix, lower band stored row by row:
/// `band[i·(bw+1) + k]` holds entry `(i, i−k)`.
#[derive(Debug, Clone)]
pub(crate) struct BandedSpd {
    n: usize,
    bw: usize,
    band: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandedSpd { n, bw, band: vec![0.0; n * (bw + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `v` at `(row, col)` with `col <= row`.
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        debug_assert!(col <= row && row - col <= self.bw);
        self.band[row * (self.bw + 1) + (row - col)] += v;
    }

    fn at(&self, row: usize, col: usize) -> f64 {
        if row < col || row - col > self.bw {
            0.0
        } else {
            self.band[row * (self.bw + 1) + (row - col)]
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let a = self.at(i, j);
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place Cholesky factorisation `A = L Lᵀ`.
    pub fn factor(mut self) -> Result<CholeskyBand> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = self.band[i * w + (i - j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= self.band[i * w + (i - k)] * self.band[j * w + (j - k)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::InvalidParameter("matrix is not positive definite".into()));
                    }
                    self.band[i * w] = s.sqrt();
                } else {
                    self.band[i * w + (i - j)] = s / self.band[j * w];
                }
            }
        }
        Ok(CholeskyBand { n, bw, band: self.band })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CholeskyBand {
    n: usize,
    bw: usize,
    band: Vec<f64>,
}

impl CholeskyBand {
    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut s = x[i];
            for k in lo..i {
                s -= self.band[i * w + (i - k)] * x[k];
            }
            x[i] = s / self.band[i * w];
        }
        for i in (0..self.n).rev() {
            let hi = (i + self.bw).min(self.n - 1);
            let mut s = x[i];
            for k in i + 1..=hi {
                s -= self.band[k * w + (k - i)] * x[k];
            }
            x[i] = s / self.band[i * w];
        }
    }
}
