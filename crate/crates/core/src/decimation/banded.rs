//! Gaussian elimination with partial pivoting for banded systems.

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
///
/// Row `i` stores columns `i - lower ..= i + upper + lower`; the extra
/// `lower` columns on the right hold the fill-in produced by row swaps.
pub(crate) struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = 2 * lower + upper + 1;
        Self {
            n,
            lower,
            upper,
            width,
            data: vec![0.0; n * width],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.lower >= i && j <= i + self.upper + self.lower);
        i * self.width + (j + self.lower - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Solves `A x = b` in place, consuming the matrix. `None` if singular.
    pub fn solve(mut self, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = self.n;
        let reach = self.upper + self.lower;
        for k in 0..n {
            let last_row = (k + self.lower).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let (pivot, pivot_abs) = (k..=last_row)
                .map(|i| (i, self.get(i, k).abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs == 0.0 || !pivot_abs.is_finite() {
                return None;
            }
            if pivot != k {
                for j in k..=last_col {
                    let a = self.get(k, j);
                    let p = self.get(pivot, j);
                    self.set(k, j, p);
                    self.set(pivot, j, a);
                }
                b.swap(k, pivot);
            }
            let diag = self.get(k, k);
            for i in k + 1..=last_row {
                let factor = self.get(i, k) / diag;
                if factor == 0.0 {
                    continue;
                }
                self.set(i, k, 0.0);
                for j in k + 1..=last_col {
                    let v = self.get(i, j) - factor * self.get(k, j);
                    self.set(i, j, v);
                }
                b[i] -= factor * b[k];
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + reach).min(n - 1);
            let mut sum = b[i];
            for j in i + 1..=last_col {
                sum -= self.get(i, j) * b[j];
            }
            b[i] = sum / self.get(i, i);
        }
        Some(b)
    }
}
