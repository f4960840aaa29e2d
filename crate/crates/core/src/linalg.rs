//! Minimal dense row-major matrix used by the regression and network code.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from row-major data. Returns `None` when the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows. Returns `None` for ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        Some(Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols.max(1))
            .map(<[f64]>::to_vec)
            .take(self.rows)
            .collect()
    }

    /// `out += self * x`
    pub fn matvec_acc(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o += dot(row, x);
        }
    }

    /// `out += selfᵀ * y`
    pub fn matvec_t_acc(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (&yr, row) in y.iter().zip(self.data.chunks_exact(self.cols)) {
            if yr != 0.0 {
                axpy(yr, row, out);
            }
        }
    }

    /// `self += a * bᵀ`
    pub fn outer_acc(&mut self, a: &[f64], b: &[f64]) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(b.len(), self.cols);
        let cols = self.cols;
        for (&ar, row) in a.iter().zip(self.data.chunks_exact_mut(cols)) {
            if ar != 0.0 {
                axpy(ar, b, row);
            }
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Ordinary least-squares fit with the statistics needed for t-ratios and
/// information criteria.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub params: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub ssr: f64,
    pub nobs: usize,
}

impl OlsFit {
    /// Gaussian log-likelihood of the fit.
    pub fn log_likelihood(&self) -> f64 {
        let n = self.nobs as f64;
        -n / 2.0 * ((2.0 * std::f64::consts::PI).ln() + (self.ssr / n).ln() + 1.0)
    }

    /// Akaike information criterion counting every regressor as a parameter.
    pub fn aic(&self) -> f64 {
        -2.0 * self.log_likelihood() + 2.0 * self.params.len() as f64
    }

    pub fn t_value(&self, i: usize) -> f64 {
        self.params[i] / self.std_errors[i]
    }
}

/// Least squares via Householder QR on column-equilibrated regressors.
///
/// Returns `None` when the design is rank deficient, has no residual degrees
/// of freedom, or fits exactly (zero residual variance).
pub fn ols(y: &[f64], x: &Matrix) -> Option<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n || k == 0 || n <= k {
        return None;
    }

    // Equilibrate columns so the rank test is scale free.
    let scales: Vec<f64> = (0..k)
        .map(|c| (0..n).map(|r| x.get(r, c).powi(2)).sum::<f64>().sqrt())
        .collect();
    if scales.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return None;
    }
    // Column-major working copy.
    let mut a: Vec<Vec<f64>> = (0..k)
        .map(|c| (0..n).map(|r| x.get(r, c) / scales[c]).collect())
        .collect();
    let mut qty = y.to_vec();

    let mut diag = vec![0.0; k];
    for j in 0..k {
        let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        diag[j] = alpha;
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(j + 1) {
                let s = 2.0 * dot(&v, &col[j..]) / vnorm2;
                axpy(-s, &v, &mut col[j..]);
            }
            let s = 2.0 * dot(&v, &qty[j..]) / vnorm2;
            axpy(-s, &v, &mut qty[j..]);
        }
        a[j][j] = alpha;
    }

    let max_diag = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if diag.iter().any(|d| d.abs() <= max_diag * 1e-10) {
        return None;
    }

    // R is upper triangular: r[i][j] = a[j][i] for i <= j.
    let r = |i: usize, j: usize| a[j][i];
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let s = qty[i] - (i + 1..k).map(|j| r(i, j) * beta[j]).sum::<f64>();
        beta[i] = s / r(i, i);
    }
    let ssr: f64 = qty[k..].iter().map(|v| v * v).sum();
    if ssr <= 0.0 || !ssr.is_finite() {
        return None;
    }
    let sigma2 = ssr / (n - k) as f64;

    // (RᵀR)⁻¹ = R⁻¹R⁻ᵀ; only the diagonal is needed.
    let mut rinv = vec![vec![0.0; k]; k];
    #[allow(clippy::needless_range_loop)]
    for j in 0..k {
        rinv[j][j] = 1.0 / r(j, j);
        for i in (0..j).rev() {
            let s: f64 = (i + 1..=j).map(|m| r(i, m) * rinv[m][j]).sum();
            rinv[i][j] = -s / r(i, i);
        }
    }
    let std_errors: Vec<f64> = (0..k)
        .map(|i| {
            let d: f64 = rinv[i][i..].iter().map(|v| v * v).sum();
            (sigma2 * d).sqrt() / scales[i]
        })
        .collect();
    let params = beta.iter().zip(&scales).map(|(b, s)| b / s).collect();

    Some(OlsFit {
        params,
        std_errors,
        ssr,
        nobs: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matvec_and_transpose() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let mut out = vec![0.0; 3];
        m.matvec_acc(&[1.0, -1.0], &mut out);
        assert_eq!(out, vec![-1.0, -1.0, -1.0]);
        let mut back = vec![0.0; 2];
        m.matvec_t_acc(&[1.0, 0.0, 1.0], &mut back);
        assert_eq!(back, vec![6.0, 8.0]);
    }

    #[test]
    fn ols_matches_closed_form_simple_regression() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let ys = [2.1, 3.9, 6.2, 7.8, 10.1, 12.2];
        let design = Matrix::from_rows(&xs.iter().map(|&x| vec![1.0, x]).collect::<Vec<_>>()).unwrap();
        let fit = ols(&ys, &design).unwrap();

        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ssr: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        let se_slope = (ssr / (n - 2.0) / sxx).sqrt();

        assert_relative_eq!(fit.params[1], slope, epsilon = 1e-12);
        assert_relative_eq!(fit.params[0], intercept, epsilon = 1e-12);
        assert_relative_eq!(fit.ssr, ssr, epsilon = 1e-12);
        assert_relative_eq!(fit.std_errors[1], se_slope, epsilon = 1e-12);
    }

    #[test]
    fn ols_rejects_collinear_design() {
        let design = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert!(ols(&[1.0, 2.0, 3.0, 4.0], &design).is_none());
    }
}
