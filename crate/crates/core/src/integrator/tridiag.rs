/// Precomputed Thomas factorization of the constant symmetric tridiagonal
/// matrix with diagonal `diag` and off-diagonals `off`.
#[derive(Clone, Debug)]
pub(crate) struct Tridiag {
    off: f64,
    cprime: Vec<f64>,
    inv_den: Vec<f64>,
}

impl Tridiag {
    pub(crate) fn new(m: usize, diag: f64, off: f64) -> Self {
        let mut cprime = vec![0.0; m];
        let mut inv_den = vec![0.0; m];
        let mut prev = 0.0;
        for i in 0..m {
            let den = diag - off * prev;
            inv_den[i] = 1.0 / den;
            prev = if i + 1 < m { off / den } else { 0.0 };
            cprime[i] = prev;
        }
        Tridiag { off, cprime, inv_den }
    }

    /// Solves in place along a strided slice: entries `x[i * stride + c]`.
    pub(crate) fn solve_strided(&self, x: &mut [f64], stride: usize, c: usize) {
        let m = self.cprime.len();
        let mut prev = 0.0;
        for i in 0..m {
            let v = (x[i * stride + c] - self.off * prev) * self.inv_den[i];
            x[i * stride + c] = v;
            prev = v;
        }
        for i in (0..m.saturating_sub(1)).rev() {
            x[i * stride + c] -= self.cprime[i] * x[(i + 1) * stride + c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_against_dense_multiply() {
        let m = 9;
        let (dg, off) = (3.0, -1.2);
        let t = Tridiag::new(m, dg, off);
        let x: Vec<f64> = (0..m).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut rhs: Vec<f64> = (0..m)
            .map(|i| {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < m { x[i + 1] } else { 0.0 };
                dg * x[i] + off * (l + r)
            })
            .collect();
        t.solve_strided(&mut rhs, 1, 0);
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
