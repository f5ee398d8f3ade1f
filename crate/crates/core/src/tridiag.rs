//! Eigen-decomposition of small real symmetric tridiagonal matrices.
//!
//! Implicit QL with Wilkinson shifts. The Hamiltonian sectors handled here
//! are at most a few dozen rows, so the dense eigenvector update is cheap.

/// Eigenpairs of a symmetric tridiagonal matrix.
///
/// `vectors` is column-major: column `i` (entries `i * n .. (i + 1) * n`)
/// is the eigenvector of `values[i]`.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl TridiagonalEigen {
    pub fn empty(n: usize) -> Self {
        TridiagonalEigen {
            values: vec![0.0; n],
            vectors: vec![0.0; n * n],
            n,
        }
    }

    /// Decomposes the matrix with diagonal `diag` and off-diagonal `off`
    /// (`off[i]` couples rows `i` and `i + 1`; `off.len() == n - 1`).
    #[cfg(test)]
    pub fn compute(diag: &[f64], off: &[f64]) -> Self {
        let mut out = Self::empty(diag.len());
        let mut scratch = vec![0.0; diag.len()];
        out.compute_into(diag, off, &mut scratch);
        out
    }

    /// Same as [`compute`](Self::compute) but reuses the allocation.
    /// `scratch` must hold at least `n` values.
    pub fn compute_into(&mut self, diag: &[f64], off: &[f64], scratch: &mut [f64]) {
        let n = diag.len();
        debug_assert_eq!(n, self.n);
        debug_assert!(n == 0 || off.len() + 1 == n);
        let d = &mut self.values;
        let z = &mut self.vectors;
        d.copy_from_slice(diag);
        let e = &mut scratch[..n];
        e[..n.saturating_sub(1)].copy_from_slice(off);
        if n > 0 {
            e[n - 1] = 0.0;
        }
        z.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            z[i * n + i] = 1.0;
        }

        for l in 0..n {
            let mut iterations = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iterations += 1;
                if iterations > 60 {
                    // Converged to machine precision long before this in practice.
                    break;
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut underflow = false;
                let mut i = m;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    let (ci, ci1) = (i * n, (i + 1) * n);
                    for k in 0..n {
                        let f = z[ci1 + k];
                        z[ci1 + k] = s * z[ci + k] + c * f;
                        z[ci + k] = c * z[ci + k] - s * f;
                    }
                }
                if underflow {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
    }

    #[inline]
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }
}
