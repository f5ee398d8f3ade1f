//! Reference values for `cos²θ` matrix elements by direct numerical integration.
//!
//! This is the ground truth the closed-form elements in [`crate::rotor`] are
//! checked against. It is deliberately independent of them: normalized
//! associated Legendre functions come from their three-term recurrence and the
//! angular integral is done by Gauss–Legendre quadrature.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_{n-1}(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Normalized associated Legendre function `P̄_j^m(x)` with
/// `∫_{-1}^{1} P̄_j^m(x)² dx = 1` (sign convention irrelevant for products).
pub fn normalized_legendre(j: u32, m: u32, x: f64) -> f64 {
    assert!(m <= j);
    let mut pmm = (0.5f64).sqrt();
    let s = (1.0 - x * x).max(0.0).sqrt();
    for k in 1..=m {
        pmm *= ((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * s;
    }
    if j == m {
        return pmm;
    }
    let mut p_prev = pmm;
    let mut p = x * ((2 * m + 3) as f64).sqrt() * pmm;
    for l in (m + 2)..=j {
        let (lf, mf) = (l as f64, m as f64);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        let next = a * (x * p - b * p_prev);
        p_prev = p;
        p = next;
    }
    p
}

/// `∫ Y*_{j,m} cos²θ Y_{j',m} dΩ` by Gauss–Legendre quadrature with
/// `max(64, j + j' + 2)` nodes (exact for these polynomial integrands).
pub fn quadrature_element(j: u32, j_prime: u32, m: i32) -> f64 {
    let m = m.unsigned_abs();
    assert!(j >= m && j_prime >= m, "j and j' must be at least |m|");
    let n = 64.max((j + j_prime + 2) as usize);
    let (x, w) = gauss_legendre(n);
    x.iter()
        .zip(&w)
        .map(|(&x, &w)| w * normalized_legendre(j, m, x) * normalized_legendre(j_prime, m, x) * x * x)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_polynomials() {
        let (x, w) = gauss_legendre(64);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let x4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((x4 - 0.4).abs() < 1e-14);
    }

    #[test]
    fn legendre_normalized() {
        let (x, w) = gauss_legendre(80);
        for (j, m) in [(0, 0), (3, 0), (5, 2), (9, 9), (12, 4)] {
            let norm: f64 = x
                .iter()
                .zip(&w)
                .map(|(&x, &w)| w * normalized_legendre(j, m, x).powi(2))
                .sum();
            assert!((norm - 1.0).abs() < 1e-13, "({j},{m}) norm {norm}");
        }
    }

    #[test]
    fn trivial_elements() {
        assert!((quadrature_element(0, 0, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(quadrature_element(0, 1, 0).abs() < 1e-15);
        assert!(quadrature_element(2, 5, 1).abs() < 1e-15);
    }
}
