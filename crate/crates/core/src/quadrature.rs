//! Composite quadrature on uniform grids.

use num_complex::Complex64;

/// Composite Simpson rule over all samples; a 3/8 panel closes an odd count of
/// subintervals.
pub fn simpson(f: &[Complex64], h: f64) -> Complex64 {
    let n = f.len() - 1;
    match n {
        0 => Complex64::new(0.0, 0.0),
        1 => (f[0] + f[1]) * (h / 2.0),
        _ => {
            let even_end = if n.is_multiple_of(2) { n } else { n - 3 };
            let mut s = Complex64::new(0.0, 0.0);
            for k in (0..even_end).step_by(2) {
                s += (f[k] + f[k + 1] * 4.0 + f[k + 2]) * (h / 3.0);
            }
            if even_end < n {
                let k = even_end;
                s += (f[k] + f[k + 1] * 3.0 + f[k + 2] * 3.0 + f[k + 3]) * (3.0 * h / 8.0);
            }
            s
        }
    }
}

/// Cumulative integral `C[i] = ∫_{t_0}^{t_i} f` on a uniform grid.
///
/// Even nodes carry composite Simpson sums; odd nodes add one interval of a
/// three-point rule that is exact for quadratics.
pub fn cumulative(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len() - 1;
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    if n == 0 {
        return c;
    }
    if n == 1 {
        c[1] = (f[0] + f[1]) * (h / 2.0);
        return c;
    }
    for i in 1..=n {
        if i % 2 == 0 {
            c[i] = c[i - 2] + (f[i - 2] + f[i - 1] * 4.0 + f[i]) * (h / 3.0);
        } else if i < n {
            c[i] = c[i - 1] + (f[i - 1] * 5.0 + f[i] * 8.0 - f[i + 1]) * (h / 12.0);
        } else {
            c[i] = c[i - 1] + (f[i - 2] * -1.0 + f[i - 1] * 8.0 + f[i] * 5.0) * (h / 12.0);
        }
    }
    c
}

/// Cumulative integral anchored at node `k0`: `C[i] = ∫_{t_k0}^{t_i} f`.
pub fn cumulative_from(f: &[Complex64], h: f64, k0: usize) -> Vec<Complex64> {
    let c = cumulative(f, h);
    let base = c[k0];
    c.into_iter().map(|v| v - base).collect()
}

/// Trapezoid rule.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let inner: f64 = f[1..n].iter().sum();
    h * (inner + 0.5 * (f[0] + f[n]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(n: usize, f: impl Fn(f64) -> f64) -> (Vec<Complex64>, f64) {
        let h = 1.0 / n as f64;
        ((0..=n).map(|i| Complex64::new(f(i as f64 * h), 0.0)).collect(), h)
    }

    #[test]
    fn simpson_exact_for_cubics_even_and_odd() {
        for n in [2, 3, 4, 5, 10, 11] {
            let (f, h) = samples(n, |t| t * t * t - t + 2.0);
            assert!((simpson(&f, h).re - (0.25 - 0.5 + 2.0)).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn cumulative_exact_for_quadratics() {
        let (f, h) = samples(7, |t| 3.0 * t * t);
        let c = cumulative(&f, h);
        for (i, v) in c.iter().enumerate() {
            let t = i as f64 * h;
            assert!((v.re - t * t * t).abs() < 1e-14);
        }
        let c = cumulative_from(&f, h, 3);
        assert!(c[3].norm() == 0.0);
        assert!((c[0].re + (3.0 * h).powi(3)).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_of_identity() {
        let f: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        assert!((trapezoid(&f, 1e-3) - 0.5).abs() < 1e-12);
    }
}
