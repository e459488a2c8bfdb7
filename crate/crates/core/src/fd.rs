//! Finite-difference stencils shared by the tensor calculus and the grid code.

/// Fourth-order centered first derivative weights for offsets `-2..=2`.
pub const CENTERED4: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];

/// Fourth-order one-sided weights at the first node of a row (offsets `0..=4`).
pub const FORWARD4_AT0: [f64; 5] = [-25.0 / 12.0, 48.0 / 12.0, -36.0 / 12.0, 16.0 / 12.0, -3.0 / 12.0];

/// Fourth-order weights at the second node of a row (offsets `-1..=3`).
pub const FORWARD4_AT1: [f64; 5] = [-3.0 / 12.0, -10.0 / 12.0, 18.0 / 12.0, -6.0 / 12.0, 1.0 / 12.0];

/// Default step `1e-3 * (1 + |z|)`.
pub fn default_step(z: &[f64]) -> f64 {
    1e-3 * (1.0 + crate::linalg::norm(z))
}

/// Fourth-order centered directional derivative of a vector-valued map.
/// Matrix-valued fields are passed flattened.
pub fn directional<F>(f: F, z: &[f64], dir: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let shifted = |t: f64| -> Vec<f64> {
        let p: Vec<f64> = z.iter().zip(dir).map(|(a, b)| a + t * b).collect();
        f(&p)
    };
    let fm2 = shifted(-2.0 * h);
    let fm1 = shifted(-h);
    let fp1 = shifted(h);
    let fp2 = shifted(2.0 * h);
    (0..fp1.len())
        .map(|i| (CENTERED4[0] * fm2[i] + CENTERED4[1] * fm1[i] + CENTERED4[3] * fp1[i] + CENTERED4[4] * fp2[i]) / h)
        .collect()
}

/// Observed order of convergence from errors on successively halved steps.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Richardson extrapolation of a quantity computed at `h` and `h/2` with
/// leading error term of order `p`.
pub fn richardson(at_h: f64, at_half: f64, p: f64) -> f64 {
    let r = 2f64.powf(p);
    (r * at_half - at_h) / (r - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_exact_on_quartics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - x.powi(3) + 0.25 * x.powi(4);
        let df = |x: f64| -2.0 + x - 3.0 * x * x + x.powi(3);
        let h = 0.1;
        let x0 = 0.3;
        let c: f64 = (-2..=2).zip(CENTERED4).map(|(o, w)| w * f(x0 + o as f64 * h)).sum::<f64>() / h;
        assert!((c - df(x0)).abs() < 1e-12);
        let a: f64 = (0..5).zip(FORWARD4_AT0).map(|(o, w)| w * f(x0 + o as f64 * h)).sum::<f64>() / h;
        assert!((a - df(x0)).abs() < 1e-12);
        let b: f64 = (-1..4).zip(FORWARD4_AT1).map(|(o, w)| w * f(x0 + o as f64 * h)).sum::<f64>() / h;
        assert!((b - df(x0)).abs() < 1e-12);
    }

    #[test]
    fn richardson_removes_leading_term() {
        let g = |h: f64| 2.0 + 3.0 * h * h;
        assert!((richardson(g(0.1), g(0.05), 2.0) - 2.0).abs() < 1e-14);
    }
}
