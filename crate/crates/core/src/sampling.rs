//! Deterministic sample sets: shells of low-discrepancy directions and seeded
//! pseudorandom draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in the given base.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base as u64) as f64 * inv;
        index /= base as u64;
        inv /= b;
    }
    out
}

/// `count` unit vectors in `R^dim`: Halton points pushed through Box-Muller and
/// normalized. The set depends only on `(dim, count)`.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && dim <= PRIMES.len(), "unsupported direction dimension {dim}");
    let pairs = dim.div_ceil(2);
    (0..count)
        .map(|i| {
            let idx = i as u64 + 1;
            let mut v = Vec::with_capacity(2 * pairs);
            for p in 0..pairs {
                let u1 = radical_inverse(idx, PRIMES[2 * p]);
                let u2 = radical_inverse(idx, PRIMES[(2 * p + 1) % PRIMES.len()]);
                let r = (-2.0 * u1.max(1e-300).ln()).sqrt();
                let t = 2.0 * std::f64::consts::PI * u2;
                v.push(r * t.cos());
                v.push(r * t.sin());
            }
            v.truncate(dim);
            let nrm = crate::linalg::norm(&v);
            if nrm == 0.0 {
                let mut e = vec![0.0; dim];
                e[0] = 1.0;
                e
            } else {
                v.iter().map(|x| x / nrm).collect()
            }
        })
        .collect()
}

/// Concentric shells: every radius times every direction. A zero radius
/// contributes the origin once.
pub fn shell_points(dim: usize, radii: &[f64], directions_per_shell: usize) -> Vec<Vec<f64>> {
    let dirs = sphere_directions(dim, directions_per_shell);
    let mut out = Vec::with_capacity(radii.len() * dirs.len());
    for &r in radii {
        if r == 0.0 {
            out.push(vec![0.0; dim]);
            continue;
        }
        for d in &dirs {
            out.push(d.iter().map(|x| r * x).collect());
        }
    }
    out
}

/// Evenly spaced radii `start, start + step, ..., end` (inclusive within rounding).
pub fn radii_linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform points in the ball of radius `r` in `R^dim`, seeded.
pub fn ball_points(dim: usize, r_min: f64, r_max: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut g = rng(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| g.random::<f64>() * 2.0 - 1.0).collect();
            let nrm = crate::linalg::norm(&v).max(1e-12);
            let r = r_min + (r_max - r_min) * g.random::<f64>();
            v.iter().map(|x| r * x / nrm).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_base2() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn directions_are_unit_and_reproducible() {
        let a = sphere_directions(4, 50);
        let b = sphere_directions(4, 50);
        assert_eq!(a, b);
        for d in &a {
            assert!((crate::linalg::norm(d) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn shells_include_origin_once() {
        let pts = shell_points(4, &[0.0, 1.0, 2.0], 10);
        assert_eq!(pts.len(), 21);
        assert!(pts[0].iter().all(|x| *x == 0.0));
    }
}
