use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PlaneGrid;
use crate::linalg::cnorm;
use crate::{Error, Result};

/// Long-range pairs sampled by [`holder_norms`].
pub const LONG_RANGE_PAIRS: usize = 100_000;
/// Default seed of the long-range pair sampler.
pub const PAIR_SEED: u64 = 0x5eed_c0de;

/// Exponents of the weighted Hölder spaces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub gamma: f64,
    pub p: f64,
    pub epsilon0: f64,
    pub theta: f64,
}

impl NormParams {
    pub fn new(gamma: f64, p: f64, epsilon0: f64, theta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParameter(format!("need gamma in (0, 1), got {gamma}")));
        }
        if !(p > 1.0 && p < 2.0) {
            return Err(Error::InvalidParameter(format!("need p in (1, 2), got {p}")));
        }
        if !(epsilon0 > 0.0) {
            return Err(Error::InvalidParameter(format!("need epsilon0 > 0, got {epsilon0}")));
        }
        if !(theta > 1.0) {
            return Err(Error::InvalidParameter(format!("need theta > 1, got {theta}")));
        }
        if theta * p <= 2.0 {
            return Err(Error::InvalidParameter(format!("need theta * p > 2, got {theta} * {p}")));
        }
        Ok(Self { gamma, p, epsilon0, theta })
    }
}

impl Default for NormParams {
    fn default() -> Self {
        Self { gamma: 0.5, p: 1.5, epsilon0: 0.1, theta: 2.0 }
    }
}

/// `max |z(zeta)| (1 + |zeta|^2)^(-1/2)` over the nodes.
pub fn weighted_c0_norm(z: &PlaneGrid) -> f64 {
    (0..z.node_count())
        .map(|i| cnorm(z.node(i)) / (1.0 + z.zeta_at(i).norm_sqr()).sqrt())
        .fold(0.0, f64::max)
}

/// `(sum |g|^p h^2)^(1/p)` over the nodes.
pub fn lp_norm(g: &PlaneGrid, p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm needs p >= 1");
    let h2 = g.spacing().powi(2);
    let s: f64 = (0..g.node_count()).map(|i| cnorm(g.node(i)).powf(p)).sum();
    (s * h2).powf(1.0 / p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbarResidual {
    /// Max over interior nodes of `|u_zetabar - g|`.
    pub max: f64,
    /// Interior-restricted `L^2` aggregate.
    pub l2: f64,
}

/// Discrete check of `(Tg)_zetabar = g` on interior nodes.
pub fn dbar_residual(u: &PlaneGrid, g: &PlaneGrid) -> Result<DbarResidual> {
    u.same_shape(g)?;
    let (_, dzb) = u.wirtinger();
    let h2 = u.spacing().powi(2);
    let mut max = 0.0f64;
    let mut sq = 0.0;
    for node in (0..u.node_count()).filter(|i| u.is_interior(*i)) {
        let diff: Vec<Complex64> = dzb.node(node).iter().zip(g.node(node)).map(|(a, b)| a - b).collect();
        let e = cnorm(&diff);
        max = max.max(e);
        sq += e * e * h2;
    }
    Ok(DbarResidual { max, l2: sq.sqrt() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderNorms {
    pub c0_weighted: f64,
    /// `sup |z_zeta| + sup |z_zetabar|`.
    pub c1_sup: f64,
    /// Seminorm of `z_zeta` plus seminorm of `z_zetabar`.
    pub holder_seminorm: f64,
    /// Weighted `C^{1,gamma}` value: the sum of the three terms above.
    pub combined: f64,
}

/// Lower-bound estimate of `sup |D(a) - D(b)| / |a - b|^gamma` over all
/// nearest-neighbour pairs and `extra_pairs` seeded random pairs.
pub fn holder_seminorm(d: &PlaneGrid, gamma: f64, extra_pairs: usize, seed: u64) -> f64 {
    let n = d.points();
    let quotient = |a: usize, b: usize| -> f64 {
        if a == b {
            return 0.0;
        }
        let diff: Vec<Complex64> = d.node(a).iter().zip(d.node(b)).map(|(x, y)| x - y).collect();
        cnorm(&diff) / (d.zeta_at(a) - d.zeta_at(b)).norm().powf(gamma)
    };
    let mut best = 0.0f64;
    for k in 0..n {
        for j in 0..n {
            let i = d.index(j, k);
            if j + 1 < n {
                best = best.max(quotient(i, i + 1));
            }
            if k + 1 < n {
                best = best.max(quotient(i, i + n));
            }
        }
    }
    let mut rng = crate::sampling::rng(seed);
    let total = d.node_count();
    for _ in 0..extra_pairs {
        let a = rng.random_range(0..total);
        let b = rng.random_range(0..total);
        best = best.max(quotient(a, b));
    }
    best
}

/// Weighted `C^{1,gamma}` norm and its parts.
pub fn holder_norms(z: &PlaneGrid, params: &NormParams) -> HolderNorms {
    holder_norms_seeded(z, params, PAIR_SEED)
}

/// [`holder_norms`] with an explicit seed for the long-range pairs.
pub fn holder_norms_seeded(z: &PlaneGrid, params: &NormParams, seed: u64) -> HolderNorms {
    let (dz, dzb) = z.wirtinger();
    let c0_weighted = weighted_c0_norm(z);
    let c1_sup = dz.sup_norm() + dzb.sup_norm();
    let holder_seminorm = holder_seminorm(&dz, params.gamma, LONG_RANGE_PAIRS, seed)
        + holder_seminorm(&dzb, params.gamma, LONG_RANGE_PAIRS, seed ^ 1);
    HolderNorms { c0_weighted, c1_sup, holder_seminorm, combined: c0_weighted + c1_sup + holder_seminorm }
}
