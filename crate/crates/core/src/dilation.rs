//! Isotropic dilations `z -> eps z` and audits of the rescaled decay bounds.
//!
//! For the real scalar map `d_eps` the pushforward of a (1,1)-tensor leaves the
//! matrix unchanged, so `J_eps(z') = J(z'/eps)` and
//! `D^alpha J_eps(z') = eps^(-|alpha|) (D^alpha J)(z'/eps)`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::acs::{derivative_norms, AlmostComplexStructure, DecayProfile, FamilyDescriptor, ParamValue, StructureField};
use crate::{linalg, Error, Result};

/// `J_eps = (d_eps)_* J` for `0 < eps <= 1`.
#[derive(Clone, Debug)]
pub struct DilatedStructure {
    base: StructureField,
    epsilon: f64,
}

impl DilatedStructure {
    pub fn base(&self) -> &StructureField {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn field(&self) -> StructureField {
        StructureField::new(self.clone()).with_mode(self.base.mode())
    }

    fn pull(&self, z: &[f64]) -> Vec<f64> {
        z.iter().map(|x| x / self.epsilon).collect()
    }
}

impl AlmostComplexStructure for DilatedStructure {
    fn n(&self) -> usize {
        self.base.n()
    }

    fn eval(&self, z: &[f64]) -> DMatrix<f64> {
        self.base.evaluate(&self.pull(z))
    }

    fn analytic_derivative(&self, z: &[f64], dir: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.base.derivative(&self.pull(z), dir) / self.epsilon)
    }

    fn descriptor(&self) -> FamilyDescriptor {
        let mut d = self.base.descriptor();
        d.params.insert("dilation_epsilon".into(), ParamValue::Number(self.epsilon));
        d
    }

    fn dilation(&self) -> Option<(&StructureField, f64)> {
        Some((&self.base, self.epsilon))
    }
}

/// `J_eps(z') = J(z'/eps)`; dilating a dilation multiplies the factors.
pub fn dilate(j: &StructureField, epsilon: f64) -> Result<DilatedStructure> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("dilation factor must lie in (0, 1], got {epsilon}")));
    }
    Ok(match j.inner().dilation() {
        Some((base, e)) => DilatedStructure { base: base.clone(), epsilon: e * epsilon },
        None => DilatedStructure { base: j.clone(), epsilon },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// `eps^theta lambda / (eps^(k+theta) + |z'|^(k+theta))` for `k <= 1`,
    /// `lambda / (eps^k + |z'|^k)` above.
    Global,
    /// `2^(k+theta) lambda` for `k <= 1`, `2^k lambda` above, on `|z'| >= 1/2`.
    Shell,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub point: Vec<f64>,
    pub order: usize,
    pub kind: BoundKind,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaledBoundsAudit {
    pub epsilon: f64,
    pub lambda: f64,
    pub theta: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub samples: usize,
    pub checks: usize,
    /// Smallest `bound / value`; `None` when every value is zero.
    pub worst_margin: Option<f64>,
    pub worst_point: Option<Vec<f64>>,
    pub violation_count: usize,
    /// The first violations in sample order.
    pub violations: Vec<Violation>,
    pub pass: bool,
}

/// Listed violations are capped at this count.
pub const MAX_LISTED_VIOLATIONS: usize = 64;

/// Relative slack for finite-difference noise in the comparisons.
const SLACK: f64 = 1e-9;

/// Bound of the given kind for derivative order `k`; `None` for shell bounds inside `|z'| < 1/2`.
pub fn scaled_bound(kind: BoundKind, k: usize, epsilon: f64, lambda: f64, theta: f64, r: f64) -> Option<f64> {
    match kind {
        BoundKind::Global if k <= 1 => {
            let e = k as f64 + theta;
            Some(epsilon.powf(theta) * lambda / (epsilon.powf(e) + r.powf(e)))
        }
        BoundKind::Global => Some(lambda / (epsilon.powi(k as i32) + r.powi(k as i32))),
        BoundKind::Shell if r < 0.5 => None,
        BoundKind::Shell if k <= 1 => Some(2f64.powf(k as f64 + theta) * lambda),
        BoundKind::Shell => Some(2f64.powi(k as i32) * lambda),
    }
}

/// Checks the dilated field against the bounds implied by `profile` (using its
/// `lambda`, `theta`, `K`) at every sample `z'` and order `0..=K`.
pub fn verify_scaled_bounds(j: &StructureField, epsilon: f64, profile: &DecayProfile, samples: &[Vec<f64>]) -> Result<ScaledBoundsAudit> {
    let dilated = dilate(j, epsilon)?.field();
    let (lambda, theta, k_max) = (profile.lambda, profile.theta, profile.k);
    let per_point: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|z| if dilated.is_standard() { vec![0.0; k_max + 1] } else { derivative_norms(&dilated, z, k_max) })
        .collect();
    let mut worst: Option<(f64, usize)> = None;
    let mut violations = Vec::new();
    let mut violation_count = 0;
    let mut checks = 0;
    for (idx, (z, norms)) in samples.iter().zip(&per_point).enumerate() {
        let r = linalg::norm(z);
        for (order, value) in norms.iter().enumerate() {
            for kind in [BoundKind::Global, BoundKind::Shell] {
                let Some(bound) = scaled_bound(kind, order, epsilon, lambda, theta, r) else { continue };
                checks += 1;
                if *value > 0.0 {
                    let margin = bound / value;
                    if worst.is_none_or(|(m, _)| margin < m) {
                        worst = Some((margin, idx));
                    }
                }
                if *value > bound * (1.0 + SLACK) {
                    violation_count += 1;
                    if violations.len() < MAX_LISTED_VIOLATIONS {
                        violations.push(Violation { point: z.clone(), order, kind, value: *value, bound });
                    }
                }
            }
        }
    }
    Ok(ScaledBoundsAudit {
        epsilon,
        lambda,
        theta,
        k: k_max,
        samples: samples.len(),
        checks,
        worst_margin: worst.map(|w| w.0),
        worst_point: worst.map(|w| samples[w.1].clone()),
        violation_count,
        violations,
        pass: violation_count == 0,
    })
}
