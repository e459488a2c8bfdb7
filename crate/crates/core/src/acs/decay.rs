use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StructureField;
use crate::{fd, linalg, sampling};

/// Sup-norm envelopes of `D^alpha (J - J_st)` against the polynomial weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub lambda: f64,
    pub theta: f64,
    #[serde(rename = "K")]
    pub k: usize,
    /// Indexed by derivative order `0..=K`.
    pub envelopes: Vec<f64>,
    pub sample_count: usize,
}

impl DecayProfile {
    /// Profile with every envelope set to `lambda`; the hypothesis an audit checks.
    pub fn uniform(lambda: f64, theta: f64, k: usize) -> Self {
        Self { lambda, theta, k, envelopes: vec![lambda; k + 1], sample_count: 0 }
    }
}

/// `1 + r^(order + theta)` for order at most 1, `1 + r^order` above.
pub fn order_weight(order: usize, theta: f64, r: f64) -> f64 {
    if order <= 1 {
        1.0 + r.powf(order as f64 + theta)
    } else {
        1.0 + r.powi(order as i32)
    }
}

fn matrix_norm(m: &DMatrix<f64>) -> f64 {
    crate::linalg::spectral_norm(m)
}

fn basis(d: usize, a: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[a] = 1.0;
    e
}

/// `D^alpha J` for `alpha = idx` (length at least 1): the first index uses the
/// field's own derivative, the remaining ones nested centered differences.
fn mixed_derivative(j: &StructureField, z: &[f64], idx: &[usize], h: f64) -> DMatrix<f64> {
    let d = j.dim();
    let (last, rest) = idx.split_last().expect("nonempty multi-index");
    if rest.is_empty() {
        return j.derivative(z, &basis(d, *last));
    }
    let mut acc = DMatrix::zeros(d, d);
    let mut p = z.to_vec();
    for (off, w) in [(-2.0, fd::CENTERED4[0]), (-1.0, fd::CENTERED4[1]), (1.0, fd::CENTERED4[3]), (2.0, fd::CENTERED4[4])] {
        p[*last] = z[*last] + off * h;
        acc += mixed_derivative(j, &p, rest, h) * w;
    }
    acc / h
}

/// Nondecreasing index lists of the given length over `0..d`.
fn multi_indices(d: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..order {
        let mut next = Vec::new();
        for idx in &out {
            let start = idx.last().copied().unwrap_or(0);
            for a in start..d {
                let mut e = idx.clone();
                e.push(a);
                next.push(e);
            }
        }
        out = next;
    }
    out
}

/// Unweighted `max_{|alpha| = k} |D^alpha (J - J_st)(z)|` (Frobenius) for `k = 0..=K`.
pub fn derivative_norms(j: &StructureField, z: &[f64], k_max: usize) -> Vec<f64> {
    let d = j.dim();
    let h = fd::default_step(z);
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(matrix_norm(&j.deviation(z)));
    for order in 1..=k_max {
        let m = multi_indices(d, order)
            .iter()
            .map(|idx| matrix_norm(&mixed_derivative(j, z, idx, h)))
            .fold(0.0, f64::max);
        out.push(m);
    }
    out
}

/// Envelopes over an explicit sample set.
pub fn decay_report_shells(j: &StructureField, theta: f64, k_max: usize, samples: &[Vec<f64>]) -> DecayProfile {
    assert!(theta > 1.0, "theta must exceed 1");
    assert!(k_max >= 2, "K must be at least 2");
    let per_point: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|z| {
            if j.is_standard() {
                return vec![0.0; k_max + 1];
            }
            let r = linalg::norm(z);
            derivative_norms(j, z, k_max)
                .into_iter()
                .enumerate()
                .map(|(order, v)| v * order_weight(order, theta, r))
                .collect()
        })
        .collect();
    let mut envelopes = vec![0.0; k_max + 1];
    for row in &per_point {
        for (e, v) in envelopes.iter_mut().zip(row) {
            *e = f64::max(*e, *v);
        }
    }
    let lambda = envelopes.iter().copied().fold(0.0, f64::max);
    DecayProfile { lambda, theta, k: k_max, envelopes, sample_count: samples.len() }
}

/// Envelopes over concentric shells at `radii` with a deterministic direction set.
pub fn decay_report(j: &StructureField, theta: f64, k_max: usize, radii: &[f64], directions_per_radius: usize) -> DecayProfile {
    let samples = sampling::shell_points(j.dim(), radii, directions_per_radius);
    decay_report_shells(j, theta, k_max, &samples)
}
