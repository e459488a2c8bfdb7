use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::tensor::{coframe, dual_frame, structure_coefficients};
use super::StructureField;
use crate::Result;

/// A real function with closed-form gradient and Hessian.
pub trait RealScalarField: Send + Sync {
    fn value(&self, z: &[f64]) -> f64;
    fn gradient(&self, z: &[f64]) -> Vec<f64>;
    fn hessian(&self, z: &[f64]) -> DMatrix<f64>;
}

/// `|z|^2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SquaredNorm;

impl RealScalarField for SquaredNorm {
    fn value(&self, z: &[f64]) -> f64 {
        z.iter().map(|v| v * v).sum()
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        z.iter().map(|v| 2.0 * v).collect()
    }

    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(z.len(), z.len()) * 2.0
    }
}

/// `Re(z_k^2) = x_k^2 - y_k^2` (zero-based `k`), pluriharmonic for `J_st`.
#[derive(Clone, Copy, Debug)]
pub struct RealPartSquare {
    pub k: usize,
}

impl RealScalarField for RealPartSquare {
    fn value(&self, z: &[f64]) -> f64 {
        z[2 * self.k].powi(2) - z[2 * self.k + 1].powi(2)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; z.len()];
        g[2 * self.k] = 2.0 * z[2 * self.k];
        g[2 * self.k + 1] = -2.0 * z[2 * self.k + 1];
        g
    }

    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(z.len(), z.len());
        h[(2 * self.k, 2 * self.k)] = 2.0;
        h[(2 * self.k + 1, 2 * self.k + 1)] = -2.0;
        h
    }
}

/// Symmetric real matrix `G` with `L^J(phi, p, v) = v^T G v`.
///
/// `L(v) = (1/4) d(-dphi o J)(v, Jv)`; the factor makes `L^{J_st}(|z|^2, p, v) = |v|^2`.
/// For constant fields `X`, `Y`:
/// `d alpha(X, Y) = -(H X)^T J Y - grad^T (D_X J) Y + (H Y)^T J X + grad^T (D_Y J) X`.
pub fn levi_bilinear(j: &StructureField, phi: &dyn RealScalarField, p: &[f64]) -> DMatrix<f64> {
    let d = j.dim();
    let jz = j.evaluate(p);
    let grad = nalgebra::DVector::from_vec(phi.gradient(p));
    let hess = phi.hessian(p);
    // r[(a, b)] = grad^T (D_{e_a} J) e_b
    let mut r = DMatrix::zeros(d, d);
    for a in 0..d {
        let mut e = vec![0.0; d];
        e[a] = 1.0;
        let dj = j.derivative(p, &e);
        let row = grad.transpose() * dj;
        r.set_row(a, &row);
    }
    let hj = &hess * &jz;
    let beta = -&hj + hj.transpose() - &r + r.transpose();
    let g = beta * jz * 0.25;
    (&g + g.transpose()) * 0.5
}

/// Levi form of `phi` with respect to `J` at `(p, v)`, coordinate free.
pub fn levi_form(j: &StructureField, phi: &dyn RealScalarField, p: &[f64], v: &[f64]) -> f64 {
    let g = levi_bilinear(j, phi, p);
    let vv = nalgebra::DVector::from_column_slice(v);
    (vv.transpose() * g * &vv)[(0, 0)]
}

/// Levi form through the frame formula
/// `phi_kj = V̄_j(V_k phi) + sum_i c^i_{jk} V_i phi`, `L = sum phi_kj a_k conj(a_j)`
/// with `a = omega(v)`. Used to cross-check [`levi_form`].
pub fn levi_form_frame(j: &StructureField, phi: &dyn RealScalarField, p: &[f64], v: &[f64], h_fd: f64) -> Result<f64> {
    let n = j.n();
    let d = 2 * n;
    let (cf, frame) = dual_frame(j, p)?;
    let c = structure_coefficients(j, p, h_fd)?;
    let grad: Vec<Complex64> = phi.gradient(p).into_iter().map(|g| Complex64::new(g, 0.0)).collect();
    let hess = phi.hessian(p).map(|x| Complex64::new(x, 0.0));

    // D_{e_a} of the frame field
    let flat = |q: &[f64]| -> Vec<f64> {
        match dual_frame(j, q) {
            Ok((_, m)) => m.iter().flat_map(|c| [c.re, c.im]).collect(),
            Err(_) => vec![f64::NAN; 2 * d * d],
        }
    };
    let dframe: Vec<DMatrix<Complex64>> = (0..d)
        .map(|a| {
            let mut e = vec![0.0; d];
            e[a] = 1.0;
            let raw = crate::fd::directional(flat, p, &e, h_fd);
            let vals: Vec<Complex64> = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
            DMatrix::from_column_slice(d, d, &vals)
        })
        .collect();

    let phi_i: Vec<Complex64> = (0..n)
        .map(|i| (0..d).map(|a| grad[a] * frame[(a, i)]).sum())
        .collect();
    let omega = cf.form_matrix();
    let a: Vec<Complex64> = (0..n)
        .map(|k| (0..d).map(|m| omega[(k, m)] * v[m]).sum())
        .collect();

    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let vk = frame.column(k);
        for jj in 0..n {
            let vbar_j = frame.column(n + jj);
            let second_order = (vbar_j.transpose() * &hess * vk)[(0, 0)];
            // D_{V̄_j} V_k = sum_a V̄_j[a] D_{e_a} V_k
            let dv: Vec<Complex64> = (0..d)
                .map(|m| (0..d).map(|aa| vbar_j[aa] * dframe[aa][(m, k)]).sum())
                .collect();
            let first_order: Complex64 = (0..d).map(|m| grad[m] * dv[m]).sum();
            let torsion: Complex64 = (0..n).map(|i| c.get(i, jj, k) * phi_i[i]).sum();
            let phi_kj = second_order + first_order + torsion;
            total += phi_kj * a[k] * a[jj].conj();
        }
    }
    Ok(total.re)
}

#[derive(Clone, Debug, Serialize)]
pub struct LeviReport {
    pub tau0_estimate: f64,
    pub sample_count: usize,
    pub worst_point: Vec<f64>,
}

/// Smallest eigenvalue of the symmetrized Levi matrix against the Euclidean
/// form, minimized over the samples.
pub fn levi_lower_bound(j: &StructureField, phi: &dyn RealScalarField, samples: &[Vec<f64>]) -> LeviReport {
    assert!(!samples.is_empty(), "Levi bound needs at least one sample point");
    use rayon::prelude::*;
    let mins: Vec<f64> = samples
        .par_iter()
        .map(|p| {
            let g = levi_bilinear(j, phi, p);
            g.symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, x| m.min(*x))
        })
        .collect();
    let (idx, tau) = mins
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if *v < bv { (i, *v) } else { (bi, bv) });
    LeviReport { tau0_estimate: tau, sample_count: samples.len(), worst_point: samples[idx].clone() }
}

/// Density `1 + Phi` of `dV = prod_j (i/2) omega_j ^ conj(omega_j)` against `dV_0`,
/// which equals the determinant of the real coframe matrix.
pub fn volume_density(j: &StructureField, z: &[f64]) -> Result<f64> {
    Ok(coframe(j, z)?.real_matrix().determinant())
}
