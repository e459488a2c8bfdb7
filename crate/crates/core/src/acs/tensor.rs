use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::StructureField;
use crate::linalg::{self, j_st};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    /// `max |J(z)^2 + I|` (Frobenius) over the samples.
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    pub samples: usize,
    pub pass: bool,
}

/// Check `J^2 = -I` on a sample set.
pub fn validate_structure(j: &StructureField, samples: &[Vec<f64>], tol: f64) -> ValidationReport {
    assert!(!samples.is_empty(), "validation needs at least one sample point");
    let d = j.dim();
    let id = DMatrix::<f64>::identity(d, d);
    let mut worst = (f64::NEG_INFINITY, 0usize);
    for (i, z) in samples.iter().enumerate() {
        let m = j.evaluate(z);
        let r = (&m * &m + &id).norm();
        if r > worst.0 {
            worst = (r, i);
        }
    }
    ValidationReport {
        max_residual: worst.0,
        worst_point: samples[worst.1].clone(),
        samples: samples.len(),
        pass: worst.0 <= tol,
    }
}

/// Nijenhuis tensor `N(X, Y)` at `z` for constant coordinate fields `X`, `Y`.
///
/// With constant `X`, `Y` the brackets reduce to directional derivatives of
/// `J`: `[X, Y] = 0`, `[JX, JY] = (D_{JX} J) Y - (D_{JY} J) X`,
/// `[X, JY] = (D_X J) Y`, `[JX, Y] = -(D_Y J) X`. The result is assembled as
/// `f(X, Y) - f(Y, X)` so antisymmetry holds bit for bit.
pub fn nijenhuis(j: &StructureField, z: &[f64], x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    j.check_point(z)?;
    for v in [x, y] {
        if v.len() != j.dim() {
            return Err(Error::DimensionMismatch { expected: j.dim(), got: v.len() });
        }
    }
    let jz = j.evaluate(z);
    let half = |a: &[f64], b: &[f64]| -> DVector<f64> {
        let av = DVector::from_column_slice(a);
        let bv = DVector::from_column_slice(b);
        let ja = &jz * &av;
        let d_ja = j.derivative(z, ja.as_slice());
        let d_a = j.derivative(z, a);
        -(d_ja * &bv) + &jz * (d_a * &bv)
    };
    let n = half(x, y) - half(y, x);
    Ok(n.as_slice().to_vec())
}

/// `max_{a<b} |N(e_a, e_b)|` over the coordinate basis.
pub fn nijenhuis_norm(j: &StructureField, z: &[f64]) -> Result<f64> {
    let d = j.dim();
    let mut best = 0.0f64;
    for a in 0..d {
        for b in a + 1..d {
            let mut ea = vec![0.0; d];
            let mut eb = vec![0.0; d];
            ea[a] = 1.0;
            eb[b] = 1.0;
            best = best.max(linalg::norm(&nijenhuis(j, z, &ea, &eb)?));
        }
    }
    Ok(best)
}

/// The real endomorphism `Q = (J + J_st)^{-1} (J - J_st)`, anti-linear for `J_st`.
pub fn deformation_endomorphism(j: &StructureField, z: &[f64]) -> Result<DMatrix<f64>> {
    j.check_point(z)?;
    let js = j_st(j.n());
    let jz = j.evaluate(z);
    let sum = &jz + &js;
    let lu = sum.lu();
    let q = lu
        .solve(&(jz - js))
        .ok_or_else(|| Error::TooFarFromStandard { point: z.to_vec() })?;
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::TooFarFromStandard { point: z.to_vec() });
    }
    Ok(q)
}

/// Complex `n x n` matrix `A(z)` with `Q(w) = A conj(w)`.
pub fn deformation_matrix(j: &StructureField, z: &[f64]) -> Result<DMatrix<Complex64>> {
    Ok(linalg::antilinear_part(&deformation_endomorphism(j, z)?))
}

/// Pointwise (1,0)-coframe `omega_j = dz_j + sum_k b_jk dzbar_k`.
#[derive(Clone, Debug)]
pub struct Coframe {
    pub b: DMatrix<Complex64>,
    /// `|omega o J - i omega|` measured after solving.
    pub residual: f64,
}

impl Coframe {
    /// Real `2n x 2n` matrix of `X -> omega(X)` into `C^n = R^2n`.
    pub fn real_matrix(&self) -> DMatrix<f64> {
        let n = self.b.nrows();
        DMatrix::identity(2 * n, 2 * n) + linalg::antilinear_matrix(&self.b)
    }

    /// Rows `omega_1..omega_n, conj(omega_1)..conj(omega_n)` evaluated on the
    /// real basis vectors `e_1..e_2n`.
    pub fn form_matrix(&self) -> DMatrix<Complex64> {
        form_matrix_from_real(&self.real_matrix())
    }
}

fn form_matrix_from_real(w: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = w.nrows() / 2;
    DMatrix::from_fn(2 * n, 2 * n, |r, m| {
        let j = r % n;
        let v = Complex64::new(w[(2 * j, m)], w[(2 * j + 1, m)]);
        if r < n {
            v
        } else {
            v.conj()
        }
    })
}

/// Solve `W J = J_st W` for `W = I + M_B` with `M_B` anti-linear, i.e.
/// `M_B = -(J - J_st)(J + J_st)^{-1}`.
pub fn coframe(j: &StructureField, z: &[f64]) -> Result<Coframe> {
    j.check_point(z)?;
    let js = j_st(j.n());
    let jz = j.evaluate(z);
    let sum_t = (&jz + &js).transpose();
    let diff_t = (&jz - &js).transpose();
    // M_B^T = -(J + J_st)^{-T} (J - J_st)^T
    let mbt = sum_t
        .lu()
        .solve(&diff_t)
        .ok_or_else(|| Error::CoframeSingular { point: z.to_vec() })?;
    if mbt.iter().any(|v| !v.is_finite()) {
        return Err(Error::CoframeSingular { point: z.to_vec() });
    }
    let mb = -mbt.transpose();
    let b = linalg::antilinear_part(&mb);
    let d = j.dim();
    let w = DMatrix::identity(d, d) + linalg::antilinear_matrix(&b);
    let residual = (&w * &jz - &js * &w).norm();
    Ok(Coframe { b, residual })
}

/// Coefficients `c^j_{kl}` of the (1,1)-part of `d omega_j` in the basis
/// `conj(omega_k) ^ omega_l`, summed over the full index range.
#[derive(Clone, Debug)]
pub struct StructureCoefficients {
    n: usize,
    values: Vec<Complex64>,
}

impl StructureCoefficients {
    pub fn get(&self, j: usize, k: usize, l: usize) -> Complex64 {
        self.values[(j * self.n + k) * self.n + l]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, c| m.max(c.norm()))
    }
}

/// Dual frame: columns `V_1..V_n, conj(V_1)..conj(V_n)` of the complexified
/// tangent space, dual to the coframe rows.
pub(super) fn dual_frame(j: &StructureField, z: &[f64]) -> Result<(Coframe, DMatrix<Complex64>)> {
    let cf = coframe(j, z)?;
    let omega = cf.form_matrix();
    let v = omega
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::CoframeSingular { point: z.to_vec() })?;
    Ok((cf, v))
}

pub(super) fn coframe_real_flat(j: &StructureField, p: &[f64]) -> Vec<f64> {
    match coframe(j, p) {
        Ok(cf) => cf.real_matrix().as_slice().to_vec(),
        Err(_) => vec![f64::NAN; j.dim() * j.dim()],
    }
}

/// Exterior derivative of the coframe: `d omega_j(e_a, e_b)` for all `j, a, b`.
fn coframe_exterior_derivative(j: &StructureField, z: &[f64], h: f64) -> Result<Vec<DMatrix<Complex64>>> {
    let n = j.n();
    let d = 2 * n;
    // derivs[a] = D_{e_a} W
    let mut derivs = Vec::with_capacity(d);
    for a in 0..d {
        let mut e = vec![0.0; d];
        e[a] = 1.0;
        let flat = crate::fd::directional(|p| coframe_real_flat(j, p), z, &e, h);
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::CoframeSingular { point: z.to_vec() });
        }
        derivs.push(DMatrix::from_column_slice(d, d, &flat));
    }
    let mut out = Vec::with_capacity(n);
    for jj in 0..n {
        let form = |dw: &DMatrix<f64>, m: usize| Complex64::new(dw[(2 * jj, m)], dw[(2 * jj + 1, m)]);
        out.push(DMatrix::from_fn(d, d, |a, b| form(&derivs[a], b) - form(&derivs[b], a)));
    }
    Ok(out)
}

/// Structure coefficients by finite-difference exterior differentiation of the
/// coframe field followed by projection onto `conj(V_k), V_l`.
pub fn structure_coefficients(j: &StructureField, z: &[f64], h_fd: f64) -> Result<StructureCoefficients> {
    let n = j.n();
    let (_, v) = dual_frame(j, z)?;
    let domega = coframe_exterior_derivative(j, z, h_fd)?;
    let mut values = Vec::with_capacity(n * n * n);
    for dw in &domega {
        for k in 0..n {
            let vbar_k = v.column(n + k);
            for l in 0..n {
                let v_l = v.column(l);
                let c = (vbar_k.transpose() * dw * v_l)[(0, 0)];
                values.push(c);
            }
        }
    }
    Ok(StructureCoefficients { n, values })
}

/// A complex-valued function on `R^2n` with its real gradient.
pub trait ComplexScalarField: Send + Sync {
    fn value(&self, z: &[f64]) -> Complex64;

    /// `(df(e_1), ..., df(e_2n))`; fourth-order differences by default.
    fn gradient(&self, z: &[f64]) -> Vec<Complex64> {
        let d = z.len();
        let h = crate::fd::default_step(z);
        (0..d)
            .map(|a| {
                let mut e = vec![0.0; d];
                e[a] = 1.0;
                let g = crate::fd::directional(
                    |p| {
                        let v = self.value(p);
                        vec![v.re, v.im]
                    },
                    z,
                    &e,
                    h,
                );
                Complex64::new(g[0], g[1])
            })
            .collect()
    }
}

/// `z_k` or `conj(z_k)` (zero-based `k`).
#[derive(Clone, Copy, Debug)]
pub struct Coordinate {
    pub k: usize,
    pub conjugate: bool,
}

impl ComplexScalarField for Coordinate {
    fn value(&self, z: &[f64]) -> Complex64 {
        let s = if self.conjugate { -1.0 } else { 1.0 };
        Complex64::new(z[2 * self.k], s * z[2 * self.k + 1])
    }

    fn gradient(&self, z: &[f64]) -> Vec<Complex64> {
        let mut g = vec![Complex64::new(0.0, 0.0); z.len()];
        g[2 * self.k] = Complex64::new(1.0, 0.0);
        g[2 * self.k + 1] = if self.conjugate { -I } else { I };
        g
    }
}

/// Wraps a closure; the gradient comes from finite differences.
pub struct FnComplexField<F>(pub F);

impl<F> ComplexScalarField for FnComplexField<F>
where
    F: Fn(&[f64]) -> Complex64 + Send + Sync,
{
    fn value(&self, z: &[f64]) -> Complex64 {
        (self.0)(z)
    }
}

/// `dbar_J f = (df + i df o J) / 2` expanded in the `conj(omega_k)` basis.
pub fn dbar_function(j: &StructureField, f: &dyn ComplexScalarField, z: &[f64]) -> Result<Vec<Complex64>> {
    j.check_point(z)?;
    let n = j.n();
    let d = 2 * n;
    let df = f.gradient(z);
    let jz = j.evaluate(z);
    let alpha: Vec<Complex64> = (0..d)
        .map(|m| {
            let df_jm: Complex64 = (0..d).map(|l| df[l] * jz[(l, m)]).sum();
            (df[m] + I * df_jm) * 0.5
        })
        .collect();
    let cf = coframe(j, z)?;
    let omega_t = cf.form_matrix().transpose();
    let coef = omega_t
        .lu()
        .solve(&DVector::from_vec(alpha))
        .ok_or_else(|| Error::CoframeSingular { point: z.to_vec() })?;
    Ok(coef.as_slice()[n..].to_vec())
}
