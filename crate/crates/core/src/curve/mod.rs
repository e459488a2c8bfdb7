//! J-holomorphic lines and discs through the Cauchy-Green fixed point.
//!
//! A map `z: C -> C^n` is J-holomorphic iff `z_zetabar = mu(z) conj(z_zeta)` with
//! `mu = -A`, where `A` is the [`deformation_matrix`] of `J`. Lines solve
//! `z = L^v + T(mu(z) conj(z_zeta))`, whose linear part is `L^v(zeta) = zeta v`.

mod cover;
mod disc;
mod line;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acs::{deformation_endomorphism, deformation_matrix, StructureField};
use crate::cauchy_green::{weighted_c0_norm, CauchyKernel, PlaneGrid};
use crate::linalg::{self, cnorm};
use crate::{Error, Result};

pub use cover::{CoverResult, CoverSettings, LineEvaluator};
pub use disc::{center_lattice, foliation_check, solve_disc, DiscProblem, FoliationReport, DISC_RADIUS};
pub use line::{solve_line, LineProblem, LineSolver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Line,
    Disc,
}

/// One Picard step: weighted-C^0 size of the update and its ratio to the previous one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub step: f64,
    pub ratio: Option<f64>,
    /// Weighted `C^{1,gamma}` distance to the linear part, in strict-norm mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder_distance: Option<f64>,
}

/// Iteration limits and tolerances shared by line and disc solves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub max_iter: usize,
    pub tol_fixed_point: f64,
    pub tol_residual: f64,
    /// Warn when the measured decay amplitude exceeds this; `None` skips the check.
    pub admissibility_lambda: Option<f64>,
    pub strict_norm: bool,
    /// Seed of the Hölder pair sampler used in strict-norm mode.
    pub pair_seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol_fixed_point: 1e-12,
            tol_residual: 1e-5,
            admissibility_lambda: Some(0.05),
            strict_norm: false,
            pair_seed: crate::cauchy_green::PAIR_SEED,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CurveSolution {
    pub kind: CurveKind,
    /// Direction `v` of a line or center `a` of a disc.
    pub anchor: Vec<Complex64>,
    pub samples: PlaneGrid,
    /// Source `g = mu(z) conj(z_zeta)` of the last step, so that
    /// `z = reference + T g` (minus `Tg(0)` for discs).
    pub source: PlaneGrid,
    /// Constant subtracted from `T g` (the disc pin `Tg(0)`; zero for lines).
    pub offset: Vec<Complex64>,
    pub diagnostics: SolutionDiagnostics,
}

/// The serializable part of a [`CurveSolution`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionDiagnostics {
    pub kind: CurveKind,
    pub anchor: Vec<Complex64>,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub iterations: Vec<IterationRecord>,
    pub residual_cr: f64,
    /// Sup over nodes of `|z - reference|`.
    pub growth_sup: f64,
    /// Weighted `C^0` distance `|z - reference|_w`, compared against `epsilon0`.
    pub distance_weighted: f64,
    pub within_epsilon0: bool,
    pub fixed_point_converged: bool,
    /// Fixed point reached and `residual_cr <= tol_residual`.
    pub converged: bool,
    /// Measured decay amplitude when the admissibility check ran.
    pub lambda_estimate: Option<f64>,
    pub admissible: Option<bool>,
    /// Nominal tail bound `lambda R^(1 - theta)` of the truncated plane.
    pub truncation_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder: Option<crate::cauchy_green::HolderNorms>,
}

impl CurveSolution {
    pub fn converged(&self) -> bool {
        self.diagnostics.converged
    }

    /// Last Picard step below the fixed-point tolerance, regardless of the CR residual.
    pub fn fixed_point_converged(&self) -> bool {
        self.diagnostics.fixed_point_converged
    }

    pub fn iterations(&self) -> &[IterationRecord] {
        &self.diagnostics.iterations
    }

    /// The unperturbed map: `zeta v` for lines, `(a, zeta)` for discs.
    pub fn reference_at(&self, zeta: Complex64) -> Vec<Complex64> {
        match self.kind {
            CurveKind::Line => self.anchor.iter().map(|c| zeta * c).collect(),
            CurveKind::Disc => {
                let mut r = self.anchor.clone();
                r.push(zeta);
                r
            }
        }
    }

    /// The solution at an arbitrary `zeta` through the same panel quadrature as on the grid.
    pub fn evaluate_at(&self, zeta: Complex64) -> Vec<Complex64> {
        let t = crate::cauchy_green::cauchy_green_at(&self.source, zeta);
        self.reference_at(zeta)
            .iter()
            .zip(&t)
            .zip(&self.offset)
            .map(|((r, t), o)| r + (t - o))
            .collect()
    }
}

/// `mu(z) = -A(z)`.
pub fn beltrami_coefficient(j: &StructureField, z: &[Complex64]) -> Result<DMatrix<Complex64>> {
    Ok(-deformation_matrix(j, &linalg::to_real(z))?)
}

fn node_error(grid: &PlaneGrid, node: usize, e: Error) -> Error {
    Error::AtNode { j: node % grid.points(), k: node / grid.points(), source: Box::new(e) }
}

fn check_components(j: &StructureField, z: &PlaneGrid) -> Result<()> {
    if z.components() != j.n() {
        return Err(Error::DimensionMismatch { expected: j.n(), got: z.components() });
    }
    Ok(())
}

/// `mu(z) conj(w)` at every node; nodes outside `mask` (a radius) get 0.
pub(crate) fn beltrami_source(j: &StructureField, z: &PlaneGrid, w: &PlaneGrid, mask: Option<f64>) -> Result<PlaneGrid> {
    let n = z.components();
    let mut out = z.like(n);
    if j.is_standard() {
        return Ok(out);
    }
    let rows: Vec<Result<Vec<Complex64>>> = (0..z.node_count())
        .into_par_iter()
        .map(|node| {
            if let Some(r) = mask {
                if z.zeta_at(node).norm() > r {
                    return Ok(vec![Complex64::new(0.0, 0.0); n]);
                }
            }
            let mu = beltrami_coefficient(j, z.node(node)).map_err(|e| node_error(z, node, e))?;
            Ok(linalg::apply_conj(&mu, w.node(node)))
        })
        .collect();
    for (node, r) in rows.into_iter().enumerate() {
        out.node_mut(node).copy_from_slice(&r?);
    }
    Ok(out)
}

fn residual_masked(j: &StructureField, z: &PlaneGrid, mask: Option<f64>) -> Result<f64> {
    check_components(j, z)?;
    let (dz, dzb) = z.wirtinger();
    let h = z.spacing();
    let keep = |node: usize| z.is_interior(node) && mask.is_none_or(|r| z.zeta_at(node).norm() <= r - 2.0 * h);
    let vals: Vec<Result<f64>> = (0..z.node_count())
        .into_par_iter()
        .filter(|node| keep(*node))
        .map(|node| {
            let mu = if j.is_standard() {
                DMatrix::zeros(z.components(), z.components())
            } else {
                beltrami_coefficient(j, z.node(node)).map_err(|e| node_error(z, node, e))?
            };
            let rhs = linalg::apply_conj(&mu, dz.node(node));
            let diff: Vec<Complex64> = dzb.node(node).iter().zip(&rhs).map(|(a, b)| a - b).collect();
            Ok(cnorm(&diff))
        })
        .collect();
    let mut m = 0.0f64;
    for v in vals {
        m = m.max(v?);
    }
    Ok(m)
}

/// Max over interior nodes of `|z_zetabar - mu(z) conj(z_zeta)|`.
pub fn residual_cr(j: &StructureField, z: &PlaneGrid) -> Result<f64> {
    residual_masked(j, z, None)
}

/// Interior residual restricted to nodes at least two steps inside `|zeta| <= radius`.
pub fn residual_cr_in_disc(j: &StructureField, z: &PlaneGrid, radius: f64) -> Result<f64> {
    residual_masked(j, z, Some(radius))
}

pub(crate) fn phi_with(kernel: &CauchyKernel, j: &StructureField, z: &PlaneGrid) -> Result<PlaneGrid> {
    check_components(j, z)?;
    let (dz, _) = z.wirtinger();
    let g = beltrami_source(j, z, &dz, None)?;
    z.sub(&kernel.apply(&g))
}

/// `Phi_J(z) = z - T(mu(z) conj(z_zeta))`; J-holomorphic maps are those with
/// holomorphic `Phi_J(z)`.
pub fn phi(j: &StructureField, z: &PlaneGrid) -> Result<PlaneGrid> {
    phi_with(&CauchyKernel::for_grid(z), j, z)
}

/// Complex matrix of `dmu` along the real direction `dir` at `z`.
fn beltrami_derivative(j: &StructureField, z: &[f64], dir: &[f64]) -> Result<DMatrix<Complex64>> {
    let js = linalg::j_st(j.n());
    let jz = j.evaluate(z);
    let lu = (&jz + &js).lu();
    let dj = j.derivative(z, dir);
    let q = deformation_endomorphism(j, z)?;
    let first = lu.solve(&dj).ok_or_else(|| Error::TooFarFromStandard { point: z.to_vec() })?;
    let dq = &first - &first * q;
    Ok(-linalg::antilinear_part(&dq))
}

/// Derivative of [`phi`] at `z` along `zdot`:
/// `zdot - T(mu conj(zdot_zeta)) - T(dmu(zdot) conj(z_zeta))`.
pub fn frechet_derivative(j: &StructureField, z: &PlaneGrid, zdot: &PlaneGrid) -> Result<PlaneGrid> {
    z.same_shape(zdot)?;
    check_components(j, z)?;
    if j.is_standard() {
        return Ok(zdot.clone());
    }
    let kernel = CauchyKernel::for_grid(z);
    let (dz, _) = z.wirtinger();
    let (dzdot, _) = zdot.wirtinger();
    let rows: Vec<Result<Vec<Complex64>>> = (0..z.node_count())
        .into_par_iter()
        .map(|node| {
            let zr = linalg::to_real(z.node(node));
            let mu = beltrami_coefficient(j, z.node(node)).map_err(|e| node_error(z, node, e))?;
            let dmu = beltrami_derivative(j, &zr, &linalg::to_real(zdot.node(node))).map_err(|e| node_error(z, node, e))?;
            let a = linalg::apply_conj(&mu, dzdot.node(node));
            let b = linalg::apply_conj(&dmu, dz.node(node));
            Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect())
        })
        .collect();
    let mut g = z.like(z.components());
    for (node, r) in rows.into_iter().enumerate() {
        g.node_mut(node).copy_from_slice(&r?);
    }
    zdot.sub(&kernel.apply(&g))
}

/// `Q(z) = T(mu(z) conj(z_zeta))` without the linear part, which cancels in differences.
pub(crate) fn q_map(kernel: &CauchyKernel, j: &StructureField, z: &PlaneGrid) -> Result<PlaneGrid> {
    let (dz, _) = z.wirtinger();
    Ok(kernel.apply(&beltrami_source(j, z, &dz, None)?))
}

/// `|Q(z1) - Q(z2)|_w / |z1 - z2|_w` for the fixed-point map `Q(z) = L^v + T(mu(z) conj(z_zeta))`.
pub fn contraction_estimate(j: &StructureField, z1: &PlaneGrid, z2: &PlaneGrid) -> Result<f64> {
    z1.same_shape(z2)?;
    check_components(j, z1)?;
    let denom = weighted_c0_norm(&z1.sub(z2)?);
    if denom == 0.0 {
        return Err(Error::DegeneratePair);
    }
    if j.is_standard() {
        return Ok(0.0);
    }
    let kernel = CauchyKernel::for_grid(z1);
    let diff = q_map(&kernel, j, z1)?.sub(&q_map(&kernel, j, z2)?)?;
    Ok(weighted_c0_norm(&diff) / denom)
}

/// `zeta -> zeta v` on the grid.
pub fn linear_map(radius: f64, points: usize, v: &[Complex64]) -> Result<PlaneGrid> {
    PlaneGrid::from_fn(radius, points, v.len(), |z| v.iter().map(|c| z * c).collect())
}

/// Rejects directions whose norm differs from 1 by more than `1e-12`.
pub(crate) fn check_unit(v: &[Complex64]) -> Result<()> {
    let nv = cnorm(v);
    if (nv - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("direction must be a unit vector, |v| = {nv}")));
    }
    Ok(())
}
