//! Almost complex structure fields on `R^2n` and their pointwise tensor calculus.

mod decay;
pub mod gallery;
mod levi;
mod tensor;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::{Error, Result};

pub use decay::{decay_report, decay_report_shells, derivative_norms, order_weight, DecayProfile};
pub use levi::{
    levi_bilinear, levi_form, levi_form_frame, levi_lower_bound, volume_density, LeviReport, RealScalarField,
    RealPartSquare, SquaredNorm,
};
pub use tensor::{
    coframe, dbar_function, deformation_endomorphism, deformation_matrix, nijenhuis, nijenhuis_norm,
    structure_coefficients, validate_structure, Coframe, ComplexScalarField, Coordinate, FnComplexField,
    StructureCoefficients, ValidationReport,
};

/// A gallery parameter: either a scalar or a list of reals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Vector(Vec<f64>),
}

pub type Params = BTreeMap<String, ParamValue>;

/// Name and parameters identifying a structure, as written to reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub family: String,
    pub params: Params,
}

/// A smooth field `z -> J(z)` of real `2n x 2n` matrices.
pub trait AlmostComplexStructure: Send + Sync + fmt::Debug {
    /// Complex dimension `n`.
    fn n(&self) -> usize;

    fn eval(&self, z: &[f64]) -> DMatrix<f64>;

    /// Directional derivative `DJ(z)(dir)` when a closed form is known.
    fn analytic_derivative(&self, _z: &[f64], _dir: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    fn descriptor(&self) -> FamilyDescriptor;

    /// `(base, epsilon)` when this field is an isotropic dilation of `base`.
    fn dilation(&self) -> Option<(&StructureField, f64)> {
        None
    }
}

/// How first derivatives of a field are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JacobianMode {
    /// Closed form where the family provides one, finite differences otherwise.
    Analytic,
    /// Fourth-order centered differences with the given step, or the default
    /// `1e-3 (1 + |z|)` when `None`.
    FiniteDifference(Option<f64>),
}

/// Shared handle to a structure together with its derivative policy.
#[derive(Clone)]
pub struct StructureField {
    inner: Arc<dyn AlmostComplexStructure>,
    mode: JacobianMode,
}

impl fmt::Debug for StructureField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructureField")
            .field("inner", &self.inner)
            .field("mode", &self.mode)
            .finish()
    }
}

impl StructureField {
    pub fn new<S: AlmostComplexStructure + 'static>(inner: S) -> Self {
        Self { inner: Arc::new(inner), mode: JacobianMode::Analytic }
    }

    pub fn from_arc(inner: Arc<dyn AlmostComplexStructure>) -> Self {
        Self { inner, mode: JacobianMode::Analytic }
    }

    pub fn standard(n: usize) -> Self {
        Self::new(gallery::Standard::new(n))
    }

    pub fn with_mode(mut self, mode: JacobianMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> JacobianMode {
        self.mode
    }

    pub fn inner(&self) -> &Arc<dyn AlmostComplexStructure> {
        &self.inner
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    pub fn dim(&self) -> usize {
        2 * self.inner.n()
    }

    pub fn descriptor(&self) -> FamilyDescriptor {
        self.inner.descriptor()
    }

    pub fn is_standard(&self) -> bool {
        self.descriptor().family == gallery::STANDARD
    }

    pub fn check_point(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        Ok(())
    }

    pub fn evaluate(&self, z: &[f64]) -> DMatrix<f64> {
        self.inner.eval(z)
    }

    /// `J(z) - J_st`.
    pub fn deviation(&self, z: &[f64]) -> DMatrix<f64> {
        self.inner.eval(z) - linalg::j_st(self.n())
    }

    /// `DJ(z)(dir)` under the field's [`JacobianMode`].
    pub fn derivative(&self, z: &[f64], dir: &[f64]) -> DMatrix<f64> {
        match self.mode {
            JacobianMode::Analytic => match self.inner.analytic_derivative(z, dir) {
                Some(d) => d,
                None => self.fd_derivative(z, dir, crate::fd::default_step(z)),
            },
            JacobianMode::FiniteDifference(step) => {
                self.fd_derivative(z, dir, step.unwrap_or_else(|| crate::fd::default_step(z)))
            }
        }
    }

    pub fn fd_derivative(&self, z: &[f64], dir: &[f64], h: f64) -> DMatrix<f64> {
        let d = self.dim();
        let flat = crate::fd::directional(|p| self.inner.eval(p).as_slice().to_vec(), z, dir, h);
        DMatrix::from_column_slice(d, d, &flat)
    }
}

/// A spatially constant matrix field. No structure check is made, which lets
/// validation tests feed deliberately broken matrices.
#[derive(Clone, Debug)]
pub struct ConstantField {
    matrix: DMatrix<f64>,
}

impl ConstantField {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "constant field needs an even square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    /// `S J_st S^{-1}` for an invertible real matrix `S`.
    pub fn conjugated(s: &DMatrix<f64>) -> Result<Self> {
        let inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("conjugating matrix is singular".into()))?;
        Self::new(s * linalg::j_st(s.nrows() / 2) * inv)
    }
}

impl AlmostComplexStructure for ConstantField {
    fn n(&self) -> usize {
        self.matrix.nrows() / 2
    }

    fn eval(&self, _z: &[f64]) -> DMatrix<f64> {
        self.matrix.clone()
    }

    fn analytic_derivative(&self, _z: &[f64], _dir: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(self.matrix.nrows(), self.matrix.ncols()))
    }

    fn descriptor(&self) -> FamilyDescriptor {
        let mut params = Params::new();
        params.insert("matrix".into(), ParamValue::Vector(self.matrix.as_slice().to_vec()));
        FamilyDescriptor { family: "constant".into(), params }
    }
}
