//! Analytic test structures.
//!
//! The pushforward families are `F_*(J_st)` for diffeomorphisms
//! `F(x) = x + delta * g(x) * c` with a scalar profile `g` and a fixed unit
//! direction `c`. They are integrable by construction and their `F`-images of
//! complex lines are exact J-holomorphic curves, which makes them the oracle
//! of choice throughout the test suite.
//!
//! The `nonintegrable` family is built from a prescribed anti-linear
//! deformation `Q(w) = A conj(w)` with the single entry
//! `A_12 = lambda * conj(z_1) * exp(-|z|^2)`, inverted through
//! `J = J_st (I + Q)(I - Q)^{-1}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{AlmostComplexStructure, FamilyDescriptor, ParamValue, Params, StructureField};
use crate::linalg::{self, j_st};
use crate::{Error, Result};

pub const STANDARD: &str = "standard";
pub const PUSHFORWARD_BUMP: &str = "pushforward_bump";
pub const PUSHFORWARD_RATIONAL: &str = "pushforward_rational";
pub const NONINTEGRABLE: &str = "nonintegrable";

pub const FAMILIES: [&str; 4] = [STANDARD, PUSHFORWARD_BUMP, PUSHFORWARD_RATIONAL, NONINTEGRABLE];

/// Build a gallery member from its name and parameter map. Unknown parameter
/// names are rejected.
pub fn build(family: &str, params: &Params) -> Result<StructureField> {
    let allowed: &[&str] = match family {
        STANDARD => &["n"],
        PUSHFORWARD_BUMP => &["n", "delta", "direction"],
        PUSHFORWARD_RATIONAL => &["n", "delta", "s", "direction"],
        NONINTEGRABLE => &["n", "lambda"],
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidParameter(format!(
            "family `{family}` does not take parameter `{bad}` (allowed: {})",
            allowed.join(", ")
        )));
    }
    let n = match params.get("n") {
        None => 2,
        Some(ParamValue::Number(x)) if *x >= 1.0 && x.fract() == 0.0 => *x as usize,
        Some(v) => return Err(Error::InvalidParameter(format!("n must be a positive integer, got {v:?}"))),
    };
    let scalar = |key: &str, default: f64| -> Result<f64> {
        match params.get(key) {
            None => Ok(default),
            Some(ParamValue::Number(x)) => Ok(*x),
            Some(v) => Err(Error::InvalidParameter(format!("{key} must be a number, got {v:?}"))),
        }
    };
    let direction = || -> Result<Option<Vec<f64>>> {
        match params.get("direction") {
            None => Ok(None),
            Some(ParamValue::Vector(v)) => Ok(Some(v.clone())),
            Some(v) => Err(Error::InvalidParameter(format!("direction must be a list, got {v:?}"))),
        }
    };
    match family {
        STANDARD => Ok(StructureField::standard(n)),
        PUSHFORWARD_BUMP => Ok(StructureField::new(Pushforward::new(
            n,
            scalar("delta", 0.01)?,
            Profile::Bump,
            direction()?,
        )?)),
        PUSHFORWARD_RATIONAL => Ok(StructureField::new(Pushforward::new(
            n,
            scalar("delta", 0.01)?,
            Profile::Rational { s: scalar("s", 0.5)? },
            direction()?,
        )?)),
        NONINTEGRABLE => Ok(StructureField::new(Nonintegrable::new(n, scalar("lambda", 0.01)?)?)),
        _ => unreachable!(),
    }
}

#[derive(Clone, Debug)]
pub struct Standard {
    n: usize,
}

impl Standard {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl AlmostComplexStructure for Standard {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, _z: &[f64]) -> DMatrix<f64> {
        j_st(self.n)
    }

    fn analytic_derivative(&self, _z: &[f64], _dir: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(2 * self.n, 2 * self.n))
    }

    fn descriptor(&self) -> FamilyDescriptor {
        let mut params = Params::new();
        params.insert("n".into(), ParamValue::Number(self.n as f64));
        FamilyDescriptor { family: STANDARD.into(), params }
    }
}

/// Scalar profile `g` of a pushforward family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    /// `exp(-|x|^2)`
    Bump,
    /// `(1 + |x|^2)^{-s}`
    Rational { s: f64 },
}

impl Profile {
    fn value_grad_hess(&self, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let d = x.len();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let xv = DVector::from_column_slice(x);
        match *self {
            Profile::Bump => {
                let g = (-r2).exp();
                let grad = &xv * (-2.0 * g);
                let hess = (DMatrix::identity(d, d) * -2.0 + &xv * xv.transpose() * 4.0) * g;
                (g, grad, hess)
            }
            Profile::Rational { s } => {
                let q = 1.0 + r2;
                let g = q.powf(-s);
                let grad = &xv * (-2.0 * s * q.powf(-s - 1.0));
                let hess = DMatrix::identity(d, d) * (-2.0 * s * q.powf(-s - 1.0))
                    + &xv * xv.transpose() * (4.0 * s * (s + 1.0) * q.powf(-s - 2.0));
                (g, grad, hess)
            }
        }
    }

    /// Upper bound on `|grad g|` over all of `R^d`.
    fn grad_bound(&self) -> f64 {
        match *self {
            // max of 2 r exp(-r^2) at r = 1/sqrt(2)
            Profile::Bump => (2.0f64).sqrt() * (-0.5f64).exp(),
            // max of 2 s r (1 + r^2)^{-s-1} at r^2 = 1 / (2 s + 1)
            Profile::Rational { s } => {
                let r2 = 1.0 / (2.0 * s + 1.0);
                2.0 * s * r2.sqrt() * (1.0 + r2).powf(-s - 1.0)
            }
        }
    }
}

/// `J = F_*(J_st)` with `F(x) = x + delta * g(x) * c`.
#[derive(Clone, Debug)]
pub struct Pushforward {
    n: usize,
    delta: f64,
    profile: Profile,
    direction: Vec<f64>,
}

/// Default direction: `0.6` on `Re z_1` and `0.8` on `Im z_n`.
pub fn default_direction(n: usize) -> Vec<f64> {
    let mut c = vec![0.0; 2 * n];
    c[0] = 0.6;
    c[2 * n - 1] += 0.8;
    c
}

impl Pushforward {
    pub fn new(n: usize, delta: f64, profile: Profile, direction: Option<Vec<f64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if let Profile::Rational { s } = profile {
            if !(s > 0.0) {
                return Err(Error::InvalidParameter(format!("decay exponent s must be positive, got {s}")));
            }
        }
        let c = direction.unwrap_or_else(|| default_direction(n));
        if c.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: c.len() });
        }
        let nrm = linalg::norm(&c);
        if nrm == 0.0 {
            return Err(Error::InvalidParameter("direction must be nonzero".into()));
        }
        let direction: Vec<f64> = c.iter().map(|v| v / nrm).collect();
        // DF = I + delta c grad(g)^T stays invertible iff |delta grad(g).c| < 1.
        if delta.abs() * profile.grad_bound() >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "delta = {delta} is too large for F to be a diffeomorphism"
            )));
        }
        Ok(Self { n, delta, profile, direction })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let (g, _, _) = self.profile.value_grad_hess(x);
        x.iter().zip(&self.direction).map(|(a, c)| a + self.delta * g * c).collect()
    }

    /// `DF(x)` and its inverse (Sherman-Morrison).
    fn jacobians(&self, x: &[f64]) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let d = 2 * self.n;
        let (_, grad, hess) = self.profile.value_grad_hess(x);
        let c = DVector::from_column_slice(&self.direction);
        let outer = &c * grad.transpose() * self.delta;
        let m = DMatrix::identity(d, d) + &outer;
        let denom = 1.0 + self.delta * grad.dot(&c);
        let minv = DMatrix::identity(d, d) - outer / denom;
        (m, minv, hess)
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        self.jacobians(x).0
    }

    /// `F^{-1}(y)` by Newton iteration from `x = y`.
    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        let mut x = y.to_vec();
        let scale = 1.0 + linalg::norm(y);
        for _ in 0..60 {
            let fx = self.forward(&x);
            let r: Vec<f64> = fx.iter().zip(y).map(|(a, b)| a - b).collect();
            if linalg::norm(&r) <= 1e-16 * scale {
                break;
            }
            let (_, minv, _) = self.jacobians(&x);
            let step = linalg::matvec(&minv, &r);
            let mut moved = 0.0;
            for (xi, si) in x.iter_mut().zip(&step) {
                *xi -= si;
                moved += si * si;
            }
            if moved.sqrt() <= 1e-17 * scale {
                break;
            }
        }
        x
    }
}

impl AlmostComplexStructure for Pushforward {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, y: &[f64]) -> DMatrix<f64> {
        let x = self.inverse(y);
        let (m, minv, _) = self.jacobians(&x);
        m * j_st(self.n) * minv
    }

    fn analytic_derivative(&self, y: &[f64], dir: &[f64]) -> Option<DMatrix<f64>> {
        let x = self.inverse(y);
        let (m, minv, hess) = self.jacobians(&x);
        let j = &m * j_st(self.n) * &minv;
        let dx = &minv * DVector::from_column_slice(dir);
        let c = DVector::from_column_slice(&self.direction);
        let dm = c * (hess * dx).transpose() * self.delta;
        let p = dm * minv;
        Some(&p * &j - &j * &p)
    }

    fn descriptor(&self) -> FamilyDescriptor {
        let mut params = Params::new();
        params.insert("n".into(), ParamValue::Number(self.n as f64));
        params.insert("delta".into(), ParamValue::Number(self.delta));
        params.insert("direction".into(), ParamValue::Vector(self.direction.clone()));
        let family = match self.profile {
            Profile::Bump => PUSHFORWARD_BUMP,
            Profile::Rational { s } => {
                params.insert("s".into(), ParamValue::Number(s));
                PUSHFORWARD_RATIONAL
            }
        };
        FamilyDescriptor { family: family.into(), params }
    }
}

/// Non-integrable structure with a single deformation entry
/// `A_12 = lambda conj(z_1) exp(-|z|^2)`.
#[derive(Clone, Debug)]
pub struct Nonintegrable {
    n: usize,
    lambda: f64,
}

impl Nonintegrable {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("the nonintegrable family needs n >= 2".into()));
        }
        // sup |conj(z_1) exp(-|z|^2)| = exp(-1/2)/sqrt(2)
        if lambda.abs() * (-0.5f64).exp() / 2f64.sqrt() >= 0.5 {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} is too large")));
        }
        Ok(Self { n, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The prescribed deformation matrix `A(z)`.
    pub fn prescribed_a(&self, z: &[f64]) -> DMatrix<Complex64> {
        let r2: f64 = z.iter().map(|v| v * v).sum();
        let mut a = DMatrix::zeros(self.n, self.n);
        a[(0, 1)] = Complex64::new(z[0], -z[1]) * (self.lambda * (-r2).exp());
        a
    }

    fn q_and_dq(&self, z: &[f64], dir: Option<&[f64]>) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
        let q = linalg::antilinear_matrix(&self.prescribed_a(z));
        let dq = dir.map(|w| {
            let r2: f64 = z.iter().map(|v| v * v).sum();
            let xw: f64 = z.iter().zip(w).map(|(a, b)| a * b).sum();
            let e = self.lambda * (-r2).exp();
            let zbar1 = Complex64::new(z[0], -z[1]);
            let wbar1 = Complex64::new(w[0], -w[1]);
            let mut da = DMatrix::zeros(self.n, self.n);
            da[(0, 1)] = (wbar1 - zbar1 * (2.0 * xw)) * e;
            linalg::antilinear_matrix(&da)
        });
        (q, dq)
    }
}

impl AlmostComplexStructure for Nonintegrable {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, z: &[f64]) -> DMatrix<f64> {
        let d = 2 * self.n;
        let (q, _) = self.q_and_dq(z, None);
        let id = DMatrix::<f64>::identity(d, d);
        let inv = (&id - &q).try_inverse().expect("|Q| < 1 keeps I - Q invertible");
        j_st(self.n) * (id + q) * inv
    }

    fn analytic_derivative(&self, z: &[f64], dir: &[f64]) -> Option<DMatrix<f64>> {
        let d = 2 * self.n;
        let (q, dq) = self.q_and_dq(z, Some(dir));
        let inv = (DMatrix::<f64>::identity(d, d) - q).try_inverse()?;
        Some(j_st(self.n) * &inv * dq? * &inv * 2.0)
    }

    fn descriptor(&self) -> FamilyDescriptor {
        let mut params = Params::new();
        params.insert("n".into(), ParamValue::Number(self.n as f64));
        params.insert("lambda".into(), ParamValue::Number(self.lambda));
        FamilyDescriptor { family: NONINTEGRABLE.into(), params }
    }
}
