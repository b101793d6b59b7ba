//! Physical parameters, boundary data and volume sources.

use std::fmt;
use std::sync::Arc;

use crate::exprlang::{EvalError, Expr};

/// A scalar function of position.
#[derive(Clone)]
pub enum ScalarField {
    Const(f64),
    Expr(Expr),
    /// Closure evaluated at physical points, with a label for diagnostics.
    Native(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>, String),
}

impl ScalarField {
    pub fn zero() -> Self {
        ScalarField::Const(0.0)
    }

    pub fn native(label: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Native(Arc::new(f), label.into())
    }

    pub fn eval(&self, p: [f64; 2]) -> Result<f64, EvalError> {
        match self {
            ScalarField::Const(v) => Ok(*v),
            ScalarField::Expr(e) => e.eval(p[0], p[1]),
            ScalarField::Native(f, _) => Ok(f(p[0], p[1])),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ScalarField::Const(v) => *v == 0.0,
            ScalarField::Expr(Expr::Num(v)) => *v == 0.0,
            _ => false,
        }
    }
}

impl From<f64> for ScalarField {
    fn from(v: f64) -> Self {
        ScalarField::Const(v)
    }
}

impl From<Expr> for ScalarField {
    fn from(e: Expr) -> Self {
        ScalarField::Expr(e)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Const(v) => write!(f, "{v}"),
            ScalarField::Expr(e) => write!(f, "{e}"),
            ScalarField::Native(_, label) => write!(f, "<{label}>"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub kn: f64,
    /// Default accommodation factor; boundary tags may override it.
    pub chi_tilde: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationParams {
    pub enabled: bool,
    pub delta_theta: f64,
    pub delta_u: f64,
    pub delta_p: f64,
}

impl StabilizationParams {
    pub fn new(delta_theta: f64, delta_u: f64, delta_p: f64) -> Self {
        StabilizationParams { enabled: true, delta_theta, delta_u, delta_p }
    }

    pub fn off() -> Self {
        StabilizationParams { enabled: false, delta_theta: 0.0, delta_u: 0.0, delta_p: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub theta_w: ScalarField,
    pub u_t_w: ScalarField,
    pub u_n_w: ScalarField,
    pub p_w: ScalarField,
    pub epsilon_w: f64,
    pub chi_tilde: Option<f64>,
}

impl BoundaryData {
    /// Impermeable wall at temperature `theta_w`, resting, no inflow.
    pub fn wall(theta_w: impl Into<ScalarField>) -> Self {
        BoundaryData {
            theta_w: theta_w.into(),
            u_t_w: ScalarField::zero(),
            u_n_w: ScalarField::zero(),
            p_w: ScalarField::zero(),
            epsilon_w: 0.0,
            chi_tilde: None,
        }
    }

    pub fn with_epsilon(mut self, epsilon_w: f64) -> Self {
        self.epsilon_w = epsilon_w;
        self
    }
}

#[derive(Debug, Clone)]
pub struct SourceData {
    pub m_dot: ScalarField,
    pub r: ScalarField,
    pub b: [ScalarField; 2],
}

impl Default for SourceData {
    fn default() -> Self {
        SourceData {
            m_dot: ScalarField::zero(),
            r: ScalarField::zero(),
            b: [ScalarField::zero(), ScalarField::zero()],
        }
    }
}
