//! Function oracles and the objective specification.
//!
//! Every component of the objective is handed to the solver as a set of
//! closures. Oracles own no mutable state visible to callers and must be
//! re-entrant: several solver instances may call them concurrently.

use crate::error::OracleError;
use crate::point::Point;

/// An evaluation closure. Extended-real functions (indicators) return
/// `f64::INFINITY` outside their domain; IEEE arithmetic saturates as needed.
pub type EvalFn = dyn Fn(&Point) -> f64 + Send + Sync;
/// A gradient closure.
pub type GradFn = dyn Fn(&Point) -> Point + Send + Sync;
/// A proximity-operator closure: `(point, stepsize) -> point`.
pub type ProxFn = dyn Fn(&Point, f64) -> Result<Point, OracleError> + Send + Sync;
/// A subgradient closure returning one element of the convex subdifferential.
pub type SubgradFn = dyn Fn(&Point) -> Result<Point, OracleError> + Send + Sync;
/// A scalar diagnostic of a point (residuals, relative errors).
pub type MetricFn = dyn Fn(&Point) -> f64 + Send + Sync;

/// A differentiable term: evaluation, gradient, convexity modulus and a
/// Lipschitz constant of the gradient. A closed-form proximity operator can be
/// attached when the term sits in the `f` slot of the objective.
pub struct SmoothOracle {
    eval: Box<EvalFn>,
    grad: Box<GradFn>,
    prox: Option<Box<ProxFn>>,
    /// Convexity modulus alpha (positive: strongly convex, negative: weakly).
    pub alpha: f64,
    /// Lipschitz constant of the gradient (kappa for `f`, ell for `hbar`).
    pub lipschitz: f64,
    is_zero: bool,
}

impl SmoothOracle {
    /// A smooth oracle without a prox.
    ///
    /// Panics unless `-lipschitz <= alpha <= lipschitz`: a gradient that is
    /// `kappa`-Lipschitz forces the convexity modulus into `[-kappa, kappa]`.
    pub fn new(
        eval: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Point) -> Point + Send + Sync + 'static,
        alpha: f64,
        lipschitz: f64,
    ) -> Self {
        assert!(lipschitz >= 0.0, "Lipschitz constant must be nonnegative");
        assert!(
            alpha <= lipschitz && alpha >= -lipschitz,
            "convexity modulus {alpha} incompatible with Lipschitz constant {lipschitz}"
        );
        Self {
            eval: Box::new(eval),
            grad: Box::new(grad),
            prox: None,
            alpha,
            lipschitz,
            is_zero: false,
        }
    }

    /// Attaches a closed-form proximity operator.
    pub fn with_prox(
        mut self,
        prox: impl Fn(&Point, f64) -> Result<Point, OracleError> + Send + Sync + 'static,
    ) -> Self {
        self.prox = Some(Box::new(prox));
        self
    }

    /// The identically-zero smooth term.
    pub fn zero() -> Self {
        let mut o = Self::new(|_| 0.0, |x| Point::zeros(x.nrows(), x.ncols()), 0.0, 0.0)
            .with_prox(|u, _| Ok(u.clone()));
        o.is_zero = true;
        o
    }

    pub fn eval(&self, x: &Point) -> f64 {
        (self.eval)(x)
    }

    pub fn grad(&self, x: &Point) -> Point {
        (self.grad)(x)
    }

    /// Proximity operator, if one is attached.
    pub fn prox(&self, x: &Point, stepsize: f64) -> Option<Result<Point, OracleError>> {
        self.prox.as_ref().map(|p| p(x, stepsize))
    }

    pub fn has_prox(&self) -> bool {
        self.prox.is_some()
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }
}

/// A proper lower-semicontinuous term accessed through its proximity operator.
pub struct ProxOracle {
    eval: Box<EvalFn>,
    prox: Box<ProxFn>,
    is_zero: bool,
}

impl ProxOracle {
    pub fn new(
        eval: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        prox: impl Fn(&Point, f64) -> Result<Point, OracleError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Box::new(eval),
            prox: Box::new(prox),
            is_zero: false,
        }
    }

    /// The identically-zero term; its prox is the identity.
    pub fn zero() -> Self {
        let mut o = Self::new(|_| 0.0, |u, _| Ok(u.clone()));
        o.is_zero = true;
        o
    }

    pub fn eval(&self, x: &Point) -> f64 {
        (self.eval)(x)
    }

    pub fn prox(&self, x: &Point, stepsize: f64) -> Result<Point, OracleError> {
        (self.prox)(x, stepsize)
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }
}

/// A continuous convex term accessed through one subgradient selection.
pub struct SubgradOracle {
    eval: Box<EvalFn>,
    subgrad: Box<SubgradFn>,
    is_zero: bool,
}

impl SubgradOracle {
    pub fn new(
        eval: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        subgrad: impl Fn(&Point) -> Result<Point, OracleError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Box::new(eval),
            subgrad: Box::new(subgrad),
            is_zero: false,
        }
    }

    /// The identically-zero term.
    pub fn zero() -> Self {
        let mut o = Self::new(|_| 0.0, |x| Ok(Point::zeros(x.nrows(), x.ncols())));
        o.is_zero = true;
        o
    }

    pub fn eval(&self, x: &Point) -> f64 {
        (self.eval)(x)
    }

    pub fn subgrad(&self, x: &Point) -> Result<Point, OracleError> {
        (self.subgrad)(x)
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }
}

/// The four-component objective `F = f + g + hbar - hunder`.
pub struct ObjectiveSpec {
    /// Smooth term with convexity modulus `alpha`, gradient Lipschitz constant
    /// `kappa`, and (for the solver) a proximity operator.
    pub f: SmoothOracle,
    /// Proper lsc term; may be an indicator.
    pub g: ProxOracle,
    /// Smooth part of the DC regularizer; `lipschitz` is `ell`.
    pub hbar: SmoothOracle,
    /// Convex part subtracted from the objective.
    pub hunder: SubgradOracle,
}

impl ObjectiveSpec {
    pub fn new(f: SmoothOracle, g: ProxOracle, hbar: SmoothOracle, hunder: SubgradOracle) -> Self {
        Self { f, g, hbar, hunder }
    }

    /// Full objective value `F(x)`; `+inf` where `g` is `+inf`.
    pub fn objective(&self, x: &Point) -> f64 {
        self.f.eval(x) + self.g.eval(x) + self.hbar.eval(x) - self.hunder.eval(x)
    }

    /// Convexity modulus of `f`.
    pub fn alpha(&self) -> f64 {
        self.f.alpha
    }

    /// Lipschitz constant of `grad f`.
    pub fn kappa(&self) -> f64 {
        self.f.lipschitz
    }

    /// Lipschitz constant of `grad hbar`.
    pub fn ell(&self) -> f64 {
        self.hbar.lipschitz
    }

    /// Problem constants paired with solver relaxation parameters, for
    /// admissibility checks.
    pub fn constants(
        &self,
        theta: f64,
        eta: f64,
    ) -> Result<crate::params::ProblemConstants, crate::params::ParamsError> {
        crate::params::ProblemConstants::new(self.alpha(), self.kappa(), self.ell(), theta, eta)
    }
}
