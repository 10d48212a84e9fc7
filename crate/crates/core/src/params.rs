//! Stepsize admissibility.
//!
//! Sufficient decrease of the solver's Lyapunov function requires
//!
//! ```text
//! phi(gamma) = 2 theta kappa (kappa + ell) gamma^2
//!              - ((eta theta + 2 - 2 theta) alpha - (3 eta - 2) theta ell) gamma
//!              + eta - 2  <  0,
//! ```
//!
//! and boundedness of the iterates additionally requires
//! `gamma < 1 / (theta (kappa + ell))`. This module computes the admissible
//! stepsize interval `(lower, upper)` together with the case of the analysis
//! it falls under:
//!
//! - case (a): `kappa > 0` and `eta < 2` — interval `(0, upper)`;
//! - case (b): `kappa > 0` and `eta >= 2` — needs strong convexity of `f`
//!   (an explicit lower bound on alpha) and gives `(lower, upper)` with
//!   `lower > 0`;
//! - case (c): `kappa = 0` — a linear inequality instead of a quadratic.
//!
//! Infeasibility is reported as a value, not an error, so front-ends can print
//! diagnostics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Constants of a problem/parameter pairing used by the admissibility tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Convexity modulus of `f` (may be negative).
    pub alpha: f64,
    /// Lipschitz constant of `grad f`.
    pub kappa: f64,
    /// Lipschitz constant of `grad hbar`.
    pub ell: f64,
    /// Relaxation parameter in (0, 1].
    pub theta: f64,
    /// Relaxation parameter > 0.
    pub eta: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("kappa must be nonnegative, got {0}")]
    NegativeKappa(f64),
    #[error("ell must be nonnegative, got {0}")]
    NegativeEll(f64),
    #[error("alpha = {alpha} must lie in [-kappa, kappa] with kappa = {kappa}")]
    AlphaOutOfRange { alpha: f64, kappa: f64 },
    #[error("theta must lie in (0, 1], got {0}")]
    ThetaOutOfRange(f64),
    #[error("eta must be positive, got {0}")]
    EtaNotPositive(f64),
    #[error("eta upper bound undefined when kappa = ell = 0")]
    EtaBoundUndefined,
}

/// Which case of the admissibility analysis produced a [`GammaRange`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    A,
    B,
    C,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseLabel::A => f.write_str("a"),
            CaseLabel::B => f.write_str("b"),
            CaseLabel::C => f.write_str("c"),
        }
    }
}

/// Admissible open stepsize interval `(lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaRange {
    /// Lower endpoint (0 except in case (b)).
    pub lower: f64,
    /// Upper endpoint; `f64::INFINITY` in case (c) with `ell = 0`.
    pub upper: f64,
    /// Case of the analysis; `None` when no case applies.
    pub case: Option<CaseLabel>,
    pub feasible: bool,
}

impl GammaRange {
    fn infeasible() -> Self {
        Self {
            lower: 0.0,
            upper: 0.0,
            case: None,
            feasible: false,
        }
    }

    /// Whether `gamma` lies strictly inside the interval.
    pub fn contains(&self, gamma: f64) -> bool {
        self.feasible && gamma > self.lower && gamma < self.upper
    }
}

/// A config validation outcome: the failing inequality, spelled out.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigViolation {
    #[error("gamma must be positive, got {0}")]
    GammaNotPositive(f64),
    #[error("no admissible stepsize interval: {0}")]
    Infeasible(String),
    #[error("gamma = {gamma} is not strictly below the upper endpoint {upper}")]
    GammaTooLarge { gamma: f64, upper: f64 },
    #[error("gamma = {gamma} is not strictly above the lower endpoint {lower}")]
    GammaTooSmall { gamma: f64, lower: f64 },
}

impl ProblemConstants {
    pub fn new(alpha: f64, kappa: f64, ell: f64, theta: f64, eta: f64) -> Result<Self, ParamsError> {
        if !(kappa >= 0.0) {
            return Err(ParamsError::NegativeKappa(kappa));
        }
        if !(ell >= 0.0) {
            return Err(ParamsError::NegativeEll(ell));
        }
        if !(alpha >= -kappa && alpha <= kappa) {
            return Err(ParamsError::AlphaOutOfRange { alpha, kappa });
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(ParamsError::ThetaOutOfRange(theta));
        }
        if !(eta > 0.0) {
            return Err(ParamsError::EtaNotPositive(eta));
        }
        Ok(Self {
            alpha,
            kappa,
            ell,
            theta,
            eta,
        })
    }

    /// Coefficient of the linear term of `phi`, negated:
    /// `B = (eta theta + 2 - 2 theta) alpha - (3 eta - 2) theta ell`,
    /// so that `phi(gamma) = a gamma^2 - B gamma + c`.
    fn linear_coeff(&self) -> f64 {
        (self.eta * self.theta + 2.0 - 2.0 * self.theta) * self.alpha
            - (3.0 * self.eta - 2.0) * self.theta * self.ell
    }

    /// Leading coefficient `a = 2 theta kappa (kappa + ell)`.
    fn quadratic_coeff(&self) -> f64 {
        2.0 * self.theta * self.kappa * (self.kappa + self.ell)
    }
}

/// The admissibility quadratic `phi(gamma)`.
pub fn phi(constants: &ProblemConstants, gamma: f64) -> f64 {
    let a = constants.quadratic_coeff();
    let b = constants.linear_coeff();
    a * gamma * gamma - b * gamma + (constants.eta - 2.0)
}

/// Discriminant `Delta = B^2 - 8 (eta - 2) theta kappa (kappa + ell)`.
pub fn discriminant(constants: &ProblemConstants) -> f64 {
    let b = constants.linear_coeff();
    b * b - 8.0 * (constants.eta - 2.0) * constants.theta * constants.kappa
        * (constants.kappa + constants.ell)
}

/// Roots of `phi` in increasing order, via the cancellation-free quadratic
/// formula. Caller guarantees `a > 0` and `Delta >= 0`.
fn phi_roots(a: f64, b: f64, c: f64, delta: f64) -> (f64, f64) {
    let sq = delta.sqrt();
    // q = -(b' + sign(b') sqrt(Delta)) / 2 with phi = a g^2 + b' g + c, b' = -b:
    // computed so that the large-magnitude root never subtracts nearly equal
    // numbers; the other root follows from the product c / a.
    if b >= 0.0 {
        let big = (b + sq) / (2.0 * a);
        let small = if big == 0.0 { 0.0 } else { c / (a * big) };
        (small.min(big), small.max(big))
    } else {
        let big = (b - sq) / (2.0 * a); // most-negative root
        let small = if big == 0.0 { 0.0 } else { c / (a * big) };
        (big.min(small), big.max(small))
    }
}

/// Upper bound on the relaxation parameter eta:
/// `eta < 2 + 2 kappa / (theta (kappa + ell))`.
pub fn eta_upper_bound(constants: &ProblemConstants) -> Result<f64, ParamsError> {
    if constants.kappa + constants.ell <= 0.0 {
        return Err(ParamsError::EtaBoundUndefined);
    }
    Ok(2.0 + 2.0 * constants.kappa / (constants.theta * (constants.kappa + constants.ell)))
}

/// Admissible stepsize interval for the given constants.
pub fn gamma_range(constants: &ProblemConstants) -> GammaRange {
    let ProblemConstants {
        alpha,
        kappa,
        ell,
        theta,
        eta,
    } = *constants;

    if kappa > 0.0 {
        if eta < 2.0 {
            // Case (a): eta in (0, 2) when ell = 0, eta in [1, 2) when ell > 0.
            if ell > 0.0 && eta < 1.0 {
                return GammaRange::infeasible();
            }
            let a = constants.quadratic_coeff();
            let b = constants.linear_coeff();
            let c = eta - 2.0;
            let delta = discriminant(constants);
            // c < 0 forces delta > 0 and one positive root.
            let (_, upper) = phi_roots(a, b, c, delta);
            return GammaRange {
                lower: 0.0,
                upper,
                case: Some(CaseLabel::A),
                feasible: true,
            };
        }

        // Case (b): eta in [2, 2 + 2 kappa / (theta (kappa + ell))).
        let eta_cap = 2.0 + 2.0 * kappa / (theta * (kappa + ell));
        if eta >= eta_cap {
            return GammaRange::infeasible();
        }
        let alpha_floor = ((3.0 * eta - 2.0) * theta * ell
            + 2.0 * (2.0 * (eta - 2.0) * theta * kappa * (kappa + ell)).sqrt())
            / (eta * theta + 2.0 - 2.0 * theta);
        if !(alpha > alpha_floor) {
            return GammaRange::infeasible();
        }
        let a = constants.quadratic_coeff();
        let b = constants.linear_coeff();
        let c = eta - 2.0;
        let delta = discriminant(constants);
        let (lower, upper) = phi_roots(a, b, c, delta);
        return GammaRange {
            lower,
            upper,
            case: Some(CaseLabel::B),
            feasible: true,
        };
    }

    // Case (c): kappa = 0 (and then alpha = 0), eta in (0, 2).
    if eta >= 2.0 {
        return GammaRange::infeasible();
    }
    let upper = if ell == 0.0 {
        f64::INFINITY
    } else if eta <= 1.0 {
        1.0 / (theta * ell)
    } else {
        (2.0 - eta) / ((3.0 * eta - 2.0) * theta * ell)
    };
    GammaRange {
        lower: 0.0,
        upper,
        case: Some(CaseLabel::C),
        feasible: true,
    }
}

/// Checks that `gamma` lies strictly inside the admissible interval.
pub fn validate_config(constants: &ProblemConstants, gamma: f64) -> Result<CaseLabel, ConfigViolation> {
    if !(gamma > 0.0) {
        return Err(ConfigViolation::GammaNotPositive(gamma));
    }
    let range = gamma_range(constants);
    let Some(case) = range.case else {
        return Err(ConfigViolation::Infeasible(describe_infeasibility(constants)));
    };
    if !(gamma < range.upper) {
        return Err(ConfigViolation::GammaTooLarge {
            gamma,
            upper: range.upper,
        });
    }
    if !(gamma > range.lower) {
        return Err(ConfigViolation::GammaTooSmall {
            gamma,
            lower: range.lower,
        });
    }
    Ok(case)
}

fn describe_infeasibility(constants: &ProblemConstants) -> String {
    let ProblemConstants {
        alpha,
        kappa,
        ell,
        theta,
        eta,
    } = *constants;
    if kappa > 0.0 {
        if eta < 2.0 {
            // only reachable with ell > 0 and eta < 1
            return format!("ell = {ell} > 0 requires eta >= 1, got eta = {eta}");
        }
        let eta_cap = 2.0 + 2.0 * kappa / (theta * (kappa + ell));
        if eta >= eta_cap {
            return format!("eta = {eta} is not below 2 + 2 kappa / (theta (kappa + ell)) = {eta_cap}");
        }
        let alpha_floor = ((3.0 * eta - 2.0) * theta * ell
            + 2.0 * (2.0 * (eta - 2.0) * theta * kappa * (kappa + ell)).sqrt())
            / (eta * theta + 2.0 - 2.0 * theta);
        format!("eta >= 2 requires alpha > {alpha_floor}, got alpha = {alpha}")
    } else {
        format!("kappa = 0 requires eta < 2, got eta = {eta}")
    }
}
