//! Logistic loss and the closed forms of the second-order objective.

use serde::{Deserialize, Serialize};

use super::GbdtError;
use crate::data::Health;
use crate::scalar::Scalar;

/// Probability floor/ceiling used when reporting log-loss.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

/// First and second derivative of the loss with respect to the margin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GradPair<T> {
    pub g: T,
    pub h: T,
}

impl<T: Scalar> GradPair<T> {
    pub fn new(g: T, h: T) -> Self {
        Self { g, h }
    }
}

impl<T: Scalar> std::ops::Add for GradPair<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::new(self.g + rhs.g, self.h + rhs.h)
    }
}

impl<T: Scalar> std::ops::Sub for GradPair<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self::new(self.g - rhs.g, self.h - rhs.h)
    }
}

impl<T: Scalar> std::iter::Sum for GradPair<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::new(T::zero(), T::zero()), |a, b| a + b)
    }
}

/// Unclamped logistic function, evaluated on the branch that avoids overflow.
#[inline]
fn logistic<T: Scalar>(m: T) -> T {
    if m >= T::zero() {
        T::one() / (T::one() + (-m).exp())
    } else {
        let e = m.exp();
        e / (T::one() + e)
    }
}

/// Logistic link `1 / (1 + e^-m)`.
///
/// The result is kept inside the open unit interval: tiny values are floored
/// at the smallest positive normal number and values that would round to one
/// are capped at the largest representable number below one.
#[inline]
pub fn sigmoid<T: Scalar>(m: T) -> T {
    let below_one = T::one() - T::epsilon() * T::half();
    logistic(m).max(T::min_positive_value()).min(below_one)
}

#[inline]
pub fn logit<T: Scalar>(p: T) -> T {
    (p / (T::one() - p)).ln()
}

/// Gradient and hessian of binary log-loss at `margin`.
///
/// `g = p - y`, `h = p(1 - p)`. Both tails are evaluated without cancellation
/// (`1 - p` is computed as `sigmoid(-m)`).
#[inline]
pub fn grad_hess<T: Scalar>(margin: T, label: Health) -> GradPair<T> {
    let p = logistic(margin);
    let q = logistic(-margin);
    let g = match label {
        Health::Healthy => -q,
        Health::Abnormal => p,
    };
    GradPair::new(g, p * q)
}

/// Optimal leaf weight `-G / (H + lambda)`.
pub fn leaf_weight<T: Scalar>(sum_g: T, sum_h: T, lambda: T) -> Result<T, GbdtError> {
    let denom = sum_h + lambda;
    if !(denom > T::zero()) {
        return Err(GbdtError::DegenerateLeaf);
    }
    Ok(-sum_g / denom)
}

/// Objective reduction of splitting a node into (L, R), net of the `gamma`
/// charged for the extra leaf. Requires `HL + lambda > 0` and `HR + lambda > 0`.
#[inline]
pub fn split_gain<T: Scalar>(gl: T, hl: T, gr: T, hr: T, lambda: T, gamma: T) -> T {
    let score = |g: T, h: T| g * g / (h + lambda);
    T::half() * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr)) - gamma
}

/// Binary log-loss of one prediction, equal to clamping the probability to
/// `[1e-12, 1 - 1e-12]` (or one ulp inside the unit interval for `f32`).
///
/// Evaluated as `softplus(-m)` or `softplus(m)` so that confident
/// predictions keep full relative precision.
pub fn log_loss<T: Scalar>(margin: T, label: Health) -> T {
    let lo = T::lit(PROBABILITY_CLAMP).max(T::epsilon());
    let softplus = |x: T| x.max(T::zero()) + (-x.abs()).exp().ln_1p();
    let raw = match label {
        Health::Healthy => softplus(-margin),
        Health::Abnormal => softplus(margin),
    };
    raw.max(-(-lo).ln_1p()).min(-lo.ln())
}

/// Mean clamped log-loss over aligned margins and labels.
pub fn mean_log_loss<T: Scalar>(margins: &[T], labels: &[Health]) -> T {
    let total: T = margins
        .iter()
        .zip(labels)
        .map(|(&m, &y)| log_loss(m, y))
        .sum();
    total / T::from_count(margins.len().max(1))
}
