//! Finite measures and the order-α Rényi divergence family.
//!
//! Divergences are measured in nats and returned as [`ExtReal`], so that an
//! absolute-continuity failure is the explicit `Infinite` variant rather than
//! a large float.
//!
//! For α ≠ 1 the divergence is
//!
//! ```text
//! D_α(w‖q) = (1/(α−1)) ln Σ_i w_i^α q_i^{1−α}
//! ```
//!
//! evaluated as a shifted log-sum-exp over the exponents α ln w_i + (1−α) ln q_i.
//! At α = 1 it is Σ_i w_i ln(w_i/q_i) with 0·ln 0 = 0. The branch at 1 is
//! selected by exact comparison of the stored order.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability measure before renormalization.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A real number extended by `+∞`. Serializes as a number, or the string
/// `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExtRealJson", into = "ExtRealJson")]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExtRealJson {
    Finite(f64),
    Tag(String),
}

impl TryFrom<ExtRealJson> for ExtReal {
    type Error = String;
    fn try_from(j: ExtRealJson) -> std::result::Result<Self, String> {
        match j {
            ExtRealJson::Finite(v) => Ok(ExtReal::Finite(v)),
            ExtRealJson::Tag(s) if s == "inf" => Ok(ExtReal::Infinite),
            ExtRealJson::Tag(s) => Err(format!("expected a number or \"inf\", got {s:?}")),
        }
    }
}

impl From<ExtReal> for ExtRealJson {
    fn from(v: ExtReal) -> Self {
        match v {
            ExtReal::Finite(x) => ExtRealJson::Finite(x),
            ExtReal::Infinite => ExtRealJson::Tag("inf".into()),
        }
    }
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    /// Lossy conversion for arithmetic that tolerates IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Infinite, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{}", crate::fmt_sig(*v)),
            ExtReal::Infinite => write!(f, "inf"),
        }
    }
}

/// Position of an order relative to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderClass {
    SubOne,
    One,
    SuperOne,
}

/// A positive Rényi order.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Order(f64);

impl Order {
    pub const ONE: Order = Order(1.0);
    pub const HALF: Order = Order(0.5);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Order(value))
        } else {
            Err(Error::InvalidOrder(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn class(self) -> OrderClass {
        if self.0 == 1.0 {
            OrderClass::One
        } else if self.0 < 1.0 {
            OrderClass::SubOne
        } else {
            OrderClass::SuperOne
        }
    }

    /// Requires the order to lie in the open interval (0,1).
    pub fn sub_one(value: f64) -> Result<Self> {
        let o = Order::new(value)?;
        if o.0 < 1.0 {
            Ok(o)
        } else {
            Err(Error::Precondition(format!(
                "order {value} must lie in (0,1)"
            )))
        }
    }
}

impl TryFrom<f64> for Order {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Order::new(v)
    }
}

impl From<Order> for f64 {
    fn from(o: Order) -> f64 {
        o.0
    }
}

/// A non-zero finite measure on `{0, …, size−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FiniteMeasure {
    weights: Vec<f64>,
}

impl FiniteMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::ZeroMeasure);
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeight(w));
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::ZeroMeasure);
        }
        Ok(FiniteMeasure { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn scaled(&self, gamma: f64) -> Result<Self> {
        FiniteMeasure::new(self.weights.iter().map(|w| w * gamma).collect())
    }
}

impl TryFrom<Vec<f64>> for FiniteMeasure {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        FiniteMeasure::new(v)
    }
}

impl From<FiniteMeasure> for Vec<f64> {
    fn from(m: FiniteMeasure) -> Vec<f64> {
        m.weights
    }
}

/// A finite measure of total mass one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityMeasure {
    inner: FiniteMeasure,
}

impl ProbabilityMeasure {
    /// Builds a probability measure, renormalizing masses that sum to one
    /// within [`NORMALIZATION_TOL`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let inner = FiniteMeasure::new(weights)?;
        let total = inner.total();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self::normalize(inner))
    }

    /// Normalizes an arbitrary non-zero finite measure.
    pub fn normalize(m: FiniteMeasure) -> Self {
        let total = m.total();
        let weights = m.weights.into_iter().map(|w| w / total).collect();
        ProbabilityMeasure {
            inner: FiniteMeasure { weights },
        }
    }

    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        Ok(Self::normalize(FiniteMeasure::new(weights)?))
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Self::from_unnormalized(vec![1.0; size])
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        let mut w = vec![0.0; size];
        *w.get_mut(at).ok_or(Error::ZeroMeasure)? = 1.0;
        Self::new(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.inner.weights
    }

    pub fn size(&self) -> usize {
        self.inner.size()
    }

    pub fn as_finite(&self) -> &FiniteMeasure {
        &self.inner
    }

    pub fn into_finite(self) -> FiniteMeasure {
        self.inner
    }
}

impl TryFrom<Vec<f64>> for ProbabilityMeasure {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbabilityMeasure::new(v)
    }
}

impl From<ProbabilityMeasure> for Vec<f64> {
    fn from(m: ProbabilityMeasure) -> Vec<f64> {
        m.inner.weights
    }
}

impl AsRef<FiniteMeasure> for ProbabilityMeasure {
    fn as_ref(&self) -> &FiniteMeasure {
        &self.inner
    }
}

impl AsRef<FiniteMeasure> for FiniteMeasure {
    fn as_ref(&self) -> &FiniteMeasure {
        self
    }
}

fn check_same_size(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left: a, right: b })
    }
}

/// Order-α Rényi divergence D_α(w‖q) in nats.
pub fn renyi_divergence(
    order: Order,
    w: &impl AsRef<FiniteMeasure>,
    q: &impl AsRef<FiniteMeasure>,
) -> Result<ExtReal> {
    let (w, q) = (w.as_ref().weights(), q.as_ref().weights());
    check_same_size(w.len(), q.len())?;
    Ok(divergence_slices(order.value(), w, q))
}

/// Divergence on raw weight slices of equal length with nonnegative entries.
///
/// This is the unchecked kernel behind [`renyi_divergence`], exposed for
/// inner loops that already hold validated rows.
pub fn divergence_slices(alpha: f64, w: &[f64], q: &[f64]) -> ExtReal {
    debug_assert_eq!(w.len(), q.len());
    if alpha == 1.0 {
        let mut acc = 0.0;
        for (&wi, &qi) in w.iter().zip(q) {
            if wi > 0.0 {
                if qi <= 0.0 {
                    return ExtReal::Infinite;
                }
                acc += wi * (wi / qi).ln();
            }
        }
        return ExtReal::Finite(acc);
    }
    if alpha > 1.0 && w.iter().zip(q).any(|(&wi, &qi)| wi > 0.0 && qi <= 0.0) {
        return ExtReal::Infinite;
    }
    match log_power_sum(alpha, w, q) {
        Some(lse) => ExtReal::Finite(lse / (alpha - 1.0)),
        None => ExtReal::Infinite,
    }
}

/// ln Σ_i w_i^α q_i^{1−α} over outcomes where both masses are positive;
/// `None` when that set is empty.
pub(crate) fn log_power_sum(alpha: f64, w: &[f64], q: &[f64]) -> Option<f64> {
    let mut shift = f64::NEG_INFINITY;
    for (&wi, &qi) in w.iter().zip(q) {
        if wi > 0.0 && qi > 0.0 {
            shift = shift.max(alpha * wi.ln() + (1.0 - alpha) * qi.ln());
        }
    }
    if shift == f64::NEG_INFINITY {
        return None;
    }
    let mut acc = 0.0;
    for (&wi, &qi) in w.iter().zip(q) {
        if wi > 0.0 && qi > 0.0 {
            acc += (alpha * wi.ln() + (1.0 - alpha) * qi.ln() - shift).exp();
        }
    }
    Some(shift + acc.ln())
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value: v })
    }
}

/// Binary divergence d_α(a‖b) between Bernoulli(a) and Bernoulli(b).
pub fn binary_divergence(order: Order, a: f64, b: f64) -> Result<ExtReal> {
    check_unit("a", a)?;
    check_unit("b", b)?;
    Ok(binary_divergence_raw(order.value(), a, b))
}

pub(crate) fn binary_divergence_raw(alpha: f64, a: f64, b: f64) -> ExtReal {
    divergence_slices(alpha, &[a, 1.0 - a], &[b, 1.0 - b])
}

/// Order-α tilted probability measure between `w` and `q`, α ∈ (0,1).
///
/// The result is proportional to w_i^α q_i^{1−α}.
pub fn tilted_measure(
    order: Order,
    w: &ProbabilityMeasure,
    q: &ProbabilityMeasure,
) -> Result<ProbabilityMeasure> {
    if order.class() != OrderClass::SubOne {
        return Err(Error::Precondition(format!(
            "tilting order {} must lie in (0,1)",
            order.value()
        )));
    }
    check_same_size(w.size(), q.size())?;
    let t =
        tilt_slices(order.value(), w.weights(), q.weights()).ok_or(Error::InfiniteDivergence)?;
    Ok(ProbabilityMeasure {
        inner: FiniteMeasure { weights: t },
    })
}

/// Normalized w^α q^{1−α}; `None` when the supports are disjoint.
pub(crate) fn tilt_slices(alpha: f64, w: &[f64], q: &[f64]) -> Option<Vec<f64>> {
    let lse = log_power_sum(alpha, w, q)?;
    Some(
        w.iter()
            .zip(q)
            .map(|(&wi, &qi)| {
                if wi > 0.0 && qi > 0.0 {
                    (alpha * wi.ln() + (1.0 - alpha) * qi.ln() - lse).exp()
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

/// Total variation Σ_i |w_i − q_i| (no factor 1/2).
pub fn total_variation(
    w: &impl AsRef<FiniteMeasure>,
    q: &impl AsRef<FiniteMeasure>,
) -> Result<f64> {
    let (w, q) = (w.as_ref().weights(), q.as_ref().weights());
    check_same_size(w.len(), q.len())?;
    Ok(tv_slices(w, q))
}

pub(crate) fn tv_slices(w: &[f64], q: &[f64]) -> f64 {
    w.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}
