//! Poisson channels with a peak intensity B, a dark current A and duration T.
//!
//! The five input sets are the mean-cost, at-most, at-least, unconstrained
//! and profile families. Their Rényi capacities have closed forms in terms of
//! F_α(a,b,x) and the optimal cost x_α(a,b); the zero dark current case uses
//! the conventions 0^α = 0 and 0·ln 0 = 0.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundReport, CodeParams, Direction};
use crate::capacity::{ZeroPlusBracket, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::exponents::{
    average_sp_exponent_for, sphere_packing_exponent, AveragedModel, CapacityModel, CurvePoint,
    ExponentCurve, OrderGrid,
};
use crate::measures::Order;

/// Input set of a Poisson channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoissonVariant {
    /// Average intensity equal to x.
    Mean,
    /// Average intensity at most x.
    AtMost,
    /// Average intensity at least x.
    AtLeast,
    /// Any intensity in [A, B].
    Free,
    /// Intensity bounded by a piecewise-constant ceiling g(t).
    Profile,
}

/// A Poisson channel. `profile` lists `(t_end, level)` pairs in increasing
/// `t_end`, the last of which equals `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonChannelSpec {
    #[serde(rename = "T")]
    pub duration: f64,
    #[serde(rename = "A")]
    pub floor: f64,
    #[serde(rename = "B")]
    pub ceiling: f64,
    pub variant: PoissonVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<(f64, f64)>>,
}

impl PoissonChannelSpec {
    pub fn free(duration: f64, floor: f64, ceiling: f64) -> Result<Self> {
        let s = PoissonChannelSpec {
            duration,
            floor,
            ceiling,
            variant: PoissonVariant::Free,
            x: None,
            profile: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_cost(
        duration: f64,
        floor: f64,
        ceiling: f64,
        variant: PoissonVariant,
        x: f64,
    ) -> Result<Self> {
        let s = PoissonChannelSpec {
            duration,
            floor,
            ceiling,
            variant,
            x: Some(x),
            profile: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_profile(
        duration: f64,
        floor: f64,
        ceiling: f64,
        profile: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let s = PoissonChannelSpec {
            duration,
            floor,
            ceiling,
            variant: PoissonVariant::Profile,
            x: None,
            profile: Some(profile),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let (t, a, b) = (self.duration, self.floor, self.ceiling);
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::OutOfRange {
                name: "T",
                value: t,
            });
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::OutOfRange {
                name: "A",
                value: a,
            });
        }
        if !(b > a && b.is_finite()) {
            return Err(Error::Precondition(format!(
                "need A < B < inf, got A = {a}, B = {b}"
            )));
        }
        match self.variant {
            PoissonVariant::Mean | PoissonVariant::AtMost | PoissonVariant::AtLeast => {
                let x = self
                    .x
                    .ok_or_else(|| Error::Precondition("cost variant needs x".into()))?;
                if !(a <= x && x <= b) {
                    return Err(Error::Precondition(format!(
                        "cost x = {x} outside [{a}, {b}]"
                    )));
                }
            }
            PoissonVariant::Free => {}
            PoissonVariant::Profile => {
                let p = self
                    .profile
                    .as_ref()
                    .ok_or_else(|| Error::Precondition("profile variant needs a profile".into()))?;
                if p.is_empty() {
                    return Err(Error::Precondition("empty profile".into()));
                }
                let mut prev = 0.0;
                for &(end, level) in p {
                    if !(end > prev) {
                        return Err(Error::Precondition(format!(
                            "profile breakpoints must increase, got {end} after {prev}"
                        )));
                    }
                    if !(a <= level && level <= b) {
                        return Err(Error::Precondition(format!(
                            "profile level {level} outside [{a}, {b}]"
                        )));
                    }
                    prev = end;
                }
                if (prev - t).abs() > 1e-12 * t {
                    return Err(Error::Precondition(format!(
                        "profile ends at {prev}, not at T = {t}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_triple(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b > a && b.is_finite()) {
        return Err(Error::Precondition(format!(
            "need 0 <= a < b < inf, got a = {a}, b = {b}"
        )));
    }
    Ok(())
}

/// F_α(a, b, x).
pub fn poisson_f(order: Order, a: f64, b: f64, x: f64) -> Result<f64> {
    check_triple(a, b)?;
    if !(a <= x && x <= b) {
        return Err(Error::Precondition(format!(
            "need a <= x <= b, got x = {x} on [{a}, {b}]"
        )));
    }
    Ok(f_raw(order.value(), a, b, x))
}

fn f_raw(alpha: f64, a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let hi = (x - a) / (b - a);
    let lo = (b - x) / (b - a);
    if alpha == 1.0 {
        let upper = if hi > 0.0 { hi * b * (b / x).ln() } else { 0.0 };
        let lower = if lo > 0.0 && a > 0.0 {
            lo * a * (a / x).ln()
        } else {
            0.0
        };
        return upper + lower;
    }
    // ln of (hi·b^α + lo·a^α)^{1/α} / x, kept in log space so that the
    // bracket does not cancel near α = 1.
    let mut terms = Vec::with_capacity(2);
    if hi > 0.0 {
        terms.push(hi.ln() + alpha * b.ln());
    }
    if lo > 0.0 && a > 0.0 {
        terms.push(lo.ln() + alpha * a.ln());
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
    let log_ratio = lse / alpha - x.ln();
    alpha / (alpha - 1.0) * x * log_ratio.exp_m1()
}

/// The cost x_α(a, b) maximizing F_α(a, b, ·).
pub fn poisson_optimal_cost(order: Order, a: f64, b: f64) -> Result<f64> {
    check_triple(a, b)?;
    Ok(optimal_cost_raw(order.value(), a, b))
}

fn optimal_cost_raw(alpha: f64, a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return if alpha == 1.0 {
            b / E
        } else {
            (alpha * alpha.ln() / (1.0 - alpha)).exp() * b
        };
    }
    if alpha == 1.0 {
        let r = b / (b - a);
        let s = a / (b - a);
        return (-1.0 + r * b.ln() - s * a.ln()).exp();
    }
    let (ba, aa) = (b.powf(alpha), a.powf(alpha));
    let head = ((alpha * alpha.ln() + ((b - a) / (ba - aa)).ln()) / (1.0 - alpha)).exp();
    head + (a * ba - b * aa) / (ba - aa)
}

/// Rényi capacity of order α of a Poisson channel.
pub fn poisson_capacity(order: Order, spec: &PoissonChannelSpec) -> Result<f64> {
    spec.validate()?;
    let alpha = order.value();
    let (t, a, b) = (spec.duration, spec.floor, spec.ceiling);
    let xa = || optimal_cost_raw(alpha, a, b);
    let cost = |x: f64| f_raw(alpha, a, b, x) * t;
    Ok(match spec.variant {
        PoissonVariant::Mean => cost(spec.x.expect("validated")),
        PoissonVariant::AtMost => cost(spec.x.expect("validated").min(xa())),
        PoissonVariant::AtLeast => cost(spec.x.expect("validated").max(xa())),
        PoissonVariant::Free => cost(xa()),
        PoissonVariant::Profile => {
            let mut start = 0.0;
            let mut total = 0.0;
            for &(end, g) in spec.profile.as_ref().expect("validated") {
                if g > a {
                    total += (end - start) * f_raw(alpha, a, g, optimal_cost_raw(alpha, a, g));
                }
                start = end;
            }
            total
        }
    })
}

/// Closed-form capacities of a Poisson channel as a [`CapacityModel`].
/// C_{0+} of every Poisson channel is zero.
#[derive(Debug, Clone)]
pub struct PoissonModel {
    pub spec: PoissonChannelSpec,
}

impl PoissonModel {
    pub fn new(spec: PoissonChannelSpec) -> Result<Self> {
        spec.validate()?;
        Ok(PoissonModel { spec })
    }
}

impl CapacityModel for PoissonModel {
    fn capacity(&self, order: f64) -> Result<CurvePoint> {
        Ok(CurvePoint {
            order,
            capacity: poisson_capacity(Order::new(order)?, &self.spec)?,
            gap: 0.0,
        })
    }

    fn zero_plus(&self) -> Result<ZeroPlusBracket> {
        Ok(ZeroPlusBracket {
            lower: 0.0,
            upper: 0.0,
            estimate: 0.0,
        })
    }
}

/// Capacity curve of a Poisson channel on the default order grid.
pub fn poisson_curve(spec: &PoissonChannelSpec) -> Result<ExponentCurve> {
    ExponentCurve::for_model(
        Arc::new(PoissonModel::new(spec.clone())?),
        &OrderGrid::default(),
    )
}

fn spread(spec: &PoissonChannelSpec) -> f64 {
    (spec.ceiling - spec.floor) * spec.duration
}

/// The sphere-packing bound for Poisson channels with its rate hypothesis
/// C_1 ≥ ln(M/L) ≥ C_φ + 1.75/(φ(1−φ)) + 12.2 ln[(B−A)T]/(1−φ).
pub fn poisson_spb(
    params: &CodeParams,
    spec: &PoissonChannelSpec,
    phi: Order,
) -> Result<BoundReport> {
    spec.validate()?;
    let d = spread(spec);
    let p = phi.value();
    if d < 21.0 {
        return Err(Error::Precondition(format!(
            "need T >= 21/(B-A), got (B-A)T = {d}"
        )));
    }
    if !(p >= 1.0 / d && p < 1.0) {
        return Err(Error::Precondition(format!(
            "phi = {p} outside [1/((B-A)T), 1)"
        )));
    }
    let rate = params.rate();
    let curve = poisson_curve(spec)?;
    let c_phi = curve.capacity_at(p)?;
    let c_one = curve.capacity_at(1.0)?;
    let threshold = c_phi + 1.75 / (p * (1.0 - p)) + 12.2 * d.ln() / (1.0 - p);
    let esp = sphere_packing_exponent(rate, &curve, DEFAULT_TOL)?
        .value
        .to_f64();
    let prefactor = -(16f64.ln() + 2.0 + 1.05 / p + 26.0 * d.ln()) / p;
    let satisfied = c_one >= rate && rate >= threshold;
    let mut constants = BTreeMap::new();
    constants.insert("phi".into(), p);
    constants.insert("rate".into(), rate);
    constants.insert("c_phi".into(), c_phi);
    constants.insert("c_one".into(), c_one);
    constants.insert("rate_threshold".into(), threshold);
    constants.insert("spread".into(), d);
    constants.insert("ln_prefactor".into(), prefactor);
    constants.insert("e_sp".into(), esp);
    let mut r = BoundReport::new(
        "poisson_spb",
        Direction::Outer,
        prefactor - esp,
        satisfied,
        constants,
    );
    if !satisfied {
        r.notes.push(format!(
            "rate hypothesis needs C_1 = {c_one} >= ln(M/L) = {rate} >= {threshold}"
        ));
    }
    Ok(r)
}

/// The parametric Poisson bound with free (n, ε, κ) and
/// γ = 3(3n)^{1/κ}((B−A)T/n ∨ κ).
pub fn poisson_spb_parametric(
    params: &CodeParams,
    spec: &PoissonChannelSpec,
    phi: Order,
    eps: f64,
    kappa: f64,
) -> Result<BoundReport> {
    spec.validate()?;
    let n = params.n() as f64;
    let p = phi.value();
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Precondition(format!("phi = {p} outside (0,1)")));
    }
    if !(eps > 0.0 && eps < n / (n + 1.0)) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
        });
    }
    if !(kappa >= 3.0) {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: kappa,
        });
    }
    let gamma = poisson_gamma(spread(spec), params.n(), kappa);
    let model: Arc<dyn CapacityModel> = Arc::new(PoissonModel::new(spec.clone())?);
    let averaged = AveragedModel {
        inner: model.clone(),
        width: eps,
        tol: DEFAULT_TOL,
    };
    let avg_cap = averaged.capacity(p)?.capacity;
    let rate = params.rate();
    let threshold = (16.0 * n.sqrt()).ln() + avg_cap + gamma / (1.0 - p);
    let sixteen = (16.0 * E * E * n.powf(1.5)).ln();
    let esp = average_sp_exponent_for(eps, rate, model.clone(), DEFAULT_TOL)?;
    let primary = (eps.ln() - 2.0 * gamma - sixteen) / p - esp;
    let shifted = rate - 2.0 * gamma - sixteen + eps.ln();
    let esp_alt = if shifted < 0.0 {
        f64::INFINITY
    } else {
        average_sp_exponent_for(eps, shifted, model, DEFAULT_TOL)?
    };
    let alt = eps.ln() - 2.0 * gamma - (16.0 * n.powf(1.5)).ln() - esp_alt;
    let satisfied = rate > threshold;
    let mut constants = BTreeMap::new();
    constants.insert("gamma".into(), gamma);
    constants.insert("eps".into(), eps);
    constants.insert("kappa".into(), kappa);
    constants.insert("n".into(), n);
    constants.insert("phi".into(), p);
    constants.insert("avg_capacity_phi".into(), avg_cap);
    constants.insert("rate_threshold".into(), threshold);
    constants.insert("avg_e_sp".into(), esp);
    constants.insert("ln_primary".into(), primary);
    constants.insert("alt_rate".into(), shifted);
    constants.insert("ln_alt".into(), alt);
    let mut r = BoundReport::new(
        "poisson_spb_parametric",
        Direction::Outer,
        primary.max(alt),
        satisfied,
        constants,
    );
    if !satisfied {
        r.notes
            .push(format!("needs ln(M/L) = {rate} > {threshold}"));
    }
    Ok(r)
}

/// γ = 3(3n)^{1/κ}(spread/n ∨ κ).
pub fn poisson_gamma(spread: f64, n: u64, kappa: f64) -> f64 {
    let n = n as f64;
    3.0 * (3.0 * n).powf(1.0 / kappa) * (spread / n).max(kappa)
}
