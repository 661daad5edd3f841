//! Finite-blocklength bounds on the error probability of list codes.
//!
//! Inner bounds bound the best error probability from above (Gallager);
//! outer bounds bound every code's error probability from below (Arimoto,
//! Augustin, the product and feedback sphere-packing bounds). Every bound
//! is reported through a [`BoundReport`] carrying its hypotheses and named
//! constants; bounds whose hypotheses fail are still evaluated and flagged.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{
    average_capacity, average_center, solve_capacity, DEFAULT_NODES, DEFAULT_TOL,
};
use crate::channels::{renyi_information, DiscreteChannel, InputDistribution};
use crate::error::{Error, Result};
use crate::exponents::{
    order_for_rate, sphere_packing_exponent, sub_one_exponent, AveragedModel, CapacityModel,
    ChannelModel, ExponentCurve, OrderGrid, SumModel, SUB_ONE_NODES,
};
use crate::measures::{
    binary_divergence_raw, divergence_slices, tilt_slices, tv_slices, Order, ProbabilityMeasure,
};
use crate::roots::{bisect, BRACKET_WIDTH, MAX_BISECTIONS};

/// Berry–Esséen constant, used for diagnostics only.
pub const BERRY_ESSEEN_CONSTANT: f64 = 0.5600;

/// Message count M, list size L and blocklength n.
///
/// M and L are kept as logarithms so that rates far beyond the integer
/// range can be expressed; the exact integers are kept when known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodeParamsJson", into = "CodeParamsJson")]
pub struct CodeParams {
    ln_m: f64,
    ln_l: f64,
    n: u64,
    sizes: Option<(u64, u64)>,
}

#[derive(Serialize, Deserialize)]
struct CodeParamsJson {
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    m: Option<u64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    l: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ln_ratio: Option<f64>,
    n: u64,
}

impl TryFrom<CodeParamsJson> for CodeParams {
    type Error = Error;
    fn try_from(j: CodeParamsJson) -> Result<Self> {
        match (j.m, j.l, j.ln_ratio) {
            (Some(m), l, None) => CodeParams::new(m, l.unwrap_or(1), j.n),
            (None, None, Some(r)) => CodeParams::from_log_ratio(r, j.n),
            _ => Err(Error::Precondition(
                "give either M (and L) or ln_ratio".into(),
            )),
        }
    }
}

impl From<CodeParams> for CodeParamsJson {
    fn from(p: CodeParams) -> Self {
        match p.sizes {
            Some((m, l)) => CodeParamsJson {
                m: Some(m),
                l: Some(l),
                ln_ratio: None,
                n: p.n,
            },
            None => CodeParamsJson {
                m: None,
                l: None,
                ln_ratio: Some(p.rate()),
                n: p.n,
            },
        }
    }
}

impl CodeParams {
    pub fn new(m: u64, l: u64, n: u64) -> Result<Self> {
        if !(l >= 1 && l < m) {
            return Err(Error::Precondition(format!(
                "need 1 <= L < M, got M = {m}, L = {l}"
            )));
        }
        if n == 0 {
            return Err(Error::Precondition("blocklength must be positive".into()));
        }
        Ok(CodeParams {
            ln_m: (m as f64).ln(),
            ln_l: (l as f64).ln(),
            n,
            sizes: Some((m, l)),
        })
    }

    /// Codes with L = 1 and ln M = `ln_ratio`, for message counts beyond
    /// the integer range.
    pub fn from_log_ratio(ln_ratio: f64, n: u64) -> Result<Self> {
        if !(ln_ratio > 0.0 && ln_ratio.is_finite()) {
            return Err(Error::OutOfRange {
                name: "ln(M/L)",
                value: ln_ratio,
            });
        }
        if n == 0 {
            return Err(Error::Precondition("blocklength must be positive".into()));
        }
        Ok(CodeParams {
            ln_m: ln_ratio,
            ln_l: 0.0,
            n,
            sizes: None,
        })
    }

    pub fn m(&self) -> Option<u64> {
        self.sizes.map(|s| s.0)
    }

    pub fn l(&self) -> Option<u64> {
        self.sizes.map(|s| s.1)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn ln_m(&self) -> f64 {
        self.ln_m
    }

    pub fn ln_l(&self) -> f64 {
        self.ln_l
    }

    /// ln(M/L) in nats.
    pub fn rate(&self) -> f64 {
        self.ln_m - self.ln_l
    }

    pub fn list_size(&self) -> f64 {
        self.ln_l.exp()
    }
}

/// Whether a bound caps the best error probability from above or every
/// code's error probability from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Inner,
    Outer,
}

/// A bound on the error probability with its hypotheses and constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lemma: String,
    pub direction: Direction,
    /// The probability bound, clipped to [0, 1].
    pub value: f64,
    /// ln of the unclipped bound.
    pub ln_value: f64,
    pub hypothesis_satisfied: bool,
    pub constants: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lists: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(
        lemma: &str,
        direction: Direction,
        ln_value: f64,
        hypothesis_satisfied: bool,
        constants: BTreeMap<String, f64>,
    ) -> Self {
        BoundReport {
            lemma: lemma.into(),
            direction,
            value: ln_value.exp().clamp(0.0, 1.0),
            ln_value,
            hypothesis_satisfied,
            constants,
            lists: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// An outer bound that holds, or an inner bound that is meaningful.
    pub fn is_binding(&self) -> bool {
        self.hypothesis_satisfied
    }
}

fn check_unit_order(order: f64, name: &'static str) -> Result<()> {
    if !(order > 0.0 && order < 1.0) {
        return Err(Error::OutOfRange { name, value: order });
    }
    Ok(())
}

/// ln C(n, k), exact for n < 64 and through ln Γ otherwise.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if n < 64 {
        let mut c: u128 = 1;
        for i in 0..k as u128 {
            c = c * (n as u128 - i) / (i + 1);
        }
        return (c as f64).ln();
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

fn ln_binomial_term(params: &CodeParams) -> f64 {
    match params.sizes {
        Some((m, l)) => ln_binomial(m - 1, l),
        None => params.ln_m + (-(-params.ln_m).exp()).ln_1p(),
    }
}

fn ln_m_minus_one(params: &CodeParams) -> f64 {
    match params.sizes {
        Some((m, _)) => ((m - 1) as f64).ln(),
        None => params.ln_m + (-(-params.ln_m).exp()).ln_1p(),
    }
}

/// Gallager's random-coding bound
/// ln P_e ≤ ((α−1)/α)[I_α(P;W) − (1/L) ln C(M−1,L)] for α ∈ [1/(1+L), 1),
/// with its Stirling relaxation and the sphere-packing form
/// P_e ≤ e^{−E_sp(ln(eM/L))} when ln(eM/L) ∈ [C_{1/(1+L)}, C_1).
pub fn gallager_inner(
    params: &CodeParams,
    order: Order,
    p: &InputDistribution,
    w: &DiscreteChannel,
) -> Result<BoundReport> {
    let a = order.value();
    let l = params.list_size();
    if !(a >= 1.0 / (1.0 + l) && a < 1.0) {
        return Err(Error::Precondition(format!(
            "order {a} outside [1/(1+L), 1) for L = {l}"
        )));
    }
    let info = renyi_information(order, p, w)?;
    let binom = ln_binomial_term(params) / l;
    let stirling = ln_m_minus_one(params) - params.ln_l + 1.0;
    let factor = (a - 1.0) / a;
    let ln_value = factor * (info - binom);
    let mut constants = BTreeMap::new();
    constants.insert("order".into(), a);
    constants.insert("information".into(), info);
    constants.insert("binomial_term".into(), binom);
    constants.insert("stirling_term".into(), stirling);
    constants.insert("ln_stirling".into(), factor * (info - stirling));
    let sp_rate = 1.0 + params.rate();
    let low = solve_capacity(Order::new(1.0 / (1.0 + l))?, w, DEFAULT_TOL)?.value;
    let c1 = solve_capacity(Order::ONE, w, DEFAULT_TOL)?.value;
    let mut r = BoundReport::new(
        "gallager_inner",
        Direction::Inner,
        ln_value,
        true,
        constants,
    );
    if sp_rate >= low && sp_rate < c1 {
        let curve = ExponentCurve::for_channel(w, &OrderGrid::default(), DEFAULT_TOL)?;
        let esp = sphere_packing_exponent(sp_rate, &curve, DEFAULT_TOL)?
            .value
            .to_f64();
        r.constants.insert("ln_sphere_packing".into(), -esp);
    } else {
        r.notes.push(format!(
            "ln(eM/L) = {sp_rate} outside [{low}, {c1}); sphere-packing form not applicable"
        ));
    }
    Ok(r)
}

/// The largest p ∈ [0, b] with d_α(p‖b) ≥ `info`, so that every code obeying
/// d_α(P_e‖b) ≤ info has P_e ≥ the returned value.
fn invert_binary(alpha: f64, info: f64, b: f64) -> f64 {
    let d = |x: f64| binary_divergence_raw(alpha, x, b).to_f64();
    if d(0.0) <= info {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, b);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d(mid) > info {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Arimoto's bound from pairs (α, I_α) with I_α ≥ I_α(P;W) for the code's
/// input distribution, plus the Augustin form from pairs (α, C_α) with α > 1
/// and the sphere-packing form from E_sp(ln(M/L)) above capacity.
pub fn arimoto_from_values(
    params: &CodeParams,
    informations: &[(f64, f64)],
    capacities: &[(f64, f64)],
    c_one: f64,
    e_sp: Option<f64>,
) -> BoundReport {
    let rate = params.rate();
    let b = -(-rate).exp_m1();
    let mut constants = BTreeMap::new();
    let mut best = 0.0f64;
    for &(a, info) in informations {
        let v = invert_binary(a, info, b);
        constants.insert(format!("arimoto_{a}"), v);
        best = best.max(v);
    }
    if rate >= c_one {
        for &(a, c) in capacities.iter().filter(|(a, _)| *a > 1.0) {
            let v = (-(((a - 1.0) / a) * (c - rate)).exp_m1()).max(0.0);
            constants.insert(format!("augustin_{a}"), v);
            best = best.max(v);
        }
        if let Some(e) = e_sp {
            let v = -(-e).exp_m1();
            constants.insert("arimoto_sp".into(), v);
            best = best.max(v);
        }
    }
    constants.insert("rate".into(), rate);
    constants.insert("c_one".into(), c_one);
    BoundReport::new(
        "arimoto_outer",
        Direction::Outer,
        best.ln(),
        true,
        constants,
    )
}

/// Arimoto's outer bound d_α(P_e‖1−L/M) ≤ I_α(P;W) inverted per order, with
/// the Augustin and sphere-packing forms when ln(M/L) ≥ C_1(W).
pub fn arimoto_outer(
    params: &CodeParams,
    w: &DiscreteChannel,
    p: &InputDistribution,
    orders: &[f64],
) -> Result<BoundReport> {
    let infos = orders
        .iter()
        .map(|&a| Ok((a, renyi_information(Order::new(a)?, p, w)?)))
        .collect::<Result<Vec<_>>>()?;
    let c_one = solve_capacity(Order::ONE, w, DEFAULT_TOL)?.value;
    let mut caps = Vec::new();
    let mut esp = None;
    if params.rate() >= c_one {
        for &a in orders.iter().filter(|&&a| a > 1.0) {
            caps.push((a, solve_capacity(Order::new(a)?, w, DEFAULT_TOL)?.value));
        }
        let curve = ExponentCurve::for_channel(w, &OrderGrid::default(), DEFAULT_TOL)?;
        esp = Some(
            sphere_packing_exponent(params.rate(), &curve, DEFAULT_TOL)?
                .value
                .to_f64(),
        );
    }
    Ok(arimoto_from_values(params, &infos, &caps, c_one, esp))
}

/// Arimoto and Augustin bounds valid for every code on the n-fold product
/// of `w`, using I_α(P;W^n) ≤ nC_α(W) and E_sp(R,W^n) = nE_sp(R/n,W).
pub fn arimoto_outer_product(
    params: &CodeParams,
    w: &DiscreteChannel,
    orders: &[f64],
) -> Result<BoundReport> {
    let n = params.n() as f64;
    let caps = orders
        .iter()
        .map(|&a| Ok((a, n * solve_capacity(Order::new(a)?, w, DEFAULT_TOL)?.value)))
        .collect::<Result<Vec<_>>>()?;
    let c_one = n * solve_capacity(Order::ONE, w, DEFAULT_TOL)?.value;
    let esp = if params.rate() >= c_one {
        let curve = ExponentCurve::for_channel(w, &OrderGrid::default(), DEFAULT_TOL)?;
        Some(
            n * sphere_packing_exponent(params.rate() / n, &curve, DEFAULT_TOL)?
                .value
                .to_f64(),
        )
    } else {
        None
    };
    let mut r = arimoto_from_values(params, &caps, &caps, c_one, esp);
    r.constants.insert("n".into(), n);
    Ok(r)
}

/// Distinct channels of `parts` with their multiplicities, in first-seen
/// order.
fn distinct(parts: &[DiscreteChannel]) -> Vec<(DiscreteChannel, usize)> {
    let mut out: Vec<(DiscreteChannel, usize)> = Vec::new();
    for p in parts {
        match out.iter_mut().find(|(c, _)| c == p) {
            Some(e) => e.1 += 1,
            None => out.push((p.clone(), 1)),
        }
    }
    out
}

fn sum_model(groups: &[(DiscreteChannel, usize)]) -> Arc<dyn CapacityModel> {
    Arc::new(SumModel {
        parts: groups
            .iter()
            .map(|(c, k)| {
                let m: Arc<dyn CapacityModel> = Arc::new(ChannelModel {
                    channel: c.clone(),
                    tol: DEFAULT_TOL,
                });
                (m, *k as f64)
            })
            .collect(),
    })
}

fn half_capacities(groups: &[(DiscreteChannel, usize)]) -> Result<Vec<f64>> {
    groups
        .iter()
        .map(|(c, _)| Ok(solve_capacity(Order::HALF, c, DEFAULT_TOL)?.value))
        .collect()
}

/// 3·3^{1/κ}(Σ_t (C_{1/2}(W_t) ∨ κ)^κ)^{1/κ}, evaluated in log space.
fn gamma_core(groups: &[(DiscreteChannel, usize)], halves: &[f64], kappa: f64) -> f64 {
    let logs: Vec<f64> = groups
        .iter()
        .zip(halves)
        .map(|((_, k), c)| (*k as f64).ln() + kappa * c.max(kappa).ln())
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logs.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
    3.0 * 3f64.powf(1.0 / kappa) * (lse / kappa).exp()
}

/// The product-channel sphere-packing bound
/// P_e ≥ (εe^{−2γ}/(16e²n^{3/2}))^{1/φ} e^{−E^ε_sp(ln(M/L))}
/// under M/L > 16√n e^{C^ε_φ + γ/(1−φ)}, with its alternate-rate form and,
/// for stationary channels with n ≥ 10, the closed form with κ = ln n and
/// ε = 1/n.
pub fn spb_product(
    params: &CodeParams,
    parts: &[DiscreteChannel],
    phi: Order,
    eps: f64,
    kappa: f64,
) -> Result<BoundReport> {
    let nn = parts.len() as u64;
    if nn == 0 || nn != params.n() {
        return Err(Error::DimensionMismatch {
            left: params.n() as usize,
            right: parts.len(),
        });
    }
    let n = nn as f64;
    let p = phi.value();
    check_unit_order(p, "phi")?;
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
    let rate = params.rate();
    let groups = distinct(parts);
    let halves = half_capacities(&groups)?;
    let gamma = gamma_core(&groups, &halves, kappa) / (1.0 - eps);
    let averaged = Arc::new(AveragedModel {
        inner: sum_model(&groups),
        width: eps,
        tol: DEFAULT_TOL,
    });
    let avg_cap = averaged.capacity(p)?.capacity;
    let threshold = (16.0 * n.sqrt()).ln() + avg_cap + gamma / (1.0 - p);
    let curve = ExponentCurve::for_model(averaged, &OrderGrid::sub_one(SUB_ONE_NODES))?;
    let esp = sub_one_exponent(rate, &curve)?;
    let ln16 = (16.0 * E * E * n.powf(1.5)).ln();
    let primary = (eps.ln() - 2.0 * gamma - ln16) / p - esp;
    let alt_rate = rate - 2.0 * gamma - ln16 + eps.ln();
    let esp_alt = if alt_rate < curve.zero_plus().lower {
        f64::INFINITY
    } else {
        sub_one_exponent(alt_rate, &curve)?
    };
    let alt = eps.ln() - 2.0 * gamma - (16.0 * n.powf(1.5)).ln() - esp_alt;
    let satisfied = rate > threshold;
    let mut constants = BTreeMap::new();
    constants.insert("gamma".into(), gamma);
    constants.insert("kappa".into(), kappa);
    constants.insert("eps".into(), eps);
    constants.insert("phi".into(), p);
    constants.insert("n".into(), n);
    constants.insert("rate".into(), rate);
    constants.insert("avg_capacity_phi".into(), avg_cap);
    constants.insert("rate_threshold".into(), threshold);
    constants.insert("avg_e_sp".into(), esp);
    constants.insert("ln_prefactor".into(), (eps.ln() - 2.0 * gamma - ln16) / p);
    constants.insert("ln_primary".into(), primary);
    constants.insert("alt_rate".into(), alt_rate);
    constants.insert("ln_alt".into(), alt);
    let mut r = BoundReport::new(
        "spb_product",
        Direction::Outer,
        primary.max(alt),
        satisfied,
        constants,
    );
    if !satisfied {
        r.notes
            .push(format!("needs ln(M/L) = {rate} > {threshold}"));
    }
    if groups.len() == 1 && nn >= 10 {
        stationary_form(&mut r, params, &groups[0].0, p, halves[0])?;
    }
    Ok(r)
}

fn stationary_form(
    r: &mut BoundReport,
    params: &CodeParams,
    w: &DiscreteChannel,
    p: f64,
    c_half: f64,
) -> Result<()> {
    let n = params.n() as f64;
    let per_letter = params.rate() / n;
    let curve = ExponentCurve::for_channel(w, &OrderGrid::default(), DEFAULT_TOL)?;
    let c_phi = curve.capacity_at(p)?;
    let c_one = curve.capacity_at(1.0)?;
    let threshold = (16.0 * n.sqrt()).ln() / n
        + c_phi
        + (c_phi + 13.2 * p * c_half.max(n.ln())) / ((n - 1.0) * p * (1.0 - p));
    let ok = p > 1.0 / n && c_one >= per_letter && per_letter >= threshold;
    let esp = if per_letter < curve.zero_plus().upper {
        f64::INFINITY
    } else {
        sphere_packing_exponent(per_letter, &curve, DEFAULT_TOL)?
            .value
            .to_f64()
    };
    let ln_value =
        (-params.rate() / ((n - 1.0) * p) - 16f64.ln() - 2.0 - 29.0 * n.max(c_half.exp()).ln()) / p
            - n * esp;
    r.constants
        .insert("stationary_rate_threshold".into(), threshold);
    r.constants.insert("stationary_ln_value".into(), ln_value);
    r.constants
        .insert("stationary_hypothesis".into(), if ok { 1.0 } else { 0.0 });
    Ok(())
}

/// Which sharper product-channel bound to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialCase {
    MonotoneCenter,
    ConstantCenter,
    FixedDensity,
}

/// Orders φ + (1−φ)k/16, k = 0..15, on which center hypotheses are checked.
fn check_orders(lo: f64) -> Vec<f64> {
    (0..16).map(|k| lo + (1.0 - lo) * k as f64 / 16.0).collect()
}

/// Center tolerance of the grid checks.
const CENTER_TOL: f64 = 1e-9;

fn centers_on(w: &DiscreteChannel, orders: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
    orders
        .par_iter()
        .map(|&a| {
            let s = solve_capacity(Order::new(a)?, w, DEFAULT_TOL)?;
            Ok((s.value, s.center.weights().to_vec()))
        })
        .collect()
}

fn monotone_center_holds(w: &DiscreteChannel, phi: f64) -> Result<bool> {
    let orders = check_orders(phi);
    let cs = centers_on(w, &orders)?;
    let scaled: Vec<Vec<f64>> = orders
        .iter()
        .zip(&cs)
        .map(|(&a, (c, q))| {
            let s = ((a - 1.0) / a * c).exp();
            q.iter().map(|v| s * v).collect()
        })
        .collect();
    for i in 0..scaled.len() {
        for j in i + 1..scaled.len() {
            if scaled[i]
                .iter()
                .zip(&scaled[j])
                .any(|(a, b)| *a > b + CENTER_TOL)
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn constant_center_holds(w: &DiscreteChannel, orders: &[f64]) -> Result<Option<Vec<f64>>> {
    let cs = centers_on(w, orders)?;
    let first = cs[0].1.clone();
    Ok(cs
        .iter()
        .all(|(_, q)| tv_slices(q, &first) <= CENTER_TOL)
        .then_some(first))
}

/// q(dW(x)_ac/dq ≤ τ) is the same function of τ for every input x.
fn fixed_density_holds(w: &DiscreteChannel, q: &[f64]) -> bool {
    let ratios = |x: usize| -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = w
            .row(x)
            .iter()
            .zip(q)
            .filter(|(_, &qy)| qy > 0.0)
            .map(|(&wy, &qy)| (wy / qy, qy))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    let rows: Vec<Vec<(f64, f64)>> = (0..w.input_size()).map(ratios).collect();
    let mut taus: Vec<f64> = rows.iter().flatten().map(|r| r.0).collect();
    taus.sort_by(f64::total_cmp);
    let cdf = |row: &[(f64, f64)], t: f64| -> f64 {
        row.iter()
            .filter(|r| r.0 <= t + CENTER_TOL)
            .map(|r| r.1)
            .sum()
    };
    taus.iter().all(|&t| {
        let g0 = cdf(&rows[0], t);
        rows.iter().all(|r| (cdf(r, t) - g0).abs() <= CENTER_TOL)
    })
}

/// The monotone-center, constant-center and fixed-density bounds. Each
/// component's hypothesis is checked on a grid of orders; the product
/// hypothesis follows from the componentwise one.
pub fn spb_special_cases(
    params: &CodeParams,
    parts: &[DiscreteChannel],
    phi: Order,
    kappa: f64,
    case: SpecialCase,
) -> Result<BoundReport> {
    let nn = parts.len() as u64;
    if nn == 0 || nn != params.n() {
        return Err(Error::DimensionMismatch {
            left: params.n() as usize,
            right: parts.len(),
        });
    }
    let n = nn as f64;
    let p = phi.value();
    check_unit_order(p, "phi")?;
    if !(kappa >= 3.0) {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: kappa,
        });
    }
    let rate = params.rate();
    let groups = distinct(parts);
    let halves = half_capacities(&groups)?;
    let gamma = gamma_core(&groups, &halves, kappa);
    let model = sum_model(&groups);
    let curve = ExponentCurve::for_model(model, &OrderGrid::default())?;
    let c_phi = curve.capacity_at(p)?;
    let c_one = curve.capacity_at(1.0)?;
    let size_ok = rate > (16.0 * n.sqrt()).ln() + c_phi + gamma / (1.0 - p);
    let mut notes = Vec::new();
    let center_ok = match case {
        SpecialCase::MonotoneCenter => {
            let mut ok = c_one >= p * p / 2.0;
            for (c, _) in &groups {
                ok &= monotone_center_holds(c, p)?;
            }
            ok
        }
        SpecialCase::ConstantCenter => {
            let mut ok = true;
            for (c, _) in &groups {
                ok &= constant_center_holds(c, &check_orders(p))?.is_some();
            }
            ok
        }
        SpecialCase::FixedDensity => {
            notes.push("grid-verified".to_string());
            let orders: Vec<f64> = (1..20).map(|k| k as f64 / 20.0).collect();
            let mut ok = true;
            for (c, _) in &groups {
                ok &= match constant_center_holds(c, &orders)? {
                    Some(q) => fixed_density_holds(c, &q),
                    None => false,
                };
            }
            ok
        }
    };
    let esp_at = |r: f64| -> Result<f64> {
        if r < curve.zero_plus().upper {
            return Ok(f64::INFINITY);
        }
        Ok(sphere_packing_exponent(r, &curve, DEFAULT_TOL)?
            .value
            .to_f64())
    };
    let (lemma, shifted, prefactor) = match case {
        SpecialCase::MonotoneCenter => {
            let pre = (p * p).ln() - 2.0 * gamma - (32.0 * n.sqrt() * c_one).ln();
            (
                "spb_monotone_center",
                rate - ((95.0 * n.sqrt() * c_one).ln() - (p * p).ln() + 2.0 * gamma),
                pre,
            )
        }
        SpecialCase::ConstantCenter => (
            "spb_constant_center",
            rate - (20.0 * n.sqrt()).ln() - 2.0 * gamma,
            -2.0 * gamma - (16.0 * n.sqrt()).ln(),
        ),
        SpecialCase::FixedDensity => (
            "spb_fixed_density",
            rate - (20.0 * n.sqrt()).ln() - 2.0 * gamma,
            -2.0 * gamma - (16.0 * n.sqrt()).ln(),
        ),
    };
    let esp = esp_at(shifted)?;
    let mut constants = BTreeMap::new();
    constants.insert("gamma".into(), gamma);
    constants.insert("kappa".into(), kappa);
    constants.insert("phi".into(), p);
    constants.insert("n".into(), n);
    constants.insert("rate".into(), rate);
    constants.insert("c_phi".into(), c_phi);
    constants.insert("c_one".into(), c_one);
    constants.insert("shifted_rate".into(), shifted);
    constants.insert("e_sp".into(), esp);
    constants.insert("ln_prefactor".into(), prefactor);
    constants.insert(
        "center_hypothesis".into(),
        if center_ok { 1.0 } else { 0.0 },
    );
    let mut r = BoundReport::new(
        lemma,
        Direction::Outer,
        prefactor - esp,
        center_ok && size_ok,
        constants,
    );
    if !center_ok {
        notes.push("center hypothesis fails on the order grid".into());
    }
    if !size_ok {
        notes.push("message count below the hypothesis threshold".into());
    }
    r.notes = notes;
    Ok(r)
}

/// 2(β−1)/e²·[1 + e^{(β−1)γ}(γe^τ/(2τ))²] with τ = ((λ−β)γ/2) ∧ 1, a bound
/// on D_β(w‖q) − D_1(w‖q) whenever D_λ(w‖q) ≤ γ. At γ = 0 the second term
/// vanishes.
pub fn taylor_gap_bound(beta: f64, lambda: f64, gamma: f64) -> Result<f64> {
    if !(beta > 1.0 && lambda > beta && lambda.is_finite()) {
        return Err(Error::Precondition(format!(
            "need 1 < beta < lambda, got beta = {beta}, lambda = {lambda}"
        )));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
        });
    }
    let head = 2.0 * (beta - 1.0) / (E * E);
    if gamma == 0.0 {
        return Ok(head);
    }
    let tau = ((lambda - beta) * gamma / 2.0).min(1.0);
    let ratio = gamma * tau.exp() / (2.0 * tau);
    Ok(head * (1.0 + ((beta - 1.0) * gamma).exp() * ratio * ratio))
}

/// 3^{1/k}((1−α)d ∨ k)/(α(1−α)), a bound on the k-th absolute central
/// moment (to the power 1/k) of ln(dw/dq) under the tilted measure when
/// D_α(w‖q) = d.
pub fn moment_bound_rhs(order: Order, k: f64, d: f64) -> Result<f64> {
    let a = order.value();
    check_unit_order(a, "order")?;
    if !(k > 0.0) {
        return Err(Error::OutOfRange {
            name: "k",
            value: k,
        });
    }
    if !(d >= 0.0) {
        return Err(Error::OutOfRange {
            name: "d",
            value: d,
        });
    }
    Ok(3f64.powf(1.0 / k) * ((1.0 - a) * d).max(k) / (a * (1.0 - a)))
}

/// 1/(2√n), the floor on P(|Σζ_t| < 3m_κ) for n independent zero-mean terms.
pub fn small_deviation_floor(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    Ok(0.5 / (n as f64).sqrt())
}

/// How the tilt order of an input was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiltCase {
    /// D_1(V_φ‖q^ε_φ) reaches C^ε_φ at the lower end.
    Lower,
    /// D_1(V_η‖q^ε_η) stays below C^ε_φ at the upper end.
    Upper,
    /// D_1(V_α‖q^ε_α) = C^ε_φ at an interior root.
    Root,
}

/// The channel V(x) = tilt of W(x) at order f_ε(x) toward q^ε_{f_ε(x)}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryChannel {
    pub base: DiscreteChannel,
    pub orders: Vec<f64>,
    pub centers: Vec<ProbabilityMeasure>,
    pub channel: DiscreteChannel,
    pub cases: Vec<TiltCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputCertificate {
    pub input: usize,
    pub order: f64,
    /// D_1(V(x)‖q^ε).
    pub center_divergence: f64,
    /// D_1(V(x)‖W(x)).
    pub channel_divergence: f64,
    pub center_slack: f64,
    pub channel_slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityCap {
    pub beta: f64,
    pub capacity: f64,
    pub cap: f64,
    pub slack: f64,
}

/// An auxiliary channel with its per-input and capacity certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffReport {
    pub auxiliary: AuxiliaryChannel,
    pub rate: f64,
    pub eps: f64,
    pub phi: f64,
    pub eta: f64,
    pub e_sp: f64,
    pub c_half: f64,
    pub avg_capacity_phi: f64,
    /// R + 2εC_{1/2}/(φ(1−φ)²).
    pub rate_term: f64,
    /// E_sp(R) + 2εC_{1/2}/(φ²(1−η)).
    pub exponent_term: f64,
    pub inputs: Vec<InputCertificate>,
    pub caps: Vec<CapacityCap>,
    pub certified: bool,
}

/// Number of orders β ∈ (1, (1+η)/(2η)) at which the capacity cap is checked.
const CAP_ORDERS: usize = 5;

/// Builds the auxiliary channel of the rate–exponent tradeoff and checks
/// D_1(V(x)‖q^ε) ≤ R + 2εC_{1/2}/(φ(1−φ)²),
/// D_1(V(x)‖W(x)) ≤ E_sp(R) + 2εC_{1/2}/(φ²(1−η)) and the order-β cap
/// C_β(V) ≤ R + 2εC_{1/2}/(φ(1−φ)²) + ln(1/ε)
///   + (β−1)e^{(β−1)2C_{1/2}/(1−η)}[(4 ∨ 2C_{1/2})/(1−η)]².
pub fn tradeoff_channel(w: &DiscreteChannel, rate: f64, eps: f64) -> Result<TradeoffReport> {
    let curve = ExponentCurve::for_channel(w, &OrderGrid::default(), DEFAULT_TOL)?;
    let zp = curve.zero_plus();
    let c_one = curve.capacity_at(1.0)?;
    if !(rate > zp.upper && rate < c_one) {
        return Err(Error::Precondition(format!(
            "rate {rate} outside ({}, {c_one})",
            zp.upper
        )));
    }
    let phi = order_for_rate(&curve, rate, 1e-13)?.value();
    if !(eps > 0.0 && eps < phi / 2.0) {
        return Err(Error::Precondition(format!(
            "eps = {eps} outside (0, phi/2) with phi = {phi}"
        )));
    }
    let e_sp = sphere_packing_exponent(rate, &curve, DEFAULT_TOL)?
        .value
        .to_f64();
    let h = |a: f64| {
        curve
            .capacity_at(a)
            .map(|c| (1.0 - a) / a * c - e_sp)
            .unwrap_or(f64::NAN)
    };
    let eta = bisect(h, phi, 1.0, BRACKET_WIDTH)?;
    let c_half = curve.capacity_at(0.5)?;
    let target = average_capacity(Order::new(phi)?, eps, w, DEFAULT_TOL)?;

    let center_at = |a: f64| -> Result<Vec<f64>> {
        Ok(
            average_center(Order::new(a)?, eps, w, DEFAULT_NODES, DEFAULT_TOL)?
                .center
                .weights()
                .to_vec(),
        )
    };
    let tilt = |x: usize, a: f64, q: &[f64]| -> Result<Vec<f64>> {
        tilt_slices(a, w.row(x), q).ok_or_else(|| {
            Error::Precondition(format!("input {x}: W(x) and the center are singular"))
        })
    };
    let q_phi = center_at(phi)?;
    let q_eta = center_at(eta)?;
    let choices: Vec<(f64, TiltCase)> = (0..w.input_size())
        .into_par_iter()
        .map(|x| -> Result<(f64, TiltCase)> {
            let d = |a: f64, q: &[f64]| -> Result<f64> {
                Ok(divergence_slices(1.0, &tilt(x, a, q)?, q).to_f64())
            };
            let lo = d(phi, &q_phi)? - target;
            let hi = d(eta, &q_eta)? - target;
            if hi < 0.0 {
                return Ok((eta, TiltCase::Upper));
            }
            if lo > 0.0 {
                return Ok((phi, TiltCase::Lower));
            }
            let g = |a: f64| {
                center_at(a)
                    .and_then(|q| d(a, &q))
                    .map(|v| v - target)
                    .unwrap_or(f64::NAN)
            };
            let a = bisect(g, phi, eta, BRACKET_WIDTH)
                .map_err(|e| Error::Bracket(format!("input {x}: {e}")))?;
            Ok((a, TiltCase::Root))
        })
        .collect::<Result<_>>()?;

    let rate_term = rate + 2.0 * eps * c_half / (phi * (1.0 - phi).powi(2));
    let exponent_term = e_sp + 2.0 * eps * c_half / (phi * phi * (1.0 - eta));
    let mut rows = Vec::with_capacity(w.input_size());
    let mut centers = Vec::with_capacity(w.input_size());
    let mut inputs = Vec::with_capacity(w.input_size());
    for (x, &(a, _)) in choices.iter().enumerate() {
        let q = center_at(a)?;
        let v = tilt(x, a, &q)?;
        let dc = divergence_slices(1.0, &v, &q).to_f64();
        let dw = divergence_slices(1.0, &v, w.row(x)).to_f64();
        inputs.push(InputCertificate {
            input: x,
            order: a,
            center_divergence: dc,
            channel_divergence: dw,
            center_slack: rate_term - dc,
            channel_slack: exponent_term - dw,
        });
        centers.push(ProbabilityMeasure::from_unnormalized(q)?);
        rows.push(v);
    }
    let channel = DiscreteChannel::new(rows)?;
    let beta_hi = (1.0 + eta) / (2.0 * eta);
    let spread = (4f64).max(2.0 * c_half) / (1.0 - eta);
    let caps = (1..=CAP_ORDERS)
        .map(|k| -> Result<CapacityCap> {
            let beta = 1.0 + (beta_hi - 1.0) * k as f64 / (CAP_ORDERS + 1) as f64;
            let capacity = solve_capacity(Order::new(beta)?, &channel, DEFAULT_TOL)?.value;
            let cap = rate_term
                + (1.0 / eps).ln()
                + (beta - 1.0)
                    * ((beta - 1.0) * 2.0 * c_half / (1.0 - eta)).exp()
                    * spread
                    * spread;
            Ok(CapacityCap {
                beta,
                capacity,
                cap,
                slack: cap - capacity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let certified = inputs
        .iter()
        .all(|c| c.center_slack >= 0.0 && c.channel_slack >= 0.0)
        && caps.iter().all(|c| c.slack >= 0.0);
    Ok(TradeoffReport {
        auxiliary: AuxiliaryChannel {
            base: w.clone(),
            orders: choices.iter().map(|c| c.0).collect(),
            centers,
            channel,
            cases: choices.iter().map(|c| c.1).collect(),
        },
        rate,
        eps,
        phi,
        eta,
        e_sp,
        c_half,
        avg_capacity_phi: target,
        rate_term,
        exponent_term,
        inputs,
        caps,
        certified,
    })
}

/// Subblock lengths ℓ_i and end times t_i splitting n uses into κ blocks:
/// the first n − ⌊n/κ⌋κ blocks have length ⌈n/κ⌉, the rest ⌊n/κ⌋.
pub fn subblock_plan(n: u64, kappa: u64) -> Result<(Vec<u64>, Vec<u64>)> {
    if kappa == 0 || kappa >= n {
        return Err(Error::Precondition(format!(
            "need 1 <= kappa < n, got kappa = {kappa}, n = {n}"
        )));
    }
    let floor = n / kappa;
    let long = n - floor * kappa;
    let lengths: Vec<u64> = (0..kappa)
        .map(|i| if i < long { floor + 1 } else { floor })
        .collect();
    let ends = lengths
        .iter()
        .scan(0, |t, l| {
            *t += l;
            Some(*t)
        })
        .collect();
    Ok((lengths, ends))
}

/// The order ϑ ∈ (α₁, 1) with ((1−ϑ)/ϑ)C_ϑ = E_sp(C_{α₁}).
fn theta_for(curve: &ExponentCurve, a1: f64) -> Result<(f64, f64)> {
    let c1 = curve.capacity_at(a1)?;
    if c1 <= curve.zero_plus().upper || c1 >= curve.capacity_at(1.0)? {
        return Err(Error::Precondition(format!(
            "C at order {a1} is outside the C0+ to C1 interval; no admissible orders"
        )));
    }
    let e = sphere_packing_exponent(c1, curve, DEFAULT_TOL)?
        .value
        .to_f64();
    let h = |a: f64| {
        curve
            .capacity_at(a)
            .map(|c| (1.0 - a) / a * c - e)
            .unwrap_or(f64::NAN)
    };
    Ok((bisect(h, a1, 1.0, BRACKET_WIDTH)?, c1))
}

fn check_feedback_orders(n: u64, kappa: u64, eps: f64, a0: f64, a1: f64) -> Result<()> {
    if kappa == 0 || kappa >= n {
        return Err(Error::Precondition(format!(
            "need 1 <= kappa < n, got kappa = {kappa}, n = {n}"
        )));
    }
    if !(a0 > 0.0 && a0 < a1 && a1 < 1.0) {
        return Err(Error::Precondition(format!(
            "need 0 < alpha0 < alpha1 < 1, got {a0}, {a1}"
        )));
    }
    if !(eps > 0.0 && eps < a0 / 2.0) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
        });
    }
    Ok(())
}

/// The sphere-packing bound for stationary product channels with feedback,
/// P_e ≥ (1/4)exp{−n[E_sp(R) + (C_{1/2}/(α₀(1−ϑ)))(6ε/(α₀(1−ϑ)) + 15/κ^{1/3})
///   − κ ln ε/(nα₀)]} with R = (1/n)ln(M/L), under ⌊n/κ⌋C_{1/2} ≥ 2 and
/// C_{α₁} ≥ R ≥ C_{α₀} + (C_{1/2}/(1−ϑ))[2ε/(α₀(1−ϑ)) + 14/κ^{1/3}] + (κ/n)ln(1/ε).
pub fn spb_feedback(
    params: &CodeParams,
    w: &DiscreteChannel,
    kappa: u64,
    eps: f64,
    orders: (f64, f64),
) -> Result<BoundReport> {
    let (a0, a1) = orders;
    let nn = params.n();
    check_feedback_orders(nn, kappa, eps, a0, a1)?;
    let n = nn as f64;
    let k = kappa as f64;
    let curve = ExponentCurve::for_channel(w, &OrderGrid::default(), DEFAULT_TOL)?;
    let (theta, c_a1) = theta_for(&curve, a1)?;
    let c_a0 = curve.capacity_at(a0)?;
    let c_half = curve.capacity_at(0.5)?;
    let (ell, ends) = subblock_plan(nn, kappa)?;
    let per_letter = params.rate() / n;
    let block_ok = (nn / kappa) as f64 * c_half >= 2.0;
    let threshold = c_a0
        + c_half / (1.0 - theta) * (2.0 * eps / (a0 * (1.0 - theta)) + 14.0 / k.cbrt())
        + k / n * (1.0 / eps).ln();
    let rate_ok = c_a1 >= per_letter && per_letter >= threshold;
    let esp = if per_letter < curve.zero_plus().upper {
        f64::INFINITY
    } else {
        sphere_packing_exponent(per_letter, &curve, DEFAULT_TOL)?
            .value
            .to_f64()
    };
    let penalty = c_half / (a0 * (1.0 - theta))
        * (6.0 * eps / (a0 * (1.0 - theta)) + 15.0 / k.cbrt())
        - k * eps.ln() / (n * a0);
    let ln_value = -(4f64).ln() - n * (esp + penalty);
    let mut constants = BTreeMap::new();
    constants.insert("theta".into(), theta);
    constants.insert("kappa".into(), k);
    constants.insert("eps".into(), eps);
    constants.insert("alpha0".into(), a0);
    constants.insert("alpha1".into(), a1);
    constants.insert("n".into(), n);
    constants.insert("c_half".into(), c_half);
    constants.insert("c_alpha0".into(), c_a0);
    constants.insert("c_alpha1".into(), c_a1);
    constants.insert("rate".into(), per_letter);
    constants.insert("rate_threshold".into(), threshold);
    constants.insert("e_sp".into(), esp);
    constants.insert("ln_prefactor".into(), -(4f64).ln() - n * penalty);
    let mut r = BoundReport::new(
        "spb_feedback",
        Direction::Outer,
        ln_value,
        block_ok && rate_ok,
        constants,
    );
    r.lists
        .insert("ell".into(), ell.iter().map(|&v| v as f64).collect());
    r.lists
        .insert("t".into(), ends.iter().map(|&v| v as f64).collect());
    if !block_ok {
        r.notes.push(format!(
            "floor(n/kappa) C_1/2 = {} < 2",
            (nn / kappa) as f64 * c_half
        ));
    }
    if !rate_ok {
        r.notes.push(format!(
            "rate hypothesis needs {c_a1} >= {per_letter} >= {threshold}"
        ));
    }
    Ok(r)
}

/// Per-distinct-channel capacities at `orders`.
fn capacity_table(groups: &[(DiscreteChannel, usize)], orders: &[f64]) -> Result<Vec<Vec<f64>>> {
    groups
        .iter()
        .map(|(c, _)| {
            orders
                .par_iter()
                .map(|&a| Ok(solve_capacity(Order::new(a)?, c, DEFAULT_TOL)?.value))
                .collect()
        })
        .collect()
}

/// Largest window excess max_t [C_α(W_{[t,t+ℓ−1]}) − (ℓ/n)C_α(W_{[1,n]})]
/// over the supplied orders and window lengths, clamped at zero.
pub fn stationarity_defect(
    channels: &[DiscreteChannel],
    orders: &[f64],
    lengths: &[u64],
) -> Result<f64> {
    let n = channels.len();
    let groups = distinct(channels);
    let table = capacity_table(&groups, orders)?;
    let index: Vec<usize> = channels
        .iter()
        .map(|c| groups.iter().position(|(g, _)| g == c).expect("grouped"))
        .collect();
    let mut worst = 0.0f64;
    for (j, _) in orders.iter().enumerate() {
        let caps: Vec<f64> = index.iter().map(|&i| table[i][j]).collect();
        let total: f64 = caps.iter().sum();
        for &l in lengths {
            let l = l as usize;
            if l == 0 || l > n {
                continue;
            }
            for t in 0..=n - l {
                let window: f64 = caps[t..t + l].iter().sum();
                worst = worst.max(window - l as f64 / n as f64 * total);
            }
        }
    }
    Ok(worst)
}

/// The feedback bound for non-stationary channels with a stationarity
/// defect γ certified on a grid of orders in [α₀, ϑ]:
/// P_e ≥ (1/4)exp(−E_sp(ln(M/L)) − (C_{1/2}+κγ)/(α₀²(1−ϑ)²)[6ε + 15/κ^{1/3}]
///   − κ(3γ − ln ε)/α₀), all capacities of the whole length-n channel.
pub fn spb_feedback_gamma(
    params: &CodeParams,
    channels: &[DiscreteChannel],
    kappa: u64,
    eps: f64,
    orders: (f64, f64),
) -> Result<BoundReport> {
    let (a0, a1) = orders;
    let nn = channels.len() as u64;
    if nn != params.n() {
        return Err(Error::DimensionMismatch {
            left: params.n() as usize,
            right: channels.len(),
        });
    }
    check_feedback_orders(nn, kappa, eps, a0, a1)?;
    let k = kappa as f64;
    let groups = distinct(channels);
    let curve = ExponentCurve::for_model(sum_model(&groups), &OrderGrid::default())?;
    let (theta, c_a1) = theta_for(&curve, a1)?;
    let c_a0 = curve.capacity_at(a0)?;
    let c_half = curve.capacity_at(0.5)?;
    let grid: Vec<f64> = (0..=16)
        .map(|i| a0 + (theta - a0) * i as f64 / 16.0)
        .collect();
    let lengths = [nn / kappa, nn.div_ceil(kappa)];
    let gamma = stationarity_defect(channels, &grid, &lengths)?;
    let rate = params.rate();
    let block_ok = (nn / kappa) as f64 * c_half / nn as f64 + gamma >= 2.0;
    let spread = c_half / (a0 * (1.0 - theta).powi(2));
    let threshold = c_a0 + spread * (2.0 * eps + 14.0 / k.cbrt()) + k * (gamma - eps.ln());
    let rate_ok = c_a1 >= rate && rate >= threshold;
    let esp = if rate < curve.zero_plus().upper {
        f64::INFINITY
    } else {
        sphere_packing_exponent(rate, &curve, DEFAULT_TOL)?
            .value
            .to_f64()
    };
    let penalty = (c_half + k * gamma) / (a0 * a0 * (1.0 - theta).powi(2))
        * (6.0 * eps + 15.0 / k.cbrt())
        + k * (3.0 * gamma - eps.ln()) / a0;
    let ln_value = -(4f64).ln() - esp - penalty;
    let mut constants = BTreeMap::new();
    constants.insert("gamma".into(), gamma);
    constants.insert("theta".into(), theta);
    constants.insert("kappa".into(), k);
    constants.insert("eps".into(), eps);
    constants.insert("alpha0".into(), a0);
    constants.insert("alpha1".into(), a1);
    constants.insert("n".into(), nn as f64);
    constants.insert("rate".into(), rate);
    constants.insert("rate_threshold".into(), threshold);
    constants.insert("e_sp".into(), esp);
    let mut r = BoundReport::new(
        "spb_feedback_gamma",
        Direction::Outer,
        ln_value,
        block_ok && rate_ok,
        constants,
    );
    let (ell, ends) = subblock_plan(nn, kappa)?;
    r.lists
        .insert("ell".into(), ell.iter().map(|&v| v as f64).collect());
    r.lists
        .insert("t".into(), ends.iter().map(|&v| v as f64).collect());
    r.notes
        .push("stationarity defect certified on a 17-point order grid".into());
    Ok(r)
}

/// Smallest K with |C_α(W_{[t,t+ℓ−1]}) − ℓψ(α)| ≤ K ln ℓ for each window
/// length ℓ ≥ 2, where ψ(α) = C_α(W_{[1,N]})/N over the whole sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub orders: Vec<f64>,
    pub window_lengths: Vec<u64>,
    pub k_values: Vec<f64>,
    /// max_{t≤n} C_{1/2}(W_t)/ln n for n = 2..N.
    pub individual_ologn: Vec<f64>,
}

pub fn assumption_check(channels: &[DiscreteChannel], orders: &[f64]) -> Result<AssumptionReport> {
    let n = channels.len();
    if n < 2 {
        return Err(Error::Precondition("need at least two channels".into()));
    }
    let mut all_orders = orders.to_vec();
    if !all_orders.contains(&0.5) {
        all_orders.push(0.5);
    }
    let groups = distinct(channels);
    let table = capacity_table(&groups, &all_orders)?;
    let index: Vec<usize> = channels
        .iter()
        .map(|c| groups.iter().position(|(g, _)| g == c).expect("grouped"))
        .collect();
    let mut k_values = vec![0.0f64; n - 1];
    for (j, _) in orders.iter().enumerate() {
        let caps: Vec<f64> = index.iter().map(|&i| table[i][j]).collect();
        let psi = caps.iter().sum::<f64>() / n as f64;
        for l in 2..=n {
            for t in 0..=n - l {
                let dev = (caps[t..t + l].iter().sum::<f64>() - l as f64 * psi).abs();
                k_values[l - 2] = k_values[l - 2].max(dev / (l as f64).ln());
            }
        }
    }
    let half = all_orders
        .iter()
        .position(|&a| a == 0.5)
        .expect("half order present");
    let mut running = 0.0f64;
    let mut individual = Vec::with_capacity(n - 1);
    for (t, &i) in index.iter().enumerate() {
        running = running.max(table[i][half]);
        if t >= 1 {
            individual.push(running / ((t + 1) as f64).ln());
        }
    }
    Ok(AssumptionReport {
        orders: orders.to_vec(),
        window_lengths: (2..=n as u64).collect(),
        k_values,
        individual_ologn: individual,
    })
}
