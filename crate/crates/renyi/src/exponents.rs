//! Sphere-packing, average sphere-packing and Haroutunian exponents.
//!
//! Exponents are suprema over the order of ((1−α)/α)(C_α − R). The
//! capacities come from an [`ExponentCurve`]: a sample of C_α on an
//! [`OrderGrid`] backed by a [`CapacityModel`] that can be queried at any
//! order. Suprema are located on the grid and refined by golden-section
//! search around every discrete local maximum, using exact evaluations.
//!
//! For channels with finitely many outputs C_α ≤ ln|Y| for every order, so
//! the order χ = sup{α : C_α < ∞} is always +∞. Searches above one stop at
//! the grid's largest order α_max; beyond it the objective is bounded by
//! R − C_{α_max}, which is reported as the tail bound.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{
    average_of, solve_capacity, zero_plus_bracket, ZeroPlusBracket, DEFAULT_TOL, ZERO_PLUS_ORDER,
};
use crate::channels::DiscreteChannel;
use crate::error::{Error, Result};
use crate::measures::{divergence_slices, tilt_slices, ExtReal, Order, ProbabilityMeasure};
use crate::roots::golden_max;
use crate::sampling::{dirichlet, substream};

/// Number of equally spaced grid orders in (0,1).
pub const SUB_ONE_NODES: usize = 64;
/// Largest order sampled above one.
pub const DEFAULT_ALPHA_MAX: f64 = 8.0;
/// Spacing of the grid above one.
pub const SUPER_ONE_STEP: f64 = 0.25;
/// Golden-section resolution in the order.
const ORDER_RESOLUTION: f64 = 1e-9;

/// Sorted orders at which a capacity curve is sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderGrid {
    orders: Vec<f64>,
}

impl OrderGrid {
    /// `sub_one` nodes i/(sub_one+1) in (0,1), the order 1, and orders
    /// 1 + k·step up to `alpha_max`.
    pub fn new(sub_one: usize, alpha_max: f64, step: f64) -> Result<Self> {
        if !(alpha_max >= 1.0) || !alpha_max.is_finite() {
            return Err(Error::OutOfRange {
                name: "alpha_max",
                value: alpha_max,
            });
        }
        if !(step > 0.0) {
            return Err(Error::OutOfRange {
                name: "step",
                value: step,
            });
        }
        let mut orders: Vec<f64> = (1..=sub_one)
            .map(|i| i as f64 / (sub_one + 1) as f64)
            .collect();
        orders.push(1.0);
        let mut k = 1;
        while 1.0 + k as f64 * step < alpha_max - 1e-12 {
            orders.push(1.0 + k as f64 * step);
            k += 1;
        }
        if alpha_max > 1.0 {
            orders.push(alpha_max);
        }
        Ok(OrderGrid { orders })
    }

    /// Only the `count` equally spaced orders in (0,1).
    pub fn sub_one(count: usize) -> Self {
        OrderGrid {
            orders: (1..=count).map(|i| i as f64 / (count + 1) as f64).collect(),
        }
    }

    /// An arbitrary list of positive orders.
    pub fn from_orders(mut orders: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = orders.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidOrder(bad));
        }
        orders.sort_by(f64::total_cmp);
        orders.dedup();
        Ok(OrderGrid { orders })
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn alpha_max(&self) -> f64 {
        self.orders.last().copied().unwrap_or(1.0)
    }
}

impl Default for OrderGrid {
    fn default() -> Self {
        OrderGrid::new(SUB_ONE_NODES, DEFAULT_ALPHA_MAX, SUPER_ONE_STEP).expect("valid defaults")
    }
}

/// One sampled capacity with its duality gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub order: f64,
    pub capacity: f64,
    pub gap: f64,
}

/// Anything with an order-α capacity that can be evaluated on demand.
pub trait CapacityModel: Send + Sync {
    fn capacity(&self, order: f64) -> Result<CurvePoint>;
    fn zero_plus(&self) -> Result<ZeroPlusBracket>;
}

/// Capacities of a finite channel from the minimax solver.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub channel: DiscreteChannel,
    pub tol: f64,
}

impl CapacityModel for ChannelModel {
    fn capacity(&self, order: f64) -> Result<CurvePoint> {
        let s = solve_capacity(Order::new(order)?, &self.channel, self.tol)?;
        Ok(CurvePoint {
            order,
            capacity: s.value,
            gap: s.duality_gap,
        })
    }

    fn zero_plus(&self) -> Result<ZeroPlusBracket> {
        zero_plus_bracket(&self.channel, self.tol)
    }
}

/// Average capacities C^ε_α of an inner model, defined for α ∈ (0,1).
#[derive(Clone)]
pub struct AveragedModel {
    pub inner: Arc<dyn CapacityModel>,
    pub width: f64,
    pub tol: f64,
}

impl CapacityModel for AveragedModel {
    fn capacity(&self, order: f64) -> Result<CurvePoint> {
        let gap = Mutex::new(0.0f64);
        let v = average_of(Order::new(order)?, self.width, self.tol, |b| {
            let p = self.inner.capacity(b)?;
            let mut g = gap.lock().expect("gap lock");
            *g = g.max(p.gap);
            Ok(p.capacity)
        })?;
        let gap = gap.into_inner().expect("gap lock");
        Ok(CurvePoint {
            order,
            capacity: v,
            gap: gap.max(self.tol),
        })
    }

    fn zero_plus(&self) -> Result<ZeroPlusBracket> {
        let lower = self.inner.zero_plus()?.lower;
        let upper = self.capacity(ZERO_PLUS_ORDER)?.capacity.max(lower);
        Ok(ZeroPlusBracket {
            lower,
            upper,
            estimate: upper,
        })
    }
}

/// Weighted sum Σ_i m_i C_α(model_i), the capacity of a product of
/// independent components.
#[derive(Clone)]
pub struct SumModel {
    pub parts: Vec<(Arc<dyn CapacityModel>, f64)>,
}

impl CapacityModel for SumModel {
    fn capacity(&self, order: f64) -> Result<CurvePoint> {
        let mut out = CurvePoint {
            order,
            capacity: 0.0,
            gap: 0.0,
        };
        for (m, k) in &self.parts {
            let p = m.capacity(order)?;
            out.capacity += k * p.capacity;
            out.gap += k * p.gap;
        }
        Ok(out)
    }

    fn zero_plus(&self) -> Result<ZeroPlusBracket> {
        let mut out = ZeroPlusBracket {
            lower: 0.0,
            upper: 0.0,
            estimate: 0.0,
        };
        for (m, k) in &self.parts {
            let b = m.zero_plus()?;
            out.lower += k * b.lower;
            out.upper += k * b.upper;
            out.estimate += k * b.estimate;
        }
        Ok(out)
    }
}

/// Capacities sampled on a grid, with cached exact evaluations between the
/// nodes.
pub struct ExponentCurve {
    model: Arc<dyn CapacityModel>,
    points: Vec<CurvePoint>,
    zero_plus: ZeroPlusBracket,
    cache: Mutex<HashMap<u64, CurvePoint>>,
}

impl fmt::Debug for ExponentCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExponentCurve")
            .field("points", &self.points)
            .field("zero_plus", &self.zero_plus)
            .finish()
    }
}

impl ExponentCurve {
    pub fn for_channel(w: &DiscreteChannel, grid: &OrderGrid, tol: f64) -> Result<Self> {
        Self::for_model(
            Arc::new(ChannelModel {
                channel: w.clone(),
                tol,
            }),
            grid,
        )
    }

    /// Samples `model` on every grid order in parallel.
    pub fn for_model(model: Arc<dyn CapacityModel>, grid: &OrderGrid) -> Result<Self> {
        if grid.orders().is_empty() {
            return Err(Error::Precondition("empty order grid".into()));
        }
        let points: Vec<CurvePoint> = grid
            .orders()
            .par_iter()
            .map(|&a| model.capacity(a))
            .collect::<Result<_>>()?;
        let zero_plus = model.zero_plus()?;
        let cache = points.iter().map(|p| (p.order.to_bits(), *p)).collect();
        Ok(ExponentCurve {
            model,
            points,
            zero_plus,
            cache: Mutex::new(cache),
        })
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn model(&self) -> &Arc<dyn CapacityModel> {
        &self.model
    }

    pub fn zero_plus(&self) -> ZeroPlusBracket {
        self.zero_plus
    }

    pub fn alpha_max(&self) -> f64 {
        self.points.last().map_or(1.0, |p| p.order)
    }

    /// Exact capacity at `order`, memoized.
    pub fn capacity_at(&self, order: f64) -> Result<f64> {
        if let Some(p) = self.cache.lock().expect("cache lock").get(&order.to_bits()) {
            return Ok(p.capacity);
        }
        let p = self.model.capacity(order)?;
        self.cache
            .lock()
            .expect("cache lock")
            .insert(order.to_bits(), p);
        Ok(p.capacity)
    }

    /// Piecewise-linear interpolation of the running maximum of the
    /// samples; `None` outside the sampled range.
    pub fn interpolate(&self, order: f64) -> Option<f64> {
        let first = self.points.first()?;
        if order < first.order || order > self.alpha_max() {
            return None;
        }
        let mut hull = first.capacity;
        for pair in self.points.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (ca, cb) = (hull, hull.max(b.capacity));
            if order <= b.order {
                let t = if b.order > a.order {
                    (order - a.order) / (b.order - a.order)
                } else {
                    0.0
                };
                return Some(ca + t * (cb - ca));
            }
            hull = cb;
        }
        Some(hull)
    }

    /// Adjacent samples that decrease by more than twice their duality
    /// gaps, as (lower order, higher order, drop).
    pub fn violations(&self) -> Vec<(f64, f64, f64)> {
        self.points
            .windows(2)
            .filter_map(|p| {
                let drop = p[0].capacity - p[1].capacity;
                let slack = 2.0 * p[0].gap.max(p[1].gap) + 4.0 * f64::EPSILON * p[0].capacity.abs();
                (drop > slack).then_some((p[0].order, p[1].order, drop))
            })
            .collect()
    }

    fn nodes_within(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut xs = vec![lo];
        xs.extend(
            self.points
                .iter()
                .map(|p| p.order)
                .filter(|&a| a > lo && a < hi),
        );
        if hi > lo {
            xs.push(hi);
        }
        xs
    }

    /// Maximum of ((1−α)/α)(C_α − R) over [lo, hi].
    fn sup_objective(&self, rate: f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
        let objective = |a: f64| self.capacity_at(a).map(|c| (1.0 - a) / a * (c - rate));
        sup_on(&objective, &self.nodes_within(lo, hi))
    }
}

/// Grid maximum of `f` over the sorted `xs`, refined by golden-section
/// search between the neighbours of every discrete local maximum.
fn sup_on(f: &(dyn Fn(f64) -> Result<f64> + Sync), xs: &[f64]) -> Result<(f64, f64)> {
    let vals: Vec<f64> = xs.par_iter().map(|&a| f(a)).collect::<Result<_>>()?;
    let mut best = (xs[0], vals[0]);
    let mut failure = None;
    for i in 0..xs.len() {
        let left = if i > 0 {
            vals[i - 1]
        } else {
            f64::NEG_INFINITY
        };
        let right = if i + 1 < xs.len() {
            vals[i + 1]
        } else {
            f64::NEG_INFINITY
        };
        if vals[i] > best.1 {
            best = (xs[i], vals[i]);
        }
        if vals[i] < left || vals[i] < right || xs.len() < 2 {
            continue;
        }
        let lo = xs[i.saturating_sub(1)];
        let hi = xs[(i + 1).min(xs.len() - 1)];
        let (x, fx) = golden_max(
            |a| {
                f(a).unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    f64::NEG_INFINITY
                })
            },
            lo,
            hi,
            ORDER_RESOLUTION,
        );
        if fx > best.1 {
            best = (x, fx);
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

/// The six cases of the sphere-packing case table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    /// R < C_{0+}: the exponent is +∞.
    BelowZeroPlus,
    /// R within the numerical bracket on C_{0+}.
    ZeroPlus,
    /// R = C_φ with φ ∈ (0,1): sup over [φ,1).
    SubOne { phi: f64 },
    /// χ = 1 and R ≥ C_χ: the exponent is 0.
    AboveChiAtOne,
    /// R = C_φ with φ ∈ [1,χ): sup over [1,φ].
    SuperOne { phi: f64 },
    /// R ≥ C_χ with χ > 1: sup over [1,χ), searched up to α_max.
    AboveChi,
}

/// A sphere-packing exponent with the order achieving it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpheResult {
    pub rate: f64,
    pub value: ExtReal,
    pub maximizing_order: Option<Order>,
    pub regime: Regime,
    /// Upper bound R − C_{α_max} on the objective beyond α_max, when the
    /// search was capped.
    pub tail_bound: Option<f64>,
    pub caveat: Option<String>,
}

/// E_sp(R) = sup_{α>0} ((1−α)/α)(C_α − R) from a sampled curve.
///
/// The curve must contain the order 1 and enough orders in (0,1).
pub fn sphere_packing_exponent(rate: f64, curve: &ExponentCurve, tol: f64) -> Result<SpheResult> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::OutOfRange {
            name: "rate",
            value: rate,
        });
    }
    let zp = curve.zero_plus();
    let infinite = |regime, caveat: Option<String>| SpheResult {
        rate,
        value: ExtReal::Infinite,
        maximizing_order: None,
        regime,
        tail_bound: None,
        caveat,
    };
    if rate < zp.lower {
        return Ok(infinite(Regime::BelowZeroPlus, None));
    }
    if rate < zp.upper {
        return Ok(infinite(
            Regime::ZeroPlus,
            Some(format!(
                "rate lies in the C0+ bracket [{}, {}]; reported as +inf",
                zp.lower, zp.upper
            )),
        ));
    }
    let c1 = curve.capacity_at(1.0)?;
    let finish =
        |regime, (a, v): (f64, f64), tail_bound: Option<f64>, caveat| -> Result<SpheResult> {
            Ok(SpheResult {
                rate,
                value: ExtReal::Finite(v.max(0.0)),
                maximizing_order: Some(Order::new(a)?),
                regime,
                tail_bound,
                caveat,
            })
        };
    if rate < c1 {
        let phi = order_for_rate(curve, rate, tol)?.value();
        return finish(
            Regime::SubOne { phi },
            curve.sup_objective(rate, phi, 1.0)?,
            None,
            None,
        );
    }
    let amax = curve.alpha_max();
    let cmax = curve.capacity_at(amax)?;
    if rate <= cmax && amax > 1.0 {
        let phi = if rate == c1 {
            1.0
        } else {
            order_for_rate(curve, rate, tol)?.value()
        };
        return finish(
            Regime::SuperOne { phi },
            curve.sup_objective(rate, 1.0, phi)?,
            None,
            None,
        );
    }
    let best = curve.sup_objective(rate, 1.0, amax)?;
    let tail = rate - cmax;
    let caveat = (tail > best.1)
        .then(|| format!("search capped at order {amax}; the supremum may reach {tail}"));
    finish(Regime::AboveChi, best, Some(tail), caveat)
}

/// Smallest order at which the curve is searched when inverting rates.
const MIN_INVERSION_ORDER: f64 = 1e-6;

/// The order φ with C_φ = rate, by bisection on the monotone curve.
pub fn order_for_rate(curve: &ExponentCurve, rate: f64, tol: f64) -> Result<Order> {
    let out_of_range = || {
        Error::Precondition(format!(
            "rate {rate} outside the range of the capacity curve"
        ))
    };
    let pts = curve.points();
    let amax = curve.alpha_max();
    let mut lo = MIN_INVERSION_ORDER;
    let mut hi = amax;
    if rate < curve.capacity_at(lo)? || rate > curve.capacity_at(amax)? {
        return Err(out_of_range());
    }
    for p in pts {
        if p.capacity <= rate {
            lo = lo.max(p.order);
        } else if p.order > lo {
            hi = hi.min(p.order);
            break;
        }
    }
    if (curve.capacity_at(lo)? - rate).abs() <= tol {
        return Order::new(lo);
    }
    if curve.capacity_at(hi)? < rate {
        return Err(out_of_range());
    }
    for _ in 0..crate::roots::MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let c = curve.capacity_at(mid)?;
        if (c - rate).abs() <= tol || hi - lo <= f64::EPSILON * hi {
            return Order::new(mid);
        }
        if c < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Order::new(0.5 * (lo + hi))
}

/// Sub-one exponent sup_{α∈(0,1)} ((1−α)/α)(C_α − R) on a curve whose
/// grid lies in (0,1); +∞ below its C_{0+} bracket.
pub fn sub_one_exponent(rate: f64, curve: &ExponentCurve) -> Result<f64> {
    if rate < curve.zero_plus().lower {
        return Ok(f64::INFINITY);
    }
    let pts = curve.points();
    let (lo, hi) = (pts[0].order, pts[pts.len() - 1].order);
    let objective = |a: f64| curve.capacity_at(a).map(|c| (1.0 - a) / a * (c - rate));
    let mut xs: Vec<f64> = vec![ZERO_PLUS_ORDER.min(lo)];
    xs.extend(pts.iter().map(|p| p.order).filter(|&a| a < 1.0));
    let (_, v) = sup_on(&objective, &xs)?;
    let edge = if hi < 1.0 { 0.0 } else { f64::NEG_INFINITY };
    Ok(v.max(edge).max(0.0))
}

/// Average sphere-packing exponent sup_{α∈(0,1)} ((1−α)/α)(C^ε_α − R).
pub fn average_sp_exponent(width: f64, rate: f64, w: &DiscreteChannel, tol: f64) -> Result<f64> {
    let inner: Arc<dyn CapacityModel> = Arc::new(ChannelModel {
        channel: w.clone(),
        tol: DEFAULT_TOL,
    });
    average_sp_exponent_for(width, rate, inner, tol)
}

/// Average sphere-packing exponent of an arbitrary capacity model.
pub fn average_sp_exponent_for(
    width: f64,
    rate: f64,
    inner: Arc<dyn CapacityModel>,
    tol: f64,
) -> Result<f64> {
    if !(width > 0.0 && width < 1.0) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: width,
        });
    }
    if !(rate >= 0.0) {
        return Err(Error::OutOfRange {
            name: "rate",
            value: rate,
        });
    }
    let model = Arc::new(AveragedModel { inner, width, tol });
    let curve = ExponentCurve::for_model(model, &OrderGrid::sub_one(SUB_ONE_NODES))?;
    sub_one_exponent(rate, &curve)
}

/// Default input/output size cap of the Haroutunian solver.
pub const HAROUTUNIAN_CAP: usize = 4;

/// Settings of the Haroutunian cutting-plane solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaroutunianOptions {
    /// Target gap between the best auxiliary channel and the cutting-plane
    /// lower bound.
    pub tol: f64,
    /// Largest admissible input or output alphabet.
    pub cap: usize,
    pub max_iterations: usize,
    /// Random restarts of the local check.
    pub restarts: u64,
    pub seed: u64,
}

impl Default for HaroutunianOptions {
    fn default() -> Self {
        HaroutunianOptions {
            tol: 1e-7,
            cap: HAROUTUNIAN_CAP,
            max_iterations: 4000,
            restarts: 8,
            seed: 0x4A5_0001,
        }
    }
}

/// A solved Haroutunian exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaroutunianResult {
    pub rate: f64,
    /// max_x D_1(V(x)‖W(x)) of the best auxiliary channel found.
    pub value: f64,
    /// Cutting-plane lower bound on the exponent.
    pub lower_bound: f64,
    /// The output measure Q with max_x D_1(V(x)‖Q) ≤ R.
    pub center: ProbabilityMeasure,
    /// The auxiliary channel V, absent when the exponent is zero.
    pub auxiliary: Option<DiscreteChannel>,
    pub iterations: usize,
    /// Best value of the random-restart local search.
    pub local_value: f64,
    /// Local search agrees with the cutting plane within the tolerance.
    pub certified: bool,
}

/// E_h(R,W) = min over channels V with C_1(V) ≤ R of max_x D_1(V(x)‖W(x)).
pub fn haroutunian_exponent(rate: f64, w: &DiscreteChannel, tol: f64) -> Result<f64> {
    Ok(haroutunian_solve(
        rate,
        w,
        &HaroutunianOptions {
            tol,
            ..Default::default()
        },
    )?
    .value)
}

/// Rate excess tolerated at the boundary Q(supp W(x)) = e^{−R}.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Value of one row's inner problem min{D_1(v‖w) : D_1(v‖Q) ≤ R} and a
/// supporting cut of it at Q.
struct RowEval {
    value: f64,
    v: Vec<f64>,
    /// (offset, gradient) of the affine minorant h(Q') = offset + grad·Q'.
    cut: Option<(f64, Vec<f64>)>,
}

/// Solves the inner problem through the tilted family v_λ ∝ w^λ Q^{1−λ},
/// picking λ with D_1(v_λ‖Q) = R. Every λ gives the convex minorant
/// ((1−λ)/λ)(D_λ(w‖Q') − R) of the row value, whose tangent at Q is the cut.
fn row_eval(w: &[f64], q: &[f64], rate: f64) -> RowEval {
    let kl = |v: &[f64], r: &[f64]| divergence_slices(1.0, v, r).to_f64();
    if kl(w, q) <= rate {
        return RowEval {
            value: 0.0,
            v: w.to_vec(),
            cut: None,
        };
    }
    let mass: f64 = w
        .iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(_, b)| b)
        .sum();
    if mass <= 0.0 || -mass.ln() > rate + BOUNDARY_SLACK {
        return RowEval {
            value: f64::INFINITY,
            v: w.to_vec(),
            cut: None,
        };
    }
    let tilt = |l: f64| tilt_slices(l, w, q).expect("overlapping supports");
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..crate::roots::MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kl(&tilt(mid), q) <= rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lam = lo.max(1e-300);
    let v = if lo > 0.0 {
        tilt(lo)
    } else {
        let mut r: Vec<f64> = w
            .iter()
            .zip(q)
            .map(|(a, b)| if *a > 0.0 { *b } else { 0.0 })
            .collect();
        r.iter_mut().for_each(|x| *x /= mass);
        r
    };
    let value = kl(&v, w);
    let cut = (lo > 1e-12).then(|| {
        let k = (1.0 - lam) / lam;
        let h = k * (divergence_slices(lam, w, q).to_f64() - rate);
        let grad: Vec<f64> = v
            .iter()
            .zip(q)
            .map(|(vy, qy)| if *vy > 0.0 { -k * vy / qy } else { 0.0 })
            .collect();
        let offset = h - grad.iter().zip(q).map(|(g, qy)| g * qy).sum::<f64>();
        (offset, grad)
    });
    RowEval { value, v, cut }
}

fn worst_row(w: &DiscreteChannel, q: &[f64], rate: f64) -> (f64, Vec<RowEval>) {
    let rows: Vec<RowEval> = w.rows().map(|r| row_eval(r, q, rate)).collect();
    (rows.iter().map(|r| r.value).fold(0.0, f64::max), rows)
}

/// Cutting-plane solver for the Haroutunian exponent over the output
/// measure Q, certified by a random-restart local search.
///
/// The search is warm-started at the Rényi center of the order maximizing
/// the sphere-packing objective.
pub fn haroutunian_solve(
    rate: f64,
    w: &DiscreteChannel,
    opts: &HaroutunianOptions,
) -> Result<HaroutunianResult> {
    let (k, m) = (w.input_size(), w.output_size());
    if k > opts.cap || m > opts.cap {
        return Err(Error::CapExceeded {
            what: "haroutunian alphabet",
            size: k.max(m) as u128,
            cap: opts.cap as u128,
        });
    }
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::OutOfRange {
            name: "rate",
            value: rate,
        });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::OutOfRange {
            name: "tol",
            value: opts.tol,
        });
    }
    let c1 = solve_capacity(Order::ONE, w, DEFAULT_TOL)?;
    if rate >= c1.value {
        return Ok(HaroutunianResult {
            rate,
            value: 0.0,
            lower_bound: 0.0,
            center: c1.center,
            auxiliary: None,
            iterations: 0,
            local_value: 0.0,
            certified: true,
        });
    }

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let qv: Vec<_> = (0..m).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    lp.add_constraint(qv.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    let floor = (-rate).exp();
    for r in w.rows() {
        let expr: Vec<_> = r
            .iter()
            .zip(&qv)
            .filter(|(p, _)| **p > 0.0)
            .map(|(_, &v)| (v, 1.0))
            .collect();
        lp.add_constraint(expr, ComparisonOp::Ge, floor);
    }
    let mut sol = lp
        .solve()
        .map_err(|e| Error::Precondition(format!("haroutunian domain is empty: {e}")))?;

    let warm = warm_start(rate, w)?;
    let mut best_q = warm.clone();
    let (mut best, _) = worst_row(w, &warm, rate);
    let mut lower = 0.0f64;
    let mut iterations = 0;
    let mut point = warm;
    while iterations < opts.max_iterations {
        iterations += 1;
        let (value, rows) = worst_row(w, &point, rate);
        if value < best {
            best = value;
            best_q = point.clone();
        }
        let mut added = false;
        for r in rows.iter().filter(|r| r.value > 0.0) {
            if let Some((offset, grad)) = &r.cut {
                let mut expr: Vec<_> = grad.iter().zip(&qv).map(|(g, &v)| (v, -g)).collect();
                expr.push((t, 1.0));
                sol = sol
                    .add_constraint(expr, ComparisonOp::Ge, *offset)
                    .map_err(|e| Error::Precondition(format!("cutting-plane LP failed: {e}")))?;
                added = true;
            }
        }
        lower = lower.max(sol.objective());
        if best - lower <= opts.tol || !added {
            break;
        }
        let raw: Vec<f64> = qv.iter().map(|&v| sol[v].max(0.0)).collect();
        let s: f64 = raw.iter().sum();
        point = raw.iter().map(|x| x / s).collect();
    }

    let local_value = local_search(w, rate, &best_q, opts);
    let (value, rows) = worst_row(w, &best_q, rate);
    let auxiliary = DiscreteChannel::new(rows.into_iter().map(|r| r.v).collect()).ok();
    let certified = best - lower <= opts.tol
        && local_value >= lower - opts.tol
        && value <= local_value + opts.tol;
    Ok(HaroutunianResult {
        rate,
        value,
        lower_bound: lower.min(value),
        center: ProbabilityMeasure::from_unnormalized(best_q)?,
        auxiliary,
        iterations,
        local_value,
        certified,
    })
}

/// Rényi center at the order maximizing the sphere-packing objective.
fn warm_start(rate: f64, w: &DiscreteChannel) -> Result<Vec<f64>> {
    let objective = |a: f64| -> f64 {
        solve_capacity(Order::new(a).expect("order in (0,1)"), w, DEFAULT_TOL)
            .map_or(f64::NEG_INFINITY, |s| (1.0 - a) / a * (s.value - rate))
    };
    let (a, _) = golden_max(objective, 0.01, 0.999, 1e-4);
    let s = solve_capacity(Order::new(a)?, w, DEFAULT_TOL)?;
    let m = w.output_size() as f64;
    Ok(s.center
        .weights()
        .iter()
        .map(|x| x * (1.0 - 1e-9) + 1e-9 / m)
        .collect())
}

const LOCAL_PASSES: usize = 400;

/// Pattern search on max_x g_x(Q) from random feasible starts: moves mass
/// between pairs of outputs with shrinking step.
fn local_search(w: &DiscreteChannel, rate: f64, anchor: &[f64], opts: &HaroutunianOptions) -> f64 {
    let m = anchor.len();
    let objective = |q: &[f64]| worst_row(w, q, rate).0;
    (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(opts.seed, r);
            let d = dirichlet(&mut rng, m);
            let mut mix = 0.5;
            let mut q: Vec<f64> = anchor
                .iter()
                .zip(&d)
                .map(|(a, b)| (1.0 - mix) * a + mix * b)
                .collect();
            let mut f = objective(&q);
            while !f.is_finite() && mix > 1e-6 {
                mix *= 0.5;
                q = anchor
                    .iter()
                    .zip(&d)
                    .map(|(a, b)| (1.0 - mix) * a + mix * b)
                    .collect();
                f = objective(&q);
            }
            let mut step = 0.1f64;
            let mut passes = 0;
            while step > 1e-10 && passes < LOCAL_PASSES {
                passes += 1;
                let mut improved = false;
                for i in 0..m {
                    for j in 0..m {
                        if i == j {
                            continue;
                        }
                        let delta = step.min(q[i] * 0.999);
                        if delta <= 0.0 {
                            continue;
                        }
                        let mut trial = q.clone();
                        trial[i] -= delta;
                        trial[j] += delta;
                        let ft = objective(&trial);
                        if ft < f - 1e-15 {
                            q = trial;
                            f = ft;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            f
        })
        .reduce(|| f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_channel;

    fn bsc_curve() -> ExponentCurve {
        ExponentCurve::for_channel(
            &DiscreteChannel::bsc(0.1).unwrap(),
            &OrderGrid::default(),
            1e-12,
        )
        .unwrap()
    }

    /// C_α of a BSC from its uniform center.
    fn bsc_capacity(p: f64, a: f64) -> f64 {
        divergence_slices(a, &[1.0 - p, p], &[0.5, 0.5]).to_f64()
    }

    #[test]
    fn default_grid_layout() {
        let g = OrderGrid::default();
        let sub = g.orders().iter().filter(|&&a| a < 1.0).count();
        assert_eq!(sub, 64);
        assert!(g.orders().contains(&1.0));
        assert_eq!(g.alpha_max(), 8.0);
        assert!(g.orders().windows(2).all(|p| p[0] < p[1]));
        assert!(OrderGrid::new(4, 0.5, 0.25).is_err());
    }

    #[test]
    fn curve_is_monotone_and_interpolates() {
        let c = bsc_curve();
        assert!(c.violations().is_empty());
        let p = c.points()[10];
        assert_eq!(c.interpolate(p.order), Some(p.capacity));
        let mid = c
            .interpolate(0.5 * (c.points()[3].order + c.points()[4].order))
            .unwrap();
        assert!(mid >= c.points()[3].capacity && mid <= c.points()[4].capacity);
        assert_eq!(c.interpolate(9.0), None);
    }

    #[test]
    fn zero_at_capacity() {
        let c = bsc_curve();
        let c1 = c.capacity_at(1.0).unwrap();
        let r = sphere_packing_exponent(c1, &c, 1e-12).unwrap();
        assert!(r.value.to_f64().abs() < 1e-9);
    }

    #[test]
    fn bsc_half_rate_matches_dense_grid() {
        let c = bsc_curve();
        let rate = c.capacity_at(0.5).unwrap();
        let r = sphere_packing_exponent(rate, &c, 1e-12).unwrap();
        let mut grid = f64::NEG_INFINITY;
        for i in 0..=5000 {
            let a = 0.5 + i as f64 * 1e-4;
            if a < 1.0 {
                grid = grid.max((1.0 - a) / a * (bsc_capacity(0.1, a) - rate));
            }
        }
        assert!(
            (r.value.to_f64() - grid).abs() < 1e-6,
            "{} vs {grid}",
            r.value
        );
        assert!(matches!(r.regime, Regime::SubOne { phi } if (phi - 0.5).abs() < 1e-6));
    }

    #[test]
    fn above_capacity_uses_orders_above_one() {
        let c = bsc_curve();
        let rate = c.capacity_at(1.0).unwrap() + 0.1;
        let r = sphere_packing_exponent(rate, &c, 1e-12).unwrap();
        assert!(r.value.to_f64() > 0.0);
        assert!(r.maximizing_order.unwrap().value() > 1.0);
        let mut grid = f64::NEG_INFINITY;
        for i in 0..=7000 {
            let a = 1.0 + i as f64 * 1e-3;
            grid = grid.max((1.0 - a) / a * (bsc_capacity(0.1, a) - rate));
        }
        assert!((r.value.to_f64() - grid).abs() < 1e-6);
        let big = sphere_packing_exponent(0.69, &c, 1e-12).unwrap();
        assert_eq!(big.regime, Regime::AboveChi);
        assert!(big.tail_bound.is_some());
    }

    #[test]
    fn below_zero_plus_is_infinite() {
        let w = DiscreteChannel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let c =
            ExponentCurve::for_channel(&w, &OrderGrid::new(8, 2.0, 0.5).unwrap(), 1e-10).unwrap();
        let r = sphere_packing_exponent(0.3, &c, 1e-10).unwrap();
        assert_eq!(r.value, ExtReal::Infinite);
        assert_eq!(r.regime, Regime::BelowZeroPlus);
    }

    #[test]
    fn order_inversion() {
        let c = bsc_curve();
        let r = c.capacity_at(0.5).unwrap();
        assert!((order_for_rate(&c, r, 1e-13).unwrap().value() - 0.5).abs() < 1e-6);
        let phi = order_for_rate(&c, 0.3, 1e-12).unwrap();
        assert!((bsc_capacity(0.1, phi.value()) - 0.3).abs() <= 1e-12);
        let c1 = c.capacity_at(1.0).unwrap();
        let near = order_for_rate(&c, c1 - 1e-9, 1e-12).unwrap().value();
        assert!(near > 0.99 && near <= 1.0);
        assert!(order_for_rate(&c, 1.0, 1e-12).is_err());
    }

    #[test]
    fn average_sp_brackets() {
        assert_eq!(
            average_sp_exponent(0.1, 0.2, &DiscreteChannel::bsc(0.5).unwrap(), 1e-10).unwrap(),
            0.0
        );
        let w = DiscreteChannel::bsc(0.1).unwrap();
        let c = bsc_curve();
        let rate = c.capacity_at(0.5).unwrap();
        let esp = sphere_packing_exponent(rate, &c, 1e-12)
            .unwrap()
            .value
            .to_f64();
        let v = average_sp_exponent(0.05, rate, &w, 1e-10).unwrap();
        assert!(
            v >= esp - 1e-9 && v <= esp + (0.05 / 0.95) * rate / 0.25,
            "{v} {esp}"
        );
    }

    #[test]
    fn haroutunian_exceeds_sphere_packing_on_the_z_like_channel() {
        let w = DiscreteChannel::haroutunian();
        let c = ExponentCurve::for_channel(&w, &OrderGrid::default(), 1e-12).unwrap();
        let rate = c.capacity_at(0.5).unwrap();
        let esp = sphere_packing_exponent(rate, &c, 1e-12)
            .unwrap()
            .value
            .to_f64();
        let h = haroutunian_solve(rate, &w, &HaroutunianOptions::default()).unwrap();
        assert!(h.certified, "{h:?}");
        assert!((esp - 0.013_219_259_081_604_64).abs() < 1e-8);
        assert!(
            (h.value - 0.031_366_965_622_589_51).abs() < 1e-6,
            "{}",
            h.value
        );
        assert!(h.value - esp > 1e-3);
    }

    #[test]
    fn haroutunian_equals_sphere_packing_on_bsc() {
        let w = DiscreteChannel::bsc(0.1).unwrap();
        let c = bsc_curve();
        let rate = c.capacity_at(0.5).unwrap();
        let esp = sphere_packing_exponent(rate, &c, 1e-12)
            .unwrap()
            .value
            .to_f64();
        let h = haroutunian_exponent(rate, &w, 1e-8).unwrap();
        assert!((h - esp).abs() < 1e-4);
        assert_eq!(haroutunian_exponent(1.0, &w, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn haroutunian_dominates_on_random_channels() {
        for s in 0..3 {
            let w = random_channel(&mut substream(21, s), 3, 3);
            let c = ExponentCurve::for_channel(&w, &OrderGrid::default(), 1e-11).unwrap();
            let rate = c.capacity_at(0.6).unwrap();
            let esp = sphere_packing_exponent(rate, &c, 1e-12)
                .unwrap()
                .value
                .to_f64();
            let h = haroutunian_solve(rate, &w, &HaroutunianOptions::default()).unwrap();
            assert!(h.value >= esp - 1e-6, "{} < {esp}", h.value);
        }
    }

    #[test]
    fn oversized_channel_is_rejected() {
        let w = random_channel(&mut substream(1, 1), 5, 2);
        assert!(matches!(
            haroutunian_exponent(0.01, &w, 1e-6),
            Err(Error::CapExceeded { .. })
        ));
    }
}
