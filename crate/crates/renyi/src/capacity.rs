//! Rényi capacity, radius and center, with minimax certificates.
//!
//! The capacity C_α(W) = sup_P I_α(P;W) equals the radius
//! min_Q max_x D_α(W(x)‖Q), attained at the unique Rényi center. The solver
//! maximizes I_α over the prior and certifies the result with the duality gap
//!
//! ```text
//! gap = max_x D_α(W(x) ‖ q_{α,P}) − I_α(P;W) ≥ 0.
//! ```
//!
//! It starts with a few multiplicative fixed-point steps
//! P(x) ← P(x)·e^{D_α(W(x)‖q_{α,P})}/Σ and then runs an active-set Newton
//! iteration on Σ_y [Σ_x P(x) W(y|x)^α]^{1/α} (or on I_1 at α = 1), which is
//! concave (α > 1) or convex (α < 1) in P. A step is accepted when it raises
//! I_α or lowers the gap; damping is raised only when neither happens.
//!
//! Averaged centers and capacities integrate over the order window
//! (α − εα, α + ε(1−α)) by composite Gauss–Legendre quadrature.

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    information_slices, log_mean_weights, mean_slices, DiscreteChannel, InputDistribution,
};
use crate::error::{Error, Result};
use crate::measures::{divergence_slices, tv_slices, ExtReal, Order, ProbabilityMeasure};
use crate::sampling::{dirichlet, substream};

/// Default duality-gap tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Gauss–Legendre nodes per quadrature panel.
pub const DEFAULT_NODES: usize = 16;

const MAX_NEWTON: usize = 600;
const WARM_STEPS: usize = 20;
const RESTARTS: u64 = 5;
const RESTART_SEED: u64 = 0x5EED_CAFE;

/// A certified Rényi capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitySolution {
    pub order: Order,
    /// The dual value max_x D_α(W(x)‖center), an upper bound on C_α.
    pub value: f64,
    pub center: ProbabilityMeasure,
    pub optimal_prior: InputDistribution,
    /// I_α(optimal_prior; W), a lower bound on C_α.
    pub primal: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Order-α Rényi capacity, failing when the gap stays above `tol`.
pub fn renyi_capacity(order: Order, w: &DiscreteChannel, tol: f64) -> Result<CapacitySolution> {
    let sol = solve_capacity(order, w, tol)?;
    if sol.converged {
        Ok(sol)
    } else {
        Err(Error::Unconverged {
            tol,
            gap: sol.duality_gap,
        })
    }
}

/// Order-α Rényi capacity returning the best certificate found, converged
/// or not.
pub fn solve_capacity(order: Order, w: &DiscreteChannel, tol: f64) -> Result<CapacitySolution> {
    if !(tol > 0.0) {
        return Err(Error::OutOfRange {
            name: "tol",
            value: tol,
        });
    }
    let a = order.value();
    let k = w.input_size();
    let mut best = Certificate::new();
    let mut iterations = run(a, w, tol, vec![1.0 / k as f64; k], &mut best);
    for r in 0..RESTARTS {
        if best.gap() <= tol {
            break;
        }
        let start = dirichlet(&mut substream(RESTART_SEED, r), k);
        iterations += run(a, w, tol, start, &mut best);
    }
    let gap = best.gap().max(0.0);
    Ok(CapacitySolution {
        order,
        value: best.dual,
        center: ProbabilityMeasure::from_unnormalized(best.center)?,
        optimal_prior: InputDistribution::new(best.prior)?,
        primal: best.primal,
        duality_gap: gap,
        iterations,
        converged: gap <= tol,
    })
}

/// Best primal and dual points seen so far.
struct Certificate {
    dual: f64,
    center: Vec<f64>,
    primal: f64,
    prior: Vec<f64>,
}

impl Certificate {
    fn new() -> Self {
        Certificate {
            dual: f64::INFINITY,
            center: Vec::new(),
            primal: f64::NEG_INFINITY,
            prior: Vec::new(),
        }
    }

    fn gap(&self) -> f64 {
        self.dual - self.primal
    }

    fn offer(&mut self, s: &State, p: &[f64]) {
        if s.dual < self.dual {
            self.dual = s.dual;
            self.center = s.q.clone();
        }
        if s.primal > self.primal {
            self.primal = s.primal;
            self.prior = p.to_vec();
        }
    }
}

struct State {
    q: Vec<f64>,
    d: Vec<f64>,
    primal: f64,
    dual: f64,
}

impl State {
    fn at(a: f64, p: &[f64], w: &DiscreteChannel) -> Self {
        let q = mean_slices(a, p, w);
        let d: Vec<f64> = w
            .rows()
            .map(|r| divergence_slices(a, r, &q).to_f64())
            .collect();
        let dual = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let primal = information_slices(a, p, w);
        State { q, d, primal, dual }
    }

    fn gap(&self) -> f64 {
        self.dual - self.primal
    }
}

fn normalize(p: &mut [f64]) {
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
}

/// One solver pass from `p`; returns the iteration count.
fn run(a: f64, w: &DiscreteChannel, tol: f64, mut p: Vec<f64>, best: &mut Certificate) -> usize {
    let mut state = State::at(a, &p, w);
    best.offer(&state, &p);
    for _ in 0..WARM_STEPS {
        if state.gap() <= tol || !state.dual.is_finite() {
            break;
        }
        let m = state.dual;
        for (px, dx) in p.iter_mut().zip(&state.d) {
            *px *= (dx - m).exp();
        }
        normalize(&mut p);
        state = State::at(a, &p, w);
        best.offer(&state, &p);
    }
    let pmax = p.iter().copied().fold(0.0, f64::max);
    let mut active: Vec<usize> = (0..p.len()).filter(|&x| p[x] > 1e-12 * pmax).collect();
    for (x, px) in p.iter_mut().enumerate() {
        if !active.contains(&x) {
            *px = 0.0;
        }
    }
    normalize(&mut p);
    state = State::at(a, &p, w);
    best.offer(&state, &p);

    let mut mu = 1e-8;
    let mut iters = WARM_STEPS;
    while iters < MAX_NEWTON {
        iters += 1;
        if state.gap() <= tol {
            break;
        }
        if let Some(dp) = newton_direction(a, &p, w, &active, mu) {
            if dp.iter().any(|v| v.abs() > 1e-17) {
                let mut tmax: f64 = 1.0;
                let mut block = None;
                for (i, &x) in active.iter().enumerate() {
                    if dp[i] < 0.0 && p[x] + tmax * dp[i] < 0.0 {
                        tmax = -p[x] / dp[i];
                        block = Some(x);
                    }
                }
                let mut trial = p.clone();
                for (i, &x) in active.iter().enumerate() {
                    trial[x] = (trial[x] + tmax * dp[i]).max(0.0);
                }
                if let Some(x) = block {
                    trial[x] = 0.0;
                }
                normalize(&mut trial);
                let next = State::at(a, &trial, w);
                if next.primal > state.primal || next.gap() < state.gap() {
                    p = trial;
                    state = next;
                    best.offer(&state, &p);
                    mu = (mu / 10.0).max(1e-12);
                    if let Some(x) = block {
                        active.retain(|&y| y != x);
                    }
                    continue;
                }
            }
            if mu < 1e6 {
                mu *= 10.0;
                continue;
            }
        } else if mu < 1e6 {
            mu *= 10.0;
            continue;
        }
        mu = 1e-8;
        let inside = active
            .iter()
            .map(|&x| state.d[x])
            .fold(f64::NEG_INFINITY, f64::max);
        let candidate = (0..p.len())
            .filter(|x| !active.contains(x))
            .max_by(|&x, &y| state.d[x].total_cmp(&state.d[y]));
        match candidate {
            Some(x) if state.d[x] > inside => {
                p[x] = 1e-6;
                normalize(&mut p);
                active.push(x);
                active.sort_unstable();
                state = State::at(a, &p, w);
                best.offer(&state, &p);
            }
            _ => break,
        }
    }
    iters
}

/// Newton direction on the active face for the concave surrogate of I_α.
fn newton_direction(
    a: f64,
    p: &[f64],
    w: &DiscreteChannel,
    active: &[usize],
    mu: f64,
) -> Option<Vec<f64>> {
    let n = active.len();
    if n < 2 {
        return Some(vec![0.0; n]);
    }
    let (g, h) = gradient_hessian(a, p, w, active);
    let scale = h.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut k = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = h[i * n + j];
        }
        k[(i, i)] -= mu * scale;
        k[(i, n)] = 1.0;
        k[(n, i)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n + 1);
    for i in 0..n {
        rhs[i] = -g[i];
    }
    let sol = k.lu().solve(&rhs)?;
    let dp: Vec<f64> = (0..n).map(|i| sol[i]).collect();
    dp.iter().all(|v| v.is_finite()).then_some(dp)
}

/// Gradient and row-major Hessian on the active inputs, up to a common
/// positive factor.
fn gradient_hessian(
    a: f64,
    p: &[f64],
    w: &DiscreteChannel,
    active: &[usize],
) -> (Vec<f64>, Vec<f64>) {
    let n = active.len();
    let ny = w.output_size();
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n * n];
    if a == 1.0 {
        let mut s = vec![0.0; ny];
        for &x in active {
            for (sy, &v) in s.iter_mut().zip(w.row(x)) {
                *sy += p[x] * v;
            }
        }
        for (i, &x) in active.iter().enumerate() {
            let r = w.row(x);
            g[i] = (0..ny)
                .filter(|&y| r[y] > 0.0)
                .map(|y| r[y] * (r[y].ln() - s[y].ln() - 1.0))
                .sum();
            for (j, &xp) in active.iter().enumerate() {
                let rp = w.row(xp);
                h[i * n + j] = -(0..ny)
                    .filter(|&y| s[y] > 0.0)
                    .map(|y| r[y] * rp[y] / s[y])
                    .sum::<f64>();
            }
        }
        return (g, h);
    }
    let sign = if a > 1.0 { 1.0 } else { -1.0 };
    let l = log_mean_weights(a, p, w);
    let m = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lw: Vec<Vec<f64>> = active
        .iter()
        .map(|&x| w.row(x).iter().map(|v| a * v.ln()).collect())
        .collect();
    for i in 0..n {
        g[i] = sign / a
            * (0..ny)
                .filter(|&y| l[y].is_finite() && lw[i][y].is_finite())
                .map(|y| ((1.0 - a) * l[y] + lw[i][y] - m).exp())
                .sum::<f64>();
        for j in i..n {
            let v = sign / a
                * (1.0 / a - 1.0)
                * (0..ny)
                    .filter(|&y| l[y].is_finite() && lw[i][y].is_finite() && lw[j][y].is_finite())
                    .map(|y| ((1.0 - 2.0 * a) * l[y] + lw[i][y] + lw[j][y] - m).exp())
                    .sum::<f64>();
            h[i * n + j] = v;
            h[j * n + i] = v;
        }
    }
    (g, h)
}

/// Order-α Rényi radius max_x D_α(W(x)‖q).
pub fn renyi_radius(order: Order, w: &DiscreteChannel, q: &ProbabilityMeasure) -> Result<ExtReal> {
    if q.size() != w.output_size() {
        return Err(Error::DimensionMismatch {
            left: q.size(),
            right: w.output_size(),
        });
    }
    Ok(radius_slices(order.value(), w, q.weights()))
}

pub(crate) fn radius_slices(a: f64, w: &DiscreteChannel, q: &[f64]) -> ExtReal {
    w.rows()
        .map(|r| divergence_slices(a, r, q))
        .fold(ExtReal::Finite(f64::NEG_INFINITY), ExtReal::max)
}

/// Capacities sampled on an order grid.
pub fn capacity_curve(
    w: &DiscreteChannel,
    grid: &crate::exponents::OrderGrid,
    tol: f64,
) -> Result<crate::exponents::ExponentCurve> {
    crate::exponents::ExponentCurve::for_channel(w, grid, tol)
}

/// Lower end of the C_{0+} bracket: the order-0 capacity
/// C_0 = −ln max_Q min_x Q(supp W(x)), solved as a linear program.
pub fn order_zero_capacity(w: &DiscreteChannel) -> Result<f64> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let t = lp.add_var(1.0, (0.0, 1.0));
    let q: Vec<_> = (0..w.output_size())
        .map(|_| lp.add_var(0.0, (0.0, 1.0)))
        .collect();
    lp.add_constraint(q.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    for r in w.rows() {
        let mut expr: Vec<_> = r
            .iter()
            .zip(&q)
            .filter(|(v, _)| **v > 0.0)
            .map(|(_, &v)| (v, 1.0))
            .collect();
        expr.push((t, -1.0));
        lp.add_constraint(expr, ComparisonOp::Ge, 0.0);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::Precondition(format!("order-zero LP: {e}")))?;
    Ok(-sol.objective().ln().min(0.0))
}

/// Smallest order used for the C_{0+} estimate.
pub const ZERO_PLUS_ORDER: f64 = 1e-3;

/// Bracket on C_{0+}(W) = lim_{α↓0} C_α(W) with a Richardson point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroPlusBracket {
    /// C_0(W), a lower bound by monotonicity of C_α in α.
    pub lower: f64,
    /// Dual value of C_α at α = 1e-3, an upper bound.
    pub upper: f64,
    /// 2C_{α/2} − C_α, clamped into the bracket.
    pub estimate: f64,
}

pub fn zero_plus_bracket(w: &DiscreteChannel, tol: f64) -> Result<ZeroPlusBracket> {
    let lower = order_zero_capacity(w)?;
    let c1 = solve_capacity(Order::new(ZERO_PLUS_ORDER)?, w, tol)?;
    let c2 = solve_capacity(Order::new(ZERO_PLUS_ORDER / 2.0)?, w, tol)?;
    let upper = c2.value.min(c1.value).max(lower);
    let estimate = (2.0 * c2.value - c1.value).clamp(lower, upper);
    Ok(ZeroPlusBracket {
        lower,
        upper,
        estimate,
    })
}

/// The average Rényi center q^ε_α and its quadrature data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedCenter {
    pub order: Order,
    pub width: f64,
    pub center: ProbabilityMeasure,
    pub node_orders: Vec<f64>,
    /// Normalized quadrature weights (sum to one).
    pub node_weights: Vec<f64>,
}

fn check_window(order: Order, eps: f64) -> Result<(f64, f64)> {
    let a = order.value();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Precondition(format!("order {a} must lie in (0,1)")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
        });
    }
    Ok((a - eps * a, a + eps * (1.0 - a)))
}

/// Composite Gauss–Legendre nodes and normalized weights on `[lo, hi]`.
pub(crate) fn composite_rule(
    lo: f64,
    hi: f64,
    panels: usize,
    nodes: usize,
) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(nodes.max(1).try_into().expect("nonzero"));
    let width = (hi - lo) / panels as f64;
    let mut xs = Vec::with_capacity(panels * nodes);
    let mut ws = Vec::with_capacity(panels * nodes);
    for k in 0..panels {
        let a = lo + k as f64 * width;
        for &(x, wt) in rule.as_node_weight_pairs() {
            xs.push(a + 0.5 * width * (x + 1.0));
            ws.push(0.5 * wt / panels as f64);
        }
    }
    (xs, ws)
}

/// Average Rényi center over (α − εα, α + ε(1−α)).
///
/// Starts from one panel of `nodes` Gauss–Legendre nodes and doubles the
/// panel count until the center moves less than `tol` in total variation.
pub fn average_center(
    order: Order,
    eps: f64,
    w: &DiscreteChannel,
    nodes: usize,
    tol: f64,
) -> Result<AveragedCenter> {
    let (lo, hi) = check_window(order, eps)?;
    let mut panels = 1;
    let mut prev: Option<Vec<f64>> = None;
    loop {
        let (xs, ws) = composite_rule(lo, hi, panels, nodes);
        let centers: Vec<Vec<f64>> = xs
            .par_iter()
            .map(|&b| {
                solve_capacity(Order::new(b)?, w, DEFAULT_TOL).map(|s| s.center.weights().to_vec())
            })
            .collect::<Result<_>>()?;
        let mut c = vec![0.0; w.output_size()];
        for (q, wt) in centers.iter().zip(&ws) {
            for (cy, qy) in c.iter_mut().zip(q) {
                *cy += wt * qy;
            }
        }
        let done =
            prev.as_ref().is_some_and(|p| tv_slices(p, &c) < tol) || panels >= 64 || nodes == 1;
        if done {
            return Ok(AveragedCenter {
                order,
                width: eps,
                center: ProbabilityMeasure::from_unnormalized(c)?,
                node_orders: xs,
                node_weights: ws,
            });
        }
        prev = Some(c);
        panels *= 2;
    }
}

/// Weight 1 ∨ (α(1−β))/((1−α)β) of the average capacity integrand.
pub(crate) fn avcap_weight(a: f64, b: f64) -> f64 {
    (a * (1.0 - b) / ((1.0 - a) * b)).max(1.0)
}

/// Average Rényi capacity C^ε_α for an arbitrary capacity function of the
/// order, refined by panel doubling until the value moves less than `tol`.
pub fn average_of<F>(order: Order, eps: f64, tol: f64, capacity: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (lo, hi) = check_window(order, eps)?;
    let a = order.value();
    let mut panels = 1;
    let mut prev = f64::NAN;
    loop {
        let (xs, ws) = composite_rule(lo, hi, panels, DEFAULT_NODES);
        let vals: Vec<f64> = xs
            .par_iter()
            .map(|&b| capacity(b).map(|c| avcap_weight(a, b) * c))
            .collect::<Result<_>>()?;
        let v: f64 = vals.iter().zip(&ws).map(|(c, w)| c * w).sum();
        if (v - prev).abs() < tol || panels >= 64 {
            return Ok(v);
        }
        prev = v;
        panels *= 2;
    }
}

/// Average Rényi capacity
/// (1/ε)∫ [1 ∨ (α(1−β))/((1−α)β)] C_β(W) dβ over (α − εα, α + ε(1−α)).
pub fn average_capacity(order: Order, eps: f64, w: &DiscreteChannel, tol: f64) -> Result<f64> {
    average_of(order, eps, tol, |b| {
        Ok(solve_capacity(Order::new(b)?, w, DEFAULT_TOL)?.value)
    })
}

/// The three terms of the van Erven–Harremoës bound and its slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EhbCertificate {
    pub capacity: f64,
    pub center_divergence: f64,
    pub radius: f64,
    /// radius − capacity − center_divergence.
    pub slack: f64,
}

/// Checks R_α(W‖q) ≥ C_α(W) + D_α(q_{α,W}‖q).
pub fn ehb_certificate(
    order: Order,
    w: &DiscreteChannel,
    q: &ProbabilityMeasure,
    tol: f64,
) -> Result<EhbCertificate> {
    let sol = renyi_capacity(order, w, tol)?;
    let radius = renyi_radius(order, w, q)?.to_f64();
    let center_divergence =
        divergence_slices(order.value(), sol.center.weights(), q.weights()).to_f64();
    Ok(EhbCertificate {
        capacity: sol.value,
        center_divergence,
        radius,
        slack: radius - sol.value - center_divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::renyi_information;
    use crate::sampling::{random_channel, random_sparse_channel};

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn trivial_and_noiseless_channels() {
        for a in [0.3, 1.0, 2.0] {
            let s = renyi_capacity(
                Order::new(a).unwrap(),
                &DiscreteChannel::bsc(0.5).unwrap(),
                1e-10,
            )
            .unwrap();
            assert!(s.value.abs() < 1e-14);
            assert!((s.center.weights()[0] - 0.5).abs() < 1e-12);
        }
        let s = renyi_capacity(Order::HALF, &DiscreteChannel::bsc(0.0).unwrap(), 1e-10).unwrap();
        assert!((s.value - LN2).abs() < 1e-10);
        assert!((s.center.weights()[0] - 0.5).abs() < 1e-9);
        assert!((s.optimal_prior.masses()[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn bsc_order_one_matches_closed_form() {
        let s = renyi_capacity(Order::ONE, &DiscreteChannel::bsc(0.1).unwrap(), 1e-10).unwrap();
        assert!((s.value - 0.368_064_207_168_497_1).abs() < 1e-9);
        assert!(s.duality_gap <= 1e-9);
    }

    #[test]
    fn gap_certificates_on_random_channels() {
        for t in 0..40 {
            let mut rng = substream(11, t);
            let k = 2 + (t as usize % 4);
            let m = 2 + (t as usize / 4 % 4);
            let w = if t % 3 == 0 {
                random_sparse_channel(&mut rng, k, m, 0.4)
            } else {
                random_channel(&mut rng, k, m)
            };
            for a in [0.05, 0.3, 0.5, 0.9, 1.0, 1.5, 3.0, 8.0] {
                let s = renyi_capacity(Order::new(a).unwrap(), &w, 1e-10)
                    .unwrap_or_else(|e| panic!("trial {t} order {a}: {e}"));
                let again = renyi_information(s.order, &s.optimal_prior, &w).unwrap();
                assert!((again - s.primal).abs() < 1e-12);
                assert!(s.value - s.primal <= 1e-10 + 1e-15);
            }
        }
    }

    #[test]
    fn duplicate_rows_and_wide_outputs() {
        let w = DiscreteChannel::new(vec![
            vec![0.7, 0.2, 0.1],
            vec![0.7, 0.2, 0.1],
            vec![0.1, 0.1, 0.8],
            vec![0.4, 0.3, 0.3],
        ])
        .unwrap();
        for a in [0.2, 1.0, 4.0] {
            renyi_capacity(Order::new(a).unwrap(), &w, 1e-10).unwrap();
        }
    }

    #[test]
    fn radius_examples() {
        let same = DiscreteChannel::new(vec![vec![0.3, 0.7]; 3]).unwrap();
        let row = ProbabilityMeasure::new(vec![0.3, 0.7]).unwrap();
        assert!(
            renyi_radius(Order::new(1.3).unwrap(), &same, &row)
                .unwrap()
                .to_f64()
                .abs()
                < 1e-14
        );
        let bsc = DiscreteChannel::bsc(0.1).unwrap();
        let u = ProbabilityMeasure::uniform(2).unwrap();
        let r = renyi_radius(Order::HALF, &bsc, &u).unwrap().to_f64();
        assert!((r - (-2.0 * (0.45f64.sqrt() + 0.05f64.sqrt()).ln())).abs() < 1e-14);
        let c = renyi_capacity(Order::HALF, &bsc, 1e-12).unwrap();
        assert!((r - c.value).abs() < 1e-12);
        let point = ProbabilityMeasure::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            renyi_radius(Order::ONE, &bsc, &point).unwrap(),
            ExtReal::Infinite
        );
    }

    #[test]
    fn zero_order_capacity_and_bracket() {
        assert!(
            order_zero_capacity(&DiscreteChannel::bsc(0.1).unwrap())
                .unwrap()
                .abs()
                < 1e-12
        );
        let id = DiscreteChannel::bsc(0.0).unwrap();
        assert!((order_zero_capacity(&id).unwrap() - LN2).abs() < 1e-12);
        let b = zero_plus_bracket(&id, 1e-10).unwrap();
        assert!(b.lower <= b.estimate && b.estimate <= b.upper);
        assert!((b.upper - LN2).abs() < 1e-8);
        let h = zero_plus_bracket(&DiscreteChannel::haroutunian(), 1e-10).unwrap();
        assert!(h.lower.abs() < 1e-12 && h.upper < 1e-3);
    }

    #[test]
    fn averaged_center_of_symmetric_channel_is_uniform() {
        let w = DiscreteChannel::bsc(0.1).unwrap();
        for eps in [0.1, 0.5] {
            let c = average_center(Order::HALF, eps, &w, DEFAULT_NODES, 1e-9).unwrap();
            assert!((c.center.weights()[0] - 0.5).abs() < 1e-9);
            assert!((c.node_weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let (lo, hi) = (0.5 - eps * 0.5, 0.5 + eps * 0.5);
            assert!(c.node_orders.iter().all(|&b| b > lo && b < hi));
        }
    }

    #[test]
    fn single_node_average_is_the_center() {
        let mut rng = substream(3, 0);
        let w = random_channel(&mut rng, 3, 3);
        let c = average_center(Order::new(0.4).unwrap(), 1e-9, &w, 1, 1e-12).unwrap();
        let q = renyi_capacity(Order::new(0.4).unwrap(), &w, 1e-12).unwrap();
        assert!(tv_slices(c.center.weights(), q.center.weights()) < 1e-6);
    }

    #[test]
    fn averaged_center_total_variation_continuity() {
        let w = random_channel(&mut substream(5, 1), 3, 3);
        let c0 = average_center(Order::new(0.4).unwrap(), 0.2, &w, DEFAULT_NODES, 1e-10).unwrap();
        let c1 = average_center(Order::new(0.41).unwrap(), 0.2, &w, DEFAULT_NODES, 1e-10).unwrap();
        let tv = tv_slices(c0.center.weights(), c1.center.weights());
        assert!(tv <= 2.0 / 0.2 * 0.01);
    }

    #[test]
    fn average_capacity_brackets() {
        assert!(
            average_capacity(Order::HALF, 0.3, &DiscreteChannel::bsc(0.5).unwrap(), 1e-10)
                .unwrap()
                .abs()
                < 1e-12
        );
        let w = DiscreteChannel::bsc(0.1).unwrap();
        let c = renyi_capacity(Order::HALF, &w, 1e-12).unwrap().value;
        let v = average_capacity(Order::HALF, 0.1, &w, 1e-10).unwrap();
        assert!(v >= c - 1e-10 && v <= c + (0.1 / 0.9) * c / 0.25);
        let vs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&e| average_capacity(Order::HALF, e, &w, 1e-10).unwrap())
            .collect();
        assert!(vs[0] >= vs[1] && vs[1] >= vs[2] && vs[2] >= c - 1e-10);
    }

    #[test]
    fn ehb_examples() {
        let w = DiscreteChannel::bsc(0.1).unwrap();
        let q = ProbabilityMeasure::new(vec![0.8, 0.2]).unwrap();
        assert!(ehb_certificate(Order::HALF, &w, &q, 1e-10).unwrap().slack >= -1e-10);
        let sol = renyi_capacity(Order::new(1.7).unwrap(), &w, 1e-10).unwrap();
        let e = ehb_certificate(Order::new(1.7).unwrap(), &w, &sol.center, 1e-10).unwrap();
        assert!(e.slack.abs() <= 1e-9);
        let same = DiscreteChannel::new(vec![vec![0.25, 0.75]; 2]).unwrap();
        let e = ehb_certificate(Order::HALF, &same, &q, 1e-10).unwrap();
        assert!(e.slack.abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        let w = DiscreteChannel::bsc(0.1).unwrap();
        assert!(solve_capacity(Order::HALF, &w, 0.0).is_err());
        assert!(average_center(Order::ONE, 0.1, &w, 16, 1e-9).is_err());
        assert!(average_capacity(Order::HALF, 1.0, &w, 1e-9).is_err());
    }
}
