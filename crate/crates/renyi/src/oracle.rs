//! Brute-force ground truth.
//!
//! Exact error probabilities of explicit codes and feedback strategies under
//! maximum-likelihood list decoding, lattice searches for capacities, exact
//! finite-support expectations, and the named verification suites that check
//! the library's inequalities against them. Enumerations are capped; a cap
//! that would be exceeded is an error.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    arimoto_outer_product, gallager_inner, moment_bound_rhs, small_deviation_floor, spb_feedback,
    spb_product, subblock_plan, taylor_gap_bound, tradeoff_channel, CodeParams,
};
use crate::capacity::{ehb_certificate, solve_capacity, DEFAULT_TOL};
use crate::channels::{
    information_slices, product_channel_capped, DiscreteChannel, InputDistribution,
};
use crate::error::{Error, Result};
use crate::measures::{divergence_slices, tilt_slices, tv_slices, Order, ProbabilityMeasure};
use crate::sampling::{dirichlet, random_channel, random_measure, sparse_dirichlet, substream};

/// Default cap on enumerated terms.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Output sequences per parallel chunk; chunk sums are added in order.
const CHUNK: usize = 1024;

fn check_cap(what: &'static str, size: u128, cap: u128) -> Result<()> {
    if size > cap {
        return Err(Error::CapExceeded { what, size, cap });
    }
    Ok(())
}

/// An (M, L) code: `encoder[m]` is the input letter (over a product alphabet
/// when n > 1) sent for message m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeBook {
    pub encoder: Vec<usize>,
    pub n: u64,
    pub list: usize,
}

impl CodeBook {
    pub fn new(encoder: Vec<usize>, n: u64, list: usize) -> Result<Self> {
        if !(list >= 1 && list < encoder.len()) {
            return Err(Error::Precondition(format!(
                "need 1 <= L < M, got M = {}, L = {list}",
                encoder.len()
            )));
        }
        Ok(CodeBook { encoder, n, list })
    }

    pub fn messages(&self) -> usize {
        self.encoder.len()
    }
}

/// Error mass Σ_{m ∉ list} lik[m] of the L most likely messages, ties
/// going to lower indices.
fn missed_mass(lik: &[f64], list: usize, order: &mut Vec<usize>) -> f64 {
    order.clear();
    order.extend(0..lik.len());
    order.sort_by(|&a, &b| lik[b].total_cmp(&lik[a]).then(a.cmp(&b)));
    order[list..].iter().map(|&m| lik[m]).sum()
}

/// The decoded list for output `y`: the L most likely messages, ties to
/// lower indices.
pub fn decode_list(code: &CodeBook, w: &DiscreteChannel, y: usize) -> Vec<usize> {
    let lik: Vec<f64> = code.encoder.iter().map(|&x| w.row(x)[y]).collect();
    let mut order: Vec<usize> = (0..lik.len()).collect();
    order.sort_by(|&a, &b| lik[b].total_cmp(&lik[a]).then(a.cmp(&b)));
    order.truncate(code.list);
    order
}

fn check_code(code: &CodeBook, w: &DiscreteChannel) -> Result<()> {
    if let Some(&x) = code.encoder.iter().find(|&&x| x >= w.input_size()) {
        return Err(Error::Precondition(format!(
            "codeword {x} outside the input alphabet of size {}",
            w.input_size()
        )));
    }
    Ok(())
}

/// Exact average error probability under maximum-likelihood list decoding.
pub fn exact_error_probability(code: &CodeBook, w: &DiscreteChannel) -> Result<f64> {
    exact_error_probability_capped(code, w, DEFAULT_ENUMERATION_CAP)
}

pub fn exact_error_probability_capped(
    code: &CodeBook,
    w: &DiscreteChannel,
    cap: u128,
) -> Result<f64> {
    check_code(code, w)?;
    let outputs = w.output_size();
    check_cap(
        "error enumeration",
        outputs as u128 * code.messages() as u128,
        cap,
    )?;
    let chunks: Vec<f64> = (0..outputs.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut lik = vec![0.0; code.messages()];
            let mut order = Vec::with_capacity(code.messages());
            let mut s = 0.0;
            for y in c * CHUNK..((c + 1) * CHUNK).min(outputs) {
                for (l, &x) in lik.iter_mut().zip(&code.encoder) {
                    *l = w.row(x)[y];
                }
                s += missed_mass(&lik, code.list, &mut order);
            }
            s
        })
        .collect();
    Ok(chunks.iter().sum::<f64>() / code.messages() as f64)
}

/// A deterministic encoder with feedback: `maps[t][m·P_t + p]` is the letter
/// sent at time t for message m after the output prefix with mixed-radix
/// index p (first output fastest), where P_t = Π_{s<t} |Y_s|.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackStrategy {
    pub messages: usize,
    pub output_sizes: Vec<usize>,
    pub maps: Vec<Vec<usize>>,
}

fn prefix_counts(output_sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(output_sizes.len());
    let mut p = 1usize;
    for &s in output_sizes {
        out.push(p);
        p = p.saturating_mul(s);
    }
    out
}

impl FeedbackStrategy {
    /// Uniformly random letters at every (time, message, prefix).
    pub fn random(rng: &mut ChaCha8Rng, messages: usize, parts: &[DiscreteChannel]) -> Self {
        let output_sizes: Vec<usize> = parts.iter().map(|c| c.output_size()).collect();
        let maps = prefix_counts(&output_sizes)
            .iter()
            .zip(parts)
            .map(|(&p, c)| {
                (0..messages * p)
                    .map(|_| rng.random_range(0..c.input_size()))
                    .collect()
            })
            .collect();
        FeedbackStrategy {
            messages,
            output_sizes,
            maps,
        }
    }

    /// The strategy that ignores feedback and sends the code's codewords.
    pub fn from_code(code: &CodeBook, parts: &[DiscreteChannel]) -> Result<Self> {
        let radices: Vec<usize> = parts.iter().map(|c| c.input_size()).collect();
        let output_sizes: Vec<usize> = parts.iter().map(|c| c.output_size()).collect();
        let words: Vec<Vec<usize>> = code
            .encoder
            .iter()
            .map(|&x| crate::channels::digits(x, radices.iter().copied()))
            .collect();
        let maps = prefix_counts(&output_sizes)
            .iter()
            .enumerate()
            .map(|(t, &p)| (0..code.messages() * p).map(|i| words[i / p][t]).collect())
            .collect();
        Ok(FeedbackStrategy {
            messages: code.messages(),
            output_sizes,
            maps,
        })
    }

    fn validate(&self, parts: &[DiscreteChannel]) -> Result<()> {
        if parts.len() != self.maps.len() || parts.len() != self.output_sizes.len() {
            return Err(Error::DimensionMismatch {
                left: self.maps.len(),
                right: parts.len(),
            });
        }
        for ((t, map), (&p, c)) in self
            .maps
            .iter()
            .enumerate()
            .zip(prefix_counts(&self.output_sizes).iter().zip(parts))
        {
            if c.output_size() != self.output_sizes[t] {
                return Err(Error::DimensionMismatch {
                    left: self.output_sizes[t],
                    right: c.output_size(),
                });
            }
            if map.len() != self.messages * p {
                return Err(Error::Precondition(format!(
                    "map at time {t} is not total on all prefixes"
                )));
            }
            if map.iter().any(|&x| x >= c.input_size()) {
                return Err(Error::Precondition(format!(
                    "map at time {t} sends a letter outside the input alphabet"
                )));
            }
        }
        Ok(())
    }

    /// Likelihoods of the output sequence `y` (mixed-radix index) under
    /// every message.
    fn likelihoods(&self, parts: &[DiscreteChannel], y: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 1.0);
        let mut rest = y;
        let mut prefix = 0usize;
        let mut scale = 1usize;
        for (t, c) in parts.iter().enumerate() {
            let yt = rest % self.output_sizes[t];
            rest /= self.output_sizes[t];
            let p = scale;
            for (m, v) in out.iter_mut().enumerate() {
                *v *= c.row(self.maps[t][m * p + prefix])[yt];
            }
            prefix += yt * scale;
            scale *= self.output_sizes[t];
        }
    }
}

fn sequence_count(parts: &[DiscreteChannel]) -> u128 {
    parts.iter().map(|c| c.output_size() as u128).product()
}

/// Exact average error probability of a feedback strategy under
/// maximum-likelihood list decoding.
pub fn feedback_error_probability(
    strategy: &FeedbackStrategy,
    parts: &[DiscreteChannel],
    list: usize,
) -> Result<f64> {
    strategy.validate(parts)?;
    if !(list >= 1 && list < strategy.messages) {
        return Err(Error::Precondition(format!(
            "need 1 <= L < M, got M = {}, L = {list}",
            strategy.messages
        )));
    }
    let total = sequence_count(parts);
    check_cap(
        "feedback enumeration",
        total * strategy.messages as u128,
        DEFAULT_ENUMERATION_CAP,
    )?;
    let total = total as usize;
    let chunks: Vec<f64> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut lik = vec![0.0; strategy.messages];
            let mut order = Vec::with_capacity(strategy.messages);
            let mut s = 0.0;
            for y in c * CHUNK..((c + 1) * CHUNK).min(total) {
                strategy.likelihoods(parts, y, &mut lik);
                s += missed_mass(&lik, list, &mut order);
            }
            s
        })
        .collect();
    Ok(chunks.iter().sum::<f64>() / strategy.messages as f64)
}

/// The channel from messages to output sequences induced by a strategy.
pub fn feedback_channel(
    strategy: &FeedbackStrategy,
    parts: &[DiscreteChannel],
) -> Result<DiscreteChannel> {
    strategy.validate(parts)?;
    let total = sequence_count(parts);
    check_cap(
        "feedback enumeration",
        total * strategy.messages as u128,
        DEFAULT_ENUMERATION_CAP,
    )?;
    let total = total as usize;
    let mut rows = vec![vec![0.0; total]; strategy.messages];
    let mut lik = vec![0.0; strategy.messages];
    for y in 0..total {
        strategy.likelihoods(parts, y, &mut lik);
        for (row, &v) in rows.iter_mut().zip(&lik) {
            row[y] = v;
        }
    }
    DiscreteChannel::new(rows)
}

fn draw(rng: &mut ChaCha8Rng, masses: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in masses.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    masses.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// The best of `trials` random codes with codewords drawn i.i.d. from
/// `prior`; trial i uses substream i of `seed`, and ties go to the lowest
/// trial index.
pub fn random_code_search(
    params: &CodeParams,
    w: &DiscreteChannel,
    prior: &InputDistribution,
    trials: u64,
    seed: u64,
) -> Result<(CodeBook, f64)> {
    let (m, l) = match (params.m(), params.l()) {
        (Some(m), Some(l)) => (m as usize, l as usize),
        _ => {
            return Err(Error::Precondition(
                "random code search needs integer M and L".into(),
            ))
        }
    };
    if prior.size() != w.input_size() {
        return Err(Error::DimensionMismatch {
            left: prior.size(),
            right: w.input_size(),
        });
    }
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    check_cap(
        "error enumeration",
        w.output_size() as u128 * m as u128,
        DEFAULT_ENUMERATION_CAP,
    )?;
    let best = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(f64, u64, CodeBook)> {
            let mut rng = substream(seed, i);
            let encoder = (0..m).map(|_| draw(&mut rng, prior.masses())).collect();
            let code = CodeBook::new(encoder, params.n(), l)?;
            Ok((exact_error_probability(&code, w)?, i, code))
        })
        .try_reduce_with(|a, b| Ok(if (b.0, b.1) < (a.0, a.1) { b } else { a }))
        .expect("nonempty")?;
    Ok((best.2, best.0))
}

/// Largest input alphabet accepted by [`grid_capacity`].
pub const GRID_INPUT_CAP: usize = 4;

/// max of I_α(P;W) over the simplex lattice of spacing `step`, followed by
/// one pass of pairwise mass moves at spacing step/16 around the best point.
pub fn grid_capacity(order: Order, w: &DiscreteChannel, step: f64) -> Result<f64> {
    let k = w.input_size();
    if k > GRID_INPUT_CAP {
        return Err(Error::CapExceeded {
            what: "grid capacity inputs",
            size: k as u128,
            cap: GRID_INPUT_CAP as u128,
        });
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::OutOfRange {
            name: "step",
            value: step,
        });
    }
    let a = order.value();
    let n = (1.0 / step).round().max(1.0) as usize;
    let mut points = Vec::new();
    let mut cur = vec![0usize; k];
    compositions(n, 0, &mut cur, &mut points);
    let eval = |p: &[f64]| information_slices(a, p, w);
    let (mut best_p, mut best) = points
        .par_iter()
        .map(|c| {
            let p: Vec<f64> = c.iter().map(|&v| v as f64 / n as f64).collect();
            let v = eval(&p);
            (p, v)
        })
        .reduce_with(|x, y| if y.1 > x.1 { y } else { x })
        .expect("nonempty lattice");
    let h = 1.0 / (16 * n) as f64;
    let anchor = best_p.clone();
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            for s in 1..=16 {
                let mv = s as f64 * h;
                if anchor[j] < mv {
                    break;
                }
                let mut p = anchor.clone();
                p[i] += mv;
                p[j] -= mv;
                let v = eval(&p);
                if v > best {
                    best = v;
                    best_p = p;
                }
            }
        }
    }
    let _ = best_p;
    Ok(best)
}

fn compositions(rest: usize, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if i + 1 == cur.len() {
        cur[i] = rest;
        out.push(cur.clone());
        return;
    }
    for v in 0..=rest {
        cur[i] = v;
        compositions(rest - v, i + 1, cur, out);
    }
}

/// E|ζ_α|^k under the tilted measure w^α q^{1−α}/Z, where
/// ζ_α = ln(dw_ac/dq) − E[ln(dw_ac/dq)].
pub fn exact_tilted_moment(
    order: Order,
    w: &ProbabilityMeasure,
    q: &ProbabilityMeasure,
    k: f64,
) -> Result<f64> {
    let a = order.value();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::OutOfRange {
            name: "order",
            value: a,
        });
    }
    if w.size() != q.size() {
        return Err(Error::DimensionMismatch {
            left: w.size(),
            right: q.size(),
        });
    }
    if !(k > 0.0) {
        return Err(Error::OutOfRange {
            name: "k",
            value: k,
        });
    }
    let v = tilt_slices(a, w.weights(), q.weights()).ok_or(Error::InfiniteDivergence)?;
    let r: Vec<f64> = w
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(&wy, &qy)| {
            if wy > 0.0 && qy > 0.0 {
                (wy / qy).ln()
            } else {
                0.0
            }
        })
        .collect();
    let mean: f64 = v.iter().zip(&r).map(|(p, x)| p * x).sum();
    Ok(v.iter()
        .zip(&r)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, x)| p * (x - mean).abs().powf(k))
        .sum())
}

/// A finite-support random variable as (value, probability) atoms.
pub type Atoms = Vec<(f64, f64)>;

/// Exact P(|Σ_t ζ_t| < 3m_k) with m_k = (Σ_t E|ζ_t|^k)^{1/k} for
/// independent zero-mean ζ_t. When every ζ_t is identically zero the sum is
/// zero with certainty and the probability is reported as 1.
pub fn exact_small_deviation(vars: &[Atoms], k: f64) -> Result<f64> {
    if vars.is_empty() {
        return Err(Error::Precondition("need at least one variable".into()));
    }
    if !(k > 0.0) {
        return Err(Error::OutOfRange {
            name: "k",
            value: k,
        });
    }
    let mut size: u128 = 1;
    let mut moment = 0.0;
    for (t, v) in vars.iter().enumerate() {
        let total: f64 = v.iter().map(|a| a.1).sum();
        if v.iter().any(|a| !(a.1 >= 0.0) || !a.0.is_finite()) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "variable {t} is not a probability distribution"
            )));
        }
        let mean: f64 = v.iter().map(|a| a.0 * a.1).sum();
        let scale = v.iter().map(|a| a.0.abs()).fold(1.0, f64::max);
        if mean.abs() > 1e-12 * scale {
            return Err(Error::Precondition(format!("variable {t} has mean {mean}")));
        }
        moment += v.iter().map(|a| a.1 * a.0.abs().powf(k)).sum::<f64>();
        size = size.saturating_mul(v.len() as u128);
    }
    check_cap("joint support", size, DEFAULT_ENUMERATION_CAP)?;
    let m = moment.powf(1.0 / k);
    if m == 0.0 {
        return Ok(1.0);
    }
    let mut joint: Atoms = vec![(0.0, 1.0)];
    for v in vars {
        joint = joint
            .iter()
            .flat_map(|&(s, p)| v.iter().map(move |&(x, q)| (s + x, p * q)))
            .collect();
    }
    Ok(joint
        .iter()
        .filter(|a| a.0.abs() < 3.0 * m)
        .map(|a| a.1)
        .sum())
}

/// Named verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Pinsker,
    Shiryaev,
    Dpi,
    OrderMonotonicity,
    Convexity,
    Ehb,
    Taylor,
    Moment,
    Berry,
    Sandwich,
    Feedback,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Pinsker,
        Suite::Shiryaev,
        Suite::Dpi,
        Suite::OrderMonotonicity,
        Suite::Convexity,
        Suite::Ehb,
        Suite::Taylor,
        Suite::Moment,
        Suite::Berry,
        Suite::Sandwich,
        Suite::Feedback,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Pinsker => "pinsker",
            Suite::Shiryaev => "shiryaev",
            Suite::Dpi => "dpi",
            Suite::OrderMonotonicity => "order_monotonicity",
            Suite::Convexity => "convexity",
            Suite::Ehb => "ehb",
            Suite::Taylor => "taylor",
            Suite::Moment => "moment",
            Suite::Berry => "berry",
            Suite::Sandwich => "sandwich",
            Suite::Feedback => "feedback",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s || x.name().replace('_', "-") == s)
    }

    /// Largest violation tolerated.
    pub fn tolerance(self) -> f64 {
        match self {
            Suite::Ehb | Suite::Feedback => 1e-8,
            Suite::Sandwich => 1e-12,
            _ => 1e-10,
        }
    }
}

/// Outcome of a suite: the worst slack over all checks, where a negative
/// slack is a violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub instances: u64,
    pub checks: u64,
    pub violations: u64,
    pub worst_slack: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn summarize(suite: Suite, instances: u64, slacks: &[f64]) -> SuiteReport {
    let tol = suite.tolerance();
    let worst = slacks.iter().cloned().fold(f64::INFINITY, f64::min);
    let violations = slacks.iter().filter(|&&s| s < -tol || s.is_nan()).count() as u64;
    SuiteReport {
        suite: suite.name().into(),
        instances,
        checks: slacks.len() as u64,
        violations,
        worst_slack: worst,
        tolerance: tol,
        passed: violations == 0,
    }
}

/// A random measure, sparse with probability 1/3.
fn suite_measure(rng: &mut ChaCha8Rng, size: usize) -> Vec<f64> {
    if rng.random::<f64>() < 1.0 / 3.0 {
        sparse_dirichlet(rng, size, 0.4)
    } else {
        dirichlet(rng, size)
    }
}

fn suite_order(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    if u < 0.5 {
        0.01 + 0.98 * rng.random::<f64>()
    } else {
        1.0 + 4.0 * rng.random::<f64>()
    }
}

/// a − b, with ∞ − ∞ counted as satisfied.
fn excess(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY {
        f64::INFINITY
    } else {
        a - b
    }
}

fn d(a: f64, w: &[f64], q: &[f64]) -> f64 {
    divergence_slices(a, w, q).to_f64()
}

/// Slack of one random instance of a divergence suite.
fn divergence_instance(suite: Suite, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let size = rng.random_range(2..=6);
    let w = suite_measure(rng, size);
    let q = suite_measure(rng, size);
    let a = suite_order(rng);
    Ok(match suite {
        Suite::Pinsker => {
            let tv = tv_slices(&w, &q);
            vec![d(a, &w, &q) - a.min(1.0) / 2.0 * tv * tv]
        }
        Suite::Shiryaev => {
            let tv = tv_slices(&w, &q);
            let disjoint = w.iter().zip(&q).all(|(a, b)| *a == 0.0 || *b == 0.0);
            if disjoint {
                vec![f64::INFINITY]
            } else {
                vec![2.0 * (2.0 / (2.0 - tv)).ln() - d(0.5, &w, &q)]
            }
        }
        Suite::Dpi => {
            let outs = rng.random_range(1..=5);
            let k = random_channel(rng, size, outs);
            let push = |m: &[f64]| -> Vec<f64> {
                (0..outs)
                    .map(|y| m.iter().enumerate().map(|(x, p)| p * k.row(x)[y]).sum())
                    .collect()
            };
            vec![excess(d(a, &w, &q), d(a, &push(&w), &push(&q)))]
        }
        Suite::OrderMonotonicity => {
            let b = suite_order(rng);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            vec![excess(d(hi, &w, &q), d(lo, &w, &q))]
        }
        Suite::Convexity => {
            let q2 = suite_measure(rng, size);
            let l: f64 = rng.random();
            let mix: Vec<f64> = q
                .iter()
                .zip(&q2)
                .map(|(x, y)| l * x + (1.0 - l) * y)
                .collect();
            let rhs = l * d(a, &w, &q) + (1.0 - l) * d(a, &w, &q2);
            let lhs = d(a, &w, &mix);
            vec![excess(rhs, lhs)]
        }
        Suite::Ehb => {
            let outs = rng.random_range(2..=4);
            let w = random_channel(rng, size.min(4), outs);
            let q = random_measure(rng, outs);
            let a = [0.3, 0.5, 0.9, 1.0, 1.5, 3.0][rng.random_range(0..6)];
            vec![ehb_certificate(Order::new(a)?, &w, &q, DEFAULT_TOL)?.slack]
        }
        Suite::Taylor => {
            let w = dirichlet(rng, size);
            let q = dirichlet(rng, size);
            let lambda = 1.2 + 3.0 * rng.random::<f64>();
            let beta = 1.0 + (lambda - 1.0) * (0.01 + 0.98 * rng.random::<f64>());
            let gamma = d(lambda, &w, &q);
            let gap = d(beta, &w, &q) - d(1.0, &w, &q);
            vec![gap, taylor_gap_bound(beta, lambda, gamma)? - gap]
        }
        Suite::Moment => {
            let w = ProbabilityMeasure::new(suite_measure(rng, 4))?;
            let q = ProbabilityMeasure::new(dirichlet(rng, 4))?;
            let a = 0.02 + 0.96 * rng.random::<f64>();
            let k = [1.0, 2.0, 3.0, 4.0, 0.5 + 5.0 * rng.random::<f64>()][rng.random_range(0..5)];
            let lhs = exact_tilted_moment(Order::new(a)?, &w, &q, k)?.powf(1.0 / k);
            let rhs = moment_bound_rhs(Order::new(a)?, k, d(a, w.weights(), q.weights()))?;
            vec![rhs - lhs]
        }
        Suite::Berry => {
            let n = rng.random_range(1..=10);
            let family = rng.random_range(0..3);
            let vars: Vec<Atoms> = (0..n).map(|_| berry_variable(rng, family)).collect();
            let k = 3.0 + 3.0 * rng.random::<f64>();
            vec![exact_small_deviation(&vars, k)? - small_deviation_floor(n as u64)?]
        }
        Suite::Sandwich | Suite::Feedback => unreachable!("not a per-instance suite"),
    })
}

/// Fair ±1 signs, centered Bernoulli variables, or zero-mean three-point
/// variables.
pub fn berry_variable(rng: &mut ChaCha8Rng, family: usize) -> Atoms {
    match family {
        0 => vec![(-1.0, 0.5), (1.0, 0.5)],
        1 => {
            let p = 0.02 + 0.96 * rng.random::<f64>();
            vec![(1.0 - p, p), (-p, 1.0 - p)]
        }
        _ => {
            let a = 0.1 + 2.0 * rng.random::<f64>();
            let b = 0.1 + 2.0 * rng.random::<f64>();
            let s = 0.05 + 0.9 * rng.random::<f64>();
            vec![(-a, s * b / (a + b)), (0.0, 1.0 - s), (b, s * a / (a + b))]
        }
    }
}

/// Runs a suite on `instances` random instances; instance i draws from
/// substream i of `seed`. For the sandwich and feedback suites `instances`
/// is the number of random codes or strategies per configuration.
pub fn run_suite(suite: Suite, instances: u64, seed: u64) -> Result<SuiteReport> {
    let slacks: Vec<f64> = match suite {
        Suite::Sandwich => sandwich_check(&[3, 4], &[4, 8], instances, seed)?
            .iter()
            .map(|r| r.slack())
            .collect(),
        Suite::Feedback => {
            let mut s: Vec<f64> = feedback_check(&[2, 3], instances, seed)?
                .iter()
                .map(|r| r.slack())
                .collect();
            s.push(feedback_capacity_cap(
                &DiscreteChannel::bsc(0.1)?,
                3,
                4,
                instances.min(100),
                seed,
            )?);
            s
        }
        _ => {
            let per: Vec<Vec<f64>> = (0..instances)
                .into_par_iter()
                .map(|i| divergence_instance(suite, &mut substream(seed, i)))
                .collect::<Result<_>>()?;
            per.into_iter().flatten().collect()
        }
    };
    Ok(summarize(suite, instances, &slacks))
}

/// One sandwich configuration: exact error probabilities of random codes on
/// the n-fold BSC(0.1) against the outer bounds and the Gallager value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub n: u64,
    pub messages: u64,
    pub codes: u64,
    /// Largest binding outer bound.
    pub outer: f64,
    pub outer_lemmas: Vec<String>,
    pub min_error: f64,
    pub best_search_error: f64,
    /// Smallest Gallager value over the order grid at the uniform prior.
    pub gallager: f64,
}

impl SandwichRow {
    /// min(min_error − outer, gallager − best_search_error).
    pub fn slack(&self) -> f64 {
        (self.min_error - self.outer).min(self.gallager - self.best_search_error)
    }
}

const SANDWICH_ORDERS: [f64; 9] = [0.25, 0.5, 0.75, 0.9, 1.0, 1.5, 2.0, 3.0, 4.0];

pub fn sandwich_check(ns: &[u64], ms: &[u64], codes: u64, seed: u64) -> Result<Vec<SandwichRow>> {
    let base = DiscreteChannel::bsc(0.1)?;
    let mut rows = Vec::new();
    for &n in ns {
        let parts = vec![base.clone(); n as usize];
        let w = product_channel_capped(&parts, DEFAULT_ENUMERATION_CAP)?;
        let prior = InputDistribution::uniform(w.input_size())?;
        for &m in ms {
            let params = CodeParams::new(m, 1, n)?;
            let mut outer = 0.0f64;
            let mut lemmas = Vec::new();
            let ar = arimoto_outer_product(&params, &base, &SANDWICH_ORDERS)?;
            if ar.hypothesis_satisfied {
                outer = outer.max(ar.value);
                lemmas.push(ar.lemma);
            }
            let sp = spb_product(&params, &parts, Order::HALF, 0.5 / n as f64, 3.0)?;
            if sp.hypothesis_satisfied {
                outer = outer.max(sp.value);
                lemmas.push(sp.lemma);
            }
            let stream = seed ^ (n << 32 | m);
            let errors: Vec<f64> = (0..codes)
                .into_par_iter()
                .map(|i| {
                    let mut rng = substream(stream, i);
                    let enc = (0..m).map(|_| draw(&mut rng, prior.masses())).collect();
                    exact_error_probability(&CodeBook::new(enc, n, 1)?, &w)
                })
                .collect::<Result<_>>()?;
            let min_error = errors.iter().cloned().fold(f64::INFINITY, f64::min);
            let (_, best_search_error) = random_code_search(&params, &w, &prior, codes, stream)?;
            let gallager = (0..=20)
                .map(|k| 0.5 + 0.5 * k as f64 / 21.0)
                .map(|a| Ok(gallager_inner(&params, Order::new(a)?, &prior, &w)?.value))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            rows.push(SandwichRow {
                n,
                messages: m,
                codes,
                outer,
                outer_lemmas: lemmas,
                min_error,
                best_search_error,
                gallager,
            });
        }
    }
    Ok(rows)
}

/// One feedback configuration: the feedback bound against exact error
/// probabilities of random strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRow {
    pub n: u64,
    pub kappa: u64,
    pub messages: u64,
    pub strategies: u64,
    pub bound: f64,
    pub binding: bool,
    pub min_error: f64,
    /// Subblock plan matches the closed form ℓ_i, t_i.
    pub plan_ok: bool,
}

impl FeedbackRow {
    pub fn slack(&self) -> f64 {
        let plan = if self.plan_ok { f64::INFINITY } else { -1.0 };
        let bound = if self.binding {
            self.min_error - self.bound
        } else {
            f64::INFINITY
        };
        plan.min(bound)
    }
}

/// Subblock plan from t_i = i⌊n/κ⌋ + min(i, n mod κ).
pub fn subblock_ends(n: u64, kappa: u64) -> Vec<u64> {
    (1..=kappa)
        .map(|i| i * (n / kappa) + i.min(n % kappa))
        .collect()
}

pub fn feedback_check(ns: &[u64], strategies: u64, seed: u64) -> Result<Vec<FeedbackRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        for kappa in 1..n {
            for (ci, p) in [0.05, 0.1].into_iter().enumerate() {
                let w = DiscreteChannel::bsc(p)?;
                let parts = vec![w.clone(); n as usize];
                let m = 4u64;
                let params = CodeParams::new(m, 1, n)?;
                let report = spb_feedback(&params, &w, kappa, 0.05, (0.3, 0.6))?;
                let (ell, ends) = subblock_plan(n, kappa)?;
                let plan_ok = ends == subblock_ends(n, kappa) && ell.iter().sum::<u64>() == n;
                let stream = seed ^ (n << 40 | kappa << 20 | ci as u64);
                let errors: Vec<f64> = (0..strategies)
                    .into_par_iter()
                    .map(|i| {
                        let s =
                            FeedbackStrategy::random(&mut substream(stream, i), m as usize, &parts);
                        feedback_error_probability(&s, &parts, 1)
                    })
                    .collect::<Result<_>>()?;
                rows.push(FeedbackRow {
                    n,
                    kappa,
                    messages: m,
                    strategies,
                    bound: report.value,
                    binding: report.hypothesis_satisfied,
                    min_error: errors.iter().cloned().fold(f64::INFINITY, f64::min),
                    plan_ok,
                });
            }
        }
    }
    Ok(rows)
}

/// Worst slack of nC_β(V) − D_β(V_m‖⊗q_{β,V}) over random feedback
/// strategies on n uses of the auxiliary channel V built from `w` at
/// R = C_{1/2}(W), ε = 0.05, for β ∈ {0.5, 1, 2} and every message m.
pub fn feedback_capacity_cap(
    w: &DiscreteChannel,
    n: usize,
    messages: usize,
    strategies: u64,
    seed: u64,
) -> Result<f64> {
    let rate = solve_capacity(Order::HALF, w, DEFAULT_TOL)?.value;
    let v = tradeoff_channel(w, rate, 0.05)?.auxiliary.channel;
    let parts = vec![v.clone(); n];
    let mut worst = f64::INFINITY;
    for beta in [0.5, 1.0, 2.0] {
        let sol = solve_capacity(Order::new(beta)?, &v, DEFAULT_TOL)?;
        let q = sol.center.weights();
        let center = product_channel_capped(
            &vec![DiscreteChannel::new(vec![q.to_vec()])?; n],
            DEFAULT_ENUMERATION_CAP,
        )?;
        let cap = n as f64 * sol.value;
        let slacks: Vec<f64> = (0..strategies)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let s = FeedbackStrategy::random(&mut substream(seed, i), messages, &parts);
                let joint = feedback_channel(&s, &parts)?;
                Ok((0..messages)
                    .map(|m| cap - divergence_slices(beta, joint.row(m), center.row(0)).to_f64())
                    .fold(f64::INFINITY, f64::min))
            })
            .collect::<Result<_>>()?;
        worst = slacks.into_iter().fold(worst, f64::min);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::product_channel;

    fn bsc(p: f64) -> DiscreteChannel {
        DiscreteChannel::bsc(p).unwrap()
    }

    #[test]
    fn error_probability_examples() {
        let code = CodeBook::new(vec![0, 1], 1, 1).unwrap();
        assert_eq!(exact_error_probability(&code, &bsc(0.0)).unwrap(), 0.0);
        assert!((exact_error_probability(&code, &bsc(0.1)).unwrap() - 0.1).abs() < 1e-15);
        let same = CodeBook::new(vec![1, 1], 1, 1).unwrap();
        assert_eq!(exact_error_probability(&same, &bsc(0.1)).unwrap(), 0.5);
        assert_eq!(decode_list(&same, &bsc(0.1), 0), vec![0]);
        assert!(CodeBook::new(vec![0, 1], 1, 2).is_err());
        assert!(
            exact_error_probability(&CodeBook::new(vec![0, 5], 1, 1).unwrap(), &bsc(0.1)).is_err()
        );
        assert!(exact_error_probability_capped(&code, &bsc(0.1), 3).is_err());
    }

    #[test]
    fn feedback_reduces_to_codes() {
        let parts = vec![bsc(0.1), bsc(0.2), bsc(0.1)];
        let w = product_channel(&parts).unwrap();
        let code = CodeBook::new(vec![0, 3, 5, 6], 3, 1).unwrap();
        let s = FeedbackStrategy::from_code(&code, &parts).unwrap();
        let a = exact_error_probability(&code, &w).unwrap();
        let b = feedback_error_probability(&s, &parts, 1).unwrap();
        assert!((a - b).abs() < 1e-15);
        let joint = feedback_channel(&s, &parts).unwrap();
        for m in 0..4 {
            for y in 0..8 {
                assert!((joint.row(m)[y] - w.row(code.encoder[m])[y]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn feedback_flip_rule() {
        // Message m sends m at time 1 and, at time 2, repeats the received bit
        // flipped.
        let parts = vec![bsc(0.1), bsc(0.1)];
        let s = FeedbackStrategy {
            messages: 2,
            output_sizes: vec![2, 2],
            maps: vec![vec![0, 1], vec![1, 0, 1, 0]],
        };
        let mut want = 0.0;
        let p = 0.1;
        let t = |a: usize, b: usize| if a == b { 1.0 - p } else { p };
        for y1 in 0..2 {
            for y2 in 0..2 {
                let lik: Vec<f64> = (0..2).map(|m| t(m, y1) * t(1 - y1, y2)).collect();
                let pick = if lik[1] > lik[0] { 1 } else { 0 };
                want += lik[1 - pick] / 2.0;
            }
        }
        assert!((feedback_error_probability(&s, &parts, 1).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn useless_parts_give_one_minus_list_fraction() {
        let parts = vec![bsc(0.5); 3];
        for i in 0..5 {
            let s = FeedbackStrategy::random(&mut substream(3, i), 4, &parts);
            assert!((feedback_error_probability(&s, &parts, 1).unwrap() - 0.75).abs() < 1e-15);
            assert!((feedback_error_probability(&s, &parts, 3).unwrap() - 0.25).abs() < 1e-15);
        }
        let w = product_channel(&parts).unwrap();
        let params = CodeParams::new(4, 1, 3).unwrap();
        let (_, pe) =
            random_code_search(&params, &w, &InputDistribution::uniform(8).unwrap(), 20, 1)
                .unwrap();
        assert!((pe - 0.75).abs() < 1e-15);
    }

    #[test]
    fn code_search_is_deterministic() {
        let w = product_channel(&vec![bsc(0.1); 3]).unwrap();
        let prior = InputDistribution::uniform(8).unwrap();
        let params = CodeParams::new(4, 1, 3).unwrap();
        let a = random_code_search(&params, &w, &prior, 1, 9).unwrap();
        let b = random_code_search(&params, &w, &prior, 1, 9).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| random_code_search(&params, &w, &prior, 200, 9).unwrap());
        let d = random_code_search(&params, &w, &prior, 200, 9).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn grid_capacity_examples() {
        assert!(
            grid_capacity(Order::ONE, &bsc(0.5), 1.0 / 16.0)
                .unwrap()
                .abs()
                < 1e-15
        );
        let v = grid_capacity(Order::ONE, &bsc(0.0), 1.0 / 64.0).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-4);
        let mut rng = substream(5, 0);
        for _ in 0..3 {
            let w = random_channel(&mut rng, 3, 3);
            for a in [0.5, 1.0, 2.0] {
                let g = grid_capacity(Order::new(a).unwrap(), &w, 1.0 / 32.0).unwrap();
                let s = solve_capacity(Order::new(a).unwrap(), &w, DEFAULT_TOL).unwrap();
                assert!(g <= s.value + 1e-6);
                assert!(g >= s.value - 1e-3);
            }
        }
        assert!(grid_capacity(Order::ONE, &random_channel(&mut rng, 5, 2), 0.1).is_err());
    }

    #[test]
    fn tilted_moment_examples() {
        let q = ProbabilityMeasure::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(exact_tilted_moment(Order::HALF, &q, &q, 2.0).unwrap(), 0.0);
        let w = ProbabilityMeasure::new(vec![0.9, 0.1]).unwrap();
        let (r1, r2) = ((0.9f64 / 0.5).ln(), (0.1f64 / 0.5).ln());
        let mean = 0.75 * r1 + 0.25 * r2;
        let want = 0.75 * (r1 - mean).powi(2) + 0.25 * (r2 - mean).powi(2);
        assert!((exact_tilted_moment(Order::HALF, &w, &q, 2.0).unwrap() - want).abs() < 1e-14);
        let a = ProbabilityMeasure::new(vec![1.0, 0.0]).unwrap();
        let b = ProbabilityMeasure::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(
            exact_tilted_moment(Order::HALF, &a, &b, 2.0),
            Err(Error::InfiniteDivergence)
        );
    }

    #[test]
    fn small_deviation_examples() {
        let coin = vec![(-1.0, 0.5), (1.0, 0.5)];
        assert_eq!(exact_small_deviation(std::slice::from_ref(&coin), 3.0).unwrap(), 1.0);
        let six = vec![coin.clone(); 6];
        let p = exact_small_deviation(&six, 3.0).unwrap();
        // m_3 = 6^{1/3} ≈ 1.817, so |Σ| < 5.45 excludes only the sums ±6.
        assert!((p - 62.0 / 64.0).abs() < 1e-15);
        assert!(p >= small_deviation_floor(6).unwrap());
        assert_eq!(
            exact_small_deviation(&vec![vec![(0.0, 1.0)]; 3], 3.0).unwrap(),
            1.0
        );
        assert!(exact_small_deviation(&[vec![(1.0, 1.0)]], 3.0).is_err());
    }

    #[test]
    fn divergence_suites_pass() {
        for suite in [
            Suite::Pinsker,
            Suite::Shiryaev,
            Suite::Dpi,
            Suite::OrderMonotonicity,
            Suite::Convexity,
        ] {
            let r = run_suite(suite, 500, 7).unwrap();
            assert!(r.passed, "{r:?}");
        }
        for suite in [Suite::Taylor, Suite::Moment, Suite::Berry, Suite::Ehb] {
            let r = run_suite(suite, 100, 7).unwrap();
            assert!(r.passed, "{r:?}");
        }
        assert_eq!(
            Suite::parse("order-monotonicity"),
            Some(Suite::OrderMonotonicity)
        );
        assert_eq!(Suite::parse("nope"), None);
    }

    #[test]
    fn subblock_closed_form() {
        for n in 2..30 {
            for k in 1..n {
                assert_eq!(subblock_plan(n, k).unwrap().1, subblock_ends(n, k));
            }
        }
    }
}
