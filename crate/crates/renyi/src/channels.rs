//! Finite channels, input distributions, Rényi information and Rényi mean.
//!
//! A [`DiscreteChannel`] stores its transition matrix row-major: row `x` is
//! the output distribution W(·|x). Product channels index inputs and outputs
//! in mixed-radix little-endian order, so the first component varies fastest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{divergence_slices, ExtReal, Order, ProbabilityMeasure};

/// Default cap on the number of matrix entries of a product channel.
pub const DEFAULT_PRODUCT_CAP: u128 = 1_000_000;

/// A row-stochastic matrix over a finite output alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelJson", into = "ChannelJson")]
pub struct DiscreteChannel {
    inputs: usize,
    outputs: usize,
    entries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    inputs: usize,
    outputs: usize,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<ChannelJson> for DiscreteChannel {
    type Error = Error;
    fn try_from(j: ChannelJson) -> Result<Self> {
        if j.rows.len() != j.inputs {
            return Err(Error::DimensionMismatch {
                left: j.inputs,
                right: j.rows.len(),
            });
        }
        let ch = DiscreteChannel::new(j.rows)?;
        if ch.outputs != j.outputs {
            return Err(Error::DimensionMismatch {
                left: j.outputs,
                right: ch.outputs,
            });
        }
        Ok(ch)
    }
}

impl From<DiscreteChannel> for ChannelJson {
    fn from(c: DiscreteChannel) -> Self {
        ChannelJson {
            inputs: c.inputs,
            outputs: c.outputs,
            rows: (0..c.inputs).map(|x| c.row(x).to_vec()).collect(),
        }
    }
}

impl DiscreteChannel {
    /// Builds a channel from its rows; each row is renormalized after a
    /// sum-to-one check.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = rows.len();
        if inputs == 0 {
            return Err(Error::Precondition(
                "channel needs at least one input".into(),
            ));
        }
        let outputs = rows[0].len();
        let mut entries = Vec::with_capacity(inputs * outputs);
        for r in rows {
            if r.len() != outputs {
                return Err(Error::DimensionMismatch {
                    left: outputs,
                    right: r.len(),
                });
            }
            let pm = ProbabilityMeasure::new(r)?;
            entries.extend_from_slice(pm.weights());
        }
        Ok(DiscreteChannel {
            inputs,
            outputs,
            entries,
        })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        unit("p", p)?;
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; outputs are (0, erasure, 1).
    pub fn bec(p: f64) -> Result<Self> {
        unit("p", p)?;
        Self::new(vec![vec![1.0 - p, p, 0.0], vec![0.0, p, 1.0 - p]])
    }

    /// The 2×2 channel [[0.5, 0.5], [0, 1]] whose Haroutunian exponent
    /// exceeds its sphere-packing exponent.
    pub fn haroutunian() -> Self {
        Self::new(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).expect("valid rows")
    }

    pub fn input_size(&self) -> usize {
        self.inputs
    }

    pub fn output_size(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.entries[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.outputs)
    }

    pub fn row_measure(&self, x: usize) -> ProbabilityMeasure {
        ProbabilityMeasure::normalize(
            crate::measures::FiniteMeasure::new(self.row(x).to_vec()).expect("rows are valid"),
        )
    }

    /// The channel restricted to the listed inputs.
    pub fn restrict(&self, inputs: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(inputs.len() * self.outputs);
        for &x in inputs {
            entries.extend_from_slice(self.row(x));
        }
        DiscreteChannel {
            inputs: inputs.len(),
            outputs: self.outputs,
            entries,
        }
    }
}

fn unit(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value: v })
    }
}

/// A probability distribution on the input alphabet of a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputDistribution {
    masses: ProbabilityMeasure,
}

impl InputDistribution {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        Ok(InputDistribution {
            masses: ProbabilityMeasure::new(masses)?,
        })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Ok(InputDistribution {
            masses: ProbabilityMeasure::uniform(size)?,
        })
    }

    pub fn from_measure(masses: ProbabilityMeasure) -> Self {
        InputDistribution { masses }
    }

    pub fn masses(&self) -> &[f64] {
        self.masses.weights()
    }

    pub fn measure(&self) -> &ProbabilityMeasure {
        &self.masses
    }

    pub fn size(&self) -> usize {
        self.masses.size()
    }

    /// Product distribution in the same index order as [`product_channel`].
    pub fn product(parts: &[InputDistribution]) -> Result<Self> {
        let mut acc = vec![1.0];
        for p in parts {
            let mut next = Vec::with_capacity(acc.len() * p.size());
            for &b in p.masses() {
                for &a in &acc {
                    next.push(a * b);
                }
            }
            acc = next;
        }
        Self::new(acc)
    }
}

/// A prior paired with a channel of matching input size.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub channel: DiscreteChannel,
    pub prior: InputDistribution,
}

impl JointSpec {
    pub fn new(channel: DiscreteChannel, prior: InputDistribution) -> Result<Self> {
        check_dims(&prior, &channel)?;
        Ok(JointSpec { channel, prior })
    }
}

fn check_dims(p: &InputDistribution, w: &DiscreteChannel) -> Result<()> {
    if p.size() == w.input_size() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left: p.size(),
            right: w.input_size(),
        })
    }
}

/// Inputs carrying positive prior mass, with their masses.
fn support(p: &[f64]) -> impl Iterator<Item = (usize, f64)> + '_ {
    p.iter().copied().enumerate().filter(|&(_, m)| m > 0.0)
}

/// ln of the unnormalized Rényi mean: (1/α) ln Σ_x p(x) w(y|x)^α per output.
/// Entries are −∞ on outputs no supported input reaches.
pub(crate) fn log_mean_weights(alpha: f64, p: &[f64], w: &DiscreteChannel) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; w.output_size()];
    if alpha == 1.0 {
        let mut mix = vec![0.0; w.output_size()];
        for (x, m) in support(p) {
            for (acc, &v) in mix.iter_mut().zip(w.row(x)) {
                *acc += m * v;
            }
        }
        for (o, v) in out.iter_mut().zip(mix) {
            if v > 0.0 {
                *o = v.ln();
            }
        }
        return out;
    }
    let lp: Vec<(usize, f64)> = support(p).map(|(x, m)| (x, m.ln())).collect();
    for (y, o) in out.iter_mut().enumerate() {
        let mut shift = f64::NEG_INFINITY;
        for &(x, lm) in &lp {
            let v = w.row(x)[y];
            if v > 0.0 {
                shift = shift.max(lm + alpha * v.ln());
            }
        }
        if shift == f64::NEG_INFINITY {
            continue;
        }
        let mut acc = 0.0;
        for &(x, lm) in &lp {
            let v = w.row(x)[y];
            if v > 0.0 {
                acc += (lm + alpha * v.ln() - shift).exp();
            }
        }
        *o = (shift + acc.ln()) / alpha;
    }
    out
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Rényi mean as a raw normalized vector.
pub(crate) fn mean_slices(alpha: f64, p: &[f64], w: &DiscreteChannel) -> Vec<f64> {
    let lw = log_mean_weights(alpha, p, w);
    let lse = log_sum_exp(&lw);
    lw.iter().map(|v| (v - lse).exp()).collect()
}

/// Rényi information on a raw prior slice.
pub(crate) fn information_slices(alpha: f64, p: &[f64], w: &DiscreteChannel) -> f64 {
    if alpha == 1.0 {
        let q = mean_slices(1.0, p, w);
        return support(p)
            .map(|(x, m)| m * divergence_slices(1.0, w.row(x), &q).to_f64())
            .sum();
    }
    let lw = log_mean_weights(alpha, p, w);
    alpha / (alpha - 1.0) * log_sum_exp(&lw)
}

/// Order-α Rényi information I_α(P;W) in nats.
pub fn renyi_information(order: Order, p: &InputDistribution, w: &DiscreteChannel) -> Result<f64> {
    check_dims(p, w)?;
    Ok(information_slices(order.value(), p.masses(), w))
}

/// Order-α Rényi mean q_{α,P}.
pub fn renyi_mean(
    order: Order,
    p: &InputDistribution,
    w: &DiscreteChannel,
) -> Result<ProbabilityMeasure> {
    check_dims(p, w)?;
    ProbabilityMeasure::from_unnormalized(mean_slices(order.value(), p.masses(), w))
}

/// Product of the listed channels with the default size cap.
pub fn product_channel(parts: &[DiscreteChannel]) -> Result<DiscreteChannel> {
    product_channel_capped(parts, DEFAULT_PRODUCT_CAP)
}

/// Product channel W_1 ⊗ … ⊗ W_n with inputs and outputs indexed
/// mixed-radix little-endian.
pub fn product_channel_capped(parts: &[DiscreteChannel], cap: u128) -> Result<DiscreteChannel> {
    if parts.is_empty() {
        return Err(Error::Precondition(
            "product of an empty channel list".into(),
        ));
    }
    let inputs: u128 = parts.iter().map(|c| c.inputs as u128).product();
    let outputs: u128 = parts.iter().map(|c| c.outputs as u128).product();
    let size = inputs.saturating_mul(outputs);
    if size > cap {
        return Err(Error::CapExceeded {
            what: "product channel",
            size,
            cap,
        });
    }
    let (inputs, outputs) = (inputs as usize, outputs as usize);
    let mut entries = vec![0.0; inputs * outputs];
    entries
        .par_chunks_mut(outputs)
        .enumerate()
        .for_each(|(x, row)| {
            let xs = digits(x, parts.iter().map(|c| c.inputs));
            for (y, e) in row.iter_mut().enumerate() {
                let ys = digits(y, parts.iter().map(|c| c.outputs));
                *e = parts
                    .iter()
                    .zip(xs.iter().zip(&ys))
                    .map(|(c, (&xi, &yi))| c.row(xi)[yi])
                    .product();
            }
        });
    Ok(DiscreteChannel {
        inputs,
        outputs,
        entries,
    })
}

/// Mixed-radix little-endian digits of `index`.
pub fn digits(mut index: usize, radices: impl Iterator<Item = usize>) -> Vec<usize> {
    radices
        .map(|r| {
            let d = index % r;
            index /= r;
            d
        })
        .collect()
}

/// Inverse of [`digits`].
pub fn index_of(digits: &[usize], radices: &[usize]) -> usize {
    digits
        .iter()
        .zip(radices)
        .rev()
        .fold(0, |acc, (&d, &r)| acc * r + d)
}

/// The three divergences of Sibson's identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SibsonTerms {
    /// D_α(P⋈W ‖ P⊗Q).
    pub lhs: f64,
    /// D_α(P⋈W ‖ P⊗q_{α,P}), which equals I_α(P;W).
    pub information: f64,
    /// D_α(q_{α,P} ‖ Q).
    pub mean_divergence: f64,
}

impl SibsonTerms {
    pub fn residual(&self) -> f64 {
        self.lhs - self.information - self.mean_divergence
    }
}

/// D_α(P⋈W ‖ P⊗Q) by direct summation, without building the joint measure.
pub(crate) fn joint_divergence(alpha: f64, p: &[f64], w: &DiscreteChannel, q: &[f64]) -> ExtReal {
    if alpha == 1.0 {
        let mut acc = 0.0;
        for (x, m) in support(p) {
            match divergence_slices(1.0, w.row(x), q) {
                ExtReal::Finite(d) => acc += m * d,
                ExtReal::Infinite => return ExtReal::Infinite,
            }
        }
        return ExtReal::Finite(acc);
    }
    let mut terms = Vec::new();
    for (x, m) in support(p) {
        match crate::measures::log_power_sum(alpha, w.row(x), q) {
            Some(l) => terms.push(m.ln() + l),
            None if alpha > 1.0 => {}
            None => {}
        }
        if alpha > 1.0 && !divergence_slices(alpha, w.row(x), q).is_finite() {
            return ExtReal::Infinite;
        }
    }
    if terms.is_empty() {
        return ExtReal::Infinite;
    }
    ExtReal::Finite(log_sum_exp(&terms) / (alpha - 1.0))
}

/// Evaluates both sides of Sibson's identity
/// D_α(P⋈W‖P⊗Q) = I_α(P;W) + D_α(q_{α,P}‖Q).
pub fn sibson_decomposition(
    order: Order,
    p: &InputDistribution,
    w: &DiscreteChannel,
    q: &ProbabilityMeasure,
) -> Result<SibsonTerms> {
    check_dims(p, w)?;
    if q.size() != w.output_size() {
        return Err(Error::DimensionMismatch {
            left: q.size(),
            right: w.output_size(),
        });
    }
    let a = order.value();
    let mean = mean_slices(a, p.masses(), w);
    let lhs = joint_divergence(a, p.masses(), w, q.weights())
        .finite()
        .ok_or(Error::InfiniteDivergence)?;
    let information = joint_divergence(a, p.masses(), w, &mean)
        .finite()
        .ok_or(Error::InfiniteDivergence)?;
    let mean_divergence = divergence_slices(a, &mean, q.weights())
        .finite()
        .ok_or(Error::InfiniteDivergence)?;
    Ok(SibsonTerms {
        lhs,
        information,
        mean_divergence,
    })
}

/// Gallager's E₀(ρ,P) = −ln Σ_y [Σ_x P(x) W(y|x)^{1/(1+ρ)}]^{1+ρ}, ρ > −1.
pub fn gallager_e0(rho: f64, p: &InputDistribution, w: &DiscreteChannel) -> Result<f64> {
    check_dims(p, w)?;
    if !(rho > -1.0) {
        return Err(Error::OutOfRange {
            name: "rho",
            value: rho,
        });
    }
    let s = 1.0 / (1.0 + rho);
    let mut total = 0.0;
    for y in 0..w.output_size() {
        let inner: f64 = support(p.masses())
            .map(|(x, m)| m * w.row(x)[y].powf(s))
            .sum();
        if inner > 0.0 {
            total += inner.powf(1.0 + rho);
        }
    }
    Ok(-total.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn h(p: f64) -> f64 {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }

    #[test]
    fn information_examples() {
        let same = DiscreteChannel::new(vec![vec![0.2, 0.8], vec![0.2, 0.8]]).unwrap();
        let p = InputDistribution::new(vec![0.3, 0.7]).unwrap();
        for a in [0.4, 1.0, 2.5] {
            assert!(
                renyi_information(Order::new(a).unwrap(), &p, &same)
                    .unwrap()
                    .abs()
                    < 1e-14
            );
        }
        let u = InputDistribution::uniform(2).unwrap();
        let i1 = renyi_information(Order::ONE, &u, &DiscreteChannel::bsc(0.1).unwrap()).unwrap();
        assert!((i1 - (LN2 - h(0.1))).abs() < 1e-14);
        assert!((i1 - 0.368_064_207_168_497_1).abs() < 1e-12);
        let i = renyi_information(Order::HALF, &u, &DiscreteChannel::bsc(0.0).unwrap()).unwrap();
        assert!((i - LN2).abs() < 1e-14);
    }

    #[test]
    fn mean_examples() {
        let w = DiscreteChannel::new(vec![vec![0.1, 0.6, 0.3], vec![0.5, 0.25, 0.25]]).unwrap();
        let p = InputDistribution::new(vec![0.3, 0.7]).unwrap();
        let m = renyi_mean(Order::ONE, &p, &w).unwrap();
        for y in 0..3 {
            assert!((m.weights()[y] - (0.3 * w.row(0)[y] + 0.7 * w.row(1)[y])).abs() < 1e-15);
        }
        let u = InputDistribution::uniform(2).unwrap();
        let m = renyi_mean(Order::HALF, &u, &DiscreteChannel::bsc(0.1).unwrap()).unwrap();
        assert!((m.weights()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_inputs_are_dropped() {
        let w = DiscreteChannel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let p = InputDistribution::new(vec![1.0, 0.0]).unwrap();
        for a in [0.5, 1.0, 2.0] {
            assert!(
                renyi_information(Order::new(a).unwrap(), &p, &w)
                    .unwrap()
                    .abs()
                    < 1e-15
            );
        }
    }

    #[test]
    fn product_examples() {
        let b = DiscreteChannel::bsc(0.1).unwrap();
        assert_eq!(product_channel(std::slice::from_ref(&b)).unwrap(), b);
        let bb = product_channel(&[b.clone(), b.clone()]).unwrap();
        let x = index_of(&[0, 1], &[2, 2]);
        let y = index_of(&[1, 1], &[2, 2]);
        assert!((bb.row(x)[y] - 0.09).abs() < 1e-15);
        let a = DiscreteChannel::new(vec![vec![0.5, 0.5]; 2]).unwrap();
        let c = DiscreteChannel::new(vec![vec![0.25; 4]; 3]).unwrap();
        let ac = product_channel(&[a, c]).unwrap();
        assert_eq!((ac.input_size(), ac.output_size()), (6, 8));
        assert!(product_channel(&[]).is_err());
        assert!(product_channel_capped(&[b.clone(), b], 15).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let radices = [2, 3, 4];
        for i in 0..24 {
            let d = digits(i, radices.iter().copied());
            assert_eq!(index_of(&d, &radices), i);
        }
        assert_eq!(digits(1, [2, 2].into_iter()), vec![1, 0]);
    }

    #[test]
    fn sibson_examples() {
        let w = DiscreteChannel::bsc(0.1).unwrap();
        let u = InputDistribution::uniform(2).unwrap();
        let mean = renyi_mean(Order::HALF, &u, &w).unwrap();
        let t = sibson_decomposition(Order::HALF, &u, &w, &mean).unwrap();
        assert!(t.mean_divergence.abs() < 1e-15);
        let i = renyi_information(Order::HALF, &u, &w).unwrap();
        assert!((t.lhs - i).abs() < 1e-14);
        let q = ProbabilityMeasure::new(vec![0.9, 0.1]).unwrap();
        let t = sibson_decomposition(Order::HALF, &u, &w, &q).unwrap();
        assert!(t.residual().abs() < 1e-10);
        let same = DiscreteChannel::new(vec![vec![0.3, 0.7]; 2]).unwrap();
        let row = ProbabilityMeasure::new(vec![0.3, 0.7]).unwrap();
        let t = sibson_decomposition(Order::new(1.7).unwrap(), &u, &same, &row).unwrap();
        assert!(
            t.lhs.abs() < 1e-14 && t.information.abs() < 1e-14 && t.mean_divergence.abs() < 1e-14
        );
    }

    #[test]
    fn e0_bridge_on_bsc() {
        let w = DiscreteChannel::bsc(0.1).unwrap();
        let p = InputDistribution::new(vec![0.3, 0.7]).unwrap();
        for rho in [-0.5, 0.25, 1.0, 3.0] {
            let a = Order::new(1.0 / (1.0 + rho)).unwrap();
            let lhs = rho * renyi_information(a, &p, &w).unwrap();
            assert!((lhs - gallager_e0(rho, &p, &w).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn json_shape() {
        let w = DiscreteChannel::bsc(0.25).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(
            s,
            r#"{"inputs":2,"outputs":2,"rows":[[0.75,0.25],[0.25,0.75]]}"#
        );
        let back: DiscreteChannel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<DiscreteChannel>(
            r#"{"inputs":1,"outputs":2,"rows":[[0.5,0.6]]}"#
        )
        .is_err());
    }
}
