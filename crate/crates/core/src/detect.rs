//! Noncoherent OOK detection at a fusion center.
//!
//! During training each node sees `n_t / 2` ones followed by `n_t / 2` zeros
//! and reduces them to a handful of reference values ([`TrainingStats`]).
//! During data transmission every node turns its instantaneous amplitude
//! `|y_k|` into a pair of scores `(w1, w0)`; the fusion center sums them over
//! nodes and picks the symbol with the larger total ([`fuse`]).
//!
//! Three weightings are provided:
//!
//! - probability: log empirical likelihoods of the node's own hard decision,
//! - deviation: signed distance of `|y_k|` from the per-symbol mean amplitude,
//! - combination: squared deviation scaled by the reference amplitudes, with
//!   the probability weight as a penalty exponent.
//!
//! [`mrc_detect`] is the coherent baseline with perfect channel knowledge.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::link::{training_symbols, ReceivedFrame, Symbol};

/// Per-node reference values learned from one training frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingStats {
    a_th: f64,
    a_one: f64,
    a_zero: f64,
    p11: f64,
    p00: f64,
    n_t: usize,
    // cached logs for the probability weights
    ln_p11: f64,
    ln_q11: f64,
    ln_p00: f64,
    ln_q00: f64,
}

fn check_n_t(n_t: usize) -> Result<()> {
    if n_t < 4 || !n_t.is_multiple_of(2) {
        return Err(Error::param("n_t", format!("must be even and >= 4, got {n_t}")));
    }
    Ok(())
}

impl TrainingStats {
    /// Learns the reference values of one node from its training samples.
    ///
    /// `received` must follow the training layout: the first half was sent as
    /// `1`, the second half as `0`.
    pub fn from_training(received: &[f64]) -> Result<Self> {
        let n_t = received.len();
        check_n_t(n_t)?;
        let half = n_t / 2;
        let amplitudes = || received.iter().map(|y| y.abs());

        let a_th = compensated_sum(amplitudes()) / n_t as f64;
        let a_one = 2.0 * compensated_sum(amplitudes().take(half)) / n_t as f64;
        let a_zero = 2.0 * compensated_sum(amplitudes().skip(half)) / n_t as f64;

        // hard decisions against a_th; `>=` decides 1
        let ones_correct = amplitudes().take(half).filter(|&a| a >= a_th).count();
        let zeros_correct = amplitudes().skip(half).filter(|&a| a < a_th).count();

        let p11 = clamp_probability(ones_correct as f64 / half as f64, n_t);
        let p00 = clamp_probability(zeros_correct as f64 / half as f64, n_t);
        Ok(Self::build(a_th, a_one, a_zero, p11, p00, n_t))
    }

    /// Assembles stats from explicit values.
    ///
    /// Probabilities must already lie in `[2/n_t, 1 - 2/n_t]`; amplitudes
    /// must be finite and non-negative.
    pub fn from_parts(a_th: f64, a_one: f64, a_zero: f64, p11: f64, p00: f64, n_t: usize) -> Result<Self> {
        check_n_t(n_t)?;
        for (name, a) in [("a_th", a_th), ("a_one", a_one), ("a_zero", a_zero)] {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {a}")));
            }
        }
        let (lo, hi) = probability_bounds(n_t);
        for (name, p) in [("p11", p11), ("p00", p00)] {
            if !(lo..=hi).contains(&p) {
                return Err(Error::param(name, format!("must lie in [{lo}, {hi}], got {p}")));
            }
        }
        Ok(Self::build(a_th, a_one, a_zero, p11, p00, n_t))
    }

    fn build(a_th: f64, a_one: f64, a_zero: f64, p11: f64, p00: f64, n_t: usize) -> Self {
        TrainingStats {
            a_th,
            a_one,
            a_zero,
            p11,
            p00,
            n_t,
            ln_p11: p11.ln(),
            ln_q11: (1.0 - p11).ln(),
            ln_p00: p00.ln(),
            ln_q00: (1.0 - p00).ln(),
        }
    }

    /// Mean training amplitude over all slots.
    pub fn a_th(&self) -> f64 {
        self.a_th
    }

    /// Mean amplitude over the slots that carried `1`.
    pub fn a_one(&self) -> f64 {
        self.a_one
    }

    /// Mean amplitude over the slots that carried `0`.
    pub fn a_zero(&self) -> f64 {
        self.a_zero
    }

    pub fn p11(&self) -> f64 {
        self.p11
    }

    pub fn p00(&self) -> f64 {
        self.p00
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Node-level hard decision: `1` iff `|y| >= a_th`.
    #[inline]
    pub fn threshold_decision(&self, y_abs: f64) -> Symbol {
        Symbol::from(y_abs >= self.a_th)
    }
}

/// Neumaier summation; the result is within about one ulp of the exact sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + carry
}

/// Sums `values` in ascending order, so that equal multisets of terms give
/// bit-identical totals whatever the node order.
pub(crate) fn ordered_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

/// `[2/n_t, 1 - 2/n_t]`.
pub fn probability_bounds(n_t: usize) -> (f64, f64) {
    let edge = 2.0 / n_t as f64;
    (edge, 1.0 - edge)
}

fn clamp_probability(p: f64, n_t: usize) -> f64 {
    let (lo, hi) = probability_bounds(n_t);
    p.clamp(lo, hi)
}

/// Learns [`TrainingStats`] for every node of a training frame.
pub fn compute_training_stats(frame: &ReceivedFrame) -> Result<Vec<TrainingStats>> {
    check_n_t(frame.slots())?;
    if frame.symbols() != training_symbols(frame.slots())? {
        return Err(Error::param(
            "training_frame",
            "symbols must be n_t/2 ones followed by n_t/2 zeros",
        ));
    }
    (0..frame.nodes())
        .map(|k| TrainingStats::from_training(frame.received(k)))
        .collect()
}

/// Evidence for `1` and for `0` contributed by one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WeightPair {
    pub one: f64,
    pub zero: f64,
}

impl WeightPair {
    pub fn new(one: f64, zero: f64) -> Self {
        WeightPair { one, zero }
    }
}

/// Log empirical likelihoods of the node's hard decision.
#[inline]
pub fn prob_weights(y_abs: f64, stats: &TrainingStats) -> WeightPair {
    if stats.threshold_decision(y_abs) == 1 {
        WeightPair::new(stats.ln_p11, stats.ln_q00)
    } else {
        WeightPair::new(stats.ln_q11, stats.ln_p00)
    }
}

#[inline]
pub fn dev_weights(y_abs: f64, stats: &TrainingStats) -> WeightPair {
    WeightPair::new(y_abs - stats.a_one, stats.a_zero - y_abs)
}

/// `d^2 / a`, continued to `a = 0` as `0` for `d = 0` and `+inf` otherwise.
#[inline]
fn scaled_square(d: f64, a: f64) -> f64 {
    let d2 = d * d;
    if a > 0.0 {
        d2 / a
    } else if d2 == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Combination weights.
///
/// ```text
/// w1 = -(w1d)^2 / a_one  + (w1d)^2 / a_th * w1p
/// w0 = -(w0d)^2 / a_zero + (w0d)^2 / a_th * w0p
/// ```
///
/// A zero `a_one` or `a_zero` (noise-free training) is taken in the limit,
/// which sends the weight to `-inf` unless the deviation is exactly zero. A
/// zero `a_th` means the whole training frame was silent and is rejected.
pub fn comb_weights(y_abs: f64, stats: &TrainingStats) -> Result<WeightPair> {
    if stats.a_th <= 0.0 {
        return Err(Error::DegenerateTraining {
            node: 0,
            reason: "all training amplitudes are zero".into(),
        });
    }
    Ok(comb_weights_unchecked(y_abs, stats))
}

#[inline]
pub(crate) fn comb_weights_unchecked(y_abs: f64, stats: &TrainingStats) -> WeightPair {
    let dev = dev_weights(y_abs, stats);
    let prob = prob_weights(y_abs, stats);
    let one = -scaled_square(dev.one, stats.a_one) + dev.one * dev.one / stats.a_th * prob.one;
    let zero = -scaled_square(dev.zero, stats.a_zero) + dev.zero * dev.zero / stats.a_th * prob.zero;
    WeightPair::new(one, zero)
}

/// Fusion rule on summed weights. Ties go to `0`.
#[inline]
pub fn decide(sum_one: f64, sum_zero: f64) -> Symbol {
    Symbol::from(sum_one > sum_zero)
}

/// Sums per-node weights and decides. Ties go to `0`.
///
/// Each side is accumulated in ascending order of its terms, which makes the
/// decision independent of node order and keeps exact ties (the same
/// multiset of weights on both sides) exact.
pub fn fuse(weights: &[WeightPair]) -> Result<Symbol> {
    if weights.is_empty() {
        return Err(Error::param("weights", "fusion needs at least one node"));
    }
    let mut one: Vec<f64> = weights.iter().map(|w| w.one).collect();
    let mut zero: Vec<f64> = weights.iter().map(|w| w.zero).collect();
    Ok(decide(ordered_sum(&mut one), ordered_sum(&mut zero)))
}

/// Detection technique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Technique {
    Probability,
    Deviation,
    Combination,
    /// Coherent maximum ratio combining with perfect channel knowledge.
    Mrc,
}

impl Technique {
    pub const ALL: [Technique; 4] = [
        Technique::Probability,
        Technique::Deviation,
        Technique::Combination,
        Technique::Mrc,
    ];

    pub const NONCOHERENT: [Technique; 3] = [Technique::Probability, Technique::Deviation, Technique::Combination];

    pub fn name(&self) -> &'static str {
        match self {
            Technique::Probability => "probability",
            Technique::Deviation => "deviation",
            Technique::Combination => "combination",
            Technique::Mrc => "mrc",
        }
    }

    pub fn is_coherent(&self) -> bool {
        matches!(self, Technique::Mrc)
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Technique::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| {
            Error::param(
                "technique",
                format!("unknown technique `{s}`, expected probability, deviation, combination or mrc"),
            )
        })
    }
}

/// Noncoherent detection of one data slot.
pub fn detect(technique: Technique, y_abs: &[f64], stats: &[TrainingStats]) -> Result<Symbol> {
    if y_abs.len() != stats.len() {
        return Err(Error::param(
            "y_abs",
            format!("{} amplitudes for {} nodes", y_abs.len(), stats.len()),
        ));
    }
    let pairs = y_abs.iter().zip(stats);
    let weights: Vec<WeightPair> = match technique {
        Technique::Probability => pairs.map(|(&y, s)| prob_weights(y, s)).collect(),
        Technique::Deviation => pairs.map(|(&y, s)| dev_weights(y, s)).collect(),
        Technique::Combination => pairs
            .enumerate()
            .map(|(k, (&y, s))| {
                comb_weights(y, s).map_err(|e| match e {
                    Error::DegenerateTraining { reason, .. } => Error::DegenerateTraining { node: k, reason },
                    other => other,
                })
            })
            .collect::<Result<_>>()?,
        Technique::Mrc => return Err(Error::NeedsChannelState("mrc")),
    };
    fuse(&weights)
}

/// Maximum ratio combining with known real channels.
///
/// Decides `1` iff `sum h_k y_k > sqrt(P)/2 * sum h_k^2`, the midpoint between
/// the two noiseless combiner outputs. Ties go to `0`.
pub fn mrc_detect(y: &[f64], h: &[f64], p_watts: f64) -> Symbol {
    let (z, energy) = y
        .iter()
        .zip(h)
        .fold((0.0, 0.0), |(z, e), (&y, &h)| (z + h * y, e + h * h));
    Symbol::from(z > 0.5 * p_watts.sqrt() * energy)
}
