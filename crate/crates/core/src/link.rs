//! Physical-layer model for one transmitter and `K` receive nodes.
//!
//! Each slot produces, per node, `y = sqrt(P) * h * x + n` with a fresh
//! channel draw `h ~ f_k` and real Gaussian noise `n ~ N(0, N0 * B / 2)`.
//! Channels are redrawn every slot, training slots included.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{sample_channel, NodeProfile};
use crate::error::{Error, Result};

/// A transmitted OOK symbol, `0` or `1`.
pub type Symbol = u8;

/// Thermal noise floor used by the registry channel models.
pub const DEFAULT_N0_DBM_PER_HZ: f64 = -174.0;
pub const DEFAULT_BANDWIDTH_HZ: f64 = 100e3;

/// Converts decibel-milliwatts to watts. `-inf` maps to exactly zero.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

/// Per-dimension noise variance `N0 * B / 2` in watts.
pub fn noise_variance(n0_dbm_per_hz: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_watts(n0_dbm_per_hz) * bandwidth_hz / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub tx_power_dbm: f64,
    pub n0_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
}

impl LinkParams {
    /// Validates the parameters. Both power levels accept `-inf` (zero watts).
    pub fn new(tx_power_dbm: f64, n0_dbm_per_hz: f64, bandwidth_hz: f64) -> Result<Self> {
        if tx_power_dbm.is_nan() || tx_power_dbm == f64::INFINITY {
            return Err(Error::param("tx_power_dbm", format!("got {tx_power_dbm}")));
        }
        if n0_dbm_per_hz.is_nan() || n0_dbm_per_hz == f64::INFINITY {
            return Err(Error::param("n0_dbm_per_hz", format!("got {n0_dbm_per_hz}")));
        }
        if !(bandwidth_hz.is_finite() && bandwidth_hz >= 0.0) {
            return Err(Error::param(
                "bandwidth_hz",
                format!("must be finite and >= 0, got {bandwidth_hz}"),
            ));
        }
        Ok(LinkParams {
            tx_power_dbm,
            n0_dbm_per_hz,
            bandwidth_hz,
        })
    }

    pub fn tx_power_w(&self) -> f64 {
        dbm_to_watts(self.tx_power_dbm)
    }

    pub fn noise_variance_w(&self) -> f64 {
        noise_variance(self.n0_dbm_per_hz, self.bandwidth_hz)
    }

    /// `sqrt(P)`, the amplitude multiplying `h * x`.
    pub fn amplitude(&self) -> f64 {
        self.tx_power_w().sqrt()
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_variance_w().sqrt()
    }
}

/// The first `n_t / 2` training slots carry `1`, the rest `0`.
pub fn training_symbols(n_t: usize) -> Result<Vec<Symbol>> {
    if n_t < 2 || !n_t.is_multiple_of(2) {
        return Err(Error::param("n_t", format!("must be even and >= 2, got {n_t}")));
    }
    let mut x = vec![1; n_t / 2];
    x.resize(n_t, 0);
    Ok(x)
}

/// Equiprobable data symbols: a uniform draw below 1/2 maps to `1`.
pub fn generate_data_symbols<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Symbol> {
    (0..n).map(|_| Symbol::from(rng.random::<f64>() < 0.5)).collect()
}

/// One noiseless-plus-noise sample of the received-signal equation.
#[inline]
pub fn received_value(amplitude: f64, gain: f64, x: Symbol, noise: f64) -> f64 {
    amplitude * gain * f64::from(x) + noise
}

/// Received samples for `K` nodes over `N` slots, stored node-major.
///
/// The realised channel gains are kept alongside so that coherent
/// baselines can be given perfect channel knowledge.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    symbols: Vec<Symbol>,
    gains: Vec<f64>,
    received: Vec<f64>,
    nodes: usize,
}

impl ReceivedFrame {
    /// Builds a frame from explicit values. `received[k][n]` is node `k`, slot `n`.
    pub fn from_parts(symbols: Vec<Symbol>, gains: Vec<Vec<f64>>, received: Vec<Vec<f64>>) -> Result<Self> {
        let slots = symbols.len();
        if received.is_empty() {
            return Err(Error::param("nodes", "frame needs at least one node"));
        }
        if gains.len() != received.len() || received.iter().chain(gains.iter()).any(|row| row.len() != slots) {
            return Err(Error::param("frame", "every node row must have one value per slot"));
        }
        if symbols.iter().any(|&x| x > 1) {
            return Err(Error::param("symbols", "OOK symbols must be 0 or 1"));
        }
        Ok(ReceivedFrame {
            nodes: received.len(),
            symbols,
            gains: gains.concat(),
            received: received.concat(),
        })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn slots(&self) -> usize {
        self.symbols.len()
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Received values `y_k[1..N]` for node `k`.
    pub fn received(&self, k: usize) -> &[f64] {
        let n = self.slots();
        &self.received[k * n..(k + 1) * n]
    }

    /// Channel gains `h_k[1..N]` for node `k`.
    pub fn gains(&self, k: usize) -> &[f64] {
        let n = self.slots();
        &self.gains[k * n..(k + 1) * n]
    }
}

/// Passes `x` through the fading channels of `nodes`.
///
/// Draw order is slot-major: for each slot, for each node, one channel
/// uniform then one standard normal. The noise draw is consumed even when the
/// noise variance is zero, so the stream layout does not depend on `params`.
pub fn generate_received<R: Rng + ?Sized>(
    x: &[Symbol],
    nodes: &[NodeProfile],
    params: &LinkParams,
    rng: &mut R,
) -> Result<ReceivedFrame> {
    if nodes.is_empty() {
        return Err(Error::param("nodes", "at least one receive node is required"));
    }
    let slots = x.len();
    let k = nodes.len();
    let amplitude = params.amplitude();
    let sigma = params.noise_std();
    let mut gains = vec![0.0; k * slots];
    let mut received = vec![0.0; k * slots];
    for (n, &symbol) in x.iter().enumerate() {
        for (i, node) in nodes.iter().enumerate() {
            let h = sample_channel(&node.dist, rng);
            let z: f64 = rng.sample(StandardNormal);
            gains[i * slots + n] = h;
            received[i * slots + n] = received_value(amplitude, h, symbol, sigma * z);
        }
    }
    Ok(ReceivedFrame {
        symbols: x.to_vec(),
        gains,
        received,
        nodes: k,
    })
}
