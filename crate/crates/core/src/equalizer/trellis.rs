//! ISI channel model: taps, the time-invariant trellis, seeded
//! transmission, and branch metrics.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::code::ParityCheckMatrix;
use crate::{Error, Result};

/// BPSK map: bit 0 to `+1`, bit 1 to `-1`.
pub fn bpsk(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Channel taps and noise level.
///
/// The noise density is taken proportional to `exp(-|r - mean|^2 / sigma2)`,
/// so the branch metric carries a bare `1/sigma2` factor and the matching
/// real noise has variance `sigma2 / 2`. SNR is `E_s / sigma2` with
/// `E_s` the tap energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub taps: Vec<f64>,
    pub sigma2: f64,
}

impl ChannelSpec {
    pub fn new(taps: Vec<f64>, sigma2: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Model("channel needs at least one tap".into()));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::Model("channel taps must be finite".into()));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::Model(format!("noise variance must be positive, got {sigma2}")));
        }
        Ok(Self { taps, sigma2 })
    }

    /// Channel memory `L` (tap count minus one).
    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }

    /// Symbol energy `E_s`, the squared tap norm.
    pub fn symbol_energy(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }

    /// Noise variance realizing the given `E_s / sigma2` ratio in dB.
    pub fn sigma2_for_snr_db(taps: &[f64], snr_db: f64) -> f64 {
        let es: f64 = taps.iter().map(|t| t * t).sum();
        es / 10f64.powf(snr_db / 10.0)
    }
}

/// Time-invariant state-space model of the channel.
///
/// Edges are the `2^(L+1)` bit windows `(d_0 .. d_L)` packed with `d_0`
/// at the least significant bit; states are the `2^L` windows of length
/// `L` packed the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct Trellis {
    taps: Vec<f64>,
    outputs: Vec<f64>,
}

/// Builds the complete edge set for the channel taps.
pub fn build_trellis(taps: &[f64]) -> Trellis {
    assert!(!taps.is_empty(), "channel needs at least one tap");
    let memory = taps.len() - 1;
    let outputs = (0..1usize << (memory + 1))
        .map(|edge| {
            taps.iter()
                .enumerate()
                .map(|(t, h)| h * bpsk(((edge >> t) & 1) as u8))
                .sum()
        })
        .collect();
    Trellis { taps: taps.to_vec(), outputs }
}

impl Trellis {
    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn num_edges(&self) -> usize {
        1 << (self.memory() + 1)
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory()
    }

    /// Channel input bit of an edge.
    pub fn input(&self, edge: usize) -> u8 {
        (edge & 1) as u8
    }

    /// Start state `(d_1 .. d_L)`.
    pub fn start_state(&self, edge: usize) -> usize {
        edge >> 1
    }

    /// End state `(d_0 .. d_{L-1})`.
    pub fn end_state(&self, edge: usize) -> usize {
        edge & (self.num_states() - 1)
    }

    /// Noiseless channel output of an edge.
    pub fn output(&self, edge: usize) -> f64 {
        self.outputs[edge]
    }

    /// The unique edge leaving `state` under the given input bit.
    pub fn edge_from(&self, state: usize, input: u8) -> usize {
        (state << 1) | input as usize
    }

    /// Text label of an edge: the bits `d_0 .. d_L`.
    pub fn edge_label(&self, edge: usize) -> String {
        (0..=self.memory()).map(|t| if (edge >> t) & 1 == 1 { '1' } else { '0' }).collect()
    }

    /// True when distinct edges always produce distinct outputs.
    pub fn output_injective(&self) -> bool {
        let mut sorted = self.outputs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.windows(2).all(|w| w[0] != w[1])
    }
}

/// One simulated transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub codeword: Vec<u8>,
    /// Pre-block bits `c_0, c_{-1}, ..` feeding the unknown initial state.
    pub pre_bits: Vec<u8>,
    pub received: Vec<f64>,
}

/// Noiseless convolution of a codeword with the taps, pre-block bits
/// supplying the indices at and before zero.
pub fn noiseless_convolution(codeword: &[u8], pre_bits: &[u8], taps: &[f64]) -> Vec<f64> {
    let memory = taps.len() - 1;
    assert!(pre_bits.len() == memory, "one pre-block bit per memory element");
    let bit_at = |idx: isize| -> u8 {
        if idx >= 1 {
            codeword[(idx - 1) as usize]
        } else {
            pre_bits[(-idx) as usize]
        }
    };
    (1..=codeword.len() as isize)
        .map(|i| taps.iter().enumerate().map(|(t, h)| h * bpsk(bit_at(i - t as isize))).sum())
        .collect()
}

/// Samples a transmission: a codeword (encoded from `message` when given,
/// random otherwise), uniform pre-block bits, and additive noise of
/// variance `sigma2 / 2` per the metric convention. `sigma2 == 0` is the
/// noise-off switch. Fully determined by the seed.
pub fn simulate_transmission(
    matrix: &ParityCheckMatrix,
    channel: &ChannelSpec,
    message: Option<&[u8]>,
    seed: u64,
) -> Result<Transmission> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_transmission_with_rng(matrix, &channel.taps, channel.sigma2, message, &mut rng)
}

pub(crate) fn simulate_transmission_with_rng(
    matrix: &ParityCheckMatrix,
    taps: &[f64],
    sigma2: f64,
    message: Option<&[u8]>,
    rng: &mut impl Rng,
) -> Result<Transmission> {
    let codeword = match message {
        Some(bits) => matrix.encode(bits)?,
        None => {
            let k = matrix.dimension();
            let bits: Vec<u8> = (0..k).map(|_| rng.gen_range(0..=1u8)).collect();
            matrix.encode(&bits)?
        }
    };
    let memory = taps.len() - 1;
    let pre_bits: Vec<u8> = (0..memory).map(|_| rng.gen_range(0..=1u8)).collect();
    let mut received = noiseless_convolution(&codeword, &pre_bits, taps);
    if sigma2 > 0.0 {
        let scale = (sigma2 / 2.0).sqrt();
        for r in received.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *r += scale * z;
        }
    }
    Ok(Transmission { codeword, pre_bits, received })
}

/// Per-section branch metrics.
///
/// `reduced[i][edge]` is the log-likelihood of the edge relative to the
/// all-zero edge, `(|r_i - op(0)|^2 - |r_i - op(edge)|^2) / sigma2`, with
/// the zero-edge entry identically zero. `zero_edge[i]` is the zero-edge
/// log-likelihood `-|r_i - op(0)|^2 / sigma2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchMetrics {
    pub reduced: Vec<Vec<f64>>,
    pub zero_edge: Vec<f64>,
}

pub fn branch_metrics(trellis: &Trellis, received: &[f64], sigma2: f64) -> Result<BranchMetrics> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::Precondition(format!(
            "branch metrics need a positive noise variance, got {sigma2}"
        )));
    }
    let zero_out = trellis.output(0);
    let mut reduced = Vec::with_capacity(received.len());
    let mut zero_edge = Vec::with_capacity(received.len());
    for &r in received {
        let base = (r - zero_out) * (r - zero_out);
        zero_edge.push(-base / sigma2);
        reduced.push(
            (0..trellis.num_edges())
                .map(|edge| {
                    if edge == 0 {
                        0.0
                    } else {
                        let diff = r - trellis.output(edge);
                        (base - diff * diff) / sigma2
                    }
                })
                .collect(),
        );
    }
    Ok(BranchMetrics { reduced, zero_edge })
}
