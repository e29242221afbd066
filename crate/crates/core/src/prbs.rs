//! Fibonacci LFSR engine and the PRBS polynomial registry.
//!
//! # Bit convention
//!
//! A register of order `n` lives in the low `n` bits of a `u32`. Stage `k`
//! (1-based) is integer bit `k - 1`, so the tap for the term `x^t` reads bit
//! `t - 1`. On every clock the register shifts towards the most significant
//! stage: stage `n` (bit `n - 1`) leaves the register as the output bit and
//! the feedback (XOR of all tap stages) enters stage 1 (bit 0).
//!
//! With `x^9 + x^5 + 1` the feedback is `bit8 ^ bit4`, which gives the
//! recurrence `s[k+9] = s[k] ^ s[k+4]` on the serial stream. This is the usual
//! ITU/Xilinx PRBS layout.
//!
//! ```
//! use ropuf_tdma::prbs::{lfsr_step, registry_polynomial, LfsrState};
//!
//! let prbs9 = registry_polynomial(9).unwrap();
//! let (next, out) = lfsr_step(LfsrState::new(0b1), &prbs9);
//! assert_eq!((next.bits(), out), (0b10, false));
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MIN_REGISTRY_ORDER: u32 = 5;
pub const MAX_REGISTRY_ORDER: u32 = 17;
pub const MAX_ORDER: u32 = 32;

/// Maximal-length tap sets for orders 5..=17.
///
/// Orders 9 and 17 use `x^9+x^5+1` and `x^17+x^14+1`. The remaining rows come
/// from the Xilinx XAPP052 maximal-length table (two taps where one exists,
/// otherwise four).
const REGISTRY: [(u32, &[u32]); 13] = [
    (5, &[5, 3]),
    (6, &[6, 5]),
    (7, &[7, 6]),
    (8, &[8, 6, 5, 4]),
    (9, &[9, 5]),
    (10, &[10, 7]),
    (11, &[11, 9]),
    (12, &[12, 6, 4, 1]),
    (13, &[13, 4, 3, 1]),
    (14, &[14, 5, 3, 1]),
    (15, &[15, 14]),
    (16, &[16, 15, 13, 4]),
    (17, &[17, 14]),
];

/// Generator polynomial of an LFSR: the order plus the exponents of the
/// non-constant terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeedbackPolynomial {
    order: u32,
    /// Descending, deduplicated.
    taps: Vec<u32>,
    #[serde(skip)]
    mask: u32,
}

impl FeedbackPolynomial {
    pub fn new(order: u32, taps: impl IntoIterator<Item = u32>) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidPolynomial(format!(
                "order {order} outside 1..={MAX_ORDER}"
            )));
        }
        let mut taps: Vec<u32> = taps.into_iter().collect();
        taps.sort_unstable_by(|a, b| b.cmp(a));
        taps.dedup();
        if let Some(&bad) = taps.iter().find(|&&t| t == 0 || t > order) {
            return Err(Error::InvalidPolynomial(format!(
                "tap x^{bad} outside 1..={order}"
            )));
        }
        if taps.first() != Some(&order) {
            return Err(Error::InvalidPolynomial(format!(
                "leading term x^{order} missing from taps"
            )));
        }
        let mask = taps.iter().fold(0u32, |m, &t| m | 1 << (t - 1));
        Ok(Self { order, taps, mask })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn taps(&self) -> &[u32] {
        &self.taps
    }

    /// Register bits read by the feedback XOR.
    pub fn tap_mask(&self) -> u32 {
        self.mask
    }

    /// Mask of the `order` meaningful register bits.
    pub fn state_mask(&self) -> u32 {
        ((1u64 << self.order) - 1) as u32
    }

    /// Number of distinct register states, `2^order`.
    pub fn state_count(&self) -> u64 {
        1u64 << self.order
    }
}

impl fmt::Display for FeedbackPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.taps {
            write!(f, "x^{t} + ")?;
        }
        write!(f, "1")
    }
}

/// LFSR register contents. Only the low `order` bits are meaningful.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LfsrState(u32);

impl LfsrState {
    pub const fn new(bits: u32) -> Self {
        Self(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// The all-zero state is a fixed point of every LFSR.
    pub const fn is_degenerate(self) -> bool {
        self.0 == 0
    }
}

/// Returns the polynomial for a supported PRBS order (5..=17).
pub fn registry_polynomial(order: u32) -> Result<FeedbackPolynomial> {
    let (_, taps) = REGISTRY
        .iter()
        .find(|(o, _)| *o == order)
        .ok_or(Error::UnsupportedOrder {
            order,
            min: MIN_REGISTRY_ORDER,
            max: MAX_REGISTRY_ORDER,
        })?;
    FeedbackPolynomial::new(order, taps.iter().copied())
}

/// All registry polynomials in ascending order.
pub fn registry() -> impl Iterator<Item = FeedbackPolynomial> {
    (MIN_REGISTRY_ORDER..=MAX_REGISTRY_ORDER).map(|o| registry_polynomial(o).unwrap())
}

/// Clocks the register once. Returns the next state and the bit shifted out.
#[inline]
pub fn lfsr_step(state: LfsrState, poly: &FeedbackPolynomial) -> (LfsrState, bool) {
    let bits = state.0 & poly.state_mask();
    let feedback = (bits & poly.mask).count_ones() & 1;
    let out = (bits >> (poly.order - 1)) & 1 == 1;
    let next = ((bits << 1) | feedback) & poly.state_mask();
    (LfsrState(next), out)
}

/// Maps a seed to its order-bit device signature.
///
/// The seed is loaded into the register (seed 0 becomes the all-ones word,
/// since a zero register never leaves zero), the register is clocked `order`
/// times, and the resulting state is the signature. The map is a bijection on
/// nonzero seeds.
pub fn signature_from_seed(seed: u32, poly: &FeedbackPolynomial) -> u32 {
    let mask = poly.state_mask();
    let seed = seed & mask;
    let mut state = LfsrState(if seed == 0 { mask } else { seed });
    for _ in 0..poly.order {
        state = lfsr_step(state, poly).0;
    }
    state.0
}

/// Cycle length starting from state 1.
///
/// Walks at most `2^order` steps; a register that never returns to 1 (only
/// possible for polynomials whose step is not invertible) reports the number
/// of steps walked.
pub fn period(poly: &FeedbackPolynomial) -> u64 {
    let start = LfsrState(1);
    let mut state = start;
    let limit = poly.state_count();
    for n in 1..=limit {
        state = lfsr_step(state, poly).0;
        if state == start {
            return n;
        }
    }
    limit
}

/// Infinite serial output stream starting from `seed`.
pub fn output_bits(seed: u32, poly: &FeedbackPolynomial) -> impl Iterator<Item = bool> + '_ {
    let mut state = LfsrState(seed & poly.state_mask());
    std::iter::repeat_with(move || {
        let (next, out) = lfsr_step(state, poly);
        state = next;
        out
    })
}
