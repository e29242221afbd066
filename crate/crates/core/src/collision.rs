//! Slot-collision probability for `n` nodes drawing uniform `N`-bit slots.
//!
//! The closed form is `1 - (2^N)! / (2^(nN) (2^N - n)!)`. Factorials of `2^N`
//! are unusable beyond tiny orders, so the working path evaluates the
//! equivalent product `1 - prod_{k<n} (1 - k/2^N)`, which is the same
//! expression after cancelling `(2^N - n)!` and splitting `2^(nN)` into `n`
//! factors of `2^N`. When `n > 2^N` some slot must repeat and the probability
//! is 1.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::num::from_count;
use crate::{Error, Real, Result, Scalar};

/// Largest order accepted by [`CollisionQuery`].
pub const MAX_QUERY_ORDER: u32 = 63;

/// Largest order the factorial oracle will evaluate.
pub const MAX_RATIONAL_ORDER: u32 = 8;

/// Monte Carlo trials per RNG stream. Fixed so results do not depend on how
/// many worker threads run the batches.
const MC_BATCH: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionQuery {
    order: u32,
    nodes: u64,
}

impl CollisionQuery {
    pub fn new(order: u32, nodes: u64) -> Result<Self> {
        if !(1..=MAX_QUERY_ORDER).contains(&order) {
            return Err(Error::OutOfRange {
                what: "order",
                value: order.into(),
                expected: format!("1..={MAX_QUERY_ORDER}"),
            });
        }
        Ok(Self { order, nodes })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    /// Number of distinct slots, `2^order`.
    pub fn slots(&self) -> u64 {
        1u64 << self.order
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    RationalOracle,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionEstimate<T> {
    pub probability: T,
    pub method: Method,
    /// Monte Carlo only.
    pub trials: Option<u64>,
    /// Binomial standard error, Monte Carlo only.
    pub std_error: Option<T>,
}

/// Collision probability via the incremental product, in any [`Scalar`].
///
/// With `T = Rational` the result is exact.
pub fn collision_probability<T: Scalar>(q: CollisionQuery) -> T {
    let slots = q.slots();
    if q.nodes > slots {
        return T::one();
    }
    let denom: T = from_count(slots);
    let mut distinct = T::one();
    for k in 0..q.nodes {
        distinct = distinct * (from_count::<T>(slots - k) / denom.clone());
    }
    T::one() - distinct
}

pub fn collision_probability_exact<T: Scalar>(q: CollisionQuery) -> CollisionEstimate<T> {
    CollisionEstimate {
        probability: collision_probability(q),
        method: Method::Exact,
        trials: None,
        std_error: None,
    }
}

/// Factorial form evaluated with big integers.
///
/// Kept deliberately separate from [`collision_probability`] so the two can
/// check each other. Orders above [`MAX_RATIONAL_ORDER`] are refused.
pub fn collision_probability_rational(q: CollisionQuery) -> Result<BigRational> {
    if q.order > MAX_RATIONAL_ORDER {
        return Err(Error::OutOfRange {
            what: "order",
            value: q.order.into(),
            expected: format!("1..={MAX_RATIONAL_ORDER} for the rational oracle"),
        });
    }
    let slots = q.slots();
    if q.nodes > slots {
        return Ok(BigRational::one());
    }
    let factorial = |m: u64| (1..=m).fold(BigUint::one(), |acc, k| acc * k);
    let numer = factorial(slots);
    let denom = BigUint::from(2u8).pow(q.order * q.nodes as u32) * factorial(slots - q.nodes);
    let distinct = BigRational::new(numer.into(), denom.into());
    Ok(BigRational::one() - distinct)
}

/// Largest `n` whose collision probability stays strictly below one half.
///
/// Scans upward from one; the probability is monotone in `n`.
pub fn nodes_supported(order: u32) -> Result<u64> {
    let q = CollisionQuery::new(order, 0)?;
    let slots = q.slots() as f64;
    let mut distinct = 1.0f64;
    let mut n = 0u64;
    loop {
        // distinct currently holds P(no collision) for n nodes; extend to n + 1
        let next = distinct * (1.0 - n as f64 / slots);
        if 1.0 - next >= 0.5 {
            return Ok(n);
        }
        distinct = next;
        n += 1;
    }
}

/// Estimates the collision probability by sampling.
///
/// Trials are split into fixed-size batches; batch `i` draws from ChaCha8
/// stream `i` keyed by `rng_seed`, so the result depends only on the
/// arguments. Batches run on the rayon pool.
pub fn monte_carlo_collision<T: Real>(
    q: CollisionQuery,
    trials: u64,
    rng_seed: u64,
) -> Result<CollisionEstimate<T>> {
    if trials == 0 {
        return Err(Error::OutOfRange {
            what: "trials",
            value: 0,
            expected: ">= 1".into(),
        });
    }
    let batches = trials.div_ceil(MC_BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let len = MC_BATCH.min(trials - batch * MC_BATCH);
            count_collisions(q, len, rng_seed, batch)
        })
        .sum();

    let p = hits as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    Ok(CollisionEstimate {
        probability: T::from_f64(p).unwrap(),
        method: Method::MonteCarlo,
        trials: Some(trials),
        std_error: Some(T::from_f64(se).unwrap()),
    })
}

fn count_collisions(q: CollisionQuery, trials: u64, rng_seed: u64, stream: u64) -> u64 {
    if q.nodes < 2 {
        return 0;
    }
    if q.nodes > q.slots() {
        return trials;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(stream);
    let mut draws = Vec::with_capacity(q.nodes as usize);
    let mut hits = 0;
    for _ in 0..trials {
        draws.clear();
        draws.extend((0..q.nodes).map(|_| rng.random_range(0..q.slots())));
        draws.sort_unstable();
        if draws.windows(2).any(|w| w[0] == w[1]) {
            hits += 1;
        }
    }
    hits
}
