//! Behavioral models of the randomizer hardware.
//!
//! Ring oscillator frequencies are fixed per die and drawn from a normal
//! distribution around the nominal frequency. Counters quantize with `floor`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::num::from_count;
use crate::prbs::{MAX_REGISTRY_ORDER, MIN_REGISTRY_ORDER};
use crate::{Error, Real, Result, Scalar};

pub const RO1_NOMINAL_HZ: f64 = 10_000.0;
pub const RO2_NOMINAL_HZ: f64 = 20_000.0;
pub const DEFAULT_SIGMA_FRACTION: f64 = 0.02;

/// Nominal frequency and relative per-die spread of one ring oscillator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoSpec<T> {
    pub nominal_freq: T,
    pub sigma_fraction: T,
}

impl<T: Real> RoSpec<T> {
    pub fn new(nominal_freq: T, sigma_fraction: T) -> Result<Self> {
        let spec = Self {
            nominal_freq,
            sigma_fraction,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nominal_freq.is_nan()
            || self.nominal_freq <= T::zero()
            || !self.nominal_freq.is_finite()
        {
            return Err(Error::InvalidRoSpec(format!(
                "nominal_freq must be > 0, got {}",
                self.nominal_freq
            )));
        }
        let half = T::from_f64(0.5).unwrap();
        if !(self.sigma_fraction >= T::zero() && self.sigma_fraction < half) {
            return Err(Error::InvalidRoSpec(format!(
                "sigma_fraction must be in [0, 0.5), got {}",
                self.sigma_fraction
            )));
        }
        Ok(())
    }

    /// Draws one per-die frequency, rejecting non-positive draws.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> T
    where
        StandardNormal: Distribution<T>,
    {
        let sigma = self.sigma_fraction * self.nominal_freq;
        if sigma == T::zero() {
            return self.nominal_freq;
        }
        let dist = Normal::new(self.nominal_freq, sigma).expect("validated spec");
        loop {
            let f = dist.sample(rng);
            if f > T::zero() {
                return f;
            }
        }
    }
}

impl RoSpec<f64> {
    /// RO₁: 10 kHz timing reference, 2% spread.
    pub fn ro1_default() -> Self {
        Self {
            nominal_freq: RO1_NOMINAL_HZ,
            sigma_fraction: DEFAULT_SIGMA_FRACTION,
        }
    }

    /// RO₂: 20 kHz randomizer clock, 2% spread.
    pub fn ro2_default() -> Self {
        Self {
            nominal_freq: RO2_NOMINAL_HZ,
            sigma_fraction: DEFAULT_SIGMA_FRACTION,
        }
    }
}

/// Oscillator frequencies of one manufactured die.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DieSample<T> {
    /// RO₁, the timing reference.
    pub f1: T,
    /// RO₂, the randomizer clock.
    pub f2: T,
}

/// Samples a die. The same `rng_seed` always gives the same die.
pub fn sample_die<T: Real>(spec1: &RoSpec<T>, spec2: &RoSpec<T>, rng_seed: u64) -> DieSample<T>
where
    StandardNormal: Distribution<T>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let f1 = spec1.sample(&mut rng);
    let f2 = spec2.sample(&mut rng);
    DieSample { f1, f2 }
}

/// Draws `count` independent oscillators from one spec, e.g. the ring
/// oscillator bank of a traditional RO-PUF.
pub fn sample_ro_bank<T: Real>(spec: &RoSpec<T>, count: usize, rng_seed: u64) -> Vec<T>
where
    StandardNormal: Distribution<T>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..count).map(|_| spec.sample(&mut rng)).collect()
}

/// RO₂ count after `ref_cycles` periods of RO₁, truncated to `seed_bits`.
///
/// `floor(ref_cycles * f2 / f1) mod 2^seed_bits`. Only the frequency ratio
/// matters.
pub fn extract_seed<T: Real>(die: &DieSample<T>, ref_cycles: u64, seed_bits: u32) -> u64 {
    assert!((1..=63).contains(&seed_bits), "seed_bits must be in 1..=63");
    let count = (from_count::<T>(ref_cycles) * die.f2 / die.f1).floor();
    let count = count.to_u64().unwrap_or(u64::MAX);
    count & ((1u64 << seed_bits) - 1)
}

/// Traditional multi-RO PUF parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoPufConfig<T> {
    pub num_ros: usize,
    /// Seconds both selected counters run.
    pub count_window: T,
}

impl<T: Real> RoPufConfig<T> {
    pub fn new(num_ros: usize, count_window: T) -> Result<Self> {
        if num_ros < 2 {
            return Err(Error::OutOfRange {
                what: "num_ros",
                value: num_ros as u64,
                expected: ">= 2".into(),
            });
        }
        if count_window.is_nan() || count_window <= T::zero() {
            return Err(Error::InvalidRoSpec(format!(
                "count_window must be > 0, got {count_window}"
            )));
        }
        Ok(Self {
            num_ros,
            count_window,
        })
    }

    /// Select-line width of each multiplexer, `ceil(log2(M))`.
    pub fn challenge_bits(&self) -> u32 {
        (self.num_ros as u64).next_power_of_two().trailing_zeros()
    }

    /// Every unordered pair `(i, j)` with `i < j`; `M(M-1)/2` challenges.
    pub fn all_pairs(&self) -> Vec<(usize, usize)> {
        let m = self.num_ros;
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .collect()
    }
}

/// Pairwise-comparison response of a traditional RO-PUF.
///
/// Each bit is 1 iff RO `i` counts strictly more edges than RO `j` within
/// the window. Equal counts give 0.
pub fn traditional_ropuf_response<T: Real>(
    frequencies: &[T],
    challenges: &[(usize, usize)],
    count_window: T,
) -> Result<Vec<bool>> {
    let m = frequencies.len();
    challenges
        .iter()
        .map(|&(i, j)| {
            if i >= m || j >= m || i == j {
                return Err(Error::InvalidChallenge { i, j, num_ros: m });
            }
            let ci = (frequencies[i] * count_window).floor();
            let cj = (frequencies[j] * count_window).floor();
            Ok(ci > cj)
        })
        .collect()
}

/// Relative area and power of a PRBS architecture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate<T> {
    pub area_scale: T,
    pub power_scale: T,
}

/// Linear flip-flop-count cost model, normalized so order 5 is 1.0.
pub fn estimate_cost<T: Scalar>(order: u32) -> Result<CostEstimate<T>> {
    if !(MIN_REGISTRY_ORDER..=MAX_REGISTRY_ORDER).contains(&order) {
        return Err(Error::UnsupportedOrder {
            order,
            min: MIN_REGISTRY_ORDER,
            max: MAX_REGISTRY_ORDER,
        });
    }
    let scale = from_count::<T>(order.into()) / from_count::<T>(MIN_REGISTRY_ORDER.into());
    Ok(CostEstimate {
        area_scale: scale.clone(),
        power_scale: scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn zero_sigma_gives_nominal() {
        let s1 = RoSpec::new(10_000.0, 0.0).unwrap();
        let s2 = RoSpec::new(20_000.0, 0.0).unwrap();
        let die = sample_die(&s1, &s2, 99);
        assert_eq!(
            die,
            DieSample {
                f1: 10_000.0,
                f2: 20_000.0
            }
        );
    }

    #[test]
    fn sampling_is_reproducible() {
        let (a, b) = (RoSpec::ro1_default(), RoSpec::ro2_default());
        assert_eq!(sample_die(&a, &b, 5), sample_die(&a, &b, 5));
        assert_ne!(sample_die(&a, &b, 5), sample_die(&a, &b, 6));
        let a32 = RoSpec::<f32>::new(10_000.0, 0.02).unwrap();
        assert_eq!(sample_die(&a32, &a32, 1), sample_die(&a32, &a32, 1));
    }

    #[test]
    fn ro_bank() {
        let spec = RoSpec::new(10_000.0, 0.02).unwrap();
        let bank = sample_ro_bank(&spec, 9, 4);
        assert_eq!(bank.len(), 9);
        assert_eq!(bank, sample_ro_bank(&spec, 9, 4));
        assert!(bank.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn spec_validation() {
        assert!(RoSpec::new(0.0, 0.01).is_err());
        assert!(RoSpec::new(-1.0, 0.01).is_err());
        assert!(RoSpec::new(f64::NAN, 0.01).is_err());
        assert!(RoSpec::new(1.0, 0.5).is_err());
        assert!(RoSpec::new(1.0, -0.1).is_err());
        assert!(RoSpec::new(1.0, 0.49).is_ok());
    }

    #[test]
    fn seed_extraction_arithmetic() {
        let q = 1u64 << 21;
        let nominal = DieSample {
            f1: 10_000.0,
            f2: 20_000.0,
        };
        assert_eq!(extract_seed(&nominal, q, 9), 0);
        // ratios 2 + 512/2^21 and 2 + 100/2^21 are exact in binary
        let die = DieSample {
            f1: 1.0,
            f2: 2.0 + 512.0 / q as f64,
        };
        assert_eq!(extract_seed(&die, q, 9), 0);
        let die = DieSample {
            f1: 1.0,
            f2: 2.0 + 100.0 / q as f64,
        };
        assert_eq!(extract_seed(&die, q, 9), 100);
    }

    #[test]
    fn ropuf_tie_and_antisymmetry() {
        let f = [1000.0, 1000.0, 1200.5, 999.0];
        let r = traditional_ropuf_response(&f, &[(0, 1), (1, 0)], 0.01).unwrap();
        assert_eq!(r, vec![false, false]);
        let r = traditional_ropuf_response(&f, &[(2, 3), (3, 2)], 0.01).unwrap();
        assert_eq!(r, vec![true, false]);
        assert!(matches!(
            traditional_ropuf_response(&f, &[(0, 4)], 0.01),
            Err(Error::InvalidChallenge { .. })
        ));
        assert!(traditional_ropuf_response(&f, &[(2, 2)], 0.01).is_err());
    }

    #[test]
    fn ropuf_config() {
        let cfg = RoPufConfig::new(9, 0.01).unwrap();
        assert_eq!(cfg.challenge_bits(), 4);
        assert_eq!(cfg.all_pairs().len(), 36);
        assert_eq!(RoPufConfig::new(8, 0.01).unwrap().challenge_bits(), 3);
        assert_eq!(RoPufConfig::new(2, 0.01).unwrap().challenge_bits(), 1);
        assert!(RoPufConfig::new(1, 0.01).is_err());
        assert!(RoPufConfig::new(4, 0.0).is_err());
    }

    #[test]
    fn cost_model() {
        let c = estimate_cost::<f64>(5).unwrap();
        assert_eq!((c.area_scale, c.power_scale), (1.0, 1.0));
        assert_eq!(estimate_cost::<f64>(10).unwrap().area_scale, 2.0);
        let c = estimate_cost::<Rational>(17).unwrap();
        assert_eq!(c.area_scale, Rational::new(17.into(), 5.into()));
        assert!(estimate_cost::<f64>(4).is_err());
        assert!(estimate_cost::<f64>(18).is_err());
    }
}
