//! Seed sensitivity of PRBS signatures.
//!
//! A sweep records the signature of every seed of one polynomial. Dies whose
//! seeds land close together (small process variation) should still get
//! signatures that are far apart, which shows up as a large standard
//! deviation of the outputs inside every window of consecutive seeds.
//!
//! Standard deviations are population deviations (divisor = window size).

use serde::{Deserialize, Serialize};

use crate::hardware::estimate_cost;
use crate::prbs::{
    registry_polynomial, signature_from_seed, FeedbackPolynomial, MAX_REGISTRY_ORDER,
};
use crate::{Error, Real, Result};

pub const DEFAULT_WINDOW: usize = 16;

/// Published reference value for the PRBS9 consecutive-seed deviation. Its
/// exact definition is unknown, so it is only ever printed next to ours.
pub const PRBS9_REFERENCE_STD: f64 = 91.38;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSweep {
    order: u32,
    outputs: Vec<u32>,
}

impl SeedSweep {
    /// Builds a sweep from explicit outputs, indexed by seed.
    pub fn from_outputs(order: u32, outputs: Vec<u32>) -> Result<Self> {
        if !(1..=MAX_REGISTRY_ORDER).contains(&order) {
            return Err(Error::OutOfRange {
                what: "order",
                value: order.into(),
                expected: format!("1..={MAX_REGISTRY_ORDER}"),
            });
        }
        let len = 1usize << order;
        if outputs.len() != len {
            return Err(Error::OutOfRange {
                what: "sweep length",
                value: outputs.len() as u64,
                expected: format!("exactly {len}"),
            });
        }
        if let Some(&bad) = outputs.iter().find(|&&v| v as usize >= len) {
            return Err(Error::OutOfRange {
                what: "sweep output",
                value: bad.into(),
                expected: format!("< {len}"),
            });
        }
        Ok(Self { order, outputs })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowStats<T> {
    pub window_size: usize,
    pub per_window_std: Vec<T>,
    pub min_std: T,
}

impl<T: Real> WindowStats<T> {
    pub fn mean_std(&self) -> T {
        let n = T::from_usize(self.per_window_std.len()).unwrap();
        self.per_window_std
            .iter()
            .fold(T::zero(), |acc, &s| acc + s)
            / n
    }
}

/// Signature of every seed `0..2^order`.
pub fn sweep_outputs(poly: &FeedbackPolynomial) -> Result<SeedSweep> {
    if poly.order() > MAX_REGISTRY_ORDER {
        return Err(Error::OutOfRange {
            what: "order",
            value: poly.order().into(),
            expected: format!("<= {MAX_REGISTRY_ORDER} for a full sweep"),
        });
    }
    let outputs = (0..=poly.state_mask())
        .map(|seed| signature_from_seed(seed, poly))
        .collect();
    Ok(SeedSweep {
        order: poly.order(),
        outputs,
    })
}

/// Population standard deviation of every window of `window_size`
/// consecutive seeds.
///
/// Running sums are kept in integers, so each window's variance numerator is
/// exact before the final conversion.
pub fn windowed_std<T: Real>(sweep: &SeedSweep, window_size: usize) -> Result<WindowStats<T>> {
    let len = sweep.len();
    if window_size == 0 || window_size > len {
        return Err(Error::OutOfRange {
            what: "window_size",
            value: window_size as u64,
            expected: format!("1..={len}"),
        });
    }
    let xs = &sweep.outputs;
    let w = window_size as u128;
    let mut sum: u128 = xs[..window_size].iter().map(|&x| x as u128).sum();
    let mut sum_sq: u128 = xs[..window_size].iter().map(|&x| (x as u128).pow(2)).sum();

    let std_of = |sum: u128, sum_sq: u128| -> T {
        // w * Σx² - (Σx)² ≥ 0 by Cauchy-Schwarz
        let numer = w * sum_sq - sum * sum;
        let var = T::from_u128(numer).unwrap() / T::from_u128(w * w).unwrap();
        var.sqrt()
    };

    let mut per_window_std = Vec::with_capacity(len - window_size + 1);
    per_window_std.push(std_of(sum, sum_sq));
    for i in window_size..len {
        let (add, drop) = (xs[i] as u128, xs[i - window_size] as u128);
        sum = sum + add - drop;
        sum_sq = sum_sq + add * add - drop * drop;
        per_window_std.push(std_of(sum, sum_sq));
    }
    let min_std = per_window_std
        .iter()
        .copied()
        .fold(T::infinity(), |a, b| if b < a { b } else { a });
    Ok(WindowStats {
        window_size,
        per_window_std,
        min_std,
    })
}

/// Smallest output deviation over windows of consecutive seeds.
///
/// This is the figure of merit for "nearby seeds still give distant
/// signatures". For PRBS9 it is what gets printed alongside
/// [`PRBS9_REFERENCE_STD`].
pub fn consecutive_seed_std<T: Real>(poly: &FeedbackPolynomial, window_size: usize) -> Result<T> {
    Ok(windowed_std::<T>(&sweep_outputs(poly)?, window_size)?.min_std)
}

/// One line of the cross-order comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderRow<T> {
    pub order: u32,
    pub window: usize,
    pub min_std: T,
    pub area_scale: T,
    pub power_scale: T,
}

/// Windowed minimum deviation and cost scales for each registry order.
pub fn compare_orders<T: Real>(orders: &[u32], window_size: usize) -> Result<Vec<OrderRow<T>>> {
    orders
        .iter()
        .map(|&order| {
            let poly = registry_polynomial(order)?;
            let cost = estimate_cost::<T>(order)?;
            Ok(OrderRow {
                order,
                window: window_size,
                min_std: consecutive_seed_std(&poly, window_size)?,
                area_scale: cost.area_scale,
                power_scale: cost.power_scale,
            })
        })
        .collect()
}
