//! Click-through-rate models over a single position curve.
//!
//! A model maps the ordered qualities of the shown ads and the position
//! scores to the click rate of one slot. Rates are not clamped to `[0, 1]`;
//! calibration is the caller's job.

use crate::error::{Error, Result};
use crate::instance::ExternalityParams;

pub trait ClickModel: Send + Sync {
    fn name(&self) -> &str;

    /// Click rate of `slot` given the qualities of the occupied top slots
    /// (`qualities.len() <= positions.len()`).
    fn click_rate(&self, slot: usize, qualities: &[f64], positions: &[f64]) -> Result<f64>;
}

fn check_slot(slot: usize, qualities: &[f64], positions: &[f64]) -> Result<()> {
    if qualities.len() > positions.len() {
        return Err(Error::IndexOutOfRange {
            index: qualities.len() - 1,
            len: positions.len(),
        });
    }
    if slot >= qualities.len() {
        return Err(Error::IndexOutOfRange {
            index: slot,
            len: qualities.len(),
        });
    }
    Ok(())
}

/// `n_j * q_(j)`, independent of every other slot.
pub fn separable_ctr(slot: usize, qualities: &[f64], positions: &[f64]) -> Result<f64> {
    check_slot(slot, qualities, positions)?;
    Ok(positions[slot] * qualities[slot])
}

/// `nu * n_j * q_(j) / (1 + lambda * sum_k n_k * q_(k))`, summing over occupied slots.
pub fn practical_ctr(
    slot: usize,
    qualities: &[f64],
    positions: &[f64],
    params: &ExternalityParams,
) -> Result<f64> {
    check_slot(slot, qualities, positions)?;
    Ok(params.nu * positions[slot] * qualities[slot]
        / externality_denominator(qualities, positions, params.lambda))
}

/// `1 + lambda * sum_k n_k * q_(k)` over the occupied slots.
pub fn externality_denominator(qualities: &[f64], positions: &[f64], lambda: f64) -> f64 {
    let load: f64 = qualities.iter().zip(positions).map(|(q, n)| n * q).sum();
    1.0 + lambda * load
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SeparableCtr;

impl ClickModel for SeparableCtr {
    fn name(&self) -> &str {
        "separable"
    }

    fn click_rate(&self, slot: usize, qualities: &[f64], positions: &[f64]) -> Result<f64> {
        separable_ctr(slot, qualities, positions)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PracticalCtr {
    pub params: ExternalityParams,
}

impl PracticalCtr {
    pub fn new(lambda: f64, nu: f64) -> Self {
        Self {
            params: ExternalityParams::new(lambda, nu),
        }
    }
}

impl ClickModel for PracticalCtr {
    fn name(&self) -> &str {
        "externality"
    }

    fn click_rate(&self, slot: usize, qualities: &[f64], positions: &[f64]) -> Result<f64> {
        practical_ctr(slot, qualities, positions, &self.params)
    }
}
