//! Cost-per-click rules.
//!
//! * Maintaining bid: the smallest bid at which an advertiser keeps its slot
//!   when the whole allocator is re-run. Under the separable model this is the
//!   classic GSP price.
//! * Adjacent swap: the price making total welfare indifferent to swapping the
//!   ads in slots `k` and `k + 1`.

use std::cmp::Ordering;
use std::fmt;

use crate::ctr::{ClickModel, PracticalCtr, SeparableCtr};
use crate::error::{Error, Result};
use crate::extern_alloc::bisection_allocate;
use crate::instance::{AdId, Allocation, AuctionInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PricingRule {
    MaintainingBid,
    AdjacentSwap,
}

impl PricingRule {
    pub fn name(&self) -> &'static str {
        match self {
            PricingRule::MaintainingBid => "maintaining",
            PricingRule::AdjacentSwap => "swap",
        }
    }
}

impl fmt::Display for PricingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceEntry {
    pub id: AdId,
    pub slot: usize,
    pub cost_per_click: f64,
    pub rule: PricingRule,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PriceSchedule {
    pub entries: Vec<PriceEntry>,
}

impl PriceSchedule {
    pub fn price_of(&self, id: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .map(|e| e.cost_per_click)
    }
}

/// Smallest own bid in `[0, b]` at which `id` still holds its current slot,
/// found by bisection to within `tol`, re-running `allocator` at every trial.
///
/// Dropping to a better slot at a lower bid is reported as
/// [`Error::NonMonotoneOccupancy`].
pub fn maintaining_bid_price<F>(
    inst: &AuctionInstance,
    allocator: F,
    id: &str,
    tol: f64,
) -> Result<f64>
where
    F: Fn(&AuctionInstance) -> Result<Allocation>,
{
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tol must be > 0 (got {tol})"
        )));
    }
    let index = inst
        .index_of(id)
        .ok_or_else(|| Error::UnknownAdvertiser(id.to_string()))?;
    let slot = allocator(inst)?
        .position_of(id)
        .ok_or_else(|| Error::NotShown(id.to_string()))?;

    let holds = |bid: f64| -> Result<bool> {
        match allocator(&inst.with_bid(index, bid))?.position_of(id) {
            Some(p) if p == slot => Ok(true),
            Some(p) if p < slot => Err(Error::NonMonotoneOccupancy {
                bid,
                found: p,
                expected: slot,
            }),
            _ => Ok(false),
        }
    };

    if holds(0.0)? {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, inst.advertisers[index].bid);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Maintaining-bid prices for every shown advertiser.
pub fn maintaining_bid_schedule<F>(
    inst: &AuctionInstance,
    allocator: F,
    tol: f64,
) -> Result<PriceSchedule>
where
    F: Fn(&AuctionInstance) -> Result<Allocation>,
{
    let alloc = allocator(inst)?;
    let entries = alloc
        .shown()
        .enumerate()
        .map(|(slot, id)| {
            Ok(PriceEntry {
                id: id.to_string(),
                slot,
                cost_per_click: maintaining_bid_price(inst, &allocator, id, tol)?,
                rule: PricingRule::MaintainingBid,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PriceSchedule { entries })
}

/// Price `c` for the ad in slot `k` solving
///
/// ```text
/// c p_k(q_k, q_k+1) = b_k+1 p_k(q_k+1, q_k) + b_k p_k+1(q_k+1, q_k)
///                   - b_k+1 p_k+1(q_k, q_k+1) + S(q_k+1, q_k) - S(q_k, q_k+1)
/// ```
///
/// where the argument order says which quality sits in slot `k`, and `S` is the
/// welfare of every other slot.
pub fn adjacent_swap_price(
    k: usize,
    alloc: &Allocation,
    inst: &AuctionInstance,
    model: &dyn ClickModel,
) -> Result<f64> {
    let n = inst.position_scores("single-curve")?;
    let shown = alloc.resolve(inst)?;
    if k + 1 >= shown.len() {
        let empty = if k >= shown.len() { k } else { k + 1 };
        return Err(Error::SlotEmpty(empty));
    }
    let bids: Vec<f64> = shown.iter().map(|&i| inst.advertisers[i].bid).collect();
    let q: Vec<f64> = shown.iter().map(|&i| inst.advertisers[i].quality).collect();
    let mut q_swapped = q.clone();
    q_swapped.swap(k, k + 1);
    let others = |qv: &[f64]| -> Result<f64> {
        (0..qv.len())
            .filter(|&j| j != k && j != k + 1)
            .map(|j| Ok(bids[j] * model.click_rate(j, qv, n)?))
            .sum()
    };

    let p_k = model.click_rate(k, &q, n)?;
    if p_k == 0.0 {
        return Err(Error::ZeroClickRate(k));
    }
    let p_next = model.click_rate(k + 1, &q, n)?;
    let p_k_swapped = model.click_rate(k, &q_swapped, n)?;
    let p_next_swapped = model.click_rate(k + 1, &q_swapped, n)?;
    let rhs = bids[k + 1] * p_k_swapped + bids[k] * p_next_swapped - bids[k + 1] * p_next
        + others(&q_swapped)?
        - others(&q)?;
    Ok(rhs / p_k)
}

/// Swap prices for every shown ad that has a shown successor.
pub fn adjacent_swap_schedule(
    alloc: &Allocation,
    inst: &AuctionInstance,
    model: &dyn ClickModel,
) -> Result<PriceSchedule> {
    let shown: Vec<&str> = alloc.shown().collect();
    let entries = (0..shown.len().saturating_sub(1))
        .map(|k| {
            Ok(PriceEntry {
                id: shown[k].to_string(),
                slot: k,
                cost_per_click: adjacent_swap_price(k, alloc, inst, model)?,
                rule: PricingRule::AdjacentSwap,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PriceSchedule { entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevenueRow {
    pub slot: usize,
    pub price_separable: f64,
    pub price_externality: f64,
    /// `price_externality - price_separable`.
    pub delta: f64,
    /// Sign of `q_(k) - q_(k+1)`.
    pub quality_order: Ordering,
    pub sign_agrees: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevenueComparison {
    pub allocations_identical: bool,
    pub separable_allocation: Allocation,
    pub externality_allocation: Allocation,
    /// Empty unless the allocations are identical.
    pub rows: Vec<RevenueRow>,
}

impl RevenueComparison {
    pub fn all_signs_agree(&self) -> bool {
        self.rows.iter().all(|r| r.sign_agrees)
    }
}

/// Deltas smaller than this (relative to the price) count as zero.
pub const ZERO_DELTA_TOLERANCE: f64 = 1e-9;

fn delta_sign(delta: f64, scale: f64) -> Ordering {
    if delta.abs() <= ZERO_DELTA_TOLERANCE * scale.abs().max(1.0) {
        Ordering::Equal
    } else if delta > 0.0 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Compares swap prices under the separable model and the practical
/// externality model with strength `lambda`, when both pick the same allocation.
pub fn revenue_compare(inst: &AuctionInstance, lambda: f64) -> Result<RevenueComparison> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be > 0 (got {lambda})"
        )));
    }
    let nu = inst.params_or_default().nu;
    let separable_allocation = bisection_allocate(inst, 0.0)?.allocation;
    let externality_allocation = bisection_allocate(inst, lambda)?.allocation;
    let allocations_identical = separable_allocation == externality_allocation;

    let mut rows = Vec::new();
    if allocations_identical {
        let alloc = &separable_allocation;
        let shown = alloc.resolve(inst)?;
        let practical = PracticalCtr::new(lambda, nu);
        for k in 0..shown.len().saturating_sub(1) {
            let price_separable = adjacent_swap_price(k, alloc, inst, &SeparableCtr)?;
            let price_externality = adjacent_swap_price(k, alloc, inst, &practical)?;
            let delta = price_externality - price_separable;
            let quality_order = inst.advertisers[shown[k]]
                .quality
                .total_cmp(&inst.advertisers[shown[k + 1]].quality);
            rows.push(RevenueRow {
                slot: k,
                price_separable,
                price_externality,
                delta,
                quality_order,
                sign_agrees: delta_sign(delta, price_separable) == quality_order,
            });
        }
    }
    Ok(RevenueComparison {
        allocations_identical,
        separable_allocation,
        externality_allocation,
        rows,
    })
}
