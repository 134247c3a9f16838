//! Welfare-maximizing allocation under the practical externality model.
//!
//! With `nu = 1` the welfare of a ranking is
//!
//! ```text
//! S = sum_j n_j b_j q_j / (1 + lambda * sum_j n_j q_j)
//! ```
//!
//! Swapping two shown ads raises `S` exactly when the lower one has the larger
//! score `b q - lambda q S`, so the optimum is a ranking by that score taken at
//! the optimal `S` itself. [`bisection_allocate`] brackets that fixed point;
//! [`brute_force_allocate`] enumerates every arrangement as an oracle.
//!
//! `nu` never changes which allocation wins and is ignored here.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::instance::{AdId, Advertiser, Allocation, AuctionInstance};

pub const DEFAULT_RELATIVE_TOL: f64 = 1e-12;
pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 8;
const MAX_ITERATIONS: usize = 2_000;

/// Whether an ad whose score is negative may still take a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShowPolicy {
    /// Ads with negative score stay off the page; showing them lowers welfare.
    #[default]
    SkipNegative,
    /// Fill `min(m, s)` slots regardless of score.
    FillAll,
}

/// `b q - lambda q S`.
pub fn score(a: &Advertiser, welfare: f64, lambda: f64) -> f64 {
    a.bid * a.quality - lambda * a.quality * welfare
}

#[derive(Debug, Clone, PartialEq)]
struct Ranking {
    shown: Vec<usize>,
    skipped: Vec<usize>,
}

fn ranking(inst: &AuctionInstance, welfare: f64, lambda: f64, policy: ShowPolicy) -> Ranking {
    let ads = &inst.advertisers;
    let scores: Vec<f64> = ads.iter().map(|a| score(a, welfare, lambda)).collect();
    let mut order: Vec<usize> = (0..ads.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| ads[a].id.cmp(&ads[b].id))
    });
    let (eligible, skipped): (Vec<usize>, Vec<usize>) = order
        .into_iter()
        .partition(|&i| policy == ShowPolicy::FillAll || scores[i] >= 0.0);
    Ranking {
        shown: eligible.into_iter().take(inst.num_slots()).collect(),
        skipped,
    }
}

fn welfare_of(inst: &AuctionInstance, n: &[f64], shown: &[usize], lambda: f64) -> f64 {
    let (value, load) = shown.iter().zip(n).fold((0.0, 0.0), |(v, l), (&i, &nj)| {
        let a = &inst.advertisers[i];
        (v + nj * a.bid * a.quality, l + nj * a.quality)
    });
    value / (1.0 + lambda * load)
}

fn phi_of(inst: &AuctionInstance, n: &[f64], shown: &[usize], welfare: f64, lambda: f64) -> f64 {
    shown
        .iter()
        .zip(n)
        .map(|(&i, &nj)| nj * score(&inst.advertisers[i], welfare, lambda))
        .sum()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "lambda must be >= 0 (got {lambda})"
        )))
    }
}

/// Welfare of an allocation with `nu = 1`.
pub fn externality_welfare(alloc: &Allocation, inst: &AuctionInstance, lambda: f64) -> Result<f64> {
    let n = inst.position_scores("externality")?;
    let shown = alloc.resolve(inst)?;
    Ok(welfare_of(inst, n, &shown, lambda))
}

/// Ranks ads by score at `welfare`, ties by ascending id, and fills the top
/// `min(m, s)` slots, leaving negative-score ads out.
pub fn rank_by_score(inst: &AuctionInstance, welfare: f64, lambda: f64) -> Result<Allocation> {
    rank_by_score_with(inst, welfare, lambda, ShowPolicy::default())
}

pub fn rank_by_score_with(
    inst: &AuctionInstance,
    welfare: f64,
    lambda: f64,
    policy: ShowPolicy,
) -> Result<Allocation> {
    inst.position_scores("externality")?;
    let r = ranking(inst, welfare, lambda, policy);
    Ok(Allocation::from_indices(inst, &r.shown))
}

/// `sum_m n_m (b_m q_m - lambda q_m S)` under the ranking induced by `S`.
pub fn phi(welfare: f64, inst: &AuctionInstance, lambda: f64) -> Result<f64> {
    phi_with(welfare, inst, lambda, ShowPolicy::default())
}

pub fn phi_with(
    welfare: f64,
    inst: &AuctionInstance,
    lambda: f64,
    policy: ShowPolicy,
) -> Result<f64> {
    let n = inst.position_scores("externality")?;
    let r = ranking(inst, welfare, lambda, policy);
    Ok(phi_of(inst, n, &r.shown, welfare, lambda))
}

/// Returns true iff swapping the ads in slots `k < m` raises welfare.
///
/// Slots with equal position scores never improve by swapping.
pub fn swap_improves(
    k: usize,
    m: usize,
    alloc: &Allocation,
    inst: &AuctionInstance,
    lambda: f64,
) -> Result<bool> {
    if k >= m {
        return Err(Error::NotOrdered { k, m });
    }
    let n = inst.position_scores("externality")?;
    if m >= n.len() {
        return Err(Error::IndexOutOfRange {
            index: m,
            len: n.len(),
        });
    }
    let upper = alloc.get(k).ok_or(Error::SlotEmpty(k))?;
    let lower = alloc.get(m).ok_or(Error::SlotEmpty(m))?;
    if n[k] <= n[m] {
        return Ok(false);
    }
    let s = externality_welfare(alloc, inst, lambda)?;
    let ad = |id: &str| &inst.advertisers[inst.index_of(id).expect("resolved")];
    Ok(score(ad(lower), s, lambda) > score(ad(upper), s, lambda))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionState {
    pub lower: f64,
    pub upper: f64,
    pub initial_lower: f64,
    pub initial_upper: f64,
    pub iterations: usize,
    /// `(S_hat, phi(S_hat))` for every midpoint evaluated.
    pub history: Vec<(f64, f64)>,
    /// False when the loop stopped on the width tolerance rather than on
    /// matching rankings.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternAllocationResult {
    pub allocation: Allocation,
    /// Welfare (`nu = 1`) of the returned allocation, the fixed point of `phi`.
    pub s_star: f64,
    /// Bracket trace; `None` for the brute-force oracle.
    pub state: Option<BisectionState>,
    /// Ads left off the page because their score was negative.
    pub skipped: Vec<AdId>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionOptions {
    /// Absolute width at which the bracket loop gives up; `None` means
    /// `DEFAULT_RELATIVE_TOL * S_H`.
    pub tol: Option<f64>,
    pub policy: ShowPolicy,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        Self {
            tol: None,
            policy: ShowPolicy::SkipNegative,
        }
    }
}

/// Efficiency-maximizing allocation by bisection on the welfare fixed point.
pub fn bisection_allocate(inst: &AuctionInstance, lambda: f64) -> Result<ExternAllocationResult> {
    bisection_allocate_with(inst, lambda, &BisectionOptions::default())
}

pub fn bisection_allocate_with(
    inst: &AuctionInstance,
    lambda: f64,
    opts: &BisectionOptions,
) -> Result<ExternAllocationResult> {
    check_lambda(lambda)?;
    let n = inst.position_scores("externality")?;
    if inst.advertisers.is_empty() {
        return Err(Error::NoCandidates);
    }
    if let Some(tol) = opts.tol {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tol must be > 0 (got {tol})"
            )));
        }
    }

    // Steps (1)-(2): bracket from the plain eCPM ranking.
    let by_ecpm = ranking(inst, 0.0, 0.0, opts.policy);
    let mut lower = welfare_of(inst, n, &by_ecpm.shown, lambda);
    let mut upper = phi_of(inst, n, &by_ecpm.shown, 0.0, 0.0);
    let tol = opts.tol.unwrap_or(DEFAULT_RELATIVE_TOL * upper);

    let mut state = BisectionState {
        lower,
        upper,
        initial_lower: lower,
        initial_upper: upper,
        iterations: 0,
        history: Vec::new(),
        converged: false,
    };

    let chosen = loop {
        let at_lower = ranking(inst, lower, lambda, opts.policy);
        let at_upper = ranking(inst, upper, lambda, opts.policy);
        if at_lower.shown == at_upper.shown {
            state.converged = true;
            break at_lower;
        }
        let mid = 0.5 * (lower + upper);
        if upper - lower < tol || mid <= lower || mid >= upper || state.iterations >= MAX_ITERATIONS
        {
            break at_lower;
        }
        let at_mid = ranking(inst, mid, lambda, opts.policy);
        let phi_mid = phi_of(inst, n, &at_mid.shown, mid, lambda);
        state.history.push((mid, phi_mid));
        if phi_mid < mid {
            upper = mid;
        } else {
            lower = mid;
        }
        state.iterations += 1;
        state.lower = lower;
        state.upper = upper;
    };

    Ok(ExternAllocationResult {
        allocation: Allocation::from_indices(inst, &chosen.shown),
        s_star: welfare_of(inst, n, &chosen.shown, lambda),
        state: Some(state),
        skipped: chosen
            .skipped
            .iter()
            .map(|&i| inst.advertisers[i].id.clone())
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceOptions {
    pub limit: usize,
    pub policy: ShowPolicy,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            limit: DEFAULT_BRUTE_FORCE_LIMIT,
            policy: ShowPolicy::SkipNegative,
        }
    }
}

/// Exhaustive oracle: every ordered arrangement of every subset of ads into
/// the top slots. Ties go to the lexicographically smallest id sequence.
///
/// Under [`ShowPolicy::FillAll`] only arrangements filling `min(m, s)` slots
/// are considered.
pub fn brute_force_allocate(inst: &AuctionInstance, lambda: f64) -> Result<ExternAllocationResult> {
    brute_force_allocate_with(inst, lambda, &BruteForceOptions::default())
}

pub fn brute_force_allocate_with(
    inst: &AuctionInstance,
    lambda: f64,
    opts: &BruteForceOptions,
) -> Result<ExternAllocationResult> {
    check_lambda(lambda)?;
    let n = inst.position_scores("externality")?;
    let m = inst.advertisers.len();
    if m > opts.limit {
        return Err(Error::InstanceTooLarge {
            ads: m,
            limit: opts.limit,
        });
    }
    let full = m.min(n.len());
    let sizes = match opts.policy {
        ShowPolicy::SkipNegative => 0..=full,
        ShowPolicy::FillAll => full..=full,
    };

    let ids = |shown: &[usize]| -> Vec<&str> {
        shown
            .iter()
            .map(|&i| inst.advertisers[i].id.as_str())
            .collect()
    };
    let mut best: Option<(f64, Vec<usize>)> = None;
    for t in sizes {
        for perm in (0..m).permutations(t) {
            let w = welfare_of(inst, n, &perm, lambda);
            let better = match &best {
                None => true,
                Some((bw, bp)) => w > *bw || (w == *bw && ids(&perm) < ids(bp)),
            };
            if better {
                best = Some((w, perm));
            }
        }
    }
    let (s_star, shown) = best.ok_or(Error::NoCandidates)?;
    Ok(ExternAllocationResult {
        allocation: Allocation::from_indices(inst, &shown),
        s_star,
        state: None,
        skipped: Vec::new(),
    })
}
