//! Allocation under the brand-effects model.
//!
//! A brand ad in slot `k` is clicked with probability `beta_k * q`, a
//! non-brand ad with `eta_k * q`. Once the set of brand slots `B` is fixed,
//! the best allocation puts each class in descending eCPM order into its own
//! slots, so the exact optimum only has to search over `B`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::instance::{
    AdId, Advertiser, Allocation, AuctionInstance, BrandPositionProfile, Positions,
};

pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

/// Which occupied slots hold brand ads. Occupied slots always form a prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrandConfig {
    brand: Vec<usize>,
    non_brand: Vec<usize>,
}

impl BrandConfig {
    pub fn new(
        brand: impl IntoIterator<Item = usize>,
        non_brand: impl IntoIterator<Item = usize>,
    ) -> Self {
        let mut brand: Vec<usize> = brand.into_iter().collect();
        let mut non_brand: Vec<usize> = non_brand.into_iter().collect();
        brand.sort_unstable();
        non_brand.sort_unstable();
        Self { brand, non_brand }
    }

    fn from_mask(occupied: usize, mask: u64) -> Self {
        let (brand, non_brand) = (0..occupied).partition(|&j| mask >> j & 1 == 1);
        Self { brand, non_brand }
    }

    pub fn brand_slots(&self) -> &[usize] {
        &self.brand
    }

    pub fn non_brand_slots(&self) -> &[usize] {
        &self.non_brand
    }

    pub fn occupied(&self) -> usize {
        self.brand.len() + self.non_brand.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrandOutcome {
    pub allocation: Allocation,
    pub welfare: f64,
    pub config: BrandConfig,
}

/// Descending eCPM, ties by ascending id.
fn by_ecpm_desc(ads: &[Advertiser], a: usize, b: usize) -> Ordering {
    ads[b]
        .ecpm()
        .total_cmp(&ads[a].ecpm())
        .then_with(|| ads[a].id.cmp(&ads[b].id))
}

struct Classes {
    brand: Vec<usize>,
    non_brand: Vec<usize>,
}

impl Classes {
    fn of(inst: &AuctionInstance) -> Self {
        let ads = &inst.advertisers;
        let (mut brand, mut non_brand): (Vec<usize>, Vec<usize>) =
            (0..ads.len()).partition(|&i| ads[i].brand);
        brand.sort_by(|&a, &b| by_ecpm_desc(ads, a, b));
        non_brand.sort_by(|&a, &b| by_ecpm_desc(ads, a, b));
        Self { brand, non_brand }
    }
}

/// Advertiser index per occupied slot, placing each class by eCPM.
fn placement(config: &BrandConfig, classes: &Classes, num_slots: usize) -> Result<Vec<usize>> {
    let t = config.occupied();
    if t > num_slots {
        return Err(Error::InfeasibleConfig(format!(
            "{t} occupied slots but only {num_slots} positions"
        )));
    }
    if config.brand.len() > classes.brand.len() {
        return Err(Error::InfeasibleConfig(format!(
            "{} brand slots but only {} brand ads",
            config.brand.len(),
            classes.brand.len()
        )));
    }
    if config.non_brand.len() > classes.non_brand.len() {
        return Err(Error::InfeasibleConfig(format!(
            "{} non-brand slots but only {} non-brand ads",
            config.non_brand.len(),
            classes.non_brand.len()
        )));
    }
    let mut slots = vec![usize::MAX; t];
    for (slots_of, ads) in [
        (&config.brand, &classes.brand),
        (&config.non_brand, &classes.non_brand),
    ] {
        for (&j, &i) in slots_of.iter().zip(ads.iter()) {
            if j >= t || slots[j] != usize::MAX {
                return Err(Error::InfeasibleConfig(format!(
                    "slots must partition positions 1..={t}"
                )));
            }
            slots[j] = i;
        }
    }
    Ok(slots)
}

/// `sum_j b_(j) * (coef_j * q_(j))` in slot order.
fn welfare_of(inst: &AuctionInstance, profile: &BrandPositionProfile, shown: &[usize]) -> f64 {
    shown
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            let a = &inst.advertisers[i];
            a.bid * (profile.coefficient(j, a.brand) * a.quality)
        })
        .sum()
}

fn outcome(
    inst: &AuctionInstance,
    profile: &BrandPositionProfile,
    shown: &[usize],
) -> BrandOutcome {
    let brand = shown
        .iter()
        .enumerate()
        .filter(|(_, &i)| inst.advertisers[i].brand)
        .map(|(j, _)| j);
    let non_brand = shown
        .iter()
        .enumerate()
        .filter(|(_, &i)| !inst.advertisers[i].brand)
        .map(|(j, _)| j);
    BrandOutcome {
        allocation: Allocation::from_indices(inst, shown),
        welfare: welfare_of(inst, profile, shown),
        config: BrandConfig::new(brand, non_brand),
    }
}

/// Welfare of the best allocation consistent with `config`.
pub fn brand_welfare(config: &BrandConfig, inst: &AuctionInstance) -> Result<f64> {
    let profile = inst.brand_profile()?;
    let shown = placement(config, &Classes::of(inst), inst.num_slots())?;
    Ok(welfare_of(inst, profile, &shown))
}

pub fn config_allocation(config: &BrandConfig, inst: &AuctionInstance) -> Result<Allocation> {
    inst.brand_profile()?;
    let shown = placement(config, &Classes::of(inst), inst.num_slots())?;
    Ok(Allocation::from_indices(inst, &shown))
}

/// Candidate ordering shared by the exact searches: higher welfare, then more
/// slots filled, then the lexicographically smallest brand slot set.
fn beats(w: f64, config: &BrandConfig, best: &(f64, BrandConfig)) -> bool {
    let (bw, bc) = best;
    w > *bw
        || (w == *bw
            && (config.occupied() > bc.occupied()
                || (config.occupied() == bc.occupied() && config.brand < bc.brand)))
}

fn search<I>(inst: &AuctionInstance, candidates: I) -> Result<BrandOutcome>
where
    I: IntoIterator<Item = BrandConfig>,
{
    let profile = inst.brand_profile()?;
    let classes = Classes::of(inst);
    let mut best: Option<(f64, BrandConfig)> = None;
    for config in candidates {
        let Ok(shown) = placement(&config, &classes, inst.num_slots()) else {
            continue;
        };
        let w = welfare_of(inst, profile, &shown);
        if best.as_ref().is_none_or(|b| beats(w, &config, b)) {
            best = Some((w, config));
        }
    }
    let (welfare, config) = best.ok_or(Error::NoCandidates)?;
    let shown = placement(&config, &classes, inst.num_slots())?;
    Ok(BrandOutcome {
        allocation: Allocation::from_indices(inst, &shown),
        welfare,
        config,
    })
}

/// Exact optimum by checking every brand-slot configuration.
pub fn optimal_brand_allocate(inst: &AuctionInstance) -> Result<BrandOutcome> {
    optimal_brand_allocate_with_limit(inst, DEFAULT_ENUMERATION_LIMIT)
}

pub fn optimal_brand_allocate_with_limit(
    inst: &AuctionInstance,
    limit: usize,
) -> Result<BrandOutcome> {
    let s = inst.num_slots();
    if s > limit || s > 63 {
        return Err(Error::TooManyPositions { slots: s, limit });
    }
    let max_t = s.min(inst.advertisers.len());
    let configs =
        (0..=max_t).flat_map(|t| (0..1u64 << t).map(move |mask| BrandConfig::from_mask(t, mask)));
    search(inst, configs)
}

/// Optimum when `beta` is constant and `eta` strictly decreasing: non-brand ads
/// never sit below a brand ad, so only the number of non-brand ads on top varies.
pub fn brand_last_fastpath(inst: &AuctionInstance) -> Result<BrandOutcome> {
    let profile = inst.brand_profile()?;
    if profile.beta.iter().any(|&b| b != profile.beta[0]) {
        return Err(Error::PreconditionNotMet(
            "beta varies with position".into(),
        ));
    }
    if profile.eta.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::PreconditionNotMet(
            "eta is not strictly decreasing".into(),
        ));
    }
    let classes = Classes::of(inst);
    let s = inst.num_slots();
    let full = s.min(inst.advertisers.len());
    let configs = (0..=classes.non_brand.len().min(s)).filter_map(|k| {
        let t = s.min(k + classes.brand.len());
        (t == full).then(|| BrandConfig::new(k..t, 0..k))
    });
    search(inst, configs)
}

/// Fills slots top-down with the unassigned ad of highest normalized eCPM
/// (`beta_k * b q` or `eta_k * b q`). Ties go brand-first, then ascending id.
pub fn greedy_brand_allocate(inst: &AuctionInstance) -> Result<BrandOutcome> {
    let profile = inst.brand_profile()?;
    let ads = &inst.advertisers;
    let mut free: Vec<usize> = (0..ads.len()).collect();
    let mut shown = Vec::new();
    for k in 0..inst.num_slots().min(ads.len()) {
        let value = |i: usize| profile.coefficient(k, ads[i].brand) * ads[i].ecpm();
        let pick = free
            .iter()
            .copied()
            .max_by(|&a, &b| {
                value(a)
                    .total_cmp(&value(b))
                    .then_with(|| ads[a].brand.cmp(&ads[b].brand))
                    .then_with(|| ads[b].id.cmp(&ads[a].id))
            })
            .expect("free ads remain");
        free.retain(|&i| i != pick);
        shown.push(pick);
    }
    Ok(outcome(inst, profile, &shown))
}

/// Plain eCPM ranking, ignoring brand effects, scored under the brand model.
pub fn standard_allocate(inst: &AuctionInstance) -> Result<BrandOutcome> {
    let profile = inst.brand_profile()?;
    let ads = &inst.advertisers;
    let mut order: Vec<usize> = (0..ads.len()).collect();
    order.sort_by(|&a, &b| by_ecpm_desc(ads, a, b));
    order.truncate(inst.num_slots());
    Ok(outcome(inst, profile, &order))
}

/// Greedy welfare over optimal welfare.
pub fn greedy_ratio(inst: &AuctionInstance) -> Result<f64> {
    let optimal = optimal_brand_allocate(inst)?.welfare;
    if optimal <= 0.0 {
        return Err(Error::ZeroOptimal);
    }
    Ok(greedy_brand_allocate(inst)?.welfare / optimal)
}

fn brand_instance(ads: Vec<Advertiser>, beta: Vec<f64>, eta: Vec<f64>) -> AuctionInstance {
    AuctionInstance::new(ads, Positions::Brand(BrandPositionProfile { beta, eta }))
}

/// Two slots where greedy earns `1 + eps` and the optimum `2 + eps`.
pub fn make_tight_greedy_instance(epsilon: f64) -> Result<AuctionInstance> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    Ok(brand_instance(
        vec![
            Advertiser::brand("brand", 1.0 + epsilon, 1.0),
            Advertiser::new("nonbrand", 1.0, 1.0),
        ],
        vec![1.0, 1.0],
        vec![1.0, 0.0],
    ))
}

/// Three slots where greedy (11) does worse than the brand-blind eCPM ranking
/// (11.5 + eps/2).
pub fn make_greedy_vs_standard_instance(epsilon: f64) -> Result<AuctionInstance> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    Ok(brand_instance(
        vec![
            Advertiser::brand("brand-10", 10.0, 1.0),
            Advertiser::brand("brand-1", 1.0, 1.0),
            Advertiser::new("nonbrand", 1.0 + epsilon, 1.0),
        ],
        vec![1.0, 1.0, 1.0],
        vec![1.0, 0.5, 0.0],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdVerdict {
    Never,
    Always,
    /// Smallest probed eCPM at which a brand ad takes the next slot.
    Threshold(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdProbe {
    pub verdict: ThresholdVerdict,
    /// The swept advertiser: the top remaining brand ad by eCPM.
    pub designated: Option<AdId>,
    /// Whether a brand ad takes slot `k` at each probed eCPM.
    pub indicators: Vec<(f64, bool)>,
    /// Probed values below another remaining brand ad's eCPM, where the swept
    /// ad is no longer the highest remaining brand ad.
    pub not_highest: Vec<f64>,
}

/// Best welfare from slots `k..s` given which class takes slot `k`, or `None`
/// if that class has no ads left.
fn continuation_best(
    profile: &BrandPositionProfile,
    k: usize,
    brand_values: &[f64],
    non_brand_values: &[f64],
    brand_first: bool,
) -> Option<f64> {
    let slots = profile.beta.len() - k;
    let max_t = slots.min(brand_values.len() + non_brand_values.len());
    let mut best: Option<f64> = None;
    for t in 1..=max_t {
        for mask in 0..1u64 << t {
            if (mask & 1 == 1) != brand_first {
                continue;
            }
            let nb = mask.count_ones() as usize;
            if nb > brand_values.len() || t - nb > non_brand_values.len() {
                continue;
            }
            let (mut bi, mut ni, mut w) = (0, 0, 0.0);
            for j in 0..t {
                if mask >> j & 1 == 1 {
                    w += profile.beta[k + j] * brand_values[bi];
                    bi += 1;
                } else {
                    w += profile.eta[k + j] * non_brand_values[ni];
                    ni += 1;
                }
            }
            if best.is_none_or(|b| w > b) {
                best = Some(w);
            }
        }
    }
    best
}

/// With the ads in `fixed` occupying the first `k = fixed.len()` slots, sweeps
/// the eCPM of the top remaining brand ad over `grid` (ascending) and reports
/// whether an optimal continuation puts a brand ad in slot `k`.
pub fn brand_threshold_probe(
    inst: &AuctionInstance,
    fixed: &[&str],
    grid: &[f64],
) -> Result<ThresholdProbe> {
    let profile = inst.brand_profile()?;
    let k = fixed.len();
    if k >= inst.num_slots() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: inst.num_slots(),
        });
    }
    if inst.num_slots() - k > 63 {
        return Err(Error::TooManyPositions {
            slots: inst.num_slots(),
            limit: 63,
        });
    }
    if grid.iter().any(|v| !v.is_finite() || *v < 0.0) || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "probe grid must be non-negative and ascending".into(),
        ));
    }
    let mut taken = vec![false; inst.advertisers.len()];
    for id in fixed {
        let i = inst
            .index_of(id)
            .ok_or_else(|| Error::UnknownAdvertiser(id.to_string()))?;
        if std::mem::replace(&mut taken[i], true) {
            return Err(Error::InvalidArgument(format!("`{id}` fixed twice")));
        }
    }

    let classes = Classes::of(inst);
    let ecpm = |i: usize| inst.advertisers[i].ecpm();
    let mut remaining_brand = classes.brand.iter().copied().filter(|&i| !taken[i]);
    let designated = remaining_brand.next();
    let other_brand: Vec<f64> = remaining_brand.map(ecpm).collect();
    let non_brand: Vec<f64> = classes
        .non_brand
        .iter()
        .copied()
        .filter(|&i| !taken[i])
        .map(ecpm)
        .collect();
    let runner_up = other_brand.first().copied();

    let mut indicators = Vec::with_capacity(grid.len());
    let mut not_highest = Vec::new();
    for &v in grid {
        let shows_brand = if designated.is_some() {
            let mut brand_values = other_brand.clone();
            brand_values.push(v);
            brand_values.sort_by(|a, b| b.total_cmp(a));
            if runner_up.is_some_and(|r| v < r) {
                not_highest.push(v);
            }
            let with_brand = continuation_best(profile, k, &brand_values, &non_brand, true);
            let with_other = continuation_best(profile, k, &brand_values, &non_brand, false);
            match (with_brand, with_other) {
                (Some(b), Some(n)) => b >= n,
                (Some(_), None) => true,
                _ => false,
            }
        } else {
            false
        };
        if let Some(&(_, true)) = indicators.last() {
            if !shows_brand {
                return Err(Error::MonotonicityViolation { at: v });
            }
        }
        indicators.push((v, shows_brand));
    }

    let verdict = if indicators.iter().all(|(_, b)| !b) {
        ThresholdVerdict::Never
    } else if indicators.iter().all(|(_, b)| *b) {
        ThresholdVerdict::Always
    } else {
        let (v, _) = indicators.iter().find(|(_, b)| *b).expect("some true");
        ThresholdVerdict::Threshold(*v)
    };

    Ok(ThresholdProbe {
        verdict,
        designated: designated.map(|i| inst.advertisers[i].id.clone()),
        indicators,
        not_highest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }

    fn shown(o: &BrandOutcome) -> Vec<&str> {
        o.allocation.shown().collect()
    }

    #[test]
    fn config_welfare_on_tight_instance() {
        let inst = make_tight_greedy_instance(0.1).unwrap();
        let brand_top = BrandConfig::new([0], [1]);
        let brand_low = BrandConfig::new([1], [0]);
        assert!(close(brand_welfare(&brand_top, &inst).unwrap(), 1.1));
        assert!(close(brand_welfare(&brand_low, &inst).unwrap(), 2.1));
    }

    #[test]
    fn infeasible_configs() {
        let inst = make_tight_greedy_instance(0.1).unwrap();
        assert!(matches!(
            brand_welfare(&BrandConfig::new([0, 1], []), &inst),
            Err(Error::InfeasibleConfig(_))
        ));
        assert!(matches!(
            brand_welfare(&BrandConfig::new([1], []), &inst),
            Err(Error::InfeasibleConfig(_))
        ));
        assert!(matches!(
            brand_welfare(&BrandConfig::new([0], [0]), &inst),
            Err(Error::InfeasibleConfig(_))
        ));
    }

    #[test]
    fn brand_only_sorts_by_ecpm() {
        let inst = brand_instance(
            vec![
                Advertiser::brand("x", 1.0, 1.0),
                Advertiser::brand("y", 3.0, 1.0),
                Advertiser::brand("z", 2.0, 1.0),
            ],
            vec![1.0, 0.5, 0.25],
            vec![1.0, 0.5, 0.25],
        );
        let all = BrandConfig::new([0, 1, 2], []);
        assert!(close(brand_welfare(&all, &inst).unwrap(), 3.0 + 1.0 + 0.25));
        let opt = optimal_brand_allocate(&inst).unwrap();
        assert_eq!(shown(&opt), ["y", "z", "x"]);
    }

    #[test]
    fn tight_instance_allocators() {
        let inst = make_tight_greedy_instance(0.1).unwrap();
        let opt = optimal_brand_allocate(&inst).unwrap();
        assert_eq!(shown(&opt), ["nonbrand", "brand"]);
        assert!(close(opt.welfare, 2.1));
        let fast = brand_last_fastpath(&inst).unwrap();
        assert_eq!(fast.allocation, opt.allocation);
        assert_eq!(fast.welfare, opt.welfare);
        let greedy = greedy_brand_allocate(&inst).unwrap();
        assert_eq!(shown(&greedy), ["brand", "nonbrand"]);
        assert!(close(greedy.welfare, 1.1));
        assert!(close(greedy_ratio(&inst).unwrap(), 1.1 / 2.1));
    }

    #[test]
    fn tight_instance_at_other_epsilons() {
        let inst = make_tight_greedy_instance(1.0).unwrap();
        assert!(close(greedy_brand_allocate(&inst).unwrap().welfare, 2.0));
        assert!(close(optimal_brand_allocate(&inst).unwrap().welfare, 3.0));
        for eps in [0.5, 0.01, 1e-6] {
            let inst = make_tight_greedy_instance(eps).unwrap();
            assert!(close(
                greedy_ratio(&inst).unwrap(),
                (1.0 + eps) / (2.0 + eps)
            ));
        }
        assert_eq!(
            make_tight_greedy_instance(0.0),
            Err(Error::NonPositiveEpsilon(0.0))
        );
    }

    #[test]
    fn greedy_vs_standard_instance() {
        let inst = make_greedy_vs_standard_instance(0.1).unwrap();
        let greedy = greedy_brand_allocate(&inst).unwrap();
        assert_eq!(shown(&greedy), ["brand-10", "brand-1", "nonbrand"]);
        assert!(close(greedy.welfare, 11.0));
        let standard = standard_allocate(&inst).unwrap();
        assert_eq!(shown(&standard), ["brand-10", "nonbrand", "brand-1"]);
        assert!(close(standard.welfare, 11.55));
        let opt = optimal_brand_allocate(&inst).unwrap();
        assert_eq!(shown(&opt), ["nonbrand", "brand-10", "brand-1"]);
        assert_eq!(opt.config.brand_slots(), [1, 2]);
        assert!(close(opt.welfare, 12.1));
        let fast = brand_last_fastpath(&inst).unwrap();
        assert_eq!(fast.welfare, opt.welfare);
        assert_eq!(
            make_greedy_vs_standard_instance(1.0),
            Err(Error::EpsilonOutOfRange(1.0))
        );
    }

    #[test]
    fn identical_curves_reduce_to_ecpm_ranking() {
        let inst = brand_instance(
            vec![
                Advertiser::brand("a", 1.0, 0.5),
                Advertiser::new("b", 2.0, 0.7),
                Advertiser::new("c", 0.3, 1.0),
                Advertiser::brand("d", 3.0, 0.2),
            ],
            vec![1.0, 0.6, 0.2],
            vec![1.0, 0.6, 0.2],
        );
        let greedy = greedy_brand_allocate(&inst).unwrap();
        let standard = standard_allocate(&inst).unwrap();
        let opt = optimal_brand_allocate(&inst).unwrap();
        assert_eq!(greedy.allocation, standard.allocation);
        assert!(close(greedy.welfare, opt.welfare));
        assert_eq!(greedy_ratio(&inst).unwrap(), 1.0);
    }

    #[test]
    fn fastpath_preconditions() {
        let inst = brand_instance(
            vec![Advertiser::brand("a", 1.0, 1.0)],
            vec![1.0, 0.9],
            vec![1.0, 0.5],
        );
        assert!(matches!(
            brand_last_fastpath(&inst),
            Err(Error::PreconditionNotMet(_))
        ));
        let inst = brand_instance(
            vec![Advertiser::brand("a", 1.0, 1.0)],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
        );
        assert!(matches!(
            brand_last_fastpath(&inst),
            Err(Error::PreconditionNotMet(_))
        ));
    }

    #[test]
    fn fastpath_shows_strong_brand_ad_when_slots_are_scarce() {
        let inst = brand_instance(
            vec![
                Advertiser::brand("b", 10.0, 1.0),
                Advertiser::new("n", 1.0, 1.0),
            ],
            vec![1.0],
            vec![1.0],
        );
        let fast = brand_last_fastpath(&inst).unwrap();
        assert_eq!(shown(&fast), ["b"]);
        assert_eq!(fast.welfare, optimal_brand_allocate(&inst).unwrap().welfare);
    }

    #[test]
    fn ratio_undefined_without_value() {
        let inst = brand_instance(vec![Advertiser::brand("a", 0.0, 1.0)], vec![1.0], vec![1.0]);
        assert_eq!(greedy_ratio(&inst), Err(Error::ZeroOptimal));
    }

    #[test]
    fn enumeration_limit() {
        let inst = brand_instance(
            vec![Advertiser::brand("a", 1.0, 1.0)],
            vec![1.0; 21],
            vec![1.0; 21],
        );
        assert_eq!(
            optimal_brand_allocate(&inst),
            Err(Error::TooManyPositions {
                slots: 21,
                limit: 20
            })
        );
    }

    #[test]
    fn probe_on_tight_instance_is_never() {
        // Brand on top earns v, non-brand on top earns 1 + v.
        let inst = make_tight_greedy_instance(0.1).unwrap();
        let p = brand_threshold_probe(&inst, &[], &[0.5, 1.0, 1.5, 2.5]).unwrap();
        assert_eq!(p.verdict, ThresholdVerdict::Never);
        assert_eq!(p.designated.as_deref(), Some("brand"));
    }

    #[test]
    fn probe_finds_threshold_above_competing_ecpm() {
        // brand on top: v + 0.2; non-brand on top: 1 + 0.9 v; crossing at v = 8.
        let inst = brand_instance(
            vec![
                Advertiser::brand("b", 1.0, 1.0),
                Advertiser::new("n", 1.0, 1.0),
            ],
            vec![1.0, 0.9],
            vec![1.0, 0.2],
        );
        let p = brand_threshold_probe(&inst, &[], &[1.0, 4.0, 7.9, 8.0, 12.0]).unwrap();
        assert_eq!(p.verdict, ThresholdVerdict::Threshold(8.0));

        let same_curves = brand_instance(
            vec![
                Advertiser::brand("b", 1.0, 1.0),
                Advertiser::new("n", 1.0, 1.0),
            ],
            vec![1.0, 0.5],
            vec![1.0, 0.5],
        );
        let p = brand_threshold_probe(&same_curves, &[], &[0.5, 1.0, 1.5, 2.5]).unwrap();
        assert_eq!(p.verdict, ThresholdVerdict::Threshold(1.0));
    }

    #[test]
    fn probe_trivial_verdicts() {
        let brand_only = brand_instance(
            vec![
                Advertiser::brand("b", 1.0, 1.0),
                Advertiser::brand("c", 0.5, 1.0),
            ],
            vec![1.0, 0.5],
            vec![1.0, 0.5],
        );
        let p = brand_threshold_probe(&brand_only, &[], &[0.1, 1.0]).unwrap();
        assert_eq!(p.verdict, ThresholdVerdict::Always);
        assert_eq!(p.not_highest, vec![0.1]);

        let dead_slot = brand_instance(
            vec![
                Advertiser::new("top", 5.0, 1.0),
                Advertiser::brand("b", 1.0, 1.0),
                Advertiser::new("n", 1.0, 1.0),
            ],
            vec![1.0, 0.0],
            vec![1.0, 0.5],
        );
        let p = brand_threshold_probe(&dead_slot, &["top"], &[0.5, 5.0, 50.0]).unwrap();
        assert_eq!(p.verdict, ThresholdVerdict::Never);
    }

    #[test]
    fn probe_rejects_bad_grid() {
        let inst = make_tight_greedy_instance(0.1).unwrap();
        assert!(brand_threshold_probe(&inst, &[], &[2.0, 1.0]).is_err());
        assert!(brand_threshold_probe(&inst, &["brand", "nonbrand"], &[1.0]).is_err());
    }
}
