//! Domain types shared by every allocator and pricer, plus instance validation.
//!
//! Slot indices are 0-based throughout the API; reports convert to 1-based
//! positions when printing.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result, Violations};

pub type AdId = String;

#[derive(Debug, Clone, PartialEq)]
pub struct Advertiser {
    pub id: AdId,
    /// Maximum cost per click.
    pub bid: f64,
    /// Relative click propensity.
    pub quality: f64,
    /// Only consulted by the brand-effects model.
    pub brand: bool,
}

impl Advertiser {
    pub fn new(id: impl Into<AdId>, bid: f64, quality: f64) -> Self {
        Self {
            id: id.into(),
            bid,
            quality,
            brand: false,
        }
    }

    pub fn brand(id: impl Into<AdId>, bid: f64, quality: f64) -> Self {
        Self {
            brand: true,
            ..Self::new(id, bid, quality)
        }
    }

    pub fn ecpm(&self) -> f64 {
        ecpm(self)
    }
}

/// The eCPM ranking score `bid * quality`. No factor of 1000 is applied.
pub fn ecpm(a: &Advertiser) -> f64 {
    a.bid * a.quality
}

/// Position quality scores `n_k`, non-increasing down the page.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionProfile(pub Vec<f64>);

impl PositionProfile {
    pub fn scores(&self) -> &[f64] {
        &self.0
    }
}

/// Separate position curves for brand (`beta`) and non-brand (`eta`) ads.
#[derive(Debug, Clone, PartialEq)]
pub struct BrandPositionProfile {
    pub beta: Vec<f64>,
    pub eta: Vec<f64>,
}

impl BrandPositionProfile {
    pub fn coefficient(&self, slot: usize, brand: bool) -> f64 {
        if brand {
            self.beta[slot]
        } else {
            self.eta[slot]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Positions {
    Separable(PositionProfile),
    Brand(BrandPositionProfile),
}

impl Positions {
    pub fn len(&self) -> usize {
        match self {
            Positions::Separable(p) => p.0.len(),
            Positions::Brand(p) => p.beta.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Positions::Separable(_) => "single-curve",
            Positions::Brand(_) => "brand",
        }
    }
}

/// Externality strength `lambda` and calibration scale `nu` of the practical CTR model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExternalityParams {
    pub lambda: f64,
    pub nu: f64,
}

impl ExternalityParams {
    pub fn new(lambda: f64, nu: f64) -> Self {
        Self { lambda, nu }
    }

    pub fn is_valid(&self) -> bool {
        self.lambda.is_finite() && self.lambda >= 0.0 && self.nu.is_finite() && self.nu > 0.0
    }
}

impl Default for ExternalityParams {
    /// `lambda = 0, nu = 1`, which reduces the practical model to the separable one.
    fn default() -> Self {
        Self {
            lambda: 0.0,
            nu: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionInstance {
    pub advertisers: Vec<Advertiser>,
    pub positions: Positions,
    pub params: Option<ExternalityParams>,
}

impl AuctionInstance {
    pub fn new(advertisers: Vec<Advertiser>, positions: Positions) -> Self {
        Self {
            advertisers,
            positions,
            params: None,
        }
    }

    pub fn with_params(mut self, params: ExternalityParams) -> Self {
        self.params = Some(params);
        self
    }

    pub fn num_slots(&self) -> usize {
        self.positions.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.advertisers.iter().position(|a| a.id == id)
    }

    pub fn params_or_default(&self) -> ExternalityParams {
        self.params.unwrap_or_default()
    }

    /// The single-curve position scores, or `ModelProfileMismatch` for a brand profile.
    pub fn position_scores(&self, model: &'static str) -> Result<&[f64]> {
        match &self.positions {
            Positions::Separable(p) => Ok(p.scores()),
            other => Err(Error::ModelProfileMismatch {
                model,
                profile: other.kind_name(),
            }),
        }
    }

    pub fn brand_profile(&self) -> Result<&BrandPositionProfile> {
        match &self.positions {
            Positions::Brand(p) => Ok(p),
            other => Err(Error::ModelProfileMismatch {
                model: "brand",
                profile: other.kind_name(),
            }),
        }
    }

    /// Copy of the instance with one advertiser's bid replaced.
    pub fn with_bid(&self, index: usize, bid: f64) -> Self {
        let mut out = self.clone();
        out.advertisers[index].bid = bid;
        out
    }
}

/// A single violated invariant found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoAdvertisers,
    NoPositions,
    MissingProfile,
    NonMonotonePositions {
        profile: &'static str,
        index: usize,
    },
    PositionScoreOutOfRange {
        profile: &'static str,
        index: usize,
        value: f64,
    },
    BrandProfileLengthMismatch {
        beta: usize,
        eta: usize,
    },
    UnnormalizedBrandProfile {
        beta1: f64,
        eta1: f64,
    },
    NegativeBidOrQuality {
        id: AdId,
    },
    DuplicateId {
        id: AdId,
    },
    InvalidParams {
        lambda: f64,
        nu: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAdvertisers => write!(f, "no advertisers"),
            Violation::NoPositions => write!(f, "no positions"),
            Violation::MissingProfile => write!(f, "missing position profile"),
            Violation::NonMonotonePositions { profile, index } => write!(
                f,
                "{profile} increases between positions {} and {}",
                index,
                index + 1
            ),
            Violation::PositionScoreOutOfRange {
                profile,
                index,
                value,
            } => write!(f, "{profile}[{}] = {value} is out of range", index + 1),
            Violation::BrandProfileLengthMismatch { beta, eta } => {
                write!(f, "beta has {beta} entries but eta has {eta}")
            }
            Violation::UnnormalizedBrandProfile { beta1, eta1 } => {
                write!(f, "beta_1 = {beta1} and eta_1 = {eta1}, both must be 1")
            }
            Violation::NegativeBidOrQuality { id } => {
                write!(
                    f,
                    "advertiser `{id}` has a negative or non-finite bid or quality"
                )
            }
            Violation::DuplicateId { id } => write!(f, "duplicate advertiser id `{id}`"),
            Violation::InvalidParams { lambda, nu } => {
                write!(
                    f,
                    "need lambda >= 0 and nu > 0 (got lambda={lambda}, nu={nu})"
                )
            }
        }
    }
}

fn check_curve(name: &'static str, values: &[f64], upper: Option<f64>, out: &mut Vec<Violation>) {
    for (i, &v) in values.iter().enumerate() {
        let above = upper.is_some_and(|u| v > u);
        if !v.is_finite() || v < 0.0 || above {
            out.push(Violation::PositionScoreOutOfRange {
                profile: name,
                index: i,
                value: v,
            });
        }
    }
    for (i, w) in values.windows(2).enumerate() {
        if w[1] > w[0] {
            out.push(Violation::NonMonotonePositions {
                profile: name,
                index: i + 1,
            });
        }
    }
}

/// Every invariant violated by the instance's position profile and parameters.
pub(crate) fn profile_violations(
    positions: &Positions,
    params: Option<&ExternalityParams>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if positions.is_empty() {
        out.push(Violation::NoPositions);
    }
    match positions {
        Positions::Separable(p) => check_curve("n", p.scores(), None, &mut out),
        Positions::Brand(p) => {
            if p.beta.len() != p.eta.len() {
                out.push(Violation::BrandProfileLengthMismatch {
                    beta: p.beta.len(),
                    eta: p.eta.len(),
                });
            }
            check_curve("beta", &p.beta, Some(1.0), &mut out);
            check_curve("eta", &p.eta, Some(1.0), &mut out);
            if let (Some(&b1), Some(&e1)) = (p.beta.first(), p.eta.first()) {
                if b1 != 1.0 || e1 != 1.0 {
                    out.push(Violation::UnnormalizedBrandProfile {
                        beta1: b1,
                        eta1: e1,
                    });
                }
            }
        }
    }
    if let Some(params) = params {
        if !params.is_valid() {
            out.push(Violation::InvalidParams {
                lambda: params.lambda,
                nu: params.nu,
            });
        }
    }
    out
}

pub(crate) fn advertiser_violations(advertisers: &[Advertiser]) -> Vec<Violation> {
    let mut out = Vec::new();
    if advertisers.is_empty() {
        out.push(Violation::NoAdvertisers);
    }
    let mut seen = HashSet::new();
    for a in advertisers {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(a.bid) || !ok(a.quality) {
            out.push(Violation::NegativeBidOrQuality { id: a.id.clone() });
        }
        if !seen.insert(a.id.as_str()) {
            out.push(Violation::DuplicateId { id: a.id.clone() });
        }
    }
    out
}

/// Returns the instance unchanged if every invariant holds, otherwise the full
/// list of violations.
pub fn validate_instance(raw: AuctionInstance) -> Result<AuctionInstance> {
    let mut violations = profile_violations(&raw.positions, raw.params.as_ref());
    violations.extend(advertiser_violations(&raw.advertisers));
    if violations.is_empty() {
        Ok(raw)
    } else {
        Err(Error::Invalid(Violations(violations)))
    }
}

/// Ordered assignment of advertisers to slots. Filled slots always form a
/// prefix; trailing slots may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    slots: Vec<Option<AdId>>,
}

impl Allocation {
    pub fn new(slots: Vec<Option<AdId>>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut gap = false;
        for slot in &slots {
            match slot {
                Some(id) => {
                    if gap {
                        return Err(Error::InvalidAllocation(format!(
                            "`{id}` follows an empty slot"
                        )));
                    }
                    if !seen.insert(id.as_str()) {
                        return Err(Error::InvalidAllocation(format!("`{id}` appears twice")));
                    }
                }
                None => gap = true,
            }
        }
        Ok(Self { slots })
    }

    /// Fills the top slots with `ids` and leaves the rest of `num_slots` empty.
    pub fn from_ids<S: Into<AdId>>(
        ids: impl IntoIterator<Item = S>,
        num_slots: usize,
    ) -> Result<Self> {
        let mut slots: Vec<Option<AdId>> = ids.into_iter().map(|s| Some(s.into())).collect();
        if slots.len() > num_slots {
            return Err(Error::InvalidAllocation(format!(
                "{} ads for {num_slots} slots",
                slots.len()
            )));
        }
        slots.resize(num_slots, None);
        Self::new(slots)
    }

    pub(crate) fn from_indices(inst: &AuctionInstance, shown: &[usize]) -> Self {
        let mut slots: Vec<Option<AdId>> = shown
            .iter()
            .map(|&i| Some(inst.advertisers[i].id.clone()))
            .collect();
        slots.resize(inst.num_slots().max(shown.len()), None);
        Self { slots }
    }

    pub fn slots(&self) -> &[Option<AdId>] {
        &self.slots
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn shown(&self) -> impl Iterator<Item = &str> {
        self.slots.iter().map_while(|s| s.as_deref())
    }

    pub fn num_shown(&self) -> usize {
        self.shown().count()
    }

    pub fn position_of(&self, id: &str) -> Option<usize> {
        self.shown().position(|s| s == id)
    }

    pub fn get(&self, slot: usize) -> Option<&str> {
        self.slots.get(slot).and_then(|s| s.as_deref())
    }

    /// Advertiser indices of the shown prefix, checked against the instance.
    pub fn resolve(&self, inst: &AuctionInstance) -> Result<Vec<usize>> {
        if self.slots.len() != inst.num_slots() {
            return Err(Error::InvalidAllocation(format!(
                "allocation has {} slots, instance has {}",
                self.slots.len(),
                inst.num_slots()
            )));
        }
        self.shown()
            .map(|id| {
                inst.index_of(id)
                    .ok_or_else(|| Error::UnknownAdvertiser(id.to_string()))
            })
            .collect()
    }
}
