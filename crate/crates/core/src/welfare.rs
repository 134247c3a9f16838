use std::fmt;

use crate::ctr::{practical_ctr, separable_ctr};
use crate::error::Result;
use crate::instance::{Allocation, AuctionInstance, ExternalityParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Separable,
    Externality(ExternalityParams),
    Brand,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Separable => "separable",
            Model::Externality(_) => "externality",
            Model::Brand => "brand",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which procedure produced an allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Given,
    Rank,
    Bisection,
    Brute,
    Enumerate,
    Greedy,
    Fastpath,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Given => "given",
            Method::Rank => "rank",
            Method::Bisection => "bisection",
            Method::Brute => "brute",
            Method::Enumerate => "enumerate",
            Method::Greedy => "greedy",
            Method::Fastpath => "fastpath",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WelfareReport {
    pub total: f64,
    /// `b_(j) * p_(j)` per slot; empty slots contribute 0.
    pub per_slot: Vec<f64>,
    pub click_rates: Vec<f64>,
    pub model: Model,
    pub method: Method,
}

impl WelfareReport {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}

/// Per-slot click rates of an allocation under `model`; empty slots get 0.
pub fn click_rates(alloc: &Allocation, inst: &AuctionInstance, model: &Model) -> Result<Vec<f64>> {
    let shown = alloc.resolve(inst)?;
    let mut rates = vec![0.0; inst.num_slots()];
    match model {
        Model::Separable | Model::Externality(_) => {
            let n = inst.position_scores(model.name())?;
            let q: Vec<f64> = shown.iter().map(|&i| inst.advertisers[i].quality).collect();
            for (j, rate) in rates.iter_mut().enumerate().take(q.len()) {
                *rate = match model {
                    Model::Externality(params) => practical_ctr(j, &q, n, params)?,
                    _ => separable_ctr(j, &q, n)?,
                };
            }
        }
        Model::Brand => {
            let profile = inst.brand_profile()?;
            for (j, &i) in shown.iter().enumerate() {
                let ad = &inst.advertisers[i];
                rates[j] = profile.coefficient(j, ad.brand) * ad.quality;
            }
        }
    }
    Ok(rates)
}

/// Expected welfare `sum_j b_(j) * p_(j)` of an allocation.
pub fn welfare(alloc: &Allocation, inst: &AuctionInstance, model: &Model) -> Result<WelfareReport> {
    let rates = click_rates(alloc, inst, model)?;
    let per_slot: Vec<f64> = rates
        .iter()
        .enumerate()
        .map(|(j, p)| match alloc.get(j) {
            Some(id) => {
                let i = inst.index_of(id).expect("resolved above");
                inst.advertisers[i].bid * p
            }
            None => 0.0,
        })
        .collect();
    Ok(WelfareReport {
        total: per_slot.iter().sum(),
        per_slot,
        click_rates: rates,
        model: *model,
        method: Method::Given,
    })
}
