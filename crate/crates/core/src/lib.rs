//! Welfare-maximizing allocation and pricing for sponsored-search position
//! auctions under separable, externality and brand-effect click models.

pub mod axioms;
pub mod brand;
pub mod cli;
pub mod ctr;
pub mod error;
pub mod extern_alloc;
pub mod instance;
pub mod io;
pub mod pricing;
pub mod welfare;

pub use ctr::{ClickModel, PracticalCtr, SeparableCtr};
pub use error::{Error, Result};
pub use instance::{
    validate_instance, AdId, Advertiser, Allocation, AuctionInstance, BrandPositionProfile,
    ExternalityParams, PositionProfile, Positions,
};
pub use welfare::{welfare, Method, Model, WelfareReport};
