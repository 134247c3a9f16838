#![allow(dead_code)]

use position_auction::{
    Advertiser, AuctionInstance, BrandPositionProfile, PositionProfile, Positions,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `len` values in `(0, 1]`, strictly decreasing, starting at 1.
pub fn strictly_decreasing(rng: &mut ChaCha8Rng, len: usize, floor: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (1..len).map(|_| rng.gen_range(floor..1.0)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v.dedup();
    while v.len() + 1 < len {
        let x = rng.gen_range(floor..1.0);
        if !v.contains(&x) {
            v.push(x);
            v.sort_by(|a, b| b.total_cmp(a));
        }
    }
    let mut out = vec![1.0];
    out.extend(v);
    out
}

/// Non-increasing curve starting at 1, with occasional repeated values.
pub fn non_increasing(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 1..len {
        let last = *out.last().unwrap();
        let next = if rng.gen_bool(0.15) {
            last
        } else {
            rng.gen_range(0.0..=last)
        };
        out.push(next);
    }
    out
}

fn ids(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("ad{i}")).collect()
}

/// Single-curve instance with `m` ads and `s` slots. Qualities come from a
/// coarse grid when `tied_qualities`, so adjacent ties occur.
pub fn separable_instance(
    rng: &mut ChaCha8Rng,
    m: usize,
    s: usize,
    tied_qualities: bool,
) -> AuctionInstance {
    let n = strictly_decreasing(rng, s, 0.05);
    let ads = ids(m)
        .into_iter()
        .map(|id| {
            let q = if tied_qualities {
                *[0.2, 0.4, 0.6, 0.8].choose(rng).unwrap()
            } else {
                rng.gen_range(0.01..1.0)
            };
            Advertiser::new(id, rng.gen_range(0.1..10.0), q)
        })
        .collect();
    AuctionInstance::new(ads, Positions::Separable(PositionProfile(n)))
}

/// Random single-curve instance with `m` in `1..=max_m`, `s` in `1..=max_s`.
pub fn random_separable(rng: &mut ChaCha8Rng, max_m: usize, max_s: usize) -> AuctionInstance {
    let m = rng.gen_range(1..=max_m);
    let s = rng.gen_range(1..=max_s);
    let mut inst = separable_instance(rng, m, s, false);
    // Non-strict curves are allowed too.
    if rng.gen_bool(0.3) {
        inst.positions = Positions::Separable(PositionProfile(non_increasing(rng, s)));
    }
    inst
}

fn brand_ads(rng: &mut ChaCha8Rng, m: usize) -> Vec<Advertiser> {
    ids(m)
        .into_iter()
        .map(|id| Advertiser {
            id,
            bid: rng.gen_range(0.1..10.0),
            quality: rng.gen_range(0.05..1.0),
            brand: rng.gen_bool(0.5),
        })
        .collect()
}

/// Brand instance with constant beta and strictly decreasing eta.
pub fn brand_last_instance(rng: &mut ChaCha8Rng, max_m: usize, max_s: usize) -> AuctionInstance {
    let m = rng.gen_range(1..=max_m);
    let s = rng.gen_range(1..=max_s);
    let eta = strictly_decreasing(rng, s, 0.0);
    AuctionInstance::new(
        brand_ads(rng, m),
        Positions::Brand(BrandPositionProfile {
            beta: vec![1.0; s],
            eta,
        }),
    )
}

/// Brand instance with arbitrary non-increasing curves.
pub fn random_brand(rng: &mut ChaCha8Rng, max_m: usize, max_s: usize) -> AuctionInstance {
    let m = rng.gen_range(1..=max_m);
    let s = rng.gen_range(1..=max_s);
    let beta = non_increasing(rng, s);
    let eta = non_increasing(rng, s);
    AuctionInstance::new(
        brand_ads(rng, m),
        Positions::Brand(BrandPositionProfile { beta, eta }),
    )
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
