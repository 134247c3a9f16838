//! Grid-sampling checker for the five click-model axioms:
//!
//! * A1: zero click rate when the ad's quality or the position's score is 0.
//! * A2: strictly increasing in the ad's own quality (where `n_j > 0`).
//! * A3: strictly increasing in the position's score (where `q_(j) > 0`).
//! * A4: non-increasing in the quality of any other slot's ad.
//! * A5: raising the quality in a better position (`n_i > n_k`) moves every
//!   other slot's click rate at least as much as the same raise in a worse one.
//!
//! Every quality vector in `grid^s` is visited. A passing verdict means
//! "held at every grid point", not that the model satisfies the axiom.

use std::fmt;

use crate::ctr::ClickModel;
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Witnesses kept per failing axiom.
const MAX_WITNESSES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    A1,
    A2,
    A3,
    A4,
    A5,
}

impl Axiom {
    pub const ALL: [Axiom; 5] = [Axiom::A1, Axiom::A2, Axiom::A3, Axiom::A4, Axiom::A5];
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PassOnGrid,
    /// Every comparison held with equality (e.g. A4/A5 for a separable model).
    PassWithEquality,
    /// No grid point was in scope for the axiom.
    Vacuous,
    Fail,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Fail)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::PassOnGrid => "pass on grid",
            Verdict::PassWithEquality => "pass on grid (equality)",
            Verdict::Vacuous => "vacuous",
            Verdict::Fail => "fail",
        })
    }
}

/// A grid point where an axiom broke.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// Slot whose click rate was evaluated.
    pub slot: usize,
    /// Slots whose quality (or, for A3, position score) was varied.
    pub varied: Vec<usize>,
    pub qualities: Vec<f64>,
    /// Perturbed quality vectors, in the order the values were computed.
    pub perturbed: Vec<Vec<f64>>,
    pub positions: Vec<f64>,
    /// Click rates at `qualities` followed by each perturbed vector.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomResult {
    pub axiom: Axiom,
    pub verdict: Verdict,
    pub checks: usize,
    pub failures: usize,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn verdict(&self, axiom: Axiom) -> Verdict {
        self.get(axiom).verdict
    }

    pub fn get(&self, axiom: Axiom) -> &AxiomResult {
        self.results
            .iter()
            .find(|r| r.axiom == axiom)
            .expect("every axiom is reported")
    }

    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.verdict.passed())
    }
}

#[derive(Default)]
struct Tally {
    checks: usize,
    equalities: usize,
    failures: usize,
    witnesses: Vec<Witness>,
}

impl Tally {
    fn record(&mut self, ok: bool, equal: bool, witness: impl FnOnce() -> Witness) {
        self.checks += 1;
        if equal {
            self.equalities += 1;
        }
        if !ok {
            self.failures += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    fn finish(self, axiom: Axiom, equality_is_weak: bool) -> AxiomResult {
        let verdict = if self.checks == 0 {
            Verdict::Vacuous
        } else if self.failures > 0 {
            Verdict::Fail
        } else if equality_is_weak && self.equalities == self.checks {
            Verdict::PassWithEquality
        } else {
            Verdict::PassOnGrid
        };
        AxiomResult {
            axiom,
            verdict,
            checks: self.checks,
            failures: self.failures,
            witnesses: self.witnesses,
        }
    }
}

/// Every vector in `grid^s`, as index vectors in lexicographic order.
fn grid_points(levels: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; s];
    loop {
        out.push(idx.clone());
        let mut d = s;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < levels {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Sorted, de-duplicated grid values.
fn normalize_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Error::InvalidArgument(
            "quality grid values must be finite and non-negative".into(),
        ));
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    if g.len() < 3 {
        return Err(Error::GridTooSmall { distinct: g.len() });
    }
    Ok(g)
}

/// Checks A1–A5 for `model` at every point of `grid^s`, where `s = positions.len()`.
///
/// A2/A3 require a strict increase larger than `tolerance` between consecutive
/// grid values; A4/A5 allow slack of `tolerance`. Position scores for A3 are
/// swept over the same grid.
pub fn check_axioms(
    model: &dyn ClickModel,
    grid: &[f64],
    positions: &[f64],
    tolerance: f64,
) -> Result<AxiomReport> {
    let grid = normalize_grid(grid)?;
    let s = positions.len();
    if s == 0 {
        return Err(Error::InvalidArgument("need at least one position".into()));
    }
    let levels = grid.len();
    let points = grid_points(levels, s);
    let values = |idx: &[usize]| -> Vec<f64> { idx.iter().map(|&i| grid[i]).collect() };
    let eval = |j: usize, q: &[f64], n: &[f64]| model.click_rate(j, q, n);

    // A1
    let mut a1 = Tally::default();
    for idx in &points {
        let q = values(idx);
        for j in 0..s {
            if q[j] == 0.0 || positions[j] == 0.0 {
                let f = eval(j, &q, positions)?;
                a1.record(f.abs() <= tolerance, false, || Witness {
                    slot: j,
                    varied: vec![j],
                    qualities: q.clone(),
                    perturbed: vec![],
                    positions: positions.to_vec(),
                    values: vec![f],
                });
            }
            if positions[j] != 0.0 {
                let mut n0 = positions.to_vec();
                n0[j] = 0.0;
                let f = eval(j, &q, &n0)?;
                a1.record(f.abs() <= tolerance, false, || Witness {
                    slot: j,
                    varied: vec![j],
                    qualities: q.clone(),
                    perturbed: vec![],
                    positions: n0.clone(),
                    values: vec![f],
                });
            }
        }
    }

    // A2 and A4: step one slot's quality to the next grid value.
    let mut a2 = Tally::default();
    let mut a4 = Tally::default();
    for idx in &points {
        let q = values(idx);
        for k in 0..s {
            if idx[k] + 1 == levels {
                continue;
            }
            let mut up = q.clone();
            up[k] = grid[idx[k] + 1];
            for j in 0..s {
                if j == k {
                    if positions[j] <= 0.0 {
                        continue;
                    }
                    let (lo, hi) = (eval(j, &q, positions)?, eval(j, &up, positions)?);
                    a2.record(hi - lo > tolerance, false, || Witness {
                        slot: j,
                        varied: vec![k],
                        qualities: q.clone(),
                        perturbed: vec![up.clone()],
                        positions: positions.to_vec(),
                        values: vec![lo, hi],
                    });
                } else {
                    let (lo, hi) = (eval(j, &q, positions)?, eval(j, &up, positions)?);
                    a4.record(hi <= lo + tolerance, (hi - lo).abs() <= tolerance, || {
                        Witness {
                            slot: j,
                            varied: vec![k],
                            qualities: q.clone(),
                            perturbed: vec![up.clone()],
                            positions: positions.to_vec(),
                            values: vec![lo, hi],
                        }
                    });
                }
            }
        }
    }

    // A3: step the slot's own position score along the grid.
    let mut a3 = Tally::default();
    for idx in &points {
        let q = values(idx);
        for j in 0..s {
            if q[j] <= 0.0 {
                continue;
            }
            for w in grid.windows(2) {
                let mut lo_n = positions.to_vec();
                let mut hi_n = positions.to_vec();
                lo_n[j] = w[0];
                hi_n[j] = w[1];
                let (lo, hi) = (eval(j, &q, &lo_n)?, eval(j, &q, &hi_n)?);
                a3.record(hi - lo > tolerance, false, || Witness {
                    slot: j,
                    varied: vec![j],
                    qualities: q.clone(),
                    perturbed: vec![],
                    positions: hi_n.clone(),
                    values: vec![lo, hi],
                });
            }
        }
    }

    // A5: equal baseline quality in slots i (better) and k (worse), same raise in each.
    let mut a5 = Tally::default();
    for i in 0..s {
        for k in 0..s {
            if positions[i] <= positions[k] {
                continue;
            }
            for idx in points.iter().filter(|idx| idx[i] == idx[k]) {
                let q = values(idx);
                for (h, &q_hat) in grid.iter().enumerate() {
                    if h == idx[i] {
                        continue;
                    }
                    let mut via_i = q.clone();
                    via_i[i] = q_hat;
                    let mut via_k = q.clone();
                    via_k[k] = q_hat;
                    for j in (0..s).filter(|&j| j != i && j != k) {
                        let base = eval(j, &q, positions)?;
                        let fi = eval(j, &via_i, positions)?;
                        let fk = eval(j, &via_k, positions)?;
                        let (di, dk) = ((fi - base).abs(), (fk - base).abs());
                        a5.record(di >= dk - tolerance, (di - dk).abs() <= tolerance, || {
                            Witness {
                                slot: j,
                                varied: vec![i, k],
                                qualities: q.clone(),
                                perturbed: vec![via_i.clone(), via_k.clone()],
                                positions: positions.to_vec(),
                                values: vec![base, fi, fk],
                            }
                        });
                    }
                }
            }
        }
    }

    Ok(AxiomReport {
        results: vec![
            a1.finish(Axiom::A1, false),
            a2.finish(Axiom::A2, false),
            a3.finish(Axiom::A3, false),
            a4.finish(Axiom::A4, true),
            a5.finish(Axiom::A5, true),
        ],
    })
}
