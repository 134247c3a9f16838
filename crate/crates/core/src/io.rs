//! Instance documents (JSON) and run reports.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};
use crate::instance::{
    advertiser_violations, validate_instance, Advertiser, AuctionInstance, BrandPositionProfile,
    ExternalityParams, PositionProfile, Positions, Violation,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub positions: PositionsDocument,
    pub advertisers: Vec<AdvertiserDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsDocument>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionsDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvertiserDocument {
    pub id: String,
    pub bid: f64,
    pub quality: f64,
    #[serde(default)]
    pub brand: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDocument {
    pub lambda: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
}

fn default_nu() -> f64 {
    1.0
}

impl From<&AuctionInstance> for InstanceDocument {
    fn from(inst: &AuctionInstance) -> Self {
        let positions = match &inst.positions {
            Positions::Separable(p) => PositionsDocument {
                n: Some(p.0.clone()),
                ..Default::default()
            },
            Positions::Brand(p) => PositionsDocument {
                beta: Some(p.beta.clone()),
                eta: Some(p.eta.clone()),
                ..Default::default()
            },
        };
        InstanceDocument {
            positions,
            advertisers: inst
                .advertisers
                .iter()
                .map(|a| AdvertiserDocument {
                    id: a.id.clone(),
                    bid: a.bid,
                    quality: a.quality,
                    brand: a.brand,
                })
                .collect(),
            params: inst.params.map(|p| ParamsDocument {
                lambda: p.lambda,
                nu: p.nu,
            }),
        }
    }
}

fn parse_error(message: impl Into<String>, line: usize, column: usize) -> Error {
    Error::Parse {
        message: message.into(),
        line,
        column,
    }
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<AuctionInstance> {
    let doc: InstanceDocument =
        serde_json::from_str(text).map_err(|e| parse_error(e.to_string(), e.line(), e.column()))?;
    let advertisers: Vec<Advertiser> = doc
        .advertisers
        .into_iter()
        .map(|a| Advertiser {
            id: a.id,
            bid: a.bid,
            quality: a.quality,
            brand: a.brand,
        })
        .collect();
    let params = doc.params.map(|p| ExternalityParams::new(p.lambda, p.nu));
    let positions = match (doc.positions.n, doc.positions.beta, doc.positions.eta) {
        (Some(n), None, None) => Positions::Separable(PositionProfile(n)),
        (None, Some(beta), Some(eta)) => Positions::Brand(BrandPositionProfile { beta, eta }),
        (None, None, None) => {
            let mut violations = vec![Violation::MissingProfile];
            violations.extend(advertiser_violations(&advertisers));
            return Err(Error::Invalid(Violations(violations)));
        }
        (Some(_), _, _) => {
            return Err(parse_error(
                "ambiguous profile: `positions` has both `n` and `beta`/`eta`",
                0,
                0,
            ))
        }
        (None, _, _) => {
            return Err(parse_error(
                "incomplete brand profile: `positions` needs both `beta` and `eta`",
                0,
                0,
            ))
        }
    };
    let inst = AuctionInstance {
        advertisers,
        positions,
        params,
    };
    validate_instance(inst)
}

/// Pretty-printed document for an instance. [`parse_instance`] inverts it exactly.
pub fn emit_instance(inst: &AuctionInstance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceDocument::from(inst))
        .expect("instance documents always serialize");
    s.push('\n');
    s
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn round_opt(x: &Option<f64>) -> Option<f64> {
    x.map(round12)
}

mod rounded {
    use serde::Serializer;

    pub fn f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::round12(*x))
    }

    pub fn opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match super::round_opt(x) {
            Some(v) => s.serialize_some(&v),
            None => s.serialize_none(),
        }
    }

    pub fn vec<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(x.iter().map(|v| super::round12(*v)))
    }

    pub fn nested<S: Serializer>(x: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            x.iter()
                .map(|row| row.iter().map(|v| super::round12(*v)).collect::<Vec<_>>()),
        )
    }
}

/// One row per slot of a report. `position` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRow {
    pub position: usize,
    pub id: Option<String>,
    #[serde(serialize_with = "rounded::opt")]
    pub bid: Option<f64>,
    #[serde(serialize_with = "rounded::opt")]
    pub quality: Option<f64>,
    #[serde(serialize_with = "rounded::f64")]
    pub click_rate: f64,
    #[serde(serialize_with = "rounded::opt")]
    pub price: Option<f64>,
    #[serde(serialize_with = "rounded::f64")]
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(
        skip_serializing_if = "Option::is_none",
        serialize_with = "rounded::opt"
    )]
    pub s_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<Bracket>,
    pub skipped: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    #[serde(serialize_with = "rounded::f64")]
    pub initial_lower: f64,
    #[serde(serialize_with = "rounded::f64")]
    pub initial_upper: f64,
    #[serde(serialize_with = "rounded::f64")]
    pub lower: f64,
    #[serde(serialize_with = "rounded::f64")]
    pub upper: f64,
    pub converged: bool,
}

/// Output of `allocate` and `price`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub model: String,
    pub method: String,
    pub allocation: Vec<String>,
    #[serde(serialize_with = "rounded::f64")]
    pub welfare: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pricing_rule: Option<String>,
    pub slots: Vec<SlotRow>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateReport {
    pub valid: bool,
    pub advertisers: usize,
    pub positions: usize,
    pub profile: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevenueRowReport {
    pub position: usize,
    #[serde(serialize_with = "rounded::f64")]
    pub price_separable: f64,
    #[serde(serialize_with = "rounded::f64")]
    pub price_externality: f64,
    #[serde(serialize_with = "rounded::f64")]
    pub delta: f64,
    /// Sign of `q_(k) - q_(k+1)`: -1, 0 or 1.
    pub quality_sign: i8,
    pub sign_agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevenueReport {
    #[serde(serialize_with = "rounded::f64")]
    pub lambda: f64,
    pub allocations_identical: bool,
    pub separable_allocation: Vec<String>,
    pub externality_allocation: Vec<String>,
    pub rows: Vec<RevenueRowReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomRowReport {
    pub axiom: String,
    pub verdict: String,
    pub checks: usize,
    pub failures: usize,
    pub witnesses: Vec<WitnessReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub slot: usize,
    pub varied: Vec<usize>,
    #[serde(serialize_with = "rounded::vec")]
    pub qualities: Vec<f64>,
    #[serde(serialize_with = "rounded::nested")]
    pub perturbed: Vec<Vec<f64>>,
    #[serde(serialize_with = "rounded::vec")]
    pub positions: Vec<f64>,
    #[serde(serialize_with = "rounded::vec")]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomsReport {
    pub model: String,
    #[serde(serialize_with = "rounded::f64")]
    pub lambda: f64,
    #[serde(serialize_with = "rounded::vec")]
    pub positions: Vec<f64>,
    #[serde(serialize_with = "rounded::vec")]
    pub grid: Vec<f64>,
    pub all_pass: bool,
    pub axioms: Vec<AxiomRowReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub greedy_allocation: Vec<String>,
    pub optimal_allocation: Vec<String>,
    #[serde(serialize_with = "rounded::f64")]
    pub greedy_welfare: f64,
    #[serde(serialize_with = "rounded::f64")]
    pub optimal_welfare: f64,
    #[serde(serialize_with = "rounded::f64")]
    pub ratio: f64,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}

/// Writes per-slot rows as CSV with a header line.
pub fn write_slot_csv<W: Write>(rows: &[SlotRow], out: W) -> Result<()> {
    let io_err = |e: csv::Error| Error::InvalidArgument(format!("cannot write CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "position",
        "id",
        "bid",
        "quality",
        "click_rate",
        "price",
        "contribution",
    ])
    .map_err(io_err)?;
    let num = |x: Option<f64>| x.map(|v| round12(v).to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.position.to_string(),
            r.id.clone().unwrap_or_default(),
            num(r.bid),
            num(r.quality),
            num(Some(r.click_rate)),
            num(r.price),
            num(Some(r.contribution)),
        ])
        .map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("cannot write CSV: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brand::make_tight_greedy_instance;
    use proptest::prelude::*;

    #[test]
    fn minimal_document() {
        let inst = parse_instance(
            r#"{"positions": {"n": [1]}, "advertisers": [{"id": "a", "bid": 1, "quality": 0.5}]}"#,
        )
        .unwrap();
        assert_eq!(inst.advertisers.len(), 1);
        assert_eq!(inst.num_slots(), 1);
        assert!(!inst.advertisers[0].brand);
        assert_eq!(inst.params, None);
    }

    #[test]
    fn nu_defaults_to_one() {
        let inst = parse_instance(
            r#"{"positions": {"n": [1]}, "advertisers": [{"id": "a", "bid": 1, "quality": 0.5}],
                "params": {"lambda": 2}}"#,
        )
        .unwrap();
        assert_eq!(inst.params, Some(ExternalityParams::new(2.0, 1.0)));
    }

    #[test]
    fn ambiguous_profile() {
        let err = parse_instance(
            r#"{"positions": {"n": [1], "beta": [1], "eta": [1]},
                "advertisers": [{"id": "a", "bid": 1, "quality": 0.5}]}"#,
        )
        .unwrap_err();
        match err {
            Error::Parse { message, .. } => assert!(message.contains("ambiguous")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_profile() {
        let err = parse_instance(r#"{"positions": {}, "advertisers": []}"#).unwrap_err();
        assert_eq!(
            err,
            Error::Invalid(Violations(vec![
                Violation::MissingProfile,
                Violation::NoAdvertisers
            ]))
        );
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_instance(
            r#"{"positions": {"n": [1]},
                "advertisers": [{"id": "a", "bid": 1, "quality": 0.5, "budget": 3}]}"#,
        )
        .unwrap_err();
        match err {
            Error::Parse { message, line, .. } => {
                assert!(message.contains("budget"), "{message}");
                assert_eq!(line, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_instance("{\n  \"positions\": [,\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn validation_errors_pass_through() {
        let err = parse_instance(
            r#"{"positions": {"n": [0.5, 1]}, "advertisers": [{"id": "a", "bid": -1, "quality": 0.5}]}"#,
        )
        .unwrap_err();
        match err {
            Error::Invalid(Violations(v)) => assert_eq!(v.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tight_instance_round_trips() {
        let inst = make_tight_greedy_instance(0.1).unwrap();
        assert_eq!(parse_instance(&emit_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn rounding() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(-2.5e-20), -2.5e-20);
        assert_eq!(round12(0.0), 0.0);
    }

    #[test]
    fn csv_rows() {
        let rows = vec![SlotRow {
            position: 1,
            id: Some("a".into()),
            bid: Some(2.0),
            quality: Some(1.0),
            click_rate: 1.0,
            price: None,
            contribution: 2.0,
        }];
        let mut buf = Vec::new();
        write_slot_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "position,id,bid,quality,click_rate,price,contribution\n1,a,2,1,1,,2\n"
        );
    }

    fn arb_instance() -> impl Strategy<Value = AuctionInstance> {
        let ads = prop::collection::vec((0.0f64..100.0, 0.0f64..1.0, any::<bool>()), 1..6);
        let curve = prop::collection::vec(0.0f64..1.0, 1..5).prop_map(|mut v| {
            v.sort_by(|a, b| b.total_cmp(a));
            v
        });
        let params = prop::option::of((0.0f64..20.0, 0.01f64..5.0));
        (ads, curve.clone(), curve, any::<bool>(), params).prop_map(
            |(ads, c1, c2, brand, params)| {
                let advertisers = ads
                    .into_iter()
                    .enumerate()
                    .map(|(i, (b, q, br))| Advertiser {
                        id: format!("ad{i}"),
                        bid: b,
                        quality: q,
                        brand: br,
                    })
                    .collect();
                let positions = if brand {
                    let len = c1.len().min(c2.len());
                    let mut beta = c1[..len].to_vec();
                    let mut eta = c2[..len].to_vec();
                    beta[0] = 1.0;
                    eta[0] = 1.0;
                    Positions::Brand(BrandPositionProfile { beta, eta })
                } else {
                    Positions::Separable(PositionProfile(c1))
                };
                AuctionInstance {
                    advertisers,
                    positions,
                    params: params.map(|(l, n)| ExternalityParams::new(l, n)),
                }
            },
        )
    }

    proptest! {
        #[test]
        fn emit_then_parse_is_identity(inst in arb_instance()) {
            let inst = validate_instance(inst).unwrap();
            prop_assert_eq!(parse_instance(&emit_instance(&inst)).unwrap(), inst);
        }
    }
}
