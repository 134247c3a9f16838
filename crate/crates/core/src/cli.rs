//! Command-line front end. Reports are JSON on standard output.
//!
//! Exit codes: 0 success, 1 input error, 2 internal invariant violation.

use std::cmp::Ordering;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::axioms::{check_axioms, DEFAULT_TOLERANCE};
use crate::brand::{
    brand_last_fastpath, greedy_brand_allocate, greedy_ratio, make_greedy_vs_standard_instance,
    make_tight_greedy_instance, optimal_brand_allocate, standard_allocate,
};
use crate::ctr::{ClickModel, PracticalCtr, SeparableCtr};
use crate::error::{Error, Result};
use crate::extern_alloc::{
    bisection_allocate_with, brute_force_allocate_with, rank_by_score, BisectionOptions,
    BruteForceOptions, ExternAllocationResult, ShowPolicy,
};
use crate::instance::{Allocation, AuctionInstance, ExternalityParams, Positions};
use crate::io::{
    emit_instance, parse_instance, to_json, write_slot_csv, AxiomRowReport, AxiomsReport, Bracket,
    Diagnostics, RatioReport, RevenueReport, RevenueRowReport, RunReport, SlotRow, ValidateReport,
    WitnessReport,
};
use crate::pricing::{
    adjacent_swap_schedule, maintaining_bid_schedule, revenue_compare, PriceSchedule, PricingRule,
};
use crate::welfare::{welfare, Method, Model};

const DEFAULT_PRICE_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "posauction",
    version,
    about = "Position auction allocation and pricing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Separable,
    #[value(alias = "practical")]
    Externality,
    Brand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Rank,
    Bisection,
    Brute,
    Enumerate,
    Greedy,
    Fastpath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Maintaining,
    Swap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    GreedyTight,
    GreedyVsStandard,
}

#[derive(Debug, clap::Args)]
struct AllocArgs {
    /// Instance file; standard input when omitted or `-`.
    file: Option<PathBuf>,
    /// Click model. Defaults to `brand` for a brand profile, `externality`
    /// when the instance carries params, else `separable`.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Defaults to `rank` (separable), `bisection` (externality) or
    /// `enumerate` (brand).
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Externality strength; overrides the instance's params.
    #[arg(long)]
    lambda: Option<f64>,
    /// Fill every slot even with negative-score ads (externality model).
    #[arg(long)]
    fill_all: bool,
    /// Also write per-slot rows as CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an instance file and report its shape.
    Validate { file: Option<PathBuf> },
    /// Compute an allocation and its welfare.
    Allocate(AllocArgs),
    /// Allocate, then price every shown ad.
    Price {
        #[arg(long, value_enum)]
        rule: RuleArg,
        /// Bisection tolerance for the maintaining-bid rule.
        #[arg(long, default_value_t = DEFAULT_PRICE_TOL)]
        tol: f64,
        #[command(flatten)]
        alloc: AllocArgs,
    },
    /// Compare swap prices with and without externalities.
    CompareRevenue {
        file: Option<PathBuf>,
        #[arg(long)]
        lambda: f64,
    },
    /// Grid-check the click-model axioms.
    CheckAxioms {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        /// Position scores, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 0.6, 0.3])]
        positions: Vec<f64>,
        /// Quality grid, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.25, 0.5, 0.75, 1.0])]
        grid: Vec<f64>,
    },
    /// Emit a worst-case brand instance.
    Gen {
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long)]
        epsilon: f64,
    },
    /// Greedy over optimal brand welfare.
    Ratio { file: Option<PathBuf> },
}

/// Runs the CLI on `args` (without the program name). `read_stdin` is called
/// only when an instance is read from standard input.
pub fn run_cli<R>(args: &[String], read_stdin: R, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    R: FnOnce() -> io::Result<String>,
{
    let cli = match Cli::try_parse_from(
        std::iter::once("posauction".to_string()).chain(args.iter().cloned()),
    ) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    let mut stdin = Some(read_stdin);
    let mut load = |file: &Option<PathBuf>| -> Result<AuctionInstance> {
        let text = match file {
            Some(p) if p.as_os_str() != "-" => fs::read_to_string(p)
                .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", p.display())))?,
            _ => {
                let read = stdin.take().ok_or_else(|| {
                    Error::InvalidArgument("standard input already consumed".into())
                })?;
                read().map_err(|e| {
                    Error::InvalidArgument(format!("cannot read standard input: {e}"))
                })?
            }
        };
        parse_instance(&text)
    };
    match dispatch(cli.command, &mut load) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: cannot write output: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(
    command: Command,
    load: &mut dyn FnMut(&Option<PathBuf>) -> Result<AuctionInstance>,
) -> Result<String> {
    match command {
        Command::Validate { file } => {
            let inst = load(&file)?;
            Ok(to_json(&ValidateReport {
                valid: true,
                advertisers: inst.advertisers.len(),
                positions: inst.num_slots(),
                profile: inst.positions.kind_name().to_string(),
            }))
        }
        Command::Allocate(args) => {
            let inst = load(&args.file)?;
            let plan = Plan::new(&args, &inst)?;
            let report = plan.report(&inst, None)?;
            write_csv(&args, &report)?;
            Ok(to_json(&report))
        }
        Command::Price { rule, tol, alloc } => {
            let inst = load(&alloc.file)?;
            let plan = Plan::new(&alloc, &inst)?;
            let report = plan.report(&inst, Some((rule, tol)))?;
            write_csv(&alloc, &report)?;
            Ok(to_json(&report))
        }
        Command::CompareRevenue { file, lambda } => {
            let inst = load(&file)?;
            let cmp = revenue_compare(&inst, lambda)?;
            let ids = |a: &Allocation| a.shown().map(str::to_string).collect::<Vec<_>>();
            Ok(to_json(&RevenueReport {
                lambda,
                allocations_identical: cmp.allocations_identical,
                separable_allocation: ids(&cmp.separable_allocation),
                externality_allocation: ids(&cmp.externality_allocation),
                rows: cmp
                    .rows
                    .iter()
                    .map(|r| RevenueRowReport {
                        position: r.slot + 1,
                        price_separable: r.price_separable,
                        price_externality: r.price_externality,
                        delta: r.delta,
                        quality_sign: match r.quality_order {
                            Ordering::Less => -1,
                            Ordering::Equal => 0,
                            Ordering::Greater => 1,
                        },
                        sign_agrees: r.sign_agrees,
                    })
                    .collect(),
            }))
        }
        Command::CheckAxioms {
            model,
            lambda,
            nu,
            positions,
            grid,
        } => {
            let params = ExternalityParams::new(lambda, nu);
            if !params.is_valid() {
                return Err(Error::InvalidArgument(format!(
                    "need lambda >= 0 and nu > 0 (got lambda={lambda}, nu={nu})"
                )));
            }
            let practical = PracticalCtr { params };
            let ctr: &dyn ClickModel = match model {
                ModelArg::Separable => &SeparableCtr,
                ModelArg::Externality => &practical,
                ModelArg::Brand => {
                    return Err(Error::InvalidArgument(
                        "conflicting flags: axioms are defined for single-curve models only".into(),
                    ))
                }
            };
            let report = check_axioms(ctr, &grid, &positions, DEFAULT_TOLERANCE)?;
            Ok(to_json(&AxiomsReport {
                model: ctr.name().to_string(),
                lambda: if model == ModelArg::Separable {
                    0.0
                } else {
                    lambda
                },
                positions,
                grid,
                all_pass: report.all_pass(),
                axioms: report
                    .results
                    .iter()
                    .map(|r| AxiomRowReport {
                        axiom: r.axiom.to_string(),
                        verdict: r.verdict.to_string(),
                        checks: r.checks,
                        failures: r.failures,
                        witnesses: r
                            .witnesses
                            .iter()
                            .map(|w| WitnessReport {
                                slot: w.slot,
                                varied: w.varied.clone(),
                                qualities: w.qualities.clone(),
                                perturbed: w.perturbed.clone(),
                                positions: w.positions.clone(),
                                values: w.values.clone(),
                            })
                            .collect(),
                    })
                    .collect(),
            }))
        }
        Command::Gen { case, epsilon } => {
            let inst = match case {
                CaseArg::GreedyTight => make_tight_greedy_instance(epsilon)?,
                CaseArg::GreedyVsStandard => make_greedy_vs_standard_instance(epsilon)?,
            };
            Ok(emit_instance(&inst))
        }
        Command::Ratio { file } => {
            let inst = load(&file)?;
            let greedy = greedy_brand_allocate(&inst)?;
            let optimal = optimal_brand_allocate(&inst)?;
            let ids = |a: &Allocation| a.shown().map(str::to_string).collect::<Vec<_>>();
            Ok(to_json(&RatioReport {
                greedy_allocation: ids(&greedy.allocation),
                optimal_allocation: ids(&optimal.allocation),
                greedy_welfare: greedy.welfare,
                optimal_welfare: optimal.welfare,
                ratio: greedy_ratio(&inst)?,
            }))
        }
    }
}

fn write_csv(args: &AllocArgs, report: &RunReport) -> Result<()> {
    if let Some(path) = &args.csv {
        let file = fs::File::create(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot create {}: {e}", path.display()))
        })?;
        write_slot_csv(&report.slots, file)?;
    }
    Ok(())
}

fn conflict(msg: String) -> Error {
    Error::InvalidArgument(format!("conflicting flags: {msg}"))
}

/// A resolved (model, method) pair ready to run.
struct Plan {
    model: Model,
    method: Method,
    policy: ShowPolicy,
}

impl Plan {
    fn new(args: &AllocArgs, inst: &AuctionInstance) -> Result<Self> {
        let is_brand = matches!(inst.positions, Positions::Brand(_));
        let model_arg = args.model.unwrap_or(if is_brand {
            ModelArg::Brand
        } else if inst.params.is_some() || args.lambda.is_some() {
            ModelArg::Externality
        } else {
            ModelArg::Separable
        });
        let method_arg = args.method.unwrap_or(match model_arg {
            ModelArg::Separable => MethodArg::Rank,
            ModelArg::Externality => MethodArg::Bisection,
            ModelArg::Brand => MethodArg::Enumerate,
        });

        let model = match model_arg {
            ModelArg::Separable => {
                if args.lambda.is_some_and(|l| l != 0.0) {
                    return Err(conflict("--lambda needs --model externality".into()));
                }
                Model::Separable
            }
            ModelArg::Externality => {
                let base = inst.params.unwrap_or_default();
                let lambda = args
                    .lambda
                    .or(inst.params.map(|p| p.lambda))
                    .ok_or_else(|| {
                        Error::InvalidArgument(
                            "externality model needs --lambda or params in the instance".into(),
                        )
                    })?;
                let params = ExternalityParams::new(lambda, base.nu);
                if !params.is_valid() {
                    return Err(Error::InvalidArgument(format!(
                        "lambda must be >= 0 (got {lambda})"
                    )));
                }
                Model::Externality(params)
            }
            ModelArg::Brand => {
                if args.lambda.is_some() {
                    return Err(conflict("--lambda does not apply to --model brand".into()));
                }
                Model::Brand
            }
        };

        let method = match method_arg {
            MethodArg::Rank => Method::Rank,
            MethodArg::Bisection => Method::Bisection,
            MethodArg::Brute => Method::Brute,
            MethodArg::Enumerate => Method::Enumerate,
            MethodArg::Greedy => Method::Greedy,
            MethodArg::Fastpath => Method::Fastpath,
        };
        let allowed = match model {
            Model::Brand => matches!(
                method,
                Method::Rank | Method::Enumerate | Method::Greedy | Method::Fastpath
            ),
            _ => matches!(method, Method::Rank | Method::Bisection | Method::Brute),
        };
        if !allowed {
            return Err(conflict(format!("--method {method} with --model {model}")));
        }
        if args.fill_all && matches!(model, Model::Brand) {
            return Err(conflict("--fill-all with --model brand".into()));
        }
        if args.fill_all && method == Method::Rank {
            return Err(conflict("--fill-all with --method rank".into()));
        }
        Ok(Self {
            model,
            method,
            policy: if args.fill_all {
                ShowPolicy::FillAll
            } else {
                ShowPolicy::SkipNegative
            },
        })
    }

    fn lambda(&self) -> f64 {
        match self.model {
            Model::Externality(p) => p.lambda,
            _ => 0.0,
        }
    }

    fn extern_run(&self, inst: &AuctionInstance) -> Result<Option<ExternAllocationResult>> {
        let lambda = self.lambda();
        Ok(match self.method {
            Method::Bisection => Some(bisection_allocate_with(
                inst,
                lambda,
                &BisectionOptions {
                    tol: None,
                    policy: self.policy,
                },
            )?),
            Method::Brute => Some(brute_force_allocate_with(
                inst,
                lambda,
                &BruteForceOptions {
                    policy: self.policy,
                    ..Default::default()
                },
            )?),
            _ => None,
        })
    }

    fn allocate(&self, inst: &AuctionInstance) -> Result<Allocation> {
        if let Some(run) = self.extern_run(inst)? {
            return Ok(run.allocation);
        }
        Ok(match (self.model, self.method) {
            (Model::Brand, Method::Rank) => standard_allocate(inst)?.allocation,
            (Model::Brand, Method::Enumerate) => optimal_brand_allocate(inst)?.allocation,
            (Model::Brand, Method::Greedy) => greedy_brand_allocate(inst)?.allocation,
            (Model::Brand, Method::Fastpath) => brand_last_fastpath(inst)?.allocation,
            // eCPM ranking; every ad has a non-negative score at lambda = 0.
            _ => rank_by_score(inst, 0.0, 0.0)?,
        })
    }

    fn prices(
        &self,
        inst: &AuctionInstance,
        alloc: &Allocation,
        rule: RuleArg,
        tol: f64,
    ) -> Result<PriceSchedule> {
        match rule {
            RuleArg::Maintaining => maintaining_bid_schedule(inst, |x| self.allocate(x), tol),
            RuleArg::Swap => {
                let practical;
                let ctr: &dyn ClickModel = match self.model {
                    Model::Separable => &SeparableCtr,
                    Model::Externality(params) => {
                        practical = PracticalCtr { params };
                        &practical
                    }
                    Model::Brand => return Err(conflict("--rule swap with --model brand".into())),
                };
                adjacent_swap_schedule(alloc, inst, ctr)
            }
        }
    }

    fn report(&self, inst: &AuctionInstance, pricing: Option<(RuleArg, f64)>) -> Result<RunReport> {
        let mut diagnostics = Diagnostics::default();
        let alloc = match self.extern_run(inst)? {
            Some(run) => {
                diagnostics.s_star = Some(run.s_star);
                diagnostics.skipped = run.skipped;
                if let Some(state) = run.state {
                    diagnostics.iterations = Some(state.iterations);
                    diagnostics.bracket = Some(Bracket {
                        initial_lower: state.initial_lower,
                        initial_upper: state.initial_upper,
                        lower: state.lower,
                        upper: state.upper,
                        converged: state.converged,
                    });
                }
                run.allocation
            }
            None => self.allocate(inst)?,
        };
        let report = welfare(&alloc, inst, &self.model)?;
        let schedule = match pricing {
            Some((rule, tol)) => Some(self.prices(inst, &alloc, rule, tol)?),
            None => None,
        };
        let mut slots = Vec::with_capacity(inst.num_slots());
        for (j, &rate) in report.click_rates.iter().enumerate() {
            let ad = alloc
                .get(j)
                .and_then(|id| inst.index_of(id))
                .map(|i| &inst.advertisers[i]);
            if rate > 1.0 {
                diagnostics
                    .warnings
                    .push(format!("click rate {rate} at position {} exceeds 1", j + 1));
            }
            slots.push(SlotRow {
                position: j + 1,
                id: ad.map(|a| a.id.clone()),
                bid: ad.map(|a| a.bid),
                quality: ad.map(|a| a.quality),
                click_rate: rate,
                price: schedule.as_ref().and_then(|s| {
                    s.entries
                        .iter()
                        .find(|e| e.slot == j)
                        .map(|e| e.cost_per_click)
                }),
                contribution: report.per_slot[j],
            });
        }
        Ok(RunReport {
            model: self.model.to_string(),
            method: self.method.to_string(),
            allocation: alloc.shown().map(str::to_string).collect(),
            welfare: report.total,
            pricing_rule: pricing.map(|(rule, _)| match rule {
                RuleArg::Maintaining => PricingRule::MaintainingBid.to_string(),
                RuleArg::Swap => PricingRule::AdjacentSwap.to_string(),
            }),
            slots,
            diagnostics,
        })
    }
}
