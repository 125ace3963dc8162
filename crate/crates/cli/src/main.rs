//! `lossav`: exact analysis of robust solution concepts from the command line.
//!
//! Exit codes: 0 success, 2 parse error, 3 invalid input, 4 capacity
//! exceeded, 5 failed check or internal consistency violation.

mod commands;
mod inputs;
mod report;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use loss_aversion::battery::Budget;
use loss_aversion::concepts::Concept;
use loss_aversion::scalar::rat;
use loss_aversion::vcg::PaymentRule;
use loss_aversion::Exact;

use commands::{TheoremParams, VotingRule};
use inputs::{exact, CliError, CliResult};
use report::{Format, Report};

pub const DEFAULT_SEED: u64 = 7;

pub fn default_facility_step() -> Exact {
    rat(1, 20)
}

#[derive(Parser)]
#[command(name = "lossav", version, about = "Loss-averse and robust solution concepts, computed exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Output rendering.
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
    /// Add rounded columns with this many decimals next to exact numbers (display only).
    #[arg(long = "decimal", global = true, value_name = "DIGITS")]
    decimal: Option<usize>,
    /// Also write the report and its canonical documents into this directory.
    #[arg(long, global = true, env = "LOSSAV_OUT_DIR", value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate solution concepts on a game.
    Analyze {
        /// Game document (`lossav/game`).
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        curated: Option<String>,
        /// Comma-separated concept names; all concepts when omitted.
        #[arg(long, value_delimiter = ',')]
        concepts: Vec<String>,
        /// Also check every inclusion between concepts.
        #[arg(long)]
        hierarchy: bool,
    },
    /// Single-item auctions.
    #[command(subcommand)]
    Auction(AuctionCommand),
    /// Combinatorial VCG with Sybil bids.
    #[command(subcommand)]
    Vcg(VcgCommand),
    /// Facility location by the mean of reports.
    Facility {
        #[arg(long)]
        agents: usize,
        #[arg(long, value_parser = exact)]
        theta: Exact,
        /// Report and tally grid step.
        #[arg(long, value_parser = exact)]
        delta: Option<Exact>,
        /// Include the all-agents welfare-loss example.
        #[arg(long)]
        welfare_loss: bool,
    },
    /// Positional scoring rules from one voter's point of view.
    Voting {
        #[arg(long, value_enum)]
        rule: VotingRule,
        /// Comma-separated, non-increasing candidate utilities.
        #[arg(long, value_delimiter = ',', value_parser = exact, required = true)]
        utilities: Vec<Exact>,
        #[arg(long)]
        tally_cap: Option<u32>,
    },
    /// Run every acceptance check.
    VerifyAll {
        #[arg(long, default_value = "tiny")]
        budget: Budget,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Print the canonical document for a curated name or an input file.
    Export {
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        curated: Option<String>,
        /// Epsilon for curated auctions.
        #[arg(long, value_parser = exact)]
        epsilon: Option<Exact>,
    },
    /// Run a scenario document (`lossav/scenario`).
    Run { file: PathBuf },
}

#[derive(Subcommand)]
enum AuctionCommand {
    /// Discrete first-price auction on the epsilon grid.
    Dfpa(AuctionArgs),
    /// All-pay auction on the same grid.
    Allpay(AuctionArgs),
    /// Deviation refuting a bid in the continuous first-price auction.
    FpaWitness {
        #[arg(long, value_parser = exact)]
        value: Exact,
        #[arg(long, value_parser = exact)]
        bid: Exact,
    },
    /// Revenue when every bidder plays the loss-averse bid.
    Revenue {
        #[arg(long, value_delimiter = ',', value_parser = exact, required = true)]
        values: Vec<Exact>,
        #[arg(long, value_parser = exact)]
        epsilon: Exact,
    },
}

#[derive(Args)]
struct AuctionArgs {
    #[arg(long, value_parser = exact)]
    value: Exact,
    #[arg(long, value_parser = exact)]
    epsilon: Exact,
    /// Largest competing bid; defaults to value + 2 epsilon.
    #[arg(long, value_parser = exact)]
    cap: Option<Exact>,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance document (`lossav/vcg-instance`).
    file: Option<PathBuf>,
    #[arg(long, conflicts_with = "file")]
    curated: Option<String>,
    /// Epsilon for curated instances (default 1/10).
    #[arg(long, value_parser = exact)]
    epsilon: Option<Exact>,
}

#[derive(Subcommand)]
enum VcgCommand {
    /// Allocation, payments and welfare.
    Run {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long, default_value = "clarke")]
        payment_rule: PaymentRule,
        /// Replace every bid by the bidder's valuation.
        #[arg(long)]
        truthful: bool,
    },
    /// Classify each agent's bids against its valuation.
    Classify {
        #[command(flatten)]
        input: InstanceArgs,
    },
    /// Nature bid certifying that one agent's Sybil bids are not loss-averse.
    Adversary {
        #[command(flatten)]
        input: InstanceArgs,
        /// Agent name; the first agent when omitted.
        #[arg(long)]
        agent: Option<String>,
        #[arg(long, default_value = "clarke")]
        payment_rule: PaymentRule,
        /// Largest nature bid per bundle in the searched family.
        #[arg(long, value_parser = exact)]
        cap: Option<Exact>,
    },
    /// Check every enumerated single-agent attack.
    VerifyTheorem {
        #[arg(long, default_value_t = 2)]
        items: usize,
        #[arg(long, value_parser = exact, default_value = "1")]
        epsilon: Exact,
        #[arg(long, value_parser = exact, default_value = "2")]
        cap: Exact,
        #[arg(long, default_value_t = 2)]
        sybils: usize,
        #[arg(long, default_value = "clarke")]
        payment_rule: PaymentRule,
        /// Skip valuations or bids that are not monotone.
        #[arg(long)]
        monotone_only: bool,
    },
}

fn concepts(names: &[String]) -> CliResult<Vec<Concept>> {
    if names.is_empty() {
        return Ok(Concept::ALL.to_vec());
    }
    Ok(names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?)
}

fn vcg(cmd: &VcgCommand) -> CliResult<Report> {
    let load = |a: &InstanceArgs| inputs::instance(a.file.as_deref(), a.curated.as_deref(), a.epsilon.as_ref());
    Ok(match cmd {
        VcgCommand::Run {
            input,
            payment_rule,
            truthful,
        } => {
            let mut inst = load(input)?;
            if *truthful {
                inst = inst.truthful();
            }
            let flags = if input.curated.as_deref() == Some("example-e1") && !truthful {
                commands::e1_flags(&inst.epsilon)?
            } else {
                Vec::new()
            };
            commands::vcg_run(&inst, *payment_rule, &flags)?
        }
        VcgCommand::Classify { input } => commands::vcg_classify(&load(input)?)?,
        VcgCommand::Adversary {
            input,
            agent,
            payment_rule,
            cap,
        } => {
            let inst = load(input)?;
            let name = agent.clone().unwrap_or_else(|| inst.agents[0].name.clone());
            commands::vcg_adversary(&inst, &name, *payment_rule, cap.as_ref())?
        }
        VcgCommand::VerifyTheorem {
            items,
            epsilon,
            cap,
            sybils,
            payment_rule,
            monotone_only,
        } => commands::vcg_verify_theorem(&TheoremParams {
            items: *items,
            epsilon: epsilon.clone(),
            cap: cap.clone(),
            sybils: *sybils,
            rule: *payment_rule,
            monotone_only: *monotone_only,
        })?,
    })
}

fn export(file: Option<&Path>, curated: Option<&str>, epsilon: Option<&Exact>, out: Option<&Path>) -> CliResult<i32> {
    let (name, text) = match (file, curated) {
        (Some(p), None) => {
            let stem = p.file_stem().map_or("export".into(), |s| s.to_string_lossy().into_owned());
            (stem, inputs::canonical(&inputs::read(p)?)?)
        }
        (None, Some(n)) if loss_aversion::curated::CURATED_AUCTIONS.contains(&n) => {
            let eps = epsilon.cloned().unwrap_or_else(inputs::default_epsilon);
            (n.to_string(), inputs::curated_instance(n, &eps)?.to_json())
        }
        (None, Some(n)) => (n.to_string(), loss_aversion::format::game_to_json(&inputs::curated(n)?)),
        _ => {
            return Err(loss_aversion::Error::Parameter("give exactly one of a file or --curated NAME".into()).into())
        }
    };
    print!("{text}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(dir.join(format!("{name}.json")), &text))
            .map_err(|e| CliError::Io(format!("cannot write to {}: {e}", dir.display())))?;
    }
    Ok(0)
}

fn execute(cli: &Cli) -> CliResult<i32> {
    let report = match &cli.command {
        Command::Analyze {
            file,
            curated,
            concepts: names,
            hierarchy,
        } => {
            let game = inputs::game(file.as_deref(), curated.as_deref())?;
            commands::analyze(&game, &concepts(names)?, *hierarchy)?
        }
        Command::Auction(a) => match a {
            AuctionCommand::Dfpa(x) => commands::dfpa(&x.value, &x.epsilon, x.cap.as_ref())?,
            AuctionCommand::Allpay(x) => commands::all_pay(&x.value, &x.epsilon, x.cap.as_ref())?,
            AuctionCommand::FpaWitness { value, bid } => commands::fpa_witness(value, bid)?,
            AuctionCommand::Revenue { values, epsilon } => commands::revenue(values, epsilon)?,
        },
        Command::Vcg(v) => vcg(v)?,
        Command::Facility {
            agents,
            theta,
            delta,
            welfare_loss,
        } => {
            let step = delta.clone().unwrap_or_else(default_facility_step);
            commands::facility(*agents, theta, &step, *welfare_loss)?
        }
        Command::Voting {
            rule,
            utilities,
            tally_cap,
        } => commands::voting(*rule, utilities, *tally_cap)?,
        Command::VerifyAll { budget, seed } => commands::verify_all(*budget, *seed),
        Command::Export { file, curated, epsilon } => {
            return export(file.as_deref(), curated.as_deref(), epsilon.as_ref(), cli.output.out.as_deref())
        }
        Command::Run { file } => scenario::run(&inputs::read(file)?)?,
    };
    let o = &cli.output;
    print!("{}", report.render(o.format, o.decimal));
    if let Some(dir) = &o.out {
        report
            .write_to(dir, o.format, o.decimal)
            .map_err(|e| CliError::Io(format!("cannot write to {}: {e}", dir.display())))?;
    }
    Ok(report.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
