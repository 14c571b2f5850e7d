use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use prepblock::construct::{
    egd_design, linked_block, modify, parse_edit_script, square_lattice, EgdSpec,
};
use prepblock::criteria::{criteria_report, k_thresholds};
use prepblock::enumerate::{best_binary, Criterion};
use prepblock::model::{BlockDesign, FullDesignSpec};
use prepblock::oracle::check_spec;
use prepblock::reports::reproduce;

#[derive(Parser)]
#[command(
    name = "prepblock",
    version,
    about = "Partially replicated block designs: construction, efficiency bounds, verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a subdesign and write it as a .blocks file
    Construct {
        #[command(subcommand)]
        family: Family,
    },
    /// Evaluate criteria and bounds for the full design at block size k
    Eval(EvalArgs),
    /// Efficiency thresholds across a range of block sizes
    Katable(KatableArgs),
    /// Cross-check the closed-form criteria against the brute-force oracle
    Check(CheckArgs),
    /// Exhaustively search binary subdesigns for given (u, b)
    Enumerate(EnumerateArgs),
    /// Rebuild an embedded reference table and compare row by row
    Reproduce(ReproduceArgs),
}

#[derive(Subcommand)]
enum Family {
    /// Dual of lambda copies of all pairs of b points
    LinkedBlock {
        #[arg(long)]
        lambda: usize,
        #[arg(long)]
        b: usize,
        /// Output file (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// All one-dimensional-slice pairs of an m1 x ... x mp hyper-rectangle
    Egd {
        /// Comma-separated dimensions, e.g. 7,3
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        m: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rows and columns of an n x n array of n^2 treatments
    SquareLattice {
        #[arg(long)]
        n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Transpose the treatment/block roles of an existing design
    DualOf {
        #[arg(long)]
        design: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply a line-oriented edit script to an existing design
    ModifyScript {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    k: usize,
    /// Comma-separated subset of a, mv, a1, a2 (default: all)
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<String>,
    /// Enumerated minimum MV value of competing duals, for the sharper bound
    #[arg(long)]
    mv_min: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct KatableArgs {
    #[arg(long)]
    design: PathBuf,
    /// Efficiency levels for the threshold row
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.90, 0.95, 0.98])]
    alphas: Vec<f64>,
    /// Largest block size considered
    #[arg(long, default_value_t = 20)]
    cap: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    k: usize,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    b: usize,
    #[arg(long)]
    u: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "a")]
    criterion: Criterion,
    /// Also tabulate the optimum at these block sizes
    #[arg(long, value_delimiter = ',')]
    all_k: Vec<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    /// One of table1, table2, table3, tableA1, examples
    #[arg(long)]
    what: String,
    /// Directory of .blocks files for rows based on external catalog designs
    #[arg(long)]
    designs: Option<PathBuf>,
    /// Sidecar path for the JSON report (default reproduce-<what>.json)
    #[arg(long)]
    json_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Construct { family } => construct_cmd(family)?,
        Command::Eval(args) => eval_cmd(args)?,
        Command::Katable(args) => katable_cmd(args)?,
        Command::Check(args) => return check_cmd(args),
        Command::Enumerate(args) => enumerate_cmd(args)?,
        Command::Reproduce(args) => reproduce_cmd(args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn load_design(path: &Path) -> anyhow::Result<BlockDesign> {
    let text = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    Ok(BlockDesign::parse(&text)?)
}

fn emit_design(d: &BlockDesign, output: Option<&Path>) -> anyhow::Result<()> {
    let text = d.to_blocks_string();
    match output {
        Some(path) => {
            fs::write(path, &text)
                .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
            eprintln!(
                "wrote {} ({} treatments, {} blocks)",
                path.display(),
                d.num_treatments(),
                d.num_blocks()
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn construct_cmd(family: Family) -> anyhow::Result<()> {
    let (design, output) = match family {
        Family::LinkedBlock { lambda, b, output } => (linked_block(lambda, b)?, output),
        Family::Egd { m, output } => (egd_design(&EgdSpec::new(m)?), output),
        Family::SquareLattice { n, output } => (square_lattice(n)?, output),
        Family::DualOf { design, output } => (load_design(&design)?.dual(), output),
        Family::ModifyScript {
            design,
            script,
            output,
        } => {
            let base = load_design(&design)?;
            let text = fs::read_to_string(&script)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", script.display()))?;
            (modify(&base, &parse_edit_script(&text)?)?, output)
        }
    };
    emit_design(&design, output.as_deref())
}

fn eval_cmd(args: EvalArgs) -> anyhow::Result<()> {
    let allowed = ["a", "mv", "a1", "a2"];
    let mut wanted = BTreeSet::new();
    for name in &args.criteria {
        let name = name.to_ascii_lowercase();
        if !allowed.contains(&name.as_str()) {
            anyhow::bail!("unknown criterion '{name}' (expected a, mv, a1 or a2)");
        }
        wanted.insert(name);
    }
    let all = wanted.is_empty() || wanted.len() == allowed.len();

    let d = load_design(&args.design)?;
    let spec = FullDesignSpec::new(d, args.k)?;
    let report = criteria_report(&spec, args.mv_min)?;

    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    if all {
        println!("{report}");
        return Ok(());
    }
    println!(
        "design: u = {}, b = {}, k = {}, w = {}, v = {}, f = {:.2}",
        report.u, report.b, report.k, report.w, report.v, report.f
    );
    if wanted.contains("a") {
        println!(
            "A:  total = {:.4} (UU {:.4} + WW {:.4} + UW {:.4})",
            report.a_total, report.a_uu, report.a_ww, report.a_uw
        );
        println!(
            "    bound = {:.4}, efficiency = {:.3}",
            report.a_bound, report.a_eff
        );
    }
    if wanted.contains("mv") {
        let opt = |x: Option<f64>| match x {
            Some(v) => format!("{v:.4}"),
            None => "undefined".to_string(),
        };
        println!(
            "MV: total = {:.4} (UU {:.4}, WW {}, UW {})",
            report.mv_total,
            report.mv_uu,
            opt(report.mv_ww),
            opt(report.mv_uw)
        );
        let eff = match report.mv_eff {
            Some(e) => format!("{e:.3}"),
            None => format!("needs k >= {}", report.k_star),
        };
        let sharper = match report.mv_bound_b {
            Some(b) => format!(" (with enumeration: {b:.4})"),
            None => String::new(),
        };
        println!(
            "    bound = {:.4}{sharper}, efficiency = {eff}",
            report.mv_bound_a
        );
    }
    if wanted.contains("a1") {
        println!("A1 (raw, no design-independent bound): {:.4}", report.a_ww);
    }
    if wanted.contains("a2") {
        println!(
            "A2: total = {:.4}, bound = {:.4}, efficiency = {:.3}",
            report.a2_sum, report.a2_bound, report.a2_eff
        );
    }
    Ok(())
}

fn katable_cmd(args: KatableArgs) -> anyhow::Result<()> {
    let d = load_design(&args.design)?;
    let table = k_thresholds(&d, &args.alphas, args.cap)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&table)?);
    } else {
        println!("{table}");
    }
    Ok(())
}

fn check_cmd(args: CheckArgs) -> anyhow::Result<ExitCode> {
    let d = load_design(&args.design)?;
    let spec = FullDesignSpec::new(d, args.k)?;
    let report = check_spec(&spec)?;
    println!(
        "max pairwise-variance discrepancy: {:.3e}",
        report.max_variance_discrepancy
    );
    println!(
        "A total: formula {:.6} vs oracle {:.6} (component gap {:.3e})",
        report.a_total_formula, report.a_total_oracle, report.a_component_discrepancy
    );
    println!(
        "MV total: formula {:.6} vs oracle {:.6}",
        report.mv_total_formula, report.mv_total_oracle
    );
    if report.ok {
        println!("ok: all discrepancies within 1e-6");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("FAILED: discrepancy exceeds 1e-6");
        Ok(ExitCode::FAILURE)
    }
}

fn enumerate_cmd(args: EnumerateArgs) -> anyhow::Result<()> {
    let result = best_binary(args.u, args.b, args.k, args.criterion)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&result)?);
        return Ok(());
    }
    println!(
        "u = {}, b = {}, k = {}, criterion = {}",
        result.u, result.b, result.k, result.criterion
    );
    println!(
        "classes: {} examined, {} feasible at this k",
        result.classes_examined, result.feasible
    );
    println!("optimum: {:.6}", result.optimum);
    println!(
        "optimizers ({}):",
        result.optimizers.len()
    );
    for d in &result.optimizers {
        let blocks: Vec<String> = d
            .blocks()
            .iter()
            .map(|blk| {
                let inner: Vec<String> = blk.iter().map(|t| t.to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect();
        println!("  {}", blocks.join(" "));
    }
    if !args.all_k.is_empty() {
        println!("criterion across k:");
        for &k in &args.all_k {
            match best_binary(args.u, args.b, k, args.criterion) {
                Ok(r) => println!(
                    "  k = {:>3}: optimum {:.6} ({} optimizers)",
                    k,
                    r.optimum,
                    r.optimizers.len()
                ),
                Err(e) => println!("  k = {k:>3}: {e}"),
            }
        }
    }
    Ok(())
}

fn reproduce_cmd(args: ReproduceArgs) -> anyhow::Result<()> {
    let report = reproduce(&args.what, args.designs.as_deref())?;
    println!("{report}");
    let sidecar = args
        .json_out
        .unwrap_or_else(|| PathBuf::from(format!("reproduce-{}.json", report.what)));
    fs::write(&sidecar, serde_json::to_string_pretty(&report)?)
        .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", sidecar.display()))?;
    eprintln!("json sidecar: {}", sidecar.display());
    Ok(())
}
