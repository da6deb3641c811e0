//! Command-line driver: run a case, compare the with/without-flexibility
//! variants, export the compiled model for an external solver, import its
//! solution, and emit figure-ready CSV data.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flexgrid_core::bilevel::{compile, CompiledModel};
use flexgrid_core::milp::{export_model, import_solution, MilpOptions, SolveStatus};
use flexgrid_core::model::{load_case, CaseInput, SolverMode};
use flexgrid_core::report::{
    build_report, compare_cases, emit_plot_data, run_case, CaseReport, SolveSource,
};
use flexgrid_core::scenario::{load_scenarios, ScenarioSet};
use flexgrid_core::CoreError;

#[derive(Parser)]
#[command(name = "flexgrid", about = "Distribution-company scheduling with microgrid markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case and print its report.
    Run(RunArgs),
    /// Solve the baseline and the flexibility variant, print the deltas.
    Compare(CompareArgs),
    /// Write the compiled model as an LP-format file.
    ExportModel(ExportArgs),
    /// Re-verify an external solution and print the report it implies.
    ImportSolution(ImportArgs),
    /// Solve (or import) and write the per-figure CSV files.
    EmitPlots(EmitPlotsArgs),
    /// Property sweep over seeded random cases: the flexibility run may
    /// never out-earn its own relaxation.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct CaseArgs {
    /// Dataset directory (case.cfg, buses.dat, ...).
    #[arg(long)]
    data: PathBuf,
    /// Scenario file; defaults to scenarios.dat in the dataset directory.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    /// Force the ramp-penalty mechanism on.
    #[arg(long, conflicts_with = "no_flex")]
    flex: bool,
    /// Force the ramp-penalty mechanism off.
    #[arg(long)]
    no_flex: bool,
    /// Override the slack-side complementarity constant.
    #[arg(long)]
    big_m_primal: Option<f64>,
    /// Override the dual-side complementarity constant.
    #[arg(long)]
    big_m_dual: Option<f64>,
    /// Override the loss-linearization segment count.
    #[arg(long)]
    pwl_segments: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    /// Branch-and-bound node budget.
    #[arg(long, default_value_t = 200_000)]
    node_limit: u64,
    /// Absolute optimality gap.
    #[arg(long, default_value_t = 1e-6)]
    abs_gap: f64,
    /// Relative optimality gap (0 disables).
    #[arg(long, default_value_t = 0.0)]
    rel_gap: f64,
    /// Skip the fixed-price warm start.
    #[arg(long)]
    no_warm_start: bool,
    /// Use this external solution instead of the embedded solver.
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Solve embedded even when the case prefers export.
    #[arg(long)]
    embedded: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[command(flatten)]
    solve: SolveArgs,
    /// Also write the CSV plot data here.
    #[arg(long)]
    plots: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[command(flatten)]
    solve: SolveArgs,
    /// External solution for the baseline (no-flexibility) model.
    #[arg(long)]
    solution_baseline: Option<PathBuf>,
    /// External solution for the flexibility model.
    #[arg(long)]
    solution_flex: Option<PathBuf>,
    /// Write both reports' plot data and the comparison table here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Output model file.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct ImportArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Solution file (`name value` lines).
    #[arg(long)]
    solution: PathBuf,
    /// Also write the CSV plot data here.
    #[arg(long)]
    plots: Option<PathBuf>,
}

#[derive(Args)]
struct EmitPlotsArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[command(flatten)]
    solve: SolveArgs,
    /// Output directory for the CSV files.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelftestArgs {
    /// RNG seed for the first generated case.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of random cases.
    #[arg(long, default_value_t = 20)]
    count: u64,
    /// Horizon of the generated cases.
    #[arg(long, default_value_t = 2)]
    horizon: usize,
}

/// 0 ok / 1 input error / 2 solver limit / 3 internal invariant failure.
fn error_code(e: &CoreError) -> u8 {
    match e {
        CoreError::Parse(_) | CoreError::Validation(_) | CoreError::Reference(_)
        | CoreError::Io(_) | CoreError::Model(_) => 1,
        CoreError::Solver(m) => {
            if m.contains("differs from") {
                3
            } else {
                2
            }
        }
    }
}

fn load(case_args: &CaseArgs) -> Result<(CaseInput, ScenarioSet), CoreError> {
    let mut case = load_case(&case_args.data)?;
    if case_args.flex {
        case.config.flexibility_enabled = true;
    }
    if case_args.no_flex {
        case.config.flexibility_enabled = false;
    }
    if let Some(m) = case_args.big_m_primal {
        case.config.big_m_primal = Some(m);
    }
    if let Some(m) = case_args.big_m_dual {
        case.config.big_m_dual = Some(m);
    }
    if let Some(k) = case_args.pwl_segments {
        case.config.pwl_segments = k;
    }
    case.config.validate()?;
    let scen_path = case_args
        .scenarios
        .clone()
        .unwrap_or_else(|| case_args.data.join("scenarios.dat"));
    let scen = load_scenarios(&scen_path, case.config.horizon_t)?;
    Ok((case, scen))
}

fn milp_options(solve: &SolveArgs) -> MilpOptions {
    MilpOptions {
        abs_gap: solve.abs_gap,
        rel_gap: solve.rel_gap,
        node_limit: solve.node_limit,
        incumbent_hint: None,
    }
}

fn solve_one(
    case: &CaseInput,
    scen: &ScenarioSet,
    solve: &SolveArgs,
    solution: Option<&Path>,
) -> Result<CaseReport, CoreError> {
    if let Some(path) = solution {
        let cm = compile(case, scen)?;
        let sol = import_solution(&cm.milp, path)?;
        return build_report(case, scen, &cm, &sol);
    }
    if case.config.solver_mode == SolverMode::Export && !solve.embedded {
        return Err(CoreError::Validation(
            "this case is configured for an external solver; pass --solution <file>, \
             or --embedded to force the built-in kernel"
                .into(),
        ));
    }
    run_case(
        case,
        scen,
        SolveSource::Embedded {
            options: milp_options(solve),
            warm_start: !solve.no_warm_start,
        },
    )
}

fn report_exit(report: &CaseReport) -> ExitCode {
    if report.status == SolveStatus::Limit {
        eprintln!("warning: solver budget exhausted; report built from the best incumbent");
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn compiled(case: &CaseInput, scen: &ScenarioSet) -> Result<CompiledModel, CoreError> {
    compile(case, scen)
}

fn run(cli: Cli) -> Result<ExitCode, CoreError> {
    match cli.command {
        Command::Run(args) => {
            let (case, scen) = load(&args.case)?;
            let report = solve_one(&case, &scen, &args.solve, args.solve.solution.as_deref())?;
            print!("{}", report.summary_text());
            if let Some(dir) = &args.plots {
                emit_plot_data(&report, dir)?;
                println!("plot data written to {}", dir.display());
            }
            Ok(report_exit(&report))
        }
        Command::Compare(args) => {
            let (case, scen) = load(&args.case)?;
            let mut baseline_case = case.clone();
            baseline_case.config.flexibility_enabled = false;
            let mut flex_case = case;
            flex_case.config.flexibility_enabled = true;
            let baseline = solve_one(
                &baseline_case,
                &scen,
                &args.solve,
                args.solution_baseline.as_deref(),
            )?;
            let flex = solve_one(&flex_case, &scen, &args.solve, args.solution_flex.as_deref())?;
            let cmp = compare_cases(&baseline, &flex)?;
            print!("{}", cmp.to_text());
            if let Some(dir) = &args.out {
                emit_plot_data(&baseline, &dir.join("baseline"))?;
                emit_plot_data(&flex, &dir.join("flex"))?;
                std::fs::write(dir.join("comparison.csv"), cmp.to_text())
                    .map_err(|e| CoreError::Io(format!("writing comparison: {e}")))?;
            }
            if baseline.status == SolveStatus::Limit || flex.status == SolveStatus::Limit {
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::ExportModel(args) => {
            let (case, scen) = load(&args.case)?;
            let cm = compiled(&case, &scen)?;
            export_model(&cm.milp, &args.out)?;
            println!(
                "wrote {} ({} columns, {} rows, {} binaries)",
                args.out.display(),
                cm.milp.n_cols(),
                cm.milp.n_rows(),
                cm.milp.n_binaries()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::ImportSolution(args) => {
            let (case, scen) = load(&args.case)?;
            let cm = compiled(&case, &scen)?;
            let sol = import_solution(&cm.milp, &args.solution)?;
            let report = build_report(&case, &scen, &cm, &sol)?;
            print!("{}", report.summary_text());
            if let Some(dir) = &args.plots {
                emit_plot_data(&report, dir)?;
            }
            Ok(report_exit(&report))
        }
        Command::EmitPlots(args) => {
            let (case, scen) = load(&args.case)?;
            let report = solve_one(&case, &scen, &args.solve, args.solve.solution.as_deref())?;
            let files = emit_plot_data(&report, &args.out)?;
            println!("wrote {} files to {}", files.len(), args.out.display());
            Ok(report_exit(&report))
        }
        Command::Selftest(args) => {
            selftest(&args)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Random single-bus cases: solving with the penalty active must never beat
/// the same case without it.
fn selftest(args: &SelftestArgs) -> Result<(), CoreError> {
    use flexgrid_core::model::{
        Bus, CaseConfig, MarketData, NetworkModel,
    };
    use flexgrid_core::synthetic::random_microgrid;

    let t = args.horizon;
    for i in 0..args.count {
        let seed = args.seed + i;
        let mg = {
            let mut mg = random_microgrid(seed, t);
            mg.attached_bus = 1;
            mg
        };
        let network = NetworkModel::new(
            vec![Bus {
                id: 1,
                v_min: 11.5,
                v_max: 13.5,
                base_load_profile: vec![0.0; t],
                has_mg: true,
                has_dg: false,
                has_pv: false,
            }],
            vec![],
            vec![],
            vec![],
        )?;
        let wem = 20.0 + (seed % 7) as f64;
        let case = CaseInput {
            network,
            microgrids: vec![mg],
            market: MarketData {
                wem_price: vec![wem; t],
                penalty_price: vec![1.4 * wem; t],
                retail_price: vec![1.2 * wem; t],
                disco_il_bid: vec![45.0; t],
                lem_price_cap: 60.0,
                wem_purchase_cap: 20.0,
                disco_il_cap: 1.0,
            },
            config: CaseConfig {
                horizon_t: t,
                flexibility_enabled: false,
                initial_purchase: Some(0.0),
                ..CaseConfig::default()
            },
        };
        let scen = ScenarioSet::deterministic(t);
        let base = run_case(&case, &scen, SolveSource::default())?;
        let mut flex_case = case.clone();
        flex_case.config.flexibility_enabled = true;
        let flex = run_case(&flex_case, &scen, SolveSource::default())?;
        if flex.profit > base.profit + 1e-6 {
            return Err(CoreError::Solver(format!(
                "seed {seed}: flexibility profit {} differs from allowed bound {}",
                flex.profit, base.profit
            )));
        }
        println!(
            "seed {seed}: baseline {:.4}, flex {:.4} ok",
            base.profit, flex.profit
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
