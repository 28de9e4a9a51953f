use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use raqr::config::{load_with_overrides, parse_document, parse_override, ConfigSet, FrequencyConvention};
use raqr::experiments::{emit_plotdata, run_scenario, ScenarioName, Table};
use raqr::optimizer::{
    alternate, default_specs, initial_state, joint_detuning_refined, joint_report, Axis, Objective, Parameter,
    SweepSpec, DEFAULT_BUDGET,
};
use raqr::validation::{derivative_check, headline, oracle_equivalence, Headline};
use raqr::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_SCENARIO: u8 = 3;

#[derive(Parser)]
#[command(name = "raqr", version, about = "Rydberg atomic receiver scenarios, optimizer and checks")]
struct Cli {
    /// Worker threads for sweep points (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Config file; the built-in preset when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario and write its CSV.
    Run {
        #[arg(long)]
        scenario: String,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write `<scenario>__<curve>.dat` files into this directory.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        /// Seed for stochastic paths.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Alternating parameter optimization.
    Optimize {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// SNR_PSL_DIOD, SNR_PSL_BCOD or SNR_TOTAL.
        #[arg(long, default_value = "SNR_PSL_BCOD")]
        objective: String,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// Grid override `PARAM=lower:upper:step` in display units
        /// (Uy dBV/m, P0 µW, Delta_* MHz), repeatable.
        #[arg(long, value_name = "PARAM=LO:HI:STEP")]
        grid: Vec<String>,
        /// Also run the joint detuning search and compare it with
        /// independent sweeps and with zero detuning.
        #[arg(long)]
        joint: bool,
        /// Trace CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Oracle checks plus headline figures under both frequency readings.
    Validate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// List scenario names.
    Scenarios,
}

enum Failure {
    Config(String),
    Scenario(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(c) => Failure::Config(c.to_string()),
            other => Failure::Scenario(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Scenario(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_SCENARIO)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run { scenario, cfg, out, plot_dir, seed } => run(&scenario, &cfg, out, plot_dir, seed),
        Command::Optimize { cfg, objective, rounds, grid, joint, out } => {
            optimize(&cfg, &objective, rounds, &grid, joint, out)
        }
        Command::Validate { cfg, points, seed } => validate(&cfg, points, seed),
        Command::Scenarios => {
            for s in ScenarioName::ALL {
                println!("{}", s.name());
            }
            Ok(())
        }
    }
}

/// Builds the config: scenario defaults, then the file, then `--set`.
fn load(args: &ConfigArgs, defaults: &[(&str, &str)]) -> Result<ConfigSet, Failure> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?,
        None => "preset = table1\n".to_string(),
    };
    let given = parse_document(&text).map_err(|e| Failure::Config(e.to_string()))?;
    let mut overrides: Vec<(String, String)> = defaults
        .iter()
        .filter(|(k, _)| !given.iter().any(|a| a.key == *k))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    for s in &args.set {
        overrides.push(parse_override(s).map_err(|e| Failure::Config(e.to_string()))?);
    }
    load_with_overrides(&text, &overrides).map_err(|e| Failure::Config(e.to_string()))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Scenario(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(name: &str, args: &ConfigArgs, out: Option<PathBuf>, plot_dir: Option<PathBuf>, _seed: u64) -> Result<(), Failure> {
    let scenario = ScenarioName::parse(name).ok_or_else(|| {
        let known: Vec<&str> = ScenarioName::ALL.iter().map(|s| s.name()).collect();
        Failure::Scenario(format!("unknown scenario `{name}` (known: {})", known.join(", ")))
    })?;
    let cfg = load(args, scenario.base_overrides())?;
    let table = run_scenario(scenario, &cfg)?;
    write_out(out.as_deref(), &table.to_csv()?)?;
    if let Some(dir) = plot_dir {
        for p in emit_plotdata(scenario.name(), &table, &dir)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn parse_grid(s: &str, objective: Objective) -> Result<SweepSpec, Failure> {
    let bad = || Failure::Config(format!("grid `{s}`: expected PARAM=lower:upper:step"));
    let (name, range) = s.split_once('=').ok_or_else(bad)?;
    let parameter = Parameter::parse(name.trim()).ok_or_else(|| Failure::Config(format!("unknown parameter `{name}`")))?;
    let parts: Vec<f64> = range.split(':').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [lo, hi, step] = parts[..] else { return Err(bad()) };
    SweepSpec::new(parameter, lo, hi, step, objective).map_err(|e| Failure::Config(e.to_string()))
}

fn optimize(
    args: &ConfigArgs,
    objective: &str,
    rounds: usize,
    grids: &[String],
    joint: bool,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let objective =
        Objective::parse(objective).ok_or_else(|| Failure::Config(format!("unknown objective `{objective}`")))?;
    let cfg = load(args, &[])?;
    let mut specs = default_specs(objective);
    for g in grids {
        let spec = parse_grid(g, objective)?;
        let slot = specs.iter_mut().find(|s| s.parameter == spec.parameter).expect("every parameter has a default");
        *slot = spec;
    }
    let scheme = objective.scheme(&cfg);
    let start = initial_state(&cfg, scheme);
    let trace = alternate(&specs, &start, rounds)?;

    let mut t = Table::new(&["round", "step", "value_display", "objective_db", "kept_incumbent", "grid_points"]);
    println!("objective {} ({}), start {:.3} dB", objective.name(), scheme.name(), trace.initial_value);
    for (i, s) in trace.steps.iter().enumerate() {
        let p = s.sweep.spec.parameter;
        println!(
            "round {} {:<8} = {:>10.4} {:<6} -> {:.3} dB{}{}",
            s.round,
            p.name(),
            s.chosen,
            p.unit(),
            s.value,
            if s.kept_incumbent { " (kept incumbent)" } else { "" },
            if s.sweep.warnings.is_empty() { String::new() } else { format!(" {:?}", s.sweep.warnings) },
        );
        t.rows.push(vec![s.round as f64, i as f64, s.chosen, s.value, s.kept_incumbent as u8 as f64, s.sweep.grid.len() as f64]);
    }
    if let Some(p) = out.as_deref() {
        write_out(Some(p), &t.to_csv()?)?;
    }

    if joint {
        let tuned = &trace.final_config;
        let axis = |p: Parameter| specs.iter().find(|s| s.parameter == p).map(|s| Axis::new(s.lower, s.upper, s.step)).unwrap();
        let fine = [axis(Parameter::DeltaP), axis(Parameter::DeltaC), axis(Parameter::DeltaL)];
        let coarse = fine.map(|a| Axis::new(a.lower, a.upper, 0.1));
        let base = raqr::optimizer::with_detunings_mhz(tuned, scheme, [0.0; 3]);
        let j = joint_detuning_refined(coarse, &base, objective, 3, 5.0, DEFAULT_BUDGET)?;
        let report = joint_report(&base, objective, fine, j)?;
        let a = report.joint.argmax;
        println!(
            "joint detunings {{{:.4}, {:.4}, {:.4}}} MHz -> {:.3} dB ({} points)",
            a[0], a[1], a[2], report.joint.value, report.joint.points
        );
        println!("improvement over best independent sweep: {:.3} dB", report.improvement_over_independent());
        println!("improvement over zero detuning: {:.3} dB", report.improvement_over_zero());
    }
    Ok(())
}

fn print_headline(h: &Headline) {
    println!("  [{}]", h.convention.name());
    println!("    PSL gain over BS       {:8.2} dB   (target 27)", h.psl_gain_bs);
    println!("    SQL gain over BS       {:8.2} dB   (target 40)", h.sql_gain_bs);
    println!("    BCOD total over BS     {:8.2} dB   (target 26.7)", h.bcod_total_gain_bs);
    println!("    BCOD total over UE     {:8.2} dB   (target 35.2)", h.bcod_total_gain_ue);
    println!("    sensitivity SQL        {:8.2} pV/cm/√Hz (target 18)", h.sensitivity_sql * 1e12);
    println!("    sensitivity PSL        {:8.2} pV/cm/√Hz (target 86)", h.sensitivity_psl * 1e12);
    println!("    sensitivity BS         {:8.3} nV/cm/√Hz (target 1.8)", h.sensitivity_bs * 1e9);
    println!("    sensitivity UE         {:8.3} nV/cm/√Hz (target 4.88)", h.sensitivity_ue * 1e9);
}

fn validate(args: &ConfigArgs, points: usize, seed: u64) -> Result<(), Failure> {
    let cfg = load(args, &[])?;
    let oracle = oracle_equivalence(&cfg, points, seed)?;
    let deriv = derivative_check(&cfg, points.div_ceil(2), seed)?;
    let ok_oracle = oracle.max_rel_error <= 1e-8 && oracle.all_physical;
    let ok_deriv = deriv.max_rel_error <= 1e-6;
    println!(
        "closed form vs master equation: {} points, max rel error {:.2e}, physical {} [{}]",
        oracle.points,
        oracle.max_rel_error,
        oracle.all_physical,
        if ok_oracle { "ok" } else { "FAIL" }
    );
    println!(
        "analytic vs finite-difference derivative: {} points, max rel error {:.2e} [{}]",
        deriv.points,
        deriv.max_rel_error,
        if ok_deriv { "ok" } else { "FAIL" }
    );

    println!("headline figures at N0 = 5e10 cm^-3:");
    let mut rows = Vec::new();
    for conv in [FrequencyConvention::Angular, FrequencyConvention::Ordinary] {
        let text = format!("frequency_convention = {}\npreset = table1\n", conv.name());
        let c = load_with_overrides(&text, &[]).map_err(|e| Failure::Config(e.to_string()))?;
        let h = headline(&c)?;
        print_headline(&h);
        rows.push(h);
    }
    let (a, o) = (&rows[0], &rows[1]);
    println!("  reading discrepancy (ordinary − angular):");
    println!("    PSL gain {:+.2} dB, SQL gain {:+.2} dB, BCOD total {:+.2} dB", o.psl_gain_bs - a.psl_gain_bs, o.sql_gain_bs - a.sql_gain_bs, o.bcod_total_gain_bs - a.bcod_total_gain_bs);
    println!("    SQL sensitivity ×{:.3}, PSL sensitivity ×{:.3}", o.sensitivity_sql / a.sensitivity_sql, o.sensitivity_psl / a.sensitivity_psl);

    if ok_oracle && ok_deriv {
        Ok(())
    } else {
        Err(Failure::Scenario("oracle checks failed".into()))
    }
}
