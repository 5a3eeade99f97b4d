use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use graphene_cp::config::{OneOrMany, RunConfig};
use graphene_cp::report::{self, ModelSelector, RECIPES};
use graphene_cp::Result;

#[derive(Parser)]
#[command(name = "graphene-cp", version, about = "Casimir-Polder free energy of atoms near graphene")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the free energy over a grid and write CSV or JSON records.
    Run(RunArgs),
    /// Ratio |F_a| / |F_b| from previously written records.
    Ratio(RatioArgs),
    /// List built-in recipes and atoms.
    List {
        #[arg(long)]
        atoms_file: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in figure recipe (fig2 ... fig6c).
    #[arg(long)]
    recipe: Option<String>,
    /// Atom name; repeat for several.
    #[arg(long)]
    atom: Vec<String>,
    /// TOML file with extra `[[atom]]` definitions.
    #[arg(long)]
    atoms_file: Option<PathBuf>,
    /// hydrodynamic or dirac; repeat for several.
    #[arg(long)]
    model: Vec<String>,
    /// full, prescription or zero-t; repeat for several.
    #[arg(long)]
    operator_mode: Vec<String>,
    /// Gap in eV; repeat for several.
    #[arg(long)]
    delta_ev: Vec<f64>,
    #[arg(long)]
    vf_ratio: Option<f64>,
    /// Hydrodynamic wavenumber, 1/m.
    #[arg(long)]
    k_wavenumber: Option<f64>,
    #[arg(long)]
    temperature_k: Option<f64>,
    #[arg(long)]
    separation_m: Option<f64>,
    /// variable:min:max:count:spacing, e.g. separation:5e-8:5e-6:20:log
    #[arg(long)]
    sweep: Option<String>,
    /// Relative accuracy target for each free energy.
    #[arg(long)]
    tol: Option<f64>,
    /// Also compute the T = 0 energy and the relative thermal correction.
    #[arg(long)]
    thermal_correction: bool,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct RatioArgs {
    /// Records written by `run`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "He*")]
    atom: String,
    /// Numerator model, e.g. hydrodynamic or dirac:prescription:0
    #[arg(long)]
    numerator: ModelSelector,
    #[arg(long)]
    denominator: ModelSelector,
    /// Separations in m, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    separations: Vec<f64>,
}

fn many<T>(v: Vec<T>) -> Option<OneOrMany<T>> {
    (!v.is_empty()).then_some(OneOrMany::Many(v))
}

fn run(args: RunArgs) -> Result<bool> {
    let base = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let flags = RunConfig {
        recipe: args.recipe,
        atom: many(args.atom),
        atoms_file: args.atoms_file,
        model: many(args.model),
        operator_mode: many(args.operator_mode),
        delta_ev: many(args.delta_ev),
        vf_ratio: args.vf_ratio,
        k_wavenumber: args.k_wavenumber,
        temperature_k: args.temperature_k,
        separation_m: args.separation_m,
        sweep: args.sweep,
        tol: args.tol,
        thermal_correction: args.thermal_correction.then_some(true),
        format: args.format,
        out: args.out,
        workers: args.workers,
    };
    let cfg = base.merged(flags);
    let spec = cfg.sweep_spec()?;
    let format = cfg.output_format()?;
    log::info!("{} points on {} worker(s)", spec.len(), cfg.workers());
    let records = report::run_sweep(&spec, cfg.workers())?;
    match &cfg.out {
        Some(path) => report::write_records(&records, format, BufWriter::new(File::create(path)?))?,
        None => report::write_records(&records, format, io::stdout().lock())?,
    }
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        log::error!("{failed} of {} points failed", records.len());
    }
    Ok(failed == 0)
}

fn ratio(args: RatioArgs) -> Result<bool> {
    let file = File::open(&args.input)?;
    let records = if args.input.extension().is_some_and(|e| e == "json") {
        report::read_json(file)?
    } else {
        report::read_csv(file)?
    };
    let rows = report::ratio_report(&records, &args.atom, &args.numerator, &args.denominator, &args.separations)?;
    let mut out = io::stdout().lock();
    writeln!(out, "separation_m,ratio")?;
    for r in rows {
        writeln!(out, "{:.16e},{:.16e}", r.separation_m, r.ratio)?;
    }
    Ok(true)
}

fn list(atoms_file: Option<PathBuf>) -> Result<bool> {
    let cfg = RunConfig {
        atoms_file,
        ..Default::default()
    };
    let table = cfg.atom_table()?;
    println!("recipes: {}", RECIPES.join(", "));
    for name in table.names() {
        let a = table.get(&name)?;
        println!("{name}: alpha0 = {:e} m^3, omega0 = {:e} rad/s", a.alpha0, a.omega0);
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Ratio(args) => ratio(args),
        Command::List { atoms_file } => list(atoms_file),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
