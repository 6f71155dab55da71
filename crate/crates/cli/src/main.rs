//! `hsqd`: lattice conversion, LUCJ sampling, band-gap runs and plot tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hsqd_core::lucj_sim::{build_state, sample, write_samples, DEFAULT_STATE_CAP};
use hsqd_core::model::{
    electronic_to_lattice, load_lattice, map_to_electronic, read_fcidump, save_lattice, write_fcidump,
    OnSiteConvention,
};
use hsqd_core::reference::{
    external_amplitudes, lucj_from_t2, mp2_doubles, solve_mean_field, ConnectivityMask, MeanFieldOptions,
    T2Amplitudes,
};
use hsqd_core::workflow::{
    apply_mode, load_config, parse_sweep_csv, run_workflow, sector_specs, write_outputs, InteractionMode, Sector,
    Solver, WorkflowOutput,
};
use hsqd_core::{Error, ErrorCategory};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "hsqd", version, about = "Band gaps of extended-Hubbard lattices from subspace diagonalization")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "HSQD_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between lattice JSON and FCIDUMP. The direction follows the
    /// input extension: `.json` is read as a lattice, anything else as FCIDUMP.
    Convert(ConvertArgs),
    /// Build the LUCJ state for one sector and write sampled bitstrings.
    Sample(SampleArgs),
    /// Run the three-sector band-gap workflow from a TOML config.
    Run(RunArgs),
    /// Merge sweep CSVs into one long table of errors against a reference solver.
    Plotdata(PlotArgs),
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    output: PathBuf,
    /// Map the on-site term with coefficient 2U.
    #[arg(long)]
    literal_2u: bool,
    /// NELEC written to the FCIDUMP header; defaults to half filling.
    #[arg(long)]
    nelec: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SectorArg {
    Minus,
    Neutral,
    Plus,
}

impl From<SectorArg> for Sector {
    fn from(s: SectorArg) -> Self {
        match s {
            SectorArg::Minus => Sector::Minus,
            SectorArg::Neutral => Sector::Neutral,
            SectorArg::Plus => Sector::Plus,
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    /// Lattice JSON file.
    #[arg(long)]
    lattice: PathBuf,
    /// Electron count of the neutral sector.
    #[arg(long)]
    n_electrons: usize,
    #[arg(long, value_enum, default_value = "neutral")]
    sector: SectorArg,
    #[arg(long, default_value_t = 2_500_000, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    layers: usize,
    /// `mp2`, `zero`, or a path to an amplitude JSON file.
    #[arg(long, default_value = "mp2")]
    amplitudes: String,
    #[arg(long, default_value = "U+V")]
    mode: InteractionMode,
    #[arg(long)]
    literal_2u: bool,
    #[arg(long)]
    spin_flip: bool,
    /// Output sample file.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Replace the configured solver list (comma separated).
    #[arg(long, value_delimiter = ',')]
    solver: Option<Vec<Solver>>,
    #[arg(long)]
    mode: Option<InteractionMode>,
    /// Replace the configured fraction list (comma separated).
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    /// Replace the Ext-SQD probability threshold.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory holding `<solver>_<sector>.csv` files.
    dir: PathBuf,
    /// Solver whose final energy per sector is the reference.
    #[arg(long, default_value = "hci")]
    reference: Solver,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(e.category()),
            message: e.to_string(),
        }
    }
}

fn exit_code(c: ErrorCategory) -> u8 {
    match c {
        ErrorCategory::Input => 2,
        ErrorCategory::ResourceCap => 3,
        ErrorCategory::NonConvergence => 4,
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Convert(a) => convert(a),
        Command::Sample(a) => sample_cmd(a),
        Command::Run(a) => run(a),
        Command::Plotdata(a) => plotdata(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn convention(literal_2u: bool) -> OnSiteConvention {
    if literal_2u {
        OnSiteConvention::Literal2U
    } else {
        OnSiteConvention::Hamiltonian
    }
}

fn convert(a: ConvertArgs) -> Result<(), Failure> {
    let conv = convention(a.literal_2u);
    let from_json = a.input.extension().is_some_and(|e| e == "json");
    let ints = if from_json {
        let lat = load_lattice(&a.input)?;
        let ints = map_to_electronic(&lat, conv)?;
        write_fcidump(&ints, a.nelec.unwrap_or(lat.n_orbitals()), 0, &a.output)?;
        ints
    } else {
        let (ints, _) = read_fcidump(&a.input)?;
        let lat = electronic_to_lattice(&ints, conv)?;
        save_lattice(&lat, &a.output)?;
        ints
    };
    let one_body = ints.one_body().iter().filter(|x| **x != 0.0).count();
    println!(
        "M={} one_body_nnz={} two_body_nnz={} -> {}",
        ints.n_orbitals(),
        one_body,
        ints.opposite_spin().count_nonzero(),
        a.output.display()
    );
    Ok(())
}

fn sample_cmd(a: SampleArgs) -> Result<(), Failure> {
    let lat = apply_mode(&load_lattice(&a.lattice)?, a.mode);
    let ints = map_to_electronic(&lat, convention(a.literal_2u))?;
    let m = lat.n_orbitals();
    let specs = sector_specs(m, a.n_electrons, a.spin_flip)?;
    let spec = specs[Sector::from(a.sector).index()];
    if spec.dimension() > DEFAULT_STATE_CAP {
        return Err(Error::CapExceeded {
            what: "statevector sector",
            size: spec.dimension(),
            cap: DEFAULT_STATE_CAP,
        }
        .into());
    }
    let neutral = solve_mean_field(&ints, specs[1], &MeanFieldOptions::default())?;
    let t2 = match a.amplitudes.as_str() {
        "mp2" => mp2_doubles(&neutral, &neutral.mo_integrals(&ints)?)?.t2,
        "zero" => T2Amplitudes::zeros(m, specs[1].n_alpha.min(m)),
        path => external_amplitudes(path)?,
    };
    if t2.n_orbitals() != m {
        return Err(input_error(format!(
            "amplitudes cover {} orbitals, lattice has {m}",
            t2.n_orbitals()
        )));
    }
    let params = lucj_from_t2(&t2, a.layers, &ConnectivityMask::local(m))?;
    let mf = neutral.for_sector(&ints, spec)?;
    let state = build_state(&params, &mf.reference, spec, DEFAULT_STATE_CAP)?;
    let samples = sample(&state, a.shots, a.seed)?;
    write_samples(&samples, m, &a.out)?;
    println!(
        "sector {} ({} alpha, {} beta): {} distinct of {} shots -> {}",
        Sector::from(a.sector),
        spec.n_alpha,
        spec.n_beta,
        samples.len(),
        samples.shots,
        a.out.display()
    );
    Ok(())
}

fn sha256_file(path: &Path) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::from(Error::io(path, e)))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Serialize)]
struct EffectiveInteractions {
    u_intra: Vec<f64>,
    v_inter: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a hsqd_core::workflow::WorkflowConfig,
    inputs: BTreeMap<String, String>,
    seeds: &'a BTreeMap<Sector, u64>,
    effective_interactions: EffectiveInteractions,
    timings: &'a [hsqd_core::workflow::StageTiming],
    started_at: String,
    finished_at: String,
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let mut cfg = load_config(&a.config)?;
    if let Some(s) = a.solver {
        cfg.solvers = s;
    }
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    if let Some(f) = a.fractions {
        cfg.fractions = f;
    }
    if let Some(t) = a.threshold {
        cfg.extsqd_threshold = t;
    }
    if let Some(d) = a.out_dir {
        cfg.out_dir = d;
    }
    cfg.validate()?;

    let mut inputs = BTreeMap::new();
    for p in [Some(&a.config), Some(&cfg.lattice_path)]
        .into_iter()
        .chain([&cfg.samples_minus, &cfg.samples_neutral, &cfg.samples_plus].map(Option::as_ref))
        .flatten()
    {
        inputs.insert(p.display().to_string(), sha256_file(p)?);
    }

    let output: WorkflowOutput = run_workflow(&cfg)?;
    write_outputs(&output, &cfg.out_dir)?;
    let lat = &output.lattice;
    let manifest = RunManifest {
        tool: "hsqd",
        version: env!("CARGO_PKG_VERSION"),
        config: &cfg,
        inputs,
        seeds: &output.report.settings.sector_seeds,
        effective_interactions: EffectiveInteractions {
            u_intra: lat.u_intra().to_vec(),
            v_inter: lat.v_inter().row_iter().map(|r| r.iter().copied().collect()).collect(),
        },
        timings: &output.timings,
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
    };
    let path = cfg.out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json + "\n").map_err(|e| Failure::from(Error::io(&path, e)))?;

    for (solver, gap) in &output.report.gaps {
        println!("{solver:>7}  gap = {gap:.9} eV");
    }
    if let Some(g) = output.report.tight_binding_gap {
        println!("     tb  gap = {g:.9} eV");
    }
    if output.succeeded() {
        return Ok(());
    }
    let code = output.failure_categories.iter().map(|c| exit_code(*c)).max().unwrap_or(2);
    let causes: Vec<String> = output.report.failures.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    Err(Failure {
        code,
        message: format!("solver failures:\n  {}", causes.join("\n  ")),
    })
}

fn plotdata(a: PlotArgs) -> Result<(), Failure> {
    let entries = std::fs::read_dir(&a.dir).map_err(|e| Failure::from(Error::io(&a.dir, e)))?;
    let mut names: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    names.sort();
    let mut tables: BTreeMap<(Solver, Sector), Vec<hsqd_core::workflow::SweepRow>> = BTreeMap::new();
    for path in names {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let Some((solver, sector)) = stem.split_once('_') else {
            continue;
        };
        let Ok(solver) = solver.parse::<Solver>() else {
            continue;
        };
        let sector: Sector = sector
            .parse()
            .map_err(|_| input_error(format!("{}: unknown sector label {sector:?}", path.display())))?;
        let text = std::fs::read_to_string(&path).map_err(|e| Failure::from(Error::io(&path, e)))?;
        tables.insert((solver, sector), parse_sweep_csv(&text, &path.display().to_string())?);
    }
    if tables.is_empty() {
        return Err(input_error(format!("no sweep tables in {}", a.dir.display())));
    }
    let mut reference = BTreeMap::new();
    for ((solver, sector), rows) in &tables {
        if *solver == a.reference {
            if let Some(last) = rows.last() {
                reference.insert(*sector, last.energy);
            }
        }
    }
    if reference.is_empty() {
        return Err(input_error(format!("reference solver {} has no tables", a.reference)));
    }
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| Failure::from(Error::io(p, e)))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| input_error(format!("writing plot table: {e}"));
    w.write_record(["solver", "sector", "fraction", "d", "energy", "reference_energy", "error"])
        .map_err(io)?;
    for ((solver, sector), rows) in &tables {
        let Some(&e_ref) = reference.get(sector) else {
            return Err(input_error(format!(
                "sector {sector} has {solver} data but no {} reference",
                a.reference
            )));
        };
        for r in rows {
            w.write_record([
                solver.to_string(),
                sector.to_string(),
                r.fraction.to_string(),
                r.dimension.to_string(),
                format!("{:.12}", r.energy),
                format!("{e_ref:.9}"),
                format!("{:.12}", r.energy - e_ref),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| input_error(format!("writing plot table: {e}")))?;
    Ok(())
}
