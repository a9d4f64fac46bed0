//! `znd`: run, tabulate and verify ZND piston scenarios.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad input, 3 numerical
//! failure, 4 i/o error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use znd_core::output::{front_table, history_table, locus_table, norms_table, snapshots_table, Layout, VERSION};
use znd_core::suite::{run_suite, SuiteOptions};
use znd_core::{config_hash, parse_scenario, run, Error, ScenarioConfig, Thresholds, TimeSeries};

#[derive(Parser)]
#[command(name = "znd", version, about = "Front-tracking lab for the ZND piston problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write its tables.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the Hugoniot locus of the scenario's upstream state.
    LocusTable {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Run the verification suite derived from the scenario.
    Verify {
        #[command(flatten)]
        common: Common,
        /// JSON file overriding individual thresholds.
        #[arg(long)]
        thresholds: Option<PathBuf>,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run the scenario for several amplitudes concurrently.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    scenario: PathBuf,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Whitespace-separated `.dat` tables instead of CSV.
    #[arg(long)]
    plot_data: bool,
    #[arg(long, env = "ZND_OUTPUT_DIR", default_value = "znd-output")]
    output_dir: PathBuf,
}

impl Common {
    fn layout(&self) -> Layout {
        if self.plot_data {
            Layout::Plot
        } else {
            Layout::Csv
        }
    }

    fn extension(&self) -> &'static str {
        if self.plot_data {
            "dat"
        } else {
            "csv"
        }
    }

    /// Loads the scenario and applies command-line overrides, returning them for the footers.
    fn load(&self) -> Result<(ScenarioConfig, Vec<(&'static str, String)>), Error> {
        let mut cfg = parse_scenario(&self.scenario)?;
        let mut overrides = Vec::new();
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
            overrides.push(("override.epsilon", e.to_string()));
        }
        if let Some(n) = self.cells {
            cfg.n_cells = n;
            overrides.push(("override.n_cells", n.to_string()));
        }
        if let Some(t) = self.t_end {
            cfg.t_end = t;
            overrides.push(("override.t_end", t.to_string()));
        }
        cfg.validate()?;
        Ok((cfg, overrides))
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<String, Error> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
    Ok(name.to_string())
}

fn write_manifest(
    dir: &Path,
    command: &str,
    cfg: &ScenarioConfig,
    overrides: &[(&str, String)],
    files: &[String],
) -> Result<(), Error> {
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let manifest = json!({
        "command": command,
        "version": VERSION,
        "config_hash": config_hash(cfg),
        "overrides": overrides.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "files": files,
        "created_unix": created,
    });
    write_file(dir, "manifest.json", &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    Ok(())
}

fn write_run(dir: &Path, series: &TimeSeries, layout: Layout, ext: &str, extra: &[(&str, String)]) -> Result<Vec<String>, Error> {
    let mut files = vec![
        write_file(dir, &format!("snapshots.{ext}"), &snapshots_table(series, layout, extra))?,
        write_file(dir, &format!("history.{ext}"), &history_table(series, layout, extra))?,
        write_file(dir, &format!("norms.{ext}"), &norms_table(series, layout, extra))?,
        write_file(dir, &format!("front.{ext}"), &front_table(series, layout, extra))?,
    ];
    let summary = json!({
        "summary": series.summary,
        "steps": series.steps,
        "tracers": series.tracers,
        "warnings": series.warnings,
    });
    files.push(write_file(dir, "summary.json", &serde_json::to_string_pretty(&summary).expect("summary serializes"))?);
    Ok(files)
}

/// Keeps the last accepted state of an aborted run next to the error.
fn save_abort(dir: &Path, err: &Error) {
    if let Error::Aborted { snapshot, .. } = err {
        if let Ok(text) = serde_json::to_string_pretty(snapshot) {
            if write_file(dir, "aborted_snapshot.json", &text).is_ok() {
                eprintln!("last accepted state written to {}", dir.join("aborted_snapshot.json").display());
            }
        }
    }
}

fn cmd_run(common: &Common) -> Result<ExitCode, Error> {
    let (cfg, overrides) = common.load()?;
    let dir = &common.output_dir;
    let series = run(cfg.clone()).inspect_err(|e| save_abort(dir, e))?;
    let files = write_run(dir, &series, common.layout(), common.extension(), &overrides)?;
    write_manifest(dir, "run", &cfg, &overrides, &files)?;
    let last = series.history.last().expect("a finished run has history");
    println!(
        "t = {}  chi = {:.10}  chi' = {:.10}  steps = {}  -> {}",
        last.t,
        last.chi,
        last.chi_prime,
        series.steps,
        dir.display()
    );
    for w in &series.warnings {
        eprintln!("warning: {w}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_locus(common: &Common, count: usize) -> Result<ExitCode, Error> {
    let (cfg, overrides) = common.load()?;
    let up = cfg.upstream()?;
    let table = locus_table(&cfg, &up, count, common.layout())?;
    let name = write_file(&common.output_dir, &format!("locus.{}", common.extension()), &table)?;
    write_manifest(&common.output_dir, "locus-table", &cfg, &overrides, &[name])?;
    print!("{table}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(common: &Common, thresholds: Option<&Path>, as_json: bool) -> Result<ExitCode, Error> {
    let (cfg, overrides) = common.load()?;
    let th: Thresholds = match thresholds {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config { field: "thresholds".into(), message: format!("{}: {e}", path.display()) })?
        }
        None => Thresholds::default(),
    };
    let report = run_suite(&cfg, &th, &SuiteOptions::default())?;
    let name = write_file(&common.output_dir, "report.json", &report.to_json())?;
    write_manifest(&common.output_dir, "verify", &cfg, &overrides, &[name])?;
    if as_json {
        println!("{}", report.to_json());
    } else {
        println!("{}\n", report.preamble);
        print!("{}", report.table());
    }
    Ok(if report.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_sweep(common: &Common, epsilons: &[f64]) -> Result<ExitCode, Error> {
    let (base, overrides) = common.load()?;
    let configs: Vec<ScenarioConfig> = epsilons
        .iter()
        .map(|&e| {
            let mut c = base.clone();
            c.epsilon = e;
            c.validate().map(|_| c)
        })
        .collect::<Result<_, _>>()?;
    let results: Vec<Result<TimeSeries, Error>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run(c.clone()))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Domain("sweep worker panicked".into()))))
            .collect()
    });
    let mut files = Vec::new();
    let mut summary = String::from("epsilon,sup_phi,sup_chi_dev,c_phi,c_chi\n");
    for (eps, res) in epsilons.iter().zip(results) {
        let sub = common.output_dir.join(format!("eps_{eps}"));
        let series = res.inspect_err(|e| save_abort(&sub, e))?;
        let mut extra = overrides.clone();
        extra.push(("sweep.epsilon", eps.to_string()));
        for f in write_run(&sub, &series, common.layout(), common.extension(), &extra)? {
            files.push(format!("eps_{eps}/{f}"));
        }
        let phi = series.norms.iter().map(|n| n.phi_c0).fold(0.0, f64::max);
        let chi = series.norms.iter().map(|n| n.chi_dev).fold(0.0, f64::max);
        let _ = writeln!(summary, "{eps},{phi},{chi},{},{}", phi / eps, chi / eps);
    }
    files.push(write_file(&common.output_dir, "sweep.csv", &summary)?);
    write_manifest(&common.output_dir, "sweep", &base, &overrides, &files)?;
    print!("{summary}");
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &Error) -> ExitCode {
    match err {
        Error::Io(_) => ExitCode::from(4),
        e if e.is_configuration() => ExitCode::from(2),
        _ => ExitCode::from(3),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { common } => cmd_run(common),
        Command::LocusTable { common, count } => cmd_locus(common, *count),
        Command::Verify { common, thresholds, json } => cmd_verify(common, thresholds.as_deref(), *json),
        Command::Sweep { common, epsilons } => cmd_sweep(common, epsilons),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
