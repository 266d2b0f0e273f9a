use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toa_core::experiments::{
    draws_table, fig1_svg, fig1_sweep, fig1_table, moments_table, pdf_table, rows_table,
    sample_stats, sample_summary_table, table1, tabulate_pdf, Fig1Config, RunOptions, ScenarioFile,
};
use toa_core::output::{format_float, Format, Table};
use toa_core::sampling::sample_toa_with;
use toa_core::{
    classify_regime, Execution, GaussianTrajectory, IntegrationConfig, SamplerConfig, ToaDensity,
    ToaError,
};

#[derive(Parser, Debug)]
#[command(
    name = "toa",
    version,
    about = "Arrival-time statistics of a falling Gaussian wave packet"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON scenario file with keys mass_kg, sigma0_m, v0_mps, g_mps2, x_m, hbar_Js.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Run on a single thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Args, Debug, Default)]
struct ScenarioFlags {
    #[arg(long = "mass")]
    mass_kg: Option<f64>,
    #[arg(long = "sigma0")]
    sigma0_m: Option<f64>,
    #[arg(long = "v0")]
    v0_mps: Option<f64>,
    #[arg(long = "g")]
    g_mps2: Option<f64>,
    #[arg(long = "x")]
    x_m: Option<f64>,
    #[arg(long = "hbar")]
    hbar_js: Option<f64>,
}

impl ScenarioFlags {
    fn as_file(&self) -> ScenarioFile {
        ScenarioFile {
            mass_kg: self.mass_kg,
            sigma0_m: self.sigma0_m,
            v0_mps: self.v0_mps,
            g_mps2: self.g_mps2,
            x_m: self.x_m,
            hbar_js: self.hbar_js,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The three hydrogen-1 drop scenarios.
    Table1,
    /// Relative delay against quantumness, swept through the initial width.
    Fig1 {
        #[arg(long, default_value_t = 1e-3)]
        q_min: f64,
        #[arg(long, default_value_t = 1e3)]
        q_max: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Also write a log-log plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Tabulate the arrival-time density on an even grid.
    Pdf {
        #[command(flatten)]
        scenario: ScenarioFlags,
        #[arg(long, default_value_t = 0.0)]
        t_min: f64,
        /// Defaults to three classical arrival times.
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// Mean, spread and delay by quadrature.
    Moments {
        #[command(flatten)]
        scenario: ScenarioFlags,
    },
    /// Seeded Monte Carlo draws of the arrival time.
    Sample {
        #[command(flatten)]
        scenario: ScenarioFlags,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Summary file; stderr when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Quantumness and regime of a scenario.
    Regimes {
        #[command(flatten)]
        scenario: ScenarioFlags,
    },
}

enum Failure {
    Validation(String),
    Convergence(String),
    Io(String),
}

impl From<ToaError> for Failure {
    fn from(e: ToaError) -> Self {
        match e {
            ToaError::NotConverged { .. }
            | ToaError::BracketFailure { .. }
            | ToaError::NonFiniteEvaluation { .. } => Failure::Convergence(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn emit(table: &Table, path: Option<&Path>, format: Format) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, table.render(format))?,
        None => io::stdout()
            .lock()
            .write_all(table.render(format).as_bytes())?,
    }
    Ok(())
}

fn scenario(
    common: &Common,
    flags: &ScenarioFlags,
) -> Result<(toa_core::PhysicalParams, f64), Failure> {
    let base = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            ScenarioFile::from_json(&text)
                .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?
        }
        None => ScenarioFile::default(),
    };
    Ok(base.merged(&flags.as_file()).resolve()?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    let mut integration = IntegrationConfig::default();
    if let Some(tol) = common.tol {
        integration.rel_tol = tol;
    }
    integration.validate()?;
    let execution = if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let out = common.out.as_deref();

    match &cli.command {
        Command::Table1 => {
            let opts = RunOptions {
                integration,
                execution,
                ..RunOptions::default()
            };
            let rows = table1(&opts)?;
            let mut table = rows_table(&rows);
            table.note(
                "delta",
                "primary column from adaptive quadrature; closed forms alongside",
            );
            emit(&table, out, common.format)?;
            if let Some(r) = rows.iter().find(|r| !r.converged) {
                return Err(Failure::Convergence(format!(
                    "{}: normalization check failed",
                    r.label
                )));
            }
        }
        Command::Fig1 {
            q_min,
            q_max,
            points,
            svg,
        } => {
            let cfg = Fig1Config {
                q_min: *q_min,
                q_max: *q_max,
                points: *points,
                ..Fig1Config::default()
            };
            let pts = fig1_sweep(&cfg, &integration, execution)?;
            emit(&fig1_table(&cfg, &pts), out, common.format)?;
            if let Some(path) = svg {
                fs::write(path, fig1_svg(&pts))?;
            }
            let failed = pts.iter().filter(|p| !p.converged).count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} points did not converge", pts.len());
            }
            if failed == pts.len() {
                return Err(Failure::Convergence("no sweep point converged".into()));
            }
        }
        Command::Pdf {
            scenario: flags,
            t_min,
            t_max,
            points,
        } => {
            let (params, x) = scenario(common, flags)?;
            let t_max = match t_max {
                Some(t) => *t,
                None => 3.0 * toa_core::classical_toa(&params, x)?,
            };
            let grid = tabulate_pdf(&params, x, *t_min, t_max, *points)?;
            emit(&pdf_table(&grid), out, common.format)?;
        }
        Command::Moments { scenario: flags } => {
            let (params, x) = scenario(common, flags)?;
            let density = ToaDensity::new(GaussianTrajectory::new(params), x)?;
            let m = density.compute_moments(&integration)?;
            emit(&moments_table(&params, x, &m)?, out, common.format)?;
        }
        Command::Sample {
            scenario: flags,
            n,
            summary,
        } => {
            let (params, x) = scenario(common, flags)?;
            let cfg = SamplerConfig::new(common.seed, *n);
            let batch = sample_toa_with(&params, x, &cfg, execution)?;
            emit(&draws_table(&batch.toas), out, common.format)?;
            let (stats, quad_mean) = sample_stats(&params, x, &integration, &batch)?;
            let table = sample_summary_table(&stats, quad_mean, common.seed);
            match summary {
                Some(p) => fs::write(p, table.render(common.format))?,
                None => io::stderr()
                    .lock()
                    .write_all(table.render(common.format).as_bytes())?,
            }
        }
        Command::Regimes { scenario: flags } => {
            let (params, x) = scenario(common, flags)?;
            let r = classify_regime(&params, x)?;
            let mut table = Table::new(["quantity", "value"]);
            table.push(vec!["q".into(), r.q.into()]);
            table.push(vec!["t_c_s".into(), r.t_c.into()]);
            table.push(vec!["tau_s".into(), params.tau().into()]);
            table.push(vec!["tc_over_tau".into(), (r.t_c / params.tau()).into()]);
            table.push(vec!["regime".into(), r.regime.as_str().into()]);
            table.push(vec![
                "delta_semiclassical".into(),
                r.delta_semiclassical.into(),
            ]);
            table.push(vec!["delta_quantum".into(), r.delta_quantum.into()]);
            table.note("g_mps2", format_float(params.g()));
            emit(&table, out, common.format)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Convergence(m)) => {
            eprintln!("convergence failure: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(1)
        }
    }
}
