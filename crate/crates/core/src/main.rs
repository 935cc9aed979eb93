use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ecoroute::io::{read_config, read_links_csv, read_routes_json, read_segments_csv, write_links_csv};
use ecoroute::preprocess::build_graph;
use ecoroute::report::compare;
use ecoroute::routing::{build_crptc_milp, cdf_route_hybrid_lp, crptc_route_milp, shortest_time_path};
use ecoroute::{Error, NodeId, Result, VehicleEnergyParams};

#[derive(Parser)]
#[command(name = "ecoroute", version, about = "Energy-optimal routing for plug-in hybrid vehicles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct VehicleArgs {
    /// Vehicle config file (key=value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Initial battery energy in kWh; overrides the config.
    #[arg(long)]
    battery: Option<f64>,
}

impl VehicleArgs {
    fn params(&self) -> Result<VehicleEnergyParams> {
        let mut params = match &self.config {
            Some(path) => read_config(path)?,
            None => VehicleEnergyParams::default(),
        };
        if let Some(e) = self.battery {
            params.e_init = e;
        }
        params.validate()?;
        Ok(params)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Crptc,
    Cdf,
    Mintime,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one route and write it as JSON.
    Route {
        #[arg(long)]
        links: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long)]
        origin: u32,
        #[arg(long)]
        dest: u32,
        #[command(flatten)]
        vehicle: VehicleArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the CRPTC MILP instance as a plain-text tableau.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Run every algorithm and write a comparison report plus plot data.
    Compare {
        #[arg(long)]
        links: PathBuf,
        #[arg(long)]
        origin: Option<u32>,
        #[arg(long)]
        dest: Option<u32>,
        #[command(flatten)]
        vehicle: VehicleArgs,
        /// Observed route distributions (JSON).
        #[arg(long)]
        routes: Option<PathBuf>,
        /// Report JSON; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Long-format plot CSV; defaults to `<out>.plot.csv` when --out is given.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Build a links CSV from per-segment speed records.
    Preprocess {
        #[arg(long)]
        segments: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Report JSON; defaults to `<out>.report.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            serde_json::to_writer_pretty(&mut w, value)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            serde_json::to_writer_pretty(&mut lock, value)?;
            lock.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Route {
            links,
            algo,
            origin,
            dest,
            vehicle,
            out,
            dump_lp,
        } => {
            let graph = read_links_csv(&links)?;
            let params = vehicle.params()?;
            let (origin, dest) = (NodeId(origin), NodeId(dest));
            if let Some(path) = dump_lp {
                let model = build_crptc_milp(&graph, &params, origin, dest)?;
                std::fs::write(path, model.problem.to_string())?;
            }
            let solution = match algo {
                Algo::Crptc => crptc_route_milp(&graph, &params, origin, dest)?,
                Algo::Cdf => cdf_route_hybrid_lp(&graph, &params, origin, dest)?,
                Algo::Mintime => shortest_time_path(&graph, &params, origin, dest)?,
            };
            write_json(&solution, out.as_deref())
        }
        Command::Compare {
            links,
            origin,
            dest,
            vehicle,
            routes,
            out,
            plot,
        } => {
            let graph = read_links_csv(&links)?;
            let params = vehicle.params()?;
            let observed = match routes {
                Some(path) => read_routes_json(&path)?,
                None => Vec::new(),
            };
            let mut pairs = Vec::new();
            match (origin, dest) {
                (Some(o), Some(d)) => pairs.push((NodeId(o), NodeId(d))),
                (None, None) => {}
                _ => {
                    return Err(Error::InvalidParameter(
                        "--origin and --dest must be given together".into(),
                    ))
                }
            }
            for d in &observed {
                if !pairs.contains(&(d.origin, d.dest)) {
                    pairs.push((d.origin, d.dest));
                }
            }
            if pairs.is_empty() {
                return Err(Error::InvalidParameter(
                    "no origin-destination pair: pass --origin/--dest or --routes".into(),
                ));
            }
            let report = compare(&graph, &params, &pairs, &observed)?;
            write_json(&report, out.as_deref())?;
            let plot = plot.or_else(|| out.as_deref().map(|o| sibling(o, ".plot.csv")));
            if let Some(path) = plot {
                report.write_plot_csv(BufWriter::new(File::create(path)?))?;
            }
            Ok(())
        }
        Command::Preprocess {
            segments,
            out,
            report,
        } => {
            let records = read_segments_csv(&segments)?;
            let (graph, summary) = build_graph(&records)?;
            write_links_csv(&graph, BufWriter::new(File::create(&out)?))?;
            let report = report.unwrap_or_else(|| sibling(&out, ".report.json"));
            write_json(&summary, Some(&report))?;
            log::info!(
                "{} links written, {} fictitious nodes added",
                summary.links_out,
                summary.fictitious_nodes_added
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_infeasible() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
