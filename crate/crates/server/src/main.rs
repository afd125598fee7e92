use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, Subcommand};

use gazelink::commands;
use gazelink::server::{serve, ServeOptions};
use gazelink_core::layout::LayoutMode;
use gazelink_core::relay::{DEFAULT_CAPACITY, DEFAULT_TICK_MS};

#[derive(Parser)]
#[command(version, about = "Gaze-awareness relay server and tools")]
struct Cli {
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the WebSocket relay.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = DEFAULT_TICK_MS)]
        tick_ms: u64,
        /// Maximum participants per session.
        #[arg(long, default_value_t = DEFAULT_CAPACITY)]
        capacity: usize,
        /// Directory for per-session logs.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Attach to a running server as host and record a session.
    Record {
        #[arg(long, default_value = "ws://127.0.0.1:8080")]
        url: String,
        #[arg(long)]
        session: String,
        #[arg(long)]
        out: PathBuf,
        /// Stop after this many seconds instead of waiting for Ctrl-C.
        #[arg(long)]
        duration_s: Option<f64>,
    },
    /// Re-render a recorded session for one viewer as JSON lines.
    Replay {
        #[arg(long)]
        viewer: String,
        /// baseline, dir or perspective.
        #[arg(long, default_value = "dir")]
        mode: LayoutMode,
        log: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Attention matrix and mutual-gaze episodes as CSV.
    Metrics {
        #[arg(long)]
        attention: bool,
        #[arg(long)]
        mutual: bool,
        log: PathBuf,
    },
    /// Simulation harness.
    Sim {
        #[command(subcommand)]
        command: SimCommand,
    },
}

#[derive(Subcommand)]
enum SimCommand {
    /// Run a scenario file.
    Run {
        scenario: PathBuf,
        /// Report file; printed to stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the simulated session log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    env_logger::Builder::new().filter_level(cli.log_level).init();
    match cli.command {
        Command::Serve {
            port,
            tick_ms,
            capacity,
            record,
        } => {
            anyhow::ensure!(tick_ms > 0, "--tick-ms must be positive");
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
                let opts = ServeOptions {
                    tick_ms,
                    capacity,
                    record_dir: record,
                };
                tokio::select! {
                    r = serve(listener, opts) => r,
                    _ = tokio::signal::ctrl_c() => Ok(()),
                }
            })
        }
        Command::Record {
            url,
            session,
            out,
            duration_s,
        } => {
            let rt = tokio::runtime::Runtime::new()?;
            let n = rt.block_on(gazelink::record::record(
                &url,
                &session,
                &out,
                duration_s.map(Duration::from_secs_f64),
            ))?;
            log::info!("wrote {n} records to {}", out.display());
            Ok(())
        }
        Command::Replay { viewer, mode, log, out } => {
            let n = match out {
                Some(path) => commands::replay_to(&log, &viewer, mode, std::io::BufWriter::new(std::fs::File::create(path)?))?,
                None => commands::replay_to(&log, &viewer, mode, std::io::stdout().lock())?,
            };
            log::info!("{n} frames");
            Ok(())
        }
        Command::Metrics { attention, mutual, log } => {
            std::io::stdout().write_all(commands::metrics_csv(&log, attention, mutual)?.as_bytes())?;
            Ok(())
        }
        Command::Sim {
            command: SimCommand::Run { scenario, report, log },
        } => {
            let r = commands::sim_run(&scenario, report.as_deref(), log.as_deref())?;
            if report.is_none() {
                println!("{}", serde_json::to_string_pretty(&r)?);
            }
            eprintln!(
                "mean accuracy {:.4}, min {:.4}, max convergence {} ticks, {} of {} messages dropped",
                r.mean_accuracy,
                r.min_accuracy,
                r.max_convergence_ticks.map_or("n/a".into(), |c| format!("{c:.2}")),
                r.messages_dropped,
                r.messages_sent
            );
            Ok(())
        }
    }
}
