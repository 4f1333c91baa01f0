use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use motion_risk::config::{SessionConfig, CONFIG_ENV};
use motion_risk::error::read_text;
use motion_risk::motion::{parse_motion, serialize_mocap_text, serialize_pose_interchange, Motion, MotionFormat};
use motion_risk::pipeline::Analysis;
use motion_risk::report;
use motion_risk::service::{self, AppState, FormatName, ServiceConfig};
use motion_risk::stream::StreamSet;

#[derive(Parser)]
#[command(
    name = "motion-risk",
    version,
    about = "Joint-angle, joint-load and injury-risk analysis of pose sequences"
)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between mocap text (.bvh) and pose interchange (.json)
    Convert {
        #[arg(short, long = "in")]
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Meters per mocap text unit
        #[arg(short, long, default_value_t = motion_risk::motion::DEFAULT_SCALE)]
        scale: f64,
    },
    /// Run the full pipeline and write report.json, streams.csv, incidents.csv
    Analyze {
        #[command(flatten)]
        session: SessionArgs,
        /// Output directory
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write the stream table for a motion
    Export {
        #[command(flatten)]
        session: SessionArgs,
        /// Output CSV file
        #[arg(short, long)]
        out: PathBuf,
        /// Comma-separated measure ids; all streams when omitted
        #[arg(short = 'M', long, value_delimiter = ',')]
        measures: Vec<String>,
    },
    /// Start the HTTP service
    Serve {
        #[command(flatten)]
        session: SessionArgs,
        #[arg(short, long, default_value_t = 8080)]
        port: u16,
        #[arg(short = 'H', long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Refuse port 0 instead of picking a free port
        #[arg(long)]
        strict: bool,
        /// Keep one document per analysis in this directory
        #[arg(long)]
        persist: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SessionArgs {
    /// Motion file (.bvh or .json)
    #[arg(short, long = "in")]
    input: Option<PathBuf>,
    /// Session config (TOML)
    #[arg(short, long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Body mass in kg
    #[arg(short, long)]
    mass: Option<f64>,
    /// Rule set file
    #[arg(short, long)]
    rules: Option<PathBuf>,
    /// Anatomical binding table
    #[arg(short, long)]
    bindings: Option<PathBuf>,
    /// Segment table
    #[arg(long)]
    segments: Option<PathBuf>,
    /// Meters per mocap text unit
    #[arg(short, long)]
    scale: Option<f64>,
    /// Low-pass cutoff in Hz
    #[arg(long)]
    cutoff: Option<f64>,
    /// Effective filter order
    #[arg(long)]
    order: Option<u32>,
}

impl SessionArgs {
    /// Config file (or env default), then flags on top.
    fn resolve(&self) -> Result<SessionConfig> {
        let mut cfg = SessionConfig::discover(self.config.as_deref())?;
        if let Some(p) = &self.input {
            cfg.input = Some(p.clone());
        }
        if let Some(m) = self.mass {
            cfg.body_mass_kg = m;
        }
        if let Some(p) = &self.rules {
            cfg.rules = Some(p.clone());
        }
        if let Some(p) = &self.bindings {
            cfg.bindings = Some(p.clone());
        }
        if let Some(p) = &self.segments {
            cfg.segments = Some(p.clone());
        }
        if let Some(s) = self.scale {
            cfg.scale = s;
        }
        if let Some(c) = self.cutoff {
            cfg.filter.cutoff_hz = c;
        }
        if let Some(o) = self.order {
            cfg.filter.order = o;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn format_of(path: &Path, text: &str) -> MotionFormat {
    MotionFormat::from_extension(path).unwrap_or_else(|| MotionFormat::detect(text))
}

fn read_motion(path: &Path, scale: f64) -> Result<Motion> {
    let text = read_text(path)?;
    let motion =
        parse_motion(&text, format_of(path, &text), scale).map_err(|e| motion_risk::Error::from(e).in_file(path))?;
    Ok(motion)
}

fn run_pipeline(cfg: &SessionConfig) -> Result<Analysis> {
    let Some(input) = &cfg.input else {
        bail!("no input motion: pass --in or set `input` in the config");
    };
    let assets = cfg.load_assets()?;
    let motion = read_motion(input, cfg.scale)?;
    let analysis =
        Analysis::run(&input.to_string_lossy(), motion, &assets, &cfg.settings()).map_err(|e| e.in_file(input))?;
    Ok(analysis)
}

fn convert(input: &Path, out: &Path, scale: f64) -> Result<()> {
    let motion = read_motion(input, scale)?;
    let text = match MotionFormat::from_extension(out) {
        Some(MotionFormat::Mocap) => serialize_mocap_text(&motion.skeleton, &motion.sequence, scale)?,
        Some(MotionFormat::Interchange) => serialize_pose_interchange(&motion.skeleton, &motion.sequence)?,
        None => bail!("{}: output extension must be .bvh or .json", out.display()),
    };
    report::write_atomic(out, &text)?;
    Ok(())
}

fn analyze(session: &SessionArgs, out: Option<&Path>) -> Result<()> {
    let cfg = session.resolve()?;
    let analysis = run_pipeline(&cfg)?;
    let dir = out
        .map(Path::to_path_buf)
        .or(cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    report::write_outputs(&analysis, &dir)?;
    let t = &analysis.report.totals;
    println!(
        "{}: {} incidents (high {}, medium {}, low {}) -> {}",
        analysis.report.session.source,
        t.incidents,
        t.high,
        t.medium,
        t.low,
        dir.display()
    );
    Ok(())
}

fn export(session: &SessionArgs, out: &Path, measures: &[String]) -> Result<()> {
    let cfg = session.resolve()?;
    let analysis = run_pipeline(&cfg)?;
    let streams: StreamSet = if measures.is_empty() {
        analysis.streams().clone()
    } else {
        measures
            .iter()
            .map(|m| {
                analysis
                    .streams()
                    .get(m)
                    .cloned()
                    .with_context(|| format!("unknown measure `{m}`"))
            })
            .collect::<Result<_>>()?
    };
    report::export_streams(&streams, out)?;
    Ok(())
}

fn serve(session: &SessionArgs, host: IpAddr, port: u16, strict: bool, persist: Option<PathBuf>) -> Result<()> {
    let cfg = session.resolve()?;
    let mut config = ServiceConfig::from_session(&cfg)?;
    config.persist_dir = persist;
    let state = AppState::new(config).context("opening analysis store")?;
    if let Some(input) = &cfg.input {
        let text = read_text(input)?;
        let format = match format_of(input, &text) {
            MotionFormat::Mocap => FormatName::Mocap,
            MotionFormat::Interchange => FormatName::Interchange,
        };
        let h = state.preload(&input.to_string_lossy(), text, Some(format));
        if let Some(e) = &h.error {
            bail!("{}: {}", input.display(), e.message);
        }
        log::info!("preloaded {} as {}", input.display(), h.id);
    }
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = service::bind(host, port, strict).await?;
        eprintln!("motion-risk listening on http://{}", listener.local_addr()?);
        service::serve(listener, state).await
    })?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Convert { input, out, scale } => convert(input, out, *scale),
        Command::Analyze { session, out } => analyze(session, out.as_deref()),
        Command::Export { session, out, measures } => export(session, out, measures),
        Command::Serve {
            session,
            port,
            host,
            strict,
            persist,
        } => serve(session, *host, *port, *strict, persist.clone()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("motion-risk: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
