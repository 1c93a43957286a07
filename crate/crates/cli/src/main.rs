mod config;

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use edgewatch_core::clock::MonotonicClock;
use edgewatch_core::coverage::{build_coverage, to_geojson};
use edgewatch_core::radio::read_drive_trace;
use edgewatch_core::FusionStore;
use edgewatch_harness::plot::{coverage_png, coverage_svg};
use edgewatch_harness::report::DEFAULT_CELL_SIZE_M;
use edgewatch_harness::{report, run_trial, Format, Output, ReportSpec, Scenario};
use edgewatch_net::exporter::{collect, publish_all, sample_iface, Sources};
use edgewatch_net::proxy::DEFAULT_SESSION_TIMEOUT_S;
use edgewatch_net::{fusion_http, server, Proxy, ProxyConfig, Publisher, PublisherConfig, ServerHandle};
use thiserror::Error;
use tracing_subscriber::EnvFilter;
use url::Url;

use crate::config::FileConfig;

const DEFAULT_PROXY_LISTEN: &str = "0.0.0.0:8080";
const DEFAULT_FUSION_LISTEN: &str = "127.0.0.1:9100";
const DEFAULT_FUSION_URL: &str = "http://127.0.0.1:9100/";
const DRAIN_TIMEOUT: Duration = Duration::from_secs(30);

/// Multi-layer monitoring of DASH sessions: media proxy, radio exporter,
/// time-series store, simulated drive trials and figure reports.
#[derive(Debug, Parser)]
#[command(name = "edgewatch", version)]
struct Cli {
    /// TOML file supplying defaults for `serve` and `export` (flags > env > file).
    #[arg(long, global = true, env = "EDGEWATCH_CONFIG", value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a network service until interrupted.
    #[command(subcommand)]
    Serve(Serve),
    /// Push logged or live measurements to a store.
    #[command(subcommand)]
    Export(Export),
    /// Simulated drive trials.
    #[command(subcommand)]
    Trial(TrialCommand),
    /// Write figure data (CSV, optionally PNG/SVG) from a completed run.
    Report(ReportArgs),
    /// Bin a drive trace into a coverage map.
    Coverage(CoverageArgs),
}

#[derive(Debug, Subcommand)]
enum Serve {
    /// DASH reverse proxy that records every segment request.
    Proxy(ProxyArgs),
    /// Time-series store with ingestion, query and /metrics endpoints.
    Fusion(FusionArgs),
}

#[derive(Debug, Args)]
struct ProxyArgs {
    /// Address to listen on [default: 0.0.0.0:8080]
    #[arg(long, env = "EDGEWATCH_PROXY_LISTEN", value_name = "ADDR")]
    listen: Option<SocketAddr>,
    /// Origin (CDN) base URL the proxy fetches from.
    #[arg(long, env = "EDGEWATCH_ORIGIN", value_name = "URL")]
    origin: Option<Url>,
    /// Idle time after which a session is closed [default: 30]
    #[arg(long, env = "EDGEWATCH_SESSION_TIMEOUT_S", value_name = "SECONDS")]
    session_timeout_s: Option<f64>,
    /// Store base URL receiving segment records [default: http://127.0.0.1:9100/]
    #[arg(long, env = "EDGEWATCH_FUSION_URL", value_name = "URL")]
    fusion_url: Option<Url>,
    /// Origin written into rewritten manifests (default: the request's Host).
    #[arg(long, env = "EDGEWATCH_PUBLIC_URL", value_name = "URL")]
    public_url: Option<Url>,
}

#[derive(Debug, Args)]
struct FusionArgs {
    /// Address to listen on [default: 127.0.0.1:9100]
    #[arg(long, env = "EDGEWATCH_FUSION_LISTEN", value_name = "ADDR")]
    listen: Option<SocketAddr>,
    /// Load the store from this directory at start and save it there on exit.
    #[arg(long, env = "EDGEWATCH_DATA_DIR", value_name = "DIR")]
    data_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Export {
    /// Radio (L1), position and interface counter (L3) samples.
    Radio(RadioArgs),
}

#[derive(Debug, Args)]
struct RadioArgs {
    /// Drive-trace CSV (t_s,lat_deg,lon_deg,rsrp_dbm,rsrq_db,sinr_db).
    #[arg(long, value_name = "CSV")]
    trace: Option<PathBuf>,
    /// Modem log with #RFSTS responses.
    #[arg(long, value_name = "FILE")]
    modem_log: Option<PathBuf>,
    /// NMEA 0183 log (GGA/RMC) joined to modem readings.
    #[arg(long, value_name = "FILE")]
    nmea: Option<PathBuf>,
    /// Interface counter CSV (t_s,rx_bytes,tx_bytes).
    #[arg(long, value_name = "CSV")]
    iface_counters: Option<PathBuf>,
    /// Sample a live network interface's counters.
    #[arg(long, value_name = "NAME")]
    iface: Option<String>,
    /// Stop live sampling after this many samples.
    #[arg(long, requires = "iface", value_name = "N")]
    ticks: Option<u64>,
    /// Store base URL [default: http://127.0.0.1:9100/]
    #[arg(long, env = "EDGEWATCH_FUSION_URL", value_name = "URL")]
    fusion_url: Option<Url>,
    /// Sampling rate for untimed log lines and live counters [default: 1]
    #[arg(long, env = "EDGEWATCH_RATE_HZ", value_name = "HZ")]
    rate_hz: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum TrialCommand {
    /// Replay a scenario and write its artifacts.
    Run(TrialRunArgs),
}

#[derive(Debug, Args)]
struct TrialRunArgs {
    /// Scenario TOML file.
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Override the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (run.json, trace.csv, session.jsonl, store/).
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directory written by `trial run`.
    #[arg(long = "run", value_name = "DIR")]
    run_dir: PathBuf,
    /// Where to write outputs [default: <run>/report]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Outputs to produce.
    #[arg(
        long = "output",
        value_delimiter = ',',
        default_value = "bitrate,stalls,qoe,throughput_l3_l7,rf,coverage",
        value_name = "LIST"
    )]
    outputs: Vec<Output>,
    /// Formats; CSV is always written, png/svg add a chart per output.
    #[arg(long = "format", value_delimiter = ',', default_value = "csv", value_name = "LIST")]
    formats: Vec<Format>,
    /// Coverage grid cell size.
    #[arg(long, default_value_t = DEFAULT_CELL_SIZE_M, value_name = "M")]
    cell_size_m: f64,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    /// Drive-trace CSV.
    #[arg(long, value_name = "CSV")]
    trace: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CELL_SIZE_M, value_name = "M")]
    cell_size_m: f64,
    /// Output file; `.png` and `.svg` write an image, anything else GeoJSON.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

/// A missing or inconsistent setting found after flags, env and file are merged.
#[derive(Debug, Error)]
#[error("{0}")]
struct Usage(String);

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn default_addr(s: &str) -> SocketAddr {
    s.parse().expect("default address parses")
}

fn default_url(s: &str) -> Url {
    Url::parse(s).expect("default URL parses")
}

fn announce(handle: &ServerHandle) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "listening on {}", handle.base_url());
    let _ = out.flush();
}

async fn shutdown_signal() -> Result<()> {
    #[cfg(unix)]
    {
        let mut term = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate())?;
        tokio::select! {
            r = tokio::signal::ctrl_c() => r?,
            _ = term.recv() => {}
        }
    }
    #[cfg(not(unix))]
    tokio::signal::ctrl_c().await?;
    Ok(())
}

#[derive(Debug)]
struct ProxySettings {
    listen: SocketAddr,
    config: ProxyConfig,
    fusion_url: Url,
}

fn resolve_proxy(a: ProxyArgs, file: config::ProxySection) -> Result<ProxySettings> {
    let origin = a.origin.or(file.origin).ok_or_else(|| {
        Usage("no origin: pass --origin, set EDGEWATCH_ORIGIN or add proxy.origin to the config file".into())
    })?;
    let timeout = a.session_timeout_s.or(file.session_timeout_s).unwrap_or(DEFAULT_SESSION_TIMEOUT_S);
    if !(timeout > 0.0 && timeout.is_finite()) {
        return Err(Usage(format!("session timeout must be positive, got {timeout}")).into());
    }
    let mut config = ProxyConfig::new(origin);
    config.session_timeout_s = timeout;
    config.public_url = a.public_url.or(file.public_url);
    Ok(ProxySettings {
        listen: a.listen.or(file.listen).unwrap_or_else(|| default_addr(DEFAULT_PROXY_LISTEN)),
        config,
        fusion_url: a.fusion_url.or(file.fusion_url).unwrap_or_else(|| default_url(DEFAULT_FUSION_URL)),
    })
}

async fn serve_proxy(s: ProxySettings) -> Result<()> {
    let publisher = Arc::new(Publisher::spawn(s.fusion_url.clone(), PublisherConfig::default()));
    let proxy = Proxy::new(s.config, Arc::new(MonotonicClock::new(unix_now())), publisher.clone());
    let expiry = proxy.spawn_expiry(Duration::from_secs(1));
    let listener = server::bind(s.listen).await.with_context(|| format!("binding {}", s.listen))?;
    let handle = server::spawn(listener, proxy.router())?;
    announce(&handle);
    tracing::info!(fusion = %s.fusion_url, "proxy up");
    shutdown_signal().await?;
    handle.shutdown().await?;
    expiry.abort();
    proxy.expire_sessions(f64::INFINITY);
    if !publisher.flush(DRAIN_TIMEOUT).await {
        bail!("{} records not delivered to {}", publisher.pending(), s.fusion_url);
    }
    Ok(())
}

async fn serve_fusion(a: FusionArgs, file: config::FusionSection) -> Result<()> {
    let listen = a.listen.or(file.listen).unwrap_or_else(|| default_addr(DEFAULT_FUSION_LISTEN));
    let data_dir = a.data_dir.or(file.data_dir);
    let store = match &data_dir {
        Some(dir) if dir.exists() => FusionStore::load(dir).with_context(|| format!("loading {}", dir.display()))?,
        _ => FusionStore::new(),
    };
    let store = Arc::new(store);
    let listener = server::bind(listen).await.with_context(|| format!("binding {listen}"))?;
    let handle = server::spawn(listener, fusion_http::router(store.clone()))?;
    announce(&handle);
    shutdown_signal().await?;
    handle.shutdown().await?;
    if let Some(dir) = data_dir {
        store.save(&dir).with_context(|| format!("saving {}", dir.display()))?;
        tracing::info!(dir = %dir.display(), "store saved");
    }
    Ok(())
}

async fn export_radio(a: RadioArgs, file: config::ExportSection) -> Result<()> {
    let fusion_url = a.fusion_url.or(file.fusion_url).unwrap_or_else(|| default_url(DEFAULT_FUSION_URL));
    let rate_hz = a.rate_hz.or(file.rate_hz).unwrap_or(1.0);
    if !(rate_hz > 0.0 && rate_hz.is_finite()) {
        return Err(Usage(format!("--rate-hz must be positive, got {rate_hz}")).into());
    }
    let sources = Sources {
        trace: a.trace,
        modem_log: a.modem_log,
        nmea: a.nmea,
        iface_counters: a.iface_counters,
        rate_hz,
    };
    let logged = sources.trace.is_some() || sources.modem_log.is_some() || sources.iface_counters.is_some();
    if !logged && a.iface.is_none() {
        return Err(Usage("nothing to export: give --trace, --modem-log, --iface-counters or --iface".into()).into());
    }
    if sources.nmea.is_some() && sources.modem_log.is_none() {
        return Err(Usage("--nmea positions are joined to --modem-log readings; give both".into()).into());
    }
    let publisher = Publisher::spawn(fusion_url.clone(), PublisherConfig::default());
    if logged {
        let c = collect(&sources)?;
        publish_all(&publisher, &c);
        println!(
            "radio samples: {}, link samples: {}, rejected lines: {}, checksum errors: {}",
            c.radio.len(),
            c.link.len(),
            c.rejected_lines,
            c.checksum_errors
        );
    }
    if let Some(iface) = &a.iface {
        let sent = tokio::select! {
            r = sample_iface(iface, rate_hz, a.ticks, &publisher) => r.with_context(|| format!("sampling {iface}"))?,
            r = shutdown_signal() => { r?; 0 }
        };
        if a.ticks.is_some() {
            println!("live link samples: {sent}");
        }
    }
    let rejected = publisher.rejected();
    let delivered = publisher.close(DRAIN_TIMEOUT).await;
    if !delivered {
        bail!("store at {fusion_url} did not accept every sample within {DRAIN_TIMEOUT:?}");
    }
    if rejected > 0 {
        bail!("store rejected {rejected} batches");
    }
    Ok(())
}

async fn trial(a: TrialRunArgs) -> Result<()> {
    let mut sc = Scenario::load(&a.scenario)?;
    if let Some(seed) = a.seed {
        sc.seed = seed;
    }
    let t = run_trial(&sc).await?;
    t.write_artifacts(&a.out)?;
    let m = &t.manifest;
    println!(
        "{}: seed {}, {} segments, {} stalls ({:.1} s), final MOS {}, artifacts in {}",
        m.scenario,
        m.seed,
        m.segments_requested,
        m.stalls.len(),
        m.stall_total_s,
        m.final_mos.map_or("n/a".to_string(), |v| format!("{v:.2}")),
        a.out.display()
    );
    Ok(())
}

fn report_cmd(a: ReportArgs) -> Result<()> {
    let out_dir = a.out.unwrap_or_else(|| a.run_dir.join("report"));
    let done = report(&ReportSpec {
        run_dir: a.run_dir,
        out_dir,
        outputs: a.outputs,
        formats: a.formats,
        cell_size_m: a.cell_size_m,
    })?;
    for w in &done.warnings {
        eprintln!("warning: {w}");
    }
    for f in &done.written {
        println!("{}", f.display());
    }
    Ok(())
}

fn coverage_cmd(a: CoverageArgs) -> Result<()> {
    let samples = read_drive_trace(&a.trace).with_context(|| format!("reading {}", a.trace.display()))?;
    let cells = build_coverage(&samples, a.cell_size_m)?;
    let bytes = match a.out.extension().and_then(|e| e.to_str()) {
        Some("png") => coverage_png(&cells),
        Some("svg") => coverage_svg(&cells).into_bytes(),
        _ => to_geojson(&cells),
    };
    write_file(&a.out, &bytes)?;
    println!("{} cells from {} samples -> {}", cells.len(), samples.len(), a.out.display());
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let rt = tokio::runtime::Runtime::new()?;
    match cli.command {
        Command::Serve(Serve::Proxy(a)) => {
            let settings = resolve_proxy(a, file.proxy)?;
            rt.block_on(serve_proxy(settings))
        }
        Command::Serve(Serve::Fusion(a)) => rt.block_on(serve_fusion(a, file.fusion)),
        Command::Export(Export::Radio(a)) => rt.block_on(export_radio(a, file.export)),
        Command::Trial(TrialCommand::Run(a)) => rt.block_on(trial(a)),
        Command::Report(a) => report_cmd(a),
        Command::Coverage(a) => coverage_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<Usage>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
