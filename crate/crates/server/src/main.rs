use std::fs::File;
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use apiglance_core::examples::ingest_manifest;
use apiglance_core::harness::{self, SessionMetrics};
use apiglance_core::service::ResolveRequest;
use apiglance_core::{docs, store, synthetic, Config, Engine, EngineHandle, Mode};
use clap::{Parser, Subcommand};
use tracing::{info, warn};

#[derive(Parser)]
#[command(name = "apiglance", version, about = "Instant API documentation and examples for PHP source")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a doc corpus and an example manifest into an index directory.
    Index {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        examples: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Serve the HTTP API (and optional static assets).
    Serve {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 7171)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
    /// Resolve one cursor position and print the result as JSON.
    Resolve {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        line: u32,
        #[arg(long)]
        col: u32,
        #[arg(long, default_value = "reading")]
        mode: Mode,
        #[arg(long, default_value = "index")]
        index: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Replay a session trace and print its metrics.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print JSON instead of a summary.
        #[arg(long)]
        json: bool,
    },
    /// Compare two metrics files written by `replay --json`.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic doc corpus and example manifest for load testing.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        examples: usize,
        #[arg(long, default_value_t = 1_000)]
        apis: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load_engine(index: &Path, config: Option<&Path>) -> Result<Engine> {
    let config = Config::load_or_default(config)?;
    let (catalog, examples) = store::load(index, config.ranking)
        .with_context(|| format!("loading index {}", index.display()))?;
    Ok(Engine::new(catalog, examples, config))
}

fn read_metrics(path: &Path) -> Result<SessionMetrics> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn index(docs_path: &Path, manifest: &Path, out: &Path, config: Option<&Path>) -> Result<()> {
    let config = Config::load_or_default(config)?;
    let file = File::open(docs_path).with_context(|| format!("opening {}", docs_path.display()))?;
    let (catalog, report) = docs::ingest_docs(BufReader::new(file))?;
    for s in &report.skipped {
        warn!(line = s.line, reason = %s.reason, "doc record skipped");
    }
    for d in &report.dangling_refs {
        warn!(from = %d.from, to = %d.to, "dangling related reference");
    }
    for w in &report.warnings {
        warn!("{w}");
    }
    let (examples, ex_report) = ingest_manifest(manifest, config.ranking)?;
    for s in &ex_report.skipped {
        warn!(id = %s.id, path = %s.path.display(), reason = %s.reason, "example skipped");
    }
    store::save(out, &catalog, &examples)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({ "docs": report, "examples": ex_report }))?
    );
    Ok(())
}

async fn serve(engine: Engine, host: &str, port: u16, static_dir: Option<PathBuf>) -> Result<()> {
    let handle = Arc::new(EngineHandle::new(engine));
    let app = apiglance::router(handle, static_dir);
    let addr: SocketAddr = format!("{host}:{port}").parse().context("bad listen address")?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    info!("listening on http://{addr}");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    match Cli::parse().command {
        Command::Index {
            docs,
            examples,
            out,
            config,
        } => index(&docs, &examples, &out, config.as_deref()),
        Command::Serve {
            index,
            port,
            host,
            config,
            static_dir,
        } => {
            let engine = load_engine(&index, config.as_deref())?;
            let health = engine.health();
            info!(apis = health.apis, examples = health.examples, "index loaded");
            tokio::runtime::Runtime::new()?.block_on(serve(engine, &host, port, static_dir))
        }
        Command::Resolve {
            file,
            line,
            col,
            mode,
            index,
            config,
        } => {
            let engine = load_engine(&index, config.as_deref())?;
            let source =
                std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let req = ResolveRequest {
                source,
                line,
                col,
                mode,
            };
            match engine.handle_resolve(&req) {
                Ok(result) => println!("{}", serde_json::to_string_pretty(&result)?),
                Err(e) => bail!("{}: {}", serde_json::to_string(&e.code)?, e.message),
            }
            Ok(())
        }
        Command::Replay {
            trace,
            index,
            config,
            json,
        } => {
            let engine = load_engine(&index, config.as_deref())?;
            let file = File::open(&trace).with_context(|| format!("opening {}", trace.display()))?;
            let events = harness::read_trace(BufReader::new(file))?;
            let m = harness::replay(&events, &engine)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&m)?);
            } else {
                let c = m.counts;
                println!("events            {}", c.events_total);
                println!("api lookups       {}", c.api_lookups);
                println!("resolved locally  {}", c.resolved_locally);
                println!("doc only          {}", c.doc_only);
                println!("miss              {}", c.miss);
                println!("task searches     {}", c.task_searches);
                println!("local rate        {:.4}", m.local_resolution_rate);
                println!("latency p50 / p95 {:.3} / {:.3} ms", m.latency_p50_ms, m.latency_p95_ms);
            }
            Ok(())
        }
        Command::Compare { a, b, json } => {
            let cmp = harness::compare(&read_metrics(&a)?, &read_metrics(&b)?);
            if json {
                println!("{}", serde_json::to_string_pretty(&cmp)?);
            } else {
                print!("{cmp}");
            }
            Ok(())
        }
        Command::Synth {
            out,
            examples,
            apis,
            seed,
        } => {
            if apis == 0 {
                bail!("--apis must be at least 1");
            }
            let corpus = synthetic::generate(seed, examples, apis);
            corpus.write_to(&out)?;
            println!("wrote {} docs and {} examples to {}", apis, examples, out.display());
            Ok(())
        }
    }
}
