mod commands;
mod sweep;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use graphdp::planner::DeviceOverrides;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "graphdp", version, about = "Exact graph DP kernels and accelerator cost model")]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// JSON file with `pcm` / `hbm` device overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate graphs, genomes and reads.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Recursive partitioned all-pairs shortest paths.
    Apsp(ApspArgs),
    /// Windowed sequence-to-graph alignment.
    S2g(S2gArgs),
    /// Sensitivity sweeps and roofline numbers as CSV.
    #[command(subcommand)]
    Sweep(SweepCmd),
    /// Dump the execution plan for a workload descriptor.
    Plan(PlanArgs),
    /// Run the oracle suites.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug, Serialize)]
pub enum GenCmd {
    /// Erdos-Renyi digraph.
    Er {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = graphdp::graph::DEFAULT_W_MAX)]
        w_max: u32,
    },
    /// Newman-Watts-Strogatz graph (ring lattice plus shortcuts), both directions.
    Nws {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = graphdp::graph::DEFAULT_W_MAX)]
        w_max: u32,
    },
    /// Bubble genome as GFA segments/links plus the backbone as FASTA.
    Genome {
        #[arg(long)]
        bases: usize,
        #[arg(long, default_value_t = 0.02)]
        bubble_rate: f64,
    },
    /// Reads sampled along paths of a GFA graph.
    Reads {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        len: usize,
        #[arg(long, default_value_t = 0.0)]
        sub_rate: f64,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct ApspArgs {
    /// Edge list (`src dst weight` per line).
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 256)]
    max_tile: usize,
    /// Check against dense FW (graphs up to the dense limit).
    #[arg(long)]
    verify: bool,
    /// Attach a cost report.
    #[arg(long)]
    model: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ModeArg {
    Auto,
    Short,
    Long,
}

#[derive(Args, Debug, Serialize)]
pub struct S2gArgs {
    /// GFA graph.
    #[arg(long)]
    graph: PathBuf,
    /// FASTA reads.
    #[arg(long)]
    reads: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    /// Window widths; scores must agree across all of them.
    #[arg(long = "width", value_delimiter = ',', default_value = "128")]
    widths: Vec<usize>,
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    model: bool,
    /// Add a path column.
    #[arg(long)]
    traceback: bool,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum SweepCmd {
    /// Normalized latency/energy against matrix-tile dimension.
    Tilesize {
        /// Edge list; a synthetic NWS graph when absent.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long = "Ns", alias = "ns", value_delimiter = ',', default_value = "256,512,1024,2048")]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 200_000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0.005)]
        p: f64,
        #[arg(long, default_value_t = graphdp::cost::DEFAULT_OVERHEAD_SHARE)]
        overhead_share: f64,
    },
    /// Throughput against PEs per channel on the mixed workload.
    Pe {
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,96,128,160,192")]
        counts: Vec<usize>,
    },
    /// Traffic and throughput against shared SRAM capacity on the long-read workload.
    Sram {
        /// Comma list (`32K,64K`) or doubling range (`32K..512K`).
        #[arg(long, default_value = "32K..512K")]
        caps: String,
    },
    /// Arithmetic intensities under each counting convention.
    Roofline {
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 128)]
        width: usize,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct PlanArgs {
    /// Workload descriptor JSON.
    #[arg(long)]
    descriptor: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Suite {
    Apsp,
    S2g,
    Boundary,
    All,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    /// Cases per suite.
    #[arg(long, default_value_t = 20)]
    cases: usize,
}

/// Raised when an oracle disagrees; maps to exit code 1.
#[derive(Debug)]
pub struct VerifyFailure(pub String);

impl std::fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerifyFailure {}

/// Everything shared by the subcommands.
pub struct Ctx {
    pub seed: u64,
    pub out: PathBuf,
    pub device: DeviceOverrides,
}

impl Ctx {
    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn write(&self, name: &str, data: impl AsRef<[u8]>) -> Result<PathBuf> {
        let p = self.path(name);
        std::fs::write(&p, data).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    /// Records the fully resolved invocation next to the outputs.
    pub fn write_config<T: Serialize>(&self, command: &str, args: &T) -> Result<()> {
        let cfg = serde_json::json!({
            "command": command,
            "seed": self.seed,
            "args": args,
            "pcm": self.device.pcm.unwrap_or_default(),
            "hbm": self.device.hbm.unwrap_or_default(),
        });
        self.write("run_config.json", serde_json::to_string_pretty(&cfg)? + "\n")?;
        Ok(())
    }
}

fn load_overrides(path: Option<&Path>) -> Result<DeviceOverrides> {
    match path {
        None => Ok(DeviceOverrides::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let d: DeviceOverrides = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            if let Some(pcm) = &d.pcm {
                pcm.validate()?;
            }
            if let Some(hbm) = &d.hbm {
                hbm.validate()?;
            }
            Ok(d)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring the thread pool")?;
    }
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let ctx = Ctx { seed: cli.seed, out: cli.out.clone(), device: load_overrides(cli.config.as_deref())? };
    match cli.cmd {
        Cmd::Gen(g) => commands::gen(&ctx, g),
        Cmd::Apsp(a) => commands::apsp(&ctx, a),
        Cmd::S2g(a) => commands::s2g(&ctx, a),
        Cmd::Sweep(s) => sweep::run(&ctx, s),
        Cmd::Plan(p) => commands::plan(&ctx, p),
        Cmd::Verify(v) => verify::run(&ctx, v),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<VerifyFailure>().is_some() => {
            eprintln!("FAIL: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
