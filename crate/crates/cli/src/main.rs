mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fahm::sim::{self, report, BenchOptions, ScenarioConfig, SweepAxis};
use fahm::Error;

use output::{timestamp, OutDir, Platform, RunManifest};

#[derive(Parser)]
#[command(name = "fahm", version, about = "Fluid-antenna hybrid multiport receiver simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo evaluation of every scheme in the config.
    Run(Common),
    /// Repeat the run over a list of values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// riceK_dB, numPaths, users, selectedP, snr_dB, gamma or pOverPeffRatio.
        #[arg(long)]
        axis: String,
        /// `start:step:stop` (inclusive) or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Averaged dominant SINR against the number of removed ports.
    Elbow(Common),
    /// Timing of fast against naive GEPort on identical problems.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 3)]
        warmup: usize,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "FAHM_THREADS")]
    threads: Option<usize>,
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Config(e.to_string()),
            Error::Io(_) => Failure::Io(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

struct Session {
    name: &'static str,
    cfg: ScenarioConfig,
    out: OutDir,
    threads: usize,
    started_at: String,
}

impl Session {
    fn open(name: &'static str, common: &Common) -> Result<Self, Failure> {
        let started_at = timestamp();
        let mut cfg = ScenarioConfig::from_path(&common.config)?;
        if let Some(seed) = common.seed {
            cfg.master_seed = seed;
        }
        if let Some(t) = common.threads {
            if t == 0 {
                return Err(Failure::Config("config error in `threads`: must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| Failure::Io(e.to_string()))?;
        }
        let mut out = OutDir::create(&common.out)?;
        out.write("config.toml", cfg.to_toml_string().as_bytes())?;
        Ok(Self { name, cfg, out, threads: rayon::current_num_threads(), started_at })
    }

    fn close(mut self, axis: Option<(SweepAxis, Vec<f64>)>) -> Result<(), Failure> {
        let mut outputs = self.out.written().to_vec();
        outputs.push("manifest.json".into());
        let manifest = RunManifest {
            tool: "fahm",
            version: env!("CARGO_PKG_VERSION"),
            command: self.name.into(),
            axis: axis.as_ref().map(|(a, _)| a.to_string()),
            values: axis.map(|(_, v)| v),
            master_seed: self.cfg.master_seed,
            threads: self.threads,
            platform: Platform::current(),
            started_at: self.started_at.clone(),
            finished_at: timestamp(),
            config: serde_json::to_value(&self.cfg).map_err(|e| Failure::Io(e.to_string()))?,
            outputs,
        };
        self.out.write_json("manifest.json", &manifest)?;
        Ok(())
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(common) => {
            let mut s = Session::open("run", &common)?;
            let summary = sim::run_scenario(&s.cfg)?;
            s.out.write_json("summary.json", &summary)?;
            s.out.write("results.csv", report::run_csv(&summary).as_bytes())?;
            s.close(None)
        }
        Command::Sweep { common, axis, values } => {
            let axis: SweepAxis = axis.parse()?;
            let values = sim::parse_values(&values)?;
            let mut s = Session::open("sweep", &common)?;
            let table = sim::sweep(&s.cfg, axis, &values)?;
            s.out.write_json("summary.json", &table)?;
            s.out.write("results.csv", report::sweep_csv(&table).as_bytes())?;
            s.close(Some((axis, values)))
        }
        Command::Elbow(common) => {
            let mut s = Session::open("elbow", &common)?;
            let curve = sim::elbow_curve(&s.cfg)?;
            s.out.write_json("summary.json", &curve)?;
            s.out.write("elbow.csv", report::elbow_csv(&curve).as_bytes())?;
            s.close(None)
        }
        Command::Bench { common, runs, warmup } => {
            let mut s = Session::open("bench", &common)?;
            let bench = sim::bench_timing(&s.cfg, BenchOptions { warmup, runs })?;
            s.out.write_json("summary.json", &bench)?;
            s.out.write("bench.csv", report::bench_csv(&bench).as_bytes())?;
            eprintln!("{:<24} {:>12} {:>12} {:>6}", "scheme", "median_ms", "mean_ms", "runs");
            for r in &bench.rows {
                eprintln!("{:<24} {:>12.3} {:>12.3} {:>6}", r.scheme, r.median_ms, r.mean_ms, r.runs);
            }
            eprintln!("fast/naive median ratio: {:.4}", bench.fast_over_naive);
            s.close(None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
