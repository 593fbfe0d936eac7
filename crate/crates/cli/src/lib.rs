//! `qmlab`: configuration-driven experiments with reproducible artifacts.

pub mod commands;
pub mod config;
pub mod output;
pub mod suite;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use config::{Diagnostic, ExperimentConfig, FareyQuery};
use output::{sha256_hex, unix_now, FileDigest, Overrides, Run, RunManifest, CSV_FORMAT};

#[derive(Debug, Parser)]
#[command(name = "qmlab", version, about = "Braid quasimorphisms of disk maps: experiments and invariant checks")]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: the config's `output`, else qmlab-out/<command>).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Vertex budget for curve transport and corridor budget for Farey queries.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract braids from sampled or given configurations.
    Trace,
    /// Estimate the integral operator for every (map, qm) pair.
    Gg,
    /// Run the entropy estimators.
    Entropy,
    /// Farey-graph queries from the config, or one ad-hoc query.
    Farey {
        #[command(subcommand)]
        query: Option<FareyCmd>,
    },
    /// Entropy-norm bounds and embedding certificates.
    Norms {
        #[command(subcommand)]
        what: NormsCmd,
    },
    /// Run the invariant suite.
    Verify {
        /// Include the Monte-Carlo criteria (tens of minutes).
        #[arg(long)]
        full: bool,
    },
    /// Check a configuration and print diagnostics.
    Validate,
    /// Re-run a manifest and compare output digests.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum FareyCmd {
    /// Distance between two slopes, e.g. `dist 3/5 -7/2`.
    Dist { a: String, b: String },
    /// Translation length of a,b,c,d.
    Tau {
        matrix: String,
        #[arg(long, default_value_t = 20)]
        p_max: u32,
    },
    /// Σ_t ψ over turn patterns, e.g. `qm --turns 5,7,9,11 2,1,1,1`.
    Qm {
        #[arg(long)]
        turns: String,
        matrix: String,
        #[arg(long)]
        homogenize: Option<u32>,
    },
}

#[derive(Debug, Subcommand)]
pub enum NormsCmd {
    /// Lower bounds on the entropy norm of a map and its powers.
    Bound,
    /// Certificate for a disjointly supported family.
    Embed {
        #[arg(long)]
        m: Option<usize>,
        /// A k-vector such as 2,5; may be repeated.
        #[arg(long, allow_hyphen_values = true)]
        k: Vec<String>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration")]
    Invalid(Vec<Diagnostic>),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] qmlab::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qmlab::Error as E;
        match self {
            CliError::Core(E::Budget { .. } | E::Resolution { .. } | E::Sampling(_) | E::Degeneracy(_) | E::Overflow(_)) => 3,
            _ => 2,
        }
    }
}

impl Command {
    fn label(&self) -> &'static str {
        match self {
            Command::Trace => "trace",
            Command::Gg => "gg",
            Command::Entropy => "entropy",
            Command::Farey { .. } => "farey",
            Command::Norms { what: NormsCmd::Bound } => "norms-bound",
            Command::Norms { what: NormsCmd::Embed { .. } } => "norms-embed",
            Command::Verify { .. } => "verify",
            Command::Validate => "validate",
            Command::Replay { .. } => "replay",
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(&cli, argv, None) {
        Ok(_) => 0,
        Err(e) => {
            report(&e);
            e.exit_code()
        }
    }
}

fn report(e: &CliError) {
    match e {
        CliError::Invalid(ds) => {
            eprintln!("error: invalid configuration");
            for d in ds {
                eprintln!("  {d}");
            }
        }
        e => eprintln!("error: {e}"),
    }
}

struct Source {
    path: Option<String>,
    text: String,
    /// Read from `path` in this run, so it can be digested as an input.
    from_file: bool,
}

fn load(cli: &Cli, preset: Option<Source>) -> Result<Option<(Source, ExperimentConfig)>, CliError> {
    let src = match (preset, &cli.config) {
        (Some(s), _) => s,
        (None, Some(p)) => Source { path: Some(p.display().to_string()), text: std::fs::read_to_string(p)?, from_file: true },
        (None, None) => return Ok(None),
    };
    let cfg = config::parse(&src.text).map_err(CliError::Invalid)?;
    let diags = cfg.check();
    let (errors, warnings): (Vec<Diagnostic>, Vec<Diagnostic>) = diags.into_iter().partition(|d| !d.warning);
    if !errors.is_empty() {
        return Err(CliError::Invalid(errors.into_iter().chain(warnings).collect()));
    }
    for w in &warnings {
        eprintln!("{w}");
    }
    Ok(Some((src, cfg)))
}

fn need(cfg: &Option<(Source, ExperimentConfig)>) -> Result<&ExperimentConfig, CliError> {
    cfg.as_ref().map(|c| &c.1).ok_or_else(|| CliError::Usage("this command needs --config".into()))
}

fn dispatch(cli: &Cli, argv: Vec<String>, preset: Option<Source>) -> Result<Vec<FileDigest>, CliError> {
    if let Command::Validate = cli.command {
        return validate(cli);
    }
    if let Command::Replay { manifest } = &cli.command {
        return replay(cli, manifest);
    }
    let loaded = load(cli, preset)?;
    let seed = cli.seed.or(loaded.as_ref().map(|c| c.1.seed)).unwrap_or(0);
    let label = cli.command.label();
    let out = cli
        .out
        .clone()
        .or_else(|| loaded.as_ref().and_then(|c| c.1.output.clone()))
        .unwrap_or_else(|| Path::new("qmlab-out").join(label));
    let text = loaded.as_ref().map_or(String::new(), |c| c.0.text.clone());
    let manifest = RunManifest {
        tool: "qmlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: argv,
        config_path: loaded.as_ref().and_then(|c| c.0.path.clone()),
        config_sha256: sha256_hex(text.as_bytes()),
        config_toml: text,
        seed,
        overrides: Overrides { seed: cli.seed, threads: cli.threads, budget: cli.budget },
        started_unix: unix_now(),
        finished_unix: 0,
        csv_format: CSV_FORMAT,
        operations: Vec::new(),
        inputs: loaded.as_ref().filter(|c| c.0.from_file).and_then(|c| c.0.path.as_ref()).map(|p| output::read_digest(Path::new(p))).transpose()?.into_iter().collect(),
        outputs: Vec::new(),
        partial: Vec::new(),
    };
    let mut run = Run::new(out, manifest);
    let mut body = || execute(cli, &loaded, seed, &mut run);
    let result = match cli.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot build a pool with {t} threads: {e}")))?
            .install(body),
        None => body(),
    };
    if let Err(e) = &result {
        if !matches!(e, CliError::Usage(_)) {
            run.partial(format!("aborted: {e}"));
        } else {
            return Err(result.unwrap_err());
        }
    }
    let path = run.finish()?;
    let outputs = serde_json::from_slice::<RunManifest>(&std::fs::read(&path)?).map(|m| m.outputs).unwrap_or_default();
    eprintln!("wrote {}", path.display());
    result.map(|_| outputs)
}

fn execute(cli: &Cli, loaded: &Option<(Source, ExperimentConfig)>, seed: u64, run: &mut Run) -> Result<(), CliError> {
    match &cli.command {
        Command::Trace => commands::trace(need(loaded)?, seed, run),
        Command::Gg => commands::gg(need(loaded)?, seed, run),
        Command::Entropy => commands::entropy(need(loaded)?, seed, cli.budget, run),
        Command::Farey { query: None } => commands::farey(need(loaded)?, cli.budget, run),
        Command::Farey { query: Some(q) } => {
            let (query, turns) = match q {
                FareyCmd::Dist { a, b } => (FareyQuery::Distance { a: commands::parse_slope(a)?, b: commands::parse_slope(b)? }, None),
                FareyCmd::Tau { matrix, p_max } => (FareyQuery::Tau { matrix: commands::parse_matrix(matrix)?, p_max: *p_max }, None),
                FareyCmd::Qm { turns, matrix, homogenize } => (
                    FareyQuery::Qm { qm: "turns".into(), matrix: commands::parse_matrix(matrix)?, homogenize: *homogenize },
                    Some(commands::parse_ints(turns)?),
                ),
            };
            if let Some(t) = &turns {
                if t.is_empty() || t.contains(&0) {
                    return Err(CliError::Usage("turns must be nonzero".into()));
                }
            }
            let spec_of = |_: &str| qmlab::quasimorphism::turn_qm(turns.as_deref().unwrap_or(&[]));
            commands::farey_queries(std::slice::from_ref(&query), &spec_of, cli.budget, run)?;
            Ok(())
        }
        Command::Norms { what: NormsCmd::Bound } => commands::norms_bound(need(loaded)?, seed, run),
        Command::Norms { what: NormsCmd::Embed { m, k } } => {
            let ks = k.iter().map(|s| commands::parse_ints(s)).collect::<Result<Vec<_>, _>>()?;
            commands::norms_embed(need(loaded)?, seed, *m, &ks, run)
        }
        Command::Verify { full } => {
            let full = *full || loaded.as_ref().and_then(|c| c.1.verify.as_ref()).is_some_and(|v| v.full);
            commands::verify(seed, full, run)
        }
        Command::Validate | Command::Replay { .. } => unreachable!(),
    }
}

fn validate(cli: &Cli) -> Result<Vec<FileDigest>, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("validate needs --config".into()))?;
    let text = std::fs::read_to_string(path)?;
    let diags = match config::parse(&text) {
        Ok(cfg) => cfg.check(),
        Err(d) => d,
    };
    for d in &diags {
        println!("{d}");
    }
    if diags.iter().any(|d| !d.warning) {
        return Err(CliError::Invalid(Vec::new()));
    }
    println!("{}: ok", path.display());
    Ok(Vec::new())
}

fn replay(cli: &Cli, manifest: &Path) -> Result<Vec<FileDigest>, CliError> {
    let m: RunManifest = serde_json::from_slice(&std::fs::read(manifest)?).map_err(|e| CliError::Usage(format!("unreadable manifest: {e}")))?;
    let mut args: Vec<String> = vec!["qmlab".into()];
    let mut it = m.subcommand.iter();
    // Drop --config and --out: the config comes from the manifest text.
    while let Some(a) = it.next() {
        match a.as_str() {
            "--config" | "--out" => {
                it.next();
            }
            s if s.starts_with("--config=") || s.starts_with("--out=") => {}
            _ => args.push(a.clone()),
        }
    }
    let out = cli.out.clone().unwrap_or_else(|| manifest.parent().unwrap_or(Path::new(".")).join("replay"));
    args.push("--out".into());
    args.push(out.display().to_string());
    let inner = Cli::try_parse_from(&args).map_err(|e| CliError::Usage(format!("manifest command does not parse: {e}")))?;
    let preset = (!m.config_toml.is_empty()).then(|| Source { path: m.config_path.clone(), text: m.config_toml.clone(), from_file: false });
    if preset.is_some() && sha256_hex(m.config_toml.as_bytes()) != m.config_sha256 {
        return Err(CliError::Failed("manifest config text does not match its digest".into()));
    }
    let outputs = dispatch(&inner, args[1..].to_vec(), preset)?;
    let mut mismatched = Vec::new();
    for o in &m.outputs {
        match outputs.iter().find(|n| n.file == o.file) {
            Some(n) if n.sha256 == o.sha256 => {}
            _ => mismatched.push(o.file.clone()),
        }
    }
    if mismatched.is_empty() {
        println!("replay reproduced {} outputs", m.outputs.len());
        Ok(outputs)
    } else {
        Err(CliError::Failed(format!("replay differs in {}", mismatched.join(", "))))
    }
}
