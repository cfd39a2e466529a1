//! The `pcpm` command-line front end.
//!
//! Every command stages its outputs and commits them together with a
//! `<stem>.manifest.json` run record, so a failed run writes nothing. Exit
//! codes are 0 on success, 2 for usage errors and 3 for runtime failures.
//! The default output directory is `$PCPM_OUT_DIR`, else `pcpm-out`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_curve, CapacityConfig};
use crate::codec::{
    complexity_report, labeling_for, measure_curve, write_error_csv, CodedSchemeConfig, DecoderSizes, HarnessConfig,
    Mode, Transceiver,
};
use crate::io::{read_json, OutputSet, RunManifest};
use crate::mapping::{
    analytic_clusters, check_conditions, cluster_and_label, default_max_len, pairwise_edge_metrics, ClusterMode,
    DEFAULT_PROBE_DEPTH, DEFAULT_TABLE_SNR_DB,
};
use crate::search::{
    best_scheme_table, design_coded_scheme, design_from_candidates, emit_tables, enumerate_schemes,
    evaluate_candidates, grid, load_candidates, table7_row, table7_rows, Criterion, EvalConfig, SearchBounds,
    TableFormat, COMPLEXITY_BUCKETS,
};
use crate::trellis::{Labeling, LabelingKind, Trellis};
use crate::waveform::{bandwidth_at_fraction, estimate_psd, CpmScheme, ModIndex, PsdConfig, Pulse, PulseShape};
use crate::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PCPM_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "pcpm-out";
/// Samples per symbol of the trellis waveforms.
const TRELLIS_NS: usize = 8;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "pcpm", version, about = "CPM capacity, mapping and coded-scheme toolkit")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Master seed of every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    #[serde(skip)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Joint and pragmatic capacity curves of one scheme.
    Capacity(CapacityArgs),
    /// Optimized bit labeling of the CPE trellis and the optimality conditions.
    OptimizeMapping(MappingArgs),
    /// Best scheme per power point and complexity bucket.
    Search(SearchArgs),
    /// Pick the CPM scheme and code rate for a target spectral efficiency.
    Design(DesignArgs),
    /// BER/FER of a coded SC-CPM or P-CPM configuration.
    Simulate(SimulateArgs),
    /// Power spectral density and normalized symbol rate.
    Psd(PsdArgs),
    /// Receiver complexity of a design row.
    Complexity(ComplexityArgs),
    /// Re-run the command recorded in a manifest and compare output digests.
    Rerun(RerunArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SchemeArgs {
    /// Bits per symbol.
    #[arg(long)]
    pub m: u32,
    /// Modulation index as a reduced fraction Q/P.
    #[arg(long)]
    pub h: ModIndex,
    /// Pulse length in symbols.
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long, default_value = "rec")]
    pub pulse: PulseShape,
}

impl SchemeArgs {
    pub fn scheme(&self) -> Result<CpmScheme> {
        CpmScheme::new(self.m, self.h.q, self.h.p, Pulse::new(self.pulse, self.l))
    }
}

/// An inclusive grid `lo:step:hi`, or a single value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub step: f64,
    pub hi: f64,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.lo == self.hi {
            return Ok(vec![self.lo]);
        }
        grid(self.lo, self.hi, self.step)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("bad number {t:?} in grid {s:?}")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let g = match parts.as_slice() {
            [x] => {
                let x = num(x)?;
                GridSpec { lo: x, step: 1.0, hi: x }
            }
            [lo, step, hi] => GridSpec {
                lo: num(lo)?,
                step: num(step)?,
                hi: num(hi)?,
            },
            _ => return Err(Error::InvalidInput(format!("grid {s:?} should be lo:step:hi"))),
        };
        if !(g.step > 0.0) || g.hi < g.lo {
            return Err(Error::InvalidInput(format!("grid {s:?} needs step > 0 and hi >= lo")));
        }
        Ok(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelingArg {
    Rimoldi,
    Optimized,
    Clustered,
}

impl From<LabelingArg> for LabelingKind {
    fn from(l: LabelingArg) -> Self {
        match l {
            LabelingArg::Rimoldi => LabelingKind::RimoldiNatural,
            LabelingArg::Optimized => LabelingKind::OptimizedAnalytic,
            LabelingArg::Clustered => LabelingKind::ClusteredFallback,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Es/N0 grid in dB.
    #[arg(long, allow_hyphen_values = true, default_value = "-5:1:20")]
    pub snr: GridSpec,
    /// Add the pragmatic capacity under `--labeling`.
    #[arg(long)]
    pub pragmatic: bool,
    #[arg(long, value_enum, default_value = "optimized")]
    pub labeling: LabelingArg,
    #[arg(long, default_value_t = 10_000)]
    pub symbols: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Normalized symbol rate; estimated from the PSD when absent.
    #[arg(long)]
    pub rs: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingMethod {
    Analytic,
    Clustered,
}

#[derive(Debug, Args, Serialize)]
pub struct MappingArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, value_enum, default_value = "analytic")]
    pub method: MappingMethod,
    /// Es/N0 (dB) of the pairwise metric table used by clustering.
    #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_TABLE_SNR_DB)]
    pub table_snr: f64,
    /// Complete the clustering heuristically when the exact merge is blocked.
    #[arg(long)]
    pub best_effort: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Symbols per capacity trial.
    #[arg(long, default_value_t = 10_000)]
    pub symbols: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Coarse Es/N0 grid of the capacity curves.
    #[arg(long, allow_hyphen_values = true, default_value = "-5:1:20")]
    pub es_grid: GridSpec,
    /// Reuse candidates written by an earlier `search`.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
}

impl EvalArgs {
    fn config(&self, seed: u64) -> Result<EvalConfig> {
        Ok(EvalConfig {
            capacity: CapacityConfig {
                block_symbols: self.symbols,
                trials: self.trials,
                seed,
                trim: None,
            },
            psd: PsdConfig {
                seed,
                ..PsdConfig::default()
            },
            es_grid: self.es_grid.points()?,
            ..EvalConfig::default()
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long, default_value = "rec")]
    pub pulse: PulseShape,
    /// Complexity budget `Y`.
    #[arg(long, default_value_t = 64.0)]
    pub budget: f64,
    #[arg(long, default_value = "joint")]
    pub criterion: Criterion,
    /// P_T/N0 grid in dB.
    #[arg(long, allow_hyphen_values = true, default_value = "-5:0.5:20")]
    pub pt: GridSpec,
    #[arg(long, default_value = "both")]
    pub format: TableFormat,
    /// Enumerate every Q coprime to P instead of h = 1/P.
    #[arg(long)]
    pub all_q: bool,
    #[arg(long, default_value_t = 3)]
    pub max_m: u32,
    #[arg(long = "max-L", default_value_t = 4)]
    pub max_l: usize,
    #[command(flatten)]
    pub eval: EvalArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DesignArgs {
    /// sccpm or pcpm.
    #[arg(long)]
    pub mode: Mode,
    /// Target spectral efficiency in bits/s/Hz.
    #[arg(long)]
    pub ct: f64,
    #[arg(long, default_value = "rec")]
    pub pulse: PulseShape,
    #[arg(long, default_value_t = 64.0)]
    pub budget: f64,
    /// Information bits per frame of the emitted transceiver configuration.
    #[arg(long, default_value_t = 1000)]
    pub info_bits: usize,
    #[command(flatten)]
    pub eval: EvalArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Transceiver configuration JSON.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Design row such as rec-1.0, used with `--mode`.
    #[arg(long, requires = "mode")]
    pub preset: Option<String>,
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Eb/N0 grid in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub ebn0: GridSpec,
    /// Override the frame length `K`.
    #[arg(long)]
    pub info_bits: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub frame_errors: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_frames: usize,
    /// Full-scale run: K = 9840 and enough frames to resolve FER 1e-4.
    #[arg(long)]
    pub long_run: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PsdArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// In-band power fraction defining the bandwidth.
    #[arg(long, default_value_t = 0.99)]
    pub fraction: f64,
    #[arg(long, default_value_t = 100_000)]
    pub symbols: usize,
    /// Samples per symbol.
    #[arg(long, default_value_t = 16)]
    pub ns: usize,
    #[arg(long, default_value_t = 256)]
    pub segment: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ComplexityArgs {
    /// Design row such as rec-1.0; all rows when absent.
    #[arg(long)]
    pub table7_row: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct RerunArgs {
    pub manifest: PathBuf,
}

/// Parses `args` (program name first), runs the command and maps the outcome
/// to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        // a second build in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &recorded) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Entry point of the `pcpm` binary.
pub fn main() -> ExitCode {
    run(std::env::args_os())
}

/// Invalid user input is a usage error; everything else is a runtime failure.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidScheme(_) | Error::InvalidInput(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// `m2-h1_5-L2-rec` style tag safe for file names.
fn file_tag(scheme: &CpmScheme) -> String {
    scheme.tag().replace('/', "_")
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

struct Run<'a> {
    cli: &'a Cli,
    manifest: RunManifest,
    out: OutputSet,
}

impl<'a> Run<'a> {
    fn new(cli: &'a Cli, name: &str, argv: &[String]) -> Result<Self> {
        let parameters = serde_json::json!({
            "argv": argv,
            "resolved": serde_json::to_value(cli)?,
        });
        Ok(Run {
            cli,
            manifest: RunManifest::new(name, parameters, cli.seed, cli.threads),
            out: OutputSet::new(),
        })
    }

    fn stem(&self, name: &str) -> PathBuf {
        out_dir(self.cli).join(name)
    }

    /// Commits the staged outputs and `<stem>.manifest.json`.
    fn commit(mut self, stem: &Path) -> Result<()> {
        self.manifest.finish(&self.out);
        let mut out = self.out;
        out.add_json(with_ext(stem, ".manifest.json"), &self.manifest)?;
        for d in out.commit()? {
            info!("wrote {} ({} bytes)", d.path.display(), d.bytes);
        }
        Ok(())
    }
}

fn execute(cli: &Cli, argv: &[String]) -> Result<()> {
    match &cli.command {
        Command::Capacity(a) => cmd_capacity(cli, argv, a),
        Command::OptimizeMapping(a) => cmd_optimize_mapping(cli, argv, a),
        Command::Search(a) => cmd_search(cli, argv, a),
        Command::Design(a) => cmd_design(cli, argv, a),
        Command::Simulate(a) => cmd_simulate(cli, argv, a),
        Command::Psd(a) => cmd_psd(cli, argv, a),
        Command::Complexity(a) => cmd_complexity(cli, argv, a),
        Command::Rerun(a) => cmd_rerun(cli, a),
    }
}

fn cmd_capacity(cli: &Cli, argv: &[String], a: &CapacityArgs) -> Result<()> {
    let scheme = a.scheme.scheme()?;
    let snr = a.snr.points()?;
    if a.symbols == 0 || a.trials == 0 {
        return Err(Error::InvalidInput("--symbols and --trials must be positive".into()));
    }
    let mut run = Run::new(cli, "capacity", argv)?;
    let trellis = Trellis::build(&scheme, TRELLIS_NS)?;
    let labeling = if a.pragmatic {
        Some(labeling_for(&trellis, a.labeling.into())?)
    } else {
        None
    };
    let rs = match a.rs {
        Some(rs) => rs,
        None => {
            let psd = PsdConfig {
                seed: cli.seed,
                ..PsdConfig::default()
            };
            crate::waveform::normalized_symbol_rate(&scheme, crate::search::POWER_FRACTION, &psd)?
        }
    };
    let cfg = CapacityConfig {
        block_symbols: a.symbols,
        trials: a.trials,
        seed: cli.seed,
        trim: None,
    };
    let curve = capacity_curve(&trellis, labeling.as_ref(), &snr, rs, &cfg)?;
    let stem = run.stem(&format!("capacity-{}", file_tag(&scheme)));
    run.out.add_with(with_ext(&stem, ".csv"), |b| curve.write_csv(b))?;
    run.out.add_json(with_ext(&stem, ".json"), &curve)?;
    println!("{scheme}: {} points, Rs={rs:.4}", curve.points.len());
    run.commit(&stem)
}

#[derive(Serialize)]
struct MappingOutput<'a> {
    method: MappingMethod,
    clustering: &'a crate::mapping::Clustering,
    trellis: crate::trellis::TrellisDump,
}

fn write_labeling_csv(labeling: &Labeling, trellis: &Trellis, w: &mut Vec<u8>) -> Result<()> {
    writeln!(w, "edge,start,input,end,label")?;
    for (e, d) in trellis.dump(Some(labeling)).edges.iter().enumerate() {
        writeln!(w, "{e},{},{},{},{}", d.start, d.input, d.end, d.label.unwrap_or_default())?;
    }
    Ok(())
}

fn cmd_optimize_mapping(cli: &Cli, argv: &[String], a: &MappingArgs) -> Result<()> {
    let scheme = a.scheme.scheme()?;
    let mut run = Run::new(cli, "optimize-mapping", argv)?;
    let trellis = Trellis::build(&scheme, TRELLIS_NS)?;
    let stem = run.stem(&format!("mapping-{}-{}", file_tag(&scheme), serde_json::to_value(a.method)?.as_str().unwrap_or("")));
    let report = check_conditions(&scheme, default_max_len(scheme.alphabet_size()))?;
    run.out.add_json(with_ext(&stem, ".conditions.json"), &report)?;
    let clustering = match a.method {
        MappingMethod::Analytic => match analytic_clusters(&trellis) {
            Ok(c) => Some(c),
            Err(Error::ConditionsNotMet(_)) => None,
            Err(e) => return Err(e),
        },
        MappingMethod::Clustered => {
            let table = pairwise_edge_metrics(&trellis, a.table_snr, DEFAULT_PROBE_DEPTH)?;
            let mode = if a.best_effort {
                ClusterMode::BestEffort
            } else {
                ClusterMode::Strict
            };
            Some(cluster_and_label(&table, &trellis, mode)?)
        }
    };
    match &clustering {
        Some(c) => {
            let labeling = c.labeling(&trellis)?;
            run.out
                .add_with(with_ext(&stem, ".labeling.csv"), |b| write_labeling_csv(&labeling, &trellis, b))?;
            run.out.add_json(
                with_ext(&stem, ".labeling.json"),
                &MappingOutput {
                    method: a.method,
                    clustering: c,
                    trellis: trellis.dump(Some(&labeling)),
                },
            )?;
            println!("{scheme}: {} clusters, partition {:?}", c.clusters.len(), c.partition());
        }
        None => {
            println!("{scheme}: closed-form clusters not applicable");
            for f in &report.failures {
                println!("  condition failed: {f}");
            }
        }
    }
    run.commit(&stem)
}

fn bounds(a: &SearchArgs) -> SearchBounds {
    SearchBounds {
        max_m: a.max_m,
        max_l: a.max_l,
        all_q: a.all_q,
        ..SearchBounds::default()
    }
}

fn cmd_search(cli: &Cli, argv: &[String], a: &SearchArgs) -> Result<()> {
    let pts = a.pt.points()?;
    let cfg = a.eval.config(cli.seed)?;
    let mut run = Run::new(cli, "search", argv)?;
    let cands = match &a.eval.candidates {
        Some(p) => load_candidates(p)?,
        None => {
            let mut c = enumerate_schemes(a.budget, a.pulse, &bounds(a));
            if c.is_empty() {
                return Err(Error::InvalidInput(format!("no scheme fits the complexity budget {}", a.budget)));
            }
            evaluate_candidates(&mut c, a.criterion, &cfg)?;
            c
        }
    };
    let buckets: Vec<f64> = COMPLEXITY_BUCKETS.iter().copied().filter(|&b| b <= a.budget).collect();
    let rows = best_scheme_table(&cands, &pts, &buckets);
    let stem = run.stem(&format!("search-{}-{}-y{}", a.pulse, a.criterion, a.budget));
    emit_tables(&rows, &cands, a.format, &stem, &mut run.out)?;
    println!("{} candidates, {} table rows", cands.len(), rows.len());
    run.commit(&stem)
}

#[derive(Serialize)]
struct DesignOutput<'a> {
    design: &'a crate::search::DesignResult,
    config: CodedSchemeConfig,
}

fn cmd_design(cli: &Cli, argv: &[String], a: &DesignArgs) -> Result<()> {
    if !(a.ct > 0.0) {
        return Err(Error::InvalidInput("--ct must be positive".into()));
    }
    let cfg = a.eval.config(cli.seed)?;
    let mut run = Run::new(cli, "design", argv)?;
    let d = match &a.eval.candidates {
        Some(p) => design_from_candidates(a.mode, a.ct, &load_candidates(p)?, cfg.refine_step)?,
        None => design_coded_scheme(a.mode, a.ct, a.pulse, a.budget, &SearchBounds::default(), &cfg)?,
    };
    println!("{d}");
    let s = &d.scheme;
    match (d.n_o, d.n_i, d.r_sccc) {
        (Some(o), Some(i), _) => println!("m={}, h={}/{}, L={}, {o}/{i}", s.m, s.q, s.p, s.pulse.length),
        (_, _, Some(r)) => println!("m={}, h={}/{}, L={}, {r:.3}", s.m, s.q, s.p, s.pulse.length),
        _ => {}
    }
    let mode_tag = match a.mode {
        Mode::ScCpm => "sccpm",
        Mode::PCpm => "pcpm",
    };
    let stem = run.stem(&format!("design-{mode_tag}-{}-{}", a.pulse, a.ct));
    run.out.add_with(with_ext(&stem, ".csv"), |w| {
        writeln!(w, "mode,target,m,h,l,pulse,rs,r_b,c,pt_n0_db,es_n0_db,eb_n0_db,code_rate,n_o,n_i,r_sccc")?;
        let opt = |x: Option<String>| x.unwrap_or_default();
        writeln!(
            w,
            "{mode_tag},{},{},{}/{},{},{},{},{},{},{},{},{},{},{},{},{}",
            d.target,
            s.m,
            s.q,
            s.p,
            s.pulse.length,
            s.pulse.shape,
            d.rs,
            d.r_b,
            d.c,
            d.pt_n0_db,
            d.es_n0_db,
            d.eb_n0_db,
            d.code_rate,
            opt(d.n_o.map(|x| x.to_string())),
            opt(d.n_i.map(|x| x.to_string())),
            opt(d.r_sccc.map(|x| x.to_string())),
        )?;
        Ok(())
    })?;
    run.out.add_json(
        with_ext(&stem, ".json"),
        &DesignOutput {
            design: &d,
            config: d.config(a.info_bits),
        },
    )?;
    run.commit(&stem)
}

/// Frame length and stopping rule of the full-scale experiment.
pub const LONG_RUN_INFO_BITS: usize = 9840;
const LONG_RUN_FRAME_ERRORS: usize = 100;
const LONG_RUN_MAX_FRAMES: usize = 1_000_000;

fn simulate_config(a: &SimulateArgs) -> Result<CodedSchemeConfig> {
    let mut config = match (&a.config, &a.preset) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str::<CodedSchemeConfig>(&text)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?
        }
        (None, Some(name)) => {
            let row = table7_row(name)?;
            match a.mode {
                Some(Mode::ScCpm) => row.sc_config(1000),
                Some(Mode::PCpm) => row.p_config(1000),
                None => return Err(Error::InvalidInput("--preset needs --mode".into())),
            }
        }
        (None, None) => return Err(Error::InvalidInput("give --config or --preset".into())),
    };
    if a.long_run {
        config.info_bits = LONG_RUN_INFO_BITS;
    }
    if let Some(k) = a.info_bits {
        config.info_bits = k;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_simulate(cli: &Cli, argv: &[String], a: &SimulateArgs) -> Result<()> {
    let config = simulate_config(a)?;
    let ebn0 = a.ebn0.points()?;
    let harness = if a.long_run {
        HarnessConfig {
            target_frame_errors: LONG_RUN_FRAME_ERRORS,
            max_frames: LONG_RUN_MAX_FRAMES,
            seed: cli.seed,
            ..HarnessConfig::default()
        }
    } else {
        HarnessConfig {
            target_frame_errors: a.frame_errors,
            max_frames: a.max_frames,
            seed: cli.seed,
            ..HarnessConfig::default()
        }
    };
    let mut run = Run::new(cli, "simulate", argv)?;
    let tx = Transceiver::new(config.clone())?;
    let points = measure_curve(&tx, &ebn0, &harness)?;
    for p in &points {
        println!(
            "Eb/N0={:.2} dB BER={:.3e} FER={:.3e} ({} frames)",
            p.eb_n0_db, p.ber, p.fer, p.frames
        );
    }
    let mode_tag = match config.mode {
        Mode::ScCpm => "sccpm",
        Mode::PCpm => "pcpm",
    };
    let stem = run.stem(&format!("simulate-{mode_tag}-{}-k{}", file_tag(&config.scheme), config.info_bits));
    run.out.add_with(with_ext(&stem, ".csv"), |b| write_error_csv(&points, b))?;
    run.out.add_json(
        with_ext(&stem, ".json"),
        &serde_json::json!({ "config": config, "harness": harness, "points": points }),
    )?;
    run.commit(&stem)
}

fn cmd_psd(cli: &Cli, argv: &[String], a: &PsdArgs) -> Result<()> {
    let scheme = a.scheme.scheme()?;
    if !(a.fraction > 0.0 && a.fraction < 1.0) {
        return Err(Error::InvalidInput("--fraction must lie in (0, 1)".into()));
    }
    let cfg = PsdConfig {
        num_symbols: a.symbols,
        ns: a.ns,
        segment_symbols: a.segment,
        seed: cli.seed,
        tilted: false,
    };
    let mut run = Run::new(cli, "psd", argv)?;
    let psd = estimate_psd(&scheme, &cfg)?;
    let bandwidth = bandwidth_at_fraction(&psd, a.fraction)?;
    let rs = 1.0 / (scheme.m as f64 * bandwidth);
    println!("{scheme}: B={bandwidth:.4} Rs={rs:.4}");
    let stem = run.stem(&format!("psd-{}", file_tag(&scheme)));
    run.out.add_with(with_ext(&stem, ".csv"), |b| psd.write_csv(b))?;
    run.out.add_json(
        with_ext(&stem, ".json"),
        &serde_json::json!({
            "scheme": scheme,
            "config": cfg,
            "fraction": a.fraction,
            "bandwidth": bandwidth,
            "rs": rs,
            "psd": psd,
        }),
    )?;
    run.commit(&stem)
}

#[derive(Serialize)]
struct ComplexityRow {
    row: String,
    y_sccc: u64,
    y_cpm: u64,
    y_p_cpm: u64,
    y_sc_cpm: u64,
    ratio: f64,
    report: crate::codec::ComplexityReport,
}

fn cmd_complexity(cli: &Cli, argv: &[String], a: &ComplexityArgs) -> Result<()> {
    let rows = match &a.table7_row {
        Some(name) => vec![table7_row(name)?],
        None => table7_rows().to_vec(),
    };
    if a.iterations == 0 {
        return Err(Error::InvalidInput("--iterations must be positive".into()));
    }
    let sizes = DecoderSizes {
        iterations: a.iterations,
        ..DecoderSizes::default()
    };
    let mut run = Run::new(cli, "complexity", argv)?;
    let mut out = Vec::new();
    for r in rows {
        let report = complexity_report(&r.p_config(1000), &r.sc_config(1000), &sizes)?;
        let (y_sccc, y_cpm, y_p_cpm, y_sc_cpm, ratio) = report.rounded();
        println!("{}: {y_p_cpm} / {y_sc_cpm} / {ratio:.2}  ({report})", r.name());
        out.push(ComplexityRow {
            row: r.name(),
            y_sccc,
            y_cpm,
            y_p_cpm,
            y_sc_cpm,
            ratio,
            report,
        });
    }
    let stem = run.stem(&match &a.table7_row {
        Some(n) => format!("complexity-{}", n.to_ascii_lowercase()),
        None => "complexity".to_string(),
    });
    run.out.add_with(with_ext(&stem, ".csv"), |w| {
        writeln!(w, "row,y_sccc,y_cpm,y_p_cpm,y_sc_cpm,ratio")?;
        for r in &out {
            writeln!(w, "{},{},{},{},{},{:.2}", r.row, r.y_sccc, r.y_cpm, r.y_p_cpm, r.y_sc_cpm, r.ratio)?;
        }
        Ok(())
    })?;
    run.out.add_json(with_ext(&stem, ".json"), &out)?;
    run.commit(&stem)
}

/// Re-runs a manifest's command line into `--out` (or its original directory)
/// and reports whether every output is bit-identical.
fn cmd_rerun(cli: &Cli, a: &RerunArgs) -> Result<()> {
    let manifest: RunManifest = read_json(&a.manifest)?;
    let argv: Vec<String> = manifest.parameters["argv"]
        .as_array()
        .ok_or_else(|| Error::InvalidInput("manifest has no argv".into()))?
        .iter()
        .filter_map(|v| v.as_str().map(str::to_string))
        .collect();
    let mut args = vec!["pcpm".to_string()];
    let mut it = argv.iter();
    while let Some(x) = it.next() {
        if x == "--out" {
            it.next();
        } else if !x.starts_with("--out=") {
            args.push(x.clone());
        }
    }
    let dir = out_dir(cli);
    args.push("--out".into());
    args.push(dir.to_string_lossy().into_owned());
    let replay = Cli::try_parse_from(&args).map_err(|e| Error::InvalidInput(e.to_string()))?;
    if matches!(replay.command, Command::Rerun(_)) {
        return Err(Error::InvalidInput("refusing to rerun a rerun".into()));
    }
    let recorded: Vec<String> = args[1..].to_vec();
    execute(&replay, &recorded)?;
    let mut mismatches = 0;
    for o in &manifest.outputs {
        let name = o.path.file_name().unwrap_or_default();
        let bytes = std::fs::read(dir.join(name))?;
        if crate::io::sha256_hex(&bytes) != o.sha256 {
            mismatches += 1;
            eprintln!("differs: {}", name.to_string_lossy());
        }
    }
    if mismatches > 0 {
        return Err(Error::Design(format!("{mismatches} output(s) differ from the manifest")));
    }
    println!("all {} outputs reproduced", manifest.outputs.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_counts() {
        let g: GridSpec = "-2:0.5:12".parse().unwrap();
        assert_eq!(g.points().unwrap().len(), 29);
        assert_eq!("3".parse::<GridSpec>().unwrap().points().unwrap(), vec![3.0]);
        assert!("1:0:2".parse::<GridSpec>().is_err());
        assert!("2:1:1".parse::<GridSpec>().is_err());
        assert!("a:b".parse::<GridSpec>().is_err());
    }

    #[test]
    fn parses_scheme_flags() {
        let cli = Cli::try_parse_from(["pcpm", "capacity", "--m", "1", "--h", "1/2", "--L", "3", "--snr", "-2:0.5:12"])
            .unwrap();
        let Command::Capacity(a) = cli.command else { panic!() };
        assert_eq!(a.scheme.scheme().unwrap(), CpmScheme::new(1, 1, 2, Pulse::rec(3)).unwrap());
        assert!(Cli::try_parse_from(["pcpm", "capacity", "--m", "1", "--L", "3"]).is_err());
        assert!(Cli::try_parse_from(["pcpm", "capacity", "--m", "1", "--h", "0.5", "--L", "3"]).is_err());
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::InvalidScheme("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Design("x".into())), EXIT_RUNTIME);
    }
}
