//! The `ssamask` command line.
//!
//! Exit codes: 0 success, 1 invalid input or arguments, 2 verification mismatch.

pub mod verify;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use ssamask_core::anonymity::{mask_signal, MaskPlan, TrendSpec};
use ssamask_core::config::ConfigFile;
use ssamask_core::microdata::{
    apply_modified_signal, build_quantity_signal, load_microfile, DonorPolicy, GroupDefinition,
    Microfile, QuantitySignal,
};
use ssamask_core::ssa::{
    advise_grouping, decompose_series, default_window_length, reconstruct, Grouping,
};
use ssamask_core::{textio, Decomposition64, MaskPlan64, Series64, TrendSpec64};
use ssamask_service::report::{build_report, masked_signal_text, report_json};
use ssamask_service::SessionStore;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

pub const DEFAULT_PAIR_TOLERANCE: f64 = 0.1;
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(
    name = "ssamask",
    version,
    about = "Singular spectrum masking of microdata quantity signals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count group members per parameter value in a microfile.
    Signal {
        #[arg(long)]
        microfile: PathBuf,
        /// TOML with [microfile] and [group] sections.
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write grouped components and the singular spectrum of a series.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        window: WindowArg,
        /// Subsets like "1,2|3,4|5-20"; one subset per eigentriple when omitted.
        #[arg(long)]
        grouping: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the singular spectrum with pair and noise hints.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        window: WindowArg,
        #[arg(long, default_value_t = DEFAULT_PAIR_TOLERANCE)]
        pair_tolerance: f64,
        #[arg(long, default_value_t = DEFAULT_NOISE_FLOOR)]
        noise_floor: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replace the trend of a signal and write the masked signal, diagnostics and report.
    Mask(MaskArgs),
    /// Rewrite a microfile so that its signal equals a given one.
    Apply {
        #[arg(long)]
        microfile: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Target signal in the columnar text format.
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        donor_policy: Option<DonorPolicy>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the bundled reference fixtures against a fresh computation.
    VerifyPaper {
        #[arg(long, default_value = "fixtures/reference")]
        fixtures: PathBuf,
    },
    /// Run the session service on 127.0.0.1.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

#[derive(Debug, Args)]
pub struct WindowArg {
    /// Window length L; defaults to ⌊N/2⌋.
    #[arg(short = 'L', long = "window")]
    pub window: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    /// Series file; alternatively --microfile with --config.
    #[arg(long, conflicts_with = "microfile")]
    pub input: Option<PathBuf>,
    #[arg(long, requires = "config")]
    pub microfile: Option<PathBuf>,
    /// TOML with any of [microfile], [group], [plan], [apply]. Flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub window: WindowArg,
    #[arg(long)]
    pub grouping: Option<String>,
    /// 1-based position of the trend subset in the grouping.
    #[arg(long)]
    pub trend_subset: Option<usize>,
    /// Replacement trend values in the columnar text format.
    #[arg(long, conflicts_with = "trend_strategy")]
    pub trend_file: Option<PathBuf>,
    /// "scale <factor>" or "plateau <cap> <half_width>".
    #[arg(long)]
    pub trend_strategy: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub donor_policy: Option<DonorPolicy>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_INVALID
                }
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_INVALID
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    match command {
        Command::Signal {
            microfile,
            config,
            out: path,
        } => {
            let cfg = ConfigFile::load(&config)?;
            let (mf, group) = load_backing(&microfile, &cfg)?;
            let signal = build_quantity_signal(&mf, &group)?;
            emit(path.as_deref(), &signal_text(&signal), out)?;
        }
        Command::Decompose {
            input,
            window,
            grouping,
            out_dir,
        } => {
            let series = read_series(&input)?;
            let dec = decompose(&series, window.window)?;
            let grouping = match grouping {
                Some(text) => text.parse::<Grouping>()?,
                None => Grouping::new((1..=dec.rank()).map(|i| vec![i]).collect(), None)?,
            };
            let set = reconstruct(&dec, &grouping)?;
            std::fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            let provenance = decompose_provenance(dec.window_length());
            for (name, text) in textio::write_components(&set, &provenance) {
                write_file(&out_dir.join(name), &text)?;
            }
            write_file(
                &out_dir.join("spectrum.txt"),
                &spectrum_text(
                    &dec,
                    series.label(),
                    DEFAULT_PAIR_TOLERANCE,
                    DEFAULT_NOISE_FLOOR,
                ),
            )?;
        }
        Command::Spectrum {
            input,
            window,
            pair_tolerance,
            noise_floor,
            out: path,
        } => {
            let series = read_series(&input)?;
            let dec = decompose(&series, window.window)?;
            emit(
                path.as_deref(),
                &spectrum_text(&dec, series.label(), pair_tolerance, noise_floor),
                out,
            )?;
        }
        Command::Mask(args) => mask(args, err)?,
        Command::Apply {
            microfile,
            config,
            signal,
            seed,
            donor_policy,
            out: path,
        } => {
            let cfg = ConfigFile::load(&config)?;
            let (mf, group) = load_backing(&microfile, &cfg)?;
            let target = read_series(&signal)?;
            let current = build_quantity_signal(&mf, &group)?;
            let target = QuantitySignal::new(
                QuantitySignal::from_values(target.values(), target.label())?
                    .counts()
                    .to_vec(),
                current.parameter_labels().to_vec(),
                target.label(),
            )?;
            let seed = seed
                .or(cfg.seed())
                .ok_or_else(|| anyhow!("apply needs --seed or [apply] seed"))?;
            let policy = donor_policy.or(cfg.donor_policy()).unwrap_or_default();
            let modified = apply_modified_signal(&mf, &group, &target, seed, policy)?;
            write_file(&path, &modified.to_delimited(cfg.microfile()?.delimiter)?)?;
        }
        Command::VerifyPaper { fixtures } => {
            let report = verify::verify(&fixtures)?;
            for check in &report.checks {
                writeln!(out, "{check}")?;
            }
            let failed = report
                .checks
                .iter()
                .filter(|c| c.outcome == verify::Outcome::Fail)
                .count();
            writeln!(out, "{} checks, {failed} failed", report.checks.len())?;
            return Ok(if report.passed() {
                EXIT_OK
            } else {
                EXIT_MISMATCH
            });
        }
        Command::Serve { port } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = ssamask_service::http::bind(port).await?;
                writeln!(out, "listening on http://{}", listener.local_addr()?)?;
                out.flush()?;
                ssamask_service::http::serve(listener, Arc::new(SessionStore::new())).await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(EXIT_OK)
}

fn mask(args: MaskArgs, err: &mut dyn Write) -> anyhow::Result<()> {
    let cfg = args.config.as_deref().map(ConfigFile::load).transpose()?;
    let backing = match &args.microfile {
        Some(path) => Some(load_backing(
            path,
            cfg.as_ref().expect("clap requires --config"),
        )?),
        None => None,
    };
    let signal = match (&args.input, &backing) {
        (Some(path), None) => {
            let series = read_series(path)?;
            QuantitySignal::from_values(series.values(), series.label())?
        }
        (None, Some((mf, group))) => build_quantity_signal(mf, group)?,
        _ => bail!("give either --input or --microfile with --config"),
    };
    let plan = resolve_plan(&args, cfg.as_ref(), signal.len())?;
    let outcome = mask_signal(&signal, &plan, None)?;
    for clamp in &outcome.diagnostics.clamped {
        writeln!(
            err,
            "warning: position {} rounded below zero ({}), clamped to 0",
            clamp.position, clamp.unrounded
        )?;
    }

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    write_file(
        &args.out_dir.join("masked.txt"),
        &masked_signal_text(&outcome),
    )?;
    write_file(
        &args.out_dir.join("diagnostics.txt"),
        &outcome.diagnostics.to_key_value(),
    )?;
    let report = build_report(&signal, &plan, &outcome)?;
    write_file(&args.out_dir.join("report.json"), &report_json(&report))?;

    if let Some((mf, group)) = &backing {
        let cfg = cfg.as_ref().expect("microfile input has a config");
        let seed = args
            .seed
            .or(cfg.seed())
            .ok_or_else(|| anyhow!("microfile output needs --seed or [apply] seed"))?;
        let policy = args.donor_policy.or(cfg.donor_policy()).unwrap_or_default();
        let modified = apply_modified_signal(mf, group, &outcome.masked, seed, policy)?;
        write_file(
            &args.out_dir.join("microfile.csv"),
            &modified.to_delimited(cfg.microfile()?.delimiter)?,
        )?;
    }
    Ok(())
}

/// Flags override the config's `[plan]`; window defaults to ⌊N/2⌋, trend subset to 1.
fn resolve_plan(args: &MaskArgs, cfg: Option<&ConfigFile>, n: usize) -> anyhow::Result<MaskPlan64> {
    let base = match cfg {
        Some(c) if c.plan.is_some() => Some(c.mask_plan(n)?),
        _ => None,
    };
    let window = args
        .window
        .window
        .or(base.as_ref().map(|p| p.window_length()))
        .unwrap_or_else(|| default_window_length(n));
    let grouping = match (&args.grouping, &base) {
        (Some(text), _) => text.parse::<Grouping>()?,
        (None, Some(p)) => p.grouping().clone(),
        (None, None) => bail!("no grouping: pass --grouping or a config with [plan]"),
    };
    let trend_subset = match (args.trend_subset, &base) {
        (Some(0), _) => bail!("--trend-subset is 1-based"),
        (Some(t), _) => t - 1,
        (None, Some(p)) if args.grouping.is_none() => p.trend_position(),
        (None, _) => 0,
    };
    let trend: TrendSpec64 = match (&args.trend_file, &args.trend_strategy, &base) {
        (Some(path), _, _) => TrendSpec::Explicit {
            values: read_series_values(path)?,
        },
        (None, Some(text), _) => text.parse()?,
        (None, None, Some(p)) => p.replacement_trend().clone(),
        (None, None, None) => bail!(
            "no replacement trend: pass --trend-file, --trend-strategy or a config with [plan]"
        ),
    };
    Ok(MaskPlan::new(
        window,
        grouping.with_trend(Some(trend_subset))?,
        trend,
    )?)
}

fn load_backing(path: &Path, cfg: &ConfigFile) -> anyhow::Result<(Microfile, GroupDefinition)> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mf = load_microfile(file, cfg.microfile()?)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok((mf, cfg.group_definition()?))
}

fn read_series(path: &Path) -> anyhow::Result<Series64> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    textio::read_series(&text).with_context(|| format!("reading {}", path.display()))
}

fn read_series_values(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(textio::read_values::<f64>(&text)
        .with_context(|| format!("reading {}", path.display()))?
        .values)
}

fn decompose(series: &Series64, window: Option<usize>) -> anyhow::Result<Decomposition64> {
    let l = window.unwrap_or_else(|| default_window_length(series.len()));
    Ok(decompose_series(series, l)?)
}

pub fn decompose_provenance(window: usize) -> String {
    format!("ssamask decompose, L={window}")
}

/// Singular values with the advisory as header fields.
pub fn spectrum_text(
    dec: &Decomposition64,
    label: &str,
    pair_tolerance: f64,
    noise_floor: f64,
) -> String {
    let adv = advise_grouping(dec, pair_tolerance, noise_floor);
    let join = |v: &[usize]| {
        v.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut headers = BTreeMap::new();
    headers.insert("window_length".to_string(), dec.window_length().to_string());
    headers.insert("rank".to_string(), dec.rank().to_string());
    headers.insert(
        "pairs".to_string(),
        adv.pairs
            .iter()
            .map(|(a, b)| format!("{a},{b}"))
            .collect::<Vec<_>>()
            .join(" "),
    );
    headers.insert("trend_candidates".to_string(), join(&adv.trend_candidates));
    headers.insert(
        "noise_cutoff".to_string(),
        adv.noise_cutoff.map_or_else(String::new, |c| c.to_string()),
    );
    textio::write_values_with(
        &format!("singular values of {label}"),
        &dec.singular_values(),
        "ssamask spectrum",
        &headers,
    )
}

pub fn signal_text(signal: &QuantitySignal) -> String {
    let values: Vec<f64> = signal.counts().iter().map(|&c| c as f64).collect();
    let mut headers = BTreeMap::new();
    headers.insert(
        "parameter_values".to_string(),
        signal.parameter_labels().join(","),
    );
    textio::write_values_with(signal.label(), &values, "ssamask signal", &headers)
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> anyhow::Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
