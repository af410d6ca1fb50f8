use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use expurg::appendix_opt::{appendix_verify, BruteForceConfig, InputGrid};
use expurg::channels::Family;
use expurg::construction::{build_y_tilde, is_complement, mmi_error_lower_bound};
use expurg::decoding::{
    empirical_exponent, exact_error, monte_carlo_error, BuiltinMetric, Codebook, DecoderKind, DecoderSpec, TiePolicy,
};
use expurg::exponents::{
    converse_exponent, critical_epsilon, curve_fig1, curve_fig2, expurgated_exponent, rate_threshold,
    rate_zero_expurgated, rate_zero_random_coding,
};
use expurg::probkit::Alphabet;
use expurg::{Channel, ChannelSpec, ExponentSearchConfig, Unit};

#[derive(Parser)]
#[command(name = "expurg", version, about = "Expurgated exponents, MMI counterexamples and exact decoder analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expurgated, converse and rate-zero random-coding exponents of a channel.
    Exponents(ExponentsArgs),
    /// The critical epsilon and, for a given eps, the rate threshold.
    Threshold {
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value = "nats")]
        unit: Unit,
    },
    /// Write figure data as two-column .dat files.
    Figures(FiguresArgs),
    /// Build the confusable outputs that defeat MMI on a codebook.
    Counterexample(CounterexampleArgs),
    /// Error probabilities of a decoder on a codebook.
    Simulate(SimulateArgs),
    /// Compare the appendix brute force, closed form and expurgated exponent.
    AppendixVerify {
        #[arg(long)]
        eps: f64,
        /// Grid intervals per free parameter.
        #[arg(long, default_value_t = 30)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        refine: usize,
    },
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel family: w_eps, w_hat_eps or bsc.
    #[arg(long, default_value = "w_eps", conflicts_with = "channel")]
    family: String,
    #[arg(long)]
    eps: Option<f64>,
    /// JSON channel specification file.
    #[arg(long)]
    channel: Option<PathBuf>,
}

impl ChannelArgs {
    fn family(&self) -> anyhow::Result<Option<(Family, f64)>> {
        if self.channel.is_some() {
            return Ok(None);
        }
        let family = parse_family(&self.family)?;
        let eps = self.eps.ok_or_else(|| Usage("--eps is required with --family".into()))?;
        Ok(Some((family, eps)))
    }

    fn build(&self) -> anyhow::Result<(Channel, String)> {
        match (&self.channel, self.family()?) {
            (Some(path), _) => {
                let spec = ChannelSpec::load(path).with_context(|| format!("reading {}", path.display()))?;
                Ok((spec.build()?, path.display().to_string()))
            }
            (None, Some((family, eps))) => Ok((family.build(eps)?, format!("{}(eps={eps})", family.name()))),
            (None, None) => unreachable!(),
        }
    }
}

fn parse_family(s: &str) -> anyhow::Result<Family> {
    Ok(match s {
        "w_eps" | "w-eps" => Family::WEps,
        "w_hat_eps" | "w-hat-eps" => Family::WHatEps,
        "bsc" => Family::Bsc,
        other => return Err(Usage(format!("unknown family {other:?} (expected w_eps, w_hat_eps or bsc)")).into()),
    })
}

#[derive(Args)]
struct ExponentsArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Rate, in `--unit` per channel use.
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    #[arg(long, default_value = "nats")]
    unit: Unit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig1,
    Fig2,
}

#[derive(Args)]
struct FiguresArgs {
    which: Figure,
    #[arg(long, default_value_t = 0.001)]
    eps: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Defaults to nats for fig1 and bits for fig2.
    #[arg(long)]
    unit: Option<Unit>,
}

#[derive(Args)]
struct CodebookArgs {
    /// Codebook file, one codeword per line.
    #[arg(long, conflicts_with = "demo")]
    codebook: Option<PathBuf>,
    /// Use the built-in three-codeword codebook of blocklength `--n`.
    #[arg(long)]
    demo: bool,
    #[arg(long, default_value_t = 4)]
    n: usize,
}

impl CodebookArgs {
    fn load(&self, alphabet: &Alphabet) -> anyhow::Result<Codebook> {
        match &self.codebook {
            Some(path) => Ok(Codebook::load(path, alphabet).with_context(|| format!("reading {}", path.display()))?),
            None if self.demo => Ok(Codebook::demo(self.n)?),
            None => Err(Usage("pass --codebook <file> or --demo".into()).into()),
        }
    }
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(long, default_value_t = 0.001)]
    eps: f64,
    #[command(flatten)]
    codebook: CodebookArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Ml,
    Mmi,
    MaxMetric,
    Stochastic,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    codebook: CodebookArgs,
    #[arg(long, value_enum, default_value = "mmi")]
    decoder: DecoderArg,
    /// Metric for max-metric and stochastic decoders: likelihood or exp-mi.
    #[arg(long, default_value = "exp-mi")]
    metric: BuiltinMetric,
    /// lowest_index, error or random.
    #[arg(long, default_value = "lowest_index")]
    tie: TiePolicy,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fall back to Monte Carlo when exact enumeration is over budget.
    #[arg(long)]
    monte_carlo: bool,
}

/// A validation failure detected by the front end itself.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use expurg::Error as E;
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<E>() {
        Some(E::Io(_)) | Some(E::NonFinite(_)) | Some(E::Infeasible) | Some(E::MetricVanishes) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Exponents(args) => cmd_exponents(&args),
        Command::Threshold { eps, unit } => cmd_threshold(eps, unit),
        Command::Figures(args) => cmd_figures(&args),
        Command::Counterexample(args) => cmd_counterexample(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::AppendixVerify { eps, grid, refine } => cmd_appendix_verify(eps, grid, refine),
    }
}

fn show(v: f64, unit: Unit) -> String {
    // `+ 0.0` folds a negative zero into zero.
    let v = unit.from_nats(v) + 0.0;
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6}")
    }
}

fn cmd_exponents(args: &ExponentsArgs) -> anyhow::Result<()> {
    let (ch, label) = args.channel.build()?;
    let unit = args.unit;
    let rate = unit.to_nats(args.rate);
    let cfg = ExponentSearchConfig::default();
    let e = expurgated_exponent(&ch, rate, &cfg)?;
    let u = unit.name();
    println!("channel: {label}");
    println!("rate: {} {u}/use", args.rate);
    println!("expurgated: {} {u}", show(e.value, unit));
    if e.rho.is_infinite() {
        println!("optimal rho: inf (rate-zero limit)");
    } else {
        println!("optimal rho: {:.6}{}", e.rho, if e.rho_at_cap { " (at search cap)" } else { "" });
    }
    if let Some((family, eps)) = args.channel.family()? {
        println!("rate-zero expurgated: {} {u}", show(rate_zero_expurgated(eps)?, unit));
        // The converse concerns the confusable output of the W_eps pair.
        if family != Family::Bsc && eps < 1.0 {
            println!("converse: {} {u}", show(converse_exponent(eps)?, unit));
        }
        println!("rate-zero random coding: {} {u}", show(rate_zero_random_coding(eps)?, unit));
    }
    Ok(())
}

fn cmd_threshold(eps: Option<f64>, unit: Unit) -> anyhow::Result<()> {
    println!("critical epsilon: {:.16}", critical_epsilon());
    if let Some(eps) = eps {
        let r = rate_threshold(eps, &ExponentSearchConfig::default())?;
        println!("rate threshold: {} {}/use", show(r, unit), unit.name());
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, text: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_figures(args: &FiguresArgs) -> anyhow::Result<()> {
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    if args.points < 2 {
        return Err(Usage("--points must be at least 2".into()).into());
    }
    match args.which {
        Figure::Fig1 => {
            let unit = args.unit.unwrap_or(Unit::Nats);
            // Equispaced eps_max * i / points for i = 1..=points; eps = 0 is
            // excluded because the expurgated exponent diverges there.
            let eps_max = critical_epsilon();
            let curves = curve_fig1(eps_max / args.points as f64, eps_max, args.points)?;
            for (name, curve, what) in [
                ("converse.dat", &curves.converse, "converse exponent -ln((1-eps)/2)"),
                ("ml-expurgated.dat", &curves.expurgated, "rate-zero expurgated exponent"),
                ("random-coding.dat", &curves.random_coding, "rate-zero random-coding exponent"),
            ] {
                let text = curve.to_unit(unit).to_dat(&[what, &format!("eps in (0, {eps_max:.16}]")])?;
                write_file(&args.out_dir, name, &text)?;
            }
        }
        Figure::Fig2 => {
            let unit = args.unit.unwrap_or(Unit::Bits);
            let rate_max = unit.from_nats(Unit::Bits.to_nats(0.205));
            let curves = curve_fig2(args.eps, rate_max, args.points, unit, &ExponentSearchConfig::default())?;
            let eps_note = format!("W_eps with eps = {}", args.eps);
            write_file(&args.out_dir, "mmi-case.dat", &curves.expurgated.to_dat(&["expurgated exponent", &eps_note])?)?;
            write_file(&args.out_dir, "mmi-converse.dat", &curves.converse.to_dat(&["converse exponent", &eps_note])?)?;
            if let Some(x) = curves.expurgated.first_crossing(&curves.converse) {
                println!("crossing: {x:.6} {}/use", unit.name());
            }
        }
    }
    Ok(())
}

fn render_quaternary(y: &[usize]) -> String {
    Alphabet::quaternary().render(y)
}

fn cmd_counterexample(args: &CounterexampleArgs) -> anyhow::Result<()> {
    let eps = args.eps;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(expurg::Error::EpsOutOfRange(eps).into());
    }
    let critical = critical_epsilon();
    if eps >= critical {
        eprintln!(
            "warning: eps = {eps} is not below the critical epsilon {critical:.10}; \
             the converse no longer lies below the expurgated exponent and the separation argument does not apply"
        );
    }
    let bin = Alphabet::binary();
    let mut cb = args.codebook.load(&bin)?;
    if !cb.is_constant_composition() {
        let sub = cb.extract_constant_composition();
        eprintln!(
            "notice: codebook is not constant-composition; using the largest type class ({} of {} codewords)",
            sub.len(),
            cb.len()
        );
        cb = sub;
    }
    let n = cb.blocklength();
    println!("eps: {eps}");
    println!("blocklength: {n}");
    println!("codewords: {}", cb.len());
    println!("rate: {:.6} nats/use", cb.rate());

    for m in 0..cb.len() {
        let x = cb.codeword(m);
        let partner = (0..cb.len()).find(|&k| k != m && cb.codeword(k) != x && !is_complement(x, cb.codeword(k)));
        let Some(mbar) = partner else {
            bail!(Usage(format!(
                "codeword {} has no distinct non-complement partner; the construction needs M >= 3 \
                 same-type codewords so such a partner exists",
                bin.render(x)
            )));
        };
        let pair = build_y_tilde(x, cb.codeword(mbar))?;
        let (i_m, i_mbar) = pair.y_tilde_mutual_informations()?;
        let y_tilde = pair.y_tilde.as_deref().expect("built above");
        println!(
            "message {m}: x = {} partner {mbar} = {} y_kappa = {} y_tilde = {} I(x_m; y_tilde) = {i_m:.6} \
             I(x_mbar; y_tilde) = {i_mbar:.6}",
            bin.render(x),
            bin.render(cb.codeword(mbar)),
            render_quaternary(&pair.y_kappa),
            render_quaternary(y_tilde),
        );
    }

    let bound = mmi_error_lower_bound(eps, n);
    let converse = converse_exponent(eps)?;
    let ceiling = -bound.ln() / n as f64;
    let expurgated = rate_zero_expurgated(eps)?;
    println!("error lower bound ((1-eps)/2)^n eps/(1-eps): {bound:.6e}");
    println!("exponent ceiling at this n: {ceiling:.6} nats");
    println!("asymptotic exponent ceiling (converse): {converse:.6} nats");
    println!("expurgated exponent at rate zero: {expurgated:.6} nats");
    println!("gap (expurgated - converse): {:.6} nats", expurgated - converse);
    if let Ok(report) = exact_error(&DecoderSpec::mmi(), &cb, &expurg::channels::make_w_eps(eps)?) {
        println!("exact MMI error: average {:.6e} maximal {:.6e}", report.average, report.maximal);
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let (ch, label) = args.channel.build()?;
    let cb = args.codebook.load(ch.inputs())?;
    let kind = match args.decoder {
        DecoderArg::Ml => DecoderKind::Ml(ch.clone()),
        DecoderArg::Mmi => DecoderKind::Mmi,
        DecoderArg::MaxMetric => DecoderKind::MaxMetric(args.metric.instantiate(&ch)),
        DecoderArg::Stochastic => DecoderKind::StochasticMetric(args.metric.instantiate(&ch)),
    };
    let spec = DecoderSpec::new(kind, args.tie);
    let report = match exact_error(&spec, &cb, &ch) {
        Ok(r) => r,
        Err(expurg::Error::BudgetExceeded { .. }) if args.monte_carlo => {
            monte_carlo_error(&spec, &cb, &ch, args.samples, args.seed)?
        }
        Err(e @ expurg::Error::BudgetExceeded { .. }) => {
            bail!(Usage(format!("{e}; pass --monte-carlo to estimate instead")))
        }
        Err(e) => return Err(e.into()),
    };
    let exponent = empirical_exponent(&report, cb.blocklength())?;
    println!("channel: {label}");
    println!("{}", serde_json::to_string_pretty(&report)?);
    println!("empirical exponent (average): {} nats", show(exponent.average, Unit::Nats));
    println!("empirical exponent (maximal): {} nats", show(exponent.maximal, Unit::Nats));
    Ok(())
}

fn cmd_appendix_verify(eps: f64, grid: usize, refine: usize) -> anyhow::Result<()> {
    let cfg = BruteForceConfig { grid_density: grid, refine_passes: refine, input: InputGrid::Uniform };
    let r = appendix_verify(eps, &cfg)?;
    println!("eps: {eps}");
    println!("brute force: {:.6} nats", r.brute_force);
    println!("symmetric closed form: {:.6} nats", r.closed_form);
    println!("rate-zero expurgated: {:.6} nats", r.expurgated);
    println!("gap brute force vs closed form: {:.3e}", r.gap_brute_closed);
    println!("gap brute force vs expurgated: {:.3e}", r.gap_brute_expurgated);
    println!("gap closed form vs expurgated: {:.3e}", r.gap_closed_expurgated);
    Ok(())
}
