use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tracepow_core::applications::dense::DenseHermitian;
use tracepow_core::applications::entanglement::{detect_state, write_verdicts_csv, VerdictRow};
use tracepow_core::bounds::{esp_max_bound, lemma2_bound, theorem_threshold, ThresholdVariant};
use tracepow_core::estimation::{
    effective_rank, effective_rank_alt, max_abs_error, run_algorithm1, EstimationConfig, MomentOracle, SampleRule,
};
use tracepow_core::fraction;
use tracepow_core::scenarios::{
    emit_report, epsilon_pow10, gen_spectrum, run_scenario1, run_scenario2, DistributionKind, DistributionTag,
    RankFormula, ReportFormat, Scenario1Config, Scenario2Config, ScenarioReport, DEFAULT_RANK, DEFAULT_REPEATS,
    SCENARIO1_EPS_EXPONENTS, SCENARIO1_KS,
};
use tracepow_core::{power_sums, Rational, Spectrum};

/// Estimate traces of density-matrix powers from low-order moments.
#[derive(Parser)]
#[command(name = "tracepow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sampled estimator over a (distribution, k, ε) grid.
    Scenario1(GridArgs),
    /// Truncated recurrence from exact seeds against the truncation bound.
    Scenario2(TruncationArgs),
    /// Scenario 1 with t = min{r, ⌊ln(k/ε)/ln ln(k/ε)⌋}.
    Appendixb(GridArgs),
    /// Estimate Tr(ρ^i), i = 1..k, for one spectrum.
    Estimate(EstimateArgs),
    /// Partial-transpose moment entanglement test.
    Detect(DetectArgs),
    /// Evaluate the closed-form bounds and rank formulas.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct Output {
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Output {
    fn writer(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn format(&self) -> anyhow::Result<ReportFormat> {
        Ok(self.format.parse()?)
    }
}

#[derive(Args)]
struct GridArgs {
    /// Comma-separated distributions, or "all".
    #[arg(long, default_value = "all")]
    dist: String,
    #[arg(long, default_value_t = DEFAULT_RANK)]
    r: usize,
    /// Comma-separated k values; defaults to 8,16,...,256.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Comma-separated ε values as decimals or fractions; defaults to 1e-1..1e-7.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<String>,
    /// Overrides --rank-formula with a fixed t.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    repeats: usize,
    /// Use exact moments instead of binomial sampling.
    #[arg(long)]
    exact_oracle: bool,
    /// effrank, appendixb or fixed:<n>.
    #[arg(long)]
    rank_formula: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TruncationArgs {
    #[arg(long, default_value = "all")]
    dist: String,
    #[arg(long, default_value_t = DEFAULT_RANK)]
    r: usize,
    #[arg(long, default_value_t = 32)]
    k: usize,
    /// A single t or an inclusive range such as 1..16; defaults to 1..r.
    #[arg(long)]
    t: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EstimateArgs {
    /// Spectrum JSON file ({"eigenvalues": ["1/2", ...]}); overrides --dist.
    #[arg(long)]
    spectrum: Option<PathBuf>,
    #[arg(long, default_value = "geometric")]
    dist: String,
    #[arg(long, default_value_t = DEFAULT_RANK)]
    r: usize,
    #[arg(long, default_value_t = 32)]
    k: usize,
    #[arg(long, default_value = "0.1")]
    eps: String,
    #[arg(long)]
    t: Option<usize>,
    /// effrank, appendixb or fixed:<n>.
    #[arg(long, default_value = "effrank")]
    rank_formula: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    exact_oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// JSON file with one matrix {"dim", "re", "im"} or an array of them.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Werner state parameter; used when no input file is given.
    #[arg(long)]
    werner: Option<f64>,
    #[arg(long, default_value_t = 2)]
    dim_a: usize,
    #[arg(long, default_value_t = 2)]
    dim_b: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 32)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    t: usize,
    #[arg(long, default_value_t = DEFAULT_RANK)]
    r: usize,
    #[arg(long, default_value = "0.1")]
    eps: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dists(text: &str) -> anyhow::Result<Vec<DistributionTag>> {
    if text == "all" {
        return Ok(DistributionTag::ALL.to_vec());
    }
    text.split(',').map(|s| Ok(s.trim().parse()?)).collect()
}

fn parse_eps(values: &[String]) -> anyhow::Result<Vec<Rational>> {
    if values.is_empty() {
        return Ok(SCENARIO1_EPS_EXPONENTS.iter().map(|&e| epsilon_pow10(e)).collect());
    }
    values
        .iter()
        .map(|s| {
            let e = fraction::parse(s.trim())?;
            if e <= 0 {
                bail!("epsilon must be positive: {s}");
            }
            Ok(e)
        })
        .collect()
}

fn rank_formula(text: Option<&str>, t: Option<usize>, default: RankFormula) -> anyhow::Result<RankFormula> {
    if let Some(t) = t {
        if t == 0 {
            bail!("--t must be positive");
        }
        return Ok(RankFormula::Fixed(t));
    }
    Ok(match text {
        Some(s) => s.parse()?,
        None => default,
    })
}

fn write_report(report: &ScenarioReport, output: &Output) -> anyhow::Result<ExitCode> {
    let mut w = output.writer()?;
    emit_report(report, output.format()?, &mut w)?;
    w.flush()?;
    Ok(if report.all_satisfied() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn grid(args: &GridArgs, default: RankFormula) -> anyhow::Result<ExitCode> {
    let cfg = Scenario1Config {
        distributions: parse_dists(&args.dist)?,
        r: args.r,
        ks: if args.k.is_empty() { SCENARIO1_KS.to_vec() } else { args.k.clone() },
        epsilons: parse_eps(&args.eps)?,
        rank_formula: rank_formula(args.rank_formula.as_deref(), args.t, default)?,
        repeats: args.repeats,
        seed: args.seed,
        oracle: if args.exact_oracle { MomentOracle::Exact } else { MomentOracle::Binomial },
    };
    write_report(&run_scenario1(&cfg)?, &args.output)
}

fn truncation(args: &TruncationArgs) -> anyhow::Result<ExitCode> {
    let (t_min, t_max) = match args.t.as_deref() {
        None => (1, args.r),
        Some(s) => match s.split_once("..") {
            Some((a, b)) => (a.trim().parse()?, b.trim_start_matches('=').trim().parse()?),
            None => {
                let t = s.trim().parse()?;
                (t, t)
            }
        },
    };
    let cfg = Scenario2Config {
        distributions: parse_dists(&args.dist)?,
        r: args.r,
        k: args.k,
        t_min,
        t_max,
        seed: args.seed,
    };
    write_report(&run_scenario2(&cfg)?, &args.output)
}

fn estimate(args: &EstimateArgs) -> anyhow::Result<ExitCode> {
    let spectrum = match &args.spectrum {
        Some(p) => Spectrum::from_json(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => {
            let tag: DistributionTag = args.dist.parse()?;
            gen_spectrum(&DistributionKind::standard(tag, args.r, args.seed))?
        }
    };
    let eps = parse_eps(std::slice::from_ref(&args.eps))?.remove(0);
    let eps_f = fraction::to_f64(&eps);
    let r = spectrum.rank();
    let t = match rank_formula(Some(&args.rank_formula), args.t, RankFormula::EffRank)? {
        RankFormula::EffRank => effective_rank(args.k, eps_f, Some(r)),
        RankFormula::AppendixB => effective_rank_alt(args.k, eps_f, Some(r))?,
        RankFormula::Fixed(t) => t,
    };
    let cfg = EstimationConfig::new(args.k, eps.clone(), 0.5, t, args.seed)?
        .with_samples(SampleRule::Scenario)
        .with_oracle(if args.exact_oracle { MomentOracle::Exact } else { MomentOracle::Binomial });
    let est = run_algorithm1(&spectrum, &cfg)?;
    let exact = power_sums(&spectrum, args.k);
    let err = max_abs_error(&est.q, &exact);
    let satisfied = err < eps;
    let body = json!({
        "spectrum": spectrum,
        "k": args.k,
        "epsilon": fraction::format(&eps),
        "t": est.b.order(),
        "n_samples": est.samples_per_moment,
        "estimate": est.q.to_f64(),
        "exact": exact.to_f64(),
        "max_error_float": fraction::to_f64(&err),
        "satisfied": satisfied,
    });
    let mut w: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    serde_json::to_writer_pretty(&mut w, &body)?;
    writeln!(w)?;
    Ok(if satisfied { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn detect(args: &DetectArgs) -> anyhow::Result<ExitCode> {
    let states: Vec<(String, DenseHermitian)> = match (&args.input, args.werner) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let items = match value {
                serde_json::Value::Array(v) => v,
                other => vec![other],
            };
            items
                .into_iter()
                .enumerate()
                .map(|(i, v)| Ok((format!("state{i}"), serde_json::from_value(v)?)))
                .collect::<anyhow::Result<_>>()?
        }
        (None, Some(w)) => vec![(format!("werner({w})"), DenseHermitian::werner(w)?)],
        (None, None) => bail!("give --input or --werner"),
    };
    let mut rows = Vec::new();
    let mut details = Vec::new();
    for (label, m) in &states {
        let d = detect_state(m, args.dim_a, args.dim_b)?;
        details.push(json!({ "label": label, "verdict": d.verdict, "e": d.e }));
        rows.push(VerdictRow::from_detection(label.clone(), &d));
    }
    let mut w = args.output.writer()?;
    match args.output.format()? {
        ReportFormat::Csv => write_verdicts_csv(&rows, &mut w)?,
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut w, &details)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn bounds(args: &BoundsArgs) -> anyhow::Result<ExitCode> {
    let eps = parse_eps(std::slice::from_ref(&args.eps))?.remove(0);
    let e = fraction::to_f64(&eps);
    let (k, t, r) = (args.k, args.t, args.r);
    let body = json!({
        "k": k, "t": t, "r": r, "epsilon": fraction::format(&eps),
        "truncation_bound": fraction::format(&lemma2_bound(k, t, r)?),
        "esp_max_bound": fraction::format(&esp_max_bound(t, r)?),
        "effective_rank": effective_rank(k, e, Some(r)),
        "effective_rank_alt": effective_rank_alt(k, e, Some(r)).ok(),
        "threshold_rank": theorem_threshold(k, t, e, ThresholdVariant::Rank),
        "threshold_effective": theorem_threshold(k, t, e, ThresholdVariant::Effective),
    });
    let mut w: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    serde_json::to_writer_pretty(&mut w, &body)?;
    writeln!(w)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Scenario1(a) => grid(a, RankFormula::EffRank),
        Command::Appendixb(a) => grid(a, RankFormula::AppendixB),
        Command::Scenario2(a) => truncation(a),
        Command::Estimate(a) => estimate(a),
        Command::Detect(a) => detect(a),
        Command::Bounds(a) => bounds(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
