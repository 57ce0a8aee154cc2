// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod spec;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use freedeconv::bpx::{self, CertifiedPair, PhiPair};
use freedeconv::cumulants::{self, Sequence, SequenceKind, SeriesCut};
use freedeconv::deconvolve::{self, DeconvolutionSpec};
use freedeconv::format::{csv_float, to_json};
use freedeconv::measures::{pair_to_triplet, triplet_to_pair, FreeCharPair, FreeTriplet};
use freedeconv::transforms::{self, PickSampleSpec, StieltjesOptions};
use freedeconv::verify::{self, Suite};
use freedeconv::{DensityGrid, DistributionModel, Error};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use config::{CliError, Format, GridSpec, RunConfig};
use spec::Target;

#[derive(Parser)]
#[command(name = "freedeconv", version, about = "Free deconvolution, free cumulants and the extended Bercovici-Pata map")]
struct Cli {
    /// Output format; CSV is available for density grids only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override (see each subcommand).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density of a law on a grid. --tol flags points whose error estimate exceeds it.
    Density {
        /// e.g. `gamma:a=1,sigma2=0.25`, `mp:1,0.5 + cauchy:1`, `fm-levy:b=0.0625`
        model: String,
        #[arg(long, default_value = "-5:5:0.01", allow_hyphen_values = true)]
        grid: GridSpec,
        #[arg(long, value_enum, default_value_t = Method::Boundary)]
        method: Method,
    },
    /// Free characteristic triplets.
    Triplet {
        #[command(subcommand)]
        command: TripletCmd,
    },
    /// Free characteristic pairs.
    Pair {
        #[command(subcommand)]
        command: PairCmd,
    },
    /// Exact moment and cumulant conversions.
    Cumulants {
        #[command(subcommand)]
        command: CumulantsCmd,
    },
    /// Worked free deconvolutions.
    Deconv {
        #[command(subcommand)]
        command: DeconvCmd,
    },
    /// Classical/free pairs (c, ν) and the extended map.
    Bpx {
        #[command(subcommand)]
        command: BpxCmd,
    },
    /// Run a self-check suite; exits 1 if any check fails.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Boundary,
    Richardson,
}

#[derive(clap::Args)]
struct Source {
    /// JSON file holding the object.
    #[arg(long = "in", conflicts_with = "model")]
    input: Option<PathBuf>,
    /// Model spec to take the object from instead.
    #[arg(long)]
    model: Option<String>,
}

#[derive(Subcommand)]
enum TripletCmd {
    /// Print the triplet of a model or file.
    Show(Source),
    /// Sign structure of the Gaussian part and Lévy measure.
    Classify(Source),
    /// Convert to the free characteristic pair.
    ToPair(Source),
    /// R(z) = γz + az² + ∫(1/(1 − xz) − 1 − xz·1_{[−1,1]}) ν(dx) at points with Im z < 0.
    R {
        #[command(flatten)]
        source: Source,
        /// `re,im;re,im;…`
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
}

#[derive(Subcommand)]
enum PairCmd {
    Show(Source),
    ToTriplet(Source),
    /// Free cumulants κ₁…κ_n of the pair.
    Cumulants {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Reject pairs whose κ₂ is negative.
        #[arg(long)]
        probability: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeqKind {
    Moments,
    Free,
    Classical,
}

#[derive(Subcommand)]
enum CumulantsCmd {
    /// Convert a sequence. Moments are given and printed from m₁ (m₀ = 1).
    Convert {
        #[arg(long, value_enum)]
        from: SeqKind,
        #[arg(long, value_enum)]
        to: SeqKind,
        /// Comma-separated rationals, e.g. `0,1,0,2` or `1/2,0.25`.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Determinant of the Hankel matrix (m_{i+j})_{0≤i,j≤k}.
    Hankel {
        /// m₁, m₂, … (m₀ = 1).
        #[arg(long, allow_hyphen_values = true)]
        moments: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Bernoulli law (1 − a)δ₀ + aδ₁: classical cumulants read as free cumulants.
    Bernoulli {
        #[arg(long)]
        a: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Also print the quasi-infinitely divisible classical triplet.
        #[arg(long)]
        triplet: bool,
    },
}

#[derive(Subcommand)]
enum DeconvCmd {
    /// C_a ⊟ MP(c, λ). --tol bounds the identity check (default 1e-10).
    RhoAcl {
        #[arg(long)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long)]
        lambda: f64,
    },
    /// C_a ⊟ S(0, σ²).
    Gamma {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        sigma2: f64,
    },
    /// Semicircle / Marchenko–Pastur decomposition with nodes u and x.
    Smp {
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Exact partial-fraction weights for distinct nonzero nodes.
    MultiMp {
        #[arg(long, allow_hyphen_values = true)]
        nodes: String,
    },
    /// Free quasi-Lévy measure of C_{2√2} ⊟ FM_{0,b}.
    FmLevy {
        #[arg(long)]
        b: f64,
        /// Cutoffs for the negative mass on {|x| > cutoff}.
        #[arg(long, default_value = "1e-2,1e-4,1e-6")]
        cutoffs: String,
    },
}

#[derive(clap::Args)]
struct PairArgs {
    #[arg(long)]
    c: f64,
    /// Half of ν as `λ:p,…`, meaning p(δ_λ + δ_{−λ}).
    #[arg(long, default_value = "")]
    atoms: String,
}

impl PairArgs {
    fn pair(&self) -> Result<PhiPair, CliError> {
        Ok(PhiPair::symmetric(self.c, &spec::parse_atoms(&self.atoms)?)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Star,
    Box,
}

#[derive(Subcommand)]
enum BpxCmd {
    /// Membership in Φ, Φ⁺, Φ* and Φ^⊞.
    Classify(PairArgs),
    /// Density of μ*(c, ν) or μ^⊞(c, ν).
    Density {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = Side::Star)]
        side: Side,
        #[arg(long, default_value = "-10:10:0.01", allow_hyphen_values = true)]
        grid: GridSpec,
    },
    /// μ ∗ μ*(c, ν) ↦ Λ(μ) ⊞ μ^⊞(c, ν) for a model μ with explicit triplet.
    Extend {
        #[arg(long)]
        mu: String,
        #[command(flatten)]
        pair: PairArgs,
        /// Real points for the classical log-characteristic function.
        #[arg(long, default_value = "0.5,1,2", allow_hyphen_values = true)]
        t: String,
        /// Points `re,im;…` with Im z < 0 for the free R-transform.
        #[arg(long, default_value = "0.1,-0.5;0.3,-0.2", allow_hyphen_values = true)]
        z: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("FREEDECONV_THREADS").ok();
    let result = RunConfig::new(cli.format, cli.out.clone(), cli.tol, threads.as_deref()).and_then(|cfg| {
        if let Some(n) = cfg.threads {
            // Only fails if a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        run(cli.command, &cfg)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::VerifyFailed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}

enum Output {
    Json(String),
    Csv(String),
}

fn json_out<T: Serialize + ?Sized>(v: &T, cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.format {
        Format::Json => Ok(Output::Json(to_json(v))),
        Format::Csv => Err(CliError::Usage("CSV output is only available for density grids".into())),
    }
}

fn emit(out: Output, cfg: &RunConfig) -> Result<(), CliError> {
    let text = match out {
        Output::Json(s) => s + "\n",
        Output::Csv(s) => s,
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cmd: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let out = match cmd {
        Command::Density { model, grid, method } => density(&model, &grid, method, cfg)?,
        Command::Triplet { command } => triplet_cmd(command, cfg)?,
        Command::Pair { command } => pair_cmd(command, cfg)?,
        Command::Cumulants { command } => cumulants_cmd(command, cfg)?,
        Command::Deconv { command } => deconv_cmd(command, cfg)?,
        Command::Bpx { command } => bpx_cmd(command, cfg)?,
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let report = verify::run(suite);
            emit(json_out(&report, cfg)?, cfg)?;
            return if report.passed { Ok(()) } else { Err(CliError::VerifyFailed) };
        }
    };
    emit(out, cfg)
}

fn grid_output(g: &DensityGrid, cfg: &RunConfig) -> Result<Output, CliError> {
    if let Some(tol) = cfg.tol {
        let loose = g.est_error.iter().filter(|e| **e > tol).count();
        if loose > 0 {
            eprintln!("warning: {loose} of {} points have an error estimate above {tol:e}", g.xs.len());
        }
    }
    Ok(match cfg.format {
        Format::Json => Output::Json(to_json(g)),
        Format::Csv => Output::Csv(g.to_csv()),
    })
}

fn density(model: &str, grid: &GridSpec, method: Method, cfg: &RunConfig) -> Result<Output, CliError> {
    let xs = grid.points();
    match spec::parse_target(model)? {
        Target::FmLevy { b } => {
            // The density is singular at 0; that point is left out.
            let xs: Vec<f64> = xs.into_iter().filter(|x| *x != 0.0).collect();
            let fs = xs
                .iter()
                .map(|&x| deconvolve::fm_quasi_levy_density(b, x))
                .collect::<Result<Vec<f64>, Error>>()?;
            Ok(match cfg.format {
                Format::Json => Output::Json(to_json(&json!({ "b": b, "xs": xs, "fs": fs }))),
                Format::Csv => {
                    let mut s = String::from("x,nu_density\n");
                    for (x, f) in xs.iter().zip(&fs) {
                        s.push_str(&format!("{},{}\n", csv_float(*x), csv_float(*f)));
                    }
                    Output::Csv(s)
                }
            })
        }
        Target::Model(m) => {
            let opts = match method {
                Method::Boundary => StieltjesOptions::default(),
                Method::Richardson => StieltjesOptions::richardson(vec![1e-3, 5e-4, 2.5e-4]),
            };
            let g = transforms::stieltjes_density(&m, &xs, &opts)?;
            grid_output(&g, cfg)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Lib(Error::Parse(format!("{}: {e}", path.display()))))
}

fn model_of(src: &Source) -> Result<Option<DistributionModel>, CliError> {
    src.model.as_deref().map(spec::parse_model).transpose().map_err(Into::into)
}

fn load_triplet(src: &Source) -> Result<FreeTriplet, CliError> {
    if let Some(m) = model_of(src)? {
        return Ok(m.triplet()?);
    }
    let path = src.input.as_ref().ok_or_else(|| CliError::Usage("give --in FILE or --model SPEC".into()))?;
    let t: FreeTriplet = read_json(path)?;
    // Re-run the constructor's checks on deserialized input.
    Ok(FreeTriplet::new(t.a, t.nu.into_measure(), t.gamma)?)
}

fn load_pair(src: &Source) -> Result<FreeCharPair, CliError> {
    if let Some(m) = model_of(src)? {
        return Ok(triplet_to_pair(&m.triplet()?)?);
    }
    let path = src.input.as_ref().ok_or_else(|| CliError::Usage("give --in FILE or --model SPEC".into()))?;
    let p: FreeCharPair = read_json(path)?;
    Ok(FreeCharPair::new(p.b, p.tau)?)
}

fn triplet_cmd(cmd: TripletCmd, cfg: &RunConfig) -> Result<Output, CliError> {
    match cmd {
        TripletCmd::Show(src) => json_out(&load_triplet(&src)?, cfg),
        TripletCmd::Classify(src) => json_out(&deconvolve::classify_triplet(&load_triplet(&src)?), cfg),
        TripletCmd::ToPair(src) => json_out(&triplet_to_pair(&load_triplet(&src)?)?, cfg),
        TripletCmd::R { source, z } => {
            let t = load_triplet(&source)?;
            let rows = spec::parse_complex_list(&z)?
                .into_iter()
                .map(|z| Ok(json!({ "z": z, "r": transforms::r_from_triplet(&t, z)? })))
                .collect::<Result<Vec<Value>, Error>>()?;
            json_out(&rows, cfg)
        }
    }
}

fn pair_cmd(cmd: PairCmd, cfg: &RunConfig) -> Result<Output, CliError> {
    match cmd {
        PairCmd::Show(src) => json_out(&load_pair(&src)?, cfg),
        PairCmd::ToTriplet(src) => json_out(&pair_to_triplet(&load_pair(&src)?)?, cfg),
        PairCmd::Cumulants { source, n, probability } => {
            json_out(&cumulants::cumulants_from_pair(&load_pair(&source)?, n, probability)?, cfg)
        }
    }
}

fn exact(values: &[BigRational]) -> Vec<String> {
    values.iter().map(|q| q.to_string()).collect()
}

fn cumulants_cmd(cmd: CumulantsCmd, cfg: &RunConfig) -> Result<Output, CliError> {
    let one = || BigRational::from_integer(1.into());
    let with_m0 = |v: Vec<BigRational>| std::iter::once(one()).chain(v).collect::<Vec<_>>();
    match cmd {
        CumulantsCmd::Convert { from, to, values } => {
            let v = spec::parse_rationals(&values)?;
            let moments = match from {
                SeqKind::Moments => Sequence::moments(with_m0(v)),
                SeqKind::Free => cumulants::free_cumulants_to_moments(&Sequence::free_cumulants(v))?,
                SeqKind::Classical => cumulants::classical_cumulants_to_moments(&Sequence::classical_cumulants(v))?,
            };
            let (kind, values) = match to {
                SeqKind::Moments => (SequenceKind::Moments, moments.values[1..].to_vec()),
                SeqKind::Free => (SequenceKind::FreeCumulants, cumulants::moments_to_free_cumulants(&moments)?.values),
                SeqKind::Classical => (
                    SequenceKind::ClassicalCumulants,
                    cumulants::moments_to_classical_cumulants(&moments)?.values,
                ),
            };
            json_out(&json!({ "kind": kind, "start_index": 1, "values": exact(&values) }), cfg)
        }
        CumulantsCmd::Hankel { moments, k } => {
            let s = Sequence::moments(with_m0(spec::parse_rationals(&moments)?));
            let det = cumulants::hankel_det(&s, k)?;
            json_out(&json!({ "k": k, "det": det.to_string() }), cfg)
        }
        CumulantsCmd::Bernoulli { a, n, triplet } => {
            let a_q = spec::parse_rational(&a)?;
            let kappa = cumulants::bernoulli_cumulants(&a_q, n.max(4));
            let moments = cumulants::free_cumulants_to_moments(&kappa)?;
            let det = cumulants::hankel_det(&moments, 2)?;
            let mut report = json!({
                "a": a_q.to_string(),
                "free_cumulants": exact(&kappa.values[..n]),
                "moments": exact(&moments.values[1..=n.min(moments.values.len() - 1)]),
                "hankel_det_k2": det.to_string(),
            });
            if triplet {
                let a_f: f64 = num_traits::ToPrimitive::to_f64(&a_q).unwrap_or(f64::NAN);
                report["triplet"] = serde_json::to_value(cumulants::bernoulli_qid_triplet(a_f, SeriesCut::default())?)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
            }
            json_out(&report, cfg)
        }
    }
}

fn deconv_report(spec: DeconvolutionSpec, triplet: FreeTriplet, cfg: &RunConfig) -> Result<Output, CliError> {
    let tol = cfg.tol_or(1e-10);
    let pick = transforms::pick_check(&spec.phi, &PickSampleSpec::default());
    let report = json!({
        "model": spec.model().to_string(),
        "minuend": spec.minuend.to_string(),
        "subtrahend": spec.subtrahend.to_string(),
        "identity_holds": spec.identity_holds(tol)?,
        "tolerance": tol,
        "pick": pick,
        "triplet": triplet,
        "classification": deconvolve::classify_triplet(&triplet),
    });
    json_out(&report, cfg)
}

fn deconv_cmd(cmd: DeconvCmd, cfg: &RunConfig) -> Result<Output, CliError> {
    match cmd {
        DeconvCmd::RhoAcl { a, c, lambda } => {
            // Validates the region λ ≤ (a/2c)² before anything else.
            deconvolve::rho_acl(a, c, lambda)?;
            let spec = DeconvolutionSpec::new(DistributionModel::cauchy(a)?, DistributionModel::mp(c, lambda)?)?;
            deconv_report(spec, deconvolve::rho_triplet(a, c, lambda)?, cfg)
        }
        DeconvCmd::Gamma { a, sigma2 } => {
            deconvolve::gamma_as(a, sigma2)?;
            let spec =
                DeconvolutionSpec::new(DistributionModel::cauchy(a)?, DistributionModel::semicircle(0.0, sigma2)?)?;
            deconv_report(spec, deconvolve::gamma_triplet(a, sigma2)?, cfg)
        }
        DeconvCmd::Smp { u, x } => deconv_report(deconvolve::smp_deconvolution(u, x)?, deconvolve::smp_triplet(u, x)?, cfg),
        DeconvCmd::MultiMp { nodes } => {
            let us = spec::parse_rationals(&nodes)?;
            let ts = deconvolve::multi_mp_weights(&us)?;
            let sum = ts.iter().cloned().fold(BigRational::from_integer(0.into()), |a, b| a + b);
            json_out(&json!({ "nodes": exact(&us), "weights": exact(&ts), "sum": sum.to_string() }), cfg)
        }
        DeconvCmd::FmLevy { b, cutoffs } => {
            let masses = spec::parse_reals(&cutoffs)?
                .into_iter()
                .map(|c| Ok(json!({ "cutoff": c, "negative_mass": deconvolve::fm_negative_mass(b, c)? })))
                .collect::<Result<Vec<Value>, Error>>()?;
            json_out(
                &json!({ "b": b, "zero_crossing": deconvolve::fm_zero_crossing(b), "negative_mass": masses }),
                cfg,
            )
        }
    }
}

fn bpx_cmd(cmd: BpxCmd, cfg: &RunConfig) -> Result<Output, CliError> {
    match cmd {
        BpxCmd::Classify(p) => json_out(&bpx::classify(&p.pair()?), cfg),
        BpxCmd::Density { pair, side, grid } => {
            let p = pair.pair()?;
            let xs = grid.points();
            let g = match side {
                Side::Star => bpx::mu_star_density(&p, &xs)?,
                Side::Box => {
                    let r = bpx::classify(&p);
                    if r.in_phi_boxplus.status != bpx::Status::Yes {
                        return Err(Error::NotCertified(format!("Φ^⊞: {}", r.in_phi_boxplus.reason)).into());
                    }
                    bpx::mu_box_density(&p, &xs)?
                }
            };
            grid_output(&g, cfg)
        }
        BpxCmd::Extend { mu, pair, t, z } => {
            let mu_t = spec::parse_model(&mu)?.triplet()?;
            let cert = CertifiedPair::new(pair.pair()?)?;
            let e = bpx::extended_bp(&mu_t, &cert)?;
            let classical = spec::parse_reals(&t)?
                .into_iter()
                .map(|t| Ok(json!({ "t": t, "log_cf": e.classical_log_cf(t)? })))
                .collect::<Result<Vec<Value>, Error>>()?;
            let free = spec::parse_complex_list(&z)?
                .into_iter()
                .map(|z: Complex64| Ok(json!({ "z": z, "r": e.free_r(z)? })))
                .collect::<Result<Vec<Value>, Error>>()?;
            json_out(
                &json!({
                    "mu": mu,
                    "pair": cert,
                    "triplet": e.triplet()?,
                    "classical": classical,
                    "free": free,
                }),
                cfg,
            )
        }
    }
}
