// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use mtweight::concentration::{classify_dichotomy, DichotomyOptions};
use mtweight::constants::{feasibility_scan, linspace};
use mtweight::corpus::{estimate_c0, CorpusSpec};
use mtweight::extremal::{compare_with_concentration, maximize, GridSpec, SearchConfig, StartSpec};
use mtweight::format::{parse_profiles, write_halfline, Profile};
use mtweight::functionals::{dirichlet_energy, mt_integral};
use mtweight::profiles::{from_halfline, moser_ball};
use mtweight::verify::{fit_slope, run_suite, with_estimated_c0, Suite, VerifyOptions};
use mtweight::{build_constants, ConstantsBundle, QuadratureConfig, RadialProfile, WeightParams};

use output::{CliError, Outputs, RunManifest};

#[derive(Parser, Serialize)]
#[command(name = "mtweight", version, about = "Weighted Moser-Trudinger functionals on the upper half-plane")]
struct Cli {
    /// File of `key = value` lines supplying default flags; explicit flags win.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    config: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Sharp constants and their printed alternatives.
    #[command(args_override_self = true)]
    Constants {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exponential integral of the Moser functions at a multiple of the sharp constant.
    #[command(args_override_self = true)]
    MoserSweep {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1.0)]
        a_factor: f64,
        #[arg(long, default_value_t = 1)]
        n_min: u32,
        #[arg(long, default_value_t = 40)]
        n_max: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Maximize I + 1 over nondecreasing half-line profiles of bounded energy.
    #[command(args_override_self = true)]
    Extremal {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Spacing of the uniform part of the grid.
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[arg(long, default_value_t = 20.0)]
        uniform_end: f64,
        /// Growth factor of cell widths beyond the uniform part.
        #[arg(long, default_value_t = 1.05)]
        stretch: f64,
        #[arg(long, default_value_t = 80.0)]
        s_max: f64,
        /// Comma-separated starts: zero-perturbed, phi0, moser(n).
        #[arg(long)]
        starts: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-9)]
        conv_tol: f64,
        /// Record the objective at every iteration.
        #[arg(long)]
        trace: bool,
        /// Where to write the best profile (defaults to `<out>.profile.txt`).
        #[arg(long)]
        profile_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Classify a profile sequence as concentrating or convergent.
    #[command(args_override_self = true)]
    Dichotomy {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = SeqKind::Moser)]
        seq: SeqKind,
        /// Index range `lo:hi` of the Moser sequence.
        #[arg(long, default_value = "5:40")]
        n: String,
        /// Profile file for `--seq file`.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Length of the constant sequence.
        #[arg(long, default_value_t = 6)]
        count: usize,
        #[arg(long, default_value = "0.5,0.25,0.1")]
        deltas: String,
        /// Tail fraction below which a member counts as concentrated.
        #[arg(long, default_value_t = 0.2)]
        tol: f64,
        #[arg(long, default_value_t = 1e-4)]
        j_tol: f64,
        /// Where to write the per-member trajectories as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a seeded property suite.
    #[command(args_override_self = true)]
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        which: String,
        /// Random cases for the sampling suites.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Coefficient multiple of the sharp constant for `boundedness`.
        #[arg(long, default_value_t = 1.0)]
        a_factor: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Scan the admissibility conditions of the test function over (alpha, sigma).
    #[command(args_override_self = true)]
    Feasibility {
        /// Single alpha value (overrides the range).
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Single sigma value (overrides the range).
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha_min: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        alpha_max: f64,
        #[arg(long, default_value_t = 26)]
        alpha_steps: usize,
        #[arg(long, default_value_t = 0.05)]
        sigma_min: f64,
        #[arg(long, default_value_t = 3.0)]
        sigma_max: f64,
        #[arg(long, default_value_t = 60)]
        sigma_steps: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Estimate the normalization constant from the built-in corpus.
    #[command(name = "estimate-c0", args_override_self = true)]
    EstimateC0 {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = CorpusSpec::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = CorpusSpec::default().random_members)]
        random_members: usize,
        #[arg(long, default_value_t = CorpusSpec::default().moser_max)]
        moser_max: u32,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Serialize, Clone)]
struct ParamArgs {
    /// Weight exponent of the energy (> -1).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Weight exponent of the measure (> -1).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    /// Splitting parameter (> 0).
    #[arg(long)]
    sigma: Option<f64>,
    /// Normalization constant; estimated from the built-in corpus when absent.
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
}

#[derive(Args, Serialize, Clone)]
struct OutArgs {
    /// Output file; relative paths resolve against MTWEIGHT_OUT_DIR when set.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SeqKind {
    Moser,
    Constant,
    File,
}

impl ParamArgs {
    fn weights(&self) -> Result<WeightParams, CliError> {
        let mut p = WeightParams::new(self.alpha.unwrap_or(0.0), self.beta)?;
        if let Some(s) = self.sigma {
            p = p.with_sigma(s)?;
        }
        Ok(p)
    }

    /// Constants with `c₀` from `--c0` or, when `need_c0`, from the corpus.
    fn bundle(&self, need_c0: bool, cfg: &QuadratureConfig) -> Result<(ConstantsBundle, &'static str), CliError> {
        let k = build_constants(self.weights()?, 1.0, self.c1)?;
        match self.c0 {
            Some(c) => Ok((k.with_c_zero(c)?, "flag")),
            None if need_c0 => Ok((with_estimated_c0(&k, &CorpusSpec::default(), cfg)?, "corpus")),
            None => Ok((k, "unset")),
        }
    }
}

fn json_string<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn run(cli: &Cli, outs: &mut Outputs) -> Result<Option<WeightParams>, CliError> {
    let cfg = QuadratureConfig::default();
    match &cli.command {
        Command::Constants { params, format, out } => {
            if params.alpha.is_none() {
                return Err(CliError::Usage("--alpha is required".into()));
            }
            let (k, source) = params.bundle(true, &cfg)?;
            let text = match format {
                Format::Json => json_string(&json!({
                    "constants": k,
                    "c_zero_source": source,
                    "printed_comparison": {
                        "a_sharp": k.a_sharp,
                        "a_sharp_printed": k.a_sharp_printed,
                        "ratio": k.a_sharp_printed / k.a_sharp,
                        "printed_differs": (k.a_sharp_printed - k.a_sharp).abs() > 1e-12 * k.a_sharp,
                    },
                })),
                Format::Csv | Format::Text => {
                    let rows = constant_rows(&k);
                    let mut s = String::new();
                    if matches!(format, Format::Csv) {
                        s.push_str("key,value\n");
                        for (key, v) in rows {
                            s.push_str(&format!("{key},{}\n", v.map_or(String::new(), |x| format!("{x:.17e}"))));
                        }
                    } else {
                        for (key, v) in rows {
                            s.push_str(&format!("{key:<16} {}\n", v.map_or("n/a".into(), |x| format!("{x:.12}"))));
                        }
                        if (k.a_sharp_printed - k.a_sharp).abs() > 1e-12 * k.a_sharp {
                            s.push_str(&format!(
                                "note: printed closed form gives {:.12}, {:.6}x the derived sharp constant\n",
                                k.a_sharp_printed,
                                k.a_sharp_printed / k.a_sharp
                            ));
                        }
                    }
                    s
                }
            };
            outs.emit(&out.out, &text)?;
            Ok(Some(k.params))
        }
        Command::MoserSweep {
            params,
            a_factor,
            n_min,
            n_max,
            out,
        } => {
            if *n_min < 1 || n_min > n_max {
                return Err(CliError::Usage("--n-min must satisfy 1 <= n-min <= n-max".into()));
            }
            if !(*a_factor > 0.0) {
                return Err(CliError::Usage("--a-factor must be positive".into()));
            }
            let (k, _) = params.bundle(false, &cfg)?;
            let a = a_factor * k.a_sharp;
            let q = 2.0 + k.params.beta;
            let mut s = String::from("n,mt_integral,lower_bound,energy,status\n");
            let mut pts = Vec::new();
            let fit_from = (n_min + n_max) / 2;
            for n in *n_min..=*n_max {
                let u = moser_ball(n, &k)?;
                let nf = f64::from(n);
                let lower = k.c_beta / q * (((a_factor - 1.0) * nf).exp() - (-nf).exp());
                let energy = dirichlet_energy(&u, &k);
                match mt_integral(&u, a, &k, &cfg) {
                    Ok(e) => {
                        s.push_str(&format!("{n},{:.12e},{lower:.12e},{energy:.12},ok\n", e.value));
                        if n >= fit_from {
                            pts.push((nf, e.value.ln()));
                        }
                    }
                    Err(mtweight::Error::Overflow { .. }) => {
                        s.push_str(&format!("{n},,{lower:.12e},{energy:.12},overflow\n"));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            if *a_factor > 1.0 && pts.len() >= 2 {
                s.push_str(&format!("# fitted_log_slope,{:.9}\n", fit_slope(&pts)));
            }
            outs.emit(&out.out, &s)?;
            Ok(Some(k.params))
        }
        Command::Extremal {
            params,
            kappa,
            h,
            uniform_end,
            stretch,
            s_max,
            starts,
            max_iters,
            conv_tol,
            trace,
            profile_out,
            out,
        } => {
            let (k, source) = params.bundle(true, &cfg)?;
            let mut sc = SearchConfig {
                kappa: *kappa,
                grid: GridSpec {
                    h: *h,
                    uniform_end: *uniform_end,
                    stretch: *stretch,
                    s_max: *s_max,
                },
                max_iters: *max_iters,
                conv_tol: *conv_tol,
                trace: *trace,
                ..SearchConfig::default()
            };
            if let Some(list) = starts {
                sc.starts = list
                    .split(',')
                    .map(|t| t.trim().parse::<StartSpec>())
                    .collect::<Result<_, _>>()?;
            }
            let r = maximize(&k, &sc)?;
            let cmp = compare_with_concentration(&r, &k);
            let profile_path = profile_out
                .clone()
                .or_else(|| out.out.as_ref().map(|p| output::with_suffix(p, ".profile.txt")));
            if let Some(p) = profile_path {
                outs.write_file(&p, &write_halfline(&r.best_profile, &k.params))?;
            }
            outs.emit(
                &out.out,
                &json_string(&json!({ "result": r, "comparison": cmp, "c_zero_source": source })),
            )?;
            Ok(Some(k.params))
        }
        Command::Dichotomy {
            params,
            seq,
            n,
            file,
            count,
            deltas,
            tol,
            j_tol,
            csv,
            out,
        } => {
            let (k, source) = params.bundle(true, &cfg)?;
            let members = sequence(*seq, n, file.as_ref(), *count, &k)?;
            let opts = DichotomyOptions {
                concentration_tol: *tol,
                deltas: parse_list(deltas, "--deltas")?,
                j_tol: *j_tol,
                sigma: params.sigma,
                ..DichotomyOptions::default()
            };
            let r = classify_dichotomy(&members, &k, &cfg, &opts)?;
            if let Some(p) = csv {
                let mut s = String::from("m,j,i_plus_1\n");
                for (m, (j, i)) in r.j_trajectory.iter().zip(&r.i_plus_1_trajectory).enumerate() {
                    s.push_str(&format!("{m},{j:.12e},{i:.12e}\n"));
                }
                s.push_str("\nm,delta,tail_energy,tail_fraction\n");
                for t in &r.tail_energies {
                    s.push_str(&format!("{},{},{:.12e},{:.12e}\n", t.m, t.delta, t.tail_energy, t.tail_fraction));
                }
                outs.write_file(p, &s)?;
            }
            outs.emit(&out.out, &json_string(&json!({ "report": r, "c_zero_source": source })))?;
            Ok(Some(k.params))
        }
        Command::Verify {
            params,
            which,
            n,
            seed,
            a_factor,
            out,
        } => {
            let suite: Suite = which
                .parse()
                .map_err(|_| CliError::Usage(format!("--which: unknown target '{which}'")))?;
            let (k, source) = params.bundle(true, &cfg)?;
            let opts = VerifyOptions {
                cases: *n,
                seed: *seed,
                a_factor: *a_factor,
                ..VerifyOptions::default()
            };
            let r = run_suite(suite, &k, &opts, &cfg)?;
            outs.emit(
                &out.out,
                &json_string(&json!({ "report": r, "ok": r.ok(), "c_zero": k.c_zero, "c_zero_source": source })),
            )?;
            outs.summary(format!(
                "{suite}: {}/{} cases hold{}",
                r.passed,
                r.cases,
                if r.expect_violations { " (violations expected above the sharp constant)" } else { "" }
            ));
            if !r.ok() {
                return Err(CliError::Violation(format!("{suite}: {} violation(s)", r.failures.len())));
            }
            Ok(Some(k.params))
        }
        Command::Feasibility {
            alpha,
            sigma,
            alpha_min,
            alpha_max,
            alpha_steps,
            sigma_min,
            sigma_max,
            sigma_steps,
            out,
        } => {
            let alphas = match alpha {
                Some(a) => vec![*a],
                None => range(*alpha_min, *alpha_max, *alpha_steps, "--alpha-min/--alpha-max")?,
            };
            let sigmas = match sigma {
                Some(s) => vec![*s],
                None => range(*sigma_min, *sigma_max, *sigma_steps, "--sigma-min/--sigma-max")?,
            };
            let rows = feasibility_scan(&alphas, &sigmas)?;
            let mut s = String::from("alpha,sigma,gamma_phi0,bound,growth_ratio,feasible\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{:.12},{:.12},{:.12},{}\n",
                    r.alpha, r.sigma, r.gamma_phi0, r.bound, r.growth_ratio, r.feasible
                ));
            }
            outs.emit(&out.out, &s)?;
            let hits = rows.iter().filter(|r| r.feasible).count();
            outs.summary(if hits == 0 {
                format!("no feasible point among {} grid points", rows.len())
            } else {
                format!("{hits} feasible point(s) among {}", rows.len())
            });
            Ok(None)
        }
        Command::EstimateC0 {
            params,
            seed,
            random_members,
            moser_max,
            out,
        } => {
            let k = build_constants(params.weights()?, 1.0, params.c1)?;
            let spec = CorpusSpec {
                seed: *seed,
                random_members: *random_members,
                moser_max: *moser_max,
            };
            let est = estimate_c0(&k, &spec, &cfg)?;
            outs.emit(&out.out, &json_string(&est))?;
            Ok(Some(k.params))
        }
    }
}

fn constant_rows(k: &ConstantsBundle) -> Vec<(&'static str, Option<f64>)> {
    vec![
        ("alpha", Some(k.params.alpha)),
        ("beta", Some(k.params.beta)),
        ("sigma", k.params.sigma),
        ("c_alpha", Some(k.c_alpha)),
        ("c_beta", Some(k.c_beta)),
        ("b_alpha", Some(k.b_alpha)),
        ("b_beta", Some(k.b_beta)),
        ("a_sharp", Some(k.a_sharp)),
        ("a_sharp_printed", Some(k.a_sharp_printed)),
        ("T", Some(k.t)),
        ("c_sigma_alpha", k.c_sigma_alpha),
        ("b_alpha_beta", k.b_alpha_beta),
        ("c_one", Some(k.c_one)),
        ("c_zero", Some(k.c_zero)),
    ]
}

fn range(lo: f64, hi: f64, steps: usize, flag: &str) -> Result<Vec<f64>, CliError> {
    if !(lo <= hi) || steps == 0 || (lo < hi && steps < 2) {
        return Err(CliError::Usage(format!("{flag}: need min <= max and enough steps")));
    }
    Ok(linspace(lo, hi, steps))
}

fn parse_list(s: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("{flag}: {e}")))
}

fn sequence(
    kind: SeqKind,
    n: &str,
    file: Option<&PathBuf>,
    count: usize,
    k: &ConstantsBundle,
) -> Result<Vec<RadialProfile>, CliError> {
    match kind {
        SeqKind::Moser => {
            let (lo, hi) = n
                .split_once(':')
                .and_then(|(a, b)| Some((a.parse::<u32>().ok()?, b.parse::<u32>().ok()?)))
                .filter(|(a, b)| *a >= 1 && a <= b)
                .ok_or_else(|| CliError::Usage(format!("--n: expected lo:hi with 1 <= lo <= hi, got '{n}'")))?;
            Ok((lo..=hi).map(|i| moser_ball(i, k)).collect::<Result<_, _>>()?)
        }
        SeqKind::Constant => {
            if count == 0 {
                return Err(CliError::Usage("--count must be positive".into()));
            }
            let u = RadialProfile::sample(vec![0.0, 0.25, 0.5, 0.75, 1.0], |r| 0.5 * (1.0 - r * r))?;
            Ok(vec![u; count])
        }
        SeqKind::File => {
            let path = file.ok_or_else(|| CliError::Usage("--seq file needs --file".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("--file {}: {e}", path.display())))?;
            let mut out = Vec::new();
            for rec in parse_profiles(&text)? {
                if rec.params.alpha != k.params.alpha || rec.params.beta != k.params.beta {
                    return Err(CliError::Usage(format!(
                        "--file: profile has alpha={} beta={}, run uses alpha={} beta={}",
                        rec.params.alpha, rec.params.beta, k.params.alpha, k.params.beta
                    )));
                }
                out.push(match rec.profile {
                    Profile::Ball(u) => u,
                    Profile::HalfLine(v) => from_halfline(&v, k, 1.0)?,
                });
            }
            Ok(out)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Constants { .. } => "constants",
        Command::MoserSweep { .. } => "moser-sweep",
        Command::Extremal { .. } => "extremal",
        Command::Dichotomy { .. } => "dichotomy",
        Command::Verify { .. } => "verify",
        Command::Feasibility { .. } => "feasibility",
        Command::EstimateC0 { .. } => "estimate-c0",
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let argv = match config::splice(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut outs = Outputs::from_env();
    let result = run(&cli, &mut outs);
    let (params, code) = match result {
        Ok(p) => (p, 0),
        Err(e) => {
            eprintln!("error: {e}");
            (None, e.exit_code())
        }
    };
    let manifest = RunManifest::new(
        command_name(&cli.command),
        params,
        &cli.command,
        start.elapsed().as_secs_f64(),
        outs.written().to_vec(),
    );
    outs.finish(&manifest);
    ExitCode::from(code)
}
