//! Command-line front end: rate evaluation, chamber scans, measurement
//! simulation, and the built-in invariant self-test.

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use momentldp::config::{self, FormatConfig, RunConfig};
use momentldp::lie::{self, C64, GroupAtom, GroupElement, GroupSpec};
use momentldp::moment;
use momentldp::rate::{self, Certificate, OptimizerOptions};
use momentldp::repr::{self, RepresentationSpec};
use momentldp::sim;
use momentldp::{Error, Result};

#[derive(Parser)]
#[command(name = "momentldp", version, about = "Rate functions and measurement simulation for moment-map estimation on compact Lie groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Numeric,
    An,
    Keyl,
    Cramer,
    Mixed,
    Contracted,
    Bipartite,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a rate function at a point given in the config.
    Rate {
        #[arg(long)]
        config: String,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Tabulate the rate function over a chamber grid as CSV.
    Scan {
        #[arg(long)]
        config: String,
        /// Grid '<start>:<stop>:<points>' over the leading chamber coordinate.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Simulate the covariant measurement and check the decay bound.
    Simulate {
        #[arg(long)]
        config: String,
        /// Tensor powers, e.g. '2,4,8' or '2..12'.
        #[arg(long)]
        m_list: String,
        /// Region string, e.g. 'halfspace:1,0:0.9' or 'chamberball:0.7,0.3:0.15'.
        #[arg(long)]
        region: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run the built-in invariant suites.
    Selftest {
        #[arg(long)]
        config: Option<String>,
        /// Test hook: corrupt the Iwasawa reconstruction check to verify the
        /// harness reports failures.
        #[arg(long, hide = true)]
        inject_iwasawa_error: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Rate { config, method, seed, out } => cmd_rate(&config, method, seed, out.as_deref()),
        Command::Scan { config, grid, seed, out } => cmd_scan(&config, &grid, seed, out.as_deref()),
        Command::Simulate { config, m_list, region, samples, seed, workers, format, out } => {
            cmd_simulate(&config, &m_list, &region, samples, seed, workers, format, out.as_deref())
        }
        Command::Selftest { config, inject_iwasawa_error } => cmd_selftest(config.as_deref(), inject_iwasawa_error),
    }
}

fn load_config(path: &str) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config '{path}': {e}")))?;
    RunConfig::from_json(&text)
}

fn write_output(path: Option<&str>, text: &str) -> Result<()> {
    match path {
        None => {
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Config(format!("cannot write '{p}': {e}"))),
    }
}

// ---------- rate ----------

#[derive(Serialize)]
struct RateRecord {
    method: String,
    value: f64,
    certificate: Certificate,
    boundary: bool,
    non_faithful: bool,
    evaluations: usize,
    cross_check: Option<CrossCheck>,
    metadata: Metadata,
}

#[derive(Serialize)]
struct CrossCheck {
    method: String,
    value: f64,
}

#[derive(Serialize)]
struct Metadata {
    seed: u64,
    gradient_tolerance: f64,
    max_iterations: usize,
}

fn cmd_rate(config_path: &str, method: Method, seed: Option<u64>, out: Option<&str>) -> Result<ExitCode> {
    use config::RateMethod;

    let cfg = load_config(config_path)?;
    let seed = seed.unwrap_or(cfg.seed);
    let opts = cfg.optimizer.build(seed);
    let rm = match method {
        Method::Numeric => RateMethod::Numeric,
        Method::An => RateMethod::An,
        Method::Keyl => RateMethod::Keyl,
        Method::Cramer => RateMethod::Cramer,
        Method::Mixed => RateMethod::Mixed,
        Method::Contracted => RateMethod::Contracted,
        Method::Bipartite => RateMethod::Bipartite,
    };
    let result = config::evaluate_rate(&cfg, rm, seed)?;
    let cross_method = match rm {
        RateMethod::Numeric => Some(RateMethod::An),
        RateMethod::An | RateMethod::Keyl => Some(RateMethod::Numeric),
        // the mixed-state closed form only cross-checks against the
        // definition when the configured state actually is I/dim
        RateMethod::Mixed if matches!(cfg.state, config::StateConfig::MaximallyMixed) => {
            Some(RateMethod::Numeric)
        }
        _ => None,
    };
    let cross = cross_method.and_then(|m| {
        config::evaluate_rate(&cfg, m, seed)
            .ok()
            .map(|r| CrossCheck { method: m.name().into(), value: r.value })
    });

    let record = RateRecord {
        method: rm.name().into(),
        value: result.value,
        certificate: result.certificate,
        boundary: result.boundary,
        non_faithful: result.non_faithful,
        evaluations: result.evaluations,
        cross_check: cross,
        metadata: Metadata {
            seed,
            gradient_tolerance: opts.gradient_tolerance,
            max_iterations: opts.max_iterations,
        },
    };
    let text = serde_json::to_string_pretty(&record)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    write_output(out, &format!("{text}\n"))?;
    Ok(if record.value.is_infinite() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

// ---------- scan ----------

fn scan_point(spec: &GroupSpec, t: f64) -> Result<Vec<f64>> {
    match spec.factors.as_slice() {
        [GroupAtom::Unitary(2)] => Ok(vec![t, 1.0 - t]),
        [GroupAtom::Su2] => Ok(vec![t, -t]),
        [GroupAtom::Torus(1)] => Ok(vec![t]),
        _ => Err(Error::UnsupportedRep("scan supports U(2), SU(2) and rank-1 torus groups".into())),
    }
}

fn cmd_scan(config_path: &str, grid: &str, seed: Option<u64>, out: Option<&str>) -> Result<ExitCode> {
    let cfg = load_config(config_path)?;
    let seed = seed.unwrap_or(cfg.seed);
    let opts = cfg.optimizer.build(seed);
    let spec = cfg.group_spec()?;
    let rep = cfg.representation()?;
    let rho = cfg.state()?;
    let (start, stop, points) = config::parse_grid(grid)?;

    // the grid must stay inside the weight-polytope bounding box inflated 10%
    let wd = repr::weight_data(&rep, &spec)?;
    let coords: Vec<f64> = wd.real_weights().iter().map(|(w, _)| w[0]).collect();
    let lo = coords.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.1 * (hi - lo).max(1e-12);
    if start < lo - pad || stop > hi + pad {
        return Err(Error::Config(format!(
            "grid [{start}, {stop}] leaves the inflated polytope box [{}, {}]",
            lo - pad,
            hi + pad
        )));
    }

    let torus = matches!(spec.factors[0], GroupAtom::Torus(_));
    let law = if torus { Some(sim::isotypic_probabilities(&rep, &spec, &rho, 1)?) } else { None };
    let mut lines = Vec::with_capacity(points + 1);
    let ncoords = scan_point(&spec, start)?.len();
    let header: Vec<String> = (1..=ncoords)
        .map(|i| format!("x0_{i}"))
        .chain(["i_value", "certificate", "evaluations", "contracted_value"].map(String::from))
        .collect();
    lines.push(config::csv_line(&header));
    for k in 0..points {
        let t = start + (stop - start) * k as f64 / (points - 1) as f64;
        let x0 = scan_point(&spec, t)?;
        let (result, contracted) = if let Some(law) = &law {
            let r = rate::rate_cramer(law, &DVector::from_vec(x0.clone()), &opts)?;
            let c = r.value;
            (r, c)
        } else {
            let cv = lie::CartanVector::from_coords(&spec, &DVector::from_vec(x0.clone()))?;
            let cd = moment::ChamberDecomposition { x0: cv.clone(), h: GroupElement::identity(&spec) };
            let r = rate::rate_an_at(&rep, &spec, &rho, &cd, &opts)?;
            let (c, _) = rate::rate_contracted(&rep, &spec, &rho, &cv, &opts)?;
            (r, c)
        };
        let tag = match result.certificate {
            Certificate::Converged { .. } => "converged",
            Certificate::Diverged { .. } => "diverged",
            Certificate::ClosedForm => "closed_form",
        };
        let fields: Vec<String> = x0
            .iter()
            .map(|v| config::csv_float(*v))
            .chain([
                config::csv_float(result.value),
                tag.to_string(),
                result.evaluations.to_string(),
                config::csv_float(contracted),
            ])
            .collect();
        lines.push(config::csv_line(&fields));
    }
    write_output(out, &(lines.join("\n") + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

// ---------- simulate ----------

#[derive(Serialize)]
struct SimulateRow {
    m: usize,
    mu: f64,
    ci_lo: f64,
    ci_hi: f64,
    rate: f64,
    inf_rate: f64,
    log_rhs: f64,
    bound_holds: bool,
    exact: bool,
}

#[derive(Serialize)]
struct SimulateSummary {
    lln_nondecreasing: bool,
    upper_bound_ok: bool,
    samples: usize,
    seed: u64,
    workers: usize,
}

#[derive(Serialize)]
struct SimulateReport {
    rows: Vec<SimulateRow>,
    summary: SimulateSummary,
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    config_path: &str,
    m_list: &str,
    region_text: &str,
    samples: usize,
    seed: Option<u64>,
    workers: Option<usize>,
    format: Option<Format>,
    out: Option<&str>,
) -> Result<ExitCode> {
    let cfg = load_config(config_path)?;
    let seed = seed.unwrap_or(cfg.seed);
    let workers = workers.unwrap_or(cfg.workers).max(1);
    let opts = cfg.optimizer.build(seed);
    let spec = cfg.group_spec()?;
    let rep = cfg.representation()?;
    let rho = cfg.state()?;
    let m_values = config::parse_m_list(m_list)?;
    let center = moment::moment_map(&rep, &spec, &rho)?;
    let region = config::parse_region(region_text, Some(&center))?;
    let format = format.unwrap_or(match cfg.output.as_ref().map(|o| &o.format) {
        Some(FormatConfig::Json) => Format::Json,
        _ => Format::Csv,
    });

    let inf_rate = sim::inf_rate_over_region(&rep, &spec, &rho, &region, &opts)?;
    let d = rep.dimension() as f64;
    let exponent = d * (d + 1.0) / 2.0;
    let mut rows = Vec::with_capacity(m_values.len());
    for &m in &m_values {
        let ctx = sim::sim_context(&rep, &spec, &rho, m)?;
        let (mu, ci, exact) = match sim::mu_exact(&ctx, &region) {
            Some(v) => (v, (v, v), true),
            None => {
                let est = sim::estimate_mu(&ctx, &region, samples, seed, workers)?;
                (est.p_hat, est.ci, false)
            }
        };
        let log_rhs = exponent * ((m + 1) as f64).ln() - m as f64 * inf_rate;
        let upper = if exact { mu } else { ci.1 };
        rows.push(SimulateRow {
            m,
            mu,
            ci_lo: ci.0,
            ci_hi: ci.1,
            rate: if mu > 0.0 { -mu.ln() / m as f64 } else { f64::INFINITY },
            inf_rate,
            log_rhs,
            bound_holds: upper <= 0.0 || upper.ln() <= log_rhs + 1e-12,
            exact,
        });
    }
    let lln = rows.windows(2).all(|w| w[1].mu >= w[0].mu - 1e-12);
    let report = SimulateReport {
        summary: SimulateSummary {
            lln_nondecreasing: lln,
            upper_bound_ok: rows.iter().all(|r| r.bound_holds),
            samples,
            seed,
            workers,
        },
        rows,
    };
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
            write_output(out, &format!("{text}\n"))?;
        }
        Format::Csv => {
            let mut lines = vec![config::csv_line(&[
                "m", "mu", "ci_lo", "ci_hi", "rate", "inf_rate", "log_rhs", "bound_holds", "exact",
            ]
            .map(String::from))];
            for r in &report.rows {
                lines.push(config::csv_line(&[
                    r.m.to_string(),
                    config::csv_float(r.mu),
                    config::csv_float(r.ci_lo),
                    config::csv_float(r.ci_hi),
                    config::csv_float(r.rate),
                    config::csv_float(r.inf_rate),
                    config::csv_float(r.log_rhs),
                    r.bound_holds.to_string(),
                    r.exact.to_string(),
                ]));
            }
            write_output(out, &(lines.join("\n") + "\n"))?;
            eprintln!(
                "summary: lln_nondecreasing={} upper_bound_ok={}",
                report.summary.lln_nondecreasing, report.summary.upper_bound_ok
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---------- selftest ----------

struct SuiteResult {
    name: &'static str,
    cases: usize,
    max_residual: f64,
    tolerance: f64,
}

impl SuiteResult {
    fn pass(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

fn cmd_selftest(_config: Option<&str>, inject_iwasawa_error: bool) -> Result<ExitCode> {
    let mut rng = ChaCha12Rng::seed_from_u64(0x5e1f_1e57);
    let mut results = Vec::new();

    // Iwasawa reconstruction over mixed groups
    {
        let specs = [
            GroupSpec::single(GroupAtom::Unitary(2)),
            GroupSpec::single(GroupAtom::Unitary(3)),
            GroupSpec::single(GroupAtom::Su2),
            GroupSpec::single(GroupAtom::Torus(3)),
        ];
        let mut max_res = 0.0f64;
        let mut cases = 0;
        for spec in &specs {
            for _ in 0..100 {
                let g = random_group_point(spec, &mut rng);
                let iw = lie::iwasawa(&g)?;
                let mut err = iw.reconstruct().distance(&g);
                if inject_iwasawa_error {
                    err += 1e-6;
                }
                max_res = max_res.max(err);
                cases += 1;
            }
        }
        results.push(SuiteResult { name: "iwasawa_roundtrip", cases, max_residual: max_res, tolerance: 1e-10 });
    }

    // χ cocycle and inverse relation over 10³ pairs
    {
        let spec = GroupSpec::single(GroupAtom::Unitary(2));
        let mut max_res = 0.0f64;
        for _ in 0..1000 {
            let x = random_dual(&spec, &mut rng);
            let g1 = random_group_point(&spec, &mut rng);
            let g2 = random_group_point(&spec, &mut rng);
            let lhs = moment::ln_chi(&x, &g2.mul(&g1))?;
            let rhs = moment::ln_chi(&moment::extended_action(&g1, &x)?, &g2)? + moment::ln_chi(&x, &g1)?;
            max_res = max_res.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
            let gi = g1.inverse()?;
            let a = moment::ln_chi(&x, &gi)?;
            let b = -moment::ln_chi(&moment::extended_action(&gi, &x)?, &g1)?;
            max_res = max_res.max((a - b).abs() / (1.0 + a.abs()));
        }
        results.push(SuiteResult { name: "chi_cocycle", cases: 1000, max_residual: max_res, tolerance: 1e-9 });
    }

    // SU(2) pairing closed form vs definition
    {
        let spec = GroupSpec::single(GroupAtom::Su2);
        let mut max_res = 0.0f64;
        for _ in 0..200 {
            let x = random_dual(&spec, &mut rng);
            let xi = random_dual(&spec, &mut rng);
            let (xm, xim) = match (&x.factors[0], &xi.factors[0]) {
                (lie::AlgFactor::Hermitian(a), lie::AlgFactor::Hermitian(b)) => (a.clone(), b.clone()),
                _ => unreachable!(),
            };
            let closed = moment::su2_pairing_closed(&xm, &xim);
            let defn = moment::nonlinear_pairing(&x, &xi)?;
            max_res = max_res.max((closed - defn).abs());
        }
        results.push(SuiteResult { name: "su2_pairing", cases: 200, max_residual: max_res, tolerance: 1e-10 });
    }

    // rate function vanishes at the moment-map value
    {
        let spec = GroupSpec::single(GroupAtom::Unitary(2));
        let rep = RepresentationSpec::Standard(2);
        let opts = OptimizerOptions::default();
        let mut max_res = 0.0f64;
        for _ in 0..10 {
            let rho = random_state(2, &mut rng);
            let x = moment::moment_map(&rep, &spec, &rho)?;
            let r = rate::rate_numeric(&rep, &spec, &rho, &x, &opts)?;
            max_res = max_res.max(r.value.abs());
        }
        results.push(SuiteResult { name: "rate_zero_at_mean", cases: 10, max_residual: max_res, tolerance: 1e-6 });
    }

    // sampler block law resolves to a distribution and outcomes keep their shape
    {
        let spec = GroupSpec::single(GroupAtom::Unitary(2));
        let rep = RepresentationSpec::Standard(2);
        let rho = random_state(2, &mut rng);
        let ctx = sim::sim_context(&rep, &spec, &rho, 6)?;
        let total: f64 = ctx.blocks.iter().map(|b| b.prob).sum();
        let mut max_res = (total - 1.0).abs();
        for _ in 0..50 {
            let o = sim::sample_measurement(&ctx, &mut rng)?;
            let cd = moment::chamber_decompose(&o.x);
            let got = cd.x0.coords();
            for (g, w) in got.iter().zip(&o.x0()) {
                max_res = max_res.max((g - w).abs());
            }
        }
        results.push(SuiteResult { name: "sampler_invariants", cases: 50, max_residual: max_res, tolerance: 1e-9 });
    }

    let mut all_pass = true;
    for r in &results {
        let verdict = if r.pass() { "pass" } else { "FAIL" };
        println!(
            "{}: {} ({} cases, max residual {:.3e}, tolerance {:.1e})",
            r.name, verdict, r.cases, r.max_residual, r.tolerance
        );
        all_pass &= r.pass();
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

// ---------- selftest helpers ----------

fn random_group_point(spec: &GroupSpec, rng: &mut ChaCha12Rng) -> GroupElement {
    // exp(ξ/2)·k: a generic point of G = K·exp(𝔞)·N with bounded conditioning
    let xi = random_dual(spec, rng);
    lie::exp_alg(&xi.scale(0.5), 1.0).mul(&lie::haar_sample(spec, rng))
}

fn random_dual(spec: &GroupSpec, rng: &mut ChaCha12Rng) -> lie::DualVector {
    use rand_distr::{Distribution, StandardNormal};
    let dim = rate::xi_dim(spec);
    let v = DVector::from_fn(dim, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        0.5 * z
    });
    rate::vec_to_alg(spec, &v)
}

fn random_state(d: usize, rng: &mut ChaCha12Rng) -> DMatrix<C64> {
    use rand_distr::{Distribution, StandardNormal};
    let g = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let p = &g * g.adjoint() + DMatrix::<C64>::identity(d, d) * C64::new(0.05, 0.0);
    let tr = p.trace().re;
    p.map(|z| z / tr)
}
