//! Command implementations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use pls_core::eigensolver::{
    j01, rayleigh_quotient, richardson_lambda, smallest_eigenpair, GridField, PlsfFile, Role, SolverOptions,
};
use pls_core::envelope::{convex_envelope, Envelope};
use pls_core::geometry::{make_domain, rasterize, ConvexDomain, DomainSpec, GridMask};
use pls_core::transforms::{
    kappa_bar, locality_data, omega_kappa_mask, psi as psi_value, reconstruct_u_kappa, w_field, ConcavityParams,
};
use pls_core::verify::{self, CheckResult, MonotonicityPairs, SamplerConfig};
use pls_core::Error;
use serde::Serialize;

use crate::expr::{evaluate, split_list};
use crate::report::{GridInfo, Report, Run, SolveSidecar, ThresholdEntry, ThresholdReport, TOOL, VERSION};
use crate::{FieldArgs, GridArgs};

pub const EXIT_IO: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_CONFIG: u8 = 4;
pub const EXIT_CHECK: u8 = 5;

/// Every check `verify` knows, in report order.
pub const ALL_CHECKS: [&str; 12] = [
    "segment_concavity",
    "hessian_convexity",
    "ac_modulus",
    "li_yau",
    "pde_residual",
    "envelope_gradient",
    "subsolution",
    "lipschitz",
    "rayleigh",
    "locality",
    "alpha_kappa_monotonicity",
    "trace_concavity",
];

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: message.into() }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Format(_) => EXIT_IO,
            Error::NonConvergence { .. } | Error::LinearSolve { .. } => EXIT_SOLVER,
            _ => EXIT_CONFIG,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn number(text: &str, what: &str, kbar: Option<f64>) -> Outcome<f64> {
    evaluate(text, kbar).map_err(|e| Failure::config(format!("--{what}: {e}")))
}

fn numbers(text: &str, what: &str, kbar: Option<f64>) -> Outcome<Vec<f64>> {
    let items = split_list(text);
    if items.is_empty() {
        return Err(Failure::config(format!("--{what} is empty")));
    }
    items.into_iter().map(|item| number(item, what, kbar)).collect()
}

fn create(path: &Path) -> Outcome<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Outcome {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::io(path, e))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| Failure::io(path, e))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(value: &impl Serialize) {
    emit(&(serde_json::to_string_pretty(value).expect("report serialises") + "\n"));
}

fn sidecar_path(field: &Path) -> PathBuf {
    let mut name = field.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

struct Grid {
    spec: DomainSpec,
    domain: ConvexDomain,
    mask: Arc<GridMask>,
}

fn load_grid(args: &GridArgs) -> Outcome<Grid> {
    let text = std::fs::read_to_string(&args.domain).map_err(|e| Failure::io(&args.domain, e))?;
    let spec = DomainSpec::from_json(&text).map_err(|e| Failure::config(format!("{}: {e}", args.domain.display())))?;
    let domain = make_domain(&spec)?;
    let h = number(&args.h, "h", None)?;
    let mask = Arc::new(rasterize(&domain, h)?);
    mask.check_resolution()?;
    Ok(Grid { spec, domain, mask })
}

/// The ground state with its eigenvalue and where that eigenvalue came from.
struct Ground {
    grid: Grid,
    u: GridField,
    lambda1: f64,
    source: &'static str,
}

fn load_ground(args: &FieldArgs) -> Outcome<Ground> {
    let grid = load_grid(&args.grid)?;
    let Some(path) = &args.field else {
        let r = smallest_eigenpair(grid.mask.clone(), &SolverOptions::default())?;
        return Ok(Ground { grid, u: r.u, lambda1: r.lambda1, source: "solved" });
    };
    let file = File::open(path).map_err(|e| Failure::io(path, e))?;
    let u = PlsfFile::read(BufReader::new(file))
        .map_err(|e| Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) })?
        .into_field(grid.mask.clone())
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    if u.role() != Role::U {
        return Err(Failure::config(format!("{} holds a {:?} field, not u", path.display(), u.role())));
    }
    let sidecar = sidecar_path(path);
    let stored = std::fs::read_to_string(&sidecar)
        .ok()
        .and_then(|text| serde_json::from_str::<serde_json::Value>(&text).ok())
        .and_then(|v| v.get("lambda1").and_then(|l| l.as_f64()));
    let (lambda1, source) = match stored {
        Some(l) => (l, "sidecar"),
        None => (rayleigh_quotient(&grid.mask, u.values())?, "rayleigh_quotient"),
    };
    Ok(Ground { grid, u, lambda1, source })
}

pub fn solve(args: &GridArgs, out: &Path, richardson: bool) -> Outcome {
    let grid = load_grid(args)?;
    let options = SolverOptions::default();
    let r = smallest_eigenpair(grid.mask.clone(), &options)?;
    let extrapolated = if richardson {
        Some(richardson_lambda(&grid.domain, &[2.0 * grid.mask.h(), grid.mask.h()], &options)?)
    } else {
        None
    };
    let mut file = create(out)?;
    r.u.write_plsf(&mut file)?;
    file.flush().map_err(|e| Failure::io(out, e))?;
    let sidecar = SolveSidecar {
        tool: TOOL,
        version: VERSION,
        domain: grid.spec,
        grid: GridInfo::of(&grid.mask),
        lambda1: r.lambda1,
        residual: r.residual,
        iterations: r.iterations,
        inner_iterations: r.inner_iterations,
        diameter: grid.domain.diameter(),
        richardson: extrapolated,
    };
    write_json(&sidecar_path(out), &sidecar)?;
    print_json(&sidecar);
    Ok(())
}

pub fn threshold(args: &FieldArgs, kappa: Option<&str>, out: Option<&Path>) -> Outcome {
    let g = load_ground(args)?;
    let diameter = g.grid.domain.diameter();
    let kb = kappa_bar(g.lambda1, diameter)?;
    let kappas = match kappa {
        Some(text) => numbers(text, "kappa", Some(kb))?,
        None => Vec::new(),
    };
    let mut entries = Vec::new();
    for k in kappas {
        let data = locality_data(k, g.lambda1, diameter)?;
        let omega_nodes = omega_kappa_mask(&g.u, data.u_bar).iter().filter(|&&m| m).count();
        entries.push(ThresholdEntry { kappa: k, w_bar: data.w_bar, u_bar: data.u_bar, omega_nodes });
    }
    let report = ThresholdReport { lambda1: g.lambda1, diameter, kappa_bar: kb, kappas: entries };
    if let Some(path) = out {
        write_json(path, &report)?;
    }
    print_json(&report);
    Ok(())
}

fn band_or(text: Option<&str>, default: f64) -> Outcome<f64> {
    let band = match text {
        Some(t) => number(t, "band", None)?,
        None => default,
    };
    if band < 0.0 {
        return Err(Failure::config(format!("--band must be nonnegative, got {band}")));
    }
    Ok(band)
}

#[derive(Serialize)]
struct EnvelopeSummary {
    kappa: f64,
    band: f64,
    facets: usize,
    hull_vertices: usize,
    eps_conv: f64,
    gap_nodes: usize,
    max_gap: f64,
}

pub fn envelope(args: &FieldArgs, kappa: &str, band: Option<&str>, out: &Path, field_out: Option<&Path>) -> Outcome {
    let g = load_ground(args)?;
    let kb = kappa_bar(g.lambda1, g.grid.domain.diameter())?;
    let k = number(kappa, "kappa", Some(kb))?;
    let band = band_or(band, verify::default_envelope_band(&g.grid.mask))?;
    let w = w_field(&g.u, k)?;
    let env = convex_envelope(&w, band)?;
    let eps = verify::eps_conv(&w, band)?;
    let mut csv = create(out)?;
    env.write_facets_csv(&mut csv)?;
    csv.flush().map_err(|e| Failure::io(out, e))?;
    if let Some(path) = field_out {
        let mut file = create(path)?;
        env.field().write_plsf(&mut file)?;
        file.flush().map_err(|e| Failure::io(path, e))?;
    }
    let gaps: Vec<f64> = w.values().iter().zip(env.values()).map(|(a, b)| a - b).collect();
    print_json(&EnvelopeSummary {
        kappa: k,
        band,
        facets: env.facets().len(),
        hull_vertices: env.hull_vertices().len(),
        eps_conv: eps.value,
        gap_nodes: gaps.iter().filter(|&&d| d > eps.value).count(),
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
    });
    Ok(())
}

pub struct VerifyOptions {
    pub kappa: String,
    pub alpha: String,
    pub band: Option<String>,
    pub checks: String,
    pub seed: u64,
    pub pairs: usize,
    pub t_values: String,
    pub trials: usize,
    pub richardson: bool,
}

fn selected_checks(text: &str) -> Outcome<Vec<&'static str>> {
    let items = split_list(text);
    if items.contains(&"all") {
        return Ok(ALL_CHECKS.to_vec());
    }
    if items.is_empty() {
        return Err(Failure::config("--checks is empty"));
    }
    // Keep report order and drop repeats.
    for item in &items {
        if !ALL_CHECKS.contains(item) {
            return Err(Failure::config(format!("unknown check `{item}`; known: {}", ALL_CHECKS.join(", "))));
        }
    }
    Ok(ALL_CHECKS.iter().copied().filter(|c| items.contains(c)).collect())
}

/// Fields derived from one κ, built on first use.
struct KappaContext {
    kappa: f64,
    w: Option<pls_core::Result<GridField>>,
    envelope: Option<pls_core::Result<(Envelope, GridField)>>,
}

impl KappaContext {
    fn w(&mut self, u: &GridField) -> pls_core::Result<&GridField> {
        let kappa = self.kappa;
        self.w.get_or_insert_with(|| w_field(u, kappa)).as_ref().map_err(clone_error)
    }

    /// The envelope of `w_κ` and the reconstruction `u_κ`.
    fn envelope(&mut self, u: &GridField, band: f64) -> pls_core::Result<&(Envelope, GridField)> {
        if self.envelope.is_none() {
            let kappa = self.kappa;
            let built = self.w(u).and_then(|w| {
                let env = convex_envelope(w, band)?;
                let u_kappa = reconstruct_u_kappa(&env.field(), kappa)?;
                Ok((env, u_kappa))
            });
            self.envelope = Some(built);
        }
        self.envelope.as_ref().expect("just set").as_ref().map_err(clone_error)
    }
}

fn clone_error(e: &Error) -> Error {
    Error::InvalidParameter(e.to_string())
}

pub fn verify(args: &FieldArgs, options: &VerifyOptions, report_path: Option<&Path>) -> Outcome {
    let g = load_ground(args)?;
    let mask = &g.grid.mask;
    let diameter = g.grid.domain.diameter();
    let kb = kappa_bar(g.lambda1, diameter)?;
    let kappas = numbers(&options.kappa, "kappa", Some(kb))?;
    let alphas = numbers(&options.alpha, "alpha", Some(kb))?;
    for &k in &kappas {
        ConcavityParams::new(0.5, k).map_err(|_| Failure::config(format!("--kappa {k} is outside (0, 1]")))?;
    }
    for &a in &alphas {
        ConcavityParams::new(a, 0.5).map_err(|_| Failure::config(format!("--alpha {a} is outside (0, 1]")))?;
    }
    let band = band_or(options.band.as_deref(), verify::default_check_band(mask))?;
    let sampler = SamplerConfig {
        seed: options.seed,
        pair_count: options.pairs,
        t_values: numbers(&options.t_values, "t-values", None)?,
        band: Some(band),
    };
    sampler.validate()?;
    let checks = selected_checks(&options.checks)?;
    let richardson = if options.richardson {
        Some(richardson_lambda(&g.grid.domain, &[2.0 * mask.h(), mask.h()], &SolverOptions::default())?)
    } else {
        None
    };
    let envelope_band = verify::default_envelope_band(mask);
    let u = &g.u;
    let lambda1 = g.lambda1;

    let mut runs = Vec::new();
    for &kappa in &kappas {
        let mut ctx = KappaContext { kappa, w: None, envelope: None };
        let data = if kappa < 1.0 { locality_data(kappa, lambda1, diameter).ok() } else { None };
        for &alpha in &alphas {
            let mut results = Vec::new();
            for &name in &checks {
                let outcome: pls_core::Result<CheckResult> = match name {
                    "segment_concavity" => ConcavityParams::new(alpha, kappa)
                        .and_then(|p| verify::segment_concavity_check(u, p, &sampler)),
                    "hessian_convexity" => ctx.w(u).and_then(|w| verify::hessian_convexity_check(w, band)),
                    "ac_modulus" => verify::ac_modulus_check(u, diameter, &sampler),
                    "li_yau" => verify::li_yau_check(u, lambda1, band),
                    "pde_residual" => ctx.w(u).and_then(|w| verify::pde_residual_check(w, lambda1, band)),
                    "envelope_gradient" => {
                        let w = ctx.w(u).cloned();
                        w.and_then(|w| {
                            let (env, _) = ctx.envelope(u, envelope_band)?;
                            verify::envelope_gradient_check(&w, env, diameter)
                        })
                    }
                    "subsolution" => ctx
                        .envelope(u, envelope_band)
                        .and_then(|(_, uk)| verify::subsolution_check(uk, lambda1, band)),
                    "lipschitz" => ctx
                        .envelope(u, envelope_band)
                        .and_then(|(_, uk)| verify::lipschitz_check(uk, lambda1, band)),
                    "rayleigh" => ctx.envelope(u, envelope_band).and_then(|(_, uk)| verify::rayleigh_check(uk, lambda1)),
                    "locality" => verify::locality_check(u, lambda1, kappa, Some(envelope_band)).map(|r| r.check),
                    "alpha_kappa_monotonicity" => {
                        verify::alpha_kappa_monotonicity(u, &MonotonicityPairs::default(), &sampler)
                    }
                    "trace_concavity" => verify::trace_concavity_property(options.seed, options.trials),
                    _ => unreachable!("validated check name"),
                };
                results.push(outcome.unwrap_or_else(|e| CheckResult::from_error(name, &e)));
            }
            runs.push(Run {
                kappa,
                alpha,
                w_bar: data.map(|d| d.w_bar),
                u_bar: data.map(|d| d.u_bar),
                omega_nodes: data.map(|d| omega_kappa_mask(u, d.u_bar).iter().filter(|&&m| m).count()),
                checks: results,
            });
        }
    }
    let pass = runs.iter().all(|r| r.checks.iter().all(|c| c.pass));
    let vacuous = runs
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| c.vacuous).map(move |c| format!("{}@{}", c.name, r.kappa)))
        .collect();
    let report = Report {
        tool: TOOL,
        version: VERSION,
        domain: g.grid.spec.clone(),
        grid: GridInfo::of(mask),
        lambda1,
        lambda_source: g.source,
        richardson,
        diameter,
        kappa_bar: kb,
        seed: options.seed,
        band,
        pair_count: options.pairs,
        runs,
        pass,
        vacuous,
    };
    if let Some(path) = report_path {
        write_json(path, &report)?;
    }
    print_json(&report);
    for run in &report.runs {
        for c in run.checks.iter().filter(|c| !c.pass) {
            let why = match (&c.error, c.worst_violation) {
                (Some(e), _) => e.clone(),
                (None, Some(v)) => format!("worst violation {v} exceeds tolerance {}", c.tolerance),
                (None, None) => "structural requirement not met".into(),
            };
            eprintln!("FAIL {} at kappa {} alpha {}: {why}", c.name, run.kappa, run.alpha);
        }
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure { code: EXIT_CHECK, message: "one or more checks failed".into() })
    }
}

/// Grid `s_max·i/n` for `i = 1..=n`, with the zeros `√(−log κ)` of every
/// `κ < 1` inserted exactly.
fn psi_grid(kappas: &[f64], s_max: f64, n_points: usize) -> Vec<f64> {
    let mut s: Vec<f64> = (1..=n_points).map(|i| s_max * i as f64 / n_points as f64).collect();
    s.extend(kappas.iter().filter(|&&k| k < 1.0).map(|&k| (-k.ln()).sqrt()).filter(|&z| z <= s_max));
    s.sort_by(f64::total_cmp);
    s.dedup();
    s
}

pub fn psi(kappa: &str, s_max: &str, n_points: usize, target: Option<&str>, out: Option<&Path>) -> Outcome {
    let kappas = numbers(kappa, "kappa", None)?;
    if let Some(&k) = kappas.iter().find(|&&k| !(k > 0.0 && k <= 1.0)) {
        return Err(Failure::config(format!("--kappa {k} is outside (0, 1]")));
    }
    let s_max = number(s_max, "s-max", None)?;
    if s_max.is_nan() || s_max <= 0.0 {
        return Err(Failure::config("--s-max must be positive"));
    }
    if n_points == 0 {
        return Err(Failure::config("--n-points must be at least 1"));
    }
    let target = match target {
        Some(t) => number(t, "target", None)?,
        None => {
            let j = j01();
            std::f64::consts::PI.powi(2) / (4.0 * j * j)
        }
    };
    let mut text = String::from("s");
    for i in 1..=kappas.len() {
        text.push_str(&format!(",psi_k{i}"));
    }
    text.push_str(",target\n");
    for s in psi_grid(&kappas, s_max, n_points) {
        text.push_str(&format!("{s:?}"));
        for &k in &kappas {
            text.push(',');
            text.push_str(&format!("{:?}", psi_value(k, s)));
        }
        text.push_str(&format!(",{target:?}\n"));
    }
    match out {
        Some(path) => {
            let mut f = create(path)?;
            f.write_all(text.as_bytes()).and_then(|_| f.flush()).map_err(|e| Failure::io(path, e))?;
        }
        None => emit(&text),
    }
    let labels: Vec<String> = kappas.iter().enumerate().map(|(i, k)| format!("psi_k{}: kappa = {k}", i + 1)).collect();
    eprintln!("{}", labels.join("; "));
    Ok(())
}

pub fn sweep(
    args: &FieldArgs,
    band: Option<&str>,
    iterations: usize,
    out: Option<&Path>,
    report: Option<&Path>,
) -> Outcome {
    let g = load_ground(args)?;
    let band = band_or(band, verify::default_check_band(&g.grid.mask))?;
    let result = verify::sweep_kappa(&g.u, g.lambda1, band, iterations)?;
    if let Some(path) = out {
        let mut f = create(path)?;
        let mut text = String::from("kappa,pass,worst_violation,tolerance\n");
        for p in &result.log {
            let worst = p.worst_violation.map_or_else(String::new, |v| v.to_string());
            text.push_str(&format!("{},{},{},{}\n", p.kappa, p.pass, worst, p.tolerance));
        }
        f.write_all(text.as_bytes()).and_then(|_| f.flush()).map_err(|e| Failure::io(path, e))?;
    }
    if let Some(path) = report {
        write_json(path, &result)?;
    }
    print_json(&result);
    Ok(())
}
