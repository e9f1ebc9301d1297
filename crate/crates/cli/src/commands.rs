//! Subcommand arguments and implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use svine_core::inference::{fit_full, semi_empirical_kpacf};
use svine_core::process::{convergence_experiment, simulate};
use svine_core::special::norm_quantile;
use svine_core::{Error, Family, FitReport, NegativeRule};

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::spec::{self, ModelSpecFile, Overrides, DEFAULT_TRUNCATION};
use crate::table::{fmt_num, read_column, write_rows};

#[derive(Debug, Parser)]
#[command(name = "svine", version, about = "Stationary d-vine copula time-series processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a path from a model specification.
    Simulate(SimulateArgs),
    /// Fit a kpacf-parameterized process (and margin) to a data column.
    Fit(FitArgs),
    /// Run the filter-convergence experiment for each listed family.
    Experiment(ExperimentArgs),
    /// Normal QQ data for the residuals stored in a fit report.
    ResidualQq(ResidualQqArgs),
    /// Print the Gaussian pacf and Kendall pacf of a specification.
    Kpacf(KpacfArgs),
}

#[derive(Debug, Args)]
pub struct SpecSource {
    /// Model specification JSON file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub spec: Option<PathBuf>,
    /// Shipped specification (clayton-excursions, clayton-excursions-rot90, arma11, arfima, arma51-template).
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct ModelFlags {
    /// Pair-copula families, comma separated (overrides the file).
    #[arg(long, value_delimiter = ',')]
    pub family: Option<Vec<Family>>,
    /// Handling of negative Kendall tau for families without negative dependence.
    #[arg(long)]
    pub negative_rule: Option<NegativeRule>,
    /// Number of lags with non-independence copulas.
    #[arg(long)]
    pub truncation: Option<usize>,
}

impl ModelFlags {
    fn overrides(&self) -> Overrides {
        Overrides { families: self.family.clone(), negative_rule: self.negative_rule, truncation: self.truncation }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SpecSource,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Path length.
    #[arg(short, long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Single-column numeric CSV, optional header.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub source: SpecSource,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Margin to fit (normal, skewed_student, empirical); overrides the file.
    #[arg(long)]
    pub margin: Option<svine_core::MarginKind>,
    /// Lags of the semi-empirical kpacf.
    #[arg(long, default_value_t = 20)]
    pub kpacf_lags: usize,
    /// Report JSON; residual and kpacf CSVs are written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub source: SpecSource,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Number of innovations; rows k = 1..n-1.
    #[arg(short, long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory, one CSV per family.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ResidualQqArgs {
    /// Fit report JSON.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KpacfArgs {
    #[command(flatten)]
    pub source: SpecSource,
    /// Number of lags (default: the specification's horizon).
    #[arg(long)]
    pub lags: Option<usize>,
    /// Also write the table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A loaded specification and the bytes it came from.
struct Loaded {
    spec: ModelSpecFile,
    label: String,
    bytes: Vec<u8>,
}

fn load(src: &SpecSource) -> CliResult<Loaded> {
    match (&src.spec, &src.preset) {
        (Some(path), _) => {
            let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::input("specification is not UTF-8"))?;
            let spec = ModelSpecFile::parse(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            Ok(Loaded { spec, label: path.display().to_string(), bytes })
        }
        (None, Some(name)) => {
            let spec = spec::preset(name)?;
            let text = spec::PRESETS.iter().find(|(n, _)| n == name).map(|(_, t)| *t).unwrap_or_default();
            Ok(Loaded { spec, label: format!("preset:{name}"), bytes: text.as_bytes().to_vec() })
        }
        (None, None) => Err(CliError::input("give --spec or --preset")),
    }
}

fn arguments() -> Vec<String> {
    std::env::args().skip(1).collect()
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Fit(a) => cmd_fit(&a, out),
        Command::Experiment(a) => cmd_experiment(&a, out),
        Command::ResidualQq(a) => cmd_residual_qq(&a, out),
        Command::Kpacf(a) => cmd_kpacf(&a, out),
    }
}

fn describe_sequence(seq: &svine_core::CopulaSequence) -> String {
    let mut parts: Vec<String> = Vec::new();
    for c in seq.copulas() {
        let name = if c.rotation() == svine_core::Rotation::R0 {
            c.family().to_string()
        } else {
            format!("{}@{}", c.family(), c.rotation().degrees())
        };
        if !parts.contains(&name) {
            parts.push(name);
        }
    }
    if parts.is_empty() {
        "independence".into()
    } else {
        parts.join(", ")
    }
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.n == 0 {
        return Err(CliError::input("-n must be positive"));
    }
    let loaded = load(&a.source)?;
    let default_p = loaded.spec.kpacf.as_ref().and_then(|k| k.horizon).unwrap_or(DEFAULT_TRUNCATION);
    let mut models = loaded.spec.models(&a.model.overrides(), default_p)?;
    if models.len() != 1 {
        return Err(CliError::input(format!("simulate takes one family, {} given", models.len())));
    }
    let (_, model) = models.remove(0);
    let path = simulate(&model, a.n, a.seed)?;
    match &path.x {
        Some(x) => write_rows(&a.out, &["u", "x"], path.u.iter().zip(x).map(|(u, x)| vec![fmt_num(*u), fmt_num(*x)]))?,
        None => write_rows(&a.out, &["u"], path.u.iter().map(|u| vec![fmt_num(*u)]))?,
    }
    let mut m = RunManifest::new("simulate", arguments(), Some(a.seed));
    m.add_input(&loaded.label, &loaded.bytes);
    m.add_output(&a.out)?;
    m.write_for(&a.out)?;
    writeln!(
        out,
        "simulated n={} seed={} truncation={} copulas: {}",
        a.n,
        a.seed,
        path.truncation_lag,
        describe_sequence(&model.seq)
    )?;
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> CliResult<()> {
    let data_bytes = std::fs::read(&a.data).map_err(|e| CliError::input(format!("{}: {e}", a.data.display())))?;
    let x = read_column(&a.data)?;
    if x.len() < 2 {
        return Err(CliError::input(format!("{}: need at least 2 observations, found {}", a.data.display(), x.len())));
    }
    let loaded = load(&a.source)?;
    let ov = a.model.overrides();
    let template = loaded.spec.fit_template()?;
    let families = loaded.spec.families(&ov);
    let [family] = families[..] else {
        return Err(CliError::input(format!("fit takes one family, {} given", families.len())));
    };
    let rule = loaded.spec.negative_rule(&ov);
    let truncation = loaded.spec.truncation(&ov, template.horizon);
    let margin = a.margin.unwrap_or_else(|| loaded.spec.margin_kind());

    let (report, converged) = match fit_full(&x, margin, &template, family, rule, truncation) {
        Ok(r) => (r, true),
        Err(Error::NotConverged(r)) => (*r, false),
        Err(e) => return Err(e.into()),
    };
    let u = match &report.margin_fit {
        Some(m) => m.model.pit(&x),
        None => svine_core::inference::pseudo_observations(&x),
    };
    let seq = report.sequence()?;
    let lags = a.kpacf_lags.min(x.len() - 1);
    let semi = semi_empirical_kpacf(&u, &seq, lags)?;
    let model_tau = report.spec().kpacf(lags)?;

    let report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&a.out, report_json + "\n")?;
    let resid_path = sibling(&a.out, "residuals.csv");
    write_rows(
        &resid_path,
        &["t", "z", "z_normal"],
        report
            .residuals_z
            .iter()
            .zip(&report.residuals_normal)
            .enumerate()
            .map(|(t, (z, zn))| vec![(t + 1).to_string(), fmt_num(*z), fmt_num(*zn)]),
    )?;
    let kpacf_path = sibling(&a.out, "kpacf.csv");
    write_rows(
        &kpacf_path,
        &["k", "tau_semi_empirical", "tau_model"],
        semi.iter().zip(&model_tau).enumerate().map(|(k, (s, m))| vec![(k + 1).to_string(), fmt_num(*s), fmt_num(*m)]),
    )?;

    let mut m = RunManifest::new("fit", arguments(), None);
    m.add_input(&a.data.display().to_string(), &data_bytes);
    m.add_input(&loaded.label, &loaded.bytes);
    for p in [&a.out, &resid_path, &kpacf_path] {
        m.add_output(p)?;
    }
    m.write_for(&a.out)?;

    print_report(&report, out)?;
    if converged {
        Ok(())
    } else {
        Err(CliError::Convergence(format!(
            "optimizer did not converge; best point written to {} (flagged converged=false)",
            a.out.display()
        )))
    }
}

fn print_report(r: &FitReport, out: &mut dyn Write) -> CliResult<()> {
    writeln!(
        out,
        "{} kpacf, {} copulas ({:?}), truncation {}",
        r.kpacf_kind, r.copula_family, r.negative_rule, r.truncation_lag
    )?;
    for (i, t) in r.theta_hat.iter().enumerate() {
        let se = r.stderr.as_ref().map_or("n/a".to_string(), |s| format!("{:.4}", s[i]));
        writeln!(out, "  theta[{i}] = {t:.6}  (s.e. {se})")?;
    }
    if let Some(flag) = &r.stderr_flag {
        writeln!(out, "  standard errors unavailable: {flag}")?;
    }
    if let Some(m) = &r.margin_fit {
        writeln!(out, "  margin {:?}: loglik {:.4}", m.model.kind(), m.loglik)?;
    }
    writeln!(out, "loglik {:.4}  parameters {}  AIC {:.4}  converged {}", r.loglik, r.n_params, r.aic, r.converged)?;
    Ok(())
}

pub fn cmd_experiment(a: &ExperimentArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.n < 2 {
        return Err(CliError::input("-n must be at least 2"));
    }
    let loaded = load(&a.source)?;
    let models = loaded.spec.models(&a.model.overrides(), a.n - 1)?;
    std::fs::create_dir_all(&a.out)?;
    let mut m = RunManifest::new("experiment", arguments(), Some(a.seed));
    m.add_input(&loaded.label, &loaded.bytes);
    for (family, model) in &models {
        let rows = convergence_experiment(&model.seq, a.n, a.seed)?;
        let name = family.map_or("sequence".to_string(), |f| f.to_string());
        let path = a.out.join(format!("experiment_{name}.csv"));
        write_rows(
            &path,
            &["k", "value", "ultimate"],
            rows.iter().map(|r| vec![r.k.to_string(), fmt_num(r.value), fmt_num(r.ultimate)]),
        )?;
        m.add_output(&path)?;
        let last = rows.last().expect("n >= 2");
        let far = rows.iter().rev().find(|r| (r.value - r.ultimate).abs() > 0.01).map_or(0, |r| r.k);
        writeln!(
            out,
            "{name}: {} rows, truncation {}, ultimate {:.6}, last k with |S_k - S_n-1| > 0.01: {far}",
            rows.len(),
            model.truncation_lag(),
            last.ultimate
        )?;
    }
    m.write_for(&a.out)?;
    Ok(())
}

pub fn cmd_residual_qq(a: &ResidualQqArgs, out: &mut dyn Write) -> CliResult<()> {
    let bytes = std::fs::read(&a.report).map_err(|e| CliError::input(format!("{}: {e}", a.report.display())))?;
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|e| CliError::input(format!("{}: {e}", a.report.display())))?;
    let resid: Vec<f64> = value
        .get("residuals_normal")
        .and_then(|v| v.as_array())
        .ok_or_else(|| CliError::input(format!("{}: no residuals_normal in report", a.report.display())))?
        .iter()
        .map(|v| v.as_f64().ok_or_else(|| CliError::input("residuals_normal holds a non-number")))
        .collect::<CliResult<_>>()?;
    if resid.is_empty() {
        return Err(CliError::input(format!("{}: report has no residuals", a.report.display())));
    }
    let rows = qq_points(&resid);
    write_rows(&a.out, &["theoretical", "sample"], rows.iter().map(|(t, s)| vec![fmt_num(*t), fmt_num(*s)]))?;
    let mut m = RunManifest::new("residual-qq", arguments(), None);
    m.add_input(&a.report.display().to_string(), &bytes);
    m.add_output(&a.out)?;
    m.write_for(&a.out)?;
    let dev = rows.iter().map(|(t, s)| (t - s).abs()).fold(0.0, f64::max);
    writeln!(out, "{} residuals, max |theoretical - sample| = {dev:.4}", rows.len())?;
    Ok(())
}

/// `(Phi^{-1}(i / (n + 1)), i-th smallest residual)`.
pub fn qq_points(resid: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = resid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.into_iter().enumerate().map(|(i, s)| (norm_quantile((i + 1) as f64 / (n + 1.0)), s)).collect()
}

pub fn cmd_kpacf(a: &KpacfArgs, out: &mut dyn Write) -> CliResult<()> {
    let loaded = load(&a.source)?;
    let spec = loaded.spec.kpacf_spec()?.ok_or_else(|| CliError::input("specification has no 'kpacf' section"))?;
    let lags = a.lags.unwrap_or(spec.horizon);
    let alpha = spec.pacf(lags)?;
    let tau = spec.kpacf(lags)?;
    writeln!(out, "{:>4}  {:>22}  {:>22}", "k", "alpha_k", "tau_k")?;
    for k in 0..lags {
        writeln!(out, "{:>4}  {:>22}  {:>22}", k + 1, fmt_num(alpha[k]), fmt_num(tau[k]))?;
    }
    if let Some(path) = &a.out {
        write_rows(
            path,
            &["k", "alpha", "tau"],
            (0..lags).map(|k| vec![(k + 1).to_string(), fmt_num(alpha[k]), fmt_num(tau[k])]),
        )?;
        let mut m = RunManifest::new("kpacf", arguments(), None);
        m.add_input(&loaded.label, &loaded.bytes);
        m.add_output(path)?;
        m.write_for(path)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qq_plotting_positions() {
        let pts = qq_points(&[0.3, -1.0, 2.0]);
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0], (norm_quantile(0.25), -1.0));
        assert_eq!(pts[1].0, 0.0);
        assert_eq!(pts[2].1, 2.0);
    }

    #[test]
    fn normal_residuals_lie_on_the_diagonal() {
        let resid: Vec<f64> = svine_core::process::uniform_stream(5, 0).take(10_000).map(norm_quantile).collect();
        let dev =
            qq_points(&resid).iter().filter(|(t, _)| t.abs() < 2.0).map(|(t, s)| (t - s).abs()).fold(0.0, f64::max);
        assert!(dev < 0.1, "{dev}");
    }
}
