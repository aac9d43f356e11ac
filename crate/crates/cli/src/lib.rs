//! Command implementations behind the `neighborly` binary.

pub mod args;
mod render;

use anyhow::{anyhow, bail, Context};
use neighborly_core::bounds::{self, BoundSource, Manifold};
use neighborly_core::config_rank::{self, DEFAULT_RANK_TOLERANCE};
use neighborly_core::moment::{self, FourierCurve, MomentError, SweepConfig, Tolerances};
use neighborly_core::sw_classes;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use args::{
    BoundsArgs, Cli, Command, LrArgs, ManifoldArg, MomentArgs, PairingArgs, R2Args, RankArgs,
};
pub use render::{render, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Top-level output shape shared by every command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub command: String,
    pub config: Value,
    pub results: Vec<Value>,
    pub findings: Vec<Finding>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: String,
    pub subject: String,
    pub detail: String,
}

impl Finding {
    fn new(kind: &str, subject: impl Into<String>, detail: impl Into<String>) -> Self {
        Finding {
            kind: kind.into(),
            subject: subject.into(),
            detail: detail.into(),
        }
    }
}

pub struct Outcome {
    pub document: Document,
    pub table: Table,
    /// Every check passed or agreed.
    pub passed: bool,
}

/// Input the commands refuse to run on; maps to exit code 2.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl std::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InvalidInput(msg.into()).into()
}

fn to_values<T: Serialize>(items: &[T]) -> anyhow::Result<Vec<Value>> {
    items
        .iter()
        .map(|x| serde_json::to_value(x).map_err(Into::into))
        .collect()
}

pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let config = match &cli.command {
        Command::Bounds(a) => serde_json::to_value(a)?,
        Command::VerifyTheorem2(a) => serde_json::to_value(a)?,
        Command::VerifyR2Model(a) => serde_json::to_value(a)?,
        Command::Moment(a) => serde_json::to_value(a)?,
        Command::Rank(a) => serde_json::to_value(a)?,
        Command::LrConfig(a) => serde_json::to_value(a)?,
    };
    let (results, findings, table, passed) = match &cli.command {
        Command::Bounds(a) => cmd_bounds(a)?,
        Command::VerifyTheorem2(a) => cmd_verify_theorem2(a)?,
        Command::VerifyR2Model(a) => cmd_verify_r2_model(a)?,
        Command::Moment(a) => cmd_moment(a)?,
        Command::Rank(a) => cmd_rank(a)?,
        Command::LrConfig(a) => cmd_lr_config(a)?,
    };
    Ok(Outcome {
        document: Document {
            command: cli.command.name().into(),
            config,
            results,
            findings,
        },
        table,
        passed,
    })
}

type CommandOutput = (Vec<Value>, Vec<Finding>, Table, bool);

const PAIRING_VANISHES: &str = "pairing-vanishes";

fn pairing_finding(rep: &sw_classes::PairingReport) -> Finding {
    Finding::new(
        PAIRING_VANISHES,
        format!("k={} r={}", rep.k, rep.r),
        format!(
            "the top coefficient of the product of dual classes over the flags of {} orthogonal lines in R^{} is 0 although k is a power of two and r <= k; the nonvanishing used to justify the projective bound is not confirmed here",
            rep.r, rep.k
        ),
    )
}

fn degree_finding() -> Finding {
    Finding::new(
        "degree-mismatch",
        "top degree",
        "the flag manifold has dimension kr - r(r+1)/2; the quoted degree kr - r(r-1)/2 exceeds it by r, so pairings are taken in degree kr - r(r+1)/2",
    )
}

fn cmd_bounds(a: &BoundsArgs) -> anyhow::Result<CommandOutput> {
    if a.k.start == 0 || a.r.start == 0 {
        bail!(invalid("k and r must be at least 1"));
    }
    let manifold = match a.manifold {
        ManifoldArg::Euclidean => Manifold::Euclidean,
        ManifoldArg::Projective => Manifold::Projective,
    };
    let mut certs = bounds::bound_table(a.k.start..=a.k.end, a.r.start..=a.r.end, manifold)
        .map_err(|e| invalid(e.to_string()))?;
    let mut findings = Vec::new();
    if a.with_pairing && manifold == Manifold::Projective {
        for c in certs.iter_mut() {
            let applies = bounds::theorem2_bound(c.k, c.r)
                .map(|t| t.applicable)
                .unwrap_or(false);
            if !applies {
                continue;
            }
            let rep = sw_classes::theorem2_pairing(c.k as usize, c.r as usize)
                .map_err(|e| invalid(e.to_string()))?;
            if c.chosen == Some(BoundSource::Theorem2) && !rep.value {
                findings.push(pairing_finding(&rep));
            }
            *c = c.clone().with_pairing(rep);
        }
    }
    let table = render::bounds_table(&certs, a.k, a.r);
    Ok((to_values(&certs)?, findings, table, true))
}

fn cmd_verify_theorem2(a: &PairingArgs) -> anyhow::Result<CommandOutput> {
    if a.k.start == 0 || a.r.start == 0 {
        bail!(invalid("k and r must be at least 1"));
    }
    if a.k.end > u16::MAX as u64 {
        bail!(invalid("k is too large"));
    }
    let mut reports = Vec::new();
    let mut findings = Vec::new();
    for k in a.k.iter() {
        for r in a.r.iter() {
            if r > k {
                findings.push(Finding::new(
                    "skipped",
                    format!("k={k} r={r}"),
                    "r > k: no flags of r orthogonal lines",
                ));
                continue;
            }
            let rep = sw_classes::theorem2_pairing(k as usize, r as usize)
                .map_err(|e| invalid(e.to_string()))?;
            if !rep.value && k.is_power_of_two() {
                findings.push(pairing_finding(&rep));
            }
            reports.push(rep);
        }
    }
    if !reports.is_empty() {
        findings.push(degree_finding());
    }
    let passed = reports.iter().all(|r| r.agrees);
    let table = render::pairing_table(&reports);
    Ok((to_values(&reports)?, findings, table, passed))
}

fn cmd_verify_r2_model(a: &R2Args) -> anyhow::Result<CommandOutput> {
    if a.k.start < 2 {
        bail!(invalid("the two-point model needs k >= 2"));
    }
    if a.k.end > u16::MAX as u64 {
        bail!(invalid("k is too large"));
    }
    let mut checks = Vec::new();
    let mut findings = Vec::new();
    for k in a.k.iter() {
        let c = sw_classes::theorem1_r2_check(k as usize).map_err(|e| invalid(e.to_string()))?;
        if !k.is_power_of_two() && !c.power_identity {
            findings.push(Finding::new(
                "outside-hypothesis",
                format!("k={k}"),
                "k is not a power of two and (1+a)^k != 1; reported only",
            ));
        }
        checks.push(c);
    }
    let passed = checks
        .iter()
        .filter(|c| c.k.is_power_of_two())
        .all(|c| c.power_identity && c.top_pairing);
    let table = render::r2_table(&checks);
    Ok((to_values(&checks)?, findings, table, passed))
}

fn tolerances(a: &args::ToleranceArgs) -> anyhow::Result<Tolerances> {
    let mut t = Tolerances::default();
    for (slot, value, name) in [
        (&mut t.tol_eq, a.tol_eq, "tol-eq"),
        (&mut t.tol_curv, a.tol_curv, "tol-curv"),
        (&mut t.tol_pos, a.tol_pos, "tol-pos"),
        (&mut t.tol_sep, a.tol_sep, "tol-sep"),
        (&mut t.tol_zero, a.tol_zero, "tol-zero"),
    ] {
        if let Some(v) = value {
            if !v.is_finite() || (name != "tol-pos" && v < 0.0) {
                bail!(invalid(format!("--{name} must be finite and non-negative")));
            }
            *slot = v;
        }
    }
    Ok(t)
}

fn moment_error(e: MomentError) -> anyhow::Error {
    match e {
        MomentError::Degenerate { .. } => anyhow!(e),
        other => invalid(other.to_string()),
    }
}

fn resolve_angles(
    r: Option<usize>,
    angles: &Option<Vec<f64>>,
    seed: u64,
) -> anyhow::Result<(usize, Vec<f64>)> {
    match (r, angles) {
        (_, Some(list)) if list.is_empty() => Err(invalid("--angles is empty")),
        (Some(r), Some(list)) if list.len() != r => {
            Err(invalid(format!("--r {r} but {} angles given", list.len())))
        }
        (_, Some(list)) => {
            if list.iter().any(|a| !a.is_finite()) {
                return Err(invalid("angles must be finite"));
            }
            Ok((list.len(), list.clone()))
        }
        (Some(0), None) => Err(invalid("r must be at least 1")),
        (Some(r), None) => {
            let mut rng = moment::trial_rng(seed, u64::MAX);
            let angles = moment::separated_angles(r, moment::default_separation(r), &mut rng)
                .map_err(moment_error)?;
            Ok((r, angles))
        }
        (None, None) => Err(invalid("give --r or --angles")),
    }
}

#[derive(Serialize)]
struct MomentResult<'a> {
    construction: &'a str,
    certificate: moment::SupportCertificate,
}

fn cmd_moment(a: &MomentArgs) -> anyhow::Result<CommandOutput> {
    let tol = tolerances(&a.tolerances)?;
    if a.sweep && a.angles.is_none() && a.r.is_none() {
        bail!(invalid("give --r for the sweep"));
    }
    let mut results = Vec::new();
    let mut certs = Vec::new();
    let mut sweeps = Vec::new();
    if !a.sweep || a.angles.is_some() {
        let (r, angles) = resolve_angles(a.r, &a.angles, a.seed)?;
        if a.grid < 64 * r {
            bail!(invalid(format!("--grid must be at least 64r = {}", 64 * r)));
        }
        moment::normalize_angles(&angles, tol.tol_sep).map_err(moment_error)?;
        let product = moment::certify_product(&angles, a.grid, &tol).map_err(moment_error)?;
        let curve = FourierCurve::moment(r);
        let sol = moment::support_from_nullspace(&curve, &angles, &tol).map_err(moment_error)?;
        let null = moment::verify_support(&curve, &angles, &sol.functional, a.grid, &tol)
            .map_err(moment_error)?;
        certs.push(("product", product));
        certs.push(("nullspace", null));
    }
    if a.sweep {
        let r = a.r.or(a.angles.as_ref().map(Vec::len)).unwrap_or(0);
        if r == 0 || a.trials == 0 {
            bail!(invalid("the sweep needs r >= 1 and trials >= 1"));
        }
        if !(a.delta.is_finite() && a.delta >= 0.0) {
            bail!(invalid("--delta must be finite and non-negative"));
        }
        if a.grid < 64 * r {
            bail!(invalid(format!("--grid must be at least 64r = {}", 64 * r)));
        }
        let mut cfg = SweepConfig::new(r, a.trials, a.delta, a.seed);
        cfg.grid_n = a.grid;
        cfg.tolerances = tol;
        if let Some(h) = a.harmonics {
            cfg.harmonics = h.max(r);
        }
        sweeps.push(moment::stability_sweep(&cfg).map_err(moment_error)?);
    }
    let mut passed = true;
    for (construction, certificate) in &certs {
        passed &= certificate.pass;
        results.push(serde_json::to_value(MomentResult {
            construction,
            certificate: certificate.clone(),
        })?);
    }
    let mut findings = Vec::new();
    for s in &sweeps {
        passed &= s.passes == s.config.trials;
        if s.passes < s.config.trials {
            findings.push(Finding::new(
                "sweep-failures",
                format!("r={} delta={}", s.config.r, s.config.delta),
                format!(
                    "{} of {} perturbed curves were not certified",
                    s.config.trials - s.passes,
                    s.config.trials
                ),
            ));
        }
        results.push(serde_json::to_value(s)?);
    }
    let table = render::moment_table(&certs, &sweeps);
    Ok((results, findings, table, passed))
}

fn cmd_rank(a: &RankArgs) -> anyhow::Result<CommandOutput> {
    if !a.moment {
        bail!(invalid("only the moment curve is available; pass --moment"));
    }
    let tol = a.rank_tol.unwrap_or(DEFAULT_RANK_TOLERANCE);
    if !(tol.is_finite() && tol > 0.0) {
        bail!(invalid("--rank-tol must be positive"));
    }
    let rank_error = |e: config_rank::RankError| invalid(e.to_string());
    if let Some(angles) = &a.angles {
        let (r, angles) = resolve_angles(a.r, &Some(angles.clone()), a.seed)?;
        moment::normalize_angles(&angles, Tolerances::default().tol_sep).map_err(moment_error)?;
        let rep = config_rank::tau_rank(
            &config_rank::moment_jet(r, &angles).map_err(rank_error)?,
            1,
            r,
            tol,
        )
        .map_err(rank_error)?;
        let passed = !rep.in_omega;
        let table = render::tau_table(std::slice::from_ref(&rep));
        return Ok((to_values(&[rep])?, Vec::new(), table, passed));
    }
    let r = a.r.ok_or_else(|| invalid("give --r or --angles"))?;
    if r == 0 || a.trials == 0 {
        bail!(invalid("need r >= 1 and trials >= 1"));
    }
    let s = config_rank::genericity_sample(&FourierCurve::moment(r), r, a.trials, a.seed, tol)
        .map_err(rank_error)?;
    let mut findings = Vec::new();
    if !s.omega_hits.is_empty() {
        findings.push(Finding::new(
            "rank-drop",
            format!("r={r}"),
            format!(
                "{} of {} samples fell below rank 2r-1 at relative tolerance {tol:e}; worst condition {:?}",
                s.omega_hits.len(),
                s.trials,
                s.worst_condition
            ),
        ));
    }
    let passed = s.omega_hits.is_empty();
    let table = render::sample_table(&s);
    Ok((to_values(&[s])?, findings, table, passed))
}

fn cmd_lr_config(a: &LrArgs) -> anyhow::Result<CommandOutput> {
    let mut rng = moment::trial_rng(a.seed, 0);
    let rank_error = |e: config_rank::RankError| invalid(e.to_string());
    if a.k < 2 {
        bail!(invalid("k must be at least 2"));
    }
    let config = match (a.s, a.r) {
        (Some(s), None) => {
            if s == 0 || s > 16 {
                bail!(invalid("s must be between 1 and 16"));
            }
            let dirs = config_rank::random_directions((1 << s) - 1, a.k, &mut rng);
            config_rank::build_lr_configuration(a.k, s, a.epsilon, &dirs).map_err(rank_error)?
        }
        (None, Some(r)) => {
            if r == 0 || r > 1 << 16 {
                bail!(invalid("r must be between 1 and 65536"));
            }
            let dirs = config_rank::random_directions(r - r.count_ones() as usize, a.k, &mut rng);
            config_rank::build_composite_configuration(a.k, r, a.epsilon, &dirs)
                .map_err(rank_error)?
        }
        _ => bail!(invalid("give exactly one of --s or --r")),
    };
    let table = render::config_table(&config);
    Ok((to_values(&[config])?, Vec::new(), table, true))
}

/// Parses, runs and writes output; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli).and_then(|outcome| emit(&cli, &outcome).map(|_| outcome.passed)) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) if e.downcast_ref::<InvalidInput>().is_some() => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_CHECK_FAILED
        }
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> anyhow::Result<()> {
    let output = cli.command.output();
    let text = render(output.format, &outcome.document, &outcome.table)?;
    match &output.out {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    if output.format == args::Format::Csv {
        for f in &outcome.document.findings {
            eprintln!("finding [{}] {}: {}", f.kind, f.subject, f.detail);
        }
    }
    Ok(())
}
