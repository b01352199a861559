use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use solwave_core::melnikov::{find_c_star, melnikov, melnikov_dc, zero_existence_on, SpeedBranch, ZeroExistence};
use solwave_core::odeint::{homoclinic_return_metric_with, ReturnConfig, Trajectory};
use solwave_core::rlw::{discriminant, HomoclinicOrbit, ModelParams};
use solwave_core::slowfast::PerturbationKind;
use solwave_core::SolwaveError;

use crate::error::{CliError, CliResult};
use crate::output::{csv_table, write_file, Format, Plot, Series};

pub const MAX_TAU: f64 = 0.1;
const THREADS_VAR: &str = "SOLWAVE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Ks,
    Me,
}

impl From<KindArg> for PerturbationKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Ks => PerturbationKind::Ks,
            KindArg::Me => PerturbationKind::Me,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Lower,
    Upper,
}

impl From<BranchArg> for SpeedBranch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Lower => SpeedBranch::Lower,
            BranchArg::Upper => SpeedBranch::Upper,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory
    #[arg(long, default_value = "solwave-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct WaveArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub g: f64,
    /// Total width of the sampled window, centred on the peak (default 40 / kappa)
    #[arg(long)]
    pub span: Option<f64>,
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, allow_hyphen_values = true)]
    pub g: f64,
    #[arg(long, default_value_t = 0.01)]
    pub c_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub c_max: f64,
    /// Number of grid points
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RootArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, allow_hyphen_values = true)]
    pub g: f64,
    #[arg(long, value_enum, default_value_t = BranchArg::Lower)]
    pub branch: BranchArg,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, allow_hyphen_values = true)]
    pub g: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,
    /// Speed above the Melnikov root
    #[arg(long, default_value_t = 1e-4, allow_hyphen_values = true)]
    pub offset: f64,
    /// Use this speed instead of root + offset
    #[arg(long)]
    pub c: Option<f64>,
    /// Start at (phi_r - eps0, 0)
    #[arg(long, default_value_t = 1e-4)]
    pub eps0: f64,
    /// Length of each branch (default 4 / kappa)
    #[arg(long)]
    pub span: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn check_tau(tau: f64) -> CliResult<()> {
    if (0.0..=MAX_TAU).contains(&tau) {
        Ok(())
    } else {
        Err(CliError::InvalidArgs(format!(
            "tau must lie in [0, {MAX_TAU}], got {tau}"
        )))
    }
}

fn check_count(name: &str, n: usize) -> CliResult<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(CliError::InvalidArgs(format!("{name} must be at least 2, got {n}")))
    }
}

fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::InvalidArgs(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn report_files(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

pub fn wave(args: &WaveArgs) -> CliResult<()> {
    check_count("samples", args.samples)?;
    let params = ModelParams::unperturbed(args.c, args.g)?;
    let orbit = HomoclinicOrbit::new(params)?;
    let span = args.span.unwrap_or(40.0 / orbit.width);
    check_positive("span", span)?;
    let rows: Vec<Vec<Option<f64>>> = (0..args.samples)
        .map(|i| {
            let xi = -0.5 * span + span * i as f64 / (args.samples - 1) as f64;
            vec![Some(xi), Some(orbit.phi(xi)), Some(orbit.y(xi))]
        })
        .collect();
    let mut written = Vec::new();
    let out = &args.output;
    if out.format.csv() {
        written.push(write_file(
            &out.out,
            "wave.csv",
            &csv_table(&["xi", "phi", "y"], &rows),
        )?);
    }
    if out.format.svg() {
        let title = format!("solitary wave, c = {}, g = {}", args.c, args.g);
        let profile = Plot {
            title: &title,
            x_label: "xi",
            y_label: "phi",
            series: vec![Series {
                label: "phi",
                color: "#1f4e9c",
                points: rows.iter().map(|r| Some((r[0]?, r[1]?))).collect(),
            }],
            markers: vec![],
            zero_line: true,
        };
        let phase = Plot {
            title: &title,
            x_label: "phi",
            y_label: "y",
            series: vec![Series {
                label: "homoclinic loop",
                color: "#1f4e9c",
                points: rows.iter().map(|r| Some((r[1]?, r[2]?))).collect(),
            }],
            markers: vec![],
            zero_line: true,
        };
        written.push(write_file(&out.out, "wave_profile.svg", &profile.to_svg())?);
        written.push(write_file(&out.out, "wave_phase.svg", &phase.to_svg())?);
    }
    println!(
        "c = {}  g = {}  phi1 = {:.10}  phi_r = {:.10}  kappa = {:.10}",
        args.c, args.g, orbit.eq.phi1, orbit.eq.phi_r, orbit.width
    );
    report_files(&written);
    Ok(())
}

/// Grid value of `(M*, M, dM*/dc)`, or `None` where the loop does not exist.
fn scan_point(kind: PerturbationKind, c: f64, g: f64) -> Option<(f64, f64, f64)> {
    if !(discriminant(c, g) > 0.0) {
        return None;
    }
    let p = ModelParams::unperturbed(c, g).ok()?;
    let m = melnikov(kind, &p).ok()?;
    let dc = melnikov_dc(kind, &p).ok()?;
    Some((m.m_star, m.m, dc))
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_VAR) {
        let n: usize = raw
            .parse()
            .map_err(|_| CliError::InvalidArgs(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
        if n == 0 {
            return Err(CliError::InvalidArgs(format!("{THREADS_VAR} must be at least 1")));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::InvalidArgs(format!("cannot start thread pool: {e}")))
}

/// Linear interpolation of the sign changes of `M*` between valid neighbours.
fn sign_changes(cs: &[f64], values: &[Option<(f64, f64, f64)>]) -> Vec<f64> {
    let mut roots = Vec::new();
    for i in 0..cs.len() - 1 {
        if let (Some((a, ..)), Some((b, ..))) = (values[i], values[i + 1]) {
            if a == 0.0 {
                roots.push(cs[i]);
            } else if a * b < 0.0 {
                roots.push(cs[i] + (cs[i + 1] - cs[i]) * a / (a - b));
            }
        }
    }
    if let Some(Some((v, ..))) = values.last() {
        if *v == 0.0 {
            roots.push(*cs.last().expect("grid is nonempty"));
        }
    }
    roots
}

pub fn melnikov_scan(args: &ScanArgs) -> CliResult<()> {
    check_count("n", args.n)?;
    check_positive("c-min", args.c_min)?;
    if !(args.c_max > args.c_min && args.c_max.is_finite()) {
        return Err(CliError::InvalidArgs(format!(
            "need c-min < c-max, got {} and {}",
            args.c_min, args.c_max
        )));
    }
    if !args.g.is_finite() {
        return Err(CliError::InvalidArgs("g must be finite".into()));
    }
    let kind = PerturbationKind::from(args.kind);
    let cs: Vec<f64> = (0..args.n)
        .map(|i| args.c_min + (args.c_max - args.c_min) * i as f64 / (args.n - 1) as f64)
        .collect();
    let values: Vec<Option<(f64, f64, f64)>> =
        thread_pool()?.install(|| cs.par_iter().map(|&c| scan_point(kind, c, args.g)).collect());
    let rows: Vec<Vec<Option<f64>>> = cs
        .iter()
        .zip(&values)
        .map(|(&c, v)| vec![Some(c), v.map(|t| t.0), v.map(|t| t.1), v.map(|t| t.2)])
        .collect();
    let roots = sign_changes(&cs, &values);

    let mut written = Vec::new();
    let out = &args.output;
    let stem = format!("melnikov_scan_{}", kind.label());
    if out.format.csv() {
        let table = csv_table(&["c", "M_star", "M", "dM_star_dc"], &rows);
        written.push(write_file(&out.out, &format!("{stem}.csv"), &table)?);
    }
    if out.format.svg() {
        let title = format!("M* for {kind}, g = {}", args.g);
        let plot = Plot {
            title: &title,
            x_label: "c",
            y_label: "M*",
            series: vec![Series {
                label: "M*",
                color: "#1f4e9c",
                points: cs.iter().zip(&values).map(|(&c, v)| v.map(|t| (c, t.0))).collect(),
            }],
            markers: roots.clone(),
            zero_line: true,
        };
        written.push(write_file(&out.out, &format!("{stem}.svg"), &plot.to_svg())?);
    }
    let valid = values.iter().filter(|v| v.is_some()).count();
    println!("{kind} g = {}: {valid} of {} grid points valid", args.g, args.n);
    for r in &roots {
        println!("sign change of M* near c = {r:.10}");
    }
    report_files(&written);
    Ok(())
}

pub fn melnikov_root(args: &RootArgs) -> CliResult<()> {
    let kind = PerturbationKind::from(args.kind);
    if !args.g.is_finite() {
        return Err(CliError::InvalidArgs("g must be finite".into()));
    }
    let branch = SpeedBranch::from(args.branch);
    if zero_existence_on(kind, args.g, branch) == ZeroExistence::NoZero {
        return Err(SolwaveError::NoRoot { g: args.g }.into());
    }
    let root = find_c_star(kind, args.g)?;
    println!("kind        {kind}");
    println!("g           {}", args.g);
    println!("c_star      {:.16e}", root.c_star);
    println!("bracket     [{:.16e}, {:.16e}]", root.bracket.0, root.bracket.1);
    println!("residual    {:.3e}", root.residual);
    println!("dM*/dc      {:.16e}", root.derivative);
    println!("iterations  {}", root.iterations);
    Ok(())
}

/// Backward branch reversed, then the forward branch without its duplicated start.
fn joined(backward: &Trajectory, forward: &Trajectory) -> Vec<(f64, f64, f64)> {
    let back = backward.xi.iter().zip(&backward.states).rev();
    let fwd = forward.xi.iter().zip(&forward.states).skip(1);
    back.chain(fwd).map(|(&xi, s)| (xi, s[0], s[1])).collect()
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    check_tau(args.tau)?;
    let kind = PerturbationKind::from(args.kind);
    let c = match args.c {
        Some(c) => c,
        None => find_c_star(kind, args.g)?.c_star + args.offset,
    };
    let params = ModelParams::new(c, args.g, args.tau)?;
    let reference = HomoclinicOrbit::new(ModelParams::unperturbed(c, args.g)?)?;
    if let Some(span) = args.span {
        check_positive("span", span)?;
    }
    let cfg = ReturnConfig {
        span: args.span,
        ..ReturnConfig::with_eps0(args.eps0)
    };
    let metric = homoclinic_return_metric_with(kind, &params, &reference, &cfg)?;
    let path = joined(&metric.backward, &metric.forward);

    let mut written = Vec::new();
    let out = &args.output;
    let stem = format!("simulate_{}", kind.label());
    if out.format.csv() {
        let phase: Vec<Vec<Option<f64>>> = path.iter().map(|&(_, p, y)| vec![Some(p), Some(y)]).collect();
        let history: Vec<Vec<Option<f64>>> = path.iter().map(|&(xi, p, _)| vec![Some(xi), Some(p)]).collect();
        written.push(write_file(
            &out.out,
            &format!("{stem}_phase.csv"),
            &csv_table(&["phi", "y"], &phase),
        )?);
        written.push(write_file(
            &out.out,
            &format!("{stem}_history.csv"),
            &csv_table(&["xi", "phi"], &history),
        )?);
    }
    if out.format.svg() {
        let title = format!("{kind}, g = {}, tau = {}, c = {c:.10}", args.g, args.tau);
        let phase = Plot {
            title: &title,
            x_label: "phi",
            y_label: "y",
            series: vec![Series {
                label: "reduced flow",
                color: "#1f4e9c",
                points: path.iter().map(|&(_, p, y)| Some((p, y))).collect(),
            }],
            markers: vec![metric.saddle.0],
            zero_line: true,
        };
        let history = Plot {
            title: &title,
            x_label: "xi",
            y_label: "phi",
            series: vec![Series {
                label: "phi",
                color: "#1f4e9c",
                points: path.iter().map(|&(xi, p, _)| Some((xi, p))).collect(),
            }],
            markers: vec![],
            zero_line: false,
        };
        written.push(write_file(&out.out, &format!("{stem}_phase.svg"), &phase.to_svg())?);
        written.push(write_file(&out.out, &format!("{stem}_history.svg"), &history.to_svg())?);
    }
    println!("kind                 {kind}");
    println!("g                    {}", args.g);
    println!("tau                  {}", args.tau);
    println!("c                    {c:.16e}");
    println!("start                ({:.16e}, 0)", metric.start.0);
    println!("min_saddle_distance  {:.6e}", metric.min_saddle_distance);
    println!("threshold            {:.6e}", metric.threshold());
    println!("loop_closure_gap     {:.6e}", metric.loop_closure_gap);
    println!(
        "near_closed          {}",
        if metric.is_near_closed() { "yes" } else { "no" }
    );
    report_files(&written);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_range() {
        assert!(check_tau(0.0).is_ok());
        assert!(check_tau(0.1).is_ok());
        assert!(matches!(check_tau(0.2), Err(CliError::InvalidArgs(_))));
        assert!(check_tau(-1e-3).is_err());
    }

    #[test]
    fn scan_marks_invalid_points() {
        assert!(scan_point(PerturbationKind::Ks, 0.9, -0.2).is_none());
        let (m_star, m, _) = scan_point(PerturbationKind::Ks, 0.3, 0.0).unwrap();
        assert!(m_star.signum() == m.signum());
    }

    #[test]
    fn sign_change_location() {
        let cs: Vec<f64> = (0..101).map(|i| 0.01 * i as f64 + 0.01).collect();
        let values: Vec<_> = cs.iter().map(|&c| scan_point(PerturbationKind::Ks, c, 0.0)).collect();
        let roots = sign_changes(&cs, &values);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 5.0 / 12.0).abs() < 1e-3);
    }

    #[test]
    fn joined_path_is_monotone() {
        let params = ModelParams::new(0.5, 0.0, 0.01).unwrap();
        let reference = HomoclinicOrbit::new(ModelParams::unperturbed(0.5, 0.0).unwrap()).unwrap();
        let m =
            homoclinic_return_metric_with(PerturbationKind::Ks, &params, &reference, &ReturnConfig::default()).unwrap();
        let path = joined(&m.backward, &m.forward);
        assert_eq!(path.len(), m.backward.len() + m.forward.len() - 1);
        assert!(path.windows(2).all(|w| w[1].0 > w[0].0));
    }
}
