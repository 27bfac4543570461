use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rtp_core::attack::mu_ceo;
use rtp_core::controller::PriceBounds;
use rtp_core::models::{fit_linear_supply, LinearSupply};
use rtp_core::sim::{convergence_probability, ProbeLaw, ProbeSettings};
use rtp_core::stability::{
    boundary_curve, delay_ros_limit, eta_bar_at, jury, roots_in_unit_circle, scaling_ros_limit,
    AttackFamily, CharPoly, JuryVerdict, ETA_TOLERANCE, LIMIT_PROBE_H,
};
use rtp_lab::config::ScenarioFile;
use rtp_lab::io::{self, LimitRow};
use rtp_lab::report::evaluate;
use rtp_lab::sweep::{run_sweep, write_sweep, Axis};
use rtp_lab::{presets, LabError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "rtp-lab",
    version,
    about = "Real-time pricing loops under price-signal attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for output files (tables go to stdout without it).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sweep worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Check the config only (simulate, sweep) or cross-check results
    /// against an independent method (ros, ros-limit, jury).
    #[arg(long, global = true)]
    validate: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario; writes trace.csv, metrics.csv and summary.txt.
    Simulate {
        scenario: Option<PathBuf>,
        #[arg(long, conflicts_with = "scenario")]
        preset: Option<String>,
    },
    /// Run a scenario over a parameter grid; writes sweep.csv.
    Sweep {
        scenario: Option<PathBuf>,
        #[arg(long, conflicts_with = "scenario")]
        preset: Option<String>,
        /// A named grid (base scenario plus axes).
        #[arg(long, conflicts_with_all = ["scenario", "preset"])]
        grid: Option<String>,
        /// `key=v1,v2`, `key=a..b` or `key=start:step:end`; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// Stability boundary η̄(h) for one attack family; writes boundary.csv.
    Ros {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = -0.8, allow_hyphen_values = true)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01)]
        h_min: f64,
        #[arg(long, default_value_t = 100.0)]
        h_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        /// Evenly spaced h instead of log-spaced.
        #[arg(long)]
        linear: bool,
    },
    /// Large-h gain limits over lists of ρ and τ (or γ); writes limits.csv.
    RosLimit {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, value_delimiter = ',', required = true)]
        rho: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        tau: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = -0.8, allow_hyphen_values = true)]
        epsilon: f64,
    },
    /// Jury test on comma-separated descending coefficients.
    Jury {
        #[arg(allow_hyphen_values = true)]
        coefficients: String,
    },
    /// Least-squares linear supply from `price,supply` rows.
    FitSupply {
        csv: PathBuf,
        /// `houses=N share=S population=P`
        #[arg(long, num_args = 3)]
        scale: Vec<String>,
    },
    /// Convergence probability over (ε, λ*); writes map.csv.
    StabilityMap {
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        #[arg(long, default_value_t = 152.0)]
        p: f64,
        #[arg(long, default_value_t = 4503.0)]
        q: f64,
        #[arg(long, value_enum, default_value_t = Law::Direct)]
        law: Law,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        #[arg(long, default_value_t = -0.95, allow_hyphen_values = true)]
        eps_min: f64,
        #[arg(long, default_value_t = -0.05, allow_hyphen_values = true)]
        eps_max: f64,
        #[arg(long, default_value_t = 19)]
        eps_points: usize,
        /// Clearing-price grid.
        #[arg(long, default_value_t = 1.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 200.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 40)]
        lambda_points: usize,
        /// Price bounds; initial prices are spread evenly between them.
        #[arg(long, default_value_t = 1.0)]
        price_min: f64,
        #[arg(long, default_value_t = 200.0)]
        price_max: f64,
        #[arg(long, default_value_t = 100)]
        initial_prices: usize,
        #[arg(long, default_value_t = 1000)]
        max_periods: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Scaling,
    Delay,
    ScaledDelay,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Law {
    Direct,
    Stabilizing,
}

fn domain(e: rtp_core::Error) -> LabError {
    LabError::Config(e.to_string())
}

fn load_scenario(
    path: Option<&Path>,
    preset: Option<&str>,
) -> Result<(ScenarioFile, PathBuf, String)> {
    match (path, preset) {
        (Some(p), None) => {
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            let name = p
                .file_stem()
                .map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
            Ok((ScenarioFile::load(p)?, base, name))
        }
        (None, Some(name)) => {
            let s = presets::scenario(name).ok_or_else(|| {
                LabError::Config(format!(
                    "unknown preset `{name}`; known: {}",
                    presets::NAMES.join(", ")
                ))
            })?;
            Ok((s, PathBuf::from("."), name.to_string()))
        }
        _ => Err(LabError::Config("give a scenario file or --preset".into())),
    }
}

/// Emits a CSV either into `out/name` or to stdout via a temporary file.
fn emit(out: Option<&Path>, name: &str, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
            let path = dir.join(name);
            write(&path)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            let tmp = std::env::temp_dir().join(format!("rtp-lab-{}-{name}", std::process::id()));
            write(&tmp)?;
            let text = std::fs::read_to_string(&tmp).map_err(|e| LabError::io(&tmp, e))?;
            let _ = std::fs::remove_file(&tmp);
            print!("{text}");
            Ok(())
        }
    }
}

fn family_of(
    family: Family,
    rho: f64,
    tau: Option<usize>,
    gamma: Option<f64>,
    epsilon: f64,
) -> Result<AttackFamily> {
    let need_tau = || tau.ok_or_else(|| LabError::Config("this family needs --tau".into()));
    let gamma_mu = || -> Result<f64> {
        let g = gamma.ok_or_else(|| LabError::Config("this family needs --gamma".into()))?;
        Ok(g * mu_ceo(g, epsilon).map_err(domain)?)
    };
    Ok(match family {
        Family::Scaling => AttackFamily::Scaling {
            rho,
            gamma_mu: gamma_mu()?,
        },
        Family::Delay => AttackFamily::Delay {
            rho,
            tau: need_tau()?,
        },
        Family::ScaledDelay => AttackFamily::ScaledDelay {
            rho,
            tau: need_tau()?,
            gamma_mu: gamma_mu()?,
        },
    })
}

fn simulate(cli: &Cli, path: Option<&Path>, preset: Option<&str>) -> Result<()> {
    let (mut file, base, name) = load_scenario(path, preset)?;
    if let Some(seed) = cli.seed {
        file.simulation.seed = seed;
    }
    let scn = file.build(&base)?;
    if cli.validate {
        println!("{name}: ok ({} periods)", scn.sim.horizon);
        return Ok(());
    }
    let (trace, report) = evaluate(&scn)?;
    let dir = cli
        .out
        .clone()
        .or(scn.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| LabError::io(&dir, e))?;
    io::write_trace(&dir.join("trace.csv"), &trace)?;
    io::write_metrics(&dir.join("metrics.csv"), &report.days)?;
    let mut summary = format!("scenario: {name}\nunits: {}\n", scn.units.label());
    if let Some((lo, hi)) = scn.baseline_per_house {
        summary += &format!("baseline_per_house: {lo} to {hi} {}\n", scn.units.label());
    }
    summary += &report.summary(scn.units);
    io::write_text(&dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn sweep(
    cli: &Cli,
    path: Option<&Path>,
    preset: Option<&str>,
    grid: Option<&str>,
    params: &[String],
) -> Result<()> {
    let (mut file, base, mut axes) = match grid {
        Some(g) => {
            let sp = presets::sweep(g).ok_or_else(|| {
                LabError::Config(format!(
                    "unknown grid `{g}`; known: {}",
                    presets::SWEEP_NAMES.join(", ")
                ))
            })?;
            let (file, base, _) = load_scenario(None, Some(sp.base))?;
            (file, base, sp.axes)
        }
        None => {
            let (file, base, _) = load_scenario(path, preset)?;
            (file, base, Vec::new())
        }
    };
    for p in params {
        axes.push(Axis::parse(p)?);
    }
    if let Some(seed) = cli.seed {
        file.simulation.seed = seed;
    }
    rtp_lab::sweep::grid(&axes)?;
    if cli.validate {
        let cells = rtp_lab::sweep::grid(&axes)?;
        for values in &cells {
            let mut s = file.clone();
            for (a, v) in axes.iter().zip(values) {
                s = s.with_value(&a.key, v.clone())?;
            }
            s.build(&base)?;
        }
        println!("{} cells: ok", cells.len());
        return Ok(());
    }
    let cells = run_sweep(&file, &base, &axes, cli.workers)?;
    let failed = cells.iter().filter(|c| c.result.is_err()).count();
    emit(cli.out.as_deref(), "sweep.csv", |p| {
        write_sweep(p, &axes, &cells)
    })?;
    if failed > 0 {
        eprintln!(
            "{failed} of {} cells failed; see the error column",
            cells.len()
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn ros(
    cli: &Cli,
    family: Family,
    rho: f64,
    tau: Option<usize>,
    gamma: Option<f64>,
    epsilon: f64,
    h_min: f64,
    h_max: f64,
    points: usize,
    linear: bool,
) -> Result<()> {
    let fam = family_of(family, rho, tau, gamma, epsilon)?;
    if !(h_min > 0.0 && h_max > h_min && points >= 2) {
        return Err(LabError::Config(
            "need 0 < h-min < h-max and at least 2 points".into(),
        ));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            if linear {
                h_min + t * (h_max - h_min)
            } else {
                h_min * (h_max / h_min).powf(t)
            }
        })
        .collect();
    let boundary = boundary_curve(&fam, &grid, ETA_TOLERANCE).map_err(domain)?;
    emit(cli.out.as_deref(), "boundary.csv", |p| {
        io::write_boundary(p, &boundary)
    })?;
    if !boundary.non_increasing {
        eprintln!("note: the boundary increases somewhere on this grid");
    }
    if cli.validate {
        // Just inside and just outside each reported value, by polynomial roots.
        let step = 1e-4;
        let mut bad = 0;
        for s in &boundary.samples {
            let v = s.eta_bar;
            if !s.single_crossing {
                continue;
            }
            if v > step {
                let r = roots_in_unit_circle(&fam.char_poly(s.h, v - step)?)?;
                bad += usize::from(!r.inside);
            }
            if v < 1.0 - step {
                let r = roots_in_unit_circle(&fam.char_poly(s.h, v + step)?)?;
                bad += usize::from(r.inside);
            }
        }
        if bad > 0 {
            return Err(LabError::Model(rtp_core::Error::Unsupported(format!(
                "{bad} boundary samples disagree with the root oracle"
            ))));
        }
        eprintln!(
            "validated {} samples against polynomial roots",
            boundary.samples.len()
        );
    }
    Ok(())
}

fn ros_limit(
    cli: &Cli,
    family: Family,
    rhos: &[f64],
    taus: &[usize],
    gammas: &[f64],
    epsilon: f64,
) -> Result<()> {
    let mut rows = Vec::new();
    let mut families = Vec::new();
    match family {
        Family::Delay => {
            if taus.is_empty() || !gammas.is_empty() {
                return Err(LabError::Config(
                    "delay limits take --tau (and no --gamma)".into(),
                ));
            }
            for &rho in rhos {
                for &tau in taus {
                    rows.push(LimitRow {
                        rho,
                        tau_or_gamma: tau as f64,
                        eta_limit: delay_ros_limit(rho, tau).map_err(domain)?,
                    });
                    families.push(AttackFamily::Delay { rho, tau });
                }
            }
        }
        Family::Scaling => {
            if gammas.is_empty() || !taus.is_empty() {
                return Err(LabError::Config(
                    "scaling limits take --gamma (and no --tau)".into(),
                ));
            }
            for &rho in rhos {
                for &gamma in gammas {
                    let gamma_mu = gamma * mu_ceo(gamma, epsilon).map_err(domain)?;
                    rows.push(LimitRow {
                        rho,
                        tau_or_gamma: gamma,
                        eta_limit: scaling_ros_limit(rho, gamma_mu).map_err(domain)?,
                    });
                    families.push(AttackFamily::Scaling { rho, gamma_mu });
                }
            }
        }
        Family::ScaledDelay => {
            return Err(LabError::Config(
                "no closed-form limit for scaled-delay; use `ros` at large h".into(),
            ))
        }
    }
    emit(cli.out.as_deref(), "limits.csv", |p| {
        io::write_limits(p, &rows)
    })?;
    if cli.validate {
        let mut worst: f64 = 0.0;
        for (row, fam) in rows.iter().zip(&families) {
            let far = eta_bar_at(fam, LIMIT_PROBE_H, 1e-7)
                .map_err(domain)?
                .value()
                .min(1.0);
            let gap = (far - row.eta_limit).abs();
            worst = worst.max(gap);
            eprintln!(
                "rho {} {} {}: limit {} vs Jury at h=1e10 {} (gap {gap:.2e})",
                row.rho,
                if matches!(family, Family::Delay) {
                    "tau"
                } else {
                    "gamma"
                },
                row.tau_or_gamma,
                row.eta_limit,
                far
            );
        }
        if worst > 1e-4 {
            return Err(LabError::Model(rtp_core::Error::Unsupported(format!(
                "limit and large-h Jury boundary differ by {worst}"
            ))));
        }
    }
    Ok(())
}

fn jury_cmd(cli: &Cli, coefficients: &str) -> Result<()> {
    let coeffs: Vec<f64> = coefficients
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| LabError::Config(format!("bad coefficient {t:?}")))
        })
        .collect::<Result<_>>()?;
    let poly = CharPoly::new(coeffs).map_err(domain)?;
    let verdict = jury(&poly);
    let report = roots_in_unit_circle(&poly)?;
    println!(
        "{}",
        match verdict {
            JuryVerdict::Stable => "stable",
            JuryVerdict::Unstable => "unstable",
            JuryVerdict::Marginal => "marginal",
        }
    );
    println!("max_root_modulus: {}", report.max_modulus);
    if cli.validate {
        let agree = match verdict {
            JuryVerdict::Stable => report.max_modulus < 1.0,
            JuryVerdict::Unstable => report.max_modulus >= 1.0,
            JuryVerdict::Marginal => (report.max_modulus - 1.0).abs() < 1e-6,
        };
        println!("root_oracle_agrees: {agree}");
        if !agree {
            return Err(LabError::Model(rtp_core::Error::Unsupported(
                "Jury verdict and root magnitudes disagree".into(),
            )));
        }
    }
    Ok(())
}

fn fit_supply(csv: &Path, scale: &[String]) -> Result<()> {
    let points = io::read_supply_points(csv)?;
    let fit = fit_linear_supply(&points)?;
    println!("p: {}", fit.supply.p());
    println!("q: {}", fit.supply.q());
    println!("r_squared: {}", fit.r_squared);
    println!("residual_rms: {}", fit.residual_rms);
    println!("points: {}", fit.points);
    if !scale.is_empty() {
        let (houses, share, population) = parse_scale(scale)?;
        let scaled = fit
            .supply
            .scaled_to(houses, share, population)
            .map_err(domain)?;
        println!("scaled_p: {}", scaled.p());
        println!("scaled_q: {}", scaled.q());
    }
    Ok(())
}

fn parse_scale(items: &[String]) -> Result<(f64, f64, f64)> {
    let (mut houses, mut share, mut population) = (None, None, None);
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| LabError::Config(format!("--scale item `{item}` needs key=value")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| LabError::Config(format!("--scale value `{v}` is not a number")))?;
        match k {
            "houses" => houses = Some(v),
            "share" => share = Some(v),
            "population" => population = Some(v),
            _ => return Err(LabError::Config(format!("unknown --scale key `{k}`"))),
        }
    }
    match (houses, share, population) {
        (Some(h), Some(s), Some(p)) => Ok((h, s, p)),
        _ => Err(LabError::Config(
            "--scale needs houses=, share= and population=".into(),
        )),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { scenario, preset } => {
            simulate(&cli, scenario.as_deref(), preset.as_deref())
        }
        Command::Sweep {
            scenario,
            preset,
            grid,
            params,
        } => sweep(
            &cli,
            scenario.as_deref(),
            preset.as_deref(),
            grid.as_deref(),
            params,
        ),
        Command::Ros {
            family,
            rho,
            tau,
            gamma,
            epsilon,
            h_min,
            h_max,
            points,
            linear,
        } => ros(
            &cli, *family, *rho, *tau, *gamma, *epsilon, *h_min, *h_max, *points, *linear,
        ),
        Command::RosLimit {
            family,
            rho,
            tau,
            gamma,
            epsilon,
        } => ros_limit(&cli, *family, rho, tau, gamma, *epsilon),
        Command::Jury { coefficients } => jury_cmd(&cli, coefficients),
        Command::FitSupply { csv, scale } => fit_supply(csv, scale),
        Command::StabilityMap {
            b,
            p,
            q,
            law,
            eta,
            eps_min,
            eps_max,
            eps_points,
            lambda_min,
            lambda_max,
            lambda_points,
            price_min,
            price_max,
            initial_prices,
            max_periods,
        } => (|| {
            let supply = LinearSupply::new(*p, *q).map_err(domain)?;
            let settings = ProbeSettings {
                bounds: PriceBounds::new(*price_min, *price_max).map_err(domain)?,
                initial_prices: *initial_prices,
                max_periods: *max_periods,
            };
            let law = match law {
                Law::Direct => ProbeLaw::DirectFeedback,
                Law::Stabilizing => ProbeLaw::Stabilizing { eta: *eta },
            };
            if *eps_points == 0 || *lambda_points == 0 {
                return Err(LabError::Config("map grid is empty".into()));
            }
            let mut rows = Vec::new();
            for eps in linspace(*eps_min, *eps_max, *eps_points) {
                for ls in linspace(*lambda_min, *lambda_max, *lambda_points) {
                    let pr = convergence_probability(&supply, *b, eps, ls, law, &settings)
                        .map_err(domain)?;
                    rows.push([eps, ls, pr]);
                }
            }
            emit(cli.out.as_deref(), "map.csv", |path| {
                let mut w = csv::Writer::from_path(path).map_err(|e| LabError::Parse {
                    path: path.to_path_buf(),
                    message: e.to_string(),
                })?;
                let mut put = |rec: [String; 3]| {
                    w.write_record(rec).map_err(|e| LabError::Parse {
                        path: path.to_path_buf(),
                        message: e.to_string(),
                    })
                };
                put(["epsilon".into(), "lambda_star".into(), "probability".into()])?;
                for r in &rows {
                    put(r.map(|x| x.to_string()))?;
                }
                w.flush().map_err(|e| LabError::io(path, e))
            })
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
