use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bloch_envelope::bands::{
    band_structure, check_nonresonance, full_band_index, k_path,
};
use bloch_envelope::study::{
    emit_report, emit_run, format_slope, run_convergence, run_single, StudyConfig, StudySetup,
};
use bloch_envelope::{Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bloch-envelope", version, about = "Bloch-wave envelopes for periodic GP equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Study configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Band structure along a path of symmetry points.
    Bands {
        #[command(flatten)]
        common: Common,
        /// Corner labels, e.g. GXMG.
        #[arg(long)]
        path: Option<String>,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Coefficients of the effective envelope equation.
    Coeffs {
        #[command(flatten)]
        common: Common,
    },
    /// Radial soliton of the envelope equation.
    Soliton {
        #[command(flatten)]
        common: Common,
    },
    /// One GP simulation started from the wavepacket ansatz.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: f64,
        /// Number of slice/snapshot frames.
        #[arg(long, default_value_t = 6)]
        frames: usize,
        #[arg(long)]
        allow_large: bool,
    },
    /// Error convergence study over the configured eps values.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Permit grids above 2^22 points.
        #[arg(long)]
        allow_large: bool,
    },
    /// Nonresonance margin of the carrier.
    Nonres {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_scan: Option<usize>,
    },
}

fn out_dir(common: &Common, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn bands(common: &Common, path: Option<String>, nmax: Option<usize>) -> Result<()> {
    let cfg = StudyConfig::load(&common.config)?;
    let op = cfg.operator()?;
    let labels = path.unwrap_or_else(|| cfg.bands.path.clone());
    let nmax = nmax.unwrap_or(cfg.bands.nmax);
    let (ks, kp) = k_path(&labels, cfg.dim, cfg.bands.per_segment)?;
    let table = band_structure(&op, &ks, nmax)?.with_path(kp);
    let dir = out_dir(common, "out/bands");
    write(&dir, "bands.csv", &table.to_csv())?;
    write(&dir, "bands.svg", &table.to_svg(&format!("Band structure along {labels}")))?;
    Ok(())
}

fn coeffs(common: &Common) -> Result<()> {
    let cfg = StudyConfig::load(&common.config)?;
    let op = cfg.carrier_operator()?;
    let (p, _) = bloch_envelope::effective::effective_params(&op, &cfg.k0, cfg.n0, &cfg.nonlinearity()?)?;
    let mut text = String::new();
    let _ = writeln!(text, "{:<22} {:?}", "k0", p.k0);
    let _ = writeln!(text, "{:<22} {}", "band", p.band);
    let _ = writeln!(text, "{:<22} {:.10}", "omega0", p.omega0);
    let _ = writeln!(text, "{:<22} {:?}", "v_g", p.v_g);
    let _ = writeln!(text, "{:<22} {:?}", "v_g (Hellmann-Feynman)", p.v_g_hellmann_feynman);
    for (i, row) in p.hessian.iter().enumerate() {
        let label = if i == 0 { "hessian" } else { "" };
        let _ = writeln!(text, "{label:<22} {row:?}");
    }
    let _ = writeln!(text, "{:<22} {:.6e}", "isotropy defect", p.isotropy_defect);
    let _ = writeln!(text, "{:<22} {:.10}", "nu", p.nu);
    let _ = writeln!(text, "{:<22} {}", "focusing", p.is_focusing());
    print!("{text}");
    let json = serde_json::to_string_pretty(&p).map_err(|e| Error::Config(e.to_string()))?;
    println!("{json}");
    if let Some(dir) = &common.out {
        write(dir, "coeffs.txt", &text)?;
        write(dir, "coeffs.json", &json)?;
    }
    Ok(())
}

fn soliton(common: &Common) -> Result<()> {
    let cfg = StudyConfig::load(&common.config)?;
    let setup = StudySetup::new(&cfg)?;
    let prof = &setup.profile;
    println!(
        "alpha = {:.10}, nu = {:.10}, R(0) = {:.12}, r_max = {:.4}, bisection steps = {}",
        prof.alpha,
        prof.nu,
        prof.r0,
        prof.r_max(),
        prof.iterations
    );
    let dir = out_dir(common, "out/soliton");
    write(&dir, "profile.csv", &prof.to_csv(4000))?;
    write(&dir, "profile.svg", &prof.to_svg())?;
    Ok(())
}

fn simulate(common: &Common, eps: f64, frames: usize, allow_large: bool) -> Result<()> {
    let cfg = StudyConfig::load(&common.config)?;
    let setup = StudySetup::new(&cfg)?;
    let steps = (cfg.t_end(eps) / cfg.discretization.dt).ceil() as usize;
    let records = steps / cfg.discretization.record_every + 1;
    let slice_every = (records / frames.max(1)).max(1);
    let run = run_single(&cfg, &setup, eps, allow_large, slice_every)?;
    println!(
        "eps = {eps}: {} points, {:.1} s, max error {}",
        run.grid_points,
        run.wall_seconds,
        run.max_error().map_or("n/a".into(), |e| format!("{e:.4e}"))
    );
    let dir = out_dir(common, &format!("out/simulate_eps_{eps}"));
    for path in emit_run(&run, &dir)? {
        println!("wrote {}", path.display());
    }
    match run.failure {
        Some(f) => Err(Error::Stiffness(f)),
        None => Ok(()),
    }
}

fn converge(common: &Common, allow_large: bool) -> Result<()> {
    let cfg = StudyConfig::load(&common.config)?;
    let report = run_convergence(&cfg, allow_large)?;
    for (eps, err) in report.eps_list.iter().zip(&report.max_error) {
        println!("eps = {eps:<6} max error = {}", err.map_or("failed".into(), |e| format!("{e:.6e}")));
    }
    let dir = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    for path in emit_report(&report, &dir)? {
        println!("wrote {}", path.display());
    }
    match report.fit {
        Some(fit) => {
            println!("{} (log-space rms residual {:.3e})", format_slope(fit.slope), fit.residual);
            if report.max_error.iter().any(Option::is_none) {
                return Err(Error::Stiffness("some eps runs failed".into()));
            }
            Ok(())
        }
        None => Err(Error::Stiffness("too few successful runs to fit a slope".into())),
    }
}

fn nonres(common: &Common, n_scan: Option<usize>) -> Result<()> {
    let cfg = StudyConfig::load(&common.config)?;
    let full = cfg.operator()?;
    let n0 = if cfg.sector.is_some() {
        full_band_index(&cfg.carrier_operator()?, &full, &cfg.k0, cfg.n0)?
    } else {
        cfg.n0
    };
    let rep = check_nonresonance(&full, &cfg.k0, n0, n_scan.unwrap_or(cfg.nonres.n_scan))?;
    let text = format!(
        "omega0 = {:.10}\nmargin = {:.6e}\nclosest (n, j) = ({}, {})\ntail bound = {:.6e}\ntail guaranteed = {}\n",
        rep.omega0, rep.margin, rep.argmin.0, rep.argmin.1, rep.tail_bound, rep.tail_guaranteed
    );
    print!("{text}");
    if let Some(dir) = &common.out {
        write(dir, "nonres.txt", &text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bands { common, path, nmax } => bands(common, path.clone(), *nmax),
        Command::Coeffs { common } => coeffs(common),
        Command::Soliton { common } => soliton(common),
        Command::Simulate { common, eps, frames, allow_large } => simulate(common, *eps, *frames, *allow_large),
        Command::Converge { common, allow_large } => converge(common, *allow_large),
        Command::Nonres { common, n_scan } => nonres(common, *n_scan),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
