//! Command-line front end of `nls-star`.
//!
//! Every subcommand reads its parameters from flags and, optionally, from a
//! TOML file given with `--config`; flags win over the file. Results go to
//! `--out` or to stdout, diagnostics to stderr. Exit codes: 0 success,
//! 1 validation or I/O error, 2 numerical error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use nls_star::acceptance;
use nls_star::dynamics::{evolve, perturbed_profile, Perturbation};
use nls_star::profiles::{build_profile, existence_threshold, functionals, stationary_residual};
use nls_star::report::{
    render_report, write_profile_csv, write_stability_csv, Format, Origin, Payload, Provenance, Report,
};
use nls_star::slope::{kirchhoff_slope, slope_j};
use nls_star::spectral::{assemble, spectrum};
use nls_star::sweep::{acceptance_grid, point_spec, run_sweep, summarize, FamilyName, SweepRow};
use nls_star::verdict::{cross_check, theorem_sector};
use nls_star::{
    Error, EvolutionConfigF64, GridSpecF64, Nonlinearity, OperatorKind, PerturbationMode, ProfileSpecF64, Sector,
    SweepSpecF64,
};

type Result<T> = std::result::Result<T, Error>;

#[derive(Parser, Debug)]
#[command(name = "nls-star", version, about = "Standing waves of NLS on a star graph with a delta vertex")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a stationary profile on the grid (CSV: edge, x, value, imag).
    Profile {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Slope J = dM/domega and p(omega) at one or more frequencies.
    Slope {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Negative and zero eigenvalue counts of L1 and L2.
    Spectrum {
        #[command(flatten)]
        point: PointArgs,
        /// L1, L2, H or all.
        #[arg(long)]
        operator: Option<String>,
        /// full, equal or the split index k.
        #[arg(long)]
        sector: Option<String>,
        /// Number of lowest eigenvalues reported.
        #[arg(long)]
        lowest: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Numerical and analytic stability verdicts of one standing wave.
    Verdict {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Evolve a perturbed standing wave and trace mass, energy and distance.
    Evolve {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        evo: EvolveArgs,
        /// Write the final state as profile CSV.
        #[arg(long = "final")]
        final_state: Option<PathBuf>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Cross-check verdicts over a parameter grid (CSV, one row per point).
    Sweep {
        #[arg(long = "L")]
        length: Option<f64>,
        #[arg(long = "M")]
        intervals: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Run a single criterion.
        #[arg(long)]
        only: Option<u8>,
    },
}

#[derive(Args, Debug, Default)]
struct IoArgs {
    /// TOML file with default values for the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug, Default)]
struct PointArgs {
    /// attractive, kirchhoff or repulsive.
    #[arg(long)]
    family: Option<String>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Frequency; a comma list for `slope`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    omega: Vec<f64>,
    /// omega = r alpha^2/(N-2k)^2 (attractive) or r alpha^2/N^2 (repulsive).
    #[arg(long = "omega-rel", value_delimiter = ',', allow_negative_numbers = true)]
    omega_rel: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    /// focusing (+1) or defocusing (-1); the family's sign by default.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<String>,
    /// Edge length.
    #[arg(long = "L", allow_negative_numbers = true)]
    length: Option<f64>,
    /// Intervals per edge.
    #[arg(long = "M")]
    intervals: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct EvolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    /// Final time.
    #[arg(long = "T", allow_negative_numbers = true)]
    t_final: Option<f64>,
    /// Perturbation size.
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// scale, negative-eigenvector or random.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "growth-threshold", allow_negative_numbers = true)]
    growth_threshold: Option<f64>,
}

/// Keys accepted in a `--config` file of the single-point subcommands.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    family: Option<String>,
    #[serde(rename = "N")]
    n: Option<usize>,
    k: Option<usize>,
    alpha: Option<f64>,
    omega: Option<OneOrMany>,
    omega_rel: Option<OneOrMany>,
    p: Option<f64>,
    mu: Option<String>,
    #[serde(rename = "L")]
    length: Option<f64>,
    #[serde(rename = "M")]
    intervals: Option<usize>,
    operator: Option<String>,
    sector: Option<String>,
    lowest: Option<usize>,
    dt: Option<f64>,
    #[serde(rename = "T")]
    t_final: Option<f64>,
    eps: Option<f64>,
    mode: Option<String>,
    seed: Option<u64>,
    growth_threshold: Option<f64>,
    out: Option<PathBuf>,
    format: Option<String>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Sweep file: one table of [`SweepSpecF64`] keys or a `[[sweep]]` array.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    sweep: Vec<SweepSpecF64>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_config(io: &IoArgs) -> Result<FileConfig> {
    match &io.config {
        None => Ok(FileConfig::default()),
        Some(path) => toml::from_str(&read_text(path)?).map_err(|e| invalid(format!("{}: {e}", path.display()))),
    }
}

/// Parameters of one command after merging flags over the config file.
struct Point {
    family: FamilyName,
    n: usize,
    k: Option<usize>,
    alpha: f64,
    omegas: Vec<f64>,
    p: f64,
    mu: Nonlinearity,
    length: Option<f64>,
    intervals: Option<usize>,
}

fn parse_mu(s: &str) -> Result<Nonlinearity> {
    match s {
        "focusing" | "+1" | "1" => Ok(Nonlinearity::Focusing),
        "defocusing" | "-1" => Ok(Nonlinearity::Defocusing),
        _ => Err(invalid(format!("mu = {s:?}, expected focusing (+1) or defocusing (-1)"))),
    }
}

impl Point {
    fn merge(flags: PointArgs, file: &FileConfig) -> Result<Self> {
        let family: FamilyName =
            flags.family.as_deref().or(file.family.as_deref()).unwrap_or("attractive").parse()?;
        let n = flags.n.or(file.n).ok_or_else(|| invalid("--N is required"))?;
        let k = flags.k.or(file.k);
        if family == FamilyName::Attractive && k.is_none() {
            return Err(invalid("the attractive family needs --k"));
        }
        let alpha = match (flags.alpha.or(file.alpha), family) {
            (Some(a), _) => a,
            (None, FamilyName::Kirchhoff) => 0.0,
            (None, _) => return Err(invalid("--alpha is required")),
        };
        let p = flags.p.or(file.p).ok_or_else(|| invalid("--p is required"))?;
        let mu = match flags.mu.as_deref().or(file.mu.as_deref()) {
            Some(s) => parse_mu(s)?,
            None if family == FamilyName::Repulsive => Nonlinearity::Defocusing,
            None => Nonlinearity::Focusing,
        };
        let pick = |flag: Vec<f64>, file: &Option<OneOrMany>| {
            if flag.is_empty() {
                file.clone().map(OneOrMany::into_vec).unwrap_or_default()
            } else {
                flag
            }
        };
        let absolute = pick(flags.omega, &file.omega);
        let relative = pick(flags.omega_rel, &file.omega_rel);
        if !absolute.is_empty() && !relative.is_empty() {
            return Err(invalid("give either --omega or --omega-rel, not both"));
        }
        let omegas = if relative.is_empty() {
            absolute
        } else {
            let threshold = match family {
                FamilyName::Attractive => existence_threshold(n, k.unwrap_or(0), alpha),
                FamilyName::Repulsive => existence_threshold(n, 0, alpha),
                FamilyName::Kirchhoff => return Err(invalid("--omega-rel needs alpha != 0; use --omega")),
            };
            relative.iter().map(|r| r * threshold).collect()
        };
        if omegas.is_empty() {
            return Err(invalid("--omega or --omega-rel is required"));
        }
        Ok(Point {
            family,
            n,
            k,
            alpha,
            omegas,
            p,
            mu,
            length: flags.length.or(file.length),
            intervals: flags.intervals.or(file.intervals),
        })
    }

    fn spec_at(&self, omega: f64) -> Result<ProfileSpecF64> {
        point_spec(self.family, self.n, self.k, self.alpha, omega, self.p, self.mu)
    }

    fn single(&self) -> Result<(ProfileSpecF64, GridSpecF64)> {
        let [omega] = self.omegas[..] else {
            return Err(invalid("this command takes a single frequency"));
        };
        let spec = self.spec_at(omega)?;
        let grid = GridSpecF64::new(
            self.length.unwrap_or_else(|| GridSpecF64::default_length(omega)),
            self.intervals.unwrap_or(GridSpecF64::DEFAULT_INTERVALS),
        )?;
        Ok((spec, grid))
    }
}

struct Output {
    path: Option<PathBuf>,
    format: Option<Format>,
}

impl Output {
    fn merge(io: &IoArgs, file: &FileConfig) -> Result<Self> {
        let format = io.format.as_deref().or(file.format.as_deref()).map(str::parse).transpose()?;
        Ok(Output { path: io.out.clone().or_else(|| file.out.clone()), format })
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn write(&self, bytes: &[u8]) -> Result<()> {
        match &self.path {
            Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes).and_then(|_| out.flush()).map_err(Error::from)
            }
        }
    }

    fn report(&self, report: &Report<f64>, default: Format) -> Result<()> {
        self.write(&render_report(report, self.format_or(default))?)
    }
}

fn csv_only(out: &Output, what: &str) -> Result<()> {
    match out.format {
        Some(Format::Json) => Err(invalid(format!("{what} output is CSV only"))),
        _ => Ok(()),
    }
}

fn profile_cmd(point: PointArgs, io: IoArgs) -> Result<()> {
    let file = load_config(&io)?;
    let out = Output::merge(&io, &file)?;
    csv_only(&out, "profile")?;
    let (spec, grid) = Point::merge(point, &file)?.single()?;
    let phi = build_profile(&spec, &grid)?;
    let mut buf = Vec::new();
    write_profile_csv(&phi, &mut buf)?;
    out.write(&buf)?;
    let f = functionals(&phi, &spec)?;
    eprintln!(
        "{} N={} omega={} p={}: mass {:.6e}, energy {:.6e}, residual {:.3e}",
        spec.family.name(),
        spec.n_edges,
        spec.omega,
        spec.p,
        f.mass,
        f.energy,
        stationary_residual(&phi, &spec)?
    );
    Ok(())
}

fn slope_cmd(point: PointArgs, io: IoArgs) -> Result<()> {
    let file = load_config(&io)?;
    let out = Output::merge(&io, &file)?;
    let pt = Point::merge(point, &file)?;
    let mut rows = Vec::with_capacity(pt.omegas.len());
    for &omega in &pt.omegas {
        let spec = pt.spec_at(omega)?;
        rows.push(match pt.family {
            FamilyName::Attractive => slope_j(spec.n_edges, pt.k.unwrap_or(0), spec.alpha, omega, spec.p)?,
            FamilyName::Kirchhoff => kirchhoff_slope(spec.n_edges, omega, spec.p)?,
            FamilyName::Repulsive => return Err(invalid("the slope is tabulated for the attractive and Kirchhoff families")),
        });
    }
    let report = Report { provenance: Provenance::new(Origin::Analytic, None), payload: Payload::Slope(rows) };
    out.report(&report, Format::Csv)
}

fn parse_operators(s: &str) -> Result<Vec<OperatorKind>> {
    match s {
        "all" => Ok(vec![OperatorKind::L1, OperatorKind::L2]),
        "L1" | "l1" => Ok(vec![OperatorKind::L1]),
        "L2" | "l2" => Ok(vec![OperatorKind::L2]),
        "H" | "h" => Ok(vec![OperatorKind::HLinear]),
        _ => Err(invalid(format!("operator {s:?}, expected L1, L2, H or all"))),
    }
}

fn parse_sector(s: &str) -> Result<Sector> {
    match s {
        "full" => Ok(Sector::Full),
        "equal" => Ok(Sector::Equal),
        _ => s.parse().map(Sector::Split).map_err(|_| invalid(format!("sector {s:?}, expected full, equal or k"))),
    }
}

fn spectrum_cmd(
    point: PointArgs,
    operator: Option<String>,
    sector: Option<String>,
    lowest: Option<usize>,
    io: IoArgs,
) -> Result<()> {
    let file = load_config(&io)?;
    let out = Output::merge(&io, &file)?;
    let (spec, grid) = Point::merge(point, &file)?.single()?;
    let kinds = parse_operators(operator.as_deref().or(file.operator.as_deref()).unwrap_or("all"))?;
    let sector = match sector.as_deref().or(file.sector.as_deref()) {
        Some(s) => parse_sector(s)?,
        None => theorem_sector(&spec),
    };
    let lowest = lowest.or(file.lowest).unwrap_or(10);
    let summaries = kinds
        .into_iter()
        .map(|kind| spectrum(&assemble(kind, &spec, &grid, sector)?, lowest))
        .collect::<Result<Vec<_>>>()?;
    let report = Report { provenance: Provenance::new(Origin::Numerical, Some(&grid)), payload: Payload::Spectrum(summaries) };
    out.report(&report, Format::Json)
}

fn verdict_cmd(point: PointArgs, io: IoArgs) -> Result<()> {
    let file = load_config(&io)?;
    let out = Output::merge(&io, &file)?;
    let (spec, grid) = Point::merge(point, &file)?.single()?;
    let check = cross_check(&spec, &grid)?;
    eprintln!(
        "numerical {:?} in {:?}, analytic {:?} in {:?}: {:?}",
        check.numerical.verdict, check.numerical.space, check.analytic.verdict, check.analytic.space, check.source
    );
    let report = Report { provenance: Provenance::new(Origin::Numerical, Some(&grid)), payload: Payload::CrossCheck(check) };
    out.report(&report, Format::Json)
}

fn parse_mode(s: &str) -> Result<PerturbationMode> {
    match s {
        "scale" => Ok(PerturbationMode::Scale),
        "negative-eigenvector" | "kernel-direction" => Ok(PerturbationMode::NegativeEigenvector),
        "random" => Ok(PerturbationMode::Random),
        _ => Err(invalid(format!("mode {s:?}, expected scale, negative-eigenvector or random"))),
    }
}

fn evolve_cmd(point: PointArgs, evo: EvolveArgs, final_state: Option<PathBuf>, io: IoArgs) -> Result<()> {
    let file = load_config(&io)?;
    let out = Output::merge(&io, &file)?;
    let (spec, grid) = Point::merge(point, &file)?.single()?;
    let mut cfg = EvolutionConfigF64::new(
        evo.dt.or(file.dt).unwrap_or_else(|| grid.spacing()),
        evo.t_final.or(file.t_final).unwrap_or(10.0),
    );
    cfg.perturbation = Perturbation {
        mode: parse_mode(evo.mode.as_deref().or(file.mode.as_deref()).unwrap_or("scale"))?,
        size: evo.eps.or(file.eps).unwrap_or(0.01),
    };
    cfg.seed = evo.seed.or(file.seed).unwrap_or(0);
    if let Some(g) = evo.growth_threshold.or(file.growth_threshold) {
        cfg.growth_threshold = g;
    }
    cfg.validate(&grid)?;
    let u0 = perturbed_profile(&spec, &grid, &cfg)?;
    let run = evolve(&u0, &spec, &cfg)?;
    if let Some(path) = final_state {
        let mut buf = Vec::new();
        write_profile_csv(&run.final_state, &mut buf)?;
        std::fs::write(&path, buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    let growth = run.trace.growth();
    eprintln!(
        "{} steps: mass drift {:.3e}, energy drift {:.3e}, growth {:.3}{}{}",
        run.trace.len().saturating_sub(1),
        run.trace.mass_drift(),
        run.trace.energy_drift(),
        growth,
        if growth > cfg.growth_threshold { " (growing)" } else { "" },
        if run.aborted { ", aborted on blow-up" } else { "" }
    );
    let report = Report { provenance: Provenance::new(Origin::Empirical, Some(&grid)), payload: Payload::Trace(run.trace) };
    out.report(&report, Format::Csv)
}

fn load_sweeps(path: &Path) -> Result<Vec<SweepSpecF64>> {
    let text = read_text(path)?;
    let bad = |e: toml::de::Error| invalid(format!("{}: {e}", path.display()));
    if toml::from_str::<toml::Table>(&text).map_err(bad)?.contains_key("sweep") {
        Ok(toml::from_str::<SweepFile>(&text).map_err(bad)?.sweep)
    } else {
        Ok(vec![toml::from_str::<SweepSpecF64>(&text).map_err(bad)?])
    }
}

fn sweep_cmd(length: Option<f64>, intervals: Option<usize>, io: IoArgs) -> Result<()> {
    let out = Output { path: io.out.clone(), format: io.format.as_deref().map(str::parse).transpose()? };
    csv_only(&out, "sweep")?;
    let mut specs = match &io.config {
        Some(path) => load_sweeps(path)?,
        None => acceptance_grid(GridSpecF64::DEFAULT_INTERVALS),
    };
    for s in &mut specs {
        s.intervals = intervals.or(s.intervals);
        s.length = length.or(s.length);
    }
    let mut rows: Vec<SweepRow<f64>> = Vec::new();
    for s in &specs {
        rows.extend(run_sweep(s)?);
    }
    let cells: Vec<Vec<String>> = rows.iter().map(SweepRow::cells).collect();
    let mut buf = Vec::new();
    write_stability_csv(&cells, &mut buf)?;
    out.write(&buf)?;
    let summary = summarize(&rows);
    eprintln!(
        "{} points: {} agree, {} conflicts, {} invalid, {} failed",
        summary.points, summary.agree, summary.conflicts, summary.invalid, summary.failed
    );
    if summary.conflicts > 0 {
        return Err(Error::Numerical(format!("{} conflicting verdicts", summary.conflicts)));
    }
    Ok(())
}

fn selftest_cmd(only: Option<u8>) -> i32 {
    let outcomes = match only {
        Some(id) => match acceptance::run_one(id) {
            Some(o) => vec![o],
            None => {
                eprintln!("error: no criterion {id} (1..=11)");
                return 1;
            }
        },
        None => acceptance::run_all(),
    };
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        0
    } else {
        2
    }
}

/// Exit code of a library error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() || matches!(e, Error::Io(_)) {
        1
    } else {
        2
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_command<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Profile { point, io } => profile_cmd(point, io),
        Command::Slope { point, io } => slope_cmd(point, io),
        Command::Spectrum { point, operator, sector, lowest, io } => spectrum_cmd(point, operator, sector, lowest, io),
        Command::Verdict { point, io } => verdict_cmd(point, io),
        Command::Evolve { point, evo, final_state, io } => evolve_cmd(point, evo, final_state, io),
        Command::Sweep { length, intervals, io } => sweep_cmd(length, intervals, io),
        Command::Selftest { only } => return selftest_cmd(only),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_frequency_tracks_the_threshold() {
        let flags = PointArgs {
            n: Some(5),
            k: Some(1),
            alpha: Some(-3.0),
            omega_rel: vec![2.0],
            p: Some(3.0),
            ..PointArgs::default()
        };
        let pt = Point::merge(flags, &FileConfig::default()).unwrap();
        assert!((pt.omegas[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn flags_win_over_file() {
        let file: FileConfig = toml::from_str("N = 4\nk = 1\nalpha = -1\nomega = 9.0\np = 3").unwrap();
        let flags = PointArgs { omega: vec![4.0], ..PointArgs::default() };
        let pt = Point::merge(flags, &file).unwrap();
        assert_eq!((pt.n, pt.omegas.clone()), (4, vec![4.0]));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("omgea = 1.0").is_err());
    }

    #[test]
    fn sector_and_operator_names() {
        assert_eq!(parse_sector("2").unwrap(), Sector::Split(2));
        assert_eq!(parse_sector("equal").unwrap(), Sector::Equal);
        assert!(parse_sector("half").is_err());
        assert_eq!(parse_operators("all").unwrap().len(), 2);
        assert!(parse_mode("kick").is_err());
        assert_eq!(parse_mu("-1").unwrap(), Nonlinearity::Defocusing);
    }
}
