//! Command-line definition and command implementations.

use std::cell::RefCell;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use moebius_energy::bounds::{
    circle_comparison_check, continuity_check, diff_via_c, difference_identity, part_bounds, sup_x,
};
use moebius_energy::curve::{make_family, reparametrize_arclength};
use moebius_energy::densities::{density_bundle, x_bundle, ArcNodes};
use moebius_energy::energy::{energy_report_with, identity_suite, normalize};
use moebius_energy::moebius::{invariance_report, random_map};
use moebius_energy::quad::convergence_study;
use moebius_energy::{
    suite, AntipodalSignVariant, ArcLengthCurve, BoundVariant, ClosedCurve, ConvergenceReport,
    Family, PairComparison, PairGrid, ReparamOptions,
};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::files::{read_curve, read_map, CurveFile, MapFile};
use crate::report::{
    bound_rows, check_table, convergence_rows, csv_string, energy_rows, energy_table, render_table,
    CheckRow, Status, BOUND_COLUMNS, CONVERGENCE_COLUMNS, ENERGY_COLUMNS,
};

#[derive(Debug, Parser)]
#[command(
    name = "moebius-energy",
    version,
    about = "Möbius energy of closed Fourier curves and its invariant parts"
)]
pub struct Cli {
    /// Worker threads for the quadrature (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a curve file for a built-in family.
    Curve(CurveCmd),
    /// E, E0, E1, E2 by every route on an arc-length curve of length 2π.
    Energy(EnergyCmd),
    /// Per-pair densities on the staggered grid as CSV.
    ///
    /// Columns: s1, s2, M, M0, M1, M2, cos_phi, X, dX1, dX2, d2X.
    Densities(DensitiesCmd),
    /// Identity residuals and bound checks; exits 2 if any non-printed check fails.
    Verify(VerifyCmd),
    /// Energy and cross-ratio changes under a seeded random Möbius map.
    Moebius(MoebiusCmd),
    /// Grid-refinement study of E, E0, E1, E2.
    ///
    /// CSV columns: quantity, N, value, error_vs_extrapolated.
    Converge(ConvergeCmd),
    /// Difference identity, continuity bounds and the cross-ratio difference formula for two curves.
    Compare(CompareCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum FamilyName {
    Circle,
    Ellipse,
    TorusKnot,
    Trefoil,
    Cinquefoil,
    PerturbedCircle,
}

/// Where the curve comes from: a family with parameters, or a curve file.
#[derive(Clone, Debug, Args)]
pub struct Source {
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Curve JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Ambient dimension for families.
    #[arg(long, default_value_t = 3)]
    pub dimension: usize,
    /// Ellipse semi-axis along x.
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    /// Ellipse semi-axis along y.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Torus-knot winding around the axis.
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    /// Torus-knot winding through the hole.
    #[arg(long, default_value_t = 3)]
    pub q: u32,
    #[arg(long, default_value_t = 2.0)]
    pub major: f64,
    #[arg(long, default_value_t = 0.5)]
    pub minor: f64,
    /// Seed of the perturbed circle.
    #[arg(long, default_value_t = 7)]
    pub curve_seed: u64,
    /// Amplitude of the perturbed circle.
    #[arg(long, default_value_t = 0.05)]
    pub amplitude: f64,
}

impl Source {
    fn family(&self, name: FamilyName) -> Family {
        match name {
            FamilyName::Circle => Family::Circle,
            FamilyName::Ellipse => Family::Ellipse {
                a: self.a,
                b: self.b,
            },
            FamilyName::TorusKnot => Family::TorusKnot {
                p: self.p,
                q: self.q,
                major: self.major,
                minor: self.minor,
            },
            FamilyName::Trefoil => Family::trefoil(),
            FamilyName::Cinquefoil => Family::cinquefoil(),
            FamilyName::PerturbedCircle => Family::PerturbedCircle {
                seed: self.curve_seed,
                amplitude: self.amplitude,
            },
        }
    }

    pub fn is_given(&self) -> bool {
        self.family.is_some() || self.file.is_some()
    }

    /// The curve in its native parametrization.
    pub fn load(&self) -> Result<ClosedCurve> {
        match (&self.family, &self.file) {
            (Some(name), None) => Ok(make_family(&self.family(*name), self.dimension)?),
            (None, Some(path)) => read_curve(path),
            _ => Err(CliError::Input(
                "give exactly one curve source: --family or --file".into(),
            )),
        }
    }

    pub fn label(&self) -> String {
        match (&self.family, &self.file) {
            (_, Some(path)) => path.display().to_string(),
            (Some(name), None) => name
                .to_possible_value()
                .map(|v| v.get_name().to_string())
                .unwrap_or_default(),
            _ => String::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Variant {
    ProofPlus,
    PrintedMinus,
}

impl From<Variant> for AntipodalSignVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::ProofPlus => AntipodalSignVariant::ProofPlus,
            Variant::PrintedMinus => AntipodalSignVariant::PrintedMinus,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveCmd {
    #[command(flatten)]
    pub source: Source,
    /// Write the arc-length reparametrization scaled to length 2π.
    #[arg(long)]
    pub arclength: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnergyCmd {
    #[command(flatten)]
    pub source: Source,
    /// Grid size N (even, at least 32).
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Sign of the antipodal term in the log-distortion route.
    #[arg(long, value_enum, default_value_t = Variant::ProofPlus)]
    pub variant: Variant,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DensitiesCmd {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyCmd {
    #[command(flatten)]
    pub source: Source,
    /// Run the built-in suite: circle, ellipse(2,1), trefoil, cinquefoil, perturbed circle.
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MoebiusCmd {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Seed of the random map.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Minimum distance between the inversion center and the curve.
    #[arg(long, default_value_t = 0.5)]
    pub safety: f64,
    /// Use this map file instead of a random map.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Also write the map that was used.
    #[arg(long)]
    pub save_map: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConvergeCmd {
    #[command(flatten)]
    pub source: Source,
    /// Strictly doubling grid sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [128, 256, 512])]
    pub grids: Vec<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareCmd {
    #[command(flatten)]
    pub source: Source,
    /// Family of the second curve; it shares the family parameters of the first.
    #[arg(long, value_enum)]
    pub other_family: Option<FamilyName>,
    /// Curve file of the second curve.
    #[arg(long)]
    pub other_file: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Uniform shifts for the infimum over reparametrization offsets.
    #[arg(long, default_value_t = 64)]
    pub shifts: usize,
    /// Refine the best shift by golden-section search.
    #[arg(long)]
    pub refine: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let written = stdout.write_all(text.as_bytes()).and_then(|_| {
                if text.ends_with('\n') {
                    Ok(())
                } else {
                    stdout.write_all(b"\n")
                }
            });
            match written {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn check_grid(n: usize) -> Result<()> {
    if n < 32 || !n.is_multiple_of(2) {
        return Err(CliError::Input(format!(
            "grid size N must be even and at least 32, got {n}"
        )));
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.threads {
        Some(0) => Err(CliError::Input("--threads must be positive".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Input(format!("cannot start thread pool: {e}")))?;
            pool.install(|| dispatch(cli.command))
        }
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Curve(c) => cmd_curve(&c),
        Command::Energy(c) => cmd_energy(&c),
        Command::Densities(c) => cmd_densities(&c),
        Command::Verify(c) => cmd_verify(&c),
        Command::Moebius(c) => cmd_moebius(&c),
        Command::Converge(c) => cmd_converge(&c),
        Command::Compare(c) => cmd_compare(&c),
    }
}

fn cmd_curve(cmd: &CurveCmd) -> Result<()> {
    let curve = cmd.source.load()?;
    let curve = if cmd.arclength {
        let arc = reparametrize_arclength(&curve, &ReparamOptions::default())?;
        arc.rescaled(std::f64::consts::TAU)?.into_curve()
    } else {
        curve
    };
    emit(&cmd.out, &json(&CurveFile::from_curve(&curve))?)
}

pub fn cmd_energy(cmd: &EnergyCmd) -> Result<()> {
    check_grid(cmd.n)?;
    let arc = normalize(&cmd.source.load()?)?;
    let report = energy_report_with(&arc, cmd.n, cmd.variant.into())?;
    let text = match cmd.output.format {
        Format::Json => json(&report)?,
        Format::Csv => csv_string(&ENERGY_COLUMNS, &energy_rows(&report))?,
        Format::Table => energy_table(&report),
    };
    emit(&cmd.output.out, &text)
}

pub const DENSITY_COLUMNS: [&str; 11] = [
    "s1", "s2", "M", "M0", "M1", "M2", "cos_phi", "X", "dX1", "dX2", "d2X",
];

fn cmd_densities(cmd: &DensitiesCmd) -> Result<()> {
    check_grid(cmd.n)?;
    let arc = normalize(&cmd.source.load()?)?;
    emit(&cmd.out, &densities_csv(&arc, cmd.n)?)
}

/// Every pair of the staggered `N × N` grid, row-major.
pub fn densities_csv(arc: &ArcLengthCurve, n: usize) -> Result<String> {
    let grid = PairGrid::new(n, arc.length())?;
    let nodes = ArcNodes::new(arc, grid);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DENSITY_COLUMNS)?;
    for i in 0..n {
        for j in 0..n {
            let pg = nodes.pair(i, j);
            let d = density_bundle(&pg);
            let x = x_bundle(&pg).map_err(moebius_energy::Error::from)?;
            let row = [
                pg.s1, pg.s2, d.m, d.m0, d.m1, d.m2, d.cos_phi, x.x, x.dx_ds1, x.dx_ds2, x.d2x,
            ];
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Identity residuals, both bound variants and the circle comparison for one curve.
pub fn verify_curve(name: &str, arc: &ArcLengthCurve, n: usize) -> Result<Vec<CheckRow>> {
    let mut rows: Vec<CheckRow> = identity_suite(arc, n)?
        .iter()
        .map(|r| CheckRow::from_residual(name, r))
        .collect();
    let report = energy_report_with(arc, n, AntipodalSignVariant::ProofPlus)?;
    let x_sup = sup_x(arc, n)?;
    for variant in [BoundVariant::Corrected, BoundVariant::Printed] {
        rows.extend(
            part_bounds(&report, x_sup, variant)
                .iter()
                .map(|b| CheckRow::from_bound(name, b)),
        );
    }
    rows.extend(
        circle_comparison_check(arc, n)?
            .iter()
            .map(|b| CheckRow::from_bound(name, b)),
    );
    Ok(rows)
}

fn cmd_verify(cmd: &VerifyCmd) -> Result<()> {
    check_grid(cmd.n)?;
    let curves: Vec<(String, ArcLengthCurve)> = match (cmd.all, cmd.source.is_given()) {
        (true, false) => suite::normalized()?
            .into_iter()
            .map(|(name, c)| (name.to_string(), c))
            .collect(),
        (false, true) => vec![(cmd.source.label(), normalize(&cmd.source.load()?)?)],
        (true, true) => {
            return Err(CliError::Input(
                "--all cannot be combined with a curve source".into(),
            ))
        }
        (false, false) => return Err(CliError::Input("give --all, --family or --file".into())),
    };
    let mut rows = Vec::new();
    for (name, arc) in &curves {
        rows.extend(verify_curve(name, arc, cmd.n)?);
    }
    let text = match cmd.format {
        Format::Json => json(&rows)?,
        Format::Table => check_table(&rows),
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.curve.clone(),
                        r.check.clone(),
                        r.variant.clone(),
                        format!("{:e}", r.lhs),
                        format!("{:e}", r.rhs),
                        format!("{:e}", r.slack),
                        format!("{:?}", r.status).to_lowercase(),
                    ]
                })
                .collect();
            csv_string(
                &["curve", "check", "variant", "lhs", "rhs", "slack", "status"],
                &cells,
            )?
        }
    };
    emit(&cmd.out, &text)?;
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r.status == Status::Fail)
        .map(|r| format!("{}:{}", r.curve, r.check))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

#[derive(Serialize)]
struct MoebiusOutput {
    seed: Option<u64>,
    safety: Option<f64>,
    map: MapFile,
    report: moebius_energy::moebius::InvarianceReport,
}

fn cmd_moebius(cmd: &MoebiusCmd) -> Result<()> {
    check_grid(cmd.n)?;
    let curve = cmd.source.load()?;
    let (map, seed, safety) = match &cmd.map {
        Some(path) => (read_map(path)?, None, None),
        None => (
            random_map(cmd.seed, &curve, cmd.safety)?,
            Some(cmd.seed),
            Some(cmd.safety),
        ),
    };
    if let Some(path) = &cmd.save_map {
        std::fs::write(path, json(&MapFile::from_map(&map))?)?;
    }
    let report = invariance_report(&curve, &map, cmd.n)?;
    let text = match cmd.output.format {
        Format::Json => json(&MoebiusOutput {
            seed,
            safety,
            map: MapFile::from_map(&map),
            report,
        })?,
        Format::Csv | Format::Table => {
            let rows: Vec<Vec<String>> = [
                ("E0", report.original.e0, report.image.e0, report.delta_e0),
                ("E1", report.original.e1, report.image.e1, report.delta_e1),
                ("E2", report.original.e2, report.image.e2, report.delta_e2),
                ("max_c_deviation", 0.0, 0.0, report.max_c_deviation),
                ("max_c_relative", 0.0, 0.0, report.max_c_relative),
            ]
            .iter()
            .map(|(q, a, b, d)| {
                vec![
                    q.to_string(),
                    format!("{a:e}"),
                    format!("{b:e}"),
                    format!("{d:e}"),
                ]
            })
            .collect();
            let headers = ["quantity", "original", "image", "delta"];
            if cmd.output.format == Format::Csv {
                csv_string(&headers, &rows)?
            } else {
                render_table(&headers, &rows)
            }
        }
    };
    emit(&cmd.output.out, &text)
}

/// Convergence of all four energies; each grid is evaluated once.
pub fn converge_all(
    arc: &ArcLengthCurve,
    grids: &[usize],
) -> Result<Vec<(&'static str, ConvergenceReport)>> {
    let reports = RefCell::new(Vec::new());
    let e = convergence_study(grids, |n| -> Result<f64, moebius_energy::Error> {
        let r = energy_report_with(arc, n, AntipodalSignVariant::ProofPlus)?;
        let value = r.e;
        reports.borrow_mut().push(r);
        Ok(value)
    })?;
    let reports = reports.into_inner();
    let mut out = vec![("E", e)];
    for (name, pick) in [
        (
            "E0",
            (|r: &moebius_energy::EnergyReport| r.e0) as fn(&moebius_energy::EnergyReport) -> f64,
        ),
        ("E1", |r| r.e1),
        ("E2", |r| r.e2),
    ] {
        let study = convergence_study(grids, |n| -> Result<f64, moebius_energy::Error> {
            Ok(pick(
                reports
                    .iter()
                    .find(|r| r.n == n)
                    .expect("grid evaluated above"),
            ))
        })?;
        out.push((name, study));
    }
    Ok(out)
}

fn cmd_converge(cmd: &ConvergeCmd) -> Result<()> {
    for &n in &cmd.grids {
        check_grid(n)?;
    }
    let arc = normalize(&cmd.source.load()?)?;
    let studies = converge_all(&arc, &cmd.grids)?;
    let text = match cmd.output.format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = studies
                .iter()
                .map(|(q, s)| Ok((q.to_string(), serde_json::to_value(s)?)))
                .collect::<Result<_>>()?;
            json(&map)?
        }
        Format::Csv | Format::Table => {
            let rows: Vec<Vec<String>> = studies
                .iter()
                .flat_map(|(q, s)| convergence_rows(q, s))
                .collect();
            if cmd.output.format == Format::Csv {
                csv_string(&CONVERGENCE_COLUMNS, &rows)?
            } else {
                let mut t = render_table(&CONVERGENCE_COLUMNS, &rows);
                for (q, s) in &studies {
                    let order = s
                        .order
                        .map(|p| format!("{p:.3}"))
                        .unwrap_or_else(|| "-".into());
                    t.push_str(&format!(
                        "{q}: order {order}, extrapolated {:.12e}\n",
                        s.extrapolated
                    ));
                }
                t
            }
        }
    };
    emit(&cmd.output.out, &text)
}

#[derive(Serialize)]
struct CompareOutput {
    difference_identity: moebius_energy::bounds::DifferenceIdentity,
    continuity: moebius_energy::bounds::ContinuityCheck,
    via_cross_ratio: moebius_energy::bounds::DiffViaC,
}

fn cmd_compare(cmd: &CompareCmd) -> Result<()> {
    check_grid(cmd.n)?;
    if cmd.shifts < 8 {
        return Err(CliError::Input(format!(
            "--shifts must be at least 8, got {}",
            cmd.shifts
        )));
    }
    let other_source = Source {
        family: cmd.other_family,
        file: cmd.other_file.clone(),
        ..cmd.source.clone()
    };
    let f = cmd.source.load()?;
    let g = other_source.load()?;
    let fc = PairComparison::new(normalize(&f)?, normalize(&g)?)?;
    let out = CompareOutput {
        difference_identity: difference_identity(&fc, cmd.n)?,
        continuity: continuity_check(&fc, cmd.n, cmd.shifts, 0.0, cmd.refine)?,
        via_cross_ratio: diff_via_c(&f, &g, cmd.n, &[1, 2, 4, 8])?,
    };
    let text = match cmd.output.format {
        Format::Json => json(&out)?,
        Format::Csv => csv_string(&BOUND_COLUMNS, &bound_rows(&out.continuity.reports))?,
        Format::Table => {
            let d = &out.difference_identity;
            let mut t = render_table(&BOUND_COLUMNS, &bound_rows(&out.continuity.reports));
            t.push_str(&format!(
                "difference identity: E1 {:.9e} vs {:.9e}, E2 {:.9e} vs {:.9e}\n",
                d.lhs_e1, d.rhs_e1, d.lhs_e2, d.rhs_e2
            ));
            t.push_str(&format!(
                "cross-ratio route: {:.9e} vs direct {:.9e} (converged: {})\n",
                out.via_cross_ratio.pv.extrapolated,
                out.via_cross_ratio.direct,
                out.via_cross_ratio.pv.converged
            ));
            t
        }
    };
    emit(&cmd.output.out, &text)
}
