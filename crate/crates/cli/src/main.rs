//! `aodesign` command-line front end.

mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use aodesign::bandshape::Bandshape;
use aodesign::bragg::{DeviceGeometry, Interaction};
use aodesign::cascade::{addressing_table, cascade_report, OverlapMap};
use aodesign::config::{FormatKey, RangeSpec, RunConfig};
use aodesign::design::{design_device, DeviceDesign};
use aodesign::export;
use aodesign::fom::{scan, FomGrid, FomInputs};
use aodesign::materials::{
    branch_velocity, slowness_sweep, spherical_direction, walkoff_and_curvature, AcousticBranch, MaterialConstants,
};
use aodesign::optics::activity_curve;
use aodesign::transducer::{propagate, Grid, PropagationOptions, PropagationSetup};
use aodesign::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aodesign", version, about = "Anisotropic acousto-optic deflector design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Slowness-surface and optical-activity sweeps of the configured material.
    Material(Common),
    /// Figure-of-merit scan, two-colour design, prism cut and cascade report.
    Design(Common),
    /// Drive-tone table for a two-dimensional trap array.
    Address {
        #[command(flatten)]
        common: Common,
        /// Array size as ROWSxCOLS; overrides the config.
        #[arg(long, value_parser = parse_grid)]
        array: Option<(usize, usize)>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// NxM resampling of the configured sweep (material) or rotation grid (design).
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Worker threads for the figure-of-merit scan.
    #[arg(long)]
    jobs: Option<usize>,
    /// Artifact formats; CSV tables are always written.
    #[arg(long, value_enum)]
    format: Vec<Format>,
    #[arg(long, value_enum, default_value_t = Criterion::Ripple)]
    band_criterion: Criterion,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Png,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Criterion {
    Ripple,
    #[value(name = "3db")]
    ThreeDb,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NxM, got {s:?}"))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((n(a)?, n(b)?))
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl Failure {
    fn stage(stage: &str, e: Error) -> Self {
        let msg = format!("{stage}: {e}");
        match e {
            Error::Config(_)
            | Error::InvalidMaterial(_)
            | Error::InvalidGeometry(_)
            | Error::InvalidTransducer(_)
            | Error::InvalidCascade(_)
            | Error::WavelengthOutOfRange { .. } => Failure::Usage(msg),
            _ => Failure::Compute(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Run {
    config: RunConfig,
    out: PathBuf,
    png: bool,
}

impl Run {
    fn new(common: &Common) -> CliResult<Self> {
        let config = RunConfig::load(&common.config).map_err(|e| Failure::stage("config", e))?;
        let out = common.out.clone().unwrap_or_else(|| config.output_dir());
        std::fs::create_dir_all(&out).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
        let png = if common.format.is_empty() {
            config.output.formats.contains(&FormatKey::Png)
        } else {
            common.format.contains(&Format::Png)
        };
        Ok(Self { config, out, png })
    }

    fn write(&self, name: &str, bytes: impl AsRef<[u8]>) -> CliResult<()> {
        let p = self.out.join(name);
        std::fs::write(&p, bytes).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
    }

    fn image(&self, name: &str, img: &image::RgbImage) -> CliResult<()> {
        plot::save(img, &self.out.join(name)).map_err(Failure::Usage)
    }

    fn material(&self) -> CliResult<MaterialConstants> {
        self.config.material().map_err(|e| Failure::stage("material", e))
    }

    fn geometry(&self) -> CliResult<DeviceGeometry> {
        self.config.geometry().map_err(|e| Failure::stage("geometry", e))
    }

    fn design(&self, m: &MaterialConstants, g: &DeviceGeometry, criterion: Criterion) -> CliResult<DeviceDesign> {
        let settings =
            self.config.design.settings(criterion == Criterion::ThreeDb).map_err(|e| Failure::stage("design", e))?;
        design_device(m, g, &settings).map_err(|e| Failure::stage("design", e))
    }
}

/// `n` evenly spaced values over the range; a single value sits at `single`.
fn resample(range: &RangeSpec, n: Option<usize>, single: f64) -> Vec<f64> {
    match n {
        None => range.values(),
        Some(0) => Vec::new(),
        Some(1) => vec![single],
        Some(n) => (0..n).map(|i| range.start + (range.stop - range.start) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn run_material(common: &Common) -> CliResult<()> {
    let run = Run::new(common)?;
    let c = &run.config;
    let thetas = resample(&c.sweep.theta_deg, common.grid.map(|g| g.0), c.sweep.theta_deg.start);
    let phis = resample(&c.sweep.phi_deg, common.grid.map(|g| g.1), c.sweep.phi_deg.start);
    let act = c.sweep.activity_theta_deg.values();
    if thetas.is_empty() || phis.is_empty() || act.is_empty() {
        return Err(Failure::Usage("empty sweep grid".into()));
    }
    let m = run.material()?;
    let g = run.geometry()?;
    let rows = slowness_sweep(&m, &thetas, &phis).map_err(|e| Failure::stage("slowness sweep", e))?;
    run.write("slowness.csv", export::slowness_csv(&rows))?;
    let mut activity = Vec::new();
    for (name, nm) in [("red", c.design.red_nm), ("blue", c.design.blue_nm)] {
        let curve = activity_curve(&m, nm, &act).map_err(|e| Failure::stage("optical activity", e))?;
        run.write(&format!("activity_{name}.csv"), export::activity_csv(&curve))?;
        activity.push(curve.iter().map(|r| (r.theta_deg, r.xi)).collect::<Vec<_>>());
    }

    let axis = spherical_direction(90.0, 45.0);
    let v110 = branch_velocity(&m, &axis, AcousticBranch::SlowShear).map_err(|e| Failure::stage("christoffel", e))?;
    let wc = walkoff_and_curvature(&m, &axis, AcousticBranch::SlowShear)
        .map_err(|e| Failure::stage("slowness curvature", e))?;
    let it = Interaction::new(&m, &g, c.design.red_nm).map_err(|e| Failure::stage("interaction", e))?;
    let w = it.acoustic_walkoff().map_err(|e| Failure::stage("walk-off", e))?;
    let mut s = String::from("[material]\n");
    s += &format!("name = {}\n", m.name);
    s += &format!("slow_shear_110_mm_per_us = {v110:.6}\n");
    s += &format!("b_z_110 = {:.4}\n", wc.b_z);
    s += &format!("b_t_110 = {:.4}\n", wc.b_t);
    s += &format!("grating_velocity_mm_per_us = {:.6}\n", it.velocity);
    s += &format!("walkoff_inplane_deg = {:.3}\n", w.in_plane_deg);
    s += &format!("walkoff_out_of_plane_deg = {:.3}\n", w.out_of_plane_deg);
    s += &format!("walkoff_total_deg = {:.3}\n", w.total_deg);
    run.write("material.txt", s)?;

    if run.png {
        let series: Vec<Vec<(f64, f64)>> = AcousticBranch::ALL
            .iter()
            .map(|b| {
                rows.iter()
                    .filter(|r| r.branch == *b && r.phi_deg == phis[0])
                    .map(|r| (r.theta_deg, r.velocity))
                    .collect()
            })
            .collect();
        run.image("slowness.png", &plot::line_plot(&series, None))?;
        run.image("activity.png", &plot::line_plot(&activity, None))?;
    }
    Ok(())
}

fn fom_grid(run: &Run, common: &Common, g: &DeviceGeometry) -> CliResult<FomGrid> {
    let f = &run.config.fom;
    let grid = FomGrid {
        phi_o: resample(&f.phi_o_deg, common.grid.map(|x| x.0), g.optical_rotation_deg),
        phi_a: resample(&f.phi_a_deg, common.grid.map(|x| x.1), g.acoustic_rotation_deg),
    };
    if grid.is_empty() {
        return Err(Failure::Usage("empty figure-of-merit grid".into()));
    }
    Ok(grid)
}

fn matching_rows(it: &Interaction<'_>, b: &Bandshape) -> Vec<(f64, f64, f64)> {
    let beta = b.incidence_angle_deg.to_radians();
    b.samples.iter().map(|s| (s.0, b.incidence_angle_deg, it.mismatch(s.0, beta).unwrap_or(f64::NAN))).collect()
}

fn run_design(common: &Common) -> CliResult<()> {
    let run = Run::new(common)?;
    let c = &run.config;
    let g = run.geometry()?;
    let grid = fom_grid(&run, common, &g)?;
    let m = run.material()?;
    if common.jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }

    let mut inputs = FomInputs::new(m.clone(), g.clone());
    inputs.settings =
        c.design.settings(common.band_criterion == Criterion::ThreeDb).map_err(|e| Failure::stage("design", e))?;
    inputs.limits = c.fom.limits();
    let fom = scan(&grid, &inputs, common.jobs).map_err(|e| Failure::stage("fom scan", e))?;
    run.write("fom.csv", export::fom_csv(&fom))?;

    let design = run.design(&m, &g, common.band_criterion)?;
    for (name, col) in [("red", &design.red), ("blue", &design.blue)] {
        run.write(&format!("bandshape_{name}.csv"), export::bandshape_csv(&col.bandshape))?;
        let it = Interaction::new(&m, &g, col.wavelength_nm).map_err(|e| Failure::stage("matching", e))?;
        run.write(&format!("matching_{name}.csv"), export::matching_csv(&matching_rows(&it, &col.bandshape)))?;
    }

    let cascade_cfg = c.cascade.config(&g).map_err(|e| Failure::stage("cascade", e))?;
    let cascade = cascade_report(&m, &design, &cascade_cfg).map_err(|e| Failure::stage("cascade", e))?;
    run.write("report.txt", export::design_report(&design, Some(&fom), Some(&cascade)))?;

    let it = Interaction::new(&m, &g, c.design.red_nm).map_err(|e| Failure::stage("propagation", e))?;
    let f = design.red.bandshape.center;
    let setup = PropagationSetup::from_interaction(&it, f, false).map_err(|e| Failure::stage("propagation", e))?;
    let distance = 2.0 * g.transducer.height;
    let field_grid = Grid::auto(&g.transducer, &setup, distance);
    let fields =
        propagate(&g.transducer, &setup, field_grid, distance, PropagationOptions { steps: 16, absorbing: true })
            .map_err(|e| Failure::stage("propagation", e))?;
    let last = fields.last().expect("propagation returns the launch field");
    run.write("field_red.bin", export::field_dump(last))?;
    run.write("projection_red.csv", export::projection_csv(last))?;

    if run.png {
        let values: Vec<f64> = fom.cells.iter().map(|c| c.fom).collect();
        // Cells are φ_o-major; the heatmap puts φ_a on rows.
        let (no, na) = (grid.phi_o.len(), grid.phi_a.len());
        let transposed: Vec<f64> =
            (0..na).flat_map(|a| (0..no).map(move |o| (o, a))).map(|(o, a)| values[o * na + a]).collect();
        run.image("fom.png", &plot::heatmap(&transposed, no, na))?;
        let bands = vec![design.red.bandshape.samples.clone(), design.blue.bandshape.samples.clone()];
        run.image("bandshape.png", &plot::line_plot(&bands, Some(-20.0)))?;
        let proj: Vec<(f64, f64)> =
            last.projection().iter().enumerate().map(|(j, a)| (last.grid.v(j), a.norm_sqr())).collect();
        run.image("projection.png", &plot::line_plot(&[proj], None))?;
    }
    Ok(())
}

fn run_address(common: &Common, array: Option<(usize, usize)>) -> CliResult<()> {
    let run = Run::new(common)?;
    let c = &run.config;
    let (ni, nj) = array.unwrap_or((c.cascade.array[0], c.cascade.array[1]));
    if ni == 0 || nj == 0 {
        return Err(Failure::Usage("empty trap array".into()));
    }
    let m = run.material()?;
    let g = run.geometry()?;
    let design = run.design(&m, &g, common.band_criterion)?;
    let cfg = c.cascade.config(&g).map_err(|e| Failure::stage("cascade", e))?;
    let report = cascade_report(&m, &design, &cfg).map_err(|e| Failure::stage("cascade", e))?;
    let overlap = OverlapMap::new(&m, &design).map_err(|e| Failure::stage("overlap", e))?;
    let widths = (report.bands.0 .1 - report.bands.0 .0, report.bands.1 .1 - report.bands.1 .0);
    let plan = addressing_table(ni, nj, report.drive_pair.0, report.access_time, widths, cfg.oversample, &|f| {
        overlap.blue_for(f)
    })
    .map_err(|e| Failure::stage("addressing", e))?;
    run.write("addressing.csv", export::addressing_csv(&plan))?;
    if run.png {
        let pairs: Vec<(f64, f64)> =
            plan.rows.iter().filter(|r| r.site_j == 0).map(|r| (r.f_red_x, r.f_blue_x)).collect();
        run.image("addressing.png", &plot::line_plot(&[pairs], None))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Material(c) => run_material(c),
        Command::Design(c) => run_design(c),
        Command::Address { common, array } => run_address(common, *array),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
