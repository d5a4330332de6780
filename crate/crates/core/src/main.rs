use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stochres::ctmc::{invariant_measure, relaxation_time, transient_path, StateProbability};
use stochres::escape::{record_histogram, scatter, EntrancePhaseModel, EscapeModel, DEFAULT_BIN_WIDTH};
use stochres::io::{self, FoldedRow};
use stochres::kramers::{adiabatic_rate_table, DEFAULT_PHASE_POINTS};
use stochres::measures::{diffusion_measures, six_measures};
use stochres::potential::{critical_forcing, frozen_critical_points, Forcing, ModelParams, Well};
use stochres::reduction::{build_well_tracks, reduce, DEFAULT_TRACK_POINTS};
use stochres::sde::{simulate, SimConfig};
use stochres::stats::{conditional_ks_records, staircase};
use stochres::sweep::{emit_plots, run_cell, run_sweep, Manifest, SweepConfig, OUTPUT_DIR_ENV};
use stochres::{Error, Result};

#[derive(Parser)]
#[command(name = "stochres", version, about = "Stochastic resonance in a two-well, two-pathway potential")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Model {
    #[arg(long, default_value_t = 0.15)]
    a: f64,
    #[arg(long, default_value_t = 0.1)]
    b: f64,
    /// Forcing angle in degrees.
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Forcing magnitude as a fraction of the critical forcing.
    #[arg(long, default_value_t = 0.7)]
    force_fraction: f64,
    #[arg(long, default_value_t = 0.001)]
    omega: f64,
}

impl Model {
    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.a, self.b)
    }

    fn forcing(&self) -> Result<Forcing> {
        let f = self.force_fraction * critical_forcing(&self.params()?)?.min();
        Forcing::new(f, self.phi, self.omega)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TrajectoryFormat {
    Csv,
    Bin,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Desk,
    Paper,
}

#[derive(Subcommand)]
enum Command {
    /// Critical points of the frozen potential and the critical forcing.
    CriticalPoints {
        #[command(flatten)]
        model: Model,
        /// Phase of the forcing as a fraction of the period.
        #[arg(long, default_value_t = 0.0)]
        phase: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frozen-phase escape rates over one period.
    Rates {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_PHASE_POINTS)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transient and invariant state probabilities of the two-state chain.
    Ctmc {
        /// Rate table CSV with columns t, phase, p, q.
        #[arg(long)]
        rates: PathBuf,
        /// Initial probability of the left state.
        #[arg(long, default_value_t = 0.5)]
        nu0: f64,
        #[arg(long, default_value_t = 1.0)]
        periods: f64,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One realization of the forced diffusion.
    Simulate {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 2.0)]
        periods: f64,
        #[arg(long, default_value_t = 0.014)]
        t_step: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        realization: u64,
        #[arg(long, default_value_t = 10)]
        stride: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: TrajectoryFormat,
        #[arg(long)]
        out: PathBuf,
        /// Also reduce the path and write its escapes here.
        #[arg(long)]
        escapes: Option<PathBuf>,
        #[arg(long, default_value_t = 0.19)]
        radius: f64,
    },
    /// Escape-duration histogram and entrance-phase scatter.
    EscapeTimes {
        #[arg(long)]
        escapes: PathBuf,
        #[arg(long, default_value_t = 0.001)]
        omega: f64,
        /// Bin width in periods.
        #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
        bin_width: f64,
        #[arg(long)]
        histogram: PathBuf,
        #[arg(long)]
        scatter: Option<PathBuf>,
        /// Adds the perfect-phase model density from this rate table.
        #[arg(long)]
        rates: Option<PathBuf>,
    },
    /// The six measures from a folded-signal CSV.
    Measures {
        #[arg(long)]
        folded: PathBuf,
        /// Forcing magnitude (absolute).
        #[arg(long)]
        force: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = f64::NAN)]
        phi: f64,
    },
    /// Conditional KS test of escapes against a rate table.
    KsTest {
        #[arg(long)]
        escapes: PathBuf,
        #[arg(long)]
        rates: PathBuf,
        /// Writes `<prefix>_left.csv` and `<prefix>_right.csv` staircases.
        #[arg(long)]
        staircase: Option<PathBuf>,
    },
    /// Runs a sweep over noise levels and angles.
    Sweep {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        #[arg(long, env = OUTPUT_DIR_ENV)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        realizations: Option<usize>,
        #[arg(long)]
        periods: Option<f64>,
        /// Runs only cell `EPS_INDEX,PHI_INDEX`.
        #[arg(long, value_parser = parse_cell)]
        only_cell: Option<(usize, usize)>,
        /// Writes the resolved configuration and exits.
        #[arg(long)]
        print_config: bool,
    },
    /// Plot-ready CSVs from a sweep manifest.
    EmitPlots {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn parse_cell(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected EPS_INDEX,PHI_INDEX")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn write_table<T: Serialize>(out: Option<&Path>, rows: impl IntoIterator<Item = T>) -> Result<()> {
    match out {
        Some(p) => io::write_rows(p, rows).map(|_| ()),
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct PointRow {
    label: &'static str,
    x: f64,
    y: f64,
    value: f64,
    hessian_det: f64,
    lambda_min: f64,
}

#[derive(Serialize)]
struct ChainRow {
    t: f64,
    nu_minus: f64,
    nu_plus: f64,
    nu_minus_bar: f64,
    nu_plus_bar: f64,
}

#[derive(Serialize)]
struct HistRow {
    bin_start: f64,
    bin_end: f64,
    count: u64,
    density: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    perfect_phase_density: Option<f64>,
}

#[derive(Serialize)]
struct MeasureRow {
    phi: f64,
    epsilon: f64,
    m1: f64,
    m2: f64,
    m3: f64,
    m4: f64,
    m5: f64,
    m6: f64,
    diffusion_m1: f64,
    diffusion_m2: f64,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::CriticalPoints { model, phase, out } => {
            let params = model.params()?;
            let forcing = model.forcing()?;
            let c = critical_forcing(&params)?;
            eprintln!(
                "critical forcing: x_sad {:.7} x_crit {:.7} y_sad {:.7} y_crit {:.7} min {:.7}; using F = {:.7}",
                c.x_sad,
                c.x_crit,
                c.y_sad,
                c.y_crit,
                c.min(),
                forcing.magnitude
            );
            let set = frozen_critical_points(&params, &forcing, phase * forcing.period())?;
            write_table(
                out.as_deref(),
                set.iter().map(|(label, p)| PointRow {
                    label: label.as_str(),
                    x: p.position.x,
                    y: p.position.y,
                    value: p.value,
                    hessian_det: p.hessian_det,
                    lambda_min: p.lambda_min,
                }),
            )
        }
        Command::Rates { model, epsilon, points, out } => {
            let table = adiabatic_rate_table(&model.params()?, &model.forcing()?, epsilon, points)?;
            match out {
                Some(p) => io::write_rate_table(&p, &table).map(|_| ()),
                None => write_table(
                    None,
                    (0..table.len()).map(|j| io::RateRow {
                        t: table.phases[j],
                        phase: table.phases[j] / table.period,
                        p: table.rates_lr[j],
                        q: table.rates_rl[j],
                    }),
                ),
            }
        }
        Command::Ctmc { rates, nu0, periods, grid, out } => {
            let table = io::read_rate_table(&rates)?;
            let pair = io::rate_pair(&table)?;
            let inv = invariant_measure(&pair, grid)?;
            let start = StateProbability::new(0.0, nu0)?;
            let period = pair.period();
            let n = (periods * grid as f64).round() as usize;
            let times: Vec<f64> = (0..=n).map(|k| k as f64 * period / grid as f64).collect();
            let path = transient_path(&pair, start, &times)?;
            match relaxation_time(&pair, start) {
                Ok(t) => eprintln!("relaxation time {t:.6} ({:.6} periods)", t / period),
                Err(e) => eprintln!("relaxation time unavailable: {e}"),
            }
            write_table(
                out.as_deref(),
                path.iter().enumerate().map(|(k, s)| ChainRow {
                    t: s.t,
                    nu_minus: s.nu_minus,
                    nu_plus: s.nu_plus,
                    nu_minus_bar: inv.nu_minus_bar[k % grid],
                    nu_plus_bar: inv.nu_plus_bar[k % grid],
                }),
            )
        }
        Command::Simulate {
            model,
            epsilon,
            periods,
            t_step,
            seed,
            realization,
            stride,
            format,
            out,
            escapes,
            radius,
        } => {
            let params = model.params()?;
            let forcing = model.forcing()?;
            let mut cfg = SimConfig::new(params, forcing, epsilon);
            cfg.n_periods = periods;
            cfg.t_step = t_step;
            cfg.seed = seed;
            cfg.record_stride = stride.max(1);
            for w in cfg.warnings() {
                eprintln!("warning: {w}");
            }
            let rec = simulate(&cfg, realization, &mut ())?;
            match format {
                TrajectoryFormat::Csv => io::write_trajectory_csv(&out, &rec).map(|_| ())?,
                TrajectoryFormat::Bin => io::write_trajectory_binary(&out, &rec).map(|_| ())?,
            }
            if let Some(p) = escapes {
                let tracks = build_well_tracks(&params, &forcing, radius, DEFAULT_TRACK_POINTS)?;
                let red = reduce(rec.samples(), &tracks)?;
                let rows: Vec<io::EscapeRow> = red
                    .records
                    .iter()
                    .map(|r| io::EscapeRow { realization, well: r.well, u: r.u, t: r.t })
                    .collect();
                io::write_escapes(&p, &rows)?;
                eprintln!("{} escapes", rows.len());
            }
            Ok(())
        }
        Command::EscapeTimes { escapes, omega, bin_width, histogram, scatter: scatter_out, rates } => {
            let period = 2.0 * std::f64::consts::PI / omega;
            let records: Vec<_> = io::read_escapes(&escapes)?.iter().map(|r| r.record()).collect();
            let hist = record_histogram(&records, period, bin_width)?;
            let model = rates.map(|p| io::read_rate_table(&p).and_then(|t| EscapeModel::from_rate_table(&t))).transpose()?;
            let dens = hist.density();
            io::write_rows(
                &histogram,
                (0..hist.counts.len()).map(|i| HistRow {
                    bin_start: hist.bin_start(i),
                    bin_end: hist.bin_end(i),
                    count: hist.counts[i],
                    density: dens[i],
                    perfect_phase_density: model.as_ref().map(|m| {
                        let mid = 0.5 * (hist.bin_start(i) + hist.bin_end(i)) * period;
                        period * m.total_pdf(&EntrancePhaseModel::PerfectPhase, mid)
                    }),
                }),
            )?;
            if let Some(p) = scatter_out {
                io::write_rows(&p, scatter(&records, period))?;
            }
            Ok(())
        }
        Command::Measures { folded, force, epsilon, phi } => {
            let rows: Vec<FoldedRow> = io::read_rows(&folded)?;
            if rows.len() < 2 {
                return Err(Error::EmptyInput("folded signal"));
            }
            let period = rows.len() as f64 * (rows[1].t - rows[0].t);
            let col = |f: fn(&FoldedRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
            let m = six_measures(
                &col(|r| r.mean_chain),
                &col(|r| r.mean_out_of_phase),
                &col(|r| r.nu_minus),
                &col(|r| r.nu_plus),
                force,
                epsilon,
                period,
            )?;
            let (d1, d2) = diffusion_measures(&col(|r| r.mean_x), force, epsilon)?;
            write_table(
                None,
                [MeasureRow {
                    phi,
                    epsilon,
                    m1: m.m1,
                    m2: m.m2,
                    m3: m.m3,
                    m4: m.m4,
                    m5: m.m5,
                    m6: m.m6,
                    diffusion_m1: d1,
                    diffusion_m2: d2,
                }],
            )
        }
        Command::KsTest { escapes, rates, staircase: prefix } => {
            let records: Vec<_> = io::read_escapes(&escapes)?.iter().map(|r| r.record()).collect();
            let model = EscapeModel::from_rate_table(&io::read_rate_table(&rates)?)?;
            let mut stdout = std::io::stdout().lock();
            for well in [Well::Left, Well::Right] {
                match conditional_ks_records(&records, &model, well) {
                    Ok(k) => writeln!(
                        stdout,
                        "{well}: n = {}, S_n = {:.6}, sqrt(n) S_n = {:.4}, Q = {:.4}, accepted at 99%: {}",
                        k.n, k.statistic, k.scaled, k.q_value, k.accepted_99
                    )?,
                    Err(e) => writeln!(stdout, "{well}: {e}")?,
                }
                if let Some(prefix) = &prefix {
                    let v: Vec<f64> = records
                        .iter()
                        .filter(|r| r.well == well)
                        .map(|r| model.conditional(well, r.u).cdf(r.t))
                        .collect();
                    let mut name = prefix.as_os_str().to_owned();
                    name.push(format!("_{well}.csv"));
                    #[derive(Serialize)]
                    struct Step {
                        x: f64,
                        fraction: f64,
                    }
                    io::write_rows(Path::new(&name), staircase(&v).into_iter().map(|(x, fraction)| Step { x, fraction }))?;
                }
            }
            Ok(())
        }
        Command::Sweep { config, preset, output_dir, seed, realizations, periods, only_cell, print_config } => {
            let mut cfg = match (config, preset) {
                (Some(p), _) => SweepConfig::load(&p)?,
                (None, Some(PresetArg::Paper)) => SweepConfig::paper(),
                (None, _) => SweepConfig::desk(),
            };
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = realizations {
                cfg.n_realizations = n;
            }
            if let Some(p) = periods {
                cfg.n_periods = p;
            }
            cfg.validate()?;
            if print_config {
                print!("{}", cfg.to_toml()?);
                return Ok(());
            }
            if let Some((i, j)) = only_cell {
                if i >= cfg.epsilons.len() || j >= cfg.phis.len() {
                    return Err(Error::InvalidParams(format!("cell ({i}, {j}) is outside the sweep grid")));
                }
                std::fs::create_dir_all(&cfg.output_dir)?;
                let (entry, row) = run_cell(&cfg, i, j);
                if let Some(e) = entry.error {
                    eprintln!("cell failed: {e}");
                }
                return write_table(None, [row]);
            }
            let manifest = run_sweep(&cfg)?;
            let failed = manifest.cells.iter().filter(|c| !c.ok).count();
            eprintln!(
                "{} cells ({} failed); manifest at {}",
                manifest.cells.len(),
                failed,
                cfg.output_dir.join(Manifest::FILE_NAME).display()
            );
            Ok(())
        }
        Command::EmitPlots { manifest } => {
            let m = Manifest::load(&manifest)?;
            let root = manifest.parent().unwrap_or(Path::new("."));
            let files = emit_plots(&m, root)?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
