//! Parameter sweeps over noise level and forcing angle.
//!
//! Each `(epsilon, phi)` cell simulates an ensemble, reduces every path to
//! the two-state chain, and writes its escapes, folded signals and rate
//! table into its own directory. The summary CSV and a JSON manifest are
//! assembled afterwards in cell order, so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::escape::{record_histogram, scatter, EntrancePhaseModel, EscapeModel, DEFAULT_BIN_WIDTH};
use crate::io::{self, EscapeRow, FoldedRow};
use crate::kramers::{adiabatic_rate_table, RateTable, DEFAULT_PHASE_POINTS};
use crate::measures::{diffusion_measures, jackknife, OccupancyFolder, SixMeasures};
use crate::potential::{critical_forcing, Forcing, ModelParams, Well};
use crate::reduction::{build_well_tracks, SymbolicReducer, DEFAULT_RADIUS, DEFAULT_TRACK_POINTS};
use crate::sde::{ensemble, PhaseFolder, SimConfig, DEFAULT_T_STEP};
use crate::stats::{conditional_ks_records, staircase, KsResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const OUTPUT_DIR_ENV: &str = "STOCHRES_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Paper,
    Desk,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub preset: Preset,
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    /// Forcing magnitude as a fraction of the critical forcing.
    pub force_fraction: f64,
    pub epsilons: Vec<f64>,
    /// Forcing angles in degrees.
    pub phis: Vec<f64>,
    pub n_realizations: usize,
    pub n_periods: f64,
    pub t_step: f64,
    pub radius: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Periods dropped before folding.
    pub discard_periods: f64,
    /// Phase bins for folded signals; must be even.
    pub phase_bins: usize,
    /// Grid points for the rate tables and well tracks.
    pub rate_points: usize,
}

impl SweepConfig {
    /// 16 noise levels by 7 angles, 200 realizations of 30 periods.
    pub fn paper() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            preset: Preset::Paper,
            a: 0.15,
            b: 0.1,
            omega: 0.001,
            force_fraction: 0.7,
            epsilons: (0..16).map(|i| 0.15 + 0.01 * i as f64).collect(),
            phis: vec![0.0, 75.0, 78.0, 81.0, 84.0, 87.0, 90.0],
            n_realizations: 200,
            n_periods: 30.0,
            t_step: DEFAULT_T_STEP,
            radius: DEFAULT_RADIUS,
            seed: 1,
            output_dir: PathBuf::from("sweep-out"),
            discard_periods: 2.0,
            phase_bins: 1000,
            rate_points: DEFAULT_PHASE_POINTS,
        }
    }

    /// 4 noise levels by 3 angles, 50 realizations of 10 periods.
    pub fn desk() -> Self {
        Self {
            preset: Preset::Desk,
            epsilons: vec![0.15, 0.18, 0.21, 0.24],
            phis: vec![0.0, 84.0, 90.0],
            n_realizations: 50,
            n_periods: 10.0,
            ..Self::paper()
        }
    }

    pub fn params(&self) -> ModelParams {
        ModelParams { a: self.a, b: self.b }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidParams(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        ModelParams::new(self.a, self.b)?;
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return bad("all noise levels must be positive".into());
        }
        if self.phis.iter().any(|p| !(0.0..=90.0).contains(p)) {
            return bad("forcing angles must lie in [0, 90] degrees".into());
        }
        if !(self.force_fraction > 0.0 && self.force_fraction < 1.0) {
            return bad(format!("force_fraction must lie in (0, 1), got {}", self.force_fraction));
        }
        if self.n_realizations == 0 || !(self.n_periods > self.discard_periods) || !(self.discard_periods >= 0.0) {
            return bad("need realizations and more periods than are discarded".into());
        }
        if self.phase_bins < 2 || self.phase_bins % 2 != 0 || self.rate_points == 0 {
            return bad("phase_bins must be even and rate_points positive".into());
        }
        if !(self.omega > 0.0 && self.t_step > 0.0 && self.radius > 0.0) {
            return bad("omega, t_step and radius must be positive".into());
        }
        if i64::try_from(self.seed).is_err() {
            return bad(format!("seed must fit a signed 64-bit TOML integer, got {}", self.seed));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        self.validate()?;
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn sha256(&self) -> Result<String> {
        Ok(hex(&Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn cell(&self, eps_index: usize, phi_index: usize) -> Result<CellSpec> {
        let params = self.params();
        let magnitude = self.force_fraction * critical_forcing(&params)?.min();
        Ok(CellSpec {
            params,
            forcing: Forcing::new(magnitude, self.phis[phi_index], self.omega)?,
            epsilon: self.epsilons[eps_index],
            n_realizations: self.n_realizations,
            n_periods: self.n_periods,
            t_step: self.t_step,
            radius: self.radius,
            seed: cell_seed(self.seed, eps_index, phi_index),
            discard_periods: self.discard_periods,
            phase_bins: self.phase_bins,
            rate_points: self.rate_points,
        })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of cell `(eps_index, phi_index)`, independent of the other cells.
pub fn cell_seed(master: u64, eps_index: usize, phi_index: usize) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(((eps_index as u64) << 32) | phi_index as u64))
}

/// Everything needed to run one ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub params: ModelParams,
    pub forcing: Forcing,
    pub epsilon: f64,
    pub n_realizations: usize,
    pub n_periods: f64,
    pub t_step: f64,
    pub radius: f64,
    pub seed: u64,
    pub discard_periods: f64,
    pub phase_bins: usize,
    pub rate_points: usize,
}

impl CellSpec {
    /// Reference model parameters at `F = 0.7 F_crit`, `Omega = 0.001`, desk ensemble size.
    pub fn desk(phi: f64, epsilon: f64, seed: u64) -> Result<Self> {
        let mut cfg = SweepConfig::desk();
        cfg.phis = vec![phi];
        cfg.epsilons = vec![epsilon];
        cfg.seed = seed;
        let mut spec = cfg.cell(0, 0)?;
        spec.seed = seed;
        Ok(spec)
    }

    pub fn period(&self) -> f64 {
        self.forcing.period()
    }

    pub fn sim_config(&self) -> SimConfig {
        let mut c = SimConfig::new(self.params, self.forcing, self.epsilon);
        c.t_step = self.t_step;
        c.n_periods = self.n_periods;
        c.seed = self.seed;
        c.record_stride = 0;
        c
    }
}

/// In-memory results of one cell.
#[derive(Clone, Debug)]
pub struct CellData {
    pub spec: CellSpec,
    pub escapes: Vec<EscapeRow>,
    /// Folded diffusion path over all realizations.
    pub path_fold: PhaseFolder,
    /// Folded chain occupancy, one per realization.
    pub occupancy: Vec<OccupancyFolder>,
    pub rates: RateTable,
}

/// Simulates and reduces one cell.
pub fn simulate_cell(spec: &CellSpec) -> Result<CellData> {
    let period = spec.period();
    let discard = spec.discard_periods * period;
    let tracks = build_well_tracks(&spec.params, &spec.forcing, spec.radius, DEFAULT_TRACK_POINTS.max(spec.rate_points))?;
    let rates = adiabatic_rate_table(&spec.params, &spec.forcing, spec.epsilon, spec.rate_points)?;
    let parts = ensemble(&spec.sim_config(), spec.n_realizations, |_| {
        (PhaseFolder::new(period, spec.phase_bins, discard), SymbolicReducer::new(&tracks))
    })?;

    let mut path_fold = PhaseFolder::new(period, spec.phase_bins, discard);
    let mut occupancy = Vec::with_capacity(parts.len());
    let mut escapes = Vec::new();
    for (i, (fold, reducer)) in parts.into_iter().enumerate() {
        crate::sde::Merge::merge(&mut path_fold, fold);
        let red = reducer.finish_or_empty();
        let mut occ = OccupancyFolder::new(period, spec.phase_bins, discard)?;
        occ.add_path(&red.path);
        occupancy.push(occ);
        escapes.extend(red.records.iter().map(|r| EscapeRow { realization: i as u64, well: r.well, u: r.u, t: r.t }));
    }
    Ok(CellData { spec: *spec, escapes, path_fold, occupancy, rates })
}

impl CellData {
    pub fn period(&self) -> f64 {
        self.spec.period()
    }

    pub fn merged_occupancy(&self) -> OccupancyFolder {
        let mut it = self.occupancy.iter().cloned();
        let mut acc = it.next().expect("at least one realization");
        for o in it {
            crate::sde::Merge::merge(&mut acc, o);
        }
        acc
    }

    pub fn measures(&self) -> Result<SixMeasures> {
        self.merged_occupancy().six_measures(self.spec.forcing.magnitude, self.spec.epsilon)
    }

    /// Jackknife standard errors of M1 and M3 over realizations.
    pub fn measure_errors(&self) -> Result<(f64, f64)> {
        let f = self.spec.forcing.magnitude;
        let eps = self.spec.epsilon;
        let (_, se1) = jackknife(&self.occupancy, |o| o.six_measures(f, eps).map(|m| m.m1).unwrap_or(f64::NAN))?;
        let (_, se3) = jackknife(&self.occupancy, |o| o.six_measures(f, eps).map(|m| m.m3).unwrap_or(f64::NAN))?;
        Ok((se1, se3))
    }

    pub fn diffusion_measures(&self) -> Result<(f64, f64)> {
        diffusion_measures(&self.path_fold.mean_x(), self.spec.forcing.magnitude, self.spec.epsilon)
    }

    pub fn escape_model(&self) -> Result<EscapeModel> {
        EscapeModel::from_rate_table(&self.rates)
    }

    pub fn records(&self, well: Option<Well>) -> Vec<crate::reduction::EscapeRecord> {
        self.escapes.iter().filter(|r| well.is_none_or(|w| r.well == w)).map(|r| r.record()).collect()
    }

    pub fn ks(&self, well: Well) -> Result<KsResult> {
        conditional_ks_records(&self.records(None), &self.escape_model()?, well)
    }

    /// Escape durations modulo the period, as fractions of it.
    pub fn duration_phases(&self, well: Option<Well>) -> Vec<f64> {
        let period = self.period();
        self.records(well).iter().map(|r| r.phase_escape(period)).collect()
    }

    pub fn folded_rows(&self) -> Vec<FoldedRow> {
        let occ = self.merged_occupancy();
        let chain = occ.mean_y().values;
        let oop = occ.out_of_phase().values;
        let (nu_m, nu_p) = occ.invariant_measure();
        let mx = self.path_fold.mean_x();
        let my = self.path_fold.mean_y();
        let h = self.period() / self.spec.phase_bins as f64;
        (0..self.spec.phase_bins)
            .map(|j| FoldedRow {
                t: j as f64 * h,
                mean_x: mx[j],
                mean_y: my[j],
                mean_chain: chain[j],
                mean_out_of_phase: oop[j],
                nu_minus: nu_m[j],
                nu_plus: nu_p[j],
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub phi: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub status: String,
    pub n_left: usize,
    pub n_right: usize,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub m5: f64,
    pub m6: f64,
    pub m1_se: f64,
    pub m3_se: f64,
    pub diffusion_m1: f64,
    pub diffusion_m2: f64,
    pub ks_left_scaled: f64,
    pub ks_left_q: f64,
    pub ks_left_accepted: bool,
    pub ks_right_scaled: f64,
    pub ks_right_q: f64,
    pub ks_right_accepted: bool,
}

impl SummaryRow {
    fn failed(spec_phi: f64, eps: f64, seed: u64, msg: String) -> Self {
        let nan = f64::NAN;
        Self {
            phi: spec_phi,
            epsilon: eps,
            seed,
            status: format!("error: {msg}"),
            n_left: 0,
            n_right: 0,
            m1: nan,
            m2: nan,
            m3: nan,
            m4: nan,
            m5: nan,
            m6: nan,
            m1_se: nan,
            m3_se: nan,
            diffusion_m1: nan,
            diffusion_m2: nan,
            ks_left_scaled: nan,
            ks_left_q: nan,
            ks_left_accepted: false,
            ks_right_scaled: nan,
            ks_right_q: nan,
            ks_right_accepted: false,
        }
    }

    pub fn from_cell(data: &CellData) -> Self {
        let spec = &data.spec;
        let mut row = Self::failed(spec.forcing.angle_deg, spec.epsilon, spec.seed, String::new());
        row.status = "ok".into();
        row.n_left = data.escapes.iter().filter(|r| r.well == Well::Left).count();
        row.n_right = data.escapes.len() - row.n_left;
        let mut problems = Vec::new();
        match data.measures() {
            Ok(m) => [row.m1, row.m2, row.m3, row.m4, row.m5, row.m6] = m.as_array(),
            Err(e) => problems.push(e.to_string()),
        }
        if let Ok((a, b)) = data.measure_errors() {
            (row.m1_se, row.m3_se) = (a, b);
        }
        if let Ok((a, b)) = data.diffusion_measures() {
            (row.diffusion_m1, row.diffusion_m2) = (a, b);
        }
        if let Ok(k) = data.ks(Well::Left) {
            (row.ks_left_scaled, row.ks_left_q, row.ks_left_accepted) = (k.scaled, k.q_value, k.accepted_99);
        }
        if let Ok(k) = data.ks(Well::Right) {
            (row.ks_right_scaled, row.ks_right_q, row.ks_right_accepted) = (k.scaled, k.q_value, k.accepted_99);
        }
        if !problems.is_empty() {
            row.status = format!("partial: {}", problems.join("; "));
        }
        row
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub kind: String,
    /// Relative to the output directory.
    pub path: PathBuf,
    pub rows: usize,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellEntry {
    pub eps_index: usize,
    pub phi_index: usize,
    pub epsilon: f64,
    pub phi: f64,
    pub seed: u64,
    pub ok: bool,
    pub error: Option<String>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub config_sha256: String,
    pub master_seed: u64,
    pub config: SweepConfig,
    pub summary: Option<Artifact>,
    pub cells: Vec<CellEntry>,
}

impl Manifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn artifacts(&self) -> impl Iterator<Item = &Artifact> {
        self.summary.iter().chain(self.cells.iter().flat_map(|c| c.artifacts.iter()))
    }
}

fn artifact(root: &Path, rel: PathBuf, kind: &str, rows: usize) -> Result<Artifact> {
    let bytes = fs::metadata(root.join(&rel))?.len();
    Ok(Artifact { kind: kind.into(), path: rel, rows, bytes })
}

pub fn cell_dir(eps_index: usize, phi_index: usize) -> PathBuf {
    PathBuf::from("cells").join(format!("e{eps_index:02}_p{phi_index:02}"))
}

fn write_cell(root: &Path, eps_index: usize, phi_index: usize, data: &CellData) -> Result<Vec<Artifact>> {
    let rel = cell_dir(eps_index, phi_index);
    fs::create_dir_all(root.join(&rel))?;
    let mut out = Vec::new();
    let p = rel.join("escapes.csv");
    let n = io::write_escapes(&root.join(&p), &data.escapes)?;
    out.push(artifact(root, p, "escapes", n)?);
    let p = rel.join("folded.csv");
    let n = io::write_rows(&root.join(&p), data.folded_rows())?;
    out.push(artifact(root, p, "folded", n)?);
    let p = rel.join("rates.csv");
    let n = io::write_rate_table(&root.join(&p), &data.rates)?;
    out.push(artifact(root, p, "rates", n)?);
    Ok(out)
}

/// Runs one cell and writes its files; the summary is not touched.
pub fn run_cell(config: &SweepConfig, eps_index: usize, phi_index: usize) -> (CellEntry, SummaryRow) {
    let root = &config.output_dir;
    let eps = config.epsilons[eps_index];
    let phi = config.phis[phi_index];
    let seed = cell_seed(config.seed, eps_index, phi_index);
    let result = config
        .cell(eps_index, phi_index)
        .and_then(|spec| simulate_cell(&spec))
        .and_then(|data| Ok((write_cell(root, eps_index, phi_index, &data)?, SummaryRow::from_cell(&data))));
    let mut entry = CellEntry { eps_index, phi_index, epsilon: eps, phi, seed, ok: true, error: None, artifacts: vec![] };
    match result {
        Ok((artifacts, row)) => {
            entry.artifacts = artifacts;
            (entry, row)
        }
        Err(e) => {
            entry.ok = false;
            entry.error = Some(e.to_string());
            (entry, SummaryRow::failed(phi, eps, seed, e.to_string()))
        }
    }
}

/// Runs every cell, then writes `summary.csv`, `config.toml` and the manifest.
pub fn run_sweep(config: &SweepConfig) -> Result<Manifest> {
    config.validate()?;
    let root = &config.output_dir;
    fs::create_dir_all(root)?;
    let cells: Vec<(usize, usize)> =
        (0..config.epsilons.len()).flat_map(|i| (0..config.phis.len()).map(move |j| (i, j))).collect();
    let results: Vec<(CellEntry, SummaryRow)> = cells.par_iter().map(|&(i, j)| run_cell(config, i, j)).collect();
    let (entries, rows): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    fs::write(root.join("config.toml"), config.to_toml()?)?;
    let n = io::write_rows(&root.join("summary.csv"), &rows)?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        config_sha256: config.sha256()?,
        master_seed: config.seed,
        config: config.clone(),
        summary: Some(artifact(root, PathBuf::from("summary.csv"), "summary", n)?),
        cells: entries,
    };
    manifest.save(&root.join(Manifest::FILE_NAME))?;
    Ok(manifest)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct HistogramRow {
    bin_start: f64,
    bin_end: f64,
    count: u64,
    density: f64,
    perfect_phase_density: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct StairRow {
    x: f64,
    fraction: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct MeasureCurveRow {
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

/// Writes plot-ready CSVs under `<output_dir>/plots` and returns their paths.
pub fn emit_plots(manifest: &Manifest, root: &Path) -> Result<Vec<PathBuf>> {
    for a in manifest.artifacts() {
        let p = root.join(&a.path);
        if !p.is_file() {
            return Err(Error::MissingArtifact(p));
        }
    }
    let mut files = Vec::new();
    if manifest.cells.is_empty() {
        return Ok(files);
    }
    let plots = root.join("plots");
    fs::create_dir_all(&plots)?;

    if let Some(summary) = &manifest.summary {
        let rows: Vec<SummaryRow> = io::read_rows(&root.join(&summary.path))?;
        for (j, phi) in manifest.config.phis.iter().enumerate() {
            let curve = rows.iter().filter(|r| r.phi == *phi && !r.status.starts_with("error")).map(|r| {
                MeasureCurveRow {
                    epsilon: r.epsilon,
                    m1: r.m1,
                    m2: r.m2,
                    m3: r.m3,
                    m4: r.m4,
                    m5: r.m5,
                    m6: r.m6,
                    diffusion_m1: r.diffusion_m1,
                    diffusion_m2: r.diffusion_m2,
                }
            });
            let p = plots.join(format!("measures_p{j:02}.csv"));
            io::write_rows(&p, curve)?;
            files.push(p);
        }
    }

    for cell in manifest.cells.iter().filter(|c| c.ok) {
        let find = |kind: &str| {
            cell.artifacts
                .iter()
                .find(|a| a.kind == kind)
                .map(|a| root.join(&a.path))
                .ok_or_else(|| Error::MissingArtifact(root.join(cell_dir(cell.eps_index, cell.phi_index)).join(kind)))
        };
        let escapes = io::read_escapes(&find("escapes")?)?;
        let rates = io::read_rate_table(&find("rates")?)?;
        let period = rates.period;
        let model = EscapeModel::from_rate_table(&rates)?;
        let records: Vec<_> = escapes.iter().map(|r| r.record()).collect();
        let tag = format!("e{:02}_p{:02}", cell.eps_index, cell.phi_index);
        if records.is_empty() {
            continue;
        }

        let hist = record_histogram(&records, period, DEFAULT_BIN_WIDTH)?;
        let dens = hist.density();
        let p = plots.join(format!("histogram_{tag}.csv"));
        io::write_rows(
            &p,
            (0..hist.counts.len()).map(|i| {
                let mid = 0.5 * (hist.bin_start(i) + hist.bin_end(i)) * period;
                HistogramRow {
                    bin_start: hist.bin_start(i),
                    bin_end: hist.bin_end(i),
                    count: hist.counts[i],
                    density: dens[i],
                    perfect_phase_density: period * model.total_pdf(&EntrancePhaseModel::PerfectPhase, mid),
                }
            }),
        )?;
        files.push(p);

        let p = plots.join(format!("scatter_{tag}.csv"));
        io::write_rows(&p, scatter(&records, period))?;
        files.push(p);

        for well in [Well::Left, Well::Right] {
            let v: Vec<f64> = records
                .iter()
                .filter(|r| r.well == well)
                .map(|r| model.conditional(well, r.u).cdf(r.t))
                .collect();
            let p = plots.join(format!("ks_{tag}_{well}.csv"));
            io::write_rows(&p, staircase(&v).into_iter().map(|(x, fraction)| StairRow { x, fraction }))?;
            files.push(p);
        }
    }
    Ok(files)
}
