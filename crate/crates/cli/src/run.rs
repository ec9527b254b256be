//! Scenario evaluation and CSV output.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use onebit_mcrb::{
    ambiguity_function, cost_fine, cost_quantized, maf, mcrb, measure_ops, moment_matrices,
    monte_carlo_with, oversampled_ratio, pseudo_true, quantized_crb, signal, Error,
    GridEstimator, McConfig, NoiseModel, NoiseSampler, OrthantConfig, SearchConfig, SteeringModel,
    Theta,
};
use rayon::prelude::*;

use crate::error::CliError;
use crate::scenario::{Axis, ModelConfig, NoiseKindConfig, Output, Scenario, SnrReference};
use crate::table::{cell_text, fmt_num, Table};

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub grid: Option<usize>,
    pub qmc_points: Option<usize>,
    pub fast_orthant: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl RunOptions {
    pub fn apply(&self, scenario: &Scenario) -> Scenario {
        let mut s = scenario.clone();
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(trials) = self.trials {
            s.trials = trials;
        }
        if let Some(grid) = self.grid {
            s.search.grid = grid;
        }
        if let Some(points) = self.qmc_points {
            s.orthant.points = points;
        }
        if self.fast_orthant {
            s.orthant.factorized = true;
        }
        s
    }
}

/// One output file, in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    pub name: String,
    pub table: Table,
}

struct Setup {
    u: f64,
    model: SteeringModel,
    noise: NoiseModel,
    estimator: Option<GridEstimator>,
    sampler: Option<NoiseSampler>,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    setup: usize,
    phi_in: f64,
    snr_db: f64,
    phase_deg: f64,
}

struct Sweep {
    phi: Vec<f64>,
    snr: Vec<f64>,
    phase: Vec<f64>,
    u: Vec<f64>,
}

fn build_setups(s: &Scenario, us: &[f64], need_estimator: bool, need_sampler: bool) -> Result<Vec<Setup>, CliError> {
    let search = SearchConfig::new(s.search.grid, s.search.tolerance)?;
    us.iter()
        .map(|&u| {
            let (model, noise) = match &s.model {
                ModelConfig::Ula { sensors } => (SteeringModel::ula(*sensors)?, NoiseModel::white(s.noise.variance)?),
                ModelConfig::Tone { observation_s, base_rate_hz, max_frequency_hz } => {
                    let rate = base_rate_hz * u;
                    let model = SteeringModel::tone(*observation_s, rate, *max_frequency_hz)?;
                    let noise = match s.noise.kind {
                        NoiseKindConfig::White => NoiseModel::white(s.noise.variance)?,
                        NoiseKindConfig::Sinc => {
                            let b = s.noise.bandwidth_hz.unwrap_or(base_rate_hz / 2.0);
                            NoiseModel::sinc(s.noise.variance, b, rate)?
                        }
                    };
                    (model, noise)
                }
            };
            let estimator = if need_estimator { Some(GridEstimator::new(&model, &search)?) } else { None };
            let sampler = if need_sampler { Some(NoiseSampler::new(&noise, model.len())?) } else { None };
            Ok(Setup { u, model, noise, estimator, sampler })
        })
        .collect()
}

impl Scenario {
    fn phi_column(&self) -> &'static str {
        match (&self.model, self.sweep.axis) {
            (ModelConfig::Ula { .. }, Axis::Native) => "doa_deg",
            (ModelConfig::Ula { .. }, Axis::U) => "u",
            (ModelConfig::Tone { .. }, _) => "freq_hz",
        }
    }

    fn phi_prime_column(&self) -> &'static str {
        match (&self.model, self.sweep.axis) {
            (ModelConfig::Ula { .. }, Axis::Native) => "doa_prime_deg",
            (ModelConfig::Ula { .. }, Axis::U) => "u_prime",
            (ModelConfig::Tone { .. }, _) => "freq_prime_hz",
        }
    }

    // Sweep value (degrees, u or Hz) to model parameter (radians or Hz).
    fn to_phi(&self, v: f64) -> f64 {
        match (&self.model, self.sweep.axis) {
            (ModelConfig::Ula { .. }, Axis::Native) => v.to_radians(),
            (ModelConfig::Ula { .. }, Axis::U) => v.asin(),
            (ModelConfig::Tone { .. }, _) => v,
        }
    }

    // Error unit: degrees for the array, hertz for the tone.
    fn error_scale(&self) -> f64 {
        if self.is_ula() {
            180.0 / PI
        } else {
            1.0
        }
    }

    fn error_unit(&self) -> &'static str {
        if self.is_ula() {
            "deg"
        } else {
            "hz"
        }
    }

    fn theta(&self, setup: &Setup, p: &Point) -> Theta {
        let mut power = self.noise.variance * 10f64.powf(p.snr_db / 10.0);
        if self.sweep.snr_reference == SnrReference::PerSample {
            power *= setup.model.len() as f64;
        }
        Theta::from_polar(self.to_phi(p.phi_in), power.sqrt(), p.phase_deg.to_radians())
    }

    fn expand(&self) -> Result<Sweep, CliError> {
        Ok(Sweep {
            phi: self.sweep.phi.expand("sweep.phi")?,
            snr: self.sweep.snr_db.expand("sweep.snr_db")?,
            phase: self.sweep.angle_beta_deg.expand("sweep.angle_beta_deg")?,
            u: self.sweep.oversampling.expand("sweep.oversampling")?,
        })
    }
}

// Sweep columns that vary, in the fixed order φ, SNR, ∠β, U.
fn sweep_columns(s: &Scenario, sw: &Sweep, force_phi: bool) -> Vec<(&'static str, usize)> {
    let mut cols = Vec::new();
    if force_phi || sw.phi.len() > 1 {
        cols.push((s.phi_column(), 0));
    }
    if sw.snr.len() > 1 {
        cols.push(("snr_db", 1));
    }
    if sw.phase.len() > 1 {
        cols.push(("angle_beta_deg", 2));
    }
    if sw.u.len() > 1 {
        cols.push(("U", 3));
    }
    cols
}

fn sweep_cells(cols: &[(&str, usize)], p: &Point, setups: &[Setup]) -> Vec<String> {
    cols.iter()
        .map(|&(_, k)| {
            fmt_num(match k {
                0 => p.phi_in,
                1 => p.snr_db,
                2 => p.phase_deg,
                _ => setups[p.setup].u,
            })
        })
        .collect()
}

fn points(sw: &Sweep) -> Vec<Point> {
    let mut out = Vec::new();
    for setup in 0..sw.u.len() {
        for &snr_db in &sw.snr {
            for &phase_deg in &sw.phase {
                for &phi_in in &sw.phi {
                    out.push(Point { setup, phi_in, snr_db, phase_deg });
                }
            }
        }
    }
    out
}

fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

#[derive(Default)]
struct Metrics {
    values: Vec<f64>,
    status: Option<String>,
}

impl Metrics {
    fn record(&mut self, r: Result<Vec<f64>, Error>, width: usize) {
        match r {
            Ok(v) => self.values.extend(v),
            Err(e) => {
                self.values.extend(std::iter::repeat_n(f64::NAN, width));
                self.status.get_or_insert_with(|| cell_text(&e.to_string()));
            }
        }
    }
}

fn has(s: &Scenario, o: Output) -> bool {
    s.outputs.contains(&o)
}

fn metric_header(s: &Scenario) -> Vec<String> {
    let unit = s.error_unit();
    let mut h = Vec::new();
    if has(s, Output::McRmse) {
        h.extend(["rmse_mml".to_string(), "rmse_mml_se".to_string()]);
    }
    if has(s, Output::McRmseFine) {
        h.extend(["rmse_ml".to_string(), "rmse_ml_se".to_string()]);
    }
    if has(s, Output::Bias) {
        h.push(format!("abs_bias_{unit}"));
    }
    if has(s, Output::Mcrb) {
        h.push("sqrt_mcrb".to_string());
    }
    if has(s, Output::MseBound) {
        h.push("sqrt_mse_bound".to_string());
    }
    if has(s, Output::Crb) {
        h.push("sqrt_crb".to_string());
    }
    h
}

fn compute_point(s: &Scenario, setups: &[Setup], p: &Point, index: usize, serial: bool) -> Metrics {
    let setup = &setups[p.setup];
    let theta = s.theta(setup, p);
    let scale = s.error_scale();
    let search = SearchConfig { grid_size: s.search.grid, refine_tolerance: s.search.tolerance };
    let mut m = Metrics::default();

    for (output, quantized) in [(Output::McRmse, true), (Output::McRmseFine, false)] {
        if has(s, output) {
            let cfg = McConfig { trials: s.trials, quantized, seed: point_seed(s.seed, index), parallel: !serial };
            let r = signal(&setup.model, &theta).and_then(|sig| {
                monte_carlo_with(
                    setup.estimator.as_ref().expect("estimator built"),
                    setup.sampler.as_ref().expect("sampler built"),
                    &sig,
                    theta.phi,
                    &cfg,
                )
            });
            m.record(r.map(|r| vec![r.rmse * scale, r.rmse_std_error * scale]), 2);
        }
    }

    let want_bias = has(s, Output::Bias);
    let want_mcrb = has(s, Output::Mcrb) || has(s, Output::MseBound);
    if want_bias || want_mcrb {
        let theta0 = pseudo_true(&setup.model, &theta, &setup.noise, &search);
        let bias = theta0.as_ref().map(|t0| t0.phi - theta.phi).map_err(Clone::clone);
        if want_bias {
            m.record(bias.clone().map(|b| vec![b.abs() * scale]), 1);
        }
        if want_mcrb {
            let orthant = if s.orthant.factorized {
                OrthantConfig::factorized()
            } else {
                OrthantConfig::default().with_points(s.orthant.points)
            };
            let r = theta0.and_then(|t0| {
                let moments = moment_matrices(&setup.model, &theta, &setup.noise, &orthant)?;
                let (_, v) = mcrb(&setup.model, &moments, &t0, setup.noise.variance())?;
                Ok((v, t0.phi - theta.phi))
            });
            let mut cells = Vec::new();
            if has(s, Output::Mcrb) {
                cells.push(r.as_ref().map(|(v, _)| v.sqrt() * scale).map_err(Clone::clone));
            }
            if has(s, Output::MseBound) {
                cells.push(r.as_ref().map(|(v, b)| (v + b * b).sqrt() * scale).map_err(Clone::clone));
            }
            for c in cells {
                m.record(c.map(|v| vec![v]), 1);
            }
        }
    }

    if has(s, Output::Crb) {
        let r = match quantized_crb(&setup.model, &theta, &setup.noise) {
            Err(Error::Singular(_)) => Ok(f64::INFINITY),
            r => r,
        };
        m.record(r.map(|v| vec![v.sqrt() * scale]), 1);
    }
    m
}

fn point_table(s: &Scenario, sw: &Sweep, setups: &[Setup], serial: bool) -> Table {
    let cols = sweep_columns(s, sw, false);
    let mut header: Vec<String> = cols.iter().map(|(n, _)| n.to_string()).collect();
    header.extend(metric_header(s));
    header.push("status".into());
    let pts = points(sw);
    let work = |(i, p): (usize, &Point)| compute_point(s, setups, p, i, serial);
    let results: Vec<Metrics> = if serial {
        pts.iter().enumerate().map(work).collect()
    } else {
        pts.par_iter().enumerate().map(work).collect()
    };
    let mut table = Table::new(header);
    for (p, m) in pts.iter().zip(results) {
        let mut row = sweep_cells(&cols, p, setups);
        row.extend(m.values.iter().map(|&v| fmt_num(v)));
        row.push(m.status.unwrap_or_else(|| "ok".into()));
        table.push(row);
    }
    table
}

// φ′ axis of ambiguity surfaces, in sweep units and in model units.
fn surface_axis(s: &Scenario, model: &SteeringModel) -> Vec<(f64, f64)> {
    let n = s.sweep.surface_points;
    match (&s.model, s.sweep.axis) {
        (ModelConfig::Ula { .. }, Axis::U) => (0..n)
            .map(|k| {
                let u = -1.0 + (k as f64 + 0.5) * 2.0 / n as f64;
                (u, u.asin())
            })
            .collect(),
        (ModelConfig::Ula { .. }, Axis::Native) => model.grid(n).into_iter().map(|p| (p.to_degrees(), p)).collect(),
        (ModelConfig::Tone { .. }, _) => model.grid(n).into_iter().map(|p| (p, p)).collect(),
    }
}

fn surface_table(s: &Scenario, sw: &Sweep, setups: &[Setup], quantized: bool, serial: bool) -> Table {
    let cols = sweep_columns(s, sw, true);
    let mut header: Vec<String> = cols.iter().map(|(n, _)| n.to_string()).collect();
    header.push(s.phi_prime_column().into());
    header.push(if quantized { "abs_maf" } else { "abs_af" }.into());
    header.push("status".into());
    let pts = points(sw);
    let work = |p: &Point| -> Vec<Vec<String>> {
        let setup = &setups[p.setup];
        let axis = surface_axis(s, &setup.model);
        let grid: Vec<f64> = axis.iter().map(|a| a.1).collect();
        let theta = s.theta(setup, p);
        let values = if quantized {
            maf(&setup.model, &theta, &setup.noise, &grid)
        } else {
            ambiguity_function(&setup.model, theta.phi, &grid)
        };
        let prefix = sweep_cells(&cols, p, setups);
        axis.iter()
            .enumerate()
            .map(|(k, (shown, _))| {
                let mut row = prefix.clone();
                row.push(fmt_num(*shown));
                match &values {
                    Ok(v) => {
                        row.push(fmt_num(v[k].norm()));
                        row.push("ok".into());
                    }
                    Err(e) => {
                        row.push("nan".into());
                        row.push(cell_text(&e.to_string()));
                    }
                }
                row
            })
            .collect()
    };
    let blocks: Vec<Vec<Vec<String>>> =
        if serial { pts.iter().map(work).collect() } else { pts.par_iter().map(work).collect() };
    let mut table = Table::new(header);
    for row in blocks.into_iter().flatten() {
        table.push(row);
    }
    table
}

fn scenario_complexity(s: &Scenario, setups: &[Setup]) -> Result<Table, CliError> {
    let search = SearchConfig::new(s.search.grid, s.search.tolerance)?;
    let base_n = setups[0].model.len();
    let mut t = Table::new(
        ["U", "N", "K", "cost_quantized", "cost_fine", "measured_quantized", "measured_fine", "ratio", "oversampled_ratio"]
            .map(String::from)
            .to_vec(),
    );
    for setup in setups {
        let n = setup.model.len();
        let k = search.grid_size;
        let (mq, mf) = measure_ops(&setup.model, &search)?;
        let (cq, cf) = (cost_quantized(n, k).real_ops, cost_fine(n, k).real_ops);
        t.push(vec![
            fmt_num(setup.u),
            n.to_string(),
            k.to_string(),
            cq.to_string(),
            cf.to_string(),
            mq.to_string(),
            mf.to_string(),
            fmt_num(cq as f64 / cf as f64),
            fmt_num(oversampled_ratio(base_n, k, setup.u)),
        ]);
    }
    Ok(t)
}

/// Evaluates a scenario into CSV tables. Output names are
/// `<name>.csv` for per-point metrics, `<name>_af.csv`, `<name>_maf.csv`
/// and `<name>_complexity.csv`.
pub fn render(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<CsvFile>, CliError> {
    let s = opts.apply(scenario);
    s.validate()?;
    let go = || render_validated(&s, opts.threads == Some(1));
    match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config("threads", &e.to_string()))?
            .install(go),
        None => go(),
    }
}

fn render_validated(s: &Scenario, serial: bool) -> Result<Vec<CsvFile>, CliError> {
    let sw = s.expand()?;
    let need_mc = has(s, Output::McRmse) || has(s, Output::McRmseFine);
    let setups = build_setups(s, &sw.u, need_mc, need_mc)?;
    let mut files = Vec::new();
    let point_outputs = [Output::McRmse, Output::McRmseFine, Output::Bias, Output::Mcrb, Output::MseBound, Output::Crb];
    if point_outputs.iter().any(|&o| has(s, o)) {
        files.push(CsvFile { name: format!("{}.csv", s.name), table: point_table(s, &sw, &setups, serial) });
    }
    if has(s, Output::Af) {
        files.push(CsvFile { name: format!("{}_af.csv", s.name), table: surface_table(s, &sw, &setups, false, serial) });
    }
    if has(s, Output::Maf) {
        files.push(CsvFile { name: format!("{}_maf.csv", s.name), table: surface_table(s, &sw, &setups, true, serial) });
    }
    if has(s, Output::Complexity) {
        files.push(CsvFile { name: format!("{}_complexity.csv", s.name), table: scenario_complexity(s, &setups)? });
    }
    Ok(files)
}

/// Writes the CSV files of [`render`] into `out_dir`.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let files = render(scenario, opts)?;
    write_files(&files, out_dir)
}

/// Parses, validates and runs a scenario file.
pub fn run_scenario_file(path: &Path, opts: &RunOptions, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let text = fs::read_to_string(path)?;
    run_scenario(&Scenario::from_toml(&text)?, opts, out_dir)
}

pub fn write_files(files: &[CsvFile], out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out_dir)?;
    files
        .iter()
        .map(|f| {
            let path = out_dir.join(&f.name);
            fs::write(&path, f.table.to_csv())?;
            Ok(path)
        })
        .collect()
}

/// Operation-count table for `N ∈ {1, 4, 16, 64, 256, 1024}` and
/// `U ∈ {1, 2, 4}`. Measured counts run both kernels on one grid point of an
/// `N`-sensor array and scale by `K`.
pub fn complexity_table(grid: usize) -> Result<Table, CliError> {
    let mut t = Table::new(
        ["N", "K", "cost_quantized", "cost_fine", "lookup_table", "measured_quantized", "measured_fine", "ratio", "ratio_u2", "ratio_u4"]
            .map(String::from)
            .to_vec(),
    );
    let one = SearchConfig::new(2, 1e-8)?;
    for n in [1usize, 4, 16, 64, 256, 1024] {
        let (mq, mf) = measure_ops(&SteeringModel::ula(n)?, &one)?;
        let (mq, mf) = (mq / 2 * grid as u64, mf / 2 * grid as u64);
        let (cq, cf) = (cost_quantized(n, grid).real_ops, cost_fine(n, grid).real_ops);
        t.push(vec![
            n.to_string(),
            grid.to_string(),
            cq.to_string(),
            cf.to_string(),
            onebit_mcrb::lookup_table_cost(n, grid).to_string(),
            mq.to_string(),
            mf.to_string(),
            fmt_num(cq as f64 / cf as f64),
            fmt_num(oversampled_ratio(n, grid, 2.0)),
            fmt_num(oversampled_ratio(n, grid, 4.0)),
        ]);
    }
    Ok(t)
}
