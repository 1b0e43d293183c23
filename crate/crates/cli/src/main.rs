use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sotm::metrics::{slice_quantization_error, slice_topographic_error};
use sotm::toygen::read_groups_csv;
use sotm::viz::{render_report, trajectories, RenderOptions, VizBundle};
use sotm::{
    default_preset, generate_toy, quality, sigma_sweep, standardize, train_pooled_baseline,
    train_sotm, MissingPolicy, Model, Panel, SotmError, TrainConfig,
};

mod sigmas;

use sigmas::SigmaList;

#[derive(Parser)]
#[command(name = "sotm", version, about = "Self-Organizing Time Map toolkit")]
struct Cli {
    /// Directory for outputs when no explicit path is given.
    #[arg(long, global = true, env = "SOTM_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the synthetic panel (toy.csv) and its group sidecar (groups.csv).
    Toygen {
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a time map: writes model.json and quality.csv.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        sigma: f64,
    },
    /// Train one map per radius and tabulate the aggregate measures (sweep.csv).
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// `start:stop:step` (inclusive) or a comma-separated list.
        #[arg(long)]
        sigmas: SigmaList,
    },
    /// Measure a saved model on a panel: quality.csv and quality.json.
    Quality {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Write the SVG/JSON report into <out-dir>/report (or --report-dir).
    Render {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Entities whose trajectories are drawn.
        #[arg(long, value_delimiter = ',')]
        entities: Vec<String>,
        /// `entity,group` file used to colour trajectories.
        #[arg(long)]
        groups: Option<PathBuf>,
        /// Variable whose feature plane is drawn under the trajectories.
        #[arg(long)]
        underlay: Option<String>,
        #[arg(long)]
        report_dir: Option<PathBuf>,
    },
    /// Compare a pooled (time-ignoring) SOM with the time map: baseline.csv and baseline-units.csv.
    Baseline {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        sigma: f64,
    },
    /// BMU sequences of entities (all when none are given): trajectories.csv.
    Project {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',')]
        entities: Vec<String>,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Panel CSV with columns `entity,time,<variables...>`.
    #[arg(long)]
    input: PathBuf,
    /// Fill missing cells with the variable mean instead of rejecting them.
    #[arg(long)]
    impute_mean: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 5)]
    units: usize,
    #[arg(long, default_value_t = 100)]
    first_max_cycles: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 10)]
    cycles: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TrainArgs {
    fn config(&self, sigma: f64) -> TrainConfig {
        TrainConfig {
            units: self.units,
            sigma,
            first_slice_max_cycles: self.first_max_cycles,
            first_slice_tol: self.tol,
            cycles_per_slice: self.cycles,
            seed: self.seed,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Data(String),
    Io(String),
}

impl From<SotmError> for Failure {
    fn from(e: SotmError) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            Failure::Io(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

type Res<T> = Result<T, Failure>;

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Res<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Res<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|()| w.flush())
        .map_err(|e| io_err(path, e))
}

fn read_panel(d: &DataArgs) -> Res<Panel> {
    let policy = if d.impute_mean {
        MissingPolicy::ImputeMean
    } else {
        MissingPolicy::Reject
    };
    Ok(Panel::read_csv_path(&d.input, policy)?)
}

/// Raw panel standardized with the model's own scaler.
fn model_panel(model: &Model, d: &DataArgs) -> Res<Panel> {
    let raw = read_panel(d)?;
    if raw.variables() != model.variables() {
        return Err(Failure::Data(format!(
            "panel variables {:?} differ from the model's {:?}",
            raw.variables(),
            model.variables()
        )));
    }
    Ok(model.scaler().apply(&raw)?)
}

fn write_quality(model: &Model, z: &Panel, dir: &Path, json: bool) -> Res<()> {
    let report = quality(model, z)?;
    let path = dir.join("quality.csv");
    let mut w = create(&path)?;
    report.write_csv(&mut w, model.times())?;
    w.flush().map_err(|e| io_err(&path, e))?;
    if json {
        let text =
            serde_json::to_string_pretty(&report).map_err(|e| Failure::Data(e.to_string()))?;
        write_text(&dir.join("quality.json"), &(text + "\n"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Res<()> {
    let out = &cli.out_dir;
    match cli.cmd {
        Cmd::Toygen { seed } => {
            let mut w = default_preset();
            if let Some(s) = seed {
                w.seed = s;
            }
            let toy = generate_toy::<f64>(&w)?;
            let path = out.join("toy.csv");
            let mut f = create(&path)?;
            toy.panel.write_csv(&mut f)?;
            f.flush().map_err(|e| io_err(&path, e))?;
            let path = out.join("groups.csv");
            let mut f = create(&path)?;
            toy.write_groups_csv(&mut f)?;
            f.flush().map_err(|e| io_err(&path, e))?;
        }
        Cmd::Train { data, train, sigma } => {
            let (z, scaler) = standardize(&read_panel(&data)?)?;
            let model = train_sotm(&z, &scaler, &train.config(sigma))?;
            let path = out.join("model.json");
            let mut f = create(&path)?;
            model.write_json(&mut f)?;
            f.flush().map_err(|e| io_err(&path, e))?;
            write_quality(&model, &z, out, false)?;
        }
        Cmd::Sweep {
            data,
            train,
            sigmas,
        } => {
            let (z, scaler) = standardize(&read_panel(&data)?)?;
            let rows = sigma_sweep(&z, &scaler, &train.config(sigmas.0[0]), &sigmas.0)?;
            let path = out.join("sweep.csv");
            let mut w = csv::Writer::from_writer(create(&path)?);
            w.write_record(["sigma", "qe", "dm", "te", "sc"])?;
            for r in &rows {
                let q = &r.report;
                w.write_record(
                    [r.sigma, q.qe_total, q.dm_total, q.te_total, q.sc_total]
                        .map(|v| v.to_string()),
                )?;
            }
            w.flush().map_err(|e| io_err(&path, e))?;
        }
        Cmd::Quality { model, data } => {
            let model = Model::load(&model)?;
            let z = model_panel(&model, &data)?;
            write_quality(&model, &z, out, true)?;
        }
        Cmd::Render {
            model,
            data,
            entities,
            groups,
            underlay,
            report_dir,
        } => {
            let model = Model::load(&model)?;
            let z = model_panel(&model, &data)?;
            let groups = groups.map(read_groups_csv).transpose()?;
            let bundle = VizBundle::build(&model, &z, &entities, groups.as_deref())?;
            let dir = report_dir.unwrap_or_else(|| out.join("report"));
            let opts = RenderOptions {
                trajectory_underlay: underlay,
            };
            render_report(&bundle, &dir, &opts)?;
        }
        Cmd::Baseline { data, train, sigma } => {
            let (z, scaler) = standardize(&read_panel(&data)?)?;
            let config = train.config(sigma);
            let model = train_sotm(&z, &scaler, &config)?;
            let pooled = train_pooled_baseline(&z, &config)?;

            let path = out.join("baseline.csv");
            let mut w = csv::Writer::from_writer(create(&path)?);
            w.write_record(["t", "sotm_qe", "pooled_qe", "sotm_te", "pooled_te"])?;
            let mut totals = [0.0; 4];
            for (t, s) in z.slices().iter().enumerate() {
                let a = model.array(t);
                let row = [
                    slice_quantization_error(a, s),
                    slice_quantization_error(&pooled, s),
                    slice_topographic_error(a, s),
                    slice_topographic_error(&pooled, s),
                ];
                totals.iter_mut().zip(row).for_each(|(acc, v)| *acc += v);
                let mut rec = vec![z.times()[t].to_string()];
                rec.extend(row.map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
            let n = z.n_times() as f64;
            let mut rec = vec!["total".to_owned()];
            rec.extend(totals.map(|v| (v / n).to_string()));
            w.write_record(&rec)?;
            w.flush().map_err(|e| io_err(&path, e))?;

            let path = out.join("baseline-units.csv");
            let mut w = csv::Writer::from_writer(create(&path)?);
            let mut header = vec!["unit".to_owned()];
            header.extend(z.variables().iter().cloned());
            w.write_record(&header)?;
            for (i, u) in pooled.units().enumerate() {
                let mut rec = vec![i.to_string()];
                rec.extend(scaler.destandardize(u)?.iter().map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
            w.flush().map_err(|e| io_err(&path, e))?;
        }
        Cmd::Project {
            model,
            data,
            entities,
        } => {
            let model = Model::load(&model)?;
            let z = model_panel(&model, &data)?;
            let entities = if entities.is_empty() {
                z.entities().to_vec()
            } else {
                entities
            };
            let path = out.join("trajectories.csv");
            let mut w = csv::Writer::from_writer(create(&path)?);
            w.write_record(["entity", "time", "bmu"])?;
            for tr in trajectories(&model, &z, &entities)? {
                for p in &tr.points {
                    w.write_record([tr.entity.clone(), p.time.to_string(), p.bmu.to_string()])?;
                }
            }
            w.flush().map_err(|e| io_err(&path, e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Data(m) => (3, m),
                Failure::Io(m) => (4, m),
            };
            eprintln!("sotm: error: {}", msg.replace('\n', " "));
            ExitCode::from(code)
        }
    }
}
