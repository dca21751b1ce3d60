//! `qtm`: single-point quantities, single cycles and parameter sweeps for
//! the Raman-coupled two-qubit thermal machine.
//!
//! Exit status: 0 on success, 1 on usage or validation errors, 2 when a
//! requested cycle (or every cell of a sweep) failed in the solver.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use qtm_core::classifier::{clausius_residual, KappaVariant};
use qtm_core::cycles::{CycleKind, CyclePoint};
use qtm_core::io::config::{parse_config, ImageLayers, RunConfig};
use qtm_core::io::csv::{read_grid_file, write_grid};
use qtm_core::io::ppm::{write_heatmap, KappaRamp, Layer};
use qtm_core::io::sidecar::write_sidecar;
use qtm_core::spectrum::{build_spectrum, coherence_blocks, Equilibrium};
use qtm_core::sweep::{evaluate_point, run_grid, run_grid_with_threads, threads_from_env, AxisParam};

#[derive(Parser)]
#[command(name = "qtm", version, about = "Two-qubit Raman-coupled quantum thermal machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy levels at one frequency
    #[command(allow_negative_numbers = true)]
    Spectrum {
        #[command(flatten)]
        machine: MachineArgs,
        /// Right-qubit frequency ω
        #[arg(long)]
        omega: f64,
    },
    /// Gibbs state at one frequency and temperature
    #[command(allow_negative_numbers = true)]
    State {
        #[command(flatten)]
        machine: MachineArgs,
        #[arg(long)]
        omega: f64,
        /// Bath temperature
        #[arg(long)]
        t: f64,
    },
    /// One cycle, its mode and performance, as a JSON object
    #[command(allow_negative_numbers = true)]
    Cycle {
        #[command(flatten)]
        machine: MachineArgs,
        #[command(flatten)]
        cycle: CycleArgs,
    },
    /// Evaluate a grid and write CSV, sidecar JSON and heatmaps
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        machine: MachineArgs,
        #[command(flatten)]
        cycle: CycleArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Re-render a heatmap from an existing grid CSV
    Render {
        /// Grid CSV written by `sweep`
        #[arg(long)]
        input: PathBuf,
        /// Output P6 file
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "mode")]
        layer: Layer,
        /// Config supplying mode colors and the κ palette
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        palette: Option<KappaRamp>,
    },
}

#[derive(Args)]
struct MachineArgs {
    /// Configuration file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coupling strength
    #[arg(long)]
    g: Option<f64>,
    /// Frequency ratio ω̄/ω
    #[arg(long)]
    r: Option<f64>,
    /// Hold the left-qubit frequency fixed instead of ω̄ = r·ω
    #[arg(long)]
    omega_bar: Option<f64>,
}

#[derive(Args)]
struct CycleArgs {
    #[arg(long)]
    cycle: Option<CycleKind>,
    /// Cold bath temperature
    #[arg(long)]
    tc: Option<f64>,
    /// Hot bath temperature
    #[arg(long)]
    th: Option<f64>,
    #[arg(long)]
    omega0: Option<f64>,
    #[arg(long)]
    omega1: Option<f64>,
    /// Sign dead-band of the classifier
    #[arg(long)]
    tolerance: Option<f64>,
    /// Engine κ: plain (κ = η) or carnot (κ = η/η_C)
    #[arg(long)]
    kappa: Option<KappaVariant>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    x: Option<AxisParam>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    x_count: Option<usize>,
    #[arg(long)]
    y: Option<AxisParam>,
    #[arg(long)]
    y_min: Option<f64>,
    #[arg(long)]
    y_max: Option<f64>,
    #[arg(long)]
    y_count: Option<usize>,
    /// Output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output file stem
    #[arg(long)]
    name: Option<String>,
    /// Heatmaps to write: none, mode, kappa or both
    #[arg(long)]
    image: Option<ImageLayers>,
    #[arg(long)]
    palette: Option<KappaRamp>,
}

enum Failure {
    Invalid(anyhow::Error),
    Solver(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invalid(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn load_config(path: Option<&PathBuf>) -> anyhow::Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_config(&text).with_context(|| format!("in {}", p.display()))
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl MachineArgs {
    fn apply(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = load_config(self.config.as_ref())?;
        set(&mut cfg.g, self.g);
        set(&mut cfg.r, self.r);
        if self.omega_bar.is_some() {
            cfg.omega_bar = self.omega_bar;
        }
        Ok(cfg)
    }
}

impl CycleArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.cycle, self.cycle);
        set(&mut cfg.t_cold, self.tc);
        set(&mut cfg.t_hot, self.th);
        set(&mut cfg.omega0, self.omega0);
        set(&mut cfg.omega1, self.omega1);
        set(&mut cfg.tolerance, self.tolerance);
        set(&mut cfg.kappa, self.kappa);
    }
}

impl GridArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.x.param, self.x);
        set(&mut cfg.x.min, self.x_min);
        set(&mut cfg.x.max, self.x_max);
        set(&mut cfg.x.count, self.x_count);
        set(&mut cfg.y.param, self.y);
        set(&mut cfg.y.min, self.y_min);
        set(&mut cfg.y.max, self.y_max);
        set(&mut cfg.y.count, self.y_count);
        set(&mut cfg.output.dir, self.out_dir.clone());
        set(&mut cfg.output.name, self.name.clone());
        set(&mut cfg.output.image, self.image);
        set(&mut cfg.output.palette.ramp, self.palette);
    }
}

fn print_json(v: &Value) {
    let text = serde_json::to_string_pretty(v).expect("json value serializes");
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn spectrum(machine: &MachineArgs, omega: f64) -> Outcome {
    let params = machine.apply()?.machine_params()?;
    let s = build_spectrum(&params, omega)?;
    print_json(&json!({
        "omega": s.omega,
        "omega_bar": s.omega_bar,
        "big_omega": s.big_omega,
        "theta": s.theta,
        "energies": s.energies,
    }));
    Ok(())
}

fn state(machine: &MachineArgs, omega: f64, t: f64) -> Outcome {
    let params = machine.apply()?.machine_params()?;
    let eq = Equilibrium::new(&params, omega, t)?;
    let blocks = coherence_blocks(&params, omega, t)?;
    print_json(&json!({
        "omega": omega,
        "t": t,
        "beta": eq.state.beta,
        "energies": eq.spectrum.energies,
        "populations": eq.state.populations,
        "log_z": eq.state.log_z,
        "entropy": eq.entropy(),
        "energy": eq.energy(),
        "rho_plus_block": blocks.plus_block,
        "rho_minus_block": blocks.minus_block,
    }));
    Ok(())
}

fn cycle(machine: &MachineArgs, args: &CycleArgs) -> Outcome {
    let mut cfg = machine.apply()?;
    args.apply(&mut cfg);
    let params = cfg.machine_params()?;
    let point = CyclePoint::new(params, cfg.omega0, cfg.omega1, cfg.t_cold, cfg.t_hot)?;
    let (cell, record) = evaluate_point(cfg.cycle, &point, cfg.tolerance, cfg.kappa);

    let mut out = Map::new();
    out.insert("x".into(), json!(cell.x));
    out.insert("y".into(), json!(cell.y));
    out.insert("q_hot".into(), json!(cell.q_hot));
    out.insert("q_cold".into(), json!(cell.q_cold));
    out.insert("work".into(), json!(cell.work));
    out.insert("mode".into(), json!(cell.mode));
    out.insert("metric".into(), json!(cell.metric));
    out.insert("kappa".into(), json!(cell.kappa));
    out.insert("flags".into(), json!(cell.flags.to_string()));
    out.insert("cycle".into(), json!(cfg.cycle));
    out.insert("omega0".into(), json!(cfg.omega0));
    out.insert("omega1".into(), json!(cfg.omega1));
    out.insert("t_cold".into(), json!(cfg.t_cold));
    out.insert("t_hot".into(), json!(cfg.t_hot));
    out.insert("kappa_variant".into(), json!(cfg.kappa));
    let metric_kind = match (cell.mode.is_active(), cell.mode) {
        (false, _) => Value::Null,
        (true, qtm_core::OperationalMode::Engine) => json!("efficiency"),
        (true, _) => json!("cop"),
    };
    if metric_kind == json!("efficiency") {
        out.insert("efficiency".into(), json!(cell.metric));
    } else if metric_kind == json!("cop") {
        out.insert("cop".into(), json!(cell.metric));
    }
    out.insert("metric_kind".into(), metric_kind);

    let Some(rec) = record else {
        print_json(&Value::Object(out));
        return Err(Failure::Solver(anyhow!("cycle could not be evaluated ({})", cell.flags)));
    };
    out.insert("q_iso1".into(), json!(rec.q_iso1));
    out.insert("q_iso2".into(), json!(rec.q_iso2));
    if let Some((w2, w3)) = rec.aux_frequencies {
        out.insert("omega2".into(), json!(w2));
        out.insert("omega3".into(), json!(w3));
    }
    if let Some(regen) = rec.regen {
        out.insert("regen_delta".into(), json!(regen.delta));
        out.insert("regen_delta_flag".into(), json!(u8::from(regen.active)));
        out.insert("regen_q_in".into(), json!(regen.q_in));
        out.insert("stirling_q_hot".into(), json!(rec.q_hot));
        out.insert("stirling_q_cold".into(), json!(rec.q_cold));
    }
    out.insert(
        "clausius_residual".into(),
        json!(clausius_residual(&rec, (cfg.t_cold, cfg.t_hot))),
    );
    out.insert("diagnostics".into(), json!(rec.diagnostics));
    print_json(&Value::Object(out));
    Ok(())
}

fn sweep(machine: &MachineArgs, args: &CycleArgs, grid: &GridArgs) -> Outcome {
    let mut cfg = machine.apply()?;
    args.apply(&mut cfg);
    grid.apply(&mut cfg);
    let spec = cfg.grid_spec()?;
    let result = match threads_from_env().map_err(|e| anyhow!(e))? {
        Some(n) => run_grid_with_threads(&spec, n),
        None => run_grid(&spec),
    }
    ?;

    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = vec![cfg.csv_path(), cfg.sidecar_path()];
    write_grid(&result, &written[0])?;
    write_sidecar(&written[1], &result, &cfg.output.palette)?;
    for (on, layer) in [(cfg.output.image.mode(), Layer::Mode), (cfg.output.image.kappa(), Layer::Kappa)] {
        if on {
            let path = cfg.image_path(layer.as_str());
            write_heatmap(&path, &result.cells, result.width(), result.height(), layer, &cfg.output.palette)
                ?;
            written.push(path);
        }
    }
    let mut stdout = io::stdout().lock();
    for p in &written {
        let _ = writeln!(stdout, "{}", p.display());
    }

    let failed = result.failures();
    if failed == result.cells.len() {
        return Err(Failure::Solver(anyhow!("every cell failed in the solver")));
    }
    if failed > 0 {
        eprintln!("warning: {failed} of {} cells failed and are flagged", result.cells.len());
    }
    Ok(())
}

fn render(
    input: &Path,
    output: &Path,
    layer: Layer,
    config: Option<&PathBuf>,
    palette: Option<KappaRamp>,
) -> Outcome {
    let mut pal = load_config(config)?.output.palette;
    set(&mut pal.ramp, palette);
    let grid = read_grid_file(input)
        .map_err(|e| anyhow!(e))
        .with_context(|| format!("in {}", input.display()))?;
    write_heatmap(output, &grid.cells, grid.width, grid.height, layer, &pal)?;
    let _ = writeln!(io::stdout().lock(), "{}", output.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Spectrum { machine, omega } => spectrum(machine, *omega),
        Command::State { machine, omega, t } => state(machine, *omega, *t),
        Command::Cycle { machine, cycle: c } => cycle(machine, c),
        Command::Sweep { machine, cycle: c, grid } => sweep(machine, c, grid),
        Command::Render {
            input,
            output,
            layer,
            config,
            palette,
        } => render(input, output, *layer, config.as_ref(), *palette),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
