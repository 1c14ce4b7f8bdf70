// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! `nmrqc`: batch front end for the NMR quantum computer emulator.
//!
//! Every command writes a fixed set of files into `--out` and prints one JSON
//! line listing them. Failures print one JSON line on stderr and exit with
//! 2 (bad input), 3 (numerical failure) or 4 (output I/O).

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use nmrqc::algorithms::{self as alg, AlgorithmReport, ExecutionPath, Runner};
use nmrqc::control::{
    circuit_unitary, compile_circuit, grape_optimize, Circuit, GateKind, GradientMode, GrapeConfig,
    SearchDirection, DEFAULT_PULSE_AMP_HZ,
};
use nmrqc::experiments::{self as exp, FitReport, Inhomogeneity, RelaxationMode, RelaxationOptions, ScanResult};
use nmrqc::linalg::{c, CMatrix};
use nmrqc::measurement::{self as meas, TomographyOptions};
use nmrqc::report::{density_from_json, density_to_json, to_json_string, write_atomic};
use nmrqc::spin::{SpinSystemConfig, PRESET_NAMES};
use nmrqc::state::DensityMatrix;
use nmrqc::{random, Error};

#[derive(Parser, Debug)]
#[command(name = "nmrqc", version, about = "Pulse-level emulator of a few-qubit liquid-state NMR quantum computer")]
struct Cli {
    /// Machine config file, or a preset name (gemini, triangulum).
    #[arg(long, global = true, default_value = "gemini")]
    machine: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = PathArg::Ideal)]
    path: PathArg,
    /// T1/T2 relaxation on the pulse path.
    #[arg(long, global = true, value_enum, default_value_t = OnOff::Off)]
    relaxation: OnOff,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PathArg {
    Ideal,
    Pulse,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a circuit from |0…0⟩: report.json, state.json.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
    },
    /// Tomograph a state: state.json, tomography.json, fid_<channel>.csv, spectrum_<channel>.csv.
    Tomography(TomographyArgs),
    /// Compile a circuit to square pulses: program.json.
    Compile {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PULSE_AMP_HZ)]
        amp_hz: f64,
    },
    /// Optimize piecewise-constant controls: grape.csv, grape.json.
    Grape(GrapeArgs),
    /// Calibration and preparation experiments.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentCmd,
    },
    /// End-to-end algorithm runs: report.json (plus state.json, shots.json where defined).
    Algorithm {
        /// Also sample this many single shots from the final probabilities (seeded).
        #[arg(long, global = true)]
        shots: Option<usize>,
        #[command(subcommand)]
        kind: AlgorithmCmd,
    },
}

#[derive(Args, Debug)]
struct TomographyArgs {
    /// Circuit run from |0…0⟩ to produce the state.
    #[arg(long, conflicts_with = "state", required_unless_present = "state")]
    circuit: Option<PathBuf>,
    /// Density-matrix JSON {"n", "re", "im"}.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Apply readout rotations as compiled pulses.
    #[arg(long)]
    compiled_readout: bool,
    /// FID sampling interval for the exported spectra, seconds.
    #[arg(long, default_value_t = 2e-5)]
    dt: f64,
    #[arg(long, default_value_t = 16384)]
    samples: usize,
}

#[derive(Args, Debug)]
struct GrapeArgs {
    /// Target given as a circuit file.
    #[arg(long, conflicts_with = "gate", required_unless_present = "gate")]
    circuit: Option<PathBuf>,
    /// Target given as one single-qubit gate name (X90, Rx, H, …).
    #[arg(long)]
    gate: Option<String>,
    #[arg(long, default_value_t = 0)]
    qubit: usize,
    /// Gate parameters (angles in radians).
    #[arg(long, value_delimiter = ',')]
    params: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    segments: usize,
    /// Total pulse duration, seconds.
    #[arg(long, default_value_t = 1e-3)]
    duration: f64,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 0.995)]
    target_fidelity: f64,
    /// Exact segment derivatives instead of the first-order gradient.
    #[arg(long)]
    exact_gradient: bool,
    /// Polak–Ribière conjugate-gradient directions.
    #[arg(long)]
    conjugate: bool,
}

#[derive(Subcommand, Debug)]
enum ExperimentCmd {
    /// Nutation scan fitted to A|sin(πt/t180)|: rabi.csv, rabi.json.
    Rabi {
        #[arg(long)]
        channel: Option<String>,
        #[arg(long, default_value_t = DEFAULT_PULSE_AMP_HZ)]
        amp_hz: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        /// Longest pulse, seconds (default 2.5 t180).
        #[arg(long)]
        max_duration: Option<f64>,
    },
    /// Inversion recovery: t1.csv, t1.json.
    T1 {
        #[arg(long)]
        channel: Option<String>,
        /// Delays in seconds (default: the standard grid for the channel).
        #[arg(long, value_delimiter = ',')]
        delays: Vec<f64>,
    },
    /// Spin echo: t2.csv, t2.json.
    T2 {
        #[arg(long)]
        channel: Option<String>,
        /// Total echo times in seconds (default: the standard grid).
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        /// Average over an 11-point static offset ensemble.
        #[arg(long)]
        inhomogeneity: bool,
    },
    /// Pseudo-pure |00⟩ by spatial averaging: pps.json, pps_program.json.
    Pps,
}

#[derive(Subcommand, Debug)]
enum AlgorithmCmd {
    /// Deutsch's problem for one of the four one-bit functions.
    Deutsch {
        /// f1, f2 (constant) or f3, f4 (balanced).
        #[arg(long, default_value = "f3")]
        case: String,
    },
    /// One Grover iteration over four items.
    Grover4 {
        /// Item 1..4, i.e. |00⟩, |01⟩, |10⟩, |11⟩.
        #[arg(long)]
        target: usize,
    },
    /// Bernstein-Vazirani: read a secret bit string in one query.
    Bv {
        /// Secret bit string, one bit per qubit.
        #[arg(long)]
        a: String,
    },
    /// Approximate counting of marked items from <σz> over l oracle calls.
    Count {
        /// m0, m1_first, m1_second or m2.
        #[arg(long, default_value = "m1_first")]
        case: String,
        /// Comma-separated iteration counts.
        #[arg(long, value_delimiter = ',', default_values_t = 1..=10usize)]
        l: Vec<usize>,
    },
    /// Bell-state preparation from |00⟩.
    Bell {
        /// psi+, psi-, phi+ or phi-.
        #[arg(long, default_value = "phi-")]
        state: String,
        /// cnot, or cy (phi- only).
        #[arg(long, default_value = "cnot")]
        recipe: String,
    },
    /// Oscillator simulation: report.json with one entry per Ωt, qho.csv.
    Qho {
        /// n0, n0_plus_n3 or uniform4.
        #[arg(long, default_value = "n0_plus_n3")]
        initial: String,
        /// Ωt values in radians (default 0.1·2π … 1.0·2π).
        #[arg(long, value_delimiter = ',')]
        omega_t: Vec<f64>,
    },
    /// Normalized trace of a unitary from one clean qubit (ideal path).
    Dqc1 {
        /// Unitary JSON {"re": [[…]], "im": [[…]]}; a seeded random unitary when absent.
        #[arg(long)]
        unitary: Option<PathBuf>,
        /// Register size of the random unitary.
        #[arg(long, default_value_t = 1)]
        qubits: usize,
        /// Draw a random diagonal unitary instead of a Haar one.
        #[arg(long)]
        diagonal: bool,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
    },
    /// CNOT truth table read out by tomography.
    CnotTable {
        /// 12 (control qubit 0) or 21 (control qubit 1).
        #[arg(long, default_value = "12")]
        direction: String,
    },
}

/// Failure with its exit code.
struct CliError {
    code: u8,
    kind: &'static str,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            kind: "usage",
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Invalid { .. } => (2, "invalid"),
            Error::Dimension { .. } => (2, "dimension"),
            Error::UncoupledPair(..) => (2, "uncoupled_pair"),
            Error::Parse { .. } => (2, "parse"),
            Error::Unresolved { .. } => (3, "unresolved"),
            Error::Fit(_) => (3, "fit"),
            Error::Numerical(_) => (3, "numerical"),
            Error::Io { .. } => (4, "io"),
        };
        CliError {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Read failures of inputs are input errors (exit 2), not output I/O.
fn input<T>(r: nmrqc::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        Error::Io { .. } => CliError {
            code: 2,
            kind: "input",
            message: e.to_string(),
        },
        other => other.into(),
    })
}

fn read_input(path: &Path) -> CliResult<String> {
    input(std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    }))
}

fn load_machine(spec: &str) -> CliResult<SpinSystemConfig> {
    let path = Path::new(spec);
    if path.exists() {
        return input(SpinSystemConfig::load(path));
    }
    if PRESET_NAMES.contains(&spec) {
        return input(SpinSystemConfig::preset(spec));
    }
    Err(CliError {
        code: 2,
        kind: "input",
        message: format!("machine {spec}: no such file and not a preset ({})", PRESET_NAMES.join(", ")),
    })
}

fn load_unitary(path: &Path) -> CliResult<CMatrix> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    }
    let text = read_input(path)?;
    let raw: Raw = serde_json::from_str(&text).map_err(|e| {
        CliError::from(Error::Parse {
            source_name: path.display().to_string(),
            message: e.to_string(),
        })
    })?;
    let d = raw.re.len();
    let square = |m: &[Vec<f64>]| m.len() == d && m.iter().all(|r| r.len() == d);
    if d == 0 || !square(&raw.re) || !square(&raw.im) {
        return Err(CliError::usage(format!("{}: re and im must be equal square arrays", path.display())));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| c(raw.re[i][j], raw.im[i][j])))
}

/// Files of one command, written only after everything has been computed.
#[derive(Default)]
struct Outputs(Vec<(String, Vec<u8>)>);

impl Outputs {
    fn json(&mut self, name: &str, v: &Value) {
        self.0.push((name.to_string(), to_json_string(v).into_bytes()));
    }

    fn text(&mut self, name: &str, s: String) {
        self.0.push((name.to_string(), s.into_bytes()));
    }

    fn write(self, dir: &Path) -> CliResult<Vec<String>> {
        std::fs::create_dir_all(dir).map_err(|source| {
            CliError::from(Error::Io {
                path: dir.display().to_string(),
                source,
            })
        })?;
        let mut written = Vec::new();
        for (name, bytes) in self.0 {
            let p = dir.join(&name);
            write_atomic(&p, &bytes)?;
            written.push(p.display().to_string());
        }
        Ok(written)
    }
}

struct Ctx {
    config: SpinSystemConfig,
    seed: u64,
    path: ExecutionPath,
    relaxation: bool,
}

impl Ctx {
    fn runner(&self) -> Runner {
        Runner::new(self.config.clone(), self.path).with_relaxation(self.relaxation)
    }

    fn channel(&self, label: Option<String>) -> CliResult<String> {
        let label = label.unwrap_or_else(|| self.config.channels()[0].label.clone());
        self.config.channel(&label)?;
        Ok(label)
    }
}

fn fit_json(fit: &Option<FitReport>) -> Value {
    match fit {
        Some(f) => {
            let names = f.model.param_names();
            json!({
                "model": f.model.name(),
                "params": { names[0]: f.params[0], names[1]: f.params[1] },
                "residual": f.residual,
            })
        }
        None => Value::Null,
    }
}

fn scan_outputs(out: &mut Outputs, stem: &str, scan: &ScanResult, extra: Map<String, Value>) {
    out.text(&format!("{stem}.csv"), scan.to_csv());
    let mut v = fit_json(&scan.fit);
    if let Value::Object(m) = &mut v {
        m.extend(extra);
    }
    out.json(&format!("{stem}.json"), &v);
}

fn report_outputs(out: &mut Outputs, report: &AlgorithmReport, shots: Option<usize>, seed: u64) -> CliResult<()> {
    out.json("report.json", &report.to_json());
    out.json("state.json", &density_to_json(&report.final_state));
    if let Some(n) = shots {
        let counts = alg::sample_shots(&report.probabilities, n, seed)?;
        out.json("shots.json", &json!({ "shots": n, "seed": seed, "counts": counts }));
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<Vec<String>> {
    let ctx = Ctx {
        config: load_machine(&cli.machine)?,
        seed: cli.seed,
        path: match cli.path {
            PathArg::Ideal => ExecutionPath::Ideal,
            PathArg::Pulse => ExecutionPath::Pulse,
        },
        relaxation: matches!(cli.relaxation, OnOff::On),
    };
    let mut out = Outputs::default();
    match cli.command {
        Command::Simulate { circuit } => {
            let circuit = input(Circuit::load(&circuit))?;
            let report = alg::run_circuit(&circuit, &ctx.runner())?;
            report_outputs(&mut out, &report, None, ctx.seed)?;
        }
        Command::Tomography(args) => tomography_cmd(&ctx, args, &mut out)?,
        Command::Compile { circuit, amp_hz } => {
            let circuit = input(Circuit::load(&circuit))?;
            let program = compile_circuit(&circuit, &ctx.config, amp_hz)?;
            out.json("program.json", &serde_json::to_value(&program).expect("program serializes"));
        }
        Command::Grape(args) => grape_cmd(&ctx, args, &mut out)?,
        Command::Experiment { kind } => experiment_cmd(&ctx, kind, &mut out)?,
        Command::Algorithm { shots, kind } => algorithm_cmd(&ctx, kind, shots, &mut out)?,
    }
    out.write(&cli.out)
}

fn tomography_cmd(ctx: &Ctx, args: TomographyArgs, out: &mut Outputs) -> CliResult<()> {
    let rho: DensityMatrix = match (&args.circuit, &args.state) {
        (Some(p), _) => ctx.runner().run_from_ground(&input(Circuit::load(p))?)?,
        (None, Some(p)) => {
            let text = read_input(p)?;
            input(density_from_json(&text, &p.display().to_string()))?
        }
        (None, None) => return Err(CliError::usage("give --circuit or --state")),
    };
    let options = TomographyOptions {
        compiled_readout: args.compiled_readout,
        ..Default::default()
    };
    let report = meas::tomography_with(&rho, &ctx.config, options)?;
    let settings: Vec<Value> = report
        .settings
        .iter()
        .map(|(s, r)| {
            let lines: Vec<Value> = r
                .lines
                .iter()
                .map(|l| {
                    json!({
                        "qubit": l.qubit,
                        "partner_bits": l.partner_bits,
                        "frequency_hz": l.frequency_hz,
                        "re": l.amplitude.re,
                        "im": l.amplitude.im,
                    })
                })
                .collect();
            let coeffs: Map<String, Value> = r.coefficients.iter().map(|(p, v)| (p.to_string(), json!(v))).collect();
            json!({ "setting": s.0, "lines": lines, "coefficients": coeffs })
        })
        .collect();
    let coefficients: Map<String, Value> = report.coefficients.iter().map(|(p, v)| (p.to_string(), json!(v))).collect();
    let duration = args.dt * (args.samples.max(2) - 1) as f64;
    let mut spectra = Map::new();
    for ch in ctx.config.channels() {
        let fid = meas::synthesize_fid(&rho, &ctx.config, &ch.label, duration, args.dt)?;
        let peaks: Vec<Value> = meas::spectrum_peaks(&fid)
            .iter()
            .map(|p| json!({ "frequency_hz": p.frequency_hz, "re": p.amplitude.re, "im": p.amplitude.im }))
            .collect();
        spectra.insert(ch.label.clone(), Value::Array(peaks));
        out.text(&format!("fid_{}.csv", ch.label), fid.to_csv());
        out.text(&format!("spectrum_{}.csv", ch.label), meas::spectrum(&fid).to_csv());
    }
    out.json("state.json", &density_to_json(&report.state));
    out.json(
        "tomography.json",
        &json!({ "coefficients": coefficients, "settings": settings, "peaks": spectra }),
    );
    Ok(())
}

fn grape_cmd(ctx: &Ctx, args: GrapeArgs, out: &mut Outputs) -> CliResult<()> {
    let n = ctx.config.n_qubits();
    let circuit = match (&args.circuit, &args.gate) {
        (Some(p), _) => input(Circuit::load(p))?,
        (None, Some(name)) => Circuit::new(n).add(GateKind::from_name(name, &args.params)?, &[args.qubit]),
        (None, None) => return Err(CliError::usage("give --circuit or --gate")),
    };
    let target = circuit_unitary(&circuit, Some(&ctx.config))?;
    if args.segments == 0 || !(args.duration > 0.0) {
        return Err(CliError::usage("--segments and --duration must be positive"));
    }
    let gcfg = GrapeConfig {
        segments: args.segments,
        dt: args.duration / args.segments as f64,
        max_iters: args.iterations,
        target_fidelity: args.target_fidelity,
        gradient: if args.exact_gradient { GradientMode::Exact } else { GradientMode::FirstOrder },
        direction: if args.conjugate { SearchDirection::ConjugateGradient } else { SearchDirection::Gradient },
        ..Default::default()
    };
    let result = grape_optimize(&target, &ctx.config, &gcfg, ctx.seed)?;
    out.text("grape.csv", result.to_csv());
    out.json(
        "grape.json",
        &json!({
            "iterations": result.iterations,
            "final_fidelity": result.final_fidelity,
            "converged": result.converged,
            "seed": result.seed,
            "segments": args.segments,
            "dt_s": result.dt,
            "channels": ctx.config.channels().iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
            "fidelity_trace": result.fidelity_trace,
        }),
    );
    Ok(())
}

fn experiment_cmd(ctx: &Ctx, kind: ExperimentCmd, out: &mut Outputs) -> CliResult<()> {
    let cfg = &ctx.config;
    match kind {
        ExperimentCmd::Rabi {
            channel,
            amp_hz,
            points,
            max_duration,
        } => {
            let ch = ctx.channel(channel)?;
            if !(amp_hz > 0.0) || points < 2 {
                return Err(CliError::usage("--amp-hz must be > 0 and --points >= 2"));
            }
            let hi = max_duration.unwrap_or(2.5 / (2.0 * amp_hz));
            let durations: Vec<f64> = (0..points).map(|i| hi * i as f64 / (points - 1) as f64).collect();
            let r = exp::rabi_calibration(cfg, &ch, amp_hz, &durations)?;
            let extra = json!({ "channel": ch, "amp_hz": amp_hz, "t90_s": r.t90, "t180_s": r.t180 });
            scan_outputs(out, "rabi", &r.scan, extra.as_object().cloned().unwrap_or_default());
        }
        ExperimentCmd::T1 { channel, delays } => {
            let ch = ctx.channel(channel)?;
            let delays = if delays.is_empty() {
                if ch == "31P" { exp::T1_DELAYS_31P_S.to_vec() } else { exp::T1_DELAYS_1H_S.to_vec() }
            } else {
                delays
            };
            let scan = exp::relaxation_experiment(cfg, &ch, RelaxationMode::T1, &delays)?;
            let mut extra = Map::new();
            extra.insert("channel".into(), json!(ch));
            scan_outputs(out, "t1", &scan, extra);
        }
        ExperimentCmd::T2 {
            channel,
            times,
            inhomogeneity,
        } => {
            let ch = ctx.channel(channel)?;
            let times = if times.is_empty() { exp::t2_echo_times() } else { times };
            let q = cfg.channel(&ch)?.qubits[0];
            let options = RelaxationOptions {
                inhomogeneity: inhomogeneity.then(|| Inhomogeneity::standard(cfg.nuclei[q].t2_s)),
                ..Default::default()
            };
            let scan = exp::relaxation_experiment_with(cfg, &ch, RelaxationMode::T2, &times, &options)?;
            let mut extra = Map::new();
            extra.insert("channel".into(), json!(ch));
            extra.insert("inhomogeneity".into(), json!(inhomogeneity));
            scan_outputs(out, "t2", &scan, extra);
        }
        ExperimentCmd::Pps => {
            let pps = exp::prepare_pseudo_pure(cfg)?;
            let deviation: Map<String, Value> = nmrqc::pauli::pauli_expand(pps.state())
                .iter()
                .filter(|(p, v)| !p.is_identity() && v.abs() > 1e-12)
                .map(|(p, v)| (p.to_string(), json!(v)))
                .collect();
            out.json("pps.json", &json!({ "state": density_to_json(pps.state()), "deviation": deviation }));
            out.json("pps_program.json", &serde_json::to_value(&pps.program).expect("program serializes"));
        }
    }
    Ok(())
}

fn algorithm_cmd(ctx: &Ctx, kind: AlgorithmCmd, shots: Option<usize>, out: &mut Outputs) -> CliResult<()> {
    let runner = ctx.runner();
    let report = match kind {
        AlgorithmCmd::Deutsch { case } => alg::run_deutsch(case.parse()?, &runner)?,
        AlgorithmCmd::Grover4 { target } => alg::run_grover4(target, &runner)?,
        AlgorithmCmd::Bv { a } => alg::run_bernstein_vazirani(&a, &runner)?,
        AlgorithmCmd::Count { case, l } => alg::run_counting(case.parse()?, &l, &runner)?,
        AlgorithmCmd::Bell { state, recipe } => alg::prepare_bell(state.parse()?, recipe.parse()?, &runner)?,
        AlgorithmCmd::Qho { initial, omega_t } => {
            let grid = if omega_t.is_empty() {
                (1..=10).map(|k| 0.1 * k as f64 * TAU).collect()
            } else {
                omega_t
            };
            let reports = alg::simulate_qho(initial.parse()?, &grid, &runner)?;
            let mut csv = String::from("omega_t,fidelity,coherence_phase\n");
            for r in &reports {
                let phase = r.derived["coherence_phase"].as_f64().map(nmrqc::report::fmt_float).unwrap_or_default();
                csv.push_str(&format!(
                    "{},{},{}\n",
                    nmrqc::report::fmt_float(r.derived["omega_t"].as_f64().unwrap_or(f64::NAN)),
                    nmrqc::report::fmt_float(r.fidelity.unwrap_or(f64::NAN)),
                    phase
                ));
            }
            let all: Vec<Value> = reports.iter().map(AlgorithmReport::to_json).collect();
            out.json("report.json", &json!({ "algorithm": "qho", "path": ctx.path.name(), "reports": all }));
            out.text("qho.csv", csv);
            return Ok(());
        }
        AlgorithmCmd::Dqc1 {
            unitary,
            qubits,
            diagonal,
            epsilon,
        } => {
            let u = match unitary {
                Some(p) => load_unitary(&p)?,
                None => {
                    if !(1..=2).contains(&qubits) {
                        return Err(CliError::usage("--qubits must be 1 or 2"));
                    }
                    let mut rng = random::seeded(ctx.seed);
                    if diagonal {
                        random::random_diagonal_unitary(1 << qubits, &mut rng)
                    } else {
                        random::haar_unitary(1 << qubits, &mut rng)
                    }
                }
            };
            alg::run_dqc1(&u, epsilon)?
        }
        AlgorithmCmd::CnotTable { direction } => {
            let table = alg::cnot_truth_table(direction.parse()?, &runner)?;
            out.json("report.json", &table.to_json());
            return Ok(());
        }
    };
    report_outputs(out, &report, shots, ctx.seed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::usage(e.to_string().lines().next().unwrap_or("bad arguments").trim_start_matches("error: "));
            return fail(err);
        }
    };
    match run(cli) {
        Ok(written) => {
            println!("{}", json!({ "written": written }));
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": e.kind, "message": e.message, "exit_code": e.code } }));
    ExitCode::from(e.code)
}
