//! Command-line front end: key generation, synthetic data, pipeline runs
//! on either backend, fidelity/depth/trace reports.
//!
//! Exit codes: 0 success, 2 depth-budget violation, 3 trace divergence,
//! 4 unreadable input, 5 invalid configuration, 6 missing keys.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oblivdsp::ckks::{serial, CkksContext};
use oblivdsp::config::PipelineConfig;
use oblivdsp::fixtures;
use oblivdsp::kernels::{FcLayer, FcNetwork, PlainOperand};
use oblivdsp::pipelines::{
    rotations_in_trace, run_gesture, run_vitals, BackendChoice, DepthLedger, LatticeSetup,
    PipelineError, RadarCube,
};
use oblivdsp::synth::generate_cube;

const EXIT_DEPTH: u8 = 2;
const EXIT_TRACE: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_CONFIG: u8 = 5;
const EXIT_KEYS: u8 = 6;

#[derive(Parser)]
#[command(
    name = "oblivdsp",
    about = "Data-oblivious encrypted radar DSP: keygen, synthetic data, pipelines, audits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// key=value config file; defaults depend on the pipeline
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline config override, repeatable: --set gamma=4
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (overrides $OBLIVDSP_OUT; default ".")
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluation backend
    #[arg(long, default_value = "exactsim", value_parser = ["exactsim", "ckks"])]
    backend: String,
    /// Random seed override
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate CKKS keys with the Galois closure of a pipeline
    Keygen {
        #[command(flatten)]
        common: CommonOpts,
        /// Pipeline whose rotation set the Galois keys must cover
        #[arg(long, default_value = "vitals", value_parser = ["vitals", "gesture"])]
        pipeline: String,
        /// Extra rotation amounts, comma separated (e.g. "1,-1,8")
        #[arg(long)]
        rotations: Option<String>,
    },
    /// Generate a synthetic radar cube
    Synth {
        #[command(flatten)]
        common: CommonOpts,
        /// Scene kind
        #[arg(long, default_value = "vitals", value_parser = ["vitals", "gesture"])]
        scene: String,
        /// Gesture class index (gesture scenes)
        #[arg(long, default_value_t = 0)]
        class: usize,
        /// Output file name (binary; .csv writes the text form)
        #[arg(long, default_value = "cube.bin")]
        output: PathBuf,
    },
    /// Run the vital-signs pipeline
    RunVitals {
        #[command(flatten)]
        common: CommonOpts,
        /// Input cube (.bin or .csv); omit to use the bundled fixture
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the dynamic-classification pipeline
    RunGesture {
        #[command(flatten)]
        common: CommonOpts,
        /// Input cube (.bin or .csv); omit to use a bundled fixture scene
        #[arg(long)]
        input: Option<PathBuf>,
        /// Directory of fc_weight_N / fc_bias_N operand files; omit for
        /// the bundled deterministic test network
        #[arg(long)]
        weights_dir: Option<PathBuf>,
    },
    /// Per-kernel encrypted-vs-exact fidelity table
    Fidelity {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value = "vitals", value_parser = ["vitals", "gesture"])]
        pipeline: String,
    },
    /// Check execution-trace identity across randomized inputs
    TraceCheck {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value = "gesture", value_parser = ["vitals", "gesture"])]
        pipeline: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Print and verify the multiplicative-depth ledger
    DepthAudit {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value = "vitals", value_parser = ["vitals", "gesture"])]
        pipeline: String,
    },
}

fn out_dir(common: &CommonOpts) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os("OBLIVDSP_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn load_config(common: &CommonOpts, pipeline: &str) -> Result<PipelineConfig, u8> {
    let mut cfg = match pipeline {
        "gesture" => PipelineConfig::default_gesture(),
        _ => fixtures::vital_config(),
    };
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            eprintln!("cannot read config {}: {e}", path.display());
            EXIT_INPUT
        })?;
        cfg.apply_text(&text).map_err(|e| {
            eprintln!("{e}");
            EXIT_CONFIG
        })?;
    }
    for kv in &common.sets {
        let Some((k, v)) = kv.split_once('=') else {
            eprintln!("--set expects KEY=VALUE, got {kv:?}");
            return Err(EXIT_CONFIG);
        };
        cfg.apply_key(k.trim(), v.trim()).map_err(|e| {
            eprintln!("{e}");
            EXIT_CONFIG
        })?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| {
        eprintln!("{e}");
        EXIT_CONFIG
    })?;
    Ok(cfg)
}

fn backend_choice(common: &CommonOpts) -> BackendChoice {
    if common.backend == "ckks" {
        BackendChoice::Ckks
    } else {
        BackendChoice::ExactSim
    }
}

fn read_cube(path: &Path) -> Result<RadarCube, u8> {
    let map_err = |e: oblivdsp::pipelines::CubeError| {
        eprintln!("cannot read cube {}: {e}", path.display());
        EXIT_INPUT
    };
    if path.extension().is_some_and(|e| e == "csv") {
        let f = std::fs::File::open(path).map_err(|e| {
            eprintln!("cannot open {}: {e}", path.display());
            EXIT_INPUT
        })?;
        RadarCube::read_csv(&mut std::io::BufReader::new(f)).map_err(map_err)
    } else {
        let f = std::fs::File::open(path).map_err(|e| {
            eprintln!("cannot open {}: {e}", path.display());
            EXIT_INPUT
        })?;
        RadarCube::read_binary(&mut std::io::BufReader::new(f)).map_err(map_err)
    }
}

fn pipeline_exit(e: &PipelineError) -> u8 {
    match e {
        PipelineError::DepthBudget { .. } => EXIT_DEPTH,
        PipelineError::Config(_) => EXIT_CONFIG,
        PipelineError::Vm { error, .. } => {
            if error.to_string().contains("Galois") || error.to_string().contains("galois") {
                EXIT_KEYS
            } else {
                EXIT_DEPTH
            }
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), u8> {
    std::fs::create_dir_all(dir).map_err(|e| {
        eprintln!("cannot create {}: {e}", dir.display());
        EXIT_INPUT
    })?;
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).map_err(|e| {
        eprintln!("cannot write {}: {e}", path.display());
        EXIT_INPUT
    })?;
    f.write_all(contents.as_bytes()).map_err(|e| {
        eprintln!("write failed {}: {e}", path.display());
        EXIT_INPUT
    })?;
    Ok(())
}

fn load_network(dir: &Path, dims: &[usize]) -> Result<FcNetwork, u8> {
    let mut layers = Vec::new();
    for i in 1.. {
        let wpath = dir.join(format!("fc_weight_{i}.op"));
        if !wpath.exists() {
            break;
        }
        let w = PlainOperand::load(&wpath).map_err(|e| {
            eprintln!("cannot load {}: {e}", wpath.display());
            EXIT_INPUT
        })?;
        let bpath = dir.join(format!("fc_bias_{i}.op"));
        let b = PlainOperand::load(&bpath).map_err(|e| {
            eprintln!("cannot load {}: {e}", bpath.display());
            EXIT_INPUT
        })?;
        let weight: Vec<Vec<f64>> = (0..w.rows).map(|r| w.row(r).to_vec()).collect();
        layers.push(FcLayer {
            weight,
            bias: b.values.clone(),
        });
    }
    if layers.is_empty() {
        eprintln!("no fc_weight_1.op found in {}", dir.display());
        return Err(EXIT_INPUT);
    }
    let got: Vec<usize> = std::iter::once(layers[0].in_dim())
        .chain(layers.iter().map(|l| l.out_dim()))
        .collect();
    if got != dims {
        eprintln!("weight dims {got:?} do not match fc_dims {dims:?}");
        return Err(EXIT_CONFIG);
    }
    Ok(FcNetwork { layers })
}

fn cmd_keygen(common: &CommonOpts, pipeline: &str, rotations: &Option<String>) -> Result<(), u8> {
    let cfg = load_config(common, pipeline)?;
    let mut rots: Vec<i64> = Vec::new();
    if let Some(list) = rotations {
        for tok in list.split(',') {
            rots.push(tok.trim().parse().map_err(|_| {
                eprintln!("bad rotation amount {tok:?}");
                EXIT_CONFIG
            })?);
        }
    }
    // Galois closure by dry-running the pipeline on a zero cube
    let k = &cfg.kernel;
    let cube = RadarCube::zeros(
        k.frames,
        k.antennas,
        k.range_bins,
        k.chirps,
        cfg.frame_rate_hz,
        cfg.wavelength_m,
    );
    let trace = match pipeline {
        "gesture" => {
            let net = fixtures::random_fc_net(&k.fc_dims, cfg.seed);
            run_gesture(&cube, &cfg, &net, BackendChoice::ExactSim)
                .map_err(|e| {
                    eprintln!("{e}");
                    pipeline_exit(&e)
                })?
                .trace
        }
        _ => {
            run_vitals(&cube, &cfg, BackendChoice::ExactSim)
                .map_err(|e| {
                    eprintln!("{e}");
                    pipeline_exit(&e)
                })?
                .trace
        }
    };
    rots.extend(rotations_in_trace(&trace));
    let setup = LatticeSetup::for_rotations(&cfg, &rots);
    let dir = out_dir(common);
    std::fs::create_dir_all(&dir).map_err(|e| {
        eprintln!("cannot create {}: {e}", dir.display());
        EXIT_INPUT
    })?;
    let write = |name: &str, f: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| -> Result<(), u8> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| {
            eprintln!("serialization failed: {e}");
            EXIT_INPUT
        })?;
        std::fs::write(dir.join(name), &buf).map_err(|e| {
            eprintln!("cannot write {name}: {e}");
            EXIT_INPUT
        })
    };
    let ctx: &CkksContext = &setup.ctx;
    write("secret.key", &|buf| {
        serial::write_secret_key(buf, ctx, &setup.secret)
    })?;
    write("eval.keys", &|buf| {
        serial::write_eval_keys(buf, ctx, &setup.eval)
    })?;
    println!(
        "wrote secret.key and eval.keys ({} Galois keys, {}) to {}",
        setup.eval.galois.len(),
        cfg.ckks.profile.tag(),
        dir.display()
    );
    Ok(())
}

fn cmd_synth(common: &CommonOpts, scene: &str, class: usize, output: &Path) -> Result<(), u8> {
    let cfg = load_config(common, scene)?;
    let spec = match scene {
        "gesture" => {
            let mut s = fixtures::gesture_scene(class, 5);
            s.frames = cfg.kernel.frames;
            s.antennas = cfg.kernel.antennas;
            s.range_bins = cfg.kernel.range_bins;
            s.chirps = cfg.kernel.chirps;
            s.frame_rate_hz = cfg.frame_rate_hz;
            s
        }
        _ => fixtures::vital_scene(),
    };
    let cube = generate_cube(&spec, cfg.seed).map_err(|e| {
        eprintln!("{e}");
        EXIT_CONFIG
    })?;
    let dir = out_dir(common);
    std::fs::create_dir_all(&dir).map_err(|e| {
        eprintln!("cannot create {}: {e}", dir.display());
        EXIT_INPUT
    })?;
    let path = dir.join(output);
    let f = std::fs::File::create(&path).map_err(|e| {
        eprintln!("cannot create {}: {e}", path.display());
        EXIT_INPUT
    })?;
    let mut w = std::io::BufWriter::new(f);
    let res = if path.extension().is_some_and(|e| e == "csv") {
        cube.write_csv(&mut w)
    } else {
        cube.write_binary(&mut w)
    };
    res.map_err(|e| {
        eprintln!("write failed: {e}");
        EXIT_INPUT
    })?;
    println!(
        "wrote {} ({} frames × {} antennas × {} bins × {} chirps)",
        path.display(),
        cube.frames,
        cube.antennas,
        cube.range_bins,
        cube.chirps
    );
    Ok(())
}

fn cmd_run_vitals(common: &CommonOpts, input: &Option<PathBuf>) -> Result<(), u8> {
    let cfg = load_config(common, "vitals")?;
    let cube = match input {
        Some(path) => read_cube(path)?,
        None => generate_cube(&fixtures::vital_scene(), cfg.seed).map_err(|e| {
            eprintln!("{e}");
            EXIT_CONFIG
        })?,
    };
    let run = run_vitals(&cube, &cfg, backend_choice(common)).map_err(|e| {
        eprintln!("{e}");
        pipeline_exit(&e)
    })?;
    let dir = out_dir(common);
    write_file(&dir, "vitals_report.json", &run.report.to_json())?;
    write_file(&dir, "vitals_report.txt", &run.report.to_text())?;
    write_file(&dir, "vitals_trace.txt", &run.trace.dump())?;
    println!("{}", run.report.to_text());
    println!(
        "target bin r̂ = {:.3}; RR = {:.2} bpm; HR = {:.2} bpm{}",
        run.result.target_bin,
        run.result.rr_bpm,
        run.result.hr_bpm,
        if run.result.low_confidence {
            " [LOW CONFIDENCE]"
        } else {
            ""
        }
    );
    Ok(())
}

fn cmd_run_gesture(
    common: &CommonOpts,
    input: &Option<PathBuf>,
    weights_dir: &Option<PathBuf>,
) -> Result<(), u8> {
    let cfg = load_config(common, "gesture")?;
    let cube = match input {
        Some(path) => read_cube(path)?,
        None => {
            let mut s = fixtures::gesture_scene(0, 5);
            s.frames = cfg.kernel.frames;
            s.antennas = cfg.kernel.antennas;
            s.range_bins = cfg.kernel.range_bins;
            s.chirps = cfg.kernel.chirps;
            s.frame_rate_hz = cfg.frame_rate_hz;
            generate_cube(&s, cfg.seed).map_err(|e| {
                eprintln!("{e}");
                EXIT_CONFIG
            })?
        }
    };
    let net = match weights_dir {
        Some(dir) => load_network(dir, &cfg.kernel.fc_dims)?,
        None => fixtures::random_fc_net(&cfg.kernel.fc_dims, cfg.seed),
    };
    let run = run_gesture(&cube, &cfg, &net, backend_choice(common)).map_err(|e| {
        eprintln!("{e}");
        pipeline_exit(&e)
    })?;
    let dir = out_dir(common);
    write_file(&dir, "gesture_report.json", &run.report.to_json())?;
    write_file(&dir, "gesture_report.txt", &run.report.to_text())?;
    write_file(&dir, "gesture_trace.txt", &run.trace.dump())?;
    println!("{}", run.report.to_text());
    println!("logits = {:?}", run.result.logits);
    println!("predicted class = {}", run.result.predicted);
    Ok(())
}

fn cmd_fidelity(common: &CommonOpts, pipeline: &str) -> Result<(), u8> {
    let cfg = load_config(common, pipeline)?;
    let report = match pipeline {
        "gesture" => {
            let mut s = fixtures::gesture_scene(1, 5);
            s.frames = cfg.kernel.frames;
            s.antennas = cfg.kernel.antennas;
            s.range_bins = cfg.kernel.range_bins;
            s.chirps = cfg.kernel.chirps;
            s.frame_rate_hz = cfg.frame_rate_hz;
            let cube = generate_cube(&s, cfg.seed).map_err(|e| {
                eprintln!("{e}");
                EXIT_CONFIG
            })?;
            let net = fixtures::random_fc_net(&cfg.kernel.fc_dims, cfg.seed);
            run_gesture(&cube, &cfg, &net, BackendChoice::Ckks)
                .map_err(|e| {
                    eprintln!("{e}");
                    pipeline_exit(&e)
                })?
                .report
        }
        _ => {
            let cube = generate_cube(&fixtures::vital_scene(), cfg.seed).map_err(|e| {
                eprintln!("{e}");
                EXIT_CONFIG
            })?;
            run_vitals(&cube, &cfg, BackendChoice::Ckks)
                .map_err(|e| {
                    eprintln!("{e}");
                    pipeline_exit(&e)
                })?
                .report
        }
    };
    let dir = out_dir(common);
    write_file(
        &dir,
        &format!("{pipeline}_fidelity.json"),
        &report.to_json(),
    )?;
    match &report.fidelity {
        Some(f) => {
            println!("{}", f.to_table());
            println!("max stage MSE: {:.3e}", f.max_mse());
        }
        None => println!("no fidelity table (exact backend?)"),
    }
    Ok(())
}

fn cmd_trace_check(common: &CommonOpts, pipeline: &str, trials: usize) -> Result<(), u8> {
    use rand::{Rng, SeedableRng};
    let cfg = load_config(common, pipeline)?;
    let net = fixtures::random_fc_net(&cfg.kernel.fc_dims, cfg.seed);

    // independent trials fan out across threads; traces are compared at
    // the end against trial 0
    let run_trial = |trial: usize| -> Result<oblivdsp::vm::TraceRecord, u8> {
        let k = &cfg.kernel;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(cfg.seed + trial as u64);
        let mut cube = RadarCube::zeros(
            k.frames,
            k.antennas,
            k.range_bins,
            k.chirps,
            cfg.frame_rate_hz,
            cfg.wavelength_m,
        );
        for s in cube.samples.iter_mut() {
            *s = oblivdsp::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let result = match pipeline {
            "gesture" => run_gesture(&cube, &cfg, &net, BackendChoice::ExactSim).map(|r| r.trace),
            _ => run_vitals(&cube, &cfg, BackendChoice::ExactSim).map(|r| r.trace),
        };
        result.map_err(|e| {
            eprintln!("{e}");
            pipeline_exit(&e)
        })
    };
    let workers = std::thread::available_parallelism().map_or(2, |n| n.get()).min(trials.max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let traces: std::sync::Mutex<Vec<(usize, Result<oblivdsp::vm::TraceRecord, u8>)>> =
        std::sync::Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= trials {
                    break;
                }
                let out = run_trial(i);
                traces.lock().unwrap().push((i, out));
            });
        }
    });
    let mut traces = traces.into_inner().unwrap();
    traces.sort_by_key(|(i, _)| *i);
    let mut reference: Option<oblivdsp::vm::TraceRecord> = None;
    for (trial, trace) in traces {
        let trace = trace?;
        match &reference {
            None => reference = Some(trace),
            Some(r) => {
                let cmp = r.equals(&trace);
                if !cmp.identical {
                    println!(
                        "DIVERGENT at trial {trial}: event {} ({})",
                        cmp.divergence.unwrap_or(0),
                        cmp.detail
                    );
                    return Err(EXIT_TRACE);
                }
            }
        }
    }
    println!("IDENTICAL ({trials}/{trials})");
    Ok(())
}

fn cmd_depth_audit(common: &CommonOpts, pipeline: &str) -> Result<(), u8> {
    let cfg = load_config(common, pipeline)?;
    let k = &cfg.kernel;
    let cube = RadarCube::zeros(
        k.frames,
        k.antennas,
        k.range_bins,
        k.chirps,
        cfg.frame_rate_hz,
        cfg.wavelength_m,
    );
    let (ledger, expected) = match pipeline {
        "gesture" => {
            let net = fixtures::random_fc_net(&k.fc_dims, cfg.seed);
            let run = run_gesture(&cube, &cfg, &net, BackendChoice::ExactSim).map_err(|e| {
                eprintln!("{e}");
                pipeline_exit(&e)
            })?;
            (run.report.depth_ledger, DepthLedger::gesture_expected())
        }
        _ => {
            let run = run_vitals(&cube, &cfg, BackendChoice::ExactSim).map_err(|e| {
                eprintln!("{e}");
                pipeline_exit(&e)
            })?;
            (
                run.report.depth_ledger,
                DepthLedger::vitals_expected(k.taylor_order),
            )
        }
    };
    println!("{}", ledger.to_text());
    let got = ledger.cumulative();
    if got == expected {
        println!("cumulative depths match the budget table: {got:?}");
        Ok(())
    } else {
        println!("DEPTH MISMATCH: measured {got:?}, budget table {expected:?}");
        Err(EXIT_DEPTH)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Keygen {
            common,
            pipeline,
            rotations,
        } => cmd_keygen(common, pipeline, rotations),
        Command::Synth {
            common,
            scene,
            class,
            output,
        } => cmd_synth(common, scene, *class, output),
        Command::RunVitals { common, input } => cmd_run_vitals(common, input),
        Command::RunGesture {
            common,
            input,
            weights_dir,
        } => cmd_run_gesture(common, input, weights_dir),
        Command::Fidelity { common, pipeline } => cmd_fidelity(common, pipeline),
        Command::TraceCheck {
            common,
            pipeline,
            trials,
        } => cmd_trace_check(common, pipeline, *trials),
        Command::DepthAudit { common, pipeline } => cmd_depth_audit(common, pipeline),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
