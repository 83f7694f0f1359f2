//! validate, spawn, run, serve, proxy and syssim.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::UdpSocket;
use std::path::{Path, PathBuf};

use lusim_core::config::{load_scene_document, ConfigSet};
use lusim_core::engine::Engine;
use lusim_core::gscm::{initialise, save_spawn};
use lusim_core::pipeline::{self, SetupError};
use lusim_link::{
    proxy_relay, resolve_endpoint, serve as serve_engine, EngineClient, EngineService, LogRecord, LogWriter, Relay,
    DEFAULT_ENGINE_PORT, DEFAULT_PROXY_PORT,
};
use lusim_syssim::sim::{run_system, SimError, SysPolicy};
use lusim_syssim::snr::SnrParams;
use serde::Serialize;
use serde_json::json;

use crate::{load, CmdResult, ConfigArgs, Failure};

fn setup_failure(e: SetupError) -> Failure {
    match e {
        SetupError::Config(e) => Failure::config(e.to_string()),
        other => Failure::runtime(other.to_string()),
    }
}

fn print_json(value: &impl Serialize) {
    let text = serde_json::to_string(value).expect("summaries serialize");
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    let _ = out.flush();
}

fn create_parent(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Failure::runtime(format!("{}: {e}", dir.display())))
        }
        _ => Ok(()),
    }
}

pub fn validate(args: &ConfigArgs) -> CmdResult {
    let configs = load(args)?;
    load_scene_document(&configs.scene_path()).map_err(|e| Failure::config(e.to_string()))?;
    Ok(())
}

#[derive(Serialize)]
struct SpawnSummary {
    spawned: [usize; 3],
    kept: [usize; 3],
    total: usize,
    spawn_seed: u64,
    scene_hash: String,
}

pub fn spawn(args: &ConfigArgs, out: &Path) -> CmdResult {
    let configs = load(args)?;
    let scene = pipeline::load_scene(&configs).map_err(setup_failure)?;
    let (set, report) = initialise(&scene, &configs.gscm).map_err(|e| Failure::runtime(e.to_string()))?;
    create_parent(out)?;
    std::fs::write(out, save_spawn(&set)).map_err(|e| Failure::runtime(format!("{}: {e}", out.display())))?;
    print_json(&SpawnSummary {
        spawned: report.spawned,
        kept: report.kept,
        total: set.len(),
        spawn_seed: set.spawn_seed,
        scene_hash: format!("{:016x}", set.scene_hash),
    });
    Ok(())
}

/// Meta block of a channel log: the configs as parsed, plus scene and spawn identity.
pub fn log_meta(configs: &ConfigSet, engine: &Engine) -> String {
    json!({
        "configs": {
            "gscm": configs.gscm,
            "radio": configs.radio,
            "scenario": configs.scenario,
        },
        "scene_hash": format!("{:016x}", engine.mpcs().scene_hash),
        "spawn_seed": engine.mpcs().spawn_seed,
    })
    .to_string()
}

/// Step times `k·step` for `k = 1..=n`, the last not past `duration`.
pub fn step_times(step: f64, duration: f64) -> Vec<f64> {
    let n = (duration / step + 1e-9).floor() as u64;
    (1..=n).map(|k| k as f64 * step).collect()
}

#[derive(Serialize)]
struct RunSummary {
    steps: usize,
    records: u64,
    mean_path_count: f64,
    log: Option<PathBuf>,
}

pub fn run(args: &ConfigArgs, spawn: Option<&Path>, out: Option<&Path>, duration: Option<f64>) -> CmdResult {
    let configs = load(args)?;
    let duration = duration.unwrap_or(configs.scenario.duration);
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Failure::config(format!(
            "--duration must be a non-negative number, got {duration}"
        )));
    }
    let log_path = match out {
        Some(p) => Some(p.to_path_buf()),
        None if configs.scenario.channel_logging => {
            configs.scenario.channel_log_path.as_deref().map(|p| configs.resolve(p))
        }
        None => None,
    };
    let (mut engine, _) = pipeline::prepare(&configs, spawn).map_err(setup_failure)?;
    let mut writer = match &log_path {
        Some(p) => {
            create_parent(p)?;
            let meta = log_meta(&configs, &engine);
            Some(LogWriter::create(p, &meta).map_err(|e| Failure::runtime(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    let times = step_times(configs.scenario.step, duration);
    let mut records = 0u64;
    let mut paths = 0usize;
    for &t in &times {
        engine.step_to(t).map_err(|e| Failure::runtime(e.to_string()))?;
        for h in engine.all_channels() {
            records += 1;
            paths += h.paths.len();
            if let Some(w) = writer.as_mut() {
                w.append(&LogRecord::from_realization(&h))
                    .map_err(|e| Failure::runtime(e.to_string()))?;
            }
        }
    }
    if let Some(w) = writer {
        w.finish().map_err(|e| Failure::runtime(e.to_string()))?;
    }
    print_json(&RunSummary {
        steps: times.len(),
        records,
        mean_path_count: if records == 0 {
            0.0
        } else {
            paths as f64 / records as f64
        },
        log: log_path,
    });
    Ok(())
}

fn bind(endpoint: Option<&str>, default_port: u16) -> Result<UdpSocket, Failure> {
    let addr = resolve_endpoint(endpoint, default_port).map_err(Failure::protocol)?;
    let socket = UdpSocket::bind(addr).map_err(|e| Failure::protocol(format!("cannot bind {addr}: {e}")))?;
    let local = socket.local_addr().map_err(|e| Failure::protocol(e.to_string()))?;
    print_json(&json!({ "listening": local.to_string() }));
    Ok(socket)
}

pub fn serve(args: &ConfigArgs, spawn: Option<&Path>, endpoint: Option<&str>) -> CmdResult {
    let configs = load(args)?;
    let (engine, _) = pipeline::prepare(&configs, spawn).map_err(setup_failure)?;
    let socket = bind(endpoint, DEFAULT_ENGINE_PORT)?;
    let mut service = EngineService::new(engine);
    serve_engine(&mut service, &socket).map_err(|e| Failure::protocol(e.to_string()))?;
    let engine = service.engine();
    print_json(&json!({ "time": engine.time(), "time_changes": engine.time_changes() }));
    Ok(())
}

pub fn proxy(endpoint: Option<&str>, engine: Option<&str>) -> CmdResult {
    let mut relay = match engine {
        Some(text) => {
            // Only the listen side honours LUSIM_ENDPOINT; the engine address is taken as given.
            let addr =
                lusim_link::resolve_endpoint_from(None, Some(text), DEFAULT_ENGINE_PORT).map_err(Failure::config)?;
            Relay::with_peer_b(addr)
        }
        None => Relay::new(),
    };
    let socket = bind(endpoint, DEFAULT_PROXY_PORT)?;
    let counters = proxy_relay(&socket, &mut relay).map_err(|e| Failure::protocol(e.to_string()))?;
    print_json(&json!({
        "a_to_b": counters.a_to_b,
        "b_to_a": counters.b_to_a,
        "dropped": counters.dropped,
    }));
    Ok(())
}

fn read_policy(path: Option<&Path>) -> Result<SysPolicy, Failure> {
    let Some(path) = path else {
        return Ok(SysPolicy::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

pub fn syssim(
    args: &ConfigArgs,
    endpoint: Option<&str>,
    policy: Option<&Path>,
    out: Option<&Path>,
    shutdown: bool,
) -> CmdResult {
    let configs = load(args)?;
    let policy = read_policy(policy)?;
    let results = out
        .map(Path::to_path_buf)
        .or_else(|| configs.scenario.results_path.as_deref().map(|p| configs.resolve(p)))
        .ok_or_else(|| Failure::config("no results path: pass --out or set results_path in the scenario"))?;
    let addr = resolve_endpoint(endpoint, DEFAULT_ENGINE_PORT).map_err(Failure::config)?;
    let client = EngineClient::connect(addr).map_err(|e| Failure::protocol(format!("{addr}: {e}")))?;
    create_parent(&results)?;
    let file = File::create(&results).map_err(|e| Failure::runtime(format!("{}: {e}", results.display())))?;
    let radio = SnrParams {
        tx_power: configs.radio.tx_power,
        noise_power: configs.radio.noise_power,
    };
    let (summary, mut client) = run_system(
        client,
        &policy,
        radio,
        configs.scenario.step,
        configs.scenario.duration,
        BufWriter::new(file),
    )
    .map_err(|e| match e {
        SimError::Engine(_) | SimError::Kernel(_) => Failure::protocol(e.to_string()),
        SimError::Policy(_) | SimError::Strategy(_) => Failure::config(e.to_string()),
        other => Failure::runtime(other.to_string()),
    })?;
    if shutdown {
        client.shutdown().map_err(|e| Failure::protocol(e.to_string()))?;
    }
    print_json(&summary);
    Ok(())
}
