use std::path::Path;

use pinch_core::agents::{train_maddpg, AgentConfig, PinchEnv};
use pinch_core::edgeai::aircomp::AirCompConfig;
use pinch_core::edgeai::mobility::MobilityOptions;
use pinch_core::edgeai::{aircomp_with_pa, fl_run, hotspot_schedule, mobility_track, FlConfig, HotspotPolicy, Scheme, TrafficMap, Tracking};
use pinch_core::presets::{edge_layout, hotspot_layout, mobility_layout};
use pinch_core::scenario::ScenarioConfig;
use serde::de::DeserializeOwned;

use super::{emit, workers};
use crate::cli::{Command, TrackingArg};
use crate::error::SimResult;
use crate::io::{load_scenario, read_json};
use crate::parallel::map_ordered;
use crate::row;
use crate::table::{list, num, Table};

fn options<T: DeserializeOwned + Default>(path: Option<&Path>) -> SimResult<T> {
    path.map_or_else(|| Ok(T::default()), read_json)
}

fn layout(path: Option<&Path>, fallback: fn() -> ScenarioConfig) -> SimResult<ScenarioConfig> {
    path.map_or_else(|| Ok(fallback()), load_scenario)
}

pub fn fl(command: &Command) -> SimResult<Vec<String>> {
    let Command::Fl { config, layout: lay, schemes, replicates, common } = command else { unreachable!() };
    let fl: FlConfig = options(config.as_deref())?;
    let devices = layout(lay.as_deref(), edge_layout)?;
    fl.validate(devices.users.len())?;
    let runs: Vec<(u64, Scheme)> = (0..*replicates)
        .flat_map(|r| schemes.iter().map(move |&s| (common.seed.wrapping_add(r), Scheme::from(s))))
        .collect();
    let results = map_ordered(&runs, workers(common), |&(seed, scheme)| fl_run(&devices, &fl, scheme, seed));
    let mut table = Table::new(&["round", "scheme", "seed", "accuracy", "round_seconds", "dropped", "rescued"]);
    for (&(seed, scheme), result) in runs.iter().zip(results) {
        let run = result?;
        for log in &run.logs {
            table.push(row![log.round + 1, scheme.name(), seed, num(log.accuracy), num(log.round_seconds), log.dropped, log.rescued]);
        }
        println!("{} seed {seed}: final accuracy {}", scheme.name(), run.final_accuracy());
    }
    let mut files = Vec::new();
    emit(&common.out, "fl.csv", &table, &mut files)?;
    Ok(files)
}

pub fn aircomp(command: &Command) -> SimResult<Vec<String>> {
    let Command::Aircomp { config, layout: lay, common } = command else { unreachable!() };
    let ac: AirCompConfig = options(config.as_deref())?;
    let devices = layout(lay.as_deref(), edge_layout)?;
    let mut table = Table::new(&["scheme", "seed", "mse_analytic", "mse_empirical", "std_error", "pa_coords"]);
    for r in aircomp_with_pa(&devices, &ac, common.seed)? {
        table.push(row![r.scheme.name(), common.seed, num(r.mse_analytic), num(r.mse_empirical), num(r.std_error), list(&r.pa_coords)]);
        println!("{}: analytic MSE {}, Monte Carlo {} ± {}", r.scheme.name(), r.mse_analytic, r.mse_empirical, r.std_error);
    }
    let mut files = Vec::new();
    emit(&common.out, "aircomp.csv", &table, &mut files)?;
    Ok(files)
}

pub fn hotspot(command: &Command) -> SimResult<Vec<String>> {
    let Command::Hotspot { config, layout: lay, slots, policies, common } = command else { unreachable!() };
    let users_layout = layout(lay.as_deref(), hotspot_layout)?;
    let users = users_layout.users.len();
    let traffic = match config {
        Some(path) => read_json(path)?,
        None => TrafficMap::moving_hotspot(users, *slots, 1.0, 6.0, 0, users.saturating_sub(1)),
    };
    traffic.validate(users)?;
    let mut table = Table::new(&["slot", "policy", "seed", "coords", "min_rate", "served_load"]);
    for &p in policies {
        let policy = HotspotPolicy::from(p);
        for s in hotspot_schedule(&users_layout, &traffic, policy)? {
            table.push(row![s.slot, policy.name(), common.seed, list(&s.coords), num(s.min_rate), num(s.served_load)]);
        }
    }
    let mut files = Vec::new();
    emit(&common.out, "hotspot.csv", &table, &mut files)?;
    Ok(files)
}

pub fn mobility(command: &Command) -> SimResult<Vec<String>> {
    let Command::Mobility { config, layout: lay, agent_config, tracking, episodes, common } = command else { unreachable!() };
    let opts: MobilityOptions = options(config.as_deref())?;
    let walkers = layout(lay.as_deref(), mobility_layout)?;
    let mut ticks = Table::new(&["tick", "tracking", "seed", "time", "user", "x", "y", "serving", "rate", "outage", "coords"]);
    let mut summary = Table::new(&["tracking", "seed", "outage_fraction", "handovers", "staleness"]);
    for &t in tracking {
        let learned;
        let mut cfg: AgentConfig = options(agent_config.as_deref())?;
        let mode = match t {
            TrackingArg::None => Tracking::None,
            TrackingArg::Grid => Tracking::Grid,
            TrackingArg::Ddpg => {
                cfg.seed = common.seed;
                cfg.horizon = opts.ticks;
                cfg.tick_seconds = opts.tick_seconds;
                let mut env = PinchEnv::new(walkers.clone(), &cfg)?;
                learned = train_maddpg(&mut env, &cfg, *episodes)?.policy;
                Tracking::Policy(&learned, &cfg)
            }
        };
        let report = mobility_track(&walkers, mode, &opts)?;
        for k in &report.ticks {
            ticks.push(row![
                k.tick,
                mode.name(),
                common.seed,
                num(k.time),
                k.user,
                num(k.position.x),
                num(k.position.y),
                k.serving,
                num(k.rate),
                k.outage,
                list(&k.coords)
            ]);
        }
        summary.push(row![mode.name(), common.seed, num(report.outage_fraction), report.handovers, report.staleness]);
        println!("{}: outage {}, handovers {}, staleness {}", mode.name(), report.outage_fraction, report.handovers, report.staleness);
    }
    let mut files = Vec::new();
    emit(&common.out, "mobility.csv", &ticks, &mut files)?;
    emit(&common.out, "mobility_summary.csv", &summary, &mut files)?;
    Ok(files)
}
