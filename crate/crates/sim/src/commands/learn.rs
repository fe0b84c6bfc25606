use pinch_core::agents::supervised::{evaluate_positioner, sample_instances, train_positioner};
use pinch_core::agents::{train_ddpg, train_dqn, train_maddpg, train_madqn, AgentConfig, CurvePoint, PinchEnv};
use pinch_core::neural::TrainConfig;
use pinch_core::presets::{self, ScenarioId};
use pinch_core::rng::derive_seed;

use super::emit;
use crate::cli::{AgentArg, Command};
use crate::error::SimResult;
use crate::io::{read_json, save_checkpoint, Checkpoint};
use crate::row;
use crate::table::{num, Table};

fn resolve_agent(agent: AgentArg, id: ScenarioId) -> AgentArg {
    match (agent, id) {
        (AgentArg::Auto, ScenarioId::A) => AgentArg::Supervised,
        (AgentArg::Auto, ScenarioId::B) => AgentArg::Dqn,
        (AgentArg::Auto, ScenarioId::C) => AgentArg::Ddpg,
        (AgentArg::Auto, ScenarioId::D | ScenarioId::E) => AgentArg::Madqn,
        (AgentArg::Auto, ScenarioId::F) => AgentArg::Maddpg,
        (a, _) => a,
    }
}

fn agent_name(a: AgentArg) -> &'static str {
    match a {
        AgentArg::Auto => "auto",
        AgentArg::Supervised => "supervised",
        AgentArg::Dqn => "dqn",
        AgentArg::Madqn => "madqn",
        AgentArg::Ddpg => "ddpg",
        AgentArg::Maddpg => "maddpg",
    }
}

fn curve_table(curve: &[CurvePoint]) -> Table {
    let mut t = Table::new(&["episode", "mean_reward", "eval_rate", "oracle_ratio"]);
    for p in curve {
        t.push(row![p.episode, num(p.mean_reward), num(p.eval_rate), num(p.oracle_ratio)]);
    }
    t
}

pub fn train(command: &Command) -> SimResult<Vec<String>> {
    let Command::Train { scenario, config, agent, episodes, instances, test_instances, epochs, common } = command else {
        unreachable!()
    };
    let id: ScenarioId = scenario.parse()?;
    let mut cfg: AgentConfig = match config {
        Some(path) => read_json(path)?,
        None => AgentConfig::default(),
    };
    cfg.seed = common.seed;
    cfg.validate()?;
    let agent = resolve_agent(*agent, id);
    let name = agent_name(agent);
    let mut files = Vec::new();
    let mut checkpoint = Checkpoint::new(name, &id.to_string(), common.seed, Vec::new());
    let curve = match agent {
        AgentArg::Supervised => {
            let train_set = sample_instances(*instances, derive_seed(common.seed, "train/instances"))?;
            let test_set = sample_instances(*test_instances, derive_seed(common.seed, "train/held_out"))?;
            let tc = TrainConfig { lr: cfg.lr, batch: cfg.batch, epochs: *epochs, seed: common.seed, ..Default::default() };
            let (positioner, losses) = train_positioner(&train_set, &cfg.hidden, &tc)?;
            let report = evaluate_positioner(&positioner, &test_set)?;
            let mut detail = Table::new(&["instance", "ratio", "label"]);
            for (i, (r, s)) in report.ratios.iter().zip(&test_set).enumerate() {
                detail.push(row![i, num(*r), num(s.label)]);
            }
            emit(&common.out, "positioner.csv", &detail, &mut files)?;
            println!(
                "median rate ratio {} over {} held-out instances, mean coordinate error {} m, {} forward passes",
                report.median_ratio, report.instances, report.mean_coordinate_error, report.forward_passes
            );
            checkpoint.models.push(positioner.model.clone());
            let last = losses.len().saturating_sub(1);
            losses
                .iter()
                .enumerate()
                .map(|(e, l)| CurvePoint {
                    episode: e,
                    mean_reward: -l,
                    eval_rate: f64::NAN,
                    oracle_ratio: if e == last { report.median_ratio } else { f64::NAN },
                })
                .collect()
        }
        AgentArg::Dqn | AgentArg::Madqn => {
            let mut env = PinchEnv::new(presets::scenario(id, common.seed), &cfg)?;
            let out = if agent == AgentArg::Dqn { train_dqn(&mut env, &cfg, *episodes)? } else { train_madqn(&mut env, &cfg, *episodes)? };
            checkpoint.models = out.policy.nets.clone();
            checkpoint.observations = out.policy.observations.clone();
            out.curve
        }
        AgentArg::Ddpg | AgentArg::Maddpg | AgentArg::Auto => {
            let mut env = PinchEnv::new(presets::scenario(id, common.seed), &cfg)?;
            let out = if agent == AgentArg::Ddpg { train_ddpg(&mut env, &cfg, *episodes)? } else { train_maddpg(&mut env, &cfg, *episodes)? };
            checkpoint.models = out.policy.actors.clone();
            checkpoint.observations = out.policy.observations.clone();
            checkpoint.bounds = out.policy.bounds.clone();
            out.curve
        }
    };
    if let Some(p) = curve.last() {
        println!("{name} on scenario {id}: final oracle ratio {}", p.oracle_ratio);
    }
    emit(&common.out, "curve.csv", &curve_table(&curve), &mut files)?;
    save_checkpoint(&common.out.join("checkpoint.json"), &checkpoint)?;
    files.push("checkpoint.json".into());
    Ok(files)
}
