use pinch_core::rates::{evaluate, Assignment, PowerAllocation};
use pinch_core::scenario::PinchConfiguration;
use pinch_core::search::{
    alternating_joint, brute_force_evaluations, coordinate_grid, default_power_levels, format_duration, grid_evaluations,
    rate_objective, time_estimate, AlternatingOptions, Objective, SearchResult, SearchSpace,
};

use super::{emit, workers};
use crate::cli::{usage, Command, Common, Method, ObjectiveArg, ScenarioArgs};
use crate::error::SimResult;
use crate::io::resolve_scenario;
use crate::parallel::parallel_brute_force;
use crate::row;
use crate::table::{list, num, Table};

pub fn validate(scenario: &ScenarioArgs, common: &Common) -> SimResult<Vec<String>> {
    let config = resolve_scenario(scenario.config.as_deref(), scenario.scenario.as_deref(), common.seed)?;
    println!(
        "valid: {} waveguide(s), {} user(s), {} obstacle(s)",
        config.waveguides.len(),
        config.users.len(),
        config.obstacles.len()
    );
    Ok(Vec::new())
}

pub fn simulate(scenario: &ScenarioArgs, coords: Option<&[f64]>, common: &Common) -> SimResult<Vec<String>> {
    let config = resolve_scenario(scenario.config.as_deref(), scenario.scenario.as_deref(), common.seed)?;
    let pinch = match coords {
        Some(c) if c.len() != config.waveguides.len() => {
            return Err(usage(format!("--coords needs {} value(s)", config.waveguides.len())));
        }
        Some(c) => PinchConfiguration::single(c),
        None => config.pinch.clone().unwrap_or_else(|| PinchConfiguration::midpoints(&config)),
    };
    let assignment = Assignment::nearest(&config);
    let power = PowerAllocation::equal_split(&config, &assignment);
    let report = evaluate(&config, &pinch, &power, &assignment)?;
    let mut table = Table::new(&["user", "waveguide", "x", "y", "z", "power", "rate", "qos_min_rate", "qos_met"]);
    for (k, u) in config.users.iter().enumerate() {
        let rate = report.per_user[k];
        table.push(row![
            u.id,
            assignment.0[k],
            num(u.position.x),
            num(u.position.y),
            num(u.position.z),
            num(power.per_user[k]),
            num(rate),
            num(u.qos_min_rate),
            rate >= u.qos_min_rate
        ]);
    }
    println!(
        "sum rate {} bps/Hz, min rate {} bps/Hz, energy efficiency {} bps/Hz/W",
        report.sum_rate, report.min_rate, report.energy_efficiency
    );
    let mut files = Vec::new();
    emit(&common.out, "rates.csv", &table, &mut files)?;
    Ok(files)
}

fn objective(arg: ObjectiveArg, mu: f64) -> Objective {
    match arg {
        ObjectiveArg::SumRate => Objective::SumRate,
        ObjectiveArg::MinRate => Objective::MinRate,
        ObjectiveArg::EnergyEfficiency => Objective::EnergyEfficiency,
        ObjectiveArg::Penalized => Objective::Penalized { mu },
    }
}

pub fn optimize(command: &Command) -> SimResult<Vec<String>> {
    let Command::Optimize { scenario, method, objective: obj, mu, passes, budget, pas_per_waveguide, power_levels, common } = command
    else {
        unreachable!()
    };
    let config = resolve_scenario(scenario.config.as_deref(), scenario.scenario.as_deref(), common.seed)?;
    if !(*budget >= 1.0) {
        return Err(usage("--budget must be at least 1"));
    }
    let objective = objective(*obj, *mu);
    let assignment = Assignment::nearest(&config);
    let power = PowerAllocation::equal_split(&config, &assignment);
    let space = SearchSpace::with_pas_per_waveguide(&config, *pas_per_waveguide);
    let result: SearchResult = match method {
        Method::Brute => parallel_brute_force(
            &space,
            || rate_objective(&config, objective, &power, &assignment),
            *budget as u128,
            workers(common),
        )?,
        Method::Grid => coordinate_grid(&space, rate_objective(&config, objective, &power, &assignment), *passes, None)?,
        Method::Alternating => {
            let max = config.waveguides.iter().map(|w| w.tx_power).fold(0.0, f64::max);
            let opts = AlternatingOptions { pas_per_waveguide: *pas_per_waveguide, passes: *passes, ..Default::default() };
            alternating_joint(&config, &default_power_levels(max, *power_levels), opts)?
        }
    };
    let method_name = match method {
        Method::Brute => "brute_force",
        Method::Grid => "coordinate_grid",
        Method::Alternating => "alternating",
    };
    let objective_name = match method {
        Method::Alternating => "energy_efficiency",
        _ => match obj {
            ObjectiveArg::SumRate => "sum_rate",
            ObjectiveArg::MinRate => "min_rate",
            ObjectiveArg::EnergyEfficiency => "energy_efficiency",
            ObjectiveArg::Penalized => "penalized",
        },
    };
    let coords: Vec<f64> = (0..config.waveguides.len()).flat_map(|w| result.best.active(w).collect::<Vec<_>>()).collect();
    let mut table = Table::new(&[
        "method",
        "objective",
        "seed",
        "value",
        "evaluations",
        "passes",
        "est_time_seconds",
        "coords",
        "power",
        "trace",
    ]);
    table.push(row![
        method_name,
        objective_name,
        common.seed,
        num(result.best_value),
        result.evaluations,
        result.passes,
        num(result.est_time_seconds),
        list(&coords),
        result.power.as_deref().map(list).unwrap_or_default(),
        list(&result.trace)
    ]);
    println!("{method_name}: {objective_name} = {} after {} evaluations", result.best_value, result.evaluations);
    let mut files = Vec::new();
    emit(&common.out, "optimize.csv", &table, &mut files)?;
    Ok(files)
}

/// One row per complexity-table line: four search settings and a single
/// forward pass of a trained model.
pub fn benchmark_table(tau_ms: f64) -> SimResult<Table> {
    if !(tau_ms > 0.0 && tau_ms.is_finite()) {
        return Err(usage("--tau-ms must be positive"));
    }
    let mut table = Table::new(&["method", "N", "K", "passes", "evaluations", "est_time_seconds", "est_time"]);
    let mut push = |method: &str, n: String, k: String, passes: u64, evals: u64| {
        let t = time_estimate(evals, tau_ms);
        table.push(row![method, n, k, passes, evals, num(t), format_duration(t)]);
    };
    for (n, k) in [(20u64, 6u32), (30, 4), (30, 8)] {
        let evals = brute_force_evaluations(n, k).expect("table sizes fit in u64");
        push("brute_force", n.to_string(), k.to_string(), 0, evals);
    }
    push("coordinate_grid", "20".into(), "6".into(), 3, grid_evaluations(3, 6, 20));
    push("deep_learning", String::new(), String::new(), 0, 1);
    Ok(table)
}

pub fn benchmark(tau_ms: f64, common: &Common) -> SimResult<Vec<String>> {
    let table = benchmark_table(tau_ms)?;
    let mut files = Vec::new();
    emit(&common.out, "benchmark.csv", &table, &mut files)?;
    print!("{}", String::from_utf8_lossy(&table.to_bytes()?));
    Ok(files)
}
