//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! with its measurement and wall time against the allowed limit.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pinch_core::agents::dqn::evaluate_discrete;
use pinch_core::agents::supervised::{evaluate_positioner, sample_instances, train_positioner};
use pinch_core::agents::{oracle_trace, train_dqn, AgentConfig, PinchEnv};
use pinch_core::edgeai::{fl_run, AirCompSetup, FlConfig, Scheme};
use pinch_core::geometry::Aabb;
use pinch_core::neural::{gradient_check, Loss, MlpModel, TrainConfig};
use pinch_core::presets::{ceiling_guide, edge_layout, room, ScenarioId, DEVICE_HEIGHT};
use pinch_core::propagation::{los_blocked, pa_point};
use pinch_core::rates::{multi_waveguide_sinr, noma_rates, Assignment, PowerAllocation};
use pinch_core::rng::{rng_stream, StreamRng};
use pinch_core::scenario::{AccessMode, PinchConfiguration, RadioConstants, ScenarioConfig, User};
use pinch_core::search::{brute_force, coordinate_grid, rate_objective, Objective, SearchSpace, DEFAULT_BUDGET};
use pinch_core::Point3;
use pinch_sim::parallel::{available_workers, map_ordered};
use rand::Rng;

/// Runs `check`, prints its verdict line and fails the test unless the
/// check held within `limit`.
fn criterion(name: &str, limit: Duration, check: impl FnOnce() -> (bool, String)) {
    let start = Instant::now();
    let (held, detail) = check();
    let elapsed = start.elapsed();
    let passed = held && elapsed < limit;
    let verdict = if passed { "PASS" } else { "FAIL" };
    let line = format!("[{verdict}] {name}: {detail} ({elapsed:.2?}, limit {limit:?})");
    // Written past the harness capture so the verdict always shows.
    writeln!(std::io::stdout().lock(), "{line}").unwrap();
    assert!(passed, "{line}");
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn pinch(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pinch")).args(args).output().expect("binary runs")
}

fn scenario_shell(waveguides: Vec<pinch_core::scenario::Waveguide>, users: Vec<User>, mode: AccessMode) -> ScenarioConfig {
    let radio = RadioConstants::default();
    ScenarioConfig {
        room: room(10.0, 10.0),
        waveguides,
        users,
        obstacles: Vec::new(),
        radio,
        min_spacing: radio.wavelength_m / 2.0,
        access_mode: mode,
        seed: 0,
        circuit_power: 1.0,
        pinch: None,
    }
}

fn random_user(rng: &mut StreamRng, id: u32) -> User {
    User::fixed(id, Point3::new(rng.random_range(0.3..9.7), rng.random_range(0.3..9.7), DEVICE_HEIGHT))
}

#[test]
fn complexity_table() {
    criterion("complexity table counts and times", Duration::from_secs(1), || {
        let dir = tempfile::tempdir().unwrap();
        let o = pinch(&["benchmark", "--out", dir.path().to_str().unwrap()]);
        if !o.status.success() {
            return (false, String::from_utf8_lossy(&o.stderr).into_owned());
        }
        let mut reader = csv::Reader::from_path(dir.path().join("benchmark.csv")).unwrap();
        let rows: Vec<(String, String)> = reader
            .records()
            .map(|r| {
                let r = r.unwrap();
                (r[4].to_string(), r[6].to_string())
            })
            .collect();
        let expected = [
            ("64000000", "≈17.8 h"),
            ("810000", "≈13.5 min"),
            ("656100000000", "≈20.8 yr"),
            ("360", "0.36 s"),
        ];
        let held = expected.iter().all(|(n, t)| rows.iter().any(|(a, b)| a == n && b == t));
        (held, format!("{rows:?}"))
    });
}

fn small_instance(rng: &mut StreamRng) -> ScenarioConfig {
    let k = rng.random_range(1..=2usize);
    let n = rng.random_range(2..=10usize);
    let mode = match (k, rng.random_range(0..2)) {
        (1, 0) => AccessMode::Oma,
        (1, _) => AccessMode::Noma,
        _ => AccessMode::MultiWaveguide,
    };
    let users = (0..rng.random_range(1..=3)).map(|i| random_user(rng, i)).collect();
    let guides = (0..k).map(|w| ceiling_guide(w as u32, 3.0 + 4.0 * w as f64, 10.0, n)).collect();
    let mut config = scenario_shell(guides, users, mode);
    let c = Point3::new(rng.random_range(1.0..9.0), rng.random_range(1.0..9.0), 0.0);
    let pillar = Aabb::new(Point3::new(c.x - 0.4, c.y - 0.4, 0.0), Point3::new(c.x + 0.4, c.y + 0.4, 2.5));
    if config.users.iter().all(|u| !pillar.contains(u.position)) {
        config.obstacles.push(pillar);
    }
    config
}

#[test]
fn oracle_dominance() {
    criterion("oracle dominance brute >= grid >= random", Duration::from_secs(120), || {
        let mut rng = rng_stream(2024, "acceptance/oracle");
        let mut failures = Vec::new();
        for i in 0..50 {
            let config = small_instance(&mut rng);
            let assignment = Assignment::nearest(&config);
            let power = PowerAllocation::equal_split(&config, &assignment);
            let space = SearchSpace::one_per_waveguide(&config);
            let objective = || rate_objective(&config, Objective::SumRate, &power, &assignment);
            let exact = brute_force(&space, objective(), DEFAULT_BUDGET).unwrap().best_value;
            let grid = coordinate_grid(&space, objective(), 3, None).unwrap().best_value;
            // Expected objective of a uniformly random placement.
            let sizes: Vec<usize> = space.slots.iter().map(|s| s.candidates.len()).collect();
            let total: usize = sizes.iter().product();
            let mut f = objective();
            let mut sum = 0.0;
            for flat in 0..total {
                let mut rest = flat;
                let mut idx = vec![0; sizes.len()];
                for (slot, &n) in sizes.iter().enumerate().rev() {
                    idx[slot] = rest % n;
                    rest /= n;
                }
                sum += f(&space.configuration(&idx));
            }
            let random = sum / total as f64;
            if !(exact >= grid && grid >= random) {
                failures.push(format!("#{i}: {exact} / {grid} / {random}"));
            }
        }
        (failures.is_empty(), format!("50 instances, violations {failures:?}"))
    });
}

/// Smallest `|z|` over hidden pre-activations.
fn kink_margin(model: &MlpModel, xs: &[Vec<f64>]) -> f64 {
    let mut margin = f64::INFINITY;
    for x in xs {
        let trace = model.forward_trace(x).unwrap();
        for l in 0..model.layer_count() - 1 {
            let (wo, bo) = model.layer_offsets(l);
            let input = &trace.activations[l];
            for j in 0..trace.activations[l + 1].len() {
                let row = &model.params[wo + j * input.len()..wo + (j + 1) * input.len()];
                margin = margin.min(row.iter().zip(input).fold(model.params[bo + j], |acc, (w, a)| acc + w * a).abs());
            }
        }
    }
    margin
}

#[test]
fn gradient_correctness() {
    criterion("backprop vs central differences", Duration::from_secs(10), || {
        let mut rng = rng_stream(7, "acceptance/gradients");
        let mut worst = 0.0f64;
        for i in 0..20 {
            let loss = [Loss::Mse, Loss::Huber, Loss::CrossEntropy][i % 3];
            let mut sizes = vec![rng.random_range(1..=6)];
            for _ in 0..rng.random_range(1..=3) {
                sizes.push(rng.random_range(2..=16));
            }
            let outputs = rng.random_range(2..=4);
            sizes.push(outputs);
            let (model, xs) = loop {
                let mut model = MlpModel::new(&sizes, rng.random()).unwrap();
                for p in &mut model.params {
                    *p += rng.random_range(-0.1..0.1);
                }
                let xs: Vec<Vec<f64>> =
                    (0..8).map(|_| (0..sizes[0]).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
                model.fit_normalization(&xs).unwrap();
                if kink_margin(&model, &xs) > 1e-3 {
                    break (model, xs);
                }
            };
            let ts: Vec<Vec<f64>> = (0..xs.len())
                .map(|j| match loss {
                    Loss::CrossEntropy => (0..outputs).map(|c| if c == j % outputs { 1.0 } else { 0.0 }).collect(),
                    _ => (0..outputs).map(|_| rng.random_range(-1.5..1.5)).collect(),
                })
                .collect();
            worst = worst.max(gradient_check(&model, &xs, &ts, loss, 1e-5).unwrap());
        }
        (worst < 1e-4, format!("20 networks, max relative error {worst:.3e}"))
    });
}

#[test]
fn noma_identity() {
    criterion("equal-gain NOMA sum rate identity", Duration::from_secs(1), || {
        let mut rng = rng_stream(3, "acceptance/noma");
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let g = 10f64.powf(rng.random_range(-9.0..-3.0));
            let p = [rng.random_range(1e-3..1.0), rng.random_range(1e-3..1.0)];
            let noise = 10f64.powf(rng.random_range(-12.0..-9.0));
            let out = noma_rates([g, g], p, noise);
            let capacity = (1.0 + (p[0] + p[1]) * g / noise).log2();
            worst = worst.max(((out.rates[0] + out.rates[1]) - capacity).abs() / capacity);
        }
        (worst <= 1e-12, format!("1000 draws, max relative error {worst:.3e}"))
    });
}

#[test]
fn interference_suppression_invariant() {
    criterion("blocking cross paths never lowers SINR", Duration::from_secs(30), || {
        let mut rng = rng_stream(9, "acceptance/interference");
        let (mut checked, mut strict, mut violations) = (0, 0, 0);
        while checked < 1000 {
            let k = rng.random_range(2..=3usize);
            let guides =
                (0..k).map(|w| ceiling_guide(w as u32, 1.0 + 8.0 * (w as f64 + rng.random_range(0.1..0.9)) / k as f64, 10.0, 10)).collect();
            let users = (0..rng.random_range(k..=k + 2)).map(|i| random_user(&mut rng, i as u32)).collect();
            let mut config = scenario_shell(guides, users, AccessMode::MultiWaveguide);
            let coords: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..10.0)).collect();
            let pinch = PinchConfiguration::single(&coords);
            let c = Point3::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), rng.random_range(0.5..2.5));
            let h = Point3::new(rng.random_range(0.05..2.0), rng.random_range(0.05..2.0), rng.random_range(0.2..1.5));
            let obstacle = Aabb::new(c - h, c + h);
            let assignment = Assignment::nearest(&config);
            let serving_blocked = config.users.iter().enumerate().any(|(u, user)| {
                let w = assignment.0[u];
                obstacle.contains(user.position)
                    || los_blocked(pa_point(&config.waveguides[w], coords[w]).unwrap(), user.position, &[obstacle])
            });
            if serving_blocked {
                continue;
            }
            let power = PowerAllocation::equal_split(&config, &assignment);
            let before = multi_waveguide_sinr(&config, &pinch, &assignment, &power).unwrap();
            config.obstacles.push(obstacle);
            let after = multi_waveguide_sinr(&config, &pinch, &assignment, &power).unwrap();
            if after.iter().zip(&before).any(|(a, b)| a < b) {
                violations += 1;
            }
            if after.iter().zip(&before).any(|(a, b)| a > b) {
                strict += 1;
            }
            checked += 1;
        }
        (violations == 0, format!("1000 geometries, {violations} violations, {strict} with a strict gain"))
    });
}

#[test]
fn dqn_desk_scale() {
    criterion("DQN scenario (b) within 95% of the optimum", Duration::from_secs(600), || {
        let seeds: Vec<u64> = (0..10).collect();
        let ratios = map_ordered(&seeds, available_workers(), |&seed| {
            let cfg = AgentConfig { seed, ..Default::default() };
            let mut env = PinchEnv::from_scenario(ScenarioId::B, seed, &cfg).unwrap();
            let out = train_dqn(&mut env, &cfg, 300).unwrap();
            let oracle = oracle_trace(&env).unwrap();
            evaluate_discrete(&mut env, &out.policy, &oracle).unwrap().2
        });
        let hits = ratios.iter().filter(|&&r| r >= 0.95).count();
        (hits >= 8, format!("{hits}/10 seeds at >= 0.95 after 300 episodes, ratios {ratios:.4?}"))
    });
}

#[test]
fn supervised_positioner() {
    let train_set = sample_instances(2000, 1).unwrap();
    let test_set = sample_instances(500, 2).unwrap();
    criterion("supervised positioner on held-out NOMA instances", Duration::from_secs(300), || {
        let cfg = TrainConfig { lr: 1e-3, batch: 32, epochs: 200, seed: 0, ..Default::default() };
        let start = Instant::now();
        let (positioner, _) = train_positioner(&train_set, &[64, 64], &cfg).unwrap();
        let training = start.elapsed();
        let report = evaluate_positioner(&positioner, &test_set).unwrap();
        let held = report.median_ratio >= 0.95 && report.forward_passes == 500;
        (
            held,
            format!(
                "median ratio {:.4} over {} instances, {} forward passes, trained in {training:.2?}",
                report.median_ratio, report.instances, report.forward_passes
            ),
        )
    });
}

#[test]
fn federated_learning_ordering() {
    criterion("FL accuracy ordering across schemes", Duration::from_secs(900), || {
        let config = edge_layout();
        let fl = FlConfig::default();
        let jobs: Vec<(u64, Scheme)> = (0..10).flat_map(|s| Scheme::ALL.map(|scheme| (s, scheme))).collect();
        let acc = map_ordered(&jobs, available_workers(), |&(seed, scheme)| {
            fl_run(&config, &fl, scheme, seed).unwrap().final_accuracy()
        });
        let by = |i: usize| -> Vec<f64> { acc.iter().skip(i).step_by(3).copied().collect() };
        let (none, fixed, opt) = (by(0), by(1), by(2));
        let wins = opt.iter().zip(&none).filter(|(o, n)| o > n).count();
        let (m0, m1, m2) = (median(none), median(fixed), median(opt));
        let held = m2 >= m1 && m1 >= m0 && m2 > m0 && wins >= 8;
        (held, format!("medians NO_PA {m0:.4} FIXED_PA {m1:.4} OPTIMIZED_PA {m2:.4}, OPT > NO in {wins}/10 seeds"))
    });
}

#[test]
fn aircomp_consistency() {
    criterion("AirComp analytic vs Monte Carlo MSE", Duration::from_secs(60), || {
        let mut rng = rng_stream(17, "acceptance/aircomp");
        let mut worst = 0.0f64;
        for i in 0..20 {
            let k = rng.random_range(2..=12);
            let gains: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-2.0..0.0))).collect();
            let setup = AirCompSetup::channel_inversion(
                gains,
                rng.random_range(0.02..0.5),
                rng.random_range(0.05..1.0),
                rng.random_range(0.01..0.5),
                rng.random_range(0.5..2.0),
            );
            let analytic = setup.analytic_mse().unwrap();
            let (mc, se) = setup.monte_carlo_mse(100_000, i).unwrap();
            worst = worst.max((mc - analytic).abs() / se);
        }
        (worst <= 3.0, format!("20 setups, worst deviation {worst:.2} standard errors"))
    });
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn determinism() {
    criterion("byte-identical CSVs on repeated runs", Duration::from_secs(1200), || {
        let root = tempfile::tempdir().unwrap();
        let fl_config = root.path().join("fl.json");
        std::fs::write(&fl_config, r#"{"rounds": 3, "samples_per_device": 80, "test_samples": 400}"#).unwrap();
        let fl_config = fl_config.to_str().unwrap().to_string();
        let commands: Vec<Vec<&str>> = vec![
            vec!["simulate", "--scenario", "d", "--seed", "3"],
            vec!["optimize", "--scenario", "e", "--method", "brute", "--seed", "3"],
            vec!["optimize", "--scenario", "d", "--method", "alternating", "--objective", "energy-efficiency", "--seed", "3"],
            vec!["benchmark"],
            vec!["train", "--scenario", "b", "--episodes", "20", "--seed", "3"],
            vec!["train", "--scenario", "a", "--instances", "200", "--test-instances", "50", "--epochs", "5", "--seed", "3"],
            vec!["train", "--scenario", "f", "--episodes", "3", "--seed", "3"],
            vec!["fl", "--config", &fl_config, "--replicates", "2", "--seed", "3"],
            vec!["aircomp", "--seed", "3"],
            vec!["hotspot", "--seed", "3"],
            vec!["mobility", "--tracking", "none,grid,ddpg", "--episodes", "5", "--seed", "3"],
        ];
        let mut mismatched = Vec::new();
        let mut compared = 0;
        for (i, args) in commands.iter().enumerate() {
            let outputs: Vec<Vec<(String, Vec<u8>)>> = (0..2)
                .map(|run| {
                    let out = root.path().join(format!("{i}-{run}"));
                    let mut full = args.clone();
                    full.extend(["--out", out.to_str().unwrap()]);
                    let o = pinch(&full);
                    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
                    csv_files(&out)
                })
                .collect();
            compared += outputs[0].len();
            if outputs[0].is_empty() || outputs[0] != outputs[1] {
                mismatched.push(args[0]);
            }
        }
        (
            mismatched.is_empty(),
            format!("{} commands, {compared} CSV files compared, mismatches {mismatched:?}", commands.len()),
        )
    });
}
