use pinch_core::geometry::Aabb;
use pinch_core::presets::{self, ceiling_guide, room, DEVICE_HEIGHT};
use pinch_core::propagation::{coherent_gain, los_blocked, pa_point, LinkState};
use pinch_core::rates::{evaluate, multi_waveguide_sinr, noma_rates, oma_rate, Assignment, PowerAllocation};
use pinch_core::rng::rng_stream;
use pinch_core::scenario::{AccessMode, PinchConfiguration, RadioConstants, ScenarioConfig, User};
use pinch_core::Point3;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn random_multi_guide<R: Rng>(rng: &mut R) -> (ScenarioConfig, PinchConfiguration) {
    let k = rng.random_range(2..=3usize);
    let guides: Vec<_> = (0..k)
        .map(|w| ceiling_guide(w as u32, 1.0 + 8.0 * (w as f64 + rng.random_range(0.1..0.9)) / k as f64, 10.0, 10))
        .collect();
    let users: Vec<User> = (0..rng.random_range(k..=k + 2))
        .map(|i| {
            let p = Point3::new(rng.random_range(0.2..9.8), rng.random_range(0.2..9.8), DEVICE_HEIGHT);
            User::fixed(i as u32, p)
        })
        .collect();
    let radio = RadioConstants::default();
    let config = ScenarioConfig {
        room: room(10.0, 10.0),
        waveguides: guides,
        users,
        obstacles: Vec::new(),
        radio,
        min_spacing: radio.wavelength_m / 2.0,
        access_mode: AccessMode::MultiWaveguide,
        seed: 0,
        circuit_power: 1.0,
        pinch: None,
    };
    let coords: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..10.0)).collect();
    (config, PinchConfiguration::single(&coords))
}

fn random_box<R: Rng>(rng: &mut R) -> Aabb {
    let c = Point3::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), rng.random_range(0.5..2.5));
    let h = Point3::new(rng.random_range(0.05..2.0), rng.random_range(0.05..2.0), rng.random_range(0.2..1.5));
    Aabb::new(c - h, c + h)
}

#[test]
fn blocking_only_interference_never_lowers_sinr() {
    let mut rng = rng_stream(11, "test/interference");
    let mut checked = 0;
    let mut improved = 0;
    while checked < 1000 {
        let (mut config, pinch) = random_multi_guide(&mut rng);
        let obstacle = random_box(&mut rng);
        if config.users.iter().any(|u| obstacle.contains(u.position)) {
            continue;
        }
        let assignment = Assignment::nearest(&config);
        let serving_blocked = config.users.iter().enumerate().any(|(k, u)| {
            let w = assignment.0[k];
            let s = pinch.active(w).next().unwrap();
            los_blocked(pa_point(&config.waveguides[w], s).unwrap(), u.position, &[obstacle])
        });
        if serving_blocked {
            continue;
        }
        let power = PowerAllocation::equal_split(&config, &assignment);
        let before = multi_waveguide_sinr(&config, &pinch, &assignment, &power).unwrap();
        config.obstacles.push(obstacle);
        let after = multi_waveguide_sinr(&config, &pinch, &assignment, &power).unwrap();
        for (b, a) in before.iter().zip(&after) {
            assert!(a >= b, "SINR fell from {b} to {a}");
        }
        if after.iter().zip(&before).any(|(a, b)| a > b) {
            improved += 1;
        }
        checked += 1;
    }
    assert!(improved > 0, "no sampled obstacle cut an interference path");
}

#[test]
fn wall_between_guides_removes_all_interference() {
    let config = presets::two_waveguide_pair(true);
    let pinch = PinchConfiguration::midpoints(&config);
    let assignment = Assignment::nearest(&config);
    let power = PowerAllocation::equal_split(&config, &assignment);
    let sinr = multi_waveguide_sinr(&config, &pinch, &assignment, &power).unwrap();
    let links = LinkState::compute(&config, &pinch, &config.user_positions()).unwrap();
    for (k, s) in sinr.iter().enumerate() {
        let w = assignment.0[k];
        let snr = power.per_user[k] * links.gain(k, w) / config.radio.noise_power_w;
        assert_eq!(*s, snr);
        assert_eq!(links.gain(k, 1 - w), 0.0);
    }
}

#[test]
fn single_antenna_gain_is_free_space() {
    let user = Point3::new(3.0, 2.0, DEVICE_HEIGHT);
    let config = presets::single_link(user);
    let s = 7.0;
    let links = LinkState::compute(&config, &PinchConfiguration::single(&[s]), &[user]).unwrap();
    let d = pa_point(&config.waveguides[0], s).unwrap().distance(user);
    let expected = config.radio.eta / (d * d);
    assert!((links.gain(0, 0) - expected).abs() <= 1e-12 * expected);
}

#[test]
fn oma_sum_matches_report() {
    let config = presets::scenario(presets::ScenarioId::B, 4);
    let pinch = PinchConfiguration::midpoints(&config);
    let assignment = Assignment::nearest(&config);
    let power = PowerAllocation::equal_split(&config, &assignment);
    let report = evaluate(&config, &pinch, &power, &assignment).unwrap();
    let links = LinkState::compute(&config, &pinch, &config.user_positions()).unwrap();
    let share = config.users.len() as f64;
    for k in 0..config.users.len() {
        let r = oma_rate(links.gain(k, 0), power.per_user[k], config.radio.noise_power_w) / share;
        assert_eq!(report.per_user[k], r);
    }
    assert_eq!(report.sum_rate, report.per_user.iter().sum::<f64>());
}

proptest! {
    #[test]
    fn equal_gain_noma_sum_is_total_power_capacity(
        g in 1e-9f64..1e-3,
        p0 in 1e-3f64..1.0,
        p1 in 1e-3f64..1.0,
        noise in 1e-12f64..1e-9,
    ) {
        let out = noma_rates([g, g], [p0, p1], noise);
        let sum = out.rates[0] + out.rates[1];
        let capacity = (1.0 + (p0 + p1) * g / noise).log2();
        prop_assert!((sum - capacity).abs() <= 1e-12 * capacity.max(1.0));
    }

    #[test]
    fn stronger_noma_user_sees_no_interference(
        g0 in 1e-9f64..1e-3,
        g1 in 1e-9f64..1e-3,
        p in proptest::array::uniform2(1e-3f64..1.0),
    ) {
        let noise = 1e-10;
        let out = noma_rates([g0, g1], p, noise);
        let s = out.sic_order[0];
        let g = [g0, g1];
        prop_assert!(g[s] >= g[1 - s]);
        prop_assert_eq!(out.rates[s], oma_rate(g[s], p[s], noise));
        prop_assert!(out.rates[1 - s] <= oma_rate(g[1 - s], p[1 - s], noise));
    }

    #[test]
    fn coherent_gain_bounded_by_incoherent_sum(
        parts in proptest::collection::vec((0.0f64..1.0, -3.2f64..3.2), 1..8),
    ) {
        let coeffs: Vec<Complex64> = parts.iter().map(|&(a, t)| Complex64::from_polar(a, t)).collect();
        let incoherent: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!(coherent_gain(&coeffs) <= incoherent * (1.0 + 1e-12));
    }

    #[test]
    fn gains_are_finite_and_nonnegative(seed in any::<u64>()) {
        let mut rng = rng_stream(seed, "test/gains");
        let (mut config, pinch) = random_multi_guide(&mut rng);
        config.obstacles.push(random_box(&mut rng));
        if config.users.iter().all(|u| !config.obstacles[0].contains(u.position)) {
            let links = LinkState::compute(&config, &pinch, &config.user_positions()).unwrap();
            for row in &links.gains {
                for g in row {
                    prop_assert!(g.is_finite() && *g >= 0.0);
                }
            }
        }
    }
}
