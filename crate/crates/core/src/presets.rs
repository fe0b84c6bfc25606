//! Built-in scenarios: the six activation-control settings (a)–(f) and the
//! shared indoor layout used by the edge-AI co-simulations.
//!
//! Room sizes, ceiling heights and user placements are configuration choices,
//! not measured values.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Point3};
use crate::rng::rng_stream;
use crate::scenario::{AccessMode, RadioConstants, Room, ScenarioConfig, User, Waveguide, Waypoint};
use crate::Error;

/// Ceiling height of every built-in waveguide, m.
pub const CEILING: f64 = 3.0;
/// Height of user devices above the floor, m.
pub const DEVICE_HEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    /// NOMA, supervised positioner.
    A,
    /// Discrete positions with obstacles, DQN.
    B,
    /// Continuous displacement with a moving user, DDPG.
    C,
    /// Joint positions and power, alternating search.
    D,
    /// Multi-waveguide discrete, independent DQN agents.
    E,
    /// Multi-waveguide continuous, MADDPG.
    F,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [Self::A, Self::B, Self::C, Self::D, Self::E, Self::F];

    pub fn is_continuous(self) -> bool {
        matches!(self, Self::C | Self::F)
    }

    pub fn letter(self) -> char {
        match self {
            Self::A => 'a',
            Self::B => 'b',
            Self::C => 'c',
            Self::D => 'd',
            Self::E => 'e',
            Self::F => 'f',
        }
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Self::A),
            "b" => Ok(Self::B),
            "c" => Ok(Self::C),
            "d" => Ok(Self::D),
            "e" => Ok(Self::E),
            "f" => Ok(Self::F),
            _ => Err(Error::UnknownScenario(s.to_string())),
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

pub fn room(width: f64, depth: f64) -> Room {
    Room { min: Point3::ORIGIN, max: Point3::new(width, depth, CEILING) }
}

/// Guide along +x at ceiling height, fed at `x = 0`.
pub fn ceiling_guide(id: u32, y: f64, length: f64, grid_size: usize) -> Waveguide {
    Waveguide {
        id,
        feed: Point3::new(0.0, y, CEILING),
        axis: Point3::new(1.0, 0.0, 0.0),
        length,
        grid_size,
        tx_power: 1.0,
    }
}

fn base(room: Room, waveguides: Vec<Waveguide>, users: Vec<User>, mode: AccessMode, seed: u64) -> ScenarioConfig {
    let radio = RadioConstants::default();
    ScenarioConfig {
        room,
        waveguides,
        users,
        obstacles: Vec::new(),
        radio,
        min_spacing: radio.wavelength_m / 2.0,
        access_mode: mode,
        seed,
        circuit_power: 1.0,
        pinch: None,
    }
}

/// One guide across a 10 m × 10 m room and a single static user.
pub fn single_link(user: Point3) -> ScenarioConfig {
    base(
        room(10.0, 10.0),
        vec![ceiling_guide(0, 5.0, 10.0, 10)],
        vec![User::fixed(0, user)],
        AccessMode::Oma,
        0,
    )
}

/// Two parallel guides at `y = 3` and `y = 7` with mirror-image users at
/// `(4, 2)` and `(4, 8)`. With `separated`, a full-height wall between the
/// halves blocks every cross-waveguide path.
pub fn two_waveguide_pair(separated: bool) -> ScenarioConfig {
    let mut cfg = base(
        room(10.0, 10.0),
        vec![ceiling_guide(0, 3.0, 10.0, 10), ceiling_guide(1, 7.0, 10.0, 10)],
        vec![
            User::fixed(0, Point3::new(4.0, 2.0, DEVICE_HEIGHT)),
            User::fixed(1, Point3::new(4.0, 8.0, DEVICE_HEIGHT)),
        ],
        AccessMode::MultiWaveguide,
        0,
    );
    if separated {
        cfg.obstacles.push(Aabb::new(Point3::new(0.0, 4.9, 0.0), Point3::new(10.0, 5.1, CEILING)));
    }
    cfg
}

fn sample_user<R: Rng>(rng: &mut R, id: u32, x: (f64, f64), y: (f64, f64)) -> User {
    User::fixed(
        id,
        Point3::new(rng.random_range(x.0..x.1), rng.random_range(y.0..y.1), DEVICE_HEIGHT),
    )
}

/// Scenario `id` with users (and, for (b), the obstacle) drawn from `seed`.
pub fn scenario(id: ScenarioId, seed: u64) -> ScenarioConfig {
    let mut rng = rng_stream(seed, &alloc::format!("preset/{id}"));
    match id {
        ScenarioId::A => {
            let users = (0..2).map(|k| sample_user(&mut rng, k, (0.5, 9.5), (1.0, 9.0))).collect();
            base(room(10.0, 10.0), vec![ceiling_guide(0, 5.0, 10.0, 20)], users, AccessMode::Noma, seed)
        }
        ScenarioId::B => {
            let users: Vec<User> = (0..2).map(|k| sample_user(&mut rng, k, (0.5, 9.5), (1.0, 9.0))).collect();
            let guide = ceiling_guide(0, 5.0, 10.0, 5);
            let mut cfg = base(room(10.0, 10.0), vec![guide.clone()], users, AccessMode::Oma, seed);
            // Pillar between user 0 and its foot point on the guide.
            loop {
                let u = cfg.users[0].position;
                let foot = Point3::new(guide.projection(u), 5.0, DEVICE_HEIGHT);
                let c = u.lerp(foot, rng.random_range(0.3..0.7));
                let half = 0.6;
                let pillar = Aabb::new(
                    Point3::new(c.x - half, c.y - half, 0.0),
                    Point3::new(c.x + half, c.y + half, 2.6),
                );
                if cfg.users.iter().all(|u| !pillar.contains(u.position)) {
                    cfg.obstacles.push(pillar);
                    break;
                }
                cfg.users[0] = sample_user(&mut rng, 0, (0.5, 9.5), (1.0, 9.0));
            }
            cfg
        }
        ScenarioId::C => {
            let x0 = rng.random_range(1.0..3.0);
            let y = rng.random_range(2.0..8.0);
            let mut user = User::fixed(0, Point3::new(x0, y, DEVICE_HEIGHT));
            user.waypoints = vec![
                Waypoint { time: 0.0, position: Point3::new(x0, y, DEVICE_HEIGHT) },
                Waypoint { time: 12.0, position: Point3::new(x0 + 6.0, y, DEVICE_HEIGHT) },
                Waypoint { time: 24.0, position: Point3::new(x0, y, DEVICE_HEIGHT) },
            ];
            base(room(10.0, 10.0), vec![ceiling_guide(0, 5.0, 10.0, 20)], vec![user], AccessMode::Oma, seed)
        }
        ScenarioId::D => {
            let users = vec![
                sample_user(&mut rng, 0, (0.5, 9.5), (0.5, 4.5)),
                sample_user(&mut rng, 1, (0.5, 9.5), (0.5, 4.5)),
                sample_user(&mut rng, 2, (0.5, 9.5), (5.5, 9.5)),
                sample_user(&mut rng, 3, (0.5, 9.5), (5.5, 9.5)),
            ];
            base(
                room(10.0, 10.0),
                vec![ceiling_guide(0, 3.0, 10.0, 10), ceiling_guide(1, 7.0, 10.0, 10)],
                users,
                AccessMode::MultiWaveguide,
                seed,
            )
        }
        ScenarioId::E | ScenarioId::F => {
            let mut users = vec![
                sample_user(&mut rng, 0, (0.5, 9.5), (0.5, 4.5)),
                sample_user(&mut rng, 1, (0.5, 9.5), (5.5, 9.5)),
            ];
            for u in &mut users {
                u.qos_min_rate = 1.0;
            }
            let n = if id == ScenarioId::E { 10 } else { 20 };
            base(
                room(10.0, 10.0),
                vec![ceiling_guide(0, 3.0, 10.0, n), ceiling_guide(1, 7.0, 10.0, n)],
                users,
                AccessMode::MultiWaveguide,
                seed,
            )
        }
    }
}

/// Position of the conventional access point in the edge layout.
pub fn edge_access_point(config: &ScenarioConfig) -> Point3 {
    let c = config.room.center();
    Point3::new(c.x, c.y, CEILING)
}

/// Indoor layout shared by the FL and AirComp co-simulations.
///
/// A 20 m × 10 m hall with the access point at the ceiling centre and one
/// 20 m guide along the `y = 9` wall. A full-height partition at `x ≈ 14`
/// hides four devices in the back bay from the access point, and a pillar
/// shadows one device just south of the guide's midpoint. Five devices sit in
/// the open. Antennas east of the partition reach the whole back bay and the
/// shadowed device; the midpoint antenna reaches only the shadowed device.
pub fn edge_layout() -> ScenarioConfig {
    let positions = [
        (4.0, 3.0),
        (6.0, 6.0),
        (8.0, 2.0),
        (12.5, 3.0),
        (12.0, 6.0),
        (10.0, 8.0),
        (16.0, 2.0),
        (17.0, 5.0),
        (18.0, 3.0),
        (19.0, 6.5),
    ];
    let users = positions
        .iter()
        .enumerate()
        .map(|(k, &(x, y))| User::fixed(k as u32, Point3::new(x, y, DEVICE_HEIGHT)))
        .collect();
    let mut guide = ceiling_guide(0, 9.0, 20.0, 21);
    guide.tx_power = 0.1;
    let mut cfg = base(room(20.0, 10.0), vec![guide], users, AccessMode::Oma, 0);
    cfg.obstacles = vec![
        Aabb::new(Point3::new(14.0, 0.0, 0.0), Point3::new(14.3, 8.0, CEILING)),
        Aabb::new(Point3::new(9.5, 6.5, 0.0), Point3::new(10.5, 7.0, 2.5)),
    ];
    cfg
}

/// Four static users under one guide, two on each side of the room.
pub fn hotspot_layout() -> ScenarioConfig {
    let users = [(1.5, 3.0), (3.0, 7.0), (7.0, 3.0), (8.5, 7.0)]
        .iter()
        .enumerate()
        .map(|(k, &(x, y))| User::fixed(k as u32, Point3::new(x, y, DEVICE_HEIGHT)))
        .collect();
    base(room(10.0, 10.0), vec![ceiling_guide(0, 5.0, 10.0, 21)], users, AccessMode::Oma, 0)
}

/// Two guides and a device that walks diagonally across the midplane and
/// behind a pillar.
pub fn mobility_layout() -> ScenarioConfig {
    let mut walker = User::fixed(0, Point3::new(1.0, 1.5, DEVICE_HEIGHT));
    walker.waypoints = vec![
        Waypoint { time: 0.0, position: Point3::new(1.0, 1.5, DEVICE_HEIGHT) },
        Waypoint { time: 10.0, position: Point3::new(9.0, 8.5, DEVICE_HEIGHT) },
    ];
    let mut cfg = base(
        room(10.0, 10.0),
        vec![ceiling_guide(0, 3.0, 10.0, 21), ceiling_guide(1, 7.0, 10.0, 21)],
        vec![walker],
        AccessMode::Oma,
        0,
    );
    cfg.obstacles.push(Aabb::new(Point3::new(2.5, 2.2, 0.0), Point3::new(3.5, 2.7, 2.8)));
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::validate;

    #[test]
    fn every_preset_validates() {
        for id in ScenarioId::ALL {
            for seed in 0..20 {
                let cfg = scenario(id, seed);
                assert!(validate(&cfg).is_empty(), "{id} seed {seed}: {:?}", validate(&cfg));
            }
        }
        for cfg in [edge_layout(), hotspot_layout(), mobility_layout(), two_waveguide_pair(true)] {
            assert!(validate(&cfg).is_empty(), "{:?}", validate(&cfg));
        }
    }

    #[test]
    fn presets_are_seeded() {
        assert_eq!(scenario(ScenarioId::B, 4), scenario(ScenarioId::B, 4));
        assert_ne!(scenario(ScenarioId::B, 4).users, scenario(ScenarioId::B, 5).users);
    }

    #[test]
    fn scenario_ids_parse() {
        for id in ScenarioId::ALL {
            assert_eq!(id.to_string().parse::<ScenarioId>().unwrap(), id);
        }
        assert!(matches!("g".parse::<ScenarioId>(), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn edge_layout_blockage_pattern() {
        use crate::propagation::los_blocked;
        let cfg = edge_layout();
        let ap = edge_access_point(&cfg);
        let guide = &cfg.waveguides[0];
        let blocked_from = |p: Point3| -> Vec<usize> {
            cfg.users
                .iter()
                .enumerate()
                .filter(|(_, u)| los_blocked(p, u.position, &cfg.obstacles))
                .map(|(k, _)| k)
                .collect()
        };
        assert_eq!(blocked_from(ap), vec![5, 6, 7, 8, 9]);
        assert_eq!(blocked_from(guide.point_at(10.0)), vec![6, 7, 8, 9]);
        assert!(blocked_from(guide.point_at(16.0)).iter().all(|&k| k < 5));
    }
}
