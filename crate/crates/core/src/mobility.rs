//! 3D vehicle trajectories: vertical take-off, straight-line cruise at a
//! per-mission height, vertical landing, plus FIFO admission under a
//! concurrency cap.

use rand::Rng;
use thiserror::Error;

use crate::config::MobilityParams;
use crate::geometry::{Building, GeometryError, SpatialParams, Vec3};

#[derive(Debug, Error)]
pub enum MobilityError {
    #[error("could not place a mission endpoint outside buildings")]
    PlacementExhausted(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FlightPhase {
    VerticalTakeoff,
    HorizontalCruise,
    VerticalLanding,
    Completed,
}

impl FlightPhase {
    /// Vertical phases are served by the take-off/landing beam layer.
    pub fn is_vtol(self) -> bool {
        matches!(self, FlightPhase::VerticalTakeoff | FlightPhase::VerticalLanding)
    }

    pub fn label(self) -> &'static str {
        match self {
            FlightPhase::VerticalTakeoff => "takeoff",
            FlightPhase::HorizontalCruise => "cruise",
            FlightPhase::VerticalLanding => "landing",
            FlightPhase::Completed => "completed",
        }
    }
}

/// A point-to-point mission: vertical ascent at the take-off pad, cruise
/// along the straight ground path, vertical descent at the landing pad.
#[derive(Debug, Clone, Copy)]
pub struct Mission {
    /// Take-off pad (ground, z = 0).
    pub takeoff: Vec3,
    /// Landing pad (ground, z = 0).
    pub landing: Vec3,
    pub cruise_height_m: f64,
}

impl Mission {
    pub fn ground_distance_m(&self) -> f64 {
        let (dx, dy) = (self.landing.x - self.takeoff.x, self.landing.y - self.takeoff.y);
        (dx * dx + dy * dy).sqrt()
    }

    pub fn takeoff_duration_s(&self, p: &MobilityParams) -> f64 {
        self.cruise_height_m / p.v_vertical_ms()
    }

    pub fn cruise_duration_s(&self, p: &MobilityParams) -> f64 {
        self.ground_distance_m() / p.v_horizontal_ms()
    }

    pub fn total_duration_s(&self, p: &MobilityParams) -> f64 {
        2.0 * self.takeoff_duration_s(p) + self.cruise_duration_s(p)
    }
}

/// Draw a mission: PPP-style uniform endpoints outside building footprints,
/// cruise height uniform in the configured band.
pub fn sample_mission(
    params: &MobilityParams,
    spatial: &SpatialParams,
    buildings: &[Building],
    rng: &mut impl Rng,
) -> Result<Mission, MobilityError> {
    let pad = |rng: &mut dyn rand::RngCore| -> Result<Vec3, GeometryError> {
        let hw = spatial.window_half_width_m;
        for _ in 0..1000 {
            let p = Vec3::new(rng.gen_range(-hw..hw), rng.gen_range(-hw..hw), 0.0);
            if !buildings.iter().any(|b| b.contains_2d(p.x, p.y)) {
                return Ok(p);
            }
        }
        Err(GeometryError::PlacementExhausted(1000))
    };
    let takeoff = pad(rng)?;
    let landing = pad(rng)?;
    let cruise_height_m = if params.cruise_height_max_m > params.cruise_height_min_m {
        rng.gen_range(params.cruise_height_min_m..params.cruise_height_max_m)
    } else {
        params.cruise_height_min_m
    };
    Ok(Mission {
        takeoff,
        landing,
        cruise_height_m,
    })
}

/// Position and phase at mission time `t` (seconds since take-off).
pub fn position_at(mission: &Mission, t: f64, p: &MobilityParams) -> (Vec3, FlightPhase) {
    assert!(t >= 0.0);
    let t_up = mission.takeoff_duration_s(p);
    let t_cruise = mission.cruise_duration_s(p);
    if t < t_up {
        let z = (p.v_vertical_ms() * t).min(mission.cruise_height_m);
        return (
            Vec3::new(mission.takeoff.x, mission.takeoff.y, z),
            FlightPhase::VerticalTakeoff,
        );
    }
    if t < t_up + t_cruise {
        let f = (t - t_up) / t_cruise;
        return (
            Vec3::new(
                mission.takeoff.x + f * (mission.landing.x - mission.takeoff.x),
                mission.takeoff.y + f * (mission.landing.y - mission.takeoff.y),
                mission.cruise_height_m,
            ),
            FlightPhase::HorizontalCruise,
        );
    }
    let t_down = t - t_up - t_cruise;
    if t_down < t_up {
        let z = (mission.cruise_height_m - p.v_vertical_ms() * t_down).max(0.0);
        return (
            Vec3::new(mission.landing.x, mission.landing.y, z),
            FlightPhase::VerticalLanding,
        );
    }
    (
        Vec3::new(mission.landing.x, mission.landing.y, 0.0),
        FlightPhase::Completed,
    )
}

/// One admitted vehicle in flight.
#[derive(Debug, Clone, Copy)]
pub struct ActiveMission {
    pub id: u64,
    pub mission: Mission,
    pub start_s: f64,
}

impl ActiveMission {
    pub fn state_at(&self, now: f64, p: &MobilityParams) -> (Vec3, FlightPhase) {
        position_at(&self.mission, (now - self.start_s).max(0.0), p)
    }
}

/// FIFO admission under the concurrency cap: submitted missions queue until
/// a slot frees up; completed flights retire automatically on `step`.
#[derive(Debug, Default)]
pub struct AdmissionController {
    max_concurrent: usize,
    active: Vec<ActiveMission>,
    queue: std::collections::VecDeque<Mission>,
    next_id: u64,
    pub completed: u64,
}

impl AdmissionController {
    pub fn new(max_concurrent: usize) -> Self {
        assert!(max_concurrent >= 1);
        Self {
            max_concurrent,
            ..Default::default()
        }
    }

    pub fn submit(&mut self, mission: Mission) {
        self.queue.push_back(mission);
    }

    pub fn active(&self) -> &[ActiveMission] {
        &self.active
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Retire completed flights, then admit from the queue in order.
    pub fn step(&mut self, now: f64, p: &MobilityParams) {
        let before = self.active.len();
        self.active
            .retain(|a| now - a.start_s < a.mission.total_duration_s(p));
        self.completed += (before - self.active.len()) as u64;
        while self.active.len() < self.max_concurrent {
            let Some(mission) = self.queue.pop_front() else {
                break;
            };
            self.active.push(ActiveMission {
                id: self.next_id,
                mission,
                start_s: now,
            });
            self.next_id += 1;
        }
        debug_assert!(self.active.len() <= self.max_concurrent);
    }
}
