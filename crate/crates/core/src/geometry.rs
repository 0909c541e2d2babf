//! Spatial sampling and coordinate primitives.
//!
//! Realizations live in a finite square window centered at the origin.
//! Sites, vehicles, and building centers are Poisson-sampled; building
//! heights are Rayleigh, vehicle heights uniform. A deterministic grid
//! layout backs the inter-site-distance studies.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

/// A point in meters; `z` is height above ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dist_3d(&self, other: &Vec3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// 2D (XY-plane) distance between two points.
pub fn link_2d_distance(a: &Vec3, b: &Vec3) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    (dx * dx + dy * dy).sqrt()
}

/// Azimuth of `b` seen from `a`, in (-pi, pi]. Coincident 2D positions map to 0.
pub fn link_azimuth(a: &Vec3, b: &Vec3) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    if dx == 0.0 && dy == 0.0 {
        return 0.0;
    }
    let th = dy.atan2(dx);
    // atan2 returns [-pi, pi]; fold -pi onto +pi.
    if th == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        th
    }
}

/// Elevation of the line a -> b, positive when `b` lies *below* `a`
/// (downward-looking convention: atan((z_a - z_b) / r_2d)).
pub fn link_elevation(a: &Vec3, b: &Vec3) -> f64 {
    (a.z - b.z).atan2(link_2d_distance(a, b))
}

/// Axis-aligned building: footprint `w` (x-extent) by `d` (y-extent)
/// centered at `(x, y)`, solid from ground to `h`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Building {
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub w: f64,
    pub d: f64,
}

impl Building {
    pub fn contains_2d(&self, x: f64, y: f64) -> bool {
        (x - self.x).abs() <= self.w / 2.0 && (y - self.y).abs() <= self.d / 2.0
    }

    pub fn contains_3d(&self, p: &Vec3) -> bool {
        self.contains_2d(p.x, p.y) && p.z <= self.h
    }
}

/// Densities, heights, and footprint statistics of the urban scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialParams {
    /// MBS density, 1/km^2.
    pub lambda_m_per_km2: f64,
    /// UAM density, 1/km^2.
    pub lambda_u_per_km2: f64,
    /// Building density, 1/km^2.
    pub lambda_b_per_km2: f64,
    /// MBS height, m.
    pub h_m_m: f64,
    /// UAM height bounds, m.
    pub h_u_min_m: f64,
    pub h_u_max_m: f64,
    /// Building footprint width and depth, m.
    pub w_m: f64,
    pub d_m: f64,
    /// Rayleigh scale of building heights, m.
    pub sigma_hb_m: f64,
    /// Simulation window half-extent, m.
    pub window_half_width_m: f64,
}

impl Default for SpatialParams {
    fn default() -> Self {
        Self {
            // Density of a 750 m grid.
            lambda_m_per_km2: 1.0 / (0.75 * 0.75),
            lambda_u_per_km2: 10.0,
            lambda_b_per_km2: 300.0,
            h_m_m: 25.0,
            h_u_min_m: 1.5,
            h_u_max_m: 300.0,
            w_m: 40.0,
            d_m: 40.0,
            sigma_hb_m: 20.0,
            window_half_width_m: 1500.0,
        }
    }
}

impl SpatialParams {
    pub fn collect_violations(&self, out: &mut Vec<String>) {
        if !(self.lambda_m_per_km2 > 0.0) {
            out.push("spatial.lambda_m_per_km2 must be positive".into());
        }
        if !(self.lambda_u_per_km2 > 0.0) {
            out.push("spatial.lambda_u_per_km2 must be positive".into());
        }
        if self.lambda_b_per_km2 < 0.0 {
            out.push("spatial.lambda_b_per_km2 must be non-negative".into());
        }
        if !(0.0 <= self.h_u_min_m && self.h_u_min_m < self.h_u_max_m) {
            out.push(format!(
                "spatial UAM height bounds must satisfy 0 <= min < max (got [{}, {}])",
                self.h_u_min_m, self.h_u_max_m
            ));
        }
        if !(self.w_m > 0.0) || !(self.d_m > 0.0) {
            out.push("spatial building footprint must be positive".into());
        }
        if !(self.sigma_hb_m > 0.0) {
            out.push("spatial.sigma_hb_m must be positive".into());
        }
        if !(self.window_half_width_m > 0.0) {
            out.push("spatial.window_half_width_m must be positive".into());
        }
    }

    pub fn lambda_m_per_m2(&self) -> f64 {
        self.lambda_m_per_km2 * 1e-6
    }

    pub fn lambda_u_per_m2(&self) -> f64 {
        self.lambda_u_per_km2 * 1e-6
    }

    pub fn lambda_b_per_m2(&self) -> f64 {
        self.lambda_b_per_km2 * 1e-6
    }

    pub fn window_area_m2(&self) -> f64 {
        let side = 2.0 * self.window_half_width_m;
        side * side
    }

    /// Mean building height of the Rayleigh distribution.
    pub fn mean_building_height(&self) -> f64 {
        (std::f64::consts::PI / 2.0).sqrt() * self.sigma_hb_m
    }
}

/// Deterministic square-grid site layout for inter-site-distance studies.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridLayout {
    /// Inter-MBS distance, m.
    pub imd_m: f64,
    pub rows: u32,
    pub cols: u32,
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("could not place a point outside building footprints after {0} attempts")]
    PlacementExhausted(u32),
    #[error("environment parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One sampled realization of the scene. Immutable after construction; a
/// spatial index over buildings is built once for segment queries.
#[derive(Debug, Clone)]
pub struct UrbanEnvironment {
    pub mbs_sites: Vec<Vec3>,
    pub uam_nodes: Vec<Vec3>,
    pub buildings: Vec<Building>,
    pub half_width: f64,
    index: BuildingIndex,
}

impl UrbanEnvironment {
    pub fn new(
        mbs_sites: Vec<Vec3>,
        uam_nodes: Vec<Vec3>,
        buildings: Vec<Building>,
        half_width: f64,
    ) -> Self {
        let index = BuildingIndex::build(&buildings, half_width);
        Self {
            mbs_sites,
            uam_nodes,
            buildings,
            half_width,
            index,
        }
    }

    pub fn index(&self) -> &BuildingIndex {
        &self.index
    }

    /// Indices of buildings whose footprint could intersect the 2D segment
    /// a->b (conservative superset).
    pub fn candidate_buildings(&self, a: &Vec3, b: &Vec3) -> Vec<usize> {
        self.index.segment_candidates(&self.buildings, a, b)
    }
}

const MAX_PLACEMENT_ATTEMPTS: u32 = 1000;

/// Sample a full scene: Poisson counts, uniform positions, Rayleigh building
/// heights, uniform vehicle heights. Vehicles are rejection-resampled so no
/// vehicle starts inside a building volume.
pub fn sample_environment(params: &SpatialParams, seed: u64) -> Result<UrbanEnvironment, GeometryError> {
    let mut violations = Vec::new();
    params.collect_violations(&mut violations);
    if !violations.is_empty() {
        return Err(GeometryError::InvalidParams(violations.join("; ")));
    }

    let area = params.window_area_m2();
    let hw = params.window_half_width_m;

    let buildings = {
        let mut rng = rng::stream(seed, &[tag::BUILDINGS]);
        let n = poisson_count(&mut rng, params.lambda_b_per_m2() * area);
        (0..n)
            .map(|_| {
                let x = rng.gen_range(-hw..hw);
                let y = rng.gen_range(-hw..hw);
                let h = rayleigh(&mut rng, params.sigma_hb_m);
                Building {
                    x,
                    y,
                    h,
                    w: params.w_m,
                    d: params.d_m,
                }
            })
            .collect::<Vec<_>>()
    };

    let mbs_sites = {
        let mut rng = rng::stream(seed, &[tag::SITES]);
        let n = poisson_count(&mut rng, params.lambda_m_per_m2() * area);
        (0..n)
            .map(|_| Vec3::new(rng.gen_range(-hw..hw), rng.gen_range(-hw..hw), params.h_m_m))
            .collect::<Vec<_>>()
    };

    let uam_nodes = {
        let mut rng = rng::stream(seed, &[tag::UAMS]);
        let n = poisson_count(&mut rng, params.lambda_u_per_m2() * area);
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            nodes.push(place_outside_buildings(&mut rng, params, &buildings)?);
        }
        nodes
    };

    Ok(UrbanEnvironment::new(mbs_sites, uam_nodes, buildings, hw))
}

/// Like [`sample_environment`] but with sites on a deterministic square grid
/// of spacing `imd` centered on the window; buildings and vehicles stay
/// Poisson-sampled from `seed`.
pub fn grid_environment(
    layout: &GridLayout,
    params: &SpatialParams,
    seed: u64,
) -> Result<UrbanEnvironment, GeometryError> {
    if layout.rows == 0 || layout.cols == 0 {
        return Err(GeometryError::InvalidParams("grid rows*cols must be >= 1".into()));
    }
    if !(layout.imd_m > 0.0) {
        return Err(GeometryError::InvalidParams("grid imd must be positive".into()));
    }
    let env = sample_environment(params, seed)?;
    let mut sites = Vec::with_capacity((layout.rows * layout.cols) as usize);
    let x0 = -(layout.cols as f64 - 1.0) / 2.0 * layout.imd_m;
    let y0 = -(layout.rows as f64 - 1.0) / 2.0 * layout.imd_m;
    for r in 0..layout.rows {
        for c in 0..layout.cols {
            sites.push(Vec3::new(
                x0 + c as f64 * layout.imd_m,
                y0 + r as f64 * layout.imd_m,
                params.h_m_m,
            ));
        }
    }
    Ok(UrbanEnvironment::new(
        sites,
        env.uam_nodes,
        env.buildings,
        env.half_width,
    ))
}

/// Uniform position in the window, resampled until it is outside every
/// building volume at its drawn height.
pub fn place_outside_buildings(
    rng: &mut impl Rng,
    params: &SpatialParams,
    buildings: &[Building],
) -> Result<Vec3, GeometryError> {
    let hw = params.window_half_width_m;
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let p = Vec3::new(
            rng.gen_range(-hw..hw),
            rng.gen_range(-hw..hw),
            rng.gen_range(params.h_u_min_m..params.h_u_max_m),
        );
        if !buildings.iter().any(|b| b.contains_3d(&p)) {
            return Ok(p);
        }
    }
    Err(GeometryError::PlacementExhausted(MAX_PLACEMENT_ATTEMPTS))
}

pub fn poisson_count(rng: &mut impl Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let pois = Poisson::new(mean).expect("positive mean");
    pois.sample(rng) as usize
}

fn rayleigh(rng: &mut impl Rng, sigma: f64) -> f64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    sigma * (-2.0 * u.ln()).sqrt()
}

mod tag {
    pub const BUILDINGS: u64 = 0xB1;
    pub const SITES: u64 = 0x51;
    pub const UAMS: u64 = 0xA1;
}

// ---------------------------------------------------------------------------
// Environment text format
// ---------------------------------------------------------------------------

/// Serialize to the line-oriented replay format:
/// `window <half_width>`, `mbs <x> <y> <z>`, `uam <x> <y> <z>`,
/// `building <x> <y> <h> <w> <d>`.
pub fn env_to_text(env: &UrbanEnvironment) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "window {:.9e}", env.half_width);
    for p in &env.mbs_sites {
        let _ = writeln!(s, "mbs {:.9e} {:.9e} {:.9e}", p.x, p.y, p.z);
    }
    for p in &env.uam_nodes {
        let _ = writeln!(s, "uam {:.9e} {:.9e} {:.9e}", p.x, p.y, p.z);
    }
    for b in &env.buildings {
        let _ = writeln!(s, "building {:.9e} {:.9e} {:.9e} {:.9e} {:.9e}", b.x, b.y, b.h, b.w, b.d);
    }
    s
}

/// Parse the replay format produced by [`env_to_text`]. Blank lines and
/// `#` comments are ignored.
pub fn env_from_text(text: &str) -> Result<UrbanEnvironment, GeometryError> {
    let mut half_width = 0.0f64;
    let mut sites = Vec::new();
    let mut uams = Vec::new();
    let mut buildings = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let kind = it.next().unwrap();
        let nums: Result<Vec<f64>, _> = it.map(|t| t.parse::<f64>()).collect();
        let nums = nums.map_err(|e| GeometryError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        let need = |n: usize| -> Result<(), GeometryError> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(GeometryError::Parse {
                    line: i + 1,
                    msg: format!("expected {n} fields after '{kind}', got {}", nums.len()),
                })
            }
        };
        match kind {
            "window" => {
                need(1)?;
                half_width = nums[0];
            }
            "mbs" => {
                need(3)?;
                sites.push(Vec3::new(nums[0], nums[1], nums[2]));
            }
            "uam" => {
                need(3)?;
                uams.push(Vec3::new(nums[0], nums[1], nums[2]));
            }
            "building" => {
                need(5)?;
                buildings.push(Building {
                    x: nums[0],
                    y: nums[1],
                    h: nums[2],
                    w: nums[3],
                    d: nums[4],
                });
            }
            other => {
                return Err(GeometryError::Parse {
                    line: i + 1,
                    msg: format!("unknown record kind '{other}'"),
                })
            }
        }
    }
    if half_width <= 0.0 {
        half_width = sites
            .iter()
            .chain(uams.iter())
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(1.0, f64::max);
    }
    Ok(UrbanEnvironment::new(sites, uams, buildings, half_width))
}

// ---------------------------------------------------------------------------
// Spatial index
// ---------------------------------------------------------------------------

/// Uniform-grid index over building centers; answers "which buildings might
/// intersect this 2D segment" conservatively.
#[derive(Debug, Clone)]
pub struct BuildingIndex {
    cell: f64,
    origin: f64,
    n_cells: usize,
    // building indices per cell, flattened row-major
    cells: Vec<Vec<u32>>,
    max_half_extent: f64,
}

impl BuildingIndex {
    pub fn build(buildings: &[Building], half_width: f64) -> Self {
        let max_half_extent = buildings
            .iter()
            .map(|b| (b.w.max(b.d)) / 2.0)
            .fold(0.0, f64::max);
        let cell = (2.0 * max_half_extent).max(50.0);
        let span = 2.0 * half_width.max(cell);
        let n_cells = ((span / cell).ceil() as usize + 2).max(1);
        let origin = -half_width.max(cell) - cell;
        let mut cells = vec![Vec::new(); n_cells * n_cells];
        let clamp = |i: isize| -> usize { i.clamp(0, n_cells as isize - 1) as usize };
        for (k, b) in buildings.iter().enumerate() {
            let ix = clamp(((b.x - origin) / cell).floor() as isize);
            let iy = clamp(((b.y - origin) / cell).floor() as isize);
            cells[iy * n_cells + ix].push(k as u32);
        }
        Self {
            cell,
            origin,
            n_cells,
            cells,
            max_half_extent,
        }
    }

    /// Conservative candidate set: every building whose center lies within
    /// one cell of the swept segment (cell size >= building extent).
    pub fn segment_candidates(&self, buildings: &[Building], a: &Vec3, b: &Vec3) -> Vec<usize> {
        if buildings.is_empty() {
            return Vec::new();
        }
        let mut seen_cells = HashSet::new();
        let mut out = Vec::new();
        let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        let steps = (len / (self.cell * 0.5)).ceil() as usize + 1;
        let clamp = |i: isize| -> usize { i.clamp(0, self.n_cells as isize - 1) as usize };
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let x = a.x + t * (b.x - a.x);
            let y = a.y + t * (b.y - a.y);
            let ix = ((x - self.origin) / self.cell).floor() as isize;
            let iy = ((y - self.origin) / self.cell).floor() as isize;
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let cx = clamp(ix + dx);
                    let cy = clamp(iy + dy);
                    let id = cy * self.n_cells + cx;
                    if seen_cells.insert(id) {
                        out.extend(self.cells[id].iter().map(|&k| k as usize));
                    }
                }
            }
        }
        out
    }

    pub fn max_half_extent(&self) -> f64 {
        self.max_half_extent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_params() -> SpatialParams {
        SpatialParams {
            window_half_width_m: 500.0,
            ..Default::default()
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = base_params();
        let a = sample_environment(&p, 7).unwrap();
        let b = sample_environment(&p, 7).unwrap();
        assert_eq!(a.mbs_sites, b.mbs_sites);
        assert_eq!(a.uam_nodes, b.uam_nodes);
        assert_eq!(a.buildings.len(), b.buildings.len());
        for (x, y) in a.buildings.iter().zip(b.buildings.iter()) {
            assert_eq!((x.x, x.y, x.h), (y.x, y.y, y.h));
        }
    }

    #[test]
    fn rejects_bad_window() {
        let mut p = base_params();
        p.window_half_width_m = 0.0;
        assert!(sample_environment(&p, 1).is_err());
        p.window_half_width_m = -10.0;
        assert!(sample_environment(&p, 1).is_err());
    }

    #[test]
    fn zero_building_density_gives_empty_scene() {
        let mut p = base_params();
        p.lambda_b_per_km2 = 0.0;
        let env = sample_environment(&p, 3).unwrap();
        assert!(env.buildings.is_empty());
    }

    #[test]
    fn poisson_count_mean_matches_density() {
        // window 1 km^2, lambda_M = 5/km^2, mean over 1e4 seeds within 3 sigma.
        let p = SpatialParams {
            lambda_m_per_km2: 5.0,
            window_half_width_m: 500.0,
            lambda_b_per_km2: 0.0,
            lambda_u_per_km2: 1.0,
            ..Default::default()
        };
        let n_seeds = 10_000u64;
        let total: usize = (0..n_seeds)
            .map(|s| sample_environment(&p, s).unwrap().mbs_sites.len())
            .sum();
        let mean = total as f64 / n_seeds as f64;
        assert!((mean - 5.0).abs() < 0.15, "mean {mean}");
    }

    #[test]
    fn building_heights_follow_rayleigh() {
        let p = SpatialParams {
            lambda_b_per_km2: 2500.0,
            window_half_width_m: 1000.0,
            lambda_u_per_km2: 1.0,
            ..Default::default()
        };
        let env = sample_environment(&p, 11).unwrap();
        let mut heights: Vec<f64> = env.buildings.iter().map(|b| b.h).collect();
        assert!(heights.len() > 5000);
        let n = heights.len() as f64;

        // sample mean vs sigma*sqrt(pi/2) ~ 25.07 for sigma = 20
        let mean = heights.iter().sum::<f64>() / n;
        let expect = p.mean_building_height();
        assert!((mean - expect).abs() < 0.5, "mean {mean}, expect {expect}");

        // Kolmogorov-Smirnov against the Rayleigh CDF, 1% critical value.
        heights.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sigma2 = p.sigma_hb_m * p.sigma_hb_m;
        let mut ks: f64 = 0.0;
        for (i, h) in heights.iter().enumerate() {
            let cdf = 1.0 - (-h * h / (2.0 * sigma2)).exp();
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            ks = ks.max((cdf - lo).abs()).max((cdf - hi).abs());
        }
        let critical = 1.63 / n.sqrt();
        assert!(ks < critical, "KS statistic {ks} >= {critical}");
    }

    #[test]
    fn uam_heights_within_bounds_and_outside_buildings() {
        let p = base_params();
        let env = sample_environment(&p, 5).unwrap();
        for u in &env.uam_nodes {
            assert!(u.z >= p.h_u_min_m && u.z <= p.h_u_max_m);
            assert!(!env.buildings.iter().any(|b| b.contains_3d(u)));
        }
    }

    #[test]
    fn grid_layouts() {
        let p = base_params();
        let single = grid_environment(
            &GridLayout {
                imd_m: 750.0,
                rows: 1,
                cols: 1,
            },
            &p,
            1,
        )
        .unwrap();
        assert_eq!(single.mbs_sites.len(), 1);
        assert_eq!((single.mbs_sites[0].x, single.mbs_sites[0].y), (0.0, 0.0));

        let g = grid_environment(
            &GridLayout {
                imd_m: 750.0,
                rows: 3,
                cols: 3,
            },
            &p,
            1,
        )
        .unwrap();
        assert_eq!(g.mbs_sites.len(), 9);
        // nearest-neighbor spacing is exactly the IMD
        for (i, a) in g.mbs_sites.iter().enumerate() {
            let mut best = f64::INFINITY;
            for (j, b) in g.mbs_sites.iter().enumerate() {
                if i != j {
                    best = best.min(link_2d_distance(a, b));
                }
            }
            assert!((best - 750.0).abs() < 1e-9);
        }
    }

    #[test]
    fn angle_conventions() {
        let a = Vec3::new(0.0, 0.0, 25.0);
        let b = Vec3::new(100.0, 0.0, 25.0);
        assert_eq!(link_2d_distance(&a, &b), 100.0);
        assert_eq!(link_azimuth(&a, &b), 0.0);
        assert_eq!(link_elevation(&a, &b), 0.0);

        let c = Vec3::new(100.0, 0.0, 125.0);
        assert!((link_elevation(&a, &c) + std::f64::consts::FRAC_PI_4).abs() < 1e-12);

        let d = Vec3::new(0.0, 100.0, 25.0);
        assert!((link_azimuth(&a, &d) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        // coincident 2D positions: azimuth defined as 0
        let e = Vec3::new(0.0, 0.0, 125.0);
        assert_eq!(link_azimuth(&a, &e), 0.0);
    }

    #[test]
    fn env_text_round_trip() {
        let env = sample_environment(&base_params(), 9).unwrap();
        let text = env_to_text(&env);
        let back = env_from_text(&text).unwrap();
        assert_eq!(env.mbs_sites.len(), back.mbs_sites.len());
        assert_eq!(env.uam_nodes.len(), back.uam_nodes.len());
        assert_eq!(env.buildings.len(), back.buildings.len());
        // 9 significant digits survive a round trip well inside 1e-6 m
        for (a, b) in env.buildings.iter().zip(back.buildings.iter()) {
            assert!((a.x - b.x).abs() < 1e-5);
            assert!((a.h - b.h).abs() < 1e-5);
        }
    }

    #[test]
    fn env_text_rejects_garbage() {
        assert!(env_from_text("mbs 1 2").is_err());
        assert!(env_from_text("satellite 0 0 0").is_err());
        assert!(env_from_text("building 0 0 nope 40 40").is_err());
    }

    #[test]
    fn index_candidates_are_superset() {
        let p = base_params();
        let env = sample_environment(&p, 21).unwrap();
        let a = Vec3::new(-450.0, -470.0, 25.0);
        let b = Vec3::new(430.0, 480.0, 150.0);
        let cands: std::collections::HashSet<usize> =
            env.candidate_buildings(&a, &b).into_iter().collect();
        // any building whose closed box meets the segment's 2D corridor must be a candidate
        for (k, bld) in env.buildings.iter().enumerate() {
            let half_diag = (bld.w.max(bld.d)) / 2.0;
            let d = point_segment_dist_2d(bld.x, bld.y, &a, &b);
            if d <= half_diag {
                assert!(cands.contains(&k), "missing candidate {k} at distance {d}");
            }
        }
    }

    fn point_segment_dist_2d(px: f64, py: f64, a: &Vec3, b: &Vec3) -> f64 {
        let vx = b.x - a.x;
        let vy = b.y - a.y;
        let wx = px - a.x;
        let wy = py - a.y;
        let t = ((wx * vx + wy * vy) / (vx * vx + vy * vy)).clamp(0.0, 1.0);
        ((wx - t * vx).powi(2) + (wy - t * vy).powi(2)).sqrt()
    }
}
