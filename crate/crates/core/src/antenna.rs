//! Directional antenna patterns, sectorization, narrow multi-beam gains,
//! elevation-tilt optimization, and frequency-reuse coloring.
//!
//! Angles at this layer are in degrees (the pattern formulas are written in
//! degrees); elevation is positive downward from the site.

use serde::{Deserialize, Serialize};

/// Parametric sector antenna pattern.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaParams {
    /// Vertical half-power beamwidth parameter, deg.
    pub phi_3db_deg: f64,
    /// Horizontal half-power beamwidth parameter, deg.
    pub theta_3db_deg: f64,
    /// Vertical sidelobe floor, dB.
    pub sla_v_db: f64,
    /// Horizontal sidelobe floor, dB.
    pub a_m_db: f64,
    /// Exponent on the (angle / beamwidth) ratio: 2 is the standard squared
    /// pattern, 1 the linear variant. Both coincide at the 3 dB multiple.
    pub pattern_exponent: u32,
    /// Integrate the tilt objective in linear power (default) or in dB.
    pub tilt_objective_db: bool,
}

impl Default for AntennaParams {
    fn default() -> Self {
        Self {
            phi_3db_deg: 65.0,
            theta_3db_deg: 65.0,
            sla_v_db: 30.0,
            a_m_db: 30.0,
            pattern_exponent: 2,
            tilt_objective_db: false,
        }
    }
}

impl AntennaParams {
    pub fn collect_violations(&self, out: &mut Vec<String>) {
        if !(self.phi_3db_deg > 0.0) || !(self.theta_3db_deg > 0.0) {
            out.push("antenna beamwidths must be positive".into());
        }
        if !(self.sla_v_db > 0.0) || !(self.a_m_db > 0.0) {
            out.push("antenna sidelobe floors must be positive".into());
        }
        if !(self.pattern_exponent == 1 || self.pattern_exponent == 2) {
            out.push(format!(
                "antenna.pattern_exponent must be 1 or 2 (got {})",
                self.pattern_exponent
            ));
        }
    }

    fn ratio_term(&self, angle_over_bw: f64) -> f64 {
        match self.pattern_exponent {
            1 => angle_over_bw.abs(),
            _ => angle_over_bw * angle_over_bw,
        }
    }
}

/// Config-level description of the sector/beam layout. The concrete
/// [`BeamPlan`] (tilts, per-site reuse offsets) is built at run time from
/// this plus the capacity parameters and feature toggles.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamPlanSpec {
    pub sectors: u32,
    /// Downtilt applied when tilt optimization is disabled, deg.
    pub conventional_tilt_deg: f64,
    /// Reference vehicle height for the cruise-layer tilt search, m.
    pub cruise_ref_height_m: f64,
    /// Reference vehicle height for the take-off/landing-layer tilt, m.
    pub vtol_ref_height_m: f64,
}

impl Default for BeamPlanSpec {
    fn default() -> Self {
        Self {
            sectors: 3,
            conventional_tilt_deg: 12.0,
            cruise_ref_height_m: 200.0,
            vtol_ref_height_m: 25.0,
        }
    }
}

impl BeamPlanSpec {
    pub fn collect_violations(&self, out: &mut Vec<String>) {
        if self.sectors != 3 {
            out.push(format!(
                "beam_plan.sectors must be 3 (got {})",
                self.sectors
            ));
        }
        if !self.cruise_ref_height_m.is_finite()
            || !self.vtol_ref_height_m.is_finite()
            || self.cruise_ref_height_m <= 0.0
            || self.vtol_ref_height_m <= 0.0
        {
            out.push("beam_plan reference heights must be positive".into());
        }
        if !(self.conventional_tilt_deg.abs() <= 90.0) {
            out.push("beam_plan.conventional_tilt_deg must be within [-90, 90]".into());
        }
    }
}

/// Wrap an angle in degrees to (-180, 180].
pub fn wrap_deg(a: f64) -> f64 {
    let mut v = a % 360.0;
    if v > 180.0 {
        v -= 360.0;
    } else if v <= -180.0 {
        v += 360.0;
    }
    v
}

/// Vertical element pattern, dB (non-positive).
pub fn vertical_gain_db(phi_um_deg: f64, phi_tilt_deg: f64, p: &AntennaParams) -> f64 {
    let r = (phi_um_deg - phi_tilt_deg) / p.phi_3db_deg;
    -(12.0 * p.ratio_term(r)).min(p.sla_v_db)
}

/// Horizontal element pattern, dB (non-positive).
pub fn horizontal_gain_db(theta_um_deg: f64, p: &AntennaParams) -> f64 {
    let r = wrap_deg(theta_um_deg) / p.theta_3db_deg;
    -(12.0 * p.ratio_term(r)).min(p.a_m_db)
}

/// Combined element gain with the outer sidelobe floor, dB.
pub fn element_gain_db(
    phi_um_deg: f64,
    phi_tilt_deg: f64,
    theta_um_deg: f64,
    p: &AntennaParams,
) -> f64 {
    let v = vertical_gain_db(phi_um_deg, phi_tilt_deg, p);
    let h = horizontal_gain_db(theta_um_deg, p);
    -((-(v + h)).min(p.a_m_db))
}

/// Horizontal gain of beam `n` (1-based) out of `n_beam` within a 120 deg
/// sector; `theta_um_deg` is relative to the sector boresight. The beam
/// centers sit at -60 + (2n - 1) * theta_3db with theta_3db = 60 / n_beam.
pub fn beam_gain_db(theta_um_deg: f64, n: u32, n_beam: u32, p: &AntennaParams) -> f64 {
    debug_assert!(n >= 1 && n <= n_beam);
    let theta_3db = 60.0 / n_beam as f64;
    let arg = (wrap_deg(theta_um_deg) + 60.0 + theta_3db - 2.0 * n as f64 * theta_3db)
        / (1.083 * theta_3db);
    -(12.0 * p.ratio_term(arg)).min(p.a_m_db)
}

/// Boresight azimuth of beam `n` within sector `sector`, absolute degrees.
pub fn beam_center_deg(sector: u32, n: u32, n_beam: u32) -> f64 {
    let theta_3db = 60.0 / n_beam as f64;
    wrap_deg(sector as f64 * 120.0 + (2.0 * n as f64 - 1.0) * theta_3db - 60.0)
}

/// Which 120 deg sector of a site covers the given absolute azimuth.
pub fn sector_of(azimuth_deg: f64) -> u32 {
    let a = wrap_deg(azimuth_deg);
    (((a + 60.0).rem_euclid(360.0)) / 120.0).floor() as u32 % 3
}

/// Vertical layer of a sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerKind {
    /// Serves cruising traffic; carries the narrow-beam reuse pattern.
    Upward,
    /// Serves the take-off/landing zone with its own narrow fan on colors
    /// disjoint from the sector's upward beams.
    Downward,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Layer {
    pub kind: LayerKind,
    pub tilt_deg: f64,
}

/// Static beam plan shared by every site: sector count, beams per sector,
/// reuse factor, vertical layers, and a per-site reuse-color offset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeamPlan {
    pub sectors: u32,
    pub n_beam: u32,
    pub delta: u32,
    pub layers: Vec<Layer>,
    /// Reuse offset in [0, delta) per site, aligned with the site list.
    pub site_offsets: Vec<u32>,
}

/// A specific transmit beam of a specific site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeamRef {
    pub layer: usize,
    pub sector: u32,
    /// 1-based beam index within the sector.
    pub beam: u32,
}

impl BeamPlan {
    pub fn total_colors(&self) -> u32 {
        self.delta * self.n_beam
    }

    pub fn layer(&self, r: &BeamRef) -> &Layer {
        &self.layers[r.layer]
    }

    fn beams_in_layer(&self, _layer: usize) -> u32 {
        self.n_beam
    }

    /// Subband colors occupied by a beam; every beam holds one color.
    pub fn colors_of(&self, site: usize, r: &BeamRef) -> std::ops::Range<u32> {
        // colors rotate across the sectors of a site, so with delta equal to
        // the sector count every upward beam of a site sits on its own color
        // and a site never interferes with itself; the per-site offset and
        // beam shift decorrelate the assignment between sites
        let offset = (self.site_offsets[site] + r.sector) % self.delta;
        let base = offset * self.n_beam;
        match self.layers[r.layer].kind {
            LayerKind::Upward => {
                let c = base + (r.beam - 1 + site as u32) % self.n_beam;
                c..c + 1
            }
            LayerKind::Downward => {
                // mirror of the upward assignment inside the next offset's
                // block, so a sector's downward fan never shares spectrum
                // with the co-boresight upward beams of its own sector
                let b = ((offset + 1) % self.delta) * self.n_beam;
                let c = b + (r.beam - 1 + site as u32) % self.n_beam;
                c..c + 1
            }
        }
    }

    /// Iterate every beam of a site.
    pub fn beams(&self) -> impl Iterator<Item = BeamRef> + '_ {
        (0..self.layers.len()).flat_map(move |layer| {
            (0..self.sectors).flat_map(move |sector| {
                (1..=self.beams_in_layer(layer)).map(move |beam| BeamRef { layer, sector, beam })
            })
        })
    }

    /// Pattern gain of a site beam toward a target at the given absolute
    /// azimuth and downward elevation (degrees), dB.
    pub fn beam_gain_toward(
        &self,
        r: &BeamRef,
        azimuth_deg: f64,
        elevation_deg: f64,
        p: &AntennaParams,
    ) -> f64 {
        let layer = self.layers[r.layer];
        let rel = wrap_deg(azimuth_deg - r.sector as f64 * 120.0);
        let h = beam_gain_db(rel, r.beam, self.beams_in_layer(r.layer), p);
        let v = vertical_gain_db(elevation_deg, layer.tilt_deg, p);
        -((-(v + h)).min(p.a_m_db))
    }
}

/// Strongest beam of one site toward the target direction. Ties resolve to
/// the lowest (layer, sector, beam) index.
pub fn best_beam(
    plan: &BeamPlan,
    azimuth_deg: f64,
    elevation_deg: f64,
    p: &AntennaParams,
) -> (BeamRef, f64) {
    let mut best: Option<(BeamRef, f64)> = None;
    for r in plan.beams() {
        let g = plan.beam_gain_toward(&r, azimuth_deg, elevation_deg, p);
        match &best {
            Some((_, bg)) if g <= *bg => {}
            _ => best = Some((r, g)),
        }
    }
    best.expect("plan has at least one beam")
}

/// Restrict the best-beam search to one layer.
pub fn best_beam_in_layer(
    plan: &BeamPlan,
    layer: usize,
    azimuth_deg: f64,
    elevation_deg: f64,
    p: &AntennaParams,
) -> (BeamRef, f64) {
    let mut best: Option<(BeamRef, f64)> = None;
    for r in plan.beams().filter(|r| r.layer == layer) {
        let g = plan.beam_gain_toward(&r, azimuth_deg, elevation_deg, p);
        match &best {
            Some((_, bg)) if g <= *bg => {}
            _ => best = Some((r, g)),
        }
    }
    best.expect("layer has at least one beam")
}

/// Optimal elevation tilt for vehicles at height `h_u`: exhaustive 0.5 deg
/// grid over [-90, 90] of the service-area gain integral (r from 0 to
/// IMD/2, horizontal angle across the 3 dB beamwidth). Positive tilt points
/// downward. Ties resolve to the smaller magnitude.
pub fn optimal_tilt_deg(h_u_m: f64, h_m_m: f64, imd_m: f64, p: &AntennaParams) -> f64 {
    let r_max = imd_m / 2.0;
    let n_r = 96usize;
    let n_th = 17usize;
    // precompute elevation angles along the radius (midpoint rule)
    let phis: Vec<f64> = (0..n_r)
        .map(|i| {
            let r = (i as f64 + 0.5) / n_r as f64 * r_max;
            ((h_m_m - h_u_m) / r).atan().to_degrees()
        })
        .collect();
    let thetas: Vec<f64> = (0..n_th)
        .map(|i| -p.theta_3db_deg + 2.0 * p.theta_3db_deg * i as f64 / (n_th - 1) as f64)
        .collect();

    let objective = |tilt: f64| -> f64 {
        let mut acc = 0.0;
        for &phi in &phis {
            for &th in &thetas {
                let g_db = element_gain_db(phi, tilt, th, p);
                acc += if p.tilt_objective_db {
                    g_db
                } else {
                    10f64.powf(g_db / 10.0)
                };
            }
        }
        acc
    };

    let mut best: Option<(f64, f64)> = None;
    let mut tilt = -90.0f64;
    while tilt <= 90.0 + 1e-9 {
        let v = objective(tilt);
        let better = match best {
            None => true,
            Some((bt, bv)) => {
                v > bv + 1e-12 * bv.abs()
                    || ((v - bv).abs() <= 1e-12 * bv.abs() && tilt.abs() < bt.abs())
            }
        };
        if better {
            best = Some((tilt, v));
        }
        tilt += 0.5;
    }
    best.expect("non-empty tilt grid").0
}

/// Deterministic reuse offsets for a `rows x cols` grid laid out in row-major
/// site order: adjacent (4-neighbor) sites never share an offset for
/// delta >= 3, and east/west/north/south neighbor blocks are disjoint.
pub fn grid_offsets(rows: u32, cols: u32, delta: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity((rows * cols) as usize);
    for r in 0..rows {
        for c in 0..cols {
            out.push((c + 2 * r) % delta.max(1));
        }
    }
    out
}

/// Per-site random offsets for irregular layouts, deterministic in `seed`.
pub fn random_offsets(n_sites: usize, delta: u32, seed: u64) -> Vec<u32> {
    (0..n_sites)
        .map(|i| (crate::rng::derive_seed(seed, &[0xC010F, i as u64]) % delta.max(1) as u64) as u32)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> AntennaParams {
        AntennaParams::default()
    }

    #[test]
    fn element_gain_reference_points() {
        let p = params();
        // boresight
        assert_eq!(element_gain_db(12.0, 12.0, 0.0, &p), 0.0);
        // 3 dB-multiple point: both exponents give -12 dB
        for e in [1, 2] {
            let mut pe = params();
            pe.pattern_exponent = e;
            let g = element_gain_db(0.0, 0.0, pe.theta_3db_deg, &pe);
            assert!((g + 12.0).abs() < 1e-12, "e={e} g={g}");
        }
        // deep sidelobe hits the outer floor
        let g = element_gain_db(90.0, 0.0, 180.0, &p);
        assert!((g + 30.0).abs() < 1e-12);
    }

    #[test]
    fn gain_bounds() {
        let p = params();
        let mut rng = crate::rng::stream(5, &[1]);
        use rand::Rng;
        for _ in 0..10_000 {
            let phi = rng.gen_range(-180.0..180.0);
            let tilt = rng.gen_range(-90.0..90.0);
            let th = rng.gen_range(-180.0..180.0);
            let g = element_gain_db(phi, tilt, th, &p);
            assert!(g <= 0.0 && g >= -p.a_m_db);
        }
    }

    #[test]
    fn beam_centers() {
        // three beams: centers at -40, 0, +40 relative to the sector
        for (n, expect) in [(1, -40.0), (2, 0.0), (3, 40.0)] {
            let p = params();
            let g = beam_gain_db(expect, n, 3, &p);
            assert!(g.abs() < 1e-9, "beam {n} at {expect}: {g}");
            assert!((beam_center_deg(0, n, 3) - expect).abs() < 1e-9);
        }
        // far sidelobe at the floor
        let g = beam_gain_db(179.0, 2, 3, &params());
        assert!((g + 30.0).abs() < 1e-12);
    }

    #[test]
    fn sector_lookup() {
        assert_eq!(sector_of(0.0), 0);
        assert_eq!(sector_of(59.9), 0);
        assert_eq!(sector_of(60.0), 1);
        assert_eq!(sector_of(120.0), 1);
        assert_eq!(sector_of(180.0), 2);
        assert_eq!(sector_of(-90.0), 2);
        assert_eq!(sector_of(-59.9), 0);
    }

    fn single_layer_plan(n_beam: u32, delta: u32, n_sites: usize) -> BeamPlan {
        BeamPlan {
            sectors: 3,
            n_beam,
            delta,
            layers: vec![Layer {
                kind: LayerKind::Upward,
                tilt_deg: 0.0,
            }],
            site_offsets: vec![0; n_sites],
        }
    }

    #[test]
    fn best_beam_matches_exhaustive_scan() {
        use rand::Rng;
        let p = params();
        let plan = single_layer_plan(4, 3, 1);
        let mut rng = crate::rng::stream(6, &[2]);
        for _ in 0..2000 {
            let az = rng.gen_range(-180.0..180.0);
            let el = rng.gen_range(-80.0..80.0);
            let (sel, g) = best_beam(&plan, az, el, &p);
            let max = plan
                .beams()
                .map(|r| plan.beam_gain_toward(&r, az, el, &p))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(g, max);
            let _ = sel;
        }
    }

    #[test]
    fn best_beam_on_center_line_and_tie_rule() {
        let p = params();
        let plan = single_layer_plan(3, 3, 1);
        // on the beam-2 center line of sector 0
        let (sel, _) = best_beam(&plan, 0.0, 0.0, &p);
        assert_eq!(sel, BeamRef { layer: 0, sector: 0, beam: 2 });
        // equidistant between beams 1 and 2: lowest index wins
        let (sel, _) = best_beam(&plan, -20.0, 0.0, &p);
        assert_eq!(sel.beam, 1);
    }

    #[test]
    fn best_beam_invariant_to_constant_offset() {
        // the argmax only depends on angle differences, so shifting every
        // gain by a constant (e.g. scaling power) cannot change it
        let p = params();
        let plan = single_layer_plan(3, 3, 1);
        let (a, _) = best_beam(&plan, 37.0, 12.0, &p);
        let gains: Vec<f64> = plan
            .beams()
            .map(|r| plan.beam_gain_toward(&r, 37.0, 12.0, &p) + 7.5)
            .collect();
        let best = gains
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .unwrap()
            .0;
        let b = plan.beams().nth(best).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn optimal_tilt_symmetry_at_site_height() {
        let p = params();
        let t = optimal_tilt_deg(25.0, 25.0, 750.0, &p);
        assert!(t.abs() <= 0.5, "tilt {t}");
    }

    #[test]
    fn optimal_tilt_monotone_in_height_and_positive_for_ground() {
        let p = params();
        let mut prev = f64::INFINITY;
        let mut h = 1.5;
        while h <= 300.0 {
            let t = optimal_tilt_deg(h, 25.0, 750.0, &p);
            assert!(t <= prev + 1e-9, "tilt increased at h={h}: {t} > {prev}");
            prev = t;
            h += 25.0;
        }
        let ground = optimal_tilt_deg(1.5, 25.0, 750.0, &p);
        assert!(ground > 0.0, "ground tilt {ground}");
    }

    #[test]
    fn grid_offsets_separate_neighbors() {
        let (rows, cols, delta) = (4, 4, 3);
        let o = grid_offsets(rows, cols, delta);
        let idx = |r: u32, c: u32| (r * cols + c) as usize;
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    assert_ne!(o[idx(r, c)], o[idx(r, c + 1)]);
                }
                if r + 1 < rows {
                    assert_ne!(o[idx(r, c)], o[idx(r + 1, c)]);
                }
            }
        }
    }

    #[test]
    fn full_reuse_uses_one_color() {
        let plan = single_layer_plan(1, 1, 4);
        for site in 0..4 {
            for r in plan.beams() {
                assert_eq!(plan.colors_of(site, &r), 0..1);
            }
        }
    }

    #[test]
    fn random_offsets_deterministic_and_in_range() {
        let a = random_offsets(64, 3, 9);
        let b = random_offsets(64, 3, 9);
        assert_eq!(a, b);
        assert!(a.iter().all(|&o| o < 3));
        assert_ne!(a, random_offsets(64, 3, 10));
    }
}
