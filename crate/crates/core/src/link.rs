//! Per-link power and SINR evaluation: strongest-RSRP association,
//! Nakagami-m fading draws, and interference accumulation over co-color
//! beams with per-link blockage losses.
//!
//! All internal arithmetic is linear scale (mW); dB enters only through the
//! antenna gains.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use thiserror::Error;

use crate::antenna::{best_beam, AntennaParams, BeamPlan, BeamRef};
use crate::blockage::{count_blockers_center, penetration_loss, PenetrationParams};
use crate::config::{db_to_linear, AssociationPolicy, ChannelParams};
use crate::geometry::{link_2d_distance, link_azimuth, link_elevation, UrbanEnvironment, Vec3};

#[derive(Debug, Error, PartialEq)]
pub enum LinkError {
    #[error("transmitter and receiver are co-located; path loss undefined")]
    CoincidentEndpoints,
}

/// Geometry of one site-vehicle link as the antenna model consumes it.
#[derive(Debug, Clone, Copy)]
pub struct LinkGeometry {
    pub r_um_m: f64,
    /// Downward elevation from the site toward the vehicle, deg.
    pub elevation_deg: f64,
    /// Absolute azimuth from the site toward the vehicle, deg.
    pub azimuth_deg: f64,
    pub n_blockers: usize,
    pub serving: bool,
}

impl LinkGeometry {
    pub fn of(site: &Vec3, uam: &Vec3, env: &UrbanEnvironment) -> Self {
        Self {
            r_um_m: link_2d_distance(site, uam),
            elevation_deg: link_elevation(site, uam).to_degrees(),
            azimuth_deg: link_azimuth(site, uam).to_degrees(),
            n_blockers: count_blockers_center(site, uam, env),
            serving: false,
        }
    }
}

/// One SINR evaluation with its power budget.
#[derive(Debug, Clone, Copy)]
pub struct SinrSample {
    pub signal_mw: f64,
    pub interference_mw: f64,
    pub noise_mw: f64,
    pub sinr: f64,
    /// Signal-to-interference ratio alone (infinite when interference is 0
    /// and signal positive; the analytic expressions are noise-free).
    pub sir: f64,
}

/// Linear received power over the 3D distance.
pub fn received_power(
    tx_power_mw: f64,
    gain_db: f64,
    loss_linear: f64,
    r_um_m: f64,
    dh_m: f64,
    alpha: f64,
    fading: f64,
) -> Result<f64, LinkError> {
    let d2 = r_um_m * r_um_m + dh_m * dh_m;
    if d2 == 0.0 {
        return Err(LinkError::CoincidentEndpoints);
    }
    Ok(tx_power_mw * db_to_linear(gain_db) * loss_linear * fading * d2.powf(-alpha / 2.0))
}

/// Unit-mean Nakagami-m power fading draw (gamma with shape m, scale 1/m).
pub fn fading_draw(m: u32, rng: &mut impl Rng) -> f64 {
    let g = Gamma::new(m as f64, 1.0 / m as f64).expect("m >= 1");
    g.sample(rng)
}

/// Association outcome: serving site, its best beam (None when omni), and
/// the fading-free mean received power used for the decision.
#[derive(Debug, Clone, Copy)]
pub struct Association {
    pub site: usize,
    pub beam: Option<BeamRef>,
    pub mean_power_mw: f64,
    pub n_blockers: usize,
}

fn site_mean_power(
    site_idx: usize,
    uam: &Vec3,
    env: &UrbanEnvironment,
    plan: Option<&BeamPlan>,
    ant: &AntennaParams,
    channel: &ChannelParams,
) -> (Option<BeamRef>, f64, usize) {
    let site = &env.mbs_sites[site_idx];
    let geo = LinkGeometry::of(site, uam, env);
    let loss = penetration_loss(geo.n_blockers, &PenetrationParams { gamma: channel.gamma });
    let (beam, gain_db) = match plan {
        Some(p) => {
            let (b, g) = best_beam(p, geo.azimuth_deg, geo.elevation_deg, ant);
            (Some(b), g)
        }
        None => (None, 0.0),
    };
    let p = received_power(
        channel.p_tx_mw(),
        gain_db,
        loss,
        geo.r_um_m,
        uam.z - site.z,
        channel.alpha,
        1.0,
    )
    .unwrap_or(0.0);
    (beam, p, geo.n_blockers)
}

/// Pick the serving site. Strongest fading-free received power by default;
/// power ties go to the nearest 3D site, then the lowest index.
pub fn associate(
    uam: &Vec3,
    env: &UrbanEnvironment,
    plan: Option<&BeamPlan>,
    ant: &AntennaParams,
    channel: &ChannelParams,
    policy: AssociationPolicy,
) -> Association {
    assert!(!env.mbs_sites.is_empty(), "association needs at least one site");
    let mut best: Option<(usize, Option<BeamRef>, f64, usize, f64)> = None;
    for (i, site) in env.mbs_sites.iter().enumerate() {
        let (beam, p, nb) = site_mean_power(i, uam, env, plan, ant, channel);
        let d3 = site.dist_3d(uam);
        let better = match (&best, policy) {
            (None, _) => true,
            (Some((_, _, bp, _, bd)), AssociationPolicy::StrongestRsrp) => {
                p > *bp || (p == *bp && d3 < *bd)
            }
            (Some((_, _, _, _, bd)), AssociationPolicy::NearestSite) => d3 < *bd,
        };
        if better {
            best = Some((i, beam, p, nb, d3));
        }
    }
    let (site, beam, mean_power_mw, n_blockers, _) = best.unwrap();
    Association {
        site,
        beam,
        mean_power_mw,
        n_blockers,
    }
}

/// Draw one SINR sample for the vehicle: fading on the serving link, plus
/// independent fading and blockage on every co-color interfering beam.
///
/// Interference counts only beams of non-serving sites whose reuse colors
/// overlap the serving beam's colors, weighted by the overlapped fraction of
/// the interferer's colors (a wide beam spreads its power over its block).
pub fn sinr_sample(
    uam: &Vec3,
    env: &UrbanEnvironment,
    plan: Option<&BeamPlan>,
    ant: &AntennaParams,
    channel: &ChannelParams,
    policy: AssociationPolicy,
    rng: &mut impl Rng,
) -> (Association, SinrSample) {
    let assoc = associate(uam, env, plan, ant, channel, policy);
    let pen = PenetrationParams { gamma: channel.gamma };

    let signal_mw = assoc.mean_power_mw * fading_draw(channel.m, rng);

    let mut interference_mw = 0.0;
    for (i, site) in env.mbs_sites.iter().enumerate() {
        // under beamforming the serving site's other beams still interfere
        // on any shared colors; only the omni model drops the whole site
        if i == assoc.site && plan.is_none() {
            continue;
        }
        let geo = LinkGeometry::of(site, uam, env);
        let loss = penetration_loss(geo.n_blockers, &pen);
        if loss == 0.0 {
            continue;
        }
        match plan {
            None => {
                let p = received_power(
                    channel.p_tx_mw(),
                    0.0,
                    loss,
                    geo.r_um_m,
                    uam.z - site.z,
                    channel.alpha,
                    fading_draw(channel.m, rng),
                )
                .unwrap_or(0.0);
                interference_mw += p;
            }
            Some(p) => {
                let serving_colors = p.colors_of(
                    assoc.site,
                    &assoc.beam.expect("beamformed association has a beam"),
                );
                for r in p.beams() {
                    if i == assoc.site && Some(r) == assoc.beam {
                        continue;
                    }
                    let colors = p.colors_of(i, &r);
                    let overlap = colors.start.max(serving_colors.start)
                        < colors.end.min(serving_colors.end);
                    if !overlap {
                        continue;
                    }
                    let olap = colors.end.min(serving_colors.end)
                        - colors.start.max(serving_colors.start);
                    let weight = olap as f64 / colors.len() as f64;
                    let g = p.beam_gain_toward(&r, geo.azimuth_deg, geo.elevation_deg, ant);
                    let pw = received_power(
                        channel.p_tx_mw(),
                        g,
                        loss,
                        geo.r_um_m,
                        uam.z - site.z,
                        channel.alpha,
                        fading_draw(channel.m, rng),
                    )
                    .unwrap_or(0.0);
                    interference_mw += weight * pw;
                }
            }
        }
    }

    let noise_mw = channel.noise_mw();
    let sinr = signal_mw / (interference_mw + noise_mw);
    let sir = if interference_mw > 0.0 {
        signal_mw / interference_mw
    } else if signal_mw > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    (
        assoc,
        SinrSample {
            signal_mw,
            interference_mw,
            noise_mw,
            sinr,
            sir,
        },
    )
}
