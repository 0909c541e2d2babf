//! Per-link blockage decisions and penetration loss.
//!
//! A building blocks a link when both the vertical condition (the link height
//! at the crossing point is at or below the roof) and the horizontal
//! condition (the link azimuth falls inside the building's corner-angle
//! silhouette, with the crossing strictly between the endpoints) hold.
//! `oracle_count_blockers` provides an independent exact segment-vs-box
//! check used to audit the condition-based path.
//!
//! Conventions, applied identically on both paths:
//! * boundary ties (grazing a face, crossing height exactly equal to the
//!   roof) count as blocked (closed box);
//! * a link with zero 2D length (vehicle directly above the site) has no
//!   building strictly between its endpoints and counts zero blockers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{link_2d_distance, Building, UrbanEnvironment, Vec3};

#[derive(Debug, Error)]
pub enum BlockageError {
    #[error("crossing distance {r_bm} outside the link interval [0, {r_um}]")]
    CrossingOutsideLink { r_bm: f64, r_um: f64 },
}

/// Penetration-loss scale factor per blocking building.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PenetrationParams {
    pub gamma: f64,
}

/// Count and resulting multiplicative power loss for one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageOutcome {
    pub n_blockers: usize,
    pub loss_linear: f64,
}

/// Height of the straight link above ground at along-link distance `r_bm`
/// from the site (linear interpolation between the endpoint heights).
pub fn link_height_at(mbs: &Vec3, uam: &Vec3, r_um: f64, r_bm: f64) -> f64 {
    if r_um == 0.0 {
        return mbs.z.min(uam.z);
    }
    if uam.z > mbs.z {
        // ascending toward the vehicle
        r_bm * (uam.z - mbs.z) / r_um + mbs.z
    } else {
        // descending: measured from the remaining distance to the vehicle
        (r_um - r_bm) * (mbs.z - uam.z) / r_um + uam.z
    }
}

/// Vertical condition: the link's penetration height at `r_bm` (measured
/// from the site along the link) is at or below the roof height `h_b`.
pub fn vertical_blocks(mbs: &Vec3, uam: &Vec3, r_bm: f64, h_b: f64) -> Result<bool, BlockageError> {
    let r_um = link_2d_distance(mbs, uam);
    if r_bm < 0.0 || r_bm > r_um {
        return Err(BlockageError::CrossingOutsideLink { r_bm, r_um });
    }
    Ok(link_height_at(mbs, uam, r_um, r_bm) <= h_b)
}

/// Horizontal condition: the link azimuth lies inside the corner-angle
/// interval of the building silhouette seen from the site. Corner picks per
/// azimuth quadrant; angle comparisons are wrapped so links near the +-pi
/// branch cut are handled. A site inside the footprint counts as blocked.
pub fn horizontal_blocks(mbs: &Vec3, uam: &Vec3, bx: f64, by: f64, w: f64, d: f64) -> bool {
    if (mbs.x - bx).abs() <= w / 2.0 && (mbs.y - by).abs() <= d / 2.0 {
        return true;
    }
    let dx = uam.x - mbs.x;
    let dy = uam.y - mbs.y;
    if dx == 0.0 && dy == 0.0 {
        // zero-length 2D link: blocked only if the site is inside the
        // footprint, handled above
        return false;
    }
    let theta = dy.atan2(dx);
    let corner = |sx: f64, sy: f64| -> f64 {
        (by + sy * d / 2.0 - mbs.y).atan2(bx + sx * w / 2.0 - mbs.x)
    };
    // extreme corners per azimuth quadrant
    let (theta_min, theta_max) = if theta >= 0.0 && theta <= std::f64::consts::FRAC_PI_2 {
        (corner(1.0, -1.0), corner(-1.0, 1.0))
    } else if theta > std::f64::consts::FRAC_PI_2 {
        (corner(1.0, 1.0), corner(-1.0, -1.0))
    } else if theta < -std::f64::consts::FRAC_PI_2 {
        (corner(-1.0, 1.0), corner(1.0, -1.0))
    } else {
        (corner(-1.0, -1.0), corner(1.0, 1.0))
    };
    let wrap = |a: f64| -> f64 {
        let mut v = a % std::f64::consts::TAU;
        if v > std::f64::consts::PI {
            v -= std::f64::consts::TAU;
        } else if v <= -std::f64::consts::PI {
            v += std::f64::consts::TAU;
        }
        v
    };
    wrap(theta - theta_min) >= 0.0 && wrap(theta_max - theta) >= 0.0
}

/// The along-link parameter interval `[t0, t1]` (in meters from the site,
/// clamped to `[0, r_um]`) over which the 2D link crosses the footprint.
/// `None` when the footprint is missed.
pub fn footprint_crossing(mbs: &Vec3, uam: &Vec3, b: &Building) -> Option<(f64, f64)> {
    let r_um = link_2d_distance(mbs, uam);
    if r_um == 0.0 {
        return None;
    }
    let ux = (uam.x - mbs.x) / r_um;
    let uy = (uam.y - mbs.y) / r_um;
    let mut t0 = 0.0f64;
    let mut t1 = r_um;
    for (p0, dir, lo, hi) in [
        (mbs.x, ux, b.x - b.w / 2.0, b.x + b.w / 2.0),
        (mbs.y, uy, b.y - b.d / 2.0, b.y + b.d / 2.0),
    ] {
        if dir == 0.0 {
            if p0 < lo || p0 > hi {
                return None;
            }
        } else {
            let mut ta = (lo - p0) / dir;
            let mut tb = (hi - p0) / dir;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
    }
    Some((t0, t1))
}

/// Condition-based test for one building: horizontal corner-angle condition,
/// crossing interval strictly inside the link, and the vertical condition
/// evaluated at the lowest point of the link over the crossing.
pub fn blocks_link(mbs: &Vec3, uam: &Vec3, b: &Building) -> bool {
    let r_um = link_2d_distance(mbs, uam);
    if r_um == 0.0 {
        return false;
    }
    if !horizontal_blocks(mbs, uam, b.x, b.y, b.w, b.d) {
        return false;
    }
    let Some((t0, t1)) = footprint_crossing(mbs, uam, b) else {
        return false;
    };
    // the crossing must intersect the open link interval
    if t1 <= 0.0 || t0 >= r_um {
        return false;
    }
    // link height is linear in t: its minimum over the crossing sits at an end
    let h0 = link_height_at(mbs, uam, r_um, t0);
    let h1 = link_height_at(mbs, uam, r_um, t1);
    h0.min(h1) <= b.h
}

/// Statistical-model variant of the blockage test: the vertical condition is
/// evaluated at the building center's along-link projection instead of over
/// the whole crossing interval. The closed-form blockage statistics average
/// exactly this point condition, so the radio path uses it; the exact
/// interval test above stays authoritative for geometry audits.
pub fn blocks_link_center(mbs: &Vec3, uam: &Vec3, b: &Building) -> bool {
    let r_um = link_2d_distance(mbs, uam);
    if r_um == 0.0 {
        return false;
    }
    if !horizontal_blocks(mbs, uam, b.x, b.y, b.w, b.d) {
        return false;
    }
    let ux = (uam.x - mbs.x) / r_um;
    let uy = (uam.y - mbs.y) / r_um;
    let t = (b.x - mbs.x) * ux + (b.y - mbs.y) * uy;
    if t <= 0.0 || t >= r_um {
        return false;
    }
    link_height_at(mbs, uam, r_um, t) <= b.h
}

/// Blocker count under the point (building-center) vertical condition.
pub fn count_blockers_center(mbs: &Vec3, uam: &Vec3, env: &UrbanEnvironment) -> usize {
    if env.buildings.is_empty() {
        return 0;
    }
    env.candidate_buildings(mbs, uam)
        .into_iter()
        .filter(|&k| blocks_link_center(mbs, uam, &env.buildings[k]))
        .count()
}

/// Number of buildings blocking the site->vehicle link, via the
/// condition-based test and the environment's spatial index.
pub fn count_blockers(mbs: &Vec3, uam: &Vec3, env: &UrbanEnvironment) -> usize {
    if env.buildings.is_empty() {
        return 0;
    }
    env.candidate_buildings(mbs, uam)
        .into_iter()
        .filter(|&k| blocks_link(mbs, uam, &env.buildings[k]))
        .count()
}

/// Independent oracle: exact slab intersection of the open 3D segment
/// site->vehicle with each closed box footprint x [0, h]. Scans every
/// building without the spatial index.
pub fn oracle_count_blockers(mbs: &Vec3, uam: &Vec3, env: &UrbanEnvironment) -> usize {
    let r_um = link_2d_distance(mbs, uam);
    if r_um == 0.0 {
        return 0;
    }
    env.buildings
        .iter()
        .filter(|b| segment_box_intersects(mbs, uam, b))
        .count()
}

/// Does the open segment a->b meet the closed box `footprint x [0, h]`?
/// Parameterized over s in (0, 1); ties (grazing) count as intersecting.
fn segment_box_intersects(a: &Vec3, b: &Vec3, bld: &Building) -> bool {
    let mut s0 = 0.0f64;
    let mut s1 = 1.0f64;
    for (p0, dp, lo, hi) in [
        (a.x, b.x - a.x, bld.x - bld.w / 2.0, bld.x + bld.w / 2.0),
        (a.y, b.y - a.y, bld.y - bld.d / 2.0, bld.y + bld.d / 2.0),
        (a.z, b.z - a.z, 0.0, bld.h),
    ] {
        if dp == 0.0 {
            if p0 < lo || p0 > hi {
                return false;
            }
        } else {
            let mut sa = (lo - p0) / dp;
            let mut sb = (hi - p0) / dp;
            if sa > sb {
                std::mem::swap(&mut sa, &mut sb);
            }
            s0 = s0.max(sa);
            s1 = s1.min(sb);
            if s0 > s1 {
                return false;
            }
        }
    }
    // open segment: require some crossing strictly between the endpoints,
    // but keep grazing ties (s0 == s1 inside) as blocked
    s1 > 0.0 && s0 < 1.0
}

/// Total multiplicative penetration loss `gamma^n`.
pub fn penetration_loss(n_blockers: usize, params: &PenetrationParams) -> f64 {
    if n_blockers == 0 {
        1.0
    } else {
        params.gamma.powi(n_blockers as i32)
    }
}

/// Count and loss in one call.
pub fn blockage_outcome(
    mbs: &Vec3,
    uam: &Vec3,
    env: &UrbanEnvironment,
    params: &PenetrationParams,
) -> BlockageOutcome {
    let n = count_blockers(mbs, uam, env);
    BlockageOutcome {
        n_blockers: n,
        loss_linear: penetration_loss(n, params),
    }
}
