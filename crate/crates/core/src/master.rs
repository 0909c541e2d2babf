//! Master-vehicle assistive transmission: pick the vehicle with the largest
//! rate surplus to re-broadcast C2 traffic to vehicles whose own link missed
//! the target rate, over a dedicated air-to-air band.

use rand::Rng;

use crate::blockage::{count_blockers_center, penetration_loss, PenetrationParams};
use crate::config::{ChannelParams, MasterLinkParams};
use crate::geometry::{link_2d_distance, UrbanEnvironment, Vec3};
use crate::link::{received_power, LinkError};

/// Achieved rates of a scheduling epoch against the common target.
#[derive(Debug, Clone)]
pub struct RateReport {
    /// Per-vehicle achieved rate, bit/s.
    pub rates: Vec<f64>,
    /// Common target rate, bit/s.
    pub target: f64,
}

impl RateReport {
    pub fn deficiency(&self, j: usize) -> f64 {
        self.rates[j] - self.target
    }
}

/// Outcome of master selection.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterSelection {
    pub master: usize,
    /// Vehicles below target, in index order.
    pub failures: Vec<usize>,
    /// Sum of failure deficits the master has to cover, bit/s.
    pub deficit: f64,
}

/// Select the master vehicle: among vehicles meeting the target, the one
/// with the largest surplus, provided that surplus strictly exceeds the
/// summed deficit of the failing vehicles. No failures, or no vehicle
/// clearing the bar, means no master. Surplus ties go to the lowest index;
/// a zero deficiency counts as success.
pub fn select_master(report: &RateReport) -> Option<MasterSelection> {
    assert!(!report.rates.is_empty());
    let mut failures = Vec::new();
    let mut deficit = 0.0;
    for (j, _) in report.rates.iter().enumerate() {
        let d = report.deficiency(j);
        if d < 0.0 {
            failures.push(j);
            deficit += -d;
        }
    }
    if failures.is_empty() {
        return None;
    }
    let mut best: Option<(usize, f64)> = None;
    for (j, _) in report.rates.iter().enumerate() {
        let d = report.deficiency(j);
        if d < 0.0 || d <= deficit {
            continue;
        }
        match best {
            Some((_, bd)) if d <= bd => {}
            _ => best = Some((j, d)),
        }
    }
    best.map(|(master, _)| MasterSelection {
        master,
        failures,
        deficit,
    })
}

/// Linear SNR of the master-to-vehicle broadcast link. Dedicated band, so no
/// interference; blockage and fading follow the ground-to-air model.
pub fn master_snr(
    master: &Vec3,
    uam: &Vec3,
    env: &UrbanEnvironment,
    params: &MasterLinkParams,
    channel: &ChannelParams,
    fading: f64,
) -> Result<f64, LinkError> {
    let n = count_blockers_center(master, uam, env);
    let loss = penetration_loss(n, &PenetrationParams { gamma: channel.gamma });
    let p = received_power(
        params.p_tx_mw(),
        0.0,
        loss,
        link_2d_distance(master, uam),
        uam.z - master.z,
        channel.alpha,
        fading,
    )?;
    Ok(p / channel.noise_mw())
}

/// Extra rate the master provides to one of `n_uf` failing vehicles under
/// equal scheduling of the broadcast band, bit/s.
pub fn assistive_rate(snr_linear: f64, n_uf: usize, params: &MasterLinkParams) -> f64 {
    assert!(n_uf >= 1);
    params.bandwidth_hz / n_uf as f64 * (1.0 + snr_linear).log2()
}

/// Assistive rate toward each failure vehicle, with an independent fading
/// draw per link.
pub fn assist_failures(
    master_idx: usize,
    positions: &[Vec3],
    failures: &[usize],
    env: &UrbanEnvironment,
    params: &MasterLinkParams,
    channel: &ChannelParams,
    rng: &mut impl Rng,
) -> Vec<f64> {
    failures
        .iter()
        .map(|&j| {
            debug_assert_ne!(j, master_idx);
            let fading = crate::link::fading_draw(channel.m, rng);
            match master_snr(
                &positions[master_idx],
                &positions[j],
                env,
                params,
                channel,
                fading,
            ) {
                Ok(snr) => assistive_rate(snr, failures.len(), params),
                Err(_) => 0.0,
            }
        })
        .collect()
}

/// Reference implementation used by the equivalence tests: filter then scan.
pub fn select_master_brute_force(report: &RateReport) -> Option<MasterSelection> {
    let n = report.rates.len();
    let failures: Vec<usize> = (0..n).filter(|&j| report.deficiency(j) < 0.0).collect();
    if failures.is_empty() {
        return None;
    }
    let deficit: f64 = failures.iter().map(|&j| -report.deficiency(j)).sum();
    (0..n)
        .filter(|&j| report.deficiency(j) >= 0.0 && report.deficiency(j) > deficit)
        .fold(None, |acc: Option<usize>, j| match acc {
            Some(b) if report.deficiency(b) >= report.deficiency(j) => Some(b),
            _ => Some(j),
        })
        .map(|master| MasterSelection {
            master,
            failures,
            deficit,
        })
}
