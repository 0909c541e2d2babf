//! Simulation drivers: Monte Carlo coverage estimation, probe-lattice
//! geometry studies, time-stepped mobility runs with the full feature stack,
//! and parameter sweeps.
//!
//! Every random quantity is drawn from a stream derived from the root seed
//! and a fixed tag path, and all reductions run in a fixed order, so results
//! are bit-identical regardless of worker count.

use rayon::prelude::*;

use crate::antenna::{
    best_beam_in_layer, grid_offsets, optimal_tilt_deg, random_offsets, BeamPlan, BeamRef, Layer,
    LayerKind,
};
use crate::blockage::{penetration_loss, PenetrationParams};
use crate::config::{db_to_linear, linear_to_db, ScenarioConfig};
use crate::geometry::{sample_environment, GeometryError, GridLayout, UrbanEnvironment, Vec3};
use crate::link::{fading_draw, received_power, LinkGeometry};
use crate::master::{assist_failures, select_master, RateReport};
use crate::mobility::{sample_mission, AdmissionController, FlightPhase, MobilityError};
use crate::rng;

mod tag {
    pub const COVERAGE_ENV: u64 = 0xC0;
    pub const COVERAGE_UAM: u64 = 0xC1;
    pub const COVERAGE_FADE: u64 = 0xC2;
    pub const COLORS: u64 = 0xC3;
    pub const GEOM_ENV: u64 = 0xE0;
    pub const GEOM_HEIGHT: u64 = 0xE1;
    pub const GEOM_FADE: u64 = 0xE2;
    pub const MOB_ENV: u64 = 0xF0;
    pub const MOB_MISSIONS: u64 = 0xF1;
    pub const MOB_FADE: u64 = 0xF2;
}

/// Build the per-site beam plan implied by the feature toggles. `None` means
/// omnidirectional antennas with full reuse.
pub fn build_beam_plan(
    cfg: &ScenarioConfig,
    n_sites: usize,
    grid: Option<&GridLayout>,
    seed: u64,
) -> Option<BeamPlan> {
    if cfg.toggles.omni {
        return None;
    }
    let (delta, n_beam) = if cfg.toggles.reuse_beams {
        (cfg.capacity.delta, cfg.capacity.n_beam)
    } else {
        (1, 1)
    };
    let imd_m = grid
        .map(|g| g.imd_m)
        .unwrap_or_else(|| 1.0 / cfg.spatial.lambda_m_per_m2().sqrt());
    let tilt_for = |h_ref: f64| {
        if cfg.toggles.tilt_opt {
            optimal_tilt_deg(h_ref, cfg.spatial.h_m_m, imd_m, &cfg.antenna)
        } else {
            cfg.beam_plan.conventional_tilt_deg
        }
    };
    let mut layers = vec![Layer {
        kind: LayerKind::Upward,
        tilt_deg: tilt_for(cfg.beam_plan.cruise_ref_height_m),
    }];
    if cfg.toggles.multi_layer {
        layers.push(Layer {
            kind: LayerKind::Downward,
            tilt_deg: tilt_for(cfg.beam_plan.vtol_ref_height_m),
        });
    }
    let site_offsets = match grid {
        Some(g) => grid_offsets(g.rows, g.cols, delta),
        None => random_offsets(n_sites, delta, rng::derive_seed(seed, &[tag::COLORS])),
    };
    Some(BeamPlan {
        sectors: cfg.beam_plan.sectors,
        n_beam,
        delta,
        layers,
        site_offsets,
    })
}

/// Per-site link state shared between association and interference.
struct SiteLink {
    geo: LinkGeometry,
    loss: f64,
    d3: f64,
}

fn site_links(uam: &Vec3, env: &UrbanEnvironment, gamma: f64) -> Vec<SiteLink> {
    let pen = PenetrationParams { gamma };
    env.mbs_sites
        .iter()
        .map(|s| {
            let geo = LinkGeometry::of(s, uam, env);
            SiteLink {
                geo,
                loss: penetration_loss(geo.n_blockers, &pen),
                d3: s.dist_3d(uam),
            }
        })
        .collect()
}

/// Fading-free mean received power of one site toward the vehicle through a
/// given beam (omni when `plan` is `None`).
fn mean_power(
    link: &SiteLink,
    beam: Option<(&BeamPlan, usize, &BeamRef)>,
    cfg: &ScenarioConfig,
    dh: f64,
) -> f64 {
    let gain_db = match beam {
        Some((plan, _site, r)) => {
            plan.beam_gain_toward(r, link.geo.azimuth_deg, link.geo.elevation_deg, &cfg.antenna)
        }
        None => 0.0,
    };
    received_power(
        cfg.channel.p_tx_mw(),
        gain_db,
        link.loss,
        link.geo.r_um_m,
        dh,
        cfg.channel.alpha,
        1.0,
    )
    .unwrap_or(0.0)
}

/// Serving choice restricted to one beam layer.
struct Serving {
    site: usize,
    beam: Option<BeamRef>,
    mean_power_mw: f64,
}

fn associate_in_layer(
    uam: &Vec3,
    env: &UrbanEnvironment,
    links: &[SiteLink],
    plan: Option<&BeamPlan>,
    layer: usize,
    cfg: &ScenarioConfig,
) -> Serving {
    let mut best: Option<(usize, Option<BeamRef>, f64, f64)> = None;
    for (i, link) in links.iter().enumerate() {
        let dh = uam.z - env.mbs_sites[i].z;
        let (beam, p) = match plan {
            Some(pl) => {
                let (b, _) = best_beam_in_layer(
                    pl,
                    layer,
                    link.geo.azimuth_deg,
                    link.geo.elevation_deg,
                    &cfg.antenna,
                );
                (Some(b), mean_power(link, Some((pl, i, &b)), cfg, dh))
            }
            None => (None, mean_power(link, None, cfg, dh)),
        };
        let nearest = matches!(cfg.association, crate::config::AssociationPolicy::NearestSite);
        let better = match &best {
            None => true,
            Some((_, _, bp, bd)) => {
                if nearest {
                    link.d3 < *bd
                } else {
                    p > *bp || (p == *bp && link.d3 < *bd)
                }
            }
        };
        if better {
            best = Some((i, beam, p, link.d3));
        }
    }
    let (site, beam, mean_power_mw, _) = best.expect("at least one site");
    Serving {
        site,
        beam,
        mean_power_mw,
    }
}

/// One SINR draw given a serving choice; interference from co-color beams of
/// other sites, weighted by spectral overlap.
fn sinr_draw(
    uam: &Vec3,
    env: &UrbanEnvironment,
    links: &[SiteLink],
    plan: Option<&BeamPlan>,
    serving: &Serving,
    cfg: &ScenarioConfig,
    rng: &mut impl rand::Rng,
) -> (f64, f64) {
    let signal = serving.mean_power_mw * fading_draw(cfg.channel.m, rng);
    let mut interference = 0.0;
    for (i, link) in links.iter().enumerate() {
        if link.loss == 0.0 || (i == serving.site && plan.is_none()) {
            continue;
        }
        let dh = uam.z - env.mbs_sites[i].z;
        match plan {
            None => {
                interference += mean_power(link, None, cfg, dh) * fading_draw(cfg.channel.m, rng);
            }
            Some(pl) => {
                let sc = pl.colors_of(serving.site, &serving.beam.expect("beamformed serving"));
                for r in pl.beams() {
                    if i == serving.site && Some(r) == serving.beam {
                        continue;
                    }
                    let c = pl.colors_of(i, &r);
                    let lo = c.start.max(sc.start);
                    let hi = c.end.min(sc.end);
                    if lo >= hi {
                        continue;
                    }
                    let weight = (hi - lo) as f64 / c.len() as f64;
                    interference += weight
                        * mean_power(link, Some((pl, i, &r)), cfg, dh)
                        * fading_draw(cfg.channel.m, rng);
                }
            }
        }
    }
    let sinr = signal / (interference + cfg.channel.noise_mw());
    let sir = if interference > 0.0 {
        signal / interference
    } else if signal > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    (sinr, sir)
}

/// Sites restricted to the inscribed circle of the window so the interference
/// field is isotropic around the origin (matches the truncated analytic
/// integrals when the tail radius equals the window half-width).
fn circle_sites(env: UrbanEnvironment) -> UrbanEnvironment {
    let hw = env.half_width;
    let sites = env
        .mbs_sites
        .iter()
        .copied()
        .filter(|s| (s.x * s.x + s.y * s.y).sqrt() <= hw)
        .collect();
    UrbanEnvironment::new(sites, env.uam_nodes, env.buildings, hw)
}

/// Monte Carlo coverage estimate at several SIR thresholds.
#[derive(Debug, Clone)]
pub struct CoverageEstimate {
    pub thresholds_db: Vec<f64>,
    pub coverage: Vec<f64>,
    pub drops: u64,
}

/// Estimate P(SIR > T) for a reference vehicle at the window center with a
/// uniformly drawn height, over independent scene drops.
pub fn coverage_mc(
    cfg: &ScenarioConfig,
    thresholds_db: &[f64],
) -> Result<CoverageEstimate, GeometryError> {
    cfg.spatial
        .collect_violations(&mut Vec::new());
    let thresholds: Vec<f64> = thresholds_db.iter().map(|&t| db_to_linear(t)).collect();
    let counts: Vec<(u64, Vec<u64>)> = (0..cfg.drops)
        .into_par_iter()
        .map(|d| {
            let env = sample_environment(
                &cfg.spatial,
                rng::derive_seed(cfg.seed, &[tag::COVERAGE_ENV, d]),
            )
            .expect("validated spatial params");
            let env = circle_sites(env);
            if env.mbs_sites.is_empty() {
                return (0u64, vec![0u64; thresholds.len()]);
            }
            let mut hrng = rng::stream(cfg.seed, &[tag::COVERAGE_UAM, d]);
            let h = rand::Rng::gen_range(
                &mut hrng,
                cfg.spatial.h_u_min_m..cfg.spatial.h_u_max_m,
            );
            let uam = Vec3::new(0.0, 0.0, h);
            let plan = build_beam_plan(
                cfg,
                env.mbs_sites.len(),
                None,
                rng::derive_seed(cfg.seed, &[tag::COVERAGE_ENV, d]),
            );
            let links = site_links(&uam, &env, cfg.channel.gamma);
            let serving = associate_in_layer(&uam, &env, &links, plan.as_ref(), 0, cfg);
            let mut frng = rng::stream(cfg.seed, &[tag::COVERAGE_FADE, d]);
            let (_, sir) = sinr_draw(&uam, &env, &links, plan.as_ref(), &serving, cfg, &mut frng);
            let hits = thresholds.iter().map(|&t| (sir > t) as u64).collect();
            (1u64, hits)
        })
        .collect();
    // ordered integer reduction: worker count cannot change the result
    let mut valid = 0u64;
    let mut acc = vec![0u64; thresholds.len()];
    for (v, hits) in counts {
        valid += v;
        for (a, h) in acc.iter_mut().zip(hits) {
            *a += h;
        }
    }
    let denom = valid.max(1) as f64;
    Ok(CoverageEstimate {
        thresholds_db: thresholds_db.to_vec(),
        coverage: acc.into_iter().map(|c| c as f64 / denom).collect(),
        drops: valid,
    })
}

/// Coverage at one threshold for a list of fixed probe heights, with paired
/// scenes across heights.
pub fn coverage_vs_height_mc(
    cfg: &ScenarioConfig,
    threshold_db: f64,
    heights: &[f64],
) -> Result<Vec<f64>, GeometryError> {
    let t = db_to_linear(threshold_db);
    let counts: Vec<(u64, Vec<u64>)> = (0..cfg.drops)
        .into_par_iter()
        .map(|d| {
            let env = sample_environment(
                &cfg.spatial,
                rng::derive_seed(cfg.seed, &[tag::COVERAGE_ENV, d]),
            )
            .expect("validated spatial params");
            let env = circle_sites(env);
            if env.mbs_sites.is_empty() {
                return (0u64, vec![0u64; heights.len()]);
            }
            let plan = build_beam_plan(
                cfg,
                env.mbs_sites.len(),
                None,
                rng::derive_seed(cfg.seed, &[tag::COVERAGE_ENV, d]),
            );
            let mut frng = rng::stream(cfg.seed, &[tag::COVERAGE_FADE, d]);
            let hits = heights
                .iter()
                .map(|&h| {
                    let uam = Vec3::new(0.0, 0.0, h);
                    let links = site_links(&uam, &env, cfg.channel.gamma);
                    let serving =
                        associate_in_layer(&uam, &env, &links, plan.as_ref(), 0, cfg);
                    let (_, sir) =
                        sinr_draw(&uam, &env, &links, plan.as_ref(), &serving, cfg, &mut frng);
                    (sir > t) as u64
                })
                .collect();
            (1u64, hits)
        })
        .collect();
    let mut valid = 0u64;
    let mut acc = vec![0u64; heights.len()];
    for (v, hits) in counts {
        valid += v;
        for (a, h) in acc.iter_mut().zip(hits) {
            *a += h;
        }
    }
    let denom = valid.max(1) as f64;
    Ok(acc.into_iter().map(|c| c as f64 / denom).collect())
}

/// One probe of the geometry study.
#[derive(Debug, Clone, Copy)]
pub struct ProbeStat {
    pub x_m: f64,
    pub y_m: f64,
    pub height_m: f64,
    pub sir_db: f64,
    pub serving_blockers: f64,
    pub mean_interferer_blockers: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct QuintileStat {
    pub mean_sir_db: f64,
    pub mean_height_m: f64,
    pub mean_serving_blockers: f64,
    pub mean_interferer_blockers: f64,
}

#[derive(Debug, Clone)]
pub struct GeometryStudy {
    pub probes: Vec<ProbeStat>,
    /// Worst-to-best SIR quintiles.
    pub quintiles: Vec<QuintileStat>,
    pub mean_serving_blockers: f64,
    pub mean_interferer_blockers: f64,
}

/// Probe the scene on a 50 m lattice with random heights and summarize the
/// SIR distribution against the blockage geometry.
pub fn run_geometry_study(cfg: &ScenarioConfig) -> Result<GeometryStudy, GeometryError> {
    let spacing = 50.0;
    let hw = cfg.spatial.window_half_width_m;
    let steps = (2.0 * hw / spacing).floor() as i64;
    let per_drop: Vec<Vec<ProbeStat>> = (0..cfg.drops)
        .into_par_iter()
        .map(|d| {
            let env = sample_environment(
                &cfg.spatial,
                rng::derive_seed(cfg.seed, &[tag::GEOM_ENV, d]),
            )
            .expect("validated spatial params");
            if env.mbs_sites.is_empty() {
                return Vec::new();
            }
            let plan = build_beam_plan(
                cfg,
                env.mbs_sites.len(),
                None,
                rng::derive_seed(cfg.seed, &[tag::GEOM_ENV, d]),
            );
            let mut hrng = rng::stream(cfg.seed, &[tag::GEOM_HEIGHT, d]);
            let mut frng = rng::stream(cfg.seed, &[tag::GEOM_FADE, d]);
            let mut out = Vec::new();
            for ix in 0..steps {
                for iy in 0..steps {
                    let x = -hw + (ix as f64 + 0.5) * spacing;
                    let y = -hw + (iy as f64 + 0.5) * spacing;
                    let h = rand::Rng::gen_range(
                        &mut hrng,
                        cfg.spatial.h_u_min_m..cfg.spatial.h_u_max_m,
                    );
                    let uam = Vec3::new(x, y, h);
                    let links = site_links(&uam, &env, cfg.channel.gamma);
                    let serving =
                        associate_in_layer(&uam, &env, &links, plan.as_ref(), 0, cfg);
                    let (_, sir) =
                        sinr_draw(&uam, &env, &links, plan.as_ref(), &serving, cfg, &mut frng);
                    let n_serv = links[serving.site].geo.n_blockers as f64;
                    let others: Vec<f64> = links
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != serving.site)
                        .map(|(_, l)| l.geo.n_blockers as f64)
                        .collect();
                    let n_intf = if others.is_empty() {
                        0.0
                    } else {
                        others.iter().sum::<f64>() / others.len() as f64
                    };
                    out.push(ProbeStat {
                        x_m: x,
                        y_m: y,
                        height_m: h,
                        sir_db: linear_to_db(sir.max(1e-30)),
                        serving_blockers: n_serv,
                        mean_interferer_blockers: n_intf,
                    });
                }
            }
            out
        })
        .collect();
    let mut probes: Vec<ProbeStat> = per_drop.into_iter().flatten().collect();
    let n = probes.len().max(1) as f64;
    let mean_serving_blockers = probes.iter().map(|p| p.serving_blockers).sum::<f64>() / n;
    let mean_interferer_blockers =
        probes.iter().map(|p| p.mean_interferer_blockers).sum::<f64>() / n;

    let mut order: Vec<usize> = (0..probes.len()).collect();
    order.sort_by(|&a, &b| probes[a].sir_db.partial_cmp(&probes[b].sir_db).unwrap());
    let mut quintiles = Vec::new();
    for q in 0..5 {
        let lo = q * probes.len() / 5;
        let hi = ((q + 1) * probes.len() / 5).max(lo + 1).min(probes.len());
        let idx = &order[lo..hi];
        let m = idx.len() as f64;
        quintiles.push(QuintileStat {
            mean_sir_db: idx.iter().map(|&i| probes[i].sir_db).sum::<f64>() / m,
            mean_height_m: idx.iter().map(|&i| probes[i].height_m).sum::<f64>() / m,
            mean_serving_blockers: idx.iter().map(|&i| probes[i].serving_blockers).sum::<f64>()
                / m,
            mean_interferer_blockers: idx
                .iter()
                .map(|&i| probes[i].mean_interferer_blockers)
                .sum::<f64>()
                / m,
        });
    }
    probes.sort_by(|a, b| {
        (a.x_m, a.y_m)
            .partial_cmp(&(b.x_m, b.y_m))
            .unwrap()
    });
    Ok(GeometryStudy {
        probes,
        quintiles,
        mean_serving_blockers,
        mean_interferer_blockers,
    })
}

/// Per-vehicle success bookkeeping split by flight phase.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReliabilityRecord {
    pub uam_id: u64,
    pub vtol_success: u64,
    pub vtol_total: u64,
    pub cruise_success: u64,
    pub cruise_total: u64,
}

impl ReliabilityRecord {
    pub fn total(&self) -> u64 {
        self.vtol_total + self.cruise_total
    }

    pub fn reliability(&self) -> f64 {
        (self.vtol_success + self.cruise_success) as f64 / self.total().max(1) as f64
    }

    pub fn vtol_reliability(&self) -> f64 {
        self.vtol_success as f64 / self.vtol_total.max(1) as f64
    }

    pub fn cruise_reliability(&self) -> f64 {
        self.cruise_success as f64 / self.cruise_total.max(1) as f64
    }
}

/// One master-assist epoch, kept for the epoch log export.
#[derive(Debug, Clone)]
pub struct EpochLogEntry {
    pub run: u64,
    pub time_s: f64,
    pub master_uam: u64,
    pub failure_uams: Vec<u64>,
    pub deficit: f64,
    /// Rates of the failing vehicles after the assist, in failure order.
    pub post_rates: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MobilityStudy {
    /// Per-vehicle records, concatenated over runs in run order.
    pub records: Vec<ReliabilityRecord>,
    /// Overall step-level success fraction per run.
    pub per_run_reliability: Vec<f64>,
    pub mean_reliability: f64,
    pub vtol_reliability: f64,
    pub cruise_reliability: f64,
    pub master_epochs: u64,
    pub rescued_steps: u64,
    pub epoch_log: Vec<EpochLogEntry>,
}

/// Time-stepped mobility simulation: `cfg.drops` independent runs of
/// `cfg.sim_duration_s`, each with its own scene and mission flow.
pub fn run_mobility_study(cfg: &ScenarioConfig) -> Result<MobilityStudy, MobilityError> {
    let runs: Vec<RunOutcome> = (0..cfg.drops)
        .into_par_iter()
        .map(|d| mobility_run(cfg, d))
        .collect::<Result<_, _>>()?;

    let mut records = Vec::new();
    let mut per_run_reliability = Vec::new();
    let (mut succ, mut tot) = (0u64, 0u64);
    let (mut vs, mut vt, mut cs, mut ct) = (0u64, 0u64, 0u64, 0u64);
    let (mut epochs, mut rescued) = (0u64, 0u64);
    let mut epoch_log = Vec::new();
    for r in runs {
        let rs: u64 = r.records.iter().map(|x| x.vtol_success + x.cruise_success).sum();
        let rt: u64 = r.records.iter().map(|x| x.total()).sum();
        per_run_reliability.push(rs as f64 / rt.max(1) as f64);
        succ += rs;
        tot += rt;
        for x in &r.records {
            vs += x.vtol_success;
            vt += x.vtol_total;
            cs += x.cruise_success;
            ct += x.cruise_total;
        }
        epochs += r.master_epochs;
        rescued += r.rescued_steps;
        records.extend(r.records);
        epoch_log.extend(r.epoch_log);
    }
    Ok(MobilityStudy {
        records,
        per_run_reliability,
        mean_reliability: succ as f64 / tot.max(1) as f64,
        vtol_reliability: vs as f64 / vt.max(1) as f64,
        cruise_reliability: cs as f64 / ct.max(1) as f64,
        master_epochs: epochs,
        rescued_steps: rescued,
        epoch_log,
    })
}

struct RunOutcome {
    records: Vec<ReliabilityRecord>,
    master_epochs: u64,
    rescued_steps: u64,
    epoch_log: Vec<EpochLogEntry>,
}

fn mobility_run(cfg: &ScenarioConfig, run: u64) -> Result<RunOutcome, MobilityError> {
    let env = sample_environment(
        &cfg.spatial,
        rng::derive_seed(cfg.seed, &[tag::MOB_ENV, run]),
    )?;
    if env.mbs_sites.is_empty() {
        return Ok(RunOutcome {
            records: Vec::new(),
            master_epochs: 0,
            rescued_steps: 0,
            epoch_log: Vec::new(),
        });
    }
    let plan = build_beam_plan(
        cfg,
        env.mbs_sites.len(),
        None,
        rng::derive_seed(cfg.seed, &[tag::MOB_ENV, run]),
    );
    let mut mission_rng = rng::stream(cfg.seed, &[tag::MOB_MISSIONS, run]);
    let mut ac = AdmissionController::new(cfg.mobility.max_concurrent);
    let mut records: std::collections::BTreeMap<u64, ReliabilityRecord> = Default::default();
    let mut master_epochs = 0u64;
    let mut rescued_steps = 0u64;
    let mut epoch_log = Vec::new();

    let target_rate = cfg.capacity.tau_r_bits / cfg.capacity.t_r_s;
    let n_colors = match &plan {
        Some(p) => (p.delta * p.n_beam) as f64,
        None => 1.0,
    };
    let bw_per_color = cfg.capacity.bandwidth_hz / n_colors;

    let steps = (cfg.sim_duration_s / cfg.mobility.dt_s).ceil() as u64;
    for step in 0..steps {
        let now = step as f64 * cfg.mobility.dt_s;
        while ac.active().len() + ac.queued() < cfg.mobility.max_concurrent {
            ac.submit(sample_mission(
                &cfg.mobility,
                &cfg.spatial,
                &env.buildings,
                &mut mission_rng,
            )?);
        }
        ac.step(now, &cfg.mobility);
        let mut frng = rng::stream(cfg.seed, &[tag::MOB_FADE, run, step]);

        // snapshot states; skip vehicles on the ground
        struct Flyer {
            id: u64,
            pos: Vec3,
            phase: FlightPhase,
        }
        let flyers: Vec<Flyer> = ac
            .active()
            .iter()
            .filter_map(|a| {
                let (pos, phase) = a.state_at(now, &cfg.mobility);
                if phase == FlightPhase::Completed || pos.z <= 0.0 {
                    None
                } else {
                    Some(Flyer {
                        id: a.id,
                        pos,
                        phase,
                    })
                }
            })
            .collect();
        if flyers.is_empty() {
            continue;
        }

        // association pass: each vehicle collects every (site, layer-best
        // beam) within 3 dB of its strongest option, then a greedy pass
        // steers near-tie vehicles onto the least-loaded beam, as a live
        // scheduler would
        struct Attach {
            serving: Serving,
            links: Vec<SiteLink>,
        }
        let relief = db_to_linear(-3.0);
        let prepared: Vec<(Vec<SiteLink>, Vec<Serving>)> = flyers
            .iter()
            .map(|f| {
                let links = site_links(&f.pos, &env, cfg.channel.gamma);
                let cands = match &plan {
                    None => vec![associate_in_layer(&f.pos, &env, &links, None, 0, cfg)],
                    Some(pl) => {
                        let mut v = Vec::new();
                        for (i, link) in links.iter().enumerate() {
                            let dh = f.pos.z - env.mbs_sites[i].z;
                            for layer in 0..pl.layers.len() {
                                let (b, _) = best_beam_in_layer(
                                    pl,
                                    layer,
                                    link.geo.azimuth_deg,
                                    link.geo.elevation_deg,
                                    &cfg.antenna,
                                );
                                let p = mean_power(link, Some((pl, i, &b)), cfg, dh);
                                v.push(Serving {
                                    site: i,
                                    beam: Some(b),
                                    mean_power_mw: p,
                                });
                            }
                        }
                        let best = v.iter().map(|s| s.mean_power_mw).fold(0.0, f64::max);
                        v.retain(|s| s.mean_power_mw >= best * relief);
                        v
                    }
                };
                (links, cands)
            })
            .collect();

        let mut load: std::collections::HashMap<(usize, usize, u32, u32), u32> =
            Default::default();
        let key_of = |s: &Serving| match &s.beam {
            Some(b) => (s.site, b.layer, b.sector, b.beam),
            None => (s.site, 0, 0, 0),
        };
        let attach: Vec<Attach> = prepared
            .into_iter()
            .map(|(links, cands)| {
                let serving = cands
                    .into_iter()
                    .map(|s| {
                        let l = load.get(&key_of(&s)).copied().unwrap_or(0);
                        (l, s)
                    })
                    .min_by(|(la, a), (lb, b)| {
                        la.cmp(lb).then(
                            b.mean_power_mw
                                .partial_cmp(&a.mean_power_mw)
                                .unwrap_or(std::cmp::Ordering::Equal),
                        )
                    })
                    .map(|(_, s)| s)
                    .expect("at least one candidate");
                *load.entry(key_of(&serving)).or_default() += 1;
                Attach { serving, links }
            })
            .collect();

        // rate pass
        let rates: Vec<f64> = flyers
            .iter()
            .zip(&attach)
            .map(|(f, a)| {
                let (sinr, _) =
                    sinr_draw(&f.pos, &env, &a.links, plan.as_ref(), &a.serving, cfg, &mut frng);
                let beam_bw = match (&plan, &a.serving.beam) {
                    (Some(p), Some(b)) => {
                        bw_per_color * p.colors_of(a.serving.site, b).len() as f64
                    }
                    _ => cfg.capacity.bandwidth_hz,
                };
                let key = match &a.serving.beam {
                    Some(b) => (a.serving.site, b.layer, b.sector, b.beam),
                    None => (a.serving.site, 0, 0, 0),
                };
                let share = beam_bw / load[&key] as f64;
                share * (1.0 + sinr).log2()
            })
            .collect();

        let mut success: Vec<bool> = rates.iter().map(|&r| r >= target_rate).collect();

        if cfg.toggles.master && flyers.len() > 1 {
            let report = RateReport {
                rates: rates.clone(),
                target: target_rate,
            };
            if let Some(sel) = select_master(&report) {
                master_epochs += 1;
                let positions: Vec<Vec3> = flyers.iter().map(|f| f.pos).collect();
                let assists = assist_failures(
                    sel.master,
                    &positions,
                    &sel.failures,
                    &env,
                    &cfg.master,
                    &cfg.channel,
                    &mut frng,
                );
                let mut post_rates = Vec::with_capacity(sel.failures.len());
                for (&j, &extra) in sel.failures.iter().zip(&assists) {
                    post_rates.push(rates[j] + extra);
                    if rates[j] + extra >= target_rate {
                        success[j] = true;
                        rescued_steps += 1;
                    }
                }
                epoch_log.push(EpochLogEntry {
                    run,
                    time_s: now,
                    master_uam: flyers[sel.master].id,
                    failure_uams: sel.failures.iter().map(|&j| flyers[j].id).collect(),
                    deficit: sel.deficit,
                    post_rates,
                });
                // the master spends the served deficit out of its own surplus
                success[sel.master] = rates[sel.master] - sel.deficit >= target_rate;
            }
        }

        for (f, ok) in flyers.iter().zip(&success) {
            let rec = records.entry(f.id).or_insert_with(|| ReliabilityRecord {
                uam_id: f.id,
                ..Default::default()
            });
            if f.phase.is_vtol() {
                rec.vtol_total += 1;
                rec.vtol_success += *ok as u64;
            } else {
                rec.cruise_total += 1;
                rec.cruise_success += *ok as u64;
            }
        }
    }
    Ok(RunOutcome {
        records: records.into_values().collect(),
        master_epochs,
        rescued_steps,
        epoch_log,
    })
}

/// Trajectory positions only (no radio), for trace export.
pub fn trajectory_trace(
    cfg: &ScenarioConfig,
    run: u64,
) -> Result<Vec<(f64, u64, Vec3, FlightPhase)>, MobilityError> {
    let env = sample_environment(
        &cfg.spatial,
        rng::derive_seed(cfg.seed, &[tag::MOB_ENV, run]),
    )?;
    let mut mission_rng = rng::stream(cfg.seed, &[tag::MOB_MISSIONS, run]);
    let mut ac = AdmissionController::new(cfg.mobility.max_concurrent);
    let mut rows = Vec::new();
    let steps = (cfg.sim_duration_s / cfg.mobility.dt_s).ceil() as u64;
    for step in 0..steps {
        let now = step as f64 * cfg.mobility.dt_s;
        while ac.active().len() + ac.queued() < cfg.mobility.max_concurrent {
            ac.submit(sample_mission(
                &cfg.mobility,
                &cfg.spatial,
                &env.buildings,
                &mut mission_rng,
            )?);
        }
        ac.step(now, &cfg.mobility);
        for a in ac.active() {
            let (pos, phase) = a.state_at(now, &cfg.mobility);
            rows.push((now, a.id, pos, phase));
        }
    }
    Ok(rows)
}

/// Set a named scalar parameter on a config copy. Used by the sweep driver.
pub fn apply_param(cfg: &mut ScenarioConfig, name: &str, value: f64) -> Result<(), String> {
    match name {
        "imd_m" => {
            let km = value / 1000.0;
            if !(km > 0.0) {
                return Err("imd_m must be positive".into());
            }
            cfg.spatial.lambda_m_per_km2 = 1.0 / (km * km);
        }
        "lambda_m_per_km2" => cfg.spatial.lambda_m_per_km2 = value,
        "lambda_b_per_km2" => cfg.spatial.lambda_b_per_km2 = value,
        "sigma_hb_m" => cfg.spatial.sigma_hb_m = value,
        "h_m_m" => cfg.spatial.h_m_m = value,
        "h_u_max_m" => cfg.spatial.h_u_max_m = value,
        "delta" => cfg.capacity.delta = value as u32,
        "n_beam" => cfg.capacity.n_beam = value as u32,
        "bandwidth_hz" => cfg.capacity.bandwidth_hz = value,
        "tau_r_bits" => cfg.capacity.tau_r_bits = value,
        _ => return Err(format!("unknown sweep parameter `{name}`")),
    }
    cfg.validate().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub value: f64,
    pub coverage_at_0db: f64,
}

/// Re-estimate coverage at 0 dB across a parameter grid with paired seeds.
pub fn sweep(
    cfg: &ScenarioConfig,
    name: &str,
    values: &[f64],
) -> Result<Vec<SweepPoint>, String> {
    values
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            apply_param(&mut c, name, v)?;
            let est = coverage_mc(&c, &[0.0]).map_err(|e| e.to_string())?;
            Ok(SweepPoint {
                value: v,
                coverage_at_0db: est.coverage[0],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::desk_scale();
        cfg.drops = 200;
        cfg.toggles.omni = true;
        cfg.association = crate::config::AssociationPolicy::NearestSite;
        cfg
    }

    #[test]
    fn coverage_mc_is_deterministic_across_worker_counts() {
        let cfg = quick_cfg();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| coverage_mc(&cfg, &[-5.0, 0.0, 5.0]).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.coverage, b.coverage);
        assert_eq!(a.drops, b.drops);
        let c = run(4);
        assert_eq!(b.coverage, c.coverage);
    }

    #[test]
    fn coverage_mc_monotone_in_threshold() {
        let cfg = quick_cfg();
        let est = coverage_mc(&cfg, &[-10.0, 0.0, 10.0]).unwrap();
        assert!(est.coverage[0] >= est.coverage[1]);
        assert!(est.coverage[1] >= est.coverage[2]);
    }

    #[test]
    fn plan_construction_follows_toggles() {
        let mut cfg = ScenarioConfig::desk_scale();
        cfg.toggles.omni = true;
        assert!(build_beam_plan(&cfg, 10, None, 1).is_none());

        cfg.toggles.omni = false;
        cfg.toggles.reuse_beams = false;
        cfg.toggles.multi_layer = false;
        cfg.toggles.tilt_opt = false;
        let p = build_beam_plan(&cfg, 10, None, 1).unwrap();
        assert_eq!((p.delta, p.n_beam, p.layers.len()), (1, 1, 1));
        assert_eq!(p.layers[0].tilt_deg, cfg.beam_plan.conventional_tilt_deg);

        cfg.toggles.reuse_beams = true;
        cfg.toggles.multi_layer = true;
        let p = build_beam_plan(&cfg, 10, None, 1).unwrap();
        assert_eq!((p.delta, p.n_beam, p.layers.len()), (3, 3, 2));
        assert_eq!(p.layers[1].kind, LayerKind::Downward);
        assert_eq!(p.site_offsets.len(), 10);
    }

    #[test]
    fn upward_tilt_above_downward_tilt_with_optimization() {
        let cfg = ScenarioConfig::desk_scale();
        let p = build_beam_plan(&cfg, 4, None, 1).unwrap();
        // cruise reference sits far above the VTOL reference
        assert!(p.layers[0].tilt_deg < p.layers[1].tilt_deg);
    }

    #[test]
    fn mobility_study_smoke_and_determinism() {
        let mut cfg = ScenarioConfig::desk_scale();
        cfg.drops = 2;
        cfg.sim_duration_s = 10.0;
        cfg.mobility.max_concurrent = 5;
        let a = run_mobility_study(&cfg).unwrap();
        let b = run_mobility_study(&cfg).unwrap();
        assert!(a.mean_reliability >= 0.0 && a.mean_reliability <= 1.0);
        assert!(!a.records.is_empty());
        assert_eq!(a.per_run_reliability, b.per_run_reliability);
        assert_eq!(a.records.len(), b.records.len());
        let tot: u64 = a.records.iter().map(|r| r.total()).sum();
        assert!(tot > 0);
    }

    #[test]
    fn sweep_rejects_unknown_parameter() {
        let cfg = quick_cfg();
        assert!(sweep(&cfg, "no_such_param", &[1.0]).is_err());
    }

    #[test]
    fn sweep_is_paired_and_deterministic() {
        let mut cfg = quick_cfg();
        cfg.drops = 50;
        let a = sweep(&cfg, "lambda_b_per_km2", &[100.0, 300.0]).unwrap();
        let b = sweep(&cfg, "lambda_b_per_km2", &[100.0, 300.0]).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].coverage_at_0db, b[0].coverage_at_0db);
        assert_eq!(a[1].coverage_at_0db, b[1].coverage_at_0db);
    }

    #[test]
    fn trajectory_trace_respects_cap_and_grows() {
        let mut cfg = ScenarioConfig::desk_scale();
        cfg.sim_duration_s = 5.0;
        cfg.mobility.max_concurrent = 3;
        let rows = trajectory_trace(&cfg, 0).unwrap();
        assert!(!rows.is_empty());
        // no step may show more than the cap
        let mut per_t: std::collections::HashMap<u64, usize> = Default::default();
        for (t, _, _, _) in &rows {
            *per_t.entry((t * 10.0).round() as u64).or_default() += 1;
        }
        assert!(per_t.values().all(|&n| n <= 3));
    }
}
