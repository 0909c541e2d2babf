//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines; the test harness verdict per test is the same signal.

use std::sync::Mutex;
use std::time::Instant;

use rand::Rng as _;
use uamnet::analytics::{
    coverage_probability, coverage_with_reuse, mean_blockers_3d, mean_horizontal_blockers,
    supportable_uams, AnalyticScenario,
};
use uamnet::antenna::optimal_tilt_deg;
use uamnet::blockage::{blocks_link_center, count_blockers, footprint_crossing, oracle_count_blockers};
use uamnet::config::{AssociationPolicy, ScenarioConfig};
use uamnet::geometry::{poisson_count, sample_environment, Building, SpatialParams, Vec3};
use uamnet::master::{select_master, select_master_brute_force, RateReport};
use uamnet::rng;
use uamnet::sim::{coverage_mc, coverage_vs_height_mc, run_mobility_study};

// the heavy tests share one core and one rayon pool; serialize them
static GATE: Mutex<()> = Mutex::new(());

fn gate() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(line: &str) {
    println!("{line}");
}

/// Tractable channel the closed forms are exact for: omnidirectional
/// sites, impenetrable buildings, Rayleigh fading, nearest-site
/// association, and an interference field truncated at the window edge on
/// both sides of the comparison.
fn tractable(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut c = cfg.clone();
    c.toggles.omni = true;
    c.channel.gamma = 0.0;
    c.channel.m = 1;
    c.association = AssociationPolicy::NearestSite;
    c.spatial.window_half_width_m = 1500.0;
    c.quadrature.tail_radius_m = c.spatial.window_half_width_m;
    c
}

fn percentile_bootstrap_p_le_zero(deltas: &[f64], tag: u64) -> f64 {
    let mut r = rng::stream(0xACC0, &[tag]);
    let n = deltas.len();
    let reps = 4000;
    let mut lo = 0u32;
    for _ in 0..reps {
        let mut s = 0.0;
        for _ in 0..n {
            s += deltas[r.gen_range(0..n)];
        }
        if s / n as f64 <= 0.0 {
            lo += 1;
        }
    }
    lo as f64 / reps as f64
}

#[test]
fn c01_blockage_oracle_equivalence() {
    let _g = gate();
    let t0 = Instant::now();
    let base = SpatialParams::default();
    let configs: Vec<SpatialParams> = vec![
        base.clone(),
        SpatialParams { lambda_b_per_km2: 100.0, sigma_hb_m: 40.0, ..base.clone() },
        SpatialParams { w_m: 20.0, d_m: 80.0, h_m_m: 10.0, ..base.clone() },
        SpatialParams { lambda_b_per_km2: 600.0, w_m: 15.0, d_m: 15.0, ..base.clone() },
        SpatialParams { window_half_width_m: 600.0, sigma_hb_m: 10.0, h_m_m: 50.0, ..base },
    ];
    let links_per_config = 10_000u64;
    let mut mismatches = 0u64;
    for (k, sp) in configs.iter().enumerate() {
        let env = sample_environment(sp, rng::derive_seed(0xB10C, &[k as u64])).unwrap();
        assert!(!env.mbs_sites.is_empty(), "config {k} drew zero sites");
        let mut g = rng::stream(0xB10C, &[k as u64, 1]);
        let hw = sp.window_half_width_m;
        for _ in 0..links_per_config {
            let uam = Vec3::new(
                g.gen_range(-hw..hw),
                g.gen_range(-hw..hw),
                g.gen_range(sp.h_u_min_m..sp.h_u_max_m),
            );
            let site = &env.mbs_sites[g.gen_range(0..env.mbs_sites.len())];
            if count_blockers(site, &uam, &env) != oracle_count_blockers(site, &uam, &env) {
                mismatches += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert_eq!(mismatches, 0, "{mismatches} fast/oracle mismatches");
    assert!(secs < 10.0, "took {secs:.1} s, limit 10 s");
    verdict(&format!(
        "criterion 01 blockage oracle equivalence: PASS ({} links x {} configs, 0 mismatches, {secs:.1} s)",
        links_per_config,
        configs.len()
    ));
}

#[test]
fn c02_analytic_coverage_matches_mc() {
    let _g = gate();
    let t0 = Instant::now();
    let mut cfg = tractable(&ScenarioConfig::desk_scale());
    cfg.drops = 100_000;
    let thresholds = [-5.0, 0.0, 5.0, 10.0];
    let mc = coverage_mc(&cfg, &thresholds).unwrap();
    let scn = AnalyticScenario::from_config(&cfg);
    let mut worst = 0.0f64;
    for (i, &t) in thresholds.iter().enumerate() {
        let a = coverage_probability(10f64.powf(t / 10.0), &scn).unwrap().value;
        let diff = (a - mc.coverage[i]).abs();
        worst = worst.max(diff);
        assert!(
            diff <= 0.02,
            "T={t} dB: analytic {a:.4} vs mc {:.4}, |diff| {diff:.4} > 0.02",
            mc.coverage[i]
        );
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 300.0, "took {secs:.1} s, limit 300 s");
    verdict(&format!(
        "criterion 02 analytic coverage vs monte carlo: PASS (1e5 drops, worst |diff| {worst:.4} <= 0.02, {secs:.1} s)"
    ));
}

#[test]
fn c03_blocker_count_means() {
    let _g = gate();
    let sp = SpatialParams::default();
    let lam = sp.lambda_b_per_m2();
    let margin = (sp.w_m * sp.w_m + sp.d_m * sp.d_m).sqrt() / 2.0 + 5.0;

    // horizontal crossings of a 150 m ground projection, empirical PPP
    let r = 150.0;
    let mut g = rng::stream(0xC3, &[0]);
    let mut crossings = 0u64;
    let drops = 120_000u32;
    for _ in 0..drops {
        let th: f64 = g.gen_range(0.0..2.0 * std::f64::consts::PI);
        let a = Vec3::new(0.0, 0.0, sp.h_m_m);
        let b = Vec3::new(r * th.cos(), r * th.sin(), 150.0);
        let (x0, x1) = (a.x.min(b.x) - margin, a.x.max(b.x) + margin);
        let (y0, y1) = (a.y.min(b.y) - margin, a.y.max(b.y) + margin);
        let n = poisson_count(&mut g, lam * (x1 - x0) * (y1 - y0));
        for _ in 0..n {
            let bld = Building {
                x: g.gen_range(x0..x1),
                y: g.gen_range(y0..y1),
                h: 1.0,
                w: sp.w_m,
                d: sp.d_m,
            };
            if footprint_crossing(&a, &b, &bld).map_or(false, |(t0, t1)| t1 > t0) {
                crossings += 1;
            }
        }
    }
    let mc_h = crossings as f64 / drops as f64;
    let closed_h = mean_horizontal_blockers(r, &sp);
    let rel_h = (mc_h - closed_h).abs() / closed_h;
    assert!(rel_h <= 0.02, "horizontal: mc {mc_h:.4} vs closed {closed_h:.4}, rel {rel_h:.4} > 0.02");

    // blockers on the 3D link, center condition, Rayleigh heights
    let (r_um, h_u) = (500.0, 150.0);
    let mut blocked = 0u64;
    for _ in 0..drops {
        let th: f64 = g.gen_range(0.0..2.0 * std::f64::consts::PI);
        let a = Vec3::new(0.0, 0.0, sp.h_m_m);
        let b = Vec3::new(r_um * th.cos(), r_um * th.sin(), h_u);
        let (x0, x1) = (a.x.min(b.x) - margin, a.x.max(b.x) + margin);
        let (y0, y1) = (a.y.min(b.y) - margin, a.y.max(b.y) + margin);
        let n = poisson_count(&mut g, lam * (x1 - x0) * (y1 - y0));
        for _ in 0..n {
            let u: f64 = g.gen_range(0.0f64..1.0);
            let bld = Building {
                x: g.gen_range(x0..x1),
                y: g.gen_range(y0..y1),
                h: sp.sigma_hb_m * (-2.0 * (1.0 - u).ln()).sqrt(),
                w: sp.w_m,
                d: sp.d_m,
            };
            if blocks_link_center(&a, &b, &bld) {
                blocked += 1;
            }
        }
    }
    let mc_3d = blocked as f64 / drops as f64;
    let closed_3d = mean_blockers_3d(r_um, h_u, &sp);
    let rel_3d = (mc_3d - closed_3d).abs() / closed_3d;
    assert!(rel_3d <= 0.10, "3d: mc {mc_3d:.4} vs closed {closed_3d:.4}, rel {rel_3d:.4} > 0.10");
    verdict(&format!(
        "criterion 03 blocker count means: PASS (horizontal rel {rel_h:.4} <= 0.02, 3d rel {rel_3d:.4} <= 0.10)"
    ));
}

#[test]
fn c04_coverage_drops_with_height() {
    let _g = gate();
    // blockage-free channel: the claim is about the interferer geometry,
    // not about ground links being walled in
    let mut cfg = ScenarioConfig::desk_scale();
    cfg.toggles.omni = true;
    cfg.channel.gamma = 1.0;
    cfg.channel.m = 1;
    cfg.drops = 1500;
    let hb = cfg.spatial.mean_building_height();
    let batches = 20u64;
    let mut deltas = Vec::new();
    for b in 0..batches {
        let mut c = cfg.clone();
        c.seed = 1000 + b;
        let cov = coverage_vs_height_mc(&c, 0.0, &[hb, 300.0]).unwrap();
        deltas.push(cov[1] - cov[0]);
    }
    let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
    // one-sided check that the drop survives resampling: the whole
    // bootstrap distribution of the mean delta must sit below zero
    let p_ge = 1.0 - percentile_bootstrap_p_le_zero(&deltas, 4);
    assert!(mean < 0.0, "coverage did not drop: mean delta {mean:.4}");
    assert!(p_ge < 0.025, "drop not significant: P(delta>=0) {p_ge:.4}");
    verdict(&format!(
        "criterion 04 coverage lower at 300 m than at mean building height: PASS (mean delta {mean:.4}, bootstrap P(delta>=0) {p_ge:.4})"
    ));
}

#[test]
fn c05_optimal_tilt_monotone() {
    let _g = gate();
    let cfg = ScenarioConfig::desk_scale();
    let imd = 750.0;
    let mut prev = f64::INFINITY;
    let mut h = 1.5;
    let ground = optimal_tilt_deg(1.5, cfg.spatial.h_m_m, imd, &cfg.antenna);
    assert!(ground > 0.0, "ground tilt {ground:.2} not a downtilt");
    while h <= 300.0 {
        let t = optimal_tilt_deg(h, cfg.spatial.h_m_m, imd, &cfg.antenna);
        assert!(t <= prev + 1e-12, "tilt rose at h={h}: {t:.3} > {prev:.3}");
        prev = t;
        h += 25.0;
    }
    verdict(&format!(
        "criterion 05 optimal tilt non-increasing over [1.5, 300] m: PASS (ground tilt {ground:.1} deg)"
    ));
}

#[test]
fn c06_reuse_gain_saturates() {
    let _g = gate();
    // analytic side: thinning by delta * n_beam colors
    let mut acfg = ScenarioConfig::desk_scale();
    acfg.channel.gamma = 0.0;
    acfg.channel.m = 1;
    let scn = AnalyticScenario::from_config(&acfg);
    let mut cap = acfg.capacity.clone();
    cap.delta = 3;
    let mut a = Vec::new();
    for n in 1..=4u32 {
        cap.n_beam = n;
        a.push(coverage_with_reuse(1.0, &scn, &cap).unwrap().value);
    }
    let (a12, a34) = (a[1] - a[0], a[3] - a[2]);
    assert!(a34 < a12, "analytic gains not saturating: 1->2 {a12:.4}, 3->4 {a34:.4}");

    // simulation side: paired drops, beamformed sectors
    let mut s = Vec::new();
    for n in 1..=4u32 {
        let mut cfg = ScenarioConfig::desk_scale();
        cfg.toggles.tilt_opt = true;
        cfg.toggles.reuse_beams = true;
        cfg.toggles.multi_layer = false;
        cfg.toggles.master = false;
        cfg.capacity.delta = 3;
        cfg.capacity.n_beam = n;
        cfg.drops = 4000;
        s.push(coverage_mc(&cfg, &[0.0]).unwrap().coverage[0]);
    }
    let (s12, s34) = (s[1] - s[0], s[3] - s[2]);
    assert!(s34 < s12, "simulated gains not saturating: 1->2 {s12:.4}, 3->4 {s34:.4}");
    verdict(&format!(
        "criterion 06 beam gain 3->4 below gain 1->2: PASS (analytic {a12:.4} vs {a34:.4}, simulated {s12:.4} vs {s34:.4})"
    ));
}

#[test]
fn c07_master_selection_matches_brute_force() {
    let _g = gate();
    let t0 = Instant::now();
    let mut g = rng::stream(0x3A57, &[0]);
    let mut none_cases = 0u64;
    let vectors = 100_000u64;
    for i in 0..vectors {
        let n = g.gen_range(1..=10usize);
        let target = g.gen_range(0.5..1.5);
        let rates: Vec<f64> = (0..n).map(|_| g.gen_range(0.0..2.0)).collect();
        let report = RateReport { rates, target };
        let fast = select_master(&report);
        let oracle = select_master_brute_force(&report);
        assert_eq!(fast, oracle, "vector {i} diverged: {fast:?} vs {oracle:?}");
        if fast.is_none() {
            none_cases += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(none_cases > 0, "no-master cases never exercised");
    assert!(secs < 5.0, "took {secs:.1} s, limit 5 s");
    verdict(&format!(
        "criterion 07 master selection vs brute force: PASS (1e5 vectors, {none_cases} no-master cases, {secs:.1} s)"
    ));
}

#[test]
fn c08_feature_stack_ordering() {
    let _g = gate();
    let stacks: [(&str, [bool; 4]); 4] = [
        ("baseline", [false, false, false, false]),
        ("tilt", [true, false, false, false]),
        ("tilt+reuse", [true, true, true, false]),
        ("full", [true, true, true, true]),
    ];
    let mut per_run: Vec<Vec<f64>> = Vec::new();
    let mut means = Vec::new();
    for (_, t) in &stacks {
        let mut cfg = ScenarioConfig::desk_scale();
        cfg.drops = 20;
        cfg.toggles.tilt_opt = t[0];
        cfg.toggles.reuse_beams = t[1];
        cfg.toggles.multi_layer = t[2];
        cfg.toggles.master = t[3];
        let study = run_mobility_study(&cfg).unwrap();
        means.push(study.mean_reliability);
        per_run.push(study.per_run_reliability);
    }
    for w in 0..3 {
        assert!(
            means[w + 1] > means[w],
            "{} ({:.5}) not above {} ({:.5})",
            stacks[w + 1].0,
            means[w + 1],
            stacks[w].0,
            means[w]
        );
        let deltas: Vec<f64> = per_run[w + 1]
            .iter()
            .zip(&per_run[w])
            .map(|(a, b)| a - b)
            .collect();
        let p = percentile_bootstrap_p_le_zero(&deltas, w as u64);
        assert!(
            p < 0.025,
            "step {} -> {} not significant: P(delta<=0) {p:.4}",
            stacks[w].0,
            stacks[w + 1].0
        );
    }
    assert!(means[3] >= 0.99, "full stack {:.5} below 0.99", means[3]);
    // the 99.9% target is out of reach of 20 desk-scale runs: certifying
    // it needs O(10^5) vehicle-steps per run just for three nines of
    // resolution, so it stays a documented target, not a tested one
    verdict(&format!(
        "criterion 08 feature stack ordering: PASS (baseline {:.4} < tilt {:.4} < tilt+reuse {:.4} < full {:.4} >= 0.99; 99.9% documented, not certified)",
        means[0], means[1], means[2], means[3]
    ));
}

#[test]
fn c09_supportable_uams_decreasing() {
    let _g = gate();
    let mut cfg = ScenarioConfig::desk_scale();
    cfg.channel.gamma = 1.0;
    cfg.channel.m = 1;
    let scn = AnalyticScenario::from_config(&cfg);
    let cap = cfg.capacity.clone();
    assert_eq!(cap.delta, 3);
    assert_eq!(cap.bandwidth_hz, 20e6);
    let targets = [0.8, 0.9, 0.95, 0.99];
    let mut prev = f64::INFINITY;
    for &r in &targets {
        let n = supportable_uams(r, &scn, &cap).unwrap();
        assert!(n < prev, "not strictly decreasing at R={r}: {n:.3} >= {prev:.3}");
        prev = n;
    }
    let headline = supportable_uams(0.93, &scn, &cap).unwrap();
    verdict(&format!(
        "criterion 09 supportable vehicles per sector: PASS (strictly decreasing in target; {headline:.2} per sector at R=0.93 and 20 MHz, reference point is about 1.7)"
    ));
}

#[test]
fn c10_deterministic_csv_output() {
    let _g = gate();
    let exe = env!("CARGO_BIN_EXE_uamnet");
    let base = std::env::temp_dir().join(format!("uamnet-acceptance-{}", std::process::id()));
    let mut cfg = ScenarioConfig::desk_scale();
    cfg.drops = 2;
    cfg.sim_duration_s = 30.0;
    cfg.mobility.max_concurrent = 20;
    let cfg_path = base.join("scenario.toml");
    std::fs::create_dir_all(&base).unwrap();
    std::fs::write(&cfg_path, toml::to_string(&cfg).unwrap()).unwrap();

    let run = |label: &str, sub: &str, workers: &str| -> std::path::PathBuf {
        let out = base.join(label);
        let mut cmd = std::process::Command::new(exe);
        cmd.arg(sub)
            .args(["--config", cfg_path.to_str().unwrap()])
            .args(["--workers", workers])
            .args(["--out-dir", out.to_str().unwrap()])
            .args(["--seed", "7"]);
        if sub == "coverage" {
            cmd.args(["--drops", "500"]);
        }
        let status = cmd.status().expect("spawn cli");
        assert!(status.success(), "{label} run failed");
        out
    };
    let csvs = |dir: &std::path::Path| -> Vec<(String, Vec<u8>)> {
        let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
            .unwrap()
            .filter_map(|e| {
                let p = e.unwrap().path();
                (p.extension().map_or(false, |x| x == "csv"))
                    .then(|| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            })
            .collect();
        v.sort();
        v
    };

    let mut compared = 0usize;
    for sub in ["coverage", "simulate"] {
        let a = csvs(&run(&format!("{sub}-w1a"), sub, "1"));
        let b = csvs(&run(&format!("{sub}-w1b"), sub, "1"));
        let c = csvs(&run(&format!("{sub}-w4"), sub, "4"));
        assert!(!a.is_empty(), "{sub} wrote no csv");
        assert_eq!(a, b, "{sub}: repeat run differed");
        assert_eq!(a, c, "{sub}: worker count changed output");
        compared += a.len();
    }
    std::fs::remove_dir_all(&base).ok();
    verdict(&format!(
        "criterion 10 deterministic csv output: PASS ({compared} csv files bit-identical across reruns and worker counts)"
    ));
}
