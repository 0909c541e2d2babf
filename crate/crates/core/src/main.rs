//! Command-line front end: loads a scenario, dispatches to the analytic or
//! simulation engines, and writes plot-ready CSV tables plus a run manifest.
//!
//! All user-facing thresholds and powers are in dB/dBm; conversion to linear
//! happens at the library boundary. Numbers in CSVs carry 9 significant
//! digits so repeated runs can be compared bytewise.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rand::Rng as _;
use serde::Serialize;

use uamnet::analytics::{
    self, AnalyticScenario,
};
use uamnet::antenna::optimal_tilt_deg;
use uamnet::blockage::{count_blockers, oracle_count_blockers};
use uamnet::config::{AssociationPolicy, ScenarioConfig};
use uamnet::geometry::sample_environment;
use uamnet::rng;
use uamnet::sim;

#[derive(Parser)]
#[command(name = "uamnet", version, about = "Urban air mobility C2 network studies")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML). Defaults to the built-in desk-scale scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo drop count override.
    #[arg(long, global = true)]
    drops: Option<u64>,
    /// Worker thread count (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory. Env fallback: UAMNET_OUT_DIR, then ./out.
    #[arg(long, global = true, env = "UAMNET_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Inter-site distance override in meters (sets the site density).
    #[arg(long, global = true)]
    imd: Option<f64>,
    /// Beams per sector override.
    #[arg(long, global = true)]
    n_beam: Option<u32>,
    /// Reuse factor override.
    #[arg(long, global = true)]
    delta: Option<u32>,
    /// Conventional downtilt override in degrees.
    #[arg(long, global = true)]
    tilt_deg: Option<f64>,
    /// Feature toggle, repeatable: name=on|off for
    /// tilt_opt, reuse_beams, multi_layer, master, omni.
    #[arg(long = "toggle", global = true)]
    toggles: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Audit the fast blocker count against the brute-force oracle.
    Blockage {
        /// Number of audited links.
        #[arg(long, default_value_t = 10_000)]
        links: u64,
    },
    /// Closed-form coverage tables: vs threshold and vs vehicle height.
    Analytics {
        /// Threshold for the height table, in dB.
        #[arg(long, default_value_t = 0.0)]
        threshold_db: f64,
    },
    /// Optimal elevation tilt per vehicle height.
    TiltOpt {
        #[arg(long, default_value_t = 1.5)]
        h_min: f64,
        #[arg(long, default_value_t = 300.0)]
        h_max: f64,
        #[arg(long, default_value_t = 5.0)]
        h_step: f64,
    },
    /// Monte Carlo coverage at one threshold plus a threshold curve.
    Coverage {
        #[arg(long, default_value_t = 0.0)]
        threshold_db: f64,
    },
    /// Time-stepped mobility run with the configured feature stack.
    Simulate,
    /// Coverage at 0 dB across a parameter grid.
    Sweep {
        /// Parameter name (e.g. imd_m, lambda_b_per_km2, sigma_hb_m, h_m_m).
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
    },
    /// Run a named study preset and emit its data series.
    Reproduce {
        /// One of: fig3_3 fig3_5b fig3_6 fig3_7 fig3_8 fig4_2 fig4_5 fig4_7
        /// fig4_10 fig4_13
        figure_id: String,
    },
}

#[derive(Serialize)]
struct RunManifest {
    tool_version: String,
    command: String,
    seed: u64,
    config_hash: String,
    started_unix_ms: u128,
    finished_unix_ms: Option<u128>,
    status: String,
    outputs: Vec<String>,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// 9 significant digits, scientific notation.
fn num(x: f64) -> String {
    format!("{x:.8e}")
}

fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    writeln!(f, "{}", header.join(","))?;
    for r in rows {
        writeln!(f, "{}", r.join(","))?;
    }
    Ok(path)
}

struct Runner {
    cfg: ScenarioConfig,
    out_dir: PathBuf,
    manifest_path: PathBuf,
    manifest: RunManifest,
}

impl Runner {
    fn new(common: &Common, command: &str) -> anyhow::Result<Self> {
        let mut cfg = match &common.config {
            Some(p) => ScenarioConfig::from_toml_str(&fs::read_to_string(p)?)?,
            None => ScenarioConfig::desk_scale(),
        };
        if let Some(s) = common.seed {
            cfg.seed = s;
        }
        if let Some(d) = common.drops {
            cfg.drops = d;
        }
        if let Some(imd) = common.imd {
            let km = imd / 1000.0;
            cfg.spatial.lambda_m_per_km2 = 1.0 / (km * km);
        }
        if let Some(n) = common.n_beam {
            cfg.capacity.n_beam = n;
        }
        if let Some(d) = common.delta {
            cfg.capacity.delta = d;
        }
        if let Some(t) = common.tilt_deg {
            cfg.beam_plan.conventional_tilt_deg = t;
        }
        for t in &common.toggles {
            apply_toggle(&mut cfg, t)?;
        }
        cfg.validate()?;

        if let Some(w) = common.workers {
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build_global()?;
        }

        let out_dir = common
            .out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out"));
        fs::create_dir_all(&out_dir)?;

        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: cfg.seed,
            config_hash: cfg.config_hash(),
            started_unix_ms: now_ms(),
            finished_unix_ms: None,
            status: "running".to_string(),
            outputs: Vec::new(),
        };
        let manifest_path = out_dir.join("manifest.json");
        let mut runner = Runner {
            cfg,
            out_dir,
            manifest_path,
            manifest,
        };
        runner.write_manifest()?;

        // effective config, for round-trip reruns
        let cfg_path = runner.out_dir.join("effective_config.toml");
        fs::write(&cfg_path, runner.cfg.to_toml_string())?;
        runner.record(&cfg_path);
        Ok(runner)
    }

    fn write_manifest(&self) -> anyhow::Result<()> {
        fs::write(
            &self.manifest_path,
            serde_json::to_string_pretty(&self.manifest)?,
        )?;
        Ok(())
    }

    fn record(&mut self, path: &Path) {
        self.manifest.outputs.push(path.display().to_string());
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
        let p = write_csv(&self.out_dir, name, header, rows)?;
        println!("wrote {}", p.display());
        self.record(&p);
        Ok(())
    }

    fn finish(mut self) -> anyhow::Result<()> {
        self.manifest.finished_unix_ms = Some(now_ms());
        self.manifest.status = "ok".to_string();
        self.write_manifest()
    }
}

fn apply_toggle(cfg: &mut ScenarioConfig, spec: &str) -> anyhow::Result<()> {
    let (name, val) = spec
        .split_once('=')
        .ok_or_else(|| anyhow::anyhow!("toggle must be name=on|off, got `{spec}`"))?;
    let on = match val {
        "on" | "true" | "1" => true,
        "off" | "false" | "0" => false,
        _ => anyhow::bail!("toggle value must be on or off, got `{val}`"),
    };
    match name {
        "tilt_opt" => cfg.toggles.tilt_opt = on,
        "reuse_beams" => cfg.toggles.reuse_beams = on,
        "multi_layer" => cfg.toggles.multi_layer = on,
        "master" => cfg.toggles.master = on,
        "omni" => cfg.toggles.omni = on,
        _ => anyhow::bail!("unknown toggle `{name}`"),
    }
    Ok(())
}

/// Force the configuration onto the analytically tractable path and match
/// the interference truncation radius between simulation and quadrature.
fn tractable(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut c = cfg.clone();
    c.toggles.omni = true;
    c.channel.gamma = 0.0;
    c.channel.m = 1;
    c.association = AssociationPolicy::NearestSite;
    c.quadrature.tail_radius_m = c.spatial.window_half_width_m;
    c
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<uamnet::config::InvalidConfig>().is_some() {
                2
            } else {
                1
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let label = match &cli.cmd {
        Cmd::Blockage { .. } => "blockage",
        Cmd::Analytics { .. } => "analytics",
        Cmd::TiltOpt { .. } => "tilt-opt",
        Cmd::Coverage { .. } => "coverage",
        Cmd::Simulate => "simulate",
        Cmd::Sweep { .. } => "sweep",
        Cmd::Reproduce { figure_id } => return reproduce(cli, figure_id),
    };
    let mut r = Runner::new(&cli.common, label)?;
    match &cli.cmd {
        Cmd::Blockage { links } => blockage_audit(&mut r, *links)?,
        Cmd::Analytics { threshold_db } => analytics_tables(&mut r, *threshold_db)?,
        Cmd::TiltOpt { h_min, h_max, h_step } => tilt_table(&mut r, *h_min, *h_max, *h_step)?,
        Cmd::Coverage { threshold_db } => coverage_run(&mut r, *threshold_db)?,
        Cmd::Simulate => simulate_run(&mut r)?,
        Cmd::Sweep { param, values } => sweep_run(&mut r, param, values)?,
        Cmd::Reproduce { .. } => unreachable!(),
    }
    r.finish()
}

fn blockage_audit(r: &mut Runner, links: u64) -> anyhow::Result<()> {
    let cfg = r.cfg.clone();
    let env = sample_environment(&cfg.spatial, rng::derive_seed(cfg.seed, &[0xAD17]))?;
    anyhow::ensure!(!env.mbs_sites.is_empty(), "scene drew zero sites");
    let mut g = rng::stream(cfg.seed, &[0xAD17, 1]);
    let hw = cfg.spatial.window_half_width_m;
    let mut rows = Vec::new();
    let mut mismatches = 0u64;
    for i in 0..links {
        let uam = uamnet::Vec3::new(
            g.gen_range(-hw..hw),
            g.gen_range(-hw..hw),
            g.gen_range(cfg.spatial.h_u_min_m..cfg.spatial.h_u_max_m),
        );
        let site = &env.mbs_sites[g.gen_range(0..env.mbs_sites.len())];
        let fast = count_blockers(site, &uam, &env);
        let oracle = oracle_count_blockers(site, &uam, &env);
        let mismatch = fast != oracle;
        mismatches += mismatch as u64;
        rows.push(vec![
            i.to_string(),
            fast.to_string(),
            oracle.to_string(),
            (mismatch as u8).to_string(),
        ]);
    }
    r.csv(
        "blockage_audit.csv",
        &["link_id", "n_condition", "n_oracle", "mismatch"],
        &rows,
    )?;
    println!("audited {links} links, {mismatches} mismatches");
    anyhow::ensure!(mismatches == 0, "{mismatches} blocker count mismatches");
    Ok(())
}

fn analytics_tables(r: &mut Runner, threshold_db: f64) -> anyhow::Result<()> {
    let cfg = tractable(&r.cfg);
    let scn = AnalyticScenario::from_config(&cfg);
    let mut rows = Vec::new();
    let mut t_db = -10.0;
    while t_db <= 20.0 + 1e-9 {
        let c = analytics::coverage_probability(uamnet::config::db_to_linear(t_db), &scn)?;
        rows.push(vec![num(t_db), num(c.value)]);
        t_db += 1.0;
    }
    r.csv("coverage_vs_threshold.csv", &["threshold_db", "coverage"], &rows)?;

    let t = uamnet::config::db_to_linear(threshold_db);
    let mut rows = Vec::new();
    let mut h = 10.0;
    while h <= cfg.spatial.h_u_max_m + 1e-9 {
        let c = analytics::coverage_at_height(t, h, &scn, 1.0)?;
        rows.push(vec![num(h), num(c.value)]);
        h += 10.0;
    }
    r.csv("coverage_vs_height.csv", &["height_m", "coverage"], &rows)?;
    Ok(())
}

fn tilt_table(r: &mut Runner, h_min: f64, h_max: f64, h_step: f64) -> anyhow::Result<()> {
    anyhow::ensure!(h_step > 0.0 && h_max >= h_min, "bad height grid");
    let cfg = r.cfg.clone();
    let imd = 1.0 / cfg.spatial.lambda_m_per_m2().sqrt();
    let mut rows = Vec::new();
    let mut h = h_min;
    while h <= h_max + 1e-9 {
        let tilt = optimal_tilt_deg(h, cfg.spatial.h_m_m, imd, &cfg.antenna);
        rows.push(vec![num(h), num(tilt)]);
        h += h_step;
    }
    r.csv("optimal_tilt.csv", &["height_m", "tilt_deg"], &rows)?;
    Ok(())
}

fn coverage_run(r: &mut Runner, threshold_db: f64) -> anyhow::Result<()> {
    let cfg = r.cfg.clone();
    let grid: Vec<f64> = (-10..=20).map(|t| t as f64).collect();
    let mut thresholds = grid.clone();
    if !thresholds.contains(&threshold_db) {
        thresholds.push(threshold_db);
        thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let est = sim::coverage_mc(&cfg, &thresholds)?;
    let rows: Vec<Vec<String>> = est
        .thresholds_db
        .iter()
        .zip(&est.coverage)
        .map(|(t, c)| vec![num(*t), num(*c)])
        .collect();
    r.csv("coverage_mc.csv", &["threshold_db", "coverage"], &rows)?;
    let at = est
        .thresholds_db
        .iter()
        .position(|&t| t == threshold_db)
        .expect("threshold inserted above");
    println!(
        "coverage at {threshold_db} dB: {} ({} drops)",
        num(est.coverage[at]),
        est.drops
    );
    Ok(())
}

fn simulate_run(r: &mut Runner) -> anyhow::Result<()> {
    let cfg = r.cfg.clone();
    let study = sim::run_mobility_study(&cfg)?;

    let rows: Vec<Vec<String>> = study
        .records
        .iter()
        .map(|rec| {
            vec![
                rec.uam_id.to_string(),
                rec.vtol_success.to_string(),
                rec.vtol_total.to_string(),
                rec.cruise_success.to_string(),
                rec.cruise_total.to_string(),
                num(rec.reliability()),
            ]
        })
        .collect();
    r.csv(
        "per_uam_reliability.csv",
        &[
            "uam_id",
            "vtol_success",
            "vtol_total",
            "cruise_success",
            "cruise_total",
            "reliability",
        ],
        &rows,
    )?;

    let rows = vec![vec![
        num(study.mean_reliability),
        num(study.vtol_reliability),
        num(study.cruise_reliability),
        study.master_epochs.to_string(),
        study.rescued_steps.to_string(),
    ]];
    r.csv(
        "reliability_summary.csv",
        &[
            "mean_reliability",
            "vtol_reliability",
            "cruise_reliability",
            "master_epochs",
            "rescued_steps",
        ],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = study
        .epoch_log
        .iter()
        .map(|e| {
            vec![
                e.run.to_string(),
                num(e.time_s),
                e.master_uam.to_string(),
                e.failure_uams
                    .iter()
                    .map(|id| id.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
                num(e.deficit),
                e.post_rates.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";"),
            ]
        })
        .collect();
    r.csv(
        "master_epochs.csv",
        &["run", "time_s", "master_uam", "failure_uams", "deficit_bps", "post_rates_bps"],
        &rows,
    )?;

    let trace = sim::trajectory_trace(&cfg, 0)?;
    let rows: Vec<Vec<String>> = trace
        .iter()
        .map(|(t, id, p, phase)| {
            vec![
                num(*t),
                id.to_string(),
                num(p.x),
                num(p.y),
                num(p.z),
                phase.label().to_string(),
            ]
        })
        .collect();
    r.csv(
        "trajectory_trace.csv",
        &["t_s", "uam_id", "x_m", "y_m", "z_m", "phase"],
        &rows,
    )?;
    println!("mean reliability: {}", num(study.mean_reliability));
    Ok(())
}

fn sweep_run(r: &mut Runner, param: &str, values: &str) -> anyhow::Result<()> {
    let vals: Vec<f64> = values
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()?;
    anyhow::ensure!(!vals.is_empty(), "no sweep values given");
    let cfg = r.cfg.clone();
    let points = sim::sweep(&cfg, param, &vals).map_err(|e| anyhow::anyhow!(e))?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![num(p.value), num(p.coverage_at_0db)])
        .collect();
    r.csv("sweep.csv", &[param, "coverage_at_0db"], &rows)?;
    Ok(())
}

const FIGURE_IDS: &[&str] = &[
    "fig3_3", "fig3_5b", "fig3_6", "fig3_7", "fig3_8", "fig4_2", "fig4_5", "fig4_7", "fig4_10",
    "fig4_13",
];

fn reproduce(cli: &Cli, id: &str) -> anyhow::Result<()> {
    anyhow::ensure!(
        FIGURE_IDS.contains(&id),
        "unknown figure id `{id}`; known: {}",
        FIGURE_IDS.join(" ")
    );
    let mut r = Runner::new(&cli.common, &format!("reproduce {id}"))?;
    match id {
        "fig3_3" => repro_coverage_vs_threshold(&mut r)?,
        "fig3_5b" => repro_coverage_vs_height(&mut r)?,
        "fig3_6" => repro_param_sweep(&mut r, "lambda_b_per_km2", &[100.0, 200.0, 300.0, 400.0, 500.0, 600.0], "building_density_per_km2")?,
        "fig3_7" => repro_param_sweep(&mut r, "sigma_hb_m", &[5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0], "building_height_scale_m")?,
        "fig3_8" => repro_param_sweep(&mut r, "imd_m", &[300.0, 500.0, 750.0, 1000.0, 1500.0], "inter_site_distance_m")?,
        "fig4_2" => repro_tilt_curve(&mut r)?,
        "fig4_5" => repro_reuse_coverage(&mut r)?,
        "fig4_7" => repro_supportable(&mut r)?,
        "fig4_10" => repro_feature_stack(&mut r)?,
        "fig4_13" => repro_master_gain(&mut r)?,
        _ => unreachable!(),
    }
    r.finish()
}

/// Analytic and Monte Carlo coverage vs threshold, tractable configuration.
fn repro_coverage_vs_threshold(r: &mut Runner) -> anyhow::Result<()> {
    let cfg = tractable(&r.cfg);
    let scn = AnalyticScenario::from_config(&cfg);
    let thresholds: Vec<f64> = (-4..=8).map(|k| 2.5 * k as f64).collect();
    let est = sim::coverage_mc(&cfg, &thresholds)?;
    let mut rows = Vec::new();
    for (i, &t_db) in thresholds.iter().enumerate() {
        let a = analytics::coverage_probability(uamnet::config::db_to_linear(t_db), &scn)?;
        rows.push(vec![num(t_db), num(a.value), num(est.coverage[i])]);
    }
    r.csv(
        "fig3_3.csv",
        &["threshold_db", "coverage_analytic", "coverage_mc"],
        &rows,
    )
}

/// Coverage vs vehicle height at 0 dB, analytic and Monte Carlo.
fn repro_coverage_vs_height(r: &mut Runner) -> anyhow::Result<()> {
    let cfg = tractable(&r.cfg);
    let scn = AnalyticScenario::from_config(&cfg);
    let heights: Vec<f64> = (1..=15).map(|k| 20.0 * k as f64).collect();
    let mc = sim::coverage_vs_height_mc(&cfg, 0.0, &heights)?;
    let mut rows = Vec::new();
    for (i, &h) in heights.iter().enumerate() {
        let a = analytics::coverage_at_height(1.0, h, &scn, 1.0)?;
        rows.push(vec![num(h), num(a.value), num(mc[i])]);
    }
    r.csv(
        "fig3_5b.csv",
        &["height_m", "coverage_analytic", "coverage_mc"],
        &rows,
    )
}

/// Analytic 0 dB coverage across a deployment parameter grid.
fn repro_param_sweep(
    r: &mut Runner,
    param: &str,
    values: &[f64],
    column: &str,
) -> anyhow::Result<()> {
    let base = tractable(&r.cfg);
    let mut rows = Vec::new();
    for &v in values {
        let mut c = base.clone();
        sim::apply_param(&mut c, param, v).map_err(|e| anyhow::anyhow!(e))?;
        let scn = AnalyticScenario::from_config(&c);
        let a = analytics::coverage_probability(1.0, &scn)?;
        rows.push(vec![num(v), num(a.value)]);
    }
    let name = format!("{}.csv", r.manifest.command.replace("reproduce ", ""));
    r.csv(&name, &[column, "coverage_at_0db"], &rows)
}

fn repro_tilt_curve(r: &mut Runner) -> anyhow::Result<()> {
    let cfg = r.cfg.clone();
    let imd = 1.0 / cfg.spatial.lambda_m_per_m2().sqrt();
    let mut rows = Vec::new();
    let mut prev = f64::INFINITY;
    let mut h = cfg.spatial.h_u_min_m;
    while h <= cfg.spatial.h_u_max_m + 1e-9 {
        let tilt = optimal_tilt_deg(h, cfg.spatial.h_m_m, imd, &cfg.antenna);
        anyhow::ensure!(tilt <= prev + 1e-9, "tilt curve must be non-increasing");
        prev = tilt;
        rows.push(vec![num(h), num(tilt)]);
        h += 5.0;
    }
    r.csv("fig4_2.csv", &["height_m", "optimal_tilt_deg"], &rows)
}

/// Coverage vs threshold for widening reuse (delta * n_beam colors).
fn repro_reuse_coverage(r: &mut Runner) -> anyhow::Result<()> {
    let cfg = tractable(&r.cfg);
    let scn = AnalyticScenario::from_config(&cfg);
    let plans: &[(u32, u32)] = &[(1, 1), (3, 1), (3, 3)];
    let mut rows = Vec::new();
    let mut t_db = -10.0;
    while t_db <= 20.0 + 1e-9 {
        let t = uamnet::config::db_to_linear(t_db);
        let mut row = vec![num(t_db)];
        for &(d, n) in plans {
            let mut cap = cfg.capacity.clone();
            cap.delta = d;
            cap.n_beam = n;
            row.push(num(analytics::coverage_with_reuse(t, &scn, &cap)?.value));
        }
        rows.push(row);
        t_db += 2.0;
    }
    r.csv(
        "fig4_5.csv",
        &["threshold_db", "coverage_d1n1", "coverage_d3n1", "coverage_d3n3"],
        &rows,
    )
}

/// Supportable vehicles per sector vs reliability target.
fn repro_supportable(r: &mut Runner) -> anyhow::Result<()> {
    let cfg = tractable(&r.cfg);
    let scn = AnalyticScenario::from_config(&cfg);
    let targets = [0.9, 0.95, 0.99, 0.995, 0.999];
    let mut rows = Vec::new();
    for &t in &targets {
        let n = analytics::supportable_uams(t, &scn, &cfg.capacity)?;
        rows.push(vec![num(t), num(n)]);
    }
    r.csv(
        "fig4_7.csv",
        &["reliability_target", "supportable_uams_per_sector"],
        &rows,
    )
}

/// Mobility reliability across the cumulative feature stack, paired seeds.
fn repro_feature_stack(r: &mut Runner) -> anyhow::Result<()> {
    let base = r.cfg.clone();
    let stacks: &[(&str, [bool; 4])] = &[
        ("baseline", [false, false, false, false]),
        ("tilt", [true, false, false, false]),
        ("tilt_reuse", [true, true, true, false]),
        ("full", [true, true, true, true]),
    ];
    let mut rows = Vec::new();
    for (label, [tilt, reuse, multi, master]) in stacks {
        let mut c = base.clone();
        c.toggles.tilt_opt = *tilt;
        c.toggles.reuse_beams = *reuse;
        c.toggles.multi_layer = *multi;
        c.toggles.master = *master;
        c.toggles.omni = false;
        let s = sim::run_mobility_study(&c)?;
        rows.push(vec![
            label.to_string(),
            num(s.mean_reliability),
            num(s.vtol_reliability),
            num(s.cruise_reliability),
        ]);
        println!("{label}: {}", num(s.mean_reliability));
    }
    r.csv(
        "fig4_10.csv",
        &["stack", "mean_reliability", "vtol_reliability", "cruise_reliability"],
        &rows,
    )
}

/// Master assist on vs off with paired seeds.
fn repro_master_gain(r: &mut Runner) -> anyhow::Result<()> {
    let base = r.cfg.clone();
    let mut rows = Vec::new();
    for (label, master) in [("master_off", false), ("master_on", true)] {
        let mut c = base.clone();
        c.toggles.master = master;
        c.toggles.omni = false;
        let s = sim::run_mobility_study(&c)?;
        rows.push(vec![
            label.to_string(),
            num(s.mean_reliability),
            s.master_epochs.to_string(),
            s.rescued_steps.to_string(),
        ]);
        println!("{label}: {}", num(s.mean_reliability));
    }
    r.csv(
        "fig4_13.csv",
        &["mode", "mean_reliability", "master_epochs", "rescued_steps"],
        &rows,
    )
}
