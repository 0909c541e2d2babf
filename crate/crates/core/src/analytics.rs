//! Closed-form / numerical-integral counterparts of the simulator: blockage
//! statistics, interference Laplace transform, coverage probability with and
//! without reuse, achievable rate, reliability, and per-sector capacity.
//!
//! The analysis is interference-limited (noise dropped) and supports the
//! penetration scale only at its endpoints: gamma = 0 treats every blocking
//! building as impenetrable (Bernoulli loss), gamma = 1 ignores blockage.

use statrs::function::erf::erf;
use thiserror::Error;

use crate::config::{CapacityParams, ChannelParams, QuadratureSpec, ScenarioConfig};
use crate::geometry::SpatialParams;
use crate::quad;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error(
        "penetration scale gamma = {0} is outside the analytic model; \
         use 0 (impenetrable) or 1 (no blockage)"
    )]
    UnsupportedGamma(f64),
    #[error("target reliability {0} is not achievable at any SIR threshold")]
    Infeasible(f64),
}

/// Everything the analytic expressions need from a scenario.
#[derive(Debug, Clone)]
pub struct AnalyticScenario {
    pub spatial: SpatialParams,
    pub channel: ChannelParams,
    pub quad: QuadratureSpec,
}

impl AnalyticScenario {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            spatial: cfg.spatial.clone(),
            channel: cfg.channel.clone(),
            quad: cfg.quadrature.clone(),
        }
    }

    fn tail_m(&self) -> f64 {
        self.quad.tail_radius(self.spatial.lambda_m_per_m2())
    }

    fn check_gamma(&self) -> Result<(), AnalyticsError> {
        let g = self.channel.gamma;
        if g == 0.0 || g == 1.0 {
            Ok(())
        } else {
            Err(AnalyticsError::UnsupportedGamma(g))
        }
    }
}

/// An integral with its accuracy diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct CoverageResult {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

/// Probability that a building on the ground path, at a uniformly random
/// position along it, rises above the link line (Rayleigh heights).
///
/// After substituting out the position, the integral depends only on the
/// endpoint heights: it is the Gaussian CCDF averaged along the line from
/// `h_M` to `h_U`. The degenerate `r_um = 0` case is pinned to the lower
/// endpoint.
pub fn vertical_block_probability(r_um: f64, h_u: f64, spatial: &SpatialParams) -> f64 {
    assert!(r_um >= 0.0);
    let sigma = spatial.sigma_hb_m;
    if r_um == 0.0 {
        let h = h_u.min(spatial.h_m_m);
        return (-h * h / (2.0 * sigma * sigma)).exp();
    }
    vertical_block_probability_height(h_u, spatial)
}

/// The `r_um`-independent form used inside the coverage integrals.
pub fn vertical_block_probability_height(h_u: f64, spatial: &SpatialParams) -> f64 {
    let sigma = spatial.sigma_hb_m;
    let h_m = spatial.h_m_m;
    let dh = h_u - h_m;
    if dh.abs() < 1e-9 * sigma {
        return (-h_m * h_m / (2.0 * sigma * sigma)).exp();
    }
    // (1/dh) * int_{h_M}^{h_U} exp(-h^2 / (2 sigma^2)) dh
    let scale = sigma * SQRT_2;
    sigma * (PI / 2.0).sqrt() / dh * (erf(h_u / scale) - erf(h_m / scale))
}

/// Mean number of buildings whose footprint crosses the ground projection of
/// a link of length `r_um`, averaged over link orientation.
pub fn mean_horizontal_blockers(r_um: f64, spatial: &SpatialParams) -> f64 {
    assert!(r_um >= 0.0);
    let lb = spatial.lambda_b_per_m2();
    let (w, d) = (spatial.w_m, spatial.d_m);
    2.0 * lb * (w + d) / PI * r_um + lb * w * d
}

/// Mean number of buildings blocking the 3D link: the horizontal crossing
/// count thinned by the vertical probability (the two are treated as
/// independent).
pub fn mean_blockers_3d(r_um: f64, h_u: f64, spatial: &SpatialParams) -> f64 {
    vertical_block_probability(r_um, h_u, spatial) * mean_horizontal_blockers(r_um, spatial)
}

/// Expected multiplicative penetration loss `gamma^N` over the Poisson
/// blocker count. At gamma = 0 this is the probability that no blocker is
/// present given the count were deterministic; use
/// [`line_of_sight_probability`] for the Bernoulli model.
pub fn expected_penetration_loss(
    r_um: f64,
    h_u: f64,
    spatial: &SpatialParams,
    channel: &ChannelParams,
) -> f64 {
    let n = mean_blockers_3d(r_um, h_u, spatial);
    if channel.gamma == 0.0 {
        if n > 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        channel.gamma.powf(n)
    }
}

/// Bernoulli loss model for impenetrable buildings: the link survives with
/// probability `exp(-E[N_BP])`.
pub fn line_of_sight_probability(r_um: f64, h_u: f64, spatial: &SpatialParams) -> f64 {
    (-mean_blockers_3d(r_um, h_u, spatial)).exp()
}

fn pochhammer(m: f64, p: u32) -> f64 {
    (0..p).map(|i| m + i as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Laplace transform of the aggregate interference at argument `s`, together
/// with its derivatives up to `order`, for a reference link of ground length
/// `r_um` and vehicle height `h_u`.
///
/// Interferers form the thinned field of density `lambda_M / thinning`
/// outside radius `r_um`; with gamma = 0 each contributes only if unblocked.
/// Returns `[L, L', .., L^(order)]`. The transform is `exp(g(s))` and the
/// derivatives follow the product recursion
/// `L^(p) = sum_k C(p-1, k) g^(p-k) L^(k)`, with each `g^(p)` available in
/// closed form under the integral sign.
pub fn laplace_derivatives(
    s: f64,
    r_um: f64,
    h_u: f64,
    scn: &AnalyticScenario,
    thinning: f64,
    order: u32,
) -> Result<Vec<f64>, AnalyticsError> {
    assert!(s >= 0.0 && r_um >= 0.0 && thinning >= 1.0);
    scn.check_gamma()?;
    let sp = &scn.spatial;
    let ch = &scn.channel;
    let m = ch.m as f64;
    let alpha = ch.alpha;
    let dh = h_u - sp.h_m_m;
    let lam_i = sp.lambda_m_per_m2() / thinning;
    let tail = scn.tail_m().max(r_um);

    // blocker survival factor along an interferer link of ground length t
    let pv = vertical_block_probability_height(h_u, sp);
    let lb = sp.lambda_b_per_m2();
    let na_slope = 2.0 * lb * (sp.w_m + sp.d_m) / PI;
    let na_icept = lb * sp.w_m * sp.d_m;
    let bernoulli = ch.gamma == 0.0;
    let survive = move |t: f64| -> f64 {
        if bernoulli {
            (-pv * (na_slope * t + na_icept)).exp()
        } else {
            1.0
        }
    };
    let u_of = move |t: f64| -> f64 { (t * t + dh * dh).powf(-alpha / 2.0) };

    let q = &scn.quad;
    // these integrals live at arbitrary scale (u^p is tiny), so only the
    // relative tolerance is meaningful here
    let abs_floor = 1e-300;
    let mut g = vec![0.0; order as usize + 1];
    let g0 = quad::integrate(
        |t| {
            let u = u_of(t);
            survive(t) * (1.0 - (1.0 + s * u / m).powf(-m)) * t
        },
        r_um,
        tail,
        q.rel_tol,
        abs_floor,
        q.max_subdivisions,
    );
    g[0] = -2.0 * PI * lam_i * g0.value;
    for p in 1..=order {
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let coef = 2.0 * PI * lam_i * sign * pochhammer(m, p) / m.powi(p as i32);
        let gp = quad::integrate(
            |t| {
                let u = u_of(t);
                survive(t) * u.powi(p as i32) * (1.0 + s * u / m).powf(-m - p as f64) * t
            },
            r_um,
            tail,
            q.rel_tol,
            abs_floor,
            q.max_subdivisions,
        );
        g[p as usize] = coef * gp.value;
    }

    let mut l = vec![0.0; order as usize + 1];
    l[0] = g[0].exp();
    for p in 1..=order as usize {
        let mut acc = 0.0;
        for k in 0..p {
            acc += binomial(p as u32 - 1, k as u32) * g[p - k] * l[k];
        }
        l[p] = acc;
    }
    Ok(l)
}

/// Laplace transform of the interference, `L_I(s)`.
pub fn interference_laplace(
    s: f64,
    r_um: f64,
    h_u: f64,
    scn: &AnalyticScenario,
) -> Result<f64, AnalyticsError> {
    Ok(laplace_derivatives(s, r_um, h_u, scn, 1.0, 0)?[0])
}

/// Coverage probability conditioned on the vehicle height, with the
/// interferer field thinned by `thinning`.
pub fn coverage_at_height(
    t_lin: f64,
    h_u: f64,
    scn: &AnalyticScenario,
    thinning: f64,
) -> Result<quad::QuadResult, AnalyticsError> {
    scn.check_gamma()?;
    let sp = &scn.spatial;
    let ch = &scn.channel;
    let m = ch.m as f64;
    let order = ch.m - 1;
    let lam = sp.lambda_m_per_m2();
    let dh = h_u - sp.h_m_m;
    let tail = scn.tail_m();
    let bernoulli = ch.gamma == 0.0;
    let pv = vertical_block_probability_height(h_u, sp);
    let q = &scn.quad;

    let integrand = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let f_r = 2.0 * PI * lam * r * (-lam * PI * r * r).exp();
        let serve = if bernoulli {
            (-pv * mean_horizontal_blockers(r, sp)).exp()
        } else {
            1.0
        };
        let d_alpha = (r * r + dh * dh).powf(ch.alpha / 2.0);
        let s = m * t_lin * d_alpha;
        let l = laplace_derivatives(s, r, h_u, scn, thinning, order)
            .expect("gamma validated above");
        let mut ccdf = 0.0;
        let mut s_pow = 1.0;
        let mut fact = 1.0;
        for (k, lk) in l.iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            ccdf += sign * s_pow / fact * lk;
            s_pow *= s;
            fact *= (k + 1) as f64;
        }
        f_r * serve * ccdf.clamp(0.0, 1.0)
    };

    Ok(quad::integrate(
        integrand,
        0.0,
        tail,
        q.rel_tol.max(1e-6),
        q.abs_tol.max(1e-8),
        q.max_subdivisions,
    ))
}

fn coverage_thinned(
    t_lin: f64,
    scn: &AnalyticScenario,
    thinning: f64,
) -> Result<CoverageResult, AnalyticsError> {
    assert!(t_lin > 0.0);
    scn.check_gamma()?;
    let sp = &scn.spatial;
    let (h0, h1) = (sp.h_u_min_m, sp.h_u_max_m);
    if h1 - h0 < 1e-9 {
        let r = coverage_at_height(t_lin, h0, scn, thinning)?;
        return Ok(CoverageResult {
            value: r.value.clamp(0.0, 1.0),
            error_estimate: r.error_estimate,
            converged: r.converged,
        });
    }
    // uniform vehicle-height average; the inner integral is smooth in h, so a
    // moderate adaptive tolerance is enough on top of the inner tolerances
    let inner_err = std::cell::Cell::new(0.0f64);
    let inner_ok = std::cell::Cell::new(true);
    let q = &scn.quad;
    let outer = quad::integrate(
        |h| {
            let r = coverage_at_height(t_lin, h, scn, thinning).expect("gamma validated");
            inner_err.set(inner_err.get().max(r.error_estimate));
            if !r.converged {
                inner_ok.set(false);
            }
            r.value
        },
        h0,
        h1,
        q.rel_tol.max(1e-5),
        q.abs_tol.max(1e-7),
        q.max_subdivisions,
    );
    Ok(CoverageResult {
        value: (outer.value / (h1 - h0)).clamp(0.0, 1.0),
        error_estimate: outer.error_estimate / (h1 - h0) + inner_err.get(),
        converged: outer.converged && inner_ok.get(),
    })
}

/// Coverage probability of the reference vehicle: P(SIR > T), averaged over
/// vehicle height and nearest-site distance. `t_lin` is the SIR threshold in
/// linear scale.
pub fn coverage_probability(
    t_lin: f64,
    scn: &AnalyticScenario,
) -> Result<CoverageResult, AnalyticsError> {
    coverage_thinned(t_lin, scn, 1.0)
}

/// Coverage with `delta * n_beam` frequency-reuse colors: the co-channel
/// interferer field is the original one thinned by that factor, signal and
/// interference beam amplitudes cancel in the ratio.
pub fn coverage_with_reuse(
    t_lin: f64,
    scn: &AnalyticScenario,
    cap: &CapacityParams,
) -> Result<CoverageResult, AnalyticsError> {
    coverage_thinned(t_lin, scn, (cap.delta * cap.n_beam) as f64)
}

/// SIR threshold a vehicle must clear so that its share of the sector
/// spectrum delivers the C2 message within the latency budget.
pub fn required_sir(cap: &CapacityParams) -> f64 {
    let exponent =
        cap.tau_r_bits * (cap.delta * cap.n_beam) as f64 * cap.n_u_sector / (cap.bandwidth_hz * cap.t_r_s);
    2f64.powf(exponent) - 1.0
}

/// Probability that the C2 message is delivered within the latency budget.
pub fn reliability(
    scn: &AnalyticScenario,
    cap: &CapacityParams,
) -> Result<CoverageResult, AnalyticsError> {
    coverage_with_reuse(required_sir(cap), scn, cap)
}

/// Mean per-vehicle rate in bit/s: the spectrum share times the mean spectral
/// efficiency, the latter integrated from the SIR distribution.
pub fn achievable_rate(
    scn: &AnalyticScenario,
    cap: &CapacityParams,
) -> Result<f64, AnalyticsError> {
    // E[log2(1 + SIR)] = (1/ln 2) * int_0^inf P(ln(1 + SIR) > y) dy
    let eff = quad::integrate(
        |y| {
            if y <= 0.0 {
                return 1.0;
            }
            let t = y.exp_m1();
            coverage_with_reuse(t, scn, cap).map(|c| c.value).unwrap_or(0.0)
        },
        0.0,
        15.0,
        5e-4,
        1e-5,
        12,
    );
    let share = cap.bandwidth_hz / ((cap.delta * cap.n_beam) as f64 * cap.n_u_sector);
    Ok(share * eff.value / std::f64::consts::LN_2)
}

/// Number of vehicles one sector can serve at the target reliability:
/// invert the coverage curve for the admissible SIR threshold, then convert
/// the implied spectral efficiency into message deliveries per budget.
pub fn supportable_uams(
    r_target: f64,
    scn: &AnalyticScenario,
    cap: &CapacityParams,
) -> Result<f64, AnalyticsError> {
    assert!(r_target > 0.0 && r_target < 1.0);
    let pc = |t: f64| coverage_with_reuse(t, scn, cap).map(|c| c.value);
    let (mut lo, mut hi) = (1e-9f64.ln(), 1e6f64.ln());
    if pc(lo.exp())? < r_target {
        return Err(AnalyticsError::Infeasible(r_target));
    }
    if pc(hi.exp())? > r_target {
        // even the harshest threshold keeps coverage above target
        lo = hi;
    }
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if pc(mid.exp())? >= r_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_star = lo.exp();
    let share = cap.bandwidth_hz / (cap.delta * cap.n_beam) as f64;
    Ok(share * (1.0 + t_star).log2() * cap.t_r_s / cap.tau_r_bits)
}
