//! Information-theoretic limits: binary-input AWGN capacity and Shannon's
//! 1959 sphere-packing lower bound on block error probability.
//!
//! Everything that can overflow (powers of `sin` with exponents in the
//! hundreds, Gamma functions of half-integers near 500, `exp(L gamma)`) is
//! kept in the log domain until the final assembly. Quadratures are composite
//! 16-point Gauss-Legendre rules refined by doubling; the reported
//! `abs_error_est` is the last refinement step plus analytic truncation bounds.
//!
//! SNR convention: `gamma_t` enters the capacity through `beta = sqrt(2 gamma_t)`
//! and the sphere-packing bound through `sqrt(2 L_t gamma_t)`, i.e. it plays
//! the role of `Es/N0`.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::special::{integrate, ln_1m_exp, ln_gamma, log_add_exp, log_integrate, log_q, q_function};
use crate::tag_codec::code_rate;

/// Quadrature resolution. [`Resolution::doubled`] doubles every node count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    /// Starting node count of the outer sphere-packing integral.
    pub outer_min_nodes: usize,
    /// Panels of the inner `f_L` integral.
    pub inner_panels: usize,
    /// Starting panel count of the capacity integral.
    pub capacity_panels: usize,
    /// Starting panel count of the solid-angle integral.
    pub angle_panels: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            outer_min_nodes: 512,
            inner_panels: 32,
            capacity_panels: 64,
            angle_panels: 16,
        }
    }
}

impl Resolution {
    pub fn doubled(&self) -> Self {
        Self {
            outer_min_nodes: 2 * self.outer_min_nodes,
            inner_panels: 2 * self.inner_panels,
            capacity_panels: 2 * self.capacity_panels,
            angle_panels: 2 * self.angle_panels,
        }
    }
}

const MAX_PANELS: usize = 1 << 14;

// ---------------------------------------------------------------------------
// Capacity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    /// Bits per channel use.
    pub c2: f64,
    /// `1 - c2` evaluated directly, so it stays meaningful when `c2` rounds to 1.
    pub deficit: f64,
    pub abs_error_est: f64,
}

/// Half-width, in noise standard deviations, of the capacity integration window.
const CAPACITY_WINDOW: f64 = 10.0;

pub fn capacity_biawgn(gamma_t: f64) -> Result<CapacityResult> {
    capacity_biawgn_with(gamma_t, &Resolution::default())
}

/// `C_2 = 1 - E[log2(1 + exp(-2 beta Y))]`, `Y ~ N(beta, 1)`, `beta = sqrt(2 gamma_t)`.
pub fn capacity_biawgn_with(gamma_t: f64, res: &Resolution) -> Result<CapacityResult> {
    if !(gamma_t >= 0.0) || !gamma_t.is_finite() {
        return Err(Error::param(format!("gamma_t must be finite and >= 0, got {gamma_t}")));
    }
    if gamma_t == 0.0 {
        return Ok(CapacityResult {
            c2: 0.0,
            deficit: 1.0,
            abs_error_est: 0.0,
        });
    }
    let beta = (2.0 * gamma_t).sqrt();
    let norm = 1.0 / (2.0 * PI).sqrt();
    let integrand = |t: f64| {
        let y = beta + t;
        norm * (-0.5 * t * t).exp() * softplus(-2.0 * beta * y) / LN_2
    };
    let mut panels = res.capacity_panels.max(1);
    let mut prev = integrate(integrand, -CAPACITY_WINDOW, CAPACITY_WINDOW, panels);
    loop {
        panels *= 2;
        let cur = integrate(integrand, -CAPACITY_WINDOW, CAPACITY_WINDOW, panels);
        let diff = (cur - prev).abs();
        if diff < 1e-13 || panels >= MAX_PANELS {
            // Outside the window: log2(1 + e^{-2 beta y}) <= 1 + 2 beta |t| / ln 2.
            let tail = 2.0 * q_function(CAPACITY_WINDOW)
                + 2.0 * beta * norm * (-0.5 * CAPACITY_WINDOW * CAPACITY_WINDOW).exp() / LN_2;
            let c2 = (1.0 - cur).clamp(0.0, 1.0);
            return Ok(CapacityResult {
                c2,
                deficit: cur.clamp(0.0, 1.0),
                abs_error_est: diff + tail + 1e-14,
            });
        }
        prev = cur;
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// SNR at which the capacity equals `target` bits.
pub fn snr_for_capacity(target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::param(format!("capacity target must be in (0,1), got {target}")));
    }
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e3f64.ln());
    if capacity_biawgn(lo.exp())?.c2 > target || capacity_biawgn(hi.exp())?.c2 < target {
        return Err(Error::numerical(format!("capacity {target} not bracketed")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if capacity_biawgn(mid.exp())?.c2 < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

// ---------------------------------------------------------------------------
// Solid angle and theta
// ---------------------------------------------------------------------------

/// `ln ∫_0^pi sin^n(phi) dphi = ln( sqrt(pi) Γ((n+1)/2) / Γ(n/2 + 1) )`.
fn log_sin_total(n: usize) -> f64 {
    let n = n as f64;
    0.5 * PI.ln() + ln_gamma(0.5 * (n + 1.0)) - ln_gamma(0.5 * n + 1.0)
}

/// `ln ∫_0^theta sin^n(phi) dphi` for `theta <= pi/2`, refined until two
/// successive panel doublings agree to `1e-14`.
fn log_sin_partial(n: usize, theta: f64, min_panels: usize) -> f64 {
    debug_assert!(theta <= FRAC_PI_2 + 1e-15);
    if theta <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if n == 0 {
        return theta.ln();
    }
    let nf = n as f64;
    let f = |phi: f64| nf * phi.sin().ln();
    let mut panels = min_panels.max(1);
    let mut prev = log_integrate(f, 0.0, theta, panels);
    loop {
        panels *= 2;
        let cur = log_integrate(f, 0.0, theta, panels);
        if (cur - prev).abs() < 1e-14 || panels >= MAX_PANELS {
            return cur;
        }
        prev = cur;
    }
}

/// `ln( Ω_L(theta) / Ω_L(pi) )` for `theta` in `[0, pi]`.
pub fn log_solid_angle_ratio(l: usize, theta: f64, min_panels: usize) -> f64 {
    let n = l - 2;
    let total = log_sin_total(n);
    if theta <= FRAC_PI_2 {
        log_sin_partial(n, theta, min_panels) - total
    } else {
        let upper = log_sin_partial(n, (PI - theta).max(0.0), min_panels) - total;
        ln_1m_exp(upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSolution {
    pub theta: f64,
    /// `|ln ratio(theta) + L R ln 2|` at the returned angle.
    pub residual: f64,
}

const THETA_TOL: f64 = 1e-10;

/// Cone half-angle whose solid-angle fraction is exactly `2^{-L R}`.
pub fn solve_theta(l: usize, rate: f64) -> Result<f64> {
    Ok(solve_theta_with(l, rate, &Resolution::default())?.theta)
}

pub fn solve_theta_with(l: usize, rate: f64, res: &Resolution) -> Result<ThetaSolution> {
    if l < 2 {
        return Err(Error::param(format!("block length must be >= 2, got {l}")));
    }
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::param(format!("rate must be in (0, 1], got {rate}")));
    }
    let target = -(l as f64) * rate * LN_2;
    let f = |theta: f64| log_solid_angle_ratio(l, theta, res.angle_panels) - target;
    let (mut lo, mut hi) = (0.0f64, PI);
    // f(0+) = -inf and f(pi) = -target > 0
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (f(lo), f(hi));
    let (theta, residual) = if flo.abs() <= fhi.abs() {
        (lo, flo.abs())
    } else {
        (hi, fhi.abs())
    };
    if !(theta > 0.0 && theta < PI) || !(residual <= THETA_TOL) {
        return Err(Error::numerical(format!(
            "theta solve for L={l}, R={rate} ended at theta={theta} with residual {residual:e} \
             (bracket [{lo}, {hi}], f = [{flo:e}, {fhi:e}])"
        )));
    }
    Ok(ThetaSolution { theta, residual })
}

// ---------------------------------------------------------------------------
// f_L
// ---------------------------------------------------------------------------

/// Log-integrand drop (nats) below the peak at which the window is cut.
const WINDOW_DROP: f64 = 80.0;

/// `ln f_L(x)` where
/// `f_L(x) = 2^{-(L-1)/2} / Γ((L+1)/2) ∫_0^∞ z^{L-1} exp(-z²/2 + z x) dz`.
pub fn log_f_l(l: usize, x: f64) -> Result<f64> {
    log_f_l_with(l, x, Resolution::default().inner_panels)
}

pub fn log_f_l_with(l: usize, x: f64, panels: usize) -> Result<f64> {
    if l < 1 {
        return Err(Error::param("f_L needs L >= 1"));
    }
    if !x.is_finite() {
        return Err(Error::param(format!("f_L argument must be finite, got {x}")));
    }
    let m = (l - 1) as f64;
    let g = move |z: f64| {
        let lead = if l == 1 { 0.0 } else { m * z.ln() };
        lead - 0.5 * z * z + z * x
    };
    // Peak of the log-integrand: z^2 - x z - (L-1) = 0.
    let disc = (x * x + 4.0 * m).sqrt();
    let peak = if x >= 0.0 {
        0.5 * (x + disc)
    } else if m > 0.0 {
        2.0 * m / (disc - x)
    } else {
        0.0
    };
    let g_peak = g(peak);
    let curvature = if peak > 0.0 { m / (peak * peak) + 1.0 } else { 1.0 };
    let step = 1.0 / curvature.sqrt();

    let mut left = peak;
    let mut t = step;
    while left > 0.0 {
        let cand = (peak - t).max(0.0);
        left = cand;
        if cand == 0.0 || g_peak - g(cand) > WINDOW_DROP {
            break;
        }
        t *= 2.0;
    }
    let mut right;
    let mut t = step;
    loop {
        right = peak + t;
        if g_peak - g(right) > WINDOW_DROP {
            break;
        }
        t *= 2.0;
    }
    let log_int = log_integrate(g, left, right, panels.max(1));
    Ok(log_int - (0.5 * m * LN_2 + ln_gamma(0.5 * (l as f64 + 1.0))))
}

// ---------------------------------------------------------------------------
// Sphere-packing bound
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpbLogTerms {
    /// `ln Q(sqrt(2 L gamma))`.
    pub log_q_term: f64,
    /// `ln |second term|`.
    pub log_integral_term: f64,
    /// Sign of the second term; negative only when `theta > pi/2`.
    pub integral_sign: f64,
    /// `ln` of the assembled value before clamping.
    pub log_total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpbResult {
    pub p_e_lower: f64,
    pub theta: f64,
    pub log_terms: SpbLogTerms,
    pub abs_error_est: f64,
    /// Set when the assembled value fell outside [0, 1] and was clamped.
    pub clamped: bool,
    /// Outer quadrature nodes used for the returned value.
    pub outer_nodes: usize,
}

pub fn p_spb(l_t: usize, rate: f64, gamma_t: f64) -> Result<SpbResult> {
    p_spb_with(l_t, rate, gamma_t, &Resolution::default())
}

pub fn p_spb_with(l_t: usize, rate: f64, gamma_t: f64, res: &Resolution) -> Result<SpbResult> {
    if !(gamma_t > 0.0 && gamma_t.is_finite()) {
        return Err(Error::param(format!("gamma_t must be positive and finite, got {gamma_t}")));
    }
    let theta = solve_theta_with(l_t, rate, res)?.theta;
    let l = l_t as f64;
    let amp = (2.0 * l * gamma_t).sqrt();
    let log_q_term = log_q(amp);
    let prefactor = (l - 1.0).ln() - 0.5 * (2.0 * PI).ln() - l * gamma_t;
    let inner = res.inner_panels;

    let (a, b, sign) = if theta <= FRAC_PI_2 {
        (theta, FRAC_PI_2, 1.0)
    } else {
        (FRAC_PI_2, theta, -1.0)
    };
    let log_outer = |panels: usize, inner_panels: usize| -> Result<f64> {
        let failure = std::cell::RefCell::new(None);
        let v = log_integrate(
            |phi| {
                let sin_part = if l_t == 2 { 0.0 } else { (l - 2.0) * phi.sin().ln() };
                match log_f_l_with(l_t, amp * phi.cos(), inner_panels) {
                    Ok(f) => sin_part + f,
                    Err(e) => {
                        *failure.borrow_mut() = Some(e);
                        f64::NAN
                    }
                }
            },
            a,
            b,
            panels,
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None if v.is_nan() => Err(Error::numerical("sphere-packing integrand produced NaN")),
            None => Ok(v),
        }
    };

    let assemble = |log_int: f64| -> (f64, f64) {
        let log_second = prefactor + log_int;
        let log_total = if sign > 0.0 {
            log_add_exp(log_q_term, log_second)
        } else if log_second < log_q_term {
            log_q_term + ln_1m_exp(log_second - log_q_term)
        } else {
            f64::NEG_INFINITY
        };
        (log_second, log_total)
    };

    let mut panels = (res.outer_min_nodes / crate::special::GL_ORDER).max(1);
    let (log_int, diff) = if b > a {
        let mut prev = log_outer(panels, inner)?;
        loop {
            let cur = log_outer(2 * panels, inner)?;
            panels *= 2;
            let converged = (cur - prev).abs() < 1e-11;
            if converged || panels >= MAX_PANELS {
                let p_prev = assemble(prev).1.exp();
                let p_cur = assemble(cur).1.exp();
                break (cur, (p_cur - p_prev).abs());
            }
            prev = cur;
        }
    } else {
        (f64::NEG_INFINITY, 0.0)
    };

    let (log_second, log_total) = assemble(log_int);

    // Inner-quadrature error, probed at the ends and middle of the outer range.
    let mut inner_rel: f64 = 0.0;
    if b > a {
        for phi in [a, 0.5 * (a + b), b] {
            let x = amp * phi.cos();
            let coarse = log_f_l_with(l_t, x, inner)?;
            let fine = log_f_l_with(l_t, x, 2 * inner)?;
            inner_rel = inner_rel.max((fine - coarse).abs());
        }
    }
    let second = log_second.exp();
    let raw = log_total.exp();
    let clamped = !(0.0..=1.0).contains(&raw) || log_total.is_nan();
    let p_e_lower = if log_total.is_nan() { 0.0 } else { raw.clamp(0.0, 1.0) };
    let abs_error_est = diff + second * inner_rel + 1e-13 * raw.max(f64::MIN_POSITIVE);

    Ok(SpbResult {
        p_e_lower,
        theta,
        log_terms: SpbLogTerms {
            log_q_term,
            log_integral_term: log_second,
            integral_sign: sign,
            log_total,
        },
        abs_error_est,
        clamped,
        outer_nodes: panels * crate::special::GL_ORDER,
    })
}

// ---------------------------------------------------------------------------
// Security margin
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityMargin {
    pub rc: f64,
    pub c2: f64,
    /// `R_c > C_2(gamma_t)`.
    pub info_secure: bool,
}

pub fn security_margin(params: &SystemParams) -> Result<SecurityMargin> {
    let rc = code_rate(params);
    let cap = capacity_biawgn(params.gamma_t())?;
    Ok(SecurityMargin {
        rc,
        c2: cap.c2,
        info_secure: 1.0 - rc < cap.deficit,
    })
}
