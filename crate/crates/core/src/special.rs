//! Special functions and log-domain quadrature shared by the detector and
//! bounds modules.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

/// Largest |x| for which the Gaussian tail is evaluated directly through erfc.
const DIRECT_TAIL_LIMIT: f64 = 8.0;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > DIRECT_TAIL_LIMIT {
        log_q(x).exp()
    } else if x < -DIRECT_TAIL_LIMIT {
        1.0 - q_function(-x)
    } else {
        0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    }
}

/// Natural log of `Q(x)`, finite for every finite `x`.
///
/// Above the direct range the Mills ratio is evaluated by its continued
/// fraction `Q(x) = phi(x) / (x + 1/(x + 2/(x + 3/(x + ...))))`.
pub fn log_q(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > DIRECT_TAIL_LIMIT {
        let mut t = x;
        for k in (1..=120).rev() {
            t = x + k as f64 / t;
        }
        -0.5 * x * x - 0.5 * (2.0 * PI).ln() - t.ln()
    } else if x < -DIRECT_TAIL_LIMIT {
        (-q_function(-x)).ln_1p()
    } else {
        q_function(x).ln()
    }
}

/// Standard normal CDF.
pub fn phi_cdf(x: f64) -> f64 {
    q_function(-x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - e^x)` for `x <= 0`.
pub fn ln_1m_exp(x: f64) -> f64 {
    if x > -LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln(sum_i e^{v_i})`; `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Points per panel of the composite rule.
pub const GL_ORDER: usize = 16;

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// `ln ∫_a^b exp(log_f(x)) dx` by composite 16-point Gauss-Legendre on
/// `panels` equal panels, accumulated with a running log-sum-exp so the
/// integrand never leaves the log domain.
pub fn log_integrate<F: Fn(f64) -> f64>(log_f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 1);
    if b <= a {
        return f64::NEG_INFINITY;
    }
    let (nodes, weights) = gl16();
    let h = (b - a) / panels as f64;
    let mut terms = Vec::with_capacity(panels * GL_ORDER);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(weights) {
            let v = log_f(mid + 0.5 * h * x);
            terms.push(v + (0.5 * h * w).ln());
        }
    }
    log_sum_exp(&terms)
}

/// Plain composite Gauss-Legendre integral of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 1);
    let (nodes, weights) = gl16();
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            s += w * f(mid + 0.5 * h * x);
        }
        sum += 0.5 * h * s;
    }
    sum
}
