use crate::error::{Error, Result};

/// Scalar parameters of an authentication link.
///
/// The message occupies `l_s = q * l_t` channel symbols; every tag bit is
/// repeated `q` times and superimposed on the message with amplitude `rho_t`,
/// the message keeping amplitude `rho_s = sqrt(1 - rho_t^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    l_s: usize,
    l_k: usize,
    l_t: usize,
    q: usize,
    rho_s: f64,
    rho_t: f64,
    gamma_t: f64,
}

const POWER_TOL: f64 = 1e-12;

impl SystemParams {
    /// Derives `l_s` and `rho_s` from the remaining parameters.
    pub fn new(l_k: usize, l_t: usize, q: usize, rho_t: f64, gamma_t: f64) -> Result<Self> {
        let rho_s = (1.0 - rho_t * rho_t).max(0.0).sqrt();
        Self::from_parts(q.saturating_mul(l_t), l_k, l_t, q, rho_s, rho_t, gamma_t)
    }

    /// Fully explicit constructor; checks every invariant.
    pub fn from_parts(
        l_s: usize,
        l_k: usize,
        l_t: usize,
        q: usize,
        rho_s: f64,
        rho_t: f64,
        gamma_t: f64,
    ) -> Result<Self> {
        if l_s == 0 || l_k == 0 || l_t == 0 || q == 0 {
            return Err(Error::param(format!(
                "lengths must be positive (l_s={l_s}, l_k={l_k}, l_t={l_t}, q={q})"
            )));
        }
        if l_s != q * l_t {
            return Err(Error::param(format!("l_s={l_s} differs from q*l_t={}", q * l_t)));
        }
        if !(rho_s > 0.0 && rho_s < 1.0 && rho_t > 0.0 && rho_t < 1.0) {
            return Err(Error::param(format!(
                "amplitudes must lie in (0,1) (rho_s={rho_s}, rho_t={rho_t})"
            )));
        }
        if (rho_s * rho_s + rho_t * rho_t - 1.0).abs() > POWER_TOL {
            return Err(Error::param(format!(
                "rho_s^2 + rho_t^2 = {} instead of 1",
                rho_s * rho_s + rho_t * rho_t
            )));
        }
        if !(gamma_t > 0.0 && gamma_t.is_finite()) {
            return Err(Error::param(format!("gamma_t must be positive and finite, got {gamma_t}")));
        }
        Ok(Self {
            l_s,
            l_k,
            l_t,
            q,
            rho_s,
            rho_t,
            gamma_t,
        })
    }

    /// Same link at a different tag SNR.
    pub fn with_gamma_t(&self, gamma_t: f64) -> Result<Self> {
        Self::from_parts(self.l_s, self.l_k, self.l_t, self.q, self.rho_s, self.rho_t, gamma_t)
    }

    pub fn l_s(&self) -> usize {
        self.l_s
    }
    pub fn l_k(&self) -> usize {
        self.l_k
    }
    pub fn l_t(&self) -> usize {
        self.l_t
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn rho_s(&self) -> f64 {
        self.rho_s
    }
    pub fn rho_t(&self) -> f64 {
        self.rho_t
    }
    pub fn gamma_t(&self) -> f64 {
        self.gamma_t
    }

    /// Per-chip channel noise variance that yields this tag SNR after
    /// despreading: `q * rho_t^2 / gamma_t`.
    pub fn channel_noise_var(&self) -> f64 {
        self.q as f64 * self.rho_t * self.rho_t / self.gamma_t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_fields() {
        let p = SystemParams::new(128, 256, 4, 0.3, 0.5).unwrap();
        assert_eq!(p.l_s(), 1024);
        assert!((p.rho_s().powi(2) + p.rho_t().powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SystemParams::new(0, 16, 1, 0.5, 1.0).is_err());
        assert!(SystemParams::new(8, 16, 0, 0.5, 1.0).is_err());
        assert!(SystemParams::new(8, 16, 1, 1.0, 1.0).is_err());
        assert!(SystemParams::new(8, 16, 1, 0.5, 0.0).is_err());
        assert!(SystemParams::from_parts(33, 8, 16, 2, 0.8, 0.6, 1.0).is_err());
        assert!(SystemParams::from_parts(32, 8, 16, 2, 0.8, 0.5, 1.0).is_err());
    }
}
