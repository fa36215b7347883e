//! Log-normal shadow fading link model.
//!
//! Total attenuation at distance `d` is a deterministic geometric component
//! `alpha * 10 * log10(d / 1m)` plus a zero-mean Gaussian shadowing term with
//! standard deviation `sigma` (in dB). A packet is received when the total
//! attenuation stays below the threshold attenuation `beta_th`. The resulting
//! delivery-rate curve is closed form:
//!
//! ```text
//! p(d) = 1/2 - 1/2 * erf( 10*alpha / (sqrt(2)*sigma) * log10(d / r0) )
//! r0   = 10^(beta_th / (10*alpha))
//! ```

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical link constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// Path-loss exponent.
    pub alpha: f64,
    /// Shadowing standard deviation in dB.
    pub sigma_db: f64,
    /// Transmit power in dBm.
    pub pt_dbm: f64,
    /// Threshold attenuation in dB; reception requires attenuation below it.
    pub beta_th_db: f64,
}

impl Default for ChannelParams {
    /// alpha=3, sigma=4 dB, pt=50 mW (~16.99 dBm), beta_th=90 dB, so r0=1000 m.
    fn default() -> Self {
        ChannelParams {
            alpha: 3.0,
            sigma_db: 4.0,
            pt_dbm: 10.0 * 50.0_f64.log10(),
            beta_th_db: 90.0,
        }
    }
}

impl ChannelParams {
    pub fn new(alpha: f64, sigma_db: f64, pt_dbm: f64, beta_th_db: f64) -> Result<Self> {
        let p = ChannelParams { alpha, sigma_db, pt_dbm, beta_th_db };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(Error::Domain(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if self.sigma_db.is_nan() || self.sigma_db <= 0.0 {
            return Err(Error::Domain(format!("sigma must be > 0, got {}", self.sigma_db)));
        }
        if self.beta_th_db.is_nan() || self.beta_th_db <= 0.0 {
            return Err(Error::Domain(format!(
                "beta_th must be > 0, got {}",
                self.beta_th_db
            )));
        }
        if !self.pt_dbm.is_finite() {
            return Err(Error::Domain("pt_dbm must be finite".into()));
        }
        let r0 = self.r_zero();
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::Domain(format!("derived r0 is not positive finite: {r0}")));
        }
        Ok(())
    }

    /// Distance (meters) at which the delivery rate drops to 50%.
    pub fn r_zero(&self) -> f64 {
        10f64.powf(self.beta_th_db / (10.0 * self.alpha))
    }

    /// Deterministic geometric attenuation in dB at distance `d` meters.
    pub fn deterministic_attenuation(&self, d: f64) -> Result<f64> {
        if d.is_nan() || d <= 0.0 {
            return Err(Error::Domain(format!("distance must be > 0, got {d}")));
        }
        Ok(self.alpha * 10.0 * d.log10())
    }

    /// Closed-form packet delivery rate at distance `d`.
    pub fn delivery_rate(&self, d: f64) -> Result<f64> {
        if d.is_nan() || d <= 0.0 {
            return Err(Error::Domain(format!("distance must be > 0, got {d}")));
        }
        let arg = 10.0 * self.alpha / (2f64.sqrt() * self.sigma_db) * (d / self.r_zero()).log10();
        let p = 0.5 - 0.5 * erf(arg);
        Ok(p.clamp(0.0, 1.0))
    }

    /// One shadowed attenuation draw at distance `d`.
    pub fn draw_link<R: Rng + ?Sized>(&self, d: f64, rng: &mut R) -> Result<LinkDraw> {
        let det = self.deterministic_attenuation(d)?;
        let shadow = Normal::new(0.0, self.sigma_db)
            .map_err(|e| Error::Domain(e.to_string()))?
            .sample(rng);
        let beta_db = det + shadow;
        Ok(LinkDraw {
            beta_db,
            rssi_dbm: self.pt_dbm - beta_db,
            received: beta_db < self.beta_th_db,
        })
    }
}

/// One attenuation draw and its reception outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDraw {
    /// Total attenuation in dB (geometric + shadowing).
    pub beta_db: f64,
    /// Received signal strength in dBm; always `pt_dbm - beta_db`.
    pub rssi_dbm: f64,
    /// Whether the packet cleared the attenuation threshold.
    pub received: bool,
}

/// Error function, accurate to well below 1e-12 absolute.
///
/// Maclaurin series for |x| < 2.5, continued fraction for the complementary
/// function beyond. Implemented in-repo so results are identical across
/// platforms.
pub fn erf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let val = if ax < 2.5 { erf_series(ax) } else { 1.0 - erfc_cf(ax) };
    if x < 0.0 {
        -val
    } else {
        val
    }
}

// erf(x) = 2/sqrt(pi) * sum_{n>=0} (-1)^n x^(2n+1) / (n! (2n+1)), x in (0, 2.5)
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 1.0;
    loop {
        term *= -x2 / n;
        let contrib = term / (2.0 * n + 1.0);
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs() {
            break;
        }
        n += 1.0;
    }
    std::f64::consts::FRAC_2_SQRT_PI * sum
}

// erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + (2/2)/(x + (3/2)/(x + ...))))
// evaluated by backward recurrence; converges fast for x >= 2.5.
fn erfc_cf(x: f64) -> f64 {
    const SQRT_PI: f64 = 1.772453850905516027298167483341145183;
    let mut f = 0.0;
    for n in (1..=80).rev() {
        f = (n as f64 / 2.0) / (x + f);
    }
    (-x * x).exp() / SQRT_PI / (x + f)
}
