//! Seeded channel-gain streams.
//!
//! Every stochastic model draws a raw amplitude, multiplies it by a scale
//! factor chosen so the gain has mean 0.5, and clamps to `[0, 1]`. If the
//! clamp moves the mean more than [`MEAN_TOLERANCE`], the scale factor is
//! refined by fixed-point iteration on the post-clamp mean.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::Scenario;

pub const TARGET_MEAN: f64 = 0.5;
pub const MEAN_TOLERANCE: f64 = 0.01;

/// Raw-amplitude mean of the Gaussian model. Puts it on the same axis as
/// the default Rician line-of-sight amplitude.
pub const DEFAULT_GAUSSIAN_RAW_MEAN: f64 = 4.0;
pub const DEFAULT_RICIAN_SPREAD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelKind {
    Gaussian,
    Rayleigh,
    Rician,
    Fixed,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Gaussian => "gaussian",
            ChannelKind::Rayleigh => "rayleigh",
            ChannelKind::Rician => "rician",
            ChannelKind::Fixed => "fixed",
        }
    }

    /// Default parameter for each kind: Gaussian variance 0.1, Rayleigh
    /// scale 2, Rician non-centrality 4, Fixed gain 0.5.
    pub fn default_param(self) -> f64 {
        match self {
            ChannelKind::Gaussian => 0.1,
            ChannelKind::Rayleigh => 2.0,
            ChannelKind::Rician => 4.0,
            ChannelKind::Fixed => 0.5,
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(ChannelKind::Gaussian),
            "rayleigh" => Ok(ChannelKind::Rayleigh),
            "rician" | "rice" => Ok(ChannelKind::Rician),
            "fixed" => Ok(ChannelKind::Fixed),
            other => Err(Error::param("channel.kind", format!("unknown kind `{other}`"))),
        }
    }
}

/// A channel-gain distribution on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    kind: ChannelKind,
    /// Gaussian: variance; Rayleigh: scale; Rician: non-centrality; Fixed: gain.
    param: f64,
    /// Gaussian: raw mean; Rician: spread sigma; unused otherwise.
    shape: f64,
    scale_factor: f64,
    calibration_steps: u32,
}

impl ChannelModel {
    pub fn gaussian(variance: f64) -> Result<Self> {
        Self::gaussian_with_mean(variance, DEFAULT_GAUSSIAN_RAW_MEAN)
    }

    pub fn gaussian_with_mean(variance: f64, raw_mean: f64) -> Result<Self> {
        positive("channel.param", variance)?;
        positive("channel.gaussian_mean", raw_mean)?;
        Self::calibrated(ChannelKind::Gaussian, variance, raw_mean, raw_mean, MEAN_TOLERANCE)
    }

    pub fn rayleigh(scale: f64) -> Result<Self> {
        positive("channel.param", scale)?;
        let raw_mean = scale * (std::f64::consts::PI / 2.0).sqrt();
        Self::calibrated(ChannelKind::Rayleigh, scale, 0.0, raw_mean, MEAN_TOLERANCE)
    }

    pub fn rician(nu: f64) -> Result<Self> {
        Self::rician_with_spread(nu, DEFAULT_RICIAN_SPREAD)
    }

    pub fn rician_with_spread(nu: f64, sigma: f64) -> Result<Self> {
        positive("channel.param", nu)?;
        positive("channel.rician_sigma", sigma)?;
        Self::calibrated(ChannelKind::Rician, nu, sigma, rician_mean(nu, sigma), MEAN_TOLERANCE)
    }

    pub fn fixed(gain: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gain) {
            return Err(Error::param(
                "channel.param",
                format!("fixed gain {gain} outside [0, 1]"),
            ));
        }
        Ok(ChannelModel {
            kind: ChannelKind::Fixed,
            param: gain,
            shape: 0.0,
            scale_factor: 1.0,
            calibration_steps: 0,
        })
    }

    /// Model of `kind` with its default parameter.
    pub fn with_defaults(kind: ChannelKind) -> Result<Self> {
        Self::from_kind(kind, kind.default_param())
    }

    pub fn from_kind(kind: ChannelKind, param: f64) -> Result<Self> {
        match kind {
            ChannelKind::Gaussian => Self::gaussian(param),
            ChannelKind::Rayleigh => Self::rayleigh(param),
            ChannelKind::Rician => Self::rician(param),
            ChannelKind::Fixed => Self::fixed(param),
        }
    }

    fn calibrated(kind: ChannelKind, param: f64, shape: f64, raw_mean: f64, tolerance: f64) -> Result<Self> {
        let mut model = ChannelModel {
            kind,
            param,
            shape,
            scale_factor: TARGET_MEAN / raw_mean,
            calibration_steps: 0,
        };
        let mut mean = model.clamped_mean();
        while (mean - TARGET_MEAN).abs() > tolerance {
            if model.calibration_steps >= 100 {
                return Err(Error::param(
                    "channel.param",
                    format!("cannot calibrate {kind} to mean {TARGET_MEAN}"),
                ));
            }
            model.scale_factor *= TARGET_MEAN / mean;
            model.calibration_steps += 1;
            mean = model.clamped_mean();
        }
        Ok(model)
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale_factor
    }

    /// Number of fixed-point rescaling steps the clamp required (0 when the
    /// analytic scale factor already met the mean tolerance).
    pub fn calibration_steps(&self) -> u32 {
        self.calibration_steps
    }

    pub fn is_degenerate(&self) -> bool {
        self.kind == ChannelKind::Fixed
    }

    /// Maps a raw draw to a gain.
    pub fn normalize(&self, raw: f64) -> f64 {
        match self.kind {
            ChannelKind::Fixed => self.param,
            _ => (raw * self.scale_factor).clamp(0.0, 1.0),
        }
    }

    /// Mean of the raw (unscaled) distribution.
    pub fn raw_mean(&self) -> f64 {
        match self.kind {
            ChannelKind::Gaussian => self.shape,
            ChannelKind::Rayleigh => self.param * (std::f64::consts::PI / 2.0).sqrt(),
            ChannelKind::Rician => rician_mean(self.param, self.shape),
            ChannelKind::Fixed => self.param,
        }
    }

    fn raw_pdf(&self, x: f64) -> f64 {
        match self.kind {
            ChannelKind::Gaussian => {
                let var = self.param;
                let d = x - self.shape;
                (-d * d / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
            }
            ChannelKind::Rayleigh => {
                if x < 0.0 {
                    return 0.0;
                }
                let s2 = self.param * self.param;
                x / s2 * (-x * x / (2.0 * s2)).exp()
            }
            ChannelKind::Rician => {
                if x < 0.0 {
                    return 0.0;
                }
                let (nu, s2) = (self.param, self.shape * self.shape);
                // exp(-(x-nu)^2 / 2s2) * I0e(x nu / s2) avoids overflow.
                let z = x * nu / s2;
                x / s2 * (-(x - nu) * (x - nu) / (2.0 * s2)).exp() * bessel_i0e(z)
            }
            ChannelKind::Fixed => 0.0,
        }
    }

    fn raw_support(&self) -> (f64, f64) {
        match self.kind {
            ChannelKind::Gaussian => {
                let sd = self.param.sqrt();
                (self.shape - 12.0 * sd, self.shape + 12.0 * sd)
            }
            ChannelKind::Rayleigh => (0.0, 14.0 * self.param),
            ChannelKind::Rician => (0.0, self.param + 14.0 * self.shape),
            ChannelKind::Fixed => (self.param, self.param),
        }
    }

    /// Mean of the clamped gain, by composite Simpson quadrature over the
    /// raw density.
    pub fn clamped_mean(&self) -> f64 {
        if self.kind == ChannelKind::Fixed {
            return self.param;
        }
        const INTERVALS: usize = 20_000;
        let (lo, hi) = self.raw_support();
        let h = (hi - lo) / INTERVALS as f64;
        let f = |x: f64| self.normalize(x) * self.raw_pdf(x);
        let mut acc = f(lo) + f(hi);
        for k in 1..INTERVALS {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + k as f64 * h);
        }
        acc * h / 3.0
    }

    fn draw_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            ChannelKind::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                self.shape + self.param.sqrt() * z
            }
            ChannelKind::Rayleigh => {
                let u: f64 = rng.random();
                self.param * (-2.0 * (1.0 - u).ln()).sqrt()
            }
            ChannelKind::Rician => {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                (self.param + self.shape * a).hypot(self.shape * b)
            }
            ChannelKind::Fixed => self.param,
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            ChannelKind::Gaussian => format!(
                "gaussian(variance={}, raw_mean={}, scale={:.9}, rescale_steps={})",
                self.param, self.shape, self.scale_factor, self.calibration_steps
            ),
            ChannelKind::Rayleigh => format!(
                "rayleigh(scale={}, scale_factor={:.9}, rescale_steps={})",
                self.param, self.scale_factor, self.calibration_steps
            ),
            ChannelKind::Rician => format!(
                "rician(nu={}, sigma={}, scale_factor={:.9}, rescale_steps={})",
                self.param, self.shape, self.scale_factor, self.calibration_steps
            ),
            ChannelKind::Fixed => format!("fixed(gain={})", self.param),
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} is not positive")))
    }
}

/// Exponentially scaled modified Bessel function `e^{-z} I0(z)`, `z >= 0`.
fn bessel_i0e(z: f64) -> f64 {
    if z < 30.0 {
        let q = z * z / 4.0;
        let (mut term, mut sum) = (1.0, 1.0);
        let mut k = 1.0;
        while term > sum * 1e-17 {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-z).exp()
    } else {
        asymptotic_ie(0.0, z)
    }
}

/// `e^{-z} I1(z)`, `z >= 0`.
fn bessel_i1e(z: f64) -> f64 {
    if z < 30.0 {
        let q = z * z / 4.0;
        let mut term = z / 2.0;
        let mut sum = term;
        let mut k = 1.0;
        while term > sum * 1e-17 {
            term *= q / (k * (k + 1.0));
            sum += term;
            k += 1.0;
        }
        sum * (-z).exp()
    } else {
        asymptotic_ie(1.0, z)
    }
}

// Large-argument expansion of e^{-z} I_order(z).
fn asymptotic_ie(order: f64, z: f64) -> f64 {
    let mu = 4.0 * order * order;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        let k = k as f64;
        term *= -(mu - (2.0 * k - 1.0).powi(2)) / (k * 8.0 * z);
        sum += term;
    }
    sum / (2.0 * std::f64::consts::PI * z).sqrt()
}

/// Mean of a Rician amplitude with non-centrality `nu` and spread `sigma`,
/// `sigma * sqrt(pi/2) * L_{1/2}(-nu^2 / 2 sigma^2)`.
pub fn rician_mean(nu: f64, sigma: f64) -> f64 {
    let half = nu * nu / (4.0 * sigma * sigma);
    // L_{1/2}(-2h) = (1 + 2h) I0e(h) + 2h I1e(h) with h = nu^2 / 4 sigma^2.
    let laguerre = (1.0 + 2.0 * half) * bessel_i0e(half) + 2.0 * half * bessel_i1e(half);
    sigma * (std::f64::consts::PI / 2.0).sqrt() * laguerre
}

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed`, a purpose tag and an index. Distinct
/// (tag, index) pairs give statistically independent streams.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    let a = mix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let b = mix64(a ^ tag.wrapping_mul(0xd1b5_4a32_d192_ed03));
    mix64(
        b ^ index
            .wrapping_mul(0x8cb9_2ba7_2f3d_8dd7)
            .wrapping_add(0x2545_f491_4f6c_dd1d),
    )
}

/// Seed tags for disjoint stream families.
pub mod tags {
    pub const REPLICATION: u64 = 0x5245_504c;
    pub const EVALUATION: u64 = 0x4556_414c;
    pub const PLAN: u64 = 0x504c_414e;
    pub const TRUTH: u64 = 0x5452_5554;
    pub const EPISODE: u64 = 0x4550_4953;
    pub const HISTOGRAM: u64 = 0x4849_5354;
    pub const WORKER: u64 = 0x574f_524b;
}

/// A reproducible stream of gains from one model.
#[derive(Debug, Clone)]
pub struct GainStream {
    model: ChannelModel,
    seed: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl GainStream {
    pub fn new(model: ChannelModel, seed: u64) -> Self {
        GainStream {
            model,
            seed,
            counter: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent child stream for worker or replication `index`.
    pub fn child(&self, tag: u64, index: u64) -> Self {
        GainStream::new(self.model.clone(), derive_seed(self.seed, tag, index))
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of gains drawn so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn draw(&mut self) -> f64 {
        self.counter += 1;
        let raw = self.model.draw_raw(&mut self.rng);
        self.model.normalize(raw)
    }

    /// Draws an `n_nodes x horizon` scenario, slot by slot. Drawing `horizon`
    /// single-slot scenarios in a row yields the same gains.
    pub fn sample_scenario(&mut self, n_nodes: usize, horizon: usize) -> Result<Scenario> {
        if n_nodes == 0 || horizon == 0 {
            return Err(Error::Dimension("scenario needs at least one node and one slot".into()));
        }
        let gains = (0..n_nodes * horizon).map(|_| self.draw()).collect();
        Scenario::new(n_nodes, horizon, gains)
    }
}
