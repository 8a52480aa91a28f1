//! Seedable generators for the five synthetic series classes.
//!
//! Every series is a pure function of `(spec, index)`: the per-series RNG is
//! seeded from a mix of the master seed, the class and the index, so batches
//! can be generated in any order or in parallel and still agree bit for bit.
//!
//! Default parameters reproduce reference batch medians of `|tau_Y|` and
//! `tau_L` at length 201 (one value per year, 1800 to 2000):
//!
//! | class            | model                                                        |
//! |------------------|--------------------------------------------------------------|
//! | white noise      | iid `N(0, s^2)`                                              |
//! | rw with drift    | cumulative sum of `N(-delta, s^2)` steps, `delta ~ U(lo, hi)` |
//! | rw without drift | cumulative sum of `N(0, s^2)` steps                          |
//! | linear trend     | `b * t + e_t`, `b ~ U(-m, m)`, `e` AR(1) Gaussian            |
//! | nonlinear trend  | `+/- A * g(t / (n-1)) + e_t`, `g` from a random family        |

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Source, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesClass {
    WhiteNoise,
    RwDrift,
    RwPlain,
    LinearTrend,
    NonlinearTrend,
}

impl SeriesClass {
    pub const ALL: [SeriesClass; 5] = [
        SeriesClass::WhiteNoise,
        SeriesClass::RwDrift,
        SeriesClass::RwPlain,
        SeriesClass::LinearTrend,
        SeriesClass::NonlinearTrend,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesClass::WhiteNoise => "white_noise",
            SeriesClass::RwDrift => "rw_drift",
            SeriesClass::RwPlain => "rw_plain",
            SeriesClass::LinearTrend => "linear_trend",
            SeriesClass::NonlinearTrend => "nonlinear_trend",
        }
    }

    fn code(self) -> u64 {
        match self {
            SeriesClass::WhiteNoise => 1,
            SeriesClass::RwDrift => 2,
            SeriesClass::RwPlain => 3,
            SeriesClass::LinearTrend => 4,
            SeriesClass::NonlinearTrend => 5,
        }
    }
}

impl fmt::Display for SeriesClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeriesClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SeriesClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::input(format!("unknown series class {s:?}")))
    }
}

/// Class-specific generator parameters. Unused fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    /// Standard deviation of the Gaussian shocks (all classes).
    pub noise_scale: f64,
    /// Drift magnitude range; the drift itself is negative.
    pub drift_min: f64,
    pub drift_max: f64,
    /// Slopes are drawn from `U(-slope_max, slope_max)` per step.
    pub slope_max: f64,
    /// AR(1) coefficient of the noise around a linear trend.
    pub linear_noise_ar: f64,
    /// Amplitude range of the nonlinear component, in noise units.
    pub amplitude_min: f64,
    pub amplitude_max: f64,
    /// Relative weights of the quadratic, exponential and saturating families.
    pub family_weights: [f64; 3],
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            noise_scale: 1.0,
            drift_min: 0.1,
            drift_max: 0.3,
            slope_max: 0.07,
            linear_noise_ar: 0.3,
            amplitude_min: 14.0,
            amplitude_max: 36.0,
            family_weights: [1.0, 1.0, 1.0],
        }
    }
}

impl GeneratorParams {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("drift_min", self.drift_min),
            ("drift_max", self.drift_max),
            ("slope_max", self.slope_max),
            ("amplitude_min", self.amplitude_min),
            ("amplitude_max", self.amplitude_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::input(format!("{name} must be positive, got {v}")));
            }
        }
        // Zero noise is allowed: it yields the noiseless deterministic limit.
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::input("noise_scale must be non-negative"));
        }
        if self.drift_min > self.drift_max || self.amplitude_min > self.amplitude_max {
            return Err(Error::input("parameter range has min > max"));
        }
        if !(self.linear_noise_ar.abs() < 1.0) {
            return Err(Error::input("linear_noise_ar must lie in (-1, 1)"));
        }
        if self.family_weights.iter().any(|w| !(*w >= 0.0))
            || self.family_weights.iter().sum::<f64>() <= 0.0
        {
            return Err(Error::input(
                "family_weights must be non-negative, not all zero",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub class: SeriesClass,
    pub length: usize,
    pub start_year: i32,
    pub params: GeneratorParams,
    pub master_seed: u64,
}

/// Length of the 1800-2000 annual index the generators are matched to.
pub const DEFAULT_LENGTH: usize = 201;
pub const DEFAULT_START_YEAR: i32 = 1800;

impl GeneratorSpec {
    pub fn new(class: SeriesClass, master_seed: u64) -> Self {
        GeneratorSpec {
            class,
            length: DEFAULT_LENGTH,
            start_year: DEFAULT_START_YEAR,
            params: GeneratorParams::default(),
            master_seed,
        }
    }

    /// Matches length and start year to `target`'s span.
    pub fn matching(class: SeriesClass, master_seed: u64, target: &TimeSeries) -> Self {
        GeneratorSpec {
            length: (target.last_year() - target.first_year() + 1) as usize,
            start_year: target.first_year(),
            ..GeneratorSpec::new(class, master_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::input(format!(
                "length must be >= 2, got {}",
                self.length
            )));
        }
        self.params.validate()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable per-series seed.
pub fn derive_seed(master_seed: u64, class: SeriesClass, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ class.code()) ^ index)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Generates series number `index` of the batch described by `spec`.
pub fn gen_series(spec: &GeneratorSpec, index: u64) -> Result<TimeSeries> {
    spec.validate()?;
    let seed = derive_seed(spec.master_seed, spec.class, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = generate_values(spec, &mut rng);
    TimeSeries::from_start(
        format!("{}_{index}", spec.class),
        spec.start_year,
        values,
        Source::Simulated {
            class: spec.class,
            seed,
        },
    )
}

/// `gen_series(spec, 0..count)`.
pub fn gen_batch(spec: &GeneratorSpec, count: usize) -> Result<Vec<TimeSeries>> {
    if count == 0 {
        return Err(Error::input("batch count must be >= 1"));
    }
    (0..count as u64).map(|i| gen_series(spec, i)).collect()
}

fn generate_values(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = spec.length;
    let p = &spec.params;
    let s = p.noise_scale;
    match spec.class {
        SeriesClass::WhiteNoise => (0..n).map(|_| s * normal(rng)).collect(),
        SeriesClass::RwPlain | SeriesClass::RwDrift => {
            let drift = if spec.class == SeriesClass::RwDrift {
                -rng.random_range(p.drift_min..=p.drift_max)
            } else {
                0.0
            };
            let mut level = 0.0;
            (0..n)
                .map(|_| {
                    level += drift + s * normal(rng);
                    level
                })
                .collect()
        }
        SeriesClass::LinearTrend => {
            let slope = rng.random_range(-p.slope_max..=p.slope_max);
            let noise = ar1_noise(rng, n, p.linear_noise_ar, s);
            (0..n).map(|t| slope * t as f64 + noise[t]).collect()
        }
        SeriesClass::NonlinearTrend => {
            let shape = nonlinear_shape(rng, n, &p.family_weights);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let amp = rng.random_range(p.amplitude_min..=p.amplitude_max);
            shape
                .into_iter()
                .map(|g| sign * amp * g + s * normal(rng))
                .collect()
        }
    }
}

/// Stationary AR(1) noise with innovation scale `s`.
fn ar1_noise(rng: &mut ChaCha8Rng, n: usize, phi: f64, s: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut e = s * normal(rng) / (1.0 - phi * phi).sqrt();
    for _ in 0..n {
        out.push(e);
        e = phi * e + s * normal(rng);
    }
    out
}

/// Monotone shape on `[0, 1]`, rescaled to span exactly `[0, 1]`.
fn nonlinear_shape(rng: &mut ChaCha8Rng, n: usize, weights: &[f64; 3]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut pick = rng.random_range(0.0..total);
    let mut family = 2;
    for (k, &w) in weights.iter().enumerate() {
        if pick < w {
            family = k;
            break;
        }
        pick -= w;
    }
    let u = |t: usize| t as f64 / (n - 1).max(1) as f64;
    let raw: Vec<f64> = match family {
        0 => {
            // Vertex at or before the early part of the window.
            let c = rng.random_range(-0.5..0.3);
            (0..n).map(|t| (u(t) - c).powi(2)).collect()
        }
        1 => {
            let r = rng.random_range(1.0..5.0);
            (0..n).map(|t| (r * u(t)).exp_m1()).collect()
        }
        _ => {
            let r = rng.random_range(1.0..6.0);
            (0..n).map(|t| -(-r * u(t)).exp_m1()).collect()
        }
    };
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    raw.into_iter()
        .map(|g| if span > 0.0 { (g - lo) / span } else { 0.0 })
        .collect()
}
