use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_visibility, ideal_probability, MeasurementSetting};
use crate::error::{Result, SwapError};
use crate::state::DensityMatrix;

/// Two-fold coincidence rates between detector pairs, in Hz.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairRates {
    pub ab_hz: f64,
    pub cd_hz: f64,
    pub ac_hz: f64,
    pub bd_hz: f64,
}

impl PairRates {
    fn as_array(&self) -> [f64; 4] {
        [self.ab_hz, self.cd_hz, self.ac_hz, self.bd_hz]
    }
}

/// Detector rates feeding the accidental-coincidence estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackgroundRates {
    /// Singles in detectors A, B, C, D.
    pub singles_hz: [f64; 4],
    pub pairs: PairRates,
    /// Pump repetition rate.
    pub rep_rate_hz: f64,
}

impl BackgroundRates {
    /// No accidentals at the given repetition rate.
    pub fn silent(rep_rate_hz: f64) -> Self {
        Self { singles_hz: [0.0; 4], pairs: PairRates::default(), rep_rate_hz }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rep_rate_hz > 0.0) || !self.rep_rate_hz.is_finite() {
            return Err(SwapError::InvalidArgument(format!(
                "repetition rate must be positive, got {}",
                self.rep_rate_hz
            )));
        }
        if self
            .singles_hz
            .iter()
            .chain(self.pairs.as_array().iter())
            .any(|r| !(*r >= 0.0) || !r.is_finite())
        {
            return Err(SwapError::InvalidArgument("rates must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Expected accidental four-folds per second.
    pub fn background_hz(&self) -> Result<f64> {
        background_rate(&self.pairs, &self.singles_hz, self.rep_rate_hz)
    }
}

/// Visibility and accidental-rate model for simulated acquisition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub visibility: f64,
    pub background: BackgroundRates,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(visibility: f64, background: BackgroundRates, seed: u64) -> Result<Self> {
        check_visibility(visibility)?;
        background.validate()?;
        Ok(Self { visibility, background, seed })
    }
}

/// Four-fold counts accumulated at one setting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting: MeasurementSetting,
    pub fourfold_raw: u64,
    pub duration_s: f64,
    pub rates: BackgroundRates,
}

impl CountRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return Err(SwapError::InvalidArgument(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        self.rates.validate()
    }

    /// `setting=<id> raw=<n> duration_s=<t> rep_rate_hz=<R> singles_hz=<a,b,c,d> pairs_hz=<ab,cd,ac,bd>`
    ///
    /// Floats use the shortest representation that parses back to the same bits.
    pub fn to_line(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        format!(
            "setting={} raw={} duration_s={:?} rep_rate_hz={:?} singles_hz={} pairs_hz={}",
            self.setting.id(),
            self.fourfold_raw,
            self.duration_s,
            self.rates.rep_rate_hz,
            join(&self.rates.singles_hz),
            join(&self.rates.pairs.as_array()),
        )
    }

    pub fn from_line(line: &str) -> Result<Self> {
        let bad = |what: &str| SwapError::Parse(format!("{what} in count record {line:?}"));
        let mut fields = std::collections::BTreeMap::new();
        for tok in line.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| bad("missing '='"))?;
            if fields.insert(k, v).is_some() {
                return Err(bad("repeated key"));
            }
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(&format!("missing {k}")));
        let float = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
        let floats4 = |s: &str| -> Result<[f64; 4]> {
            let v: Vec<f64> = s.split(',').map(float).collect::<Result<_>>()?;
            v.try_into().map_err(|_| bad("expected four values"))
        };
        if fields.len() != 6 {
            return Err(bad("unexpected keys"));
        }
        let pairs = floats4(get("pairs_hz")?)?;
        let record = Self {
            setting: MeasurementSetting::parse_id(get("setting")?)?,
            fourfold_raw: get("raw")?.parse().map_err(|_| bad("bad raw count"))?,
            duration_s: float(get("duration_s")?)?,
            rates: BackgroundRates {
                singles_hz: floats4(get("singles_hz")?)?,
                pairs: PairRates { ab_hz: pairs[0], cd_hz: pairs[1], ac_hz: pairs[2], bd_hz: pairs[3] },
                rep_rate_hz: float(get("rep_rate_hz")?)?,
            },
        };
        record.validate()?;
        Ok(record)
    }
}

/// One record per line; blank lines and `#` comments are skipped on parse.
pub fn format_records(records: &[CountRecord]) -> String {
    records.iter().map(|r| r.to_line() + "\n").collect()
}

pub fn parse_records(text: &str) -> Result<Vec<CountRecord>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(CountRecord::from_line)
        .collect()
}

fn check_rep_rate(r: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(SwapError::InvalidArgument(format!("repetition rate must be positive, got {r}")));
    }
    Ok(())
}

/// Four-folds per second from two independent pairs in one pump pulse:
/// `(C_AB C_CD + C_AC C_BD) / R`.
pub fn genuine_fourfold_rate(pairs: &PairRates, rep_rate_hz: f64) -> Result<f64> {
    check_rep_rate(rep_rate_hz)?;
    Ok((pairs.ab_hz * pairs.cd_hz + pairs.ac_hz * pairs.bd_hz) / rep_rate_hz)
}

/// Accidental four-folds per second: one true pair with two unrelated
/// singles, or four unrelated singles.
pub fn background_rate(pairs: &PairRates, singles_hz: &[f64; 4], rep_rate_hz: f64) -> Result<f64> {
    check_rep_rate(rep_rate_hz)?;
    let [sa, sb, sc, sd] = *singles_hz;
    let r = rep_rate_hz;
    let pair_terms = pairs.ab_hz * sc * sd + sa * sb * pairs.cd_hz + pairs.ac_hz * sb * sd + sa * sc * pairs.bd_hz;
    Ok(pair_terms / (r * r) + sa * sb * sc * sd / (r * r * r))
}

/// Raw counts minus the expected accidentals, floored at zero.
pub fn subtract_background(record: &CountRecord) -> f64 {
    let expected = record.rates.background_hz().unwrap_or(0.0) * record.duration_s;
    (record.fourfold_raw as f64 - expected).max(0.0)
}

/// Draws Poisson four-fold counts for each setting.
///
/// The genuine intensity is `rate_at_unit_probability * p(setting)` and the
/// accidental intensity comes from [`background_rate`]. Setting `i` samples
/// from its own ChaCha stream `i` under `noise.seed`, so results do not
/// depend on evaluation order.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    rate_at_unit_probability: f64,
    duration_s: f64,
    noise: &NoiseModel,
) -> Result<Vec<CountRecord>> {
    if !(duration_s > 0.0) || !duration_s.is_finite() {
        return Err(SwapError::InvalidArgument(format!("duration must be positive, got {duration_s}")));
    }
    if !(rate_at_unit_probability >= 0.0) || !rate_at_unit_probability.is_finite() {
        return Err(SwapError::InvalidArgument("four-fold rate must be non-negative".into()));
    }
    noise.background.validate()?;
    let background = noise.background.background_hz()?;
    settings
        .par_iter()
        .enumerate()
        .map(|(i, setting)| {
            let p = ideal_probability(rho, setting)?;
            let mean = duration_s * (rate_at_unit_probability * p + background);
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            rng.set_stream(i as u64);
            Ok(CountRecord {
                setting: *setting,
                fourfold_raw: poisson(mean, &mut rng),
                duration_s,
                rates: noise.background,
            })
        })
        .collect()
}

/// Independent sub-seed number `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

pub(crate) fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}
