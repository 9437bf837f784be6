//! JSON run configuration.
//!
//! ```json
//! {
//!   "channel": {
//!     "field": {"order": 4, "reduction_poly": [1, 1, 1]},
//!     "noise_pmf": ["1/2", "1/2", "0", "0"],
//!     "downlink": {"input_size": 2, "users": [{"matrix": [["1", "0"], ["0", "1"]]}]}
//!   },
//!   "rates": {"users": 3, "R1": "39/100", "R1_2": "19/100"},
//!   "seed": 7
//! }
//! ```
//!
//! Probabilities and rates are exact decimal or `num/den` strings. Each
//! distribution is normalized exactly before conversion to floating point.
//! Unknown keys anywhere are rejected.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Deserialize;
use serde_json::Value;

use crate::capacity::{parse_rational, RateTuple, RegionSlice};
use crate::channel::{DownlinkSpec, Dmc, InputDist, UplinkSpec};
use crate::error::{Error, Result};
use crate::gf::{Field, FieldSpec};
use crate::message::MessageId;
use crate::schedule::SymbolLengths;
use crate::sim::{Axis, Load, TrialConfig};

/// A distribution may miss 1 by this much before it is rejected rather
/// than normalized.
pub const NORMALIZE_SLACK: f64 = 1e-6;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    channel: Option<RawChannel>,
    rates: Option<BTreeMap<String, Value>>,
    lengths: Option<BTreeMap<String, Value>>,
    caps: Option<Vec<Value>>,
    sweep: Option<RawSweep>,
    simulate: Option<RawSimulate>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    order: u32,
    reduction_poly: Option<Vec<u32>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    field: RawField,
    noise_pmf: Vec<Value>,
    downlink: RawDownlink,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDownlink {
    input_size: usize,
    users: Vec<RawUser>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUser {
    matrix: Vec<Vec<Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    x: String,
    y: String,
    x_max: Value,
    y_max: Value,
    step: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulate {
    #[serde(default)]
    mode: SimMode,
    n: Option<usize>,
    n_dl: Option<usize>,
    k: Option<usize>,
    rate: Option<Value>,
    trials: usize,
    input: Option<Vec<Value>>,
    axis: Option<RawAxis>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum RawAxis {
    N(Vec<usize>),
    RateScale(Vec<Value>),
}

/// Which experiment `simulate` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// The full scheme, every user decoding every message.
    #[default]
    Scheme,
    /// Two transmitters and the relay's sum decoder only.
    Relay,
}

#[derive(Debug, Clone)]
pub struct ChannelConfig {
    pub up: UplinkSpec,
    pub down: DownlinkSpec,
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub mode: SimMode,
    pub n: Option<usize>,
    pub n_dl: Option<usize>,
    /// Message length in relay mode.
    pub k: Option<usize>,
    /// Relay mode alternative to `k`: bits per channel use, quantized per `n`.
    pub rate: Option<BigRational>,
    pub trials: usize,
    pub input: Option<InputDist>,
    pub axis: Option<Axis>,
}

/// A validated configuration file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub channel: Option<ChannelConfig>,
    pub rates: Option<RateTuple>,
    pub lengths: Option<SymbolLengths>,
    pub caps: Option<Vec<BigRational>>,
    pub sweep: Option<RawSlice>,
    pub simulate: Option<SimulateConfig>,
    pub seed: Option<u64>,
}

/// Slice parameters before the base rate tuple is attached.
#[derive(Debug, Clone)]
pub struct RawSlice {
    pub x: MessageId,
    pub y: MessageId,
    pub x_max: BigRational,
    pub y_max: BigRational,
    pub step: BigRational,
}

fn rational(v: &Value, field: &str) -> Result<BigRational> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(Error::config(field, "expected a number or a decimal/fraction string")),
    };
    parse_rational(&text).map_err(|_| Error::config(field, format!("`{text}` is not an exact rational")))
}

fn pmf(values: &[Value], field: &str) -> Result<Vec<f64>> {
    let exact = values
        .iter()
        .enumerate()
        .map(|(i, v)| rational(v, &format!("{field}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if let Some(i) = exact.iter().position(|p| p.is_negative()) {
        return Err(Error::config(format!("{field}[{i}]"), "probabilities must be nonnegative"));
    }
    let total: BigRational = exact.iter().cloned().sum();
    if total.is_zero() {
        return Err(Error::config(field, "probabilities sum to zero"));
    }
    let off = (total.to_f64().unwrap_or(f64::INFINITY) - 1.0).abs();
    if off > NORMALIZE_SLACK {
        return Err(Error::config(field, format!("probabilities sum to {total}, not 1")));
    }
    Ok(exact.iter().map(|p| (p / &total).to_f64().unwrap_or(0.0)).collect())
}

fn message_key(key: &str, prefix: char, field: &str) -> Result<MessageId> {
    let bad = || Error::config(format!("{field}.{key}"), "unknown key");
    let body = key.strip_prefix(prefix).ok_or_else(bad)?;
    MessageId::parse(&format!("R{body}")).map_err(|_| bad())
}

fn users_of(map: &BTreeMap<String, Value>, field: &str) -> Result<usize> {
    let users = map
        .get("users")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::config(format!("{field}.users"), "required positive integer"))?;
    if users == 0 {
        return Err(Error::config(format!("{field}.users"), "must be positive"));
    }
    Ok(users as usize)
}

fn rates(map: &BTreeMap<String, Value>) -> Result<RateTuple> {
    let users = users_of(map, "rates")?;
    let mut r = RateTuple::zeros(users);
    for (key, v) in map.iter().filter(|(k, _)| k.as_str() != "users") {
        let path = format!("rates.{key}");
        let m = message_key(key, 'R', "rates")?;
        let value = rational(v, &path)?;
        r.set(m, value).map_err(|e| Error::config(&path, e.to_string()))?;
    }
    Ok(r)
}

fn lengths(map: &BTreeMap<String, Value>) -> Result<SymbolLengths> {
    let users = users_of(map, "lengths")?;
    let mut k = SymbolLengths::zeros(users);
    for (key, v) in map.iter().filter(|(k, _)| k.as_str() != "users") {
        let path = format!("lengths.{key}");
        let m = message_key(key, 'k', "lengths")?;
        let len = v
            .as_u64()
            .ok_or_else(|| Error::config(&path, "expected a nonnegative integer"))?;
        k.set(m, len as usize).map_err(|e| Error::config(&path, e.to_string()))?;
    }
    Ok(k)
}

fn channel(raw: RawChannel) -> Result<ChannelConfig> {
    let spec = match raw.field.reduction_poly {
        Some(p) => FieldSpec::with_poly(raw.field.order, p),
        None => FieldSpec::new(raw.field.order),
    }
    .map_err(|e| Error::config("channel.field", e.to_string()))?;
    let field = Field::new(spec).map_err(|e| Error::config("channel.field", e.to_string()))?;
    let noise = pmf(&raw.noise_pmf, "channel.noise_pmf")?;
    if noise.len() != field.order() as usize {
        return Err(Error::config(
            "channel.noise_pmf",
            format!("{} entries for a field of order {}", noise.len(), field.order()),
        ));
    }
    let up = UplinkSpec::new(field, noise).map_err(|e| Error::config("channel.noise_pmf", e.to_string()))?;
    let mut users = Vec::with_capacity(raw.downlink.users.len());
    for (a, u) in raw.downlink.users.iter().enumerate() {
        let rows = u
            .matrix
            .iter()
            .enumerate()
            .map(|(x, row)| pmf(row, &format!("channel.downlink.users[{a}].matrix[{x}]")))
            .collect::<Result<Vec<_>>>()?;
        let path = format!("channel.downlink.users[{a}].matrix");
        users.push(Dmc::new(rows).map_err(|e| Error::config(&path, e.to_string()))?);
    }
    let down = DownlinkSpec::new(raw.downlink.input_size, users)
        .map_err(|e| Error::config("channel.downlink", e.to_string()))?;
    Ok(ChannelConfig { up, down })
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        let channel = raw.channel.map(channel).transpose()?;
        let rates = raw.rates.as_ref().map(rates).transpose()?;
        let lengths = raw.lengths.as_ref().map(lengths).transpose()?;
        let caps = raw
            .caps
            .map(|cs| {
                cs.iter()
                    .enumerate()
                    .map(|(i, v)| rational(v, &format!("caps[{i}]")))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let sweep = raw
            .sweep
            .map(|s| -> Result<RawSlice> {
                let coord = |name: &str, path: &str| {
                    MessageId::parse(name).map_err(|_| Error::config(path, format!("`{name}` is not a rate name like R1_2")))
                };
                Ok(RawSlice {
                    x: coord(&s.x, "sweep.x")?,
                    y: coord(&s.y, "sweep.y")?,
                    x_max: rational(&s.x_max, "sweep.x_max")?,
                    y_max: rational(&s.y_max, "sweep.y_max")?,
                    step: rational(&s.step, "sweep.step")?,
                })
            })
            .transpose()?;
        let simulate = raw
            .simulate
            .map(|s| -> Result<SimulateConfig> {
                let input = s
                    .input
                    .map(|p| pmf(&p, "simulate.input").and_then(InputDist::new))
                    .transpose()?;
                let axis = match s.axis {
                    None => None,
                    Some(RawAxis::N(ns)) => Some(Axis::N(ns)),
                    Some(RawAxis::RateScale(vs)) => Some(Axis::RateScale(
                        vs.iter()
                            .enumerate()
                            .map(|(i, v)| rational(v, &format!("simulate.axis.rate_scale[{i}]")))
                            .collect::<Result<Vec<_>>>()?,
                    )),
                };
                Ok(SimulateConfig {
                    mode: s.mode,
                    n: s.n,
                    n_dl: s.n_dl,
                    k: s.k,
                    rate: s.rate.as_ref().map(|v| rational(v, "simulate.rate")).transpose()?,
                    trials: s.trials,
                    input,
                    axis,
                })
            })
            .transpose()?;
        Ok(RunConfig {
            channel,
            rates,
            lengths,
            caps,
            sweep,
            simulate,
            seed: raw.seed,
        })
    }

    pub fn require_channel(&self) -> Result<&ChannelConfig> {
        self.channel.as_ref().ok_or_else(|| Error::config("channel", "required for this command"))
    }

    pub fn require_rates(&self) -> Result<&RateTuple> {
        self.rates.as_ref().ok_or_else(|| Error::config("rates", "required for this command"))
    }

    /// Rates checked against the channel's user count.
    pub fn rates_for_channel(&self) -> Result<(&ChannelConfig, &RateTuple)> {
        let ch = self.require_channel()?;
        let r = self.require_rates()?;
        if r.users() != ch.down.users() {
            return Err(Error::config(
                "rates.users",
                format!("{} users but the downlink has {} channels", r.users(), ch.down.users()),
            ));
        }
        Ok((ch, r))
    }

    pub fn region_slice(&self) -> Result<RegionSlice> {
        let s = self.sweep.as_ref().ok_or_else(|| Error::config("sweep", "required for this command"))?;
        let base = self.rates.clone().unwrap_or_else(|| {
            let users = self.channel.as_ref().map_or(0, |c| c.down.users());
            RateTuple::zeros(users)
        });
        Ok(RegionSlice {
            base,
            x: s.x,
            y: s.y,
            x_max: s.x_max.clone(),
            y_max: s.y_max.clone(),
            step: s.step.clone(),
        })
    }

    /// Trial configuration for scheme mode. `seed` overrides the file.
    pub fn trial_config(&self, seed: Option<u64>) -> Result<TrialConfig> {
        let ch = self.require_channel()?;
        let s = self.simulate.as_ref().ok_or_else(|| Error::config("simulate", "required for this command"))?;
        let load = match (&self.lengths, &self.rates) {
            (Some(k), _) => Load::Lengths(k.clone()),
            (None, Some(r)) => Load::Rates(r.clone()),
            (None, None) => return Err(Error::config("rates", "simulate needs `rates` or `lengths`")),
        };
        let n = s.n.or(match &s.axis {
            Some(Axis::N(ns)) => ns.first().copied(),
            _ => None,
        });
        let n = n.ok_or_else(|| Error::config("simulate.n", "required unless the axis sweeps n"))?;
        Ok(TrialConfig {
            up: ch.up.clone(),
            down: ch.down.clone(),
            load,
            n,
            n_dl: s.n_dl,
            trials: s.trials,
            seed: seed.or(self.seed).unwrap_or(0),
            input: s.input.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "channel": {
            "field": {"order": 4},
            "noise_pmf": ["1/2", "0.5", "0", "0"],
            "downlink": {"input_size": 2, "users": [
                {"matrix": [["1", "0"], ["0", "1"]]},
                {"matrix": [["1", "0"], ["0", "1"]]},
                {"matrix": [["1", "0"], ["0", "1"]]}
            ]}
        },
        "rates": {"users": 3, "R1": "39/100", "R2": "0.39", "R3": "0.39", "R1_2": "0.19", "R1_3": "0.14", "R2_3": "0.14"},
        "seed": 3
    }"#;

    #[test]
    fn parses_example() {
        let c = RunConfig::from_json(EXAMPLE).unwrap();
        let ch = c.channel.unwrap();
        assert_eq!(ch.up.bound(), 1.0);
        assert_eq!(ch.down.users(), 3);
        let r = c.rates.unwrap();
        assert_eq!(r.sum_rate(2).unwrap(), parse_rational("0.97").unwrap());
        assert_eq!(c.seed, Some(3));
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = EXAMPLE.replace("\"seed\": 3", "\"seed\": 3, \"colour\": 1");
        assert!(matches!(RunConfig::from_json(&bad), Err(Error::Config { .. })));
        let bad = EXAMPLE.replace("\"R1\":", "\"X1\":");
        match RunConfig::from_json(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "rates.X1"),
            other => panic!("{other:?}"),
        }
        let bad = EXAMPLE.replace("\"order\": 4", "\"order\": 4, \"poly\": [1]");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn normalizes_exactly_and_rejects_bad_sums() {
        let p = pmf(&[Value::from("1/3"), Value::from("1/3"), Value::from("0.333333")], "p").unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(pmf(&[Value::from("0.5"), Value::from("0.6")], "p").is_err());
        assert!(pmf(&[Value::from("-0.5"), Value::from("1.5")], "p").is_err());
    }

    #[test]
    fn field_errors_point_at_path() {
        let bad = EXAMPLE.replace("[\"1\", \"0\"], [\"0\", \"1\"]]},\n                {", "[\"1\", \"0\"], [\"0\", \"2\"]]},\n                {");
        match RunConfig::from_json(&bad) {
            Err(Error::Config { field, .. }) => assert!(field.starts_with("channel.downlink.users[0]"), "{field}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lengths_section() {
        let text = r#"{"lengths": {"users": 2, "k1": 2, "k2": 1, "k1_2": 3}}"#;
        let k = RunConfig::from_json(text).unwrap().lengths.unwrap();
        assert_eq!(k.get(MessageId::Common(0, 1)), 3);
        assert!(RunConfig::from_json(r#"{"lengths": {"users": 2, "k3": 1}}"#).is_err());
    }
}
