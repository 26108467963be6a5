//! Market and portfolio files.
//!
//! Both are JSON documents carrying `"format_version": 1`. Numbers may be
//! written as JSON numbers or as strings (`"0.1"`, `"1/3"`); in exact mode
//! either form is read without rounding.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use span_lattice::lab::DoubleArray;
use span_lattice::spanning::{Instrument, Portfolio};
use span_lattice::{Exact, OptionKind, Payoff, Scalar, StateSpace};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Scalars that can be written back out.
pub trait Emit: Scalar {
    const ARITHMETIC: &'static str;

    fn to_json(&self) -> Value;

    fn to_cell(&self) -> String {
        self.to_string()
    }

    fn from_exact(x: &Exact) -> Self;

    fn array_csv(a: &DoubleArray<Exact>) -> String;
}

impl Emit for f64 {
    const ARITHMETIC: &'static str = "float";

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self).map_or(Value::Null, Value::Number)
    }

    fn from_exact(x: &Exact) -> Self {
        x.to_f64_lossy()
    }

    fn array_csv(a: &DoubleArray<Exact>) -> String {
        a.to_f64().to_csv()
    }
}

impl Emit for Exact {
    const ARITHMETIC: &'static str = "exact";

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_exact(x: &Exact) -> Self {
        x.clone()
    }

    fn array_csv(a: &DoubleArray<Exact>) -> String {
        a.to_csv()
    }
}

pub fn parse_number<S: Scalar>(v: &Value, what: &str) -> Result<S, CliError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        other => return Err(CliError::validation(format!("{what}: expected a number, found {other}"))),
    };
    S::parse_literal(&text).ok_or_else(|| CliError::validation(format!("{what}: cannot parse `{text}` as a number")))
}

fn check_version(found: u32, what: &str) -> Result<(), CliError> {
    if found == FORMAT_VERSION {
        Ok(())
    } else {
        Err(CliError::validation(format!(
            "{what}: unsupported format_version {found} (expected {FORMAT_VERSION})"
        )))
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

/// Probabilities must be positive and sum to one within [`PROB_TOLERANCE`].
/// They are renormalized only when the sum is off by more than rounding, so
/// values like `0.1` are stored as written.
pub fn state_space(probs: &[Value]) -> Result<Arc<StateSpace>, CliError> {
    let p: Vec<f64> = probs
        .iter()
        .enumerate()
        .map(|(i, v)| parse_number::<f64>(v, &format!("probs[{i}]")))
        .collect::<Result<_, _>>()?;
    if p.is_empty() {
        return Err(CliError::validation("probs: at least one state is required".into()));
    }
    if let Some(i) = p.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(CliError::validation(format!("probs[{i}] = {} is not strictly positive", p[i])));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_TOLERANCE {
        return Err(CliError::validation(format!("probs sum to {total}, not 1")));
    }
    let p = if (total - 1.0).abs() <= 1e-12 { p } else { p.iter().map(|x| x / total).collect() };
    StateSpace::new(p).map_err(|e| CliError::validation(e.to_string()))
}

#[derive(Debug, Deserialize)]
struct RawMarket {
    format_version: u32,
    #[serde(default)]
    states: Vec<String>,
    probs: Vec<Value>,
    #[serde(default)]
    assets: BTreeMap<String, Vec<Value>>,
    #[serde(default)]
    claims: BTreeMap<String, Vec<Value>>,
}

/// A finite market: state labels, probabilities, and named payoff vectors.
#[derive(Debug, Clone)]
pub struct Market<S> {
    pub states: Vec<String>,
    pub space: Arc<StateSpace>,
    pub assets: BTreeMap<String, Payoff<S>>,
    pub claims: BTreeMap<String, Payoff<S>>,
}

impl<S: Scalar> Market<S> {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw: RawMarket = read_json(path)?;
        check_version(raw.format_version, "market")?;
        let space = state_space(&raw.probs)?;
        let n = space.len();
        let states = if raw.states.is_empty() {
            (0..n).map(|i| format!("s{i}")).collect()
        } else if raw.states.len() == n {
            raw.states
        } else {
            return Err(CliError::validation(format!(
                "states has {} labels but probs has {n} entries",
                raw.states.len()
            )));
        };
        let vectors = |table: BTreeMap<String, Vec<Value>>, kind: &str| -> Result<BTreeMap<String, Payoff<S>>, CliError> {
            table
                .into_iter()
                .map(|(name, values)| {
                    if values.len() != n {
                        return Err(CliError::validation(format!(
                            "{kind} `{name}` has {} entries, expected {n}",
                            values.len()
                        )));
                    }
                    let v = values
                        .iter()
                        .enumerate()
                        .map(|(i, x)| parse_number::<S>(x, &format!("{kind} `{name}`[{i}]")))
                        .collect::<Result<Vec<_>, _>>()?;
                    let p = Payoff::new(space.clone(), v).map_err(|e| CliError::validation(e.to_string()))?;
                    Ok((name, p))
                })
                .collect()
        };
        Ok(Market {
            states,
            assets: vectors(raw.assets, "asset")?,
            claims: vectors(raw.claims, "claim")?,
            space,
        })
    }

    pub fn asset(&self, name: &str) -> Result<&Payoff<S>, CliError> {
        self.assets
            .get(name)
            .or_else(|| self.claims.get(name))
            .ok_or_else(|| CliError::validation(format!("no asset named `{name}`")))
    }

    pub fn claim(&self, name: &str) -> Result<&Payoff<S>, CliError> {
        self.claims
            .get(name)
            .or_else(|| self.assets.get(name))
            .ok_or_else(|| CliError::validation(format!("no claim named `{name}`")))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PositionRecord {
    pub kind: String,
    pub strike: Value,
    pub weight: Value,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct UnderlyingRecord {
    pub name: String,
    pub values: Vec<Value>,
}

/// On-disk portfolio: self-contained, so it can be re-evaluated without the
/// market it came from.
#[derive(Debug, Serialize, Deserialize)]
pub struct PortfolioFile {
    pub format_version: u32,
    pub arithmetic: String,
    pub states: Vec<String>,
    pub probs: Vec<Value>,
    pub underlying: UnderlyingRecord,
    pub positions: Vec<PositionRecord>,
}

impl PortfolioFile {
    pub fn from_portfolio<S: Emit>(portfolio: &Portfolio<S>, name: &str, underlying: &Payoff<S>, states: &[String]) -> Self {
        PortfolioFile {
            format_version: FORMAT_VERSION,
            arithmetic: S::ARITHMETIC.into(),
            states: states.to_vec(),
            probs: underlying.space().probs().iter().map(|p| p.to_json()).collect(),
            underlying: UnderlyingRecord {
                name: name.into(),
                values: underlying.values().iter().map(Emit::to_json).collect(),
            },
            positions: portfolio
                .positions()
                .iter()
                .map(|p| PositionRecord {
                    kind: p.instrument.kind.as_str().into(),
                    strike: p.instrument.strike.to_json(),
                    weight: p.weight.to_json(),
                })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let file: PortfolioFile = read_json(path)?;
        check_version(file.format_version, "portfolio")?;
        if file.arithmetic != "float" && file.arithmetic != "exact" {
            return Err(CliError::validation(format!("unknown arithmetic `{}`", file.arithmetic)));
        }
        Ok(file)
    }

    pub fn to_portfolio<S: Scalar>(&self) -> Result<(Portfolio<S>, Payoff<S>), CliError> {
        let space = state_space(&self.probs)?;
        if self.underlying.values.len() != space.len() {
            return Err(CliError::validation(format!(
                "underlying has {} entries, expected {}",
                self.underlying.values.len(),
                space.len()
            )));
        }
        let values = self
            .underlying
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| parse_number::<S>(v, &format!("underlying[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let underlying = Arc::new(Payoff::new(space.clone(), values).map_err(|e| CliError::validation(e.to_string()))?);
        let mut portfolio = Portfolio::new(space);
        for (i, p) in self.positions.iter().enumerate() {
            let kind: OptionKind = p
                .kind
                .parse()
                .map_err(|e: span_lattice::LatticeError| CliError::validation(format!("positions[{i}]: {e}")))?;
            let instrument = Instrument {
                kind,
                strike: parse_number(&p.strike, &format!("positions[{i}].strike"))?,
                underlying: underlying.clone(),
            };
            let weight = parse_number(&p.weight, &format!("positions[{i}].weight"))?;
            portfolio
                .push(instrument, weight)
                .map_err(|e| CliError::validation(e.to_string()))?;
        }
        Ok((portfolio, (*underlying).clone()))
    }
}
