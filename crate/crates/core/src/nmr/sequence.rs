//! Pulse events and the line-oriented sequence text format:
//!
//! ```text
//! # label: cnot
//! rot spins=2 axis=-y angle=pi/2
//! delay t=1/(4J)
//! rot spins=12 axis=x angle=pi
//! grad z
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SpinSystem;
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spins {
    One,
    Two,
    Both,
}

impl Spins {
    pub fn contains(self, spin: usize) -> bool {
        matches!((self, spin), (Self::Both, _) | (Self::One, 1) | (Self::Two, 2))
    }

    fn token(self) -> &'static str {
        match self {
            Self::One => "1",
            Self::Two => "2",
            Self::Both => "12",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
    NegX,
    NegY,
    NegZ,
}

impl Axis {
    pub fn component(self) -> super::Component {
        use super::Component;
        match self {
            Self::X | Self::NegX => Component::X,
            Self::Y | Self::NegY => Component::Y,
            Self::Z | Self::NegZ => Component::Z,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Self::X | Self::Y | Self::Z => 1.0,
            Self::NegX | Self::NegY | Self::NegZ => -1.0,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Self::X => "x",
            Self::Y => "y",
            Self::Z => "z",
            Self::NegX => "-x",
            Self::NegY => "-y",
            Self::NegZ => "-z",
        }
    }
}

/// Delay length, either absolute or a fraction 1/(nJ) of the coupling.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DelayDuration {
    Seconds(f64),
    InverseCoupling(u32),
}

impl DelayDuration {
    pub fn seconds(self, sys: &SpinSystem) -> f64 {
        match self {
            Self::Seconds(t) => t,
            Self::InverseCoupling(n) => 1.0 / (f64::from(n) * sys.j12),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PulseEvent {
    Rotation { spins: Spins, axis: Axis, angle: f64 },
    Delay(DelayDuration),
    GradientZ,
}

impl PulseEvent {
    pub fn rot(spins: Spins, axis: Axis, angle: f64) -> Self {
        Self::Rotation { spins, axis, angle }
    }

    pub fn delay_j(n: u32) -> Self {
        Self::Delay(DelayDuration::InverseCoupling(n))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub label: String,
    pub events: Vec<PulseEvent>,
}

impl PulseSequence {
    pub fn new(label: impl Into<String>) -> Self {
        Self { label: label.into(), events: Vec::new() }
    }

    pub fn with_events(label: impl Into<String>, events: Vec<PulseEvent>) -> Self {
        Self { label: label.into(), events }
    }

    pub fn push(&mut self, e: PulseEvent) -> &mut Self {
        self.events.push(e);
        self
    }

    pub fn append(&mut self, other: &PulseSequence) -> &mut Self {
        self.events.extend_from_slice(&other.events);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn has_gradient(&self) -> bool {
        self.events.iter().any(|e| matches!(e, PulseEvent::GradientZ))
    }

    /// Serializes to the text format. Angles that are exact small rational
    /// multiples of π are written as fractions.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.label.is_empty() {
            out.push_str(&format!("# label: {}\n", self.label));
        }
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut seq = PulseSequence::default();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(label) = comment.trim().strip_prefix("label:") {
                    if seq.label.is_empty() {
                        seq.label = label.trim().to_string();
                    }
                }
                continue;
            }
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let event = parse_event(line).map_err(|message| Error::Parse { line: line_no, message })?;
            seq.events.push(event);
        }
        Ok(seq)
    }
}

impl FromStr for PulseSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for PulseEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Rotation { spins, axis, angle } => {
                write!(f, "rot spins={} axis={} angle={}", spins.token(), axis.token(), format_angle(angle))
            }
            Self::Delay(DelayDuration::InverseCoupling(n)) => write!(f, "delay t=1/({n}J)"),
            Self::Delay(DelayDuration::Seconds(t)) => write!(f, "delay t={t:?}"),
            Self::GradientZ => write!(f, "grad z"),
        }
    }
}

const MAX_DENOMINATOR: u32 = 64;

fn pi_fraction(k: i64, n: u32) -> f64 {
    let v = k.unsigned_abs() as f64 * PI / f64::from(n);
    if k < 0 {
        -v
    } else {
        v
    }
}

fn format_angle(angle: f64) -> String {
    if angle == 0.0 {
        return "0".into();
    }
    for n in 1..=MAX_DENOMINATOR {
        let k = (angle * f64::from(n) / PI).round() as i64;
        if k != 0 && pi_fraction(k, n) == angle {
            let sign = if k < 0 { "-" } else { "" };
            let m = k.unsigned_abs();
            let num = if m == 1 { "pi".to_string() } else { format!("{m}pi") };
            return if n == 1 { format!("{sign}{num}") } else { format!("{sign}{num}/{n}") };
        }
    }
    format!("{angle:?}")
}

fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let bad = || format!("invalid angle '{s}'");
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if let Some(pos) = body.find("pi") {
        let num = body[..pos].trim_end_matches('*');
        let k: u64 = if num.is_empty() { 1 } else { num.parse().map_err(|_| bad())? };
        let rest = &body[pos + 2..];
        let n: u32 = match rest.strip_prefix('/') {
            Some(d) => d.parse().map_err(|_| bad())?,
            None if rest.is_empty() => 1,
            None => return Err(bad()),
        };
        if n == 0 {
            return Err(bad());
        }
        let k = i64::try_from(k).map_err(|_| bad())?;
        Ok(pi_fraction(if neg { -k } else { k }, n))
    } else {
        let v: f64 = body.parse().map_err(|_| bad())?;
        if !v.is_finite() {
            return Err(bad());
        }
        Ok(if neg { -v } else { v })
    }
}

fn parse_delay(s: &str) -> std::result::Result<DelayDuration, String> {
    if let Some(inner) = s.strip_prefix("1/(").and_then(|r| r.strip_suffix("J)")) {
        let n: u32 = inner.parse().map_err(|_| format!("invalid coupling fraction '{s}'"))?;
        if n == 0 {
            return Err(format!("invalid coupling fraction '{s}'"));
        }
        return Ok(DelayDuration::InverseCoupling(n));
    }
    let t: f64 = s.parse().map_err(|_| format!("invalid delay '{s}'"))?;
    if !t.is_finite() || t < 0.0 {
        return Err(format!("delay must be a finite nonnegative time, got '{s}'"));
    }
    Ok(DelayDuration::Seconds(t))
}

fn key_values<'a>(tokens: &[&'a str], keys: &[&str]) -> std::result::Result<Vec<&'a str>, String> {
    if tokens.len() != keys.len() {
        return Err(format!("expected {} arguments, found {}", keys.len(), tokens.len()));
    }
    tokens
        .iter()
        .zip(keys)
        .map(|(tok, key)| {
            tok.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| format!("expected '{key}=...', found '{tok}'"))
        })
        .collect()
}

fn parse_event(line: &str) -> std::result::Result<PulseEvent, String> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    match tokens[0] {
        "rot" => {
            let v = key_values(&tokens[1..], &["spins", "axis", "angle"])?;
            let spins = match v[0] {
                "1" => Spins::One,
                "2" => Spins::Two,
                "12" => Spins::Both,
                other => return Err(format!("unknown spins '{other}'")),
            };
            let axis = match v[1] {
                "x" => Axis::X,
                "y" => Axis::Y,
                "z" => Axis::Z,
                "-x" => Axis::NegX,
                "-y" => Axis::NegY,
                "-z" => Axis::NegZ,
                other => return Err(format!("unknown axis '{other}'")),
            };
            Ok(PulseEvent::Rotation { spins, axis, angle: parse_angle(v[2])? })
        }
        "delay" => {
            let v = key_values(&tokens[1..], &["t"])?;
            Ok(PulseEvent::Delay(parse_delay(v[0])?))
        }
        "grad" => match &tokens[1..] {
            ["z"] => Ok(PulseEvent::GradientZ),
            other => Err(format!("unknown gradient arguments '{}'", other.join(" "))),
        },
        other => Err(format!("unknown event '{other}'")),
    }
}
