use serde::{Deserialize, Serialize};
use std::fmt;

/// Physical unit attached to a [`MetricStream`] and to rule thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "deg")]
    Deg,
    #[serde(rename = "deg/s")]
    DegPerSec,
    #[serde(rename = "deg/s^2")]
    DegPerSec2,
    #[serde(rename = "N")]
    Newton,
    #[serde(rename = "BW")]
    BodyWeight,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Deg => "deg",
            Unit::DegPerSec => "deg/s",
            Unit::DegPerSec2 => "deg/s^2",
            Unit::Newton => "N",
            Unit::BodyWeight => "BW",
        }
    }

    /// Unit of the time derivative, if one exists in the tag set.
    pub fn derivative(self) -> Option<Unit> {
        match self {
            Unit::Deg => Some(Unit::DegPerSec),
            Unit::DegPerSec => Some(Unit::DegPerSec2),
            _ => None,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named, unit-tagged scalar series aligned to the frame grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricStream {
    pub measure: String,
    pub unit: Unit,
    pub frame_rate: f64,
    pub samples: Vec<f64>,
}

impl MetricStream {
    pub fn new(measure: impl Into<String>, unit: Unit, frame_rate: f64, samples: Vec<f64>) -> Self {
        Self {
            measure: measure.into(),
            unit,
            frame_rate,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    /// Column header used by tabular exports: `measure (unit)`.
    pub fn header(&self) -> String {
        format!("{} ({})", self.measure, self.unit)
    }
}

/// Ordered collection of aligned streams with lookup by measure id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StreamSet {
    streams: Vec<MetricStream>,
}

impl StreamSet {
    pub fn new(streams: Vec<MetricStream>) -> Self {
        Self { streams }
    }

    pub fn get(&self, measure: &str) -> Option<&MetricStream> {
        self.streams.iter().find(|s| s.measure == measure)
    }

    pub fn push(&mut self, stream: MetricStream) {
        self.streams.push(stream);
    }

    pub fn streams(&self) -> &[MetricStream] {
        &self.streams
    }

    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MetricStream> {
        self.streams.iter()
    }
}

impl FromIterator<MetricStream> for StreamSet {
    fn from_iter<T: IntoIterator<Item = MetricStream>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}
