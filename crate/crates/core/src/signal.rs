//! Zero-phase Butterworth smoothing and finite-difference derivatives.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stream::{MetricStream, Unit};

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("cutoff {cutoff} Hz must be positive and below the Nyquist frequency {nyquist} Hz")]
    InvalidCutoff { cutoff: f64, nyquist: f64 },
    #[error("effective filter order must be a positive even number, got {0}")]
    InvalidOrder(u32),
    #[error("stream has {len} samples, at least {min} required")]
    TooShort { len: usize, min: usize },
    #[error("unit `{0}` has no derivative unit")]
    NotDifferentiable(Unit),
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidRate(f64),
}

/// Low-pass filter parameters. `order` is the effective order after the
/// forward and backward passes, so each pass runs at `order / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSpec {
    pub cutoff_hz: f64,
    pub order: u32,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            cutoff_hz: 6.0,
            order: 4,
        }
    }
}

impl FilterSpec {
    pub fn min_len(&self) -> usize {
        3 * self.order as usize
    }

    pub fn validate(&self, rate: f64) -> Result<(), SignalError> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(SignalError::InvalidRate(rate));
        }
        if self.order == 0 || !self.order.is_multiple_of(2) {
            return Err(SignalError::InvalidOrder(self.order));
        }
        let nyquist = rate / 2.0;
        if !(self.cutoff_hz > 0.0 && self.cutoff_hz < nyquist) {
            return Err(SignalError::InvalidCutoff {
                cutoff: self.cutoff_hz,
                nyquist,
            });
        }
        Ok(())
    }
}

/// One transposed direct-form II section; first-order sections have
/// `b2 == a2 == 0`.
#[derive(Debug, Clone, Copy)]
struct Section {
    b: [f64; 3],
    a: [f64; 2],
}

impl Section {
    fn run(&self, data: &mut [f64]) {
        let Some(&x0) = data.first() else { return };
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        // steady state for a constant input equal to the first sample
        let mut z2 = (b2 - a2) * x0;
        let mut z1 = (b1 - a1) * x0 + z2;
        for v in data.iter_mut() {
            let x = *v;
            let y = b0 * x + z1;
            z1 = b1 * x - a1 * y + z2;
            z2 = b2 * x - a2 * y;
            *v = y;
        }
    }
}

/// Butterworth low-pass of order `n` via the bilinear transform with
/// frequency prewarping.
fn butterworth(n: u32, cutoff: f64, rate: f64) -> Vec<Section> {
    let k = (std::f64::consts::PI * cutoff / rate).tan();
    let mut sections = Vec::new();
    for i in 1..=n / 2 {
        let theta = std::f64::consts::PI * (2 * i - 1) as f64 / (2 * n) as f64;
        let q = 1.0 / (2.0 * theta.cos());
        let norm = 1.0 / (1.0 + k / q + k * k);
        let b0 = k * k * norm;
        sections.push(Section {
            b: [b0, 2.0 * b0, b0],
            a: [2.0 * (k * k - 1.0) * norm, (1.0 - k / q + k * k) * norm],
        });
    }
    if n % 2 == 1 {
        let norm = 1.0 / (1.0 + k);
        sections.push(Section {
            b: [k * norm, k * norm, 0.0],
            a: [(k - 1.0) * norm, 0.0],
        });
    }
    sections
}

/// Forward-backward filtering with odd reflection padding of `3 * order`
/// samples (shortened when the input is smaller).
pub fn filtfilt(samples: &[f64], rate: f64, spec: &FilterSpec) -> Result<Vec<f64>, SignalError> {
    spec.validate(rate)?;
    let n = samples.len();
    if n < spec.min_len().max(2) {
        return Err(SignalError::TooShort {
            len: n,
            min: spec.min_len().max(2),
        });
    }
    let pad = spec.min_len().min(n - 1);
    let (first, last) = (samples[0], samples[n - 1]);
    let mut data = Vec::with_capacity(n + 2 * pad);
    data.extend((1..=pad).rev().map(|i| 2.0 * first - samples[i]));
    data.extend_from_slice(samples);
    data.extend((1..=pad).map(|i| 2.0 * last - samples[n - 1 - i]));

    let sections = butterworth(spec.order / 2, spec.cutoff_hz, rate);
    for s in &sections {
        s.run(&mut data);
    }
    data.reverse();
    for s in &sections {
        s.run(&mut data);
    }
    data.reverse();
    Ok(data[pad..pad + n].to_vec())
}

/// Zero-phase low-pass of a stream; unit, id and length are preserved.
pub fn smooth(stream: &MetricStream, spec: &FilterSpec) -> Result<MetricStream, SignalError> {
    let samples = filtfilt(&stream.samples, stream.frame_rate, spec)?;
    Ok(MetricStream {
        samples,
        ..stream.clone()
    })
}

/// Central differences inside, second-order one-sided differences at the
/// ends (first-order when only two samples exist).
pub fn derivative(samples: &[f64], rate: f64) -> Result<Vec<f64>, SignalError> {
    let n = samples.len();
    if n < 2 {
        return Err(SignalError::TooShort { len: n, min: 2 });
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(SignalError::InvalidRate(rate));
    }
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (samples[i + 1] - samples[i - 1]) * rate / 2.0;
    }
    if n == 2 {
        let d = (samples[1] - samples[0]) * rate;
        out[0] = d;
        out[1] = d;
    } else {
        out[0] = (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) * rate / 2.0;
        out[n - 1] = (3.0 * samples[n - 1] - 4.0 * samples[n - 2] + samples[n - 3]) * rate / 2.0;
    }
    Ok(out)
}

/// Time derivative with the unit promoted (deg to deg/s, deg/s to deg/s^2).
pub fn differentiate(stream: &MetricStream) -> Result<MetricStream, SignalError> {
    let unit = stream
        .unit
        .derivative()
        .ok_or(SignalError::NotDifferentiable(stream.unit))?;
    Ok(MetricStream {
        measure: stream.measure.clone(),
        unit,
        frame_rate: stream.frame_rate,
        samples: derivative(&stream.samples, stream.frame_rate)?,
    })
}
