//! Filters used inside and around the string loop.
//!
//! Each filter exposes `process` for sample-by-sample use and `response` for
//! evaluating its transfer function on the unit circle.

use rustfft::num_complex::Complex64;

fn z_inv(omega: f64) -> Complex64 {
    Complex64::from_polar(1.0, -omega)
}

/// One-pole lowpass `(1 - a) / (1 - a z^-1)`, unity gain at DC.
#[derive(Debug, Clone, Copy, Default)]
pub struct OnePoleLowpass {
    pole: f64,
    state: f64,
}

impl OnePoleLowpass {
    pub fn new(pole: f64) -> Self {
        OnePoleLowpass { pole, state: 0.0 }
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        self.state = (1.0 - self.pole) * x + self.pole * self.state;
        self.state
    }

    pub fn response(&self, omega: f64) -> Complex64 {
        Complex64::new(1.0 - self.pole, 0.0) / (1.0 - self.pole * z_inv(omega))
    }
}

/// Pick-position comb `1 - z^-M` applied to a finite excitation.
/// Output is `M` samples longer than the input.
pub fn comb(input: &[f64], delay: usize) -> Vec<f64> {
    let mut out = vec![0.0; input.len() + delay];
    for (i, &x) in input.iter().enumerate() {
        out[i] += x;
        out[i + delay] -= x;
    }
    out
}

pub fn comb_response(delay: usize, omega: f64) -> Complex64 {
    1.0 - z_inv(omega * delay as f64)
}

/// Two-tap string damping `g ((1 - S) + S z^-1)`.
///
/// Magnitude never exceeds `g` for `S` in [0, 1]; phase delay at DC is `S`.
#[derive(Debug, Clone, Copy)]
pub struct DampingFilter {
    gain: f64,
    stretch: f64,
    prev: f64,
}

impl DampingFilter {
    pub fn new(gain: f64, stretch: f64) -> Self {
        DampingFilter { gain, stretch, prev: 0.0 }
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.gain * ((1.0 - self.stretch) * x + self.stretch * self.prev);
        self.prev = x;
        y
    }

    pub fn response(&self, omega: f64) -> Complex64 {
        self.gain * ((1.0 - self.stretch) + self.stretch * z_inv(omega))
    }
}

/// First-order allpass `(c + z^-1) / (1 + c z^-1)`.
///
/// Used for both tuning and stiffness. Its DC phase delay is `(1 - c) / (1 + c)`.
#[derive(Debug, Clone, Copy)]
pub struct FirstOrderAllpass {
    coeff: f64,
    x1: f64,
    y1: f64,
}

impl FirstOrderAllpass {
    pub fn new(coeff: f64) -> Self {
        FirstOrderAllpass { coeff, x1: 0.0, y1: 0.0 }
    }

    /// Coefficient giving a DC phase delay of `delay` samples.
    pub fn coeff_for_delay(delay: f64) -> f64 {
        (1.0 - delay) / (1.0 + delay)
    }

    pub fn dc_delay(coeff: f64) -> f64 {
        (1.0 - coeff) / (1.0 + coeff)
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.coeff * x + self.x1 - self.coeff * self.y1;
        self.x1 = x;
        self.y1 = y;
        y
    }

    pub fn response(&self, omega: f64) -> Complex64 {
        let zi = z_inv(omega);
        (self.coeff + zi) / (1.0 + self.coeff * zi)
    }
}
