//! Convolution reverb with synthetic exponentially decaying noise responses.

use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// T60 in seconds per unit of room size.
pub const T60_PER_ROOM: f64 = 1.2;
/// Impulse response length in seconds per unit of room size.
pub const IR_SECONDS_PER_ROOM: f64 = 1.0;
pub const WET_MIX: f64 = 0.3;

/// White noise shaped by a 60 dB-per-T60 exponential envelope, unit energy.
pub fn synth_impulse_response<R: Rng + ?Sized>(room_size: f64, sample_rate: u32, rng: &mut R) -> Vec<f64> {
    let fs = sample_rate as f64;
    let len = ((room_size * IR_SECONDS_PER_ROOM * fs).round() as usize).max(1);
    let t60 = room_size * T60_PER_ROOM;
    // amplitude falls by 10^(-60/20) over t60
    let rate = 1000f64.ln() / t60;
    let mut ir: Vec<f64> = (0..len)
        .map(|n| rng.gen_range(-1.0..=1.0) * (-rate * n as f64 / fs).exp())
        .collect();
    let energy = ir.iter().map(|x| x * x).sum::<f64>().sqrt();
    if energy > 0.0 {
        ir.iter_mut().for_each(|x| *x /= energy);
    }
    ir
}

/// Linear convolution by FFT overlap-add; output has `signal + kernel - 1` samples.
pub fn fft_convolve(signal: &[f64], kernel: &[f64]) -> Vec<f64> {
    if signal.is_empty() || kernel.is_empty() {
        return Vec::new();
    }
    let out_len = signal.len() + kernel.len() - 1;
    let block = kernel.len().next_power_of_two().max(256);
    let fft_len = (block + kernel.len() - 1).next_power_of_two();

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(fft_len);
    let inverse = planner.plan_fft_inverse(fft_len);

    let mut kernel_spec: Vec<Complex64> = kernel.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    kernel_spec.resize(fft_len, Complex64::default());
    forward.process(&mut kernel_spec);

    let scale = 1.0 / fft_len as f64;
    let mut out = vec![0.0; out_len];
    let mut buf = vec![Complex64::default(); fft_len];
    for (b, chunk) in signal.chunks(block).enumerate() {
        buf.iter_mut().for_each(|c| *c = Complex64::default());
        for (c, &x) in buf.iter_mut().zip(chunk) {
            c.re = x;
        }
        forward.process(&mut buf);
        for (c, k) in buf.iter_mut().zip(&kernel_spec) {
            *c *= k;
        }
        inverse.process(&mut buf);
        let start = b * block;
        let valid = (chunk.len() + kernel.len() - 1).min(out_len - start);
        for (o, c) in out[start..start + valid].iter_mut().zip(&buf) {
            *o += c.re * scale;
        }
    }
    out
}

/// `(1 - w) dry + w (dry * ir)`, extended by the response length minus one.
pub fn apply_reverb(samples: &[f64], ir: &[f64], wet: f64) -> Vec<f64> {
    let mut out = fft_convolve(samples, ir);
    if out.is_empty() {
        return samples.to_vec();
    }
    for (i, o) in out.iter_mut().enumerate() {
        let dry = samples.get(i).copied().unwrap_or(0.0);
        *o = (1.0 - wet) * dry + wet * *o;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn direct(signal: &[f64], kernel: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; signal.len() + kernel.len() - 1];
        for (i, &x) in signal.iter().enumerate() {
            for (j, &h) in kernel.iter().enumerate() {
                out[i + j] += x * h;
            }
        }
        out
    }

    #[test]
    fn small_cases_match_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, m) in [(1, 1), (3, 5), (700, 13), (1000, 4000), (5000, 300)] {
            let s: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let k: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = fft_convolve(&s, &k);
            let b = direct(&s, &k);
            assert_eq!(a.len(), b.len());
            let err = a.iter().zip(&b).fold(0.0f64, |e, (x, y)| e.max((x - y).abs()));
            assert!(err < 1e-9, "{n}x{m}: {err}");
        }
    }

    #[test]
    fn impulse_response_shape() {
        let ir = synth_impulse_response(0.5, 16_000, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(ir.len(), 8_000);
        let energy: f64 = ir.iter().map(|x| x * x).sum();
        assert!((energy - 1.0).abs() < 1e-12);
    }
}
