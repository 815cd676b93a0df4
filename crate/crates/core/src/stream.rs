//! Synthetic two-sensor telemetry and JSON-lines stream I/O.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::detect::{DetectionEvent, Location, SensorSample};
use crate::error::{Error, Result};
use crate::model::{LeakScenario, PipelineSpec};
use crate::series::{pressure_closed_form, SeriesControl};

/// Parameters of [`generate_stream`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamParams {
    /// Pa.
    pub noise_sigma: f64,
    /// Rounding step, Pa; 0 disables rounding.
    pub quantize: f64,
    /// s.
    pub cadence: f64,
    /// s.
    pub duration: f64,
    pub seed: u64,
}

impl Default for StreamParams {
    fn default() -> Self {
        Self {
            noise_sigma: 0.0,
            quantize: 0.0,
            cadence: 10.0,
            duration: 900.0,
            seed: 0,
        }
    }
}

/// Samples the closed form at x = 0 and x = L on the cadence grid
/// t = 0, cadence, 2·cadence, … ≤ duration, inlet before outlet at each time.
pub fn generate_stream(
    spec: &PipelineSpec,
    leak: &LeakScenario,
    params: &StreamParams,
    ctrl: &SeriesControl,
) -> Result<Vec<SensorSample>> {
    let StreamParams {
        noise_sigma,
        quantize,
        cadence,
        duration,
        seed,
    } = *params;
    if !(cadence.is_finite() && cadence > 0.0) {
        return Err(Error::domain("cadence must be positive"));
    }
    if !(duration.is_finite() && duration >= cadence) {
        return Err(Error::domain("duration must be at least one cadence"));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::domain("noise sigma must be >= 0"));
    }
    if !(quantize.is_finite() && quantize >= 0.0) {
        return Err(Error::domain("quantize step must be >= 0"));
    }
    leak.validate(spec)?;
    let normal = Normal::new(0.0, noise_sigma).map_err(|e| Error::domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (duration / cadence + 1e-9).floor() as u64;
    let mut out = Vec::with_capacity(2 * (steps as usize + 1));
    for k in 0..=steps {
        let t = k as f64 * cadence;
        for (location, x) in [(Location::Inlet, 0.0), (Location::Outlet, spec.length())] {
            let mut p = pressure_closed_form(spec, leak, x, t, ctrl)?;
            if noise_sigma > 0.0 {
                p += normal.sample(&mut rng);
            }
            if quantize > 0.0 {
                p = (p / quantize).round() * quantize;
            }
            if p <= 0.0 {
                return Err(Error::domain(format!(
                    "synthetic pressure {p} Pa at t = {t} s is not positive"
                )));
            }
            out.push(SensorSample {
                time: t,
                location,
                pressure: p,
            });
        }
    }
    Ok(out)
}

/// Parses one sample per non-blank line.
pub fn read_samples(text: &str) -> Result<Vec<SensorSample>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let s: SensorSample = serde_json::from_str(line)
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            s.validate()
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            Ok(s)
        })
        .collect()
}

pub fn write_samples(samples: &[SensorSample]) -> String {
    samples
        .iter()
        .map(|s| serde_json::to_string(s).expect("sample serializes") + "\n")
        .collect()
}

pub fn write_events(events: &[DetectionEvent]) -> String {
    events.iter().map(|e| e.to_json() + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_leak(spec: &PipelineSpec) -> LeakScenario {
        LeakScenario::new(spec, 5.0e3, 30.0, 0.0).unwrap()
    }

    #[test]
    fn quantized_sample_matches_table_cell() {
        let spec = PipelineSpec::paper_ref();
        let params = StreamParams {
            quantize: 100.0,
            cadence: 100.0,
            duration: 900.0,
            ..StreamParams::default()
        };
        let s = generate_stream(&spec, &table1_leak(&spec), &params, &SeriesControl::default()).unwrap();
        assert_eq!(s.len(), 20);
        let at300 = s
            .iter()
            .find(|s| s.time == 300.0 && s.location == Location::Inlet)
            .unwrap();
        // reference value 49.30·10⁴ Pa; the model rounds to 49.29·10⁴
        assert_eq!(at300.pressure % 100.0, 0.0);
        assert!((at300.pressure - 49.30e4).abs() <= 300.0, "{}", at300.pressure);
    }

    #[test]
    fn exact_when_noise_and_quantize_off() {
        let spec = PipelineSpec::paper_ref();
        let leak = table1_leak(&spec);
        let ctrl = SeriesControl::default();
        let s = generate_stream(&spec, &leak, &StreamParams::default(), &ctrl).unwrap();
        for sample in s.iter().step_by(7) {
            let x = if sample.location == Location::Inlet { 0.0 } else { spec.length() };
            assert_eq!(sample.pressure, pressure_closed_form(&spec, &leak, x, sample.time, &ctrl).unwrap());
        }
    }

    #[test]
    fn seeded_noise_is_deterministic() {
        let spec = PipelineSpec::paper_ref();
        let params = StreamParams {
            noise_sigma: 50.0,
            seed: 7,
            ..StreamParams::default()
        };
        let ctrl = SeriesControl::default();
        let a = generate_stream(&spec, &table1_leak(&spec), &params, &ctrl).unwrap();
        let b = generate_stream(&spec, &table1_leak(&spec), &params, &ctrl).unwrap();
        assert_eq!(a, b);
        let c = generate_stream(&spec, &table1_leak(&spec), &StreamParams { seed: 8, ..params }, &ctrl).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn jsonl_round_trip() {
        let spec = PipelineSpec::paper_ref();
        let params = StreamParams {
            noise_sigma: 10.0,
            duration: 50.0,
            ..StreamParams::default()
        };
        let s = generate_stream(&spec, &table1_leak(&spec), &params, &SeriesControl::default()).unwrap();
        let text = write_samples(&s);
        assert_eq!(read_samples(&text).unwrap(), s);
        assert!(read_samples("{\"t\":0,\"loc\":\"inlet\",\"p\":-1}\n").is_err());
        assert!(read_samples("not json\n").is_err());
    }

    #[test]
    fn bad_parameters_rejected() {
        let spec = PipelineSpec::paper_ref();
        let leak = table1_leak(&spec);
        let ctrl = SeriesControl::default();
        for params in [
            StreamParams { cadence: 0.0, ..StreamParams::default() },
            StreamParams { duration: 5.0, ..StreamParams::default() },
            StreamParams { noise_sigma: -1.0, ..StreamParams::default() },
        ] {
            assert!(generate_stream(&spec, &leak, &params, &ctrl).is_err());
        }
    }
}
