//! Physical parameters of a pipeline section and the formulas shared by
//! every solver: friction linearization, the steady pressure profile,
//! modal decay rates and the isothermal gas-state relations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed mismatch between the stated outlet pressure and the one implied
/// by the steady gradient, in pascal.
pub const STEADY_CONSISTENCY_PA: f64 = 1.0;

/// Geometry and operating point of a single pipeline section.
///
/// Mass fluxes are carried in Pa·s/m so that `2a·G` is a pressure gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineSpec {
    length: f64,
    diameter: f64,
    two_a: f64,
    sound_speed: f64,
    inlet_pressure: f64,
    outlet_pressure: f64,
    base_flux: f64,
}

impl PipelineSpec {
    /// Builds and validates a pipeline. When `base_flux` is `None` it is
    /// derived from the boundary pressures; otherwise the given value must
    /// close the steady profile to within [`STEADY_CONSISTENCY_PA`].
    pub fn new(
        length: f64,
        diameter: f64,
        two_a: f64,
        sound_speed: f64,
        inlet_pressure: f64,
        outlet_pressure: f64,
        base_flux: Option<f64>,
    ) -> Result<Self> {
        let positive = [
            ("length", length),
            ("diameter", diameter),
            ("linearization_2a", two_a),
            ("sound_speed", sound_speed),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(outlet_pressure.is_finite() && outlet_pressure > 0.0) {
            return Err(Error::config(format!(
                "outlet_pressure must be positive, got {outlet_pressure}"
            )));
        }
        if !(inlet_pressure.is_finite() && inlet_pressure > outlet_pressure) {
            return Err(Error::config(format!(
                "inlet_pressure {inlet_pressure} must exceed outlet_pressure {outlet_pressure}"
            )));
        }
        let base_flux = match base_flux {
            Some(g0) => {
                let implied = inlet_pressure - two_a * g0 * length;
                if (implied - outlet_pressure).abs() > STEADY_CONSISTENCY_PA {
                    return Err(Error::config(format!(
                        "inconsistent steady state: P1 - 2a*G0*L = {implied} Pa but P2 = {outlet_pressure} Pa"
                    )));
                }
                g0
            }
            None => derived_base_flux(inlet_pressure, outlet_pressure, two_a, length)?,
        };
        Ok(Self {
            length,
            diameter,
            two_a,
            sound_speed,
            inlet_pressure,
            outlet_pressure,
            base_flux,
        })
    }

    /// The 100 km reference line: P1 = 55e4 Pa, P2 = 25e4 Pa, 2a = 0.1 1/s,
    /// c = 383.3 m/s, d = 0.7 m, G0 = 30 Pa·s/m.
    pub fn paper_ref() -> Self {
        Self::new(1.0e5, 0.7, 0.1, 383.3, 55.0e4, 25.0e4, Some(30.0))
            .expect("reference preset is consistent")
    }

    /// Resolves a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper-ref" => Ok(Self::paper_ref()),
            other => Err(Error::config(format!("unknown preset `{other}`"))),
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Linearization coefficient 2a, 1/s.
    pub fn two_a(&self) -> f64 {
        self.two_a
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn inlet_pressure(&self) -> f64 {
        self.inlet_pressure
    }

    pub fn outlet_pressure(&self) -> f64 {
        self.outlet_pressure
    }

    pub fn base_flux(&self) -> f64 {
        self.base_flux
    }

    /// Pressure diffusivity c²/(2a), m²/s.
    pub fn diffusivity(&self) -> f64 {
        self.sound_speed * self.sound_speed / self.two_a
    }

    /// Fundamental modal rate α₃ = π²c²/(2a·L²).
    pub fn alpha3(&self) -> f64 {
        PI * PI * self.diffusivity() / (self.length * self.length)
    }

    /// Steady pressure gradient magnitude 2a·G0, Pa/m.
    pub fn steady_gradient(&self) -> f64 {
        self.two_a * self.base_flux
    }

    pub fn contains(&self, x: f64) -> bool {
        (0.0..=self.length).contains(&x)
    }

    pub(crate) fn check_x(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "x = {x} m outside pipeline [0, {}]",
                self.length
            )))
        }
    }

    /// Pre-leak pressure P1 − 2a·G0·x.
    pub fn steady_profile(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.inlet_pressure - self.steady_gradient() * x)
    }

    /// Decay rate of cosine mode `n`; see [`decay_rate`].
    pub fn decay_rate(&self, n: u64, parity: Parity) -> Result<f64> {
        decay_rate(self, n, parity)
    }
}

/// A single point leak switched on at `onset` and held constant afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakScenario {
    /// Distance from the inlet, m.
    pub position: f64,
    /// Leak mass flux G_ut, Pa·s/m. Zero means no leak.
    pub flux: f64,
    /// Onset time, s.
    #[serde(default)]
    pub onset: f64,
}

impl LeakScenario {
    pub fn new(spec: &PipelineSpec, position: f64, flux: f64, onset: f64) -> Result<Self> {
        let leak = Self {
            position,
            flux,
            onset,
        };
        leak.validate(spec)?;
        Ok(leak)
    }

    pub fn validate(&self, spec: &PipelineSpec) -> Result<()> {
        if !(self.position > 0.0 && self.position < spec.length()) {
            return Err(Error::domain(format!(
                "leak position {} m must lie strictly inside (0, {})",
                self.position,
                spec.length()
            )));
        }
        if !(self.flux.is_finite() && self.flux >= 0.0) {
            return Err(Error::domain(format!("leak flux must be >= 0, got {}", self.flux)));
        }
        if !(self.onset.is_finite() && self.onset >= 0.0) {
            return Err(Error::domain(format!("leak onset must be >= 0, got {}", self.onset)));
        }
        Ok(())
    }

    /// Time since onset, clamped at zero.
    pub fn elapsed(&self, t: f64) -> f64 {
        (t - self.onset).max(0.0)
    }
}

/// Selects which mode sequence a decay rate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Mode number n itself: rate n²·α₃.
    Plain,
    /// Odd mode 2n−1: rate (2n−1)²·α₃.
    OddIndexed,
}

pub fn decay_rate(spec: &PipelineSpec, n: u64, parity: Parity) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("mode index must be at least 1"));
    }
    let m = match parity {
        Parity::Plain => n as f64,
        Parity::OddIndexed => (2 * n - 1) as f64,
    };
    Ok(m * m * spec.alpha3())
}

/// Chernov linearization 2a = λV/(2d).
///
/// A zero friction factor or velocity is accepted and gives the
/// frictionless limit 0.
pub fn linearization_coefficient(friction: f64, velocity: f64, diameter: f64) -> Result<f64> {
    if !(friction.is_finite() && friction >= 0.0) {
        return Err(Error::domain(format!("friction factor must be >= 0, got {friction}")));
    }
    if !(velocity.is_finite() && velocity >= 0.0) {
        return Err(Error::domain(format!("velocity must be >= 0, got {velocity}")));
    }
    if !(diameter.is_finite() && diameter > 0.0) {
        return Err(Error::domain(format!("diameter must be positive, got {diameter}")));
    }
    Ok(friction * velocity / (2.0 * diameter))
}

/// Steady mass flux (P1 − P2)/(2a·L) that closes the linear profile.
pub fn derived_base_flux(p1: f64, p2: f64, two_a: f64, length: f64) -> Result<f64> {
    if !(two_a > 0.0 && length > 0.0) {
        return Err(Error::domain("2a and L must be positive"));
    }
    if !(p1 >= p2 && p2 > 0.0) {
        return Err(Error::domain(format!("need P1 >= P2 > 0, got P1 = {p1}, P2 = {p2}")));
    }
    Ok((p1 - p2) / (two_a * length))
}

/// Isothermal sound speed √(zRT).
pub fn sound_speed_isothermal(z: f64, gas_constant: f64, temperature: f64) -> Result<f64> {
    for (name, v) in [("z", z), ("R", gas_constant), ("T", temperature)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok((z * gas_constant * temperature).sqrt())
}

/// Relative tolerance of the state relation P = ρzRT.
pub const STATE_RELATION_RTOL: f64 = 1e-6;

/// Thermodynamic and kinematic state of the transported gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasState {
    pub temperature: f64,
    pub compressibility: f64,
    pub gas_constant: f64,
    pub density: f64,
    pub velocity: f64,
    pub friction: f64,
}

impl GasState {
    pub fn new(
        temperature: f64,
        compressibility: f64,
        gas_constant: f64,
        density: f64,
        velocity: f64,
        friction: f64,
    ) -> Result<Self> {
        let state = Self {
            temperature,
            compressibility,
            gas_constant,
            density,
            velocity,
            friction,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("temperature", self.temperature),
            ("compressibility", self.compressibility),
            ("gas_constant", self.gas_constant),
            ("density", self.density),
            ("velocity", self.velocity),
            ("friction", self.friction),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// ρzRT.
    pub fn pressure(&self) -> f64 {
        self.density * self.compressibility * self.gas_constant * self.temperature
    }

    /// Checks a measured pressure against the state relation.
    pub fn check_pressure(&self, pressure: f64) -> Result<()> {
        let rel = (pressure - self.pressure()).abs() / pressure;
        if rel <= STATE_RELATION_RTOL {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "P = {pressure} Pa violates P = rho*z*R*T = {} Pa (relative error {rel:.2e})",
                self.pressure()
            )))
        }
    }

    pub fn sound_speed(&self) -> f64 {
        (self.compressibility * self.gas_constant * self.temperature).sqrt()
    }

    /// Mass flux ρV expressed in Pa·s/m via P = ρc².
    pub fn mass_flux(&self) -> f64 {
        self.density * self.velocity
    }

    pub fn linearization(&self, diameter: f64) -> Result<f64> {
        linearization_coefficient(self.friction, self.velocity, diameter)
    }
}
