//! The generator `Ψ`: a real, odd, `p`-periodic function with `|Ψ| ≤ 1/2`.
//!
//! Only closed forms are represented: a finite sine series, an odd square wave, and
//! the zero function (which generates the geometric mean).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::validation::ValidationReport;

/// Harmonic cap for sine-series generators.
pub const MAX_HARMONICS: usize = 64;

/// Grid density used as the numerical proxy for `sup |Ψ|`.
pub const SUP_GRID_POINTS: usize = 4096;

const SUP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorForm {
    /// `Ψ(λ) = Σ_{n≥1} B_n sin(2πnλ/p)`; `coefficients[0]` is `B_1`.
    Fourier { coefficients: Vec<f64> },
    /// `+s` on `(0, p/2)`, `−s` on `(−p/2, 0)`, `0` at multiples of `p/2`.
    SquareWave { amplitude: f64 },
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    period: f64,
    form: GeneratorForm,
}

impl GeneratorSpec {
    /// Structural checks only (positive finite period, finite parameters). Use
    /// [`GeneratorSpec::validate`] for the admissibility bounds.
    pub fn new(period: f64, form: GeneratorForm) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGenerator(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        match &form {
            GeneratorForm::Fourier { coefficients } => {
                if let Some(b) = coefficients.iter().find(|b| !b.is_finite()) {
                    return Err(Error::InvalidGenerator(format!(
                        "non-finite Fourier coefficient {b}"
                    )));
                }
            }
            GeneratorForm::SquareWave { amplitude } if !amplitude.is_finite() => {
                return Err(Error::InvalidGenerator(format!(
                    "non-finite square-wave amplitude {amplitude}"
                )));
            }
            _ => {}
        }
        Ok(Self { period, form })
    }

    pub fn fourier(period: f64, coefficients: Vec<f64>) -> Result<Self> {
        Self::new(period, GeneratorForm::Fourier { coefficients })
    }

    pub fn square_wave(period: f64, amplitude: f64) -> Result<Self> {
        Self::new(period, GeneratorForm::SquareWave { amplitude })
    }

    pub fn zero(period: f64) -> Result<Self> {
        Self::new(period, GeneratorForm::Zero)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn form(&self) -> &GeneratorForm {
        &self.form
    }

    /// `a = 2π/p`, the angular frequency of the first harmonic.
    pub fn frequency(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// The type-`c` scalar `c = e^{p/2}` of the induced Molnár class.
    pub fn type_c(&self) -> f64 {
        (0.5 * self.period).exp()
    }

    pub fn coefficients(&self) -> &[f64] {
        match &self.form {
            GeneratorForm::Fourier { coefficients } => coefficients,
            _ => &[],
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.form {
            GeneratorForm::Zero => true,
            GeneratorForm::Fourier { coefficients } => coefficients.iter().all(|b| *b == 0.0),
            GeneratorForm::SquareWave { amplitude } => *amplitude == 0.0,
        }
    }

    /// Points in `λ` where `Ψ` may jump (multiples of `p/2`), as a spacing.
    pub fn jump_spacing(&self) -> Option<f64> {
        matches!(self.form, GeneratorForm::SquareWave { .. }).then_some(0.5 * self.period)
    }

    /// Lists every violated admissibility constraint. Empty means valid.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        match &self.form {
            GeneratorForm::Zero => {}
            GeneratorForm::SquareWave { amplitude } => {
                if amplitude.abs() > 0.5 {
                    report.push("amplitude_bound", None, amplitude.abs());
                }
            }
            GeneratorForm::Fourier { coefficients } => {
                if coefficients.len() > MAX_HARMONICS {
                    report.push("harmonic_cap", None, coefficients.len() as f64);
                }
                // Σ|B_n| ≤ 1/2 is sufficient; otherwise fall back to the grid.
                let l1: f64 = coefficients.iter().map(|b| b.abs()).sum();
                if l1 > 0.5 + SUP_SLACK {
                    let (sup, witness) = self.grid_sup();
                    if sup > 0.5 + SUP_SLACK {
                        report.push("sup_norm", Some(witness), sup);
                    }
                }
            }
        }
        report
    }

    /// `max |Ψ|` over `SUP_GRID_POINTS` equally spaced points of one period.
    pub fn grid_sup(&self) -> (f64, f64) {
        let h = self.period / SUP_GRID_POINTS as f64;
        (0..SUP_GRID_POINTS)
            .map(|i| {
                let lam = i as f64 * h;
                (self.eval(lam).abs(), lam)
            })
            .fold((0.0, 0.0), |best, cur| if cur.0 > best.0 { cur } else { best })
    }

    /// Reduces `λ` to `[−p/2, p/2]`; symmetric in sign so oddness survives exactly.
    fn reduce(&self, lambda: f64) -> f64 {
        lambda - self.period * (lambda / self.period).round()
    }

    /// `Ψ(λ)`.
    pub fn eval(&self, lambda: f64) -> f64 {
        match &self.form {
            GeneratorForm::Zero => 0.0,
            GeneratorForm::Fourier { coefficients } => {
                let r = self.reduce(lambda);
                let a = self.frequency();
                coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, b)| b * (a * (i + 1) as f64 * r).sin())
                    .sum()
            }
            GeneratorForm::SquareWave { amplitude } => {
                let r = self.reduce(lambda);
                let half = 0.5 * self.period;
                if r == 0.0 || r.abs() == half {
                    0.0
                } else {
                    amplitude * r.signum()
                }
            }
        }
    }

    /// `ψ(t) = Ψ(log t)` on the multiplicative half-line; `ψ(1/t) = −ψ(t)`.
    pub fn eval_multiplicative(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("t = {t} must be positive")));
        }
        Ok(self.eval(t.ln()))
    }
}

/// File schema for a generator:
///
/// ```toml
/// period = 6.283185307179586
/// form = "fourier"          # or "square_wave" / "zero"
/// coefficients = [0.5]      # fourier only
/// amplitude = 0.5           # square_wave only
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub period: f64,
    pub form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

impl GeneratorConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("generator file: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("generator config serializes")
    }

    pub fn into_spec(self) -> Result<GeneratorSpec> {
        let form = match self.form.as_str() {
            "fourier" => GeneratorForm::Fourier {
                coefficients: self
                    .coefficients
                    .ok_or_else(|| Error::Config("fourier form needs `coefficients`".into()))?,
            },
            "square_wave" => GeneratorForm::SquareWave {
                amplitude: self
                    .amplitude
                    .ok_or_else(|| Error::Config("square_wave form needs `amplitude`".into()))?,
            },
            "zero" => GeneratorForm::Zero,
            other => return Err(Error::Config(format!("unknown generator form `{other}`"))),
        };
        GeneratorSpec::new(self.period, form)
    }
}

impl From<&GeneratorSpec> for GeneratorConfig {
    fn from(spec: &GeneratorSpec) -> Self {
        let (form, coefficients, amplitude) = match &spec.form {
            GeneratorForm::Fourier { coefficients } => ("fourier", Some(coefficients.clone()), None),
            GeneratorForm::SquareWave { amplitude } => ("square_wave", None, Some(*amplitude)),
            GeneratorForm::Zero => ("zero", None, None),
        };
        Self {
            period: spec.period,
            form: form.to_string(),
            coefficients,
            amplitude,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_is_valid_and_vanishes() {
        let g = GeneratorSpec::zero(3.0).unwrap();
        assert!(g.validate().is_valid());
        assert_eq!(g.eval(1.234), 0.0);
    }

    #[test]
    fn half_sine_is_valid() {
        let g = GeneratorSpec::fourier(2.0 * PI, vec![0.5]).unwrap();
        assert!(g.validate().is_valid());
        assert!((g.grid_sup().0 - 0.5).abs() < 1e-15);
        assert!((g.eval(PI / 2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn oversized_sine_is_rejected_near_quarter_period() {
        let p = 2.0 * PI;
        let g = GeneratorSpec::fourier(p, vec![0.6]).unwrap();
        let report = g.validate();
        let v = report.find("sup_norm").expect("sup violation");
        assert!((v.magnitude - 0.6).abs() < 1e-12);
        let w = v.witness.unwrap();
        assert!((w - p / 4.0).abs() < 2.0 * p / SUP_GRID_POINTS as f64);
    }

    #[test]
    fn l1_above_half_but_sup_below_is_accepted() {
        // B_1 = 0.4, B_3 = 0.15: Σ|B| = 0.55 but the peak is lower.
        let g = GeneratorSpec::fourier(4.0, vec![0.4, 0.0, 0.15]).unwrap();
        let (sup, _) = g.grid_sup();
        assert!(sup < 0.5);
        assert!(g.validate().is_valid());
    }

    #[test]
    fn harmonic_cap_and_amplitude() {
        let g = GeneratorSpec::fourier(4.0, vec![0.0; MAX_HARMONICS + 1]).unwrap();
        assert!(g.validate().violates("harmonic_cap"));
        let g = GeneratorSpec::square_wave(4.0, -0.51).unwrap();
        assert!(g.validate().violates("amplitude_bound"));
    }

    #[test]
    fn structural_errors() {
        assert!(GeneratorSpec::zero(0.0).is_err());
        assert!(GeneratorSpec::zero(f64::NAN).is_err());
        assert!(GeneratorSpec::fourier(1.0, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn square_wave_values() {
        let g = GeneratorSpec::square_wave(20.0, 0.5).unwrap();
        assert_eq!(g.eval(5.0), 0.5);
        assert_eq!(g.eval(-5.0), -0.5);
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(10.0), 0.0);
        assert_eq!(g.eval(25.0), 0.5);
    }

    #[test]
    fn multiplicative_form() {
        let g = GeneratorSpec::square_wave(2.0, 0.5).unwrap();
        assert_eq!(g.eval_multiplicative(1.0).unwrap(), 0.0);
        assert_eq!(g.eval_multiplicative(0.5f64.exp()).unwrap(), 0.5);
        assert!(g.eval_multiplicative(0.0).is_err());
        assert!(g.eval_multiplicative(-1.0).is_err());
    }

    #[test]
    fn zero_mean_over_period() {
        let g = GeneratorSpec::fourier(3.0, vec![0.2, -0.1, 0.05]).unwrap();
        // composite Simpson over one period
        let n = 2000;
        let h = g.period() / n as f64;
        let mut s = g.eval(0.0) + g.eval(g.period());
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g.eval(i as f64 * h);
        }
        assert!((s * h / 3.0).abs() < 1e-10);
    }

    #[test]
    fn config_round_trip() {
        let text = "period = 4.0\nform = \"fourier\"\ncoefficients = [0.3, 0.1]\n";
        let spec = GeneratorConfig::from_toml_str(text).unwrap().into_spec().unwrap();
        assert_eq!(spec.coefficients(), &[0.3, 0.1]);
        let back = GeneratorConfig::from(&spec).to_toml_string();
        let again = GeneratorConfig::from_toml_str(&back).unwrap().into_spec().unwrap();
        assert_eq!(spec, again);
        assert!(GeneratorConfig::from_toml_str("period = 1.0\nform = \"fourier\"\n")
            .unwrap()
            .into_spec()
            .is_err());
        assert!(GeneratorConfig::from_toml_str("period = 1.0\nform = \"triangle\"\n")
            .unwrap()
            .into_spec()
            .is_err());
    }

    fn any_generator() -> impl Strategy<Value = GeneratorSpec> {
        let fourier = (0.5f64..30.0, prop::collection::vec(-0.2f64..0.2, 1..6))
            .prop_map(|(p, b)| GeneratorSpec::fourier(p, b).unwrap());
        let square = (0.5f64..30.0, -0.5f64..0.5)
            .prop_map(|(p, s)| GeneratorSpec::square_wave(p, s).unwrap());
        prop_oneof![fourier, square]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn odd(g in any_generator(), lam in -200.0f64..200.0) {
            prop_assert!((g.eval(-lam) + g.eval(lam)).abs() <= 1e-15);
        }

        #[test]
        fn periodic(g in any_generator(), lam in -50.0f64..50.0) {
            let lam = if matches!(g.form(), GeneratorForm::SquareWave { .. }) {
                // stay off the jump set, where the period shift can flip the side
                let half = 0.5 * g.period();
                let r = lam.rem_euclid(half);
                if r < 1e-9 || half - r < 1e-9 { lam + 0.25 * half } else { lam }
            } else { lam };
            prop_assert!((g.eval(lam + g.period()) - g.eval(lam)).abs() <= 1e-13);
        }

        #[test]
        fn multiplicative_antisymmetry(g in any_generator(), t in 1e-3f64..1e3) {
            let near_jump = g.jump_spacing().is_some_and(|h| {
                let r = t.ln().rem_euclid(h);
                r < 1e-9 || h - r < 1e-9
            });
            prop_assume!(!near_jump);
            let s = g.eval_multiplicative(t).unwrap() + g.eval_multiplicative(1.0 / t).unwrap();
            prop_assert!(s.abs() <= 1e-12, "sum {}", s);
        }

        #[test]
        fn validated_sup_is_bounded(g in any_generator()) {
            if g.validate().is_valid() {
                prop_assert!(g.grid_sup().0 <= 0.5 + 1e-12);
            }
        }
    }
}
