//! Momentum-space amplitude c_j(k) of a confined standing wave and its
//! probability density |c_j(k)|².
//!
//! The textbook expressions are 0/0 at |kL| = jπ. Close to that point both
//! are rewritten with v = (|kL| − jπ)/2 as
//!
//! ```text
//! c_j  ∝ j√(πL)·sinc(v)/(jπ + |kL|)
//! |c_j|² = j²πL·sinc²(v)/(jπ + |kL|)²
//! ```
//!
//! which is analytic there for both parities.

use std::f64::consts::PI;

use crate::units::{ConfigError, QuantumIndex, WellConfig};

/// Distance |kL − jπ| below which the sinc form is used.
const SINC_SWITCH: f64 = 0.5;
/// |v| below which sinc(v) uses its Taylor polynomial.
const SINC_TAYLOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MomentumError {
    #[error("truncation K·L = {kl} is below √2·jπ = {min}")]
    TruncationTooSmall { kl: f64, min: f64 },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl MomentumError {
    pub fn name(&self) -> &'static str {
        match self {
            MomentumError::TruncationTooSmall { .. } => "TruncationTooSmall",
            MomentumError::Config(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(j: u32) -> Self {
        if j % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// Value of c_j(k). Purely real for odd j, purely imaginary for even j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumAmplitude {
    pub re: f64,
    pub im: f64,
    pub parity: Parity,
}

impl MomentumAmplitude {
    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// |c_j(k)|², in units of length.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MomentumDensity(f64);

impl MomentumDensity {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// sin(v)/v with sinc(0) = 1.
pub fn sinc(v: f64) -> f64 {
    if v.abs() < SINC_TAYLOR {
        let v2 = v * v;
        1.0 - v2 / 6.0 + v2 * v2 / 120.0
    } else {
        v.sin() / v
    }
}

/// A confined state j in a one-dimensional well of length L, prepared for
/// repeated evaluation in k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfinedState {
    j: u32,
    length: f64,
    jpi: f64,
    parity: Parity,
}

impl ConfinedState {
    /// Panics if `j == 0` or `length` is not positive; use [`ConfinedState::from_config`]
    /// for validated input.
    pub fn new(j: u32, length: f64) -> Self {
        assert!(j >= 1, "quantum number must be >= 1");
        assert!(
            length > 0.0 && length.is_finite(),
            "length must be positive"
        );
        Self {
            j,
            length,
            jpi: f64::from(j) * PI,
            parity: Parity::of(j),
        }
    }

    pub fn from_config(cfg: &WellConfig, j: &QuantumIndex) -> Result<Self, ConfigError> {
        let length = cfg.length()?;
        Ok(Self::new(j.j()?, length))
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Wavenumber jπ/L of the removable singularity.
    pub fn singular_k(&self) -> f64 {
        self.jpi / self.length
    }

    fn jf(&self) -> f64 {
        f64::from(self.j)
    }

    /// (−1)^{(j−1)/2} for odd j, (−1)^{j/2} for even j.
    fn near_sign(&self) -> f64 {
        let half = match self.parity {
            Parity::Odd => (self.j - 1) / 2,
            Parity::Even => self.j / 2,
        };
        if half % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Magnitude-carrying part of c_j at u = |k|L ≥ 0: the real part for odd
    /// j, the imaginary part for even j.
    fn amplitude_half_line(&self, u: f64) -> f64 {
        let pref = self.jf() * (PI * self.length).sqrt();
        if (u - self.jpi).abs() < SINC_SWITCH {
            let v = 0.5 * (u - self.jpi);
            return pref * self.near_sign() * sinc(v) / (self.jpi + u);
        }
        let denom = (self.jpi - u) * (self.jpi + u);
        match self.parity {
            Parity::Odd => 2.0 * pref * (0.5 * u).cos() / denom,
            Parity::Even => -2.0 * pref * (0.5 * u).sin() / denom,
        }
    }

    pub fn amplitude(&self, k: f64) -> MomentumAmplitude {
        let u = k.abs() * self.length;
        let a = self.amplitude_half_line(u);
        match self.parity {
            Parity::Odd => MomentumAmplitude {
                re: a,
                im: 0.0,
                parity: Parity::Odd,
            },
            Parity::Even => MomentumAmplitude {
                re: 0.0,
                im: if k < 0.0 { -a } else { a },
                parity: Parity::Even,
            },
        }
    }

    pub fn density(&self, k: f64) -> MomentumDensity {
        MomentumDensity(self.density_value(k))
    }

    pub(crate) fn density_value(&self, k: f64) -> f64 {
        let u = k.abs() * self.length;
        let j2pil = self.jf() * self.jf() * PI * self.length;
        if (u - self.jpi).abs() < SINC_SWITCH {
            let s = sinc(0.5 * (u - self.jpi));
            let d = self.jpi + u;
            return j2pil * s * s / (d * d);
        }
        let trig = match self.parity {
            Parity::Odd => (0.5 * u).cos(),
            Parity::Even => (0.5 * u).sin(),
        };
        let denom = (self.jpi - u) * (self.jpi + u);
        4.0 * j2pil * trig * trig / (denom * denom)
    }

    /// Density value L/(4π) at |k| = jπ/L.
    pub fn singular_point_value(&self) -> f64 {
        self.length / (4.0 * PI)
    }

    /// Upper bound on ∫_{|k|>K} |c_j(k)|² dk, valid for K·L ≥ √2·jπ.
    pub fn tail_bound(&self, cutoff: f64) -> Result<f64, MomentumError> {
        let kl = cutoff * self.length;
        let min = std::f64::consts::SQRT_2 * self.jpi;
        if kl.is_nan() || kl < min {
            return Err(MomentumError::TruncationTooSmall { kl, min });
        }
        Ok(32.0 * self.jf() * self.jf() * PI / (3.0 * kl * kl * kl))
    }

    /// Smallest cutoff with `tail_bound(K) <= target`, never below the
    /// larger of √2·jπ/L and 10·jπ/L.
    pub fn truncation_for(&self, target: f64) -> f64 {
        let floor = 10.0 * self.jpi / self.length;
        // Nudged up so rounding in cbrt cannot leave the bound just above target.
        let needed = (32.0 * self.jf() * self.jf() * PI / (3.0 * target)).cbrt() / self.length
            * (1.0 + 1e-9);
        floor.max(needed)
    }

    /// Non-oscillating envelope A(k) = 2j²πL/(j²π² − k²L²)², so that
    /// |c_j(k)|² = A(k)·(1 + s·cos kL) with s = [`Self::oscillation_sign`].
    /// Singular at |k| = jπ/L; only meaningful away from it.
    pub fn envelope(&self, k: f64) -> f64 {
        let u = k.abs() * self.length;
        let denom = (self.jpi - u) * (self.jpi + u);
        2.0 * self.jf() * self.jf() * PI * self.length / (denom * denom)
    }

    pub fn oscillation_sign(&self) -> f64 {
        match self.parity {
            Parity::Odd => 1.0,
            Parity::Even => -1.0,
        }
    }
}

pub fn amplitude(
    cfg: &WellConfig,
    j: &QuantumIndex,
    k: f64,
) -> Result<MomentumAmplitude, ConfigError> {
    Ok(ConfinedState::from_config(cfg, j)?.amplitude(k))
}

pub fn density(cfg: &WellConfig, j: &QuantumIndex, k: f64) -> Result<MomentumDensity, ConfigError> {
    Ok(ConfinedState::from_config(cfg, j)?.density(k))
}

pub fn singular_point_value(cfg: &WellConfig, j: &QuantumIndex) -> Result<f64, ConfigError> {
    Ok(ConfinedState::from_config(cfg, j)?.singular_point_value())
}

pub fn tail_bound(cfg: &WellConfig, j: &QuantumIndex, cutoff: f64) -> Result<f64, MomentumError> {
    ConfinedState::from_config(cfg, j)?.tail_bound(cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// The amplitude written literally with complex exponentials; only valid
    /// away from the singular point.
    fn textbook_amplitude(j: u32, l: f64, k: f64) -> (f64, f64) {
        let jf = f64::from(j);
        let pref = jf * (PI * l).sqrt() / (jf * jf * PI * PI - k * k * l * l);
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        let half = 0.5 * k * l;
        // e^{-iθ} − (−1)^j e^{iθ}
        let re = half.cos() - sign * half.cos();
        let im = -half.sin() - sign * half.sin();
        (pref * re, pref * im)
    }

    #[test]
    fn amplitude_at_origin() {
        let s1 = ConfinedState::new(1, 1.0);
        let a = s1.amplitude(0.0);
        // 2√π/π², checked against a 40-digit evaluation.
        assert!((a.re - 0.359_174_244_250_333_1).abs() < 1e-15);
        assert_eq!(a.im, 0.0);
        let a2 = ConfinedState::new(2, 1.0).amplitude(0.0);
        assert_eq!(a2.re, 0.0);
        assert_eq!(a2.im, 0.0);
    }

    #[test]
    fn density_at_origin() {
        let d = ConfinedState::new(1, 1.0).density(0.0).value();
        assert!((d - 0.129_006_137_732_797_96).abs() < 1e-15);
    }

    #[test]
    fn density_limit_at_singular_point() {
        let s = ConfinedState::new(1, 1.0);
        let limit = 1.0 / (4.0 * PI);
        assert!((s.density(PI).value() - limit).abs() < 1e-16);
        assert!((s.amplitude(PI).norm_sqr() - limit).abs() < 1e-16);
        // Textbook formula approaching from both sides converges to the same value.
        for e in 4..=8 {
            let delta = 10f64.powi(-e);
            for k in [PI - delta, PI + delta] {
                let (re, im) = textbook_amplitude(1, 1.0, k);
                let textbook = re * re + im * im;
                assert!((textbook - limit).abs() < 2.0 * delta + 1e-7 * 10f64.powi(e - 4));
                assert!((s.density(k).value() - limit).abs() < delta);
            }
        }
    }

    #[test]
    fn singular_value_is_j_independent_and_linear_in_length() {
        assert_eq!(
            ConfinedState::new(1, 1.0).singular_point_value(),
            1.0 / (4.0 * PI)
        );
        assert_eq!(
            ConfinedState::new(7, 1.0).singular_point_value(),
            1.0 / (4.0 * PI)
        );
        assert_eq!(
            ConfinedState::new(1, 2.0).singular_point_value(),
            1.0 / (2.0 * PI)
        );
        for j in [7, 12] {
            let s = ConfinedState::new(j, 1.0);
            let k0 = s.singular_k();
            assert!((s.density(k0).value() / s.singular_point_value() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn density_is_even() {
        let s = ConfinedState::new(3, 1.0);
        assert_eq!(s.density(-5.0), s.density(5.0));
    }

    #[test]
    fn tail_bound_examples() {
        let s = ConfinedState::new(1, 1.0);
        let k = 10.0 * PI;
        let bound = s.tail_bound(k).unwrap();
        assert!((bound - 32.0 * PI / (3.0 * k.powi(3))).abs() < 1e-18);
        assert!((bound - 1.080_759_292_184_936e-3).abs() < 1e-15);
        assert!(matches!(
            s.tail_bound(PI),
            Err(MomentumError::TruncationTooSmall { .. })
        ));
        let mut last = bound;
        for n in 1..10 {
            let b = s.tail_bound(k * 2f64.powi(n)).unwrap();
            assert!(b < last);
            last = b;
        }
    }

    #[test]
    fn tail_bound_dominates_brute_force_tail() {
        // Trapezoid on [10π, 10⁴π] plus the analytic bound beyond 10⁴π.
        let s = ConfinedState::new(1, 1.0);
        let (a, b) = (10.0 * PI, 1e4 * PI);
        let n = 2_000_000;
        let h = (b - a) / n as f64;
        let mut sum = 0.5 * (s.density(a).value() + s.density(b).value());
        for i in 1..n {
            sum += s.density(a + i as f64 * h).value();
        }
        let tail = 2.0 * sum * h + s.tail_bound(b).unwrap();
        assert!((tail - 1.383_764_624_809_865e-4).abs() < 1e-9);
        assert!(tail <= s.tail_bound(a).unwrap());
    }

    #[test]
    fn zeros_of_the_density() {
        for j in [1u32, 3, 5] {
            let s = ConfinedState::new(j, 1.0);
            for n in -6i32..6 {
                let m = 2 * n + 1;
                if m.unsigned_abs() != j {
                    assert!(s.density(f64::from(m) * PI).value() < 1e-30);
                }
            }
        }
        for j in [2u32, 4, 6] {
            let s = ConfinedState::new(j, 1.0);
            for n in -6i32..6 {
                let m = 2 * n;
                if m != 0 && m.unsigned_abs() != j {
                    assert!(s.density(f64::from(m) * PI).value() < 1e-30);
                }
            }
        }
    }

    #[test]
    fn envelope_decomposition() {
        for j in [1u32, 2, 5, 8] {
            let s = ConfinedState::new(j, 1.3);
            for &k in &[0.1, 2.0, 40.0, 300.0] {
                let d = s.envelope(k) * (1.0 + s.oscillation_sign() * (k * 1.3).cos());
                assert!((d / s.density(k).value() - 1.0).abs() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn amplitude_matches_textbook_away_from_singularity(j in 1u32..=10, k in -60.0f64..60.0, l in 0.3f64..3.0) {
            let s = ConfinedState::new(j, l);
            prop_assume!((k.abs() * l - f64::from(j) * PI).abs() > 0.5);
            let (re, im) = textbook_amplitude(j, l, k);
            let a = s.amplitude(k);
            let scale = re.abs().max(im.abs()).max(1e-300);
            prop_assert!((a.re - re).abs() <= 1e-12 * scale + 1e-300);
            prop_assert!((a.im - im).abs() <= 1e-12 * scale + 1e-300);
        }

        #[test]
        fn conjugate_parity_symmetry(j in 1u32..=10, k in -80.0f64..80.0) {
            let s = ConfinedState::new(j, 1.0);
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            let a = s.amplitude(k);
            let b = s.amplitude(-k);
            prop_assert_eq!(b.re, sign * a.re);
            prop_assert_eq!(b.im, sign * a.im);
        }

        #[test]
        fn density_is_squared_amplitude(j in 1u32..=10, k in -80.0f64..80.0, near in any::<bool>(), off in -1e-6f64..1e-6) {
            let s = ConfinedState::new(j, 1.0);
            let k = if near { s.singular_k().copysign(k) + off } else { k };
            let d = s.density(k).value();
            let a2 = s.amplitude(k).norm_sqr();
            prop_assert!(d >= 0.0);
            prop_assert!((d - a2).abs() <= 1e-12 * d.max(1e-290));
        }

        #[test]
        fn density_continuous_at_singular_point(j in 1u32..=20, l in 0.2f64..5.0) {
            let s = ConfinedState::new(j, l);
            let k0 = s.singular_k();
            let limit = s.singular_point_value();
            for k in [k0 - 1e-8, k0 + 1e-8, -k0 - 1e-8, -k0 + 1e-8] {
                let d = s.density(k).value();
                prop_assert!(d.is_finite());
                prop_assert!((d - limit).abs() <= 1e-6 * limit);
            }
        }
    }
}
