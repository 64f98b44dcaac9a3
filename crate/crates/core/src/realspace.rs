//! Confined standing waves in real space, in closed form and rebuilt from
//! plane waves.
//!
//! The momentum amplitude c_j(k) used throughout the crate is the Fourier
//! transform of −ψ_j for the standing wave ψ_j(x) = √(2/L)·sin(jπ/L·(x − L/2)).
//! [`psi_reconstruct`] applies that global phase back so both routes agree
//! pointwise.
//!
//! c_j(k) decays only like 1/k², so the inverse transform has a slowly
//! converging tail. Past the cutoff K the integrand is
//! j√(πL)·[cos((L/2 − x)k) ± cos((L/2 + x)k)]/(j²π² − k²L²). Its integral
//! over [K, ∞) is evaluated exactly with sine and cosine integrals.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::momentum::ConfinedState;
use crate::quadrature::{IntegrandParity, IntegrandSpec, QuadratureError, QuadratureResult};
use crate::special::sici;
use crate::units::{ConfigError, QuantumIndex, WellConfig};

/// Largest tolerated imaginary part of the reconstructed wavefunction.
pub const MAX_IMAG_RESIDUAL: f64 = 1e-9;
pub const DEFAULT_RECONSTRUCT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RealspaceError {
    #[error("{points} grid points cannot resolve level {j} (need at least {min})")]
    GridTooCoarse { j: u32, points: usize, min: usize },
    #[error("reconstructed wavefunction has imaginary part {0}")]
    ImaginaryResidual(f64),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl RealspaceError {
    pub fn name(&self) -> &'static str {
        match self {
            RealspaceError::GridTooCoarse { .. } => "GridTooCoarse",
            RealspaceError::ImaginaryResidual(_) => "ImaginaryResidual",
            RealspaceError::Config(e) => e.name(),
            RealspaceError::Quadrature(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefunctionSample {
    pub x: f64,
    pub value: f64,
    pub inside_well: bool,
}

fn closed_form(state: &ConfinedState, x: f64) -> WavefunctionSample {
    let l = state.length();
    let inside_well = x.abs() < 0.5 * l;
    let value = if inside_well {
        (2.0 / l).sqrt() * (f64::from(state.j()) * PI / l * (x - 0.5 * l)).sin()
    } else {
        0.0
    };
    WavefunctionSample {
        x,
        value,
        inside_well,
    }
}

/// ψ_j(x) = √(2/L)·sin(jπ/L·(x − L/2)) for |x| < L/2, zero elsewhere.
pub fn psi_closed(
    cfg: &WellConfig,
    j: &QuantumIndex,
    x: f64,
) -> Result<WavefunctionSample, ConfigError> {
    Ok(closed_form(&ConfinedState::from_config(cfg, j)?, x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub value: f64,
    pub error: f64,
    /// Numerically integrated imaginary part; zero up to rounding.
    pub imag_residual: f64,
    pub evaluations: usize,
}

/// ∫_K^∞ cos(ωk)/(a² − k²L²) dk for K·L > a > 0.
fn tail_integral(omega: f64, a: f64, length: f64, cutoff: f64) -> f64 {
    let kl = cutoff * length;
    let (u_minus, u_plus) = (kl - a, kl + a);
    let w = omega.abs() / length;
    if w == 0.0 {
        return -(u_plus / u_minus).ln() / (2.0 * a * length);
    }
    // ∫_K^∞ cos(ωk)/(kL − b) dk for b = ±a.
    let shifted = |b: f64, u0: f64| {
        let (si, ci) = sici(w * u0);
        (-(w * b).cos() * ci - (w * b).sin() * (FRAC_PI_2 - si)) / length
    };
    -(shifted(a, u_minus) - shifted(-a, u_plus)) / (2.0 * a)
}

/// Evaluates ψ_j(x) as ∫ c_j(k)·e^{ikx}/√(2π) dk.
pub fn psi_reconstruct(
    cfg: &WellConfig,
    j: &QuantumIndex,
    x: f64,
    tol: f64,
) -> Result<Reconstruction, RealspaceError> {
    let state = ConfinedState::from_config(cfg, j)?;
    reconstruct_state(&state, x, tol)
}

pub fn reconstruct_state(
    state: &ConfinedState,
    x: f64,
    tol: f64,
) -> Result<Reconstruction, RealspaceError> {
    let l = state.length();
    let jf = f64::from(state.j());
    let a = jf * PI;
    let cutoff = (10.0 * jf + 10.0) * PI / l;
    let half_period = PI / (0.5 * l + x.abs());
    let norm = 1.0 / (2.0 * PI).sqrt();

    let real_part = |k: f64| {
        let c = state.amplitude(k);
        c.re * (k * x).cos() - c.im * (k * x).sin()
    };
    let imag_part = |k: f64| {
        let c = state.amplitude(k);
        c.re * (k * x).sin() + c.im * (k * x).cos()
    };

    let body = crate::quadrature::integrate(
        &IntegrandSpec::even(real_part, half_period, cutoff, |_| 0.0),
        tol / norm,
    )?;
    let imag = crate::quadrature::integrate(
        &IntegrandSpec {
            parity: IntegrandParity::General,
            ..IntegrandSpec::even(imag_part, half_period, cutoff, |_| 0.0)
        },
        tol / norm,
    )?;

    let sigma = state.oscillation_sign();
    let pref = jf * (PI * l).sqrt();
    let t_minus = tail_integral(0.5 * l - x, a, l, cutoff);
    let t_plus = tail_integral(0.5 * l + x, a, l, cutoff);
    let tail = 2.0 * pref * (t_minus + sigma * t_plus);
    let tail_error = 1e-13 * 2.0 * pref * (t_minus.abs() + t_plus.abs());

    let result = QuadratureResult {
        value: body.value + tail,
        quad_error: body.quad_error,
        tail_error,
        evaluations: body.evaluations + imag.evaluations,
    };
    let imag_residual = norm * imag.value;
    if imag_residual.abs() > MAX_IMAG_RESIDUAL {
        return Err(RealspaceError::ImaginaryResidual(imag_residual));
    }
    Ok(Reconstruction {
        // Global phase −1, see the module docs.
        value: -norm * result.value,
        error: norm * result.total_error(),
        imag_residual,
        evaluations: result.evaluations,
    })
}

/// Number of sign changes of ψ_j strictly inside the well, sampled at
/// `grid_points` cell centres. Equals j − 1.
pub fn node_count(
    cfg: &WellConfig,
    j: &QuantumIndex,
    grid_points: usize,
) -> Result<usize, RealspaceError> {
    let state = ConfinedState::from_config(cfg, j)?;
    let min = 64 * state.j() as usize;
    if grid_points < min {
        return Err(RealspaceError::GridTooCoarse {
            j: state.j(),
            points: grid_points,
            min,
        });
    }
    let l = state.length();
    let mut last_sign = 0.0;
    let mut changes = 0;
    for i in 0..grid_points {
        let x = -0.5 * l + l * (i as f64 + 0.5) / grid_points as f64;
        let v = closed_form(&state, x).value;
        if v == 0.0 {
            continue;
        }
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            changes += 1;
        }
        last_sign = s;
    }
    Ok(changes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(l: f64) -> WellConfig {
        WellConfig::natural_1d(1.0, l).unwrap()
    }

    fn j(n: i64) -> QuantumIndex {
        QuantumIndex::single(n).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let s = psi_closed(&cfg(1.0), &j(1), 0.0).unwrap();
        assert!((s.value + std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(s.inside_well);
        assert!(psi_closed(&cfg(1.0), &j(2), 0.0).unwrap().value.abs() < 1e-15);
        let out = psi_closed(&cfg(1.0), &j(5), 0.7).unwrap();
        assert_eq!(out.value, 0.0);
        assert!(!out.inside_well);
        assert!(!psi_closed(&cfg(1.0), &j(1), 0.5).unwrap().inside_well);
    }

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = 0.5 * (f(a) + f(b));
        for i in 1..n {
            s += f(a + i as f64 * h);
        }
        s * h
    }

    #[test]
    fn normalization_and_orthogonality() {
        for l in [0.5, 1.0, 3.0] {
            let c = cfg(l);
            for n in 1..=10 {
                let norm = trapezoid(
                    |x| psi_closed(&c, &j(n), x).unwrap().value.powi(2),
                    -0.5 * l,
                    0.5 * l,
                    100_000,
                );
                assert!((norm - 1.0).abs() < 1e-8, "L={l} j={n}: {norm}");
            }
            for a in 1..=6 {
                for b in (a + 1)..=6 {
                    let overlap = trapezoid(
                        |x| {
                            psi_closed(&c, &j(a), x).unwrap().value
                                * psi_closed(&c, &j(b), x).unwrap().value
                        },
                        -0.5 * l,
                        0.5 * l,
                        100_000,
                    );
                    assert!(overlap.abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        // Direct quadrature out to a large cutoff plus the far tail in closed form.
        let (a, l) = (3.0 * PI, 1.0);
        for omega in [0.0, 1e-9, 0.3, 1.0, 1.5] {
            let k0 = 40.0 * PI;
            let k1 = 400.0 * PI;
            let f = |k: f64| (omega * k).cos() / (a * a - k * k * l * l);
            let n = 400_000;
            let h = (k1 - k0) / n as f64;
            let mut mid = 0.0;
            for i in 0..n {
                let x = k0 + (i as f64 + 0.5) * h;
                mid += f(x);
            }
            let direct = mid * h + tail_integral(omega, a, l, k1);
            let exact = tail_integral(omega, a, l, k0);
            assert!(
                (direct - exact).abs() < 1e-10,
                "omega={omega}: {direct} vs {exact}"
            );
        }
    }

    #[test]
    fn reconstruction_examples() {
        let c = cfg(1.0);
        let r = psi_reconstruct(&c, &j(1), 0.0, 1e-8).unwrap();
        assert!((r.value + std::f64::consts::SQRT_2).abs() < 1e-6, "{r:?}");
        assert!(r.imag_residual.abs() <= MAX_IMAG_RESIDUAL);
        let wall = psi_reconstruct(&c, &j(3), 0.5, 1e-8).unwrap();
        assert!(wall.value.abs() < 1e-6, "{wall:?}");
        let outside = psi_reconstruct(&c, &j(1), 0.75, 1e-8).unwrap();
        assert!(outside.value.abs() < 1e-6, "{outside:?}");
    }

    #[test]
    fn reconstruction_even_levels_and_other_lengths() {
        for (n, l) in [(2, 1.0), (4, 2.5), (3, 0.5)] {
            let c = cfg(l);
            for i in 0..=20 {
                let x = -l + 2.0 * l * f64::from(i) / 20.0;
                let r = psi_reconstruct(&c, &j(n), x, 1e-8).unwrap();
                let e = psi_closed(&c, &j(n), x).unwrap().value;
                assert!(
                    (r.value - e).abs() <= 1e-6 * (2.0 / l).sqrt(),
                    "j={n} L={l} x={x}: {} vs {e}",
                    r.value
                );
            }
        }
    }

    #[test]
    fn nodes() {
        let c = cfg(1.0);
        assert_eq!(node_count(&c, &j(1), 64).unwrap(), 0);
        assert_eq!(node_count(&c, &j(4), 256).unwrap(), 3);
        for n in 1..=12 {
            assert_eq!(
                node_count(&c, &j(n), 64 * n as usize).unwrap(),
                n as usize - 1
            );
        }
        assert!(matches!(
            node_count(&c, &j(2), 16),
            Err(RealspaceError::GridTooCoarse { .. })
        ));
    }
}
