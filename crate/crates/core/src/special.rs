//! Sine and cosine integrals.

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402;
const MAX_ITER: usize = 200;
/// Above this the continued fraction for E₁(ix) converges quickly.
const SERIES_LIMIT: f64 = 2.0;

/// Returns (Si(x), Ci(x)) for x > 0; Ci is −∞ at 0 and Si is odd.
pub fn sici(x: f64) -> (f64, f64) {
    let t = x.abs();
    if t == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    let (si, ci) = if t > SERIES_LIMIT {
        // Modified Lentz evaluation of E₁(it) = −Ci(t) + i(Si(t) − π/2).
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..MAX_ITER {
            let a = -(((i - 1) * (i - 1)) as f64);
            b += 2.0;
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + c.inv() * a;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm_sqr() < 1e-32 {
                break;
            }
        }
        h *= Complex64::new(t.cos(), -t.sin());
        (std::f64::consts::FRAC_PI_2 + h.im, -h.re)
    } else {
        let mut sum_s = 0.0;
        let mut sum_c = 0.0;
        let mut fact = 1.0;
        let mut sign = 1.0;
        for k in 1..MAX_ITER {
            fact *= t / k as f64;
            let term = fact / k as f64;
            if k % 2 == 1 {
                sum_s += sign * term;
            } else {
                sum_c -= sign * term;
                sign = -sign;
            }
            if term < f64::EPSILON * 1e-3 * (sum_s.abs() + sum_c.abs()).max(1e-300) {
                break;
            }
        }
        (sum_s, EULER_GAMMA + t.ln() + sum_c)
    };
    (si.copysign(x), ci)
}
