//! Embedded 7-point Gauss / 15-point Kronrod rule and a globally adaptive
//! bisection driver on top of it.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae on [-1, 1]; odd indices are shared with the Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

pub(crate) const POINTS_PER_PANEL: usize = 15;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub error: f64,
    /// ∫|f| estimate, used for the round-off floor.
    pub abs_value: f64,
}

/// Non-finite sample encountered at the given abscissa.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NonFinite(pub f64);

pub(crate) fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, NonFinite> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(NonFinite(x))
        }
    };

    let fc = eval(centre)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = eval(centre - dx)?;
        let f2 = eval(centre + dx)?;
        kronrod += w * (f1 + f2);
        abs_sum += w * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    Ok(Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        abs_value: abs_sum * half.abs(),
    })
}

#[derive(Debug, Clone, Copy)]
struct Queued(Panel);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // Largest error first; ties broken by position so the order is total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .error
            .total_cmp(&other.0.error)
            .then_with(|| other.0.a.total_cmp(&self.0.a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Adaptive {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Neumaier summation; panel counts reach 10⁵ and more.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0_f64, 0.0_f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + carry
}

/// A panel is left alone once its error is at the round-off level of its own
/// contents or it cannot be split any further.
fn is_roundoff_limited(p: &Panel) -> bool {
    let width_floor = 64.0 * f64::EPSILON * p.a.abs().max(p.b.abs()).max(f64::MIN_POSITIVE);
    p.error <= 50.0 * f64::EPSILON * p.abs_value || (p.b - p.a) <= width_floor
}

/// Integrates `f` over `[a, b]`, starting from equal panels no wider than
/// `max_width`, bisecting the worst panel until the summed |K15 − G7|
/// estimates drop below `tol`.
pub(crate) fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    max_width: f64,
    tol: f64,
    max_evaluations: usize,
) -> Result<Adaptive, NonFinite> {
    if a == b {
        return Ok(Adaptive {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        });
    }
    let n0 = (((b - a) / max_width).ceil() as usize).max(1);
    let width = (b - a) / n0 as f64;

    let mut heap = BinaryHeap::with_capacity(n0);
    let mut settled: Vec<Panel> = Vec::new();
    let mut error_sum = 0.0;
    let mut evaluations = 0;
    for i in 0..n0 {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == n0 {
            b
        } else {
            a + (i + 1) as f64 * width
        };
        let p = gk15(f, lo, hi)?;
        evaluations += POINTS_PER_PANEL;
        error_sum += p.error;
        if is_roundoff_limited(&p) {
            settled.push(p);
        } else {
            heap.push(Queued(p));
        }
    }

    let mut refinements = 0usize;
    while error_sum > tol && evaluations + 2 * POINTS_PER_PANEL <= max_evaluations {
        let Some(Queued(worst)) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(f, worst.a, mid)?;
        let right = gk15(f, mid, worst.b)?;
        evaluations += 2 * POINTS_PER_PANEL;
        error_sum += left.error + right.error - worst.error;
        for p in [left, right] {
            if is_roundoff_limited(&p) {
                settled.push(p);
            } else {
                heap.push(Queued(p));
            }
        }
        refinements += 1;
        if refinements.is_multiple_of(1024) {
            error_sum = heap.iter().map(|q| q.0.error).sum::<f64>()
                + settled.iter().map(|p| p.error).sum::<f64>();
        }
    }

    let mut panels: Vec<Panel> = settled;
    panels.extend(heap.into_iter().map(|q| q.0));
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = compensated_sum(panels.iter().map(|p| p.value));
    let error: f64 = panels.iter().map(|p| p.error).sum();
    Ok(Adaptive {
        value,
        error,
        evaluations,
        converged: error <= tol,
    })
}
