//! Gamma function and the generalized-Gaussian moment-ratio lookup.

use std::sync::OnceLock;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x) Γ(1-x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// `Γ(2/a)^2 / (Γ(1/a) Γ(3/a))`, increasing in `a`.
pub fn ggd_moment_ratio(shape: f64) -> f64 {
    (2.0 * ln_gamma(2.0 / shape) - ln_gamma(1.0 / shape) - ln_gamma(3.0 / shape)).exp()
}

pub const SHAPE_MIN: f64 = 0.2;
pub const SHAPE_MAX: f64 = 10.0;
pub const SHAPE_STEP: f64 = 0.001;

struct ShapeGrid {
    shapes: Vec<f64>,
    ratios: Vec<f64>,
}

fn grid() -> &'static ShapeGrid {
    static GRID: OnceLock<ShapeGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let n = ((SHAPE_MAX - SHAPE_MIN) / SHAPE_STEP).round() as usize + 1;
        let shapes: Vec<f64> = (0..n).map(|i| SHAPE_MIN + i as f64 * SHAPE_STEP).collect();
        let ratios = shapes.iter().map(|&s| ggd_moment_ratio(s)).collect();
        ShapeGrid { shapes, ratios }
    })
}

/// Grid shape whose moment ratio is nearest to `ratio`. Values beyond the
/// grid saturate at its ends.
pub fn invert_moment_ratio(ratio: f64) -> f64 {
    let g = grid();
    let i = g.ratios.partition_point(|&r| r < ratio);
    if i == 0 {
        return g.shapes[0];
    }
    if i == g.ratios.len() {
        return g.shapes[i - 1];
    }
    if (g.ratios[i] - ratio).abs() < (ratio - g.ratios[i - 1]).abs() {
        g.shapes[i]
    } else {
        g.shapes[i - 1]
    }
}
