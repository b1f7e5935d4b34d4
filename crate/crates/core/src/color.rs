//! RGB to LAB color feature domains.

use crate::model::Rgb;

/// Linear map from unit-range RGB to XYZ.
pub const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [2.7688, 1.7517, 1.1301],
    [1.0000, 4.5906, 0.0601],
    [0.0, 0.0565, 5.5942],
];

pub const DELTA: f64 = 6.0 / 29.0;

/// Piecewise LAB companding function: cube root above `DELTA^3`, linear
/// below.
pub fn f_lab(t: f64) -> f64 {
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorTransform {
    pub rgb_to_xyz: [[f64; 3]; 3],
    /// `(X_n, Y_n, Z_n)`.
    pub white: [f64; 3],
}

impl Default for ColorTransform {
    fn default() -> Self {
        let m = RGB_TO_XYZ;
        // white = M * (1, 1, 1)
        let white = [0, 1, 2].map(|r| m[r][0] + m[r][1] + m[r][2]);
        Self {
            rgb_to_xyz: m,
            white,
        }
    }
}

impl ColorTransform {
    pub fn lab(&self, rgb: Rgb) -> [f64; 3] {
        let c = rgb.map(|v| v as f64 / 255.0);
        let m = &self.rgb_to_xyz;
        let xyz = [0, 1, 2].map(|r| m[r][0] * c[0] + m[r][1] * c[1] + m[r][2] * c[2]);
        let fx = f_lab(xyz[0] / self.white[0]);
        let fy = f_lab(xyz[1] / self.white[1]);
        let fz = f_lab(xyz[2] / self.white[2]);
        [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
    }
}

/// Per-element L, A and B domains.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabDomains {
    pub l: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn rgb_to_lab(colors: &[Rgb]) -> LabDomains {
    let t = ColorTransform::default();
    let mut out = LabDomains {
        l: Vec::with_capacity(colors.len()),
        a: Vec::with_capacity(colors.len()),
        b: Vec::with_capacity(colors.len()),
    };
    for &c in colors {
        let [l, a, b] = t.lab(c);
        out.l.push(l);
        out.a.push(a);
        out.b.push(b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_and_black() {
        let t = ColorTransform::default();
        let w = t.lab([255, 255, 255]);
        assert_eq!(w, [100.0, 0.0, 0.0]);
        let k = t.lab([0, 0, 0]);
        assert!(k.iter().all(|v| v.abs() < 1e-12), "{k:?}");
    }

    #[test]
    fn mid_gray() {
        let [l, a, b] = ColorTransform::default().lab([128, 128, 128]);
        let want = 116.0 * (128.0f64 / 255.0).cbrt() - 16.0;
        assert!((l - want).abs() < 1e-12);
        assert!((l - 76.19).abs() < 0.01);
        assert!(a.abs() < 1e-9 && b.abs() < 1e-9);
    }

    #[test]
    fn f_values() {
        assert_eq!(f_lab(1.0), 1.0);
        assert!((f_lab(DELTA.powi(3)) - DELTA).abs() < 1e-15);
        assert!((f_lab(0.5) - 0.7937).abs() < 1e-4);
        assert!((f_lab(0.0) - 4.0 / 29.0).abs() < 1e-15);
    }

    #[test]
    fn lightness_increases_along_gray_axis() {
        let t = ColorTransform::default();
        let ls: Vec<f64> = (0..=255u8).map(|g| t.lab([g, g, g])[0]).collect();
        assert!(ls.windows(2).all(|w| w[1] > w[0]));
    }
}
