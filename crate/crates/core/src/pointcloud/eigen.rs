//! Neighborhood covariance and its eigenvalues.

/// Eigenvalues of a 3x3 symmetric positive semi-definite matrix, sorted
/// descending and clamped to be nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl EigenTriple {
    /// Sorts the values descending and clamps tiny negatives to zero.
    pub fn new(mut values: [f64; 3]) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        let [l1, l2, l3] = values.map(|v| v.max(0.0));
        Self { l1, l2, l3 }
    }

    pub fn sum(&self) -> f64 {
        self.l1 + self.l2 + self.l3
    }
}

/// Symmetric 3x3 matrix stored as its upper triangle:
/// `[xx, xy, xz, yy, yz, zz]`.
pub type Sym3 = [f64; 6];

/// Population covariance (divides by K) of a set of points.
pub fn covariance<'a, I>(points: I) -> Sym3
where
    I: IntoIterator<Item = &'a [f64; 3]>,
    I::IntoIter: Clone,
{
    let iter = points.into_iter();
    let mut n = 0usize;
    let mut mean = [0.0; 3];
    for p in iter.clone() {
        n += 1;
        for a in 0..3 {
            mean[a] += p[a];
        }
    }
    if n == 0 {
        return [0.0; 6];
    }
    let inv = 1.0 / n as f64;
    for m in &mut mean {
        *m *= inv;
    }
    let mut c = [0.0; 6];
    for p in iter {
        let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
        c[0] += d[0] * d[0];
        c[1] += d[0] * d[1];
        c[2] += d[0] * d[2];
        c[3] += d[1] * d[1];
        c[4] += d[1] * d[2];
        c[5] += d[2] * d[2];
    }
    c.map(|v| v * inv)
}

/// Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric
/// solution of the characteristic cubic).
pub fn symmetric_eigenvalues(m: &Sym3) -> EigenTriple {
    let [a, b, c, d, e, f] = *m;
    // scale to unit magnitude so the cubic terms cannot overflow
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return EigenTriple::new([0.0; 3]);
    }
    let inv = 1.0 / scale;
    let (a, b, c, d, e, f) = (a * inv, b * inv, c * inv, d * inv, e * inv, f * inv);

    let off = b * b + c * c + e * e;
    if off == 0.0 {
        return EigenTriple::new([a * scale, d * scale, f * scale]);
    }
    let q = (a + d + f) / 3.0;
    let (aq, dq, fq) = (a - q, d - q, f - q);
    let p2 = aq * aq + dq * dq + fq * fq + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return EigenTriple::new([q * scale; 3]);
    }
    // B = (A - qI) / p, r = det(B) / 2
    let (ba, bd, bf, bb, bc, be) = (aq / p, dq / p, fq / p, b / p, c / p, e / p);
    let det = ba * (bd * bf - be * be) - bb * (bb * bf - be * bc) + bc * (bb * be - bd * bc);
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let l2 = 3.0 * q - l1 - l3;
    EigenTriple::new([l1 * scale, l2 * scale, l3 * scale])
}

/// Eigenvalues of the neighborhood covariance.
pub fn covariance_eigen(points: &[[f64; 3]]) -> EigenTriple {
    symmetric_eigenvalues(&covariance(points))
}
