//! Small vector helpers and exact ball/segment and ball/triangle measures.

pub type Vec3 = [f64; 3];

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Angle between two vectors in `[0, pi]`, accurate near 0 and pi.
#[inline]
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    norm(&cross(a, b)).atan2(dot(a, b))
}

/// Length of the part of segment `p0`-`p1` inside the ball `(center, r)`.
pub fn segment_ball_length(p0: &Vec3, p1: &Vec3, center: &Vec3, r: f64) -> f64 {
    let d = sub(p1, p0);
    let len2 = dot(&d, &d);
    if len2 == 0.0 {
        return 0.0;
    }
    let m = sub(p0, center);
    // |m + t d|^2 = r^2
    let b = dot(&m, &d) / len2;
    let c = (dot(&m, &m) - r * r) / len2;
    let disc = b * b - c;
    if disc <= 0.0 {
        return 0.0;
    }
    let s = disc.sqrt();
    let t0 = (-b - s).max(0.0);
    let t1 = (-b + s).min(1.0);
    if t1 <= t0 {
        0.0
    } else {
        (t1 - t0) * len2.sqrt()
    }
}

/// Signed area of the intersection of the disc of radius `r` at the origin
/// with the triangle `(origin, p, q)`.
fn disc_wedge_area(p: [f64; 2], q: [f64; 2], r: f64) -> f64 {
    let d = [q[0] - p[0], q[1] - p[1]];
    let a = d[0] * d[0] + d[1] * d[1];
    if a == 0.0 {
        return 0.0;
    }
    let b = p[0] * d[0] + p[1] * d[1];
    let c = p[0] * p[0] + p[1] * p[1] - r * r;
    let mut ts = [0.0, 0.0, 0.0, 0.0];
    let mut n = 1;
    let disc = b * b - a * c;
    if disc > 0.0 {
        let s = disc.sqrt();
        for t in [(-b - s) / a, (-b + s) / a] {
            if t > 0.0 && t < 1.0 {
                ts[n] = t;
                n += 1;
            }
        }
    }
    ts[n] = 1.0;
    n += 1;

    let at = |t: f64| [p[0] + t * d[0], p[1] + t * d[1]];
    let mut area = 0.0;
    for w in ts[..n].windows(2) {
        let (s, e) = (at(w[0]), at(w[1]));
        let mid = at(0.5 * (w[0] + w[1]));
        let cr = s[0] * e[1] - s[1] * e[0];
        if mid[0] * mid[0] + mid[1] * mid[1] <= r * r {
            area += 0.5 * cr;
        } else {
            let dt = s[0] * e[0] + s[1] * e[1];
            area += 0.5 * r * r * cr.atan2(dt);
        }
    }
    area
}

/// Area of the part of triangle `abc` inside the ball `(center, r)`.
pub fn triangle_ball_area(a: &Vec3, b: &Vec3, c: &Vec3, center: &Vec3, r: f64) -> f64 {
    let ab = sub(b, a);
    let n = cross(&ab, &sub(c, a));
    let nn = norm(&n);
    let lab = norm(&ab);
    if nn == 0.0 || lab == 0.0 {
        return 0.0;
    }
    let nhat = scale(&n, 1.0 / nn);
    let dist = dot(&sub(center, a), &nhat);
    if dist.abs() >= r {
        return 0.0;
    }
    let rho = (r * r - dist * dist).sqrt();
    let foot = sub(center, &scale(&nhat, dist));
    let u = scale(&ab, 1.0 / lab);
    let w = cross(&nhat, &u);
    let to2 = |p: &Vec3| {
        let v = sub(p, &foot);
        [dot(&v, &u), dot(&v, &w)]
    };
    let (pa, pb, pc) = (to2(a), to2(b), to2(c));
    (disc_wedge_area(pa, pb, rho) + disc_wedge_area(pb, pc, rho) + disc_wedge_area(pc, pa, rho))
        .abs()
}
