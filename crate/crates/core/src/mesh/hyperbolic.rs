//! Poincare disk helpers used while building meshes.

type Point = [f64; 2];

fn norm_sq(p: Point) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

/// Lift to the upper sheet of the hyperboloid `t^2 - x^2 - y^2 = 1`.
fn to_hyperboloid(p: Point) -> [f64; 3] {
    let r2 = norm_sq(p);
    let s = 1.0 / (1.0 - r2);
    [2.0 * p[0] * s, 2.0 * p[1] * s, (1.0 + r2) * s]
}

fn from_hyperboloid(x: [f64; 3]) -> Point {
    [x[0] / (1.0 + x[2]), x[1] / (1.0 + x[2])]
}

/// Hyperbolic distance between two points of the unit disk (curvature -1).
pub fn disk_distance(p: Point, q: Point) -> f64 {
    let d2 = norm_sq([p[0] - q[0], p[1] - q[1]]);
    let denom = ((1.0 - norm_sq(p)) * (1.0 - norm_sq(q))).sqrt();
    2.0 * (d2.sqrt() / denom).asinh()
}

/// Midpoint of the geodesic segment from `p` to `q`.
pub fn disk_midpoint(p: Point, q: Point) -> Point {
    let a = to_hyperboloid(p);
    let b = to_hyperboloid(q);
    let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let lorentz = s[2] * s[2] - s[0] * s[0] - s[1] * s[1];
    let n = lorentz.sqrt();
    from_hyperboloid([s[0] / n, s[1] / n, s[2] / n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_from_origin_matches_closed_form() {
        // d(0, r) = 2 artanh(r)
        for r in [0.1, 0.5, 0.9] {
            let d = disk_distance([0.0, 0.0], [r, 0.0]);
            assert!((d - 2.0 * f64::atanh(r)).abs() < 1e-13);
        }
    }

    #[test]
    fn midpoint_halves_the_distance() {
        let p = [0.3, -0.4];
        let q = [-0.6, 0.5];
        let m = disk_midpoint(p, q);
        let d = disk_distance(p, q);
        assert!((disk_distance(p, m) - d / 2.0).abs() < 1e-12);
        assert!((disk_distance(m, q) - d / 2.0).abs() < 1e-12);
    }

    #[test]
    fn hyperboloid_round_trip() {
        let p = [0.7, -0.2];
        let back = from_hyperboloid(to_hyperboloid(p));
        assert!((back[0] - p[0]).abs() < 1e-15 && (back[1] - p[1]).abs() < 1e-15);
    }
}
