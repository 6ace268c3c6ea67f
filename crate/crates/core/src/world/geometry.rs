//! Robot footprints and separating-axis overlap tests.

use crate::robot::Pose;

pub(crate) type Quad = [[f64; 2]; 4];

/// Corners of a `length` x `width` rectangle centred on the pose, length
/// along the heading.
pub(crate) fn footprint(pose: &Pose, length: f64, width: f64) -> Quad {
    let (s, c) = pose.heading_rad.sin_cos();
    let (hl, hw) = (length / 2.0, width / 2.0);
    let corner = |a: f64, b: f64| [pose.x_m + a * c - b * s, pose.y_m + a * s + b * c];
    [corner(hl, hw), corner(-hl, hw), corner(-hl, -hw), corner(hl, -hw)]
}

pub(crate) fn aabb(min: [f64; 2], max: [f64; 2]) -> Quad {
    [min, [max[0], min[1]], max, [min[0], max[1]]]
}

/// Projections must overlap by more than this to count as contact.
const CONTACT_EPS: f64 = 1e-9;

/// True when two convex quads overlap with positive area.
pub(crate) fn overlaps(a: &Quad, b: &Quad) -> bool {
    for quad in [a, b] {
        for i in 0..4 {
            let p = quad[i];
            let q = quad[(i + 1) % 4];
            let axis = [q[1] - p[1], p[0] - q[0]];
            let project = |pts: &Quad| {
                pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    let d = v[0] * axis[0] + v[1] * axis[1];
                    (lo.min(d), hi.max(d))
                })
            };
            let (a0, a1) = project(a);
            let (b0, b1) = project(b);
            let norm = axis[0].hypot(axis[1]);
            if a1.min(b1) - a0.max(b0) <= CONTACT_EPS * norm {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_touching_and_overlapping() {
        let a = footprint(&Pose::new(0.0, 0.0, 0.0), 0.5, 0.4);
        assert!(!overlaps(&a, &footprint(&Pose::new(1.0, 0.0, 0.0), 0.5, 0.4)));
        assert!(!overlaps(&a, &footprint(&Pose::new(0.5, 0.0, 0.0), 0.5, 0.4)));
        assert!(overlaps(&a, &footprint(&Pose::new(0.45, 0.0, 0.0), 0.5, 0.4)));
        assert!(overlaps(&a, &footprint(&Pose::new(0.3, 0.3, 0.7), 0.5, 0.4)));
        assert!(!overlaps(&a, &aabb([0.3, 0.3], [1.0, 1.0])));
    }

    #[test]
    fn rotated_corner_case() {
        // diamond whose corner stops just short of the box edge
        let a = footprint(&Pose::new(0.0, 0.0, std::f64::consts::FRAC_PI_4), 0.4, 0.4);
        let reach = 0.2 * std::f64::consts::SQRT_2;
        assert!(!overlaps(&a, &aabb([reach + 0.01, -1.0], [2.0, 1.0])));
        assert!(overlaps(&a, &aabb([reach - 0.01, -1.0], [2.0, 1.0])));
    }
}
