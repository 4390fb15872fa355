use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::spatial::SpatialHash;
use crate::Vec3;

pub const FPFH_BINS: usize = 33;
const SUB_BINS: usize = 11;

/// Fast point feature histogram: three 11-bin blocks over the angular pair
/// features. Each block sums to 100, or the whole descriptor is zero for a
/// point without neighbors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpfhDescriptor(pub [f64; FPFH_BINS]);

impl FpfhDescriptor {
    pub const ZERO: Self = Self([0.0; FPFH_BINS]);

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn distance_squared(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub fn block_sums(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for (i, v) in self.0.iter().enumerate() {
            s[i / SUB_BINS] += v;
        }
        s
    }
}

/// Darboux-frame features `(alpha, phi, theta, distance)` of an oriented
/// point pair. The source is whichever endpoint's normal makes the smaller
/// angle with the connecting line, so the result is symmetric in the pair.
pub fn pair_features(p1: &Vec3, n1: &Vec3, p2: &Vec3, n2: &Vec3) -> [f64; 4] {
    let mut d = p2 - p1;
    let dist = d.norm();
    if dist == 0.0 {
        return [0.0; 4];
    }
    let a1 = n1.dot(&d) / dist;
    let a2 = n2.dot(&d) / dist;
    let (u, n_t, phi) = if a1.abs().acos() > a2.abs().acos() {
        d = -d;
        (n2, n1, -a2)
    } else {
        (n1, n2, a1)
    };
    let v = d.cross(u);
    let vn = v.norm();
    if vn == 0.0 {
        return [0.0, 0.0, phi, dist];
    }
    let v = v / vn;
    let w = u.cross(&v);
    let alpha = v.dot(n_t);
    let mut theta = w.dot(n_t).atan2(u.dot(n_t));
    // antiparallel normals sit on the ±π seam; rounding noise picks the side
    if theta < -PI + 1e-9 {
        theta = PI;
    }
    [theta, alpha, phi, dist]
}

fn bin(value: f64, lo: f64, hi: f64) -> usize {
    let b = ((value - lo) / (hi - lo) * SUB_BINS as f64).floor();
    (b.max(0.0) as usize).min(SUB_BINS - 1)
}

fn spfh(i: usize, points: &[Vec3], normals: &[Vec3], nbrs: &[usize]) -> [f64; FPFH_BINS] {
    let mut h = [0.0; FPFH_BINS];
    let others: Vec<usize> = nbrs.iter().copied().filter(|&j| j != i).collect();
    if others.is_empty() {
        return h;
    }
    let inc = 100.0 / others.len() as f64;
    for j in others {
        let f = pair_features(&points[i], &normals[i], &points[j], &normals[j]);
        h[bin(f[0], -PI, PI)] += inc;
        h[SUB_BINS + bin(f[1], -1.0, 1.0)] += inc;
        h[2 * SUB_BINS + bin(f[2], -1.0, 1.0)] += inc;
    }
    h
}

/// Descriptors for every point, using neighbors within `radius`.
pub fn compute_fpfh(points: &[Vec3], normals: &[Vec3], radius: f64) -> Vec<FpfhDescriptor> {
    assert_eq!(points.len(), normals.len(), "one normal per point");
    if points.is_empty() {
        return Vec::new();
    }
    let hash = SpatialHash::new(points, radius);
    let nbrs: Vec<Vec<usize>> = points.iter().map(|p| hash.within(p, radius)).collect();
    let spfhs: Vec<[f64; FPFH_BINS]> = (0..points.len()).map(|i| spfh(i, points, normals, &nbrs[i])).collect();

    let mut out = vec![FpfhDescriptor::ZERO; points.len()];
    for (i, desc) in out.iter_mut().enumerate() {
        let mut h = spfhs[i];
        let mut any = false;
        let mut weighted = [0.0; FPFH_BINS];
        let mut count = 0usize;
        for &j in &nbrs[i] {
            let d = (points[i] - points[j]).norm();
            if j == i || d == 0.0 {
                continue;
            }
            count += 1;
            for (w, s) in weighted.iter_mut().zip(&spfhs[j]) {
                *w += s / d;
            }
        }
        if count > 0 {
            any = true;
            for (a, w) in h.iter_mut().zip(&weighted) {
                *a += w / count as f64;
            }
        }
        if !any {
            continue;
        }
        for block in h.chunks_mut(SUB_BINS) {
            let s: f64 = block.iter().sum();
            if s > 0.0 {
                block.iter_mut().for_each(|v| *v *= 100.0 / s);
            }
        }
        *desc = FpfhDescriptor(h);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse::estimate_normals;
    use crate::fields::Primitive;
    use crate::sampling::{extract_surface_samples, Frame, SampleSet, SamplingConfig};
    use crate::transforms::euler_to_rotation;

    #[test]
    fn isolated_point_has_zero_descriptor() {
        let pts = vec![Vec3::zeros(), Vec3::new(10.0, 0.0, 0.0)];
        let n = vec![Vec3::z(), Vec3::z()];
        let d = compute_fpfh(&pts, &n, 1.0);
        assert!(d.iter().all(FpfhDescriptor::is_zero));
    }

    #[test]
    fn pair_features_symmetric_in_endpoints() {
        let (p1, n1) = (Vec3::zeros(), Vec3::new(0.0, 0.3, 1.0).normalize());
        let (p2, n2) = (Vec3::new(0.5, 0.1, 0.0), Vec3::new(0.7, 0.0, 0.7).normalize());
        let a = pair_features(&p1, &n1, &p2, &n2);
        let b = pair_features(&p2, &n2, &p1, &n1);
        for k in 0..4 {
            assert!((a[k] - b[k]).abs() < 1e-12, "{a:?} {b:?}");
        }
    }

    fn torus_descriptors(rot: &crate::Mat3, t: Vec3) -> (Vec<FpfhDescriptor>, Vec<FpfhDescriptor>) {
        let torus = Primitive::Torus {
            major: 0.6,
            minor: 0.2,
        };
        let set = extract_surface_samples(&torus, Frame::Object, &Vec3::zeros(), 2.5, &SamplingConfig::default(), None).unwrap();
        let pts: Vec<Vec3> = set.points.iter().step_by(4).copied().collect();
        let sub = SampleSet::from_points(Frame::Object, pts.clone());
        let normals = estimate_normals(&sub, &torus, 10);
        let base = compute_fpfh(&pts, &normals, 0.25);
        let moved: Vec<Vec3> = pts.iter().map(|p| rot * p + t).collect();
        let moved_n: Vec<Vec3> = normals.iter().map(|n| rot * n).collect();
        (base, compute_fpfh(&moved, &moved_n, 0.25))
    }

    #[test]
    fn rigid_invariance() {
        let r = euler_to_rotation(0.3, -0.7, 1.9);
        let (a, b) = torus_descriptors(&r, Vec3::new(1.0, -2.0, 0.5));
        assert!(a.len() > 100);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.distance_squared(y).sqrt() < 1e-6);
        }
    }

    #[test]
    fn blocks_sum_to_hundred() {
        let (a, _) = torus_descriptors(&crate::Mat3::identity(), Vec3::zeros());
        for d in &a {
            if d.is_zero() {
                continue;
            }
            for s in d.block_sums() {
                assert!((s - 100.0).abs() < 1e-9);
            }
        }
    }
}
