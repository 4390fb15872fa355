use alloc::vec::Vec;

use nalgebra::SymmetricEigen;
use num_traits::Float;

use crate::fields::SdfField;
use crate::sampling::SampleSet;
use crate::spatial::SpatialHash;
use crate::{Mat3, Vec3};

/// Unit normals from the field gradient. Points where the gradient vanishes
/// (norm below 1e-8) fall back to a k-NN PCA plane normal.
pub fn estimate_normals<F: SdfField + ?Sized>(set: &SampleSet, f: &F, k: usize) -> Vec<Vec3> {
    let mut normals: Vec<Option<Vec3>> = set
        .points
        .iter()
        .map(|x| {
            let g = f.gradient(x);
            let n = g.norm();
            (n >= 1e-8 && n.is_finite()).then(|| g / n)
        })
        .collect();
    if normals.iter().any(Option::is_none) {
        let pca = pca_normals(set, k);
        for (n, fallback) in normals.iter_mut().zip(pca) {
            n.get_or_insert(fallback);
        }
    }
    normals.into_iter().map(|n| n.unwrap()).collect()
}

/// Normal of the best-fit plane through each point's `k` nearest neighbors,
/// oriented toward the camera that produced the point.
pub fn pca_normals(set: &SampleSet, k: usize) -> Vec<Vec3> {
    let pts = &set.points;
    if pts.is_empty() {
        return Vec::new();
    }
    let b = crate::fields::Aabb::from_points(pts.iter()).unwrap();
    let cell = (b.diagonal() / (pts.len() as f64).max(1.0).cbrt()).max(1e-9);
    let hash = SpatialHash::new(pts, cell);
    pts.iter()
        .enumerate()
        .map(|(i, p)| {
            let nn = hash.k_nearest(p, k.max(3));
            let c = nn.iter().fold(Vec3::zeros(), |a, (j, _)| a + pts[*j]) / nn.len() as f64;
            let cov = nn.iter().fold(Mat3::zeros(), |a, (j, _)| {
                let d = pts[*j] - c;
                a + d * d.transpose()
            });
            let eig = SymmetricEigen::new(cov);
            let n = eig.eigenvectors.column(eig.eigenvalues.imin()).into_owned();
            let to_cam = set.viewpoint_of(i) - p;
            if n.dot(&to_cam) < 0.0 {
                -n
            } else {
                n
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Primitive;
    use crate::sampling::{extract_surface_samples, Frame, SamplingConfig};

    #[test]
    fn sphere_normals_are_radial() {
        let s = Primitive::sphere(1.0);
        let set = extract_surface_samples(&s, Frame::Object, &Vec3::zeros(), 2.5, &SamplingConfig::default(), None).unwrap();
        let n = estimate_normals(&set, &s, 10);
        for (p, n) in set.points.iter().zip(&n) {
            assert!((n - p.normalize()).norm() < 1e-6);
        }
    }

    #[test]
    fn box_face_normals() {
        let b = Primitive::cuboid(0.5, 0.5, 0.5);
        let set = extract_surface_samples(&b, Frame::Object, &Vec3::zeros(), 2.0, &SamplingConfig::default(), None).unwrap();
        let n = estimate_normals(&set, &b, 10);
        let mut top = 0;
        for (p, n) in set.points.iter().zip(&n) {
            // interior of the top face, away from edges
            if (p.z - 0.5).abs() < 1e-4 && p.x.abs() < 0.45 && p.y.abs() < 0.45 {
                assert!((n - Vec3::z()).norm() < 1e-6);
                top += 1;
            }
        }
        assert!(top > 50);
    }

    #[test]
    fn pca_agrees_with_gradient_on_dense_sphere() {
        // 1000 evenly spread points on the unit sphere, each seen from
        // straight above its own position
        let n = 1000;
        let golden = core::f64::consts::PI * (3.0 - 5f64.sqrt());
        let points: Vec<Vec3> = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                Vec3::new(r * phi.cos(), r * phi.sin(), z)
            })
            .collect();
        let viewpoints = points.iter().map(|p| p * 3.0).collect();
        let set = SampleSet::new(Frame::Object, points, (0..n as u32).collect(), viewpoints).unwrap();
        let s = Primitive::sphere(1.0);
        let pca = pca_normals(&set, 10);
        let grad = estimate_normals(&set, &s, 10);
        for (a, b) in pca.iter().zip(&grad) {
            let angle = a.dot(b).clamp(-1.0, 1.0).acos();
            assert!(angle < 5f64.to_radians(), "{angle}");
        }
    }

    #[test]
    fn vanishing_gradient_uses_pca() {
        #[derive(Debug)]
        struct NoGrad(Primitive);
        impl SdfField for NoGrad {
            fn value(&self, x: &Vec3) -> f64 {
                self.0.value(x)
            }
            fn gradient(&self, _: &Vec3) -> Vec3 {
                Vec3::zeros()
            }
            fn bounds(&self) -> crate::fields::Aabb {
                self.0.bounds()
            }
        }
        let f = NoGrad(Primitive::sphere(1.0));
        let set = extract_surface_samples(&f, Frame::Object, &Vec3::zeros(), 2.5, &SamplingConfig::default(), None).unwrap();
        let n = estimate_normals(&set, &f, 10);
        // oriented toward the camera, hence outward on a convex shape
        let outward = n.iter().zip(&set.points).filter(|(n, p)| n.dot(p) > 0.0).count();
        assert_eq!(outward, set.len());
    }
}
