use alloc::vec::Vec;

use num_traits::Float;

use super::{rigid_fit, CoarseConfig};
use crate::fields::Aabb;
use crate::spatial::SpatialHash;
use crate::{Sim3, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct IcpResult {
    pub transform: Sim3,
    /// RMS nearest-neighbor distance at `transform`.
    pub residual: f64,
    pub iterations: usize,
    /// RMS distance before each iteration's refit, starting at the initial
    /// transform.
    pub history: Vec<f64>,
}

fn correspond(hash: &SpatialHash, src: &[Vec3], t: &Sim3) -> (Vec<Vec3>, f64) {
    let mut matched = Vec::with_capacity(src.len());
    let mut sum = 0.0;
    for p in src {
        let (j, d2) = hash.nearest(&t.apply(p)).expect("non-empty target");
        matched.push(hash.points()[j]);
        sum += d2;
    }
    (matched, (sum / src.len() as f64).sqrt())
}

/// Point-to-point ICP from `init`. Stops when the RMS distance changes by
/// less than `icp_convergence_eps` or after `icp_max_iters` refits, and
/// returns the best transform seen. The RMS distance never increases.
pub fn icp_refine(src: &[Vec3], dst: &[Vec3], init: &Sim3, cfg: &CoarseConfig) -> IcpResult {
    let mut best = IcpResult {
        transform: *init,
        residual: f64::INFINITY,
        iterations: 0,
        history: Vec::new(),
    };
    if src.is_empty() || dst.is_empty() {
        return best;
    }
    let b = Aabb::from_points(dst.iter()).unwrap();
    let cell = (b.diagonal() / (dst.len() as f64).cbrt()).max(1e-9);
    let hash = SpatialHash::new(dst, cell);

    let (mut matched, mut rms) = correspond(&hash, src, init);
    best.residual = rms;
    for it in 1..=cfg.icp_max_iters {
        best.history.push(rms);
        best.iterations = it;
        let Ok(next) = rigid_fit(src, &matched) else { break };
        let (m, r) = correspond(&hash, src, &next);
        if r <= best.residual {
            best.transform = next;
            best.residual = r;
        }
        let change = (rms - r).abs();
        matched = m;
        rms = r;
        if change < cfg.icp_convergence_eps {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::euler_to_rotation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(seed: u64) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..300)
            .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5), rng.random_range(-0.3..0.3)))
            .collect()
    }

    #[test]
    fn identical_clouds_converge_at_once() {
        let pts = cloud(1);
        let res = icp_refine(&pts, &pts, &Sim3::identity(), &CoarseConfig::default());
        assert_eq!(res.iterations, 1);
        assert!((res.transform.rotation() - crate::Mat3::identity()).norm() < 1e-12);
        assert!(res.transform.translation().norm() < 1e-12);
        assert_eq!(res.residual, 0.0);
    }

    #[test]
    fn residual_never_increases() {
        let src = cloud(2);
        let r = euler_to_rotation(0.1, -0.05, 0.15);
        let t = Vec3::new(0.05, 0.02, -0.03);
        let dst: Vec<Vec3> = src.iter().map(|p| r * p + t).collect();
        let res = icp_refine(&src, &dst, &Sim3::identity(), &CoarseConfig::default());
        for w in res.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{:?}", res.history);
        }
        assert!(res.residual <= res.history[0]);
        assert!(res.residual < 1e-6, "{}", res.residual);
    }
}
