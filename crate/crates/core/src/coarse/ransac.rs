use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CoarseConfig, FpfhDescriptor};
use crate::{Error, Mat3, Result, Sim3, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    pub transform: Sim3,
    pub inliers: usize,
    pub correspondences: usize,
}

impl RansacResult {
    pub fn inlier_fraction(&self) -> f64 {
        if self.correspondences == 0 {
            0.0
        } else {
            self.inliers as f64 / self.correspondences as f64
        }
    }
}

/// Least-squares rotation and translation taking `src[i]` onto `dst[i]`
/// (Kabsch with reflection correction). Needs at least three non-collinear
/// pairs.
pub fn rigid_fit(src: &[Vec3], dst: &[Vec3]) -> Result<Sim3> {
    if src.len() != dst.len() || src.len() < 3 {
        return Err(Error::InvalidArgument("rigid fit needs ≥ 3 paired points".into()));
    }
    let n = src.len() as f64;
    let cs = src.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let cd = dst.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let h = src
        .iter()
        .zip(dst)
        .fold(Mat3::zeros(), |a, (s, d)| a + (s - cs) * (d - cd).transpose());
    let svd = h.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::InvalidArgument("degenerate point configuration".into())),
    };
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let correction = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, d));
    let r = v * correction * u.transpose();
    Sim3::rigid(r, cd - r * cs)
}

/// Ratio-tested nearest-descriptor matches `(src, dst)`. Zero descriptors
/// never match.
pub fn match_descriptors(src: &[FpfhDescriptor], dst: &[FpfhDescriptor], ratio: f64) -> Vec<(usize, usize)> {
    let live: Vec<usize> = (0..dst.len()).filter(|&j| !dst[j].is_zero()).collect();
    let mut out = Vec::new();
    for (i, s) in src.iter().enumerate() {
        if s.is_zero() {
            continue;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        let mut second = f64::INFINITY;
        for &j in &live {
            let d = s.distance_squared(&dst[j]);
            if d < best.1 {
                second = best.1;
                best = (j, d);
            } else if d < second {
                second = d;
            }
        }
        if best.0 == usize::MAX {
            continue;
        }
        if second.is_infinite() || best.1.sqrt() < ratio * second.sqrt() {
            out.push((i, best.0));
        }
    }
    out
}

fn triangle_ok(p: [&Vec3; 3]) -> bool {
    (p[1] - p[0]).cross(&(p[2] - p[0])).norm() > 1e-9
}

fn edges_agree(s: [&Vec3; 3], d: [&Vec3; 3], ratio: f64) -> bool {
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        let ls = (s[a] - s[b]).norm();
        let ld = (d[a] - d[b]).norm();
        let (lo, hi) = if ls < ld { (ls, ld) } else { (ld, ls) };
        if hi == 0.0 || lo < ratio * hi {
            return false;
        }
    }
    true
}

fn count_inliers(t: &Sim3, src: &[Vec3], dst: &[Vec3], pairs: &[(usize, usize)], thr2: f64) -> usize {
    pairs
        .iter()
        .filter(|(i, j)| (t.apply(&src[*i]) - dst[*j]).norm_squared() < thr2)
        .count()
}

/// Rigid src→dst hypothesis with the most correspondence inliers, refit on
/// its inlier set. Hypothesis `k` draws from its own ChaCha8 stream of
/// `seed`, so results do not depend on evaluation order.
pub fn ransac_align(
    src: &[Vec3],
    src_desc: &[FpfhDescriptor],
    dst: &[Vec3],
    dst_desc: &[FpfhDescriptor],
    cfg: &CoarseConfig,
    seed: u64,
) -> Result<RansacResult> {
    let pairs = match_descriptors(src_desc, dst_desc, cfg.correspondence_ratio_test);
    if pairs.len() < 3 {
        return Err(Error::InitialisationFailure(alloc::format!(
            "{} descriptor correspondences, need at least 3",
            pairs.len()
        )));
    }
    let thr2 = cfg.ransac_inlier_threshold * cfg.ransac_inlier_threshold;
    let mut best: Option<(Sim3, usize)> = None;
    for k in 0..cfg.ransac_iters {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut pick = [0usize; 3];
        pick[0] = rng.random_range(0..pairs.len());
        pick[1] = rng.random_range(0..pairs.len());
        pick[2] = rng.random_range(0..pairs.len());
        if pick[0] == pick[1] || pick[1] == pick[2] || pick[0] == pick[2] {
            continue;
        }
        let s = pick.map(|m| &src[pairs[m].0]);
        let d = pick.map(|m| &dst[pairs[m].1]);
        if !triangle_ok(s) || !triangle_ok(d) || !edges_agree(s, d, cfg.edge_length_ratio) {
            continue;
        }
        let Ok(t) = rigid_fit(&s.map(|p| *p), &d.map(|p| *p)) else {
            continue;
        };
        let n = count_inliers(&t, src, dst, &pairs, thr2);
        if best.as_ref().is_none_or(|(_, b)| n > *b) {
            best = Some((t, n));
        }
    }
    let Some((mut t, mut n)) = best else {
        return Err(Error::InitialisationFailure("no valid RANSAC hypothesis".into()));
    };
    // refit on the consensus set; the minimal-sample model is only as good
    // as its three correspondences
    let inliers = |t: &Sim3| -> (Vec<Vec3>, Vec<Vec3>) {
        pairs
            .iter()
            .filter(|(i, j)| (t.apply(&src[*i]) - dst[*j]).norm_squared() < thr2)
            .map(|(i, j)| (src[*i], dst[*j]))
            .unzip()
    };
    for _ in 0..3 {
        let (s, d) = inliers(&t);
        let Ok(refit) = rigid_fit(&s, &d) else { break };
        let m = count_inliers(&refit, src, dst, &pairs, thr2);
        let same = (refit.rotation() - t.rotation()).norm() < 1e-15 && (refit.translation() - t.translation()).norm() < 1e-15;
        t = refit;
        n = m;
        if same {
            break;
        }
    }
    Ok(RansacResult {
        transform: t,
        inliers: n,
        correspondences: pairs.len(),
    })
}
