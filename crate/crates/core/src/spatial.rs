//! Uniform grid hash for exact radius and nearest-neighbor queries.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Float;

use crate::Vec3;

type Cell = (i64, i64, i64);

#[derive(Debug, Clone)]
pub struct SpatialHash {
    cell: f64,
    cells: BTreeMap<Cell, Vec<usize>>,
    points: Vec<Vec3>,
    lo: Cell,
    hi: Cell,
}

impl SpatialHash {
    /// `cell` must be positive.
    pub fn new(points: &[Vec3], cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "cell size must be positive");
        let mut cells: BTreeMap<Cell, Vec<usize>> = BTreeMap::new();
        let mut lo = (i64::MAX, i64::MAX, i64::MAX);
        let mut hi = (i64::MIN, i64::MIN, i64::MIN);
        for (i, p) in points.iter().enumerate() {
            let c = cell_of(p, cell);
            lo = (lo.0.min(c.0), lo.1.min(c.1), lo.2.min(c.2));
            hi = (hi.0.max(c.0), hi.1.max(c.1), hi.2.max(c.2));
            cells.entry(c).or_default().push(i);
        }
        Self {
            cell,
            cells,
            points: points.to_vec(),
            lo,
            hi,
        }
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of all points within `radius` of `q` (inclusive), in
    /// ascending index order.
    pub fn within(&self, q: &Vec3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let r2 = radius * radius;
        let reach = (radius / self.cell).ceil() as i64;
        let c = cell_of(q, self.cell);
        for i in (c.0 - reach).max(self.lo.0)..=(c.0 + reach).min(self.hi.0) {
            for j in (c.1 - reach).max(self.lo.1)..=(c.1 + reach).min(self.hi.1) {
                for k in (c.2 - reach).max(self.lo.2)..=(c.2 + reach).min(self.hi.2) {
                    if let Some(ids) = self.cells.get(&(i, j, k)) {
                        out.extend(ids.iter().copied().filter(|&id| (self.points[id] - q).norm_squared() <= r2));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Nearest point to `q` as `(index, squared distance)`. Ties resolve to
    /// the lowest index.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let c = cell_of(q, self.cell);
        let mut best: Option<(usize, f64)> = None;
        let max_ring = [
            (c.0 - self.lo.0).abs(),
            (c.0 - self.hi.0).abs(),
            (c.1 - self.lo.1).abs(),
            (c.1 - self.hi.1).abs(),
            (c.2 - self.lo.2).abs(),
            (c.2 - self.hi.2).abs(),
        ]
        .into_iter()
        .max()
        .unwrap();
        for ring in 0..=max_ring {
            if let Some((_, d2)) = best {
                // every point in ring `ring` is at least (ring - 1) cells away
                let gap = (ring - 1).max(0) as f64 * self.cell;
                if gap * gap > d2 {
                    break;
                }
            }
            self.visit_ring(c, ring, |id| {
                let d2 = (self.points[id] - q).norm_squared();
                match best {
                    Some((bi, bd)) if bd < d2 || (bd == d2 && bi < id) => {}
                    _ => best = Some((id, d2)),
                }
            });
        }
        best
    }

    /// The `k` nearest points, closest first.
    pub fn k_nearest(&self, q: &Vec3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let k = k.min(self.points.len());
        let mut radius = self.cell;
        loop {
            let mut found: Vec<(usize, f64)> = self
                .within(q, radius)
                .into_iter()
                .map(|i| (i, (self.points[i] - q).norm_squared()))
                .collect();
            if found.len() >= k || found.len() == self.points.len() {
                found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                found.truncate(k);
                return found;
            }
            radius *= 2.0;
        }
    }

    fn visit_ring(&self, c: Cell, ring: i64, mut f: impl FnMut(usize)) {
        for i in (c.0 - ring).max(self.lo.0)..=(c.0 + ring).min(self.hi.0) {
            for j in (c.1 - ring).max(self.lo.1)..=(c.1 + ring).min(self.hi.1) {
                let on_shell = (i - c.0).abs() == ring || (j - c.1).abs() == ring;
                if on_shell {
                    for k in (c.2 - ring).max(self.lo.2)..=(c.2 + ring).min(self.hi.2) {
                        if let Some(ids) = self.cells.get(&(i, j, k)) {
                            ids.iter().for_each(|&id| f(id));
                        }
                    }
                } else {
                    for k in [c.2 - ring, c.2 + ring] {
                        if k < self.lo.2 || k > self.hi.2 || (ring == 0 && k != c.2) {
                            continue;
                        }
                        if let Some(ids) = self.cells.get(&(i, j, k)) {
                            ids.iter().for_each(|&id| f(id));
                        }
                        if ring == 0 {
                            break;
                        }
                    }
                }
            }
        }
    }
}

fn cell_of(p: &Vec3, cell: f64) -> Cell {
    (
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-0.2..0.2),
                )
            })
            .collect()
    }

    #[test]
    fn nearest_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = cloud(&mut rng, 500);
        for cell in [0.01, 0.1, 0.7, 5.0] {
            let h = SpatialHash::new(&pts, cell);
            for _ in 0..300 {
                let q = Vec3::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                );
                let brute = pts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, (p - q).norm_squared()))
                    .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                    .unwrap();
                assert_eq!(h.nearest(&q), Some(brute));
            }
        }
    }

    #[test]
    fn radius_and_knn_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = cloud(&mut rng, 400);
        let h = SpatialHash::new(&pts, 0.15);
        for _ in 0..100 {
            let q = pts[rng.random_range(0..pts.len())];
            let r = rng.random_range(0.01..0.5);
            let brute: Vec<usize> = (0..pts.len()).filter(|&i| (pts[i] - q).norm() <= r).collect();
            assert_eq!(h.within(&q, r), brute);

            let mut all: Vec<(usize, f64)> = pts.iter().enumerate().map(|(i, p)| (i, (p - q).norm_squared())).collect();
            all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            all.truncate(10);
            assert_eq!(h.k_nearest(&q, 10), all);
        }
    }

    #[test]
    fn empty_hash() {
        let h = SpatialHash::new(&[], 1.0);
        assert!(h.nearest(&Vec3::zeros()).is_none());
        assert!(h.k_nearest(&Vec3::zeros(), 3).is_empty());
    }
}
