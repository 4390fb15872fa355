use serde::{Deserialize, Serialize};

use crate::{Error, Result, Sim3, Vec3};

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self> {
        let b = Self { min, max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min.iter().chain(self.max.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("box has non-finite corners".into()));
        }
        if (0..3).any(|k| self.min[k] > self.max[k]) {
            return Err(Error::InvalidArgument("box min exceeds max".into()));
        }
        Ok(())
    }

    pub fn from_center_half_extents(center: Vec3, half: Vec3) -> Self {
        Self {
            min: center - half,
            max: center + half,
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Self {
            min: first,
            max: first,
        };
        for p in it {
            b.min = b.min.inf(p);
            b.max = b.max.sup(p);
        }
        Some(b)
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn half_extents(&self) -> Vec3 {
        (self.max - self.min) * 0.5
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn inflate(&self, margin: f64) -> Self {
        let m = Vec3::repeat(margin);
        Self {
            min: self.min - m,
            max: self.max + m,
        }
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        (0..3).all(|k| x[k] >= self.min[k] && x[k] <= self.max[k])
    }

    pub fn intersects(&self, other: &Self) -> bool {
        (0..3).all(|k| self.min[k] <= other.max[k] && other.min[k] <= self.max[k])
    }

    pub fn clamp(&self, x: &Vec3) -> Vec3 {
        x.sup(&self.min).inf(&self.max)
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        core::array::from_fn(|i| {
            Vec3::new(
                if i & 1 == 0 { a.x } else { b.x },
                if i & 2 == 0 { a.y } else { b.y },
                if i & 4 == 0 { a.z } else { b.z },
            )
        })
    }

    /// Box enclosing the image of this box under `t`.
    pub fn transformed(&self, t: &Sim3) -> Self {
        let corners = self.corners().map(|c| t.apply(&c));
        Self::from_points(corners.iter()).expect("eight corners")
    }

    /// Exact signed distance to the box surface.
    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        let q = (x - self.center()).abs() - self.half_extents();
        let outside = q.sup(&Vec3::zeros()).norm();
        let inside = q.max().min(0.0);
        outside + inside
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_distance_of_unit_box() {
        let b = Aabb::from_center_half_extents(Vec3::zeros(), Vec3::repeat(1.0));
        assert_eq!(b.signed_distance(&Vec3::new(2.0, 0.0, 0.0)), 1.0);
        assert_eq!(b.signed_distance(&Vec3::zeros()), -1.0);
        assert!((b.signed_distance(&Vec3::new(2.0, 2.0, 0.0)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_inverted_box() {
        assert!(Aabb::new(Vec3::repeat(1.0), Vec3::zeros()).is_err());
        assert!(Aabb::new(Vec3::zeros(), Vec3::new(f64::INFINITY, 1.0, 1.0)).is_err());
    }

    #[test]
    fn transformed_box_contains_transformed_corners() {
        let b = Aabb::from_center_half_extents(Vec3::new(0.1, 0.2, 0.3), Vec3::new(1.0, 0.5, 0.2));
        let t = Sim3::from_params(&crate::Sim3Params {
            tx: 1.0,
            yaw: 0.7,
            roll: 0.2,
            sigma: 1.5,
            ..Default::default()
        })
        .unwrap();
        let tb = b.transformed(&t).inflate(1e-12);
        for c in b.corners() {
            assert!(tb.contains(&t.apply(&c)));
        }
    }
}
