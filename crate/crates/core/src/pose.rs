//! Planar poses, rigid transforms and trajectories.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Rigid SE(2) transform: rotate by `yaw`, then translate by `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rigid2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Default for Rigid2 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Rigid2 {
    pub const IDENTITY: Rigid2 = Rigid2 {
        x: 0.0,
        y: 0.0,
        yaw: 0.0,
    };

    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: normalize_angle(yaw),
        }
    }

    pub fn apply(&self, px: f64, py: f64) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        (c * px - s * py + self.x, s * px + c * py + self.y)
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Rigid2) -> Rigid2 {
        let (x, y) = self.apply(other.x, other.y);
        Rigid2::new(x, y, self.yaw + other.yaw)
    }

    pub fn inverse(&self) -> Rigid2 {
        let (s, c) = self.yaw.sin_cos();
        Rigid2::new(-(c * self.x + s * self.y), s * self.x - c * self.y, -self.yaw)
    }

    pub fn translation_norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Timestamped planar pose in a fixed world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2D {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2D {
    pub fn new(t: f64, x: f64, y: f64, yaw: f64) -> Self {
        Self {
            t,
            x,
            y,
            yaw: normalize_angle(yaw),
        }
    }

    pub fn from_rigid(t: f64, r: Rigid2) -> Self {
        Self::new(t, r.x, r.y, r.yaw)
    }

    pub fn rigid(&self) -> Rigid2 {
        Rigid2 {
            x: self.x,
            y: self.y,
            yaw: self.yaw,
        }
    }
}

/// Ordered poses with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    poses: Vec<Pose2D>,
}

impl Trajectory {
    pub fn new(poses: Vec<Pose2D>) -> Result<Self> {
        for (k, p) in poses.iter().enumerate() {
            if ![p.t, p.x, p.y, p.yaw].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidTrajectory(format!("pose {k} is not finite")));
            }
        }
        if let Some(k) = poses.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidTrajectory(format!(
                "timestamps must increase strictly (pose {} at t={} follows t={})",
                k + 1,
                poses[k + 1].t,
                poses[k].t
            )));
        }
        let poses = poses
            .into_iter()
            .map(|p| Pose2D::new(p.t, p.x, p.y, p.yaw))
            .collect();
        Ok(Self { poses })
    }

    pub fn poses(&self) -> &[Pose2D] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Cumulative traveled distance at each pose, starting at 0.
    pub fn path_distances(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.poses.len());
        for (k, p) in self.poses.iter().enumerate() {
            if k > 0 {
                let q = &self.poses[k - 1];
                acc += (p.x - q.x).hypot(p.y - q.y);
            }
            out.push(acc);
        }
        out
    }

    /// Applies the same world-frame transform to every pose.
    pub fn transformed(&self, g: &Rigid2) -> Trajectory {
        let poses = self
            .poses
            .iter()
            .map(|p| Pose2D::from_rigid(p.t, g.compose(&p.rigid())))
            .collect();
        Trajectory { poses }
    }

    /// Constant-velocity run: `n` poses, `step` meters and `yaw_rate` radians per step.
    pub fn constant_velocity(n: usize, dt: f64, step: f64, yaw_rate: f64) -> Result<Self> {
        let mut poses = Vec::with_capacity(n);
        let mut current = Rigid2::IDENTITY;
        let delta = Rigid2::new(step, 0.0, yaw_rate);
        for k in 0..n {
            poses.push(Pose2D::from_rigid(k as f64 * dt, current));
            current = current.compose(&delta);
        }
        Self::new(poses)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn angle_wraps_into_half_open_interval() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(normalize_angle(0.0), 0.0);
    }

    #[test]
    fn timestamps_must_increase() {
        let p = |t| Pose2D::new(t, 0.0, 0.0, 0.0);
        assert!(Trajectory::new(vec![p(0.0), p(1.0)]).is_ok());
        assert!(Trajectory::new(vec![p(0.0), p(0.0)]).is_err());
        assert!(Trajectory::new(vec![p(1.0), p(0.5)]).is_err());
    }

    #[test]
    fn constant_velocity_path_length() {
        let traj = Trajectory::constant_velocity(11, 0.1, 2.0, 0.0).unwrap();
        let d = traj.path_distances();
        assert!((d[10] - 20.0).abs() < 1e-12);
        assert!((traj.poses()[10].t - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn compose_with_inverse_is_identity(
            x in -50.0f64..50.0, y in -50.0f64..50.0, yaw in -3.1f64..3.1,
        ) {
            let t = Rigid2::new(x, y, yaw);
            let id = t.compose(&t.inverse());
            prop_assert!(id.x.abs() < 1e-9 && id.y.abs() < 1e-9 && id.yaw.abs() < 1e-12);
        }
    }
}
