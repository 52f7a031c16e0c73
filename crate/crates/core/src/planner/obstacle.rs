use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;

#[derive(Debug, Clone, PartialEq)]
pub enum Obstacle {
    /// Ball (a disc in 2D) of the given radius.
    Sphere { center: Vector, radius: f64 },
    /// Axis-aligned cube given by its space diagonal.
    AxisCube { center: Vector, space_diagonal: f64 },
}

impl Obstacle {
    pub fn sphere(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "obstacle radius must be positive, got {radius}"
            )));
        }
        Ok(Obstacle::Sphere { center, radius })
    }

    pub fn cube(center: Vector, space_diagonal: f64) -> Result<Self> {
        if !(space_diagonal > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "cube diagonal must be positive, got {space_diagonal}"
            )));
        }
        check_dim("cube center", 3, center.len())?;
        Ok(Obstacle::AxisCube { center, space_diagonal })
    }

    pub fn center(&self) -> &Vector {
        match self {
            Obstacle::Sphere { center, .. } | Obstacle::AxisCube { center, .. } => center,
        }
    }

    /// Radius of the sphere, or half the edge of the cube.
    pub fn extent(&self) -> f64 {
        match self {
            Obstacle::Sphere { radius, .. } => *radius,
            Obstacle::AxisCube { space_diagonal, .. } => space_diagonal / (2.0 * 3f64.sqrt()),
        }
    }

    /// Continuity threshold used when none is configured.
    pub fn default_threshold(&self) -> f64 {
        match self {
            Obstacle::Sphere { radius, .. } => *radius,
            Obstacle::AxisCube { space_diagonal, .. } => 0.5 * space_diagonal,
        }
    }

    pub fn contains(&self, p: &Vector) -> bool {
        match self {
            Obstacle::Sphere { center, radius } => (p - center).norm() < *radius,
            Obstacle::AxisCube { center, .. } => {
                let half = self.extent();
                p.iter().zip(center.iter()).all(|(a, c)| (a - c).abs() < half)
            }
        }
    }

    /// Same shape scaled about its center.
    pub fn inflated(&self, factor: f64) -> Self {
        match self {
            Obstacle::Sphere { center, radius } => Obstacle::Sphere {
                center: center.clone(),
                radius: radius * factor,
            },
            Obstacle::AxisCube { center, space_diagonal } => Obstacle::AxisCube {
                center: center.clone(),
                space_diagonal: space_diagonal * factor,
            },
        }
    }

    pub fn record(&self) -> ObstacleRecord {
        match self {
            Obstacle::Sphere { center, radius } => ObstacleRecord {
                shape: "sphere".into(),
                center: center.iter().copied().collect(),
                size: *radius,
            },
            Obstacle::AxisCube { center, space_diagonal } => ObstacleRecord {
                shape: "axis_cube".into(),
                center: center.iter().copied().collect(),
                size: *space_diagonal,
            },
        }
    }
}

/// Serialized obstacle: `size` is the radius for spheres and the space diagonal for cubes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleRecord {
    pub shape: String,
    pub center: Vec<f64>,
    pub size: f64,
}
