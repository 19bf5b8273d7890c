//! Geometry of the unit sphere S².

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::domain;
use crate::math;
use crate::Result;

/// A point on S² in Cartesian coordinates.
///
/// Constructors normalise their input, so `x² + y² + z² = 1` holds to
/// rounding for every value of this type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector {
    x: f64,
    y: f64,
    z: f64,
}

/// Colatitude `theta ∈ [0, π]` and longitude `phi ∈ [0, 2π)`, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalAngles {
    theta: f64,
    phi: f64,
}

impl SphericalAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(domain!("colatitude {theta} outside [0, π]"));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(domain!("longitude {phi} outside [0, 2π)"));
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

impl UnitVector {
    pub const NORTH: UnitVector = UnitVector { x: 0.0, y: 0.0, z: 1.0 };
    pub const SOUTH: UnitVector = UnitVector { x: 0.0, y: 0.0, z: -1.0 };

    /// Normalises `(x, y, z)`; fails on the zero vector or non-finite input.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = math::sqrt(x * x + y * y + z * z);
        if !norm.is_finite() || norm == 0.0 {
            return Err(domain!("cannot normalise ({x}, {y}, {z})"));
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Accepts `(x, y, z)` whose norm is within `tolerance` of one and
    /// renormalises it.
    pub fn with_tolerance(x: f64, y: f64, z: f64, tolerance: f64) -> Result<Self> {
        let norm = math::sqrt(x * x + y * y + z * z);
        if !((norm - 1.0).abs() <= tolerance) {
            return Err(domain!(
                "point ({x}, {y}, {z}) has norm {norm}, not within {tolerance} of 1"
            ));
        }
        Self::normalized(x, y, z)
    }

    pub fn from_angles(angles: SphericalAngles) -> Self {
        let (st, ct) = (math::sin(angles.theta), math::cos(angles.theta));
        let (sp, cp) = (math::sin(angles.phi), math::cos(angles.phi));
        // sin²θ(cos²φ + sin²φ) + cos²θ is 1 only up to rounding; renormalise.
        let (x, y, z) = (st * cp, st * sp, ct);
        let norm = math::sqrt(x * x + y * y + z * z);
        Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        }
    }

    /// Inverse of [`UnitVector::from_angles`]. At the poles the longitude is 0.
    pub fn angles(&self) -> SphericalAngles {
        let theta = math::acos(self.z.clamp(-1.0, 1.0));
        let mut phi = math::atan2(self.y, self.x);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        SphericalAngles { theta, phi }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Some unit vector orthogonal to `self`.
    pub fn orthogonal(&self) -> UnitVector {
        // Cross with the coordinate axis least aligned with self.
        let (ax, ay, az) = (self.x.abs(), self.y.abs(), self.z.abs());
        let (cx, cy, cz) = if ax <= ay && ax <= az {
            (0.0, self.z, -self.y)
        } else if ay <= az {
            (-self.z, 0.0, self.x)
        } else {
            (self.y, -self.x, 0.0)
        };
        UnitVector::normalized(cx, cy, cz).expect("non-zero cross product")
    }

    /// The point at geodesic distance `angle` from `self` along the great
    /// circle through `self` heading towards the tangent `direction`.
    pub fn towards(&self, direction: &UnitVector, angle: f64) -> UnitVector {
        let (s, c) = (math::sin(angle), math::cos(angle));
        UnitVector::normalized(
            c * self.x + s * direction.x,
            c * self.y + s * direction.y,
            c * self.z + s * direction.z,
        )
        .expect("rotation of a unit vector is non-zero")
    }
}

/// `(sin θ cos φ, sin θ sin φ, cos θ)` for validated angles.
pub fn point_from_angles(theta: f64, phi: f64) -> Result<UnitVector> {
    Ok(UnitVector::from_angles(SphericalAngles::new(theta, phi)?))
}

/// Great-circle distance `arccos(s·t)` in `[0, π]`.
pub fn geodesic_distance(s: &UnitVector, t: &UnitVector) -> f64 {
    math::acos(s.dot(t).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridLayout {
    /// `n_theta` rings at colatitudes `(i + ½)π/n_theta`, each with `n_phi`
    /// points at longitudes `2πk/n_phi`; row-major in theta then phi.
    Equirectangular { n_theta: usize, n_phi: usize },
    /// An arbitrary list of points.
    List,
}

/// An ordered set of points at which fields are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    points: Vec<UnitVector>,
    layout: GridLayout,
}

impl EvalGrid {
    pub fn equirectangular(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(domain!("grid dimensions must be positive, got {n_theta}x{n_phi}"));
        }
        let mut points = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let theta = (i as f64 + 0.5) * PI / n_theta as f64;
            for k in 0..n_phi {
                let phi = 2.0 * PI * k as f64 / n_phi as f64;
                points.push(UnitVector::from_angles(SphericalAngles { theta, phi }));
            }
        }
        Ok(Self {
            points,
            layout: GridLayout::Equirectangular { n_theta, n_phi },
        })
    }

    pub fn from_points(points: Vec<UnitVector>) -> Self {
        Self {
            points,
            layout: GridLayout::List,
        }
    }

    /// `n` nearly uniformly spread points on the golden-angle spiral.
    pub fn fibonacci(n: usize) -> Self {
        let golden = PI * (3.0 - math::sqrt(5.0));
        let points = (0..n)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let r = math::sqrt((1.0 - z * z).max(0.0));
                let phi = golden * i as f64;
                UnitVector::normalized(r * math::cos(phi), r * math::sin(phi), z)
                    .expect("spiral point is non-zero")
            })
            .collect();
        Self::from_points(points)
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn layout(&self) -> GridLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Mesh norm and separation of a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshQuantities {
    /// Largest distance from a probe point to its nearest node (estimate).
    pub mesh_norm: f64,
    /// Smallest pairwise distance between distinct nodes (exact).
    pub min_separation: f64,
}

/// Mesh norm over a Fibonacci probe set of `max(4·n, 4096)` points, and the
/// exact minimum separation.
pub fn mesh_quantities(points: &[UnitVector]) -> Result<MeshQuantities> {
    mesh_quantities_with_probes(points, (4 * points.len()).max(4096))
}

pub fn mesh_quantities_with_probes(points: &[UnitVector], probes: usize) -> Result<MeshQuantities> {
    if points.len() < 2 {
        return Err(domain!("mesh quantities need at least 2 points, got {}", points.len()));
    }
    let mut sorted: Vec<UnitVector> = points.to_vec();
    sorted.sort_by(|a, b| a.z.total_cmp(&b.z));

    // Pairs are only compared while their z-gap is below the best chord.
    let mut best_sq = f64::INFINITY;
    for (i, p) in sorted.iter().enumerate() {
        for q in &sorted[i + 1..] {
            let dz = q.z - p.z;
            if dz * dz >= best_sq {
                break;
            }
            best_sq = best_sq.min(chord_sq(p, q));
        }
    }

    let probe = EvalGrid::fibonacci(probes);
    let mut worst_sq = 0.0f64;
    for s in probe.points() {
        worst_sq = worst_sq.max(nearest_chord_sq(&sorted, s));
    }
    Ok(MeshQuantities {
        mesh_norm: chord_to_angle(worst_sq),
        min_separation: chord_to_angle(best_sq),
    })
}

fn chord_sq(a: &UnitVector, b: &UnitVector) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    dx * dx + dy * dy + dz * dz
}

fn chord_to_angle(sq: f64) -> f64 {
    2.0 * math::asin((0.5 * math::sqrt(sq)).min(1.0))
}

/// Squared chord from `s` to its nearest neighbour in `sorted` (by z).
fn nearest_chord_sq(sorted: &[UnitVector], s: &UnitVector) -> f64 {
    let start = sorted.partition_point(|p| p.z < s.z);
    let mut best = f64::INFINITY;
    let (mut lo, mut hi) = (start, start);
    loop {
        let mut advanced = false;
        if hi < sorted.len() {
            let dz = sorted[hi].z - s.z;
            if dz * dz < best {
                best = best.min(chord_sq(&sorted[hi], s));
                hi += 1;
                advanced = true;
            }
        }
        if lo > 0 {
            let dz = s.z - sorted[lo - 1].z;
            if dz * dz < best {
                best = best.min(chord_sq(&sorted[lo - 1], s));
                lo -= 1;
                advanced = true;
            }
        }
        if !advanced {
            return best;
        }
    }
}
