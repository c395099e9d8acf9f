//! Topology generation and per-link geometry.
//!
//! The deployment is a square area tiled by square sectors. One UAV hub
//! hovers over each sector center at a uniformly random height; each sector's
//! SBSs are drawn i.i.d. uniform over the sector footprint. All per-link
//! quantities (lengths, boresight frames, direction angles, elevation angles)
//! are derived from these positions.

use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Cartesian point/vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn unit(self) -> Vec3 {
        self.scale(1.0 / self.norm())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Right-handed orthonormal antenna frame; `z` is the boresight axis.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub x: Vec3,
    pub y: Vec3,
    pub z: Vec3,
}

/// Deployment parameters for [`Topology::generate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologySpec {
    pub area_side_m: f64,
    pub sector_side_m: f64,
    pub sbs_per_sector: usize,
    pub uav_height_min_m: f64,
    pub uav_height_max_m: f64,
    #[serde(default)]
    pub sbs_height_m: f64,
    /// Optional uniform jitter of UAV positions around sector centers.
    #[serde(default)]
    pub uav_center_jitter_m: f64,
}

impl Default for TopologySpec {
    fn default() -> Self {
        Self {
            area_side_m: 5000.0,
            sector_side_m: 1000.0,
            sbs_per_sector: 12,
            uav_height_min_m: 100.0,
            uav_height_max_m: 150.0,
            sbs_height_m: 0.0,
            uav_center_jitter_m: 0.0,
        }
    }
}

impl TopologySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.area_side_m > 0.0 && self.sector_side_m > 0.0) {
            return Err(Error::Config("area and sector sides must be positive".into()));
        }
        let ratio = self.area_side_m / self.sector_side_m;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "sector side {} does not tile area side {}",
                self.sector_side_m, self.area_side_m
            )));
        }
        if self.sbs_per_sector == 0 {
            return Err(Error::Config("need at least one SBS per sector".into()));
        }
        if !(self.uav_height_min_m > self.sbs_height_m
            && self.uav_height_max_m >= self.uav_height_min_m)
        {
            return Err(Error::Config("UAV height range must sit above SBS height".into()));
        }
        Ok(())
    }

    pub fn sectors_per_side(&self) -> usize {
        (self.area_side_m / self.sector_side_m).round() as usize
    }
}

/// A generated deployment: UAV hubs at sector centers, SBSs per sector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Topology {
    pub spec: TopologySpec,
    pub rng_seed: u64,
    pub n_sectors: usize,
    pub uav_positions: Vec<Vec3>,
    /// `sbs_positions[sector][j]`
    pub sbs_positions: Vec<Vec<Vec3>>,
}

impl Topology {
    /// Deterministically generate a topology from a seed. Sector order is
    /// row-major over the grid; per sector the UAV height is drawn first,
    /// then the SBS coordinates in index order.
    pub fn generate(spec: &TopologySpec, seed: u64) -> Result<Topology> {
        spec.validate()?;
        let k = spec.sectors_per_side();
        let n_sectors = k * k;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let side = spec.sector_side_m;
        let mut uav_positions = Vec::with_capacity(n_sectors);
        let mut sbs_positions = Vec::with_capacity(n_sectors);
        for a in 0..k {
            for b in 0..k {
                let cx = side / 2.0 + side * a as f64;
                let cy = side / 2.0 + side * b as f64;
                let h = rng.gen_range(spec.uav_height_min_m..=spec.uav_height_max_m);
                let (jx, jy) = if spec.uav_center_jitter_m > 0.0 {
                    let j = spec.uav_center_jitter_m;
                    (rng.gen_range(-j..=j), rng.gen_range(-j..=j))
                } else {
                    (0.0, 0.0)
                };
                uav_positions.push(Vec3::new(cx + jx, cy + jy, h));
                let mut sbs = Vec::with_capacity(spec.sbs_per_sector);
                for _ in 0..spec.sbs_per_sector {
                    let x = cx - side / 2.0 + rng.gen_range(0.0..side);
                    let y = cy - side / 2.0 + rng.gen_range(0.0..side);
                    sbs.push(Vec3::new(x, y, spec.sbs_height_m));
                }
                sbs_positions.push(sbs);
            }
        }
        let topo = Topology { spec: spec.clone(), rng_seed: seed, n_sectors, uav_positions, sbs_positions };
        topo.validate()?;
        Ok(topo)
    }

    /// Index of the central sector (the victim uplink's sector).
    pub fn center_sector(&self) -> usize {
        self.n_sectors / 2
    }

    pub fn total_sbs(&self) -> usize {
        self.n_sectors * self.spec.sbs_per_sector
    }

    /// Axis-aligned bounds `(x0, y0, x1, y1)` of a sector footprint.
    pub fn sector_bounds(&self, sector: usize) -> (f64, f64, f64, f64) {
        let k = self.spec.sectors_per_side();
        let side = self.spec.sector_side_m;
        let a = sector / k;
        let b = sector % k;
        (side * a as f64, side * b as f64, side * (a + 1) as f64, side * (b + 1) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sectors != self.uav_positions.len() || self.n_sectors != self.sbs_positions.len()
        {
            return Err(Error::Config("sector count inconsistent with position arrays".into()));
        }
        for (s, list) in self.sbs_positions.iter().enumerate() {
            if list.len() != self.spec.sbs_per_sector {
                return Err(Error::Config(format!("sector {s} has {} SBSs", list.len())));
            }
            let (x0, y0, x1, y1) = self.sector_bounds(s);
            for p in list {
                if !p.is_finite() || p.x < x0 || p.x > x1 || p.y < y0 || p.y > y1 {
                    return Err(Error::Config(format!("SBS {p:?} outside sector {s} bounds")));
                }
            }
        }
        for u in &self.uav_positions {
            if !u.is_finite() {
                return Err(Error::Config("non-finite UAV position".into()));
            }
        }
        Ok(())
    }

    /// Write the topology to a TOML file (positions in meters, plus the seed
    /// and deployment dimensions, so experiments replay exactly).
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self)
            .map_err(|e| Error::Config(format!("topology serialization: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Topology> {
        let text = std::fs::read_to_string(path)?;
        let topo: Topology =
            toml::from_str(&text).map_err(|e| Error::Config(format!("topology parse: {e}")))?;
        topo.validate()?;
        Ok(topo)
    }
}

/// Orthonormal boresight frame with `z` pointing from `from` toward `to`.
/// `x` is the global x-axis projected onto the plane normal to `z`
/// (falling back to the global y-axis when `z` is nearly parallel to x).
pub fn boresight_frame(from: Vec3, to: Vec3) -> Result<Frame> {
    let d = to.sub(from);
    let len = d.norm();
    if !(len > 0.0) || !d.is_finite() {
        return Err(Error::DegenerateGeometry("coincident frame endpoints".into()));
    }
    let z = d.scale(1.0 / len);
    let seed = if z.x.abs() > 1.0 - 1e-9 {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(1.0, 0.0, 0.0)
    };
    let x = seed.sub(z.scale(seed.dot(z))).unit();
    let y = z.cross(x);
    Ok(Frame { x, y, z })
}

/// Direction angles of `target` as seen from `origin` in `frame`:
/// `theta_x = atan2(v·x, v·z)`, `theta_y = atan2(v·y, v·z)`. Targets behind
/// the antenna plane (`v·z <= 0`) yield angles of magnitude >= pi/2 and are
/// flagged.
#[derive(Debug, Clone, Copy)]
pub struct DirectionAngles {
    pub theta_x: f64,
    pub theta_y: f64,
    pub back_hemisphere: bool,
}

pub fn direction_angles(frame: &Frame, target: Vec3, origin: Vec3) -> Result<DirectionAngles> {
    let d = target.sub(origin);
    let len = d.norm();
    if !(len > 0.0) || !d.is_finite() {
        return Err(Error::DegenerateGeometry("target coincides with origin".into()));
    }
    let v = d.scale(1.0 / len);
    let vz = v.dot(frame.z);
    Ok(DirectionAngles {
        theta_x: v.dot(frame.x).atan2(vz),
        theta_y: v.dot(frame.y).atan2(vz),
        back_hemisphere: vz <= 0.0,
    })
}

/// Elevation angle of `uav` above the horizon at `sbs`; pi/2 when the nodes
/// are horizontally coincident.
pub fn elevation_angle(sbs: Vec3, uav: Vec3) -> f64 {
    let dh = uav.z - sbs.z;
    let horiz = ((uav.x - sbs.x).powi(2) + (uav.y - sbs.y).powi(2)).sqrt();
    if horiz < 1e-12 {
        PI / 2.0
    } else {
        (dh / horiz).atan()
    }
}

pub fn link_length(a: Vec3, b: Vec3) -> f64 {
    b.sub(a).norm()
}

/// `(theta, phi)` of a direction-angle pair: `theta = atan(sqrt(tan^2 x + tan^2 y))`,
/// `phi = atan2(tan y, tan x)`.
pub fn polar_from_direction_angles(theta_x: f64, theta_y: f64) -> (f64, f64) {
    let (tx, ty) = (theta_x.tan(), theta_y.tan());
    ((tx * tx + ty * ty).sqrt().atan(), ty.atan2(tx))
}
