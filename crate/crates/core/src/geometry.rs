//! Hexagonal multi-site layout, sectorisation, RIS placement, geographic
//! wraparound and user dropping.
//!
//! Sites sit on a hexagonal lattice whose nearest neighbours are at azimuths
//! 30° + k·60°, so each site's hexagon has its vertices at k·60° and its edge
//! midpoints (distance ISD/2) at 30° + k·60°. With sector boresights at
//! {30°, 150°, 270°} every sector's RIS lands on the midpoint of the cell edge
//! it looks at.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::Stream;

pub const SECTOR_BORESIGHTS_DEG: [f64; 3] = [30.0, 150.0, 270.0];
pub const DEFAULT_BS_HEIGHT: f64 = 25.0;
pub const DEFAULT_RIS_HEIGHT: f64 = 10.0;
pub const DEFAULT_UT_HEIGHT: f64 = 1.5;
pub const DEFAULT_MIN_BS_DIST: f64 = 35.0;
pub const DEFAULT_DOWNTILT_DEG: f64 = 12.0;

const HALF_SECTOR_DEG: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    /// Height above ground.
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Position3D { x, y, z }
    }

    pub fn translated(&self, offset: [f64; 2]) -> Self {
        Position3D::new(self.x + offset[0], self.y + offset[1], self.z)
    }

    pub fn distance_2d(&self, other: &Position3D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_3d(&self, other: &Position3D) -> f64 {
        let dz = self.z - other.z;
        (self.distance_2d(other).powi(2) + dz * dz).sqrt()
    }

    /// Unit vector pointing from `self` towards `other`.
    pub fn direction_to(&self, other: &Position3D) -> [f64; 3] {
        let d = [other.x - self.x, other.y - self.y, other.z - self.z];
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if n == 0.0 {
            [1.0, 0.0, 0.0]
        } else {
            [d[0] / n, d[1] / n, d[2] / n]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub site_id: usize,
    pub sector_id: usize,
    pub bs_position: Position3D,
    pub boresight_azimuth: f64,
    pub downtilt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisPlacement {
    pub site_id: usize,
    pub sector_id: usize,
    pub position: Position3D,
    /// Faces the serving BS: sector boresight + 180°.
    pub boresight_azimuth: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    pub isd: f64,
    pub num_rings: usize,
    pub sites: Vec<[f64; 2]>,
    pub sectors: Vec<Sector>,
    pub ris: Vec<RisPlacement>,
    /// Zero vector first, then the lattice translations of the whole cluster.
    pub wrap_offsets: Vec<[f64; 2]>,
}

impl NetworkLayout {
    /// Vertex radius of a site hexagon, which is also the farthest a point of
    /// any sector can be from its BS.
    pub fn cell_radius(&self) -> f64 {
        self.isd / 3f64.sqrt()
    }

    /// Radius of the arc the RIS is placed on (BS to RIS distance).
    pub fn sector_radius(&self) -> f64 {
        self.isd / 2.0
    }

    pub fn sites_count(&self) -> usize {
        self.sites.len()
    }
}

// Axial lattice coordinates: (1,0) points at 30°, (0,1) at 90°.
fn axial_to_xy(q: i64, r: i64, isd: f64) -> [f64; 2] {
    let (s30, c30) = 30f64.to_radians().sin_cos();
    [isd * q as f64 * c30, isd * (q as f64 * s30 + r as f64)]
}

fn hex_distance(q: i64, r: i64) -> i64 {
    (q.abs() + r.abs() + (q + r).abs()) / 2
}

pub fn build_hex_layout(isd: f64, num_rings: usize) -> Result<NetworkLayout> {
    build_hex_layout_with(isd, num_rings, DEFAULT_BS_HEIGHT, DEFAULT_DOWNTILT_DEG)
}

pub fn build_hex_layout_with(
    isd: f64,
    num_rings: usize,
    bs_height: f64,
    downtilt: f64,
) -> Result<NetworkLayout> {
    if !(isd > 0.0 && isd.is_finite()) {
        return Err(Error::invalid(format!("isd must be positive, got {isd}")));
    }
    if !(bs_height >= 0.0) {
        return Err(Error::invalid(format!("bs height must be >= 0, got {bs_height}")));
    }
    let rings = num_rings as i64;
    let mut axial: Vec<(i64, i64)> = Vec::new();
    for q in -rings..=rings {
        for r in -rings..=rings {
            if hex_distance(q, r) <= rings {
                axial.push((q, r));
            }
        }
    }
    // Ring by ring, counter-clockwise from 30°.
    axial.sort_by(|a, b| {
        let key = |&(q, r): &(i64, i64)| {
            let p = axial_to_xy(q, r, 1.0);
            let ang = (p[1].atan2(p[0]) - 30f64.to_radians()).rem_euclid(std::f64::consts::TAU);
            (hex_distance(q, r), ang)
        };
        let (da, aa) = key(a);
        let (db, ab) = key(b);
        da.cmp(&db).then(aa.total_cmp(&ab))
    });

    let sites: Vec<[f64; 2]> = axial.iter().map(|&(q, r)| axial_to_xy(q, r, isd)).collect();
    let sectors = sites
        .iter()
        .enumerate()
        .flat_map(|(site_id, p)| {
            SECTOR_BORESIGHTS_DEG
                .iter()
                .enumerate()
                .map(move |(sector_id, &b)| Sector {
                    site_id,
                    sector_id,
                    bs_position: Position3D::new(p[0], p[1], bs_height),
                    boresight_azimuth: b,
                    downtilt,
                })
        })
        .collect();

    let mut wrap_offsets = vec![[0.0, 0.0]];
    if rings >= 1 {
        // Cluster translation (2R+1, -R); rotating by 60° maps (q, r) -> (-r, q + r).
        let (mut q, mut r) = (2 * rings + 1, -rings);
        for _ in 0..6 {
            wrap_offsets.push(axial_to_xy(q, r, isd));
            (q, r) = (-r, q + r);
        }
    }

    Ok(NetworkLayout {
        isd,
        num_rings,
        sites,
        sectors,
        ris: Vec::new(),
        wrap_offsets,
    })
}

/// Puts one RIS per sector on the sector boresight at ISD/2 from the BS,
/// facing back towards it.
pub fn place_ris(layout: &NetworkLayout, ris_height: f64) -> NetworkLayout {
    let half = layout.isd / 2.0;
    let ris = layout
        .sectors
        .iter()
        .map(|s| {
            let (sin_b, cos_b) = s.boresight_azimuth.to_radians().sin_cos();
            RisPlacement {
                site_id: s.site_id,
                sector_id: s.sector_id,
                position: Position3D::new(
                    s.bs_position.x + half * cos_b,
                    s.bs_position.y + half * sin_b,
                    ris_height,
                ),
                boresight_azimuth: (s.boresight_azimuth + 180.0).rem_euclid(360.0),
                height: ris_height,
            }
        })
        .collect();
    NetworkLayout {
        ris,
        ..layout.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrapDistance {
    pub distance_2d: f64,
    pub distance_3d: f64,
    /// Translation applied to `b` to obtain the nearest image.
    pub offset: [f64; 2],
}

/// Distance from `a` to the nearest wraparound image of `b`.
pub fn wrap_distance(layout: &NetworkLayout, a: &Position3D, b: &Position3D) -> WrapDistance {
    let mut best: Option<WrapDistance> = None;
    for &o in &layout.wrap_offsets {
        let img = b.translated(o);
        let d2 = a.distance_2d(&img);
        if best.map_or(true, |w| d2 < w.distance_2d) {
            best = Some(WrapDistance {
                distance_2d: d2,
                distance_3d: a.distance_3d(&img),
                offset: o,
            });
        }
    }
    best.expect("wrap_offsets always holds the zero vector")
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    pub positions: Vec<Position3D>,
    /// Sector whose footprint each user was dropped in.
    pub drop_sector: Vec<usize>,
    /// Filled by the engine after attachment.
    pub serving_sector: Vec<Option<usize>>,
    pub per_sector_count: usize,
}

// Hexagon with unit vertex radius: inside iff every edge-normal projection is
// within the apothem.
fn inside_unit_hexagon(u: f64, v: f64) -> bool {
    let apothem = 3f64.sqrt() / 2.0;
    (0..6).all(|k| {
        let (s, c) = (30.0 + 60.0 * k as f64).to_radians().sin_cos();
        u * c + v * s <= apothem
    })
}

fn within_sector_wedge(u: f64, v: f64, boresight_deg: f64) -> bool {
    let (s, c) = boresight_deg.to_radians().sin_cos();
    let norm = u.hypot(v);
    norm > 0.0 && u * c + v * s >= HALF_SECTOR_DEG.to_radians().cos() * norm
}

/// Drops `per_sector` users uniformly over each sector's footprint (the 120°
/// wedge of its site hexagon), rejecting points closer than `min_bs_dist` to
/// the BS.
pub fn drop_users(
    layout: &NetworkLayout,
    per_sector: usize,
    min_bs_dist: f64,
    ut_height: f64,
    rng: &mut Stream,
) -> Result<UserDrop> {
    if per_sector == 0 {
        return Err(Error::invalid("per_sector must be >= 1"));
    }
    let radius = layout.cell_radius();
    if !(min_bs_dist >= 0.0) || min_bs_dist >= radius {
        return Err(Error::invalid(format!(
            "min_bs_dist {min_bs_dist} m is infeasible for footprint radius {radius:.3} m"
        )));
    }
    let min_unit = min_bs_dist / radius;
    let mut positions = Vec::with_capacity(per_sector * layout.sectors.len());
    let mut drop_sector = Vec::with_capacity(positions.capacity());
    for (idx, sector) in layout.sectors.iter().enumerate() {
        for _ in 0..per_sector {
            let (u, v) = loop {
                let u = rng.random_range(-1.0..1.0);
                let v = rng.random_range(-1.0..1.0);
                if inside_unit_hexagon(u, v)
                    && within_sector_wedge(u, v, sector.boresight_azimuth)
                    && u.hypot(v) >= min_unit
                {
                    break (u, v);
                }
            };
            positions.push(Position3D::new(
                sector.bs_position.x + radius * u,
                sector.bs_position.y + radius * v,
                ut_height,
            ));
            drop_sector.push(idx);
        }
    }
    let n = positions.len();
    Ok(UserDrop {
        positions,
        drop_sector,
        serving_sector: vec![None; n],
        per_sector_count: per_sector,
    })
}

/// Distance from the BS to the site-hexagon boundary along azimuth `deg`.
fn boundary_distance(isd: f64, deg: f64) -> f64 {
    let (s, c) = deg.to_radians().sin_cos();
    let apothem = isd / 2.0;
    (0..6)
        .filter_map(|k| {
            let (ns, nc) = (30.0 + 60.0 * k as f64).to_radians().sin_cos();
            let proj = c * nc + s * ns;
            (proj > 1e-12).then(|| apothem / proj)
        })
        .fold(f64::INFINITY, f64::min)
}

/// For RIS candidates on the placement arc (radius ISD/2) at angular offset
/// δ from the boresight of sector 0 of site 0, the largest distance from the
/// candidate to any point of the sector.
///
/// The sector boundary is sampled at 1° resolution along rays from the BS,
/// plus the BS itself.
pub fn placement_coverage_scan(
    layout: &NetworkLayout,
    arc_offsets: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let sector = layout
        .sectors
        .first()
        .ok_or_else(|| Error::invalid("layout has no sectors"))?;
    let b = sector.boresight_azimuth;
    let o = sector.bs_position;
    let mut boundary = vec![(o.x, o.y)];
    for step in -(HALF_SECTOR_DEG as i32)..=(HALF_SECTOR_DEG as i32) {
        let ang = b + step as f64;
        let t = boundary_distance(layout.isd, ang);
        let (s, c) = ang.to_radians().sin_cos();
        boundary.push((o.x + t * c, o.y + t * s));
    }
    let arc = layout.sector_radius();
    arc_offsets
        .iter()
        .map(|&delta| {
            if delta.abs() > HALF_SECTOR_DEG {
                return Err(Error::invalid(format!(
                    "arc offset {delta}° outside ±{HALF_SECTOR_DEG}°"
                )));
            }
            let (s, c) = (b + delta).to_radians().sin_cos();
            let (px, py) = (o.x + arc * c, o.y + arc * s);
            let far = boundary
                .iter()
                .map(|&(x, y)| (x - px).hypot(y - py))
                .fold(0.0, f64::max);
            Ok((delta, far))
        })
        .collect()
}
