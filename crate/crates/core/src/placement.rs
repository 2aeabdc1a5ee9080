//! Transmitter configurations on a disc and the geometry statistics used by the bounds.

use crate::error::{ensure_positive, param, Error, Result};
use crate::point::Point;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementKind {
    HexGrid,
    Poisson,
    HardCoreMatern2,
    Explicit,
}

impl PlacementKind {
    pub fn is_random(self) -> bool {
        matches!(self, PlacementKind::Poisson | PlacementKind::HardCoreMatern2)
    }
}

/// A finite configuration inside the closed disc of radius `disc_radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig {
    pub points: Vec<Point>,
    pub disc_radius: f64,
    pub kind: PlacementKind,
    /// Target intensity for generated configurations, realized intensity otherwise.
    pub intensity: f64,
    /// Hard-core distance for Matérn II configurations.
    pub hard_core: Option<f64>,
}

impl PointConfig {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn realized_intensity(&self) -> f64 {
        self.points.len() as f64 / (PI * self.disc_radius * self.disc_radius)
    }
}

/// Nearest-neighbour distance of the hexagonal lattice with cell area `1/κ`.
pub fn hex_spacing(kappa: f64) -> f64 {
    (2.0 / (3f64.sqrt() * kappa)).sqrt()
}

/// Hexagonal lattice of intensity `kappa` restricted to the disc of radius `c`.
///
/// The lattice is shifted so the origin sits at the centroid of a lattice
/// triangle; the nearest transmitters are then at distance `a/√3`.
pub fn gen_hex_grid(kappa: f64, c: f64) -> Result<PointConfig> {
    ensure_positive("kappa", kappa)?;
    ensure_positive("C", c)?;
    let a = hex_spacing(kappa);
    let h = a * 3f64.sqrt() / 2.0;
    let (ox, oy) = (a / 2.0, a / (2.0 * 3f64.sqrt()));
    let jmax = (c / h).ceil() as i64 + 2;
    let c2 = c * c;
    let mut points = Vec::new();
    for j in -jmax..=jmax {
        let y = h * j as f64 + oy;
        if y.abs() > c + a {
            continue;
        }
        let shift = j as f64 / 2.0;
        let imin = ((-c - ox) / a - shift).floor() as i64 - 1;
        let imax = ((c - ox) / a - shift).ceil() as i64 + 1;
        for i in imin..=imax {
            let p = Point::new(a * (i as f64 + shift) + ox, y);
            if p.norm_sq() <= c2 {
                points.push(p);
            }
        }
    }
    Ok(PointConfig { points, disc_radius: c, kind: PlacementKind::HexGrid, intensity: kappa, hard_core: None })
}

fn uniform_in_disc<R: Rng + ?Sized>(c: f64, rng: &mut R) -> Point {
    loop {
        let r = c * rng.random::<f64>().sqrt();
        let a = 2.0 * PI * rng.random::<f64>();
        if r > 0.0 {
            return Point::new(r * a.cos(), r * a.sin());
        }
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| param("kappa", e.to_string()))?;
    Ok(dist.sample(rng) as usize)
}

/// Homogeneous Poisson process of intensity `kappa` on the disc of radius `c`.
pub fn gen_poisson<R: Rng + ?Sized>(kappa: f64, c: f64, rng: &mut R) -> Result<PointConfig> {
    ensure_positive("kappa", kappa)?;
    if !(c >= 0.0) {
        return Err(param("C", format!("must be non-negative, got {c}")));
    }
    let n = poisson_count(kappa * PI * c * c, rng)?;
    let points = (0..n).map(|_| uniform_in_disc(c, rng)).collect();
    Ok(PointConfig { points, disc_radius: c, kind: PlacementKind::Poisson, intensity: kappa, hard_core: None })
}

/// Intensity of Matérn II thinning of a Poisson process with intensity `kappa_parent`.
pub fn matern2_intensity(kappa_parent: f64, eps: f64) -> f64 {
    let area = PI * eps * eps;
    -(-kappa_parent * area).exp_m1() / area
}

/// Parent intensity giving the retained intensity `kappa`; needs `κπε² < 1`.
pub fn matern2_parent_intensity(kappa: f64, eps: f64) -> Result<f64> {
    let x = kappa * PI * eps * eps;
    if !(x < 1.0) {
        return Err(param(
            "intensity",
            format!("Matérn II intensity is below 1/(πε²) = {}, got {kappa}", 1.0 / (PI * eps * eps)),
        ));
    }
    Ok(-(-x).ln_1p() / (PI * eps * eps))
}

/// Matérn type II hard-core process on the disc of radius `c`.
///
/// Parents come from a Poisson process of intensity `kappa_parent` on the disc
/// of radius `c + eps` with uniform marks; a parent survives when its mark is
/// strictly the smallest among parents within distance `eps`.
pub fn gen_hardcore_matern2<R: Rng + ?Sized>(
    kappa_parent: f64,
    eps: f64,
    c: f64,
    rng: &mut R,
) -> Result<PointConfig> {
    ensure_positive("kappa_parent", kappa_parent)?;
    ensure_positive("eps_star", eps)?;
    ensure_positive("C", c)?;
    let big = c + eps;
    let n = poisson_count(kappa_parent * PI * big * big, rng)?;
    let parents: Vec<Point> = (0..n).map(|_| uniform_in_disc(big, rng)).collect();
    let marks: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let index = GridIndex::new(&parents, eps);
    let c2 = c * c;
    let mut points = Vec::new();
    for (i, &p) in parents.iter().enumerate() {
        if p.norm_sq() > c2 {
            continue;
        }
        let key = (marks[i], i);
        let mut keep = true;
        index.for_each_within(p, eps, |j, _| {
            if j != i && (marks[j], j) < key {
                keep = false;
            }
        });
        if keep {
            points.push(p);
        }
    }
    Ok(PointConfig {
        points,
        disc_radius: c,
        kind: PlacementKind::HardCoreMatern2,
        intensity: matern2_intensity(kappa_parent, eps),
        hard_core: Some(eps),
    })
}

/// Wraps a user-supplied point list. The disc radius defaults to the largest norm.
pub fn explicit(points: Vec<Point>, disc_radius: Option<f64>) -> Result<PointConfig> {
    for (i, p) in points.iter().enumerate() {
        if !(p.x.is_finite() && p.y.is_finite()) {
            return Err(param("points", format!("point {i} is not finite")));
        }
        if p.norm() == 0.0 {
            return Err(param("points", format!("point {i} lies at the origin")));
        }
    }
    let rmax = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let c = disc_radius.unwrap_or(rmax);
    if rmax > c {
        return Err(param("C", format!("point at distance {rmax} lies outside the disc of radius {c}")));
    }
    let intensity = if c > 0.0 { points.len() as f64 / (PI * c * c) } else { 0.0 };
    Ok(PointConfig { points, disc_radius: c, kind: PlacementKind::Explicit, intensity, hard_core: None })
}

/// Parses one point per line (`x y` or `x,y`); `#` starts a comment.
pub fn parse_points(text: &str) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if fields.len() != 2 {
            return Err(Error::Parse { line: n + 1, reason: format!("expected 2 coordinates, found {}", fields.len()) });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse { line: n + 1, reason: format!("`{s}`: {e}") })
        };
        out.push(Point::new(parse(fields[0])?, parse(fields[1])?));
    }
    Ok(out)
}

pub fn read_points_file(path: &Path) -> Result<Vec<Point>> {
    parse_points(&std::fs::read_to_string(path)?)
}

/// Geometry summaries of a configuration at interaction radius `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryStats {
    /// Smallest distance from the origin.
    pub d_star: f64,
    /// Smallest pairwise distance; infinite for fewer than two points.
    pub eps_min: f64,
    /// Largest count of a closed ball of radius `2R` centred at a configuration point.
    pub t_upper: usize,
    /// Largest count of a closed ball of radius `R` centred at a configuration point.
    pub t_lower: usize,
}

pub fn geometry_stats(config: &PointConfig, big_r: f64) -> Result<GeometryStats> {
    if config.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    ensure_positive("R", big_r)?;
    let pts = &config.points;
    let d_star = pts.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
    let eps_min = min_pairwise_distance(pts);
    let max_count = |radius: f64| {
        let index = GridIndex::new(pts, radius);
        pts.iter().map(|&p| index.count_within(p, radius)).max().unwrap_or(0)
    };
    Ok(GeometryStats { d_star, eps_min, t_upper: max_count(2.0 * big_r), t_lower: max_count(big_r) })
}

/// Smallest pairwise distance by a sweep over x-sorted points.
pub fn min_pairwise_distance(points: &[Point]) -> f64 {
    let mut sorted: Vec<Point> = points.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut best = f64::INFINITY;
    for i in 0..sorted.len() {
        for j in (i + 1)..sorted.len() {
            if sorted[j].x - sorted[i].x >= best {
                break;
            }
            best = best.min(sorted[i].dist(sorted[j]));
        }
    }
    best
}

/// Counts of the closed ball `B̄(center, R)` and of the annuli
/// `R + (k−1)√3R < ‖x − center‖ ≤ R + k√3R`, `k = 1, 2, …`, out to the disc boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnulusCounts {
    pub inner: usize,
    /// `annuli[k - 1]` is the count of annulus `k`.
    pub annuli: Vec<usize>,
}

pub fn annulus_counts(config: &PointConfig, center: Point, big_r: f64) -> Result<AnnulusCounts> {
    ensure_positive("R", big_r)?;
    let width = 3f64.sqrt() * big_r;
    let reach = center.norm() + config.disc_radius;
    let k_max = ((reach - big_r) / width).ceil().max(0.0) as usize;
    let mut annuli = vec![0usize; k_max];
    let mut inner = 0;
    for p in &config.points {
        let r = p.dist(center);
        if r <= big_r {
            inner += 1;
        } else {
            let k = ((r - big_r) / width).ceil().max(1.0) as usize;
            if k > annuli.len() {
                annuli.resize(k, 0);
            }
            annuli[k - 1] += 1;
        }
    }
    Ok(AnnulusCounts { inner, annuli })
}

/// Uniform bucket grid for fixed-radius neighbour queries.
pub(crate) struct GridIndex<'a> {
    points: &'a [Point],
    x0: f64,
    y0: f64,
    h: f64,
    nx: usize,
    ny: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

const MAX_CELLS_PER_AXIS: f64 = 1024.0;

impl<'a> GridIndex<'a> {
    pub(crate) fn new(points: &'a [Point], cell: f64) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        if points.is_empty() {
            (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        let extent = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
        let h = cell.max(extent / MAX_CELLS_PER_AXIS).max(f64::MIN_POSITIVE);
        let nx = ((x1 - x0) / h).floor() as usize + 1;
        let ny = ((y1 - y0) / h).floor() as usize + 1;
        let mut counts = vec![0u32; nx * ny + 1];
        let cell_of = |p: &Point| {
            let cx = (((p.x - x0) / h) as usize).min(nx - 1);
            let cy = (((p.y - y0) / h) as usize).min(ny - 1);
            cy * nx + cx
        };
        for p in points {
            counts[cell_of(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let c = cell_of(p);
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        GridIndex { points, x0, y0, h, nx, ny, start: counts, items }
    }

    /// Calls `f(index, squared distance)` for every point with `‖p − q‖ ≤ r`.
    pub(crate) fn for_each_within<F: FnMut(usize, f64)>(&self, q: Point, r: f64, mut f: F) {
        if self.points.is_empty() {
            return;
        }
        let lo = |v: f64, o: f64| (((v - r - o) / self.h).floor().max(0.0)) as usize;
        let hi = |v: f64, o: f64, n: usize| {
            let c = ((v + r - o) / self.h).floor();
            if c < 0.0 {
                None
            } else {
                Some((c as usize).min(n - 1))
            }
        };
        let (Some(cx1), Some(cy1)) = (hi(q.x, self.x0, self.nx), hi(q.y, self.y0, self.ny)) else {
            return;
        };
        let (cx0, cy0) = (lo(q.x, self.x0), lo(q.y, self.y0));
        let r2 = r * r;
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                let c = cy * self.nx + cx;
                for &i in &self.items[self.start[c] as usize..self.start[c + 1] as usize] {
                    let d2 = self.points[i as usize].dist_sq(q);
                    if d2 <= r2 {
                        f(i as usize, d2);
                    }
                }
            }
        }
    }

    pub(crate) fn count_within(&self, q: Point, r: f64) -> usize {
        let mut n = 0;
        self.for_each_within(q, r, |_, _| n += 1);
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_index_agrees_with_brute_force() {
        let pts: Vec<Point> = (0..300)
            .map(|i| {
                let t = i as f64 * 0.618_034;
                Point::new((t * 7.3).sin() * 5.0, (t * 3.1).cos() * 4.0)
            })
            .collect();
        for &r in &[0.05, 0.4, 1.3, 20.0] {
            let index = GridIndex::new(&pts, r);
            for q in pts.iter().step_by(17) {
                let brute = pts.iter().filter(|p| p.dist_sq(*q) <= r * r).count();
                assert_eq!(index.count_within(*q, r), brute);
            }
        }
    }

    #[test]
    fn points_parse_with_comments_and_commas() {
        let pts = parse_points("# header\n1 2\n  3.5,-4 # trailing\n\n").unwrap();
        assert_eq!(pts, vec![Point::new(1.0, 2.0), Point::new(3.5, -4.0)]);
        assert!(matches!(parse_points("1 2 3"), Err(Error::Parse { line: 1, .. })));
    }
}
