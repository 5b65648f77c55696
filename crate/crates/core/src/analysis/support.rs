//! Support of the planar phase.
//!
//! Upper particles and their mirrors are smoothed with a Gaussian kernel
//! into a time-averaged density on a square grid. The support is the
//! region where this density exceeds one particle per reference cell of
//! side `3/√n`; its boundary is traced by marching squares. The kernel
//! width is tied to the reference cell, not to the grid, so refining the
//! grid only sharpens the contour.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::SpectralConfiguration;
use crate::error::{Error, Result};

/// Reference cell side in units of `1/√n`.
pub const CELL_FACTOR: f64 = 3.0;
/// Kernel standard deviation as a fraction of the reference cell.
pub const BANDWIDTH_FRACTION: f64 = 0.5;
/// Interior cells lie at least this many reference cells from the boundary.
pub const INTERIOR_MARGIN: f64 = 2.0;
const KERNEL_CUTOFF: f64 = 4.0;
const MIN_PARTICLES: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct SupportEstimate {
    /// The largest component meeting the closed upper half-plane, as a
    /// closed counter-clockwise loop (first point repeated at the end).
    pub boundary_points: Vec<Complex64>,
    /// Every boundary loop, outer loops counter-clockwise and holes
    /// clockwise.
    pub components: Vec<Vec<Complex64>>,
    /// Area enclosed by all loops, both half-planes.
    pub area: f64,
    /// Smallest `|y|` on the boundary of the upper components; zero when a
    /// component crosses the axis.
    pub min_y: f64,
    /// Interquartile range over mean of the density at interior grid
    /// nodes; `NaN` when no node is interior.
    pub flatness: f64,
    pub interior_nodes: usize,
    /// Mean position of the upper particles.
    pub centroid: Complex64,
    /// Smallest imaginary part among all upper particles.
    pub particle_min_y: f64,
    pub cell: f64,
    pub grid_step: f64,
    pub threshold: f64,
}

struct Grid {
    x0: f64,
    y0: f64,
    h: f64,
    nx: usize,
    ny: usize,
    f: Vec<f64>,
}

impl Grid {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.f[j * self.nx + i]
    }

    fn point(&self, i: f64, j: f64) -> Complex64 {
        Complex64::new(self.x0 + i * self.h, self.y0 + j * self.h)
    }
}

/// Support estimate of the planar phase of an ensemble. `grid_resolution`
/// is the number of grid steps per reference cell.
pub fn complex_support(ensemble: &[SpectralConfiguration], grid_resolution: usize) -> Result<SupportEstimate> {
    if ensemble.is_empty() {
        return Err(Error::Degenerate("empty ensemble".into()));
    }
    if grid_resolution == 0 {
        return Err(Error::InvalidParameter("grid resolution must be positive".into()));
    }
    let n = ensemble[0].n();
    if ensemble.iter().any(|c| c.n() != n) {
        return Err(Error::InvalidParameter("ensemble mixes particle counts".into()));
    }
    let uppers: Vec<Complex64> = ensemble.iter().flat_map(|c| c.uppers().iter().copied()).collect();
    let per_snapshot = uppers.len() / ensemble.len();
    if per_snapshot < MIN_PARTICLES {
        return Err(Error::Resolution(format!("{per_snapshot} upper particles per configuration; at least {MIN_PARTICLES} needed")));
    }
    let cell = CELL_FACTOR / (n as f64).sqrt();
    let sigma = BANDWIDTH_FRACTION * cell;
    let h = cell / grid_resolution as f64;
    let threshold = 1.0 / (cell * cell);
    let snapshots = ensemble.len() as f64;

    let reach = KERNEL_CUTOFF * sigma;
    let xmax = uppers.iter().map(|z| z.re.abs()).fold(0.0, f64::max) + reach + 2.0 * h;
    let ymax = uppers.iter().map(|z| z.im).fold(0.0, f64::max) + reach + 2.0 * h;
    let mx = (xmax / h).ceil() as usize;
    let my = (ymax / h).ceil() as usize;
    let (nx, ny) = (2 * mx + 1, 2 * my + 1);
    let mut grid = Grid { x0: -(mx as f64) * h, y0: -(my as f64) * h, h, nx, ny, f: vec![0.0; nx * ny] };

    let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma * snapshots);
    let span = (reach / h).ceil() as isize;
    let inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for z in &uppers {
        for p in [*z, z.conj()] {
            let ci = ((p.re - grid.x0) / h).round() as isize;
            let cj = ((p.im - grid.y0) / h).round() as isize;
            for j in (cj - span).max(0)..=(cj + span).min(ny as isize - 1) {
                let dy = grid.y0 + j as f64 * h - p.im;
                for i in (ci - span).max(0)..=(ci + span).min(nx as isize - 1) {
                    let dx = grid.x0 + i as f64 * h - p.re;
                    grid.f[j as usize * nx + i as usize] += norm * (-(dx * dx + dy * dy) * inv2s2).exp();
                }
            }
        }
    }
    let density = grid.f.clone();
    for v in grid.f.iter_mut() {
        *v -= threshold;
    }

    let components = marching_squares(&grid);
    if components.is_empty() {
        return Err(Error::Resolution("smoothed density never reaches the support threshold".into()));
    }
    let area: f64 = components.iter().map(|l| signed_area(l)).sum();

    let upper_loops: Vec<&Vec<Complex64>> = components.iter().filter(|l| signed_area(l) > 0.0 && l.iter().any(|z| z.im >= 0.0)).collect();
    let boundary_points =
        upper_loops.iter().max_by(|a, b| signed_area(a).total_cmp(&signed_area(b))).map(|l| (*l).clone()).unwrap_or_default();
    let min_y = upper_loops
        .iter()
        .map(|l| if l.iter().any(|z| z.im < 0.0) { 0.0 } else { l.iter().map(|z| z.im).fold(f64::INFINITY, f64::min) })
        .fold(f64::INFINITY, f64::min);

    // interior nodes: inside the support and far from every boundary point
    let boundary: Vec<Complex64> = components.iter().flatten().copied().collect();
    let margin = INTERIOR_MARGIN * cell;
    let mut interior = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if grid.f[k] <= 0.0 {
                continue;
            }
            let p = grid.point(i as f64, j as f64);
            if boundary.iter().all(|b| (b - p).norm_sqr() >= margin * margin) {
                interior.push(density[k]);
            }
        }
    }
    let flatness = if interior.is_empty() {
        f64::NAN
    } else {
        interior.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let x = p * (interior.len() - 1) as f64;
            let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
            interior[lo] + (x - lo as f64) * (interior[hi] - interior[lo])
        };
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        (q(0.75) - q(0.25)) / mean
    };

    let centroid = uppers.iter().sum::<Complex64>() / uppers.len() as f64;
    let particle_min_y = uppers.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    Ok(SupportEstimate {
        boundary_points,
        area,
        min_y: if min_y.is_finite() { min_y } else { 0.0 },
        flatness,
        interior_nodes: interior.len(),
        centroid,
        particle_min_y,
        cell,
        grid_step: h,
        threshold,
        components,
    })
}

fn signed_area(l: &[Complex64]) -> f64 {
    0.5 * l.windows(2).map(|w| w[0].re * w[1].im - w[1].re * w[0].im).sum::<f64>()
}

/// Edge of the grid: `(i, j, false)` joins nodes `(i,j)`–`(i+1,j)`,
/// `(i, j, true)` joins `(i,j)`–`(i,j+1)`.
type EdgeKey = (usize, usize, bool);

/// Closed loops of the zero level set with the positive side on the left.
fn marching_squares(g: &Grid) -> Vec<Vec<Complex64>> {
    let inside = |i: usize, j: usize| g.at(i, j) >= 0.0;
    let crossing = |e: EdgeKey| -> Complex64 {
        let (i, j, vertical) = e;
        let (i1, j1) = if vertical { (i, j + 1) } else { (i + 1, j) };
        let (a, b) = (g.at(i, j), g.at(i1, j1));
        let t = a / (a - b);
        g.point(i as f64 + t * (i1 - i) as f64, j as f64 + t * (j1 - j) as f64)
    };
    let mut next: HashMap<EdgeKey, EdgeKey> = HashMap::new();
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            // corners counter-clockwise from the lower left
            let c = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            let edges: [EdgeKey; 4] = [(i, j, false), (i + 1, j, true), (i, j + 1, false), (i, j, true)];
            let crossed: Vec<usize> = (0..4).filter(|&e| c[e] != c[(e + 1) % 4]).collect();
            let pairs: Vec<(usize, usize)> = match crossed.len() {
                0 => continue,
                2 => vec![(crossed[0], crossed[1])],
                _ => {
                    // saddle: resolve by the mean of the corners
                    let centre = 0.25 * (g.at(i, j) + g.at(i + 1, j) + g.at(i + 1, j + 1) + g.at(i, j + 1));
                    if (centre >= 0.0) == c[0] {
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(3, 0), (1, 2)]
                    }
                }
            };
            let corner = [
                g.point(i as f64, j as f64),
                g.point((i + 1) as f64, j as f64),
                g.point((i + 1) as f64, (j + 1) as f64),
                g.point(i as f64, (j + 1) as f64),
            ];
            for (ea, eb) in pairs {
                let (pa, pb) = (crossing(edges[ea]), crossing(edges[eb]));
                // a corner off the segment: the one shared by adjacent
                // crossed edges, else the first corner of edge `ea`
                let side = if (ea + 1) % 4 == eb { eb } else { ea };
                let d = pb - pa;
                let r = corner[side] - pa;
                let left = d.re * r.im - d.im * r.re > 0.0;
                // orient so the inside lies to the left of pa -> pb
                let (from, to) = if left == c[side] { (edges[ea], edges[eb]) } else { (edges[eb], edges[ea]) };
                next.insert(from, to);
            }
        }
    }
    let mut loops = Vec::new();
    let mut keys: Vec<EdgeKey> = next.keys().copied().collect();
    keys.sort();
    for start in keys {
        if !next.contains_key(&start) {
            continue;
        }
        let mut lp = vec![crossing(start)];
        let mut cur = start;
        while let Some(nx) = next.remove(&cur) {
            lp.push(crossing(nx));
            cur = nx;
            if cur == start {
                break;
            }
        }
        if lp.len() >= 4 && cur == start {
            loops.push(lp);
        }
    }
    loops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::hausdorff;
    use crate::config::make_configuration;

    /// Upper particles on a triangular lattice filling the upper unit
    /// half-disk at the circular-law density.
    fn disk_gas(n: usize) -> SpectralConfiguration {
        let a = (2.0 * std::f64::consts::PI / (3f64.sqrt() * n as f64)).sqrt();
        let mut up = Vec::new();
        let mut row = 0;
        loop {
            let y = (row as f64 + 0.5) * a * 3f64.sqrt() / 2.0;
            if y >= 1.0 {
                break;
            }
            let shift = if row % 2 == 0 { 0.0 } else { 0.5 * a };
            let mut x = -1.0 + shift;
            while x < 1.0 {
                if x * x + y * y < 1.0 {
                    up.push(Complex64::new(x, y));
                }
                x += a;
            }
            row += 1;
        }
        make_configuration(vec![], up).unwrap()
    }

    #[test]
    fn lattice_disk_support() {
        let cfg = disk_gas(2000);
        let s = complex_support(std::slice::from_ref(&cfg), 2).unwrap_or_else(|e| panic!("{e}"));
        let circle: Vec<Complex64> = (0..720).map(|i| Complex64::from_polar(1.0, i as f64 * std::f64::consts::PI / 360.0)).collect();
        assert!(hausdorff(&s.boundary_points, &circle) < 0.05);
        assert!((s.area - std::f64::consts::PI).abs() < 0.1, "{}", s.area);
        assert!(s.flatness < 0.1, "{}", s.flatness);
        assert_eq!(s.min_y, 0.0);
        assert_eq!(s.boundary_points.first(), s.boundary_points.last());
        let fine = complex_support(&[cfg], 4).unwrap();
        assert!((fine.area / s.area - 1.0).abs() < 0.05);
    }

    #[test]
    fn boundary_is_mirror_symmetric() {
        let cfg =
            make_configuration(vec![], (0..40).map(|i| Complex64::new(-0.5 + 0.025 * i as f64, 0.5 + 0.01 * (i % 3) as f64)).collect())
                .unwrap();
        let s = complex_support(&[cfg], 3).unwrap();
        let all: Vec<Complex64> = s.components.iter().flatten().copied().collect();
        let mirrored: Vec<Complex64> = all.iter().map(|z| z.conj()).collect();
        assert!(hausdorff(&all, &mirrored) < 1e-12);
        assert!(s.min_y > 0.0);
    }

    #[test]
    fn too_few_particles() {
        let cfg = make_configuration(vec![], vec![Complex64::new(0.0, 0.5)]).unwrap();
        assert!(matches!(complex_support(&[cfg], 2), Err(Error::Resolution(_))));
    }
}
