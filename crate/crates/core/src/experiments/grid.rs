//! Cell discretization of the unit disc.

use crate::error::{invalid, Result};
use crate::geometry::PointCloud;

/// Cells of a `side × side` grid on `[−1, 1]²` whose centres lie in the open
/// unit disc, ordered by distance to the origin (ties by grid position).
#[derive(Debug, Clone)]
pub struct DiscGrid {
    side: usize,
    centres: PointCloud,
    /// Squared radius of each cell centre in units of the cell width.
    ring: Vec<u64>,
}

impl DiscGrid {
    pub fn new(side: usize) -> Result<Self> {
        if side == 0 {
            return Err(invalid("grid side must be positive"));
        }
        let h = 2.0 / side as f64;
        let mut cells = Vec::new();
        for a in 0..side {
            for b in 0..side {
                // Doubled offsets from the centre are odd or even integers, so
                // radii compare exactly.
                let (u, v) = (2 * a as i64 + 1 - side as i64, 2 * b as i64 + 1 - side as i64);
                let q = (u * u + v * v) as u64;
                if q < (side * side) as u64 {
                    cells.push((q, a, b));
                }
            }
        }
        cells.sort_unstable();
        let mut data = Vec::with_capacity(cells.len() * 2);
        for &(_, a, b) in &cells {
            data.push(-1.0 + h * (a as f64 + 0.5));
            data.push(-1.0 + h * (b as f64 + 0.5));
        }
        Ok(Self { side, centres: PointCloud::from_flat(2, data)?, ring: cells.iter().map(|c| c.0).collect() })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn cell_width(&self) -> f64 {
        2.0 / self.side as f64
    }

    pub fn len(&self) -> usize {
        self.centres.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn centres(&self) -> &PointCloud {
        &self.centres
    }

    /// Number of cells whose centre is strictly within `radius_cells` cell widths of the origin.
    pub fn count_within(&self, radius_cells: f64) -> usize {
        let lim = 4.0 * radius_cells * radius_cells;
        self.ring.partition_point(|&q| (q as f64) < lim)
    }

    /// Whether the first `k` cells form whole distance rings (no tie straddles `k`).
    pub fn is_whole_rings(&self, k: usize) -> bool {
        k == 0 || k >= self.len() || self.ring[k - 1] != self.ring[k]
    }
}

/// The smallest `k ≥ min_cells` for which the `k` innermost cells are whole rings.
pub fn full_ring_count(grid: &DiscGrid, min_cells: usize) -> usize {
    (min_cells..=grid.len()).find(|&k| grid.is_whole_rings(k)).unwrap_or(grid.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_by_five() {
        let g = DiscGrid::new(5).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g.centres().point(0), &[0.0, 0.0]);
        assert_eq!(g.count_within(1.01), 5);
        assert!(g.is_whole_rings(5) && g.is_whole_rings(9) && !g.is_whole_rings(7));
        assert_eq!(full_ring_count(&g, 6), 9);
    }

    #[test]
    fn cell_count_tracks_disc_area() {
        let g = DiscGrid::new(32).unwrap();
        let area = g.len() as f64 * g.cell_width().powi(2);
        assert!((area - std::f64::consts::PI).abs() < 0.1);
        assert_eq!(g.count_within(4.0), (0..g.len()).filter(|&i| {
            let p = g.centres().point(i);
            (p[0] * p[0] + p[1] * p[1]).sqrt() < 4.0 * g.cell_width() - 1e-12
        }).count());
    }
}
