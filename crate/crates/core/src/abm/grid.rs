//! Uniform cell grid on the torus, rebuilt every step by counting sort.

use super::geometry::Vec2;

#[derive(Debug, Clone)]
pub struct CellGrid {
    side: f64,
    per_side: usize,
    inv_width: f64,
    starts: Vec<u32>,
    items: Vec<u32>,
    cell_of: Vec<u32>,
    ids: Vec<u32>,
    fill: Vec<u32>,
    /// 3×3 neighbourhood of each cell, flattened (a single entry when collapsed).
    neighbours: Vec<u32>,
}

impl CellGrid {
    /// Cells are at least `min_cell` wide. Grids with fewer than three cells
    /// per side collapse to a single cell so the 3×3 stencil never aliases.
    pub fn new(side: f64, min_cell: f64) -> Self {
        let mut per_side = if min_cell > 0.0 {
            (side / min_cell).floor().clamp(1.0, 1024.0) as usize
        } else {
            1
        };
        if per_side < 3 {
            per_side = 1;
        }
        let n = per_side as isize;
        let offsets: &[isize] = if per_side == 1 { &[0] } else { &[-1, 0, 1] };
        let mut neighbours = Vec::with_capacity(per_side * per_side * offsets.len().pow(2));
        for cy in 0..n {
            for cx in 0..n {
                for &dy in offsets {
                    for &dx in offsets {
                        let x = (cx + dx).rem_euclid(n);
                        let y = (cy + dy).rem_euclid(n);
                        neighbours.push((y * n + x) as u32);
                    }
                }
            }
        }
        Self {
            side,
            per_side,
            inv_width: per_side as f64 / side,
            starts: vec![0; per_side * per_side + 1],
            items: Vec::new(),
            cell_of: Vec::new(),
            ids: Vec::new(),
            fill: Vec::new(),
            neighbours,
        }
    }

    pub fn cells_per_side(&self) -> usize {
        self.per_side
    }

    pub fn cell_width(&self) -> f64 {
        self.side / self.per_side as f64
    }

    fn coord(&self, x: f64) -> usize {
        ((x * self.inv_width) as usize).min(self.per_side - 1)
    }

    fn cell_index(&self, p: Vec2) -> usize {
        self.coord(p.y) * self.per_side + self.coord(p.x)
    }

    /// Buckets `(id, position)` pairs. Within a cell, ids keep input order.
    pub fn rebuild<I>(&mut self, points: I)
    where
        I: IntoIterator<Item = (u32, Vec2)>,
    {
        self.cell_of.clear();
        self.ids.clear();
        self.starts.iter_mut().for_each(|s| *s = 0);
        for (id, p) in points {
            let cell = self.cell_index(p);
            self.starts[cell + 1] += 1;
            self.cell_of.push(cell as u32);
            self.ids.push(id);
        }
        for k in 1..self.starts.len() {
            self.starts[k] += self.starts[k - 1];
        }
        self.items.clear();
        self.items.resize(self.ids.len(), 0);
        self.fill.clear();
        self.fill.extend_from_slice(&self.starts);
        for (id, &cell) in self.ids.iter().zip(&self.cell_of) {
            let slot = &mut self.fill[cell as usize];
            self.items[*slot as usize] = *id;
            *slot += 1;
        }
    }

    pub fn cell(&self, index: usize) -> &[u32] {
        &self.items[self.starts[index] as usize..self.starts[index + 1] as usize]
    }

    pub fn num_cells(&self) -> usize {
        self.per_side * self.per_side
    }

    /// Indices of the 3×3 block of cells around cell `index`.
    pub fn stencil(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let width = if self.per_side == 1 { 1 } else { 9 };
        self.neighbours[index * width..(index + 1) * width]
            .iter()
            .map(|&c| c as usize)
    }

    /// Calls `f` for every stored id in the 3×3 neighbourhood of `p`.
    pub fn for_each_near(&self, p: Vec2, mut f: impl FnMut(u32)) {
        for cell in self.stencil(self.cell_index(p)) {
            for &id in self.cell(cell) {
                f(id);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_domains_collapse_to_one_cell() {
        let grid = CellGrid::new(10.0, 4.0);
        assert_eq!(grid.cells_per_side(), 1);
        assert_eq!(grid.stencil(0).count(), 1);
    }

    #[test]
    fn neighbourhood_wraps() {
        let mut grid = CellGrid::new(30.0, 10.0);
        grid.rebuild([
            (0, Vec2::new(1.0, 1.0)),
            (1, Vec2::new(29.0, 29.0)),
            (2, Vec2::new(15.0, 15.0)),
        ]);
        let mut seen = Vec::new();
        grid.for_each_near(Vec2::new(0.5, 0.5), |id| seen.push(id));
        seen.sort_unstable();
        // 3 cells per side: every cell is a neighbour of every other.
        assert_eq!(seen, vec![0, 1, 2]);

        let mut grid = CellGrid::new(50.0, 10.0);
        grid.rebuild([(0, Vec2::new(1.0, 1.0)), (1, Vec2::new(49.0, 49.0)), (2, Vec2::new(25.0, 25.0))]);
        let mut seen = Vec::new();
        grid.for_each_near(Vec2::new(0.5, 0.5), |id| seen.push(id));
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1]);
    }
}
