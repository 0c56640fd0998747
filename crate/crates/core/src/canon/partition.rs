use std::fmt;

/// A partition of `0..element_count` into cells. Cell ids are dense and
/// numbered by the smallest element of each cell, so two equal partitions
/// always compare equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    cell_of: Vec<u32>,
    num_cells: usize,
}

impl Partition {
    /// Canonical partition from arbitrary labels: same label, same cell.
    pub fn from_labels<T: Eq + std::hash::Hash + Copy>(labels: &[T]) -> Self {
        let mut ids = std::collections::HashMap::new();
        let cell_of: Vec<u32> = labels
            .iter()
            .map(|l| {
                let next = ids.len() as u32;
                *ids.entry(*l).or_insert(next)
            })
            .collect();
        Self {
            num_cells: ids.len(),
            cell_of,
        }
    }

    pub fn from_cells(element_count: usize, cells: &[Vec<u32>]) -> Self {
        let mut labels = vec![u32::MAX; element_count];
        for (c, cell) in cells.iter().enumerate() {
            for &v in cell {
                assert_eq!(labels[v as usize], u32::MAX, "element {v} in two cells");
                labels[v as usize] = c as u32;
            }
        }
        assert!(labels.iter().all(|&l| l != u32::MAX), "cells do not cover");
        Self::from_labels(&labels)
    }

    pub fn unit(element_count: usize) -> Self {
        Self::from_labels(&vec![0u8; element_count])
    }

    pub fn discrete(element_count: usize) -> Self {
        Self {
            cell_of: (0..element_count as u32).collect(),
            num_cells: element_count,
        }
    }

    pub fn element_count(&self) -> usize {
        self.cell_of.len()
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn cell_of(&self, v: u32) -> u32 {
        self.cell_of[v as usize]
    }

    pub fn same_cell(&self, u: u32, v: u32) -> bool {
        self.cell_of[u as usize] == self.cell_of[v as usize]
    }

    pub fn is_discrete(&self) -> bool {
        self.num_cells == self.cell_of.len()
    }

    /// Cells in id order, members ascending.
    pub fn cells(&self) -> Vec<Vec<u32>> {
        let mut cells = vec![Vec::new(); self.num_cells];
        for (v, &c) in self.cell_of.iter().enumerate() {
            cells[c as usize].push(v as u32);
        }
        cells
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        self.cells().iter().map(Vec::len).collect()
    }

    /// Whether every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.element_count() != coarser.element_count() {
            return false;
        }
        let mut image = vec![u32::MAX; self.num_cells];
        for (v, &c) in self.cell_of.iter().enumerate() {
            let target = coarser.cell_of[v];
            let slot = &mut image[c as usize];
            if *slot == u32::MAX {
                *slot = target;
            } else if *slot != target {
                return false;
            }
        }
        true
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition")?;
        f.debug_list().entries(self.cells()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_numbering() {
        let a = Partition::from_labels(&[5, 3, 5, 9]);
        let b = Partition::from_cells(4, &[vec![3], vec![1], vec![0, 2]]);
        assert_eq!(a, b);
        assert_eq!(a.cells(), vec![vec![0, 2], vec![1], vec![3]]);
        assert_eq!(a.cell_of(3), 2);
    }

    #[test]
    fn refinement_order() {
        let fine = Partition::from_labels(&[0, 1, 2, 2]);
        let coarse = Partition::from_labels(&[0, 0, 1, 1]);
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(Partition::discrete(4).refines(&fine));
        assert!(fine.refines(&Partition::unit(4)));
        assert!(Partition::discrete(3).is_discrete());
    }
}
