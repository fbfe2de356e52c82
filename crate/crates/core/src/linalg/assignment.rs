//! Minimum-cost one-to-one assignment on a square cost matrix.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Square matrix of finite, nonnegative costs. Row `i` is an item to be
/// assigned, column `j` a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix(Array2<f64>);

impl CostMatrix {
    pub fn new(costs: Array2<f64>) -> Result<Self> {
        let (rows, cols) = costs.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                context: "cost matrix columns",
                expected: rows,
                found: cols,
            });
        }
        if rows == 0 {
            return Err(Error::InvalidInput("cost matrix has order 0".into()));
        }
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidInput(
                "cost matrix entries must be finite and nonnegative".into(),
            ));
        }
        Ok(CostMatrix(costs))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[[row, col]]
    }
}

/// A permutation: row `i` is matched to column `assignment[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub assignment: Vec<usize>,
}

impl Matching {
    pub fn cost(&self, costs: &CostMatrix) -> f64 {
        self.assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| costs.get(i, j))
            .sum()
    }

    /// Row matched to each column.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.assignment.len()];
        for (i, &j) in self.assignment.iter().enumerate() {
            inv[j] = i;
        }
        inv
    }
}

/// Optimal assignment by the Hungarian method with row/column potentials.
///
/// Among optimal assignments the lexicographically smallest assignment
/// vector is returned: the final potentials identify every tight edge, and
/// the answer is rebuilt greedily over them while a perfect matching on the
/// remaining tight edges still exists.
pub fn solve_assignment(costs: &CostMatrix) -> Matching {
    let n = costs.order();
    let (row_of_col, u, v) = hungarian(costs);

    let scale = costs.0.iter().fold(1.0_f64, |acc, c| acc.max(*c));
    let tol = 1e-12 * scale * n as f64;
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| costs.get(i, j) - u[i + 1] - v[j + 1] <= tol)
                .collect()
        })
        .collect();

    let mut assignment = vec![0; n];
    for j in 0..n {
        assignment[row_of_col[j + 1] - 1] = j;
    }
    lexicographic_tight_matching(&tight).map_or(Matching { assignment }, |assignment| Matching {
        assignment,
    })
}

// Classic O(n³) shortest augmenting path formulation with 1-based arrays.
// Returns the row matched to each column and the final potentials.
fn hungarian(costs: &CostMatrix) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = costs.order();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = costs.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < min_to[j] {
                    min_to[j] = cur;
                    way[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (row_of_col, u, v)
}

fn lexicographic_tight_matching(tight: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = tight.len();
    let mut assignment = Vec::with_capacity(n);
    let mut col_taken = vec![false; n];
    for row in 0..n {
        let mut chosen = None;
        for col in 0..n {
            if col_taken[col] || !tight[row][col] {
                continue;
            }
            col_taken[col] = true;
            if has_perfect_matching(tight, row + 1, &col_taken) {
                chosen = Some(col);
                break;
            }
            col_taken[col] = false;
        }
        assignment.push(chosen?);
    }
    Some(assignment)
}

// Kuhn's augmenting paths over rows `first_row..n` and the free columns.
fn has_perfect_matching(tight: &[Vec<bool>], first_row: usize, col_taken: &[bool]) -> bool {
    let n = tight.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];

    fn augment(
        row: usize,
        tight: &[Vec<bool>],
        col_taken: &[bool],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for col in 0..tight.len() {
            if col_taken[col] || !tight[row][col] || seen[col] {
                continue;
            }
            seen[col] = true;
            let free = match owner[col] {
                None => true,
                Some(other) => augment(other, tight, col_taken, owner, seen),
            };
            if free {
                owner[col] = Some(row);
                return true;
            }
        }
        false
    }

    for row in first_row..n {
        let mut seen = vec![false; n];
        if !augment(row, tight, col_taken, &mut owner, &mut seen) {
            return false;
        }
    }
    true
}
