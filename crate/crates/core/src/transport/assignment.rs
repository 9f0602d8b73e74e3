use super::CostMatrix;
use crate::error::{invalid, Result};

/// Minimum-cost perfect matching of a square cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `permutation[i]` is the column matched to row `i`.
    pub permutation: Vec<usize>,
    /// Sum of the matched costs (not divided by `n`).
    pub total_cost: f64,
}

/// Exact assignment by shortest augmenting paths with row/column potentials
/// (the O(n³) Hungarian method).
pub fn solve_assignment(cost: &CostMatrix) -> Result<Assignment> {
    let n = cost.rows();
    if cost.cols() != n {
        return Err(invalid(format!("assignment needs a square matrix, got {}x{}", n, cost.cols())));
    }
    // 1-based arrays; column 0 is a virtual column holding the row being inserted.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let row = cost.row(i0 - 1);
            let ui0 = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - ui0 - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut permutation = vec![0usize; n];
    for j in 1..=n {
        permutation[owner[j] - 1] = j - 1;
    }
    let total_cost = permutation.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
    Ok(Assignment { permutation, total_cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn brute_force(cost: &CostMatrix) -> f64 {
        fn rec(cost: &CostMatrix, row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
            let n = cost.rows();
            if row == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    rec(cost, row + 1, used, acc + cost.get(row, j), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, 0, &mut vec![false; cost.rows()], 0.0, &mut best);
        best
    }

    #[test]
    fn identity_when_diagonal_free() {
        let c = CostMatrix::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let a = solve_assignment(&c).unwrap();
        assert_eq!(a.permutation, vec![0, 1]);
        assert_eq!(a.total_cost, 0.0);
        let c = CostMatrix::from_fn(5, 5, |i, j| if i == j { 0.0 } else { 1.0 + (i * j) as f64 }).unwrap();
        assert_eq!(solve_assignment(&c).unwrap().permutation, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn rejects_rectangular() {
        let c = CostMatrix::new(1, 2, vec![0.0, 1.0]).unwrap();
        assert!(solve_assignment(&c).is_err());
    }

    #[test]
    fn single_cell() {
        let c = CostMatrix::new(1, 1, vec![3.5]).unwrap();
        let a = solve_assignment(&c).unwrap();
        assert_eq!(a.permutation, vec![0]);
        assert_eq!(a.total_cost, 3.5);
    }

    #[test]
    fn matches_brute_force_small() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let n = rng.random_range(1..=6);
            let c = CostMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..10.0)).unwrap();
            let a = solve_assignment(&c).unwrap();
            let mut seen = vec![false; n];
            for &j in &a.permutation {
                assert!(!seen[j]);
                seen[j] = true;
            }
            assert_eq!(a.total_cost, brute_force(&c));
        }
    }
}
