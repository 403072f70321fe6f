//! Dense linear assignment (Hungarian method with row/column potentials).
//!
//! Among all minimum-cost assignments the solver returns the one whose
//! column sequence, read row by row, is lexicographically smallest. Cost ties
//! are resolved on the equality subgraph left by the dual potentials, so the
//! choice never depends on the order in which the primal search happens to
//! visit columns.

/// Solves a square `n x n` problem. `cost` is row-major. Returns the column
/// assigned to each row.
pub fn solve_square(n: usize, cost: &[f64]) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return Vec::new();
    }
    let (row_col, u, v) = hungarian(n, cost);
    let scale = cost.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    let eps = 1e-9 * scale;
    let tight = |i: usize, j: usize| cost[i * n + j] - u[i] - v[j] <= eps;
    lexicographic_refine(n, row_col, tight)
}

/// Returns the row assignment and the dual potentials `(u, v)` such that
/// `cost[i][j] - u[i] - v[j] >= 0`, with equality on assigned pairs.
fn hungarian(n: usize, cost: &[f64]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    // 1-based with a virtual column 0, following the classic shortest
    // augmenting path formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0usize;
        let mut min_v = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if reduced < min_v[j] {
                    min_v[j] = reduced;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
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

    let mut row_col = vec![0usize; n];
    for j in 1..=n {
        row_col[owner[j] - 1] = j - 1;
    }
    (row_col, u[1..].to_vec(), v[1..].to_vec())
}

/// Walks rows in order and moves each to the smallest tight column that still
/// admits a perfect matching of the remaining rows on tight edges.
fn lexicographic_refine(
    n: usize,
    mut row_col: Vec<usize>,
    tight: impl Fn(usize, usize) -> bool,
) -> Vec<usize> {
    let mut col_row = vec![0usize; n];
    for (i, &j) in row_col.iter().enumerate() {
        col_row[j] = i;
    }
    let mut locked = vec![false; n];
    let mut via_row = vec![usize::MAX; n];
    let mut queue = Vec::with_capacity(n);

    for i in 0..n {
        let current = row_col[i];
        for j in 0..current {
            if locked[j] || !tight(i, j) {
                continue;
            }
            // Row `start` gives up column j and must reach `current` through
            // an alternating path of tight edges.
            let start = col_row[j];
            via_row.fill(usize::MAX);
            queue.clear();
            queue.push(start);
            let mut head = 0;
            let mut found = None;
            'bfs: while head < queue.len() {
                let x = queue[head];
                head += 1;
                for c in 0..n {
                    if locked[c] || c == j || via_row[c] != usize::MAX || !tight(x, c) {
                        continue;
                    }
                    via_row[c] = x;
                    if c == current {
                        found = Some(x);
                        break 'bfs;
                    }
                    queue.push(col_row[c]);
                }
            }
            if let Some(mut row) = found {
                let mut col = current;
                loop {
                    let prev = row_col[row];
                    row_col[row] = col;
                    col_row[col] = row;
                    if row == start {
                        break;
                    }
                    col = prev;
                    row = via_row[prev];
                }
                row_col[i] = j;
                col_row[j] = i;
                break;
            }
        }
        locked[row_col[i]] = true;
    }
    row_col
}
