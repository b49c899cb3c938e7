//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! The factorization is right-looking Gaussian elimination with Markowitz
//! pivot selection and threshold partial pivoting. Column replacements after
//! a simplex pivot are appended as eta matrices until the next refactor.

/// Relative threshold for accepting a pivot against its column maximum.
const PIVOT_THRESHOLD: f64 = 0.01;
/// Absolute floor below which an entry is never used as a pivot.
const ABS_PIVOT_TOL: f64 = 1e-11;
/// How many columns the Markowitz search inspects once it has a candidate.
const SEARCH_COLUMNS: usize = 4;

/// Outcome of a factorization that could not pivot every column.
#[derive(Debug, Clone, PartialEq)]
pub struct Singular {
    /// Basis positions whose columns were left without a pivot.
    pub positions: Vec<usize>,
    /// Rows that were left without a pivot (same length as `positions`).
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct LuFactor {
    m: usize,
    prow: Vec<usize>,
    pcol: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_diag: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    eta_pos: Vec<usize>,
    eta_piv: Vec<f64>,
    eta_start: Vec<usize>,
    eta_idx: Vec<usize>,
    eta_val: Vec<f64>,
}

struct Active {
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<usize>>,
    row_done: Vec<bool>,
    col_done: Vec<bool>,
    col_buckets: Vec<Vec<usize>>,
    row_singletons: Vec<usize>,
}

impl Active {
    fn push_col(&mut self, j: usize) {
        let n = self.cols[j].len();
        if n < self.col_buckets.len() {
            self.col_buckets[n].push(j);
        }
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }
}

impl LuFactor {
    /// Factorizes the `m × m` basis whose column at position `k` is given by
    /// `column(k)` as parallel (row index, value) slices.
    pub fn factorize<'a, F>(m: usize, column: F) -> Result<Self, (Self, Singular)>
    where
        F: Fn(usize) -> (&'a [usize], &'a [f64]),
    {
        let mut act = Active {
            rows: vec![Vec::new(); m],
            cols: vec![Vec::new(); m],
            row_done: vec![false; m],
            col_done: vec![false; m],
            col_buckets: vec![Vec::new(); m + 2],
            row_singletons: Vec::new(),
        };
        for k in 0..m {
            let (idx, val) = column(k);
            for (&i, &v) in idx.iter().zip(val) {
                if v != 0.0 {
                    act.rows[i].push((k, v));
                    act.cols[k].push(i);
                }
            }
        }
        for k in (0..m).rev() {
            act.push_col(k);
        }
        for i in (0..m).rev() {
            if act.rows[i].len() == 1 {
                act.row_singletons.push(i);
            }
        }

        let mut lu = LuFactor {
            m,
            l_start: vec![0],
            u_start: vec![0],
            eta_start: vec![0],
            ..Default::default()
        };
        let mut work = vec![0.0; m];
        let mut mark = vec![usize::MAX; m];

        for step in 0..m {
            let Some((r, c)) = select_pivot(&mut act) else {
                let positions: Vec<usize> = (0..m).filter(|&k| !act.col_done[k]).collect();
                let rows: Vec<usize> = (0..m).filter(|&i| !act.row_done[i]).collect();
                debug_assert_eq!(positions.len(), rows.len());
                return Err((lu, Singular { positions, rows }));
            };
            eliminate(&mut act, &mut lu, r, c, step, &mut work, &mut mark);
        }
        Ok(lu)
    }

    pub fn num_etas(&self) -> usize {
        self.eta_pos.len()
    }

    pub fn eta_nnz(&self) -> usize {
        self.eta_idx.len()
    }

    pub fn factor_nnz(&self) -> usize {
        self.l_idx.len() + self.u_idx.len() + self.m
    }

    /// Solves `B z = rhs`. `rhs` is indexed by row and is overwritten with
    /// scratch data; the result is indexed by basis position.
    pub fn ftran(&self, rhs: &mut [f64], out: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            let wr = rhs[self.prow[k]];
            if wr != 0.0 {
                for e in self.l_start[k]..self.l_start[k + 1] {
                    rhs[self.l_idx[e]] -= self.l_val[e] * wr;
                }
            }
        }
        for k in (0..m).rev() {
            let mut s = rhs[self.prow[k]];
            for e in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_val[e] * out[self.u_idx[e]];
            }
            out[self.pcol[k]] = s / self.u_diag[k];
        }
        for t in 0..self.eta_pos.len() {
            let p = self.eta_pos[t];
            let zp = out[p];
            if zp != 0.0 {
                out[p] = zp * self.eta_piv[t];
                for e in self.eta_start[t]..self.eta_start[t + 1] {
                    out[self.eta_idx[e]] += self.eta_val[e] * zp;
                }
            }
        }
    }

    /// Solves `Bᵀ y = c`. `c` is indexed by basis position and is used as
    /// scratch; the result is indexed by row.
    pub fn btran(&self, c: &mut [f64], out: &mut [f64]) {
        for t in (0..self.eta_pos.len()).rev() {
            let p = self.eta_pos[t];
            let mut s = c[p] * self.eta_piv[t];
            for e in self.eta_start[t]..self.eta_start[t + 1] {
                s += self.eta_val[e] * c[self.eta_idx[e]];
            }
            c[p] = s;
        }
        for k in 0..self.m {
            let t = c[self.pcol[k]] / self.u_diag[k];
            out[self.prow[k]] = t;
            if t != 0.0 {
                for e in self.u_start[k]..self.u_start[k + 1] {
                    c[self.u_idx[e]] -= self.u_val[e] * t;
                }
            }
        }
        for k in (0..self.m).rev() {
            let mut s = 0.0;
            for e in self.l_start[k]..self.l_start[k + 1] {
                s += self.l_val[e] * out[self.l_idx[e]];
            }
            out[self.prow[k]] -= s;
        }
    }

    /// Records the replacement of the basis column at `pos` by a column whose
    /// FTRAN image is `alpha` (indexed by basis position).
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let ap = alpha[pos];
        self.eta_pos.push(pos);
        self.eta_piv.push(1.0 / ap);
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a != 0.0 {
                self.eta_idx.push(i);
                self.eta_val.push(-a / ap);
            }
        }
        self.eta_start.push(self.eta_idx.len());
    }
}

fn select_pivot(act: &mut Active) -> Option<(usize, usize)> {
    // Column singletons cost nothing and never fill.
    while let Some(j) = act.col_buckets[1].pop() {
        if act.col_done[j] || act.cols[j].len() != 1 {
            continue;
        }
        let i = act.cols[j][0];
        if act.value(i, j).abs() >= ABS_PIVOT_TOL {
            return Some((i, j));
        }
    }
    // Row singletons never fill either, but the multipliers they create
    // must stay bounded.
    while let Some(i) = act.row_singletons.pop() {
        if act.row_done[i] || act.rows[i].len() != 1 {
            continue;
        }
        let (j, v) = act.rows[i][0];
        let colmax = act.cols[j].iter().map(|&r| act.value(r, j).abs()).fold(0.0, f64::max);
        if v.abs() >= ABS_PIVOT_TOL && v.abs() >= PIVOT_THRESHOLD * colmax {
            return Some((i, j));
        }
    }

    let mut best: Option<(usize, usize)> = None;
    let mut best_cost = usize::MAX;
    let mut hits = 0usize;
    let nb = act.col_buckets.len();
    'search: for count in 2..nb {
        let mut k = 0;
        while k < act.col_buckets[count].len() {
            let j = act.col_buckets[count][k];
            if act.col_done[j] || act.cols[j].len() != count {
                act.col_buckets[count].swap_remove(k);
                continue;
            }
            k += 1;
            let colmax = act.cols[j].iter().map(|&i| act.value(i, j).abs()).fold(0.0, f64::max);
            if colmax < ABS_PIVOT_TOL {
                continue;
            }
            let mut hit = false;
            for &i in &act.cols[j] {
                let v = act.value(i, j).abs();
                if v < PIVOT_THRESHOLD * colmax || v < ABS_PIVOT_TOL {
                    continue;
                }
                hit = true;
                let cost = (act.rows[i].len() - 1) * (count - 1);
                if cost < best_cost || (cost == best_cost && best.is_some_and(|(bi, bj)| (j, i) < (bj, bi))) {
                    best_cost = cost;
                    best = Some((i, j));
                }
            }
            if hit {
                hits += 1;
                if best_cost == 0 || hits >= SEARCH_COLUMNS {
                    break 'search;
                }
            }
        }
    }
    if best.is_some() {
        return best;
    }
    // Full scan covers anything the buckets missed.
    let mut best_val = 0.0;
    for j in 0..act.cols.len() {
        if act.col_done[j] {
            continue;
        }
        for &i in &act.cols[j] {
            let v = act.value(i, j).abs();
            if v > best_val && v >= ABS_PIVOT_TOL {
                best_val = v;
                best = Some((i, j));
            }
        }
    }
    best
}

fn eliminate(
    act: &mut Active,
    lu: &mut LuFactor,
    r: usize,
    c: usize,
    step: usize,
    work: &mut [f64],
    mark: &mut [usize],
) {
    let pivot_row = std::mem::take(&mut act.rows[r]);
    let p = pivot_row.iter().find(|e| e.0 == c).map(|e| e.1).expect("pivot entry present");

    lu.prow.push(r);
    lu.pcol.push(c);
    lu.u_diag.push(p);
    for &(j, v) in &pivot_row {
        if j != c {
            lu.u_idx.push(j);
            lu.u_val.push(v);
        }
    }
    lu.u_start.push(lu.u_idx.len());

    act.row_done[r] = true;
    act.col_done[c] = true;

    // Rows that will be updated: everything else in the pivot column.
    let targets: Vec<usize> = act.cols[c].iter().copied().filter(|&i| i != r).collect();
    act.cols[c].clear();

    // The pivot row leaves every other column pattern.
    for &(j, _) in &pivot_row {
        if j != c {
            let col = &mut act.cols[j];
            if let Some(pos) = col.iter().position(|&i| i == r) {
                col.swap_remove(pos);
            }
        }
    }

    for &i in &targets {
        let row = &mut act.rows[i];
        let aic = match row.iter().position(|e| e.0 == c) {
            Some(pos) => row.swap_remove(pos).1,
            None => continue,
        };
        let mult = aic / p;
        lu.l_idx.push(i);
        lu.l_val.push(mult);
        for &(j, v) in row.iter() {
            mark[j] = step;
            work[j] = v;
        }
        let mut fill: Vec<(usize, f64)> = Vec::new();
        for &(j, v) in &pivot_row {
            if j == c {
                continue;
            }
            if mark[j] == step {
                work[j] -= mult * v;
            } else {
                fill.push((j, -mult * v));
            }
        }
        for e in row.iter_mut() {
            e.1 = work[e.0];
        }
        for &(j, v) in &fill {
            row.push((j, v));
            act.cols[j].push(i);
        }
        for e in row.iter() {
            mark[e.0] = usize::MAX;
        }
    }
    lu.l_start.push(lu.l_idx.len());

    for &(j, _) in &pivot_row {
        if j != c && !act.col_done[j] {
            act.push_col(j);
        }
    }
    for &i in &targets {
        if act.rows[i].len() == 1 {
            act.row_singletons.push(i);
        }
        for k in 0..act.rows[i].len() {
            let j = act.rows[i][k].0;
            if !act.col_done[j] {
                act.push_col(j);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_cols(a: &[Vec<f64>]) -> Vec<(Vec<usize>, Vec<f64>)> {
        let m = a.len();
        (0..m)
            .map(|j| {
                let idx: Vec<usize> = (0..m).filter(|&i| a[i][j] != 0.0).collect();
                let val = idx.iter().map(|&i| a[i][j]).collect();
                (idx, val)
            })
            .collect()
    }

    fn factor(a: &[Vec<f64>]) -> LuFactor {
        let cols = dense_cols(a);
        LuFactor::factorize(a.len(), |k| (&cols[k].0[..], &cols[k].1[..])).expect("nonsingular")
    }

    fn matvec(a: &[Vec<f64>], z: &[f64]) -> Vec<f64> {
        a.iter().map(|row| row.iter().zip(z).map(|(x, y)| x * y).sum()).collect()
    }

    fn mat_t_vec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let m = a.len();
        (0..m).map(|j| (0..m).map(|i| a[i][j] * y[i]).sum()).collect()
    }

    #[test]
    fn solves_small_dense_system() {
        let a = vec![
            vec![2.0, 1.0, 0.0, 0.0],
            vec![4.0, 3.0, 1.0, 0.0],
            vec![0.0, 1.0, 5.0, 2.0],
            vec![0.0, 0.0, 1.0, -3.0],
        ];
        let lu = factor(&a);
        let b = vec![1.0, -2.0, 3.0, 0.5];
        let mut rhs = b.clone();
        let mut z = vec![0.0; 4];
        lu.ftran(&mut rhs, &mut z);
        let back = matvec(&a, &z);
        for (x, y) in back.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        let mut c = b.clone();
        let mut y = vec![0.0; 4];
        lu.btran(&mut c, &mut y);
        let back = mat_t_vec(&a, &y);
        for (x, y) in back.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_update_tracks_column_replacement() {
        let mut a = vec![
            vec![1.0, 0.0, 2.0],
            vec![0.0, 3.0, 0.0],
            vec![1.0, 1.0, 1.0],
        ];
        let mut lu = factor(&a);
        let newcol = [0.5, -1.0, 2.0];
        let mut rhs = newcol.to_vec();
        let mut alpha = vec![0.0; 3];
        lu.ftran(&mut rhs, &mut alpha);
        lu.update(1, &alpha);
        for i in 0..3 {
            a[i][1] = newcol[i];
        }
        let b = [1.0, 2.0, 3.0];
        let mut rhs = b.to_vec();
        let mut z = vec![0.0; 3];
        lu.ftran(&mut rhs, &mut z);
        for (x, y) in matvec(&a, &z).iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        let mut c = b.to_vec();
        let mut y = vec![0.0; 3];
        lu.btran(&mut c, &mut y);
        for (x, y) in mat_t_vec(&a, &y).iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_singular_columns() {
        let a = vec![vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0], vec![0.0, 0.0, 1.0]];
        let cols = dense_cols(&a);
        let err = LuFactor::factorize(3, |k| (&cols[k].0[..], &cols[k].1[..])).unwrap_err().1;
        assert_eq!(err.positions.len(), 1);
        assert_eq!(err.rows.len(), 1);
    }

    #[test]
    fn random_sparse_systems_roundtrip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = rng.gen_range(1..30);
            let mut a = vec![vec![0.0; m]; m];
            for i in 0..m {
                a[i][i] = rng.gen_range(1.0..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                for _ in 0..2 {
                    let j = rng.gen_range(0..m);
                    if j != i {
                        a[i][j] = rng.gen_range(-1.0..1.0);
                    }
                }
            }
            let cols = dense_cols(&a);
            let Ok(lu) = LuFactor::factorize(m, |k| (&cols[k].0[..], &cols[k].1[..])) else {
                continue;
            };
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let mut rhs = b.clone();
            let mut z = vec![0.0; m];
            lu.ftran(&mut rhs, &mut z);
            for (x, y) in matvec(&a, &z).iter().zip(&b) {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
    }
}
