//! Aggregation multigrid V-cycle used as a conjugate-gradient preconditioner.
//!
//! Every level is a graph Laplacian plus boundary terms whose rows carry a
//! cell coordinate. Rows are ordered red (even cell parity) before black and
//! only rows of different colours are coupled, so a Gauss-Seidel half sweep
//! over one colour is a row-parallel update. Each colour ends with a padding
//! row that stays zero; unused coupling slots point at the padding row of the
//! other colour. Coarse rows are the connected pieces of 2x2x2 cell blocks and
//! coarse operators are Galerkin products with piecewise-constant transfer.

use crate::par;

const BLOCK: usize = 4096;
/// Coarsest levels up to this size are solved by dense Cholesky.
const DIRECT_MAX: usize = 1024;
/// Symmetric sweeps on a coarsest level too large to factor.
const COARSEST_SWEEPS: usize = 8;
const MAX_LEVELS: usize = 32;
/// Couplings kept in fixed slots; the rest go to an overflow list.
const WIDTH: usize = 6;
const NONE: u32 = u32::MAX;

/// Rows of `A` in the form `(A x)_i = a_ii x_i - sum_j w_ij x_j`.
pub(super) trait Level: Sync {
    fn len(&self) -> usize;
    /// Index of the first black row.
    fn split(&self) -> usize;
    fn diag(&self, i: usize) -> f64;
    fn inv_diag(&self, i: usize) -> f64;
    /// `sum_j w_ij x[j - offset]`.
    fn coupled(&self, i: usize, x: &[f64], offset: usize) -> f64;
    /// Calls `f(j, w_ij)` for every row coupled to `i`.
    fn for_each_neighbor(&self, i: usize, f: &mut dyn FnMut(usize, f64));
    /// False for the padding rows.
    fn is_active(&self, i: usize) -> bool;

    /// Gauss-Seidel update of one colour: `x_i = (b_i + sum_j w_ij x_j) / a_ii`.
    fn sweep(&self, b: &[f64], x: &mut [f64], red: bool) {
        let split = self.split();
        let (lo, hi) = x.split_at_mut(split);
        let (rows, other, first, other_first) = if red { (lo, &*hi, 0, split) } else { (hi, &*lo, split, 0) };
        par::map_blocks_mut(rows, BLOCK, |blk, xs| {
            let base = first + blk * BLOCK;
            for (k, v) in xs.iter_mut().enumerate() {
                let i = base + k;
                *v = (b[i] + self.coupled(i, other, other_first)) * self.inv_diag(i);
            }
        });
    }

    /// `r = b - A x`.
    fn residual(&self, b: &[f64], x: &[f64], r: &mut [f64]) {
        par::map_blocks_mut(r, BLOCK, |blk, rs| {
            let base = blk * BLOCK;
            for (k, v) in rs.iter_mut().enumerate() {
                let i = base + k;
                *v = b[i] - self.diag(i) * x[i] + self.coupled(i, x, 0);
            }
        });
    }
}

/// Coarse operator. Weights are integer edge counts, exact in `f32`.
struct Coupling {
    cols: Vec<[u32; WIDTH]>,
    weights: Vec<[f32; WIDTH]>,
    extra_start: Vec<u32>,
    extra_cols: Vec<u32>,
    extra_weights: Vec<f32>,
    diag: Vec<f64>,
    inv_diag: Vec<f64>,
    split: usize,
}

impl Level for Coupling {
    fn len(&self) -> usize {
        self.diag.len()
    }

    fn split(&self) -> usize {
        self.split
    }

    fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    fn inv_diag(&self, i: usize) -> f64 {
        self.inv_diag[i]
    }

    #[inline]
    fn coupled(&self, i: usize, x: &[f64], offset: usize) -> f64 {
        let (c, w) = (&self.cols[i], &self.weights[i]);
        let at = |k: usize| f64::from(w[k]) * x[c[k] as usize - offset];
        let mut s = (at(0) + at(1) + at(2)) + (at(3) + at(4) + at(5));
        for e in self.extra_start[i] as usize..self.extra_start[i + 1] as usize {
            s += f64::from(self.extra_weights[e]) * x[self.extra_cols[e] as usize - offset];
        }
        s
    }

    fn for_each_neighbor(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        for k in 0..WIDTH {
            if self.weights[i][k] != 0.0 {
                f(self.cols[i][k] as usize, f64::from(self.weights[i][k]));
            }
        }
        for e in self.extra_start[i] as usize..self.extra_start[i + 1] as usize {
            f(self.extra_cols[e] as usize, f64::from(self.extra_weights[e]));
        }
    }

    fn is_active(&self, i: usize) -> bool {
        i + 1 != self.split && i + 1 != self.len()
    }
}

/// Piecewise-constant transfer between a level and the next coarser one.
struct Transfer {
    /// Fine row to coarse row, `NONE` for padding.
    agg: Vec<u32>,
    /// Fine rows of each coarse row.
    start: Vec<u32>,
    members: Vec<u32>,
}

impl Transfer {
    fn restrict(&self, fine: &[f64], coarse: &mut [f64]) {
        par::map_blocks_mut(coarse, BLOCK, |blk, cs| {
            let base = blk * BLOCK;
            for (k, v) in cs.iter_mut().enumerate() {
                let c = base + k;
                let members = &self.members[self.start[c] as usize..self.start[c + 1] as usize];
                *v = members.iter().map(|&i| fine[i as usize]).sum();
            }
        });
    }

    fn prolong_add(&self, coarse: &[f64], fine: &mut [f64]) {
        par::map_blocks_mut(fine, BLOCK, |blk, fs| {
            let base = blk * BLOCK;
            for (k, v) in fs.iter_mut().enumerate() {
                let a = self.agg[base + k];
                if a != NONE {
                    *v += coarse[a as usize];
                }
            }
        });
    }
}

fn find(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        let next = parent[parent[i as usize] as usize];
        parent[i as usize] = next;
        i = next;
    }
    i
}

/// Groups the rows of each 2x2x2 block of cells into connected pieces and
/// forms the Galerkin operator on them.
fn coarsen(fine: &dyn Level, cells: &[[u32; 3]], dims: [u32; 3]) -> (Coupling, Transfer, Vec<[u32; 3]>, [u32; 3]) {
    let n = fine.len();
    let coarse_dims = dims.map(|d| d.div_ceil(2));
    let key = |c: [u32; 3]| -> u64 {
        let p = c.map(|v| u64::from(v / 2));
        p[0] + u64::from(coarse_dims[0]) * (p[1] + u64::from(coarse_dims[1]) * p[2])
    };
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for i in 0..n {
        if !fine.is_active(i) {
            continue;
        }
        let ki = key(cells[i]);
        fine.for_each_neighbor(i, &mut |j, _| {
            if key(cells[j]) == ki {
                let (a, b) = (find(&mut parent, i as u32), find(&mut parent, j as u32));
                if a != b {
                    parent[a.max(b) as usize] = a.min(b);
                }
            }
        });
    }

    // A piece coupled to a single other piece joins it; this adds no new
    // couplings, so the colouring survives. Mutual pairs keep the smaller root.
    const MANY: u32 = u32::MAX - 1;
    let mut only = vec![NONE; n];
    for i in 0..n {
        if !fine.is_active(i) {
            continue;
        }
        let ri = find(&mut parent, i as u32);
        fine.for_each_neighbor(i, &mut |j, _| {
            let rj = find(&mut parent, j as u32);
            let slot = &mut only[ri as usize];
            if rj != ri && *slot != rj {
                *slot = if *slot == NONE { rj } else { MANY };
            }
        });
    }
    for r in 0..n {
        let j = only[r];
        if j == NONE || j == MANY || parent[r] != r as u32 {
            continue;
        }
        if only[j as usize] == r as u32 && (j as usize) > r {
            continue;
        }
        parent[r] = j;
    }

    // (colour, block, root) fixes the coarse order
    let mut roots = Vec::new();
    for i in 0..n {
        if fine.is_active(i) && find(&mut parent, i as u32) == i as u32 {
            let c = cells[i].map(|v| v / 2);
            roots.push(((c[0] + c[1] + c[2]) & 1, key(cells[i]), i as u32, c));
        }
    }
    roots.sort_unstable_by_key(|&(color, k, i, _)| (color, k, i));
    let n_red = roots.iter().take_while(|r| r.0 == 0).count();
    let split = n_red + 1;
    let nc = roots.len() + 2;
    let (red_pad, black_pad) = (split as u32 - 1, nc as u32 - 1);
    let mut coarse_cells = Vec::with_capacity(nc);
    let mut id = vec![NONE; n];
    for (k, r) in roots.iter().enumerate() {
        if k == n_red {
            coarse_cells.push([0; 3]);
        }
        id[r.2 as usize] = coarse_cells.len() as u32;
        coarse_cells.push(r.3);
    }
    if n_red == roots.len() {
        coarse_cells.push([0; 3]);
    }
    coarse_cells.push([0; 3]);

    let mut agg = vec![NONE; n];
    let mut counts = vec![0u32; nc + 1];
    for i in 0..n {
        if fine.is_active(i) {
            let a = id[find(&mut parent, i as u32) as usize];
            agg[i] = a;
            counts[a as usize + 1] += 1;
        }
    }
    for c in 0..nc {
        counts[c + 1] += counts[c];
    }
    let start = counts;
    let mut fill = start.clone();
    let mut members = vec![0u32; start[nc] as usize];
    for (i, &a) in agg.iter().enumerate() {
        if a != NONE {
            members[fill[a as usize] as usize] = i as u32;
            fill[a as usize] += 1;
        }
    }

    let mut op = Coupling {
        cols: Vec::with_capacity(nc),
        weights: Vec::with_capacity(nc),
        extra_start: vec![0],
        extra_cols: Vec::new(),
        extra_weights: Vec::new(),
        diag: Vec::with_capacity(nc),
        inv_diag: Vec::with_capacity(nc),
        split,
    };
    let mut row: Vec<(u32, f64)> = Vec::new();
    for c in 0..nc {
        row.clear();
        let mut diag = 0.0;
        for &i in &members[start[c] as usize..start[c + 1] as usize] {
            diag += fine.diag(i as usize);
            fine.for_each_neighbor(i as usize, &mut |j, w| {
                let a = agg[j];
                if a == c as u32 {
                    diag -= w;
                } else if let Some(e) = row.iter_mut().find(|e| e.0 == a) {
                    e.1 += w;
                } else {
                    row.push((a, w));
                }
            });
        }
        if c as u32 == red_pad || c as u32 == black_pad {
            diag = 1.0;
        }
        row.sort_unstable_by_key(|e| e.0);
        let pad = if c < split { black_pad } else { red_pad };
        let (mut cols, mut weights) = ([pad; WIDTH], [0.0f32; WIDTH]);
        for (k, &(j, w)) in row.iter().enumerate() {
            if k < WIDTH {
                cols[k] = j;
                weights[k] = w as f32;
            } else {
                op.extra_cols.push(j);
                op.extra_weights.push(w as f32);
            }
        }
        op.cols.push(cols);
        op.weights.push(weights);
        op.extra_start.push(op.extra_cols.len() as u32);
        op.diag.push(diag);
        op.inv_diag.push(1.0 / diag);
    }
    (op, Transfer { agg, start, members }, coarse_cells, coarse_dims)
}

/// Dense lower Cholesky factor of a small coarsest operator.
struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn factor(op: &Coupling) -> Option<Cholesky> {
        let n = op.len();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            l[i * n + i] = op.diag[i];
            op.for_each_neighbor(i, &mut |j, w| l[i * n + j] = -w);
        }
        for j in 0..n {
            let d = l[j * n + j] - (0..j).map(|k| l[j * n + k] * l[j * n + k]).sum::<f64>();
            if !(d > 0.0) {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let s = l[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
                l[i * n + j] = s / d;
            }
        }
        Some(Cholesky { n, l })
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let (n, l) = (self.n, &self.l);
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[i * n + k] * x[k]).sum();
            x[i] = (b[i] - s) / l[i * n + i];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
            x[i] = (x[i] - s) / l[i * n + i];
        }
    }
}

struct Coarse {
    op: Coupling,
    transfer: Transfer,
    b: Vec<f64>,
    x: Vec<f64>,
    /// Residual of this level.
    r: Vec<f64>,
}

pub(super) struct Multigrid {
    levels: Vec<Coarse>,
    direct: Option<Cholesky>,
    /// Residual of the finest level.
    r: Vec<f64>,
}

impl Multigrid {
    /// `cells` are the integer coordinates of the fine rows inside a grid of
    /// `dims`; coupled rows must sit in face-adjacent cells.
    pub(super) fn build(fine: &dyn Level, cells: &[[u32; 3]], dims: [u32; 3]) -> Multigrid {
        let mut levels: Vec<Coarse> = Vec::new();
        let mut cells = cells.to_vec();
        let mut dims = dims;
        let mut prev_len = fine.len();
        while levels.len() < MAX_LEVELS {
            let (op, transfer, next_cells, next_dims) = match levels.last() {
                Some(c) => coarsen(&c.op, &cells, dims),
                None => coarsen(fine, &cells, dims),
            };
            let n = op.len();
            let stalled = n * 10 > prev_len * 9;
            levels.push(Coarse { b: vec![0.0; n], x: vec![0.0; n], r: vec![0.0; n], op, transfer });
            if n <= DIRECT_MAX || stalled {
                break;
            }
            prev_len = n;
            cells = next_cells;
            dims = next_dims;
        }
        let last = &levels.last().expect("at least one coarse level").op;
        let direct = if last.len() <= DIRECT_MAX { Cholesky::factor(last) } else { None };
        Multigrid { levels, direct, r: vec![0.0; fine.len()] }
    }

    /// `z = M^-1 r` with one symmetric V-cycle.
    pub(super) fn apply(&mut self, fine: &dyn Level, r: &[f64], z: &mut [f64]) {
        v_cycle(fine, r, z, &mut self.r, &mut self.levels, self.direct.as_ref());
    }
}

fn smooth_from_zero(op: &dyn Level, b: &[f64], x: &mut [f64]) {
    let split = op.split();
    x[split..].fill(0.0);
    op.sweep(b, x, true);
    op.sweep(b, x, false);
}

fn v_cycle(op: &dyn Level, b: &[f64], x: &mut [f64], r: &mut [f64], coarse: &mut [Coarse], direct: Option<&Cholesky>) {
    let Some((next, rest)) = coarse.split_first_mut() else {
        match direct {
            Some(c) => c.solve(b, x),
            None => {
                smooth_from_zero(op, b, x);
                for _ in 1..COARSEST_SWEEPS {
                    op.sweep(b, x, true);
                    op.sweep(b, x, false);
                }
                for _ in 0..COARSEST_SWEEPS {
                    op.sweep(b, x, false);
                    op.sweep(b, x, true);
                }
            }
        }
        return;
    };
    smooth_from_zero(op, b, x);
    op.residual(b, x, r);
    next.transfer.restrict(r, &mut next.b);
    v_cycle(&next.op, &next.b, &mut next.x, &mut next.r, rest, direct);
    next.transfer.prolong_add(&next.x, x);
    op.sweep(b, x, false);
    op.sweep(b, x, true);
}
