//! Resistor networks on point sets.
//!
//! A network assigns every unordered pair of nodes the conductance
//! `phi(|x - y|)` (complete graph), optionally dropping pairs beyond a
//! truncation radius. Dense networks store the couplings packed or evaluate
//! them lazily from the points; both give bit-identical values. Sparse
//! networks (CSR) are for large truncated builds.

use crate::error::{Error, Result};
use crate::kernel::{JumpKernel, SqEvaluator};
use crate::linalg::{Csr, PackedCoupling};
use crate::numeric::par_sum;
use crate::pointproc::PointSet;
use crate::scalar::Scalar;
use rayon::prelude::*;
use std::sync::Arc;

/// Node identity after collapses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeLabel {
    /// Index into the originating point set.
    Original(usize),
    /// Super-node produced by shorting a group of original nodes.
    Super(Vec<usize>),
}

/// Options for [`build_network`].
#[derive(Debug, Clone)]
pub struct BuildOptions<F> {
    /// Complete-graph storage is allowed up to this many nodes.
    pub node_budget: usize,
    /// Materialize couplings (`true`) or evaluate lazily from points.
    pub materialize: bool,
    /// Drop pairs with distance beyond this radius.
    pub cut: Option<F>,
}

impl<F> Default for BuildOptions<F> {
    fn default() -> Self {
        BuildOptions { node_budget: 5000, materialize: true, cut: None }
    }
}

enum Storage<F> {
    Packed(PackedCoupling<F>),
    Lazy { points: Arc<PointSet<F>>, eval: SqEvaluator<F>, cut_sq: Option<F> },
}

/// Fully connected (or radius-truncated) network with explicit conductance
/// access. Immutable once built.
pub struct DenseNetwork<F> {
    labels: Vec<NodeLabel>,
    storage: Storage<F>,
    w: Vec<F>,
    cut: Option<F>,
    dropped_mass_bound: Option<F>,
}

impl<F: Scalar> DenseNetwork<F> {
    pub fn node_count(&self) -> usize {
        self.w.len()
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    /// Conductance between distinct nodes.
    #[inline]
    pub fn conductance(&self, i: usize, j: usize) -> F {
        if i == j {
            return F::zero();
        }
        match &self.storage {
            Storage::Packed(p) => p.get(i.max(j), i.min(j)),
            Storage::Lazy { points, eval, cut_sq } => {
                let d2 = points.dist_sq(i, j);
                if let Some(c2) = cut_sq {
                    if d2 > *c2 {
                        return F::zero();
                    }
                }
                eval.eval_sq(d2)
            }
        }
    }

    /// Row sum `w(i)`.
    #[inline]
    pub fn weight(&self, i: usize) -> F {
        self.w[i]
    }

    pub fn weights(&self) -> &[F] {
        &self.w
    }

    pub fn cut(&self) -> Option<F> {
        self.cut
    }

    /// Upper bound on the total conductance dropped by the truncation
    /// radius, when one was applied.
    pub fn dropped_mass_bound(&self) -> Option<F> {
        self.dropped_mass_bound
    }

    /// Materialized copy of the couplings (used by collapse and the dense
    /// solver paths).
    pub fn couplings(&self) -> PackedCoupling<F> {
        let n = self.node_count();
        match &self.storage {
            Storage::Packed(p) => PackedCoupling { n, c: p.c.clone() },
            Storage::Lazy { .. } => {
                let mut pc = PackedCoupling::zeros(n);
                let chunks: Vec<(usize, Vec<F>)> = (1..n)
                    .into_par_iter()
                    .map(|i| {
                        let mut row = Vec::with_capacity(i);
                        for j in 0..i {
                            row.push(self.conductance(i, j));
                        }
                        (i, row)
                    })
                    .collect();
                for (i, row) in chunks {
                    let base = PackedCoupling::<F>::idx(i, 0);
                    pc.c[base..base + i].copy_from_slice(&row);
                }
                pc
            }
        }
    }

    /// Construct directly from explicit couplings (tests, reductions).
    pub fn from_couplings(labels: Vec<NodeLabel>, couplings: PackedCoupling<F>) -> Result<Self> {
        let n = labels.len();
        assert_eq!(couplings.n, n);
        let w: Vec<F> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .fold(F::zero(), |s, j| s + couplings.get(i.max(j), i.min(j)))
            })
            .collect();
        if w.iter().any(|v| !(*v > F::zero())) {
            return Err(Error::Construction("isolated node: zero row sum".into()));
        }
        Ok(DenseNetwork {
            labels,
            storage: Storage::Packed(couplings),
            w,
            cut: None,
            dropped_mass_bound: None,
        })
    }

    /// Shorts each group into a single super-node; parallel conductances
    /// add, internal edges disappear.
    pub fn collapse(&self, groups: &[Vec<usize>]) -> Result<(DenseNetwork<F>, CollapseMap)> {
        let n = self.node_count();
        let mut assignment = vec![usize::MAX; n];
        for (g, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::parameter("empty collapse group"));
            }
            for &i in group {
                if i >= n {
                    return Err(Error::parameter(format!("node {i} out of range")));
                }
                if assignment[i] != usize::MAX {
                    return Err(Error::parameter("collapse groups overlap"));
                }
                assignment[i] = g;
            }
        }
        // untouched nodes keep their relative order, then super-nodes in
        // group order
        let mut map = vec![usize::MAX; n];
        let mut labels = Vec::new();
        for (i, &a) in assignment.iter().enumerate() {
            if a == usize::MAX {
                map[i] = labels.len();
                labels.push(self.labels[i].clone());
            }
        }
        let first_super = labels.len();
        for group in groups {
            let mut members = Vec::new();
            for &i in group {
                match &self.labels[i] {
                    NodeLabel::Original(k) => members.push(*k),
                    NodeLabel::Super(ks) => members.extend_from_slice(ks),
                }
            }
            members.sort_unstable();
            labels.push(NodeLabel::Super(members));
        }
        for (i, &a) in assignment.iter().enumerate() {
            if a != usize::MAX {
                map[i] = first_super + a;
            }
        }
        let m = labels.len();
        let mut pc = PackedCoupling::zeros(m);
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (map[i], map[j]);
                if a == b {
                    continue;
                }
                let c = self.conductance(i, j);
                pc.c[PackedCoupling::<F>::idx(a.max(b), a.min(b))] += c;
            }
        }
        let net = DenseNetwork::from_couplings(labels, pc)?;
        Ok((net, CollapseMap { node_map: map, groups: groups.to_vec() }))
    }
}

/// Record of a collapse: old node -> new node, plus the shorted groups.
#[derive(Debug, Clone)]
pub struct CollapseMap {
    pub node_map: Vec<usize>,
    pub groups: Vec<Vec<usize>>,
}

/// Builds the network on `points` with kernel `phi`.
///
/// Without a truncation radius the graph is complete; `node_budget` guards
/// the quadratic cost and is configurable upward for exact desk-scale runs.
/// With a radius, pairs beyond it are dropped and a bound on the dropped
/// conductance mass is reported on the result (truncation only lowers
/// conductances, so resistances computed on the truncated network are upper
/// bounds).
pub fn build_network<F: Scalar>(
    points: &Arc<PointSet<F>>,
    kernel: &JumpKernel<F>,
    opts: &BuildOptions<F>,
) -> Result<DenseNetwork<F>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::parameter("need at least two points"));
    }
    if let Some(cut) = opts.cut {
        if !(cut > F::zero()) {
            return Err(Error::parameter("truncation radius must be positive"));
        }
        if !kernel.is_builtin_decreasing() {
            return Err(Error::parameter(
                "truncation requires one of the built-in decaying kernels",
            ));
        }
    } else if n > opts.node_budget {
        return Err(Error::parameter(format!(
            "{n} nodes exceed the dense budget {}; set a truncation radius or raise the budget",
            opts.node_budget
        )));
    }
    // duplicate points would put a resistor at distance zero
    for i in 1..n {
        if points.dist_sq(i, i - 1) == F::zero() {
            return Err(Error::Construction("duplicate points in input".into()));
        }
    }
    let eval = kernel.prepared();
    let cut_sq = opts.cut.map(|c| c * c);
    let w: Vec<F> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = F::zero();
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d2 = points.dist_sq(i, j);
                if let Some(c2) = cut_sq {
                    if d2 > c2 {
                        continue;
                    }
                }
                s += eval.eval_sq(d2);
            }
            s
        })
        .collect();
    if w.iter().any(|v| !(*v > F::zero())) {
        return Err(Error::Construction(
            "isolated node after truncation: zero row sum".into(),
        ));
    }
    let dropped = opts.cut.map(|cut| dropped_mass_bound(points, kernel, cut));
    let labels: Vec<NodeLabel> = (0..n).map(NodeLabel::Original).collect();
    let storage = if opts.materialize {
        let mut pc = PackedCoupling::zeros(n);
        pc.c
            .par_chunks_mut(1 << 14)
            .enumerate()
            .for_each(|(chunk_idx, chunk)| {
                // invert flat = i(i-1)/2 + j once per chunk, then step
                let flat = chunk_idx << 14;
                let mut i = ((1.0 + (1.0 + 8.0 * flat as f64).sqrt()) / 2.0) as usize;
                while i >= 1 && i * (i - 1) / 2 > flat {
                    i -= 1;
                }
                while (i + 1) * i / 2 <= flat {
                    i += 1;
                }
                let mut j = flat - i * (i - 1) / 2;
                for slot in chunk.iter_mut() {
                    let d2 = points.dist_sq(i, j);
                    *slot = match cut_sq {
                        Some(c2) if d2 > c2 => F::zero(),
                        _ => eval.eval_sq(d2),
                    };
                    j += 1;
                    if j == i {
                        i += 1;
                        j = 0;
                    }
                }
            });
        Storage::Packed(pc)
    } else {
        Storage::Lazy { points: Arc::clone(points), eval, cut_sq }
    };
    Ok(DenseNetwork { labels, storage, w, cut: opts.cut, dropped_mass_bound: dropped })
}

/// Crude but valid bound on the conductance mass removed by truncation:
/// for each node, the dropped sum is at most (number of dropped partners)
/// times the kernel value at the cut radius; the partner count is bounded
/// by the total point count.
fn dropped_mass_bound<F: Scalar>(points: &PointSet<F>, kernel: &JumpKernel<F>, cut: F) -> F {
    let n = points.len();
    let eval = kernel.prepared();
    let phi_cut = eval.eval_sq(cut * cut);
    // count actual dropped pairs exactly when cheap, otherwise bound by n^2/2
    if n <= 4096 {
        let cut2 = cut * cut;
        let dropped_pairs = par_sum(n, 64, |r| {
            let mut s = F::zero();
            for i in r {
                for j in 0..i {
                    if points.dist_sq(i, j) > cut2 {
                        s += F::one();
                    }
                }
            }
            s
        });
        dropped_pairs * phi_cut
    } else {
        F::us(n) * F::us(n) * phi_cut / F::fl(2.0)
    }
}

/// Radius-truncated network on large point sets, CSR storage, built with a
/// bucket grid in `O(n * neighbors)`.
pub struct SparseNetwork<F> {
    pub csr: Csr<F>,
    w: Vec<F>,
    cut: F,
    dropped_mass_bound: F,
}

impl<F: Scalar> SparseNetwork<F> {
    pub fn node_count(&self) -> usize {
        self.w.len()
    }

    pub fn weight(&self, i: usize) -> F {
        self.w[i]
    }

    pub fn weights(&self) -> &[F] {
        &self.w
    }

    pub fn cut(&self) -> F {
        self.cut
    }

    pub fn dropped_mass_bound(&self) -> F {
        self.dropped_mass_bound
    }

    pub fn conductance(&self, i: usize, j: usize) -> F {
        if i == j {
            F::zero()
        } else {
            self.csr.coupling(i, j)
        }
    }
}

/// Builds a [`SparseNetwork`] keeping pairs within `cut`. Points must
/// already be in the node order the caller wants (e.g. sorted by norm for
/// nested-box solves).
pub fn build_sparse_network<F: Scalar>(
    points: &PointSet<F>,
    kernel: &JumpKernel<F>,
    cut: F,
) -> Result<SparseNetwork<F>> {
    if !(cut > F::zero()) {
        return Err(Error::parameter("truncation radius must be positive"));
    }
    if !kernel.is_builtin_decreasing() {
        return Err(Error::parameter("truncation requires a built-in decaying kernel"));
    }
    let n = points.len();
    if n < 2 {
        return Err(Error::parameter("need at least two points"));
    }
    let dim = points.dim();
    let b = points.box_half_width().to_f64_lossy();
    let cell = cut.to_f64_lossy();
    let cells_per_side = ((2.0 * b / cell).ceil() as usize).max(1);
    let cell_of = |p: &[F]| -> usize {
        let mut idx = 0usize;
        for k in 0..dim {
            let c = (((p[k].to_f64_lossy() + b) / cell) as usize).min(cells_per_side - 1);
            idx = idx * cells_per_side + c;
        }
        idx
    };
    let ncells = cells_per_side.pow(dim as u32);
    let mut bucket_heads: Vec<Vec<u32>> = vec![Vec::new(); ncells];
    for i in 0..n {
        bucket_heads[cell_of(points.point(i))].push(i as u32);
    }
    let eval = kernel.prepared();
    let cut2 = cut * cut;
    // neighbor cells: all offsets in {-1,0,1}^dim
    let mut offsets: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for base in &offsets {
            for d in -1i64..=1 {
                let mut v = base.clone();
                v.push(d);
                next.push(v);
            }
        }
        offsets = next;
    }
    let rows: Vec<(Vec<u32>, Vec<F>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = points.point(i);
            let mut cell_idx = vec![0i64; dim];
            for k in 0..dim {
                cell_idx[k] = (((p[k].to_f64_lossy() + b) / cell) as i64).min(cells_per_side as i64 - 1);
            }
            let mut cols = Vec::new();
            let mut vals = Vec::new();
            for off in &offsets {
                let mut ok = true;
                let mut flat = 0usize;
                for k in 0..dim {
                    let c = cell_idx[k] + off[k];
                    if c < 0 || c >= cells_per_side as i64 {
                        ok = false;
                        break;
                    }
                    flat = flat * cells_per_side + c as usize;
                }
                if !ok {
                    continue;
                }
                for &j in &bucket_heads[flat] {
                    let j = j as usize;
                    if j == i {
                        continue;
                    }
                    let d2 = points.dist_sq(i, j);
                    if d2 <= cut2 {
                        cols.push(j as u32);
                        vals.push(eval.eval_sq(d2));
                    }
                }
            }
            let mut order: Vec<usize> = (0..cols.len()).collect();
            order.sort_unstable_by_key(|&k| cols[k]);
            (
                order.iter().map(|&k| cols[k]).collect(),
                order.iter().map(|&k| vals[k]).collect(),
            )
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0usize);
    let mut total = 0usize;
    for (cols, _) in &rows {
        total += cols.len();
        row_ptr.push(total);
    }
    let mut cols = Vec::with_capacity(total);
    let mut vals = Vec::with_capacity(total);
    let mut w = Vec::with_capacity(n);
    for (c, v) in rows {
        let mut s = F::zero();
        for &x in &v {
            s += x;
        }
        if !(s > F::zero()) {
            return Err(Error::Construction(
                "isolated node after truncation: zero row sum".into(),
            ));
        }
        w.push(s);
        cols.extend(c);
        vals.extend(v);
    }
    // density-based estimate of the dropped mass per node:
    // lambda_hat * integral_{cut}^{diam} surface(t) phi(t) dt, summed over nodes
    let vol = (2.0 * b).powi(dim as i32);
    let lambda_hat = F::fl(n as f64 / vol.max(f64::MIN_POSITIVE));
    let surface = move |t: F| -> F {
        match dim {
            1 => F::fl(2.0),
            2 => F::fl(2.0 * std::f64::consts::PI) * t,
            _ => F::fl(4.0 * std::f64::consts::PI) * t * t,
        }
    };
    let diam = F::fl(2.0 * b * (dim as f64).sqrt());
    let per_node = if diam > cut {
        crate::numeric::adaptive_simpson(
            &|t: F| surface(t) * eval.eval_sq(t * t),
            cut,
            diam,
            F::fl(1e-8),
        )
    } else {
        F::zero()
    };
    let dropped = lambda_hat * per_node * F::us(n);
    Ok(SparseNetwork { csr: Csr { n, row_ptr, cols, vals }, w, cut, dropped_mass_bound: dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::Provenance;
    use approx::assert_relative_eq;

    fn pts_1d(xs: &[f64]) -> Arc<PointSet<f64>> {
        let b = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Arc::new(PointSet::new(1, b, xs.to_vec(), Provenance::new("custom", None)).unwrap())
    }

    #[test]
    fn two_points_single_edge() {
        let pts = pts_1d(&[0.0, 2.0]);
        let k = JumpKernel::poly(1, 1.0).unwrap();
        let net = build_network(&pts, &k, &BuildOptions::default()).unwrap();
        assert_relative_eq!(net.conductance(0, 1), 0.25);
        assert_relative_eq!(net.weight(0), 0.25);
        assert_relative_eq!(net.weight(1), 0.25);
    }

    #[test]
    fn three_collinear_points() {
        let pts = pts_1d(&[0.0, 1.0, 2.0]);
        let k = JumpKernel::poly(1, 1.0).unwrap();
        let net = build_network(&pts, &k, &BuildOptions::default()).unwrap();
        assert_relative_eq!(net.conductance(0, 1), 1.0);
        assert_relative_eq!(net.conductance(1, 2), 1.0);
        assert_relative_eq!(net.conductance(0, 2), 0.25);
    }

    #[test]
    fn lazy_and_materialized_agree_bitwise() {
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin() * 10.0).collect();
        let pts = pts_1d(&xs);
        let k = JumpKernel::poly(1, 1.5).unwrap();
        let a = build_network(&pts, &k, &BuildOptions { materialize: true, ..Default::default() }).unwrap();
        let b = build_network(&pts, &k, &BuildOptions { materialize: false, ..Default::default() }).unwrap();
        for i in 0..a.node_count() {
            assert_eq!(a.weight(i), b.weight(i));
            for j in 0..a.node_count() {
                assert_eq!(a.conductance(i, j), b.conductance(i, j));
            }
        }
    }

    #[test]
    fn truncated_build_is_edge_subset() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let pts = pts_1d(&xs);
        let k = JumpKernel::poly(1, 1.0).unwrap();
        let full = build_network(&pts, &k, &BuildOptions::default()).unwrap();
        let cut = build_network(&pts, &k, &BuildOptions { cut: Some(5.0), ..Default::default() }).unwrap();
        assert!(cut.dropped_mass_bound().unwrap() > 0.0);
        for i in 0..full.node_count() {
            for j in 0..i {
                let c = cut.conductance(i, j);
                assert!(c == full.conductance(i, j) || c == 0.0);
            }
        }
    }

    #[test]
    fn duplicate_points_rejected() {
        let pts = Arc::new(
            PointSet::new(1, 2.0, vec![1.0, 1.0, 0.0], Provenance::new("custom", None)),
        );
        // PointSet itself rejects duplicates
        assert!(pts.as_ref().is_err());
    }

    #[test]
    fn collapse_triangle() {
        // unit triangle: collapse {1,2} -> parallel edges add to 2
        let mut pc = PackedCoupling::zeros(3);
        for i in 1..3usize {
            for j in 0..i {
                pc.c[PackedCoupling::<f64>::idx(i, j)] = 1.0;
            }
        }
        let labels = (0..3).map(NodeLabel::Original).collect();
        let net = DenseNetwork::from_couplings(labels, pc).unwrap();
        let (reduced, map) = net.collapse(&[vec![1, 2]]).unwrap();
        assert_eq!(reduced.node_count(), 2);
        assert_relative_eq!(reduced.conductance(0, 1), 2.0);
        assert_eq!(map.node_map, vec![0, 1, 1]);
    }

    #[test]
    fn collapse_singleton_is_isomorphic() {
        let pts = pts_1d(&[0.0, 1.0, 3.0]);
        let k = JumpKernel::poly(1, 1.0).unwrap();
        let net = build_network(&pts, &k, &BuildOptions::default()).unwrap();
        let (reduced, _) = net.collapse(&[vec![1]]).unwrap();
        assert_eq!(reduced.node_count(), 3);
        // node order: untouched 0,2 then super {1}
        assert_relative_eq!(reduced.conductance(0, 2), net.conductance(0, 1));
        assert_relative_eq!(reduced.conductance(0, 1), net.conductance(0, 2));
    }

    #[test]
    fn collapse_all_but_one_gives_row_sum() {
        let pts = pts_1d(&[0.0, 1.0, 2.5, 4.0]);
        let k = JumpKernel::poly(1, 1.5).unwrap();
        let net = build_network(&pts, &k, &BuildOptions::default()).unwrap();
        let (reduced, _) = net.collapse(&[vec![1, 2, 3]]).unwrap();
        assert_eq!(reduced.node_count(), 2);
        assert_relative_eq!(reduced.conductance(0, 1), net.weight(0), max_relative = 1e-14);
    }

    #[test]
    fn overlapping_groups_rejected() {
        let pts = pts_1d(&[0.0, 1.0, 2.0]);
        let k = JumpKernel::poly(1, 1.0).unwrap();
        let net = build_network(&pts, &k, &BuildOptions::default()).unwrap();
        assert!(net.collapse(&[vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn collapse_associativity() {
        let pts = pts_1d(&[0.0, 0.7, 1.9, 3.2, 5.0, 6.1]);
        let k = JumpKernel::poly(1, 1.0).unwrap();
        let net = build_network(&pts, &k, &BuildOptions::default()).unwrap();
        let (at_once, _) = net.collapse(&[vec![1, 2], vec![4, 5]]).unwrap();
        let (step1, m1) = net.collapse(&[vec![1, 2]]).unwrap();
        // after step1 the nodes 4,5 moved to m1.node_map positions
        let g2: Vec<usize> = vec![m1.node_map[4], m1.node_map[5]];
        let (step2, _) = step1.collapse(&[g2]).unwrap();
        assert_eq!(at_once.node_count(), step2.node_count());
        // node orders differ; compare via labels
        let find = |net: &DenseNetwork<f64>, label: &NodeLabel| {
            net.labels().iter().position(|l| l == label).unwrap()
        };
        for la in at_once.labels() {
            for lb in at_once.labels() {
                if la == lb {
                    continue;
                }
                let (ia, ja) = (find(&at_once, la), find(&at_once, lb));
                let (ib, jb) = (find(&step2, la), find(&step2, lb));
                assert_relative_eq!(
                    at_once.conductance(ia, ja),
                    step2.conductance(ib, jb),
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn reversibility_of_jump_chain() {
        // w(i) p(i,j) symmetric to relative 1e-12
        let xs: Vec<f64> = (0..25).map(|i| (i as f64 * 1.37).rem_euclid(20.0)).collect();
        let mut uniq = xs.clone();
        uniq.sort_by(f64::total_cmp);
        uniq.dedup();
        let pts = pts_1d(&uniq);
        let k = JumpKernel::poly(1, 1.5).unwrap();
        let net = build_network(&pts, &k, &BuildOptions::default()).unwrap();
        for i in 0..net.node_count() {
            for j in 0..net.node_count() {
                if i == j {
                    continue;
                }
                let lhs = net.weight(i) * (net.conductance(i, j) / net.weight(i));
                let rhs = net.weight(j) * (net.conductance(j, i) / net.weight(j));
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn sparse_matches_dense_on_truncated_build() {
        let xs: Vec<f64> = (0..60).map(|i| i as f64 * 0.5 - 15.0).collect();
        let pts = pts_1d(&xs);
        let k = JumpKernel::poly(1, 1.0).unwrap();
        let dense = build_network(&pts, &k, &BuildOptions { cut: Some(3.0), ..Default::default() }).unwrap();
        let sparse = build_sparse_network(pts.as_ref(), &k, 3.0).unwrap();
        for i in 0..dense.node_count() {
            assert_relative_eq!(dense.weight(i), sparse.weight(i), max_relative = 1e-13);
            for j in 0..dense.node_count() {
                if i != j {
                    assert_eq!(dense.conductance(i, j), sparse.conductance(i, j));
                }
            }
        }
    }
}
