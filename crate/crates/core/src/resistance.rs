//! Two-terminal effective resistance, dual variational bounds, Monte Carlo
//! visit counts, trial functions and growth-law fits.
//!
//! `R = 1/C` where `C` is the Dirichlet infimum over potentials pinned to 0
//! at the source and 1 on the (collapsed) sink. Numerically we ground the
//! sink, solve the restricted Laplacian `A u = e_source`, and read
//! `R = u(source)`; the potential `h = 1 - u/R` attains the infimum.

use crate::error::{Error, Result};
use crate::kernel::JumpKernel;
use crate::linalg::{
    gauss_jordan_inverse, pcg, CgOutcome, Csr, FullSpd, LapackScalar, LinOp, PackedSym, Precond,
    TridiagFactor,
};
use crate::network::{build_sparse_network, DenseNetwork};
use crate::numeric::{adaptive_simpson, integral_tail, linear_fit, par_sum};
use crate::pointproc::PointSet;
use crate::rng::substream;
use crate::scalar::Scalar;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveMethod {
    DenseSolve,
    Cg,
    BruteForce,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResistanceResult<F> {
    pub source: usize,
    pub resistance: F,
    /// Relative residual of the solved linear system.
    pub residual: F,
    pub method: SolveMethod,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOptions<F> {
    /// Relative residual tolerance.
    pub tol: F,
    /// Below this interior size the dense direct solver is used.
    pub dense_threshold: usize,
    /// Force a particular method.
    pub method: Option<SolveMethod>,
    /// CG iteration budget as a multiple of sqrt(size).
    pub iter_budget_factor: f64,
}

impl<F: Scalar> Default for SolveOptions<F> {
    fn default() -> Self {
        SolveOptions {
            tol: F::fl(1e-10),
            dense_threshold: 2000,
            method: None,
            iter_budget_factor: 10.0,
        }
    }
}

fn iter_budget(factor: f64, k: usize) -> usize {
    ((factor * (k as f64).sqrt()).ceil() as usize).max(64)
}

struct MaskedOp<'a, F> {
    net: &'a DenseNetwork<F>,
    nodes: &'a [usize],
    diag: Vec<F>,
}

impl<F: Scalar> LinOp<F> for MaskedOp<'_, F> {
    fn size(&self) -> usize {
        self.nodes.len()
    }
    fn apply(&self, x: &[F], y: &mut [F]) {
        let nodes = self.nodes;
        y.par_iter_mut().enumerate().for_each(|(a, ya)| {
            let i = nodes[a];
            let mut acc = self.diag[a] * x[a];
            for (b, &j) in nodes.iter().enumerate() {
                if b != a {
                    acc -= self.net.conductance(i, j) * x[b];
                }
            }
            *ya = acc;
        });
    }
    fn diagonal(&self) -> Vec<F> {
        self.diag.clone()
    }
    fn band(&self) -> Option<(Vec<F>, Vec<F>)> {
        let off: Vec<F> = self
            .nodes
            .windows(2)
            .map(|w| -self.net.conductance(w[0], w[1]))
            .collect();
        Some((self.diag.clone(), off))
    }
}

/// Effective resistance between `source` and the collapsed `sink_group`.
pub fn effective_resistance<F: Scalar>(
    net: &DenseNetwork<F>,
    source: usize,
    sink_group: &[usize],
    opts: &SolveOptions<F>,
) -> Result<ResistanceResult<F>> {
    let n = net.node_count();
    if sink_group.is_empty() {
        return Err(Error::parameter("sink group is empty"));
    }
    let mut is_sink = vec![false; n];
    for &s in sink_group {
        if s >= n {
            return Err(Error::parameter(format!("sink node {s} out of range")));
        }
        is_sink[s] = true;
    }
    if is_sink[source] {
        return Err(Error::parameter("source belongs to the sink group"));
    }
    let nodes: Vec<usize> = (0..n).filter(|&i| !is_sink[i]).collect();
    let src_pos = nodes.binary_search(&source).expect("source is interior");
    let diag: Vec<F> = nodes.iter().map(|&i| net.weight(i)).collect();
    let k = nodes.len();
    let method = opts.method.unwrap_or(if k <= opts.dense_threshold {
        SolveMethod::DenseSolve
    } else {
        SolveMethod::Cg
    });
    let mut b = vec![F::zero(); k];
    b[src_pos] = F::one();
    let op = MaskedOp { net, nodes: &nodes, diag };
    match method {
        SolveMethod::DenseSolve => {
            let mut a = PackedSym::zeros(k);
            for (ai, &i) in nodes.iter().enumerate() {
                a.a[PackedSym::<F>::idx(ai, ai)] = op.diag[ai];
                for (aj, &j) in nodes.iter().enumerate().take(ai) {
                    a.a[PackedSym::<F>::idx(ai, aj)] = -net.conductance(i, j);
                }
            }
            let factor = a.cholesky()?;
            let u = factor.solve(&b);
            let residual = relative_residual(&op, &u, &b);
            Ok(ResistanceResult {
                source,
                resistance: u[src_pos],
                residual,
                method,
                iterations: 0,
            })
        }
        SolveMethod::BruteForce => {
            let mut dense = vec![F::zero(); k * k];
            for (ai, &i) in nodes.iter().enumerate() {
                dense[ai * k + ai] = op.diag[ai];
                for (aj, &j) in nodes.iter().enumerate() {
                    if ai != aj {
                        dense[ai * k + aj] = -net.conductance(i, j);
                    }
                }
            }
            let inv = gauss_jordan_inverse(dense, k)?;
            let u: Vec<F> = (0..k).map(|r| inv[r * k + src_pos]).collect();
            let residual = relative_residual(&op, &u, &b);
            Ok(ResistanceResult {
                source,
                resistance: u[src_pos],
                residual,
                method,
                iterations: 0,
            })
        }
        SolveMethod::Cg => {
            let pre = match op.band() {
                Some((main, off)) => match TridiagFactor::new(&main, &off) {
                    Ok(t) => Precond::Tridiag(t),
                    Err(_) => Precond::Jacobi(op.diagonal()),
                },
                None => Precond::Jacobi(op.diagonal()),
            };
            let budget = iter_budget(opts.iter_budget_factor, k);
            let mut u = vec![F::zero(); k];
            let out: CgOutcome<F> = pcg(&op, &b, &mut u, opts.tol, budget, &pre);
            if !out.converged {
                return Err(Error::Solver {
                    tol: opts.tol.to_f64_lossy(),
                    residual: out.rel_residual.to_f64_lossy(),
                    iterations: out.iterations,
                });
            }
            Ok(ResistanceResult {
                source,
                resistance: u[src_pos],
                residual: out.rel_residual,
                method,
                iterations: out.iterations,
            })
        }
    }
}

fn relative_residual<F: Scalar>(op: &impl LinOp<F>, u: &[F], b: &[F]) -> F {
    let mut r = vec![F::zero(); b.len()];
    op.apply(u, &mut r);
    let mut num = F::zero();
    let mut den = F::zero();
    for i in 0..b.len() {
        let e = b[i] - r[i];
        num += e * e;
        den += b[i] * b[i];
    }
    (num / den).sqrt()
}

/// Dirichlet energy of a trial potential respecting the boundary conditions
/// (`0` at the source, `1` on the sink). The value bounds the effective
/// conductance `C` from above, hence its reciprocal bounds `R` from below.
pub fn dirichlet_energy<F: Scalar>(
    net: &DenseNetwork<F>,
    trial: &[F],
    source: usize,
    sink_group: &[usize],
) -> Result<F> {
    let n = net.node_count();
    if trial.len() != n {
        return Err(Error::parameter("trial length mismatch"));
    }
    if trial[source] != F::zero() {
        return Err(Error::parameter("trial must vanish at the source"));
    }
    for &s in sink_group {
        if trial[s] != F::one() {
            return Err(Error::parameter("trial must equal one on the sink"));
        }
    }
    if trial.iter().any(|&h| h < F::zero() || h > F::one()) {
        return Err(Error::parameter("trial values must lie in [0, 1]"));
    }
    Ok(par_sum(n, 32, |rows| {
        let mut s = F::zero();
        for i in rows {
            for j in 0..i {
                let d = trial[i] - trial[j];
                s += net.conductance(i, j) * d * d;
            }
        }
        s
    }))
}

/// Energy `1/2 sum r(i,j) f(i,j)^2` of an explicit antisymmetric edge flow
/// given as a list `(i, j, value)` with `i < j`; `r = 1/c`.
pub fn flow_energy<F: Scalar>(net: &DenseNetwork<F>, edges: &[(usize, usize, F)]) -> F {
    edges.iter().fold(F::zero(), |acc, &(i, j, v)| {
        let c = net.conductance(i, j);
        if c > F::zero() {
            acc + v * v / c
        } else {
            acc
        }
    })
}

// ---------------------------------------------------------------------------
// box profiles
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ProfileEntry<F> {
    pub n: usize,
    pub interior: usize,
    pub resistance: F,
    pub residual: F,
    pub iterations: usize,
    pub method: SolveMethod,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileResult<F> {
    pub entries: Vec<ProfileEntry<F>>,
    /// Boxes skipped because no point of the sample lies outside them.
    pub skipped: Vec<usize>,
    pub dropped_mass_bound: Option<F>,
}

#[derive(Debug, Clone)]
pub struct ProfileOptions<F> {
    pub solve: SolveOptions<F>,
    /// Maximum interior size for the materialized complete-graph path.
    pub packed_budget: usize,
    /// Truncation radius; required when the interior exceeds the packed
    /// budget.
    pub cut: Option<F>,
}

impl<F: Scalar> Default for ProfileOptions<F> {
    fn default() -> Self {
        ProfileOptions { solve: SolveOptions::default(), packed_budget: 9000, cut: None }
    }
}

/// Effective resistance from point `source` to the collapsed complement of
/// `[-n, n]^d`, for each `n` in the increasing list.
///
/// All boxes reuse one coupling structure: node `j` participates in the
/// `n`-box system iff its max-norm is at most `n`, so after sorting nodes by
/// max-norm (d >= 2, CSR) or taking coordinate ranges (d = 1, packed
/// complete graph) each grounded Laplacian is a sub-block of the largest
/// one. Diagonal entries are full row sums, which already accounts for the
/// collapsed exterior.
pub fn box_resistance_profile<F: LapackScalar>(
    points: &PointSet<F>,
    kernel: &JumpKernel<F>,
    source: usize,
    n_list: &[usize],
    opts: &ProfileOptions<F>,
) -> Result<ProfileResult<F>> {
    if n_list.is_empty() {
        return Err(Error::parameter("empty box list"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::parameter("box list must be strictly increasing"));
    }
    if source >= points.len() {
        return Err(Error::parameter("source out of range"));
    }
    if points.norm_inf(source) > F::us(n_list[0]) {
        return Err(Error::parameter("source lies outside the smallest box"));
    }
    let m = points.len();
    let mut skipped = Vec::new();
    let active: Vec<usize> = n_list
        .iter()
        .filter(|&&n| {
            let bound = F::us(n);
            let has_exterior = (0..m).any(|i| points.norm_inf(i) > bound);
            if !has_exterior {
                skipped.push(n);
            }
            has_exterior
        })
        .copied()
        .collect();
    if active.is_empty() {
        return Err(Error::parameter("no box leaves a nonempty exterior"));
    }
    if opts.cut.is_none() {
        profile_dense(points, kernel, source, &active, skipped, opts)
    } else {
        profile_sparse(points, kernel, source, &active, skipped, opts)
    }
}

/// Norm-ordering of node indices, with lexicographic tie-breaking.
fn norm_order<F: Scalar>(points: &PointSet<F>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points
            .norm_inf(a)
            .partial_cmp(&points.norm_inf(b))
            .unwrap()
            .then_with(|| points.point(a).partial_cmp(points.point(b)).unwrap())
    });
    order
}

/// Complete-graph profile via one Cholesky factorization: nodes are sorted
/// by max-norm so every box system is a leading block of the largest one,
/// and `R_n` is a partial sum of squares of `L^{-1} e_source`.
fn profile_dense<F: LapackScalar>(
    points: &PointSet<F>,
    kernel: &JumpKernel<F>,
    source: usize,
    active: &[usize],
    skipped: Vec<usize>,
    opts: &ProfileOptions<F>,
) -> Result<ProfileResult<F>> {
    let m = points.len();
    let order = norm_order(points);
    let src_pos = order.iter().position(|&i| i == source).unwrap();
    let norms: Vec<F> = order.iter().map(|&i| points.norm_inf(i)).collect();
    let n_last = F::us(*active.last().unwrap());
    let k_max = norms.partition_point(|&v| v <= n_last);
    if k_max > opts.packed_budget {
        return Err(Error::parameter(format!(
            "largest box holds {k_max} nodes, above the budget {}; set a truncation radius",
            opts.packed_budget
        )));
    }
    let eval = kernel.prepared();
    // full row sums over all m points, in node order
    let diag: Vec<F> = (0..k_max)
        .into_par_iter()
        .map(|a| {
            let i = order[a];
            let mut s = F::zero();
            for j in 0..m {
                if j != i {
                    s += eval.eval_sq(points.dist_sq(i, j));
                }
            }
            s
        })
        .collect();
    let mut sys = FullSpd::new(k_max);
    sys.fill_columns(|c, col| {
        let pc = order[c];
        for (r, slot) in col.iter_mut().enumerate() {
            *slot = if r == c {
                diag[c]
            } else {
                -eval.eval_sq(points.dist_sq(order[r], pc))
            };
        }
    });
    sys.finish_fill();
    sys.factor()?;
    let y = sys.forward_unit(src_pos)?;
    let mut csum = Vec::with_capacity(k_max);
    let mut acc = F::zero();
    for &v in &y {
        acc += v * v;
        csum.push(acc);
    }
    let mut entries = Vec::new();
    for &n in active {
        let k = norms.partition_point(|&v| v <= F::us(n));
        let resistance = csum[k - 1];
        // recover the box solution and report its true residual
        let u = sys.prefix_solution(&y, k)?;
        let mut r = vec![F::zero(); k];
        sys.apply_original_prefix(k, &u, &mut r);
        let mut num = F::zero();
        for (i, &ri) in r.iter().enumerate() {
            let bi = if i == src_pos { F::one() } else { F::zero() };
            let e = bi - ri;
            num += e * e;
        }
        entries.push(ProfileEntry {
            n,
            interior: k,
            resistance,
            residual: num.sqrt(),
            iterations: 0,
            method: SolveMethod::DenseSolve,
        });
    }
    Ok(ProfileResult { entries, skipped, dropped_mass_bound: None })
}


struct CsrPrefixOp<'a, F> {
    csr: &'a Csr<F>,
    diag: &'a [F],
    k: usize,
}

impl<F: Scalar> LinOp<F> for CsrPrefixOp<'_, F> {
    fn size(&self) -> usize {
        self.k
    }
    fn apply(&self, x: &[F], y: &mut [F]) {
        self.csr.laplacian_matvec_prefix(&self.diag[..self.k], self.k, x, y);
    }
    fn diagonal(&self) -> Vec<F> {
        self.diag[..self.k].to_vec()
    }
}

fn profile_sparse<F: LapackScalar>(
    points: &PointSet<F>,
    kernel: &JumpKernel<F>,
    source: usize,
    active: &[usize],
    skipped: Vec<usize>,
    opts: &ProfileOptions<F>,
) -> Result<ProfileResult<F>> {
    let cut = opts.cut.ok_or_else(|| {
        Error::parameter("profiles beyond the packed budget need a truncation radius")
    })?;
    let m = points.len();
    let dim = points.dim();
    // order nodes by max-norm so boxes are prefixes
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        points
            .norm_inf(a)
            .partial_cmp(&points.norm_inf(b))
            .unwrap()
            .then_with(|| points.point(a).partial_cmp(points.point(b)).unwrap())
    });
    let mut coords = Vec::with_capacity(m * dim);
    for &i in &order {
        coords.extend_from_slice(points.point(i));
    }
    let reordered = PointSet::from_ordered_unchecked(
        dim,
        points.box_half_width(),
        coords,
        points.provenance().clone(),
    );
    let src_pos = order.iter().position(|&i| i == source).unwrap();
    let sparse = build_sparse_network(&reordered, kernel, cut)?;
    let norms: Vec<F> = (0..m).map(|i| reordered.norm_inf(i)).collect();
    let mut entries = Vec::new();
    let mut warm: Vec<F> = Vec::new();
    for &n in active {
        let k = norms.partition_point(|&v| v <= F::us(n));
        let op = CsrPrefixOp { csr: &sparse.csr, diag: sparse.weights(), k };
        let mut b = vec![F::zero(); k];
        b[src_pos] = F::one();
        let mut u = vec![F::zero(); k];
        u[..warm.len().min(k)].copy_from_slice(&warm[..warm.len().min(k)]);
        let pre = Precond::Jacobi(op.diagonal());
        let budget = iter_budget(opts.solve.iter_budget_factor, k);
        let out = pcg(&op, &b, &mut u, opts.solve.tol, budget, &pre);
        if !out.converged {
            return Err(Error::Solver {
                tol: opts.solve.tol.to_f64_lossy(),
                residual: out.rel_residual.to_f64_lossy(),
                iterations: out.iterations,
            });
        }
        entries.push(ProfileEntry {
            n,
            interior: k,
            resistance: u[src_pos],
            residual: out.rel_residual,
            iterations: out.iterations,
            method: SolveMethod::Cg,
        });
        warm = u;
    }
    Ok(ProfileResult {
        entries,
        skipped,
        dropped_mass_bound: Some(sparse.dropped_mass_bound()),
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo visit counts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VisitEstimate<F> {
    pub mean: F,
    pub std_err: F,
    pub walkers: usize,
}

/// Expected number of visits to `source` (counting time zero) before the
/// jump chain first enters `sink_group`. Dividing by `w(source)` estimates
/// the effective resistance.
pub fn mc_visits<F: Scalar>(
    net: &DenseNetwork<F>,
    source: usize,
    sink_group: &[usize],
    walkers: usize,
    seed: u64,
) -> Result<VisitEstimate<F>> {
    let n = net.node_count();
    if walkers == 0 {
        return Err(Error::parameter("need at least one walker"));
    }
    if n > 4000 {
        return Err(Error::parameter("mc_visits materializes cumulative rows; use <= 4000 nodes"));
    }
    let mut is_sink = vec![false; n];
    for &s in sink_group {
        is_sink[s] = true;
    }
    if is_sink[source] {
        return Err(Error::parameter("source belongs to the sink group"));
    }
    // cumulative conductance rows for inverse-cdf sampling
    let cum: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0f64;
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                if j != i {
                    acc += net.conductance(i, j).to_f64_lossy();
                }
                row.push(acc);
            }
            row
        })
        .collect();
    let totals: Vec<(u64, u128)> = (0..walkers)
        .into_par_iter()
        .map(|wk| {
            let mut rng = substream(seed, "mc-visits", wk as u64);
            let mut at = source;
            let mut visits = 1u64;
            loop {
                let row = &cum[at];
                let total = row[n - 1];
                let u = rng.random_range(0.0..total);
                let next = row.partition_point(|&c| c <= u);
                at = next.min(n - 1);
                if is_sink[at] {
                    break;
                }
                if at == source {
                    visits += 1;
                }
            }
            (visits, (visits as u128) * (visits as u128))
        })
        .collect();
    let sum: u64 = totals.iter().map(|t| t.0).sum();
    let sum_sq: u128 = totals.iter().map(|t| t.1).sum();
    let wf = walkers as f64;
    let mean = sum as f64 / wf;
    let var = (sum_sq as f64 / wf - mean * mean) * wf / (wf - 1.0).max(1.0);
    let se = (var / wf).sqrt();
    Ok(VisitEstimate { mean: F::fl(mean), std_err: F::fl(se), walkers })
}

// ---------------------------------------------------------------------------
// trial functions
// ---------------------------------------------------------------------------

/// Tabulated radial trial function `f(x) = int_0^x g`, with
/// `g(t) = (1 + int_0^t min(1, s^{1-alpha}) ds)^{-1}`.
#[derive(Debug, Clone)]
pub struct TrialFunction<F> {
    pub alpha: F,
    pub f: Vec<F>,
    pub g: Vec<F>,
}

/// Closed form of the inner integral: `t` for `t <= 1`, else
/// `1 + (t^{2-alpha}-1)/(2-alpha)` (or `1 + log t` at `alpha = 2`).
pub fn trial_g<F: Scalar>(alpha: F, t: F) -> F {
    if t <= F::one() {
        return (F::one() + t).recip();
    }
    let two = F::fl(2.0);
    let inner = if (alpha - two).abs() < F::fl(1e-12) {
        F::one() + t.ln()
    } else {
        F::one() + (t.powf(two - alpha) - F::one()) / (two - alpha)
    };
    (F::one() + inner).recip()
}

/// Tabulates `f` and `g` on `0..=n_max` by per-interval adaptive quadrature.
pub fn trial_function<F: Scalar>(alpha: F, n_max: usize) -> Result<TrialFunction<F>> {
    if alpha < F::one() {
        return Err(Error::Unsupported("trial functions are defined for alpha >= 1".into()));
    }
    let mut f = Vec::with_capacity(n_max + 1);
    let mut g = Vec::with_capacity(n_max + 1);
    f.push(F::zero());
    g.push(trial_g(alpha, F::zero()));
    let mut acc = F::zero();
    for k in 0..n_max {
        let a = F::us(k);
        let b = F::us(k + 1);
        acc += adaptive_simpson(&|t| trial_g(alpha, t), a, b, F::fl(1e-10));
        f.push(acc);
        g.push(trial_g(alpha, b));
    }
    Ok(TrialFunction { alpha, f, g })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRatioRow<F> {
    pub i: usize,
    pub value: F,
    pub ratio: F,
    pub tail_bound: F,
}

/// For each `i`, evaluates `X_i = sum_{j>i} (j-i)^{-1-alpha} (f_j - f_i)^2`
/// truncated at `j - i = j_cap` plus an analytic tail bound, and reports the
/// ratio `X_i / g(i)`. The proven bound says these ratios stay below a
/// constant for `alpha in [1, 2]`.
pub fn trial_tail_ratios<F: Scalar>(
    alpha: F,
    i_list: &[usize],
    j_cap: usize,
) -> Result<Vec<TailRatioRow<F>>> {
    if !(alpha >= F::one() && alpha <= F::fl(2.0)) {
        return Err(Error::Unsupported("tail ratios are checked for alpha in [1, 2]".into()));
    }
    let i_max = *i_list.iter().max().ok_or_else(|| Error::parameter("empty index list"))?;
    let table = trial_function(alpha, i_max + j_cap)?;
    let f = &table.f;
    let two = F::fl(2.0);
    // asymptotic shape of f for the tail bound
    let shape: Box<dyn Fn(F) -> F + Sync> = if (alpha - F::one()).abs() < F::fl(1e-12) {
        Box::new(|x: F| (F::one() + x).ln())
    } else if (alpha - two).abs() < F::fl(1e-12) {
        Box::new(|x: F| x / (F::fl(std::f64::consts::E) + x).ln())
    } else {
        Box::new(move |x: F| x.powf(alpha - F::one()))
    };
    let mut cf = F::zero();
    for k in 1..f.len() {
        let s = shape(F::us(k));
        if s > F::zero() {
            cf = cf.max(f[k] / s);
        }
    }
    let e = F::one() + alpha;
    let mut rows = Vec::new();
    for &i in i_list {
        let fi = f[i];
        let xi = par_sum(j_cap, 1 << 14, |r| {
            let mut s = F::zero();
            for off in r {
                let j = i + off + 1;
                let gap = F::us(off + 1);
                let df = f[j] - fi;
                s += gap.powf(-e) * df * df;
            }
            s
        });
        // tail over j > i + j_cap: (j - i) >= j/2 there, f_j <= cf * shape(j)
        let start = F::us(i + j_cap);
        let integrand = |x: F| {
            let sx = shape(x);
            cf * cf * sx * sx * x.powf(-e)
        };
        let tail = two.powf(e) * integral_tail(&integrand, start, F::fl(1e-8));
        let gi = trial_g(alpha, F::us(i));
        rows.push(TailRatioRow { i, value: xi + tail, ratio: (xi + tail) / gi, tail_bound: tail });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// growth-law fits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GrowthModel {
    /// `log R ~ a + b log n`; slope is the exponent.
    Power,
    /// `R ~ a + b log n`.
    Log,
    /// `R log n ~ a + b n`.
    NOverLog,
    /// `R sqrt(log n) ~ a + b n`.
    NOverSqrtLog,
    /// `R ~ a + b log log n`.
    LogLog,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit<F> {
    pub model: GrowthModel,
    pub slope: F,
    pub intercept: F,
    pub residual_norm: F,
    pub n_range: (usize, usize),
}

/// Least squares on the coordinates appropriate to the model.
pub fn fit_growth<F: Scalar>(profile: &[(usize, F)], model: GrowthModel) -> Result<ScalingFit<F>> {
    if profile.len() < 4 {
        return Err(Error::Data("need at least four profile points".into()));
    }
    let n_min = profile.iter().map(|p| p.0).min().unwrap();
    let n_max = profile.iter().map(|p| p.0).max().unwrap();
    if n_max < 4 * n_min {
        return Err(Error::Data("profile must span at least two octaves".into()));
    }
    if profile.iter().any(|&(_, r)| !(r > F::zero())) {
        return Err(Error::Data("non-positive resistance in profile".into()));
    }
    let (xs, ys): (Vec<F>, Vec<F>) = profile
        .iter()
        .map(|&(n, r)| {
            let nf = F::us(n);
            match model {
                GrowthModel::Power => (nf.ln(), r.ln()),
                GrowthModel::Log => (nf.ln(), r),
                GrowthModel::NOverLog => (nf, r * nf.ln()),
                GrowthModel::NOverSqrtLog => (nf, r * nf.ln().sqrt()),
                GrowthModel::LogLog => (nf.ln().ln(), r),
            }
        })
        .unzip();
    let (a, b, res) = linear_fit(&xs, &ys);
    Ok(ScalingFit { model, slope: b, intercept: a, residual_norm: res, n_range: (n_min, n_max) })
}
