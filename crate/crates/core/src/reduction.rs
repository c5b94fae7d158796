//! Network reduction pipeline: cube collapse to a multiplicity field with a
//! power-law resistance floor, one-dimensional pair folding, two-dimensional
//! shell collapse, and series splitting down to a nearest-neighbor chain.
//!
//! Every stage only shorts nodes or lowers wire resistances, so effective
//! resistances never increase along the pipeline and the final chain sum is
//! a certified lower bound for the original network.

use crate::error::{Error, Result};
use crate::linalg::PackedCoupling;
use crate::network::{DenseNetwork, NodeLabel};
use crate::pointproc::PointSet;
use crate::rng::substream;
use crate::scalar::Scalar;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

/// Multiplicity field on `Z^dim` inside the box `[lo, hi]^dim` (inclusive),
/// with `gamma(u) * gamma(v)` parallel wires of resistance
/// `rho_coefficient * |u-v|^{dim+alpha}` between distinct sites.
#[derive(Debug, Clone)]
pub struct CoarseNetwork<F> {
    pub dim: usize,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub gamma: Vec<u64>,
    pub rho_coefficient: F,
    pub alpha: F,
}

impl<F: Scalar> CoarseNetwork<F> {
    fn side(&self, k: usize) -> usize {
        (self.hi[k] - self.lo[k] + 1) as usize
    }

    pub fn site_count(&self) -> usize {
        (0..self.dim).map(|k| self.side(k)).product()
    }

    pub fn index(&self, v: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..self.dim {
            if v[k] < self.lo[k] || v[k] > self.hi[k] {
                return None;
            }
            idx = idx * self.side(k) + (v[k] - self.lo[k]) as usize;
        }
        Some(idx)
    }

    pub fn site(&self, mut idx: usize) -> Vec<i64> {
        let mut v = vec![0i64; self.dim];
        for k in (0..self.dim).rev() {
            let s = self.side(k);
            v[k] = (idx % s) as i64 + self.lo[k];
            idx /= s;
        }
        v
    }

    pub fn gamma_at(&self, v: &[i64]) -> u64 {
        self.index(v).map(|i| self.gamma[i]).unwrap_or(0)
    }

    pub fn total_mass(&self) -> u64 {
        self.gamma.iter().sum()
    }

    /// Conductance between distinct sites: `gamma_u gamma_v / rho_{u,v}`.
    pub fn conductance(&self, u: &[i64], v: &[i64]) -> F {
        let gu = self.gamma_at(u);
        let gv = self.gamma_at(v);
        if gu == 0 || gv == 0 {
            return F::zero();
        }
        let mut d2 = 0f64;
        for k in 0..self.dim {
            let d = (u[k] - v[k]) as f64;
            d2 += d * d;
        }
        let e = (F::us(self.dim) + self.alpha) / F::fl(2.0);
        F::fl((gu * gv) as f64) / (self.rho_coefficient * F::fl(d2).powf(e))
    }

    /// Materializes the occupied sites as an explicit resistor network for
    /// solver cross-checks; returns the network and the kept coordinates.
    pub fn to_dense_network(&self) -> Result<(DenseNetwork<F>, Vec<Vec<i64>>)> {
        let occupied: Vec<usize> =
            (0..self.site_count()).filter(|&i| self.gamma[i] > 0).collect();
        let sites: Vec<Vec<i64>> = occupied.iter().map(|&i| self.site(i)).collect();
        let n = occupied.len();
        if n < 2 {
            return Err(Error::Construction(
                "coarse network has fewer than two occupied sites".into(),
            ));
        }
        let e = (F::us(self.dim) + self.alpha) / F::fl(2.0);
        let c = self.rho_coefficient;
        let mut pc = PackedCoupling::zeros(n);
        pc.c.par_chunks_mut(1 << 13).enumerate().for_each(|(ci, slab)| {
            let flat0 = ci << 13;
            let mut i = ((1.0 + (1.0 + 8.0 * flat0 as f64).sqrt()) / 2.0) as usize;
            while i >= 1 && i * (i - 1) / 2 > flat0 {
                i -= 1;
            }
            while (i + 1) * i / 2 <= flat0 {
                i += 1;
            }
            let mut j = flat0 - i * (i - 1) / 2;
            for slot in slab.iter_mut() {
                let gu = self.gamma[occupied[i]] as f64;
                let gv = self.gamma[occupied[j]] as f64;
                let mut d2 = 0f64;
                for k in 0..self.dim {
                    let d = (sites[i][k] - sites[j][k]) as f64;
                    d2 += d * d;
                }
                *slot = F::fl(gu * gv) / (c * F::fl(d2).powf(e));
                j += 1;
                if j == i {
                    i += 1;
                    j = 0;
                }
            }
        });
        let labels = (0..n).map(NodeLabel::Original).collect();
        Ok((DenseNetwork::from_couplings(labels, pc)?, sites))
    }
}

/// Largest coefficient for which `c |u - v|^{d+alpha}` is a certified lower
/// bound on every wire resistance between points of cubes `Q_u`, `Q_v`:
/// points can be as close as `L(|u - v| - sqrt(d))` (but the kernel caps
/// resistances below at one), and the binding offset is
/// `|u - v| = sqrt(d) + 1/L`, giving `c = (sqrt(d) + 1/L)^{-(d+alpha)}`.
/// Replacing true wire resistances by this law only lowers resistances.
pub fn cube_rho_coefficient<F: Scalar>(dim: usize, alpha: F, cell: usize) -> F {
    let base = F::us(dim).sqrt() + F::fl(1.0 / cell as f64);
    base.powf(-(F::us(dim) + alpha))
}

/// Collapses all points in each cube `Q_{vL,L}` into one site, counts
/// multiplicities, increments the origin, and attaches the worst-case
/// resistance law.
pub fn cube_collapse<F: Scalar>(
    points: &PointSet<F>,
    cell: usize,
    alpha: F,
) -> Result<CoarseNetwork<F>> {
    if cell == 0 {
        return Err(Error::parameter("cell size must be at least 1"));
    }
    let dim = points.dim();
    let lf = cell as f64;
    let w = (points.box_half_width().to_f64_lossy() / lf + 0.5).floor() as i64;
    let net_box = CoarseNetwork {
        dim,
        lo: vec![-w; dim],
        hi: vec![w; dim],
        gamma: Vec::new(),
        rho_coefficient: cube_rho_coefficient(dim, alpha, cell),
        alpha,
    };
    let mut gamma = vec![0u64; net_box.site_count()];
    let mut site = vec![0i64; dim];
    for i in 0..points.len() {
        let p = points.point(i);
        for k in 0..dim {
            site[k] = (p[k].to_f64_lossy() / lf + 0.5).floor() as i64;
        }
        let idx = net_box
            .index(&site)
            .ok_or_else(|| Error::Construction("point maps outside the coarse box".into()))?;
        gamma[idx] += 1;
    }
    let mut out = CoarseNetwork { gamma, ..net_box };
    let origin_idx = out.index(&vec![0i64; dim]).unwrap();
    out.gamma[origin_idx] += 1;
    Ok(out)
}

/// I.i.d. multiplicity laws for the dominating field.
#[derive(Debug, Clone, Serialize)]
pub enum GammaField {
    Deterministic(u64),
    Poisson(f64),
    Bernoulli(f64),
}

/// Builds a coarse network directly from an i.i.d. multiplicity field
/// (the dominating-field surrogate used by probes and tests).
pub fn coarse_from_field<F: Scalar>(
    dim: usize,
    half_width: i64,
    alpha: F,
    field: &GammaField,
    seed: u64,
    increment_origin: bool,
) -> Result<CoarseNetwork<F>> {
    let mut out = CoarseNetwork {
        dim,
        lo: vec![-half_width; dim],
        hi: vec![half_width; dim],
        gamma: Vec::new(),
        rho_coefficient: cube_rho_coefficient(dim, alpha, 1),
        alpha,
    };
    let count = out.site_count();
    let mut rng = substream(seed, "coarse-field", 0);
    let gamma: Vec<u64> = match field {
        GammaField::Deterministic(k) => vec![*k; count],
        GammaField::Poisson(lambda) => {
            let p = Poisson::new(*lambda).map_err(|e| Error::Parameter(e.to_string()))?;
            (0..count).map(|_| p.sample(&mut rng) as u64).collect()
        }
        GammaField::Bernoulli(p) => {
            (0..count).map(|_| u64::from(rng.random_range(0.0..1.0) < *p)).collect()
        }
    };
    out.gamma = gamma;
    if increment_origin {
        let idx = out.index(&vec![0i64; dim]).unwrap();
        out.gamma[idx] += 1;
    }
    Ok(out)
}

/// Folds `{v, -v}` pairs of a one-dimensional coarse network into single
/// sites on `{0, 1, ...}`: multiplicities add, and every wire between the
/// folded sites `i < j` keeps the (lowered) resistance `rho_{i,j}`.
pub fn fold_pairs_1d<F: Scalar>(coarse: &CoarseNetwork<F>) -> Result<CoarseNetwork<F>> {
    if coarse.dim != 1 {
        return Err(Error::Unsupported("pair folding applies to one-dimensional networks".into()));
    }
    let w = coarse.hi[0].max(-coarse.lo[0]);
    let mut gamma = vec![0u64; (w + 1) as usize];
    for i in 0..=w {
        gamma[i as usize] =
            coarse.gamma_at(&[i]) + if i > 0 { coarse.gamma_at(&[-i]) } else { 0 };
    }
    Ok(CoarseNetwork {
        dim: 1,
        lo: vec![0],
        hi: vec![w],
        gamma,
        rho_coefficient: coarse.rho_coefficient,
        alpha: coarse.alpha,
    })
}

/// Two-dimensional shell structure: shell `a` holds the multiplicities of
/// the sites with `||u||_inf = a`, keeping positions for the resistance
/// law.
#[derive(Debug, Clone)]
pub struct ShellNetwork<F> {
    pub shells: Vec<Vec<([i64; 2], u64)>>,
    pub rho_coefficient: F,
    pub alpha: F,
}

/// Groups the sites of a two-dimensional coarse network by max-norm shells.
pub fn shell_collapse_2d<F: Scalar>(coarse: &CoarseNetwork<F>) -> Result<ShellNetwork<F>> {
    if coarse.dim != 2 {
        return Err(Error::Unsupported(
            "shell collapse applies to two-dimensional networks".into(),
        ));
    }
    let w = (0..2).map(|k| coarse.hi[k].max(-coarse.lo[k])).max().unwrap();
    let mut shells: Vec<Vec<([i64; 2], u64)>> = vec![Vec::new(); (w + 1) as usize];
    for idx in 0..coarse.site_count() {
        let g = coarse.gamma[idx];
        if g > 0 {
            let v = coarse.site(idx);
            let a = v[0].abs().max(v[1].abs()) as usize;
            shells[a].push(([v[0], v[1]], g));
        }
    }
    Ok(ShellNetwork { shells, rho_coefficient: coarse.rho_coefficient, alpha: coarse.alpha })
}

/// Shell-collapsed network as an explicit resistor network for solver
/// cross-checks: one node per occupied shell, returned with the shell index
/// of each node.
pub fn shell_network_to_dense<F: Scalar>(
    shells: &ShellNetwork<F>,
) -> Result<(DenseNetwork<F>, Vec<usize>)> {
    let occupied: Vec<usize> =
        (0..shells.shells.len()).filter(|&a| !shells.shells[a].is_empty()).collect();
    let e = (F::fl(2.0) + shells.alpha) / F::fl(2.0);
    let c = shells.rho_coefficient;
    let n = occupied.len();
    if n < 2 {
        return Err(Error::Construction("fewer than two occupied shells".into()));
    }
    let mut pc = PackedCoupling::zeros(n);
    for bi in 1..n {
        for ai in 0..bi {
            let mut s = F::zero();
            for &(u, gu) in &shells.shells[occupied[ai]] {
                for &(v, gv) in &shells.shells[occupied[bi]] {
                    let dx = u[0] - v[0];
                    let dy = u[1] - v[1];
                    let d2 = F::fl((dx * dx + dy * dy) as f64);
                    s += F::fl((gu * gv) as f64) / (c * d2.powf(e));
                }
            }
            pc.c[PackedCoupling::<F>::idx(bi, ai)] = s;
        }
    }
    let labels = (0..n).map(NodeLabel::Original).collect();
    Ok((DenseNetwork::from_couplings(labels, pc)?, occupied))
}

/// Nearest-neighbor chain with link conductances `phi_i` between `i-1` and
/// `i`.
#[derive(Debug, Clone, Serialize)]
pub struct ChainNetwork<F> {
    pub phi: Vec<F>,
}

impl<F> ChainNetwork<F> {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// Reciprocal resistance-law table on integer squared distances.
struct RhoInvTable<F> {
    inv: Vec<F>,
}

impl<F: Scalar> RhoInvTable<F> {
    fn new(dim: usize, alpha: F, coefficient: F, max_d2: usize) -> Self {
        let e = (F::us(dim) + alpha) / F::fl(2.0);
        let inv: Vec<F> = (0..=max_d2)
            .into_par_iter()
            .map(|d2| {
                if d2 == 0 {
                    F::zero()
                } else {
                    (coefficient * F::us(d2).powf(e)).recip()
                }
            })
            .collect();
        RhoInvTable { inv }
    }

    #[inline]
    fn get(&self, d2: usize) -> F {
        self.inv[d2]
    }
}

fn flat_shells<F>(shells: &ShellNetwork<F>, range: std::ops::Range<usize>) -> Vec<(i64, i64, i64, f64)> {
    // (x, y, shell index, multiplicity)
    let mut out = Vec::new();
    for a in range {
        for &(u, g) in &shells.shells[a] {
            out.push((u[0], u[1], a as i64, g as f64));
        }
    }
    out
}

/// Single chain-link conductance
/// `phi_i = sum_{a<i} sum_{b>=i} sum_{u in F_a} sum_{v in F_b} (b-a) G_u G_v / rho_{u,v}`,
/// with the `b`-sum truncated at the outermost available shell.
pub fn chain_conductance<F: Scalar>(shells: &ShellNetwork<F>, i: usize) -> Result<F> {
    let a_max = shells.shells.len().saturating_sub(1);
    if i == 0 || i > a_max {
        return Err(Error::parameter(format!("link index {i} outside 1..={a_max}")));
    }
    let w = a_max as i64;
    let max_d2 = (2 * (2 * w) * (2 * w)) as usize;
    let table = RhoInvTable::new(2, shells.alpha, shells.rho_coefficient, max_d2);
    let inner = flat_shells(shells, 0..i);
    let outer = flat_shells(shells, i..a_max + 1);
    Ok(pair_sum(&inner, &outer, &table))
}

/// All chain links at once, sharing one distance table.
pub fn chain_conductances<F: Scalar>(shells: &ShellNetwork<F>, i_list: &[usize]) -> Result<Vec<F>> {
    let a_max = shells.shells.len().saturating_sub(1);
    let w = a_max as i64;
    let max_d2 = (2 * (2 * w) * (2 * w)) as usize;
    let table = RhoInvTable::new(2, shells.alpha, shells.rho_coefficient, max_d2);
    i_list
        .iter()
        .map(|&i| {
            if i == 0 || i > a_max {
                return Err(Error::parameter(format!("link index {i} outside 1..={a_max}")));
            }
            let inner = flat_shells(shells, 0..i);
            let outer = flat_shells(shells, i..a_max + 1);
            Ok(pair_sum(&inner, &outer, &table))
        })
        .collect()
}

fn pair_sum<F: Scalar>(
    inner: &[(i64, i64, i64, f64)],
    outer: &[(i64, i64, i64, f64)],
    table: &RhoInvTable<F>,
) -> F {
    let blocks: Vec<F> = inner
        .par_chunks(32)
        .map(|chunk| {
            let mut s = F::zero();
            for &(ux, uy, a, gu) in chunk {
                let mut local = F::zero();
                for &(vx, vy, b, gv) in outer {
                    let dx = ux - vx;
                    let dy = uy - vy;
                    let d2 = (dx * dx + dy * dy) as usize;
                    local += F::fl((b - a) as f64 * gv) * table.get(d2);
                }
                s += F::fl(gu) * local;
            }
            s
        })
        .collect();
    blocks.into_iter().fold(F::zero(), |a, b| a + b)
}

/// Splits every long wire into unit series pieces attached to the shells it
/// crosses, producing the nearest-neighbor chain.
pub fn series_split<F: Scalar>(shells: &ShellNetwork<F>) -> Result<ChainNetwork<F>> {
    let a_max = shells.shells.len().saturating_sub(1);
    if a_max == 0 {
        return Err(Error::parameter("need at least two shells"));
    }
    let idx: Vec<usize> = (1..=a_max).collect();
    let phi = chain_conductances(shells, &idx)?;
    Ok(ChainNetwork { phi })
}

/// Series resistance of the first `n + 1` links.
pub fn chain_resistance<F: Scalar>(chain: &ChainNetwork<F>, n: usize) -> Result<F> {
    if n + 1 > chain.phi.len() {
        return Err(Error::parameter(format!(
            "chain has {} links, need {}",
            chain.phi.len(),
            n + 1
        )));
    }
    let mut s = F::zero();
    for i in 0..=n {
        let p = chain.phi[i];
        if !(p > F::zero()) {
            return Err(Error::Data(format!("non-positive chain conductance at link {}", i + 1)));
        }
        s += p.recip();
    }
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow<F> {
    pub i: usize,
    pub mean: F,
    pub mean_over_omega: F,
    pub fourth_central: F,
    pub fourth_over_i_sq: F,
    pub trials: usize,
}

/// Monte Carlo probe of the chain-link statistics over independent
/// multiplicity fields: reports `E(phi_i) / omega_i` (with
/// `omega_i = i log i` at `alpha = 2`, `omega_i = i` for `alpha > 2`) and
/// the fourth central moment over `i^2`.
pub fn phi_moment_probe<F: Scalar>(
    field: &GammaField,
    alpha: F,
    i_list: &[usize],
    trials: usize,
    box_half_width: i64,
    seed: u64,
) -> Result<Vec<MomentRow<F>>> {
    if trials < 2 {
        return Err(Error::parameter("need at least two trials"));
    }
    if alpha < F::fl(2.0) {
        return Err(Error::Unsupported("probe applies to alpha >= 2".into()));
    }
    let i_max = *i_list.iter().max().ok_or_else(|| Error::parameter("empty index list"))?;
    if i_max as i64 > box_half_width {
        return Err(Error::parameter("index exceeds the box"));
    }
    let samples: Vec<Vec<F>> = (0..trials)
        .map(|t| -> Result<Vec<F>> {
            let coarse: CoarseNetwork<F> = coarse_from_field(
                2,
                box_half_width,
                alpha,
                field,
                seed.wrapping_mul(0x9e37).wrapping_add(t as u64),
                false,
            )?;
            let shells = shell_collapse_2d(&coarse)?;
            chain_conductances(&shells, i_list)
        })
        .collect::<Result<_>>()?;
    let tf = F::us(trials);
    Ok(i_list
        .iter()
        .enumerate()
        .map(|(col, &i)| {
            let vals: Vec<F> = samples.iter().map(|row| row[col]).collect();
            let mean = vals.iter().copied().sum::<F>() / tf;
            let fourth = vals
                .iter()
                .map(|&v| {
                    let d = v - mean;
                    d * d * d * d
                })
                .sum::<F>()
                / tf;
            let ifl = F::us(i);
            let omega = if alpha > F::fl(2.0) { ifl } else { ifl * ifl.ln().max(F::fl(1e-12)) };
            MomentRow {
                i,
                mean,
                mean_over_omega: mean / omega,
                fourth_central: fourth,
                fourth_over_i_sq: fourth / (ifl * ifl),
                trials,
            }
        })
        .collect())
}

/// Dirichlet upper bound for the conductance of a folded one-dimensional
/// coarse network out of the box `[0, n]`, using radial trial values
/// `f_0..` (capped at `f_n` beyond `n`). Its reciprocal lower-bounds the
/// folded network's resistance.
pub fn folded_upper_conductance<F: Scalar>(
    folded: &CoarseNetwork<F>,
    f_values: &[F],
    n: usize,
) -> Result<F> {
    if folded.dim != 1 || folded.lo[0] != 0 {
        return Err(Error::parameter("expects a folded one-dimensional network"));
    }
    let hi = folded.hi[0] as usize;
    if f_values.len() <= hi || n >= hi {
        return Err(Error::parameter("trial table too short for the box"));
    }
    let fn_val = f_values[n];
    if !(fn_val > F::zero()) {
        return Err(Error::parameter("trial must be positive at the box edge"));
    }
    let e = F::one() + folded.alpha;
    let c = folded.rho_coefficient;
    let mut total = F::zero();
    for i in 0..=hi {
        let gi = folded.gamma[i];
        if gi == 0 {
            continue;
        }
        let h_i = (f_values[i.min(n)] / fn_val).min(F::one());
        for j in i + 1..=hi {
            let gj = folded.gamma[j];
            if gj == 0 {
                continue;
            }
            let h_j = (f_values[j.min(n)] / fn_val).min(F::one());
            let d = h_j - h_i;
            if d == F::zero() {
                continue;
            }
            let gap = F::us(j - i);
            total += F::fl((gi * gj) as f64) / (c * gap.powf(e)) * d * d;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::{lattice_set, Provenance};
    use approx::assert_relative_eq;

    #[test]
    fn cube_collapse_counts_lattice() {
        let pts = lattice_set::<f64>(1, 5).unwrap();
        let coarse = cube_collapse(&pts, 1, 1.0).unwrap();
        for v in -5i64..=5 {
            let expect = if v == 0 { 2 } else { 1 };
            assert_eq!(coarse.gamma_at(&[v]), expect, "site {v}");
        }
        assert_eq!(coarse.total_mass(), 12);
    }

    #[test]
    fn cube_collapse_empty_cells_are_isolated() {
        let pts = PointSet::new(1, 4.0, vec![0.2, 3.1], Provenance::new("custom", None)).unwrap();
        let coarse = cube_collapse(&pts, 1, 1.0).unwrap();
        assert_eq!(coarse.gamma_at(&[0]), 2); // the point at 0.2 plus the origin increment
        assert_eq!(coarse.gamma_at(&[3]), 1);
        assert_eq!(coarse.gamma_at(&[1]), 0);
        assert_eq!(coarse.conductance(&[1], &[3]), 0.0);
    }

    #[test]
    fn fold_adds_mirror_masses_and_conserves_total() {
        let pts = lattice_set::<f64>(1, 6).unwrap();
        let coarse = cube_collapse(&pts, 1, 1.5).unwrap();
        let folded = fold_pairs_1d(&coarse).unwrap();
        assert_eq!(folded.gamma_at(&[0]), 2);
        for i in 1i64..=6 {
            assert_eq!(folded.gamma_at(&[i]), 2);
        }
        assert_eq!(folded.total_mass(), coarse.total_mass());
    }

    #[test]
    fn shell_sizes_match_lattice_counts() {
        let pts = lattice_set::<f64>(2, 8).unwrap();
        let coarse = cube_collapse(&pts, 1, 2.0).unwrap();
        let shells = shell_collapse_2d(&coarse).unwrap();
        assert_eq!(shells.shells[0].len(), 1);
        for a in 1..=8usize {
            assert_eq!(shells.shells[a].len(), 8 * a, "shell {a}");
        }
    }

    #[test]
    fn unit_field_wire_counts_between_shells() {
        // gamma = 1: total wires between shells a,b is |F_a| |F_b| = 64 a b
        let coarse =
            coarse_from_field::<f64>(2, 5, 2.0, &GammaField::Deterministic(1), 0, false).unwrap();
        let shells = shell_collapse_2d(&coarse).unwrap();
        for a in 1..=4usize {
            for b in a + 1..=5 {
                let wires: u64 = shells.shells[a]
                    .iter()
                    .map(|&(_, gu)| shells.shells[b].iter().map(|&(_, gv)| gu * gv).sum::<u64>())
                    .sum();
                assert_eq!(wires, 64 * (a as u64) * (b as u64));
            }
        }
    }

    #[test]
    fn two_shell_link_is_a_single_term_sum() {
        let coarse =
            coarse_from_field::<f64>(2, 1, 2.0, &GammaField::Deterministic(1), 0, false).unwrap();
        let shells = shell_collapse_2d(&coarse).unwrap();
        let phi1 = chain_conductance(&shells, 1).unwrap();
        let c = coarse.rho_coefficient;
        let mut expect = 0.0;
        for (v, _) in shells.shells[1].iter() {
            let d2 = (v[0] * v[0] + v[1] * v[1]) as f64;
            expect += 1.0 / (c * d2.powf(2.0));
        }
        assert_relative_eq!(phi1, expect, max_relative = 1e-12);
    }

    #[test]
    fn series_split_matches_direct_enumeration() {
        let coarse =
            coarse_from_field::<f64>(2, 6, 2.0, &GammaField::Poisson(1.0), 42, true).unwrap();
        let shells = shell_collapse_2d(&coarse).unwrap();
        let chain = series_split(&shells).unwrap();
        let w = 6i64;
        for i in 1..=6usize {
            let mut expect = 0.0;
            for idx_u in 0..coarse.site_count() {
                let u = coarse.site(idx_u);
                let a = u[0].abs().max(u[1].abs());
                if a >= i as i64 {
                    continue;
                }
                for idx_v in 0..coarse.site_count() {
                    let v = coarse.site(idx_v);
                    let b = v[0].abs().max(v[1].abs());
                    if b < i as i64 || b > w {
                        continue;
                    }
                    let gu = coarse.gamma[idx_u] as f64;
                    let gv = coarse.gamma[idx_v] as f64;
                    let d2 = ((u[0] - v[0]).pow(2) + (u[1] - v[1]).pow(2)) as f64;
                    if gu > 0.0 && gv > 0.0 {
                        expect += (b - a) as f64 * gu * gv
                            / (coarse.rho_coefficient * d2.powf(2.0));
                    }
                }
            }
            assert_relative_eq!(chain.phi[i - 1], expect, max_relative = 1e-11);
        }
    }

    #[test]
    fn chain_resistance_is_additive_series() {
        let chain = ChainNetwork { phi: vec![1.0f64; 4] };
        assert_relative_eq!(chain_resistance(&chain, 3).unwrap(), 4.0);
        let chain2 = ChainNetwork { phi: vec![2.0, 4.0, 8.0] };
        assert_relative_eq!(chain_resistance(&chain2, 0).unwrap(), 0.5);
        let r2 = chain_resistance(&chain2, 2).unwrap();
        let r1 = chain_resistance(&chain2, 1).unwrap();
        assert_relative_eq!(r2, r1 + 1.0 / 8.0);
        assert!(chain_resistance(&chain2, 3).is_err());
    }

    #[test]
    fn deterministic_field_has_zero_fourth_moment() {
        let rows =
            phi_moment_probe::<f64>(&GammaField::Deterministic(1), 2.0, &[2, 4], 4, 8, 3).unwrap();
        for row in rows {
            assert_eq!(row.fourth_central, 0.0);
            assert!(row.mean > 0.0);
        }
    }
}
