//! Point configurations in finite boxes: Poisson, diluted crystals,
//! percolation clusters, lattices and the circle set, plus hole-probability
//! estimation.
//!
//! Every sampler is a pure function of `(parameters, seed)`; the returned
//! [`PointSet`] is immutable, lexicographically sorted and safe to share
//! across threads.

use crate::error::{Error, Result};
use crate::rng::{stream, substream};
use crate::scalar::Scalar;
use rand::distr::uniform::SampleUniform;
use rand::distr::Uniform;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use std::collections::VecDeque;
use std::io::{BufRead, Write};

/// Where a point set came from.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Provenance {
    pub kind: String,
    pub params: Vec<(String, String)>,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(kind: &str, seed: Option<u64>) -> Self {
        Provenance { kind: kind.to_string(), params: Vec::new(), seed }
    }

    fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }
}

/// A finite set of distinct points in `[-B, B]^d`, sorted lexicographically
/// by coordinates (the canonical order used for tie-breaking downstream).
#[derive(Debug, Clone)]
pub struct PointSet<F> {
    dim: usize,
    box_half_width: F,
    coords: Vec<F>,
    provenance: Provenance,
}

impl<F: Scalar> PointSet<F> {
    /// Validates, sorts and wraps raw coordinates (`dim * n` values,
    /// point-major).
    pub fn new(dim: usize, box_half_width: F, coords: Vec<F>, provenance: Provenance) -> Result<Self> {
        if dim == 0 {
            return Err(Error::parameter("dimension must be positive"));
        }
        if box_half_width < F::zero() {
            return Err(Error::parameter("box half-width must be non-negative"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::Construction(format!(
                "coordinate count {} is not a multiple of dim {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Construction("non-finite coordinate".into()));
        }
        if coords.iter().any(|c| c.abs() > box_half_width) {
            return Err(Error::Construction("point outside the stated box".into()));
        }
        let n = coords.len() / dim;
        let mut order: Vec<usize> = (0..n).collect();
        let cmp = |a: &usize, b: &usize| {
            let pa = &coords[a * dim..(a + 1) * dim];
            let pb = &coords[b * dim..(b + 1) * dim];
            pa.partial_cmp(pb).expect("finite coordinates")
        };
        order.sort_unstable_by(cmp);
        for w in order.windows(2) {
            if cmp(&w[0], &w[1]) == std::cmp::Ordering::Equal {
                return Err(Error::Construction("duplicate point".into()));
            }
        }
        let mut sorted = Vec::with_capacity(coords.len());
        for &i in &order {
            sorted.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
        }
        Ok(PointSet { dim, box_half_width, coords: sorted, provenance })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn box_half_width(&self) -> F {
        self.box_half_width
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[F] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[F] {
        &self.coords
    }

    #[inline]
    pub fn dist_sq(&self, i: usize, j: usize) -> F {
        let a = self.point(i);
        let b = self.point(j);
        let mut s = F::zero();
        for k in 0..self.dim {
            let d = a[k] - b[k];
            s += d * d;
        }
        s
    }

    /// Max-norm of point `i`.
    pub fn norm_inf(&self, i: usize) -> F {
        self.point(i).iter().fold(F::zero(), |m, &c| m.max(c.abs()))
    }

    /// Euclidean norm of point `i`.
    pub fn norm2(&self, i: usize) -> F {
        self.point(i).iter().fold(F::zero(), |s, &c| s + c * c).sqrt()
    }

    /// Index of the point nearest to the origin in Euclidean norm
    /// (lowest lexicographic on ties, since points are lex-sorted).
    pub fn nearest_to_origin(&self) -> Option<usize> {
        (0..self.len()).min_by(|&a, &b| {
            let na = self.point(a).iter().fold(F::zero(), |s, &c| s + c * c);
            let nb = self.point(b).iter().fold(F::zero(), |s, &c| s + c * c);
            na.partial_cmp(&nb).unwrap()
        })
    }

    /// Internal constructor that keeps the caller's ordering (used for
    /// norm-sorted solver layouts). Coordinates must already be validated.
    pub(crate) fn from_ordered_unchecked(
        dim: usize,
        box_half_width: F,
        coords: Vec<F>,
        provenance: Provenance,
    ) -> Self {
        PointSet { dim, box_half_width, coords, provenance }
    }

    /// Writes the `rwre-points v1` format: a header line followed by one
    /// point per line as comma-separated shortest-round-trip decimals.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let seed = self.provenance.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into());
        writeln!(
            out,
            "# rwre-points v1 dim={} box={} kind={} seed={}",
            self.dim, self.box_half_width, self.provenance.kind, seed
        )?;
        for i in 0..self.len() {
            let p = self.point(i);
            let line: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn write_path(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(f))
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty point file".into()))??;
        let mut dim = None;
        let mut bbox = None;
        let mut kind = String::from("custom");
        let mut seed = None;
        if !header.starts_with("# rwre-points v1") {
            return Err(Error::Parse("missing rwre-points v1 header".into()));
        }
        for tok in header.split_whitespace().skip(2) {
            if let Some((k, v)) = tok.split_once('=') {
                match k {
                    "dim" => dim = Some(v.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
                    "box" => {
                        bbox = Some(v.parse::<F>().map_err(|_| Error::Parse(format!("bad box value {v}")))?)
                    }
                    "kind" => kind = v.to_string(),
                    "seed" => seed = v.parse::<u64>().ok(),
                    _ => {}
                }
            }
        }
        let dim = dim.ok_or_else(|| Error::Parse("header missing dim".into()))?;
        let bbox = bbox.ok_or_else(|| Error::Parse("header missing box".into()))?;
        let mut coords = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            for c in line.split(',') {
                let v = c.trim().parse::<F>().map_err(|_| Error::Parse(format!("bad coordinate {c}")))?;
                coords.push(v);
            }
        }
        PointSet::new(dim, bbox, coords, Provenance::new(&kind, seed))
    }

    pub fn read_path(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        PointSet::read(std::io::BufReader::new(f))
    }
}

/// Parameters of the supported point processes.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum ProcessSpec<F> {
    Ppp { intensity: F },
    DilutedCrystal { basis: Vec<F>, dilution: F },
    PercolationCluster { p: F },
    Lattice,
    Circles { n_max: usize },
}

impl<F: Scalar + SampleUniform> ProcessSpec<F> {
    /// Draws one configuration in `[-B, B]^dim`. Deterministic sets ignore
    /// the seed.
    pub fn sample(&self, dim: usize, box_half_width: F, seed: u64) -> Result<PointSet<F>> {
        match self {
            ProcessSpec::Ppp { intensity } => sample_ppp(dim, *intensity, box_half_width, seed),
            ProcessSpec::DilutedCrystal { basis, dilution } => {
                sample_diluted_crystal(dim, basis, *dilution, box_half_width, seed, None)
            }
            ProcessSpec::PercolationCluster { p } => {
                let n = box_half_width
                    .floor()
                    .to_f64_lossy() as i64;
                sample_percolation_cluster(dim, *p, n.max(0) as usize, seed)
            }
            ProcessSpec::Lattice => {
                let n = box_half_width.floor().to_f64_lossy() as i64;
                lattice_set(dim, n.max(0) as usize)
            }
            ProcessSpec::Circles { n_max } => circle_set(*n_max),
        }
    }
}

/// Homogeneous Poisson process of intensity `lambda` on `[-B, B]^dim`.
pub fn sample_ppp<F: Scalar + SampleUniform>(
    dim: usize,
    lambda: F,
    box_half_width: F,
    seed: u64,
) -> Result<PointSet<F>> {
    if !(lambda > F::zero()) {
        return Err(Error::parameter("ppp intensity must be positive"));
    }
    if box_half_width < F::zero() {
        return Err(Error::parameter("box half-width must be non-negative"));
    }
    let mut rng = stream(seed, "sample/ppp");
    let side = box_half_width.to_f64_lossy() * 2.0;
    let mean = lambda.to_f64_lossy() * side.powi(dim as i32);
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::Parameter(e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let mut coords = Vec::with_capacity(count * dim);
    if count > 0 {
        let u = Uniform::new_inclusive(-box_half_width, box_half_width)
            .map_err(|e| Error::Parameter(e.to_string()))?;
        for _ in 0..count * dim {
            coords.push(u.sample(&mut rng));
        }
    }
    let prov = Provenance::new("ppp", Some(seed)).with("lambda", lambda);
    PointSet::new(dim, box_half_width, coords, prov)
}

/// Spatially randomized `p`-diluted crystal: the lattice spanned by `basis`
/// (row-major `dim x dim`), translated by a uniform vector of the elementary
/// cell, each point kept independently with probability `p`.
///
/// `forced_shift` pins the random translation (used by tests to recover the
/// bare lattice).
pub fn sample_diluted_crystal<F: Scalar + SampleUniform>(
    dim: usize,
    basis: &[F],
    p: F,
    box_half_width: F,
    seed: u64,
    forced_shift: Option<&[F]>,
) -> Result<PointSet<F>> {
    if basis.len() != dim * dim {
        return Err(Error::parameter("basis must be a dim x dim matrix"));
    }
    if !(p > F::zero()) || p > F::one() {
        return Err(Error::parameter("dilution must lie in (0, 1]"));
    }
    let inv = invert(dim, basis).ok_or_else(|| Error::parameter("basis is singular"))?;
    let mut rng = stream(seed, "sample/crystal");
    let shift: Vec<F> = match forced_shift {
        Some(s) => s.to_vec(),
        None => {
            // V = sum t_i v_i with t_i uniform in [0, 1)
            let u = Uniform::new(F::zero(), F::one()).map_err(|e| Error::Parameter(e.to_string()))?;
            let ts: Vec<F> = (0..dim).map(|_| u.sample(&mut rng)).collect();
            (0..dim)
                .map(|c| (0..dim).fold(F::zero(), |s, r| s + ts[r] * basis[r * dim + c]))
                .collect()
        }
    };
    // integer bounding box of basis^{-1}([-B,B]^d - V)
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    let corners = 1usize << dim;
    for mask in 0..corners {
        let corner: Vec<F> = (0..dim)
            .map(|k| {
                let s = if mask >> k & 1 == 1 { box_half_width } else { -box_half_width };
                s - shift[k]
            })
            .collect();
        for r in 0..dim {
            let z = (0..dim).fold(F::zero(), |s, c| s + inv[r * dim + c] * corner[c]);
            let zf = z.to_f64_lossy();
            lo[r] = lo[r].min(zf.floor() as i64 - 1);
            hi[r] = hi[r].max(zf.ceil() as i64 + 1);
        }
    }
    let mut coords = Vec::new();
    let mut idx = vec![0i64; dim];
    idx.clone_from_slice(&lo);
    'outer: loop {
        let pt: Vec<F> = (0..dim)
            .map(|c| {
                (0..dim).fold(shift[c], |s, r| s + F::fl(idx[r] as f64) * basis[r * dim + c])
            })
            .collect();
        if pt.iter().all(|c| c.abs() <= box_half_width) {
            let keep = p >= F::one() || rng.random_range(0.0..1.0) < p.to_f64_lossy();
            if keep {
                coords.extend_from_slice(&pt);
            }
        }
        for r in (0..dim).rev() {
            idx[r] += 1;
            if idx[r] <= hi[r] {
                continue 'outer;
            }
            idx[r] = lo[r];
            if r == 0 {
                break 'outer;
            }
        }
        break;
    }
    let prov = Provenance::new("diluted_crystal", Some(seed)).with("p", p);
    PointSet::new(dim, box_half_width, coords, prov)
}

fn invert<F: Scalar>(dim: usize, m: &[F]) -> Option<Vec<F>> {
    let mut a = m.to_vec();
    let mut inv = vec![F::zero(); dim * dim];
    for i in 0..dim {
        inv[i * dim + i] = F::one();
    }
    for col in 0..dim {
        let pivot = (col..dim).max_by(|&a_, &b_| {
            a[a_ * dim + col].abs().partial_cmp(&a[b_ * dim + col].abs()).unwrap()
        })?;
        if a[pivot * dim + col].abs() < F::fl(1e-14) {
            return None;
        }
        for k in 0..dim {
            a.swap(col * dim + k, pivot * dim + k);
            inv.swap(col * dim + k, pivot * dim + k);
        }
        let d = a[col * dim + col];
        for k in 0..dim {
            a[col * dim + k] /= d;
            inv[col * dim + k] /= d;
        }
        for r in 0..dim {
            if r != col {
                let f = a[r * dim + col];
                for k in 0..dim {
                    let v = a[col * dim + k];
                    let w = inv[col * dim + k];
                    a[r * dim + k] -= f * v;
                    inv[r * dim + k] -= f * w;
                }
            }
        }
    }
    Some(inv)
}

/// Largest nearest-neighbor cluster of Bernoulli site percolation on
/// `Z^dim` restricted to `[-n, n]^dim` (the finite-box surrogate of the
/// infinite cluster). Site percolation on `Z^2` is super-critical for
/// `p > 0.5927...`; callers should stay above that threshold.
pub fn sample_percolation_cluster<F: Scalar>(
    dim: usize,
    p: F,
    n: usize,
    seed: u64,
) -> Result<PointSet<F>> {
    if dim < 2 {
        return Err(Error::Unsupported(
            "site percolation has no super-critical phase in d=1".into(),
        ));
    }
    if !(p > F::zero()) || !(p < F::one()) {
        return Err(Error::parameter("percolation parameter must lie in (0, 1)"));
    }
    let side = 2 * n + 1;
    let total = side.pow(dim as u32);
    let mut rng = stream(seed, "sample/percolation");
    let pf = p.to_f64_lossy();
    let occupied: Vec<bool> = (0..total).map(|_| rng.random_range(0.0..1.0) < pf).collect();

    let mut label = vec![u32::MAX; total];
    let mut sizes: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..total {
        if !occupied[start] || label[start] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        sizes.push(0);
        label[start] = id;
        queue.push_back(start);
        while let Some(site) = queue.pop_front() {
            sizes[id as usize] += 1;
            // decode mixed-radix coordinates
            let mut rem = site;
            let mut pos = vec![0usize; dim];
            for r in (0..dim).rev() {
                pos[r] = rem % side;
                rem /= side;
            }
            for r in 0..dim {
                for step in [-1i64, 1] {
                    let c = pos[r] as i64 + step;
                    if c < 0 || c >= side as i64 {
                        continue;
                    }
                    let mut nb = 0usize;
                    for (k, &pk) in pos.iter().enumerate() {
                        nb = nb * side + if k == r { c as usize } else { pk };
                    }
                    if occupied[nb] && label[nb] == u32::MAX {
                        label[nb] = id;
                        queue.push_back(nb);
                    }
                }
            }
        }
    }
    let best = sizes
        .iter()
        .enumerate()
        .max_by_key(|&(i, &s)| (s, std::cmp::Reverse(i)))
        .map(|(i, _)| i as u32);
    let mut coords = Vec::new();
    if let Some(best) = best {
        for site in 0..total {
            if label[site] == best {
                let mut rem = site;
                let mut pos = vec![0i64; dim];
                for r in (0..dim).rev() {
                    pos[r] = (rem % side) as i64 - n as i64;
                    rem /= side;
                }
                coords.extend(pos.iter().map(|&c| F::fl(c as f64)));
            }
        }
    }
    let prov = Provenance::new("percolation_cluster", Some(seed)).with("p", p);
    PointSet::new(dim, F::us(n), coords, prov)
}

/// The circle set: union of shells `C_n`, `n <= n_max`, where `C_n` holds
/// `n + 1` points of radius `n` with angular spacing `2 pi / (n + 1)`.
pub fn circle_set<F: Scalar>(n_max: usize) -> Result<PointSet<F>> {
    let mut coords = Vec::new();
    for n in 0..=n_max {
        let r = n as f64;
        for k in 0..=n {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / (n as f64 + 1.0);
            coords.push(F::fl(r * ang.cos()));
            coords.push(F::fl(r * ang.sin()));
        }
    }
    let prov = Provenance::new("circles", None).with("n_max", n_max);
    PointSet::new(2, F::us(n_max), coords, prov)
}

/// `Z^dim` intersected with `[-n, n]^dim`.
pub fn lattice_set<F: Scalar>(dim: usize, n: usize) -> Result<PointSet<F>> {
    if dim == 0 {
        return Err(Error::parameter("dimension must be positive"));
    }
    let side = 2 * n + 1;
    let total = side.pow(dim as u32);
    let mut coords = Vec::with_capacity(total * dim);
    for site in 0..total {
        let mut rem = site;
        let mut pos = vec![0i64; dim];
        for r in (0..dim).rev() {
            pos[r] = (rem % side) as i64 - n as i64;
            rem /= side;
        }
        coords.extend(pos.iter().map(|&c| F::fl(c as f64)));
    }
    let prov = Provenance::new("lattice", None).with("n", n);
    PointSet::new(dim, F::us(n), coords, prov)
}

/// One row of a hole-probability estimate.
#[derive(Debug, Clone, Serialize)]
pub struct PsiRow<F> {
    pub radius: F,
    pub psi_hat: F,
    pub std_err: F,
}

/// Monte Carlo estimate of the hole probability
/// `psi(t) = max_x P(no point in the ball B(x, t))`, maximized over the
/// given centers, with a fresh configuration per trial and common random
/// numbers across radii.
pub fn estimate_psi<F: Scalar + SampleUniform>(
    spec: &ProcessSpec<F>,
    dim: usize,
    box_half_width: F,
    radii: &[F],
    trials: usize,
    centers: &[Vec<F>],
    seed: u64,
) -> Result<Vec<PsiRow<F>>> {
    if trials == 0 {
        return Err(Error::parameter("need at least one trial"));
    }
    if centers.is_empty() {
        return Err(Error::parameter("need at least one center"));
    }
    if radii.iter().any(|r| *r < F::zero()) {
        return Err(Error::parameter("radii must be non-negative"));
    }
    for c in centers {
        if c.len() != dim {
            return Err(Error::parameter("center dimension mismatch"));
        }
        let reach = c.iter().fold(F::zero(), |m, &x| m.max(x.abs()));
        let max_r = radii.iter().cloned().fold(F::zero(), F::max);
        if reach + max_r > box_half_width {
            return Err(Error::parameter(
                "ball leaves the sampling box; enlarge the box or shrink the radius",
            ));
        }
    }
    let mut empty_counts = vec![vec![0usize; centers.len()]; radii.len()];
    for trial in 0..trials {
        let s = substream(seed, "psi/trial", trial as u64).random::<u64>();
        let sample = spec.sample(dim, box_half_width, s)?;
        for (ri, r) in radii.iter().enumerate() {
            let r2 = *r * *r;
            for (ci, c) in centers.iter().enumerate() {
                let mut empty = true;
                'pts: for i in 0..sample.len() {
                    let p = sample.point(i);
                    let mut d2 = F::zero();
                    for k in 0..dim {
                        let d = p[k] - c[k];
                        d2 += d * d;
                    }
                    if d2 < r2 {
                        empty = false;
                        break 'pts;
                    }
                }
                if empty {
                    empty_counts[ri][ci] += 1;
                }
            }
        }
    }
    let tf = F::us(trials);
    Ok(radii
        .iter()
        .enumerate()
        .map(|(ri, &r)| {
            let best = *empty_counts[ri].iter().max().unwrap();
            let p = F::us(best) / tf;
            let se = (p * (F::one() - p) / tf).sqrt();
            PsiRow { radius: r, psi_hat: p, std_err: se }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_volume_box_is_empty() {
        let pts = sample_ppp::<f64>(1, 1.0, 0.0, 3).unwrap();
        assert!(pts.is_empty());
        assert!(sample_ppp::<f64>(1, -1.0, 1.0, 3).is_err());
    }

    #[test]
    fn ppp_is_bitwise_deterministic() {
        let a = sample_ppp::<f64>(2, 1.3, 20.0, 99).unwrap();
        let b = sample_ppp::<f64>(2, 1.3, 20.0, 99).unwrap();
        assert_eq!(a.coords(), b.coords());
        let c = sample_ppp::<f64>(2, 1.3, 20.0, 100).unwrap();
        assert_ne!(a.coords(), c.coords());
    }

    #[test]
    fn ppp_mean_count() {
        // mean over 200 seeds of the count in [-500, 500], lambda = 1
        let mut total = 0usize;
        for s in 0..200u64 {
            total += sample_ppp::<f64>(1, 1.0, 500.0, s).unwrap().len();
        }
        let mean = total as f64 / 200.0;
        assert!((mean - 1000.0).abs() <= 3.0 * 1000f64.sqrt(), "mean {mean}");
    }

    #[test]
    fn ppp_void_probability_unit_square() {
        // P(no point of PPP(2) in a fixed unit square) = exp(-2)
        let mut empty = 0usize;
        let trials = 10_000;
        for s in 0..trials {
            let pts = sample_ppp::<f64>(2, 2.0, 3.0, 77_000 + s as u64).unwrap();
            let mut hit = false;
            for i in 0..pts.len() {
                let p = pts.point(i);
                if p[0] > 0.5 && p[0] < 1.5 && p[1] > 0.5 && p[1] < 1.5 {
                    hit = true;
                    break;
                }
            }
            if !hit {
                empty += 1;
            }
        }
        let p = empty as f64 / trials as f64;
        assert!((p - (-2.0f64).exp()).abs() < 0.02, "void prob {p}");
    }

    #[test]
    fn crystal_identity_basis_recovers_lattice() {
        let basis = vec![1.0, 0.0, 0.0, 1.0];
        let pts =
            sample_diluted_crystal::<f64>(2, &basis, 1.0, 3.0, 0, Some(&[0.0, 0.0])).unwrap();
        let lattice = lattice_set::<f64>(2, 3).unwrap();
        assert_eq!(pts.len(), lattice.len());
        assert_eq!(pts.coords(), lattice.coords());
    }

    #[test]
    fn crystal_dilution_keeps_about_half() {
        let basis = vec![1.0];
        let pts = sample_diluted_crystal::<f64>(1, &basis, 0.5, 10_000.0, 5, None).unwrap();
        let frac = pts.len() as f64 / 20_001.0;
        assert!((frac - 0.5).abs() < 0.02, "kept fraction {frac}");
        assert!(sample_diluted_crystal::<f64>(1, &[0.0], 0.5, 10.0, 0, None).is_err());
    }

    #[test]
    fn crystal_min_spacing() {
        let basis = vec![1.0, 0.5, 0.0, 1.0];
        let pts = sample_diluted_crystal::<f64>(2, &basis, 1.0, 8.0, 11, None).unwrap();
        // min singular value of the basis bounds the packing from below
        let mut min_d2 = f64::INFINITY;
        for i in 0..pts.len() {
            for j in 0..i {
                min_d2 = min_d2.min(pts.dist_sq(i, j));
            }
        }
        // smallest singular value of [[1, .5], [0, 1]] is about 0.78
        assert!(min_d2.sqrt() >= 0.78 - 1e-9, "min spacing {}", min_d2.sqrt());
    }

    #[test]
    fn percolation_dense_limit_and_connectivity() {
        let pts = sample_percolation_cluster::<f64>(2, 0.999, 20, 3).unwrap();
        let total = 41 * 41;
        assert!(pts.len() >= (0.99 * total as f64) as usize, "{} of {total}", pts.len());
        assert!(sample_percolation_cluster::<f64>(1, 0.9, 10, 0).is_err());
        // nonempty whenever any site is occupied
        let small = sample_percolation_cluster::<f64>(2, 0.3, 6, 5).unwrap();
        assert!(!small.is_empty());
        // connectivity under nearest-neighbor adjacency
        let pts = sample_percolation_cluster::<f64>(2, 0.7, 25, 8).unwrap();
        let set: std::collections::HashSet<(i64, i64)> = (0..pts.len())
            .map(|i| {
                let p = pts.point(i);
                (p[0] as i64, p[1] as i64)
            })
            .collect();
        let start = *set.iter().next().unwrap();
        let mut seen = std::collections::HashSet::from([start]);
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some((x, y)) = queue.pop_front() {
            for (dx, dy) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                let nb = (x + dx, y + dy);
                if set.contains(&nb) && seen.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
        assert_eq!(seen.len(), pts.len(), "cluster not connected");
    }

    #[test]
    fn percolation_density_near_occupation_fraction() {
        let pts = sample_percolation_cluster::<f64>(2, 0.7, 50, 4).unwrap();
        let density = pts.len() as f64 / (101.0 * 101.0);
        assert!((0.6..=0.75).contains(&density), "density {density}");
    }

    #[test]
    fn circle_set_counts_and_radii() {
        let single = circle_set::<f64>(0).unwrap();
        assert_eq!(single.len(), 1);
        let pts = circle_set::<f64>(2).unwrap();
        assert_eq!(pts.len(), 6);
        for n in [5usize, 9] {
            let pts = circle_set::<f64>(n).unwrap();
            assert_eq!(pts.len(), (n + 1) * (n + 2) / 2);
            // every point's norm is an integer shell radius, exactly
            for i in 0..pts.len() {
                let r = pts.norm2(i);
                assert!((r - r.round()).abs() < 1e-12, "radius {r}");
            }
        }
    }

    #[test]
    fn circle_angular_spacing_at_shell_two() {
        let pts = circle_set::<f64>(2).unwrap();
        let mut angles: Vec<f64> = (0..pts.len())
            .filter(|&i| (pts.norm2(i) - 2.0).abs() < 1e-9)
            .map(|i| {
                let p = pts.point(i);
                p[1].atan2(p[0]).rem_euclid(2.0 * std::f64::consts::PI)
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        assert_eq!(angles.len(), 3);
        assert_relative_eq!(angles[1] - angles[0], 2.0 * std::f64::consts::PI / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice_set::<f64>(1, 2).unwrap().len(), 5);
        assert_eq!(lattice_set::<f64>(2, 1).unwrap().len(), 9);
        assert_eq!(lattice_set::<f64>(3, 2).unwrap().len(), 125);
    }

    #[test]
    fn psi_estimates_match_void_probabilities() {
        let spec = ProcessSpec::Ppp { intensity: 1.0 };
        let rows = estimate_psi(&spec, 1, 8.0, &[0.0, 0.5, 1.0], 8000, &[vec![0.0]], 21).unwrap();
        // t = 0: empty ball
        assert_eq!(rows[0].psi_hat, 1.0);
        // t = 1 in d = 1: exp(-2)
        let expect = (-2.0f64).exp();
        assert!(
            (rows[2].psi_hat - expect).abs() <= 3.0 * rows[2].std_err + 1e-9,
            "{} vs {expect}",
            rows[2].psi_hat
        );
        // monotone under common random numbers
        assert!(rows[0].psi_hat >= rows[1].psi_hat && rows[1].psi_hat >= rows[2].psi_hat);
        // ball leaving the box is rejected
        assert!(estimate_psi(&spec, 1, 2.0, &[3.0], 10, &[vec![0.0]], 0).is_err());
    }

    #[test]
    fn psi_2d_void_probability() {
        let spec = ProcessSpec::Ppp { intensity: 1.0 };
        let rows = estimate_psi(&spec, 2, 4.0, &[1.0], 10_000, &[vec![0.0, 0.0]], 33).unwrap();
        let expect = (-std::f64::consts::PI).exp();
        assert!(
            (rows[0].psi_hat - expect).abs() <= 3.0 * rows[0].std_err + 1e-9,
            "{} vs {expect}",
            rows[0].psi_hat
        );
    }

    #[test]
    fn file_roundtrip_is_exact() {
        let pts = sample_ppp::<f64>(2, 0.9, 12.345, 5).unwrap();
        let mut buf = Vec::new();
        pts.write(&mut buf).unwrap();
        let back = PointSet::<f64>::read(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(back.dim(), pts.dim());
        assert_eq!(back.coords(), pts.coords());
        assert_eq!(back.box_half_width(), pts.box_half_width());
        assert_eq!(back.provenance().kind, "ppp");
        assert_eq!(back.provenance().seed, Some(5));
    }

    #[test]
    fn constructor_enforces_invariants() {
        // outside the box
        assert!(PointSet::new(1, 1.0, vec![2.0], Provenance::new("custom", None)).is_err());
        // duplicates
        assert!(PointSet::new(2, 2.0, vec![1.0, 1.0, 1.0, 1.0], Provenance::new("custom", None))
            .is_err());
        // sorting is canonical
        let pts =
            PointSet::new(1, 3.0, vec![2.0, -1.0, 0.5], Provenance::new("custom", None)).unwrap();
        assert_eq!(pts.coords(), &[-1.0, 0.5, 2.0]);
    }
}
