//! Cross-module invariants: variational sandwiches, monotonicity laws,
//! reduction-stage comparisons and map/flux interplay.

use proptest::prelude::*;
use rwre_core::comparison::SparseFlux;
use rwre_core::kernel::JumpKernel;
use rwre_core::linalg::PackedCoupling;
use rwre_core::network::{build_network, BuildOptions, DenseNetwork, NodeLabel};
use rwre_core::pointproc::{lattice_set, sample_ppp, PointSet, Provenance};
use rwre_core::reduction::{
    chain_resistance, cube_collapse, fold_pairs_1d, folded_upper_conductance, series_split,
    shell_collapse_2d, shell_network_to_dense,
};
use rwre_core::resistance::{
    dirichlet_energy, effective_resistance, flow_energy, trial_function, SolveOptions,
};
use rwre_core::rng::substream;
use rand::Rng;
use std::sync::Arc;

fn random_net(seed: u64, n: usize) -> DenseNetwork<f64> {
    let mut rng = substream(seed, "invariants-net", 0);
    let mut pc = PackedCoupling::zeros(n);
    for i in 1..n {
        for j in 0..i {
            pc.c[PackedCoupling::<f64>::idx(i, j)] = rng.random_range(0.05..1.0);
        }
    }
    let labels = (0..n).map(NodeLabel::Original).collect();
    DenseNetwork::from_couplings(labels, pc).unwrap()
}

#[test]
fn rayleigh_monotone_under_single_edge_increase() {
    // raising one conductance never raises the effective resistance
    let opts = SolveOptions::default();
    let mut violations = 0;
    for trial in 0..100u64 {
        let n = 8 + (trial % 5) as usize;
        let net = random_net(trial, n);
        let sink: Vec<usize> = vec![n - 1];
        let base = effective_resistance(&net, 0, &sink, &opts).unwrap().resistance;
        let mut rng = substream(trial, "invariants-edge", 1);
        let i = rng.random_range(1..n);
        let j = rng.random_range(0..i);
        let mut pc = PackedCoupling::zeros(n);
        for a in 1..n {
            for b in 0..a {
                let mut c = net.conductance(a, b);
                if (a, b) == (i, j) {
                    c *= 1.0 + rng.random_range(0.1..2.0);
                }
                pc.c[PackedCoupling::<f64>::idx(a, b)] = c;
            }
        }
        let labels = (0..n).map(NodeLabel::Original).collect();
        let bumped = DenseNetwork::from_couplings(labels, pc).unwrap();
        let after = effective_resistance(&bumped, 0, &sink, &opts).unwrap().resistance;
        if after > base * (1.0 + 1e-9) {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn kernel_domination_orders_resistances() {
    // pointwise larger kernels give pointwise smaller resistances
    let opts = SolveOptions::default();
    for seed in 0..20u64 {
        let pts = Arc::new(sample_ppp::<f64>(1, 1.0, 30.0, seed).unwrap());
        if pts.len() < 6 {
            continue;
        }
        let weak = JumpKernel::poly(1, 2.0).unwrap(); // decays faster: smaller
        let strong = JumpKernel::poly(1, 1.0).unwrap();
        let nw = build_network(&pts, &weak, &BuildOptions::default()).unwrap();
        let ns = build_network(&pts, &strong, &BuildOptions::default()).unwrap();
        let n = pts.len();
        let sink: Vec<usize> = (n - 2..n).collect();
        let rw = effective_resistance(&nw, 0, &sink, &opts).unwrap().resistance;
        let rs = effective_resistance(&ns, 0, &sink, &opts).unwrap().resistance;
        assert!(rw >= rs - 1e-10, "seed {seed}: {rw} < {rs}");
    }
}

#[test]
fn dual_sandwich_brackets_the_solver() {
    let opts = SolveOptions::default();
    for seed in 0..10u64 {
        let n = 12;
        let net = random_net(1000 + seed, n);
        let sink = vec![n - 2, n - 1];
        let r = effective_resistance(&net, 0, &sink, &opts).unwrap().resistance;
        // any admissible trial bounds C from above, so 1/E bounds R below
        let mut rng = substream(seed, "sandwich-trial", 0);
        let mut trial: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        trial[0] = 0.0;
        trial[n - 2] = 1.0;
        trial[n - 1] = 1.0;
        let e = dirichlet_energy(&net, &trial, 0, &sink).unwrap();
        assert!(1.0 / e <= r * (1.0 + 1e-9), "lower bound fails: {} vs {r}", 1.0 / e);
        // any unit flux bounds R from above: push everything along one path
        let mut flux = SparseFlux::new(0);
        for i in 0..n - 2 {
            flux.add(i, i + 1, 1.0);
        }
        flux.sink.insert(n - 2);
        let edges: Vec<(usize, usize, f64)> =
            flux.edges.iter().map(|(&(i, j), &v)| (i, j, v)).collect();
        let upper = flow_energy(&net, &edges);
        assert!(r <= upper * (1.0 + 1e-9), "upper bound fails: {r} vs {upper}");
    }
}

#[test]
fn one_dimensional_reduction_chain_of_bounds() {
    // points -> coarse(Gamma, rho) -> folded: each stage only lowers R;
    // the folded trial bound then caps the conductance
    let opts = SolveOptions::default();
    let alpha = 1.5f64;
    let kernel = JumpKernel::poly(1, alpha).unwrap();
    for seed in 0..5u64 {
        let pts = Arc::new(sample_ppp::<f64>(1, 1.0, 24.0, 40 + seed).unwrap());
        if pts.len() < 10 {
            continue;
        }
        let n = 8usize;
        let net = build_network(&pts, &kernel, &BuildOptions::default()).unwrap();
        let source = pts.nearest_to_origin().unwrap();
        let sink: Vec<usize> =
            (0..pts.len()).filter(|&i| pts.norm_inf(i) > n as f64).collect();
        let r_points = effective_resistance(&net, source, &sink, &opts).unwrap().resistance;
        // points beyond box n can land in cube n, so the monotone-safe
        // coarse sink grounds every site with |v| >= n
        let coarse = cube_collapse(pts.as_ref(), 1, alpha).unwrap();
        let (cnet, sites) = coarse.to_dense_network().unwrap();
        let csource = sites.iter().position(|s| s[0] == 0).unwrap();
        let csink: Vec<usize> = sites
            .iter()
            .enumerate()
            .filter(|(_, s)| s[0].abs() >= n as i64)
            .map(|(i, _)| i)
            .collect();
        let r_coarse = effective_resistance(&cnet, csource, &csink, &opts).unwrap().resistance;
        assert!(r_points >= r_coarse * (1.0 - 1e-9), "{r_points} < {r_coarse}");
        let folded = fold_pairs_1d(&coarse).unwrap();
        let (fnet, fsites) = folded.to_dense_network().unwrap();
        let fsource = fsites.iter().position(|s| s[0] == 0).unwrap();
        let fsink: Vec<usize> = fsites
            .iter()
            .enumerate()
            .filter(|(_, s)| s[0] >= n as i64)
            .map(|(i, _)| i)
            .collect();
        let r_folded = effective_resistance(&fnet, fsource, &fsink, &opts).unwrap().resistance;
        assert!(r_coarse >= r_folded * (1.0 - 1e-9), "{r_coarse} < {r_folded}");
        // radial trial bound on the folded network
        let table = trial_function(alpha, folded.hi[0] as usize).unwrap();
        let bound = folded_upper_conductance(&folded, &table.f, n).unwrap();
        assert!(
            bound >= 1.0 / r_folded * (1.0 - 1e-9),
            "trial bound {bound} below exact conductance {}",
            1.0 / r_folded
        );
    }
}

#[test]
fn two_dimensional_pipeline_is_resistance_non_increasing() {
    let opts = SolveOptions::default();
    let alpha = 2.0f64;
    let kernel = JumpKernel::poly(2, alpha).unwrap();
    let pts = Arc::new(sample_ppp::<f64>(2, 1.0, 12.0, 77).unwrap());
    let net = build_network(&pts, &kernel, &BuildOptions::default()).unwrap();
    let source = pts.nearest_to_origin().unwrap();
    let n = 5usize;
    let sink: Vec<usize> = (0..pts.len()).filter(|&i| pts.norm_inf(i) > n as f64).collect();
    let r_points = effective_resistance(&net, source, &sink, &opts).unwrap().resistance;
    let coarse = cube_collapse(pts.as_ref(), 1, alpha).unwrap();
    let (cnet, sites) = coarse.to_dense_network().unwrap();
    let csource = sites.iter().position(|s| s == &vec![0, 0]).unwrap();
    let csink: Vec<usize> = sites
        .iter()
        .enumerate()
        .filter(|(_, s)| s.iter().map(|v| v.abs()).max().unwrap() >= n as i64)
        .map(|(i, _)| i)
        .collect();
    let r_coarse = effective_resistance(&cnet, csource, &csink, &opts).unwrap().resistance;
    let shells = shell_collapse_2d(&coarse).unwrap();
    let (snet, shell_ids) = shell_network_to_dense(&shells).unwrap();
    let ssink: Vec<usize> = shell_ids
        .iter()
        .enumerate()
        .filter(|(_, &a)| a >= n)
        .map(|(i, _)| i)
        .collect();
    let ssource = shell_ids.iter().position(|&a| a == 0).unwrap();
    let r_shell = effective_resistance(&snet, ssource, &ssink, &opts).unwrap().resistance;
    let chain = series_split(&shells).unwrap();
    let r_chain = chain_resistance(&chain, n - 1).unwrap();
    assert!(r_points >= r_coarse * (1.0 - 1e-9));
    assert!(r_coarse >= r_shell * (1.0 - 1e-9));
    assert!(r_shell >= r_chain * (1.0 - 1e-9));
    assert!(r_chain > 0.0);
}

#[test]
fn truncation_is_one_sided() {
    // dropping edges beyond a radius can only raise the resistance
    let opts = SolveOptions::default();
    let kernel = JumpKernel::poly(1, 1.0).unwrap();
    let pts = Arc::new(lattice_set::<f64>(1, 20).unwrap());
    let full = build_network(&pts, &kernel, &BuildOptions::default()).unwrap();
    let cut = build_network(&pts, &kernel, &BuildOptions { cut: Some(4.0), ..Default::default() })
        .unwrap();
    let sink: Vec<usize> = (0..pts.len()).filter(|&i| pts.norm_inf(i) > 10.0).collect();
    let source = pts.nearest_to_origin().unwrap();
    let rf = effective_resistance(&full, source, &sink, &opts).unwrap().resistance;
    let rc = effective_resistance(&cut, source, &sink, &opts).unwrap().resistance;
    assert!(rc >= rf - 1e-12, "{rc} < {rf}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn points_file_roundtrip(coords in proptest::collection::vec(-50.0f64..50.0, 1..40)) {
        let mut uniq = coords.clone();
        uniq.sort_by(f64::total_cmp);
        uniq.dedup();
        let pts = PointSet::new(1, 50.0, uniq, Provenance::new("custom", None)).unwrap();
        let mut buf = Vec::new();
        pts.write(&mut buf).unwrap();
        let back = PointSet::<f64>::read(std::io::BufReader::new(buf.as_slice())).unwrap();
        prop_assert_eq!(back.coords(), pts.coords());
    }

    #[test]
    fn collapse_is_associative_on_random_groups(seed in 0u64..500) {
        let n = 9usize;
        let net = random_net(seed, n);
        let g1 = vec![1usize, 4];
        let g2 = vec![2usize, 6, 8];
        let (at_once, _) = net.collapse(&[g1.clone(), g2.clone()]).unwrap();
        let (step1, m1) = net.collapse(&[g1]).unwrap();
        let g2m: Vec<usize> = g2.iter().map(|&i| m1.node_map[i]).collect();
        let (step2, _) = step1.collapse(&[g2m]).unwrap();
        prop_assert_eq!(at_once.node_count(), step2.node_count());
        let find = |net: &DenseNetwork<f64>, label: &NodeLabel| {
            net.labels().iter().position(|l| l == label).unwrap()
        };
        for la in at_once.labels() {
            for lb in at_once.labels() {
                if la == lb { continue; }
                let a = at_once.conductance(find(&at_once, la), find(&at_once, lb));
                let b = step2.conductance(find(&step2, la), find(&step2, lb));
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn reversibility_detailed_balance(seed in 0u64..200) {
        let n = 7usize;
        let net = random_net(seed, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let lhs = net.weight(i) * (net.conductance(i, j) / net.weight(i));
                    let rhs = net.weight(j) * (net.conductance(j, i) / net.weight(j));
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
                }
            }
        }
    }
}
