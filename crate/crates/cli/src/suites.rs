//! End-to-end experiment suites with PASS/FAIL checks pinned to the
//! acceptance thresholds carried by the configuration.

use crate::config::Config;
use crate::report::{CheckLine, PlotTable, SuiteReport};
use rwre_core::flux::{
    renewal_limit_constant, renewal_sequence, CircleFlux, RenewalFlux1d, Verdict,
};
use rwre_core::certificates::{
    shell_band_scan, spitzer_from_cache, truncated_bound_from_cache, CharFn, IntegralClass,
    OmCache, ShellFamily,
};
use rwre_core::kernel::JumpKernel;
use rwre_core::network::{build_network, BuildOptions};
use rwre_core::numeric::{gamma, linear_fit};
use rwre_core::pointproc::{lattice_set, sample_ppp, PointSet};
use rwre_core::reduction::{
    chain_resistance, cube_collapse, phi_moment_probe, series_split, shell_collapse_2d,
    shell_network_to_dense, GammaField,
};
use rwre_core::resistance::{
    box_resistance_profile, effective_resistance, fit_growth, GrowthModel, ProfileOptions,
    SolveOptions,
};
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    /// One-dimensional resistance growth laws (interface name `fegato`).
    D1Growth,
    /// Two-dimensional growth plus reduction checks (interface name
    /// `combine`).
    D2Growth,
    /// Renewal flux and renewal asymptotics (interface name `treno1`).
    RenewalFlux,
    /// Circle-set flux certificates (interface name `alex`).
    CircleFlux,
    /// Harmonic-analysis type table, growth bounds and shell bands
    /// (interface name `appendixB`).
    Harmonic,
}

impl SuiteKind {
    pub fn parse(name: &str) -> Option<SuiteKind> {
        match name {
            "fegato" | "d1-growth" => Some(SuiteKind::D1Growth),
            "combine" | "d2-growth" => Some(SuiteKind::D2Growth),
            "treno1" | "renewal-flux" => Some(SuiteKind::RenewalFlux),
            "alex" | "circle-flux" => Some(SuiteKind::CircleFlux),
            "appendixB" | "appendixb" | "harmonic" => Some(SuiteKind::Harmonic),
            _ => None,
        }
    }

    pub fn canonical_name(&self) -> &'static str {
        match self {
            SuiteKind::D1Growth => "fegato",
            SuiteKind::D2Growth => "combine",
            SuiteKind::RenewalFlux => "treno1",
            SuiteKind::CircleFlux => "alex",
            SuiteKind::Harmonic => "appendixB",
        }
    }

    pub fn all() -> [SuiteKind; 5] {
        [
            SuiteKind::D1Growth,
            SuiteKind::D2Growth,
            SuiteKind::RenewalFlux,
            SuiteKind::CircleFlux,
            SuiteKind::Harmonic,
        ]
    }
}

pub fn run_suite(kind: SuiteKind, cfg: &Config) -> anyhow::Result<SuiteReport> {
    match kind {
        SuiteKind::D1Growth => d1_growth(cfg),
        SuiteKind::D2Growth => d2_growth(cfg),
        SuiteKind::RenewalFlux => renewal_flux(cfg),
        SuiteKind::CircleFlux => circle_flux(cfg),
        SuiteKind::Harmonic => harmonic(cfg),
    }
}

fn solve_options(cfg: &Config) -> SolveOptions<f64> {
    SolveOptions {
        tol: cfg.solver.tol,
        dense_threshold: cfg.solver.dense_threshold,
        method: None,
        iter_budget_factor: cfg.solver.iter_budget_factor,
    }
}

/// Median of a non-empty slice (average of middle pair for even lengths).
fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

// ---------------------------------------------------------------------------
// d = 1 growth
// ---------------------------------------------------------------------------

pub fn d1_growth(cfg: &Config) -> anyhow::Result<SuiteReport> {
    let c = &cfg.d1_growth;
    let mut report = SuiteReport::new(SuiteKind::D1Growth.canonical_name());
    let mut rows = String::from("alpha,seed,n,R,residual,method\n");
    let n_max = *c.n_list.last().expect("non-empty box list");
    let boxw = n_max as f64 + c.box_margin;
    for &alpha in &[3.0f64, 1.5, 1.0] {
        let kernel = JumpKernel::poly(1, alpha)?;
        let mut per_n: Vec<Vec<f64>> = vec![Vec::new(); c.n_list.len()];
        for s in 0..c.seeds {
            let seed = cfg.run.seed.wrapping_add(s as u64);
            report.seeds.push(seed);
            let pts = sample_ppp::<f64>(1, c.lambda, boxw, seed)?;
            let source = pts.nearest_to_origin().expect("non-empty sample");
            let opts = ProfileOptions {
                solve: solve_options(cfg),
                packed_budget: cfg.solver.packed_budget,
                cut: None,
            };
            let profile = box_resistance_profile(&pts, &kernel, source, &c.n_list, &opts)?;
            for entry in &profile.entries {
                let idx = c.n_list.iter().position(|&n| n == entry.n).unwrap();
                per_n[idx].push(entry.resistance);
                writeln!(
                    rows,
                    "{},{},{},{},{},{:?}",
                    alpha, seed, entry.n, entry.resistance, entry.residual, entry.method
                )?;
            }
        }
        let medians: Vec<(usize, f64)> = c
            .n_list
            .iter()
            .enumerate()
            .filter(|(i, _)| !per_n[*i].is_empty())
            .map(|(i, &n)| (n, median(&mut per_n[i].clone())))
            .collect();
        if (alpha - 3.0).abs() < 1e-12 {
            let fit = fit_growth(&medians, GrowthModel::Power)?;
            let (lo, hi) = c.exponent_band_alpha3;
            report.push(CheckLine::band(
                "d1-exponent-alpha3",
                "median power-fit exponent, alpha = 3",
                fit.slope,
                lo,
                hi,
            ));
            report.plot = PlotTable {
                x: medians.iter().map(|m| m.0 as f64).collect(),
                y: medians.iter().map(|m| m.1).collect(),
                models: vec![(
                    "power_fit".into(),
                    medians
                        .iter()
                        .map(|m| (fit.intercept + fit.slope * (m.0 as f64).ln()).exp())
                        .collect(),
                )],
            };
        } else if (alpha - 1.5).abs() < 1e-12 {
            let fit = fit_growth(&medians, GrowthModel::Power)?;
            let (lo, hi) = c.exponent_band_alpha15;
            report.push(CheckLine::band(
                "d1-exponent-alpha15",
                "median power-fit exponent, alpha = 1.5",
                fit.slope,
                lo,
                hi,
            ));
        } else {
            let ratios: Vec<f64> = medians
                .iter()
                .filter(|&&(n, _)| n >= c.log_ratio_min_n)
                .map(|&(n, r)| r / (n as f64).ln())
                .collect();
            let spread = ratios.iter().cloned().fold(0.0, f64::max)
                / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            report.push(CheckLine::at_most(
                "d1-logratio-alpha1",
                "max/min of median R_n / log n, alpha = 1",
                spread,
                c.log_ratio_factor_alpha1,
            ));
        }
    }
    report.tables.push(("d1_growth_profiles".into(), rows));
    Ok(report)
}

// ---------------------------------------------------------------------------
// d = 2 growth
// ---------------------------------------------------------------------------

pub fn d2_growth(cfg: &Config) -> anyhow::Result<SuiteReport> {
    let c = &cfg.d2_growth;
    let mut report = SuiteReport::new(SuiteKind::D2Growth.canonical_name());
    let mut rows = String::from("instance,n,R,residual,iterations\n");
    let n_max = *c.n_list.last().expect("non-empty box list");
    let boxw = (n_max + c.box_margin) as f64;
    let kernel = JumpKernel::poly(2, c.alpha)?;

    let mut instances: Vec<(String, PointSet<f64>)> =
        vec![("lattice".into(), lattice_set::<f64>(2, n_max + c.box_margin)?)];
    for s in 0..c.ppp_seeds {
        let seed = cfg.run.seed.wrapping_add(100 + s as u64);
        report.seeds.push(seed);
        instances.push((format!("ppp{seed}"), sample_ppp::<f64>(2, 1.0, boxw, seed)?));
    }
    let mut first_profile: Vec<(usize, f64)> = Vec::new();
    for (name, pts) in &instances {
        let source = pts.nearest_to_origin().expect("non-empty sample");
        let opts = ProfileOptions {
            solve: solve_options(cfg),
            packed_budget: cfg.solver.packed_budget,
            cut: Some(c.cut),
        };
        let profile = box_resistance_profile(pts, &kernel, source, &c.n_list, &opts)?;
        let ratios: Vec<f64> = profile
            .entries
            .iter()
            .map(|e| e.resistance / (e.n as f64).ln())
            .collect();
        for e in &profile.entries {
            writeln!(rows, "{},{},{},{},{}", name, e.n, e.resistance, e.residual, e.iterations)?;
        }
        let spread = ratios.iter().cloned().fold(0.0, f64::max)
            / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        report.push(CheckLine::at_most(
            &format!("d2-logratio-{name}"),
            "max/min of R_n / log n across the box range",
            spread,
            c.log_ratio_factor,
        ));
        if first_profile.is_empty() {
            first_profile = profile.entries.iter().map(|e| (e.n, e.resistance)).collect();
        }
    }
    let models = match fit_growth(&first_profile, GrowthModel::Log) {
        Ok(fit) => vec![(
            "log_fit".to_string(),
            first_profile
                .iter()
                .map(|m| fit.intercept + fit.slope * (m.0 as f64).ln())
                .collect(),
        )],
        Err(_) => Vec::new(),
    };
    report.plot = PlotTable {
        x: first_profile.iter().map(|m| m.0 as f64).collect(),
        y: first_profile.iter().map(|m| m.1).collect(),
        models,
    };

    // exact chain-bound checks on small boxes: every reduction stage can
    // only lower the resistance
    let mut chain_rows = String::from("instance,n,R_points,R_coarse,R_shell,R_chain\n");
    let mut exact_instances: Vec<(String, PointSet<f64>)> =
        vec![("lattice".into(), lattice_set::<f64>(2, c.exact_check_box)?)];
    for s in 0..c.exact_check_seeds {
        let seed = cfg.run.seed.wrapping_add(500 + s as u64);
        report.seeds.push(seed);
        exact_instances.push((
            format!("ppp{seed}"),
            sample_ppp::<f64>(2, 1.0, c.exact_check_box as f64, seed)?,
        ));
    }
    for (name, pts) in &exact_instances {
        let pts = Arc::new(pts.clone());
        let net = build_network(
            &pts,
            &kernel,
            &BuildOptions { node_budget: 6000, materialize: true, cut: None },
        )?;
        let source = pts.nearest_to_origin().unwrap();
        let coarse = cube_collapse(pts.as_ref(), 1, c.alpha)?;
        let shells = shell_collapse_2d(&coarse)?;
        let (coarse_net, coarse_sites) = coarse.to_dense_network()?;
        let (shell_net, shell_ids) = shell_network_to_dense(&shells)?;
        let chain = series_split(&shells)?;
        for &n in &[c.exact_check_box / 4, c.exact_check_box / 2] {
            let nf = n as f64;
            let sink: Vec<usize> =
                (0..pts.len()).filter(|&i| pts.norm_inf(i) > nf).collect();
            let r_points =
                effective_resistance(&net, source, &sink, &solve_options(cfg))?.resistance;
            // points beyond box n can land in cube n, so the monotone-safe
            // coarse sink grounds every site with max-norm at least n (and
            // the chain sum correspondingly stops one link earlier)
            let coarse_source = coarse_sites
                .iter()
                .position(|s| s.iter().all(|&v| v == 0))
                .expect("origin site occupied");
            let coarse_sink: Vec<usize> = coarse_sites
                .iter()
                .enumerate()
                .filter(|(_, s)| s.iter().map(|v| v.abs()).max().unwrap() >= n as i64)
                .map(|(i, _)| i)
                .collect();
            let r_coarse =
                effective_resistance(&coarse_net, coarse_source, &coarse_sink, &solve_options(cfg))?
                    .resistance;
            let shell_source = shell_ids.iter().position(|&a| a == 0).expect("origin shell");
            let shell_sink: Vec<usize> = shell_ids
                .iter()
                .enumerate()
                .filter(|(_, &a)| a >= n)
                .map(|(i, _)| i)
                .collect();
            let r_shell = effective_resistance(&shell_net, shell_source, &shell_sink, &solve_options(cfg))?
                .resistance;
            let r_chain = chain_resistance(&chain, n - 1)?;
            writeln!(chain_rows, "{name},{n},{r_points},{r_coarse},{r_shell},{r_chain}")?;
            let slack = 1.0 + 1e-9;
            report.push(CheckLine::new(
                &format!("d2-chain-bound-{name}-n{n}"),
                "reduction pipeline monotone: points >= coarse >= shells >= chain",
                r_points - r_chain,
                "each stage non-increasing".into(),
                r_points * slack >= r_coarse
                    && r_coarse * slack >= r_shell
                    && r_shell * slack >= r_chain
                    && r_chain > 0.0,
            ));
        }
    }

    // moment probe at alpha = 2 (the slow-growth regime's quantities)
    let probe = phi_moment_probe::<f64>(
        &GammaField::Poisson(1.0),
        2.0,
        &c.probe_i_list,
        c.probe_trials,
        c.probe_box,
        cfg.run.seed.wrapping_add(900),
    )?;
    let mut probe_rows = String::from("i,mean,mean_over_ilogi,fourth_central,fourth_over_i2\n");
    for r in &probe {
        writeln!(
            probe_rows,
            "{},{},{},{},{}",
            r.i, r.mean, r.mean_over_omega, r.fourth_central, r.fourth_over_i_sq
        )?;
    }
    let mean_ratios: Vec<f64> = probe.iter().map(|r| r.mean_over_omega).collect();
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    report.push(CheckLine::at_most(
        "d2-probe-mean",
        "max/min of E(phi_i)/(i log i) across probe indices",
        spread(&mean_ratios),
        c.probe_mean_ratio_factor,
    ));
    // the proven fourth-moment bound is quadratic in i; test the growth
    // exponent rather than a spread, which Monte Carlo noise would dominate
    let lx: Vec<f64> = probe.iter().map(|r| (r.i as f64).ln()).collect();
    let ly: Vec<f64> = probe.iter().map(|r| r.fourth_central.max(1e-300).ln()).collect();
    let (_, fourth_slope, _) = linear_fit(&lx, &ly);
    report.push(CheckLine::at_most(
        "d2-probe-fourth",
        "log-log growth slope of the fourth central moment of phi_i",
        fourth_slope,
        c.probe_fourth_slope_max,
    ));

    report.tables.push(("d2_growth_profiles".into(), rows));
    report.tables.push(("d2_chain_bounds".into(), chain_rows));
    report.tables.push(("d2_moment_probe".into(), probe_rows));
    Ok(report)
}

// ---------------------------------------------------------------------------
// renewal flux
// ---------------------------------------------------------------------------

pub fn renewal_flux(cfg: &Config) -> anyhow::Result<SuiteReport> {
    let c = &cfg.renewal_flux;
    let mut report = SuiteReport::new(SuiteKind::RenewalFlux.canonical_name());

    // renewal-sequence asymptotics at n = limit_n
    let mut limit_rows = String::from("delta,n,n_pow_f,stated_limit,srt_limit\n");
    for &delta in &c.limit_deltas {
        let seq = renewal_sequence(delta, c.limit_n)?;
        let val = (c.limit_n as f64).powf(2.0 - delta) * seq.f[c.limit_n];
        let stated = gamma(2.0 - delta) / gamma(delta - 1.0);
        let srt = renewal_limit_constant(delta);
        writeln!(limit_rows, "{delta},{},{val},{stated},{srt}", c.limit_n)?;
        report.push(CheckLine::at_most(
            &format!("renewal-limit-{delta}"),
            "relative distance of n^{2-delta} f(n) from Gamma(2-delta)/Gamma(delta-1)",
            ((val - stated) / stated).abs(),
            c.limit_tol,
        ));
        report.push(CheckLine::at_most(
            &format!("renewal-limit-srt-{delta}"),
            "relative distance from the strong-renewal constant (diagnostic)",
            ((val - srt) / srt).abs(),
            if delta > 1.7 { 0.10 } else { 0.01 },
        ));
    }
    report.tables.push(("renewal_limits".into(), limit_rows));

    // flux on Poisson points
    let seed = cfg.run.seed.wrapping_add(40);
    report.seeds.push(seed);
    let boxw = (c.points as f64) * 1.05 / c.lambda;
    let pts = sample_ppp::<f64>(1, c.lambda, boxw, seed)?;
    let flux = RenewalFlux1d::new(&pts, c.delta)?;
    report.push(CheckLine::at_most(
        "flux1d-divergence",
        "worst unit-divergence defect over all nodes",
        flux.divergence_defect(),
        c.divergence_tol,
    ));
    let kernel = JumpKernel::poly(1, c.alpha)?;
    let half = (flux.len() - 1) / 2;
    let full = flux.len() - 1;
    let cert = flux.energy_certificate(&kernel, c.alpha, &[half, full])?;
    let e_half = cert.partial_sums[0].1;
    let e_full = cert.partial_sums[1].1;
    report.push(CheckLine::at_most(
        "flux1d-cauchy",
        "relative gap between the half and full energy partial sums",
        (e_full - e_half) / e_full,
        c.cauchy_fraction,
    ));
    report.push(CheckLine::new(
        "flux1d-certified",
        "finite-energy certificate with analytic tail bound",
        cert.tail_bound.unwrap_or(f64::NAN),
        "finite, verdict certified".into(),
        cert.verdict == Verdict::FiniteCertified,
    ));
    let mut cert_rows = String::from("level,partial_energy\n");
    for (l, e) in &cert.partial_sums {
        writeln!(cert_rows, "{l},{e}")?;
    }
    writeln!(cert_rows, "tail_bound,{}", cert.tail_bound.unwrap_or(f64::NAN))?;
    report.tables.push(("renewal_flux_energy".into(), cert_rows));
    report.plot = PlotTable {
        x: cert.partial_sums.iter().map(|p| p.0 as f64).collect(),
        y: cert.partial_sums.iter().map(|p| p.1).collect(),
        models: vec![],
    };
    Ok(report)
}

// ---------------------------------------------------------------------------
// circle flux
// ---------------------------------------------------------------------------

pub fn circle_flux(cfg: &Config) -> anyhow::Result<SuiteReport> {
    let c = &cfg.circle_flux;
    let mut report = SuiteReport::new(SuiteKind::CircleFlux.canonical_name());
    let seed = cfg.run.seed.wrapping_add(70);
    report.seeds.push(seed);
    let flux = CircleFlux::new(c.n_max, c.delta, c.alpha, c.theta_samples, seed)?;
    report.push(CheckLine::at_most(
        "circle-recursion",
        "worst shell-recursion defect",
        flux.shell_recursion_defect(),
        c.recursion_tol,
    ));
    // shell-total slope against delta - 2 on the fit range
    let (lo, hi) = c.slope_fit_range;
    let xs: Vec<f64> = (lo..=hi).map(|n| (n as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=hi).map(|n| flux.seq.f[n].ln()).collect();
    let (_, slope, _) = linear_fit(&xs, &ys);
    let target = c.delta - 2.0;
    report.push(CheckLine::at_most(
        "circle-slope",
        "absolute distance of the shell-total log-log slope from delta - 2",
        (slope - target).abs(),
        c.slope_rel_tol,
    ));
    // energy: comparison series summable and certified
    let cert = flux.comparison_certificate();
    let sums = &cert.raw_partial_sums;
    let n_sums = sums.len();
    let mut incr_x = Vec::new();
    let mut incr_y = Vec::new();
    for w in sums.windows(2).skip(n_sums / 2) {
        let d = w[1].1 - w[0].1;
        if d > 0.0 {
            incr_x.push((w[1].0 as f64).ln());
            incr_y.push(d.ln());
        }
    }
    let (_, incr_slope, _) = linear_fit(&incr_x, &incr_y);
    report.push(CheckLine::new(
        "circle-energy-summable",
        "log-log slope of late energy increments (summable below -1)",
        incr_slope,
        "< -1".into(),
        incr_slope < -1.0 && cert.verdict == Verdict::FiniteCertified,
    ));
    // contrapositive run outside the exponent window
    let bad = CircleFlux::new(c.n_max, c.contrapositive_delta, c.alpha, c.theta_samples, seed)?;
    let bad_cert = bad.comparison_certificate();
    let bsums = &bad_cert.raw_partial_sums;
    let mut bx = Vec::new();
    let mut by = Vec::new();
    for w in bsums.windows(2).skip(bsums.len() / 2) {
        let d = w[1].1 - w[0].1;
        if d > 0.0 {
            bx.push((w[1].0 as f64).ln());
            by.push(d.ln());
        }
    }
    let (_, bad_slope, _) = linear_fit(&bx, &by);
    report.push(CheckLine::new(
        "circle-contrapositive",
        "outside the exponent window the certificate must not certify",
        bad_slope,
        "verdict inconclusive, increments non-summable".into(),
        bad_cert.verdict == Verdict::Inconclusive && bad_slope > -1.0,
    ));
    let mut rows = String::from("n,f_n,raw_energy_partial\n");
    for (i, &(n, e)) in sums.iter().enumerate() {
        let _ = i;
        writeln!(rows, "{n},{},{e}", flux.seq.f[n])?;
    }
    report.tables.push(("circle_flux_shells".into(), rows));
    report.plot = PlotTable {
        x: (lo..=hi).map(|n| n as f64).collect(),
        y: (lo..=hi).map(|n| flux.seq.f[n]).collect(),
        models: vec![(
            "power_fit".into(),
            (lo..=hi)
                .map(|n| {
                    let (a, b, _) = linear_fit(&xs, &ys);
                    (a + b * (n as f64).ln()).exp()
                })
                .collect(),
        )],
    };
    Ok(report)
}

// ---------------------------------------------------------------------------
// harmonic analysis
// ---------------------------------------------------------------------------

pub fn harmonic(cfg: &Config) -> anyhow::Result<SuiteReport> {
    let c = &cfg.harmonic;
    let mut report = SuiteReport::new(SuiteKind::Harmonic.canonical_name());
    let t_list: Vec<f64> = c.t_exponents.iter().map(|&k| 1.0 - 10f64.powi(-k)).collect();
    let expected = [
        (1usize, 0.5, IntegralClass::Convergent),
        (1, 1.0, IntegralClass::Divergent),
        (1, 1.5, IntegralClass::Divergent),
        (2, 1.0, IntegralClass::Convergent),
        (2, 2.0, IntegralClass::Divergent),
        (2, 3.0, IntegralClass::Divergent),
    ];
    let mut rows = String::from("dim,alpha,t,integral\n");
    for &(dim, alpha, expect) in &expected {
        let cf = CharFn::new(dim, alpha)?;
        let cache = OmCache::new(&cf);
        let res = spitzer_from_cache(&cache, &t_list)?;
        for (t, v) in &res.values {
            writeln!(rows, "{dim},{alpha},{t},{v}")?;
        }
        report.push(CheckLine::new(
            &format!("type-d{dim}-alpha{alpha}"),
            "integral criterion classification matches the type table",
            res.last_relative_change,
            format!("{expect:?}"),
            res.classification == expect,
        ));
        if dim == 1 && (alpha - 1.0).abs() < 1e-12 {
            let tb = truncated_bound_from_cache(&cache, &c.trunc_n_list)?;
            let slope = rwre_core::certificates::growth_log_slope(&tb);
            let (lo, hi) = c.log_slope_band_alpha1;
            report.push(CheckLine::band(
                "trunc-log-slope-alpha1",
                "log-model slope of the truncated resistance bound, d=1 alpha=1",
                slope,
                lo,
                hi,
            ));
        }
        if dim == 1 && (alpha - 1.5).abs() < 1e-12 {
            let tb = truncated_bound_from_cache(&cache, &c.trunc_n_list)?;
            let slope = rwre_core::certificates::growth_power_slope(&tb);
            let (lo, hi) = c.power_slope_band_alpha15;
            report.push(CheckLine::band(
                "trunc-power-slope-alpha15",
                "power-model slope of the truncated resistance bound, d=1 alpha=1.5",
                slope,
                lo,
                hi,
            ));
        }
    }
    report.tables.push(("harmonic_integrals".into(), rows));

    // shell-sum bands on both families
    let mut band_rows = String::from("family,alpha,lo,hi,constant\n");
    for family in [ShellFamily::Circles, ShellFamily::Squares] {
        for &alpha in &c.band_alphas {
            let scan = shell_band_scan(family, alpha, c.band_max_n)?;
            writeln!(
                band_rows,
                "{:?},{},{},{},{}",
                family, alpha, scan.lo, scan.hi, scan.constant
            )?;
            report.push(CheckLine::at_most(
                &format!("shell-band-{:?}-alpha{}", family, alpha),
                "single band constant covering all scanned shell pairs",
                scan.constant,
                c.band_constant_limit,
            ));
        }
    }
    report.tables.push(("shell_bands".into(), band_rows));
    Ok(report)
}
