//! Executes a suite, writes its tables, plot, report and manifest into an
//! output directory, and prints the PASS/FAIL lines.

use crate::config::Config;
use crate::manifest::{write_output, Manifest, StageTimer};
use crate::plots::emit_plots;
use crate::report::SuiteReport;
use crate::suites::{run_suite, SuiteKind};
use std::path::Path;

pub struct SuiteOutcome {
    pub report: SuiteReport,
    pub pass: bool,
}

pub fn execute_suite(kind: SuiteKind, cfg: &Config, out_dir: &Path) -> anyhow::Result<SuiteOutcome> {
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = Manifest::new(kind.canonical_name(), cfg.echo());
    let timer = StageTimer::start(kind.canonical_name());
    let report = run_suite(kind, cfg)?;
    let mut stage = timer.finish();
    for (stem, body) in &report.tables {
        write_output(out_dir, &format!("{stem}.csv"), body, &mut stage)?;
    }
    write_output(out_dir, "plot.csv", &emit_plots(&report.plot), &mut stage)?;
    write_output(out_dir, "report.json", &serde_json::to_string_pretty(&report)?, &mut stage)?;
    write_output(out_dir, "checks.txt", &report.render_lines(), &mut stage)?;
    manifest.seeds = report.seeds.clone();
    manifest.stages.push(stage);
    manifest.write(out_dir)?;
    print!("{}", report.render_lines());
    let pass = report.pass;
    Ok(SuiteOutcome { report, pass })
}
