//! CSV and plot artifacts of sweeps and single runs. Column orders are fixed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{emit_plot, run_scenario, PlotSpec, ScenarioResult, ScenarioSpec};
use crate::arrivals::ArrivalTrace;
use crate::config::{Deployment, SystemConfig};
use crate::error::SimError;
use crate::metrics::MetricsLedger;
use crate::sim::simulate;

pub const RUNS_HEADER: [&str; 16] = [
    "family",
    "point",
    "param",
    "x",
    "rep",
    "seed",
    "arm",
    "total_qoe",
    "baseline_qoe",
    "improvement_percent",
    "mean_shared_slots",
    "mean_marginal_quality",
    "max_debt_ratio",
    "delivery_failures",
    "max_imbalance",
    "debt_blowup",
];

pub const SUMMARY_HEADER: [&str; 13] = [
    "family",
    "point",
    "param",
    "x",
    "arm",
    "reps",
    "mean_improvement_percent",
    "min_improvement_percent",
    "max_improvement_percent",
    "mean_total_qoe",
    "mean_shared_slots",
    "mean_marginal_quality",
    "blowups",
];

pub const REGIONS_HEADER: [&str; 8] = [
    "family",
    "point",
    "rep",
    "arm",
    "region",
    "qoe",
    "baseline_qoe",
    "improvement_percent",
];

pub const REGION_SUMMARY_HEADER: [&str; 5] = ["family", "region", "operator1_rate", "arm", "mean_improvement_percent"];

/// One row per (point, replication, arm).
pub fn write_points_csv<W: Write>(res: &ScenarioResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNS_HEADER)?;
    let fam = res.spec.family.name();
    for run in &res.runs {
        for (a, arm) in run.arms.iter().enumerate() {
            w.write_record([
                fam.to_string(),
                run.point.index.to_string(),
                run.point.param.to_string(),
                run.point.x.to_string(),
                run.rep.to_string(),
                run.seed.to_string(),
                arm.mode.label(),
                arm.total_qoe.to_string(),
                run.baseline().total_qoe.to_string(),
                run.improvement(a).to_string(),
                arm.mean_shared_slots.to_string(),
                arm.mean_marginal_quality.to_string(),
                arm.max_debt_ratio.to_string(),
                arm.delivery_failures.to_string(),
                arm.max_imbalance.to_string(),
                arm.debt_blowup().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per (point, arm) with statistics over replications.
pub fn write_summary_csv<W: Write>(res: &ScenarioResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for p in &res.points {
        for (a, mode) in res.arms.iter().enumerate() {
            let runs: Vec<_> = res.runs_at(p.index).collect();
            let n = runs.len() as f64;
            let imps: Vec<f64> = runs.iter().map(|r| r.improvement(a)).collect();
            let mean = |f: &dyn Fn(&super::RepRun) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / n;
            w.write_record([
                res.spec.family.name().to_string(),
                p.index.to_string(),
                p.param.to_string(),
                p.x.to_string(),
                mode.label(),
                runs.len().to_string(),
                (imps.iter().sum::<f64>() / n).to_string(),
                imps.iter().copied().fold(f64::INFINITY, f64::min).to_string(),
                imps.iter().copied().fold(f64::NEG_INFINITY, f64::max).to_string(),
                mean(&|r| r.arms[a].total_qoe).to_string(),
                mean(&|r| r.arms[a].mean_shared_slots).to_string(),
                mean(&|r| r.arms[a].mean_marginal_quality).to_string(),
                runs.iter().filter(|r| r.arms[a].debt_blowup()).count().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per (point, replication, arm, region).
pub fn write_regions_csv<W: Write>(res: &ScenarioResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REGIONS_HEADER)?;
    for run in &res.runs {
        for (a, arm) in run.arms.iter().enumerate() {
            for (r, q) in arm.region_qoe.iter().enumerate() {
                w.write_record([
                    res.spec.family.name().to_string(),
                    run.point.index.to_string(),
                    run.rep.to_string(),
                    arm.mode.label(),
                    r.to_string(),
                    q.to_string(),
                    run.baseline().region_qoe[r].to_string(),
                    run.region_improvement(a, r).to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_region_summary<W: Write>(res: &ScenarioResult, base: &SystemConfig, out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REGION_SUMMARY_HEADER)?;
    for p in &res.points {
        let d = res.spec.deployment(base, p)?;
        for r in 0..d.config.num_regions {
            let rate = d.members(0, r).first().map_or(0.0, |&n| d.clients[n].arrival_rate);
            for (a, mode) in res.arms.iter().enumerate() {
                let runs: Vec<_> = res.runs_at(p.index).collect();
                let mean = runs.iter().map(|run| run.region_improvement(a, r)).sum::<f64>() / runs.len() as f64;
                w.write_record([
                    res.spec.family.name().to_string(),
                    r.to_string(),
                    rate.to_string(),
                    mode.label(),
                    mean.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Files written by [`run_figure_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepArtifacts {
    pub csv: Vec<PathBuf>,
    pub plots: Vec<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>, SimError> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs a family and writes its CSVs and plots into `out_dir`:
/// `<family>_runs.csv`, `<family>_summary.csv`, `<family>_regions.csv`,
/// `<family>_region_summary.csv`, and one SVG per panel.
pub fn run_figure_sweep(
    spec: &ScenarioSpec,
    base: &SystemConfig,
    out_dir: &Path,
) -> Result<(ScenarioResult, SweepArtifacts), SimError> {
    std::fs::create_dir_all(out_dir)?;
    let res = run_scenario(spec, base)?;
    let fam = spec.family.name();
    let path = |suffix: &str| out_dir.join(format!("{fam}_{suffix}"));

    let runs = path("runs.csv");
    write_points_csv(&res, create(&runs)?)?;
    let summary = path("summary.csv");
    write_summary_csv(&res, create(&summary)?)?;
    let regions = path("regions.csv");
    write_regions_csv(&res, create(&regions)?)?;
    let region_summary = path("region_summary.csv");
    write_region_summary(&res, base, create(&region_summary)?)?;

    let x_label = spec.family.x_label();
    let mut panels = vec![(
        "improvement.svg",
        &summary,
        PlotSpec::new(&format!("{fam}: QoE improvement"), "x", "mean_improvement_percent")
            .series("arm")
            .labels(x_label, "QoE improvement (%)"),
    )];
    if spec.family == super::Family::ArrivalImbalance {
        panels.push((
            "shared.svg",
            &summary,
            PlotSpec::new(&format!("{fam}: slots shared"), "x", "mean_shared_slots")
                .series("arm")
                .labels(x_label, "cross-operator slots per period"),
        ));
        panels.push((
            "marginal.svg",
            &summary,
            PlotSpec::new(&format!("{fam}: marginal quality"), "x", "mean_marginal_quality")
                .series("arm")
                .labels(x_label, "mean marginal quality (1/slot)"),
        ));
    }
    if spec.family == super::Family::MultiRegion {
        panels.push((
            "regions.svg",
            &region_summary,
            PlotSpec::new(&format!("{fam}: per-region improvement"), "operator1_rate", "mean_improvement_percent")
                .series("arm")
                .labels("operator 1 arrival rate (packets/period)", "QoE improvement (%)"),
        ));
    }
    let mut plots = Vec::new();
    for (name, csv, plot) in panels {
        let p = path(name);
        emit_plot(csv, &plot, &p)?;
        plots.push(p);
    }
    Ok((
        res,
        SweepArtifacts {
            csv: vec![runs, summary, regions, region_summary],
            plots,
        },
    ))
}

/// Simulates one deployment on the trace of its master seed and writes
/// `summary.csv`, `debts.csv`, `sharing.csv` and `sharing.svg` into `out_dir`.
pub fn run_single(deployment: &Deployment, out_dir: &Path) -> Result<MetricsLedger, SimError> {
    std::fs::create_dir_all(out_dir)?;
    let trace = ArrivalTrace::generate(deployment, deployment.config.master_seed)?;
    let ledger = simulate(deployment, &trace)?;
    ledger.write_summary_csv(deployment, create(&out_dir.join("summary.csv"))?)?;
    ledger.write_debt_csv(deployment, create(&out_dir.join("debts.csv"))?)?;
    let sharing = out_dir.join("sharing.csv");
    ledger.write_sharing_csv(create(&sharing)?)?;
    emit_plot(
        &sharing,
        &PlotSpec::new("cross-operator sharing per period", "period", "cross_shared_slots")
            .labels("period", "slots lent across operators"),
        &out_dir.join("sharing.svg"),
    )?;
    Ok(ledger)
}
