//! Persistence of experiment results as JSON, flat CSV tables, and two-column
//! plot series files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use persnet::stats::Indicator;
use serde::{Deserialize, Serialize};

use crate::compare::CompareReport;
use crate::impact::ImpactReport;
use crate::optimize::OptimizeReport;
use crate::scale::{ScaleCell, ScaleReport};
use crate::simulate::SimulationReport;
use crate::{HarnessError, Result};

/// Any experiment's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultSet {
    Optimize(OptimizeReport),
    Compare(CompareReport),
    Simulation(SimulationReport),
    SurrogateImpact(ImpactReport),
    Scalability(ScaleReport),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
    Plotdata,
}

impl FromStr for ExportFormat {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            "plotdata" => Ok(ExportFormat::Plotdata),
            other => Err(HarnessError::Config(format!("unknown export format {other:?}; use csv, json or plotdata"))),
        }
    }
}

impl ResultSet {
    pub fn kind(&self) -> &'static str {
        match self {
            ResultSet::Optimize(_) => "optimize",
            ResultSet::Compare(_) => "compare",
            ResultSet::Simulation(_) => "simulation",
            ResultSet::SurrogateImpact(_) => "surrogate_impact",
            ResultSet::Scalability(_) => "scalability",
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            ResultSet::Optimize(r) => r.front.is_empty(),
            ResultSet::Compare(r) => r.instance_metrics.is_empty(),
            ResultSet::Simulation(r) => r.windows.is_empty(),
            ResultSet::SurrogateImpact(r) => r.rows.is_empty(),
            ResultSet::Scalability(r) => r.user_sweep.is_empty() && r.nfe_sweep.is_empty(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_files(results: &ResultSet, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut table = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<()> {
        let path = dir.join(name);
        write_table(&path, header, rows)?;
        out.push(path);
        Ok(())
    };
    match results {
        ResultSet::Optimize(r) => {
            let rows = r
                .front
                .iter()
                .map(|p| {
                    let chosen = r.operating_point.as_ref() == Some(p);
                    vec![
                        r.config_hash.clone(),
                        r.seed.to_string(),
                        r.run_seed.to_string(),
                        r.algorithm.clone(),
                        p.saved_bps.to_string(),
                        p.satisfaction.to_string(),
                        p.true_satisfaction.to_string(),
                        chosen.to_string(),
                    ]
                })
                .collect();
            table(
                "front.csv",
                &["config_hash", "seed", "run_seed", "algorithm", "saved_bps", "satisfaction", "true_satisfaction", "operating_point"],
                rows,
            )?;
        }
        ResultSet::Compare(r) => {
            let mut rows = Vec::new();
            for m in Indicator::ALL {
                for (j, alg) in r.algorithms.iter().enumerate() {
                    let col: Vec<f64> = r.matrix(m).iter().map(|row| row[j]).collect();
                    let mean = col.iter().sum::<f64>() / col.len() as f64;
                    let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let min = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let (rank, p, api) = match &r.stats {
                        Some(s) => {
                            let ms = s.metrics.iter().find(|x| x.metric == m).expect("every indicator analysed");
                            (Some(ms.friedman.avg_ranks[j]), Some(ms.friedman.p_value), Some(s.api[j].score))
                        }
                        None => (None, None, None),
                    };
                    rows.push(vec![
                        r.config_hash.clone(),
                        r.seed.to_string(),
                        m.name().to_string(),
                        alg.clone(),
                        opt(rank),
                        mean.to_string(),
                        max.to_string(),
                        min.to_string(),
                        opt(p),
                        opt(api),
                    ]);
                }
            }
            table(
                "compare_table.csv",
                &["config_hash", "seed", "metric", "algorithm", "rank", "mean", "max", "min", "p_value", "api"],
                rows,
            )?;
            let rows = r
                .run_metrics
                .iter()
                .map(|m| {
                    let i = &m.indicators;
                    vec![
                        r.config_hash.clone(),
                        r.seed.to_string(),
                        m.instance.to_string(),
                        m.algorithm.clone(),
                        m.run.to_string(),
                        m.run_seed.to_string(),
                        m.front_size.to_string(),
                        i.hv.to_string(),
                        i.gd.to_string(),
                        i.igd.to_string(),
                        i.sp.to_string(),
                        i.ngr.to_string(),
                    ]
                })
                .collect();
            table(
                "compare_runs.csv",
                &["config_hash", "seed", "instance", "algorithm", "run", "run_seed", "front_size", "hv", "gd", "igd", "sp", "ngr"],
                rows,
            )?;
            if let Some(s) = &r.stats {
                let mut rows = Vec::new();
                for ms in &s.metrics {
                    for t in &ms.posthoc {
                        for p in &t.pairs {
                            rows.push(vec![
                                r.config_hash.clone(),
                                r.seed.to_string(),
                                ms.metric.name().to_string(),
                                t.test.name().to_string(),
                                r.algorithms[p.a].clone(),
                                r.algorithms[p.b].clone(),
                                p.p_value.to_string(),
                                p.reject.to_string(),
                            ]);
                        }
                    }
                }
                table(
                    "compare_posthoc.csv",
                    &["config_hash", "seed", "metric", "test", "algorithm_a", "algorithm_b", "p_value", "reject"],
                    rows,
                )?;
            }
        }
        ResultSet::Simulation(r) => {
            let rows = r
                .windows
                .iter()
                .map(|w| {
                    vec![
                        r.config_hash.clone(),
                        r.seed.to_string(),
                        w.window.to_string(),
                        w.start_s.to_string(),
                        w.slots.to_string(),
                        w.npn_saved_bps.to_string(),
                        w.npn_satisfaction.to_string(),
                        opt(w.fpn_saved_bps),
                        opt(w.fpn_satisfaction),
                        w.fpn_target_met_slots.to_string(),
                        opt(w.spn_saved_bps),
                        opt(w.spn_estimated),
                        opt(w.spn_feedback),
                        w.spn_target_met_slots.to_string(),
                    ]
                })
                .collect();
            table(
                "simulation_windows.csv",
                &[
                    "config_hash",
                    "seed",
                    "window",
                    "start_s",
                    "slots",
                    "npn_saved_bps",
                    "npn_satisfaction",
                    "fpn_saved_bps",
                    "fpn_satisfaction",
                    "fpn_target_met_slots",
                    "spn_saved_bps",
                    "spn_estimated",
                    "spn_feedback",
                    "spn_target_met_slots",
                ],
                rows,
            )?;
            let rows = r
                .slots
                .iter()
                .map(|s| {
                    vec![
                        r.config_hash.clone(),
                        r.seed.to_string(),
                        s.slot.to_string(),
                        s.time_s.to_string(),
                        s.run_seed.to_string(),
                        s.npn_rate_bps.to_string(),
                        s.npn_satisfaction.to_string(),
                        opt(s.fpn.map(|o| o.saved_bps)),
                        opt(s.fpn.map(|o| o.feedback)),
                        s.fpn.map(|o| o.target_met.to_string()).unwrap_or_default(),
                        opt(s.spn.map(|o| o.saved_bps)),
                        opt(s.spn.map(|o| o.estimated)),
                        opt(s.spn.map(|o| o.feedback)),
                        s.spn.map(|o| o.target_met.to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            table(
                "simulation_slots.csv",
                &[
                    "config_hash",
                    "seed",
                    "slot",
                    "time_s",
                    "run_seed",
                    "npn_rate_bps",
                    "npn_satisfaction",
                    "fpn_saved_bps",
                    "fpn_satisfaction",
                    "fpn_target_met",
                    "spn_saved_bps",
                    "spn_estimated",
                    "spn_feedback",
                    "spn_target_met",
                ],
                rows,
            )?;
        }
        ResultSet::SurrogateImpact(r) => {
            let mut rows = Vec::new();
            for row in &r.rows {
                for a in &row.algorithms {
                    rows.push(vec![
                        r.config_hash.clone(),
                        r.seed.to_string(),
                        row.fraction.map_or("oracle".to_string(), |f| f.to_string()),
                        row.train_samples.to_string(),
                        row.accuracy.to_string(),
                        a.algorithm.clone(),
                        a.mean_hv.to_string(),
                        a.median_hv.to_string(),
                    ]);
                }
            }
            table(
                "surrogate_impact.csv",
                &["config_hash", "seed", "training_fraction", "train_samples", "accuracy", "algorithm", "mean_hv", "median_hv"],
                rows,
            )?;
        }
        ResultSet::Scalability(r) => {
            let cells = |cells: &[ScaleCell]| -> Vec<Vec<String>> {
                cells
                    .iter()
                    .map(|c| {
                        vec![
                            r.config_hash.clone(),
                            r.seed.to_string(),
                            c.algorithm.clone(),
                            c.users.to_string(),
                            c.nfe.to_string(),
                            c.mean_hv.to_string(),
                            c.median_hv.to_string(),
                            c.reference_hv.to_string(),
                        ]
                    })
                    .collect()
            };
            let header = ["config_hash", "seed", "algorithm", "users", "nfe", "mean_hv", "median_hv", "reference_hv"];
            table("scalability_users.csv", &header, cells(&r.user_sweep))?;
            table("scalability_nfe.csv", &header, cells(&r.nfe_sweep))?;
        }
    }
    Ok(out)
}

/// Two-column series: `# x y` header line, then one tab-separated row per point.
fn series(dir: &Path, name: &str, columns: (&str, &str), points: &[(f64, f64)], out: &mut Vec<PathBuf>) -> Result<()> {
    let mut text = format!("# {}\t{}\n", columns.0, columns.1);
    for (x, y) in points {
        writeln!(text, "{x}\t{y}").expect("writing to a String");
    }
    let path = dir.join(name);
    fs::write(&path, text)?;
    out.push(path);
    Ok(())
}

fn file_label(label: &str) -> String {
    label.replace('#', "_")
}

fn plot_files(results: &ResultSet, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    match results {
        ResultSet::Optimize(r) => {
            let pts: Vec<(f64, f64)> = r.front.iter().map(|p| (p.satisfaction, p.saved_bps / 1e3)).collect();
            series(dir, "front.dat", ("avg_satisfaction", "saved_kbps"), &pts, &mut out)?;
            if let Some(p) = &r.operating_point {
                series(dir, "operating_point.dat", ("avg_satisfaction", "saved_kbps"), &[(p.satisfaction, p.saved_bps / 1e3)], &mut out)?;
            }
        }
        ResultSet::Simulation(r) => {
            let t = |w: &crate::simulate::SimulationRecord| f64::from(w.start_s);
            let collect = |f: &dyn Fn(&crate::simulate::SimulationRecord) -> Option<f64>| -> Vec<(f64, f64)> {
                r.windows.iter().filter_map(|w| f(w).map(|y| (t(w), y))).collect()
            };
            let saved = ("window_start_s", "saved_kbps");
            let sat = ("window_start_s", "avg_satisfaction");
            series(dir, "saved_npn.dat", saved, &collect(&|w| Some(w.npn_saved_bps / 1e3)), &mut out)?;
            let fpn = collect(&|w| w.fpn_saved_bps.map(|v| v / 1e3));
            if !fpn.is_empty() {
                series(dir, "saved_fpn.dat", saved, &fpn, &mut out)?;
                series(dir, "satisfaction_fpn.dat", sat, &collect(&|w| w.fpn_satisfaction), &mut out)?;
            }
            let spn = collect(&|w| w.spn_saved_bps.map(|v| v / 1e3));
            if !spn.is_empty() {
                series(dir, "saved_spn.dat", saved, &spn, &mut out)?;
                series(dir, "satisfaction_spn_estimated.dat", sat, &collect(&|w| w.spn_estimated), &mut out)?;
                series(dir, "satisfaction_spn_feedback.dat", sat, &collect(&|w| w.spn_feedback), &mut out)?;
            }
            series(dir, "satisfaction_npn.dat", sat, &collect(&|w| Some(w.npn_satisfaction)), &mut out)?;
        }
        ResultSet::SurrogateImpact(r) => {
            let algs: Vec<String> = r.rows.first().map(|row| row.algorithms.iter().map(|a| a.algorithm.clone()).collect()).unwrap_or_default();
            for (a, label) in algs.iter().enumerate() {
                let pts: Vec<(f64, f64)> =
                    r.rows.iter().filter_map(|row| row.fraction.map(|f| (f * 100.0, row.algorithms[a].mean_hv))).collect();
                series(dir, &format!("impact_{}.dat", file_label(label)), ("training_data_pct", "mean_hv"), &pts, &mut out)?;
            }
        }
        ResultSet::Scalability(r) => {
            let mut by_alg = |cells: &[ScaleCell], prefix: &str, x: &str, pick: fn(&ScaleCell) -> f64| -> Result<()> {
                let mut labels: Vec<&str> = Vec::new();
                for c in cells {
                    if !labels.contains(&c.algorithm.as_str()) {
                        labels.push(&c.algorithm);
                    }
                }
                for label in labels {
                    let pts: Vec<(f64, f64)> =
                        cells.iter().filter(|c| c.algorithm == label).map(|c| (pick(c), c.mean_hv)).collect();
                    series(dir, &format!("{prefix}_{}.dat", file_label(label)), (x, "mean_hv"), &pts, &mut out)?;
                }
                Ok(())
            };
            by_alg(&r.user_sweep, "hv_vs_users", "users", |c| c.users as f64)?;
            by_alg(&r.nfe_sweep, "hv_vs_nfe", "nfe", |c| c.nfe as f64)?;
        }
        ResultSet::Compare(_) => {
            return Err(HarnessError::Empty("comparison results have no plot series; use csv or json".into()));
        }
    }
    Ok(out)
}

/// Writes `results` into `dir` in the requested format and returns the files written.
pub fn export_results(results: &ResultSet, format: ExportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(HarnessError::Empty(format!("{} results contain no records", results.kind())));
    }
    fs::create_dir_all(dir)?;
    match format {
        ExportFormat::Json => {
            let path = dir.join(format!("{}.json", results.kind()));
            fs::write(&path, results.to_json()?)?;
            Ok(vec![path])
        }
        ExportFormat::Csv => csv_files(results, dir),
        ExportFormat::Plotdata => plot_files(results, dir),
    }
}
