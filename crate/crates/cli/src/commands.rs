use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pcrps_core::data::{Aggregate, ExcludedCell};
use pcrps_core::grid::{evaluate_grid, skill_vs_reference, CellScore};
use pcrps_core::inference::{box_summary, gridpoint_p_values, DEFAULT_PERMUTATIONS};
use pcrps_core::metrics::{acc, cpa, mae, quantile_loss, rmse, MetricTable};
use pcrps_core::scoring::pc;
use pcrps_core::sim::{run_study, SimConfig, RNG_DESCRIPTION};
use pcrps_core::EvalReport;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::flatgrid::FlatGrid;
use crate::series::Series;
use crate::svg::{strip_chart, Panel};

#[derive(Debug, Parser)]
#[command(
    name = "pcrps",
    version,
    about = "Potential CRPS evaluation of deterministic forecasts"
)]
pub struct Cli {
    /// Worker threads for grid commands; 0 or unset uses all available cores.
    #[arg(long, global = true, env = "PC_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scores one `time,x,y` series.
    Pc(PcArgs),
    /// Per-cell PC of a forecast grid against a truth grid.
    GridEval(GridEvalArgs),
    /// Per-cell block permutation test of two forecast grids.
    Compare(CompareArgs),
    /// Runs the Gamma simulation study.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct PcArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Quantile level of the reported quantile loss.
    #[arg(long, default_value_t = 0.9)]
    pub alpha: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GridEvalArgs {
    #[arg(long)]
    pub forecast: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Per-cell CSV `lat,lon,n_used,pc,pc0,pcs`.
    #[arg(long)]
    pub out: PathBuf,
    /// Aggregate JSON; defaults to `--out` with extension `json`.
    #[arg(long)]
    pub aggregate: Option<PathBuf>,
    /// Reference forecast grid for per-cell skill `1 − PC / PC_ref`.
    #[arg(long)]
    pub skill_ref: Option<PathBuf>,
    /// Skill CSV; defaults to `--out` with extension `skill.csv`.
    #[arg(long)]
    pub skill_out: Option<PathBuf>,
    /// Lead time recorded in the aggregate JSON.
    #[arg(long)]
    pub lead_days: Option<u32>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub model_a: PathBuf,
    #[arg(long)]
    pub model_b: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub lead_days: u32,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-cell CSV `lat,lon,n_used,pc_a,pc_b,p`.
    #[arg(long)]
    pub out: PathBuf,
    /// Quartile summary CSV; defaults to `--out` with extension `summary.csv`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Score against the squared outcome.
    #[arg(long)]
    pub squared: bool,
    /// Metric table CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Aligned text table; defaults to `--out` with extension `txt`.
    #[arg(long)]
    pub text: Option<PathBuf>,
    /// SVG chart; defaults to `--out` with extension `svg`.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

pub fn run(command: &Command, stdout: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Pc(a) => cmd_pc(a, stdout),
        Command::GridEval(a) => cmd_grid_eval(a, stdout),
        Command::Compare(a) => cmd_compare(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
    }
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::io(Path::new("<stdout>"), e)
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Vec<u8>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    fill(&mut w).expect("in-memory write");
    w.into_inner().expect("in-memory write")
}

fn file_label(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

#[derive(Debug, Serialize)]
struct PcReport {
    n: usize,
    pc: f64,
    pc0: f64,
    pcs: f64,
    degenerate: bool,
    rmse: f64,
    mae: f64,
    alpha: f64,
    quantile_loss: f64,
    acc: Option<f64>,
    cpa: Option<f64>,
}

pub fn cmd_pc(args: &PcArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let series = Series::read(&args.input)?;
    let sample = series.sample()?;
    let summary = pc(&sample);
    let report = PcReport {
        n: summary.n,
        pc: summary.pc,
        pc0: summary.pc0,
        pcs: summary.pcs,
        degenerate: summary.degenerate,
        rmse: rmse(&sample),
        mae: mae(&sample),
        alpha: args.alpha,
        quantile_loss: quantile_loss(&sample, args.alpha)?,
        acc: acc(&sample, None).ok(),
        cpa: cpa(&sample).ok(),
    };
    if args.json {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        writeln!(stdout, "{text}").map_err(stdout_err)?;
        return Ok(());
    }
    let opt = |v: Option<f64>| v.map_or("undefined".to_string(), |v| v.to_string());
    let ql_label = format!("QL_{}", args.alpha);
    let rows = [
        ("n", report.n.to_string()),
        ("PC", report.pc.to_string()),
        ("PC0", report.pc0.to_string()),
        ("PCS", report.pcs.to_string()),
        ("RMSE", report.rmse.to_string()),
        ("MAE", report.mae.to_string()),
        (ql_label.as_str(), report.quantile_loss.to_string()),
        ("ACC", opt(report.acc)),
        ("CPA", opt(report.cpa)),
    ];
    for (name, value) in rows {
        writeln!(stdout, "{name:<8} {value}").map_err(stdout_err)?;
    }
    if report.degenerate {
        writeln!(stdout, "note: all outcomes are equal; PCS is reported as 0")
            .map_err(stdout_err)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct AggregateFile<'a> {
    model: &'a str,
    truth: &'a str,
    lead_days: Option<u32>,
    aggregate: &'a Aggregate,
    excluded: &'a [ExcludedCell],
}

fn cell_scores(report: &EvalReport) -> HashMap<(u64, u64), CellScore> {
    report
        .cells
        .iter()
        .map(|c| {
            (
                (c.lat.to_bits(), c.lon.to_bits()),
                CellScore {
                    lat: c.lat,
                    lon: c.lon,
                    value: c.pc,
                },
            )
        })
        .collect()
}

pub fn cmd_grid_eval(args: &GridEvalArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let forecast = FlatGrid::read(&args.forecast)?;
    let truth = FlatGrid::read(&args.truth)?;
    let mut report = evaluate_grid(&forecast.field, &truth.field)?;
    report.model = file_label(&args.forecast);
    report.truth = file_label(&args.truth);
    report.lead_days = args.lead_days;

    let cells = csv_bytes(&["lat", "lon", "n_used", "pc", "pc0", "pcs"], |w| {
        for c in &report.cells {
            w.write_record([
                c.lat.to_string(),
                c.lon.to_string(),
                c.n_used.to_string(),
                c.pc.to_string(),
                c.pc0.to_string(),
                c.pcs.to_string(),
            ])?;
        }
        Ok(())
    });
    write_file(&args.out, &cells)?;

    let aggregate_path = args
        .aggregate
        .clone()
        .unwrap_or_else(|| args.out.with_extension("json"));
    let aggregate = AggregateFile {
        model: &report.model,
        truth: &report.truth,
        lead_days: report.lead_days,
        aggregate: &report.aggregate,
        excluded: &report.excluded,
    };
    let mut json = serde_json::to_vec_pretty(&aggregate).expect("aggregate serializes");
    json.push(b'\n');
    write_file(&aggregate_path, &json)?;

    let a = &report.aggregate;
    writeln!(
        stdout,
        "cells {}  excluded {}  PC {}  PC0 {}  PCS {}",
        a.n_cells,
        report.excluded.len(),
        a.pc,
        a.pc0,
        a.pcs
    )
    .map_err(stdout_err)?;

    if let Some(ref_path) = &args.skill_ref {
        let reference = FlatGrid::read(ref_path)?;
        reference.field.check_same_coords(&truth.field)?;
        let ref_report = evaluate_grid(&reference.field, &truth.field)?;
        // Skill is defined where both forecasts have a score.
        let ref_scores = cell_scores(&ref_report);
        let model_scores = cell_scores(&report);
        let (mut m, mut r) = (Vec::new(), Vec::new());
        for c in &report.cells {
            let key = (c.lat.to_bits(), c.lon.to_bits());
            if let Some(rs) = ref_scores.get(&key) {
                m.push(model_scores[&key]);
                r.push(*rs);
            }
        }
        let skill = skill_vs_reference(&m, &r)?;
        let bytes = csv_bytes(&["lat", "lon", "pc", "pc_ref", "skill"], |w| {
            for s in &skill {
                w.write_record([
                    s.lat.to_string(),
                    s.lon.to_string(),
                    s.score.to_string(),
                    s.reference.to_string(),
                    s.skill.to_string(),
                ])?;
            }
            Ok(())
        });
        let skill_path = args
            .skill_out
            .clone()
            .unwrap_or_else(|| args.out.with_extension("skill.csv"));
        write_file(&skill_path, &bytes)?;
    }
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let a = FlatGrid::read(&args.model_a)?;
    let b = FlatGrid::read(&args.model_b)?;
    let truth = FlatGrid::read(&args.truth)?;
    let cells = gridpoint_p_values(
        &a.field,
        &b.field,
        &truth.field,
        args.lead_days,
        args.permutations,
        args.seed,
    )?;

    let bytes = csv_bytes(&["lat", "lon", "n_used", "pc_a", "pc_b", "p"], |w| {
        for c in &cells {
            w.write_record([
                c.lat.to_string(),
                c.lon.to_string(),
                c.n_used.to_string(),
                c.pc_a.to_string(),
                c.pc_b.to_string(),
                c.p_value.to_string(),
            ])?;
        }
        Ok(())
    });
    write_file(&args.out, &bytes)?;

    let p: Vec<f64> = cells.iter().map(|c| c.p_value).collect();
    let summary = box_summary(&p).ok_or_else(|| {
        CliError::Validation("no cell has enough complete data for a test".into())
    })?;
    let (la, lb) = (file_label(&args.model_a), file_label(&args.model_b));
    let header = [
        "model_a",
        "model_b",
        "lead_days",
        "n_cells",
        "min",
        "q1",
        "median",
        "q3",
        "max",
    ];
    let bytes = csv_bytes(&header, |w| {
        w.write_record([
            la.clone(),
            lb.clone(),
            args.lead_days.to_string(),
            summary.n.to_string(),
            summary.min.to_string(),
            summary.q1.to_string(),
            summary.median.to_string(),
            summary.q3.to_string(),
            summary.max.to_string(),
        ])
    });
    let summary_path = args
        .summary
        .clone()
        .unwrap_or_else(|| args.out.with_extension("summary.csv"));
    write_file(&summary_path, &bytes)?;

    writeln!(
        stdout,
        "{la} vs {lb}, lead {} d, {} cells: p min {} q1 {} median {} q3 {} max {}",
        args.lead_days, summary.n, summary.min, summary.q1, summary.median, summary.q3, summary.max
    )
    .map_err(stdout_err)?;
    Ok(())
}

fn aligned_table(table: &MetricTable, config: &SimConfig) -> String {
    let mut s = String::new();
    s.push_str(&format!("# rng: {RNG_DESCRIPTION}\n"));
    s.push_str(&format!(
        "# seed: {}  n: {}  outcome: {}\n",
        config.seed,
        config.n,
        if config.squared_outcome { "y^2" } else { "y" }
    ));
    let ql = format!("QL_{}", table.alpha);
    s.push_str(&format!(
        "{:<14}{:>10}{:>10}{:>10}{:>10}{:>8}{:>8}{:>8}\n",
        "model", "RMSE", "MAE", ql, "PC", "ACC", "CPA", "PCS"
    ));
    for r in &table.rows {
        s.push_str(&format!(
            "{:<14}{:>10.3}{:>10.3}{:>10.3}{:>10.3}{:>8.3}{:>8.3}{:>8.3}\n",
            r.model, r.rmse, r.mae, r.quantile_loss, r.pc, r.acc, r.cpa, r.pcs
        ));
    }
    s
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let config = SimConfig {
        n: args.n,
        seed: args.seed,
        squared_outcome: args.squared,
    };
    let table = run_study(&config)?;

    let ql = format!("ql_{}", table.alpha);
    let header = [
        "model",
        "rmse",
        "mae",
        ql.as_str(),
        "pc",
        "acc",
        "cpa",
        "pcs",
    ];
    let bytes = csv_bytes(&header, |w| {
        for r in &table.rows {
            w.write_record([
                r.model.clone(),
                r.rmse.to_string(),
                r.mae.to_string(),
                r.quantile_loss.to_string(),
                r.pc.to_string(),
                r.acc.to_string(),
                r.cpa.to_string(),
                r.pcs.to_string(),
            ])?;
        }
        Ok(())
    });
    write_file(&args.out, &bytes)?;

    let text = aligned_table(&table, &config);
    write_file(
        &args
            .text
            .clone()
            .unwrap_or_else(|| args.out.with_extension("txt")),
        text.as_bytes(),
    )?;
    stdout.write_all(text.as_bytes()).map_err(stdout_err)?;

    let categories: Vec<String> = table.rows.iter().map(|r| r.model.clone()).collect();
    let column = |name: &str, get: fn(&pcrps_core::metrics::MetricRow) -> f64| Panel {
        title: name.to_string(),
        values: table.rows.iter().map(get).collect(),
    };
    let panels = vec![
        column("RMSE", |r| r.rmse),
        column("MAE", |r| r.mae),
        column(&format!("QL {}", table.alpha), |r| r.quantile_loss),
        column("PC", |r| r.pc),
        column("ACC", |r| r.acc),
        column("CPA", |r| r.cpa),
        column("PCS", |r| r.pcs),
    ];
    let title = format!(
        "Simulation study, n = {}, seed {}, outcome {}",
        config.n,
        config.seed,
        if config.squared_outcome { "y^2" } else { "y" }
    );
    let svg = strip_chart(&title, &categories, &panels);
    write_file(
        &args
            .svg
            .clone()
            .unwrap_or_else(|| args.out.with_extension("svg")),
        svg.as_bytes(),
    )?;
    Ok(())
}
