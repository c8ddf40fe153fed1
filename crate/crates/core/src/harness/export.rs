//! CSV and SVG output, and reading results back for `report`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::runner::{mean_trajectory, summarize, Experiment, RegretTrajectory, ReplicationFailure, ResultTable};
use super::scenario::ScenarioConfig;
use crate::error::{Error, Result};
use crate::policies::PolicyKind;

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const DRIFT_FILE: &str = "drift.csv";
pub const FAILURES_FILE: &str = "failures.csv";
pub const RUN_FILE: &str = "scenarios.json";

/// What `scenarios.json` records about each scenario of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub master_seed: u64,
    pub seeds: usize,
    pub policies: Vec<PolicyKind>,
    pub scenario: ScenarioConfig,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn write_results_csv<W: Write>(trajectories: &[RegretTrajectory], mut out: W) -> std::io::Result<()> {
    writeln!(out, "scenario,policy,seed,t,cum_regret")?;
    for tr in trajectories {
        for (i, r) in tr.cumulative.iter().enumerate() {
            writeln!(out, "{},{},{},{},{}", tr.scenario, tr.policy, tr.seed, i + 1, r)?;
        }
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(table: &ResultTable, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "scenario,policy,seed,t,cum_regret,std_error,seeds,relative_regret_pct,slope,slope_se"
    )?;
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.policy,
            r.seed.map_or_else(|| "mean".to_owned(), |s| s.to_string()),
            r.t,
            opt(r.cum_regret),
            opt(r.std_error),
            r.seeds,
            opt(r.relative_regret_pct),
            opt(r.slope),
            opt(r.slope_se),
        )?;
    }
    Ok(())
}

/// One row per (scenario, seed); the environment is shared across policies.
pub fn write_drift_csv<W: Write>(trajectories: &[RegretTrajectory], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "scenario,seed,beta_variation,mu_variation,rho_variation,sqrt_weighted,sqrt_weighted_over_sqrt_t,rho_clamps"
    )?;
    let mut seen = BTreeMap::new();
    for tr in trajectories {
        seen.entry((tr.scenario.as_str(), tr.seed)).or_insert(tr);
    }
    for ((scenario, seed), tr) in seen {
        let d = &tr.drift;
        let root_t = (tr.horizon() as f64).sqrt();
        writeln!(
            out,
            "{scenario},{seed},{},{},{},{},{},{}",
            d.beta,
            d.mu,
            d.rho,
            d.sqrt_weighted,
            d.sqrt_weighted / root_t,
            d.rho_clamps
        )?;
    }
    Ok(())
}

pub fn write_failures_csv<W: Write>(failures: &[ReplicationFailure], mut out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["scenario", "policy", "seed", "round", "segment", "message"])?;
    for f in failures {
        w.write_record([
            f.scenario.clone(),
            f.policy.to_string(),
            f.seed.to_string(),
            f.round.to_string(),
            f.segment.map(|s| s.to_string()).unwrap_or_default(),
            f.message.clone(),
        ])?;
    }
    w.flush()
}

fn write_file(path: &Path, fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    fill(&mut buf).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// File name of a scenario's plot.
pub fn plot_file(scenario: &str) -> String {
    let safe: String = scenario
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("regret_{safe}.svg")
}

/// Writes every artifact of one or more experiments into `dir`.
pub fn export_results(experiments: &[Experiment], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let trajectories: Vec<RegretTrajectory> = experiments
        .iter()
        .flat_map(|e| e.trajectories.iter().cloned())
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for e in experiments {
        rows.extend(e.table.rows.iter().cloned());
        failures.extend(e.table.failures.iter().cloned());
    }
    let table = ResultTable { rows, failures };
    let records: Vec<RunRecord> = experiments
        .iter()
        .map(|e| {
            let mut policies: Vec<PolicyKind> = e.table.rows.iter().map(|r| r.policy).collect();
            policies.dedup();
            RunRecord {
                master_seed: e.master_seed,
                seeds: e.table.rows.iter().filter_map(|r| r.seed).max().map_or(0, |s| s + 1),
                policies,
                scenario: e.scenario.config.clone(),
            }
        })
        .collect();
    let json = serde_json::to_string_pretty(&records).expect("run records serialize");
    let path = dir.join(RUN_FILE);
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    write_file(&dir.join(RESULTS_FILE), |b| write_results_csv(&trajectories, b))?;
    write_file(&dir.join(DRIFT_FILE), |b| write_drift_csv(&trajectories, b))?;
    write_tables_and_plots(&table, &trajectories, dir)
}

fn write_tables_and_plots(table: &ResultTable, trajectories: &[RegretTrajectory], dir: &Path) -> Result<()> {
    write_file(&dir.join(SUMMARY_FILE), |b| write_summary_csv(table, b))?;
    write_file(&dir.join(FAILURES_FILE), |b| write_failures_csv(&table.failures, b))?;
    let mut scenarios: Vec<&str> = trajectories.iter().map(|t| t.scenario.as_str()).collect();
    scenarios.dedup();
    let mut overview = Vec::new();
    for name in &scenarios {
        let series: Vec<Series> = PolicyKind::ALL
            .iter()
            .filter_map(|&p| {
                mean_trajectory(trajectories.iter().filter(|t| t.scenario == *name && t.policy == p)).map(|values| {
                    Series {
                        label: p.to_string(),
                        color: policy_color(p).to_owned(),
                        values,
                    }
                })
            })
            .collect();
        if let Some(psgd) = series.iter().find(|s| s.label == PolicyKind::Psgd.as_str()) {
            overview.push(Series {
                label: (*name).to_owned(),
                color: PALETTE[overview.len() % PALETTE.len()].to_owned(),
                values: psgd.values.clone(),
            });
        }
        let svg = regret_svg(&format!("{name}: seed-averaged cumulative regret"), &series);
        let path = dir.join(plot_file(name));
        std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
    }
    if overview.len() > 1 {
        let svg = regret_svg("psgd regret by scenario", &overview);
        let path = dir.join("regret_overview.svg");
        std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Reads `results.csv` back into trajectories (cumulative regret only).
pub fn read_results_csv(path: &Path) -> Result<Vec<RegretTrajectory>> {
    let ctx = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr.headers().map_err(|e| Error::parse(&ctx, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["scenario", "policy", "seed", "t", "cum_regret"] {
        return Err(Error::parse(&ctx, "expected columns scenario,policy,seed,t,cum_regret"));
    }
    let mut out: Vec<RegretTrajectory> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(&ctx, e))?;
        let line = i + 2;
        let bad = |m: &str| Error::parse(&ctx, format!("line {line}: {m}"));
        let policy: PolicyKind = rec[1].parse().map_err(|_| bad("unknown policy"))?;
        let seed: usize = rec[2].parse().map_err(|_| bad("bad seed"))?;
        let t: usize = rec[3].parse().map_err(|_| bad("bad round"))?;
        let r: f64 = rec[4].parse().map_err(|_| bad("bad regret value"))?;
        let same = out
            .last()
            .is_some_and(|tr| tr.scenario == rec[0] && tr.policy == policy && tr.seed == seed);
        if !same {
            out.push(RegretTrajectory {
                scenario: rec[0].to_owned(),
                policy,
                seed,
                cumulative: Vec::new(),
                oracle_revenue: Vec::new(),
                diagnostics: Default::default(),
                drift: Default::default(),
            });
        }
        let tr = out.last_mut().expect("just pushed");
        if t != tr.cumulative.len() + 1 {
            return Err(bad("rounds must be consecutive from 1 within each trajectory"));
        }
        tr.cumulative.push(r);
    }
    Ok(out)
}

pub fn read_failures_csv(path: &Path) -> Result<Vec<ReplicationFailure>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let ctx = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(&ctx, e))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(&ctx, e))?;
        let num = |i: usize| rec[i].parse::<usize>().map_err(|e| Error::parse(&ctx, e));
        out.push(ReplicationFailure {
            scenario: rec[0].to_owned(),
            policy: rec[1].parse()?,
            seed: num(2)?,
            round: num(3)?,
            segment: if rec[4].is_empty() { None } else { Some(num(4)?) },
            message: rec[5].to_owned(),
            kind: None,
        });
    }
    Ok(out)
}

pub fn read_run_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
}

/// Rebuilds `summary.csv`, `failures.csv` and the plots from a run directory.
pub fn regenerate_report(dir: &Path) -> Result<ResultTable> {
    let trajectories = read_results_csv(&dir.join(RESULTS_FILE))?;
    let failures = read_failures_csv(&dir.join(FAILURES_FILE))?;
    let run_path = dir.join(RUN_FILE);
    let records = if run_path.exists() {
        read_run_records(&run_path)?
    } else {
        Vec::new()
    };
    let mut settings = BTreeMap::new();
    for r in &records {
        let checkpoints = r
            .scenario
            .checkpoints
            .iter()
            .copied()
            .filter(|&c| c <= r.scenario.horizon)
            .collect();
        settings.insert(r.scenario.name.clone(), (checkpoints, r.seeds, r.scenario.slope_window));
    }
    for tr in &trajectories {
        if !settings.contains_key(&tr.scenario) {
            log::warn!("{}: no run record, using the default checkpoint grid", tr.scenario);
            let checkpoints = super::scenario::TABLE_CHECKPOINTS
                .iter()
                .copied()
                .filter(|&c| c <= tr.horizon())
                .collect();
            settings.insert(tr.scenario.clone(), (checkpoints, 0, 0.5));
        }
    }
    let table = summarize(&trajectories, &failures, &settings);
    write_tables_and_plots(&table, &trajectories, dir)?;
    Ok(table)
}

// ---------------------------------------------------------------------------
// SVG

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn policy_color(p: PolicyKind) -> &'static str {
    match p {
        PolicyKind::Psgd => PALETTE[0],
        PolicyKind::Unshrunken => PALETTE[1],
        PolicyKind::Oracle => PALETTE[2],
    }
}

pub struct Series {
    pub label: String,
    pub color: String,
    pub values: Vec<f64>,
}

const PANEL_W: f64 = 440.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_T: f64 = 40.0;
const MAX_POINTS: usize = 400;

struct Panel {
    x0: f64,
    log: bool,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        let x = if self.log { x.log10() } else { x };
        self.x0 + MARGIN_L + (x - self.xr.0) / (self.xr.1 - self.xr.0) * PANEL_W
    }

    fn py(&self, y: f64) -> f64 {
        let y = if self.log { y.log10() } else { y };
        MARGIN_T + PANEL_H - (y - self.yr.0) / (self.yr.1 - self.yr.0) * PANEL_H
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e5 || v.abs() < 1e-2 {
        format!("{v:.0e}")
    } else if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let unit = raw / mag;
    let k = if unit <= 1.0 {
        1.0
    } else if unit <= 2.0 {
        2.0
    } else if unit <= 5.0 {
        5.0
    } else {
        10.0
    };
    k * mag
}

fn sample_indices(n: usize, log: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = if n <= MAX_POINTS {
        (0..n).collect()
    } else if log {
        let top = (n as f64).ln();
        (0..=MAX_POINTS)
            .map(|k| ((top * k as f64 / MAX_POINTS as f64).exp().round() as usize).clamp(1, n) - 1)
            .collect()
    } else {
        (0..=MAX_POINTS).map(|k| (k * (n - 1)) / MAX_POINTS).collect()
    };
    idx.dedup();
    idx
}

fn draw_panel(svg: &mut String, panel: &Panel, series: &[Series], title: &str) {
    let (left, top) = (panel.x0 + MARGIN_L, MARGIN_T);
    let _ = writeln!(
        svg,
        r##"<rect x="{left:.2}" y="{top:.2}" width="{PANEL_W:.2}" height="{PANEL_H:.2}" fill="none" stroke="#444"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{title}</text>"#,
        left + PANEL_W / 2.0,
        top - 8.0
    );
    let mut xt = Vec::new();
    let mut yt = Vec::new();
    if panel.log {
        for k in panel.xr.0.ceil() as i32..=panel.xr.1.floor() as i32 {
            xt.push(10f64.powi(k));
        }
        for k in panel.yr.0.ceil() as i32..=panel.yr.1.floor() as i32 {
            yt.push(10f64.powi(k));
        }
    } else {
        let step = nice_step(panel.xr.1 - panel.xr.0);
        let mut v = 0.0;
        while v <= panel.xr.1 + 1e-9 * step {
            xt.push(v);
            v += step;
        }
        let step = nice_step(panel.yr.1 - panel.yr.0);
        let mut v = 0.0;
        while v <= panel.yr.1 + 1e-9 * step {
            yt.push(v);
            v += step;
        }
    }
    for x in xt {
        let px = panel.px(x);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"##,
            top,
            top + PANEL_H,
            top + PANEL_H + 15.0,
            tick_label(x)
        );
    }
    for y in yt {
        let py = panel.py(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{left:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"##,
            left + PANEL_W,
            left - 5.0,
            py + 4.0,
            tick_label(y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">round t</text>"#,
        left + PANEL_W / 2.0,
        top + PANEL_H + 32.0
    );
    for s in series {
        let pts: Vec<String> = sample_indices(s.values.len(), panel.log)
            .into_iter()
            .filter(|&i| !panel.log || s.values[i] > 0.0)
            .map(|i| format!("{:.2},{:.2}", panel.px((i + 1) as f64), panel.py(s.values[i])))
            .collect();
        if pts.len() > 1 {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.6" points="{}"/>"#,
                s.color,
                pts.join(" ")
            );
        }
    }
}

/// Two panels of seed-averaged cumulative regret: linear axes and log-log axes.
pub fn regret_svg(title: &str, series: &[Series]) -> String {
    let horizon = series.iter().map(|s| s.values.len()).max().unwrap_or(1).max(2);
    let ymax = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let ymax = if ymax > 0.0 { ymax } else { 1.0 };
    let ymin_pos = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .filter(|v| *v > 0.0 && v.is_finite())
        .fold(f64::INFINITY, f64::min);
    let ymin_pos = if ymin_pos.is_finite() { ymin_pos } else { ymax / 10.0 };
    let width = 2.0 * (MARGIN_L + PANEL_W + 24.0);
    let height = MARGIN_T + PANEL_H + 50.0 + 18.0 * series.len() as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, "<title>{title}</title>");
    let lin = Panel {
        x0: 0.0,
        log: false,
        xr: (0.0, horizon as f64),
        yr: (0.0, ymax * 1.05),
    };
    draw_panel(&mut svg, &lin, series, title);
    let lo = ymin_pos.log10().floor();
    let hi = ymax.log10().ceil().max(lo + 1.0);
    let log = Panel {
        x0: MARGIN_L + PANEL_W + 24.0,
        log: true,
        xr: (0.0, (horizon as f64).log10()),
        yr: (lo, hi),
    };
    draw_panel(&mut svg, &log, series, "log-log");
    if let Some(first) = series.iter().find(|s| s.values.last().is_some_and(|v| *v > 0.0)) {
        // Reference line of slope 1/2 through the final point of the first series.
        let n = first.values.len() as f64;
        let end = first.values[first.values.len() - 1];
        let start_t = (n / 100.0).max(1.0);
        let start = end * (start_t / n).sqrt();
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="5,4"/>"##,
            log.px(start_t),
            log.py(start.max(10f64.powf(lo))),
            log.px(n),
            log.py(end)
        );
    }
    let legend_top = MARGIN_T + PANEL_H + 50.0;
    for (k, s) in series.iter().enumerate() {
        let y = legend_top + 18.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="3"/><text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            MARGIN_L,
            MARGIN_L + 24.0,
            s.color,
            MARGIN_L + 30.0,
            y + 4.0,
            s.label
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-size="11" fill="#666">dashed: slope 1/2</text>"##,
        log.x0 + MARGIN_L,
        legend_top + 4.0
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(seed: usize, values: &[f64]) -> RegretTrajectory {
        RegretTrajectory {
            scenario: "s".into(),
            policy: PolicyKind::Psgd,
            seed,
            cumulative: values.to_vec(),
            oracle_revenue: vec![1.0; values.len()],
            diagnostics: Default::default(),
            drift: Default::default(),
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        write_results_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "scenario,policy,seed,t,cum_regret\n");
        let mut buf = Vec::new();
        write_summary_csv(&ResultTable::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn one_trajectory_three_rows() {
        let mut buf = Vec::new();
        write_results_csv(&[traj(0, &[0.5, 1.0, 1.25])], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "s,psgd,0,3,1.25");
    }

    #[test]
    fn results_round_trip_and_report_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let trs = vec![
            traj(0, &[0.1, 0.30000000000000004, 1e-300, 7.0]),
            traj(1, &[1.0, 2.0, 3.0, 4.0]),
        ];
        write_file(&dir.path().join(RESULTS_FILE), |b| write_results_csv(&trs, b)).unwrap();
        let back = read_results_csv(&dir.path().join(RESULTS_FILE)).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].cumulative, trs[0].cumulative);

        regenerate_report(dir.path()).unwrap();
        let first = std::fs::read(dir.path().join(SUMMARY_FILE)).unwrap();
        let svg1 = std::fs::read(dir.path().join(plot_file("s"))).unwrap();
        regenerate_report(dir.path()).unwrap();
        assert_eq!(first, std::fs::read(dir.path().join(SUMMARY_FILE)).unwrap());
        assert_eq!(svg1, std::fs::read(dir.path().join(plot_file("s"))).unwrap());
    }

    #[test]
    fn malformed_results_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        std::fs::write(&p, "scenario,policy,seed,t,cum_regret\ns,psgd,0,2,1.0\n").unwrap();
        assert!(read_results_csv(&p).is_err());
        std::fs::write(&p, "a,b\n").unwrap();
        assert!(read_results_csv(&p).is_err());
        std::fs::write(&p, "scenario,policy,seed,t,cum_regret\ns,greedy,0,1,1.0\n").unwrap();
        assert!(read_results_csv(&p).is_err());
    }

    #[test]
    fn svg_is_well_formed() {
        let s = Series {
            label: "psgd".into(),
            color: "#000".into(),
            values: (1..=1000).map(|t| (t as f64).sqrt()).collect(),
        };
        let svg = regret_svg("t", &[s]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn plot_names_are_safe() {
        assert_eq!(plot_file("setup1-b0.5"), "regret_setup1-b0.5.svg");
        assert_eq!(plot_file("a/b c"), "regret_a_b_c.svg");
    }
}
