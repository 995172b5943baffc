use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use super::{aggregate_regret, aggregate_savings, Algorithm, ExperimentOutput, GroupSummary, RegretRecord, SavingsRecord};
use crate::dataset::Target;
use crate::error::{Error, Result};

pub const REGRET_HEADER: [&str; 8] = ["workload", "algorithm", "target", "budget", "seed", "found", "fstar", "regret"];
pub const SAVINGS_HEADER: [&str; 9] = ["workload", "algorithm", "target", "budget", "N", "C_opt", "R_opt", "R_rand", "S"];

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn write_records<T: serde::Serialize>(records: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::io("flushing csv buffer", e.into_error()))
}

fn read_records<T: DeserializeOwned, R: Read>(reader: R, header: &[&str]) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Parse(format!("expected header `{}`, found `{}`", header.join(","), found.join(","))));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn read_regret_csv<R: Read>(reader: R) -> Result<Vec<RegretRecord>> {
    read_records(reader, &REGRET_HEADER)
}

pub fn read_savings_csv<R: Read>(reader: R) -> Result<Vec<SavingsRecord>> {
    read_records(reader, &SAVINGS_HEADER)
}

/// Writes `bytes` next to `path` and renames it into place, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Domain(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let ctx = |what: &str| format!("{what} {}", path.display());
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(ctx("creating temp file for"), e))?;
    f.write_all(bytes).map_err(|e| Error::io(ctx("writing"), e))?;
    f.sync_all().map_err(|e| Error::io(ctx("syncing"), e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(ctx("renaming into"), e))
}

/// Writes `regret.csv`, `savings.csv`, one `regret_<target>.svg` per target
/// and one `savings_<target>_b<budget>.svg` per (target, budget). Returns
/// the written paths.
pub fn emit_report(output: &ExperimentOutput, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if output.regret.is_empty() {
        return Err(Error::Domain("no regret records to report".into()));
    }
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut files: Vec<(PathBuf, Vec<u8>)> = vec![
        (dir.join("regret.csv"), write_records(&output.regret)?),
        (dir.join("savings.csv"), write_records(&output.savings)?),
    ];
    let regret = aggregate_regret(&output.regret)?;
    let savings = aggregate_savings(&output.savings)?;
    let targets: BTreeSet<Target> = output.regret.iter().map(|r| r.target).collect();
    for &t in &targets {
        files.push((dir.join(format!("regret_{t}.svg")), regret_svg(&regret, t).into_bytes()));
    }
    let groups: BTreeSet<(Target, usize)> = output.savings.iter().map(|s| (s.target, s.budget)).collect();
    for (t, b) in groups {
        files.push((dir.join(format!("savings_{t}_b{b}.svg")), savings_svg(&savings, t, b).into_bytes()));
    }
    for (path, bytes) in &files {
        write_atomic(path, bytes)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    s
}

struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Self { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn y_axis(s: &mut String, y: &Axis, label: &str) {
    let x0 = LEFT;
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{TOP}" x2="{x0}" y2="{}" stroke="black"/>"#, HEIGHT - BOTTOM);
    for i in 0..=4 {
        let v = y.lo + (y.hi - y.lo) * f64::from(i) / 4.0;
        let py = y.map(v);
        let _ = writeln!(s, r#"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.3}</text>"#, x0 - 7.0, py + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(label)
    );
}

fn legend(s: &mut String, i: usize, name: &str) {
    let x = WIDTH - RIGHT + 20.0;
    let y = TOP + 10.0 + 18.0 * i as f64;
    let color = PALETTE[i % PALETTE.len()];
    let _ = writeln!(s, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#, x + 20.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x + 26.0, y + 4.0, escape(name));
}

/// Mean regret against budget, one polyline per algorithm.
pub fn regret_svg(summaries: &[GroupSummary], target: Target) -> String {
    let rows: Vec<&GroupSummary> = summaries.iter().filter(|g| g.target == target).collect();
    let algorithms: BTreeSet<Algorithm> = rows.iter().map(|g| g.algorithm).collect();
    let budgets: BTreeSet<usize> = rows.iter().map(|g| g.budget).collect();
    let (bmin, bmax) = (
        budgets.first().copied().unwrap_or(0) as f64,
        budgets.last().copied().unwrap_or(0) as f64,
    );
    let ymax = rows.iter().map(|g| g.mean).fold(0.0, f64::max);
    let x = Axis::new(bmin, bmax, LEFT + 10.0, WIDTH - RIGHT - 10.0);
    let y = Axis::new(0.0, if ymax > 0.0 { ymax * 1.05 } else { 1.0 }, HEIGHT - BOTTOM, TOP);

    let mut s = svg_open(&format!("Mean regret vs budget ({target})"));
    y_axis(&mut s, &y, "mean regret");
    let base = HEIGHT - BOTTOM;
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#, WIDTH - RIGHT);
    for &b in &budgets {
        let px = x.map(b as f64);
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{base}" x2="{px:.2}" y2="{}" stroke="black"/>"#, base + 4.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{b}</text>"#, base + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">budget</text>"#, (LEFT + WIDTH - RIGHT) / 2.0, HEIGHT - 10.0);
    for (i, a) in algorithms.iter().enumerate() {
        let pts: Vec<String> = rows
            .iter()
            .filter(|g| g.algorithm == *a)
            .map(|g| format!("{:.2},{:.2}", x.map(g.budget as f64), y.map(g.mean)))
            .collect();
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        legend(&mut s, i, &a.to_string());
    }
    s.push_str("</svg>\n");
    s
}

/// Savings box plot for one (target, budget), one box per algorithm.
pub fn savings_svg(summaries: &[GroupSummary], target: Target, budget: usize) -> String {
    let rows: Vec<&GroupSummary> = summaries
        .iter()
        .filter(|g| g.target == target && g.budget == budget)
        .collect();
    let lo = rows.iter().map(|g| g.stats.whisker_low).fold(0.0, f64::min);
    let hi = rows.iter().map(|g| g.stats.whisker_high).fold(0.0, f64::max);
    let pad = 0.05 * (hi - lo).max(1e-9);
    let y = Axis::new(lo - pad, hi + pad, HEIGHT - BOTTOM, TOP);
    let mut s = svg_open(&format!("Savings ({target}, B={budget})"));
    y_axis(&mut s, &y, "savings S");
    let zero = y.map(0.0);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{zero:.2}" x2="{}" y2="{zero:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        WIDTH - RIGHT
    );
    let n = rows.len().max(1) as f64;
    let slot = (WIDTH - RIGHT - LEFT) / n;
    let half = (slot * 0.3).min(30.0);
    for (i, g) in rows.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let color = PALETTE[i % PALETTE.len()];
        let b = &g.stats;
        let (top, bottom) = (y.map(b.q75), y.map(b.q25));
        let _ = writeln!(s, r#"<g stroke="{color}" stroke-width="1.5">"#);
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{top:.2}"/><line x1="{cx:.2}" y1="{bottom:.2}" x2="{cx:.2}" y2="{:.2}"/>"#,
            y.map(b.whisker_high),
            y.map(b.whisker_low)
        );
        for w in [b.whisker_low, b.whisker_high] {
            let py = y.map(w);
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}"/>"#, cx - half / 2.0, cx + half / 2.0);
        }
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.25"/>"#,
            cx - half,
            2.0 * half,
            (bottom - top).max(0.0)
        );
        let pm = y.map(b.median);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{pm:.2}" x2="{:.2}" y2="{pm:.2}" stroke-width="3"/>"#, cx - half, cx + half);
        s.push_str("</g>\n");
        legend(&mut s, i, &g.algorithm.to_string());
    }
    s.push_str("</svg>\n");
    s
}

/// Plain-text table of mean regret: one row per (algorithm, target), one
/// column per budget.
pub fn summary_table(records: &[RegretRecord]) -> Result<String> {
    let groups = aggregate_regret(records)?;
    let budgets: BTreeSet<usize> = groups.iter().map(|g| g.budget).collect();
    let rows: BTreeSet<(Algorithm, Target)> = groups.iter().map(|g| (g.algorithm, g.target)).collect();
    let mut out = String::new();
    let _ = write!(out, "{:<22} {:<6}", "algorithm", "target");
    for b in &budgets {
        let _ = write!(out, " {:>9}", format!("B={b}"));
    }
    out.push('\n');
    for (a, t) in rows {
        let _ = write!(out, "{:<22} {:<6}", a.to_string(), t.as_str());
        for &b in &budgets {
            match groups.iter().find(|g| g.algorithm == a && g.target == t && g.budget == b) {
                Some(g) => {
                    let _ = write!(out, " {:>9.4}", g.mean);
                }
                None => {
                    let _ = write!(out, " {:>9}", "-");
                }
            }
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbo::BboKind;
    use crate::experiment::box_stats;

    fn record(a: Algorithm, budget: usize, regret: f64) -> RegretRecord {
        RegretRecord {
            workload: "w0".into(),
            algorithm: a,
            target: Target::Cost,
            budget,
            seed: 1,
            found: 1.0 + regret,
            fstar: 1.0,
            regret,
        }
    }

    #[test]
    fn regret_chart_has_one_polyline_per_algorithm() {
        let algos = [Algorithm::Flattened(BboKind::RandomSearch), Algorithm::CloudBandit(BboKind::RbfOpt)];
        let mut records = Vec::new();
        for (i, &a) in algos.iter().enumerate() {
            for b in 1..=8 {
                records.push(record(a, 11 * b, 1.0 / (b + i) as f64));
            }
        }
        let svg = regret_svg(&aggregate_regret(&records).unwrap(), Target::Cost);
        assert_eq!(svg.matches("<polyline").count(), 2);
        for line in svg.lines().filter(|l| l.starts_with("<polyline")) {
            let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
            assert_eq!(pts.split(' ').count(), 8);
        }
        assert!(!svg.contains("href"));
    }

    #[test]
    fn csv_round_trip_and_header() {
        let records = vec![record(Algorithm::CloudBandit(BboKind::CherryPickBo), 33, 0.125)];
        let bytes = write_records(&records).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), REGRET_HEADER.join(","));
        assert_eq!(read_regret_csv(bytes.as_slice()).unwrap(), records);
        assert!(read_savings_csv(bytes.as_slice()).is_err());
        let s = SavingsRecord {
            workload: "w".into(),
            algorithm: Algorithm::LinearPredictor,
            target: Target::Time,
            budget: 33,
            n: 64,
            c_opt: 1.5,
            r_opt: 0.25,
            r_rand: 0.5,
            s: 0.0,
        };
        let bytes = write_records(std::slice::from_ref(&s)).unwrap();
        assert_eq!(String::from_utf8_lossy(&bytes).lines().next().unwrap(), SAVINGS_HEADER.join(","));
        assert_eq!(read_savings_csv(bytes.as_slice()).unwrap(), vec![s]);
    }

    #[test]
    fn box_chart_structure() {
        let stats = box_stats(&[-0.2, 0.1, 0.3, 0.4]).unwrap();
        let g = GroupSummary {
            algorithm: Algorithm::Flattened(BboKind::Exhaustive),
            target: Target::Time,
            budget: 33,
            count: 4,
            mean: 0.15,
            stats,
        };
        let svg = savings_svg(&[g.clone(), GroupSummary { algorithm: Algorithm::LinearPredictor, ..g }], Target::Time, 33);
        assert_eq!(svg.matches("<rect").count(), 3);
        assert!(svg.contains("exhaustive") && svg.contains("linear-pred"));
    }

    #[test]
    fn empty_report_rejected() {
        let dir = std::env::temp_dir().join("mcopt-empty-report");
        assert!(matches!(emit_report(&ExperimentOutput::default(), &dir), Err(Error::Domain(_))));
    }

    #[test]
    fn summary_lists_budgets() {
        let a = Algorithm::Flattened(BboKind::RandomSearch);
        let table = summary_table(&[record(a, 11, 0.5), record(a, 22, 0.25)]).unwrap();
        assert!(table.contains("B=11") && table.contains("B=22"));
        assert!(table.contains("0.5000") && table.contains("0.2500"));
    }
}
