//! CSV tables, plot data and the run summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bundlelab::suites::{Status, TheoremReport, Verdict, Witness};

use crate::CliError;

/// Fields never contain commas or line breaks, so no quoting is needed.
pub fn field(s: &str) -> String {
    s.replace(',', ";").replace(['\n', '\r'], " ")
}

/// Shortest representation that round-trips.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn vector(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

#[derive(Clone, Debug)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row.into_iter().map(|f| field(&f)).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// The output directory, created on demand; records every file written.
pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Two bare columns, `ε δ`, one point per line.
pub fn plot_data(epsilons: &[f64], deltas: &[f64]) -> String {
    epsilons
        .iter()
        .zip(deltas)
        .map(|(e, d)| format!("{} {}\n", num(*e), num(*d)))
        .collect()
}

/// Keeps file names portable.
pub fn file_stem(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    let s = s.trim_matches('_').to_string();
    if s.is_empty() {
        "curve".into()
    } else {
        s
    }
}

pub const SUITE_HEADER: &[&str] = &[
    "suite", "instance", "digest", "seed", "check", "params", "value", "bound", "status", "expected",
];

/// Rows of one suite report. An expected failure shows as `FAIL` with
/// `expected=FAIL`, so a reader never mistakes it for a pass.
pub fn suite_table(report: &TheoremReport) -> Table {
    let mut t = Table::new(SUITE_HEADER);
    for r in &report.rows {
        let (status, expected) = match r.status {
            Status::ExpectedFail => ("FAIL", "FAIL"),
            Status::Fail => ("FAIL", "PASS"),
            Status::Pass => ("PASS", "PASS"),
            s => (s.name(), ""),
        };
        t.push(vec![
            report.suite.clone(),
            r.instance.to_string(),
            r.digest.clone(),
            report.seed.to_string(),
            r.check.clone(),
            r.params.clone(),
            num(r.value),
            num(r.bound),
            status.into(),
            expected.into(),
        ]);
    }
    t
}

pub const WITNESS_HEADER: &[&str] = &["suite", "instance", "digest", "seed", "check", "data"];

pub fn witness_rows(t: &mut Table, report: &TheoremReport, witnesses: &[Witness]) {
    for w in witnesses {
        t.push(vec![
            report.suite.clone(),
            w.instance.to_string(),
            w.digest.clone(),
            report.seed.to_string(),
            w.check.clone(),
            w.data.clone(),
        ]);
    }
}

/// The markdown summary. The timestamp appears only in the header line, so
/// everything below it is reproducible.
pub fn summary(
    timestamp: &str,
    command: &str,
    config_digest: &str,
    seed: u64,
    reports: &[TheoremReport],
    passed: bool,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# bundlelab {command}, {timestamp}");
    let _ = writeln!(s);
    let _ = writeln!(s, "- config digest: `{config_digest}`");
    let _ = writeln!(s, "- seed: {seed}");
    let _ = writeln!(s, "- verdict: **{}**", if passed { "PASS" } else { "FAIL" });
    if reports.is_empty() {
        return s;
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "| suite | instances | digest | pass | fail | expected fail | excluded | info | verdict |");
    let _ = writeln!(s, "|---|---|---|---|---|---|---|---|---|");
    for r in reports {
        let _ = writeln!(
            s,
            "| {} | {} | `{}` | {} | {} | {} | {} | {} | {} |",
            r.suite,
            r.instances,
            r.digest,
            r.count(Status::Pass),
            r.count(Status::Fail),
            r.count(Status::ExpectedFail),
            r.count(Status::Excluded),
            r.count(Status::Info),
            verdict(r),
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "## Coverage");
    let _ = writeln!(s);
    let _ = writeln!(s, "| tag | suite | verdict |");
    let _ = writeln!(s, "|---|---|---|");
    for r in reports {
        for tag in &r.tags {
            let _ = writeln!(s, "| {tag} | {} | {} |", r.suite, verdict(r));
        }
    }
    let notes: Vec<(&str, &String)> = reports
        .iter()
        .flat_map(|r| r.notes.iter().map(move |n| (r.suite.as_str(), n)))
        .collect();
    if !notes.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "## Notes");
        let _ = writeln!(s);
        for (suite, n) in notes {
            let _ = writeln!(s, "- {suite}: {n}");
        }
    }
    s
}

fn verdict(r: &TheoremReport) -> &'static str {
    match (r.verdict, r.vacuous) {
        (Verdict::Fail, _) => "FAIL",
        (Verdict::Pass, true) => "PASS (vacuous)",
        (Verdict::Pass, false) => "PASS",
    }
}

/// Drops the header line, which holds the only non-reproducible content.
pub fn summary_body(summary: &str) -> &str {
    summary.split_once('\n').map_or("", |(_, rest)| rest)
}
