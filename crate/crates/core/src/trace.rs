//! CSV trace files: `# key = value` header lines, a column row, one row per round.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::algorithms::{run_experiment, RoundRecord, RunOutput, RunSpec};
use crate::config::{ExperimentConfig, LossKind, MirrorKind};
use crate::exec::Executor;
use crate::losses::LossStream;
use crate::{Error, Result};

pub const COLUMNS: [&str; 13] = [
    "t",
    "K_t",
    "sigma2",
    "global_loss_y",
    "global_loss_x",
    "cum_regret_y",
    "cum_regret_x",
    "C_t",
    "max_disagreement",
    "delta_norm",
    "delta_small_norm",
    "lemma1_slack",
    "xbar_to_opt",
];

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Realized constants and flags that accompany the config echo.
pub fn run_facts(spec: &RunSpec, stream: &dyn LossStream, out: &RunOutput) -> Vec<(String, String)> {
    let c = out.constants;
    let mut facts = vec![
        ("stream".to_string(), stream.kind().to_string()),
        ("realized_dim".to_string(), stream.dim().to_string()),
        ("lambda_realized".to_string(), fmt_f64(c.lambda)),
        ("beta".to_string(), fmt_f64(c.beta)),
        ("G".to_string(), fmt_f64(c.g)),
        ("R".to_string(), fmt_f64(out.radius)),
        ("mu".to_string(), fmt_f64(spec.map.mu())),
        ("mu_prime".to_string(), fmt_f64(spec.map.mu_prime())),
        ("rho".to_string(), fmt_f64(out.rho)),
        ("initial_gap".to_string(), fmt_opt(out.initial_gap)),
        ("C_T".to_string(), fmt_opt(out.path_length)),
        ("regret_bound".to_string(), fmt_opt(out.regret_bound)),
        ("step_size_in_window".to_string(), out.step_size_ok.to_string()),
        ("lambda_positive".to_string(), (c.lambda > 0.0).to_string()),
        ("gradient_scale".to_string(), "average".to_string()),
        ("bound_regret_series".to_string(), "y".to_string()),
    ];
    facts.extend(stream.report());
    facts
}

pub fn render(header: &[(String, String)], rows: &[RoundRecord]) -> String {
    let mut text = String::new();
    for (k, v) in header {
        let _ = writeln!(text, "# {k} = {v}");
    }
    text.push_str(&COLUMNS.join(","));
    text.push('\n');
    for r in rows {
        let d = r.diagnostics.as_ref();
        let cells = [
            r.t.to_string(),
            r.k.to_string(),
            fmt_f64(r.sigma2),
            fmt_f64(r.loss_y),
            fmt_f64(r.loss_x),
            fmt_opt(d.map(|d| d.cumulative_regret_y)),
            fmt_opt(d.map(|d| d.cumulative_regret_x)),
            fmt_opt(d.map(|d| d.path_length_so_far)),
            fmt_opt(d.map(|d| d.max_disagreement)),
            fmt_opt(d.map(|d| d.delta_norm)),
            fmt_opt(d.map(|d| d.delta_small_norm)),
            fmt_opt(d.map(|d| d.lemma1_slack)),
            fmt_opt(d.map(|d| d.xbar_to_opt)),
        ];
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    text
}

/// Result of [`execute`].
pub struct Executed {
    pub path: PathBuf,
    pub spec: RunSpec,
    pub output: RunOutput,
    pub header: Vec<(String, String)>,
}

/// Builds everything from the config, runs it and writes
/// `out_dir/run_name.csv`. On failure no trace file is left behind.
pub fn execute(config: &ExperimentConfig, exec: &Executor) -> Result<Executed> {
    let path = config.out_dir.join(format!("{}.csv", config.run_name));
    let result = run_and_write(config, exec, &path);
    if result.is_err() {
        let _ = std::fs::remove_file(&path);
    }
    result
}

fn run_and_write(config: &ExperimentConfig, exec: &Executor, path: &Path) -> Result<Executed> {
    let stream = config.build_stream()?;
    let schedule = config.build_schedule()?;
    let spec = config.run_spec(stream.dim())?;
    let output = run_experiment(&spec, stream.as_ref(), &schedule, exec)?;

    let mut header = config.entries();
    header.extend(run_facts(&spec, stream.as_ref(), &output));
    if config.mirror == MirrorKind::Entropy && config.loss != LossKind::Quadratic {
        header.push(("note".into(), "regression loss restricted to the simplex".into()));
    }
    let text = render(&header, &output.rows);

    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let partial = path.with_extension("csv.partial");
    let written = std::fs::write(&partial, text).and_then(|_| std::fs::rename(&partial, path));
    if let Err(e) = written {
        let _ = std::fs::remove_file(&partial);
        return Err(Error::io(path, e));
    }
    Ok(Executed {
        path: path.to_path_buf(),
        spec,
        output,
        header,
    })
}

/// A parsed trace file. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl TraceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut header = Vec::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let bad = |message: String| Error::Parse { line: line_no, message };
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| bad("header line without '='".into()))?;
                header.push((k.trim().to_string(), v.trim().to_string()));
                continue;
            }
            match &columns {
                None => columns = Some(line.split(',').map(str::to_string).collect()),
                Some(cols) => {
                    let cells: Vec<&str> = line.split(',').collect();
                    if cells.len() != cols.len() {
                        return Err(bad(format!("expected {} cells, got {}", cols.len(), cells.len())));
                    }
                    let row = cells
                        .iter()
                        .map(|c| {
                            if c.is_empty() {
                                Ok(None)
                            } else {
                                c.parse::<f64>().map(Some).map_err(|_| bad(format!("bad number '{c}'")))
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    rows.push(row);
                }
            }
        }
        Ok(Self {
            header,
            columns: columns.unwrap_or_default(),
            rows,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}
