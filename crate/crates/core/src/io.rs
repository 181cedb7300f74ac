//! Flat-file outputs: CSV tables, the JSON run manifest and plot scripts.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    /// Undefined numeric value, written as `NaN`.
    Missing,
    Text(String),
    Flag(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Num(v) if v.is_nan() => "NaN".into(),
            Cell::Num(v) => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Missing => "NaN".into(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

/// Header plus rows; floats carry 17 significant digits.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Output files of one run, all prefixed by the config name.
#[derive(Debug, Clone)]
pub struct OutputSet {
    dir: PathBuf,
    name: String,
    written: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(dir: &Path, name: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            name: name.to_string(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}_{}", self.name, suffix))
    }

    pub fn table(&mut self, suffix: &str, table: &Table) -> Result<PathBuf> {
        let p = self.path(suffix);
        table.write(&p)?;
        self.written.push(p.clone());
        Ok(p)
    }

    pub fn json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<PathBuf> {
        let p = self.path(suffix);
        let mut f = File::create(&p)?;
        serde_json::to_writer_pretty(&mut f, value)?;
        writeln!(f)?;
        self.written.push(p.clone());
        Ok(p)
    }

    pub fn text(&mut self, suffix: &str, body: &str) -> Result<PathBuf> {
        let p = self.path(suffix);
        std::fs::write(&p, body)?;
        self.written.push(p.clone());
        Ok(p)
    }

    /// File names written so far, relative to the output directory.
    pub fn written(&self) -> Vec<String> {
        self.written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }
}

/// One panel of a generated plot script.
#[derive(Debug, Clone)]
pub struct PlotPanel {
    /// CSV file name in the output directory.
    pub csv: String,
    pub x: String,
    pub y: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
    /// Column whose distinct values split the rows into separate curves.
    pub group_by: Option<String>,
}

/// A standalone matplotlib script that redraws the panels from the CSVs
/// next to it and saves `<name>.png`.
pub fn plot_script(name: &str, panels: &[PlotPanel]) -> String {
    let mut s = String::new();
    s.push_str("import csv\nimport math\nimport os\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n");
    s.push_str("HERE = os.path.dirname(os.path.abspath(__file__))\n\n\n");
    s.push_str("def load(name):\n    with open(os.path.join(HERE, name), newline=\"\") as f:\n        return list(csv.DictReader(f))\n\n\n");
    s.push_str("def num(v):\n    try:\n        return float(v)\n    except ValueError:\n        return math.nan\n\n\n");
    s.push_str(&format!(
        "fig, axes = plt.subplots(1, {n}, figsize=(5 * {n}, 4), squeeze=False)\n",
        n = panels.len().max(1)
    ));
    for (i, p) in panels.iter().enumerate() {
        s.push_str(&format!("ax = axes[0][{i}]\nrows = load({:?})\n", p.csv));
        let ys = p.y.iter().map(|y| format!("{y:?}")).collect::<Vec<_>>().join(", ");
        match &p.group_by {
            Some(g) => s.push_str(&format!(
                "for key in sorted({{r[{g:?}] for r in rows}}):\n    sub = [r for r in rows if r[{g:?}] == key]\n    for y in [{ys}]:\n        ax.plot([num(r[{x:?}]) for r in sub], [num(r[y]) for r in sub], label=f\"{{y}} {{key}}\")\n",
                x = p.x
            )),
            None => s.push_str(&format!(
                "for y in [{ys}]:\n    ax.plot([num(r[{x:?}]) for r in rows], [num(r[y]) for r in rows], label=y)\n",
                x = p.x
            )),
        }
        if p.log_x {
            s.push_str("ax.set_xscale(\"log\")\n");
        }
        if p.log_y {
            s.push_str("ax.set_yscale(\"log\")\n");
        }
        s.push_str(&format!("ax.set_xlabel({:?})\nax.legend(fontsize=7)\n", p.x));
    }
    s.push_str(&format!(
        "fig.tight_layout()\nfig.savefig(os.path.join(HERE, {:?}), dpi=150)\n",
        format!("{name}.png")
    ));
    s
}
