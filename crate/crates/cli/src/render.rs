use anyhow::Result;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// A value; `mark` is appended in Markdown and kept in its own CSV column.
    Num {
        value: f64,
        mark: String,
    },
    Count(u64),
    /// Structurally impossible or undefined; rendered `--`.
    Absent(String),
}

impl Cell {
    pub fn num(value: f64) -> Cell {
        Cell::Num {
            value,
            mark: String::new(),
        }
    }

    pub fn marked(value: f64, mark: impl Into<String>) -> Cell {
        Cell::Num {
            value,
            mark: mark.into(),
        }
    }

    pub fn absent(why: impl Into<String>) -> Cell {
        Cell::Absent(why.into())
    }

    pub fn opt(value: Option<f64>, why: &str) -> Cell {
        value.map(Cell::num).unwrap_or_else(|| Cell::absent(why))
    }

    fn markdown(&self) -> String {
        match self {
            Cell::Num { value, mark } => format!("{value:.2}{mark}"),
            Cell::Count(n) => n.to_string(),
            Cell::Absent(_) => "--".into(),
        }
    }

    fn csv(&self) -> (String, String) {
        match self {
            Cell::Num { value, mark } => (value.to_string(), mark.clone()),
            Cell::Count(n) => (n.to_string(), String::new()),
            Cell::Absent(why) => (String::new(), why.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    /// Header of the row-label column, often empty.
    pub corner: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Cell>)>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: Vec<String>) -> Table {
        Table {
            title: title.into(),
            corner: String::new(),
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn row(&mut self, label: impl Into<String>, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push((label.into(), cells));
    }

    pub fn markdown(&self) -> String {
        let mut out = format!("### {}\n\n| {} |", self.title, self.corner);
        for c in &self.columns {
            out.push_str(&format!(" {c} |"));
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(self.columns.len()));
        out.push('\n');
        for (label, cells) in &self.rows {
            out.push_str(&format!("| {label} |"));
            for c in cells {
                out.push_str(&format!(" {} |", c.markdown()));
            }
            out.push('\n');
        }
        for n in &self.notes {
            out.push_str(&format!("\n{n}\n"));
        }
        out
    }
}

pub fn markdown(tables: &[Table]) -> String {
    tables
        .iter()
        .map(Table::markdown)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Long-format CSV: one record per cell.
pub fn csv(tables: &[Table]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["table", "row", "column", "value", "note"])?;
    for t in tables {
        for (label, cells) in &t.rows {
            for (col, cell) in t.columns.iter().zip(cells) {
                let (value, note) = cell.csv();
                w.write_record([t.title.as_str(), label, col, &value, &note])?;
            }
        }
    }
    Ok(w.into_inner()?)
}
