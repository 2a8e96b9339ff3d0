//! Table discovery by keyword and cell addressing by position or header.

use serde::Serialize;

use crate::engine::text::{tier_of, MatchTier, Needle};
use crate::snapshot::{normalize_text, Element, PageSnapshot};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("no table matches {keyword:?}")]
    NotFound { keyword: String },
    #[error("element {0:?} is not a table")]
    NotATable(String),
    #[error("row index {row} out of range (table has {rows} data rows)")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("column index {col} out of range (table has {cols} columns)")]
    ColumnOutOfRange { col: usize, cols: usize },
    #[error("no header matches {header:?}; available headers: {}", available.join(", "))]
    HeaderNotFound {
        header: String,
        available: Vec<String>,
    },
    #[error("header {header:?} appears in more than one column")]
    DuplicateHeader { header: String },
}

/// One grid slot. Padding slots of ragged tables have no element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<'a> {
    pub row: usize,
    pub col: usize,
    pub element: Option<&'a Element>,
}

impl<'a> Cell<'a> {
    pub fn text(&self) -> &'a str {
        self.element.map_or("", |e| e.visible_text.as_str())
    }

    pub fn id(&self) -> Option<&'a str> {
        self.element.map(|e| e.id.as_str())
    }
}

type Grid = Vec<Vec<Option<usize>>>;

/// Rectangular view of a `table` element. The header row is excluded from
/// row numbering.
#[derive(Debug, Clone)]
pub struct TableModel<'a> {
    snapshot: &'a PageSnapshot,
    table: usize,
    header_row: Vec<Option<usize>>,
    headers: Vec<String>,
    rows: Grid,
    cols: usize,
}

#[derive(Serialize)]
struct CellDoc<'a> {
    id: &'a str,
    text: &'a str,
}

#[derive(Serialize)]
struct TableDoc<'a> {
    table: &'a str,
    headers: &'a [String],
    rows: Vec<Vec<Option<CellDoc<'a>>>>,
}

impl<'a> TableModel<'a> {
    /// Builds the model of the table element at `idx`.
    pub fn from_element(snapshot: &'a PageSnapshot, idx: usize) -> Result<Self, TableError> {
        let table_el = snapshot.element(idx);
        if table_el.tag != "table" {
            return Err(TableError::NotATable(table_el.id.clone()));
        }
        let trs = own_rows(snapshot, idx);
        let mut grid = expand_spans(snapshot, &trs);
        let cols = grid.iter().map(Vec::len).max().unwrap_or(0);
        for row in &mut grid {
            row.resize(cols, None);
        }
        let header_at = trs
            .iter()
            .position(|&tr| {
                let cells = cells_of(snapshot, tr);
                !cells.is_empty() && cells.iter().all(|&c| snapshot.element(c).tag == "th")
            })
            .or(if grid.is_empty() { None } else { Some(0) });
        let header_row = match header_at {
            Some(h) => grid.remove(h),
            None => vec![None; cols],
        };
        let headers = header_row
            .iter()
            .map(|c| {
                c.map_or(String::new(), |i| {
                    normalize_text(&snapshot.element(i).visible_text)
                })
            })
            .collect();
        Ok(TableModel {
            snapshot,
            table: idx,
            header_row,
            headers,
            rows: grid,
            cols,
        })
    }

    pub fn table_element(&self) -> &'a Element {
        self.snapshot.element(self.table)
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    pub fn cell(&self, row: usize, col: usize) -> Result<Cell<'a>, TableError> {
        if row >= self.rows.len() {
            return Err(TableError::RowOutOfRange {
                row,
                rows: self.rows.len(),
            });
        }
        if col >= self.cols {
            return Err(TableError::ColumnOutOfRange {
                col,
                cols: self.cols,
            });
        }
        Ok(Cell {
            row,
            col,
            element: self.rows[row][col].map(|i| self.snapshot.element(i)),
        })
    }

    /// Resolves a header by best text tier, ties going to the leftmost
    /// column.
    pub fn column_of(&self, header: &str) -> Result<usize, TableError> {
        let needle = Needle::new(header);
        let mut best: Option<(MatchTier, usize)> = None;
        for (c, h) in self.headers.iter().enumerate() {
            let t = needle.tier(h);
            if t.is_match() && best.is_none_or(|(bt, _)| t > bt) {
                best = Some((t, c));
            }
        }
        let Some((_, col)) = best else {
            return Err(TableError::HeaderNotFound {
                header: header.to_owned(),
                available: self
                    .headers
                    .iter()
                    .filter(|h| !h.is_empty())
                    .cloned()
                    .collect(),
            });
        };
        let folded = self.headers[col].to_lowercase();
        let clash = self.headers.iter().enumerate().any(|(c, h)| {
            c != col && h.to_lowercase() == folded && self.header_row[c] != self.header_row[col]
        });
        if clash {
            return Err(TableError::DuplicateHeader {
                header: self.headers[col].clone(),
            });
        }
        Ok(col)
    }

    pub fn cell_by_header(&self, row: usize, header: &str) -> Result<Cell<'a>, TableError> {
        let col = self.column_of(header)?;
        self.cell(row, col)
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<Cell<'a>>> + '_ {
        (0..self.rows.len()).map(move |r| {
            (0..self.cols)
                .map(|c| self.cell(r, c).expect("in range"))
                .collect()
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = TableDoc {
            table: &self.table_element().id,
            headers: &self.headers,
            rows: self
                .rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|c| {
                            c.map(|i| {
                                let e = self.snapshot.element(i);
                                CellDoc {
                                    id: &e.id,
                                    text: &e.visible_text,
                                }
                            })
                        })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("table documents serialize")
    }
}

/// `tr` elements belonging to this table and not to a nested one.
fn own_rows(snapshot: &PageSnapshot, table: usize) -> Vec<usize> {
    snapshot
        .descendants(table)
        .into_iter()
        .filter(|&i| snapshot.element(i).tag == "tr")
        .filter(|&i| {
            snapshot
                .ancestors(i)
                .find(|&a| snapshot.element(a).tag == "table")
                == Some(table)
        })
        .collect()
}

fn cells_of(snapshot: &PageSnapshot, tr: usize) -> Vec<usize> {
    snapshot
        .children_of(tr)
        .iter()
        .copied()
        .filter(|&c| matches!(snapshot.element(c).tag.as_str(), "td" | "th"))
        .collect()
}

fn span(el: &Element, attr: &str) -> usize {
    el.attr(attr)
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(1)
        .clamp(1, 1000)
}

/// Places cells into a grid, replicating spanned cells into every slot they
/// cover.
fn expand_spans(snapshot: &PageSnapshot, trs: &[usize]) -> Grid {
    let mut grid: Grid = vec![Vec::new(); trs.len()];
    for (r, &tr) in trs.iter().enumerate() {
        let mut col = 0;
        for c in cells_of(snapshot, tr) {
            while grid[r].get(col).is_some_and(Option::is_some) {
                col += 1;
            }
            let el = snapshot.element(c);
            let (cs, rs) = (span(el, "colspan"), span(el, "rowspan"));
            let last = (r + rs).min(trs.len());
            for row in &mut grid[r..last] {
                if row.len() < col + cs {
                    row.resize(col + cs, None);
                }
                for slot in &mut row[col..col + cs] {
                    *slot = Some(c);
                }
            }
            col += cs;
        }
    }
    grid
}

/// Finds the table whose visible text best matches `keyword`, ties going to
/// the earlier table.
pub fn get_table<'a>(
    snapshot: &'a PageSnapshot,
    keyword: &str,
) -> Result<TableModel<'a>, TableError> {
    let mut best: Option<(MatchTier, usize)> = None;
    for (i, el) in snapshot.elements().iter().enumerate() {
        if el.tag != "table" {
            continue;
        }
        let t = tier_of(&el.visible_text, keyword);
        if t.is_match() && best.is_none_or(|(bt, _)| t > bt) {
            best = Some((t, i));
        }
    }
    let (_, idx) = best.ok_or_else(|| TableError::NotFound {
        keyword: keyword.to_owned(),
    })?;
    TableModel::from_element(snapshot, idx)
}
