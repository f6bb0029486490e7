//! Free-format MPS reading, an MPS writer, and the solution text format.
//!
//! The dialect notes that matter in practice:
//!
//! * whitespace-delimited tokens, `*` comments, blank lines ignored;
//! * the first `N` row is the objective, further `N` rows are free rows;
//! * duplicate `(column, row)` entries are summed;
//! * `RHS` on the objective row sets the negated objective constant;
//! * `RANGES` semantics: for an `L` row with range `r` the bounds become
//!   `[b - |r|, b]`, for `G` `[b, b + |r|]`, for `E` `[b, b + r]` when
//!   `r >= 0` and `[b + r, b]` otherwise;
//! * bound codes `UP LO FX FR MI PL` are supported; a negative `UP` bound
//!   with no earlier `LO` widens the lower bound to minus infinity (a
//!   widely used convention, stated here explicitly because dialects
//!   differ); `BV` and integrality markers are rejected;
//! * `OBJSENSE MAX`/`MAXIMIZE` selects maximization, absence means
//!   minimization.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::problem::{Bound, GeneralLP, Sense, Solution, Status};
use crate::scalar::Real;
use crate::sparse::CscMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MpsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown row name '{name}'")]
    UnknownRowName { line: usize, name: String },
    #[error("line {line}: unsupported: {what}")]
    Unsupported { line: usize, what: String },
}

fn syntax(line: usize, msg: impl Into<String>) -> MpsError {
    MpsError::Syntax {
        line,
        msg: msg.into(),
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RowType {
    Objective,
    Free,
    Equal,
    LessEq,
    GreaterEq,
}

/// Parsed MPS sections, before resolution into a [`GeneralLP`].
#[derive(Clone, Debug, Default)]
pub struct MpsDocument {
    pub name: String,
    pub maximize: bool,
    pub rows: Vec<(RowType, String)>,
    /// `(column, row, value)` with the objective row included.
    pub entries: Vec<(String, String, f64)>,
    pub rhs: Vec<(String, f64)>,
    pub ranges: Vec<(String, f64)>,
    /// `(code, column, value)`; value unused for FR/MI/PL.
    pub bounds: Vec<(String, String, f64)>,
}

#[derive(Copy, Clone, PartialEq, Eq)]
enum Section {
    Start,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

impl MpsDocument {
    /// Tokenizing pass over the section structure.
    pub fn parse(text: &str) -> Result<MpsDocument, MpsError> {
        let mut doc = MpsDocument::default();
        let mut section = Section::Start;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('*').next().unwrap_or("");
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            // section headers start in column one in fixed MPS; in free
            // format we recognize them by keyword
            let header = match tokens[0] {
                "NAME" => Some(Section::Name),
                "OBJSENSE" => Some(Section::ObjSense),
                "ROWS" => Some(Section::Rows),
                "COLUMNS" => Some(Section::Columns),
                "RHS" => Some(Section::Rhs),
                "RANGES" => Some(Section::Ranges),
                "BOUNDS" => Some(Section::Bounds),
                "ENDATA" => Some(Section::End),
                "OBJSENSE_MAX" => None,
                s if matches!(s, "SOS" | "RANGES2") => {
                    return Err(MpsError::Unsupported {
                        line: line_no,
                        what: format!("section {s}"),
                    })
                }
                _ => None,
            };
            if let Some(next) = header {
                section = next;
                match section {
                    Section::Name => {
                        if tokens.len() > 1 {
                            doc.name = tokens[1].to_string();
                        }
                    }
                    Section::ObjSense => {
                        if tokens.len() > 1 {
                            doc.maximize = parse_objsense(tokens[1], line_no)?;
                        }
                    }
                    Section::End => break,
                    _ => {}
                }
                continue;
            }
            match section {
                Section::ObjSense => {
                    doc.maximize = parse_objsense(tokens[0], line_no)?;
                }
                Section::Rows => {
                    if tokens.len() != 2 {
                        return Err(syntax(line_no, "expected '<type> <row name>'"));
                    }
                    let kind = match tokens[0] {
                        "N" => {
                            if doc.rows.iter().any(|(t, _)| *t == RowType::Objective) {
                                RowType::Free
                            } else {
                                RowType::Objective
                            }
                        }
                        "E" => RowType::Equal,
                        "L" => RowType::LessEq,
                        "G" => RowType::GreaterEq,
                        other => return Err(syntax(line_no, format!("unknown row type '{other}'"))),
                    };
                    doc.rows.push((kind, tokens[1].to_string()));
                }
                Section::Columns => {
                    if tokens.len() >= 3 && tokens[1].contains("MARKER") {
                        return Err(MpsError::Unsupported {
                            line: line_no,
                            what: "integrality markers (integer variables)".into(),
                        });
                    }
                    if tokens.len() < 3 || tokens.len() % 2 == 0 {
                        return Err(syntax(line_no, "expected '<col> (<row> <value>)+'"));
                    }
                    let col = tokens[0];
                    for pair in tokens[1..].chunks(2) {
                        let value = parse_number(pair[1], line_no)?;
                        doc.entries
                            .push((col.to_string(), pair[0].to_string(), value));
                    }
                }
                Section::Rhs | Section::Ranges => {
                    // an odd token count means the first token names the set
                    let pairs = if tokens.len() % 2 == 1 {
                        &tokens[1..]
                    } else {
                        &tokens[..]
                    };
                    if pairs.is_empty() {
                        return Err(syntax(line_no, "expected '<row> <value>' pairs"));
                    }
                    for pair in pairs.chunks(2) {
                        if pair.len() != 2 {
                            return Err(syntax(line_no, "dangling token in value pairs"));
                        }
                        let value = parse_number(pair[1], line_no)?;
                        let target = (pair[0].to_string(), value);
                        if section == Section::Rhs {
                            doc.rhs.push(target);
                        } else {
                            doc.ranges.push(target);
                        }
                    }
                }
                Section::Bounds => {
                    let code = tokens[0];
                    let needs_value = matches!(code, "UP" | "LO" | "FX");
                    let no_value = matches!(code, "FR" | "MI" | "PL" | "BV");
                    if !needs_value && !no_value {
                        return Err(syntax(line_no, format!("unknown bound code '{code}'")));
                    }
                    if code == "BV" {
                        return Err(MpsError::Unsupported {
                            line: line_no,
                            what: "binary bound BV (integer variables)".into(),
                        });
                    }
                    let (col, value) = match (needs_value, tokens.len()) {
                        (true, 4) => (tokens[2], parse_number(tokens[3], line_no)?),
                        (true, 3) => (tokens[1], parse_number(tokens[2], line_no)?),
                        (false, 3) => (tokens[2], 0.0),
                        (false, 2) => (tokens[1], 0.0),
                        _ => return Err(syntax(line_no, "malformed bound line")),
                    };
                    doc.bounds
                        .push((code.to_string(), col.to_string(), value));
                }
                Section::Start | Section::Name => {
                    return Err(syntax(line_no, "data before any section header"));
                }
                Section::End => unreachable!(),
            }
        }
        if !doc.rows.iter().any(|(t, _)| *t == RowType::Objective) {
            return Err(syntax(0, "no objective (N) row declared"));
        }
        Ok(doc)
    }

    /// Resolves names and assembles the in-memory problem.
    pub fn into_general_lp(self) -> Result<GeneralLP<f64>, MpsError> {
        let mut obj_name = String::new();
        let mut row_names = Vec::new();
        let mut row_types = Vec::new();
        for (kind, name) in &self.rows {
            if *kind == RowType::Objective {
                obj_name = name.clone();
            } else {
                row_names.push(name.clone());
                row_types.push(*kind);
            }
        }
        let row_index: HashMap<&str, usize> = row_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let m = row_names.len();

        let mut col_names: Vec<String> = Vec::new();
        let mut col_index: HashMap<String, usize> = HashMap::new();
        let mut triplets = Vec::new();
        let mut costs: Vec<f64> = Vec::new();
        for (col, row, value) in &self.entries {
            let j = *col_index.entry(col.clone()).or_insert_with(|| {
                col_names.push(col.clone());
                costs.push(0.0);
                col_names.len() - 1
            });
            if *row == obj_name {
                costs[j] += value;
            } else if let Some(&i) = row_index.get(row.as_str()) {
                triplets.push((i, j, *value));
            } else if self.rows.iter().any(|(t, n)| *t == RowType::Free && n == row) {
                // entry on a non-objective free row: no constraint
            } else {
                return Err(MpsError::UnknownRowName {
                    line: 0,
                    name: row.clone(),
                });
            }
        }
        let n = col_names.len();

        let mut rhs = vec![0.0f64; m];
        let mut c0 = 0.0f64;
        for (row, value) in &self.rhs {
            if *row == obj_name {
                // objective right-hand side is the negated constant
                c0 = -*value;
            } else if let Some(&i) = row_index.get(row.as_str()) {
                rhs[i] = *value;
            } else if self.rows.iter().any(|(t, nm)| *t == RowType::Free && nm == row) {
                // ignored
            } else {
                return Err(MpsError::UnknownRowName {
                    line: 0,
                    name: row.clone(),
                });
            }
        }

        let mut row_lb = vec![Bound::NegInf; m];
        let mut row_ub = vec![Bound::<f64>::PosInf; m];
        for i in 0..m {
            match row_types[i] {
                RowType::Equal => {
                    row_lb[i] = Bound::Finite(rhs[i]);
                    row_ub[i] = Bound::Finite(rhs[i]);
                }
                RowType::LessEq => row_ub[i] = Bound::Finite(rhs[i]),
                RowType::GreaterEq => row_lb[i] = Bound::Finite(rhs[i]),
                RowType::Objective | RowType::Free => {}
            }
        }
        for (row, range) in &self.ranges {
            let i = *row_index
                .get(row.as_str())
                .ok_or_else(|| MpsError::UnknownRowName {
                    line: 0,
                    name: row.clone(),
                })?;
            let b = rhs[i];
            let r = *range;
            match row_types[i] {
                RowType::LessEq => row_lb[i] = Bound::Finite(b - r.abs()),
                RowType::GreaterEq => row_ub[i] = Bound::Finite(b + r.abs()),
                RowType::Equal => {
                    if r >= 0.0 {
                        row_ub[i] = Bound::Finite(b + r);
                    } else {
                        row_lb[i] = Bound::Finite(b + r);
                    }
                }
                _ => {}
            }
        }

        let mut col_lb = vec![Bound::Finite(0.0f64); n];
        let mut col_ub = vec![Bound::<f64>::PosInf; n];
        let mut saw_lower = vec![false; n];
        for (code, col, value) in &self.bounds {
            let j = *col_index
                .get(col.as_str())
                .ok_or_else(|| MpsError::UnknownRowName {
                    line: 0,
                    name: col.clone(),
                })?;
            match code.as_str() {
                "UP" => {
                    col_ub[j] = Bound::Finite(*value);
                    if *value < 0.0 && !saw_lower[j] {
                        // negative upper bound on a default-lower variable
                        col_lb[j] = Bound::NegInf;
                    }
                }
                "LO" => {
                    col_lb[j] = Bound::Finite(*value);
                    saw_lower[j] = true;
                }
                "FX" => {
                    col_lb[j] = Bound::Finite(*value);
                    col_ub[j] = Bound::Finite(*value);
                    saw_lower[j] = true;
                }
                "FR" => {
                    col_lb[j] = Bound::NegInf;
                    col_ub[j] = Bound::PosInf;
                    saw_lower[j] = true;
                }
                "MI" => {
                    col_lb[j] = Bound::NegInf;
                    saw_lower[j] = true;
                }
                "PL" => col_ub[j] = Bound::PosInf,
                _ => unreachable!("validated in parse"),
            }
        }

        Ok(GeneralLP {
            sense: if self.maximize {
                Sense::Maximize
            } else {
                Sense::Minimize
            },
            c: costs,
            c0,
            a: CscMatrix::from_triplets(m, n, triplets),
            row_lb,
            row_ub,
            col_lb,
            col_ub,
            row_names,
            col_names,
        })
    }
}

fn parse_objsense(token: &str, line: usize) -> Result<bool, MpsError> {
    match token {
        "MAX" | "MAXIMIZE" => Ok(true),
        "MIN" | "MINIMIZE" => Ok(false),
        other => Err(syntax(line, format!("unknown objective sense '{other}'"))),
    }
}

fn parse_number(token: &str, line: usize) -> Result<f64, MpsError> {
    token
        .parse::<f64>()
        .map_err(|_| syntax(line, format!("expected a number, found '{token}'")))
}

/// Parses free-format MPS text into a general-form problem.
pub fn parse_mps(text: &str) -> Result<GeneralLP<f64>, MpsError> {
    MpsDocument::parse(text)?.into_general_lp()
}

/// Writes a problem back out as free-format MPS (canonical layout: ranged
/// rows become `L` rows plus a range entry).
pub fn write_mps<S: Real>(lp: &GeneralLP<S>, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", if name.is_empty() { "LP" } else { name });
    if lp.sense == Sense::Maximize {
        let _ = writeln!(out, "OBJSENSE\n MAX");
    }
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N COST");
    let mut row_kind = Vec::with_capacity(lp.nrows());
    for i in 0..lp.nrows() {
        let kind = match (lp.row_lb[i], lp.row_ub[i]) {
            (Bound::Finite(l), Bound::Finite(u)) if l == u => "E",
            (_, Bound::Finite(_)) => "L",
            (Bound::Finite(_), _) => "G",
            _ => "N",
        };
        row_kind.push(kind);
        let _ = writeln!(out, " {kind} {}", lp.row_names[i]);
    }
    let _ = writeln!(out, "COLUMNS");
    for j in 0..lp.ncols() {
        let cj = lp.c[j];
        if cj != S::zero() {
            let _ = writeln!(out, " {} COST {}", lp.col_names[j], cj.to_f64());
        }
        let (rows, vals) = lp.a.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            let _ = writeln!(out, " {} {} {}", lp.col_names[j], lp.row_names[i], v.to_f64());
        }
    }
    let _ = writeln!(out, "RHS");
    if lp.c0 != S::zero() {
        let _ = writeln!(out, " RHS COST {}", -lp.c0.to_f64());
    }
    for i in 0..lp.nrows() {
        let anchor = match row_kind[i] {
            "E" | "L" => lp.row_ub[i],
            "G" => lp.row_lb[i],
            _ => continue,
        };
        if let Bound::Finite(b) = anchor {
            if b != S::zero() {
                let _ = writeln!(out, " RHS {} {}", lp.row_names[i], b.to_f64());
            }
        }
    }
    let mut ranges = String::new();
    for i in 0..lp.nrows() {
        if row_kind[i] == "L" {
            if let (Bound::Finite(l), Bound::Finite(u)) = (lp.row_lb[i], lp.row_ub[i]) {
                let _ = writeln!(ranges, " RNG {} {}", lp.row_names[i], (u - l).to_f64());
            }
        }
    }
    if !ranges.is_empty() {
        let _ = writeln!(out, "RANGES");
        out.push_str(&ranges);
    }
    let mut bounds = String::new();
    for j in 0..lp.ncols() {
        let name = &lp.col_names[j];
        match (lp.col_lb[j], lp.col_ub[j]) {
            (Bound::Finite(l), Bound::Finite(u)) if l == u => {
                let _ = writeln!(bounds, " FX BND {name} {}", l.to_f64());
            }
            (Bound::Finite(l), ub) => {
                if l != S::zero() {
                    let _ = writeln!(bounds, " LO BND {name} {}", l.to_f64());
                }
                if let Bound::Finite(u) = ub {
                    let _ = writeln!(bounds, " UP BND {name} {}", u.to_f64());
                }
            }
            (Bound::NegInf, Bound::Finite(u)) => {
                let _ = writeln!(bounds, " MI BND {name}");
                let _ = writeln!(bounds, " UP BND {name} {}", u.to_f64());
            }
            (Bound::NegInf, _) => {
                let _ = writeln!(bounds, " FR BND {name}");
            }
            _ => {}
        }
    }
    if !bounds.is_empty() {
        let _ = writeln!(out, "BOUNDS");
        out.push_str(&bounds);
    }
    let _ = writeln!(out, "ENDATA");
    out
}

/// Writes the solution text format:
///
/// ```text
/// status <Status>
/// objective <value>
/// var <name> <primal> <reduced cost>
/// con <name> <dual>
/// ray var <name> <value>      (certificate entries, when present)
/// ray con <name> <value>
/// ```
///
/// Missing names are synthesized as `C1..` / `R1..`.
pub fn write_solution<S: Real>(
    sol: &Solution<S>,
    col_names: &[String],
    row_names: &[String],
) -> String {
    let col_name = |j: usize| -> String {
        col_names
            .get(j)
            .cloned()
            .unwrap_or_else(|| format!("C{}", j + 1))
    };
    let row_name = |i: usize| -> String {
        row_names
            .get(i)
            .cloned()
            .unwrap_or_else(|| format!("R{}", i + 1))
    };
    let mut out = String::new();
    let _ = writeln!(out, "status {}", sol.status.as_str());
    let _ = writeln!(out, "objective {:.12e}", sol.objective.to_f64());
    for (j, &v) in sol.x.iter().enumerate() {
        let s = sol.s.get(j).map(|s| s.to_f64()).unwrap_or(0.0);
        let _ = writeln!(out, "var {} {:.12e} {:.12e}", col_name(j), v.to_f64(), s);
    }
    for (i, &v) in sol.y.iter().enumerate() {
        let _ = writeln!(out, "con {} {:.12e}", row_name(i), v.to_f64());
    }
    if let Some(ray) = &sol.primal_ray {
        for (j, &v) in ray.iter().enumerate() {
            if v != S::zero() {
                let _ = writeln!(out, "ray var {} {:.12e}", col_name(j), v.to_f64());
            }
        }
    }
    if let Some(ray) = &sol.dual_ray {
        for (i, &v) in ray.iter().enumerate() {
            if v != S::zero() {
                let _ = writeln!(out, "ray con {} {:.12e}", row_name(i), v.to_f64());
            }
        }
    }
    out
}
