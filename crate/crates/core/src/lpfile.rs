//! Writer and reader for the subset of the CPLEX LP text format emitted by
//! this crate (objective, linear rows, bounds, binaries, SOS sets).
//!
//! Coefficients are written as shortest round-trip `f64`; model files are an
//! exchange format for external solvers, the exact data lives elsewhere.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

impl RowSense {
    fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A special ordered set; `kind` is 1 or 2, members carry their ordering weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SosSet {
    pub name: String,
    pub kind: u8,
    pub members: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub objective: Objective,
    pub objective_terms: Vec<(String, f64)>,
    pub rows: Vec<Row>,
    pub variables: Vec<Variable>,
    pub sos: Vec<SosSet>,
}

#[derive(Debug, Error)]
pub enum LpParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing section `{0}`")]
    MissingSection(&'static str),
}

const TERMS_PER_LINE: usize = 8;

impl LpModel {
    pub fn new(objective: Objective) -> Self {
        Self {
            objective,
            objective_terms: Vec::new(),
            rows: Vec::new(),
            variables: Vec::new(),
            sos: Vec::new(),
        }
    }

    pub fn add_variable(&mut self, name: impl Into<String>, kind: VarKind) {
        let (lower, upper) = match kind {
            VarKind::Binary => (0.0, Some(1.0)),
            VarKind::Continuous => (0.0, None),
        };
        self.variables.push(Variable {
            name: name.into(),
            kind,
            lower,
            upper,
        });
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(String, f64)>,
        sense: RowSense,
        rhs: f64,
    ) {
        self.rows.push(Row {
            name: name.into(),
            terms,
            sense,
            rhs,
        });
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn row(&self, name: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ generated by rebp-core\n");
        out.push_str(match self.objective {
            Objective::Minimize => "Minimize\n",
            Objective::Maximize => "Maximize\n",
        });
        let _ = writeln!(out, " obj: {}", render_terms(&self.objective_terms));
        out.push_str("Subject To\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                " {}: {} {} {}",
                row.name,
                render_terms(&row.terms),
                row.sense.symbol(),
                fmt_num(row.rhs)
            );
        }
        out.push_str("Bounds\n");
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Continuous) {
            match v.upper {
                Some(ub) => {
                    let _ = writeln!(out, " {} <= {} <= {}", fmt_num(v.lower), v.name, fmt_num(ub));
                }
                None => {
                    let _ = writeln!(out, " {} >= {}", v.name, fmt_num(v.lower));
                }
            }
        }
        let binaries: Vec<&str> = self
            .variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .map(|v| v.name.as_str())
            .collect();
        if !binaries.is_empty() {
            out.push_str("Binary\n");
            for chunk in binaries.chunks(TERMS_PER_LINE) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        if !self.sos.is_empty() {
            out.push_str("SOS\n");
            for set in &self.sos {
                let members: Vec<String> = set
                    .members
                    .iter()
                    .map(|(name, w)| format!("{name}:{}", fmt_num(*w)))
                    .collect();
                let _ = writeln!(out, " {}: S{}:: {}", set.name, set.kind, members.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }

    pub fn write_to(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_lp_string())
    }

    pub fn parse(text: &str) -> Result<Self, LpParseError> {
        Parser::default().run(text)
    }
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn render_terms(terms: &[(String, f64)]) -> String {
    if terms.is_empty() {
        return "0 __zero".to_string();
    }
    let mut out = String::new();
    for (k, (name, coef)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if *coef < 0.0 { "-" } else { "+" };
        let mag = coef.abs();
        if k == 0 && sign == "+" {
            if mag == 1.0 {
                out.push_str(name);
            } else {
                let _ = write!(out, "{} {}", fmt_num(mag), name);
            }
        } else {
            if k > 0 {
                out.push(' ');
            }
            if mag == 1.0 {
                let _ = write!(out, "{sign} {name}");
            } else {
                let _ = write!(out, "{sign} {} {}", fmt_num(mag), name);
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binary,
    Sos,
    End,
}

#[derive(Default)]
struct Parser {
    objective: Option<Objective>,
    objective_terms: Vec<(String, f64)>,
    rows: Vec<Row>,
    bounds: Vec<(String, f64, Option<f64>)>,
    binaries: Vec<String>,
    sos: Vec<SosSet>,
    seen_names: Vec<String>,
}

fn keyword(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "minimum" | "min" => Some(Section::Objective),
        "maximize" | "maximum" | "max" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binary" | "binaries" | "bin" => Some(Section::Binary),
        "sos" => Some(Section::Sos),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn parse_num(tok: &str, line: usize) -> Result<f64, LpParseError> {
    let v = match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => f64::INFINITY,
        "-inf" | "-infinity" => f64::NEG_INFINITY,
        _ => tok.parse::<f64>().map_err(|_| LpParseError::Syntax {
            line,
            message: format!("expected a number, found `{tok}`"),
        })?,
    };
    Ok(v)
}

/// Parses `[name:] term* sense rhs` from a joined token list.
fn parse_linear(
    tokens: &[&str],
    line: usize,
) -> Result<(Vec<(String, f64)>, Option<(RowSense, f64)>), LpParseError> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    let mut k = 0;
    while k < tokens.len() {
        let tok = tokens[k];
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -sign,
            "<=" | "=<" | ">=" | "=>" | "=" | "<" | ">" => {
                let sense = match tok {
                    "<=" | "=<" | "<" => RowSense::Le,
                    ">=" | "=>" | ">" => RowSense::Ge,
                    _ => RowSense::Eq,
                };
                let rhs_tok = tokens.get(k + 1).ok_or(LpParseError::Syntax {
                    line,
                    message: "missing right-hand side".into(),
                })?;
                let mut rhs = parse_num(rhs_tok, line)?;
                if let Some(next) = tokens.get(k + 2) {
                    return Err(LpParseError::Syntax {
                        line,
                        message: format!("unexpected `{next}` after right-hand side"),
                    });
                }
                if rhs == -0.0 {
                    rhs = 0.0;
                }
                return Ok((terms, Some((sense, rhs))));
            }
            _ => {
                if let Ok(v) = tok.parse::<f64>() {
                    coef = Some(coef.unwrap_or(1.0) * v);
                } else {
                    let c = sign * coef.take().unwrap_or(1.0);
                    if tok != "__zero" {
                        terms.push((tok.to_string(), c));
                    }
                    sign = 1.0;
                }
            }
        }
        k += 1;
    }
    if coef.is_some() {
        return Err(LpParseError::Syntax {
            line,
            message: "dangling coefficient".into(),
        });
    }
    Ok((terms, None))
}

impl Parser {
    fn run(mut self, text: &str) -> Result<LpModel, LpParseError> {
        let mut section = Section::Preamble;
        // statements may continue over several lines; (start line, text)
        let mut pending: Option<(usize, String)> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('\\').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            if let Some(next) = keyword(line) {
                self.flush(section, pending.take())?;
                if next == Section::Objective {
                    let lower = line.trim().to_ascii_lowercase();
                    self.objective = Some(if lower.starts_with("max") {
                        Objective::Maximize
                    } else {
                        Objective::Minimize
                    });
                }
                section = next;
                continue;
            }
            match section {
                Section::Preamble | Section::End => {
                    return Err(LpParseError::Syntax {
                        line: line_no,
                        message: "content outside of a section".into(),
                    })
                }
                Section::Objective | Section::Constraints => {
                    let has_label = line
                        .split_whitespace()
                        .next()
                        .map(|t| t.ends_with(':'))
                        .unwrap_or(false);
                    if has_label {
                        self.flush(section, pending.take())?;
                        pending = Some((line_no, line.trim().to_string()));
                    } else if let Some((_, buf)) = pending.as_mut() {
                        buf.push(' ');
                        buf.push_str(line.trim());
                    } else {
                        pending = Some((line_no, line.trim().to_string()));
                    }
                }
                Section::Bounds => self.bound_line(line.trim(), line_no)?,
                Section::Binary => self
                    .binaries
                    .extend(line.split_whitespace().map(str::to_string)),
                Section::Sos => self.sos_line(line.trim(), line_no)?,
            }
        }
        self.flush(section, pending.take())?;
        self.finish()
    }

    fn flush(&mut self, section: Section, pending: Option<(usize, String)>) -> Result<(), LpParseError> {
        let Some((line, text)) = pending else {
            return Ok(());
        };
        let mut tokens: Vec<&str> = text.split_whitespace().collect();
        let mut name = None;
        if let Some(first) = tokens.first() {
            if let Some(stripped) = first.strip_suffix(':') {
                name = Some(stripped.to_string());
                tokens.remove(0);
            }
        }
        let (terms, rel) = parse_linear(&tokens, line)?;
        match section {
            Section::Objective => {
                if rel.is_some() {
                    return Err(LpParseError::Syntax {
                        line,
                        message: "relation in objective".into(),
                    });
                }
                self.note_names(&terms);
                self.objective_terms = terms;
            }
            Section::Constraints => {
                let (sense, rhs) = rel.ok_or(LpParseError::Syntax {
                    line,
                    message: "constraint without relation".into(),
                })?;
                self.note_names(&terms);
                let name = name.unwrap_or_else(|| format!("R{}", self.rows.len() + 1));
                self.rows.push(Row {
                    name,
                    terms,
                    sense,
                    rhs,
                });
            }
            _ => {}
        }
        Ok(())
    }

    fn note_names(&mut self, terms: &[(String, f64)]) {
        for (n, _) in terms {
            if !self.seen_names.contains(n) {
                self.seen_names.push(n.clone());
            }
        }
    }

    fn bound_line(&mut self, line: &str, line_no: usize) -> Result<(), LpParseError> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let syntax = |m: &str| LpParseError::Syntax {
            line: line_no,
            message: m.to_string(),
        };
        match toks.as_slice() {
            [lo, "<=", name, "<=", hi] => {
                let lo = parse_num(lo, line_no)?;
                let hi = parse_num(hi, line_no)?;
                self.bounds.push((name.to_string(), lo, Some(hi)));
            }
            [name, ">=", lo] => {
                let lo = parse_num(lo, line_no)?;
                self.bounds.push((name.to_string(), lo, None));
            }
            [name, "<=", hi] => {
                let hi = parse_num(hi, line_no)?;
                self.bounds.push((name.to_string(), 0.0, Some(hi)));
            }
            [name, "free"] => self
                .bounds
                .push((name.to_string(), f64::NEG_INFINITY, None)),
            _ => return Err(syntax("unsupported bound")),
        }
        Ok(())
    }

    fn sos_line(&mut self, line: &str, line_no: usize) -> Result<(), LpParseError> {
        let syntax = |m: &str| LpParseError::Syntax {
            line: line_no,
            message: m.to_string(),
        };
        let (name, rest) = line.split_once(':').ok_or_else(|| syntax("SOS without name"))?;
        let rest = rest.trim();
        let (kind, members) = rest
            .split_once("::")
            .ok_or_else(|| syntax("SOS without type"))?;
        let kind = match kind.trim() {
            "S1" | "s1" => 1,
            "S2" | "s2" => 2,
            other => return Err(syntax(&format!("unknown SOS type `{other}`"))),
        };
        let mut parsed = Vec::new();
        for m in members.split_whitespace() {
            let (var, w) = m.split_once(':').ok_or_else(|| syntax("SOS member without weight"))?;
            parsed.push((var.to_string(), parse_num(w, line_no)?));
        }
        self.sos.push(SosSet {
            name: name.trim().to_string(),
            kind,
            members: parsed,
        });
        Ok(())
    }

    fn finish(self) -> Result<LpModel, LpParseError> {
        let objective = self.objective.ok_or(LpParseError::MissingSection("Minimize/Maximize"))?;
        let mut names = self.seen_names;
        for (n, _, _) in &self.bounds {
            if !names.contains(n) {
                names.push(n.clone());
            }
        }
        for n in &self.binaries {
            if !names.contains(n) {
                names.push(n.clone());
            }
        }
        let variables = names
            .into_iter()
            .map(|name| {
                if self.binaries.contains(&name) {
                    Variable {
                        name,
                        kind: VarKind::Binary,
                        lower: 0.0,
                        upper: Some(1.0),
                    }
                } else {
                    let (lower, upper) = self
                        .bounds
                        .iter()
                        .find(|(n, _, _)| *n == name)
                        .map(|(_, lo, hi)| (*lo, *hi))
                        .unwrap_or((0.0, None));
                    Variable {
                        name,
                        kind: VarKind::Continuous,
                        lower,
                        upper,
                    }
                }
            })
            .collect();
        Ok(LpModel {
            objective,
            objective_terms: self.objective_terms,
            rows: self.rows,
            variables,
            sos: self.sos,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LpModel {
        let mut m = LpModel::new(Objective::Minimize);
        m.add_variable("y_1", VarKind::Binary);
        m.add_variable("x", VarKind::Continuous);
        m.objective_terms = vec![("y_1".into(), 1.0), ("x".into(), 2.5)];
        m.add_row(
            "c1",
            vec![("y_1".into(), -1.0), ("x".into(), 0.1)],
            RowSense::Le,
            -3.0,
        );
        m.add_row("c2", vec![("x".into(), 1.0)], RowSense::Ge, 0.5);
        m.sos.push(SosSet {
            name: "s1".into(),
            kind: 2,
            members: vec![("y_1".into(), 1.0), ("x".into(), 2.0)],
        });
        m
    }

    #[test]
    fn round_trip() {
        let m = sample();
        let text = m.to_lp_string();
        let back = LpModel::parse(&text).unwrap();
        assert_eq!(back.objective, Objective::Minimize);
        assert_eq!(back.rows, m.rows);
        assert_eq!(back.objective_terms, m.objective_terms);
        assert_eq!(back.sos, m.sos);
        assert_eq!(back.variable("y_1").unwrap().kind, VarKind::Binary);
        assert_eq!(back.variable("x").unwrap().kind, VarKind::Continuous);
    }

    #[test]
    fn long_rows_wrap_and_parse() {
        let mut m = LpModel::new(Objective::Maximize);
        let terms: Vec<(String, f64)> = (0..30).map(|k| (format!("v{k}"), k as f64 - 7.5)).collect();
        for (n, _) in &terms {
            m.add_variable(n.clone(), VarKind::Continuous);
        }
        m.objective_terms = terms.clone();
        m.add_row("big", terms.clone(), RowSense::Eq, 1.0);
        let text = m.to_lp_string();
        assert!(text.lines().all(|l| l.len() < 255));
        let back = LpModel::parse(&text).unwrap();
        assert_eq!(back.row("big").unwrap().terms, terms);
        assert_eq!(back.objective_terms, terms);
    }

    #[test]
    fn rejects_garbage() {
        assert!(LpModel::parse("Minimize\n obj: x\nSubject To\n c: x <=\nEnd\n").is_err());
        assert!(LpModel::parse("hello\n").is_err());
        assert!(LpModel::parse("Subject To\n c: x <= 1\nEnd\n").is_err());
    }
}
