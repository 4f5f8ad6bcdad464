//! Line-oriented instance files.
//!
//! ```text
//! rebp-instance v1
//! bins 2
//! capacity 7/1
//! budget 8/5
//! rates 3/14 3/14
//! item 10/1 4/1
//! ```
//!
//! The first non-blank line is the header. `#` starts a comment. Scalar keys
//! appear exactly once, `item` lines once per item in order. Values accept
//! `a/b`, integers and finite decimals; the writer always emits `a/b`.

use std::fs;
use std::path::Path;

use super::InstanceError;
use crate::model::{CkInstance, CkItem, Item, RebpData, RebpInstance};
use crate::rational::{format_fraction, parse_rational, Rat};

pub const FORMAT_VERSION: u32 = 1;
pub const REBP_HEADER: &str = "rebp-instance";
pub const CK_HEADER: &str = "ck-instance";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyInstance {
    Rebp(RebpInstance),
    Ck(CkInstance),
}

pub fn render_rebp(instance: &RebpInstance) -> String {
    let mut out = format!("{REBP_HEADER} v{FORMAT_VERSION}\n");
    out += &format!("bins {}\n", instance.bin_count());
    out += &format!("capacity {}\n", format_fraction(instance.capacity()));
    out += &format!("budget {}\n", format_fraction(instance.budget()));
    let rates: Vec<String> = instance.rates().iter().map(format_fraction).collect();
    out += &format!("rates {}\n", rates.join(" "));
    for it in instance.items() {
        out += &format!(
            "item {} {}\n",
            format_fraction(&it.nominal),
            format_fraction(&it.deviation)
        );
    }
    out
}

/// Writes the kept items only; items with `p(u) <= 0` were already dropped.
pub fn render_ck(instance: &CkInstance) -> String {
    let mut out = format!("{CK_HEADER} v{FORMAT_VERSION}\n");
    out += &format!("capacity {}\n", format_fraction(instance.capacity()));
    for it in instance.items() {
        out += &format!(
            "item {} {} {}\n",
            format_fraction(&it.gamma),
            format_fraction(&it.beta),
            format_fraction(&it.upper)
        );
    }
    out
}

struct Line<'a> {
    number: usize,
    key: &'a str,
    values: Vec<&'a str>,
}

fn parse_error(line: usize, message: impl Into<String>) -> InstanceError {
    InstanceError::Parse {
        line,
        message: message.into(),
    }
}

/// Splits off the header and returns `(kind, body lines)`.
fn tokenize(text: &str) -> Result<(&str, usize, Vec<Line<'_>>), InstanceError> {
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then_some((i + 1, content))
    });
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "empty file, expected a header"))?;
    let mut parts = header.split_whitespace();
    let kind = parts.next().unwrap_or("");
    if kind != REBP_HEADER && kind != CK_HEADER {
        return Err(parse_error(
            header_line,
            format!("expected `{REBP_HEADER} v{FORMAT_VERSION}` or `{CK_HEADER} v{FORMAT_VERSION}`"),
        ));
    }
    let version = parts.next().unwrap_or("");
    if parts.next().is_some() || !version.starts_with('v') {
        return Err(parse_error(header_line, "malformed header"));
    }
    if version != format!("v{FORMAT_VERSION}") {
        return Err(InstanceError::VersionMismatch {
            found: version.to_string(),
        });
    }
    let body = lines
        .map(|(number, content)| {
            let mut tokens = content.split_whitespace();
            let key = tokens.next().unwrap_or("");
            Line {
                number,
                key,
                values: tokens.collect(),
            }
        })
        .collect();
    Ok((kind, header_line, body))
}

fn rational(line: &Line, token: &str) -> Result<Rat, InstanceError> {
    parse_rational(token).map_err(|e| parse_error(line.number, e.to_string()))
}

fn exactly<'a>(line: &'a Line, count: usize) -> Result<&'a [&'a str], InstanceError> {
    if line.values.len() != count {
        return Err(parse_error(
            line.number,
            format!(
                "`{}` takes {count} value(s), found {}",
                line.key,
                line.values.len()
            ),
        ));
    }
    Ok(&line.values)
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: &Line) -> Result<(), InstanceError> {
    if slot.is_some() {
        return Err(parse_error(line.number, format!("duplicate key `{}`", line.key)));
    }
    *slot = Some(value);
    Ok(())
}

fn required<T>(slot: Option<T>, key: &str, at: usize) -> Result<T, InstanceError> {
    slot.ok_or_else(|| parse_error(at, format!("missing key `{key}`")))
}

fn rebp_from_lines(header_line: usize, lines: &[Line]) -> Result<RebpInstance, InstanceError> {
    let (mut bins, mut capacity, mut budget, mut rates) = (None, None, None, None);
    let mut items = Vec::new();
    for line in lines {
        match line.key {
            "bins" => {
                let v = exactly(line, 1)?[0];
                let n: usize = v
                    .parse()
                    .map_err(|_| parse_error(line.number, format!("`{v}` is not a bin count")))?;
                set_once(&mut bins, n, line)?;
            }
            "capacity" => set_once(&mut capacity, rational(line, exactly(line, 1)?[0])?, line)?,
            "budget" => set_once(&mut budget, rational(line, exactly(line, 1)?[0])?, line)?,
            "rates" => {
                let values = line
                    .values
                    .iter()
                    .map(|t| rational(line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                set_once(&mut rates, values, line)?;
            }
            "item" => {
                let v = exactly(line, 2)?;
                items.push(Item::new(rational(line, v[0])?, rational(line, v[1])?));
            }
            other => return Err(parse_error(line.number, format!("unknown key `{other}`"))),
        }
    }
    let data = RebpData {
        items,
        bin_count: required(bins, "bins", header_line)?,
        capacity: required(capacity, "capacity", header_line)?,
        rates: required(rates, "rates", header_line)?,
        budget: required(budget, "budget", header_line)?,
    };
    Ok(RebpInstance::new(data)?)
}

fn ck_from_lines(header_line: usize, lines: &[Line]) -> Result<CkInstance, InstanceError> {
    let mut capacity = None;
    let mut items = Vec::new();
    for line in lines {
        match line.key {
            "capacity" => set_once(&mut capacity, rational(line, exactly(line, 1)?[0])?, line)?,
            "item" => {
                let v = exactly(line, 3)?;
                items.push(CkItem::new(
                    rational(line, v[0])?,
                    rational(line, v[1])?,
                    rational(line, v[2])?,
                ));
            }
            other => return Err(parse_error(line.number, format!("unknown key `{other}`"))),
        }
    }
    let capacity = required(capacity, "capacity", header_line)?;
    Ok(CkInstance::new(items, capacity)?)
}

pub fn parse_instance(text: &str) -> Result<AnyInstance, InstanceError> {
    let (kind, header_line, lines) = tokenize(text)?;
    if kind == REBP_HEADER {
        rebp_from_lines(header_line, &lines).map(AnyInstance::Rebp)
    } else {
        ck_from_lines(header_line, &lines).map(AnyInstance::Ck)
    }
}

pub fn parse_rebp(text: &str) -> Result<RebpInstance, InstanceError> {
    match parse_instance(text)? {
        AnyInstance::Rebp(inst) => Ok(inst),
        AnyInstance::Ck(_) => Err(parse_error(1, format!("expected a `{REBP_HEADER}` file"))),
    }
}

pub fn parse_ck(text: &str) -> Result<CkInstance, InstanceError> {
    match parse_instance(text)? {
        AnyInstance::Ck(inst) => Ok(inst),
        AnyInstance::Rebp(_) => Err(parse_error(1, format!("expected a `{CK_HEADER}` file"))),
    }
}

fn read_text(path: &Path) -> Result<String, InstanceError> {
    fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), InstanceError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| InstanceError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_instance(path: &Path) -> Result<AnyInstance, InstanceError> {
    parse_instance(&read_text(path)?)
}

pub fn read_rebp(path: &Path) -> Result<RebpInstance, InstanceError> {
    parse_rebp(&read_text(path)?)
}

pub fn read_ck(path: &Path) -> Result<CkInstance, InstanceError> {
    parse_ck(&read_text(path)?)
}

pub fn write_rebp(path: &Path, instance: &RebpInstance) -> Result<(), InstanceError> {
    write_text(path, &render_rebp(instance))
}

pub fn write_ck(path: &Path, instance: &CkInstance) -> Result<(), InstanceError> {
    write_text(path, &render_ck(instance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_ck, gen_rebp, CkGenSpec, NominalSource, RebpGenSpec};
    use crate::rcg::{solve_rebp, RcgConfig};

    fn sample_ck() -> CkInstance {
        gen_ck(&CkGenSpec {
            n: 12,
            r: 1000,
            experiment: 5,
            seed: 1,
        })
        .unwrap()
    }

    #[test]
    fn ck_round_trip() {
        let inst = sample_ck();
        let text = render_ck(&inst);
        assert_eq!(parse_ck(&text).unwrap(), inst);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/a.ck");
        write_ck(&path, &inst).unwrap();
        assert_eq!(read_ck(&path).unwrap(), inst);
        assert_eq!(fs::read_to_string(&path).unwrap(), text);
    }

    #[test]
    fn rebp_round_trip_and_solve() {
        let inst = gen_rebp(&RebpGenSpec::new(
            NominalSource::Given(vec![Rat::from_integer(5.into()); 3]),
            0,
        ))
        .unwrap()
        .instance;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.rebp");
        write_rebp(&path, &inst).unwrap();
        let back = read_rebp(&path).unwrap();
        assert_eq!(back, inst);
        let out = solve_rebp(&back, &RcgConfig::default()).unwrap();
        assert!(out.robust_objective >= Rat::from_integer(1.into()));
    }

    #[test]
    fn corrupted_header() {
        let text = render_ck(&sample_ck()).replacen("ck-instance", "ck-instanse", 1);
        assert!(matches!(parse_ck(&text), Err(InstanceError::Parse { line: 1, .. })));
        let text = render_ck(&sample_ck()).replacen("v1", "v2", 1);
        assert!(matches!(
            parse_ck(&text),
            Err(InstanceError::VersionMismatch { .. })
        ));
        assert!(parse_instance("").is_err());
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        let base = "rebp-instance v1\nbins 1\ncapacity 5\nbudget 0\nrates 1\nitem 1 0\n";
        assert!(parse_rebp(base).is_ok());
        let err = parse_rebp(&format!("{base}colour red\n")).unwrap_err();
        assert!(matches!(err, InstanceError::Parse { line: 7, .. }));
        assert!(parse_rebp(&format!("{base}bins 2\n")).is_err());
        assert!(parse_rebp("rebp-instance v1\nbins 1\nbudget 0\nrates 1\n").is_err());
        assert!(parse_rebp("rebp-instance v1\nbins 1\ncapacity x\nbudget 0\nrates 1\n").is_err());
    }

    #[test]
    fn comments_decimals_and_kind() {
        let text = "# test\nck-instance v1 # header\n\ncapacity 2.5\nitem -1 1/2 3\n";
        let inst = parse_ck(text).unwrap();
        assert_eq!(inst.capacity(), &Rat::new(5.into(), 2.into()));
        assert!(parse_rebp(text).is_err());
        assert!(matches!(parse_instance(text).unwrap(), AnyInstance::Ck(_)));
    }

    #[test]
    fn invalid_data_is_reported() {
        let text = "rebp-instance v1\nbins 1\ncapacity 5\nbudget 9\nrates 1\nitem 1 1\n";
        assert!(matches!(parse_rebp(text), Err(InstanceError::Invalid(_))));
    }
}
