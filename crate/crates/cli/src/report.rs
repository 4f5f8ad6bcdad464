use std::io::Write;
use std::path::Path;

use rebp_core::instances::InstanceError;
use rebp_core::Error;

/// Aligns columns: numbers to the right, text to the left, with a rule under
/// the header row.
pub fn render_table(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0; columns];
    for row in rows {
        for (c, cell) in row.iter().enumerate() {
            widths[c] = widths[c].max(cell.chars().count());
        }
    }
    let numeric = |s: &str| !s.is_empty() && s.parse::<f64>().is_ok();
    let mut out = String::new();
    for (r, row) in rows.iter().enumerate() {
        let cells: Vec<String> = (0..columns)
            .map(|c| {
                let cell = row.get(c).map(String::as_str).unwrap_or("");
                if r > 0 && numeric(cell) {
                    format!("{cell:>w$}", w = widths[c])
                } else {
                    format!("{cell:<w$}", w = widths[c])
                }
            })
            .collect();
        out += cells.join("  ").trim_end();
        out.push('\n');
        if r == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            out += &rule.join("  ");
            out.push('\n');
        }
    }
    out
}

pub fn run(path: &Path, out: &mut dyn Write) -> Result<(), Error> {
    let parse_error = |e: csv::Error| {
        let line = e.position().map_or(1, |p| p.line() as usize);
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Instance(InstanceError::Io {
                path: path.display().to_string(),
                source,
            }),
            kind => Error::Instance(InstanceError::Parse {
                line,
                message: format!("malformed CSV: {kind:?}"),
            }),
        }
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(parse_error)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(parse_error)?;
        rows.push(record.iter().map(str::to_string).collect::<Vec<_>>());
    }
    if rows.is_empty() {
        return Err(Error::Instance(InstanceError::Parse {
            line: 1,
            message: "empty CSV file".into(),
        }));
    }
    write!(out, "{}", render_table(&rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligns_numbers_right() {
        let rows = vec![
            vec!["name".to_string(), "value".to_string()],
            vec!["a".to_string(), "1.5".to_string()],
            vec!["long".to_string(), "10".to_string()],
        ];
        assert_eq!(
            render_table(&rows),
            "name  value\n----  -----\na       1.5\nlong     10\n"
        );
    }
}
