//! Packing files for `rebp separate`:
//!
//! ```text
//! rebp-packing v1
//! assign 0 0 1
//! open 0 1 2
//! theta 3/2
//! ```
//!
//! `assign` gives each item's bin (0-based). `open` is optional and defaults
//! to the bins that `assign` uses. `theta` is optional.

use std::path::Path;

use rebp_core::instances::InstanceError;
use rebp_core::model::Packing;
use rebp_core::rational::{format_fraction, parse_rational, Rat};
use rebp_core::Error;

pub const HEADER: &str = "rebp-packing v1";

pub struct PackingFile {
    pub packing: Packing,
    pub theta: Option<Rat>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Instance(InstanceError::Parse {
        line,
        message: message.into(),
    })
}

pub fn parse(text: &str, bin_count: usize) -> Result<PackingFile, Error> {
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then_some((i + 1, content))
    });
    match lines.next() {
        Some((_, h)) if h.split_whitespace().eq(HEADER.split_whitespace()) => {}
        Some((n, _)) => return Err(parse_error(n, format!("expected `{HEADER}`"))),
        None => return Err(parse_error(1, "empty packing file")),
    }
    let (mut assign, mut open, mut theta) = (None, None, None);
    for (n, line) in lines {
        let mut tokens = line.split_whitespace();
        let key = tokens.next().unwrap_or("");
        let values: Vec<&str> = tokens.collect();
        let indices = || -> Result<Vec<usize>, Error> {
            values
                .iter()
                .map(|v| v.parse().map_err(|_| parse_error(n, format!("`{v}` is not a bin index"))))
                .collect()
        };
        match key {
            "assign" if assign.is_none() => assign = Some(indices()?),
            "open" if open.is_none() => open = Some(indices()?),
            "theta" if theta.is_none() && values.len() == 1 => {
                let t = parse_rational(values[0]).map_err(|e| parse_error(n, e.to_string()))?;
                theta = Some(t);
            }
            "assign" | "open" | "theta" => {
                return Err(parse_error(n, format!("duplicate or malformed `{key}`")))
            }
            other => return Err(parse_error(n, format!("unknown key `{other}`"))),
        }
    }
    let assign = assign.ok_or_else(|| parse_error(1, "missing key `assign`"))?;
    let packing = match open {
        None => Packing::from_assignment(bin_count, assign)?,
        Some(list) => {
            let mut flags = vec![false; bin_count];
            for j in list {
                *flags
                    .get_mut(j)
                    .ok_or_else(|| parse_error(1, format!("bin {j} does not exist")))? = true;
            }
            Packing::new(flags, assign)?
        }
    };
    Ok(PackingFile { packing, theta })
}

pub fn read(path: &Path, bin_count: usize) -> Result<PackingFile, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| {
        Error::Instance(InstanceError::Io {
            path: path.display().to_string(),
            source,
        })
    })?;
    parse(&text, bin_count)
}

pub fn render(packing: &Packing, theta: Option<&Rat>) -> String {
    let join = |v: Vec<String>| v.join(" ");
    let mut out = format!("{HEADER}\n");
    out += &format!(
        "assign {}\n",
        join(packing.bin_of().iter().map(usize::to_string).collect())
    );
    let open: Vec<String> = (0..packing.bin_count())
        .filter(|&j| packing.open()[j])
        .map(|j| j.to_string())
        .collect();
    out += &format!("open {}\n", join(open));
    if let Some(t) = theta {
        out += &format!("theta {}\n", format_fraction(t));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rebp_core::rational::rat;

    #[test]
    fn round_trip() {
        let p = Packing::new(vec![true, true, true], vec![0, 0, 1]).unwrap();
        let text = render(&p, Some(&rat(3, 2)));
        let back = parse(&text, 3).unwrap();
        assert_eq!(back.packing, p);
        assert_eq!(back.theta, Some(rat(3, 2)));
    }

    #[test]
    fn defaults_and_errors() {
        let f = parse("rebp-packing v1\nassign 1 1\n", 2).unwrap();
        assert_eq!(f.packing.open(), &[false, true]);
        assert!(f.theta.is_none());
        assert!(parse("rebp-packing v2\nassign 0\n", 1).is_err());
        assert!(parse("rebp-packing v1\nassign 0\ncolour 1\n", 1).is_err());
        assert!(parse("rebp-packing v1\nopen 0\n", 1).is_err());
        assert!(parse("rebp-packing v1\nassign 3\n", 2).is_err());
    }
}
