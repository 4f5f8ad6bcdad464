//! File-based adapter for external MILP solvers.
//!
//! The model is written in LP format next to an options file with one
//! `key value` pair per line (`gap`, `time_limit`, `hints`, `hint_mode`).
//! Hints go to a `.hnt` file (variable, value, priority) when they should
//! guide the search, or to a `.mst` start file when they only seed it.
//!
//! The command template may contain `{model}`, `{options}` and `{solution}`;
//! without placeholders the three paths are appended in that order. The
//! solver must write `name value` lines to the solution path. Lines starting
//! with `#` are comments, except `# status: <word>` which is read.

use std::collections::HashMap;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;

use super::{HintMode, MasterError, MasterModel, MasterSolution};
use crate::model::Packing;
use crate::rational::{to_f64, Rat};

const INTEGRALITY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSolver {
    pub command: String,
    /// Directory for exchange files; a fresh temporary one when `None`.
    pub work_dir: Option<PathBuf>,
}

impl ExternalSolver {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            work_dir: None,
        }
    }
}

pub fn solve_master_external(
    model: &MasterModel,
    solver: &ExternalSolver,
) -> Result<MasterSolution, MasterError> {
    let temp;
    let dir: &Path = match &solver.work_dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            d
        }
        None => {
            temp = tempfile::tempdir()?;
            temp.path()
        }
    };
    let model_path = dir.join("model.lp");
    let options_path = dir.join("options.txt");
    let solution_path = dir.join("solution.sol");
    model.to_linear_model().write_to(&model_path)?;
    let hint_path = write_hints(model, dir)?;
    std::fs::write(&options_path, options_text(model, hint_path.as_deref()))?;

    let parsed = invoke_solver(&solver.command, &model_path, &options_path, &solution_path)?;
    let packing = packing_from_values(model, &parsed.values)?;
    let solution = model.solution_for(packing, model.gap().clone())?;
    solution.verify(model)?;
    Ok(solution)
}

/// Runs a solver command on already written exchange files and reads the
/// solution it leaves behind. A missing solution file or an infeasible
/// status is reported as `SolverReportedInfeasible`.
pub fn invoke_solver(
    command: &str,
    model_path: &Path,
    options_path: &Path,
    solution_path: &Path,
) -> Result<ParsedSolution, MasterError> {
    if solution_path.exists() {
        std::fs::remove_file(solution_path)?;
    }
    let mut args: Vec<String> = command.split_whitespace().map(str::to_string).collect();
    if args.is_empty() {
        return Err(MasterError::SolverNotFound(String::new()));
    }
    let paths = [
        ("{model}", model_path),
        ("{options}", options_path),
        ("{solution}", solution_path),
    ];
    let templated = args.iter().any(|a| paths.iter().any(|(k, _)| a.contains(k)));
    if templated {
        for a in args.iter_mut() {
            for (key, path) in &paths {
                *a = a.replace(key, &path.display().to_string());
            }
        }
    } else {
        args.extend(paths.iter().map(|(_, p)| p.display().to_string()));
    }
    let program = args.remove(0);
    let status = Command::new(&program).args(&args).status().map_err(|e| {
        if e.kind() == ErrorKind::NotFound || e.kind() == ErrorKind::PermissionDenied {
            MasterError::SolverNotFound(program.clone())
        } else {
            MasterError::Io(e)
        }
    })?;

    let text = match std::fs::read_to_string(solution_path) {
        Ok(t) => t,
        Err(e) if e.kind() == ErrorKind::NotFound => {
            return Err(MasterError::SolverReportedInfeasible)
        }
        Err(e) => return Err(e.into()),
    };
    let parsed = parse_solution_file(&text)?;
    if parsed.infeasible || (!status.success() && parsed.values.is_empty()) {
        return Err(MasterError::SolverReportedInfeasible);
    }
    Ok(parsed)
}

/// Values and status read from a solution file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedSolution {
    pub values: HashMap<String, f64>,
    pub infeasible: bool,
}

pub fn parse_solution_file(text: &str) -> Result<ParsedSolution, MasterError> {
    let mut out = ParsedSolution::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim().to_ascii_lowercase();
            if let Some(status) = comment.strip_prefix("status:") {
                out.infeasible = status.contains("infeasible");
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(MasterError::ParseError(format!(
                "line {}: expected `name value`",
                lineno + 1
            )));
        };
        let value: f64 = value.parse().map_err(|_| {
            MasterError::ParseError(format!("line {}: bad number `{value}`", lineno + 1))
        })?;
        if !value.is_finite() {
            return Err(MasterError::ParseError(format!(
                "line {}: value is not finite",
                lineno + 1
            )));
        }
        out.values.insert(name.to_string(), value);
    }
    Ok(out)
}

fn binary(values: &HashMap<String, f64>, name: &str) -> Result<bool, MasterError> {
    let v = values.get(name).copied().unwrap_or(0.0);
    if v.abs() <= INTEGRALITY_SLACK {
        Ok(false)
    } else if (v - 1.0).abs() <= INTEGRALITY_SLACK {
        Ok(true)
    } else {
        Err(MasterError::ParseError(format!("{name} = {v} is not binary")))
    }
}

fn packing_from_values(
    model: &MasterModel,
    values: &HashMap<String, f64>,
) -> Result<Packing, MasterError> {
    let inst = model.instance();
    let (m, n) = (inst.item_count(), inst.bin_count());
    let open = (0..n)
        .map(|j| binary(values, &format!("y_{}", j + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut bin_of = Vec::with_capacity(m);
    for i in 0..m {
        let mut bins = Vec::new();
        for j in 0..n {
            if binary(values, &format!("z_{}_{}", i + 1, j + 1))? {
                bins.push(j);
            }
        }
        match bins.as_slice() {
            [j] => bin_of.push(*j),
            _ => {
                return Err(MasterError::ParseError(format!(
                    "item {} is assigned to {} bins",
                    i + 1,
                    bins.len()
                )))
            }
        }
    }
    Packing::new(open, bin_of).map_err(|e| MasterError::ParseError(e.to_string()))
}

fn options_text(model: &MasterModel, hints: Option<&Path>) -> String {
    let mut out = format!("gap {}\n", to_f64(model.gap()));
    match model.deadline() {
        Some(deadline) => {
            let left = deadline.saturating_duration_since(Instant::now());
            out.push_str(&format!("time_limit {}\n", left.as_secs_f64()));
        }
        None => out.push_str("time_limit none\n"),
    }
    match hints {
        Some(p) => {
            out.push_str(&format!("hints {}\n", p.display()));
            let mode = match model.hint_mode() {
                HintMode::GuideSearch => "guide-search",
                HintMode::ConstructStart => "construct-start",
            };
            out.push_str(&format!("hint_mode {mode}\n"));
        }
        None => out.push_str("hints none\n"),
    }
    out
}

/// Writes the hint packing, completed with `θ` and `α` for every pooled scenario.
fn write_hints(model: &MasterModel, dir: &Path) -> Result<Option<PathBuf>, MasterError> {
    let Some(hint) = model.hint() else {
        return Ok(None);
    };
    let inst = model.instance();
    if hint.bin_count() != inst.bin_count() || hint.bin_of().len() != inst.item_count() {
        return Ok(None);
    }
    let sol = model.solution_for(hint.clone(), Rat::from_integer(BigInt::from(0)))?;
    let mut entries: Vec<(String, f64)> = Vec::new();
    for (j, &open) in hint.open().iter().enumerate() {
        entries.push((format!("y_{}", j + 1), f64::from(u8::from(open))));
    }
    for i in 0..inst.item_count() {
        for j in 0..inst.bin_count() {
            entries.push((format!("z_{}_{}", i + 1, j + 1), f64::from(u8::from(hint.z(i, j)))));
        }
    }
    entries.push(("theta".into(), to_f64(&sol.theta)));
    for (s, block) in sol.alpha.iter().enumerate() {
        for (j, a) in block.iter().enumerate() {
            entries.push((format!("alpha_{}_{}", s, j + 1), to_f64(a)));
        }
    }
    let (path, text) = match model.hint_mode() {
        HintMode::GuideSearch => {
            let body: String = entries.iter().map(|(n, v)| format!("{n} {v} 0\n")).collect();
            (dir.join("hints.hnt"), body)
        }
        HintMode::ConstructStart => {
            let body: String = entries.iter().map(|(n, v)| format!("{n} {v}\n")).collect();
            (dir.join("start.mst"), format!("# MIP start\n{body}"))
        }
    };
    std::fs::write(&path, text)?;
    Ok(Some(path))
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use crate::master::{build_master, CutSet, ScenarioPool};
    use crate::model::{Item, RebpInstance};
    use crate::rational::{int, rat};
    use std::os::unix::fs::PermissionsExt;

    fn trivial() -> RebpInstance {
        RebpInstance::with_uniform_rate(vec![Item::new(int(2), int(1))], 1, int(5), int(1), int(1))
            .unwrap()
    }

    fn script(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("solver.sh");
        std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        path
    }

    #[test]
    fn round_trip_through_mock_solver() {
        let inst = trivial();
        let tools = tempfile::tempdir().unwrap();
        let exe = script(
            tools.path(),
            "printf '# Objective value = 1\\ny_1 1\\nz_1_1 0.9999999\\ntheta 0\\n' > \"$3\"",
        );
        let work = tools.path().join("work");
        let solver = ExternalSolver {
            command: exe.display().to_string(),
            work_dir: Some(work.clone()),
        };
        let mut model = build_master(&inst, ScenarioPool::new(1), CutSet::None).unwrap();
        model.set_gap(rat(1, 5));
        let sol = solve_master_external(&model, &solver).unwrap();
        assert_eq!(sol.objective, int(1));
        let options = std::fs::read_to_string(work.join("options.txt")).unwrap();
        assert!(options.lines().any(|l| l == "gap 0.2"));
        let lp = std::fs::read_to_string(work.join("model.lp")).unwrap();
        assert!(crate::lpfile::LpModel::parse(&lp).is_ok());
    }

    #[test]
    fn placeholders_and_hint_files() {
        let inst = trivial();
        let tools = tempfile::tempdir().unwrap();
        let exe = script(tools.path(), "cp \"$2.answer\" \"$1\"");
        let work = tools.path().join("work");
        std::fs::create_dir_all(&work).unwrap();
        std::fs::write(work.join("options.txt.answer"), "y_1 1\nz_1_1 1\n").unwrap();
        let solver = ExternalSolver {
            command: format!("{} {{solution}} {{options}}", exe.display()),
            work_dir: Some(work.clone()),
        };
        let mut model = build_master(&inst, ScenarioPool::new(1), CutSet::None).unwrap();
        model.set_hint(Some(Packing::from_assignment(1, vec![0]).unwrap()), HintMode::GuideSearch);
        assert_eq!(solve_master_external(&model, &solver).unwrap().objective, int(1));
        assert!(work.join("hints.hnt").exists());
        model.set_hint(
            Some(Packing::from_assignment(1, vec![0]).unwrap()),
            HintMode::ConstructStart,
        );
        solve_master_external(&model, &solver).unwrap();
        let start = std::fs::read_to_string(work.join("start.mst")).unwrap();
        assert!(start.contains("y_1 1"));
        let options = std::fs::read_to_string(work.join("options.txt")).unwrap();
        assert!(options.contains("hint_mode construct-start"));
    }

    #[test]
    fn missing_binary() {
        let inst = trivial();
        let model = build_master(&inst, ScenarioPool::new(1), CutSet::None).unwrap();
        let solver = ExternalSolver::new("/nonexistent/solver-binary");
        assert!(matches!(
            solve_master_external(&model, &solver),
            Err(MasterError::SolverNotFound(_))
        ));
    }

    #[test]
    fn infeasible_and_garbage() {
        let inst = trivial();
        let tools = tempfile::tempdir().unwrap();
        let model = build_master(&inst, ScenarioPool::new(1), CutSet::None).unwrap();
        let exe = script(tools.path(), "printf '# status: infeasible\\n' > \"$3\"");
        let r = solve_master_external(&model, &ExternalSolver::new(exe.display().to_string()));
        assert!(matches!(r, Err(MasterError::SolverReportedInfeasible)));
        let exe = script(tools.path(), "exit 1");
        let r = solve_master_external(&model, &ExternalSolver::new(exe.display().to_string()));
        assert!(matches!(r, Err(MasterError::SolverReportedInfeasible)));
        let exe = script(tools.path(), "printf 'y_1 banana\\n' > \"$3\"");
        let r = solve_master_external(&model, &ExternalSolver::new(exe.display().to_string()));
        assert!(matches!(r, Err(MasterError::ParseError(_))));
        let exe = script(tools.path(), "printf 'y_1 1\\nz_1_1 0.5\\n' > \"$3\"");
        let r = solve_master_external(&model, &ExternalSolver::new(exe.display().to_string()));
        assert!(matches!(r, Err(MasterError::ParseError(_))));
    }
}
