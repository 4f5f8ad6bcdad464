use std::io::Write;
use std::path::{Path, PathBuf};

use rebp_core::instances::{
    gen_ck, gen_rebp, read_ck, read_rebp, render_ck, render_rebp, write_ck, write_rebp,
    CkGenSpec, InstanceError, NominalSource, RebpGenSpec, CK_EXPERIMENTS, FORMAT_VERSION,
};
use rebp_core::knapsack::{brute_force_ck, export_sos2, solve_dp, solve_fptas};
use rebp_core::model::{CkInstance, CkSolution, Packing, RebpInstance, Scenario};
use rebp_core::oracles::{enumerate_uomega_vertices, maximal_vertices, robust_brute_force};
use rebp_core::rational::{format_compact, Rat};
use rebp_core::rcg::{solve_rebp, RcgConfig, SeparationSchedule};
use rebp_core::separation::{separate, SeparationMode};
use rebp_core::Error;

use crate::packing_file;
use crate::{CkCommand, CkMode, GenCommand, GlobalArgs, OracleCommand, RebpCommand};

fn join(values: &[Rat]) -> String {
    values.iter().map(format_compact).collect::<Vec<_>>().join(" ")
}

fn print_ck(out: &mut dyn Write, inst: &CkInstance, sol: &CkSolution) -> Result<(), Error> {
    writeln!(out, "value {}", format_compact(&sol.value))?;
    writeln!(out, "x {}", join(&inst.x_in_input_order(sol)))?;
    let mut full: Vec<usize> = sol.full_set.iter().map(|&k| inst.source_index(k)).collect();
    full.sort_unstable();
    let full: Vec<String> = full.iter().map(usize::to_string).collect();
    writeln!(out, "full {}", full.join(" "))?;
    match sol.fractional_item {
        Some(f) => writeln!(out, "fractional {}", inst.source_index(f))?,
        None => writeln!(out, "fractional none")?,
    }
    Ok(())
}

pub fn ck(g: &GlobalArgs, cmd: CkCommand, out: &mut dyn Write) -> Result<(), Error> {
    match cmd {
        CkCommand::Solve { instance, mode } => {
            let inst = read_ck(&instance)?;
            let sol = match mode {
                CkMode::Exact => solve_dp(&inst)?,
                CkMode::Fptas => solve_fptas(&inst, &g.epsilon()?)?,
            };
            print_ck(out, &inst, &sol)
        }
        CkCommand::Fptas { instance } => {
            let inst = read_ck(&instance)?;
            let sol = solve_fptas(&inst, &g.epsilon()?)?;
            print_ck(out, &inst, &sol)
        }
        CkCommand::Oracle { instance } => {
            let inst = read_ck(&instance)?;
            print_ck(out, &inst, &brute_force_ck(&inst)?)
        }
        CkCommand::ExportSos2 { instance, output } => {
            let inst = read_ck(&instance)?;
            export_sos2(&inst, &output)?;
            writeln!(out, "wrote {}", output.display())?;
            Ok(())
        }
    }
}

fn print_packing(out: &mut dyn Write, packing: &Packing) -> Result<(), Error> {
    for (j, items) in packing.bins().iter().enumerate() {
        if packing.open()[j] {
            let items: Vec<String> = items.iter().map(usize::to_string).collect();
            writeln!(out, "bin {j}: {}", items.join(" "))?;
        }
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| {
        Error::Instance(InstanceError::Io {
            path: path.display().to_string(),
            source,
        })
    })
}

pub fn rebp(g: &GlobalArgs, cmd: RebpCommand, out: &mut dyn Write) -> Result<(), Error> {
    match cmd {
        RebpCommand::Solve {
            instance,
            trace,
            save_packing,
            exact_separation,
            iteration_limit,
        } => {
            let inst = read_rebp(&instance)?;
            let config = RcgConfig {
                tau0: g.tau0()?,
                tau1: g.tau1()?,
                separation: if exact_separation {
                    SeparationSchedule::ExactOnly
                } else {
                    SeparationSchedule::ApproximateThenExact(g.epsilon()?)
                },
                iteration_limit,
                time_limit: g.time_limit()?,
                cuts: g.cut_set(),
                solver: g.master_solver()?,
                ..RcgConfig::default()
            };
            let result = solve_rebp(&inst, &config)?;
            writeln!(out, "objective {}", format_compact(&result.robust_objective))?;
            writeln!(
                out,
                "master_objective {}",
                format_compact(&result.solution.objective)
            )?;
            writeln!(out, "open_bins {}", result.solution.packing.open_count())?;
            writeln!(out, "termination {}", result.termination.as_str())?;
            writeln!(out, "iterations {}", result.trace.records.len())?;
            writeln!(out, "pool {}", result.pool.len())?;
            writeln!(out, "worst_case {}", join(result.worst_case.values()))?;
            print_packing(out, &result.solution.packing)?;
            if let Some(path) = save_packing {
                let text =
                    packing_file::render(&result.solution.packing, Some(&result.solution.theta));
                write_file(&path, &text)?;
            }
            let csv = result.trace.to_csv();
            match trace {
                Some(path) => write_file(&path, &csv)?,
                None => {
                    writeln!(out)?;
                    write!(out, "{csv}")?;
                }
            }
            Ok(())
        }
        RebpCommand::Oracle { instance } => rebp_oracle(&read_rebp(&instance)?, out),
        RebpCommand::Separate {
            instance,
            packing,
            theta,
            approximate,
        } => {
            let inst = read_rebp(&instance)?;
            let file = packing_file::read(&packing, inst.bin_count())?;
            let theta = match theta {
                Some(t) => GlobalArgs::rational("theta", &t)?,
                None => file.theta.unwrap_or_default(),
            };
            let mode = if approximate {
                SeparationMode::Approximate(g.epsilon()?)
            } else {
                SeparationMode::Exact
            };
            let sep = separate(&inst, &file.packing, &theta, &mode)?;
            writeln!(out, "eta {}", format_compact(&sep.eta))?;
            writeln!(out, "theta {}", format_compact(&theta))?;
            writeln!(out, "violated {}", sep.violated)?;
            writeln!(out, "mode {}", if sep.mode.is_exact() { "exact" } else { "approximate" })?;
            writeln!(out, "scenario {}", join(sep.scenario.values()))?;
            Ok(())
        }
    }
}

fn rebp_oracle(inst: &RebpInstance, out: &mut dyn Write) -> Result<(), Error> {
    let best = robust_brute_force(inst)?;
    writeln!(out, "objective {}", format_compact(&best.objective))?;
    writeln!(out, "open_bins {}", best.packing.open_count())?;
    writeln!(out, "worst_case {}", join(best.worst_case.values()))?;
    print_packing(out, &best.packing)
}

pub fn oracle(cmd: OracleCommand, out: &mut dyn Write) -> Result<(), Error> {
    match cmd {
        OracleCommand::Ck { instance } => {
            let inst = read_ck(&instance)?;
            print_ck(out, &inst, &brute_force_ck(&inst)?)
        }
        OracleCommand::Rebp { instance } => rebp_oracle(&read_rebp(&instance)?, out),
        OracleCommand::Vertices { instance, maximal } => {
            let inst = read_rebp(&instance)?;
            let dev: Vec<Rat> = inst.items().iter().map(|it| it.deviation.clone()).collect();
            let vertices: Vec<Scenario> = if maximal {
                maximal_vertices(&dev, inst.budget())?
            } else {
                enumerate_uomega_vertices(&dev, inst.budget())?
            };
            writeln!(out, "count {}", vertices.len())?;
            for v in &vertices {
                writeln!(out, "{}", join(v.values()))?;
            }
            Ok(())
        }
    }
}

fn layout_path(root: &Path, parts: &[String]) -> PathBuf {
    let mut path = root.join(format!("v{FORMAT_VERSION}"));
    for p in parts {
        path.push(p);
    }
    path
}

pub fn gen(g: &GlobalArgs, cmd: GenCommand, out: &mut dyn Write) -> Result<(), Error> {
    match cmd {
        GenCommand::Ck { n, r, i, out_dir } => {
            let experiments: Vec<u32> = match i {
                Some(i) => vec![i],
                None if out_dir.is_some() => (1..=CK_EXPERIMENTS).collect(),
                None => {
                    return Err(Error::Usage(
                        "gen ck without --i writes thirty files and needs --out-dir".into(),
                    ))
                }
            };
            for experiment in experiments {
                let spec = CkGenSpec {
                    n,
                    r,
                    experiment,
                    seed: g.seed,
                };
                let inst = gen_ck(&spec)?;
                match &out_dir {
                    Some(root) => {
                        let path = layout_path(
                            root,
                            &[
                                "ck".into(),
                                format!("R{r}"),
                                format!("n{n}"),
                                format!("i{experiment:02}-s{}.ck", g.seed),
                            ],
                        );
                        write_ck(&path, &inst)?;
                        writeln!(out, "{}", path.display())?;
                    }
                    None => write!(out, "{}", render_ck(&inst))?,
                }
            }
            Ok(())
        }
        GenCommand::Rebp {
            nominal,
            count,
            a_max,
            bins,
            deviation_ratio,
            capacity_divisor,
            budget_ratio,
            cost_factor,
            out_dir,
        } => {
            let source = match (nominal, count) {
                (Some(list), _) => NominalSource::Given(
                    list.split(',')
                        .map(|t| GlobalArgs::rational("nominal", t))
                        .collect::<Result<_, _>>()?,
                ),
                (None, Some(count)) => NominalSource::Synthetic { count, a_max },
                (None, None) => {
                    return Err(Error::Usage("gen rebp needs --nominal or --count".into()))
                }
            };
            let tag = match &source {
                NominalSource::Given(v) => format!("given/m{}", v.len()),
                NominalSource::Synthetic { count, a_max } => format!("amax{a_max}/m{count}"),
            };
            let spec = RebpGenSpec {
                nominal: source,
                bin_count: bins,
                deviation_ratio: GlobalArgs::rational("deviation-ratio", &deviation_ratio)?,
                capacity_divisor: GlobalArgs::rational("capacity-divisor", &capacity_divisor)?,
                budget_ratio: GlobalArgs::rational("budget-ratio", &budget_ratio)?,
                cost_factor: GlobalArgs::rational("cost-factor", &cost_factor)?,
                seed: g.seed,
            };
            let generated = gen_rebp(&spec)?;
            match out_dir {
                Some(root) => {
                    let mut parts = vec!["rebp".to_string()];
                    parts.extend(tag.split('/').map(str::to_string));
                    parts.push(format!("s{}.rebp", g.seed));
                    let path = layout_path(&root, &parts);
                    write_rebp(&path, &generated.instance)?;
                    writeln!(out, "{}", path.display())?;
                }
                None => write!(out, "{}", render_rebp(&generated.instance))?,
            }
            eprintln!("a_max {}", format_compact(&generated.a_max));
            Ok(())
        }
    }
}
