//! Benchmark sweeps. Per-instance rows go to CSV; the Avg/Max/Limit summary
//! goes to standard error as a table.
//!
//! Instance seeds are `seed·100000 + R + i` for knapsacks and
//! `seed·100000 + k` for the k-th bin packing instance.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rebp_core::instances::{
    budget_multiplier, gen_ck, gen_rebp, CkGenSpec, NominalSource, RebpGenSpec, CK_EXPERIMENTS,
};
use rebp_core::knapsack::{solve_dp, solve_fptas_with, DpLimits};
use rebp_core::rational::{format_compact, Rat};
use rebp_core::rcg::{solve_rebp, RcgConfig, Termination};
use rebp_core::Error;

use crate::report::render_table;
use crate::{BenchCommand, GlobalArgs};

const CK_RANGES: [u64; 3] = [100, 1_000, 10_000];

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Average, maximum, and count over the limit (or failed) of one timing column.
struct Summary {
    label: String,
    times: Vec<f64>,
    limited: usize,
}

impl Summary {
    fn row(&self) -> Vec<String> {
        let n = self.times.len().max(1) as f64;
        let avg = self.times.iter().sum::<f64>() / n;
        let max = self.times.iter().cloned().fold(0.0, f64::max);
        vec![
            self.label.clone(),
            format!("{avg:.3}"),
            format!("{max:.3}"),
            self.limited.to_string(),
        ]
    }
}

fn print_summary(summaries: &[Summary]) {
    let mut rows = vec![vec![
        "cell".to_string(),
        "Avg".to_string(),
        "Max".to_string(),
        "Limit".to_string(),
    ]];
    rows.extend(summaries.iter().map(Summary::row));
    eprint!("{}", render_table(&rows));
}

fn open_sink<'a>(
    path: &Option<PathBuf>,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>, Error> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(stdout),
    })
}

pub fn run(g: &GlobalArgs, cmd: BenchCommand, out: &mut dyn Write) -> Result<(), Error> {
    match cmd {
        BenchCommand::Ck { n, r, out: path } => bench_ck(g, n, r, open_sink(&path, out)?),
        BenchCommand::Rebp {
            count,
            a_max,
            instances,
            out: path,
        } => bench_rebp(g, count, a_max, instances, open_sink(&path, out)?),
    }
}

struct CkRow {
    fields: Vec<String>,
    dp_ms: f64,
    fptas_ms: f64,
    dp_limited: bool,
    fptas_limited: bool,
}

fn ck_row(g: &GlobalArgs, n: usize, r: u64, i: u32, eps: &Rat, limit: Option<Duration>) -> CkRow {
    let seed = g.seed.wrapping_mul(100_000).wrapping_add(r + u64::from(i));
    let spec = CkGenSpec {
        n,
        r,
        experiment: i,
        seed,
    };
    let over = |d: Duration| limit.is_some_and(|l| d > l);
    let mut fields = vec![
        r.to_string(),
        i.to_string(),
        budget_multiplier(i).to_string(),
        n.to_string(),
        seed.to_string(),
    ];
    let inst = match gen_ck(&spec) {
        Ok(inst) => inst,
        Err(e) => {
            let status = format!("error:{}", Error::from(e).category().name());
            fields.extend(["", "", "", "", "", &status].map(String::from));
            return CkRow {
                fields,
                dp_ms: 0.0,
                fptas_ms: 0.0,
                dp_limited: true,
                fptas_limited: true,
            };
        }
    };
    let mut status = Vec::new();
    let t = Instant::now();
    let dp = solve_dp(&inst);
    let dp_time = t.elapsed();
    let t = Instant::now();
    let fptas = solve_fptas_with(&inst, eps, DpLimits::default());
    let fptas_time = t.elapsed();
    let dp_limited = dp.is_err() || over(dp_time);
    let fptas_limited = fptas.is_err() || over(fptas_time);
    let dp_value = match dp {
        Ok(s) => format_compact(&s.value),
        Err(e) => {
            status.push(format!("dp-error:{}", Error::from(e).category().name()));
            String::new()
        }
    };
    let (fptas_value, rows) = match fptas {
        Ok(o) => (format_compact(&o.solution.value), o.table_rows.to_string()),
        Err(e) => {
            status.push(format!("fptas-error:{}", Error::from(e).category().name()));
            (String::new(), String::new())
        }
    };
    if over(dp_time) || over(fptas_time) {
        status.push("limit".into());
    }
    if status.is_empty() {
        status.push("ok".into());
    }
    fields.extend([
        dp_value,
        format!("{:.3}", millis(dp_time)),
        fptas_value,
        format!("{:.3}", millis(fptas_time)),
        rows,
        status.join("+"),
    ]);
    CkRow {
        fields,
        dp_ms: millis(dp_time),
        fptas_ms: millis(fptas_time),
        dp_limited,
        fptas_limited,
    }
}

fn bench_ck(g: &GlobalArgs, n: usize, ranges: Vec<u64>, sink: Box<dyn Write + '_>) -> Result<(), Error> {
    if n == 0 {
        return Err(Error::Usage("--n must be positive".into()));
    }
    let eps = g.epsilon()?;
    let limit = g.time_limit()?;
    let ranges = if ranges.is_empty() { CK_RANGES.to_vec() } else { ranges };
    let mut writer = csv::Writer::from_writer(sink);
    writer
        .write_record([
            "R", "i", "k", "n", "seed", "dp_value", "dp_ms", "fptas_value", "fptas_ms",
            "fptas_rows", "status",
        ])
        .map_err(csv_error)?;
    let mut summaries = Vec::new();
    for r in ranges {
        let rows: Vec<CkRow> = (1..=CK_EXPERIMENTS)
            .into_par_iter()
            .map(|i| ck_row(g, n, r, i, &eps, limit))
            .collect();
        for row in &rows {
            writer.write_record(&row.fields).map_err(csv_error)?;
        }
        summaries.push(Summary {
            label: format!("R={r} dp ms"),
            times: rows.iter().map(|x| x.dp_ms).collect(),
            limited: rows.iter().filter(|x| x.dp_limited).count(),
        });
        summaries.push(Summary {
            label: format!("R={r} fptas ms"),
            times: rows.iter().map(|x| x.fptas_ms).collect(),
            limited: rows.iter().filter(|x| x.fptas_limited).count(),
        });
    }
    writer.flush()?;
    print_summary(&summaries);
    Ok(())
}

fn bench_rebp(
    g: &GlobalArgs,
    count: usize,
    a_max: u64,
    instances: usize,
    sink: Box<dyn Write + '_>,
) -> Result<(), Error> {
    let config = RcgConfig {
        tau0: g.tau0()?,
        tau1: g.tau1()?,
        separation: rebp_core::rcg::SeparationSchedule::ApproximateThenExact(g.epsilon()?),
        time_limit: g.time_limit()?,
        cuts: g.cut_set(),
        solver: g.master_solver()?,
        ..RcgConfig::default()
    };
    let results: Vec<(Vec<String>, f64, bool)> = (0..instances)
        .into_par_iter()
        .map(|k| {
            let seed = g.seed.wrapping_mul(100_000).wrapping_add(k as u64);
            let spec = RebpGenSpec::new(NominalSource::Synthetic { count, a_max }, seed);
            let mut fields = vec![k.to_string(), seed.to_string(), count.to_string(), a_max.to_string()];
            let start = Instant::now();
            let outcome = gen_rebp(&spec)
                .map_err(Error::from)
                .and_then(|gen| solve_rebp(&gen.instance, &config).map_err(Error::from));
            let ms = millis(start.elapsed());
            match outcome {
                Ok(res) => {
                    let limited = res.termination != Termination::Converged;
                    fields.extend([
                        format_compact(&res.robust_objective),
                        format_compact(&res.solution.objective),
                        res.solution.packing.open_count().to_string(),
                        res.trace.records.len().to_string(),
                        res.pool.len().to_string(),
                        format!("{ms:.3}"),
                        res.termination.as_str().to_string(),
                    ]);
                    (fields, ms, limited)
                }
                Err(e) => {
                    let status = format!("error:{}", e.category().name());
                    fields.extend(["", "", "", "", "", &format!("{ms:.3}"), &status].map(String::from));
                    (fields, ms, true)
                }
            }
        })
        .collect();
    let mut writer = csv::Writer::from_writer(sink);
    writer
        .write_record([
            "instance", "seed", "m", "a_max", "objective", "master_objective", "open_bins",
            "iterations", "pool_size", "time_ms", "status",
        ])
        .map_err(csv_error)?;
    for (fields, _, _) in &results {
        writer.write_record(fields).map_err(csv_error)?;
    }
    writer.flush()?;
    print_summary(&[Summary {
        label: format!("m={count} a_max={a_max} ms"),
        times: results.iter().map(|r| r.1).collect(),
        limited: results.iter().filter(|r| r.2).count(),
    }]);
    Ok(())
}
