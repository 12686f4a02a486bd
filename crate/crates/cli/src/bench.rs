use anyhow::{Context, Result};
use serde::Serialize;

use qmitm::genbench::{self, Problem, ScalingConfig, ScalingReport, SizeSummary};

use crate::report::print_json;
use crate::BenchArgs;

#[derive(Serialize)]
struct BenchSummary<'a> {
    command: &'a [String],
    #[serde(flatten)]
    report: &'a ScalingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_ms: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
}

fn table(rows: &[SizeSummary]) {
    eprintln!(
        "{:>6} {:>7} {:>14} {:>14} {:>9} {:>16}",
        "size", "trials", "median_q", "mean_q", "success", "baseline_med_q"
    );
    for s in rows {
        eprintln!(
            "{:>6} {:>7} {:>14.1} {:>14.1} {:>9.3} {:>16}",
            s.size,
            s.trials,
            s.median_queries,
            s.mean_queries,
            s.success_rate,
            s.baseline_median_queries.map_or("-".to_string(), |b| format!("{b:.1}"))
        );
    }
}

pub fn run(a: &BenchArgs, echo: &[String]) -> Result<u8> {
    let problem: Problem = a.problem.parse()?;
    let mut cfg = ScalingConfig::new(problem, a.sizes.clone(), a.trials, a.common.seed);
    cfg.retries = a.common.retries;
    cfg.baseline = !a.no_baseline;
    cfg.subset_size = a.subset_size;
    if let Some(d) = a.d {
        cfg.d = d;
    }
    if let Some(c) = a.c {
        cfg.c = c;
    }
    let report = genbench::run_scaling(&cfg)?;
    let csv = report.to_csv(a.common.timing)?;
    let mut csv_path = None;
    if let Some(prefix) = &a.out {
        let path = prefix.with_extension("csv");
        std::fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
        csv_path = Some(path.display().to_string());
    }
    let summary = BenchSummary {
        command: echo,
        report: &report,
        mean_ms: a.common.timing.then(|| report.sizes.iter().map(|s| s.mean_ms).collect()),
        csv: csv_path,
    };
    if let Some(prefix) = &a.out {
        let path = prefix.with_extension("json");
        std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    table(&report.sizes);
    match (&report.solver_fit, &report.baseline_fit) {
        (Some(s), b) => eprintln!(
            "fitted exponent per unit of {}: solver {:.3} (rms residual {:.3}){}",
            report.size_unit,
            s.beta,
            s.residual,
            b.as_ref().map_or(String::new(), |b| format!(", baseline {:.3}", b.beta))
        ),
        (None, _) => eprintln!("exponent fit needs at least two sizes"),
    }
    print_json(&summary)?;
    Ok(0)
}
