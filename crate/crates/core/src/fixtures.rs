//! Bundled example data.
//!
//! The VTAB per-task accuracies are synthetic: they were chosen to reproduce
//! the published per-category means, normalized category means and average
//! ranks of 16 pretrained representations, not measured. Test-set sizes and
//! categories are the real ones.

use crate::bhm::{ModelPriors, Prior, PriorSpec};
use crate::error::{Error, Result};
use crate::table::{parse_eval_table, EvalTable, InputFormat, LoadOptions, PublishedRow};

pub const VTAB_ACCURACIES: &str = include_str!("../data/vtab_accuracies.csv");
pub const VTAB_TASKS: &str = include_str!("../data/vtab_tasks.csv");
pub const VTAB_PUBLISHED: &str = include_str!("../data/vtab_published.csv");
pub const SIMULATION_COUNTS: &str = include_str!("../data/simulation_counts.csv");
pub const SIMULATION_TASKS: &str = include_str!("../data/simulation_tasks.csv");

/// The six best models by mean accuracy, best first.
pub const VTAB_TOP_SIX: [&str; 6] =
    ["Sup-Rotation-100%", "Sup-Exemplar-100%", "Sup-100%", "Semi-Exemplar-10%", "Semi-Rotation-10%", "Rotation"];

/// 16 models x 19 tasks; counts are `round(accuracy * N)`, half to even.
pub fn vtab_table() -> EvalTable {
    parse_eval_table(
        VTAB_ACCURACIES,
        "vtab_accuracies.csv",
        VTAB_TASKS,
        "vtab_tasks.csv",
        InputFormat::AccuraciesWithSizes,
        &LoadOptions::default(),
    )
    .expect("bundled VTAB fixture is valid")
}

/// Published category and overall means matching [`vtab_table`].
pub fn vtab_published() -> Vec<PublishedRow> {
    parse_published(VTAB_PUBLISHED).expect("bundled summary is valid")
}

/// Two models, three tasks of sizes 200, 10000 and 20000.
pub fn simulation_table() -> EvalTable {
    parse_eval_table(
        SIMULATION_COUNTS,
        "simulation_counts.csv",
        SIMULATION_TASKS,
        "simulation_tasks.csv",
        InputFormat::Counts,
        &LoadOptions::default(),
    )
    .expect("bundled simulation fixture is valid")
}

/// Truncated-normal priors for the two simulated models: model A is
/// centred on (α, β) = (2000, 2000) and model B on (2100, 1900), sd 10.
pub fn simulation_priors() -> PriorSpec {
    let tn = |mean| Prior::TruncatedNormal { mean, sd: 10.0 };
    PriorSpec::uniform(ModelPriors { alpha: tn(2000.0), beta: tn(2000.0) })
        .with_override("B", ModelPriors { alpha: tn(2100.0), beta: tn(1900.0) })
}

/// Parses `model,<category>...,overall` rows of percentages.
pub fn parse_published(text: &str) -> Result<Vec<PublishedRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| parse_error(0, "header", e))?.clone();
    if headers.len() < 2 || &headers[0] != "model" || &headers[headers.len() - 1] != "overall" {
        return Err(Error::Parse {
            path: "published summary".into(),
            row: 1,
            column: "header".into(),
            message: "expected model,<categories...>,overall".into(),
        });
    }
    let mut out = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| parse_error(k + 2, "row", e))?;
        let num = |c: usize| -> Result<f64> { rec[c].parse().map_err(|e| parse_error(k + 2, &headers[c], e)) };
        let category_means =
            (1..headers.len() - 1).map(|c| Ok((headers[c].to_string(), num(c)?))).collect::<Result<Vec<_>>>()?;
        out.push(PublishedRow { model: rec[0].to_string(), category_means, overall: num(headers.len() - 1)? });
    }
    Ok(out)
}

fn parse_error(row: usize, column: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse { path: "published summary".into(), row, column: column.into(), message: e.to_string() }
}
