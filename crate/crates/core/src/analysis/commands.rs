//! File-in, file-out wrappers used by the binary. Each writes into an output
//! directory (created if missing) and returns what it wrote.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{
    bench, compare, fit_model, load_model, parse_range, save_model, BenchReport, Comparison, FitOptions, ModelKind,
};
use crate::error::Result;
use crate::scenario::{generate, preset_by_name, read_csv, write_csv};

fn write_json(value: &impl Serialize, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerateOutput {
    pub data: PathBuf,
    pub spec: PathBuf,
}

/// Writes `<preset>.csv` and the resolved `<preset>.spec.json`. `seed`
/// replaces the preset's noise seed.
pub fn cmd_generate(preset: &str, seed: Option<u64>, out: &Path) -> Result<GenerateOutput> {
    let mut spec = preset_by_name(preset)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let series = generate(&spec)?;
    out_dir(out)?;
    let data = out.join(format!("{preset}.csv"));
    let spec_path = out.join(format!("{preset}.spec.json"));
    write_csv(&spec.field, &series, &data)?;
    write_json(&spec, &spec_path)?;
    Ok(GenerateOutput { data, spec: spec_path })
}

/// Fits on the training segment of `data`; writes the model (to `model`, or
/// `<out>/<kind>_model.json`) and `<out>/<kind>_fit_report.json`.
pub fn cmd_fit(
    kind: ModelKind,
    data: &Path,
    opts: &FitOptions,
    out: &Path,
    model: Option<&Path>,
) -> Result<(PathBuf, PathBuf, super::FitSummary)> {
    let (field, series) = read_csv(data)?;
    let (file, summary) = fit_model(kind, &field, &series, opts)?;
    out_dir(out)?;
    let model_path = model.map_or_else(|| out.join(format!("{kind}_model.json")), Path::to_path_buf);
    let report_path = out.join(format!("{kind}_fit_report.json"));
    save_model(&file, &model_path)?;
    write_json(&summary, &report_path)?;
    Ok((model_path, report_path, summary))
}

/// Writes `<out>/predictions.csv`: `step,time,PRD:<name>…` for the requested
/// half-open step range (`START:END`, default all). The model always runs
/// from step 0 so CRM recursions continue through earlier steps.
pub fn cmd_predict(model: &Path, data: &Path, range: Option<&str>, out: &Path) -> Result<PathBuf> {
    let file = load_model(model)?;
    let (field, series) = read_csv(data)?;
    let n = series.n_steps();
    let (start, end) = parse_range(range.unwrap_or(":"), n)?;
    let pred = file.predict(&field, &series)?;
    let mut text = String::from("step,time");
    for name in file.output_names() {
        text.push_str(&format!(",PRD:{name}"));
    }
    text.push('\n');
    for k in start..end {
        text.push_str(&format!("{k},{}", series.times[k]));
        for v in pred.row(k) {
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    out_dir(out)?;
    let path = out.join("predictions.csv");
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Writes `<out>/comparison.json` and the tidy `<out>/comparison.csv`.
pub fn cmd_compare(data: &Path, opts: &FitOptions, out: &Path) -> Result<(Comparison, PathBuf, PathBuf)> {
    let (field, series) = read_csv(data)?;
    let source = data
        .file_name()
        .map_or_else(|| data.display().to_string(), |s| s.to_string_lossy().into_owned());
    let cmp = compare(&source, &field, &series, opts)?;
    out_dir(out)?;
    let report = out.join("comparison.json");
    let tidy = out.join("comparison.csv");
    write_json(&cmp.report, &report)?;
    std::fs::write(&tidy, cmp.tidy_csv())?;
    Ok((cmp, report, tidy))
}

/// Writes `<out>/bench.json`.
pub fn cmd_bench(presets: &[String], repeats: usize, opts: &FitOptions, out: &Path) -> Result<(BenchReport, PathBuf)> {
    let report = bench(presets, repeats, opts)?;
    out_dir(out)?;
    let path = out.join("bench.json");
    write_json(&report, &path)?;
    Ok((report, path))
}
