//! CSV and JSON formats.
//!
//! Outbreak CSV:
//!
//! ```text
//! # population: 120
//! label,infection_time,removal_time
//! 1,,0
//! 2,,13
//! ```
//!
//! The `infection_time` column is optional; an empty cell marks an
//! unobserved time. Either every row has an infection time (a complete
//! outbreak) or none does (removal times only). The population size comes
//! from a `# population: N` comment line or from the caller.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcmc::{ChainOutput, EpidemicData};
use crate::outbreak::{Outbreak, RemovalDataset};

pub const SCHEMA_VERSION: u32 = 1;

fn parse_error(path: Option<&Path>, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.map(Path::to_path_buf),
        line,
        message: message.into(),
    }
}

fn population_comment(text: &str, path: Option<&Path>) -> Result<Option<usize>> {
    for (k, line) in text.lines().enumerate() {
        let Some(rest) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        let Some((key, value)) = rest.split_once(':') else {
            continue;
        };
        if key.trim().eq_ignore_ascii_case("population") {
            let n = value
                .trim()
                .parse::<usize>()
                .map_err(|_| parse_error(path, k as u64 + 1, format!("bad population `{}`", value.trim())))?;
            return Ok(Some(n));
        }
    }
    Ok(None)
}

fn parse_time(cell: &str, column: &str, path: Option<&Path>, line: u64) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| parse_error(path, line, format!("{column} `{cell}` is not a number")))?;
    if !v.is_finite() {
        return Err(parse_error(path, line, format!("{column} `{cell}` is not finite")));
    }
    Ok(v)
}

/// Parses an outbreak CSV. `population` overrides the comment line.
pub fn parse_csv_str(text: &str, population: Option<usize>) -> Result<EpidemicData> {
    parse_csv_impl(text, population, None)
}

fn parse_csv_impl(text: &str, population: Option<usize>, path: Option<&Path>) -> Result<EpidemicData> {
    let from_comment = population_comment(text, path)?;
    let population = population
        .or(from_comment)
        .ok_or_else(|| Error::InvalidData("population size missing: add `# population: N` or pass it".into()))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let removal_col = find("removal_time").ok_or_else(|| parse_error(path, 1, "missing `removal_time` column"))?;
    let infection_col = find("infection_time");
    let label_col = find("label");

    let mut infections: Vec<Option<f64>> = Vec::new();
    let mut removals = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let label = label_col
            .and_then(|c| record.get(c))
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .unwrap_or_else(|| (removals.len() + 1).to_string());
        let r = parse_time(&record[removal_col], "removal_time", path, line)?;
        let i = match infection_col.map(|c| &record[c]) {
            None | Some("") => None,
            Some(cell) => {
                let i = parse_time(cell, "infection_time", path, line)?;
                if r <= i {
                    return Err(parse_error(
                        path,
                        line,
                        format!("case {label}: removal time {r} is not after infection time {i}"),
                    ));
                }
                Some(i)
            }
        };
        infections.push(i);
        removals.push(r);
        lines.push(line);
    }
    if removals.is_empty() {
        return Err(parse_error(path, 1, "no data rows"));
    }
    let observed = infections.iter().filter(|i| i.is_some()).count();
    if observed == removals.len() {
        let infections = infections.into_iter().map(|i| i.expect("observed")).collect();
        Ok(EpidemicData::Complete(Outbreak::new(population, infections, removals)?))
    } else if observed == 0 {
        if let Some(k) = removals.windows(2).position(|w| w[1] < w[0]) {
            return Err(parse_error(path, lines[k + 1], "removal times must be sorted ascending"));
        }
        let label = path
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(EpidemicData::Removals(RemovalDataset::new(removals, population, label)?))
    } else {
        let k = infections.iter().position(|i| i.is_none()).expect("some missing");
        Err(parse_error(
            path,
            lines[k],
            "infection times must be given for every case or for none",
        ))
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::File {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_csv(path: impl AsRef<Path>, population: Option<usize>) -> Result<EpidemicData> {
    let path = path.as_ref();
    parse_csv_impl(&read_file(path)?, population, Some(path))
}

/// Serializes either dataset kind; times use the shortest representation
/// that parses back to the same value.
pub fn to_csv_string(data: &EpidemicData) -> String {
    let mut out = format!("# population: {}\n", data.population());
    match data {
        EpidemicData::Complete(o) => {
            out.push_str("label,infection_time,removal_time\n");
            for (k, (i, r)) in o.infection_times().iter().zip(o.removal_times()).enumerate() {
                out.push_str(&format!("{},{i},{r}\n", k + 1));
            }
        }
        EpidemicData::Removals(d) => {
            out.push_str("label,removal_time\n");
            for (k, r) in d.removal_times().iter().enumerate() {
                out.push_str(&format!("{},{r}\n", k + 1));
            }
        }
    }
    out
}

pub fn save_csv(path: impl AsRef<Path>, data: &EpidemicData) -> Result<()> {
    write_file(path.as_ref(), to_csv_string(data).as_bytes())
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    Ok(serde_json::from_str(&read_file(path)?)?)
}

pub fn save_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    write_file(path.as_ref(), &text)
}

/// Envelope for every result written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub schema_version: u32,
    pub kind: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub result: T,
}

impl<T> Report<T> {
    pub fn new(kind: impl Into<String>, seed: Option<u64>, config: serde_json::Value, result: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: kind.into(),
            seed,
            config,
            result,
        }
    }
}

/// Kept samples as CSV: iteration, parameters, initial case (1-based), its
/// infection time and the log augmented likelihood.
pub fn write_trace<W: Write>(out: W, chain: &ChainOutput) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let first = chain.samples.first().map(|s| s.params);
    let has_p = first.is_some_and(|p| p.exponent.is_some());
    let has_b = first.is_some_and(|p| p.decay.is_some());
    let mut header = vec!["iteration", "beta", "removal_rate"];
    if has_p {
        header.push("p");
    }
    if has_b {
        header.push("b");
    }
    header.extend(["initial_case", "initial_time", "log_aug_lik"]);
    w.write_record(&header)?;
    for s in &chain.samples {
        let mut row = vec![s.iteration.to_string(), s.params.beta.to_string(), s.params.removal_rate.to_string()];
        if has_p {
            row.push(s.params.exponent.unwrap_or(f64::NAN).to_string());
        }
        if has_b {
            row.push(s.params.decay.unwrap_or(f64::NAN).to_string());
        }
        row.push((s.initial_case + 1).to_string());
        row.push(s.initial_time.to_string());
        row.push(s.log_lik.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_trace(path: impl AsRef<Path>, chain: &ChainOutput) -> Result<()> {
    let mut buf = Vec::new();
    write_trace(&mut buf, chain)?;
    write_file(path.as_ref(), &buf)
}

/// Resolves `name` inside `dir`, or returns it unchanged when absolute.
pub fn output_path(dir: Option<&Path>, name: &Path) -> PathBuf {
    match dir {
        Some(d) if name.is_relative() => d.join(name),
        _ => name.to_path_buf(),
    }
}
