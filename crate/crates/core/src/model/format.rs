//! Line-oriented text format for trained models.
//!
//! ```text
//! tifair-model v1
//! kind = linear | kernel
//! dim = <m>
//! feature = <name>            (one per feature column, in order)
//! stat = <name> <mean> <std>  (continuous columns)
//! encoding = <name> <value>   (binary columns; value is the rest of the line)
//! bias = <b>
//! weights = <w₁> … <wₘ>      (linear)
//! gamma = <γ>                 (kernel)
//! support_rows = <n>          (kernel)
//! alpha = <α₁> … <αₙ>        (kernel)
//! support = <x₁> … <xₘ>      (kernel, n lines)
//! end
//! ```
//!
//! Floats are written in shortest round-trip exponent form, so finite values
//! survive a write/read cycle bit for bit.

use std::io::{BufRead, Write};

use super::{KernelModel, LinearModel, Model};
use crate::dataset::{BinaryEncoding, ColumnStats, NormStats};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "tifair-model";

/// A model plus the preprocessing it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: Model,
    pub feature_names: Vec<String>,
    pub stats: NormStats,
}

fn floats(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")
}

pub fn write_model<W: Write>(mut out: W, file: &ModelFile) -> Result<()> {
    let io = |e| Error::io("<model>", e);
    let mut text = String::new();
    let mut line = |s: String| {
        text.push_str(&s);
        text.push('\n');
    };
    if file.feature_names.len() != file.model.dim() {
        return Err(Error::DimensionMismatch {
            expected: file.model.dim(),
            actual: file.feature_names.len(),
        });
    }
    for name in file
        .feature_names
        .iter()
        .chain(file.stats.continuous.iter().map(|c| &c.name))
        .chain(file.stats.binary.iter().map(|c| &c.name))
    {
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::ModelFormat(format!("column name `{name}` cannot be stored")));
        }
    }

    line(format!("{MAGIC} v{FORMAT_VERSION}"));
    let kind = match file.model {
        Model::Linear(_) => "linear",
        Model::Kernel(_) => "kernel",
    };
    line(format!("kind = {kind}"));
    line(format!("dim = {}", file.model.dim()));
    for name in &file.feature_names {
        line(format!("feature = {name}"));
    }
    for c in &file.stats.continuous {
        line(format!("stat = {} {:e} {:e}", c.name, c.mean, c.std));
    }
    for b in &file.stats.binary {
        line(format!("encoding = {} {}", b.name, b.positive));
    }
    match &file.model {
        Model::Linear(m) => {
            line(format!("bias = {:e}", m.bias));
            line(format!("weights = {}", floats(&m.weights)));
        }
        Model::Kernel(m) => {
            line(format!("bias = {:e}", m.bias));
            line(format!("gamma = {:e}", m.gamma));
            line(format!("support_rows = {}", m.support.rows()));
            line(format!("alpha = {}", floats(&m.alpha)));
            for row in m.support.iter_rows() {
                line(format!("support = {}", floats(row)));
            }
        }
    }
    line("end".to_string());
    out.write_all(text.as_bytes()).map_err(io)?;
    Ok(())
}

fn parse_f64(s: &str, key: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::ModelFormat(format!("`{key}`: cannot parse `{s}`")))
}

fn parse_floats(s: &str, key: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(|t| parse_f64(t, key)).collect()
}

pub fn read_model<R: BufRead>(input: R) -> Result<ModelFile> {
    let bad = |msg: String| Error::ModelFormat(msg);
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .map_err(|e| Error::io("<model>", e))?;
    let version = header
        .strip_prefix(MAGIC)
        .and_then(|v| v.trim().strip_prefix('v'))
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| bad(format!("bad header `{header}`")))?;
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }

    let mut kind = None;
    let mut dim = None;
    let mut features = Vec::new();
    let mut stats = NormStats::default();
    let mut bias = None;
    let mut weights = None;
    let mut gamma = None;
    let mut n_support = None;
    let mut alpha = None;
    let mut support_rows: Vec<Vec<f64>> = Vec::new();
    let mut ended = false;

    for line in lines {
        let line = line.map_err(|e| Error::io("<model>", e))?;
        if line.trim() == "end" {
            ended = true;
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(" = ")
            .ok_or_else(|| bad(format!("malformed line `{line}`")))?;
        match key {
            "kind" => kind = Some(value.to_string()),
            "dim" => dim = Some(value.parse::<usize>().map_err(|_| bad(format!("bad dim `{value}`")))?),
            "feature" => features.push(value.to_string()),
            "stat" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                let [name, mean, std] = parts[..] else {
                    return Err(bad(format!("bad stat `{value}`")));
                };
                stats.continuous.push(ColumnStats {
                    name: name.to_string(),
                    mean: parse_f64(mean, key)?,
                    std: parse_f64(std, key)?,
                });
            }
            "encoding" => {
                let (name, positive) = value
                    .split_once(' ')
                    .ok_or_else(|| bad(format!("bad encoding `{value}`")))?;
                stats.binary.push(BinaryEncoding {
                    name: name.to_string(),
                    positive: positive.to_string(),
                });
            }
            "bias" => bias = Some(parse_f64(value, key)?),
            "weights" => weights = Some(parse_floats(value, key)?),
            "gamma" => gamma = Some(parse_f64(value, key)?),
            "support_rows" => {
                n_support = Some(value.parse::<usize>().map_err(|_| bad(format!("bad support_rows `{value}`")))?)
            }
            "alpha" => alpha = Some(parse_floats(value, key)?),
            "support" => support_rows.push(parse_floats(value, key)?),
            other => return Err(bad(format!("unknown key `{other}`"))),
        }
    }
    if !ended {
        return Err(bad("missing `end` line".into()));
    }
    let dim = dim.ok_or_else(|| bad("missing `dim`".into()))?;
    let bias = bias.ok_or_else(|| bad("missing `bias`".into()))?;
    if features.len() != dim {
        return Err(bad(format!("{} feature names for dim {dim}", features.len())));
    }
    let model = match kind.as_deref() {
        Some("linear") => {
            let weights = weights.ok_or_else(|| bad("missing `weights`".into()))?;
            if weights.len() != dim {
                return Err(bad(format!("{} weights for dim {dim}", weights.len())));
            }
            Model::Linear(LinearModel { weights, bias })
        }
        Some("kernel") => {
            let alpha = alpha.ok_or_else(|| bad("missing `alpha`".into()))?;
            let n = n_support.ok_or_else(|| bad("missing `support_rows`".into()))?;
            if support_rows.len() != n || alpha.len() != n {
                return Err(bad(format!(
                    "expected {n} support rows and alphas, got {} and {}",
                    support_rows.len(),
                    alpha.len()
                )));
            }
            let support = if n == 0 {
                Matrix::zeros(0, dim)
            } else {
                Matrix::from_rows(&support_rows)?
            };
            if support.cols() != dim {
                return Err(bad(format!("support rows have {} columns, dim is {dim}", support.cols())));
            }
            let gamma = gamma.ok_or_else(|| bad("missing `gamma`".into()))?;
            Model::Kernel(KernelModel::new(alpha, bias, support, gamma)?)
        }
        other => return Err(bad(format!("unknown kind {other:?}"))),
    };
    Ok(ModelFile {
        model,
        feature_names: features,
        stats,
    })
}
