//! Input file formats.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use renyi_core::block::{BlockLaw, BlockModel, CellPartition};
use renyi_core::density::{self, CostFn, GridDensity, GridSpec, Parametric};
use renyi_core::mixtures::TwoSetUniformBlock;
use renyi_core::typicality::{self, BlockConfig, TypicalSpec};
use renyi_core::ExecPolicy;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParametricInput {
    parametric: Parametric,
    grid: GridSpec,
    #[serde(default)]
    tail_tol: Option<f64>,
}

/// `{"lo", "hi", "weights"}`, or a parametric family quantized on a grid.
pub fn density(path: &Path) -> Result<GridDensity> {
    let v: Value = load(path)?;
    if v.get("parametric").is_some() {
        let p: ParametricInput = serde_json::from_value(v).with_context(|| format!("parsing {}", path.display()))?;
        let grid = GridSpec::new(p.grid.lo, p.grid.hi, p.grid.cells)?;
        return Ok(density::quantize(&p.parametric, grid, p.tail_tol)?);
    }
    serde_json::from_value(v).with_context(|| format!("parsing {}", path.display()))
}

/// A named cost (`quadratic`, `linear`, `abs`), inline JSON, or a JSON file.
pub fn cost_fn(s: &str) -> Result<CostFn> {
    let cost: CostFn = match s {
        "quadratic" => CostFn::Quadratic,
        "linear" => CostFn::Linear,
        "abs" => CostFn::Abs,
        _ if s.trim_start().starts_with('{') => serde_json::from_str(s).context("parsing inline cost JSON")?,
        _ => load(Path::new(s))?,
    };
    cost.validate()?;
    Ok(cost)
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum BlockInput {
    Law { edges: Vec<f64>, n: usize, probs: Vec<f64> },
    Iid { edges: Vec<f64>, n: usize, cell_probs: Vec<f64> },
    TwoSetUniform { edges: Vec<f64>, n: usize, cells0: Vec<usize>, cells1: Vec<usize>, delta: f64 },
    Typical { spec: TypicalSpec, config: Option<BlockConfig> },
}

pub fn block(path: &Path, seed: u64, policy: ExecPolicy) -> Result<Arc<dyn BlockModel>> {
    Ok(match load::<BlockInput>(path)? {
        BlockInput::Law { edges, n, probs } => Arc::new(BlockLaw::new(CellPartition::new(edges)?, n, probs)?),
        BlockInput::Iid { edges, n, cell_probs } => Arc::new(BlockLaw::iid(CellPartition::new(edges)?, n, &cell_probs)?),
        BlockInput::TwoSetUniform { edges, n, cells0, cells1, delta } => {
            Arc::new(TwoSetUniformBlock::new(CellPartition::new(edges)?, n, cells0, cells1, delta)?)
        }
        BlockInput::Typical { spec, config } => {
            spec.validate()?;
            let cfg = BlockConfig { seed, ..config.unwrap_or_default() };
            Arc::new(typicality::build_typical_block_with(&spec, &cfg, policy)?)
        }
    })
}

/// `7`, `7,8,12` or the inclusive range `7..24`.
pub fn window_lengths(s: &str) -> Result<Vec<usize>> {
    let parse = |t: &str| t.trim().parse::<usize>().with_context(|| format!("bad window length {t:?}"));
    let ms = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse(a)?, parse(b)?);
        if a > b {
            bail!("empty window range {s:?}");
        }
        (a..=b).collect()
    } else {
        s.split(',').map(parse).collect::<Result<Vec<_>>>()?
    };
    Ok(ms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_length_syntax() {
        assert_eq!(window_lengths("7..9").unwrap(), [7, 8, 9]);
        assert_eq!(window_lengths("12").unwrap(), [12]);
        assert_eq!(window_lengths("7, 12").unwrap(), [7, 12]);
        assert!(window_lengths("9..7").is_err());
        assert!(window_lengths("x").is_err());
    }

    #[test]
    fn named_and_inline_costs() {
        assert!(matches!(cost_fn("abs").unwrap(), CostFn::Abs));
        let c = cost_fn(r#"{"kind": "affine", "slope": 2, "intercept": 1}"#).unwrap();
        assert_eq!(c.eval(1.0), 3.0);
        assert!(cost_fn("/nonexistent.json").is_err());
    }
}
