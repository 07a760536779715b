//! Config files.
//!
//! A config is a TOML document. Top-level `key = value` pairs are the
//! fields of [`SolverConfig`]; any field left out keeps its default. Two
//! extra top-level keys belong to the runner:
//!
//! * `out`: output directory (overridden by `--out`).
//! * `[[sweep]]`: one section per sweep axis with `param` and `values`.
//!   Axes expand to their Cartesian product, first section slowest.
//!
//! ```toml
//! formulation = "pml2"
//! profile = "bermudez"
//! order = 2
//! sigma0 = 3.0
//! tau = 0.001
//!
//! [[sweep]]
//! param = "eps"
//! values = [1.0, 0.5, 0.25]
//! ```

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use kgpml_core::experiment::{SolverConfig, SweepParam};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisSection {
    param: String,
    values: Vec<f64>,
}

/// A parsed config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFile {
    pub solver: SolverConfig,
    pub sweep: Vec<(SweepParam, Vec<f64>)>,
    pub out: Option<PathBuf>,
}

impl RunFile {
    pub fn new(solver: SolverConfig) -> Self {
        Self { solver, sweep: Vec::new(), out: None }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut table: Table = text.parse().context("config is not valid TOML")?;
        let out = match table.remove("out") {
            None => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => bail!("`out` must be a string"),
        };
        let sweep = match table.remove("sweep") {
            None => Vec::new(),
            Some(v) => {
                let sections: Vec<AxisSection> = v.try_into().context("`[[sweep]]` sections need `param` and `values`")?;
                sections
                    .into_iter()
                    .map(|s| Ok((SweepParam::parse(&s.param)?, s.values)))
                    .collect::<Result<_>>()?
            }
        };
        let solver: SolverConfig = Value::Table(table).try_into().context("invalid solver settings")?;
        Ok(Self { solver, sweep, out })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Canonical text: every solver field spelled out, then the sweep sections.
    pub fn to_toml(&self) -> Result<String> {
        let mut table = Table::try_from(&self.solver)?;
        if let Some(out) = &self.out {
            let s = out.to_str().context("output path is not UTF-8")?;
            table.insert("out".into(), Value::String(s.into()));
        }
        if !self.sweep.is_empty() {
            let sections: Vec<AxisSection> = self
                .sweep
                .iter()
                .map(|(p, v)| AxisSection { param: p.name().into(), values: v.clone() })
                .collect();
            table.insert("sweep".into(), Value::try_from(sections)?);
        }
        Ok(toml::to_string(&table)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kgpml_core::experiment::{Formulation, ProfileChoice};

    #[test]
    fn empty_file_is_default() {
        let f = RunFile::parse("").unwrap();
        assert_eq!(f.solver, SolverConfig::default());
        assert!(f.sweep.is_empty());
    }

    #[test]
    fn reads_fields_and_sweep() {
        let f = RunFile::parse(
            "formulation = \"pml1\"\nsigma0 = 6.0\nout = \"o\"\n[[sweep]]\nparam = \"delta\"\nvalues = [0.375, 0.5]\n",
        )
        .unwrap();
        assert_eq!(f.solver.formulation, Formulation::Pml1);
        assert_eq!(f.solver.profile, ProfileChoice::Polynomial);
        assert_eq!(f.solver.sigma0, 6.0);
        assert_eq!(f.out, Some(PathBuf::from("o")));
        assert_eq!(f.sweep, vec![(SweepParam::Delta, vec![0.375, 0.5])]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunFile::parse("sigma = 3.0").is_err());
        assert!(RunFile::parse("[[sweep]]\nparam = \"nodes\"\nvalues = [1.0]").is_err());
    }

    #[test]
    fn canonical_text_reparses() {
        let f = RunFile::parse("tau = 0.002\n[[sweep]]\nparam = \"k\"\nvalues = [0.0, 2.0]\n").unwrap();
        let text = f.to_toml().unwrap();
        assert_eq!(RunFile::parse(&text).unwrap(), f);
    }
}
