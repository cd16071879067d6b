//! Run configuration: one JSON document, overridden field-by-field by
//! command-line flags (flags win; built-in defaults apply last).

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sll_core::geometry::DomainSpec;
use sll_core::lab::{DivMode, OperatorKind};

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub richardson: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worker_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fast: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projected_div: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_timestamps: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {path}"))?;
        if text.trim().is_empty() {
            bail!("config file {path} is empty: expected a JSON object");
        }
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("config file {path} is not valid JSON"))?;
        Ok(cfg)
    }

    /// Layer `flags` (command line) over `self` (config file): any field the
    /// flags set wins.
    pub fn overridden_by(mut self, flags: RunConfig) -> RunConfig {
        macro_rules! take {
            ($f:ident) => {
                if flags.$f.is_some() {
                    self.$f = flags.$f;
                }
            };
        }
        take!(command);
        take!(sub);
        take!(domain);
        take!(op);
        take!(mu);
        take!(lambda);
        take!(lambda_grid);
        take!(k);
        take!(levels);
        take!(base_level);
        take!(modes);
        take!(analytic);
        take!(richardson);
        take!(output_dir);
        take!(format);
        take!(worker_count);
        take!(fast);
        take!(projected_div);
        take!(no_timestamps);
        take!(seed);
        self
    }

    pub fn domain_spec(&self) -> Result<DomainSpec> {
        parse_domain(self.domain.as_deref().unwrap_or("square"))
    }

    pub fn operator(&self) -> Result<OperatorKind> {
        let name = self
            .op
            .as_deref()
            .ok_or_else(|| anyhow!("missing operator: pass --op <name>"))?;
        OperatorKind::parse_cli(name).ok_or_else(|| {
            anyhow!(
                "unknown operator {name:?}; expected one of lame_dirichlet, lame_traction, \
                 stokes_dirichlet, stokes_cauchy, laplace_vec_dirichlet, laplace_vec_traction, \
                 scalar_dirichlet, scalar_neumann, buckling_dirichlet, clamped_plate"
            )
        })
    }

    pub fn div_mode(&self) -> Result<DivMode> {
        Ok(match self.projected_div.as_deref().unwrap_or("auto") {
            "on" => DivMode::Projected,
            "off" => DivMode::Plain,
            "auto" => DivMode::Auto,
            other => bail!("--projected-div must be on|off|auto, got {other:?}"),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu.unwrap_or(1.0)
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(6)
    }

    pub fn levels(&self) -> usize {
        self.levels.unwrap_or(3)
    }

    pub fn base_level(&self) -> usize {
        self.base_level.unwrap_or(1)
    }

    pub fn workers(&self) -> usize {
        self.worker_count.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(sll_core::eigen::DEFAULT_SEED)
    }

    pub fn no_timestamps(&self) -> bool {
        self.no_timestamps.unwrap_or(false)
    }

    pub fn json_format(&self) -> Result<bool> {
        match self.format.as_deref().unwrap_or("csv") {
            "csv" => Ok(false),
            "json" => Ok(true),
            other => bail!("--format must be csv|json, got {other:?}"),
        }
    }
}

pub fn parse_domain(s: &str) -> Result<DomainSpec> {
    if s == "square" {
        return Ok(DomainSpec::unit_square());
    }
    if s == "disk" {
        return Ok(DomainSpec::unit_disk());
    }
    if let Some(r) = s.strip_prefix("annulus:") {
        let r: f64 = r
            .parse()
            .map_err(|e| anyhow!("bad annulus inner radius {r:?}: {e}"))?;
        return Ok(DomainSpec::annulus(r)?);
    }
    if let Some(path) = s.strip_prefix("polygon:") {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read polygon file {path}"))?;
        let mut pts = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let xy: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| anyhow!("polygon file {path} line {}: {e}", ln + 1))?;
            if xy.len() != 2 {
                bail!("polygon file {path} line {}: expected `x y`", ln + 1);
            }
            pts.push([xy[0], xy[1]]);
        }
        return Ok(DomainSpec::polygon(pts)?);
    }
    bail!("unknown domain {s:?}; expected square | disk | annulus:R | polygon:FILE")
}

pub fn parse_lambda_grid(s: &str) -> Result<Vec<f64>> {
    let grid: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow!("bad --lambda-grid {s:?}: {e}"))?;
    if grid.is_empty() {
        bail!("--lambda-grid must contain at least one value");
    }
    Ok(grid)
}
