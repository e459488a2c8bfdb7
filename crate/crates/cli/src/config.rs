//! TOML experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;

use jcurves::acs::{gallery, ParamValue, Params, StructureField};
use jcurves::cauchy_green::{NormParams, PlaneGrid};
use jcurves::curve::SolverSettings;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub structure: StructureSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub norms: NormsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSection {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { radius: 8.0, points: 65 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsSection {
    pub gamma: f64,
    pub p: f64,
    pub epsilon0: f64,
    pub theta: f64,
}

impl Default for NormsSection {
    fn default() -> Self {
        let d = NormParams::default();
        Self { gamma: d.gamma, p: d.p, epsilon0: d.epsilon0, theta: d.theta }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub max_iter: usize,
    pub tol_fixed_point: f64,
    pub tol_residual: f64,
    pub admissibility_lambda: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverSettings::default();
        Self {
            max_iter: d.max_iter,
            tol_fixed_point: d.tol_fixed_point,
            tol_residual: d.tol_residual,
            admissibility_lambda: d.admissibility_lambda.unwrap_or(0.05),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridFormat {
    Csv,
    Bin,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub formats: Vec<GridFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: "out".into(), formats: vec![GridFormat::Csv] }
    }
}

/// A config that parsed and passed validation, with the raw text kept for hashing.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub raw: String,
    pub config: ExperimentConfig,
    pub structure: StructureField,
    pub norms: NormParams,
}

impl LoadedConfig {
    pub fn settings(&self, strict_norm: bool) -> SolverSettings {
        let s = &self.config.solver;
        SolverSettings {
            max_iter: s.max_iter,
            tol_fixed_point: s.tol_fixed_point,
            tol_residual: s.tol_residual,
            admissibility_lambda: Some(s.admissibility_lambda),
            strict_norm,
            pair_seed: self.config.seed,
        }
    }
}

pub fn load(path: &Path) -> Result<LoadedConfig, String> {
    let raw = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&raw)
}

pub fn parse(raw: &str) -> Result<LoadedConfig, String> {
    let config: ExperimentConfig = toml::from_str(raw).map_err(|e| format!("config parse error: {e}"))?;
    let params: Params = config.structure.params.clone();
    let structure = gallery::build(&config.structure.family, &params).map_err(|e| format!("structure: {e}"))?;
    let n = &config.norms;
    let norms = NormParams::new(n.gamma, n.p, n.epsilon0, n.theta).map_err(|e| format!("norms: {e}"))?;
    let g = &config.grid;
    PlaneGrid::zeros(g.radius, g.points, 1).map_err(|e| format!("grid: {e}"))?;
    let s = &config.solver;
    if s.max_iter == 0 {
        return Err("solver: need max_iter >= 1".into());
    }
    for (name, v) in [("tol_fixed_point", s.tol_fixed_point), ("tol_residual", s.tol_residual), ("admissibility_lambda", s.admissibility_lambda)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("solver: need {name} > 0, got {v}"));
        }
    }
    if config.output.formats.is_empty() {
        return Err("output: formats must list at least one of \"csv\", \"bin\"".into());
    }
    Ok(LoadedConfig { raw: raw.to_string(), config, structure, norms })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[structure]\nfamily = \"standard\"\n";

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.config.grid.points, 65);
        assert_eq!(c.norms, NormParams::default());
        assert!(c.structure.is_standard());
    }

    #[test]
    fn partial_sections_keep_remaining_defaults() {
        let c = parse(&format!("{MINIMAL}[grid]\nN = 33\n[solver]\ntol_residual = 1e-4\n[norms]\np = 1.25\n")).unwrap();
        assert_eq!((c.config.grid.radius, c.config.grid.points), (8.0, 33));
        let s = c.settings(false);
        assert_eq!((s.tol_residual, s.max_iter), (1e-4, SolverSettings::default().max_iter));
        assert_eq!((c.norms.p, c.norms.gamma, c.norms.theta), (1.25, 0.5, 2.0));
    }

    #[test]
    fn rejects_unknown_keys() {
        let e = parse("[structure]\nfamily = \"standard\"\ncolour = 1\n").unwrap_err();
        assert!(e.contains("colour"), "{e}");
        let e = parse("seeed = 3\n[structure]\nfamily = \"standard\"\n").unwrap_err();
        assert!(e.contains("seeed"), "{e}");
    }

    #[test]
    fn reports_norm_constraint() {
        let e = parse(&format!("{MINIMAL}[norms]\ngamma = 0.5\np = 2.5\nepsilon0 = 0.1\n")).unwrap_err();
        assert!(e.contains("p in (1, 2)"), "{e}");
        let e = parse(&format!("{MINIMAL}[norms]\ngamma = 0.5\np = 1.5\nepsilon0 = 0.1\ntheta = 1.2\n")).unwrap_err();
        assert!(e.contains("theta * p > 2"), "{e}");
    }

    #[test]
    fn rejects_bad_family_and_grid() {
        assert!(parse("[structure]\nfamily = \"mystery\"\n").unwrap_err().contains("mystery"));
        assert!(parse(&format!("{MINIMAL}[grid]\nR = 4.0\nN = 4\n")).unwrap_err().contains("grid"));
    }
}
