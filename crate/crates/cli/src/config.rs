//! Experiment configuration: one flat JSON document whose keys are
//! mirrored by CLI flags, flags winning. Resolution applies defaults and
//! validates everything that can be checked before the graph is loaded.

use std::fs;
use std::path::{Path, PathBuf};

use fairspread_core::{Error, ImmParams, Result, SynthSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub edge_file: Option<PathBuf>,
    pub group_file: Option<PathBuf>,
    pub directed: Option<bool>,
    pub synth_group_sizes: Option<Vec<usize>>,
    pub synth_p_in: Option<f64>,
    pub synth_p_out: Option<f64>,
    pub synth_seed: Option<u64>,
    pub methods: Option<Vec<String>>,
    pub budgets: Option<Vec<usize>>,
    pub epsilon: Option<f64>,
    pub ell: Option<f64>,
    pub r_eval: Option<usize>,
    pub r_myopic: Option<usize>,
    pub theta_override: Option<usize>,
    pub master_seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }

    /// Field-wise overlay; values present in `over` replace this config's.
    pub fn overlay(mut self, over: ExperimentConfig) -> ExperimentConfig {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if over.$field.is_some() { self.$field = over.$field; })*
            };
        }
        take!(
            edge_file,
            group_file,
            directed,
            synth_group_sizes,
            synth_p_in,
            synth_p_out,
            synth_seed,
            methods,
            budgets,
            epsilon,
            ell,
            r_eval,
            r_myopic,
            theta_override,
            master_seed,
            output
        );
        self
    }

    pub fn resolve(self) -> Result<Resolved> {
        let methods = match &self.methods {
            None => Method::ALL.to_vec(),
            Some(names) => {
                let mut parsed = Vec::new();
                for name in names {
                    let m = Method::parse(name)?;
                    if !parsed.contains(&m) {
                        parsed.push(m);
                    }
                }
                if parsed.is_empty() {
                    return Err(Error::InvalidParam("methods list is empty".into()));
                }
                parsed
            }
        };
        let budgets = self
            .budgets
            .clone()
            .ok_or_else(|| Error::InvalidParam("budgets is required".into()))?;
        if budgets.is_empty() {
            return Err(Error::InvalidParam("budgets is empty".into()));
        }
        let master_seed = self
            .master_seed
            .ok_or_else(|| Error::InvalidParam("master_seed is required".into()))?;

        let synth_requested = self.synth_group_sizes.is_some()
            || self.synth_p_in.is_some()
            || self.synth_p_out.is_some()
            || self.synth_seed.is_some();
        let source = match (&self.edge_file, synth_requested) {
            (Some(_), true) => {
                return Err(Error::InvalidParam(
                    "edge_file and synth_* settings are mutually exclusive".into(),
                ))
            }
            (Some(edge), false) => GraphSource::Files {
                edge_file: edge.clone(),
                group_file: self.group_file.clone(),
                directed: self.directed.unwrap_or(true),
            },
            (None, true) => {
                let missing = |key: &str| {
                    Error::InvalidParam(format!("{key} is required with a synth specification"))
                };
                GraphSource::Synth(SynthSpec {
                    group_sizes: self
                        .synth_group_sizes
                        .clone()
                        .ok_or_else(|| missing("synth_group_sizes"))?,
                    p_in: self.synth_p_in.ok_or_else(|| missing("synth_p_in"))?,
                    p_out: self.synth_p_out.ok_or_else(|| missing("synth_p_out"))?,
                    seed: self.synth_seed.ok_or_else(|| missing("synth_seed"))?,
                })
            }
            (None, false) => {
                return Err(Error::InvalidParam(
                    "either edge_file or a synth specification is required".into(),
                ))
            }
        };

        let params = ImmParams {
            epsilon: self.epsilon.unwrap_or(ImmParams::default().epsilon),
            ell: self.ell.unwrap_or(ImmParams::default().ell),
            theta_override: self.theta_override,
            ..ImmParams::default()
        };
        params.validate()?;
        let r_eval = self.r_eval.unwrap_or(10_000);
        let r_myopic = self.r_myopic.unwrap_or(1_000);
        if r_eval == 0 || r_myopic == 0 {
            return Err(Error::InvalidParam("simulation counts must be positive".into()));
        }
        let output = self.output.clone().unwrap_or_else(|| PathBuf::from("fairspread-results"));

        // The fully applied configuration, echoed into the JSON report so a
        // run can be reproduced from its own output.
        let echo = ExperimentConfig {
            directed: match &source {
                GraphSource::Files { directed, .. } => Some(*directed),
                GraphSource::Synth(_) => None,
            },
            methods: Some(methods.iter().map(|m| m.label().to_string()).collect()),
            budgets: Some(budgets.clone()),
            epsilon: Some(params.epsilon),
            ell: Some(params.ell),
            r_eval: Some(r_eval),
            r_myopic: Some(r_myopic),
            theta_override: params.theta_override,
            master_seed: Some(master_seed),
            output: Some(output.clone()),
            ..self
        };

        Ok(Resolved {
            source,
            methods,
            budgets,
            params,
            r_eval,
            r_myopic,
            master_seed,
            output,
            echo,
        })
    }
}

#[derive(Debug, Clone)]
pub enum GraphSource {
    Files { edge_file: PathBuf, group_file: Option<PathBuf>, directed: bool },
    Synth(SynthSpec),
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub source: GraphSource,
    pub methods: Vec<Method>,
    pub budgets: Vec<usize>,
    pub params: ImmParams,
    pub r_eval: usize,
    pub r_myopic: usize,
    pub master_seed: u64,
    pub output: PathBuf,
    pub echo: ExperimentConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Imm,
    Myopic,
    Greedy,
    AgmUs,
    AgmGs,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::Imm, Method::Myopic, Method::Greedy, Method::AgmUs, Method::AgmGs];

    pub fn parse(name: &str) -> Result<Method> {
        match name {
            "imm" => Ok(Method::Imm),
            "myopic" => Ok(Method::Myopic),
            "greedy" => Ok(Method::Greedy),
            "agm-us" => Ok(Method::AgmUs),
            "agm-gs" => Ok(Method::AgmGs),
            other => Err(Error::InvalidParam(format!(
                "unknown method '{other}' (expected imm, myopic, greedy, agm-us, agm-gs)"
            ))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Imm => "imm",
            Method::Myopic => "myopic",
            Method::Greedy => "greedy",
            Method::AgmUs => "agm-us",
            Method::AgmGs => "agm-gs",
        }
    }

    /// Whether the method consumes the per-group seed matrix or pools.
    pub fn needs_pools(self) -> bool {
        matches!(self, Method::Greedy | Method::AgmUs | Method::AgmGs)
    }
}
