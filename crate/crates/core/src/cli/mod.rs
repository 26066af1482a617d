//! Configuration resolution and result files for the command-line front end.
//!
//! A run is described by a TOML document with the tables `[system]`,
//! `[sweep]`, `[channel]`, `[impairments]`, an optional `preset` key and
//! optional `[[panel]]` entries. User values are merged over the preset, then
//! command-line flags over both, and the result is checked strictly: unknown
//! keys and out-of-range values are errors naming the key.

mod presets;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::canceller::ImpairmentParams;
use crate::channels::ChannelParams;
use crate::config::{Architecture, SystemConfig};
use crate::error::{Error, Result};
use crate::montecarlo::{run_sweep, SweepResult, SweepSpec};
use crate::solver::DesignSpec;

pub use presets::{preset, PRESET_NAMES};

/// A sub-experiment sharing the sweep but with different node sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelConfig {
    pub label: String,
    /// Keys of `[system]` overridden for this panel.
    #[serde(default)]
    pub system: toml::Table,
    /// Replaces the sweep's design list when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub designs: Option<Vec<DesignSpec>>,
}

/// Fully-resolved run description; also the format of `meta.txt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: String,
    pub system: SystemConfig,
    pub sweep: SweepSpec,
    pub channel: ChannelParams,
    pub impairments: ImpairmentParams,
    #[serde(default, rename = "panel", skip_serializing_if = "Vec::is_empty")]
    pub panels: Vec<PanelConfig>,
}

/// Command-line overrides, applied after the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub config: Option<PathBuf>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub enumerate_realizations: bool,
    pub architecture: Option<Architecture>,
    pub n_elements: Option<usize>,
}

/// One sweep to run: a panel's system and designs.
#[derive(Debug, Clone)]
pub struct ResolvedPanel {
    pub label: String,
    pub system: SystemConfig,
    pub sweep: SweepSpec,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

fn to_table<T: Serialize>(value: &T) -> Result<toml::Table> {
    toml::Table::try_from(value).map_err(config_err)
}

/// Recursive merge; tables merge key by key, everything else is replaced.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl RunConfig {
    /// Systems and sweeps of every panel (a single unnamed one without panels).
    pub fn resolve_panels(&self) -> Result<Vec<ResolvedPanel>> {
        if self.panels.is_empty() {
            return Ok(vec![ResolvedPanel {
                label: String::new(),
                system: self.system.clone(),
                sweep: self.sweep.clone(),
            }]);
        }
        let base = to_table(&self.system)?;
        self.panels
            .iter()
            .map(|p| {
                let mut t = base.clone();
                merge(&mut t, p.system.clone());
                let system: SystemConfig = t
                    .try_into()
                    .map_err(|e| Error::Config(format!("panel `{}`: {e}", p.label)))?;
                let mut sweep = self.sweep.clone();
                if let Some(d) = &p.designs {
                    sweep.designs = d.clone();
                }
                Ok(ResolvedPanel {
                    label: p.label.clone(),
                    system,
                    sweep,
                })
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.sweep.validate()?;
        self.channel.validate()?;
        self.impairments.validate()?;
        if self.system.lambda_a_dbm != self.sweep.lambda_a_dbm {
            return Err(Error::param(
                "lambda_a_dbm",
                format!(
                    "[system] says {} dBm but [sweep] says {} dBm",
                    self.system.lambda_a_dbm, self.sweep.lambda_a_dbm
                ),
            ));
        }
        let mut labels = std::collections::HashSet::new();
        for panel in self.resolve_panels()? {
            if !labels.insert(panel.label.clone()) {
                return Err(Error::param("panel.label", format!("`{}` used twice", panel.label)));
            }
            panel.system.validate()?;
            panel.sweep.validate()?;
            for d in &panel.sweep.designs {
                if let DesignSpec::Proposed { architecture, n } = *d {
                    let budget = architecture.full_budget(panel.system.m_k, panel.system.n_k);
                    if n > budget {
                        return Err(Error::param(
                            "n_elements",
                            format!("design `{d}` needs {n} elements, only {budget} positions exist"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Build the run configuration from an optional TOML file and flags.
pub fn parse_config(flags: &Overrides) -> Result<RunConfig> {
    let mut user = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            text.parse::<toml::Table>()
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => toml::Table::new(),
    };
    let file_preset = match user.remove("preset") {
        Some(toml::Value::String(s)) => Some(s),
        Some(other) => return Err(Error::param("preset", format!("expected a string, got {other}"))),
        None => None,
    };
    let name = flags
        .preset
        .clone()
        .or(file_preset)
        .unwrap_or_else(|| "custom".into());
    let mut table = to_table(&preset(&name)?)?;
    // an explicit panel list replaces the preset's
    if user.contains_key("panel") {
        table.remove("panel");
    }
    merge(&mut table, user);
    let mut cfg: RunConfig = table.try_into().map_err(config_err)?;

    if let Some(t) = flags.trials {
        cfg.sweep.n_trials = t;
    }
    if let Some(s) = flags.seed {
        cfg.sweep.master_seed = s;
    }
    if flags.enumerate_realizations {
        cfg.system.enumerate_realizations = true;
    }
    if flags.architecture.is_some() || flags.n_elements.is_some() {
        // a single proposed design with the requested hardware
        if let Some(a) = flags.architecture {
            cfg.system.architecture = a;
        }
        if let Some(n) = flags.n_elements {
            cfg.system.n_elements = n;
        }
        cfg.sweep.designs = vec![DesignSpec::Proposed {
            architecture: cfg.system.architecture,
            n: cfg.system.n_elements,
        }];
        for p in &mut cfg.panels {
            p.designs = None;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// One line of `results.csv`.
#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    design: &'a str,
    p_k_dbm: f64,
    p_m_dbm: f64,
    prob_constraint_met: f64,
    avg_alpha: Option<f64>,
    mean_dl: f64,
    mean_ul: f64,
    mean_fd: f64,
    mean_fd_conditioned: Option<f64>,
    n_feasible: usize,
    n_trials: usize,
    seed: u64,
}

/// Results of every panel, in panel order.
pub type ScenarioResults = Vec<(String, SweepResult)>;

/// Run every panel of `cfg`.
pub fn run_config(cfg: &RunConfig) -> Result<ScenarioResults> {
    cfg.validate()?;
    cfg.resolve_panels()?
        .into_iter()
        .map(|p| {
            let r = run_sweep(&p.sweep, &p.system, &cfg.channel, &cfg.impairments)?;
            Ok((p.label, r))
        })
        .collect()
}

/// CSV text for a set of results. Designs of named panels are written as
/// `label@panel`.
pub fn results_csv(results: &ScenarioResults) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (panel, result) in results {
        for p in &result.points {
            let design = if panel.is_empty() {
                p.label.clone()
            } else {
                format!("{}@{panel}", p.label)
            };
            w.serialize(CsvRow {
                design: &design,
                p_k_dbm: p.p_k_dbm,
                p_m_dbm: p.p_m_dbm,
                prob_constraint_met: p.prob_constraint_met,
                avg_alpha: p.avg_alpha,
                mean_dl: p.mean_dl,
                mean_ul: p.mean_ul,
                mean_fd: p.mean_fd,
                mean_fd_conditioned: p.mean_fd_conditioned,
                n_feasible: p.n_feasible,
                n_trials: p.n_trials,
                seed: result.master_seed,
            })?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Resolved configuration as TOML, loadable again with `--config`.
pub fn meta_text(cfg: &RunConfig) -> Result<String> {
    let body = toml::to_string(cfg).map_err(config_err)?;
    Ok(format!("# fdmimo {}\n{body}", env!("CARGO_PKG_VERSION")))
}

/// Run the scenario and write `results.csv` and `meta.txt` into `out_dir`.
pub fn run_scenario(cfg: &RunConfig, out_dir: &Path) -> Result<ScenarioResults> {
    let results = run_config(cfg)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("results.csv"), results_csv(&results)?)?;
    fs::write(out_dir.join("meta.txt"), meta_text(cfg)?)?;
    Ok(results)
}
