//! Scenario presets, one per figure of the evaluation.

use crate::config::{Architecture, SystemConfig};
use crate::error::{Error, Result};
use crate::montecarlo::SweepSpec;
use crate::solver::DesignSpec;

use super::{PanelConfig, RunConfig};

pub const PRESET_NAMES: [&str; 11] = [
    "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13", "custom",
];

fn designs(names: &[&str]) -> Vec<DesignSpec> {
    names.iter().map(|n| n.parse().expect("preset design names are valid")).collect()
}

/// Node sizes `M_q = N_m = n`, with as many uplink streams as the node
/// supports.
fn system_for(n: usize) -> SystemConfig {
    let base = SystemConfig::default();
    SystemConfig {
        m_q: n,
        n_m: n,
        d_m: n.min(base.m_k),
        ..base
    }
}

fn panel(label: &str, n: usize) -> PanelConfig {
    let mut system = toml::Table::new();
    system.insert("m_q".into(), toml::Value::Integer(n as i64));
    system.insert("n_m".into(), toml::Value::Integer(n as i64));
    system.insert("d_m".into(), toml::Value::Integer(n.min(4) as i64));
    PanelConfig {
        label: label.into(),
        system,
        designs: None,
    }
}

/// Fully-resolved configuration of a preset, before user overrides.
pub fn preset(name: &str) -> Result<RunConfig> {
    let (n, list, panels): (usize, &[&str], bool) = match name {
        "fig4" => (1, &["taps4", "taps8", "sota_taps", "softnull"], false),
        "fig5" => (4, &["taps4", "taps8", "sota_taps", "softnull"], false),
        "fig6" => (1, &["aux2", "aux3", "sota_aux", "softnull"], false),
        "fig7" => (4, &["aux2", "aux3", "sota_aux", "softnull"], false),
        "fig8" => (1, &["taps4", "taps8"], true),
        "fig9" => (1, &["aux2", "aux3"], true),
        "fig10" => (1, &["taps4", "taps8", "aux2", "aux3", "sota_taps"], false),
        "fig11" => (4, &["taps4", "taps8", "aux2", "aux3", "sota_taps"], false),
        "fig12" => (1, &["taps8", "aux3", "sota_taps"], false),
        "fig13" => (4, &["taps8", "aux3", "sota_taps"], false),
        "custom" => (1, &[], false),
        other => {
            return Err(Error::param(
                "preset",
                format!("unknown preset `{other}` (expected one of {})", PRESET_NAMES.join(", ")),
            ))
        }
    };
    let system = system_for(n);
    let designs = if list.is_empty() {
        vec![DesignSpec::Proposed {
            architecture: system.architecture,
            n: system.n_elements,
        }]
    } else {
        designs(list)
    };
    let mut system = system;
    if let Some(DesignSpec::Proposed { architecture: Architecture::Aux, n }) = designs.first() {
        system.architecture = Architecture::Aux;
        system.n_elements = *n;
    }
    Ok(RunConfig {
        preset: name.into(),
        sweep: SweepSpec {
            n_trials: 200,
            designs,
            lambda_a_dbm: system.lambda_a_dbm,
            ..SweepSpec::default()
        },
        system,
        channel: Default::default(),
        impairments: Default::default(),
        panels: if panels {
            vec![panel("mq1", 1), panel("mq4", 4)]
        } else {
            Vec::new()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!((cfg.system.m_k, cfg.system.n_k), (4, 4));
        }
        assert!(preset("fig3").is_err());
    }

    #[test]
    fn captions() {
        let f4 = preset("fig4").unwrap();
        assert_eq!((f4.system.m_q, f4.system.n_m), (1, 1));
        assert_eq!(f4.sweep.designs.len(), 4);
        let f7 = preset("fig7").unwrap();
        assert_eq!((f7.system.m_q, f7.system.n_m, f7.system.d_m), (4, 4, 4));
        assert!(f7.sweep.designs.iter().all(|d| d.architecture() != Some(Architecture::Taps)));
        assert_eq!(preset("fig8").unwrap().panels.len(), 2);
    }
}
