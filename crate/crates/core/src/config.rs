//! Scenario files and figure presets.
//!
//! Scenarios are TOML documents. Every top-level key is optional except
//! `nodes`; missing keys take the defaults of [`Scenario::with_nodes`].
//!
//! ```toml
//! n_t = 50
//! n_data_symbols = 1000000
//! seed = 7
//! techniques = ["probability", "deviation", "combination", "mrc"]
//! n0_dbm_per_hz = -174.0
//! bandwidth_hz = 100000.0
//! blocks = 100
//! power_range = { start_dbm = -20.0, stop_dbm = 30.0, step_db = 2.0 }
//! # or an explicit list: power_sweep_dbm = [0.0, 10.0, 20.0]
//!
//! [[nodes]]
//! name = "f9"            # registry entry
//!
//! [[nodes]]
//! name = "wrist"         # inline law
//! id = 10
//! family = "burr"        # or "weibull" with `scale` and `shape`
//! scale = 2.0e-6
//! c = 4.0
//! k = 1.5
//! condition = "weak"
//! ```
//!
//! Unknown keys are rejected, and the assembled scenario is re-validated.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{registry_entry, table1_registry, Condition, DistributionSpec, NodeProfile};
use crate::detect::Technique;
use crate::error::Error;
use crate::montecarlo::{power_range, Scenario};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Syntax(String),

    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            message: message.into(),
        }
    }

    /// The offending key, when the error can be pinned to one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter { name, reason } => ConfigError::invalid(name, reason),
            other => ConfigError::invalid("scenario", other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerRange {
    pub start_dbm: f64,
    pub stop_dbm: f64,
    pub step_db: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
}

/// On-disk form of a [`Scenario`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_data_symbols: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub techniques: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0_dbm_per_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_node: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_sweep_dbm: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_range: Option<PowerRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_t_sweep: Option<Vec<usize>>,
    #[serde(default)]
    pub nodes: Vec<NodeEntry>,
}

impl NodeEntry {
    fn resolve(&self, index: usize) -> Result<NodeProfile, ConfigError> {
        let key = |field: &str| format!("nodes[{index}].{field}");
        let Some(family) = &self.family else {
            let name = self
                .name
                .as_deref()
                .ok_or_else(|| ConfigError::invalid(key("name"), "give a registry name or a `family`"))?;
            let mut node = registry_entry(name).ok_or_else(|| {
                ConfigError::invalid(key("name"), format!("`{name}` is not in the registry (f1..f9)"))
            })?;
            for (field, present) in [
                ("scale", self.scale.is_some()),
                ("c", self.c.is_some()),
                ("k", self.k.is_some()),
                ("shape", self.shape.is_some()),
                ("condition", self.condition.is_some()),
            ] {
                if present {
                    return Err(ConfigError::invalid(
                        key(field),
                        "registry nodes take no inline parameters",
                    ));
                }
            }
            if let Some(id) = self.id {
                node.id = id;
            }
            return Ok(node);
        };

        let need = |field: &'static str, v: Option<f64>| {
            v.ok_or_else(|| ConfigError::invalid(key(field), format!("required for family `{family}`")))
        };
        let reject = |field: &'static str, v: Option<f64>| match v {
            Some(_) => Err(ConfigError::invalid(key(field), format!("not a `{family}` parameter"))),
            None => Ok(()),
        };
        let dist = match family.as_str() {
            "burr" => {
                reject("shape", self.shape)?;
                DistributionSpec::burr(need("scale", self.scale)?, need("c", self.c)?, need("k", self.k)?)
            }
            "weibull" => {
                reject("c", self.c)?;
                reject("k", self.k)?;
                DistributionSpec::weibull(need("scale", self.scale)?, need("shape", self.shape)?)
            }
            other => {
                return Err(ConfigError::invalid(
                    key("family"),
                    format!("unknown family `{other}`, expected burr or weibull"),
                ))
            }
        }
        .map_err(|e| match e {
            Error::Parameter { name, reason } => ConfigError::invalid(key(name), reason),
            other => ConfigError::invalid(key("family"), other.to_string()),
        })?;

        let condition = self
            .condition
            .as_deref()
            .ok_or_else(|| ConfigError::invalid(key("condition"), "required for inline nodes"))?
            .parse::<Condition>()
            .map_err(|e| ConfigError::invalid(key("condition"), e.to_string()))?;
        let id = self.id.unwrap_or(index as u32 + 1);
        Ok(NodeProfile {
            id,
            name: self.name.clone().unwrap_or_else(|| format!("node{id}")),
            dist,
            condition,
        })
    }

    fn from_profile(node: &NodeProfile) -> Self {
        if registry_entry(&node.name).as_ref() == Some(node) {
            return NodeEntry {
                name: Some(node.name.clone()),
                ..Default::default()
            };
        }
        let mut entry = NodeEntry {
            name: Some(node.name.clone()),
            id: Some(node.id),
            family: Some(node.dist.family().to_string()),
            condition: Some(node.condition.as_str().to_string()),
            ..Default::default()
        };
        match node.dist {
            DistributionSpec::BurrXii(d) => {
                entry.scale = Some(d.scale());
                entry.c = Some(d.c());
                entry.k = Some(d.k());
            }
            DistributionSpec::Weibull(d) => {
                entry.scale = Some(d.scale());
                entry.shape = Some(d.shape());
            }
        }
        entry
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            match toml_key(&e) {
                Some(key) => ConfigError::invalid(key, msg),
                None => ConfigError::Syntax(e.to_string()),
            }
        })
    }

    pub fn into_scenario(self) -> Result<Scenario, ConfigError> {
        if self.nodes.is_empty() {
            return Err(ConfigError::invalid(
                "nodes",
                "at least one [[nodes]] entry is required",
            ));
        }
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| n.resolve(i))
            .collect::<Result<Vec<_>, _>>()?;
        let mut s = Scenario::with_nodes(nodes);

        if let Some(v) = self.n_t {
            s.n_t = v;
        }
        if let Some(v) = self.n_data_symbols {
            s.n_data_symbols = v;
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(names) = &self.techniques {
            s.techniques = names
                .iter()
                .map(|n| n.parse::<Technique>())
                .collect::<Result<_, _>>()
                .map_err(|e| match e {
                    Error::Parameter { reason, .. } => ConfigError::invalid("techniques", reason),
                    other => other.into(),
                })?;
        }
        if let Some(v) = self.n0_dbm_per_hz {
            s.n0_dbm_per_hz = v;
        }
        if let Some(v) = self.bandwidth_hz {
            s.bandwidth_hz = v;
        }
        if let Some(v) = self.blocks {
            s.blocks = v;
        }
        if let Some(v) = self.per_node {
            s.per_node = v;
        }
        match (self.power_sweep_dbm, self.power_range) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::invalid(
                    "power_range",
                    "give either `power_sweep_dbm` or `power_range`, not both",
                ))
            }
            (Some(list), None) => s.power_sweep_dbm = list,
            (None, Some(r)) => s.power_sweep_dbm = power_range(r.start_dbm, r.stop_dbm, r.step_db)?,
            (None, None) => {}
        }
        s.n_t_sweep = self.n_t_sweep;
        s.validate()?;
        Ok(s)
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        ScenarioFile {
            n_t: Some(s.n_t),
            n_data_symbols: Some(s.n_data_symbols),
            seed: Some(s.seed),
            techniques: Some(s.techniques.iter().map(|t| t.name().to_string()).collect()),
            n0_dbm_per_hz: Some(s.n0_dbm_per_hz),
            bandwidth_hz: Some(s.bandwidth_hz),
            blocks: Some(s.blocks),
            per_node: Some(s.per_node),
            power_sweep_dbm: Some(s.power_sweep_dbm.clone()),
            power_range: None,
            n_t_sweep: s.n_t_sweep.clone(),
            nodes: s.nodes.iter().map(NodeEntry::from_profile).collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }
}

// Best-effort extraction of the offending key from a TOML error message,
// e.g. "unknown field `foo`, expected ...".
fn toml_key(e: &toml::de::Error) -> Option<String> {
    let msg = e.message();
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

/// Parses a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    ScenarioFile::parse(text)?.into_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

/// Serializes a scenario to a document that [`parse_scenario`] reads back.
pub fn scenario_to_toml(s: &Scenario) -> String {
    ScenarioFile::from_scenario(s).to_toml()
}

pub const PRESETS: [&str; 6] = ["fig3", "fig4", "fig5-weak", "fig5-strong", "fig6", "fig7"];

/// Training lengths of the training-length study.
pub const FIG7_N_T: [usize; 7] = [10, 20, 50, 100, 200, 500, 1000];
pub const FIG7_POWER_DBM: f64 = 10.0;

fn nodes_named(names: &[&str]) -> Vec<NodeProfile> {
    names
        .iter()
        .map(|n| registry_entry(n).expect("preset nodes are registry entries"))
        .collect()
}

pub const WEAK_GROUP: [&str; 6] = ["f1", "f3", "f5", "f6", "f7", "f8"];
pub const STRONG_GROUP: [&str; 3] = ["f2", "f4", "f9"];

/// Scenario reproducing one of the published experiments.
pub fn preset(name: &str) -> Result<Scenario, ConfigError> {
    let noncoherent = Technique::NONCOHERENT.to_vec();
    let s = match name {
        // every channel alone, probability technique
        "fig3" => Scenario {
            techniques: vec![Technique::Probability],
            per_node: true,
            ..Scenario::with_nodes(table1_registry())
        },
        "fig4" => Scenario {
            techniques: Technique::ALL.to_vec(),
            ..Scenario::with_nodes(nodes_named(&["f9"]))
        },
        "fig5-weak" => Scenario {
            techniques: noncoherent,
            ..Scenario::with_nodes(nodes_named(&WEAK_GROUP))
        },
        "fig5-strong" => Scenario {
            techniques: noncoherent,
            ..Scenario::with_nodes(nodes_named(&STRONG_GROUP))
        },
        "fig6" => Scenario {
            techniques: Technique::ALL.to_vec(),
            ..Scenario::with_nodes(table1_registry())
        },
        "fig7" => Scenario {
            techniques: noncoherent,
            power_sweep_dbm: vec![FIG7_POWER_DBM],
            n_t_sweep: Some(FIG7_N_T.to_vec()),
            ..Scenario::with_nodes(nodes_named(&WEAK_GROUP))
        },
        other => {
            return Err(ConfigError::invalid(
                "preset",
                format!("unknown preset `{other}`, expected one of {}", PRESETS.join(", ")),
            ))
        }
    };
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_uses_defaults() {
        let s = parse_scenario("[[nodes]]\nname = \"f9\"\n").unwrap();
        assert_eq!(s, Scenario::with_nodes(nodes_named(&["f9"])));
    }

    #[test]
    fn full_file() {
        let text = r#"
            n_t = 20
            n_data_symbols = 5000
            seed = 9
            techniques = ["deviation", "mrc"]
            blocks = 5
            power_range = { start_dbm = 0.0, stop_dbm = 10.0, step_db = 5.0 }

            [[nodes]]
            name = "f1"

            [[nodes]]
            name = "wrist"
            id = 42
            family = "weibull"
            scale = 1e-6
            shape = 2.0
            condition = "strong"
        "#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.n_t, 20);
        assert_eq!(s.n_data_symbols, 5000);
        assert_eq!(s.techniques, [Technique::Deviation, Technique::Mrc]);
        assert_eq!(s.power_sweep_dbm, [0.0, 5.0, 10.0]);
        assert_eq!(s.nodes[1].id, 42);
        assert_eq!(s.nodes[1].dist, DistributionSpec::weibull(1e-6, 2.0).unwrap());
        assert_eq!(s.nodes[1].condition, Condition::Strong);
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("n_t = 51\n[[nodes]]\nname = \"f1\"\n", "n_t"),
            ("colour = 3\n[[nodes]]\nname = \"f1\"\n", "colour"),
            ("[[nodes]]\nname = \"f1\"\nsize = 2\n", "size"),
            ("n_t = 50\n", "nodes"),
            ("[[nodes]]\nname = \"f10\"\n", "nodes[0].name"),
            ("techniques = [\"ml\"]\n[[nodes]]\nname = \"f1\"\n", "techniques"),
            (
                "[[nodes]]\nfamily = \"burr\"\nscale = 1.0\nc = 1.0\ncondition = \"weak\"\n",
                "nodes[0].k",
            ),
            (
                "[[nodes]]\nfamily = \"burr\"\nscale = -1.0\nc = 1.0\nk = 1.0\ncondition = \"weak\"\n",
                "nodes[0].scale",
            ),
            (
                "power_sweep_dbm = [3.0, 1.0]\n[[nodes]]\nname = \"f1\"\n",
                "power_sweep_dbm",
            ),
            ("[[nodes]]\nname = \"f1\"\n[[nodes]]\nname = \"f1\"\n", "nodes"),
        ];
        for (text, key) in cases {
            let err = parse_scenario(text).unwrap_err();
            assert_eq!(err.key(), Some(key), "{text:?}: {err}");
            assert!(err.to_string().contains(key));
        }
    }

    #[test]
    fn toml_round_trip_of_presets() {
        for name in PRESETS {
            let s = preset(name).unwrap();
            let back = parse_scenario(&scenario_to_toml(&s)).unwrap();
            assert_eq!(back, s, "{name}");
        }
    }

    #[test]
    fn inline_nodes_round_trip() {
        let mut s = preset("fig4").unwrap();
        s.nodes.push(NodeProfile {
            id: 77,
            name: "ankle".into(),
            dist: DistributionSpec::burr(1e-6, 3.0, 2.0).unwrap(),
            condition: Condition::Weak,
        });
        s.n0_dbm_per_hz = f64::NEG_INFINITY;
        assert_eq!(parse_scenario(&scenario_to_toml(&s)).unwrap(), s);
    }

    #[test]
    fn preset_contents() {
        let strong = preset("fig5-strong").unwrap();
        let names: Vec<_> = strong.nodes.iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["f2", "f4", "f9"]);
        assert_eq!(strong.n_t, 50);

        let weak = preset("fig5-weak").unwrap();
        assert_eq!(weak.nodes.len(), 6);
        assert!(weak.nodes.iter().all(|n| n.condition == Condition::Weak));

        let all = preset("fig6").unwrap();
        assert_eq!(all.nodes, table1_registry());

        let fig7 = preset("fig7").unwrap();
        assert_eq!(fig7.power_sweep_dbm, [10.0]);
        assert_eq!(fig7.n_t_sweep.as_deref(), Some(&FIG7_N_T[..]));
        assert_eq!(fig7.nodes.len(), 6);

        let fig3 = preset("fig3").unwrap();
        assert!(fig3.per_node);
        assert_eq!(fig3.techniques, [Technique::Probability]);

        let fig4 = preset("fig4").unwrap();
        assert_eq!(fig4.nodes, nodes_named(&["f9"]));
        assert!(fig4.techniques.contains(&Technique::Mrc));

        assert_eq!(preset("fig8").unwrap_err().key(), Some("preset"));
    }
}
