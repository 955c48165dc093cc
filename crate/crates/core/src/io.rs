//! JSON file format for tabular MDPs and their named rewards.
//!
//! ```json
//! {
//!   "n_states": 2,
//!   "n_actions": 1,
//!   "discount": 0.9,
//!   "transition": [[[1.0, 0.0]], [[0.0, 1.0]]],
//!   "initial_dist": [1.0, 0.0],
//!   "rewards": {"unit": [[[1.0, 1.0]], [[1.0, 1.0]]]}
//! }
//! ```
//!
//! Nested arrays are indexed `[s][a][s']`. Every probability row is
//! validated on load. The discount may be 1 in a file (distances are
//! defined without dynamics); building a `TabularMdp` from such a file
//! fails, since solvers require discount < 1.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{validate_distribution, TabularMdp};
use crate::reward::RewardTable;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdpFile {
    pub n_states: usize,
    pub n_actions: usize,
    pub discount: f64,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub initial_dist: Vec<f64>,
    #[serde(default)]
    pub rewards: BTreeMap<String, Vec<Vec<Vec<f64>>>>,
}

impl MdpFile {
    pub fn parse(json: &str) -> Result<Self> {
        let file: MdpFile = serde_json::from_str(json)?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        MdpFile::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.validate()?;
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.n_states == 0 || self.n_actions == 0 {
            return Err(Error::Precondition(
                "n_states and n_actions must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(Error::Precondition(format!(
                "discount must lie in [0, 1], got {}",
                self.discount
            )));
        }
        check_tensor_shape(&self.transition, self.n_states, self.n_actions, "transition")?;
        for (s, per_action) in self.transition.iter().enumerate() {
            for (a, row) in per_action.iter().enumerate() {
                validate_distribution(row, &format!("transition row (s={s}, a={a})"))?;
            }
        }
        if self.initial_dist.len() != self.n_states {
            return Err(Error::dim(
                format!("{} initial probabilities", self.n_states),
                format!("{}", self.initial_dist.len()),
            ));
        }
        validate_distribution(&self.initial_dist, "initial_dist")?;
        for (name, tensor) in &self.rewards {
            check_tensor_shape(tensor, self.n_states, self.n_actions, name)?;
        }
        Ok(())
    }

    /// Flatten the transition tensor in `(s, a, s')` order.
    pub fn transition_flat(&self) -> Vec<f64> {
        flatten(&self.transition)
    }

    /// Build the dynamics model; requires discount < 1.
    pub fn to_mdp(&self) -> Result<TabularMdp> {
        TabularMdp::new(
            self.n_states,
            self.n_actions,
            self.transition_flat(),
            self.initial_dist.clone(),
            self.discount,
        )
    }

    pub fn reward(&self, name: &str) -> Result<RewardTable> {
        let tensor = self
            .rewards
            .get(name)
            .ok_or_else(|| Error::UnknownName(format!("reward `{name}`")))?;
        RewardTable::new(self.n_states, self.n_actions, flatten(tensor))
    }

    pub fn reward_names(&self) -> Vec<String> {
        self.rewards.keys().cloned().collect()
    }

    pub fn from_parts(
        mdp: &TabularMdp,
        rewards: &BTreeMap<String, RewardTable>,
    ) -> Result<Self> {
        let ns = mdp.n_states();
        let na = mdp.n_actions();
        let nest = |flat: &[f64]| -> Vec<Vec<Vec<f64>>> {
            (0..ns)
                .map(|s| {
                    (0..na)
                        .map(|a| flat[(s * na + a) * ns..(s * na + a + 1) * ns].to_vec())
                        .collect()
                })
                .collect()
        };
        let mut named = BTreeMap::new();
        for (name, table) in rewards {
            if table.n_states() != ns || table.n_actions() != na {
                return Err(Error::dim(
                    format!("reward `{name}` shaped {ns}x{na}"),
                    format!("{}x{}", table.n_states(), table.n_actions()),
                ));
            }
            named.insert(name.clone(), nest(table.values()));
        }
        Ok(MdpFile {
            n_states: ns,
            n_actions: na,
            discount: mdp.discount(),
            transition: nest(mdp.transition_tensor()),
            initial_dist: mdp.initial_dist().to_vec(),
            rewards: named,
        })
    }
}

fn check_tensor_shape(
    tensor: &[Vec<Vec<f64>>],
    n_states: usize,
    n_actions: usize,
    what: &str,
) -> Result<()> {
    if tensor.len() != n_states
        || tensor
            .iter()
            .any(|per| per.len() != n_actions || per.iter().any(|row| row.len() != n_states))
    {
        return Err(Error::dim(
            format!("{what} shaped [{n_states}][{n_actions}][{n_states}]"),
            "a ragged or mis-sized tensor",
        ));
    }
    Ok(())
}

fn flatten(tensor: &[Vec<Vec<f64>>]) -> Vec<f64> {
    tensor
        .iter()
        .flat_map(|per| per.iter().flat_map(|row| row.iter().copied()))
        .collect()
}
