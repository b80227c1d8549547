use super::{builtin, ImmersionSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// JSON description of a builtin manifold:
/// `{"name": "ellipse2d", "params": [2, 1], "betti": [1, 1]}` or
/// `{"name": "tube", "child": {...}, "r": 0.3}`.
///
/// `betti`, when present, replaces the builtin metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betti: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub child: Option<Box<Manifest>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

impl Manifest {
    pub fn builtin(name: &str, params: &[f64]) -> Self {
        Manifest {
            name: name.to_string(),
            params: params.to_vec(),
            betti: None,
            child: None,
            r: None,
        }
    }

    pub fn tube(child: Manifest, r: f64) -> Self {
        Manifest {
            name: "tube".into(),
            params: Vec::new(),
            betti: None,
            child: Some(Box::new(child)),
            r: Some(r),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("manifest: {e}")))
    }

    pub fn instantiate(&self) -> Result<ImmersionSpec> {
        let mut spec = if self.name == "tube" {
            let child = self
                .child
                .as_ref()
                .ok_or_else(|| Error::BadParams("tube manifest needs `child`".into()))?;
            let r = self
                .r
                .ok_or_else(|| Error::BadParams("tube manifest needs `r`".into()))?;
            crate::tube::tube_spec(&child.instantiate()?, r)?
        } else {
            if self.child.is_some() || self.r.is_some() {
                return Err(Error::BadParams(format!(
                    "`child` and `r` only apply to tubes, not {}",
                    self.name
                )));
            }
            builtin(&self.name, &self.params)?
        };
        if let Some(betti) = &self.betti {
            spec.set_betti(betti.clone())?;
        }
        Ok(spec)
    }
}
