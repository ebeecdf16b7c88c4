//! Persisted models: one JSON document holding the model kind, its parameters,
//! the well names it was fitted for and, for the network, the normalization
//! constants needed to predict in raw rate units.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::crm::{crmip_predict, crmp_predict, crmt_predict, CrmipParams, CrmpParams, CrmtParams};
use crate::error::{Error, Result};
use crate::rnn::{rnn_predict, LinearRnnParams, Normalization};
use crate::series::{RateSeries, WellField};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Crmt,
    Crmp,
    Crmip,
    Rnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Crmt, ModelKind::Crmp, ModelKind::Crmip, ModelKind::Rnn];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Crmt => "crmt",
            ModelKind::Crmp => "crmp",
            ModelKind::Crmip => "crmip",
            ModelKind::Rnn => "rnn",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown model kind `{s}`; expected crmt, crmp, crmip or rnn")))
    }
}

/// Parameters of one fitted model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_kind", content = "payload", rename_all = "lowercase")]
pub enum Model {
    Crmt(CrmtParams),
    Crmp(CrmpParams),
    Crmip(CrmipParams),
    Rnn(LinearRnnParams),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Crmt(_) => ModelKind::Crmt,
            Model::Crmp(_) => ModelKind::Crmp,
            Model::Crmip(_) => ModelKind::Crmip,
            Model::Rnn(_) => ModelKind::Rnn,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub injectors: Vec<String>,
    pub producers: Vec<String>,
    #[serde(flatten)]
    pub model: Model,
    /// Present exactly for the network.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
}

/// Name of the single output column of the field-level tank model.
pub const TOTAL_COLUMN: &str = "TOTAL";

impl ModelFile {
    pub fn new(field: &WellField, model: Model, normalization: Option<Normalization>) -> Result<Self> {
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            injectors: field.injectors().to_vec(),
            producers: field.producers().to_vec(),
            model,
            normalization,
        };
        file.check()?;
        Ok(file)
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn field(&self) -> Result<WellField> {
        WellField::new(self.injectors.clone(), self.producers.clone())
    }

    /// Payload shape agrees with the well lists and kind.
    pub fn check(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Version {
                found: self.format_version,
                expected: FORMAT_VERSION,
            });
        }
        let field = self.field()?;
        let want = (field.n_inj(), field.n_pro());
        let shape_err = |what: &str, got: (usize, usize)| {
            Error::Model(format!("{what} is {}×{}, field is {}×{}", got.0, got.1, want.0, want.1))
        };
        match &self.model {
            Model::Crmt(p) => p.check()?,
            Model::Crmp(p) => {
                p.check()?;
                if p.gains.dim() != want {
                    return Err(shape_err("gain matrix", p.gains.dim()));
                }
            }
            Model::Crmip(p) => {
                p.check()?;
                if p.gains.dim() != want {
                    return Err(shape_err("gain matrix", p.gains.dim()));
                }
            }
            Model::Rnn(p) => {
                p.check()?;
                if p.kernel.dim() != want {
                    return Err(shape_err("kernel", p.kernel.dim()));
                }
            }
        }
        match (&self.model, &self.normalization) {
            (Model::Rnn(_), None) => Err(Error::Model("network model lacks normalization constants".into())),
            (Model::Rnn(_), Some(n)) if !(n.input_scale > 0.0 && n.output_scale > 0.0) => {
                Err(Error::Model("normalization constants must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Column names of [`ModelFile::predict`]'s output.
    pub fn output_names(&self) -> Vec<String> {
        match self.model {
            Model::Crmt(_) => vec![TOTAL_COLUMN.to_string()],
            _ => self.producers.clone(),
        }
    }

    /// Predicted rates over every row of `series`, `[n_steps × outputs]`.
    /// The series must carry the same wells in the same order.
    pub fn predict(&self, field: &WellField, series: &RateSeries) -> Result<Array2<f64>> {
        if field.injectors() != self.injectors.as_slice() || field.producers() != self.producers.as_slice() {
            return Err(Error::Field(format!(
                "model was fitted for injectors {:?} and producers {:?}, data has {:?} and {:?}",
                self.injectors,
                self.producers,
                field.injectors(),
                field.producers()
            )));
        }
        series.check(field)?;
        match &self.model {
            Model::Crmt(p) => Ok(crmt_predict(p, series)?.insert_axis(Axis(1))),
            Model::Crmp(p) => crmp_predict(p, series),
            Model::Crmip(p) => Ok(crmip_predict(p, series)?.1),
            Model::Rnn(p) => {
                let norm = self.normalization.as_ref().expect("checked on load");
                rnn_predict(p, norm, series.injection.view())
            }
        }
    }
}

pub fn save_model(model: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    model.check()?;
    let mut text = serde_json::to_string_pretty(model)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads and validates a model file. The version is checked before the
/// payload is interpreted; syntax errors carry their line and column.
pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(Error::file(path))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Model("missing integer `format_version`".into()))?;
    if found != u64::from(FORMAT_VERSION) {
        return Err(Error::Version {
            found: u32::try_from(found).unwrap_or(u32::MAX),
            expected: FORMAT_VERSION,
        });
    }
    let model: ModelFile = serde_json::from_value(value)?;
    model.check()?;
    Ok(model)
}
