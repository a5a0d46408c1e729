//! Export manifest written alongside features extracted from a real model.
//!
//! ```text
//! model=resnet18-ft
//! feature_dim=512
//! num_classes=10
//! head_w=head_w.fvec
//! head_b=head_b.fvec
//! split.train=train_features.fvec
//! split.test=test_features.fvec
//! normalization=resize 224, mean/std imagenet
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use oodkit_core::{Error, LinearHead};

use crate::error::FileError;
use crate::fvec_file::{read_fvec, read_head};
use crate::keyvalue::{render, KeyValues};

const SPLIT_PREFIX: &str = "split.";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportManifest {
    pub model: String,
    pub feature_dim: usize,
    pub num_classes: usize,
    pub head_w: PathBuf,
    pub head_b: PathBuf,
    pub splits: BTreeMap<String, PathBuf>,
    pub normalization: String,
}

impl ExportManifest {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self, FileError> {
        let base = kv.path().parent().unwrap_or(Path::new(""));
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let splits = kv
            .keys()
            .filter_map(|k| k.strip_prefix(SPLIT_PREFIX).map(|name| (name.to_string(), k)))
            .map(|(name, k)| Ok((name, resolve(kv.require(k)?))))
            .collect::<Result<_, FileError>>()?;
        Ok(Self {
            model: kv.require("model")?,
            feature_dim: kv.require("feature_dim")?,
            num_classes: kv.require("num_classes")?,
            head_w: resolve(kv.require("head_w")?),
            head_b: resolve(kv.require("head_b")?),
            splits,
            normalization: kv.get("normalization")?.unwrap_or_default(),
        })
    }

    pub fn read(path: &Path) -> Result<Self, FileError> {
        Self::from_key_values(&KeyValues::read(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut pairs = vec![
            ("model", self.model.clone()),
            ("feature_dim", self.feature_dim.to_string()),
            ("num_classes", self.num_classes.to_string()),
            ("head_w", self.head_w.display().to_string()),
            ("head_b", self.head_b.display().to_string()),
        ];
        let split_keys: Vec<String> = self.splits.keys().map(|k| format!("{SPLIT_PREFIX}{k}")).collect();
        for (key, path) in split_keys.iter().zip(self.splits.values()) {
            pairs.push((key.as_str(), path.display().to_string()));
        }
        pairs.push(("normalization", self.normalization.clone()));
        render(&pairs)
    }

    pub fn write(&self, path: &Path) -> Result<(), FileError> {
        crate::write_atomic(path, self.to_text().as_bytes())
    }

    /// Loads the head and checks every referenced FVEC against the declared dims.
    pub fn load_checked(&self) -> Result<LinearHead, FileError> {
        let head = read_head(&self.head_w, &self.head_b)?;
        if head.feature_dim() != self.feature_dim || head.num_classes() != self.num_classes {
            return Err(FileError::data(
                &self.head_w,
                Error::Shape(format!(
                    "head is {}x{}, manifest declares {}x{}",
                    head.feature_dim(),
                    head.num_classes(),
                    self.feature_dim,
                    self.num_classes
                )),
            ));
        }
        for path in self.splits.values() {
            let m = read_fvec(path)?;
            if m.cols() != self.feature_dim {
                return Err(FileError::data(
                    path,
                    Error::Shape(format!("{} feature columns, manifest declares {}", m.cols(), self.feature_dim)),
                ));
            }
        }
        Ok(head)
    }
}
