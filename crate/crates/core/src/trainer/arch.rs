//! Model architecture descriptors.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchKind {
    Mlp,
    Cnn,
}

impl std::fmt::Display for ArchKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArchKind::Mlp => f.write_str("mlp"),
            ArchKind::Cnn => f.write_str("cnn"),
        }
    }
}

impl std::str::FromStr for ArchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mlp" => Ok(ArchKind::Mlp),
            "cnn" => Ok(ArchKind::Cnn),
            other => Err(Error::config(format!("unknown arch {other:?}; valid: mlp, cnn"))),
        }
    }
}

/// Small-classifier architecture: `mlp` is flatten -> hidden ReLU ->
/// classes; `cnn` is 3x3 conv -> ReLU -> 2x2 maxpool, twice, then dense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelArch {
    pub kind: ArchKind,
    /// Input image shape (height, width, channels).
    pub input: (usize, usize, usize),
    pub classes: usize,
    /// Hidden width of the mlp.
    pub hidden: usize,
    /// Channel counts of the two cnn conv layers.
    pub conv_channels: (usize, usize),
}

impl ModelArch {
    pub fn mlp(input: (usize, usize, usize), classes: usize) -> Self {
        ModelArch { kind: ArchKind::Mlp, input, classes, hidden: 256, conv_channels: (16, 32) }
    }

    pub fn cnn(input: (usize, usize, usize), classes: usize) -> Self {
        ModelArch { kind: ArchKind::Cnn, input, classes, hidden: 256, conv_channels: (16, 32) }
    }

    pub fn of_kind(kind: ArchKind, input: (usize, usize, usize), classes: usize) -> Self {
        match kind {
            ArchKind::Mlp => ModelArch::mlp(input, classes),
            ArchKind::Cnn => ModelArch::cnn(input, classes),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (h, w, c) = self.input;
        if h == 0 || w == 0 || (c != 1 && c != 3) {
            return Err(Error::validation(format!("bad input shape {:?}", self.input)));
        }
        if self.classes < 2 {
            return Err(Error::validation("need at least 2 classes"));
        }
        match self.kind {
            ArchKind::Mlp => {
                if self.hidden == 0 {
                    return Err(Error::validation("mlp hidden width must be nonzero"));
                }
            }
            ArchKind::Cnn => {
                if self.conv_channels.0 == 0 || self.conv_channels.1 == 0 {
                    return Err(Error::validation("cnn channel counts must be nonzero"));
                }
                if h / 4 == 0 || w / 4 == 0 {
                    return Err(Error::validation(format!(
                        "input {h}x{w} too small for two 2x2 poolings"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn flat_input(&self) -> usize {
        let (h, w, c) = self.input;
        h * w * c
    }

    /// Flattened feature count after the cnn's two conv/pool stages.
    pub fn cnn_flat_features(&self) -> usize {
        let (h, w, _) = self.input;
        let (h2, w2) = (h / 2, w / 2);
        let (h4, w4) = (h2 / 2, w2 / 2);
        self.conv_channels.1 * h4 * w4
    }
}
