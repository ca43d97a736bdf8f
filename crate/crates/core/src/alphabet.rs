//! Finite label and context alphabets. Symbols are canonically `0..size`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The label alphabet Y. Size 1 is accepted (all regrets collapse to 0);
/// the prediction game is only interesting from size 2 up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelAlphabet {
    size: usize,
}

impl LabelAlphabet {
    pub fn new(size: usize) -> Result<LabelAlphabet> {
        if size == 0 {
            return Err(Error::InvalidDistribution {
                reason: "label alphabet must be nonempty".into(),
            });
        }
        Ok(LabelAlphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn check(&self, label: usize) -> Result<()> {
        if label >= self.size {
            return Err(Error::LabelOutOfRange {
                label,
                size: self.size,
            });
        }
        Ok(())
    }
}

/// The context alphabet X. Size 1 encodes the context-free setting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextAlphabet {
    size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
}

impl ContextAlphabet {
    pub fn new(size: usize) -> Result<ContextAlphabet> {
        if size == 0 {
            return Err(Error::InvalidDistribution {
                reason: "context alphabet must be nonempty".into(),
            });
        }
        Ok(ContextAlphabet { size, names: None })
    }

    pub fn with_names(size: usize, names: Vec<String>) -> Result<ContextAlphabet> {
        let mut a = ContextAlphabet::new(size)?;
        if names.len() != size {
            return Err(Error::InvalidDistribution {
                reason: format!("{} names for {} contexts", names.len(), size),
            });
        }
        a.names = Some(names);
        Ok(a)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn name(&self, context: usize) -> Option<&str> {
        self.names.as_ref().and_then(|n| n.get(context)).map(|s| s.as_str())
    }

    pub fn check(&self, context: usize) -> Result<()> {
        if context >= self.size {
            return Err(Error::ContextOutOfRange {
                context,
                size: self.size,
            });
        }
        Ok(())
    }

    pub fn is_singleton(&self) -> bool {
        self.size == 1
    }
}
