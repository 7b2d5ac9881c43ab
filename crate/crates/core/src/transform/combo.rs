use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Pooling;
use crate::Error;

/// A single input representation a plan is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Representation {
    /// The series itself.
    Base,
    /// First-order difference, one sample shorter.
    Diff,
}

impl Representation {
    pub const ALL: [Representation; 2] = [Representation::Base, Representation::Diff];

    /// Length of the represented series for an input of length `t`.
    pub fn effective_length(self, t: usize) -> usize {
        match self {
            Representation::Base => t,
            Representation::Diff => t.saturating_sub(1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Representation::Base => "BASE",
            Representation::Diff => "DIFF",
        }
    }
}

/// The set of representations whose features are concatenated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RepresentationSet {
    Base,
    Diff,
    /// BASE features followed by DIFF features.
    Mix,
}

impl RepresentationSet {
    pub const ALL: [RepresentationSet; 3] = [RepresentationSet::Base, RepresentationSet::Diff, RepresentationSet::Mix];

    pub fn members(self) -> &'static [Representation] {
        match self {
            RepresentationSet::Base => &[Representation::Base],
            RepresentationSet::Diff => &[Representation::Diff],
            RepresentationSet::Mix => &[Representation::Base, Representation::Diff],
        }
    }
}

/// One (representation set, pooling operator) feature configuration.
///
/// Displayed as `PO`, `PO_DIFF` or `PO_MIX`, e.g. `PPV`, `GMP_DIFF`, `LSPV_MIX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ComboId {
    pub representations: RepresentationSet,
    pub pooling: Pooling,
}

impl ComboId {
    pub const fn new(representations: RepresentationSet, pooling: Pooling) -> Self {
        Self { representations, pooling }
    }

    /// The default fallback combination of the vote validation.
    pub const PPV_MIX: ComboId = ComboId::new(RepresentationSet::Mix, Pooling::Ppv);
    /// Plain PPV on the base series: the MiniRocket baseline.
    pub const PPV: ComboId = ComboId::new(RepresentationSet::Base, Pooling::Ppv);

    /// All 15 combinations in enumeration order: the five pooling operators
    /// for BASE, then for DIFF, then for MIX.
    pub fn all() -> [ComboId; 15] {
        let mut out = [ComboId::PPV; 15];
        for (i, set) in RepresentationSet::ALL.into_iter().enumerate() {
            for (j, pooling) in Pooling::ALL.into_iter().enumerate() {
                out[i * 5 + j] = ComboId::new(set, pooling);
            }
        }
        out
    }

    /// Position in [`ComboId::all`].
    pub fn index(self) -> usize {
        let set = match self.representations {
            RepresentationSet::Base => 0,
            RepresentationSet::Diff => 1,
            RepresentationSet::Mix => 2,
        };
        set * 5 + self.pooling.index()
    }

    /// Column count of this combination's feature matrix for a plan producing
    /// `per_representation` features.
    pub fn num_features(self, per_representation: usize) -> usize {
        self.representations.members().len() * per_representation
    }
}

impl fmt::Display for ComboId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.representations {
            RepresentationSet::Base => write!(f, "{}", self.pooling),
            RepresentationSet::Diff => write!(f, "{}_DIFF", self.pooling),
            RepresentationSet::Mix => write!(f, "{}_MIX", self.pooling),
        }
    }
}

impl FromStr for ComboId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let upper = s.trim().to_ascii_uppercase();
        let (po, set) = match upper.split_once('_') {
            None => (upper.as_str(), RepresentationSet::Base),
            Some((po, "DIFF")) => (po, RepresentationSet::Diff),
            Some((po, "MIX")) => (po, RepresentationSet::Mix),
            Some((po, "BASE")) => (po, RepresentationSet::Base),
            Some(_) => return Err(Error::Config(format!("unknown combination '{s}'"))),
        };
        let pooling = po.parse().map_err(|_| Error::Config(format!("unknown combination '{s}'")))?;
        Ok(ComboId::new(set, pooling))
    }
}

impl TryFrom<String> for ComboId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<ComboId> for String {
    fn from(c: ComboId) -> String {
        c.to_string()
    }
}
