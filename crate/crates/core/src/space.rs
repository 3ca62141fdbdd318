//! Labeled vector spaces and ordered index sets.
//!
//! Every operator in this crate acts on an ordered list of labeled spaces.
//! Auxiliary spaces carry a spectral parameter and are eventually traced out;
//! quantum spaces carry no spectral parameter and survive traces.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Identifier for a space. Labels are compared as plain strings.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub String);

impl Label {
    pub fn new(s: impl Into<String>) -> Self {
        Label(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_string())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Auxiliary,
    Quantum,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Auxiliary => write!(f, "auxiliary"),
            SpaceKind::Quantum => write!(f, "quantum"),
        }
    }
}

/// A labeled vector space. Auxiliary spaces may carry a spectral value;
/// quantum spaces never do.
#[derive(Clone, Debug, PartialEq)]
pub struct Space {
    pub label: Label,
    pub dim: usize,
    pub kind: SpaceKind,
    pub spectral: Option<Complex64>,
}

impl Space {
    pub fn auxiliary(label: impl Into<Label>, dim: usize, spectral: Complex64) -> Self {
        assert!(dim >= 1, "space dimension must be at least 1");
        Space {
            label: label.into(),
            dim,
            kind: SpaceKind::Auxiliary,
            spectral: Some(spectral),
        }
    }

    /// Auxiliary space with no spectral value assigned yet.
    pub fn auxiliary_blank(label: impl Into<Label>, dim: usize) -> Self {
        assert!(dim >= 1, "space dimension must be at least 1");
        Space {
            label: label.into(),
            dim,
            kind: SpaceKind::Auxiliary,
            spectral: None,
        }
    }

    pub fn quantum(label: impl Into<Label>, dim: usize) -> Self {
        assert!(dim >= 1, "space dimension must be at least 1");
        Space {
            label: label.into(),
            dim,
            kind: SpaceKind::Quantum,
            spectral: None,
        }
    }

    pub fn spectral_value(&self) -> Result<Complex64> {
        self.spectral
            .ok_or_else(|| CoreError::MissingSpectral(self.label.0.clone()))
    }

    pub fn with_spectral(mut self, lambda: Complex64) -> Self {
        self.spectral = Some(lambda);
        self
    }
}

/// Orientation of an ordered index set. Reversal flips it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Ordered,
    Antiordered,
}

/// Ordered set of auxiliary-space labels. The member order drives every
/// fused product; `bar` reverses the order and flips the orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSet {
    pub members: Vec<Label>,
    pub orientation: Orientation,
}

impl IndexSet {
    pub fn new(members: Vec<Label>) -> Result<Self> {
        for (i, a) in members.iter().enumerate() {
            if members[i + 1..].contains(a) {
                return Err(CoreError::DuplicateLabel(a.0.clone()));
            }
        }
        Ok(IndexSet {
            members,
            orientation: Orientation::Ordered,
        })
    }

    pub fn from_labels<I, L>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: Into<Label>,
    {
        Self::new(labels.into_iter().map(Into::into).collect())
    }

    pub fn card(&self) -> usize {
        self.members.len()
    }

    /// Reversed set: member order reversed, orientation flipped.
    pub fn bar(&self) -> IndexSet {
        IndexSet {
            members: self.members.iter().rev().cloned().collect(),
            orientation: match self.orientation {
                Orientation::Ordered => Orientation::Antiordered,
                Orientation::Antiordered => Orientation::Ordered,
            },
        }
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.members.contains(label)
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> Result<()> {
        for m in &self.members {
            if other.contains(m) {
                return Err(CoreError::OverlappingIndexSets(m.0.clone()));
            }
        }
        Ok(())
    }
}

/// Registry of labeled spaces. Builders resolve index-set members here.
#[derive(Clone, Debug, Default)]
pub struct SpaceRegistry {
    spaces: BTreeMap<Label, Space>,
}

impl SpaceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, space: Space) -> Result<()> {
        if self.spaces.contains_key(&space.label) {
            return Err(CoreError::DuplicateLabel(space.label.0.clone()));
        }
        self.spaces.insert(space.label.clone(), space);
        Ok(())
    }

    pub fn get(&self, label: &Label) -> Result<&Space> {
        self.spaces
            .get(label)
            .ok_or_else(|| CoreError::UnknownSpace(label.0.clone()))
    }

    /// Replace the spectral value of an auxiliary space.
    pub fn set_spectral(&mut self, label: &Label, lambda: Complex64) -> Result<()> {
        let s = self
            .spaces
            .get_mut(label)
            .ok_or_else(|| CoreError::UnknownSpace(label.0.clone()))?;
        s.spectral = Some(lambda);
        Ok(())
    }

    pub fn resolve(&self, set: &IndexSet) -> Result<Vec<Space>> {
        set.members.iter().map(|l| self.get(l).cloned()).collect()
    }

    pub fn spaces(&self) -> impl Iterator<Item = &Space> {
        self.spaces.values()
    }
}
