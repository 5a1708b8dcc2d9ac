use std::fmt;

use serde::{Deserialize, Serialize};

/// Dot-separated class name, e.g. `android.media.AudioAttributes.Builder`.
///
/// Binary names (`android/media/AudioAttributes$Builder`) map onto this form
/// by replacing `/` and `$` with `.`; the mapping is idempotent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QualifiedName(String);

impl QualifiedName {
    /// Builds a qualified name, canonicalizing any binary-name separators.
    pub fn new(name: impl AsRef<str>) -> Self {
        QualifiedName(canonicalize(name.as_ref()))
    }

    pub fn from_binary(binary: &str) -> Self {
        QualifiedName(canonicalize(binary))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn simple_name(&self) -> &str {
        self.0.rsplit('.').next().unwrap_or(&self.0)
    }

    /// Everything before the last segment: the package for a top-level
    /// class, the outer class for a nested one.
    pub fn parent(&self) -> Option<&str> {
        self.0.rfind('.').map(|i| &self.0[..i])
    }

    pub fn child(&self, segment: &str) -> QualifiedName {
        QualifiedName(format!("{}.{}", self.0, segment))
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for QualifiedName {
    fn from(s: &str) -> Self {
        QualifiedName::new(s)
    }
}

pub fn canonicalize(name: &str) -> String {
    name.chars().map(|c| if c == '/' || c == '$' { '.' } else { c }).collect()
}

/// An `import` declaration as written in a snippet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Import {
    /// For a wildcard import this is the prefix before `.*`.
    pub path: QualifiedName,
    pub wildcard: bool,
    #[serde(default)]
    pub is_static: bool,
}

impl Import {
    pub fn single(path: impl AsRef<str>) -> Self {
        Import { path: QualifiedName::new(path), wildcard: false, is_static: false }
    }

    pub fn wildcard(prefix: impl AsRef<str>) -> Self {
        Import { path: QualifiedName::new(prefix), wildcard: true, is_static: false }
    }
}
