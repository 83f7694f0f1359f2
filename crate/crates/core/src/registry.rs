//! Name-keyed registries for interchangeable strategies.
//!
//! Each strategy family (acceleration structure, spawn distribution, mobility
//! model, ...) exposes a `registry()` returning a [`Registry`] of factories.
//! Config documents and CLI flags select an entry by name.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("unknown {kind} `{name}` (available: {})", available.join(", "))]
pub struct UnknownStrategy {
    pub kind: &'static str,
    pub name: String,
    pub available: Vec<String>,
}

/// An ordered map from strategy name to factory.
pub struct Registry<F> {
    kind: &'static str,
    entries: BTreeMap<String, F>,
}

impl<F> Registry<F> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Registers `factory` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: impl Into<String>, factory: F) -> &mut Self {
        self.entries.insert(name.into(), factory);
        self
    }

    pub fn with(mut self, name: impl Into<String>, factory: F) -> Self {
        self.register(name, factory);
        self
    }

    pub fn get(&self, name: &str) -> Result<&F, UnknownStrategy> {
        self.entries.get(name).ok_or_else(|| UnknownStrategy {
            kind: self.kind,
            name: name.to_string(),
            available: self.names().map(str::to_string).collect(),
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_unknown() {
        let reg = Registry::<fn() -> u32>::new("widget")
            .with("one", || 1)
            .with("two", || 2);
        assert_eq!((reg.get("two").unwrap())(), 2);
        let err = reg.get("three").unwrap_err();
        assert_eq!(err.available, vec!["one", "two"]);
        assert_eq!(err.to_string(), "unknown widget `three` (available: one, two)");
    }
}
