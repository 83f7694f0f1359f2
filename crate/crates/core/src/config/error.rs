use std::fmt;

use thiserror::Error;

use crate::gscm::ParamViolation;

/// A problem in one configuration document, located by key path.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigError {
    pub file: String,
    /// Dotted key path within the document, e.g. `mobility.speed_min`.
    /// Empty when the problem concerns the whole document.
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(file: impl Into<String>, path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            file: file.into(),
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn with_file(mut self, file: impl Into<String>) -> Self {
        self.file = file.into();
        self
    }

    pub(crate) fn from_violation(file: &str, v: ParamViolation) -> Self {
        ConfigError::new(file, v.field, v.message)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}: {}", self.file, self.message)
        } else {
            write!(f, "{}: {}: {}", self.file, self.path, self.message)
        }
    }
}

/// Deserializes `text`, reporting failures with the key path that caused them.
pub(crate) fn from_json<T: serde::de::DeserializeOwned>(text: &str, file: &str) -> Result<T, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let mut path = e.path().to_string();
        if path == "." {
            path.clear();
        }
        let message = e.inner().to_string();
        // Unknown keys are reported against their parent; name the key itself.
        if let Some(key) = unknown_field_name(&message) {
            if path.rsplit('.').next() != Some(key.as_str()) {
                path = if path.is_empty() { key } else { format!("{path}.{key}") };
            }
        }
        ConfigError::new(file, path, strip_position(&message))
    })?;
    de.end()
        .map_err(|e| ConfigError::new(file, "", strip_position(&e.to_string())))?;
    Ok(value)
}

fn unknown_field_name(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}
