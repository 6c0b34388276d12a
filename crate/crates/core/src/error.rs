use alloc::string::{String, ToString};

/// A configuration or scenario value broke one of its invariants.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid `{field}`: {reason}")]
pub struct ValidationError {
    /// Dotted path of the offending field, e.g. `actuator.gear_ratio`.
    pub field: String,
    pub reason: String,
}

impl ValidationError {
    pub fn new(field: &str, reason: &str) -> Self {
        Self {
            field: field.to_string(),
            reason: reason.to_string(),
        }
    }

    /// Prefixes the field path with the owning section.
    pub fn within(mut self, section: &str) -> Self {
        let mut field = String::with_capacity(section.len() + 1 + self.field.len());
        field.push_str(section);
        field.push('.');
        field.push_str(&self.field);
        self.field = field;
        self
    }
}
