use std::fmt;

/// Collected violations from a report-style check. Empty means valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport<V> {
    violations: Vec<V>,
}

impl<V> ValidationReport<V> {
    pub fn new() -> Self {
        ValidationReport { violations: Vec::new() }
    }

    pub fn push(&mut self, violation: V) {
        self.violations.push(violation);
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[V] {
        &self.violations
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn extend(&mut self, other: ValidationReport<V>) {
        self.violations.extend(other.violations);
    }

    pub fn into_violations(self) -> Vec<V> {
        self.violations
    }
}

impl<V> Default for ValidationReport<V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V> FromIterator<V> for ValidationReport<V> {
    fn from_iter<I: IntoIterator<Item = V>>(iter: I) -> Self {
        ValidationReport { violations: iter.into_iter().collect() }
    }
}

impl<V: fmt::Display> fmt::Display for ValidationReport<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
