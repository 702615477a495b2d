//! Flat key → value reports, serialized with sorted keys so identical runs
//! produce identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::Value;

use crate::params::{ParamSet, ThetaBound};
use crate::rational::Rational;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: BTreeMap<String, Value>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rational(&mut self, key: &str, value: &Rational) -> &mut Self {
        self.entries.insert(key.to_string(), Value::String(value.to_string()));
        self
    }

    pub fn int(&mut self, key: &str, value: impl Into<i64>) -> &mut Self {
        self.entries.insert(key.to_string(), Value::from(value.into()));
        self
    }

    pub fn count(&mut self, key: &str, value: usize) -> &mut Self {
        self.entries.insert(key.to_string(), Value::from(value as u64));
        self
    }

    pub fn text(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.entries.insert(key.to_string(), Value::String(value.into()));
        self
    }

    pub fn flag(&mut self, key: &str, value: bool) -> &mut Self {
        self.entries.insert(key.to_string(), Value::Bool(value));
        self
    }

    pub fn ids(&mut self, key: &str, ids: &[u64]) -> &mut Self {
        self.entries.insert(key.to_string(), Value::from(ids.to_vec()));
        self
    }

    /// Echoes the constants behind a run so it can be reproduced.
    pub fn params(&mut self, params: &ParamSet, bound: &ThetaBound, m: usize) -> &mut Self {
        self.count("delta", params.delta)
            .count("H", params.class_limit)
            .count("nu", params.lowest_class)
            .count("delta_prime", params.group_width)
            .rational("r", &params.target_utilization)
            .rational("mu", &bound.mu)
            .rational("beta1", &bound.beta1)
            .rational("beta2", &bound.beta2)
            .rational("theta", &bound.theta(m));
        for (h, x) in &params.batch_sizes {
            self.count(&format!("x_{h}"), *x);
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("report values are plain JSON")
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json() + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{search_params, theta_bound};

    #[test]
    fn keys_are_sorted_and_values_exact() {
        let p = search_params(5).unwrap();
        let mut r = Report::new();
        r.text("z", "last").params(&p, &theta_bound(&p, 5), 11);
        let json = r.to_json();
        assert!(json.find("\"H\"").unwrap() < json.find("\"z\"").unwrap());
        assert_eq!(r.get("theta"), Some(&Value::String("5/11".into())));
        assert_eq!(r.get("beta2"), Some(&Value::String("13/4".into())));
    }
}
