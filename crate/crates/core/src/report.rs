//! Structured validation reports: per law, the number of checks, the largest
//! deviation seen and the offending locations.

use serde::Serialize;
use std::collections::BTreeMap;

/// Maximum number of offending locations kept per law.
const MAX_LOCATIONS: usize = 20;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LawStatus {
    pub checks: usize,
    pub max_deviation: f64,
    pub failures: usize,
    pub locations: Vec<String>,
}

impl LawStatus {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub laws: BTreeMap<String, LawStatus>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one check; it fails when `deviation > eps` or is not finite.
    pub fn record(&mut self, law: &str, deviation: f64, eps: f64, location: impl FnOnce() -> String) {
        let st = self.laws.entry(law.to_string()).or_default();
        st.checks += 1;
        let bad = !(deviation <= eps);
        if deviation.is_finite() {
            st.max_deviation = st.max_deviation.max(deviation);
        } else {
            st.max_deviation = f64::INFINITY;
        }
        if bad {
            st.failures += 1;
            if st.locations.len() < MAX_LOCATIONS {
                st.locations.push(location());
            }
        }
    }

    /// Records a boolean check.
    pub fn require(&mut self, law: &str, ok: bool, location: impl FnOnce() -> String) {
        self.record(law, if ok { 0.0 } else { f64::INFINITY }, 0.0, location);
    }

    pub fn merge(&mut self, other: Report) {
        for (k, v) in other.laws {
            let st = self.laws.entry(k).or_default();
            st.checks += v.checks;
            st.max_deviation = st.max_deviation.max(v.max_deviation);
            st.failures += v.failures;
            for l in v.locations {
                if st.locations.len() < MAX_LOCATIONS {
                    st.locations.push(l);
                }
            }
        }
    }

    /// Prefixes every law name, for nesting sub-reports.
    pub fn prefixed(self, prefix: &str) -> Report {
        Report { laws: self.laws.into_iter().map(|(k, v)| (format!("{prefix}{k}"), v)).collect() }
    }

    pub fn is_ok(&self) -> bool {
        self.laws.values().all(LawStatus::passed)
    }

    pub fn failed_laws(&self) -> Vec<&str> {
        self.laws.iter().filter(|(_, v)| !v.passed()).map(|(k, _)| k.as_str()).collect()
    }

    pub fn law(&self, name: &str) -> Option<&LawStatus> {
        self.laws.get(name)
    }
}
