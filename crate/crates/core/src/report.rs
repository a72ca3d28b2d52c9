use serde::{Deserialize, Serialize};

/// Cap on stored violations; `violation_count` keeps the full tally.
const MAX_RECORDED: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: String,
    pub indices: Vec<usize>,
    pub measured: f64,
}

/// Outcome of a validator. `passed` holds exactly when no violation was seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
    pub violation_count: usize,
    /// Worst measured deviation per check, where one applies.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<(String, f64)>,
}

impl Default for ValidationReport {
    fn default() -> Self {
        Self::new()
    }
}

impl ValidationReport {
    pub fn new() -> Self {
        Self { passed: true, violations: Vec::new(), violation_count: 0, metrics: Vec::new() }
    }

    pub fn push(&mut self, condition: &str, indices: &[usize], measured: f64) {
        self.passed = false;
        self.violation_count += 1;
        if self.violations.len() < MAX_RECORDED {
            self.violations.push(Violation {
                condition: condition.to_string(),
                indices: indices.to_vec(),
                measured,
            });
        }
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push((name.to_string(), value));
    }

    pub fn has(&self, condition: &str) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.passed &= other.passed;
        self.violation_count += other.violation_count;
        for v in other.violations {
            if self.violations.len() < MAX_RECORDED {
                self.violations.push(v);
            }
        }
        self.metrics.extend(other.metrics);
    }

    pub fn summary(&self) -> String {
        match self.violations.first() {
            None => "passed".to_string(),
            Some(v) => format!(
                "{} violation(s); first: {} at {:?} (measured {:e})",
                self.violation_count, v.condition, v.indices, v.measured
            ),
        }
    }
}
