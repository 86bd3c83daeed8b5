use serde::{Deserialize, Serialize};

use super::special::reg_inc_beta;
use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSamples {
    pub label: String,
    pub values: Vec<f64>,
}

impl GroupSamples {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self { label: label.into(), values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f_value: f64,
    pub p_value: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: f64,
    pub ss_within: f64,
}

/// Upper tail `P(F > f)` of the F distribution.
pub fn f_survival(f: f64, d1: f64, d2: f64) -> Result<f64, StatsError> {
    if f <= 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    reg_inc_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

/// One-way ANOVA across two or more groups.
///
/// With zero spread inside every group, `F` is 0 (p = 1) when the group
/// means also agree and infinite (p = 0) otherwise.
pub fn anova(groups: &[GroupSamples]) -> Result<AnovaResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewSamples("ANOVA needs at least two groups".into()));
    }
    if let Some(g) = groups.iter().find(|g| g.values.len() < 2) {
        return Err(StatsError::TooFewSamples(format!("group `{}` has {} value(s), need 2", g.label, g.values.len())));
    }
    if groups.iter().flat_map(|g| &g.values).any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidArgument("non-finite sample".into()));
    }
    let n: usize = groups.iter().map(|g| g.values.len()).sum();
    let k = groups.len();
    let grand = groups.iter().flat_map(|g| &g.values).sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.values.iter().sum::<f64>() / g.values.len() as f64;
        ssb += g.values.len() as f64 * (m - grand) * (m - grand);
        ssw += g.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    }
    let df_between = k - 1;
    let df_within = n - k;
    let (f_value, p_value) = if ssw == 0.0 {
        if ssb == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = (ssb / df_between as f64) / (ssw / df_within as f64);
        (f, f_survival(f, df_between as f64, df_within as f64)?)
    };
    Ok(AnovaResult { f_value, p_value, df_between, df_within, ss_between: ssb, ss_within: ssw })
}
