//! Machine-readable verdicts for identity checks.

use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;

pub type Params = BTreeMap<String, serde_json::Value>;

/// One verified identity instance. `pass` holds iff `abs_err <= tol`.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub params: Params,
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub abs_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl IdentityReport {
    pub fn new(
        identity: &str,
        params: Params,
        lhs: Complex64,
        rhs: Complex64,
        n_terms: u64,
        tol_override: Option<f64>,
    ) -> IdentityReport {
        let tol = tol_override.unwrap_or_else(|| crate::sums::tol(n_terms));
        let abs_err = (lhs - rhs).norm();
        IdentityReport {
            identity: identity.to_string(),
            params,
            lhs: [lhs.re, lhs.im],
            rhs: [rhs.re, rhs.im],
            abs_err,
            tol,
            pass: abs_err <= tol,
        }
    }

    /// Canonical sort key: identity name then the serialized parameters.
    pub fn sort_key(&self) -> (String, String) {
        (
            self.identity.clone(),
            serde_json::to_string(&self.params).unwrap_or_default(),
        )
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.identity,
            serde_json::to_string(&self.params)
                .unwrap_or_default()
                .replace(',', ";"),
            self.lhs[0],
            self.lhs[1],
            self.rhs[0],
            self.rhs[1],
            self.abs_err,
            self.tol,
            self.pass
        )
    }
}

/// Helper for building parameter records in a fixed order.
pub fn params_from(pairs: &[(&str, serde_json::Value)]) -> Params {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

#[macro_export]
macro_rules! params {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = $crate::report::Params::new();
        $( m.insert($k.to_string(), ::serde_json::json!($v)); )*
        m
    }};
}
