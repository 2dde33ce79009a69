use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureRole {
    Feature,
    Protected,
    Label,
}

/// One column of the input table and how it is used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    pub role: FeatureRole,
    /// Raw value encoded as 1 for a binary column. When absent, a `{0,1}`
    /// column is read as-is and any other pair maps its lexicographically
    /// larger value to 1.
    pub positive: Option<String>,
}

impl FeatureSpec {
    pub fn continuous(name: &str) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::Continuous,
            role: FeatureRole::Feature,
            positive: None,
        }
    }

    pub fn binary(name: &str, positive: Option<&str>) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::Binary,
            role: FeatureRole::Feature,
            positive: positive.map(str::to_string),
        }
    }

    pub fn protected(name: &str, positive: Option<&str>) -> Self {
        FeatureSpec {
            role: FeatureRole::Protected,
            ..Self::binary(name, positive)
        }
    }

    pub fn label(name: &str, positive: Option<&str>) -> Self {
        FeatureSpec {
            role: FeatureRole::Label,
            ..Self::binary(name, positive)
        }
    }

    /// Parses `name:continuous` or `name:binary[:positive]`.
    pub fn parse_feature(s: &str) -> Result<Self> {
        let mut parts = s.splitn(3, ':');
        let name = parts.next().unwrap_or("").trim();
        if name.is_empty() {
            return Err(Error::Schema(format!("empty column name in `{s}`")));
        }
        match parts.next().map(str::trim) {
            Some("continuous") => {
                if parts.next().is_some() {
                    return Err(Error::Schema(format!(
                        "continuous column `{name}` cannot declare a positive value"
                    )));
                }
                Ok(Self::continuous(name))
            }
            Some("binary") => Ok(Self::binary(name, parts.next().map(str::trim))),
            Some(other) => Err(Error::Schema(format!(
                "unknown kind `{other}` for column `{name}`"
            ))),
            None => Err(Error::Schema(format!(
                "column `{name}` is missing its kind (continuous or binary)"
            ))),
        }
    }
}

/// A validated list of column specs: exactly one protected and one label
/// column, both binary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    specs: Vec<FeatureSpec>,
}

impl Schema {
    pub fn new(specs: Vec<FeatureSpec>) -> Result<Self> {
        let count = |role| specs.iter().filter(|s| s.role == role).count();
        if count(FeatureRole::Protected) != 1 {
            return Err(Error::Schema(
                "exactly one protected column is required".into(),
            ));
        }
        if count(FeatureRole::Label) != 1 {
            return Err(Error::Schema("exactly one label column is required".into()));
        }
        if count(FeatureRole::Feature) == 0 {
            return Err(Error::Schema("at least one feature column is required".into()));
        }
        for s in &specs {
            if s.role != FeatureRole::Feature && s.kind != FeatureKind::Binary {
                return Err(Error::Schema(format!(
                    "protected/label column `{}` must be binary",
                    s.name
                )));
            }
        }
        for (i, s) in specs.iter().enumerate() {
            if specs[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::Schema(format!("column `{}` declared twice", s.name)));
            }
        }
        Ok(Schema { specs })
    }

    pub fn specs(&self) -> &[FeatureSpec] {
        &self.specs
    }

    pub fn features(&self) -> impl Iterator<Item = &FeatureSpec> {
        self.specs.iter().filter(|s| s.role == FeatureRole::Feature)
    }

    pub fn protected(&self) -> &FeatureSpec {
        self.specs
            .iter()
            .find(|s| s.role == FeatureRole::Protected)
            .expect("validated")
    }

    pub fn label(&self) -> &FeatureSpec {
        self.specs
            .iter()
            .find(|s| s.role == FeatureRole::Label)
            .expect("validated")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
}

/// Row predicate applied while loading, e.g. `race in African-American|Caucasian`
/// or `days_b_screening_arrest <= 30`. Rows whose filter column is empty fail.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFilter {
    pub column: String,
    pub op: FilterOp,
    pub values: Vec<String>,
}

impl RowFilter {
    pub fn matches(&self, raw: &str) -> bool {
        let raw = raw.trim();
        if raw.is_empty() {
            return false;
        }
        let cmp = |target: &str| -> Option<std::cmp::Ordering> {
            match (raw.parse::<f64>(), target.parse::<f64>()) {
                (Ok(a), Ok(b)) => a.partial_cmp(&b),
                _ => None,
            }
        };
        let equal = |target: &str| match cmp(target) {
            Some(o) => o.is_eq(),
            None => raw == target,
        };
        let target = self.values[0].as_str();
        match self.op {
            FilterOp::Eq => equal(target),
            FilterOp::Ne => !equal(target),
            FilterOp::In => self.values.iter().any(|v| equal(v)),
            FilterOp::Lt => cmp(target).is_some_and(|o| o.is_lt()),
            FilterOp::Le => cmp(target).is_some_and(|o| o.is_le()),
            FilterOp::Gt => cmp(target).is_some_and(|o| o.is_gt()),
            FilterOp::Ge => cmp(target).is_some_and(|o| o.is_ge()),
        }
    }
}

impl FromStr for RowFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Schema(format!("cannot parse filter `{s}`"));
        let mut parts = s.trim().splitn(3, char::is_whitespace);
        let column = parts.next().filter(|c| !c.is_empty()).ok_or_else(bad)?;
        let op = match parts.next().ok_or_else(bad)? {
            "==" | "=" => FilterOp::Eq,
            "!=" => FilterOp::Ne,
            "<" => FilterOp::Lt,
            "<=" => FilterOp::Le,
            ">" => FilterOp::Gt,
            ">=" => FilterOp::Ge,
            "in" => FilterOp::In,
            _ => return Err(bad()),
        };
        let rest = parts.next().map(str::trim).filter(|r| !r.is_empty()).ok_or_else(bad)?;
        let values = if op == FilterOp::In {
            rest.split('|').map(|v| v.trim().to_string()).collect()
        } else {
            vec![rest.to_string()]
        };
        Ok(RowFilter {
            column: column.to_string(),
            op,
            values,
        })
    }
}

impl fmt::Display for RowFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            FilterOp::Eq => "==",
            FilterOp::Ne => "!=",
            FilterOp::Lt => "<",
            FilterOp::Le => "<=",
            FilterOp::Gt => ">",
            FilterOp::Ge => ">=",
            FilterOp::In => "in",
        };
        write!(f, "{} {} {}", self.column, op, self.values.join("|"))
    }
}
