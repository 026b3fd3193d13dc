// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrKind {
    /// Values coded in first-seen (or declared) order.
    Categorical,
    /// Integer values coded by numeric rank.
    Integer,
    /// Bare index `0..cardinality` with no value table.
    Index,
}

impl AttrKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttrKind::Categorical => "categorical",
            AttrKind::Integer => "integer",
            AttrKind::Index => "index",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "categorical" => Ok(AttrKind::Categorical),
            "integer" => Ok(AttrKind::Integer),
            "index" => Ok(AttrKind::Index),
            _ => Err(Error::Config(format!("unknown attribute kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    name: String,
    kind: AttrKind,
    cardinality: u32,
    values: Vec<String>,
    codes: HashMap<String, u32>,
}

impl Attribute {
    pub fn categorical<S: Into<String>>(
        name: &str,
        values: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        Self::with_values(
            name,
            AttrKind::Categorical,
            values.into_iter().map(Into::into).collect(),
        )
    }

    /// Integer attribute; values are sorted numerically and coded by rank.
    pub fn integer(name: &str, values: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut v: Vec<i64> = values.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self::with_values(
            name,
            AttrKind::Integer,
            v.iter().map(i64::to_string).collect(),
        )
    }

    pub fn index(name: &str, cardinality: u32) -> Result<Self> {
        check_token(name)?;
        if cardinality == 0 {
            return Err(Error::Config(format!("attribute `{name}` has no values")));
        }
        Ok(Attribute {
            name: name.to_string(),
            kind: AttrKind::Index,
            cardinality,
            values: Vec::new(),
            codes: HashMap::new(),
        })
    }

    pub(crate) fn with_values(name: &str, kind: AttrKind, values: Vec<String>) -> Result<Self> {
        check_token(name)?;
        if values.is_empty() {
            return Err(Error::Config(format!("attribute `{name}` has no values")));
        }
        let mut codes = HashMap::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            check_token(v)?;
            if kind == AttrKind::Integer && v.parse::<i64>().is_err() {
                return Err(Error::Config(format!(
                    "attribute `{name}`: `{v}` is not an integer"
                )));
            }
            if codes.insert(v.clone(), i as u32).is_some() {
                return Err(Error::Config(format!(
                    "attribute `{name}`: duplicate value `{v}`"
                )));
            }
        }
        Ok(Attribute {
            name: name.to_string(),
            kind,
            cardinality: values.len() as u32,
            values,
            codes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> AttrKind {
        self.kind
    }

    pub fn cardinality(&self) -> u32 {
        self.cardinality
    }

    pub fn code_of(&self, value: &str) -> Option<u32> {
        match self.kind {
            AttrKind::Index => value.parse::<u32>().ok().filter(|c| *c < self.cardinality),
            AttrKind::Integer => {
                let canon = value.trim().parse::<i64>().ok()?.to_string();
                self.codes.get(&canon).copied()
            }
            AttrKind::Categorical => self.codes.get(value).copied(),
        }
    }

    pub fn value_of(&self, code: u32) -> Option<String> {
        match self.kind {
            AttrKind::Index => (code < self.cardinality).then(|| code.to_string()),
            _ => self.values.get(code as usize).cloned(),
        }
    }

    pub(crate) fn values(&self) -> &[String] {
        &self.values
    }
}

fn check_token(s: &str) -> Result<()> {
    if s.contains(['\t', '\n', '\r']) {
        return Err(Error::Config(format!(
            "`{}` contains a tab or line break",
            s.escape_debug()
        )));
    }
    Ok(())
}

/// Ordered attribute list. A tuple of codes maps to a mixed-radix integer
/// with the last attribute varying fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    attrs: Vec<Attribute>,
    full_size: u64,
}

impl Schema {
    pub fn new(attrs: Vec<Attribute>) -> Result<Self> {
        if attrs.is_empty() {
            return Err(Error::Config("schema has no attributes".into()));
        }
        let mut seen = HashSet::new();
        let mut full: u64 = 1;
        for a in &attrs {
            if !seen.insert(a.name()) {
                return Err(Error::Config(format!(
                    "duplicate attribute name `{}`",
                    a.name()
                )));
            }
            full = full
                .checked_mul(u64::from(a.cardinality()))
                .ok_or_else(|| Error::Config("full domain does not fit in 64 bits".into()))?;
        }
        Ok(Schema {
            attrs,
            full_size: full,
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attrs
    }

    pub fn attribute(&self, name: &str) -> Option<(usize, &Attribute)> {
        self.attrs
            .iter()
            .enumerate()
            .find(|(_, a)| a.name() == name)
    }

    /// Size of the uncapped cross product.
    pub fn full_size(&self) -> u64 {
        self.full_size
    }

    pub fn encode(&self, tuple: &[u32]) -> Result<u64> {
        if tuple.len() != self.attrs.len() {
            return Err(Error::InvalidParameter(format!(
                "tuple has {} fields, schema has {}",
                tuple.len(),
                self.attrs.len()
            )));
        }
        let mut code = 0u64;
        for (a, &c) in self.attrs.iter().zip(tuple) {
            if c >= a.cardinality() {
                return Err(Error::InvalidParameter(format!(
                    "code {c} out of range for `{}`",
                    a.name()
                )));
            }
            code = code * u64::from(a.cardinality()) + u64::from(c);
        }
        Ok(code)
    }

    pub fn decode(&self, mut code: u64) -> Vec<u32> {
        let mut out = vec![0u32; self.attrs.len()];
        for (slot, a) in out.iter_mut().zip(&self.attrs).rev() {
            let r = u64::from(a.cardinality());
            *slot = (code % r) as u32;
            code /= r;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig2_schema() -> Schema {
        Schema::new(vec![
            Attribute::categorical("Gen", ["F", "M"]).unwrap(),
            Attribute::categorical("Home", ["Rent", "Own"]).unwrap(),
            Attribute::categorical("Loan", ["10K", "20K"]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn mixed_radix_roundtrip() {
        let s = fig2_schema();
        assert_eq!(s.full_size(), 8);
        for c in 0..8 {
            assert_eq!(s.encode(&s.decode(c)).unwrap(), c);
        }
        assert_eq!(s.encode(&[1, 1, 1]).unwrap(), 7);
        assert!(s.encode(&[2, 0, 0]).is_err());
    }

    #[test]
    fn rejects_duplicates() {
        let a = Attribute::categorical("x", ["1"]).unwrap();
        assert!(Schema::new(vec![a.clone(), a]).is_err());
        assert!(Attribute::categorical("x", ["1", "1"]).is_err());
        assert!(Attribute::categorical("x\tbad", ["1"]).is_err());
    }

    #[test]
    fn integer_rank_coding() {
        let a = Attribute::integer("amt", [30, -5, 10, 10]).unwrap();
        assert_eq!(a.cardinality(), 3);
        assert_eq!(a.code_of("-5"), Some(0));
        assert_eq!(a.code_of(" 30"), Some(2));
        assert_eq!(a.code_of("+10"), Some(1));
        assert_eq!(a.code_of("11"), None);
        assert_eq!(a.value_of(2).as_deref(), Some("30"));
    }
}
