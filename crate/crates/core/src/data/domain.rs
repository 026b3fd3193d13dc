// SPDX-License-Identifier: Apache-2.0

use super::schema::{Attribute, Schema};
use crate::error::{Error, Result};
use crate::seed::Seed;
use crate::Label;
use rand::Rng as _;
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Layout {
    /// Every tuple of the cross product; label = mixed-radix code.
    Full,
    /// A subset of tuple codes, sorted ascending; label = rank.
    Capped {
        points: Vec<u64>,
        index: HashMap<u64, Label>,
    },
}

/// Public enumerated domain of record types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    schema: Schema,
    layout: Layout,
    cap: Option<u32>,
    seed: Option<u64>,
}

impl Domain {
    /// Uncapped domain over the whole cross product.
    pub fn full(schema: Schema) -> Result<Self> {
        if schema.full_size() > u64::from(Label::MAX) {
            return Err(Error::Config(format!(
                "full domain of {} labels is too large; use a cap",
                schema.full_size()
            )));
        }
        Ok(Domain {
            schema,
            layout: Layout::Full,
            cap: None,
            seed: None,
        })
    }

    /// Featureless domain of `size` labels.
    pub fn anonymous(size: u32) -> Result<Self> {
        Self::full(Schema::new(vec![Attribute::index("label", size)?])?)
    }

    /// Domain over an explicit set of tuple codes.
    pub fn from_points(
        schema: Schema,
        mut points: Vec<u64>,
        cap: Option<u32>,
        seed: Option<u64>,
    ) -> Result<Self> {
        points.sort_unstable();
        points.dedup();
        if points.is_empty() {
            return Err(Error::Config("domain is empty".into()));
        }
        if points.len() > Label::MAX as usize || *points.last().unwrap() >= schema.full_size() {
            return Err(Error::Config("domain points out of range".into()));
        }
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (*p, i as Label))
            .collect();
        Ok(Domain {
            schema,
            layout: Layout::Capped { points, index },
            cap,
            seed,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn cap(&self) -> Option<u32> {
        self.cap
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn is_capped(&self) -> bool {
        matches!(self.layout, Layout::Capped { .. })
    }

    pub fn size(&self) -> usize {
        match &self.layout {
            Layout::Full => self.schema.full_size() as usize,
            Layout::Capped { points, .. } => points.len(),
        }
    }

    pub fn label_of_code(&self, code: u64) -> Option<Label> {
        match &self.layout {
            Layout::Full => (code < self.schema.full_size()).then_some(code as Label),
            Layout::Capped { index, .. } => index.get(&code).copied(),
        }
    }

    pub fn code_of_label(&self, label: Label) -> Option<u64> {
        match &self.layout {
            Layout::Full => {
                (u64::from(label) < self.schema.full_size()).then_some(u64::from(label))
            }
            Layout::Capped { points, .. } => points.get(label as usize).copied(),
        }
    }

    pub fn label_of_tuple(&self, tuple: &[u32]) -> Option<Label> {
        self.label_of_code(self.schema.encode(tuple).ok()?)
    }

    pub fn tuple_of_label(&self, label: Label) -> Option<Vec<u32>> {
        self.code_of_label(label).map(|c| self.schema.decode(c))
    }

    /// Maps a row of textual values (schema order) to its label.
    pub fn label_of_values<S: AsRef<str>>(&self, values: &[S]) -> Result<Label> {
        let attrs = self.schema.attributes();
        if values.len() != attrs.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                attrs.len(),
                values.len()
            )));
        }
        let mut tuple = Vec::with_capacity(attrs.len());
        for (a, v) in attrs.iter().zip(values) {
            let v = v.as_ref();
            tuple.push(a.code_of(v).ok_or_else(|| {
                Error::InvalidParameter(format!("`{v}` is not a value of `{}`", a.name()))
            })?);
        }
        self.label_of_tuple(&tuple)
            .ok_or_else(|| Error::InvalidParameter("record type not in the capped domain".into()))
    }

    /// Labels whose tuple satisfies `pred`, ascending.
    pub fn select(&self, mut pred: impl FnMut(&[u32]) -> bool) -> Vec<Label> {
        (0..self.size() as Label)
            .filter(|&l| pred(&self.tuple_of_label(l).expect("label in range")))
            .collect()
    }

    /// Labels where attribute `name` has textual value `value`.
    pub fn labels_where(&self, name: &str, value: &str) -> Result<Vec<Label>> {
        let (idx, attr) = self
            .schema
            .attribute(name)
            .ok_or_else(|| Error::InvalidParameter(format!("no attribute `{name}`")))?;
        let code = attr.code_of(value).ok_or_else(|| {
            Error::InvalidParameter(format!("`{value}` is not a value of `{name}`"))
        })?;
        Ok(self.select(|t| t[idx] == code))
    }

    pub(crate) fn points(&self) -> Option<&[u64]> {
        match &self.layout {
            Layout::Full => None,
            Layout::Capped { points, .. } => Some(points),
        }
    }
}

/// Capped domain of `cap · N` labels: the dataset's tuple codes plus
/// `(cap - 1) · N` filler codes near them.
///
/// Filler is produced by changing one attribute of a uniformly chosen real
/// record to a different uniformly chosen value, rejecting collisions. If the
/// one-step neighbourhood of the data is exhausted, the walk continues from
/// previously accepted filler points.
pub fn build_domain(schema: Schema, dataset_codes: &[u64], cap: u32, seed: Seed) -> Result<Domain> {
    if cap <= 1 {
        return Err(Error::Config(format!(
            "domain cap must exceed 1, got {cap}"
        )));
    }
    let real: Vec<u64> = {
        let mut v = dataset_codes.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    if real.is_empty() {
        return Err(Error::Config(
            "cannot cap a domain around an empty dataset".into(),
        ));
    }
    if let Some(bad) = real.iter().find(|c| **c >= schema.full_size()) {
        return Err(Error::Config(format!("tuple code {bad} outside schema")));
    }
    let target = (real.len() as u64)
        .checked_mul(u64::from(cap))
        .filter(|t| *t <= schema.full_size())
        .ok_or_else(|| {
            Error::Config(format!(
                "cap {cap} x {} records exceeds the {} possible record types",
                real.len(),
                schema.full_size()
            ))
        })? as usize;

    let attrs = schema.attributes();
    let mutable: Vec<usize> = (0..attrs.len())
        .filter(|&i| attrs[i].cardinality() > 1)
        .collect();
    if mutable.is_empty() {
        return Err(Error::Config("no attribute has more than one value".into()));
    }
    let mut rng = seed.stream("domain-filler", 0);
    let mut taken: HashSet<u64> = real.iter().copied().collect();
    let mut pool = real.clone();
    let mut stall = 0usize;
    let mut from_real_only = true;
    while taken.len() < target {
        let src_range = if from_real_only {
            real.len()
        } else {
            pool.len()
        };
        let src = pool[rng.gen_range(0..src_range)];
        let mut tuple = schema.decode(src);
        let a = mutable[rng.gen_range(0..mutable.len())];
        let card = attrs[a].cardinality();
        let shift = rng.gen_range(1..card);
        tuple[a] = (tuple[a] + shift) % card;
        let code = schema.encode(&tuple)?;
        if taken.insert(code) {
            pool.push(code);
            stall = 0;
        } else {
            stall += 1;
            if stall > 64 * target.max(1024) {
                if !from_real_only {
                    return Err(Error::Config("filler sampling stalled".into()));
                }
                from_real_only = false;
                stall = 0;
            }
        }
    }
    Domain::from_points(schema, pool, Some(cap), Some(seed.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::AttrKind;
    use proptest::prelude::*;

    fn fig2() -> Domain {
        Domain::full(
            Schema::new(vec![
                Attribute::categorical("Gen", ["F", "M"]).unwrap(),
                Attribute::categorical("Home", ["Rent", "Own"]).unwrap(),
                Attribute::categorical("Loan", ["10K", "20K"]).unwrap(),
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn fig2_domain_ordering() {
        let d = fig2();
        assert_eq!(d.size(), 8);
        assert_eq!(d.label_of_values(&["F", "Rent", "10K"]).unwrap(), 0);
        assert_eq!(d.label_of_values(&["M", "Own", "20K"]).unwrap(), 7);
        assert_eq!(d.labels_where("Loan", "10K").unwrap(), vec![0, 2, 4, 6]);
        assert!(d.label_of_values(&["X", "Own", "20K"]).is_err());
    }

    #[test]
    fn capped_size_and_errors() {
        let schema = Schema::new(vec![
            Attribute::index("a", 50).unwrap(),
            Attribute::index("b", 50).unwrap(),
        ])
        .unwrap();
        let real = [0u64, 17, 1234, 2499];
        let d = build_domain(schema.clone(), &real, 2, Seed(4)).unwrap();
        assert_eq!(d.size(), 8);
        for r in real {
            assert!(d.label_of_code(r).is_some());
        }
        assert!(build_domain(schema.clone(), &real, 1, Seed(4)).is_err());
        assert!(build_domain(schema, &real, 1000, Seed(4)).is_err());
        assert_eq!(d.schema().attributes()[0].kind(), AttrKind::Index);
    }

    #[test]
    fn filler_exhausts_tight_domains() {
        let d0 = fig2();
        let real = [0u64, 7];
        let d = build_domain(d0.schema().clone(), &real, 4, Seed(1)).unwrap();
        assert_eq!(d.size(), 8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn capped_domain_contains_dataset(
            codes in proptest::collection::hash_set(0u64..4096, 1..40),
            cap in 2u32..6,
            seed in any::<u64>(),
        ) {
            let schema = Schema::new(vec![
                Attribute::index("x", 16).unwrap(),
                Attribute::index("y", 16).unwrap(),
                Attribute::index("z", 16).unwrap(),
            ]).unwrap();
            let codes: Vec<u64> = codes.into_iter().collect();
            let d = build_domain(schema, &codes, cap, Seed(seed)).unwrap();
            prop_assert_eq!(d.size(), codes.len() * cap as usize);
            for c in &codes {
                prop_assert!(d.label_of_code(*c).is_some());
            }
            for l in 0..d.size() as Label {
                let t = d.tuple_of_label(l).unwrap();
                prop_assert_eq!(d.label_of_tuple(&t), Some(l));
            }
        }
    }
}
