// SPDX-License-Identifier: Apache-2.0

use crate::bits::Indicator;
use crate::error::{Error, Result};
use crate::seed::Seed;
use crate::Label;
use rand::seq::{index, SliceRandom};

/// 0/1 histogram over a domain.
#[derive(Clone, PartialEq, Eq)]
pub struct HistogramDataset {
    bits: Indicator,
    n: usize,
}

impl HistogramDataset {
    pub fn empty(domain_size: usize) -> Self {
        HistogramDataset {
            bits: Indicator::zeros(domain_size),
            n: 0,
        }
    }

    /// Duplicate labels collapse to one.
    pub fn from_labels(
        domain_size: usize,
        labels: impl IntoIterator<Item = Label>,
    ) -> Result<Self> {
        let mut bits = Indicator::zeros(domain_size);
        for l in labels {
            if l as usize >= domain_size {
                return Err(Error::InvalidParameter(format!(
                    "label {l} outside domain of {domain_size}"
                )));
            }
            bits.set(l as usize, true);
        }
        Ok(Self::from_indicator(bits))
    }

    pub fn from_indicator(bits: Indicator) -> Self {
        let n = bits.count_ones();
        HistogramDataset { bits, n }
    }

    pub fn indicator(&self) -> &Indicator {
        &self.bits
    }

    pub fn domain_size(&self) -> usize {
        self.bits.len()
    }

    /// Number of records `N`.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn contains(&self, label: Label) -> bool {
        (label as usize) < self.bits.len() && self.bits.get(label as usize)
    }

    pub fn val(&self, label: Label) -> u8 {
        self.contains(label) as u8
    }

    /// Set labels, ascending.
    pub fn labels(&self) -> Vec<Label> {
        self.bits.iter_ones().map(|i| i as Label).collect()
    }

    /// `8-byte LE N ‖ packed bits`.
    pub fn to_bit_image(&self) -> Vec<u8> {
        let mut out = (self.n as u64).to_le_bytes().to_vec();
        out.extend(self.bits.to_packed_bytes());
        out
    }

    pub fn from_bit_image(bytes: &[u8], domain_size: usize) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(Error::Encoding("bit image shorter than its header".into()));
        }
        let n = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
        let bits = Indicator::from_packed_bytes(domain_size, &bytes[8..])
            .ok_or_else(|| Error::Encoding("bit image does not match the domain size".into()))?;
        let ds = Self::from_indicator(bits);
        if ds.n != n {
            return Err(Error::Encoding(format!(
                "bit image header says N={n}, bits hold {}",
                ds.n
            )));
        }
        Ok(ds)
    }
}

impl std::fmt::Debug for HistogramDataset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HistogramDataset")
            .field("domain_size", &self.bits.len())
            .field("n", &self.n)
            .finish()
    }
}

/// Labels of `L` true records known to the servers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackgroundKnowledge {
    pub labels: Vec<Label>,
    pub seed: u64,
}

impl BackgroundKnowledge {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Uniform sample of `l` set labels, without replacement.
pub fn sample_background(
    ds: &HistogramDataset,
    l: usize,
    seed: Seed,
) -> Result<BackgroundKnowledge> {
    if l == 0 || l > ds.len() {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= L <= N, got L={l}, N={}",
            ds.len()
        )));
    }
    let set = ds.labels();
    let mut rng = seed.stream("background", 0);
    let mut labels: Vec<Label> = index::sample(&mut rng, set.len(), l)
        .into_iter()
        .map(|i| set[i])
        .collect();
    labels.sort_unstable();
    Ok(BackgroundKnowledge {
        labels,
        seed: seed.0,
    })
}

/// `n` distinct labels drawn uniformly from a domain of `domain_size`.
pub fn synth_dataset(n: usize, domain_size: usize, seed: Seed) -> Result<HistogramDataset> {
    if n > domain_size {
        return Err(Error::InvalidParameter(format!(
            "N={n} exceeds domain size {domain_size}"
        )));
    }
    let mut rng = seed.stream("synth", 0);
    let picks = index::sample(&mut rng, domain_size, n);
    HistogramDataset::from_labels(domain_size, picks.into_iter().map(|i| i as Label))
}

/// Bijection on `0..size` with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    fwd: Vec<u32>,
    inv: Vec<u32>,
}

impl Permutation {
    pub fn identity(size: usize) -> Self {
        let fwd: Vec<u32> = (0..size as u32).collect();
        Permutation {
            inv: fwd.clone(),
            fwd,
        }
    }

    /// Fails unless `fwd` is a bijection on `0..fwd.len()`.
    pub fn from_forward(fwd: Vec<u32>) -> Result<Self> {
        let n = fwd.len();
        let mut inv = vec![u32::MAX; n];
        for (i, &j) in fwd.iter().enumerate() {
            let slot = inv
                .get_mut(j as usize)
                .ok_or_else(|| Error::Protocol(format!("permutation entry {j} out of range")))?;
            if *slot != u32::MAX {
                return Err(Error::Protocol(format!(
                    "permutation maps two positions to {j}"
                )));
            }
            *slot = i as u32;
        }
        Ok(Permutation { fwd, inv })
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    /// `σ(i)`.
    pub fn apply(&self, i: usize) -> usize {
        self.fwd[i] as usize
    }

    /// `σ⁻¹(j)`.
    pub fn invert(&self, j: usize) -> usize {
        self.inv[j] as usize
    }

    pub fn forward(&self) -> &[u32] {
        &self.fwd
    }

    pub fn inverse(&self) -> &[u32] {
        &self.inv
    }

    pub fn inverted(&self) -> Self {
        Permutation {
            fwd: self.inv.clone(),
            inv: self.fwd.clone(),
        }
    }
}

/// Fisher-Yates permutation of `0..size`.
pub fn random_permutation(size: usize, seed: Seed) -> Permutation {
    let mut fwd: Vec<u32> = (0..size as u32).collect();
    fwd.shuffle(&mut seed.stream("permutation", 0));
    Permutation::from_forward(fwd).expect("shuffle is a bijection")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn synth_edges() {
        assert_eq!(
            synth_dataset(10, 10, Seed(1)).unwrap().labels(),
            (0..10).collect::<Vec<_>>()
        );
        assert!(synth_dataset(0, 10, Seed(1)).unwrap().is_empty());
        assert!(synth_dataset(11, 10, Seed(1)).is_err());
        assert_ne!(
            synth_dataset(50, 1000, Seed(1)).unwrap(),
            synth_dataset(50, 1000, Seed(2)).unwrap()
        );
    }

    #[test]
    fn background_edges() {
        let ds = synth_dataset(20, 100, Seed(3)).unwrap();
        assert_eq!(
            sample_background(&ds, 20, Seed(0)).unwrap().labels,
            ds.labels()
        );
        let one = sample_background(&ds, 1, Seed(0)).unwrap();
        assert!(ds.contains(one.labels[0]));
        assert!(sample_background(&ds, 21, Seed(0)).is_err());
        assert!(sample_background(&ds, 0, Seed(0)).is_err());
    }

    #[test]
    fn permutations_of_three_all_occur() {
        let seen: HashSet<Vec<u32>> = (0..200u64)
            .map(|s| random_permutation(3, Seed(s)).forward().to_vec())
            .collect();
        assert_eq!(seen.len(), 6);
        assert_eq!(random_permutation(1, Seed(9)).forward(), &[0]);
    }

    #[test]
    fn malformed_permutation_rejected() {
        assert!(Permutation::from_forward(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_forward(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn bit_image_roundtrip_and_checks() {
        let ds = HistogramDataset::from_labels(8, [0, 3, 4, 7]).unwrap();
        let img = ds.to_bit_image();
        assert_eq!(&img[..8], &4u64.to_le_bytes());
        assert_eq!(img.len(), 9);
        assert_eq!(HistogramDataset::from_bit_image(&img, 8).unwrap(), ds);
        let mut bad = img.clone();
        bad[0] = 5;
        assert!(HistogramDataset::from_bit_image(&bad, 8).is_err());
        assert!(HistogramDataset::from_bit_image(&img, 16).is_err());
    }

    proptest! {
        #[test]
        fn inverse_composes_to_identity(size in 1usize..300, seed in any::<u64>()) {
            let p = random_permutation(size, Seed(seed));
            for i in 0..size {
                prop_assert_eq!(p.invert(p.apply(i)), i);
            }
        }

        #[test]
        fn background_is_subset(n in 1usize..60, l in 1usize..60, seed in any::<u64>()) {
            let ds = synth_dataset(n, 100, Seed(seed)).unwrap();
            let l = l.min(n);
            let bk = sample_background(&ds, l, Seed(seed ^ 1)).unwrap();
            prop_assert_eq!(bk.len(), l);
            prop_assert!(bk.labels.iter().all(|x| ds.contains(*x)));
            let uniq: HashSet<_> = bk.labels.iter().collect();
            prop_assert_eq!(uniq.len(), l);
        }
    }
}
