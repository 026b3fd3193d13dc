// SPDX-License-Identifier: Apache-2.0

//! On-disk layouts.
//!
//! Data directory: `domain.txt` (domain manifest) and `dataset.bits`
//! (8-byte little-endian N, then one bit per label, LSB first).
//! Key directory: `<party>.key` (32-byte scalar then 33-byte compressed
//! point) and `<party>.pub` (33-byte point) for `s1`, `s2`, `participant`.

use dataring::data::{read_manifest, write_manifest, Domain, HistogramDataset};
use dataring::group::{keygen, KeyPair};
use dataring::sim::Manifest;
use dataring::{Error, Point, Result, Seed};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

pub const PARTIES: [&str; 3] = ["s1", "s2", "participant"];
const SCALAR_LEN: usize = 32;

fn ctx(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io(format!("{}: {e}", path.display()))
}

pub fn write_data_dir(dir: &Path, domain: &Domain, ds: &HistogramDataset) -> Result<()> {
    fs::create_dir_all(dir).map_err(ctx(dir))?;
    let p = dir.join("domain.txt");
    write_manifest(domain, fs::File::create(&p).map_err(ctx(&p))?)?;
    let p = dir.join("dataset.bits");
    fs::write(&p, ds.to_bit_image()).map_err(ctx(&p))?;
    Ok(())
}

pub fn read_data_dir(dir: &Path) -> Result<(Domain, HistogramDataset)> {
    let p = dir.join("domain.txt");
    let domain = read_manifest(BufReader::new(fs::File::open(&p).map_err(ctx(&p))?))?;
    let p = dir.join("dataset.bits");
    let ds = HistogramDataset::from_bit_image(&fs::read(&p).map_err(ctx(&p))?, domain.size())?;
    Ok((domain, ds))
}

/// Keys for `PARTIES`, as `keygen` derives them from a master seed.
pub fn derive_keys(seed: Seed) -> Vec<KeyPair<Point>> {
    PARTIES
        .iter()
        .map(|p| keygen::<Point>(seed.derive(&format!("keygen/{p}"), 0)))
        .collect()
}

pub fn write_keys(dir: &Path, keys: &[KeyPair<Point>]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(ctx(dir))?;
    let mut written = Vec::new();
    for (name, k) in PARTIES.iter().zip(keys) {
        let bytes = k.to_bytes();
        let p = dir.join(format!("{name}.key"));
        fs::write(&p, &bytes).map_err(ctx(&p))?;
        written.push(p);
        let p = dir.join(format!("{name}.pub"));
        fs::write(&p, &bytes[SCALAR_LEN..]).map_err(ctx(&p))?;
        written.push(p);
    }
    Ok(written)
}

pub fn read_keys(dir: &Path) -> Result<Vec<KeyPair<Point>>> {
    PARTIES
        .iter()
        .map(|name| {
            let p = dir.join(format!("{name}.key"));
            KeyPair::from_bytes(&fs::read(&p).map_err(ctx(&p))?)
                .map_err(|e| Error::Encoding(format!("{}: {e}", p.display())))
        })
        .collect()
}

pub fn write_labels(path: &Path, labels: &[u32]) -> Result<()> {
    let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
    fs::write(path, text).map_err(ctx(path))?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<u32>> {
    let text = fs::read_to_string(path).map_err(ctx(path))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse()
                .map_err(|_| Error::Encoding(format!("{}: bad label {l:?}", path.display())))
        })
        .collect()
}

pub fn write_manifest_file(path: &Path, m: &Manifest) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(ctx(dir))?;
    }
    let text = format!(
        "# dataring {} run manifest\n{}",
        env!("CARGO_PKG_VERSION"),
        m.render()
    );
    fs::write(path, text).map_err(ctx(path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_roundtrip_and_sizes() {
        let dir = tempfile::tempdir().unwrap();
        let keys = derive_keys(Seed(3));
        write_keys(dir.path(), &keys).unwrap();
        assert_eq!(fs::read(dir.path().join("s1.key")).unwrap().len(), 65);
        assert_eq!(fs::read(dir.path().join("s2.pub")).unwrap().len(), 33);
        assert_eq!(read_keys(dir.path()).unwrap(), keys);
        fs::write(dir.path().join("s2.key"), [0u8; 12]).unwrap();
        assert!(read_keys(dir.path()).is_err());
    }

    #[test]
    fn data_dir_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let domain = Domain::anonymous(40).unwrap();
        let ds = HistogramDataset::from_labels(40, [1, 5, 39]).unwrap();
        write_data_dir(dir.path(), &domain, &ds).unwrap();
        let (d2, ds2) = read_data_dir(dir.path()).unwrap();
        assert_eq!(d2.size(), 40);
        assert_eq!(ds2, ds);
    }
}
