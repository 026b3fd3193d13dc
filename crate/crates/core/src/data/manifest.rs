// SPDX-License-Identifier: Apache-2.0

//! Flat-text domain manifest.
//!
//! ```text
//! size=<labels>
//! cap=<a>|none
//! seed=<u64>|none
//! attribute=<name>\t<kind>\t<cardinality>
//! value=<name>\t<code>\t<text>          (categorical and integer kinds)
//! label=<label>\t<tuple code>           (capped domains only)
//! ```

use super::domain::Domain;
use super::schema::{AttrKind, Attribute, Schema};
use crate::error::{Error, Result};
use std::io::{BufRead, Write};

pub fn write_manifest<W: Write>(domain: &Domain, mut out: W) -> Result<()> {
    writeln!(out, "# dataring domain manifest")?;
    writeln!(out, "size={}", domain.size())?;
    writeln!(
        out,
        "cap={}",
        domain.cap().map_or("none".into(), |c| c.to_string())
    )?;
    writeln!(
        out,
        "seed={}",
        domain.seed().map_or("none".into(), |c| c.to_string())
    )?;
    for a in domain.schema().attributes() {
        writeln!(
            out,
            "attribute={}\t{}\t{}",
            a.name(),
            a.kind().as_str(),
            a.cardinality()
        )?;
        for (i, v) in a.values().iter().enumerate() {
            writeln!(out, "value={}\t{}\t{}", a.name(), i, v)?;
        }
    }
    if let Some(points) = domain.points() {
        for (i, p) in points.iter().enumerate() {
            writeln!(out, "label={i}\t{p}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_manifest<R: BufRead>(input: R) -> Result<Domain> {
    let bad = |n: usize, msg: &str| Error::Config(format!("manifest line {n}: {msg}"));
    let mut size: Option<usize> = None;
    let mut cap: Option<u32> = None;
    let mut seed: Option<u64> = None;
    let mut attrs: Vec<(String, AttrKind, u32, Vec<String>)> = Vec::new();
    let mut points: Vec<u64> = Vec::new();

    for (i, line) in input.lines().enumerate() {
        let n = i + 1;
        let line = line?;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, val) = line
            .split_once('=')
            .ok_or_else(|| bad(n, "expected key=value"))?;
        let fields: Vec<&str> = val.split('\t').collect();
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad(n, "expected an integer"));
        match key {
            "size" => size = Some(num(val)? as usize),
            "cap" => {
                cap = if val == "none" {
                    None
                } else {
                    Some(num(val)? as u32)
                }
            }
            "seed" => seed = if val == "none" { None } else { Some(num(val)?) },
            "attribute" => {
                let [name, kind, card] = fields[..] else {
                    return Err(bad(n, "attribute needs 3 fields"));
                };
                attrs.push((
                    name.to_string(),
                    AttrKind::parse(kind)?,
                    num(card)? as u32,
                    Vec::new(),
                ));
            }
            "value" => {
                let [name, code, text] = fields[..] else {
                    return Err(bad(n, "value needs 3 fields"));
                };
                let a = attrs
                    .last_mut()
                    .filter(|a| a.0 == name)
                    .ok_or_else(|| bad(n, "value does not follow its attribute"))?;
                if num(code)? as usize != a.3.len() {
                    return Err(bad(n, "value codes must be consecutive"));
                }
                a.3.push(text.to_string());
            }
            "label" => {
                let [label, code] = fields[..] else {
                    return Err(bad(n, "label needs 2 fields"));
                };
                if num(label)? as usize != points.len() {
                    return Err(bad(n, "labels must be consecutive"));
                }
                points.push(num(code)?);
            }
            _ => return Err(bad(n, &format!("unknown key `{key}`"))),
        }
    }

    let mut built = Vec::with_capacity(attrs.len());
    for (name, kind, card, values) in attrs {
        let a = match kind {
            AttrKind::Index => Attribute::index(&name, card)?,
            _ => Attribute::with_values(&name, kind, values)?,
        };
        if a.cardinality() != card {
            return Err(Error::Config(format!(
                "attribute `{name}` declares {card} values"
            )));
        }
        built.push(a);
    }
    let schema = Schema::new(built)?;
    let domain = if points.is_empty() {
        Domain::full(schema)?
    } else {
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "label codes must be strictly increasing".into(),
            ));
        }
        Domain::from_points(schema, points, cap, seed)?
    };
    if Some(domain.size()) != size {
        return Err(Error::Config(format!(
            "manifest size {:?} does not match {} labels",
            size,
            domain.size()
        )));
    }
    Ok(domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::build_domain;
    use crate::seed::Seed;

    fn roundtrip(d: &Domain) -> Domain {
        let mut buf = Vec::new();
        write_manifest(d, &mut buf).unwrap();
        read_manifest(buf.as_slice()).unwrap()
    }

    #[test]
    fn full_and_capped_roundtrip() {
        let schema = Schema::new(vec![
            Attribute::categorical("Gen", ["F", "M"]).unwrap(),
            Attribute::integer("amt", [5, 10, 20]).unwrap(),
            Attribute::index("k", 9).unwrap(),
        ])
        .unwrap();
        let full = Domain::full(schema.clone()).unwrap();
        assert_eq!(roundtrip(&full), full);
        let capped = build_domain(schema, &[1, 5, 40], 3, Seed(2)).unwrap();
        assert_eq!(roundtrip(&capped), capped);
        assert_eq!(roundtrip(&Domain::anonymous(100).unwrap()).size(), 100);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_manifest("size=2\nfoo=1\n".as_bytes()).is_err());
        assert!(read_manifest("size=3\nattribute=x\tindex\t2\n".as_bytes()).is_err());
        assert!(read_manifest("size=2\nvalue=x\t0\ta\n".as_bytes()).is_err());
    }
}
