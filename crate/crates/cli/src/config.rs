// SPDX-License-Identifier: Apache-2.0

//! Parameter resolution: command-line flag, then config file, then default.
//! Every resolved value is recorded into the run manifest.

use dataring::sim::Manifest;
use dataring::{Error, Result};
use std::collections::BTreeSet;
use std::fmt::{self, Display};
use std::path::Path;
use std::str::FromStr;

/// Comma-separated list value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(List(Vec::new()));
        }
        s.split(',')
            .map(|x| x.trim().parse::<T>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(List)
    }
}

impl<T: Display> Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

pub struct Resolver {
    file: Manifest,
    used: BTreeSet<String>,
    resolved: Manifest,
}

impl Resolver {
    pub fn new(command: &str, config: Option<&Path>) -> Result<Self> {
        let file = match config {
            Some(p) => {
                Manifest::read(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => Manifest::new(),
        };
        if let Some(c) = file.get("command") {
            if c != command {
                return Err(Error::Config(format!(
                    "config was written by `{c}`, not `{command}`"
                )));
            }
        }
        let mut resolved = Manifest::new();
        resolved.set("command", command);
        Ok(Resolver {
            file,
            used: BTreeSet::from(["command".to_string()]),
            resolved,
        })
    }

    fn from_file<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::Config(format!("config key `{key}`: {e}"))),
        }
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        let file = self.from_file(key)?;
        let v = flag.or(file).unwrap_or(default);
        self.resolved.set(key, &v);
        Ok(v)
    }

    /// Like [`get`](Self::get) without a default; absent values are not
    /// recorded.
    pub fn opt<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        let file = self.from_file(key)?;
        let v = flag.or(file);
        if let Some(v) = &v {
            self.resolved.set(key, v);
        }
        Ok(v)
    }

    /// The run manifest. Fails on config keys no parameter consumed.
    pub fn finish(self) -> Result<Manifest> {
        let unknown: Vec<&str> = self
            .file
            .entries()
            .iter()
            .map(|(k, _)| k.as_str())
            .filter(|k| !self.used.contains(*k))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::Config(format!(
                "unknown config key(s): {}",
                unknown.join(", ")
            )));
        }
        Ok(self.resolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.conf");
        std::fs::write(&p, "# frozen\nN=1000\nV=30\n").unwrap();
        let mut r = Resolver::new("x", Some(&p)).unwrap();
        assert_eq!(r.get("N", Some(7u64), 5).unwrap(), 7);
        assert_eq!(r.get("V", None, 5u64).unwrap(), 30);
        assert_eq!(r.get("L", None, 5u64).unwrap(), 5);
        assert_eq!(r.opt::<u64>("r0", None).unwrap(), None);
        let m = r.finish().unwrap();
        assert_eq!(m.render(), "command=x\nN=7\nV=30\nL=5\n");

        std::fs::write(&p, "N=1\nbogus=2\n").unwrap();
        let mut r = Resolver::new("x", Some(&p)).unwrap();
        r.get("N", None, 0u64).unwrap();
        assert!(r.finish().unwrap_err().to_string().contains("bogus"));

        std::fs::write(&p, "command=y\n").unwrap();
        assert!(Resolver::new("x", Some(&p)).is_err());
    }

    #[test]
    fn lists() {
        let l: List<u64> = "1, 2,3".parse().unwrap();
        assert_eq!(l.0, vec![1, 2, 3]);
        assert_eq!(l.to_string(), "1,2,3");
        assert!("1,x".parse::<List<u64>>().is_err());
        assert!("".parse::<List<u64>>().unwrap().0.is_empty());
    }
}
