//! Flat key-value configuration files.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use frameflow_core::geometry::ManifoldModel;
use ini::Ini;

use crate::error::{CliError, CliResult};

/// Keys of one configuration file, with bookkeeping of which were read.
#[derive(Debug, Default)]
pub struct Params {
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl Params {
    pub fn load(path: &Path) -> CliResult<Self> {
        let ini = Ini::load_from_file(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (section, props) in ini.iter() {
            if let Some(name) = section {
                return Err(CliError::usage(format!("sections are not supported, found [{name}]")));
            }
            for (k, v) in props.iter() {
                entries.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Self { entries, used: RefCell::default() })
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Self {
        Self {
            entries: pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            used: RefCell::default(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries.clone()
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.entries.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str, text: &str) -> CliResult<T> {
        text.parse().map_err(|_| CliError::usage(format!("{key}: cannot parse {text:?}")))
    }

    pub fn optional(&self, key: &str) -> Option<String> {
        self.raw(key).map(str::to_string)
    }

    pub fn choice(&self, key: &str, default: &str, allowed: &[&str]) -> CliResult<String> {
        let v = self.raw(key).unwrap_or(default);
        if allowed.contains(&v) {
            Ok(v.to_string())
        } else {
            Err(CliError::usage(format!("{key}: {v:?} is not one of {allowed:?}")))
        }
    }

    pub fn real(&self, key: &str, default: f64, lo: f64, hi: f64) -> CliResult<f64> {
        let v = match self.raw(key) {
            Some(t) => self.parse(key, t)?,
            None => default,
        };
        check_range(key, v, lo, hi)?;
        Ok(v)
    }

    pub fn count(&self, key: &str, default: usize, lo: usize, hi: usize) -> CliResult<usize> {
        let v = match self.raw(key) {
            Some(t) => self.parse(key, t)?,
            None => default,
        };
        check_range(key, v, lo, hi)?;
        Ok(v)
    }

    pub fn real_list(&self, key: &str, default: &[f64], lo: f64, hi: f64) -> CliResult<Vec<f64>> {
        let v: Vec<f64> = match self.raw(key) {
            Some(t) => t.split(',').map(|s| self.parse(key, s.trim())).collect::<CliResult<_>>()?,
            None => default.to_vec(),
        };
        if v.is_empty() {
            return Err(CliError::usage(format!("{key}: list is empty")));
        }
        for x in &v {
            check_range(key, *x, lo, hi)?;
        }
        Ok(v)
    }

    pub fn count_list(&self, key: &str, default: &[usize], lo: usize, hi: usize) -> CliResult<Vec<usize>> {
        let v: Vec<usize> = match self.raw(key) {
            Some(t) => t.split(',').map(|s| self.parse(key, s.trim())).collect::<CliResult<_>>()?,
            None => default.to_vec(),
        };
        if v.is_empty() {
            return Err(CliError::usage(format!("{key}: list is empty")));
        }
        for x in &v {
            check_range(key, *x, lo, hi)?;
        }
        Ok(v)
    }

    pub fn model(&self, key: &str, default: &str, allowed: &[&str]) -> CliResult<ManifoldModel> {
        Ok(match self.choice(key, default, allowed)?.as_str() {
            "torus2" => ManifoldModel::flat_torus(2)?,
            "torus3" => ManifoldModel::flat_torus(3)?,
            "sphere" => ManifoldModel::round_sphere(),
            "octagon" => ManifoldModel::hyperbolic_octagon(),
            other => unreachable!("{other} was checked against the allowed list"),
        })
    }

    /// Fails on keys no parser asked for.
    pub fn finish(&self) -> CliResult<()> {
        let used = self.used.borrow();
        let unknown: Vec<&String> = self.entries.keys().filter(|k| !used.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::usage(format!("unknown keys: {unknown:?}")))
        }
    }
}

fn check_range<T: PartialOrd + std::fmt::Display>(key: &str, v: T, lo: T, hi: T) -> CliResult<()> {
    if v >= lo && v <= hi {
        Ok(())
    } else {
        Err(CliError::usage(format!("{key} = {v} is outside [{lo}, {hi}]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typed_access_and_unknown_keys() {
        let p = Params::from_pairs(&[("n", "4"), ("shells", "8, 16"), ("typo", "1")]);
        assert_eq!(p.count("n", 3, 2, 6).unwrap(), 4);
        assert_eq!(p.real_list("shells", &[1.0], 0.0, 100.0).unwrap(), vec![8.0, 16.0]);
        assert_eq!(p.real("dt", 0.01, 1e-4, 1.0).unwrap(), 0.01);
        assert!(p.finish().is_err());
    }

    #[test]
    fn ranges_and_choices_are_enforced() {
        let p = Params::from_pairs(&[("n", "9"), ("model", "klein")]);
        assert!(matches!(p.count("n", 3, 2, 6), Err(CliError::Usage(_))));
        assert!(p.model("model", "sphere", &["sphere"]).is_err());
        assert!(Params::from_pairs(&[("x", "abc")]).real("x", 0.0, 0.0, 1.0).is_err());
    }
}
