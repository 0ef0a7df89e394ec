//! The JSON front description read by every subcommand.

use std::path::Path;

use anyhow::{bail, Context, Result};
use frontsing_core::front::FrontGerm;
use frontsing_core::oracle::CatalogEntry;
use frontsing_core::singular::ClosedBranch;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormalField {
    /// Must be the string `"auto"`.
    Auto(String),
    Explicit(Vec<String>),
}

/// A closed-form curve `t -> (u(t), v(t))` in the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub name: String,
    pub u: String,
    pub v: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontFile {
    pub dim: usize,
    pub map: Vec<String>,
    pub normal: NormalField,
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub branches: Vec<BranchSpec>,
}

impl FrontFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FrontFile = serde_json::from_str(text).context("malformed front file")?;
        file.germ()?;
        file.closed_branches()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    pub fn germ(&self) -> Result<FrontGerm> {
        let map: Vec<&str> = self.map.iter().map(String::as_str).collect();
        let normal: Option<Vec<&str>> = match &self.normal {
            NormalField::Auto(s) if s == "auto" => None,
            NormalField::Auto(s) => bail!("normal must be an array of expressions or \"auto\", got {s:?}"),
            NormalField::Explicit(n) => Some(n.iter().map(String::as_str).collect()),
        };
        Ok(FrontGerm::parse(self.dim, &map, normal.as_deref(), &self.label)?)
    }

    pub fn closed_branches(&self) -> Result<Vec<ClosedBranch>> {
        self.branches
            .iter()
            .map(|b| {
                ClosedBranch::parse(&b.name, &b.u, &b.v).with_context(|| format!("branch {:?}", b.name))
            })
            .collect()
    }

    pub fn from_catalog(entry: CatalogEntry) -> Self {
        let (map, normal) = entry.sources();
        FrontFile {
            dim: entry.dim(),
            map,
            normal: normal.map_or_else(|| NormalField::Auto("auto".into()), NormalField::Explicit),
            label: entry.name().to_string(),
            branches: entry
                .branches()
                .into_iter()
                .map(|b| BranchSpec {
                    name: b.name,
                    u: b.u.to_string(),
                    v: b.v.to_string(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_files_round_trip() {
        for e in CatalogEntry::ALL {
            let f = FrontFile::from_catalog(e);
            let back = FrontFile::from_json(&f.to_json()).unwrap();
            assert_eq!(back, f);
            assert_eq!(back.germ().unwrap(), e.germ());
            assert_eq!(back.closed_branches().unwrap(), e.branches());
        }
    }

    #[test]
    fn rejects_bad_files() {
        let bad = [
            r#"{"dim": 2, "map": ["u", "v"], "normal": "auto"}"#,
            r#"{"dim": 2, "map": ["u", "v", "0"], "normal": "automatic"}"#,
            r#"{"dim": 2, "map": ["u", "v", "0"], "normal": ["0", "1"]}"#,
            r#"{"dim": 2, "map": ["u", "v", "u+"], "normal": "auto"}"#,
            r#"{"dim": 2, "map": ["u", "v", "0"], "normal": "auto", "extra": 1}"#,
            r#"{"dim": 2, "map": ["u", "v", "0"], "normal": "auto", "branches": [{"name": "b", "u": "t", "v": "("}]}"#,
        ];
        for text in bad {
            assert!(FrontFile::from_json(text).is_err(), "{text}");
        }
        let ok = FrontFile::from_json(r#"{"dim": 2, "map": ["u", "v", "u*v"], "normal": "auto"}"#).unwrap();
        assert_eq!(ok.label, "");
    }
}
