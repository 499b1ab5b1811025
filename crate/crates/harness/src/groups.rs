//! Grouping attributes recovered from feature blocks.
//!
//! File format, one group per line: `attribute group-id feature-index-list`,
//! where the list is comma-separated 1-based indices or `-` for "no feature
//! of this attribute active". An instance belongs to the group whose list
//! equals its active features within the attribute's indices.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use llp_core::Instance;

use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupMapping {
    attributes: BTreeMap<String, Vec<(String, BTreeSet<u32>)>>,
}

impl GroupMapping {
    pub fn parse(text: &str) -> Result<Self, (usize, usize, String)> {
        let mut attributes: BTreeMap<String, Vec<(String, BTreeSet<u32>)>> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let [attr, group, list] = fields[..] else {
                return Err((n + 1, 1, format!("expected 3 fields, got {}", fields.len())));
            };
            let indices = if list == "-" {
                BTreeSet::new()
            } else {
                list.split(',')
                    .map(|t| t.parse::<u32>().ok().filter(|&i| i > 0))
                    .collect::<Option<BTreeSet<u32>>>()
                    .ok_or_else(|| {
                        let col = raw.find(list).map_or(1, |c| c + 1);
                        (n + 1, col, format!("bad feature-index-list {list:?}"))
                    })?
            };
            let groups = attributes.entry(attr.to_string()).or_default();
            if groups.iter().any(|(g, s)| g == group || *s == indices) {
                return Err((n + 1, 1, format!("duplicate group {group:?} of {attr:?}")));
            }
            groups.push((group.to_string(), indices));
        }
        Ok(Self { attributes })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text).map_err(|(line, column, message)| HarnessError::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message,
        })
    }

    pub fn attributes(&self) -> Vec<String> {
        self.attributes.keys().cloned().collect()
    }

    /// Group ids of `attribute` in file order.
    pub fn groups(&self, attribute: &str) -> Result<Vec<String>> {
        Ok(self.lookup(attribute)?.iter().map(|(g, _)| g.clone()).collect())
    }

    fn lookup(&self, attribute: &str) -> Result<&[(String, BTreeSet<u32>)]> {
        self.attributes
            .get(attribute)
            .map(Vec::as_slice)
            .ok_or_else(|| HarnessError::UnknownAttribute {
                name: attribute.to_string(),
                available: self.attributes(),
            })
    }

    /// Group id of every instance under `attribute`.
    pub fn assign(&self, attribute: &str, instances: &[Instance]) -> Result<Vec<String>> {
        let groups = self.lookup(attribute)?;
        let block: BTreeSet<u32> = groups.iter().flat_map(|(_, s)| s.iter().copied()).collect();
        instances
            .iter()
            .enumerate()
            .map(|(index, x)| {
                let active: BTreeSet<u32> = x
                    .features
                    .iter()
                    .filter(|&(i, v)| v != 0.0 && block.contains(&i))
                    .map(|(i, _)| i)
                    .collect();
                groups
                    .iter()
                    .find(|(_, s)| *s == active)
                    .map(|(g, _)| g.clone())
                    .ok_or_else(|| HarnessError::Ungrouped {
                        attribute: attribute.to_string(),
                        index,
                    })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use llp_core::{Label, SparseVector};

    fn x(idx: &[u32]) -> Instance {
        let v = SparseVector::new(idx.iter().map(|&i| (i, 1.0)).collect()).unwrap();
        Instance::labeled(v, Label::Positive)
    }

    #[test]
    fn assigns_by_block() {
        let m = GroupMapping::parse("color red 1\ncolor blue 2\ncolor ? -\nsize big 3,4 # two-hot\n").unwrap();
        assert_eq!(m.attributes(), vec!["color", "size"]);
        let xs = [x(&[1, 5]), x(&[2, 3, 4]), x(&[5])];
        assert_eq!(m.assign("color", &xs).unwrap(), vec!["red", "blue", "?"]);
        assert!(matches!(m.assign("size", &xs), Err(HarnessError::Ungrouped { index: 0, .. })));
        assert!(matches!(m.assign("shape", &xs), Err(HarnessError::UnknownAttribute { .. })));
    }

    #[test]
    fn unknown_attribute_lists_alternatives() {
        let m = GroupMapping::parse("race a 1\nsex b 2\n").unwrap();
        let msg = m.assign("age", &[]).unwrap_err().to_string();
        assert!(msg.contains("race, sex"), "{msg}");
    }

    #[test]
    fn rejects_malformed_lines() {
        assert_eq!(GroupMapping::parse("a b\n").unwrap_err().0, 1);
        assert_eq!(GroupMapping::parse("a b 1\na c x").unwrap_err().1, 5);
        assert!(GroupMapping::parse("a b 1\na b 2").is_err());
        assert!(GroupMapping::parse("a b 0").is_err());
    }
}
