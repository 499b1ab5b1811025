//! One-hot encoding of the UCI Adult census records into 123 binary
//! features, and the group mapping that recovers each categorical attribute
//! from its feature block.

use std::fmt::Write as _;
use std::path::Path;

use llp_core::{Instance, Label, SparseVector};

use crate::{HarnessError, Result};

enum Kind {
    /// Value list in the order of the dataset documentation.
    Categorical(&'static [&'static str]),
    /// Bin `i` holds values with exactly `i` thresholds at or below them.
    Binned(&'static [f64]),
}

struct Attribute {
    name: &'static str,
    kind: Kind,
}

impl Attribute {
    fn width(&self) -> usize {
        match self.kind {
            Kind::Categorical(values) => values.len(),
            Kind::Binned(cuts) => cuts.len() + 1,
        }
    }

    /// Offset within the block, `None` for a missing value.
    fn encode(&self, raw: &str) -> Result<Option<usize>, String> {
        if raw == "?" {
            return Ok(None);
        }
        match self.kind {
            Kind::Categorical(values) => values
                .iter()
                .position(|v| *v == raw)
                .map(Some)
                .ok_or_else(|| format!("unknown {} value {raw:?}", self.name)),
            Kind::Binned(cuts) => {
                let x: f64 = raw
                    .parse()
                    .map_err(|_| format!("bad {} value {raw:?}", self.name))?;
                Ok(Some(cuts.iter().filter(|&&c| c <= x).count()))
            }
        }
    }
}

const ATTRIBUTES: [Attribute; 14] = [
    Attribute { name: "age", kind: Kind::Binned(&[26.0, 33.0, 41.0, 50.0]) },
    Attribute {
        name: "workclass",
        kind: Kind::Categorical(&[
            "Private", "Self-emp-not-inc", "Self-emp-inc", "Federal-gov", "Local-gov", "State-gov",
            "Without-pay", "Never-worked",
        ]),
    },
    Attribute { name: "fnlwgt", kind: Kind::Binned(&[106648.0, 158662.0, 196338.0, 259873.0]) },
    Attribute {
        name: "education",
        kind: Kind::Categorical(&[
            "Bachelors", "Some-college", "11th", "HS-grad", "Prof-school", "Assoc-acdm", "Assoc-voc",
            "9th", "7th-8th", "12th", "Masters", "1st-4th", "10th", "Doctorate", "5th-6th", "Preschool",
        ]),
    },
    Attribute { name: "education-num", kind: Kind::Binned(&[9.0, 10.0, 11.0, 13.0]) },
    Attribute {
        name: "marital-status",
        kind: Kind::Categorical(&[
            "Married-civ-spouse", "Divorced", "Never-married", "Separated", "Widowed",
            "Married-spouse-absent", "Married-AF-spouse",
        ]),
    },
    Attribute {
        name: "occupation",
        kind: Kind::Categorical(&[
            "Tech-support", "Craft-repair", "Other-service", "Sales", "Exec-managerial",
            "Prof-specialty", "Handlers-cleaners", "Machine-op-inspct", "Adm-clerical",
            "Farming-fishing", "Transport-moving", "Priv-house-serv", "Protective-serv",
            "Armed-Forces",
        ]),
    },
    Attribute {
        name: "relationship",
        kind: Kind::Categorical(&[
            "Wife", "Own-child", "Husband", "Not-in-family", "Other-relative", "Unmarried",
        ]),
    },
    Attribute {
        name: "race",
        kind: Kind::Categorical(&["White", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other", "Black"]),
    },
    Attribute { name: "sex", kind: Kind::Categorical(&["Female", "Male"]) },
    Attribute { name: "capital-gain", kind: Kind::Binned(&[0.5]) },
    Attribute { name: "capital-loss", kind: Kind::Binned(&[0.5]) },
    Attribute { name: "hours-per-week", kind: Kind::Binned(&[35.0, 40.0, 41.0, 50.0]) },
    Attribute {
        name: "native-country",
        kind: Kind::Categorical(&[
            "United-States", "Cambodia", "England", "Puerto-Rico", "Canada", "Germany",
            "Outlying-US(Guam-USVI-etc)", "India", "Japan", "Greece", "South", "China", "Cuba",
            "Iran", "Honduras", "Philippines", "Italy", "Poland", "Jamaica", "Vietnam", "Mexico",
            "Portugal", "Ireland", "France", "Dominican-Republic", "Laos", "Ecuador", "Taiwan",
            "Haiti", "Columbia", "Hungary", "Guatemala", "Nicaragua", "Scotland", "Thailand",
            "Yugoslavia", "El-Salvador", "Trinadad&Tobago", "Peru", "Hong", "Holand-Netherlands",
        ]),
    },
];

/// Number of encoded features.
pub const ADULT_DIMENSION: usize = 123;

/// First feature index (1-based) of every attribute block.
fn offsets() -> [u32; 14] {
    let mut out = [0; 14];
    let mut next = 1;
    for (o, a) in out.iter_mut().zip(&ATTRIBUTES) {
        *o = next;
        next += a.width() as u32;
    }
    out
}

/// Encodes comma-separated census records (`>50K` is the positive class).
/// Blank lines are skipped; a trailing `.` on the label is accepted.
pub fn encode_adult(text: &str) -> Result<Vec<Instance>, (usize, String)> {
    let offsets = offsets();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| (n + 1, e.to_string()))?;
        let line = record.position().map_or(n + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != ATTRIBUTES.len() + 1 {
            return Err((line, format!("expected 15 fields, got {}", record.len())));
        }
        let mut entries = Vec::with_capacity(ATTRIBUTES.len());
        for ((attr, &offset), raw) in ATTRIBUTES.iter().zip(&offsets).zip(record.iter()) {
            if let Some(k) = attr.encode(raw).map_err(|m| (line, m))? {
                entries.push((offset + k as u32, 1.0));
            }
        }
        let label = match record[ATTRIBUTES.len()].trim_end_matches('.') {
            ">50K" => Label::Positive,
            "<=50K" => Label::Negative,
            other => return Err((line, format!("bad income label {other:?}"))),
        };
        let features = SparseVector::new(entries).map_err(|e| (line, e.to_string()))?;
        out.push(Instance::labeled(features, label));
    }
    Ok(out)
}

pub fn encode_adult_file(path: impl AsRef<Path>) -> Result<Vec<Instance>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let instances = encode_adult(&text).map_err(|(line, message)| HarnessError::Parse {
        path: path.to_path_buf(),
        line,
        column: 1,
        message,
    })?;
    if instances.is_empty() {
        return Err(HarnessError::NoInstances(path.to_path_buf()));
    }
    Ok(instances)
}

/// Group mapping for every categorical attribute, one line per value plus a
/// `?` line (no feature of the block active) for missing values.
pub fn adult_group_mapping() -> String {
    let mut s = String::from("# attribute group-id feature-index-list\n");
    for (attr, offset) in ATTRIBUTES.iter().zip(offsets()) {
        if let Kind::Categorical(values) = attr.kind {
            for (k, v) in values.iter().enumerate() {
                writeln!(s, "{} {} {}", attr.name, v, offset + k as u32).expect("String write");
            }
            writeln!(s, "{} ? -", attr.name).expect("String write");
        }
    }
    s
}
