//! On-disk sequence files.
//!
//! JSON is lossless and self-describing:
//!
//! ```json
//! {"format_version": "1", "kind": "fhs",
//!  "params": {"N": 8, "M": 4, "lambda": 2, "ell": 5},
//!  "provenance": {"construction": "direct", "p": 3, ...},
//!  "sequences": [[...], ...], "slot_labels": [...]}
//! ```
//!
//! OC files carry `"kind": "oc"` and `params` `{n, s, v}`. Extended sets
//! flatten the slot pair `(f, w)` to `f·v + w`. CSV holds one sequence per
//! line and nothing else.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fhs::{FhsSet, Provenance, SetError, SetParams};
use crate::oc::{OcError, OcParams, OcProvenance, OcSet};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported format_version {0:?}")]
    Version(String),
    #[error("declared {field} = {declared} but the sequences give {actual}")]
    Mismatch { field: &'static str, declared: u64, actual: u64 },
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Oc(#[from] OcError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Body {
    Fhs { params: SetParams, provenance: Provenance },
    Oc { params: OcParams, provenance: OcProvenance },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SequenceFile {
    format_version: String,
    #[serde(flatten)]
    body: Body,
    sequences: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slot_labels: Option<Vec<u32>>,
}

/// Contents of a JSON sequence file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Loaded {
    Fhs(FhsSet),
    Oc(OcSet),
}

impl Loaded {
    pub fn sequences(&self) -> &[Vec<u32>] {
        match self {
            Loaded::Fhs(s) => s.sequences(),
            Loaded::Oc(s) => s.sequences(),
        }
    }
}

pub fn fhs_to_json(set: &FhsSet) -> String {
    let file = SequenceFile {
        format_version: FORMAT_VERSION.into(),
        body: Body::Fhs { params: set.params(), provenance: set.provenance().clone() },
        sequences: set.sequences().to_vec(),
        slot_labels: set.slot_labels().map(<[u32]>::to_vec),
    };
    serde_json::to_string(&file).expect("sequence files always serialize")
}

pub fn oc_to_json(set: &OcSet) -> String {
    let file = SequenceFile {
        format_version: FORMAT_VERSION.into(),
        body: Body::Oc { params: set.params(), provenance: set.provenance().clone() },
        sequences: set.sequences().to_vec(),
        slot_labels: None,
    };
    serde_json::to_string(&file).expect("sequence files always serialize")
}

fn check(field: &'static str, declared: u64, actual: u64) -> Result<(), FormatError> {
    if declared == actual {
        Ok(())
    } else {
        Err(FormatError::Mismatch { field, declared, actual })
    }
}

pub fn from_json(text: &str) -> Result<Loaded, FormatError> {
    let file: SequenceFile = serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))?;
    if file.format_version != FORMAT_VERSION {
        return Err(FormatError::Version(file.format_version));
    }
    let rows = file.sequences.len() as u64;
    let len = file.sequences.first().map_or(0, Vec::len) as u64;
    match file.body {
        Body::Fhs { params, provenance } => {
            check("N", params.length, len)?;
            check("M", params.family_size, rows)?;
            let set = FhsSet::new(file.sequences, params.alphabet as usize, params.lambda, provenance)?;
            let set = match file.slot_labels {
                Some(labels) => set.with_slot_labels(labels)?,
                None => set,
            };
            set.params_of()?;
            Ok(Loaded::Fhs(set))
        }
        Body::Oc { params, provenance } => {
            check("n", params.n, len)?;
            check("s", params.s, rows)?;
            Ok(Loaded::Oc(OcSet::new(file.sequences, params.v as usize, provenance)?))
        }
    }
}

pub fn to_csv(sequences: &[Vec<u32>]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in sequences {
        w.serialize(row).expect("writing to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("writing to memory cannot fail")).expect("csv output is ASCII")
}

pub fn sequences_from_csv(text: &str) -> Result<Vec<Vec<u32>>, FormatError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    r.deserialize::<Vec<u32>>()
        .map(|row| row.map_err(|e| FormatError::Parse(e.to_string())))
        .collect()
}

/// A CSV file as an imported set over the smallest alphabet that holds it.
pub fn fhs_from_csv(text: &str) -> Result<FhsSet, FormatError> {
    let sequences = sequences_from_csv(text)?;
    let alphabet = sequences.iter().flatten().max().map_or(0, |&s| s as usize + 1);
    Ok(FhsSet::new(sequences, alphabet, None, Provenance::Imported)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extend::concatenate;
    use crate::fhs::{generate_fhs_set, FhsParams};
    use crate::oc::{oc_crt_product, oc_linear, oc_affine};

    #[test]
    fn json_round_trips() {
        let set = generate_fhs_set(FhsParams::new(3, 1, 2, 0, 2).with_seed(4)).unwrap();
        assert_eq!(from_json(&fhs_to_json(&set)).unwrap(), Loaded::Fhs(set.clone()));

        let ext = concatenate(&set, &oc_linear(11).unwrap()).unwrap();
        assert_eq!(from_json(&fhs_to_json(&ext)).unwrap(), Loaded::Fhs(ext));

        let oc = oc_crt_product(&oc_linear(5).unwrap(), &oc_affine(3).unwrap()).unwrap();
        assert_eq!(from_json(&oc_to_json(&oc)).unwrap(), Loaded::Oc(oc));
    }

    #[test]
    fn json_layout() {
        let set = generate_fhs_set(FhsParams::new(2, 1, 3, 1, 1)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fhs_to_json(&set)).unwrap();
        assert_eq!(v["format_version"], "1");
        assert_eq!(v["kind"], "fhs");
        assert_eq!(v["params"]["N"], 7);
        assert_eq!(v["params"]["lambda"], 2);
        assert_eq!(v["provenance"]["construction"], "direct");
        assert_eq!(v["slot_labels"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn loader_rejects_mismatches() {
        let set = generate_fhs_set(FhsParams::new(3, 1, 2, 0, 2)).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&fhs_to_json(&set)).unwrap();
        v["params"]["M"] = 5.into();
        assert!(matches!(from_json(&v.to_string()), Err(FormatError::Mismatch { field: "M", .. })));
        v["params"]["M"] = 4.into();
        v["params"]["ell"] = 2.into();
        assert!(matches!(from_json(&v.to_string()), Err(FormatError::Set(_))));
        v["params"]["ell"] = 5.into();
        v["format_version"] = "2".into();
        assert!(matches!(from_json(&v.to_string()), Err(FormatError::Version(_))));
        assert!(matches!(from_json("{"), Err(FormatError::Parse(_))));
    }

    #[test]
    fn csv_matches_json() {
        let set = generate_fhs_set(FhsParams::new(3, 1, 4, 1, 2)).unwrap();
        let csv = to_csv(set.sequences());
        assert_eq!(csv.lines().count(), 13);
        let back = fhs_from_csv(&csv).unwrap();
        let Loaded::Fhs(json) = from_json(&fhs_to_json(&set)).unwrap() else { panic!() };
        assert_eq!(back.sequences(), json.sequences());
        assert!(sequences_from_csv("1,2\nx,3\n").is_err());
        assert!(fhs_from_csv("1,2\n3\n").is_err());
    }
}
