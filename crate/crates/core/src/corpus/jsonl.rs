use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::{Corpus, Example, LabelMap, SparseVec, Split};
use crate::error::{Error, Result};

/// Read a JSONL corpus. Each line holds `id`, `text_a`, optional `text_b`
/// and a string `label`; an optional `features` array of `[index, weight]`
/// pairs overrides hashing of the text.
///
/// With `labels = None` the label map is built in first-appearance order.
/// With a fixed map, new labels extend it on the train split and are an
/// error on every other split.
pub fn load_jsonl(path: &Path, split: Split, labels: Option<&LabelMap>, dim: usize) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut map = labels.cloned().unwrap_or_default();
    let fixed = labels.is_some() && split != Split::Train;
    let mut examples = Vec::new();
    let mut explicit = false;

    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            msg,
        };
        let v: Value = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let field = |name: &str| -> Result<&str> {
            v.get(name)
                .and_then(Value::as_str)
                .ok_or_else(|| parse_err(format!("missing string field {name:?}")))
        };
        let id = field("id")?.to_string();
        let text_a = field("text_a")?.to_string();
        let label_str = field("label")?;
        let text_b = match v.get("text_b") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(parse_err("text_b must be a string".into())),
        };
        let label = match map.get(label_str) {
            Some(i) => i,
            None if fixed => {
                return Err(Error::UnknownLabel {
                    label: label_str.to_string(),
                    split: split.to_string(),
                })
            }
            None => map.insert(label_str.to_string()),
        };
        let example = match v.get("features") {
            None | Some(Value::Null) => Example::from_text(id, text_a, text_b, label, dim),
            Some(f) => {
                let pairs: Vec<(u32, f64)> = serde_json::from_value(f.clone())
                    .map_err(|e| parse_err(format!("bad features: {e}")))?;
                explicit = true;
                Example::with_features(id, text_a, text_b, label, SparseVec::from_pairs(pairs))
            }
        };
        examples.push(example);
    }
    Corpus::new(split, examples, map, dim, explicit)
}

#[derive(Serialize)]
struct Line<'a> {
    id: &'a str,
    text_a: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    text_b: Option<&'a str>,
    label: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    features: Option<&'a SparseVec>,
}

/// Write a corpus in the format read by [`load_jsonl`]. Features are written
/// only when they do not come from the text.
pub fn write_jsonl(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for ex in corpus.examples() {
        let line = Line {
            id: &ex.id,
            text_a: &ex.text_a,
            text_b: ex.text_b.as_deref(),
            label: corpus.labels().name(ex.label).expect("label in map"),
            features: corpus.explicit_features().then_some(&ex.features),
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_label_map(path: &Path) -> Result<LabelMap> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_label_map(map: &LabelMap, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(map)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_with(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn loads_well_formed_file() {
        let f = file_with(&[
            r#"{"id":"x1","text_a":"The cat sat.","label":"b"}"#,
            r#"{"id":"x2","text_a":"A dog","text_b":"ran off","label":"a"}"#,
            r#"{"id":"x3","text_a":"birds","label":"b"}"#,
        ]);
        let c = load_jsonl(f.path(), Split::Train, None, 1024).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.labels().get("b"), Some(0));
        assert_eq!(c.labels().get("a"), Some(1));
        assert_eq!(c.examples()[0].tokens, ["the", "cat", "sat", "."]);
        assert_eq!(c.examples()[1].tokens_b().unwrap(), ["ran", "off"]);
        assert_eq!(c.ids().collect::<Vec<_>>(), ["x1", "x2", "x3"]);
    }

    #[test]
    fn duplicate_id_names_the_id() {
        let f = file_with(&[
            r#"{"id":"x1","text_a":"a","label":"p"}"#,
            r#"{"id":"x1","text_a":"b","label":"p"}"#,
        ]);
        let err = load_jsonl(f.path(), Split::Train, None, 1024).unwrap_err();
        assert!(err.to_string().contains("\"x1\""), "{err}");
    }

    #[test]
    fn missing_field_reports_line() {
        let f = file_with(&[
            r#"{"id":"x1","text_a":"a","label":"p"}"#,
            r#"{"id":"x2","label":"p"}"#,
        ]);
        let err = load_jsonl(f.path(), Split::Train, None, 1024).unwrap_err();
        match err {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 2);
                assert!(msg.contains("text_a"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_label_outside_train_is_rejected() {
        let map = LabelMap::from_labels(["p", "q"]);
        let f = file_with(&[r#"{"id":"x1","text_a":"a","label":"r"}"#]);
        let err = load_jsonl(f.path(), Split::Validation, Some(&map), 1024).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel { .. }));
        let c = load_jsonl(f.path(), Split::Train, Some(&map), 1024).unwrap();
        assert_eq!(c.labels().get("r"), Some(2));
    }

    #[test]
    fn label_map_sidecar_round_trip() {
        let map = LabelMap::from_labels(["neg", "pos"]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.json");
        write_label_map(&map, &p).unwrap();
        assert_eq!(read_label_map(&p).unwrap(), map);
    }
}
