use std::io::{BufRead, Write};

use serde_json::{json, Map, Value};

use super::{CorpusSplit, SplitName};
use crate::error::{Error, Result};
use crate::sample::{InputText, QaSample, Sample};

/// Field layout of a QA JSONL file.
///
/// `Native` is one flat object per item:
/// `{"id", "question": str, "facts": [str], "choices": {key: text}, "answerKey"}`.
/// `Arc` reads the nested ARC/QASC release shape,
/// `{"id", "question": {"stem", "choices": [{"label", "text"}]}, "answerKey"}`,
/// with facts taken from `facts` or `fact1`, `fact2`, ... when present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QaFormat {
    #[default]
    #[serde(alias = "qasc")]
    Native,
    Arc,
}

impl std::str::FromStr for QaFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native" | "qasc" => Ok(QaFormat::Native),
            "arc" => Ok(QaFormat::Arc),
            other => Err(Error::Config(format!("unknown QA format `{other}`"))),
        }
    }
}

fn schema(line: usize, msg: impl Into<String>) -> Error {
    Error::Schema {
        line,
        msg: msg.into(),
    }
}

/// Yields (line number, object) for every non-blank line.
fn objects<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, Map<String, Value>)>> {
    reader.lines().enumerate().filter_map(|(ix, line)| {
        let lineno = ix + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(e.into())),
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(match serde_json::from_str::<Value>(&line) {
            Ok(Value::Object(map)) => Ok((lineno, map)),
            Ok(_) => Err(schema(lineno, "expected a JSON object")),
            Err(e) => Err(Error::Parse {
                line: lineno,
                msg: e.to_string(),
            }),
        })
    })
}

fn get_str(obj: &Map<String, Value>, key: &str, line: usize) -> Result<String> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(schema(line, format!("`{key}` must be a string"))),
        None => Err(schema(line, format!("missing field `{key}`"))),
    }
}

fn string_list(v: &Value, key: &str, line: usize) -> Result<Vec<String>> {
    let Value::Array(items) = v else {
        return Err(schema(line, format!("`{key}` must be a list")));
    };
    items
        .iter()
        .map(|x| match x {
            Value::String(s) => Ok(s.clone()),
            _ => Err(schema(line, format!("`{key}` must contain strings"))),
        })
        .collect()
}

fn optional_id(obj: &Map<String, Value>, split: SplitName, ix: usize) -> String {
    match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => format!("{split}-{ix}"),
    }
}

fn choices_from_list(v: &Value, line: usize) -> Result<Vec<(String, String)>> {
    let Value::Array(items) = v else {
        return Err(schema(line, "`choices` must be a list"));
    };
    items
        .iter()
        .map(|c| match c {
            Value::Object(o) => Ok((get_str(o, "label", line)?, get_str(o, "text", line)?)),
            _ => Err(schema(line, "choice must be an object with `label` and `text`")),
        })
        .collect()
}

fn choices_from_map(v: &Value, line: usize) -> Result<Vec<(String, String)>> {
    match v {
        Value::Object(o) => o
            .iter()
            .map(|(k, t)| match t {
                Value::String(s) => Ok((k.clone(), s.clone())),
                _ => Err(schema(line, format!("choice `{k}` must be a string"))),
            })
            .collect(),
        Value::Array(_) => choices_from_list(v, line),
        _ => Err(schema(line, "`choices` must be an object")),
    }
}

fn facts(obj: &Map<String, Value>, line: usize) -> Result<Vec<String>> {
    if let Some(v) = obj.get("facts") {
        return string_list(v, "facts", line);
    }
    let mut out = Vec::new();
    for i in 1.. {
        match obj.get(&format!("fact{i}")) {
            Some(Value::String(s)) => out.push(s.clone()),
            Some(_) => return Err(schema(line, format!("`fact{i}` must be a string"))),
            None => break,
        }
    }
    Ok(out)
}

/// Parses QA items; choices are sorted by key.
pub fn parse_qa_jsonl<R: BufRead>(
    reader: R,
    split: SplitName,
    format: QaFormat,
) -> Result<CorpusSplit<QaSample>> {
    let mut samples = Vec::new();
    for item in objects(reader) {
        let (line, obj) = item?;
        let (question, mut choices) = match format {
            QaFormat::Native => {
                let choices = obj
                    .get("choices")
                    .ok_or_else(|| schema(line, "missing field `choices`"))?;
                (get_str(&obj, "question", line)?, choices_from_map(choices, line)?)
            }
            QaFormat::Arc => {
                let q = match obj.get("question") {
                    Some(Value::Object(q)) => q,
                    Some(_) => return Err(schema(line, "`question` must be an object")),
                    None => return Err(schema(line, "missing field `question`")),
                };
                let choices = q
                    .get("choices")
                    .ok_or_else(|| schema(line, "missing field `question.choices`"))?;
                (get_str(q, "stem", line)?, choices_from_list(choices, line)?)
            }
        };
        choices.sort_by(|a, b| a.0.cmp(&b.0));
        let sample = QaSample {
            id: optional_id(&obj, split, samples.len()),
            question,
            facts: facts(&obj, line)?,
            choices,
            answer_key: get_str(&obj, "answerKey", line)?,
        };
        sample.validate().map_err(|e| schema(line, e.to_string()))?;
        samples.push(sample);
    }
    Ok(CorpusSplit::new(split, samples))
}

pub fn write_qa_jsonl<W: Write>(split: &CorpusSplit<QaSample>, mut out: W) -> Result<()> {
    for s in &split.samples {
        let choices: Map<String, Value> = s
            .choices
            .iter()
            .map(|(k, t)| (k.clone(), Value::String(t.clone())))
            .collect();
        let obj = json!({
            "id": s.id,
            "question": s.question,
            "facts": s.facts,
            "choices": choices,
            "answerKey": s.answer_key,
        });
        writeln!(out, "{obj}")?;
    }
    Ok(())
}

/// Parses `{"text": str, "labels": [str]}` lines; `id` is optional.
pub fn parse_mlc_jsonl<R: BufRead>(reader: R, split: SplitName) -> Result<CorpusSplit<Sample>> {
    let mut samples = Vec::new();
    for item in objects(reader) {
        let (line, obj) = item?;
        let text = get_str(&obj, "text", line)?;
        let labels = match obj.get("labels") {
            Some(v) => string_list(v, "labels", line)?,
            None => return Err(schema(line, "missing field `labels`")),
        };
        samples.push(Sample {
            id: optional_id(&obj, split, samples.len()),
            input_text: InputText::Sentence(text),
            oracle_label: labels,
        });
    }
    Ok(CorpusSplit::new(split, samples))
}

pub fn write_mlc_jsonl<W: Write>(split: &CorpusSplit<Sample>, mut out: W) -> Result<()> {
    for s in &split.samples {
        let obj = json!({
            "id": s.id,
            "text": s.input_text.text(),
            "labels": s.oracle_label,
        });
        writeln!(out, "{obj}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLOODING: &str = r#"{"id": "flood", "question": "What can cause animals to leave their homes?", "facts": ["if an environment experiences a natural disaster then animals may leave that environment", "Flooding is a common natural disaster."], "choices": {"H": "voltage", "B": "earthquakes", "A": "colder weather", "C": "cold", "D": "Being over land", "E": "human interaction", "F": "flooding", "G": "rainfall"}, "answerKey": "F"}"#;

    #[test]
    fn flooding_item() {
        let split = parse_qa_jsonl(FLOODING.as_bytes(), SplitName::Test, QaFormat::Native).unwrap();
        let s = &split.samples[0];
        assert_eq!(s.answer_key, "F");
        assert_eq!(s.choices.len(), 8);
        let keys: Vec<&str> = s.choices.iter().map(|c| c.0.as_str()).collect();
        assert_eq!(keys, ["A", "B", "C", "D", "E", "F", "G", "H"]);
        assert_eq!(s.facts.len(), 2);
        assert!(split.labels.is_empty());
    }

    #[test]
    fn facts_optional_and_id_defaulted() {
        let line = r#"{"question": "q?", "choices": {"A": "x", "B": "y"}, "answerKey": "B"}"#;
        let split = parse_qa_jsonl(format!("\n{line}\n").as_bytes(), SplitName::Dev, QaFormat::Native).unwrap();
        assert!(split.samples[0].facts.is_empty());
        assert_eq!(split.samples[0].id, "dev-0");
    }

    #[test]
    fn qa_schema_errors() {
        let bad_key = r#"{"question": "q?", "choices": {"A": "x", "B": "y"}, "answerKey": "Z"}"#;
        let no_q = r#"{"choices": {"A": "x", "B": "y"}, "answerKey": "A"}"#;
        for (text, want) in [(bad_key, 1), (no_q, 1)] {
            match parse_qa_jsonl(text.as_bytes(), SplitName::Train, QaFormat::Native) {
                Err(Error::Schema { line, .. }) => assert_eq!(line, want),
                other => panic!("{other:?}"),
            }
        }
        match parse_qa_jsonl("\n{oops".as_bytes(), SplitName::Train, QaFormat::Native) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn arc_adapter() {
        let line = r#"{"id": "Mercury_1", "question": {"stem": "Which is a metal?", "choices": [{"text": "iron", "label": "B"}, {"text": "wood", "label": "A"}]}, "answerKey": "B", "fact1": "iron is a metal"}"#;
        let split = parse_qa_jsonl(line.as_bytes(), SplitName::Train, QaFormat::Arc).unwrap();
        let s = &split.samples[0];
        assert_eq!(s.question, "Which is a metal?");
        assert_eq!(s.choices[0], ("A".to_string(), "wood".to_string()));
        assert_eq!(s.facts, ["iron is a metal"]);
    }

    #[test]
    fn qa_round_trip() {
        let split = parse_qa_jsonl(FLOODING.as_bytes(), SplitName::Test, QaFormat::Native).unwrap();
        let mut buf = Vec::new();
        write_qa_jsonl(&split, &mut buf).unwrap();
        let back = parse_qa_jsonl(buf.as_slice(), SplitName::Test, QaFormat::Native).unwrap();
        assert_eq!(back, split);
    }

    #[test]
    fn mlc_items() {
        let text = r#"{"text": "rates rise", "labels": ["interest", "money-fx"]}
{"text": "nothing here", "labels": []}"#;
        let split = parse_mlc_jsonl(text.as_bytes(), SplitName::Train).unwrap();
        assert_eq!(split.samples[0].oracle_label, ["interest", "money-fx"]);
        assert!(split.samples[1].oracle_label.is_empty());
        assert_eq!(split.labels, ["interest", "money-fx"]);

        let mut buf = Vec::new();
        write_mlc_jsonl(&split, &mut buf).unwrap();
        assert_eq!(parse_mlc_jsonl(buf.as_slice(), SplitName::Train).unwrap(), split);
    }

    #[test]
    fn mlc_labels_must_be_list() {
        let text = r#"{"text": "x", "labels": "interest"}"#;
        assert!(matches!(
            parse_mlc_jsonl(text.as_bytes(), SplitName::Train),
            Err(Error::Schema { line: 1, .. })
        ));
        assert!(matches!(
            parse_mlc_jsonl(r#"{"labels": []}"#.as_bytes(), SplitName::Train),
            Err(Error::Schema { line: 1, .. })
        ));
    }
}
