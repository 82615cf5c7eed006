use std::io::{BufRead, Write};

use super::{CorpusSplit, SplitName};
use crate::error::{Error, Result};
use crate::sample::{InputText, Sample};

/// Parses whitespace-separated column text. A blank line ends a sentence and
/// `-DOCSTART-` lines are skipped. Every non-blank line must have the same
/// number of columns as the first one.
pub fn parse_conll_columns<R: BufRead>(
    reader: R,
    token_col: usize,
    tag_col: usize,
    split: SplitName,
) -> Result<CorpusSplit<Sample>> {
    let needed = token_col.max(tag_col) + 1;
    let mut width: Option<usize> = None;
    let mut samples = Vec::new();
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    let flush = |tokens: &mut Vec<String>, tags: &mut Vec<String>, samples: &mut Vec<Sample>| {
        if !tokens.is_empty() {
            let id = format!("{split}-{}", samples.len());
            samples.push(Sample {
                id,
                input_text: InputText::Tokens(std::mem::take(tokens)),
                oracle_label: std::mem::take(tags),
            });
        }
    };
    for (ix, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = ix + 1;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            flush(&mut tokens, &mut tags, &mut samples);
            continue;
        }
        if cols[0].starts_with("-DOCSTART-") {
            continue;
        }
        if cols.len() < needed {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("{} column(s), need at least {needed}", cols.len()),
            });
        }
        match width {
            None => width = Some(cols.len()),
            Some(w) if w != cols.len() => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("ragged row: {} columns, expected {w}", cols.len()),
                })
            }
            Some(_) => {}
        }
        tokens.push(cols[token_col].to_string());
        tags.push(cols[tag_col].to_string());
    }
    flush(&mut tokens, &mut tags, &mut samples);
    Ok(CorpusSplit::new(split, samples))
}

/// Writes two columns (token, tag) so the output parses back with `token_col = 0, tag_col = 1`.
pub fn write_conll<W: Write>(split: &CorpusSplit<Sample>, mut out: W) -> Result<()> {
    for sample in &split.samples {
        let tokens = sample
            .tokens()
            .ok_or_else(|| Error::InvalidSample(format!("`{}` is not token-tagged", sample.id)))?;
        if tokens.is_empty() {
            continue;
        }
        for (tok, tag) in tokens.iter().zip(&sample.oracle_label) {
            if tok.is_empty() || tok.contains(char::is_whitespace) || tag.contains(char::is_whitespace) {
                return Err(Error::InvalidSample(format!(
                    "`{}`: token or tag contains whitespace",
                    sample.id
                )));
            }
            writeln!(out, "{tok} {tag}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
