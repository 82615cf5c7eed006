//! `gen-synthetic`: write a synthetic corpus and its vectors to disk.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use textgym::datasets::{generate_synthetic, write_corpus, SyntheticSpec};

use crate::CliError;

pub const EMBEDDINGS_FILE: &str = "embeddings.vec";

pub fn run_gen_synthetic(spec: &SyntheticSpec, dir: &Path) -> Result<(), CliError> {
    let syn = generate_synthetic(spec).map_err(CliError::usage)?;
    fs::create_dir_all(dir)?;
    write_corpus(&syn.corpus, dir)?;
    syn.embeddings.write(BufWriter::new(File::create(dir.join(EMBEDDINGS_FILE))?))?;
    Ok(())
}
