use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One logging point of a training run; the x axis counts environment steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub step: usize,
    /// Mean return over the last 100 finished training episodes.
    pub mean_return: Option<f64>,
    /// Greedy score on the dev split, when one is evaluated.
    pub eval_score: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<RunRow>,
}

impl RunRecord {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(["step", "mean_return", "eval_score"])?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let rows = rd.deserialize().collect::<std::result::Result<Vec<RunRow>, _>>()?;
        Ok(Self { rows })
    }

    pub fn last(&self) -> Option<&RunRow> {
        self.rows.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let rec = RunRecord {
            rows: vec![
                RunRow { step: 1000, mean_return: Some(0.25), eval_score: None },
                RunRow { step: 2000, mean_return: None, eval_score: Some(0.1 + 0.2) },
            ],
        };
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "step,mean_return,eval_score\n1000,0.25,\n2000,,0.30000000000000004\n");
        assert_eq!(RunRecord::read_csv(buf.as_slice()).unwrap(), rec);
    }

    #[test]
    fn empty_record_has_header_only() {
        let mut buf = Vec::new();
        RunRecord::default().write_csv(&mut buf).unwrap();
        assert_eq!(buf, b"step,mean_return,eval_score\n");
    }
}
