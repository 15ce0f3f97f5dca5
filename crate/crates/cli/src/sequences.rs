//! Reader for the sequence CSV format.
//!
//! One sequence per row, comma-separated nonnegative integer symbols. An
//! optional first line `# alphabet=K` fixes the alphabet size; without it
//! the size is one more than the largest symbol (at least 2). Blank lines
//! are skipped.

use anyhow::{anyhow, bail, Context, Result};
use outlier_core::{Alphabet, SequenceSet};

pub fn parse_sequences(text: &str) -> Result<SequenceSet> {
    let mut declared = None;
    let mut body_start = 0;
    if let Some(first) = text.lines().next() {
        if let Some(rest) = first.trim().strip_prefix('#') {
            let value = rest
                .trim()
                .strip_prefix("alphabet=")
                .ok_or_else(|| anyhow!("line 1: expected header `# alphabet=K`, found {first:?}"))?;
            let k: usize = value
                .trim()
                .parse()
                .map_err(|_| anyhow!("line 1: alphabet size {value:?} is not a positive integer"))?;
            declared = Some(k);
            body_start = first.len();
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        // The body keeps the header's newline, so record lines are file lines.
        .from_reader(&text.as_bytes()[body_start..]);

    let mut rows = Vec::new();
    let mut max_symbol = 0;
    for record in reader.records() {
        let record = record.context("malformed CSV")?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field
                    .parse::<usize>()
                    .map_err(|_| anyhow!("row {line}, column {}: invalid symbol {field:?}", col + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(k) = declared {
            if let Some(col) = row.iter().position(|&s| s >= k) {
                bail!(
                    "row {line}, column {}: symbol {} is outside the declared alphabet of size {k}",
                    col + 1,
                    row[col]
                );
            }
        }
        max_symbol = row.iter().copied().fold(max_symbol, usize::max);
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("input holds no sequences");
    }
    let alphabet = Alphabet::new(declared.unwrap_or((max_symbol + 1).max(2)))?;
    Ok(SequenceSet::new(rows, alphabet)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_fixes_the_alphabet() {
        let s = parse_sequences("# alphabet=4\n0,1\n1,1\n0,0\n").unwrap();
        assert_eq!(s.alphabet().size(), 4);
        assert_eq!(s.num_sequences(), 3);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn alphabet_is_inferred() {
        let s = parse_sequences("0,2\n1,1\n\n0,0\n").unwrap();
        assert_eq!(s.alphabet().size(), 3);
        let s = parse_sequences("0\n0\n0\n").unwrap();
        assert_eq!(s.alphabet().size(), 2);
    }

    #[test]
    fn errors_name_row_and_column() {
        let e = parse_sequences("0,1\n1,x\n0,0\n").unwrap_err().to_string();
        assert!(e.contains("row 2, column 2") && e.contains("\"x\""), "{e}");
        let e = parse_sequences("# alphabet=2\n0,1\n1,1\n0,2\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("row 4, column 2"), "{e}");
        assert!(parse_sequences("# alphabet=two\n0\n").is_err());
        assert!(parse_sequences("0,1\n1\n0,0\n").is_err());
        assert!(parse_sequences("0,1\n1,0\n").is_err());
        assert!(parse_sequences("").is_err());
    }
}
