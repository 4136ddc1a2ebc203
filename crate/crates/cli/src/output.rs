use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::Failure;

/// Writes `text` to `path`, or to standard output.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// CSV writer with a header row and LF line endings.
pub fn csv_writer(path: Option<&Path>, header: &[&str]) -> Result<csv::Writer<Box<dyn Write>>, Failure> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(header)?;
    Ok(w)
}

/// Parses `a..b` (inclusive) or a single value.
pub fn parse_range(text: &str) -> Result<(usize, usize), String> {
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("bad number `{s}` in range `{text}`"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let v = parse(text)?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("range `{text}` must satisfy 1 <= a <= b"));
    }
    Ok((lo, hi))
}

/// Decimal with six significant digits.
pub fn decimal(v: f64) -> String {
    dutycycle::schedule::format_decimal(v)
}
