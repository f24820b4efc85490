//! Output plumbing shared by the subcommands: a writer that is either a file
//! or stdout, always line-buffered and always using `\n` line endings so the
//! same invocation produces byte-identical files on every platform.

use std::io::Write;
use std::path::Path;

/// Opens the output target: the named file, or stdout when `out` is `None`.
pub fn writer(out: Option<&Path>) -> Result<Box<dyn Write>, String> {
    match out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
            Ok(Box::new(std::io::BufWriter::new(file)))
        }
        None => Ok(Box::new(std::io::BufWriter::new(std::io::stdout()))),
    }
}

/// Writes one line, mapping I/O failures into the subcommand error channel.
pub fn line(w: &mut dyn Write, text: &str) -> Result<(), String> {
    w.write_all(text.as_bytes())
        .and_then(|()| w.write_all(b"\n"))
        .map_err(|e| format!("cannot write output: {e}"))
}

/// Flushes the writer so short-lived processes cannot drop buffered tails.
pub fn finish(mut w: Box<dyn Write>) -> Result<(), String> {
    w.flush().map_err(|e| format!("cannot flush output: {e}"))
}
