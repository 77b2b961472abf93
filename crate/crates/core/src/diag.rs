use std::fmt;

/// One problem found while loading a line-oriented input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based; 0 when the problem concerns the file as a whole.
    pub line: usize,
    pub message: String,
}

/// Every problem found in one input file.
#[derive(Debug, Clone, PartialEq, Eq, Default, thiserror::Error)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn push(&mut self, line: usize, message: impl Into<String>) {
        self.0.push(Diagnostic {
            line,
            message: message.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter()
    }

    pub(crate) fn into_result<T>(self, value: T) -> Result<T, Diagnostics> {
        if self.0.is_empty() {
            Ok(value)
        } else {
            Err(self)
        }
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            if d.line == 0 {
                f.write_str(&d.message)?;
            } else {
                write!(f, "line {}: {}", d.line, d.message)?;
            }
        }
        Ok(())
    }
}

/// Non-blank lines with `#` comments stripped, numbered from 1.
///
/// A `#` only starts a comment at the beginning of a line or after
/// whitespace, so AVM reentrancy tags such as `[a:#1]` survive.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let mut cut = raw.len();
        let bytes = raw.as_bytes();
        for (j, &b) in bytes.iter().enumerate() {
            if b == b'#' && (j == 0 || bytes[j - 1].is_ascii_whitespace()) {
                let tagged = bytes.get(j + 1).is_some_and(u8::is_ascii_digit);
                if !tagged {
                    cut = j;
                    break;
                }
            }
        }
        let line = raw[..cut].trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}
