use std::fmt::Write as _;

use clap::ValueEnum;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// `key: value`, multi-line values indented below their key.
    #[default]
    Text,
    /// One `key=value` per line; `\` and newlines in values are escaped.
    Kv,
}

/// An ordered list of results, rendered in either output format.
#[derive(Debug, Default)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        for (key, value) in &self.entries {
            match format {
                Format::Kv => {
                    let _ = writeln!(out, "{key}={}", escape(value));
                }
                Format::Text if value.contains('\n') => {
                    let _ = writeln!(out, "{key}:");
                    for line in value.trim_end_matches('\n').lines() {
                        let _ = writeln!(out, "  {line}");
                    }
                }
                Format::Text => {
                    let _ = writeln!(out, "{key}: {value}");
                }
            }
        }
        out
    }
}

pub fn escape(value: &str) -> String {
    value.replace('\\', "\\\\").replace('\n', "\\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        let mut r = Report::new();
        r.add("a", 1).add("model", "worlds 1\nrel R/2\n");
        assert_eq!(r.render(Format::Kv), "a=1\nmodel=worlds 1\\nrel R/2\\n\n");
        assert_eq!(r.render(Format::Text), "a: 1\nmodel:\n  worlds 1\n  rel R/2\n");
    }
}
