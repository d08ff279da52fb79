use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Note,
    Warning,
    Error,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Note => "NOTE",
            Level::Warning => "WARNING",
            Level::Error => "ERROR",
        })
    }
}

/// A line-anchored message about an input file.
///
/// Rendered as `LEVEL file:line: message` by [`Diagnostic::render`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub level: Level,
    /// 1-based line in the originating input.
    pub line: u32,
    pub message: String,
}

impl Diagnostic {
    pub fn new(level: Level, line: u32, message: impl Into<String>) -> Self {
        Diagnostic { level, line, message: message.into() }
    }

    pub fn warning(line: u32, message: impl Into<String>) -> Self {
        Self::new(Level::Warning, line, message)
    }

    pub fn note(line: u32, message: impl Into<String>) -> Self {
        Self::new(Level::Note, line, message)
    }

    pub fn error(line: u32, message: impl Into<String>) -> Self {
        Self::new(Level::Error, line, message)
    }

    pub fn render(&self, file: &str) -> String {
        alloc::format!("{} {}:{}: {}", self.level, file, self.line, self.message)
    }
}
