//! Execution reliability: pass rate, render time, and the six-way failure
//! taxonomy assigned by an ordered rule table over the error trace.
//!
//! Rules, first match wins:
//!
//! 1. source failed to parse and the raw output shows markdown/prose wrappers
//!    -> [`ErrorCategory::FormattingPollution`]
//! 2. source failed to parse -> [`ErrorCategory::SyntaxError`]
//! 3. the trace names an attribute or name unknown to the [`ApiInventory`]
//!    -> [`ErrorCategory::ApiHallucination`]
//! 4. a type/argument/value error on a known API symbol
//!    -> [`ErrorCategory::ApiMisuse`]
//! 5. the trace involves the text/formula typesetting path
//!    -> [`ErrorCategory::TextRendering`]
//! 6. anything else -> [`ErrorCategory::Other`]
//!
//! Timeouts (traces carrying a `TIMEOUT` marker line) are always `Other`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ExecOutcome, SampleVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCategory {
    ApiHallucination,
    ApiMisuse,
    TextRendering,
    FormattingPollution,
    SyntaxError,
    Other,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 6] = [
        ErrorCategory::ApiHallucination,
        ErrorCategory::ApiMisuse,
        ErrorCategory::TextRendering,
        ErrorCategory::FormattingPollution,
        ErrorCategory::SyntaxError,
        ErrorCategory::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ErrorCategory::ApiHallucination => "Halluc.",
            ErrorCategory::ApiMisuse => "API Misuse",
            ErrorCategory::TextRendering => "Text Render",
            ErrorCategory::FormattingPollution => "Format",
            ErrorCategory::SyntaxError => "Syntax",
            ErrorCategory::Other => "Other",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The renderer's public symbols, one fully qualified name per entry.
///
/// A name is known when it equals an entry or any dotted suffix of one, so
/// `Circle` and `Circle.set_color` both match `manim.Circle.set_color`.
#[derive(Debug, Clone)]
pub struct ApiInventory {
    symbols: Vec<String>,
    keys: HashSet<String>,
}

impl ApiInventory {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut symbols: Vec<String> = symbols
            .into_iter()
            .map(Into::into)
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty() && !s.starts_with('#'))
            .collect();
        symbols.sort();
        symbols.dedup();
        if symbols.is_empty() {
            return Err(Error::Schema("API inventory is empty".into()));
        }
        let mut keys = HashSet::new();
        for sym in &symbols {
            let parts: Vec<&str> = sym.split('.').collect();
            for start in 0..parts.len() {
                keys.insert(parts[start..].join("."));
            }
        }
        Ok(Self { symbols, keys })
    }

    /// An inventory that knows nothing; lookup-based rules never fire.
    pub fn empty() -> Self {
        Self {
            symbols: Vec::new(),
            keys: HashSet::new(),
        }
    }

    /// Parses the line-delimited inventory format.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(text.lines())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_known(&self, name: &str) -> bool {
        self.keys.contains(name.trim_start_matches("manim."))
            || self.keys.contains(name)
    }
}

static EXCEPTION_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^((?:[A-Za-z_]\w*\.)*[A-Za-z_]\w*(?:Error|Exception|Warning|Interrupt|Exit))(?::\s?(.*))?\s*$")
        .unwrap()
});
static FRAME_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"^\s*File "([^"]+)", line \d+"#).unwrap());
static RICH_SOURCE_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"❱\s*\d+\s*│?\s*(.*?)\s*│?\s*$").unwrap());
static NAME_NOT_DEFINED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"name '([\w.]+)' is not defined").unwrap());
static MODULE_NO_ATTR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"module '([\w.]+)' has no attribute '(\w+)'").unwrap());
static OBJECT_NO_ATTR: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?:type object )?'([\w.]+)'(?: object)? has no attribute '(\w+)'").unwrap()
});
static CANNOT_IMPORT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"cannot import name '(\w+)'").unwrap());
static NO_MODULE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"No module named '([\w.]+)'").unwrap());
static CALLED_SYMBOL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"([A-Za-z_][\w]*(?:\.[A-Za-z_]\w*)*)\(").unwrap());
static ARGUMENT_ERROR: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)unexpected keyword argument|missing \d+ required|takes (?:from )?\d+|positional argument|keyword argument|got multiple values|unsupported operand|must be|expected|invalid|not supported|could not be broadcast|shape|not iterable|not subscriptable|out of range|cannot be",
    )
    .unwrap()
});
static TEXT_RENDERING: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\blatex\b|\bxelatex\b|\btex\b|\bctex\b|\.tex\b|\bdvi\b|dvisvgm|tex_file_writing|tex_template|typeset|\bfonts?\b|glyph|pango|missing character|undefined control sequence")
        .unwrap()
});
static PROSE_OPENER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:Here(?:'s| is| are)\b|Sure\b|Certainly\b|Below\b|Okay\b|Of course\b|I(?:'ve| have| will)\b|The following\b|This (?:code|script|scene)\b|\*\*)")
        .unwrap()
});

const PARSE_ERRORS: [&str; 3] = ["SyntaxError", "IndentationError", "TabError"];
const MISUSE_ERRORS: [&str; 6] = [
    "TypeError",
    "ValueError",
    "AttributeError",
    "KeyError",
    "IndexError",
    "NotImplementedError",
];

/// The pieces of a Python traceback the rule table looks at.
#[derive(Debug, Default)]
struct ParsedTrace<'a> {
    exception: Option<&'a str>,
    message: &'a str,
    /// Source lines of frames outside the renderer package, innermost last.
    user_lines: Vec<&'a str>,
    /// Source lines shown for any frame, innermost last.
    all_lines: Vec<&'a str>,
    timeout: bool,
}

fn parse_trace(trace: &str) -> ParsedTrace<'_> {
    let mut parsed = ParsedTrace::default();
    let lines: Vec<&str> = trace.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        if line.trim_start().starts_with("TIMEOUT") {
            parsed.timeout = true;
        }
        if let Some(c) = FRAME_LINE.captures(line) {
            let in_renderer = is_renderer_path(&c[1]);
            // The source line is the next indented line that is not itself a frame.
            if let Some(src) = lines[i + 1..]
                .iter()
                .find(|l| l.starts_with(char::is_whitespace) && !l.trim().is_empty())
                .filter(|l| !FRAME_LINE.is_match(l))
            {
                parsed.all_lines.push(src.trim());
                if !in_renderer {
                    parsed.user_lines.push(src.trim());
                }
            }
        } else if let Some(c) = RICH_SOURCE_LINE.captures(line) {
            if let Some(src) = c.get(1) {
                parsed.all_lines.push(src.as_str());
                parsed.user_lines.push(src.as_str());
            }
        } else if let Some(c) = EXCEPTION_LINE.captures(line) {
            parsed.exception = c.get(1).map(|m| m.as_str());
            parsed.message = c.get(2).map_or("", |m| m.as_str());
        }
        i += 1;
    }
    parsed
}

fn is_renderer_path(path: &str) -> bool {
    let p = path.replace('\\', "/");
    p.contains("/manim/") || p.contains("site-packages/") || p.contains("/lib/python")
}

fn short_exception(name: &str) -> &str {
    name.rsplit('.').next().unwrap_or(name)
}

fn shows_wrapper(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .take(3)
        .any(|l| l.starts_with("```") || l.starts_with("~~~") || PROSE_OPENER.is_match(l))
}

/// Symbols a trace message or source line claims are missing from the API.
fn missing_symbol(message: &str) -> Option<(Option<String>, String)> {
    if let Some(c) = NAME_NOT_DEFINED.captures(message) {
        return Some((None, c[1].to_string()));
    }
    if let Some(c) = MODULE_NO_ATTR.captures(message) {
        return Some((None, c[2].to_string()));
    }
    if let Some(c) = OBJECT_NO_ATTR.captures(message) {
        return Some((Some(c[1].to_string()), format!("{}.{}", &c[1], &c[2])));
    }
    if let Some(c) = CANNOT_IMPORT.captures(message) {
        return Some((None, c[1].to_string()));
    }
    if let Some(c) = NO_MODULE.captures(message) {
        return Some((None, c[1].to_string()));
    }
    None
}

fn calls_known_symbol(text: &str, inventory: &ApiInventory) -> bool {
    CALLED_SYMBOL.captures_iter(text).any(|c| {
        let name = &c[1];
        let mut parts: Vec<&str> = name.split('.').collect();
        // `Circle.__init__` names the owner; `self.play` names the method.
        parts.retain(|p| !p.starts_with("__") && *p != "self");
        (0..parts.len()).any(|start| inventory.is_known(&parts[start..].join(".")))
    })
}

/// Maps a failed outcome to its primary category. Total and deterministic.
pub fn classify_failure(outcome: &ExecOutcome, code: &str, inventory: &ApiInventory) -> ErrorCategory {
    let trace = outcome.trace.as_deref().unwrap_or("");
    let parsed = parse_trace(trace);
    if parsed.timeout {
        return ErrorCategory::Other;
    }
    let exception = parsed.exception.map(short_exception).unwrap_or("");

    // Rules 1 and 2.
    if PARSE_ERRORS.contains(&exception) {
        let polluted = outcome.stdout_head.as_deref().is_some_and(shows_wrapper)
            || shows_wrapper(code)
            || parsed.all_lines.iter().any(|l| shows_wrapper(l));
        return if polluted {
            ErrorCategory::FormattingPollution
        } else {
            ErrorCategory::SyntaxError
        };
    }

    // Rule 3.
    let lookup_errors = ["NameError", "AttributeError", "ImportError", "ModuleNotFoundError"];
    if lookup_errors.contains(&exception) {
        if let Some((owner, symbol)) = missing_symbol(parsed.message) {
            let owner_is_api = owner.as_deref().is_none_or(|o| inventory.is_known(o));
            if owner_is_api && !inventory.is_known(&symbol) {
                return ErrorCategory::ApiHallucination;
            }
        }
    }

    // Rule 4.
    if MISUSE_ERRORS.contains(&exception) {
        let message_names_api = calls_known_symbol(parsed.message, inventory);
        let argument_error = ARGUMENT_ERROR.is_match(parsed.message)
            && parsed
                .user_lines
                .last()
                .is_some_and(|l| calls_known_symbol(l, inventory));
        let attribute_on_api = exception == "AttributeError"
            && missing_symbol(parsed.message)
                .is_some_and(|(owner, sym)| owner.is_some_and(|o| inventory.is_known(&o)) && inventory.is_known(&sym));
        if message_names_api || argument_error || attribute_on_api {
            return ErrorCategory::ApiMisuse;
        }
    }

    // Rule 5.
    if TEXT_RENDERING.is_match(parsed.message)
        || exception.contains("Latex")
        || trace.lines().any(|l| TEXT_RENDERING.is_match(l) && !FRAME_LINE.is_match(l))
    {
        return ErrorCategory::TextRendering;
    }

    ErrorCategory::Other
}

pub fn exec_pass_rate(verdicts: &[SampleVerdict]) -> Result<f64> {
    if verdicts.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let passed = verdicts.iter().filter(|v| v.exec_pass).count();
    Ok(passed as f64 / verdicts.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderTimeStats {
    pub mean_min: f64,
    pub count: usize,
}

/// Mean render time over executed samples only.
pub fn render_time_stats(verdicts: &[SampleVerdict]) -> Result<RenderTimeStats> {
    let times: Vec<f64> = verdicts
        .iter()
        .filter(|v| v.exec_pass)
        .filter_map(|v| v.render_time_min)
        .collect();
    if times.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(RenderTimeStats {
        mean_min: times.iter().sum::<f64>() / times.len() as f64,
        count: times.len(),
    })
}

/// Percentage of the whole batch falling into each failure category. The
/// values sum to the batch's execution-failure percentage.
pub fn error_breakdown(verdicts: &[SampleVerdict]) -> Result<BTreeMap<ErrorCategory, f64>> {
    if verdicts.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut counts: BTreeMap<ErrorCategory, usize> =
        ErrorCategory::ALL.iter().map(|&c| (c, 0)).collect();
    for v in verdicts.iter().filter(|v| !v.exec_pass) {
        *counts
            .entry(v.error_category.unwrap_or(ErrorCategory::Other))
            .or_default() += 1;
    }
    let n = verdicts.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(c, k)| (c, 100.0 * k as f64 / n))
        .collect())
}
