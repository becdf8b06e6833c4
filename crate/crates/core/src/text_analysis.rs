//! Prompt and code text diagnostics: prompt visual density (structural
//! markers plus action cues), unique on-screen text tokens extracted from the
//! generated code, the TextExpand ratio and the collapsed total-energy score.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::MetricConfig;
use crate::dynamics::AnimationEvent;
use crate::model::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptProfile {
    pub n_struct: u64,
    pub n_action: u64,
    /// Never below 1 so ratios stay finite.
    pub token_count: u64,
}

impl PromptProfile {
    pub fn pvd(&self) -> u64 {
        self.n_struct + self.n_action
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DisplayTextProfile {
    pub unique_tokens: BTreeSet<String>,
    /// `(constructor, literal)` for every text-producing call found.
    pub call_sites: Vec<(String, String)>,
    /// True when the code failed to tokenize and every literal was scanned.
    pub used_fallback: bool,
}

impl DisplayTextProfile {
    pub fn unique_count(&self) -> usize {
        self.unique_tokens.len()
    }
}

pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF     // kana
        | 0x3400..=0x4DBF   // CJK ext A
        | 0x4E00..=0x9FFF   // CJK unified
        | 0xAC00..=0xD7AF   // hangul
        | 0xF900..=0xFAFF   // compatibility ideographs
        | 0x20000..=0x2FA1F)
}

/// Splits on whitespace, emitting every CJK character as its own token and
/// lowercasing the rest. ASCII punctuation at word edges is trimmed.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, tokens: &mut Vec<String>| {
        let trimmed = word.trim_matches(|c: char| c.is_ascii_punctuation());
        if !trimmed.is_empty() {
            tokens.push(trimmed.to_lowercase());
        }
        word.clear();
    };
    for c in text.chars() {
        if c.is_whitespace() {
            flush(&mut word, &mut tokens);
        } else if is_cjk(c) {
            flush(&mut word, &mut tokens);
            tokens.push(c.to_string());
        } else if c.is_alphanumeric() || c.is_ascii_punctuation() {
            word.push(c);
        } else {
            // CJK punctuation and symbols separate tokens.
            flush(&mut word, &mut tokens);
        }
    }
    flush(&mut word, &mut tokens);
    tokens
}

fn is_heading(line: &str) -> bool {
    let hashes = line.chars().take_while(|&c| c == '#').count();
    (1..=6).contains(&hashes) && line[hashes..].starts_with(char::is_whitespace)
}

fn is_list_item(line: &str) -> bool {
    let t = line.trim_start();
    if let Some(rest) = t.strip_prefix(['-', '*', '+']) {
        return rest.starts_with(char::is_whitespace);
    }
    let digits = t.chars().take_while(char::is_ascii_digit).count();
    digits > 0
        && t[digits..]
            .strip_prefix(['.', ')', '、'])
            .is_some_and(|r| r.is_empty() || r.starts_with(char::is_whitespace) || !r.starts_with(char::is_numeric))
}

/// Counts `$$ ... $$` and `\[ ... \]` display-math blocks.
fn count_display_math(prompt: &str) -> u64 {
    let mut count = 0;
    for (open, close) in [("$$", "$$"), ("\\[", "\\]")] {
        let mut rest = prompt;
        while let Some(start) = rest.find(open) {
            let after = &rest[start + open.len()..];
            match after.find(close) {
                Some(end) => {
                    count += 1;
                    rest = &after[end + close.len()..];
                }
                None => break,
            }
        }
    }
    count
}

fn count_occurrences(haystack: &str, needle: &str, latin: bool) -> u64 {
    if needle.is_empty() {
        return 0;
    }
    if !latin {
        return haystack.matches(needle).count() as u64;
    }
    // Latin terms match whole words, case-insensitively; inflected forms
    // ("draws", "showing") are separate words and do not count.
    let hay = haystack.to_lowercase();
    let needle = needle.to_lowercase();
    let boundary = |c: Option<char>| c.is_none_or(|c| !c.is_alphanumeric());
    hay.match_indices(&needle)
        .filter(|(i, m)| boundary(hay[..*i].chars().next_back()) && boundary(hay[i + m.len()..].chars().next()))
        .count() as u64
}

pub fn compute_pvd(prompt: &str, language: Language, cfg: &MetricConfig) -> PromptProfile {
    let n_struct = prompt
        .lines()
        .filter(|l| is_heading(l.trim_start()) || is_list_item(l))
        .count() as u64
        + count_display_math(prompt);
    let n_action = cfg
        .action_lexicon
        .get(language)
        .iter()
        .map(|term| count_occurrences(prompt, term, !term.chars().any(is_cjk)))
        .sum();
    PromptProfile {
        n_struct,
        n_action,
        token_count: (tokenize(prompt).len() as u64).max(1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Name(String),
    Str(String),
    Open(char),
    Close(char),
    Comma,
    Eq,
    Other,
}

#[derive(Debug)]
struct LexError;

/// Minimal Python lexer: identifiers, string literals (any prefix, single or
/// triple quoted), brackets, commas, `=`. In lenient mode unterminated
/// strings run to end of line instead of failing.
fn lex_python(code: &str, lenient: bool) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = code.chars().collect();
    let mut tokens = Vec::new();
    let mut depth: Vec<char> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_whitespace() || c == '\\' {
            i += 1;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let ident: String = chars[start..i].iter().collect();
            let is_prefix = ident.len() <= 3
                && ident.chars().all(|p| "rRbBuUfF".contains(p))
                && i < chars.len()
                && (chars[i] == '"' || chars[i] == '\'');
            if !is_prefix {
                tokens.push(Token::Name(ident));
            }
            continue;
        }
        if c == '"' || c == '\'' {
            let triple = i + 2 < chars.len() && chars[i + 1] == c && chars[i + 2] == c;
            let raw = matches!(tokens.last(), Some(_)) && i > 0 && "rR".contains(chars[i - 1]);
            let quote_len = if triple { 3 } else { 1 };
            let mut j = i + quote_len;
            let mut body = String::new();
            let mut closed = false;
            while j < chars.len() {
                let d = chars[j];
                if d == '\\' && j + 1 < chars.len() {
                    if raw {
                        body.push(d);
                        body.push(chars[j + 1]);
                    } else {
                        body.push(match chars[j + 1] {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                    }
                    j += 2;
                    continue;
                }
                if d == c && (!triple || (j + 2 < chars.len() && chars[j + 1] == c && chars[j + 2] == c)) {
                    closed = true;
                    j += quote_len;
                    break;
                }
                if d == '\n' && !triple {
                    break;
                }
                body.push(d);
                j += 1;
            }
            if !closed && !lenient {
                return Err(LexError);
            }
            tokens.push(Token::Str(body));
            i = j;
            continue;
        }
        match c {
            '(' | '[' | '{' => {
                depth.push(c);
                tokens.push(Token::Open(c));
            }
            ')' | ']' | '}' => {
                let expected = match c {
                    ')' => '(',
                    ']' => '[',
                    _ => '{',
                };
                if depth.pop() != Some(expected) && !lenient {
                    return Err(LexError);
                }
                tokens.push(Token::Close(c));
            }
            ',' => tokens.push(Token::Comma),
            '=' if chars.get(i + 1) != Some(&'=') && !matches!(tokens.last(), Some(Token::Eq)) => {
                tokens.push(Token::Eq)
            }
            _ => tokens.push(Token::Other),
        }
        i += 1;
    }
    if !depth.is_empty() && !lenient {
        return Err(LexError);
    }
    Ok(tokens)
}

/// Positional string literals passed directly to text constructors.
fn text_call_literals(tokens: &[Token], constructors: &[String]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        let Token::Name(name) = tok else { continue };
        if !constructors.iter().any(|c| c == name) || tokens.get(i + 1) != Some(&Token::Open('(')) {
            continue;
        }
        let mut depth = 0usize;
        let mut arg_start = true;
        let mut keyword_arg = false;
        let mut pending = String::new();
        let mut j = i + 1;
        while j < tokens.len() {
            match &tokens[j] {
                Token::Open(_) => depth += 1,
                Token::Close(_) => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                Token::Comma if depth == 1 => {
                    if !pending.is_empty() {
                        out.push((name.clone(), std::mem::take(&mut pending)));
                    }
                    arg_start = true;
                    keyword_arg = false;
                    j += 1;
                    continue;
                }
                Token::Name(_) if depth == 1 && arg_start && tokens.get(j + 1) == Some(&Token::Eq) => {
                    keyword_arg = true;
                }
                Token::Str(s) if depth == 1 && !keyword_arg => pending.push_str(s),
                _ => {}
            }
            arg_start = false;
            j += 1;
        }
        if !pending.is_empty() {
            out.push((name.clone(), pending));
        }
    }
    out
}

/// Every string literal in the code, found by lenient lexing.
pub fn scan_string_literals(code: &str) -> Vec<String> {
    lex_python(code, true)
        .unwrap_or_default()
        .into_iter()
        .filter_map(|t| match t {
            Token::Str(s) => Some(s),
            _ => None,
        })
        .collect()
}

/// Collects on-screen text tokens from text-constructor calls. Code that does
/// not lex falls back to tokenizing every string literal.
pub fn extract_display_tokens(code: &str, cfg: &MetricConfig) -> DisplayTextProfile {
    let (call_sites, used_fallback) = match lex_python(code, false) {
        Ok(tokens) => (text_call_literals(&tokens, &cfg.text_constructors), false),
        Err(LexError) => (
            scan_string_literals(code)
                .into_iter()
                .map(|s| (String::new(), s))
                .collect(),
            true,
        ),
    };
    let unique_tokens = call_sites
        .iter()
        .flat_map(|(_, lit)| tokenize(lit))
        .collect();
    DisplayTextProfile {
        unique_tokens,
        call_sites,
        used_fallback,
    }
}

pub fn text_expand(display: &DisplayTextProfile, prompt: &PromptProfile) -> f64 {
    display.unique_count() as f64 / prompt.token_count.max(1) as f64
}

/// Collapsed energy: total geometric event energy plus peak text energy.
pub fn total_energy(events: &[AnimationEvent], e_text_max: f64) -> f64 {
    events.iter().map(|e| e.geo_energy).sum::<f64>() + e_text_max
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> MetricConfig {
        MetricConfig::default()
    }

    #[test]
    fn empty_prompt() {
        let p = compute_pvd("", Language::En, &cfg());
        assert_eq!(p.pvd(), 0);
        assert_eq!(p.token_count, 1);
    }

    #[test]
    fn headings_and_lists() {
        let prompt = "# Forces\n## Newton\n- mass\n- acceleration\n1. net force\nplain text\n#hashtag";
        let p = compute_pvd(prompt, Language::En, &cfg());
        assert_eq!((p.n_struct, p.n_action, p.pvd()), (5, 0, 5));
    }

    #[test]
    fn display_math_and_actions() {
        let prompt = "Show the law:\n$$F = ma$$\nthen draw, and DRAW again. Drawing is not counted.\n\\[ a = F/m \\]";
        let p = compute_pvd(prompt, Language::En, &cfg());
        assert_eq!(p.n_struct, 2);
        assert_eq!(p.n_action, 3);
    }

    #[test]
    fn chinese_actions_count_occurrences() {
        let p = compute_pvd("请演示牛顿定律，并绘制受力图，再演示一次。", Language::Zh, &cfg());
        assert_eq!(p.n_action, 3);
    }

    #[test]
    fn tokenizer_handles_mixed_script() {
        assert_eq!(tokenize("质量 mass"), vec!["质", "量", "mass"]);
        assert_eq!(tokenize("Hello, World!"), vec!["hello", "world"]);
        assert_eq!(tokenize("速度：v"), vec!["速", "度", "v"]);
    }

    #[test]
    fn no_text_constructors() {
        let d = extract_display_tokens("c = Circle(radius=1)\nself.play(Create(c))\n", &cfg());
        assert_eq!(d.unique_count(), 0);
        assert!(!d.used_fallback);
    }

    #[test]
    fn duplicate_literals_deduplicate() {
        let code = "a = Text(\"Hello world\")\nb = Text('Hello world', font_size=24)\n";
        let d = extract_display_tokens(code, &cfg());
        assert_eq!(d.unique_count(), 2);
        assert!(d.unique_tokens.contains("hello") && d.unique_tokens.contains("world"));
        assert_eq!(d.call_sites.len(), 2);
    }

    #[test]
    fn mixed_literal_tokens() {
        let d = extract_display_tokens("t = Text(\"质量 mass\")", &cfg());
        assert_eq!(d.unique_count(), 3);
    }

    #[test]
    fn keyword_strings_are_not_display_text() {
        let d = extract_display_tokens("t = Text(\"Energy\", font=\"Noto Sans\", color=BLUE)", &cfg());
        assert_eq!(d.unique_tokens, BTreeSet::from(["energy".to_string()]));
    }

    #[test]
    fn raw_and_triple_quoted_literals() {
        let code = "eq = MathTex(r\"E = mc^2\")\np = Paragraph(\"\"\"line one\nline two\"\"\")\n";
        let d = extract_display_tokens(code, &cfg());
        assert!(d.unique_tokens.contains("mc^2"));
        assert!(d.unique_tokens.contains("two"));
    }

    #[test]
    fn unparseable_code_uses_fallback() {
        let d = extract_display_tokens("t = Text(\"alpha beta\"\nx = 'gamma", &cfg());
        assert!(d.used_fallback);
        assert!(d.unique_tokens.contains("alpha") && d.unique_tokens.contains("gamma"));
    }

    #[test]
    fn text_expand_cases() {
        let prompt = PromptProfile { n_struct: 0, n_action: 0, token_count: 100 };
        let mut d = DisplayTextProfile::default();
        assert_eq!(text_expand(&d, &prompt), 0.0);
        d.unique_tokens = (0..50).map(|i| format!("w{i}")).collect();
        assert_eq!(text_expand(&d, &prompt), 0.5);
        d.unique_tokens = (0..150).map(|i| format!("w{i}")).collect();
        assert_eq!(text_expand(&d, &prompt), 1.5);
    }

    #[test]
    fn total_energy_cases() {
        let ev = |e: f64| AnimationEvent { index: 0, start_frame: 0, end_frame: 1, geo_energy: e };
        assert_eq!(total_energy(&[], 0.0), 0.0);
        assert_eq!(total_energy(&[ev(2.0), ev(3.0)], 1.0), 6.0);
        assert_eq!(total_energy(&[], 7.5), 7.5);
    }
}
