//! Normalisation of raw `defining formula` LaTeX before parsing.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Bumped whenever a rule is added, removed or reordered.
pub const CLEANING_RULES_VERSION: u32 = 1;

/// Outcome of [`clean_latex`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub original: String,
    pub cleaned: String,
    /// Names of the rules that changed the text, in application order.
    pub rules_applied: Vec<String>,
    pub derivative_heuristic_fired: bool,
    pub rules_version: u32,
}

const SIZING: &[&str] = &[
    "\\left", "\\right", "\\bigl", "\\bigr", "\\Bigl", "\\Bigr", "\\biggl", "\\biggr", "\\Biggl", "\\Biggr", "\\big",
    "\\Big", "\\bigg", "\\Bigg",
];
const SPACING: &[&str] = &["\\qquad", "\\quad", "\\,", "\\;", "\\!", "\\:", "\\ ", "~"];
const STYLE: &[&str] = &["\\displaystyle", "\\textstyle"];
const UNWRAP: &[&str] = &["\\mathrm", "\\text", "\\textrm", "\\mathit", "\\rm"];
const TIMES: &[&str] = &["\\times", "\\cdot", "\\ast", "·", "×"];

/// Applies the cleaning rules in a fixed order.
///
/// 1. strip sizing (`\left`, `\right`, `\big`...), spacing (`\,`, `\;`,
///    `\!`...) and style commands; unwrap `\mathrm{..}` and `\text{..}`
/// 2. `\times`, `\cdot` become an explicit `*`
/// 3. `\dfrac`, `\tfrac` become `\frac`
/// 4. derivative fractions become `\deriv{x}{y}` markers: `\frac{d x}{d y}`
///    and `\frac{\partial x}{\partial y}` always, `\frac{dx}{dy}` only
///    when `heuristic_derivatives` is set
/// 5. surrounding whitespace and trailing punctuation are dropped
///
/// Cleaning never fails and is idempotent.
pub fn clean_latex(latex: &str, heuristic_derivatives: bool) -> CleaningReport {
    let mut text = latex.to_string();
    let mut rules_applied = Vec::new();
    let mut apply = |name: &str, text: &mut String, f: &dyn Fn(&str) -> String| {
        let next = f(text);
        if next != *text {
            rules_applied.push(name.to_string());
            *text = next;
        }
    };

    apply("strip_sizing", &mut text, &|t| remove_commands(t, SIZING, ""));
    apply("strip_spacing", &mut text, &|t| remove_commands(t, SPACING, " "));
    apply("strip_style", &mut text, &|t| remove_commands(t, STYLE, ""));
    apply("unwrap_text", &mut text, &unwrap_text_commands);
    apply("explicit_multiplication", &mut text, &|t| remove_commands(t, TIMES, " * "));
    apply("normalize_frac", &mut text, &|t| t.replace("\\dfrac", "\\frac").replace("\\tfrac", "\\frac"));

    let (marked, heuristic_fired) = mark_derivatives(&text, heuristic_derivatives);
    if marked != text {
        rules_applied.push("derivative_markers".to_string());
        text = marked;
    }
    let trimmed = text.trim_end_matches(|c: char| c.is_whitespace() || c == ',' || c == '.' || c == ';').trim_start();
    if trimmed != text {
        rules_applied.push("strip_trailing_punctuation".to_string());
        text = trimmed.to_string();
    }

    CleaningReport {
        original: latex.to_string(),
        cleaned: text,
        rules_applied,
        derivative_heuristic_fired: heuristic_fired,
        rules_version: CLEANING_RULES_VERSION,
    }
}

/// Replaces each command in `commands` by `replacement`. A command made of
/// letters only matches when not followed by another letter.
fn remove_commands(text: &str, commands: &[&str], replacement: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    'outer: while !rest.is_empty() {
        for command in commands {
            if let Some(after) = rest.strip_prefix(command) {
                let alphabetic = command.starts_with('\\')
                    && command.len() > 1
                    && command[1..].chars().all(|c| c.is_ascii_alphabetic());
                let continues = after.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
                if command.starts_with('\\') && alphabetic && continues {
                    continue;
                }
                out.push_str(replacement);
                rest = after;
                continue 'outer;
            }
        }
        // Copy one token; a backslash command is copied whole so that
        // `\rightarrow` is not mistaken for `\right`.
        let mut chars = rest.chars();
        let first = chars.next().expect("non-empty");
        out.push(first);
        rest = chars.as_str();
        if first == '\\' {
            let name_len = rest.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(rest.len());
            if name_len > 0 {
                out.push_str(&rest[..name_len]);
                rest = &rest[name_len..];
            } else if let Some(c) = rest.chars().next() {
                // escaped single character such as `\\` or `\{`
                out.push(c);
                rest = &rest[c.len_utf8()..];
            }
        }
    }
    out
}

/// `\mathrm{xy}` → `xy`; `\rm x` → `x`.
fn unwrap_text_commands(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    'outer: while !rest.is_empty() {
        for command in UNWRAP {
            if let Some(after) = rest.strip_prefix(command) {
                if after.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                    continue;
                }
                let trimmed = after.trim_start();
                if trimmed.starts_with('{') {
                    if let Some((inner, tail)) = split_group(trimmed) {
                        out.push_str(&unwrap_text_commands(inner));
                        rest = tail;
                        continue 'outer;
                    }
                }
                rest = after;
                continue 'outer;
            }
        }
        let c = rest.chars().next().expect("non-empty");
        out.push(c);
        rest = &rest[c.len_utf8()..];
        if c == '\\' {
            let name_len = rest.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(rest.len());
            out.push_str(&rest[..name_len]);
            rest = &rest[name_len..];
        }
    }
    out
}

/// Splits `{inner}tail` at the matching brace. `None` when unbalanced.
pub(crate) fn split_group(text: &str) -> Option<(&str, &str)> {
    debug_assert!(text.starts_with('{'));
    let mut depth = 0usize;
    let mut escaped = false;
    for (i, c) in text.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' => escaped = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some((&text[1..i], &text[i + 1..]));
                }
            }
            _ => {}
        }
    }
    None
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum DifferentialForm {
    Spaced,
    Partial,
    Compact,
}

/// Rewrites derivative fractions into `\deriv{x}{y}` markers.
fn mark_derivatives(text: &str, heuristic: bool) -> (String, bool) {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    let mut fired = false;
    while let Some(pos) = rest.find("\\frac") {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + "\\frac".len()..];
        if let Some((marker, tail, compact)) = derivative_at(after, heuristic) {
            out.push_str(&marker);
            fired |= compact;
            rest = tail;
        } else {
            out.push_str("\\frac");
            rest = after;
        }
    }
    out.push_str(rest);
    (out, fired)
}

fn derivative_at(after_frac: &str, heuristic: bool) -> Option<(String, &str, bool)> {
    let text = after_frac.trim_start();
    if !text.starts_with('{') {
        return None;
    }
    let (numerator, tail) = split_group(text)?;
    let tail = tail.trim_start();
    if !tail.starts_with('{') {
        return None;
    }
    let (denominator, tail) = split_group(tail)?;
    let (form, dependent) = differential(numerator)?;
    let (form2, independent) = differential(denominator)?;
    if form != form2 || (form == DifferentialForm::Compact && !heuristic) {
        return None;
    }
    let marker = alloc::format!("\\deriv{{{dependent}}}{{{independent}}}");
    Some((marker, tail, form == DifferentialForm::Compact))
}

/// Recognises `d x`, `\partial x` and `dx` where `x` is a single identifier.
fn differential(arg: &str) -> Option<(DifferentialForm, &str)> {
    let arg = arg.trim();
    if let Some(rest) = arg.strip_prefix("\\partial") {
        let var = rest.trim();
        return (rest.starts_with(char::is_whitespace) || rest.starts_with('\\') || rest.starts_with('{'))
            .then_some(())
            .filter(|_| is_single_identifier(var))
            .map(|_| (DifferentialForm::Partial, var));
    }
    let rest = arg.strip_prefix('d')?;
    if rest.starts_with(char::is_whitespace) {
        let var = rest.trim();
        return is_single_identifier(var).then_some((DifferentialForm::Spaced, var));
    }
    is_single_identifier(rest).then_some((DifferentialForm::Compact, rest))
}

/// A letter or Greek command, optionally followed by one subscript.
fn is_single_identifier(text: &str) -> bool {
    let rest = if let Some(command) = text.strip_prefix('\\') {
        let len = command.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(command.len());
        if len == 0 || !super::parse::is_greek(&command[..len]) {
            return false;
        }
        &command[len..]
    } else {
        let mut chars = text.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() => chars.as_str(),
            _ => return false,
        }
    };
    let rest = rest.trim_start();
    if rest.is_empty() {
        return true;
    }
    let Some(sub) = rest.strip_prefix('_') else { return false };
    let sub = sub.trim_start();
    if sub.starts_with('{') {
        matches!(split_group(sub), Some((_, tail)) if tail.trim().is_empty())
    } else {
        let mut chars = sub.chars();
        chars.next().is_some_and(|c| c.is_ascii_alphanumeric()) && chars.as_str().trim().is_empty()
    }
}
