//! Conditional-compilation pass.
//!
//! Only `#if`/`#ifdef`/`#ifndef`/`#else`/`#endif` are interpreted; `#include`
//! lines are dropped. Excluded and directive lines are blanked in place, so
//! line numbers of the surviving code are unchanged.

use std::collections::BTreeSet;

use super::error::FrontendError;
use super::source::Loc;

#[derive(Debug, Clone, Copy)]
struct Frame {
    parent_active: bool,
    taken: bool,
    seen_else: bool,
}

pub fn preprocess(text: &str, defines: &BTreeSet<String>) -> Result<String, FrontendError> {
    let mut out = String::with_capacity(text.len());
    let mut stack: Vec<Frame> = Vec::new();
    let mut active = true;
    let mut in_block_comment = false;

    for (i, raw) in text.split_inclusive('\n').enumerate() {
        let loc = Loc::new(i as u32 + 1, 1);
        let line = raw.trim_end_matches(['\n', '\r']);
        let newline = &raw[line.len()..];
        let trimmed = line.trim_start();

        let is_directive = !in_block_comment && trimmed.starts_with('#');
        if !is_directive {
            if active {
                out.push_str(line);
            }
            out.push_str(newline);
            if active {
                in_block_comment = track_block_comment(line, in_block_comment);
            }
            continue;
        }

        let body = trimmed[1..].trim();
        let (word, rest) = match body.find(|c: char| c.is_whitespace() || c == '(' || c == '!') {
            Some(p) => (&body[..p], body[p..].trim()),
            None => (body, ""),
        };
        match word {
            "if" | "ifdef" | "ifndef" => {
                let cond = match word {
                    "ifdef" => defines.contains(rest),
                    "ifndef" => !defines.contains(rest),
                    _ => eval_condition(rest, defines).ok_or_else(|| FrontendError::Preprocess {
                        loc,
                        reason: format!("unsupported #if condition `{rest}`"),
                    })?,
                };
                stack.push(Frame {
                    parent_active: active,
                    taken: cond,
                    seen_else: false,
                });
                active = active && cond;
            }
            "else" => {
                let frame = stack.last_mut().ok_or_else(|| FrontendError::Preprocess {
                    loc,
                    reason: "#else without #if".into(),
                })?;
                if frame.seen_else {
                    return Err(FrontendError::Preprocess {
                        loc,
                        reason: "duplicate #else".into(),
                    });
                }
                frame.seen_else = true;
                active = frame.parent_active && !frame.taken;
            }
            "endif" => {
                let frame = stack.pop().ok_or_else(|| FrontendError::Preprocess {
                    loc,
                    reason: "#endif without #if".into(),
                })?;
                active = frame.parent_active;
            }
            "include" => {}
            _ if !active => {}
            other => {
                return Err(FrontendError::Preprocess {
                    loc,
                    reason: format!("unsupported directive `#{other}`"),
                })
            }
        }
        out.push_str(newline);
    }

    if !stack.is_empty() {
        let line = text.lines().count().max(1) as u32;
        return Err(FrontendError::Preprocess {
            loc: Loc::new(line, 1),
            reason: "unterminated #if".into(),
        });
    }
    Ok(out)
}

fn eval_condition(cond: &str, defines: &BTreeSet<String>) -> Option<bool> {
    let cond = cond.trim();
    if let Some(inner) = cond.strip_prefix('!') {
        return eval_condition(inner, defines).map(|b| !b);
    }
    if let Some(rest) = cond.strip_prefix("defined") {
        let name = rest
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .trim();
        return is_ident(name).then(|| defines.contains(name));
    }
    if let Ok(n) = cond.parse::<i64>() {
        return Some(n != 0);
    }
    is_ident(cond).then(|| defines.contains(cond))
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

// Good enough to keep `#` inside a block comment from being read as a directive.
fn track_block_comment(line: &str, mut inside: bool) -> bool {
    let bytes = line.as_bytes();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if inside {
            if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                inside = false;
                i += 2;
                continue;
            }
        } else if bytes[i] == b'/' && bytes[i + 1] == b'/' {
            break;
        } else if bytes[i] == b'/' && bytes[i + 1] == b'*' {
            inside = true;
            i += 2;
            continue;
        }
        i += 1;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defs(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn selects_branch_and_keeps_line_numbers() {
        let src = "a\n#if HW\nb\n#else\nc\n#endif\nd\n";
        let out = preprocess(src, &defs(&[])).unwrap();
        assert_eq!(out, "a\n\n\n\nc\n\nd\n");
        let out = preprocess(src, &defs(&["HW"])).unwrap();
        assert_eq!(out, "a\n\nb\n\n\n\nd\n");
    }

    #[test]
    fn nested_and_defined_forms() {
        let src = "#ifdef A\n#if !defined(B)\nx\n#endif\n#endif\n#if 0\ny\n#endif\n";
        assert_eq!(preprocess(src, &defs(&["A"])).unwrap(), "\n\nx\n\n\n\n\n\n");
        assert_eq!(preprocess(src, &defs(&["A", "B"])).unwrap(), "\n\n\n\n\n\n\n\n");
    }

    #[test]
    fn include_is_dropped() {
        assert_eq!(
            preprocess("#include <assert.h>\nint x;\n", &defs(&[])).unwrap(),
            "\nint x;\n"
        );
    }

    #[test]
    fn rejects_macros_and_unbalanced() {
        assert!(preprocess("#define X 1\n", &defs(&[])).is_err());
        assert!(preprocess("#if A\n", &defs(&[])).is_err());
        assert!(preprocess("#endif\n", &defs(&[])).is_err());
    }
}
