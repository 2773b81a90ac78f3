//! Line-oriented text format for automata.
//!
//! ```text
//! type 1nfa|2nfa
//! states <n>
//! start <q>
//! accept <q>
//! reject <q>                     # optional, 2nfa only
//! alphabet <sym> <sym> ...
//! trans <p> <sym> <q>            # 1nfa
//! trans <p> <sym|<|>> <q> <L|R>  # 2nfa
//! ```
//!
//! `#` starts a comment. Header keys may appear in any order but only once;
//! serialization emits them in the order above followed by the transitions
//! sorted by source, letter (`<`, alphabet order, `>`), target and direction.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::automaton::{Alphabet, Automaton, Dir, Letter, OneWayNfa, StateId, TwoWayNfa};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError { line, message: message.into() }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    One,
    Two,
}

struct RawTrans {
    line: usize,
    from: usize,
    letter: String,
    to: usize,
    dir: Option<Dir>,
}

fn parse_state(tok: Option<&str>, line: usize, what: &str) -> Result<usize, FormatError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| err(line, format!("{what} must be a nonnegative integer, got `{tok}`")))
}

/// Parses an automaton from its text form.
pub fn parse(text: &str) -> Result<Automaton, FormatError> {
    let mut headers: HashMap<&str, (usize, Vec<&str>)> = HashMap::new();
    let mut trans = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        let Some(key) = toks.next() else { continue };
        let rest: Vec<&str> = toks.collect();
        match key {
            "type" | "states" | "start" | "accept" | "reject" | "alphabet" => {
                if headers.insert(key, (line, rest)).is_some() {
                    return Err(err(line, format!("duplicate header key `{key}`")));
                }
            }
            "trans" => {
                let dir = match rest.len() {
                    3 => None,
                    4 => Some(match rest[3] {
                        "L" => Dir::L,
                        "R" => Dir::R,
                        d => return Err(err(line, format!("direction must be L or R, got `{d}`"))),
                    }),
                    _ => return Err(err(line, "trans expects `<p> <sym> <q>` or `<p> <sym> <q> <L|R>`")),
                };
                trans.push(RawTrans {
                    line,
                    from: parse_state(rest.first().copied(), line, "source state")?,
                    letter: rest[1].to_string(),
                    to: parse_state(rest.get(2).copied(), line, "target state")?,
                    dir,
                });
            }
            other => return Err(err(line, format!("unknown key `{other}`"))),
        }
    }

    let single = |key: &str| -> Result<Option<(usize, &str)>, FormatError> {
        match headers.get(key) {
            None => Ok(None),
            Some((line, vals)) if vals.len() == 1 => Ok(Some((*line, vals[0]))),
            Some((line, _)) => Err(err(*line, format!("`{key}` takes exactly one value"))),
        }
    };
    let required = |key: &str| -> Result<(usize, &str), FormatError> {
        single(key)?.ok_or_else(|| err(last_line, format!("missing `{key}` header")))
    };

    let (tline, tval) = required("type")?;
    let kind = match tval {
        "1nfa" => Kind::One,
        "2nfa" => Kind::Two,
        other => return Err(err(tline, format!("type must be 1nfa or 2nfa, got `{other}`"))),
    };
    let (sline, sval) = required("states")?;
    let n = parse_state(Some(sval), sline, "state count")?;
    let (l, v) = required("start")?;
    let start = StateId(parse_state(Some(v), l, "start state")?);
    let (l, v) = required("accept")?;
    let accept = StateId(parse_state(Some(v), l, "accept state")?);
    let reject = match single("reject")? {
        None => None,
        Some((l, _)) if kind == Kind::One => return Err(err(l, "reject is only allowed for 2nfa")),
        Some((l, v)) => Some(StateId(parse_state(Some(v), l, "reject state")?)),
    };
    let (aline, names) = headers
        .get("alphabet")
        .map(|(l, v)| (*l, v.clone()))
        .ok_or_else(|| err(last_line, "missing `alphabet` header"))?;
    if names.is_empty() {
        return Err(err(aline, "alphabet nonempty"));
    }
    for (i, name) in names.iter().enumerate() {
        if *name == "<" || *name == ">" {
            return Err(err(aline, "endmarkers `<` and `>` are reserved"));
        }
        if names[..i].contains(name) {
            return Err(err(aline, format!("duplicate symbol `{name}`")));
        }
    }
    let alphabet = Alphabet::new(names.iter().copied());

    let letter_of = |t: &RawTrans| -> Result<Letter, FormatError> {
        match t.letter.as_str() {
            "<" => Ok(Letter::LeftEnd),
            ">" => Ok(Letter::RightEnd),
            s => alphabet.lookup(s).map(Letter::Sym).ok_or_else(|| err(t.line, format!("unknown symbol `{s}`"))),
        }
    };

    let automaton = match kind {
        Kind::One => {
            let mut a = OneWayNfa::new(n, alphabet.clone(), start, accept);
            for t in &trans {
                if t.dir.is_some() {
                    return Err(err(t.line, "direction not allowed for 1nfa"));
                }
                match letter_of(t)? {
                    Letter::Sym(s) => a.add_transition(StateId(t.from), s, StateId(t.to)),
                    _ => return Err(err(t.line, "endmarkers not allowed for 1nfa")),
                }
            }
            Automaton::OneWay(a)
        }
        Kind::Two => {
            let mut a = TwoWayNfa::new(n, alphabet.clone(), start, accept, reject);
            for t in &trans {
                let dir = t.dir.ok_or_else(|| err(t.line, "2nfa transitions need a direction"))?;
                a.add_transition(StateId(t.from), letter_of(t)?, StateId(t.to), dir);
            }
            Automaton::TwoWay(a)
        }
    };
    if let Some(v) = automaton.validate().into_iter().next() {
        return Err(err(last_line, v));
    }
    Ok(automaton)
}

fn letter_token(alphabet: &Alphabet, l: Letter) -> &str {
    match l {
        Letter::LeftEnd => "<",
        Letter::Sym(s) => alphabet.name(s),
        Letter::RightEnd => ">",
    }
}

/// Canonical text form.
pub fn serialize(a: &Automaton) -> String {
    let mut out = String::new();
    match a {
        Automaton::OneWay(a) => {
            let _ = writeln!(out, "type 1nfa");
            let _ = writeln!(out, "states {}", a.n());
            let _ = writeln!(out, "start {}", a.start());
            let _ = writeln!(out, "accept {}", a.accept());
            let _ = writeln!(out, "alphabet {}", a.alphabet().names().join(" "));
            for &(p, s, q) in a.transitions() {
                let _ = writeln!(out, "trans {p} {} {q}", a.alphabet().name(s));
            }
        }
        Automaton::TwoWay(a) => {
            let _ = writeln!(out, "type 2nfa");
            let _ = writeln!(out, "states {}", a.n());
            let _ = writeln!(out, "start {}", a.start());
            let _ = writeln!(out, "accept {}", a.accept());
            if let Some(r) = a.reject() {
                let _ = writeln!(out, "reject {r}");
            }
            let _ = writeln!(out, "alphabet {}", a.alphabet().names().join(" "));
            for &(p, l, q, d) in a.transitions() {
                let d = if d == Dir::L { "L" } else { "R" };
                let _ = writeln!(out, "trans {p} {} {q} {d}", letter_token(a.alphabet(), l));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::fixtures::{a1, a2};

    #[test]
    fn fixtures_round_trip() {
        for a in [Automaton::OneWay(a1()), Automaton::TwoWay(a2())] {
            let text = serialize(&a);
            assert_eq!(parse(&text).unwrap(), a);
            assert_eq!(serialize(&parse(&text).unwrap()), text);
        }
    }

    #[test]
    fn a1_canonical_text() {
        assert_eq!(
            serialize(&Automaton::OneWay(a1())),
            "type 1nfa\nstates 2\nstart 0\naccept 1\nalphabet a b\ntrans 0 a 0\ntrans 0 a 1\ntrans 0 b 0\n"
        );
    }

    #[test]
    fn comments_and_header_order_are_free() {
        let text = "# a comment\nalphabet a b\ntype 1nfa # trailing\nstates 2\naccept 1\nstart 0\n\ntrans 0 a 1\n";
        let Automaton::OneWay(a) = parse(text).unwrap() else { panic!() };
        assert_eq!(a.n(), 2);
        assert_eq!(a.transitions().count(), 1);
    }

    #[test]
    fn direction_rejected_for_one_way() {
        let text = "type 1nfa\nstates 2\nstart 0\naccept 1\nalphabet a\ntrans 0 a 1 R\n";
        assert_eq!(parse(text).unwrap_err(), err(6, "direction not allowed for 1nfa"));
    }

    #[test]
    fn empty_alphabet_rejected() {
        let text = "type 1nfa\nstates 1\nstart 0\naccept 0\nalphabet\n";
        assert_eq!(parse(text).unwrap_err().message, "alphabet nonempty");
    }

    #[test]
    fn duplicate_header_rejected() {
        let text = "type 2nfa\nstates 1\nstates 2\n";
        assert_eq!(parse(text).unwrap_err(), err(3, "duplicate header key `states`"));
    }

    #[test]
    fn unknown_symbol_reports_line() {
        let text = "type 2nfa\nstates 2\nstart 0\naccept 1\nalphabet a\ntrans 0 z 1 R\n";
        assert_eq!(parse(text).unwrap_err(), err(6, "unknown symbol `z`"));
    }

    #[test]
    fn out_of_range_state_rejected() {
        let text = "type 1nfa\nstates 2\nstart 0\naccept 1\nalphabet a\ntrans 0 a 5\n";
        assert!(parse(text).unwrap_err().message.contains("target out of range"));
    }

    #[test]
    fn endmarkers_rejected_for_one_way() {
        let text = "type 1nfa\nstates 2\nstart 0\naccept 1\nalphabet a\ntrans 0 < 1\n";
        assert!(parse(text).is_err());
    }
}
