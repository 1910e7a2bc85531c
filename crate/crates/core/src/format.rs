//! Text format for models and their opacity specification.
//!
//! ```text
//! # Comments start with '#'.
//! alphabet: a, u
//! clocks: x
//! locations: l0, l1, l2
//! initial: l0
//! accepting: l0, l1, l2
//! secret: l1
//! nonsecret: l2
//! observable: a
//! transitions:
//!   l0 --a [x=1] {x}--> l1
//!   l0 --u [x<1 && x>=0] {}--> l2
//! ```
//!
//! `locations` and `initial` are required. A missing `accepting` means every
//! location accepts and a missing `observable` means every event is
//! observable. Guard atoms are `clock op bound` with `op` one of `<`, `<=`,
//! `=`, `>=`, `>`, joined by `&&`; `true` is the empty guard. Identifiers match
//! `[A-Za-z_][A-Za-z0-9_']*`. The silent label `~eps~` may not be used.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::model::{
    Atom, ClockId, CmpOp, Guard, Label, LocId, OpacitySpec, TimedAutomaton, Transition,
    SILENT_SPELLING,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

const SECTIONS: [&str; 9] = [
    "alphabet",
    "clocks",
    "locations",
    "initial",
    "accepting",
    "secret",
    "nonsecret",
    "observable",
    "transitions",
];

/// A list item with its position.
#[derive(Clone, Debug)]
struct Item {
    text: String,
    line: usize,
    column: usize,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    /// Column of byte 0 of `text`, 1-based.
    base: usize,
}

impl<'a> Cursor<'a> {
    fn column(&self) -> usize {
        self.base + self.text[..self.pos].chars().count()
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line: self.line,
            column: self.column(),
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.err(format!("expected `{token}`"))
        }
    }

    fn ident(&mut self) -> Result<Item, ParseError> {
        self.skip_ws();
        let column = self.column();
        let rest = self.rest();
        let len = ident_len(rest);
        if len == 0 {
            return self.err("expected an identifier");
        }
        self.pos += len;
        Ok(Item {
            text: rest[..len].to_string(),
            line: self.line,
            column,
        })
    }

    fn number(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let digits: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_digit())
            .collect();
        if digits.is_empty() {
            return self.err("expected a natural number");
        }
        let n = match digits.parse() {
            Ok(n) => n,
            Err(_) => return self.err("constant too large"),
        };
        self.pos += digits.len();
        Ok(n)
    }
}

fn ident_len(s: &str) -> usize {
    let mut chars = s.char_indices();
    match chars.next() {
        Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return 0,
    }
    for (i, c) in chars {
        if !(c.is_ascii_alphanumeric() || c == '_' || c == '\'') {
            return i;
        }
    }
    s.len()
}

struct RawTransition {
    source: Item,
    label: Item,
    atoms: Vec<(Item, CmpOp, u32)>,
    resets: Vec<Item>,
    target: Item,
}

fn parse_transition(text: &str, line: usize, base: usize) -> Result<RawTransition, ParseError> {
    let mut c = Cursor {
        text,
        pos: 0,
        line,
        base,
    };
    let source = c.ident()?;
    c.expect("--")?;
    c.skip_ws();
    let label = if c.rest().starts_with(SILENT_SPELLING) {
        return c.err(format!("`{SILENT_SPELLING}` is reserved"));
    } else {
        c.ident()?
    };
    c.expect("[")?;
    let mut atoms = Vec::new();
    if !c.eat("true") {
        loop {
            let clock = c.ident()?;
            c.skip_ws();
            let op = if c.eat("<=") {
                CmpOp::Le
            } else if c.eat(">=") {
                CmpOp::Ge
            } else if c.eat("==") || c.eat("=") {
                CmpOp::Eq
            } else if c.eat("<") {
                CmpOp::Lt
            } else if c.eat(">") {
                CmpOp::Gt
            } else {
                return c.err("expected a comparison operator");
            };
            let bound = c.number()?;
            atoms.push((clock, op, bound));
            if !c.eat("&&") {
                break;
            }
        }
    }
    c.expect("]")?;
    c.expect("{")?;
    let mut resets = Vec::new();
    if !c.eat("}") {
        loop {
            resets.push(c.ident()?);
            if c.eat("}") {
                break;
            }
            c.expect(",")?;
        }
    }
    c.expect("-->")?;
    let target = c.ident()?;
    c.skip_ws();
    if !c.rest().is_empty() {
        return c.err("unexpected trailing input");
    }
    Ok(RawTransition {
        source,
        label,
        atoms,
        resets,
        target,
    })
}

fn parse_list(text: &str, line: usize, base: usize) -> Result<Vec<Item>, ParseError> {
    let mut c = Cursor {
        text,
        pos: 0,
        line,
        base,
    };
    let mut items = Vec::new();
    c.skip_ws();
    if c.rest().is_empty() {
        return Ok(items);
    }
    loop {
        c.skip_ws();
        if c.rest().starts_with(SILENT_SPELLING) {
            return c.err(format!("`{SILENT_SPELLING}` is reserved"));
        }
        items.push(c.ident()?);
        c.skip_ws();
        if c.rest().is_empty() {
            return Ok(items);
        }
        c.expect(",")?;
    }
}

fn undeclared<T>(item: &Item, what: &str) -> Result<T, ParseError> {
    Err(ParseError {
        line: item.line,
        column: item.column,
        message: format!("undeclared {what} `{}`", item.text),
    })
}

fn duplicates(items: &[Item], what: &str) -> Result<(), ParseError> {
    let mut seen = BTreeSet::new();
    for i in items {
        if !seen.insert(&i.text) {
            return Err(ParseError {
                line: i.line,
                column: i.column,
                message: format!("duplicate {what} `{}`", i.text),
            });
        }
    }
    Ok(())
}

/// Parses a model file into the automaton and its opacity specification.
pub fn parse_model(text: &str) -> Result<(TimedAutomaton, OpacitySpec), ParseError> {
    let mut lists: HashMap<&str, (Vec<Item>, usize)> = HashMap::new();
    let mut raw = Vec::new();
    let mut in_transitions = false;

    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let content = full.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let body = content.trim_start();
        let head_len = ident_len(body);
        let is_section = head_len > 0 && body[head_len..].trim_start().starts_with(':');
        if is_section {
            let name = &body[..head_len];
            let Some(name) = SECTIONS.iter().find(|s| **s == name) else {
                return Err(ParseError {
                    line,
                    column: indent + 1,
                    message: format!("unknown section `{name}`"),
                });
            };
            if lists.contains_key(name) || (*name == "transitions" && in_transitions) {
                return Err(ParseError {
                    line,
                    column: indent + 1,
                    message: format!("duplicate section `{name}`"),
                });
            }
            let colon = body.find(':').unwrap();
            let after = &body[colon + 1..];
            let after_col = indent + body[..colon + 1].chars().count() + 1;
            if *name == "transitions" {
                if !after.trim().is_empty() {
                    raw.push(parse_transition(after, line, after_col)?);
                }
                in_transitions = true;
                lists.insert(name, (Vec::new(), line));
            } else {
                in_transitions = false;
                lists.insert(name, (parse_list(after, line, after_col)?, line));
            }
        } else if in_transitions {
            raw.push(parse_transition(body, line, indent + 1)?);
        } else {
            return Err(ParseError {
                line,
                column: indent + 1,
                message: "expected `section: ...`".into(),
            });
        }
    }

    let missing = |name: &str| ParseError {
        line: text.lines().count().max(1),
        column: 1,
        message: format!("missing section `{name}`"),
    };
    let get = |name: &str| lists.get(name).map(|(items, _)| items.clone());
    let locations = get("locations").ok_or_else(|| missing("locations"))?;
    let initial = get("initial").ok_or_else(|| missing("initial"))?;
    let alphabet = get("alphabet").unwrap_or_default();
    let clocks = get("clocks").unwrap_or_default();
    duplicates(&locations, "location")?;
    duplicates(&alphabet, "event")?;
    duplicates(&clocks, "clock")?;

    let mut ta = TimedAutomaton::with_locations(locations.iter().map(|l| l.text.clone()));
    ta.clocks = clocks.iter().map(|c| c.text.clone()).collect();
    ta.alphabet = alphabet.iter().map(|a| Label::event(&a.text)).collect();

    let loc = |item: &Item| match ta.find_location(&item.text) {
        Some(l) => Ok(l),
        None => undeclared(item, "location"),
    };
    let locs = |items: &[Item]| {
        items
            .iter()
            .map(loc)
            .collect::<Result<BTreeSet<LocId>, _>>()
    };
    let initial = locs(&initial)?;
    if initial.is_empty() {
        return Err(ParseError {
            line: lists["initial"].1,
            column: 1,
            message: "no initial location".into(),
        });
    }
    let accepting = match get("accepting") {
        Some(items) => locs(&items)?,
        None => ta.location_ids().collect(),
    };
    let secret = locs(&get("secret").unwrap_or_default())?;
    let nonsecret = locs(&get("nonsecret").unwrap_or_default())?;
    let observable = match get("observable") {
        Some(items) => {
            let mut out = BTreeSet::new();
            for i in &items {
                if !alphabet.iter().any(|a| a.text == i.text) {
                    return undeclared(i, "event");
                }
                out.insert(i.text.clone());
            }
            out
        }
        None => alphabet.iter().map(|a| a.text.clone()).collect(),
    };

    let clock = |item: &Item| match ta.find_clock(&item.text) {
        Some(c) => Ok(c),
        None => undeclared(item, "clock"),
    };
    let mut transitions = Vec::new();
    for t in &raw {
        if !alphabet.iter().any(|a| a.text == t.label.text) {
            return undeclared(&t.label, "event");
        }
        let atoms = t
            .atoms
            .iter()
            .map(|(c, op, k)| Ok(Atom::new(clock(c)?, *op, *k)))
            .collect::<Result<Vec<_>, ParseError>>()?;
        let resets = t
            .resets
            .iter()
            .map(clock)
            .collect::<Result<BTreeSet<ClockId>, _>>()?;
        transitions.push(Transition {
            source: loc(&t.source)?,
            label: Label::event(&t.label.text),
            guard: Guard::new(atoms),
            resets,
            target: loc(&t.target)?,
        });
    }
    ta.initial = initial;
    ta.accepting = accepting;
    ta.transitions = transitions;
    Ok((
        ta,
        OpacitySpec {
            observable,
            secret,
            nonsecret,
        },
    ))
}

/// Serializes a model in the format read by [`parse_model`].
pub fn write_model(ta: &TimedAutomaton, spec: &OpacitySpec) -> String {
    let names = |set: &BTreeSet<LocId>| {
        set.iter()
            .map(|l| ta.location_name(*l))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let events: Vec<&str> = ta.alphabet.iter().map(|l| l.file_spelling()).collect();
    let mut out = String::new();
    out.push_str(&format!("alphabet: {}\n", events.join(", ")));
    out.push_str(&format!("clocks: {}\n", ta.clocks.join(", ")));
    let locations: Vec<&str> = ta.locations.iter().map(|l| l.name.as_str()).collect();
    out.push_str(&format!("locations: {}\n", locations.join(", ")));
    out.push_str(&format!("initial: {}\n", names(&ta.initial)));
    out.push_str(&format!("accepting: {}\n", names(&ta.accepting)));
    out.push_str(&format!("secret: {}\n", names(&spec.secret)));
    out.push_str(&format!("nonsecret: {}\n", names(&spec.nonsecret)));
    let observable: Vec<&str> = spec.observable.iter().map(String::as_str).collect();
    out.push_str(&format!("observable: {}\n", observable.join(", ")));
    out.push_str("transitions:\n");
    for t in &ta.transitions {
        let resets: Vec<&str> = t.resets.iter().map(|c| ta.clocks[c.0].as_str()).collect();
        out.push_str(&format!(
            "  {} --{} [{}] {{{}}}--> {}\n",
            ta.location_name(t.source),
            t.label.file_spelling(),
            t.guard.display(&ta.clocks),
            resets.join(", "),
            ta.location_name(t.target)
        ));
    }
    out
}
