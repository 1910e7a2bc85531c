//! Timed words, observable projection and digitization.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::model::OpacitySpec;

/// Exact timestamps. Region membership is discontinuous, so floats are not an
/// option here.
pub type Rational = num_rational::Rational64;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedEvent {
    pub symbol: String,
    pub time: Rational,
}

impl Serialize for TimedEvent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.symbol, self.time.to_string()).serialize(s)
    }
}

/// A finite sequence of `(symbol, timestamp)` pairs with non-decreasing
/// timestamps.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TimedWord {
    pub events: Vec<TimedEvent>,
}

impl TimedWord {
    pub fn new() -> Self {
        TimedWord::default()
    }

    /// Builds a word from `(symbol, time)` pairs; `None` if a timestamp is
    /// negative or the sequence decreases.
    pub fn from_pairs<S: Into<String>>(
        pairs: impl IntoIterator<Item = (S, Rational)>,
    ) -> Option<Self> {
        let events: Vec<TimedEvent> = pairs
            .into_iter()
            .map(|(s, t)| TimedEvent {
                symbol: s.into(),
                time: t,
            })
            .collect();
        let word = TimedWord { events };
        word.is_well_formed().then_some(word)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn is_well_formed(&self) -> bool {
        let mut last = Rational::zero();
        for e in &self.events {
            if e.time < last {
                return false;
            }
            last = e.time;
        }
        true
    }

    pub fn is_integral(&self) -> bool {
        self.events.iter().all(|e| e.time.is_integer())
    }

    /// Parses `(a,0.5)(b,1)`. Timestamps may be integers, decimals or `p/q`
    /// fractions and are converted exactly.
    pub fn parse(text: &str) -> Result<TimedWord, String> {
        let mut events = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let inner = rest
                .strip_prefix('(')
                .ok_or_else(|| format!("expected `(` at `{rest}`"))?;
            let close = inner
                .find(')')
                .ok_or_else(|| "unterminated `(`".to_string())?;
            let (body, tail) = inner.split_at(close);
            let (sym, time) = body
                .split_once(',')
                .ok_or_else(|| format!("expected `symbol,time` in `{body}`"))?;
            let sym = sym.trim();
            if sym.is_empty() {
                return Err("empty symbol".into());
            }
            events.push(TimedEvent {
                symbol: sym.to_string(),
                time: parse_rational(time.trim())?,
            });
            rest = tail[1..].trim_start();
        }
        let word = TimedWord { events };
        if word.is_well_formed() {
            Ok(word)
        } else {
            Err("timestamps must be non-negative and non-decreasing".into())
        }
    }
}

impl fmt::Display for TimedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.events.is_empty() {
            return f.write_str("ε");
        }
        for e in &self.events {
            write!(f, "({},{})", e.symbol, e.time)?;
        }
        Ok(())
    }
}

/// Parses `3`, `0.25` or `7/10` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let bad = || format!("invalid number `{s}`");
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: i64 = digits.parse().map_err(|_| bad())?;
    let den = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    Ok(Rational::new(num, den))
}

/// Deletes every event whose symbol is not observable; timestamps of the kept
/// events are unchanged.
pub fn project(word: &TimedWord, spec: &OpacitySpec) -> TimedWord {
    TimedWord {
        events: word
            .events
            .iter()
            .filter(|e| spec.observable.contains(&e.symbol))
            .cloned()
            .collect(),
    }
}

/// Rounds `t` down when its fractional part is at most `lambda`, up otherwise.
pub fn shift(t: Rational, lambda: Rational) -> Rational {
    if t.fract() <= lambda {
        t.floor()
    } else {
        t.ceil()
    }
}

pub fn shift_word(word: &TimedWord, lambda: Rational) -> TimedWord {
    TimedWord {
        events: word
            .events
            .iter()
            .map(|e| TimedEvent {
                symbol: e.symbol.clone(),
                time: shift(e.time, lambda),
            })
            .collect(),
    }
}

/// All order-preserving integer shifts of `word` over thresholds λ ∈ [0,1).
///
/// The shift is constant between consecutive distinct fractional parts, so it is
/// enough to evaluate it at λ = 0 and at each fractional part below 1.
pub fn digitize(word: &TimedWord) -> BTreeSet<TimedWord> {
    let mut thresholds: BTreeSet<Rational> = word.events.iter().map(|e| e.time.fract()).collect();
    thresholds.insert(Rational::zero());
    debug_assert!(thresholds.iter().all(|l| *l < Rational::one()));
    thresholds
        .into_iter()
        .map(|l| shift_word(word, l))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn w(pairs: &[(&str, Rational)]) -> TimedWord {
        TimedWord::from_pairs(pairs.iter().map(|(s, t)| (*s, *t))).unwrap()
    }

    fn spec(obs: &[&str]) -> OpacitySpec {
        OpacitySpec {
            observable: obs.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn projection_examples() {
        let word = w(&[("u", r(1, 2)), ("a", r(1, 1))]);
        assert_eq!(project(&word, &spec(&["a"])), w(&[("a", r(1, 1))]));
        assert_eq!(project(&TimedWord::new(), &spec(&["a"])), TimedWord::new());
        let word = w(&[("a", r(1, 1)), ("u", r(6, 5)), ("b", r(3, 1))]);
        assert_eq!(
            project(&word, &spec(&["a", "b"])),
            w(&[("a", r(1, 1)), ("b", r(3, 1))])
        );
    }

    #[test]
    fn digitize_single_half() {
        let got = digitize(&w(&[("a", r(1, 2))]));
        let want: BTreeSet<_> = [w(&[("a", r(0, 1))]), w(&[("a", r(1, 1))])].into();
        assert_eq!(got, want);
    }

    #[test]
    fn digitize_integer_word_is_fixed() {
        let word = w(&[("a", r(2, 1)), ("b", r(3, 1))]);
        assert_eq!(digitize(&word), [word.clone()].into());
    }

    #[test]
    fn digitize_two_fractions() {
        let got = digitize(&w(&[("a", r(3, 10)), ("b", r(7, 10))]));
        let want: BTreeSet<_> = [
            w(&[("a", r(1, 1)), ("b", r(1, 1))]),
            w(&[("a", r(0, 1)), ("b", r(1, 1))]),
            w(&[("a", r(0, 1)), ("b", r(0, 1))]),
        ]
        .into();
        assert_eq!(got, want);
    }

    #[test]
    fn parses_decimals_exactly() {
        let word = TimedWord::parse("(a,0.5)(b,1)(c, 7/3)").unwrap();
        assert_eq!(word.events[0].time, r(1, 2));
        assert_eq!(word.events[1].time, r(1, 1));
        assert_eq!(word.events[2].time, r(7, 3));
        assert!(TimedWord::parse("(a,2)(b,1)").is_err());
        assert!(TimedWord::parse("(a,x)").is_err());
        assert_eq!(TimedWord::parse("").unwrap(), TimedWord::new());
    }
}
