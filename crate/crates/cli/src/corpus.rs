use std::fmt;

use anyhow::{bail, Context, Result};

pub const BUNDLED: &str = include_str!("../data/paper.corpus");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Accept,
    Reject,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Accept => "accept",
            Outcome::Reject => "reject",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub outcome: Outcome,
    pub readings: Option<usize>,
}

impl Expectation {
    pub fn holds(&self, surviving: usize) -> bool {
        match self.outcome {
            Outcome::Reject => surviving == 0,
            Outcome::Accept => surviving > 0 && self.readings.is_none_or(|n| n == surviving),
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.outcome)?;
        if let Some(n) = self.readings {
            write!(f, ", readings={n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub line: usize,
    pub sentence: String,
    pub expect: Expectation,
}

/// Parses `<sentence> => accept|reject [, readings=<n>]` lines; `#` starts a
/// comment.
pub fn parse(src: &str) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (sentence, rest) = text
            .split_once("=>")
            .with_context(|| format!("line {line}: expected `<sentence> => accept|reject`"))?;
        let sentence = sentence.trim();
        if sentence.is_empty() {
            bail!("line {line}: empty sentence");
        }
        let mut parts = rest.split(',').map(str::trim);
        let outcome = match parts.next() {
            Some("accept") => Outcome::Accept,
            Some("reject") => Outcome::Reject,
            other => bail!(
                "line {line}: expected accept or reject, found `{}`",
                other.unwrap_or("")
            ),
        };
        let mut readings = None;
        for part in parts {
            let n = part
                .strip_prefix("readings=")
                .and_then(|n| n.trim().parse().ok())
                .with_context(|| format!("line {line}: expected `readings=<n>`, found `{part}`"))?;
            readings = Some(n);
        }
        if outcome == Outcome::Reject && readings.is_some_and(|n| n > 0) {
            bail!("line {line}: a rejected sentence has no readings");
        }
        cases.push(Case {
            line,
            sentence: sentence.to_string(),
            expect: Expectation { outcome, readings },
        });
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines() {
        let cases =
            parse("# header\n\ntom ate a banana => accept, readings=1\nthe x => reject # why\n")
                .unwrap();
        assert_eq!(cases.len(), 2);
        assert_eq!(cases[0].line, 3);
        assert_eq!(cases[0].expect.readings, Some(1));
        assert_eq!(cases[1].sentence, "the x");
        assert_eq!(cases[1].expect.outcome, Outcome::Reject);
    }

    #[test]
    fn malformed() {
        assert!(parse("tom ate a banana").is_err());
        assert!(parse("tom => maybe").is_err());
        assert!(parse("tom => accept, parses=2").is_err());
        assert!(parse(" => accept").is_err());
    }

    #[test]
    fn expectations() {
        let e = Expectation {
            outcome: Outcome::Accept,
            readings: Some(1),
        };
        assert!(e.holds(1) && !e.holds(2) && !e.holds(0));
        let e = Expectation {
            outcome: Outcome::Reject,
            readings: None,
        };
        assert!(e.holds(0) && !e.holds(1));
    }

    #[test]
    fn bundled_corpus_is_well_formed() {
        assert_eq!(parse(BUNDLED).unwrap().len(), 8);
    }
}
