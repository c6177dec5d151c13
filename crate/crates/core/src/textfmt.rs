//! Line-oriented structured text: a version tag on the first line, then
//! `key = value` lines, grouped into `[section]` blocks. Values are decimal
//! integers, integer lists (`1 2 3`), bracketed matrices (`[[1, 0], [0, 1]]`)
//! or bare words. Output is canonical, so serialising a parsed document
//! reproduces it byte for byte.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::Int;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
    /// Column where the value starts (1-based).
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Doc {
    pub tag: String,
    pub head: Section,
    pub sections: Vec<Section>,
}

impl Section {
    fn new(name: &str, line: usize) -> Section {
        Section { name: name.to_string(), line, entries: Vec::new() }
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push(Entry { key: key.to_string(), value: value.to_string(), line: 0, col: 0 });
        self
    }

    pub fn get(&self, key: &str) -> Result<&Entry> {
        self.entries
            .iter()
            .find(|e| e.key == key)
            .ok_or_else(|| Error::parse(self.line, 1, format!("missing key `{}` in [{}]", key, self.label())))
    }

    pub fn all(&self, key: &str) -> Vec<&Entry> {
        self.entries.iter().filter(|e| e.key == key).collect()
    }

    /// Keys must appear exactly in this order.
    pub fn expect_keys(&self, keys: &[&str]) -> Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            match keys.get(i) {
                Some(k) if *k == e.key => {}
                Some(k) => return Err(Error::parse(e.line, 1, format!("expected key `{}`, found `{}`", k, e.key))),
                None => return Err(Error::parse(e.line, 1, format!("unexpected key `{}`", e.key))),
            }
        }
        if self.entries.len() < keys.len() {
            return Err(Error::parse(self.line, 1, format!("missing key `{}` in [{}]", keys[self.entries.len()], self.label())));
        }
        Ok(())
    }

    fn label(&self) -> &str {
        if self.name.is_empty() {
            "header"
        } else {
            &self.name
        }
    }
}

impl Entry {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.col, msg)
    }

    pub fn int(&self) -> Result<Int> {
        parse_int(&self.value).ok_or_else(|| self.err(format!("`{}` is not a decimal integer", self.value)))
    }

    pub fn num<T: FromStr>(&self) -> Result<T> {
        self.value.parse().map_err(|_| self.err(format!("`{}` is not a valid number", self.value)))
    }

    pub fn ints(&self) -> Result<Vec<Int>> {
        if self.value.is_empty() {
            return Ok(Vec::new());
        }
        self.value
            .split(' ')
            .map(|t| parse_int(t).ok_or_else(|| self.err(format!("`{}` is not a decimal integer", t))))
            .collect()
    }

    pub fn matrix(&self) -> Result<Mat<Int>> {
        parse_matrix(&self.value).ok_or_else(|| self.err("malformed matrix"))
    }

    pub fn word(&self) -> &str {
        &self.value
    }
}

/// Canonical decimal: optional `-`, no leading zeros, no `+`.
fn parse_int(s: &str) -> Option<Int> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if (digits.len() > 1 && digits.starts_with('0')) || s == "-0" {
        return None;
    }
    s.parse().ok()
}

fn parse_matrix(s: &str) -> Option<Mat<Int>> {
    let inner = s.strip_prefix('[')?.strip_suffix(']')?;
    if inner.is_empty() {
        return Some(Vec::new());
    }
    let mut rows = Vec::new();
    for (i, part) in inner.split("], [").enumerate() {
        let mut p = part;
        if i == 0 {
            p = p.strip_prefix('[')?;
        }
        if let Some(q) = p.strip_suffix(']') {
            p = q;
        }
        let row: Option<Vec<Int>> = p.split(", ").map(parse_int).collect();
        rows.push(row?);
    }
    (format_matrix(&rows) == s).then_some(rows)
}

pub fn format_matrix(m: &[Vec<Int>]) -> String {
    let rows: Vec<String> =
        m.iter().map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))).collect();
    format!("[{}]", rows.join(", "))
}

pub fn format_ints(v: &[Int]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl Doc {
    pub fn new(tag: &str) -> Doc {
        Doc { tag: tag.to_string(), head: Section::new("", 1), sections: Vec::new() }
    }

    pub fn section(&mut self, name: &str) -> &mut Section {
        self.sections.push(Section::new(name, 0));
        self.sections.last_mut().expect("just pushed")
    }

    pub fn sections_named(&self, name: &str) -> Vec<&Section> {
        self.sections.iter().filter(|s| s.name == name).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.tag);
        for e in &self.head.entries {
            let _ = writeln!(out, "{} = {}", e.key, e.value);
        }
        for s in &self.sections {
            let _ = writeln!(out, "\n[{}]", s.name);
            for e in &s.entries {
                let _ = writeln!(out, "{} = {}", e.key, e.value);
            }
        }
        out
    }

    /// Parse and check the version tag. Blank lines are skipped; keys,
    /// separators and integers are strict.
    pub fn parse(text: &str, tag: &str) -> Result<Doc> {
        let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
        let (_, first) = lines.next().unwrap_or((1, ""));
        if first != tag {
            return Err(Error::parse(1, 1, format!("expected version tag `{}`, found `{}`", tag, first)));
        }
        let mut doc = Doc::new(tag);
        let mut current: Option<Section> = None;
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .filter(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase() || b == b'_'))
                    .ok_or_else(|| Error::parse(n, 1, "malformed section header"))?;
                if let Some(s) = current.take() {
                    doc.sections.push(s);
                }
                current = Some(Section::new(name, n));
                continue;
            }
            let eq = line.find(" = ").ok_or_else(|| Error::parse(n, 1, "expected `key = value`"))?;
            let key = &line[..eq];
            if key.is_empty() || !key.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_') {
                return Err(Error::parse(n, 1, format!("invalid key `{}`", key)));
            }
            let value = &line[eq + 3..];
            if value.starts_with(' ') || value.ends_with(' ') {
                return Err(Error::parse(n, eq + 4, "stray whitespace in value"));
            }
            let e = Entry { key: key.to_string(), value: value.to_string(), line: n, col: eq + 4 };
            match current.as_mut() {
                Some(s) => s.entries.push(e),
                None => doc.head.entries.push(e),
            }
        }
        if let Some(s) = current.take() {
            doc.sections.push(s);
        }
        if !text.ends_with('\n') {
            return Err(Error::parse(text.split('\n').count(), 1, "missing final newline"));
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_positions() {
        let mut d = Doc::new("demo/1");
        d.head.push("n", -12).push("list", "1 2 3");
        d.section("block").push("m", format_matrix(&[vec![Int::from(1), Int::from(0)], vec![Int::from(0), Int::from(7)]]));
        let text = d.render();
        let back = Doc::parse(&text, "demo/1").unwrap();
        assert_eq!(back.render(), text);
        assert_eq!(back.head.get("n").unwrap().int().unwrap(), Int::from(-12));
        assert_eq!(back.sections[0].get("m").unwrap().matrix().unwrap()[1][1], Int::from(7));

        let bad = text.replace("1 2 3", "1 x 3");
        let e = Doc::parse(&bad, "demo/1").unwrap().head.get("list").unwrap().ints().unwrap_err();
        assert_eq!(e, Error::Parse { line: 3, col: 8, msg: "`x` is not a decimal integer".into() });
        assert!(matches!(Doc::parse(&text, "demo/2"), Err(Error::Parse { line: 1, col: 1, .. })));
        assert!(parse_int("007").is_none() && parse_int("+7").is_none());
    }
}
