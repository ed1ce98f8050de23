//! Line-oriented text formats for nets (`.pnet`) and relations (`.prel`).
//!
//! ```text
//! # comment
//! place s1
//! place s2
//! trans t1: s1 -a-> 2*s2
//! trans t2: 2*s2 -b-> 0
//! marking init = s1
//! ```
//!
//! Multiset expressions are `term (+ term)*` with `term = (NAT *)? IDENT`,
//! and `0` stands for the empty multiset. Relation files hold one `lhs ~ rhs`
//! pair per line, θ being written `0`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::multiset::{Multiset, Place};
use crate::net::{Net, NetError};
use crate::relation::{PlaceRelation, RelationKind, Slot};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
}

/// A net together with its named markings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NetDocument {
    pub net: Net,
    pub markings: BTreeMap<String, Multiset>,
}

/// A set of place pairs resolved against a net, θ allowed only when
/// `dummy_allowed`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationDocument {
    pub pairs: Vec<(Slot, Slot)>,
    pub dummy_allowed: bool,
}

impl RelationDocument {
    /// The relation of the given kind over `places` places. Fails only if a
    /// θ pair is requested as plain.
    pub fn to_relation(&self, places: usize, kind: RelationKind) -> Result<PlaceRelation, crate::relation::RelationError> {
        PlaceRelation::from_pairs(places, kind, self.pairs.iter().copied())
    }

    pub fn from_relation(r: &PlaceRelation) -> Self {
        RelationDocument {
            pairs: r.pairs(),
            dummy_allowed: r.kind() == RelationKind::Dummy,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Plus,
    Star,
    Colon,
    Equals,
    Tilde,
    /// `-label->`
    Arrow(String),
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Tokenizes one line (comment already stripped); columns are 1-based.
fn lex(line_no: usize, text: &str) -> Result<Vec<(usize, Tok)>, FormatError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, msg: String| FormatError::Syntax {
        line: line_no,
        column: col,
        message: msg,
    };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push((col, Tok::Ident(chars[start..i].iter().collect())));
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits
                .parse::<u64>()
                .map_err(|_| err(col, format!("number `{digits}` is too large")))?;
            out.push((col, Tok::Nat(n)));
        } else {
            match c {
                '+' => out.push((col, Tok::Plus)),
                '*' => out.push((col, Tok::Star)),
                ':' => out.push((col, Tok::Colon)),
                '=' => out.push((col, Tok::Equals)),
                '~' => out.push((col, Tok::Tilde)),
                '-' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < chars.len() && chars[j] != '-' {
                        j += 1;
                    }
                    if j + 1 >= chars.len() || chars[j + 1] != '>' {
                        return Err(err(col, "expected `-label->`".into()));
                    }
                    let label: String = chars[start..j].iter().collect::<String>().trim().to_string();
                    if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        return Err(err(col + 1, format!("invalid label `{label}`")));
                    }
                    out.push((col, Tok::Arrow(label)));
                    i = j + 1;
                }
                other => return Err(err(col, format!("unexpected character `{other}`"))),
            }
            i += 1;
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    line: usize,
    toks: &'a [(usize, Tok)],
    pos: usize,
    eol_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|&(c, _)| c).unwrap_or(self.eol_col)
    }

    fn error(&self, message: impl Into<String>) -> FormatError {
        FormatError::Syntax {
            line: self.line,
            column: self.col(),
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), FormatError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, FormatError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn end(&self) -> Result<(), FormatError> {
        if self.pos < self.toks.len() {
            Err(self.error("unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    /// `0 | term (+ term)*`; names resolved through `resolve`.
    fn mexpr(&mut self, net: &Net) -> Result<Multiset, FormatError> {
        if self.peek() == Some(&Tok::Nat(0)) && self.toks.get(self.pos + 1).map(|(_, t)| t) != Some(&Tok::Star) {
            self.pos += 1;
            return Ok(Multiset::empty());
        }
        let mut counts: Vec<(Place, u32)> = Vec::new();
        loop {
            let mut k: u64 = 1;
            if let Some(Tok::Nat(n)) = self.peek() {
                k = *n;
                self.pos += 1;
                self.expect(Tok::Star, "`*` after multiplicity")?;
            }
            let col = self.col();
            let name = self.ident("a place name")?;
            let p = net.place_by_name(&name).ok_or(FormatError::Semantic {
                line: self.line,
                message: format!("undeclared place `{name}`"),
            })?;
            let k = u32::try_from(k).map_err(|_| FormatError::Syntax {
                line: self.line,
                column: col,
                message: "multiplicity exceeds the cap".into(),
            })?;
            counts.push((p, k));
            if self.peek() == Some(&Tok::Plus) {
                self.pos += 1;
            } else {
                break;
            }
        }
        Multiset::try_from_counts(counts).map_err(|e| FormatError::Semantic {
            line: self.line,
            message: e.to_string(),
        })
    }

    fn slot(&mut self, net: &Net, dummy_allowed: bool) -> Result<Slot, FormatError> {
        match self.peek() {
            Some(Tok::Nat(0)) => {
                if !dummy_allowed {
                    return Err(FormatError::Semantic {
                        line: self.line,
                        message: "θ (`0`) is only allowed in dummy relations".into(),
                    });
                }
                self.pos += 1;
                Ok(Slot::Theta)
            }
            _ => {
                let name = self.ident("a place name or `0`")?;
                net.place_by_name(&name).map(Slot::Place).ok_or(FormatError::Semantic {
                    line: self.line,
                    message: format!("undeclared place `{name}`"),
                })
            }
        }
    }
}

/// Non-empty, comment-stripped lines with 1-based numbers. Accepts LF and
/// CRLF.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("").trim_end_matches('\r');
        if body.trim().is_empty() {
            None
        } else {
            Some((i + 1, body))
        }
    })
}

fn cursor<'a>(line: usize, body: &str, toks: &'a [(usize, Tok)]) -> Cursor<'a> {
    Cursor {
        line,
        toks,
        pos: 0,
        eol_col: body.chars().count() + 1,
    }
}

pub fn parse_net(text: &str) -> Result<NetDocument, FormatError> {
    let mut doc = NetDocument::default();
    for (line, body) in lines(text) {
        let toks = lex(line, body)?;
        let mut c = cursor(line, body, &toks);
        let semantic = |e: NetError| FormatError::Semantic {
            line,
            message: e.to_string(),
        };
        match c.next() {
            Some(Tok::Ident(kw)) if kw == "place" => {
                let name = c.ident("a place name")?;
                c.end()?;
                doc.net.add_place(name).map_err(semantic)?;
            }
            Some(Tok::Ident(kw)) if kw == "trans" => {
                let id = match c.peek() {
                    Some(Tok::Ident(_)) => Some(c.ident("a transition name")?),
                    _ => None,
                };
                c.expect(Tok::Colon, "`:`")?;
                let pre = c.mexpr(&doc.net)?;
                let label = match c.next() {
                    Some(Tok::Arrow(l)) => l,
                    _ => {
                        c.pos -= 1;
                        return Err(c.error("expected `-label->`"));
                    }
                };
                let post = c.mexpr(&doc.net)?;
                c.end()?;
                let id = id.unwrap_or_else(|| fresh_transition_id(&doc.net));
                doc.net.add_transition(id, pre, &label, post).map_err(semantic)?;
            }
            Some(Tok::Ident(kw)) if kw == "marking" => {
                let name = c.ident("a marking name")?;
                c.expect(Tok::Equals, "`=`")?;
                let m = c.mexpr(&doc.net)?;
                c.end()?;
                if doc.markings.insert(name.clone(), m).is_some() {
                    return Err(FormatError::Semantic {
                        line,
                        message: format!("marking `{name}` is declared twice"),
                    });
                }
            }
            _ => {
                c.pos = 0;
                return Err(c.error("expected `place`, `trans` or `marking`"));
            }
        }
    }
    Ok(doc)
}

fn fresh_transition_id(net: &Net) -> String {
    let mut k = net.transitions().len() + 1;
    loop {
        let id = format!("t{k}");
        if net.transition_by_id(&id).is_none() {
            return id;
        }
        k += 1;
    }
}

/// Parses a multiset expression such as `2*s1 + s2`, or `0`.
pub fn parse_marking(net: &Net, text: &str) -> Result<Multiset, FormatError> {
    let body = text.trim_end_matches(['\r', '\n']);
    let toks = lex(1, body)?;
    let mut c = cursor(1, body, &toks);
    if toks.is_empty() {
        return Err(c.error("empty marking expression"));
    }
    let m = c.mexpr(net)?;
    c.end()?;
    Ok(m)
}

pub fn parse_relation(net: &Net, text: &str, dummy_allowed: bool) -> Result<RelationDocument, FormatError> {
    let mut pairs = Vec::new();
    for (line, body) in lines(text) {
        let toks = lex(line, body)?;
        let mut c = cursor(line, body, &toks);
        let a = c.slot(net, dummy_allowed)?;
        c.expect(Tok::Tilde, "`~`")?;
        let b = c.slot(net, dummy_allowed)?;
        c.end()?;
        if !(a.is_theta() && b.is_theta()) {
            pairs.push((a, b));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    Ok(RelationDocument { pairs, dummy_allowed })
}

/// Canonical multiset expression: terms in place order, `0` for θ.
pub fn format_marking(net: &Net, m: &Multiset) -> String {
    if m.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (p, k)) in m.iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        if k > 1 {
            let _ = write!(out, "{k}*");
        }
        out.push_str(net.place_name(p));
    }
    out
}

pub fn format_slot(net: &Net, s: Slot) -> String {
    match s {
        Slot::Place(p) => net.place_name(p).to_string(),
        Slot::Theta => "0".to_string(),
    }
}

pub fn serialize_net(doc: &NetDocument) -> String {
    let net = &doc.net;
    let mut out = String::new();
    for p in net.places() {
        let _ = writeln!(out, "place {}", net.place_name(p));
    }
    for t in net.transitions() {
        let _ = writeln!(
            out,
            "trans {}: {} -{}-> {}",
            t.id,
            format_marking(net, &t.pre),
            net.label_name(t.label),
            format_marking(net, &t.post)
        );
    }
    for (name, m) in &doc.markings {
        let _ = writeln!(out, "marking {name} = {}", format_marking(net, m));
    }
    out
}

pub fn serialize_relation(net: &Net, pairs: &[(Slot, Slot)]) -> String {
    let mut out = String::new();
    for &(a, b) in pairs {
        let _ = writeln!(out, "{} ~ {}", format_slot(net, a), format_slot(net, b));
    }
    out
}

macro_rules! fixture {
    ($name:literal) => {
        ($name, include_str!(concat!("../corpus/", $name, ".pnet")))
    };
}

/// The encoded example nets. Paired nets are merged into one net with
/// disjoint place names.
pub const CORPUS: &[(&str, &str)] = &[
    fixture!("fig4"),
    fixture!("fig5"),
    fixture!("fig6"),
    fixture!("fig7"),
    fixture!("fig8"),
    fixture!("fig9"),
    fixture!("fig10"),
    fixture!("fig11"),
    fixture!("fig12"),
    fixture!("fig13"),
    fixture!("fig14"),
];

macro_rules! relation {
    ($fixture:literal, $name:literal, $dummy:literal) => {
        ($fixture, $name, $dummy, include_str!(concat!("../corpus/", $fixture, "_", $name, ".prel")))
    };
}

/// Relations discussed alongside the corpus nets: `(fixture, name, dummy, text)`.
pub const CORPUS_RELATIONS: &[(&str, &str, bool, &str)] = &[
    relation!("fig6", "r1", false),
    relation!("fig6", "r2", false),
    relation!("fig6", "r3", false),
    relation!("fig6", "r4", false),
    relation!("fig6", "r5", false),
    relation!("fig6", "r6", false),
    relation!("fig6", "union", false),
    relation!("fig7", "r1", false),
    relation!("fig7", "r2", false),
    relation!("fig7", "r3", false),
    relation!("fig7", "r4", false),
    relation!("fig7", "r5", false),
    relation!("fig7", "r6", false),
    relation!("fig7", "r7", false),
    relation!("fig8", "pc", false),
    relation!("fig9", "r", false),
    relation!("fig10", "r", true),
    relation!("fig11", "r", true),
    relation!("fig12", "r", true),
    relation!("fig13", "r", false),
];

/// Every corpus net, parsed.
pub fn corpus() -> BTreeMap<&'static str, NetDocument> {
    CORPUS
        .iter()
        .map(|&(name, text)| (name, parse_net(text).unwrap_or_else(|e| panic!("corpus fixture {name}: {e}"))))
        .collect()
}

/// The named corpus net. Panics on an unknown name.
pub fn corpus_net(name: &str) -> Net {
    let (_, text) = CORPUS
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no corpus fixture `{name}`"));
    parse_net(text).expect("corpus fixture parses").net
}

/// A corpus relation as a plain or dummy relation, per its declaration.
/// Panics on an unknown name.
pub fn corpus_relation(fixture: &str, name: &str) -> PlaceRelation {
    let &(_, _, dummy, text) = CORPUS_RELATIONS
        .iter()
        .find(|(f, n, _, _)| *f == fixture && *n == name)
        .unwrap_or_else(|| panic!("no corpus relation `{fixture}/{name}`"));
    let net = corpus_net(fixture);
    let kind = if dummy { RelationKind::Dummy } else { RelationKind::Plain };
    parse_relation(&net, text, dummy)
        .expect("corpus relation parses")
        .to_relation(net.place_count(), kind)
        .expect("corpus relation fits its kind")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_arcs() {
        let doc = parse_net("place s1\nplace s2\ntrans t: s1 -a-> 2*s2").unwrap();
        let net = &doc.net;
        let t = &net.transitions()[0];
        assert_eq!(t.pre, Multiset::singleton(net.place_by_name("s1").unwrap()));
        assert_eq!(t.post, Multiset::with_count(net.place_by_name("s2").unwrap(), 2));
        assert_eq!(net.label_name(t.label), "a");
    }

    #[test]
    fn empty_preset_is_rejected() {
        let err = parse_net("trans t: 0 -a-> s1").unwrap_err();
        assert!(matches!(err, FormatError::Semantic { line: 1, .. }), "{err}");
        let err = parse_net("place s1\ntrans t: 0 -a-> s1").unwrap_err();
        assert!(err.to_string().contains("empty pre-set"), "{err}");
    }

    #[test]
    fn empty_postset_is_accepted() {
        let doc = parse_net("place s1\ntrans t: s1 -a-> 0").unwrap();
        assert!(doc.net.transitions()[0].post.is_empty());
    }

    #[test]
    fn semantic_errors() {
        assert!(parse_net("place s1\nplace s1").unwrap_err().to_string().contains("twice"));
        assert!(parse_net("place s1\ntrans t: s2 -a-> s1").unwrap_err().to_string().contains("undeclared"));
        assert!(parse_net("place s1\ntrans t: s1 -a-> 0\ntrans t: s1 -a-> 0")
            .unwrap_err()
            .to_string()
            .contains("twice"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_net("place s1\ntrans t s1 -a-> 0").unwrap_err() {
            FormatError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 9)),
            e => panic!("{e}"),
        }
        match parse_net("place s1\ntrans t: s1 -a- 0").unwrap_err() {
            FormatError::Syntax { line: 2, .. } => {}
            e => panic!("{e}"),
        }
        assert!(matches!(parse_net("bogus"), Err(FormatError::Syntax { line: 1, column: 1, .. })));
        assert!(matches!(parse_net("place s1 s2"), Err(FormatError::Syntax { .. })));
    }

    #[test]
    fn anonymous_transitions_get_fresh_ids() {
        let doc = parse_net("place a\ntrans t2: a -x-> 0\ntrans : a -y-> a\n").unwrap();
        assert_eq!(doc.net.transitions()[1].id, "t3");
    }

    #[test]
    fn crlf_and_comments() {
        let doc = parse_net("# net\r\nplace s1 # first\r\nplace s2\r\ntrans t: s1 -a-> s2\r\n").unwrap();
        assert_eq!(doc.net.place_count(), 2);
    }

    #[test]
    fn markings() {
        let net = parse_net("place s1\nplace s2").unwrap().net;
        let s1 = net.place_by_name("s1").unwrap();
        let s2 = net.place_by_name("s2").unwrap();
        assert_eq!(
            parse_marking(&net, "2*s1 + s2").unwrap(),
            Multiset::from_counts([(s1, 2), (s2, 1)])
        );
        assert_eq!(parse_marking(&net, "0").unwrap(), Multiset::empty());
        assert_eq!(parse_marking(&net, "s1 + s1").unwrap(), Multiset::with_count(s1, 2));
        assert!(parse_marking(&net, "s3").is_err());
        assert!(parse_marking(&net, "2 s1").is_err());
        assert!(parse_marking(&net, "").is_err());
        assert!(parse_marking(&net, "s1 +").is_err());

        let pc = corpus_net("fig8");
        let m = parse_marking(&pc, "P1 + C1").unwrap();
        assert_eq!(m.size(), 2);
        assert!(m.contains(pc.place_by_name("P1").unwrap()));
        assert!(m.contains(pc.place_by_name("C1").unwrap()));
    }

    #[test]
    fn relations() {
        let net = corpus_net("fig10");
        let doc = parse_relation(&net, "s1 ~ s4\n0 ~ s5\ns2 ~ s6\ns3 ~ 0\n", true).unwrap();
        let p = |n: &str| Slot::Place(net.place_by_name(n).unwrap());
        assert_eq!(
            doc.pairs,
            vec![(p("s1"), p("s4")), (p("s2"), p("s6")), (p("s3"), Slot::Theta), (Slot::Theta, p("s5"))]
        );
        assert_eq!(doc.to_relation(6, RelationKind::Dummy).unwrap(), corpus_relation("fig10", "r"));

        let net13 = corpus_net("fig13");
        let doc = parse_relation(&net13, "s1 ~ s3\ns2 ~ s4", false).unwrap();
        assert_eq!(doc.to_relation(4, RelationKind::Plain).unwrap(), corpus_relation("fig13", "r"));

        let err = parse_relation(&net13, "s1 ~ 0", false).unwrap_err();
        assert!(matches!(err, FormatError::Semantic { .. }));
        assert!(parse_relation(&net13, "s1 ~ s9", false).is_err());
        assert!(parse_relation(&net13, "s1 s3", false).is_err());
    }

    #[test]
    fn corpus_manifest() {
        let manifest = [
            ("fig4", 4, 4),
            ("fig5", 7, 4),
            ("fig6", 3, 1),
            ("fig7", 8, 6),
            ("fig8", 10, 9),
            ("fig9", 9, 11),
            ("fig10", 6, 4),
            ("fig11", 4, 1),
            ("fig12", 4, 2),
            ("fig13", 4, 5),
            ("fig14", 6, 5),
        ];
        let docs = corpus();
        assert_eq!(docs.len(), manifest.len());
        for (name, places, transitions) in manifest {
            let net = &docs[name].net;
            assert_eq!(net.place_count(), places, "{name}");
            assert_eq!(net.transitions().len(), transitions, "{name}");
        }
        for &(fixture, name, _, _) in CORPUS_RELATIONS {
            let _ = corpus_relation(fixture, name);
        }
    }

    #[test]
    fn corpus_shapes() {
        let net = corpus_net("fig6");
        let t = &net.transitions()[0];
        assert_eq!(format_marking(&net, &t.pre), "s1 + s2");
        assert_eq!(format_marking(&net, &t.post), "s3");

        let net = corpus_net("fig14");
        let side_a: Vec<String> = net.transitions()[..3]
            .iter()
            .map(|t| format!("{} -{}-> {}", format_marking(&net, &t.pre), net.label_name(t.label), format_marking(&net, &t.post)))
            .collect();
        assert_eq!(side_a, ["s1 -a-> s2", "s1 -b-> s3", "s2 + s3 -c-> 0"]);

        let net = corpus_net("fig9");
        let side_b: Vec<String> = net.transitions()[9..]
            .iter()
            .map(|t| format!("{} -{}-> {}", format_marking(&net, &t.pre), net.label_name(t.label), format_marking(&net, &t.post)))
            .collect();
        assert_eq!(side_b, ["s8 -a-> s9", "s9 -b-> 2*s9"]);
    }

    #[test]
    fn corpus_round_trips() {
        for (name, doc) in corpus() {
            let text = serialize_net(&doc);
            let back = parse_net(&text).unwrap();
            assert_eq!(back, doc, "{name}");
            assert_eq!(serialize_net(&back), text);
        }
    }
}
