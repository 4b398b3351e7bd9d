//! Formula ASTs, the surface grammar, and the subformula machinery: PSFm and
//! SFm, modal depth, the level sets, generators, and the subscript
//! translations into the extended propositional language.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::sequences::Sequence;

/// A formula of the modal source language (no Delta).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModalFormula {
    Var(String),
    Top,
    Bot,
    WeakAnd(Box<ModalFormula>, Box<ModalFormula>),
    WeakOr(Box<ModalFormula>, Box<ModalFormula>),
    StrongAnd(Box<ModalFormula>, Box<ModalFormula>),
    Imp(Box<ModalFormula>, Box<ModalFormula>),
    Necc(Box<ModalFormula>),
    Poss(Box<ModalFormula>),
}

impl ModalFormula {
    pub fn var(name: &str) -> Self {
        ModalFormula::Var(name.to_string())
    }

    pub fn weak_and(l: ModalFormula, r: ModalFormula) -> Self {
        ModalFormula::WeakAnd(Box::new(l), Box::new(r))
    }

    pub fn weak_or(l: ModalFormula, r: ModalFormula) -> Self {
        ModalFormula::WeakOr(Box::new(l), Box::new(r))
    }

    pub fn strong_and(l: ModalFormula, r: ModalFormula) -> Self {
        ModalFormula::StrongAnd(Box::new(l), Box::new(r))
    }

    pub fn imp(l: ModalFormula, r: ModalFormula) -> Self {
        ModalFormula::Imp(Box::new(l), Box::new(r))
    }

    /// ~x, normalized as x -> 0.
    pub fn neg(f: ModalFormula) -> Self {
        ModalFormula::imp(f, ModalFormula::Bot)
    }

    /// x <-> y, normalized as (x -> y) & (y -> x).
    pub fn iff(l: ModalFormula, r: ModalFormula) -> Self {
        ModalFormula::strong_and(
            ModalFormula::imp(l.clone(), r.clone()),
            ModalFormula::imp(r, l),
        )
    }

    pub fn necc(f: ModalFormula) -> Self {
        ModalFormula::Necc(Box::new(f))
    }

    pub fn poss(f: ModalFormula) -> Self {
        ModalFormula::Poss(Box::new(f))
    }

    pub fn is_modal_headed(&self) -> bool {
        matches!(self, ModalFormula::Necc(_) | ModalFormula::Poss(_))
    }

    pub fn is_box_headed(&self) -> bool {
        matches!(self, ModalFormula::Necc(_))
    }

    /// The body of a modal-headed formula.
    pub fn modal_body(&self) -> Option<&ModalFormula> {
        match self {
            ModalFormula::Necc(b) | ModalFormula::Poss(b) => Some(b),
            _ => None,
        }
    }

    /// Propositional variables occurring anywhere in the formula.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            ModalFormula::Var(p) => {
                out.insert(p.clone());
            }
            ModalFormula::Top | ModalFormula::Bot => {}
            ModalFormula::WeakAnd(l, r)
            | ModalFormula::WeakOr(l, r)
            | ModalFormula::StrongAnd(l, r)
            | ModalFormula::Imp(l, r) => {
                l.collect_variables(out);
                r.collect_variables(out);
            }
            ModalFormula::Necc(b) | ModalFormula::Poss(b) => b.collect_variables(out),
        }
    }

    /// Printed form with `box`/`dia` for the modal operators, used in
    /// sequence labels and reports.
    pub fn word_form(&self) -> String {
        let mut s = String::new();
        self.print(&mut s, 0, true);
        s
    }

    fn print(&self, out: &mut String, prec: u8, word: bool) {
        match self {
            ModalFormula::Var(p) => out.push_str(p),
            ModalFormula::Top => out.push('1'),
            ModalFormula::Bot => out.push('0'),
            ModalFormula::Imp(l, r) => {
                let open = prec > 1;
                if open {
                    out.push('(');
                }
                l.print(out, 2, word);
                out.push_str(" -> ");
                r.print(out, 1, word);
                if open {
                    out.push(')');
                }
            }
            ModalFormula::WeakOr(l, r) => {
                let open = prec > 2;
                if open {
                    out.push('(');
                }
                l.print(out, 2, word);
                out.push_str(" \\/ ");
                r.print(out, 3, word);
                if open {
                    out.push(')');
                }
            }
            ModalFormula::WeakAnd(l, r) => {
                let open = prec > 3;
                if open {
                    out.push('(');
                }
                l.print(out, 3, word);
                out.push_str(" /\\ ");
                r.print(out, 4, word);
                if open {
                    out.push(')');
                }
            }
            ModalFormula::StrongAnd(l, r) => {
                let open = prec > 4;
                if open {
                    out.push('(');
                }
                l.print(out, 4, word);
                out.push_str(" & ");
                r.print(out, 5, word);
                if open {
                    out.push(')');
                }
            }
            ModalFormula::Necc(b) | ModalFormula::Poss(b) => {
                let necc = matches!(self, ModalFormula::Necc(_));
                let sym = match (necc, word) {
                    (true, false) => "[] ",
                    (false, false) => "<> ",
                    (true, true) => "box",
                    (false, true) => "dia",
                };
                out.push_str(sym);
                if word {
                    if matches!(
                        **b,
                        ModalFormula::Var(_) | ModalFormula::Top | ModalFormula::Bot
                    ) {
                        out.push(' ');
                        b.print(out, 5, word);
                    } else {
                        out.push('(');
                        b.print(out, 0, word);
                        out.push(')');
                    }
                } else {
                    b.print(out, 5, word);
                }
            }
        }
    }
}

impl fmt::Display for ModalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.print(&mut s, 0, false);
        f.write_str(&s)
    }
}

impl Serialize for ModalFormula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ModalFormula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

/// A generator of a level set: a bare variable member or a modal-headed
/// member.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    Var(String),
    Modal(ModalFormula),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Var(p) => f.write_str(p),
            Generator::Modal(m) => f.write_str(&m.word_form()),
        }
    }
}

/// A variable of the extended propositional language built over a coherent or
/// simple set of sequences.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExtVar {
    BaseVar {
        name: String,
        seq: Sequence,
    },
    ModalAtom {
        formula: ModalFormula,
        seq: Sequence,
    },
    Alpha {
        seq: Sequence,
        gen: Generator,
    },
    RelVar {
        parent: Sequence,
        child: Sequence,
    },
}

impl fmt::Display for ExtVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtVar::BaseVar { name, seq } => write!(f, "{}_{}", name, seq),
            ExtVar::ModalAtom { formula, seq } => write!(f, "({})_{}", formula.word_form(), seq),
            ExtVar::Alpha { seq, gen } => write!(f, "alpha({}; {})", seq, gen),
            ExtVar::RelVar { parent, child } => write!(f, "r({}; {})", parent, child),
        }
    }
}

/// A formula of the propositional target language (product logic with Delta)
/// over extended variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropFormula {
    EVar(ExtVar),
    Top,
    Bot,
    WeakAnd(Box<PropFormula>, Box<PropFormula>),
    WeakOr(Box<PropFormula>, Box<PropFormula>),
    StrongAnd(Box<PropFormula>, Box<PropFormula>),
    Imp(Box<PropFormula>, Box<PropFormula>),
    Delta(Box<PropFormula>),
}

impl PropFormula {
    pub fn evar(v: ExtVar) -> Self {
        PropFormula::EVar(v)
    }

    pub fn weak_and(l: PropFormula, r: PropFormula) -> Self {
        PropFormula::WeakAnd(Box::new(l), Box::new(r))
    }

    pub fn weak_or(l: PropFormula, r: PropFormula) -> Self {
        PropFormula::WeakOr(Box::new(l), Box::new(r))
    }

    pub fn strong_and(l: PropFormula, r: PropFormula) -> Self {
        PropFormula::StrongAnd(Box::new(l), Box::new(r))
    }

    pub fn imp(l: PropFormula, r: PropFormula) -> Self {
        PropFormula::Imp(Box::new(l), Box::new(r))
    }

    pub fn delta(f: PropFormula) -> Self {
        PropFormula::Delta(Box::new(f))
    }

    pub fn neg(f: PropFormula) -> Self {
        PropFormula::imp(f, PropFormula::Bot)
    }

    pub fn iff(l: PropFormula, r: PropFormula) -> Self {
        PropFormula::strong_and(
            PropFormula::imp(l.clone(), r.clone()),
            PropFormula::imp(r, l),
        )
    }

    /// Weak conjunction of the given formulas; the empty conjunction is 1.
    pub fn conj<I: IntoIterator<Item = PropFormula>>(items: I) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => PropFormula::Top,
            Some(first) => it.fold(first, PropFormula::weak_and),
        }
    }

    /// Weak disjunction of the given formulas; the empty disjunction is 0.
    pub fn disj<I: IntoIterator<Item = PropFormula>>(items: I) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => PropFormula::Bot,
            Some(first) => it.fold(first, PropFormula::weak_or),
        }
    }

    pub fn contains_delta(&self) -> bool {
        match self {
            PropFormula::EVar(_) | PropFormula::Top | PropFormula::Bot => false,
            PropFormula::Delta(_) => true,
            PropFormula::WeakAnd(l, r)
            | PropFormula::WeakOr(l, r)
            | PropFormula::StrongAnd(l, r)
            | PropFormula::Imp(l, r) => l.contains_delta() || r.contains_delta(),
        }
    }

    /// Extended variables occurring in the formula.
    pub fn ext_vars(&self) -> BTreeSet<ExtVar> {
        let mut out = BTreeSet::new();
        self.collect_ext_vars(&mut out);
        out
    }

    fn collect_ext_vars(&self, out: &mut BTreeSet<ExtVar>) {
        match self {
            PropFormula::EVar(v) => {
                out.insert(v.clone());
            }
            PropFormula::Top | PropFormula::Bot => {}
            PropFormula::Delta(b) => b.collect_ext_vars(out),
            PropFormula::WeakAnd(l, r)
            | PropFormula::WeakOr(l, r)
            | PropFormula::StrongAnd(l, r)
            | PropFormula::Imp(l, r) => {
                l.collect_ext_vars(out);
                r.collect_ext_vars(out);
            }
        }
    }

    fn print(&self, out: &mut String, prec: u8) {
        match self {
            PropFormula::EVar(v) => out.push_str(&v.to_string()),
            PropFormula::Top => out.push('1'),
            PropFormula::Bot => out.push('0'),
            PropFormula::Imp(l, r) => {
                let open = prec > 1;
                if open {
                    out.push('(');
                }
                l.print(out, 2);
                out.push_str(" -> ");
                r.print(out, 1);
                if open {
                    out.push(')');
                }
            }
            PropFormula::WeakOr(l, r) => {
                let open = prec > 2;
                if open {
                    out.push('(');
                }
                l.print(out, 2);
                out.push_str(" \\/ ");
                r.print(out, 3);
                if open {
                    out.push(')');
                }
            }
            PropFormula::WeakAnd(l, r) => {
                let open = prec > 3;
                if open {
                    out.push('(');
                }
                l.print(out, 3);
                out.push_str(" /\\ ");
                r.print(out, 4);
                if open {
                    out.push(')');
                }
            }
            PropFormula::StrongAnd(l, r) => {
                let open = prec > 4;
                if open {
                    out.push('(');
                }
                l.print(out, 4);
                out.push_str(" & ");
                r.print(out, 5);
                if open {
                    out.push(')');
                }
            }
            PropFormula::Delta(b) => {
                out.push_str("! ");
                b.print(out, 5);
            }
        }
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.print(&mut s, 0);
        f.write_str(&s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("delta ('!') is not allowed in modal formulas (offset {offset})")]
    DeltaInModalInput { offset: usize },
}

fn syntax_err<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Syntax {
        offset,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Zero,
    One,
    LPar,
    RPar,
    Necc,
    Poss,
    Not,
    Delta,
    StrongAnd,
    WeakAnd,
    WeakOr,
    Imp,
    Iff,
    Comma,
    Lt,
    Gt,
    Prime,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '(' => {
                toks.push((Tok::LPar, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RPar, i));
                i += 1;
            }
            '~' => {
                toks.push((Tok::Not, i));
                i += 1;
            }
            '!' => {
                toks.push((Tok::Delta, i));
                i += 1;
            }
            '&' => {
                toks.push((Tok::StrongAnd, i));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            '\'' => {
                toks.push((Tok::Prime, i));
                i += 1;
            }
            '0' => {
                toks.push((Tok::Zero, i));
                i += 1;
            }
            '1' => {
                toks.push((Tok::One, i));
                i += 1;
            }
            '[' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b']' {
                    toks.push((Tok::Necc, i));
                    i += 2;
                } else {
                    return syntax_err(i, "expected \"[]\"");
                }
            }
            '<' => {
                if text[i..].starts_with("<->") {
                    toks.push((Tok::Iff, i));
                    i += 3;
                } else if text[i..].starts_with("<>") {
                    toks.push((Tok::Poss, i));
                    i += 2;
                } else {
                    toks.push((Tok::Lt, i));
                    i += 1;
                }
            }
            '>' => {
                toks.push((Tok::Gt, i));
                i += 1;
            }
            '-' => {
                if text[i..].starts_with("->") {
                    toks.push((Tok::Imp, i));
                    i += 2;
                } else {
                    return syntax_err(i, "expected \"->\"");
                }
            }
            '/' => {
                if text[i..].starts_with("/\\") {
                    toks.push((Tok::WeakAnd, i));
                    i += 2;
                } else {
                    return syntax_err(i, "expected \"/\\\"");
                }
            }
            '\\' => {
                if text[i..].starts_with("\\/") {
                    toks.push((Tok::WeakOr, i));
                    i += 2;
                } else {
                    return syntax_err(i, "expected \"\\/\"");
                }
            }
            'a'..='z' => {
                let start = i;
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                match word {
                    "box" => toks.push((Tok::Necc, start)),
                    "dia" => toks.push((Tok::Poss, start)),
                    _ => toks.push((Tok::Ident(word.to_string()), start)),
                }
            }
            _ => return syntax_err(i, format!("unexpected character {c:?}")),
        }
    }
    Ok(toks)
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Modal,
    Prop,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    mode: Mode,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            syntax_err(self.offset(), format!("expected {what}"))
        }
    }

    fn formula(&mut self) -> Result<ModalFormula, ParseError> {
        let mut f = self.implication()?;
        while self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let r = self.implication()?;
            f = ModalFormula::iff(f, r);
        }
        Ok(f)
    }

    fn implication(&mut self) -> Result<ModalFormula, ParseError> {
        let l = self.weak_or()?;
        if self.peek() == Some(&Tok::Imp) {
            self.pos += 1;
            let r = self.implication()?;
            Ok(ModalFormula::imp(l, r))
        } else {
            Ok(l)
        }
    }

    fn weak_or(&mut self) -> Result<ModalFormula, ParseError> {
        let mut f = self.weak_and()?;
        while self.peek() == Some(&Tok::WeakOr) {
            self.pos += 1;
            let r = self.weak_and()?;
            f = ModalFormula::weak_or(f, r);
        }
        Ok(f)
    }

    fn weak_and(&mut self) -> Result<ModalFormula, ParseError> {
        let mut f = self.strong_and()?;
        while self.peek() == Some(&Tok::WeakAnd) {
            self.pos += 1;
            let r = self.strong_and()?;
            f = ModalFormula::weak_and(f, r);
        }
        Ok(f)
    }

    fn strong_and(&mut self) -> Result<ModalFormula, ParseError> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::StrongAnd) {
            self.pos += 1;
            let r = self.unary()?;
            f = ModalFormula::strong_and(f, r);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<ModalFormula, ParseError> {
        let offset = self.offset();
        match self.peek() {
            Some(Tok::Necc) => {
                if self.mode == Mode::Prop {
                    return syntax_err(offset, "modal operator in propositional formula");
                }
                self.pos += 1;
                Ok(ModalFormula::necc(self.unary()?))
            }
            Some(Tok::Poss) => {
                if self.mode == Mode::Prop {
                    return syntax_err(offset, "modal operator in propositional formula");
                }
                self.pos += 1;
                Ok(ModalFormula::poss(self.unary()?))
            }
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(ModalFormula::neg(self.unary()?))
            }
            Some(Tok::Delta) => {
                if self.mode == Mode::Modal {
                    return Err(ParseError::DeltaInModalInput { offset });
                }
                // In propositional mode Delta is injected by the caller via a
                // marker variable; handled in parse_prop below.
                self.pos += 1;
                let body = self.unary()?;
                Ok(ModalFormula::necc(body))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<ModalFormula, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Ident(name)) => Ok(ModalFormula::Var(name)),
            Some(Tok::One) => Ok(ModalFormula::Top),
            Some(Tok::Zero) => Ok(ModalFormula::Bot),
            Some(Tok::LPar) => {
                let f = self.formula()?;
                self.expect(Tok::RPar, "\")\"")?;
                Ok(f)
            }
            Some(_) => syntax_err(offset, "expected a formula"),
            None => syntax_err(offset, "expected a formula"),
        }
    }
}

pub(crate) fn parse_formula_at(
    toks: &[(Tok, usize)],
    pos: usize,
    end: usize,
) -> Result<(ModalFormula, usize), ParseError> {
    let mut p = Parser {
        toks: toks.to_vec(),
        pos,
        end,
        mode: Mode::Modal,
    };
    let f = p.atom()?;
    Ok((f, p.pos))
}

/// Parse a modal formula. Derived connectives are normalized away; Delta is
/// rejected with a dedicated error.
pub fn parse(text: &str) -> Result<ModalFormula, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        mode: Mode::Modal,
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return syntax_err(p.offset(), "unexpected trailing input");
    }
    Ok(f)
}

/// Parse a propositional formula with Delta (`!`); variables become base
/// variables at the root sequence. Modal operators are rejected.
pub fn parse_prop(text: &str) -> Result<PropFormula, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        mode: Mode::Prop,
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return syntax_err(p.offset(), "unexpected trailing input");
    }
    // In propositional mode the parser reuses the modal AST, encoding Delta
    // as a box; rewrite into the propositional AST here.
    fn conv(f: &ModalFormula) -> PropFormula {
        match f {
            ModalFormula::Var(p) => PropFormula::EVar(ExtVar::BaseVar {
                name: p.clone(),
                seq: Sequence::root(),
            }),
            ModalFormula::Top => PropFormula::Top,
            ModalFormula::Bot => PropFormula::Bot,
            ModalFormula::WeakAnd(l, r) => PropFormula::weak_and(conv(l), conv(r)),
            ModalFormula::WeakOr(l, r) => PropFormula::weak_or(conv(l), conv(r)),
            ModalFormula::StrongAnd(l, r) => PropFormula::strong_and(conv(l), conv(r)),
            ModalFormula::Imp(l, r) => PropFormula::imp(conv(l), conv(r)),
            ModalFormula::Necc(b) => PropFormula::delta(conv(b)),
            ModalFormula::Poss(b) => PropFormula::delta(conv(b)),
        }
    }
    Ok(conv(&f))
}

/// Modal depth: nesting of modal operators.
pub fn modal_depth(f: &ModalFormula) -> usize {
    match f {
        ModalFormula::Var(_) | ModalFormula::Top | ModalFormula::Bot => 0,
        ModalFormula::WeakAnd(l, r)
        | ModalFormula::WeakOr(l, r)
        | ModalFormula::StrongAnd(l, r)
        | ModalFormula::Imp(l, r) => modal_depth(l).max(modal_depth(r)),
        ModalFormula::Necc(b) | ModalFormula::Poss(b) => 1 + modal_depth(b),
    }
}

/// Modal depth of a set; 0 for the empty set.
pub fn modal_depth_set(set: &BTreeSet<ModalFormula>) -> usize {
    set.iter().map(modal_depth).max().unwrap_or(0)
}

/// Propositional subformulas: the recursion stops at modal operators.
pub fn psfm(f: &ModalFormula) -> BTreeSet<ModalFormula> {
    let mut out = BTreeSet::new();
    collect_psfm(f, &mut out);
    out
}

fn collect_psfm(f: &ModalFormula, out: &mut BTreeSet<ModalFormula>) {
    out.insert(f.clone());
    match f {
        ModalFormula::WeakAnd(l, r)
        | ModalFormula::WeakOr(l, r)
        | ModalFormula::StrongAnd(l, r)
        | ModalFormula::Imp(l, r) => {
            collect_psfm(l, out);
            collect_psfm(r, out);
        }
        _ => {}
    }
}

/// All modal subformulas.
pub fn sfm(f: &ModalFormula) -> BTreeSet<ModalFormula> {
    let mut out = BTreeSet::new();
    collect_sfm(f, &mut out);
    out
}

fn collect_sfm(f: &ModalFormula, out: &mut BTreeSet<ModalFormula>) {
    out.insert(f.clone());
    match f {
        ModalFormula::WeakAnd(l, r)
        | ModalFormula::WeakOr(l, r)
        | ModalFormula::StrongAnd(l, r)
        | ModalFormula::Imp(l, r) => {
            collect_sfm(l, out);
            collect_sfm(r, out);
        }
        ModalFormula::Necc(b) | ModalFormula::Poss(b) => collect_sfm(b, out),
        _ => {}
    }
}

/// The level sets [Y_0, ..., Y_md]: Y_0 = PSFm(Y) and Y_{i+1} collects the
/// PSFm of the bodies of modal-headed members of Y_i.
pub fn levels(upsilon: &BTreeSet<ModalFormula>) -> Vec<BTreeSet<ModalFormula>> {
    let md = modal_depth_set(upsilon);
    let mut out = Vec::with_capacity(md + 1);
    let mut current = BTreeSet::new();
    for f in upsilon {
        current.extend(psfm(f));
    }
    out.push(current);
    for i in 0..md {
        let mut next = BTreeSet::new();
        for f in &out[i] {
            if let Some(body) = f.modal_body() {
                next.extend(psfm(body));
            }
        }
        out.push(next);
    }
    out
}

/// Generators of a level: bare variable members plus modal-headed members.
pub fn gens(level: &BTreeSet<ModalFormula>) -> BTreeSet<Generator> {
    level
        .iter()
        .filter_map(|f| match f {
            ModalFormula::Var(p) => Some(Generator::Var(p.clone())),
            ModalFormula::Necc(_) | ModalFormula::Poss(_) => Some(Generator::Modal(f.clone())),
            _ => None,
        })
        .collect()
}

/// The subscript translation: push the sequence through propositional
/// connectives, turning variables into base variables and modal-headed
/// subformulas into modal atoms.
pub fn subscript(f: &ModalFormula, seq: &Sequence) -> PropFormula {
    match f {
        ModalFormula::Var(p) => PropFormula::EVar(ExtVar::BaseVar {
            name: p.clone(),
            seq: seq.clone(),
        }),
        ModalFormula::Top => PropFormula::Top,
        ModalFormula::Bot => PropFormula::Bot,
        ModalFormula::WeakAnd(l, r) => PropFormula::weak_and(subscript(l, seq), subscript(r, seq)),
        ModalFormula::WeakOr(l, r) => PropFormula::weak_or(subscript(l, seq), subscript(r, seq)),
        ModalFormula::StrongAnd(l, r) => {
            PropFormula::strong_and(subscript(l, seq), subscript(r, seq))
        }
        ModalFormula::Imp(l, r) => PropFormula::imp(subscript(l, seq), subscript(r, seq)),
        ModalFormula::Necc(_) | ModalFormula::Poss(_) => PropFormula::EVar(ExtVar::ModalAtom {
            formula: f.clone(),
            seq: seq.clone(),
        }),
    }
}

/// The alpha image of a formula at a sequence: each generator is replaced by
/// its alpha variable, pushing through propositional connectives.
pub fn alpha_subscript(f: &ModalFormula, seq: &Sequence) -> PropFormula {
    match f {
        ModalFormula::Var(p) => PropFormula::EVar(ExtVar::Alpha {
            seq: seq.clone(),
            gen: Generator::Var(p.clone()),
        }),
        ModalFormula::Top => PropFormula::Top,
        ModalFormula::Bot => PropFormula::Bot,
        ModalFormula::WeakAnd(l, r) => {
            PropFormula::weak_and(alpha_subscript(l, seq), alpha_subscript(r, seq))
        }
        ModalFormula::WeakOr(l, r) => {
            PropFormula::weak_or(alpha_subscript(l, seq), alpha_subscript(r, seq))
        }
        ModalFormula::StrongAnd(l, r) => {
            PropFormula::strong_and(alpha_subscript(l, seq), alpha_subscript(r, seq))
        }
        ModalFormula::Imp(l, r) => {
            PropFormula::imp(alpha_subscript(l, seq), alpha_subscript(r, seq))
        }
        ModalFormula::Necc(_) | ModalFormula::Poss(_) => PropFormula::EVar(ExtVar::Alpha {
            seq: seq.clone(),
            gen: Generator::Modal(f.clone()),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<ModalFormula> {
        items.iter().map(|s| parse(s).unwrap()).collect()
    }

    #[test]
    fn parse_example_formula() {
        let f = parse("[] (y \\/ [] x)").unwrap();
        assert_eq!(
            f,
            ModalFormula::necc(ModalFormula::weak_or(
                ModalFormula::var("y"),
                ModalFormula::necc(ModalFormula::var("x"))
            ))
        );
        assert_eq!(parse("p").unwrap(), ModalFormula::var("p"));
    }

    #[test]
    fn parse_error_positions() {
        match parse("p ->") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("! p") {
            Err(ParseError::DeltaInModalInput { offset }) => assert_eq!(offset, 0),
            other => panic!("expected delta rejection, got {other:?}"),
        }
    }

    #[test]
    fn parse_normalizes_derived_connectives() {
        assert_eq!(
            parse("~p").unwrap(),
            ModalFormula::imp(ModalFormula::var("p"), ModalFormula::Bot)
        );
        assert_eq!(
            parse("p <-> q").unwrap(),
            ModalFormula::strong_and(
                ModalFormula::imp(ModalFormula::var("p"), ModalFormula::var("q")),
                ModalFormula::imp(ModalFormula::var("q"), ModalFormula::var("p"))
            )
        );
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse("p -> q -> r").unwrap(),
            ModalFormula::imp(
                ModalFormula::var("p"),
                ModalFormula::imp(ModalFormula::var("q"), ModalFormula::var("r"))
            )
        );
        assert_eq!(
            parse("p \\/ q /\\ r & s").unwrap(),
            ModalFormula::weak_or(
                ModalFormula::var("p"),
                ModalFormula::weak_and(
                    ModalFormula::var("q"),
                    ModalFormula::strong_and(ModalFormula::var("r"), ModalFormula::var("s"))
                )
            )
        );
        assert_eq!(parse("[]p & q").unwrap().to_string(), "[] p & q");
        assert_eq!(
            parse("[](p & q)").unwrap(),
            ModalFormula::necc(ModalFormula::strong_and(
                ModalFormula::var("p"),
                ModalFormula::var("q")
            ))
        );
    }

    #[test]
    fn print_parse_round_trip_examples() {
        for text in [
            "p",
            "0",
            "1",
            "[] (y \\/ [] x)",
            "<> <> y",
            "p & q & r",
            "p -> q -> r",
            "(p -> q) -> r",
            "p /\\ (q \\/ r)",
            "~ (p & ~ p)",
            "y & ([] x -> (x -> <> (y & x)))",
        ] {
            let f = parse(text).unwrap();
            let printed = f.to_string();
            assert_eq!(parse(&printed).unwrap(), f, "round trip of {text}");
        }
    }

    #[test]
    fn word_form_printing() {
        let f = parse("[](y \\/ [] x)").unwrap();
        assert_eq!(f.word_form(), "box(y \\/ box x)");
        assert_eq!(parse("[] x").unwrap().word_form(), "box x");
        assert_eq!(parse("<> <> y").unwrap().word_form(), "dia(dia y)");
    }

    #[test]
    fn modal_depth_examples() {
        assert_eq!(modal_depth(&parse("<> <> y").unwrap()), 2);
        assert_eq!(modal_depth(&parse("p").unwrap()), 0);
        assert_eq!(
            modal_depth(&parse("y & ([] x -> (x -> <> (y & x)))").unwrap()),
            1
        );
    }

    #[test]
    fn psfm_and_sfm_examples() {
        assert_eq!(
            psfm(&parse("[](y \\/ [] x)").unwrap()),
            set(&["[](y \\/ [] x)"])
        );
        assert_eq!(psfm(&parse("p & q").unwrap()), set(&["p & q", "p", "q"]));
        assert_eq!(sfm(&parse("[] p").unwrap()), set(&["[] p", "p"]));
    }

    #[test]
    fn levels_of_running_example() {
        let upsilon = set(&["[](y \\/ [] x)", "<> <> y"]);
        let ls = levels(&upsilon);
        assert_eq!(ls.len(), 3);
        assert_eq!(ls[0], upsilon);
        assert_eq!(ls[1], set(&["y \\/ [] x", "y", "[] x", "<> y"]));
        assert_eq!(ls[2], set(&["x", "y"]));
    }

    #[test]
    fn levels_of_flat_sets() {
        assert_eq!(levels(&set(&["p & q"])), vec![set(&["p & q", "p", "q"])]);
        assert_eq!(levels(&set(&["[] p"])), vec![set(&["[] p"]), set(&["p"])]);
    }

    #[test]
    fn gens_examples() {
        let level = set(&["y \\/ [] x", "[] x", "<> y"]);
        let g = gens(&level);
        assert_eq!(
            g,
            [
                Generator::Modal(parse("[] x").unwrap()),
                Generator::Modal(parse("<> y").unwrap()),
            ]
            .into_iter()
            .collect()
        );
        assert_eq!(
            gens(&set(&["x", "y"])),
            [
                Generator::Var("x".to_string()),
                Generator::Var("y".to_string())
            ]
            .into_iter()
            .collect()
        );
        assert_eq!(
            gens(&set(&["[] p"])),
            [Generator::Modal(parse("[] p").unwrap())]
                .into_iter()
                .collect()
        );
    }

    #[test]
    fn subscript_pushes_through_connectives() {
        let seq = Sequence::root();
        let f = parse("y & ([] x -> (x -> <> (y & x)))").unwrap();
        let t = subscript(&f, &seq);
        let y = PropFormula::EVar(ExtVar::BaseVar {
            name: "y".into(),
            seq: seq.clone(),
        });
        let x = PropFormula::EVar(ExtVar::BaseVar {
            name: "x".into(),
            seq: seq.clone(),
        });
        let boxx = PropFormula::EVar(ExtVar::ModalAtom {
            formula: parse("[] x").unwrap(),
            seq: seq.clone(),
        });
        let diayx = PropFormula::EVar(ExtVar::ModalAtom {
            formula: parse("<> (y & x)").unwrap(),
            seq: seq.clone(),
        });
        assert_eq!(
            t,
            PropFormula::strong_and(y, PropFormula::imp(boxx, PropFormula::imp(x, diayx)))
        );
        assert_eq!(subscript(&ModalFormula::Bot, &seq), PropFormula::Bot);
    }

    #[test]
    fn alpha_subscript_replaces_generators() {
        let seq = Sequence::root();
        let f = parse("y \\/ [] x").unwrap();
        assert_eq!(
            alpha_subscript(&f, &seq),
            PropFormula::weak_or(
                PropFormula::EVar(ExtVar::Alpha {
                    seq: seq.clone(),
                    gen: Generator::Var("y".into())
                }),
                PropFormula::EVar(ExtVar::Alpha {
                    seq: seq.clone(),
                    gen: Generator::Modal(parse("[] x").unwrap())
                })
            )
        );
        assert_eq!(alpha_subscript(&ModalFormula::Top, &seq), PropFormula::Top);
    }

    #[test]
    fn prop_parser_handles_delta() {
        let f = parse_prop("! p -> p").unwrap();
        let p = PropFormula::EVar(ExtVar::BaseVar {
            name: "p".into(),
            seq: Sequence::root(),
        });
        assert_eq!(f, PropFormula::imp(PropFormula::delta(p.clone()), p));
        assert!(parse_prop("[] p").is_err());
    }
}
