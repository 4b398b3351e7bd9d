//! Witness sequences, the finite universe they live in, and the coherent and
//! simple subsets that drive the reduction.
//!
//! A sequence lists modal formulas, each optionally primed; a primed box
//! records an unwitnessed necessity. The universe for a premise set is built
//! level by level, and a coherent (respectively simple) subset fixes which
//! witnesses the reduction materializes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::syntax::{self, ModalFormula, ParseError, Tok};

/// A witness sequence: the head `<0>` followed by optionally primed modal
/// formulas.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Sequence {
    entries: Vec<(ModalFormula, bool)>,
}

impl Sequence {
    /// The head sequence `<0>`.
    pub fn root() -> Self {
        Sequence::default()
    }

    pub fn from_entries(entries: Vec<(ModalFormula, bool)>) -> Self {
        Sequence { entries }
    }

    pub fn entries(&self) -> &[(ModalFormula, bool)] {
        &self.entries
    }

    /// Depth below the head; the head itself has depth 0.
    pub fn depth(&self) -> usize {
        self.entries.len()
    }

    pub fn is_root(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn child(&self, formula: ModalFormula, primed: bool) -> Sequence {
        let mut entries = self.entries.clone();
        entries.push((formula, primed));
        Sequence { entries }
    }

    pub fn parent(&self) -> Option<Sequence> {
        if self.entries.is_empty() {
            None
        } else {
            Some(Sequence {
                entries: self.entries[..self.entries.len() - 1].to_vec(),
            })
        }
    }

    pub fn last(&self) -> Option<&(ModalFormula, bool)> {
        self.entries.last()
    }

    pub fn is_prime_free(&self) -> bool {
        self.entries.iter().all(|(_, primed)| !primed)
    }

    pub fn prime_count(&self) -> usize {
        self.entries.iter().filter(|(_, primed)| *primed).count()
    }

    /// Remove the prime from the last primed entry; the identity on
    /// prime-free sequences.
    pub fn sigma_minus(&self) -> Sequence {
        let mut entries = self.entries.clone();
        for e in entries.iter_mut().rev() {
            if e.1 {
                e.1 = false;
                break;
            }
        }
        Sequence { entries }
    }

    /// Remove all primes.
    pub fn underline(&self) -> Sequence {
        Sequence {
            entries: self
                .entries
                .iter()
                .map(|(f, _)| (f.clone(), false))
                .collect(),
        }
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<0")?;
        for (formula, primed) in &self.entries {
            write!(f, ", {}", formula.word_form())?;
            if *primed {
                f.write_str("'")?;
            }
        }
        f.write_str(">")
    }
}

impl Serialize for Sequence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Sequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_sequence(&text).map_err(serde::de::Error::custom)
    }
}

/// Parse the printed form of a sequence, e.g. `<0, box(y \/ box x)', box x>`.
pub fn parse_sequence(text: &str) -> Result<Sequence, ParseError> {
    let toks = syntax::tokenize(text)?;
    let end = text.len();
    let mut pos = 0;
    let peek = |pos: usize| toks.get(pos).map(|(t, _)| t);
    let offset = |pos: usize| toks.get(pos).map(|(_, o)| *o).unwrap_or(end);
    let fail = |pos: usize, message: &str| ParseError::Syntax {
        offset: offset(pos),
        message: message.to_string(),
    };

    if peek(pos) != Some(&Tok::Lt) {
        return Err(fail(pos, "expected \"<\""));
    }
    pos += 1;
    if peek(pos) != Some(&Tok::Zero) {
        return Err(fail(pos, "expected \"0\""));
    }
    pos += 1;
    let mut entries = Vec::new();
    loop {
        match peek(pos) {
            Some(Tok::Gt) => {
                pos += 1;
                break;
            }
            Some(Tok::Comma) => pos += 1,
            _ => return Err(fail(pos, "expected \",\" or \">\"")),
        }
        let necc = match peek(pos) {
            Some(Tok::Necc) => true,
            Some(Tok::Poss) => false,
            _ => return Err(fail(pos, "expected \"box\" or \"dia\"")),
        };
        pos += 1;
        let body = match peek(pos) {
            Some(Tok::Ident(name)) => {
                let f = ModalFormula::Var(name.clone());
                pos += 1;
                f
            }
            Some(Tok::One) => {
                pos += 1;
                ModalFormula::Top
            }
            Some(Tok::Zero) => {
                pos += 1;
                ModalFormula::Bot
            }
            Some(Tok::LPar) => {
                let (f, next) = syntax::parse_formula_at(&toks, pos, end)?;
                pos = next;
                f
            }
            _ => return Err(fail(pos, "expected a modal operator body")),
        };
        let formula = if necc {
            ModalFormula::necc(body)
        } else {
            ModalFormula::poss(body)
        };
        let primed = if peek(pos) == Some(&Tok::Prime) {
            pos += 1;
            true
        } else {
            false
        };
        entries.push((formula, primed));
    }
    if pos != toks.len() {
        return Err(fail(pos, "unexpected trailing input"));
    }
    Ok(Sequence { entries })
}

fn modal_members(level: &BTreeSet<ModalFormula>) -> Vec<ModalFormula> {
    level
        .iter()
        .filter(|f| f.is_modal_headed())
        .cloned()
        .collect()
}

fn boxed_members(level: &BTreeSet<ModalFormula>) -> Vec<ModalFormula> {
    level
        .iter()
        .filter(|f| f.is_box_headed())
        .cloned()
        .collect()
}

/// The full universe of sequences for the given level sets: entries at
/// position i are modal members of level i-1, primes allowed on boxes.
pub fn sigma_universe(levels: &[BTreeSet<ModalFormula>]) -> Vec<Sequence> {
    let mut out = vec![Sequence::root()];
    let mut frontier = vec![Sequence::root()];
    let mut depth = 0;
    while !frontier.is_empty() && depth < levels.len() {
        let mut next = Vec::new();
        for seq in &frontier {
            for f in modal_members(&levels[depth]) {
                next.push(seq.child(f.clone(), false));
                if f.is_box_headed() {
                    next.push(seq.child(f, true));
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
        depth += 1;
    }
    out.sort();
    out
}

fn in_universe(seq: &Sequence, levels: &[BTreeSet<ModalFormula>]) -> bool {
    for (i, (formula, primed)) in seq.entries().iter().enumerate() {
        if i >= levels.len() || !levels[i].contains(formula) {
            return false;
        }
        if *primed && !formula.is_box_headed() {
            return false;
        }
        if !formula.is_modal_headed() {
            return false;
        }
    }
    true
}

/// Which closure discipline a set of sequences satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OmegaKind {
    Coherent,
    Simple,
}

/// A coherent or simple set of sequences.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OmegaSet {
    pub kind: OmegaKind,
    pub members: BTreeSet<Sequence>,
}

impl OmegaSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, seq: &Sequence) -> bool {
        self.members.contains(seq)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Sequence> {
        self.members.iter()
    }

    /// Members whose parent is the given sequence, in sorted order.
    pub fn children_of(&self, seq: &Sequence) -> Vec<&Sequence> {
        self.members
            .iter()
            .filter(|m| m.parent().as_ref() == Some(seq))
            .collect()
    }

    pub fn is_internal(&self, seq: &Sequence) -> bool {
        !self.children_of(seq).is_empty()
    }
}

impl fmt::Display for OmegaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", m)?;
        }
        f.write_str("}")
    }
}

/// Check the coherence conditions for a candidate member set.
pub fn is_coherent(members: &BTreeSet<Sequence>, levels: &[BTreeSet<ModalFormula>]) -> bool {
    if !members.contains(&Sequence::root()) {
        return false;
    }
    for m in members {
        if !in_universe(m, levels) {
            return false;
        }
        let Some(parent) = m.parent() else { continue };
        if !members.contains(&parent) {
            return false;
        }
        if !members.contains(&m.sigma_minus()) {
            return false;
        }
        let level = &levels[parent.depth()];
        for f in modal_members(level) {
            if !members.contains(&parent.child(f, false)) {
                return false;
            }
        }
        for f in boxed_members(level) {
            let here = members.contains(&parent.child(f.clone(), true));
            let below = members.contains(&parent.sigma_minus().child(f, true));
            if here != below {
                return false;
            }
        }
    }
    true
}

/// Check the simplicity conditions for a candidate member set.
pub fn is_simple(members: &BTreeSet<Sequence>, levels: &[BTreeSet<ModalFormula>]) -> bool {
    if !members.contains(&Sequence::root()) {
        return false;
    }
    for m in members {
        if !in_universe(m, levels) {
            return false;
        }
        let Some(parent) = m.parent() else { continue };
        if !members.contains(&parent) {
            return false;
        }
        let level = &levels[parent.depth()];
        for f in modal_members(level) {
            if f.is_box_headed() {
                let unprimed = members.contains(&parent.child(f.clone(), false));
                let primed = members.contains(&parent.child(f, true));
                if unprimed == primed {
                    return false;
                }
            } else if !members.contains(&parent.child(f, false)) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("more than {limit} sets; raise the enumeration limit")]
    BudgetExceeded { limit: usize },
}

struct Emit {
    kind: OmegaKind,
    out: Vec<OmegaSet>,
    limit: usize,
}

impl Emit {
    fn push(&mut self, members: &[Sequence]) -> Result<(), EnumerationError> {
        if self.out.len() >= self.limit {
            return Err(EnumerationError::BudgetExceeded { limit: self.limit });
        }
        self.out.push(OmegaSet {
            kind: self.kind,
            members: members.iter().cloned().collect(),
        });
        Ok(())
    }
}

fn sort_sets(mut sets: Vec<OmegaSet>) -> Vec<OmegaSet> {
    sets.sort_by_key(|s| {
        let names: Vec<String> = s.members.iter().map(|m| m.to_string()).collect();
        (s.members.len(), names)
    });
    sets
}

/// Enumerate every coherent set for the given levels, smallest first.
pub fn enumerate_coherent(
    levels: &[BTreeSet<ModalFormula>],
    limit: usize,
) -> Result<Vec<OmegaSet>, EnumerationError> {
    let mut emit = Emit {
        kind: OmegaKind::Coherent,
        out: Vec::new(),
        limit,
    };
    let mut acc = vec![Sequence::root()];
    coherent_rec(levels, 0, &[Sequence::root()], &mut acc, &mut emit)?;
    Ok(sort_sets(emit.out))
}

fn coherent_rec(
    levels: &[BTreeSet<ModalFormula>],
    depth: usize,
    frontier: &[Sequence],
    acc: &mut Vec<Sequence>,
    emit: &mut Emit,
) -> Result<(), EnumerationError> {
    if frontier.is_empty() || depth >= levels.len() {
        return emit.push(acc);
    }
    let modal = modal_members(&levels[depth]);
    let boxed = boxed_members(&levels[depth]);
    if modal.is_empty() {
        return emit.push(acc);
    }

    let mut classes: BTreeMap<Sequence, Vec<Sequence>> = BTreeMap::new();
    for seq in frontier {
        classes
            .entry(seq.underline())
            .or_default()
            .push(seq.clone());
    }

    // Per class: a downward closed set of internal members (closed under
    // removing the last prime) together with a shared set of primed children.
    let mut options: Vec<Vec<(Vec<Sequence>, Vec<ModalFormula>)>> = Vec::new();
    for members in classes.values_mut() {
        members.sort_by_key(|s| (s.prime_count(), s.clone()));
        let mut class_options = Vec::new();
        for mask in 0u32..(1 << members.len()) {
            let internal: Vec<Sequence> = members
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, s)| s.clone())
                .collect();
            let closed = internal
                .iter()
                .all(|s| s.is_prime_free() || internal.contains(&s.sigma_minus()));
            if !closed {
                continue;
            }
            if internal.is_empty() {
                class_options.push((internal, Vec::new()));
                continue;
            }
            for pmask in 0u32..(1 << boxed.len()) {
                let primed: Vec<ModalFormula> = boxed
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| pmask & (1 << i) != 0)
                    .map(|(_, f)| f.clone())
                    .collect();
                class_options.push((internal.clone(), primed));
            }
        }
        options.push(class_options);
    }

    let mut idx = vec![0usize; options.len()];
    loop {
        let mut children = Vec::new();
        for (i, class_options) in options.iter().enumerate() {
            let (internal, primed) = &class_options[idx[i]];
            for seq in internal {
                for f in &modal {
                    children.push(seq.child(f.clone(), false));
                }
                for f in primed {
                    children.push(seq.child(f.clone(), true));
                }
            }
        }
        let mark = acc.len();
        acc.extend(children.iter().cloned());
        coherent_rec(levels, depth + 1, &children, acc, emit)?;
        acc.truncate(mark);

        let mut pos = options.len();
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Enumerate every simple set for the given levels, smallest first.
pub fn enumerate_simple(
    levels: &[BTreeSet<ModalFormula>],
    limit: usize,
) -> Result<Vec<OmegaSet>, EnumerationError> {
    let mut emit = Emit {
        kind: OmegaKind::Simple,
        out: Vec::new(),
        limit,
    };
    let mut acc = vec![Sequence::root()];
    simple_rec(levels, 0, &[Sequence::root()], &mut acc, &mut emit)?;
    Ok(sort_sets(emit.out))
}

fn simple_rec(
    levels: &[BTreeSet<ModalFormula>],
    depth: usize,
    frontier: &[Sequence],
    acc: &mut Vec<Sequence>,
    emit: &mut Emit,
) -> Result<(), EnumerationError> {
    if frontier.is_empty() || depth >= levels.len() {
        return emit.push(acc);
    }
    let modal = modal_members(&levels[depth]);
    let boxed = boxed_members(&levels[depth]);
    if modal.is_empty() {
        return emit.push(acc);
    }

    // Per node: either a leaf, or internal with one choice of primed or
    // unprimed child per box.
    let mut options: Vec<Vec<Option<Vec<Sequence>>>> = Vec::new();
    for seq in frontier {
        let mut node_options: Vec<Option<Vec<Sequence>>> = vec![None];
        for pmask in 0u32..(1 << boxed.len()) {
            let mut children = Vec::new();
            for f in &modal {
                if !f.is_box_headed() {
                    children.push(seq.child(f.clone(), false));
                }
            }
            for (i, f) in boxed.iter().enumerate() {
                children.push(seq.child(f.clone(), pmask & (1 << i) != 0));
            }
            node_options.push(Some(children));
        }
        options.push(node_options);
    }

    let mut idx = vec![0usize; options.len()];
    loop {
        let mut children = Vec::new();
        for (i, node_options) in options.iter().enumerate() {
            if let Some(cs) = &node_options[idx[i]] {
                children.extend(cs.iter().cloned());
            }
        }
        let mark = acc.len();
        acc.extend(children.iter().cloned());
        simple_rec(levels, depth + 1, &children, acc, emit)?;
        acc.truncate(mark);

        let mut pos = options.len();
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Reference enumeration by filtering all subsets of the universe; only
/// usable for small universes.
pub fn coherent_sets_by_filter(levels: &[BTreeSet<ModalFormula>]) -> Vec<OmegaSet> {
    sets_by_filter(levels, OmegaKind::Coherent)
}

/// Reference enumeration of simple sets by subset filtering.
pub fn simple_sets_by_filter(levels: &[BTreeSet<ModalFormula>]) -> Vec<OmegaSet> {
    sets_by_filter(levels, OmegaKind::Simple)
}

fn sets_by_filter(levels: &[BTreeSet<ModalFormula>], kind: OmegaKind) -> Vec<OmegaSet> {
    let universe = sigma_universe(levels);
    assert!(
        universe.len() <= 20,
        "universe too large for subset filtering"
    );
    let mut out = Vec::new();
    for mask in 0u64..(1 << universe.len()) {
        let members: BTreeSet<Sequence> = universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, s)| s.clone())
            .collect();
        let ok = match kind {
            OmegaKind::Coherent => is_coherent(&members, levels),
            OmegaKind::Simple => is_simple(&members, levels),
        };
        if ok {
            out.push(OmegaSet { kind, members });
        }
    }
    sort_sets(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{levels, parse};

    fn upsilon(items: &[&str]) -> Vec<BTreeSet<ModalFormula>> {
        levels(&items.iter().map(|s| parse(s).unwrap()).collect())
    }

    fn seq(text: &str) -> Sequence {
        parse_sequence(text).unwrap()
    }

    #[test]
    fn display_and_parse_round_trip() {
        for text in [
            "<0>",
            "<0, box p>",
            "<0, box p'>",
            "<0, dia(dia y)>",
            "<0, box(y \\/ box x)', box x'>",
            "<0, box(y \\/ box x), dia y>",
            "<0, dia 1>",
        ] {
            let s = seq(text);
            assert_eq!(s.to_string(), text);
            assert_eq!(parse_sequence(&s.to_string()).unwrap(), s);
        }
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(parse_sequence("<0, p>").is_err());
        assert!(parse_sequence("<0 box p>").is_err());
        assert!(parse_sequence("<0, box p> x").is_err());
        assert!(parse_sequence("0, box p>").is_err());
    }

    #[test]
    fn sigma_minus_and_underline() {
        let s = seq("<0, box(y \\/ box x)', box x'>");
        assert_eq!(s.sigma_minus(), seq("<0, box(y \\/ box x)', box x>"));
        assert_eq!(
            s.sigma_minus().sigma_minus(),
            seq("<0, box(y \\/ box x), box x>")
        );
        assert_eq!(s.underline(), seq("<0, box(y \\/ box x), box x>"));
        let free = seq("<0, box p>");
        assert_eq!(free.sigma_minus(), free);
        assert!(free.is_prime_free());
        assert!(!s.is_prime_free());
        assert_eq!(s.prime_count(), 2);
        assert_eq!(s.depth(), 2);
    }

    #[test]
    fn universe_of_running_example() {
        let ls = upsilon(&["[](y \\/ [] x)", "<><>y"]);
        let uni = sigma_universe(&ls);
        assert_eq!(uni.len(), 13);
        assert!(uni.contains(&seq("<0>")));
        assert!(uni.contains(&seq("<0, box(y \\/ box x)'>")));
        assert!(uni.contains(&seq("<0, dia(dia y), box x'>")));
        assert!(!uni.contains(&seq("<0, dia(dia y)'>")));
    }

    #[test]
    fn universe_of_box_p() {
        let ls = upsilon(&["[] p"]);
        let uni = sigma_universe(&ls);
        assert_eq!(uni, vec![seq("<0>"), seq("<0, box p>"), seq("<0, box p'>")]);
    }

    #[test]
    fn example_coherent_set() {
        let ls = upsilon(&["[](y \\/ [] x)", "<><>y"]);
        let members: BTreeSet<Sequence> = [
            "<0>",
            "<0, dia(dia y)>",
            "<0, box(y \\/ box x)>",
            "<0, box(y \\/ box x)'>",
            "<0, dia(dia y), dia y>",
            "<0, dia(dia y), box x>",
            "<0, box(y \\/ box x), dia y>",
            "<0, box(y \\/ box x), box x>",
            "<0, box(y \\/ box x), box x'>",
            "<0, box(y \\/ box x)', dia y>",
            "<0, box(y \\/ box x)', box x>",
            "<0, box(y \\/ box x)', box x'>",
        ]
        .iter()
        .map(|s| seq(s))
        .collect();
        assert_eq!(members.len(), 12);
        assert!(is_coherent(&members, &ls));

        let mut broken = members.clone();
        broken.remove(&seq("<0, dia(dia y)>"));
        assert!(!is_coherent(&broken, &ls));
    }

    #[test]
    fn coherent_enumeration_matches_filter() {
        for items in [
            vec!["[] p"],
            vec!["<> p"],
            vec!["[] p", "<> q"],
            vec!["[] <> p"],
            vec!["<> p -> [] q"],
        ] {
            let ls = upsilon(&items);
            let fast = enumerate_coherent(&ls, 1_000_000).unwrap();
            let slow = coherent_sets_by_filter(&ls);
            assert_eq!(fast, slow, "mismatch for {items:?}");
        }
    }

    #[test]
    fn simple_enumeration_matches_filter() {
        for items in [
            vec!["[] p"],
            vec!["<> p"],
            vec!["[] p", "<> q"],
            vec!["[] <> p"],
            vec!["<> p -> [] q"],
        ] {
            let ls = upsilon(&items);
            let fast = enumerate_simple(&ls, 1_000_000).unwrap();
            let slow = simple_sets_by_filter(&ls);
            assert_eq!(fast, slow, "mismatch for {items:?}");
        }
    }

    #[test]
    fn coherent_counts() {
        assert_eq!(
            enumerate_coherent(&upsilon(&["[] p"]), 1_000_000)
                .unwrap()
                .len(),
            3
        );
        assert_eq!(
            enumerate_coherent(&upsilon(&["<> p"]), 1_000_000)
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn simple_sets_pick_one_box_child() {
        let ls = upsilon(&["[] p"]);
        let sets = enumerate_simple(&ls, 1_000_000).unwrap();
        assert_eq!(sets.len(), 3);
        for s in &sets {
            let both = s.contains(&seq("<0, box p>")) && s.contains(&seq("<0, box p'>"));
            assert!(!both);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let ls = upsilon(&["[] p", "<> q"]);
        assert_eq!(
            enumerate_coherent(&ls, 2),
            Err(EnumerationError::BudgetExceeded { limit: 2 })
        );
    }

    #[test]
    fn children_and_internal() {
        let ls = upsilon(&["[] p"]);
        let sets = enumerate_coherent(&ls, 1_000_000).unwrap();
        let full = sets.iter().find(|s| s.len() == 3).unwrap();
        assert!(full.is_internal(&seq("<0>")));
        assert!(!full.is_internal(&seq("<0, box p>")));
        assert_eq!(
            full.children_of(&seq("<0>")),
            vec![&seq("<0, box p>"), &seq("<0, box p'>")]
        );
    }
}
