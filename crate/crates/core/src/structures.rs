//! Signatures, finite relational structures, and partial maps between them.
//!
//! Elements of a structure of size `n` are the integers `0..n`. Signatures are
//! purely relational with built-in equality; every relation has arity at least one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, ParseError, ParseErrorKind};

/// Dense membership bitmaps are built for tables with at most this many cells.
const DENSE_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

/// The ordered list of relation symbols shared by two structures.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    relations: Vec<RelationSymbol>,
}

impl Signature {
    pub fn new<I, S>(relations: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut sig = Signature::default();
        for (name, arity) in relations {
            sig.push(name.into(), arity)?;
        }
        Ok(sig)
    }

    fn push(&mut self, name: String, arity: usize) -> Result<(), Error> {
        if arity == 0 {
            return Err(Error::ZeroArity(name));
        }
        if self.index_of(&name).is_some() {
            return Err(Error::DuplicateRelation(name));
        }
        self.relations.push(RelationSymbol { name, arity });
        Ok(())
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.index_of(name).map(|i| self.relations[i].arity)
    }
}

/// The interpretation of one relation symbol: a duplicate-free set of tuples.
#[derive(Debug, Clone)]
pub struct Table {
    arity: usize,
    tuples: BTreeSet<Vec<usize>>,
    dense: Option<Vec<u64>>,
    size: usize,
}

impl Table {
    fn new(arity: usize, size: usize, tuples: BTreeSet<Vec<usize>>) -> Self {
        let cells = size.checked_pow(arity as u32).filter(|&c| c <= DENSE_LIMIT);
        let dense = cells.map(|cells| {
            let mut bits = vec![0u64; cells.div_ceil(64)];
            for t in &tuples {
                let i = dense_index(size, t);
                bits[i / 64] |= 1 << (i % 64);
            }
            bits
        });
        Table {
            arity,
            tuples,
            dense,
            size,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &BTreeSet<Vec<usize>> {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Membership test. The tuple must have the table's arity and in-range entries.
    #[inline]
    pub fn contains(&self, tuple: &[usize]) -> bool {
        debug_assert_eq!(tuple.len(), self.arity);
        match &self.dense {
            Some(bits) => {
                let i = dense_index(self.size, tuple);
                bits[i / 64] >> (i % 64) & 1 == 1
            }
            None => self.tuples.contains(tuple),
        }
    }
}

impl PartialEq for Table {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.tuples == other.tuples
    }
}

impl Eq for Table {}

#[inline]
fn dense_index(size: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &e| acc * size + e)
}

/// A finite relational structure over the universe `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    name: String,
    sig: Signature,
    size: usize,
    tables: Vec<Table>,
}

impl Structure {
    /// Builds a validated structure. `tables[i]` interprets `sig.relations()[i]`.
    pub fn new(
        name: impl Into<String>,
        sig: Signature,
        size: usize,
        tables: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self, Error> {
        if size == 0 {
            return Err(Error::EmptyUniverse);
        }
        if tables.len() != sig.len() {
            return Err(Error::TableCount {
                expected: sig.len(),
                found: tables.len(),
            });
        }
        let mut built = Vec::with_capacity(tables.len());
        for (symbol, rows) in sig.relations.iter().zip(tables) {
            let mut set = BTreeSet::new();
            for row in rows {
                if row.len() != symbol.arity {
                    return Err(Error::ArityMismatch {
                        relation: symbol.name.clone(),
                        expected: symbol.arity,
                        found: row.len(),
                    });
                }
                if let Some(&e) = row.iter().find(|&&e| e >= size) {
                    return Err(Error::ElementOutOfRange { element: e, size });
                }
                set.insert(row);
            }
            built.push(Table::new(symbol.arity, size, set));
        }
        Ok(Structure {
            name: name.into(),
            sig,
            size,
            tables: built,
        })
    }

    /// The strict linear order `0 < 1 < ... < size-1` under the relation `<`.
    pub fn linear_order(size: usize) -> Result<Self, Error> {
        let sig = Signature::new([("<", 2)])?;
        let rows = (0..size).flat_map(|i| (i + 1..size).map(move |j| vec![i, j])).collect();
        Structure::new(format!("L{size}"), sig, size, vec![rows])
    }

    /// An undirected cycle on `size` vertices under the symmetric relation `E`.
    pub fn cycle(size: usize) -> Result<Self, Error> {
        let edges = (0..size).map(|i| (i, (i + 1) % size)).collect::<Vec<_>>();
        Self::undirected(format!("C{size}"), size, edges)
    }

    /// An undirected path on `size` vertices under the symmetric relation `E`.
    pub fn path(size: usize) -> Result<Self, Error> {
        let edges = (1..size).map(|i| (i - 1, i)).collect::<Vec<_>>();
        Self::undirected(format!("P{size}"), size, edges)
    }

    fn undirected(name: String, size: usize, edges: Vec<(usize, usize)>) -> Result<Self, Error> {
        let sig = Signature::new([("E", 2)])?;
        let rows = edges
            .into_iter()
            .filter(|(u, v)| u != v)
            .flat_map(|(u, v)| [vec![u, v], vec![v, u]])
            .collect();
        Structure::new(name, sig, size, vec![rows])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn table(&self, index: usize) -> &Table {
        &self.tables[index]
    }

    pub fn table_by_name(&self, name: &str) -> Option<&Table> {
        self.sig.index_of(name).map(|i| &self.tables[i])
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    /// Renders the structure in the line-based file format accepted by [`parse_structure`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "structure {}", self.name).unwrap();
        writeln!(out, "universe {}", self.size).unwrap();
        for (symbol, table) in self.sig.relations.iter().zip(&self.tables) {
            writeln!(out, "relation {} {}", symbol.name, symbol.arity).unwrap();
            for t in &table.tuples {
                let row: Vec<String> = t.iter().map(|e| e.to_string()).collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
            out.push_str("end\n");
        }
        out
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl std::str::FromStr for Structure {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_structure(s)
    }
}

/// Whether two structures share the same ordered list of relation symbols.
pub fn same_signature(a: &Structure, b: &Structure) -> bool {
    a.sig == b.sig
}

pub(crate) fn check_signatures(a: &Structure, b: &Structure) -> Result<(), Error> {
    if same_signature(a, b) {
        Ok(())
    } else {
        Err(Error::SignatureMismatch)
    }
}

fn is_name_token(tok: &str) -> bool {
    !tok.is_empty() && !tok.contains(['(', ')', '#'])
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in content.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                tokens.push(Token {
                    text: &content[s..i],
                    column: content[..s].chars().count() + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &content[s..],
            column: content[..s].chars().count() + 1,
        });
    }
    tokens
}

/// Parses one structure from the line-based text format:
///
/// ```text
/// structure <name>
/// universe <size>
/// relation <name> <arity>
/// <e1> ... <e_arity>
/// end
/// ```
///
/// `#` starts a comment; blank lines are ignored. Repeated tuple lines collapse.
pub fn parse_structure(text: &str) -> Result<Structure, ParseError> {
    let err = |line: usize, column: usize, kind: ParseErrorKind| ParseError { line, column, kind };
    let syntax = |line: usize, column: usize, msg: String| err(line, column, ParseErrorKind::Syntax(msg));

    enum State {
        Name,
        Universe,
        Relations,
        Tuples,
    }

    let mut state = State::Name;
    let mut name = String::new();
    let mut size = 0usize;
    let mut sig = Signature::default();
    let mut tables: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let head = &tokens[0];
        let expect_len = |n: usize, what: &str| {
            if tokens.len() == n {
                Ok(())
            } else {
                let col = tokens.get(n).map_or(head.column, |t| t.column);
                Err(syntax(line_no, col, format!("expected `{what}`")))
            }
        };
        match state {
            State::Name => {
                if head.text != "structure" {
                    return Err(syntax(line_no, head.column, "expected `structure <name>`".into()));
                }
                expect_len(2, "structure <name>")?;
                if !is_name_token(tokens[1].text) {
                    return Err(syntax(line_no, tokens[1].column, "invalid structure name".into()));
                }
                name = tokens[1].text.to_string();
                state = State::Universe;
            }
            State::Universe => {
                if head.text != "universe" {
                    return Err(syntax(line_no, head.column, "expected `universe <size>`".into()));
                }
                expect_len(2, "universe <size>")?;
                size = tokens[1].text.parse().map_err(|_| {
                    syntax(
                        line_no,
                        tokens[1].column,
                        format!("invalid universe size `{}`", tokens[1].text),
                    )
                })?;
                if size == 0 {
                    return Err(err(line_no, tokens[1].column, ParseErrorKind::EmptyUniverse));
                }
                state = State::Relations;
            }
            State::Relations => {
                if head.text != "relation" {
                    return Err(syntax(
                        line_no,
                        head.column,
                        "expected `relation <name> <arity>`".into(),
                    ));
                }
                expect_len(3, "relation <name> <arity>")?;
                let rel = tokens[1].text;
                if !is_name_token(rel) {
                    return Err(syntax(line_no, tokens[1].column, "invalid relation name".into()));
                }
                let arity: usize = tokens[2]
                    .text
                    .parse()
                    .map_err(|_| syntax(line_no, tokens[2].column, format!("invalid arity `{}`", tokens[2].text)))?;
                match sig.push(rel.to_string(), arity) {
                    Ok(()) => {}
                    Err(Error::ZeroArity(r)) => {
                        return Err(err(line_no, tokens[2].column, ParseErrorKind::ZeroArity(r)))
                    }
                    Err(_) => {
                        return Err(err(
                            line_no,
                            tokens[1].column,
                            ParseErrorKind::DuplicateRelation(rel.to_string()),
                        ))
                    }
                }
                tables.push(Vec::new());
                state = State::Tuples;
            }
            State::Tuples => {
                if head.text == "end" {
                    expect_len(1, "end")?;
                    state = State::Relations;
                    continue;
                }
                let symbol = sig.relations.last().expect("relation block open");
                let mut row = Vec::with_capacity(tokens.len());
                for tok in &tokens {
                    let e: usize = tok.text.parse().map_err(|_| {
                        syntax(
                            line_no,
                            tok.column,
                            format!("expected element id or `end`, found `{}`", tok.text),
                        )
                    })?;
                    if e >= size {
                        return Err(err(
                            line_no,
                            tok.column,
                            ParseErrorKind::ElementOutOfRange { element: e, size },
                        ));
                    }
                    row.push(e);
                }
                if row.len() != symbol.arity {
                    return Err(err(
                        line_no,
                        head.column,
                        ParseErrorKind::ArityMismatch {
                            relation: symbol.name.clone(),
                            expected: symbol.arity,
                            found: row.len(),
                        },
                    ));
                }
                tables.last_mut().unwrap().push(row);
            }
        }
    }

    let eof = last_line + 1;
    match state {
        State::Name => Err(syntax(eof, 1, "missing `structure <name>`".into())),
        State::Universe => Err(syntax(eof, 1, "missing `universe <size>`".into())),
        State::Tuples => Err(syntax(eof, 1, "unterminated relation block, expected `end`".into())),
        State::Relations => Ok(Structure::new(name, sig, size, tables).expect("validated while parsing")),
    }
}

/// Restricts `a` to `elems`, renumbering kept elements in ascending original order.
///
/// Returns the substructure together with the map from new ids to original ids.
pub fn induced_substructure(a: &Structure, elems: &BTreeSet<usize>) -> Result<(Structure, Vec<usize>), Error> {
    if elems.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&e) = elems.iter().find(|&&e| e >= a.size) {
        return Err(Error::ElementOutOfRange {
            element: e,
            size: a.size,
        });
    }
    let renumber: BTreeMap<usize, usize> = elems.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let tables = a
        .tables
        .iter()
        .map(|t| {
            t.tuples
                .iter()
                .filter_map(|row| row.iter().map(|e| renumber.get(e).copied()).collect::<Option<Vec<_>>>())
                .collect()
        })
        .collect();
    let sub = Structure::new(a.name.clone(), a.sig.clone(), elems.len(), tables)?;
    Ok((sub, elems.iter().copied().collect()))
}

/// A finite list of picks `(a, b)` with `a` in the left structure and `b` in the right.
///
/// List order is pick order; repeated identical pairs are allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PartialMap {
    pairs: Vec<(usize, usize)>,
}

impl PartialMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        PartialMap {
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn push(&mut self, a: usize, b: usize) {
        self.pairs.push((a, b));
    }

    pub fn extended(&self, a: usize, b: usize) -> Self {
        let mut m = self.clone();
        m.push(a, b);
        m
    }

    pub fn inverse(&self) -> Self {
        PartialMap::from_pairs(self.pairs.iter().map(|&(a, b)| (b, a)))
    }

    /// The sorted, deduplicated pair set; pick order and repeats are forgotten.
    pub fn canonical(&self) -> Vec<(usize, usize)> {
        let mut set = self.pairs.clone();
        set.sort_unstable();
        set.dedup();
        set
    }

    /// No element is sent to two targets and no target has two sources.
    pub fn is_consistent(&self) -> bool {
        let set = self.canonical();
        let mut targets: Vec<usize> = set.iter().map(|p| p.1).collect();
        targets.sort_unstable();
        let injective = targets.windows(2).all(|w| w[0] != w[1]);
        let functional = set.windows(2).all(|w| w[0].0 != w[1].0);
        functional && injective
    }

    pub fn domain(&self) -> BTreeSet<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn range(&self) -> BTreeSet<usize> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

impl fmt::Display for PartialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('[')?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        f.write_char(']')
    }
}

/// Whether `m` is injective, functional, and preserves and reflects every relation on its domain.
pub fn is_partial_isomorphism(a: &Structure, b: &Structure, m: &PartialMap) -> Result<bool, Error> {
    check_signatures(a, b)?;
    for &(x, y) in &m.pairs {
        if x >= a.size {
            return Err(Error::ElementOutOfRange {
                element: x,
                size: a.size,
            });
        }
        if y >= b.size {
            return Err(Error::ElementOutOfRange {
                element: y,
                size: b.size,
            });
        }
    }
    if !m.is_consistent() {
        return Ok(false);
    }
    let pairs = m.canonical();
    Ok(relations_agree(a, b, &pairs, None))
}

/// Checks that every relation agrees on tuples drawn from `pairs`. When `pivot` is set, only
/// tuples mentioning that pair index are checked.
pub(crate) fn relations_agree(a: &Structure, b: &Structure, pairs: &[(usize, usize)], pivot: Option<usize>) -> bool {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (ta, tb) in a.tables.iter().zip(&b.tables) {
        left.clear();
        right.clear();
        left.resize(ta.arity, 0);
        right.resize(ta.arity, 0);
        if !agree_rec(ta, tb, pairs, pivot, 0, false, &mut left, &mut right) {
            return false;
        }
    }
    true
}

#[allow(clippy::too_many_arguments)]
fn agree_rec(
    ta: &Table,
    tb: &Table,
    pairs: &[(usize, usize)],
    pivot: Option<usize>,
    pos: usize,
    hit: bool,
    left: &mut Vec<usize>,
    right: &mut Vec<usize>,
) -> bool {
    if pos == ta.arity {
        if pivot.is_some() && !hit {
            return true;
        }
        return ta.contains(left) == tb.contains(right);
    }
    for (i, &(x, y)) in pairs.iter().enumerate() {
        left[pos] = x;
        right[pos] = y;
        if !agree_rec(ta, tb, pairs, pivot, pos + 1, hit || pivot == Some(i), left, right) {
            return false;
        }
    }
    true
}
