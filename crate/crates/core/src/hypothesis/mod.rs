//! Finite hypothesis classes over the domain `[N] = {1, ..., N}`.
//!
//! A [`Hypothesis`] is an explicit label vector; a [`HypothesisClass`] keeps,
//! next to its members, one [`MemberSet`] column per domain point so that
//! version-space restrictions are plain bitwise operations.

mod io;
mod ldim;
mod tree;
mod tuple;

use std::fmt;

use crate::error::{invalid, Result};

pub use io::{ClassFile, MemberRecord};
pub use ldim::{littlestone_dimension, littlestone_dimension_with, LdimSolver, SearchBudget};
pub use tree::{is_shattered, MistakeTree};
pub use tuple::{find_distinguishing_tuple, is_distinguishing, DistinguishingTuple, TupleSummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    size: usize,
}

impl Domain {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(invalid("domain size must be at least 1"));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, x: usize) -> bool {
        (1..=self.size).contains(&x)
    }

    pub fn check(&self, x: usize) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(invalid(format!("point {x} outside domain [1, {}]", self.size)))
        }
    }

    pub fn points(&self) -> impl Iterator<Item = usize> {
        1..=self.size
    }
}

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// A boolean function on `[N]`, stored as a packed label vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    words: Vec<u64>,
    len: usize,
    name: Option<String>,
}

impl Hypothesis {
    pub fn zeros(n: usize) -> Self {
        Self {
            words: vec![0; words_for(n)],
            len: n,
            name: None,
        }
    }

    /// The indicator `I{· = i}` over `[n]`.
    pub fn indicator(n: usize, i: usize) -> Self {
        let mut h = Self::zeros(n);
        h.set(i, true);
        h.name = Some(format!("f{i}"));
        h
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut h = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            h.set(i + 1, b);
        }
        h
    }

    pub(crate) fn from_words(words: Vec<u64>, len: usize) -> Self {
        Self { words, len, name: None }
    }

    /// Parses a bit string whose first character is point 1.
    pub fn parse_bits(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(invalid(format!("bad bit character {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(invalid("empty bit string"));
        }
        Ok(Self::from_bits(&bits))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `h(x)` for `x` in `[1, len]`.
    #[inline]
    pub fn eval(&self, x: usize) -> bool {
        debug_assert!(x >= 1 && x <= self.len, "point {x} out of range");
        let i = x - 1;
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, x: usize, value: bool) {
        let i = x - 1;
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Points labeled 1, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                (rest != 0).then(|| {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    i * 64 + b + 1
                })
            })
        })
    }

    pub fn complement(&self) -> Self {
        let mut h = Self::zeros(self.len);
        for x in 1..=self.len {
            h.set(x, !self.eval(x));
        }
        h
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bit_string(&self) -> String {
        (1..=self.len)
            .map(|x| if self.eval(x) { '1' } else { '0' })
            .collect()
    }

    /// Same labels, ignoring names.
    pub fn same_labels(&self, other: &Self) -> bool {
        self.len == other.len && self.words == other.words
    }

    pub fn label(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => self.bit_string(),
        }
    }
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => write!(f, "{n}[{}]", self.bit_string()),
            None => write!(f, "[{}]", self.bit_string()),
        }
    }
}

/// A subset of a class's members, as a bitset over member indices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MemberSet {
    words: Vec<u64>,
}

impl MemberSet {
    pub fn empty(n: usize) -> Self {
        Self { words: vec![0; words_for(n)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn and(&self, other: &Self) -> Self {
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn and_not(&self, other: &Self) -> Self {
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }
}

#[derive(Clone, Debug)]
pub struct HypothesisClass {
    domain: Domain,
    members: Vec<Hypothesis>,
    /// `ones[x - 1]` = members with `h(x) = 1`.
    ones: Vec<MemberSet>,
}

impl HypothesisClass {
    pub fn new(domain: Domain, members: Vec<Hypothesis>) -> Result<Self> {
        if members.is_empty() {
            return Err(invalid("hypothesis class must have at least one member"));
        }
        for (i, h) in members.iter().enumerate() {
            if h.len() != domain.size() {
                return Err(invalid(format!(
                    "member {i} has {} labels, domain has {} points",
                    h.len(),
                    domain.size()
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (i, h) in members.iter().enumerate() {
            if !seen.insert(h.words().to_vec()) {
                return Err(invalid(format!("duplicate label vector at member {i}")));
            }
        }
        let mut ones = vec![MemberSet::empty(members.len()); domain.size()];
        for (i, h) in members.iter().enumerate() {
            for x in domain.points() {
                if h.eval(x) {
                    ones[x - 1].insert(i);
                }
            }
        }
        Ok(Self { domain, members, ones })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn domain_size(&self) -> usize {
        self.domain.size()
    }

    pub fn members(&self) -> &[Hypothesis] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, i: usize) -> &Hypothesis {
        &self.members[i]
    }

    pub fn index_of(&self, h: &Hypothesis) -> Option<usize> {
        self.members.iter().position(|m| m.same_labels(h))
    }

    pub fn by_name(&self, name: &str) -> Option<&Hypothesis> {
        self.members.iter().find(|m| m.name() == Some(name))
    }

    pub fn all(&self) -> MemberSet {
        MemberSet::full(self.len())
    }

    /// Members of `set` with `h(x) = y`.
    pub fn restrict(&self, set: &MemberSet, x: usize, y: bool) -> MemberSet {
        let col = &self.ones[x - 1];
        if y {
            set.and(col)
        } else {
            set.and_not(col)
        }
    }

    /// Members of `set` with `h(x) = 1`, counted without allocating.
    pub(crate) fn count_ones_at(&self, set: &MemberSet, x: usize) -> usize {
        set.words
            .iter()
            .zip(&self.ones[x - 1].words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
}

/// `POINT_N`: the `N` indicator functions `f^(i)(x) = I{i = x}`.
pub fn make_point_class(n: usize) -> Result<HypothesisClass> {
    if n == 0 {
        return Err(invalid("POINT_N needs N >= 1"));
    }
    let domain = Domain::new(n)?;
    HypothesisClass::new(domain, (1..=n).map(|i| Hypothesis::indicator(n, i)).collect())
}

/// `POINT^K_N`: every labelling of `[N]` with at most `K` ones, ordered by
/// weight and then lexicographically by support.
pub fn make_multipoint_class(n: usize, k: usize) -> Result<HypothesisClass> {
    if n == 0 || k == 0 {
        return Err(invalid("POINT^K_N needs N >= 1 and K >= 1"));
    }
    if k > n {
        return Err(invalid(format!("K = {k} exceeds N = {n}")));
    }
    let domain = Domain::new(n)?;
    let mut members = Vec::new();
    for weight in 0..=k {
        let mut support: Vec<usize> = (1..=weight).collect();
        loop {
            let mut h = Hypothesis::zeros(n);
            for &x in &support {
                h.set(x, true);
            }
            let name = if support.is_empty() {
                "zero".to_string()
            } else {
                let parts: Vec<String> = support.iter().map(|x| x.to_string()).collect();
                format!("f{{{}}}", parts.join(","))
            };
            members.push(h.with_name(name));
            if !next_combination(&mut support, n) {
                break;
            }
        }
    }
    HypothesisClass::new(domain, members)
}

/// Advances a sorted k-subset of `[n]` to its lexicographic successor.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - (k - 1 - i) {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Every labelling of `[n]`, i.e. `POINT^n_n`.
pub fn make_full_cube(n: usize) -> Result<HypothesisClass> {
    make_multipoint_class(n, n)
}
