//! Subshifts of finite type, words and eventually periodic points.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u8;

/// A finite sequence of symbols. Admissibility is relative to an [`Sft`] and
/// checked with [`Sft::is_admissible`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    /// Parses a string of decimal digits, one symbol per character.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as Symbol)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad symbol `{c}` in word `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn concat(parts: &[&[Symbol]]) -> Self {
        Word(parts.iter().flat_map(|p| p.iter().copied()).collect())
    }
}

impl Deref for Word {
    type Target = [Symbol];
    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<&[Symbol]> for Word {
    fn from(s: &[Symbol]) -> Self {
        Word(s.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_symbols(&self.0, f)
    }
}

fn fmt_symbols(s: &[Symbol], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if s.iter().all(|&c| c < 10) {
        for c in s {
            write!(f, "{c}")?;
        }
        Ok(())
    } else {
        let parts: Vec<String> = s.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// A nonempty word read cyclically; it stands for the periodic point that
/// repeats it, with coordinate 0 at the first symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PeriodicWord(Vec<Symbol>);

impl PeriodicWord {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidArgument("periodic word must be nonempty".into()));
        }
        Ok(PeriodicWord(symbols))
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn minimal_period(&self) -> usize {
        let n = self.0.len();
        (1..=n)
            .find(|&p| n.is_multiple_of(p) && (p..n).all(|i| self.0[i] == self.0[i - p]))
            .unwrap_or(n)
    }

    pub fn is_primitive(&self) -> bool {
        self.minimal_period() == self.0.len()
    }

    /// The lexicographically least rotation.
    pub fn canonical_rotation(&self) -> PeriodicWord {
        let n = self.0.len();
        let best = (0..n)
            .min_by(|&a, &b| {
                (0..n)
                    .map(|i| self.0[(a + i) % n])
                    .cmp((0..n).map(|i| self.0[(b + i) % n]))
            })
            .unwrap_or(0);
        self.rotate(best)
    }

    pub fn rotate(&self, k: usize) -> PeriodicWord {
        let n = self.0.len();
        PeriodicWord((0..n).map(|i| self.0[(k + i) % n]).collect())
    }

    pub fn as_word(&self) -> Word {
        Word(self.0.clone())
    }
}

impl fmt::Display for PeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_symbols(&self.0, f)
    }
}

/// A primitive subshift of finite type on `q` symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sft {
    q: usize,
    adj: Vec<bool>,
    mixing: usize,
}

impl Sft {
    pub fn new(adjacency: &[Vec<bool>]) -> Result<Self> {
        let q = adjacency.len();
        if q == 0 {
            return Err(Error::InvalidAdjacency("empty alphabet".into()));
        }
        if q > 256 {
            return Err(Error::InvalidAdjacency("at most 256 symbols are supported".into()));
        }
        if let Some(i) = adjacency.iter().position(|r| r.len() != q) {
            return Err(Error::InvalidAdjacency(format!("row {i} has length {} (expected {q})", adjacency[i].len())));
        }
        let adj: Vec<bool> = adjacency.iter().flatten().copied().collect();
        for i in 0..q {
            if !(0..q).any(|j| adj[i * q + j]) {
                return Err(Error::InvalidAdjacency(format!("row {i} is zero")));
            }
            if !(0..q).any(|j| adj[j * q + i]) {
                return Err(Error::InvalidAdjacency(format!("column {i} is zero")));
            }
        }
        let mixing = mixing_rate_of(q, &adj).ok_or(Error::NotPrimitive)?;
        Ok(Sft { q, adj, mixing })
    }

    pub fn from_01(rows: &[Vec<u8>]) -> Result<Self> {
        let b: Vec<Vec<bool>> = rows.iter().map(|r| r.iter().map(|&v| v != 0).collect()).collect();
        Sft::new(&b)
    }

    pub fn full_shift(q: usize) -> Self {
        Sft::new(&vec![vec![true; q]; q]).expect("full shift is primitive")
    }

    /// The shift on {0,1} forbidding the word `11`.
    pub fn golden_mean() -> Self {
        Sft::new(&[vec![true, true], vec![true, false]]).expect("golden mean shift is primitive")
    }

    pub fn alphabet_size(&self) -> usize {
        self.q
    }

    pub fn allowed(&self, a: Symbol, b: Symbol) -> bool {
        (a as usize) < self.q && (b as usize) < self.q && self.adj[a as usize * self.q + b as usize]
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        self.adj.chunks(self.q).map(|r| r.to_vec()).collect()
    }

    /// The least `M` with `T^M` entrywise positive.
    pub fn mixing_rate(&self) -> usize {
        self.mixing
    }

    /// The shift with the transposed adjacency matrix (time reversal).
    pub fn transpose(&self) -> Sft {
        let q = self.q;
        let adj = (0..q * q).map(|k| self.adj[(k % q) * q + k / q]).collect();
        Sft { q, adj, mixing: self.mixing }
    }

    pub fn is_admissible(&self, w: &[Symbol]) -> bool {
        w.iter().all(|&s| (s as usize) < self.q) && w.windows(2).all(|p| self.allowed(p[0], p[1]))
    }

    pub fn is_admissible_cycle(&self, w: &[Symbol]) -> bool {
        !w.is_empty() && self.is_admissible(w) && self.allowed(w[w.len() - 1], w[0])
    }

    pub fn check_word(&self, w: &[Symbol]) -> Result<()> {
        if self.is_admissible(w) {
            Ok(())
        } else {
            Err(Error::InadmissibleWord(Word(w.to_vec()).to_string()))
        }
    }

    /// Symbols `a` with `T[a][a] = 1`, i.e. fixed points of the shift.
    pub fn fixed_symbols(&self) -> Vec<Symbol> {
        (0..self.q).filter(|&a| self.adj[a * self.q + a]).map(|a| a as Symbol).collect()
    }

    /// The lexicographically least word `u` of length `len` with `a·u·b`
    /// admissible, if any.
    pub fn bridge(&self, a: Symbol, b: Symbol, len: usize) -> Option<Word> {
        let q = self.q;
        if a as usize >= q || b as usize >= q {
            return None;
        }
        // reach[j][s]: symbol s at position j (1-based inside u) can still reach b.
        let mut reach = vec![vec![false; q]; len + 2];
        reach[len + 1][b as usize] = true;
        for j in (1..=len).rev() {
            for s in 0..q {
                reach[j][s] = (0..q).any(|t| reach[j + 1][t] && self.adj[s * q + t]);
            }
        }
        let mut prev = a as usize;
        let mut out = Vec::with_capacity(len);
        for j in 1..=len + 1 {
            let next = (0..q).find(|&s| reach[j][s] && self.adj[prev * q + s])?;
            if j <= len {
                out.push(next as Symbol);
            }
            prev = next;
        }
        Some(Word(out))
    }

    /// The shortest (then lexicographically least) bridge from `a` to `b`.
    pub fn shortest_bridge(&self, a: Symbol, b: Symbol) -> Word {
        (0..=self.mixing)
            .find_map(|n| self.bridge(a, b, n))
            .expect("primitive shift has bridges of length mixing_rate")
    }

    /// All admissible cycles of length `n` in lexicographic order.
    pub fn enumerate_periodic(&self, n: usize) -> Vec<PeriodicWord> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        self.for_each_word(n, |w| {
            if self.allowed(w[n - 1], w[0]) {
                out.push(PeriodicWord(w.to_vec()));
            }
        });
        out
    }

    /// All admissible words of length `n` in lexicographic order.
    pub fn words(&self, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        self.for_each_word(n, |w| out.push(Word(w.to_vec())));
        out
    }

    /// Visits every admissible word of length `n` in lexicographic order.
    pub fn for_each_word(&self, n: usize, mut f: impl FnMut(&[Symbol])) {
        if n == 0 {
            f(&[]);
            return;
        }
        let mut buf = vec![0 as Symbol; n];
        self.dfs(&mut buf, 0, &mut f);
    }

    fn dfs(&self, buf: &mut [Symbol], pos: usize, f: &mut impl FnMut(&[Symbol])) {
        if pos == buf.len() {
            f(buf);
            return;
        }
        for s in 0..self.q {
            if pos == 0 || self.adj[buf[pos - 1] as usize * self.q + s] {
                buf[pos] = s as Symbol;
                self.dfs(buf, pos + 1, f);
            }
        }
    }

    /// Number of admissible words of length `n`.
    pub fn count_words(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let q = self.q;
        let mut v = vec![1u128; q];
        for _ in 1..n {
            v = (0..q).map(|s| (0..q).filter(|&t| self.adj[s * q + t]).map(|t| v[t]).sum()).collect();
        }
        v.iter().sum()
    }

    /// `trace(T^n)` computed with integer matrix powers.
    pub fn trace_power(&self, n: usize) -> u128 {
        let q = self.q;
        let t: Vec<u128> = self.adj.iter().map(|&b| b as u128).collect();
        let mut m = identity_u128(q);
        for _ in 0..n {
            m = mul_u128(q, &m, &t);
        }
        (0..q).map(|i| m[i * q + i]).sum()
    }
}

fn identity_u128(q: usize) -> Vec<u128> {
    (0..q * q).map(|k| (k / q == k % q) as u128).collect()
}

fn mul_u128(q: usize, a: &[u128], b: &[u128]) -> Vec<u128> {
    let mut c = vec![0u128; q * q];
    for i in 0..q {
        for k in 0..q {
            let aik = a[i * q + k];
            if aik == 0 {
                continue;
            }
            for j in 0..q {
                c[i * q + j] += aik * b[k * q + j];
            }
        }
    }
    c
}

fn mixing_rate_of(q: usize, adj: &[bool]) -> Option<usize> {
    let cap = (q - 1) * (q - 1) + 1;
    let mut pow = adj.to_vec();
    for m in 1..=cap {
        if pow.iter().all(|&b| b) {
            return Some(m);
        }
        let mut next = vec![false; q * q];
        for i in 0..q {
            for k in 0..q {
                if pow[i * q + k] {
                    for j in 0..q {
                        next[i * q + j] |= adj[k * q + j];
                    }
                }
            }
        }
        pow = next;
    }
    None
}

/// Smallest `M` with `T^M` entrywise positive.
pub fn mixing_rate(s: &Sft) -> usize {
    s.mixing_rate()
}

/// An eventually periodic two-sided sequence `...LLL core RRR...`.
///
/// `left` repeats to the left of `core`, `right` repeats to its right, and
/// coordinate 0 sits at position `anchor` of `core` (the anchor may lie
/// outside the core, in which case it indexes into the periodic tails).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointSpec {
    left: Vec<Symbol>,
    core: Vec<Symbol>,
    right: Vec<Symbol>,
    anchor: i64,
}

/// Outcome of scanning two points for their extreme disagreement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Disagreement {
    /// The two specs denote the same sequence.
    None,
    /// The extreme index at which they differ.
    At(i64),
    /// They differ at arbitrarily large indices in the scanned direction.
    Unbounded,
}

impl PointSpec {
    pub fn new(left: Vec<Symbol>, core: Vec<Symbol>, right: Vec<Symbol>, anchor: i64) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::InvalidArgument("tail cycles must be nonempty".into()));
        }
        Ok(PointSpec { left, core, right, anchor })
    }

    /// The fixed point `a^∞`.
    pub fn fixed(a: Symbol) -> Self {
        PointSpec { left: vec![a], core: vec![], right: vec![a], anchor: 0 }
    }

    /// The periodic point repeating `w` with coordinate 0 at `w[0]`.
    pub fn periodic(w: &PeriodicWord) -> Self {
        PointSpec { left: w.0.clone(), core: vec![], right: w.0.clone(), anchor: 0 }
    }

    /// Coordinates `lo..hi` given by `f`, with `left` repeating before `lo`
    /// (ending at `lo - 1`) and `right` repeating from `hi`.
    pub fn from_fn(lo: i64, hi: i64, left: &[Symbol], right: &[Symbol], f: impl Fn(i64) -> Symbol) -> Self {
        assert!(!left.is_empty() && !right.is_empty() && lo <= hi);
        PointSpec { left: left.to_vec(), core: (lo..hi).map(f).collect(), right: right.to_vec(), anchor: -lo }
    }

    pub fn core_start(&self) -> i64 {
        -self.anchor
    }

    pub fn core_end(&self) -> i64 {
        self.core.len() as i64 - self.anchor
    }

    pub fn left_cycle(&self) -> &[Symbol] {
        &self.left
    }

    pub fn right_cycle(&self) -> &[Symbol] {
        &self.right
    }

    pub fn coord(&self, i: i64) -> Symbol {
        let j = i + self.anchor;
        let n = self.core.len() as i64;
        if j < 0 {
            let l = self.left.len() as i64;
            self.left[(l - 1 - (-j - 1).rem_euclid(l)) as usize]
        } else if j < n {
            self.core[j as usize]
        } else {
            let r = self.right.len() as i64;
            self.right[((j - n) % r) as usize]
        }
    }

    /// Coordinates `lo..hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<Symbol> {
        (lo..hi).map(|i| self.coord(i)).collect()
    }

    pub fn shift(&self, n: i64) -> PointSpec {
        PointSpec { anchor: self.anchor + n, ..self.clone() }
    }

    pub fn is_admissible(&self, s: &Sft) -> bool {
        let lo = self.core_start() - self.left.len() as i64 - 1;
        let hi = self.core_end() + self.right.len() as i64 + 1;
        s.is_admissible_cycle(&self.left)
            && s.is_admissible_cycle(&self.right)
            && s.is_admissible(&self.window(lo, hi))
    }

    pub fn check_admissible(&self, s: &Sft) -> Result<()> {
        if self.is_admissible(s) {
            Ok(())
        } else {
            Err(Error::InadmissiblePoint(self.to_string()))
        }
    }

    fn right_bound(&self, other: &PointSpec) -> (i64, i64) {
        let hi = self.core_end().max(other.core_end());
        (hi, lcm(self.right.len(), other.right.len()) as i64)
    }

    fn left_bound(&self, other: &PointSpec) -> (i64, i64) {
        let lo = self.core_start().min(other.core_start());
        (lo, lcm(self.left.len(), other.left.len()) as i64)
    }

    /// The largest index where the sequences differ.
    pub fn last_disagreement(&self, other: &PointSpec) -> Disagreement {
        let (hi, pr) = self.right_bound(other);
        if (hi..hi + pr).any(|i| self.coord(i) != other.coord(i)) {
            return Disagreement::Unbounded;
        }
        let (lo, pl) = self.left_bound(other);
        match (lo - pl..hi).rev().find(|&i| self.coord(i) != other.coord(i)) {
            Some(i) => Disagreement::At(i),
            None => Disagreement::None,
        }
    }

    /// The smallest index where the sequences differ.
    pub fn first_disagreement(&self, other: &PointSpec) -> Disagreement {
        let (lo, pl) = self.left_bound(other);
        if (lo - pl..lo).any(|i| self.coord(i) != other.coord(i)) {
            return Disagreement::Unbounded;
        }
        let (hi, pr) = self.right_bound(other);
        match (lo..hi + pr).find(|&i| self.coord(i) != other.coord(i)) {
            Some(i) => Disagreement::At(i),
            None => Disagreement::None,
        }
    }

    pub fn same_sequence(&self, other: &PointSpec) -> bool {
        self.last_disagreement(other) == Disagreement::None
    }

    /// `other` agrees with `self` on all `i >= 0`.
    pub fn in_local_stable(&self, other: &PointSpec) -> bool {
        match self.last_disagreement(other) {
            Disagreement::None => true,
            Disagreement::At(i) => i < 0,
            Disagreement::Unbounded => false,
        }
    }

    /// `other` agrees with `self` on all `i <= 0`.
    pub fn in_local_unstable(&self, other: &PointSpec) -> bool {
        match self.first_disagreement(other) {
            Disagreement::None => true,
            Disagreement::At(i) => i > 0,
            Disagreement::Unbounded => false,
        }
    }

    /// The point with the past of `self` and the future of `other`.
    pub fn bracket(&self, other: &PointSpec) -> Result<PointSpec> {
        if self.coord(0) != other.coord(0) {
            return Err(Error::BracketUndefined);
        }
        let lo = self.core_start().min(0);
        let hi = other.core_end().max(1);
        Ok(PointSpec::from_fn(lo, hi, &self.tail_left_at(lo), &other.tail_right_at(hi), |i| {
            if i <= 0 {
                self.coord(i)
            } else {
                other.coord(i)
            }
        }))
    }

    /// Agrees with `self` at coordinates `<= 0`, then `future` at
    /// `1..=future.len()`, then `tail` repeated.
    pub fn with_future(&self, future: &[Symbol], tail: &[Symbol]) -> PointSpec {
        let lo = self.core_start().min(0);
        let hi = 1 + future.len() as i64;
        PointSpec::from_fn(lo, hi, &self.tail_left_at(lo), tail, |i| {
            if i <= 0 {
                self.coord(i)
            } else {
                future[(i - 1) as usize]
            }
        })
    }

    /// Agrees with `self` at coordinates `>= 0`, preceded by `past` at
    /// `-past.len()..0` and `tail` repeated before that.
    pub fn with_past(&self, past: &[Symbol], tail: &[Symbol]) -> PointSpec {
        let lo = -(past.len() as i64);
        let hi = self.core_end().max(0);
        PointSpec::from_fn(lo, hi, tail, &self.tail_right_at(hi), |i| {
            if i < 0 {
                past[(i - lo) as usize]
            } else {
                self.coord(i)
            }
        })
    }

    /// The left cycle rotated so that it ends at coordinate `lo - 1`, valid
    /// whenever `lo <= core_start()`.
    fn tail_left_at(&self, lo: i64) -> Vec<Symbol> {
        let l = self.left.len() as i64;
        (lo - l..lo).map(|i| self.coord(i)).collect()
    }

    /// The right cycle rotated so that it starts at coordinate `hi`, valid
    /// whenever `hi >= core_end()`.
    fn tail_right_at(&self, hi: i64) -> Vec<Symbol> {
        let r = self.right.len() as i64;
        (hi..hi + r).map(|i| self.coord(i)).collect()
    }

    /// The time reversal `i ↦ -1 - i`, a point of the transposed shift.
    pub fn reversed(&self) -> PointSpec {
        let mut core = self.core.clone();
        core.reverse();
        let mut left = self.right.clone();
        left.reverse();
        let mut right = self.left.clone();
        right.reverse();
        PointSpec { left, core, right, anchor: self.core_end() }
    }

    /// `2^{-k}` with `k` the least `|i|` at which the sequences differ.
    pub fn dist(&self, other: &PointSpec) -> f64 {
        let (lo, pl) = self.left_bound(other);
        let (hi, pr) = self.right_bound(other);
        let bound = (lo - pl).abs().max((hi + pr).abs()) + 1;
        for k in 0..=bound {
            if self.coord(k) != other.coord(k) || self.coord(-k) != other.coord(-k) {
                return 0.5f64.powi(k as i32);
            }
        }
        0.0
    }
}

/// The two-sided bracket `[x, y]`.
pub fn bracket(x: &PointSpec, y: &PointSpec) -> Result<PointSpec> {
    x.bracket(y)
}

impl fmt::Display for PointSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        fmt_symbols(&self.left, f)?;
        write!(f, ")^∞ ")?;
        let lo = self.core_start();
        let hi = self.core_end();
        if lo <= 0 && 0 < hi {
            fmt_symbols(&self.core[..(-lo) as usize], f)?;
            write!(f, ".")?;
            fmt_symbols(&self.core[(-lo) as usize..], f)?;
        } else {
            fmt_symbols(&self.core, f)?;
            write!(f, " @{}", lo)?;
        }
        write!(f, " (")?;
        fmt_symbols(&self.right, f)?;
        write!(f, ")^∞")
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
