//! Sink subsets and packet identifiers.
//!
//! Sinks are numbered from zero internally and printed from one, so the
//! subset `{0, 1}` displays as `12`.

use std::fmt;

/// A subset of sinks stored as a bitmask (bit `j` set means sink `j`).
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SinkSet(u32);

impl SinkSet {
    pub const EMPTY: SinkSet = SinkSet(0);

    pub const fn from_bits(bits: u32) -> Self {
        SinkSet(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(sink: usize) -> Self {
        SinkSet(1 << sink)
    }

    /// All sinks `0..count`.
    pub fn full(count: usize) -> Self {
        SinkSet(((1u64 << count) - 1) as u32)
    }

    pub fn from_sinks<I: IntoIterator<Item = usize>>(sinks: I) -> Self {
        SinkSet(sinks.into_iter().fold(0, |acc, j| acc | (1 << j)))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, sink: usize) -> bool {
        sink < 32 && self.0 & (1 << sink) != 0
    }

    pub fn is_subset_of(self, other: SinkSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_strict_subset_of(self, other: SinkSet) -> bool {
        self.is_subset_of(other) && self != other
    }

    pub fn union(self, other: SinkSet) -> SinkSet {
        SinkSet(self.0 | other.0)
    }

    pub fn intersection(self, other: SinkSet) -> SinkSet {
        SinkSet(self.0 & other.0)
    }

    pub fn difference(self, other: SinkSet) -> SinkSet {
        SinkSet(self.0 & !other.0)
    }

    /// Sink indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |j| bits & (1 << j) != 0)
    }

    /// Every nonempty subset of `self`, in increasing bitmask order.
    pub fn nonempty_subsets(self) -> impl Iterator<Item = SinkSet> {
        let mask = self.0;
        (1..=mask).filter(move |s| s & !mask == 0).map(SinkSet)
    }
}

impl fmt::Display for SinkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("{}");
        }
        for j in self.iter() {
            write!(f, "{}", j + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for SinkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SinkSet({self})")
    }
}

/// The packet sent by `source` to the sink subset `sinks`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PacketId {
    pub source: usize,
    pub sinks: SinkSet,
}

impl PacketId {
    pub fn new(source: usize, sinks: SinkSet) -> Self {
        PacketId { source, sinks }
    }

    /// Parse the `source:sinks` form used on the command line, e.g. `0:12`
    /// for the packet of source 0 addressed to sinks 1 and 2.
    pub fn parse(text: &str) -> Option<PacketId> {
        let (src, sinks) = text.trim().split_once(':')?;
        let source = src.trim().parse().ok()?;
        let mut set = SinkSet::EMPTY;
        for c in sinks.trim().chars() {
            let j = c.to_digit(10)? as usize;
            if j == 0 || set.contains(j - 1) {
                return None;
            }
            set = set.union(SinkSet::singleton(j - 1));
        }
        if set.is_empty() {
            return None;
        }
        Some(PacketId::new(source, set))
    }
}

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.source, self.sinks)
    }
}
