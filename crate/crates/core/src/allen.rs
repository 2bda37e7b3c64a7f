//! Allen's interval algebra over closed integer intervals.
//!
//! Point intervals are classified with the same endpoint decision table as
//! proper intervals. Branch precedence is EQUAL, STARTS/STARTED_BY,
//! FINISHES/FINISHED_BY, MEETS/MET_BY, BEFORE/AFTER, DURING/CONTAINS,
//! OVERLAPS/OVERLAPPED_BY, so e.g. `[2,2]` vs `[2,4]` is STARTS, not MEETS.

use std::fmt;
use std::str::FromStr;

use crate::hypergraph::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum BaseRelation {
    Before = 0,
    After = 1,
    Meets = 2,
    MetBy = 3,
    Overlaps = 4,
    OverlappedBy = 5,
    Starts = 6,
    StartedBy = 7,
    During = 8,
    Contains = 9,
    Finishes = 10,
    FinishedBy = 11,
    Equal = 12,
}

use BaseRelation::*;

impl BaseRelation {
    pub const ALL: [BaseRelation; 13] = [
        Before,
        After,
        Meets,
        MetBy,
        Overlaps,
        OverlappedBy,
        Starts,
        StartedBy,
        During,
        Contains,
        Finishes,
        FinishedBy,
        Equal,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<BaseRelation> {
        Self::ALL.get(i).copied()
    }

    pub fn inverse(self) -> BaseRelation {
        match self {
            Equal => Equal,
            r => Self::ALL[r.index() ^ 1],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Before => "BEFORE",
            After => "AFTER",
            Meets => "MEETS",
            MetBy => "MET_BY",
            Overlaps => "OVERLAPS",
            OverlappedBy => "OVERLAPPED_BY",
            Starts => "STARTS",
            StartedBy => "STARTED_BY",
            During => "DURING",
            Contains => "CONTAINS",
            Finishes => "FINISHES",
            FinishedBy => "FINISHED_BY",
            Equal => "EQUAL",
        }
    }
}

impl fmt::Display for BaseRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownRelation(pub String);

impl fmt::Display for UnknownRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown interval relation `{}`", self.0)
    }
}

impl std::error::Error for UnknownRelation {}

impl FromStr for BaseRelation {
    type Err = UnknownRelation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| UnknownRelation(s.to_string()))
    }
}

/// Relation of `a` to `b`, decided by endpoint comparisons alone.
pub fn classify(a: Interval, b: Interval) -> BaseRelation {
    let (s, e, s2, e2) = (a.start, a.end, b.start, b.end);
    if s == s2 && e == e2 {
        Equal
    } else if s == s2 {
        if e < e2 {
            Starts
        } else {
            StartedBy
        }
    } else if e == e2 {
        if s > s2 {
            Finishes
        } else {
            FinishedBy
        }
    } else if e == s2 {
        Meets
    } else if e2 == s {
        MetBy
    } else if e < s2 {
        Before
    } else if e2 < s {
        After
    } else if s > s2 && e < e2 {
        During
    } else if s < s2 && e > e2 {
        Contains
    } else if s < s2 {
        Overlaps
    } else {
        OverlappedBy
    }
}

/// A subset of the 13 base relations. Empty means inconsistent, full means unconstrained.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RelationSet(u16);

impl RelationSet {
    pub const EMPTY: RelationSet = RelationSet(0);
    pub const FULL: RelationSet = RelationSet(0x1FFF);

    pub fn from_bits(bits: u16) -> RelationSet {
        RelationSet(bits & Self::FULL.0)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn single(r: BaseRelation) -> RelationSet {
        RelationSet(1 << r.index())
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_full(self) -> bool {
        self.0 == Self::FULL.0
    }

    pub fn is_singleton(self) -> bool {
        self.0.count_ones() == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, r: BaseRelation) -> bool {
        self.0 & (1 << r.index()) != 0
    }

    pub fn is_subset(self, other: RelationSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn with(self, r: BaseRelation) -> RelationSet {
        RelationSet(self.0 | (1 << r.index()))
    }

    pub fn intersect(self, other: RelationSet) -> RelationSet {
        RelationSet(self.0 & other.0)
    }

    pub fn union(self, other: RelationSet) -> RelationSet {
        RelationSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = BaseRelation> {
        BaseRelation::ALL.into_iter().filter(move |r| self.contains(*r))
    }

    pub fn inverse(self) -> RelationSet {
        self.iter().map(BaseRelation::inverse).collect()
    }
}

impl FromIterator<BaseRelation> for RelationSet {
    fn from_iter<I: IntoIterator<Item = BaseRelation>>(iter: I) -> Self {
        iter.into_iter().fold(RelationSet::EMPTY, RelationSet::with)
    }
}

impl From<BaseRelation> for RelationSet {
    fn from(r: BaseRelation) -> Self {
        RelationSet::single(r)
    }
}

impl fmt::Debug for RelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Renders as `{BEFORE,MEETS}`.
impl fmt::Display for RelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, r) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(r.name())?;
        }
        f.write_str("}")
    }
}

impl FromStr for RelationSet {
    type Err = UnknownRelation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| UnknownRelation(s.to_string()))?;
        inner
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(BaseRelation::from_str)
            .collect()
    }
}

pub fn inverse(r: BaseRelation) -> BaseRelation {
    r.inverse()
}

pub fn inverse_set(s: RelationSet) -> RelationSet {
    s.inverse()
}

// Generated by exhaustive enumeration of all interval triples with endpoints
// in 0..=8 (point intervals included); see `tests::table_matches_enumeration`.
// Row = first relation, column = second, both in `BaseRelation::ALL` order.
#[rustfmt::skip]
const COMPOSITION: [[u16; 13]; 13] = [
    [0x0001, 0x1FFF, 0x0001, 0x0155, 0x0001, 0x0155, 0x0001, 0x0001, 0x0155, 0x0001, 0x0155, 0x0001, 0x0001],
    [0x1FFF, 0x0002, 0x052A, 0x0002, 0x052A, 0x0002, 0x052A, 0x0002, 0x052A, 0x0002, 0x0002, 0x0002, 0x0002],
    [0x0001, 0x02AA, 0x0001, 0x1C00, 0x0001, 0x0150, 0x0004, 0x0804, 0x0150, 0x0001, 0x0150, 0x0001, 0x0004],
    [0x0A15, 0x0002, 0x10C0, 0x0002, 0x0520, 0x0002, 0x0520, 0x0002, 0x0520, 0x0002, 0x0008, 0x0088, 0x0008],
    [0x0001, 0x02AA, 0x0001, 0x02A0, 0x0015, 0x1FF0, 0x0010, 0x0A10, 0x0150, 0x0A15, 0x0150, 0x0015, 0x0010],
    [0x0A15, 0x0002, 0x0A10, 0x0002, 0x1FF0, 0x002A, 0x0520, 0x002A, 0x0520, 0x02AA, 0x0020, 0x02A0, 0x0020],
    [0x0001, 0x0002, 0x0001, 0x0408, 0x0015, 0x0520, 0x0040, 0x10C0, 0x0100, 0x0A15, 0x0100, 0x0015, 0x0040],
    [0x0A15, 0x0002, 0x0A10, 0x0008, 0x0A10, 0x0020, 0x10C0, 0x0080, 0x0520, 0x0200, 0x0028, 0x0200, 0x0080],
    [0x0001, 0x0002, 0x0001, 0x0002, 0x0155, 0x052A, 0x0100, 0x052A, 0x0100, 0x1FFF, 0x0100, 0x0155, 0x0100],
    [0x0A15, 0x02AA, 0x0A10, 0x02A0, 0x0A10, 0x02A0, 0x0A10, 0x0200, 0x1FF0, 0x0200, 0x02A0, 0x0200, 0x0200],
    [0x0001, 0x0002, 0x0044, 0x0002, 0x0150, 0x002A, 0x0100, 0x002A, 0x0100, 0x02AA, 0x0400, 0x1C00, 0x0400],
    [0x0001, 0x02AA, 0x0004, 0x02A0, 0x0010, 0x02A0, 0x0014, 0x0200, 0x0150, 0x0200, 0x1C00, 0x0800, 0x0800],
    [0x0001, 0x0002, 0x0004, 0x0008, 0x0010, 0x0020, 0x0040, 0x0080, 0x0100, 0x0200, 0x0400, 0x0800, 0x1000],
];

/// Possible relations of A to C given `A r1 B` and `B r2 C`.
pub fn compose(r1: BaseRelation, r2: BaseRelation) -> RelationSet {
    RelationSet(COMPOSITION[r1.index()][r2.index()])
}

pub fn compose_sets(s1: RelationSet, s2: RelationSet) -> RelationSet {
    let mut out = RelationSet::EMPTY;
    for r1 in s1.iter() {
        for r2 in s2.iter() {
            out = out.union(compose(r1, r2));
            if out.is_full() {
                return out;
            }
        }
    }
    out
}
