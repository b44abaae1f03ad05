use crate::base::{BaseRing, FgAbelianShape};
use std::collections::BTreeMap;
use std::fmt;

/// One slot of a bigraded table.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct TableEntry {
    pub shape: FgAbelianShape,
    /// Class names when the computation could carry them; empty otherwise.
    pub names: Vec<String>,
    /// Set when a window edge may have clipped this entry.
    pub partial: bool,
}

impl TableEntry {
    pub fn new(shape: FgAbelianShape, names: Vec<String>) -> Self {
        TableEntry {
            shape,
            names,
            partial: false,
        }
    }
}

/// Bidegree-indexed finitely generated pieces with named basis classes.
/// Zero entries are not stored.
#[derive(Debug, Clone)]
pub struct BigradedTable {
    pub base: BaseRing,
    pub entries: BTreeMap<(i64, i64), TableEntry>,
    pub provenance: String,
}

impl serde::Serialize for BigradedTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(serde::Serialize)]
        struct Cell<'a> {
            n: i64,
            m: i64,
            shape: String,
            names: &'a [String],
            partial: bool,
        }
        let cells: Vec<Cell> = self
            .entries
            .iter()
            .map(|(&(n, m), e)| Cell {
                n,
                m,
                shape: e.shape.display(self.base),
                names: &e.names,
                partial: e.partial,
            })
            .collect();
        let mut s = serializer.serialize_struct("BigradedTable", 3)?;
        s.serialize_field("base", &self.base)?;
        s.serialize_field("provenance", &self.provenance)?;
        s.serialize_field("cells", &cells)?;
        s.end()
    }
}

impl BigradedTable {
    pub fn new(base: BaseRing, provenance: impl Into<String>) -> Self {
        BigradedTable {
            base,
            entries: BTreeMap::new(),
            provenance: provenance.into(),
        }
    }

    pub fn set(&mut self, n: i64, m: i64, entry: TableEntry) {
        if entry.shape.is_zero() && !entry.partial {
            self.entries.remove(&(n, m));
        } else {
            self.entries.insert((n, m), entry);
        }
    }

    pub fn get(&self, n: i64, m: i64) -> Option<&TableEntry> {
        self.entries.get(&(n, m))
    }

    pub fn shape(&self, n: i64, m: i64) -> FgAbelianShape {
        self.get(n, m)
            .map(|e| e.shape.clone())
            .unwrap_or_else(FgAbelianShape::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.values().all(|e| e.shape.is_zero())
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (&(i64, i64), &TableEntry)> {
        self.entries.iter().filter(|(_, e)| !e.shape.is_zero())
    }

    /// Entries grouped by total degree `n + m`.
    pub fn by_total_degree(&self) -> BTreeMap<i64, Vec<((i64, i64), &TableEntry)>> {
        let mut out: BTreeMap<i64, Vec<((i64, i64), &TableEntry)>> = BTreeMap::new();
        for (&(n, m), e) in self.nonzero() {
            out.entry(n + m).or_default().push(((n, m), e));
        }
        out
    }

    /// Structured differences against another table on a bidegree window.
    /// Shapes are always compared; names only where `expected` carries them.
    pub fn diff_against(
        &self,
        expected: &BigradedTable,
        n_range: (i64, i64),
        m_range: (i64, i64),
    ) -> Vec<TableDiff> {
        let mut out = vec![];
        let mut keys: std::collections::BTreeSet<(i64, i64)> = self
            .entries
            .keys()
            .chain(expected.entries.keys())
            .copied()
            .collect();
        keys.retain(|(n, m)| {
            n_range.0 <= *n && *n <= n_range.1 && m_range.0 <= *m && *m <= m_range.1
        });
        for (n, m) in keys {
            let got = self.shape(n, m);
            let want = expected.shape(n, m);
            if got != want {
                out.push(TableDiff {
                    n,
                    m,
                    got: got.display(self.base),
                    want: want.display(self.base),
                    kind: DiffKind::Shape,
                });
                continue;
            }
            if let Some(we) = expected.get(n, m) {
                if !we.names.is_empty() {
                    let got_names: std::collections::BTreeSet<&String> = self
                        .get(n, m)
                        .map(|e| e.names.iter().collect())
                        .unwrap_or_default();
                    let want_names: std::collections::BTreeSet<&String> =
                        we.names.iter().collect();
                    if got_names != want_names {
                        out.push(TableDiff {
                            n,
                            m,
                            got: format_names(&got_names),
                            want: format_names(&want_names),
                            kind: DiffKind::Names,
                        });
                    }
                }
            }
        }
        out
    }
}

fn format_names(names: &std::collections::BTreeSet<&String>) -> String {
    let v: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    format!("{{{}}}", v.join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum DiffKind {
    Shape,
    Names,
}

/// A single mismatch between a computed and an expected table.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct TableDiff {
    pub n: i64,
    pub m: i64,
    pub got: String,
    pub want: String,
    pub kind: DiffKind,
}

impl fmt::Display for TableDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}): got {}, expected {}",
            self.n, self.m, self.got, self.want
        )
    }
}
