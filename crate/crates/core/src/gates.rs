//! The move set of the random circuit.
//!
//! A gate acting on `n` adjacent sites may replace the local string by any
//! other string with the same local charge and the same local dipole moment.
//! Grouping all `3^n` local strings by `(q, p)` therefore gives the full set
//! of automaton moves: a gate draws uniformly from the class of the current
//! window, identity included.
//!
//! Conserving the window-local dipole (coordinates `1..=n`) is enough for the
//! global one because the offset of the window contributes `offset·q`, and `q`
//! is conserved too.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::chain::{pack, unpack_into, SpinState};
use crate::error::{Error, Result};

/// The four nontrivial three-site moves, as unordered pairs.
pub const THREE_SITE_MOVES: [(&str, &str); 4] = [
    ("0+0", "+-+"),
    ("0-0", "-+-"),
    ("+-0", "0+-"),
    ("-+0", "0-+"),
];

/// One `(q, p)` equivalence class of local strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateClass {
    pub charge: i32,
    pub dipole: i32,
    /// Window codes of the members, ascending.
    pub members: Vec<u16>,
}

/// Partition of all width-`n` strings into conserving classes.
#[derive(Debug, Clone)]
pub struct GateClassTable {
    width: usize,
    class_of: Vec<u32>,
    classes: Vec<GateClass>,
    windows: Vec<[i8; 4]>,
}

/// Leftmost site of a gate window, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GatePlacement {
    start: usize,
}

impl GatePlacement {
    /// Validate `1 ≤ start ≤ L − n + 1`; gates never wrap around the chain.
    pub fn new(start: usize, length: usize, width: usize) -> Result<Self> {
        if start == 0 || width > length || start > length - width + 1 {
            return Err(Error::invalid(format!(
                "gate window starting at site {start} does not fit a {width}-site gate in a chain of {length}"
            )));
        }
        Ok(GatePlacement { start })
    }

    pub fn start(self) -> usize {
        self.start
    }
}

fn local_charges(window: &[i8]) -> (i32, i32) {
    window.iter().enumerate().fold((0, 0), |(q, p), (k, &s)| {
        (q + s as i32, p + (k as i32 + 1) * s as i32)
    })
}

impl GateClassTable {
    /// Brute-force the conserving classes of all `3^n` strings, `n ∈ {3, 4}`.
    pub fn build(width: usize) -> Result<Self> {
        if !(3..=4).contains(&width) {
            return Err(Error::invalid(format!(
                "gate width must be 3 or 4, got {width}"
            )));
        }
        let count = 3usize.pow(width as u32);
        let mut groups: BTreeMap<(i32, i32), Vec<u16>> = BTreeMap::new();
        let mut window = vec![0i8; width];
        for code in 0..count {
            unpack_into(code as u64, &mut window);
            groups
                .entry(local_charges(&window))
                .or_default()
                .push(code as u16);
        }
        let classes = groups
            .into_iter()
            .map(|((charge, dipole), members)| GateClass {
                charge,
                dipole,
                members,
            })
            .collect();
        Ok(Self::from_parts(width, classes))
    }

    /// Assemble a table from explicit classes of local strings.
    ///
    /// No conservation or partition checks are made here; use
    /// [`GateClassTable::is_partition`] and [`GateClassTable::is_conserving`].
    /// Strings missing from every class are added as singletons so the table
    /// stays usable, but they still count against `is_partition`.
    pub fn from_classes(width: usize, classes: &[Vec<&str>]) -> Result<Self> {
        if !(3..=4).contains(&width) {
            return Err(Error::invalid(format!(
                "gate width must be 3 or 4, got {width}"
            )));
        }
        let mut parsed = Vec::with_capacity(classes.len());
        for class in classes {
            let mut members = Vec::with_capacity(class.len());
            let mut first = None;
            for s in class {
                let st: SpinState = s.parse()?;
                if st.len() != width {
                    return Err(Error::invalid(format!(
                        "local string {s:?} does not have width {width}"
                    )));
                }
                first.get_or_insert_with(|| local_charges(st.sites()));
                members.push(pack(st.sites()) as u16);
            }
            members.sort_unstable();
            let (charge, dipole) = first.unwrap_or((0, 0));
            parsed.push(GateClass {
                charge,
                dipole,
                members,
            });
        }
        Ok(Self::from_parts(width, parsed))
    }

    fn from_parts(width: usize, mut classes: Vec<GateClass>) -> Self {
        let count = 3usize.pow(width as u32);
        let mut class_of = vec![u32::MAX; count];
        for (id, class) in classes.iter().enumerate() {
            for &m in &class.members {
                if class_of[m as usize] == u32::MAX {
                    class_of[m as usize] = id as u32;
                }
            }
        }
        let mut scratch = vec![0i8; width];
        for (code, slot) in class_of.iter_mut().enumerate() {
            if *slot == u32::MAX {
                unpack_into(code as u64, &mut scratch);
                let (charge, dipole) = local_charges(&scratch);
                *slot = classes.len() as u32;
                classes.push(GateClass {
                    charge,
                    dipole,
                    members: vec![code as u16],
                });
            }
        }
        let windows = (0..count)
            .map(|code| {
                let mut w = [0i8; 4];
                unpack_into(code as u64, &mut w[..width]);
                w
            })
            .collect();
        GateClassTable {
            width,
            class_of,
            classes,
            windows,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn classes(&self) -> &[GateClass] {
        &self.classes
    }

    /// Class id of a local string.
    pub fn class_of(&self, window: &[i8]) -> usize {
        self.class_of[pack(window) as usize] as usize
    }

    pub(crate) fn class_of_code(&self, code: usize) -> &GateClass {
        &self.classes[self.class_of[code] as usize]
    }

    /// Number of strings that sit in a class of size at least two.
    pub fn nontrivial_string_count(&self) -> usize {
        self.classes
            .iter()
            .filter(|c| c.members.len() > 1)
            .map(|c| c.members.len())
            .sum()
    }

    /// Class-size histogram: size → number of classes.
    pub fn size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for c in &self.classes {
            *hist.entry(c.members.len()).or_insert(0) += 1;
        }
        hist
    }

    /// Every string appears in exactly one class.
    pub fn is_partition(&self) -> bool {
        let count = 3usize.pow(self.width as u32);
        let mut seen = vec![0u32; count];
        for c in &self.classes {
            for &m in &c.members {
                seen[m as usize] += 1;
            }
        }
        seen.iter().all(|&n| n == 1)
    }

    /// All members of every class share the same local `(q, p)`.
    pub fn is_conserving(&self) -> bool {
        let mut window = vec![0i8; self.width];
        self.classes.iter().all(|c| {
            c.members.iter().all(|&m| {
                unpack_into(m as u64, &mut window);
                local_charges(&window) == (c.charge, c.dipole)
            })
        })
    }

    /// Nontrivial classes rendered as sorted lists of strings.
    pub fn nontrivial_classes(&self) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = self
            .classes
            .iter()
            .filter(|c| c.members.len() > 1)
            .map(|c| {
                let mut v: Vec<String> = c
                    .members
                    .iter()
                    .map(|&m| SpinState::unpack(m as u64, self.width).to_string())
                    .collect();
                v.sort();
                v
            })
            .collect();
        out.sort();
        out
    }

    /// Replace the window at 0-based `offset` by a uniform draw from its class.
    #[inline]
    pub(crate) fn apply_at<R: Rng + ?Sized>(&self, sites: &mut [i8], offset: usize, rng: &mut R) {
        let window = &mut sites[offset..offset + self.width];
        let code = pack(window) as usize;
        let class = &self.classes[self.class_of[code] as usize];
        let n = class.members.len();
        if n == 1 {
            return;
        }
        let pick = class.members[rng.random_range(0..n)] as usize;
        window.copy_from_slice(&self.windows[pick][..self.width]);
    }

    /// Apply one random gate at `placement`, returning the new state.
    pub fn apply_random_gate<R: Rng + ?Sized>(
        &self,
        state: &SpinState,
        placement: GatePlacement,
        rng: &mut R,
    ) -> Result<SpinState> {
        GatePlacement::new(placement.start, state.len(), self.width)?;
        let mut next = state.clone();
        self.apply_at(next.sites_mut(), placement.start - 1, rng);
        Ok(next)
    }

    /// Debug dump: string → class id, and class id → members.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct ClassDump {
            id: usize,
            q: i32,
            p: i32,
            members: Vec<String>,
        }
        #[derive(Serialize)]
        struct Dump {
            width: usize,
            lookup: BTreeMap<String, usize>,
            classes: Vec<ClassDump>,
        }
        let name = |m: u16| SpinState::unpack(m as u64, self.width).to_string();
        let dump = Dump {
            width: self.width,
            lookup: (0..self.class_of.len())
                .map(|code| (name(code as u16), self.class_of[code] as usize))
                .collect(),
            classes: self
                .classes
                .iter()
                .enumerate()
                .map(|(id, c)| ClassDump {
                    id,
                    q: c.charge,
                    p: c.dipole,
                    members: c.members.iter().map(|&m| name(m)).collect(),
                })
                .collect(),
        };
        serde_json::to_value(dump).expect("class table dump is plain data")
    }
}

/// True iff `table` is a conserving partition of the 27 three-site strings
/// whose nontrivial classes are exactly the four pairs of [`THREE_SITE_MOVES`].
pub fn verify_three_site_table(table: &GateClassTable) -> bool {
    if table.width() != 3 || !table.is_partition() || !table.is_conserving() {
        return false;
    }
    let mut expected: Vec<Vec<String>> = THREE_SITE_MOVES
        .iter()
        .map(|(a, b)| {
            let mut v = vec![a.to_string(), b.to_string()];
            v.sort();
            v
        })
        .collect();
    expected.sort();
    table.nontrivial_classes() == expected
}
