//! Concrete formulas with the classifications and bounded-check results
//! they are expected to produce.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::classify::FragmentId;
use crate::formula::Formula;
use crate::syntax::parse;

/// `∀x1 ∀x2 ∀x3 (R(x1,x2) ∧ R(x2,x3) → R(x1,x3))`.
pub fn transitivity() -> Formula {
    parse(TRANS).expect("transitivity sentence parses")
}

const TRANS: &str = "A x1. A x2. A x3. ((R(x1,x2) & R(x2,x3)) -> R(x1,x3))";

/// One executable expectation about a gallery item.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    /// Classifier verdict for the item.
    Fragment { fragment: FragmentId, member: bool },
    /// The item entails another item.
    Entails { rhs: &'static str, max_size: u32 },
    /// The item, as gamma, forms an interpolation sandwich with `chi`.
    Sandwich {
        chi: &'static str,
        hidden_exists: Vec<(String, usize)>,
        hidden_forall: Vec<(String, usize)>,
        target: &'static str,
        max_size: u32,
    },
    /// Closing both the item and `other` under `∃hidden` gives equivalent
    /// formulas.
    ClosureEquiv {
        other: &'static str,
        hidden: Vec<(String, usize)>,
        max_size: u32,
    },
    /// Substituting `body` (over `params`) for `relation` yields `result`.
    Substitution {
        relation: &'static str,
        params: Vec<u32>,
        body: &'static str,
        result: &'static str,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expected {
    pub description: String,
    pub check: Expectation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GalleryItem {
    pub id: &'static str,
    pub formula: Formula,
    pub text: &'static str,
    pub source: &'static str,
    pub note: Option<&'static str>,
    pub expected: Vec<Expected>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown gallery id {0}")]
pub struct UnknownId(pub String);

struct Entry {
    id: &'static str,
    text: &'static str,
    source: &'static str,
    note: Option<&'static str>,
}

const ENTRIES: &[Entry] = &[
    Entry {
        id: "psi0",
        text: "A x2. A x3. ((R(x1,x2) & R(x2,x3)) -> R(x1,x3))",
        source: "transitivity at x1; interpolant forced by the gamma pair",
        note: None,
    },
    Entry {
        id: "psi1",
        text: "!(A x1. A x2. A x3. ((R(x1,x2) & R(x2,x3)) -> R(x1,x3)))",
        source: "non-transitivity sentence; interpolant claimed for the delta pair",
        note: None,
    },
    Entry {
        id: "gamma0",
        text: "(A x2. (R(x1,x2) -> A x3. (R(x2,x3) -> G(x3)))) & (A x2. (G(x2) -> R(x1,x2)))",
        source: "fluted gamma pair, left side",
        note: Some(
            "flat conjunction; nesting the second conjunct under the first universal \
             gives gamma0_nested, which differs as an open formula",
        ),
    },
    Entry {
        id: "gamma0_nested",
        text: "A x2. (R(x1,x2) -> ((A x3. (R(x2,x3) -> G(x3))) & (A x2. (G(x2) -> R(x1,x2)))))",
        source: "fluted gamma pair, left side, nested reading",
        note: Some("not fluted: the inner conjunction mixes levels 1 and 2"),
    },
    Entry {
        id: "gamma1",
        text: "(E x2. (R(x1,x2) & E x3. (R(x2,x3) & P(x3)))) -> (E x2. (R(x1,x2) & P(x2)))",
        source: "fluted gamma pair, right side",
        note: None,
    },
    Entry {
        id: "delta0",
        text: "(A x1. (G1(x1) -> A x2. (G2(x2) -> !R(x1,x2)))) & \
               (E x1. (G1(x1) & E x2. (R(x1,x2) & E x3. (R(x2,x3) & G2(x3)))))",
        source: "fluted delta pair, left side",
        note: Some(
            "flat conjunction; nesting the existential conjunct under the first universal \
             would make the sentence true whenever G1 is empty",
        ),
    },
    Entry {
        id: "delta1",
        text: "E x1. ((A x2. (P(x2) <-> !R(x1,x2))) -> E x2. (R(x1,x2) & E x3. (R(x2,x3) & P(x3))))",
        source: "fluted delta pair, right side",
        note: Some(
            "its universal closure over P is strictly weaker than psi1 \
             (bounded search finds a two-element transitive countermodel)",
        ),
    },
    Entry {
        id: "gamma0_fo2",
        text: "(A x2. (R(x1,x2) -> A x1. (R(x2,x1) -> G(x1)))) & (A x2. (G(x2) -> R(x1,x2)))",
        source: "two-variable gamma pair, left side (x as x1, y as x2)",
        note: Some("flat conjunction, as for gamma0"),
    },
    Entry {
        id: "gamma1_fo2",
        text: "(E x2. (R(x1,x2) & E x1. (R(x2,x1) & P(x1)))) -> (E x2. (R(x1,x2) & P(x2)))",
        source: "two-variable gamma pair, right side (x as x1, y as x2)",
        note: None,
    },
    Entry {
        id: "delta0_fo2",
        text: "(A x1. (G1(x1) -> A x2. (G2(x2) -> !R(x1,x2)))) & \
               (E x1. (G1(x1) & E x2. (R(x1,x2) & E x1. (R(x2,x1) & G2(x1)))))",
        source: "two-variable delta pair, left side (x as x1, y as x2)",
        note: Some("flat conjunction, as for delta0"),
    },
    Entry {
        id: "delta1_fo2",
        text: "E x1. ((A x2. (P(x2) <-> !R(x1,x2))) -> E x2. (R(x1,x2) & E x1. (R(x2,x1) & P(x1))))",
        source: "two-variable delta pair, right side (x as x1, y as x2)",
        note: Some(
            "biconditional on P(y), matching delta1",
        ),
    },
    Entry {
        id: "trans",
        text: TRANS,
        source: "transitivity sentence used to reduce to transitive relations",
        note: None,
    },
    Entry {
        id: "footnote_cycle",
        text: "E x1. E x2. (R(x1,x2) & R(x2,x1))",
        source: "two-cycle sentence separating the forward fragment from GFO, FO2 and UNFO",
        note: None,
    },
    Entry {
        id: "gfo_subst_before",
        text: "E x1. E x2. (R(x1,x2) & !S(x1,x2))",
        source: "guarded sentence before an unguarded substitution",
        note: None,
    },
    Entry {
        id: "gfo_subst_after",
        text: "E x1. E x2. ((x1=x1 & x2=x2) & !S(x1,x2))",
        source: "the same sentence after substituting x1=x1 & x2=x2 for R",
        note: None,
    },
    Entry {
        id: "fl_conj",
        text: "P(x1) & P(x2)",
        source: "conjunction of fluted atoms at different levels",
        note: None,
    },
];

pub const IDS: &[&str] = &[
    "psi0",
    "psi1",
    "gamma0",
    "gamma1",
    "delta0",
    "delta1",
    "gamma0_fo2",
    "gamma1_fo2",
    "delta0_fo2",
    "delta1_fo2",
    "trans",
    "footnote_cycle",
    "gfo_subst_before",
    "gfo_subst_after",
    "fl_conj",
];

fn frag(fragment: FragmentId, member: bool) -> Expected {
    Expected {
        description: format!("{fragment}: {}", if member { "yes" } else { "no" }),
        check: Expectation::Fragment { fragment, member },
    }
}

fn hidden(names: &[(&str, usize)]) -> Vec<(String, usize)> {
    names.iter().map(|(n, k)| (n.to_string(), *k)).collect()
}

fn expectations(id: &str) -> Vec<Expected> {
    use FragmentId::*;
    let entails = |rhs: &'static str| Expected {
        description: format!("entails {rhs}"),
        check: Expectation::Entails { rhs, max_size: 3 },
    };
    let sandwich = |chi: &'static str, ex: &[(&str, usize)], fa: &[(&str, usize)], target: &'static str| Expected {
        description: format!("sandwich with {chi} pins {target}"),
        check: Expectation::Sandwich {
            chi,
            hidden_exists: hidden(ex),
            hidden_forall: hidden(fa),
            target,
            max_size: 3,
        },
    };
    match id {
        "psi0" => vec![frag(Fl, false), frag(Ff, false), frag(Fo2, false)],
        "psi1" => vec![frag(Fl, false), frag(Ff, false), frag(Fo2, false)],
        "gamma0" => vec![
            frag(Fl, true),
            entails("gamma1"),
            sandwich("gamma1", &[("G", 1)], &[("P", 1)], "psi0"),
        ],
        "gamma0_nested" => vec![
            frag(Fl, false),
            Expected {
                description: "exists-G closure agrees with the flat reading".into(),
                check: Expectation::ClosureEquiv {
                    other: "gamma0",
                    hidden: hidden(&[("G", 1)]),
                    max_size: 3,
                },
            },
        ],
        "gamma1" => vec![frag(Fl, true)],
        "delta0" => vec![
            frag(Fl, true),
            entails("delta1"),
            sandwich("delta1", &[("G1", 1), ("G2", 1)], &[("P", 1)], "psi1"),
        ],
        "delta1" => vec![frag(Fl, true)],
        "gamma0_fo2" => vec![
            frag(Fo2, true),
            entails("gamma1_fo2"),
            sandwich("gamma1_fo2", &[("G", 1)], &[("P", 1)], "psi0"),
        ],
        "gamma1_fo2" => vec![frag(Fo2, true)],
        "delta0_fo2" => vec![
            frag(Fo2, true),
            entails("delta1_fo2"),
            sandwich("delta1_fo2", &[("G1", 1), ("G2", 1)], &[("P", 1)], "psi1"),
        ],
        "delta1_fo2" => vec![frag(Fo2, true)],
        "trans" => vec![frag(Fo2, false), frag(Fl, false)],
        "footnote_cycle" => vec![
            frag(Gfo, true),
            frag(Fo2, true),
            frag(Unfo, true),
            frag(Ff, false),
        ],
        "gfo_subst_before" => vec![
            frag(Gfo, true),
            Expected {
                description: "substituting x1=x1 & x2=x2 for R gives gfo_subst_after".into(),
                check: Expectation::Substitution {
                    relation: "R",
                    params: vec![1, 2],
                    body: "x1=x1 & x2=x2",
                    result: "gfo_subst_after",
                },
            },
        ],
        "gfo_subst_after" => vec![frag(Gfo, false), frag(GnfoPrimitive, false)],
        "fl_conj" => vec![frag(Fl, false), frag(Ff, true)],
        _ => Vec::new(),
    }
}

fn entry(id: &str) -> Option<&'static Entry> {
    ENTRIES.iter().find(|e| e.id == id)
}

pub fn paper_formula(id: &str) -> Result<GalleryItem, UnknownId> {
    let e = entry(id).ok_or_else(|| UnknownId(id.to_owned()))?;
    Ok(GalleryItem {
        id: e.id,
        formula: parse(e.text).expect("gallery transcriptions parse"),
        text: e.text,
        source: e.source,
        note: e.note,
        expected: expectations(e.id),
    })
}

/// Every item, including auxiliary readings, in a fixed order.
pub fn all_items() -> Vec<GalleryItem> {
    ENTRIES
        .iter()
        .map(|e| paper_formula(e.id).expect("listed ids resolve"))
        .collect()
}

impl fmt::Display for GalleryItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.id, crate::syntax::print(&self.formula))?;
        write!(f, "  source: {}", self.source)?;
        if let Some(note) = self.note {
            write!(f, "\n  note: {note}")?;
        }
        for e in &self.expected {
            write!(f, "\n  expect: {}", e.description)?;
        }
        Ok(())
    }
}
