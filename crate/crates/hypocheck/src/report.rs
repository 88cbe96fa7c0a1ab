use std::fmt::Write as _;

use curvegeom::Point;
use serde::Serialize;

#[allow(non_camel_case_types, clippy::upper_case_acronyms)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Condition {
    SYM,
    CURV,
    TANG,
    XCONV,
    NUY,
    REFL_S0,
    REFL_PLUS,
    CENTEROUT,
}

impl Condition {
    pub const ALL: [Condition; 8] = [
        Condition::SYM,
        Condition::CURV,
        Condition::TANG,
        Condition::XCONV,
        Condition::NUY,
        Condition::REFL_S0,
        Condition::REFL_PLUS,
        Condition::CENTEROUT,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Condition::SYM => "SYM",
            Condition::CURV => "CURV",
            Condition::TANG => "TANG",
            Condition::XCONV => "XCONV",
            Condition::NUY => "NUY",
            Condition::REFL_S0 => "REFL_S0",
            Condition::REFL_PLUS => "REFL_PLUS",
            Condition::CENTEROUT => "CENTEROUT",
        }
    }

    /// Strict inequalities (`α′, β′ > 0` and the closed-in-open inclusion)
    /// need a positive margin; the rest pass down to `-CONTAIN_TOL`.
    pub fn is_strict(self) -> bool {
        matches!(self, Condition::TANG | Condition::CENTEROUT)
    }

    pub fn description(self) -> &'static str {
        match self {
            Condition::SYM => "symmetric under x -> -x",
            Condition::CURV => "K(0) >= 0 and K' >= 0 on [0, s0]",
            Condition::TANG => "alpha', beta' > 0 on (0, s0)",
            Condition::XCONV => "nu_x >= 0 on the boundary in {x > 0}",
            Condition::NUY => "nu_y >= 0 where the boundary meets the closure of omega0, r > 0",
            Condition::REFL_S0 => "reflection of Omega_s0 across Lambda_s0 stays in Omega",
            Condition::REFL_PLUS => "reflection of Omega ∩ {y > y0} across y = y0 stays in Omega",
            Condition::CENTEROUT => "closure of omega0 inside D_Gamma",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisEntry {
    pub id: Condition,
    pub pass: bool,
    pub applicable: bool,
    /// Signed worst case of the defining inequality.
    pub margin: f64,
    pub witness: Option<Point>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl HypothesisEntry {
    pub(crate) fn judged(id: Condition, margin: f64, witness: Option<Point>, samples: usize) -> Self {
        let pass = if id.is_strict() { margin > crate::CONTAIN_TOL } else { margin >= -crate::CONTAIN_TOL };
        HypothesisEntry { id, pass, applicable: true, margin, witness, samples, note: None }
    }

    pub(crate) fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub s0: f64,
    /// `None` stands for `y0 = ∞`.
    pub y0: Option<f64>,
    pub pass: bool,
    pub entries: Vec<HypothesisEntry>,
    /// Largest sampled `s` with CURV and TANG holding on `[0, s]`, when smaller than `s0`.
    pub s0_limit: Option<f64>,
}

impl HypothesisReport {
    pub(crate) fn new(s0: f64, y0: f64, entries: Vec<HypothesisEntry>, s0_limit: Option<f64>) -> Self {
        let pass = entries.iter().all(|e| e.pass);
        HypothesisReport { s0, y0: y0.is_finite().then_some(y0), pass, entries, s0_limit }
    }

    pub fn entry(&self, id: Condition) -> &HypothesisEntry {
        self.entries.iter().find(|e| e.id == id).expect("every condition is reported")
    }

    pub fn failing(&self) -> Vec<Condition> {
        self.entries.iter().filter(|e| !e.pass).map(|e| e.id).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let y0 = self.y0.map_or("inf".to_string(), |v| format!("{v}"));
        let _ = writeln!(out, "s0 = {}, y0 = {}: {}", self.s0, y0, if self.pass { "PASS" } else { "FAIL" });
        let _ = writeln!(out, "{:<10} {:<6} {:>13}  {:<27} meaning", "condition", "result", "margin", "witness");
        for e in &self.entries {
            let verdict = match (e.applicable, e.pass) {
                (false, _) => "n/a",
                (true, true) => "PASS",
                (true, false) => "FAIL",
            };
            let w = e.witness.map_or("-".to_string(), |p| format!("({:.6}, {:.6})", p[0], p[1]));
            let _ =
                writeln!(out, "{:<10} {:<6} {:>13.6e}  {:<27} {}", e.id.id(), verdict, e.margin, w, e.id.description());
            if let Some(n) = &e.note {
                let _ = writeln!(out, "{:<10} note: {n}", "");
            }
        }
        if let Some(s) = self.s0_limit {
            let _ = writeln!(out, "CURV and TANG hold up to s = {s}");
        }
        out
    }
}
