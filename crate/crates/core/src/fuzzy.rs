//! Triangular membership functions and the two-input, three-term fuzzy
//! logic controller used for both the anchor reliability index and the
//! total reliability index.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("invalid triangle ({a}, {m}, {b}): expected finite a <= m <= b")]
    InvalidTriangle { a: f64, m: f64, b: f64 },
    #[error("no rule fired for inputs ({x1}, {x2})")]
    ZeroFiring { x1: f64, x2: f64 },
    #[error("invalid controller: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("malformed controller document: {0}")]
    Json(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Triangle `(a, m, b)`: left foot, peak, right foot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct TriangularMf {
    pub a: f64,
    pub m: f64,
    pub b: f64,
}

impl TriangularMf {
    pub fn new(a: f64, m: f64, b: f64) -> Result<Self, FuzzyError> {
        if a.is_finite() && m.is_finite() && b.is_finite() && a <= m && m <= b {
            Ok(Self { a, m, b })
        } else {
            Err(FuzzyError::InvalidTriangle { a, m, b })
        }
    }

    /// Builds a triangle without checking the ordering. Used while a
    /// candidate is being assembled; run [`FlcSpec::validate`] afterwards.
    pub const fn new_unchecked(a: f64, m: f64, b: f64) -> Self {
        Self { a, m, b }
    }

    pub fn is_ordered(&self) -> bool {
        self.a <= self.m && self.m <= self.b
    }

    /// Membership degree of `x`.
    ///
    /// A degenerate left side (`a == m`) is a left shoulder and a degenerate
    /// right side (`m == b`) a right shoulder: the degree is 1 at `x == m`.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            0.0
        } else if x == self.m {
            1.0
        } else if x < self.m {
            (x - self.a) / (self.m - self.a)
        } else {
            (self.b - x) / (self.b - self.m)
        }
    }

    /// Centroid of the triangle clipped at `height` (a trapezoid for
    /// `height < 1`).
    pub fn clipped_centroid(&self, height: f64) -> f64 {
        let h = height.clamp(0.0, 1.0);
        let width = self.b - self.a;
        if width <= 0.0 || h == 0.0 {
            return self.m;
        }
        let p1 = self.a + h * (self.m - self.a);
        let p2 = self.b - h * (self.b - self.m);
        let left_area = 0.5 * h * (p1 - self.a);
        let left_x = self.a + 2.0 / 3.0 * (p1 - self.a);
        let mid_area = h * (p2 - p1);
        let mid_x = 0.5 * (p1 + p2);
        let right_area = 0.5 * h * (self.b - p2);
        let right_x = p2 + (self.b - p2) / 3.0;
        let area = left_area + mid_area + right_area;
        (left_area * left_x + mid_area * mid_x + right_area * right_x) / area
    }
}

impl TryFrom<[f64; 3]> for TriangularMf {
    type Error = FuzzyError;

    fn try_from([a, m, b]: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(a, m, b)
    }
}

impl From<TriangularMf> for [f64; 3] {
    fn from(t: TriangularMf) -> Self {
        [t.a, t.m, t.b]
    }
}

/// Linguistic term of a three-term variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Low,
    Medium,
    High,
}

impl Term {
    pub const ALL: [Term; 3] = [Term::Low, Term::Medium, Term::High];

    pub const fn index(self) -> usize {
        self as usize
    }

    /// Thresholds a crisp consequent in `[0, 1]` into an output term.
    pub fn from_consequent(value: f64) -> Term {
        if value < 1.0 / 3.0 {
            Term::Low
        } else if value < 2.0 / 3.0 {
            Term::Medium
        } else {
            Term::High
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    #[serde(rename = "Low")]
    pub low: TriangularMf,
    #[serde(rename = "Medium")]
    pub medium: TriangularMf,
    #[serde(rename = "High")]
    pub high: TriangularMf,
}

impl Terms {
    pub fn get(&self, term: Term) -> &TriangularMf {
        match term {
            Term::Low => &self.low,
            Term::Medium => &self.medium,
            Term::High => &self.high,
        }
    }

    pub fn get_mut(&mut self, term: Term) -> &mut TriangularMf {
        match term {
            Term::Low => &mut self.low,
            Term::Medium => &mut self.medium,
            Term::High => &mut self.high,
        }
    }
}

/// A fuzzy variable with exactly three terms over a closed universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyVariable {
    #[serde(default)]
    pub name: String,
    pub universe: [f64; 2],
    pub terms: Terms,
}

impl FuzzyVariable {
    pub fn new(name: impl Into<String>, universe: [f64; 2], terms: [TriangularMf; 3]) -> Self {
        let [low, medium, high] = terms;
        Self { name: name.into(), universe, terms: Terms { low, medium, high } }
    }

    /// Low/Medium/High partition with shoulders at both ends of `[lo, hi]`.
    pub fn standard(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        Self::new(
            name,
            [lo, hi],
            [
                TriangularMf::new_unchecked(lo, lo, mid),
                TriangularMf::new_unchecked(lo, mid, hi),
                TriangularMf::new_unchecked(mid, hi, hi),
            ],
        )
    }

    pub fn lo(&self) -> f64 {
        self.universe[0]
    }

    pub fn hi(&self) -> f64 {
        self.universe[1]
    }

    pub fn width(&self) -> f64 {
        self.hi() - self.lo()
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo(), self.hi())
    }

    /// Degrees of (Low, Medium, High) at `x`, after clamping `x` into the
    /// universe. The outer terms saturate toward the universe edges: Low is
    /// 1 below its peak and High is 1 above its peak.
    pub fn fuzzify(&self, x: f64) -> [f64; 3] {
        let x = self.clamp(x);
        let low = if x <= self.terms.low.m { 1.0 } else { self.terms.low.eval(x) };
        let high = if x >= self.terms.high.m { 1.0 } else { self.terms.high.eval(x) };
        [low, self.terms.medium.eval(x), high]
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![self.lo(), self.hi()];
        for t in Term::ALL {
            let mf = self.terms.get(t);
            pts.extend([mf.a, mf.m, mf.b]);
        }
        pts.retain(|p| p.is_finite() && *p >= self.lo() && *p <= self.hi());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// First point of the universe where every term has zero membership.
    ///
    /// Memberships are piecewise linear between breakpoints, so checking the
    /// breakpoints and the midpoints between them is exhaustive.
    pub fn coverage_gap(&self) -> Option<f64> {
        let pts = self.breakpoints();
        let mids = pts.windows(2).map(|w| 0.5 * (w[0] + w[1]));
        pts.iter().copied().chain(mids).find(|&x| self.fuzzify(x).iter().all(|&d| d <= 0.0))
    }
}

/// Crisp rule consequents indexed by (input1 term, input2 term).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleTable(pub [[f64; 3]; 3]);

impl RuleTable {
    pub fn get(&self, t1: Term, t2: Term) -> f64 {
        self.0[t1.index()][t2.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InferenceMode {
    /// Weighted average of the crisp consequents.
    #[default]
    Singleton,
    /// Each rule points at an output term (consequent thresholded at 1/3
    /// and 2/3); its value is the centroid of that term clipped at the
    /// firing strength.
    MamdaniClipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TNorm {
    #[default]
    Min,
    Product,
}

impl TNorm {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            TNorm::Min => a.min(b),
            TNorm::Product => a * b,
        }
    }
}

/// Which variable of a controller a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slot {
    Input1,
    Input2,
    Output,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Input1, Slot::Input2, Slot::Output];
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// One of the six orderings between the Low/Medium/High parameters.
    Ordering {
        slot: Slot,
        constraint: u8,
    },
    UnorderedTriangle {
        slot: Slot,
        term: Term,
    },
    OutsideUniverse {
        slot: Slot,
        term: Term,
    },
    EmptyUniverse {
        slot: Slot,
    },
    CoverageGap {
        slot: Slot,
        at: f64,
    },
    OutputUniverse,
    RuleOutOfRange {
        row: Term,
        col: Term,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Ordering { slot, constraint } => {
                write!(f, "{slot:?}: ordering constraint {constraint} violated")
            }
            Violation::UnorderedTriangle { slot, term } => {
                write!(f, "{slot:?}.{term}: expected a <= m <= b")
            }
            Violation::OutsideUniverse { slot, term } => {
                write!(f, "{slot:?}.{term}: support leaves the universe")
            }
            Violation::EmptyUniverse { slot } => write!(f, "{slot:?}: universe must satisfy lo < hi"),
            Violation::CoverageGap { slot, at } => write!(f, "{slot:?}: no term covers x = {at}"),
            Violation::OutputUniverse => write!(f, "output universe must be [0, 1]"),
            Violation::RuleOutOfRange { row, col, value } => {
                write!(f, "rule ({row}, {col}) = {value} is outside [0, 1]")
            }
        }
    }
}

/// Checks the six Low/Medium/High orderings of one variable, in their
/// itemized order, with non-strict inequalities.
///
/// Notation: `(a_X, b_X, c_X)` are the left foot, peak and right foot of term X.
pub fn ordering_violations(var: &FuzzyVariable) -> Vec<u8> {
    let (l, m, h) = (var.terms.low, var.terms.medium, var.terms.high);
    let (a_l, b_l, c_l) = (l.a, l.m, l.b);
    let (a_m, b_m, c_m) = (m.a, m.m, m.b);
    let (a_h, b_h, c_h) = (h.a, h.m, h.b);
    let checks = [
        a_l <= c_l && c_l <= b_m,
        a_l <= b_l && b_l <= c_l,
        a_l <= a_m && a_m <= c_l,
        b_m <= c_m && c_m <= c_h,
        b_m <= a_h && a_h <= c_m,
        a_h <= b_h && b_h <= c_h,
    ];
    (1u8..).zip(checks).filter(|(_, ok)| !ok).map(|(n, _)| n).collect()
}

/// A two-input, one-output controller with a 3×3 rule table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlcSpec {
    pub input1: FuzzyVariable,
    pub input2: FuzzyVariable,
    pub output: FuzzyVariable,
    pub rules: RuleTable,
    #[serde(default)]
    pub mode: InferenceMode,
    #[serde(default)]
    pub tnorm: TNorm,
}

impl FlcSpec {
    pub fn variable(&self, slot: Slot) -> &FuzzyVariable {
        match slot {
            Slot::Input1 => &self.input1,
            Slot::Input2 => &self.input2,
            Slot::Output => &self.output,
        }
    }

    pub fn variable_mut(&mut self, slot: Slot) -> &mut FuzzyVariable {
        match slot {
            Slot::Input1 => &mut self.input1,
            Slot::Input2 => &mut self.input2,
            Slot::Output => &mut self.output,
        }
    }

    /// Crisp output for the input pair `(x1, x2)`.
    pub fn infer(&self, x1: f64, x2: f64) -> Result<f64, FuzzyError> {
        let mu1 = self.input1.fuzzify(x1);
        let mu2 = self.input2.fuzzify(x2);
        let mut num = 0.0;
        let mut den = 0.0;
        for t1 in Term::ALL {
            for t2 in Term::ALL {
                let strength = self.tnorm.apply(mu1[t1.index()], mu2[t2.index()]);
                if strength <= 0.0 {
                    continue;
                }
                let consequent = self.rules.get(t1, t2);
                let value = match self.mode {
                    InferenceMode::Singleton => consequent,
                    InferenceMode::MamdaniClipped => {
                        let term = Term::from_consequent(consequent);
                        self.output.terms.get(term).clipped_centroid(strength)
                    }
                };
                num += strength * value;
                den += strength;
            }
        }
        if den > 0.0 {
            Ok(num / den)
        } else {
            Err(FuzzyError::ZeroFiring { x1, x2 })
        }
    }

    /// Every violation found, in a stable order.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for slot in Slot::ALL {
            let var = self.variable(slot);
            if !(var.lo() < var.hi()) {
                out.push(Violation::EmptyUniverse { slot });
                continue;
            }
            for term in Term::ALL {
                let mf = var.terms.get(term);
                if !mf.is_ordered() {
                    out.push(Violation::UnorderedTriangle { slot, term });
                }
                if mf.a < var.lo() || mf.b > var.hi() {
                    out.push(Violation::OutsideUniverse { slot, term });
                }
            }
            out.extend(ordering_violations(var).into_iter().map(|constraint| Violation::Ordering { slot, constraint }));
            if let Some(at) = var.coverage_gap() {
                out.push(Violation::CoverageGap { slot, at });
            }
        }
        if self.output.universe != [0.0, 1.0] {
            out.push(Violation::OutputUniverse);
        }
        for row in Term::ALL {
            for col in Term::ALL {
                let value = self.rules.get(row, col);
                if !(0.0..=1.0).contains(&value) {
                    out.push(Violation::RuleOutOfRange { row, col, value });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub fn from_json(text: &str) -> Result<Self, FuzzyError> {
        let spec: FlcSpec = serde_json::from_str(text).map_err(|e| FuzzyError::Json(e.to_string()))?;
        spec.validate().map_err(FuzzyError::Invalid)?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("controller serializes")
    }
}

/// Anchor model reliability controller: inputs Z% in `[0, 100]` and K in
/// `[0, 1]`, output the model reliability index.
pub fn default_flc1() -> FlcSpec {
    FlcSpec {
        input1: FuzzyVariable::standard("z_score", 0.0, 100.0),
        input2: FuzzyVariable::standard("k_score", 0.0, 1.0),
        output: FuzzyVariable::standard("model_reliability", 0.0, 1.0),
        rules: RuleTable([[0.03, 0.06, 0.15], [0.25, 0.45, 0.75], [0.65, 0.85, 1.0]]),
        mode: InferenceMode::Singleton,
        tnorm: TNorm::Min,
    }
}

/// Total reliability controller: inputs anchor reliability and normalized
/// RSSI (proximity), both in `[0, 1]`.
pub fn default_flc2() -> FlcSpec {
    FlcSpec {
        input1: FuzzyVariable::standard("anchor_reliability", 0.0, 1.0),
        input2: FuzzyVariable::standard("normalized_rssi", 0.0, 1.0),
        output: FuzzyVariable::standard("total_reliability", 0.0, 1.0),
        rules: RuleTable([[0.001, 0.3, 0.7], [0.01, 0.4, 0.9], [0.3, 0.6, 1.0]]),
        mode: InferenceMode::Singleton,
        tnorm: TNorm::Min,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: f64, m: f64, b: f64) -> TriangularMf {
        TriangularMf::new(a, m, b).unwrap()
    }

    #[test]
    fn mf_eval_examples() {
        assert_eq!(tri(0.0, 50.0, 100.0).eval(50.0), 1.0);
        assert_eq!(tri(0.0, 50.0, 100.0).eval(25.0), 0.5);
        assert_eq!(tri(50.0, 100.0, 100.0).eval(40.0), 0.0);
        // left shoulder
        assert_eq!(tri(0.0, 0.0, 50.0).eval(0.0), 1.0);
        assert_eq!(tri(0.0, 0.0, 50.0).eval(25.0), 0.5);
        // right shoulder
        assert_eq!(tri(50.0, 100.0, 100.0).eval(100.0), 1.0);
        assert_eq!(tri(0.0, 50.0, 100.0).eval(100.0), 0.0);
        assert_eq!(tri(0.0, 50.0, 100.0).eval(0.0), 0.0);
    }

    #[test]
    fn rejects_unordered_triangle() {
        assert!(TriangularMf::new(1.0, 0.0, 2.0).is_err());
        assert!(TriangularMf::new(0.0, f64::NAN, 2.0).is_err());
    }

    #[test]
    fn fuzzify_examples() {
        let z = default_flc1().input1;
        assert_eq!(z.fuzzify(50.0), [0.0, 1.0, 0.0]);
        assert_eq!(z.fuzzify(75.0), [0.0, 0.5, 0.5]);
        assert_eq!(z.fuzzify(0.0), [1.0, 0.0, 0.0]);
        // clamped
        assert_eq!(z.fuzzify(-10.0), [1.0, 0.0, 0.0]);
        assert_eq!(z.fuzzify(250.0), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn infer_examples() {
        let f1 = default_flc1();
        let f2 = default_flc2();
        assert!((f1.infer(50.0, 1.0).unwrap() - 0.75).abs() < 1e-12);
        assert!((f1.infer(100.0, 0.0).unwrap() - 0.65).abs() < 1e-12);
        assert!((f2.infer(1.0, 0.0).unwrap() - 0.3).abs() < 1e-12);
        assert!((f1.infer(75.0, 0.75).unwrap() - 0.7625).abs() < 1e-12);
    }

    #[test]
    fn product_tnorm_at_peaks_matches_table() {
        let mut f = default_flc2();
        f.tnorm = TNorm::Product;
        assert!((f.infer(0.5, 0.5).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn zero_firing_is_reported() {
        let mut f = default_flc2();
        // Medium-only input1 with nothing firing at the edge.
        f.input1.terms.low = TriangularMf::new_unchecked(0.0, 0.2, 0.3);
        f.input1.terms.high = TriangularMf::new_unchecked(0.7, 0.8, 0.9);
        f.input1.terms.medium = TriangularMf::new_unchecked(0.3, 0.5, 0.7);
        assert!(matches!(f.infer(0.3, 0.5), Err(FuzzyError::ZeroFiring { .. })));
    }

    #[test]
    fn defaults_validate() {
        assert_eq!(default_flc1().validate(), Ok(()));
        assert_eq!(default_flc2().validate(), Ok(()));
        assert_eq!(default_flc1().input1.terms.medium, tri(0.0, 50.0, 100.0));
        assert_eq!(default_flc2().rules.get(Term::Medium, Term::High), 0.9);
    }

    #[test]
    fn ordering_constraint_one() {
        let mut f = default_flc1();
        // c_L beyond the Medium peak
        f.input1.terms.low.b = 60.0;
        let v = f.violations();
        assert!(v.contains(&Violation::Ordering { slot: Slot::Input1, constraint: 1 }), "{v:?}");
    }

    #[test]
    fn ordering_constraint_three() {
        let mut f = default_flc1();
        f.input1.terms.low.b = 30.0;
        f.input1.terms.medium.a = 40.0;
        let v = f.violations();
        assert!(v.contains(&Violation::Ordering { slot: Slot::Input1, constraint: 3 }), "{v:?}");
        // a_M = c_L leaves a hole at that point instead
        f.input1.terms.medium.a = 30.0;
        let v = f.violations();
        assert!(!v.contains(&Violation::Ordering { slot: Slot::Input1, constraint: 3 }));
        assert!(v.iter().any(|x| matches!(x, Violation::CoverageGap { slot: Slot::Input1, .. })));
    }

    #[test]
    fn all_violations_reported() {
        let mut f = default_flc2();
        f.input2.terms.low.b = 0.6;
        f.input2.terms.high.a = 1.1;
        f.rules.0[0][0] = 1.5;
        let v = f.violations();
        assert!(v.len() >= 3, "{v:?}");
        assert!(v.contains(&Violation::RuleOutOfRange { row: Term::Low, col: Term::Low, value: 1.5 }));
    }

    #[test]
    fn clipped_centroid_of_symmetric_triangle_is_peak() {
        let t = tri(0.0, 0.5, 1.0);
        for h in [0.1, 0.5, 1.0] {
            assert!((t.clipped_centroid(h) - 0.5).abs() < 1e-12);
        }
        // full right-angled triangle (0,0,1): centroid 1/3
        assert!((tri(0.0, 0.0, 1.0).clipped_centroid(1.0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn clipped_centroid_matches_quadrature() {
        let t = tri(0.1, 0.25, 0.9);
        let h = 0.4;
        let n = 200_000;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            let mu = t.eval(x).min(h);
            num += x * mu;
            den += mu;
        }
        assert!((t.clipped_centroid(h) - num / den).abs() < 1e-6);
    }

    #[test]
    fn mamdani_mode_runs_on_defaults() {
        let mut f = default_flc2();
        f.mode = InferenceMode::MamdaniClipped;
        let y = f.infer(0.3, 0.8).unwrap();
        assert!((0.0..=1.0).contains(&y));
        // single rule firing at full strength: centroid of the High output
        // shoulder (0.5, 1, 1) is 5/6
        assert!((f.infer(1.0, 1.0).unwrap() - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_and_shape() {
        let f = default_flc1();
        let text = f.to_json();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["input1"]["terms"]["Medium"], serde_json::json!([0.0, 50.0, 100.0]));
        assert_eq!(doc["input1"]["universe"], serde_json::json!([0.0, 100.0]));
        assert_eq!(doc["mode"], "Singleton");
        assert_eq!(doc["tnorm"], "Min");
        assert_eq!(doc["rules"][1][2], 0.75);
        assert_eq!(FlcSpec::from_json(&text).unwrap(), f);
    }

    #[test]
    fn json_rejects_invalid_controller() {
        let mut doc: serde_json::Value = serde_json::from_str(&default_flc1().to_json()).unwrap();
        doc["input1"]["terms"]["Low"] = serde_json::json!([0.0, 80.0, 90.0]);
        let err = FlcSpec::from_json(&doc.to_string()).unwrap_err();
        assert!(matches!(err, FuzzyError::Invalid(_)));
        doc["input1"]["terms"]["Low"] = serde_json::json!([5.0, 0.0, 90.0]);
        assert!(matches!(FlcSpec::from_json(&doc.to_string()), Err(FuzzyError::Json(_))));
    }
}
