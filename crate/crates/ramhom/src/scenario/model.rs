use crate::base::{BaseRing, FgAbelianShape};
use crate::graded::family::{Constraint, LinForm};
use crate::graded::Window;

/// The computation families a scenario can describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Kind {
    TorThh,
    TateCyclic,
    TateSigma3,
    Discriminant,
    ConeLes,
    NormVerdict,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::TorThh => "tor_thh",
            Kind::TateCyclic => "tate_cyclic",
            Kind::TateSigma3 => "tate_sigma3",
            Kind::Discriminant => "discriminant",
            Kind::ConeLes => "cone_les",
            Kind::NormVerdict => "norm_verdict",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Some(match s {
            "tor_thh" => Kind::TorThh,
            "tate_cyclic" => Kind::TateCyclic,
            "tate_sigma3" => Kind::TateSigma3,
            "discriminant" => Kind::Discriminant,
            "cone_les" => Kind::ConeLes,
            "norm_verdict" => Kind::NormVerdict,
            _ => return None,
        })
    }
}

/// A polynomial in named generators with rational coefficients, still
/// unresolved against a generator list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprPoly {
    /// term = (coefficient, [(generator name, exponent)])
    pub terms: Vec<(crate::base::Rat, Vec<(String, i64)>)>,
}

impl ExprPoly {
    pub fn zero() -> Self {
        ExprPoly { terms: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenDecl {
    pub name: String,
    pub degree: i64,
    pub filtration: i64,
    pub weight: u8,
    pub invertible: bool,
    pub square_zero: bool,
    pub range: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraDecl {
    pub name: String,
    pub gens: Vec<GenDecl>,
    /// `gen ^ power -> rhs`
    pub rules: Vec<(String, i64, ExprPoly)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyDecl {
    pub name: String,
    pub params: Vec<String>,
    pub degree: LinForm,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDecl {
    pub gen: String,
    pub family: String,
    pub guard: Vec<Constraint>,
    /// zero action when absent
    pub value: Option<(LinForm, String, Vec<LinForm>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModuleBody {
    Quotient {
        rules: Vec<(String, i64, ExprPoly)>,
    },
    Families {
        families: Vec<FamilyDecl>,
        actions: Vec<ActionDecl>,
    },
    Sum(Vec<String>),
    Ranks(Vec<(i64, usize)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleDecl {
    pub name: String,
    pub over: String,
    pub body: ModuleBody,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionDecl {
    pub name: String,
    pub over: String,
    pub of: String,
    /// `(shift, map entry)` for stages 1, 2, ...
    pub stages: Vec<(i64, ExprPoly)>,
    pub periodic: Option<(usize, usize, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionKindDecl {
    Trivial,
    SignByWeight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TateDecl {
    pub module: String,
    pub order: u64,
    pub action: ActionKindDecl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorDecl {
    pub resolution: String,
    pub coefficients: String,
    pub max_filtration: usize,
    pub verify_resolution: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbientDecl {
    pub name: String,
    pub n: i64,
    pub m: i64,
    pub weight: u8,
    pub range: Option<(i64, i64)>,
    pub square_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageFamilyDecl {
    pub name: String,
    pub params: Vec<String>,
    /// `(factor name, power form)`
    pub powers: Vec<(String, LinForm)>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageDecl {
    pub index: i64,
    /// Coefficient ring override (default: the scenario base).
    pub coefficients: Option<BaseRing>,
    pub ambient: Vec<AmbientDecl>,
    /// `(factor name, monomial in ambient gens)`
    pub factors: Vec<(String, Vec<(String, i64)>)>,
    pub families: Vec<PageFamilyDecl>,
    /// Compare the computed predecessor page by ranks only or also names.
    pub compare_names: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiffRuleDecl {
    Factor {
        factor: String,
        value: ExprPoly,
    },
    Family {
        family: String,
        guard: Vec<Constraint>,
        coeff: LinForm,
        target: String,
        target_params: Vec<LinForm>,
        /// A cross-check against the Leibniz extension rather than a rule.
        check_only: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffDecl {
    pub r: i64,
    pub rules: Vec<DiffRuleDecl>,
    pub truncate_outside_support: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeDegreeDecl {
    pub degree: i64,
    pub source: FgAbelianShape,
    pub target: FgAbelianShape,
    /// Row-major matrix entries; absent means the zero map.
    pub matrix: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeDecl {
    pub degrees: Vec<ConeDegreeDecl>,
    pub torsion_free_hints: Vec<(i64, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscDecl {
    Trace {
        var_degree: i64,
        modulus: i64,
        coeff: i64,
        power_mult: i64,
        power_off: i64,
        arg_includes_var_power: bool,
        /// `(label, shift)` pairs
        source: Vec<(i64, i64)>,
        target: Vec<(i64, i64)>,
    },
    ShiftMap {
        var_degree: i64,
        source_shift: i64,
        target_shift: i64,
        power_shift: i64,
        coeff: i64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectPattern {
    pub name: String,
    pub params: Vec<String>,
    /// bidegree forms (filtration, internal); abutment patterns use only
    /// the internal form.
    pub n_form: Option<LinForm>,
    pub m_form: LinForm,
    pub constraints: Vec<Constraint>,
    pub shape: FgAbelianShape,
    /// Optional name template with `{affine}` holes.
    pub name_template: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpectBlock {
    Page {
        r: i64,
        compare_names: bool,
        patterns: Vec<ExpectPattern>,
        exhaustive: bool,
    },
    Abutment {
        patterns: Vec<ExpectPattern>,
        exhaustive: bool,
    },
    Degrees {
        entries: Vec<(i64, ExpectedShape)>,
        default_zero: bool,
    },
    Verdicts {
        nontrivial: Vec<u64>,
        trivial: Vec<u64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpectedShape {
    Exact(FgAbelianShape),
    Ambiguous(Vec<FgAbelianShape>),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Hints {
    pub edge_protected: bool,
    /// Final-page collapse search bound.
    pub r_max: i64,
}

/// A declarative description of one computation, parsed from a `.scn`
/// file. Engine objects are resolved from the declarations at run time.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    pub tags: Vec<String>,
    pub citation: String,
    pub base: BaseRing,
    pub degree_window: Window,
    pub filtration_window: Option<Window>,
    pub abutment_window: Option<Window>,
    pub algebras: Vec<AlgebraDecl>,
    pub modules: Vec<ModuleDecl>,
    pub resolutions: Vec<ResolutionDecl>,
    pub tor: Option<TorDecl>,
    pub tate: Option<TateDecl>,
    pub pages: Vec<PageDecl>,
    pub diffs: Vec<DiffDecl>,
    pub cone: Option<ConeDecl>,
    pub disc: Option<DiscDecl>,
    pub norm_range: Option<(u64, u64)>,
    pub expects: Vec<ExpectBlock>,
    pub hints: Hints,
}

impl Scenario {
    pub fn algebra(&self, name: &str) -> Option<&AlgebraDecl> {
        self.algebras.iter().find(|a| a.name == name)
    }

    pub fn module(&self, name: &str) -> Option<&ModuleDecl> {
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn resolution(&self, name: &str) -> Option<&ResolutionDecl> {
        self.resolutions.iter().find(|r| r.name == name)
    }
}
