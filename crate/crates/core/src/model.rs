//! Shared domain types: error typology, annotations, judgments and the
//! campaign-level [`Project`], plus the invariant checker.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Top-level MQM error category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Accuracy,
    Fluency,
    Style,
    Terminology,
    LocaleConvention,
    NonTranslation,
    Other,
    SourceIssue,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Accuracy,
        Category::Fluency,
        Category::Style,
        Category::Terminology,
        Category::LocaleConvention,
        Category::NonTranslation,
        Category::Other,
        Category::SourceIssue,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::Accuracy => "Accuracy",
            Category::Fluency => "Fluency",
            Category::Style => "Style",
            Category::Terminology => "Terminology",
            Category::LocaleConvention => "Locale Convention",
            Category::NonTranslation => "Non-Translation",
            Category::Other => "Other",
            Category::SourceIssue => "Source Issue",
        }
    }

    pub fn subcategories(self) -> &'static [Subcategory] {
        use Subcategory::*;
        match self {
            Category::Accuracy => &[
                Reinterpretation,
                Mistranslation,
                GenderMismatch,
                Untranslated,
                Addition,
                Omission,
            ],
            Category::Fluency => &[
                Inconsistency,
                Grammar,
                Register,
                Spelling,
                TextBreaking,
                Punctuation,
                CharacterEncoding,
            ],
            Category::Style => &[UnnaturalOrAwkward, BadSentenceStructure, ArchaicOrObscureWordChoice],
            Category::Terminology => &[InappropriateForContext, InconsistentTerminology],
            Category::LocaleConvention => &[
                AddressFormat,
                DateFormat,
                CurrencyFormat,
                TelephoneFormat,
                TimeFormat,
                NameFormat,
            ],
            Category::NonTranslation | Category::Other | Category::SourceIssue => &[],
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subcategory {
    Reinterpretation,
    Mistranslation,
    GenderMismatch,
    Untranslated,
    Addition,
    Omission,
    Inconsistency,
    Grammar,
    Register,
    Spelling,
    TextBreaking,
    Punctuation,
    CharacterEncoding,
    UnnaturalOrAwkward,
    BadSentenceStructure,
    ArchaicOrObscureWordChoice,
    InappropriateForContext,
    InconsistentTerminology,
    AddressFormat,
    DateFormat,
    CurrencyFormat,
    TelephoneFormat,
    TimeFormat,
    NameFormat,
}

impl Subcategory {
    pub fn parent(self) -> Category {
        use Subcategory::*;
        match self {
            Reinterpretation | Mistranslation | GenderMismatch | Untranslated | Addition | Omission => {
                Category::Accuracy
            }
            Inconsistency | Grammar | Register | Spelling | TextBreaking | Punctuation | CharacterEncoding => {
                Category::Fluency
            }
            UnnaturalOrAwkward | BadSentenceStructure | ArchaicOrObscureWordChoice => Category::Style,
            InappropriateForContext | InconsistentTerminology => Category::Terminology,
            AddressFormat | DateFormat | CurrencyFormat | TelephoneFormat | TimeFormat | NameFormat => {
                Category::LocaleConvention
            }
        }
    }

    pub fn label(self) -> &'static str {
        use Subcategory::*;
        match self {
            Reinterpretation => "Reinterpretation",
            Mistranslation => "Mistranslation",
            GenderMismatch => "Gender Mismatch",
            Untranslated => "Untranslated",
            Addition => "Addition",
            Omission => "Omission",
            Inconsistency => "Inconsistency",
            Grammar => "Grammar",
            Register => "Register",
            Spelling => "Spelling",
            TextBreaking => "Text-Breaking",
            Punctuation => "Punctuation",
            CharacterEncoding => "Character Encoding",
            UnnaturalOrAwkward => "Unnatural or Awkward",
            BadSentenceStructure => "Bad Sentence Structure",
            ArchaicOrObscureWordChoice => "Archaic or Obscure Word Choice",
            InappropriateForContext => "Inappropriate for Context",
            InconsistentTerminology => "Inconsistent",
            AddressFormat => "Address Format",
            DateFormat => "Date Format",
            CurrencyFormat => "Currency Format",
            TelephoneFormat => "Telephone Format",
            TimeFormat => "Time Format",
            NameFormat => "Name Format",
        }
    }
}

/// A category with an optional subcategory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ErrorCategory {
    pub category: Category,
    pub subcategory: Option<Subcategory>,
}

impl ErrorCategory {
    pub const fn top(category: Category) -> Self {
        ErrorCategory {
            category,
            subcategory: None,
        }
    }

    pub fn sub(subcategory: Subcategory) -> Self {
        ErrorCategory {
            category: subcategory.parent(),
            subcategory: Some(subcategory),
        }
    }

    pub fn is_valid(&self) -> bool {
        match self.subcategory {
            None => true,
            Some(s) => s.parent() == self.category,
        }
    }

    /// Canonical path string, e.g. `Accuracy/Mistranslation`.
    pub fn path(&self) -> String {
        match self.subcategory {
            Some(s) => format!("{}/{}", self.category.label(), s.label()),
            None => self.category.label().to_string(),
        }
    }

    /// Parses a `/`-separated path, ignoring case, spaces, hyphens and
    /// underscores. Accepts a few spellings used by public WMT releases.
    pub fn parse(path: &str) -> Option<Self> {
        let mut parts = path.splitn(2, '/');
        let head = squash(parts.next()?);
        let category = match head.as_str() {
            "accuracy" => Category::Accuracy,
            "fluency" => Category::Fluency,
            "style" => Category::Style,
            "terminology" => Category::Terminology,
            "localeconvention" | "locale" => Category::LocaleConvention,
            "nontranslation" => Category::NonTranslation,
            "other" => Category::Other,
            "sourceissue" | "sourceerror" | "source" => Category::SourceIssue,
            _ => return None,
        };
        let Some(tail) = parts.next() else {
            return Some(ErrorCategory::top(category));
        };
        let tail = squash(tail);
        if tail.is_empty() {
            return Some(ErrorCategory::top(category));
        }
        let alias = match (category, tail.as_str()) {
            (Category::Style, "awkward") => Some(Subcategory::UnnaturalOrAwkward),
            (Category::Terminology, "inconsistentuseofterminology") => Some(Subcategory::InconsistentTerminology),
            _ => None,
        };
        let sub = alias.or_else(|| {
            category
                .subcategories()
                .iter()
                .copied()
                .find(|s| squash(s.label()) == tail)
        })?;
        Some(ErrorCategory::sub(sub))
    }
}

fn squash(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.path())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Major,
    Minor,
}

impl Severity {
    pub fn label(self) -> &'static str {
        match self {
            Severity::Major => "Major",
            Severity::Minor => "Minor",
        }
    }
}

/// Annotation setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "MQM")]
    Mqm,
    #[serde(rename = "SXS_MQM")]
    SxsMqm,
    #[serde(rename = "SXS_RR")]
    SxsRr,
}

impl Setting {
    pub const ALL: [Setting; 3] = [Setting::Mqm, Setting::SxsMqm, Setting::SxsRr];

    pub fn name(self) -> &'static str {
        match self {
            Setting::Mqm => "MQM",
            Setting::SxsMqm => "SXS_MQM",
            Setting::SxsRr => "SXS_RR",
        }
    }

    pub fn is_mqm(self) -> bool {
        matches!(self, Setting::Mqm | Setting::SxsMqm)
    }

    pub fn parse(s: &str) -> Option<Setting> {
        match squash(s).as_str() {
            "mqm" => Some(Setting::Mqm),
            "sxsmqm" => Some(Setting::SxsMqm),
            "sxsrr" | "rr" => Some(Setting::SxsRr),
            _ => None,
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SegmentRef {
    pub doc_id: String,
    pub seg_id: String,
}

impl SegmentRef {
    pub fn new(doc_id: impl Into<String>, seg_id: impl Into<String>) -> Self {
        SegmentRef {
            doc_id: doc_id.into(),
            seg_id: seg_id.into(),
        }
    }
}

impl fmt::Display for SegmentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.doc_id, self.seg_id)
    }
}

/// One system's translation of one segment. Texts are NFC and marker-free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationUnit {
    pub system: String,
    pub segment: SegmentRef,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

/// One marked error. Offsets are Unicode scalar values on the clean text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorSpan {
    pub side: Side,
    pub start: usize,
    pub end: usize,
    pub category: ErrorCategory,
    pub severity: Severity,
    /// Whole-segment error with no identifiable span; `start == end == 0`.
    #[serde(default)]
    pub unspecified_span: bool,
}

impl ErrorSpan {
    pub fn target(start: usize, end: usize, category: ErrorCategory, severity: Severity) -> Self {
        ErrorSpan {
            side: Side::Target,
            start,
            end,
            category,
            severity,
            unspecified_span: false,
        }
    }

    pub fn unspecified(category: ErrorCategory, severity: Severity) -> Self {
        let side = if category.category == Category::SourceIssue {
            Side::Source
        } else {
            Side::Target
        };
        ErrorSpan {
            side,
            start: 0,
            end: 0,
            category,
            severity,
            unspecified_span: true,
        }
    }

    fn order_key(&self) -> impl Ord + '_ {
        (
            self.side,
            self.start,
            self.end,
            self.unspecified_span,
            self.category,
            self.severity,
        )
    }
}

/// One annotator's error list for one translation in an MQM setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MqmAnnotation {
    pub annotator: String,
    pub setting: Setting,
    pub system: String,
    pub segment: SegmentRef,
    pub errors: Vec<ErrorSpan>,
    /// The other system shown alongside; set iff `setting == SxsMqm`.
    pub pair_partner: Option<String>,
}

impl MqmAnnotation {
    pub fn sort_errors(&mut self) {
        self.errors.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
    }

    fn order_key(&self) -> impl Ord + '_ {
        (
            self.setting,
            &self.segment,
            &self.system,
            &self.annotator,
            &self.pair_partner,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RrValue {
    AMuchBetter,
    ABetter,
    Same,
    BBetter,
    BMuchBetter,
}

impl RrValue {
    pub const ALL: [RrValue; 5] = [
        RrValue::AMuchBetter,
        RrValue::ABetter,
        RrValue::Same,
        RrValue::BBetter,
        RrValue::BMuchBetter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RrValue::AMuchBetter => "a_much_better",
            RrValue::ABetter => "a_better",
            RrValue::Same => "same",
            RrValue::BBetter => "b_better",
            RrValue::BMuchBetter => "b_much_better",
        }
    }

    pub fn parse(s: &str) -> Option<RrValue> {
        RrValue::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
    }

    /// The same judgment with A and B exchanged.
    pub fn flipped(self) -> RrValue {
        match self {
            RrValue::AMuchBetter => RrValue::BMuchBetter,
            RrValue::ABetter => RrValue::BBetter,
            RrValue::Same => RrValue::Same,
            RrValue::BBetter => RrValue::ABetter,
            RrValue::BMuchBetter => RrValue::AMuchBetter,
        }
    }
}

/// Five-point side-by-side preference between two systems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RrJudgment {
    pub annotator: String,
    pub segment: SegmentRef,
    pub system_a: String,
    pub system_b: String,
    pub value: RrValue,
}

impl RrJudgment {
    fn order_key(&self) -> impl Ord + '_ {
        (
            &self.segment,
            &self.system_a,
            &self.system_b,
            &self.annotator,
            self.value,
        )
    }

    /// Value oriented so that "A" refers to `system_a`; `None` if the
    /// judgment does not compare exactly these two systems.
    pub fn oriented(&self, system_a: &str, system_b: &str) -> Option<RrValue> {
        if self.system_a == system_a && self.system_b == system_b {
            Some(self.value)
        } else if self.system_a == system_b && self.system_b == system_a {
            Some(self.value.flipped())
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComparisonLabel {
    ABetter,
    Tie,
    BBetter,
}

impl ComparisonLabel {
    pub fn flipped(self) -> Self {
        match self {
            ComparisonLabel::ABetter => ComparisonLabel::BBetter,
            ComparisonLabel::Tie => ComparisonLabel::Tie,
            ComparisonLabel::BBetter => ComparisonLabel::ABetter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    /// Free-form document name (the `doc` column of WMT TSVs).
    pub name: String,
    pub segments: Vec<String>,
}

/// A whole annotation campaign.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Project {
    pub language_pair: String,
    pub documents: Vec<Document>,
    pub systems: BTreeSet<String>,
    pub units: Vec<TranslationUnit>,
    pub mqm: Vec<MqmAnnotation>,
    pub rr: Vec<RrJudgment>,
    pub designated_pairs: Vec<(String, String)>,
    pub annotators: BTreeSet<String>,
}

impl Project {
    /// Sorts every list into its canonical order so structurally equal
    /// projects compare equal.
    pub fn canonicalize(&mut self) {
        let doc_rank: HashMap<&str, usize> = self
            .documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.as_str(), i))
            .collect();
        let seg_rank: HashMap<(&str, &str), usize> = self
            .documents
            .iter()
            .flat_map(|d| {
                d.segments
                    .iter()
                    .enumerate()
                    .map(move |(i, s)| ((d.id.as_str(), s.as_str()), i))
            })
            .collect();
        let mut units = std::mem::take(&mut self.units);
        units.sort_by_cached_key(|u| {
            (
                doc_rank.get(u.segment.doc_id.as_str()).copied(),
                seg_rank
                    .get(&(u.segment.doc_id.as_str(), u.segment.seg_id.as_str()))
                    .copied(),
                u.segment.clone(),
                u.system.clone(),
            )
        });
        self.units = units;
        for a in &mut self.mqm {
            a.sort_errors();
        }
        self.mqm.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
        self.rr.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
    }

    pub fn segments(&self) -> impl Iterator<Item = SegmentRef> + '_ {
        self.documents
            .iter()
            .flat_map(|d| d.segments.iter().map(move |s| SegmentRef::new(d.id.clone(), s.clone())))
    }

    pub fn unit(&self, system: &str, segment: &SegmentRef) -> Option<&TranslationUnit> {
        self.units.iter().find(|u| u.system == system && &u.segment == segment)
    }

    pub fn unit_index(&self) -> HashMap<(&str, &SegmentRef), &TranslationUnit> {
        self.units
            .iter()
            .map(|u| ((u.system.as_str(), &u.segment), u))
            .collect()
    }

    pub fn annotations(&self, setting: Setting) -> impl Iterator<Item = &MqmAnnotation> {
        self.mqm.iter().filter(move |a| a.setting == setting)
    }

    pub fn has_setting(&self, setting: Setting) -> bool {
        match setting {
            Setting::SxsRr => !self.rr.is_empty(),
            s => self.mqm.iter().any(|a| a.setting == s),
        }
    }

    /// Systems that take part in at least one designated pair, in first
    /// appearance order.
    pub fn paired_systems(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.designated_pairs
            .iter()
            .flat_map(|(a, b)| [a, b])
            .filter(|s| seen.insert(s.as_str()))
            .cloned()
            .collect()
    }

    pub fn is_designated(&self, a: &str, b: &str) -> bool {
        self.designated_pairs
            .iter()
            .any(|(x, y)| (x == a && y == b) || (x == b && y == a))
    }
}

/// One broken invariant, with a stable code and a location description.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub location: String,
}

impl Violation {
    pub fn new(code: &str, location: impl Into<String>) -> Self {
        Violation {
            code: code.to_string(),
            location: location.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.code, self.location)
    }
}

const MARKERS: [&str; 2] = ["<v>", "</v>"];

/// Checks every model invariant. Returns violations sorted, so the result
/// does not depend on the order of annotation lists.
pub fn validate_project(project: &Project) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut segments: HashSet<SegmentRef> = HashSet::new();
    for doc in &project.documents {
        if doc.id.is_empty() {
            out.push(Violation::new("E_EMPTY_ID", "document"));
        }
        for s in &doc.segments {
            if s.is_empty() {
                out.push(Violation::new("E_EMPTY_ID", format!("document {}", doc.id)));
            }
            if !segments.insert(SegmentRef::new(doc.id.clone(), s.clone())) {
                out.push(Violation::new("E_DUPLICATE_SEGMENT", format!("{}:{}", doc.id, s)));
            }
        }
    }

    let mut units: HashMap<(&str, &SegmentRef), &TranslationUnit> = HashMap::new();
    for u in &project.units {
        let loc = format!("unit {} {}", u.system, u.segment);
        if !segments.contains(&u.segment) {
            out.push(Violation::new("E_UNKNOWN_SEGMENT", loc.clone()));
        }
        if !project.systems.contains(&u.system) {
            out.push(Violation::new("E_UNKNOWN_SYSTEM", loc.clone()));
        }
        if MARKERS.iter().any(|m| u.target.contains(m) || u.source.contains(m)) {
            out.push(Violation::new("E_MARKER_IN_TEXT", loc.clone()));
        }
        if units.insert((u.system.as_str(), &u.segment), u).is_some() {
            out.push(Violation::new("E_DUPLICATE_UNIT", loc));
        }
    }

    for (a, b) in &project.designated_pairs {
        let loc = format!("pair {a}/{b}");
        if a == b {
            out.push(Violation::new("E_SELF_PAIR", loc.clone()));
        }
        if !project.systems.contains(a) || !project.systems.contains(b) {
            out.push(Violation::new("E_DESIGNATED_PAIR", loc));
        }
    }

    let mut keys = HashSet::new();
    for ann in &project.mqm {
        let loc = format!(
            "{} {} {} {}{}",
            ann.setting,
            ann.annotator,
            ann.system,
            ann.segment,
            ann.pair_partner
                .as_deref()
                .map(|p| format!(" vs {p}"))
                .unwrap_or_default()
        );
        if !project.annotators.contains(&ann.annotator) {
            out.push(Violation::new("E_UNKNOWN_ANNOTATOR", loc.clone()));
        }
        if !keys.insert((
            ann.setting,
            &ann.annotator,
            &ann.system,
            &ann.segment,
            &ann.pair_partner,
        )) {
            out.push(Violation::new("E_DUPLICATE_ANNOTATION", loc.clone()));
        }
        match (ann.setting, &ann.pair_partner) {
            (Setting::Mqm, None) => {}
            (Setting::SxsMqm, Some(p)) => {
                if p == &ann.system {
                    out.push(Violation::new("E_SELF_PAIR", loc.clone()));
                } else if !units.contains_key(&(p.as_str(), &ann.segment)) {
                    out.push(Violation::new("E_UNKNOWN_UNIT", format!("{loc} (partner)")));
                }
            }
            (Setting::SxsRr, _) => out.push(Violation::new("E_SETTING", loc.clone())),
            _ => out.push(Violation::new("E_PAIR_PARTNER", loc.clone())),
        }
        let Some(unit) = units.get(&(ann.system.as_str(), &ann.segment)) else {
            out.push(Violation::new("E_UNKNOWN_UNIT", loc));
            continue;
        };
        out.extend(validate_errors(unit, &ann.errors, &loc));
        if ann
            .errors
            .windows(2)
            .any(|w| (w[0].side, w[0].start, w[0].end) > (w[1].side, w[1].start, w[1].end))
        {
            out.push(Violation::new("E_ERRORS_UNSORTED", loc));
        }
    }

    for j in &project.rr {
        let loc = format!("rr {} {} {}/{}", j.annotator, j.segment, j.system_a, j.system_b);
        if !project.annotators.contains(&j.annotator) {
            out.push(Violation::new("E_UNKNOWN_ANNOTATOR", loc.clone()));
        }
        if j.system_a == j.system_b {
            out.push(Violation::new("E_SELF_PAIR", loc.clone()));
        }
        if !units.contains_key(&(j.system_a.as_str(), &j.segment))
            || !units.contains_key(&(j.system_b.as_str(), &j.segment))
        {
            out.push(Violation::new("E_UNKNOWN_UNIT", loc));
        }
    }

    out.sort();
    out
}

/// Checks error spans against the unit they annotate: category shape,
/// severity and side rules, and span bounds. Ordering is not checked.
pub fn validate_errors(unit: &TranslationUnit, errors: &[ErrorSpan], loc: &str) -> Vec<Violation> {
    let mut out = Vec::new();
    let target_len = unit.target.chars().count();
    let source_len = unit.source.chars().count();
    for (i, span) in errors.iter().enumerate() {
        let sloc = format!("{loc} error {i}");
        if !span.category.is_valid() {
            out.push(Violation::new("E_SUBCATEGORY", sloc.clone()));
        }
        if span.category.category == Category::NonTranslation && span.severity != Severity::Major {
            out.push(Violation::new("E_SEVERITY_NONTRANSLATION", sloc.clone()));
        }
        let is_source_issue = span.category.category == Category::SourceIssue;
        if (span.side == Side::Source) != is_source_issue {
            out.push(Violation::new("E_SIDE_CATEGORY", sloc.clone()));
        }
        let len = match span.side {
            Side::Source => source_len,
            Side::Target => target_len,
        };
        if span.unspecified_span {
            if span.start != 0 || span.end != 0 {
                out.push(Violation::new("E_SPAN_BOUNDS", sloc.clone()));
            }
        } else if span.start > span.end || span.end > len {
            out.push(Violation::new("E_SPAN_BOUNDS", sloc.clone()));
        } else if span.start == span.end {
            out.push(Violation::new("E_SPAN_EMPTY", sloc.clone()));
        }
    }
    out
}

#[cfg(test)]
pub(crate) use tests::tiny_project;
