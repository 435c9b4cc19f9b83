//! XML interchange for [`AmaltheaModel`].
//!
//! The dialect (normatively documented in `docs/xml-format.md`) is a
//! `<amalthea>` root with a `<swModel>` section — `<label>`, `<runnable>`
//! (with ordered `<read>`/`<write>` children), `<stimulus>`, `<task>`
//! (with ordered `<call>` children) — and a `<hwModel>` section —
//! `<coreType>`, `<quartz>`, `<core>`. All references use entity ids and
//! may point forward; parsing therefore runs in two passes (declare, then
//! resolve). Times are whole microseconds, sizes bits, execution bounds
//! instruction counts, frequencies Hz.
//!
//! Parsing is strict: unknown elements and unknown unqualified attributes
//! are errors, and every error of a pass is collected before the pass
//! fails, so one fix-up cycle surfaces everything wrong at that stage.
//! Attributes qualified by a foreign namespace are ignored with a warning,
//! leaving room for sidecar tooling annotations. A parsed model always
//! satisfies [`AmaltheaModel::validate`]; symmetrically, `serialize`
//! refuses invalid models and returns the validation report instead.
//! Serialization is deterministic — element order is model order and the
//! attribute order is fixed — so equal models produce byte-equal
//! documents.

use std::fmt;

use roxmltree::{Document, Node};

use crate::model::{AmaltheaModel, ModelBuilder, StimulusKind, Violation};

/// Classification of a parse diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Malformed XML or a structural/uniqueness rule breach.
    Syntax,
    /// An element the dialect does not define.
    UnknownElement,
    /// A required attribute is absent.
    MissingAttribute,
    /// An id reference to an entity that is not declared.
    BadReference,
    /// An attribute that must be numeric is not, or is out of range.
    BadNumber,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UnknownElement => "unknown element",
            ParseErrorKind::MissingAttribute => "missing attribute",
            ParseErrorKind::BadReference => "bad reference",
            ParseErrorKind::BadNumber => "bad number",
        })
    }
}

/// One parse diagnostic, located in the source document (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.kind, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A non-fatal parse note (currently: ignored foreign-namespace
/// attributes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: warning: {}", self.line, self.column, self.message)
    }
}

/// Successful parse: the model plus any warnings emitted along the way.
#[derive(Debug)]
pub struct Parsed {
    pub model: AmaltheaModel,
    pub warnings: Vec<ParseWarning>,
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Raw reference: the referenced id plus the byte offset of the referencing
/// attribute for diagnostics.
type RawRef<'i> = (&'i str, usize);

#[derive(Default)]
struct SwDecls<'i> {
    labels: Vec<LabelDecl<'i>>,
    runnables: Vec<RunnableDecl<'i>>,
    stimuli: Vec<StimulusDecl<'i>>,
    tasks: Vec<TaskDecl<'i>>,
}

struct LabelDecl<'i> {
    id: &'i str,
    name: &'i str,
    bit_length: u32,
    offset: usize,
}

struct RunnableDecl<'i> {
    id: &'i str,
    name: &'i str,
    size_bits: u64,
    bcet: u64,
    wcet: u64,
    reads: Vec<RawRef<'i>>,
    writes: Vec<RawRef<'i>>,
    offset: usize,
}

struct StimulusDecl<'i> {
    id: &'i str,
    kind: StimulusRaw<'i>,
    offset: usize,
}

enum StimulusRaw<'i> {
    Periodic { period_ns: u64, offset_ns: u64 },
    Sporadic { min_inter_arrival_ns: u64 },
    Single { time_ns: u64 },
    Pattern { times_ns: Vec<u64> },
    InterProcess { trigger_label: RawRef<'i>, injection_period_ns: Option<u64> },
}

struct TaskDecl<'i> {
    id: &'i str,
    name: &'i str,
    priority: u32,
    stimulus: RawRef<'i>,
    calls: Vec<RawRef<'i>>,
    offset: usize,
}

#[derive(Default)]
struct HwDecls<'i> {
    core_types: Vec<(&'i str, u64, usize)>, // id, ticks_per_instruction, offset
    quartzes: Vec<(&'i str, u64, usize)>,   // id, frequency_hz, offset
    cores: Vec<CoreDecl<'i>>,
}

struct CoreDecl<'i> {
    id: &'i str,
    name: &'i str,
    core_type: RawRef<'i>,
    quartz: RawRef<'i>,
    position: (u32, u32),
    offset: usize,
}

struct Ctx<'a, 'i> {
    doc: &'a Document<'i>,
    errors: Vec<ParseError>,
    warnings: Vec<ParseWarning>,
}

impl<'a, 'i> Ctx<'a, 'i> {
    fn error_at(&mut self, offset: usize, kind: ParseErrorKind, message: String) {
        let pos = self.doc.text_pos_at(offset);
        self.errors.push(ParseError { line: pos.row, column: pos.col, kind, message });
    }

    fn error(&mut self, node: Node, kind: ParseErrorKind, message: String) {
        self.error_at(node.range().start, kind, message);
    }

    /// Byte offset of an attribute on `node`, falling back to the element.
    fn attr_offset(&self, node: Node<'a, 'i>, name: &str) -> usize {
        node.attributes()
            .find(|a| a.namespace().is_none() && a.name() == name)
            .map(|a| a.range().start)
            .unwrap_or_else(|| node.range().start)
    }

    /// Flags unqualified attributes outside `allowed` as errors and
    /// foreign-namespace attributes as ignored-with-warning.
    fn check_attributes(&mut self, node: Node<'a, 'i>, allowed: &[&str]) {
        for attr in node.attributes() {
            if attr.namespace().is_some() {
                let pos = self.doc.text_pos_at(attr.range().start);
                self.warnings.push(ParseWarning {
                    line: pos.row,
                    column: pos.col,
                    message: format!(
                        "ignoring namespaced attribute {:?} on <{}>",
                        attr.name(),
                        node.tag_name().name()
                    ),
                });
            } else if !allowed.contains(&attr.name()) {
                self.error_at(
                    attr.range().start,
                    ParseErrorKind::Syntax,
                    format!("unknown attribute {:?} on <{}>", attr.name(), node.tag_name().name()),
                );
            }
        }
    }

    fn require(&mut self, node: Node<'a, 'i>, name: &str) -> Option<&'a str> {
        let value = node.attributes().find(|a| a.namespace().is_none() && a.name() == name);
        if value.is_none() {
            self.error(
                node,
                ParseErrorKind::MissingAttribute,
                format!("<{}> requires attribute {:?}", node.tag_name().name(), name),
            );
        }
        value.map(|a| a.value())
    }

    fn require_u64(&mut self, node: Node<'a, 'i>, name: &str) -> Option<u64> {
        let raw = self.require(node, name)?;
        self.parse_u64(node, name, raw)
    }

    fn optional_u64(&mut self, node: Node<'a, 'i>, name: &str) -> Option<u64> {
        let raw = node
            .attributes()
            .find(|a| a.namespace().is_none() && a.name() == name)
            .map(|a| a.value())?;
        self.parse_u64(node, name, raw)
    }

    fn parse_u64(&mut self, node: Node<'a, 'i>, name: &str, raw: &str) -> Option<u64> {
        match raw.parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error_at(
                    self.attr_offset(node, name),
                    ParseErrorKind::BadNumber,
                    format!("attribute {:?} must be a non-negative integer, got {:?}", name, raw),
                );
                None
            }
        }
    }

    fn require_u32(&mut self, node: Node<'a, 'i>, name: &str) -> Option<u32> {
        let wide = self.require_u64(node, name)?;
        match u32::try_from(wide) {
            Ok(v) => Some(v),
            Err(_) => {
                self.error_at(
                    self.attr_offset(node, name),
                    ParseErrorKind::BadNumber,
                    format!("attribute {:?} value {} is out of range", name, wide),
                );
                None
            }
        }
    }

    /// Parses a whole-microsecond attribute into nanoseconds.
    fn require_us(&mut self, node: Node<'a, 'i>, name: &str) -> Option<u64> {
        let us = self.require_u64(node, name)?;
        self.scale_us(node, name, us)
    }

    fn optional_us(&mut self, node: Node<'a, 'i>, name: &str) -> Option<u64> {
        let us = self.optional_u64(node, name)?;
        self.scale_us(node, name, us)
    }

    fn scale_us(&mut self, node: Node<'a, 'i>, name: &str, us: u64) -> Option<u64> {
        match us.checked_mul(1_000) {
            Some(ns) => Some(ns),
            None => {
                self.error_at(
                    self.attr_offset(node, name),
                    ParseErrorKind::BadNumber,
                    format!("attribute {:?} value {} µs overflows the time range", name, us),
                );
                None
            }
        }
    }

    fn raw_ref(&mut self, node: Node<'a, 'i>, name: &str) -> Option<RawRef<'a>> {
        let value = self.require(node, name)?;
        Some((value, self.attr_offset(node, name)))
    }

    /// Iterates element children, flagging non-whitespace text.
    fn element_children<'n>(&mut self, node: Node<'n, 'i>) -> Vec<Node<'n, 'i>> {
        let mut elements = Vec::new();
        for child in node.children() {
            if child.is_element() {
                elements.push(child);
            } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
                self.error(
                    child,
                    ParseErrorKind::Syntax,
                    format!("unexpected text content inside <{}>", node.tag_name().name()),
                );
            }
        }
        elements
    }

    fn unknown_element(&mut self, node: Node, parent: &str) {
        self.error(
            node,
            ParseErrorKind::UnknownElement,
            format!("<{}> is not allowed inside <{}>", node.tag_name().name(), parent),
        );
    }
}

/// Parses a document of the dialect into a validated model.
///
/// All diagnostics of the failing pass are returned together: first the
/// declaration pass (structure, attributes, numbers, uniqueness), then the
/// resolution pass (references). On success the model is guaranteed to
/// pass [`AmaltheaModel::validate`] with no violations.
pub fn parse(document: &str) -> Result<Parsed, Vec<ParseError>> {
    let doc = match Document::parse(document) {
        Ok(doc) => doc,
        Err(e) => {
            let pos = e.pos();
            return Err(vec![ParseError {
                line: pos.row,
                column: pos.col,
                kind: ParseErrorKind::Syntax,
                message: format!("malformed XML: {e}"),
            }]);
        }
    };
    let mut ctx = Ctx { doc: &doc, errors: Vec::new(), warnings: Vec::new() };

    let root = doc.root_element();
    if root.tag_name().name() != "amalthea" {
        ctx.error(
            root,
            ParseErrorKind::UnknownElement,
            format!("expected root element <amalthea>, found <{}>", root.tag_name().name()),
        );
        return Err(ctx.errors);
    }
    ctx.check_attributes(root, &[]);

    // Pass 1: declarations.
    let mut sw = SwDecls::default();
    let mut hw = HwDecls::default();
    for section in ctx.element_children(root) {
        match section.tag_name().name() {
            "swModel" => parse_sw_model(&mut ctx, section, &mut sw),
            "hwModel" => parse_hw_model(&mut ctx, section, &mut hw),
            _ => ctx.unknown_element(section, "amalthea"),
        }
    }
    check_declarations(&mut ctx, &sw, &hw);
    if !ctx.errors.is_empty() {
        return Err(ctx.errors);
    }

    // Pass 2: reference resolution.
    let model = resolve(&mut ctx, &sw, &hw);
    if !ctx.errors.is_empty() {
        return Err(ctx.errors);
    }
    let model = model.expect("resolution succeeded without errors");

    // Safety net: the passes above mirror every validation rule, so a
    // clean parse implies a clean model.
    let violations = model.validate();
    if !violations.is_empty() {
        return Err(violations
            .into_iter()
            .map(|v| ParseError {
                line: 1,
                column: 1,
                kind: ParseErrorKind::Syntax,
                message: v.to_string(),
            })
            .collect());
    }
    Ok(Parsed { model, warnings: ctx.warnings })
}

fn parse_sw_model<'a, 'i>(ctx: &mut Ctx<'a, 'i>, section: Node<'a, 'i>, sw: &mut SwDecls<'a>) {
    ctx.check_attributes(section, &[]);
    for node in ctx.element_children(section) {
        match node.tag_name().name() {
            "label" => {
                ctx.check_attributes(node, &["id", "name", "bitLength"]);
                let id = ctx.require(node, "id");
                let name = ctx.require(node, "name");
                let bits = ctx.require_u32(node, "bitLength");
                if let Some(bits) = bits {
                    if bits == 0 {
                        ctx.error_at(
                            ctx.attr_offset(node, "bitLength"),
                            ParseErrorKind::BadNumber,
                            "attribute \"bitLength\" must be at least 1".into(),
                        );
                    }
                }
                for child in ctx.element_children(node) {
                    ctx.unknown_element(child, "label");
                }
                if let (Some(id), Some(name), Some(bits)) = (id, name, bits) {
                    sw.labels.push(LabelDecl {
                        id,
                        name,
                        bit_length: bits,
                        offset: node.range().start,
                    });
                }
            }
            "runnable" => parse_runnable(ctx, node, sw),
            "stimulus" => parse_stimulus(ctx, node, sw),
            "task" => parse_task(ctx, node, sw),
            _ => ctx.unknown_element(node, "swModel"),
        }
    }
}

fn parse_runnable<'a, 'i>(ctx: &mut Ctx<'a, 'i>, node: Node<'a, 'i>, sw: &mut SwDecls<'a>) {
    ctx.check_attributes(node, &["id", "name", "sizeBits", "bcet", "wcet"]);
    let id = ctx.require(node, "id");
    let name = ctx.require(node, "name");
    let size_bits = ctx.require_u64(node, "sizeBits");
    let bcet = ctx.require_u64(node, "bcet");
    let wcet = ctx.require_u64(node, "wcet");
    match (bcet, wcet) {
        (Some(0), _) => ctx.error_at(
            ctx.attr_offset(node, "bcet"),
            ParseErrorKind::BadNumber,
            "attribute \"bcet\" must be a positive instruction count".into(),
        ),
        (Some(b), Some(w)) if b > w => ctx.error_at(
            ctx.attr_offset(node, "bcet"),
            ParseErrorKind::BadNumber,
            format!("BCET {b} exceeds WCET {w}"),
        ),
        _ => {}
    }
    let mut reads = Vec::new();
    let mut writes = Vec::new();
    for child in ctx.element_children(node) {
        match child.tag_name().name() {
            "read" => {
                ctx.check_attributes(child, &["label"]);
                if let Some(r) = ctx.raw_ref(child, "label") {
                    reads.push(r);
                }
            }
            "write" => {
                ctx.check_attributes(child, &["label"]);
                if let Some(r) = ctx.raw_ref(child, "label") {
                    writes.push(r);
                }
            }
            _ => ctx.unknown_element(child, "runnable"),
        }
    }
    if let (Some(id), Some(name), Some(size_bits), Some(bcet), Some(wcet)) =
        (id, name, size_bits, bcet, wcet)
    {
        sw.runnables.push(RunnableDecl {
            id,
            name,
            size_bits,
            bcet,
            wcet,
            reads,
            writes,
            offset: node.range().start,
        });
    }
}

fn parse_stimulus<'a, 'i>(ctx: &mut Ctx<'a, 'i>, node: Node<'a, 'i>, sw: &mut SwDecls<'a>) {
    let Some(kind) = ctx.require(node, "kind") else {
        return; // cannot judge the other attributes without the kind
    };
    let id = ctx.require(node, "id");
    let raw = match kind {
        "periodic" => {
            ctx.check_attributes(node, &["id", "kind", "period", "offset"]);
            let period_ns = ctx.require_us(node, "period");
            if period_ns == Some(0) {
                ctx.error_at(
                    ctx.attr_offset(node, "period"),
                    ParseErrorKind::BadNumber,
                    "attribute \"period\" must be at least 1 µs".into(),
                );
            }
            let offset_ns = ctx.optional_us(node, "offset").unwrap_or(0);
            period_ns.map(|period_ns| StimulusRaw::Periodic { period_ns, offset_ns })
        }
        "sporadic" => {
            ctx.check_attributes(node, &["id", "kind", "minInterArrival"]);
            let min = ctx.require_us(node, "minInterArrival");
            if min == Some(0) {
                ctx.error_at(
                    ctx.attr_offset(node, "minInterArrival"),
                    ParseErrorKind::BadNumber,
                    "attribute \"minInterArrival\" must be at least 1 µs".into(),
                );
            }
            min.map(|min_inter_arrival_ns| StimulusRaw::Sporadic { min_inter_arrival_ns })
        }
        "single" => {
            ctx.check_attributes(node, &["id", "kind", "time"]);
            ctx.require_us(node, "time").map(|time_ns| StimulusRaw::Single { time_ns })
        }
        "pattern" => {
            ctx.check_attributes(node, &["id", "kind"]);
            let mut times_ns = Vec::new();
            let mut complete = true;
            for child in ctx.element_children(node) {
                if child.tag_name().name() != "occurrence" {
                    ctx.unknown_element(child, "stimulus");
                    continue;
                }
                ctx.check_attributes(child, &["time"]);
                match ctx.require_us(child, "time") {
                    Some(at) => {
                        if times_ns.last().is_some_and(|&last| at <= last) {
                            ctx.error_at(
                                ctx.attr_offset(child, "time"),
                                ParseErrorKind::BadNumber,
                                "pattern occurrence times must be strictly increasing".into(),
                            );
                        }
                        times_ns.push(at);
                    }
                    None => complete = false,
                }
            }
            complete.then_some(StimulusRaw::Pattern { times_ns })
        }
        "interProcess" => {
            ctx.check_attributes(node, &["id", "kind", "triggerLabel", "injectionPeriod"]);
            let trigger = ctx.raw_ref(node, "triggerLabel");
            let injection_period_ns = ctx.optional_us(node, "injectionPeriod");
            if injection_period_ns == Some(0) {
                ctx.error_at(
                    ctx.attr_offset(node, "injectionPeriod"),
                    ParseErrorKind::BadNumber,
                    "attribute \"injectionPeriod\" must be at least 1 µs".into(),
                );
            }
            trigger.map(|trigger_label| StimulusRaw::InterProcess {
                trigger_label,
                injection_period_ns,
            })
        }
        other => {
            ctx.error_at(
                ctx.attr_offset(node, "kind"),
                ParseErrorKind::Syntax,
                format!(
                    "unknown stimulus kind {other:?} (expected periodic, sporadic, single, \
                     pattern, or interProcess)"
                ),
            );
            None
        }
    };
    if kind != "pattern" {
        for child in ctx.element_children(node) {
            ctx.unknown_element(child, "stimulus");
        }
    }
    if let (Some(id), Some(kind)) = (id, raw) {
        sw.stimuli.push(StimulusDecl { id, kind, offset: node.range().start });
    }
}

fn parse_task<'a, 'i>(ctx: &mut Ctx<'a, 'i>, node: Node<'a, 'i>, sw: &mut SwDecls<'a>) {
    ctx.check_attributes(node, &["id", "name", "priority", "stimulus"]);
    let id = ctx.require(node, "id");
    let name = ctx.require(node, "name");
    let priority = ctx.require_u32(node, "priority");
    let stimulus = ctx.raw_ref(node, "stimulus");
    let mut calls = Vec::new();
    for child in ctx.element_children(node) {
        match child.tag_name().name() {
            "call" => {
                ctx.check_attributes(child, &["runnable"]);
                if let Some(r) = ctx.raw_ref(child, "runnable") {
                    calls.push(r);
                }
            }
            _ => ctx.unknown_element(child, "task"),
        }
    }
    if calls.is_empty() {
        ctx.error(
            node,
            ParseErrorKind::Syntax,
            "<task> must contain at least one <call>".into(),
        );
    }
    if let (Some(id), Some(name), Some(priority), Some(stimulus)) = (id, name, priority, stimulus) {
        sw.tasks.push(TaskDecl {
            id,
            name,
            priority,
            stimulus,
            calls,
            offset: node.range().start,
        });
    }
}

fn parse_hw_model<'a, 'i>(ctx: &mut Ctx<'a, 'i>, section: Node<'a, 'i>, hw: &mut HwDecls<'a>) {
    ctx.check_attributes(section, &[]);
    for node in ctx.element_children(section) {
        match node.tag_name().name() {
            "coreType" => {
                ctx.check_attributes(node, &["id", "ticksPerInstruction"]);
                let id = ctx.require(node, "id");
                let ticks = ctx.require_u64(node, "ticksPerInstruction");
                if ticks == Some(0) {
                    ctx.error_at(
                        ctx.attr_offset(node, "ticksPerInstruction"),
                        ParseErrorKind::BadNumber,
                        "attribute \"ticksPerInstruction\" must be at least 1".into(),
                    );
                }
                if let (Some(id), Some(ticks)) = (id, ticks) {
                    hw.core_types.push((id, ticks, node.range().start));
                }
            }
            "quartz" => {
                ctx.check_attributes(node, &["id", "frequencyHz"]);
                let id = ctx.require(node, "id");
                let freq = ctx.require_u64(node, "frequencyHz");
                if freq == Some(0) {
                    ctx.error_at(
                        ctx.attr_offset(node, "frequencyHz"),
                        ParseErrorKind::BadNumber,
                        "attribute \"frequencyHz\" must be at least 1 Hz".into(),
                    );
                }
                if let (Some(id), Some(freq)) = (id, freq) {
                    hw.quartzes.push((id, freq, node.range().start));
                }
            }
            "core" => {
                ctx.check_attributes(node, &["id", "name", "coreType", "quartz", "x", "y"]);
                let id = ctx.require(node, "id");
                let name = ctx.require(node, "name");
                let core_type = ctx.raw_ref(node, "coreType");
                let quartz = ctx.raw_ref(node, "quartz");
                let x = ctx.require_u32(node, "x");
                let y = ctx.require_u32(node, "y");
                if let (Some(id), Some(name), Some(core_type), Some(quartz), Some(x), Some(y)) =
                    (id, name, core_type, quartz, x, y)
                {
                    hw.cores.push(CoreDecl {
                        id,
                        name,
                        core_type,
                        quartz,
                        position: (x, y),
                        offset: node.range().start,
                    });
                }
            }
            _ => ctx.unknown_element(node, "hwModel"),
        }
    }
}

/// Declaration-pass uniqueness checks, mirroring model validation so that
/// every rule is caught with a document position. Duplicates are reported
/// at the second declaration.
fn check_declarations(ctx: &mut Ctx, sw: &SwDecls, hw: &HwDecls) {
    fn duplicates<'d>(
        ctx: &mut Ctx,
        items: impl Iterator<Item = (&'d str, usize)>,
        what: &str,
        key_name: &str,
    ) {
        let mut seen = std::collections::HashSet::new();
        for (key, offset) in items {
            if !seen.insert(key) {
                ctx.error_at(
                    offset,
                    ParseErrorKind::Syntax,
                    format!("duplicate {what} {key_name} {key:?}"),
                );
            }
        }
    }

    duplicates(ctx, sw.labels.iter().map(|l| (l.id, l.offset)), "label", "id");
    duplicates(ctx, sw.labels.iter().map(|l| (l.name, l.offset)), "label", "name");
    duplicates(ctx, sw.runnables.iter().map(|r| (r.id, r.offset)), "runnable", "id");
    duplicates(ctx, sw.runnables.iter().map(|r| (r.name, r.offset)), "runnable", "name");
    duplicates(ctx, sw.stimuli.iter().map(|s| (s.id, s.offset)), "stimulus", "id");
    duplicates(ctx, sw.tasks.iter().map(|t| (t.id, t.offset)), "task", "id");
    duplicates(ctx, sw.tasks.iter().map(|t| (t.name, t.offset)), "task", "name");
    duplicates(ctx, hw.core_types.iter().map(|c| (c.0, c.2)), "coreType", "id");
    duplicates(ctx, hw.quartzes.iter().map(|q| (q.0, q.2)), "quartz", "id");
    duplicates(ctx, hw.cores.iter().map(|c| (c.id, c.offset)), "core", "id");
    duplicates(ctx, hw.cores.iter().map(|c| (c.name, c.offset)), "core", "name");

    let mut by_priority: std::collections::HashMap<u32, &str> = std::collections::HashMap::new();
    for task in &sw.tasks {
        if let Some(first) = by_priority.insert(task.priority, task.name) {
            ctx.error_at(
                task.offset,
                ParseErrorKind::Syntax,
                format!("duplicate priority {} (also used by task {:?})", task.priority, first),
            );
        }
    }
    let mut by_position: std::collections::HashMap<(u32, u32), &str> =
        std::collections::HashMap::new();
    for core in &hw.cores {
        if let Some(first) = by_position.insert(core.position, core.name) {
            ctx.error_at(
                core.offset,
                ParseErrorKind::Syntax,
                format!("duplicate position {:?} (also used by core {:?})", core.position, first),
            );
        }
    }
}

fn resolve(ctx: &mut Ctx, sw: &SwDecls, hw: &HwDecls) -> Option<AmaltheaModel> {
    let label_ids: std::collections::HashMap<&str, usize> =
        sw.labels.iter().enumerate().map(|(i, l)| (l.id, i)).collect();
    let runnable_ids: std::collections::HashMap<&str, usize> =
        sw.runnables.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
    let stimulus_ids: std::collections::HashMap<&str, usize> =
        sw.stimuli.iter().enumerate().map(|(i, s)| (s.id, i)).collect();
    let core_type_ids: std::collections::HashMap<&str, usize> =
        hw.core_types.iter().enumerate().map(|(i, c)| (c.0, i)).collect();
    let quartz_ids: std::collections::HashMap<&str, usize> =
        hw.quartzes.iter().enumerate().map(|(i, q)| (q.0, i)).collect();

    fn lookup(
        ctx: &mut Ctx,
        map: &std::collections::HashMap<&str, usize>,
        (id, offset): RawRef,
        what: &str,
    ) -> Option<usize> {
        match map.get(id) {
            Some(&index) => Some(index),
            None => {
                ctx.error_at(
                    offset,
                    ParseErrorKind::BadReference,
                    format!("reference to undeclared {what} {id:?}"),
                );
                None
            }
        }
    }

    let mut builder = ModelBuilder::new();
    for l in &sw.labels {
        builder.add_label(l.id, l.name, l.bit_length);
    }
    for r in &sw.runnables {
        let reads: Vec<usize> =
            r.reads.iter().filter_map(|&raw| lookup(ctx, &label_ids, raw, "label")).collect();
        let writes: Vec<usize> =
            r.writes.iter().filter_map(|&raw| lookup(ctx, &label_ids, raw, "label")).collect();
        builder.add_runnable(r.id, r.name, r.size_bits, reads, writes, r.bcet, r.wcet);
    }
    for s in &sw.stimuli {
        let kind = match &s.kind {
            StimulusRaw::Periodic { period_ns, offset_ns } => {
                StimulusKind::Periodic { period_ns: *period_ns, offset_ns: *offset_ns }
            }
            StimulusRaw::Sporadic { min_inter_arrival_ns } => {
                StimulusKind::Sporadic { min_inter_arrival_ns: *min_inter_arrival_ns }
            }
            StimulusRaw::Single { time_ns } => StimulusKind::Single { time_ns: *time_ns },
            StimulusRaw::Pattern { times_ns } => {
                StimulusKind::Pattern { times_ns: times_ns.clone() }
            }
            StimulusRaw::InterProcess { trigger_label, injection_period_ns } => {
                let trigger_label =
                    lookup(ctx, &label_ids, *trigger_label, "label").unwrap_or(usize::MAX);
                StimulusKind::InterProcess {
                    trigger_label,
                    injection_period_ns: *injection_period_ns,
                }
            }
        };
        builder.add_stimulus(s.id, kind);
    }
    for t in &sw.tasks {
        let stimulus = lookup(ctx, &stimulus_ids, t.stimulus, "stimulus").unwrap_or(usize::MAX);
        let runnables: Vec<usize> =
            t.calls.iter().filter_map(|&raw| lookup(ctx, &runnable_ids, raw, "runnable")).collect();
        builder.add_task(t.id, t.name, t.priority, stimulus, runnables);
    }
    for &(id, ticks, _) in &hw.core_types {
        builder.add_core_type(id, ticks);
    }
    for &(id, freq, _) in &hw.quartzes {
        builder.add_quartz(id, freq);
    }
    for c in &hw.cores {
        let core_type = lookup(ctx, &core_type_ids, c.core_type, "coreType").unwrap_or(usize::MAX);
        let quartz = lookup(ctx, &quartz_ids, c.quartz, "quartz").unwrap_or(usize::MAX);
        builder.add_core(c.id, c.name, core_type, quartz, c.position);
    }
    if ctx.errors.is_empty() {
        Some(builder.build())
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Escapes an attribute value for double-quoted context.
fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Serializes a valid model to the dialect with a fixed layout: 2-space
/// indent, model entity order, fixed attribute order. Equal models yield
/// byte-equal documents. An invalid model is refused and the validation
/// report returned instead.
pub fn serialize(model: &AmaltheaModel) -> Result<String, Vec<Violation>> {
    let violations = model.validate();
    if !violations.is_empty() {
        return Err(violations);
    }
    let us = |ns: u64| ns / 1_000; // validation guarantees whole microseconds

    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<amalthea>\n");
    out.push_str("  <swModel>\n");
    for label in model.labels() {
        out.push_str(&format!(
            "    <label id=\"{}\" name=\"{}\" bitLength=\"{}\"/>\n",
            escape(&label.id),
            escape(&label.name),
            label.bit_length
        ));
    }
    for runnable in model.runnables() {
        let head = format!(
            "    <runnable id=\"{}\" name=\"{}\" sizeBits=\"{}\" bcet=\"{}\" wcet=\"{}\"",
            escape(&runnable.id),
            escape(&runnable.name),
            runnable.size_bits,
            runnable.bcet_instructions,
            runnable.wcet_instructions
        );
        if runnable.reads.is_empty() && runnable.writes.is_empty() {
            out.push_str(&head);
            out.push_str("/>\n");
        } else {
            out.push_str(&head);
            out.push_str(">\n");
            for &l in &runnable.reads {
                out.push_str(&format!("      <read label=\"{}\"/>\n", escape(&model.label(l).id)));
            }
            for &l in &runnable.writes {
                out.push_str(&format!("      <write label=\"{}\"/>\n", escape(&model.label(l).id)));
            }
            out.push_str("    </runnable>\n");
        }
    }
    for stimulus in model.stimuli() {
        let id = escape(&stimulus.id);
        match &stimulus.kind {
            StimulusKind::Periodic { period_ns, offset_ns } => {
                out.push_str(&format!(
                    "    <stimulus id=\"{id}\" kind=\"periodic\" period=\"{}\" offset=\"{}\"/>\n",
                    us(*period_ns),
                    us(*offset_ns)
                ));
            }
            StimulusKind::Sporadic { min_inter_arrival_ns } => {
                out.push_str(&format!(
                    "    <stimulus id=\"{id}\" kind=\"sporadic\" minInterArrival=\"{}\"/>\n",
                    us(*min_inter_arrival_ns)
                ));
            }
            StimulusKind::Single { time_ns } => {
                out.push_str(&format!(
                    "    <stimulus id=\"{id}\" kind=\"single\" time=\"{}\"/>\n",
                    us(*time_ns)
                ));
            }
            StimulusKind::Pattern { times_ns } => {
                if times_ns.is_empty() {
                    out.push_str(&format!("    <stimulus id=\"{id}\" kind=\"pattern\"/>\n"));
                } else {
                    out.push_str(&format!("    <stimulus id=\"{id}\" kind=\"pattern\">\n"));
                    for &at in times_ns {
                        out.push_str(&format!("      <occurrence time=\"{}\"/>\n", us(at)));
                    }
                    out.push_str("    </stimulus>\n");
                }
            }
            StimulusKind::InterProcess { trigger_label, injection_period_ns } => {
                let trigger = escape(&model.label(*trigger_label).id);
                match injection_period_ns {
                    Some(period) => out.push_str(&format!(
                        "    <stimulus id=\"{id}\" kind=\"interProcess\" triggerLabel=\"{trigger}\" \
                         injectionPeriod=\"{}\"/>\n",
                        us(*period)
                    )),
                    None => out.push_str(&format!(
                        "    <stimulus id=\"{id}\" kind=\"interProcess\" triggerLabel=\"{trigger}\"/>\n"
                    )),
                }
            }
        }
    }
    for task in model.tasks() {
        out.push_str(&format!(
            "    <task id=\"{}\" name=\"{}\" priority=\"{}\" stimulus=\"{}\">\n",
            escape(&task.id),
            escape(&task.name),
            task.priority,
            escape(&model.stimulus(task.stimulus).id)
        ));
        for &r in &task.runnables {
            out.push_str(&format!("      <call runnable=\"{}\"/>\n", escape(&model.runnable(r).id)));
        }
        out.push_str("    </task>\n");
    }
    out.push_str("  </swModel>\n");

    out.push_str("  <hwModel>\n");
    for core_type in model.core_types() {
        out.push_str(&format!(
            "    <coreType id=\"{}\" ticksPerInstruction=\"{}\"/>\n",
            escape(&core_type.id),
            core_type.ticks_per_instruction
        ));
    }
    for quartz in model.quartzes() {
        out.push_str(&format!(
            "    <quartz id=\"{}\" frequencyHz=\"{}\"/>\n",
            escape(&quartz.id),
            quartz.frequency_hz
        ));
    }
    for core in model.cores() {
        out.push_str(&format!(
            "    <core id=\"{}\" name=\"{}\" coreType=\"{}\" quartz=\"{}\" x=\"{}\" y=\"{}\"/>\n",
            escape(&core.id),
            escape(&core.name),
            escape(&model.core_type(core.core_type).id),
            escape(&model.quartz(core.quartz).id),
            core.position.0,
            core.position.1
        ));
    }
    out.push_str("  </hwModel>\n</amalthea>\n");
    Ok(out)
}
