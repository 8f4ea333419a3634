//! Prompt assembly and response parsing.
//!
//! A variation prompt has four sections in fixed order: `## Problem`,
//! `## Examples`, `## Task` and `## Output format`. Examples are listed
//! worst to best, one per line, so the best one sits next to the task text.
//! Backends answer with tag-delimited blocks:
//!
//! ```text
//! <candidate>cap - item</candidate><description>prefers tight fits</description>
//! ```
//!
//! A reflective prompt carries `## Current instruction`, `## Recent offspring`,
//! `## Best-so-far trajectory` and `## Directive`, and expects the revised
//! instruction inside `<instruction>` tags.

use std::fmt::Write as _;

use crate::candidate::{CandidateKind, Payload};
use crate::config::StrategyFamily;
use crate::hdsl::{self, Func};
use crate::problems::{tsp_validate, Problem, TourPermutation, BPP_VARS};

/// Bumped whenever the rendered layout or the tag grammar changes.
pub const PROMPT_FORMAT_VERSION: u32 = 1;

pub const EXAMPLES_HEADER: &str = "## Examples";
pub const CURRENT_INSTRUCTION_HEADER: &str = "## Current instruction";
pub const PAYLOAD_TYPE_PREFIX: &str = "Payload type: ";
pub const VARIABLES_PREFIX: &str = "Variables: ";
pub const MAX_SIZE_PREFIX: &str = "Maximum size: ";
pub const COUNT_PREFIX: &str = "Return exactly ";

/// Formats like C's `%g` with `sig` significant digits.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -4 || exp >= sig as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One example candidate shown to the backend.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub payload: String,
    pub cost: f64,
    pub description: Option<String>,
    pub tags: Vec<String>,
}

impl Example {
    pub fn new(payload: impl Into<String>, cost: f64) -> Self {
        Self { payload: payload.into(), cost, description: None, tags: Vec::new() }
    }

    fn render(&self) -> String {
        let mut line = format!("<candidate>{}</candidate>", self.payload);
        if let Some(d) = &self.description {
            let _ = write!(line, " <description>{}</description>", one_line(d));
        }
        if !self.tags.is_empty() {
            let tags: Vec<String> = self.tags.iter().map(|t| one_line(t)).collect();
            let _ = write!(line, " <knowledge>{}</knowledge>", tags.join("; "));
        }
        let _ = write!(line, " cost={}", format_sig(self.cost, 6));
        line
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// What a response must contain, and how to parse it.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputSpec {
    Solution { n_cities: usize },
    Heuristic { vars: Vec<String>, max_size: usize },
}

impl OutputSpec {
    pub fn for_problem(problem: &Problem, max_size: usize) -> Self {
        match problem {
            Problem::Tsp(inst) => OutputSpec::Solution { n_cities: inst.len() },
            Problem::Bpp(_) => OutputSpec::Heuristic {
                vars: BPP_VARS.iter().map(|v| v.to_string()).collect(),
                max_size,
            },
        }
    }

    pub fn kind(&self) -> CandidateKind {
        match self {
            OutputSpec::Solution { .. } => CandidateKind::Solution,
            OutputSpec::Heuristic { .. } => CandidateKind::Heuristic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationPromptSpec {
    pub problem_description: String,
    pub task_instruction: String,
    pub examples: Vec<Example>,
    pub output: OutputSpec,
    pub offspring_requested: usize,
}

pub fn render_variation_prompt(spec: &VariationPromptSpec) -> String {
    let mut examples: Vec<&Example> = spec.examples.iter().collect();
    // Worst first; the sort is stable so equal costs keep their given order.
    examples.sort_by(|a, b| b.cost.total_cmp(&a.cost));

    let mut out = String::new();
    section(&mut out, "## Problem", spec.problem_description.trim_end());
    let lines: Vec<String> = examples.iter().map(|e| e.render()).collect();
    section(&mut out, EXAMPLES_HEADER, &lines.join("\n"));
    section(&mut out, "## Task", spec.task_instruction.trim());
    out.push_str("## Output format\n");
    out.push_str(&output_contract(&spec.output, spec.offspring_requested));
    strip_trailing_spaces(&out)
}

fn section(out: &mut String, header: &str, body: &str) {
    out.push_str(header);
    out.push('\n');
    out.push_str(body);
    out.push_str("\n\n");
}

fn strip_trailing_spaces(text: &str) -> String {
    let mut out: String = text.lines().map(|l| l.trim_end()).collect::<Vec<_>>().join("\n");
    out.push('\n');
    out
}

fn output_contract(output: &OutputSpec, n: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{COUNT_PREFIX}{n} candidate block(s). Wrap each payload in <candidate></candidate> tags. \
         A block may be followed by <description>one sentence on the idea</description>."
    );
    match output {
        OutputSpec::Solution { n_cities } => {
            let _ = writeln!(s, "{PAYLOAD_TYPE_PREFIX}permutation");
            let _ = writeln!(
                s,
                "A payload lists the city indices 0 to {} separated by commas, each exactly once.",
                n_cities.saturating_sub(1)
            );
            let _ = writeln!(s, "Example: <candidate>{}</candidate>", identity_tour(*n_cities));
        }
        OutputSpec::Heuristic { vars, max_size } => {
            let funcs: Vec<String> = Func::ALL.iter().map(|f| format!("{}/{}", f.name(), f.arity())).collect();
            let _ = writeln!(s, "{PAYLOAD_TYPE_PREFIX}expression");
            let _ = writeln!(s, "{VARIABLES_PREFIX}{}", vars.join(", "));
            let _ = writeln!(s, "Operators: + - * / and unary minus; parentheses allowed.");
            let _ = writeln!(s, "Functions: {}", funcs.join(", "));
            let _ = writeln!(s, "Comparisons return 1 or 0; if(c, a, b) picks a when c is non-zero.");
            let _ = writeln!(s, "{MAX_SIZE_PREFIX}{max_size} nodes");
            let _ = writeln!(s, "Example: <candidate>-(cap - item)</candidate>");
        }
    }
    s
}

fn identity_tour(n: usize) -> String {
    TourPermutation((0..n).collect()).to_string()
}

/// Problem text for the `## Problem` section.
pub fn describe_problem(problem: &Problem) -> String {
    let mut s = String::new();
    match problem {
        Problem::Tsp(inst) => {
            let _ = writeln!(
                s,
                "Traveling salesman: find the shortest closed tour that visits each of the {} cities \
                 exactly once and returns to its start. Distances are Euclidean. Cost is the tour length; \
                 lower is better.",
                inst.len()
            );
            let _ = writeln!(s, "Cities (index: x, y):");
            for (i, p) in inst.points().iter().enumerate() {
                let _ = writeln!(s, "{i}: {}, {}", p.x, p.y);
            }
        }
        Problem::Bpp(train) => {
            let _ = writeln!(
                s,
                "Online bin packing: write a priority expression that decides where each arriving item goes. \
                 Items arrive one at a time in a fixed order. Every open bin with enough room is scored by the \
                 expression and the item goes into the highest-scoring bin (lowest index on ties). When no bin \
                 has room a new bin is opened."
            );
            let _ = writeln!(
                s,
                "The expression sees cap (remaining capacity of the bin), item (size of the item), \
                 index (0-based bin index) and n_bins (number of open bins)."
            );
            let items: Vec<usize> = train.instances().iter().map(|i| i.items().len()).collect();
            let _ = writeln!(
                s,
                "Cost is the mean over {} training instances ({} to {} items each) of (bins used - lower bound) / \
                 lower bound, where the lower bound is ceil(total size / capacity); lower is better.",
                train.len(),
                items.iter().min().copied().unwrap_or(0),
                items.iter().max().copied().unwrap_or(0)
            );
        }
    }
    s
}

/// Starting instruction for a strategy family.
pub fn default_instruction(family: StrategyFamily, kind: CandidateKind) -> String {
    let thing = match kind {
        CandidateKind::Solution => "tour",
        CandidateKind::Heuristic => "priority expression",
    };
    match family {
        StrategyFamily::Exploration => format!(
            "Create a new {thing} that differs from the examples and has a lower cost than all of them. \
             Combine ideas from the examples or try a different approach."
        ),
        StrategyFamily::Modification => format!(
            "Make a small change to the best example to produce a {thing} with a lower cost."
        ),
    }
}

/// One offspring shown to the reflective backend.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringReport {
    pub payload: String,
    pub parent_cost: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectivePromptSpec {
    pub current_instruction: String,
    pub short_term: Vec<OffspringReport>,
    /// Best-so-far cost per generation, starting at generation 1.
    pub long_term: Vec<f64>,
}

pub const REFLECTION_DIRECTIVE: &str = "Rewrite the current instruction so that the next generations find \
candidates with lower cost. Use the recent offspring to judge which kinds of change helped, and the \
trajectory to judge whether the search has stalled. Reply with the revised instruction inside \
<instruction></instruction> tags.";

pub fn render_reflective_prompt(spec: &ReflectivePromptSpec) -> String {
    let mut out = String::new();
    section(&mut out, CURRENT_INSTRUCTION_HEADER, spec.current_instruction.trim());
    let recent: Vec<String> = if spec.short_term.is_empty() {
        vec!["(none)".to_string()]
    } else {
        spec.short_term
            .iter()
            .map(|o| {
                let delta = o.cost - o.parent_cost;
                let delta = if delta.is_finite() { format_sig(delta, 6) } else { "n/a".to_string() };
                format!(
                    "<candidate>{}</candidate> parent_cost={} cost={} delta={delta}",
                    o.payload,
                    format_sig(o.parent_cost, 6),
                    format_sig(o.cost, 6)
                )
            })
            .collect()
    };
    section(&mut out, "## Recent offspring", &recent.join("\n"));
    let trajectory: Vec<String> = spec
        .long_term
        .iter()
        .enumerate()
        .map(|(i, c)| format!("generation {}: best={}", i + 1, format_sig(*c, 6)))
        .collect();
    section(&mut out, "## Best-so-far trajectory", &trajectory.join("\n"));
    out.push_str("## Directive\n");
    out.push_str(REFLECTION_DIRECTIVE);
    out.push('\n');
    strip_trailing_spaces(&out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCandidate {
    pub payload: Payload,
    pub description: Option<String>,
    pub tags: Vec<String>,
    /// Beyond the number of candidates requested.
    pub surplus: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct BlockDiagnostic {
    /// 0-based position of the block in the response.
    pub block: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseReport {
    pub candidates: Vec<ParsedCandidate>,
    pub diagnostics: Vec<BlockDiagnostic>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResponseError {
    #[error("no candidate parsed from response ({} malformed block(s))", diagnostics.len())]
    NoCandidates { diagnostics: Vec<BlockDiagnostic> },
    #[error("no non-empty <instruction> block in response")]
    NoInstruction,
}

/// Content of `<tag>...</tag>` starting exactly at the beginning of `text`
/// (after leading whitespace), and the text after the closing tag.
fn leading_block<'a>(text: &'a str, tag: &str) -> Option<(&'a str, &'a str)> {
    let rest = text.trim_start();
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let body = rest.strip_prefix(open.as_str())?;
    let end = body.find(close.as_str())?;
    Some((&body[..end], &body[end + close.len()..]))
}

fn parse_payload(text: &str, output: &OutputSpec) -> Result<Payload, String> {
    match output {
        OutputSpec::Solution { n_cities } => {
            let tour: TourPermutation = text.parse().map_err(|e: crate::problems::tsp::TourSyntaxError| e.to_string())?;
            tsp_validate(tour.order(), *n_cities).map_err(|e| e.to_string())?;
            Ok(Payload::Tour(tour))
        }
        OutputSpec::Heuristic { max_size, .. } => {
            let expr = hdsl::parse(text).map_err(|e| e.to_string())?;
            expr.check_size(*max_size).map_err(|e| e.to_string())?;
            Ok(Payload::Heuristic(expr))
        }
    }
}

/// Extracts every `<candidate>` block. Malformed blocks are skipped with a
/// diagnostic; the call fails only when nothing parses.
pub fn parse_candidates(response: &str, output: &OutputSpec, expected_n: usize) -> Result<ParseReport, ResponseError> {
    const OPEN: &str = "<candidate>";
    const CLOSE: &str = "</candidate>";
    let mut candidates = Vec::new();
    let mut diagnostics = Vec::new();
    let mut rest = response;
    let mut block = 0;
    while let Some(start) = rest.find(OPEN) {
        let body = &rest[start + OPEN.len()..];
        let Some(end) = body.find(CLOSE) else {
            diagnostics.push(BlockDiagnostic { block, message: "unterminated <candidate> block".into() });
            break;
        };
        let raw = body[..end].trim();
        rest = &body[end + CLOSE.len()..];
        let mut description = None;
        if let Some((d, after)) = leading_block(rest, "description") {
            let d = d.trim();
            description = (!d.is_empty()).then(|| d.to_string());
            rest = after;
        }
        let mut tags = Vec::new();
        if let Some((k, after)) = leading_block(rest, "knowledge") {
            tags = k.split(';').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect();
            rest = after;
        }
        match parse_payload(raw, output) {
            Ok(payload) => {
                let surplus = candidates.len() >= expected_n;
                candidates.push(ParsedCandidate { payload, description, tags, surplus });
            }
            Err(message) => diagnostics.push(BlockDiagnostic { block, message }),
        }
        block += 1;
    }
    if candidates.is_empty() {
        return Err(ResponseError::NoCandidates { diagnostics });
    }
    Ok(ParseReport { candidates, diagnostics })
}

/// Trimmed content of the first `<instruction>` block.
pub fn parse_instruction(response: &str) -> Result<String, ResponseError> {
    let start = response.find("<instruction>").ok_or(ResponseError::NoInstruction)?;
    let body = &response[start + "<instruction>".len()..];
    let end = body.find("</instruction>").ok_or(ResponseError::NoInstruction)?;
    let text = body[..end].trim();
    if text.is_empty() {
        return Err(ResponseError::NoInstruction);
    }
    Ok(text.to_string())
}

/// Lines of the section introduced by `header`, up to the next `## ` header.
pub fn section_lines<'a>(prompt: &'a str, header: &str) -> Option<Vec<&'a str>> {
    let mut lines = prompt.lines();
    lines.by_ref().find(|l| *l == header)?;
    Some(lines.take_while(|l| !l.starts_with("## ")).collect())
}
