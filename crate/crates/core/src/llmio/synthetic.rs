use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Backend, CompletionRequest, LlmError};
use crate::digest::{hex, Digester};
use crate::hdsl::{self, DEFAULT_MAX_SIZE};
use crate::problems::TourPermutation;
use crate::prompting::{
    section_lines, CURRENT_INSTRUCTION_HEADER, COUNT_PREFIX, EXAMPLES_HEADER, MAX_SIZE_PREFIX, PAYLOAD_TYPE_PREFIX,
    VARIABLES_PREFIX,
};

const SUFFIX_MARK: &str = " [refl:";

/// Deterministic stand-in for a language model. It reads the best example
/// out of a variation prompt and returns a small random edit of it; for a
/// reflective prompt it returns the current instruction with a fresh suffix.
///
/// The response depends only on the seed, the correlation id and the prompt.
pub struct SyntheticBackend {
    seed: u64,
}

impl SyntheticBackend {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn rng_for(&self, req: &CompletionRequest, prompt: &str) -> ChaCha8Rng {
        let mut d = Digester::new();
        d.u64(self.seed).bytes(req.correlation_id.as_bytes()).bytes(prompt.as_bytes());
        ChaCha8Rng::seed_from_u64(d.finish())
    }
}

impl Backend for SyntheticBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        let prompt = req.prompt();
        let mut rng = self.rng_for(req, &prompt);
        if let Some(lines) = section_lines(&prompt, CURRENT_INSTRUCTION_HEADER) {
            return Ok(reflect(&lines.join("\n"), &mut rng));
        }
        vary(&prompt, &mut rng)
    }

    fn max_inflight(&self) -> usize {
        usize::MAX
    }
}

fn reflect(current: &str, rng: &mut ChaCha8Rng) -> String {
    let base = current.trim();
    let base = match base.rfind(SUFFIX_MARK) {
        Some(i) if base.ends_with(']') => &base[..i],
        _ => base,
    };
    let token = &hex(rng.gen())[..8];
    format!("<instruction>{base}{SUFFIX_MARK}{token}]</instruction>\n")
}

fn line_value<'a>(prompt: &'a str, prefix: &str) -> Option<&'a str> {
    prompt.lines().find_map(|l| l.strip_prefix(prefix))
}

fn vary(prompt: &str, rng: &mut ChaCha8Rng) -> Result<String, LlmError> {
    let examples = section_lines(prompt, EXAMPLES_HEADER).ok_or(LlmError::UnparseablePrompt)?;
    // Examples are listed worst to best.
    let best = examples
        .iter()
        .rev()
        .find_map(|l| {
            let body = l.strip_prefix("<candidate>")?;
            Some(&body[..body.find("</candidate>")?])
        })
        .ok_or(LlmError::UnparseablePrompt)?;
    let count: usize = line_value(prompt, COUNT_PREFIX)
        .and_then(|v| v.split_whitespace().next())
        .and_then(|n| n.parse().ok())
        .unwrap_or(1)
        .max(1);
    let expression = line_value(prompt, PAYLOAD_TYPE_PREFIX).map(str::trim) == Some("expression");

    let mut out = String::new();
    if expression {
        let expr = hdsl::parse(best).map_err(|_| LlmError::UnparseablePrompt)?;
        let vars: Vec<&str> = line_value(prompt, VARIABLES_PREFIX)
            .map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default();
        let max_size = line_value(prompt, MAX_SIZE_PREFIX)
            .and_then(|v| v.split_whitespace().next())
            .and_then(|n| n.parse().ok())
            .unwrap_or(DEFAULT_MAX_SIZE);
        for _ in 0..count {
            let child = hdsl::mutate(&expr, rng, &vars, max_size);
            out.push_str(&format!("<candidate>{child}</candidate>\n"));
        }
    } else {
        let tour: TourPermutation = best.parse().map_err(|_| LlmError::UnparseablePrompt)?;
        for _ in 0..count {
            let child = perturb_tour(&tour.0, rng);
            out.push_str(&format!("<candidate>{}</candidate>\n", TourPermutation(child)));
        }
    }
    Ok(out)
}

/// A 2-opt segment reversal or a swap of two positions, with equal odds.
fn perturb_tour(order: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut child = order.to_vec();
    let n = child.len();
    if n < 2 {
        return child;
    }
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let (a, b) = (i.min(j), i.max(j));
    if rng.gen_bool(0.5) {
        child[a..=b].reverse();
    } else {
        child.swap(a, b);
    }
    child
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompting::{
        parse_candidates, parse_instruction, render_reflective_prompt, render_variation_prompt, Example, OutputSpec,
        ReflectivePromptSpec, VariationPromptSpec,
    };
    use crate::problems::tsp_validate;

    fn variation(examples: Vec<Example>, output: OutputSpec) -> String {
        render_variation_prompt(&VariationPromptSpec {
            problem_description: "p".into(),
            task_instruction: "t".into(),
            examples,
            output,
            offspring_requested: 1,
        })
    }

    #[test]
    fn tour_offspring_is_a_permutation() {
        let prompt = variation(
            vec![Example::new("0,1,2,3", 4.0), Example::new("0,2,1,3", 4.8)],
            OutputSpec::Solution { n_cities: 4 },
        );
        let b = SyntheticBackend::new(3);
        for k in 0..200 {
            let text = b.complete(&CompletionRequest::user(prompt.clone(), 1.0, 64, format!("c{k}"))).unwrap();
            let r = parse_candidates(&text, &OutputSpec::Solution { n_cities: 4 }, 1).unwrap();
            let tour = r.candidates[0].payload.as_tour().unwrap();
            tsp_validate(tour.order(), 4).unwrap();
        }
    }

    #[test]
    fn deterministic() {
        let prompt = variation(vec![Example::new("cap - item", 0.1)], OutputSpec::Heuristic {
            vars: vec!["cap".into(), "item".into()],
            max_size: 64,
        });
        let req = CompletionRequest::user(prompt, 1.0, 64, "g1");
        let a = SyntheticBackend::new(9).complete(&req).unwrap();
        let b = SyntheticBackend::new(9).complete(&req).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_examples_section() {
        let req = CompletionRequest::user("## Problem\nx\n", 1.0, 64, "g1");
        assert_eq!(SyntheticBackend::new(1).complete(&req), Err(LlmError::UnparseablePrompt));
    }

    #[test]
    fn reflective_replaces_suffix() {
        let prompt = render_reflective_prompt(&ReflectivePromptSpec {
            current_instruction: "Improve it.".into(),
            short_term: vec![],
            long_term: vec![3.0],
        });
        let b = SyntheticBackend::new(1);
        let first = parse_instruction(&b.complete(&CompletionRequest::user(prompt, 0.2, 64, "r1")).unwrap()).unwrap();
        assert!(first.starts_with("Improve it. [refl:"));
        let again = render_reflective_prompt(&ReflectivePromptSpec {
            current_instruction: first.clone(),
            short_term: vec![],
            long_term: vec![3.0],
        });
        let second = parse_instruction(&b.complete(&CompletionRequest::user(again, 0.2, 64, "r2")).unwrap()).unwrap();
        assert!(second.starts_with("Improve it. [refl:"));
        assert_eq!(second.matches("[refl:").count(), 1);
    }

    #[test]
    fn honours_requested_count() {
        let prompt = render_variation_prompt(&VariationPromptSpec {
            problem_description: "p".into(),
            task_instruction: "t".into(),
            examples: vec![Example::new("0,1,2", 3.0)],
            output: OutputSpec::Solution { n_cities: 3 },
            offspring_requested: 3,
        });
        let text = SyntheticBackend::new(1).complete(&CompletionRequest::user(prompt, 1.0, 64, "x")).unwrap();
        assert_eq!(text.matches("<candidate>").count(), 3);
    }
}
