//! LLM-choice compositional reasoning: prompt a text-only model with a
//! description and caption options, parse its pick strictly, score.

use serde::{Deserialize, Serialize};

use crate::error::{ClientError, Error, Result};
use crate::seeding::ClientPolicy;

const WITH_DESCRIPTION_HEAD: &str = "Given the following image description and image caption options, choose the most likely OPTION number :\n\nIMAGE-DESCRIPTION : ";
const BIAS_HEAD: &str =
    "Given the following image caption options, choose the most likely OPTION number :\n\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasoningInstance {
    pub instance_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub choices: Vec<String>,
    pub answer_index: usize,
}

impl ReasoningInstance {
    pub fn check(&self) -> Result<()> {
        if self.choices.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "{}: need at least two choices",
                self.instance_id
            )));
        }
        if self.answer_index >= self.choices.len() {
            return Err(Error::InvalidArgument(format!(
                "{}: answer_index out of range",
                self.instance_id
            )));
        }
        if self.choices.iter().any(|c| c.trim().is_empty()) {
            return Err(Error::InvalidArgument(format!(
                "{}: empty choice text",
                self.instance_id
            )));
        }
        Ok(())
    }
}

/// An instance after answer rotation, ready to prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparedInstance {
    pub instance_id: String,
    pub description: Option<String>,
    /// Original choice indices in presented order.
    pub presented_order: Vec<usize>,
    pub choices: Vec<String>,
    /// 0-based presented position of the answer.
    pub answer_position: usize,
}

/// Presented position of the answer for the `i`-th instance.
pub fn rotate_answer(i: usize, n_choices: usize) -> usize {
    i % n_choices
}

/// Permutation (original indices in presented order) that moves
/// `answer_index` to `position` and keeps distractors in their order.
pub fn rotation_order(answer_index: usize, n_choices: usize, position: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_choices).filter(|&c| c != answer_index).collect();
    order.insert(position, answer_index);
    order
}

/// Rotates the `i`-th instance of a dataset.
pub fn prepare(instance: &ReasoningInstance, i: usize) -> Result<PreparedInstance> {
    instance.check()?;
    let n = instance.choices.len();
    let position = rotate_answer(i, n);
    let order = rotation_order(instance.answer_index, n, position);
    Ok(PreparedInstance {
        instance_id: instance.instance_id.clone(),
        description: instance.description.clone(),
        choices: order.iter().map(|&c| instance.choices[c].clone()).collect(),
        presented_order: order,
        answer_position: position,
    })
}

fn enumerate_choices<S: AsRef<str>>(choices: &[S]) -> Result<String> {
    if choices.len() < 2 {
        return Err(Error::InvalidArgument("need at least two choices".into()));
    }
    if choices.iter().any(|c| c.as_ref().trim().is_empty()) {
        return Err(Error::InvalidArgument("empty choice text".into()));
    }
    Ok(choices
        .iter()
        .enumerate()
        .map(|(i, c)| format!("[{}] {}", i + 1, c.as_ref()))
        .collect::<Vec<_>>()
        .join("\n"))
}

/// The prompt with a description, or the language-bias prompt without one.
pub fn build_reasoning_prompt<S: AsRef<str>>(description: Option<&str>, choices: &[S]) -> Result<String> {
    let options = enumerate_choices(choices)?;
    Ok(match description {
        Some(d) => format!("{WITH_DESCRIPTION_HEAD}{d}\n\nOPTIONS :\n{options}\n\nRESPONSE : \n"),
        None => format!("{BIAS_HEAD}OPTIONS :\n{options}\n\nRESPONSE : "),
    })
}

/// Strict parse of a model reply: `"k"` or `"[k]"` after trimming, with
/// `1 <= k <= n_choices`. Returns the 0-based position.
pub fn parse_response(response: &str, n_choices: usize) -> Option<usize> {
    let t = response.trim();
    let digits = t
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    (1..=n_choices).contains(&k).then(|| k - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningScore {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// Responses that did not parse to a valid option.
    pub invalid: usize,
    pub verdicts: Vec<bool>,
}

pub fn score_reasoning<S: AsRef<str>>(
    responses: &[S],
    instances: &[PreparedInstance],
) -> Result<ReasoningScore> {
    if responses.len() != instances.len() {
        return Err(Error::InvalidArgument(format!(
            "{} responses for {} instances",
            responses.len(),
            instances.len()
        )));
    }
    let mut invalid = 0;
    let verdicts: Vec<bool> = responses
        .iter()
        .zip(instances)
        .map(|(r, inst)| match parse_response(r.as_ref(), inst.choices.len()) {
            Some(p) => p == inst.answer_position,
            None => {
                invalid += 1;
                false
            }
        })
        .collect();
    let correct = verdicts.iter().filter(|v| **v).count();
    let total = verdicts.len();
    Ok(ReasoningScore {
        accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        correct,
        total,
        invalid,
        verdicts,
    })
}

/// Text-in, text-out model endpoint.
pub trait LanguageModel: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, ClientError>;
}

impl<T: LanguageModel + ?Sized> LanguageModel for &T {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        (**self).complete(prompt)
    }
}

impl<T: LanguageModel + ?Sized> LanguageModel for std::sync::Arc<T> {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        (**self).complete(prompt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningRun {
    pub prompts: Vec<String>,
    pub responses: Vec<String>,
    pub score: ReasoningScore,
    /// Presented answer position counts, index = position.
    pub position_counts: Vec<usize>,
}

/// Rotates, prompts and scores a dataset. With `use_description = false`
/// the language-bias prompt is used. Failed calls score as wrong.
pub fn run_reasoning(
    instances: &[ReasoningInstance],
    model: &dyn LanguageModel,
    policy: &ClientPolicy,
    use_description: bool,
) -> Result<ReasoningRun> {
    let prepared = instances
        .iter()
        .enumerate()
        .map(|(i, inst)| prepare(inst, i))
        .collect::<Result<Vec<_>>>()?;
    let prompts = prepared
        .iter()
        .map(|p| {
            let d = if use_description { p.description.as_deref() } else { None };
            build_reasoning_prompt(d, &p.choices)
        })
        .collect::<Result<Vec<_>>>()?;
    let responses: Vec<String> = policy
        .map_bounded(&prompts, |p| policy.call(|| model.complete(p)))
        .into_iter()
        .map(|r| r.unwrap_or_default())
        .collect();
    let score = score_reasoning(&responses, &prepared)?;
    let width = prepared.iter().map(|p| p.choices.len()).max().unwrap_or(0);
    let mut position_counts = vec![0; width];
    for p in &prepared {
        position_counts[p.answer_position] += 1;
    }
    Ok(ReasoningRun {
        prompts,
        responses,
        score,
        position_counts,
    })
}

/// Deterministic stand-in model: reads the prompt back and answers with
/// the option whose words form the longest common subsequence with the
/// description (case-folded word tokens). Ties, and prompts without a
/// description, go to the first option.
#[derive(Debug, Clone, Copy, Default)]
pub struct OverlapModel;

impl OverlapModel {
    pub fn pick(description: Option<&str>, options: &[&str]) -> usize {
        let Some(d) = description else { return 0 };
        let dwords = folded_words(d);
        let mut best = (0, 0usize);
        for (i, o) in options.iter().enumerate() {
            let score = lcs_len(&folded_words(o), &dwords);
            if score > best.1 {
                best = (i, score);
            }
        }
        best.0
    }
}

fn folded_words(s: &str) -> Vec<String> {
    crate::metrics::words(s).into_iter().map(|w| w.to_lowercase()).collect()
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

impl LanguageModel for OverlapModel {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        let description = prompt
            .split_once("IMAGE-DESCRIPTION : ")
            .map(|(_, rest)| rest.split_once("\n\nOPTIONS :").map_or(rest, |(d, _)| d));
        let options_block = prompt
            .split_once("OPTIONS :\n")
            .and_then(|(_, rest)| rest.split_once("\n\nRESPONSE : "))
            .map(|(o, _)| o)
            .ok_or_else(|| ClientError::Malformed("no options block".into()))?;
        let options: Vec<&str> = options_block
            .lines()
            .map(|l| l.split_once("] ").map_or(l, |(_, t)| t))
            .collect();
        Ok((Self::pick(description, &options) + 1).to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prompt_template_exact() {
        let p = build_reasoning_prompt(Some("A red bus."), &["a red bus", "a blue bus"]).unwrap();
        assert_eq!(
            p,
            "Given the following image description and image caption options, choose the most likely OPTION number :\n\nIMAGE-DESCRIPTION : A red bus.\n\nOPTIONS :\n[1] a red bus\n[2] a blue bus\n\nRESPONSE : \n"
        );
        let b = build_reasoning_prompt(None, &["x", "y", "z"]).unwrap();
        assert_eq!(
            b,
            "Given the following image caption options, choose the most likely OPTION number :\n\nOPTIONS :\n[1] x\n[2] y\n[3] z\n\nRESPONSE : "
        );
        assert!(build_reasoning_prompt(None, &["x", " "]).is_err());
        assert!(build_reasoning_prompt(None, &["x"]).is_err());
    }

    #[test]
    fn rotation_examples() {
        let got: Vec<_> = (0..4).map(|i| rotate_answer(i, 2)).collect();
        assert_eq!(got, [0, 1, 0, 1]);
        assert_eq!(rotate_answer(7, 3), 1);
        let ones = (0..1000).filter(|&i| rotate_answer(i, 2) == 1).count();
        assert_eq!(ones, 500);
        assert_eq!(rotation_order(0, 3, 2), [1, 2, 0]);
        assert_eq!(rotation_order(2, 4, 0), [2, 0, 1, 3]);
    }

    #[test]
    fn strict_parsing() {
        assert_eq!(parse_response(" 2\n", 2), Some(1));
        assert_eq!(parse_response("[1]", 2), Some(0));
        for bad in ["", "3", "0", "Option 1", "1.", "[1", "1 or 2", "-1", "+1"] {
            assert_eq!(parse_response(bad, 2), None, "{bad:?}");
        }
    }

    fn prepared(position: usize) -> PreparedInstance {
        PreparedInstance {
            instance_id: "i".into(),
            description: None,
            presented_order: vec![0, 1],
            choices: vec!["a".into(), "b".into()],
            answer_position: position,
        }
    }

    #[test]
    fn score_example() {
        let insts = [prepared(0), prepared(1), prepared(0)];
        let s = score_reasoning(&["1", "2", "x"], &insts).unwrap();
        assert!((s.accuracy - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.invalid, 1);
        let s = score_reasoning(&["", "", ""], &insts).unwrap();
        assert_eq!(s.accuracy, 0.0);
        assert!(score_reasoning(&["1"], &insts).is_err());
    }

    #[test]
    fn overlap_model_reads_prompt() {
        let inst = ReasoningInstance {
            instance_id: "i".into(),
            description: Some("A man rides a horse on the beach.".into()),
            choices: vec!["a horse rides a man".into(), "a man rides a horse".into()],
            answer_index: 1,
        };
        let run = run_reasoning(&[inst.clone(), inst], &OverlapModel, &ClientPolicy::default(), true).unwrap();
        assert_eq!(run.score.correct, 2);
        assert_eq!(run.position_counts, [1, 1]);
    }
}
