//! Plain-text renderers for the report table layouts, plus the
//! per-round agreement curves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{words, CorpusRow, ReadabilityScores};
use crate::model::{Metric, Task2State};
use crate::sxs::{bucket_delta, SxSAggregate};

/// Right-aligned columns except the first; a dashed rule under the header.
pub fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate().take(cols) {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let parts: Vec<String> = (0..cols)
            .map(|i| {
                let c = cells.get(i).map_or("", String::as_str);
                if i == 0 {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect();
        format!("| {} |", parts.join(" | "))
    };
    let mut out = line(header);
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// `19561` -> `"19,561"`.
pub fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

pub fn signed(n: i64) -> String {
    if n > 0 {
        format!("+{n}")
    } else {
        n.to_string()
    }
}

pub fn render_corpus_table(rows: &[(&str, CorpusRow)]) -> String {
    let header = strings(&[
        "Dataset",
        "Sample Count",
        "Tokens / Sentence",
        "Tokens",
        "Sentences",
        "NN",
        "ADJ",
        "ADV",
        "VB",
    ]);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, r)| {
            let mut cells = vec![name.to_string(), thousands(r.sample_count)];
            cells.extend(
                [r.tokens_per_sentence, r.tokens, r.sentences, r.nn, r.adj, r.adv, r.vb]
                    .iter()
                    .map(|v| format!("{v:.1}")),
            );
            cells
        })
        .collect();
    render_table(&header, &body)
}

pub fn render_readability_table(rows: &[(&str, ReadabilityScores)]) -> String {
    let header = strings(&["Dataset", "ARI", "FK", "GF", "SMOG"]);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, s)| {
            vec![
                name.to_string(),
                format!("{:.1}", s.ari),
                format!("{:.1}", s.fk),
                format!("{:.1}", s.gf),
                format!("{:.1}", s.smog),
            ]
        })
        .collect();
    render_table(&header, &body)
}

/// Bucket percentages with `left` as source 1 and `right` as source 2,
/// then one delta line per metric spelled out as arithmetic.
pub fn render_sxs_report(left: &str, right: &str, agg: &SxSAggregate) -> String {
    let header = vec![
        "Metric".to_string(),
        format!("{left} ++"),
        format!("{left} +"),
        "-".to_string(),
        format!("{right} +"),
        format!("{right} ++"),
        "Delta".to_string(),
    ];
    let body: Vec<Vec<String>> = Metric::ALL
        .iter()
        .map(|&m| {
            let row = agg.get(m);
            let mut cells = vec![m.display_name().to_string()];
            cells.extend(row.iter().map(u32::to_string));
            cells.push(signed(bucket_delta(row)));
            cells
        })
        .collect();
    let mut out = format!("{left} vs {right} (n = {})\n", agg.n_items);
    out.push_str(&render_table(&header, &body));
    for m in Metric::ALL {
        let r = agg.get(m);
        out.push_str(&format!(
            "{}: ({}+{}) - ({}+{}) = {}\n",
            m.display_name(),
            r[3],
            r[4],
            r[0],
            r[1],
            bucket_delta(r)
        ));
    }
    out
}

/// Accuracy rows in percent, two decimals.
pub fn render_reasoning_table(columns: &[&str], rows: &[(&str, Vec<f64>)]) -> Result<String> {
    let mut header = vec!["Image Description Model".to_string()];
    header.extend(columns.iter().map(|c| c.to_string()));
    let mut body = Vec::new();
    for (name, values) in rows {
        if values.len() != columns.len() {
            return Err(Error::InvalidArgument(format!(
                "row {name:?} has {} values for {} columns",
                values.len(),
                columns.len()
            )));
        }
        let mut cells = vec![name.to_string()];
        cells.extend(values.iter().map(|v| format!("{v:.2}")));
        body.push(cells);
    }
    Ok(render_table(&header, &body))
}

pub const REASONING_COLUMNS: [&str; 4] = ["ARO VG-A", "ARO VG-R", "SVO-Probes", "Winoground"];

/// Mean-rank block (two decimals) followed by the similarity block (three
/// decimals). Missing cells print as `-`.
pub fn render_t2i_table(
    rank_chunks: &[&str],
    ranks: &[(&str, Vec<Option<f64>>)],
    similarity_chunks: &[&str],
    similarities: &[(&str, Vec<Option<f64>>)],
) -> String {
    let block = |title: &str, chunks: &[&str], rows: &[(&str, Vec<Option<f64>>)], prec: usize| {
        let mut header = vec![title.to_string()];
        header.extend(chunks.iter().map(|c| c.to_string()));
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|(name, vals)| {
                let mut cells = vec![name.to_string()];
                cells.extend(
                    (0..chunks.len())
                        .map(|i| vals.get(i).copied().flatten().map_or("-".into(), |v| format!("{v:.prec$}"))),
                );
                cells
            })
            .collect();
        render_table(&header, &body)
    };
    let mut out = String::from("Mean Rank (lower is better)\n");
    out.push_str(&block("System", rank_chunks, ranks, 2));
    out.push_str("\nImage Similarity (higher is better)\n");
    out.push_str(&block("System", similarity_chunks, similarities, 3));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundCurvePoint {
    pub round_index: u32,
    pub n: usize,
    pub median_tokens: f64,
    pub median_seconds: f64,
    /// Absent for round 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_jaccard: Option<f64>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    })
}

/// Per-round medians of word tokens, elapsed seconds and similarity to the
/// previous round, across all given states.
pub fn agreement_curves<'a>(states: impl IntoIterator<Item = &'a Task2State>) -> Vec<RoundCurvePoint> {
    let mut by_round: BTreeMap<u32, (Vec<f64>, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for s in states {
        for r in &s.rounds {
            let e = by_round.entry(r.round_index).or_default();
            e.0.push(words(&r.text).len() as f64);
            e.1.push(r.elapsed_seconds);
            if let Some(j) = r.similarity_to_previous {
                e.2.push(j);
            }
        }
    }
    by_round
        .into_iter()
        .map(|(round_index, (mut t, mut s, mut j))| RoundCurvePoint {
            round_index,
            n: t.len(),
            median_tokens: median(&mut t).unwrap_or_default(),
            median_seconds: median(&mut s).unwrap_or_default(),
            median_jaccard: median(&mut j),
        })
        .collect()
}
