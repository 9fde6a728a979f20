//! Deterministic lexical retrieval over regulatory documents and historical
//! test cases: fixed-size overlapping chunks ranked by term-frequency
//! cosine. No embeddings, no randomness; identical corpora and queries give
//! identical groundings.

use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct Chunk {
    pub doc_id: String,
    /// Byte span in the source document.
    pub start: usize,
    pub end: usize,
    pub text: String,
    tf: BTreeMap<String, f64>,
    norm: f64,
}

#[derive(Clone, Debug, Default)]
pub struct RetrievalIndex {
    pub chunks: Vec<Chunk>,
    pub target_size: usize,
    pub overlap: usize,
}

pub const DEFAULT_CHUNK_SIZE: usize = 1500;
pub const DEFAULT_CHUNK_OVERLAP: usize = 200;

fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

fn tf_vector(tokens: &[String]) -> (BTreeMap<String, f64>, f64) {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.clone()).or_insert(0.0) += 1.0;
    }
    let norm = counts.values().map(|c| c * c).sum::<f64>().sqrt();
    (counts, norm)
}

impl RetrievalIndex {
    pub fn build(docs: &[(String, String)], target_size: usize, overlap: usize) -> Self {
        let overlap = overlap.min(target_size.saturating_sub(1));
        let step = (target_size - overlap).max(1);
        let mut chunks = Vec::new();
        for (doc_id, text) in docs {
            if text.is_empty() {
                continue;
            }
            // Chunks cover the document without gaps: each window starts
            // `step` bytes after the previous one (snapped to char
            // boundaries) and spans `target_size` bytes.
            let mut start = 0usize;
            loop {
                let end = snap_to_char(text, (start + target_size).min(text.len()));
                let slice = &text[start..end];
                let tokens = tokenize(slice);
                let (tf, norm) = tf_vector(&tokens);
                chunks.push(Chunk {
                    doc_id: doc_id.clone(),
                    start,
                    end,
                    text: slice.to_string(),
                    tf,
                    norm,
                });
                if end >= text.len() {
                    break;
                }
                start = snap_to_char(text, start + step);
            }
        }
        RetrievalIndex { chunks, target_size, overlap }
    }

    pub fn build_default(docs: &[(String, String)]) -> Self {
        Self::build(docs, DEFAULT_CHUNK_SIZE, DEFAULT_CHUNK_OVERLAP)
    }

    /// Top-k chunks by normalized term-frequency cosine similarity. Ties
    /// break by document order; zero-scored chunks are never returned.
    pub fn retrieve(&self, query: &str, top_k: usize) -> Vec<&Chunk> {
        if top_k == 0 {
            return Vec::new();
        }
        let (q_tf, q_norm) = tf_vector(&tokenize(query));
        if q_norm == 0.0 {
            return Vec::new();
        }
        let mut scored: Vec<(f64, usize)> = self
            .chunks
            .iter()
            .enumerate()
            .filter_map(|(i, chunk)| {
                if chunk.norm == 0.0 {
                    return None;
                }
                let dot: f64 = q_tf
                    .iter()
                    .filter_map(|(t, qc)| chunk.tf.get(t).map(|cc| qc * cc))
                    .sum();
                if dot == 0.0 {
                    None
                } else {
                    Some((dot / (q_norm * chunk.norm), i))
                }
            })
            .collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
        scored.into_iter().take(top_k).map(|(_, i)| &self.chunks[i]).collect()
    }

    /// Retrieved chunks rendered for prompt injection.
    pub fn render_retrieved(chunks: &[&Chunk]) -> String {
        if chunks.is_empty() {
            return "(no supporting material retrieved)".to_string();
        }
        let mut out = String::new();
        for (i, c) in chunks.iter().enumerate() {
            if i > 0 {
                out.push_str("\n---\n");
            }
            out.push_str(&format!("[{} @{}..{}]\n{}", c.doc_id, c.start, c.end, c.text.trim()));
        }
        out
    }
}

fn snap_to_char(text: &str, byte_index: usize) -> usize {
    if byte_index >= text.len() {
        return text.len();
    }
    let mut i = byte_index;
    while i > 0 && !text.is_char_boundary(i) {
        i -= 1;
    }
    i
}
