//! Per-topic keywords, authorities and hubs.

use std::fmt;

use ndarray::ArrayView1;

use crate::corpus::Vocabulary;
use crate::model::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct TopicEntry {
    pub keywords: Vec<(String, f64)>,
    pub authorities: Vec<(String, f64)>,
    pub hubs: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicReport {
    pub topics: Vec<TopicEntry>,
}

/// Indices of the `m` largest values, descending, ties by ascending index.
fn top(values: ArrayView1<f64>, m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(m);
    idx
}

/// For each topic: the `m` most probable words, and the `m` users with the
/// largest authority and hub scores. `m` is truncated to the available
/// words or users.
pub fn topic_report(params: &ModelParams, vocab: &Vocabulary, users: &[String], m: usize) -> TopicReport {
    let topics = (0..params.topics())
        .map(|k| {
            let pick = |col: ArrayView1<f64>, name: &dyn Fn(usize) -> String| {
                top(col, m).into_iter().map(|i| (name(i), col[i])).collect()
            };
            TopicEntry {
                keywords: pick(params.tau.row(k), &|w| vocab.word(w as u32).to_string()),
                authorities: pick(params.authority.column(k), &|u| users[u].clone()),
                hubs: pick(params.hub.column(k), &|u| users[u].clone()),
            }
        })
        .collect();
    TopicReport { topics }
}

/// One tab-separated row per topic: `topic`, keywords, authority users, hub
/// users, each list comma-separated in rank order.
impl fmt::Display for TopicReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[(String, f64)]| xs.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>().join(", ");
        writeln!(f, "topic\tkeywords\tauthority users\thub users")?;
        for (k, t) in self.topics.iter().enumerate() {
            writeln!(f, "{}\t{}\t{}\t{}", k + 1, join(&t.keywords), join(&t.authorities), join(&t.hubs))?;
        }
        Ok(())
    }
}
