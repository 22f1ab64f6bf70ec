use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LabeledCommit;

fn head_count(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64).ceil() as usize).min(n)
}

fn chronological(items: &[LabeledCommit]) -> Vec<LabeledCommit> {
    let mut v = items.to_vec();
    v.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then(a.commit.cmp(&b.commit)));
    v
}

/// Oldest `ceil(ratio * n)` commits train, the rest test.
pub fn split_dev_process(items: &[LabeledCommit], ratio: f64) -> (Vec<LabeledCommit>, Vec<LabeledCommit>) {
    let mut sorted = chronological(items);
    let test = sorted.split_off(head_count(sorted.len(), ratio));
    (sorted, test)
}

/// Shuffles the distinct projects with `seed` and sends the first
/// `ceil(ratio * projects)` of them to training.
pub fn split_cross_project(
    items: &[LabeledCommit],
    ratio: f64,
    seed: u64,
) -> (Vec<LabeledCommit>, Vec<LabeledCommit>) {
    let mut projects: Vec<&str> = items
        .iter()
        .map(|c| c.project.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    projects.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train_projects: BTreeSet<&str> = projects[..head_count(projects.len(), ratio)].iter().copied().collect();
    let (train, test) = chronological(items)
        .into_iter()
        .partition(|c| train_projects.contains(c.project.as_str()));
    (train, test)
}
