//! Distinct-descendant pruning.

use crate::snapshot::PageSnapshot;

/// Drops every element that has a descendant in the set with the same
/// visible text, keeping the most specific one. Input order is irrelevant;
/// the output is in document order.
pub fn prune_descendants(snapshot: &PageSnapshot, set: &[usize]) -> Vec<usize> {
    let n = snapshot.len();
    let mut member = vec![false; n];
    for &i in set {
        member[i] = true;
    }
    let mut removed = vec![false; n];
    for &d in set {
        let text = &snapshot.element(d).visible_text;
        for a in snapshot.ancestors(d) {
            if member[a] && !removed[a] && snapshot.element(a).visible_text == *text {
                removed[a] = true;
            }
        }
    }
    (0..n).filter(|&i| member[i] && !removed[i]).collect()
}

/// Same as [`prune_descendants`] over a membership mask.
pub fn prune_mask(snapshot: &PageSnapshot, mask: &[bool]) -> Vec<bool> {
    let set: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let mut out = vec![false; mask.len()];
    for i in prune_descendants(snapshot, &set) {
        out[i] = true;
    }
    out
}
