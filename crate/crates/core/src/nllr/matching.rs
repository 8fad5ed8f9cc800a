//! Non-local grouping of similar patches.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;

use super::NllrParams;

/// `K` similar `p × p` patches stacked as the columns of a `p² × K` matrix
/// (column-major; each column is a patch in row-major order).
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGroup<T> {
    pub reference: (usize, usize),
    /// Top-left corners; `members[0]` is always the reference.
    pub members: Vec<(usize, usize)>,
    pub patch_size: usize,
    pub matrix: Vec<T>,
    /// Set when the search window held fewer than `K` candidates and the
    /// best matches were repeated to fill the group.
    pub padded: bool,
    /// Number of singular values kept by the last shrinkage, if any.
    pub rank: Option<usize>,
}

impl<T: Scalar> PatchGroup<T> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn column(&self, j: usize) -> &[T] {
        let d = self.patch_size * self.patch_size;
        &self.matrix[j * d..(j + 1) * d]
    }
}

fn patch_ssd<T: Scalar>(img: &Image<T>, a: (usize, usize), b: (usize, usize), p: usize) -> T {
    let mut acc = T::zero();
    for i in 0..p {
        let ra = &img.row(a.0 + i)[a.1..a.1 + p];
        let rb = &img.row(b.0 + i)[b.1..b.1 + p];
        for (x, y) in ra.iter().zip(rb) {
            let d = *x - *y;
            acc += d * d;
        }
    }
    acc
}

/// Collects the `K` patches in the search window closest to the reference in
/// sum of squared differences, ties broken by row-major scan order.
pub fn block_match<T: Scalar>(img: &Image<T>, reference: (usize, usize), params: &NllrParams) -> Result<PatchGroup<T>> {
    let p = params.patch_size;
    let (h, w) = img.dims();
    let (r, c) = reference;
    if h < p || w < p || r + p > h || c + p > w {
        return Err(Error::invalid(format!(
            "reference patch {p}x{p} at ({r}, {c}) outside {h}x{w} image"
        )));
    }
    let rad = params.search_radius;
    let rows = r.saturating_sub(rad)..=(r + rad).min(h - p);
    let cols = c.saturating_sub(rad)..=(c + rad).min(w - p);

    let mut candidates: Vec<(T, usize, (usize, usize))> = Vec::new();
    let mut order = 0usize;
    for rr in rows {
        for cc in cols.clone() {
            if (rr, cc) != reference {
                let d = patch_ssd(img, reference, (rr, cc), p);
                candidates.push((d, order, (rr, cc)));
            }
            order += 1;
        }
    }

    let need = params.group_size - 1;
    let cmp = |a: &(T, usize, (usize, usize)), b: &(T, usize, (usize, usize))| {
        a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1))
    };
    if candidates.len() > need {
        candidates.select_nth_unstable_by(need, cmp);
        candidates.truncate(need);
    }
    candidates.sort_unstable_by(cmp);

    let mut members = Vec::with_capacity(params.group_size);
    members.push(reference);
    members.extend(candidates.iter().map(|x| x.2));
    let padded = members.len() < params.group_size;
    let mut i = 0;
    while members.len() < params.group_size {
        // repeat the best matches (the reference itself when alone)
        members.push(members[i]);
        i += 1;
    }

    let mut matrix = Vec::with_capacity(p * p * members.len());
    for &(rr, cc) in &members {
        for i in 0..p {
            matrix.extend_from_slice(&img.row(rr + i)[cc..cc + p]);
        }
    }
    Ok(PatchGroup {
        reference,
        members,
        patch_size: p,
        matrix,
        padded,
        rank: None,
    })
}
