//! Greedy splitting of an interval family into pairwise-disjoint classes.
//!
//! Intervals are closed: sharing an endpoint counts as intersecting.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Indexed closed intervals, possibly overlapping. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalFamily {
    items: Vec<[f64; 2]>,
}

#[inline]
fn meets(a: [f64; 2], b: [f64; 2]) -> bool {
    a[0] <= b[1] && b[0] <= a[1]
}

impl IntervalFamily {
    pub fn new(items: Vec<[f64; 2]>) -> Result<Self> {
        for (i, iv) in items.iter().enumerate() {
            if !(iv[0] <= iv[1]) {
                return Err(LabError::Config(format!("interval {i} = [{}, {}] has l > r", iv[0], iv[1])));
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[[f64; 2]] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `max_j #{i : I_j meets I_i}`, counting `i = j`; 0 for an empty family.
    pub fn intersection_degree(&self) -> usize {
        let mut order: Vec<usize> = (0..self.items.len()).collect();
        order.sort_by(|&a, &b| self.items[a][0].total_cmp(&self.items[b][0]));
        let mut best = 0;
        for &j in &order {
            let ij = self.items[j];
            // Intervals starting after r_j cannot meet I_j.
            let mut n = 0;
            for &i in &order {
                if self.items[i][0] > ij[1] {
                    break;
                }
                if meets(self.items[i], ij) {
                    n += 1;
                }
            }
            best = best.max(n);
        }
        best
    }

    /// Repeatedly takes the greedy ascending-index disjoint subfamily of
    /// what remains: start from the least index and keep adding the least
    /// index that misses everything chosen so far.
    pub fn split_partition(&self) -> Partition {
        let mut remaining: Vec<usize> = (0..self.items.len()).collect();
        let mut classes = Vec::new();
        while !remaining.is_empty() {
            let mut chosen: Vec<usize> = Vec::new();
            let mut rest = Vec::new();
            for &j in &remaining {
                if chosen.iter().all(|&i| !meets(self.items[i], self.items[j])) {
                    chosen.push(j);
                } else {
                    rest.push(j);
                }
            }
            classes.push(chosen);
            remaining = rest;
        }
        Partition { classes }
    }
}

/// Classes of indices into an [`IntervalFamily`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub classes: Vec<Vec<usize>>,
}

impl Partition {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Class number of every index.
    pub fn assignment(&self, n: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n];
        for (c, members) in self.classes.iter().enumerate() {
            for &i in members {
                out[i] = c;
            }
        }
        out
    }

    /// Every index appears in exactly one class.
    pub fn covers(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for &i in self.classes.iter().flatten() {
            if i >= n || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        seen.into_iter().all(|s| s)
    }

    /// No two members of one class intersect.
    pub fn classes_disjoint(&self, fam: &IntervalFamily) -> bool {
        self.classes.iter().all(|class| {
            class.iter().enumerate().all(|(k, &i)| class[k + 1..].iter().all(|&j| !meets(fam.items[i], fam.items[j])))
        })
    }

    /// Every index placed after class `c` meets the union of class `c`.
    pub fn is_maximal(&self, fam: &IntervalFamily) -> bool {
        for (c, class) in self.classes.iter().enumerate() {
            for later in &self.classes[c + 1..] {
                for &j in later {
                    if !class.iter().any(|&i| meets(fam.items[i], fam.items[j])) {
                        return false;
                    }
                }
            }
        }
        true
    }
}
