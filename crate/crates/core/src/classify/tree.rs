//! A single Gini-impurity decision tree grown to purity, with per-node
//! random feature subsampling for forest use.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Arena node. Leaves carry class counts [n_hc, n_pd].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        counts: [u32; 2],
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// Grow a tree on the rows in `idx`. Columns are feature-major; `mtry`
    /// features are sampled per node without replacement.
    pub fn grow(
        columns: &[Vec<f64>],
        y: &[u8],
        idx: &[usize],
        mtry: usize,
        rng: &mut impl Rng,
    ) -> DecisionTree {
        let mut tree = DecisionTree { nodes: Vec::new() };
        tree.grow_node(columns, y, idx.to_vec(), mtry, rng);
        tree
    }

    fn grow_node(
        &mut self,
        columns: &[Vec<f64>],
        y: &[u8],
        idx: Vec<usize>,
        mtry: usize,
        rng: &mut impl Rng,
    ) -> u32 {
        let node_id = self.nodes.len() as u32;
        let n_pd = idx.iter().filter(|&&i| y[i] == 1).count() as u32;
        let counts = [idx.len() as u32 - n_pd, n_pd];
        // Reserve the slot so child ids stay consistent during recursion.
        self.nodes.push(Node::Leaf { counts });
        if counts[0] == 0 || counts[1] == 0 || idx.len() < 2 {
            return node_id;
        }

        let m = columns.len();
        // Partial Fisher-Yates draw of mtry distinct features.
        let mut pool: Vec<usize> = (0..m).collect();
        let draws = mtry.min(m);
        for d in 0..draws {
            let pick = rng.random_range(d..m);
            pool.swap(d, pick);
        }
        let candidates = &pool[..draws];

        let parent_gini = gini(counts);
        let mut best: Option<(usize, f64, f64)> = None; // (feature, threshold, impurity decrease)
        let mut sortable: Vec<(f64, u8)> = Vec::with_capacity(idx.len());
        for &f in candidates {
            sortable.clear();
            sortable.extend(idx.iter().map(|&i| (columns[f][i], y[i])));
            sortable.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let total_pd = counts[1];
            let total = idx.len() as u32;
            let mut left_n = 0u32;
            let mut left_pd = 0u32;
            for w in 0..sortable.len() - 1 {
                left_n += 1;
                left_pd += sortable[w].1 as u32;
                if sortable[w].0 == sortable[w + 1].0 {
                    continue; // identical values cannot split here
                }
                let right_n = total - left_n;
                let right_pd = total_pd - left_pd;
                let gl = gini([left_n - left_pd, left_pd]);
                let gr = gini([right_n - right_pd, right_pd]);
                let weighted =
                    (left_n as f64 * gl + right_n as f64 * gr) / total as f64;
                let decrease = parent_gini - weighted;
                let threshold = 0.5 * (sortable[w].0 + sortable[w + 1].0);
                match best {
                    Some((_, _, d)) if decrease <= d => {}
                    _ => best = Some((f, threshold, decrease)),
                }
            }
        }

        let Some((feature, threshold, decrease)) = best else {
            return node_id; // all candidate features constant within the node
        };
        if decrease <= 1e-15 {
            return node_id;
        }
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| columns[feature][i] <= threshold);
        if left_idx.is_empty() || right_idx.is_empty() {
            return node_id;
        }
        let left = self.grow_node(columns, y, left_idx, mtry, rng);
        let right = self.grow_node(columns, y, right_idx, mtry, rng);
        self.nodes[node_id as usize] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        node_id
    }

    /// Class vote of this tree for a feature row (`x <= threshold` goes
    /// left). Leaf ties vote HC.
    pub fn predict(&self, x: &[f64]) -> u8 {
        let mut cur = 0usize;
        loop {
            match &self.nodes[cur] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    cur = if x[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Leaf { counts } => {
                    return if counts[1] > counts[0] { 1 } else { 0 };
                }
            }
        }
    }
}

fn gini(counts: [u32; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}
