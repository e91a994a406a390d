use super::{HypothesisClass, MemberSet};
use crate::error::{invalid, Result};

/// A complete binary mistake tree of depth `d`, internal nodes in heap order
/// (root at 0, left child `2i + 1`, right child `2i + 2`). Going right means
/// label 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MistakeTree {
    depth: usize,
    nodes: Vec<usize>,
}

impl MistakeTree {
    pub fn new(depth: usize, nodes: Vec<usize>) -> Result<Self> {
        let expected = (1usize << depth) - 1;
        if nodes.len() != expected {
            return Err(invalid(format!(
                "a depth-{depth} mistake tree has {expected} internal nodes, got {}",
                nodes.len()
            )));
        }
        Ok(Self { depth, nodes })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Root-to-leaf labelled paths, one per leaf, left to right.
    pub fn paths(&self) -> Vec<Vec<(usize, bool)>> {
        let mut out = Vec::with_capacity(1 << self.depth);
        for leaf in 0..(1usize << self.depth) {
            let mut node = 0;
            let mut path = Vec::with_capacity(self.depth);
            for level in (0..self.depth).rev() {
                let right = (leaf >> level) & 1 == 1;
                path.push((self.nodes[node], right));
                node = 2 * node + if right { 2 } else { 1 };
            }
            out.push(path);
        }
        out
    }
}

/// True iff every root-to-leaf labelled path is realized by some member.
pub fn is_shattered(class: &HypothesisClass, tree: &MistakeTree) -> Result<bool> {
    for &x in tree.nodes() {
        class.domain().check(x)?;
    }
    Ok(shattered_at(class, tree, 0, &class.all()))
}

fn shattered_at(class: &HypothesisClass, tree: &MistakeTree, node: usize, set: &MemberSet) -> bool {
    if set.is_empty() {
        return false;
    }
    if node >= tree.nodes.len() {
        return true;
    }
    let x = tree.nodes[node];
    shattered_at(class, tree, 2 * node + 1, &class.restrict(set, x, false))
        && shattered_at(class, tree, 2 * node + 2, &class.restrict(set, x, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{make_point_class, Domain, Hypothesis};

    fn all_trees(depth: usize, n: usize) -> impl Iterator<Item = MistakeTree> {
        let nodes = (1usize << depth) - 1;
        let total = n.pow(nodes as u32);
        (0..total).map(move |mut code| {
            let labels = (0..nodes)
                .map(|_| {
                    let x = code % n + 1;
                    code /= n;
                    x
                })
                .collect();
            MistakeTree::new(depth, labels).unwrap()
        })
    }

    #[test]
    fn point3_depth_one_rooted_at_one() {
        let c = make_point_class(3).unwrap();
        let t = MistakeTree::new(1, vec![1]).unwrap();
        assert!(is_shattered(&c, &t).unwrap());
    }

    #[test]
    fn singleton_never_shatters_depth_one() {
        let c = HypothesisClass::new(Domain::new(3).unwrap(), vec![Hypothesis::parse_bits("010").unwrap()]).unwrap();
        for t in all_trees(1, 3) {
            assert!(!is_shattered(&c, &t).unwrap());
        }
    }

    #[test]
    fn point3_shatters_no_depth_two_tree() {
        let c = make_point_class(3).unwrap();
        let count = all_trees(2, 3).filter(|t| is_shattered(&c, t).unwrap()).count();
        assert_eq!(count, 0);
    }

    #[test]
    fn paths_follow_heap_order() {
        let t = MistakeTree::new(2, vec![1, 2, 3]).unwrap();
        let p = t.paths();
        assert_eq!(p[0], vec![(1, false), (2, false)]);
        assert_eq!(p[3], vec![(1, true), (3, true)]);
    }

    #[test]
    fn wrong_node_count_rejected() {
        assert!(MistakeTree::new(2, vec![1, 2]).is_err());
        let c = make_point_class(2).unwrap();
        let t = MistakeTree::new(1, vec![5]).unwrap();
        assert!(is_shattered(&c, &t).is_err());
    }
}
