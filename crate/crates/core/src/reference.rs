//! Slow reference implementations used to cross-check the fast paths.
//!
//! Everything here trades efficiency for obviousness: brute-force
//! enumeration and literal restatements of definitions. Test suites
//! compare the production code against these.

use crate::discourse::{
    DiscourseError, EduSpan, FlatRelationSeq, Nuclearity, RstChild, RstNode, RstTree,
};
use crate::scalar::Scalar;
use rand::Rng;

/// Everything brute-force enumeration can say about a CRF instance.
pub struct CrfEnumeration<F> {
    pub log_partition: F,
    pub best_labels: Vec<usize>,
    pub best_score: F,
    /// Score of every label sequence, in lexicographic label order.
    pub scores: Vec<F>,
}

/// Enumerates all `n_labels^T` label sequences directly from the score
/// definition: per boundary, the pairwise weight row dotted with the left
/// state plus the pairwise bias, plus optional unary emissions.
pub fn crf_enumerate<F: Scalar>(
    states: &[&[F]],
    n_labels: usize,
    w: &[F],
    b: &[F],
    unary: Option<&[F]>,
) -> CrfEnumeration<F> {
    let t = states.len();
    assert!(t >= 1 && n_labels >= 1);
    let hidden = states[0].len();
    let total = n_labels.pow(t as u32);
    let mut scores = Vec::with_capacity(total);
    let mut best_score = F::neg_infinity();
    let mut best_labels = vec![0; t];
    let unary_term = |y: usize, h: &[F]| -> F {
        match unary {
            Some(u) => {
                let mut term = F::zero();
                for k in 0..hidden {
                    term += u[y * hidden + k] * h[k];
                }
                term
            }
            None => F::zero(),
        }
    };
    let mut labels = vec![0usize; t];
    loop {
        // Accumulation order mirrors the forward recursions term for term,
        // so maxima agree bitwise with the Viterbi score.
        let mut score = unary_term(labels[0], states[0]);
        for j in 0..t - 1 {
            let pair = labels[j] * n_labels + labels[j + 1];
            let mut term = F::zero();
            for k in 0..hidden {
                term += w[pair * hidden + k] * states[j][k];
            }
            score += term + b[pair];
            score += unary_term(labels[j + 1], states[j + 1]);
        }
        if score > best_score {
            best_score = score;
            best_labels = labels.clone();
        }
        scores.push(score);
        // Odometer increment in lexicographic order.
        let mut pos = t;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            labels[pos] += 1;
            if labels[pos] < n_labels {
                break;
            }
            labels[pos] = 0;
        }
        if labels.iter().all(|&l| l == 0) {
            break;
        }
    }
    let m = scores.iter().cloned().fold(F::neg_infinity(), F::max);
    let sum: F = scores.iter().map(|&s| (s - m).exp()).sum();
    CrfEnumeration {
        log_partition: m + sum.ln(),
        best_labels,
        best_score,
        scores,
    }
}

/// Flattens a tree by, for every boundary, walking the whole tree to
/// collect the nodes whose leaf range straddles it, taking the deepest,
/// and applying the nucleus-after-dependent exclusion.
pub fn flatten_by_boundary_walk(tree: &RstTree) -> Result<FlatRelationSeq, DiscourseError> {
    let edus = tree.edu_count();
    if edus < 2 {
        return Err(DiscourseError::Invalid("need at least 2 EDUs".into()));
    }
    let entries = (0..edus - 1)
        .map(|boundary| {
            let mut straddlers = Vec::new();
            collect_straddlers(&tree.root, 0, boundary, 0, &mut straddlers);
            let (relation, nucleus_start, _) = straddlers
                .into_iter()
                .max_by_key(|&(_, _, depth)| depth)
                .expect("some node straddles every boundary");
            if nucleus_start > boundary {
                None
            } else {
                Some(relation)
            }
        })
        .collect();
    Ok(FlatRelationSeq { entries })
}

fn leaf_count(node: &RstNode) -> usize {
    match node {
        RstNode::Leaf(_) => 1,
        RstNode::Internal { children, .. } => {
            children.iter().map(|c| leaf_count(&c.node)).sum()
        }
    }
}

/// Records (relation, leftmost nucleus leaf index, depth) for every node
/// whose leaf range contains both `boundary` and `boundary + 1`.
fn collect_straddlers(
    node: &RstNode,
    first: usize,
    boundary: usize,
    depth: usize,
    out: &mut Vec<(String, usize, usize)>,
) {
    let RstNode::Internal { relation, children } = node else {
        return;
    };
    let count = leaf_count(node);
    let last = first + count - 1;
    if first <= boundary && boundary < last {
        let mut offset = first;
        let mut nucleus_start = None;
        for c in children {
            if nucleus_start.is_none() && c.nuclearity == Nuclearity::Nucleus {
                nucleus_start = Some(offset);
            }
            offset += leaf_count(&c.node);
        }
        out.push((
            relation.clone(),
            nucleus_start.expect("valid trees have a nucleus child"),
            depth,
        ));
    }
    let mut offset = first;
    for c in children {
        collect_straddlers(&c.node, offset, boundary, depth + 1, out);
        offset += leaf_count(&c.node);
    }
}

/// Enumerates every binary tree shape over `leaves` EDUs. Leaves get one
/// five-token span per sentence; internal nodes get relation "R" and
/// nucleus-first marks, ready for [`decorate_binary`].
pub fn binary_tree_shapes(leaves: usize) -> Vec<RstTree> {
    assert!(leaves >= 1);
    shapes(0, leaves)
        .into_iter()
        .map(|root| RstTree { root })
        .collect()
}

fn shapes(first: usize, count: usize) -> Vec<RstNode> {
    if count == 1 {
        return vec![RstNode::Leaf(EduSpan {
            sentence: first,
            start: 0,
            end: 4,
        })];
    }
    let mut out = Vec::new();
    for left in 1..count {
        for l in shapes(first, left) {
            for r in shapes(first + left, count - left) {
                out.push(RstNode::Internal {
                    relation: "R".into(),
                    children: vec![
                        RstChild {
                            nuclearity: Nuclearity::Nucleus,
                            node: l.clone(),
                        },
                        RstChild {
                            nuclearity: Nuclearity::Satellite,
                            node: r.clone(),
                        },
                    ],
                });
            }
        }
    }
    out
}

/// Assigns every internal node a random relation from `relations` and a
/// random nuclearity pattern from {NS, SN, NN}.
pub fn decorate_binary(node: &mut RstNode, rng: &mut impl Rng, relations: &[&str]) {
    if let RstNode::Internal { relation, children } = node {
        *relation = relations[rng.gen_range(0..relations.len())].to_string();
        let pattern = match rng.gen_range(0..3) {
            0 => [Nuclearity::Nucleus, Nuclearity::Satellite],
            1 => [Nuclearity::Satellite, Nuclearity::Nucleus],
            _ => [Nuclearity::Nucleus, Nuclearity::Nucleus],
        };
        for (c, nuc) in children.iter_mut().zip(pattern) {
            c.nuclearity = nuc;
        }
        for c in children {
            decorate_binary(&mut c.node, rng, relations);
        }
    }
}
