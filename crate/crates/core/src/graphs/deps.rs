use std::collections::{BTreeMap, BTreeSet};

use super::cfg::Cfg;

/// Immediate post-dominators (`None` for exit and for nodes that cannot
/// reach exit), computed on the reverse CFG.
pub fn post_dominators(cfg: &Cfg) -> Vec<Option<usize>> {
    let n = cfg.len();
    // Reverse postorder of the reverse CFG from exit.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack = vec![(Cfg::EXIT, 0usize)];
    seen[Cfg::EXIT] = true;
    while let Some((node, k)) = stack.pop() {
        if k < cfg.preds[node].len() {
            stack.push((node, k + 1));
            let next = cfg.preds[node][k];
            if !seen[next] {
                seen[next] = true;
                stack.push((next, 0));
            }
        } else {
            order.push(node);
        }
    }
    order.reverse();
    let mut rank = vec![usize::MAX; n];
    for (i, &node) in order.iter().enumerate() {
        rank[node] = i;
    }

    let mut ipdom: Vec<Option<usize>> = vec![None; n];
    ipdom[Cfg::EXIT] = Some(Cfg::EXIT);
    let mut changed = true;
    while changed {
        changed = false;
        for &b in order.iter().skip(1) {
            let mut new: Option<usize> = None;
            for &s in &cfg.succs[b] {
                if ipdom[s].is_none() {
                    continue;
                }
                new = Some(match new {
                    None => s,
                    Some(cur) => {
                        let (mut x, mut y) = (cur, s);
                        while x != y {
                            while rank[x] > rank[y] {
                                x = ipdom[x].unwrap();
                            }
                            while rank[y] > rank[x] {
                                y = ipdom[y].unwrap();
                            }
                        }
                        x
                    }
                });
            }
            if new.is_some() && ipdom[b] != new {
                ipdom[b] = new;
                changed = true;
            }
        }
    }
    ipdom[Cfg::EXIT] = None;
    ipdom
}

/// True when `a` post-dominates `b` (reflexive).
pub fn post_dominates(ipdom: &[Option<usize>], a: usize, b: usize) -> bool {
    let mut cur = Some(b);
    while let Some(c) = cur {
        if c == a {
            return true;
        }
        cur = ipdom[c];
    }
    false
}

/// Control dependences as `(predicate, dependent)` index pairs, plus the
/// nodes that cannot reach exit. Edges out of entry and self edges are
/// dropped. Nodes that cannot reach exit depend on their innermost
/// enclosing predicate.
pub fn control_dependences(cfg: &Cfg) -> (BTreeSet<(usize, usize)>, Vec<usize>) {
    let ipdom = post_dominators(cfg);
    let reaches = cfg.reaches_exit();
    let mut out = BTreeSet::new();
    for (a, b) in cfg.edges() {
        if a == Cfg::ENTRY || !reaches[a] || !reaches[b] {
            continue;
        }
        if post_dominates(&ipdom, b, a) {
            continue;
        }
        let stop = ipdom[a];
        let mut cur = Some(b);
        while let Some(c) = cur {
            if Some(c) == stop {
                break;
            }
            if c != a {
                out.insert((a, c));
            }
            cur = ipdom[c];
        }
    }
    let stuck: Vec<usize> = (0..cfg.len()).filter(|&k| !reaches[k]).collect();
    for &k in &stuck {
        if let Some(p) = cfg.enclosing[k] {
            if p != k {
                out.insert((p, k));
            }
        }
    }
    (out, stuck)
}

/// Reaching-definition data dependences `(def node, use node, variable)`.
/// A node never depends on itself.
pub fn data_dependences(
    cfg: &Cfg,
    defs: &[BTreeSet<String>],
    uses: &[BTreeSet<String>],
) -> BTreeSet<(usize, usize, String)> {
    let n = cfg.len();
    // Definition sites per variable.
    let mut sites: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (k, d) in defs.iter().enumerate() {
        for v in d {
            sites.entry(v.as_str()).or_default().push(k);
        }
    }
    let all: Vec<(usize, &str)> =
        sites.iter().flat_map(|(v, ks)| ks.iter().map(move |k| (*k, *v))).collect();
    let index: BTreeMap<(usize, &str), usize> = all.iter().enumerate().map(|(i, d)| (*d, i)).collect();

    let mut out_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut in_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut changed = true;
    while changed {
        changed = false;
        for k in 0..n {
            let mut inn = BTreeSet::new();
            for &p in &cfg.preds[k] {
                inn.extend(out_sets[p].iter().copied());
            }
            let mut out: BTreeSet<usize> =
                inn.iter().copied().filter(|d| !defs[k].contains(all[*d].1)).collect();
            for v in &defs[k] {
                out.insert(index[&(k, v.as_str())]);
            }
            if out != out_sets[k] {
                out_sets[k] = out;
                changed = true;
            }
            in_sets[k] = inn;
        }
    }

    let mut edges = BTreeSet::new();
    for j in 0..n {
        for &d in &in_sets[j] {
            let (src, var) = all[d];
            if src != j && uses[j].contains(var) {
                edges.insert((src, j, var.to_string()));
            }
        }
    }
    edges
}
