//! Maximal cliques of an undirected graph given as sorted adjacency lists.
use std::collections::BTreeSet;

pub type Graph = Vec<BTreeSet<usize>>;

/// Vertices ordered by repeatedly removing one of minimum degree.
fn degeneracy_order(g: &Graph, nodes: &[usize]) -> Vec<usize> {
    let inside: BTreeSet<usize> = nodes.iter().copied().collect();
    let mut degree: Vec<(usize, usize)> =
        nodes.iter().map(|&v| (g[v].iter().filter(|u| inside.contains(u)).count(), v)).collect();
    let mut removed = BTreeSet::new();
    let mut order = Vec::with_capacity(nodes.len());
    let mut queue: BTreeSet<(usize, usize)> = degree.iter().copied().collect();
    let mut deg: std::collections::HashMap<usize, usize> = degree.drain(..).map(|(d, v)| (v, d)).collect();
    while let Some((_, v)) = queue.pop_first() {
        removed.insert(v);
        order.push(v);
        for &u in &g[v] {
            if inside.contains(&u) && !removed.contains(&u) {
                let d = deg[&u];
                queue.remove(&(d, u));
                deg.insert(u, d - 1);
                queue.insert((d - 1, u));
            }
        }
    }
    order
}

fn bron_kerbosch(
    g: &Graph,
    r: &mut Vec<usize>,
    mut p: BTreeSet<usize>,
    mut x: BTreeSet<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() {
        if x.is_empty() {
            let mut c = r.clone();
            c.sort_unstable();
            out.push(c);
        }
        return;
    }
    let pivot = p.union(&x).max_by_key(|&&u| (g[u].intersection(&p).count(), std::cmp::Reverse(u))).copied().unwrap();
    let candidates: Vec<usize> = p.difference(&g[pivot]).copied().collect();
    for v in candidates {
        r.push(v);
        let np = p.intersection(&g[v]).copied().collect();
        let nx = x.intersection(&g[v]).copied().collect();
        bron_kerbosch(g, r, np, nx, out);
        r.pop();
        p.remove(&v);
        x.insert(v);
    }
}

/// All maximal cliques among `nodes`, each sorted, in sorted order.
pub fn maximal_cliques(g: &Graph, nodes: &[usize]) -> Vec<Vec<usize>> {
    let order = degeneracy_order(g, nodes);
    let rank: std::collections::HashMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut out = Vec::new();
    for &v in &order {
        let (mut p, mut x) = (BTreeSet::new(), BTreeSet::new());
        for &u in &g[v] {
            match rank.get(&u) {
                Some(&ru) if ru > rank[&v] => {
                    p.insert(u);
                }
                Some(_) => {
                    x.insert(u);
                }
                None => {}
            }
        }
        bron_kerbosch(g, &mut vec![v], p, x, &mut out);
    }
    out.sort();
    out
}

/// Cheap cover of `nodes` by cliques: grow each clique from the highest
/// degree free vertex, adding free neighbours adjacent to all members.
pub fn greedy_cliques(g: &Graph, nodes: &[usize]) -> Vec<Vec<usize>> {
    let mut free: BTreeSet<usize> = nodes.iter().copied().collect();
    let mut out = Vec::new();
    while let Some(&seed) = free.iter().max_by_key(|&&v| (g[v].intersection(&free).count(), std::cmp::Reverse(v))) {
        free.remove(&seed);
        let mut clique = vec![seed];
        for &u in &g[seed] {
            if free.contains(&u) && clique.iter().all(|w| g[*w].contains(&u)) {
                clique.push(u);
            }
        }
        for u in &clique {
            free.remove(u);
        }
        clique.sort_unstable();
        out.push(clique);
    }
    out.sort();
    out
}

/// Connected components among vertices with at least one edge.
pub fn components(g: &Graph) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.len()];
    let mut out = Vec::new();
    for s in 0..g.len() {
        if seen[s] || g[s].is_empty() {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &u in &g[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
