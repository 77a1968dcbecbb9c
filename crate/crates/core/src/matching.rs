//! Bipartite matching between bundles (left) and agents (right).
//!
//! `adj[b]` lists the agents adjacent to bundle `b`. A matching is stored as
//! `assign[b] = agent`.

/// Try to match the newest bundle `adj.len() - 1` on top of `current`, which
/// must already saturate every earlier bundle. Returns the extended matching.
pub fn extend(current: &[usize], adj: &[Vec<usize>], agents: usize) -> Option<Vec<usize>> {
    debug_assert_eq!(current.len() + 1, adj.len());
    let mut owner: Vec<Option<usize>> = vec![None; agents];
    for (b, &a) in current.iter().enumerate() {
        owner[a] = Some(b);
    }
    let mut assign: Vec<usize> = current.to_vec();
    assign.push(usize::MAX);
    let mut seen = vec![false; agents];
    if augment(adj.len() - 1, adj, &mut owner, &mut assign, &mut seen) {
        Some(assign)
    } else {
        None
    }
}

/// A matching saturating every bundle, if one exists (Kuhn's algorithm).
pub fn saturating(adj: &[Vec<usize>], agents: usize) -> Option<Vec<usize>> {
    let mut owner: Vec<Option<usize>> = vec![None; agents];
    let mut assign = vec![usize::MAX; adj.len()];
    for b in 0..adj.len() {
        let mut seen = vec![false; agents];
        if !augment(b, adj, &mut owner, &mut assign, &mut seen) {
            return None;
        }
    }
    Some(assign)
}

fn augment(
    b: usize,
    adj: &[Vec<usize>],
    owner: &mut [Option<usize>],
    assign: &mut [usize],
    seen: &mut [bool],
) -> bool {
    for &a in &adj[b] {
        if seen[a] {
            continue;
        }
        seen[a] = true;
        let free = match owner[a] {
            None => true,
            Some(other) => augment(other, adj, owner, assign, seen),
        };
        if free {
            owner[a] = Some(b);
            assign[b] = a;
            return true;
        }
    }
    false
}

/// Among matchings that saturate every bundle, one matching the most agents
/// flagged in `priority`.
///
/// Priority edges weigh `n + 1` and ordinary edges `n`, where `n` is the agent
/// count; a maximum-weight assignment then saturates every bundle (a
/// non-saturating one weighs at most `(r - 1)(n + 1) < r n`) and, among those,
/// maximizes the priority count. Solved with the Hungarian method; ties go to
/// the lower bundle index, then the lower agent id.
pub fn max_priority_saturating(
    adj: &[Vec<usize>],
    agents: usize,
    priority: &[bool],
) -> Option<Vec<usize>> {
    let rows = adj.len();
    if rows == 0 {
        return Some(Vec::new());
    }
    if rows > agents {
        return None;
    }
    let n = agents as i64;
    let mut cost = vec![vec![0i64; agents]; rows];
    for (b, row) in adj.iter().enumerate() {
        for &a in row {
            cost[b][a] = -(if priority[a] { n + 1 } else { n });
        }
    }
    let assign = hungarian(&cost);
    for (b, &a) in assign.iter().enumerate() {
        if !adj[b].contains(&a) {
            return None;
        }
    }
    Some(assign)
}

/// Minimum-cost assignment of every row to a distinct column (`rows <= cols`).
fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    let m = cost[0].len();
    const INF: i64 = i64::MAX / 4;
    // 1-based potentials; column 0 is the virtual root.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=m {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}
