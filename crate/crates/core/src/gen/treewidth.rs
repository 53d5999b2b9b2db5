//! Exact tree-width by dynamic programming over elimination orderings:
//! f(S) is the best width eliminating exactly S first, with the elimination
//! degree of v counted as the vertices outside S reachable from v through S.
//! Strictly a test-derivation oracle, capped at 12 vertices.

use super::GenError;
use crate::structures::Structure;

pub fn treewidth_exact(g: &Structure) -> Result<usize, GenError> {
    let n = g.vertex_count();
    if n > 12 {
        return Err(GenError::TooLarge(n));
    }
    if n == 0 {
        return Ok(0);
    }
    let mut adj = vec![0u16; n];
    for rel in g.relations().iter().filter(|r| r.arity == 2) {
        for t in rel.tuples() {
            if t[0] != t[1] {
                adj[t[0] as usize] |= 1 << t[1];
                adj[t[1] as usize] |= 1 << t[0];
            }
        }
    }
    let full: u32 = (1u32 << n) - 1;
    // elimination degree of v when S is already gone: neighbors of v outside
    // S reachable from v through S
    let q = |s: u32, v: usize| -> u32 {
        let mut visited: u32 = (1 << v) as u32;
        let mut frontier: u32 = 1 << v;
        let mut reached: u16 = 0;
        while frontier != 0 {
            let mut next: u32 = 0;
            let mut f = frontier;
            while f != 0 {
                let w = f.trailing_zeros() as usize;
                f &= f - 1;
                let nb = adj[w] as u32 & !visited;
                reached |= (nb & !s & !(1 << v)) as u16;
                next |= nb & s;
                visited |= nb;
            }
            frontier = next;
        }
        reached.count_ones()
    };
    let mut f = vec![u32::MAX; (full as usize) + 1];
    f[0] = 0;
    for s in 1..=full {
        let mut best = u32::MAX;
        let mut m = s;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let rest = s & !(1 << v);
            let width = f[rest as usize].max(q(rest, v));
            best = best.min(width);
        }
        f[s as usize] = best;
    }
    Ok(f[full as usize] as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::BaseGraph;

    #[test]
    fn trees_have_width_one() {
        let p = BaseGraph::path(7).to_structure();
        assert_eq!(treewidth_exact(&p).unwrap(), 1);
        let star = Structure::simple_graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(treewidth_exact(&star).unwrap(), 1);
    }

    #[test]
    fn cycles_have_width_two() {
        for n in [3usize, 5, 8, 11] {
            let c = BaseGraph::cycle(n).to_structure();
            assert_eq!(treewidth_exact(&c).unwrap(), 2);
        }
    }

    #[test]
    fn cliques_match_formula() {
        for n in [2usize, 4, 6] {
            let k = BaseGraph::complete(n).to_structure();
            assert_eq!(treewidth_exact(&k).unwrap(), n - 1);
        }
    }

    #[test]
    fn grid_3x3_is_three() {
        let g = BaseGraph::grid(3, 3).to_structure();
        assert_eq!(treewidth_exact(&g).unwrap(), 3);
    }

    #[test]
    fn oracle_cap() {
        let p = BaseGraph::path(13).to_structure();
        assert!(treewidth_exact(&p).is_err());
    }
}
