//! Bipartite acceptability graph of an instance: an edge (x, t) exists
//! exactly where `u_t(x) > 0` (equivalently `v_x(t) > 0` by the zero
//! consistency invariant). Connected components are computed at build time;
//! isolated vertices on either side form singleton components.

use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub courses: Vec<usize>,
    pub tas: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    pub course_adj: Vec<Vec<usize>>,
    pub ta_adj: Vec<Vec<usize>>,
    pub components: Vec<Component>,
}

impl BipartiteGraph {
    pub fn course_degree(&self, course: usize) -> usize {
        self.course_adj[course].len()
    }

    pub fn ta_degree(&self, ta: usize) -> usize {
        self.ta_adj[ta].len()
    }

    pub fn edge_count(&self) -> usize {
        self.course_adj.iter().map(Vec::len).sum()
    }
}

pub fn build_graph(instance: &Instance) -> BipartiteGraph {
    let n = instance.n_courses();
    let m = instance.n_tas();
    let mut course_adj = vec![Vec::new(); n];
    let mut ta_adj = vec![Vec::new(); m];
    for c in 0..n {
        for t in 0..m {
            if instance.utility(t, c) > 0 {
                course_adj[c].push(t);
                ta_adj[t].push(c);
            }
        }
    }

    // BFS over the union of both sides, seeded in ascending vertex order so
    // component numbering is deterministic.
    let mut course_comp = vec![usize::MAX; n];
    let mut ta_comp = vec![usize::MAX; m];
    let mut components = Vec::new();
    let mut queue = Vec::new();
    for seed in 0..n + m {
        let fresh = if seed < n {
            course_comp[seed] == usize::MAX
        } else {
            ta_comp[seed - n] == usize::MAX
        };
        if !fresh {
            continue;
        }
        let cix = components.len();
        let mut comp = Component {
            courses: Vec::new(),
            tas: Vec::new(),
        };
        queue.clear();
        queue.push(seed);
        if seed < n {
            course_comp[seed] = cix;
        } else {
            ta_comp[seed - n] = cix;
        }
        while let Some(v) = queue.pop() {
            if v < n {
                comp.courses.push(v);
                for &t in &course_adj[v] {
                    if ta_comp[t] == usize::MAX {
                        ta_comp[t] = cix;
                        queue.push(n + t);
                    }
                }
            } else {
                let t = v - n;
                comp.tas.push(t);
                for &c in &ta_adj[t] {
                    if course_comp[c] == usize::MAX {
                        course_comp[c] = cix;
                        queue.push(c);
                    }
                }
            }
        }
        comp.courses.sort_unstable();
        comp.tas.sort_unstable();
        components.push(comp);
    }

    BipartiteGraph {
        course_adj,
        ta_adj,
        components,
    }
}
