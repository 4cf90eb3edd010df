//! Causal diagrams: reachability, d-separation, and the backdoor criterion.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{Schema, VarId, Variable, VariableDecl};

/// On-disk graph document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub variables: Vec<VariableDecl>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

/// Set of variables used for backdoor adjustment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AdjustmentSet(pub BTreeSet<String>);

impl AdjustmentSet {
    pub fn empty() -> Self {
        AdjustmentSet(BTreeSet::new())
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl<S: Into<String>> FromIterator<S> for AdjustmentSet {
    fn from_iter<T: IntoIterator<Item = S>>(iter: T) -> Self {
        AdjustmentSet(iter.into_iter().map(Into::into).collect())
    }
}

/// Acyclic causal diagram over a schema. Immutable once built.
#[derive(Debug, Clone)]
pub struct CausalGraph {
    schema: Arc<Schema>,
    parents: Vec<Vec<VarId>>,
    children: Vec<Vec<VarId>>,
    topo: Vec<VarId>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    /// Arrived from a child, travelling against the edge.
    Up,
    /// Arrived from a parent, travelling along the edge.
    Down,
}

impl CausalGraph {
    pub fn new(schema: Schema, edges: &[(String, String)]) -> Result<Self> {
        let n = schema.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (p, c) in edges {
            let pi = schema.id(p)?;
            let ci = schema.id(c)?;
            if pi == ci {
                return Err(Error::Graph(format!("self loop on `{p}`")));
            }
            if !children[pi].contains(&ci) {
                children[pi].push(ci);
                parents[ci].push(pi);
            }
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let topo = topological_order(&parents, &children).ok_or_else(|| {
            Error::Graph("graph contains a directed cycle".to_string())
        })?;
        Ok(CausalGraph {
            schema: Arc::new(schema),
            parents,
            children,
            topo,
        })
    }

    pub fn from_file(file: GraphFile) -> Result<Self> {
        let schema = Schema::from_decls(file.variables)?;
        CausalGraph::new(schema, &file.edges)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        CausalGraph::from_file(serde_json::from_str(text)?)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            variables: self.schema.to_decls(),
            edges: self.edges(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn shared_schema(&self) -> Arc<Schema> {
        Arc::clone(&self.schema)
    }

    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (p, kids) in self.children.iter().enumerate() {
            for &c in kids {
                out.push((self.name(p).to_string(), self.name(c).to_string()));
            }
        }
        out
    }

    pub fn name(&self, id: VarId) -> &str {
        self.schema.var(id).name()
    }

    pub fn parents_of(&self, id: VarId) -> &[VarId] {
        &self.parents[id]
    }

    pub fn children_of(&self, id: VarId) -> &[VarId] {
        &self.children[id]
    }

    pub fn topological_order(&self) -> &[VarId] {
        &self.topo
    }

    pub fn ids<I, S>(&self, names: I) -> Result<Vec<VarId>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        names
            .into_iter()
            .map(|n| self.schema.id(n.as_ref()))
            .collect()
    }

    fn names_of(&self, mask: &[bool]) -> BTreeSet<String> {
        mask.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.name(i).to_string())
            .collect()
    }

    /// Copy of the graph with `outcome` added as a sink whose parents are
    /// `inputs`. An existing variable of that name keeps its other edges.
    pub fn with_outcome(&self, outcome: Variable, inputs: &[String]) -> Result<CausalGraph> {
        let name = outcome.name().to_string();
        let schema = self.schema.with_variable(outcome);
        let mut edges = self.edges();
        for i in inputs {
            if *i != name && !edges.iter().any(|(p, c)| p == i && *c == name) {
                edges.push((i.clone(), name.clone()));
            }
        }
        CausalGraph::new(schema, &edges)
    }

    pub(crate) fn descendant_mask(&self, xs: &[VarId]) -> Vec<bool> {
        let mut seen = vec![false; self.schema.len()];
        let mut stack: Vec<VarId> = xs.to_vec();
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend(self.children[v].iter().copied());
            }
        }
        seen
    }

    /// Reflexive-transitive children of `xs`.
    pub fn descendants<I, S>(&self, xs: I) -> Result<BTreeSet<String>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let ids = self.ids(xs)?;
        Ok(self.names_of(&self.descendant_mask(&ids)))
    }

    pub fn non_descendants<I, S>(&self, xs: I) -> Result<BTreeSet<String>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let ids = self.ids(xs)?;
        let mask = self.descendant_mask(&ids);
        Ok(self.names_of(&mask.iter().map(|m| !m).collect::<Vec<_>>()))
    }

    /// Ancestors of `zs` (reflexive), ignoring edges that leave nodes in `cut`.
    fn ancestor_mask(&self, zs: &[VarId], cut: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.schema.len()];
        let mut stack: Vec<VarId> = zs.to_vec();
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend(self.parents[v].iter().copied().filter(|&p| !cut[p]));
            }
        }
        seen
    }

    /// Bayes-ball search for an active trail from `xs` to `ys` given `zs`.
    /// Edges leaving nodes flagged in `cut` are treated as absent.
    fn active_trail(
        &self,
        xs: &[VarId],
        ys: &[VarId],
        zs: &[VarId],
        cut: &[bool],
    ) -> Option<Vec<(VarId, Dir)>> {
        let n = self.schema.len();
        let mut in_z = vec![false; n];
        for &z in zs {
            in_z[z] = true;
        }
        let mut in_y = vec![false; n];
        for &y in ys {
            in_y[y] = true;
        }
        let anc = self.ancestor_mask(zs, cut);
        let slot = |v: VarId, d: Dir| v * 2 + usize::from(d == Dir::Down);
        let mut pred: Vec<Option<usize>> = vec![None; 2 * n];
        let mut seen = vec![false; 2 * n];
        let mut queue = VecDeque::new();
        for &x in xs {
            seen[slot(x, Dir::Up)] = true;
            queue.push_back((x, Dir::Up));
        }
        while let Some((v, d)) = queue.pop_front() {
            if !in_z[v] && in_y[v] {
                let mut trail = vec![(v, d)];
                let mut cur = slot(v, d);
                while let Some(p) = pred[cur] {
                    trail.push((p / 2, if p % 2 == 1 { Dir::Down } else { Dir::Up }));
                    cur = p;
                }
                trail.reverse();
                return Some(trail);
            }
            let mut next = Vec::new();
            let to_parents = |next: &mut Vec<(VarId, Dir)>| {
                for &p in &self.parents[v] {
                    if !cut[p] {
                        next.push((p, Dir::Up));
                    }
                }
            };
            let to_children = |next: &mut Vec<(VarId, Dir)>| {
                if !cut[v] {
                    for &c in &self.children[v] {
                        next.push((c, Dir::Down));
                    }
                }
            };
            match d {
                Dir::Up if !in_z[v] => {
                    to_parents(&mut next);
                    to_children(&mut next);
                }
                Dir::Up => {}
                Dir::Down => {
                    if !in_z[v] {
                        to_children(&mut next);
                    }
                    if anc[v] {
                        to_parents(&mut next);
                    }
                }
            }
            for (w, wd) in next {
                let s = slot(w, wd);
                if !seen[s] {
                    seen[s] = true;
                    pred[s] = Some(slot(v, d));
                    queue.push_back((w, wd));
                }
            }
        }
        None
    }

    fn render_trail(&self, trail: &[(VarId, Dir)]) -> Vec<String> {
        let mut out = Vec::new();
        for (i, &(v, d)) in trail.iter().enumerate() {
            if i > 0 {
                out.push(if d == Dir::Up { "<-" } else { "->" }.to_string());
            }
            out.push(self.name(v).to_string());
        }
        out
    }

    fn check_disjoint(&self, sets: &[(&str, &[VarId])]) -> Result<()> {
        for (i, (na, a)) in sets.iter().enumerate() {
            for (nb, b) in &sets[i + 1..] {
                if let Some(v) = a.iter().find(|v| b.contains(v)) {
                    return Err(Error::NotDisjoint(format!(
                        "`{}` appears in both {na} and {nb}",
                        self.name(*v)
                    )));
                }
            }
        }
        Ok(())
    }

    /// True iff every trail between `xs` and `ys` is blocked by `zs`.
    pub fn d_separated<I, S>(&self, xs: I, ys: I, zs: I) -> Result<bool>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let (x, y, z) = (self.ids(xs)?, self.ids(ys)?, self.ids(zs)?);
        self.check_disjoint(&[("xs", &x), ("ys", &y), ("zs", &z)])?;
        let cut = vec![false; self.schema.len()];
        Ok(self.active_trail(&x, &y, &z, &cut).is_none())
    }

    /// Returns an open backdoor trail (rendered with arrows) or `None` when
    /// `adj` satisfies the backdoor criterion relative to `treatment` and
    /// `outcome`.
    pub fn backdoor_violation<I, S>(
        &self,
        treatment: I,
        outcome: I,
        adj: I,
    ) -> Result<Option<(String, Vec<String>)>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let (t, o, a) = (self.ids(treatment)?, self.ids(outcome)?, self.ids(adj)?);
        self.check_disjoint(&[("treatment", &t), ("outcome", &o), ("adjustment set", &a)])?;
        let desc = self.descendant_mask(&t);
        if let Some(&v) = a.iter().find(|&&v| desc[v]) {
            return Ok(Some((
                format!("`{}` is a descendant of the treatment", self.name(v)),
                vec![self.name(v).to_string()],
            )));
        }
        let mut cut = vec![false; self.schema.len()];
        for &v in &t {
            cut[v] = true;
        }
        Ok(self.active_trail(&t, &o, &a, &cut).map(|trail| {
            let path = self.render_trail(&trail);
            (format!("open backdoor path {}", path.join(" ")), path)
        }))
    }

    pub fn backdoor_admissible<I, S>(&self, treatment: I, outcome: I, adj: I) -> Result<bool>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Ok(self.backdoor_violation(treatment, outcome, adj)?.is_none())
    }

    /// Picks an adjustment set `C` such that `C ∪ context` is admissible:
    /// the treatment's parents when that works, otherwise every
    /// non-descendant of the treatment.
    pub fn default_adjustment_set(
        &self,
        treatment: &[String],
        outcome: &[String],
        context: &[String],
    ) -> Result<AdjustmentSet> {
        let t = self.ids(treatment)?;
        let taken: BTreeSet<&str> = treatment
            .iter()
            .chain(outcome)
            .chain(context)
            .map(String::as_str)
            .collect();
        let mut parents = BTreeSet::new();
        for &v in &t {
            for &p in &self.parents[v] {
                parents.insert(self.name(p).to_string());
            }
        }
        let non_desc = self.non_descendants(treatment)?;
        let mut first_failure = None;
        for candidate in [parents, non_desc] {
            let set: BTreeSet<String> = candidate
                .into_iter()
                .filter(|v| !taken.contains(v.as_str()))
                .collect();
            let with_context: Vec<String> = set.iter().chain(context).cloned().collect();
            match self.backdoor_violation(treatment, outcome, &with_context)? {
                None => return Ok(AdjustmentSet(set)),
                Some(v) if first_failure.is_none() => first_failure = Some(v),
                Some(_) => {}
            }
        }
        let (reason, path) = first_failure.expect("at least one candidate tried");
        Err(Error::NotIdentifiable { reason, path })
    }
}

impl fmt::Display for CausalGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges()
            .into_iter()
            .map(|(p, c)| format!("{p}->{c}"))
            .collect();
        write!(f, "[{}]", edges.join(", "))
    }
}

fn topological_order(parents: &[Vec<VarId>], children: &[Vec<VarId>]) -> Option<Vec<VarId>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    // Smallest-index-first keeps the order deterministic.
    let mut ready: BTreeSet<VarId> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_graph(names: &[&str], edges: &[(&str, &str)]) -> CausalGraph {
        let vars = names
            .iter()
            .map(|n| Variable::new(*n, ["0", "1"], false).unwrap())
            .collect();
        let edges: Vec<(String, String)> = edges
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        CausalGraph::new(Schema::new(vars).unwrap(), &edges).unwrap()
    }

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn fig2() -> CausalGraph {
        binary_graph(
            &["G", "A", "D", "R", "O"],
            &[
                ("G", "D"),
                ("G", "O"),
                ("A", "D"),
                ("A", "O"),
                ("D", "O"),
                ("R", "O"),
                ("G", "R"),
                ("A", "R"),
            ],
        )
    }

    #[test]
    fn descendants_of_chain() {
        let g = binary_graph(&["A", "B", "C"], &[("A", "B"), ("B", "C")]);
        assert_eq!(g.descendants(["A"]).unwrap(), set(&["A", "B", "C"]));
        assert_eq!(g.descendants(["C"]).unwrap(), set(&["C"]));
    }

    #[test]
    fn descendants_in_loan_diagram() {
        assert_eq!(fig2().descendants(["D"]).unwrap(), set(&["D", "O"]));
    }

    #[test]
    fn unknown_variable_is_named() {
        let g = binary_graph(&["A", "B"], &[("A", "B")]);
        match g.descendants(["Q"]) {
            Err(Error::UnknownVariable(v)) => assert_eq!(v, "Q"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cycle_rejected() {
        let vars = ["A", "B"]
            .iter()
            .map(|n| Variable::new(*n, ["0", "1"], false).unwrap())
            .collect();
        let edges = vec![
            ("A".to_string(), "B".to_string()),
            ("B".to_string(), "A".to_string()),
        ];
        assert!(CausalGraph::new(Schema::new(vars).unwrap(), &edges).is_err());
    }

    #[test]
    fn chain_and_collider_separation() {
        let chain = binary_graph(&["A", "B", "C"], &[("A", "B"), ("B", "C")]);
        assert!(chain.d_separated(vec!["A"], vec!["C"], vec!["B"]).unwrap());
        assert!(!chain.d_separated(vec!["A"], vec!["C"], vec![]).unwrap());

        let collider = binary_graph(&["A", "B", "C"], &[("A", "B"), ("C", "B")]);
        assert!(collider.d_separated(vec!["A"], vec!["C"], vec![]).unwrap());
        assert!(!collider.d_separated(vec!["A"], vec!["C"], vec!["B"]).unwrap());
    }

    #[test]
    fn collider_opened_by_descendant() {
        let g = binary_graph(&["A", "B", "C", "D"], &[("A", "B"), ("C", "B"), ("B", "D")]);
        assert!(!g.d_separated(vec!["A"], vec!["C"], vec!["D"]).unwrap());
    }

    #[test]
    fn overlapping_sets_rejected() {
        let g = binary_graph(&["A", "B"], &[("A", "B")]);
        assert!(matches!(
            g.d_separated(vec!["A"], vec!["B"], vec!["A"]),
            Err(Error::NotDisjoint(_))
        ));
    }

    #[test]
    fn backdoor_confounder() {
        let g = binary_graph(&["Z", "X", "Y"], &[("Z", "X"), ("Z", "Y"), ("X", "Y")]);
        assert!(g.backdoor_admissible(vec!["X"], vec!["Y"], vec!["Z"]).unwrap());
        assert!(!g.backdoor_admissible(vec!["X"], vec!["Y"], vec![]).unwrap());
        let (_, path) = g
            .backdoor_violation(vec!["X"], vec!["Y"], vec![])
            .unwrap()
            .unwrap();
        assert_eq!(path, vec!["X", "<-", "Z", "->", "Y"]);
        assert!(matches!(
            g.backdoor_admissible(vec!["X"], vec!["Y"], vec!["X"]),
            Err(Error::NotDisjoint(_))
        ));
    }

    #[test]
    fn backdoor_in_loan_diagram() {
        assert!(fig2()
            .backdoor_admissible(vec!["D"], vec!["O"], vec!["G", "A"])
            .unwrap());
    }

    #[test]
    fn descendant_in_adjustment_set_is_inadmissible() {
        let g = binary_graph(&["X", "M", "Y"], &[("X", "M"), ("M", "Y")]);
        assert!(!g.backdoor_admissible(vec!["X"], vec!["Y"], vec!["M"]).unwrap());
    }

    #[test]
    fn default_set_prefers_parents() {
        let g = binary_graph(&["Z", "X", "Y"], &[("Z", "X"), ("Z", "Y"), ("X", "Y")]);
        let adj = g
            .default_adjustment_set(&["X".into()], &["Y".into()], &[])
            .unwrap();
        assert_eq!(adj.0, set(&["Z"]));

        let root = binary_graph(&["X", "Y", "W"], &[("X", "Y"), ("W", "Y")]);
        let adj = root
            .default_adjustment_set(&["X".into()], &["Y".into()], &[])
            .unwrap();
        assert!(adj.is_empty());
    }

    #[test]
    fn default_set_reports_unblockable_path() {
        let g = binary_graph(&["W", "P", "X", "Y"], &[("W", "X"), ("W", "Y"), ("P", "X")]);
        let err = g
            .default_adjustment_set(&["X".into()], &["Y".into(), "P".into()], &[])
            .unwrap_err();
        match err {
            Error::NotIdentifiable { path, .. } => assert_eq!(path, vec!["X", "<-", "P"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn default_set_excludes_context() {
        let g = binary_graph(&["Z", "X", "Y"], &[("Z", "X"), ("Z", "Y"), ("X", "Y")]);
        let adj = g
            .default_adjustment_set(&["X".into()], &["Y".into()], &["Z".into()])
            .unwrap();
        assert!(adj.is_empty());
    }
}
