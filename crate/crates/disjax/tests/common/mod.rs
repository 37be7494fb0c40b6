//! Random knowledge bases and brute-force reference implementations.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use disjax_core::{
    ClassId, Disjointness, GoldOracle, Iri, KnowledgeBase, Oracle, PairLabel, PairMatrix, Question,
    Verdict,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const NS: &str = "http://example.org/onto/";

pub type Key = (String, String);

pub fn key(a: &str, b: &str) -> Key {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// `reach[a][b]` iff `a ⊑ b`, by repeated relaxation until nothing changes.
pub fn reach(kb: &KnowledgeBase) -> Vec<Vec<bool>> {
    let n = kb.class_count();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(c, p) in kb.subclass_edges() {
        r[c.index()][p.index()] = true;
    }
    let mut changed = true;
    while changed {
        changed = false;
        for a in 0..n {
            for b in 0..n {
                if !r[a][b] {
                    continue;
                }
                for c in 0..n {
                    if r[b][c] && !r[a][c] {
                        r[a][c] = true;
                        changed = true;
                    }
                }
            }
        }
    }
    r
}

/// Pair labels by direct definition: derived disjointness from an asserted
/// pair above, overlap from a shared subclass or a shared individual.
pub struct BruteForce {
    pub labels: BTreeMap<Key, PairLabel>,
    pub incoherent: BTreeSet<String>,
    pub unsat_pairs: BTreeSet<Key>,
}

pub fn brute_force(kb: &KnowledgeBase, assume_nonempty: bool) -> BruteForce {
    let n = kb.class_count();
    let r = reach(kb);
    let name = |i: usize| kb.iri(ClassId(i as u32)).as_str().to_string();
    let asserted: Vec<(usize, usize)> =
        kb.asserted_disjoint().iter().map(|&(a, b)| (a.index(), b.index())).collect();
    let derived = |a: usize, b: usize| {
        asserted
            .iter()
            .any(|&(x, y)| (r[a][x] && r[b][y]) || (r[a][y] && r[b][x]))
    };
    let joint_sub = |a: usize, b: usize| (0..n).any(|c| r[c][a] && r[c][b]);
    let members = |class: usize, types: &BTreeSet<ClassId>| types.iter().any(|t| r[t.index()][class]);
    let joint_inst = |a: usize, b: usize| {
        kb.instance_types().values().any(|types| members(a, types) && members(b, types))
    };
    let mut out = BruteForce { labels: BTreeMap::new(), incoherent: BTreeSet::new(), unsat_pairs: BTreeSet::new() };
    for c in 0..n {
        if asserted.iter().any(|&(x, y)| r[c][x] && r[c][y]) {
            out.incoherent.insert(name(c));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            let d = derived(a, b);
            let inst = joint_inst(a, b);
            let overlap = inst || (assume_nonempty && joint_sub(a, b));
            let label = match (d, overlap) {
                (true, true) => PairLabel::Conflict,
                (true, false) => PairLabel::Disjoint,
                (false, true) => PairLabel::NotDisjoint,
                (false, false) => PairLabel::Unknown,
            };
            let k = key(&name(a), &name(b));
            if d && inst {
                out.unsat_pairs.insert(k.clone());
            }
            out.labels.insert(k, label);
        }
    }
    out
}

pub fn labels_by_iri(m: &PairMatrix, kb: &KnowledgeBase) -> BTreeMap<Key, PairLabel> {
    m.iter()
        .map(|(a, b, l, _)| (key(kb.iri(a).as_str(), kb.iri(b).as_str()), l))
        .collect()
}

/// Unordered pairs (equal members allowed) lying below some pair of `set`.
pub fn entailed(set: &BTreeSet<(usize, usize)>, r: &[Vec<bool>]) -> BTreeSet<(usize, usize)> {
    let n = r.len();
    let mut out = BTreeSet::new();
    for &(d1, d2) in set {
        for c1 in 0..n {
            for c2 in 0..n {
                if r[c1][d1] && r[c2][d2] {
                    out.insert((c1.min(c2), c1.max(c2)));
                }
            }
        }
    }
    out
}

/// Removes each pair in ascending order when the rest still entails the input.
pub fn naive_prune(set: &BTreeSet<(usize, usize)>, r: &[Vec<bool>]) -> BTreeSet<(usize, usize)> {
    let target = entailed(set, r);
    let mut cur = set.clone();
    for p in set {
        let mut without = cur.clone();
        without.remove(p);
        if entailed(&without, r) == target {
            cur = without;
        }
    }
    cur
}

fn class_names(rng: &mut StdRng, n: usize, shuffle: bool) -> Vec<String> {
    let mut order: Vec<usize> = (0..n).collect();
    if shuffle {
        order.shuffle(rng);
    }
    order.iter().map(|i| format!("{NS}C{i:02}")).collect()
}

/// Arbitrary small KB: random edges (cycles possible), assertions and typings.
pub fn random_kb(rng: &mut StdRng, max_classes: usize) -> KnowledgeBase {
    let n = rng.random_range(2..=max_classes);
    let names = class_names(rng, n, true);
    let mut kb = KnowledgeBase::new();
    let ids: Vec<ClassId> = names.iter().map(|s| kb.intern_str(s).unwrap()).collect();
    let edge_p = rng.random_range(0.05..0.35);
    for i in 0..n {
        for j in 0..n {
            let p = if j < i { edge_p } else { edge_p / 15.0 };
            if i != j && rng.random_bool(p) {
                kb.add_subclass(ids[i], ids[j]).unwrap();
            }
        }
    }
    for _ in 0..rng.random_range(0..=4) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            kb.add_disjoint(ids[a], ids[b]).unwrap();
        }
    }
    for k in 0..rng.random_range(0..=4) {
        let ind = Iri::new(format!("{NS}ind{k}")).unwrap();
        for _ in 0..rng.random_range(1..=2) {
            kb.add_instance(ind.clone(), ids[rng.random_range(0..n)]).unwrap();
        }
    }
    kb
}

/// A KB drawn together with a model of it; `gold` holds every pair's true
/// answer in that model, so it never contradicts the KB.
pub struct Modeled {
    pub kb: KnowledgeBase,
    pub gold: BTreeMap<Key, Disjointness>,
}

impl Modeled {
    pub fn oracle(&self) -> GoldOracle {
        let mut g = GoldOracle::new(None);
        for ((a, b), &v) in &self.gold {
            g.insert(a, b, v);
        }
        g
    }

    pub fn answer(&self, a: &str, b: &str) -> Disjointness {
        self.gold[&key(a, b)]
    }
}

/// Classes get nonempty extensions closed under the subclass DAG; edges only
/// point to lower creation indices. With `topological` the IRIs sort parents
/// before children.
pub fn modeled_kb(rng: &mut StdRng, max_classes: usize, topological: bool) -> Modeled {
    let n = rng.random_range(2..=max_classes);
    let names = class_names(rng, n, !topological);
    let mut kb = KnowledgeBase::new();
    let ids: Vec<ClassId> = names.iter().map(|s| kb.intern_str(s).unwrap()).collect();
    let edge_p = rng.random_range(0.1..0.4);
    for i in 1..n {
        for j in 0..i {
            if rng.random_bool(edge_p) {
                kb.add_subclass(ids[i], ids[j]).unwrap();
            }
        }
    }
    let r = reach(&kb);
    let domain = rng.random_range(2..=7);
    let base: Vec<BTreeSet<usize>> = (0..n)
        .map(|_| {
            let mut s: BTreeSet<usize> = (0..domain).filter(|_| rng.random_bool(0.25)).collect();
            if s.is_empty() {
                s.insert(rng.random_range(0..domain));
            }
            s
        })
        .collect();
    let ext: Vec<BTreeSet<usize>> = (0..n)
        .map(|c| (0..n).filter(|&s| r[s][c]).flat_map(|s| base[s].iter().copied()).collect())
        .collect();
    let mut gold = BTreeMap::new();
    let mut disjoint = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let v = if ext[a].is_disjoint(&ext[b]) {
                disjoint.push((a, b));
                Disjointness::Disjoint
            } else {
                Disjointness::NotDisjoint
            };
            gold.insert(key(&names[a], &names[b]), v);
        }
    }
    disjoint.shuffle(rng);
    let asserted = rng.random_range(0..=disjoint.len().min(3));
    for &(a, b) in &disjoint[..asserted] {
        kb.add_disjoint(ids[a], ids[b]).unwrap();
    }
    for e in 0..domain {
        if !rng.random_bool(0.5) {
            continue;
        }
        let holders: Vec<usize> = (0..n).filter(|&c| base[c].contains(&e)).collect();
        let ind = Iri::new(format!("{NS}ind{e}")).unwrap();
        for _ in 0..rng.random_range(1..=2) {
            if let Some(&c) = holders.get(rng.random_range(0..holders.len().max(1))) {
                kb.add_instance(ind.clone(), ids[c]).unwrap();
            }
        }
    }
    Modeled { kb, gold }
}

/// Longest subclass chain (number of strict steps) in a DAG.
pub fn longest_chain(kb: &KnowledgeBase) -> usize {
    let n = kb.class_count();
    let mut depth = vec![0usize; n];
    for _ in 0..n {
        for &(c, p) in kb.subclass_edges() {
            depth[c.index()] = depth[c.index()].max(depth[p.index()] + 1);
        }
    }
    depth.into_iter().max().unwrap_or(0)
}

/// Says disjoint to everything.
pub struct AlwaysDisjoint;

impl Oracle for AlwaysDisjoint {
    type Error = std::convert::Infallible;
    fn ask(&mut self, _: &Question<'_>) -> Result<Verdict, Self::Error> {
        Ok(Verdict::clean(Disjointness::Disjoint, "yes"))
    }
}

/// Disjoint iff the first label sorts before the second.
pub struct FirstSmaller;

impl Oracle for FirstSmaller {
    type Error = std::convert::Infallible;
    fn ask(&mut self, q: &Question<'_>) -> Result<Verdict, Self::Error> {
        let v = if q.first_label < q.second_label { Disjointness::Disjoint } else { Disjointness::NotDisjoint };
        Ok(Verdict::clean(v, v.as_str()))
    }
}

/// Order-sensitive pseudo-random answers, fixed per (first, second).
pub struct Hashed(pub u64);

impl Oracle for Hashed {
    type Error = std::convert::Infallible;
    fn ask(&mut self, q: &Question<'_>) -> Result<Verdict, Self::Error> {
        let mut h: u64 = self.0 ^ 0xcbf2_9ce4_8422_2325;
        for b in q.first_iri.bytes().chain([0]).chain(q.second_iri.bytes()) {
            h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        }
        let v = if h >> 63 == 1 { Disjointness::Disjoint } else { Disjointness::NotDisjoint };
        Ok(Verdict::clean(v, v.as_str()))
    }
}
