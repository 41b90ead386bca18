//! Verification suites shared by the command line and the acceptance tests.
//! Each suite returns a report with a witness count and the failures found.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::basis::{Frame, NormOrdering};
use crate::complex::{Complex, NormKind, VertexType};
use crate::error::{Error, Result};
use crate::fixed::{self, FSubgroup, FixedContext, DEFAULT_F_ORDER_CAP};
use crate::group::{FactorSource, FreeProduct};
use crate::topology::{
    certify_contractible, homology, order_complex, poset_join, Poset, SimplicialComplex, Verdict,
};
use crate::tree::{enumerate_pointed_trees, poset_leq, PointedTree, STAR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Trees,
    MinimalVertex,
    PeakReduction,
    LocalContractibility,
    Stabilizers,
    FixedPoints,
    FStandard,
    WordLength,
    LiftRestrict,
    JoinDecomposition,
    Homology,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Trees,
        Suite::MinimalVertex,
        Suite::PeakReduction,
        Suite::LocalContractibility,
        Suite::Stabilizers,
        Suite::FixedPoints,
        Suite::FStandard,
        Suite::WordLength,
        Suite::LiftRestrict,
        Suite::JoinDecomposition,
        Suite::Homology,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Trees => "trees",
            Suite::MinimalVertex => "minimal-vertex",
            Suite::PeakReduction => "peak-reduction",
            Suite::LocalContractibility => "local-contractibility",
            Suite::Stabilizers => "stabilizers",
            Suite::FixedPoints => "fixed-points",
            Suite::FStandard => "f-standard",
            Suite::WordLength => "word-length",
            Suite::LiftRestrict => "lift-restrict",
            Suite::JoinDecomposition => "join-decomposition",
            Suite::Homology => "homology",
        }
    }

    /// Suites that do not depend on the group.
    pub fn is_global(self) -> bool {
        matches!(self, Suite::Trees | Suite::Homology)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite {s}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Overrides the per-suite default radius.
    pub radius: Option<usize>,
    /// Random bases for peak reduction.
    pub samples: usize,
    /// Sampled vertex types for stabilizers.
    pub stabilizer_samples: usize,
    /// Cyclic subgroups built per group, besides the trivial one.
    pub subgroups: usize,
    pub order_cap: usize,
    /// Rounds of lifted moves used to reach reduced vertices.
    pub depth: usize,
    /// Maximal number of reduced representatives per subgroup.
    pub reps: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            radius: None,
            samples: 100,
            stabilizer_samples: 20,
            subgroups: 3,
            order_cap: DEFAULT_F_ORDER_CAP,
            depth: 3,
            reps: 40,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub group: Option<String>,
    pub passed: bool,
    /// Instances of the statement actually checked.
    pub witnesses: usize,
    pub summary: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    pub failures: Vec<Value>,
}

impl SuiteReport {
    pub fn new(suite: Suite, group: Option<String>) -> Self {
        Self {
            suite: suite.name().into(),
            group,
            passed: true,
            witnesses: 0,
            summary: BTreeMap::new(),
            warnings: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn fail(&mut self, v: Value) {
        self.failures.push(v);
    }

    fn note(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.insert(key.into(), v.into());
    }

    pub fn finish(mut self) -> Self {
        self.passed = self.failures.is_empty();
        self
    }
}

/// Short name such as `Z2*Z3`.
pub fn group_name(fp: &FreeProduct) -> String {
    fp.factors()
        .iter()
        .map(|f| match f.source() {
            FactorSource::Cyclic(k) => format!("Z{k}"),
            FactorSource::Sym3 => "S3".into(),
            FactorSource::Table(name) => name.clone(),
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Runs one suite. Global suites ignore `lab`.
pub fn run_suite(suite: Suite, lab: &Complex, opts: &VerifyOptions) -> Result<SuiteReport> {
    match suite {
        Suite::Trees => trees_suite(5),
        Suite::Homology => homology_suite(),
        Suite::MinimalVertex => minimal_vertex(lab, opts),
        Suite::PeakReduction => peak_reduction(lab, opts),
        Suite::LocalContractibility => local_contractibility(lab, opts),
        Suite::Stabilizers => stabilizers(lab, opts),
        Suite::FixedPoints => fixed_points(lab, opts),
        Suite::FStandard => f_standard(lab, opts),
        Suite::WordLength | Suite::LiftRestrict | Suite::JoinDecomposition => {
            let mut report = SuiteReport::new(suite, Some(group_name(lab.fp())));
            for f in test_subgroups(lab, opts)? {
                let ctx = FixedContext::new(lab, f)?;
                let reps = ctx.reduced_representatives(opts.depth, opts.reps)?;
                match suite {
                    Suite::WordLength => check_word_length(&ctx, &reps, &mut report)?,
                    Suite::LiftRestrict => check_lift_restrict(&ctx, &reps, &mut report)?,
                    _ => check_join(&ctx, &reps, &mut report)?,
                }
            }
            Ok(report.finish())
        }
    }
}

/// The trivial subgroup followed by up to `opts.subgroups` cyclic ones.
pub fn test_subgroups(lab: &Complex, opts: &VerifyOptions) -> Result<Vec<FSubgroup>> {
    let mut out = vec![fixed::trivial_subgroup(lab)?];
    out.extend(fixed::cyclic_subgroups(lab, opts.order_cap, opts.subgroups)?);
    Ok(out)
}

/// Pointed trees on `n` labels by brute force: collections of hyperedges on
/// `{∗, 1..n}` with `Σ(|e| − 1) = n` that connect every label, `∗` lying in
/// exactly one hyperedge. Returns canonical codes.
pub fn naive_tree_codes(n: usize) -> Result<BTreeSet<String>> {
    let verts = n + 1;
    let subsets: Vec<Vec<u8>> = (1u32..(1 << verts))
        .filter(|m| m.count_ones() >= 2)
        .map(|m| (0..verts as u8).filter(|&i| m & (1 << i) != 0).collect())
        .collect();
    let mut out = BTreeSet::new();
    let mut chosen: Vec<usize> = Vec::new();
    fn connected(verts: usize, edges: &[&Vec<u8>]) -> bool {
        let mut comp: Vec<usize> = (0..verts).collect();
        fn root(c: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while c[r] != r {
                r = c[r];
            }
            c[x] = r;
            r
        }
        for e in edges {
            for w in e.windows(2) {
                let (a, b) = (root(&mut comp, w[0] as usize), root(&mut comp, w[1] as usize));
                comp[a] = b;
            }
        }
        let r0 = root(&mut comp, 0);
        (1..verts).all(|v| root(&mut comp, v) == r0)
    }
    fn go(
        subsets: &[Vec<u8>],
        start: usize,
        budget: usize,
        chosen: &mut Vec<usize>,
        n: usize,
        out: &mut BTreeSet<String>,
    ) -> Result<()> {
        if budget == 0 {
            let edges: Vec<&Vec<u8>> = chosen.iter().map(|&i| &subsets[i]).collect();
            let star = edges.iter().filter(|e| e.contains(&STAR)).count();
            if star == 1 && connected(n + 1, &edges) {
                let t = PointedTree::new(n, edges.into_iter().cloned().collect())?;
                out.insert(t.code());
            }
            return Ok(());
        }
        for i in start..subsets.len() {
            let w = subsets[i].len() - 1;
            if w <= budget {
                chosen.push(i);
                go(subsets, i + 1, budget - w, chosen, n, out)?;
                chosen.pop();
            }
        }
        Ok(())
    }
    go(&subsets, 0, n, &mut chosen, n, &mut out)?;
    Ok(out)
}

pub fn trees_suite(max_n: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Trees, None);
    let mut counts = Vec::new();
    for n in 1..=max_n {
        let fast: BTreeSet<String> = enumerate_pointed_trees(n)?.iter().map(|t| t.code()).collect();
        let naive = naive_tree_codes(n)?;
        counts.push(fast.len());
        report.witnesses += naive.len();
        if fast != naive {
            report.fail(json!({
                "n": n,
                "missing": naive.difference(&fast).collect::<Vec<_>>(),
                "extra": fast.difference(&naive).collect::<Vec<_>>(),
            }));
        }
    }
    report.note("counts", json!(counts));
    Ok(report.finish())
}

fn radius_or(opts: &VerifyOptions, default: usize) -> usize {
    opts.radius.unwrap_or(default)
}

pub fn minimal_vertex(lab: &Complex, opts: &VerifyOptions) -> Result<SuiteReport> {
    let n = lab.n();
    let mut report = SuiteReport::new(Suite::MinimalVertex, Some(group_name(lab.fp())));
    let ball = lab.enumerate_ball(radius_or(opts, n + 4))?;
    let mut at_min = Vec::new();
    for (f, &norm) in ball.frames.iter().zip(&ball.norms) {
        if norm < n {
            report.fail(json!({"basis": f.basis().to_code(), "norm": norm}));
        }
        if norm == n {
            at_min.push(f.basis().to_code());
        } else if f.basis().is_standard() {
            report.fail(json!({"basis": f.basis().to_code(), "norm": norm, "reason": "standard basis off minimum"}));
        }
    }
    if at_min.len() != 1 || !ball.frames.iter().any(|f| f.basis().is_standard()) {
        report.fail(json!({"minimal": at_min}));
    }
    report.witnesses = ball.len();
    report.note("radius", ball.radius);
    report.note("ball", ball.len());
    report.note("minimal", json!(at_min));
    Ok(report.finish())
}

/// A basis reached from `ℋ₀` by `0..=max_moves` uniformly chosen moves.
pub fn random_frame(lab: &Complex, rng: &mut impl Rng, max_moves: usize) -> Result<Frame> {
    let mut f = Frame::standard(lab.fp());
    for _ in 0..rng.gen_range(0..=max_moves) {
        let moves = lab.all_moves(&f);
        if let Some(mv) = moves.choose(rng) {
            f = mv.apply_to_frame(lab.fp(), &f)?;
        }
    }
    Ok(f)
}

pub fn peak_reduction(lab: &Complex, opts: &VerifyOptions) -> Result<SuiteReport> {
    let fp = lab.fp();
    let mut report = SuiteReport::new(Suite::PeakReduction, Some(group_name(fp)));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut longest = 0;
    for i in 0..opts.samples {
        let start = random_frame(lab, &mut rng, 8)?;
        let path = match lab.reduce_to_minimal(&start, NormKind::Zg) {
            Ok(p) => p,
            Err(Error::Verification(msg)) => {
                report.fail(json!({"sample": i, "basis": start.basis().to_code(), "error": msg}));
                continue;
            }
            Err(e) => return Err(e),
        };
        longest = longest.max(path.len());
        let mut prev = start.clone();
        for step in &path {
            let next = Frame::from_basis(fp, &step.basis)?;
            if lab.compare(&next, &prev) != NormOrdering::Less {
                report.fail(json!({"sample": i, "from": prev.basis().to_code(), "to": step.basis.to_code()}));
            }
            prev = next;
        }
        if !prev.basis().is_standard() {
            report.fail(json!({"sample": i, "end": prev.basis().to_code()}));
        }
        report.witnesses += 1;
    }
    report.note("longest_path", longest);
    Ok(report.finish())
}

fn tree_poset(trees: &[PointedTree]) -> Result<Poset> {
    Poset::new(trees.iter().map(PointedTree::code).collect(), |i, j| {
        poset_leq(&trees[i], &trees[j])
    })
}

pub fn local_contractibility(lab: &Complex, opts: &VerifyOptions) -> Result<SuiteReport> {
    let n = lab.n();
    let mut report = SuiteReport::new(Suite::LocalContractibility, Some(group_name(lab.fp())));
    let ball = lab.enumerate_ball(radius_or(opts, n + 2))?;
    let (mut collapsed, mut homology_only) = (0, 0);
    for f in ball.frames.iter().filter(|f| !f.basis().is_standard()) {
        let star = lab.reductive_star(f)?;
        if star.is_empty() {
            report.fail(json!({"basis": f.basis().to_code(), "reason": "empty reductive star"}));
            continue;
        }
        match certify_contractible(&order_complex(&tree_poset(&star)?))? {
            Verdict::CollapsedToPoint => collapsed += 1,
            Verdict::HomologyTrivialOnly { remaining } => {
                homology_only += 1;
                report.warnings.push(format!(
                    "{}: collapse stopped at {remaining} simplices, homology trivial",
                    f.basis().to_code()
                ));
            }
            Verdict::NotContractible { homology } => {
                report.fail(json!({"basis": f.basis().to_code(), "homology": homology}));
            }
        }
        report.witnesses += 1;
    }
    report.note("radius", ball.radius);
    report.note("collapsed", collapsed);
    report.note("homology_trivial_only", homology_only);
    Ok(report.finish())
}

/// `∏ |Aut(G_i)|`.
pub fn factor_automorphism_count(fp: &FreeProduct) -> Result<usize> {
    let mut total = 1;
    for f in fp.factors() {
        total *= f.automorphisms(crate::group::DEFAULT_AUT_CAP)?.len();
    }
    Ok(total)
}

pub fn stabilizers(lab: &Complex, opts: &VerifyOptions) -> Result<SuiteReport> {
    let fp = lab.fp();
    let n = lab.n();
    let mut report = SuiteReport::new(Suite::Stabilizers, Some(group_name(fp)));
    let base = VertexType {
        basis: Frame::standard(fp).basis().clone(),
        tree: PointedTree::nuclear(n),
    };
    let base_order = lab.stabilizer(&base)?.len();
    let expected = factor_automorphism_count(fp)?;
    if base_order != expected {
        report.fail(json!({"vertex": base.key(), "order": base_order, "expected": expected}));
    }
    let mut radius = radius_or(opts, n + 1);
    let types = loop {
        let ball = lab.enumerate_ball(radius)?;
        let types = lab.ball_vertex_types(&ball)?;
        if types.len() >= opts.stabilizer_samples || opts.radius.is_some() || radius > 4 * n + 12 {
            break types;
        }
        radius += 1;
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let sample: Vec<&VertexType> = types.choose_multiple(&mut rng, opts.stabilizer_samples).collect();
    let mut orders = BTreeMap::new();
    for v in sample {
        let stab = lab.stabilizer(v)?;
        for g in &stab {
            if !lab.fixes(&g.pair, v)? {
                report.fail(json!({"vertex": v.key(), "element": "does not fix"}));
                break;
            }
        }
        *orders.entry(stab.len().to_string()).or_insert(0usize) += 1;
        report.witnesses += 1;
    }
    report.note("base_order", base_order);
    report.note("radius", radius);
    report.note("orders", json!(orders));
    Ok(report.finish())
}

pub fn fixed_points(lab: &Complex, opts: &VerifyOptions) -> Result<SuiteReport> {
    let fp = lab.fp();
    let n = lab.n();
    let mut report = SuiteReport::new(Suite::FixedPoints, Some(group_name(fp)));
    let ball = lab.enumerate_ball(radius_or(opts, n + 4))?;
    let candidates = fixed::finite_order_candidates(lab, opts.order_cap)?;
    'phi: for (e, f) in &candidates {
        for frame in &ball.frames {
            for t in lab.trees() {
                let v = lab.canonical_vertex(frame, t)?;
                if lab.fixes(&e.pair, &v)? {
                    report.witnesses += 1;
                    continue 'phi;
                }
            }
        }
        report.fail(json!({"phi": f.describe(fp)}));
    }
    report.note("candidates", candidates.len());
    report.note("radius", ball.radius);
    Ok(report.finish())
}

pub fn f_standard(lab: &Complex, opts: &VerifyOptions) -> Result<SuiteReport> {
    let fp = lab.fp();
    let n = lab.n();
    let mut report = SuiteReport::new(Suite::FStandard, Some(group_name(fp)));
    let ball = lab.enumerate_ball(radius_or(opts, n + 4))?;
    let types = lab.ball_vertex_types(&ball)?;
    let mut per_f = Vec::new();
    for f in test_subgroups(lab, opts)? {
        let desc = f.describe(fp);
        let f2 = f.projections(lab)?;
        let ctx = FixedContext::new(lab, f)?;
        let sub = ctx.fixed_subcomplex(&types)?;
        for d in sub.discrepancies() {
            report.fail(json!({"f": desc, "vertex": d.vertex.key(), "reduced": d.reduced, "standard": d.standard}));
        }
        let reduced: BTreeSet<String> = sub.reduced().map(|v| v.vertex.key()).collect();
        let ctx2 = FixedContext::new(lab, f2)?;
        let reduced2: BTreeSet<String> = ctx2
            .fixed_subcomplex(&types)?
            .reduced()
            .map(|v| v.vertex.key())
            .collect();
        if reduced != reduced2 {
            report.fail(json!({
                "f": desc,
                "only_f1": reduced.difference(&reduced2).collect::<Vec<_>>(),
                "only_f2": reduced2.difference(&reduced).collect::<Vec<_>>(),
            }));
        }
        report.witnesses += 1;
        per_f.push(json!({
            "f": desc,
            "order": ctx.f.order(),
            "fixed": sub.vertices.len(),
            "reduced": reduced.len(),
        }));
    }
    report.note("vertex_types", types.len());
    report.note("subgroups", Value::Array(per_f));
    Ok(report.finish())
}

fn bump(report: &mut SuiteReport, key: &str, by: usize) {
    let cur = report.summary.get(key).and_then(Value::as_u64).unwrap_or(0);
    report.note(key, cur + by as u64);
}

/// Split-length identity over every block of each representative.
pub fn check_word_length(ctx: &FixedContext, reps: &[Frame], report: &mut SuiteReport) -> Result<()> {
    for r in reps {
        let mut checked = 0;
        for b in 0..ctx.block_groups().len() {
            for s in ctx.split_length(r, b, 3)? {
                checked += 1;
                if !s.holds() {
                    report.fail(json!({"rep": r.basis().to_code(), "check": s}));
                }
            }
        }
        bump(report, "elements", checked);
        report.witnesses += 1;
    }
    Ok(())
}

/// Lifts of local reductions, restrictions of reductive moves and the
/// block decomposition of every reductive move.
pub fn check_lift_restrict(ctx: &FixedContext, reps: &[Frame], report: &mut SuiteReport) -> Result<()> {
    for r in reps {
        let code = r.basis().to_code();
        for l in ctx.lifted_reductions(r)? {
            report.witnesses += 1;
            if !l.lift_reductive {
                report.fail(json!({"rep": code, "lift": l}));
            }
        }
        let moves = ctx.reductive_moves_at(r)?;
        bump(report, "reductive_moves", moves.len());
        for (mv, _) in &moves {
            let k = mv.operative as u8 + 1;
            let mut restricts = false;
            for b in ctx.idx.adjacent_blocks(k) {
                if let Ok(local) = ctx.restrict_move(r, mv, b) {
                    if ctx.local_reductive(b, &local)? {
                        restricts = true;
                        break;
                    }
                }
            }
            if !restricts {
                report.fail(json!({"rep": code, "move": mv.describe(), "reason": "no reductive restriction"}));
            }
            if !ctx.decomposes(r, mv)? {
                report.fail(json!({"rep": code, "move": mv.describe(), "reason": "decomposition"}));
            }
        }
    }
    Ok(())
}

/// Retraction chain and join identification at each representative;
/// witnesses are vertices with at least two active blocks.
pub fn check_join(ctx: &FixedContext, reps: &[Frame], report: &mut SuiteReport) -> Result<()> {
    for r in reps {
        let ch = ctx.retraction_chain(r)?;
        if !ch.passed() {
            report.fail(json!({"rep": r.basis().to_code(), "chain": ch}));
        } else if ch.join.active_blocks.len() >= 2 {
            report.witnesses += 1;
        }
        if matches!(ch.r1_verdict, Some(Verdict::HomologyTrivialOnly { .. })) {
            report.warnings.push(format!("{}: R1 homology trivial only", r.basis().to_code()));
        }
        bump(report, "vertices", 1);
    }
    Ok(())
}

/// Homology of the standard fixtures against their known values.
pub fn homology_suite() -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Homology, None);
    let (join, _) = poset_join(&Poset::antichain(2), &Poset::antichain(2));
    let fixtures: [(&str, SimplicialComplex, Vec<usize>, i64); 4] = [
        ("point", SimplicialComplex::simplex(1), vec![0], 1),
        ("triangle-boundary", SimplicialComplex::sphere(3), vec![0, 1], 0),
        ("tetrahedron-boundary", SimplicialComplex::sphere(4), vec![0, 0, 1], 2),
        ("join-of-0-spheres", order_complex(&join), vec![0, 1], 0),
    ];
    for (name, c, betti, chi) in fixtures {
        let h = homology(&c)?;
        report.witnesses += 1;
        let torsion_free = h.torsion.iter().all(Vec::is_empty);
        if h.betti != betti || h.euler_characteristic != chi || !torsion_free {
            report.fail(json!({"fixture": name, "homology": h}));
        }
    }
    Ok(report.finish())
}

/// All requested suites, global ones once, in order.
pub fn run_suites(suites: &[Suite], lab: &Complex, opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    let mut done = HashSet::new();
    let mut out = Vec::new();
    for &s in suites {
        if done.insert(s) {
            out.push(run_suite(s, lab, opts)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn naive_tree_counts() {
        let counts: Vec<usize> = (1..=4).map(|n| naive_tree_codes(n).unwrap().len()).collect();
        assert_eq!(counts[0], 1);
        assert_eq!(counts[1], 3);
    }

    #[test]
    fn homology_fixtures_pass() {
        assert!(homology_suite().unwrap().passed);
    }

    #[test]
    fn group_names() {
        let fp = FreeProduct::cyclic(&[2, 3]).unwrap();
        assert_eq!(group_name(&fp), "Z2*Z3");
    }
}
