use std::path::Path;

use num_bigint::BigUint;
use serde_json::{json, Value};

use mst_core::bounds::{
    evaluate_dim_bound, minor_free_wcol_bound, parse_rational, rational_from_f64, treewidth_wcol_bound, DimBound,
};
use mst_core::coreset::{
    build_coreset, check_ladder_sequence, set_cover_cap, verify_coreset_bruteforce, ClusteringInstance,
};
use mst_core::cover::sparse_cover;
use mst_core::decomposition::{
    validate_buffered_cop_decomposition, validate_tree_decomposition, BufferedCopDecomposition, CopParams,
};
use mst_core::flatness::{flat_scattered, verify_flatness, DecompositionInput};
use mst_core::generate::{gen_clustering_instance, gen_grid, gen_partial_ktree};
use mst_core::graph::set_diameter;
use mst_core::io;
use mst_core::ladder::{brute_force_longest_ladder, greedy_ladder, validate_ladder, EpsLadder, LadderChecks};
use mst_core::lowerbound::{build_lb_instance, verify_lb_instance};
use mst_core::wcol::{partition_from_cop_decomposition, partition_from_tree_decomposition, weak_reach_table};
use mst_core::{DiameterMode, OrderedPartition, VertexSet, WeightedGraph};

use crate::*;

/// Diameters are compared with this slack.
const TOL: f64 = 1e-9;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn with_ext(prefix: &Path, ext: &str) -> std::path::PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    s.into()
}

fn load_graph(path: &Path) -> Result<WeightedGraph, Failure> {
    Ok(io::parse_gr(&read(path)?)?)
}

/// A path to an id file, or an inline comma-separated list.
fn load_ids(spec: &str, n: usize) -> Result<Vec<usize>, Failure> {
    let path = Path::new(spec);
    let text = if path.is_file() { read(path)? } else { spec.to_string() };
    Ok(io::parse_ids(&text, n)?)
}

fn ids(set: impl IntoIterator<Item = usize>) -> Vec<usize> {
    set.into_iter().map(|v| v + 1).collect()
}

fn pairs1(pairs: &[(usize, usize)]) -> Vec<[usize; 2]> {
    pairs.iter().map(|&(a, b)| [a + 1, b + 1]).collect()
}

fn ratio(r: f64, rho: f64) -> Result<num_rational::BigRational, Failure> {
    Ok(rational_from_f64(r)? / rational_from_f64(rho)?)
}

struct Built {
    partition: OrderedPartition,
    mode: DiameterMode,
    bound: Option<BigUint>,
    bound_kind: String,
    radius_ok: Option<bool>,
}

fn build_partition(g: &WeightedGraph, src: &PartitionSource, rho: f64, r: f64) -> Result<Built, Failure> {
    let n = g.vertex_count();
    let x = ratio(r, rho)?;
    if let Some(td) = &src.td {
        let td = io::parse_td(&read(td)?, n)?;
        let partition = partition_from_tree_decomposition(g, &td, rho)?;
        let k = td.max_bag_size() as u64;
        return Ok(Built {
            partition,
            mode: DiameterMode::Weak,
            bound: treewidth_wcol_bound(k, &x).ok(),
            bound_kind: format!("treewidth(k={k}, r/rho={x})"),
            radius_ok: None,
        });
    }
    let path = src.bcd.as_ref().ok_or_else(|| usage("one of --td or --bcd is required"))?;
    let bcd = io::parse_bcd(&read(path)?, n)?;
    let cp = partition_from_cop_decomposition(g, &bcd, rho)?;
    Ok(Built {
        partition: cp.partition,
        mode: DiameterMode::Strong,
        bound: minor_free_wcol_bound(src.h, &x).ok(),
        bound_kind: format!("minor_free(h={}, r/rho={x})", src.h),
        radius_ok: Some(cp.radius_ok),
    })
}

fn max_diameter(g: &WeightedGraph, p: &OrderedPartition, mode: DiameterMode) -> Result<f64, Failure> {
    let mut worst: f64 = 0.0;
    for part in p.parts() {
        worst = worst.max(set_diameter(g, part, mode)?);
    }
    Ok(worst)
}

fn parts_json(p: &OrderedPartition) -> Vec<Vec<usize>> {
    p.parts().iter().map(|s| ids(s.iter())).collect()
}

pub fn wcol(a: &WcolArgs) -> Result<Outcome, Failure> {
    let g = load_graph(&a.graph)?;
    let built = build_partition(&g, &a.source, a.rho, a.r)?;
    let table = weak_reach_table(&g, &built.partition, a.r)?;
    let diam = max_diameter(&g, &built.partition, built.mode)?;
    let bound_ok = built.bound.as_ref().map(|b| BigUint::from(table.wcol) <= *b);
    let mut out = Outcome::new(json!({
        "parts": parts_json(&built.partition),
        "wreach_sizes": table.sizes(),
        "wcol": table.wcol,
        "diameter_mode": built.mode,
        "max_diameter": diam,
        "bound_kind": built.bound_kind,
        "bound": built.bound.as_ref().map(|b| b.to_string()),
        "bound_satisfied": bound_ok,
    }))
    .check("diameter_ok", diam <= a.rho + TOL);
    if let Some(ok) = bound_ok {
        out = out.check("bound_satisfied", ok);
    }
    if let Some(ok) = built.radius_ok {
        out = out.check("radius_ok", ok);
    }
    Ok(out)
}

pub fn cover(a: &CoverArgs) -> Result<Outcome, Failure> {
    let g = load_graph(&a.graph)?;
    let built = build_partition(&g, &a.source, a.rho, a.r)?;
    let fam = sparse_cover(&g, &built.partition, a.r, a.rho)?;
    Ok(Outcome::new(json!({
        "sets": fam.sets.iter().map(|s| ids(s.iter())).collect::<Vec<_>>(),
        "overlap": fam.overlap,
        "wcol_2r": fam.wcol_2r,
        "diameter_blowup": fam.diameter_blowup,
        "strong_blowup": fam.strong_blowup,
        "blowup_bound": fam.blowup_bound,
    }))
    .check("cover_ok", fam.cover_ok)
    .check("overlap_ok", fam.overlap <= fam.wcol_2r)
    .check("blowup_ok", fam.diameter_blowup <= fam.blowup_bound + TOL))
}

pub fn flat(a: &FlatArgs) -> Result<Outcome, Failure> {
    let g = load_graph(&a.graph)?;
    let set = VertexSet::new(load_ids(&a.a, g.vertex_count())?);
    let bcd: Option<BufferedCopDecomposition> = match &a.bcd {
        Some(p) => Some(io::parse_bcd(&read(p)?, g.vertex_count())?),
        None => None,
    };
    let input = match &bcd {
        Some(b) => DecompositionInput::Given(b),
        None => DecompositionInput::Heuristic(a.h),
    };
    let res = flat_scattered(&g, input, a.r, a.rho, a.m, &set)?;
    let chk = verify_flatness(&g, a.r, &res.partition, a.m, &res.flatness);
    Ok(Outcome::new(json!({
        "s": res.s.iter().map(|s| ids(s.iter())).collect::<Vec<_>>(),
        "b": ids(res.b.iter()),
        "c": res.flatness.c,
        "guarantees": res.flatness.guarantees,
        "first_loop_iterations": res.flatness.first_loop_iterations,
        "parts": parts_json(&res.partition),
        "radius_ok": res.radius_ok,
    }))
    .check("s_within_c", chk.s_within_c)
    .check("reach_disjoint", chk.reach_disjoint)
    .check("pairwise_far", chk.pairwise_far)
    .check("b_disjoint_from_s", chk.b_disjoint_from_s)
    .check("b_size_ok", chk.b_size_ok))
}

pub fn ladder(a: &LadderArgs) -> Result<Outcome, Failure> {
    let g = load_graph(&a.graph)?;
    let n = g.vertex_count();
    let matching = match &a.matching {
        Some(p) => Some(io::parse_pairs(&read(p)?, n)?),
        None => None,
    };
    let checks = LadderChecks { lb_extra: a.lb_extra, matching: matching.as_deref(), tolerance: a.tolerance };
    let role = |s: &Option<String>, name: &str| -> Result<Vec<usize>, Failure> {
        let s = s.as_ref().ok_or_else(|| usage(format!("--{name} is required in this mode")))?;
        load_ids(s, n)
    };
    let (ladder, optimum) = match a.mode {
        LadderMode::Validate => {
            let pairs = match &a.ladder {
                Some(p) => io::parse_pairs(&read(p)?, n)?,
                None => {
                    let (c, p) = (role(&a.centers, "centers")?, role(&a.points, "points")?);
                    if c.len() != p.len() {
                        return Err(usage("--centers and --points must have equal length"));
                    }
                    c.into_iter().zip(p).collect()
                }
            };
            (EpsLadder::new(pairs, a.eps, a.r), None)
        }
        LadderMode::Greedy => {
            let (c, p) = (role(&a.centers, "centers")?, role(&a.points, "points")?);
            (greedy_ladder(&g, &VertexSet::new(c), &VertexSet::new(p), a.eps, a.r)?, None)
        }
        LadderMode::Brute => {
            let (c, p) = (role(&a.centers, "centers")?, role(&a.points, "points")?);
            let (len, l) =
                brute_force_longest_ladder(&g, &VertexSet::new(c), &VertexSet::new(p), a.eps, a.r, a.limit)?;
            (l, Some(len))
        }
    };
    if !(ladder.epsilon > 0.0) || !(ladder.r > 0.0) {
        return Err(usage("eps and r must be positive"));
    }
    let rep = validate_ladder(&g, &ladder, &checks);
    Ok(Outcome::new(json!({
        "mode": a.mode,
        "pairs": pairs1(&ladder.pairs),
        "length": ladder.len(),
        "optimum": optimum,
        "first_violation": rep.first_violation,
    }))
    .check("valid", rep.valid))
}

pub fn gen_lb(a: &GenLbArgs) -> Result<Outcome, Failure> {
    let eps = parse_rational(&a.eps)?;
    let inst = build_lb_instance(a.k, a.r, &eps)?;
    let n = inst.graph.vertex_count();
    let files = ["gr", "td", "ladder", "matching"].map(|e| with_ext(&a.out, e));
    write(&files[0], &io::write_gr_exact(n, &inst.exact_edges))?;
    write(&files[1], &io::write_td(&inst.td, n))?;
    write(&files[2], &io::write_pairs(&inst.ladder.pairs))?;
    write(&files[3], &io::write_pairs(&inst.matching))?;
    let exact = verify_lb_instance(&inst)?;
    // Re-read what was written and validate in floating point as a reader would.
    let g = io::parse_gr(&read(&files[0])?)?;
    let checks = LadderChecks { lb_extra: true, matching: Some(&inst.matching), tolerance: TOL };
    let float = validate_ladder(&g, &inst.ladder, &checks);
    Ok(Outcome::new(json!({
        "vertices": n,
        "edges": inst.exact_edges.len(),
        "ladder_length": exact.length,
        "expected_length": exact.expected_length,
        "td_width": exact.td_width,
        "levels": inst.levels,
        "exact_check": exact,
        "files": files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>(),
    }))
    .check("exact_certificates", exact.all())
    .check("float_ladder_valid", float.valid))
}

pub fn gen(a: &GenArgs) -> Result<Outcome, Failure> {
    let range = (a.lo, a.hi);
    let (g, td) = match a.kind {
        GenKind::Ktree => {
            let (g, td) = gen_partial_ktree(a.n, a.k, a.keep, range, a.seed)?;
            (g, Some(td))
        }
        GenKind::Grid => (gen_grid(a.rows, a.cols, range, a.seed)?, None),
    };
    let n = g.vertex_count();
    let mut files = vec![with_ext(&a.out, "gr")];
    write(&files[0], &io::write_gr(&g))?;
    let mut out = json!({ "vertices": n, "edges": g.edge_count() });
    let mut td_ok = None;
    if let Some(td) = &td {
        let f = with_ext(&a.out, "td");
        write(&f, &io::write_td(td, n))?;
        files.push(f);
        let rep = validate_tree_decomposition(&g, td);
        out["td_width"] = json!(rep.width);
        td_ok = Some(rep.valid);
    }
    if let Some(nf) = a.facilities {
        let inst = gen_clustering_instance(g, nf, a.centers, a.seed)?;
        let f = with_ext(&a.out, "inst");
        write(&f, &io::write_instance(&inst))?;
        files.push(f);
        out["facilities"] = json!(ids(inst.facilities.iter()));
    }
    out["files"] = json!(files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>());
    let mut outcome = Outcome::new(out);
    outcome.seed = Some(a.seed);
    if let Some(ok) = td_ok {
        outcome = outcome.check("td_valid", ok);
    }
    Ok(outcome)
}

fn load_instance(path: &Path) -> Result<ClusteringInstance, Failure> {
    Ok(io::parse_instance(&read(path)?)?)
}

pub fn coreset(a: &CoresetArgs) -> Result<Outcome, Failure> {
    let inst = load_instance(&a.instance)?;
    let res = build_coreset(&inst, a.eps, a.h)?;
    if let Some(p) = &a.out {
        write(p, &io::write_ids(res.s.iter()))?;
    }
    let cap = set_cover_cap(inst.k, inst.clients.len());
    let mut seq_ok = true;
    let mut first_bad = None;
    for (t, lvl) in res.levels.iter().enumerate() {
        if let Some(why) = check_ladder_sequence(&inst, lvl, cap)? {
            seq_ok = false;
            first_bad.get_or_insert(format!("level {t}: {why}"));
        }
    }
    let p = &res.params;
    let levels: Vec<Value> = res
        .levels
        .iter()
        .map(|l| {
            json!({
                "radius": l.radius,
                "pairs": l.pairs.iter().map(|(x, q)| json!({"x": ids(x.iter()), "p": q + 1})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let max_len = res.levels.iter().map(|l| l.pairs.len()).max().unwrap_or(0);
    let mut out = Outcome::new(json!({
        "s": ids(res.s.iter()),
        "z": ids(res.z.iter()),
        "size": res.s.len(),
        "levels": levels,
        "level_count": res.levels.len(),
        "level_bound": res.level_bound(),
        "first_invalid_level": first_bad,
        "params": {
            "epsilon": p.epsilon,
            "delta": p.delta,
            "r_tilde": p.r_tilde,
            "r_star": p.r_star,
            "beta": p.beta,
            "seed_centers": ids(p.seed_centers.iter()),
            "c": p.c,
            "lambda": p.lambda,
            "gamma": p.gamma,
            "length_bound_log2": p.length_bound_log2,
        },
    }))
    .check("sequences_valid", seq_ok)
    .check("level_count_ok", res.levels.len() as f64 <= res.level_bound())
    .check("z_in_s", res.z.is_subset(&res.s));
    if let (Some(l), Some(g)) = (p.lambda, p.gamma) {
        out = out.check("lambda_within_gamma", l <= g);
    }
    if let Some(b) = p.length_bound_log2 {
        out = out.check("lengths_within_bound", max_len == 0 || (max_len as f64).log2() <= b);
    }
    Ok(out)
}

pub fn verify_coreset(a: &VerifyCoresetArgs) -> Result<Outcome, Failure> {
    let inst = load_instance(&a.instance)?;
    let text = read(&a.coreset)?;
    let n = inst.graph.vertex_count();
    let s = if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).map_err(|e| usage(format!("bad coreset JSON: {e}")))?;
        let list = v["outputs"]["s"]
            .as_array()
            .or_else(|| v["s"].as_array())
            .ok_or_else(|| usage("coreset JSON has no `s` list"))?;
        let mut out = Vec::new();
        for x in list {
            match x.as_u64() {
                Some(i) if i >= 1 && (i as usize) <= n => out.push(i as usize - 1),
                _ => return Err(usage(format!("bad id {x} in coreset JSON"))),
            }
        }
        out
    } else {
        io::parse_ids(&text, n)?
    };
    let rep = verify_coreset_bruteforce(&inst, &VertexSet::new(s), a.eps, a.kmax)?;
    Ok(Outcome::new(json!({
        "worst_ratio": rep.worst_ratio,
        "witness": ids(rep.witness.iter()),
        "subsets_checked": rep.subsets_checked,
    }))
    .check("ok", rep.ok))
}

pub fn verify_td(a: &VerifyTdArgs) -> Result<Outcome, Failure> {
    let g = load_graph(&a.graph)?;
    let td = io::parse_td(&read(&a.td)?, g.vertex_count())?;
    let rep = validate_tree_decomposition(&g, &td);
    Ok(Outcome::new(json!({ "width": rep.width, "violations": rep.violations })).check("valid", rep.valid))
}

pub fn verify_bcd(a: &VerifyBcdArgs) -> Result<Outcome, Failure> {
    let g = load_graph(&a.graph)?;
    let bcd = io::parse_bcd(&read(&a.bcd)?, g.vertex_count())?;
    let mut params = CopParams::new(a.delta, a.gamma, a.w);
    params.tolerance = a.tolerance;
    let rep = validate_buffered_cop_decomposition(&g, &bcd, &params);
    Ok(Outcome::new(json!({
        "supernodes": bcd.len(),
        "max_radius": rep.max_radius,
        "max_leaves": rep.max_leaves,
        "max_adjacent_ancestors": rep.max_adjacent_ancestors,
        "gamma_sup": rep.gamma_sup,
        "violations": rep.violations,
    }))
    .check("valid", rep.valid))
}

pub fn bounds(a: &BoundsArgs) -> Result<Outcome, Failure> {
    fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T, Failure> {
        v.clone().ok_or_else(|| usage(format!("--{name} is required for this kind")))
    }
    let q = |v: &Option<String>, name: &str| -> Result<num_rational::BigRational, Failure> {
        Ok(parse_rational(&need(v, name)?)?)
    };
    let value = match a.kind {
        BoundKind::MinorFree => evaluate_dim_bound(&DimBound::MinorFree { h: need(&a.h, "h")?, eps: q(&a.eps, "eps")? })?
            .to_string(),
        BoundKind::FromWcol => {
            let c: BigUint = need(&a.c, "c")?.parse().map_err(|_| usage("--c must be a nonnegative integer"))?;
            evaluate_dim_bound(&DimBound::FromWcol { c, ratio: q(&a.ratio, "ratio")? })?.to_string()
        }
        BoundKind::LowerBound => {
            evaluate_dim_bound(&DimBound::LowerBound { t: need(&a.t, "t")?, r: need(&a.r, "r")? })?.to_string()
        }
        BoundKind::WcolMinorFree => minor_free_wcol_bound(need(&a.h, "h")?, &q(&a.x, "x")?)?.to_string(),
        BoundKind::WcolTreewidth => treewidth_wcol_bound(need(&a.k, "k")?, &q(&a.x, "x")?)?.to_string(),
    };
    let mut out = Outcome::new(json!({ "kind": a.kind, "value": value }));
    out.plain = Some(value);
    Ok(out)
}
