use std::fs::File;
use std::io::{BufReader, Write};

use birsym_core::birat::{
    beta_after_blowup, beta_by_label, beta_class, certify_invariance, random_blowup_spec, BlowupCase, BlowupSpec,
    Certifier, FixedLocusData, SpanField,
};
use birsym_core::compute::{dimension_of, relations_for, Field};
use birsym_core::hecke::{charpoly_report, hecke_matrix};
use birsym_core::linalg::integer::{IntegerConfig, IntegerQuotient, Order};
use birsym_core::linalg::modp::{vec_mod_p, Elimination};
use birsym_core::linalg::rank::rank_q;
use birsym_core::modsym::{compare_with_symbol_group, modsym_report};
use birsym_core::relations::{build_relations, combination, full_kset, stream_relations_sms, SymbolVector};
use birsym_core::structure::{coprimitive_dim, mu_cokernel, primitive_dim, verify_mu};
use birsym_core::symbol::parse_tuple;
use birsym_core::{AbelianGroup, Flavor, SymbolIndex};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::args::{parse_levels, BetaArgs, DimArgs, ExportArgs, HeckeArgs, ModsymArgs, MuArgs, OrderArgs, PrimitiveArgs, SystemArgs};
use crate::report::{sink, JobConfig, Outcome, Progress, Table};

pub type CmdResult<T> = Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn kset_or_full(kset: &[usize], n: usize) -> Vec<usize> {
    if kset.is_empty() {
        full_kset(n)
    } else {
        kset.to_vec()
    }
}

fn group_label(moduli: &[u32]) -> String {
    moduli.iter().map(|m| format!("Z/{m}")).collect::<Vec<_>>().join("x")
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn system_name(flavor: Flavor, n: usize, kset: &[usize]) -> String {
    if kset == full_kset(n).as_slice() {
        format!("{flavor}_{n}")
    } else {
        format!("{flavor}_{{{n},{}}}", join(kset, ","))
    }
}

pub fn config_dim(cfg: JobConfig, a: &DimArgs) -> CmdResult<JobConfig> {
    Ok(JobConfig {
        groups: a.groups.groups()?,
        n: Some(a.n),
        flavor: Some(a.flavor),
        kset: kset_or_full(&a.kset, a.n),
        field: Some(a.field),
        ..cfg
    })
}

fn config_system(cfg: JobConfig, a: &SystemArgs) -> JobConfig {
    JobConfig {
        groups: vec![a.group.clone()],
        n: Some(a.n),
        flavor: Some(a.flavor),
        kset: kset_or_full(&a.kset, a.n),
        ..cfg
    }
}

#[derive(Serialize)]
struct DimRow {
    group: Vec<u32>,
    n: usize,
    flavor: Flavor,
    kset: Vec<usize>,
    field: Field,
    symbols: usize,
    relations: usize,
    rank: usize,
    dim: usize,
    /// `(prime, rank)` for every prime used.
    ranks: Vec<(u32, usize)>,
    agree: bool,
}

pub fn run_dim(cfg: &JobConfig, progress: &Progress) -> CmdResult<Outcome> {
    let (n, flavor, field) = (cfg.n.unwrap(), cfg.flavor.unwrap(), cfg.field.unwrap());
    let mut rows = Vec::new();
    let mut table =
        Table::new(&["group", "n", "flavor", "kset", "field", "symbols", "relations", "rank", "dim", "agree"]);
    let mut out_primes = Vec::new();
    let mut summary = Vec::new();
    for moduli in &cfg.groups {
        let g = AbelianGroup::new(moduli.clone()).map_err(err)?;
        let label = group_label(moduli);
        let rel = progress
            .stage(format!("relations {label}"), || relations_for(&g, n, flavor, &cfg.kset, field))
            .map_err(err)?;
        cfg.check_rows(rel.nrows())?;
        let primes = cfg.primes_for(&g);
        let r = progress
            .stage(format!("rank {label}"), || dimension_of(&g, &rel, field, &primes, &Default::default()))
            .map_err(err)?;
        let used: Vec<u32> = r.per_prime.iter().map(|p| p.prime).collect();
        out_primes.extend(used.iter().copied());
        summary.push(format!("dim {}({label}) over {field} = {}", system_name(flavor, n, &cfg.kset), r.dim));
        table.push(vec![
            join(moduli, "x"),
            n.to_string(),
            flavor.to_string(),
            join(&cfg.kset, " "),
            field.to_string(),
            r.symbols.to_string(),
            r.relations.to_string(),
            r.rank.to_string(),
            r.dim.to_string(),
            r.agree.to_string(),
        ]);
        rows.push(DimRow {
            group: moduli.clone(),
            n,
            flavor,
            kset: cfg.kset.clone(),
            field,
            symbols: r.symbols,
            relations: r.relations,
            rank: r.rank,
            dim: r.dim,
            ranks: r.per_prime.iter().map(|p| (p.prime, p.rank)).collect(),
            agree: r.agree,
        });
    }
    let certified = rows.iter().all(|r| r.agree);
    let mut out = Outcome::new(json!({ "rows": rows }));
    out.add_primes(&out_primes);
    out.certified = certified;
    out.summary = summary;
    out.table = Some(table);
    Ok(out)
}

pub fn config_order(cfg: JobConfig, a: &OrderArgs) -> JobConfig {
    config_system(cfg, &a.system).param("element", &a.element)
}

fn integer_quotient(cfg: &JobConfig, progress: &Progress, label: &str) -> CmdResult<(IntegerQuotient, SymbolIndex)> {
    let (n, flavor) = (cfg.n.unwrap(), cfg.flavor.unwrap());
    let g = AbelianGroup::new(cfg.groups[0].clone()).map_err(err)?;
    let rel = progress.stage(format!("relations {label}"), || build_relations(&g, n, flavor, &cfg.kset)).map_err(err)?;
    cfg.check_rows(rel.nrows())?;
    let icfg = IntegerConfig { dense_budget: cfg.snf_budget };
    let q = progress
        .stage(format!("integer normal form {label}"), || IntegerQuotient::with_config(rel.matrix(), &icfg))
        .map_err(err)?;
    let (index, _) = rel.into_parts();
    Ok((q, index))
}

pub fn run_order(cfg: &JobConfig, progress: &Progress) -> CmdResult<Outcome> {
    let element = cfg.params["element"].as_str().unwrap_or_default().to_string();
    let label = group_label(&cfg.groups[0]);
    let (q, index) = integer_quotient(cfg, progress, &label)?;
    let tuple = parse_tuple(index.group(), &element)?;
    if tuple.len() != index.n() {
        return Err(format!("element has {} entries, expected {}", tuple.len(), index.n()));
    }
    let v = combination(&index, &[(tuple, 1)]).map_err(err)?;
    let ord = progress.stage("element order", || q.element_order(&v)).map_err(err)?;
    // Independent check: d·v must lie in the integral span, and v must not
    // unless d = 1.
    let certified = match &ord {
        Order::Finite(d) => {
            let k: i64 = d.try_into().map_err(|_| format!("order {d} exceeds i64"))?;
            q.in_rowspan_z(&v.scaled(k)).map_err(err)? && (k == 1) == q.in_rowspan_z(&v).map_err(err)?
        }
        Order::Infinite => !q.in_rowspan_q(&v).map_err(err)?,
    };
    let name = system_name(cfg.flavor.unwrap(), cfg.n.unwrap(), &cfg.kset);
    let mut out = Outcome::new(json!({ "element": element, "zero_in_group": v.is_zero(), "order": ord.to_string() }));
    out.summary.push(format!("order of [{element}] in {name}({label}) = {ord}"));
    out.certified = certified;
    Ok(out)
}

pub fn config_torsion(cfg: JobConfig, a: &SystemArgs) -> JobConfig {
    config_system(cfg, a)
}

pub fn run_torsion(cfg: &JobConfig, progress: &Progress) -> CmdResult<Outcome> {
    let label = group_label(&cfg.groups[0]);
    let (q, index) = integer_quotient(cfg, progress, &label)?;
    let divs: Vec<String> = q.torsion().iter().map(BigInt::to_string).collect();
    // The free rank must match the rational corank from the prime-field route.
    let g = index.group().clone();
    let primes = cfg.primes_for(&g);
    let rel = build_relations(&g, cfg.n.unwrap(), cfg.flavor.unwrap(), &cfg.kset).map_err(err)?;
    let rq = progress.stage("rational rank", || rank_q(rel.matrix(), &primes)).map_err(err)?;
    let certified = rq.agree && rq.corank() == q.free_rank();
    let name = system_name(cfg.flavor.unwrap(), cfg.n.unwrap(), &cfg.kset);
    let mut out = Outcome::new(json!({
        "symbols": index.len(),
        "free_rank": q.free_rank(),
        "torsion": divs,
        "rational_corank": rq.corank(),
    }));
    out.add_primes(&primes);
    out.summary.push(format!("{name}({label}) = Z^{} + torsion [{}]", q.free_rank(), divs.join(",")));
    out.certified = certified;
    Ok(out)
}

pub fn config_hecke(cfg: JobConfig, a: &HeckeArgs) -> JobConfig {
    JobConfig { groups: vec![a.group.clone()], n: Some(a.n), flavor: Some(a.flavor), kset: full_kset(a.n), ..cfg }
        .param("ell", a.ell)
        .param("r", a.r)
        .param("prime", a.prime)
}

pub fn run_hecke(cfg: &JobConfig, progress: &Progress) -> CmdResult<Outcome> {
    let (n, flavor) = (cfg.n.unwrap(), cfg.flavor.unwrap());
    let ell = cfg.params["ell"].as_u64().ok_or("missing ell")?;
    let r = cfg.params["r"].as_u64().ok_or("missing r")? as usize;
    let g = AbelianGroup::new(cfg.groups[0].clone()).map_err(err)?;
    let p = match cfg.params["prime"].as_u64() {
        Some(p) => p as u32,
        None => cfg.primes_for(&g)[0],
    };
    let rel = progress.stage("relations", || build_relations(&g, n, flavor, &cfg.kset)).map_err(err)?;
    cfg.check_rows(rel.nrows())?;
    let h = progress.stage("hecke matrix", || hecke_matrix(&g, n, ell, r, flavor)).map_err(err)?;
    let elim = progress.stage("eliminate relations", || Elimination::new(rel.matrix(), p)).map_err(err)?;
    let well_defined = progress.stage("check relation images", || {
        rel.matrix().rows().all(|(cols, vals)| {
            let img = h.apply(&SymbolVector::from_row(cols, vals));
            elim.contains(&vec_mod_p(img.iter(), p))
        })
    });
    let spec = progress.stage("characteristic polynomial", || charpoly_report(&h, &rel, p)).map_err(err)?;
    let label = group_label(&cfg.groups[0]);
    let mut out = Outcome::new(json!({
        "ell": ell,
        "r": r,
        "lattices": h.lattice_count,
        "relation_rows_checked": rel.nrows(),
        "well_defined": well_defined,
        "quotient_dim": spec.dim,
        "charpoly": spec.charpoly,
    }));
    out.add_primes(&[p]);
    out.summary.push(format!(
        "T_{{{ell},{r}}} on {}({label}): well-defined {well_defined}, quotient dim {}, charpoly mod {p} (constant first) [{}]",
        system_name(flavor, n, &cfg.kset),
        spec.dim,
        join(&spec.charpoly, ",")
    ));
    out.certified = well_defined;
    Ok(out)
}

pub fn config_mu(cfg: JobConfig, a: &MuArgs) -> JobConfig {
    JobConfig { groups: vec![a.group.clone()], n: Some(a.n), ..cfg }.param("cokernel", a.cokernel)
}

pub fn run_mu(cfg: &JobConfig, progress: &Progress) -> CmdResult<Outcome> {
    let n = cfg.n.unwrap();
    let g = AbelianGroup::new(cfg.groups[0].clone()).map_err(err)?;
    let primes = cfg.primes_for(&g);
    let r = progress.stage("verify mu", || verify_mu(&g, n, &primes)).map_err(err)?;
    let cokernel = if cfg.params["cokernel"].as_bool().unwrap_or(false) {
        let divs = progress.stage("cokernel", || mu_cokernel(&g, n)).map_err(err)?;
        Some(divs.iter().map(BigInt::to_string).collect::<Vec<_>>())
    } else {
        None
    };
    let label = group_label(&cfg.groups[0]);
    let mut out = Outcome::new(json!({ "report": r, "cokernel": cokernel }));
    out.add_primes(&r.primes);
    out.summary.push(format!(
        "mu: B_{n}({label}) -> M_{n}({label}): relations mapped {}, surjective mod p {}{}",
        r.relations_mapped_z.unwrap_or(r.relations_mapped_mod_p),
        r.surjective_mod_p,
        cokernel.as_ref().map(|c| format!(", cokernel [{}]", c.join(","))).unwrap_or_default()
    ));
    out.certified = r.passed();
    Ok(out)
}

pub fn config_primitive(cfg: JobConfig, a: &PrimitiveArgs) -> CmdResult<JobConfig> {
    Ok(JobConfig { groups: a.groups.groups()?, n: Some(a.n), flavor: Some(a.flavor), ..cfg }.param("co", a.co))
}

pub fn run_primitive(cfg: &JobConfig, progress: &Progress) -> CmdResult<Outcome> {
    let (n, flavor) = (cfg.n.unwrap(), cfg.flavor.unwrap());
    let co = cfg.params["co"].as_bool().unwrap_or(false);
    let kind = if co { "coprimitive" } else { "primitive" };
    let mut table = Table::new(&["group", "n", "flavor", "kind", "dim", "agree"]);
    let mut reports = Vec::new();
    let mut out_primes = Vec::new();
    let mut summary = Vec::new();
    for moduli in &cfg.groups {
        let g = AbelianGroup::new(moduli.clone()).map_err(err)?;
        let primes = cfg.primes_for(&g);
        let label = group_label(moduli);
        let r = progress
            .stage(format!("{kind} {label}"), || {
                if co {
                    coprimitive_dim(&g, n, flavor, &primes)
                } else {
                    primitive_dim(&g, n, flavor, &primes)
                }
            })
            .map_err(err)?;
        out_primes.extend(primes);
        summary.push(format!("{kind} part of {flavor}_{n}({label}) has dimension {}", r.dim));
        table.push(vec![join(moduli, "x"), n.to_string(), flavor.to_string(), kind.into(), r.dim.to_string(), r.agree.to_string()]);
        reports.push(r);
    }
    let certified = reports.iter().all(|r| r.agree);
    let mut out = Outcome::new(json!({ "rows": reports }));
    out.add_primes(&out_primes);
    out.certified = certified;
    out.summary = summary;
    out.table = Some(table);
    Ok(out)
}

pub fn config_modsym(cfg: JobConfig, a: &ModsymArgs) -> CmdResult<JobConfig> {
    let levels = parse_levels(&a.level)?;
    Ok(JobConfig { groups: levels.into_iter().map(|n| vec![n]).collect(), ..cfg }.param("compare", a.compare))
}

#[derive(Serialize)]
struct ModsymRow {
    level: u32,
    dim: usize,
    dim_minus: usize,
    cusps: u64,
    cusps_fixed: u64,
    genus: Option<u64>,
    minus_formula_holds: bool,
    ranks: Vec<Vec<(u32, usize)>>,
    agree: bool,
    matches_symbol_group: Option<bool>,
}

pub fn run_modsym(cfg: &JobConfig, progress: &Progress) -> CmdResult<Outcome> {
    let compare = cfg.params["compare"].as_bool().unwrap_or(false);
    let mut table =
        Table::new(&["level", "dim", "dim_minus", "cusps", "cusps_fixed", "genus", "minus_formula", "symbol_group"]);
    let mut rows = Vec::new();
    let mut out_primes = Vec::new();
    let mut summary = Vec::new();
    for moduli in &cfg.groups {
        let level = moduli[0];
        let g = AbelianGroup::cyclic(level.max(1)).map_err(err)?;
        let primes = cfg.primes_for(&g);
        let r = progress.stage(format!("manin symbols N={level}"), || modsym_report(level, &primes)).map_err(err)?;
        let cmp = if compare {
            let c = progress
                .stage(format!("compare N={level}"), || compare_with_symbol_group(level, &primes))
                .map_err(err)?;
            Some(c.passed())
        } else {
            None
        };
        out_primes.extend(primes);
        let agree = r.ranks.iter().all(|x| x.agree);
        summary.push(format!("N={level}: dim {} dim- {} (cusps {}, fixed {})", r.dim, r.dim_minus, r.cusps, r.cusps_fixed));
        table.push(vec![
            level.to_string(),
            r.dim.to_string(),
            r.dim_minus.to_string(),
            r.cusps.to_string(),
            r.cusps_fixed.to_string(),
            r.genus.map(|g| g.to_string()).unwrap_or_default(),
            r.minus_formula_holds.to_string(),
            cmp.map(|c| c.to_string()).unwrap_or_default(),
        ]);
        rows.push(ModsymRow {
            level,
            dim: r.dim,
            dim_minus: r.dim_minus,
            cusps: r.cusps,
            cusps_fixed: r.cusps_fixed,
            genus: r.genus,
            minus_formula_holds: r.minus_formula_holds,
            ranks: r.ranks.iter().map(|x| x.per_prime.iter().map(|p| (p.prime, p.rank)).collect()).collect(),
            agree,
            matches_symbol_group: cmp,
        });
    }
    let certified = rows.iter().all(|r| r.agree && r.minus_formula_holds && r.matches_symbol_group != Some(false));
    let mut out = Outcome::new(json!({ "rows": rows }));
    out.add_primes(&out_primes);
    out.certified = certified;
    out.summary = summary;
    out.table = Some(table);
    Ok(out)
}

pub fn config_beta(cfg: JobConfig, a: &BetaArgs) -> CmdResult<JobConfig> {
    if a.input.is_none() && a.blowup.is_none() && a.random == 0 {
        return Err("beta needs --input, --blowup or --random".into());
    }
    let span = SpanField::from(a.span);
    let case = a.case.map(BlowupCase::from);
    Ok(JobConfig { groups: vec![a.group.clone()], n: Some(a.n), flavor: Some(Flavor::B), kset: full_kset(a.n), ..cfg }
        .param("input", &a.input)
        .param("blowup", &a.blowup)
        .param("random", a.random)
        .param("case", case)
        .param("span", span))
}

fn vector_terms(index: &SymbolIndex, v: &SymbolVector) -> Vec<(String, i64)> {
    v.iter().map(|(c, x)| (index.symbol(c).to_text(index.group()), x)).collect()
}

pub fn run_beta(cfg: &JobConfig, progress: &Progress) -> CmdResult<Outcome> {
    let n = cfg.n.unwrap();
    let g = AbelianGroup::new(cfg.groups[0].clone()).map_err(err)?;
    let p = &cfg.params;
    let span: SpanField = serde_json::from_value(p["span"].clone()).map_err(err)?;
    let input: Option<String> = serde_json::from_value(p["input"].clone()).map_err(err)?;
    let blowup: Option<String> = serde_json::from_value(p["blowup"].clone()).map_err(err)?;
    let case: Option<BlowupCase> = serde_json::from_value(p["case"].clone()).map_err(err)?;
    let random = p["random"].as_u64().unwrap_or(0) as usize;

    let index = SymbolIndex::enumerate(&g, n, Flavor::B).map_err(err)?;
    let mut result = serde_json::Map::new();
    let mut summary = Vec::new();
    let mut certified = true;

    let data = match &input {
        Some(path) => {
            let f = File::open(path).map_err(|e| format!("{path}: {e}"))?;
            let data = FixedLocusData::parse(&g, BufReader::new(f)).map_err(err)?;
            let by = beta_by_label(&data, &index).map_err(err)?;
            let total = beta_class(&data, &index).map_err(err)?;
            let labels: Vec<_> = by
                .iter()
                .map(|(l, v)| json!({ "label": l, "terms": vector_terms(&index, v) }))
                .collect();
            summary.push(format!("beta: {} components, {} distinct symbols", data.components.len(), total.len()));
            result.insert("components".into(), json!(data.components.len()));
            result.insert("beta".into(), json!(vector_terms(&index, &total)));
            result.insert("by_label".into(), json!(labels));
            Some(data)
        }
        None => None,
    };

    if blowup.is_none() && random == 0 {
        let mut out = Outcome::new(result);
        out.summary = summary;
        return Ok(out);
    }
    let rel = progress.stage("relations", || build_relations(&g, n, Flavor::B, &full_kset(n))).map_err(err)?;
    cfg.check_rows(rel.nrows())?;
    let cert = progress.stage("integer normal form", || Certifier::new(&rel)).map_err(err)?;

    if let Some(path) = &blowup {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
        let spec: BlowupSpec = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
        spec.validate(&g).map_err(err)?;
        let ok = match &data {
            Some(d) => {
                let before = beta_class(d, &index).map_err(err)?;
                let after = beta_after_blowup(d, &spec, &index).map_err(err)?;
                result.insert("beta_after".into(), json!(vector_terms(&index, &after)));
                cert.equal(&before, &after, span).map_err(err)?
            }
            None => certify_invariance(&spec, &cert, span).map_err(err)?,
        };
        summary.push(format!("blowup {path}: invariance certified over {span:?}: {ok}"));
        result.insert("blowup_certified".into(), json!(ok));
        certified &= ok;
    }

    if random > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let cases = match case {
            Some(c) => vec![c],
            None => vec![BlowupCase::I, BlowupCase::II, BlowupCase::III],
        };
        let mut rows = Vec::new();
        for c in cases {
            let (mut generated, mut passed) = (0usize, 0usize);
            let mut failures = Vec::new();
            progress.stage(format!("random blowups {c:?}"), || -> CmdResult<()> {
                for _ in 0..random {
                    let Some(spec) = random_blowup_spec(&g, n, c, &mut rng) else { continue };
                    generated += 1;
                    if certify_invariance(&spec, &cert, span).map_err(err)? {
                        passed += 1;
                    } else {
                        failures.push(spec);
                    }
                }
                Ok(())
            })?;
            summary.push(format!("case {c:?}: {passed}/{generated} random blowups certified over {span:?}"));
            certified &= failures.is_empty();
            rows.push(json!({ "case": c, "generated": generated, "certified": passed, "failures": failures }));
        }
        result.insert("random".into(), json!(rows));
    }
    let mut out = Outcome::new(result);
    out.summary = summary;
    out.certified = certified;
    Ok(out)
}

pub fn config_export(cfg: JobConfig, a: &ExportArgs) -> JobConfig {
    let mut c = config_system(cfg, &a.system).param("keep_self_negating", a.keep_self_negating);
    c.outputs.sms = Some(a.output.clone());
    c.outputs.symbols = a.symbols.clone();
    c
}

pub fn run_export(cfg: &JobConfig, progress: &Progress) -> CmdResult<Outcome> {
    let (n, flavor) = (cfg.n.unwrap(), cfg.flavor.unwrap());
    let keep = cfg.params["keep_self_negating"].as_bool().unwrap_or(false);
    let g = AbelianGroup::new(cfg.groups[0].clone()).map_err(err)?;
    let index = if keep {
        SymbolIndex::enumerate_keep_self_negating(&g, n, flavor)
    } else {
        SymbolIndex::enumerate(&g, n, flavor)
    }
    .map_err(err)?;
    let path = cfg.outputs.sms.as_ref().ok_or("missing output path")?;
    let rows = progress
        .stage("stream sms", || -> CmdResult<usize> {
            let mut w = sink(path).map_err(err)?;
            let rows = stream_relations_sms(&g, n, flavor, &cfg.kset, keep, &mut w).map_err(err)?;
            w.flush().map_err(err)?;
            Ok(rows)
        })?;
    if let Some(sym) = &cfg.outputs.symbols {
        let mut w = sink(sym).map_err(err)?;
        index.write_text(&mut w).map_err(err)?;
        w.flush().map_err(err)?;
    }
    let mut out = Outcome::new(json!({ "rows": rows, "columns": index.len() }));
    out.summary.push(format!(
        "{}({}): {rows} x {} written to {}",
        system_name(flavor, n, &cfg.kset),
        group_label(&cfg.groups[0]),
        index.len(),
        path.display()
    ));
    Ok(out)
}
