//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::Path;

use lekb_core::entity::validate_raw_entity;
use lekb_core::eval::evaluate;
use lekb_core::pipeline::{build_kb, legal_entity_sim, PipelineError};
use lekb_core::synth::{derive_seed, gen_corpus, gen_ground_truth, uniform_sizes};
use lekb_core::text::{jaccard_index, normalize_text, sequence_matcher_ratio};
use lekb_core::{KnowledgeBase, PipelineConfig, RawLegalEntity, Role, SimMode, UncheckedRecord};

use crate::config::{self, ConfigEcho, Resolved};
use crate::error::CliError;
use crate::formats::{
    kb_to_wire, read_corpus, read_kb_file, render_table, report_to_wire, write_json_file,
    write_jsonl_file, CorpusLineIn, CorpusLineOut, ProvenanceLine,
};
use crate::args::{BuildArgs, EvalArgs, SimArgs, SynthArgs};

fn pipeline_error(error: PipelineError) -> CliError {
    match error {
        PipelineError::InvalidConfig(_) => CliError::validation("invalid_config", error.to_string()),
        PipelineError::Ap(_) => CliError::internal(error),
    }
}

pub fn build(args: &BuildArgs) -> Result<(), CliError> {
    let resolved = config::resolve(args.config.as_deref(), &args.overrides())?;
    let entities = read_corpus(&args.input)?;
    let kb = build_kb(&entities, &resolved.pipeline).map_err(pipeline_error)?;
    let wire = kb_to_wire(&kb, &ConfigEcho::of(&resolved))?;
    write_json_file(&args.output, &wire)?;
    println!(
        "wrote {}: {} entities, {} clusters dropped",
        args.output.display(),
        kb.records.len(),
        kb.dropped_clusters.values().sum::<usize>()
    );
    Ok(())
}

fn parse_sizes_spec(spec: &str, n: usize, seed: u64) -> Result<Vec<usize>, CliError> {
    let invalid = |detail: String| CliError::validation("invalid_flag", detail);
    let parse_count = |raw: &str| -> Result<usize, CliError> {
        let v: usize = raw
            .parse()
            .map_err(|_| invalid(format!("--sizes: {raw:?} is not a count")))?;
        if v == 0 {
            return Err(invalid("--sizes: counts must be at least 1".into()));
        }
        Ok(v)
    };
    if let Some(range) = spec.strip_prefix("uniform:") {
        let (lo, hi) = range
            .split_once("..")
            .ok_or_else(|| invalid(format!("--sizes: expected uniform:LO..HI, got {spec:?}")))?;
        let lo = parse_count(lo)?;
        let hi = parse_count(hi)?;
        if hi < lo {
            return Err(invalid(format!("--sizes: empty range {lo}..{hi}")));
        }
        Ok(uniform_sizes(n, lo, hi, seed))
    } else if let Some(value) = spec.strip_prefix("fixed:") {
        Ok(vec![parse_count(value)?; n])
    } else if let Some(list) = spec.strip_prefix("list:") {
        let sizes: Vec<usize> = list
            .split(',')
            .map(parse_count)
            .collect::<Result<_, _>>()?;
        if sizes.len() != n {
            return Err(invalid(format!(
                "--sizes: list has {} entries for {} entities",
                sizes.len(),
                n
            )));
        }
        Ok(sizes)
    } else {
        Err(invalid(format!(
            "--sizes: expected uniform:LO..HI, fixed:K or list:..., got {spec:?}"
        )))
    }
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::validation(
            "invalid_flag",
            "--n must be at least 1",
        ));
    }
    let resolved = config::resolve(args.config.as_deref(), &args.overrides())?;
    let seed = resolved.pipeline.seed;

    let truth = gen_ground_truth(args.n, derive_seed(seed, "synth.truth"));
    let sizes = parse_sizes_spec(&args.sizes, args.n, derive_seed(seed, "synth.sizes"))?;
    let (corpus, provenance) = gen_corpus(
        &truth,
        &sizes,
        &resolved.noise,
        derive_seed(seed, "synth.corpus"),
    )
    .map_err(|e| CliError::validation("invalid_flag", e.to_string()))?;

    std::fs::create_dir_all(&args.output)
        .map_err(|e| CliError::internal(format!("{}: {e}", args.output.display())))?;
    let corpus_path = args.output.join("corpus.jsonl");
    let truth_path = args.output.join("truth.json");
    let provenance_path = args.output.join("provenance.jsonl");

    let lines: Vec<CorpusLineOut<'_>> = corpus.iter().map(CorpusLineOut::of).collect();
    write_jsonl_file(&corpus_path, &lines)?;
    let truth_wire = kb_to_wire(&truth, &ConfigEcho::of(&resolved))?;
    write_json_file(&truth_path, &truth_wire)?;
    let provenance_lines: Vec<ProvenanceLine> = provenance
        .iter()
        .map(|(member, entity_id)| ProvenanceLine {
            doc_id: member.doc_id.clone(),
            local_id: member.local_id.clone(),
            entity_id: entity_id.clone(),
        })
        .collect();
    write_jsonl_file(&provenance_path, &provenance_lines)?;

    println!(
        "wrote {}: {} observations of {} entities",
        args.output.display(),
        corpus.len(),
        truth.records.len()
    );
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<(), CliError> {
    let kb = KnowledgeBase {
        records: read_kb_file(&args.kb)?,
        config: PipelineConfig::default(),
        dropped_clusters: BTreeMap::new(),
    };
    let truth = KnowledgeBase {
        records: read_kb_file(&args.truth)?,
        config: PipelineConfig::default(),
        dropped_clusters: BTreeMap::new(),
    };
    let report = evaluate(&kb, &truth);
    write_json_file(&args.output, &report_to_wire(&report))?;
    print!("{}", render_table(&report));
    Ok(())
}

fn read_entity_file(path: &Path) -> Result<RawLegalEntity, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation("missing_file", format!("{}: {e}", path.display())))?;
    let parsed: CorpusLineIn = serde_json::from_str(&text)
        .map_err(|e| CliError::validation("malformed_line", format!("{}: {e}", path.display())))?;
    let record = UncheckedRecord {
        doc_id: parsed.doc_id,
        local_id: parsed.local_id,
        fields: parsed.fields.0,
    };
    let (entity, _warnings) = validate_raw_entity(&record).map_err(|e| {
        CliError::validation("invalid_entity", format!("{}: {e}", path.display()))
    })?;
    Ok(entity)
}

pub fn sim(args: &SimArgs) -> Result<(), CliError> {
    match (&args.entity_a, &args.entity_b) {
        (Some(a), Some(b)) => sim_entities(a, b, args),
        (None, None) => sim_values(args),
        _ => Err(CliError::validation(
            "invalid_flag",
            "--entity-a and --entity-b must be given together",
        )),
    }
}

fn sim_values(args: &SimArgs) -> Result<(), CliError> {
    let role_name = args.role.as_deref().ok_or_else(|| {
        CliError::validation("invalid_flag", "--role is required when comparing values")
    })?;
    let role = Role::parse(role_name).ok_or_else(|| {
        CliError::validation("unknown_role", format!("unknown role {role_name:?}"))
    })?;
    let [a, b] = args.values.as_slice() else {
        return Err(CliError::validation(
            "invalid_flag",
            format!("expected exactly two values, got {}", args.values.len()),
        ));
    };
    let na = normalize_text(a, role);
    let nb = normalize_text(b, role);
    let char_level = sequence_matcher_ratio(&na.text, &nb.text);
    let token_level = jaccard_index(&na.tokens, &nb.tokens);
    println!("sequence_matcher = {char_level}");
    println!("jaccard_index = {token_level}");
    println!("basic_entity_sim = {}", char_level.max(token_level));
    Ok(())
}

fn sim_entities(a: &Path, b: &Path, args: &SimArgs) -> Result<(), CliError> {
    let resolved: Resolved = config::resolve(args.config.as_deref(), &args.overrides())?;
    let ga = read_entity_file(a)?;
    let gb = read_entity_file(b)?;
    let weights = &resolved.pipeline.weights;
    for role in Role::ALL {
        let (Some(va), Some(vb)) = (ga.get(role), gb.get(role)) else {
            continue;
        };
        let na = normalize_text(va, role);
        let nb = normalize_text(vb, role);
        let sim = sequence_matcher_ratio(&na.text, &nb.text).max(jaccard_index(&na.tokens, &nb.tokens));
        let weight = weights.get(role);
        println!(
            "{role}: basic_entity_sim = {sim}, weight = {weight}, contribution = {}",
            weight * sim
        );
    }
    println!(
        "legal_entity_sim raw_sum = {}",
        legal_entity_sim(&ga, &gb, weights, SimMode::RawSum)
    );
    println!(
        "legal_entity_sim renormalized = {}",
        legal_entity_sim(&ga, &gb, weights, SimMode::Renormalized)
    );
    Ok(())
}
