"""Batch command-line entry points.

Subcommands: curate, predict, eval, scl-check, serve. Exit codes are part
of the contract: 0 success, 2 schema/input errors, 3 no viable category,
4 backend unavailable.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .backends import HttpBackend, NliBackend, RuleBackend, oracle_from_gold
from .casting import (
    PromptConfig,
    Task,
    predict_ae,
    predict_asc,
    predict_e2e,
    prediction_record,
)
from .corpus import CorpusSchemaError, load_corpus
from .curation import (
    CurationConfig,
    NoViableCategory,
    generate_dataset,
    write_dataset,
)
from .evaluation import (
    EmptyInput,
    LengthMismatch,
    MalformedGold,
    MalformedXml,
    OffsetOutOfRange,
    ae_metrics,
    asc_metrics,
    convert_semeval,
    e2e_metrics,
    load_gold_jsonl,
    write_gold_jsonl,
)
from .labels import BioLabel, E2eLabel, Polarity
from .lexicon import OpinionLexicon, load_seed_aspects
from .nli import BackendUnavailable, MalformedResponse
from .scl import run_self_check
from .text import tokenize

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NO_CATEGORY = 3
EXIT_BACKEND = 4

log = logging.getLogger("corn")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(message)s")
    log.setLevel(logging.INFO)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        log.error("missing file: %s", exc.filename or exc)
        return EXIT_SCHEMA
    except (CorpusSchemaError, MalformedGold, MalformedXml, OffsetOutOfRange,
            LengthMismatch, EmptyInput, json.JSONDecodeError, ValueError,
            KeyError) as exc:
        log.error("input error: %s", exc)
        return EXIT_SCHEMA
    except NoViableCategory as exc:
        log.error("%s", exc)
        return EXIT_NO_CATEGORY
    except (BackendUnavailable, MalformedResponse) as exc:
        log.error("backend error: %s", exc)
        return EXIT_BACKEND


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corn", description=__doc__)
    parser.add_argument("--version", action="version", version=f"corn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curate", help="generate balanced RNLI data from a review corpus")
    p.add_argument("--corpus", required=True, help="annotated corpus JSONL")
    p.add_argument("--seeds", required=True, help="seed aspects JSON {category: [terms]}")
    p.add_argument("--lexicon-pos", required=True, help="positive opinion lexicon file")
    p.add_argument("--lexicon-neg", required=True, help="negative opinion lexicon file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-label-target", type=int, default=100_000)
    p.add_argument("--per-category-cap", type=int, default=50_000)
    p.add_argument("--clause-cap", type=int, default=10)
    p.add_argument("--negation", choices=["on", "off"], default="off")
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("predict", help="run AE/ASC/E2E over a sentence file")
    p.add_argument("--task", required=True, choices=["ae", "asc", "e2e"])
    p.add_argument("--backend", required=True,
                   help="oracle:GOLD.jsonl | http:URL | rule")
    p.add_argument("--input", required=True,
                   help="gold JSONL or {sentence_id, text, aspects} JSONL")
    p.add_argument("--out", required=True)
    p.add_argument("--domain-label", default="The product")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--max-span-len", type=int, default=6)
    p.add_argument("--negation", choices=["on", "off"], default="off")
    p.add_argument("--lexicon-pos", help="rule backend: positive lexicon")
    p.add_argument("--lexicon-neg", help="rule backend: negative lexicon")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score a prediction file against gold")
    p.add_argument("--task", required=True, choices=["ae", "asc", "e2e"])
    p.add_argument("--input", required=True, help="prediction JSONL")
    p.add_argument("--gold", required=True, help="gold JSONL")
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("convert-semeval", help="SemEval aspect-term XML -> gold JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--task", choices=["ae", "asc", "e2e"], default="e2e")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("scl-check", help="run the contrastive-loss property suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batches", type=int, default=50)
    p.set_defaults(func=cmd_scl_check)

    p = sub.add_parser("serve", help="serve the classify protocol over HTTP")
    p.add_argument("--backend", required=True, help="oracle:GOLD.jsonl | rule")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--domain-label", default="The product")
    p.add_argument("--lexicon-pos")
    p.add_argument("--lexicon-neg")
    p.add_argument("--negation", choices=["on", "off"], default="off")
    p.set_defaults(func=cmd_serve)

    return parser


def _load_lexicon(args) -> OpinionLexicon:
    if not args.lexicon_pos or not args.lexicon_neg:
        raise ValueError("the rule backend needs --lexicon-pos and --lexicon-neg")
    return OpinionLexicon.from_files(args.lexicon_pos, args.lexicon_neg)


def _make_backend(args, cfg: PromptConfig) -> NliBackend:
    spec = args.backend
    if spec == "rule":
        return RuleBackend(_load_lexicon(args), cfg, negation=args.negation == "on")
    if spec.startswith("oracle:"):
        return oracle_from_gold(load_gold_jsonl(spec[len("oracle:"):]), cfg)
    if spec.startswith(("http://", "https://")):
        return HttpBackend(spec, batch_size=getattr(args, "batch_size", 32))
    if spec.startswith("http:"):
        return HttpBackend("http://" + spec[len("http:"):],
                           batch_size=getattr(args, "batch_size", 32))
    raise ValueError(f"unknown backend spec {spec!r}")


def cmd_curate(args) -> int:
    lexicon = OpinionLexicon.from_files(args.lexicon_pos, args.lexicon_neg)
    seeds = load_seed_aspects(args.seeds)
    corpus = load_corpus(args.corpus)
    config = CurationConfig(
        per_category_cap=args.per_category_cap,
        clause_cap=args.clause_cap,
        per_label_target=args.per_label_target,
        rng_seed=args.seed,
        negation=args.negation == "on",
    )
    result = generate_dataset(corpus, seeds, lexicon, config)
    paths = write_dataset(result, args.out)
    for label, count in result.stats["per_label"].items():
        log.info("%s: %d", label, count)
    log.info("train/valid/holdout: %(train)d/%(valid)d/%(holdout)d", result.stats["split"])
    log.info("wrote %s", paths["stats"].parent)
    return EXIT_OK


def _load_prediction_inputs(path: str) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    if not records:
        raise ValueError(f"no records in {path}")
    return records


def _record_sentence(record: dict):
    raw = record.get("raw") or record.get("text")
    if not raw and record.get("tokens"):
        raw = " ".join(record["tokens"])
    if not raw:
        raise ValueError(f"record lacks text: {record}")
    return tokenize(raw, sentence_id=str(record.get("sentence_id", "")))


def _record_aspects(record: dict, sentence) -> list[str]:
    aspects = []
    for a in record.get("aspects", []):
        if isinstance(a, str):
            aspects.append(a)
        elif isinstance(a, dict) and "start" in a and "end" in a:
            aspects.append(sentence.slice_text(int(a["start"]), int(a["end"])))
        elif isinstance(a, dict) and "term" in a:
            aspects.append(a["term"])
        else:
            raise ValueError(f"bad aspect entry {a!r}")
    return aspects


def cmd_predict(args) -> int:
    cfg = PromptConfig(domain_label=args.domain_label)
    backend = _make_backend(args, cfg)
    records = _load_prediction_inputs(args.input)
    task = Task(args.task)

    def run_one(record: dict) -> dict:
        sentence = _record_sentence(record)
        if task == Task.ASC:
            aspects = _record_aspects(record, sentence)
            labels, spans = [], []
            for aspect in aspects:
                label, dist = predict_asc(sentence, aspect, backend, cfg)
                labels.append(label)
                spans.append({"aspect": aspect, "score": dist.p_entailment,
                              "label": label.value})
            return prediction_record(sentence, task, labels, spans)
        if task == Task.AE:
            result = predict_ae(sentence, cfg, backend, max_span_len=args.max_span_len)
            spans = [{"start": s.span.start, "end": s.span.end,
                      "score": s.entail_score, "label": "T"} for s in result.kept]
            return prediction_record(sentence, task, result.bio, spans)
        result = predict_e2e(sentence, cfg, backend, max_span_len=args.max_span_len)
        spans = [{"start": s.span.start, "end": s.span.end,
                  "score": s.entail_score, "label": label.value}
                 for s, label in zip(result.kept, result.span_labels)]
        return prediction_record(sentence, task, result.labels, spans)

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            outputs = list(pool.map(run_one, records))
    else:
        outputs = [run_one(r) for r in records]

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        for obj in outputs:
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
    log.info("wrote %d predictions to %s", len(outputs), out_path)
    return EXIT_OK


def cmd_eval(args) -> int:
    gold = load_gold_jsonl(args.gold)
    preds = {str(r["sentence_id"]): r for r in _load_prediction_inputs(args.input)}
    missing = [g.sentence_id for g in gold if g.sentence_id not in preds]
    if missing:
        log.error("predictions missing for sentence ids: %s", ", ".join(missing))
        return EXIT_SCHEMA

    if args.task == "asc":
        pred_labels, gold_labels = [], []
        for g in gold:
            record = preds[g.sentence_id]
            labels = record.get("labels", [])
            if len(labels) != len(g.aspects):
                raise LengthMismatch(
                    f"sentence {g.sentence_id!r}: {len(labels)} predictions "
                    f"for {len(g.aspects)} gold aspects"
                )
            pred_labels.extend(Polarity(l) for l in labels)
            gold_labels.extend(a.polarity for a in g.aspects)
        report = asc_metrics(pred_labels, gold_labels)
    elif args.task == "ae":
        report = ae_metrics(
            [[BioLabel(l) for l in preds[g.sentence_id]["labels"]] for g in gold],
            [list(g.ae_labels) for g in gold],
        )
    else:
        report = e2e_metrics(
            [[E2eLabel(l) for l in preds[g.sentence_id]["labels"]] for g in gold],
            [list(g.e2e_labels) for g in gold],
        )

    print(report.render_table())
    if args.out:
        Path(args.out).write_text(
            json.dumps(report.to_json_obj(), ensure_ascii=False, sort_keys=True, indent=2)
            + "\n",
            encoding="utf-8",
        )
        log.info("wrote %s", args.out)
    return EXIT_OK


def cmd_convert(args) -> int:
    gold, report = convert_semeval(args.input, task=args.task)
    write_gold_jsonl(gold, args.out)
    log.info("converted %d sentences (%d aspect terms, %d snapped, %d conflicts dropped)",
             report.sentences, report.aspect_terms, report.snapped_offsets,
             report.dropped_conflicts)
    return EXIT_OK


def cmd_scl_check(args) -> int:
    ok = run_self_check(seed=args.seed, n_batches=args.batches)
    print("scl-check:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = PromptConfig(domain_label=args.domain_label)
    backend = _make_backend(args, cfg)
    app = create_app(backend, cfg)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
