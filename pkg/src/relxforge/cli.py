"""Command line front end: one subcommand per pipeline stage.

Flag values win over --config file values, which win over built-in
defaults. Every run that has an output directory records the fully
resolved configuration (effective_config.json) and sha256 checksums of
its input files (run_manifest.json) so results can be traced back.

Exit codes: 0 success, 2 bad configuration, 3 unreadable or unwritable
files, 4 a pipeline stage failed on valid inputs.
"""

from __future__ import annotations

import argparse
import json
import hashlib
import sys
from pathlib import Path

from .corpus import (
    ExtractStats,
    SitelinkTable,
    TripleStore,
    extract_records,
    iter_dump_pages,
    link_sentences,
    load_relation_config,
    merge_relations,
    read_instances_jsonl,
    read_records_jsonl,
    write_jsonl,
)
from .model import EncoderModel, ModelConfig, load_model, save_model
from .pairs import BlankPolicy, generate_pairs, read_pairs
from .seeding import default_seed
from .text import Vocab, train_vocab
from .training import (
    RelationSchema,
    curve_to_tsv,
    evaluate_f1,
    finetune,
    kbp37_schema,
    learning_curve,
    load_kbp37,
    pretrain,
    randomization_test,
    resume_pretrain,
    save_kbp37,
    select_subset,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_STAGE = 4

EFFECTIVE_CONFIG_NAME = "effective_config.json"
RUN_MANIFEST_NAME = "run_manifest.json"

_REQUIRED = "<required>"


class ConfigError(Exception):
    """Bad flags, bad config file, or inconsistent settings."""


class _Parser(argparse.ArgumentParser):
    # argparse wants to sys.exit on bad flags; surface them as config
    # errors instead so main() can emit structured output.
    def error(self, message):
        raise ConfigError(message)


def _opt(name: str, default, help_text: str, *, type=str, multi: bool = False, input_path: bool = False) -> dict:
    return {
        "name": name,
        "default": default,
        "help": help_text,
        "type": type,
        "multi": multi,
        "input": input_path,
    }


# One spec per subcommand. "default" _REQUIRED means the key must come
# from a flag or the config file; None means optional with no value.
_SPECS: dict = {
    "extract": {
        "help": "parse a wiki dump into entity-resolved sentence records",
        "options": [
            _opt("dump", _REQUIRED, "wiki dump file or directory of .txt page files", input_path=True),
            _opt("sitelinks", _REQUIRED, "TSV of lang<TAB>title<TAB>qid", input_path=True),
            _opt("lang", _REQUIRED, "language code of the dump"),
            _opt("out-dir", _REQUIRED, "directory for records.jsonl and stats.json"),
            _opt("min-len", 5, "drop sentences shorter than this many code points", type=int),
            _opt("workers", 1, "parallel parser processes", type=int),
        ],
    },
    "link": {
        "help": "join sentence records against a triple store",
        "options": [
            _opt("records", _REQUIRED, "records.jsonl from extract", input_path=True),
            _opt("triples", _REQUIRED, "TSV of subject<TAB>pid<TAB>object", input_path=True),
            _opt("relations", None, "relation config JSON (default: packaged set)", input_path=True),
            _opt("out-dir", _REQUIRED, "directory for instances.jsonl"),
        ],
    },
    "pairs": {
        "help": "draw blanked cross-lingual sentence pairs from instances",
        "options": [
            _opt("instances", _REQUIRED, "instances.jsonl file or directory of them", input_path=True),
            _opt("out-dir", _REQUIRED, "directory for pair shards and manifest"),
            _opt("count", 1000, "number of pairs to draw", type=int),
            _opt("seed", None, "RNG seed; unset uses RELXFORGE_SEED or 20840", type=int),
            _opt("anchor-lang", "en", "language every pair is anchored to"),
            _opt("blank-prob", 0.7, "per-mention blanking probability", type=float),
            _opt("shards", 1, "number of output shard files", type=int),
            _opt("workers", 1, "parallel shard writers", type=int),
            _opt("allow-anchor-pairs", False, "also pair anchor sentences with each other", type=bool),
        ],
    },
    "pretrain": {
        "help": "train an encoder on pair matching plus masked tokens",
        "options": [
            _opt("pairs", _REQUIRED, "pair shard file or directory from the pairs stage", input_path=True),
            _opt("out-dir", _REQUIRED, "directory for checkpoints, vocab, and logs"),
            _opt("steps", 1000, "optimizer steps", type=int),
            _opt("batch-size", 32, "pairs per step", type=int),
            _opt("lr", 1e-4, "Adam learning rate", type=float),
            _opt("weight-decay", 0.01, "decoupled weight decay", type=float),
            _opt("seed", None, "RNG seed; unset uses RELXFORGE_SEED or 20840", type=int),
            _opt("checkpoint-every", 0, "save every N steps (0: only final)", type=int),
            _opt("resume", None, "checkpoint to continue from", input_path=True),
            _opt("vocab", None, "existing vocab file (default: train one from the pairs)", input_path=True),
            _opt("vocab-size", 8000, "target size when training a vocab", type=int),
            _opt("layers", 4, "encoder blocks", type=int),
            _opt("hidden", 128, "model width", type=int),
            _opt("heads", 4, "attention heads", type=int),
            _opt("ff", 512, "feed-forward width", type=int),
            _opt("max-positions", 128, "longest input in tokens", type=int),
            _opt("num-classes", 37, "classifier head width carried in the checkpoint", type=int),
        ],
    },
    "finetune": {
        "help": "fit the relation classifier head on labeled sentences",
        "options": [
            _opt("train", _REQUIRED, "training set, two-line format", input_path=True),
            _opt("dev", _REQUIRED, "development set for model selection", input_path=True),
            _opt("vocab", _REQUIRED, "vocab file matching the encoder", input_path=True),
            _opt("out-dir", _REQUIRED, "directory for best.rlxf and history.json"),
            _opt("init", None, "pretrained checkpoint to start from", input_path=True),
            _opt("schema", None, "schema JSON (default: the 37-class KBP-37 layout)", input_path=True),
            _opt("epochs", 10, "passes over the training set", type=int),
            _opt("lr", 3e-5, "AdamW learning rate", type=float),
            _opt("weight-decay", 0.1, "decoupled weight decay", type=float),
            _opt("batch-size", 64, "examples per step", type=int),
            _opt("seed", None, "RNG seed; unset uses RELXFORGE_SEED or 20840", type=int),
            _opt("layers", 4, "encoder blocks (fresh model only)", type=int),
            _opt("hidden", 128, "model width (fresh model only)", type=int),
            _opt("heads", 4, "attention heads (fresh model only)", type=int),
            _opt("ff", 512, "feed-forward width (fresh model only)", type=int),
            _opt("max-positions", 128, "longest input in tokens (fresh model only)", type=int),
        ],
    },
    "evaluate": {
        "help": "score predictions with directional macro-F1",
        "options": [
            _opt("gold", _REQUIRED, "gold labels, one per line (id or label string)", input_path=True),
            _opt("pred", _REQUIRED, "predicted labels, one per line", input_path=True),
            _opt("schema", None, "schema JSON (default: the 37-class KBP-37 layout)", input_path=True),
            _opt("out-dir", None, "also write report.json here"),
        ],
    },
    "sigtest": {
        "help": "approximate randomization test between two prediction files",
        "options": [
            _opt("gold", _REQUIRED, "gold labels, one per line", input_path=True),
            _opt("pred-a", _REQUIRED, "first system's predictions", input_path=True),
            _opt("pred-b", _REQUIRED, "second system's predictions", input_path=True),
            _opt("schema", None, "schema JSON (default: the 37-class KBP-37 layout)", input_path=True),
            _opt("iterations", 10000, "permutation count", type=int),
            _opt("seed", None, "RNG seed; unset uses RELXFORGE_SEED or 20840", type=int),
            _opt("out-dir", None, "also write sigtest.json here"),
        ],
    },
    "subset": {
        "help": "pick a small stratified, length-matched evaluation subset",
        "options": [
            _opt("data", _REQUIRED, "dataset, two-line format", input_path=True),
            _opt("out-dir", _REQUIRED, "directory for subset.txt"),
            _opt("schema", None, "schema JSON (default: the 37-class KBP-37 layout)", input_path=True),
            _opt("size", 502, "examples to keep", type=int),
            _opt("trials", 10000, "candidate draws to score", type=int),
            _opt("seed", None, "RNG seed; unset uses RELXFORGE_SEED or 20840", type=int),
        ],
    },
    "curve": {
        "help": "macro-F1 as a function of training-set fraction",
        "options": [
            _opt("train", _REQUIRED, "training set, two-line format", input_path=True),
            _opt("dev", _REQUIRED, "development set for model selection", input_path=True),
            _opt("vocab", _REQUIRED, "vocab file matching the encoder", input_path=True),
            _opt("out-dir", _REQUIRED, "directory for curve.tsv"),
            _opt("eval", [], "held-out set as lang=path (repeatable)", multi=True, input_path=True),
            _opt("init", None, "pretrained checkpoint to start every run from", input_path=True),
            _opt("schema", None, "schema JSON (default: the 37-class KBP-37 layout)", input_path=True),
            _opt("fractions", "0.1,0.5,1.0", "comma-separated training fractions"),
            _opt("seeds", "1,2,3", "comma-separated seeds, one run each"),
            _opt("epochs", 10, "passes over each training subset", type=int),
            _opt("lr", 3e-5, "AdamW learning rate", type=float),
            _opt("weight-decay", 0.1, "decoupled weight decay", type=float),
            _opt("batch-size", 64, "examples per step", type=int),
            _opt("layers", 4, "encoder blocks (fresh model only)", type=int),
            _opt("hidden", 128, "model width (fresh model only)", type=int),
            _opt("heads", 4, "attention heads (fresh model only)", type=int),
            _opt("ff", 512, "feed-forward width (fresh model only)", type=int),
            _opt("max-positions", 128, "longest input in tokens (fresh model only)", type=int),
        ],
    },
}


def build_parser() -> _Parser:
    parser = _Parser(prog="relxforge", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", metavar="command")
    for command, spec in _SPECS.items():
        sub = subs.add_parser(command, help=spec["help"], description=spec["help"])
        sub.add_argument("--config", default=None, help="JSON file of option values (flags win)")
        for opt in spec["options"]:
            flag = "--" + opt["name"]
            shown = "required" if opt["default"] is _REQUIRED else f"default: {opt['default']}"
            kwargs = {"help": f"{opt['help']} ({shown})", "default": argparse.SUPPRESS}
            if opt["multi"]:
                kwargs["action"] = "append"
            elif opt["type"] is bool:
                kwargs["action"] = "store_true"
            else:
                kwargs["type"] = opt["type"]
            sub.add_argument(flag, **kwargs)
    return parser


def _dest(name: str) -> str:
    return name.replace("-", "_")


def _load_config_file(path: str) -> dict:
    try:
        loaded = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(loaded, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return loaded


def resolve_config(command: str, flag_values: dict, config_path: str | None) -> dict:
    """Materialize every option: defaults, then config file, then flags."""
    spec = _SPECS[command]
    effective = {_dest(o["name"]): o["default"] for o in spec["options"]}
    if config_path is not None:
        loaded = _load_config_file(config_path)
        unknown = sorted(set(loaded) - set(effective))
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
        effective.update(loaded)
    effective.update(flag_values)
    missing = sorted(k for k, v in effective.items() if v is _REQUIRED)
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise ConfigError(f"missing required options for {command}: {flags}")
    if "seed" in effective and effective["seed"] is None:
        effective["seed"] = default_seed()
    return effective


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _input_files(cfg: dict, spec: dict) -> list:
    paths = []
    for opt in spec["options"]:
        if not opt["input"]:
            continue
        value = cfg[_dest(opt["name"])]
        if value in (None, []):
            continue
        entries = value if isinstance(value, list) else [value]
        for entry in entries:
            # repeatable eval sets arrive as lang=path
            raw = entry.split("=", 1)[1] if opt["multi"] and "=" in entry else entry
            path = Path(raw)
            if path.is_dir():
                paths.extend(sorted(p for p in path.rglob("*") if p.is_file()))
            else:
                paths.append(path)
    return paths


def write_run_artifacts(out_dir: Path, command: str, cfg: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    effective = {"command": command, **cfg}
    (out_dir / EFFECTIVE_CONFIG_NAME).write_text(
        json.dumps(effective, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    inputs = {str(p): _sha256_file(p) for p in _input_files(cfg, _SPECS[command])}
    manifest = {"command": command, "inputs": inputs}
    (out_dir / RUN_MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _load_schema(path) -> RelationSchema:
    if path is None:
        return kbp37_schema()
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"schema file {path} is not valid JSON: {exc}") from None
    if not isinstance(payload, dict) or "relations" not in payload:
        raise ConfigError(f"schema file {path} must hold {{\"relations\": [...]}}")
    return RelationSchema(tuple(payload["relations"]))


def _read_label_file(path, schema: RelationSchema) -> list:
    """One class per line, as an integer id or a directional label."""
    labels = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.lstrip("-").isdigit():
            value = int(line)
            if not 0 <= value < schema.num_classes:
                raise ValueError(f"{path}:{lineno}: class id {value} out of range")
        else:
            try:
                value = schema.class_id(line)
            except KeyError:
                raise ValueError(f"{path}:{lineno}: unknown label {line!r}") from None
        labels.append(value)
    return labels


def _print_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_vocab(path) -> Vocab:
    return Vocab.load(path)


def _fresh_model(cfg: dict, vocab: Vocab, num_classes: int, seed: int) -> EncoderModel:
    config = ModelConfig(
        vocab_size=len(vocab),
        layers=cfg["layers"],
        hidden=cfg["hidden"],
        heads=cfg["heads"],
        ff=cfg["ff"],
        max_positions=cfg["max_positions"],
        num_classes=num_classes,
    )
    return EncoderModel(config, seed=seed)


def _cmd_extract(cfg: dict) -> dict:
    out_dir = Path(cfg["out_dir"])
    write_run_artifacts(out_dir, "extract", cfg)
    with open(cfg["sitelinks"], encoding="utf-8") as fh:
        table = SitelinkTable.from_tsv(fh)
    stats = ExtractStats()
    records = extract_records(
        iter_dump_pages(Path(cfg["dump"])),
        cfg["lang"],
        table,
        stats,
        workers=cfg["workers"],
        min_len=cfg["min_len"],
    )
    with open(out_dir / "records.jsonl", "w", encoding="utf-8") as fh:
        written = write_jsonl(records, fh)
    summary = {"records": written, **stats.to_json_dict()}
    (out_dir / "stats.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary


def _cmd_link(cfg: dict) -> dict:
    out_dir = Path(cfg["out_dir"])
    write_run_artifacts(out_dir, "link", cfg)
    relations, merge_map = load_relation_config(
        Path(cfg["relations"]) if cfg["relations"] else None
    )
    with open(cfg["triples"], encoding="utf-8") as fh:
        store = TripleStore.from_tsv(fh)
    store = merge_relations(store, merge_map)
    allowed = frozenset(relations.values())
    with open(cfg["records"], encoding="utf-8") as records_fh:
        with open(out_dir / "instances.jsonl", "w", encoding="utf-8") as out_fh:
            written = write_jsonl(
                link_sentences(read_records_jsonl(records_fh), store, allowed), out_fh
            )
    summary = {"instances": written, "relations": len(relations)}
    (out_dir / "stats.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary


def _cmd_pairs(cfg: dict) -> dict:
    out_dir = Path(cfg["out_dir"])
    write_run_artifacts(out_dir, "pairs", cfg)
    instances_path = Path(cfg["instances"])
    if instances_path.is_dir():
        files = sorted(instances_path.glob("*.jsonl"))
    else:
        files = [instances_path]
    instances = []
    for path in files:
        with open(path, encoding="utf-8") as fh:
            instances.extend(read_instances_jsonl(fh))
    manifest = generate_pairs(
        instances,
        cfg["count"],
        out_dir,
        seed=cfg["seed"],
        policy=BlankPolicy(probability=cfg["blank_prob"]),
        anchor_lang=cfg["anchor_lang"],
        shards=cfg["shards"],
        workers=cfg["workers"],
        allow_anchor_pairs=cfg["allow_anchor_pairs"],
    )
    return {
        "pairs": manifest["pairs_emitted"],
        "positive_fraction": manifest["positive_fraction"],
        "blank_rate": manifest["blank"]["rate"],
        "out_dir": str(out_dir),
    }


def _cmd_pretrain(cfg: dict) -> dict:
    if cfg["resume"] and cfg["vocab"] is None:
        raise ConfigError("--resume needs --vocab (the file saved with the original run)")
    out_dir = Path(cfg["out_dir"])
    write_run_artifacts(out_dir, "pretrain", cfg)
    pair_dicts = list(read_pairs(cfg["pairs"]))
    log_path = out_dir / "metrics.jsonl"
    if cfg["resume"]:
        vocab = _load_vocab(cfg["vocab"])
        result = resume_pretrain(
            cfg["resume"],
            pair_dicts,
            vocab,
            steps=cfg["steps"],
            checkpoint_dir=out_dir,
            checkpoint_every=cfg["checkpoint_every"],
            log_path=log_path,
        )
    else:
        if cfg["vocab"] is not None:
            vocab = _load_vocab(cfg["vocab"])
        else:
            texts = [p["a"]["text"] for p in pair_dicts] + [p["b"]["text"] for p in pair_dicts]
            vocab = train_vocab(texts, cfg["vocab_size"])
        vocab.save(out_dir / "vocab.txt")
        model = _fresh_model(cfg, vocab, cfg["num_classes"], cfg["seed"])
        result = pretrain(
            model,
            pair_dicts,
            vocab,
            steps=cfg["steps"],
            batch_size=cfg["batch_size"],
            lr=cfg["lr"],
            weight_decay=cfg["weight_decay"],
            seed=cfg["seed"],
            checkpoint_dir=out_dir,
            checkpoint_every=cfg["checkpoint_every"],
            log_path=log_path,
        )
    last = result.history[-1] if result.history else {}
    return {
        "steps_done": result.steps_done,
        "final_checkpoint": str(result.final_path),
        "last": last,
    }


def _cmd_finetune(cfg: dict) -> dict:
    out_dir = Path(cfg["out_dir"])
    write_run_artifacts(out_dir, "finetune", cfg)
    schema = _load_schema(cfg["schema"])
    train_set = load_kbp37(cfg["train"], schema, split="train")
    dev_set = load_kbp37(cfg["dev"], schema, split="dev")
    vocab = _load_vocab(cfg["vocab"])
    if cfg["init"]:
        model, _, _ = load_model(cfg["init"])
    else:
        model = _fresh_model(cfg, vocab, schema.num_classes, cfg["seed"])
    result = finetune(
        model,
        train_set,
        dev_set,
        vocab,
        epochs=cfg["epochs"],
        lr=cfg["lr"],
        weight_decay=cfg["weight_decay"],
        batch_size=cfg["batch_size"],
        seed=cfg["seed"],
    )
    save_model(
        result.model,
        out_dir / "best.rlxf",
        meta={"best_epoch": result.best_epoch, "best_macro_f1": result.best_macro_f1},
    )
    (out_dir / "history.json").write_text(
        json.dumps(result.history, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return {
        "best_epoch": result.best_epoch,
        "best_macro_f1": round(result.best_macro_f1, 4),
        "model": str(out_dir / "best.rlxf"),
    }


def _cmd_evaluate(cfg: dict) -> dict:
    schema = _load_schema(cfg["schema"])
    gold = _read_label_file(cfg["gold"], schema)
    pred = _read_label_file(cfg["pred"], schema)
    report = evaluate_f1(gold, pred, schema)
    payload = report.to_json_dict()
    if cfg["out_dir"]:
        out_dir = Path(cfg["out_dir"])
        write_run_artifacts(out_dir, "evaluate", cfg)
        (out_dir / "report.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return payload


def _cmd_sigtest(cfg: dict) -> dict:
    schema = _load_schema(cfg["schema"])
    gold = _read_label_file(cfg["gold"], schema)
    pred_a = _read_label_file(cfg["pred_a"], schema)
    pred_b = _read_label_file(cfg["pred_b"], schema)
    p_value = randomization_test(
        pred_a, pred_b, gold, schema, iterations=cfg["iterations"], seed=cfg["seed"]
    )
    macro_a = evaluate_f1(gold, pred_a, schema).macro_f1
    macro_b = evaluate_f1(gold, pred_b, schema).macro_f1
    payload = {
        "p_value": p_value,
        "macro_f1_a": macro_a,
        "macro_f1_b": macro_b,
        "observed_difference": abs(macro_a - macro_b),
        "iterations": cfg["iterations"],
    }
    if cfg["out_dir"]:
        out_dir = Path(cfg["out_dir"])
        write_run_artifacts(out_dir, "sigtest", cfg)
        (out_dir / "sigtest.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return payload


def _cmd_subset(cfg: dict) -> dict:
    out_dir = Path(cfg["out_dir"])
    write_run_artifacts(out_dir, "subset", cfg)
    schema = _load_schema(cfg["schema"])
    dataset = load_kbp37(cfg["data"], schema, split="test")
    subset = select_subset(dataset, size=cfg["size"], trials=cfg["trials"], seed=cfg["seed"])
    save_kbp37(subset, out_dir / "subset.txt")
    return {
        "size": len(subset),
        "out": str(out_dir / "subset.txt"),
        "class_counts": {str(k): v for k, v in sorted(subset.class_counts().items())},
    }


def _cmd_curve(cfg: dict) -> dict:
    out_dir = Path(cfg["out_dir"])
    write_run_artifacts(out_dir, "curve", cfg)
    schema = _load_schema(cfg["schema"])
    train_set = load_kbp37(cfg["train"], schema, split="train")
    dev_set = load_kbp37(cfg["dev"], schema, split="dev")
    vocab = _load_vocab(cfg["vocab"])
    eval_sets = {}
    for entry in cfg["eval"]:
        if "=" not in entry:
            raise ConfigError(f"--eval takes lang=path, got {entry!r}")
        lang, _, path = entry.partition("=")
        eval_sets[lang] = load_kbp37(path, schema, split="test", lang=lang)
    try:
        fractions = [float(f) for f in str(cfg["fractions"]).split(",") if f != ""]
        seeds = [int(s) for s in str(cfg["seeds"]).split(",") if s != ""]
    except ValueError as exc:
        raise ConfigError(f"bad --fractions or --seeds: {exc}") from None
    if not fractions or not seeds:
        raise ConfigError("--fractions and --seeds must be non-empty")

    if cfg["init"]:
        def model_factory(seed: int) -> EncoderModel:
            model, _, _ = load_model(cfg["init"])
            return model
    else:
        def model_factory(seed: int) -> EncoderModel:
            return _fresh_model(cfg, vocab, schema.num_classes, seed)

    rows = learning_curve(
        model_factory,
        train_set,
        dev_set,
        eval_sets,
        vocab,
        fractions=fractions,
        seeds=seeds,
        epochs=cfg["epochs"],
        lr=cfg["lr"],
        weight_decay=cfg["weight_decay"],
        batch_size=cfg["batch_size"],
    )
    tsv = curve_to_tsv(rows)
    (out_dir / "curve.tsv").write_text(tsv, encoding="utf-8")
    sys.stdout.write(tsv)
    return {"rows": len(rows), "out": str(out_dir / "curve.tsv")}


_HANDLERS = {
    "extract": _cmd_extract,
    "link": _cmd_link,
    "pairs": _cmd_pairs,
    "pretrain": _cmd_pretrain,
    "finetune": _cmd_finetune,
    "evaluate": _cmd_evaluate,
    "sigtest": _cmd_sigtest,
    "subset": _cmd_subset,
    "curve": _cmd_curve,
}

# stages whose handler prints its JSON result (reports, not run logs)
_PRINT_RESULT = {"extract", "link", "pairs", "pretrain", "finetune", "evaluate", "sigtest", "subset"}


def _emit_error(kind: str, exc: BaseException) -> None:
    payload = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        _emit_error("config", exc)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG

    flag_values = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        cfg = resolve_config(args.command, flag_values, args.config)
        result = _HANDLERS[args.command](cfg)
    except ConfigError as exc:
        _emit_error("config", exc)
        return EXIT_CONFIG
    except OSError as exc:
        _emit_error("io", exc)
        return EXIT_IO
    except Exception as exc:
        _emit_error("stage", exc)
        return EXIT_STAGE
    if args.command in _PRINT_RESULT:
        _print_json(result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
