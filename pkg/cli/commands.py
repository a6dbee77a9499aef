"""
命令行子命令
synth / train / group / eval / abstract / render / import-quickdraw
返回码: 0 成功，1 用法或配置错误，2 数据错误，3 运行时错误
"""

import argparse
import json
import sys
from dataclasses import dataclass, fields
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from abstraction import read_pgm, synthesize
from config.loader import load_config_file, resolve_options
from config.settings import (ABSTRACTION_SETTINGS, EVAL_SETTINGS, LOG_CONFIG, MODEL_CONFIG,
                             SKETCH_SETTINGS, TRAIN_CONFIG)
from grouper_model import HyperParams
from grouping_inference import group
from metrics import evaluate
from shared.errors import (DATA_ERRORS, ConfigurationError, EmptyInputError, GrouperError,
                           ValidationError)
from shared.io_utils import atomic_write_text
from shared.logger import get_logger, setup_logging
from stroke_core import (GroupLabels, gen_dataset, read_stroke3, serialize_stroke3,
                         split_by_category)
from trainer import TrainConfig, fit, load_checkpoint
from .quickdraw import parse_quickdraw
from .render import render_svg

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


@dataclass
class CommandResult:
    """子命令结果：返回码、失败诊断和标准输出文本"""
    exit_code: int = EXIT_OK
    message: str = ""
    output: str = ""


class _ArgumentParser(argparse.ArgumentParser):
    """用法错误抛出异常而不是直接退出"""

    def error(self, message):
        raise ConfigurationError(f"{self.prog}: {message}")


def _csv(kind: Callable[[str], Any]) -> Callable[[str], List[Any]]:
    def parse(text: str) -> List[Any]:
        items = [item for item in text.replace(" ", ",").split(",") if item]
        try:
            return [kind(item) for item in items]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}")
    return parse


def _options(args: argparse.Namespace, defaults: Dict[str, Any]) -> Dict[str, Any]:
    """命令行参数 > 配置文件 > 默认值"""
    file_values = load_config_file(args.config) if args.config else {}
    flags = {key: getattr(args, key) for key in defaults if hasattr(args, key)}
    return resolve_options(defaults, file_values, flags)


def _labeled(records, what: str) -> List[GroupLabels]:
    labels = [r[1] for r in records]
    missing = [i for i, l in enumerate(labels) if l is None]
    if missing:
        raise ValidationError(f"{what}: sketch {missing[0]} has no group labels")
    return labels


# ---------------------------------------------------------------- synth

def cmd_synth(args: argparse.Namespace) -> CommandResult:
    if args.count < 0:
        raise ConfigurationError(f"--count must be >= 0, got {args.count}")
    rng = np.random.default_rng(args.seed)
    records = gen_dataset(args.count, args.categories, args.jitter, rng)
    atomic_write_text(args.out, serialize_stroke3(records))
    return CommandResult(output=f"wrote {len(records)} sketches to {args.out}\n")


# ---------------------------------------------------------------- train

def cmd_train(args: argparse.Namespace) -> CommandResult:
    options = _options(args, {**MODEL_CONFIG["grouper"], **TRAIN_CONFIG})
    hyper = HyperParams.from_dict({f.name: options[f.name] for f in fields(HyperParams)})
    config = TrainConfig.from_dict({f.name: options[f.name] for f in fields(TrainConfig)})

    records = read_stroke3(args.data, hyper.max_segments)
    if args.exclude_categories:
        records, held_out = split_by_category(records, args.exclude_categories)
        logger.info(f"excluding {len(held_out)} sketches of categories {args.exclude_categories}")
    _labeled(records, args.data)
    validation = None
    if args.val:
        validation = read_stroke3(args.val, hyper.max_segments)
        _labeled(validation, args.val)

    def report(step: int, summary: Dict[str, float]) -> None:
        logger.info(f"validation step {step}: voi {summary['voi']:.4f} pri {summary['pri']:.4f} "
                    f"sc {summary['sc']:.4f}")

    metrics_path = args.metrics or args.out + ".metrics"
    atomic_write_text(metrics_path, "")
    result = fit(records, config, hyper, checkpoint_path=args.out, metrics_path=metrics_path,
                 validation=validation, on_checkpoint=report)
    final = result.history["loss"].iloc[-1] if len(result.history) else float("nan")
    return CommandResult(output=f"trained {config.iters} iterations on {len(records)} sketches; "
                                f"final loss {final:.4f}; checkpoint {args.out}\n")


# ---------------------------------------------------------------- group

def cmd_group(args: argparse.Namespace) -> CommandResult:
    model = load_checkpoint(args.model)
    records = read_stroke3(args.input, model.hyper.max_segments)
    outputs, matrices = [], []
    for sketch, _ in records:
        labels, affinity = group(sketch, model)
        outputs.append((sketch, labels))
        matrices.append(affinity.values)
    atomic_write_text(args.out, serialize_stroke3(outputs))
    if args.dump_affinity:
        lines = [json.dumps({"index": i, "affinity": np.round(m, 6).tolist()})
                 for i, m in enumerate(matrices)]
        atomic_write_text(args.dump_affinity, "".join(line + "\n" for line in lines))
    return CommandResult(output=f"grouped {len(outputs)} sketches into {args.out}\n")


# ---------------------------------------------------------------- eval

def cmd_eval(args: argparse.Namespace) -> CommandResult:
    options = _options(args, dict(EVAL_SETTINGS))
    predictions = read_stroke3(args.pred, sys.maxsize)
    truths = read_stroke3(args.truth, sys.maxsize)
    if not predictions or not truths:
        raise EmptyInputError("nothing to evaluate: prediction or ground-truth file is empty")
    if len(predictions) != len(truths):
        raise ValidationError(f"{len(predictions)} predictions for {len(truths)} ground-truth sketches")
    predicted = _labeled(predictions, args.pred)
    expected = _labeled(truths, args.truth)
    for index, (p, t) in enumerate(zip(predicted, expected)):
        if len(p) != len(t):
            raise ValidationError(f"sketch {index}: {len(p)} predicted labels for {len(t)} segments")

    weights = None
    if options["weighting"] == "arc-length":
        weights = [sketch.segment_lengths() for sketch, _ in truths]
    elif options["weighting"] != "equal":
        raise ConfigurationError(f"unknown weighting {options['weighting']!r}")
    report = evaluate(predicted, expected, [s.category for s, _ in truths], weights,
                      symmetric_sc=options["symmetric_sc"])
    if not args.per_category:
        report.per_category = report.per_category.iloc[0:0]
    delimiter = options["delimiter"].encode().decode("unicode_escape")
    return CommandResult(output=report.format(delimiter))


# ---------------------------------------------------------------- abstract

def _is_pgm(path: str) -> bool:
    with open(path, "rb") as handle:
        return handle.read(2) == b"P5"


def cmd_abstract(args: argparse.Namespace) -> CommandResult:
    options = _options(args, dict(ABSTRACTION_SETTINGS))
    if not args.model and not args.use_labels:
        raise ConfigurationError("--model is required unless --use-labels is given")
    model = load_checkpoint(args.model) if args.model else None
    relative = options["relative_thresholds"] and not args.absolute

    if _is_pgm(args.input):
        bitmap = read_pgm(args.input, options["pgm_threshold"], invert=args.invert)
        sources = [(bitmap, None)]
    else:
        limit = model.hyper.max_segments if model else SKETCH_SETTINGS["max_segments"]
        sources = read_stroke3(args.input, limit)
        if args.use_labels:
            _labeled(sources, args.input)

    outputs = []
    for source, labels in sources:
        if args.use_labels and isinstance(source, np.ndarray):
            raise ConfigurationError("--use-labels needs a labeled sketch input, not a raster")
        outputs.extend(synthesize(source, model, options["thresholds"],
                                  labels if args.use_labels else None, relative))
    atomic_write_text(args.out, serialize_stroke3(outputs))
    return CommandResult(output=f"wrote {len(outputs)} abstracted sketches to {args.out}\n")


# ---------------------------------------------------------------- render

def cmd_render(args: argparse.Namespace) -> CommandResult:
    records = read_stroke3(args.input, sys.maxsize)
    if not records:
        raise EmptyInputError(f"{args.input} has no sketches")
    if not 0 <= args.index < len(records):
        raise ConfigurationError(f"--index {args.index} out of range for {len(records)} sketches")
    sketch, labels = records[args.index]
    atomic_write_text(args.out, render_svg(sketch, labels if args.labels else None))
    return CommandResult(output=f"rendered sketch {args.index} to {args.out}\n")


# ---------------------------------------------------------------- import-quickdraw

def cmd_import_quickdraw(args: argparse.Namespace) -> CommandResult:
    with open(args.input, encoding="utf-8") as handle:
        sketches = parse_quickdraw(handle.read(), args.max_segments)
    atomic_write_text(args.out, serialize_stroke3((s, None) for s in sketches))
    return CommandResult(output=f"imported {len(sketches)} sketches into {args.out}\n")


# ---------------------------------------------------------------- parser

def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value 配置文件")
    parser.add_argument("--log-level", default=None, help=f"日志级别 (默认 {LOG_CONFIG['level']})")


def _hyper_flags(parser: argparse.ArgumentParser) -> None:
    model = parser.add_argument_group("model")
    for name in ("enc_hidden", "dec_hidden", "latent_dim", "feat_dim", "mixtures",
                 "triplets_per_sketch", "classifier_hidden", "max_segments"):
        model.add_argument("--" + name.replace("_", "-"), dest=name, type=int)
    for name in ("margin", "lambda_a", "lambda_g", "lambda_r", "lambda_kl", "lambda_l2"):
        model.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    model.add_argument("--exhaustive-triplets", dest="exhaustive_triplets", action="store_true", default=None)
    model.add_argument("--no-z-every-step", dest="z_every_step", action="store_false", default=None)

    train = parser.add_argument_group("training")
    for name in ("iters", "batch", "seed", "checkpoint_every", "workers", "log_every"):
        train.add_argument("--" + name.replace("_", "-"), dest=name, type=int)
    for name in ("lr0", "decay", "beta1", "beta2", "epsilon", "clip_norm", "weight_decay",
                 "removal_prob", "distort_scale"):
        train.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    train.add_argument("--no-augment", dest="augment", action="store_false", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="sketch-grouper", description="通用草图感知分组")
    sub = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)
    sub.required = True

    p = sub.add_parser("synth", help="生成带分组标注的合成草图")
    _common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--categories", type=_csv(str), default=None)
    p.add_argument("--jitter", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("train", help="训练分组模型")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--val")
    p.add_argument("--out", required=True, help="检查点路径")
    p.add_argument("--metrics", help="训练日志路径 (默认 <out>.metrics)")
    p.add_argument("--exclude-categories", type=_csv(str), default=None)
    _hyper_flags(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("group", help="对草图分组")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-affinity", dest="dump_affinity")
    p.set_defaults(handler=cmd_group)

    p = sub.add_parser("eval", help="计算 VOI / PRI / SC")
    _common(p)
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--per-category", action="store_true")
    p.add_argument("--weighting", choices=["equal", "arc-length"], default=None)
    p.add_argument("--symmetric-sc", dest="symmetric_sc", action="store_true", default=None)
    p.add_argument("--delimiter", default=None)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("abstract", help="按组重要性生成抽象草图")
    _common(p)
    p.add_argument("--model")
    p.add_argument("--in", dest="input", required=True, help="PGM 或交换格式文件")
    p.add_argument("--out", required=True)
    p.add_argument("--thresholds", type=_csv(float), default=None)
    p.add_argument("--absolute", action="store_true", help="阈值为绝对重要性")
    p.add_argument("--invert", action="store_true", help="深色前景")
    p.add_argument("--pgm-threshold", dest="pgm_threshold", type=int, default=None)
    p.add_argument("--use-labels", action="store_true", help="使用输入自带的组号")
    p.set_defaults(handler=cmd_abstract)

    p = sub.add_parser("render", help="渲染为 SVG")
    _common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--labels", action="store_true", help="按组号着色")
    p.add_argument("--index", type=int, default=0)
    p.set_defaults(handler=cmd_render)

    p = sub.add_parser("import-quickdraw", help="导入 QuickDraw ndjson")
    _common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-segments", dest="max_segments", type=int, default=None)
    p.set_defaults(handler=cmd_import_quickdraw)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> CommandResult:
    """解析并执行子命令，把异常映射为返回码"""
    try:
        args = build_parser().parse_args(argv)
        setup_logging(level=args.log_level)
        return args.handler(args)
    except ConfigurationError as e:
        return CommandResult(EXIT_USAGE, f"error: {e}")
    except DATA_ERRORS as e:
        return CommandResult(EXIT_DATA, f"error: {e}")
    except OSError as e:
        return CommandResult(EXIT_DATA, f"error: {e.strerror or e}: {e.filename or ''}".rstrip(": "))
    except GrouperError as e:
        return CommandResult(EXIT_RUNTIME, f"error: {type(e).__name__}: {e}")
    except Exception as e:
        logger.exception("unexpected failure")
        return CommandResult(EXIT_RUNTIME, f"error: {type(e).__name__}: {e}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    result = run(argv)
    if result.output:
        sys.stdout.write(result.output)
    if result.exit_code != EXIT_OK:
        sys.stderr.write((result.message or "error") + "\n")
    return result.exit_code
