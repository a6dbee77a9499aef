import logging

import numpy as np
import pandas as pd
import pytest

from config import TRAIN_CONFIG, load_config_file, resolve_options
from shared import (FiniteChecker, ReportFormatter, atomic_write_bytes, atomic_write_text,
                    check_finite, setup_logging)
from shared.errors import ConfigurationError, NonFiniteLossError, ParseError, SketchLengthError


class TestConfigLoader:
    def test_precedence(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text("# comment\niters = 50\nbatch=4  # inline\nlr0 = 0.001\n", encoding="utf-8")
        resolved = resolve_options(TRAIN_CONFIG, load_config_file(str(path)), {"batch": 8, "seed": None})
        assert resolved["iters"] == 50
        assert resolved["batch"] == 8
        assert resolved["lr0"] == 0.001
        assert resolved["seed"] == TRAIN_CONFIG["seed"]

    def test_coercion(self):
        defaults = {"augment": True, "thresholds": [0.05], "name": "x"}
        resolved = resolve_options(defaults, {"augment": "off", "thresholds": "0.1, 0.2", "name": "y"})
        assert resolved == {"augment": False, "thresholds": [0.1, 0.2], "name": "y"}

    def test_unknown_keys_ignored(self):
        assert resolve_options({"a": 1}, {"b": "2"}, {"c": 3}) == {"a": 1}

    @pytest.mark.parametrize("raw", ["ten", "1.5"])
    def test_bad_int(self, raw):
        with pytest.raises(ConfigurationError):
            resolve_options({"iters": 1}, {"iters": raw})

    def test_bad_line(self, tmp_path):
        path = tmp_path / "bad.conf"
        path.write_text("iters 5\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_config_file(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config_file(str(tmp_path / "nope.conf"))


class TestFiniteChecker:
    def test_finite(self):
        report = check_finite({"a": np.ones(3), "b": 2.0})
        assert report["is_finite"]
        assert report["first_offender"] is None

    def test_reports_offenders(self):
        report = FiniteChecker().check_arrays({"a": np.ones(2), "b": np.array([np.nan, np.inf, 1.0])})
        assert not report["is_finite"]
        assert report["first_offender"] == "b"
        assert {issue["category"] for issue in report["issues"]} == {"nan", "inf"}


class TestErrors:
    def test_messages_carry_context(self):
        assert "line 3" in str(ParseError("bad", 3))
        error = SketchLengthError(200, 192, index=4)
        assert (error.length, error.limit, error.index) == (200, 192, 4)
        assert "L_R" in str(NonFiniteLossError("L_R", float("nan")))


class TestReportFormatter:
    def test_format(self):
        frame = pd.DataFrame([{"category": "cat", "voi": 0.5, "pri": 1.0}])
        text = ReportFormatter(",", precision=2).format_table(frame, ["note"])
        assert text == "# note\ncategory,voi,pri\ncat,0.50,1.00\n"


class TestIoUtils:
    def test_atomic_write(self, tmp_path):
        path = tmp_path / "out.txt"
        atomic_write_text(str(path), "first")
        atomic_write_text(str(path), "第二")
        assert path.read_text(encoding="utf-8") == "第二"
        atomic_write_bytes(str(path), b"\x00\x01")
        assert path.read_bytes() == b"\x00\x01"
        assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]

    def test_missing_directory(self, tmp_path):
        with pytest.raises(OSError):
            atomic_write_text(str(tmp_path / "missing" / "out.txt"), "x")


class TestLogging:
    def test_setup_is_idempotent(self):
        root = logging.getLogger()
        setup_logging(level="DEBUG")
        setup_logging(level="WARNING")
        ours = [h for h in root.handlers if getattr(h, "_grouper_handler", False)]
        assert len(ours) == 1
        assert root.level == logging.WARNING

    def test_file_handler(self, tmp_path):
        path = tmp_path / "run.log"
        setup_logging({"file": str(path)}, level="INFO")
        logging.getLogger("grouper.test").info("hello")
        for handler in logging.getLogger().handlers:
            handler.flush()
        assert "hello" in path.read_text(encoding="utf-8")
        setup_logging()
