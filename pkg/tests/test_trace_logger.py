import json

from app.config import settings
from app.services.trace_logger import TraceLogger, new_trace_id


def test_trace_ids_are_unique():
    a, b = new_trace_id(), new_trace_id()
    assert a.startswith("trace_") and a != b


def test_write_disabled_returns_empty(tmp_path):
    assert TraceLogger(str(tmp_path)).write("t1", {"command": "zeta"}) == ""
    assert list(tmp_path.iterdir()) == []


def test_write_enabled(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "TRACE_ENABLED", True)
    root = tmp_path / "nested" / "traces"
    path = TraceLogger(str(root)).write("t2", {"command": "orbits", "errors": []})
    data = json.loads(open(path, encoding="utf-8").read())
    assert data["trace_id"] == "t2"
    assert data["command"] == "orbits"
    assert "timestamp" in data


def test_trace_root_falls_back_to_settings(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "TRACE_ROOT", str(tmp_path / "from_settings"))
    assert TraceLogger().trace_root == str(tmp_path / "from_settings")
