from __future__ import annotations

import json

from click.testing import CliRunner

from duma.cli import main
from duma.config import load_app_config


def invoke(*args, catch_exceptions=False, **kwargs):
    return CliRunner().invoke(main, list(args), catch_exceptions=catch_exceptions, **kwargs)


def write_scores(tmp_path):
    path = tmp_path / "scores.jsonl"
    lines = [
        {"dialogue_id": "d1", "model_name": "m", "scores": {"house_expertise": 2, "tool_calling": 1}},
        {"dialogue_id": "d2", "model_name": "m", "scores": {"house_expertise": 1}},
    ]
    path.write_text("".join(json.dumps(l) + "\n" for l in lines), encoding="utf-8")
    return path


def test_main_help_lists_commands():
    result = invoke("--help")
    assert result.exit_code == 0
    for command in ("serve", "chat", "replay", "eval"):
        assert command in result.output


def test_serve_help():
    result = invoke("serve", "--help")
    assert result.exit_code == 0
    assert "--port" in result.output and "--config" in result.output


def test_eval_renders_table(tmp_path):
    result = invoke("eval", "--scores", str(write_scores(tmp_path)))
    assert result.exit_code == 0
    assert "| model | house_expertise |" in result.output
    assert "| m | 1.500 | 1.000 | - | - | - | - |" in result.output
    assert "Records per cell:" in result.output
    assert "| m | 2 | 1 | 0 | 0 | 0 | 0 |" in result.output


def test_eval_writes_out_file(tmp_path):
    out = tmp_path / "table.md"
    result = invoke("eval", "--scores", str(write_scores(tmp_path)), "--out", str(out))
    assert result.exit_code == 0
    assert "| m | 1.500 |" in out.read_text(encoding="utf-8")


def test_eval_requires_scores():
    result = invoke("eval", catch_exceptions=True)
    assert result.exit_code != 0


def test_eval_align_ok(tmp_path):
    runs = tmp_path / "runs"
    runs.mkdir()
    (runs / "a.json").write_text(json.dumps([["q1", "q2"]]), encoding="utf-8")
    (runs / "b.json").write_text(json.dumps([["q1", "q2"]]), encoding="utf-8")
    result = invoke("eval", "align", "--runs", str(runs))
    assert result.exit_code == 0
    assert "ok   dialogue 0: a vs b similarity 1.000" in result.output
    assert "0 pair(s) below threshold 0.8" in result.output


def test_eval_align_flagged_exits_nonzero(tmp_path):
    runs = tmp_path / "runs"
    runs.mkdir()
    (runs / "a.json").write_text(json.dumps([["how much is L-001?"]]), encoding="utf-8")
    (runs / "b.json").write_text(json.dumps([["tell me a joke"]]), encoding="utf-8")
    result = invoke("eval", "align", "--runs", str(runs), catch_exceptions=True)
    assert result.exit_code == 1
    assert "FLAG dialogue 0" in result.output


def test_eval_rubric():
    result = invoke("eval", "rubric")
    assert result.exit_code == 0
    assert result.output.startswith("Score each dialogue on every metric")
    assert "promote_invitation" in result.output


def test_chat_plain_round(demo_config):
    result = invoke("chat", "--config", str(demo_config), input="hi\n/quit\n")
    assert result.exit_code == 0
    assert "agent> Hello!" in result.output


def test_chat_invoking_round_shows_thinking_and_final(demo_config):
    result = invoke(
        "chat", "--config", str(demo_config), "--show-slow", input="lookup\n/quit\n"
    )
    assert result.exit_code == 0
    assert "agent> One moment." in result.output
    assert "…thinking…" in result.output
    assert "Act[calculator]{1+1}" in result.output
    assert "agent> Bridged." in result.output


def test_chat_exits_on_eof(demo_config):
    result = invoke("chat", "--config", str(demo_config), input="")
    assert result.exit_code == 0


def test_replay_renders_stored_session(demo_config, fixed_clock):
    orchestrator = load_app_config(demo_config).build_orchestrator(clock=fixed_clock)
    session_id = orchestrator.create_session_named()
    orchestrator.run_turn(session_id, "lookup")
    orchestrator.run_turn(session_id, "hi")

    result = invoke("replay", "--config", str(demo_config), "--session", session_id)
    assert result.exit_code == 0
    assert "[0] you> lookup" in result.output
    assert "[0] agent> (invoking) One moment." in result.output
    assert "[0] agent> Bridged." in result.output
    assert "[1] agent> Hello!" in result.output
    assert "Finish" not in result.output

    detailed = invoke(
        "replay", "--config", str(demo_config), "--session", session_id, "--show-slow"
    )
    assert "slow trace (Finish):" in detailed.output
    assert "Act[calculator]{1+1}" in detailed.output


def test_replay_unknown_session(demo_config):
    result = invoke(
        "replay", "--config", str(demo_config), "--session", "nope", catch_exceptions=True
    )
    assert result.exit_code != 0
