from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from duma.errors import MalformedFastOutput, MalformedSlowEmission
from duma.grammar import (
    degraded_fast_output,
    parse_fast_output,
    parse_slow_emission,
    render_transcript,
    serialize_fast_input,
    serialize_slow_step,
)
from duma.types import FastInput, FastOutput, SlowStep


def test_serialize_user_input():
    assert serialize_fast_input(FastInput.user("Is unit 3 still available?")) == "User[Is unit 3 still available?]"


def test_serialize_slow_result_input():
    assert serialize_fast_input(FastInput.slow_result("Monthly payment is 4,200")) == "SlowMind[Monthly payment is 4,200]"


def test_serialize_preserves_inner_brackets():
    assert serialize_fast_input(FastInput.user("a[b]c")) == "User[a[b]c]"


def test_parse_fast_output_plain():
    out = parse_fast_output("Invoke[False]\nResponse[Hello! How can I help you today?]")
    assert out.invoke is False
    assert out.response == "Hello! How can I help you today?"


def test_parse_fast_output_invoking():
    out = parse_fast_output("Invoke[True]\nResponse[One moment, let me look that up.]")
    assert out.invoke is True
    assert out.response == "One moment, let me look that up."


def test_parse_fast_output_missing_markers():
    with pytest.raises(MalformedFastOutput):
        parse_fast_output("Sure, the price is 2M.")


def test_parse_fast_output_last_bracket_rule():
    out = parse_fast_output("Invoke[False]\nResponse[rates are 4.1% [floating] today]")
    assert out.response == "rates are 4.1% [floating] today"


def test_parse_fast_output_case_insensitive_invoke():
    assert parse_fast_output("Invoke[TRUE]\nResponse[x]").invoke is True
    assert parse_fast_output("Invoke[false]\nResponse[x]").invoke is False


def test_parse_fast_output_bad_invoke_value():
    with pytest.raises(MalformedFastOutput):
        parse_fast_output("Invoke[maybe]\nResponse[x]")


def test_parse_fast_output_missing_response():
    with pytest.raises(MalformedFastOutput):
        parse_fast_output("Invoke[True]\nI will look it up.")


def test_parse_fast_output_unclosed_response_runs_to_end():
    out = parse_fast_output("Invoke[False]\nResponse[no closing bracket here")
    assert out.response == "no closing bracket here"


def test_parse_fast_output_keeps_raw_verbatim():
    raw = "Invoke[False]\nResponse[hi]"
    assert parse_fast_output(raw).raw == raw


def test_degraded_fast_output():
    out = degraded_fast_output("gibberish")
    assert out == FastOutput(invoke=False, response="gibberish", raw="gibberish")


def test_empty_fast_input_rejected():
    with pytest.raises(ValueError):
        FastInput.user("   ")


@given(invoke=st.booleans(), response=st.text(max_size=200))
def test_fast_output_round_trip(invoke, response):
    built = FastOutput.build(invoke, response)
    assert parse_fast_output(built.serialize()) == built


# -- slow emissions ------------------------------------------------------------------


def test_parse_reason_then_act():
    steps = parse_slow_emission(
        'Reason[Need monthly payment]\nAct[mortgage_calc]{"principal": 2000000, "rate": 0.041, "years": 30}'
    )
    assert [s.kind for s in steps] == ["Reason", "Act"]
    assert steps[0].payload == "Need monthly payment"
    assert steps[1].tool_name == "mortgage_calc"
    assert steps[1].tool_args == '"principal": 2000000, "rate": 0.041, "years": 30'


def test_parse_finish():
    steps = parse_slow_emission("Finish[The house is 89 sqm with 2 bedrooms]")
    assert [s.kind for s in steps] == ["Finish"]
    assert steps[0].payload == "The house is 89 sqm with 2 bedrooms"


def test_parse_stops_at_first_act():
    steps = parse_slow_emission("Reason[a]\nAct[x]{1}\nAct[y]{2}")
    assert [s.kind for s in steps] == ["Reason", "Act"]
    assert steps[1].tool_name == "x"
    assert steps[1].tool_args == "1"


def test_parse_stops_at_first_finish():
    steps = parse_slow_emission("Finish[done]\nReason[after]")
    assert [s.kind for s in steps] == ["Finish"]
    assert steps[0].payload == "done]\nReason[after"  # runs to the last bracket


def test_model_emitted_obs_discarded(caplog):
    with caplog.at_level("WARNING"):
        steps = parse_slow_emission("Reason[a]\nObs[fake result]\nFinish[b]")
    assert [s.kind for s in steps] == ["Reason", "Finish"]
    assert any("Obs" in r.message for r in caplog.records)


def test_parse_slow_emission_no_blocks():
    with pytest.raises(MalformedSlowEmission):
        parse_slow_emission("just thinking aloud with no structure")


def test_multiple_reasons_before_finish():
    steps = parse_slow_emission("Reason[a]\nReason[b]\nFinish[c]")
    assert [s.kind for s in steps] == ["Reason", "Reason", "Finish"]
    assert [s.payload for s in steps] == ["a", "b", "c"]


def test_act_args_nested_braces():
    steps = parse_slow_emission('Act[t]{{"a": {"b": 1}}}')
    assert steps[0].tool_args == '{"a": {"b": 1}}'


def test_act_args_brace_inside_string():
    steps = parse_slow_emission('Act[t]{"expr": "}"}')
    assert steps[0].tool_args == '"expr": "}"'


def test_act_without_braces_has_empty_args():
    steps = parse_slow_emission("Reason[r]\nAct[ping]")
    assert steps[1].tool_name == "ping"
    assert steps[1].tool_args == ""


def test_act_unclosed_braces_takes_rest():
    steps = parse_slow_emission("Act[t]{1, 2")
    assert steps[0].tool_args == "1, 2"


def test_reason_without_close_takes_segment():
    steps = parse_slow_emission("Reason[no close\nFinish[x]")
    assert steps[0].payload == "no close\n"
    assert steps[1].kind == "Finish"


def test_serialize_slow_steps_round_trip_transcript():
    steps = [
        SlowStep.reason("think"),
        SlowStep.act("calculator", "1+1"),
        SlowStep.obs("2"),
    ]
    assert render_transcript(steps) == "Reason[think]\nAct[calculator]{1+1}\nObs[2]"
    assert serialize_slow_step(SlowStep.finish("done")) == "Finish[done]"
