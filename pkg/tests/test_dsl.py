import pytest

from sfe_lab import catalog
from sfe_lab.dsl import PartyView, format_protocol, next_message, parse
from sfe_lab.errors import ArityError, DslSyntaxError, ForwardReference, OracleUnavailable, WidthMismatch

MINIMAL = """(protocol :kappa 0 :answer-bits 0 :rounds 2
  (alice :rand 0 (round 1 input))
  (bob :rand 0 (round 2 (xor input (msg 1)))))"""


@pytest.mark.parametrize("name", sorted(catalog.PROTOCOLS))
def test_corpus_round_trips(name):
    spec = catalog.protocol(name)
    again = parse(format_protocol(spec))
    assert again == spec
    assert format_protocol(again) == format_protocol(spec)


def test_minimal_protocol_defaults():
    spec = parse(MINIMAL)
    assert spec.alice_inputs == 1 and spec.bob_inputs == 1
    assert spec.widths == (1, 1)
    assert spec.m == 0


def test_missing_paren_reports_position():
    with pytest.raises(DslSyntaxError) as exc:
        parse(MINIMAL[:-1])
    assert (exc.value.line, exc.value.col) == (1, 1)


def test_width_mismatch():
    bad = MINIMAL.replace("(round 1 input)", "(round 1 (if (eq input #b0) #b1 #b00))")
    with pytest.raises(WidthMismatch):
        parse(bad)


def test_forward_reference():
    bad = MINIMAL.replace("(round 1 input)", "(round 1 (msg 2))")
    with pytest.raises(ForwardReference):
        parse(bad)


def test_arity():
    bad = MINIMAL.replace("(round 1 input)", "(round 1 (eq #b0))")
    with pytest.raises(ArityError):
        parse(bad)


def test_round_given_to_wrong_party():
    bad = MINIMAL.replace("(round 1 input)", "(round 2 input)")
    with pytest.raises(DslSyntaxError):
        parse(bad)


def test_next_message_reports_new_pairs():
    spec = catalog.protocol("shared-nonce")
    view = PartyView("A", 0, "10", ())
    bits, new = next_message(spec, "A", 1, view, {"10": "11"})
    assert bits == "10" and new == [("10", "11")]
    with pytest.raises(OracleUnavailable):
        next_message(spec, "A", 1, view, None)
    # a known pair is reused rather than asked again
    bits, new = next_message(spec, "A", 1, PartyView("A", 0, "10", (), (("10", "11"),)), None)
    assert bits == "10" and new == []


def test_next_message_rejects_wrong_speaker():
    with pytest.raises(ValueError):
        next_message(parse(MINIMAL), "B", 1, PartyView("B", 0, "", ()))


def test_output_decoding():
    spec = catalog.protocol("leaky")
    assert spec.decode_output(["01", "011"]) == "0"
    assert spec.decode_output(["10", "100"]) == "3"
