import json

import pytest

from divergebench.core import (
    ChallengeSet,
    DivergenceCategory,
    DocumentError,
    HighlightSpan,
    SystemOutput,
    SystemOutputSet,
    challenge_set_to_dict,
    emphasize,
    parse_challenge_set,
    parse_outputs,
    render_formatted,
    serialize_challenge_set,
    validate_challenge_set,
)

from helpers import make_item, make_outputs, make_set


def _doc(challenge_set):
    return serialize_challenge_set(challenge_set)


def test_parse_serialize_round_trip_is_identity():
    original = make_set()
    reparsed = parse_challenge_set(_doc(original))
    assert reparsed == original
    assert parse_challenge_set(serialize_challenge_set(reparsed)) == reparsed


def test_embedded_set_round_trips(embedded_set):
    assert parse_challenge_set(serialize_challenge_set(embedded_set)) == embedded_set


def test_serialization_keeps_non_ascii_readable():
    text = serialize_challenge_set(make_set())
    assert "numéro" in text
    assert "\\u" not in text


@pytest.mark.parametrize("item_id", ["S1a", "S26c", "S4d2", "S104z9"])
def test_item_id_grammar_accepts(item_id):
    assert make_item(item_id).id == item_id


@pytest.mark.parametrize("item_id", ["S1", "S1A", "x1a", "S1a12", "1a", "Sa1", "S1a ", ""])
def test_item_id_grammar_rejects(item_id):
    with pytest.raises(ValueError, match="malformed item id"):
        make_item(item_id)


def test_duplicate_item_id_error_names_the_id():
    doc = challenge_set_to_dict(make_set())
    doc["items"][1]["id"] = doc["items"][0]["id"]
    with pytest.raises(DocumentError, match="duplicate item id 'S1a'"):
        parse_challenge_set(json.dumps(doc))


def test_missing_divergence_locus_is_an_error():
    doc = challenge_set_to_dict(make_set())
    doc["items"][2]["reference_highlights"] = []
    with pytest.raises(DocumentError, match="missing divergence locus") as exc_info:
        parse_challenge_set(json.dumps(doc))
    assert exc_info.value.item_id == "S1c"


@pytest.mark.parametrize("spans, message", [
    ([[3, 3]], "invalid span"),
    ([[5, 2]], "invalid span"),
    ([[-1, 4]], "invalid span"),
    ([[0, 10_000]], "exceeds string"),
    ([[0, 4], [2, 6]], "overlapping or unsorted"),
    ([[5, 8], [0, 3]], "overlapping or unsorted"),
])
def test_bad_spans_rejected(spans, message):
    doc = challenge_set_to_dict(make_set())
    doc["items"][0]["reference_highlights"] = spans
    with pytest.raises(DocumentError, match=message):
        parse_challenge_set(json.dumps(doc))


def test_touching_spans_are_allowed():
    item = make_item(reference_highlights=(HighlightSpan(0, 3), HighlightSpan(3, 6)))
    assert len(item.reference_highlights) == 2


def test_unknown_category_lists_allowed_values():
    doc = challenge_set_to_dict(make_set())
    doc["items"][0]["category"] = "phonological"
    with pytest.raises(DocumentError, match="morpho-syntactic, lexico-syntactic, syntactic"):
        parse_challenge_set(json.dumps(doc))


def test_malformed_json_reported():
    with pytest.raises(DocumentError, match="malformed JSON"):
        parse_challenge_set(b'{"format": "challenge-set",')


def test_wrong_format_marker_rejected():
    with pytest.raises(DocumentError, match="expected format 'challenge-set'"):
        parse_challenge_set(json.dumps({"format": "nope", "format_version": 1}))


def test_error_paths_locate_the_field():
    doc = challenge_set_to_dict(make_set())
    del doc["items"][3]["question"]
    with pytest.raises(DocumentError) as exc_info:
        parse_challenge_set(json.dumps(doc))
    assert exc_info.value.path == "items[3].question"


def test_validate_flags_subcategory_split_across_categories():
    challenge_set = make_set()
    moved = list(challenge_set.items)
    moved[0] = make_item(
        "S9a", category=DivergenceCategory.SYNTACTIC,
        subcategory=moved[1].subcategory,
    )
    report = validate_challenge_set(ChallengeSet(
        challenge_set.name, challenge_set.version,
        challenge_set.source_language, challenge_set.target_language, tuple(moved),
    ))
    assert any("maps to multiple categories" in e for e in report.errors)


def test_validate_warns_on_small_subcategories():
    report = validate_challenge_set(make_set([
        (DivergenceCategory.SYNTACTIC, "tiny probes", 2),
        (DivergenceCategory.SYNTACTIC, "full probes", 3),
    ]))
    assert report.ok
    assert any("'tiny probes' has 2 item(s)" in w for w in report.warnings)
    assert not any("full probes" in w for w in report.warnings)


def test_validate_warns_on_long_sources():
    long_item = make_item(
        "S9a", source="one two three four five six seven eight nine ten.",
        source_highlights=(),
    )
    challenge_set = ChallengeSet("t", "1", "en", "fr", (long_item,))
    report = validate_challenge_set(challenge_set, max_source_tokens=5)
    assert any("10 tokens" in w for w in report.warnings)
    relaxed = validate_challenge_set(challenge_set, max_source_tokens=10)
    assert not any("tokens" in w for w in relaxed.warnings)


def test_empty_set_is_an_error():
    report = validate_challenge_set(ChallengeSet("t", "1", "en", "fr", ()))
    assert report.errors == ["empty challenge set"]


def test_set_accessors():
    challenge_set = make_set()
    assert challenge_set.item("S2b").subcategory == "verb frame probes"
    with pytest.raises(KeyError):
        challenge_set.item("S9z")
    assert challenge_set.subcategories() == (
        "agreement probes", "verb frame probes", "word order probes",
    )
    assert challenge_set.category_of("word order probes") is DivergenceCategory.SYNTACTIC


# -- outputs ------------------------------------------------------------------


def _outputs_doc(output_set):
    from divergebench.core import outputs_to_dict

    return json.dumps(outputs_to_dict(output_set))


def test_outputs_round_trip_and_order():
    challenge_set = make_set()
    parsed = parse_outputs(_outputs_doc(make_outputs(challenge_set)), challenge_set)
    assert parsed.systems == ("alpha-mt", "beta-mt")
    assert parsed.get("beta-mt", "S1a").translation == "sortie 2 pour S1a"
    assert parsed.warnings == ()


def test_outputs_duplicate_pair_rejected():
    challenge_set = make_set()
    doc = json.loads(_outputs_doc(make_outputs(challenge_set)))
    doc["outputs"].append(dict(doc["outputs"][0]))
    with pytest.raises(DocumentError, match="duplicate output"):
        parse_outputs(json.dumps(doc), challenge_set)


def test_outputs_unknown_item_rejected():
    challenge_set = make_set()
    doc = json.loads(_outputs_doc(make_outputs(challenge_set)))
    doc["outputs"][0]["item_id"] = "S9z"
    with pytest.raises(DocumentError, match="unknown item id 'S9z'"):
        parse_outputs(json.dumps(doc), challenge_set)


def test_outputs_missing_pairs_warn_but_parse():
    challenge_set = make_set()
    doc = json.loads(_outputs_doc(make_outputs(challenge_set)))
    dropped = doc["outputs"].pop()
    parsed = parse_outputs(json.dumps(doc), challenge_set)
    assert any(dropped["item_id"] in w for w in parsed.warnings)
    with pytest.raises(DocumentError, match="incomplete output matrix"):
        parsed.require_complete(challenge_set)


def test_embedded_outputs_complete(embedded_set, embedded_outputs):
    assert embedded_outputs.systems == ("PBMT-1", "NMT", "Google")
    embedded_outputs.require_complete(embedded_set)
    assert len(embedded_outputs.outputs) == 324


# -- rendering ----------------------------------------------------------------


def test_emphasize_wraps_spans():
    spans = (HighlightSpan(4, 8), HighlightSpan(21, 26))
    text = "Les clés sont sur la table."
    assert emphasize(text, spans) == "Les **clés** sont sur la **table**."
    assert emphasize("abc", ()) == "abc"


def test_render_formatted_shows_marks_and_questions():
    challenge_set = make_set()
    outputs = make_outputs(challenge_set)
    verdicts = {
        (system_id, item.id): item.id != "S1a"
        for system_id in outputs.systems
        for item in challenge_set.items
    }
    text = render_formatted(challenge_set, outputs, verdicts)
    assert "### agreement probes" in text
    assert text.count("_Is divergence 1 bridged?_") == 1
    assert "✓" in text and "✗" in text
    assert "alpha-mt: sortie 1 pour S1a ✗" in text


def test_render_formatted_rejects_unknown_verdict_pair():
    challenge_set = make_set()
    outputs = make_outputs(challenge_set)
    with pytest.raises(DocumentError, match="unknown \\(system, item\\) pair"):
        render_formatted(challenge_set, outputs, {("ghost-mt", "S1a"): True})


def test_render_formatted_plain_listing(embedded_set):
    text = render_formatted(embedded_set)
    assert text.count("\n## ") == 3
    assert text.count("\n### ") == 26
    assert "**S1a**" in text


def test_system_output_set_missing_pairs_helper():
    output_set = SystemOutputSet((SystemOutput("m1", "S1a", "x"),))
    assert output_set.missing_pairs(["S1a", "S1b"]) == [("m1", "S1b")]
