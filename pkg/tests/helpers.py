"""Builders shared across test modules."""

from __future__ import annotations

import random

from divergebench.core import (
    ChallengeItem,
    ChallengeSet,
    DivergenceCategory,
    HighlightSpan,
    SystemOutput,
    SystemOutputSet,
)
from divergebench.scoring import Judgment, Verdict

LETTERS = "abcdefghijklmnopqrstuvwxyz"

DEFAULT_SPEC = [
    (DivergenceCategory.MORPHO_SYNTACTIC, "agreement probes", 3),
    (DivergenceCategory.LEXICO_SYNTACTIC, "verb frame probes", 3),
    (DivergenceCategory.SYNTACTIC, "word order probes", 2),
]


def make_item(item_id: str = "S1a", **overrides) -> ChallengeItem:
    fields = dict(
        id=item_id,
        category=DivergenceCategory.MORPHO_SYNTACTIC,
        subcategory="agreement probes",
        question="Does the verb agree with its subject?",
        source="The keys to the cabinet are on the table.",
        source_highlights=(HighlightSpan(24, 27),),
        reference="Les clés de l'armoire sont sur la table.",
        reference_highlights=(HighlightSpan(22, 26),),
    )
    fields.update(overrides)
    return ChallengeItem(**fields)


def make_set(spec=None, name: str = "toy set") -> ChallengeSet:
    if spec is None:
        spec = DEFAULT_SPEC
    items = []
    for index, (category, subcategory, count) in enumerate(spec, start=1):
        for j in range(count):
            suffix = f"{index}{LETTERS[j]}"
            items.append(make_item(
                f"S{suffix}",
                category=category,
                subcategory=subcategory,
                question=f"Is divergence {index} bridged?",
                source=f"Probe sentence number {suffix}.",
                source_highlights=(HighlightSpan(0, 5),),
                reference=f"Phrase de test numéro {suffix}.",
                reference_highlights=(HighlightSpan(0, 6),),
            ))
    return ChallengeSet(
        name=name,
        version="1",
        source_language="en",
        target_language="fr",
        items=tuple(items),
    )


def make_outputs(
    challenge_set: ChallengeSet, systems=("alpha-mt", "beta-mt")
) -> SystemOutputSet:
    outputs = tuple(
        SystemOutput(system_id, item.id, f"sortie {n} pour {item.id}")
        for n, system_id in enumerate(systems, start=1)
        for item in challenge_set.items
    )
    return SystemOutputSet(outputs)


def panel_judgments(
    challenge_set: ChallengeSet,
    systems=("alpha-mt", "beta-mt"),
    annotators=("j1", "j2", "j3"),
    verdict_for=None,
) -> list[Judgment]:
    """One full panel per (item, system); default everyone votes yes."""
    if verdict_for is None:
        verdict_for = lambda annotator_id, item_id, system_id: Verdict.YES
    return [
        Judgment(annotator_id, item.id, system_id, verdict_for(annotator_id, item.id, system_id))
        for item in challenge_set.items
        for system_id in systems
        for annotator_id in annotators
    ]


def random_grid(rng: random.Random):
    """Small random challenge set + systems + full random panel judgments."""
    categories = list(DivergenceCategory)
    spec = []
    for index in range(rng.randint(1, 3)):
        spec.append((
            rng.choice(categories),
            f"random probes {index + 1}",
            rng.randint(1, 4),
        ))
    challenge_set = make_set(spec)
    systems = tuple(f"system-{n}" for n in range(1, rng.randint(1, 3) + 1))
    annotators = ("j1", "j2", "j3")
    verdicts = list(Verdict)
    judgments = panel_judgments(
        challenge_set, systems, annotators,
        verdict_for=lambda *_: rng.choice(verdicts),
    )
    return challenge_set, systems, annotators, judgments


def make_roster_doc(annotators=("a1", "a2"), admin_token: str = "admin-token") -> dict:
    return {
        "annotators": [
            {"id": annotator_id, "token": f"token-{annotator_id}"}
            for annotator_id in annotators
        ],
        "admin_token": admin_token,
    }
