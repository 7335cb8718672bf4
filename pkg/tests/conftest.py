from __future__ import annotations

import json
from pathlib import Path

import pytest

from fnbuilder import ASpec, FeExampleSpec, FeSpec, FrameSpec, SentSpec, write_corpus

from framekit.corpus import (
    Coreness,
    FeAnnotation,
    FrameDef,
    FrameElementDef,
    FrameInstance,
    Span,
    SplitConfig,
    load_fulltext,
    load_lexicon,
    split_corpus,
)

S1 = "Your contribution to Goodwill will mean more than you may know."
S2 = (
    "Since the early 1990s , China has improved its export controls , including the "
    "promulgation of regulations on nuclear and nuclear dual - use exports and has pledged "
    "to halt exports of nuclear technology to un - safeguarded facilities."
)
S3 = "The war began in 1939 ."
S4 = "Everyone is aware of the dangers , because the signs are everywhere ."
S5 = "She bought books and more books yesterday ."
S6 = "Short one ."
S7 = "The conflict commenced after the treaty failed ."
S8 = "The purge started quietly ."
S9 = "They departed the city at dawn ."
S10 = "He is aware of it , regarding taxes ."
S11 = "He gave the project up entirely ."
S12 = "Nothing here ."
S13 = "The war resumed ."


def mini_frames() -> list[FrameSpec]:
    return [
        FrameSpec(
            name="Donation",
            definition="A Donor transfers a Theme to a Recipient.",
            fes=[
                FeSpec("Donor", "Core", "Don", "The person who gives the Theme away."),
                FeSpec("Recipient", "Core", "Rec", "The entity that ends up with the Theme."),
                FeSpec("Theme", "Core", "Thm", "The object changing hands."),
                FeSpec("Place", "Peripheral", "Pla", "Where the event takes place."),
            ],
            lus=["donation.n", "contribution.n"],
            exemplars=[
                FeExampleSpec(
                    "You gave books to the library.",
                    fex=[("Donor", "You"), ("Theme", "books"), ("Recipient", "to the library")],
                )
            ],
        ),
        FrameSpec(
            name="Awareness",
            definition="A Cognizer has a piece of Content in their model of the world.",
            fes=[
                FeSpec(
                    "Cognizer",
                    "Core",
                    "Cog",
                    "The Cognizer is the person whose awareness of phenomena is at question.",
                    examples=[
                        FeExampleSpec(
                            "Your boss is aware of your commitment.",
                            fex=[("Cog", "Your boss")],
                            target="aware",
                        )
                    ],
                ),
                FeSpec("Content", "Core", "Cont", "The object of the Cognizer's awareness."),
                FeSpec("Topic", "Peripheral", "Top", "A general field the Content belongs to."),
                FeSpec(
                    "Explanation",
                    "Extra-Thematic",
                    "Exp",
                    "The reason why or how it came to be that the Cognizer has awareness "
                    "of the Topic or Content.",
                ),
            ],
            lus=["aware.a", "awareness.n"],
            exemplars=[
                FeExampleSpec(
                    "Your boss is aware of your commitment.",
                    fex=[("Cognizer", "Your boss")],
                )
            ],
        ),
        FrameSpec(
            name="Activity_start",
            definition="An Agent begins an Activity.",
            fes=[
                FeSpec("Agent", "Core", "Agt", "The being that starts the Activity."),
                FeSpec("Activity", "Core", "Act", "The Activity that is started."),
                FeSpec("Time", "Peripheral", "Tim", "When the Activity starts."),
            ],
            lus=["begin.v", "start.v", "commence.v"],
        ),
        FrameSpec(
            name="Process_start",
            definition="A Process begins at some Time.",
            fes=[
                FeSpec("Event", "Core", "Evt", "The Process that starts."),
                FeSpec("Time", "Peripheral", "Tim", "When the Process starts."),
            ],
            lus=["begin.v", "start.v"],
        ),
        FrameSpec(
            name="Hostile_encounter",
            definition="Sides clash over an Issue.",
            fes=[
                FeSpec("Sides", "Core", "Sds", "All participants in the encounter."),
                FeSpec("Side_1", "Core-Unexpressed", "S1", "One side of the encounter."),
                FeSpec("Issue", "Peripheral", "Iss", "What the encounter is about."),
            ],
            lus=["war.n", "conflict.n"],
        ),
        FrameSpec(
            name="Law",
            definition="A Law regulates activities within a Jurisdiction &amp; dictates conduct.",
            fes=[
                FeSpec("Law", "Core", "Law", "This FE identifies the rule designed to guide behavior."),
                FeSpec("Forbidden", "Core", "Forb", "The conduct the Law rules out."),
                FeSpec("Jurisdiction", "Peripheral", "Jur", "Where the Law applies."),
            ],
            lus=["regulation.n", "law.n"],
        ),
        FrameSpec(
            name="Commerce_buy",
            definition="A Buyer exchanges Money for Goods with a Seller.",
            fes=[
                FeSpec("Buyer", "Core", "Byr", "The party that wants the Goods."),
                FeSpec("Goods", "Core", "Gds", "What the Buyer acquires."),
                FeSpec("Seller", "Core", "Slr", "The party that provides the Goods."),
                FeSpec("Money", "Peripheral", "Mny", "What the Buyer pays."),
            ],
            lus=["buy.v"],
        ),
        FrameSpec(
            name="Departing",
            definition="A Theme leaves a Source.",
            fes=[
                FeSpec("Theme", "Core", "Thm", "The entity that leaves."),
                FeSpec("Source", "Core", "Src", "The place left behind."),
            ],
            lus=["depart.v"],
        ),
        FrameSpec(
            name="Abandonment",
            definition="An Agent gives a Theme up.",
            fes=[
                FeSpec("Agent", "Core", "Agt", "The being that abandons the Theme."),
                FeSpec("Theme", "Core", "Thm", "What is abandoned."),
            ],
            lus=["give up.v"],
        ),
    ]


def mini_documents() -> dict[str, list[SentSpec]]:
    return {
        "ANC__TestDoc1": [
            SentSpec(
                S1,
                asets=[
                    ASpec(status="UNANN", pos_layer=True),
                    ASpec(
                        frame="Donation",
                        lu="contribution.n",
                        targets=["contribution"],
                        fes=[("Donor", "Your"), ("Recipient", "to Goodwill")],
                    ),
                    # Exact duplicate of the set above; dropped with a counter.
                    ASpec(
                        frame="Donation",
                        lu="contribution.n",
                        targets=["contribution"],
                        fes=[("Donor", "Your"), ("Recipient", "to Goodwill")],
                    ),
                ],
            ),
            SentSpec(
                S2,
                asets=[
                    ASpec(
                        frame="Law",
                        lu="regulation.n",
                        targets=["regulations"],
                        fes=[
                            ("Law", "regulations"),
                            ("Forbidden", "on nuclear and nuclear dual - use exports"),
                        ],
                    )
                ],
            ),
            SentSpec(
                S3,
                asets=[
                    ASpec(frame="Hostile_encounter", lu="war.n", targets=["war"], fes=[]),
                    ASpec(
                        frame="Activity_start",
                        lu="begin.v",
                        targets=["began"],
                        fes=[("Activity", "The war"), ("Time", "in 1939")],
                        ni_fes=[("Agent", "INI")],
                    ),
                ],
            ),
            SentSpec(S12, asets=[ASpec(status="UNANN", pos_layer=True)]),
        ],
        "ANC__TestDoc2": [
            SentSpec(
                S4,
                asets=[
                    ASpec(
                        frame="Awareness",
                        lu="aware.a",
                        targets=["aware"],
                        fes=[
                            ("Cognizer", "Everyone"),
                            ("Content", "of the dangers"),
                            ("Explanation", "because the signs are everywhere"),
                        ],
                        fes_rank2=[("Topic", "the dangers")],
                    )
                ],
            ),
            SentSpec(
                S5,
                asets=[
                    ASpec(
                        frame="Commerce_buy",
                        lu="buy.v",
                        targets=["bought"],
                        fes=[("Buyer", "She"), ("Goods", "books", 0), ("Goods", "books", 1)],
                    )
                ],
            ),
            SentSpec(
                S6,
                asets=[
                    ASpec(frame="Donation", lu="donation.n", targets=["Short"], raw_fes=[("Theme", 2, 50)]),
                    ASpec(frame="Test35", lu="short.a", targets=["Short"]),
                    ASpec(frame="Donation", lu="donation.n", omit_target_layer=True),
                    ASpec(
                        frame="Donation",
                        lu="donation.n",
                        targets=["one"],
                        fes=[("Donor", "Short one"), ("Theme", "one")],
                    ),
                ],
            ),
            SentSpec(
                S11,
                asets=[
                    ASpec(
                        frame="Abandonment",
                        lu="give up.v",
                        targets=["gave", "up"],
                        fes=[("Agent", "He"), ("Theme", "the project")],
                    )
                ],
            ),
        ],
        "ANC__TestDoc3": [
            SentSpec(
                S7,
                asets=[
                    ASpec(
                        frame="Hostile_encounter",
                        lu="conflict.n",
                        targets=["conflict"],
                        fes=[("Issue", "after the treaty failed")],
                    ),
                    ASpec(
                        frame="Activity_start",
                        lu="commence.v",
                        targets=["commenced"],
                        fes=[("Activity", "The conflict")],
                    ),
                ],
            ),
            SentSpec(
                S8,
                asets=[
                    ASpec(frame="Process_start", lu="start.v", targets=["started"], fes=[("Event", "The purge")])
                ],
            ),
            SentSpec(
                S9,
                asets=[
                    ASpec(
                        frame="Departing",
                        lu="depart.v",
                        targets=["departed"],
                        fes=[("Theme", "They"), ("Source", "the city")],
                    )
                ],
            ),
            SentSpec(
                S10,
                asets=[
                    ASpec(
                        frame="Awareness",
                        lu="aware.a",
                        targets=["aware"],
                        fes=[("Cognizer", "He"), ("Topic", "regarding taxes")],
                    )
                ],
            ),
        ],
        "ANC__TestDoc4": [
            SentSpec(S13, asets=[ASpec(frame="Hostile_encounter", lu="war.n", targets=["war"], fes=[])]),
        ],
    }


MINI_SPLIT = {
    "train_docs": ["ANC__TestDoc1", "ANC__TestDoc2"],
    "test_docs": ["ANC__TestDoc3"],
}


@pytest.fixture(scope="session")
def mini_fn_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("mini_fn")
    return write_corpus(root, mini_frames(), mini_documents())


@pytest.fixture(scope="session")
def mini_split_path(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("mini_split") / "split.json"
    path.write_text(json.dumps(MINI_SPLIT), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def mini_lexicon(mini_fn_dir):
    return load_lexicon(mini_fn_dir)


@pytest.fixture(scope="session")
def mini_loaded(mini_fn_dir, mini_lexicon):
    return load_fulltext(mini_fn_dir, mini_lexicon)


@pytest.fixture(scope="session")
def mini_parts(mini_loaded, mini_lexicon, mini_split_path):
    documents, _ = mini_loaded
    config = SplitConfig.from_file(mini_split_path)
    train, test, excluded = split_corpus(documents, config, mini_lexicon)
    return train, test, excluded


@pytest.fixture(scope="session")
def mini_cache_dir(tmp_path_factory, mini_fn_dir, mini_split_path) -> Path:
    """Ingest cache built through the CLI, shared by command tests."""
    from click.testing import CliRunner

    from framekit.cli import main

    out = tmp_path_factory.mktemp("mini_cache")
    result = CliRunner().invoke(
        main,
        [
            "ingest",
            "--framenet-dir",
            str(mini_fn_dir),
            "--split-config",
            str(mini_split_path),
            "--out",
            str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    return out


# --- standalone fixtures used by codec and metric tests -------------------------


@pytest.fixture()
def donation_frame() -> FrameDef:
    return FrameDef(
        name="Donation",
        definition="A Donor transfers a Theme to a Recipient.",
        fe_defs=(
            FrameElementDef("Donor", Coreness.CORE),
            FrameElementDef("Recipient", Coreness.CORE),
            FrameElementDef("Theme", Coreness.CORE),
            FrameElementDef("Place", Coreness.PERIPHERAL),
        ),
    )


@pytest.fixture()
def donation_instance() -> FrameInstance:
    return FrameInstance(
        sentence_id="s1",
        document_id="d1",
        sentence_text=S1,
        frame_name="Donation",
        target=(Span.from_offsets(S1, 5, 17),),
        fes=(
            FeAnnotation("Donor", Span.from_offsets(S1, 0, 4)),
            FeAnnotation("Recipient", Span.from_offsets(S1, 18, 29)),
        ),
    )
