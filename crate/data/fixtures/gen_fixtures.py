#!/usr/bin/env python3
"""Regenerates the synthetic workbench fixtures under data/fixtures.

Every file is written in the workbench's canonical JSON-lines form (compact
separators, struct field order) so that exported question sets can be
compared byte for byte with their source.
"""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def dump(path, records):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(json.dumps(r, separators=(",", ":"), ensure_ascii=False) + "\n")


def doc(doc_id, *paragraphs):
    return {"doc_id": doc_id, "paragraphs": list(paragraphs)}


def question(qid, series, text):
    return {"question_id": qid, "series_id": series, "text": text}


def key(qid, pattern, judged):
    return {"question_id": qid, "patterns": [pattern], "judged_docs": judged}


def write_config(path, body):
    path.write_text(body.lstrip(), encoding="utf-8")


# Twenty capital-city questions. For four of them the answer sits in a
# document that shares no term with the question, so no run can find it.
UNREACHABLE = {3, 8, 13, 18}


def difficult():
    out = ROOT / "difficult"
    docs, questions, keys = [], [], []
    for i in range(1, 21):
        land, city = f"Land{i:02}", f"City{i:02}"
        qid = f"c{i:02}"
        questions.append(question(qid, "capitals", f"What is the capital of {land}?"))
        if i in UNREACHABLE:
            docs.append(doc(f"LAND{i:02}", f"{land} is a quiet province in the north."))
            docs.append(doc(f"CITY{i:02}", f"{city} hosts the parliament and the royal palace."))
            keys.append(key(qid, rf"\b{city}\b", [f"CITY{i:02}"]))
        else:
            docs.append(
                doc(
                    f"LAND{i:02}",
                    f"{land} is a quiet province in the north.",
                    f"The capital of {land} is {city}.",
                )
            )
            keys.append(key(qid, rf"\b{city}\b", [f"LAND{i:02}"]))
    dump(out / "corpus.jsonl", docs)
    dump(out / "questions.jsonl", questions)
    dump(out / "answers.jsonl", keys)
    write_config(
        out / "workbench.toml",
        """
# Difficult-question mining: 20 questions, 4 of them unanswerable by retrieval.
run_id = "difficult"
output_dir = "out"

[corpus]
path = "corpus.jsonl"
format = "jsonl"

[index]
levels = ["document", "passage"]

[[ranking]]
name = "tfidf"
scheme = "tfidf"

[[ranking]]
name = "bm25"
scheme = "bm25"

[data]
questions = "questions.jsonl"
answers = "answers.jsonl"

[eval]
cutoff = 50
ranks = [5, 10, 20, 50]
n = 20
threshold = 0.0
""",
    )


# One difficult question whose answer passage contains a single helpful
# word. "started" also occurs in the answer passage but two short noise
# passages repeat it, so it cannot lift the answer into the top 2.
def hew():
    out = ROOT / "hew"
    docs = [
        doc("FAIR01", "The exposition started in 1889."),
        doc("FAIR02", "A grand parade crossed the square on a sunny afternoon with music and flags."),
        doc("FAIR03", "Fair weather lasted through the long summer across the quiet valley towns."),
        doc("FAIR04", "started started started again"),
        doc("FAIR05", "started started later"),
    ]
    dump(out / "corpus.jsonl", docs)
    dump(out / "questions.jsonl", [question("f1", "fair", "When did the grand fair open?")])
    dump(out / "answers.jsonl", [key("f1", r"\b1889\b", ["FAIR01"])])
    write_config(
        out / "workbench.toml",
        """
# Planted helpful extension word: the only HEW of f1 is "exposition".
run_id = "hew"
output_dir = "out"

[corpus]
path = "corpus.jsonl"
format = "jsonl"

[index]
levels = ["passage"]

[[ranking]]
name = "bm25"
scheme = "bm25"

[data]
questions = "questions.jsonl"
answers = "answers.jsonl"

[eval]
cutoff = 5
ranks = [1, 2, 5]
n = 2
threshold = 0.0

[expansion]
level = "passage"
config = "bm25"
n = 2
r = [1, 5]
k = 2
irt_r = 5
""",
    )


# Blind relevance feedback against noise: every question finds its answer
# at rank 1 through the town name alone, and the next units are market
# passages of the same town that repeat five words three times each.
# Feedback picks those words and the expanded query ranks all the market
# passages above the answer.
RIVER_WORDS = [
    "amber", "birch", "cedar", "delta", "ember", "fjord", "grove", "heath", "inlet", "jade",
]
NOISE_WORDS = [
    ["stall", "bazaar", "vendor", "coin", "crowd"],
    ["cart", "barrel", "ledger", "haggle", "spice"],
    ["loom", "fabric", "dye", "thread", "spindle"],
    ["anvil", "forge", "bellows", "tongs", "ingot"],
    ["kiln", "clay", "glaze", "potter", "urn"],
    ["saddle", "harness", "bridle", "stirrup", "tack"],
    ["lantern", "wick", "tallow", "candle", "soot"],
    ["barley", "malt", "brew", "cask", "hops"],
    ["quill", "parchment", "ink", "scribe", "seal"],
    ["hammer", "chisel", "timber", "plank", "nail"],
]
NOISE_PER_QUESTION = 30


def rf_adversarial():
    out = ROOT / "rf-adversarial"
    docs, questions, keys = [], [], []
    for i in range(1, 11):
        town, river = f"Town{i:02}", RIVER_WORDS[i - 1].capitalize()
        qid = f"r{i:02}"
        questions.append(question(qid, "rivers", f"Which river flows through {town}?"))
        docs.append(doc(f"RIVER{i:02}", f"{town} sits beside the {river}, a wide and slow stream."))
        keys.append(key(qid, rf"\b{river}\b", [f"RIVER{i:02}"]))
        words = NOISE_WORDS[i - 1]
        for j in range(1, NOISE_PER_QUESTION + 1):
            body = " ".join(w for w in words for _ in range(3))
            docs.append(doc(f"MARKET{i:02}{j:02}", f"{town} market day: {body}."))
    dump(out / "corpus.jsonl", docs)
    dump(out / "questions.jsonl", questions)
    dump(out / "answers.jsonl", keys)
    write_config(
        out / "workbench.toml",
        """
# Adversarial blind relevance feedback: expansion can only hurt coverage.
run_id = "rf"
output_dir = "out"

[corpus]
path = "corpus.jsonl"
format = "jsonl"

[index]
levels = ["document", "passage"]

[[ranking]]
name = "bm25"
scheme = "bm25"

[data]
questions = "questions.jsonl"
answers = "answers.jsonl"

[eval]
cutoff = 50
ranks = [5, 10, 20, 50]
n = 20

[expansion]
level = "passage"
config = "bm25"
n = 20
r = [5, 50]
k = 5
irt_r = 5
""",
    )


if __name__ == "__main__":
    difficult()
    hew()
    rf_adversarial()
