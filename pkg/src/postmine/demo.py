"""Deterministic synthetic demo bundle.

Writes every input file the CLI needs (posts, institutions, labels,
connotation lexicon, embeddings, language model, correction dictionary)
plus a ready-to-run config.json into one directory.  The content is
fake but shaped like the real problem: short noisy posts with hashtags,
mentions, elongations and duplicates; a 950-entry annotated verb
lexicon; a 1,000-word embedding store.  Same seed, same bytes.

    python -m postmine.demo OUTDIR --seed 42
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .events import bundled_inventory

EMBEDDING_DIM = 25
LEXICON_SIZE = 950
EMBEDDING_WORDS = 1000

# Inventory verbs deliberately left unannotated: the first three are
# embedded (scored by propagation), the last is unembedded (unscorable).
PROPAGATED_VERBS = ("pester", "bother", "ridicule")
UNSCORABLE_VERB = "whistle"

NEGATIVE_VERBS = {
    "abuse", "accuse", "assault", "attack", "blame", "bully", "catcall",
    "chase", "coerce", "corner", "degrade", "demean", "disrespect",
    "embarrass", "expose", "flash", "follow", "force", "grab", "grope",
    "harass", "hit", "humiliate", "hurt", "ignore", "insult", "intimidate",
    "kick", "leer", "mock", "molest", "ogle", "photograph", "pinch",
    "punch", "push", "rape", "scare", "shame", "shout", "shove",
    "silence", "slap", "stalk", "taunt", "tease", "terrify", "threaten",
    "touch",
}

PHYSICAL_VERBS = ("grabbed", "pushed", "groped", "hit", "shoved", "punched", "slapped")
VERBAL_VERBS = ("insulted", "mocked", "threatened", "taunted", "shouted", "teased")
VISUAL_VERBS = ("leered", "flashed", "ogled", "photographed", "stalked")

PEER_AGENTS = ("classmate", "teammate", "roommate", "friend")
FACULTY_AGENTS = ("professor", "teacher", "coach", "boss")
THIRD_AGENTS = ("stranger", "man", "guy", "neighbor")

PLACES = ("campus", "dorm", "party", "library", "work", "class", "gym", "station")

THEMES = {
    "story": ("story", "scared", "silent", "memory", "young", "night",
              "afraid", "alone", "secret", "room"),
    "support": ("support", "courage", "brave", "listen", "believe",
                "together", "strength", "healing", "hope", "voice"),
    "action": ("policy", "report", "office", "complaint", "investigation",
               "dean", "action", "change", "rules", "petition"),
}

HASHTAGS = ("#speakup", "#metoo", "#campusstory", "#believeher")

ABBREVIATIONS = {
    "u": "you",
    "ur": "your",
    "omg": "oh my god",
    "idk": "i do not know",
    "thx": "thanks",
    "pls": "please",
    "b4": "before",
}

SEGMENT_WORDS = {
    "speak": 400, "up": 900, "me": 1200, "too": 800, "campus": 300,
    "story": 500, "believe": 350, "her": 700, "hello": 250, "world": 260,
    "cam": 5, "pus": 2, "sto": 3, "ry": 2, "hash": 40, "tag": 50,
}

SEGMENT_BIGRAMS = {
    ("speak", "up"): 120, ("me", "too"): 300, ("campus", "story"): 45,
    ("believe", "her"): 60, ("hello", "world"): 80,
}


def _frame_scores(rng: np.random.Generator, negative: bool) -> tuple[float, ...]:
    jitter = rng.uniform(-0.15, 0.15, size=5)
    if negative:
        base = (-0.65, -0.55, -0.7, -0.5, 0.55)
    else:
        base = (0.55, 0.5, 0.45, 0.4, 0.35)
    return tuple(round(float(np.clip(b + j, -1.0, 1.0)), 4) for b, j in zip(base, jitter))


def write_demo_bundle(directory: str | Path, seed: int = 42) -> dict[str, Path]:
    """Generate the bundle into ``directory`` and return the file map."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths: dict[str, Path] = {}

    inventory = bundled_inventory()
    reserved = set(PROPAGATED_VERBS) | {UNSCORABLE_VERB}
    annotated_real = sorted(inventory.lemmas - reserved)

    # --- connotation lexicon: real verbs plus synthetic filler lemmas ---
    lexicon_rows = []
    for lemma in annotated_real:
        scores = _frame_scores(rng, lemma in NEGATIVE_VERBS)
        lexicon_rows.append((lemma, scores))
    for i in range(LEXICON_SIZE - len(annotated_real)):
        scores = _frame_scores(rng, bool(rng.integers(0, 2)))
        lexicon_rows.append((f"synverb{i:04d}", scores))
    paths["lexicon"] = directory / "lexicon.tsv"
    with open(paths["lexicon"], "w", encoding="utf-8") as fh:
        for lemma, scores in lexicon_rows:
            fh.write(lemma + "\t" + "\t".join(f"{s:.4f}" for s in scores) + "\n")

    # --- embeddings: every lexicon lemma, the propagated verbs, filler ---
    words = [lemma for lemma, _ in lexicon_rows]
    words.extend(PROPAGATED_VERBS)
    fillers = sorted(set(
        w for theme in THEMES.values() for w in theme
    ) | set(PLACES) | set(PEER_AGENTS) | set(FACULTY_AGENTS) | set(THIRD_AGENTS))
    for w in fillers:
        if len(words) >= EMBEDDING_WORDS:
            break
        if w not in words:
            words.append(w)
    i = 0
    while len(words) < EMBEDDING_WORDS:
        words.append(f"filler{i:03d}")
        i += 1
    paths["embeddings"] = directory / "embeddings.txt"
    with open(paths["embeddings"], "w", encoding="utf-8") as fh:
        for word in words:
            # aggressive verbs cluster so propagation neighbors make sense
            base = rng.normal(0.0, 1.0, EMBEDDING_DIM)
            if word in NEGATIVE_VERBS or word in PROPAGATED_VERBS:
                base[0] += 3.0
            fh.write(word + " " + " ".join(f"{v:.6f}" for v in base) + "\n")

    # --- language model for hashtag segmentation ---
    paths["language_model"] = directory / "langmodel.tsv"
    with open(paths["language_model"], "w", encoding="utf-8") as fh:
        fh.write("UNIGRAM\n")
        for word, count in SEGMENT_WORDS.items():
            fh.write(f"{word}\t{count}\n")
        fh.write("BIGRAM\n")
        for (w1, w2), count in SEGMENT_BIGRAMS.items():
            fh.write(f"{w1}\t{w2}\t{count}\n")

    # --- correction dictionary ---
    paths["abbreviations"] = directory / "abbreviations.tsv"
    with open(paths["abbreviations"], "w", encoding="utf-8") as fh:
        for key, expansion in ABBREVIATIONS.items():
            fh.write(f"{key}\t{expansion}\n")
    valid = set(SEGMENT_WORDS)
    valid.update(w for e in ABBREVIATIONS.values() for w in e.split())
    valid.update(("really", "so", "sad", "cool", "never", "again", "today"))
    for theme in THEMES.values():
        valid.update(theme)
    paths["wordlist"] = directory / "wordlist.txt"
    with open(paths["wordlist"], "w", encoding="utf-8") as fh:
        for word in sorted(valid):
            fh.write(word + "\n")
    paths["censored"] = directory / "censored.txt"
    with open(paths["censored"], "w", encoding="utf-8") as fh:
        fh.write("s**t\nf**k\nd**n\n")

    # --- institutions ---
    regions = ("northeast", "south", "west", "midwest")
    institutions = []
    for i in range(40):
        institutions.append({
            "institution_id": f"u{i + 1:03d}",
            "enrollment": int(rng.integers(2000, 45000)),
            "mf_ratio": round(float(rng.uniform(0.5, 1.5)), 2),
            "sector": "private" if rng.integers(0, 2) else "public",
            "region": regions[i % 4],
            "reported_cases": int(rng.integers(0, 60)),
        })
    paths["institutions"] = directory / "institutions.csv"
    with open(paths["institutions"], "w", encoding="utf-8") as fh:
        fh.write("institution_id,enrollment,mf_ratio,sector,region,reported_cases\n")
        for inst in institutions:
            fh.write(",".join(str(inst[k]) for k in (
                "institution_id", "enrollment", "mf_ratio", "sector",
                "region", "reported_cases")) + "\n")

    # --- posts and labels ---
    type_pools = {
        "physical": PHYSICAL_VERBS, "verbal": VERBAL_VERBS, "visual": VISUAL_VERBS,
    }
    participant_pools = {
        "peer": PEER_AGENTS, "faculty": FACULTY_AGENTS, "third_party": THIRD_AGENTS,
    }
    theme_names = tuple(THEMES)
    posts = []
    labels = []
    next_user = 1
    next_post = 1

    def new_ids() -> tuple[str, str]:
        nonlocal next_user, next_post
        pid, uid = f"p{next_post:04d}", f"user{next_user:03d}"
        next_post += 1
        next_user += 1
        return pid, uid

    def theme_sentence(theme: str) -> str:
        picks = rng.choice(THEMES[theme], size=4, replace=False)
        return " ".join(str(w) for w in picks)

    for htype, verbs in type_pools.items():
        for participant, agents in participant_pools.items():
            for _ in range(int(rng.integers(2, 5))):
                pid, uid = new_ids()
                verb = str(rng.choice(verbs))
                agent = str(rng.choice(agents))
                place = str(rng.choice(PLACES))
                theme = theme_names[int(rng.integers(0, 3))]
                if rng.integers(0, 2):
                    narrative = f"i was {verb} by my {agent} at the {place}."
                else:
                    narrative = f"my {agent} {verb} me at the {place}."
                text = f"{narrative} {theme_sentence(theme)} {str(rng.choice(HASHTAGS))}"
                posts.append({
                    "post_id": pid, "user_id": uid,
                    "institution_id": institutions[int(rng.integers(0, 40))]["institution_id"],
                    "timestamp": int(rng.integers(1508000000, 1510700000)),
                    "text": text,
                })
                labels.append((pid, htype, participant))

    # one labeled post whose only verb cannot be scored
    pid, uid = new_ids()
    posts.append({
        "post_id": pid, "user_id": uid,
        "institution_id": institutions[int(rng.integers(0, 40))]["institution_id"],
        "timestamp": int(rng.integers(1508000000, 1510700000)),
        "text": f"the {str(rng.choice(THIRD_AGENTS))} whistled at me near the station.",
    })
    labels.append((pid, "verbal", "third_party"))

    noise_bits = (
        "omg i can not believe this is still happening",
        "u should come to the meeting reallyyy soon",
        "so proud of everyone telling their story today :(",
        "read this thread https://news.example.net/a113 please",
        "thanks @campusvoice for listening 😔",
        "this is such s**t honestly",
        "contact the office at help@example.org b4 friday",
        "sooo many voices together #speakup",
    )
    for _ in range(55):
        pid, uid = new_ids()
        theme = theme_names[int(rng.integers(0, 3))]
        bits = [theme_sentence(theme)]
        if rng.integers(0, 3) == 0:
            bits.append(str(rng.choice(noise_bits)))
        if rng.integers(0, 2):
            bits.append(str(rng.choice(HASHTAGS)))
        posts.append({
            "post_id": pid, "user_id": uid,
            "institution_id": institutions[int(rng.integers(0, 40))]["institution_id"],
            "timestamp": int(rng.integers(1508000000, 1510700000)),
            "text": " ".join(bits),
        })

    # duplicates for dedup to eat: a repeated post_id and a same-user
    # retype of an earlier text with different case and spacing
    twin = dict(posts[-1])
    twin["timestamp"] = twin["timestamp"] + 500
    posts.append(twin)
    retype = dict(posts[-3])
    retype["post_id"] = f"p{next_post:04d}"
    next_post += 1
    retype["text"] = "  " + retype["text"].upper() + "  "
    retype["timestamp"] = retype["timestamp"] + 900
    posts.append(retype)

    paths["posts"] = directory / "posts.jsonl"
    with open(paths["posts"], "w", encoding="utf-8") as fh:
        for post in posts:
            fh.write(json.dumps(post, ensure_ascii=True) + "\n")

    paths["labels"] = directory / "labels.csv"
    with open(paths["labels"], "w", encoding="utf-8") as fh:
        fh.write("post_id,harassment_type,participant\n")
        for pid, htype, participant in labels:
            fh.write(f"{pid},{htype},{participant}\n")

    config = {
        "posts": str(paths["posts"]),
        "institutions": str(paths["institutions"]),
        "labels": str(paths["labels"]),
        "lexicon": str(paths["lexicon"]),
        "embeddings": str(paths["embeddings"]),
        "language_model": str(paths["language_model"]),
        "abbreviations": str(paths["abbreviations"]),
        "wordlist": str(paths["wordlist"]),
        "censored": str(paths["censored"]),
        "topics": {"k_candidates": [2, 3, 4], "min_df": 2, "iters": 80, "top_words": 13},
        "propagation": {"k": 10, "min_similarity": 0.0},
        "seed": seed,
        "out_dir": str(directory / "out"),
    }
    paths["config"] = directory / "config.json"
    with open(paths["config"], "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)
        fh.write("\n")
    return paths


def main() -> None:
    import argparse

    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("directory", help="output directory for the bundle")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()
    paths = write_demo_bundle(args.directory, args.seed)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
