#!/usr/bin/env python3
"""Generate the bundled mini fixtures under data/mini/.

Outputs:
  corpus.jsonl            article-per-line JSON (id, title, text), 1,000 sentences
  treebank-train.conllu   gold UPOS treebank from the same grammar
  treebank-dev.conllu     held-out split (different seed)
  vocab.txt               uncased WordPiece vocabulary

The grammar is small but keeps realistic properties: Zipf-skewed word
choice, ambiguous function words (so/since/yet/still/that), abbreviations,
decimals, non-ASCII names and a share of sentences without any connective.
Surface tokens follow the pipeline's word segmentation rules so gold tags
line up with tokenize_words() output.
"""

import argparse
import json
import os
import random

NOUNS = ("lake ice river city council storm harbor village market bridge "
         "museum painting treaty army road winter summer forest mine factory "
         "railway election league team player season album novel church "
         "castle island valley company engineer farmer student teacher king "
         "queen ship station school library mountain coast border").split()
PLURALS = {n: (n[:-1] + "ies" if n.endswith("y") and n[-2] not in "aeiou"
               else n + ("es" if n.endswith(("s", "sh", "ch", "x")) else "s"))
           for n in NOUNS}
PROPN = ("Paris London Berlin Smith Johnson Maria Henry Victoria Oxford "
         "Chicago Lisbon Edward Clara Danube Alps Vienna Zoë Müller").split()
INTRANS = ("froze rained collapsed flooded declined expanded retired "
           "recovered failed succeeded arrived returned closed opened "
           "survived won lost grew fell rose").split()
TRANS = ("built destroyed bought sold founded defeated visited painted "
         "wrote recorded replaced acquired designed restored captured "
         "abandoned expanded rebuilt joined left").split()
PARTICIPLES = ("built destroyed founded painted written recorded replaced "
               "designed restored captured abandoned rebuilt").split()
BASE_VERBS = ("return leave stay win recover expand close build sign "
              "attend").split()
ADJ = ("reflective large small old new cold warm famous popular important "
       "successful difficult dangerous stable narrow wide ancient modern "
       "unfrozen rural urban coastal northern southern").split()
ADV = ("entirely quickly slowly later soon again finally rapidly "
       "gradually largely").split()
DET = "the a this that every each".split()
PRON_SUBJ = "he she they it we".split()
ADP = "in near from during after before across along".split()
NUMS = "1990 1854 1923 2001 3.5 12 40 1066 7".split()
UNITS = ("km", "miles", "years", "people")

POS_ADV = ["therefore", "thus", "consequently", "hence", "accordingly"]
RARE_ADV = ["thence", "thereupon", "therefrom", "whence", "wherefore"]
NEG_ADV = ["however", "nevertheless"]

# Each entry: list of (word, tag).


def zipf_choice(rng, items, s=1.1):
    weights = [1.0 / (i + 1) ** s for i in range(len(items))]
    return rng.choices(items, weights=weights, k=1)[0]


def noun_phrase(rng, allow_pron=True, subject=True):
    r = rng.random()
    if allow_pron and subject and r < 0.18:
        return [(rng.choice(PRON_SUBJ), "PRON")]
    if r < 0.30:
        if rng.random() < 0.15:
            return [("Dr.", "PROPN"), (zipf_choice(rng, PROPN[3:6]), "PROPN")]
        return [(zipf_choice(rng, PROPN), "PROPN")]
    np = [(rng.choice(DET[:3]) if rng.random() < 0.8 else rng.choice(DET), "DET")]
    if rng.random() < 0.35:
        np.append((zipf_choice(rng, ADJ), "ADJ"))
    noun = zipf_choice(rng, NOUNS)
    if np[0][0] not in ("a", "every", "each", "this", "that") and rng.random() < 0.25:
        noun = PLURALS[noun]
    np.append((noun, "NOUN"))
    if rng.random() < 0.12:
        np += [("of", "ADP"), ("the", "DET"), (zipf_choice(rng, NOUNS), "NOUN")]
    if np[0][0] == "a" and np[1][0][0] in "aeiou":
        np[0] = ("an", "DET")
    return np


def prep_phrase(rng):
    r = rng.random()
    if r < 0.25:
        return [(rng.choice(ADP[:5]), "ADP"), (rng.choice(NUMS[:4]), "NUM")]
    if r < 0.35:
        return [("about", "ADP"), (rng.choice(NUMS[4:]), "NUM"),
                (rng.choice(UNITS), "NOUN")]
    return [(zipf_choice(rng, ADP), "ADP")] + noun_phrase(rng, allow_pron=False)


def verb_phrase(rng, still=False):
    vp = []
    if still:
        vp.append(("still", "ADV"))
    r = rng.random()
    if r < 0.28:
        vp.append((zipf_choice(rng, INTRANS), "VERB"))
        if rng.random() < 0.4:
            vp.append((zipf_choice(rng, ADV), "ADV"))
    elif r < 0.55:
        vp.append((zipf_choice(rng, TRANS), "VERB"))
        vp += noun_phrase(rng, allow_pron=False, subject=False)
    elif r < 0.70:
        vp.append((rng.choice(["was", "were"]), "AUX"))
        if rng.random() < 0.3:
            vp.append(("more", "ADV"))
        vp.append((zipf_choice(rng, ADJ), "ADJ"))
    elif r < 0.82:
        vp.append(("had", "AUX"))
        vp.append((zipf_choice(rng, PARTICIPLES), "VERB"))
        vp += noun_phrase(rng, allow_pron=False, subject=False)
    elif r < 0.92:
        vp.append((rng.choice(["did", "could", "would"]), "AUX"))
        vp.append(("not", "PART"))
        vp.append((zipf_choice(rng, BASE_VERBS), "VERB"))
    else:
        vp.append((rng.choice(["wanted", "tried", "decided"]), "VERB"))
        vp.append(("to", "PART"))
        vp.append((zipf_choice(rng, BASE_VERBS), "VERB"))
    if rng.random() < 0.3:
        vp += prep_phrase(rng)
    if rng.random() < 0.05:
        vp.append(("also", "ADV"))
    return vp


def clause(rng, still=False):
    return noun_phrase(rng) + verb_phrase(rng, still=still)


COMMA = (",", "PUNCT")
STOP = (".", "PUNCT")


def positive_sentence(rng):
    r = rng.random()
    if r < 0.30:
        kw = zipf_choice(rng, POS_ADV)
        return clause(rng) + [COMMA, (kw, "ADV")] + clause(rng) + [STOP]
    if r < 0.42:
        kw = zipf_choice(rng, POS_ADV)
        return [(kw, "ADV"), COMMA] + clause(rng) + [STOP]
    if r < 0.60:
        return clause(rng) + [COMMA, ("so", "ADV")] + clause(rng) + [STOP]
    if r < 0.68:
        return clause(rng) + [COMMA, ("and", "CCONJ"), ("so", "ADV")] + clause(rng) + [STOP]
    if r < 0.78:
        return [("since", "SCONJ")] + clause(rng) + [COMMA] + clause(rng) + [STOP]
    if r < 0.83:
        return clause(rng) + [("since", "ADP"), (rng.choice(NUMS[:4]), "NUM"), STOP]
    if r < 0.88:
        head = [("for", "ADP"), ("this", "DET"), ("reason", "NOUN")] if rng.random() < 0.5 else \
               [("to", "ADP"), ("that", "DET"), ("end", "NOUN")]
        return head + [COMMA] + clause(rng) + [STOP]
    if r < 0.93:
        tail = [("on", "ADP"), ("account", "NOUN"), ("of", "ADP")] + noun_phrase(rng, allow_pron=False)
        if rng.random() < 0.5:
            tail = [("on", "ADP"), ("the", "DET"), ("grounds", "NOUN"), ("that", "SCONJ")] + clause(rng)
        return clause(rng) + tail + [STOP]
    if r < 0.96:
        return clause(rng) + [COMMA, ("in", "ADP"), ("consequence", "NOUN"), COMMA] + clause(rng) + [STOP]
    kw = rng.choice(RARE_ADV)
    return clause(rng) + [COMMA, (kw, "ADV")] + clause(rng) + [STOP]


def negative_sentence(rng):
    r = rng.random()
    if r < 0.34:
        return clause(rng) + [COMMA, ("but", "CCONJ")] + clause(rng) + [STOP]
    if r < 0.50:
        kw = rng.choice(["although", "though"])
        return [(kw, "SCONJ")] + clause(rng) + [COMMA] + clause(rng) + [STOP]
    if r < 0.64:
        return [(rng.choice(NEG_ADV), "ADV"), COMMA] + clause(rng) + [STOP]
    if r < 0.78:
        return clause(rng, still=True) + [STOP]
    if r < 0.88:
        return clause(rng) + [COMMA, ("yet", "CCONJ")] + clause(rng) + [STOP]
    if r < 0.95:
        return [("on", "ADP"), ("the", "DET"), ("other", "ADJ"), ("hand", "NOUN"), COMMA] + clause(rng) + [STOP]
    return clause(rng) + [COMMA, ("though", "ADV"), STOP]


def mixed_sentence(rng):
    return (clause(rng) + [COMMA, ("but", "CCONJ")] + verb_phrase(rng)
            + [COMMA, ("and", "CCONJ"), ("so", "ADV")] + clause(rng) + [STOP])


def plain_sentence(rng):
    s = clause(rng)
    if rng.random() < 0.5:
        s += prep_phrase(rng)
    return s + [STOP]


def short_sentence(rng):
    return [(rng.choice(PRON_SUBJ), "PRON"), (zipf_choice(rng, INTRANS), "VERB"), STOP]


def sentence(rng):
    r = rng.random()
    if r < 0.06:
        return short_sentence(rng)
    if r < 0.20:
        return plain_sentence(rng)
    if r < 0.24:
        return mixed_sentence(rng)
    if r < 0.24 + 0.76 * 0.41:
        return positive_sentence(rng)
    return negative_sentence(rng)


def capitalize(tokens):
    w, t = tokens[0]
    if t != "PROPN":
        tokens[0] = (w[0].upper() + w[1:], t)
    return tokens


def surface(tokens):
    out = ""
    for i, (w, _) in enumerate(tokens):
        if i > 0 and w not in (",", "."):
            out += " "
        out += w
    return out


def split_abbrev(tokens):
    # tokenize_words peels the trailing period off "Dr."
    res = []
    for w, t in tokens:
        if w == "Dr.":
            res += [("Dr", t), (".", "PUNCT")]
        else:
            res.append((w, t))
    return res


def write_conllu(path, sents):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for i, toks in enumerate(sents):
            toks = split_abbrev(toks)
            f.write("# sent_id = gen-%d\n" % (i + 1))
            f.write("# text = %s\n" % surface(toks))
            for j, (w, t) in enumerate(toks):
                f.write("%d\t%s\t_\t%s\t_\t_\t_\t_\t_\t_\n" % (j + 1, w, t))
            f.write("\n")


SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
SUFFIX_PIECES = ["##s", "##es", "##ed", "##ing", "##ly", "##ive", "##er",
                 "##al", "##tion", "##ern", "##zen", "##fro", "##ance"]


def build_vocab(sentence_lists):
    freq = {}
    for sents in sentence_lists:
        for toks in sents:
            for w, _ in split_abbrev(toks):
                lw = w.lower()
                freq[lw] = freq.get(lw, 0) + 1
    words = sorted(freq, key=lambda w: (-freq[w], w))
    vocab = list(SPECIALS)
    seen = set(vocab)

    def add(tok):
        if tok not in seen:
            seen.add(tok)
            vocab.append(tok)

    for w in words:
        if not w.isascii():
            continue  # non-ASCII names fall back to [UNK]
        # Long rare words and a few chosen forms are left to subword pieces.
        if w in ("unfrozen", "reflective", "northern", "southern") or (len(w) >= 9 and freq[w] < 4):
            continue
        add(w)
    for w in ("un", "reflect", "north", "south"):
        add(w)
    for p in SUFFIX_PIECES:
        add(p)
    for c in "abcdefghijklmnopqrstuvwxyz0123456789":
        add(c)
    for c in "abcdefghijklmnopqrstuvwxyz0123456789.":
        add("##" + c)
    return vocab


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "mini"))
    ap.add_argument("--seed", type=int, default=20230)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    rng = random.Random(args.seed)
    corpus_sents = []
    docs = []
    doc_id = 1000
    while len(corpus_sents) < 1000:
        n = min(rng.randint(1, 6), 1000 - len(corpus_sents))
        sents = [capitalize(sentence(rng)) for _ in range(n)]
        corpus_sents += sents
        docs.append({"id": doc_id, "title": "Article %d" % doc_id,
                     "text": " ".join(surface(s) for s in sents)})
        doc_id += rng.randint(1, 3)

    train_rng = random.Random(args.seed + 1)
    train = [capitalize(sentence(train_rng)) for _ in range(2000)]
    dev_rng = random.Random(args.seed + 2)
    dev = [capitalize(sentence(dev_rng)) for _ in range(500)]

    with open(os.path.join(args.out, "corpus.jsonl"), "w", encoding="utf-8", newline="\n") as f:
        for d in docs:
            f.write(json.dumps(d, ensure_ascii=False) + "\n")
    write_conllu(os.path.join(args.out, "treebank-train.conllu"), train)
    write_conllu(os.path.join(args.out, "treebank-dev.conllu"), dev)
    vocab = build_vocab([corpus_sents, train])
    with open(os.path.join(args.out, "vocab.txt"), "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(vocab) + "\n")
    print("docs=%d sentences=%d vocab=%d" % (len(docs), len(corpus_sents), len(vocab)))


if __name__ == "__main__":
    main()
