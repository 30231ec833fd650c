#!/usr/bin/env python3
"""Writes the synthetic Czech fixtures used by the test suites.

Output is a pure function of the seeds below, so rerunning the script
reproduces crates/core/tests/data byte for byte.
"""

import os
import random
import sys

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "data")

CASES = "1234567"


def noun_tag(gender, number, case, abbr=False):
    if abbr:
        return "NN%sXX-----A---8" % gender
    return "NN%s%s%s-----A----" % (gender, number, case)


def adj_tag(gender, number, case):
    return "AA%s%s%s----1A----" % (gender, number, case)


def verb_tag(number, aspect):
    return "VB-%s---3P-AA%s--" % (number, aspect)


def inf_tag(aspect):
    return "Vf--------A-%s--" % aspect


def prep_tag(case):
    return "RR--%s----------" % case


PUNCT = "Z:-------------"
ADVERB = "Db-------------"
COORD = "J^-------------"
SUBORD = "J,-------------"

# lemma (raw, possibly with comments), gender, singular forms 1-7, plural 1-7
NOUNS = [
    ("žena", "F", "žena ženy ženě ženu ženo ženě ženou", "ženy žen ženám ženy ženy ženách ženami"),
    ("škola", "F", "škola školy škole školu školo škole školou", "školy škol školám školy školy školách školami"),
    ("voda", "F", "voda vody vodě vodu vodo vodě vodou", "vody vod vodám vody vody vodách vodami"),
    ("ryba", "F", "ryba ryby rybě rybu rybo rybě rybou", "ryby ryb rybám ryby ryby rybách rybami"),
    ("kniha", "F", "kniha knihy knize knihu kniho knize knihou", "knihy knih knihám knihy knihy knihách knihami"),
    ("Praha_;G", "F", "Praha Prahy Praze Prahu Praho Praze Prahou", None),
    ("hrad", "I", "hrad hradu hradu hrad hrade hradu hradem", "hrady hradů hradům hrady hrady hradech hrady"),
    ("les", "I", "les lesa lesu les lese lese lesem", "lesy lesů lesům lesy lesy lesích lesy"),
    ("vlak", "I", "vlak vlaku vlaku vlak vlaku vlaku vlakem", "vlaky vlaků vlakům vlaky vlaky vlacích vlaky"),
    ("dům", "I", "dům domu domu dům dome domě domem", "domy domů domům domy domy domech domy"),
    ("stát-1_^(státní_útvar)", "I", "stát státu státu stát státe státě státem", "státy států státům státy státy státech státy"),
    ("město", "N", "město města městu město město městě městem", "města měst městům města města městech městy"),
    ("slovo", "N", "slovo slova slovu slovo slovo slově slovem", "slova slov slovům slova slova slovech slovy"),
    ("auto", "N", "auto auta autu auto auto autě autem", "auta aut autům auta auta autech auty"),
    ("pivo", "N", "pivo piva pivu pivo pivo pivu pivem", "piva piv pivům piva piva pivech pivy"),
    ("Brno_;G", "N", "Brno Brna Brnu Brno Brno Brně Brnem", None),
    ("pán", "M", "pán pána pánovi pána pane pánovi pánem", "páni pánů pánům pány páni pánech pány"),
    ("student", "M", "student studenta studentovi studenta studente studentovi studentem", "studenti studentů studentům studenty studenti studentech studenty"),
    ("doktor", "M", "doktor doktora doktorovi doktora doktore doktorovi doktorem", "doktoři doktorů doktorům doktory doktoři doktorech doktory"),
    ("soused", "M", "soused souseda sousedovi souseda soused sousedovi sousedem", "sousedé sousedů sousedům sousedy sousedé sousedech sousedy"),
    ("pes_^(zvíře)", "M", "pes psa psovi psa pse psovi psem", "psi psů psům psy psi psech psy"),
    ("Novák_;S", "M", "Novák Nováka Novákovi Nováka Nováku Novákovi Novákem", None),
]

# Nouns the dictionary deliberately lacks, so the corpus has OOV forms.
OOV_NOUNS = [
    ("robot", "M", "robot robota robotovi robota robote robotovi robotem", "roboti robotů robotům roboty roboti robotech roboty"),
    ("dron", "I", "dron dronu dronu dron drone dronu dronem", "drony dronů dronům drony drony dronech drony"),
]

# hard adjectives: stem; nominative and accusative only
ADJECTIVES = ["nov", "velk", "star", "mal", "dobr", "česk"]
ADJ_ENDINGS = {
    ("M", "S", "1"): "ý", ("I", "S", "1"): "ý", ("F", "S", "1"): "á", ("N", "S", "1"): "é",
    ("M", "S", "4"): "ého", ("I", "S", "4"): "ý", ("F", "S", "4"): "ou", ("N", "S", "4"): "é",
    ("M", "P", "1"): "í", ("I", "P", "1"): "é", ("F", "P", "1"): "é", ("N", "P", "1"): "á",
    ("M", "P", "4"): "é", ("I", "P", "4"): "é", ("F", "P", "4"): "é", ("N", "P", "4"): "á",
}

# lemma, aspect, 3sg, 3pl, infinitive form, transitive
VERBS = [
    ("dělat_:T", "I", "dělá", "dělají", "dělat", True),
    ("vidět_:T", "I", "vidí", "vidí", "vidět", True),
    ("psát_:T", "I", "píše", "píšou", "psát", True),
    ("mít_:T", "I", "má", "mají", "mít", True),
    ("číst_:T", "I", "čte", "čtou", "číst", True),
    ("hledat_:T", "I", "hledá", "hledají", "hledat", True),
    ("pracovat_:T", "I", "pracuje", "pracují", "pracovat", False),
    ("spát_:T", "I", "spí", "spí", "spát", False),
    ("stát-2_^(na_nohou)_:T", "I", "stojí", "stojí", "stát", False),
    ("být", "I", "je", "jsou", "být", False),
]

# preposition form, lemma, case
PREPS = [("v", "v-1", "6"), ("na", "na-1", "6"), ("na", "na-1", "4"), ("do", "do-1", "2"),
         ("z", "z-1", "2"), ("k", "k-1", "3"), ("s", "s-1", "7"), ("bez", "bez-1", "2")]

ADVERBS = [("dnes", "dnes"), ("také", "také"), ("už", "už"), ("velmi", "velmi"),
           ("ještě", "ještě-1"), ("ještě", "ještě-2"), ("jak", "jak-2")]

ABBREVIATIONS = [("Dr.", "Dr-1_:B_^(doktor)", "NNMXX-----A---8"),
                 ("např.", "např_:B_^(například)", "Db------------8"),
                 ("tzv.", "tzv_:B_^(takzvaný)", "AAXXX----1A---8"),
                 ("ČR", "ČR_:B_;G_^(Česká_republika)", "NNFXX-----A---8")]


def noun_paradigm(entry):
    lemma, gender, sg, pl = entry
    cells = []
    for number, forms in (("S", sg), ("P", pl)):
        if forms is None:
            continue
        for case, form in zip(CASES, forms.split()):
            cells.append((form, lemma, noun_tag(gender, number, case), number, case))
    return cells


def dictionary_entries():
    entries = []
    for n in NOUNS:
        entries.extend((f, l, t) for f, l, t, _, _ in noun_paradigm(n))
    for stem in ADJECTIVES:
        for (g, n, c), ending in ADJ_ENDINGS.items():
            entries.append((stem + ending, stem + "ý", adj_tag(g, n, c)))
    for lemma, aspect, sg, pl, inf, _ in VERBS:
        entries.append((sg, lemma, verb_tag("S", aspect)))
        entries.append((pl, lemma, verb_tag("P", aspect)))
        entries.append((inf, lemma, inf_tag(aspect)))
    entries.append(("jsem", "být", "VB-S---1P-AAI--"))
    for form, lemma, case in PREPS:
        entries.append((form, lemma, prep_tag(case)))
    for form, lemma in ADVERBS:
        entries.append((form, lemma, ADVERB))
    entries += [("a", "a-1", COORD), ("ale", "ale", COORD), ("že", "že", SUBORD),
                ("on", "on-1", "PEYS1--3-------"), ("ona", "on-1", "PEFS1--3-------"),
                ("ona", "on-1", "PENP1--3-------")]
    entries += ABBREVIATIONS
    for p in [".", ",", "!", "?"]:
        entries.append((p, p, PUNCT))
    return sorted(set(entries))


class Generator:
    def __init__(self, seed):
        self.rng = random.Random(seed)
        self.nouns = NOUNS + OOV_NOUNS

    def pick_noun(self, case, number=None):
        entry = self.rng.choice(self.nouns)
        cells = [c for c in noun_paradigm(entry) if c[4] == case and (number is None or c[3] == number)]
        if not cells:
            cells = [c for c in noun_paradigm(entry) if c[4] == case]
        if not cells:
            return self.pick_noun(case, number)
        form, lemma, tag, n, _ = self.rng.choice(cells)
        return [(form, lemma, tag)], entry[1], n

    def noun_phrase(self, case):
        words, gender, number = self.pick_noun(case)
        proper = words[0][1][0].isupper()
        if case in "14" and not proper and self.rng.random() < 0.4:
            stem = self.rng.choice(ADJECTIVES)
            form = stem + ADJ_ENDINGS[(gender, number, case)]
            words.insert(0, (form, stem + "ý", adj_tag(gender, number, case)))
        return words, number

    def clause(self):
        if self.rng.random() < 0.15:
            subject = [("Dr.", ABBREVIATIONS[0][1], ABBREVIATIONS[0][2]),
                       ("Novák", "Novák_;S", noun_tag("M", "S", "1"))]
            number = "S"
        elif self.rng.random() < 0.1:
            subject, number = [("on", "on-1", "PEYS1--3-------")], "S"
        else:
            subject, number = self.noun_phrase("1")
        lemma, aspect, sg, pl, _, transitive = self.rng.choice(VERBS)
        verb = [(sg if number == "S" else pl, lemma, verb_tag(number, aspect))]
        rest = []
        if transitive and self.rng.random() < 0.7:
            rest, _ = self.noun_phrase("4")
        elif self.rng.random() < 0.6:
            form, plemma, case = self.rng.choice(PREPS)
            np, _ = self.noun_phrase(case)
            rest = [(form, plemma, prep_tag(case))] + np
        words = subject + verb + rest
        if self.rng.random() < 0.25:
            form, alemma = self.rng.choice(ADVERBS)
            words.insert(len(subject) + 1, (form, alemma, ADVERB))
        return words

    def sentence(self):
        words = self.clause()
        r = self.rng.random()
        if r < 0.2:
            conj = self.rng.choice([("ale", "ale", COORD), ("a", "a-1", COORD)])
            if conj[0] == "ale":
                words.append((",", ",", PUNCT))
            words += [conj] + self.clause()
        elif r < 0.3:
            words = [("např.", ABBREVIATIONS[1][1], ABBREVIATIONS[1][2])] + words
        elif r < 0.35:
            words += [("v", "v-1", prep_tag("6")), ("ČR", ABBREVIATIONS[3][1], ABBREVIATIONS[3][2])]
        words.append(self.rng.choice([(".", ".", PUNCT)] * 8 + [("!", "!", PUNCT), ("?", "?", PUNCT)]))
        first = words[0][0]
        if first[0].islower():
            words[0] = (first[0].upper() + first[1:],) + words[0][1:]
        return words


def corpus(seed, n):
    gen = Generator(seed)
    return [gen.sentence() for _ in range(n)]


def text_of(words):
    out = ""
    for i, (form, _, _) in enumerate(words):
        if i and form not in ".,!?":
            out += " "
        out += form
    return out


def conllu(sentences, prefix, annotated=True):
    lines = []
    for k, words in enumerate(sentences, 1):
        lines.append("# sent_id = %s-%d" % (prefix, k))
        lines.append("# text = %s" % text_of(words))
        for i, (form, lemma, tag) in enumerate(words, 1):
            nxt = words[i][0] if i < len(words) else None
            misc = "SpaceAfter=No" if nxt in (".", ",", "!", "?") else "_"
            if annotated:
                lines.append("\t".join([str(i), form, lemma, "_", tag, "_", "_", "_", "_", misc]))
            else:
                lines.append("\t".join([str(i), form, "_", "_", "_", "_", "_", "_", "_", misc]))
        lines.append("")
    return "\n".join(lines) + "\n"


def roundtrip_fixture(rng):
    """50 sentences with assorted comments, multiword tokens, an empty node
    and populated UD columns, for read/write idempotence."""
    upos = {"N": "NOUN", "A": "ADJ", "V": "VERB", "R": "ADP", "D": "ADV", "J": "CCONJ", "Z": "PUNCT", "P": "PRON"}
    gen = Generator(rng.randrange(1 << 30))
    lines = ["# newdoc id = roundtrip", "# global.columns = ID FORM LEMMA UPOS XPOS FEATS HEAD DEPREL DEPS MISC"]
    for k in range(1, 51):
        words = gen.sentence()
        lines.append("# sent_id = rt-%d" % k)
        lines.append("# text = %s" % text_of(words))
        if k % 7 == 0:
            lines.append("# note = tabs\tand  spaces kept")
        if k % 5 == 0:
            # "abys" = "aby" + "jsi"
            words = words[:1] + [("aby", "aby", "J,-------------"), ("jsi", "být", "VB-S---2P-AAI--")] + words[1:]
        for i, (form, lemma, tag) in enumerate(words, 1):
            if k % 5 == 0 and i == 2:
                lines.append("2-3\tabys\t_\t_\t_\t_\t_\t_\t_\t_")
            head = "0" if i == 1 else "1"
            rel = "root" if i == 1 else rng.choice(["nsubj", "obj", "obl", "punct", "advmod"])
            feats = "Case=%s" % tag[4] if tag[0] in "NA" and tag[4].isdigit() else "_"
            misc = "SpaceAfter=No" if i < len(words) and words[i][0] in ".,!?" else "_"
            lines.append("\t".join([str(i), form, lemma, upos.get(tag[0], "X"), tag, feats, head, rel, "%s:%s" % (head, rel), misc]))
            if k == 13 and i == 1:
                lines.append("1.1\tbyl\tbýt\tVERB\t_\t_\t_\t_\t0:root\t_")
        lines.append("")
    return "\n".join(lines) + "\n"


def rule_pairs(entries):
    """Form/lemma pairs for the edit-rule roundtrip, with casing variants."""
    pairs = set()
    for form, lemma, _ in entries:
        proper = lemma.split("_")[0] if lemma != "_" else lemma
        pairs.add((form, proper))
        pairs.add((form.upper(), proper))
        pairs.add((form[:1].upper() + form[1:], proper))
        pairs.add((form, proper.upper()))
    extra = [("úhlům", "úhel"), ("úhlo", "úhel"), ("jsem", "být"), ("lidé", "člověk"),
             ("Lovochemie", "Lovochemie"), ("lovochemie", "Lovochemie"), ("LOVOCHEMIE", "Lovochemie"),
             ("McDonaldovi", "McDonald"), ("iPhonu", "iPhone"), ("ODS", "ODS"), ("Ódy", "óda"),
             ("a", "a"), ("", ""), ("ďáblů", "ďábel"), ("šťastnějšími", "šťastný"),
             ("nejlepší", "dobrý"), ("ještě", "ještě-2"), ("jak", "jak-2"), ("Ř", "ř")]
    pairs.update(p for p in extra if p[0] and p[1])
    return sorted(pairs)


def main():
    os.makedirs(OUT, exist_ok=True)
    entries = dictionary_entries()
    with open(os.path.join(OUT, "dict.tsv"), "w", encoding="utf-8") as f:
        for form, lemma, tag in entries:
            f.write("%s\t%s\t%s\n" % (form, lemma, tag))

    write = lambda name, text: open(os.path.join(OUT, name), "w", encoding="utf-8").write(text)
    write("train.conllu", conllu(corpus(1, 200), "train"))
    write("dev.conllu", conllu(corpus(2, 60), "dev"))
    write("raw.conllu", conllu(corpus(3, 60), "raw", annotated=False))
    write("roundtrip.conllu", roundtrip_fixture(random.Random(4)))
    write("abbreviations.txt", "Dr.\nnapř.\ntzv.\nDoc.\nIng.\n")

    pairs = rule_pairs(entries)
    with open(os.path.join(OUT, "rule_pairs.tsv"), "w", encoding="utf-8") as f:
        for form, lemma in pairs:
            f.write("%s\t%s\n" % (form, lemma))
    print("dict entries %d, rule pairs %d" % (len(entries), len(pairs)), file=sys.stderr)


if __name__ == "__main__":
    main()
