"""
Feature strings for one annotated segment pair
==============================================

Builds a single instance by hand, annotations included, and prints what
each feature type extracts from it.
"""

from discrel.corpus import BrownLexicon, PropBankArg, PropBankFrame, RoleSpan
from discrel.corpus import CorefLink, InstancePair, SegmentAnnotation, VerbInfo, make_tokens
from discrel.features import extract, parse_feature_type

# A tiny Brown lexicon: word -> bit-string path.
lexicon = BrownLexicon({"he": "11100110", "phoned": "11110110", "weekend": "11000100"})

seg1 = SegmentAnnotation(
    tokens=make_tokens(["Mr.", "Brady", "phoned", "Mr.", "Greenspan"]),
    parse_tree="(S (NP (NNP Mr.) (NNP Brady)) (VP (VBD phoned) (NP (NNP Mr.) (NNP Greenspan))))",
    main_verbs=(VerbInfo("phone", "past"),),
    vp_lengths=(3,),
)
seg2 = SegmentAnnotation(
    tokens=make_tokens("He continued to work the phones through the weekend .".split()),
    main_verbs=(VerbInfo("continue", "past"),),
    vp_lengths=(8,),
    framenet_roles=(RoleSpan("Agent", (0, 1)), RoleSpan("Ongoing_activity", (3, 4))),
    propbank_frames=(PropBankFrame("work", "73.2", (PropBankArg("A0", (0, 1)),)),),
)
pair = InstancePair("demo-1", seg1, seg2, (CorefLink((0, 2), (0, 1)),), frozenset({"Temporal"}))

# %%
# Surface feature types need no lexicon; the rest look words up in it.
for key in ("first_last", "dates_numbers", "verb", "production_rules", "coref",
            "brown", "brown[4]", "pairwise_brown",
            "framenet", "framenet[nocluster]", "propbank[verbnet]", "propbank[lemma]"):
    feats = extract(pair, parse_feature_type(key), lexicon)
    print(f"{key:22s} {' '.join(feats)}")

# %%
# Swapping the segments moves every per-segment feature to the other prefix.
swapped = InstancePair("demo-1r", seg2, seg1)
print()
print("framenet, swapped:", extract(swapped, parse_feature_type("framenet"), lexicon))
