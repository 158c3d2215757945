"""Builders and hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from discrel.corpus import (
    RELATIONS, CorefLink, InstancePair, PropBankArg, PropBankFrame, RoleSpan,
    SegmentAnnotation, VerbInfo, make_tokens,
)


def segment(words, roles=(), frames=(), verbs=(), tree=None, dates=0, numbers=0, vp_lengths=()):
    return SegmentAnnotation(
        tokens=make_tokens(words),
        parse_tree=tree,
        main_verbs=tuple(VerbInfo(*v) if isinstance(v, tuple) else v for v in verbs),
        vp_lengths=tuple(vp_lengths),
        date_count=dates,
        number_count=numbers,
        framenet_roles=tuple(RoleSpan(r, tuple(s)) for r, s in roles),
        propbank_frames=tuple(frames),
    )


def instance(iid, seg1, seg2, links=(), gold=()):
    if isinstance(seg1, (list, tuple)):
        seg1 = segment(seg1)
    if isinstance(seg2, (list, tuple)):
        seg2 = segment(seg2)
    return InstancePair(iid, seg1, seg2, tuple(CorefLink(tuple(a), tuple(b)) for a, b in links),
                        frozenset(gold))


def swapped(inst):
    """Exchange the two segments (and the ends of every coref link)."""
    links = tuple(CorefLink(l.mention2_span, l.mention1_span) for l in inst.coref_links)
    return InstancePair(inst.id, inst.seg2, inst.seg1, links, inst.gold_relations)


WORDS = ("he", "she", "bank", "rates", "fell", "rose", "Mr.", "also", "1987", "March", "42", "the")
ROLES = ("Agent", "Purpose", "Theme", "Time", "Ongoing_activity")
LEMMAS = ("work", "rise", "fall")


@st.composite
def segments(draw):
    words = draw(st.lists(st.sampled_from(WORDS), min_size=1, max_size=6))
    n = len(words)

    def span():
        a = draw(st.integers(0, n - 1))
        return (a, draw(st.integers(a + 1, n)))

    roles = [(draw(st.sampled_from(ROLES)), span()) for _ in range(draw(st.integers(0, 3)))]
    frames = []
    for _ in range(draw(st.integers(0, 2))):
        args = tuple(PropBankArg(draw(st.sampled_from(("A0", "A1", "AM-TMP"))), span())
                     for _ in range(draw(st.integers(0, 2))))
        frames.append(PropBankFrame(draw(st.sampled_from(LEMMAS)),
                                    draw(st.sampled_from((None, "45.6", "73.2"))), args))
    verbs = [VerbInfo(draw(st.sampled_from(LEMMAS)), draw(st.sampled_from(("past", "present", "none"))),
                      draw(st.sampled_from((None, "will"))))
             for _ in range(draw(st.integers(0, 2)))]
    tree = None
    if draw(st.booleans()):
        tree = "(S " + " ".join(f"(NN {w})" for w in words) + ")"
    return segment(words, roles, frames, verbs, tree,
                   dates=draw(st.integers(0, 3)), numbers=draw(st.integers(0, 3)),
                   vp_lengths=draw(st.lists(st.integers(1, 9), max_size=3)))


@st.composite
def instances(draw, iid="h0"):
    s1, s2 = draw(segments()), draw(segments())
    links = []
    for _ in range(draw(st.integers(0, 7))):
        a = draw(st.integers(0, len(s1) - 1))
        b = draw(st.integers(0, len(s2) - 1))
        links.append(((a, a + 1), (b, b + 1)))
    gold = draw(st.sets(st.sampled_from(RELATIONS), max_size=2))
    return instance(iid, s1, s2, links, gold)
