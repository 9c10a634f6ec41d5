"""Planted-pattern corpora for end-to-end checks.

Background text is drawn from a pool of common CJK characters. Fake items
additionally carry two to four marker n-grams built from characters that
never occur in real items, placed inside the first ``visible`` characters
so truncation cannot hide them.
"""
import numpy as np

from .datapipe.records import FAKE, REAL, NewsRecord

BACKGROUND = (
    "的一是不了人我在有他这中大来上国个到说们为子和你地出道也时年得就那要下以生会自着去之过家学对可她"
    "里后小么心多天而能好都然没日于起还发成事只作当想看文无开手十用主行方又如前所本见经头面公同三已老"
    "从动两长知民样现分将外但身些与高意进把法此实回二理美点月明其种声全工己话儿者向情部正名定女问力机"
    "给等几很业最间新什打便位因重被走电四第门相次东政海口使教西再平真听世气信北少关并内加化由却代军产"
)
MARKER_CHARS = "谣惊秘震爆骇曝"
MARKERS = ("谣惊秘", "震爆骇", "曝秘惊", "骇谣震")
TOPIC = ("疫情", "新冠", "疫苗", "口罩", "核酸检测")
TERMINATORS = "。！？"


def _background(rng, n):
    out = []
    while len(out) < n:
        run = int(rng.integers(12, 30))
        out.extend(rng.choice(list(BACKGROUND), size=run))
        out.append(TERMINATORS[int(rng.integers(0, 3))])
    return out[:n]


def make_document(rng, length, fake, visible=256, topic=True):
    chars = _background(rng, length)
    if topic:
        word = TOPIC[int(rng.integers(0, len(TOPIC)))]
        pos = int(rng.integers(0, length - len(word)))
        chars[pos:pos + len(word)] = list(word)
    if fake:
        window = min(length, visible)
        for _ in range(int(rng.integers(2, 5))):
            marker = MARKERS[int(rng.integers(0, len(MARKERS)))]
            pos = int(rng.integers(0, window - len(marker) + 1))
            chars[pos:pos + len(marker)] = list(marker)
    return "".join(chars)


def planted_corpus(n=2000, fake_fraction=0.25, min_len=80, max_len=300, seed=0, visible=256, topic=True):
    """``n`` records; exactly ``round(n * fake_fraction)`` are fake."""
    rng = np.random.default_rng(seed)
    n_fake = int(round(n * fake_fraction))
    labels = np.array([FAKE] * n_fake + [REAL] * (n - n_fake))
    rng.shuffle(labels)
    records = []
    for i, label in enumerate(labels):
        length = int(rng.integers(min_len, max_len + 1))
        text = make_document(rng, length, label == FAKE, visible, topic)
        records.append(NewsRecord.create(id=str(i + 1), title="", summary="", text=text,
                                         label=int(label), time=f"2020-{1 + i % 12:02d}-{1 + i % 28:02d}"))
    return records
