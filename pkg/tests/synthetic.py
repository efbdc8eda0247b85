"""Synthetic corpora for the acceptance checks."""
import numpy as np

from fortag.sampler import ChannelDocument


def journal_title_corpus(n_records=5000, n_classes=17, journals_per_class=4, seed=0):
    """Records whose journal title alone decides the label.

    Every class owns a few journals whose titles combine class-specific words
    with words shared by all journals.
    """
    rng = np.random.default_rng(seed)
    shared = ["journal", "international", "research", "annals", "review", "reports"]
    journals = []
    for c in range(n_classes):
        topic = [f"topic{c}x{k}" for k in range(3)]
        for j in range(journals_per_class):
            words = [shared[(c + j) % len(shared)], topic[j % 3], topic[(j + 1) % 3]]
            journals.append((" ".join(words), f"class{c:02d}"))
    docs = []
    for i in range(n_records):
        title, label = journals[rng.integers(len(journals))]
        docs.append(ChannelDocument(title, (label,), f"p{i}"))
    return docs


def geometric_priors(n_classes, top=0.40, bottom=0.005):
    ratio = (bottom / top) ** (1 / (n_classes - 1))
    priors = top * ratio ** np.arange(n_classes)
    return priors / priors.sum()


def skewed_corpus(
    n_docs, n_classes=10, vocab_per_class=30, n_noise=60, noise_share=0.3, length=12, seed=0
):
    """Documents drawn from class vocabularies mixed with shared noise words.

    Class priors decay geometrically from about 40% to about 0.5%. Each token is
    a shared noise word with probability ``noise_share``.
    """
    rng = np.random.default_rng(seed)
    priors = geometric_priors(n_classes)
    labels = rng.choice(n_classes, size=n_docs, p=priors)
    docs = []
    for i, c in enumerate(labels):
        is_noise = rng.random(length) < noise_share
        class_words = rng.integers(vocab_per_class, size=length)
        noise_words = rng.integers(n_noise, size=length)
        tokens = [
            f"noise{noise_words[t]}" if is_noise[t] else f"c{c}w{class_words[t]}"
            for t in range(length)
        ]
        docs.append(ChannelDocument(" ".join(tokens), (f"class{c:02d}",), f"s{seed}d{i}"))
    return docs
