from .coherence import uci_coherence
from .lda import LDAError, TopicModel, lda_fit, top_words
from .preprocess import BigramParams, TokenizedCorpus, preprocess, select_recent
from .sweep import DEFAULT_GRID, LDAParams, SweepResult, sweep_topic_numbers, topic_report

__all__ = [
    "uci_coherence", "LDAError", "TopicModel", "lda_fit", "top_words", "BigramParams",
    "TokenizedCorpus", "preprocess", "select_recent", "DEFAULT_GRID", "LDAParams",
    "SweepResult", "sweep_topic_numbers", "topic_report",
]
