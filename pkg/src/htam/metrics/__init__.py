from .correctness import CorrectnessScores, f1, key_precision, key_recall, score_correctness
from .elo import (
    Battle,
    EloState,
    apply_verdicts,
    battle_order,
    elo_expected,
    elo_update,
    normalize_verdict,
    run_tournament,
)
from .judge import Judge, KeySets, extract_key_sets, format_flow
from .structural import (
    EmbeddingSimilarity,
    SimilarityProvider,
    exact_similarity,
    lexical_similarity,
    max_possible_cost,
    path_similarity,
    weighted_edit_distance,
)

__all__ = [
    "Battle",
    "CorrectnessScores",
    "EloState",
    "EmbeddingSimilarity",
    "Judge",
    "KeySets",
    "SimilarityProvider",
    "apply_verdicts",
    "battle_order",
    "elo_expected",
    "elo_update",
    "exact_similarity",
    "extract_key_sets",
    "f1",
    "format_flow",
    "key_precision",
    "key_recall",
    "lexical_similarity",
    "max_possible_cost",
    "normalize_verdict",
    "path_similarity",
    "run_tournament",
    "score_correctness",
]
