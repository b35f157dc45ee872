"""Automated Pyramid scoring for summarization evaluation.

The package extracts content units from reference summaries (sentences,
sampled n-grams, semantic-graph splits, or language-model decompositions),
scores system summaries by how strongly each unit is present, and
meta-evaluates metrics against human judgments at the system and summary
level.
"""

__version__ = "0.1.0"

from .amr import (  # noqa: F401
    AmrGraph,
    Attribute,
    Edge,
    PenmanEntry,
    isomorphic,
    load_penman_file,
    parse_penman,
    save_penman_file,
    serialize_penman,
    subgraph,
)
from .data import (  # noqa: F401
    Reference,
    ReferenceEntry,
    SystemSummary,
    UnitFileRow,
    load_dataset,
    load_units,
    save_units,
)
from .extract import (  # noqa: F401
    ContentUnit,
    ExtractionConfig,
    extract_ngram_units,
    extract_sentence_units,
    extract_sgu_units,
    extract_smu_units,
    import_units,
)
from .presence import (  # noqa: F401
    PresenceResult,
    lexical_presence,
    lexical_scorer,
    remote_presence,
    remote_scorer,
    score_summary,
)
from .smu import (  # noqa: F401
    CoreRoleEdge,
    PredicateNode,
    SmuCandidate,
    find_predicates,
    realize_baseline,
    realize_remote,
    split_graph,
)
from .stats import (  # noqa: F401
    CorpusStats,
    CorrelationReport,
    EasinessReport,
    average_ranks,
    cohen_kappa,
    corpus_stats,
    easiness,
    pearson,
    spearman,
    summary_level,
    system_level,
    wilcoxon_signed_rank,
)
from .text import (  # noqa: F401
    SentenceSpan,
    enumerate_ngrams,
    rouge1_f1,
    split_sentences,
    tokenize,
)
