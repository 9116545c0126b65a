"""neuro: autism screening from code-switched (English/Hindi) child speech.

Pipeline: WAV decode -> 16 kHz resample -> transcription + paralinguistic
embedding (pluggable backends with deterministic stubs) -> linguistic and
pooled embedding features -> five classifier families -> stratified 5-fold
evaluation, model artifacts, and an HTTP prediction service.
"""

from .audio import AudioClip, decode_audio, encode_wav_pcm16, resample
from .classifiers import (FeatureKind, Label, ModelFamily, ModelSpec,
                          TrainedModel, classify, fuse_features, predict_proba,
                          train)
from .errors import NeuroError
from .evaluation import (EvalReport, FoldAssignment, accuracy, evaluate_cv,
                         macro_f1, render_report, stratified_kfold)
from .linguistic import (LanguageTag, LinguisticFeatures,
                         count_switch_points, extract_linguistic_features,
                         identify_token_language)
from .paralinguistic import (FrameEmbeddings, ParalinguisticEmbedding,
                             StubEmbeddingBackend, embed, pool_embedding)
from .transcription import (StubTranscriptionBackend, TimedToken,
                            TimedTranscript, segment_sentences, transcribe)

__version__ = "0.1.0"

__all__ = [
    "AudioClip", "decode_audio", "encode_wav_pcm16", "resample",
    "FeatureKind", "Label", "ModelFamily", "ModelSpec", "TrainedModel",
    "classify", "fuse_features", "predict_proba", "train",
    "NeuroError",
    "EvalReport", "FoldAssignment", "accuracy", "evaluate_cv", "macro_f1",
    "render_report", "stratified_kfold",
    "LanguageTag", "LinguisticFeatures", "count_switch_points",
    "extract_linguistic_features", "identify_token_language",
    "FrameEmbeddings", "ParalinguisticEmbedding", "StubEmbeddingBackend",
    "embed", "pool_embedding",
    "StubTranscriptionBackend", "TimedToken", "TimedTranscript",
    "segment_sentences", "transcribe",
    "__version__",
]
