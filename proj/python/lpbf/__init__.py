"""Python bindings for the lpbf defect-regime toolkit."""

from ._core import (  # noqa: F401
    LpbfError,
    CriteriaConfig,
    UnknownPolicy,
    Verdict,
    CriterionOutcome,
    DefectLabels,
    MeltPoolDims,
    ProcessParameters,
    Record,
    Source,
    Split,
    ParseResult,
    Prediction,
    TrainIndex,
    EvalReport,
    PcaProjection,
    PromptTemplate,
    CorpusExample,
    balling_criterion,
    build_index,
    builtin_templates,
    canonicalize_material,
    classify,
    evaluate,
    format_number,
    keyhole_criterion,
    lof_criterion,
    normalize_quantity,
    parse_baseline,
    parse_prompt,
    pca_project,
    predict,
    predict_with_dims,
    render_baseline,
    render_prompts,
    load_templates,
    run_pipeline,
)
