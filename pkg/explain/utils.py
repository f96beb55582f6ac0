import logging
import statistics
import time
from collections import defaultdict
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np
import yaml
from django.template.loader import render_to_string

from apriori.models import DepGraph
from apriori.utils import coalesce_groups, load_dep_graph
from evaluation.models import AlignmentEdge, AlignmentNode, NodeKind, SimilarityMatrix
from evaluation.utils import (
    ahc_complete,
    alignment_edges,
    classification_metrics,
    clustering_metrics,
    complete_linkage,
    derive_thresholds,
    graph_alignment,
    k_medoids,
    pairwise,
    symmetrize,
    three_way_from_score,
    token_cosine,
    tokens,
)
from FactoidEntailment_project.exceptions import ParseError, ValidationError
from fol.models import Formula, FormulaKind, Term
from fol.parser import parse
from fol.utils import render, render_proposition, to_fol
from kb.models import KnowledgeBase
from kernel.utils import construct_final_kernel, render_entity, render_kernel
from reason.models import Verdict
from reason.utils import compare_formulas, confidence, support, tabular_semantics
from rewrite.utils import build_intermediate

from .models import (
    Clustering,
    Dataset,
    EvaluationReport,
    Explanation,
    Method,
    PipelineRun,
    Sentence,
    StageTiming,
)
from .schema import DATASET_SCHEMA
from .serializers import DatasetSerializer

logger = logging.getLogger(__name__)

STAGES = ("apriori", "rewrite", "kernel", "fol", "reason")


# Datasets


def build_dataset(document, origin: str = "<dataset>", base: Path | None = None) -> Dataset:
    """
    Builds a dataset from a decoded YAML document.

    Graph paths are resolved against ``base``. Ordered pairs missing from
    ``expected_pairs`` are indifferent.

    Raises:
        ParseError: If the document breaks the schema.
        ValidationError: If clusters do not partition the sentences or a pair is out of range.
    """
    for error in jsonschema.Draft7Validator(DATASET_SCHEMA).iter_errors(document):
        where = "/".join(str(part) for part in error.absolute_path) or "<root>"
        raise ParseError(f"{origin}: {where}: {error.message}", stage="explain")
    serializer = DatasetSerializer(data=document)
    if not serializer.is_valid():
        raise ValidationError(f"{origin}: {serializer.errors}", stage="explain")
    data = serializer.validated_data

    base = Path(base) if base is not None else Path.cwd()
    sentences = [
        Sentence(
            text=entry["text"],
            formula=entry["formula"],
            graph=base / entry["graph"] if entry["graph"] else None,
        )
        for entry in data["sentences"]
    ]
    n = len(sentences)
    pairs = {(i, j): Verdict.INDIFFERENCE for i in range(n) for j in range(n)}
    for verdict, listed in data["expected_pairs"].items():
        for i, j in listed:
            pairs[i, j] = Verdict(verdict)
    return Dataset(
        name=data["name"] or origin,
        sentences=sentences,
        expected_clusters=data["expected_clusters"],
        expected_pairs=pairs,
    )


def load_dataset(path: str | Path) -> Dataset:
    """
    Loads a YAML dataset file.

    Raises:
        ParseError: If the file is missing or is not valid YAML.
        ValidationError: If the dataset breaks its invariants.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as dataset_file:
            document = yaml.safe_load(dataset_file)
    except FileNotFoundError:
        raise ParseError(f"dataset not found at '{path}'", stage="explain")
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1} column {mark.column + 1}" if mark else "unknown position"
        raise ParseError(f"{path}: {where}: {e}", stage="explain")
    else:
        return build_dataset(document, origin=path.stem, base=path.parent)


# Sentences


def parse_formula(text: str) -> Formula:
    try:
        return parse(text)
    except ValueError as e:
        raise ParseError(f"formula '{text}': {e}", stage="fol")


def describe_graph(graph: DepGraph) -> str:
    def name(node_id):
        entity = graph.nodes.get(node_id)
        return render_entity(entity) if entity is not None else "None"

    return "; ".join(f"{edge.label}({name(edge.source)}, {name(edge.target)})" for edge in graph.edges)


def run_pipeline(graph: DepGraph, kb: KnowledgeBase, resolve: bool = True) -> PipelineRun:
    """
    Compiles a dependency graph into a formula, keeping every intermediate stage.

    Args:
        graph (DepGraph): The loaded dependency graph.
        kb (KnowledgeBase): The knowledge base.
        resolve (bool): When False, multi-word resolution and grouping are skipped.

    Returns:
        PipelineRun: The coalesced and intermediate graphs, the kernel and the formula.
    """
    coalesced = coalesce_groups(graph, kb, resolve=resolve)
    intermediate = build_intermediate(coalesced, kb)
    kernel = construct_final_kernel(intermediate, kb)
    formula = to_fol(kernel)
    logger.debug("compiled '%s' into %s", graph.text, render(formula))
    return PipelineRun(
        graph=graph,
        coalesced=coalesced,
        intermediate=intermediate,
        kernel=kernel,
        formula=formula,
    )


def trace(run: PipelineRun) -> list[tuple[str, str]]:
    return [
        ("graph", describe_graph(run.graph)),
        ("apriori", describe_graph(run.coalesced)),
        ("rewrite", describe_graph(run.intermediate)),
        ("kernel", render_kernel(run.kernel)),
        ("fol", render(run.formula)),
    ]


def sentence_formula(sentence: Sentence, kb: KnowledgeBase, resolve: bool = True) -> Formula:
    """
    The formula of a sentence, compiled from its graph when it has one.

    A reviewed formula is then only a cross-check: a compiled formula that
    differs from it is logged and still used. Sentences without a graph use
    their reviewed formula.
    """
    if sentence.graph is None:
        return parse_formula(sentence.formula)
    formula = run_pipeline(load_dep_graph(sentence.graph), kb, resolve).formula
    if resolve and sentence.formula is not None and render(formula) != sentence.formula:
        logger.warning(
            "compiled '%s' differs from reviewed '%s' for: %s",
            render(formula),
            sentence.formula,
            sentence.text,
        )
    return formula


# Explanations


def explain_pair(
    first: Formula,
    second: Formula,
    kb: KnowledgeBase,
    texts: tuple = ("", ""),
    cap: int | None = None,
) -> Explanation:
    """
    Explains the entailment from one formula to another.

    Args:
        first (Formula): The premise.
        second (Formula): The hypothesis.
        kb (KnowledgeBase): The knowledge base.
        texts (tuple): The two sentence texts, for display.
        cap (int, optional): Maximum atoms per formula.

    Returns:
        Explanation: Atoms, their motivations, the joined worlds and the confidence.

    Raises:
        AtomBudgetExceeded: If either formula has too many atoms.
        ValidationError: If the confidence disagrees with the emitted world table.
    """
    comparison = compare_formulas(first, second, kb, cap)
    table = comparison.table
    value = confidence(comparison.sentence_a, comparison.sentence_b, table)
    average = support(comparison.sentence_a, comparison.sentence_b, table)
    if value != average:
        raise ValidationError(
            f"confidence {value} disagrees with the world table average {average}", stage="explain"
        )
    atoms = {
        label: render_proposition(atom)
        for atom, label in zip(
            comparison.atoms_a + comparison.atoms_b, comparison.labels_a + comparison.labels_b
        )
    }
    return Explanation(
        sentences=tuple(texts),
        formulas=(render(first), render(second)),
        atoms=atoms,
        motivations=dict(comparison.motivations),
        world_table=table,
        confidence=value,
        support=average,
    )


def _fraction(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def render_report(explanation: Explanation) -> str:
    """The static HTML report of an explanation."""
    table = explanation.world_table
    return render_to_string(
        "explain/report.html",
        {
            "sentences": zip(("A", "B"), explanation.sentences, explanation.formulas),
            "atoms": sorted(explanation.atoms.items()),
            "motivations": explanation.motivation_rows(),
            "columns": table.columns,
            "rows": table.rows,
            "confidence": _fraction(explanation.confidence),
            "support": _fraction(explanation.support),
            "verdict": explanation.verdict.value,
        },
    )


# Matrices


def confidence_matrix(
    formulas: list[Formula], kb: KnowledgeBase, cap: int | None = None, workers: int | None = None
) -> list[list[Fraction]]:
    """Confidence of every ordered pair; row ``i`` holds the confidences from formula ``i``."""

    def score(first: Formula, second: Formula) -> Fraction:
        comparison = compare_formulas(first, second, kb, cap)
        return confidence(comparison.sentence_a, comparison.sentence_b, comparison.table)

    return pairwise(formulas, score, workers)


def _term_node(term: Term | None) -> AlignmentNode | None:
    if term is None:
        return None
    name = f"{term.name} {term.specification}" if term.specification else term.name
    node = AlignmentNode.singleton(name)
    return AlignmentNode(NodeKind.NOT, children=[node]) if term.negated else node


def formula_edges(formula: Formula, negated: bool = False) -> list[AlignmentEdge]:
    """Alignment edges of a formula's atoms, negated under an odd number of negations."""
    if formula.kind == FormulaKind.ATOM:
        proposition = formula.proposition
        target = proposition.args[1] if proposition.is_binary else None
        return [
            AlignmentEdge(
                source=_term_node(proposition.args[0]),
                label=proposition.name,
                target=_term_node(target),
                negated=negated != proposition.negated,
            )
        ]
    flip = formula.kind == FormulaKind.NOT
    return [edge for child in formula.children for edge in formula_edges(child, negated != flip)]


def sentence_edges(sentence: Sentence, kb: KnowledgeBase, resolve: bool) -> list[AlignmentEdge]:
    """
    Alignment edges of a sentence.

    Sentences with a graph use its intermediate graph, coalesced when
    ``resolve`` is set; formula-only sentences fall back to their atoms.
    """
    if sentence.graph is None:
        return formula_edges(parse_formula(sentence.formula))
    graph = coalesce_groups(load_dep_graph(sentence.graph), kb, resolve=resolve)
    return alignment_edges(build_intermediate(graph, kb))


def baseline_matrix(
    dataset: Dataset,
    method: Method,
    kb: KnowledgeBase,
    workers: int | None = None,
    resolve: bool = True,
) -> np.ndarray:
    """The raw, possibly asymmetric, similarity matrix of a baseline."""
    if method == Method.COSINE:
        return np.asarray(pairwise([s.text for s in dataset.sentences], token_cosine, workers))
    logical = method == Method.LG
    edges = [sentence_edges(sentence, kb, resolve=logical and resolve) for sentence in dataset.sentences]
    return np.asarray(
        pairwise(edges, lambda a, b: graph_alignment(a, b, logical=logical), workers)
    )


# Evaluation


def mine_clusters(
    distances: np.ndarray, clustering: Clustering, k: int, seed: int = 0
) -> list[list[int]]:
    if clustering == Clustering.KMEDOIDS:
        return k_medoids(distances, k, seed)
    return ahc_complete(distances, k)


def linkage_list(distances: np.ndarray) -> list[list]:
    """The complete-link merge sequence as ``[i, j, distance, size]`` rows."""
    if len(distances) < 2:
        return []
    return [
        [int(i), int(j), round(float(height), 6), int(size)]
        for i, j, height, size in complete_linkage(distances).tolist()
    ]


def evaluate(
    dataset: Dataset,
    method: Method,
    kb: KnowledgeBase,
    clustering: Clustering = Clustering.AHC,
    k: int | None = None,
    seed: int = 0,
    workers: int | None = None,
    resolve: bool = True,
) -> EvaluationReport:
    """
    Scores every ordered sentence pair with one method, then clusters and classifies.

    The logical method classifies each pair from its confidence. The
    baselines are symmetrized first and classified through thresholds derived
    from the mined clusters and the pairs annotated as inconsistent.

    Args:
        dataset (Dataset): The dataset.
        method (Method): logical, sg, lg or cosine.
        kb (KnowledgeBase): The knowledge base.
        clustering (Clustering): ahc or kmedoids.
        k (int, optional): Number of clusters. Defaults to the number of expected clusters.
        seed (int): Seed of k-medoids.
        workers (int, optional): Size of the worker pool.
        resolve (bool): When False, multi-word resolution and grouping are skipped.

    Returns:
        EvaluationReport: Matrices, clusters, classes and scores.
    """
    k = k or len(dataset.expected_clusters)
    confidences, thresholds = None, None
    if method == Method.LOGICAL:
        formulas = [sentence_formula(sentence, kb, resolve) for sentence in dataset.sentences]
        confidences = confidence_matrix(formulas, kb, workers=workers)
        similarity = SimilarityMatrix([[float(value) for value in row] for row in confidences])
    else:
        raw = baseline_matrix(dataset, method, kb, workers, resolve)
        similarity = SimilarityMatrix((raw + raw.T) / 2.0)

    distances = symmetrize(similarity.distances())
    clusters = mine_clusters(distances, clustering, k, seed)
    if confidences is not None:
        classes = [[Verdict.from_confidence(value) for value in row] for row in confidences]
    else:
        thresholds = derive_thresholds(similarity, clusters, dataset.conflict_pairs())
        classes = [
            [three_way_from_score(float(score), thresholds) for score in row]
            for row in similarity.values
        ]
    predicted = [verdict for row in classes for verdict in row]
    logger.info("evaluated %s on %s with %d clusters", method.value, dataset.name, len(clusters))
    return EvaluationReport(
        dataset=dataset.name,
        method=method,
        clustering=clustering,
        k=k,
        seed=seed,
        similarity=similarity,
        clusters=clusters,
        linkage=linkage_list(distances),
        classes=classes,
        classification=classification_metrics(predicted, dataset.gold()),
        clustering_scores=clustering_metrics(clusters, dataset.expected_clusters, distances),
        thresholds=thresholds,
        confidences=confidences,
    )


# Timing


def _timed_stages(sentence: Sentence, kb: KnowledgeBase):
    started = time.perf_counter()
    if sentence.graph is not None:
        coalesced = coalesce_groups(load_dep_graph(sentence.graph), kb)
        yield "apriori", time.perf_counter() - started
        started = time.perf_counter()
        intermediate = build_intermediate(coalesced, kb)
        yield "rewrite", time.perf_counter() - started
        started = time.perf_counter()
        kernel = construct_final_kernel(intermediate, kb)
        yield "kernel", time.perf_counter() - started
        started = time.perf_counter()
        formula = to_fol(kernel)
    else:
        formula = parse_formula(sentence.formula)
    yield "fol", time.perf_counter() - started
    started = time.perf_counter()
    tabular_semantics(formula)
    yield "reason", time.perf_counter() - started


def bench(dataset: Dataset, kb: KnowledgeBase, repetitions: int = 5) -> list[StageTiming]:
    """
    Median wall-clock time of every pipeline stage, per sentence.

    Sentences without a graph only time formula parsing and the world table.

    Raises:
        ValidationError: If ``repetitions`` is below 1.
    """
    if repetitions < 1:
        raise ValidationError(f"need at least one repetition, got {repetitions}", stage="explain")
    timings = []
    for index, sentence in enumerate(dataset.sentences):
        samples = defaultdict(list)
        for _ in range(repetitions):
            for stage, seconds in _timed_stages(sentence, kb):
                samples[stage].append(seconds)
        length = len(tokens(sentence.text))
        timings.extend(
            StageTiming(index, stage, length, statistics.median(samples[stage]))
            for stage in STAGES
            if stage in samples
        )
    return timings
