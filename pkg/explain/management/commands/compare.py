import logging
from pathlib import Path

from apriori.utils import load_dep_graph
from explain.management.base import (
    EntailmentCommand,
    add_apriori_argument,
    add_dataset_argument,
)
from explain.utils import explain_pair, load_dataset, render_report, run_pipeline, sentence_formula
from FactoidEntailment_project.exceptions import ValidationError

logger = logging.getLogger(__name__)


class Command(EntailmentCommand):
    help = (
        "Explains the entailment from a first sentence to a second one. Sentences are "
        "dataset indices when --dataset is given, dependency graph files otherwise."
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("first")
        parser.add_argument("second")
        add_dataset_argument(parser, required=False)
        parser.add_argument("--html", default=None, help="Directory for a static HTML report.")
        add_apriori_argument(parser)

    def sentence(self, reference, dataset, kb, resolve):
        if dataset is None:
            graph = load_dep_graph(reference)
            return graph.text, run_pipeline(graph, kb, resolve).formula
        try:
            index = int(reference)
            if index < 0:
                raise IndexError(index)
            sentence = dataset.sentences[index]
        except (ValueError, IndexError):
            raise ValidationError(
                f"'{reference}' is not a sentence index of {dataset.name} (0-{dataset.n - 1})",
                stage="explain",
            )
        return sentence.text, sentence_formula(sentence, kb, resolve)

    def run(self, *args, **options):
        kb = self.knowledge_base(options)
        dataset = load_dataset(options["dataset"]) if options["dataset"] else None
        resolve = not options["no_apriori"]
        first_text, first = self.sentence(options["first"], dataset, kb, resolve)
        second_text, second = self.sentence(options["second"], dataset, kb, resolve)
        explanation = explain_pair(first, second, kb, texts=(first_text, second_text))
        if options["html"]:
            directory = Path(options["html"])
            directory.mkdir(parents=True, exist_ok=True)
            path = directory / "report.html"
            path.write_text(render_report(explanation), encoding="utf-8")
            logger.info("wrote %s", path)
        self.write_json(explanation.to_dict())
