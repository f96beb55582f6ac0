from explain.management.base import (
    EntailmentCommand,
    add_apriori_argument,
    add_dataset_argument,
)
from explain.utils import confidence_matrix, load_dataset, sentence_formula
from reason.models import Verdict, fraction_dict


class Command(EntailmentCommand):
    help = "Prints the confidence and class of every ordered sentence pair of a dataset."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        add_dataset_argument(parser)
        add_apriori_argument(parser)

    def run(self, *args, **options):
        kb = self.knowledge_base(options)
        dataset = load_dataset(options["dataset"])
        formulas = [
            sentence_formula(sentence, kb, resolve=not options["no_apriori"])
            for sentence in dataset.sentences
        ]
        confidences = confidence_matrix(formulas, kb)
        self.write_json(
            {
                "dataset": dataset.name,
                "confidences": [[fraction_dict(value) for value in row] for row in confidences],
                "classes": [[Verdict.from_confidence(value).value for value in row] for row in confidences],
            }
        )
