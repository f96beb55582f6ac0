from explain.management.base import (
    EntailmentCommand,
    add_apriori_argument,
    add_dataset_argument,
)
from explain.models import Clustering, Method
from explain.utils import evaluate, load_dataset


class Command(EntailmentCommand):
    help = "Evaluates one sentence representation on a dataset: clusters, pair classes and scores."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        add_dataset_argument(parser)
        parser.add_argument(
            "--method",
            "--stage",
            dest="method",
            choices=[method.value for method in Method],
            default=Method.LOGICAL.value,
        )
        parser.add_argument(
            "--clustering",
            choices=[clustering.value for clustering in Clustering],
            default=Clustering.AHC.value,
        )
        parser.add_argument("--k", type=int, default=None, help="Defaults to the number of expected clusters.")
        parser.add_argument("--seed", type=int, default=0)
        add_apriori_argument(parser)

    def run(self, *args, **options):
        kb = self.knowledge_base(options)
        report = evaluate(
            load_dataset(options["dataset"]),
            Method(options["method"]),
            kb,
            clustering=Clustering(options["clustering"]),
            k=options["k"],
            seed=options["seed"],
            resolve=not options["no_apriori"],
        )
        self.write_json(report.to_dict())
