import json

from django.core.management.base import BaseCommand, CommandError

from FactoidEntailment_project.exceptions import EntailmentError
from kb.utils import load_kb


class EntailmentCommand(BaseCommand):
    """
    Base class of the pipeline commands.

    Subclasses implement ``run``. Pipeline errors become a ``CommandError``
    naming the stage that raised them, exiting with 1 for invalid input and 2
    for an exhausted budget.
    """

    def add_arguments(self, parser):
        parser.add_argument("--kb", default=None, help="Knowledge base JSON file.")

    def handle(self, *args, **options):
        try:
            self.run(*args, **options)
        except EntailmentError as e:
            raise CommandError(f"[{e.stage or 'unknown'}] {e}", returncode=e.exit_code)

    def run(self, *args, **options):
        raise NotImplementedError("subclasses of EntailmentCommand must provide a run() method")

    def knowledge_base(self, options):
        return load_kb(options["kb"])

    def write_json(self, data):
        self.stdout.write(json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True))


def add_dataset_argument(parser, required: bool = True):
    parser.add_argument("--dataset", required=required, help="YAML dataset file.")


def add_apriori_argument(parser):
    parser.add_argument(
        "--no-apriori",
        action="store_true",
        help="Skip multi-word entity resolution and grouping.",
    )
