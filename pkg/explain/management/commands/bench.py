import csv

from explain.management.base import EntailmentCommand, add_dataset_argument
from explain.utils import bench, load_dataset


class Command(EntailmentCommand):
    help = "Times every pipeline stage per sentence and prints the medians as CSV."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        add_dataset_argument(parser)
        parser.add_argument("--repetitions", type=int, default=5)

    def run(self, *args, **options):
        kb = self.knowledge_base(options)
        timings = bench(load_dataset(options["dataset"]), kb, options["repetitions"])
        writer = csv.writer(self.stdout, lineterminator="\n")
        writer.writerow(["sentence", "stage", "tokens", "median_seconds"])
        for timing in timings:
            writer.writerow(timing.to_row())
