from apriori.utils import load_dep_graph
from explain.management.base import EntailmentCommand, add_apriori_argument
from explain.utils import run_pipeline, trace
from fol.utils import render


class Command(EntailmentCommand):
    help = "Compiles a dependency graph into its first-order logic formula."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("graph", help="Dependency graph JSON file.")
        parser.add_argument("--trace", action="store_true", help="Print every intermediate stage.")
        add_apriori_argument(parser)

    def run(self, *args, **options):
        kb = self.knowledge_base(options)
        result = run_pipeline(load_dep_graph(options["graph"]), kb, resolve=not options["no_apriori"])
        if not options["trace"]:
            self.stdout.write(render(result.formula))
            return
        for stage, text in trace(result):
            self.stdout.write(f"{stage}: {text}")
