"""
Reads back the canonical rendering produced by :func:`fol.utils.render`.

Datasets store reviewed formulas in this notation; the tests also use it to
check that rendering loses nothing.
"""

from attrs import define

from .models import Formula, Proposition, Quantity, Term

QUANTITIES = {quantity.value: quantity for quantity in Quantity}


@define
class FormulaParser:
    text: str
    pos: int = 0

    def error(self, expected: str) -> ValueError:
        return ValueError(f"expected {expected} at {self.pos}: {self.text[self.pos:self.pos + 20]!r}")

    def peek(self, token: str) -> bool:
        return self.text.startswith(token, self.pos)

    def expect(self, token: str) -> None:
        if not self.peek(token):
            raise self.error(repr(token))
        self.pos += len(token)

    def until(self, *stops: str) -> str:
        start = self.pos
        while self.pos < len(self.text) and not any(self.peek(stop) for stop in stops):
            self.pos += 1
        return self.text[start:self.pos]

    def parse(self) -> Formula:
        formula = self.formula()
        if self.pos != len(self.text):
            raise self.error("end of input")
        return formula

    def formula(self) -> Formula:
        children = [self.conjunction()]
        while self.peek(" ∨ "):
            self.expect(" ∨ ")
            children.append(self.conjunction())
        return Formula.or_(*children)

    def conjunction(self) -> Formula:
        children = [self.unary()]
        while self.peek(" ∧ "):
            self.expect(" ∧ ")
            children.append(self.unary())
        return Formula.and_(*children)

    def unary(self) -> Formula:
        if self.peek("¬("):
            self.expect("¬(")
            child = self.formula()
            self.expect(")")
            return Formula.not_(child)
        if self.peek("∃"):
            self.expect("∃")
            binder = self.until(".(")
            self.expect(".(")
            child = self.formula()
            self.expect(")")
            return Formula.exists(binder, child)
        if self.peek("("):
            self.expect("(")
            child = self.formula()
            self.expect(")")
            return child
        return Formula.atom(self.proposition())

    def proposition(self) -> Proposition:
        negated = self.peek("¬")
        if negated:
            self.expect("¬")
        name = self.until("(")
        self.expect("(")
        args = [self.term()]
        while self.peek(", "):
            self.expect(", ")
            args.append(self.term())
        self.expect(")")
        return Proposition(name, args, self.properties(), negated)

    def term(self) -> Term:
        negated = self.peek("¬")
        if negated:
            self.expect("¬")
        symbol = self.text[self.pos:self.pos + 1]
        if symbol in QUANTITIES:
            self.pos += 1
        else:
            # Modifier properties carry no quantity.
            symbol = Quantity.SOME.value
        specification = None
        if self.peek("["):
            self.expect("[")
            name = self.until(" [of] ")
            self.expect(" [of] ")
            specification = self.until("]")
            self.expect("]")
        else:
            name = self.until("[", ",", ")", "]")
        properties = self.properties()
        if name.startswith("?") and specification is None:
            term = Term.var(name, properties)
        else:
            term = Term(name, quantity=QUANTITIES[symbol], specification=specification, properties=properties)
        return term.negate() if negated else term

    def properties(self) -> dict:
        if not self.peek("["):
            return {}
        self.expect("[")
        found = {}
        while True:
            key = self.until(": ")
            self.expect(": ")
            if self.peek("["):
                self.expect("[")
                values = [self.term()]
                while self.peek(", "):
                    self.expect(", ")
                    values.append(self.term())
                self.expect("]")
            else:
                values = [self.term()]
            found[key] = values
            if not self.peek(", "):
                break
            self.expect(", ")
        self.expect("]")
        return found


def parse(text: str) -> Formula:
    """Parses a canonical rendering back into a formula."""
    return FormulaParser(text).parse()
