"""chcelim: eliminate integer-list structure from constrained Horn clauses by
fold/unfold transformation with difference predicates and auxiliary queries,
checked by a bounded ground oracle."""

__version__ = "0.1.0"
