"""Self-supervised program repair on the Jay mini-language.

Twin sequence models (a fixer and a breaker) train each other through
critic-filtered back-translation over a seed corpus of small imperative
programs, bootstrapped from rule-based corruptions. Includes the full
evaluation harness: perfect-fault-localization repair, plausibility and
normalized-AST correctness assessment, and patch compilability.
"""

__version__ = "0.1.0"
